//! Running, checking and benchmarking the algorithms on an instance.

use std::fmt;
use std::str::FromStr;

use crate::backstop::{
    boost_run, Backstop, BoostConfig, BoxedAlgorithm, DayMachine, EpochReport, FromScratch, Stepper,
};
use crate::decremental::DecrementalAdapter;
use crate::engine::{Engine, EngineConfig, WorkCounters};
use crate::error::Error;
use crate::generate::{generate, ErrorModel, ProblemKind, Workload};
use crate::incremental::{IncrementalAdapter, IncrementalContract, Lifted};
use crate::model::{
    validate_bundle_sequence, validate_stream, Day, FeedKind, GroundSet, Payload, Prediction, PredictionBundle,
    PredictionFeed, RealEvent, RealizedEvent,
};
use crate::problems::connectivity::Connectivity;
use crate::problems::counter::Counter;
use crate::problems::decmax::DecrementalMax;
use crate::problems::msf::Msf;
use crate::problems::Oracle;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Predicted,
    Offline,
    BruteForce,
    Backstopped,
    Boosted,
    /// Only deletion days are predicted, each handed over with its insertion.
    PredictedDeletion,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Predicted => "predicted",
            Mode::Offline => "offline",
            Mode::BruteForce => "brute-force",
            Mode::Backstopped => "backstopped",
            Mode::Boosted => "boosted",
            Mode::PredictedDeletion => "predicted-deletion",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode, Error> {
        match s {
            "predicted" => Ok(Mode::Predicted),
            "offline" => Ok(Mode::Offline),
            "brute-force" => Ok(Mode::BruteForce),
            "backstopped" => Ok(Mode::Backstopped),
            "boosted" => Ok(Mode::Boosted),
            "predicted-deletion" => Ok(Mode::PredictedDeletion),
            _ => Err(Error::InvalidParameters(format!("unknown mode `{s}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub problem: ProblemKind,
    pub vertices: u32,
    pub horizon: u32,
    pub ground: GroundSet,
    pub stream: Vec<RealizedEvent>,
    pub predictions: Vec<Prediction>,
    pub bundles: Vec<PredictionBundle>,
}

impl Instance {
    /// Checks the stream and bundles. Payloads come from the stream; the
    /// vertex count is at least one past the largest endpoint seen.
    pub fn new(
        problem: ProblemKind,
        vertices: u32,
        stream: Vec<RealizedEvent>,
        predictions: Vec<Prediction>,
        bundles: Vec<PredictionBundle>,
    ) -> Result<Instance, Error> {
        validate_stream(&stream)?;
        validate_bundle_sequence(&bundles)?;
        if stream.is_empty() {
            return Err(Error::InvalidStream("the stream is empty".into()));
        }
        let ground = GroundSet::from_stream(&stream);
        let mut n = vertices;
        for r in &stream {
            match (&r.event.payload, problem) {
                (Some(Payload::Edge { u, v, .. }), ProblemKind::Connectivity | ProblemKind::Msf) => {
                    n = n.max(u.max(v) + 1)
                }
                (Some(Payload::Value(_)), ProblemKind::DecMax) | (_, ProblemKind::Counter) => {}
                _ => {
                    return Err(Error::InvalidStream(format!(
                        "day {}: element {} lacks the payload {problem} needs",
                        r.day, r.event.element
                    )))
                }
            }
        }
        Ok(Instance { problem, vertices: n, horizon: stream.len() as u32, ground, stream, predictions, bundles })
    }

    pub fn from_workload(w: &Workload) -> Instance {
        Instance {
            problem: w.problem,
            vertices: w.vertices,
            horizon: w.horizon,
            ground: w.ground.clone(),
            stream: w.stream.clone(),
            predictions: w.predictions.clone(),
            bundles: w.bundles.clone(),
        }
    }

    fn events(&self) -> Vec<RealEvent> {
        self.stream.iter().cloned().map(RealEvent::from).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub mode: Mode,
    pub seed: u64,
    /// Engines in the backstop, or instances per doubling when boosting.
    pub k: u32,
    pub instances_cap: u32,
}

impl RunOptions {
    pub fn new(mode: Mode, seed: u64) -> RunOptions {
        RunOptions { mode, seed, k: 1, instances_cap: 8 }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub outputs: Vec<String>,
    /// Engine counters; for the backstop those of its first engine.
    pub counters: Option<WorkCounters>,
    pub depth: Option<u32>,
    pub work: u64,
    pub meta_steps: Option<u64>,
    /// Largest step spread seen between backstop members after any step.
    pub max_spread: u64,
    pub epochs: Vec<EpochReport>,
}

type Machine<O> = Box<dyn DayMachine<Output = O>>;

/// Hands every event to the inner machine with its predicted day attached.
struct Fed<M> {
    machine: M,
    feed: PredictionFeed,
}

impl<M: DayMachine> DayMachine for Fed<M> {
    type Output = M::Output;

    fn run_day(&mut self, ev: &RealEvent) -> Result<M::Output, Error> {
        let ev = self.feed.annotate(ev.day, &ev.event);
        self.machine.run_day(&ev)
    }

    fn work(&self) -> u64 {
        self.machine.work()
    }

    fn counters(&self) -> Option<WorkCounters> {
        self.machine.counters()
    }

    fn depth(&self) -> Option<u32> {
        self.machine.depth()
    }
}

fn exact_predictions(stream: &[RealizedEvent]) -> Vec<Prediction> {
    stream.iter().map(|r| Prediction::new(r.event.element.0, r.event.kind, r.day)).collect()
}

trait Family {
    type Output: Clone + PartialEq + fmt::Debug + fmt::Display + 'static;
    type Oracle: Oracle<Output = Self::Output> + 'static;

    fn oracle(&self) -> Self::Oracle;

    fn predicted(&self, preds: &[Prediction], ground: GroundSet, cfg: EngineConfig) -> Result<Machine<Self::Output>, Error>;

    fn offline(&self, stream: &[RealizedEvent], ground: GroundSet, cfg: EngineConfig) -> Result<Machine<Self::Output>, Error>;

    fn predicted_deletion(&self, _: &[Prediction], _: GroundSet, _: EngineConfig) -> Result<Machine<Self::Output>, Error> {
        Err(Error::InvalidParameters("this problem has no insert-only structure".into()))
    }
}

fn lifted<C>(c: C, preds: &[Prediction], ground: GroundSet, cfg: EngineConfig) -> Result<Machine<C::Output>, Error>
where
    C: IncrementalContract + 'static,
{
    Ok(Box::new(Engine::with_predictions(Lifted(c), preds, ground, cfg)?))
}

fn lifted_offline<C>(c: C, s: &[RealizedEvent], ground: GroundSet, cfg: EngineConfig) -> Result<Machine<C::Output>, Error>
where
    C: IncrementalContract + 'static,
{
    Ok(Box::new(Engine::offline(Lifted(c), s, ground, cfg)?))
}

fn with_deletions<C>(c: C, preds: &[Prediction], ground: GroundSet, cfg: EngineConfig) -> Result<Machine<C::Output>, Error>
where
    C: IncrementalContract + 'static,
{
    let feed = PredictionFeed::new(FeedKind::Deletions, preds);
    Ok(Box::new(Fed { machine: IncrementalAdapter::new(c, ground, cfg)?, feed }))
}

impl Family for Counter {
    type Output = u64;
    type Oracle = Counter;

    fn oracle(&self) -> Counter {
        Counter
    }

    fn predicted(&self, p: &[Prediction], g: GroundSet, cfg: EngineConfig) -> Result<Machine<u64>, Error> {
        lifted(Counter, p, g, cfg)
    }

    fn offline(&self, s: &[RealizedEvent], g: GroundSet, cfg: EngineConfig) -> Result<Machine<u64>, Error> {
        lifted_offline(Counter, s, g, cfg)
    }

    fn predicted_deletion(&self, p: &[Prediction], g: GroundSet, cfg: EngineConfig) -> Result<Machine<u64>, Error> {
        with_deletions(Counter, p, g, cfg)
    }
}

impl Family for Connectivity {
    type Output = crate::problems::connectivity::Components;
    type Oracle = Connectivity;

    fn oracle(&self) -> Connectivity {
        *self
    }

    fn predicted(&self, p: &[Prediction], g: GroundSet, cfg: EngineConfig) -> Result<Machine<Self::Output>, Error> {
        lifted(*self, p, g, cfg)
    }

    fn offline(&self, s: &[RealizedEvent], g: GroundSet, cfg: EngineConfig) -> Result<Machine<Self::Output>, Error> {
        lifted_offline(*self, s, g, cfg)
    }

    fn predicted_deletion(&self, p: &[Prediction], g: GroundSet, cfg: EngineConfig) -> Result<Machine<Self::Output>, Error> {
        with_deletions(*self, p, g, cfg)
    }
}

impl Family for Msf {
    type Output = crate::problems::msf::Forest;
    type Oracle = Msf;

    fn oracle(&self) -> Msf {
        *self
    }

    fn predicted(&self, p: &[Prediction], g: GroundSet, cfg: EngineConfig) -> Result<Machine<Self::Output>, Error> {
        Ok(Box::new(Engine::with_predictions(*self, p, g, cfg)?))
    }

    fn offline(&self, s: &[RealizedEvent], g: GroundSet, cfg: EngineConfig) -> Result<Machine<Self::Output>, Error> {
        Ok(Box::new(Engine::offline(*self, s, g, cfg)?))
    }
}

impl Family for DecrementalMax {
    type Output = crate::problems::decmax::MaxValue;
    type Oracle = DecrementalMax;

    fn oracle(&self) -> DecrementalMax {
        DecrementalMax
    }

    /// Decremental structures only use the insertion predictions.
    fn predicted(&self, p: &[Prediction], g: GroundSet, cfg: EngineConfig) -> Result<Machine<Self::Output>, Error> {
        let feed = PredictionFeed::new(FeedKind::Insertions, p);
        let machine = DecrementalAdapter::new(DecrementalMax, &feed.first_insertions(), g, cfg)?;
        Ok(Box::new(Fed { machine, feed }))
    }

    fn offline(&self, s: &[RealizedEvent], g: GroundSet, cfg: EngineConfig) -> Result<Machine<Self::Output>, Error> {
        self.predicted(&exact_predictions(s), g, cfg)
    }
}

fn member_seed(seed: u64, i: u32) -> u64 {
    seed.wrapping_add(u64::from(i).wrapping_mul(0x2545_f491_4f6c_dd1d))
}

fn drive<O: Clone + fmt::Display>(m: &mut dyn DayMachine<Output = O>, events: &[RealEvent]) -> Result<Vec<String>, Error> {
    events.iter().map(|ev| m.run_day(ev).map(|o| o.to_string())).collect()
}

fn run_family<F: Family>(f: &F, inst: &Instance, opts: &RunOptions) -> Result<RunReport, Error> {
    let events = inst.events();
    let cfg = EngineConfig::new(inst.horizon, opts.seed);
    let single = |mut m: Machine<F::Output>| -> Result<RunReport, Error> {
        let outputs = drive(m.as_mut(), &events)?;
        Ok(RunReport { outputs, counters: m.counters(), depth: m.depth(), work: m.work(), ..RunReport::default() })
    };
    match opts.mode {
        Mode::Predicted => single(f.predicted(&inst.predictions, inst.ground.clone(), cfg)?),
        Mode::Offline => single(f.offline(&inst.stream, inst.ground.clone(), cfg)?),
        Mode::PredictedDeletion => single(f.predicted_deletion(&inst.predictions, inst.ground.clone(), cfg)?),
        Mode::BruteForce => single(Box::new(FromScratch::new(f.oracle(), inst.ground.clone()))),
        Mode::Backstopped => {
            let mut members: Vec<BoxedAlgorithm<F::Output>> = Vec::new();
            let mut first = None;
            for i in 0..opts.k.max(1) {
                let c = EngineConfig::new(inst.horizon, member_seed(opts.seed, i));
                let m = f.predicted(&inst.predictions, inst.ground.clone(), c)?;
                first.get_or_insert((m.counters(), m.depth()));
                members.push(Box::new(Stepper::new(m)));
            }
            members.push(Box::new(Stepper::new(FromScratch::new(f.oracle(), inst.ground.clone()))));
            let mut b = Backstop::new(members)?;
            let mut outputs = Vec::with_capacity(events.len());
            for ev in &events {
                outputs.push(b.run_day(ev)?.to_string());
            }
            let (counters, depth) = first.unwrap_or_default();
            Ok(RunReport {
                outputs,
                counters,
                depth,
                work: b.meta_steps(),
                meta_steps: Some(b.meta_steps()),
                max_spread: b.max_spread(),
                epochs: Vec::new(),
            })
        }
        Mode::Boosted => {
            if inst.bundles.is_empty() {
                return Err(Error::InvalidParameters("boosted mode needs a bundle file".into()));
            }
            let ground = inst.ground.clone();
            let factory = |h: u32, p: &[Prediction], seed: u64| -> Result<BoxedAlgorithm<F::Output>, Error> {
                Ok(Box::new(Stepper::new(f.predicted(p, ground.clone(), EngineConfig::new(h, seed))?)))
            };
            let cfg = BoostConfig::new(opts.k.max(1), opts.instances_cap.max(1), opts.seed);
            let run = boost_run(factory, &inst.bundles, &events, cfg)?;
            Ok(RunReport {
                outputs: run.outputs.iter().map(|o| o.to_string()).collect(),
                work: run.meta_steps(),
                meta_steps: Some(run.meta_steps()),
                epochs: run.epochs,
                ..RunReport::default()
            })
        }
    }
}

pub fn run(inst: &Instance, opts: &RunOptions) -> Result<RunReport, Error> {
    match inst.problem {
        ProblemKind::Counter => run_family(&Counter, inst, opts),
        ProblemKind::Connectivity => run_family(&Connectivity { vertices: inst.vertices }, inst, opts),
        ProblemKind::Msf => run_family(&Msf { vertices: inst.vertices }, inst, opts),
        ProblemKind::DecMax => run_family(&DecrementalMax, inst, opts),
    }
}

pub fn brute_force(inst: &Instance) -> Result<Vec<String>, Error> {
    run(inst, &RunOptions::new(Mode::BruteForce, 0)).map(|r| r.outputs)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub day: Day,
    pub expected: String,
    pub found: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "day {}: expected {}, found {}", self.day, self.expected, self.found)
    }
}

/// Day-by-day comparison of a mode against the from-scratch answers.
pub fn verify(inst: &Instance, opts: &RunOptions) -> Result<Vec<Mismatch>, Error> {
    let want = brute_force(inst)?;
    let got = run(inst, opts)?.outputs;
    Ok(diff(&want, &got))
}

pub fn diff(want: &[String], got: &[String]) -> Vec<Mismatch> {
    let n = want.len().max(got.len());
    (0..n)
        .filter_map(|i| {
            let (a, b) = (want.get(i), got.get(i));
            (a != b).then(|| Mismatch {
                day: i as Day + 1,
                expected: a.cloned().unwrap_or_else(|| "<missing>".into()),
                found: b.cloned().unwrap_or_else(|| "<missing>".into()),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub model: String,
    pub horizon: u32,
    pub l1_error: u64,
    pub preprocess_units: u64,
    pub retrigger_units: u64,
    pub total_units: u64,
    pub reschedules: u64,
    pub depth: u32,
}

impl BenchRow {
    pub const HEADER: [&'static str; 8] =
        ["model", "T", "l1_error", "preprocess_units", "retrigger_units", "total_units", "reschedules", "depth"];

    pub fn record(&self) -> [String; 8] {
        [
            self.model.clone(),
            self.horizon.to_string(),
            self.l1_error.to_string(),
            self.preprocess_units.to_string(),
            self.retrigger_units.to_string(),
            self.total_units.to_string(),
            self.reschedules.to_string(),
            self.depth.to_string(),
        ]
    }
}

/// Uniform offsets sized so the expected l1 error is `T, 2T, 4T, 8T`.
pub fn sweep_models(_horizon: u32) -> Vec<ErrorModel> {
    // Mean |offset| is sigma / 2 per event and there are T events.
    [1.0, 2.0, 4.0, 8.0].iter().map(|e| ErrorModel::Uniform { sigma: 2.0 * e }).collect()
}

/// One predicted-mode run per (model, seed).
pub fn bench(
    problem: ProblemKind,
    n: u32,
    horizon: u32,
    models: &[ErrorModel],
    seeds: std::ops::Range<u64>,
) -> Result<Vec<BenchRow>, Error> {
    let mut rows = Vec::new();
    for &model in models {
        for seed in seeds.clone() {
            let w = generate(problem, model, n, horizon, seed)?;
            let r = run(&Instance::from_workload(&w), &RunOptions::new(Mode::Predicted, seed))?;
            let c = r.counters.unwrap_or_default();
            rows.push(BenchRow {
                model: model.to_string(),
                horizon,
                l1_error: w.l1,
                preprocess_units: c.preprocess_units,
                retrigger_units: c.retrigger_units,
                total_units: c.total_units(),
                reschedules: c.reschedules,
                depth: r.depth.unwrap_or(0),
            });
        }
    }
    Ok(rows)
}

/// Least-squares slope of `ln y` against `ln x` over the points with both
/// coordinates positive.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}
