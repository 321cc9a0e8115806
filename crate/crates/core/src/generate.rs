//! Synthetic workloads: feasible update streams and predictions for them
//! under several error models.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::model::{
    l1_error, Day, ElementId, Event, EventKind, GroundSet, Payload, PredictedDay, Prediction, PredictionBundle,
    RealizedEvent,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Counter,
    Connectivity,
    Msf,
    DecMax,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 4] =
        [ProblemKind::Counter, ProblemKind::Connectivity, ProblemKind::Msf, ProblemKind::DecMax];

    pub fn is_graph(self) -> bool {
        matches!(self, ProblemKind::Connectivity | ProblemKind::Msf)
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Counter => "counter",
            ProblemKind::Connectivity => "connectivity",
            ProblemKind::Msf => "msf",
            ProblemKind::DecMax => "decmax",
        })
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<ProblemKind, Error> {
        match s {
            "counter" => Ok(ProblemKind::Counter),
            "connectivity" => Ok(ProblemKind::Connectivity),
            "msf" => Ok(ProblemKind::Msf),
            "decmax" => Ok(ProblemKind::DecMax),
            _ => Err(Error::InvalidParameters(format!("unknown problem `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ErrorModel {
    Exact,
    /// Offset `round(sigma * (2u - 1))` for uniform `u`.
    Uniform { sigma: f64 },
    /// Pareto offsets with tail index 1.5, scaled by `sigma`, random sign.
    HeavyTail { sigma: f64 },
    /// Exact, except that each prediction is missing with probability `rho`.
    Drop { rho: f64 },
    /// A block of early deletions centred on the middle of the horizon.
    AdversarialUneven,
    /// Every deletion predicted three days late.
    AdversarialEven,
}

impl ErrorModel {
    pub fn name(&self) -> &'static str {
        match self {
            ErrorModel::Exact => "exact",
            ErrorModel::Uniform { .. } => "uniform",
            ErrorModel::HeavyTail { .. } => "heavy-tail",
            ErrorModel::Drop { .. } => "drop",
            ErrorModel::AdversarialUneven => "adversarial-uneven",
            ErrorModel::AdversarialEven => "adversarial-even",
        }
    }

    pub fn parse(name: &str, sigma: f64, rho: f64) -> Result<ErrorModel, Error> {
        let m = match name {
            "exact" => ErrorModel::Exact,
            "uniform" => ErrorModel::Uniform { sigma },
            "heavy-tail" => ErrorModel::HeavyTail { sigma },
            "drop" => ErrorModel::Drop { rho },
            "adversarial-uneven" => ErrorModel::AdversarialUneven,
            "adversarial-even" => ErrorModel::AdversarialEven,
            _ => return Err(Error::InvalidParameters(format!("unknown error model `{name}`"))),
        };
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidParameters(format!("sigma {sigma} must be a non-negative number")));
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::InvalidParameters(format!("rho {rho} must lie in [0, 1]")));
        }
        Ok(m)
    }
}

impl fmt::Display for ErrorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrorModel::Uniform { sigma } | ErrorModel::HeavyTail { sigma } => write!(f, "{}({sigma})", self.name()),
            ErrorModel::Drop { rho } => write!(f, "drop({rho})"),
            _ => f.write_str(self.name()),
        }
    }
}

/// Everything one experiment needs.
#[derive(Clone, Debug)]
pub struct Workload {
    pub problem: ProblemKind,
    pub model: ErrorModel,
    pub vertices: u32,
    pub horizon: u32,
    pub ground: GroundSet,
    pub stream: Vec<RealizedEvent>,
    pub predictions: Vec<Prediction>,
    pub bundles: Vec<PredictionBundle>,
    pub l1: u64,
}

/// Ground set of a problem: edges of the complete graph on `n` vertices with
/// weights in `1..=16`, or `n` plain or valued elements.
pub fn ground_set(problem: ProblemKind, n: u32, rng: &mut impl Rng) -> Result<GroundSet, Error> {
    let mut g = GroundSet::new();
    match problem {
        ProblemKind::Connectivity | ProblemKind::Msf => {
            if n < 2 {
                return Err(Error::InvalidParameters("graph problems need at least 2 vertices".into()));
            }
            let mut id = 0;
            for u in 0..n {
                for v in u + 1..n {
                    g.insert(ElementId(id), Payload::Edge { u, v, w: rng.gen_range(1..=16) });
                    id += 1;
                }
            }
        }
        ProblemKind::DecMax => {
            for e in 0..n {
                g.insert(ElementId(e), Payload::Value(rng.gen_range(0..1000)));
            }
        }
        ProblemKind::Counter => {}
    }
    Ok(g)
}

fn universe(problem: ProblemKind, n: u32) -> u32 {
    if problem.is_graph() {
        n * n.saturating_sub(1) / 2
    } else {
        n
    }
}

fn event(g: &GroundSet, e: u32, kind: EventKind) -> Event {
    Event { element: ElementId(e), kind, payload: g.payload(ElementId(e)).cloned() }
}

/// Random feasible stream: each day inserts an absent element or deletes a
/// present one.
pub fn random_stream(g: &GroundSet, elements: u32, horizon: u32, rng: &mut impl Rng) -> Vec<RealizedEvent> {
    let mut present: Vec<u32> = Vec::new();
    let mut absent: Vec<u32> = (0..elements).collect();
    let mut out = Vec::with_capacity(horizon as usize);
    for day in 1..=horizon {
        let delete = !present.is_empty() && (absent.is_empty() || rng.gen_bool(0.45));
        let (e, kind) = if delete {
            let e = present.swap_remove(rng.gen_range(0..present.len()));
            absent.push(e);
            (e, EventKind::Delete)
        } else {
            let e = absent.swap_remove(rng.gen_range(0..absent.len()));
            present.push(e);
            (e, EventKind::Insert)
        };
        out.push(RealizedEvent { day, event: event(g, e, kind) });
    }
    out
}

fn shifted(day: Day, offset: i64, horizon: u32) -> Day {
    (i64::from(day) + offset).clamp(1, i64::from(horizon)) as Day
}

/// Predictions for a stream under a noise model, sorted by predicted day.
pub fn perturb(stream: &[RealizedEvent], model: ErrorModel, horizon: u32, rng: &mut impl Rng) -> Vec<Prediction> {
    let mut out = Vec::with_capacity(stream.len());
    for r in stream {
        let offset = match model {
            ErrorModel::Uniform { sigma } => (sigma * (2.0 * rng.gen::<f64>() - 1.0)).round() as i64,
            ErrorModel::HeavyTail { sigma } => {
                let u: f64 = 1.0 - rng.gen::<f64>();
                let magnitude = (sigma * (u.powf(-1.0 / 1.5) - 1.0)).round().min(f64::from(horizon)) as i64;
                if rng.gen_bool(0.5) {
                    magnitude
                } else {
                    -magnitude
                }
            }
            ErrorModel::Drop { rho } => {
                if rng.gen_bool(rho) {
                    continue;
                }
                0
            }
            _ => 0,
        };
        out.push(Prediction::new(r.event.element.0, r.event.kind, shifted(r.day, offset, horizon)));
    }
    sort_predictions(&mut out);
    out
}

fn sort_predictions(p: &mut [Prediction]) {
    p.sort_by_key(|p| (p.day, p.element, p.kind));
}

fn isqrt(x: u32) -> u32 {
    let mut r = (f64::from(x)).sqrt() as u32;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

/// Root-T elements inserted on the first days whose deletions all come
/// root-T days before their predictions, just ahead of the middle split.
/// The remaining days are filled with exactly predicted insert/delete pairs.
pub fn adversarial_uneven(g: &GroundSet, elements: u32, horizon: u32) -> Result<(Vec<RealizedEvent>, Vec<Prediction>), Error> {
    let r = isqrt(horizon);
    if r * r != horizon || !r.is_power_of_two() || horizon < 16 {
        return Err(Error::InvalidParameters(format!(
            "the uneven construction needs T = 4^k with T >= 16, got {horizon}"
        )));
    }
    if elements < r + 1 {
        return Err(Error::InvalidParameters(format!("the uneven construction needs {} elements, have {elements}", r + 1)));
    }
    let half = horizon / 2;
    let mut plan: Vec<Option<(u32, EventKind, Day)>> = vec![None; horizon as usize + 1];
    for j in 1..=r {
        let e = j - 1;
        plan[j as usize] = Some((e, EventKind::Insert, j));
        plan[(half + j - r) as usize] = Some((e, EventKind::Delete, half + j));
    }
    let fillers: Vec<u32> = (r..elements).collect();
    let mut next = 0;
    let mut open: Option<u32> = None;
    for d in 1..=horizon {
        if plan[d as usize].is_some() {
            continue;
        }
        plan[d as usize] = Some(match open.take() {
            Some(f) => (f, EventKind::Delete, d),
            None => {
                let f = fillers[next % fillers.len()];
                next += 1;
                open = Some(f);
                (f, EventKind::Insert, d)
            }
        });
    }
    Ok(build(g, &plan))
}

/// Pairs of days: element `j` is inserted on day `2j+1`, deleted on `2j+2`
/// and predicted deleted on `2j+5`, except the last two which are exact.
/// Elements are reused cyclically.
pub fn adversarial_even(g: &GroundSet, elements: u32, horizon: u32) -> Result<(Vec<RealizedEvent>, Vec<Prediction>), Error> {
    if !horizon.is_multiple_of(2) || horizon < 4 {
        return Err(Error::InvalidParameters(format!("the even construction needs an even T >= 4, got {horizon}")));
    }
    if elements == 0 {
        return Err(Error::InvalidParameters("the even construction needs at least one element".into()));
    }
    let i = horizon / 2;
    let mut plan: Vec<Option<(u32, EventKind, Day)>> = vec![None; horizon as usize + 1];
    for j in 0..i {
        let e = j % elements;
        let real = 2 * j + 2;
        let predicted = if j + 2 >= i { real } else { 2 * j + 5 };
        plan[(2 * j + 1) as usize] = Some((e, EventKind::Insert, 2 * j + 1));
        plan[real as usize] = Some((e, EventKind::Delete, predicted));
    }
    Ok(build(g, &plan))
}

fn build(g: &GroundSet, plan: &[Option<(u32, EventKind, Day)>]) -> (Vec<RealizedEvent>, Vec<Prediction>) {
    let mut stream = Vec::new();
    let mut preds = Vec::new();
    for (d, slot) in plan.iter().enumerate().skip(1) {
        let (e, kind, p) = slot.expect("every day is planned");
        stream.push(RealizedEvent { day: d as Day, event: event(g, e, kind) });
        preds.push(Prediction::new(e, kind, p));
    }
    sort_predictions(&mut preds);
    (stream, preds)
}

/// Nested bundles for a doubling horizon guess. Bundle `j` is delivered on
/// day `2^(j-1)`, holds `2^j` entries and extends its predecessor with the
/// next predictions in order of predicted day. New entries predicted before
/// the delivery day are moved to it; the rest is padding.
pub fn make_bundles(predictions: &[Prediction], horizon: u32) -> Vec<PredictionBundle> {
    let mut sorted = predictions.to_vec();
    sort_predictions(&mut sorted);
    let count = 32 - horizon.max(1).leading_zeros();
    let mut out: Vec<PredictionBundle> = Vec::new();
    let mut taken: Vec<Prediction> = Vec::new();
    for j in 1..=count {
        let delivery = 1u32 << (j - 1);
        let size = 1usize << j;
        while taken.len() < size.min(sorted.len()) {
            let mut p = sorted[taken.len()].clone();
            if let PredictedDay::Day(d) = p.day {
                p.day = PredictedDay::Day(d.max(delivery));
            }
            taken.push(p);
        }
        out.push(PredictionBundle { index: j, delivery_day: delivery, predictions: taken.clone(), padding: size - taken.len() });
    }
    out
}

pub fn generate(problem: ProblemKind, model: ErrorModel, n: u32, horizon: u32, seed: u64) -> Result<Workload, Error> {
    if horizon == 0 {
        return Err(Error::InvalidParameters("T must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParameters("n must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ground = ground_set(problem, n, &mut rng)?;
    let elements = universe(problem, n);
    let (stream, predictions) = match model {
        ErrorModel::AdversarialUneven => adversarial_uneven(&ground, elements, horizon)?,
        ErrorModel::AdversarialEven => adversarial_even(&ground, elements, horizon)?,
        _ => {
            let s = random_stream(&ground, elements, horizon, &mut rng);
            let p = perturb(&s, model, horizon, &mut rng);
            (s, p)
        }
    };
    let l1 = l1_error(&predictions, &stream, horizon);
    let bundles = make_bundles(&predictions, horizon);
    let vertices = if problem.is_graph() { n } else { 0 };
    Ok(Workload { problem, model, vertices, horizon, ground, stream, predictions, bundles, l1 })
}

/// Elements that appear in a stream.
pub fn elements_of(stream: &[RealizedEvent]) -> BTreeSet<ElementId> {
    stream.iter().map(|r| r.event.element).collect()
}
