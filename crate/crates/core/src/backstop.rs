//! Step-interleaved fallback over several algorithms, and horizon doubling
//! with independent instances.
//!
//! Each algorithm is wrapped as a [`SteppableAlgorithm`] that pays for a day
//! one work unit per step. The [`Backstop`] hands every day's event to all of
//! them and steps them in turn until one has caught up; its answer is used.

use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::decremental::{DecrementalAdapter, DecrementalContract};
use crate::engine::{DncProblem, Engine, WorkCounters};
use crate::error::Error;
use crate::incremental::{IncrementalAdapter, IncrementalContract};
use crate::model::{Day, ElementId, EventKind, GroundSet, Prediction, PredictionBundle, RealEvent};
use crate::problems::Oracle;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Progressed,
    BufferComplete,
}

pub trait SteppableAlgorithm {
    type Output: Clone;

    fn buffer_event(&mut self, ev: &RealEvent);

    /// Spends one unit. Returns [`Step::BufferComplete`] once every buffered
    /// event is done, including when there was nothing left to do.
    fn step(&mut self) -> Result<Step, Error>;

    /// Answer after the last completed event.
    fn current_output(&self) -> Option<Self::Output>;

    fn steps_taken(&self) -> u64;

    /// Steps until the buffer is empty; returns the steps taken overall.
    fn drain(&mut self) -> Result<u64, Error> {
        while self.step()? == Step::Progressed {}
        Ok(self.steps_taken())
    }
}

/// Something that processes one day at a time and reports its total work.
pub trait DayMachine {
    type Output: Clone;

    fn run_day(&mut self, ev: &RealEvent) -> Result<Self::Output, Error>;

    /// Units spent so far, setup included.
    fn work(&self) -> u64;

    fn counters(&self) -> Option<WorkCounters> {
        None
    }

    /// Depth of the partition tree, when there is one.
    fn depth(&self) -> Option<u32> {
        None
    }
}

impl<O: Clone> DayMachine for Box<dyn DayMachine<Output = O>> {
    type Output = O;

    fn run_day(&mut self, ev: &RealEvent) -> Result<O, Error> {
        (**self).run_day(ev)
    }

    fn work(&self) -> u64 {
        (**self).work()
    }

    fn counters(&self) -> Option<WorkCounters> {
        (**self).counters()
    }

    fn depth(&self) -> Option<u32> {
        (**self).depth()
    }
}

impl<P: DncProblem> DayMachine for Engine<P> {
    type Output = P::Output;

    fn run_day(&mut self, ev: &RealEvent) -> Result<P::Output, Error> {
        Engine::run_day(self, ev)
    }

    fn work(&self) -> u64 {
        Engine::counters(self).total_units()
    }

    fn counters(&self) -> Option<WorkCounters> {
        Some(*Engine::counters(self))
    }

    fn depth(&self) -> Option<u32> {
        Some(self.tree().depth())
    }
}

impl<C: IncrementalContract> DayMachine for IncrementalAdapter<C> {
    type Output = C::Output;

    fn run_day(&mut self, ev: &RealEvent) -> Result<C::Output, Error> {
        IncrementalAdapter::run_day(self, ev)
    }

    fn work(&self) -> u64 {
        self.engine().counters().total_units()
    }

    fn counters(&self) -> Option<WorkCounters> {
        Some(*self.engine().counters())
    }

    fn depth(&self) -> Option<u32> {
        Some(self.engine().tree().depth())
    }
}

impl<D: DecrementalContract> DayMachine for DecrementalAdapter<D> {
    type Output = D::Output;

    fn run_day(&mut self, ev: &RealEvent) -> Result<D::Output, Error> {
        DecrementalAdapter::run_day(self, ev)
    }

    fn work(&self) -> u64 {
        self.engine().counters().total_units() + self.initialize_units()
    }

    fn counters(&self) -> Option<WorkCounters> {
        Some(*self.engine().counters())
    }

    fn depth(&self) -> Option<u32> {
        Some(self.engine().tree().depth())
    }
}

/// Recomputes the answer from scratch every day.
pub struct FromScratch<O: Oracle> {
    oracle: O,
    ground: GroundSet,
    present: Vec<ElementId>,
    work: u64,
}

impl<O: Oracle> FromScratch<O> {
    pub fn new(oracle: O, ground: GroundSet) -> FromScratch<O> {
        FromScratch { oracle, ground, present: Vec::new(), work: 0 }
    }

    pub fn present(&self) -> &[ElementId] {
        &self.present
    }
}

impl<O: Oracle> DayMachine for FromScratch<O> {
    type Output = O::Output;

    fn run_day(&mut self, ev: &RealEvent) -> Result<O::Output, Error> {
        self.ground.absorb([&ev.event]);
        let e = ev.event.element;
        match ev.event.kind {
            EventKind::Insert => {
                let at = self.present.partition_point(|&x| x <= e);
                self.present.insert(at, e);
            }
            EventKind::Delete => match self.present.binary_search(&e) {
                Ok(i) => {
                    self.present.remove(i);
                }
                Err(_) => {
                    return Err(Error::InvalidStream(format!("day {}: element {e} deleted while absent", ev.day)))
                }
            },
        }
        let (out, units) = self.oracle.evaluate(&self.present, &self.ground);
        self.work += units;
        Ok(out)
    }

    fn work(&self) -> u64 {
        self.work
    }
}

/// Runs each buffered day eagerly, then asks for one step per unit it cost
/// before the answer is released.
pub struct Stepper<M: DayMachine> {
    machine: M,
    buffer: VecDeque<RealEvent>,
    debt: u64,
    charged: u64,
    pending: Option<M::Output>,
    output: Option<M::Output>,
    steps: u64,
}

impl<M: DayMachine> Stepper<M> {
    pub fn new(machine: M) -> Stepper<M> {
        Stepper { machine, buffer: VecDeque::new(), debt: 0, charged: 0, pending: None, output: None, steps: 0 }
    }

    pub fn machine(&self) -> &M {
        &self.machine
    }

    pub fn into_machine(self) -> M {
        self.machine
    }

    pub fn backlog(&self) -> usize {
        self.buffer.len() + usize::from(self.debt > 0)
    }
}

impl<M: DayMachine> SteppableAlgorithm for Stepper<M> {
    type Output = M::Output;

    fn buffer_event(&mut self, ev: &RealEvent) {
        self.buffer.push_back(ev.clone());
    }

    fn step(&mut self) -> Result<Step, Error> {
        if self.debt == 0 {
            let Some(ev) = self.buffer.pop_front() else {
                return Ok(Step::BufferComplete);
            };
            self.pending = Some(self.machine.run_day(&ev)?);
            let w = self.machine.work();
            // Setup work lands on the first day.
            self.debt = w.saturating_sub(self.charged).max(1);
            self.charged = w.max(self.charged);
        }
        self.debt -= 1;
        self.steps += 1;
        if self.debt == 0 {
            self.output = self.pending.take();
            if self.buffer.is_empty() {
                return Ok(Step::BufferComplete);
            }
        }
        Ok(Step::Progressed)
    }

    fn current_output(&self) -> Option<M::Output> {
        self.output.clone()
    }

    fn steps_taken(&self) -> u64 {
        self.steps
    }
}

pub type BoxedAlgorithm<O> = Box<dyn SteppableAlgorithm<Output = O>>;

/// Round-robin composition. The cursor carries over from day to day so that
/// every member has taken the same number of steps, give or take one.
pub struct Backstop<O> {
    members: Vec<BoxedAlgorithm<O>>,
    cursor: usize,
    retired_steps: u64,
    removed: usize,
    widest: u64,
    steps: Vec<u64>,
    lowest: u64,
    at_lowest: usize,
}

impl<O: Clone> Backstop<O> {
    pub fn new(members: Vec<BoxedAlgorithm<O>>) -> Result<Backstop<O>, Error> {
        if members.is_empty() {
            return Err(Error::InvalidParameters("a backstop needs at least one algorithm".into()));
        }
        let steps = members.iter().map(|m| m.steps_taken()).collect();
        let mut b = Backstop { members, cursor: 0, retired_steps: 0, removed: 0, widest: 0, steps, lowest: 0, at_lowest: 0 };
        b.rescan();
        Ok(b)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members dropped after an error.
    pub fn removed(&self) -> usize {
        self.removed
    }

    pub fn member_steps(&self) -> Vec<u64> {
        self.members.iter().map(|m| m.steps_taken()).collect()
    }

    /// Total steps issued to all members, including removed ones.
    pub fn meta_steps(&self) -> u64 {
        self.retired_steps + self.members.iter().map(|m| m.steps_taken()).sum::<u64>()
    }

    /// Largest difference in steps taken between two live members.
    pub fn step_spread(&self) -> u64 {
        let (lo, hi) = self
            .members
            .iter()
            .map(|m| m.steps_taken())
            .fold((u64::MAX, 0), |(lo, hi), s| (lo.min(s), hi.max(s)));
        hi.saturating_sub(lo)
    }

    fn rescan(&mut self) {
        self.lowest = self.steps.iter().copied().min().unwrap_or(0);
        self.at_lowest = self.steps.iter().filter(|&&s| s == self.lowest).count();
        let hi = self.steps.iter().copied().max().unwrap_or(0);
        self.widest = self.widest.max(hi - self.lowest);
    }

    /// Steps only grow, so the spread can only widen when the member that just
    /// stepped is the one furthest ahead.
    fn track(&mut self, i: usize) {
        let (old, new) = (self.steps[i], self.members[i].steps_taken());
        if new == old {
            return;
        }
        self.steps[i] = new;
        if old == self.lowest {
            self.at_lowest -= 1;
            if self.at_lowest == 0 {
                self.rescan();
            }
        }
        self.widest = self.widest.max(new - self.lowest);
    }

    /// Largest spread observed after any single step so far.
    pub fn max_spread(&self) -> u64 {
        self.widest
    }

    pub fn buffer_event(&mut self, ev: &RealEvent) {
        for m in &mut self.members {
            m.buffer_event(ev);
        }
    }

    /// Steps members in turn until one has processed all its events.
    pub fn settle(&mut self) -> Result<O, Error> {
        loop {
            if self.members.is_empty() {
                return Err(Error::Internal("every algorithm of the backstop failed".into()));
            }
            let i = self.cursor % self.members.len();
            let r = self.members[i].step();
            if r.is_ok() {
                self.track(i);
            }
            match r {
                Ok(Step::Progressed) => self.cursor = i + 1,
                Ok(Step::BufferComplete) => {
                    self.cursor = i + 1;
                    return self.members[i]
                        .current_output()
                        .ok_or_else(|| Error::Internal("completed algorithm has no output".into()));
                }
                Err(err) => {
                    log::warn!("dropping algorithm {i} from the backstop: {err}");
                    let gone = self.members.remove(i);
                    self.steps.remove(i);
                    self.rescan();
                    self.retired_steps += gone.steps_taken();
                    self.removed += 1;
                    self.cursor = i;
                }
            }
        }
    }

    pub fn run_day(&mut self, ev: &RealEvent) -> Result<O, Error> {
        self.buffer_event(ev);
        self.settle()
    }

    /// Finishes every member's backlog; returns each member's total steps.
    pub fn drain_all(&mut self) -> Result<Vec<u64>, Error> {
        self.members.iter_mut().map(|m| m.drain()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoostConfig {
    /// Instances per doubling of the horizon guess.
    pub k: u32,
    /// Upper limit on the instance count.
    pub cap: u32,
    pub seed: u64,
    /// Runs one epoch at this horizon instead of guessing.
    pub known_horizon: Option<u32>,
    /// Drains every instance at the end of an epoch to record its work.
    pub measure: bool,
}

impl BoostConfig {
    pub fn new(k: u32, cap: u32, seed: u64) -> BoostConfig {
        BoostConfig { k, cap, seed, known_horizon: None, measure: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpochReport {
    pub start_day: Day,
    pub guess: u32,
    /// Index of the bundle actually used.
    pub bundle: Option<u32>,
    pub instances: u32,
    pub uncapped: u32,
    pub replayed: u64,
    pub meta_steps: u64,
    /// Total steps of each instance over the epoch; empty unless measured.
    pub instance_work: Vec<u64>,
}

impl EpochReport {
    pub fn header(&self) -> String {
        format!("#epoch T\u{302}={} L={}", self.guess, self.instances)
    }
}

pub struct BoostRun<O> {
    pub outputs: Vec<O>,
    pub epochs: Vec<EpochReport>,
}

impl<O> BoostRun<O> {
    pub fn replayed(&self) -> u64 {
        self.epochs.iter().map(|e| e.replayed).sum()
    }

    pub fn meta_steps(&self) -> u64 {
        self.epochs.iter().map(|e| e.meta_steps).sum()
    }
}

fn log2_floor(x: u64) -> u32 {
    63 - x.max(1).leading_zeros()
}

fn log2_ceil(x: u64) -> u32 {
    x.max(1).next_power_of_two().trailing_zeros()
}

/// Instance count for a horizon guess and ground-set size, before the cap.
pub fn instance_count(k: u32, guess: u32, ground: usize) -> u32 {
    (k * log2_floor(u64::from(guess))).max(log2_ceil(ground as u64)).max(1)
}

fn mix(seed: u64, epoch: u64, index: u64) -> u64 {
    let mut z = seed ^ epoch.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ index.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Latest bundle with index at most `want`.
fn pick_bundle(bundles: &[PredictionBundle], want: u32) -> Option<&PredictionBundle> {
    bundles.iter().filter(|b| b.index <= want).max_by_key(|b| b.index)
}

/// Runs with a doubling horizon guess. On the day the guess is reached it is
/// doubled, the matching bundle is read, fresh instances are built and every
/// earlier event is replayed through them before the day itself.
///
/// `factory` receives the horizon, the bundle's predictions and a seed.
pub fn boost_run<O, F>(
    mut factory: F,
    bundles: &[PredictionBundle],
    stream: &[RealEvent],
    cfg: BoostConfig,
) -> Result<BoostRun<O>, Error>
where
    O: Clone,
    F: FnMut(u32, &[Prediction], u64) -> Result<BoxedAlgorithm<O>, Error>,
{
    if cfg.k == 0 || cfg.cap == 0 {
        return Err(Error::InvalidParameters("k and the instance cap must be positive".into()));
    }
    let mut outputs = Vec::with_capacity(stream.len());
    let mut epochs: Vec<EpochReport> = Vec::new();
    let mut seen: HashSet<ElementId> = HashSet::new();
    let mut guess: u32 = 1;
    let mut current: Option<Backstop<O>> = None;
    let mut epoch_start_steps = 0;

    for (i, ev) in stream.iter().enumerate() {
        let day = ev.day;
        if day as usize != i + 1 {
            return Err(Error::InvalidStream(format!("expected day {}, found day {day}", i + 1)));
        }
        let doubling = match cfg.known_horizon {
            Some(h) => {
                if day > h {
                    return Err(Error::OutOfRange(format!("day {day} past the known horizon {h}")));
                }
                day == 1
            }
            None => day == guess,
        };
        if doubling {
            if let Some(b) = current.as_mut() {
                close_epoch(epochs.last_mut().unwrap(), b, epoch_start_steps, cfg.measure)?;
            }
            guess = match cfg.known_horizon {
                Some(h) => h,
                None => guess.checked_mul(2).ok_or_else(|| Error::OutOfRange("horizon guess overflowed".into()))?,
            };
            let want = log2_floor(u64::from(guess)).max(1);
            let bundle = pick_bundle(bundles, want);
            if bundle.is_none_or(|b| b.index != want) {
                log::warn!("bundle {want} missing at day {day}; using {:?}", bundle.map(|b| b.index));
            }
            let preds: &[Prediction] = bundle.map_or(&[], |b| &b.predictions);
            let ground: BTreeSet<ElementId> = preds.iter().map(|p| p.element).chain(seen.iter().copied()).collect();
            let uncapped = instance_count(cfg.k, guess, ground.len());
            let count = uncapped.min(cfg.cap);
            let report = EpochReport {
                start_day: day,
                guess,
                bundle: bundle.map(|b| b.index),
                instances: count,
                uncapped,
                replayed: u64::from(day - 1),
                meta_steps: 0,
                instance_work: Vec::new(),
            };
            log::info!("{} uncapped={uncapped}", report.header());
            let epoch = epochs.len() as u64;
            let members = (0..count)
                .map(|j| factory(guess, preds, mix(cfg.seed, epoch, u64::from(j))))
                .collect::<Result<Vec<_>, Error>>()?;
            let mut b = Backstop::new(members)?;
            for past in &stream[..i] {
                b.buffer_event(past);
            }
            epoch_start_steps = 0;
            epochs.push(report);
            current = Some(b);
        }
        let b = current.as_mut().expect("an epoch starts on day 1");
        seen.insert(ev.event.element);
        outputs.push(b.run_day(ev)?);
    }
    if let Some(b) = current.as_mut() {
        close_epoch(epochs.last_mut().unwrap(), b, epoch_start_steps, cfg.measure)?;
    }
    Ok(BoostRun { outputs, epochs })
}

fn close_epoch<O: Clone>(r: &mut EpochReport, b: &mut Backstop<O>, start: u64, measure: bool) -> Result<(), Error> {
    r.meta_steps = b.meta_steps() - start;
    if measure {
        r.instance_work = b.drain_all()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::EngineConfig;
    use crate::incremental::Lifted;
    use crate::model::{Event, RealizedEvent};
    use crate::problems::counter::Counter;

    /// Costs `cost(t)` units on day `t`.
    struct Synthetic {
        cost: fn(u64) -> u64,
        work: u64,
    }

    impl DayMachine for Synthetic {
        type Output = Day;

        fn run_day(&mut self, ev: &RealEvent) -> Result<Day, Error> {
            self.work += (self.cost)(u64::from(ev.day));
            Ok(ev.day)
        }

        fn work(&self) -> u64 {
            self.work
        }
    }

    struct Failing;

    impl DayMachine for Failing {
        type Output = Day;

        fn run_day(&mut self, _: &RealEvent) -> Result<Day, Error> {
            Err(Error::Internal("broken".into()))
        }

        fn work(&self) -> u64 {
            0
        }
    }

    fn day(d: Day) -> RealEvent {
        RealEvent { day: d, event: Event::insert(d), prediction: None }
    }

    fn synthetic(cost: fn(u64) -> u64) -> BoxedAlgorithm<Day> {
        Box::new(Stepper::new(Synthetic { cost, work: 0 }))
    }

    #[test]
    fn single_member_matches_running_alone() {
        let mut b = Backstop::new(vec![synthetic(|t| t * t % 7 + 1)]).unwrap();
        let mut alone = Synthetic { cost: |t| t * t % 7 + 1, work: 0 };
        for d in 1..=30 {
            assert_eq!(b.run_day(&day(d)).unwrap(), alone.run_day(&day(d)).unwrap());
            assert_eq!(b.meta_steps(), alone.work());
        }
    }

    #[test]
    fn fast_member_answers_and_parity_holds() {
        let mut b = Backstop::new(vec![synthetic(|t| 2 * t - 1), synthetic(|_| 1)]).unwrap();
        for d in 1..=200u32 {
            assert_eq!(b.run_day(&day(d)).unwrap(), d);
            assert!(b.max_spread() <= 1);
            let t = u64::from(d);
            assert!(b.meta_steps() <= 2 * t + 4 * t);
        }
    }

    #[test]
    fn failing_member_is_dropped() {
        let mut b = Backstop::new(vec![Box::new(Stepper::new(Failing)) as BoxedAlgorithm<Day>, synthetic(|_| 3)]).unwrap();
        assert_eq!(b.run_day(&day(1)).unwrap(), 1);
        assert_eq!(b.removed(), 1);
        assert_eq!(b.len(), 1);
        let mut only = Backstop::new(vec![Box::new(Stepper::new(Failing)) as BoxedAlgorithm<Day>]).unwrap();
        assert!(only.run_day(&day(1)).is_err());
    }

    #[test]
    fn empty_backstop_is_rejected() {
        assert!(Backstop::<Day>::new(Vec::new()).is_err());
    }

    fn counter_stream(horizon: u32) -> Vec<RealEvent> {
        let mut out = Vec::new();
        for d in 1..=horizon {
            let e = (d - 1) / 2;
            let event = if d % 2 == 1 { Event::insert(e) } else { Event::delete(e) };
            out.push(RealEvent::from(RealizedEvent { day: d, event }));
        }
        out
    }

    fn counter_factory(h: u32, p: &[Prediction], seed: u64) -> Result<BoxedAlgorithm<u64>, Error> {
        let e = Engine::with_predictions(Lifted(Counter), p, GroundSet::new(), EngineConfig::new(h, seed))?;
        Ok(Box::new(Stepper::new(e)))
    }

    #[test]
    fn doubling_epochs_for_unknown_horizon() {
        let s = counter_stream(300);
        let run = boost_run(counter_factory, &[], &s, BoostConfig::new(1, 4, 7)).unwrap();
        let starts: Vec<Day> = run.epochs.iter().map(|e| e.start_day).collect();
        assert_eq!(starts, vec![1, 2, 4, 8, 16, 32, 64, 128, 256]);
        assert!(run.replayed() <= 600);
        for (i, out) in run.outputs.iter().enumerate() {
            assert_eq!(*out, if i % 2 == 0 { 1 } else { 0 });
        }
        assert_eq!(run.epochs[0].header(), "#epoch T\u{302}=2 L=1");
    }

    #[test]
    fn known_horizon_with_one_instance_is_a_bare_engine() {
        let s = counter_stream(64);
        let preds: Vec<Prediction> = s.iter().map(|r| Prediction::new(r.event.element.0, r.event.kind, r.day)).collect();
        let bundle = PredictionBundle { index: 6, delivery_day: 1, predictions: preds.clone(), padding: 0 };
        let mut cfg = BoostConfig::new(1, 1, 3);
        cfg.known_horizon = Some(64);
        let mut seed = None;
        let run = boost_run(
            |h, p, sd| {
                seed = Some(sd);
                counter_factory(h, p, sd)
            },
            &[bundle],
            &s,
            cfg,
        )
        .unwrap();
        let mut bare =
            Engine::with_predictions(Lifted(Counter), &preds, GroundSet::new(), EngineConfig::new(64, seed.unwrap())).unwrap();
        // A day is at least one step, even when the engine had nothing to do.
        let mut steps = 0;
        let mut last = 0;
        for (ev, out) in s.iter().zip(&run.outputs) {
            assert_eq!(bare.run_day(ev).unwrap(), *out);
            let w = bare.counters().total_units();
            steps += (w - last).max(1);
            last = w;
        }
        assert_eq!(run.epochs.len(), 1);
        assert_eq!(run.meta_steps(), steps);
    }
}
