//! Update events, predictions, prediction bundles and the keyed l1 error.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{BundleViolation, Error};

/// Days are 1-based. Day 0 holds elements present before the first update
/// and `horizon + 1` is the overflow slot past the end of the horizon.
pub type Day = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementId(pub u32);

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKind {
    Insert,
    Delete,
}

impl EventKind {
    pub fn code(self) -> char {
        match self {
            EventKind::Insert => 'I',
            EventKind::Delete => 'D',
        }
    }

    pub fn from_code(s: &str) -> Option<EventKind> {
        match s {
            "I" => Some(EventKind::Insert),
            "D" => Some(EventKind::Delete),
            _ => None,
        }
    }
}

/// Problem-specific data attached to an element of the ground set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Payload {
    Edge { u: u32, v: u32, w: i64 },
    Value(i64),
}

impl fmt::Display for Payload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payload::Edge { u, v, w } => write!(f, "{u} {v} {w}"),
            Payload::Value(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub element: ElementId,
    pub kind: EventKind,
    pub payload: Option<Payload>,
}

impl Event {
    pub fn insert(element: u32) -> Event {
        Event { element: ElementId(element), kind: EventKind::Insert, payload: None }
    }

    pub fn delete(element: u32) -> Event {
        Event { element: ElementId(element), kind: EventKind::Delete, payload: None }
    }

    pub fn with_payload(mut self, payload: Payload) -> Event {
        self.payload = Some(payload);
        self
    }
}

/// A predicted day, or "not before the end of the horizon".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PredictedDay {
    Day(Day),
    EndOfHorizon,
}

impl PredictedDay {
    /// Position on the day line for a given horizon; anything past it is `horizon + 1`.
    pub fn resolve(self, horizon: u32) -> Day {
        match self {
            PredictedDay::Day(d) => d.clamp(1, horizon + 1),
            PredictedDay::EndOfHorizon => horizon + 1,
        }
    }
}

impl fmt::Display for PredictedDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredictedDay::Day(d) => write!(f, "{d}"),
            PredictedDay::EndOfHorizon => write!(f, "E"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prediction {
    pub element: ElementId,
    pub kind: EventKind,
    pub day: PredictedDay,
    pub reschedule_count: u32,
}

impl Prediction {
    pub fn new(element: u32, kind: EventKind, day: Day) -> Prediction {
        Prediction { element: ElementId(element), kind, day: PredictedDay::Day(day), reschedule_count: 0 }
    }

    pub fn end_of_horizon(element: u32, kind: EventKind) -> Prediction {
        Prediction { element: ElementId(element), kind, day: PredictedDay::EndOfHorizon, reschedule_count: 0 }
    }

    /// Moves the prediction later; the counter never decreases.
    pub fn reschedule(&mut self, new_day: PredictedDay) {
        debug_assert!(new_day >= self.day, "reschedule moved a prediction earlier");
        self.day = new_day;
        self.reschedule_count += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealizedEvent {
    pub day: Day,
    pub event: Event,
}

/// One real update as handed to an online algorithm. `prediction` carries the
/// predicted deletion day of an insertion in the predicted-deletion model, or
/// the predicted reinsertion day of a deletion in the predicted-insertion model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealEvent {
    pub day: Day,
    pub event: Event,
    pub prediction: Option<PredictedDay>,
}

impl From<RealizedEvent> for RealEvent {
    fn from(r: RealizedEvent) -> RealEvent {
        RealEvent { day: r.day, event: r.event, prediction: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Horizon {
    len: u32,
    known: bool,
}

impl Horizon {
    pub fn known(len: u32) -> Result<Horizon, Error> {
        if len == 0 {
            return Err(Error::InvalidParameters("horizon must be at least 1".into()));
        }
        Ok(Horizon { len, known: true })
    }

    /// A guessed horizon, as used while doubling.
    pub fn guessed(len: u32) -> Result<Horizon, Error> {
        Ok(Horizon { known: false, ..Horizon::known(len)? })
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    /// Always false: a horizon holds at least one day.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_known(&self) -> bool {
        self.known
    }
}

/// Static description of the ground set: payload per element.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroundSet {
    payloads: HashMap<ElementId, Payload>,
}

impl GroundSet {
    pub fn new() -> GroundSet {
        GroundSet::default()
    }

    pub fn insert(&mut self, element: ElementId, payload: Payload) {
        self.payloads.insert(element, payload);
    }

    pub fn payload(&self, element: ElementId) -> Option<&Payload> {
        self.payloads.get(&element)
    }

    pub fn len(&self) -> usize {
        self.payloads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.payloads.is_empty()
    }

    /// Learns payloads from any events that carry one.
    pub fn absorb<'a>(&mut self, events: impl IntoIterator<Item = &'a Event>) {
        for e in events {
            if let Some(p) = &e.payload {
                self.payloads.entry(e.element).or_insert_with(|| p.clone());
            }
        }
    }

    pub fn from_stream(stream: &[RealizedEvent]) -> GroundSet {
        let mut g = GroundSet::new();
        g.absorb(stream.iter().map(|r| &r.event));
        g
    }
}

/// Keyed l1 distance between two day multisets.
///
/// Days are grouped per (element, kind), both sides sorted and paired in
/// order; every unpaired day on either side costs `horizon`.
pub fn keyed_l1<I, J>(left: I, right: J, horizon: u32) -> u64
where
    I: IntoIterator<Item = ((ElementId, EventKind), Day)>,
    J: IntoIterator<Item = ((ElementId, EventKind), Day)>,
{
    let mut groups: BTreeMap<(ElementId, EventKind), (Vec<Day>, Vec<Day>)> = BTreeMap::new();
    for (k, d) in left {
        groups.entry(k).or_default().0.push(d);
    }
    for (k, d) in right {
        groups.entry(k).or_default().1.push(d);
    }
    let mut total = 0u64;
    for (_, (mut a, mut b)) in groups {
        a.sort_unstable();
        b.sort_unstable();
        let paired = a.len().min(b.len());
        for i in 0..paired {
            total += u64::from(a[i].abs_diff(b[i]));
        }
        total += (a.len().max(b.len()) - paired) as u64 * u64::from(horizon);
    }
    total
}

/// l1 error of a prediction sequence against the realized stream.
///
/// End-of-horizon predictions are padding and take no part in the matching.
pub fn l1_error(predicted: &[Prediction], realized: &[RealizedEvent], horizon: u32) -> u64 {
    let left = predicted.iter().filter_map(|p| match p.day {
        PredictedDay::Day(d) => Some(((p.element, p.kind), d)),
        PredictedDay::EndOfHorizon => None,
    });
    let right = realized.iter().map(|r| ((r.event.element, r.event.kind), r.day));
    keyed_l1(left, right, horizon)
}

/// Checks a realized stream: days 1, 2, 3, ... and deletions only of present elements.
pub fn validate_stream(stream: &[RealizedEvent]) -> Result<(), Error> {
    let mut present: HashMap<ElementId, bool> = HashMap::new();
    for (i, r) in stream.iter().enumerate() {
        if r.day as usize != i + 1 {
            return Err(Error::InvalidStream(format!("expected day {}, found day {}", i + 1, r.day)));
        }
        let slot = present.entry(r.event.element).or_insert(false);
        match r.event.kind {
            EventKind::Insert if *slot => {
                return Err(Error::InvalidStream(format!(
                    "day {}: element {} inserted while present",
                    r.day, r.event.element
                )))
            }
            EventKind::Delete if !*slot => {
                return Err(Error::InvalidStream(format!(
                    "day {}: element {} deleted while absent",
                    r.day, r.event.element
                )))
            }
            EventKind::Insert => *slot = true,
            EventKind::Delete => *slot = false,
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredictionBundle {
    pub index: u32,
    pub delivery_day: Day,
    pub predictions: Vec<Prediction>,
    /// Anonymous end-of-horizon entries that only count toward the size.
    pub padding: usize,
}

impl PredictionBundle {
    pub fn len(&self) -> usize {
        self.predictions.len() + self.padding
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

type PredKey = (ElementId, EventKind, PredictedDay);

fn multiset(b: &PredictionBundle) -> BTreeMap<PredKey, usize> {
    let mut m = BTreeMap::new();
    for p in &b.predictions {
        *m.entry((p.element, p.kind, p.day)).or_insert(0) += 1;
    }
    m
}

/// Checks nesting, exact doubling and that new entries are not backdated.
pub fn validate_bundle_sequence(bundles: &[PredictionBundle]) -> Result<(), BundleViolation> {
    let mut prev: Option<(&PredictionBundle, BTreeMap<PredKey, usize>)> = None;
    for b in bundles {
        let cur = multiset(b);
        let fresh: BTreeMap<PredKey, usize> = match &prev {
            None => cur.clone(),
            Some((pb, pm)) => {
                if b.index != pb.index + 1 {
                    return Err(BundleViolation::OutOfOrder { index: b.index });
                }
                if b.len() != 2 * pb.len() {
                    return Err(BundleViolation::NotDoubled {
                        index: b.index,
                        expected: 2 * pb.len(),
                        found: b.len(),
                    });
                }
                let mut rest = cur.clone();
                for (k, &n) in pm {
                    match rest.get_mut(k) {
                        Some(m) if *m >= n => *m -= n,
                        _ => return Err(BundleViolation::NotSuperset { index: b.index }),
                    }
                }
                rest
            }
        };
        for ((element, _, day), n) in &fresh {
            if *n == 0 {
                continue;
            }
            if let PredictedDay::Day(d) = day {
                if *d < b.delivery_day {
                    return Err(BundleViolation::Backdated { index: b.index, element: *element, day: *d });
                }
            }
        }
        prev = Some((b, cur));
    }
    Ok(())
}

/// Which predicted day a real event is handed in the partial models.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeedKind {
    /// The k-th insertion of an element carries its k-th predicted deletion.
    Deletions,
    /// The k-th deletion carries the (k+1)-th predicted insertion; the first
    /// predicted insertion belongs to the predicted ground set.
    Insertions,
}

/// Attaches predictions to real events one occurrence at a time.
#[derive(Clone, Debug)]
pub struct PredictionFeed {
    kind: FeedKind,
    days: BTreeMap<ElementId, Vec<PredictedDay>>,
    seen: HashMap<ElementId, usize>,
}

impl PredictionFeed {
    pub fn new(kind: FeedKind, predictions: &[Prediction]) -> PredictionFeed {
        let want = match kind {
            FeedKind::Deletions => EventKind::Delete,
            FeedKind::Insertions => EventKind::Insert,
        };
        let mut days: BTreeMap<ElementId, Vec<PredictedDay>> = BTreeMap::new();
        for p in predictions.iter().filter(|p| p.kind == want) {
            days.entry(p.element).or_default().push(p.day);
        }
        for v in days.values_mut() {
            v.sort_unstable();
        }
        PredictionFeed { kind, days, seen: HashMap::new() }
    }

    /// Elements with a predicted insertion and the earliest such day.
    pub fn first_insertions(&self) -> Vec<(ElementId, PredictedDay)> {
        if self.kind != FeedKind::Insertions {
            return Vec::new();
        }
        self.days.iter().map(|(&e, v)| (e, v[0])).collect()
    }

    pub fn annotate(&mut self, day: Day, event: &Event) -> RealEvent {
        let counted = match self.kind {
            FeedKind::Deletions => EventKind::Insert,
            FeedKind::Insertions => EventKind::Delete,
        };
        let mut prediction = None;
        if event.kind == counted {
            let k = self.seen.entry(event.element).or_insert(0);
            let index = match self.kind {
                FeedKind::Deletions => *k,
                FeedKind::Insertions => *k + 1,
            };
            *k += 1;
            let d = self.days.get(&event.element).and_then(|v| v.get(index)).copied();
            prediction = Some(d.unwrap_or(PredictedDay::EndOfHorizon));
        }
        RealEvent { day, event: event.clone(), prediction }
    }
}
