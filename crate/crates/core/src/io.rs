//! Line-oriented text formats.
//!
//! Every format is ASCII, one record per line, fields separated by spaces.
//! Blank lines and lines starting with `#` are ignored unless the format gives
//! them a meaning.
//!
//! | file | record |
//! |------|--------|
//! | predictions | `element kind day` |
//! | stream | `day element kind [payload]` |
//! | bundles | `#bundle index delivery_day`, then predictions, `#pad count` |
//! | deletion stream | `day element kind prediction [payload]` |
//! | insertion instance | `S element day [payload]` lines, then as a deletion stream |
//!
//! `kind` is `I` or `D`, a predicted day is a number or `E` for the end of
//! the horizon, and `prediction` is `-` when absent. A payload is `u v w` for
//! an edge or a single integer value.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;

use crate::error::Error;
use crate::model::{
    Day, ElementId, Event, EventKind, GroundSet, Payload, PredictedDay, Prediction, PredictionBundle, RealEvent,
    RealizedEvent,
};

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(n, l)| (n, l.split_ascii_whitespace().collect()))
}

fn number<T: std::str::FromStr>(line: usize, what: &str, s: &str) -> Result<T, Error> {
    s.parse().map_err(|_| perr(line, format!("{what} `{s}` is not a valid number")))
}

fn day(line: usize, s: &str) -> Result<Day, Error> {
    let d: Day = number(line, "day", s)?;
    if d == 0 {
        return Err(perr(line, "days start at 1"));
    }
    Ok(d)
}

fn predicted_day(line: usize, s: &str) -> Result<PredictedDay, Error> {
    if s == "E" {
        Ok(PredictedDay::EndOfHorizon)
    } else {
        Ok(PredictedDay::Day(day(line, s)?))
    }
}

fn optional_prediction(line: usize, s: &str) -> Result<Option<PredictedDay>, Error> {
    if s == "-" {
        Ok(None)
    } else {
        predicted_day(line, s).map(Some)
    }
}

fn kind(line: usize, s: &str) -> Result<EventKind, Error> {
    EventKind::from_code(s).ok_or_else(|| perr(line, format!("kind `{s}` is neither I nor D")))
}

fn payload(line: usize, f: &[&str]) -> Result<Option<Payload>, Error> {
    match f {
        [] => Ok(None),
        [x] => Ok(Some(Payload::Value(number(line, "value", x)?))),
        [u, v, w] => Ok(Some(Payload::Edge {
            u: number(line, "vertex", u)?,
            v: number(line, "vertex", v)?,
            w: number(line, "weight", w)?,
        })),
        _ => Err(perr(line, format!("payload of {} fields; expected none, one or three", f.len()))),
    }
}

fn prediction(line: usize, f: &[&str]) -> Result<Prediction, Error> {
    match f {
        [e, k, d] => Ok(Prediction {
            element: ElementId(number(line, "element", e)?),
            kind: kind(line, k)?,
            day: predicted_day(line, d)?,
            reschedule_count: 0,
        }),
        _ => Err(perr(line, format!("prediction needs 3 fields, found {}", f.len()))),
    }
}

fn next_day(line: usize, prev: Day, d: Day) -> Result<(), Error> {
    if d != prev + 1 {
        return Err(perr(line, format!("day {d} follows day {prev}; one event per day is required")));
    }
    Ok(())
}

pub fn parse_predictions(text: &str) -> Result<Vec<Prediction>, Error> {
    records(text).map(|(n, f)| prediction(n, &f)).collect()
}

pub fn write_predictions(predictions: &[Prediction]) -> String {
    let mut out = String::new();
    for p in predictions {
        let _ = writeln!(out, "{} {} {}", p.element, p.kind.code(), p.day);
    }
    out
}

pub fn parse_stream(text: &str) -> Result<Vec<RealizedEvent>, Error> {
    let mut out: Vec<RealizedEvent> = Vec::new();
    for (n, f) in records(text) {
        if f.len() < 3 {
            return Err(perr(n, format!("stream record needs at least 3 fields, found {}", f.len())));
        }
        let d = day(n, f[0])?;
        next_day(n, out.last().map_or(0, |r| r.day), d)?;
        let event = Event { element: ElementId(number(n, "element", f[1])?), kind: kind(n, f[2])?, payload: payload(n, &f[3..])? };
        out.push(RealizedEvent { day: d, event });
    }
    Ok(out)
}

fn write_payload(out: &mut String, p: &Option<Payload>) {
    if let Some(p) = p {
        let _ = write!(out, " {p}");
    }
}

pub fn write_stream(stream: &[RealizedEvent]) -> String {
    let mut out = String::new();
    for r in stream {
        let _ = write!(out, "{} {} {}", r.day, r.event.element, r.event.kind.code());
        write_payload(&mut out, &r.event.payload);
        out.push('\n');
    }
    out
}

pub fn parse_bundles(text: &str) -> Result<Vec<PredictionBundle>, Error> {
    let mut out: Vec<PredictionBundle> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        let f: Vec<&str> = l.split_ascii_whitespace().collect();
        match f[0] {
            "#bundle" => {
                let [_, index, delivery] = f[..] else {
                    return Err(perr(n, "expected `#bundle index delivery_day`"));
                };
                out.push(PredictionBundle {
                    index: number(n, "bundle index", index)?,
                    delivery_day: day(n, delivery)?,
                    predictions: Vec::new(),
                    padding: 0,
                });
            }
            "#pad" => {
                let [_, count] = f[..] else {
                    return Err(perr(n, "expected `#pad count`"));
                };
                let b = out.last_mut().ok_or_else(|| perr(n, "padding before the first `#bundle`"))?;
                b.padding += number::<usize>(n, "padding", count)?;
            }
            s if s.starts_with('#') => {}
            _ => {
                let p = prediction(n, &f)?;
                out.last_mut().ok_or_else(|| perr(n, "prediction before the first `#bundle`"))?.predictions.push(p);
            }
        }
    }
    Ok(out)
}

pub fn write_bundles(bundles: &[PredictionBundle]) -> String {
    let mut out = String::new();
    for b in bundles {
        let _ = writeln!(out, "#bundle {} {}", b.index, b.delivery_day);
        out.push_str(&write_predictions(&b.predictions));
        if b.padding > 0 {
            let _ = writeln!(out, "#pad {}", b.padding);
        }
    }
    out
}

fn real_event(n: usize, f: &[&str]) -> Result<RealEvent, Error> {
    if f.len() < 4 {
        return Err(perr(n, format!("event record needs at least 4 fields, found {}", f.len())));
    }
    Ok(RealEvent {
        day: day(n, f[0])?,
        event: Event { element: ElementId(number(n, "element", f[1])?), kind: kind(n, f[2])?, payload: payload(n, &f[4..])? },
        prediction: optional_prediction(n, f[3])?,
    })
}

/// Stream whose insertions carry a predicted deletion day.
pub fn parse_deletion_stream(text: &str) -> Result<Vec<RealEvent>, Error> {
    let mut out: Vec<RealEvent> = Vec::new();
    for (n, f) in records(text) {
        let ev = real_event(n, &f)?;
        next_day(n, out.last().map_or(0, |r| r.day), ev.day)?;
        out.push(ev);
    }
    Ok(out)
}

pub fn write_real_events(events: &[RealEvent]) -> String {
    let mut out = String::new();
    for r in events {
        let p = r.prediction.map_or("-".to_string(), |p| p.to_string());
        let _ = write!(out, "{} {} {} {p}", r.day, r.event.element, r.event.kind.code());
        write_payload(&mut out, &r.event.payload);
        out.push('\n');
    }
    out
}

/// Predicted ground set with first insertion days, and a stream whose
/// deletions carry a predicted reinsertion day.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InsertionInstance {
    pub members: Vec<(ElementId, PredictedDay)>,
    pub ground: GroundSet,
    pub events: Vec<RealEvent>,
}

pub fn parse_insertion_instance(text: &str) -> Result<InsertionInstance, Error> {
    let mut inst = InsertionInstance::default();
    for (n, f) in records(text) {
        if f[0] == "S" {
            if !inst.events.is_empty() {
                return Err(perr(n, "ground set lines must come before events"));
            }
            if f.len() < 3 {
                return Err(perr(n, "expected `S element day [payload]`"));
            }
            let e = ElementId(number(n, "element", f[1])?);
            if let Some(p) = payload(n, &f[3..])? {
                inst.ground.insert(e, p);
            }
            inst.members.push((e, predicted_day(n, f[2])?));
        } else {
            let ev = real_event(n, &f)?;
            next_day(n, inst.events.last().map_or(0, |r| r.day), ev.day)?;
            inst.events.push(ev);
        }
    }
    Ok(inst)
}

pub fn write_insertion_instance(inst: &InsertionInstance) -> String {
    let mut out = String::new();
    for (e, d) in &inst.members {
        let _ = write!(out, "S {e} {d}");
        write_payload(&mut out, &inst.ground.payload(*e).cloned());
        out.push('\n');
    }
    out.push_str(&write_real_events(&inst.events));
    out
}

/// `day answer` per line.
pub fn write_outputs<T: fmt::Display>(outputs: &[T]) -> String {
    let mut out = String::new();
    for (i, o) in outputs.iter().enumerate() {
        let _ = writeln!(out, "{} {o}", i + 1);
    }
    out
}

/// `key=value` lines.
pub fn write_meta(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

pub fn parse_meta(text: &str) -> Result<BTreeMap<String, String>, Error> {
    let mut out = BTreeMap::new();
    for (n, l) in text.lines().enumerate() {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let (k, v) = l.split_once('=').ok_or_else(|| perr(n + 1, "expected key=value"))?;
        out.insert(k.to_string(), v.to_string());
    }
    Ok(out)
}

pub fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
