//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use dynpred::backstop::{boost_run, Backstop, BoostConfig, BoxedAlgorithm, DayMachine, Stepper};
use dynpred::decremental::DecrementalAdapter;
use dynpred::engine::{Engine, EngineConfig, Span, WindowEvent, WindowInput};
use dynpred::error::Error;
use dynpred::generate::{generate, ErrorModel, ProblemKind, Workload};
use dynpred::harness::{bench, brute_force, loglog_slope, run, sweep_models, Instance, Mode, RunOptions};
use dynpred::incremental::predicted;
use dynpred::model::{
    l1_error, Day, ElementId, EventKind, FeedKind, Prediction, PredictionFeed, RealEvent, RealizedEvent,
};
use dynpred::partition_tree::PartitionTree;
use dynpred::problems::counter::Counter;
use dynpred::problems::decmax::DecrementalMax;
use dynpred::scheduler::{check_feasible, fix_ordering, greedy_assign, harmonic_assign, min_linf_error, optimal_offline_assign};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    failed: usize,
}

impl Verdict {
    fn report(&mut self, id: u32, name: &str, pass: bool, detail: String, started: Instant) {
        if !pass {
            self.failed += 1;
        }
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("{tag} c{id:<2} {name}: {detail} ({:.1}s)", started.elapsed().as_secs_f64());
    }

    fn error(&mut self, id: u32, name: &str, e: Error, started: Instant) {
        self.report(id, name, false, format!("error: {e}"), started);
    }
}

fn log2(x: u32) -> f64 {
    f64::from(x).log2()
}

fn realized_events(stream: &[RealizedEvent]) -> Vec<RealEvent> {
    stream.iter().cloned().map(RealEvent::from).collect()
}

/// Workload with the smallest `n` from `sizes` the generator accepts.
fn workload(problem: ProblemKind, model: ErrorModel, sizes: &[u32], horizon: u32, seed: u64) -> Result<Workload, Error> {
    let mut last = None;
    for &n in sizes {
        match generate(problem, model, n, horizon, seed) {
            Ok(w) => return Ok(w),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::InvalidParameters("no sizes".into())))
}

struct Exactness {
    instances: usize,
    mismatches: usize,
    extra_runs: usize,
    extra_mismatches: usize,
    max_batch: u64,
}

fn c1_exactness(reschedules: &mut Vec<(u32, u64)>) -> Result<Vec<(ProblemKind, Exactness)>, Error> {
    let models = [
        ErrorModel::Exact,
        ErrorModel::Uniform { sigma: 1.0 },
        ErrorModel::Uniform { sigma: 8.0 },
        ErrorModel::Uniform { sigma: 64.0 },
        ErrorModel::Drop { rho: 0.1 },
        ErrorModel::AdversarialUneven,
        ErrorModel::AdversarialEven,
    ];
    let mut out = Vec::new();
    for problem in ProblemKind::ALL {
        let mut s = Exactness {
            instances: 0,
            mismatches: 0,
            extra_runs: 0,
            extra_mismatches: 0,
            max_batch: 0,
        };
        let sizes: &[u32] = if problem.is_graph() { &[4, 6, 8, 12] } else { &[8, 16, 32] };
        for seed in 0..210u64 {
            let model = models[seed as usize % models.len()];
            let horizon = match model {
                ErrorModel::AdversarialUneven => [16, 64, 256][(seed / 7) as usize % 3],
                _ => [16, 50, 128, 256][(seed / 7) as usize % 4],
            };
            let w = workload(problem, model, sizes, horizon, seed)?;
            let inst = Instance::from_workload(&w);
            let want = brute_force(&inst)?;
            let r = run(&inst, &RunOptions::new(Mode::Predicted, seed))?;
            s.instances += 1;
            if r.outputs != want {
                s.mismatches += 1;
            }
            if let Some(c) = r.counters {
                reschedules.push((horizon, c.reschedules));
                s.max_batch = s.max_batch.max(c.max_batch);
            }

            let mut extra = vec![Mode::Offline, Mode::Backstopped, Mode::Boosted];
            if matches!(problem, ProblemKind::Counter | ProblemKind::Connectivity) {
                extra.push(Mode::PredictedDeletion);
            }
            let mode = extra[(seed as usize / models.len()) % extra.len()];
            let mut opts = RunOptions::new(mode, seed);
            opts.k = 2;
            let r = run(&inst, &opts)?;
            s.extra_runs += 1;
            if r.outputs != want {
                s.extra_mismatches += 1;
            }
        }
        out.push((problem, s));
    }
    Ok(out)
}

/// Tree depths, and mean spanning-window length per day distance.
type TreeStats = (Vec<u32>, Vec<(u32, f64)>);

fn c2_c3_trees() -> Result<TreeStats, Error> {
    const T: u32 = 4096;
    let dists = [1u32, 4, 16, 64];
    let mut depths = Vec::with_capacity(1000);
    let mut sums = vec![0.0; dists.len()];
    let mut counts = vec![0usize; dists.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(0x7ee);
    for seed in 0..1000u64 {
        let tree = PartitionTree::build(T, seed)?;
        depths.push(tree.depth());
        for (i, &d) in dists.iter().enumerate() {
            for _ in 0..10 {
                let t1 = rng.gen_range(1..=T - d);
                let w = tree.smallest_window(t1, t1 + d)?;
                sums[i] += f64::from(tree.window(w).len());
                counts[i] += 1;
            }
        }
    }
    let means = dists.iter().enumerate().map(|(i, &d)| (d, sums[i] / counts[i] as f64)).collect();
    Ok((depths, means))
}

struct SchedulerQuality {
    rows: Vec<(u32, f64, f64)>,
    infeasible: usize,
    outputs: usize,
    worst_uf_ratio: f64,
}

fn c4_scheduler() -> Result<SchedulerQuality, Error> {
    let mut q = SchedulerQuality { rows: Vec::new(), infeasible: 0, outputs: 0, worst_uf_ratio: 0.0 };
    for horizon in [64u32, 256, 1024] {
        let (mut ours, mut best) = (0u64, 0u64);
        for seed in 0..500u64 {
            let model = match seed % 4 {
                0 => ErrorModel::Uniform { sigma: 4.0 },
                1 => ErrorModel::Uniform { sigma: 32.0 },
                2 => ErrorModel::HeavyTail { sigma: 4.0 },
                _ => ErrorModel::Drop { rho: 0.1 },
            };
            let w = generate(ProblemKind::Counter, model, 32, horizon, seed)?;
            let (a, stats) = harmonic_assign(&w.predictions, horizon, seed)?;
            let a = fix_ordering(a);
            q.outputs += 1;
            if check_feasible(&a).is_err() {
                q.infeasible += 1;
            }
            let n = w.predictions.len().max(1) as f64;
            q.worst_uf_ratio = q.worst_uf_ratio.max(stats.union_find_ops as f64 / n);
            ours += l1_error(&a.as_predictions(), &w.stream, horizon);
            let opt = optimal_offline_assign(&w.predictions, horizon);
            best += l1_error(&opt.as_predictions(), &w.stream, horizon);
        }
        q.rows.push((horizon, ours as f64 / 500.0, best as f64 / 500.0));
    }
    Ok(q)
}

/// Slope, worst zero-error ratio, and (error, retrigger work) points.
type Scaling = (Option<f64>, f64, Vec<(f64, f64)>);

fn c6_scaling(reschedules: &mut Vec<(u32, u64)>) -> Result<Scaling, Error> {
    const T: u32 = 1024;
    let rows = bench(ProblemKind::Counter, 64, T, &sweep_models(T), 0..20)?;
    reschedules.extend(rows.iter().map(|r| (T, r.reschedules)));
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.l1_error as f64, r.retrigger_units as f64)).collect();
    let slope = loglog_slope(&points);
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let w = generate(ProblemKind::Counter, ErrorModel::Exact, 64, T, seed)?;
        let inst = Instance::from_workload(&w);
        let p = run(&inst, &RunOptions::new(Mode::Predicted, seed))?.counters.unwrap_or_default().total_units();
        let o = run(&inst, &RunOptions::new(Mode::Offline, seed))?.counters.unwrap_or_default().total_units();
        worst = worst.max(p as f64 / o.max(1) as f64);
    }
    let mut means = Vec::new();
    for chunk in points.chunks(20) {
        let n = chunk.len() as f64;
        means.push((chunk.iter().map(|p| p.0).sum::<f64>() / n, chunk.iter().map(|p| p.1).sum::<f64>() / n));
    }
    Ok((slope, worst, means))
}

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

fn c7_backstop() -> Result<(bool, bool, u64, u64), Error> {
    const DAYS: u32 = 2000;
    let fast: fn(u64) -> u64 = |_| 1;
    let slow: fn(u64) -> u64 = |t| 2 * t - 1;
    let (mut bound_ok, mut parity_ok, mut worst_slack, mut spread) = (true, true, u64::MAX, 0);
    for order in [[fast, slow], [slow, fast]] {
        let members: Vec<BoxedAlgorithm<Day>> =
            order.iter().map(|&cost| Box::new(Stepper::new(Synthetic { cost, work: 0 })) as BoxedAlgorithm<Day>).collect();
        let mut b = Backstop::new(members)?;
        let (mut f, mut s) = (0u64, 0u64);
        for d in 1..=DAYS {
            let ev = RealEvent::from(RealizedEvent { day: d, event: dynpred::model::Event::insert(d) });
            if b.run_day(&ev)? != d {
                bound_ok = false;
            }
            let t = u64::from(d);
            f += fast(t);
            s += slow(t);
            let limit = 2 * f.min(s) + 4 * t;
            bound_ok &= b.meta_steps() <= limit;
            worst_slack = worst_slack.min(limit - b.meta_steps().min(limit));
        }
        spread = spread.max(b.max_spread());
        parity_ok &= b.max_spread() <= 1;
    }
    Ok((bound_ok, parity_ok, worst_slack, spread))
}

struct Boosting {
    epochs: usize,
    replayed: u64,
    exact: bool,
    good_seeds: usize,
    headers: Vec<String>,
}

fn c8_boosting() -> Result<Boosting, Error> {
    const T: u32 = 300;
    let w = generate(ProblemKind::Counter, ErrorModel::Uniform { sigma: 8.0 }, 16, T, 8)?;
    let inst = Instance::from_workload(&w);
    let want = brute_force(&inst)?;
    let events = realized_events(&w.stream);
    let ground = w.ground.clone();
    let once = |seed: u64, measure: bool| {
        let factory = |h: u32, p: &[Prediction], s: u64| -> Result<BoxedAlgorithm<u64>, Error> {
            Ok(Box::new(Stepper::new(predicted(Counter, p, ground.clone(), EngineConfig::new(h, s))?)))
        };
        let mut cfg = BoostConfig::new(1, 16, seed);
        cfg.measure = measure;
        boost_run(factory, &w.bundles, &events, cfg)
    };
    let first = once(8, false)?;
    let outputs: Vec<String> = first.outputs.iter().map(u64::to_string).collect();

    let runs = (0..100u64).map(|s| once(s, true)).collect::<Result<Vec<_>, Error>>()?;
    let epochs = runs[0].epochs.len();
    let mut mean = vec![0.0; epochs];
    let mut count = vec![0usize; epochs];
    for r in &runs {
        for (i, e) in r.epochs.iter().enumerate().take(epochs) {
            mean[i] += e.instance_work.iter().map(|&x| x as f64).sum::<f64>();
            count[i] += e.instance_work.len();
        }
    }
    for i in 0..epochs {
        mean[i] /= count[i].max(1) as f64;
    }
    let good_seeds = runs
        .iter()
        .filter(|r| {
            r.epochs.iter().enumerate().all(|(i, e)| {
                let min = e.instance_work.iter().copied().min().unwrap_or(0) as f64;
                min <= 2.0 * mean[i]
            })
        })
        .count();
    Ok(Boosting {
        epochs: first.epochs.len(),
        replayed: first.replayed(),
        exact: outputs == want,
        good_seeds,
        headers: first.epochs.iter().map(|e| e.header()).collect(),
    })
}

fn c9_greedy() -> Result<(usize, usize, f64), Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9ee);
    let (mut violations, mut total, mut worst) = (0, 0, 0.0f64);
    for seed in 0..200u64 {
        let horizon = rng.gen_range(8..=512);
        let model = match seed % 4 {
            0 => ErrorModel::Uniform { sigma: 2.0 },
            1 => ErrorModel::Uniform { sigma: 16.0 },
            2 => ErrorModel::HeavyTail { sigma: 3.0 },
            _ => ErrorModel::Exact,
        };
        let w = generate(ProblemKind::Counter, model, 24, horizon, seed)?;
        let (a, _) = greedy_assign(&w.predictions, horizon)?;
        let err = f64::from(min_linf_error(&w.predictions, horizon));
        let t = w.predictions.len() as f64;
        let bound = 4.0 * t * err * log2(horizon) + f64::from(horizon) * err;
        let disp = a.displacement() as f64;
        total += 1;
        if disp > bound {
            violations += 1;
        }
        if bound > 0.0 {
            worst = worst.max(disp / bound);
        }
    }
    Ok((violations, total, worst))
}

/// Events scheduled in `[start, end]`.
fn window_events<P: dynpred::engine::DncProblem>(e: &Engine<P>, start: Day, end: Day) -> Vec<WindowEvent> {
    (start..=end).flat_map(|d| e.scheduled(d)).collect()
}

/// Largest (permanents, sibling events) excess over every window; at most 0 passes.
fn permanents_excess<P: dynpred::engine::DncProblem>(e: &Engine<P>) -> i64 {
    let tree = e.tree();
    let mut worst = i64::MIN;
    for (id, w) in tree.windows().iter().enumerate() {
        let (Some(p), Some(s)) = (w.parent, tree.sibling(id as u32)) else {
            continue;
        };
        let pw = tree.window(p);
        let sw = tree.window(s);
        let parent = window_events(e, pw.start, pw.end);
        let own = window_events(e, w.start, w.end);
        let input = WindowInput::new(Span { start: w.start, end: w.end }, w.is_leaf(), &parent, &own, e.ground());
        let sibling = window_events(e, sw.start, sw.end).len() as i64;
        worst = worst.max(input.permanents().len() as i64 - sibling);
    }
    worst
}

fn present_by_day(stream: &[RealizedEvent]) -> Vec<Vec<ElementId>> {
    let mut present = BTreeSet::new();
    stream
        .iter()
        .map(|r| {
            match r.event.kind {
                EventKind::Insert => present.insert(r.event.element),
                EventKind::Delete => present.remove(&r.event.element),
            };
            present.iter().copied().collect()
        })
        .collect()
}

struct Adapters {
    pairs: usize,
    worst_excess: i64,
    duality_days: usize,
    duality_failures: usize,
    outsider_runs: usize,
    outsider_failures: usize,
}

fn c10_adapters() -> Result<Adapters, Error> {
    let mut a = Adapters {
        pairs: 0,
        worst_excess: i64::MIN,
        duality_days: 0,
        duality_failures: 0,
        outsider_runs: 0,
        outsider_failures: 0,
    };
    for seed in 0..1000u64 {
        let horizon = [32, 64, 96, 128][seed as usize % 4];
        let model = [ErrorModel::Exact, ErrorModel::Uniform { sigma: 8.0 }, ErrorModel::Drop { rho: 0.1 }][seed as usize % 3];
        let w = generate(ProblemKind::Counter, model, 16, horizon, seed)?;
        let mut e = predicted(Counter, &w.predictions, w.ground.clone(), EngineConfig::new(horizon, seed))?;
        a.worst_excess = a.worst_excess.max(permanents_excess(&e));
        for ev in realized_events(&w.stream) {
            e.run_day(&ev)?;
        }
        a.worst_excess = a.worst_excess.max(permanents_excess(&e));
        a.pairs += 1;
    }

    for seed in 0..200u64 {
        let horizon = [32, 64, 128][seed as usize % 3];
        let model = [ErrorModel::Exact, ErrorModel::Uniform { sigma: 8.0 }, ErrorModel::Drop { rho: 0.2 }][seed as usize % 3];
        let w = generate(ProblemKind::DecMax, model, 16, horizon, seed)?;
        let mut feed = PredictionFeed::new(FeedKind::Insertions, &w.predictions);
        let mut d = DecrementalAdapter::new(DecrementalMax, &feed.first_insertions(), w.ground.clone(), EngineConfig::new(horizon, seed))?;
        for (r, want) in w.stream.iter().zip(present_by_day(&w.stream)) {
            d.run_day(&feed.annotate(r.day, &r.event))?;
            a.duality_days += 1;
            if d.present_at(r.day) != want {
                a.duality_failures += 1;
            }
        }
    }

    for seed in 0..100u64 {
        let horizon = 64;
        let w = generate(ProblemKind::DecMax, ErrorModel::Exact, 16, horizon, seed)?;
        let Some(first) = w.stream.iter().find(|r| r.event.kind == EventKind::Insert) else {
            continue;
        };
        let outsider = w.stream.iter().skip(horizon as usize / 3).find(|r| r.event.kind == EventKind::Insert).unwrap_or(first);
        let x = outsider.event.element;
        let arrival = w.stream.iter().find(|r| r.event.element == x).map(|r| r.day).unwrap_or(outsider.day);
        let preds: Vec<Prediction> = w.predictions.iter().filter(|p| p.element != x).cloned().collect();
        let mut feed = PredictionFeed::new(FeedKind::Insertions, &preds);
        let mut d = DecrementalAdapter::new(DecrementalMax, &feed.first_insertions(), w.ground.clone(), EngineConfig::new(horizon, seed))?;
        let mut ok = true;
        for r in &w.stream {
            let before = (d.reinitializations(), d.engine().counters().full_recomputes);
            d.run_day(&feed.annotate(r.day, &r.event))?;
            if r.day == arrival {
                let after = (d.reinitializations(), d.engine().counters().full_recomputes);
                ok &= after.0 - before.0 == 1 && after.1 - before.1 == 1;
            }
        }
        ok &= d.reinitializations() == 1;
        a.outsider_runs += 1;
        if !ok {
            a.outsider_failures += 1;
        }
    }
    Ok(a)
}

fn main() -> ExitCode {
    let mut v = Verdict { failed: 0 };
    let mut reschedules: Vec<(u32, u64)> = Vec::new();
    let mut max_batch = 0;

    let t = Instant::now();
    match c1_exactness(&mut reschedules) {
        Ok(rows) => {
            let pass = rows.iter().all(|(_, s)| s.instances >= 200 && s.mismatches == 0 && s.extra_mismatches == 0);
            let detail: Vec<String> = rows
                .iter()
                .map(|(p, s)| {
                    format!("{p} {}/{} predicted + {}/{} other modes", s.mismatches, s.instances, s.extra_mismatches, s.extra_runs)
                })
                .collect();
            v.report(1, "exactness", pass, format!("mismatches {}", detail.join("; ")), t);
            max_batch = rows.iter().map(|(_, s)| s.max_batch).max().unwrap_or(0);
        }
        Err(e) => v.error(1, "exactness", e, t),
    }

    let t = Instant::now();
    match c2_c3_trees() {
        Ok((depths, means)) => {
            let ln_t = 4096f64.ln();
            let over = depths.iter().filter(|&&d| f64::from(d) > 36.0 * ln_t).count();
            let mean = depths.iter().map(|&d| f64::from(d)).sum::<f64>() / depths.len() as f64;
            let max = depths.iter().max().copied().unwrap_or(0);
            v.report(
                2,
                "tree depth",
                over <= 1 && mean <= 96.0 * ln_t,
                format!("T=4096 trees=1000 mean={mean:.1} max={max} over 36lnT={over} (limit {:.0})", 36.0 * ln_t),
                t,
            );
            let mut pass = true;
            let mut parts = Vec::new();
            for (d, m) in means {
                let limit = 1.2 * (f64::from(d + 1) + 2.0 * f64::from(d + 2) * ln_t);
                pass &= m <= limit;
                parts.push(format!("d={d} mean={m:.1} limit={limit:.1}"));
            }
            v.report(3, "window length", pass, format!("10000 samples each, {}", parts.join(", ")), t);
        }
        Err(e) => {
            v.error(2, "tree depth", e, t);
        }
    }

    let t = Instant::now();
    match c4_scheduler() {
        Ok(q) => {
            let mut pass = q.infeasible == 0 && q.worst_uf_ratio <= 6.0;
            let mut parts = Vec::new();
            for &(h, ours, best) in &q.rows {
                let limit = 8.0 * log2(h) * best;
                pass &= ours <= limit;
                parts.push(format!("T={h} mean l1 {ours:.1} vs optimum {best:.1} (limit {limit:.1})"));
            }
            v.report(
                4,
                "scheduler quality",
                pass,
                format!(
                    "{}; infeasible {}/{}; union-find ops per prediction max {:.2}",
                    parts.join(", "),
                    q.infeasible,
                    q.outputs,
                    q.worst_uf_ratio
                ),
                t,
            );
        }
        Err(e) => v.error(4, "scheduler quality", e, t),
    }

    let t = Instant::now();
    match c6_scaling(&mut reschedules) {
        Ok((slope, ratio, means)) => {
            let s = slope.unwrap_or(f64::NAN);
            let pts: Vec<String> = means.iter().map(|(x, y)| format!("({x:.0}, {y:.0})")).collect();
            let per_unit: Vec<f64> = means.iter().map(|(x, y)| y / x).collect();
            let spread = per_unit.iter().copied().fold(0.0, f64::max) / per_unit.iter().copied().fold(f64::MAX, f64::min);
            v.report(
                6,
                "work scaling",
                (0.8..=1.2).contains(&s) && ratio <= 30.0,
                format!(
                    "slope {s:.3} over {}; work per unit error varies {spread:.2}x; zero-error predicted/offline max {ratio:.2}",
                    pts.join(" ")
                ),
                t,
            );
        }
        Err(e) => v.error(6, "work scaling", e, t),
    }
    reschedules_line(&mut v, &reschedules, max_batch, t);

    let t = Instant::now();
    match c7_backstop() {
        Ok((bound, parity, slack, spread)) => v.report(
            7,
            "backstop",
            bound && parity,
            format!("2000 days both orders, min slack to 2min+4t {slack}, max step spread {spread}"),
            t,
        ),
        Err(e) => v.error(7, "backstop", e, t),
    }

    let t = Instant::now();
    match c8_boosting() {
        Ok(b) => v.report(
            8,
            "boosting",
            b.epochs == 9 && b.replayed <= 600 && b.exact && b.good_seeds >= 95,
            format!(
                "epochs {} [{}], replayed {} (limit 600), exact {}, seeds within 2x mean {}/100",
                b.epochs,
                b.headers.join(" "),
                b.replayed,
                b.exact,
                b.good_seeds
            ),
            t,
        ),
        Err(e) => v.error(8, "boosting", e, t),
    }

    let t = Instant::now();
    match c9_greedy() {
        Ok((bad, total, worst)) => v.report(
            9,
            "greedy bound",
            bad == 0 && total == 200,
            format!("violations {bad}/{total}, worst displacement/bound {worst:.3}"),
            t,
        ),
        Err(e) => v.error(9, "greedy bound", e, t),
    }

    let t = Instant::now();
    match c10_adapters() {
        Ok(a) => v.report(
            10,
            "adapters",
            a.pairs >= 1000 && a.worst_excess <= 0 && a.duality_failures == 0 && a.outsider_failures == 0,
            format!(
                "pairs {} worst permanents-sibling {}; duality failures {}/{} days; outsider failures {}/{}",
                a.pairs, a.worst_excess, a.duality_failures, a.duality_days, a.outsider_failures, a.outsider_runs
            ),
            t,
        ),
        Err(e) => v.error(10, "adapters", e, t),
    }

    if v.failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{} criteria failed", v.failed);
        ExitCode::FAILURE
    }
}

fn reschedules_line(v: &mut Verdict, runs: &[(u32, u64)], batch: u64, t: Instant) {
    let ratio = |&(h, r): &(u32, u64)| r as f64 / (2.0 * f64::from(h) * log2(h));
    let worst = runs.iter().map(ratio).fold(0.0, f64::max);
    let bad = runs.iter().filter(|&&(h, r)| r as f64 > 2.0 * f64::from(h) * log2(h)).count();
    v.report(
        5,
        "reschedule bound",
        bad == 0 && !runs.is_empty(),
        format!("violations {bad}/{} runs, worst reschedules/(2T log2 T) {worst:.4}, max batch {batch}", runs.len()),
        t,
    );
}
