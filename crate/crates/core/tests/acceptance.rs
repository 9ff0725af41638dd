//! Acceptance suite. Runs every criterion, prints one line each and exits
//! nonzero if any fails.

use std::time::Instant;

use polarsim::analysis::{build_update_matrix, clique_convergence_bound, limit_beliefs, scc_condense};
use polarsim::graphs::{classify, gen_influence, random, InfluenceKind};
use polarsim::model::{
    gen_initial_beliefs, regular_step, run, BeliefState, InfluenceGraph, InitialBeliefs, StopReason,
    UpdateKind,
};
use polarsim::polarization::{
    er_double_sum, er_measure, polarization_series, BinSpec, Distribution, ErParams,
};
use polarsim::verify::check_cb_fixedpoint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Regular run without recording the trace.
fn simulate(b0: &BeliefState, g: &InfluenceGraph, steps: usize) -> BeliefState {
    (0..steps).fold(b0.clone(), |b, _| regular_step(&b, g).unwrap())
}

/// Smallest `m` with `(1 − C)^m · gap < eps`, by direct enumeration.
fn first_step_below(c: f64, gap: f64, eps: f64) -> usize {
    let mut m = 0;
    let mut g = gap;
    while g >= eps {
        g *= 1.0 - c;
        m += 1;
    }
    m
}

/// The 8-agent graph with components {0,1,2}, {3}, {4,5}, {6,7}.
fn eight_agent_graph() -> InfluenceGraph {
    let edges = [
        (0, 1, 0.5),
        (0, 2, 0.7),
        (1, 0, 0.4),
        (1, 2, 0.9),
        (2, 0, 0.6),
        (2, 1, 0.3),
        (3, 1, 0.8),
        (4, 2, 0.5),
        (4, 5, 0.6),
        (5, 4, 0.7),
        (6, 3, 0.9),
        (6, 7, 0.4),
        (7, 6, 0.5),
        (7, 3, 0.6),
    ];
    InfluenceGraph::from_edges(8, &edges).unwrap()
}

fn clique_timing() -> Outcome {
    let start = Instant::now();
    let n = 100;
    let b0 = gen_initial_beliefs(InitialBeliefs::Uniform, n).unwrap();
    let mut detail = Vec::new();
    for (c, limit) in [(0.1, 44), (0.5, 7)] {
        let g = gen_influence(InfluenceKind::Clique(c), n).unwrap();
        let trace = run(&b0, &g, UpdateKind::Regular, 10_000, Some(1e-2)).unwrap();
        let steps = trace.steps_taken();
        let bound = clique_convergence_bound(c, &b0, 1e-2).unwrap().t_eps.ceil() as usize;
        let expected = first_step_below(c, 1.0, 1e-2);
        ensure(trace.stop_reason() == StopReason::GapBelowTolerance, || {
            format!("C={c}: gap never fell below 1e-2")
        })?;
        ensure(steps <= limit, || format!("C={c}: {steps} steps > {limit}"))?;
        ensure(steps <= bound, || format!("C={c}: {steps} steps > ceil(T_eps) = {bound}"))?;
        ensure(steps == expected, || format!("C={c}: {steps} steps, enumeration gives {expected}"))?;
        detail.push(format!("C={c}: {steps} steps (ceil T_eps = {bound})"));
    }
    let elapsed = start.elapsed();
    ensure(elapsed.as_secs_f64() < 1.0, || format!("took {elapsed:?}"))?;
    Ok(format!("{} in {elapsed:.1?}", detail.join(", ")))
}

fn consensus_value() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for (c, n) in [(0.1, 10), (0.5, 20), (1.0, 7), (0.05, 15)] {
        let g = gen_influence(InfluenceKind::Clique(c), n).unwrap();
        let b0 = random::beliefs(&mut rng, n);
        let last = simulate(&b0, &g, 10_000);
        worst = worst.max(last.values().iter().map(|b| (b - b0.mean()).abs()).fold(0.0, f64::max));
    }
    for _ in 0..50 {
        let n = rng.random_range(2..=20);
        let g = random::connected_circulation(&mut rng, n, 2 * n);
        let report = classify(&g);
        ensure(report.balanced && report.weakly_connected, || "generator broke balance".into())?;
        let b0 = random::beliefs(&mut rng, n);
        let last = simulate(&b0, &g, 10_000);
        worst = worst.max(last.values().iter().map(|b| (b - b0.mean()).abs()).fold(0.0, f64::max));
    }
    ensure(worst < 1e-6, || format!("max deviation from mean {worst:e}"))?;
    Ok(format!("max |B_i - mean(B0)| = {worst:.2e} over 4 cliques + 50 circulations"))
}

fn conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut graphs: Vec<InfluenceGraph> = (0..20)
        .map(|_| {
            let n = rng.random_range(2..=20);
            random::circulation(&mut rng, n, n)
        })
        .collect();
    graphs.push(gen_influence(InfluenceKind::Circular(0.5), 12).unwrap());
    graphs.push(gen_influence(InfluenceKind::Disconnected, 10).unwrap());
    for g in &graphs {
        ensure(classify(g).balanced, || "graph is not balanced".into())?;
        let b0 = random::beliefs(&mut rng, g.n());
        let initial = b0.sum();
        let mut b = b0;
        for _ in 0..10_000 {
            b = regular_step(&b, g).unwrap();
            worst = worst.max((b.sum() - initial).abs());
        }
    }
    ensure(worst < 1e-9, || format!("sum drifted by {worst:e}"))?;
    Ok(format!("max drift {worst:.2e} over {} balanced graphs x 1e4 steps", graphs.len()))
}

fn geometric_gap() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(2..=30);
        let c = 1.0 - rng.random::<f64>();
        let g = gen_influence(InfluenceKind::Clique(c), n).unwrap();
        let b0 = random::beliefs(&mut rng, n);
        let trace = run(&b0, &g, UpdateKind::Regular, 100, None).unwrap();
        for (t, s) in trace.states().iter().enumerate() {
            let expected = (1.0 - c).powi(t as i32) * b0.gap();
            worst = worst.max((s.gap() - expected).abs());
        }
    }
    ensure(worst < 1e-9, || format!("gap law off by {worst:e}"))?;
    Ok(format!("max |gap_t - (1-C)^t gap_0| = {worst:.2e} over 50 cliques, t <= 100"))
}

fn matrix_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst_apply, mut worst_row): (f64, f64) = (0.0, 0.0);
    for _ in 0..200 {
        let n = rng.random_range(1..=25);
        let density = rng.random::<f64>();
        let g = random::graph(&mut rng, n, density, 0.0);
        let b = random::beliefs(&mut rng, n);
        let m = build_update_matrix(&g);
        worst_apply =
            worst_apply.max(max_abs_diff(&m.apply(b.values()), regular_step(&b, &g).unwrap().values()));
        for row in m.rows() {
            ensure(row.iter().all(|&x| x >= 0.0), || "negative entry".into())?;
            worst_row = worst_row.max((row.iter().sum::<f64>() - 1.0).abs());
        }
    }
    ensure(worst_apply < 1e-12, || format!("|MB - step| = {worst_apply:e}"))?;
    ensure(worst_row < 1e-12, || format!("row sum off by {worst_row:e}"))?;
    Ok(format!("|MB - step|_inf = {worst_apply:.2e}, row-sum error {worst_row:.2e}, 200 instances"))
}

fn absorbing_limit() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut cases = vec![(eight_agent_graph(), random::beliefs(&mut rng, 8))];
    let mut not_strong = 0;
    for _ in 0..50 {
        let n = rng.random_range(2..=20);
        let density = rng.random_range(0.15..0.6);
        let g = random::graph(&mut rng, n, density, 0.3);
        if !classify(&g).strongly_connected {
            not_strong += 1;
        }
        cases.push((g, random::beliefs(&mut rng, n)));
    }
    let mut worst: f64 = 0.0;
    for (g, b0) in &cases {
        let report = limit_beliefs(g, b0, 1e-14, 1_000_000).unwrap();
        ensure(report.converged, || format!("power iteration stalled at {:e}", report.residual))?;
        let sim = simulate(b0, g, 10_000);
        worst = worst.max(max_abs_diff(&report.limits, sim.values()));
    }
    ensure(not_strong > 0, || "no non-strongly-connected case sampled".into())?;
    ensure(worst < 1e-6, || format!("limit vs simulation {worst:e}"))?;
    Ok(format!(
        "max |limit - sim| = {worst:.2e} over 8-agent example + 50 graphs ({not_strong} not strongly connected)"
    ))
}

fn scc_example() -> Outcome {
    let d = scc_condense(&eight_agent_graph());
    let expected = vec![vec![0, 1, 2], vec![3], vec![4, 5], vec![6, 7]];
    ensure(d.components == expected, || format!("components {:?}", d.components))?;
    let sources: Vec<_> = d.source_components.iter().map(|&k| d.components[k].clone()).collect();
    ensure(sources == vec![vec![4, 5], vec![6, 7]], || format!("sources {sources:?}"))?;
    Ok(format!("components {:?}, sources {sources:?}", d.components))
}

fn balanced_implies_strong() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut accepted, mut skipped) = (0, 0);
    while accepted < 200 {
        let n = rng.random_range(2..=15);
        let cycles = rng.random_range(1..=n);
        let g = random::circulation(&mut rng, n, cycles);
        let r = classify(&g);
        ensure(r.balanced, || "circulation is not balanced".into())?;
        if !r.weakly_connected {
            skipped += 1;
            continue;
        }
        ensure(r.strongly_connected, || format!("weakly but not strongly connected: {:?}", g.to_rows()))?;
        accepted += 1;
    }
    Ok(format!("200 weakly connected circulations strongly connected ({skipped} disconnected skipped)"))
}

fn er_measure_values() -> Outcome {
    let p = ErParams::new(1.0, 1.6).unwrap();
    let consensus =
        polarsim::discretize(&BeliefState::constant(50, 0.37).unwrap(), &BinSpec::equal_width(5).unwrap());
    let zero = er_measure(&consensus, ErParams::default());
    ensure(zero == 0.0, || format!("consensus gives {zero}"))?;

    let two = Distribution::new(vec![0.5, 0.5], vec![0.0, 1.0]).unwrap();
    let rho = er_measure(&two, p);
    // 2 · 0.5^2.6 · 0.5 · 1
    let oracle = 2.0 * 0.5f64.powf(2.6) * 0.5;
    ensure((rho - 0.164938).abs() <= 1e-6, || format!("two-point value {rho}"))?;
    ensure((rho - oracle).abs() <= 1e-15, || format!("two-point value {rho} vs {oracle}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let k = rng.random_range(2..=8);
        let weights: Vec<f64> = (0..k).map(|_| 1.0 - rng.random::<f64>()).collect();
        let values: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        let params = ErParams::new(1.0 - rng.random::<f64>(), 0.5 + 2.0 * rng.random::<f64>()).unwrap();
        let lambda = 0.1 + 10.0 * rng.random::<f64>();
        let scaled: Vec<f64> = weights.iter().map(|w| lambda * w).collect();
        let ratio = er_double_sum(&scaled, &values, params) / er_double_sum(&weights, &values, params);
        let expected = lambda.powf(2.0 + params.alpha);
        worst = worst.max((ratio - expected).abs() / expected);
    }
    ensure(worst < 1e-9, || format!("homogeneity off by {worst:e}"))?;
    Ok(format!("consensus 0, two-point {rho:.6}, homogeneity rel. error {worst:.1e}"))
}

fn confirmation_bias() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..100 {
        let n = rng.random_range(1..=12);
        let density = rng.random();
        let g = random::graph(&mut rng, n, density, 0.0);
        let b = BeliefState::new((0..n).map(|_| if rng.random() { 1.0 } else { 0.0 }).collect()).unwrap();
        let r = check_cb_fixedpoint(&b, &g).unwrap();
        ensure(r.passed, || format!("not a fixed point: {:?}", b.values()))?;
    }

    let mut slowest = 0;
    for case in 0..50 {
        let n = rng.random_range(2..=10);
        let density = rng.random_range(0.0..0.5);
        let g = random::strongly_connected(&mut rng, n, density, 0.2);
        let b0 = if case % 2 == 0 {
            let interior = rng.random_range(0..n);
            let v = (0..n)
                .map(|i| {
                    if i == interior {
                        rng.random_range(0.01..0.99)
                    } else if rng.random() {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            BeliefState::new(v).unwrap()
        } else {
            random::beliefs(&mut rng, n)
        };
        let trace = run(&b0, &g, UpdateKind::ConfirmationBias, 100_000, Some(1e-4)).unwrap();
        ensure(trace.last().gap() < 1e-4, || {
            format!("gap {} after {} steps from {:?}", trace.last().gap(), trace.steps_taken(), b0.values())
        })?;
        slowest = slowest.max(trace.steps_taken());
    }

    let n = 100;
    let b0 = gen_initial_beliefs(InitialBeliefs::Tripolar, n).unwrap();
    let faint = gen_influence(InfluenceKind::Faint, n).unwrap();
    let regular = run(&b0, &faint, UpdateKind::Regular, 1_000_000, Some(1e-2)).unwrap();
    let biased = run(&b0, &faint, UpdateKind::ConfirmationBias, 1_000_000, Some(1e-2)).unwrap();
    ensure(regular.stop_reason() == StopReason::GapBelowTolerance, || "regular run did not converge".into())?;
    ensure(biased.stop_reason() == StopReason::GapBelowTolerance, || "biased run did not converge".into())?;
    let (r, b) = (regular.steps_taken(), biased.steps_taken());
    ensure(b > r, || format!("confirmation bias took {b} steps, regular {r}"))?;
    Ok(format!(
        "extreme states fixed; 50 strongly connected runs reach 1e-4 (slowest {slowest} steps); faint tripolar: regular {r} < biased {b} steps"
    ))
}

/// ρ at t = 1000 for the disconnected graph from the extreme configuration,
/// n = 100, k = 5, α = 1.6, K = 1000.
const DISCONNECTED_RHO_T1000: f64 = 131.950_791_077_289_44;

fn polarization_persists() -> Outcome {
    let n = 100;
    let b0 = gen_initial_beliefs(InitialBeliefs::Extreme, n).unwrap();
    let g = gen_influence(InfluenceKind::Disconnected, n).unwrap();
    let trace = run(&b0, &g, UpdateKind::Regular, 1000, None).unwrap();
    let bins = BinSpec::equal_width(5).unwrap();
    let series = polarization_series(&trace, &bins, ErParams::default());
    let last = *series.last().unwrap();
    // Each half settles on its own mean (about 0.098 and 0.898), i.e. bins
    // 0 and 4 with half of the agents each.
    let oracle = 1000.0 * 2.0 * 0.5f64.powf(2.6) * 0.5 * (0.9 - 0.1);
    ensure(last > 1.0, || format!("rho = {last}"))?;
    ensure((last - oracle).abs() < 1e-9, || format!("rho = {last}, closed form {oracle}"))?;
    ensure((last - DISCONNECTED_RHO_T1000).abs() < 1e-9, || {
        format!("rho = {last:.17}, frozen {DISCONNECTED_RHO_T1000}")
    })?;
    Ok(format!("rho(t=1000) = {last:.6}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("clique timing", clique_timing),
        ("consensus value", consensus_value),
        ("conservation", conservation),
        ("geometric gap", geometric_gap),
        ("matrix equivalence", matrix_equivalence),
        ("absorbing limit", absorbing_limit),
        ("SCC example", scc_example),
        ("balanced => strongly connected", balanced_implies_strong),
        ("ER measure", er_measure_values),
        ("confirmation bias", confirmation_bias),
        ("polarization persists", polarization_persists),
    ];
    let mut failures = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        match criterion() {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("[FAIL] {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
