//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use hyperflow_cli::{parse_config, restart, run_experiment};
use hyperflow_core::curvfun::{epsilon0_estimate, CurvatureFunction, PrincipalCurvatures, SimplexRefinement, StructureConstants};
use hyperflow_core::diagnostics::{
    boundedness_monitor, decay_rate_fit, grad1_residual, max_point_identity, Grad1Report, Quantity,
};
use hyperflow_core::flow::{resume, run, spherical_solution, step, FlowConfig, FlowState, InitialData, RunOutput};
use hyperflow_core::geometry::{build_jet, offcenter_sphere_graph, AxiMesh, GraphField, HyperboloidOracle};
use rand::{Rng, SeedableRng};

/// Regression bound on `κ_max/κ_min` for `t ≥ 1` in the acceptance run,
/// pinned from the first green run (observed `1 + 1.0e-10`).
const KAPPA_RATIO_BOUND: f64 = 1.0 + 1e-6;

const OFFCENTER: InitialData = InitialData::OffCenter { radius: 1.2, offset: 0.5 };

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn gauss_config(p: f64, nodes: usize, t_end: f64, initial: InitialData) -> FlowConfig {
    let mut c = FlowConfig::new(CurvatureFunction::gauss(2).unwrap(), p, nodes, initial);
    c.t_end = t_end;
    c
}

fn criterion_1() -> Outcome {
    let clock = Instant::now();
    let c = 1.0 / 1.2f64.tanh();
    let errs: Vec<f64> = [128, 256, 512]
        .iter()
        .map(|&n| {
            let f = offcenter_sphere_graph(1.2, 0.5, AxiMesh::new(2, n).unwrap()).unwrap();
            let jet = build_jet(&f);
            jet.kappa_merid.iter().chain(&jet.kappa_par).map(|k| (k - c).abs()).fold(0.0, f64::max)
        })
        .collect();
    let (o1, o2) = (order(errs[0], errs[1]), order(errs[1], errs[2]));
    let t = clock.elapsed();
    outcome(
        errs[2] <= 1e-6 && o1 >= 3.5 && o2 >= 3.5 && within(t, 1.0),
        format!("max |kappa - coth 1.2| = {:.2e} at N = 512, orders {o1:.2}, {o2:.2} ({t:.2?})", errs[2]),
    )
}

fn criterion_2() -> Outcome {
    let clock = Instant::now();
    let errs: Vec<f64> = [128, 256, 512]
        .iter()
        .map(|&n| {
            let f = GraphField::from_fn(AxiMesh::new(2, n).unwrap(), |p| 2.0 + 0.1 * p.cos()).unwrap();
            let jet = build_jet(&f);
            let oracle = HyperboloidOracle::new(&f);
            (2..n - 2)
                .map(|j| {
                    let (km, kp) = oracle.curvatures(j).unwrap();
                    (km - jet.kappa_merid[j]).abs().max((kp - jet.kappa_par[j]).abs())
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let (o1, o2) = (order(errs[0], errs[1]), order(errs[1], errs[2]));
    let t = clock.elapsed();
    outcome(
        o1 >= 2.0 && o2 >= 2.0 && within(t, 5.0),
        format!("discrepancy {:.2e} / {:.2e} / {:.2e}, orders {o1:.2}, {o2:.2} ({t:.2?})", errs[0], errs[1], errs[2]),
    )
}

fn criterion_3() -> Outcome {
    let clock = Instant::now();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let mut euler: f64 = 0.0;
    for _ in 0..10_000 {
        let n = rng.gen_range(2..=6);
        let a = rng.gen_range(0.01..=1.0 / n as f64);
        let f = CurvatureFunction::new(n, a).unwrap();
        let k = PrincipalCurvatures::new((0..n).map(|_| 10f64.powf(rng.gen_range(-3.0..3.0))).collect()).unwrap();
        let val = f.eval(&k).unwrap();
        let sum: f64 = f.gradient(&k).unwrap().iter().zip(k.as_slice()).map(|(g, k)| g * k).sum();
        euler = euler.max((sum - val).abs() / val);
    }
    let gauss_err = (2..=4)
        .map(|n| {
            let f = CurvatureFunction::gauss(n).unwrap();
            (epsilon0_estimate(&f, SimplexRefinement::default()).unwrap().epsilon0 - 1.0 / n as f64).abs()
        })
        .fold(0.0, f64::max);
    let quarter = CurvatureFunction::new(2, 0.25).unwrap();
    let seq: Vec<f64> = (0..=8)
        .map(|levels| {
            let r = SimplexRefinement { boundary_levels: levels, ..SimplexRefinement::default() };
            epsilon0_estimate(&quarter, r).unwrap().epsilon0
        })
        .collect();
    let est = *seq.last().unwrap();
    let decreasing = seq.windows(2).all(|w| w[1] <= w[0]) && est < seq[0] && seq.iter().all(|e| *e >= 0.25);
    let p0_half = StructureConstants::from_epsilon0(0.5).p0;
    let p0_third = CurvatureFunction::gauss(3).unwrap().exact_structure_constants().p0;
    let t = clock.elapsed();
    outcome(
        euler <= 1e-12
            && gauss_err <= 1e-10
            && (0.25..=0.27).contains(&est)
            && decreasing
            && p0_half == 2.0
            && p0_third == 1.5
            && within(t, 5.0),
        format!(
            "euler {euler:.1e}, gauss eps0 err {gauss_err:.1e}, eps0(a=1/4) {:.4} -> {est:.10}, p0 = {p0_half}, {p0_third} ({t:.2?})",
            seq[0]
        ),
    )
}

fn criterion_4() -> Outcome {
    let clock = Instant::now();
    let c = gauss_config(1.5, 256, 10.0, InitialData::Perturbed { radius: 1.0, amplitude: 0.0, mode: 0 });
    let speed = c.speed().unwrap();
    let mut err: f64 = 0.0;
    let out = resume(c.initial_state().unwrap(), &c, |s| {
        let exact = spherical_solution(1.0, &speed, s.t);
        err = s.field.values().iter().map(|u| (u - exact).abs()).fold(err, f64::max);
    })
    .unwrap();
    let t = clock.elapsed();
    outcome(
        out.healthy() && out.final_state.t == 10.0 && err <= 1e-6 && within(t, 30.0),
        format!("max |u_PDE - u_ODE| = {err:.2e} over {} outputs ({t:.2?})", out.series.len()),
    )
}

fn fitted(out: &RunOutput, q: Quantity, window: [f64; 2]) -> Option<f64> {
    decay_rate_fit(out.series.records(), q, window).ok().map(|f| f.lambda_hat)
}

fn show(lam: Option<f64>) -> String {
    lam.map_or("no fit".to_string(), |l| format!("{l:.5}"))
}

fn criterion_5(out: &RunOutput, elapsed: Duration) -> Outcome {
    let target = 2.0 / 2f64.powf(1.5);
    let lam = fitted(out, Quantity::VMaxMinus1, [15.0, 30.0]);
    let ok = lam.is_some_and(|l| (l - target).abs() <= 0.15 * target);
    outcome(
        ok && out.healthy() && within(elapsed, 120.0),
        format!("lambda_hat(v_max - 1) = {}, target {target:.5}, band [0.601, 0.813] ({elapsed:.2?})", show(lam)),
    )
}

fn criterion_6(out: &RunOutput) -> Outcome {
    let target = 2.0 / 2f64.powf(1.5);
    let lam = fitted(out, Quantity::CothUMinus1, [15.0, 30.0]);
    outcome(
        lam.is_some_and(|l| (l - target).abs() <= 0.15 * target),
        format!("lambda_hat(coth u - 1) = {}, target {target:.5}", show(lam)),
    )
}

fn criterion_7(out: &RunOutput) -> Outcome {
    let recs = out.series.records();
    let positive = recs.iter().all(|r| r.kappa_min > 0.0);
    let rep = boundedness_monitor(recs, 1.0);
    outcome(
        positive && rep.compact && rep.kappa_ratio_max <= KAPPA_RATIO_BOUND,
        format!(
            "kappa_min > 0 on all {} records: {positive}, max kappa_max/kappa_min (t >= 1) = 1 + {:.2e}, bound 1 + {:.0e}",
            recs.len(),
            rep.kappa_ratio_max - 1.0,
            KAPPA_RATIO_BOUND - 1.0
        ),
    )
}

fn criterion_8(out: &RunOutput) -> Outcome {
    let tail: Vec<f64> = out.series.records().iter().filter(|r| r.t >= 10.0).map(|r| r.cauchy_u_tilde).collect();
    let monotone = tail.windows(2).all(|w| w[1] < w[0]);
    let last = *tail.last().unwrap_or(&f64::NAN);
    outcome(
        monotone && last < 1e-3 && tail.len() >= 20,
        format!("cauchy(u~) strictly decreasing on t >= 10: {monotone}, final {last:.2e}"),
    )
}

fn criterion_9() -> Outcome {
    let clock = Instant::now();
    let out = run(&gauss_config(2.0, 512, 30.0, OFFCENTER)).unwrap();
    let lam = fitted(&out, Quantity::VMaxMinus1, [15.0, 30.0]);
    let t = clock.elapsed();
    outcome(
        out.healthy() && lam.is_some_and(|l| l > 0.0),
        format!("p = p0 = 2: healthy {}, lambda_hat(v_max - 1) = {} ({t:.2?})", out.healthy(), show(lam)),
    )
}

/// States at `t - δ`, `t`, `t + δ` with `δ = Δφ²/4`.
fn checkpoints(nodes: usize, t: f64) -> (FlowState, FlowState, FlowState, hyperflow_core::SpeedFunction) {
    let dphi = PI / nodes as f64;
    let delta = 0.25 * dphi * dphi;
    let c = gauss_config(1.5, nodes, t - delta, OFFCENTER);
    let s = c.speed().unwrap();
    let a = run(&c).unwrap().final_state;
    let b = step(&a, &s, delta).unwrap();
    let d = step(&b, &s, delta).unwrap();
    (a, b, d, s)
}

fn criterion_10() -> Outcome {
    let clock = Instant::now();
    let mut mp = Vec::new();
    let mut full = Vec::new();
    let mut ablated = vec![Vec::new(); 7];
    for nodes in [64, 128, 256] {
        let (a, b, c, s) = checkpoints(nodes, 1.0);
        mp.push(max_point_identity(&b).map(|m| m.residual).unwrap_or(f64::NAN));
        let rep = grad1_residual(&a, &b, &c, &s).unwrap();
        full.push(rep.max_defect([true; 7], 0));
        for (k, v) in ablated.iter_mut().enumerate() {
            v.push(rep.max_defect(Grad1Report::without(k), 0));
        }
    }
    let mp_orders = [order(mp[0], mp[1]), order(mp[1], mp[2])];
    let g_orders = [order(full[0], full[1]), order(full[1], full[2])];
    let ablation_ok = ablated.iter().all(|v| order(v[0], v[2]) < 1.0 && v[2] > 100.0 * full[2]);
    let worst_ablated = ablated.iter().map(|v| order(v[0], v[2]) / 2.0).fold(f64::NEG_INFINITY, f64::max);
    let t = clock.elapsed();
    outcome(
        mp_orders.iter().chain(&g_orders).all(|o| *o >= 2.0) && ablation_ok && within(t, 120.0),
        format!(
            "max-point orders {:.2}, {:.2}; grad1 orders {:.2}, {:.2}; ablated orders <= {worst_ablated:.2} ({t:.2?})",
            mp_orders[0], mp_orders[1], g_orders[0], g_orders[1]
        ),
    )
}

fn read_csv(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn criterion_11() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = |t_end: f64, out: &str| {
        parse_config(&format!(
            "n=2 p=1.5 a=0.5 init=offcenter(1.2,0.5) N=128 T_end={t_end} output={}",
            tmp.path().join(out).display()
        ))
        .unwrap()
    };
    run_experiment(&cfg(4.0, "a")).unwrap();
    run_experiment(&cfg(4.0, "b")).unwrap();
    let csv_a = fs::read(tmp.path().join("a/diagnostics.csv")).unwrap();
    let identical = csv_a == fs::read(tmp.path().join("b/diagnostics.csv")).unwrap();

    run_experiment(&cfg(2.0, "half")).unwrap();
    let resumed = restart(&tmp.path().join("half/final.snap"), &cfg(4.0, "resumed")).unwrap();
    let direct = read_csv(&tmp.path().join("a/diagnostics.csv"));
    let again = read_csv(&tmp.path().join("resumed/diagnostics.csv"));
    let offset = direct.iter().position(|r| r[0] == again[0][0]).unwrap();
    let mut worst: f64 = 0.0;
    for (i, row) in again.iter().enumerate() {
        for (col, (x, y)) in row.iter().zip(&direct[offset + i]).enumerate() {
            // the first restarted record has no predecessor for the Cauchy column
            if i == 0 && col == 9 {
                continue;
            }
            worst = worst.max((x - y).abs() / x.abs().max(1.0));
        }
    }
    let covered = again.len() == direct.len() - offset && resumed.exit_code == 0;
    outcome(
        identical && covered && worst <= 1e-10,
        format!("reruns bit-identical: {identical}; restart at t = 2 vs direct run: max deviation {worst:.1e}"),
    )
}

fn main() {
    let mut failed = 0;
    let mut report = |id: usize, name: &str, o: Outcome| {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {verdict} [{name}] {}", o.detail);
        if !o.pass {
            failed += 1;
        }
    };
    report(1, "off-center sphere geometry", criterion_1());
    report(2, "hyperboloid oracle agreement", criterion_2());
    report(3, "curvature function algebra", criterion_3());
    report(4, "ODE/PDE equivalence", criterion_4());

    let clock = Instant::now();
    let main_run = run(&gauss_config(1.5, 512, 30.0, OFFCENTER)).unwrap();
    let elapsed = clock.elapsed();
    report(5, "gradient decay rate", criterion_5(&main_run, elapsed));
    report(6, "slice decay rate", criterion_6(&main_run));
    report(7, "convexity and compactness", criterion_7(&main_run));
    report(8, "rescaled convergence", criterion_8(&main_run));
    report(9, "boundary exponent p = p0", criterion_9());
    report(10, "proof identities", criterion_10());
    report(11, "determinism and restart", criterion_11());

    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 11 acceptance criteria passed");
}
