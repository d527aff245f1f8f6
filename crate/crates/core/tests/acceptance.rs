//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs without the libtest harness so the lines are always
//! printed.

use std::path::PathBuf;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spe_core::diagnostics::{
    cone_check, default_family, default_stability_constant, energy, entropy_record, entropy_table, epsilon_sweep,
    exact_shock_trajectory, front_position, kruzhkov_constants, l2_balance, linfty_check, mean_check, mean_residual,
    required_kappa, scaling_constants, stability_compare, ENTROPY_KAPPA,
};
use spe_core::field::{lp_norm, make_uniform_grid, mean, Field, Norm};
use spe_core::presets::{preset_initial, InitialPreset};
use spe_core::runner::{ENTROPY_LEVELS, DEFAULT_EPSILONS};
use spe_core::scenario::{perturbed, Resolved, ScenarioSpec};
use spe_core::scheme::{advance, run, stable_dt, BoundaryData, SchemeKind, SolverConfig, State, Trajectory};

fn scenario(name: &str) -> Resolved {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let text = std::fs::read_to_string(dir.join(format!("{name}.json"))).expect("fixture");
    ScenarioSpec::from_json(&text).unwrap().resolve(&dir).unwrap()
}

fn with_cells(r: &Resolved, n: usize) -> Resolved {
    let mut spec = r.spec.clone();
    spec.grid.n = n;
    spec.resolve(std::path::Path::new(".")).unwrap()
}

fn solve(r: &Resolved) -> Trajectory {
    run(&r.u0, &r.g, &r.config).unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

// 1. Zero mean on S1 and S2, not growing under n → 2n.
fn zero_mean() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for name in ["s1", "s2"] {
        let r = scenario(name);
        let l1 = lp_norm(&r.u0, Norm::L1);
        let started = Instant::now();
        let tr = solve(&r);
        let secs = started.elapsed().as_secs_f64();
        let m = mean_residual(&tr).into_iter().fold(0.0, f64::max);
        let fine = solve(&with_cells(&r, 2 * r.grid.cells()));
        let mf = mean_residual(&fine).into_iter().fold(0.0, f64::max);
        let ok = mean_check(&tr).passed() && mf <= m.max(1e-13 * l1) && secs < 10.0;
        pass &= ok;
        detail.push(format!("{name}: max|mean|={m:.3e} (n=2n: {mf:.3e}) bound={:.3e} {secs:.2}s", 1e-8 * l1));
    }
    outcome(pass, detail.join("; "))
}

// 2. L² balance residual shrinks by a factor in [1.5, 3] from n=1000 to n=2000.
fn l2_balance_refinement() -> Outcome {
    let started = Instant::now();
    let r = scenario("s1");
    let coarse = l2_balance(&solve(&with_cells(&r, 1000))).residual();
    let fine = l2_balance(&solve(&with_cells(&r, 2000))).residual();
    let ratio = coarse / fine;
    let secs = started.elapsed().as_secs_f64();
    outcome(
        (1.5..=3.0).contains(&ratio) && secs < 30.0,
        format!("residual n=1000 {coarse:.4e}, n=2000 {fine:.4e}, ratio {ratio:.3} {secs:.2}s"),
    )
}

/// Snapshot-to-snapshot energy tolerance `(Δx + Δt_max)(E(0) + 8∫g⁶ + 1)`,
/// the same declaration as the invariants report.
fn energy_tolerance(tr: &Trajectory, g6: f64) -> f64 {
    let dt = tr.step_log.iter().copied().fold(0.0, f64::max);
    (tr.config.grid.dx() + dt) * (energy(&tr.initial) + g6 + 1.0)
}

fn g6_integral(tr: &Trajectory, t: f64) -> f64 {
    tr.boundary_series
        .windows(2)
        .filter(|w| w[1].t <= t + 1e-12)
        .map(|w| 4.0 * (w[1].t - w[0].t) * (w[0].g.powi(6) + w[1].g.powi(6)))
        .sum()
}

// 3. Energy: nonincreasing on S1, bounded by E(0) + 8∫g⁶ on S2.
fn energy_bound() -> Outcome {
    let started = Instant::now();
    let s1 = solve(&scenario("s1"));
    let tol1 = energy_tolerance(&s1, 0.0);
    let es: Vec<f64> = s1.states().iter().map(|s| energy(s)).collect();
    let worst_inc = es.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let s2 = solve(&scenario("s2"));
    let tol2 = energy_tolerance(&s2, g6_integral(&s2, s2.config.final_time));
    let e0 = energy(&s2.initial);
    let worst2 = s2
        .states()
        .iter()
        .map(|s| energy(s) - e0 - g6_integral(&s2, s.t))
        .fold(f64::NEG_INFINITY, f64::max);
    let secs = started.elapsed().as_secs_f64();
    outcome(
        worst_inc <= tol1 && worst2 <= tol2 && secs < 20.0,
        format!(
            "S1 max E increment {worst_inc:.3e} (tol {tol1:.2e}); S2 max E-E0-8∫g⁶ {worst2:.3e} (tol {tol2:.2e}) {secs:.2}s"
        ),
    )
}

// 4. ‖P‖∞² ≤ 2‖P‖₂‖u‖₂ + 1e-10 at every snapshot of every shipped scenario.
fn p_chain() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for name in ["s1", "s2", "zero", "riemann", "s1-sweep", "s1-stability"] {
        let tr = solve(&scenario(name));
        for s in tr.states() {
            let lhs = s.p.max_abs().powi(2);
            let rhs = 2.0 * lp_norm(&s.p, Norm::L2) * lp_norm(&s.u, Norm::L2);
            worst = worst.max(lhs - rhs);
            count += 1;
        }
    }
    outcome(worst <= 1e-10, format!("max(‖P‖∞² − 2‖P‖₂‖u‖₂) = {worst:.3e} over {count} states"))
}

// 5. L∞ barrier on S1 and S2, and on S1 at ε = 1e-2 and 1e-3.
fn linfty_barrier() -> Outcome {
    let started = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, eps) in [("s1", 1e-2), ("s2", 1e-2), ("s1", 1e-3), ("s2", 1e-3)] {
        let mut r = scenario(name);
        r.config.epsilon = eps;
        let rec = linfty_check(&solve(&r));
        pass &= rec.passed();
        detail.push(format!("{name}@{eps:e}: {:.4} ≤ {:.4}", rec.measured, rec.bound));
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(pass && secs < 30.0, format!("{} {secs:.2}s", detail.join("; ")))
}

// 6. Entropy inequality on the smallest-ε S1 run with a tolerance calibrated
//    on the Rankine–Hugoniot shock.
fn entropy() -> Outcome {
    let started = Instant::now();
    // Calibration: numerical front of the Riemann problem and the exact shock.
    let rm = scenario("riemann");
    let rtr = solve(&rm);
    let front = front_position(&rtr.final_state().u, 0.5).unwrap_or(f64::NAN);
    let predicted = 0.5 + 1.0 * rtr.final_state().t;
    let front_ok = (front - predicted).abs() <= 2.0 * rm.grid.dx();
    let shock = exact_shock_trajectory(rm.grid.length(), rm.grid.cells(), 0.2, ENTROPY_LEVELS, 1.0, 0.0, 0.5).unwrap();
    let kappa = required_kappa(
        &shock,
        &kruzhkov_constants(&shock, 5),
        &default_family(&shock, (3, 3)).unwrap(),
    )
    .unwrap();

    let mut r = scenario("s1");
    r.config.epsilon = *DEFAULT_EPSILONS.last().unwrap();
    let t_end = r.config.final_time;
    r.config.snapshot_times = (1..=ENTROPY_LEVELS).map(|j| t_end * j as f64 / ENTROPY_LEVELS as f64).collect();
    let tr = solve(&r);
    let cs = kruzhkov_constants(&tr, 5);
    let family = default_family(&tr, (3, 3)).unwrap();
    let rows = entropy_table(&tr, &cs, &family, ENTROPY_KAPPA).unwrap();
    let rec = entropy_record(&rows);
    let min = rows.iter().map(|r| r.residual).fold(f64::INFINITY, f64::min);
    let secs = started.elapsed().as_secs_f64();
    outcome(
        front_ok && kappa <= ENTROPY_KAPPA && rec.passed() && rows.len() == 45 && secs < 60.0,
        format!(
            "front {front:.4} vs {predicted:.4} (2Δx={:.3}); shock needs κ={kappa:.3e} ≤ {ENTROPY_KAPPA}; \
             {} residuals, min {min:.3e}, worst −r/tol {:.3e} {secs:.2}s",
            2.0 * rm.grid.dx(),
            rows.len(),
            rec.measured
        ),
    )
}

// 7. L¹ stability with C = 3M² + 1 and the finite propagation cone.
fn stability() -> Outcome {
    let started = Instant::now();
    let r = scenario("s1-stability");
    let st = r.spec.stability.clone().unwrap();
    let base = solve(&r);
    let near = run(&perturbed(&r.u0, &st.perturbation).unwrap(), &r.g, &r.config).unwrap();
    let far = run(&perturbed(&r.u0, st.far_perturbation.as_ref().unwrap()).unwrap(), &r.g, &r.config).unwrap();
    let c = default_stability_constant(&base, &near).max(default_stability_constant(&base, &far));
    let ineq = stability_compare(&near, &base, st.window, c).unwrap();
    let cone = cone_check(&far, &base, st.window, r.config.final_time, st.noise).unwrap();

    // Same pair with the zero-mean multiplier switched off, for reference.
    let mut raw = r.config.clone();
    raw.mean_projection = false;
    let base_raw = run(&r.u0, &r.g, &raw).unwrap();
    let far_raw = run(&perturbed(&r.u0, st.far_perturbation.as_ref().unwrap()).unwrap(), &r.g, &raw).unwrap();
    let cone_raw = cone_check(&far_raw, &base_raw, st.window, raw.final_time, st.noise).unwrap();
    let secs = started.elapsed().as_secs_f64();
    outcome(
        ineq.passed() && cone.passed() && secs < 30.0,
        format!(
            "C={c:.3}, R={}: worst ratio {:.4} (≤1.01: {}); cone window diff {:.3e} vs noise {:.0e} ({}); \
             without multiplier {:.3e} {secs:.2}s",
            st.window,
            ineq.measured,
            ineq.passed(),
            cone.measured,
            st.noise,
            cone.passed(),
            cone_raw.measured
        ),
    )
}

// 8. Vanishing-viscosity Cauchy behaviour at n = 4000.
fn sweep() -> Outcome {
    let started = Instant::now();
    let r = scenario("s1-sweep");
    assert_eq!(r.grid.cells(), 4000);
    let s = epsilon_sweep(&r.u0, &r.g, &r.config, &DEFAULT_EPSILONS).unwrap();
    let secs = started.elapsed().as_secs_f64();
    let d: Vec<String> = s.differences.iter().map(|d| format!("{d:.3e}")).collect();
    outcome(
        s.record.passed() && secs < 180.0,
        format!("d_k = [{}], worst ratio {:.3} {secs:.2}s", d.join(", "), s.record.measured),
    )
}

// 9. Scaling identities over 100 random (k, c₂).
fn scaling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let k = 10f64.powf(rng.gen_range(-3.0..3.0));
        let c2 = 10f64.powf(rng.gen_range(-3.0..3.0));
        let (a, b) = scaling_constants(k, c2).unwrap().identity_defects();
        worst = worst.max(a.abs()).max(b.abs());
    }
    outcome(worst <= 4.0 * f64::EPSILON, format!("max identity defect {worst:.3e}"))
}

/// Dense reference for one IMEX step: explicit upwind advection and source,
/// then one LU solve of the full nodal backward-Euler system with Dirichlet
/// rows, then the uniform zero-mean multiplier written as a rank-one update.
fn dense_imex_step(u: &[f64], dx: f64, eps: f64, dt: f64, g_new: f64) -> Vec<f64> {
    let m = u.len();
    let n = m - 1;
    let mut p = vec![0.0; m];
    for i in 1..m {
        p[i] = p[i - 1] + 0.5 * dx * (u[i - 1] + u[i]);
    }
    let mut star = DVector::from_column_slice(u);
    for i in 1..n {
        star[i] = u[i] - dt * (u[i].powi(3) - u[i - 1].powi(3)) / dx + dt * p[i];
    }
    let r = eps * dt / (dx * dx);
    let mut a = DMatrix::<f64>::zeros(m, m);
    a[(0, 0)] = 1.0;
    a[(n, n)] = 1.0;
    for i in 1..n {
        a[(i, i - 1)] = -r;
        a[(i, i)] = 1.0 + 2.0 * r;
        a[(i, i + 1)] = -r;
    }
    star[0] = g_new;
    star[n] = 0.0;
    let next = a.lu().solve(&star).expect("nonsingular");
    // Trapezoid weights w, interior indicator e: u ← u − (wᵀu / (wᵀe)) e.
    let w = DVector::from_fn(m, |i, _| if i == 0 || i == n { 0.5 * dx } else { dx });
    let e = DVector::from_fn(m, |i, _| if i == 0 || i == n { 0.0 } else { 1.0 });
    let shift = w.dot(&next) / w.dot(&e);
    (next - e * shift).iter().copied().collect()
}

// 10. One IMEX step against the dense reference on a 50-node grid.
fn oracle_step() -> Outcome {
    let s1 = scenario("s1");
    let grid = make_uniform_grid(s1.grid.length(), 49).unwrap();
    let mut cfg = SolverConfig::new(s1.config.epsilon, grid, 1.0, 0.9, SchemeKind::Imex, vec![]).unwrap();
    cfg.blowup_threshold = 1e9;
    let u0 = preset_initial(&InitialPreset::BumpDerivative { a: 1.0, x0: 2.0, sigma: 1.0 }, grid).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut rand_u: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
    rand_u[0] = 0.0;
    rand_u[49] = 0.0;
    let rand_state = Field::new(grid, rand_u).unwrap();

    let mut worst: f64 = 0.0;
    for u in [u0, rand_state] {
        let st = State::new(0.0, u);
        let dt = stable_dt(&st, &cfg);
        let (next, _) = advance(&st, &cfg, &BoundaryData::zero(), dt).unwrap();
        let dense = dense_imex_step(st.u.values(), grid.dx(), cfg.epsilon, dt, 0.0);
        for (a, b) in next.u.values().iter().zip(&dense) {
            worst = worst.max((a - b).abs());
        }
        assert!(mean(&next.u).abs() < 1e-12);
    }
    outcome(worst <= 1e-12, format!("max node-wise difference {worst:.3e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("zero-mean conservation", zero_mean),
        ("L2 balance refinement", l2_balance_refinement),
        ("L4 + P2 energy bound", energy_bound),
        ("P boundedness chain", p_chain),
        ("L-infinity barrier", linfty_barrier),
        ("entropy inequality", entropy),
        ("L1 stability and cone", stability),
        ("vanishing-viscosity Cauchy", sweep),
        ("scaling identities", scaling),
        ("dense oracle step", oracle_step),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!("criterion {:>2} {:<28} {}  {}", k + 1, name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
