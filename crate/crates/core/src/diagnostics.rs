//! One numerical check per a-priori estimate of the viscous problem, the L¹
//! stability comparator, the vanishing-viscosity sweep and the physical
//! scaling map.
//!
//! Every check produces a [`CheckRecord`] with `residual = measured − bound`
//! (or an absolute defect where no bound applies) and a declared tolerance;
//! the verdict is `pass` iff `residual ≤ tolerance`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{
    entropy_residual, entropy_tolerance, extract_trace, make_bump_family, test_function_scale, EntropyPair, Rect,
    TestFunction,
};
use crate::error::{invalid_arg, Result};
use crate::field::{l2_squared, l4_fourth, lp_norm, make_uniform_grid, mean, windowed_l1, Field, Norm};
use crate::scheme::{run, BoundaryData, SchemeKind, SolverConfig, State, StepSample, Trajectory};
use crate::tags;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    pub paper_tag: String,
    pub measured: f64,
    pub bound: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement_slope: Option<f64>,
}

impl CheckRecord {
    /// Record with `residual = measured − bound`.
    pub fn against_bound(check: impl Into<String>, tag: &str, measured: f64, bound: f64, tolerance: f64) -> Self {
        Self::with_residual(check, tag, measured, bound, measured - bound, tolerance)
    }

    pub fn with_residual(
        check: impl Into<String>,
        tag: &str,
        measured: f64,
        bound: f64,
        residual: f64,
        tolerance: f64,
    ) -> Self {
        let verdict = if residual <= tolerance { Verdict::Pass } else { Verdict::Fail };
        CheckRecord {
            check: check.into(),
            paper_tag: tag.to_string(),
            measured,
            bound,
            residual,
            tolerance,
            verdict,
            refinement_slope: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiagnosticsReport {
    pub checks: Vec<CheckRecord>,
}

impl DiagnosticsReport {
    pub fn push(&mut self, r: CheckRecord) {
        self.checks.push(r);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(CheckRecord::passed)
    }

    pub fn get(&self, check: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.check == check)
    }
}

// ---------------------------------------------------------------------------
// Physical scaling

/// Constants of the change of variables from the physical pulse model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalScaling {
    pub k: f64,
    pub c2: f64,
    pub d1: f64,
    pub d2: f64,
}

impl PhysicalScaling {
    /// `(2c₂²D₁D₂ + 1, c₂²k²D₂² − 1)`; both vanish up to rounding.
    pub fn identity_defects(&self) -> (f64, f64) {
        let c2sq = self.c2 * self.c2;
        (2.0 * c2sq * self.d1 * self.d2 + 1.0, c2sq * self.k * self.k * self.d2 * self.d2 - 1.0)
    }
}

/// `D₁ = −k/(2c₂)`, `D₂ = 1/(c₂k)`.
pub fn scaling_constants(k: f64, c2: f64) -> Result<PhysicalScaling> {
    if !(k > 0.0 && k.is_finite() && c2 > 0.0 && c2.is_finite()) {
        return invalid_arg(format!("scaling needs k > 0 and c2 > 0, got k = {k}, c2 = {c2}"));
    }
    Ok(PhysicalScaling { k, c2, d1: -k / (2.0 * c2), d2: 1.0 / (c2 * k) })
}

pub fn scaling_check(s: &PhysicalScaling) -> CheckRecord {
    let (a, b) = s.identity_defects();
    let m = a.abs().max(b.abs());
    CheckRecord::with_residual("scaling-identities", tags::SCALING, m, 0.0, m, 8.0 * f64::EPSILON)
}

// ---------------------------------------------------------------------------
// Helpers

fn time_integral(series: &[StepSample], f: impl Fn(&StepSample) -> f64) -> f64 {
    series.windows(2).map(|w| 0.5 * (w[1].t - w[0].t) * (f(&w[0]) + f(&w[1]))).sum()
}

/// Running `∫₀ᵗ f` over the boundary series, sampled at each state time.
fn time_integral_until(series: &[StepSample], t: f64, f: impl Fn(&StepSample) -> f64) -> f64 {
    let end = series.partition_point(|s| s.t <= t + 1e-12);
    time_integral(&series[..end], f)
}

fn max_dt(traj: &Trajectory) -> f64 {
    traj.step_log.iter().copied().fold(0.0, f64::max)
}

/// Largest `|u|` over every stored state of the run.
pub fn max_amplitude(traj: &Trajectory) -> f64 {
    traj.states().iter().map(|s| s.u.max_abs()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Zero mean

/// `|mean(u(t))|` per stored state, initial state first.
pub fn mean_residual(traj: &Trajectory) -> Vec<f64> {
    traj.states().iter().map(|s| mean(&s.u).abs()).collect()
}

pub fn mean_check(traj: &Trajectory) -> CheckRecord {
    let m = mean_residual(traj).into_iter().fold(0.0, f64::max);
    let bound = 1e-8 * lp_norm(&traj.initial.u, Norm::L1);
    CheckRecord::against_bound("zero-mean", tags::ZERO_MEAN, m, bound, 0.0)
}

// ---------------------------------------------------------------------------
// L² balance

/// Both sides of the integrated L² balance over `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L2Balance {
    /// `‖u(T)‖₂² − ‖u₀‖₂² + 2ε ∫ ‖∂x u‖₂²`.
    pub lhs: f64,
    /// `∫ ((3/2) g⁴ − 2ε g ∂x u(t,0))`.
    pub rhs: f64,
    /// `∫ Δx ∫ 3u² (∂x u)²`, the budget of the upwind numerical viscosity.
    pub upwind_budget: f64,
}

impl L2Balance {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

/// Integrates the L² balance discretely with the trapezoid rule in time over
/// every accepted step. The boundary flux `−2ε g ∂x u(t,0)` carries the sign
/// produced by integrating `2ε u ∂xx u` by parts on the half-line.
pub fn l2_balance(traj: &Trajectory) -> L2Balance {
    let eps = traj.config.epsilon;
    let s = &traj.boundary_series;
    let dissip = 2.0 * eps * time_integral(s, |x| x.grad_l2_sq);
    let lhs = l2_squared(&traj.final_state().u) - l2_squared(&traj.initial.u) + dissip;
    let rhs = time_integral(s, |x| 1.5 * x.g.powi(4) - 2.0 * eps * x.g * x.dudx0);
    let upwind_budget = time_integral(s, |x| x.upwind_dissipation);
    L2Balance { lhs, rhs, upwind_budget }
}

pub fn l2_balance_residual(traj: &Trajectory) -> f64 {
    l2_balance(traj).residual()
}

/// The residual is accepted up to twice the upwind numerical-viscosity
/// budget, the first-order defect of the scheme's own energy law.
pub fn l2_balance_check(traj: &Trajectory) -> CheckRecord {
    let b = l2_balance(traj);
    CheckRecord::with_residual(
        "l2-balance",
        tags::L2_BALANCE,
        b.lhs,
        b.rhs,
        b.residual(),
        2.0 * b.upwind_budget + 1e-12,
    )
}

// ---------------------------------------------------------------------------
// L⁴ + P² energy

/// `E(t) = ½‖u‖₄⁴ + ‖P‖₂²`.
pub fn energy(state: &State) -> f64 {
    0.5 * l4_fourth(&state.u) + l2_squared(&state.p)
}

/// `max_t (E(t) − E(0) − 8∫₀ᵗ g⁶)` against the declared tolerance
/// `(Δx + Δt_max)(E(0) + 8∫₀ᵀ g⁶ + 1)`.
pub fn energy_l4_p2_check(traj: &Trajectory) -> CheckRecord {
    let e0 = energy(&traj.initial);
    let s = &traj.boundary_series;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_e = e0;
    let mut worst_b = e0;
    for st in traj.states() {
        let e = energy(st);
        let b = e0 + 8.0 * time_integral_until(s, st.t, |x| x.g.powi(6));
        if e - b > worst {
            worst = e - b;
            worst_e = e;
            worst_b = b;
        }
    }
    let g6 = 8.0 * time_integral(s, |x| x.g.powi(6));
    let tol = (traj.config.grid.dx() + max_dt(traj)) * (e0 + g6 + 1.0);
    CheckRecord::against_bound("energy-l4-p2", tags::ENERGY_L4_P2, worst_e, worst_b, tol)
}

// ---------------------------------------------------------------------------
// P in L∞

/// `‖P(t)‖∞² ≤ 2‖P(t)‖₂‖u(t)‖₂` at every stored state; reports the worst state.
pub fn p_infty_check(traj: &Trajectory) -> CheckRecord {
    let mut rec = (f64::NEG_INFINITY, 0.0, 0.0);
    for st in traj.states() {
        let lhs = st.p.max_abs().powi(2);
        let rhs = 2.0 * lp_norm(&st.p, Norm::L2) * lp_norm(&st.u, Norm::L2);
        if lhs - rhs > rec.0 {
            rec = (lhs - rhs, lhs, rhs);
        }
    }
    CheckRecord::against_bound("p-infty", tags::P_INFTY, rec.1, rec.2, 1e-10)
}

// ---------------------------------------------------------------------------
// u in L∞

/// `‖u(t)‖∞ ≤ max(‖u₀‖∞, ‖g‖∞) + t max_{s≤t} ‖P(s)‖∞`, with the discrete
/// Duhamel slack `10 Δt_max max ‖P‖∞` as tolerance.
pub fn linfty_check(traj: &Trajectory) -> CheckRecord {
    let base = traj.initial.u.max_abs().max(traj.boundary.sup_bound());
    let mut p_max: f64 = 0.0;
    let mut rec = (f64::NEG_INFINITY, 0.0, 0.0);
    for st in traj.states() {
        p_max = p_max.max(st.p.max_abs());
        let m = st.u.max_abs();
        let b = base + st.t * p_max;
        if m - b > rec.0 {
            rec = (m - b, m, b);
        }
    }
    let tol = 10.0 * max_dt(traj) * p_max + 1e-12;
    CheckRecord::against_bound("u-infty", tags::U_INFTY, rec.1, rec.2, tol)
}

/// The five checks of the `invariants` subcommand.
pub fn invariants_report(traj: &Trajectory) -> DiagnosticsReport {
    DiagnosticsReport {
        checks: vec![
            mean_check(traj),
            l2_balance_check(traj),
            energy_l4_p2_check(traj),
            p_infty_check(traj),
            linfty_check(traj),
        ],
    }
}

// ---------------------------------------------------------------------------
// L¹ stability

/// Default stability constant `3M² + 1`.
pub fn default_stability_constant(u: &Trajectory, v: &Trajectory) -> f64 {
    let m = max_amplitude(u).max(max_amplitude(v));
    3.0 * m * m + 1.0
}

fn paired_states<'a>(u: &'a Trajectory, v: &'a Trajectory) -> Result<Vec<(&'a State, &'a State)>> {
    if u.config.grid != v.config.grid {
        return invalid_arg("stability pair must share the grid");
    }
    let su = u.states();
    let sv = v.states();
    let mut out = Vec::new();
    for a in &su {
        if let Some(b) = sv.iter().find(|b| (b.t - a.t).abs() <= 1e-12 * a.t.max(1.0)) {
            out.push((*a, *b));
        }
    }
    Ok(out)
}

/// `‖u(t) − v(t)‖_{L¹(0,R)} ≤ e^{Ct} ‖u₀ − v₀‖_{L¹(0,R+Ct)} (1 + 0.01)` at
/// every common stored time. The record reports the worst ratio of the two
/// sides against 1.
pub fn stability_compare(u: &Trajectory, v: &Trajectory, r: f64, c: f64) -> Result<CheckRecord> {
    let t_end = u.config.final_time.max(v.config.final_time);
    let l = u.config.grid.length();
    if !(r > 0.0 && c >= 0.0) {
        return invalid_arg("stability needs R > 0 and C >= 0");
    }
    if r + c * t_end > l {
        return invalid_arg(format!("cone R + C T = {} exits the domain [0, {l}]", r + c * t_end));
    }
    let d0 = u.initial.u.sub(&v.initial.u)?;
    let mut worst = 0.0_f64;
    for (a, b) in paired_states(u, v)? {
        let lhs = windowed_l1(&a.u.sub(&b.u)?, r)?;
        let rhs = (c * a.t).exp() * windowed_l1(&d0, r + c * a.t)?;
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        worst = worst.max(ratio);
    }
    let mut rec = CheckRecord::against_bound(format!("l1-stability(R={r},C={c})"), tags::STABILITY, worst, 1.0, 0.01);
    if worst.is_nan() {
        rec.verdict = Verdict::Fail;
    }
    Ok(rec)
}

/// Largest `‖u(t) − v(t)‖_{L¹(0,R)}` over the common stored times with
/// `t ≤ t_max`, checked against an absolute noise floor.
pub fn cone_check(u: &Trajectory, v: &Trajectory, r: f64, t_max: f64, noise: f64) -> Result<CheckRecord> {
    let mut worst = 0.0_f64;
    for (a, b) in paired_states(u, v)? {
        if a.t <= t_max + 1e-12 {
            worst = worst.max(windowed_l1(&a.u.sub(&b.u)?, r)?);
        }
    }
    Ok(CheckRecord::against_bound(format!("propagation-cone(R={r})"), tags::STABILITY, worst, 0.0, noise))
}

// ---------------------------------------------------------------------------
// Vanishing-viscosity sweep

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub epsilons: Vec<f64>,
    /// `d_k = ‖u_{ε_k}(T) − u_{ε_{k+1}}(T)‖₁`.
    pub differences: Vec<f64>,
    /// Trace Cauchy differences in discrete `L¹_t`, one per consecutive pair.
    pub trace_differences: Vec<f64>,
    pub finals: Vec<Field>,
    pub record: CheckRecord,
}

/// Runs the solver at each `ε` (in parallel) on the base grid and checks that
/// the successive L¹ differences at `T` are nonincreasing within 10 %.
pub fn epsilon_sweep(u0: &Field, g: &BoundaryData, base: &SolverConfig, epsilons: &[f64]) -> Result<SweepResult> {
    if epsilons.len() < 2 {
        return invalid_arg("sweep needs at least two viscosities");
    }
    if epsilons.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return invalid_arg("sweep viscosities must be positive");
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return invalid_arg("sweep viscosities must be strictly decreasing");
    }
    let runs: Vec<Result<Trajectory>> = epsilons
        .par_iter()
        .map(|&eps| {
            let mut c = base.clone();
            c.epsilon = eps;
            c.snapshot_times = vec![c.final_time];
            run(u0, g, &c)
        })
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let finals: Vec<Field> = runs.iter().map(|t| t.final_state().u.clone()).collect();
    let differences = finals
        .windows(2)
        .map(|w| w[0].sub(&w[1]).map(|d| lp_norm(&d, Norm::L1)))
        .collect::<Result<Vec<_>>>()?;
    let traces: Vec<_> = runs.iter().map(extract_trace).collect();
    let trace_differences = traces
        .windows(2)
        .map(|w| trace_l1_distance(&w[0].times, &w[0].u_trace, &w[1].times, &w[1].u_trace))
        .collect();
    let worst = differences
        .windows(2)
        .map(|w| if w[1] == 0.0 { 0.0 } else { w[1] / w[0] })
        .fold(0.0, f64::max);
    let record = CheckRecord::against_bound("vanishing-viscosity-cauchy", tags::VANISHING_VISCOSITY, worst, 1.0, 0.1);
    Ok(SweepResult { epsilons: epsilons.to_vec(), differences, trace_differences, finals, record })
}

/// `∫ |a(t) − b(t)| dt` for two piecewise-linear series on their common span.
pub fn trace_l1_distance(ta: &[f64], a: &[f64], tb: &[f64], b: &[f64]) -> f64 {
    let mut times: Vec<f64> = ta.iter().chain(tb).copied().collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let end = ta.last().copied().unwrap_or(0.0).min(tb.last().copied().unwrap_or(0.0));
    times.retain(|&t| t <= end);
    let interp = |ts: &[f64], v: &[f64], t: f64| -> f64 {
        let k = ts.partition_point(|&s| s < t);
        if k == 0 {
            return v[0];
        }
        if k >= ts.len() {
            return v[ts.len() - 1];
        }
        let w = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
        v[k - 1] + w * (v[k] - v[k - 1])
    };
    times
        .windows(2)
        .map(|w| {
            let d0 = (interp(ta, a, w[0]) - interp(tb, b, w[0])).abs();
            let d1 = (interp(ta, a, w[1]) - interp(tb, b, w[1])).abs();
            0.5 * (w[1] - w[0]) * (d0 + d1)
        })
        .sum()
}

// ---------------------------------------------------------------------------
// Entropy inequality

/// One evaluation of the entropy inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyRow {
    pub c: f64,
    pub phi_index: usize,
    pub residual: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

/// Tolerance multiplier `κ` in `κ (Δx + Δt_q) scale(φ)`.
pub const ENTROPY_KAPPA: f64 = 10.0;

/// `count` Kruzhkov constants evenly spanning `[−A, A]`, `A = max |u|`.
pub fn kruzhkov_constants(traj: &Trajectory, count: usize) -> Vec<f64> {
    let a = max_amplitude(traj);
    if count == 1 {
        return vec![0.0];
    }
    (0..count).map(|j| -a + 2.0 * a * j as f64 / (count - 1) as f64).collect()
}

/// Test functions tiling `[0, T] × [0, L/2]` with `(kt, kx)` bumps.
pub fn default_family(traj: &Trajectory, counts: (usize, usize)) -> Result<Vec<TestFunction>> {
    let rect = Rect { t0: 0.0, t1: traj.final_state().t, x0: 0.0, x1: 0.5 * traj.config.grid.length() };
    make_bump_family(rect, counts)
}

/// Residuals over every `(c, φ)` pair, evaluated in parallel; rows are ordered
/// by `c` then by `φ`.
pub fn entropy_table(traj: &Trajectory, cs: &[f64], family: &[TestFunction], kappa: f64) -> Result<Vec<EntropyRow>> {
    let trace = extract_trace(traj);
    let amp = max_amplitude(traj).max(cs.iter().fold(0.0, |m: f64, c| m.max(c.abs())));
    let tols: Vec<f64> = family.iter().map(|phi| entropy_tolerance(traj, phi, amp, kappa)).collect();
    let jobs: Vec<(f64, usize)> = cs.iter().flat_map(|&c| (0..family.len()).map(move |k| (c, k))).collect();
    jobs.par_iter()
        .map(|&(c, k)| {
            let r = entropy_residual(traj, &EntropyPair::new(c), &family[k], &trace)?;
            let verdict = if r >= -tols[k] { Verdict::Pass } else { Verdict::Fail };
            Ok(EntropyRow { c, phi_index: k, residual: r, tolerance: tols[k], verdict })
        })
        .collect()
}

/// Collapses an entropy table into one record: the worst `−residual/tol`
/// against 1.
pub fn entropy_record(rows: &[EntropyRow]) -> CheckRecord {
    let worst = rows.iter().map(|r| -r.residual / r.tolerance).fold(f64::NEG_INFINITY, f64::max);
    let mut rec = CheckRecord::against_bound("entropy-inequality", tags::ENTROPY, worst, 1.0, 0.0);
    if rows.iter().any(|r| r.verdict == Verdict::Fail) {
        rec.verdict = Verdict::Fail;
    }
    rec
}

/// Sampled exact solution of `∂t u + ∂x(u³) = 0` with the single shock
/// `u = left` for `x < x₀ + s t`, `right` beyond, `s = (l³ − r³)/(l − r)`,
/// fed by `g ≡ left`. Stored states have `P ≡ 0` and the source is marked
/// off, so the entropy checker sees the pure flux problem.
pub fn exact_shock_trajectory(
    length: f64,
    cells: usize,
    final_time: f64,
    levels: usize,
    left: f64,
    right: f64,
    x0: f64,
) -> Result<Trajectory> {
    if !(left > right) {
        return invalid_arg("an admissible shock of the cubic flux needs left > right");
    }
    let grid = make_uniform_grid(length, cells)?;
    let speed = (left.powi(3) - right.powi(3)) / (left - right);
    let times: Vec<f64> = (0..=levels).map(|j| final_time * j as f64 / levels as f64).collect();
    let mut config = SolverConfig::new(0.0, grid, final_time, 1.0, SchemeKind::Explicit, times.clone())?;
    config.terms.source = false;
    config.mean_projection = false;
    config.allow_nonzero_mean = true;
    let state = |t: f64| -> Result<State> {
        let front = x0 + speed * t;
        let u = Field::from_fn(grid, |x| if x < front { left } else { right })?;
        Ok(State { t, u, p: Field::zeros(grid), boundary_gradient: 0.0 })
    };
    let states = times.iter().map(|&t| state(t)).collect::<Result<Vec<_>>>()?;
    let series = times
        .iter()
        .map(|&t| StepSample {
            t,
            g: left,
            dudx0: 0.0,
            u1: left,
            grad_l2_sq: 0.0,
            mean_multiplier: 0.0,
            upwind_dissipation: 0.0,
        })
        .collect();
    Ok(Trajectory {
        config,
        initial: states[0].clone(),
        snapshots: states,
        boundary_series: series,
        step_log: vec![final_time / levels as f64; levels],
        boundary: BoundaryData::constant(left)?,
    })
}

/// Smallest `κ` for which every `(c, φ)` residual on `traj` clears
/// `−κ (Δx + Δt_q) scale(φ)`; zero when no residual is negative.
pub fn required_kappa(traj: &Trajectory, cs: &[f64], family: &[TestFunction]) -> Result<f64> {
    let rows = entropy_table(traj, cs, family, 1.0)?;
    Ok(rows.iter().map(|r| (-r.residual / r.tolerance).max(0.0)).fold(0.0, f64::max))
}

/// Position where `u` first drops through `level`, linearly interpolated.
pub fn front_position(u: &Field, level: f64) -> Option<f64> {
    let v = u.values();
    let g = u.grid();
    (1..v.len()).find(|&i| v[i - 1] >= level && v[i] < level).map(|i| {
        let w = (v[i - 1] - level) / (v[i - 1] - v[i]);
        g.x(i - 1) + w * g.dx()
    })
}

/// Scale of the entropy tolerance for one test function, exposed for reports.
pub fn entropy_scale(phi: &TestFunction, amp: f64) -> f64 {
    test_function_scale(phi, amp)
}
