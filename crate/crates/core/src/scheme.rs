//! Time integration of the viscous mixed problem
//!
//! ```text
//! ∂t u + 3u² ∂x u = P + ε ∂xx u,   ∂x P = u,   P(t,0) = 0,
//! u(t,0) = g(t),   u(t,L) = 0,     u(0,x) = u₀(x)
//! ```
//!
//! on the truncated half-line. Advection is written in conservative form
//! `∂x(u³)` and discretized with left-biased upwind differences, which is
//! legitimate because `f'(u) = 3u² ≥ 0`. The IMEX variant treats diffusion
//! with backward Euler (one tridiagonal solve per step); the explicit variant
//! is forward Euler on every term and carries the diffusive CFL restriction.
//!
//! On a finite interval the zero-mean property of the half-line problem is
//! not self-sustaining: the far field reacts to `P(t,L) = ∫u` and the mean
//! drifts by O(‖u₀‖₁) within unit time. With [`SolverConfig::mean_projection`]
//! enabled (the default) every step subtracts a spatially uniform multiplier
//! from the interior nodes so that the trapezoidal mean stays exactly zero.
//! The multiplier is L²-orthogonal to a zero-mean field, so the L² energy
//! balance is untouched; its per-step value is recorded in the trajectory.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result, SpeError};
use crate::field::{l2_squared, lp_norm, mean, Field, Grid, Norm};
use crate::nonlocal::cumulative_primitive;
use crate::tridiag::thomas_solve;

/// Wave-speed floor for `stable_dt`.
pub const SPEED_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Imex,
    Explicit,
}

/// Which terms of the right-hand side participate. All on in production;
/// individual terms are switched off by tests (pure diffusion, pure upwind).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Terms {
    pub advection: bool,
    pub source: bool,
    pub diffusion: bool,
}

impl Default for Terms {
    fn default() -> Self {
        Terms { advection: true, source: true, diffusion: true }
    }
}

/// Handling of a mismatch between `u₀(0)` and `g(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatPolicy {
    pub strict: bool,
    pub tolerance: f64,
    /// Duration over which `g` is blended in from `u₀(0)` when not strict.
    pub ramp_time: f64,
}

impl Default for CompatPolicy {
    fn default() -> Self {
        CompatPolicy { strict: false, tolerance: 1e-12, ramp_time: 0.02 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub grid: Grid,
    pub final_time: f64,
    pub cfl_safety: f64,
    pub scheme: SchemeKind,
    pub snapshot_times: Vec<f64>,
    pub terms: Terms,
    /// Keep the trapezoidal mean at zero with a uniform multiplier.
    pub mean_projection: bool,
    /// Skip the zero-mean precondition (shock validation data).
    pub allow_nonzero_mean: bool,
    pub compat: CompatPolicy,
    /// `max |u|` above which a step is reported as blow-up.
    pub blowup_threshold: f64,
}

impl SolverConfig {
    pub fn new(
        epsilon: f64,
        grid: Grid,
        final_time: f64,
        cfl_safety: f64,
        scheme: SchemeKind,
        snapshot_times: Vec<f64>,
    ) -> Result<SolverConfig> {
        let cfg = SolverConfig {
            epsilon,
            grid,
            final_time,
            cfl_safety,
            scheme,
            snapshot_times,
            terms: Terms::default(),
            mean_projection: true,
            allow_nonzero_mean: false,
            compat: CompatPolicy::default(),
            blowup_threshold: 1e6,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return invalid_arg(format!("viscosity must be finite and non-negative, got {}", self.epsilon));
        }
        if self.epsilon == 0.0 && self.scheme == SchemeKind::Imex && self.terms.diffusion {
            return invalid_arg("epsilon = 0 requires the fully-explicit scheme");
        }
        if !(self.final_time.is_finite() && self.final_time > 0.0) {
            return invalid_arg(format!("final time must be positive, got {}", self.final_time));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return invalid_arg(format!("cfl_safety must lie in (0, 1], got {}", self.cfl_safety));
        }
        if self.snapshot_times.iter().any(|&t| !(t >= 0.0 && t <= self.final_time)) {
            return invalid_arg("snapshot times must lie in [0, T]");
        }
        if self.snapshot_times.windows(2).any(|w| w[1] <= w[0]) {
            return invalid_arg("snapshot times must be strictly increasing");
        }
        if self.mean_projection && self.allow_nonzero_mean {
            return invalid_arg("mean projection cannot be combined with non-zero-mean data");
        }
        if !(self.blowup_threshold > 0.0) {
            return invalid_arg("blow-up threshold must be positive");
        }
        Ok(())
    }

    fn diffusion_active(&self) -> bool {
        self.terms.diffusion && self.epsilon > 0.0
    }
}

type BoundaryFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Dirichlet datum `g` at `x = 0` together with its declared sup bound.
#[derive(Clone)]
pub struct BoundaryData {
    g: Arc<BoundaryFn>,
    sup_bound: f64,
}

impl fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryData").field("sup_bound", &self.sup_bound).finish_non_exhaustive()
    }
}

impl BoundaryData {
    pub fn new(sup_bound: f64, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<BoundaryData> {
        if !(sup_bound.is_finite() && sup_bound >= 0.0) {
            return invalid_arg(format!("boundary sup bound must be finite, got {sup_bound}"));
        }
        Ok(BoundaryData { g: Arc::new(g), sup_bound })
    }

    pub fn zero() -> BoundaryData {
        BoundaryData { g: Arc::new(|_| 0.0), sup_bound: 0.0 }
    }

    pub fn constant(a: f64) -> Result<BoundaryData> {
        BoundaryData::new(a.abs(), move |_| a)
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    /// Evaluates `g(t)`, checking it against the declared bound.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let v = (self.g)(t);
        if !v.is_finite() || v.abs() > self.sup_bound * (1.0 + 1e-12) + 1e-300 {
            return Err(SpeError::InvalidData(format!(
                "g({t}) = {v} exceeds the declared bound {}",
                self.sup_bound
            )));
        }
        Ok(v)
    }

    fn ramped(&self, start: f64, ramp_time: f64) -> BoundaryData {
        let inner = self.g.clone();
        BoundaryData {
            g: Arc::new(move |t| {
                let w = if ramp_time > 0.0 { (t / ramp_time).min(1.0) } else { 1.0 };
                start + w * (inner(t) - start)
            }),
            sup_bound: self.sup_bound.max(start.abs()),
        }
    }
}

/// One time level: `u`, its synchronized primitive and `∂x u(t,0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: Field,
    pub p: Field,
    pub boundary_gradient: f64,
}

impl State {
    pub fn new(t: f64, u: Field) -> State {
        let p = cumulative_primitive(&u);
        let boundary_gradient = boundary_gradient(&u);
        State { t, u, p, boundary_gradient }
    }
}

/// One-sided three-point `∂x u(0)`.
pub fn boundary_gradient(u: &Field) -> f64 {
    let v = u.values();
    (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * u.grid().dx())
}

/// `‖∂x u‖₂²` with centered differences inside and one-sided three-point
/// differences at both ends.
pub fn gradient_l2_squared(u: &Field) -> f64 {
    let v = u.values();
    let n = v.len() - 1;
    let dx = u.grid().dx();
    let mut d = vec![0.0; n + 1];
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dx);
    d[n] = (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * dx);
    for i in 1..n {
        d[i] = (v[i + 1] - v[i - 1]) / (2.0 * dx);
    }
    l2_squared(&Field::from_raw(*u.grid(), d))
}

/// `Δx ∫ 3u² (∂x u)²` with one-sided differences and the larger of the two
/// cell-end speeds.
pub fn upwind_dissipation(u: &Field) -> f64 {
    u.values()
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            3.0 * (w[0] * w[0]).max(w[1] * w[1]) * d * d
        })
        .sum()
}

/// Per-step record: time, boundary datum, boundary gradient and the
/// quantities time-integrated by the diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSample {
    pub t: f64,
    pub g: f64,
    pub dudx0: f64,
    /// `u` at the first interior node, the numerical boundary trace.
    pub u1: f64,
    /// `‖∂x u(t)‖₂²`.
    pub grad_l2_sq: f64,
    /// Rate of the uniform zero-mean multiplier applied on the step ending at `t`.
    pub mean_multiplier: f64,
    /// `Δx ∫ 3u² (∂x u)²`, the L² dissipation rate of the upwind numerical viscosity.
    pub upwind_dissipation: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: SolverConfig,
    pub initial: State,
    pub snapshots: Vec<State>,
    /// One sample at `t = 0` and one after every accepted step.
    pub boundary_series: Vec<StepSample>,
    pub step_log: Vec<f64>,
    pub boundary: BoundaryData,
}

impl Trajectory {
    pub fn final_state(&self) -> &State {
        self.snapshots.last().unwrap_or(&self.initial)
    }

    /// The initial state followed by all snapshots after `t = 0`.
    pub fn states(&self) -> Vec<&State> {
        let mut out = vec![&self.initial];
        out.extend(self.snapshots.iter().filter(|s| s.t > 0.0));
        out
    }

    pub fn completed(&self) -> bool {
        (self.final_state().t - self.config.final_time).abs() <= 1e-12 * self.config.final_time.max(1.0)
    }
}

/// Discrete mollification of `u₀` (in space) and `g` (in time) with the
/// normalized kernel `(1 − s²)³` of the given half-width, followed by an exact
/// zero-mean re-projection of `u₀`. The norm dominations of the smoothed data
/// are checked before returning.
pub fn mollify_data(u0: &Field, g: &BoundaryData, width: f64) -> Result<(Field, BoundaryData)> {
    if !(width >= 0.0 && width.is_finite()) {
        return invalid_arg(format!("mollifier width must be non-negative, got {width}"));
    }
    let grid = *u0.grid();
    let half = (width / grid.dx()).floor() as usize;
    let (smoothed, g_out) = if half == 0 {
        (u0.clone(), g.clone())
    } else {
        let weights = kernel_weights(half);
        let v = u0.values();
        let n = v.len();
        let out: Vec<f64> = (0..n)
            .map(|i| {
                let mut s = 0.0;
                for (k, w) in weights.iter().enumerate() {
                    let j = i as isize + k as isize - half as isize;
                    if j >= 0 && (j as usize) < n {
                        s += w * v[j as usize];
                    }
                }
                s
            })
            .collect();
        let tw = time_kernel(width);
        let inner = g.g.clone();
        let g_out = BoundaryData {
            g: Arc::new(move |t| tw.iter().map(|&(s, w)| w * inner((t - s).max(0.0))).sum()),
            sup_bound: g.sup_bound,
        };
        (Field::from_raw(grid, out), g_out)
    };
    let projected = project_zero_mean(smoothed);

    let checks = [
        (Norm::Inf, "L∞"),
        (Norm::L2, "L²"),
        (Norm::L4, "L⁴"),
    ];
    for (p, name) in checks {
        let before = lp_norm(u0, p);
        let after = lp_norm(&projected, p);
        if after > before * (1.0 + 1e-12) + 1e-14 {
            return Err(SpeError::InvalidData(format!(
                "mollified datum increased the {name} norm ({before} -> {after})"
            )));
        }
    }
    Ok((projected, g_out))
}

fn kernel_weights(half: usize) -> Vec<f64> {
    let h = (half + 1) as f64;
    let raw: Vec<f64> = (0..=2 * half)
        .map(|k| {
            let s = (k as f64 - half as f64) / h;
            (1.0 - s * s).powi(3)
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

fn time_kernel(width: f64) -> Vec<(f64, f64)> {
    const HALF: usize = 16;
    kernel_weights(HALF)
        .into_iter()
        .enumerate()
        .map(|(k, w)| ((k as f64 - HALF as f64) / (HALF + 1) as f64 * width, w))
        .collect()
}

/// Subtracts a constant from the interior nodes so the trapezoidal mean is zero.
pub fn project_zero_mean(mut u: Field) -> Field {
    let m = mean(&u);
    if m != 0.0 {
        let n = u.grid().cells();
        let shift = m / (u.grid().dx() * (n - 1) as f64);
        for v in &mut u.values_mut()[1..n] {
            *v -= shift;
        }
    }
    u
}

/// Largest admissible step from `state`, capped at the time left to `T`.
pub fn stable_dt(state: &State, config: &SolverConfig) -> f64 {
    let dx = config.grid.dx();
    let mut dt = f64::INFINITY;
    if config.terms.advection {
        let umax = state.u.max_abs();
        dt = dx / (3.0 * umax * umax).max(SPEED_FLOOR);
    }
    if config.scheme == SchemeKind::Explicit && config.diffusion_active() {
        dt = dt.min(dx * dx / (2.0 * config.epsilon));
    }
    let dt = config.cfl_safety * dt;
    dt.min(config.final_time - state.t)
}

/// Node-wise left-upwind `∂x(u³)`; node 0 carries the Dirichlet datum and is
/// reported as zero.
pub fn upwind_flux_divergence(u: &Field) -> Field {
    let v = u.values();
    let dx = u.grid().dx();
    let mut out = vec![0.0; v.len()];
    for i in 1..v.len() {
        out[i] = (v[i].powi(3) - v[i - 1].powi(3)) / dx;
    }
    Field::from_raw(*u.grid(), out)
}

/// Advances one level with `Δt = stable_dt(state, config)`.
pub fn step(state: &State, config: &SolverConfig, g: &BoundaryData) -> Result<State> {
    let dt = stable_dt(state, config);
    advance(state, config, g, dt).map(|(s, _)| s)
}

/// Advances one level with a prescribed `Δt`.
pub fn advance(state: &State, config: &SolverConfig, g: &BoundaryData, dt: f64) -> Result<(State, StepSample)> {
    if !(state.t < config.final_time) {
        return invalid_arg(format!("state time {} is not before T = {}", state.t, config.final_time));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return invalid_arg(format!("time step must be positive, got {dt}"));
    }
    let grid = config.grid;
    let n = grid.cells();
    let dx = grid.dx();
    let u = state.u.values();
    let t_new = state.t + dt;
    let g_new = g.eval(t_new)?;

    let mut next = u.to_vec();
    if config.terms.advection {
        for i in 1..n {
            next[i] -= dt * (u[i].powi(3) - u[i - 1].powi(3)) / dx;
        }
    }
    if config.terms.source {
        let p = state.p.values();
        for i in 1..n {
            next[i] += dt * p[i];
        }
    }
    if config.diffusion_active() {
        let r = config.epsilon * dt / (dx * dx);
        match config.scheme {
            SchemeKind::Explicit => {
                for i in 1..n {
                    next[i] += r * (u[i + 1] - 2.0 * u[i] + u[i - 1]);
                }
            }
            SchemeKind::Imex => {
                let m = n - 1;
                let sub = vec![-r; m];
                let diag = vec![1.0 + 2.0 * r; m];
                let sup = vec![-r; m];
                let mut rhs = next[1..n].to_vec();
                rhs[0] += r * g_new;
                rhs[m - 1] += r * 0.0;
                thomas_solve(&sub, &diag, &sup, &mut rhs);
                next[1..n].copy_from_slice(&rhs);
            }
        }
    }
    next[0] = g_new;
    next[n] = 0.0;

    let mut multiplier = 0.0;
    if config.mean_projection {
        let f = Field::from_raw(grid, next);
        let m = mean(&f);
        let shift = m / (dx * (n - 1) as f64);
        next = f.into_values();
        if shift != 0.0 {
            for v in &mut next[1..n] {
                *v -= shift;
            }
        }
        multiplier = shift / dt;
    }

    if let Some(i) = next.iter().position(|v| !v.is_finite()) {
        return Err(SpeError::Blowup { t: t_new, reason: format!("non-finite value at node {i}") });
    }
    let umax = next.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if umax > config.blowup_threshold {
        return Err(SpeError::Blowup {
            t: t_new,
            reason: format!("max |u| = {umax:e} exceeds threshold {:e}", config.blowup_threshold),
        });
    }

    let new_state = State::new(t_new, Field::from_raw(grid, next));
    let sample = StepSample {
        t: t_new,
        g: g_new,
        dudx0: new_state.boundary_gradient,
        u1: new_state.u.values()[1],
        grad_l2_sq: gradient_l2_squared(&new_state.u),
        mean_multiplier: multiplier,
        upwind_dissipation: upwind_dissipation(&new_state.u),
    };
    Ok((new_state, sample))
}

/// Integrates from `u₀` to `T`, recording snapshots at the requested times.
/// Steps are shortened so that every snapshot time is hit exactly.
pub fn run(u0: &Field, g: &BoundaryData, config: &SolverConfig) -> Result<Trajectory> {
    config.validate()?;
    if u0.grid() != &config.grid {
        return invalid_arg("initial datum lives on a different grid than the solver");
    }
    if !u0.is_finite() {
        return Err(SpeError::InvalidData("initial datum has non-finite values".into()));
    }
    if !config.allow_nonzero_mean {
        let m = mean(u0);
        let l1 = lp_norm(u0, Norm::L1);
        if m.abs() > 1e-10 * l1 {
            return Err(SpeError::InvalidData(format!(
                "initial datum has mean {m:e}, not zero within 1e-10·‖u₀‖₁ = {:e}",
                1e-10 * l1
            )));
        }
    }
    let g0 = g.eval(0.0)?;
    let u00 = u0.values()[0];
    let boundary = if (u00 - g0).abs() > config.compat.tolerance {
        if config.compat.strict {
            return Err(SpeError::InvalidData(format!(
                "compatibility mismatch u₀(0) = {u00} vs g(0) = {g0}"
            )));
        }
        log::warn!(
            "u0(0) = {u00} differs from g(0) = {g0}; ramping g over {} time units",
            config.compat.ramp_time
        );
        g.ramped(u00, config.compat.ramp_time)
    } else {
        g.clone()
    };

    let initial = State::new(0.0, u0.clone());
    let mut boundary_series = vec![StepSample {
        t: 0.0,
        g: u00,
        dudx0: initial.boundary_gradient,
        u1: u0.values()[1],
        grad_l2_sq: gradient_l2_squared(u0),
        mean_multiplier: 0.0,
        upwind_dissipation: upwind_dissipation(u0),
    }];
    let mut snapshots = Vec::with_capacity(config.snapshot_times.len());
    let mut pending = config.snapshot_times.iter().copied().peekable();
    while let Some(&t) = pending.peek() {
        if t > 0.0 {
            break;
        }
        snapshots.push(initial.clone());
        pending.next();
    }

    let mut step_log = Vec::new();
    let mut state = initial.clone();
    let tol = 1e-13 * config.final_time.max(1.0);
    while state.t < config.final_time - tol {
        let mut dt = stable_dt(&state, config);
        if let Some(&ts) = pending.peek() {
            if ts - state.t < dt {
                dt = ts - state.t;
            }
        }
        let (mut next, sample) = advance(&state, config, &boundary, dt)?;
        if config.final_time - next.t <= tol {
            next.t = config.final_time;
        }
        step_log.push(dt);
        boundary_series.push(StepSample { t: next.t, ..sample });
        state = next;
        while let Some(&ts) = pending.peek() {
            if ts <= state.t + tol {
                snapshots.push(state.clone());
                pending.next();
            } else {
                break;
            }
        }
    }
    if snapshots.last().map_or(true, |s| s.t < state.t) && config.snapshot_times.is_empty() {
        snapshots.push(state);
    }
    Ok(Trajectory { config: config.clone(), initial, snapshots, boundary_series, step_log, boundary })
}
