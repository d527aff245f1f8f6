//! Kruzhkov entropy pairs and the weak entropy inequality with initial and
//! boundary-trace terms.
//!
//! For a nonnegative test function `φ` and a constant `c` the evaluated
//! left-hand side is
//!
//! ```text
//! ∬ (|u−c| ∂tφ + sgn(u−c)(u³−c³) ∂xφ) + ∬ sgn(u−c) P φ
//!   + ∫ sgn(g−c)((u^τ)³ − c³) φ(t,0) dt + ∫ |u₀−c| φ(0,x) dx
//! ```
//!
//! which is non-negative for an entropy solution. Integrals are space-time
//! trapezoid sums over the stored time levels and the grid nodes.

use crate::error::{invalid_arg, Result};
use crate::field::Field;
use crate::scheme::Trajectory;

/// `sgn` with `sgn(0) = 0`.
pub fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `sgn(u − c)(u³ − c³)`.
pub fn kruzhkov_flux(u: f64, c: f64) -> f64 {
    sgn(u - c) * (u * u * u - c * c * c)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyPair {
    pub c: f64,
}

impl EntropyPair {
    pub fn new(c: f64) -> Self {
        EntropyPair { c }
    }

    pub fn eta(&self, u: f64) -> f64 {
        (u - self.c).abs()
    }

    pub fn q(&self, u: f64) -> f64 {
        kruzhkov_flux(u, self.c)
    }
}

/// Axis-aligned rectangle `[t0, t1] × [x0, x1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub x1: f64,
}

/// One-dimensional `(1 − s²)³` bump centred at `center` with half-width `half`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump1d {
    pub center: f64,
    pub half: f64,
}

impl Bump1d {
    pub fn value(&self, y: f64) -> f64 {
        let s = (y - self.center) / self.half;
        if s.abs() >= 1.0 {
            return 0.0;
        }
        let q = 1.0 - s * s;
        q * q * q
    }

    pub fn derivative(&self, y: f64) -> f64 {
        let s = (y - self.center) / self.half;
        if s.abs() >= 1.0 {
            return 0.0;
        }
        let q = 1.0 - s * s;
        -6.0 * s * q * q / self.half
    }

    fn lo(&self) -> f64 {
        self.center - self.half
    }

    fn hi(&self) -> f64 {
        self.center + self.half
    }
}

/// Nonnegative combination of separable bumps `ψ_T(t) ψ_X(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    terms: Vec<(f64, Bump1d, Bump1d)>,
}

impl TestFunction {
    pub fn separable(time: Bump1d, space: Bump1d) -> TestFunction {
        TestFunction { terms: vec![(1.0, time, space)] }
    }

    /// `α self + β other` for `α, β ≥ 0`.
    pub fn combine(&self, alpha: f64, other: &TestFunction, beta: f64) -> Result<TestFunction> {
        if alpha < 0.0 || beta < 0.0 {
            return invalid_arg("test functions combine with nonnegative weights only");
        }
        let mut terms: Vec<_> = self.terms.iter().map(|&(w, a, b)| (alpha * w, a, b)).collect();
        terms.extend(other.terms.iter().map(|&(w, a, b)| (beta * w, a, b)));
        Ok(TestFunction { terms })
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        self.terms.iter().map(|(w, a, b)| w * a.value(t) * b.value(x)).sum()
    }

    pub fn dt(&self, t: f64, x: f64) -> f64 {
        self.terms.iter().map(|(w, a, b)| w * a.derivative(t) * b.value(x)).sum()
    }

    pub fn dx(&self, t: f64, x: f64) -> f64 {
        self.terms.iter().map(|(w, a, b)| w * a.value(t) * b.derivative(x)).sum()
    }

    /// Bounding rectangle of the support intersected with `t, x ≥ 0`.
    pub fn support(&self) -> Rect {
        let mut r = Rect { t0: f64::INFINITY, t1: f64::NEG_INFINITY, x0: f64::INFINITY, x1: f64::NEG_INFINITY };
        for (_, a, b) in &self.terms {
            r.t0 = r.t0.min(a.lo().max(0.0));
            r.t1 = r.t1.max(a.hi());
            r.x0 = r.x0.min(b.lo().max(0.0));
            r.x1 = r.x1.max(b.hi());
        }
        r
    }
}

/// `kt · kx` tensor bumps tiling `domain`. Along each axis the members are
/// centred at `lo + j h`, `h = (hi − lo)/k`, with half-width `h`, so the first
/// member is non-zero on the `lo` edge; a single member is centred in the
/// interval instead.
pub fn make_bump_family(domain: Rect, counts: (usize, usize)) -> Result<Vec<TestFunction>> {
    let (kt, kx) = counts;
    if kt == 0 || kx == 0 {
        return invalid_arg("bump family counts must be at least 1");
    }
    if !(domain.t1 > domain.t0 && domain.x1 > domain.x0) {
        return invalid_arg("bump family domain is empty");
    }
    let axis = |lo: f64, hi: f64, k: usize| -> Vec<Bump1d> {
        if k == 1 {
            return vec![Bump1d { center: 0.5 * (lo + hi), half: 0.5 * (hi - lo) }];
        }
        let h = (hi - lo) / k as f64;
        (0..k).map(|j| Bump1d { center: lo + j as f64 * h, half: h }).collect()
    };
    let ts = axis(domain.t0, domain.t1, kt);
    let xs = axis(domain.x0, domain.x1, kx);
    Ok(ts.iter().flat_map(|&a| xs.iter().map(move |&b| TestFunction::separable(a, b))).collect())
}

/// Numerical boundary trace sampled at every accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub times: Vec<f64>,
    pub u_trace: Vec<f64>,
}

/// Trace `u^τ(t)` read at the first interior node `x₁ = Δx`; the Dirichlet node
/// only repeats `g`.
pub fn extract_trace(traj: &Trajectory) -> TraceRecord {
    TraceRecord {
        times: traj.boundary_series.iter().map(|s| s.t).collect(),
        u_trace: traj.boundary_series.iter().map(|s| s.u1).collect(),
    }
}

/// Individual contributions of the entropy inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualTerms {
    pub interior: f64,
    pub source: f64,
    pub boundary: f64,
    pub initial: f64,
}

impl ResidualTerms {
    pub fn total(&self) -> f64 {
        self.interior + self.source + self.boundary + self.initial
    }
}

fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let m = nodes.len();
    let mut w = vec![0.0; m];
    for k in 0..m.saturating_sub(1) {
        let h = nodes[k + 1] - nodes[k];
        w[k] += 0.5 * h;
        w[k + 1] += 0.5 * h;
    }
    w
}

fn check_domain(traj: &Trajectory, phi: &TestFunction) -> Result<()> {
    let s = phi.support();
    let t_end = traj.final_state().t;
    let l = traj.config.grid.length();
    if s.t1 > t_end * (1.0 + 1e-12) || s.x1 > l * (1.0 + 1e-12) {
        return invalid_arg(format!(
            "test function support [{}, {}] x [{}, {}] exceeds computed domain [0, {t_end}] x [0, {l}]",
            s.t0, s.t1, s.x0, s.x1
        ));
    }
    Ok(())
}

/// Space-time integrals of `a(u) ∂tφ + b(u) ∂xφ + s(u, P) φ` over the stored
/// time levels, restricted to the support of `φ`.
fn interior_integrals(
    traj: &Trajectory,
    phi: &TestFunction,
    a: impl Fn(f64) -> f64,
    b: impl Fn(f64) -> f64,
    s: impl Fn(f64, f64) -> f64,
) -> (f64, f64) {
    let states = traj.states();
    let times: Vec<f64> = states.iter().map(|st| st.t).collect();
    let wt = trapezoid_weights(&times);
    let grid = traj.config.grid;
    let sup = phi.support();
    let i_lo = ((sup.x0 / grid.dx()).floor() as usize).min(grid.cells());
    let i_hi = ((sup.x1 / grid.dx()).ceil() as usize).min(grid.cells());
    let mut flux_part = 0.0;
    let mut source_part = 0.0;
    for (k, st) in states.iter().enumerate() {
        let t = st.t;
        if t < sup.t0 || t > sup.t1 || wt[k] == 0.0 {
            continue;
        }
        let u = st.u.values();
        let p = st.p.values();
        let mut fsum = 0.0;
        let mut ssum = 0.0;
        for i in i_lo..=i_hi {
            let x = grid.x(i);
            let w = grid.weight(i);
            fsum += w * (a(u[i]) * phi.dt(t, x) + b(u[i]) * phi.dx(t, x));
            ssum += w * s(u[i], p[i]) * phi.value(t, x);
        }
        flux_part += wt[k] * fsum;
        source_part += wt[k] * ssum;
    }
    (flux_part, source_part)
}

fn boundary_integral(
    traj: &Trajectory,
    phi: &TestFunction,
    trace: &TraceRecord,
    integrand: impl Fn(f64, f64) -> f64,
) -> Result<f64> {
    let wt = trapezoid_weights(&trace.times);
    let mut sum = 0.0;
    for (k, (&t, &tau)) in trace.times.iter().zip(&trace.u_trace).enumerate() {
        let ph = phi.value(t, 0.0);
        if ph != 0.0 {
            let g = traj.boundary.eval(t)?;
            sum += wt[k] * integrand(g, tau) * ph;
        }
    }
    Ok(sum)
}

fn initial_integral(u0: &Field, phi: &TestFunction, h: impl Fn(f64) -> f64) -> f64 {
    let g = u0.grid();
    u0.values().iter().enumerate().map(|(i, &u)| g.weight(i) * h(u) * phi.value(0.0, g.x(i))).sum()
}

/// All four contributions of the entropy inequality for one `(c, φ)`.
pub fn entropy_residual_terms(
    traj: &Trajectory,
    pair: &EntropyPair,
    phi: &TestFunction,
    trace: &TraceRecord,
) -> Result<ResidualTerms> {
    check_domain(traj, phi)?;
    let c = pair.c;
    let on = if traj.config.terms.source { 1.0 } else { 0.0 };
    let (interior, source) =
        interior_integrals(traj, phi, |u| pair.eta(u), |u| pair.q(u), |u, p| on * sgn(u - c) * p);
    let boundary = boundary_integral(traj, phi, trace, |g, tau| sgn(g - c) * (tau * tau * tau - c * c * c))?;
    let initial = initial_integral(&traj.initial.u, phi, |u| pair.eta(u));
    Ok(ResidualTerms { interior, source, boundary, initial })
}

pub fn entropy_residual(
    traj: &Trajectory,
    pair: &EntropyPair,
    phi: &TestFunction,
    trace: &TraceRecord,
) -> Result<f64> {
    entropy_residual_terms(traj, pair, phi, trace).map(|r| r.total())
}

/// Weak-form residual of the integro-differential equation itself
/// (the source term is dropped when the run disabled it):
/// `∬ (u ∂tφ + u³ ∂xφ + P φ) + ∫ (u^τ)³ φ(t,0) + ∫ u₀ φ(0,x)`.
pub fn weak_form_residual(traj: &Trajectory, phi: &TestFunction, trace: &TraceRecord) -> Result<f64> {
    check_domain(traj, phi)?;
    let on = if traj.config.terms.source { 1.0 } else { 0.0 };
    let (flux, source) = interior_integrals(traj, phi, |u| u, |u| u * u * u, |_, p| on * p);
    let boundary = boundary_integral(traj, phi, trace, |_, tau| tau * tau * tau)?;
    let initial = initial_integral(&traj.initial.u, phi, |u| u);
    Ok(flux + source + boundary + initial)
}

/// Magnitude scale of one entropy evaluation: L¹ norms of `φ`, its
/// derivatives and its edge traces, weighted by the flux size at amplitude
/// `amp`.
pub fn test_function_scale(phi: &TestFunction, amp: f64) -> f64 {
    let s = phi.support();
    let m = 400;
    let ht = (s.t1 - s.t0) / m as f64;
    let hx = (s.x1 - s.x0) / m as f64;
    let mut area = 0.0;
    for a in 0..m {
        let t = s.t0 + (a as f64 + 0.5) * ht;
        for b in 0..m {
            let x = s.x0 + (b as f64 + 0.5) * hx;
            area += phi.value(t, x).abs() + phi.dt(t, x).abs() + phi.dx(t, x).abs();
        }
    }
    area *= ht * hx;
    let mut edges = 0.0;
    for a in 0..m {
        edges += phi.value(s.t0 + (a as f64 + 0.5) * ht, 0.0).abs() * ht;
        edges += phi.value(0.0, s.x0 + (a as f64 + 0.5) * hx).abs() * hx;
    }
    (1.0 + amp + amp.powi(3)) * (area + edges)
}

/// Largest time spacing of the quadrature levels used by the residual.
pub fn quadrature_dt(traj: &Trajectory) -> f64 {
    traj.states().windows(2).map(|w| w[1].t - w[0].t).fold(0.0, f64::max)
}

/// Residual tolerance `κ (Δx + Δt_q) scale(φ)`.
pub fn entropy_tolerance(traj: &Trajectory, phi: &TestFunction, amp: f64, kappa: f64) -> f64 {
    kappa * (traj.config.grid.dx() + quadrature_dt(traj)) * test_function_scale(phi, amp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_uniform_grid, Field};
    use crate::scheme::{BoundaryData, SchemeKind, SolverConfig, State, StepSample};
    use proptest::prelude::*;

    /// Synthetic trajectory holding `u ≡ k`, `g ≡ k`, `P ≡ 0` at 21 levels on
    /// `[0, 1] × [0, 2]`; the source is dropped so the state is an exact
    /// solution of the flux part alone.
    fn constant_traj(k: f64, n: usize) -> Trajectory {
        let grid = make_uniform_grid(2.0, n).unwrap();
        let times: Vec<f64> = (0..=20).map(|j| j as f64 / 20.0).collect();
        let mut config = SolverConfig::new(1e-2, grid, 1.0, 0.9, SchemeKind::Imex, times.clone()).unwrap();
        config.mean_projection = false;
        config.allow_nonzero_mean = true;
        let u = Field::constant(grid, k);
        let mk = |t: f64| State { t, u: u.clone(), p: Field::zeros(grid), boundary_gradient: 0.0 };
        let sample = |t: f64| StepSample { t, g: k, dudx0: 0.0, u1: k, grad_l2_sq: 0.0, mean_multiplier: 0.0, upwind_dissipation: 0.0 };
        Trajectory {
            config,
            initial: mk(0.0),
            snapshots: times.iter().map(|&t| mk(t)).collect(),
            boundary_series: times.iter().map(|&t| sample(t)).collect(),
            step_log: vec![0.05; 20],
            boundary: BoundaryData::constant(k).unwrap(),
        }
    }

    #[test]
    fn flux_cases() {
        assert_eq!(kruzhkov_flux(2.0, 0.0), 8.0);
        assert_eq!(kruzhkov_flux(1.3, 1.3), 0.0);
        assert_eq!(kruzhkov_flux(-1.0, 1.0), 2.0);
        assert_eq!(sgn(0.0), 0.0);
        let p = EntropyPair::new(0.5);
        assert_eq!(p.q(0.5), 0.0);
        assert_eq!(p.eta(1.5), 1.0);
    }

    proptest! {
        #[test]
        fn flux_symmetry_and_magnitude(u in -5.0f64..5.0, c in -5.0f64..5.0) {
            let q = kruzhkov_flux(u, c);
            prop_assert!((q - kruzhkov_flux(c, u)).abs() <= 1e-12 * (1.0 + q.abs()));
            prop_assert!((q.abs() - (u.powi(3) - c.powi(3)).abs()).abs() <= 1e-12 * (1.0 + q.abs()));
        }

        #[test]
        fn flux_derivative_is_three_u_squared_eta_prime(u in -3.0f64..3.0, c in -3.0f64..3.0) {
            prop_assume!((u - c).abs() > 1e-3);
            let h = 1e-6;
            let dq = (kruzhkov_flux(u + h, c) - kruzhkov_flux(u - h, c)) / (2.0 * h);
            prop_assert!((dq - 3.0 * u * u * sgn(u - c)).abs() < 1e-5 * (1.0 + u * u));
        }
    }

    #[test]
    fn single_bump_family() {
        let fam = make_bump_family(Rect { t0: 0.0, t1: 1.0, x0: 0.0, x1: 1.0 }, (1, 1)).unwrap();
        assert_eq!(fam.len(), 1);
        let phi = &fam[0];
        assert_eq!(phi.value(0.5, 0.5), 1.0);
        for a in 0..=20 {
            for b in 0..=20 {
                let v = phi.value(a as f64 / 20.0, b as f64 / 20.0);
                assert!((0.0..=1.0).contains(&v));
            }
        }
        assert!(make_bump_family(Rect { t0: 0.0, t1: 1.0, x0: 0.0, x1: 1.0 }, (0, 2)).is_err());
        let fam = make_bump_family(Rect { t0: 0.0, t1: 1.0, x0: 0.0, x1: 3.0 }, (3, 3)).unwrap();
        assert_eq!(fam.len(), 9);
        assert!(fam.iter().any(|f| f.value(0.0, 1.0) > 0.0));
        assert!(fam.iter().any(|f| f.value(0.2, 0.0) > 0.0));
        assert!(fam.iter().all(|f| f.support().t1 <= 1.0 + 1e-15 && f.support().x1 <= 3.0 + 1e-15));
    }

    #[test]
    fn bump_integral_matches_closed_form() {
        // ∫_{-1}^{1} (1 − s²)³ ds = 32/35.
        let phi = TestFunction::separable(Bump1d { center: 0.5, half: 0.4 }, Bump1d { center: 3.0, half: 1.5 });
        let exact = (32.0 / 35.0) * 0.4 * (32.0 / 35.0) * 1.5;
        let n = 2000;
        let grid = make_uniform_grid(6.0, n).unwrap();
        let tn = 2000;
        let mut sum = 0.0;
        for k in 0..=tn {
            let t = k as f64 / tn as f64;
            let wt = if k == 0 || k == tn { 0.5 } else { 1.0 } / tn as f64;
            for i in 0..=n {
                sum += wt * grid.weight(i) * phi.value(t, grid.x(i));
            }
        }
        assert!((sum - exact).abs() < 1e-6, "{sum} vs {exact}");

        // ∬ ∂tφ vanishes for members away from t = 0 and t = T.
        let mut dsum = 0.0;
        for k in 0..=tn {
            let t = k as f64 / tn as f64;
            let wt = if k == 0 || k == tn { 0.5 } else { 1.0 } / tn as f64;
            for i in 0..=n {
                dsum += wt * grid.weight(i) * phi.dt(t, grid.x(i));
            }
        }
        assert!(dsum.abs() < 1e-10);
    }

    #[test]
    fn residual_of_zero_solution() {
        let tr = constant_traj(0.0, 100);
        let trace = extract_trace(&tr);
        assert!(trace.u_trace.iter().all(|&v| v == 0.0));
        let fam = make_bump_family(Rect { t0: 0.0, t1: 1.0, x0: 0.0, x1: 1.0 }, (2, 2)).unwrap();
        for phi in &fam {
            assert_eq!(entropy_residual(&tr, &EntropyPair::new(0.0), phi, &trace).unwrap(), 0.0);
        }
        // c = 1 with an interior bump: ∬ (∂tφ + ∂xφ) = 0 up to quadrature.
        let phi = TestFunction::separable(Bump1d { center: 0.5, half: 0.3 }, Bump1d { center: 1.0, half: 0.5 });
        let r = entropy_residual(&tr, &EntropyPair::new(1.0), &phi, &trace).unwrap();
        assert!(r.abs() < 1e-3, "{r}");
    }

    #[test]
    fn residual_of_constant_state_vanishes() {
        let k = 0.7;
        let tr = constant_traj(k, 200);
        let trace = extract_trace(&tr);
        assert!(trace.u_trace.iter().all(|&v| v == k));
        let fam = make_bump_family(Rect { t0: 0.0, t1: 1.0, x0: 0.0, x1: 1.5 }, (3, 3)).unwrap();
        for c in [-1.0, 0.0, 0.3, 1.2] {
            for phi in &fam {
                let r = entropy_residual(&tr, &EntropyPair::new(c), phi, &trace).unwrap();
                assert!(r.abs() < 5e-3 * test_function_scale(phi, 1.2), "c={c} r={r}");
            }
        }
    }

    #[test]
    fn support_outside_domain_is_rejected() {
        let tr = constant_traj(0.0, 50);
        let trace = extract_trace(&tr);
        let phi = TestFunction::separable(Bump1d { center: 0.9, half: 0.5 }, Bump1d { center: 1.0, half: 0.5 });
        assert!(entropy_residual(&tr, &EntropyPair::new(0.0), &phi, &trace).is_err());
        let phi = TestFunction::separable(Bump1d { center: 0.5, half: 0.2 }, Bump1d { center: 1.8, half: 0.5 });
        assert!(entropy_residual(&tr, &EntropyPair::new(0.0), &phi, &trace).is_err());
    }
}
