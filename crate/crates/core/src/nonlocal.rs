//! Running primitives `P = ∫₀ˣ u` and `F = ∫₀ˣ P` and the far-field
//! identities they satisfy along viscous solutions.

use crate::field::Field;

/// `P` and its own primitive `F`, both pinned to zero at `x = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitivePair {
    pub p: Field,
    pub f: Field,
}

impl PrimitivePair {
    pub fn of(u: &Field) -> PrimitivePair {
        let p = cumulative_primitive(u);
        let f = second_primitive(&p);
        PrimitivePair { p, f }
    }
}

/// Running trapezoidal integral of `u` from 0; `P(0) = 0` exactly.
pub fn cumulative_primitive(u: &Field) -> Field {
    let g = *u.grid();
    let half_dx = 0.5 * g.dx();
    let v = u.values();
    let mut out = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in v.windows(2) {
        acc += half_dx * (w[0] + w[1]);
        out.push(acc);
    }
    Field::from_raw(g, out)
}

pub fn second_primitive(p: &Field) -> Field {
    cumulative_primitive(p)
}

/// `P(L)`, the truncated stand-in for `lim_{x→∞} P`.
pub fn far_field_p(p: &Field) -> f64 {
    *p.values().last().expect("grid has at least three nodes")
}

/// Inputs for the far-field identity `F(∞) = ε ∂ₓu(t,0) − g(t)³`.
#[derive(Debug, Clone, Copy)]
pub struct FarFieldSample<'a> {
    pub f: &'a Field,
    pub epsilon: f64,
    pub g: f64,
    pub boundary_gradient: f64,
}

/// `|F(L) − (ε ∂ₓu(t,0) − g³)|`.
pub fn far_field_f_identity_residual(sample: &FarFieldSample<'_>) -> f64 {
    let target = sample.epsilon * sample.boundary_gradient - sample.g.powi(3);
    (far_field_p(sample.f) - target).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_uniform_grid, mean, Field};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn primitives_of_zero_and_constants() {
        let g = make_uniform_grid(1.0, 8).unwrap();
        let z = Field::zeros(g);
        assert!(cumulative_primitive(&z).values().iter().all(|&v| v == 0.0));
        assert!(second_primitive(&z).values().iter().all(|&v| v == 0.0));
        let p = cumulative_primitive(&Field::constant(g, 1.0));
        for (i, v) in p.values().iter().enumerate() {
            assert!((v - g.x(i)).abs() < 1e-15);
        }
        let lin = Field::from_fn(g, |x| x).unwrap();
        let f = second_primitive(&lin);
        for (i, v) in f.values().iter().enumerate() {
            assert!((v - g.x(i).powi(2) / 2.0).abs() < 1e-15);
        }
        assert_eq!(far_field_p(&p), 1.0);
    }

    #[test]
    fn primitive_of_sine_matches_antiderivative() {
        let g = make_uniform_grid(PI, 1000).unwrap();
        let u = Field::from_fn(g, f64::sin).unwrap();
        let p = cumulative_primitive(&u);
        let err = (0..g.node_count())
            .map(|i| (p.values()[i] - (1.0 - g.x(i).cos())).abs())
            .fold(0.0, f64::max);
        assert!(err < 5e-6, "sup error {err}");
        let pf = Field::from_fn(g, |x| 1.0 - x.cos()).unwrap();
        let f = second_primitive(&pf);
        let err = (0..g.node_count())
            .map(|i| (f.values()[i] - (g.x(i) - g.x(i).sin())).abs())
            .fold(0.0, f64::max);
        assert!(err < 5e-6, "sup error {err}");
    }

    #[test]
    fn far_field_p_is_the_trapezoid_mean() {
        let g = make_uniform_grid(1.0, 1000).unwrap();
        let u = Field::from_fn(g, |x| (PI * x).sin()).unwrap();
        let p = cumulative_primitive(&u);
        assert!((far_field_p(&p) - 2.0 / PI).abs() < 1e-5);
        assert!((far_field_p(&p) - mean(&u)).abs() < 1e-14);
    }

    #[test]
    fn zero_mean_preset_has_vanishing_far_field() {
        let g = make_uniform_grid(10.0, 2000).unwrap();
        let u = crate::presets::preset_initial(
            &crate::presets::InitialPreset::BumpDerivative { a: 1.0, x0: 2.0, sigma: 1.0 },
            g,
        )
        .unwrap();
        assert!(far_field_p(&cumulative_primitive(&u)).abs() <= 1e-12);
    }

    #[test]
    fn identity_residual_vanishes_on_rest_state() {
        let g = make_uniform_grid(1.0, 10).unwrap();
        let pair = PrimitivePair::of(&Field::zeros(g));
        let s = FarFieldSample { f: &pair.f, epsilon: 0.01, g: 0.0, boundary_gradient: 0.0 };
        assert_eq!(far_field_f_identity_residual(&s), 0.0);
        assert_eq!(pair.p.values()[0], 0.0);
        assert_eq!(pair.f.values()[0], 0.0);
    }

    fn arb_u() -> impl Strategy<Value = Field> {
        (3usize..60).prop_flat_map(|n| {
            prop::collection::vec(-3.0f64..3.0, n + 1)
                .prop_map(move |v| Field::new(make_uniform_grid(2.0, n).unwrap(), v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn discrete_lipschitz_bound(u in arb_u()) {
            let p = cumulative_primitive(&u);
            let m = u.max_abs();
            let g = u.grid();
            for i in 0..g.node_count() {
                for j in i + 1..g.node_count() {
                    let d = (p.values()[j] - p.values()[i]).abs();
                    prop_assert!(d <= m * (g.x(j) - g.x(i)) + g.dx() * m + 1e-12);
                }
            }
        }

        #[test]
        fn discrete_fundamental_theorem(u in arb_u()) {
            let p = cumulative_primitive(&u);
            let dx = u.grid().dx();
            for i in 0..u.grid().cells() {
                let lhs = (p.values()[i + 1] - p.values()[i]) / dx;
                let rhs = 0.5 * (u.values()[i] + u.values()[i + 1]);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()) + 1e-12 * p.max_abs() / dx);
            }
        }

        #[test]
        fn primitive_is_linear(u in arb_u(), a in -2.0f64..2.0) {
            let v = u.map(|x| x.sin());
            let lhs = cumulative_primitive(&u.combine(a, &v, 1.0).unwrap());
            let rhs = cumulative_primitive(&u).combine(a, &cumulative_primitive(&v), 1.0).unwrap();
            for (l, r) in lhs.values().iter().zip(rhs.values()) {
                prop_assert!((l - r).abs() < 1e-12);
            }
        }
    }
}
