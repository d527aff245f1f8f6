//! Initial and boundary data presets.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result, SpeError, Violation};
use crate::field::{Field, Grid};
use crate::scheme::{project_zero_mean, BoundaryData};
use crate::tags;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", content = "params", rename_all = "kebab-case")]
pub enum InitialPreset {
    /// Difference quotient of `a (1 − ((x − x0)/σ)²)³`.
    BumpDerivative { a: f64, x0: f64, sigma: f64 },
    /// `a sin(2πm(x − x0)/w)` on `[x0, x0 + w]`.
    SinePacket { a: f64, m: u32, x0: f64, w: f64 },
    /// Step `left` on `[0, jump)`, `right` beyond. Not zero-mean.
    RiemannTest { left: f64, right: f64, jump: f64 },
}

impl InitialPreset {
    /// Step data is exempt from the zero-mean assumption.
    pub fn is_conforming(&self) -> bool {
        !matches!(self, InitialPreset::RiemannTest { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", content = "params", rename_all = "kebab-case")]
pub enum BoundaryPreset {
    Zero,
    /// `a sin²(πt/τ)` for `t ≤ τ`, zero afterwards.
    Pulse { a: f64, tau: f64 },
    Constant { a: f64 },
    /// Marker for a datum without a finite sup bound; always rejected.
    Unbounded,
}

/// Compactly supported polynomial bump, zero outside `|x − x0| ≤ σ`.
pub fn poly_bump(x: f64, x0: f64, sigma: f64) -> f64 {
    let s = (x - x0) / sigma;
    if s.abs() <= 1.0 {
        let q = 1.0 - s * s;
        q * q * q
    } else {
        0.0
    }
}

fn check_support(lo: f64, hi: f64, grid: &Grid) -> Result<()> {
    let half = 0.5 * grid.length();
    if lo < 0.0 || hi > half + 1e-12 * grid.length() {
        return invalid_arg(format!(
            "preset support [{lo}, {hi}] exceeds [0, L/2] = [0, {half}]"
        ));
    }
    Ok(())
}

pub fn preset_initial(preset: &InitialPreset, grid: Grid) -> Result<Field> {
    let n = grid.cells();
    match *preset {
        InitialPreset::BumpDerivative { a, x0, sigma } => {
            if !(sigma > 0.0) || !a.is_finite() {
                return invalid_arg("bump-derivative needs sigma > 0 and finite amplitude");
            }
            check_support(x0 - sigma, x0 + sigma, &grid)?;
            let phi = |i: usize| a * poly_bump(grid.x(i), x0, sigma);
            let mut u = vec![0.0; n + 1];
            for (i, v) in u.iter_mut().enumerate().take(n).skip(1) {
                *v = (phi(i + 1) - phi(i - 1)) / (2.0 * grid.dx());
            }
            Ok(project_zero_mean(Field::new(grid, u)?))
        }
        InitialPreset::SinePacket { a, m, x0, w } => {
            if !(w > 0.0) || m == 0 || !a.is_finite() {
                return invalid_arg("sine-packet needs w > 0, m >= 1 and finite amplitude");
            }
            check_support(x0, x0 + w, &grid)?;
            let f = Field::from_fn(grid, |x| {
                if x >= x0 && x <= x0 + w {
                    a * (2.0 * PI * m as f64 * (x - x0) / w).sin()
                } else {
                    0.0
                }
            })?;
            Ok(project_zero_mean(f))
        }
        InitialPreset::RiemannTest { left, right, jump } => {
            if right != 0.0 {
                check_support(0.0, grid.length(), &grid)?;
            }
            check_support(0.0, jump, &grid)?;
            Field::from_fn(grid, |x| if x < jump { left } else { right })
        }
    }
}

pub fn preset_boundary(preset: &BoundaryPreset) -> Result<BoundaryData> {
    match *preset {
        BoundaryPreset::Zero => Ok(BoundaryData::zero()),
        BoundaryPreset::Pulse { a, tau } => {
            if !(tau > 0.0) {
                return invalid_arg("pulse duration must be positive");
            }
            BoundaryData::new(a.abs(), move |t| {
                if (0.0..=tau).contains(&t) {
                    let s = (PI * t / tau).sin();
                    a * s * s
                } else {
                    0.0
                }
            })
        }
        BoundaryPreset::Constant { a } => BoundaryData::constant(a),
        BoundaryPreset::Unbounded => Err(SpeError::AssumptionViolation(vec![Violation {
            condition: tags::BOUNDARY_BOUNDED,
            message: "boundary datum has no finite sup bound; g must be essentially bounded".into(),
        }])),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_uniform_grid, mean};
    use crate::nonlocal::cumulative_primitive;

    #[test]
    fn bump_derivative_has_zero_mean_and_primitive_near_bump() {
        let g = make_uniform_grid(10.0, 2000).unwrap();
        let u = preset_initial(&InitialPreset::BumpDerivative { a: 1.0, x0: 2.0, sigma: 1.0 }, g).unwrap();
        assert!(mean(&u).abs() <= 1e-14 * crate::field::lp_norm(&u, crate::field::Norm::L1));
        assert!(u.max_abs().is_finite() && u.max_abs() < 2.0);
        let p = cumulative_primitive(&u);
        let peak = p.values().iter().cloned().fold(f64::MIN, f64::max);
        assert!((peak - 1.0).abs() < 1e-3, "peak {peak}");
    }

    #[test]
    fn sine_packet_is_reprojected() {
        let g = make_uniform_grid(10.0, 1000).unwrap();
        let u = preset_initial(&InitialPreset::SinePacket { a: 1.0, m: 2, x0: 1.0, w: 2.0 }, g).unwrap();
        assert!(mean(&u).abs() <= 1e-12);
    }

    #[test]
    fn riemann_step() {
        let g = make_uniform_grid(2.0, 20).unwrap();
        let u = preset_initial(&InitialPreset::RiemannTest { left: 1.0, right: 0.0, jump: 0.5 }, g).unwrap();
        assert_eq!(u.values()[4], 1.0);
        assert_eq!(u.values()[5], 0.0);
        assert!(!InitialPreset::RiemannTest { left: 1.0, right: 0.0, jump: 0.5 }.is_conforming());
    }

    #[test]
    fn support_beyond_half_domain_is_rejected() {
        let g = make_uniform_grid(4.0, 100).unwrap();
        let e = preset_initial(&InitialPreset::BumpDerivative { a: 1.0, x0: 2.0, sigma: 1.0 }, g);
        assert!(matches!(e, Err(SpeError::InvalidArgument(_))));
    }

    #[test]
    fn boundary_presets() {
        let z = preset_boundary(&BoundaryPreset::Zero).unwrap();
        assert_eq!(z.eval(3.0).unwrap(), 0.0);
        assert_eq!(z.sup_bound(), 0.0);
        let p = preset_boundary(&BoundaryPreset::Pulse { a: 0.5, tau: 1.0 }).unwrap();
        assert!((p.eval(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(p.eval(2.0).unwrap(), 0.0);
        assert_eq!(p.sup_bound(), 0.5);
        let c = preset_boundary(&BoundaryPreset::Constant { a: -0.3 }).unwrap();
        assert_eq!(c.eval(7.0).unwrap(), -0.3);
        assert!(matches!(
            preset_boundary(&BoundaryPreset::Unbounded),
            Err(SpeError::AssumptionViolation(_))
        ));
    }
}
