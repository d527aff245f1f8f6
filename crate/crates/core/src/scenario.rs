//! Scenario files: JSON description of the grid, time window, viscosity,
//! scheme and data, resolved into solver inputs with every data assumption
//! checked.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result, SpeError, Violation};
use crate::field::{lp_norm, make_uniform_grid, mean, Field, Grid, Norm};
use crate::io::read_samples;
use crate::nonlocal::cumulative_primitive;
use crate::presets::{preset_boundary, preset_initial, BoundaryPreset, InitialPreset};
use crate::scheme::{BoundaryData, SchemeKind, SolverConfig};
use crate::tags;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "L")]
    pub length: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(rename = "T")]
    pub final_time: f64,
    pub cfl_safety: f64,
    #[serde(default)]
    pub snapshots: Vec<f64>,
}

/// Either a named preset or a path to a two-column CSV sample file
/// (`x,u` for the initial datum, `t,g` for the boundary datum). Relative
/// paths are resolved against the scenario file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataSource<P> {
    File { file: PathBuf },
    Preset(P),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSpec {
    pub k: f64,
    pub c2: f64,
}

/// Solver switches beyond the core fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsSpec {
    /// Keep the nonlocal source `P` in the equation.
    #[serde(default = "yes")]
    pub source: bool,
    #[serde(default = "yes")]
    pub mean_projection: bool,
}

fn yes() -> bool {
    true
}

impl Default for OptionsSpec {
    fn default() -> Self {
        OptionsSpec { source: true, mean_projection: true }
    }
}

/// Paired-run setup for the L¹ stability comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilitySpec {
    /// Window `R`.
    pub window: f64,
    /// Perturbation added to `u₀` for the comparison run.
    pub perturbation: InitialPreset,
    /// Perturbation supported beyond `R + C T`, for the propagation cone.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub far_perturbation: Option<InitialPreset>,
    /// Fixed `C`; `3M² + 1` when absent.
    #[serde(default, rename = "C", skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    /// Absolute noise floor for the cone check.
    #[serde(default = "default_noise")]
    pub noise: f64,
}

fn default_noise() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub grid: GridSpec,
    pub time: TimeSpec,
    pub epsilon: f64,
    pub scheme: SchemeKind,
    pub initial: DataSource<InitialPreset>,
    pub boundary: DataSource<BoundaryPreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<OptionsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilitySpec>,
}

/// A scenario turned into solver inputs.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub spec: ScenarioSpec,
    pub grid: Grid,
    pub u0: Field,
    pub g: BoundaryData,
    pub config: SolverConfig,
    /// False for shock-validation data exempt from the zero-mean assumption.
    pub conforming: bool,
}

impl ScenarioSpec {
    pub fn from_json(text: &str) -> Result<ScenarioSpec> {
        serde_json::from_str(text).map_err(|e| SpeError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Resolves data and configuration; file paths are taken relative to
    /// `base_dir`. Every violated data assumption is reported at once.
    pub fn resolve(&self, base_dir: &Path) -> Result<Resolved> {
        let grid = make_uniform_grid(self.grid.length, self.grid.n)?;
        let mut violations = Vec::new();

        let (u0, conforming) = match &self.initial {
            DataSource::Preset(p) => (preset_initial(p, grid)?, p.is_conforming()),
            DataSource::File { file } => {
                let (x, u) = read_samples(&base_dir.join(file))?;
                (Field::new(grid, interpolate(&x, &u, &grid.nodes(), 0.0)?)?, true)
            }
        };
        let g = match &self.boundary {
            DataSource::Preset(p) => match preset_boundary(p) {
                Ok(g) => Some(g),
                Err(SpeError::AssumptionViolation(v)) => {
                    violations.extend(v);
                    None
                }
                Err(e) => return Err(e),
            },
            DataSource::File { file } => {
                let (t, v) = read_samples(&base_dir.join(file))?;
                let sup = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
                if !sup.is_finite() {
                    violations.push(Violation {
                        condition: tags::BOUNDARY_BOUNDED,
                        message: "boundary samples are not finite".into(),
                    });
                    None
                } else {
                    let last = *v.last().unwrap_or(&0.0);
                    Some(BoundaryData::new(sup, move |s| interpolate(&t, &v, &[s], last).map_or(0.0, |r| r[0]))?)
                }
            }
        };

        if conforming {
            violations.extend(initial_violations(&u0));
        }
        if !violations.is_empty() {
            return Err(SpeError::AssumptionViolation(violations));
        }
        let g = g.expect("boundary resolved when no violation was recorded");

        let mut config = SolverConfig::new(
            self.epsilon,
            grid,
            self.time.final_time,
            self.time.cfl_safety,
            self.scheme,
            self.time.snapshots.clone(),
        )?;
        let opts = self.options.unwrap_or_default();
        config.terms.source = opts.source;
        config.mean_projection = opts.mean_projection && conforming;
        config.allow_nonzero_mean = !conforming;
        config.validate()?;
        Ok(Resolved { spec: self.clone(), grid, u0, g, config, conforming })
    }
}

/// Checks the initial-data assumptions: finite L¹ and L∞ norms, zero mean
/// within `10⁻¹⁰ ‖u₀‖₁`, and a square-integrable primitive.
pub fn initial_violations(u0: &Field) -> Vec<Violation> {
    let mut out = Vec::new();
    let l1 = lp_norm(u0, Norm::L1);
    if !(l1.is_finite() && u0.max_abs().is_finite()) {
        out.push(Violation {
            condition: tags::INITIAL_ZERO_MEAN,
            message: "initial datum must lie in L¹ ∩ L∞".into(),
        });
        return out;
    }
    let m = mean(u0);
    if m.abs() > 1e-10 * l1 {
        out.push(Violation {
            condition: tags::INITIAL_ZERO_MEAN,
            message: format!("nonzero mean {m:e} violates ∫u₀ = 0"),
        });
    }
    let p0 = lp_norm(&cumulative_primitive(u0), Norm::L2);
    if !p0.is_finite() {
        out.push(Violation {
            condition: tags::INITIAL_PRIMITIVE_L2,
            message: "primitive of the initial datum is not square integrable".into(),
        });
    }
    out
}

/// Piecewise-linear interpolation of `(xs, ys)` at `at`; `outside` beyond the
/// sample range on the right, the first sample on the left.
fn interpolate(xs: &[f64], ys: &[f64], at: &[f64], outside: f64) -> Result<Vec<f64>> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(SpeError::InvalidData("sample file needs matching, non-empty columns".into()));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SpeError::InvalidData("sample abscissae must be strictly increasing".into()));
    }
    Ok(at
        .iter()
        .map(|&x| {
            let k = xs.partition_point(|&s| s < x);
            if k == 0 {
                ys[0]
            } else if k >= xs.len() {
                if x <= xs[xs.len() - 1] {
                    ys[xs.len() - 1]
                } else {
                    outside
                }
            } else {
                let w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
                ys[k - 1] + w * (ys[k] - ys[k - 1])
            }
        })
        .collect())
}

/// Reads and parses a scenario file, then resolves it to check every data
/// assumption.
pub fn load_scenario(path: &Path) -> Result<ScenarioSpec> {
    let text = std::fs::read_to_string(path)?;
    let spec = ScenarioSpec::from_json(&text)?;
    spec.resolve(base_dir(path))?;
    Ok(spec)
}

/// Directory that relative data paths in `path` refer to.
pub fn base_dir(path: &Path) -> &Path {
    path.parent().unwrap_or_else(|| Path::new("."))
}

/// Adds `perturbation` (built on the same grid) to `u0`.
pub fn perturbed(u0: &Field, perturbation: &InitialPreset) -> Result<Field> {
    if !perturbation.is_conforming() {
        return invalid_arg("stability perturbations must be zero-mean presets");
    }
    let p = preset_initial(perturbation, *u0.grid())?;
    u0.combine(1.0, &p, 1.0)
}
