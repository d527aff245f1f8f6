//! Subcommand dispatch behind the `spe` binary.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::diagnostics::{
    default_family, default_stability_constant, entropy_record, entropy_table, epsilon_sweep, exact_shock_trajectory,
    front_position, invariants_report, kruzhkov_constants, required_kappa, scaling_check, scaling_constants,
    stability_compare, cone_check, CheckRecord, DiagnosticsReport, ENTROPY_KAPPA,
};
use crate::error::{invalid_arg, Result};
use crate::io::{write_json, write_trajectory};
use crate::nonlocal::{far_field_f_identity_residual, FarFieldSample, PrimitivePair};
use crate::presets::InitialPreset;
use crate::scenario::{base_dir, perturbed, DataSource, Resolved, ScenarioSpec};
use crate::scheme::{run, Trajectory};
use crate::tags;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Solve,
    Invariants,
    EntropyCheck,
    Stability,
    Sweep,
    Scale,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub out: PathBuf,
    pub strict_compat: bool,
    pub epsilons: Option<Vec<f64>>,
    pub stability_c: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { out: PathBuf::from("spe-out"), strict_compat: false, epsilons: None, stability_c: None }
    }
}

/// Result of a subcommand: overall verdict, the JSON document printed on
/// stdout and the files written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub document: Value,
    pub artifacts: Vec<PathBuf>,
}

/// Viscosities of the default vanishing-viscosity sweep.
pub const DEFAULT_EPSILONS: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];

/// Time levels stored for the entropy quadrature.
pub const ENTROPY_LEVELS: usize = 200;

pub fn dispatch(cmd: Subcommand, scenario: &Path, opts: &RunOptions) -> Result<Outcome> {
    let text = std::fs::read_to_string(scenario)?;
    let spec = ScenarioSpec::from_json(&text)?;
    let mut resolved = spec.resolve(base_dir(scenario))?;
    resolved.config.compat.strict = opts.strict_compat;
    match cmd {
        Subcommand::Solve => solve(&resolved, opts),
        Subcommand::Invariants => invariants(&resolved, opts),
        Subcommand::EntropyCheck => entropy_check(&resolved, opts),
        Subcommand::Stability => stability(&resolved, opts),
        Subcommand::Sweep => sweep(&resolved, opts),
        Subcommand::Scale => scale(&resolved, opts),
    }
}

fn finish(passed: bool, document: Value, out: &Path, mut artifacts: Vec<PathBuf>) -> Result<Outcome> {
    let p = out.join("report.json");
    write_json(&p, &document)?;
    artifacts.push(p);
    Ok(Outcome { passed, document, artifacts })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

/// `|F(L) − (ε ∂x u(t,0) − g³)|` at every stored state.
pub fn far_field_series(traj: &Trajectory) -> Result<Vec<(f64, f64)>> {
    traj.states()
        .iter()
        .map(|s| {
            let pair = PrimitivePair::of(&s.u);
            let g = traj.boundary.eval(s.t)?;
            let r = far_field_f_identity_residual(&FarFieldSample {
                f: &pair.f,
                epsilon: traj.config.epsilon,
                g,
                boundary_gradient: s.boundary_gradient,
            });
            Ok((s.t, r))
        })
        .collect()
}

fn solve(r: &Resolved, opts: &RunOptions) -> Result<Outcome> {
    let traj = run(&r.u0, &r.g, &r.config)?;
    let artifacts = write_trajectory(&traj, &opts.out)?;
    let far: Vec<Value> = far_field_series(&traj)?
        .into_iter()
        .map(|(t, v)| json!({"t": t, "residual": v}))
        .collect();
    let doc = json!({
        "scenario": r.spec.name,
        "completed": traj.completed(),
        "final_time": traj.final_state().t,
        "steps": traj.step_log.len(),
        "snapshot_times": traj.snapshots.iter().map(|s| s.t).collect::<Vec<_>>(),
        "far_field_f": { "paper_tag": tags::FAR_FIELD_F, "series": far },
    });
    finish(traj.completed(), doc, &opts.out, artifacts)
}

fn invariants(r: &Resolved, opts: &RunOptions) -> Result<Outcome> {
    let traj = run(&r.u0, &r.g, &r.config)?;
    let rep = invariants_report(&traj);
    finish(rep.all_pass(), to_value(&rep), &opts.out, Vec::new())
}

fn entropy_check(r: &Resolved, opts: &RunOptions) -> Result<Outcome> {
    let mut config = r.config.clone();
    let t_end = config.final_time;
    config.snapshot_times = (1..=ENTROPY_LEVELS).map(|j| t_end * j as f64 / ENTROPY_LEVELS as f64).collect();
    let traj = run(&r.u0, &r.g, &config)?;
    let cs = kruzhkov_constants(&traj, 5);
    let family = default_family(&traj, (3, 3))?;
    let rows = entropy_table(&traj, &cs, &family, ENTROPY_KAPPA)?;
    let mut report = DiagnosticsReport::default();
    report.push(entropy_record(&rows));
    report.push(calibration_record(&traj)?);
    if let DataSource::Preset(InitialPreset::RiemannTest { left, right, jump }) = r.spec.initial {
        report.push(rankine_hugoniot_record(&traj, left, right, jump)?);
    }
    let doc = json!({ "checks": report, "residuals": rows });
    finish(report.all_pass(), doc, &opts.out, Vec::new())
}

/// Runs the entropy checker on the exact single-shock solution sampled like
/// `traj` and reports the smallest tolerance multiplier it needs, against
/// the multiplier in use.
pub fn calibration_record(traj: &Trajectory) -> Result<CheckRecord> {
    let grid = traj.config.grid;
    let t_end = traj.final_state().t;
    let x0 = 0.25 * grid.length();
    let levels = traj.states().len().saturating_sub(1).max(1);
    let shock = exact_shock_trajectory(grid.length(), grid.cells(), t_end.min(0.2 * grid.length()), levels, 1.0, 0.0, x0)?;
    let cs = kruzhkov_constants(&shock, 5);
    let family = default_family(&shock, (3, 3))?;
    let k = required_kappa(&shock, &cs, &family)?;
    Ok(CheckRecord::against_bound("entropy-tolerance-calibration", tags::ENTROPY, k, ENTROPY_KAPPA, 0.0))
}

/// Front position at `T` (the `(l + r)/2` crossing) against the
/// Rankine–Hugoniot prediction, within `2Δx`.
pub fn rankine_hugoniot_record(traj: &Trajectory, left: f64, right: f64, jump: f64) -> Result<CheckRecord> {
    if !(left > right) {
        return invalid_arg("front tracking needs left > right");
    }
    let s = (left.powi(3) - right.powi(3)) / (left - right);
    let fin = traj.final_state();
    let predicted = jump + s * fin.t;
    let front = front_position(&fin.u, 0.5 * (left + right)).unwrap_or(f64::NAN);
    let err = (front - predicted).abs();
    let mut rec = CheckRecord::with_residual(
        "rankine-hugoniot-front",
        tags::ENTROPY,
        front,
        predicted,
        err,
        2.0 * traj.config.grid.dx(),
    );
    if err.is_nan() {
        rec.verdict = crate::diagnostics::Verdict::Fail;
    }
    Ok(rec)
}

fn stability(r: &Resolved, opts: &RunOptions) -> Result<Outcome> {
    let Some(st) = r.spec.stability.clone() else {
        return invalid_arg("scenario has no \"stability\" section");
    };
    let v0 = perturbed(&r.u0, &st.perturbation)?;
    let far0 = st.far_perturbation.as_ref().map(|p| perturbed(&r.u0, p)).transpose()?;
    let ((base, pert), far) = rayon::join(
        || rayon::join(|| run(&r.u0, &r.g, &r.config), || run(&v0, &r.g, &r.config)),
        || far0.map(|f| run(&f, &r.g, &r.config)),
    );
    let (base, pert) = (base?, pert?);
    let far = far.transpose()?;
    let c = opts.stability_c.or(st.constant).unwrap_or_else(|| {
        let mut c = default_stability_constant(&base, &pert);
        if let Some(f) = &far {
            c = c.max(default_stability_constant(&base, f));
        }
        c
    });
    let mut report = DiagnosticsReport::default();
    report.push(stability_compare(&pert, &base, st.window, c)?);
    if let Some(f) = &far {
        report.push(cone_check(f, &base, st.window, r.config.final_time, st.noise)?);
    }
    let doc = json!({ "C": c, "R": st.window, "checks": report });
    finish(report.all_pass(), doc, &opts.out, Vec::new())
}

fn sweep(r: &Resolved, opts: &RunOptions) -> Result<Outcome> {
    let eps = opts.epsilons.clone().unwrap_or_else(|| DEFAULT_EPSILONS.to_vec());
    let s = epsilon_sweep(&r.u0, &r.g, &r.config, &eps)?;
    let doc = json!({
        "epsilons": s.epsilons,
        "differences": s.differences,
        "trace_differences": s.trace_differences,
        "checks": [s.record],
    });
    finish(s.record.passed(), doc, &opts.out, Vec::new())
}

fn scale(r: &Resolved, opts: &RunOptions) -> Result<Outcome> {
    let Some(p) = r.spec.physical else {
        return invalid_arg("scenario has no \"physical\" section");
    };
    let s = scaling_constants(p.k, p.c2)?;
    let rec = scaling_check(&s);
    let doc = json!({ "scaling": s, "checks": [rec] });
    finish(rec.passed(), doc, &opts.out, Vec::new())
}
