use dirac_backaction_core::backaction::{
    analytic_delta_x_nr, analytic_x_corrected, analytic_x_nr, estimate_smearing, run_backaction, ApparatusState,
    Dynamics, MeasurementConfig, SmearingEstimate, Trajectory,
};
use dirac_backaction_core::hilbert::BasisSpec;
use serde_json::json;

use super::{as_count, Context, JobGrid};
use crate::config::{ApparatusChoice, BackactionConfig, DynamicsChoice};
use crate::error::LabError;
use crate::output::{Artifacts, Table};
use crate::row;
use crate::sweep::run_jobs;

/// Leading columns of every trajectory file.
pub const TRAJECTORY_COLUMNS: [&str; 6] = ["t", "expX_dimensionless", "varX", "expSigmaZ", "expPi", "leakage"];

fn apparatus(choice: &ApparatusChoice) -> Result<ApparatusState, LabError> {
    Ok(match choice {
        ApparatusChoice::Sharp(n) => ApparatusState::sharp(*n),
        ApparatusChoice::Poisson { mean, max_photons } => ApparatusState::poisson(*mean, *max_photons)?,
        ApparatusChoice::Distribution(w) => ApparatusState::distribution(w.iter().copied())?,
    })
}

fn dynamics(choice: DynamicsChoice) -> Dynamics {
    match choice {
        DynamicsChoice::Dirac => Dynamics::FullDirac,
        DynamicsChoice::Nonrelativistic => Dynamics::NonRelativistic,
    }
}

fn grid(c: &BackactionConfig, ctx: &Context) -> Result<JobGrid, LabError> {
    c.times.validate()?;
    let levels = c.level.counts("level")?.into_iter().map(|n| n as f64).collect();
    JobGrid::new(
        vec![
            ("epsilon", c.epsilon.values("epsilon")?),
            ("level", levels),
            ("strength", c.strength.values("strength")?),
            ("force", c.force.values("force")?),
        ],
        ctx.max_jobs,
    )
}

fn measurement(c: &BackactionConfig, job: &[f64]) -> Result<MeasurementConfig, LabError> {
    let (eps, level, strength, force) = (job[0], as_count(job[1]), job[2], job[3]);
    let mut m = MeasurementConfig::new(eps, level, strength, force, c.times.times(eps))?
        .with_basis(BasisSpec::new(c.cutoff)?)
        .with_apparatus(apparatus(&c.apparatus)?);
    m.leakage_gate = c.leakage_gate;
    m.omega_b = c.omega_b;
    m.validate()?;
    Ok(m)
}

fn simulate(c: &BackactionConfig, grid: &JobGrid, ctx: &Context) -> Result<Vec<(MeasurementConfig, Trajectory)>, LabError> {
    let dyn_ = dynamics(c.hamiltonian);
    run_jobs(grid.len(), ctx.workers, |k| grid.describe(k), |k| {
        let m = measurement(c, grid.get(k))?;
        let traj = run_backaction(&m, dyn_)?;
        Ok((m, traj))
    })
}

pub(crate) fn trajectory_table(name: String, traj: &Trajectory, m: &MeasurementConfig) -> Table {
    let mut t = Table::new(
        name,
        &[
            TRAJECTORY_COLUMNS[0],
            TRAJECTORY_COLUMNS[1],
            TRAJECTORY_COLUMNS[2],
            TRAJECTORY_COLUMNS[3],
            TRAJECTORY_COLUMNS[4],
            TRAJECTORY_COLUMNS[5],
            "varPi",
            "uncertainty_margin",
            "x_nr_analytic",
            "x_corrected_analytic",
            "deltaX_nr_analytic",
        ],
    );
    for p in &traj.points {
        t.push(row![
            p.t,
            p.exp_x,
            p.var_x,
            p.exp_sigma_z,
            p.exp_pi,
            p.leakage,
            p.var_pi,
            p.uncertainty_margin(),
            analytic_x_nr(p.t, m.force),
            analytic_x_corrected(p.t, m.force, m.level, m.epsilon, m.strength),
            analytic_delta_x_nr(p.t, m.level, m.strength)
        ]);
    }
    t
}

fn max_deviation(traj: &Trajectory, reference: impl Fn(f64) -> f64) -> f64 {
    traj.points.iter().map(|p| (p.exp_x - reference(p.t)).abs()).fold(0.0, f64::max)
}

const FIT_COLUMNS: [&str; 15] = [
    "job",
    "epsilon",
    "level",
    "strength",
    "force",
    "delta_fitted",
    "delta_analytic",
    "ratio",
    "zb_frequency_fitted",
    "zb_frequency_dft",
    "zb_frequency_exact",
    "force_fitted",
    "residual",
    "regime_breakdown",
    "max_leakage",
];

fn fit_row(k: usize, m: &MeasurementConfig, s: &SmearingEstimate, traj: &Trajectory) -> Vec<crate::output::Cell> {
    row![
        k,
        m.epsilon,
        m.level,
        m.strength,
        m.force,
        s.delta_fitted,
        s.delta_analytic,
        s.delta_fitted / s.delta_analytic,
        s.zb_frequency_fitted,
        s.zb_frequency_dft,
        s.zb_frequency_exact,
        s.force_fitted,
        s.residual,
        s.regime_breakdown,
        traj.max_leakage()
    ]
}

/// `backaction`: one trajectory file per job plus a summary.
pub fn run_trajectories(c: &BackactionConfig, ctx: &Context) -> Result<Artifacts, LabError> {
    let grid = grid(c, ctx)?;
    let runs = simulate(c, &grid, ctx)?;
    let mut out = Artifacts::default();
    let mut summary = Table::new(
        "backaction_summary",
        &[
            "job",
            "file",
            "epsilon",
            "level",
            "strength",
            "force",
            "samples",
            "max_leakage",
            "min_uncertainty_margin",
            "max_abs_x_minus_nr",
            "max_abs_x_minus_corrected",
        ],
    );
    let mut fits = Table::new("backaction_fit", &FIT_COLUMNS);
    for (k, (m, traj)) in runs.iter().enumerate() {
        let table = trajectory_table(format!("backaction_{k:03}"), traj, m).with_extra(grid.describe(k));
        summary.push(row![
            k,
            table.file_name().as_str(),
            m.epsilon,
            m.level,
            m.strength,
            m.force,
            traj.points.len(),
            traj.max_leakage(),
            traj.min_uncertainty_margin(),
            max_deviation(traj, |t| analytic_x_nr(t, m.force)),
            max_deviation(traj, |t| analytic_x_corrected(t, m.force, m.level, m.epsilon, m.strength))
        ]);
        if c.fit {
            fits.push(fit_row(k, m, &estimate_smearing(traj, m)?, traj));
        }
        out.tables.push(table);
    }
    out.tables.push(summary.with_extra(json!({ "jobs": grid.describe_all() })));
    if c.fit {
        out.tables.push(fits);
    }
    Ok(out)
}

/// `sweep`: the smearing fit for every job, and the log-log slope of
/// `delta_fitted` against `ε` for each `(level, strength, force)` group.
pub fn run_sweep(c: &BackactionConfig, ctx: &Context) -> Result<Artifacts, LabError> {
    let grid = grid(c, ctx)?;
    let dyn_ = dynamics(c.hamiltonian);
    let rows = run_jobs(grid.len(), ctx.workers, |k| grid.describe(k), |k| {
        let m = measurement(c, grid.get(k))?;
        let traj = run_backaction(&m, dyn_)?;
        let s = estimate_smearing(&traj, &m)?;
        Ok((m, s, traj.max_leakage()))
    })?;
    let mut smearing = Table::new("smearing", &FIT_COLUMNS);
    for (k, (m, s, leak)) in rows.iter().enumerate() {
        let mut r = fit_row(k, m, s, &Trajectory::default());
        *r.last_mut().unwrap() = (*leak).into();
        smearing.push(r);
    }

    let mut slopes = Table::new("smearing_slopes", &["level", "strength", "force", "points", "slope", "expected"]);
    let mut groups: Vec<(usize, f64, f64)> = Vec::new();
    for (m, _, _) in &rows {
        let key = (m.level, m.strength, m.force);
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    for (level, strength, force) in groups {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|(m, s, _)| (m.level, m.strength, m.force) == (level, strength, force) && s.delta_fitted > 0.0)
            .map(|(m, s, _)| (m.epsilon.ln(), s.delta_fitted.ln()))
            .collect();
        let slope = log_slope(&pts).unwrap_or(f64::NAN);
        slopes.push(row![level, strength, force, pts.len(), slope, 0.5]);
    }
    Ok(Artifacts {
        tables: vec![smearing.with_extra(json!({ "jobs": grid.describe_all() })), slopes],
        documents: Vec::new(),
    })
}

/// Least-squares slope of `y` against `x`; `None` with fewer than two distinct `x`.
pub fn log_slope(pts: &[(f64, f64)]) -> Option<f64> {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (pts.len() >= 2 && sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::log_slope;

    #[test]
    fn slope_of_a_power_law() {
        let pts: Vec<_> = [1e-5f64, 1e-4, 1e-3].iter().map(|e| (e.ln(), (3.0 * e.sqrt()).ln())).collect();
        assert!((log_slope(&pts).unwrap() - 0.5).abs() < 1e-12);
        assert!(log_slope(&pts[..1]).is_none());
    }
}
