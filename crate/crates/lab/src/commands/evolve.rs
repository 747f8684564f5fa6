use dirac_backaction_core::backaction::{
    analytic_sigma_z, analytic_x_corrected, analytic_x_nr, run_backaction, ApparatusState, Dynamics, MeasurementConfig, Trajectory,
};
use dirac_backaction_core::foldy_wouthuysen::{fw_balanced_reference, fw_energy_balanced_evolution, FwCoupling};
use dirac_backaction_core::hilbert::BasisSpec;
use dirac_backaction_core::oscillator::DiracParams;
use serde_json::json;

use super::{as_count, Context, JobGrid};
use crate::commands::backaction::TRAJECTORY_COLUMNS;
use crate::config::{EvolveConfig, FwCouplingChoice, HamiltonianChoice};
use crate::error::LabError;
use crate::output::{Artifacts, Table};
use crate::row;
use crate::sweep::run_jobs;

/// Single photon sector: the apparatus sits in `|1⟩` so that `g·n_b = G`.
fn evolve_one(c: &EvolveConfig, eps: f64, level: usize, g: f64, f: f64) -> Result<(Trajectory, Vec<f64>), LabError> {
    let times = c.times.times(eps);
    match c.hamiltonian {
        HamiltonianChoice::Dirac | HamiltonianChoice::Nonrelativistic => {
            let dynamics = if c.hamiltonian == HamiltonianChoice::Dirac {
                Dynamics::FullDirac
            } else {
                Dynamics::NonRelativistic
            };
            let m = MeasurementConfig::new(eps, level, g, f, times.clone())?
                .with_basis(BasisSpec::new(c.cutoff)?)
                .with_apparatus(ApparatusState::sharp(1));
            let traj = run_backaction(&m, dynamics)?;
            let reference = times
                .iter()
                .map(|&t| match dynamics {
                    Dynamics::FullDirac => analytic_x_corrected(t, f, level, eps, g),
                    Dynamics::NonRelativistic => analytic_x_nr(t, f),
                })
                .collect();
            Ok((traj, reference))
        }
        HamiltonianChoice::FoldyWouthuysen => {
            let coupling = match c.fw_coupling {
                FwCouplingChoice::Direct => FwCoupling::Direct,
                FwCouplingChoice::Transformed => FwCoupling::Transformed,
            };
            let p = DiracParams::new(eps, c.cutoff)?;
            let traj = fw_energy_balanced_evolution(&p, level, g, f, &times, coupling)?;
            let reference = times.iter().map(|&t| fw_balanced_reference(t, level, eps, f)).collect();
            Ok((traj, reference))
        }
    }
}

pub fn run(c: &EvolveConfig, ctx: &Context) -> Result<Artifacts, LabError> {
    c.times.validate()?;
    let levels = c.level.counts("level")?.into_iter().map(|n| n as f64).collect();
    let grid = JobGrid::new(
        vec![
            ("epsilon", c.epsilon.values("epsilon")?),
            ("level", levels),
            ("g_times_nb", c.g_times_nb.values("g_times_nb")?),
            ("force", c.force.values("force")?),
        ],
        ctx.max_jobs,
    )?;
    let runs = run_jobs(grid.len(), ctx.workers, |k| grid.describe(k), |k| {
        let j = grid.get(k);
        evolve_one(c, j[0], as_count(j[1]), j[2], j[3])
    })?;

    let reference_name = match c.hamiltonian {
        HamiltonianChoice::Dirac => "leading-order relativistic mean with Zitterbewegung term",
        HamiltonianChoice::Nonrelativistic => "non-relativistic mean -2 f sin^2(t/2)",
        HamiltonianChoice::FoldyWouthuysen => "energy-balanced closed form -2 f s sin^2(t/2s), s = sqrt(1+2n eps)",
    };
    let sigma_reference = match c.hamiltonian {
        HamiltonianChoice::Dirac => "free evolution sqrt(2n eps/(1+2n eps)) sin(2 E_n t), exact when g_times_nb = force = 0",
        _ => "0 (conserved under nonrelativistic or direct FW coupling)",
    };
    let mut out = Artifacts::default();
    let mut summary = Table::new(
        "evolve_summary",
        &[
            "job",
            "file",
            "epsilon",
            "level",
            "g_times_nb",
            "force",
            "samples",
            "max_leakage",
            "min_uncertainty_margin",
            "max_abs_x_minus_reference",
        ],
    );
    for (k, (traj, reference)) in runs.iter().enumerate() {
        let j = grid.get(k);
        let mut t = Table::new(
            format!("evolve_{k:03}"),
            &[
                TRAJECTORY_COLUMNS[0],
                TRAJECTORY_COLUMNS[1],
                TRAJECTORY_COLUMNS[2],
                TRAJECTORY_COLUMNS[3],
                TRAJECTORY_COLUMNS[4],
                TRAJECTORY_COLUMNS[5],
                "varPi",
                "uncertainty_margin",
                "x_reference",
                "sigmaZ_free_reference",
            ],
        );
        let (eps, level) = (j[0], as_count(j[1]));
        let sigma_free = |t: f64| match c.hamiltonian {
            HamiltonianChoice::Dirac => analytic_sigma_z(t, level, eps),
            _ => 0.0,
        };
        let mut dev = 0.0f64;
        for (p, r) in traj.points.iter().zip(reference) {
            dev = dev.max((p.exp_x - r).abs());
            t.push(row![p.t, p.exp_x, p.var_x, p.exp_sigma_z, p.exp_pi, p.leakage, p.var_pi, p.uncertainty_margin(), *r, sigma_free(p.t)]);
        }
        summary.push(row![
            k,
            t.file_name().as_str(),
            j[0],
            as_count(j[1]),
            j[2],
            j[3],
            traj.points.len(),
            traj.max_leakage(),
            traj.min_uncertainty_margin(),
            dev
        ]);
        out.tables.push(t.with_extra(json!({ "job": grid.describe(k), "x_reference": reference_name, "sigmaZ_free_reference": sigma_reference })));
    }
    out.tables.push(summary.with_extra(json!({ "jobs": grid.describe_all(), "x_reference": reference_name })));
    Ok(out)
}
