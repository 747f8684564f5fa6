use dirac_backaction_core::oscillator::{energy_curves, validate_spectrum, weight_curves, Branch, DiracParams};
use serde_json::json;

use super::{Context, JobGrid};
use crate::config::SpectrumConfig;
use crate::error::LabError;
use crate::output::{Artifacts, Table};
use crate::row;
use crate::sweep::run_jobs;

pub fn run(c: &SpectrumConfig, ctx: &Context) -> Result<Artifacts, LabError> {
    let eps = c.epsilon.values("epsilon")?;
    if eps.iter().any(|&e| !(e > 0.0)) {
        return Err(LabError::Config("epsilon must be positive".into()));
    }
    let mut energies =
        Table::new("spectrum_energies", &["epsilon", "n", "E_plus_over_mc2", "E_minus_over_mc2"]);
    for p in energy_curves(&eps, c.energy_levels) {
        energies.push(row![p.epsilon, p.n, p.positive, p.negative]);
    }
    let mut weights = Table::new("spectrum_weights", &["epsilon", "n", "A_squared", "B_squared", "norm_defect"]);
    for w in weight_curves(&eps, c.weight_levels) {
        weights.push(row![w.epsilon, w.n, w.a_squared, w.b_squared, w.a_squared + w.b_squared - 1.0]);
    }
    let mut out = Artifacts { tables: vec![energies, weights], documents: Vec::new() };

    if let Some(v) = &c.validate {
        let grid = JobGrid::new(vec![("epsilon", v.epsilon.values("validate.epsilon")?)], ctx.max_jobs)?;
        let reports = run_jobs(grid.len(), ctx.workers, |k| grid.describe(k), |k| {
            let p = DiracParams::new(grid.get(k)[0], v.cutoff)?;
            Ok(validate_spectrum(&p, v.n_max)?)
        })?;
        let mut t = Table::new(
            "spectrum_validation",
            &[
                "epsilon",
                "N",
                "n",
                "branch",
                "E_numeric_over_mc2",
                "E_analytic_over_mc2",
                "abs_error_over_mc2",
                "overlap",
                "max_component_error",
            ],
        );
        let mut summary = Vec::new();
        for r in &reports {
            for row in &r.rows {
                let branch = match row.branch {
                    Branch::Positive => "+",
                    Branch::Negative => "-",
                };
                t.push(row![
                    r.epsilon,
                    r.fock_cutoff,
                    row.n,
                    branch,
                    row.numeric * r.epsilon,
                    row.analytic * r.epsilon,
                    row.abs_error * r.epsilon,
                    row.overlap,
                    row.max_component_error
                ]);
            }
            summary.push(json!({
                "epsilon": r.epsilon,
                "max_energy_error_over_mc2": r.max_energy_error(),
                "min_overlap": r.min_overlap(),
                "window_count": r.window_count,
                "expected_window_count": r.expected_window_count,
                "min_gap": r.min_gap,
                "passes": r.passes(),
            }));
        }
        out.tables.push(t.with_extra(json!({ "per_epsilon": summary })));
    }
    Ok(out)
}
