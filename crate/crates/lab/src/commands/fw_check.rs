use dirac_backaction_core::foldy_wouthuysen::{fw_check, FW_CHECK_COUPLING};
use dirac_backaction_core::oscillator::DiracParams;
use serde_json::json;

use super::{as_count, Context, JobGrid};
use crate::config::FwCheckConfig;
use crate::error::LabError;
use crate::output::{Artifacts, Table};
use crate::row;
use crate::sweep::run_jobs;

pub fn run(c: &FwCheckConfig, ctx: &Context) -> Result<Artifacts, LabError> {
    let cutoffs = c.cutoff.counts("cutoff")?.into_iter().map(|n| n as f64).collect();
    let grid = JobGrid::new(vec![("epsilon", c.epsilon.values("epsilon")?), ("N", cutoffs)], ctx.max_jobs)?;
    let reports = run_jobs(grid.len(), ctx.workers, |k| grid.describe(k), |k| {
        let j = grid.get(k);
        Ok(fw_check(&DiracParams::new(j[0], as_count(j[1]))?, c.interior_fraction)?)
    })?;
    let mut t = Table::new("fw_check", &["quantity", "epsilon", "N", "interior_fraction", "residual"]);
    for row in reports.iter().flatten() {
        t.push(row![row.quantity, row.epsilon, row.cutoff, row.interior_fraction, row.residual]);
    }
    let (g, f) = FW_CHECK_COUPLING;
    Ok(Artifacts {
        tables: vec![t.with_extra(json!({ "interaction_g_times_nb": g, "interaction_force": f }))],
        documents: Vec::new(),
    })
}
