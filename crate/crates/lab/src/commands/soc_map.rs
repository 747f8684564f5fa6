use dirac_backaction_core::soc::{
    compare_soc_vs_do, map_parameters, sigma_slope_for_epsilon, ComparisonReport, EffectiveParams, SocGrid, SocParams,
    PLATFORM_SCALES,
};
use serde_json::{json, Value};

use super::{Context, JobGrid};
use crate::config::SocMapConfig;
use crate::error::LabError;
use crate::output::{Artifacts, JsonArtifact, Table};
use crate::row;
use crate::sweep::run_jobs;

fn effective_json(e: &EffectiveParams) -> Value {
    json!({
        "c_eff": e.c_eff,
        "m_eff": e.m_eff,
        "compton_eff": e.compton_eff,
        "zb_freq": e.zb_freq,
        "omega_eff": e.omega_eff,
        "epsilon_eff": e.epsilon_eff,
        "oscillator_length": e.oscillator_length(),
    })
}

fn report_json(r: &ComparisonReport) -> Value {
    json!({
        "grid": { "x_min": r.grid.x_min, "x_max": r.grid.x_max, "points": r.grid.points },
        "max_rel_error_no_kinetic": r.max_rel_error_no_kinetic(),
        "kinetic_shift_monotone": r.kinetic_shift_monotone(),
        "valid": r.valid(),
        "aliasing_weight": r.aliasing_weight,
        "artifact_states": r.artifact_states,
        "rows": r.rows.iter().map(|row| json!({
            "n": row.n,
            "soc_kinetic": row.soc_kinetic,
            "soc_no_kinetic": row.soc_no_kinetic,
            "do_analytic": row.do_analytic,
            "rel_error_no_kinetic": row.rel_error_no_kinetic,
            "kinetic_shift": row.kinetic_shift,
            "k_over_kr": row.k_over_kr,
        })).collect::<Vec<_>>(),
    })
}

pub fn run(c: &SocMapConfig, ctx: &Context) -> Result<Artifacts, LabError> {
    let (last_name, last) = match (&c.sigma_slope, &c.epsilon) {
        (Some(s), None) => ("sigma_slope", s.values("sigma_slope")?),
        (None, Some(e)) => ("epsilon", e.values("epsilon")?),
        _ => return Err(LabError::Config("give exactly one of `sigma_slope` or `epsilon`".into())),
    };
    let grid = JobGrid::new(
        vec![("k_r", c.k_r.values("k_r")?), ("chi", c.chi.values("chi")?), ("m_a", c.m_a.values("m_a")?), (last_name, last)],
        ctx.max_jobs,
    )?;
    let by_epsilon = last_name == "epsilon";
    let results = run_jobs(grid.len(), ctx.workers, |k| grid.describe(k), |k| {
        let j = grid.get(k);
        let slope = if by_epsilon { sigma_slope_for_epsilon(j[0], j[1], j[2], j[3]) } else { j[3] };
        let p = SocParams::new(j[0], j[1], slope, j[2])?.with_detuning(c.delta)?;
        let e = map_parameters(&p)?;
        let report = if c.map_only {
            None
        } else {
            let g = SocGrid::centered(&e, c.half_widths, c.points)?;
            Some(compare_soc_vs_do(&p, &g, c.n_levels)?)
        };
        Ok((p, e, report))
    })?;

    let mut effective = Table::new(
        "soc_effective",
        &[
            "job",
            "k_r",
            "chi",
            "sigma_slope",
            "m_a",
            "c_eff",
            "m_eff",
            "compton_eff",
            "zb_freq",
            "omega_eff",
            "epsilon_eff",
            "epsilon_identity_residual",
            "oscillator_length",
        ],
    );
    let mut comparison = Table::new(
        "soc_comparison",
        &[
            "job",
            "epsilon_eff",
            "n",
            "soc_kinetic",
            "soc_no_kinetic",
            "do_analytic",
            "rel_error_no_kinetic",
            "kinetic_shift",
            "k_over_kr",
        ],
    );
    let mut summary = Table::new(
        "soc_summary",
        &[
            "job",
            "epsilon_eff",
            "points",
            "x_min",
            "x_max",
            "max_rel_error_no_kinetic",
            "kinetic_shift_monotone",
            "valid",
            "aliasing_weight",
            "artifact_states",
        ],
    );
    let mut docs = Vec::new();
    for (k, (p, e, report)) in results.iter().enumerate() {
        effective.push(row![
            k,
            p.k_r,
            p.chi,
            p.sigma_slope,
            p.m_a,
            e.c_eff,
            e.m_eff,
            e.compton_eff,
            e.zb_freq,
            e.omega_eff,
            e.epsilon_eff,
            e.epsilon_from_energies() - e.epsilon_eff,
            e.oscillator_length()
        ]);
        if let Some(r) = report {
            for row in &r.rows {
                comparison.push(row![
                    k,
                    e.epsilon_eff,
                    row.n,
                    row.soc_kinetic,
                    row.soc_no_kinetic,
                    row.do_analytic,
                    row.rel_error_no_kinetic,
                    row.kinetic_shift,
                    row.k_over_kr
                ]);
            }
            summary.push(row![
                k,
                e.epsilon_eff,
                r.grid.points,
                r.grid.x_min,
                r.grid.x_max,
                r.max_rel_error_no_kinetic(),
                r.kinetic_shift_monotone(),
                r.valid(),
                r.aliasing_weight,
                r.artifact_states
            ]);
        }
        docs.push(json!({
            "job": grid.describe(k),
            "effective": effective_json(e),
            "comparison": report.as_ref().map(report_json),
        }));
    }

    let mut platforms = Table::new(
        "soc_platforms",
        &[
            "platform",
            "velocity_of_light",
            "rest_mass",
            "compton_wavelength",
            "zb_frequency",
            "oscillator_frequency",
            "relativistic_parameter",
        ],
    );
    for s in PLATFORM_SCALES {
        platforms.push(row![
            s.platform,
            s.velocity_of_light,
            s.rest_mass,
            s.compton_wavelength,
            s.zb_frequency,
            s.oscillator_frequency,
            s.relativistic_parameter
        ]);
    }

    let units = json!({
        "k_r": "1/m", "chi": "rad/s", "sigma_slope": "rad/(s m)", "m_a": "kg", "c_eff": "m/s", "m_eff": "kg",
        "compton_eff": "m", "zb_freq": "rad/s", "omega_eff": "rad/s", "oscillator_length": "m",
        "energies": "hbar chi above the recoil offset",
    });
    let mut tables = vec![effective.with_extra(json!({ "units": units }))];
    if !c.map_only {
        tables.push(comparison.with_extra(json!({ "units": units })));
        tables.push(summary);
    }
    tables.push(platforms);
    Ok(Artifacts { tables, documents: vec![JsonArtifact { name: "soc_map".into(), body: json!({ "jobs": docs }) }] })
}
