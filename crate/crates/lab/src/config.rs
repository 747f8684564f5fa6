//! Run configuration: one JSON document, tagged by `command`.
//!
//! Any numeric field documented as an axis accepts a scalar, an explicit array
//! or `{"log": [start, stop, count]}`; the job list is the Cartesian product of
//! all axes in declaration order, last axis fastest.

use serde::{Deserialize, Serialize};

use crate::error::LabError;

pub const DEFAULT_MAX_JOBS: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Scalar(f64),
    List(Vec<f64>),
    Log { log: (f64, f64, usize) },
}

impl Axis {
    pub fn values(&self, name: &'static str) -> Result<Vec<f64>, LabError> {
        let v = match self {
            Axis::Scalar(x) => vec![*x],
            Axis::List(xs) => xs.clone(),
            Axis::Log { log: (a, b, n) } => dirac_backaction_core::log_spaced(*a, *b, *n)
                .map_err(|e| LabError::Config(format!("axis `{name}`: {e}")))?,
        };
        if v.is_empty() {
            return Err(LabError::Config(format!("axis `{name}` is empty")));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(LabError::Config(format!("axis `{name}` holds a non-finite value")));
        }
        Ok(v)
    }

    /// Values that must be non-negative integers (levels, cutoffs).
    pub fn counts(&self, name: &'static str) -> Result<Vec<usize>, LabError> {
        self.values(name)?
            .into_iter()
            .map(|x| {
                if x >= 0.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
                    Ok(x as usize)
                } else {
                    Err(LabError::Config(format!("axis `{name}` needs non-negative integers, got {x}")))
                }
            })
            .collect()
    }
}

impl From<f64> for Axis {
    fn from(x: f64) -> Self {
        Axis::Scalar(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    Spectrum(SpectrumConfig),
    Evolve(EvolveConfig),
    Backaction(BackactionConfig),
    Sweep(BackactionConfig),
    FwCheck(FwCheckConfig),
    SocMap(SocMapConfig),
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::Spectrum(_) => "spectrum",
            RunConfig::Evolve(_) => "evolve",
            RunConfig::Backaction(_) => "backaction",
            RunConfig::Sweep(_) => "sweep",
            RunConfig::FwCheck(_) => "fw-check",
            RunConfig::SocMap(_) => "soc-map",
        }
    }

    pub fn common(&self) -> Common {
        macro_rules! pick {
            ($c:expr) => {
                Common { output_path: $c.output_path.clone(), workers: $c.workers, max_jobs: $c.max_jobs }
            };
        }
        match self {
            RunConfig::Spectrum(c) => pick!(c),
            RunConfig::Evolve(c) => pick!(c),
            RunConfig::Backaction(c) | RunConfig::Sweep(c) => pick!(c),
            RunConfig::FwCheck(c) => pick!(c),
            RunConfig::SocMap(c) => pick!(c),
        }
    }
}

/// Settings shared by every command. Command-line flags take precedence.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Common {
    pub output_path: Option<String>,
    pub workers: Option<usize>,
    pub max_jobs: Option<usize>,
}

/// Time samples on `[0, t_end]`: either a fixed count or a density per
/// leading-order Zitterbewegung period `πε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_end: f64,
    pub samples: Option<usize>,
    pub per_fast_period: Option<usize>,
}

impl TimeGrid {
    pub fn validate(&self) -> Result<(), LabError> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(LabError::Config("times.t_end must be positive".into()));
        }
        match (self.samples, self.per_fast_period) {
            (Some(n), None) if n >= 2 => Ok(()),
            (None, Some(k)) if k >= 1 => Ok(()),
            _ => Err(LabError::Config(
                "times needs exactly one of `samples` (≥ 2) or `per_fast_period` (≥ 1)".into(),
            )),
        }
    }

    pub fn times(&self, epsilon: f64) -> Vec<f64> {
        use dirac_backaction_core::backaction::{uniform_times, zitterbewegung_resolved_times};
        match (self.samples, self.per_fast_period) {
            (Some(n), _) => uniform_times(self.t_end, n),
            (None, Some(k)) => zitterbewegung_resolved_times(epsilon, self.t_end, k),
            (None, None) => Vec::new(),
        }
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self { t_end: 2.0 * std::f64::consts::PI, samples: None, per_fast_period: Some(16) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub output_path: Option<String>,
    pub workers: Option<usize>,
    pub max_jobs: Option<usize>,
    pub epsilon: Axis,
    /// Energies are written for `n = 0..energy_levels`.
    #[serde(default = "five")]
    pub energy_levels: usize,
    #[serde(default = "four")]
    pub weight_levels: usize,
    pub validate: Option<SpectrumValidation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumValidation {
    pub epsilon: Axis,
    #[serde(default = "cutoff_128")]
    pub cutoff: usize,
    #[serde(default = "ten")]
    pub n_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HamiltonianChoice {
    Dirac,
    Nonrelativistic,
    FoldyWouthuysen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FwCouplingChoice {
    #[default]
    Direct,
    Transformed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub output_path: Option<String>,
    pub workers: Option<usize>,
    pub max_jobs: Option<usize>,
    pub hamiltonian: HamiltonianChoice,
    pub epsilon: Axis,
    #[serde(default = "level_one")]
    pub level: Axis,
    /// `g·n_b`, the apparatus shift of a single photon sector.
    #[serde(default = "zero_axis")]
    pub g_times_nb: Axis,
    #[serde(default = "zero_axis")]
    pub force: Axis,
    #[serde(default = "cutoff_128")]
    pub cutoff: usize,
    #[serde(default)]
    pub times: TimeGrid,
    #[serde(default)]
    pub fw_coupling: FwCouplingChoice,
}

/// Photon-number distribution of the measuring mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ApparatusChoice {
    Sharp(u32),
    Poisson { mean: f64, max_photons: u32 },
    /// `[[photons, weight], ...]`
    Distribution(Vec<(u32, f64)>),
}

impl Default for ApparatusChoice {
    fn default() -> Self {
        ApparatusChoice::Sharp(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DynamicsChoice {
    #[default]
    Dirac,
    Nonrelativistic,
}

/// Shared by `backaction` (trajectory files) and `sweep` (smearing table).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackactionConfig {
    pub output_path: Option<String>,
    pub workers: Option<usize>,
    pub max_jobs: Option<usize>,
    pub epsilon: Axis,
    #[serde(default = "level_one")]
    pub level: Axis,
    /// Dimensionless measurement strength `G = g⟨b̂†b̂⟩`.
    pub strength: Axis,
    #[serde(default = "zero_axis")]
    pub force: Axis,
    #[serde(default)]
    pub apparatus: ApparatusChoice,
    #[serde(default)]
    pub hamiltonian: DynamicsChoice,
    #[serde(default = "cutoff_128")]
    pub cutoff: usize,
    #[serde(default)]
    pub times: TimeGrid,
    #[serde(default = "leakage_gate")]
    pub leakage_gate: f64,
    #[serde(default)]
    pub omega_b: f64,
    /// `backaction` only: also fit the smearing template per job.
    #[serde(default)]
    pub fit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FwCheckConfig {
    pub output_path: Option<String>,
    pub workers: Option<usize>,
    pub max_jobs: Option<usize>,
    pub epsilon: Axis,
    #[serde(default = "cutoff_axis")]
    pub cutoff: Axis,
    #[serde(default = "interior_fraction")]
    pub interior_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SocMapConfig {
    pub output_path: Option<String>,
    pub workers: Option<usize>,
    pub max_jobs: Option<usize>,
    /// Raman wavenumber (1/m).
    pub k_r: Axis,
    /// Raman coupling (rad/s).
    pub chi: Axis,
    /// Atomic mass (kg).
    pub m_a: Axis,
    /// Gradient of the spatially varying coupling. Give this or `epsilon`.
    pub sigma_slope: Option<Axis>,
    /// Target `ε̃`; the slope is solved from it.
    pub epsilon: Option<Axis>,
    #[serde(default)]
    pub delta: f64,
    #[serde(default = "half_widths")]
    pub half_widths: f64,
    #[serde(default = "grid_points")]
    pub points: usize,
    #[serde(default = "ten")]
    pub n_levels: usize,
    /// Skip the grid diagonalization and only write the parameter map.
    #[serde(default)]
    pub map_only: bool,
}

fn five() -> usize {
    5
}
fn four() -> usize {
    4
}
fn ten() -> usize {
    10
}
fn cutoff_128() -> usize {
    128
}
fn cutoff_axis() -> Axis {
    Axis::Scalar(256.0)
}
fn level_one() -> Axis {
    Axis::Scalar(1.0)
}
fn zero_axis() -> Axis {
    Axis::Scalar(0.0)
}
fn leakage_gate() -> f64 {
    dirac_backaction_core::backaction::DEFAULT_LEAKAGE_GATE
}
fn interior_fraction() -> f64 {
    dirac_backaction_core::foldy_wouthuysen::DEFAULT_INTERIOR_FRACTION
}
fn half_widths() -> f64 {
    12.0
}
fn grid_points() -> usize {
    256
}

/// Parses a config document. Unknown keys and malformed values are schema errors.
pub fn parse(text: &str) -> Result<(RunConfig, serde_json::Value), LabError> {
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
    let cfg: RunConfig = serde_json::from_value(raw.clone()).map_err(|e| LabError::Config(e.to_string()))?;
    Ok((cfg, raw))
}

/// Cartesian product of per-axis value lists; the last axis varies fastest.
pub fn cartesian(axes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &len in axes {
        out = out.into_iter().flat_map(|prefix| (0..len).map(move |k| [prefix.clone(), vec![k]].concat())).collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axes_accept_scalars_lists_and_log_ranges() {
        let a: Axis = serde_json::from_str("0.5").unwrap();
        assert_eq!(a.values("a").unwrap(), vec![0.5]);
        let b: Axis = serde_json::from_str("[1, 2, 3]").unwrap();
        assert_eq!(b.counts("b").unwrap(), vec![1, 2, 3]);
        let c: Axis = serde_json::from_str(r#"{"log": [1e-5, 1e-3, 3]}"#).unwrap();
        let v = c.values("c").unwrap();
        assert_eq!(v.len(), 3);
        assert!((v[1] - 1e-4).abs() < 1e-18);
        assert!(serde_json::from_str::<Axis>(r#"{"lin": [0, 1, 3]}"#).is_err());
        assert!(Axis::List(vec![]).values("d").is_err());
        assert!(Axis::Scalar(1.5).counts("e").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let ok = r#"{"command": "fw-check", "epsilon": 0.1, "cutoff": 24}"#;
        assert!(matches!(parse(ok).unwrap().0, RunConfig::FwCheck(_)));
        let typo = r#"{"command": "fw-check", "epsilon": 0.1, "cutof": 24}"#;
        assert!(matches!(parse(typo), Err(LabError::Config(_))));
        let nested = r#"{"command": "sweep", "epsilon": 0.1, "strength": 0.1, "times": {"t_end": 1, "samples": 9, "dt": 1}}"#;
        assert!(parse(nested).is_err());
        assert!(parse(r#"{"command": "plot"}"#).is_err());
        assert!(parse("not json").is_err());
    }

    #[test]
    fn apparatus_forms() {
        let a: ApparatusChoice = serde_json::from_str(r#"{"poisson": {"mean": 1.0, "max_photons": 6}}"#).unwrap();
        assert_eq!(a, ApparatusChoice::Poisson { mean: 1.0, max_photons: 6 });
        let d: ApparatusChoice = serde_json::from_str(r#"{"distribution": [[0, 0.5], [2, 0.5]]}"#).unwrap();
        assert_eq!(d, ApparatusChoice::Distribution(vec![(0, 0.5), (2, 0.5)]));
    }

    #[test]
    fn time_grid_needs_exactly_one_density() {
        let both = TimeGrid { t_end: 1.0, samples: Some(3), per_fast_period: Some(3) };
        assert!(both.validate().is_err());
        let none = TimeGrid { t_end: 1.0, samples: None, per_fast_period: None };
        assert!(none.validate().is_err());
        assert_eq!(TimeGrid { t_end: 1.0, samples: Some(5), per_fast_period: None }.times(0.1).len(), 5);
        assert!(TimeGrid::default().times(1e-3).len() > 2 * 16 * 1000);
    }

    #[test]
    fn cartesian_runs_last_axis_fastest() {
        assert_eq!(cartesian(&[2, 3]), vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 0], vec![1, 1], vec![1, 2]]);
        assert_eq!(cartesian(&[]), vec![Vec::<usize>::new()]);
        assert!(cartesian(&[3, 0]).is_empty());
    }
}
