//! One function per `command`, each turning a config into tables.

mod backaction;
mod evolve;
mod fw_check;
mod soc_map;
mod spectrum;

use serde_json::{Map, Value};

use crate::config::{RunConfig, DEFAULT_MAX_JOBS};
use crate::error::LabError;
use crate::output::Artifacts;

pub use backaction::TRAJECTORY_COLUMNS;

/// Resolved execution settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Context {
    pub workers: usize,
    pub max_jobs: usize,
}

impl Context {
    pub fn new(workers: usize, max_jobs: Option<usize>) -> Self {
        Self { workers: workers.max(1), max_jobs: max_jobs.unwrap_or(DEFAULT_MAX_JOBS) }
    }
}

pub fn execute(cfg: &RunConfig, ctx: &Context) -> Result<Artifacts, LabError> {
    match cfg {
        RunConfig::Spectrum(c) => spectrum::run(c, ctx),
        RunConfig::Evolve(c) => evolve::run(c, ctx),
        RunConfig::Backaction(c) => backaction::run_trajectories(c, ctx),
        RunConfig::Sweep(c) => backaction::run_sweep(c, ctx),
        RunConfig::FwCheck(c) => fw_check::run(c, ctx),
        RunConfig::SocMap(c) => soc_map::run(c, ctx),
    }
}

/// Cartesian product of named axes, last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct JobGrid {
    names: Vec<&'static str>,
    points: Vec<Vec<f64>>,
}

impl JobGrid {
    pub fn new(axes: Vec<(&'static str, Vec<f64>)>, max_jobs: usize) -> Result<Self, LabError> {
        let total = axes.iter().try_fold(1usize, |acc, (_, v)| acc.checked_mul(v.len())).unwrap_or(usize::MAX);
        if total > max_jobs {
            return Err(LabError::Config(format!("{total} jobs exceed the cap of {max_jobs} (raise max_jobs)")));
        }
        let lens: Vec<usize> = axes.iter().map(|(_, v)| v.len()).collect();
        let points = crate::config::cartesian(&lens)
            .into_iter()
            .map(|ix| ix.iter().zip(&axes).map(|(&k, (_, v))| v[k]).collect())
            .collect();
        Ok(Self { names: axes.iter().map(|(n, _)| *n).collect(), points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn get(&self, k: usize) -> &[f64] {
        &self.points[k]
    }

    pub fn describe(&self, k: usize) -> Value {
        let mut m = Map::new();
        m.insert("job".into(), Value::from(k));
        for (name, v) in self.names.iter().zip(&self.points[k]) {
            m.insert((*name).into(), Value::from(*v));
        }
        Value::Object(m)
    }

    pub fn describe_all(&self) -> Value {
        Value::Array((0..self.len()).map(|k| self.describe(k)).collect())
    }
}

pub(crate) fn as_count(x: f64) -> usize {
    x as usize
}
