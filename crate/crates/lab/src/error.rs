use dirac_backaction_core::{Error as CoreError, ErrorClass};

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("job {index} ({params}): {source}")]
    Job { index: usize, params: serde_json::Value, source: Box<LabError> },
}

impl LabError {
    /// Process exit status: 2 schema, 3 physics gate, 4 numerical, 1 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            LabError::Core(e) => match e.class() {
                ErrorClass::Input => 2,
                ErrorClass::PhysicsGate => 3,
                ErrorClass::Numerical => 4,
            },
            LabError::Io(_) | LabError::Csv(_) | LabError::Json(_) => 1,
            LabError::Job { source, .. } => source.exit_code(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            3 => "physics-gate",
            4 => "numerical",
            _ => "io",
        }
    }
}
