use thiserror::Error;

/// Command failures. Input and configuration problems exit with 2, failures inside a
/// pipeline stage with 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: toxiscope::Error,
    },
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    /// Config and validation errors from the library count as input errors.
    pub fn from_core(e: toxiscope::Error) -> Self {
        CliError::Input(e.to_string())
    }

    pub fn stage(stage: &'static str) -> impl FnOnce(toxiscope::Error) -> Self {
        move |source| CliError::Stage { stage, source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Stage { .. } => 1,
        }
    }
}
