use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Snn(#[from] wavesnn::SnnError),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("`{command}` needs a `{task}` task block in the config")]
    WrongTask {
        command: &'static str,
        task: &'static str,
    },

    #[error("{0}")]
    Usage(String),
}
