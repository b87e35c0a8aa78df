use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive definite (smallest eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("matrix does not have full column rank")]
    RankDeficient,

    #[error("singular matrix: {what} (condition estimate {condition:.3e})")]
    Singular { what: String, condition: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. })
    }

    /// Short, comma-free tag used in the CSV `status` column.
    pub fn status_tag(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::Domain(_) => "domain",
            Error::NotHermitian(_) => "not_hermitian",
            Error::NotPositiveDefinite(_) => "not_pd",
            Error::NotPsd(_) => "not_psd",
            Error::RankDeficient => "rank_deficient",
            Error::Singular { .. } => "singular",
            Error::Degenerate(_) => "degenerate",
            Error::NumericalFailure(_) => "numerical_failure",
            Error::Config { .. } => "config",
            Error::Io(_) | Error::Csv(_) => "io",
        }
    }
}
