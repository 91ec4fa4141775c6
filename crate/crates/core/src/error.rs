use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("pole outside domain: {0}")]
    PoleOutside(String),
    #[error("invalid cut: {0}")]
    InvalidCut(String),
    #[error("mesh generation failed: {0}")]
    Mesh(String),
    #[error("malformed mesh: {0}")]
    Parse(String),
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),
    #[error("region not contained in the domain: {0}")]
    RegionOutside(String),
    #[error("point not covered by the mesh: ({0}, {1})")]
    OffMesh(f64, f64),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable identifier of the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidDomain(_) => "invalid_domain",
            Error::PoleOutside(_) => "pole_outside",
            Error::InvalidCut(_) => "invalid_cut",
            Error::Mesh(_) => "mesh",
            Error::Parse(_) => "parse",
            Error::Factorization(_) => "factorization",
            Error::NoConvergence(_) => "no_convergence",
            Error::RegionOutside(_) => "region_outside",
            Error::OffMesh(..) => "off_mesh",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Inconclusive(_) => "inconclusive",
            Error::InvalidInput(_) => "invalid_input",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
