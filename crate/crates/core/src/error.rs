use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// A specific network invariant that failed validation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Violation {
    #[error("network has no sites")]
    Empty,
    #[error("site at position {position} has id {id}; ids must be 0..n in order")]
    SiteOrder { position: usize, id: usize },
    #[error("bond {index} references unknown site {site}")]
    UnknownSite { index: usize, site: usize },
    #[error("bond {index} connects site {site} to itself")]
    SelfBond { index: usize, site: usize },
    #[error("duplicate bond between sites {i} and {j}")]
    DuplicateBond { i: usize, j: usize },
    #[error("bond between surface sites {i} and {j}")]
    SurfaceSurfaceBond { i: usize, j: usize },
    #[error("surface site {site} appears in {count} bonds, expected exactly one")]
    SurfaceLinkCount { site: usize, count: usize },
    #[error("network has {count} bulk sites, expected an even number")]
    OddBulk { count: usize },
    #[error("bulk bond ({i},{j}) has weight {weight}, expected 1")]
    BulkWeight { i: usize, j: usize, weight: f64 },
    #[error("surface bond ({i},{j}) has weight {weight}, outside (0,1]")]
    SurfaceWeight { i: usize, j: usize, weight: f64 },
    #[error("bond ({i},{j}) has a non-finite coupling")]
    NonFinite { i: usize, j: usize },
}

impl Violation {
    /// Stable machine-readable name of the violated invariant.
    pub fn code(&self) -> &'static str {
        match self {
            Violation::Empty => "empty",
            Violation::SiteOrder { .. } => "site_order",
            Violation::UnknownSite { .. } => "unknown_site",
            Violation::SelfBond { .. } => "self_bond",
            Violation::DuplicateBond { .. } => "duplicate_bond",
            Violation::SurfaceSurfaceBond { .. } => "surface_surface_bond",
            Violation::SurfaceLinkCount { .. } => "surface_link_count",
            Violation::OddBulk { .. } => "odd_bulk",
            Violation::BulkWeight { .. } => "bulk_weight",
            Violation::SurfaceWeight { .. } => "surface_weight",
            Violation::NonFinite { .. } => "non_finite",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid network: {0}")]
    Validation(Violation),
    #[error("unknown geometry `{0}`")]
    UnknownGeometry(String),
    #[error("bad geometry parameters: {0}")]
    BadParams(String),
    #[error("infeasible sector: {0}")]
    BadSector(String),
    #[error("sector {0} is not conserved by the operator")]
    SectorNotConserved(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero vector")]
    ZeroVector,
    #[error("dimension {dim} exceeds the dense cap {cap}")]
    TooLarge { dim: usize, cap: usize },
    #[error("Lanczos did not converge after {iterations} iterations (best residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("bulk ground state is degenerate (E1 - E0 = {gap:e})")]
    DegenerateBulk { gap: f64 },
    #[error("bad site subset: {0}")]
    BadSubset(String),
    #[error("bad dimension: {0}")]
    BadDimension(String),
    #[error("state is not normalized (norm squared {0})")]
    NotNormalized(f64),
    #[error("resolvent solve failed: {0}")]
    ResolventSingular(String),
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
    #[error("operator has imaginary matrix elements in the computational basis")]
    ImaginaryOperator,
}

impl From<Violation> for Error {
    fn from(v: Violation) -> Self {
        Error::Validation(v)
    }
}
