use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("consecutive states {0} and {1} are orthogonal; phase undefined")]
    OrthogonalNeighbors(usize, usize),

    #[error("consecutive vertices {0} and {1} are antipodal; geodesic undefined")]
    AntipodalVertices(usize, usize),

    #[error("need at least {needed} items, got {got}")]
    TooFew { needed: usize, got: usize },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("far-field condition violated: l = {distance} < {ratio} x {separation}")]
    NotFarField {
        distance: f64,
        ratio: f64,
        separation: f64,
    },

    #[error("invalid setup: {0}")]
    Setup(String),

    #[error("index {index} out of range (len {len})")]
    Index { index: usize, len: usize },

    #[error("capacity exceeded: {what} = {requested} > cap {cap}")]
    Capacity {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("normalization undefined: mean count of detector {0} is zero")]
    ZeroCount(usize),

    #[error("output state has zero norm (destructive exchange)")]
    ZeroNorm,

    #[error("moment has non-negligible imaginary part {0:e}")]
    ComplexMoment(f64),

    #[error("ill-conditioned: {0}")]
    IllConditioned(String),
}
