use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("half-angle {0} is outside (0, pi)")]
    BadHalfAngle(f64),
    #[error("arcs {first} and {second} overlap")]
    OverlappingArcs { first: usize, second: usize },
    #[error("invalid geometric tail: {0}")]
    InvalidTail(String),
    #[error("query point is the origin")]
    OriginQuery,
    #[error("dilation factor must be positive, got {0}")]
    NonPositiveDilation(f64),
    #[error("curve must start at the origin, starts at ({0}, {1})")]
    CurveNotAtOrigin(f64, f64),
    #[error("a planar curve needs at least 2 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("point ({0}, {1}) is singular: no characteristic line through it")]
    SingularPoint(f64, f64),
    #[error("surface is not C1: {0}")]
    NotC1(String),
    #[error("family has no infinite tail")]
    NoTail,
    #[error("operation needs a finite family; truncate the tail first")]
    InfiniteFamily,
    #[error("invalid domain: {0}")]
    BadDomain(String),
    #[error("invalid mesh spec: {0}")]
    BadMeshSpec(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
