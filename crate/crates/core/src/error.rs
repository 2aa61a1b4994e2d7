use thiserror::Error;

use crate::circ::CircSet;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ground set size {n} is outside 1..={max}")]
    GroundSize { n: u32, max: u32 },

    #[error("element {elem} is outside 1..={n}")]
    ElementOutOfRange { elem: u32, n: u32 },

    #[error("elements must be strictly increasing, got {elems:?}")]
    NotIncreasing { elems: Vec<u32> },

    #[error("empty sets are not supported (r = 0)")]
    EmptySet,

    #[error("gap vector {gaps:?} must consist of positive gaps summing to {n}")]
    BadGaps { gaps: Vec<u32>, n: u32 },

    #[error("need n >= (k+1)r, got n={n}, r={r}, k={k}")]
    TooFewPoints { n: u32, r: u32, k: u32 },

    #[error("{set} is not {k}-separated")]
    NotSeparated { set: CircSet, k: u32 },

    #[error("{set} does not belong to a family with n={n}, r={r}")]
    WrongShape { set: CircSet, n: u32, r: u32 },

    #[error("families have different parameters: ({0}) vs ({1})")]
    ParameterMismatch(String, String),

    #[error("{0}")]
    InvalidParameter(String),

    #[error("{set} is outside the domain of g (needs 1 and not {forbidden})")]
    NotInDomain { set: CircSet, forbidden: u32 },

    #[error("cannot remove 1 from {set}: element not present")]
    MissingOne { set: CircSet },

    #[error("family is not intersecting: {a} and {b} are disjoint")]
    NotIntersecting { a: CircSet, b: CircSet },

    #[error("instance has {vertices} vertices, limit is {limit}")]
    TooLarge { vertices: usize, limit: usize },

    #[error("search aborted: {0}")]
    ResourceLimit(String),

    #[error("integer overflow computing {0}")]
    Overflow(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::ResourceLimit(_) | Error::TooLarge { .. })
    }
}
