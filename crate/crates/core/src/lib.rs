//! Exact combinatorics for intersecting families of k-separated sets on the
//! circle: enumeration, the compression map and its structural checks,
//! exact maximum (and weighted maximum) intersecting families, the
//! disjointness graphs, and reproducible reports.

pub mod bitset;
pub mod circ;
pub mod compression;
pub mod error;
pub mod family;
pub mod graph;
pub mod par;
pub mod report;
pub mod search;
pub mod weighted;

pub use circ::{
    binomial, count_star_formula, enumerate_separated, CircSet, GapVector, Group, Symmetry,
};
pub use error::{Error, Result};
pub use family::{are_isomorphic, b_family, g_map, is_intersecting, star_family, SetFamily};
pub use par::Parallelism;
pub use search::{
    extremal_classes, max_intersecting, max_intersecting_weighted, SearchConfig, SearchResult,
};
