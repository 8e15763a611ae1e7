//! Schwarz preconditioners: one-level ORAS, grid and DtN coarse spaces, and
//! their additive or hybrid two-level combination.

mod coarse;
mod one_level;
mod two_level;

pub use coarse::{
    build_dtn_cs, build_grid_cs, CoarseKind, CoarseSpace, CoarseSummary, SelectionPolicy,
    SubdomainCoarseInfo,
};
pub use one_level::{build_one_level, OneLevelOras};
pub use two_level::{CoarseMode, TwoLevelPreconditioner};
