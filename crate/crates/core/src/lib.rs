// NaN must fail validation, hence the negated comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bb84;
pub mod cli;
pub mod common;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod pathloss;
pub mod placement;
pub mod tf;
