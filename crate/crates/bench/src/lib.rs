//! Shared inputs for the benchmarks.

pub const NS_SYMMETRIC: &str = include_str!("../../../protocols/ns_symmetric.wf");
