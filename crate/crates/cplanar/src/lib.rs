//! Clustered planarity testing for embedded clustered graphs.
//!
//! The test runs a dynamic program over a bond-carving decomposition of the
//! dual graph. Boundary states are cluster-labelled non-crossing partitions
//! of the interface cycle of each bag. A brute-force oracle and instance
//! generators are included for cross-validation.

pub mod cgraph;
pub mod decomposition;
pub mod dp;
pub mod embedding;
pub mod gen;
pub mod io;
pub mod oracle;
pub mod partitions;
