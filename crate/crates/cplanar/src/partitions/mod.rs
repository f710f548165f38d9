//! Cluster-labelled partitions of cyclically ordered boundaries and the
//! operators used to combine them.

mod flat;
mod layered;
mod plane;
mod recursive;

use thiserror::Error;

pub use flat::{
    bubble_merge, enumerate_admissible, generalized_union, nc_label_sequences, project, MergeFrame,
    NcPartition, Part,
};
pub use layered::LayeredPartition;
pub use plane::{cycle_star, cycle_tree, glue_along_path};
pub use recursive::{
    auxiliary_forest, bubble_merge_recursive, enumerate_recursive, generalized_union_recursive,
    RecursiveNcPartition,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("parts do not cover the ground exactly once: {0}")]
    NotAPartition(String),
    #[error("overlapping parts belong to different clusters")]
    MixedClusterMerge,
    #[error("bubble merge precondition ({0}) violated: {1}")]
    PreconditionViolation(&'static str, String),
    #[error("auxiliary graph is not plane: {0}")]
    NotPlane(String),
    #[error("ground has {0} elements; at most 64 are supported")]
    GroundTooLarge(usize),
}

/// Catalan number `CAT(n)`, saturating on overflow.
pub fn catalan(n: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 0..n as u128 {
        c = c.saturating_mul(2 * (2 * i + 1)) / (i + 2);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::catalan;

    #[test]
    fn catalan_values() {
        let v: Vec<u128> = (0..10).map(catalan).collect();
        assert_eq!(v, vec![1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862]);
    }
}
