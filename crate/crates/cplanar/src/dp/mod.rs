//! The clustered-planarity test: preprocessing, the bottom-up dynamic
//! program over a bond-carving decomposition, root acceptance and witness
//! extraction.

pub mod augment;
pub mod engine;
pub mod gadget;

use std::fmt;

use thiserror::Error;

use crate::cgraph::{clusters_connected, CGraphError, ClusteredGraph, SaturatingEdge};
use crate::decomposition::{exact_bond_carving, heuristic_bond_carving, BagId, CarvingDecomposition, DecompError};
use crate::embedding::{insert_chords, FaceChord, GraphError};
use crate::partitions::PartitionError;

pub use augment::{biconnect_augment, Augmented};
pub use engine::{BagTable, DpOptions, DpRun, Entry, Origin};
pub use gadget::{gadget_edge_to_cluster, GadgetError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DpError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    CGraph(#[from] CGraphError),
    #[error(transparent)]
    Decomposition(#[from] DecompError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("bag {bag}: table has {size} entries, above the bound {bound}")]
    TableBound { bag: BagId, size: usize, bound: u128 },
    #[error("bag {bag}: boundary of length {len} exceeds 64")]
    BoundaryTooLong { bag: BagId, len: usize },
    #[error("bag {bag}: chord enumeration exceeded {nodes} nodes")]
    LeafTooLarge { bag: BagId, nodes: usize },
    #[error("bag {0}: merged boundary differs from the interface cycle")]
    BoundaryMismatch(BagId),
    #[error("bag {0}: equal partitions carry different cluster totals")]
    InconsistentCounts(BagId),
    #[error("bag {0}: merge disagrees with the partition algebra")]
    AlgebraMismatch(BagId),
    #[error("bag {0} processed before its children")]
    MissingChild(BagId),
    #[error("root children have different interface cycles")]
    RootMismatch,
    #[error("decomposition needs at least two faces")]
    TooFewFaces,
    #[error("extracted witness failed validation: {0}")]
    InvalidWitness(String),
}

/// Why an instance was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reason {
    NonPlanarEmbedding,
    NotHoleFree,
    /// Some bag's table became empty: a cluster is cut off by its interface.
    ClusterSeparator(BagId),
    RootMergeFailure,
    /// Tiny instances decided directly: some cluster is disconnected and no
    /// chord can be added.
    Disconnected,
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::NonPlanarEmbedding => write!(f, "non-planar-embedding"),
            Reason::NotHoleFree => write!(f, "not-hole-free"),
            Reason::ClusterSeparator(b) => write!(f, "cluster-separator@{b}"),
            Reason::RootMergeFailure => write!(f, "root-merge-failure"),
            Reason::Disconnected => write!(f, "cluster-disconnected"),
        }
    }
}

/// How the decomposition of the preprocessed dual is obtained.
#[derive(Debug, Clone, Default)]
pub enum DecompositionChoice {
    /// Exact within the budget, otherwise the heuristic.
    #[default]
    Auto,
    Exact,
    Heuristic,
    /// A decomposition of the input's dual, carried through preprocessing.
    Given(CarvingDecomposition),
}

#[derive(Debug, Clone)]
pub struct TestOptions {
    pub decomposition: DecompositionChoice,
    pub witness: bool,
    /// Work budget for exact decomposition search.
    pub budget: f64,
    pub dp: DpOptions,
}

impl Default for TestOptions {
    fn default() -> Self {
        TestOptions {
            decomposition: DecompositionChoice::Auto,
            witness: false,
            budget: 5e7,
            dp: DpOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    /// Width of the decomposition used by the dynamic program.
    pub width: usize,
    pub max_table: usize,
    pub bags: usize,
    /// Vertices added by preprocessing.
    pub added_vertices: usize,
    /// Whether the exact search was skipped for the heuristic.
    pub heuristic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub edges: Vec<SaturatingEdge>,
    /// The same chords as walk positions, ready for insertion.
    pub chords: Vec<FaceChord>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub c_planar: bool,
    pub reason: Option<Reason>,
    pub witness: Option<Witness>,
    pub stats: Stats,
}

impl Verdict {
    fn reject(reason: Reason, stats: Stats) -> Verdict {
        Verdict {
            c_planar: false,
            reason: Some(reason),
            witness: None,
            stats,
        }
    }
}

/// Checks a saturation: chords insert without crossings and every cluster
/// is connected afterwards.
pub fn validate_witness(cg: &ClusteredGraph, w: &Witness) -> Result<(), String> {
    insert_chords(cg.graph(), &w.chords).map_err(|e| e.to_string())?;
    let mut edges = cg.graph().edges().to_vec();
    edges.extend(w.edges.iter().map(|e| (e.u, e.v)));
    if !clusters_connected(cg.tree(), cg.graph().n(), &edges) {
        return Err("a cluster stays disconnected".into());
    }
    Ok(())
}

/// Picks a bond-carving decomposition for a 2-connected instance.
pub fn choose_decomposition(
    cg: &ClusteredGraph,
    choice: &DecompositionChoice,
    budget: f64,
) -> Result<(CarvingDecomposition, bool), DpError> {
    let dual = cg.graph().dual();
    let heuristic = || {
        let d = heuristic_bond_carving(&dual);
        match d.is_bond_carving(&dual) {
            Ok(true) => Ok(d),
            _ => exact_bond_carving(&dual, f64::INFINITY),
        }
    };
    Ok(match choice {
        DecompositionChoice::Exact => (exact_bond_carving(&dual, budget)?, false),
        DecompositionChoice::Heuristic => (heuristic()?, true),
        DecompositionChoice::Auto | DecompositionChoice::Given(_) => match exact_bond_carving(&dual, budget) {
            Ok(d) => (d, false),
            Err(DecompError::TooLarge { .. }) => (heuristic()?, true),
            Err(e) => return Err(e.into()),
        },
    })
}

/// Decides whether `cg` is c-planar with its embedding fixed.
pub fn test_cplanarity(cg: &ClusteredGraph, opts: &TestOptions) -> Result<Verdict, DpError> {
    let mut stats = Stats::default();
    if cg.exists_hole_free_face().is_none() {
        return Ok(Verdict::reject(Reason::NotHoleFree, stats));
    }
    let g = cg.graph();
    if g.n() <= 2 || g.m() == 0 {
        // no candidate chord can exist
        if !cg.is_c_connected() {
            return Ok(Verdict::reject(Reason::Disconnected, stats));
        }
        let witness = opts.witness.then(|| Witness {
            edges: Vec::new(),
            chords: Vec::new(),
        });
        return Ok(Verdict {
            c_planar: true,
            reason: None,
            witness,
            stats,
        });
    }
    let given = match &opts.decomposition {
        DecompositionChoice::Given(d) => Some(d.clone()),
        _ => None,
    };
    let aug = biconnect_augment(cg, given)?;
    let work = aug.result();
    stats.added_vertices = aug.added();
    let dual = work.graph().dual();
    let d = match aug.decomposition.clone() {
        Some(d) if d.is_bond_carving(&dual).unwrap_or(false) => d,
        _ => {
            let (d, h) = choose_decomposition(work, &opts.decomposition, opts.budget)?;
            stats.heuristic = h;
            d
        }
    };
    stats.width = d.width(&dual)?;
    stats.bags = d.num_bags();
    let run = engine::run(work, &d, &opts.dp)?;
    stats.max_table = run.max_table;
    if let Some(r) = run.reason {
        return Ok(Verdict::reject(r, stats));
    }
    let witness = if opts.witness {
        let darts = run.witness_darts(&d).expect("accepted run has predecessor links");
        let back = augment::map_witness(&aug, &darts);
        let (chords, edges) = augment::to_face_chords(cg, &back);
        let w = Witness { edges, chords };
        validate_witness(cg, &w).map_err(DpError::InvalidWitness)?;
        Some(w)
    } else {
        None
    };
    Ok(Verdict {
        c_planar: true,
        reason: None,
        witness,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgraph::{ClusterTree, TreeSpec};
    use crate::embedding::EmbeddedGraph;

    fn instance(adj: &[Vec<usize>], clusters: &[Vec<usize>]) -> ClusteredGraph {
        let g = EmbeddedGraph::from_adjacency(adj).unwrap();
        let t = ClusterTree::from_spec(g.n(), &TreeSpec::flat(clusters)).unwrap();
        ClusteredGraph::new(g, t).unwrap()
    }

    fn square() -> Vec<Vec<usize>> {
        vec![vec![1, 3], vec![2, 0], vec![3, 1], vec![0, 2]]
    }

    fn with_witness() -> TestOptions {
        TestOptions {
            witness: true,
            ..TestOptions::default()
        }
    }

    #[test]
    fn square_with_crossing_clusters_is_c_planar() {
        let cg = instance(&square(), &[vec![0, 2], vec![1, 3]]);
        let v = test_cplanarity(&cg, &with_witness()).unwrap();
        assert!(v.c_planar);
        let w = v.witness.unwrap();
        assert_eq!(w.edges.len(), 2);
        assert_ne!(w.edges[0].face, w.edges[1].face);
        validate_witness(&cg, &w).unwrap();
    }

    #[test]
    fn connected_single_cluster_needs_no_chords() {
        let k4 = vec![vec![1, 2, 3], vec![0, 3, 2], vec![0, 1, 3], vec![0, 2, 1]];
        let cg = instance(&k4, &[vec![0, 1, 2, 3]]);
        let v = test_cplanarity(&cg, &with_witness()).unwrap();
        assert!(v.c_planar);
        assert!(v.witness.unwrap().edges.is_empty());
    }

    #[test]
    fn single_cluster_triangle_is_accepted() {
        let cg = instance(&[vec![1, 2], vec![2, 0], vec![0, 1]], &[vec![0, 1, 2]]);
        assert!(test_cplanarity(&cg, &TestOptions::default()).unwrap().c_planar);
    }

    #[test]
    fn foreign_vertex_inside_cluster_cycle_is_a_hole() {
        // wheel on rim 1..4 with hub 0, plus vertex 5 outside adjacent to 1 and 2
        let adj = vec![
            vec![1, 2, 3, 4],
            vec![0, 4, 5, 2],
            vec![0, 1, 5, 3],
            vec![0, 2, 4],
            vec![0, 3, 1],
            vec![2, 1],
        ];
        let cg = instance(&adj, &[vec![1, 2, 3, 4], vec![0], vec![5]]);
        let v = test_cplanarity(&cg, &TestOptions::default()).unwrap();
        assert!(!v.c_planar);
        assert_eq!(v.reason, Some(Reason::NotHoleFree));
    }

    #[test]
    fn bowtie_augmentation_keeps_answer() {
        let adj = vec![vec![1, 2, 3, 4], vec![0, 2], vec![1, 0], vec![0, 4], vec![3, 0]];
        let cg = instance(&adj, &[vec![1, 3], vec![0, 2, 4]]);
        let v = test_cplanarity(&cg, &with_witness()).unwrap();
        if let Some(w) = &v.witness {
            validate_witness(&cg, w).unwrap();
        }
        assert!(v.stats.added_vertices >= 1);
    }
}
