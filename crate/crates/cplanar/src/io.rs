//! JSON schemas for instances and verdicts.
//!
//! Instance:
//! ```json
//! { "n": 4, "edges": [[0,1],[1,2],[2,3],[3,0]],
//!   "rotation": [[0,7],[1,2],[3,4],[5,6]],
//!   "tree": [[0,2],[1,3]] }
//! ```
//! Dart `2e` runs along edge `e` from its first to its second endpoint and
//! dart `2e+1` runs back. `rotation[v]` lists the darts leaving `v` in
//! clockwise order. `tree` is the cluster tree as nested arrays: the
//! outermost array is the root, integers are vertices and inner arrays are
//! clusters. A missing tree means no clusters.
//!
//! Verdict:
//! ```json
//! { "answer": true, "reason": null, "bag": null,
//!   "witness": [[0,2,1],[1,3,0]],
//!   "stats": { "width": 4, "max_table": 2, "bags": 3 } }
//! ```
//! Witness triples are `[u, v, face]`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cgraph::{CGraphError, ClusteredGraph, TreeSpec};
use crate::dp::{Reason, Verdict};
use crate::embedding::{Dart, EmbeddedGraph, GraphError};
use crate::oracle::OracleVerdict;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    CGraph(#[from] CGraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    pub rotation: Vec<Vec<Dart>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeSpec>,
}

impl InstanceJson {
    pub fn from_cgraph(cg: &ClusteredGraph) -> InstanceJson {
        let g = cg.graph();
        InstanceJson {
            n: g.n(),
            edges: g.edges().iter().map(|&(u, v)| [u, v]).collect(),
            rotation: g.rotations().to_vec(),
            tree: Some(cg.tree().to_spec()),
        }
    }

    pub fn to_cgraph(&self) -> Result<ClusteredGraph, IoError> {
        let edges = self.edges.iter().map(|&[u, v]| (u, v)).collect();
        let g = EmbeddedGraph::new(self.n, edges, self.rotation.clone())?;
        let spec = self
            .tree
            .clone()
            .unwrap_or_else(|| TreeSpec::Node((0..self.n).map(TreeSpec::Leaf).collect()));
        Ok(ClusteredGraph::from_spec(g, &spec)?)
    }
}

pub fn parse_instance(text: &str) -> Result<ClusteredGraph, IoError> {
    serde_json::from_str::<InstanceJson>(text)?.to_cgraph()
}

pub fn instance_to_json(cg: &ClusteredGraph) -> String {
    serde_json::to_string(&InstanceJson::from_cgraph(cg)).expect("instances serialize")
}

pub fn read_instance(path: &Path) -> Result<ClusteredGraph, IoError> {
    parse_instance(&read_text(path)?)
}

/// One instance per non-empty line.
pub fn read_corpus(path: &Path) -> Result<Vec<ClusteredGraph>, IoError> {
    read_text(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(parse_instance)
        .collect()
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsJson {
    pub width: usize,
    pub max_table: usize,
    pub bags: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictJson {
    pub answer: bool,
    pub reason: Option<String>,
    pub bag: Option<usize>,
    pub witness: Option<Vec<[usize; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<StatsJson>,
}

impl VerdictJson {
    pub fn from_verdict(v: &Verdict) -> VerdictJson {
        let (reason, bag) = match v.reason {
            Some(Reason::ClusterSeparator(b)) => (Some("cluster-separator".to_string()), Some(b)),
            Some(r) => (Some(r.to_string()), None),
            None => (None, None),
        };
        VerdictJson {
            answer: v.c_planar,
            reason,
            bag,
            witness: v
                .witness
                .as_ref()
                .map(|w| w.edges.iter().map(|e| [e.u, e.v, e.face]).collect()),
            stats: Some(StatsJson {
                width: v.stats.width,
                max_table: v.stats.max_table,
                bags: v.stats.bags,
            }),
        }
    }

    /// Oracle verdicts carry no statistics.
    pub fn from_oracle(cg: &ClusteredGraph, v: &OracleVerdict, witness: bool) -> VerdictJson {
        let g = cg.graph();
        match v {
            OracleVerdict::CPlanar(chords) => VerdictJson {
                answer: true,
                reason: None,
                bag: None,
                witness: witness.then(|| {
                    chords
                        .iter()
                        .map(|c| {
                            let w = g.faces().walk(c.face);
                            [g.tail(w[c.a]), g.tail(w[c.b]), c.face]
                        })
                        .collect()
                }),
                stats: None,
            },
            OracleVerdict::NotHoleFree => VerdictJson {
                answer: false,
                reason: Some(Reason::NotHoleFree.to_string()),
                bag: None,
                witness: None,
                stats: None,
            },
            OracleVerdict::NoSaturation => VerdictJson {
                answer: false,
                reason: Some("no-saturation".to_string()),
                bag: None,
                witness: None,
                stats: None,
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("verdicts serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::{test_cplanarity, TestOptions};
    use crate::gen::{generate_instances, GenParams};
    use proptest::prelude::*;

    const SQUARE: &str = r#"{"n":4,"edges":[[0,1],[1,2],[2,3],[3,0]],
        "rotation":[[0,7],[1,2],[3,4],[5,6]],"tree":[[0,2],[1,3]]}"#;

    #[test]
    fn square_parses() {
        let cg = parse_instance(SQUARE).unwrap();
        assert_eq!(cg.graph().num_faces(), 2);
        assert_eq!(cg.tree().clusters().count(), 2);
    }

    #[test]
    fn missing_tree_means_no_clusters() {
        let cg = parse_instance(r#"{"n":2,"edges":[[0,1]],"rotation":[[0],[1]]}"#).unwrap();
        assert_eq!(cg.tree().clusters().count(), 0);
    }

    #[test]
    fn malformed_rotation_is_rejected() {
        let bad = r#"{"n":3,"edges":[[0,1],[1,2]],"rotation":[[0],[1],[0]]}"#;
        assert!(matches!(parse_instance(bad), Err(IoError::Graph(_))));
        assert!(matches!(parse_instance("{"), Err(IoError::Json(_))));
    }

    #[test]
    fn verdict_round_trips() {
        let cg = parse_instance(SQUARE).unwrap();
        let v = test_cplanarity(&cg, &TestOptions { witness: true, ..TestOptions::default() }).unwrap();
        let j = VerdictJson::from_verdict(&v);
        assert_eq!(j.witness.as_ref().unwrap().len(), 2);
        let back: VerdictJson = serde_json::from_str(&j.to_json()).unwrap();
        assert_eq!(back, j);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn instances_round_trip(seed in 0u64..1000, flat in any::<bool>()) {
            let p = GenParams { flat, ..GenParams::default() };
            let cg = &generate_instances(&p, 1, seed)[0];
            let back = parse_instance(&instance_to_json(cg)).unwrap();
            prop_assert_eq!(&back, cg);
        }
    }
}
