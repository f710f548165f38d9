use std::collections::BTreeMap;
use std::fmt;

use super::recursive::RecursiveNcPartition;
use crate::cgraph::{ClusterTree, NodeId};
use crate::embedding::Vertex;

/// Connectivity of a boundary inside every non-root cluster that meets it.
///
/// Level `c` partitions the boundary vertices of `c` by the component of the
/// processed subgraph induced by `c` that contains them. Unlike the
/// lca-labelled laminar family this form keeps every level explicit, so two
/// levels with identical sets do not collapse.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LayeredPartition {
    ground: Vec<Vertex>,
    levels: Vec<(NodeId, Vec<Vec<Vertex>>)>,
}

impl LayeredPartition {
    /// `comp(c, v)` returns a component id of `v` inside cluster `c`; ids
    /// only need to be consistent per cluster.
    pub fn from_components(ground: &[Vertex], tree: &ClusterTree, mut comp: impl FnMut(NodeId, Vertex) -> usize) -> Self {
        let mut by: BTreeMap<NodeId, BTreeMap<usize, Vec<Vertex>>> = BTreeMap::new();
        for &v in ground {
            for c in tree.chain(v) {
                if c == tree.root() {
                    continue;
                }
                by.entry(c).or_default().entry(comp(c, v)).or_default().push(v);
            }
        }
        let levels = by
            .into_iter()
            .map(|(c, m)| {
                let mut parts: Vec<Vec<Vertex>> = m
                    .into_values()
                    .map(|mut p| {
                        p.sort_unstable();
                        p
                    })
                    .collect();
                parts.sort();
                (c, parts)
            })
            .collect();
        LayeredPartition {
            ground: ground.to_vec(),
            levels,
        }
    }

    pub fn ground(&self) -> &[Vertex] {
        &self.ground
    }

    pub fn levels(&self) -> &[(NodeId, Vec<Vec<Vertex>>)] {
        &self.levels
    }

    pub fn level(&self, c: NodeId) -> Option<&[Vec<Vertex>]> {
        self.levels
            .binary_search_by_key(&c, |(x, _)| *x)
            .ok()
            .map(|i| self.levels[i].1.as_slice())
    }

    /// Finer levels refine coarser ones.
    pub fn is_nested(&self, tree: &ClusterTree) -> bool {
        for (c, parts) in &self.levels {
            let Some(up) = tree.parent(*c).filter(|&p| p != tree.root()) else {
                continue;
            };
            let Some(outer) = self.level(up) else {
                return false;
            };
            for p in parts {
                if !outer.iter().any(|q| p.iter().all(|v| q.contains(v))) {
                    return false;
                }
            }
        }
        true
    }

    /// The lca-labelled laminar family with the same sets.
    pub fn to_recursive(&self, tree: &ClusterTree) -> RecursiveNcPartition {
        let parts: Vec<Vec<Vertex>> = self.levels.iter().flat_map(|(_, p)| p.iter().cloned()).collect();
        RecursiveNcPartition::new(&self.ground, &parts, tree).expect("levels lie inside the ground")
    }
}

impl fmt::Display for LayeredPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.ground)?;
        for (c, parts) in &self.levels {
            write!(f, " c{c}:{parts:?}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgraph::TreeSpec;

    #[test]
    fn identical_levels_stay_distinct() {
        let spec: TreeSpec = serde_json::from_str("[[[0,1],2],3]").unwrap();
        let t = ClusterTree::from_spec(4, &spec).unwrap();
        let inner = t.parent(0).unwrap();
        let outer = t.parent(inner).unwrap();
        let lp = LayeredPartition::from_components(&[0, 1, 3], &t, |_, v| v.min(1));
        assert_eq!(lp.levels().len(), 2);
        assert_eq!(lp.level(inner).unwrap(), &[vec![0], vec![1]]);
        assert_eq!(lp.level(outer).unwrap(), &[vec![0], vec![1]]);
        assert!(lp.is_nested(&t));
        assert_eq!(lp.to_recursive(&t).parts().len(), 2);
    }

    #[test]
    fn nesting_violation_detected() {
        let spec: TreeSpec = serde_json::from_str("[[[0,1],2]]").unwrap();
        let t = ClusterTree::from_spec(3, &spec).unwrap();
        let inner = t.parent(0).unwrap();
        let lp = LayeredPartition::from_components(&[0, 1, 2], &t, |c, v| if c == inner { 0 } else { v });
        assert!(!lp.is_nested(&t));
    }
}
