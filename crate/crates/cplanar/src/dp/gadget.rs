//! Edge-to-cluster transformation for independent flat instances.

use thiserror::Error;

use crate::cgraph::{CGraphError, ClusteredGraph, TreeSpec};
use crate::embedding::{EdgeId, EmbeddedGraph, GraphError, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GadgetError {
    #[error("instance is not flat or some cluster contains an edge")]
    NotIndependentFlat,
    #[error("edge {0} does not exist")]
    NoSuchEdge(EdgeId),
    #[error("edge {0} is a bridge; removing it disconnects the graph")]
    Bridge(EdgeId),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    CGraph(#[from] CGraphError),
}

/// The underlying edge list after replacing edge `e = (u, v)` by the two
/// pendant edges `(u, u_e)` and `(v_e, v)` with `u_e = n`, `v_e = n + 1`.
pub fn gadget_edges(n: usize, edges: &[(Vertex, Vertex)], e: EdgeId) -> (usize, Vec<(Vertex, Vertex)>) {
    let (u, v) = edges[e];
    let mut out = edges.to_vec();
    out[e] = (u, n);
    out.push((n + 1, v));
    (n + 2, out)
}

/// Subdivides `e` twice, deletes the middle edge and puts the two new
/// vertices into a fresh cluster below the root.
pub fn gadget_edge_to_cluster(cg: &ClusteredGraph, e: EdgeId) -> Result<ClusteredGraph, GadgetError> {
    let g = cg.graph();
    let tree = cg.tree();
    if !tree.is_flat() || g.edges().iter().any(|&(a, b)| tree.lca(a, b) != tree.root()) {
        return Err(GadgetError::NotIndependentFlat);
    }
    if e >= g.m() {
        return Err(GadgetError::NoSuchEdge(e));
    }
    if g.blocks().blocks.iter().any(|b| b.len() == 1 && b[0] == e) {
        return Err(GadgetError::Bridge(e));
    }
    let n = g.n();
    let m = g.m();
    let (_, edges) = gadget_edges(n, g.edges(), e);
    let (_, v) = g.edge(e);
    let mut rotation = g.rotations().to_vec();
    for d in rotation[v].iter_mut() {
        if *d == 2 * e + 1 {
            *d = 2 * m + 1;
        }
    }
    rotation.push(vec![2 * e + 1]);
    rotation.push(vec![2 * m]);
    let ng = EmbeddedGraph::new(n + 2, edges, rotation)?;
    let TreeSpec::Node(mut top) = tree.to_spec() else {
        unreachable!("root is a node")
    };
    top.push(TreeSpec::Node(vec![TreeSpec::Leaf(n), TreeSpec::Leaf(n + 1)]));
    Ok(ClusteredGraph::from_spec(ng, &TreeSpec::Node(top))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgraph::ClusterTree;

    #[test]
    fn star_forest_edges_become_star_collection() {
        // two stars centred at 0 and 4
        let edges = vec![(0, 1), (0, 2), (0, 3), (4, 5), (4, 6)];
        let mut n = 7;
        let mut cur = edges.clone();
        for e in 0..edges.len() {
            let (nn, ne) = gadget_edges(n, &cur, e);
            n = nn;
            cur = ne;
        }
        // every component is a single edge: a star with one leaf
        let mut deg = vec![0; n];
        for &(a, b) in &cur {
            deg[a] += 1;
            deg[b] += 1;
        }
        assert_eq!(cur.len(), 10);
        assert!(cur.iter().all(|&(a, b)| deg[a].min(deg[b]) == 1));
    }

    #[test]
    fn cycle_becomes_tree() {
        let g = EmbeddedGraph::from_adjacency(&[vec![1, 3], vec![2, 0], vec![3, 1], vec![0, 2]]).unwrap();
        let t = ClusterTree::from_spec(4, &TreeSpec::flat(&[vec![0, 2], vec![1, 3]])).unwrap();
        let cg = ClusteredGraph::new(g, t).unwrap();
        let out = gadget_edge_to_cluster(&cg, 0).unwrap();
        assert_eq!(out.graph().n(), 6);
        assert_eq!(out.graph().m(), 5);
        assert_eq!(out.graph().num_faces(), 1);
        assert!(out.is_flat());
        // a tree: every further edge is a bridge
        assert!(matches!(gadget_edge_to_cluster(&out, 1), Err(GadgetError::NotIndependentFlat) | Err(GadgetError::Bridge(_))));
    }

    #[test]
    fn rejects_edge_inside_cluster() {
        let g = EmbeddedGraph::from_adjacency(&[vec![1, 2], vec![2, 0], vec![0, 1]]).unwrap();
        let t = ClusterTree::from_spec(3, &TreeSpec::flat(&[vec![0, 1], vec![2]])).unwrap();
        let cg = ClusteredGraph::new(g, t).unwrap();
        assert_eq!(gadget_edge_to_cluster(&cg, 0), Err(GadgetError::NotIndependentFlat));
    }
}
