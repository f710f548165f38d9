//! Clustered graphs: an embedded graph plus a cluster inclusion tree.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embedding::{EmbeddedGraph, FaceId, Vertex};

/// Node of the cluster tree. Ids `0..n` are the leaves (graph vertices);
/// clusters and the root have ids `n` and above.
pub type NodeId = usize;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CGraphError {
    #[error("cluster tree leaves do not match graph vertices: {0}")]
    LeafMismatch(String),
    #[error("malformed cluster tree: {0}")]
    MalformedTree(String),
    #[error("underlying graph is disconnected")]
    DisconnectedUnderlyingGraph,
    #[error("edge {0} is a self-loop")]
    SelfLoop(usize),
    #[error("unknown face {0}")]
    UnknownFace(FaceId),
}

/// Nested-array description of a cluster tree. The outermost array is the
/// root; integers are vertices; inner arrays are clusters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeSpec {
    Leaf(usize),
    Node(Vec<TreeSpec>),
}

impl TreeSpec {
    /// Flat tree with one cluster per block of `clusters`.
    pub fn flat(clusters: &[Vec<usize>]) -> TreeSpec {
        TreeSpec::Node(
            clusters
                .iter()
                .map(|c| TreeSpec::Node(c.iter().map(|&v| TreeSpec::Leaf(v)).collect()))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterTree {
    n: usize,
    root: NodeId,
    parent: Vec<NodeId>,
    children: Vec<Vec<NodeId>>,
    depth: Vec<usize>,
    size: Vec<usize>,
    leaves: Vec<Vec<Vertex>>,
    flat: bool,
}

enum Tmp {
    Leaf(usize),
    Node(Vec<Tmp>),
}

impl ClusterTree {
    pub fn from_spec(n: usize, spec: &TreeSpec) -> Result<ClusterTree, CGraphError> {
        let top = match spec {
            TreeSpec::Node(c) => c,
            TreeSpec::Leaf(_) => {
                return Err(CGraphError::MalformedTree("top level must be an array".into()))
            }
        };
        fn conv(s: &TreeSpec, is_root: bool) -> Result<Tmp, CGraphError> {
            match s {
                TreeSpec::Leaf(v) => Ok(Tmp::Leaf(*v)),
                TreeSpec::Node(c) => {
                    if c.is_empty() {
                        return Err(CGraphError::MalformedTree("empty cluster".into()));
                    }
                    let mut kids = c
                        .iter()
                        .map(|x| conv(x, false))
                        .collect::<Result<Vec<_>, _>>()?;
                    if !is_root && kids.len() == 1 && matches!(kids[0], Tmp::Node(_)) {
                        return Ok(kids.pop().unwrap());
                    }
                    Ok(Tmp::Node(kids))
                }
            }
        }
        if top.is_empty() {
            return Err(CGraphError::MalformedTree("empty root".into()));
        }
        let tmp = conv(spec, true)?;
        let mut t = ClusterTree {
            n,
            root: n,
            parent: vec![NONE; n],
            children: vec![Vec::new(); n],
            depth: vec![0; n],
            size: vec![1; n],
            leaves: (0..n).map(|v| vec![v]).collect(),
            flat: false,
        };
        let mut seen = vec![false; n];
        // preorder numbering of internal nodes
        fn place(
            t: &mut ClusterTree,
            node: &Tmp,
            parent: NodeId,
            depth: usize,
            seen: &mut [bool],
        ) -> Result<NodeId, CGraphError> {
            match node {
                Tmp::Leaf(v) => {
                    let v = *v;
                    if v >= t.n {
                        return Err(CGraphError::LeafMismatch(format!("vertex {v} out of range")));
                    }
                    if seen[v] {
                        return Err(CGraphError::LeafMismatch(format!("vertex {v} appears twice")));
                    }
                    seen[v] = true;
                    t.parent[v] = parent;
                    t.depth[v] = depth;
                    Ok(v)
                }
                Tmp::Node(kids) => {
                    let id = t.parent.len();
                    t.parent.push(parent);
                    t.children.push(Vec::new());
                    t.depth.push(depth);
                    t.size.push(0);
                    t.leaves.push(Vec::new());
                    for k in kids {
                        let c = place(t, k, id, depth + 1, seen)?;
                        t.children[id].push(c);
                    }
                    Ok(id)
                }
            }
        }
        place(&mut t, &tmp, NONE, 0, &mut seen)?;
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(CGraphError::LeafMismatch(format!("vertex {v} missing from tree")));
        }
        // sizes and leaf lists, children after parents in id order
        for id in (n..t.parent.len()).rev() {
            let mut lv = Vec::new();
            for &c in &t.children[id] {
                lv.extend_from_slice(&t.leaves[c]);
            }
            lv.sort_unstable();
            t.size[id] = lv.len();
            t.leaves[id] = lv;
        }
        t.flat = (0..n).all(|v| t.depth[v] == 2);
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn num_nodes(&self) -> usize {
        self.parent.len()
    }

    /// Cluster ids, excluding the root.
    pub fn clusters(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.n + 1..self.parent.len()
    }

    pub fn parent(&self, x: NodeId) -> Option<NodeId> {
        let p = self.parent[x];
        (p != NONE).then_some(p)
    }

    pub fn children(&self, x: NodeId) -> &[NodeId] {
        &self.children[x]
    }

    pub fn depth(&self, x: NodeId) -> usize {
        self.depth[x]
    }

    /// |V_x|: number of vertices below `x`.
    pub fn size(&self, x: NodeId) -> usize {
        self.size[x]
    }

    /// Sorted vertices below `x`.
    pub fn vertices(&self, x: NodeId) -> &[Vertex] {
        &self.leaves[x]
    }

    pub fn is_flat(&self) -> bool {
        self.flat
    }

    pub fn is_cluster(&self, x: NodeId) -> bool {
        x > self.n && x < self.parent.len()
    }

    pub fn lca(&self, mut a: NodeId, mut b: NodeId) -> NodeId {
        while self.depth[a] > self.depth[b] {
            a = self.parent[a];
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b];
        }
        while a != b {
            a = self.parent[a];
            b = self.parent[b];
        }
        a
    }

    /// Deepest common ancestor of a nonempty vertex set. For a single vertex
    /// this is its parent.
    pub fn lca_set(&self, s: &[Vertex]) -> NodeId {
        assert!(!s.is_empty(), "lca of an empty set");
        let mut a = self.parent[s[0]];
        for &v in &s[1..] {
            a = self.lca(a, v);
        }
        a
    }

    /// True if `a` is `x` or an ancestor of `x`.
    pub fn is_ancestor(&self, a: NodeId, mut x: NodeId) -> bool {
        while self.depth[x] > self.depth[a] {
            x = self.parent[x];
        }
        x == a
    }

    /// True if `v` lies in cluster `c`.
    pub fn contains(&self, c: NodeId, v: Vertex) -> bool {
        self.is_ancestor(c, v)
    }

    /// Non-root clusters containing `v`, deepest first.
    pub fn chain(&self, v: Vertex) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut x = self.parent[v];
        while x != self.root {
            out.push(x);
            x = self.parent[x];
        }
        out
    }

    /// Nested-array description of this tree.
    pub fn to_spec(&self) -> TreeSpec {
        fn go(t: &ClusterTree, x: NodeId) -> TreeSpec {
            if x < t.n {
                TreeSpec::Leaf(x)
            } else {
                TreeSpec::Node(t.children[x].iter().map(|&c| go(t, c)).collect())
            }
        }
        go(self, self.root)
    }
}

/// A candidate saturating edge inside `face`, attributed to the deepest
/// cluster containing both endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SaturatingEdge {
    pub u: Vertex,
    pub v: Vertex,
    pub face: FaceId,
    pub cluster: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusteredGraph {
    graph: EmbeddedGraph,
    tree: ClusterTree,
}

impl ClusteredGraph {
    pub fn new(graph: EmbeddedGraph, tree: ClusterTree) -> Result<Self, CGraphError> {
        if tree.n() != graph.n() {
            return Err(CGraphError::LeafMismatch(format!(
                "tree has {} leaves, graph has {} vertices",
                tree.n(),
                graph.n()
            )));
        }
        if let Some(e) = graph.edges().iter().position(|&(u, v)| u == v) {
            return Err(CGraphError::SelfLoop(e));
        }
        Ok(ClusteredGraph { graph, tree })
    }

    pub fn from_spec(graph: EmbeddedGraph, spec: &TreeSpec) -> Result<Self, CGraphError> {
        let tree = ClusterTree::from_spec(graph.n(), spec)?;
        ClusteredGraph::new(graph, tree)
    }

    pub fn graph(&self) -> &EmbeddedGraph {
        &self.graph
    }

    pub fn tree(&self) -> &ClusterTree {
        &self.tree
    }

    pub fn is_flat(&self) -> bool {
        self.tree.is_flat()
    }

    pub fn lca_cluster(&self, s: &[Vertex]) -> NodeId {
        self.tree.lca_set(s)
    }

    /// True if `u` and `v` share a non-root cluster.
    pub fn same_cluster(&self, u: Vertex, v: Vertex) -> bool {
        self.tree.lca(u, v) != self.tree.root()
    }

    /// Candidate saturating edges grouped by face (index = face id).
    pub fn candidate_saturating_edges(&self) -> Vec<Vec<SaturatingEdge>> {
        let g = &self.graph;
        (0..g.num_faces())
            .map(|f| {
                let mut vs = g.face_vertices(f);
                vs.sort_unstable();
                vs.dedup();
                let mut out = Vec::new();
                for i in 0..vs.len() {
                    for j in i + 1..vs.len() {
                        let (u, v) = (vs[i], vs[j]);
                        let c = self.tree.lca(u, v);
                        if c != self.tree.root() && !g.has_edge(u, v) {
                            out.push(SaturatingEdge { u, v, face: f, cluster: c });
                        }
                    }
                }
                out
            })
            .collect()
    }

    /// Faces that may serve as the outer face without creating a hole.
    pub fn hole_free_faces(&self) -> Vec<FaceId> {
        let g = &self.graph;
        let nf = g.num_faces();
        let mut allowed = vec![true; nf];
        for c in self.tree.clusters() {
            let region = self.regions_outside(c);
            let mut seen_region = NONE;
            let mut ok = true;
            for x in 0..g.n() {
                if self.tree.contains(c, x) {
                    continue;
                }
                let r = region[g.faces().face_of(g.rotation(x)[0])];
                if seen_region == NONE {
                    seen_region = r;
                } else if seen_region != r {
                    ok = false;
                    break;
                }
            }
            if !ok {
                return Vec::new();
            }
            if seen_region != NONE {
                for f in 0..nf {
                    if region[f] != seen_region {
                        allowed[f] = false;
                    }
                }
            }
        }
        (0..nf).filter(|&f| allowed[f]).collect()
    }

    /// Labels each face by its region of the plane minus `G[V_c]`.
    fn regions_outside(&self, c: NodeId) -> Vec<usize> {
        let g = &self.graph;
        let mut dsu = Dsu::new(g.num_faces());
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            if !(self.tree.contains(c, u) && self.tree.contains(c, v)) {
                dsu.union(g.faces().face_of(2 * e), g.faces().face_of(2 * e + 1));
            }
        }
        (0..g.num_faces()).map(|f| dsu.find(f)).collect()
    }

    /// Whether no cluster cycle encloses a foreign vertex when `outer` is the
    /// outer face.
    pub fn check_hole_free(&self, outer: FaceId) -> Result<bool, CGraphError> {
        if outer >= self.graph.num_faces() {
            return Err(CGraphError::UnknownFace(outer));
        }
        Ok(self.hole_free_faces().contains(&outer))
    }

    pub fn exists_hole_free_face(&self) -> Option<FaceId> {
        self.hole_free_faces().first().copied()
    }

    /// Every non-root cluster induces a connected subgraph.
    pub fn is_c_connected(&self) -> bool {
        clusters_connected(&self.tree, self.graph.n(), self.graph.edges())
    }
}

/// Checks that every non-root cluster induces a connected subgraph of the
/// graph with the given edge list.
pub fn clusters_connected(tree: &ClusterTree, n: usize, edges: &[(Vertex, Vertex)]) -> bool {
    let mut dsu = Dsu::new(n);
    for c in tree.clusters() {
        for &(u, v) in edges {
            if tree.contains(c, u) && tree.contains(c, v) {
                dsu.union(u, v);
            }
        }
        let vs = tree.vertices(c);
        let r = dsu.find(vs[0]);
        if vs.iter().any(|&v| dsu.find(v) != r) {
            return false;
        }
        dsu.reset();
    }
    true
}

/// Plain union-find with path halving.
#[derive(Debug, Clone)]
pub struct Dsu {
    p: Vec<usize>,
}

impl Dsu {
    pub fn new(n: usize) -> Dsu {
        Dsu { p: (0..n).collect() }
    }

    pub fn reset(&mut self) {
        for (i, p) in self.p.iter_mut().enumerate() {
            *p = i;
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.p[x] != x {
            self.p[x] = self.p[self.p[x]];
            x = self.p[x];
        }
        x
    }

    /// Returns true if the sets were distinct.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if a < b {
            self.p[b] = a;
        } else {
            self.p[a] = b;
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::EmbeddedGraph;

    fn cycle(k: usize) -> EmbeddedGraph {
        let edges: Vec<_> = (0..k).map(|i| (i, (i + 1) % k)).collect();
        let rotation = (0..k)
            .map(|i| vec![2 * i, 2 * ((i + k - 1) % k) + 1])
            .collect();
        EmbeddedGraph::new(k, edges, rotation).unwrap()
    }

    /// Wheel with rim 0..4 and hub 4.
    pub(crate) fn wheel4() -> EmbeddedGraph {
        EmbeddedGraph::from_adjacency(&[
            vec![1, 4, 3],
            vec![2, 4, 0],
            vec![3, 4, 1],
            vec![0, 4, 2],
            vec![3, 0, 1, 2],
        ])
        .unwrap()
    }

    /// Wheel plus vertex 5 outside the rim, adjacent to 0 and 1.
    pub(crate) fn wheel4_outer() -> EmbeddedGraph {
        EmbeddedGraph::from_adjacency(&[
            vec![5, 1, 4, 3],
            vec![2, 4, 0, 5],
            vec![3, 4, 1],
            vec![0, 4, 2],
            vec![3, 0, 1, 2],
            vec![0, 1],
        ])
        .unwrap()
    }

    #[test]
    fn build_examples() {
        let c = ClusteredGraph::from_spec(cycle(4), &TreeSpec::flat(&[vec![0, 2], vec![1, 3]])).unwrap();
        assert!(c.is_flat());
        let spec: TreeSpec = serde_json::from_str("[[0,1],2]").unwrap();
        let c = ClusteredGraph::from_spec(cycle(3), &spec).unwrap();
        assert!(!c.is_flat());
        let spec: TreeSpec = serde_json::from_str("[[0,1]]").unwrap();
        assert!(matches!(
            ClusteredGraph::from_spec(cycle(3), &spec),
            Err(CGraphError::LeafMismatch(_))
        ));
    }

    #[test]
    fn normalization_contracts_unary_chains() {
        let spec: TreeSpec = serde_json::from_str("[[[[0,1]]],[2]]").unwrap();
        let t = ClusterTree::from_spec(3, &spec).unwrap();
        assert!(t.is_flat());
        assert_eq!(t.num_nodes(), 3 + 3);
        let spec: TreeSpec = serde_json::from_str("[[0,1,2]]").unwrap();
        let t = ClusterTree::from_spec(3, &spec).unwrap();
        assert!(t.is_flat());
    }

    #[test]
    fn lca_examples() {
        let c = ClusteredGraph::from_spec(cycle(4), &TreeSpec::flat(&[vec![0, 2], vec![1, 3]])).unwrap();
        let t = c.tree();
        assert_eq!(c.lca_cluster(&[1]), t.parent(1).unwrap());
        assert_eq!(c.lca_cluster(&[0, 2]), t.parent(0).unwrap());
        assert_eq!(c.lca_cluster(&[0, 1]), t.root());
    }

    #[test]
    fn candidate_examples() {
        let c = ClusteredGraph::from_spec(cycle(4), &TreeSpec::flat(&[vec![0, 2], vec![1, 3]])).unwrap();
        let cand = c.candidate_saturating_edges();
        assert_eq!(cand.iter().map(Vec::len).sum::<usize>(), 4);
        let c = ClusteredGraph::from_spec(cycle(3), &TreeSpec::flat(&[vec![0, 1, 2]])).unwrap();
        assert_eq!(c.candidate_saturating_edges().iter().map(Vec::len).sum::<usize>(), 0);
        let c = ClusteredGraph::from_spec(cycle(4), &TreeSpec::flat(&[vec![0, 1], vec![2, 3]])).unwrap();
        assert_eq!(c.candidate_saturating_edges().iter().map(Vec::len).sum::<usize>(), 0);
    }

    #[test]
    fn hole_free_examples() {
        let c = ClusteredGraph::from_spec(cycle(4), &TreeSpec::flat(&[vec![0, 2], vec![1, 3]])).unwrap();
        assert!(c.check_hole_free(0).unwrap() && c.check_hole_free(1).unwrap());
        // the hub is enclosed only when the outer face lies outside the rim
        let w = ClusteredGraph::from_spec(wheel4(), &TreeSpec::flat(&[vec![0, 1, 2, 3], vec![4]])).unwrap();
        assert_eq!(w.hole_free_faces().len(), 4);
        let w = ClusteredGraph::from_spec(
            wheel4_outer(),
            &TreeSpec::flat(&[vec![0, 1, 2, 3], vec![4], vec![5]]),
        )
        .unwrap();
        assert_eq!(w.exists_hole_free_face(), None);
        for f in 0..w.graph().num_faces() {
            assert!(!w.check_hole_free(f).unwrap());
        }
        let s = ClusteredGraph::from_spec(wheel4(), &TreeSpec::flat(&[vec![0, 1, 2, 3, 4]])).unwrap();
        assert_eq!(s.hole_free_faces().len(), s.graph().num_faces());
        assert!(matches!(s.check_hole_free(99), Err(CGraphError::UnknownFace(99))));
    }

    #[test]
    fn c_connectivity() {
        let c = ClusteredGraph::from_spec(cycle(4), &TreeSpec::flat(&[vec![0, 1], vec![2, 3]])).unwrap();
        assert!(c.is_c_connected());
        let c = ClusteredGraph::from_spec(cycle(4), &TreeSpec::flat(&[vec![0, 2], vec![1, 3]])).unwrap();
        assert!(!c.is_c_connected());
    }
}
