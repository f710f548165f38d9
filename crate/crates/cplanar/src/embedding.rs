//! Embedded planar multigraphs given as rotation systems.
//!
//! Edge `i = (u, v)` owns darts `2i` (u to v) and `2i + 1` (v to u). The
//! rotation of a vertex lists the darts leaving it in clockwise order. The
//! face to the right of dart `d` continues with `rot_prev(head(d), rev(d))`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vertex = usize;
pub type Dart = usize;
pub type EdgeId = usize;
pub type FaceId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("malformed rotation system: {0}")]
    MalformedRotation(String),
    #[error("underlying graph is not connected")]
    NotConnected,
    #[error("rotation system is not planar: n - m + f = {euler} (expected 2)")]
    NotPlanarEmbedding { euler: i64 },
}

#[inline]
pub fn rev(d: Dart) -> Dart {
    d ^ 1
}

#[inline]
pub fn edge_of(d: Dart) -> EdgeId {
    d >> 1
}

/// Face walks of an embedding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceSet {
    walks: Vec<Vec<Dart>>,
    face_of: Vec<FaceId>,
}

impl FaceSet {
    pub fn len(&self) -> usize {
        self.walks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walks.is_empty()
    }

    /// Clockwise boundary walk; the face lies to the right of every dart.
    pub fn walk(&self, f: FaceId) -> &[Dart] {
        &self.walks[f]
    }

    pub fn walks(&self) -> &[Vec<Dart>] {
        &self.walks
    }

    /// Face to the right of dart `d`.
    pub fn face_of(&self, d: Dart) -> FaceId {
        self.face_of[d]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddedGraph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    rotation: Vec<Vec<Dart>>,
    rot_pos: Vec<usize>,
    faces: FaceSet,
}

impl EmbeddedGraph {
    /// Validates a rotation system and computes its faces.
    pub fn new(
        n: usize,
        edges: Vec<(Vertex, Vertex)>,
        rotation: Vec<Vec<Dart>>,
    ) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if rotation.len() != n {
            return Err(GraphError::MalformedRotation(format!(
                "expected {} rotation lists, got {}",
                n,
                rotation.len()
            )));
        }
        let m = edges.len();
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(GraphError::MalformedRotation(format!(
                    "edge {i} has an endpoint out of range"
                )));
            }
        }
        let mut rot_pos = vec![usize::MAX; 2 * m];
        for (v, rot) in rotation.iter().enumerate() {
            for (i, &d) in rot.iter().enumerate() {
                if d >= 2 * m {
                    return Err(GraphError::MalformedRotation(format!(
                        "dart {d} at vertex {v} does not exist"
                    )));
                }
                if rot_pos[d] != usize::MAX {
                    return Err(GraphError::MalformedRotation(format!(
                        "dart {d} appears twice"
                    )));
                }
                let (a, b) = edges[d >> 1];
                let tail = if d & 1 == 0 { a } else { b };
                if tail != v {
                    return Err(GraphError::MalformedRotation(format!(
                        "dart {d} listed at vertex {v} but leaves vertex {tail}"
                    )));
                }
                rot_pos[d] = i;
            }
        }
        if let Some(d) = rot_pos.iter().position(|&p| p == usize::MAX) {
            return Err(GraphError::MalformedRotation(format!(
                "dart {d} is missing from the rotation system"
            )));
        }
        let mut g = EmbeddedGraph {
            n,
            edges,
            rotation,
            rot_pos,
            faces: FaceSet {
                walks: Vec::new(),
                face_of: Vec::new(),
            },
        };
        if !g.is_connected() {
            return Err(GraphError::NotConnected);
        }
        g.faces = g.trace_faces();
        let euler = n as i64 - m as i64 + g.faces.len() as i64;
        if euler != 2 {
            return Err(GraphError::NotPlanarEmbedding { euler });
        }
        Ok(g)
    }

    /// Builds a simple graph from clockwise neighbour lists. Edge ids follow
    /// the lexicographic order of `(min, max)` endpoint pairs.
    pub fn from_adjacency(rot: &[Vec<Vertex>]) -> Result<Self, GraphError> {
        let n = rot.len();
        let mut edges: Vec<(Vertex, Vertex)> = Vec::new();
        for (u, r) in rot.iter().enumerate() {
            for &v in r {
                if u < v {
                    edges.push((u, v));
                }
            }
        }
        edges.sort_unstable();
        let dart = |u: Vertex, v: Vertex| -> Result<Dart, GraphError> {
            let key = (u.min(v), u.max(v));
            let e = edges.binary_search(&key).map_err(|_| {
                GraphError::MalformedRotation(format!("edge ({u},{v}) listed on one side only"))
            })?;
            Ok(if u < v { 2 * e } else { 2 * e + 1 })
        };
        let rotation = rot
            .iter()
            .enumerate()
            .map(|(u, r)| r.iter().map(|&v| dart(u, v)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        EmbeddedGraph::new(n, edges, rotation)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> (Vertex, Vertex) {
        self.edges[e]
    }

    pub fn rotation(&self, v: Vertex) -> &[Dart] {
        &self.rotation[v]
    }

    pub fn rotations(&self) -> &[Vec<Dart>] {
        &self.rotation
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.rotation[v].len()
    }

    pub fn tail(&self, d: Dart) -> Vertex {
        let (a, b) = self.edges[d >> 1];
        if d & 1 == 0 {
            a
        } else {
            b
        }
    }

    pub fn head(&self, d: Dart) -> Vertex {
        self.tail(d ^ 1)
    }

    /// Clockwise successor of `d` around its tail.
    pub fn rot_next(&self, d: Dart) -> Dart {
        let rot = &self.rotation[self.tail(d)];
        rot[(self.rot_pos[d] + 1) % rot.len()]
    }

    /// Clockwise predecessor of `d` around its tail.
    pub fn rot_prev(&self, d: Dart) -> Dart {
        let rot = &self.rotation[self.tail(d)];
        rot[(self.rot_pos[d] + rot.len() - 1) % rot.len()]
    }

    /// Next dart along the face to the right of `d`.
    pub fn face_next(&self, d: Dart) -> Dart {
        self.rot_prev(d ^ 1)
    }

    pub fn faces(&self) -> &FaceSet {
        &self.faces
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// Vertices along a face walk, in walk order.
    pub fn face_vertices(&self, f: FaceId) -> Vec<Vertex> {
        self.faces.walk(f).iter().map(|&d| self.tail(d)).collect()
    }

    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.rotation[v].iter().map(move |&d| self.head(d))
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.rotation[u].iter().any(|&d| self.head(d) == v)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &d in &self.rotation[v] {
                let w = self.head(d);
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }

    fn trace_faces(&self) -> FaceSet {
        let dm = 2 * self.m();
        let mut face_of = vec![usize::MAX; dm];
        let mut walks = Vec::new();
        for start in 0..dm {
            if face_of[start] != usize::MAX {
                continue;
            }
            let id = walks.len();
            let mut walk = Vec::new();
            let mut d = start;
            loop {
                face_of[d] = id;
                walk.push(d);
                d = self.face_next(d);
                if d == start {
                    break;
                }
            }
            walks.push(walk);
        }
        if dm == 0 {
            walks.push(Vec::new());
        }
        FaceSet { walks, face_of }
    }

    /// The same graph with every rotation reversed (mirror image).
    pub fn mirror(&self) -> EmbeddedGraph {
        let rotation = self
            .rotation
            .iter()
            .map(|r| r.iter().rev().copied().collect())
            .collect();
        EmbeddedGraph::new(self.n, self.edges.clone(), rotation)
            .expect("mirror of a planar embedding is planar")
    }

    /// Builds the dual embedding. Dual edge `i` is dual to primal edge `i`
    /// and dual dart `d` crosses primal dart `d` from its right face to its
    /// left face.
    pub fn dual(&self) -> EmbeddedGraph {
        let fs = &self.faces;
        let edges = (0..self.m())
            .map(|e| (fs.face_of(2 * e), fs.face_of(2 * e + 1)))
            .collect();
        let rotation = fs.walks.clone();
        EmbeddedGraph::new(fs.len(), edges, rotation).expect("dual of a planar embedding is planar")
    }

    /// Orientation-sensitive canonical encoding; equal codes mean isomorphic
    /// embedded graphs.
    pub fn canonical_code(&self) -> Vec<usize> {
        let dm = 2 * self.m();
        if dm == 0 {
            return vec![self.n];
        }
        let mut best: Option<Vec<usize>> = None;
        for s in 0..dm {
            let code = self.code_from(s);
            if best.as_ref().is_none_or(|b| code < *b) {
                best = Some(code);
            }
        }
        best.unwrap()
    }

    /// Canonical encoding up to mirror image.
    pub fn canonical_code_unoriented(&self) -> Vec<usize> {
        let a = self.canonical_code();
        let b = self.mirror().canonical_code();
        a.min(b)
    }

    /// Vertex visiting orders of every start dart, in either orientation,
    /// that attains the unoriented canonical code. Two orders map the graph
    /// onto itself, so they describe its symmetries.
    pub fn symmetric_orders(&self) -> Vec<Vec<Vertex>> {
        if self.m() == 0 {
            return vec![(0..self.n).collect()];
        }
        let target = self.canonical_code_unoriented();
        let mut out = Vec::new();
        for g in [self.clone(), self.mirror()] {
            for s in 0..2 * g.m() {
                if g.code_from(s) == target {
                    let mut seen = vec![false; g.n];
                    let mut order = Vec::with_capacity(g.n);
                    for d in g.dart_order(s) {
                        let t = g.tail(d);
                        if !seen[t] {
                            seen[t] = true;
                            order.push(t);
                        }
                    }
                    out.push(order);
                }
            }
        }
        out
    }

    fn dart_order(&self, s: Dart) -> Vec<Dart> {
        let mut seen = vec![false; 2 * self.m()];
        let mut order = vec![s];
        seen[s] = true;
        let mut i = 0;
        while i < order.len() {
            let d = order[i];
            for nd in [self.rot_next(d), d ^ 1] {
                if !seen[nd] {
                    seen[nd] = true;
                    order.push(nd);
                }
            }
            i += 1;
        }
        order
    }

    fn code_from(&self, s: Dart) -> Vec<usize> {
        let dm = 2 * self.m();
        let mut label = vec![usize::MAX; dm];
        let mut order = Vec::with_capacity(dm);
        let mut queue = VecDeque::new();
        label[s] = 0;
        order.push(s);
        queue.push_back(s);
        let mut code = Vec::with_capacity(2 * dm + 1);
        code.push(self.n);
        while let Some(d) = queue.pop_front() {
            for nd in [self.rot_next(d), d ^ 1] {
                if label[nd] == usize::MAX {
                    label[nd] = order.len();
                    order.push(nd);
                    queue.push_back(nd);
                }
                code.push(label[nd]);
            }
        }
        code
    }

    /// Cutvertices and blocks (as edge lists) of the graph.
    pub fn blocks(&self) -> BlockStructure {
        block_structure(self.n, &self.edges)
    }

    pub fn is_biconnected(&self) -> bool {
        let b = self.blocks();
        b.cutvertices.is_empty() && (self.n >= 3 || (self.n == 2 && self.m() >= 2))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStructure {
    /// Sorted cutvertices.
    pub cutvertices: Vec<Vertex>,
    /// Blocks as sorted edge-id lists, ordered by smallest edge id.
    pub blocks: Vec<Vec<EdgeId>>,
    /// Block index of each edge.
    pub block_of_edge: Vec<usize>,
}

/// Block-cut decomposition of a connected multigraph (iterative Tarjan).
pub fn block_structure(n: usize, edges: &[(Vertex, Vertex)]) -> BlockStructure {
    let m = edges.len();
    let mut adj: Vec<Vec<(Vertex, EdgeId)>> = vec![Vec::new(); n];
    for (e, &(u, v)) in edges.iter().enumerate() {
        adj[u].push((v, e));
        if u != v {
            adj[v].push((u, e));
        }
    }
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut is_cut = vec![false; n];
    let mut block_of_edge = vec![usize::MAX; m];
    let mut raw_blocks: Vec<Vec<EdgeId>> = Vec::new();
    let mut edge_stack: Vec<EdgeId> = Vec::new();
    let mut time = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        let mut root_children = 0;
        // frame: (vertex, parent edge, next adjacency index)
        let mut stack: Vec<(Vertex, usize, usize)> = vec![(root, usize::MAX, 0)];
        while let Some(&mut (v, pe, ref mut idx)) = stack.last_mut() {
            if *idx < adj[v].len() {
                let (w, e) = adj[v][*idx];
                *idx += 1;
                if e == pe {
                    continue;
                }
                if w == v {
                    // self-loop: its own block
                    if block_of_edge[e] == usize::MAX {
                        block_of_edge[e] = raw_blocks.len();
                        raw_blocks.push(vec![e]);
                    }
                    continue;
                }
                if disc[w] == usize::MAX {
                    edge_stack.push(e);
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    if v == root {
                        root_children += 1;
                    }
                    stack.push((w, e, 0));
                } else if disc[w] < disc[v] {
                    edge_stack.push(e);
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] >= disc[p] {
                        if p != root {
                            is_cut[p] = true;
                        }
                        let id = raw_blocks.len();
                        let mut blk = Vec::new();
                        while let Some(e) = edge_stack.pop() {
                            block_of_edge[e] = id;
                            blk.push(e);
                            if e == pe {
                                break;
                            }
                        }
                        raw_blocks.push(blk);
                    }
                }
            }
        }
        if root_children >= 2 {
            is_cut[root] = true;
        }
    }
    // renumber blocks by smallest edge id
    for b in raw_blocks.iter_mut() {
        b.sort_unstable();
    }
    let mut order: Vec<usize> = (0..raw_blocks.len()).collect();
    order.sort_by_key(|&i| raw_blocks[i][0]);
    let mut new_id = vec![0; raw_blocks.len()];
    for (k, &i) in order.iter().enumerate() {
        new_id[i] = k;
    }
    let blocks = order.iter().map(|&i| raw_blocks[i].clone()).collect();
    for b in block_of_edge.iter_mut() {
        *b = new_id[*b];
    }
    BlockStructure {
        cutvertices: (0..n).filter(|&v| is_cut[v]).collect(),
        blocks,
        block_of_edge,
    }
}

/// A chord to be drawn inside face `face`, joining the tails of the darts at
/// walk positions `a` and `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FaceChord {
    pub face: FaceId,
    pub a: usize,
    pub b: usize,
}

/// Inserts chords into faces. Chords sharing a face must be pairwise
/// non-crossing with respect to walk positions; otherwise the result fails
/// the Euler check and an error is returned. New edges get ids `m, m+1, ..`
/// in the order given.
pub fn insert_chords(g: &EmbeddedGraph, chords: &[FaceChord]) -> Result<EmbeddedGraph, GraphError> {
    let mut edges = g.edges.clone();
    let mut rotation = g.rotation.clone();
    // per (face, corner) list of (distance, new dart)
    let mut at_corner: std::collections::BTreeMap<(FaceId, usize), Vec<(usize, Dart)>> =
        Default::default();
    for c in chords {
        let walk = g.faces.walk(c.face);
        let len = walk.len();
        if c.a >= len || c.b >= len || c.a == c.b {
            return Err(GraphError::MalformedRotation(format!(
                "chord positions ({}, {}) invalid for face {}",
                c.a, c.b, c.face
            )));
        }
        let e = edges.len();
        edges.push((g.tail(walk[c.a]), g.tail(walk[c.b])));
        at_corner
            .entry((c.face, c.a))
            .or_default()
            .push(((c.b + len - c.a) % len, 2 * e));
        at_corner
            .entry((c.face, c.b))
            .or_default()
            .push(((c.a + len - c.b) % len, 2 * e + 1));
    }
    for ((f, p), mut list) in at_corner {
        list.sort_unstable();
        let w = g.faces.walk(f)[p];
        let v = g.tail(w);
        let rot = &mut rotation[v];
        let at = rot.iter().position(|&x| x == w).unwrap();
        for (k, (_, d)) in list.into_iter().enumerate() {
            rot.insert(at + 1 + k, d);
        }
    }
    EmbeddedGraph::new(g.n, edges, rotation)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn cycle(k: usize) -> EmbeddedGraph {
        let edges: Vec<_> = (0..k).map(|i| (i, (i + 1) % k)).collect();
        // at vertex i: dart to i+1 (2i) and dart to i-1 (2(i-1)+1)
        let rotation = (0..k)
            .map(|i| vec![2 * i, 2 * ((i + k - 1) % k) + 1])
            .collect();
        EmbeddedGraph::new(k, edges, rotation).unwrap()
    }

    fn k4() -> EmbeddedGraph {
        // outer triangle 0,1,2 with 3 in the middle
        let edges = vec![(0, 1), (1, 2), (2, 0), (0, 3), (1, 3), (2, 3)];
        let rotation = vec![vec![0, 6, 5], vec![2, 8, 1], vec![4, 10, 3], vec![7, 9, 11]];
        EmbeddedGraph::new(4, edges, rotation).unwrap()
    }

    #[test]
    fn triangle_and_cycles() {
        let t = cycle(3);
        assert_eq!(t.num_faces(), 2);
        assert!(t.faces().walks().iter().all(|w| w.len() == 3));
        let c = cycle(4);
        assert_eq!(c.num_faces(), 2);
        assert!(c.faces().walks().iter().all(|w| w.len() == 4));
    }

    #[test]
    fn k4_faces_and_self_duality() {
        let g = k4();
        assert_eq!(g.num_faces(), 4);
        assert!(g.faces().walks().iter().all(|w| w.len() == 3));
        let d = g.dual();
        assert_eq!(d.n(), 4);
        assert_eq!(d.canonical_code_unoriented(), g.canonical_code_unoriented());
    }

    #[test]
    fn k4_genus_one_rejected() {
        let g = k4();
        let mut rot = g.rotations().to_vec();
        rot[3].swap(0, 1);
        let err = EmbeddedGraph::new(4, g.edges().to_vec(), rot).unwrap_err();
        assert!(matches!(err, GraphError::NotPlanarEmbedding { .. }));
    }

    #[test]
    fn malformed_and_disconnected() {
        let err = EmbeddedGraph::new(2, vec![(0, 1)], vec![vec![0], vec![0]]).unwrap_err();
        assert!(matches!(err, GraphError::MalformedRotation(_)));
        let err = EmbeddedGraph::new(3, vec![(0, 1)], vec![vec![0], vec![1], vec![]]).unwrap_err();
        assert_eq!(err, GraphError::NotConnected);
    }

    #[test]
    fn small_duals() {
        let d = cycle(3).dual();
        assert_eq!((d.n(), d.m()), (2, 3));
        let d = cycle(4).dual();
        assert_eq!((d.n(), d.m()), (2, 4));
    }

    #[test]
    fn blocks_examples() {
        // two triangles sharing vertex 2
        let edges = vec![(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)];
        let b = block_structure(5, &edges);
        assert_eq!(b.cutvertices, vec![2]);
        assert_eq!(b.blocks.len(), 2);
        let b = block_structure(4, &cycle(4).edges);
        assert!(b.cutvertices.is_empty());
        assert_eq!(b.blocks.len(), 1);
        let b = block_structure(3, &[(0, 1), (1, 2)]);
        assert_eq!(b.cutvertices, vec![1]);
        assert_eq!(b.blocks.len(), 2);
    }

    #[test]
    fn chord_insertion_splits_faces() {
        let c = cycle(6);
        let f = 0;
        let chords = [
            FaceChord { face: f, a: 0, b: 2 },
            FaceChord { face: f, a: 0, b: 4 },
            FaceChord { face: f, a: 2, b: 4 },
        ];
        let g = insert_chords(&c, &chords).unwrap();
        assert_eq!(g.num_faces(), 5);
        let crossing = [FaceChord { face: f, a: 0, b: 3 }, FaceChord { face: f, a: 1, b: 4 }];
        assert!(insert_chords(&c, &crossing).is_err());
    }

    #[test]
    fn dual_of_dual_is_isomorphic() {
        for g in [cycle(5), k4()] {
            let dd = g.dual().dual();
            assert_eq!(dd.canonical_code(), g.canonical_code());
        }
    }
}
