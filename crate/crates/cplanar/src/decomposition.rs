//! Carving decompositions of dual graphs.
//!
//! A decomposition is a rooted binary tree whose leaves are the faces of the
//! primal graph. Each bag `b` owns the faces below it; its cut-set is the set
//! of dual edges leaving that face set.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::embedding::{Dart, EmbeddedGraph, FaceId, Vertex};

pub type BagId = usize;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecompError {
    #[error("decomposition leaves do not match the dual vertices: {0}")]
    LeafMismatch(String),
    #[error("search space {needed} exceeds the budget {budget}")]
    TooLarge { needed: f64, budget: f64 },
    #[error("cut-set of bag {0} is not a simple cycle in the primal graph")]
    NotACycle(BagId),
    #[error("cannot parse decomposition: {0}")]
    Parse(String),
    #[error("decomposition is not bond-carving")]
    NotBond,
}

/// Nested binary tree over face ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Tree {
    Leaf(FaceId),
    Node(Box<Tree>, Box<Tree>),
}

impl Tree {
    pub fn node(a: Tree, b: Tree) -> Tree {
        Tree::Node(Box::new(a), Box::new(b))
    }

    /// Replaces every leaf label through `f`, which may return a subtree.
    pub fn map_leaves(&self, f: &mut impl FnMut(FaceId) -> Tree) -> Tree {
        match self {
            Tree::Leaf(x) => f(*x),
            Tree::Node(a, b) => Tree::node(a.map_leaves(f), b.map_leaves(f)),
        }
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf(x) => write!(f, "{x}"),
            Tree::Node(a, b) => write!(f, "({a},{b})"),
        }
    }
}

impl std::str::FromStr for Tree {
    type Err = DecompError;

    fn from_str(s: &str) -> Result<Tree, DecompError> {
        let toks: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let t = parse_tree(&toks, &mut pos)?;
        if pos != toks.len() {
            return Err(DecompError::Parse(format!("trailing input at {pos}")));
        }
        Ok(t)
    }
}

fn parse_tree(t: &[char], pos: &mut usize) -> Result<Tree, DecompError> {
    match t.get(*pos) {
        Some('(') => {
            *pos += 1;
            let a = parse_tree(t, pos)?;
            if t.get(*pos) != Some(&',') {
                return Err(DecompError::Parse(format!("expected ',' at {pos}")));
            }
            *pos += 1;
            let b = parse_tree(t, pos)?;
            if t.get(*pos) != Some(&')') {
                return Err(DecompError::Parse(format!("expected ')' at {pos}")));
            }
            *pos += 1;
            Ok(Tree::node(a, b))
        }
        Some(c) if c.is_ascii_digit() => {
            let start = *pos;
            while t.get(*pos).is_some_and(|c| c.is_ascii_digit()) {
                *pos += 1;
            }
            let s: String = t[start..*pos].iter().collect();
            s.parse()
                .map(Tree::Leaf)
                .map_err(|e| DecompError::Parse(e.to_string()))
        }
        _ => Err(DecompError::Parse(format!("unexpected token at {pos}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Bag {
    children: Option<(BagId, BagId)>,
    face: Option<FaceId>,
    parent: Option<BagId>,
    /// range into `leaf_order`
    lo: usize,
    hi: usize,
}

/// A carving decomposition with bags numbered in post-order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarvingDecomposition {
    bags: Vec<Bag>,
    leaf_order: Vec<FaceId>,
    leaf_pos: Vec<usize>,
    leaf_bag: Vec<BagId>,
}

impl CarvingDecomposition {
    /// Builds from a tree whose leaves must be exactly `0..num_faces`.
    pub fn from_tree(tree: &Tree, num_faces: usize) -> Result<Self, DecompError> {
        let mut d = CarvingDecomposition {
            bags: Vec::new(),
            leaf_order: Vec::new(),
            leaf_pos: vec![usize::MAX; num_faces],
            leaf_bag: vec![usize::MAX; num_faces],
        };
        // iterative post-order to survive deep caterpillars
        enum Step<'a> {
            Enter(&'a Tree),
            Exit,
        }
        let mut stack = vec![Step::Enter(tree)];
        let mut results: Vec<BagId> = Vec::new();
        let mut los: Vec<usize> = Vec::new();
        while let Some(step) = stack.pop() {
            match step {
                Step::Enter(Tree::Leaf(f)) => {
                    let f = *f;
                    if f >= num_faces || d.leaf_pos[f] != usize::MAX {
                        return Err(DecompError::LeafMismatch(format!("face {f} invalid or repeated")));
                    }
                    let id = d.bags.len();
                    d.leaf_pos[f] = d.leaf_order.len();
                    d.leaf_bag[f] = id;
                    d.bags.push(Bag {
                        children: None,
                        face: Some(f),
                        parent: None,
                        lo: d.leaf_order.len(),
                        hi: d.leaf_order.len() + 1,
                    });
                    d.leaf_order.push(f);
                    results.push(id);
                }
                Step::Enter(Tree::Node(a, b)) => {
                    los.push(d.leaf_order.len());
                    stack.push(Step::Exit);
                    stack.push(Step::Enter(b));
                    stack.push(Step::Enter(a));
                }
                Step::Exit => {
                    let r = results.pop().unwrap();
                    let l = results.pop().unwrap();
                    let id = d.bags.len();
                    d.bags[l].parent = Some(id);
                    d.bags[r].parent = Some(id);
                    d.bags.push(Bag {
                        children: Some((l, r)),
                        face: None,
                        parent: None,
                        lo: los.pop().unwrap(),
                        hi: d.leaf_order.len(),
                    });
                    results.push(id);
                }
            }
        }
        if d.leaf_order.len() != num_faces {
            return Err(DecompError::LeafMismatch(format!(
                "{} leaves for {} faces",
                d.leaf_order.len(),
                num_faces
            )));
        }
        Ok(d)
    }

    pub fn parse(s: &str, num_faces: usize) -> Result<Self, DecompError> {
        CarvingDecomposition::from_tree(&s.parse()?, num_faces)
    }

    pub fn to_tree(&self) -> Tree {
        self.subtree(self.root())
    }

    fn subtree(&self, b: BagId) -> Tree {
        match self.bags[b].children {
            None => Tree::Leaf(self.bags[b].face.unwrap()),
            Some((l, r)) => Tree::node(self.subtree(l), self.subtree(r)),
        }
    }

    pub fn num_bags(&self) -> usize {
        self.bags.len()
    }

    pub fn num_faces(&self) -> usize {
        self.leaf_order.len()
    }

    pub fn root(&self) -> BagId {
        self.bags.len() - 1
    }

    pub fn children(&self, b: BagId) -> Option<(BagId, BagId)> {
        self.bags[b].children
    }

    pub fn parent(&self, b: BagId) -> Option<BagId> {
        self.bags[b].parent
    }

    pub fn leaf_face(&self, b: BagId) -> Option<FaceId> {
        self.bags[b].face
    }

    pub fn leaf_bag(&self, f: FaceId) -> BagId {
        self.leaf_bag[f]
    }

    /// Faces owned by bag `b`.
    pub fn faces(&self, b: BagId) -> &[FaceId] {
        &self.leaf_order[self.bags[b].lo..self.bags[b].hi]
    }

    pub fn contains_face(&self, b: BagId, f: FaceId) -> bool {
        let p = self.leaf_pos[f];
        p >= self.bags[b].lo && p < self.bags[b].hi
    }

    fn check_dual(&self, dual: &EmbeddedGraph) -> Result<(), DecompError> {
        if dual.n() != self.num_faces() {
            return Err(DecompError::LeafMismatch(format!(
                "{} leaves for {} dual vertices",
                self.num_faces(),
                dual.n()
            )));
        }
        Ok(())
    }

    /// Cut-set size of every bag.
    pub fn cut_sizes(&self, dual: &EmbeddedGraph) -> Result<Vec<usize>, DecompError> {
        self.check_dual(dual)?;
        Ok((0..self.num_bags())
            .map(|b| {
                dual.edges()
                    .iter()
                    .filter(|&&(x, y)| self.contains_face(b, x) != self.contains_face(b, y))
                    .count()
            })
            .collect())
    }

    pub fn width(&self, dual: &EmbeddedGraph) -> Result<usize, DecompError> {
        Ok(self.cut_sizes(dual)?.into_iter().max().unwrap_or(0))
    }

    /// True if both sides of every cut induce connected dual subgraphs.
    pub fn is_bond_carving(&self, dual: &EmbeddedGraph) -> Result<bool, DecompError> {
        self.check_dual(dual)?;
        let adj = adjacency(dual.n(), dual.edges());
        for b in 0..self.num_bags() {
            if b == self.root() {
                continue;
            }
            let inside: Vec<bool> = (0..dual.n()).map(|f| self.contains_face(b, f)).collect();
            if !side_connected(&adj, &inside, true) || !side_connected(&adj, &inside, false) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The interface cycle of bag `b`: the primal edges dual to its cut-set,
    /// directed so that the faces of the bag lie on their right, starting at
    /// the smallest vertex.
    pub fn interface_cycle(&self, b: BagId, g: &EmbeddedGraph) -> Result<Boundary, DecompError> {
        if g.num_faces() != self.num_faces() {
            return Err(DecompError::LeafMismatch("face count differs".into()));
        }
        let fs = g.faces();
        let mut out_dart = vec![usize::MAX; g.n()];
        let mut count = 0;
        for d in 0..2 * g.m() {
            if self.contains_face(b, fs.face_of(d)) && !self.contains_face(b, fs.face_of(d ^ 1)) {
                let t = g.tail(d);
                if out_dart[t] != usize::MAX {
                    return Err(DecompError::NotACycle(b));
                }
                out_dart[t] = d;
                count += 1;
            }
        }
        let start = match out_dart.iter().position(|&d| d != usize::MAX) {
            Some(s) => s,
            None => return Err(DecompError::NotACycle(b)),
        };
        order_cycle(b, g, start, count, |v| Some(out_dart[v]).filter(|&d| d != usize::MAX))
    }

    /// Interface cycles of every bag except the root, computed bottom-up:
    /// the cut of a bag is the union of its children's cuts minus the edges
    /// they share, so the total work is linear in the sum of the cut sizes.
    pub fn interface_cycles(&self, g: &EmbeddedGraph) -> Result<Vec<Boundary>, DecompError> {
        if g.num_faces() != self.num_faces() {
            return Err(DecompError::LeafMismatch("face count differs".into()));
        }
        let fs = g.faces();
        let root = self.root();
        let mut cuts: Vec<Vec<Dart>> = vec![Vec::new(); self.num_bags()];
        let mut out = Vec::with_capacity(root);
        for b in 0..root {
            let cut: Vec<Dart> = match self.bags[b].children {
                None => {
                    let f = self.bags[b].face.expect("leaf bags own a face");
                    fs.walk(f).iter().copied().filter(|&d| fs.face_of(d ^ 1) != f).collect()
                }
                Some((l, r)) => {
                    let (cl, cr) = (std::mem::take(&mut cuts[l]), std::mem::take(&mut cuts[r]));
                    let all: HashSet<Dart> = cl.iter().chain(&cr).copied().collect();
                    cl.into_iter().chain(cr).filter(|d| !all.contains(&(d ^ 1))).collect()
                }
            };
            let mut out_dart: HashMap<Vertex, Dart> = HashMap::with_capacity(cut.len());
            for &d in &cut {
                if out_dart.insert(g.tail(d), d).is_some() {
                    return Err(DecompError::NotACycle(b));
                }
            }
            let start = *out_dart.keys().min().ok_or(DecompError::NotACycle(b))?;
            out.push(order_cycle(b, g, start, cut.len(), |v| out_dart.get(&v).copied())?);
            cuts[b] = cut;
        }
        Ok(out)
    }
}

/// Follows the out-darts from `start` and checks that they form a single
/// cycle through all `count` of them.
fn order_cycle(
    b: BagId,
    g: &EmbeddedGraph,
    start: Vertex,
    count: usize,
    out_dart: impl Fn(Vertex) -> Option<Dart>,
) -> Result<Boundary, DecompError> {
    let mut vertices = Vec::with_capacity(count);
    let mut darts = Vec::with_capacity(count);
    let mut v = start;
    loop {
        let d = out_dart(v).ok_or(DecompError::NotACycle(b))?;
        vertices.push(v);
        darts.push(d);
        v = g.head(d);
        if v == start {
            break;
        }
        if vertices.len() > count {
            return Err(DecompError::NotACycle(b));
        }
    }
    if darts.len() != count {
        return Err(DecompError::NotACycle(b));
    }
    Ok(Boundary { bag: b, vertices, darts })
}

/// Boundary of a bag: the interface cycle, clockwise with the bag's faces
/// on the right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Boundary {
    pub bag: BagId,
    pub vertices: Vec<Vertex>,
    /// `darts[i]` leaves `vertices[i]`.
    pub darts: Vec<Dart>,
}

fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        if u != v {
            adj[u].push(v);
            adj[v].push(u);
        }
    }
    adj
}

fn side_connected(adj: &[Vec<usize>], inside: &[bool], side: bool) -> bool {
    let start = match inside.iter().position(|&x| x == side) {
        Some(s) => s,
        None => return true,
    };
    let mut seen = vec![false; adj.len()];
    seen[start] = true;
    let mut stack = vec![start];
    let mut cnt = 1;
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if inside[y] == side && !seen[y] {
                seen[y] = true;
                cnt += 1;
                stack.push(y);
            }
        }
    }
    cnt == inside.iter().filter(|&&x| x == side).count()
}

/// Subset tables shared by the exact searches.
struct SubsetTables {
    cut: Vec<u16>,
    conn: Vec<bool>,
}

fn subset_tables(k: usize, edges: &[(usize, usize)]) -> SubsetTables {
    let mut mult = vec![vec![0u16; k]; k];
    let mut deg = vec![0u16; k];
    let mut nbr = vec![0u32; k];
    for &(u, v) in edges {
        if u != v {
            mult[u][v] += 1;
            mult[v][u] += 1;
            deg[u] += 1;
            deg[v] += 1;
            nbr[u] |= 1 << v;
            nbr[v] |= 1 << u;
        }
    }
    let full = 1usize << k;
    let mut cut = vec![0u16; full];
    let mut conn = vec![false; full];
    for s in 1..full {
        let v = s.trailing_zeros() as usize;
        let rest = s & (s - 1);
        let mut inner = 0u16;
        let mut r = rest;
        while r != 0 {
            let u = r.trailing_zeros() as usize;
            inner += mult[v][u];
            r &= r - 1;
        }
        cut[s] = cut[rest] + deg[v] - 2 * inner;
        // connectivity by flood fill inside s
        let mut reach = 1u32 << v;
        loop {
            let mut next = reach;
            let mut r = reach;
            while r != 0 {
                let u = r.trailing_zeros() as usize;
                next |= nbr[u] & s as u32;
                r &= r - 1;
            }
            if next == reach {
                break;
            }
            reach = next;
        }
        conn[s] = reach as usize == s;
    }
    SubsetTables { cut, conn }
}

/// Minimum-width carving decomposition of the multigraph on `k` vertices
/// with the given edges (loops ignored). With `bond` set, only decompositions
/// whose every cut is a bond are considered. Returns `None` as the tree when
/// `k == 0`.
pub fn exact_carving(
    k: usize,
    edges: &[(usize, usize)],
    bond: bool,
    budget: f64,
) -> Result<(usize, Tree), DecompError> {
    let needed = 3f64.powi(k as i32) / 2.0;
    if k > 24 || needed > budget {
        return Err(DecompError::TooLarge { needed, budget });
    }
    if k == 1 {
        return Ok((0, Tree::Leaf(0)));
    }
    let t = subset_tables(k, edges);
    let full = (1usize << k) - 1;
    const INF: u16 = u16::MAX;
    let mut w = vec![INF; full + 1];
    let mut choice = vec![0u32; full + 1];
    let bond_ok = |s: usize| !bond || (t.conn[s] && t.conn[full ^ s]);
    // subsets in increasing numeric order: proper subsets come first
    for s in 1..=full {
        if s & (s - 1) == 0 {
            w[s] = 0;
            continue;
        }
        if s != full && !bond_ok(s) {
            continue;
        }
        let low = s & s.wrapping_neg();
        let rest = s ^ low;
        let mut best = INF;
        let mut best_a = 0;
        // a ranges over subsets of s containing `low`, excluding s itself
        let mut sub = rest;
        loop {
            let a = sub | low;
            if a != s {
                let b = s ^ a;
                if w[a] != INF && w[b] != INF && bond_ok(a) && bond_ok(b) {
                    let mut val = w[a].max(w[b]).max(t.cut[a]).max(t.cut[b]);
                    if s != full {
                        val = val.max(t.cut[s]);
                    }
                    if val < best {
                        best = val;
                        best_a = a;
                    }
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        w[s] = best;
        choice[s] = best_a as u32;
    }
    if w[full] == INF {
        return Err(DecompError::NotBond);
    }
    fn build(s: usize, choice: &[u32]) -> Tree {
        if s & (s - 1) == 0 {
            return Tree::Leaf(s.trailing_zeros() as usize);
        }
        let a = choice[s] as usize;
        Tree::node(build(a, choice), build(s ^ a, choice))
    }
    Ok((w[full] as usize, build(full, &choice)))
}

/// Optimal bond-carving decomposition of a dual graph.
pub fn exact_bond_carving(dual: &EmbeddedGraph, budget: f64) -> Result<CarvingDecomposition, DecompError> {
    let (_, tree) = exact_carving(dual.n(), dual.edges(), true, budget)?;
    CarvingDecomposition::from_tree(&tree, dual.n())
}

/// Minimum over vertex orders of the largest prefix cut.
pub fn exact_cutwidth(k: usize, edges: &[(usize, usize)], budget: f64) -> Result<usize, DecompError> {
    let needed = (k as f64) * 2f64.powi(k as i32);
    if k > 24 || needed > budget {
        return Err(DecompError::TooLarge { needed, budget });
    }
    if k == 0 {
        return Ok(0);
    }
    let t = subset_tables(k, edges);
    let full = (1usize << k) - 1;
    let mut f = vec![u16::MAX; full + 1];
    f[0] = 0;
    for s in 1..=full {
        let mut best = u16::MAX;
        let mut r = s;
        while r != 0 {
            let v = r.trailing_zeros() as usize;
            best = best.min(f[s ^ (1 << v)]);
            r &= r - 1;
        }
        f[s] = best.max(t.cut[s]);
    }
    Ok(f[full] as usize)
}

/// Greedy bond-carving decomposition: faces are added one at a time to a
/// growing connected prefix, keeping the remainder connected and the cut
/// small. Several start faces are tried on small duals.
pub fn heuristic_bond_carving(dual: &EmbeddedGraph) -> CarvingDecomposition {
    let k = dual.n();
    let starts: Vec<usize> = if k <= 50 {
        (0..k).collect()
    } else {
        peripheral_starts(dual)
    };
    let mut best: Option<(usize, Vec<usize>)> = None;
    for s in starts {
        let (w, order) = greedy_order(dual, s);
        if best.as_ref().is_none_or(|(bw, _)| w < *bw) {
            best = Some((w, order));
        }
    }
    let order = best.map(|b| b.1).unwrap_or_default();
    let mut tree = Tree::Leaf(order[0]);
    for &f in &order[1..] {
        tree = Tree::node(tree, Tree::Leaf(f));
    }
    CarvingDecomposition::from_tree(&tree, k).expect("greedy order is a permutation")
}

fn bfs_far(adj: &[Vec<usize>], s: usize) -> usize {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[s] = 0;
    let mut q = std::collections::VecDeque::from([s]);
    let mut last = s;
    while let Some(x) = q.pop_front() {
        last = x;
        for &y in &adj[x] {
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                q.push_back(y);
            }
        }
    }
    last
}

fn peripheral_starts(dual: &EmbeddedGraph) -> Vec<usize> {
    let adj = adjacency(dual.n(), dual.edges());
    let a = bfs_far(&adj, 0);
    let b = bfs_far(&adj, a);
    let mut v = vec![a, b, 0];
    v.sort_unstable();
    v.dedup();
    v
}

/// Returns (width, order) for the greedy prefix order from `s`.
fn greedy_order(dual: &EmbeddedGraph, s: usize) -> (usize, Vec<usize>) {
    let k = dual.n();
    let adj = adjacency(k, dual.edges());
    let deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut in_prefix = vec![false; k];
    let mut to_prefix = vec![0usize; k];
    let mut order = vec![s];
    in_prefix[s] = true;
    for &y in &adj[s] {
        to_prefix[y] += 1;
    }
    let mut cut = deg[s];
    let mut width = deg.iter().copied().max().unwrap_or(0);
    while order.len() < k {
        let remaining = k - order.len();
        let art = if remaining > 1 {
            articulation_points(&adj, &in_prefix)
        } else {
            vec![false; k]
        };
        let mut pick: Option<(usize, usize, usize)> = None;
        let mut fallback: Option<(usize, usize, usize)> = None;
        for x in 0..k {
            if in_prefix[x] || to_prefix[x] == 0 {
                continue;
            }
            let new_cut = cut + deg[x] - 2 * to_prefix[x];
            let key = (new_cut, usize::MAX - to_prefix[x], x);
            if !art[x] && pick.is_none_or(|p| key < p) {
                pick = Some(key);
            }
            if fallback.is_none_or(|p| key < p) {
                fallback = Some(key);
            }
        }
        let (new_cut, _, x) = pick.or(fallback).expect("dual is connected");
        in_prefix[x] = true;
        for &y in &adj[x] {
            to_prefix[y] += 1;
        }
        cut = new_cut;
        order.push(x);
        if order.len() < k {
            width = width.max(cut);
        }
    }
    (width, order)
}

/// Articulation points of the subgraph induced by vertices not in `removed`.
fn articulation_points(adj: &[Vec<usize>], removed: &[bool]) -> Vec<bool> {
    let k = adj.len();
    let mut disc = vec![usize::MAX; k];
    let mut low = vec![0; k];
    let mut art = vec![false; k];
    let mut time = 0;
    for root in 0..k {
        if removed[root] || disc[root] != usize::MAX {
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        let mut root_children = 0;
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        while let Some(&mut (v, p, ref mut i)) = stack.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if removed[w] {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    if v == root {
                        root_children += 1;
                    }
                    stack.push((w, v, 0));
                } else if w != p {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(u, _, _)) = stack.last() {
                    low[u] = low[u].min(low[v]);
                    if u != root && low[v] >= disc[u] {
                        art[u] = true;
                    }
                }
            }
        }
        if root_children >= 2 {
            art[root] = true;
        }
    }
    art
}
