//! Instance generators: random stacked triangulations thinned by edge
//! deletion, random flat and nested clusterings, the exhaustive micro-corpus
//! of small plane graphs, and a tube family of constant width.

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cgraph::{ClusteredGraph, TreeSpec};
use crate::embedding::{edge_of, EmbeddedGraph, FaceChord, Vertex};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random stacked triangulation on `n >= 3` vertices: each new vertex is
/// placed in a random face and joined to its three corners.
pub fn stacked_triangulation(n: usize, rng: &mut impl Rng) -> EmbeddedGraph {
    assert!(n >= 3);
    let mut g = EmbeddedGraph::from_adjacency(&[vec![1, 2], vec![2, 0], vec![0, 1]]).unwrap();
    for x in 3..n {
        let f = rng.gen_range(0..g.num_faces());
        let walk = g.faces().walk(f).to_vec();
        let m = g.m();
        let mut edges = g.edges().to_vec();
        let mut rotation = g.rotations().to_vec();
        for (k, &w) in walk.iter().enumerate() {
            let t = g.tail(w);
            edges.push((t, x));
            let r = &mut rotation[t];
            let i = r.iter().position(|&d| d == w).unwrap();
            r.insert(i + 1, 2 * (m + k));
        }
        rotation.push((0..3).map(|k| 2 * (m + k) + 1).collect());
        g = EmbeddedGraph::new(x + 1, edges, rotation).expect("stacking keeps planarity");
    }
    g
}

/// Removes edge `e`, renumbering later edges. Fails if the result is
/// disconnected.
pub fn remove_edge(g: &EmbeddedGraph, e: usize) -> Option<EmbeddedGraph> {
    let mut edges = g.edges().to_vec();
    edges.remove(e);
    let remap = |d: usize| if edge_of(d) > e { d - 2 } else { d };
    let rotation = g
        .rotations()
        .iter()
        .map(|r| r.iter().filter(|&&d| edge_of(d) != e).map(|&d| remap(d)).collect())
        .collect();
    EmbeddedGraph::new(g.n(), edges, rotation).ok()
}

/// Deletes random edges until at most `max_faces` faces remain, keeping the
/// graph connected (and 2-connected if asked).
pub fn thin(g: &EmbeddedGraph, max_faces: usize, biconnected: bool, rng: &mut impl Rng) -> EmbeddedGraph {
    let mut g = g.clone();
    let mut extra = rng.gen_range(0..=g.m() / 3);
    loop {
        if g.num_faces() <= max_faces && extra == 0 {
            return g;
        }
        let mut order: Vec<usize> = (0..g.m()).collect();
        order.shuffle(rng);
        let next = order.into_iter().find_map(|e| {
            remove_edge(&g, e).filter(|h| h.num_faces() >= 2 && (!biconnected || h.is_biconnected()))
        });
        match next {
            Some(h) => g = h,
            None => return g,
        }
        extra = extra.saturating_sub(1);
    }
}

/// Flat clustering with between 1 and `max_clusters` nonempty clusters.
pub fn random_flat_tree(n: usize, max_clusters: usize, rng: &mut impl Rng) -> TreeSpec {
    let k = rng.gen_range(1..=max_clusters.max(1));
    let mut blocks = vec![Vec::new(); k];
    for v in 0..n {
        blocks[rng.gen_range(0..k)].push(v);
    }
    blocks.retain(|b| !b.is_empty());
    TreeSpec::flat(&blocks)
}

/// Random nested clustering of depth at most 3; some vertices may sit
/// directly below the root.
pub fn random_nested_tree(n: usize, rng: &mut impl Rng) -> TreeSpec {
    fn build(vs: &[Vertex], depth: usize, rng: &mut impl Rng) -> Vec<TreeSpec> {
        if depth == 0 || vs.len() <= 1 {
            return vs.iter().map(|&v| TreeSpec::Leaf(v)).collect();
        }
        let k = rng.gen_range(1..=3.min(vs.len()));
        let mut groups = vec![Vec::new(); k];
        for &v in vs {
            groups[rng.gen_range(0..k)].push(v);
        }
        let mut out = Vec::new();
        for gr in groups.into_iter().filter(|g| !g.is_empty()) {
            if gr.len() == 1 && rng.gen_bool(0.5) {
                out.push(TreeSpec::Leaf(gr[0]));
            } else {
                out.push(TreeSpec::Node(build(&gr, depth - 1, rng)));
            }
        }
        out
    }
    let mut vs: Vec<Vertex> = (0..n).collect();
    vs.shuffle(rng);
    TreeSpec::Node(build(&vs, 3, rng))
}

#[derive(Debug, Clone, Copy)]
pub struct GenParams {
    pub min_vertices: usize,
    pub max_vertices: usize,
    pub max_faces: usize,
    pub max_clusters: usize,
    pub flat: bool,
    pub biconnected: bool,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            min_vertices: 4,
            max_vertices: 8,
            max_faces: 12,
            max_clusters: 3,
            flat: true,
            biconnected: false,
        }
    }
}

/// `count` instances, deterministic in `seed`.
pub fn generate_instances(p: &GenParams, count: usize, seed: u64) -> Vec<ClusteredGraph> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let n = r.gen_range(p.min_vertices.max(3)..=p.max_vertices.max(3));
            let g = thin(&stacked_triangulation(n, &mut r), p.max_faces, p.biconnected, &mut r);
            let spec = if p.flat {
                random_flat_tree(n, p.max_clusters, &mut r)
            } else {
                random_nested_tree(n, &mut r)
            };
            ClusteredGraph::from_spec(g, &spec).expect("generated instances are valid")
        })
        .collect()
}

/// Random instances with at least one cutvertex, obtained by deleting
/// edges; most of them contain bridges.
pub fn with_cutvertices(count: usize, seed: u64) -> Vec<ClusteredGraph> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let n = r.gen_range(5..=8);
        let g = thin(&stacked_triangulation(n, &mut r), 12, false, &mut r);
        // delete edges freely; keep only graphs that still have a cutvertex
        let mut h = g.clone();
        for _ in 0..r.gen_range(0..4) {
            let e = r.gen_range(0..h.m());
            if let Some(x) = remove_edge(&h, e) {
                h = x;
            }
        }
        if h.is_biconnected() {
            continue;
        }
        let spec = if r.gen_bool(0.7) {
            random_flat_tree(n, 3, &mut r)
        } else {
            random_nested_tree(n, &mut r)
        };
        out.push(ClusteredGraph::from_spec(h, &spec).unwrap());
    }
    out
}

/// Glues `h` onto `g` by identifying vertex `b` of `h` with vertex `a` of
/// `g`; the darts of `b` enter the rotation of `a` as one block after
/// position `at`.
pub fn glue_at_vertex(g: &EmbeddedGraph, a: Vertex, h: &EmbeddedGraph, b: Vertex, at: usize) -> EmbeddedGraph {
    let (n, m) = (g.n(), g.m());
    let map = |v: Vertex| match v.cmp(&b) {
        std::cmp::Ordering::Equal => a,
        std::cmp::Ordering::Less => n + v,
        std::cmp::Ordering::Greater => n + v - 1,
    };
    let mut edges = g.edges().to_vec();
    edges.extend(h.edges().iter().map(|&(x, y)| (map(x), map(y))));
    let mut rotation = g.rotations().to_vec();
    for v in (0..h.n()).filter(|&v| v != b) {
        rotation.push(h.rotation(v).iter().map(|&d| d + 2 * m).collect());
    }
    let block: Vec<usize> = h.rotation(b).iter().map(|&d| d + 2 * m).collect();
    let r = &mut rotation[a];
    let at = (at % r.len()) + 1;
    r.splice(at..at, block);
    EmbeddedGraph::new(n + h.n() - 1, edges, rotation).expect("gluing at a vertex keeps planarity")
}

/// Two or three 2-connected pieces glued at vertices: cutvertices without
/// bridges.
pub fn glued_blocks(count: usize, seed: u64) -> Vec<ClusteredGraph> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let piece = |r: &mut ChaCha8Rng| {
                let k = r.gen_range(3..=5);
                thin(&stacked_triangulation(k, r), 4, true, r)
            };
            let mut g = piece(&mut r);
            for _ in 0..r.gen_range(1..=2) {
                let h = piece(&mut r);
                let a = r.gen_range(0..g.n());
                let b = r.gen_range(0..h.n());
                let at = r.gen_range(0..g.degree(a));
                g = glue_at_vertex(&g, a, &h, b, at);
            }
            let n = g.n();
            let spec = if r.gen_bool(0.7) {
                random_flat_tree(n, 3, &mut r)
            } else {
                random_nested_tree(n, &mut r)
            };
            ClusteredGraph::from_spec(g, &spec).expect("generated instances are valid")
        })
        .collect()
}

/// All connected plane graphs with at most `max_n` vertices, one per
/// embedding class up to mirror image, sorted by size.
pub fn plane_graphs(max_n: usize) -> Vec<EmbeddedGraph> {
    let single = EmbeddedGraph::new(1, vec![], vec![vec![]]).unwrap();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    seen.insert(single.canonical_code_unoriented());
    let mut out = vec![single];
    let mut i = 0;
    while i < out.len() {
        let g = out[i].clone();
        i += 1;
        let mut next = Vec::new();
        if g.n() < max_n {
            // pendant edge at every corner
            for v in 0..g.n() {
                let deg = g.degree(v).max(1);
                for c in 0..deg {
                    let m = g.m();
                    let mut edges = g.edges().to_vec();
                    edges.push((v, g.n()));
                    let mut rotation = g.rotations().to_vec();
                    let at = if g.degree(v) == 0 { 0 } else { c + 1 };
                    rotation[v].insert(at, 2 * m);
                    rotation.push(vec![2 * m + 1]);
                    if let Ok(h) = EmbeddedGraph::new(g.n() + 1, edges, rotation) {
                        next.push(h);
                    }
                }
            }
        }
        // chord between two corners of one face
        for f in 0..g.num_faces() {
            let walk = g.faces().walk(f);
            for a in 0..walk.len() {
                for b in a + 1..walk.len() {
                    let (x, y) = (g.tail(walk[a]), g.tail(walk[b]));
                    if x == y || g.has_edge(x, y) {
                        continue;
                    }
                    if let Ok(h) = crate::embedding::insert_chords(&g, &[FaceChord { face: f, a, b }]) {
                        next.push(h);
                    }
                }
            }
        }
        for h in next {
            if seen.insert(h.canonical_code_unoriented()) {
                out.push(h);
            }
        }
    }
    out.sort_by_key(|g| (g.n(), g.m()));
    out
}

/// Restricted growth strings of length `n` with at most `k` blocks.
pub fn set_partitions(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn go(i: usize, n: usize, k: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for b in 0..=(max + 1).min(k - 1) {
            if i == 0 && b > 0 {
                break;
            }
            cur.push(b);
            go(i + 1, n, k, cur, if i == 0 { 0 } else { max.max(b) }, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut Vec::new(), 0, &mut out);
    out
}

fn relabel(p: &[usize], order: &[Vertex]) -> Vec<usize> {
    let mut map = vec![usize::MAX; p.len()];
    let mut next = 0;
    order
        .iter()
        .map(|&v| {
            if map[p[v]] == usize::MAX {
                map[p[v]] = next;
                next += 1;
            }
            map[p[v]]
        })
        .collect()
}

/// Every plane graph with at most `max_n` vertices combined with every flat
/// clustering into at most `max_clusters` clusters, one per symmetry class.
pub fn micro_corpus(max_n: usize, max_clusters: usize) -> Vec<ClusteredGraph> {
    let mut out = Vec::new();
    for g in plane_graphs(max_n) {
        let orders = g.symmetric_orders();
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        for p in set_partitions(g.n(), max_clusters) {
            let canon = orders.iter().map(|o| relabel(&p, o)).min().unwrap();
            if !seen.insert(canon) {
                continue;
            }
            let k = p.iter().max().unwrap() + 1;
            let mut blocks = vec![Vec::new(); k];
            for (v, &b) in p.iter().enumerate() {
                blocks[b].push(v);
            }
            out.push(ClusteredGraph::from_spec(g.clone(), &TreeSpec::flat(&blocks)).unwrap());
        }
    }
    out
}

/// The tube `C4 x P_levels` with flat clusters pairing `(i, j)` with
/// `(i + 1, j + 1)` across a quadrilateral on even levels; every cluster
/// needs one diagonal chord.
pub fn tube(levels: usize) -> ClusteredGraph {
    assert!(levels >= 2);
    let id = |i: usize, j: usize| 4 * i + (j % 4);
    let n = 4 * levels;
    let mut adj = vec![Vec::new(); n];
    for i in 0..levels {
        for j in 0..4 {
            let v = id(i, j);
            // clockwise around v: up, ring forward, down, ring backward
            let mut r = Vec::new();
            if i + 1 < levels {
                r.push(id(i + 1, j));
            }
            r.push(id(i, j + 1));
            if i > 0 {
                r.push(id(i - 1, j));
            }
            r.push(id(i, j + 3));
            adj[v] = r;
        }
    }
    let g = EmbeddedGraph::from_adjacency(&adj).expect("tube is planar");
    let mut blocks = Vec::new();
    let mut used = vec![false; n];
    let mut i = 0;
    while i + 1 < levels {
        for j in 0..4 {
            let (a, b) = (id(i, j), id(i + 1, j + 1));
            if !used[a] && !used[b] {
                used[a] = true;
                used[b] = true;
                blocks.push(vec![a, b]);
            }
        }
        i += 2;
    }
    blocks.extend((0..n).filter(|&v| !used[v]).map(|v| vec![v]));
    ClusteredGraph::from_spec(g, &TreeSpec::flat(&blocks)).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangulations_are_maximal() {
        let mut r = rng(7);
        for n in 3..12 {
            let g = stacked_triangulation(n, &mut r);
            assert_eq!(g.m(), 3 * n - 6);
            assert!(g.faces().walks().iter().all(|w| w.len() == 3));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let p = GenParams::default();
        let a = generate_instances(&p, 5, 1);
        let b = generate_instances(&p, 5, 1);
        assert_eq!(a, b);
        assert!(a.iter().all(|c| c.graph().num_faces() <= 12));
    }

    #[test]
    fn small_plane_graph_counts() {
        // 1 vertex; 1 edge; path P3; on 3 vertices also the triangle
        let gs = plane_graphs(3);
        let by_n: Vec<usize> = (1..=3).map(|n| gs.iter().filter(|g| g.n() == n).count()).collect();
        assert_eq!(by_n, vec![1, 1, 2]);
        // trees on 4 vertices: path and star; with cycles: triangle plus
        // pendant, 4-cycle, triangle with chord (diamond, two embeddings
        // coincide up to mirror), K4 minus nothing planar = K4
        let four = plane_graphs(4).into_iter().filter(|g| g.n() == 4).count();
        assert_eq!(four, 6);
    }

    #[test]
    fn set_partition_counts() {
        assert_eq!(set_partitions(4, 3).len(), 1 + 7 + 6);
        assert_eq!(set_partitions(6, 3).len(), 1 + 31 + 90);
    }

    #[test]
    fn glued_blocks_have_cutvertices_but_no_bridges() {
        for cg in glued_blocks(30, 4) {
            let g = cg.graph();
            assert!(!g.is_biconnected());
            assert!(g.blocks().blocks.iter().all(|b| b.len() >= 3));
        }
    }

    #[test]
    fn tube_is_biconnected_with_quads() {
        let t = tube(4);
        assert!(t.graph().is_biconnected());
        assert_eq!(t.graph().num_faces(), 4 * 3 + 2);
        assert!(!t.is_c_connected());
    }
}
