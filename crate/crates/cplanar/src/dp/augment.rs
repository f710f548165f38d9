//! Preprocessing that makes the underlying graph simple and 2-connected
//! while preserving the answer, together with the maps that carry a witness
//! back to the input.

use std::collections::HashSet;

use crate::cgraph::{ClusteredGraph, SaturatingEdge, TreeSpec};
use crate::decomposition::{CarvingDecomposition, Tree};
use crate::embedding::{edge_of, rev, Dart, EdgeId, EmbeddedGraph, FaceChord, FaceId, Vertex};

use super::DpError;

/// One preprocessing step, recorded with enough detail to undo it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    /// Edge `e = (x, y)` became `(x, w)` plus new edge `(w, y)`; `w` joined
    /// the clusters of `x`.
    Subdivide { e: EdgeId, new_edge: EdgeId, w: Vertex },
    /// Path `u - cplus - v` drawn inside the face containing the corner
    /// `v -> c -> u` at cutvertex `c`, where `a = c -> u` and `b = c -> v`
    /// are consecutive around `c`.
    Cut {
        c: Vertex,
        cplus: Vertex,
        a: Dart,
        b: Dart,
        e1: EdgeId,
        e2: EdgeId,
    },
}

#[derive(Debug, Clone)]
pub struct Augmented {
    /// Instances before each step followed by the final one.
    pub stages: Vec<ClusteredGraph>,
    pub steps: Vec<Step>,
    /// Decomposition carried through the steps, if one was supplied.
    pub decomposition: Option<CarvingDecomposition>,
}

impl Augmented {
    pub fn result(&self) -> &ClusteredGraph {
        self.stages.last().unwrap()
    }

    /// Number of added vertices.
    pub fn added(&self) -> usize {
        self.steps.len()
    }
}

fn add_sibling(spec: &TreeSpec, of: Vertex, new: Vertex) -> TreeSpec {
    match spec {
        TreeSpec::Leaf(x) => TreeSpec::Leaf(*x),
        TreeSpec::Node(ch) => {
            let mut out: Vec<TreeSpec> = ch.iter().map(|c| add_sibling(c, of, new)).collect();
            if ch.iter().any(|c| matches!(c, TreeSpec::Leaf(x) if *x == of)) {
                out.push(TreeSpec::Leaf(new));
            }
            TreeSpec::Node(out)
        }
    }
}

fn remap_tree(d: &CarvingDecomposition, map: &dyn Fn(FaceId) -> Tree, new_faces: usize) -> Result<CarvingDecomposition, DpError> {
    let t = d.to_tree().map_leaves(&mut |f| map(f));
    Ok(CarvingDecomposition::from_tree(&t, new_faces)?)
}

/// Subdivides every parallel copy of an edge after the first.
fn subdivide_parallel(
    cg: &ClusteredGraph,
    d: Option<CarvingDecomposition>,
    stages: &mut Vec<ClusteredGraph>,
    steps: &mut Vec<Step>,
) -> Result<(ClusteredGraph, Option<CarvingDecomposition>), DpError> {
    let mut cur = cg.clone();
    let mut dec = d;
    loop {
        let g = cur.graph();
        let mut seen = HashSet::new();
        let dup = g.edges().iter().position(|&(u, v)| !seen.insert((u.min(v), u.max(v))));
        let Some(e) = dup else { break };
        let (x, y) = g.edge(e);
        let w = g.n();
        let new_edge = g.m();
        let mut edges = g.edges().to_vec();
        edges[e] = (x, w);
        edges.push((w, y));
        let mut rotation = g.rotations().to_vec();
        for d in rotation[y].iter_mut() {
            if *d == 2 * e + 1 {
                *d = 2 * new_edge + 1;
            }
        }
        rotation.push(vec![2 * e + 1, 2 * new_edge]);
        let ng = EmbeddedGraph::new(g.n() + 1, edges, rotation)?;
        let spec = add_sibling(&cur.tree().to_spec(), x, w);
        let next = ClusteredGraph::from_spec(ng, &spec)?;
        if let Some(dd) = &dec {
            let old = cur.graph();
            let map_dart = |d: Dart| if d == 2 * e + 1 { 2 * new_edge + 1 } else { d };
            let nf = next.graph().num_faces();
            let m = |f: FaceId| Tree::Leaf(next.graph().faces().face_of(map_dart(old.faces().walk(f)[0])));
            dec = Some(remap_tree(dd, &m, nf)?);
        }
        stages.push(cur);
        steps.push(Step::Subdivide { e, new_edge, w });
        cur = next;
    }
    Ok((cur, dec))
}

/// Repeatedly joins two blocks at a cutvertex `c` by a path through a new
/// vertex `c+` in the same cluster as `c`. A supplied decomposition has the
/// leaf of the split face replaced by a node over its two halves.
pub fn biconnect_augment(cg: &ClusteredGraph, d: Option<CarvingDecomposition>) -> Result<Augmented, DpError> {
    let mut stages = Vec::new();
    let mut steps = Vec::new();
    let (mut cur, mut dec) = subdivide_parallel(cg, d, &mut stages, &mut steps)?;
    loop {
        let g = cur.graph();
        if g.n() < 3 {
            break;
        }
        let bs = g.blocks();
        let mut found = None;
        'search: for &c in &bs.cutvertices {
            let rot = g.rotation(c);
            for i in 0..rot.len() {
                let (a, b) = (rot[i], rot[(i + 1) % rot.len()]);
                if bs.block_of_edge[edge_of(a)] != bs.block_of_edge[edge_of(b)] {
                    found = Some((c, a, b));
                    break 'search;
                }
            }
        }
        let Some((c, a, b)) = found else { break };
        let (u, v) = (g.head(a), g.head(b));
        let cplus = g.n();
        let (e1, e2) = (g.m(), g.m() + 1);
        let mut edges = g.edges().to_vec();
        edges.push((u, cplus));
        edges.push((cplus, v));
        let mut rotation = g.rotations().to_vec();
        // at u: after the walk dart leaving u, i.e. just before rev(a)
        let ru = &mut rotation[u];
        let ia = ru.iter().position(|&x| x == rev(a)).unwrap();
        ru.insert(ia, 2 * e1);
        // at v: right after rev(b)
        let rv = &mut rotation[v];
        let ib = rv.iter().position(|&x| x == rev(b)).unwrap();
        rv.insert(ib + 1, 2 * e2 + 1);
        rotation.push(vec![2 * e1 + 1, 2 * e2]);
        let ng = EmbeddedGraph::new(g.n() + 1, edges, rotation)?;
        let spec = add_sibling(&cur.tree().to_spec(), c, cplus);
        let next = ClusteredGraph::from_spec(ng, &spec)?;
        if let Some(dd) = &dec {
            let old = g.faces();
            let new = next.graph().faces();
            let f = old.face_of(a);
            let (f1, f2) = (new.face_of(a), new.face_of(2 * e2 + 1));
            let m = |x: FaceId| {
                if x == f {
                    Tree::node(Tree::Leaf(f1), Tree::Leaf(f2))
                } else {
                    Tree::Leaf(new.face_of(old.walk(x)[0]))
                }
            };
            dec = Some(remap_tree(dd, &m, new.len())?);
        }
        stages.push(cur);
        steps.push(Step::Cut { c, cplus, a, b, e1, e2 });
        cur = next;
    }
    stages.push(cur);
    Ok(Augmented {
        stages,
        steps,
        decomposition: dec,
    })
}

/// Maps chords given as corner-dart pairs of the final instance back to the
/// input instance.
pub fn map_witness(aug: &Augmented, chords: &[(Dart, Dart)]) -> Vec<(Dart, Dart)> {
    let mut cur: Vec<(Dart, Dart)> = chords.to_vec();
    for (i, step) in aug.steps.iter().enumerate().rev() {
        let before = &aug.stages[i];
        let after = &aug.stages[i + 1];
        cur = match *step {
            Step::Subdivide { e, new_edge, .. } => {
                let g1 = after.graph();
                let map = |d: Dart| {
                    if d == 2 * new_edge {
                        2 * e
                    } else if d == 2 * e + 1 {
                        g1.face_next(d)
                    } else if d == 2 * new_edge + 1 {
                        2 * e + 1
                    } else {
                        d
                    }
                };
                cur.iter().map(|&(x, y)| (map(x), map(y))).collect()
            }
            Step::Cut { cplus, a, b, e1, e2, .. } => undo_cut(before, after, &cur, cplus, a, b, e1, e2),
        };
        cur = tidy(before.graph(), &cur);
    }
    cur
}

#[allow(clippy::too_many_arguments)]
fn undo_cut(
    before: &ClusteredGraph,
    after: &ClusteredGraph,
    chords: &[(Dart, Dart)],
    cplus: Vertex,
    a: Dart,
    b: Dart,
    e1: EdgeId,
    e2: EdgeId,
) -> Vec<(Dart, Dart)> {
    let g0 = before.graph();
    let g1 = after.graph();
    let tree = after.tree();
    let u_corner = g0.face_next(a);
    // corners of both halves of the split face, mapped into the original
    // face; cplus sits where the corner `a` of c was
    let map = |d: Dart| -> Dart {
        if d == 2 * e2 + 1 {
            rev(b)
        } else if d == 2 * e1 + 1 || d == 2 * e2 {
            a
        } else if d == 2 * e1 {
            u_corner
        } else {
            d
        }
    };
    let touches = |d: Dart| g1.tail(d) == cplus;
    // replace the star of cplus by a fan from its deepest neighbour; a
    // fan between star corners cannot cross any other chord of the face
    let mut star: Vec<Dart> = Vec::new();
    let mut rest = Vec::new();
    for &(x, y) in chords {
        if touches(x) {
            star.push(y);
        } else if touches(y) {
            star.push(x);
        } else {
            rest.push((map(x), map(y)));
        }
    }
    let (u, v) = (g1.tail(u_corner), g1.tail(rev(b)));
    if tree.lca(u, cplus) != tree.root() {
        star.push(u_corner);
    }
    if tree.lca(v, cplus) != tree.root() {
        star.push(2 * e2 + 1);
    }
    if let Some(&hub) = star.iter().min_by_key(|&&d| std::cmp::Reverse(tree.depth(tree.lca(g1.tail(d), cplus)))) {
        for &y in &star {
            if y != hub {
                rest.push((map(hub), map(y)));
            }
        }
    }
    rest
}

/// Drops loops, chords along the face, chords parallel to edges and repeated
/// vertex pairs.
fn tidy(g: &EmbeddedGraph, chords: &[(Dart, Dart)]) -> Vec<(Dart, Dart)> {
    let mut seen = HashSet::new();
    chords
        .iter()
        .copied()
        .filter(|&(x, y)| {
            let (p, q) = (g.tail(x), g.tail(y));
            p != q && !g.has_edge(p, q) && seen.insert((p.min(q), p.max(q)))
        })
        .collect()
}

/// Converts corner-dart chords into positional face chords and saturating
/// edges.
pub fn to_face_chords(cg: &ClusteredGraph, chords: &[(Dart, Dart)]) -> (Vec<FaceChord>, Vec<SaturatingEdge>) {
    let g = cg.graph();
    let fs = g.faces();
    let mut fc = Vec::new();
    let mut se = Vec::new();
    for &(x, y) in chords {
        let f = fs.face_of(x);
        debug_assert_eq!(f, fs.face_of(y), "chord corners lie on one face");
        let w = fs.walk(f);
        let pa = w.iter().position(|&d| d == x).unwrap();
        let pb = w.iter().position(|&d| d == y).unwrap();
        fc.push(FaceChord { face: f, a: pa, b: pb });
        let (p, q) = (g.tail(x), g.tail(y));
        se.push(SaturatingEdge {
            u: p.min(q),
            v: p.max(q),
            face: f,
            cluster: cg.tree().lca(p, q),
        });
    }
    (fc, se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgraph::ClusterTree;

    fn bowtie() -> ClusteredGraph {
        // two triangles sharing vertex 0
        let g = EmbeddedGraph::from_adjacency(&[vec![1, 2, 3, 4], vec![0, 2], vec![1, 0], vec![0, 4], vec![3, 0]]).unwrap();
        let t = ClusterTree::from_spec(5, &TreeSpec::flat(&[vec![0, 1, 2], vec![3, 4]])).unwrap();
        ClusteredGraph::new(g, t).unwrap()
    }

    #[test]
    fn biconnected_input_is_unchanged() {
        let g = EmbeddedGraph::from_adjacency(&[vec![1, 2], vec![2, 0], vec![0, 1]]).unwrap();
        let t = ClusterTree::from_spec(3, &TreeSpec::flat(&[vec![0, 1, 2]])).unwrap();
        let cg = ClusteredGraph::new(g, t).unwrap();
        let aug = biconnect_augment(&cg, None).unwrap();
        assert_eq!(aug.added(), 0);
        assert_eq!(aug.result(), &cg);
    }

    #[test]
    fn bowtie_gets_one_vertex() {
        let cg = bowtie();
        let d = crate::decomposition::exact_carving(cg.graph().num_faces(), cg.graph().dual().edges(), false, 1e6)
            .unwrap()
            .1;
        let d = CarvingDecomposition::from_tree(&d, cg.graph().num_faces()).unwrap();
        let omega = d.width(&cg.graph().dual()).unwrap();
        let aug = biconnect_augment(&cg, Some(d)).unwrap();
        assert_eq!(aug.added(), 1);
        let r = aug.result();
        assert_eq!(r.graph().n(), 6);
        assert!(r.graph().is_biconnected());
        assert!(r.is_flat());
        assert_eq!(r.tree().parent(5), r.tree().parent(0));
        let d2 = aug.decomposition.as_ref().unwrap();
        let dual = r.graph().dual();
        assert!(d2.width(&dual).unwrap() <= omega.max(4));
        // the carried tree need not be bond here; the optimum bond carving
        // of the result still meets the bound
        let best = crate::decomposition::exact_bond_carving(&dual, 1e7).unwrap();
        assert!(best.width(&dual).unwrap() <= omega.max(4));
    }

    #[test]
    fn path_needs_one_vertex_per_extra_block() {
        let g = EmbeddedGraph::from_adjacency(&[vec![1], vec![0, 2], vec![1, 3], vec![2]]).unwrap();
        let t = ClusterTree::from_spec(4, &TreeSpec::flat(&[vec![0, 1, 2, 3]])).unwrap();
        let aug = biconnect_augment(&ClusteredGraph::new(g, t).unwrap(), None).unwrap();
        assert_eq!(aug.added(), 2);
        assert!(aug.result().graph().is_biconnected());
    }

    #[test]
    fn parallel_edges_are_subdivided() {
        let g = EmbeddedGraph::new(3, vec![(0, 1), (1, 2), (2, 0), (0, 1)], vec![vec![0, 6, 5], vec![1, 2, 7], vec![3, 4]]);
        if let Ok(g) = g {
            let t = ClusterTree::from_spec(3, &TreeSpec::flat(&[vec![0, 1, 2]])).unwrap();
            let aug = biconnect_augment(&ClusteredGraph::new(g, t).unwrap(), None).unwrap();
            let r = aug.result().graph();
            let mut seen = HashSet::new();
            assert!(r.edges().iter().all(|&(u, v)| seen.insert((u.min(v), u.max(v)))));
        }
    }
}
