//! Plane auxiliary graphs of partitions (cycle-stars and cycle-trees) and
//! their gluing along a shared boundary path.

use std::collections::HashMap;

use super::flat::NcPartition;
use super::recursive::RecursiveNcPartition;
use super::PartitionError;
use crate::embedding::{Dart, EmbeddedGraph, Vertex};

/// Neighbour of an inner node: a ground position or another inner node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nb {
    Ground(usize),
    Inner(usize),
}

/// A cycle on the ground (clockwise) with inner nodes drawn inside it.
#[derive(Debug, Clone)]
pub struct AuxPlane {
    pub ground: Vec<Vertex>,
    /// Clockwise neighbour order of every inner node.
    pub inner: Vec<Vec<Nb>>,
    /// The validated embedding: ground positions first, then inner nodes.
    pub graph: EmbeddedGraph,
}

impl AuxPlane {
    /// Ground vertices along the outer face, clockwise.
    pub fn outer_ground(&self) -> Vec<Vertex> {
        let k = self.ground.len();
        if k < 2 {
            return self.ground.clone();
        }
        // dart 1 runs from position 1 back to position 0: outer face on its right
        let g = &self.graph;
        let mut walk = Vec::new();
        let mut d = 1;
        loop {
            walk.push(g.tail(d));
            d = g.face_next(d);
            if d == 1 {
                break;
            }
        }
        walk.reverse();
        let start = walk.iter().position(|&p| p == 0).unwrap_or(0);
        walk.rotate_left(start);
        walk.into_iter().map(|p| self.ground[p]).collect()
    }
}

struct Builder {
    edges: Vec<(usize, usize)>,
}

impl Builder {
    fn add(&mut self, u: usize, v: usize) -> (Dart, Dart) {
        let e = self.edges.len();
        self.edges.push((u, v));
        (2 * e, 2 * e + 1)
    }
}

fn build_aux(ground: &[Vertex], inner: Vec<Vec<Nb>>) -> Result<AuxPlane, PartitionError> {
    let k = ground.len();
    let ni = inner.len();
    let mut b = Builder { edges: Vec::new() };
    let mut rotation: Vec<Vec<Dart>> = vec![Vec::new(); k + ni];
    if k >= 2 {
        let mut next = vec![0; k];
        let mut prev = vec![0; k];
        for i in 0..k {
            let (f, r) = b.add(i, (i + 1) % k);
            next[i] = f;
            prev[(i + 1) % k] = r;
        }
        let mut attach: Vec<Vec<Dart>> = vec![Vec::new(); k];
        let mut inner_darts: Vec<Vec<Dart>> = vec![Vec::new(); ni];
        let mut pair: HashMap<(usize, usize), (Dart, Dart)> = HashMap::new();
        for (x, nbs) in inner.iter().enumerate() {
            for nb in nbs {
                let d = match *nb {
                    Nb::Ground(p) => {
                        let (out, back) = b.add(k + x, p);
                        attach[p].push(back);
                        out
                    }
                    Nb::Inner(y) => {
                        let key = (x.min(y), x.max(y));
                        let (a, c) = *pair.entry(key).or_insert_with(|| b.add(k + key.0, k + key.1));
                        if x == key.0 {
                            a
                        } else {
                            c
                        }
                    }
                };
                inner_darts[x].push(d);
            }
        }
        for i in 0..k {
            let mut r = vec![next[i]];
            r.extend_from_slice(&attach[i]);
            r.push(prev[i]);
            rotation[i] = r;
        }
        rotation[k..k + ni].clone_from_slice(&inner_darts[..ni]);
    }
    let graph = EmbeddedGraph::new(k + ni, b.edges, rotation)
        .map_err(|e| PartitionError::NotPlane(e.to_string()))?;
    Ok(AuxPlane {
        ground: ground.to_vec(),
        inner,
        graph,
    })
}

/// Cycle-star of a flat partition: one inner vertex per part of size at
/// least two, adjacent to the part's elements.
pub fn cycle_star(p: &NcPartition) -> Result<AuxPlane, PartitionError> {
    let ground = p.ground();
    let pos: HashMap<Vertex, usize> = ground.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let inner: Vec<Vec<Nb>> = p
        .parts()
        .iter()
        .filter(|part| part.elems.len() >= 2)
        .map(|part| {
            let mut ps: Vec<usize> = part.elems.iter().map(|v| pos[v]).collect();
            ps.sort_unstable();
            ps.into_iter().map(Nb::Ground).collect()
        })
        .collect();
    build_aux(ground, inner)
}

/// Cycle-tree of a recursive partition: one inner vertex per part, joined
/// to its smallest strict superset part and to the elements whose smallest
/// containing part it is.
pub fn cycle_tree(r: &RecursiveNcPartition) -> Result<AuxPlane, PartitionError> {
    let ground = r.ground();
    let k = ground.len();
    let pos: HashMap<Vertex, usize> = ground.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let sets: Vec<Vec<usize>> = r
        .parts()
        .iter()
        .map(|p| {
            let mut s: Vec<usize> = p.elems.iter().map(|v| pos[v]).collect();
            s.sort_unstable();
            s
        })
        .collect();
    let np = sets.len();
    // smallest strict superset of each part, and smallest part of each element
    let parent: Vec<Option<usize>> = (0..np)
        .map(|i| {
            (0..np)
                .filter(|&j| j != i && sets[j].len() > sets[i].len() && sets[i].iter().all(|x| sets[j].contains(x)))
                .min_by_key(|&j| sets[j].len())
        })
        .collect();
    let owner: Vec<Option<usize>> = (0..k)
        .map(|p| (0..np).filter(|&j| sets[j].contains(&p)).min_by_key(|&j| sets[j].len()))
        .collect();
    let mut inner: Vec<Vec<Nb>> = Vec::with_capacity(np);
    for x in 0..np {
        let mut keyed: Vec<(usize, Nb)> = Vec::new();
        for (p, o) in owner.iter().enumerate() {
            if *o == Some(x) {
                keyed.push((p, Nb::Ground(p)));
            }
        }
        for (c, par) in parent.iter().enumerate() {
            if *par == Some(x) {
                keyed.push((sets[c][0], Nb::Inner(c)));
            }
        }
        if let Some(px) = parent[x] {
            // the parent sits where the first outside position would
            let outside = (0..k).find(|p| !sets[x].contains(p)).unwrap_or(0);
            keyed.push((outside, Nb::Inner(px)));
        }
        keyed.sort_by_key(|e| e.0);
        inner.push(keyed.into_iter().map(|e| e.1).collect());
    }
    build_aux(ground, inner)
}

/// Glues two auxiliary plane graphs along the shared path `shared = p1..pk`
/// (clockwise in `a`, reversed in `b`) and returns the ground vertices on the
/// outer face of the result, clockwise.
pub fn glue_along_path(a: &AuxPlane, b: &AuxPlane, shared: &[Vertex]) -> Result<Vec<Vertex>, PartitionError> {
    let kk = shared.len();
    if kk < 2 {
        return Err(PartitionError::PreconditionViolation("ii", "fewer than two shared elements".into()));
    }
    let rot = |g: &[Vertex], start: Vertex| -> Result<usize, PartitionError> {
        g.iter()
            .position(|&v| v == start)
            .ok_or_else(|| PartitionError::PreconditionViolation("i", "shared element missing".into()))
    };
    let sa = rot(&a.ground, shared[0])?;
    let sb = rot(&b.ground, shared[kk - 1])?;
    let la = a.ground.len();
    let lb = b.ground.len();
    let left: Vec<Vertex> = (0..la).map(|i| a.ground[(sa + i) % la]).collect();
    let right: Vec<Vertex> = (0..lb).map(|i| b.ground[(sb + i) % lb]).collect();
    for j in 0..kk {
        if left[j] != shared[j] || right[j] != shared[kk - 1 - j] {
            return Err(PartitionError::PreconditionViolation("iii", "shared path mismatch".into()));
        }
    }
    // vertex numbering: union ground, then inner nodes of a, then of b
    let mut vid: HashMap<Vertex, usize> = HashMap::new();
    let mut names: Vec<Vertex> = Vec::new();
    for &v in left.iter().chain(&right) {
        vid.entry(v).or_insert_with(|| {
            names.push(v);
            names.len() - 1
        });
    }
    let ng = names.len();
    let ia = ng;
    let ib = ng + a.inner.len();
    let total = ib + b.inner.len();
    let mut bld = Builder { edges: Vec::new() };

    // side data: next/prev/attach darts per rotated position
    struct Side {
        next: Vec<Dart>,
        prev: Vec<Dart>,
        attach: Vec<Vec<Dart>>,
        inner_rot: Vec<Vec<Dart>>,
    }
    let mut side = |cyc: &[Vertex], aux: &AuxPlane, start: usize, base: usize, reuse: Option<&Side>| -> Side {
        let len = cyc.len();
        let mut next = vec![0; len];
        let mut prev = vec![0; len];
        for i in 0..len {
            let (f, r) = match reuse {
                // right side: edges i < kk-1 are the reversed shared path
                Some(l) if i + 1 < kk => {
                    let li = kk - 2 - i;
                    (l.prev[li + 1], l.next[li])
                }
                _ => bld.add(vid[&cyc[i]], vid[&cyc[(i + 1) % len]]),
            };
            next[i] = f;
            prev[(i + 1) % len] = r;
        }
        let mut attach = vec![Vec::new(); len];
        let mut inner_rot = vec![Vec::new(); aux.inner.len()];
        let mut pair: HashMap<(usize, usize), (Dart, Dart)> = HashMap::new();
        for (x, nbs) in aux.inner.iter().enumerate() {
            for nb in nbs {
                let d = match *nb {
                    Nb::Ground(p) => {
                        let rp = (p + len - start) % len;
                        let (out, back) = bld.add(base + x, vid[&cyc[rp]]);
                        attach[rp].push(back);
                        out
                    }
                    Nb::Inner(y) => {
                        let key = (x.min(y), x.max(y));
                        let (p, q) = *pair
                            .entry(key)
                            .or_insert_with(|| bld.add(base + key.0, base + key.1));
                        if x == key.0 {
                            p
                        } else {
                            q
                        }
                    }
                };
                inner_rot[x].push(d);
            }
        }
        Side { next, prev, attach, inner_rot }
    };
    let l = side(&left, a, sa, ia, None);
    let r = side(&right, b, sb, ib, Some(&l));

    let sector = |s: &Side, i: usize| -> Vec<Dart> {
        let mut v = vec![s.next[i]];
        v.extend_from_slice(&s.attach[i]);
        v.push(s.prev[i]);
        v
    };
    let mut rotation: Vec<Vec<Dart>> = vec![Vec::new(); total];
    for (i, &v) in left.iter().enumerate() {
        rotation[vid[&v]] = sector(&l, i);
    }
    for (j, &v) in right.iter().enumerate() {
        let sr = sector(&r, j);
        let id = vid[&v];
        if j >= kk {
            rotation[id] = sr;
        } else if j == kk - 1 {
            // p1: left sector then right sector without its last dart
            rotation[id].extend_from_slice(&sr[..sr.len() - 1]);
        } else if j == 0 {
            // pk: left sector then right sector without its first dart
            rotation[id].extend_from_slice(&sr[1..]);
        } else {
            rotation[id].extend_from_slice(&sr[1..sr.len() - 1]);
        }
    }
    for (x, rr) in l.inner_rot.iter().enumerate() {
        rotation[ia + x] = rr.clone();
    }
    for (x, rr) in r.inner_rot.iter().enumerate() {
        rotation[ib + x] = rr.clone();
    }
    let h = EmbeddedGraph::new(total, bld.edges, rotation).map_err(|e| PartitionError::NotPlane(e.to_string()))?;
    // the dart from p1 to its predecessor on the left cycle bounds the outer face
    let start = l.prev[0];
    let mut walk = Vec::new();
    let mut d = start;
    loop {
        walk.push(h.tail(d));
        d = h.face_next(d);
        if d == start {
            break;
        }
    }
    walk.reverse();
    if walk.iter().any(|&x| x >= ng) {
        return Err(PartitionError::NotPlane("inner node on the outer face".into()));
    }
    Ok(walk.into_iter().map(|x| names[x]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgraph::{ClusterTree, TreeSpec};

    #[test]
    fn cycle_star_outer_face_is_ground() {
        let t = ClusterTree::from_spec(6, &TreeSpec::flat(&[(0..6).collect()])).unwrap();
        for labels in super::super::flat::nc_label_sequences(6) {
            let p = NcPartition::from_labels(&[0, 1, 2, 3, 4, 5], &labels, &t);
            let h = cycle_star(&p).unwrap();
            assert!(h.graph.is_biconnected());
            assert_eq!(h.outer_ground(), vec![0, 1, 2, 3, 4, 5]);
        }
    }

    #[test]
    fn crossing_partition_is_not_plane() {
        let t = ClusterTree::from_spec(4, &TreeSpec::flat(&[(0..4).collect()])).unwrap();
        let p = NcPartition::new(&[0, 1, 2, 3], &[vec![0, 2], vec![1, 3]], &t).unwrap();
        assert!(matches!(cycle_star(&p), Err(PartitionError::NotPlane(_))));
    }
}
