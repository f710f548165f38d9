//! Bottom-up computation of realizable boundary partitions over a
//! bond-carving decomposition of the dual of a 2-connected embedded c-graph.
//!
//! A state stores, for every non-root cluster meeting the boundary, the
//! partition of its boundary vertices into components (bit masks over
//! boundary positions) together with a domination count per component. For
//! flat inputs there is exactly one level per cluster and the state is the
//! cluster-labelled non-crossing partition.

use std::collections::HashMap;

use super::{DpError, Reason};
use crate::cgraph::{ClusteredGraph, Dsu, NodeId};
use crate::decomposition::{BagId, Boundary, CarvingDecomposition};
use crate::embedding::{Dart, Vertex};
use crate::partitions::{bubble_merge, catalan, LayeredPartition, MergeFrame, NcPartition};

/// Canonical state key: `(cluster, component masks)` sorted by cluster, masks
/// sorted by lowest position.
pub type StateKey = Vec<(NodeId, Vec<u64>)>;

/// Where a table entry came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    /// Chords inside the leaf face, as pairs of corner darts.
    Leaf(Vec<(Dart, Dart)>),
    /// Indices into the two children's tables.
    Merge(usize, usize),
}

#[derive(Debug, Clone)]
pub struct Entry {
    pub key: StateKey,
    /// `counts[l][p]`: vertices of the level's cluster dominated by part `p`.
    pub counts: Vec<Vec<u32>>,
    pub origin: Origin,
}

#[derive(Debug, Clone)]
pub struct BagTable {
    pub bag: BagId,
    pub boundary: Boundary,
    pub entries: Vec<Entry>,
}

impl BagTable {
    /// Entries as layered partitions over the boundary vertices.
    pub fn layered(&self, cg: &ClusteredGraph) -> Vec<LayeredPartition> {
        let ground = &self.boundary.vertices;
        let mut out: Vec<LayeredPartition> = self
            .entries
            .iter()
            .map(|e| {
                LayeredPartition::from_components(ground, cg.tree(), |c, v| {
                    let i = ground.iter().position(|&x| x == v).unwrap();
                    let (_, parts) = e.key.iter().find(|(k, _)| *k == c).expect("level present");
                    parts.iter().position(|m| m >> i & 1 == 1).expect("position covered")
                })
            })
            .collect();
        out.sort();
        out
    }

    /// Entries as flat partitions; meaningful for flat inputs only.
    pub fn flat(&self, cg: &ClusteredGraph) -> Vec<NcPartition> {
        self.entries
            .iter()
            .map(|e| key_to_nc(&e.key, &self.boundary.vertices, cg))
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DpOptions {
    /// Stop at the first bag whose table is empty.
    pub abort_on_empty: bool,
    /// Recompute every flat merge with the partition algebra and compare.
    pub check_algebra: bool,
    /// Node budget for chord enumeration at non-flat leaves.
    pub leaf_budget: usize,
}

impl Default for DpOptions {
    fn default() -> Self {
        DpOptions {
            abort_on_empty: true,
            check_algebra: false,
            leaf_budget: 2_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DpRun {
    /// Tables indexed by bag; the root and skipped bags hold `None`.
    pub tables: Vec<Option<BagTable>>,
    /// Accepting pair of entries of the root's children.
    pub accepted: Option<(usize, usize)>,
    pub reason: Option<Reason>,
    pub max_table: usize,
}

impl DpRun {
    /// Leaf chords along the predecessor links of the accepting pair.
    pub fn witness_darts(&self, d: &CarvingDecomposition) -> Option<Vec<(Dart, Dart)>> {
        let (i, j) = self.accepted?;
        let (a, b) = d.children(d.root())?;
        let mut out = Vec::new();
        let mut stack = vec![(a, i), (b, j)];
        while let Some((bag, k)) = stack.pop() {
            let t = self.tables[bag].as_ref()?;
            match &t.entries[k].origin {
                Origin::Leaf(ch) => out.extend(ch.iter().copied()),
                Origin::Merge(x, y) => {
                    let (ca, cb) = d.children(bag)?;
                    stack.push((ca, *x));
                    stack.push((cb, *y));
                }
            }
        }
        Some(out)
    }
}

fn key_to_nc(key: &StateKey, ground: &[Vertex], cg: &ClusteredGraph) -> NcPartition {
    let parts: Vec<Vec<Vertex>> = key
        .iter()
        .flat_map(|(_, ms)| ms.iter().map(|m| bits(*m as u128).map(|i| ground[i]).collect()))
        .collect();
    NcPartition::new(ground, &parts, cg.tree()).expect("flat state covers the boundary")
}

fn bits(mut m: u128) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

/// Non-root clusters meeting `ground`, sorted, with member masks.
fn memberships(ground: &[Vertex], cg: &ClusteredGraph) -> Vec<(NodeId, u64)> {
    let mut m: HashMap<NodeId, u64> = HashMap::new();
    for (i, &v) in ground.iter().enumerate() {
        for c in cg.tree().chain(v) {
            *m.entry(c).or_default() |= 1 << i;
        }
    }
    let mut out: Vec<(NodeId, u64)> = m.into_iter().collect();
    out.sort_unstable();
    out
}

/// Components per level of the cycle on `ground` plus the given chords.
fn levels_of(memb: &[(NodeId, u64)], k: usize, chords: &[(usize, usize)]) -> StateKey {
    let mut dsu = Dsu::new(k);
    memb.iter()
        .map(|&(c, mask)| {
            dsu.reset();
            let inside = |i: usize| mask >> i & 1 == 1;
            for i in 0..k {
                let j = (i + 1) % k;
                if k > 1 && inside(i) && inside(j) {
                    dsu.union(i, j);
                }
            }
            for &(i, j) in chords {
                if inside(i) && inside(j) {
                    dsu.union(i, j);
                }
            }
            let mut groups: HashMap<usize, u64> = HashMap::new();
            for i in bits(mask as u128) {
                *groups.entry(dsu.find(i)).or_default() |= 1 << i;
            }
            let mut parts: Vec<u64> = groups.into_values().collect();
            parts.sort_unstable_by_key(|m| m.trailing_zeros());
            (c, parts)
        })
        .collect()
}

fn crosses(a: (usize, usize), b: (usize, usize)) -> bool {
    let (x, y) = (a.0.min(a.1), a.0.max(a.1));
    if b.0 == x || b.0 == y || b.1 == x || b.1 == y {
        return false;
    }
    let inside = |p: usize| p > x && p < y;
    inside(b.0) != inside(b.1)
}

fn cyc_adjacent(i: usize, j: usize, k: usize) -> bool {
    (i + 1) % k == j || (j + 1) % k == i
}

/// Chords among `elems` (sorted positions) connecting them without
/// crossings, using only allowed pairs; cycle-adjacent pairs are free.
fn spanning_chords(elems: &[usize], k: usize, allowed: &dyn Fn(usize, usize) -> bool) -> Option<Vec<(usize, usize)>> {
    let path: Vec<(usize, usize)> = elems.windows(2).map(|w| (w[0], w[1])).collect();
    if path.iter().all(|&(a, b)| cyc_adjacent(a, b, k) || allowed(a, b)) {
        return Some(path.into_iter().filter(|&(a, b)| !cyc_adjacent(a, b, k)).collect());
    }
    // rare: some consecutive pair duplicates an edge outside the face
    let mut pairs = Vec::new();
    for x in 0..elems.len() {
        for y in x + 1..elems.len() {
            let (a, b) = (elems[x], elems[y]);
            if cyc_adjacent(a, b, k) || allowed(a, b) {
                pairs.push((x, y));
            }
        }
    }
    fn go(
        idx: usize,
        pairs: &[(usize, usize)],
        elems: &[usize],
        chosen: &mut Vec<(usize, usize)>,
        dsu: &mut Dsu,
        comps: usize,
    ) -> bool {
        if comps == 1 {
            return true;
        }
        for t in idx..pairs.len() {
            let (x, y) = pairs[t];
            if dsu.find(x) == dsu.find(y) {
                continue;
            }
            let c = (elems[x], elems[y]);
            if chosen.iter().any(|&o| crosses(o, c)) {
                continue;
            }
            let snapshot = dsu.clone();
            dsu.union(x, y);
            chosen.push(c);
            if go(t + 1, pairs, elems, chosen, dsu, comps - 1) {
                return true;
            }
            chosen.pop();
            *dsu = snapshot;
        }
        false
    }
    let mut chosen = Vec::new();
    let mut dsu = Dsu::new(elems.len());
    if go(0, &pairs, elems, &mut chosen, &mut dsu, elems.len()) {
        Some(chosen.into_iter().filter(|&(a, b)| !cyc_adjacent(a, b, k)).collect())
    } else {
        None
    }
}

/// Non-crossing edge-respecting labelings where parts stay inside one
/// cluster. `cl[i]` is the cluster of position `i` (flat input).
fn flat_labelings(cl: &[NodeId]) -> Vec<Vec<usize>> {
    let k = cl.len();
    let mut out = Vec::new();
    let mut labels = vec![0usize; k];
    let mut part_cluster: Vec<NodeId> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    fn go(
        i: usize,
        cl: &[NodeId],
        labels: &mut Vec<usize>,
        part_cluster: &mut Vec<NodeId>,
        stack: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let k = cl.len();
        if i == k {
            if k > 1 && cl[0] == cl[k - 1] && labels[0] != labels[k - 1] {
                return;
            }
            out.push(labels.clone());
            return;
        }
        if i > 0 && cl[i] == cl[i - 1] {
            // an edge joins i to i-1, whose part is on top of the stack
            labels[i] = labels[i - 1];
            go(i + 1, cl, labels, part_cluster, stack, out);
            return;
        }
        // start a new part
        let p = part_cluster.len();
        part_cluster.push(cl[i]);
        stack.push(p);
        labels[i] = p;
        go(i + 1, cl, labels, part_cluster, stack, out);
        stack.pop();
        part_cluster.pop();
        // join an open part of the same cluster, closing those above it
        for s in (0..stack.len()).rev() {
            let p = stack[s];
            if part_cluster[p] != cl[i] {
                continue;
            }
            let saved: Vec<usize> = stack.drain(s + 1..).collect();
            labels[i] = p;
            go(i + 1, cl, labels, part_cluster, stack, out);
            stack.extend(saved);
        }
    }
    go(0, cl, &mut labels, &mut part_cluster, &mut stack, &mut out);
    out
}

/// Realizable states of a single face: every admissible partition that some
/// set of non-crossing candidate chords inside the face produces.
fn leaf_entries(cg: &ClusteredGraph, b: &Boundary, opts: &DpOptions) -> Result<Vec<Entry>, DpError> {
    let g = cg.graph();
    let tree = cg.tree();
    let ground = &b.vertices;
    let k = ground.len();
    let memb = memberships(ground, cg);
    let allowed = |i: usize, j: usize| !g.has_edge(ground[i], ground[j]);
    let make = |chords: Vec<(usize, usize)>| -> Entry {
        let key = levels_of(&memb, k, &chords);
        let counts = key
            .iter()
            .map(|(_, ps)| ps.iter().map(|m| m.count_ones()).collect())
            .collect();
        Entry {
            key,
            counts,
            origin: Origin::Leaf(chords.iter().map(|&(i, j)| (b.darts[i], b.darts[j])).collect()),
        }
    };
    let mut out: Vec<Entry> = Vec::new();
    if tree.is_flat() {
        let cl: Vec<NodeId> = ground.iter().map(|&v| tree.parent(v).unwrap()).collect();
        for labels in flat_labelings(&cl) {
            let nparts = labels.iter().max().map_or(0, |m| m + 1);
            let mut chords = Vec::new();
            let mut ok = true;
            for p in 0..nparts {
                let elems: Vec<usize> = (0..k).filter(|&i| labels[i] == p).collect();
                match spanning_chords(&elems, k, &allowed) {
                    Some(c) => chords.extend(c),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                out.push(make(chords));
            }
        }
    } else {
        let mut cands = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                if !cyc_adjacent(i, j, k) && tree.lca(ground[i], ground[j]) != tree.root() && allowed(i, j) {
                    cands.push((i, j));
                }
            }
        }
        let mut seen: HashMap<StateKey, usize> = HashMap::new();
        let mut nodes = 0usize;
        let mut chosen = Vec::new();
        #[allow(clippy::too_many_arguments)]
        fn go(
            idx: usize,
            cands: &[(usize, usize)],
            chosen: &mut Vec<(usize, usize)>,
            memb: &[(NodeId, u64)],
            k: usize,
            lca_level: &dyn Fn(usize, usize) -> NodeId,
            seen: &mut HashMap<StateKey, usize>,
            found: &mut Vec<Vec<(usize, usize)>>,
            nodes: &mut usize,
            budget: usize,
        ) -> Result<(), usize> {
            *nodes += 1;
            if *nodes > budget {
                return Err(*nodes);
            }
            let key = levels_of(memb, k, chosen);
            if !seen.contains_key(&key) {
                seen.insert(key.clone(), found.len());
                found.push(chosen.clone());
            }
            for t in idx..cands.len() {
                let c = cands[t];
                if chosen.iter().any(|&o| crosses(o, c)) {
                    continue;
                }
                let lv = lca_level(c.0, c.1);
                let (_, parts) = key.iter().find(|(x, _)| *x == lv).expect("lca level present");
                if parts.iter().any(|m| m >> c.0 & 1 == 1 && m >> c.1 & 1 == 1) {
                    continue;
                }
                chosen.push(c);
                go(t + 1, cands, chosen, memb, k, lca_level, seen, found, nodes, budget)?;
                chosen.pop();
            }
            Ok(())
        }
        let lca_level = |i: usize, j: usize| tree.lca(ground[i], ground[j]);
        let mut found = Vec::new();
        go(
            0,
            &cands,
            &mut chosen,
            &memb,
            k,
            &lca_level,
            &mut seen,
            &mut found,
            &mut nodes,
            opts.leaf_budget,
        )
        .map_err(|n| DpError::LeafTooLarge { bag: b.bag, nodes: n })?;
        out = found.into_iter().map(make).collect();
    }
    Ok(out)
}

/// One level of a merged pair, in union space.
struct Merged {
    cluster: NodeId,
    parts: Vec<(u128, u32)>,
}

/// Merges the levels of two states. `shared` marks union positions on both
/// boundaries; counts of merged components are corrected for them.
fn merge_levels(
    a: &[(NodeId, Vec<u128>)],
    ac: &[Vec<u32>],
    b: &[(NodeId, Vec<u128>)],
    bc: &[Vec<u32>],
    shared: u128,
) -> Vec<Merged> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].0 <= b[j].0);
        let take_b = i == a.len() || (j < b.len() && b[j].0 <= a[i].0);
        let cluster = if take_a { a[i].0 } else { b[j].0 };
        let mut parts: Vec<(u128, u32)> = Vec::new();
        if take_a {
            parts.extend(a[i].1.iter().copied().zip(ac[i].iter().copied()));
            i += 1;
        }
        if take_b {
            for (&m, &c) in b[j].1.iter().zip(&bc[j]) {
                let mut mask = m;
                let mut count = c;
                let mut k = 0;
                while k < parts.len() {
                    if parts[k].0 & mask != 0 {
                        let (pm, pc) = parts.swap_remove(k);
                        mask |= pm;
                        count += pc;
                    } else {
                        k += 1;
                    }
                }
                parts.push((mask, count));
            }
            j += 1;
            for p in parts.iter_mut() {
                p.1 -= (p.0 & shared).count_ones();
            }
        }
        out.push(Merged { cluster, parts });
    }
    out
}

fn widen(key: &StateKey, map: &[usize]) -> Vec<(NodeId, Vec<u128>)> {
    key.iter()
        .map(|(c, ms)| {
            (
                *c,
                ms.iter()
                    .map(|&m| bits(m as u128).fold(0u128, |acc, i| acc | 1u128 << map[i]))
                    .collect(),
            )
        })
        .collect()
}

fn table_bound(flat: bool, boundary: usize) -> u128 {
    if flat {
        catalan(boundary)
    } else {
        catalan(2 * boundary - 1)
    }
}

/// Runs the dynamic program. The graph must be simple and 2-connected and
/// `d` a bond-carving decomposition of its dual.
pub fn run(cg: &ClusteredGraph, d: &CarvingDecomposition, opts: &DpOptions) -> Result<DpRun, DpError> {
    let g = cg.graph();
    let tree = cg.tree();
    let flat = tree.is_flat();
    let nb = d.num_bags();
    let root = d.root();
    let mut run = DpRun {
        tables: vec![None; nb],
        accepted: None,
        reason: None,
        max_table: 0,
    };
    let (ra, rb) = d.children(root).ok_or(DpError::TooFewFaces)?;
    let boundaries = d.interface_cycles(g)?;
    for (bag, boundary) in boundaries.into_iter().enumerate() {
        if boundary.vertices.len() > 64 {
            return Err(DpError::BoundaryTooLong {
                bag,
                len: boundary.vertices.len(),
            });
        }
        let entries = match d.children(bag) {
            None => leaf_entries(cg, &boundary, opts)?,
            Some((x, y)) => {
                let (tx, ty) = match (&run.tables[x], &run.tables[y]) {
                    (Some(tx), Some(ty)) => (tx, ty),
                    _ => return Err(DpError::MissingChild(bag)),
                };
                combine(cg, tx, ty, &boundary, opts)?
            }
        };
        let bound = table_bound(flat, boundary.vertices.len());
        if entries.len() as u128 > bound {
            return Err(DpError::TableBound {
                bag,
                size: entries.len(),
                bound,
            });
        }
        run.max_table = run.max_table.max(entries.len());
        let empty = entries.is_empty();
        run.tables[bag] = Some(BagTable { bag, boundary, entries });
        if empty && run.reason.is_none() {
            run.reason = Some(Reason::ClusterSeparator(bag));
            if opts.abort_on_empty {
                return Ok(run);
            }
        }
    }
    if run.reason.is_some() {
        return Ok(run);
    }
    let ta = run.tables[ra].as_ref().unwrap();
    let tb = run.tables[rb].as_ref().unwrap();
    let pos: HashMap<Vertex, usize> = ta.boundary.vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let map: Vec<usize> = tb
        .boundary
        .vertices
        .iter()
        .map(|v| pos.get(v).copied().ok_or(DpError::RootMismatch))
        .collect::<Result<_, _>>()?;
    if map.len() != pos.len() {
        return Err(DpError::RootMismatch);
    }
    let all = if pos.len() == 128 { u128::MAX } else { (1u128 << pos.len()) - 1 };
    let identity: Vec<usize> = (0..pos.len()).collect();
    let wb: Vec<_> = tb.entries.iter().map(|e| widen(&e.key, &map)).collect();
    'outer: for (i, ea) in ta.entries.iter().enumerate() {
        let wa = widen(&ea.key, &identity);
        for (j, eb) in tb.entries.iter().enumerate() {
            let merged = merge_levels(&wa, &ea.counts, &wb[j], &eb.counts, all);
            if merged.iter().all(|l| l.parts.len() == 1) {
                run.accepted = Some((i, j));
                break 'outer;
            }
        }
    }
    if run.accepted.is_none() {
        run.reason = Some(Reason::RootMergeFailure);
    }
    Ok(run)
}

fn combine(
    cg: &ClusteredGraph,
    ta: &BagTable,
    tb: &BagTable,
    boundary: &Boundary,
    opts: &DpOptions,
) -> Result<Vec<Entry>, DpError> {
    let tree = cg.tree();
    let frame = MergeFrame::new(&ta.boundary.vertices, &tb.boundary.vertices)?;
    if frame.target != boundary.vertices {
        return Err(DpError::BoundaryMismatch(boundary.bag));
    }
    let la = ta.boundary.vertices.len();
    let identity: Vec<usize> = (0..la).collect();
    let mut shared = 0u128;
    for &u in &frame.right_to_union {
        if u < la {
            shared |= 1 << u;
        }
    }
    let mut target = 0u128;
    for (u, t) in frame.union_to_target.iter().enumerate() {
        if t.is_some() {
            target |= 1 << u;
        }
    }
    let project = |m: u128| -> u64 {
        bits(m).fold(0u64, |acc, u| acc | 1u64 << frame.union_to_target[u].unwrap())
    };
    let wa: Vec<_> = ta.entries.iter().map(|e| widen(&e.key, &identity)).collect();
    let wb: Vec<_> = tb.entries.iter().map(|e| widen(&e.key, &frame.right_to_union)).collect();
    let mut out: Vec<Entry> = Vec::new();
    let mut index: HashMap<StateKey, usize> = HashMap::new();
    for (i, ea) in ta.entries.iter().enumerate() {
        'pair: for (j, eb) in tb.entries.iter().enumerate() {
            let merged = merge_levels(&wa[i], &ea.counts, &wb[j], &eb.counts, shared);
            let mut key: StateKey = Vec::with_capacity(merged.len());
            let mut counts = Vec::with_capacity(merged.len());
            for level in merged {
                let mut parts: Vec<(u64, u32)> = Vec::with_capacity(level.parts.len());
                for (m, c) in level.parts {
                    if m & target == 0 {
                        if (c as usize) < tree.size(level.cluster) {
                            // this component can no longer reach the rest of its cluster
                            continue 'pair;
                        }
                    } else {
                        parts.push((project(m & target), c));
                    }
                }
                if parts.is_empty() {
                    continue;
                }
                parts.sort_unstable_by_key(|p| p.0.trailing_zeros());
                key.push((level.cluster, parts.iter().map(|p| p.0).collect()));
                counts.push(parts.iter().map(|p| p.1).collect::<Vec<u32>>());
            }
            if opts.check_algebra && tree.is_flat() {
                let pa = key_to_nc(&ea.key, &ta.boundary.vertices, cg);
                let pb = key_to_nc(&eb.key, &tb.boundary.vertices, cg);
                let expect = bubble_merge(&pa, &pb, tree)?;
                let got = key_to_nc(&key, &boundary.vertices, cg);
                if expect != got {
                    return Err(DpError::AlgebraMismatch(boundary.bag));
                }
            }
            match index.get(&key) {
                Some(&k) => {
                    // per-cluster totals are properties of the bag, not of the pair
                    let total = |e: &Entry| -> Vec<u32> { e.counts.iter().map(|c| c.iter().sum()).collect() };
                    if total(&out[k]).as_slice() != counts.iter().map(|c| c.iter().sum()).collect::<Vec<u32>>().as_slice() {
                        return Err(DpError::InconsistentCounts(boundary.bag));
                    }
                }
                None => {
                    index.insert(key.clone(), out.len());
                    out.push(Entry {
                        key,
                        counts,
                        origin: Origin::Merge(i, j),
                    });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_labelings_single_cluster_triangle() {
        // consecutive same-cluster vertices are joined by face edges
        assert_eq!(flat_labelings(&[7, 7, 7]).len(), 1);
    }

    #[test]
    fn flat_labelings_alternating_square() {
        let got = flat_labelings(&[5, 6, 5, 6]);
        assert_eq!(got.len(), 3);
    }

    #[test]
    fn spanning_chords_avoid_forbidden_pairs() {
        let allowed = |a: usize, b: usize| !((a, b) == (0, 2) || (a, b) == (2, 0));
        let c = spanning_chords(&[0, 2, 4], 6, &allowed).unwrap();
        assert!(c.iter().all(|&(a, b)| allowed(a, b)));
        assert_eq!(c.len(), 2);
        let none = |_: usize, _: usize| false;
        assert!(spanning_chords(&[0, 2], 5, &none).is_none());
    }

    #[test]
    fn crossing_detection() {
        assert!(crosses((0, 2), (1, 3)));
        assert!(!crosses((0, 2), (2, 4)));
        assert!(!crosses((0, 3), (1, 2)));
    }
}
