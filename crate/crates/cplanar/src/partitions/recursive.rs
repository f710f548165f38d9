use std::collections::{BTreeMap, HashMap};

use super::flat::{labels_non_crossing, nc_label_sequences, MergeFrame, Part};
use super::plane::{cycle_tree, glue_along_path};
use super::PartitionError;
use crate::cgraph::{ClusterTree, Dsu, NodeId};
use crate::embedding::Vertex;

/// A laminar family of parts over a cyclic ground, each part labelled by the
/// deepest cluster containing it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RecursiveNcPartition {
    ground: Vec<Vertex>,
    parts: Vec<Part>,
}

impl RecursiveNcPartition {
    /// Builds from explicit parts. Duplicate sets are collapsed; labels are
    /// recomputed as deepest common clusters.
    pub fn new(ground: &[Vertex], parts: &[Vec<Vertex>], tree: &ClusterTree) -> Result<Self, PartitionError> {
        let pos: HashMap<Vertex, usize> = ground.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        if pos.len() != ground.len() {
            return Err(PartitionError::NotAPartition("repeated ground element".into()));
        }
        let mut sets: Vec<Vec<usize>> = Vec::new();
        for p in parts {
            if p.is_empty() {
                return Err(PartitionError::NotAPartition("empty part".into()));
            }
            let mut s = p
                .iter()
                .map(|v| pos.get(v).copied().ok_or_else(|| PartitionError::NotAPartition(format!("{v} not in ground"))))
                .collect::<Result<Vec<_>, _>>()?;
            s.sort_unstable();
            s.dedup();
            sets.push(s);
        }
        Ok(Self::from_positions(ground, sets, tree))
    }

    fn from_positions(ground: &[Vertex], mut sets: Vec<Vec<usize>>, tree: &ClusterTree) -> Self {
        sets.sort();
        sets.dedup();
        let parts = sets
            .into_iter()
            .map(|s| {
                let elems: Vec<Vertex> = s.iter().map(|&i| ground[i]).collect();
                let cluster = tree.lca_set(&elems);
                Part { elems, cluster }
            })
            .collect();
        RecursiveNcPartition {
            ground: ground.to_vec(),
            parts,
        }
    }

    pub fn ground(&self) -> &[Vertex] {
        &self.ground
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    fn position_sets(&self) -> Vec<Vec<usize>> {
        let pos: HashMap<Vertex, usize> = self.ground.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        self.parts
            .iter()
            .map(|p| {
                let mut s: Vec<usize> = p.elems.iter().map(|v| pos[v]).collect();
                s.sort_unstable();
                s
            })
            .collect()
    }

    pub fn is_laminar(&self) -> bool {
        let sets = self.position_sets();
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                let inter = sets[i].iter().filter(|x| sets[j].contains(x)).count();
                if inter != 0 && inter != sets[i].len() && inter != sets[j].len() {
                    return false;
                }
            }
        }
        true
    }

    /// Disjoint parts never interleave along the ground.
    pub fn is_non_crossing(&self) -> bool {
        let sets = self.position_sets();
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                if sets[i].iter().any(|x| sets[j].contains(x)) {
                    continue;
                }
                let mut labels = vec![2usize; self.ground.len()];
                for &x in &sets[i] {
                    labels[x] = 0;
                }
                for &x in &sets[j] {
                    labels[x] = 1;
                }
                let filtered: Vec<usize> = labels.into_iter().filter(|&l| l < 2).collect();
                if !labels_non_crossing(&filtered) {
                    return false;
                }
            }
        }
        true
    }

    /// Every part has a non-root label and every clustered ground element is
    /// covered.
    pub fn is_good(&self, tree: &ClusterTree) -> bool {
        let covered: std::collections::HashSet<Vertex> = self.parts.iter().flat_map(|p| p.elems.iter().copied()).collect();
        self.parts.iter().all(|p| p.cluster != tree.root())
            && self
                .ground
                .iter()
                .all(|&v| tree.parent(v) == Some(tree.root()) || covered.contains(&v))
    }
}

/// All good, laminar, non-crossing families over `ground` covering its
/// clustered elements, in canonical order.
pub fn enumerate_recursive(ground: &[Vertex], tree: &ClusterTree) -> Vec<RecursiveNcPartition> {
    let clustered: Vec<usize> = (0..ground.len())
        .filter(|&i| tree.parent(ground[i]) != Some(tree.root()))
        .collect();
    let mut out = Vec::new();
    for fam in covering_families(&clustered) {
        let r = RecursiveNcPartition::from_positions(ground, fam, tree);
        if r.parts.iter().all(|p| p.cluster != tree.root()) {
            out.push(r);
        }
    }
    out.sort();
    out
}

/// Laminar non-crossing families whose maximal sets partition `elems`.
fn covering_families(elems: &[usize]) -> Vec<Vec<Vec<usize>>> {
    if elems.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for labels in nc_label_sequences(elems.len()) {
        let blocks = blocks_of(elems, &labels);
        // each block is a set; append the families strictly inside it
        let mut acc: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
        for b in &blocks {
            let inner = inner_families(b);
            let mut next = Vec::new();
            for a in &acc {
                for f in &inner {
                    let mut x = a.clone();
                    x.push(b.clone());
                    x.extend(f.iter().cloned());
                    next.push(x);
                }
            }
            acc = next;
        }
        out.extend(acc);
    }
    out
}

/// Laminar non-crossing families of proper subsets of `z` (not necessarily
/// covering), including the empty family.
fn inner_families(z: &[usize]) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    for labels in nc_label_sequences(z.len()) {
        let blocks = blocks_of(z, &labels);
        let mut acc: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
        for b in &blocks {
            let mut next = Vec::new();
            for a in &acc {
                if b.len() == 1 {
                    // uncovered element
                    next.push(a.clone());
                }
                if b.len() < z.len() {
                    for f in inner_families(b) {
                        let mut x = a.clone();
                        x.push(b.clone());
                        x.extend(f);
                        next.push(x);
                    }
                }
            }
            acc = next;
        }
        out.extend(acc);
    }
    out
}

fn blocks_of(elems: &[usize], labels: &[u8]) -> Vec<Vec<usize>> {
    let k = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
    let mut blocks = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        blocks[l as usize].push(elems[i]);
    }
    blocks
}

/// Vertices `v_mu` for clusters owning some part of either input, each with
/// its nearest represented strict ancestor.
pub fn auxiliary_forest(
    a: &RecursiveNcPartition,
    b: &RecursiveNcPartition,
    tree: &ClusterTree,
) -> Vec<(NodeId, Option<NodeId>)> {
    let mut present: Vec<NodeId> = a.parts.iter().chain(&b.parts).map(|p| p.cluster).collect();
    present.sort_unstable();
    present.dedup();
    present
        .iter()
        .map(|&c| {
            let mut x = tree.parent(c);
            while let Some(y) = x {
                if present.binary_search(&y).is_ok() {
                    break;
                }
                x = tree.parent(y);
            }
            (c, x)
        })
        .collect()
}

/// Two-phase union: same-cluster intersecting parts merge first, then parts
/// are absorbed upward along the auxiliary forest, deepest clusters first.
pub fn generalized_union_recursive(
    a: &RecursiveNcPartition,
    b: &RecursiveNcPartition,
    tree: &ClusterTree,
) -> RecursiveNcPartition {
    let mut ground = a.ground.clone();
    let mut index: HashMap<Vertex, usize> = ground.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    for &v in &b.ground {
        index.entry(v).or_insert_with(|| {
            ground.push(v);
            ground.len() - 1
        });
    }
    let mut by_cluster: BTreeMap<NodeId, Vec<Vec<usize>>> = BTreeMap::new();
    for p in a.parts.iter().chain(&b.parts) {
        let mut s: Vec<usize> = p.elems.iter().map(|v| index[v]).collect();
        s.sort_unstable();
        by_cluster.entry(p.cluster).or_default().push(s);
    }
    let merge_same = |sets: &mut Vec<Vec<usize>>| {
        let n = ground.len();
        let mut dsu = Dsu::new(sets.len() + n);
        for (k, s) in sets.iter().enumerate() {
            for &x in s {
                dsu.union(k, sets.len() + x);
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (k, s) in sets.iter().enumerate() {
            groups.entry(dsu.find(k)).or_default().extend(s.iter().copied());
        }
        *sets = groups
            .into_values()
            .map(|mut s| {
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();
    };
    // phase 1
    for sets in by_cluster.values_mut() {
        merge_same(sets);
    }
    // phase 2
    let forest = auxiliary_forest(a, b, tree);
    let mut order = forest.clone();
    order.sort_by_key(|&(c, _)| std::cmp::Reverse(tree.depth(c)));
    for (mu, up) in order {
        let Some(nu) = up else { continue };
        let lower = by_cluster.get(&mu).cloned().unwrap_or_default();
        let upper = by_cluster.entry(nu).or_default();
        loop {
            let mut changed = false;
            for qi in &lower {
                for qj in upper.iter_mut() {
                    let meets = qi.iter().any(|x| qj.binary_search(x).is_ok());
                    let inside = qi.iter().all(|x| qj.binary_search(x).is_ok());
                    if meets && !inside {
                        qj.extend(qi.iter().copied());
                        qj.sort_unstable();
                        qj.dedup();
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
            merge_same(upper);
        }
    }
    let mut parts: Vec<Part> = Vec::new();
    for (c, sets) in by_cluster {
        for s in sets {
            parts.push(Part {
                elems: s.iter().map(|&i| ground[i]).collect(),
                cluster: c,
            });
        }
    }
    parts.sort();
    parts.dedup();
    RecursiveNcPartition { ground, parts }
}

/// Recursive bubble merge: two-phase union projected onto the merged
/// boundary read from the glued cycle-trees.
pub fn bubble_merge_recursive(
    a: &RecursiveNcPartition,
    b: &RecursiveNcPartition,
    tree: &ClusterTree,
) -> Result<RecursiveNcPartition, PartitionError> {
    let frame = MergeFrame::new(&a.ground, &b.ground)?;
    let ha = cycle_tree(a)?;
    let hb = cycle_tree(b)?;
    let outer = glue_along_path(&ha, &hb, &frame.shared)?;
    let mut sorted_outer = outer.clone();
    sorted_outer.sort_unstable();
    let mut sorted_target = frame.target.clone();
    sorted_target.sort_unstable();
    debug_assert_eq!(sorted_outer, sorted_target);
    let u = generalized_union_recursive(a, b, tree);
    let tpos: HashMap<Vertex, usize> = frame.target.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let sets: Vec<Vec<usize>> = u
        .parts
        .iter()
        .map(|p| {
            let mut s: Vec<usize> = p.elems.iter().filter_map(|v| tpos.get(v).copied()).collect();
            s.sort_unstable();
            s
        })
        .filter(|s| !s.is_empty())
        .collect();
    Ok(RecursiveNcPartition::from_positions(&frame.target, sets, tree))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgraph::TreeSpec;

    fn chain_tree(n: usize) -> ClusterTree {
        // all vertices inside one cluster with a nested sub-cluster chain
        let spec: TreeSpec = serde_json::from_str(&format!(
            "[[{}]]",
            (0..n).map(|v| v.to_string()).collect::<Vec<_>>().join(",")
        ))
        .unwrap();
        ClusterTree::from_spec(n, &spec).unwrap()
    }

    /// Brute force: all families of nonempty subsets that are laminar,
    /// pairwise non-crossing and cover the ground.
    fn brute_count(n: usize) -> usize {
        let subsets: Vec<u32> = (1u32..(1 << n)).collect();
        let mut count = 0;
        let m = subsets.len();
        for fam in 0u64..(1u64 << m) {
            let sets: Vec<u32> = (0..m).filter(|&i| fam >> i & 1 == 1).map(|i| subsets[i]).collect();
            let cover = sets.iter().fold(0, |a, s| a | s);
            if cover != (1 << n) - 1 {
                continue;
            }
            let mut ok = true;
            for i in 0..sets.len() {
                for j in i + 1..sets.len() {
                    let (x, y) = (sets[i], sets[j]);
                    let inter = x & y;
                    if inter != 0 && inter != x && inter != y {
                        ok = false;
                    }
                    if inter == 0 {
                        let labels: Vec<usize> = (0..n)
                            .filter(|&p| (x | y) >> p & 1 == 1)
                            .map(|p| (x >> p & 1) as usize)
                            .collect();
                        if !labels_non_crossing(&labels) {
                            ok = false;
                        }
                    }
                }
            }
            if ok {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for n in 1..=4 {
            let t = chain_tree(n);
            let ground: Vec<usize> = (0..n).collect();
            let got = enumerate_recursive(&ground, &t);
            assert!(got.iter().all(|r| r.is_laminar() && r.is_non_crossing() && r.is_good(&t)));
            assert_eq!(got.len(), brute_count(n), "n = {n}");
        }
    }

    #[test]
    fn flat_shaped_union_matches_flat_union() {
        let t = ClusterTree::from_spec(5, &TreeSpec::flat(&[(0..5).collect()])).unwrap();
        let a = RecursiveNcPartition::new(&[1, 2, 3], &[vec![1, 2], vec![3]], &t).unwrap();
        let b = RecursiveNcPartition::new(&[2, 3, 4], &[vec![2, 3], vec![4]], &t).unwrap();
        let u = generalized_union_recursive(&a, &b, &t);
        let sets: Vec<Vec<usize>> = u.parts().iter().map(|p| p.elems.clone()).collect();
        assert_eq!(sets, vec![vec![1, 2, 3], vec![4]]);
        assert_eq!(generalized_union_recursive(&a, &a, &t), a);
    }

    #[test]
    fn nested_union_hand_executed() {
        // a=0, b=1, c=2; mu = {0,1,2} contains mu' = {1}
        let spec: TreeSpec = serde_json::from_str("[[0,[1],2]]").unwrap();
        let t = ClusterTree::from_spec(3, &spec).unwrap();
        let mu = t.lca(0, 2);
        let mu1 = t.parent(1).unwrap();
        let p1 = RecursiveNcPartition::new(&[0, 1], &[vec![0, 1]], &t).unwrap();
        let p2 = RecursiveNcPartition::new(&[1, 2], &[vec![1], vec![1, 2]], &t).unwrap();
        assert_eq!(p2.parts()[0].cluster, mu1);
        let forest = auxiliary_forest(&p1, &p2, &t);
        assert!(forest.contains(&(mu1, Some(mu))));
        let u = generalized_union_recursive(&p1, &p2, &t);
        let got: Vec<(Vec<usize>, NodeId)> = u.parts().iter().map(|p| (p.elems.clone(), p.cluster)).collect();
        assert_eq!(got, vec![(vec![0, 1, 2], mu), (vec![1], mu1)]);
    }

    #[test]
    fn recursive_bubble_merge_singletons() {
        let t = chain_tree(4);
        let a = RecursiveNcPartition::new(&[0, 1, 2], &[vec![0], vec![1], vec![2]], &t).unwrap();
        let b = RecursiveNcPartition::new(&[2, 3, 0], &[vec![2], vec![3], vec![0], vec![2, 3, 0]], &t).unwrap();
        let m = bubble_merge_recursive(&a, &b, &t).unwrap();
        assert_eq!(m.ground(), &[0, 1, 2, 3]);
        assert!(m.is_laminar() && m.is_non_crossing());
        let sets: Vec<Vec<usize>> = m.parts().iter().map(|p| p.elems.clone()).collect();
        assert!(sets.contains(&vec![0, 2, 3]));
    }
}
