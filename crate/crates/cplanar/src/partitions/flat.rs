use std::collections::HashMap;
use std::fmt;

use super::plane::{cycle_star, glue_along_path};
use super::PartitionError;
use crate::cgraph::{ClusterTree, Dsu, NodeId};
use crate::embedding::Vertex;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Part {
    /// Elements in ground order.
    pub elems: Vec<Vertex>,
    /// Deepest cluster containing every element.
    pub cluster: NodeId,
}

/// A cluster-labelled partition of a cyclic ground sequence.
///
/// The ground is stored rotated to start at its smallest vertex; parts are
/// sorted by their first position. Results of [`generalized_union`] use a
/// plain concatenated ground and need not be non-crossing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NcPartition {
    ground: Vec<Vertex>,
    parts: Vec<Part>,
}

fn rotate_to_min(ground: &[Vertex]) -> Vec<Vertex> {
    if ground.is_empty() {
        return Vec::new();
    }
    let i = (0..ground.len()).min_by_key(|&i| ground[i]).unwrap();
    ground[i..].iter().chain(&ground[..i]).copied().collect()
}

impl NcPartition {
    /// Validates that `parts` partition `ground` and labels each part by
    /// its deepest common cluster.
    pub fn new(ground: &[Vertex], parts: &[Vec<Vertex>], tree: &ClusterTree) -> Result<Self, PartitionError> {
        Self::build(rotate_to_min(ground), parts, tree)
    }

    fn build(ground: Vec<Vertex>, parts: &[Vec<Vertex>], tree: &ClusterTree) -> Result<Self, PartitionError> {
        let pos: HashMap<Vertex, usize> = ground.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        if pos.len() != ground.len() {
            return Err(PartitionError::NotAPartition("repeated ground element".into()));
        }
        let mut seen = vec![false; ground.len()];
        let mut out = Vec::with_capacity(parts.len());
        for p in parts {
            if p.is_empty() {
                return Err(PartitionError::NotAPartition("empty part".into()));
            }
            let mut ps = Vec::with_capacity(p.len());
            for v in p {
                let &i = pos
                    .get(v)
                    .ok_or_else(|| PartitionError::NotAPartition(format!("{v} not in ground")))?;
                if seen[i] {
                    return Err(PartitionError::NotAPartition(format!("{v} covered twice")));
                }
                seen[i] = true;
                ps.push(i);
            }
            ps.sort_unstable();
            let elems: Vec<Vertex> = ps.iter().map(|&i| ground[i]).collect();
            let cluster = tree.lca_set(&elems);
            out.push((ps[0], Part { elems, cluster }));
        }
        if seen.iter().any(|s| !s) {
            return Err(PartitionError::NotAPartition("ground not covered".into()));
        }
        out.sort_by_key(|x| x.0);
        Ok(NcPartition {
            ground,
            parts: out.into_iter().map(|x| x.1).collect(),
        })
    }

    /// Partition given by one label per ground position.
    pub fn from_labels(ground: &[Vertex], labels: &[u8], tree: &ClusterTree) -> Self {
        let k = labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
        let mut parts = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            parts[l as usize].push(ground[i]);
        }
        parts.retain(|p| !p.is_empty());
        NcPartition::new(ground, &parts, tree).expect("labels define a partition")
    }

    pub fn singletons(ground: &[Vertex], tree: &ClusterTree) -> Self {
        let parts: Vec<Vec<Vertex>> = ground.iter().map(|&v| vec![v]).collect();
        NcPartition::new(ground, &parts, tree).unwrap()
    }

    pub fn ground(&self) -> &[Vertex] {
        &self.ground
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }

    /// Part label of every ground position.
    pub fn labels(&self) -> Vec<usize> {
        let pos: HashMap<Vertex, usize> = self.ground.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut l = vec![0; self.ground.len()];
        for (k, p) in self.parts.iter().enumerate() {
            for v in &p.elems {
                l[pos[v]] = k;
            }
        }
        l
    }

    pub fn is_non_crossing(&self) -> bool {
        labels_non_crossing(&self.labels())
    }

    /// Every part lies inside a single non-root cluster.
    pub fn is_good(&self, tree: &ClusterTree) -> bool {
        self.parts.iter().all(|p| p.cluster != tree.root())
    }

    pub fn is_admissible(&self, tree: &ClusterTree) -> bool {
        self.is_good(tree) && self.is_non_crossing()
    }
}

impl fmt::Display for NcPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.ground.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")?;
        for p in &self.parts {
            write!(f, " {{")?;
            for (i, v) in p.elems.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, "}}@{}", p.cluster)?;
        }
        Ok(())
    }
}

/// True if no two labels interleave as `x .. y .. x .. y`.
pub(crate) fn labels_non_crossing(labels: &[usize]) -> bool {
    let k = labels.len();
    for i in 0..k {
        for j in i + 1..k {
            if labels[i] != labels[j] {
                continue;
            }
            // inside (i, j) and outside must not share a label different from labels[i]
            for a in i + 1..j {
                if labels[a] == labels[i] {
                    continue;
                }
                if labels[..i].iter().chain(&labels[j + 1..]).any(|&x| x == labels[a]) {
                    return false;
                }
            }
        }
    }
    true
}

/// All non-crossing partitions of `k` positions as restricted-growth label
/// sequences, in lexicographic order.
pub fn nc_label_sequences(k: usize) -> Vec<Vec<u8>> {
    fn go(i: usize, k: usize, cur: &mut Vec<u8>, stack: &mut Vec<u8>, next: u8, out: &mut Vec<Vec<u8>>) {
        if i == k {
            out.push(cur.clone());
            return;
        }
        // join an open block; blocks above it close for good
        for j in 0..stack.len() {
            let b = stack[j];
            let saved: Vec<u8> = stack[j + 1..].to_vec();
            stack.truncate(j + 1);
            cur.push(b);
            go(i + 1, k, cur, stack, next, out);
            cur.pop();
            stack.extend(saved);
        }
        stack.push(next);
        cur.push(next);
        go(i + 1, k, cur, stack, next + 1, out);
        cur.pop();
        stack.pop();
    }
    let mut out = Vec::new();
    go(0, k, &mut Vec::new(), &mut Vec::new(), 0, &mut out);
    out.sort();
    out
}

/// All admissible (non-crossing and good) flat partitions of `ground`, in
/// canonical order.
pub fn enumerate_admissible(ground: &[Vertex], tree: &ClusterTree) -> Vec<NcPartition> {
    let mut out: Vec<NcPartition> = nc_label_sequences(ground.len())
        .iter()
        .map(|l| NcPartition::from_labels(ground, l, tree))
        .filter(|p| p.is_good(tree))
        .collect();
    out.sort();
    out
}

/// Closure of the overlap relation over the parts of both inputs. The
/// result ground is `a`'s ground followed by the new elements of `b`.
pub fn generalized_union(a: &NcPartition, b: &NcPartition) -> Result<NcPartition, PartitionError> {
    let mut ground = a.ground.clone();
    let mut index: HashMap<Vertex, usize> = ground.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    for &v in &b.ground {
        if let std::collections::hash_map::Entry::Vacant(e) = index.entry(v) {
            e.insert(ground.len());
            ground.push(v);
        }
    }
    // bipartite element/part incidence closure
    let parts: Vec<&Part> = a.parts.iter().chain(&b.parts).collect();
    let np = parts.len();
    let mut dsu = Dsu::new(np + ground.len());
    for (k, p) in parts.iter().enumerate() {
        for v in &p.elems {
            dsu.union(k, np + index[v]);
        }
    }
    let mut comps: std::collections::BTreeMap<usize, (Vec<usize>, NodeId)> = Default::default();
    for (k, p) in parts.iter().enumerate() {
        let r = dsu.find(k);
        let e = comps.entry(r).or_insert((Vec::new(), p.cluster));
        if e.1 != p.cluster {
            return Err(PartitionError::MixedClusterMerge);
        }
        e.0.extend(p.elems.iter().map(|v| index[v]));
    }
    let mut out: Vec<Part> = comps
        .into_values()
        .map(|(mut ps, cluster)| {
            ps.sort_unstable();
            ps.dedup();
            (ps, cluster)
        })
        .map(|(ps, cluster)| Part {
            elems: ps.iter().map(|&i| ground[i]).collect(),
            cluster,
        })
        .collect();
    out.sort_by_key(|p| index[&p.elems[0]]);
    Ok(NcPartition { ground, parts: out })
}

/// Restriction of `p` to the elements of `subset`, taken in the given cyclic
/// order. Part clusters are kept.
pub fn project(p: &NcPartition, subset: &[Vertex]) -> NcPartition {
    let ground = rotate_to_min(subset);
    let pos: HashMap<Vertex, usize> = ground.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut parts: Vec<(usize, Part)> = p
        .parts
        .iter()
        .filter_map(|part| {
            let mut ps: Vec<usize> = part.elems.iter().filter_map(|v| pos.get(v).copied()).collect();
            if ps.is_empty() {
                return None;
            }
            ps.sort_unstable();
            Some((
                ps[0],
                Part {
                    elems: ps.iter().map(|&i| ground[i]).collect(),
                    cluster: part.cluster,
                },
            ))
        })
        .collect();
    parts.sort_by_key(|x| x.0);
    NcPartition {
        ground,
        parts: parts.into_iter().map(|x| x.1).collect(),
    }
}

/// Geometry of gluing two boundary cycles along their shared path.
///
/// With `left = [p1..pk, x1..xr]` and `right = [pk..p1, y1..ys]` (both
/// clockwise), the merged boundary is `[pk, x1..xr, p1, y1..ys]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeFrame {
    pub left: Vec<Vertex>,
    pub right: Vec<Vertex>,
    /// Shared path `p1..pk` in left order.
    pub shared: Vec<Vertex>,
    /// Merged boundary, rotated to start at its smallest vertex.
    pub target: Vec<Vertex>,
    /// `left` followed by the elements of `right` not in `left`.
    pub union: Vec<Vertex>,
    pub right_to_union: Vec<usize>,
    pub union_to_target: Vec<Option<usize>>,
}

fn shared_run(seq: &[Vertex], is_shared: &dyn Fn(Vertex) -> bool) -> Result<Option<usize>, ()> {
    let k = seq.len();
    if seq.iter().all(|&v| is_shared(v)) {
        return Ok(None);
    }
    let starts: Vec<usize> = (0..k)
        .filter(|&i| is_shared(seq[i]) && !is_shared(seq[(i + k - 1) % k]))
        .collect();
    if starts.len() != 1 {
        return Err(());
    }
    Ok(Some(starts[0]))
}

impl MergeFrame {
    pub fn new(left: &[Vertex], right: &[Vertex]) -> Result<MergeFrame, PartitionError> {
        let rset: std::collections::HashSet<Vertex> = right.iter().copied().collect();
        let lset: std::collections::HashSet<Vertex> = left.iter().copied().collect();
        let shared_count = left.iter().filter(|v| rset.contains(v)).count();
        let extra = left.len() + right.len() - 2 * shared_count;
        if shared_count < 2 || extra == 0 {
            return Err(PartitionError::PreconditionViolation(
                "ii",
                format!("{shared_count} shared elements, {extra} unshared"),
            ));
        }
        let in_right = |v: Vertex| rset.contains(&v);
        let in_left = |v: Vertex| lset.contains(&v);
        let lrun = shared_run(left, &in_right)
            .map_err(|_| PartitionError::PreconditionViolation("i", "shared elements not consecutive in left".into()))?;
        let rrun = shared_run(right, &in_left)
            .map_err(|_| PartitionError::PreconditionViolation("i", "shared elements not consecutive in right".into()))?;
        let rot = |s: &[Vertex], i: usize| -> Vec<Vertex> { s[i..].iter().chain(&s[..i]).copied().collect() };
        let k = shared_count;
        // left_rot = [p1..pk, x..], right_rot = [pk..p1, y..]
        let (left_rot, right_rot) = match (lrun, rrun) {
            (Some(li), _) => {
                let l = rot(left, li);
                let pk = l[k - 1];
                let ri = right.iter().position(|&v| v == pk).unwrap();
                (l, rot(right, ri))
            }
            (None, Some(ri)) => {
                let r = rot(right, ri);
                let p1 = r[k - 1];
                let li = left.iter().position(|&v| v == p1).unwrap();
                (rot(left, li), r)
            }
            (None, None) => unreachable!("extra > 0"),
        };
        for j in 0..k {
            if right_rot[j] != left_rot[k - 1 - j] {
                return Err(PartitionError::PreconditionViolation(
                    "iii",
                    "shared path not traversed in reverse".into(),
                ));
            }
        }
        let mut target = vec![left_rot[k - 1]];
        target.extend_from_slice(&left_rot[k..]);
        target.push(left_rot[0]);
        target.extend_from_slice(&right_rot[k..]);
        let target = rotate_to_min(&target);
        let mut union = left.to_vec();
        let mut index: HashMap<Vertex, usize> = union.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let right_to_union = right
            .iter()
            .map(|&v| {
                *index.entry(v).or_insert_with(|| {
                    union.push(v);
                    union.len() - 1
                })
            })
            .collect();
        let tpos: HashMap<Vertex, usize> = target.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let union_to_target = union.iter().map(|v| tpos.get(v).copied()).collect();
        Ok(MergeFrame {
            left: left.to_vec(),
            right: right.to_vec(),
            shared: left_rot[..k].to_vec(),
            target,
            union,
            right_to_union,
            union_to_target,
        })
    }
}

/// Bubble merge of two flat partitions whose grounds satisfy the gluing
/// preconditions. The merged ground is read off the outer face of the plane
/// graph obtained by gluing the two cycle-stars.
pub fn bubble_merge(a: &NcPartition, b: &NcPartition, tree: &ClusterTree) -> Result<NcPartition, PartitionError> {
    let frame = MergeFrame::new(&a.ground, &b.ground)?;
    let ha = cycle_star(a)?;
    let hb = cycle_star(b)?;
    let outer = glue_along_path(&ha, &hb, &frame.shared)?;
    let outer = rotate_to_min(&outer);
    debug_assert_eq!(outer, frame.target);
    let u = generalized_union(a, b)?;
    let p = project(&u, &outer);
    assert!(p.is_admissible(tree), "bubble merge produced a non-admissible partition");
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgraph::TreeSpec;
    use proptest::prelude::*;

    fn one_cluster(n: usize) -> ClusterTree {
        ClusterTree::from_spec(n, &TreeSpec::flat(&[(0..n).collect()])).unwrap()
    }

    fn brute_nc_count(k: usize) -> usize {
        // all set partitions by restricted growth strings, filtered by crossing
        fn go(i: usize, k: usize, cur: &mut Vec<usize>, max: usize, count: &mut usize) {
            if i == k {
                if labels_non_crossing(cur) {
                    *count += 1;
                }
                return;
            }
            for l in 0..=max {
                cur.push(l);
                go(i + 1, k, cur, if l == max { max + 1 } else { max }, count);
                cur.pop();
            }
        }
        let mut c = 0;
        go(0, k, &mut Vec::new(), 0, &mut c);
        c
    }

    #[test]
    fn flat_counts_are_catalan() {
        for n in 1..=7 {
            let t = one_cluster(n);
            let ground: Vec<usize> = (0..n).collect();
            let got = enumerate_admissible(&ground, &t).len();
            assert_eq!(got as u128, crate::partitions::catalan(n));
            assert_eq!(got, brute_nc_count(n));
        }
    }

    #[test]
    fn goodness_filter() {
        // a, c in one cluster, b in another
        let t = ClusterTree::from_spec(3, &TreeSpec::flat(&[vec![0, 2], vec![1]])).unwrap();
        let ps = enumerate_admissible(&[0, 1, 2], &t);
        assert_eq!(ps.len(), 2);
    }

    #[test]
    fn union_examples() {
        let t = one_cluster(5);
        let a = NcPartition::new(&[1, 2, 3], &[vec![1, 2], vec![3]], &t).unwrap();
        let b = NcPartition::new(&[2, 3, 4], &[vec![2, 3], vec![4]], &t).unwrap();
        let u = generalized_union(&a, &b).unwrap();
        let parts: Vec<Vec<usize>> = u.parts().iter().map(|p| p.elems.clone()).collect();
        assert_eq!(parts, vec![vec![1, 2, 3], vec![4]]);
        assert_eq!(generalized_union(&a, &a).unwrap(), a);
        let c = NcPartition::new(&[0, 4], &[vec![0], vec![4]], &t).unwrap();
        let d = NcPartition::new(&[1, 2], &[vec![1, 2]], &t).unwrap();
        assert_eq!(generalized_union(&c, &d).unwrap().parts().len(), 3);
    }

    #[test]
    fn mixed_cluster_merge() {
        let t = ClusterTree::from_spec(3, &TreeSpec::flat(&[vec![0, 1], vec![2]])).unwrap();
        let a = NcPartition::new(&[0, 1], &[vec![0, 1]], &t).unwrap();
        let b = NcPartition::new(&[1, 2], &[vec![1], vec![2]], &t).unwrap();
        // overlap on 1 with the same cluster is fine
        assert!(generalized_union(&a, &b).is_ok());
        let c = NcPartition::new(&[1, 2], &[vec![1, 2]], &t).unwrap();
        assert_eq!(generalized_union(&a, &c), Err(PartitionError::MixedClusterMerge));
    }

    #[test]
    fn projection_examples() {
        let t = one_cluster(4);
        let p = NcPartition::new(&[1, 2, 3], &[vec![1, 2], vec![3]], &t).unwrap();
        let q = project(&p, &[1, 3]);
        assert_eq!(q.parts().len(), 2);
        assert_eq!(project(&p, p.ground()), p);
        let p = NcPartition::new(&[1, 2, 3], &[vec![1, 2, 3]], &t).unwrap();
        assert_eq!(project(&p, &[2]).parts()[0].elems, vec![2]);
    }

    #[test]
    fn bubble_merge_examples() {
        // a=0, b=1, c=2, d=3
        let t = one_cluster(4);
        let a = NcPartition::singletons(&[0, 1, 2], &t);
        let b = NcPartition::singletons(&[2, 3, 0], &t);
        let m = bubble_merge(&a, &b, &t).unwrap();
        assert_eq!(m.ground(), &[0, 1, 2, 3]);
        assert_eq!(m.parts().len(), 4);

        let a = NcPartition::new(&[0, 1, 2], &[vec![0, 2], vec![1]], &t).unwrap();
        let b = NcPartition::new(&[2, 3, 0], &[vec![2, 0], vec![3]], &t).unwrap();
        let m = bubble_merge(&a, &b, &t).unwrap();
        let parts: Vec<Vec<usize>> = m.parts().iter().map(|p| p.elems.clone()).collect();
        assert_eq!(parts, vec![vec![0, 2], vec![1], vec![3]]);
    }

    #[test]
    fn bubble_merge_drops_interior_shared() {
        // left (0,1,2,3) and right (3,2,1,4) share path 1,2,3; vertex 2 drops
        let t = one_cluster(5);
        let a = NcPartition::new(&[0, 1, 2, 3], &[vec![0, 2], vec![1], vec![3]], &t).unwrap();
        let b = NcPartition::singletons(&[3, 2, 1, 4], &t);
        let m = bubble_merge(&a, &b, &t).unwrap();
        assert_eq!(m.ground(), &[0, 1, 4, 3]);
        let parts: Vec<Vec<usize>> = m.parts().iter().map(|p| p.elems.clone()).collect();
        assert_eq!(parts, vec![vec![0], vec![1], vec![4], vec![3]]);
    }

    #[test]
    fn bubble_merge_preconditions() {
        let t = one_cluster(6);
        let a = NcPartition::singletons(&[0, 1, 2], &t);
        let b = NcPartition::singletons(&[0, 1, 2], &t);
        assert!(matches!(
            bubble_merge(&a, &b, &t),
            Err(PartitionError::PreconditionViolation("ii", _))
        ));
        let b = NcPartition::singletons(&[0, 3, 2, 4, 1, 5], &t);
        assert!(matches!(
            bubble_merge(&a, &b, &t),
            Err(PartitionError::PreconditionViolation("i", _))
        ));
        let b = NcPartition::singletons(&[2, 0, 3], &t);
        assert!(matches!(
            bubble_merge(&a, &b, &t),
            Err(PartitionError::PreconditionViolation("iii", _))
        ));
    }

    fn quadratic_union(a: &NcPartition, b: &NcPartition) -> Vec<Vec<usize>> {
        let mut sets: Vec<Vec<usize>> = a.parts().iter().chain(b.parts()).map(|p| p.elems.clone()).collect();
        loop {
            let mut merged = false;
            'outer: for i in 0..sets.len() {
                for j in i + 1..sets.len() {
                    if sets[i].iter().any(|x| sets[j].contains(x)) {
                        let s = sets.remove(j);
                        sets[i].extend(s);
                        sets[i].sort_unstable();
                        sets[i].dedup();
                        merged = true;
                        break 'outer;
                    }
                }
            }
            if !merged {
                break;
            }
        }
        sets.sort();
        sets
    }

    fn parts_sorted(p: &NcPartition) -> Vec<Vec<usize>> {
        let mut v: Vec<Vec<usize>> = p
            .parts()
            .iter()
            .map(|x| {
                let mut e = x.elems.clone();
                e.sort_unstable();
                e
            })
            .collect();
        v.sort();
        v
    }

    proptest! {
        #[test]
        fn union_matches_fixed_point(la in proptest::collection::vec(0u8..4, 1..7), lb in proptest::collection::vec(0u8..4, 1..7), shift in 0usize..4) {
            let t = one_cluster(12);
            let ga: Vec<usize> = (0..la.len()).collect();
            let gb: Vec<usize> = (shift..shift + lb.len()).collect();
            let mk = |g: &[usize], l: &[u8]| {
                let mut parts = vec![Vec::new(); 4];
                for (i, &x) in l.iter().enumerate() { parts[x as usize].push(g[i]); }
                parts.retain(|p: &Vec<usize>| !p.is_empty());
                NcPartition::new(g, &parts, &t).unwrap()
            };
            let a = mk(&ga, &la);
            let b = mk(&gb, &lb);
            let ab = generalized_union(&a, &b).unwrap();
            let ba = generalized_union(&b, &a).unwrap();
            prop_assert_eq!(parts_sorted(&ab), quadratic_union(&a, &b));
            prop_assert_eq!(parts_sorted(&ab), parts_sorted(&ba));
            let c = mk(&ga, &la);
            let left = generalized_union(&generalized_union(&a, &b).unwrap(), &c).unwrap();
            let right = generalized_union(&a, &generalized_union(&b, &c).unwrap()).unwrap();
            prop_assert_eq!(parts_sorted(&left), parts_sorted(&right));
        }
    }
}
