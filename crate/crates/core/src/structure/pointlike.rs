use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spaces::TripletComparisonSpace;

/// Equality tolerance for weighted (dense) spaces; induced spaces compare exactly.
pub const POINT_LIKE_TOLERANCE: f64 = 1e-12;

/// Default subset-count cap for exhaustive enumeration on general spaces.
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 16;

fn tolerance(t: &TripletComparisonSpace) -> f64 {
    if t.is_induced() {
        0.0
    } else {
        POINT_LIKE_TOLERANCE
    }
}

/// Sorted, deduplicated, range-checked copy of a subset.
pub(crate) fn normalize_subset(n: usize, set: &[usize]) -> Result<Vec<usize>> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    if let Some(&index) = set.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index, len: n });
    }
    let mut v = set.to_vec();
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

/// Whether every member of `set` answers every comparison that involves an
/// outside point identically: `T({x, y}, z) = T({x', y}, z)` for all
/// `x, x'` in the set and `y, z` not both in it.
pub fn is_point_like(t: &TripletComparisonSpace, set: &[usize]) -> Result<bool> {
    let n = t.len();
    let set = normalize_subset(n, set)?;
    Ok(point_like_sorted(t, &set))
}

pub(crate) fn point_like_sorted(t: &TripletComparisonSpace, set: &[usize]) -> bool {
    let n = t.len();
    if set.len() == 1 || set.len() == n {
        return true;
    }
    let tol = tolerance(t);
    let mut inside = vec![false; n];
    for &x in set {
        inside[x] = true;
    }

    // Members must always be the closest pair against an outsider. This is
    // implied by the full condition and rejects most candidates quickly.
    for (a, &x) in set.iter().enumerate() {
        for &x2 in &set[a + 1..] {
            for w in (0..n).filter(|&w| !inside[w]) {
                if (t.value(x, x2, w) - 1.0).abs() > tol {
                    return false;
                }
            }
        }
    }

    let x0 = set[0];
    for &x in &set[1..] {
        for y in 0..n {
            for z in 0..n {
                if inside[y] && inside[z] {
                    continue;
                }
                if (t.value(x, y, z) - t.value(x0, y, z)).abs() > tol {
                    return false;
                }
            }
        }
    }
    true
}

/// Every point-like subset of a space, organized as a forest under
/// containment. Any two members are disjoint or nested.
#[derive(Debug, Clone, PartialEq)]
pub struct PointLikeFamily {
    n: usize,
    /// Sorted member lists, ordered by decreasing size then lexicographically.
    sets: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
}

impl PointLikeFamily {
    /// Arranges a laminar collection of subsets of `0..n` into a forest.
    pub fn from_sets(n: usize, sets: impl IntoIterator<Item = Vec<usize>>) -> Result<Self> {
        let mut unique: BTreeSet<Vec<usize>> = BTreeSet::new();
        for s in sets {
            unique.insert(normalize_subset(n, &s)?);
        }
        let mut sets: Vec<Vec<usize>> = unique.into_iter().collect();
        sets.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        if let Some((a, b)) = find_crossing(&sets) {
            return Err(Error::Inconsistent(format!(
                "sets {:?} and {:?} overlap without nesting",
                sets[a], sets[b]
            )));
        }
        // Larger sets come first, so the last container seen is the smallest.
        let parent = (0..sets.len())
            .map(|i| {
                (0..i)
                    .rev()
                    .find(|&j| sets[j].len() > sets[i].len() && is_subset(&sets[i], &sets[j]))
            })
            .collect();
        Ok(PointLikeFamily { n, sets, parent })
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn children(&self, i: usize) -> Vec<usize> {
        (0..self.sets.len())
            .filter(|&j| self.parent[j] == Some(i))
            .collect()
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.sets.len())
            .filter(|&j| self.parent[j].is_none())
            .collect()
    }

    pub fn contains(&self, set: &[usize]) -> bool {
        let mut s = set.to_vec();
        s.sort_unstable();
        s.dedup();
        self.sets
            .binary_search_by(|probe| {
                s.len()
                    .cmp(&probe.len())
                    .then_with(|| probe.as_slice().cmp(s.as_slice()))
            })
            .is_ok()
    }

    pub fn is_laminar(&self) -> bool {
        find_crossing(&self.sets).is_none()
    }

    /// Members with more than one point that are not the whole space.
    pub fn nontrivial(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.sets
            .iter()
            .filter(move |s| s.len() > 1 && s.len() < self.n)
    }
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    small.iter().all(|x| big.binary_search(x).is_ok())
}

fn find_crossing(sets: &[Vec<usize>]) -> Option<(usize, usize)> {
    for a in 0..sets.len() {
        for b in a + 1..sets.len() {
            let (s, t) = (&sets[a], &sets[b]);
            let overlap = s.iter().any(|x| t.binary_search(x).is_ok());
            if overlap && !is_subset(s, t) && !is_subset(t, s) {
                return Some((a, b));
            }
        }
    }
    None
}

/// Every point-like subset of `t`.
///
/// Induced spaces use the prefix-candidate search: a point-like set containing
/// `x` must be a prefix of the other points ordered by dissimilarity from `x`,
/// so only `O(n^2)` candidates are tested. Other spaces fall back to testing
/// every subset, allowed only while `n <= brute_force_cap`.
pub fn enumerate_point_like(
    t: &TripletComparisonSpace,
    brute_force_cap: usize,
) -> Result<PointLikeFamily> {
    if t.is_induced() {
        return enumerate_by_prefixes(t);
    }
    if t.len() > brute_force_cap {
        return Err(Error::Capability(format!(
            "exhaustive point-like enumeration over {} points exceeds the cap of {brute_force_cap}; \
             query candidate sets with is_point_like instead",
            t.len()
        )));
    }
    enumerate_exhaustive(t)
}

/// Tests all `2^n - 1` subsets. Intended for small spaces and as a reference.
pub fn enumerate_exhaustive(t: &TripletComparisonSpace) -> Result<PointLikeFamily> {
    let n = t.len();
    if n >= usize::BITS as usize {
        return Err(Error::Capability(format!(
            "cannot enumerate all subsets of {n} points"
        )));
    }
    let found: Vec<Vec<usize>> = (1usize..1 << n)
        .into_par_iter()
        .filter_map(|mask| {
            let set: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            point_like_sorted(t, &set).then_some(set)
        })
        .collect();
    PointLikeFamily::from_sets(n, found)
}

fn enumerate_by_prefixes(t: &TripletComparisonSpace) -> Result<PointLikeFamily> {
    let n = t.len();
    let d = t.induced_distances().expect("induced space");
    let mut candidates: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for x in 0..n {
        order.clear();
        order.extend((0..n).filter(|&y| y != x));
        order.sort_by(|&a, &b| d.get(x, a).total_cmp(&d.get(x, b)));
        // sizes 2..n-1; singletons and the whole set are added unconditionally
        for k in 1..n.saturating_sub(1) {
            let mut set: Vec<usize> = order[..k].to_vec();
            set.push(x);
            set.sort_unstable();
            candidates.insert(set);
        }
    }

    let mut found: Vec<Vec<usize>> = candidates
        .into_par_iter()
        .filter(|set| is_prefix_for_all(d, set) && point_like_sorted(t, set))
        .collect();
    found.extend((0..n).map(|x| vec![x]));
    found.push((0..n).collect());
    PointLikeFamily::from_sets(n, found)
}

/// Every member sees every other member strictly closer than any outsider.
fn is_prefix_for_all(d: &crate::matrix::SquareMatrix, set: &[usize]) -> bool {
    let n = d.dim();
    let mut inside = vec![false; n];
    for &x in set {
        inside[x] = true;
    }
    set.iter().all(|&x| {
        let far_inside = set.iter().map(|&v| d.get(x, v)).fold(f64::MIN, f64::max);
        (0..n)
            .filter(|&w| !inside[w])
            .all(|w| d.get(x, w) > far_inside)
    })
}

/// A partition of the points into point-like blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointLikePartition {
    blocks: Vec<Vec<usize>>,
}

impl PointLikePartition {
    /// Checks that `blocks` partition the points of `t` and that each block is
    /// point-like in `t`.
    pub fn certify(t: &TripletComparisonSpace, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let partition = PointLikePartition::from_blocks(t.len(), blocks)?;
        for block in &partition.blocks {
            if !point_like_sorted(t, block) {
                let names: Vec<&str> = block.iter().map(|&i| t.label(i)).collect();
                return Err(Error::NotPointLike(names.join(", ")));
            }
        }
        Ok(partition)
    }

    /// Validates only that `blocks` partition `0..n`.
    pub(crate) fn from_blocks(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut owner = vec![None; n];
        let mut normalized = Vec::with_capacity(blocks.len());
        for (b, block) in blocks.into_iter().enumerate() {
            let block = normalize_subset(n, &block).map_err(|e| match e {
                Error::EmptySet => Error::InvalidPartition(format!("block {b} is empty")),
                other => other,
            })?;
            for &x in &block {
                if owner[x].replace(b).is_some() {
                    return Err(Error::InvalidPartition(format!(
                        "point {x} appears in more than one block"
                    )));
                }
            }
            normalized.push(block);
        }
        if let Some(x) = owner.iter().position(Option::is_none) {
            return Err(Error::InvalidPartition(format!("point {x} is in no block")));
        }
        normalized.sort();
        Ok(PointLikePartition { blocks: normalized })
    }

    pub fn singletons(n: usize) -> Self {
        PointLikePartition {
            blocks: (0..n).map(|x| vec![x]).collect(),
        }
    }

    pub fn whole(n: usize) -> Self {
        PointLikePartition {
            blocks: vec![(0..n).collect()],
        }
    }

    /// Blocks sorted by smallest member; each block sorted.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn n_points(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// Block index of every point.
    pub fn assignment(&self) -> Vec<usize> {
        let mut a = vec![0; self.n_points()];
        for (b, block) in self.blocks.iter().enumerate() {
            for &x in block {
                a[x] = b;
            }
        }
        a
    }
}

/// Every partition of the points into members of a laminar family.
///
/// A member either stays whole or is replaced by a partition of its children,
/// recursively; the children of a member cover it whenever the family holds
/// all singletons.
pub fn point_like_partitions(family: &PointLikeFamily) -> Vec<PointLikePartition> {
    let roots = family.roots();
    let mut combos: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
    if !covers(family, &roots, family.n_points()) {
        return Vec::new();
    }
    for r in roots {
        let options = partitions_of(family, r);
        combos = product(&combos, &options);
    }
    combos
        .into_iter()
        .map(|blocks| {
            PointLikePartition::from_blocks(family.n_points(), blocks)
                .expect("laminar covers partition the points")
        })
        .collect()
}

/// Number of partitions [`point_like_partitions`] would return, saturating.
pub fn count_point_like_partitions(family: &PointLikeFamily) -> u128 {
    fn count(family: &PointLikeFamily, node: usize) -> u128 {
        let children = family.children(node);
        let mut split = 0;
        if !children.is_empty() && covers(family, &children, family.sets()[node].len()) {
            split = children
                .iter()
                .fold(1u128, |acc, &c| acc.saturating_mul(count(family, c)));
        }
        split.saturating_add(1)
    }
    let roots = family.roots();
    if !covers(family, &roots, family.n_points()) {
        return 0;
    }
    roots
        .iter()
        .fold(1u128, |acc, &r| acc.saturating_mul(count(family, r)))
}

fn covers(family: &PointLikeFamily, members: &[usize], size: usize) -> bool {
    members
        .iter()
        .map(|&m| family.sets()[m].len())
        .sum::<usize>()
        == size
}

fn partitions_of(family: &PointLikeFamily, node: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = vec![vec![family.sets()[node].clone()]];
    let children = family.children(node);
    if !children.is_empty() && covers(family, &children, family.sets()[node].len()) {
        let mut combos: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
        for c in children {
            combos = product(&combos, &partitions_of(family, c));
        }
        out.extend(combos);
    }
    out
}

fn product(left: &[Vec<Vec<usize>>], right: &[Vec<Vec<usize>>]) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::with_capacity(left.len() * right.len());
    for l in left {
        for r in right {
            let mut blocks = l.clone();
            blocks.extend(r.iter().cloned());
            out.push(blocks);
        }
    }
    out
}
