//! Cross on trees with implicit supporter families.
//!
//! The splitting operation produces one output part per (side family,
//! subset) pair; subset families over a pairwise disjoint clopen sequence
//! are exactly the size-(e+1) subsets, so they are stored as binomial
//! ranges and unranked on demand. The output tree is computed exactly by
//! sweeping reachable AND-states: output bits are conjunctions of input
//! side bits, so the set of output paths is the set of AND-accumulations
//! over per-tree path profiles.

use std::collections::{BTreeMap, BTreeSet};

use crate::bits::BinaryString;
use crate::error::{Error, Result};
use crate::forcing::Side;
use crate::trees::FinTree;

pub fn binomial(n: u64, k: u32) -> u128 {
    let k = k as u64;
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128);
        acc /= (i + 1) as u128;
    }
    acc
}

/// The rank-th k-subset of {0..n-1} in lexicographic order on sorted tuples.
pub fn unrank_subset(n: u64, k: u32, rank: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity(k as usize);
    let mut a = 0u64;
    let mut left = k;
    let mut rank = rank as u128;
    while left > 0 {
        let c = binomial(n - 1 - a, left - 1);
        if rank < c {
            out.push(a);
            left -= 1;
            a += 1;
        } else {
            rank -= c;
            a += 1;
        }
    }
    out
}

#[derive(Debug, Clone)]
pub enum FamilyKind {
    /// All subsets of the given size, in lexicographic order.
    AllSubsetsOfSize(u32),
    /// Explicit subset list (index sets over the clopen sequence).
    Explicit(Vec<Vec<u64>>),
}

#[derive(Debug, Clone)]
pub struct Family {
    pub orig_part: u64,
    pub side: Side,
    pub kind: FamilyKind,
    pub count: u64,
}

impl Family {
    pub fn new(orig_part: u64, side: Side, kind: FamilyKind, n: u64) -> Result<Self> {
        let count = match &kind {
            FamilyKind::AllSubsetsOfSize(s) => {
                let c = binomial(n, *s);
                u64::try_from(c).map_err(|_| {
                    Error::Budget(format!("family of {s}-subsets of {n} sets overflows u64"))
                })?
            }
            FamilyKind::Explicit(v) => v.len() as u64,
        };
        Ok(Family { orig_part, side, kind, count })
    }

    pub fn subset(&self, rank: u64, n: u64) -> Vec<u64> {
        match &self.kind {
            FamilyKind::AllSubsetsOfSize(s) => unrank_subset(n, *s, rank),
            FamilyKind::Explicit(v) => v[rank as usize].clone(),
        }
    }
}

/// The supporter structure of a splitting step: one family per flat side of
/// the old parts, in flat order (part 0 left, part 0 right, part 1 left, …).
#[derive(Debug, Clone)]
pub struct SupporterLayout {
    pub n: u64,
    pub families: Vec<Family>,
}

impl SupporterLayout {
    pub fn total_parts(&self) -> Result<u64> {
        let mut acc = 0u64;
        for f in &self.families {
            acc = acc.checked_add(f.count).ok_or_else(|| {
                Error::Budget("total part count overflows u64".into())
            })?;
        }
        Ok(acc)
    }

    /// (family index, rank within family) of output part c.
    pub fn locate(&self, c: u64) -> (usize, u64) {
        let mut base = 0u64;
        for (i, f) in self.families.iter().enumerate() {
            if c < base + f.count {
                return (i, c - base);
            }
            base += f.count;
        }
        panic!("output part {c} out of range");
    }
}

/// Exact depth-capped cross of the splitting trees through the supporter
/// layout. All input trees must be nonempty and of depth `out_depth`;
/// `input_arity` is the flat side count 2k of the inputs.
pub fn cross_trees(
    tvs: &[&FinTree],
    layout: &SupporterLayout,
    input_arity: u64,
    out_depth: u32,
) -> Result<FinTree> {
    let kp = layout.total_parts()?;
    if kp == 0 {
        return Err(Error::Shape("supporter layout has no parts".into()));
    }
    if tvs.len() as u64 != layout.n {
        return Err(Error::Shape(format!(
            "{} trees for a layout over {} clopen sets",
            tvs.len(),
            layout.n
        )));
    }
    if tvs.iter().any(|t| t.is_empty()) {
        return Err(Error::Shape("cross over an empty splitting tree".into()));
    }
    // Constraints per input tree: (output position, input position).
    let mut constraints: BTreeMap<usize, Vec<(u32, u32)>> = BTreeMap::new();
    for pos in 0..out_depth {
        let c = pos as u64 % kp;
        let o = pos as u64 / kp;
        let (fi, rank) = layout.locate(c);
        let fam = &layout.families[fi];
        let flat = 2 * fam.orig_part
            + match fam.side {
                Side::Left => 0,
                Side::Right => 1,
            };
        let in_pos = o * input_arity + flat;
        for p in fam.subset(rank, layout.n) {
            if in_pos >= tvs[p as usize].depth() as u64 {
                return Err(Error::Shape(format!(
                    "input position {in_pos} beyond splitting tree depth"
                )));
            }
            constraints.entry(p as usize).or_default().push((pos, in_pos as u32));
        }
    }
    // Sweep reachable AND-states.
    let full: u64 = if out_depth == 64 { u64::MAX } else { (1u64 << out_depth) - 1 };
    let mut states: BTreeSet<u64> = BTreeSet::new();
    states.insert(full);
    for (p, cons) in &constraints {
        let positions: BTreeSet<u32> = cons.iter().map(|(_, ip)| *ip).collect();
        let positions: Vec<u32> = positions.into_iter().collect();
        // Distinct projected profiles of this tree's paths.
        let mut profiles: BTreeSet<u64> = BTreeSet::new();
        for path in tvs[*p].paths() {
            let mut m = 0u64;
            for (j, ip) in positions.iter().enumerate() {
                if path.bit(*ip) {
                    m |= 1 << j;
                }
            }
            profiles.insert(m);
        }
        let mut next: BTreeSet<u64> = BTreeSet::new();
        for state in &states {
            for prof in &profiles {
                let mut s = *state;
                for (out_pos, in_pos) in cons {
                    let j = positions.binary_search(in_pos).unwrap();
                    if (prof >> j) & 1 == 0 {
                        s &= !(1u64 << out_pos);
                    }
                }
                next.insert(s);
            }
        }
        states = next;
    }
    Ok(FinTree::from_paths(
        out_depth,
        states
            .into_iter()
            .map(|m| BinaryString::from_raw(m, out_depth)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::SmallSet;

    #[test]
    fn binomial_and_unranking() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(1873, 2), 1_753_128);
        // Lex order: {0,1},{0,2},{0,3},{0,4},{1,2},...
        assert_eq!(unrank_subset(5, 2, 0), vec![0, 1]);
        assert_eq!(unrank_subset(5, 2, 3), vec![0, 4]);
        assert_eq!(unrank_subset(5, 2, 4), vec![1, 2]);
        assert_eq!(unrank_subset(5, 2, 9), vec![3, 4]);
        // Exhaustive against direct enumeration.
        let mut direct = Vec::new();
        for a in 0..6u64 {
            for b in a + 1..6 {
                for c in b + 1..6 {
                    direct.push(vec![a, b, c]);
                }
            }
        }
        for (r, want) in direct.iter().enumerate() {
            assert_eq!(&unrank_subset(6, 3, r as u64), want);
        }
    }

    /// Brute-force path-product oracle for the cross.
    fn cross_oracle(
        tvs: &[&FinTree],
        layout: &SupporterLayout,
        input_arity: u64,
        out_depth: u32,
    ) -> BTreeSet<BinaryString> {
        let kp = layout.total_parts().unwrap();
        let path_sets: Vec<Vec<BinaryString>> = tvs.iter().map(|t| t.paths()).collect();
        let mut choice = vec![0usize; tvs.len()];
        let mut out = BTreeSet::new();
        loop {
            let mut y = BinaryString::empty();
            for pos in 0..out_depth {
                let c = pos as u64 % kp;
                let o = pos as u64 / kp;
                let (fi, rank) = layout.locate(c);
                let fam = &layout.families[fi];
                let flat = 2 * fam.orig_part + if fam.side == Side::Left { 0 } else { 1 };
                let in_pos = (o * input_arity + flat) as u32;
                let bit = fam
                    .subset(rank, layout.n)
                    .iter()
                    .all(|p| path_sets[*p as usize][choice[*p as usize]].bit(in_pos));
                y = y.push(bit);
            }
            out.insert(y);
            // advance mixed-radix counter
            let mut i = 0;
            loop {
                if i == choice.len() {
                    return out;
                }
                choice[i] += 1;
                if choice[i] < path_sets[i].len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn cross_matches_path_product_oracle() {
        // Three small splitting trees over a single-path base at depth 6,
        // crossed through the pair families (the step-one shape).
        let base = FinTree::single_path("111".parse().unwrap());
        let psis = vec![crate::functionals::FunctionalPair {
            left: crate::functionals::ToyFunctional::trivial(1),
            right: crate::functionals::ToyFunctional::trivial(1),
        }];
        let rhos = vec![(BinaryString::empty(), BinaryString::empty())];
        let v = crate::clopen::ClopenSet::cylinder("0".parse().unwrap());
        let tv = crate::functionals::build_t_v(&base, &psis, &rhos, &v).unwrap();
        let tvs = vec![&tv, &tv, &tv];
        let layout = SupporterLayout {
            n: 3,
            families: vec![
                Family::new(0, Side::Left, FamilyKind::AllSubsetsOfSize(2), 3).unwrap(),
                Family::new(0, Side::Right, FamilyKind::AllSubsetsOfSize(2), 3).unwrap(),
            ],
        };
        let got = cross_trees(&tvs, &layout, 2, 6).unwrap();
        let want = cross_oracle(&tvs, &layout, 2, 6);
        let got_paths: BTreeSet<BinaryString> = got.paths().into_iter().collect();
        assert_eq!(got_paths, want);
        assert!(!got.is_empty());
        // Fact-style coverage: 6 parts at horizon 1 cover element 0.
        assert!(got.is_partition_tree(6, SmallSet::from_iter([0])));
    }

    #[test]
    fn cross_with_explicit_families() {
        let t1 = FinTree::from_paths(4, ["1010".parse().unwrap(), "1111".parse().unwrap()]);
        let t2 = FinTree::from_paths(4, ["1110".parse().unwrap()]);
        let tvs = vec![&t1, &t2];
        let layout = SupporterLayout {
            n: 2,
            families: vec![
                Family::new(0, Side::Left, FamilyKind::Explicit(vec![vec![0, 1]]), 2).unwrap(),
                Family::new(0, Side::Right, FamilyKind::Explicit(vec![vec![0], vec![1]]), 2)
                    .unwrap(),
            ],
        };
        let got = cross_trees(&tvs, &layout, 2, 4).unwrap();
        let want = cross_oracle(&tvs, &layout, 2, 4);
        assert_eq!(got.paths().into_iter().collect::<BTreeSet<_>>(), want);
    }
}
