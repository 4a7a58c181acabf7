//! Tree forcing conditions and the per-step operations.
//!
//! A condition packages k stem pairs with an ordered k-partition tree whose
//! paths supply Mathias reservoirs. Part counts grow combinatorially under
//! the splitting operation, so parts are stored as runs of identical states:
//! only parts with decodable tree content (index below the tree depth) or
//! individually extended stems ever get materialized.

pub mod cross;
pub mod ctree;
pub mod invariants;
pub mod ops;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bits::{BinaryString, SmallSet};
use crate::error::{Error, Result};
use crate::pattern::BitPattern;
use crate::trees::FinTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "l")]
    Left,
    #[serde(rename = "r")]
    Right,
}

impl Side {
    pub fn label(&self) -> &'static str {
        match self {
            Side::Left => "l",
            Side::Right => "r",
        }
    }
}

/// A stem/reservoir pair constraining a set to extend the stem within the
/// reservoir.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MathiasCondition {
    pub stem: BinaryString,
    pub reservoir: SmallSet,
}

/// (ρ', L') extends (ρ, L): the stem grows strictly and everything stays
/// inside the old condition's scope.
pub fn mathias_extends(c2: &MathiasCondition, c1: &MathiasCondition) -> bool {
    c2.stem.extends(&c1.stem)
        && c2
            .reservoir
            .union(c2.stem.support())
            .is_subset(&c1.reservoir.union(c1.stem.support()))
}

/// G satisfies (ρ, L): G strictly extends the stem and its members come from
/// the stem or the reservoir.
pub fn satisfies(g: &BinaryString, c: &MathiasCondition) -> bool {
    g.extends(&c.stem) && g.support().is_subset(&c.stem.support().union(c.reservoir))
}

/// Per-part state: stems, lineage, and sparse progress counters (absent tags
/// sit at the initial (1, 1)).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartState {
    pub parent: u64,
    pub side: Side,
    pub stem_l: BinaryString,
    pub stem_r: BinaryString,
    pub counters: BTreeMap<u32, (u32, u32)>,
}

impl PartState {
    pub fn initial() -> Self {
        PartState {
            parent: 0,
            side: Side::Left,
            stem_l: BinaryString::empty(),
            stem_r: BinaryString::empty(),
            counters: BTreeMap::new(),
        }
    }

    pub fn counter(&self, tag: u32) -> (u32, u32) {
        self.counters.get(&tag).copied().unwrap_or((1, 1))
    }

    pub fn set_counter(&mut self, tag: u32, v: (u32, u32)) {
        self.counters.insert(tag, v);
    }

    pub fn stem(&self, side: Side) -> &BinaryString {
        match side {
            Side::Left => &self.stem_l,
            Side::Right => &self.stem_r,
        }
    }

    pub fn stem_mut(&mut self, side: Side) -> &mut BinaryString {
        match side {
            Side::Left => &mut self.stem_l,
            Side::Right => &mut self.stem_r,
        }
    }

    /// Mask horizon of the part: decoded content below it is excluded.
    pub fn stem_horizon(&self) -> u32 {
        self.stem_l.len().max(self.stem_r.len())
    }
}

/// Run-length encoded part table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartTable {
    runs: Vec<(u64, PartState)>,
}

impl PartTable {
    pub fn new() -> Self {
        PartTable { runs: Vec::new() }
    }

    pub fn single(state: PartState) -> Self {
        PartTable { runs: vec![(1, state)] }
    }

    pub fn push_run(&mut self, count: u64, state: PartState) {
        if count > 0 {
            self.runs.push((count, state));
        }
    }

    pub fn len(&self) -> u64 {
        self.runs.iter().map(|(c, _)| c).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn run_count(&self) -> usize {
        self.runs.len()
    }

    pub fn get(&self, idx: u64) -> &PartState {
        let mut base = 0u64;
        for (c, s) in &self.runs {
            if idx < base + c {
                return s;
            }
            base += c;
        }
        panic!("part index {idx} out of range");
    }

    /// Runs as (first_index, count, state).
    pub fn iter_runs(&self) -> impl Iterator<Item = (u64, u64, &PartState)> {
        let mut base = 0u64;
        self.runs.iter().map(move |(c, s)| {
            let first = base;
            base += c;
            (first, *c, s)
        })
    }

    /// Rewrites the state of a single part, splitting its run.
    pub fn update<F: FnOnce(&mut PartState)>(&mut self, idx: u64, f: F) {
        let mut base = 0u64;
        for i in 0..self.runs.len() {
            let (c, _) = &self.runs[i];
            let c = *c;
            if idx < base + c {
                let offset = idx - base;
                let (_, state) = self.runs[i].clone();
                let mut new_state = state.clone();
                f(&mut new_state);
                if new_state == state {
                    return;
                }
                let mut replacement = Vec::new();
                if offset > 0 {
                    replacement.push((offset, state.clone()));
                }
                replacement.push((1, new_state));
                if offset + 1 < c {
                    replacement.push((c - offset - 1, state));
                }
                self.runs.splice(i..=i, replacement);
                return;
            }
            base += c;
        }
        panic!("part index {idx} out of range");
    }
}

impl Default for PartTable {
    fn default() -> Self {
        Self::new()
    }
}

/// A tree forcing condition plus the bookkeeping the construction needs.
#[derive(Debug, Clone)]
pub struct ForcingState {
    pub depth: u32,
    pub parts: PartTable,
    pub tree: FinTree,
    /// Finite coverage slack: ground elements below this horizon are exempt
    /// from the covering condition. Grows only via stem horizons.
    pub deficit_horizon: u32,
}

impl ForcingState {
    /// Initial condition: one part, the single all-ones path (the trivial
    /// 1-partition of the ground set), empty stems, all counters at 1.
    pub fn initial(depth: u32) -> Self {
        ForcingState {
            depth,
            parts: PartTable::single(PartState::initial()),
            tree: FinTree::single_path(BinaryString::ones(depth)),
            deficit_horizon: 0,
        }
    }

    pub fn k(&self) -> u64 {
        self.parts.len()
    }

    /// Parts with any decodable tree content: indices below the depth.
    pub fn explicit_part_limit(&self) -> u64 {
        self.k().min(self.depth as u64)
    }
}

/// Decoded content of part `c` along a path: ground offsets whose
/// interleaved bit is set.
pub fn part_content(path: &BinaryString, k: u64, c: u64) -> SmallSet {
    let mut s = SmallSet::EMPTY;
    if c >= path.len() as u64 {
        return s;
    }
    let mut pos = c;
    let mut o = 0u32;
    while pos < path.len() as u64 {
        if path.bit(pos as u32) {
            s = s.insert(o);
        }
        pos += k;
        o += 1;
    }
    s
}

/// Distinct content sets of part `c` across all paths.
pub fn part_content_sets(tree: &FinTree, k: u64, c: u64) -> Vec<SmallSet> {
    let mut v: Vec<SmallSet> = tree
        .paths()
        .iter()
        .map(|p| part_content(p, k, c))
        .collect();
    v.sort();
    v.dedup();
    v
}

/// Zeroes part `c`'s decoded positions below offset `h` in every path.
pub fn mask_part_below(tree: &FinTree, k: u64, c: u64, h: u32) -> FinTree {
    let depth = tree.depth();
    let paths = tree.paths().into_iter().map(|p| {
        let mut bits = p.raw_bits();
        for o in 0..h as u64 {
            let pos = o * k + c;
            if pos < depth as u64 {
                bits &= !(1u64 << pos);
            }
        }
        BinaryString::from_raw(bits, depth)
    });
    FinTree::from_paths(depth, paths)
}

/// Explicit small-scale forcing condition for the condition-order check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForcingCondition {
    pub stems: Vec<(BinaryString, BinaryString)>,
    pub tree: FinTree,
}

impl ForcingCondition {
    pub fn k(&self) -> u64 {
        self.stems.len() as u64
    }
}

/// Condition-order check: stems extend pairwise per the part map
/// (reflexively at the condition level), and every new path's parts sit
/// inside some old path's corresponding parts together with the stems.
pub fn cond_extends(c2: &ForcingCondition, c1: &ForcingCondition, p: &[u64]) -> Result<bool> {
    if p.len() != c2.stems.len() {
        return Err(Error::Shape(format!(
            "part map has {} entries for {} parts",
            p.len(),
            c2.stems.len()
        )));
    }
    for &target in p {
        if target >= c1.k() {
            return Err(Error::Shape(format!("part map targets part {target} of {}", c1.k())));
        }
    }
    for (i, (l2, r2)) in c2.stems.iter().enumerate() {
        let (l1, r1) = &c1.stems[p[i] as usize];
        if !(l1.is_prefix_of(l2) && r1.is_prefix_of(r2)) {
            return Ok(false);
        }
    }
    let old_paths = c1.tree.paths();
    let k2 = c2.k();
    let k1 = c1.k();
    for x2 in c2.tree.paths() {
        for (i, (l2, r2)) in c2.stems.iter().enumerate() {
            let (l1, r1) = &c1.stems[p[i] as usize];
            let content2 = part_content(&x2, k2, i as u64);
            let target_l = l2.support().union(content2);
            let target_r = r2.support().union(content2);
            let ok = old_paths.iter().any(|x1| {
                let content1 = part_content(x1, k1, p[i]);
                target_l.is_subset(&l1.support().union(content1))
                    && target_r.is_subset(&r1.support().union(content1))
            });
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Does part `c`'s decoded content avoid the given side of the pattern on
/// every path (fading)? Parts beyond the decodable horizon fade on both
/// sides.
pub fn fading(tree: &FinTree, k: u64, c: u64, side: Side, a: &BitPattern) -> bool {
    let want = |o: u32| match side {
        Side::Left => a.contains(o),
        Side::Right => !a.contains(o),
    };
    for path in tree.paths() {
        let content = part_content(&path, k, c);
        if content.iter().any(want) {
            return false;
        }
    }
    true
}

/// First (part, path) whose decoded content meets both the pattern and its
/// complement; None signals that the pattern is decodable from the tree at
/// this depth (not a contradiction at finite scale).
pub fn check_fac7(tree: &FinTree, k: u64, a: &BitPattern) -> Option<(u64, BinaryString)> {
    let paths = tree.paths();
    for c in 0..k.min(tree.depth() as u64) {
        for path in &paths {
            let content = part_content(path, k, c);
            let in_a = content.iter().any(|o| a.contains(o));
            let in_abar = content.iter().any(|o| !a.contains(o));
            if in_a && in_abar {
                return Some((c, *path));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BinaryString {
        s.parse().unwrap()
    }

    #[test]
    fn mathias_extension_cases() {
        let base = MathiasCondition { stem: bs("1"), reservoir: SmallSet::from_iter([2, 3, 5]) };
        // Same stem: extension is strict.
        assert!(!mathias_extends(&base, &base));
        // Stem grows using a reservoir element, reservoir shrinks.
        let ext = MathiasCondition { stem: bs("101"), reservoir: SmallSet::from_iter([3]) };
        assert!(mathias_extends(&ext, &base));
        // Stem grows with an out-of-scope element.
        let bad = MathiasCondition { stem: bs("11"), reservoir: SmallSet::from_iter([3]) };
        assert!(!mathias_extends(&bad, &base));
    }

    #[test]
    fn mathias_satisfaction_cases() {
        let c = MathiasCondition { stem: bs("1"), reservoir: SmallSet::from_iter([2]) };
        assert!(satisfies(&bs("101"), &c));
        assert!(!satisfies(&bs("11"), &c));
        assert!(!satisfies(&bs("1"), &c)); // strict extension required
    }

    #[test]
    fn part_table_runs_and_updates() {
        let mut t = PartTable::new();
        t.push_run(5, PartState::initial());
        assert_eq!(t.len(), 5);
        t.update(2, |s| s.stem_l = bs("1"));
        assert_eq!(t.run_count(), 3);
        assert_eq!(t.get(2).stem_l, bs("1"));
        assert_eq!(t.get(1).stem_l, BinaryString::empty());
        assert_eq!(t.get(3).stem_l, BinaryString::empty());
        assert_eq!(t.len(), 5);
    }

    #[test]
    fn part_content_decoding() {
        // Path 110100 with k=2: part 0 gets positions 0,2,4 -> bits 1,0,0.
        let p = bs("110100");
        assert_eq!(part_content(&p, 2, 0), SmallSet::from_iter([0]));
        assert_eq!(part_content(&p, 2, 1), SmallSet::from_iter([0, 1]));
        assert_eq!(part_content(&p, 9, 0), SmallSet::from_iter([0]));
        assert!(part_content(&p, 9, 7).is_empty());
    }

    #[test]
    fn masking_zeroes_below() {
        let t = FinTree::single_path(bs("1111"));
        let m = mask_part_below(&t, 2, 0, 1);
        assert_eq!(m.paths(), vec![bs("0111")]);
    }

    #[test]
    fn cond_extends_cases() {
        let c1 = ForcingCondition {
            stems: vec![(BinaryString::empty(), BinaryString::empty())],
            tree: FinTree::single_path(bs("1111")),
        };
        // Reflexive at the condition level.
        assert!(cond_extends(&c1, &c1, &[0]).unwrap());

        // Subtree with same stems extends.
        let c2 = ForcingCondition {
            stems: vec![(BinaryString::empty(), BinaryString::empty())],
            tree: FinTree::single_path(bs("1111")),
        };
        assert!(cond_extends(&c2, &c1, &[0]).unwrap());

        // A child part drawing elements outside its parent part fails.
        let wide = ForcingCondition {
            stems: vec![(BinaryString::empty(), BinaryString::empty())],
            tree: FinTree::single_path(bs("0101")),
        };
        let child = ForcingCondition {
            stems: vec![(BinaryString::empty(), BinaryString::empty())],
            tree: FinTree::single_path(bs("1010")),
        };
        assert!(!cond_extends(&child, &wide, &[0]).unwrap());
    }

    #[test]
    fn fading_cases() {
        let a = BitPattern::evens();
        // k=2 over 1111: part 0 content {0,1}.
        let t = FinTree::single_path(bs("1111"));
        assert!(!fading(&t, 2, 0, Side::Left, &a));
        // Part content {1} (odd only) fades on the left.
        let t = FinTree::single_path(bs("0011"));
        assert_eq!(part_content(&bs("0011"), 2, 0), SmallSet::from_iter([1]));
        assert!(fading(&t, 2, 0, Side::Left, &a));
        assert!(!fading(&t, 2, 0, Side::Right, &a));
        // Empty content fades on both sides.
        let t = FinTree::single_path(bs("0101"));
        assert!(fading(&t, 2, 0, Side::Left, &a));
        assert!(fading(&t, 2, 0, Side::Right, &a));
    }

    #[test]
    fn fac7_cases() {
        let a = BitPattern::evens();
        // Full splitting at k=1 over depth 2: some path has content {0,1}.
        let t = FinTree::full(2);
        let (c, path) = check_fac7(&t, 1, &a).unwrap();
        assert_eq!(c, 0);
        assert_eq!(path, bs("11"));

        // Part 0 only evens, part 1 only odds: no witness.
        let t = FinTree::single_path(bs("1111"));
        // k=2: part0 content {0,1}... build a one-sided example instead:
        let t2 = FinTree::from_paths(4, [bs("1001")]);
        // part0: offsets {0}, part1: offsets {1}: 0 is even, 1 is odd.
        assert!(check_fac7(&t2, 2, &a).is_none());
        let _ = t;

        // k=1 with ground meeting both sides qualifies.
        let t3 = FinTree::single_path(bs("11"));
        assert!(check_fac7(&t3, 1, &a).is_some());
    }
}
