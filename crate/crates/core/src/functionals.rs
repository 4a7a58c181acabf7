//! Use-bounded, table-driven oracle functionals and the abandonment
//! predicate.
//!
//! A functional is a finite map from (oracle prefix, input) to an output
//! family of strings. Divergence is the default: any (oracle, input) not
//! covered by an entry diverges, so the everywhere-divergent "trivial"
//! functional is the empty table. Side oracles are absorbed into the tables;
//! the simulator tracks the oracle tag separately for bookkeeping only.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bits::{BinaryString, SmallSet};
use crate::clopen::{strings_meet_clopen, ClopenSet};
use crate::error::{Error, Result};
use crate::trees::FinTree;

/// A halting output: either an explicit string family or the oversized
/// marker ("BIG"), which violates every size bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Output {
    Set(Vec<BinaryString>),
    Oversized,
}

impl Output {
    pub fn exceeds(&self, bound: u32) -> bool {
        match self {
            Output::Set(d) => d.len() as u32 > bound,
            Output::Oversized => true,
        }
    }

    /// `[D] ∩ [V] ≠ ∅`. The oversized marker is treated as never meeting
    /// anything: its size violation already witnesses every check that would
    /// consult it.
    pub fn meets_clopen(&self, v: &ClopenSet) -> bool {
        match self {
            Output::Set(d) => strings_meet_clopen(d, v),
            Output::Oversized => false,
        }
    }

    pub fn meets_tree(&self, q: &FinTree) -> bool {
        match self {
            Output::Set(d) => d.iter().any(|s| q.compatible(s)),
            Output::Oversized => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub prefix: BinaryString,
    pub input: u32,
    pub output: Output,
}

/// A use-bounded oracle functional with a declared enumeration-size bound.
/// The bound plays the "index of Ψ" role in size checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToyFunctional {
    bound: u32,
    entries: Vec<Entry>,
}

impl ToyFunctional {
    /// Validates consistency: two entries for the same input with comparable
    /// prefixes must carry the same output.
    pub fn new(bound: u32, mut entries: Vec<Entry>) -> Result<Self> {
        for e in &mut entries {
            if let Output::Set(d) = &mut e.output {
                d.sort();
                d.dedup();
            }
        }
        for (i, a) in entries.iter().enumerate() {
            for b in entries.iter().skip(i + 1) {
                if a.input == b.input && a.prefix.is_compatible(&b.prefix) && a.output != b.output
                {
                    return Err(Error::Table(format!(
                        "inconsistent entries at input {}: prefixes {} and {} disagree",
                        a.input, a.prefix, b.prefix
                    )));
                }
            }
        }
        entries.sort_by(|a, b| (a.input, a.prefix).cmp(&(b.input, b.prefix)));
        Ok(ToyFunctional { bound, entries })
    }

    /// The everywhere-divergent functional.
    pub fn trivial(bound: u32) -> Self {
        ToyFunctional { bound, entries: Vec::new() }
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn is_trivial(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn use_bound(&self) -> u32 {
        self.entries.iter().map(|e| e.prefix.len()).max().unwrap_or(0)
    }

    /// Ψ^oracle(input): halts iff some entry's prefix is an initial segment
    /// of the oracle. Consistency makes the value unique.
    pub fn evaluate(&self, oracle: &BinaryString, input: u32) -> Option<&Output> {
        self.entries
            .iter()
            .find(|e| e.input == input && e.prefix.is_prefix_of(oracle))
            .map(|e| &e.output)
    }

    /// Is the output bad for `v`: oversized relative to the bound, or missing
    /// the clopen set entirely.
    fn bad_for(&self, out: &Output, v: &ClopenSet) -> bool {
        out.exceeds(self.bound) || !out.meets_clopen(v)
    }

    /// Def-3 abandonment on a set: some Z ⊆ y and n ≤ horizon make
    /// Ψ^{Z/rho}(n) halt with an output missing `v` or exceeding the bound.
    /// Entries are scanned directly: an entry is reachable from (y, rho) iff
    /// its prefix agrees with rho where they overlap and its 1-bits beyond
    /// |rho| lie in y.
    pub fn abandons_on_set(
        &self,
        rho: &BinaryString,
        v: &ClopenSet,
        y: SmallSet,
        horizon: u32,
    ) -> bool {
        let oracle_len = horizon.max(rho.len());
        self.entries.iter().any(|e| {
            e.input <= horizon
                && e.prefix.len() <= oracle_len
                && self.entry_reachable(&e.prefix, rho, y)
                && self.bad_for(&e.output, v)
        })
    }

    fn entry_reachable(&self, prefix: &BinaryString, rho: &BinaryString, y: SmallSet) -> bool {
        let overlap = prefix.len().min(rho.len());
        for i in 0..overlap {
            if prefix.bit(i) != rho.bit(i) {
                return false;
            }
        }
        for i in rho.len()..prefix.len() {
            if prefix.bit(i) && !y.contains(i) {
                return false;
            }
        }
        true
    }

    /// Literal subset-enumeration form of `abandons_on_set`; the independent
    /// oracle the fast route is checked against.
    pub fn abandons_on_set_exhaustive(
        &self,
        rho: &BinaryString,
        v: &ClopenSet,
        y: SmallSet,
        horizon: u32,
    ) -> bool {
        let oracle_len = horizon.max(rho.len());
        for z in y.subsets() {
            let oracle = BinaryString::characteristic(z, oracle_len)
                .overwrite(rho)
                .expect("oracle at least as long as the stem");
            for n in 0..=horizon {
                if let Some(out) = self.evaluate(&oracle, n) {
                    if self.bad_for(out, v) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// A pair of functionals ⟨Ψ_l, Ψ_r⟩.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalPair {
    pub left: ToyFunctional,
    pub right: ToyFunctional,
}

/// Def-3(3) witness search: an ordered 2-partition X₁ ∪ X₂ = x such that the
/// left component does not abandon `v` on X₁ (relative to rho_l) nor the
/// right on X₂ (relative to rho_r). Returns None iff the pair abandons `v`
/// on x. Subset monotonicity of abandonment makes the disjoint search
/// complete; X₁ descends from x itself so the all-left witness comes first.
pub fn pair_nonabandon_witness(
    p: &FunctionalPair,
    rho_l: &BinaryString,
    rho_r: &BinaryString,
    v: &ClopenSet,
    x: SmallSet,
    horizon: u32,
) -> Option<(SmallSet, SmallSet)> {
    let mut subs: Vec<SmallSet> = x.subsets().collect();
    subs.sort_by(|a, b| b.mask().cmp(&a.mask()));
    for x1 in subs {
        let x2 = x.difference(x1);
        if !p.left.abandons_on_set(rho_l, v, x1, horizon)
            && !p.right.abandons_on_set(rho_r, v, x2, horizon)
        {
            return Some((x1, x2));
        }
    }
    None
}

/// Per-side view used when building abandonment-constrained splitting trees.
#[derive(Clone)]
pub struct SideSpec<'a> {
    pub stem: BinaryString,
    pub functional: &'a ToyFunctional,
}

/// Core of the T_V construction, parameterized by output depth so the same
/// code serves the depth-doubling operation and the depth-capped engine.
///
/// Nodes are 2k-interleaved strings X' = ⊕ᵢ(X_il ⊕ X_ir) (side c of part i
/// is flat coordinate 2i for the left hand, 2i+1 for the right) such that
/// the merged string ⊕ᵢ(X_il ∪ X_ir) is a node of `t` and no side's
/// functional abandons `v` on the side's determined 1-positions relative to
/// its stem. Membership can only be refuted, never restored, as depth grows.
pub fn build_t_v_depth(
    t: &FinTree,
    k: u32,
    sides: &[SideSpec<'_>],
    v: &ClopenSet,
    out_depth: u32,
    horizon: u32,
) -> Result<FinTree> {
    if sides.len() != 2 * k as usize {
        return Err(Error::Shape(format!(
            "expected {} sides, got {}",
            2 * k,
            sides.len()
        )));
    }
    // Abandonment reachable with the empty determined set kills everything.
    for s in sides {
        if s.functional.abandons_on_set(&s.stem, v, SmallSet::EMPTY, horizon) {
            return Ok(FinTree::empty(out_depth));
        }
    }
    let k2 = 2 * k;
    let mut frontier: Vec<BinaryString> = vec![BinaryString::empty()];
    for pos in 0..out_depth {
        let c = pos % k2;
        let o = pos / k2;
        let mut next = Vec::new();
        for node in &frontier {
            'bits: for b in [false, true] {
                let cand = node.push(b);
                if b {
                    // The side gains determined element o; recheck it.
                    let det = side_support(&cand, k2, c);
                    let s = &sides[c as usize];
                    if s.functional.abandons_on_set(&s.stem, v, det, horizon) {
                        continue 'bits;
                    }
                }
                if c % 2 == 1 {
                    // Right-hand bit completes merged position o*k + c/2.
                    let m = merge_pairs(&cand, k2);
                    debug_assert_eq!(m.len(), o * k + c / 2 + 1);
                    if !t.contains(&m) {
                        continue 'bits;
                    }
                }
                next.push(cand);
            }
        }
        frontier = next;
        if frontier.is_empty() {
            return Ok(FinTree::empty(out_depth));
        }
    }
    Ok(FinTree::from_paths(out_depth, frontier))
}

/// Determined 1-positions of flat side `c` within a 2k-interleaved prefix.
pub fn side_support(x: &BinaryString, k2: u32, c: u32) -> SmallSet {
    let mut s = SmallSet::EMPTY;
    let mut pos = c;
    let mut o = 0u32;
    while pos < x.len() {
        if x.bit(pos) {
            s = s.insert(o);
        }
        pos += k2;
        o += 1;
    }
    s
}

/// Merges a 2k-interleaved prefix into the k-interleaving of the pairwise
/// unions; only fully determined merged positions are emitted.
pub fn merge_pairs(x: &BinaryString, k2: u32) -> BinaryString {
    let k = k2 / 2;
    let mut m = BinaryString::empty();
    let mut mp = 0u32;
    loop {
        let o = mp / k;
        let i = mp % k;
        let l = o * k2 + 2 * i;
        let r = l + 1;
        if r >= x.len() {
            break;
        }
        m = m.push(x.bit(l) || x.bit(r));
        mp += 1;
    }
    m
}

/// The depth-doubling form: splits a pruned k-partition tree into the
/// depth-doubled tree of non-abandoning 2k-interleavings.
pub fn build_t_v(
    t: &FinTree,
    psis: &[FunctionalPair],
    rhos: &[(BinaryString, BinaryString)],
    v: &ClopenSet,
) -> Result<FinTree> {
    if psis.len() != rhos.len() {
        return Err(Error::Shape(format!(
            "{} functional pairs but {} stem pairs",
            psis.len(),
            rhos.len()
        )));
    }
    let k = psis.len() as u32;
    let mut sides = Vec::with_capacity(2 * k as usize);
    for (p, (rl, rr)) in psis.iter().zip(rhos.iter()) {
        sides.push(SideSpec { stem: *rl, functional: &p.left });
        sides.push(SideSpec { stem: *rr, functional: &p.right });
    }
    let out_depth = 2 * t.depth();
    build_t_v_depth(t, k, &sides, v, out_depth, out_depth)
}

/// Functional tables for the engine, keyed by (oracle tag, index). Absent
/// keys denote trivial functionals with bound equal to the index.
#[derive(Debug, Clone, Default)]
pub struct FunctionalFamily {
    tables: BTreeMap<(u32, u32), ToyFunctional>,
}

impl FunctionalFamily {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, tag: u32, index: u32, f: ToyFunctional) {
        self.tables.insert((tag, index), f);
    }

    pub fn get(&self, tag: u32, index: u32) -> ToyFunctional {
        self.tables
            .get(&(tag, index))
            .cloned()
            .unwrap_or_else(|| ToyFunctional::trivial(index))
    }

    /// Total halting entries across a tag's tables (the budget
    /// input for the case-i loop).
    pub fn halting_entries(&self, tag: u32) -> u64 {
        self.tables
            .iter()
            .filter(|((t, _), _)| *t == tag)
            .map(|(_, f)| f.entries().len() as u64)
            .sum()
    }

    pub fn tag_is_trivial(&self, tag: u32) -> bool {
        self.halting_entries(tag) == 0
    }
}
