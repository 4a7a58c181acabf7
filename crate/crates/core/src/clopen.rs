//! Clopen subsets of Cantor space as finite antichains of binary strings.
//!
//! A clopen set is stored in canonical form: a prefix-free generator list
//! with sibling cylinders merged, sorted shortlex. Canonical forms are unique
//! per denoted set, so structural equality is denotational equality.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::BinaryString;
use crate::error::{Error, Result};

/// A clopen set `[V] = ∪ [ρ]` for mutually incompatible generators ρ.
/// The empty generator list denotes the empty set.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClopenSet {
    generators: Vec<BinaryString>,
}

impl PartialOrd for ClopenSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl ClopenSet {
    /// Validates that `generators` are mutually incompatible, then stores the
    /// canonical (sibling-merged, sorted) form.
    pub fn new(generators: Vec<BinaryString>) -> Result<Self> {
        for (i, a) in generators.iter().enumerate() {
            for b in generators.iter().skip(i + 1) {
                if a.is_compatible(b) {
                    return Err(Error::Structure(format!(
                        "generators {a} and {b} are compatible; not an antichain"
                    )));
                }
            }
        }
        Ok(Self::canonicalize(generators))
    }

    pub fn empty() -> Self {
        ClopenSet { generators: Vec::new() }
    }

    /// Single-cylinder set.
    pub fn cylinder(gen: BinaryString) -> Self {
        ClopenSet { generators: vec![gen] }
    }

    /// Canonicalizes an arbitrary generator list denoting the union of its
    /// cylinders: drops generators with a proper prefix present, merges
    /// sibling pairs, sorts.
    fn canonicalize(mut gens: Vec<BinaryString>) -> Self {
        gens.sort();
        gens.dedup();
        // Remove strings that extend another in the list.
        let mut minimal: Vec<BinaryString> = Vec::new();
        for g in gens {
            if !minimal.iter().any(|m| m.is_prefix_of(&g)) {
                minimal.push(g);
            }
        }
        // Merge sibling pairs until a fixpoint.
        loop {
            minimal.sort();
            let mut merged = false;
            let mut out: Vec<BinaryString> = Vec::new();
            let mut skip = vec![false; minimal.len()];
            for i in 0..minimal.len() {
                if skip[i] {
                    continue;
                }
                let g = minimal[i];
                let mut done = false;
                if !g.is_empty() {
                    let sib = g.prefix(g.len() - 1).push(!g.bit(g.len() - 1));
                    for (j, h) in minimal.iter().enumerate().skip(i + 1) {
                        if !skip[j] && *h == sib {
                            out.push(g.prefix(g.len() - 1));
                            skip[j] = true;
                            merged = true;
                            done = true;
                            break;
                        }
                    }
                }
                if !done {
                    out.push(g);
                }
            }
            minimal = out;
            if !merged {
                break;
            }
        }
        minimal.sort();
        ClopenSet { generators: minimal }
    }

    pub fn generators(&self) -> &[BinaryString] {
        &self.generators
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// max generator length, 0 for the empty set.
    pub fn height(&self) -> u32 {
        self.generators.iter().map(|g| g.len()).max().unwrap_or(0)
    }

    /// Does `[V]` meet the cylinder of `s`? (Some generator compatible with s.)
    pub fn meets_string(&self, s: &BinaryString) -> bool {
        self.generators.iter().any(|g| g.is_compatible(s))
    }

    /// `[self] ∩ [other] ≠ ∅`
    pub fn meets(&self, other: &ClopenSet) -> bool {
        self.generators
            .iter()
            .any(|g| other.generators.iter().any(|h| g.is_compatible(h)))
    }

    /// Exact intersection as a clopen set.
    pub fn intersect(&self, other: &ClopenSet) -> ClopenSet {
        let mut gens = Vec::new();
        for g in &self.generators {
            for h in &other.generators {
                if g.is_prefix_of(h) {
                    gens.push(*h);
                } else if h.is_prefix_of(g) {
                    gens.push(*g);
                }
            }
        }
        ClopenSet::canonicalize(gens)
    }

    /// `[self] ⊇ [other]`
    pub fn covers(&self, other: &ClopenSet) -> bool {
        self.intersect(other) == *other
    }

    /// Number of height-`h` cylinders inside `[self]`; requires h >= height.
    pub fn cell_count(&self, h: u32) -> u64 {
        debug_assert!(h >= self.height());
        self.generators.iter().map(|g| 1u64 << (h - g.len())).sum()
    }

    /// Canonical total order: (height, generator count, generator list).
    pub fn canonical_cmp(&self, other: &ClopenSet) -> std::cmp::Ordering {
        self.height()
            .cmp(&other.height())
            .then_with(|| self.generators.len().cmp(&other.generators.len()))
            .then_with(|| self.generators.cmp(&other.generators))
    }
}

impl Ord for ClopenSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.canonical_cmp(other)
    }
}

impl fmt::Display for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, g) in self.generators.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `⋂ [V_i] ≠ ∅`. The intersection over an empty family is the whole space,
/// which is nonempty.
pub fn intersection_nonempty(sets: &[&ClopenSet]) -> bool {
    match sets.split_first() {
        None => true,
        Some((first, rest)) => {
            let mut acc = (*first).clone();
            for v in rest {
                acc = acc.intersect(v);
                if acc.is_empty() {
                    return false;
                }
            }
            !acc.is_empty()
        }
    }
}

/// `[D] ∩ [V] ≠ ∅` for a finite string family D (not necessarily an antichain).
/// The empty family denotes the empty set.
pub fn strings_meet_clopen(d: &[BinaryString], v: &ClopenSet) -> bool {
    d.iter().any(|s| v.meets_string(s))
}

/// All canonical clopen sets of height <= `max_height`, including the empty
/// set, in canonical order. Only usable for small heights (the count grows
/// doubly exponentially).
pub fn enumerate_clopen_sets(max_height: u32) -> Vec<ClopenSet> {
    assert!(max_height <= 4, "clopen enumeration is only for small heights");
    // Distinct denotations correspond to subsets of the 2^h cells.
    let h = max_height;
    let cells: Vec<BinaryString> = all_strings_of_length(h);
    let mut out: Vec<ClopenSet> = Vec::new();
    for mask in 0u64..(1u64 << cells.len()) {
        let gens: Vec<BinaryString> = cells
            .iter()
            .enumerate()
            .filter(|(i, _)| (mask >> i) & 1 == 1)
            .map(|(_, c)| *c)
            .collect();
        out.push(ClopenSet::canonicalize(gens));
    }
    out.sort();
    out.dedup();
    out
}

pub fn all_strings_of_length(n: u32) -> Vec<BinaryString> {
    let mut v: Vec<BinaryString> = (0..(1u64 << n))
        .map(|bits| BinaryString::from_raw(bits, n))
        .collect();
    v.sort();
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BinaryString {
        s.parse().unwrap()
    }

    fn cs(gens: &[&str]) -> ClopenSet {
        ClopenSet::new(gens.iter().map(|g| bs(g)).collect()).unwrap()
    }

    #[test]
    fn rejects_compatible_generators() {
        assert!(ClopenSet::new(vec![bs("0"), bs("01")]).is_err());
    }

    #[test]
    fn height_conventions() {
        assert_eq!(ClopenSet::empty().height(), 0);
        assert_eq!(cs(&["0", "11"]).height(), 2);
    }

    #[test]
    fn canonical_sibling_merge() {
        let v = ClopenSet::new(vec![bs("00"), bs("01")]).unwrap();
        assert_eq!(v, cs(&["0"]));
    }

    #[test]
    fn intersection_cases() {
        let a = cs(&["0"]);
        let b = cs(&["01", "10"]);
        assert_eq!(a.intersect(&b), cs(&["01"]));
        assert!(a.meets(&b));
        let c = cs(&["11"]);
        assert!(!a.meets(&c));
        assert!(intersection_nonempty(&[]));
        assert!(!intersection_nonempty(&[&a, &c]));
        assert!(intersection_nonempty(&[&a, &b]));
    }

    #[test]
    fn covers_and_cells() {
        let whole = cs(&[""]);
        assert!(whole.covers(&cs(&["0110"])));
        assert!(!cs(&["0"]).covers(&cs(&["1"])));
        assert_eq!(cs(&["0", "10"]).cell_count(3), 6);
    }

    #[test]
    fn enumeration_counts_distinct_sets() {
        // Height <= 1: denotations are unions of cells {[0], [1]}: 4 distinct.
        assert_eq!(enumerate_clopen_sets(1).len(), 4);
        assert_eq!(enumerate_clopen_sets(2).len(), 16);
    }

    #[test]
    fn strings_meet() {
        let v = cs(&["00"]);
        assert!(strings_meet_clopen(&[bs("0")], &v));
        assert!(!strings_meet_clopen(&[bs("01"), bs("1")], &v));
        assert!(!strings_meet_clopen(&[], &v));
    }
}
