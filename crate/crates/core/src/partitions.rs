//! Ordered partitions, disperse clopen families, supporters, and Cross.
//!
//! "Partition" never means piecewise disjoint here: parts may overlap and may
//! be empty. Both the disperse and the supporter predicate are monotone under
//! shrinking parts, so exhaustive search ranges over the u^n disjoint
//! assignments only; a disjoint counterexample exists iff any counterexample
//! exists.

use serde::{Deserialize, Serialize};

use crate::bits::SmallSet;
use crate::clopen::ClopenSet;
use crate::error::{Error, Result};

/// An ordered list of (possibly overlapping, possibly empty) subsets of a
/// finite ground set. Covering the ground is a property, not an invariant:
/// `Cross` outputs may legitimately fail it when the supporter input is not
/// actually a supporter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderedPartition {
    pub ground: SmallSet,
    pub parts: Vec<SmallSet>,
}

impl OrderedPartition {
    pub fn new(ground: SmallSet, parts: Vec<SmallSet>) -> Result<Self> {
        for (i, p) in parts.iter().enumerate() {
            if !p.is_subset(&ground) {
                return Err(Error::Structure(format!(
                    "part {} is not a subset of the ground set",
                    i + 1
                )));
            }
        }
        Ok(OrderedPartition { ground, parts })
    }

    pub fn arity(&self) -> usize {
        self.parts.len()
    }

    pub fn covers_ground(&self) -> bool {
        let mut u = SmallSet::EMPTY;
        for p in &self.parts {
            u = u.union(*p);
        }
        self.ground.is_subset(&u)
    }
}

/// A u-tuple of families of subsets of {0..n-1} (0-based internally; traces
/// render indices 1-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Supporter {
    pub n: u32,
    pub families: Vec<Vec<SmallSet>>,
}

impl Supporter {
    pub fn new(n: u32, mut families: Vec<Vec<SmallSet>>) -> Result<Self> {
        let full = SmallSet::interval(n);
        for fam in &mut families {
            for k in fam.iter() {
                if !k.is_subset(&full) {
                    return Err(Error::Structure(format!(
                        "supporter member {k} not a subset of the index set of size {n}"
                    )));
                }
            }
            fam.sort();
            fam.dedup();
        }
        Ok(Supporter { n, families })
    }

    pub fn arity(&self) -> usize {
        self.families.len()
    }
}

/// Per-subset intersection-nonemptiness table for a clopen family, indexed by
/// index-subset mask. `table[0] = true` (empty intersection convention: the
/// whole space).
fn intersection_table(vs: &[ClopenSet]) -> Vec<bool> {
    let n = vs.len();
    assert!(n <= 20, "intersection table limited to small families");
    let h = vs.iter().map(|v| v.height()).max().unwrap_or(0);
    if h <= 6 {
        // Cell-mask route: each set becomes a mask over the 2^h cells.
        let masks: Vec<u64> = vs
            .iter()
            .map(|v| {
                let mut m = 0u64;
                for cell in 0..(1u64 << h) {
                    let s = crate::bits::BinaryString::from_raw(cell, h);
                    if v.meets_string(&s) {
                        m |= 1 << cell;
                    }
                }
                m
            })
            .collect();
        let mut acc = vec![u64::MAX; 1 << n];
        let mut out = vec![true; 1 << n];
        for mask in 1usize..(1 << n) {
            let j = mask.trailing_zeros() as usize;
            acc[mask] = acc[mask & (mask - 1)] & masks[j];
            out[mask] = acc[mask] != 0;
        }
        // Height 0 special case: a set with no generators has mask 0 even at
        // h = 0 where the only cell is the empty string.
        out
    } else {
        let mut inter: Vec<Option<ClopenSet>> = vec![None; 1 << n];
        let mut out = vec![true; 1 << n];
        for mask in 1usize..(1 << n) {
            let j = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            let cur = if rest == 0 {
                vs[j].clone()
            } else {
                match &inter[rest] {
                    Some(r) => r.intersect(&vs[j]),
                    None => ClopenSet::empty(), // parent already empty
                }
            };
            out[mask] = !cur.is_empty();
            inter[mask] = if cur.is_empty() { None } else { Some(cur) };
        }
        out
    }
}

/// Exhaustive disperse check: over every ordered u-partition of the index set
/// (disjoint assignments suffice by monotonicity), some part must have empty
/// intersection. An empty part never witnesses (its intersection is the whole
/// space).
pub fn is_disperse(vs: &[ClopenSet], u: u32) -> bool {
    assert!(u >= 1, "is_disperse requires u >= 1");
    let n = vs.len();
    if n == 0 {
        return false;
    }
    let nonempty = intersection_table(vs);
    disperse_from_table(&nonempty, n, u)
}

fn disperse_from_table(nonempty: &[bool], n: usize, u: u32) -> bool {
    let u = u as usize;
    let total = (u as u64).checked_pow(n as u32).expect("assignment space overflow");
    let mut digits = vec![0usize; n];
    for _ in 0..total {
        let mut parts = vec![0usize; u];
        for (j, &d) in digits.iter().enumerate() {
            parts[d] |= 1 << j;
        }
        let witnessed = parts.iter().any(|&p| p != 0 && !nonempty[p]);
        if !witnessed {
            return false;
        }
        // increment base-u counter
        for d in digits.iter_mut() {
            *d += 1;
            if *d < u {
                break;
            }
            *d = 0;
        }
    }
    true
}

/// Star-cover formulation of the same predicate, usable when all heights are
/// <= 6: the family is u-disperse iff its index set cannot be covered by u
/// point stars. Kept as a second route and equated with `is_disperse` in
/// tests.
pub fn is_disperse_star(vs: &[ClopenSet], u: u32) -> bool {
    assert!(u >= 1);
    let n = vs.len();
    if n == 0 {
        return false;
    }
    let h = vs.iter().map(|v| v.height()).max().unwrap_or(0);
    assert!(h <= 6, "star route requires height <= 6");
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut stars: Vec<u64> = Vec::new();
    for cell in 0..(1u64 << h) {
        let s = crate::bits::BinaryString::from_raw(cell, h);
        let mut star = 0u64;
        for (j, v) in vs.iter().enumerate() {
            if v.meets_string(&s) {
                star |= 1 << j;
            }
        }
        stars.push(star);
    }
    stars.sort();
    stars.dedup();
    !coverable(full, &stars, u)
}

fn coverable(target: u64, stars: &[u64], budget: u32) -> bool {
    if target == 0 {
        return true;
    }
    if budget == 0 {
        return false;
    }
    let pivot = target.trailing_zeros();
    for &s in stars {
        if (s >> pivot) & 1 == 1 && coverable(target & !s, stars, budget - 1) {
            return true;
        }
    }
    false
}

/// Exhaustive supporter check over the u^n disjoint assignments.
pub fn is_supporter(k: &Supporter, u: u32, n: u32) -> bool {
    assert_eq!(
        k.families.len(),
        u as usize,
        "supporter arity must match u"
    );
    let u = u as usize;
    let n = n as usize;
    // Precompute, per family, which part-masks contain some member.
    let hit: Vec<Vec<bool>> = k
        .families
        .iter()
        .map(|fam| {
            let mut t = vec![false; 1 << n];
            for mask in 0usize..(1 << n) {
                let p = SmallSet::from_mask(mask as u64);
                t[mask] = fam.iter().any(|kk| kk.is_subset(&p));
            }
            t
        })
        .collect();
    let total = (u as u64).checked_pow(n as u32).expect("assignment space overflow");
    let mut digits = vec![0usize; n];
    for _ in 0..total {
        let mut parts = vec![0usize; u];
        for (j, &d) in digits.iter().enumerate() {
            parts[d] |= 1 << j;
        }
        if !(0..u).any(|i| hit[i][parts[i]]) {
            return false;
        }
        for d in digits.iter_mut() {
            *d += 1;
            if *d < u {
                break;
            }
            *d = 0;
        }
    }
    true
}

/// Builds the canonical supporter from a disperse family: family i holds all
/// index subsets whose clopen sets form an e_i-disperse class. Errors when
/// the input is not (Σe)-disperse, in which case the construction's guarantee
/// does not apply.
pub fn supporter_from_disperse(vs: &[ClopenSet], e: &[u32]) -> Result<Supporter> {
    if e.is_empty() || e.iter().any(|&x| x == 0) {
        return Err(Error::Precondition(
            "e-vector must consist of positive numbers".into(),
        ));
    }
    let kp: u32 = e.iter().sum();
    if !is_disperse(vs, kp) {
        return Err(Error::Precondition(format!(
            "family is not {kp}-disperse"
        )));
    }
    let n = vs.len();
    let mut families = Vec::with_capacity(e.len());
    for &ei in e {
        let mut fam = Vec::new();
        for mask in 1usize..(1 << n) {
            let sub: Vec<ClopenSet> = (0..n)
                .filter(|j| (mask >> j) & 1 == 1)
                .map(|j| vs[j].clone())
                .collect();
            if is_disperse(&sub, ei) {
                fam.push(subset_from_submask(mask as u64, n));
            }
        }
        families.push(fam);
    }
    Supporter::new(n as u32, families)
}

fn subset_from_submask(mask: u64, _n: usize) -> SmallSet {
    SmallSet::from_mask(mask)
}

/// Inclusion-minimal e-disperse index subsets, in ascending mask order.
pub fn minimal_disperse_subsets(vs: &[ClopenSet], e: u32) -> Vec<SmallSet> {
    let n = vs.len();
    let mut disperse = vec![false; 1 << n];
    for mask in 1usize..(1 << n) {
        let sub: Vec<ClopenSet> = (0..n)
            .filter(|j| (mask >> j) & 1 == 1)
            .map(|j| vs[j].clone())
            .collect();
        disperse[mask] = is_disperse(&sub, e);
    }
    let mut out = Vec::new();
    'outer: for mask in 1usize..(1 << n) {
        if !disperse[mask] {
            continue;
        }
        let mut m = mask;
        while m != 0 {
            let j = m.trailing_zeros() as usize;
            if disperse[mask & !(1 << j)] {
                continue 'outer;
            }
            m &= m - 1;
        }
        out.push(SmallSet::from_mask(mask as u64));
    }
    out
}

/// The Cross operation on ordered partitions: output part (i, K) is the
/// intersection of the i-th parts of the inputs indexed by K, ordered by
/// (i, canonical order of K). The intersection over K = ∅ is the whole
/// ground set.
pub fn cross_partitions(xs: &[OrderedPartition], k: &Supporter) -> Result<OrderedPartition> {
    if xs.len() != k.n as usize {
        return Err(Error::Shape(format!(
            "expected {} partitions, got {}",
            k.n,
            xs.len()
        )));
    }
    let u = k.families.len();
    let ground = match xs.first() {
        Some(x) => x.ground,
        None => SmallSet::EMPTY,
    };
    for x in xs {
        if x.ground != ground {
            return Err(Error::Shape("partitions have mismatched ground sets".into()));
        }
        if x.arity() != u {
            return Err(Error::Shape(format!(
                "partition arity {} does not match supporter arity {u}",
                x.arity()
            )));
        }
    }
    let mut parts = Vec::new();
    for (i, fam) in k.families.iter().enumerate() {
        for kk in fam {
            let mut y = ground;
            for p in kk.iter() {
                y = y.intersection(xs[p as usize].parts[i]);
            }
            parts.push(y);
        }
    }
    OrderedPartition::new(ground, parts)
}
