//! Exhaustive fact-verification suites.
//!
//! The disperse/supporter predicates and the supporter construction depend
//! only on which index subsets of a clopen sequence have nonempty
//! intersection, i.e. on the sequence's point stars. Sequences are therefore
//! grouped by star structure and the expensive checks run once per distinct
//! structure; every sequence is still counted, and a deterministic stride of
//! sequences is re-checked directly against its representative's verdict.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::{BinaryString, SmallSet};
use crate::clopen::{enumerate_clopen_sets, ClopenSet};
use crate::error::{Error, Result};
use crate::functionals::{Entry, Output, ToyFunctional};
use crate::partitions::{
    cross_partitions, is_disperse, is_supporter, supporter_from_disperse, OrderedPartition,
    Supporter,
};

#[derive(Debug, Clone)]
pub struct Report {
    pub suite: String,
    pub cases: u64,
    pub failures: Vec<String>,
    pub millis: u128,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn line(&self) -> String {
        format!(
            "{}: {} — {} cases, {} failures, {} ms",
            self.suite,
            if self.passed() { "PASS" } else { "FAIL" },
            self.cases,
            self.failures.len(),
            self.millis
        )
    }
}

#[derive(Debug, Clone)]
pub struct Bounds {
    /// Single-cylinder pool: generator length bound and sequence length.
    pub cylinder_height: u32,
    pub cylinder_n: usize,
    /// Full distinct-set pool at height <= 3: sequence length.
    pub full_pool_n: usize,
    /// Distinct-set pool at height <= 2: sequence length.
    pub h2_pool_n: usize,
    /// Ceiling on Σe over the e-vectors.
    pub e_sum: u32,
    /// Direct cross samples and the seed feeding all sampled layers.
    pub fact5_samples: u64,
    pub aband_samples: u64,
    pub seed: u64,
}

impl Bounds {
    pub fn default_bounds() -> Self {
        Bounds {
            cylinder_height: 3,
            cylinder_n: 5,
            full_pool_n: 3,
            h2_pool_n: 4,
            e_sum: 4,
            fact5_samples: 10_000,
            aband_samples: 1_000,
            seed: 0x5eed,
        }
    }

    pub fn quick() -> Self {
        Bounds {
            cylinder_height: 2,
            cylinder_n: 3,
            full_pool_n: 2,
            h2_pool_n: 3,
            e_sum: 3,
            fact5_samples: 500,
            aband_samples: 100,
            seed: 0x5eed,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "default" => Ok(Self::default_bounds()),
            "quick" => Ok(Self::quick()),
            other => Err(Error::Config(format!(
                "unknown bounds preset {other:?}; available: quick, default"
            ))),
        }
    }

    /// Rough sequence count driving the refusal check.
    pub fn estimated_sequences(&self) -> u64 {
        let pow = |b: u64, n: usize| b.saturating_pow(n as u32);
        let cyl = (1u64 << (self.cylinder_height + 1)) - 1;
        (1..=self.cylinder_n).map(|n| pow(cyl, n)).sum::<u64>()
            + (1..=self.full_pool_n).map(|n| pow(256, n)).sum::<u64>()
            + (1..=self.h2_pool_n).map(|n| pow(16, n)).sum::<u64>()
    }

    pub fn check_cost(&self) -> Result<()> {
        let est = self.estimated_sequences();
        const CAP: u64 = 200_000_000;
        if est > CAP {
            return Err(Error::Budget(format!(
                "bounds enumerate ~{est} sequences, beyond the supported {CAP}; \
                 shrink the pool sizes"
            )));
        }
        Ok(())
    }
}

/// All e-vectors of positive entries with sum <= cap.
fn e_vectors(cap: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    fn rec(rest: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        for e in 1..=rest {
            cur.push(e);
            rec(rest - e, cur, out);
            cur.pop();
        }
    }
    rec(cap, &mut Vec::new(), &mut out);
    out.sort();
    out.dedup();
    out
}

/// The unchecked supporter construction (families of e_i-disperse subsets),
/// shared with `supporter_from_disperse` through the public predicate.
fn disperse_subset_families(vs: &[ClopenSet], e: &[u32]) -> Supporter {
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
                fam.push(SmallSet::from_mask(mask as u64));
            }
        }
        families.push(fam);
    }
    Supporter::new(n as u32, families).expect("families over the index set")
}

/// Star-structure key at resolution 3: the eight point stars as index
/// masks, sorted and packed into a word. Finer than the pure star-set
/// invariant (multiplicities kept), which only splits groups further.
fn star_key(masks: &[u8]) -> u64 {
    let mut stars = [0u8; 8];
    for (tau, star) in stars.iter_mut().enumerate() {
        for (j, m) in masks.iter().enumerate() {
            if (m >> tau) & 1 == 1 {
                *star |= 1 << j;
            }
        }
    }
    stars.sort_unstable();
    u64::from_le_bytes(stars)
}

/// Cell mask of a clopen set at resolution 3.
fn mask3(v: &ClopenSet) -> u8 {
    let mut m = 0u8;
    for cell in 0..8u64 {
        if v.meets_string(&BinaryString::from_raw(cell, 3)) {
            m |= 1 << cell;
        }
    }
    m
}

struct Fact1Verdict {
    per_vector: Vec<(bool, bool)>, // (hypothesis holds, conclusion holds)
}

fn fact1_check(seq: &[ClopenSet], vectors: &[Vec<u32>]) -> Fact1Verdict {
    let per_vector = vectors
        .iter()
        .map(|e| {
            let kp: u32 = e.iter().sum();
            let disp = is_disperse(seq, kp);
            let concl = if disp {
                let sup = supporter_from_disperse(seq, e).expect("checked disperse");
                is_supporter(&sup, e.len() as u32, seq.len() as u32)
            } else {
                // The equivalence's reverse direction: the construction's
                // families must fail the supporter test.
                !is_supporter(
                    &disperse_subset_families(seq, e),
                    e.len() as u32,
                    seq.len() as u32,
                )
            };
            (disp, concl)
        })
        .collect();
    Fact1Verdict { per_vector }
}

/// Supporter-construction equivalence over exhaustive sequence pools.
pub fn fact1_suite(b: &Bounds) -> Report {
    let start = Instant::now();
    let vectors = e_vectors(b.e_sum);
    let mut failures = Vec::new();
    let mut cases: u64 = 0;

    // Pools of distinct clopen sets, each paired with its resolution-3 mask.
    let cylinders: Vec<ClopenSet> = {
        let mut v = vec![];
        for len in 0..=b.cylinder_height {
            for bits in 0..(1u64 << len) {
                v.push(ClopenSet::cylinder(BinaryString::from_reversed_value(bits, len)));
            }
        }
        v
    };
    let full_pool = enumerate_clopen_sets(3);
    let h2_pool = enumerate_clopen_sets(2);

    for (pool_name, pool, max_n) in [
        ("cylinders<=3", &cylinders, b.cylinder_n),
        ("distinct<=3", &full_pool, b.full_pool_n),
        ("distinct<=2", &h2_pool, b.h2_pool_n),
    ] {
        let masks: Vec<u8> = pool.iter().map(mask3).collect();
        for n in 1..=max_n {
            // Group all |pool|^n sequences by star structure.
            let mut groups: BTreeMap<u64, (Vec<usize>, u64)> = BTreeMap::new();
            let mut idx = vec![0usize; n];
            let mut seq_masks = vec![0u8; n];
            let mut stride_checks: Vec<Vec<usize>> = Vec::new();
            let mut counter: u64 = 0;
            loop {
                for (j, &i) in idx.iter().enumerate() {
                    seq_masks[j] = masks[i];
                }
                let key = star_key(&seq_masks);
                groups
                    .entry(key)
                    .and_modify(|(_, c)| *c += 1)
                    .or_insert_with(|| (idx.clone(), 1));
                if counter % 104729 == 0 {
                    stride_checks.push(idx.clone());
                }
                counter += 1;
                // odometer
                let mut j = 0;
                loop {
                    if j == n {
                        break;
                    }
                    idx[j] += 1;
                    if idx[j] < pool.len() {
                        break;
                    }
                    idx[j] = 0;
                    j += 1;
                }
                if j == n {
                    break;
                }
            }
            // Expensive checks once per structure.
            let mut verdicts: BTreeMap<u64, Fact1Verdict> = BTreeMap::new();
            for (key, (rep, count)) in &groups {
                let seq: Vec<ClopenSet> = rep.iter().map(|&i| pool[i].clone()).collect();
                let verdict = fact1_check(&seq, &vectors);
                for ((_, ok), e) in verdict.per_vector.iter().zip(&vectors) {
                    if !ok {
                        failures.push(format!(
                            "pool {pool_name}: sequence {seq:?} with e={e:?} fails the \
                             supporter equivalence"
                        ));
                    }
                }
                cases += count * vectors.len() as u64;
                verdicts.insert(*key, verdict);
            }
            // Deterministic stride: direct re-check against representative.
            for idxs in stride_checks {
                let seq: Vec<ClopenSet> = idxs.iter().map(|&i| pool[i].clone()).collect();
                let sm: Vec<u8> = idxs.iter().map(|&i| masks[i]).collect();
                let direct = fact1_check(&seq, &vectors);
                let rep = &verdicts[&star_key(&sm)];
                for (a, b2) in direct.per_vector.iter().zip(&rep.per_vector) {
                    if a != b2 {
                        failures.push(format!(
                            "pool {pool_name}: star grouping gave a different verdict on {seq:?}"
                        ));
                    }
                }
            }
        }
    }

    Report {
        suite: "fact1-supporter-equivalence".into(),
        cases,
        failures,
        millis: start.elapsed().as_millis(),
    }
}

/// Cross coverage. The pointwise layer is exhaustive: whether an element is
/// covered by the crossed partition depends only on which parts of each
/// input contain it, so the quantifier over ground sets and tuples factors
/// through per-element membership configurations. Direct layers run the
/// actual operation on exhaustive tiny inputs and on seeded samples.
pub fn fact5_suite(b: &Bounds) -> Report {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut cases: u64 = 0;

    // Pointwise exhaustive layer over u <= 3, n <= 3.
    for n in 1..=3usize {
        let subsets = 1usize << n; // subsets of [n] as masks
        let fams = 1usize << subsets; // families of subsets
        for u in 1..=3usize {
            let assignments: u64 = (u as u64).pow(n as u32);
            let configs: u64 = ((1u64 << u) - 1).pow(n as u32);
            // hit(f, p): some member of family f is contained in part-mask p.
            let mut hit = vec![vec![false; subsets]; fams];
            for (f, row) in hit.iter_mut().enumerate() {
                for (p, slot) in row.iter_mut().enumerate() {
                    *slot = (0..subsets).any(|kk| (f >> kk) & 1 == 1 && (kk & !p) == 0);
                }
            }
            // Disjoint-assignment parts and per-element configurations.
            let mut assign_parts = Vec::with_capacity(assignments as usize);
            for a in 0..assignments {
                let mut parts = vec![0usize; u];
                let mut x = a;
                for j in 0..n {
                    parts[(x % u as u64) as usize] |= 1 << j;
                    x /= u as u64;
                }
                assign_parts.push(parts);
            }
            let mut config_parts = Vec::with_capacity(configs as usize);
            let mut stack = vec![0u64; n];
            // enumerate (S_1..S_n), S_p а nonempty subset of [u]
            fn enum_configs(
                p: usize,
                n: usize,
                u: usize,
                stack: &mut Vec<u64>,
                out: &mut Vec<Vec<usize>>,
            ) {
                if p == n {
                    let mut parts = vec![0usize; u];
                    for (j, s) in stack.iter().enumerate() {
                        for i in 0..u {
                            if (s >> i) & 1 == 1 {
                                parts[i] |= 1 << j;
                            }
                        }
                    }
                    out.push(parts);
                    return;
                }
                for s in 1u64..(1 << u) {
                    stack[p] = s;
                    enum_configs(p + 1, n, u, stack, out);
                }
            }
            enum_configs(0, n, u, &mut stack, &mut config_parts);

            // Per family and slot: coverage bitmasks.
            let sup_full = (1u128 << assignments) - 1;
            let mut sup_mask = vec![vec![0u128; u]; fams];
            let mut cfg_mask = vec![vec![vec![0u64; 6]; u]; fams];
            for f in 0..fams {
                for i in 0..u {
                    for (a, parts) in assign_parts.iter().enumerate() {
                        if hit[f][parts[i]] {
                            sup_mask[f][i] |= 1 << a;
                        }
                    }
                    for (cix, parts) in config_parts.iter().enumerate() {
                        if hit[f][parts[i]] {
                            cfg_mask[f][i][cix / 64] |= 1 << (cix % 64);
                        }
                    }
                }
            }
            let cfg_words = config_parts.len().div_ceil(64);
            let cfg_full: Vec<u64> = (0..cfg_words)
                .map(|w| {
                    let bits = (config_parts.len() - w * 64).min(64);
                    if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 }
                })
                .collect();

            // Sweep all supporter tuples.
            let mut tuple = vec![0usize; u];
            loop {
                let mut sup = 0u128;
                for (i, &f) in tuple.iter().enumerate() {
                    sup |= sup_mask[f][i];
                }
                if sup == sup_full {
                    // A supporter: every configuration must be covered.
                    for w in 0..cfg_words {
                        let mut acc = 0u64;
                        for (i, &f) in tuple.iter().enumerate() {
                            acc |= cfg_mask[f][i][w];
                        }
                        if acc != cfg_full[w] {
                            failures.push(format!(
                                "u={u} n={n}: supporter {tuple:?} leaves a membership \
                                 configuration uncovered"
                            ));
                            break;
                        }
                    }
                }
                cases += 1;
                let mut i = 0;
                loop {
                    if i == u {
                        break;
                    }
                    tuple[i] += 1;
                    if tuple[i] < fams {
                        break;
                    }
                    tuple[i] = 0;
                    i += 1;
                }
                if i == u {
                    break;
                }
            }
        }
    }

    // Direct exhaustive layer: u=2, n=2, |W|=3, all supporters and tuples.
    {
        let w = SmallSet::interval(3);
        let subsets: Vec<SmallSet> = (0u64..4).map(SmallSet::from_mask).collect();
        let all_families: Vec<Vec<SmallSet>> = (0u64..16)
            .map(|f| {
                subsets
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (f >> i) & 1 == 1)
                    .map(|(_, s)| *s)
                    .collect()
            })
            .collect();
        let mut tuples: Vec<Vec<Vec<u64>>> = Vec::new(); // per partition: per part: elements
        fn enum_partitions(w: u32, u: usize, out: &mut Vec<Vec<SmallSet>>) {
            // every element lands in a nonempty subset of parts
            let mut cur = vec![SmallSet::EMPTY; u];
            fn rec(x: u32, w: u32, u: usize, cur: &mut Vec<SmallSet>, out: &mut Vec<Vec<SmallSet>>) {
                if x == w {
                    out.push(cur.clone());
                    return;
                }
                for s in 1u64..(1 << u) {
                    for i in 0..u {
                        if (s >> i) & 1 == 1 {
                            cur[i] = cur[i].insert(x);
                        }
                    }
                    rec(x + 1, w, u, cur, out);
                    for i in 0..u {
                        if (s >> i) & 1 == 1 {
                            cur[i] = cur[i].remove(x);
                        }
                    }
                }
            }
            rec(0, w, u, &mut cur, out);
        }
        let mut parts2 = Vec::new();
        enum_partitions(3, 2, &mut parts2);
        let _ = &mut tuples;
        for fa in &all_families {
            for fb in &all_families {
                let sup = Supporter::new(2, vec![fa.clone(), fb.clone()]).unwrap();
                if !is_supporter(&sup, 2, 2) {
                    continue;
                }
                for p1 in &parts2 {
                    for p2 in &parts2 {
                        let x1 = OrderedPartition::new(w, p1.clone()).unwrap();
                        let x2 = OrderedPartition::new(w, p2.clone()).unwrap();
                        let y = cross_partitions(&[x1, x2], &sup).unwrap();
                        cases += 1;
                        if !y.covers_ground() {
                            failures.push(format!(
                                "direct: supporter {sup:?} with partitions {p1:?},{p2:?} \
                                 fails to cover"
                            ));
                        }
                    }
                }
            }
        }
    }

    // Seeded direct layer: u=3, n=3, |W|=6.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(b.seed);
        let w = SmallSet::interval(6);
        let mut done = 0u64;
        while done < b.fact5_samples {
            let families: Vec<Vec<SmallSet>> = (0..3)
                .map(|_| {
                    let count = rng.gen_range(1..=4);
                    (0..count)
                        .map(|_| {
                            let size = rng.gen_range(1..=3);
                            let mut s = SmallSet::EMPTY;
                            while s.len() < size {
                                s = s.insert(rng.gen_range(0..3));
                            }
                            s
                        })
                        .collect()
                })
                .collect();
            let sup = Supporter::new(3, families).unwrap();
            if !is_supporter(&sup, 3, 3) {
                continue;
            }
            let xs: Vec<OrderedPartition> = (0..3)
                .map(|_| {
                    let mut parts = vec![SmallSet::EMPTY; 3];
                    for x in 0..6 {
                        let s = rng.gen_range(1u64..8);
                        for (i, part) in parts.iter_mut().enumerate() {
                            if (s >> i) & 1 == 1 {
                                *part = part.insert(x);
                            }
                        }
                    }
                    OrderedPartition::new(w, parts).unwrap()
                })
                .collect();
            let y = cross_partitions(&xs, &sup).unwrap();
            cases += 1;
            if !y.covers_ground() {
                failures.push(format!("seeded: supporter {sup:?} with {xs:?} fails to cover"));
            }
            done += 1;
        }
    }

    Report {
        suite: "fact5-cross-coverage".into(),
        cases,
        failures,
        millis: start.elapsed().as_millis(),
    }
}

/// Abandonment facts: subset monotonicity, extension stability, and the
/// disperse blocking property, over exhaustive one-entry tables plus seeded
/// multi-entry tables.
pub fn abandonment_suite(b: &Bounds) -> Report {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut cases: u64 = 0;

    let strings3: Vec<BinaryString> = {
        let mut v = vec![];
        for len in 0..=3u32 {
            for bits in 0..(1u64 << len) {
                v.push(BinaryString::from_raw(bits, len));
            }
        }
        v
    };
    let short_strings: Vec<BinaryString> = strings3.iter().filter(|s| s.len() <= 2).copied().collect();
    let mut outputs: Vec<Output> = Vec::new();
    for (i, a) in short_strings.iter().enumerate() {
        outputs.push(Output::Set(vec![*a]));
        for b2 in short_strings.iter().skip(i + 1) {
            outputs.push(Output::Set(vec![*a, *b2]));
        }
    }
    outputs.push(Output::Oversized);
    let vpool = enumerate_clopen_sets(2);
    let rhos: Vec<BinaryString> = vec![BinaryString::empty(), "1".parse().unwrap()];
    let horizon = 5u32;
    let ground = SmallSet::interval(b.aband_ground().min(5));

    // Exhaustive one-entry layer: fac3 monotonicity, fast/exhaustive route
    // agreement, and fac9 extension stability.
    for prefix in &strings3 {
        for input in 0..=2u32 {
            for out in &outputs {
                let f = ToyFunctional::new(
                    1,
                    vec![Entry { prefix: *prefix, input, output: out.clone() }],
                )
                .unwrap();
                for rho in &rhos {
                    for v in &vpool {
                        let mut ab = [false; 64];
                        for ymask in 0..(1u64 << ground.len()) {
                            let y = SmallSet::from_mask(ymask);
                            let fast = f.abandons_on_set(rho, v, y, horizon);
                            let slow = f.abandons_on_set_exhaustive(rho, v, y, horizon);
                            cases += 1;
                            if fast != slow {
                                failures.push(format!(
                                    "route mismatch: f={f:?} rho={rho} v={v:?} y={y}"
                                ));
                            }
                            ab[ymask as usize] = fast;
                        }
                        // fac3: subsets of abandoning supersets.
                        for ymask in 0..(1u64 << ground.len()) {
                            let mut z = ymask;
                            loop {
                                if ab[z as usize] && !ab[ymask as usize] {
                                    failures.push(format!(
                                        "monotonicity: f={f:?} v={v:?} abandons {z:b} but not \
                                         superset {ymask:b}"
                                    ));
                                }
                                if z == 0 {
                                    break;
                                }
                                z = (z - 1) & ymask;
                            }
                        }
                        // fac9: extending the stem inside Y preserves
                        // non-abandonment (stems from the empty stem).
                        if *rho == BinaryString::empty() {
                            for ymask in 0..(1u64 << ground.len()) {
                                let y = SmallSet::from_mask(ymask);
                                if ab[ymask as usize] {
                                    continue;
                                }
                                for sigma in &strings3 {
                                    if sigma.support().is_subset(&y) && !sigma.is_empty() {
                                        cases += 1;
                                        if f.abandons_on_set(sigma, v, y, horizon) {
                                            failures.push(format!(
                                                "extension stability: f={f:?} v={v:?} y={y} \
                                                 sigma={sigma}"
                                            ));
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    // Exhaustive combinatorial core of the blocking facts: an e-disperse
    // family cannot be met by a small family of long strings.
    {
        let long3: Vec<BinaryString> = strings3.iter().filter(|s| s.len() == 3).copied().collect();
        let mut dsets: Vec<Vec<BinaryString>> = Vec::new();
        for (i, a) in long3.iter().enumerate() {
            dsets.push(vec![*a]);
            for b2 in long3.iter().skip(i + 1) {
                dsets.push(vec![*a, *b2]);
            }
        }
        let nonempty: Vec<&ClopenSet> = vpool.iter().filter(|v| !v.is_empty()).collect();
        let mut fams: Vec<Vec<ClopenSet>> = Vec::new();
        for m in 1..=4usize {
            let mut idx = vec![0usize; m];
            loop {
                fams.push(idx.iter().map(|&i| nonempty[i].clone()).collect());
                let mut j = 0;
                loop {
                    if j == m {
                        break;
                    }
                    idx[j] += 1;
                    if idx[j] < nonempty.len() {
                        break;
                    }
                    idx[j] = 0;
                    j += 1;
                }
                if j == m {
                    break;
                }
            }
        }
        for fam in &fams {
            for e in 1..=2u32 {
                if !is_disperse(fam, e) {
                    continue;
                }
                for d in &dsets {
                    cases += 1;
                    if d.len() as u32 <= e
                        && fam
                            .iter()
                            .all(|v| crate::clopen::strings_meet_clopen(d, v))
                    {
                        failures.push(format!(
                            "blocking: {e}-disperse family {fam:?} met by small long family {d:?}"
                        ));
                    }
                }
            }
        }
    }

    // Seeded full-statement layer for the blocking facts, through the
    // abandonment machinery.
    {
        let mut rng = ChaCha8Rng::seed_from_u64(b.seed ^ 0xabad);
        let nonempty: Vec<&ClopenSet> = vpool.iter().filter(|v| !v.is_empty()).collect();
        let long3: Vec<BinaryString> = strings3.iter().filter(|s| s.len() == 3).copied().collect();
        for _ in 0..b.aband_samples {
            let e = rng.gen_range(1..=2u32);
            // Random table with outputs of length 3 (beyond every height).
            let entry_count = rng.gen_range(1..=2usize);
            let mut entries = Vec::new();
            for _ in 0..entry_count {
                let prefix = strings3[rng.gen_range(0..strings3.len())];
                let input = rng.gen_range(0..=horizon);
                let output = if rng.gen_ratio(1, 8) {
                    Output::Oversized
                } else {
                    let sz = rng.gen_range(1..=2usize);
                    Output::Set((0..sz).map(|_| long3[rng.gen_range(0..8)]).collect())
                };
                entries.push(Entry { prefix, input, output });
            }
            let f = match ToyFunctional::new(e, entries) {
                Ok(f) => f,
                Err(_) => continue,
            };
            // Random e-disperse family.
            let fam: Vec<ClopenSet> = loop {
                let m = rng.gen_range(2..=4usize);
                let fam: Vec<ClopenSet> = (0..m)
                    .map(|_| nonempty[rng.gen_range(0..nonempty.len())].clone())
                    .collect();
                if is_disperse(&fam, e) {
                    break fam;
                }
            };
            let rho = BinaryString::empty();
            let x = ground;
            // fac2 hypothesis: no member abandoned on X.
            let blocked = fam.iter().all(|v| !f.abandons_on_set(&rho, v, x, horizon));
            if blocked {
                for ymask in 0..(1u64 << ground.len()) {
                    let y = SmallSet::from_mask(ymask);
                    let oracle = BinaryString::characteristic(y, horizon);
                    for ninp in 0..=horizon {
                        cases += 1;
                        if let Some(Output::Set(d)) = f.evaluate(&oracle, ninp) {
                            let valid = d.len() as u32 <= e
                                && d.iter().all(|s| s.len() == 3)
                                && fam
                                    .iter()
                                    .all(|v| crate::clopen::strings_meet_clopen(d, v));
                            if valid {
                                failures.push(format!(
                                    "fac2: blocked functional {f:?} still produces a valid \
                                     fragment {d:?} on Y={y}"
                                ));
                            }
                        }
                    }
                }
            }
            // fac4 hypothesis: per-member non-abandonment on sampled sets.
            let xs: Vec<SmallSet> = fam
                .iter()
                .map(|_| SmallSet::from_mask(rng.gen_range(0..(1u64 << ground.len()))))
                .collect();
            let ok = fam
                .iter()
                .zip(&xs)
                .all(|(v, xi)| !f.abandons_on_set(&rho, v, *xi, horizon));
            if ok {
                let inter = xs.iter().fold(ground, |acc, xi| acc.intersection(*xi));
                for ymask in 0..(1u64 << 5) {
                    let y = SmallSet::from_mask(ymask);
                    if !y.is_subset(&inter) {
                        continue;
                    }
                    let oracle = BinaryString::characteristic(y, horizon);
                    for ninp in 0..=horizon {
                        cases += 1;
                        if let Some(Output::Set(d)) = f.evaluate(&oracle, ninp) {
                            let valid = d.len() as u32 <= e
                                && d.iter().all(|s| s.len() == 3)
                                && fam
                                    .iter()
                                    .all(|v| crate::clopen::strings_meet_clopen(d, v));
                            if valid {
                                failures.push(format!(
                                    "fac4: functional {f:?} produces a valid fragment on a \
                                     subset of the intersection"
                                ));
                            }
                        }
                    }
                }
            }
        }
    }

    Report {
        suite: "abandonment-facts".into(),
        cases,
        failures,
        millis: start.elapsed().as_millis(),
    }
}

impl Bounds {
    fn aband_ground(&self) -> u32 {
        5
    }
}

pub fn all_suites(b: &Bounds) -> Result<Vec<Report>> {
    b.check_cost()?;
    Ok(vec![fact1_suite(b), fact5_suite(b), abandonment_suite(b)])
}
