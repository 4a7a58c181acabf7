//! The P-Operation, R-i-Operation, and R-ii-Operation.
//!
//! The R-ii candidate search exploits two small theorems about disperse
//! families (verified against the exhaustive predicate in tests):
//!
//!  * no family of n <= u nonempty clopen sets is u-disperse (give every
//!    index its own part), so a u-disperse sequence needs at least u+1
//!    members;
//!  * a family of exactly u+1 nonempty sets is u-disperse iff it is
//!    pairwise disjoint (two compatible members share a part, the rest get
//!    singletons; conversely pigeonhole).
//!
//! The search therefore enumerates pairwise disjoint families of k'+1
//! nonempty sets in (height, generator count, lexicographic) order. A
//! disjoint family larger than k'+1 with nonempty splitting classes would
//! contain a qualifying (k'+1)-subfamily, so exhausting the minimal count
//! exhausts disjoint candidates entirely; non-disjoint larger families are
//! out of search scope and exhaustion is reported as stuck.

use crate::bits::{BinaryString, SmallSet};
use crate::clopen::ClopenSet;
use crate::error::{Error, Result};
use crate::forcing::cross::{cross_trees, Family, FamilyKind, SupporterLayout};
use crate::forcing::{
    mask_part_below, part_content_sets, ForcingState, PartState, PartTable, Side,
};
use crate::functionals::{build_t_v_depth, FunctionalFamily, SideSpec, ToyFunctional};
use crate::pattern::BitPattern;
use crate::trees::FinTree;

/// Scenario-level constants consulted by every operation.
pub struct EngineCtx<'a> {
    pub depth: u32,
    pub a: &'a BitPattern,
    pub q: &'a FinTree,
    pub functionals: &'a FunctionalFamily,
    pub budget_ri: u64,
    pub height_bound: u32,
    pub search_budget: u64,
}

impl EngineCtx<'_> {
    /// Ground elements on the requested side of the pattern, below depth.
    pub fn side_mask(&self, side: Side) -> SmallSet {
        let mut m = SmallSet::EMPTY;
        for o in 0..self.depth.min(64) {
            let in_a = self.a.contains(o);
            if (side == Side::Left && in_a) || (side == Side::Right && !in_a) {
                m = m.insert(o);
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum POutcome {
    Succeeded { stem: BinaryString, element: u32 },
    Failed,
}

/// Stem extension for the infinity requirement: pick the least pattern-side
/// element available in the part's content on some path, extend the stem to
/// claim it, restrict the tree to the witnessing paths, and normalize the
/// part below the new stem horizon.
pub fn p_operation(ctx: &EngineCtx, state: &mut ForcingState, c: u64, side: Side) -> POutcome {
    let k = state.k();
    let ps = state.parts.get(c).clone();
    let side_mask = ctx.side_mask(side);
    let contents = part_content_sets(&state.tree, k, c);
    let candidate = contents
        .iter()
        .filter_map(|s| s.intersection(side_mask).min_elem())
        .min();
    let a = match candidate {
        Some(a) => a,
        None => return POutcome::Failed,
    };
    let stem = ps.stem(side);
    debug_assert!(a >= stem.len(), "masking keeps content beyond the stem");
    let mut new_stem = *stem;
    while new_stem.len() < a {
        new_stem = new_stem.push(false);
    }
    new_stem = new_stem.push(true);

    let restricted = FinTree::from_paths(
        state.tree.depth(),
        state
            .tree
            .paths()
            .into_iter()
            .filter(|p| crate::forcing::part_content(p, k, c).contains(a)),
    );
    state.parts.update(c, |s| *s.stem_mut(side) = new_stem);
    let horizon = state.parts.get(c).stem_horizon();
    state.tree = mask_part_below(&restricted, k, c, horizon);
    state.deficit_horizon = state.deficit_horizon.max(horizon);
    POutcome::Succeeded { stem: new_stem, element: a }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BadReason {
    Oversize,
    OffTarget,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RiFire {
    pub part: u64,
    pub side: Side,
    pub stem_before: BinaryString,
    pub stem_after: BinaryString,
    pub input: u32,
    pub reason: BadReason,
}

/// One scan of the R-i-Operation: the least part, left side before right,
/// stems in shortlex order. Every firing stem must pass through a halting
/// table entry, so candidates are derived per entry: the least extension of
/// the stem carrying the entry's prefix, with fresh 1-bits inside the
/// pattern side and inside the part's content on a common path.
pub fn r_i_operation(ctx: &EngineCtx, state: &mut ForcingState, tag: u32) -> Option<RiFire> {
    let k = state.k();
    let depth = ctx.depth;
    let mut fire: Option<RiFire> = None;

    'runs: for (first, count, ps) in state.parts.iter_runs() {
        let explicit_end = (first + count).min(depth as u64);
        let mut candidates: Vec<u64> = (first..explicit_end).collect();
        if first + count > depth as u64 {
            candidates.push(first.max(depth as u64));
        }
        for c in candidates {
            let contents = if c < depth as u64 {
                part_content_sets(&state.tree, k, c)
            } else {
                vec![SmallSet::EMPTY]
            };
            if let Some((side, rho, input, reason)) = part_fire(ctx, ps, tag, &contents) {
                fire = Some(RiFire {
                    part: c,
                    side,
                    stem_before: *ps.stem(side),
                    stem_after: rho,
                    input,
                    reason,
                });
                break 'runs;
            }
        }
    }

    let f = fire?;
    // Apply: extend the stem, bump the counter, restrict to witnessing
    // paths, normalize below the new horizon.
    let new_ones = f.stem_after.support().difference(f.stem_before.support());
    state.parts.update(f.part, |s| {
        *s.stem_mut(f.side) = f.stem_after;
        let (el, er) = s.counter(tag);
        let bumped = match f.side {
            Side::Left => (el + 1, er),
            Side::Right => (el, er + 1),
        };
        s.set_counter(tag, bumped);
    });
    if !new_ones.is_empty() {
        state.tree = FinTree::from_paths(
            state.tree.depth(),
            state
                .tree
                .paths()
                .into_iter()
                .filter(|p| new_ones.is_subset(&crate::forcing::part_content(p, k, f.part))),
        );
    }
    let horizon = state.parts.get(f.part).stem_horizon();
    state.tree = mask_part_below(&state.tree, k, f.part, horizon);
    state.deficit_horizon = state.deficit_horizon.max(horizon);
    Some(f)
}

fn part_fire(
    ctx: &EngineCtx,
    ps: &PartState,
    tag: u32,
    contents: &[SmallSet],
) -> Option<(Side, BinaryString, u32, BadReason)> {
    for side in [Side::Left, Side::Right] {
        let (el, er) = ps.counter(tag);
        let e = match side {
            Side::Left => el,
            Side::Right => er,
        };
        let f = ctx.functionals.get(tag, e);
        if f.is_trivial() {
            continue;
        }
        let stem = ps.stem(side);
        let side_mask = ctx.side_mask(side);
        let mut best: Option<(BinaryString, u32, BadReason)> = None;
        for entry in f.entries() {
            if entry.input > ctx.depth {
                continue;
            }
            let reason = if entry.output.exceeds(e) {
                BadReason::Oversize
            } else if !entry.output.meets_tree(ctx.q) {
                BadReason::OffTarget
            } else {
                continue;
            };
            let rho = match least_firing_stem(&entry.prefix, stem, ctx.depth) {
                Some(r) => r,
                None => continue,
            };
            let new_ones = rho.support().difference(stem.support());
            if !new_ones.is_subset(&side_mask) {
                continue;
            }
            if !contents.iter().any(|content| new_ones.is_subset(content)) {
                continue;
            }
            match &best {
                Some((b, _, _)) if *b <= rho => {}
                _ => best = Some((rho, entry.input, reason)),
            }
        }
        if let Some((rho, input, reason)) = best {
            return Some((side, rho, input, reason));
        }
    }
    None
}

/// Shortlex-least strict extension of `stem` to which the entry prefix
/// applies: agree with the stem on the overlap, carry the prefix's bits,
/// pad with zeros.
fn least_firing_stem(
    prefix: &BinaryString,
    stem: &BinaryString,
    depth: u32,
) -> Option<BinaryString> {
    let overlap = prefix.len().min(stem.len());
    for i in 0..overlap {
        if prefix.bit(i) != stem.bit(i) {
            return None;
        }
    }
    let len = prefix.len().max(stem.len() + 1);
    if len > depth {
        return None;
    }
    let mut rho = *stem;
    for i in stem.len()..len {
        rho = rho.push(i < prefix.len() && prefix.bit(i));
    }
    Some(rho)
}

#[derive(Debug, Clone)]
pub struct RIiRecord {
    pub k_prime: u64,
    pub n: u64,
    pub vs: Vec<ClopenSet>,
    pub family_height: u32,
    pub new_k: u64,
    pub candidates_examined: u64,
}

#[derive(Debug, Clone)]
pub enum RIIOutcome {
    CaseII(RIiRecord),
    /// No qualifying sequence within the height bound and search scope.
    Stuck {
        reason: String,
        candidates_examined: u64,
    },
}

/// The splitting operation. k' is the progress total for the devoted tag;
/// the search looks for a k'-disperse sequence of nonempty clopen sets with
/// every abandonment-constrained splitting class nonempty, then crosses the
/// classes through the inclusion-minimal disperse-subset families.
pub fn r_ii_operation(ctx: &EngineCtx, state: &mut ForcingState, tag: u32) -> Result<RIIOutcome> {
    let k = state.k();
    let mut kp: u64 = 0;
    for (_, count, ps) in state.parts.iter_runs() {
        let (el, er) = ps.counter(tag);
        kp = kp
            .checked_add(count.checked_mul((el + er) as u64).ok_or_else(overflow)?)
            .ok_or_else(overflow)?;
    }
    let n = kp + 1;

    const SIDES_CAP: u64 = 1 << 21;
    const N_CAP: u64 = 1 << 21;
    if 2 * k > SIDES_CAP || n > N_CAP {
        return Ok(RIIOutcome::Stuck {
            reason: format!(
                "scale cap: 2k={} candidates n={n} beyond materializable range",
                2 * k
            ),
            candidates_examined: 0,
        });
    }

    // Per-side oracle views, in flat order (part left, part right, ...).
    let mut arena: std::collections::BTreeMap<u32, ToyFunctional> = Default::default();
    for (_, _, ps) in state.parts.iter_runs() {
        let (el, er) = ps.counter(tag);
        arena.entry(el).or_insert_with(|| ctx.functionals.get(tag, el));
        arena.entry(er).or_insert_with(|| ctx.functionals.get(tag, er));
    }
    let mut sides: Vec<SideSpec> = Vec::with_capacity((2 * k) as usize);
    let mut side_sizes: Vec<u32> = Vec::with_capacity((2 * k) as usize);
    for (_, count, ps) in state.parts.iter_runs() {
        let (el, er) = ps.counter(tag);
        for _ in 0..count {
            sides.push(SideSpec { stem: ps.stem_l, functional: &arena[&el] });
            sides.push(SideSpec { stem: ps.stem_r, functional: &arena[&er] });
            side_sizes.push(el + 1);
            side_sizes.push(er + 1);
        }
    }

    let tag_trivial = ctx.functionals.tag_is_trivial(tag);
    let mut search = FamilySearch {
        tree: &state.tree,
        k,
        sides: &sides,
        depth: ctx.depth,
        n,
        budget: ctx.search_budget,
        examined: 0,
        tv_arena: Vec::new(),
        trivial_tv: None,
        tag_trivial,
    };
    let found = search.run(ctx.height_bound)?;
    let examined = search.examined;
    let (vs, tv_idx) = match found {
        Some(f) => f,
        None => {
            return Ok(RIIOutcome::Stuck {
                reason: format!(
                    "no {kp}-disperse sequence of {n} pairwise disjoint clopen sets of height <= {} \
                     with nonempty splitting classes; larger non-disjoint families are out of \
                     search scope",
                    ctx.height_bound
                ),
                candidates_examined: examined,
            });
        }
    };

    // Minimal e-disperse subsets of a pairwise disjoint family are exactly
    // the (e+1)-subsets.
    let mut families = Vec::with_capacity((2 * k) as usize);
    for (q, size) in side_sizes.iter().enumerate() {
        let orig = (q / 2) as u64;
        let side = if q % 2 == 0 { Side::Left } else { Side::Right };
        families.push(Family::new(orig, side, FamilyKind::AllSubsetsOfSize(*size), n)?);
    }
    let layout = SupporterLayout { n, families };
    let new_k = layout.total_parts()?;
    let tv_refs: Vec<&FinTree> = tv_idx.iter().map(|&i| &search.tv_arena[i]).collect();
    let new_tree = cross_trees(&tv_refs, &layout, 2 * k, ctx.depth)?;
    if new_tree.is_empty() {
        return Err(Error::Structure(
            "cross of nonempty splitting classes is empty".into(),
        ));
    }

    // New part table: one run per family; children inherit stems and
    // counters, with the devoted tag stepping forward on the child's side.
    let mut parts = PartTable::new();
    for fam in &layout.families {
        let parent = state.parts.get(fam.orig_part).clone();
        let (el, er) = parent.counter(tag);
        let mut child = PartState {
            parent: fam.orig_part,
            side: fam.side,
            stem_l: parent.stem_l,
            stem_r: parent.stem_r,
            counters: parent.counters.clone(),
        };
        let bumped = match fam.side {
            Side::Left => (el + 1, er),
            Side::Right => (el, er + 1),
        };
        child.set_counter(tag, bumped);
        parts.push_run(fam.count, child);
    }

    let family_height = vs.iter().map(|v| v.height()).max().unwrap_or(0);
    state.parts = parts;
    state.tree = new_tree;

    Ok(RIIOutcome::CaseII(RIiRecord {
        k_prime: kp,
        n,
        vs,
        family_height,
        new_k,
        candidates_examined: examined,
    }))
}

fn overflow() -> Error {
    Error::Budget("progress total overflows u64".into())
}

/// Backtracking search for an ascending pairwise-disjoint family of
/// nonempty clopen sets with nonempty splitting classes, in
/// (family height, per-slot (height, generator count, lex)) order.
struct FamilySearch<'a> {
    tree: &'a FinTree,
    k: u64,
    sides: &'a [SideSpec<'a>],
    depth: u32,
    n: u64,
    budget: u64,
    examined: u64,
    tv_arena: Vec<FinTree>,
    trivial_tv: Option<usize>,
    tag_trivial: bool,
}

impl FamilySearch<'_> {
    fn run(&mut self, height_bound: u32) -> Result<Option<(Vec<ClopenSet>, Vec<usize>)>> {
        if height_bound > 62 {
            return Err(Error::Config("height bound beyond 62 unsupported".into()));
        }
        for h in 0..=height_bound {
            if (1u64 << h) < self.n {
                continue; // cannot fit n disjoint nonempty sets
            }
            if let Some(found) = self.search_at_height(h)? {
                return Ok(Some(found));
            }
        }
        Ok(None)
    }

    /// Backtracking over slots with an explicit frame stack (slot counts
    /// reach the tens of thousands).
    fn search_at_height(&mut self, h: u32) -> Result<Option<(Vec<ClopenSet>, Vec<usize>)>> {
        let mut coverage = Intervals::new(1u64 << h);
        let mut chosen: Vec<(ClopenSet, usize)> = Vec::new();
        let mut at_height = 0u64; // members attaining the exact family height
        let mut frames: Vec<CandidateIter> = vec![CandidateIter::new(h, &coverage, self.n - 1, None)];
        loop {
            let iter = match frames.last_mut() {
                Some(f) => f,
                None => return Ok(None),
            };
            match iter.next_candidate(&coverage) {
                Some(v) => {
                    if self.examined >= self.budget {
                        return Err(Error::Budget(format!(
                            "splitting-family search exceeded {} candidates",
                            self.budget
                        )));
                    }
                    self.examined += 1;
                    let tv = match self.splitting_class(&v)? {
                        Some(i) => i,
                        None => continue,
                    };
                    coverage.insert_set(&v, h);
                    if v.height() == h {
                        at_height += 1;
                    }
                    chosen.push((v.clone(), tv));
                    if chosen.len() as u64 == self.n {
                        if at_height > 0 {
                            let (vs, idx): (Vec<ClopenSet>, Vec<usize>) =
                                chosen.into_iter().unzip();
                            return Ok(Some((vs, idx)));
                        }
                        // Family never attains this height; undo and keep
                        // scanning the current slot.
                        let (v, _) = chosen.pop().expect("just pushed");
                        coverage.remove_set(&v, h);
                        continue;
                    }
                    let remaining = self.n - chosen.len() as u64 - 1;
                    frames.push(CandidateIter::new(h, &coverage, remaining, Some(v)));
                }
                None => {
                    frames.pop();
                    if let Some((v, _)) = chosen.pop() {
                        coverage.remove_set(&v, h);
                        if v.height() == h {
                            at_height -= 1;
                        }
                    }
                }
            }
        }
    }

    /// Index into the arena of the splitting class for `v`, or None when it
    /// is empty. With an everywhere-trivial tag the class is independent of
    /// `v` and computed once.
    fn splitting_class(&mut self, v: &ClopenSet) -> Result<Option<usize>> {
        if self.tag_trivial {
            if let Some(i) = self.trivial_tv {
                return Ok(Some(i));
            }
        }
        let tv = build_t_v_depth(
            self.tree,
            u32::try_from(self.k).map_err(|_| overflow())?,
            self.sides,
            v,
            self.depth,
            self.depth,
        )?;
        if tv.is_empty() {
            return Ok(None);
        }
        self.tv_arena.push(tv);
        let idx = self.tv_arena.len() - 1;
        if self.tag_trivial {
            self.trivial_tv = Some(idx);
        }
        Ok(Some(idx))
    }
}

/// Sorted disjoint covered intervals over the cell space [0, total).
#[derive(Clone)]
struct Intervals {
    total: u64,
    v: Vec<(u64, u64)>,
}

impl Intervals {
    fn new(total: u64) -> Self {
        Intervals { total, v: Vec::new() }
    }

    fn covered(&self) -> u64 {
        self.v.iter().map(|(s, e)| e - s).sum()
    }

    fn free(&self) -> u64 {
        self.total - self.covered()
    }

    fn insert(&mut self, start: u64, end: u64) {
        let pos = self.v.partition_point(|(s, _)| *s < start);
        self.v.insert(pos, (start, end));
    }

    fn remove(&mut self, start: u64, end: u64) {
        if let Some(pos) = self.v.iter().position(|iv| *iv == (start, end)) {
            self.v.remove(pos);
        }
    }

    fn insert_set(&mut self, v: &ClopenSet, h: u32) {
        for g in v.generators() {
            let (s, e) = cell_range(g, h);
            self.insert(s, e);
        }
    }

    fn remove_set(&mut self, v: &ClopenSet, h: u32) {
        for g in v.generators() {
            let (s, e) = cell_range(g, h);
            self.remove(s, e);
        }
    }

    fn is_free(&self, start: u64, end: u64) -> bool {
        let pos = self.v.partition_point(|(_, e)| *e <= start);
        match self.v.get(pos) {
            Some((s, _)) => *s >= end,
            None => true,
        }
    }

    /// First free aligned block of size `bs` starting at or after `from`
    /// (itself aligned).
    fn first_free_block(&self, bs: u64, mut from: u64) -> Option<u64> {
        loop {
            if from + bs > self.total {
                return None;
            }
            let pos = self.v.partition_point(|(_, e)| *e <= from);
            match self.v.get(pos) {
                Some((s, e)) if *s < from + bs => {
                    from = e.div_ceil(bs) * bs;
                }
                _ => return Some(from),
            }
        }
    }
}

/// Cell interval of a generator at resolution h.
fn cell_range(g: &BinaryString, h: u32) -> (u64, u64) {
    let bs = 1u64 << (h - g.len());
    let start = g.reversed_value() * bs;
    (start, start + bs)
}

/// Candidate clopen sets within the free region in canonical order:
/// generator heights ascending, generator count ascending, generator lists
/// lexicographic; capacity-pruned so later slots keep at least one cell
/// each. Single-generator candidates stream lazily through the interval
/// structure; multi-generator batches are materialized per (height, count)
/// class, which only happens once the singles of a height are exhausted.
struct CandidateIter {
    h: u32,
    max_cells: u64,
    queue: Vec<ClopenSet>,
    cur_height: u32,
    cur_gens: u32,
    single_cursor: u64,
    min_exclusive: Option<ClopenSet>,
    exhausted: bool,
}

impl CandidateIter {
    /// The iterator reads the coverage through `next_candidate`; frames
    /// resume against the same coverage state they were created with, the
    /// backtracking loop restoring it on the way out.
    fn new(
        h: u32,
        region: &Intervals,
        remaining_slots: u64,
        min_exclusive: Option<ClopenSet>,
    ) -> Self {
        let free = region.free();
        let max_cells = free.saturating_sub(remaining_slots);
        let mut it = CandidateIter {
            h,
            max_cells,
            queue: Vec::new(),
            cur_height: 0,
            cur_gens: 1,
            single_cursor: 0,
            min_exclusive,
            exhausted: false,
        };
        // Fast-forward past the previous slot's choice: everything at lower
        // heights precedes it in the canonical order.
        if let Some(min) = &it.min_exclusive {
            it.cur_height = min.height();
            if min.generators().len() == 1 {
                it.single_cursor = min.generators()[0].reversed_value() + 1;
            } else {
                it.cur_gens = min.generators().len() as u32;
            }
        }
        it
    }

    fn next_candidate(&mut self, region: &Intervals) -> Option<ClopenSet> {
        loop {
            if let Some(v) = self.queue.pop() {
                if let Some(min) = &self.min_exclusive {
                    if v.canonical_cmp(min) != std::cmp::Ordering::Greater {
                        continue;
                    }
                }
                return Some(v);
            }
            if self.exhausted || self.max_cells == 0 {
                return None;
            }
            let ch = self.cur_height;
            let bs = 1u64 << (self.h - ch);
            // A height-ch set covers at least one length-ch cylinder.
            if bs > self.max_cells {
                if !self.advance_height() {
                    return None;
                }
                continue;
            }
            if self.cur_gens == 1 {
                // Lazy singles stream at this height.
                let from = self.single_cursor.saturating_mul(bs);
                match region.first_free_block(bs, from) {
                    Some(start) => {
                        let v = start / bs;
                        self.single_cursor = v + 1;
                        if v >= (1u64 << ch) {
                            self.cur_gens = 2;
                            continue;
                        }
                        let g = BinaryString::from_reversed_value(v, ch);
                        let cand = ClopenSet::cylinder(g);
                        if let Some(min) = &self.min_exclusive {
                            if cand.canonical_cmp(min) != std::cmp::Ordering::Greater {
                                continue;
                            }
                        }
                        return Some(cand);
                    }
                    None => {
                        self.cur_gens = 2;
                        continue;
                    }
                }
            }
            // Multi-generator batch for (ch, cur_gens).
            let cg = self.cur_gens;
            let max_gens_at_h = 1u64 << ch.min(62);
            if cg as u64 > max_gens_at_h || cg as u64 > self.max_cells {
                if !self.advance_height() {
                    return None;
                }
                continue;
            }
            let mut batch = Vec::new();
            enumerate_antichains(self.h, ch, cg, self.max_cells, region, &mut batch);
            batch.sort_by(|a, b| b.canonical_cmp(a)); // pop smallest first
            self.queue = batch;
            self.cur_gens += 1;
        }
    }

    fn advance_height(&mut self) -> bool {
        if self.cur_height >= self.h {
            self.exhausted = true;
            return false;
        }
        self.cur_height += 1;
        self.cur_gens = 1;
        self.single_cursor = 0;
        true
    }
}

/// All canonical antichains with exactly `gens` generators, maximum
/// generator length exactly `height`, generators inside the free region,
/// total cell coverage at most `max_cells`.
fn enumerate_antichains(
    resolution: u32,
    height: u32,
    gens: u32,
    max_cells: u64,
    region: &Intervals,
    out: &mut Vec<ClopenSet>,
) {
    let mut chosen: Vec<BinaryString> = Vec::new();
    rec_antichains(
        resolution, height, gens, max_cells, region, &mut chosen, None, false, out,
    );
}

#[allow(clippy::too_many_arguments)]
fn rec_antichains(
    resolution: u32,
    height: u32,
    gens_left: u32,
    cells_left: u64,
    region: &Intervals,
    chosen: &mut Vec<BinaryString>,
    after: Option<BinaryString>,
    have_height: bool,
    out: &mut Vec<ClopenSet>,
) {
    if gens_left == 0 {
        if !have_height {
            return;
        }
        if let Ok(v) = ClopenSet::new(chosen.clone()) {
            // Canonical form must keep the generator list (no sibling merge).
            if v.generators() == chosen.as_slice() {
                out.push(v);
            }
        }
        return;
    }
    // Candidate generators in shortlex order after `after`, each a free
    // aligned block disjoint from earlier choices.
    for len in 0..=height {
        let bs = 1u64 << (resolution - len);
        if bs > cells_left {
            continue;
        }
        let start_v = match &after {
            Some(a) if a.len() == len => a.reversed_value() + 1,
            Some(a) if a.len() > len => continue, // shortlex: shorter came first
            _ => 0,
        };
        let mut v = start_v;
        while v < (1u64 << len) {
            let start = v * bs;
            match region_free_with(region, chosen, start, start + bs, resolution) {
                Ok(()) => {
                    let g = BinaryString::from_reversed_value(v, len);
                    let need_h = have_height || len == height;
                    if gens_left == 1 && !need_h {
                        v += 1;
                        continue;
                    }
                    chosen.push(g);
                    rec_antichains(
                        resolution,
                        height,
                        gens_left - 1,
                        cells_left - bs,
                        region,
                        chosen,
                        Some(g),
                        need_h,
                        out,
                    );
                    chosen.pop();
                    v += 1;
                }
                Err(skip_to) => {
                    let next = skip_to.div_ceil(bs);
                    v = next.max(v + 1);
                }
            }
        }
    }
}

/// Is [start, end) free of both the region coverage and the already chosen
/// generators? On failure returns the cell index to skip past.
fn region_free_with(
    region: &Intervals,
    chosen: &[BinaryString],
    start: u64,
    end: u64,
    resolution: u32,
) -> std::result::Result<(), u64> {
    if !region.is_free(start, end) {
        let pos = region.v.partition_point(|(_, e)| *e <= start);
        return Err(region.v.get(pos).map(|(_, e)| *e).unwrap_or(end));
    }
    for g in chosen {
        let (s, e) = cell_range(g, resolution);
        if s < end && start < e {
            return Err(e);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{Entry, Output};
    use crate::partitions::is_disperse;

    fn bs(s: &str) -> BinaryString {
        s.parse().unwrap()
    }

    fn trivial_ctx<'a>(
        a: &'a BitPattern,
        q: &'a FinTree,
        fam: &'a FunctionalFamily,
    ) -> EngineCtx<'a> {
        EngineCtx {
            depth: 12,
            a,
            q,
            functionals: fam,
            budget_ri: 64,
            height_bound: 12,
            search_budget: 1 << 20,
        }
    }

    #[test]
    fn minimal_count_theorems_match_exhaustive_disperse() {
        // n <= u nonempty sets are never u-disperse; at n = u+1 disperse iff
        // pairwise disjoint. Checked exhaustively over distinct height<=2
        // sets for u = 1, 2.
        let pool = crate::clopen::enumerate_clopen_sets(2);
        let nonempty: Vec<&ClopenSet> = pool.iter().filter(|v| !v.is_empty()).collect();
        for u in 1..=2u32 {
            if u == 1 {
                for a in &nonempty {
                    assert!(!is_disperse(std::slice::from_ref(*a), u));
                }
            }
            let n = (u + 1) as usize;
            let mut idx = vec![0usize; n];
            loop {
                let fam: Vec<ClopenSet> = idx.iter().map(|&i| nonempty[i].clone()).collect();
                let disjoint =
                    (0..n).all(|i| (i + 1..n).all(|j| !fam[i].meets(&fam[j])));
                assert_eq!(is_disperse(&fam, u), disjoint, "family {fam:?} u={u}");
                let mut i = 0;
                loop {
                    if i == n {
                        break;
                    }
                    idx[i] += 1;
                    if idx[i] < nonempty.len() {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
        }
    }

    #[test]
    fn p_operation_cases() {
        let a = BitPattern::evens();
        let q = FinTree::full(2);
        let fam = FunctionalFamily::new();
        let ctx = trivial_ctx(&a, &q, &fam);
        // k=1 over the all-ones path: content {0..11}; least even element 0.
        let mut state = ForcingState::initial(12);
        match p_operation(&ctx, &mut state, 0, Side::Left) {
            POutcome::Succeeded { stem, element } => {
                assert_eq!(element, 0);
                assert_eq!(stem, bs("1"));
            }
            POutcome::Failed => panic!("expected success"),
        }
        // The consumed element is masked out of the part.
        assert_eq!(state.tree.paths(), vec![bs("011111111111")]);
        assert_eq!(state.deficit_horizon, 1);

        // Every content element odd: left-hand side fails.
        let mut state = ForcingState::initial(4);
        state.tree = FinTree::single_path(bs("0101"));
        let ctx4 = EngineCtx { depth: 4, ..trivial_ctx(&a, &q, &fam) };
        assert_eq!(p_operation(&ctx4, &mut state, 0, Side::Left), POutcome::Failed);
        // But the right-hand side succeeds on element 1.
        match p_operation(&ctx4, &mut state, 0, Side::Right) {
            POutcome::Succeeded { element, .. } => assert_eq!(element, 1),
            POutcome::Failed => panic!("expected success"),
        }
    }

    #[test]
    fn r_i_fires_on_oversize_entry_once() {
        let a = BitPattern::evens();
        let q = FinTree::full(2);
        let mut fam = FunctionalFamily::new();
        // Index-1 functional halts oversized once oracle bit 0 is 1.
        fam.insert(
            1,
            1,
            ToyFunctional::new(
                1,
                vec![Entry { prefix: bs("1"), input: 0, output: Output::Oversized }],
            )
            .unwrap(),
        );
        let ctx = trivial_ctx(&a, &q, &fam);
        let mut state = ForcingState::initial(12);
        let fire = r_i_operation(&ctx, &mut state, 1).expect("case i");
        assert_eq!(fire.part, 0);
        assert_eq!(fire.side, Side::Left);
        assert_eq!(fire.stem_after, bs("1"));
        assert_eq!(fire.reason, BadReason::Oversize);
        assert_eq!(state.parts.get(0).counter(1), (2, 1));
        // Index-2 functional is trivial; the right side cannot reach the
        // prefix inside the odd positions. The loop stops.
        assert!(r_i_operation(&ctx, &mut state, 1).is_none());
    }

    #[test]
    fn r_i_no_case_for_trivial_functionals() {
        let a = BitPattern::evens();
        let q = FinTree::full(2);
        let fam = FunctionalFamily::new();
        let ctx = trivial_ctx(&a, &q, &fam);
        let mut state = ForcingState::initial(12);
        assert!(r_i_operation(&ctx, &mut state, 1).is_none());
    }

    #[test]
    fn r_i_quiet_when_outputs_meet_target_within_bounds() {
        let a = BitPattern::evens();
        let q = FinTree::full(2);
        let mut fam = FunctionalFamily::new();
        fam.insert(
            1,
            1,
            ToyFunctional::new(
                1,
                vec![Entry { prefix: bs(""), input: 0, output: Output::Set(vec![bs("00")]) }],
            )
            .unwrap(),
        );
        let ctx = trivial_ctx(&a, &q, &fam);
        let mut state = ForcingState::initial(12);
        assert!(r_i_operation(&ctx, &mut state, 1).is_none());
    }

    #[test]
    fn r_ii_step_one_yields_six_parts() {
        let a = BitPattern::evens();
        let q = FinTree::full(2);
        let fam = FunctionalFamily::new();
        let ctx = trivial_ctx(&a, &q, &fam);
        let mut state = ForcingState::initial(12);
        match r_ii_operation(&ctx, &mut state, 1).unwrap() {
            RIIOutcome::CaseII(rec) => {
                assert_eq!(rec.k_prime, 2);
                assert_eq!(rec.n, 3);
                assert_eq!(rec.new_k, 6);
                assert_eq!(state.k(), 6);
                // First family in canonical order: {0},{10},{11}.
                assert_eq!(
                    rec.vs,
                    vec![
                        ClopenSet::cylinder(bs("0")),
                        ClopenSet::cylinder(bs("10")),
                        ClopenSet::cylinder(bs("11")),
                    ]
                );
                assert!(is_disperse(&rec.vs, 2));
                // The new tree is an ordered 6-partition tree at horizon 2.
                assert!(state.tree.is_partition_tree(6, SmallSet::from_iter([0, 1])));
            }
            RIIOutcome::Stuck { reason, .. } => panic!("stuck: {reason}"),
        }
        // Counters: left children (2,1), right children (1,2).
        assert_eq!(state.parts.get(0).counter(1), (2, 1));
        assert_eq!(state.parts.get(3).counter(1), (1, 2));
        assert_eq!(state.parts.get(0).side, Side::Left);
        assert_eq!(state.parts.get(3).side, Side::Right);
    }

    #[test]
    fn r_ii_stuck_when_height_bound_too_small() {
        let a = BitPattern::evens();
        let q = FinTree::full(2);
        let fam = FunctionalFamily::new();
        let mut ctx = trivial_ctx(&a, &q, &fam);
        ctx.height_bound = 1; // three disjoint sets need height 2
        let mut state = ForcingState::initial(12);
        match r_ii_operation(&ctx, &mut state, 1).unwrap() {
            RIIOutcome::Stuck { .. } => {}
            RIIOutcome::CaseII(_) => panic!("expected stuck"),
        }
    }

    #[test]
    fn r_ii_search_skips_abandoned_sets() {
        // An (ε, 2) entry outputs {00}: splitting classes for clopen sets
        // incompatible with 00 are empty, so the search must find three
        // disjoint sets all meeting the 00 cone.
        let a = BitPattern::evens();
        let q = FinTree::full(2);
        let mut fam = FunctionalFamily::new();
        fam.insert(
            1,
            1,
            ToyFunctional::new(
                1,
                vec![Entry { prefix: bs(""), input: 2, output: Output::Set(vec![bs("00")]) }],
            )
            .unwrap(),
        );
        let ctx = trivial_ctx(&a, &q, &fam);
        let mut state = ForcingState::initial(12);
        match r_ii_operation(&ctx, &mut state, 1).unwrap() {
            RIIOutcome::CaseII(rec) => {
                assert_eq!(rec.n, 3);
                for v in &rec.vs {
                    assert!(v.meets_string(&bs("00")), "{v:?} misses the output");
                }
                assert_eq!(
                    rec.vs,
                    vec![
                        ClopenSet::cylinder(bs("000")),
                        ClopenSet::cylinder(bs("0010")),
                        ClopenSet::cylinder(bs("0011")),
                    ]
                );
            }
            RIIOutcome::Stuck { reason, .. } => panic!("stuck: {reason}"),
        }
    }
}
