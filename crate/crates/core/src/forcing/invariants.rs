//! Per-step re-verification of the condition invariants.
//!
//! Checks run blockwise over the part runs: implicit parts (those beyond
//! the decodable horizon) carry no content, so their checks degenerate to
//! constant-time stem comparisons.

use serde::{Deserialize, Serialize};

use crate::bits::SmallSet;
use crate::forcing::{part_content, part_content_sets, ForcingState, Side};
use crate::pattern::BitPattern;

/// Blockwise fading flags; parts beyond the decodable horizon fade on both
/// sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FadingInfo {
    entries: Vec<(u64, u64, bool, bool)>,
}

impl FadingInfo {
    pub fn get(&self, idx: u64) -> (bool, bool) {
        for (first, count, l, r) in &self.entries {
            if idx >= *first && idx < first + count {
                return (*l, *r);
            }
        }
        panic!("part {idx} out of fading range");
    }

    pub fn entries(&self) -> &[(u64, u64, bool, bool)] {
        &self.entries
    }
}

pub fn compute_fading(state: &ForcingState, a: &BitPattern) -> FadingInfo {
    let k = state.k();
    let limit = state.explicit_part_limit();
    let mut entries = Vec::new();
    for c in 0..limit {
        let contents = part_content_sets(&state.tree, k, c);
        let meets = |side: Side| {
            contents.iter().any(|content| {
                content.iter().any(|o| match side {
                    Side::Left => a.contains(o),
                    Side::Right => !a.contains(o),
                })
            })
        };
        entries.push((c, 1, !meets(Side::Left), !meets(Side::Right)));
    }
    if k > limit {
        entries.push((limit, k - limit, true, true));
    }
    FadingInfo { entries }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepVerification {
    /// The new condition extends the old one through the recorded part map.
    pub chain: bool,
    /// Counters nondecreasing along lineage; the devoted tag stepped
    /// forward on every surviving child.
    pub progress: bool,
    /// Parts that faded on a side have only faded children on that side.
    pub hereditary_fading: bool,
    /// Every path's parts cover the ground between the deficit and the
    /// decodable horizon.
    pub partition_cover: bool,
    /// Left stems inside the pattern, right stems inside its complement.
    pub stems_in_pattern: bool,
    /// Decoded part content avoids the stem horizon.
    pub parts_avoid_stems: bool,
    /// The condition's class is nonempty.
    pub tree_nonempty: bool,
}

impl StepVerification {
    pub fn pass(&self) -> bool {
        self.chain
            && self.progress
            && self.hereditary_fading
            && self.partition_cover
            && self.stems_in_pattern
            && self.parts_avoid_stems
            && self.tree_nonempty
    }
}

pub fn verify_step(
    prev: &ForcingState,
    new: &ForcingState,
    tag: u32,
    a: &BitPattern,
    prev_fading: &FadingInfo,
    new_fading: &FadingInfo,
) -> StepVerification {
    StepVerification {
        chain: check_chain(prev, new),
        progress: check_progress(prev, new, tag),
        hereditary_fading: check_hereditary_fading(prev, new, prev_fading, new_fading),
        partition_cover: check_cover(new),
        stems_in_pattern: check_stem_sides(new, a),
        parts_avoid_stems: check_avoid_stems(new),
        tree_nonempty: !new.tree.is_empty(),
    }
}

fn check_chain(prev: &ForcingState, new: &ForcingState) -> bool {
    let k_new = new.k();
    let k_prev = prev.k();
    let prev_paths = prev.tree.paths();
    let new_paths = new.tree.paths();
    for (first, count, ps) in new.parts.iter_runs() {
        let parent = prev.parts.get(ps.parent);
        if !(parent.stem_l.is_prefix_of(&ps.stem_l) && parent.stem_r.is_prefix_of(&ps.stem_r)) {
            return false;
        }
        // Envelope sets available on the parent part.
        let parent_envelopes: Vec<(SmallSet, SmallSet)> = prev_paths
            .iter()
            .map(|x| {
                let content = part_content(x, k_prev, ps.parent);
                (
                    parent.stem_l.support().union(content),
                    parent.stem_r.support().union(content),
                )
            })
            .collect();
        let check_target = |content: SmallSet| {
            let tl = ps.stem_l.support().union(content);
            let tr = ps.stem_r.support().union(content);
            parent_envelopes
                .iter()
                .any(|(el, er)| tl.is_subset(el) && tr.is_subset(er))
        };
        // Content-free tail: a single representative check.
        let explicit_end = (first + count).min(new.tree.depth() as u64);
        if first + count > explicit_end && !check_target(SmallSet::EMPTY) {
            return false;
        }
        for c in first..explicit_end {
            for x in &new_paths {
                if !check_target(part_content(x, k_new, c)) {
                    return false;
                }
            }
        }
    }
    true
}

fn check_progress(prev: &ForcingState, new: &ForcingState, tag: u32) -> bool {
    for (_, _, ps) in new.parts.iter_runs() {
        let parent = prev.parts.get(ps.parent);
        let tags: std::collections::BTreeSet<u32> = ps
            .counters
            .keys()
            .chain(parent.counters.keys())
            .copied()
            .collect();
        for t in tags {
            let (cl, cr) = ps.counter(t);
            let (pl, pr) = parent.counter(t);
            if cl < pl || cr < pr {
                return false;
            }
        }
        let (cl, cr) = ps.counter(tag);
        let (pl, pr) = parent.counter(tag);
        if !(cl > pl || cr > pr) {
            return false;
        }
    }
    true
}

fn check_hereditary_fading(
    _prev: &ForcingState,
    new: &ForcingState,
    prev_fading: &FadingInfo,
    new_fading: &FadingInfo,
) -> bool {
    for (first, count, ps) in new.parts.iter_runs() {
        let (pl, pr) = prev_fading.get(ps.parent);
        if !pl && !pr {
            continue;
        }
        for c in first..first + count {
            let (nl, nr) = new_fading.get(c);
            if (pl && !nl) || (pr && !nr) {
                return false;
            }
            if c >= new.tree.depth() as u64 {
                break; // the implicit tail shares one fading entry
            }
        }
    }
    true
}

fn check_cover(state: &ForcingState) -> bool {
    let k = state.k();
    let depth = state.tree.depth();
    let horizon = if k > depth as u64 { 0 } else { depth / k as u32 };
    for path in state.tree.paths() {
        for o in state.deficit_horizon..horizon {
            let covered = (0..k.min(depth as u64)).any(|c| {
                let pos = o as u64 * k + c;
                pos < path.len() as u64 && path.bit(pos as u32)
            });
            if !covered {
                return false;
            }
        }
    }
    true
}

fn check_stem_sides(state: &ForcingState, a: &BitPattern) -> bool {
    for (_, _, ps) in state.parts.iter_runs() {
        if ps.stem_l.support().iter().any(|o| !a.contains(o)) {
            return false;
        }
        if ps.stem_r.support().iter().any(|o| a.contains(o)) {
            return false;
        }
    }
    true
}

fn check_avoid_stems(state: &ForcingState) -> bool {
    let k = state.k();
    let limit = state.explicit_part_limit();
    for (first, count, ps) in state.parts.iter_runs() {
        let horizon = ps.stem_horizon();
        if horizon == 0 {
            continue;
        }
        let below = SmallSet::interval(horizon.min(64));
        for c in first..(first + count).min(limit) {
            for content in part_content_sets(&state.tree, k, c) {
                if !content.intersection(below).is_empty() {
                    return false;
                }
            }
        }
    }
    true
}
