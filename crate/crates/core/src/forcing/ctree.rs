//! The construction tree: one node per part run and step, annotated with
//! progress and fading flags. The infinitary verification argument's path
//! is replaced by its finite shadow: the deepest branch whose nodes all
//! stay non-fading on one fixed side, together with the accumulated stem.

use serde::{Deserialize, Serialize};

use crate::bits::BinaryString;
use crate::forcing::invariants::FadingInfo;
use crate::forcing::{ForcingState, Side};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CtNode {
    pub first: u64,
    pub count: u64,
    pub parent_part: u64,
    pub e_l: u32,
    pub e_r: u32,
    pub fading_l: bool,
    pub fading_r: bool,
    pub stem_l: BinaryString,
    pub stem_r: BinaryString,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CtLevel {
    pub step: u32,
    pub tag: u32,
    pub nodes: Vec<CtNode>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ConstructionTree {
    pub levels: Vec<CtLevel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchReport {
    pub side: Side,
    /// One representative part index per level (0-based).
    pub parts: Vec<u64>,
    pub g_prefix: BinaryString,
}

impl ConstructionTree {
    pub fn push_level(&mut self, step: u32, tag: u32, state: &ForcingState, fading: &FadingInfo) {
        let mut nodes = Vec::new();
        for (first, count, l, r) in fading.entries() {
            // Fading entries are at most run-granular; fetch the run state
            // through any member index.
            let ps = state.parts.get(*first);
            let (el, er) = ps.counter(tag);
            nodes.push(CtNode {
                first: *first,
                count: *count,
                parent_part: ps.parent,
                e_l: el,
                e_r: er,
                fading_l: *l,
                fading_r: *r,
                stem_l: ps.stem_l,
                stem_r: ps.stem_r,
            });
        }
        self.levels.push(CtLevel { step, tag, nodes });
    }

    /// Deepest branch whose nodes are all non-fading on one fixed side.
    /// Ties prefer the left side, then earlier nodes.
    pub fn deepest_nonfading_branch(&self) -> Option<BranchReport> {
        let mut best: Option<BranchReport> = None;
        for side in [Side::Left, Side::Right] {
            for (i, _node) in self.levels.first()?.nodes.iter().enumerate() {
                if let Some(report) = self.branch_from(0, i, side) {
                    let better = match &best {
                        None => true,
                        Some(b) => report.parts.len() > b.parts.len(),
                    };
                    if better {
                        best = Some(report);
                    }
                }
            }
        }
        best
    }

    fn branch_from(&self, level: usize, node_idx: usize, side: Side) -> Option<BranchReport> {
        let node = &self.levels[level].nodes[node_idx];
        let faded = match side {
            Side::Left => node.fading_l,
            Side::Right => node.fading_r,
        };
        if faded {
            return None;
        }
        let mut best: Option<BranchReport> = None;
        if level + 1 < self.levels.len() {
            for (j, child) in self.levels[level + 1].nodes.iter().enumerate() {
                if child.parent_part >= node.first && child.parent_part < node.first + node.count
                {
                    if let Some(mut r) = self.branch_from(level + 1, j, side) {
                        // The child's recorded parent pins this level's
                        // representative part.
                        r.parts[level] = child.parent_part;
                        let better = match &best {
                            None => true,
                            Some(b) => r.parts.len() > b.parts.len(),
                        };
                        if better {
                            best = Some(r);
                        }
                    }
                }
            }
        }
        Some(best.unwrap_or_else(|| {
            let mut parts = vec![0u64; level + 1];
            parts[level] = node.first;
            BranchReport {
                side,
                parts,
                g_prefix: match side {
                    Side::Left => node.stem_l,
                    Side::Right => node.stem_r,
                },
            }
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::invariants::compute_fading;
    use crate::pattern::BitPattern;

    #[test]
    fn single_level_branch() {
        let a = BitPattern::evens();
        let state = ForcingState::initial(6);
        let fading = compute_fading(&state, &a);
        let mut ct = ConstructionTree::default();
        ct.push_level(0, 1, &state, &fading);
        let b = ct.deepest_nonfading_branch().unwrap();
        assert_eq!(b.side, Side::Left);
        assert_eq!(b.parts, vec![0]);
        assert!(b.g_prefix.is_empty());
    }
}
