//! Pruned finite subtrees of 2^{<=d}.
//!
//! Trees double as ordered-partition trees (paths decode into interleaved
//! parts) and as finite approximations of target classes. All "for all n"
//! conditions are checked up to the tree's depth; verdicts are always
//! relative to that horizon. Bounded non-binary branching is encoded into
//! binary blocks of fixed `width`, recorded in the tree's metadata.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::{BinaryString, SmallSet};
use crate::error::{Error, Result};

/// A prefix-closed set of binary strings of length <= depth in which every
/// node extends to a depth-length node ("pruned").
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinTree {
    depth: u32,
    /// Symbol block width; 1 for plain binary trees.
    width: u32,
    nodes: BTreeSet<BinaryString>,
}

impl FinTree {
    /// Prunes a prefix-closed node set down to the largest subset in which
    /// every node extends to length `depth`. Idempotent.
    pub fn prune(raw: &BTreeSet<BinaryString>, depth: u32) -> Result<FinTree> {
        for n in raw {
            if n.len() > depth {
                return Err(Error::Structure(format!(
                    "node {n} longer than depth {depth}"
                )));
            }
            if !n.is_empty() && !raw.contains(&n.prefix(n.len() - 1)) {
                return Err(Error::Structure(format!(
                    "node set not prefix-closed at {n}"
                )));
            }
        }
        let full: Vec<&BinaryString> = raw.iter().filter(|n| n.len() == depth).collect();
        let mut keep: BTreeSet<BinaryString> = BTreeSet::new();
        for f in full {
            for l in 0..=depth {
                keep.insert(f.prefix(l));
            }
        }
        Ok(FinTree { depth, width: 1, nodes: keep })
    }

    /// Builds the prefix closure of `paths` (each must have length `depth`).
    pub fn from_paths<I: IntoIterator<Item = BinaryString>>(depth: u32, paths: I) -> FinTree {
        let mut nodes = BTreeSet::new();
        for p in paths {
            assert_eq!(p.len(), depth, "path length must equal depth");
            for l in 0..=depth {
                nodes.insert(p.prefix(l));
            }
        }
        FinTree { depth, width: 1, nodes }
    }

    pub fn empty(depth: u32) -> FinTree {
        FinTree { depth, width: 1, nodes: BTreeSet::new() }
    }

    pub fn full(depth: u32) -> FinTree {
        let mut nodes = BTreeSet::new();
        let mut frontier = vec![BinaryString::empty()];
        nodes.insert(BinaryString::empty());
        for _ in 0..depth {
            let mut next = Vec::new();
            for f in frontier {
                for b in [false, true] {
                    let n = f.push(b);
                    nodes.insert(n);
                    next.push(n);
                }
            }
            frontier = next;
        }
        FinTree { depth, width: 1, nodes }
    }

    pub fn single_path(path: BinaryString) -> FinTree {
        FinTree::from_paths(path.len(), [path])
    }

    /// A homogeneous tree given per-level allowed symbol blocks. Each level's
    /// choices are width-`width` blocks; the tree's bit depth is
    /// `width * choices.len()`.
    pub fn level_choice(choices: &[Vec<BinaryString>], width: u32) -> Result<FinTree> {
        let mut frontier = vec![BinaryString::empty()];
        let mut nodes: BTreeSet<BinaryString> = BTreeSet::new();
        nodes.insert(BinaryString::empty());
        for (lvl, opts) in choices.iter().enumerate() {
            if opts.is_empty() {
                return Err(Error::Structure(format!("level {lvl} has no choices")));
            }
            for o in opts {
                if o.len() != width {
                    return Err(Error::Structure(format!(
                        "choice {o} at level {lvl} does not have width {width}"
                    )));
                }
            }
            let mut next = Vec::new();
            for f in &frontier {
                for o in opts {
                    let mut n = *f;
                    for i in 0..width {
                        n = n.push(o.bit(i));
                        nodes.insert(n);
                    }
                    next.push(n);
                }
            }
            frontier = next;
        }
        Ok(FinTree {
            depth: width * choices.len() as u32,
            width,
            nodes,
        })
    }

    pub fn with_width(mut self, width: u32) -> Self {
        self.width = width;
        self
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, node: &BinaryString) -> bool {
        self.nodes.contains(node)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &BinaryString> {
        self.nodes.iter()
    }

    /// Whether the cylinder of `s` meets the depth-truncated class: for
    /// strings within depth this is node membership, beyond depth it is
    /// membership of the truncation.
    pub fn compatible(&self, s: &BinaryString) -> bool {
        if s.len() <= self.depth {
            self.contains(s)
        } else {
            self.contains(&s.prefix(self.depth))
        }
    }

    /// All nodes of length exactly n.
    pub fn level(&self, n: u32) -> Result<BTreeSet<BinaryString>> {
        if n > self.depth {
            return Err(Error::Range(format!(
                "level {n} beyond depth {}",
                self.depth
            )));
        }
        Ok(self.nodes.iter().filter(|s| s.len() == n).copied().collect())
    }

    /// Depth-length nodes in lexicographic order.
    pub fn paths(&self) -> Vec<BinaryString> {
        self.nodes
            .iter()
            .filter(|s| s.len() == self.depth)
            .copied()
            .collect()
    }

    /// Deterministic 64-bit digest of (depth, width, nodes).
    pub fn digest(&self) -> u64 {
        let mut h = 0xcbf29ce484222325u64;
        let mut eat = |v: u64| {
            for b in v.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(self.depth as u64);
        eat(self.width as u64);
        for n in &self.nodes {
            eat(n.len() as u64);
            eat(n.raw_bits());
        }
        h
    }

    /// Homogeneity: same-length tree nodes have identical suffix sets, which
    /// is the overwrite-closure condition restricted to equal-length pairs.
    /// For block-encoded trees the comparison runs at block-aligned lengths;
    /// mid-block levels are encoding artifacts.
    pub fn is_homogeneous(&self) -> bool {
        let w = self.width.max(1);
        for n in (0..self.depth).step_by(w as usize) {
            let level: Vec<&BinaryString> = self
                .nodes
                .iter()
                .filter(|s| s.len() == n)
                .collect();
            if level.len() <= 1 {
                continue;
            }
            let suffixes_of = |p: &BinaryString| -> BTreeSet<BinaryString> {
                self.nodes
                    .iter()
                    .filter(|s| p.is_prefix_of(s))
                    .map(|s| s.suffix(n))
                    .collect()
            };
            let first = suffixes_of(level[0]);
            for p in level.iter().skip(1) {
                if suffixes_of(p) != first {
                    return false;
                }
            }
        }
        true
    }

    /// Ordered k-partition tree check at the decoded horizon ⌊depth/k⌋:
    /// every path's decoded parts must cover every element of `w` below the
    /// horizon.
    pub fn is_partition_tree(&self, k: u32, w: SmallSet) -> bool {
        assert!(k >= 1);
        let horizon = self.depth / k;
        for path in self.paths() {
            for x in w.iter() {
                if x >= horizon {
                    continue;
                }
                let covered = (0..k).any(|i| {
                    let pos = x * k + i;
                    pos < path.len() && path.bit(pos)
                });
                if !covered {
                    return false;
                }
            }
        }
        true
    }
}

impl fmt::Debug for FinTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FinTree(depth={}, width={}, nodes={})",
            self.depth,
            self.width,
            self.nodes.len()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BinaryString {
        s.parse().unwrap()
    }

    fn raw(nodes: &[&str]) -> BTreeSet<BinaryString> {
        nodes.iter().map(|s| bs(s)).collect()
    }

    #[test]
    fn prune_cases() {
        let full = FinTree::full(3);
        let again = FinTree::prune(&full.nodes, 3).unwrap();
        assert_eq!(full, again);

        let t = FinTree::prune(&raw(&["", "0", "1"]), 2).unwrap();
        assert!(t.is_empty());

        let t = FinTree::prune(&raw(&["", "0", "00", "1"]), 2).unwrap();
        let expect: BTreeSet<BinaryString> = raw(&["", "0", "00"]);
        assert_eq!(t.nodes, expect);

        assert!(FinTree::prune(&raw(&["0", "00"]), 2).is_err());
    }

    #[test]
    fn prune_idempotent_and_monotone() {
        let a = raw(&["", "0", "00", "01", "1", "10"]);
        let b = raw(&["", "0", "00", "01", "1", "10", "11"]);
        let ta = FinTree::prune(&a, 2).unwrap();
        let tb = FinTree::prune(&b, 2).unwrap();
        assert!(ta.nodes.is_subset(&tb.nodes));
        assert_eq!(FinTree::prune(&ta.nodes, 2).unwrap(), ta);
    }

    #[test]
    fn level_cases() {
        let full = FinTree::full(3);
        assert_eq!(full.level(2).unwrap().len(), 4);
        let single = FinTree::single_path(bs("000"));
        assert_eq!(
            single.level(2).unwrap().into_iter().collect::<Vec<_>>(),
            vec![bs("00")]
        );
        assert!(FinTree::empty(3).level(1).unwrap().is_empty());
        assert!(full.level(4).is_err());
    }

    #[test]
    fn paths_cases() {
        assert_eq!(
            FinTree::full(2).paths(),
            vec![bs("00"), bs("01"), bs("10"), bs("11")]
        );
        assert!(FinTree::empty(2).paths().is_empty());
        assert_eq!(FinTree::single_path(bs("11")).paths(), vec![bs("11")]);
    }

    /// Literal overwrite-quantifier oracle for homogeneity at tiny depth.
    fn homogeneous_oracle(t: &FinTree) -> bool {
        let mut all: Vec<BinaryString> = Vec::new();
        for len in 0..=t.depth() {
            for bits in 0..(1u64 << len) {
                all.push(BinaryString::from_raw(bits, len));
            }
        }
        for r1 in t.nodes() {
            for r2 in t.nodes() {
                if r1.len() != r2.len() {
                    continue;
                }
                for rho in &all {
                    if rho.len() < r1.len() {
                        continue;
                    }
                    let a = rho.overwrite(r1).unwrap();
                    let b = rho.overwrite(r2).unwrap();
                    if t.contains(&a) != t.contains(&b) {
                        return false;
                    }
                }
            }
        }
        true
    }

    #[test]
    fn homogeneity_cases() {
        assert!(FinTree::full(3).is_homogeneous());
        assert!(FinTree::single_path(bs("000")).is_homogeneous());
        let t = FinTree::prune(&raw(&["", "0", "1", "00", "11"]), 2).unwrap();
        assert!(!t.is_homogeneous());
    }

    #[test]
    fn homogeneity_matches_oracle_exhaustively_at_depth_3() {
        // All pruned trees of depth 3 arise from subsets of the 8 paths.
        for mask in 0u32..256 {
            let paths: Vec<BinaryString> = (0..8)
                .filter(|i| (mask >> i) & 1 == 1)
                .map(|i| BinaryString::from_raw(i as u64, 3))
                .collect();
            let t = FinTree::from_paths(3, paths);
            assert_eq!(t.is_homogeneous(), homogeneous_oracle(&t), "mask={mask}");
        }
    }

    #[test]
    fn level_choice_trees_are_homogeneous() {
        let choices = vec![
            vec![bs("0"), bs("1")],
            vec![bs("1")],
            vec![bs("0"), bs("1")],
        ];
        let t = FinTree::level_choice(&choices, 1).unwrap();
        assert!(t.is_homogeneous());
        assert_eq!(t.paths().len(), 4);
    }

    #[test]
    fn partition_tree_cases() {
        // All interleavings of 2 parts covering {0,1} at depth 4.
        let mut paths = Vec::new();
        for bits in 0..16u64 {
            let x = BinaryString::from_raw(bits, 4);
            let covers = (0..2).all(|o| x.bit(2 * o) || x.bit(2 * o + 1));
            if covers {
                paths.push(x);
            }
        }
        let t = FinTree::from_paths(4, paths);
        assert!(t.is_partition_tree(2, SmallSet::from_iter([0, 1])));

        let bad = FinTree::from_paths(4, [bs("0000")]);
        assert!(!bad.is_partition_tree(2, SmallSet::from_iter([0, 1])));

        // k=1: every path's support must contain w below the horizon.
        let t = FinTree::single_path(bs("111"));
        assert!(t.is_partition_tree(1, SmallSet::from_iter([0, 1, 2])));
    }
}
