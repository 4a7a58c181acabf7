//! Toy prefix-free machines: explicit finite program tables with prefix-free
//! domains, the induced complexity, incompressible levels, and the exact
//! Kraft sum.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bits::BinaryString;
use crate::clopen::all_strings_of_length;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToyPrefixMachine {
    programs: BTreeMap<BinaryString, BinaryString>,
}

impl ToyPrefixMachine {
    /// The domain must be an antichain under the prefix order.
    pub fn new(programs: BTreeMap<BinaryString, BinaryString>) -> Result<Self> {
        let keys: Vec<&BinaryString> = programs.keys().collect();
        for (i, a) in keys.iter().enumerate() {
            for b in keys.iter().skip(i + 1) {
                if a.is_compatible(b) {
                    return Err(Error::Structure(format!(
                        "programs {a} and {b} are prefix-comparable; domain not prefix-free"
                    )));
                }
            }
        }
        Ok(ToyPrefixMachine { programs })
    }

    pub fn empty() -> Self {
        ToyPrefixMachine { programs: BTreeMap::new() }
    }

    pub fn programs(&self) -> &BTreeMap<BinaryString, BinaryString> {
        &self.programs
    }

    /// Minimum program length producing `s`; None encodes infinity.
    pub fn complexity(&self, s: &BinaryString) -> Option<u32> {
        self.programs
            .iter()
            .filter(|(_, out)| *out == s)
            .map(|(p, _)| p.len())
            .min()
    }

    /// All length-n strings ρ with K(ρ) >= n - c.
    pub fn incompressible_level(&self, c: u32, n: u32) -> Vec<BinaryString> {
        all_strings_of_length(n)
            .into_iter()
            .filter(|s| {
                match self.complexity(s) {
                    Some(k) => k as i64 >= n as i64 - c as i64,
                    None => true,
                }
            })
            .collect()
    }

    /// Exact Kraft sum Σ 2^{-|p|}, scaled by 2^64 to stay in integers.
    pub fn kraft_scaled(&self) -> u128 {
        self.programs
            .keys()
            .map(|p| 1u128 << (64 - p.len()))
            .sum()
    }

    /// Kraft inequality for the prefix-free domain.
    pub fn kraft_ok(&self) -> bool {
        self.kraft_scaled() <= 1u128 << 64
    }

    /// Count of compressible strings at level n with slack c; the prefix-free
    /// counting bound caps this at max(0, 2^{n-c} - 1).
    pub fn compressible_count(&self, c: u32, n: u32) -> u64 {
        (1u64 << n) - self.incompressible_level(c, n).len() as u64
    }

    pub fn counting_bound(c: u32, n: u32) -> u64 {
        if c >= n {
            // Threshold n - c <= 0: no program has negative length.
            0
        } else {
            (1u64 << (n - c)) - 1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BinaryString {
        s.parse().unwrap()
    }

    fn machine(programs: &[(&str, &str)]) -> ToyPrefixMachine {
        ToyPrefixMachine::new(
            programs
                .iter()
                .map(|(p, o)| (bs(p), bs(o)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn complexity_cases() {
        let m = ToyPrefixMachine::empty();
        assert_eq!(m.complexity(&bs("01")), None);

        let m = machine(&[("0", "11")]);
        assert_eq!(m.complexity(&bs("11")), Some(1));
        assert_eq!(m.complexity(&bs("10")), None);

        let m = machine(&[("0", "11"), ("10", "11")]);
        assert_eq!(m.complexity(&bs("11")), Some(1));
    }

    #[test]
    fn prefix_free_domain_enforced() {
        let r = ToyPrefixMachine::new([(bs("0"), bs("1")), (bs("01"), bs("0"))].into());
        assert!(r.is_err());
    }

    #[test]
    fn incompressible_levels() {
        let m = ToyPrefixMachine::empty();
        assert_eq!(m.incompressible_level(0, 3).len(), 8);

        // c >= n: threshold non-positive, everything incompressible.
        let m = machine(&[("0", "00")]);
        assert_eq!(m.incompressible_level(2, 2).len(), 4);

        // Only 00 is compressed at c=0, n=2: K(00)=1 < 2, while K(01)=2
        // meets the threshold exactly.
        let m = machine(&[("0", "00"), ("10", "01")]);
        let lvl = m.incompressible_level(0, 2);
        assert_eq!(lvl, vec![bs("01"), bs("10"), bs("11")]);
        assert_eq!(m.compressible_count(0, 2), 1);
        // The counting bound is 2^{n-c} - 1 = 3 here.
        assert_eq!(ToyPrefixMachine::counting_bound(0, 2), 3);
        assert!(m.compressible_count(0, 2) <= ToyPrefixMachine::counting_bound(0, 2));
    }

    #[test]
    fn kraft_cases() {
        let m = machine(&[("0", "00"), ("10", "01"), ("11", "10")]);
        assert_eq!(m.kraft_scaled(), 1u128 << 64); // 1/2 + 1/4 + 1/4
        assert!(m.kraft_ok());
        assert!(ToyPrefixMachine::empty().kraft_ok());
    }
}
