//! Finite binary strings and small subsets of the naturals.
//!
//! Strings are packed into a `u64` (bit `i` holds position `i`), which caps
//! lengths at 64. Everything at finite scale fits comfortably: tree depths,
//! stems, machine programs, and oracle prefixes all stay far below the cap.
//! Positions are 0-based internally; human-facing output renders 1-based
//! indices where the surrounding structure calls for it.

use std::fmt;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Maximum representable string length / set element bound.
pub const MAX_LEN: u32 = 64;

/// A finite word over {0,1}. The empty string is permitted.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BinaryString {
    bits: u64,
    len: u32,
}

impl BinaryString {
    pub const fn empty() -> Self {
        BinaryString { bits: 0, len: 0 }
    }

    /// Builds a string from raw bits; bits at positions >= len are ignored.
    pub fn from_raw(bits: u64, len: u32) -> Self {
        assert!(len <= MAX_LEN, "binary string length {len} exceeds {MAX_LEN}");
        let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        BinaryString { bits: bits & mask, len }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut bits = 0u64;
        let mut len = 0u32;
        for b in iter {
            assert!(len < MAX_LEN, "binary string too long");
            if b {
                bits |= 1 << len;
            }
            len += 1;
        }
        BinaryString { bits, len }
    }

    /// The characteristic string of `set` truncated/padded to `len` bits.
    pub fn characteristic(set: SmallSet, len: u32) -> Self {
        Self::from_raw(set.mask(), len)
    }

    /// All-ones string of the given length.
    pub fn ones(len: u32) -> Self {
        Self::from_raw(u64::MAX, len)
    }

    /// All-zeros string of the given length.
    pub fn zeros(len: u32) -> Self {
        Self::from_raw(0, len)
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, i: u32) -> bool {
        debug_assert!(i < self.len);
        (self.bits >> i) & 1 == 1
    }

    pub fn raw_bits(&self) -> u64 {
        self.bits
    }

    pub fn push(&self, b: bool) -> Self {
        assert!(self.len < MAX_LEN, "binary string too long");
        let mut bits = self.bits;
        if b {
            bits |= 1 << self.len;
        }
        BinaryString { bits, len: self.len + 1 }
    }

    /// First `n` positions.
    pub fn prefix(&self, n: u32) -> Self {
        assert!(n <= self.len);
        Self::from_raw(self.bits, n)
    }

    /// The set {i : self(i) = 1}.
    pub fn support(&self) -> SmallSet {
        SmallSet::from_mask(self.bits)
    }

    pub fn is_prefix_of(&self, other: &BinaryString) -> bool {
        if self.len > other.len {
            return false;
        }
        let mask = if self.len == 64 { u64::MAX } else { (1u64 << self.len) - 1 };
        (other.bits & mask) == self.bits
    }

    /// True iff one string is a prefix of the other.
    pub fn is_compatible(&self, other: &BinaryString) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// Strict extension: `self` properly extends `other`.
    pub fn extends(&self, other: &BinaryString) -> bool {
        self.len > other.len && other.is_prefix_of(self)
    }

    /// `self` with the first `|s|` positions replaced by `s`.
    /// Errors when `|self| < |s|`.
    pub fn overwrite(&self, s: &BinaryString) -> Result<BinaryString> {
        if self.len < s.len {
            return Err(Error::Length(format!(
                "overwrite: base length {} shorter than replacement length {}",
                self.len, s.len
            )));
        }
        let mask = if s.len == 64 { u64::MAX } else { (1u64 << s.len) - 1 };
        Ok(BinaryString {
            bits: (self.bits & !mask) | s.bits,
            len: self.len,
        })
    }

    /// The i-th component (0-based, `i < n`) of an n-fold interleaving:
    /// positions i, n+i, 2n+i, ...
    pub fn project(&self, n: u32, i: u32) -> Result<BinaryString> {
        if n == 0 || i >= n {
            return Err(Error::Index(format!(
                "project: component {i} out of range for arity {n}"
            )));
        }
        let mut out = BinaryString::empty();
        let mut pos = i;
        while pos < self.len {
            out = out.push(self.bit(pos));
            pos += n;
        }
        Ok(out)
    }

    /// Interleaves `parts` into a single string: output position o*n+c holds
    /// bit o of part c. Parts' lengths may differ by at most the stagger the
    /// interleaving itself produces; trailing positions stop at the first
    /// missing bit.
    pub fn interleave(parts: &[BinaryString]) -> BinaryString {
        let n = parts.len() as u32;
        let mut out = BinaryString::empty();
        if n == 0 {
            return out;
        }
        let mut o = 0u32;
        'outer: loop {
            for (c, p) in parts.iter().enumerate() {
                if o >= p.len() {
                    break 'outer;
                }
                let _ = c;
                out = out.push(p.bit(o));
            }
            o += 1;
        }
        out
    }

    /// Concatenation.
    pub fn concat(&self, tail: &BinaryString) -> BinaryString {
        let mut out = *self;
        for i in 0..tail.len() {
            out = out.push(tail.bit(i));
        }
        out
    }

    /// The suffix after the first `n` positions.
    pub fn suffix(&self, n: u32) -> BinaryString {
        assert!(n <= self.len);
        BinaryString::from_raw(self.bits >> n, self.len - n)
    }

    /// Lexicographic successor among equal-length strings, if any.
    pub fn lex_next(&self) -> Option<BinaryString> {
        // MSB-first lexicographic order corresponds to incrementing the
        // bit-reversed value.
        let v = self.reversed_value();
        if self.len == 0 {
            return None;
        }
        let max = if self.len == 64 { u64::MAX } else { (1u64 << self.len) - 1 };
        if v >= max {
            None
        } else {
            Some(Self::from_reversed_value(v + 1, self.len))
        }
    }

    /// MSB-first numeric value (position 0 most significant).
    pub fn reversed_value(&self) -> u64 {
        let mut v = 0u64;
        for i in 0..self.len {
            v = (v << 1) | (self.bit(i) as u64);
        }
        v
    }

    pub fn from_reversed_value(v: u64, len: u32) -> Self {
        let mut s = BinaryString::empty();
        for i in (0..len).rev() {
            s = s.push((v >> i) & 1 == 1);
        }
        s
    }
}

/// Shortlex: by length, then MSB-first lexicographically. For equal lengths
/// this is the standard "leftmost" order.
impl Ord for BinaryString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.reversed_value().cmp(&other.reversed_value()))
    }
}

impl PartialOrd for BinaryString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BinaryString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", if self.bit(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BinaryString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut out = BinaryString::empty();
        for ch in s.chars() {
            match ch {
                '0' => out = out.push(false),
                '1' => out = out.push(true),
                _ => {
                    return Err(Error::Parse(format!(
                        "invalid character {ch:?} in binary string {s:?}"
                    )))
                }
            }
        }
        Ok(out)
    }
}

impl Serialize for BinaryString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BinaryString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// A finite subset of {0, ..., 63} as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct SmallSet(u64);

impl SmallSet {
    pub const EMPTY: SmallSet = SmallSet(0);

    pub fn from_mask(mask: u64) -> Self {
        SmallSet(mask)
    }

    pub fn singleton(x: u32) -> Self {
        assert!(x < 64);
        SmallSet(1 << x)
    }

    pub fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        let mut m = 0u64;
        for x in iter {
            assert!(x < 64, "set element {x} out of range");
            m |= 1 << x;
        }
        SmallSet(m)
    }

    /// {0, ..., n-1}
    pub fn interval(n: u32) -> Self {
        assert!(n <= 64);
        if n == 64 {
            SmallSet(u64::MAX)
        } else {
            SmallSet((1u64 << n) - 1)
        }
    }

    pub fn mask(&self) -> u64 {
        self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn len(&self) -> u32 {
        self.0.count_ones()
    }

    pub fn contains(&self, x: u32) -> bool {
        x < 64 && (self.0 >> x) & 1 == 1
    }

    pub fn insert(&self, x: u32) -> Self {
        assert!(x < 64);
        SmallSet(self.0 | (1 << x))
    }

    pub fn remove(&self, x: u32) -> Self {
        SmallSet(self.0 & !(1u64 << x))
    }

    pub fn union(&self, other: SmallSet) -> Self {
        SmallSet(self.0 | other.0)
    }

    pub fn intersection(&self, other: SmallSet) -> Self {
        SmallSet(self.0 & other.0)
    }

    pub fn difference(&self, other: SmallSet) -> Self {
        SmallSet(self.0 & !other.0)
    }

    pub fn is_subset(&self, other: &SmallSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        (0..64).filter(move |&i| self.contains(i))
    }

    pub fn min_elem(&self) -> Option<u32> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros())
        }
    }

    pub fn max_elem(&self) -> Option<u32> {
        if self.0 == 0 {
            None
        } else {
            Some(63 - self.0.leading_zeros())
        }
    }

    /// All subsets, in ascending mask order (deterministic).
    pub fn subsets(&self) -> impl Iterator<Item = SmallSet> {
        let full = self.0;
        let mut cur: Option<u64> = Some(0);
        std::iter::from_fn(move || {
            let c = cur?;
            // standard subset-stepping trick over a fixed mask
            let next = if c == full { None } else { Some((c.wrapping_sub(full)) & full) };
            cur = next;
            Some(SmallSet(c))
        })
    }
}

impl fmt::Display for SmallSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for x in self.iter() {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
            first = false;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for SmallSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for SmallSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for SmallSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<u32> = Vec::deserialize(deserializer)?;
        for &x in &v {
            if x >= 64 {
                return Err(de::Error::custom(format!("set element {x} out of range")));
            }
        }
        Ok(SmallSet::from_iter(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BinaryString {
        s.parse().unwrap()
    }

    #[test]
    fn compatibility_cases() {
        assert!(bs("").is_compatible(&bs("01")));
        assert!(!bs("01").is_compatible(&bs("00")));
        assert!(bs("0").is_compatible(&bs("01")));
    }

    #[test]
    fn overwrite_cases() {
        assert_eq!(bs("1111").overwrite(&bs("00")).unwrap(), bs("0011"));
        assert_eq!(bs("010").overwrite(&bs("")).unwrap(), bs("010"));
        assert_eq!(bs("010").overwrite(&bs("10")).unwrap(), bs("100"));
        assert!(bs("0").overwrite(&bs("01")).is_err());
    }

    #[test]
    fn project_cases() {
        // 0-based components: i=0 picks positions 0,2,4.
        assert_eq!(bs("101010").project(2, 0).unwrap(), bs("111"));
        assert_eq!(bs("101010").project(2, 1).unwrap(), bs("000"));
        assert_eq!(bs("1011").project(1, 0).unwrap(), bs("1011"));
        assert!(bs("1011").project(2, 2).is_err());
    }

    #[test]
    fn project_interleave_roundtrip() {
        let parts = [bs("101"), bs("010"), bs("111")];
        let x = BinaryString::interleave(&parts);
        for (i, p) in parts.iter().enumerate() {
            assert_eq!(&x.project(3, i as u32).unwrap(), p);
        }
    }

    #[test]
    fn shortlex_order() {
        let mut v = vec![bs("1"), bs("0"), bs("00"), bs(""), bs("01"), bs("10")];
        v.sort();
        let rendered: Vec<String> = v.iter().map(|s| s.to_string()).collect();
        assert_eq!(rendered, vec!["", "0", "1", "00", "01", "10"]);
    }

    #[test]
    fn subset_iteration_is_complete() {
        let s = SmallSet::from_iter([1, 3, 5]);
        let subs: Vec<SmallSet> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|t| t.is_subset(&s)));
    }

    #[test]
    fn characteristic_and_support() {
        let s = SmallSet::from_iter([0, 2]);
        let c = BinaryString::characteristic(s, 4);
        assert_eq!(c, bs("1010"));
        assert_eq!(c.support(), s);
    }
}
