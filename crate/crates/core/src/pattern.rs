//! Eventually periodic bit predicates. The partition target A is always
//! given this way, never as an oracle: non-computability hypotheses are not
//! testable at finite scale, so the simulator reports against an explicit
//! pattern instead of assuming them.

use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::error::{Error, Result};

/// prefix + repeating period, e.g. "" / "10" is the even positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PatternRepr", into = "PatternRepr")]
pub struct BitPattern {
    prefix: Vec<bool>,
    period: Vec<bool>,
}

#[derive(Serialize, Deserialize, Clone)]
struct PatternRepr {
    #[serde(default)]
    prefix: String,
    period: String,
}

impl TryFrom<PatternRepr> for BitPattern {
    type Error = Error;
    fn try_from(r: PatternRepr) -> Result<Self> {
        BitPattern::parse(&r.prefix, &r.period)
    }
}

impl From<BitPattern> for PatternRepr {
    fn from(p: BitPattern) -> Self {
        let render = |v: &[bool]| v.iter().map(|&b| if b { '1' } else { '0' }).collect();
        PatternRepr { prefix: render(&p.prefix), period: render(&p.period) }
    }
}

impl BitPattern {
    pub fn new(prefix: Vec<bool>, period: Vec<bool>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Structure("pattern period must be nonempty".into()));
        }
        Ok(BitPattern { prefix, period })
    }

    pub fn parse(prefix: &str, period: &str) -> Result<Self> {
        let decode = |s: &str| -> Result<Vec<bool>> {
            s.chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(Error::Parse(format!("invalid pattern character {c:?}"))),
                })
                .collect()
        };
        BitPattern::new(decode(prefix)?, decode(period)?)
    }

    /// The even positions: the default partition target.
    pub fn evens() -> Self {
        BitPattern { prefix: vec![], period: vec![true, false] }
    }

    pub fn contains(&self, pos: u32) -> bool {
        let pos = pos as usize;
        if pos < self.prefix.len() {
            self.prefix[pos]
        } else {
            self.period[(pos - self.prefix.len()) % self.period.len()]
        }
    }
}

impl FromStr for BitPattern {
    type Err = Error;

    /// "prefix/period" or just "period".
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('/') {
            Some((pre, per)) => BitPattern::parse(pre, per),
            None => BitPattern::parse("", s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evens_pattern() {
        let a = BitPattern::evens();
        assert!(a.contains(0));
        assert!(!a.contains(1));
        assert!(a.contains(10));
    }

    #[test]
    fn prefix_then_period() {
        let a: BitPattern = "011/10".parse().unwrap();
        assert!(!a.contains(0));
        assert!(a.contains(1));
        assert!(a.contains(2));
        assert!(a.contains(3)); // first period position
        assert!(!a.contains(4));
        assert!(a.contains(5));
    }

    #[test]
    fn rejects_empty_period() {
        assert!(BitPattern::parse("01", "").is_err());
    }
}
