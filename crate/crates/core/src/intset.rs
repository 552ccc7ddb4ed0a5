use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest range the text parser will expand.
const MAX_RANGE_LEN: u64 = 10_000_000;

/// Finite set of distinct positive integers, kept sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct IntSet(Vec<u64>);

impl IntSet {
    pub fn empty() -> Self {
        IntSet(Vec::new())
    }

    /// Sorts `elems`; rejects zero and repeated values.
    pub fn new(mut elems: Vec<u64>) -> Result<Self> {
        elems.sort_unstable();
        if elems.first() == Some(&0) {
            return Err(Error::Domain("elements must be positive".into()));
        }
        if let Some(w) = elems.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Domain(format!("duplicate element {}", w[0])));
        }
        Ok(IntSet(elems))
    }

    /// Caller guarantees strictly increasing positive input.
    pub(crate) fn from_sorted(elems: Vec<u64>) -> Self {
        debug_assert!(elems.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(elems.first().is_none_or(|&x| x > 0));
        IntSet(elems)
    }

    /// The interval `[a, b]`.
    pub fn range(a: u64, b: u64) -> Result<Self> {
        if a == 0 || a > b {
            return Err(Error::Domain(format!("bad range {a}..{b}")));
        }
        Ok(IntSet((a..=b).collect()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut token = 0;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            for raw in line.split(',') {
                let raw = raw.trim();
                if raw.is_empty() {
                    continue;
                }
                token += 1;
                let err = |msg: String| Error::Parse { line: lineno + 1, token, msg };
                let (lo, hi) = match raw.split_once("..") {
                    Some((a, b)) => {
                        let a = parse_positive(a.trim()).map_err(err)?;
                        let b = parse_positive(b.trim()).map_err(err)?;
                        if a > b {
                            return Err(err(format!("empty range {raw:?}")));
                        }
                        if b - a >= MAX_RANGE_LEN {
                            return Err(err(format!("range {raw:?} longer than {MAX_RANGE_LEN}")));
                        }
                        (a, b)
                    }
                    None => {
                        let a = parse_positive(raw).map_err(err)?;
                        (a, a)
                    }
                };
                for x in lo..=hi {
                    if !seen.insert(x) {
                        return Err(err(format!("duplicate value {x}")));
                    }
                    out.push(x);
                }
            }
        }
        out.sort_unstable();
        Ok(IntSet(out))
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> Option<u64> {
        self.0.first().copied()
    }

    pub fn max(&self) -> Option<u64> {
        self.0.last().copied()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = u64> + ExactSizeIterator + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &IntSet) -> bool {
        self.iter().all(|x| other.contains(x))
    }

    /// Elements picked by the set bits of `mask` (bit i selects the i-th smallest).
    pub fn select(&self, mask: u64) -> IntSet {
        IntSet(
            self.0
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &x)| x)
                .collect(),
        )
    }

    pub fn with(&self, x: u64) -> Result<IntSet> {
        let mut v = self.0.clone();
        v.push(x);
        IntSet::new(v)
    }
}

fn parse_positive(s: &str) -> std::result::Result<u64, String> {
    let v: i128 = s.parse().map_err(|_| format!("not an integer: {s:?}"))?;
    if v <= 0 {
        return Err(format!("non-positive value {v}"));
    }
    u64::try_from(v).map_err(|_| format!("value {v} exceeds 64 bits"))
}

impl TryFrom<Vec<u64>> for IntSet {
    type Error = Error;
    fn try_from(v: Vec<u64>) -> Result<Self> {
        IntSet::new(v)
    }
}

impl From<IntSet> for Vec<u64> {
    fn from(s: IntSet) -> Self {
        s.0
    }
}

impl FromStr for IntSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        IntSet::parse(s)
    }
}

impl fmt::Display for IntSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for x in &self.0 {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_and_ranges() {
        assert_eq!(IntSet::parse("1,2,4").unwrap().as_slice(), &[1, 2, 4]);
        assert_eq!(IntSet::parse("1..5").unwrap().as_slice(), &[1, 2, 3, 4, 5]);
        assert_eq!(IntSet::parse("7\n3\n\n5").unwrap().as_slice(), &[3, 5, 7]);
        assert_eq!(IntSet::parse("10, 1..3").unwrap().as_slice(), &[1, 2, 3, 10]);
    }

    #[test]
    fn duplicate_names_the_token() {
        match IntSet::parse("3,3") {
            Err(Error::Parse { token, line, msg }) => {
                assert_eq!((line, token), (1, 2));
                assert!(msg.contains('3'));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(IntSet::parse("1..4\n2"), Err(Error::Parse { line: 2, token: 2, .. })));
    }

    #[test]
    fn rejects_bad_tokens() {
        for bad in ["0", "-3", "5..2", "1..x", "abc", "1...3"] {
            assert!(IntSet::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        let s = IntSet::new(vec![9, 2, 5]).unwrap();
        assert_eq!(s.to_string(), "2,5,9");
        assert_eq!(s.to_string().parse::<IntSet>().unwrap(), s);
    }

    #[test]
    fn serde_rejects_duplicates() {
        assert!(IntSet::try_from(vec![1, 1]).is_err());
        assert!(IntSet::try_from(vec![0]).is_err());
    }
}
