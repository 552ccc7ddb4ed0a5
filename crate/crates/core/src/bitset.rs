use serde::{Deserialize, Serialize};

use crate::intset::IntSet;

/// Membership table for integers in `[offset, offset + len)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumBitset {
    offset: u64,
    len: u64,
    words: Vec<u64>,
}

pub(crate) fn words_for(bits: u64) -> usize {
    bits.div_ceil(64) as usize
}

/// `dst |= src << shift`, dropping bits that fall past the end of `dst`.
pub(crate) fn or_shifted(dst: &mut [u64], src: &[u64], shift: usize) {
    let q = shift / 64;
    let r = shift % 64;
    for (j, &s) in src.iter().enumerate() {
        if s == 0 {
            continue;
        }
        let t = q + j;
        if t >= dst.len() {
            break;
        }
        dst[t] |= s << r;
        if r > 0 && t + 1 < dst.len() {
            dst[t + 1] |= s >> (64 - r);
        }
    }
}

/// The 64 bits of `a` starting at bit `pos`, zero past the end.
fn window(a: &[u64], pos: usize) -> u64 {
    let q = pos / 64;
    let r = pos % 64;
    let lo = a.get(q).copied().unwrap_or(0);
    if r == 0 {
        return lo;
    }
    let hi = a.get(q + 1).copied().unwrap_or(0);
    (lo >> r) | (hi << (64 - r))
}

/// True if some `i` has bit `i` of `b` and bit `i + d` of `a` both set.
pub(crate) fn any_common(a: &[u64], b: &[u64], d: usize) -> bool {
    b.iter().enumerate().any(|(j, &w)| w != 0 && w & window(a, 64 * j + d) != 0)
}

impl SumBitset {
    pub fn new(offset: u64, len: u64) -> Self {
        SumBitset { offset, len, words: vec![0; words_for(len)] }
    }

    pub fn from_set(a: &IntSet) -> Self {
        match (a.min(), a.max()) {
            (Some(lo), Some(hi)) => {
                let mut b = SumBitset::new(lo, hi - lo + 1);
                for x in a.iter() {
                    b.insert(x);
                }
                b
            }
            _ => SumBitset::new(0, 0),
        }
    }

    pub(crate) fn from_words(offset: u64, len: u64, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        let mut b = SumBitset { offset, len, words };
        b.trim();
        b
    }

    fn trim(&mut self) {
        let tail = self.len % 64;
        if tail != 0 {
            if let Some(w) = self.words.last_mut() {
                *w &= (1u64 << tail) - 1;
            }
        }
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn contains(&self, x: u64) -> bool {
        if x < self.offset || x - self.offset >= self.len {
            return false;
        }
        let i = x - self.offset;
        self.words[(i / 64) as usize] >> (i % 64) & 1 == 1
    }

    /// Panics if `x` lies outside the table.
    pub fn insert(&mut self, x: u64) {
        assert!(x >= self.offset && x - self.offset < self.len, "{x} outside bitset range");
        let i = x - self.offset;
        self.words[(i / 64) as usize] |= 1 << (i % 64);
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(move |(j, &w)| {
            let base = self.offset + 64 * j as u64;
            BitIter(w).map(move |b| base + b as u64)
        })
    }

    pub fn to_intset(&self) -> IntSet {
        IntSet::from_sorted(self.iter().filter(|&x| x > 0).collect())
    }

    pub fn intersects(&self, other: &SumBitset) -> bool {
        let (lo, hi) = if self.offset <= other.offset { (self, other) } else { (other, self) };
        let d = hi.offset - lo.offset;
        if d >= lo.len {
            return false;
        }
        any_common(&lo.words, &hi.words, d as usize)
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = u32;
    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifted_or_crosses_words() {
        let mut dst = vec![0u64; 3];
        or_shifted(&mut dst, &[1 | 1 << 63], 70);
        assert_eq!(dst, vec![0, 1 << 6, 1 << 5]);
    }

    #[test]
    fn intersects_with_offsets() {
        let mut a = SumBitset::new(10, 200);
        let mut b = SumBitset::new(75, 10);
        a.insert(80);
        b.insert(81);
        assert!(!a.intersects(&b));
        b.insert(80);
        assert!(a.intersects(&b) && b.intersects(&a));
        let far = SumBitset::from_set(&IntSet::new(vec![500]).unwrap());
        assert!(!a.intersects(&far));
    }

    #[test]
    fn iterates_members() {
        let s = IntSet::new(vec![3, 64, 67, 200]).unwrap();
        let b = SumBitset::from_set(&s);
        assert_eq!(b.to_intset(), s);
        assert_eq!(b.count(), 4);
    }
}
