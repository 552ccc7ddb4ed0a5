use crate::bitset::{any_common, or_shifted, words_for, SumBitset};
use crate::error::{Error, Result};
use crate::intset::IntSet;
use crate::params::KLParams;

/// Default cap on the number of bits a single sumset table may hold (128 MiB).
pub const DEFAULT_MAX_BITS: u64 = 1 << 30;

fn scaled_max(a: &IntSet, k: u32) -> Result<u64> {
    let max = a.max().unwrap_or(0);
    max.checked_mul(k as u64)
        .ok_or_else(|| Error::Range(format!("{k} * {max} overflows 64 bits")))
}

fn check_bits(bits: u64, max_bits: u64) -> Result<()> {
    if bits > max_bits {
        return Err(Error::Budget(format!("{bits} bits needed, cap is {max_bits}")));
    }
    Ok(())
}

/// Bits of `a` relative to its minimum.
fn relative_words(a: &IntSet) -> Vec<u64> {
    let lo = a.min().unwrap_or(0);
    let span = a.max().map_or(0, |hi| hi - lo + 1);
    let mut w = vec![0u64; words_for(span)];
    for x in a.iter() {
        let i = x - lo;
        w[(i / 64) as usize] |= 1 << (i % 64);
    }
    w
}

/// kA with repetition, by (k-1)-fold shift-OR folding.
pub fn sumset_fold(a: &IntSet, k: u32) -> Result<SumBitset> {
    sumset_fold_within(a, k, DEFAULT_MAX_BITS)
}

pub fn sumset_fold_within(a: &IntSet, k: u32, max_bits: u64) -> Result<SumBitset> {
    if a.is_empty() || k == 0 {
        return Err(Error::Domain("sumset_fold needs a nonempty set and k >= 1".into()));
    }
    scaled_max(a, k)?;
    let lo = a.min().unwrap();
    let r = a.max().unwrap() - lo;
    let bits = k as u64 * r + 1;
    check_bits(bits, max_bits)?;
    let base = relative_words(a);
    let shifts: Vec<usize> = a.iter().map(|x| (x - lo) as usize).collect();
    let mut cur = base.clone();
    cur.resize(words_for(bits), 0);
    for _ in 1..k {
        let mut next = vec![0u64; cur.len()];
        for &s in &shifts {
            or_shifted(&mut next, &cur, s);
        }
        cur = next;
    }
    Ok(SumBitset::from_words(k as u64 * lo, bits, cur))
}

/// Sums of k pairwise-distinct elements, by a layered DP over the elements.
pub fn restricted_sumset(a: &IntSet, k: u32) -> Result<SumBitset> {
    restricted_sumset_within(a, k, DEFAULT_MAX_BITS)
}

pub fn restricted_sumset_within(a: &IntSet, k: u32, max_bits: u64) -> Result<SumBitset> {
    if k == 0 {
        return Err(Error::Domain("restricted_sumset needs k >= 1".into()));
    }
    scaled_max(a, k)?;
    if (k as usize) > a.len() {
        return Ok(SumBitset::new(0, 0));
    }
    let lo = a.min().unwrap();
    let r = a.max().unwrap() - lo;
    let bits = k as u64 * r + 1;
    check_bits(bits.saturating_mul(k as u64), max_bits)?;
    let n = words_for(bits);
    // layer j holds sums of j distinct elements, relative to j*lo
    let mut layers = vec![vec![0u64; n]; k as usize + 1];
    layers[0][0] = 1;
    for (idx, x) in a.iter().enumerate() {
        let s = (x - lo) as usize;
        let top = (idx + 1).min(k as usize);
        for j in (1..=top).rev() {
            let (below, above) = layers.split_at_mut(j);
            or_shifted(&mut above[0], &below[j - 1], s);
        }
    }
    let out = layers.pop().unwrap();
    Ok(SumBitset::from_words(k as u64 * lo, bits, out))
}

pub fn is_sum_free(a: &IntSet, p: KLParams) -> Result<bool> {
    if a.is_empty() {
        return Ok(true);
    }
    scaled_max(a, p.k())?;
    let (lo, hi) = (a.min().unwrap(), a.max().unwrap());
    if p.k() as u64 * lo > p.l() as u64 * hi {
        return Ok(true);
    }
    let ka = sumset_fold(a, p.k())?;
    let la = sumset_fold(a, p.l())?;
    Ok(!ka.intersects(&la))
}

pub fn is_restricted_sum_free(a: &IntSet, p: KLParams) -> Result<bool> {
    scaled_max(a, p.k())?;
    if a.len() < p.k() as usize {
        return Ok(true);
    }
    let ka = restricted_sumset(a, p.k())?;
    let la = restricted_sumset(a, p.l())?;
    Ok(!ka.intersects(&la))
}

/// Lexicographically first generator multiset (repetition allowed) whose
/// nonempty subset sums all lie in `a`.
pub fn contains_projective_cube(a: &IntSet, d: u32) -> Result<Option<Vec<u64>>> {
    let xs = a.as_slice();
    let has = |x: Option<u64>| x.is_some_and(|x| a.contains(x));
    match d {
        2 => {
            for (i, &s1) in xs.iter().enumerate() {
                for &s2 in &xs[i..] {
                    if has(s1.checked_add(s2)) {
                        return Ok(Some(vec![s1, s2]));
                    }
                }
            }
            Ok(None)
        }
        3 => {
            for (i, &s1) in xs.iter().enumerate() {
                for (j, &s2) in xs.iter().enumerate().skip(i) {
                    if !has(s1.checked_add(s2)) {
                        continue;
                    }
                    for &s3 in &xs[j..] {
                        if has(s1.checked_add(s3))
                            && has(s2.checked_add(s3))
                            && has(s1.checked_add(s2).and_then(|x| x.checked_add(s3)))
                        {
                            return Ok(Some(vec![s1, s2, s3]));
                        }
                    }
                }
            }
            Ok(None)
        }
        _ => Err(Error::Domain(format!("projective cubes supported for d in {{2,3}}, got {d}"))),
    }
}

/// Incremental sumset layers for a growing set, one entry per pushed element.
///
/// Elements are measured from a fixed `base` no larger than any element, so
/// layer j holds `sum - j * base` for sums of j elements.
pub(crate) struct SumLayers {
    p: KLParams,
    base: u64,
    restricted: bool,
    words: usize,
    stack: Vec<Vec<Vec<u64>>>,
}

impl SumLayers {
    pub(crate) fn new(p: KLParams, restricted: bool, base: u64, span: u64, depth: usize, max_bits: u64) -> Result<Self> {
        let bits = p.k() as u64 * span + 1;
        let total = bits
            .saturating_mul(p.k() as u64 + 1)
            .saturating_mul(depth as u64 + 1);
        check_bits(total, max_bits)?;
        let words = words_for(bits);
        let mut empty = vec![vec![0u64; words]; p.k() as usize + 1];
        empty[0][0] = 1;
        Ok(SumLayers { p, base, restricted, words, stack: vec![empty] })
    }

    /// Adds `x`; returns false (and leaves the state untouched) if the
    /// enlarged set violates the constraint.
    pub(crate) fn push(&mut self, x: u64) -> bool {
        let s = (x - self.base) as usize;
        let k = self.p.k() as usize;
        let cur = self.stack.last().unwrap();
        let mut next = cur.clone();
        if self.restricted {
            for j in (1..=k).rev() {
                or_shifted(&mut next[j], &cur[j - 1], s);
            }
        } else {
            for j in 1..=k {
                let (below, above) = next.split_at_mut(j);
                or_shifted(&mut above[0], &below[j - 1], s);
            }
        }
        let d = ((self.p.k() - self.p.l()) as u64 * self.base) as usize;
        let l = self.p.l() as usize;
        // k*base + i == l*base + i' with i in layer k, i' in layer l
        let clash = d < 64 * self.words && any_common(&next[l], &next[k], d);
        if clash {
            return false;
        }
        self.stack.push(next);
        true
    }

    pub(crate) fn pop(&mut self) {
        assert!(self.stack.len() > 1);
        self.stack.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[u64]) -> IntSet {
        IntSet::new(v.to_vec()).unwrap()
    }

    fn kl(k: u32, l: u32) -> KLParams {
        KLParams::new(k, l).unwrap()
    }

    #[test]
    fn fold_examples() {
        assert_eq!(sumset_fold(&set(&[1, 2]), 2).unwrap().to_intset(), set(&[2, 3, 4]));
        assert_eq!(sumset_fold(&set(&[5]), 3).unwrap().to_intset(), set(&[15]));
        assert_eq!(sumset_fold(&set(&[1, 2, 3]), 3).unwrap().to_intset(), IntSet::range(3, 9).unwrap());
    }

    #[test]
    fn restricted_examples() {
        assert_eq!(restricted_sumset(&set(&[1, 2]), 2).unwrap().to_intset(), set(&[3]));
        assert_eq!(restricted_sumset(&set(&[1, 2, 3]), 2).unwrap().to_intset(), set(&[3, 4, 5]));
        assert!(restricted_sumset(&set(&[1, 2]), 3).unwrap().is_empty());
    }

    #[test]
    fn predicate_examples() {
        assert!(!is_sum_free(&set(&[1, 2]), kl(2, 1)).unwrap());
        assert!(is_sum_free(&set(&[1, 2]), kl(3, 1)).unwrap());
        assert!(is_sum_free(&IntSet::range(4, 10).unwrap(), kl(3, 1)).unwrap());
        assert!(is_restricted_sum_free(&set(&[1, 2]), kl(2, 1)).unwrap());
        assert!(!is_restricted_sum_free(&set(&[1, 2, 3]), kl(2, 1)).unwrap());
        assert!(is_restricted_sum_free(&set(&[1]), kl(2, 1)).unwrap());
    }

    #[test]
    fn overflow_is_a_range_error() {
        let a = set(&[u64::MAX / 2]);
        assert!(matches!(sumset_fold(&a, 3), Err(Error::Range(_))));
        assert!(matches!(is_sum_free(&a, kl(3, 1)), Err(Error::Range(_))));
    }

    #[test]
    fn bit_budget_enforced() {
        let a = set(&[1, 1 << 40]);
        assert!(matches!(sumset_fold(&a, 2), Err(Error::Budget(_))));
    }

    #[test]
    fn cube_examples() {
        // repetition allowed: 1+1 = 2 is found before 1+2 = 3
        assert_eq!(contains_projective_cube(&set(&[1, 2, 3]), 2).unwrap(), Some(vec![1, 1]));
        assert_eq!(contains_projective_cube(&set(&[2, 3]), 2).unwrap(), None);
        let seven = IntSet::range(1, 7).unwrap();
        assert_eq!(contains_projective_cube(&seven, 3).unwrap(), Some(vec![1, 1, 1]));
        // the distinct-generator cube (1,2,4) is present too
        let sums = [1, 2, 4, 3, 5, 6, 7];
        assert!(sums.iter().all(|&x| seven.contains(x)));
        assert!(contains_projective_cube(&set(&[1, 2, 4]), 3).unwrap().is_none());
        assert!(contains_projective_cube(&seven, 4).is_err());
    }

    #[test]
    fn layers_track_predicate() {
        let p = kl(3, 1);
        let a = IntSet::range(1, 12).unwrap();
        let mut st = SumLayers::new(p, false, 1, 11, 12, DEFAULT_MAX_BITS).unwrap();
        let mut chosen = vec![];
        for x in a.iter().rev() {
            let mut trial = chosen.clone();
            trial.push(x);
            let expect = is_sum_free(&IntSet::new(trial.clone()).unwrap(), p).unwrap();
            assert_eq!(st.push(x), expect, "adding {x} to {chosen:?}");
            if expect {
                chosen = trial;
            }
        }
    }
}
