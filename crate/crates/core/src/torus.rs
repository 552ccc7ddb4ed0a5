use std::cmp::Ordering;

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::intset::IntSet;
use crate::params::KLParams;
use crate::rational::Rational;

/// Default cap on breakpoints per interval index in [`best_dilation`].
pub const DEFAULT_BREAKPOINT_BUDGET: u64 = 10_000_000;

/// Open arc of the circle R/Z running counter-clockwise from `lo` for `len`.
///
/// `len` may be 1, which is the circle with the single point `lo` removed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(into = "ArcView")]
pub struct Arc {
    lo: Rational,
    len: Rational,
}

#[derive(Serialize)]
struct ArcView {
    lo: Rational,
    hi: Rational,
    length: Rational,
    wraps: bool,
}

impl From<Arc> for ArcView {
    fn from(a: Arc) -> Self {
        ArcView { hi: a.hi(), wraps: a.wraps(), lo: a.lo, length: a.len }
    }
}

impl Arc {
    /// The arc from `lo` to `hi`, both taken mod 1.
    pub fn new(lo: &Rational, hi: &Rational) -> Result<Arc> {
        let len = (hi - lo).frac();
        if len.is_zero() {
            return Err(Error::Domain("arc endpoints coincide mod 1".into()));
        }
        Ok(Arc { lo: lo.frac(), len })
    }

    pub fn with_length(lo: &Rational, len: Rational) -> Result<Arc> {
        if !len.is_positive() || len > 1 {
            return Err(Error::Domain(format!("arc length {len} outside (0,1]")));
        }
        Ok(Arc { lo: lo.frac(), len })
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> Rational {
        (&self.lo + &self.len).frac()
    }

    pub fn length(&self) -> &Rational {
        &self.len
    }

    /// True if the arc passes through 0.
    pub fn wraps(&self) -> bool {
        &self.lo + &self.len > Rational::one()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let d = (x - &self.lo).frac();
        d.is_positive() && d < self.len
    }

    pub fn is_disjoint(&self, other: &Arc) -> bool {
        (&other.lo - &self.lo).frac() >= self.len && (&self.lo - &other.lo).frac() >= other.len
    }
}

/// Result of dilating an arc: either an arc again or the whole circle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fold {
    Arc(Arc),
    Full,
}

fn check_t(p: KLParams, t: u32) -> Result<()> {
    if t == 0 || t > p.diff() {
        return Err(Error::Domain(format!("t = {t} outside 1..={} for {p}", p.diff())));
    }
    Ok(())
}

/// Numerators of the endpoints of the t-th interval over the denominator k^2 - l^2.
fn omega_numerators(p: KLParams, t: u32) -> (u64, u64, u64) {
    let (k, l) = (p.k() as u64, p.l() as u64);
    let base = (t as u64 - 1) * (k + l);
    (base + l, base + k, k * k - l * l)
}

/// The open interval of length 1/(k+l) on which every k-fold sum avoids every l-fold sum.
pub fn omega(p: KLParams, t: u32) -> Result<Arc> {
    check_t(p, t)?;
    let (lo, hi, d) = omega_numerators(p, t);
    Arc::new(&Rational::new(lo as i64, d as i64), &Rational::new(hi as i64, d as i64))
}

pub fn arc_k_fold(a: &Arc, k: u32) -> Fold {
    let len = a.len.scale(k as u64);
    if len >= 1 {
        return Fold::Full;
    }
    Fold::Arc(Arc { lo: a.lo.scale(k as u64).frac(), len })
}

pub fn verify_omega_sum_free(p: KLParams, t: u32) -> Result<bool> {
    let w = omega(p, t)?;
    Ok(match (arc_k_fold(&w, p.k()), arc_k_fold(&w, p.l())) {
        (Fold::Arc(a), Fold::Arc(b)) => a.is_disjoint(&b),
        _ => false,
    })
}

/// `{n in A : n x mod 1 in arc}`, decided exactly.
pub fn dilation_subset(a: &IntSet, x: &Rational, arc: &Arc) -> IntSet {
    let kept = a.iter().filter(|&n| arc.contains(&x.scale(n).frac())).collect();
    IntSet::from_sorted(kept)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DilationResult {
    pub x: Rational,
    pub count: usize,
    pub subset: IntSet,
    pub t: u32,
}

/// Breakpoint `num / den` on [0, 1); `delta` is +1 where an interval opens.
#[derive(Clone, Copy)]
struct Event {
    num: u128,
    den: u128,
    delta: i32,
}

fn cmp_frac(a: (u128, u128), b: (u128, u128)) -> Ordering {
    (a.0 * b.1).cmp(&(b.0 * a.1))
}

/// Count of `n in A` with `n x` in the t-th interval, on every cell between
/// consecutive breakpoints: `(cell_lo, cell_hi, count)` as fractions.
type Cell = ((u128, u128), (u128, u128), usize);

fn sweep(a: &IntSet, p: KLParams, t: u32, budget: u64) -> Result<Vec<Cell>> {
    let (lo, hi, d) = omega_numerators(p, t);
    let total: u64 = a.iter().fold(0u64, |acc, n| acc.saturating_add(n.saturating_mul(2)));
    if total > budget {
        return Err(Error::Budget(format!("{total} breakpoints, cap is {budget}")));
    }
    let mut ev = Vec::with_capacity(total as usize);
    for n in a.iter() {
        let den = n as u128 * d as u128;
        for j in 0..n as u128 {
            // n x in (lo/d + j, hi/d + j)/1  <=>  x in ((lo + j d)/(n d), (hi + j d)/(n d))
            ev.push(Event { num: lo as u128 + j * d as u128, den, delta: 1 });
            ev.push(Event { num: hi as u128 + j * d as u128, den, delta: -1 });
        }
    }
    ev.sort_by(|x, y| cmp_frac((x.num, x.den), (y.num, y.den)));
    let mut cells = Vec::new();
    let mut active: i64 = 0;
    let mut i = 0;
    while i < ev.len() {
        let here = (ev[i].num, ev[i].den);
        while i < ev.len() && cmp_frac((ev[i].num, ev[i].den), here) == Ordering::Equal {
            active += ev[i].delta as i64;
            i += 1;
        }
        let next = if i < ev.len() { (ev[i].num, ev[i].den) } else { (1, 1) };
        debug_assert!(active >= 0);
        cells.push((here, next, active as usize));
    }
    Ok(cells)
}

fn midpoint(a: (u128, u128), b: (u128, u128)) -> Rational {
    let num = BigInt::from(a.0) * BigInt::from(b.1) + BigInt::from(b.0) * BigInt::from(a.1);
    let den = BigInt::from(2u8) * BigInt::from(a.1) * BigInt::from(b.1);
    Rational::from_big(num, den)
}

/// Exact maximum over x and t of `|{n in A : n x in Omega_t}|`, smallest x on ties.
pub fn best_dilation(a: &IntSet, p: KLParams) -> Result<DilationResult> {
    best_dilation_within(a, p, DEFAULT_BREAKPOINT_BUDGET)
}

pub fn best_dilation_within(a: &IntSet, p: KLParams, budget: u64) -> Result<DilationResult> {
    let mut best: Option<(usize, Rational, u32)> = None;
    for t in 1..=p.diff() {
        let cells = sweep(a, p, t, budget)?;
        let mut top: Option<&Cell> = None;
        for c in &cells {
            if top.is_none_or(|b| c.2 > b.2) {
                top = Some(c);
            }
        }
        if let Some(&(lo, hi, count)) = top {
            let x = midpoint(lo, hi);
            let better = match &best {
                None => true,
                Some((bc, bx, _)) => count > *bc || (count == *bc && x < *bx),
            };
            if better {
                best = Some((count, x, t));
            }
        }
    }
    let (count, x, t) = best.unwrap_or((0, Rational::zero(), 1));
    let subset = dilation_subset(a, &x, &omega(p, t)?);
    assert_eq!(subset.len(), count, "sweep count disagrees with exact membership at x = {x}");
    Ok(DilationResult { x, count, subset, t })
}

/// Dilation count on each breakpoint cell for one interval index, as
/// `(cell start, cell end, count)` in floating point for plotting.
pub fn dilation_profile(a: &IntSet, p: KLParams, t: u32, budget: u64) -> Result<Vec<(f64, f64, usize)>> {
    check_t(p, t)?;
    let f = |q: (u128, u128)| q.0 as f64 / q.1 as f64;
    Ok(sweep(a, p, t, budget)?.into_iter().map(|(lo, hi, c)| (f(lo), f(hi), c)).collect())
}
