//! Finite-scale density experiments: multiplicative Fölner boxes, density
//! profiles, the periodic density bounds, and periodic sum-free residue sets.
//!
//! Upper densities are limsups over infinite sets, so everything here is a
//! finite proxy and is flagged as such. The residue test is exact: a periodic
//! set with residue set R mod D is (k,l)-sum-free iff kR and lR are disjoint
//! mod D. If they meet mod D, shifting summands by multiples of D inside one
//! side closes the gap, because every residue class occurring in a sumset is
//! eventually full.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charfns::primes_upto;
use crate::error::{Error, Result};
use crate::exact::max_sum_free_subset;
use crate::intset::IntSet;
use crate::params::KLParams;
use crate::rational::Rational;

/// Largest Fölner box generated.
pub const MAX_FOLNER_SIZE: u64 = 1_000_000;
/// Copies of each residue used by [`residue_truncation`].
pub const TRUNCATION_PERIODS: u64 = 51;

/// Φ_m = {∏ p_i^{a_i} : 0 <= a_i <= m} over the listed primes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FolnerSpec {
    pub m: u32,
    pub primes: Vec<u64>,
}

impl FolnerSpec {
    pub fn new(m: u32, primes: Vec<u64>) -> Result<Self> {
        if let Some(&q) = primes.iter().find(|&&q| !crate::charfns::is_prime(q)) {
            return Err(Error::Domain(format!("{q} is not prime")));
        }
        let mut sorted = primes.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != primes.len() {
            return Err(Error::Domain("repeated prime".into()));
        }
        Ok(FolnerSpec { m, primes })
    }

    /// The first `r` primes; the usual choice is r = m.
    pub fn first_primes(m: u32, r: usize) -> Self {
        let mut bound = 16u64;
        loop {
            let ps = primes_upto(bound);
            if ps.len() >= r {
                return FolnerSpec { m, primes: ps[..r].to_vec() };
            }
            bound *= 2;
        }
    }
}

pub fn folner_set(spec: &FolnerSpec) -> Result<IntSet> {
    let side = spec.m as u64 + 1;
    let size = spec
        .primes
        .iter()
        .try_fold(1u64, |acc, _| acc.checked_mul(side).filter(|&s| s <= MAX_FOLNER_SIZE));
    if size.is_none() {
        return Err(Error::Budget(format!("(m+1)^r above {MAX_FOLNER_SIZE}")));
    }
    let mut out = vec![1u64];
    for &q in &spec.primes {
        let mut next = Vec::with_capacity(out.len() * side as usize);
        for &x in &out {
            let mut v = x;
            for e in 0..=spec.m {
                next.push(v);
                if e < spec.m {
                    v = v.checked_mul(q).ok_or_else(|| Error::Range(format!("{x}·{q}^{} overflows", e + 1)))?;
                }
            }
        }
        out = next;
    }
    out.sort_unstable();
    Ok(IntSet::from_sorted(out))
}

/// |Φ_m △ aΦ_m| / |Φ_m|.
pub fn folner_defect(spec: &FolnerSpec, a: u64) -> Result<Rational> {
    if a == 0 {
        return Err(Error::Domain("a must be positive".into()));
    }
    let phi = folner_set(spec)?;
    let shared = phi
        .iter()
        .filter(|&x| x % a == 0 && phi.contains(x / a))
        .count() as i64;
    let n = phi.len() as i64;
    Ok(Rational::new(2 * (n - shared), n))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityProfile {
    /// Entry i is |A ∩ [i+1]| / (i+1).
    pub values: Vec<Rational>,
    pub finite_scale_proxy: bool,
}

pub fn density_profile(a: &IntSet, horizon: u64) -> DensityProfile {
    let mut count = 0i64;
    let mut it = a.iter().peekable();
    let values = (1..=horizon)
        .map(|n| {
            while it.next_if(|&x| x <= n).is_some() {
                count += 1;
            }
            Rational::new(count, n as i64)
        })
        .collect();
    DensityProfile { values, finite_scale_proxy: true }
}

/// |A ∩ (N!·[n])| / n.
pub fn density_on_multiples_profile(a: &IntSet, nfact: u32, n: u64) -> Result<Rational> {
    if nfact > 20 {
        return Err(Error::Range(format!("{nfact}! does not fit in 64 bits")));
    }
    if n == 0 {
        return Err(Error::Domain("horizon must be positive".into()));
    }
    let f: u64 = (1..=nfact as u64).product();
    let hits = a.iter().filter(|&x| x % f == 0 && x / f <= n).count();
    Ok(Rational::new(hits as i64, n as i64))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidueSet {
    pub d: u64,
    /// Residues written in 1..=d, with d standing for the zero class.
    pub residues: Vec<u64>,
}

impl ResidueSet {
    pub fn new(d: u64, mut residues: Vec<u64>) -> Result<Self> {
        residues.sort_unstable();
        residues.dedup();
        if d == 0 || residues.is_empty() || residues[0] == 0 || *residues.last().unwrap() > d {
            return Err(Error::Domain(format!("residues must be a nonempty subset of 1..={d}")));
        }
        Ok(ResidueSet { d, residues })
    }
}

fn residue_sumset(r: &ResidueSet, k: u32) -> Vec<bool> {
    let d = r.d as usize;
    let mut cur = vec![false; d];
    cur[0] = true;
    for _ in 0..k {
        let mut next = vec![false; d];
        for (s, _) in cur.iter().enumerate().filter(|(_, &b)| b) {
            for &x in &r.residues {
                next[(s + x as usize) % d] = true;
            }
        }
        cur = next;
    }
    cur
}

pub fn periodic_residue_sum_free(r: &ResidueSet, p: KLParams) -> bool {
    let ks = residue_sumset(r, p.k());
    let ls = residue_sumset(r, p.l());
    !ks.iter().zip(&ls).any(|(a, b)| *a && *b)
}

/// R + D·[0..50].
pub fn residue_truncation(r: &ResidueSet) -> IntSet {
    IntSet::new(
        (0..TRUNCATION_PERIODS)
            .flat_map(|j| r.residues.iter().map(move |&x| x + j * r.d))
            .collect(),
    )
    .expect("distinct positive values")
}

/// Periodic density bounds: (m+K-2)/(Km + 2(K-2)) in general, and
/// (m-2)/(K(m-K) + 2(K-2)) in the restricted case, with K = k + l.
pub fn density_bound(m: u64, p: KLParams, restricted: bool) -> Result<Rational> {
    let kk = p.sum() as i64;
    let m = i64::try_from(m).map_err(|_| Error::Range("m too large".into()))?;
    if m < 1 {
        return Err(Error::Domain("m must be at least 1".into()));
    }
    if restricted {
        if m <= kk {
            return Err(Error::Domain(format!("restricted bound needs m > k + l = {kk}, got {m}")));
        }
        Ok(Rational::new(m - 2, kk * (m - kk) + 2 * (kk - 2)))
    } else {
        Ok(Rational::new(m + kk - 2, kk * m + 2 * (kk - 2)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FolnerReport {
    pub m: u32,
    pub size: usize,
    pub best: usize,
    pub fraction: Rational,
    pub witness: IntSet,
    /// fraction >= 1/(k+l) - 1/|Φ_m|.
    pub lower_ok: bool,
    /// fraction >= ⌈|Φ_m|/(k+l)⌉ / |Φ_m|.
    pub ceil_ok: bool,
    pub finite_scale_proxy: bool,
}

pub fn folner_experiment(spec: &FolnerSpec, p: KLParams, restricted: bool) -> Result<FolnerReport> {
    let phi = folner_set(spec)?;
    let sol = max_sum_free_subset(&phi, p, restricted)?;
    let n = phi.len() as i64;
    let kk = p.sum() as i64;
    let fraction = Rational::new(sol.size as i64, n);
    let floor = &Rational::new(1, kk) - &Rational::new(1, n);
    let ceil = Rational::new((n + kk - 1) / kk, n);
    Ok(FolnerReport {
        m: spec.m,
        size: phi.len(),
        best: sol.size,
        lower_ok: fraction >= floor,
        ceil_ok: fraction >= ceil,
        fraction,
        witness: sol.witness,
        finite_scale_proxy: true,
    })
}

/// One experiment per level, in parallel, reported in level order.
pub fn folner_trend(primes: &[u64], levels: &[u32], p: KLParams, restricted: bool) -> Result<Vec<FolnerReport>> {
    levels
        .par_iter()
        .map(|&m| folner_experiment(&FolnerSpec::new(m, primes.to_vec())?, p, restricted))
        .collect()
}
