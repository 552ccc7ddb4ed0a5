//! Arithmetic weights: the Möbius function, the periodic characters that drive
//! the sieve, the factor-restricted integer sets, and Dirichlet convolution
//! coefficients between them. Everything here is exact integer arithmetic.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intset::IntSet;
use crate::params::KLParams;

/// Largest bound [`enumerate_factor_set`] will sieve up to.
pub const MAX_FACTOR_BOUND: u64 = 100_000_000;

/// Distinct prime factors with multiplicity, by trial division.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n) == [(n, 1)]
}

pub fn primes_upto(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let mut comp = vec![false; n as usize + 1];
    let mut out = Vec::new();
    for i in 2..=n as usize {
        if !comp[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n as usize {
                comp[j] = true;
                j += i;
            }
        }
    }
    out
}

pub fn mobius(n: u64) -> i64 {
    assert!(n >= 1, "mobius is defined on positive integers");
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharKind {
    Mobius,
    /// ψ: +1 on 1,2 and -1 on 4,5 mod 6.
    Psi,
    /// η: ±μ by residue mod 6.
    Eta,
    /// π: +1 on ±1 and -1 on ±5 mod 12.
    PiChar,
    PsiPrime,
    PiPrime,
    /// Φ_u: +1 on 1, u-1 and -1 on u+1, 2u-1 mod 2u.
    PhiU,
    /// Ψ_u: +1 on ±1 and -1 on ±(2u-1) mod 4u.
    PsiCapU,
}

/// A character, optionally multiplied pointwise by μ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CharSpec {
    pub kind: CharKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<u32>,
    #[serde(default)]
    pub times_mobius: bool,
}

impl CharSpec {
    pub fn new(kind: CharKind) -> Self {
        CharSpec { kind, u: None, times_mobius: false }
    }

    pub fn with_u(kind: CharKind, u: u32) -> Self {
        CharSpec { kind, u: Some(u), times_mobius: false }
    }

    pub fn twisted(self) -> Self {
        CharSpec { times_mobius: true, ..self }
    }

    fn u(&self) -> Result<u64> {
        match self.u {
            Some(u) if u >= 2 && u % 2 == 0 => Ok(u as u64),
            Some(u) => Err(Error::Domain(format!("u must be even and >= 2, got {u}"))),
            None => Err(Error::Domain(format!("{:?} needs a parameter u", self.kind))),
        }
    }
}

impl fmt::Display for CharSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.times_mobius {
            f.write_str("mu*")?;
        }
        let name = match self.kind {
            CharKind::Mobius => "mu",
            CharKind::Psi => "psi",
            CharKind::Eta => "eta",
            CharKind::PiChar => "pi",
            CharKind::PsiPrime => "psi'",
            CharKind::PiPrime => "pi'",
            CharKind::PhiU => "phi",
            CharKind::PsiCapU => "Psi",
        };
        f.write_str(name)?;
        if let Some(u) = self.u {
            write!(f, ":{u}")?;
        }
        Ok(())
    }
}

/// Accepts `psi`, `eta`, `pi`, `psi'`, `pi'`, `mu`, `phi:4`, `Psi:6`, with an
/// optional `mu*` prefix.
impl FromStr for CharSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (twist, rest) = match s.strip_prefix("mu*") {
            Some(r) => (true, r),
            None => (false, s),
        };
        let (name, u) = match rest.split_once(':') {
            Some((n, u)) => {
                let u = u.parse().map_err(|_| Error::Domain(format!("bad u in {s:?}")))?;
                (n, Some(u))
            }
            None => (rest, None),
        };
        let kind = match name {
            "mu" | "mobius" => CharKind::Mobius,
            "psi" => CharKind::Psi,
            "eta" => CharKind::Eta,
            "pi" => CharKind::PiChar,
            "psi'" | "psiprime" => CharKind::PsiPrime,
            "pi'" | "piprime" => CharKind::PiPrime,
            "phi" | "Phi" => CharKind::PhiU,
            "Psi" | "psiu" => CharKind::PsiCapU,
            _ => return Err(Error::Domain(format!("unknown character {s:?}"))),
        };
        let spec = CharSpec { kind, u, times_mobius: twist };
        if matches!(kind, CharKind::PhiU | CharKind::PsiCapU) {
            spec.u()?;
        }
        Ok(spec)
    }
}

fn psi(n: u64) -> i64 {
    match n % 6 {
        1 | 2 => 1,
        4 | 5 => -1,
        _ => 0,
    }
}

fn pi_char(n: u64) -> i64 {
    match n % 12 {
        1 | 11 => 1,
        5 | 7 => -1,
        _ => 0,
    }
}

pub fn char_value(spec: CharSpec, n: u64) -> Result<i64> {
    if n == 0 {
        return Err(Error::Domain("characters are evaluated at positive integers".into()));
    }
    let v = match spec.kind {
        CharKind::Mobius => mobius(n),
        CharKind::Psi => psi(n),
        CharKind::Eta => match n % 6 {
            1 | 4 => mobius(n),
            2 | 5 => -mobius(n),
            _ => 0,
        },
        CharKind::PiChar => pi_char(n),
        CharKind::PsiPrime => match n % 4 {
            1 | 3 => psi(n),
            2 => psi(n) + psi(n / 2),
            _ => 0,
        },
        CharKind::PiPrime => match n % 4 {
            1 | 3 => pi_char(n),
            2 => pi_char(n / 2),
            _ => 0,
        },
        CharKind::PhiU => {
            let u = spec.u()?;
            let r = n % (2 * u);
            if r == 1 || r == u - 1 {
                1
            } else if r == u + 1 || r == 2 * u - 1 {
                -1
            } else {
                0
            }
        }
        CharKind::PsiCapU => {
            let u = spec.u()?;
            let r = n % (4 * u);
            if r == 1 || r == 4 * u - 1 {
                1
            } else if r == 2 * u - 1 || r == 2 * u + 1 {
                -1
            } else {
                0
            }
        }
    };
    Ok(if spec.times_mobius { v * mobius(n) } else { v })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    /// n > 1 with every prime factor at least P.
    RoughN,
    /// Squarefree n with every prime factor at most P; includes 1.
    SmoothSquarefreeM,
    /// As `SmoothSquarefreeM`, and not divisible by 3.
    M1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactorSetSpec {
    pub kind: FactorKind,
    pub p: u64,
    pub bound: u64,
}

impl FactorSetSpec {
    pub fn new(kind: FactorKind, p: u64, bound: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::Domain(format!("threshold {p} is not prime")));
        }
        if bound == 0 {
            return Err(Error::Domain("bound must be at least 1".into()));
        }
        Ok(FactorSetSpec { kind, p, bound })
    }

    /// Membership by factorisation; ignores `bound`.
    pub fn contains(&self, n: u64) -> bool {
        if n == 0 {
            return false;
        }
        let f = factorize(n);
        match self.kind {
            FactorKind::RoughN => n > 1 && f.iter().all(|&(q, _)| q >= self.p),
            FactorKind::SmoothSquarefreeM => f.iter().all(|&(q, e)| e == 1 && q <= self.p),
            FactorKind::M1 => f.iter().all(|&(q, e)| e == 1 && q <= self.p && q != 3),
        }
    }
}

pub fn enumerate_factor_set(spec: FactorSetSpec) -> Result<IntSet> {
    if spec.bound > MAX_FACTOR_BOUND {
        return Err(Error::Budget(format!("bound {} above {MAX_FACTOR_BOUND}", spec.bound)));
    }
    let b = spec.bound as usize;
    // smallest prime factor sieve
    let mut spf = vec![0u32; b + 1];
    for i in 2..=b {
        if spf[i] == 0 {
            let mut j = i;
            while j <= b {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    let keep = |mut n: usize| -> bool {
        if n == 1 {
            return spec.kind != FactorKind::RoughN;
        }
        while n > 1 {
            let q = spf[n] as usize;
            n /= q;
            let ok = match spec.kind {
                FactorKind::RoughN => q as u64 >= spec.p,
                FactorKind::SmoothSquarefreeM => q as u64 <= spec.p && n % q != 0,
                FactorKind::M1 => q as u64 <= spec.p && n % q != 0 && q != 3,
            };
            if !ok {
                return false;
            }
        }
        true
    };
    Ok(IntSet::from_sorted((1..=b).filter(|&n| keep(n)).map(|n| n as u64).collect()))
}

/// `sum over m in set, m | n of weight(m) * target(n / m)`.
pub fn convolution_coefficient(n: u64, set: &FactorSetSpec, weight: CharSpec, target: CharSpec) -> Result<i64> {
    if n == 0 || n > set.bound {
        return Err(Error::Domain(format!("n = {n} outside 1..={}", set.bound)));
    }
    let mut total = 0;
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            for m in [d, n / d] {
                if set.contains(m) {
                    total += char_value(weight, m)? * char_value(target, n / m)?;
                }
                if d * d == n {
                    break;
                }
            }
        }
        d += 1;
    }
    Ok(total)
}

/// Every prime factor exceeds `p` (and n > 1).
fn rough_above(n: u64, p: u64) -> bool {
    n > 1 && factorize(n).iter().all(|&(q, _)| q > p)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerMismatch {
    pub n: u64,
    pub got: i64,
    pub expected: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerReport {
    pub p: u64,
    pub bound: u64,
    pub checked: u64,
    pub mismatches: Vec<LedgerMismatch>,
}

impl LedgerReport {
    pub fn pass(&self) -> bool {
        self.mismatches.is_empty()
    }
}

// The case analysis splits every n into the small-prime part handled by the
// sieve set (primes <= P) and a rough part; for that split to be a partition
// the rough side must use primes strictly above P.
fn ledger(p: u64, bound: u64, set: FactorSetSpec, weight: CharSpec, target: CharSpec, expect: impl Fn(u64) -> i64) -> Result<LedgerReport> {
    let mut mismatches = Vec::new();
    for n in 1..=bound {
        let got = convolution_coefficient(n, &set, weight, target)?;
        let expected = expect(n);
        if got != expected {
            mismatches.push(LedgerMismatch { n, got, expected });
        }
    }
    Ok(LedgerReport { p, bound, checked: bound, mismatches })
}

/// `sum over m in M1 of eta(m) psi(n/m)` against 1, 2, psi(n), psi(n)+psi(n/2), 0.
pub fn sieve_ledger_psi(p: u64, bound: u64) -> Result<LedgerReport> {
    let set = FactorSetSpec::new(FactorKind::M1, p, bound)?;
    ledger(p, bound, set, CharSpec::new(CharKind::Eta), CharSpec::new(CharKind::Psi), |n| match n {
        1 => 1,
        2 => 2,
        _ if n % 2 == 1 && rough_above(n, p) => psi(n),
        _ if n % 4 == 2 && rough_above(n / 2, p) => psi(n) + psi(n / 2),
        _ => 0,
    })
}

/// `sum over m in M of mu(m) pi(m) pi(n/m)` against [n = 1] + [n rough] pi(n).
pub fn sieve_ledger_pi(p: u64, bound: u64) -> Result<LedgerReport> {
    let set = FactorSetSpec::new(FactorKind::SmoothSquarefreeM, p, bound)?;
    let pi = CharSpec::new(CharKind::PiChar);
    ledger(p, bound, set, pi.twisted(), pi, |n| {
        (n == 1) as i64 + if rough_above(n, p) { pi_char(n) } else { 0 }
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultFailure {
    pub a: u64,
    pub b: u64,
    pub f_ab: i64,
    pub f_a_f_b: i64,
}

/// Coprime pairs `a, b >= 2` with `a b <= limit` and `f(ab) != f(a) f(b)`.
pub fn multiplicativity_failures(spec: CharSpec, limit: u64) -> Result<Vec<MultFailure>> {
    let mut out = Vec::new();
    for a in 2..=limit / 2 {
        for b in a + 1..=limit / a {
            if a.gcd(&b) != 1 {
                continue;
            }
            let f_ab = char_value(spec, a * b)?;
            let f_a_f_b = char_value(spec, a)? * char_value(spec, b)?;
            if f_ab != f_a_f_b {
                out.push(MultFailure { a, b, f_ab, f_a_f_b });
            }
        }
    }
    Ok(out)
}

/// `prod over primes p <= P of (1 + 1/p)`.
pub fn mertens_product(p: u64) -> Result<f64> {
    if p < 2 {
        return Err(Error::Domain("P must be at least 2".into()));
    }
    Ok(primes_upto(p).iter().map(|&q| 1.0 + 1.0 / q as f64).product())
}

fn even_gap(p: KLParams) -> Result<u32> {
    let m = p.diff();
    if m % 2 != 0 {
        return Err(Error::Domain(format!("k - l must be even for {p}")));
    }
    Ok(m)
}

/// `(-1)^s (k-l)` when n = (k-l) s, else 0.
pub fn alpha(n: i64, p: KLParams) -> Result<i64> {
    let m = p.diff() as i64;
    if m < 2 {
        return Err(Error::Domain(format!("alpha needs k - l >= 2, got {p}")));
    }
    if n % m != 0 {
        return Ok(0);
    }
    let s = n / m;
    Ok(if s % 2 == 0 { m } else { -m })
}

/// `sum over t = 1..k-l of cos((2t-1) n pi / (k-l))`.
pub fn alpha_cosine_sum(n: i64, p: KLParams) -> f64 {
    let m = p.diff() as f64;
    (1..=p.diff()).map(|t| ((2 * t - 1) as f64 * n as f64 * PI / m).cos()).sum()
}

/// `(beta(n), gamma(n))`: beta is 2(-1)^(s+1) at n = (k-l)(2s-1)/2 and 0
/// elsewhere; gamma(n) = beta((k-l) n / 2).
pub fn beta_gamma(n: i64, p: KLParams) -> Result<(i64, i64)> {
    let m = even_gap(p)? as i64;
    let beta = |n: i64| -> i64 {
        // n = (m/2) q with q odd
        let h = m / 2;
        if n % h != 0 {
            return 0;
        }
        let q = n / h;
        if q % 2 == 0 {
            return 0;
        }
        let s = (q + 1).div_euclid(2);
        if s % 2 == 0 { -2 } else { 2 }
    };
    Ok((beta(n), beta(m * n / 2)))
}

/// The λ-weighted sine sum that `beta` closes:
/// `sum_{t in I1} λ_t sin((2t-1)nπ/m) - sum_{t in I2} λ_{m+1-t} sin((2t-1)nπ/m)`.
pub fn beta_sine_sum(n: i64, p: KLParams, lambda: &[f64]) -> Result<f64> {
    let m = even_gap(p)? as usize;
    if lambda.len() != m / 2 {
        return Err(Error::Domain(format!("need {} lambda values, got {}", m / 2, lambda.len())));
    }
    let s = |t: usize| ((2 * t - 1) as f64 * n as f64 * PI / m as f64).sin();
    let first: f64 = (1..=m / 2).map(|t| lambda[t - 1] * s(t)).sum();
    let second: f64 = (m / 2 + 1..=m).map(|t| lambda[m - t] * s(t)).sum();
    Ok(first - second)
}

/// `(-1)^n sum_j α_j sin(n(2j-1)π/u)`: the coefficient pattern of the α-combined cosine series.
pub fn phi_from_alpha(n: u64, u: u32, alpha: &[f64]) -> f64 {
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let s: f64 = alpha
        .iter()
        .enumerate()
        .map(|(j, a)| a * (n as f64 * (2 * j + 1) as f64 * PI / u as f64).sin())
        .sum();
    sign * s
}

/// For odd n, `(-1)^((n-1)/2) sum_j β_j sin((2j-1)nπ/(2u))`; 0 for even n.
pub fn psi_from_beta(n: u64, u: u32, beta: &[f64]) -> f64 {
    if n % 2 == 0 {
        return 0.0;
    }
    let sign = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let s: f64 = beta
        .iter()
        .enumerate()
        .map(|(j, b)| b * ((2 * j + 1) as f64 * n as f64 * PI / (2 * u) as f64).sin())
        .sum();
    sign * s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kl(k: u32, l: u32) -> KLParams {
        KLParams::new(k, l).unwrap()
    }

    #[test]
    fn mobius_examples() {
        assert_eq!((mobius(1), mobius(6), mobius(12), mobius(30)), (1, 1, 0, -1));
        for n in 1..=2000u64 {
            let s: i64 = (1..=n).filter(|d| n % d == 0).map(mobius).sum();
            assert_eq!(s, (n == 1) as i64, "n = {n}");
        }
    }

    #[test]
    fn char_examples() {
        assert_eq!(char_value(CharSpec::new(CharKind::Psi), 4).unwrap(), -1);
        assert_eq!(char_value(CharSpec::new(CharKind::Eta), 2).unwrap(), 1);
        assert_eq!(char_value(CharSpec::with_u(CharKind::PhiU, 4), 7).unwrap(), -1);
        assert!(char_value(CharSpec::new(CharKind::PhiU), 7).is_err());
        assert!(char_value(CharSpec::with_u(CharKind::PhiU, 3), 7).is_err());
        // ψ' and π' dispatch on the 2-adic valuation
        let pp = CharSpec::new(CharKind::PsiPrime);
        assert_eq!(char_value(pp, 2).unwrap(), 2);
        assert_eq!(char_value(pp, 10).unwrap(), -1 + -1);
        assert_eq!(char_value(pp, 4).unwrap(), 0);
        let pip = CharSpec::new(CharKind::PiPrime);
        assert_eq!(char_value(pip, 22).unwrap(), 1);
        assert_eq!(char_value(pip, 10).unwrap(), -1);
        assert_eq!(char_value(pip, 12).unwrap(), 0);
    }

    #[test]
    fn spec_text() {
        for s in ["psi", "eta", "pi", "psi'", "pi'", "mu", "phi:4", "Psi:6", "mu*pi"] {
            let c: CharSpec = s.parse().unwrap();
            assert_eq!(c.to_string().parse::<CharSpec>().unwrap(), c);
        }
        assert!("phi".parse::<CharSpec>().is_err());
        assert!("chi".parse::<CharSpec>().is_err());
    }

    #[test]
    fn psi_is_not_multiplicative() {
        let psi = CharSpec::new(CharKind::Psi);
        assert_eq!(char_value(psi, 4).unwrap(), -1);
        assert_eq!(char_value(psi, 2).unwrap().pow(2), 1);
    }

    #[test]
    fn factor_set_examples() {
        let r = enumerate_factor_set(FactorSetSpec::new(FactorKind::RoughN, 7, 60).unwrap()).unwrap();
        assert_eq!(r.as_slice(), &[7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 49, 53, 59]);
        let m1 = enumerate_factor_set(FactorSetSpec::new(FactorKind::M1, 7, 15).unwrap()).unwrap();
        assert_eq!(m1.as_slice(), &[1, 2, 5, 7, 10, 14]);
        let m = enumerate_factor_set(FactorSetSpec::new(FactorKind::SmoothSquarefreeM, 3, 10).unwrap()).unwrap();
        assert_eq!(m.as_slice(), &[1, 2, 3, 6]);
        assert!(FactorSetSpec::new(FactorKind::M1, 8, 10).is_err());
    }

    #[test]
    fn enumeration_agrees_with_membership() {
        for kind in [FactorKind::RoughN, FactorKind::SmoothSquarefreeM, FactorKind::M1] {
            let spec = FactorSetSpec::new(kind, 11, 3000).unwrap();
            let e = enumerate_factor_set(spec).unwrap();
            for n in 1..=3000 {
                assert_eq!(e.contains(n), spec.contains(n), "{kind:?} {n}");
            }
        }
    }

    #[test]
    fn convolution_examples() {
        let m1 = FactorSetSpec::new(FactorKind::M1, 101, 100).unwrap();
        let (eta, psi) = (CharSpec::new(CharKind::Eta), CharSpec::new(CharKind::Psi));
        assert_eq!(convolution_coefficient(1, &m1, eta, psi).unwrap(), 1);
        assert_eq!(convolution_coefficient(2, &m1, eta, psi).unwrap(), 2);
        assert_eq!(convolution_coefficient(4, &m1, eta, psi).unwrap(), 0);
        assert!(convolution_coefficient(101, &m1, eta, psi).is_err());
    }

    #[test]
    fn ledgers_at_small_p() {
        for p in [5, 7, 13] {
            assert!(sieve_ledger_psi(p, 3000).unwrap().pass(), "psi ledger P={p}");
            assert!(sieve_ledger_pi(p, 3000).unwrap().pass(), "pi ledger P={p}");
        }
    }

    #[test]
    fn mertens_examples() {
        assert!((mertens_product(3).unwrap() - 2.0).abs() < 1e-12);
        assert!((mertens_product(7).unwrap() - 576.0 / 210.0).abs() < 1e-12);
        assert!(mertens_product(1).is_err());
    }

    #[test]
    fn alpha_examples() {
        let p = kl(5, 1);
        assert_eq!(alpha(4, p).unwrap(), -4);
        assert_eq!(alpha(3, p).unwrap(), 0);
        assert_eq!(alpha(8, p).unwrap(), 4);
        assert!(alpha(1, kl(2, 1)).is_err());
    }

    #[test]
    fn beta_examples() {
        let p = kl(5, 1);
        assert_eq!(beta_gamma(2, p).unwrap().0, 2);
        assert_eq!(beta_gamma(4, p).unwrap().0, 0);
        assert_eq!(beta_gamma(6, p).unwrap().0, -2);
        assert_eq!(beta_gamma(1, p).unwrap().1, 2);
        assert_eq!(beta_gamma(3, p).unwrap().1, -2);
        assert!(beta_gamma(1, kl(4, 1)).is_err());
        // λ = (1/2, -1/2) for (5,1)
        for n in 1..60 {
            let s = beta_sine_sum(n, p, &[0.5, -0.5]).unwrap();
            assert!((s - beta_gamma(n, p).unwrap().0 as f64).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn beta_is_odd() {
        let p = kl(9, 1);
        for n in 1..200 {
            assert_eq!(beta_gamma(-n, p).unwrap().0, -beta_gamma(n, p).unwrap().0);
        }
    }
}
