//! Fourier side of the interval construction: coefficients of the balanced
//! indicators f_t = 1_{Ω_t} - 1/(k+l), and truncated evaluation of f_t, of
//! their sum F, and of the λ-weighted combination G.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::charfns::beta_gamma;
use crate::error::{Error, Result};
use crate::params::KLParams;
use crate::trigdet::{solve_coefficients, SolveTarget};

/// Default distance kept from interval endpoints when comparing with indicators.
pub const DEFAULT_DELTA: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalancedFn {
    p: KLParams,
    t: u32,
}

impl BalancedFn {
    pub fn new(p: KLParams, t: u32) -> Result<Self> {
        if t == 0 || t > p.diff() {
            return Err(Error::Domain(format!("t = {t} outside 1..={} for {p}", p.diff())));
        }
        Ok(BalancedFn { p, t })
    }

    pub fn params(&self) -> KLParams {
        self.p
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    /// Endpoints of Ω_t as floats; the interval never wraps.
    pub fn endpoints(&self) -> (f64, f64) {
        let (k, l) = (self.p.k() as f64, self.p.l() as f64);
        let base = (self.t - 1) as f64 / (k - l);
        (base + l / (k * k - l * l), base + k / (k * k - l * l))
    }

    /// Centre of Ω_t, (2t-1)/(2(k-l)).
    pub fn centre(&self) -> f64 {
        (2 * self.t - 1) as f64 / (2 * self.p.diff()) as f64
    }

    /// Pointwise value `1_{Ω_t}(x) - 1/(k+l)`.
    pub fn value(&self, x: f64) -> f64 {
        let (lo, hi) = self.endpoints();
        let y = x.rem_euclid(1.0);
        let ind = if lo < y && y < hi { 1.0 } else { 0.0 };
        ind - 1.0 / self.p.sum() as f64
    }
}

/// `f̂_t(n) = e(-(2t-1)n/(2(k-l))) sin(nπ/(k+l)) / (π n)`, and 0 at n = 0.
pub fn fhat(f: BalancedFn, n: i64) -> Complex64 {
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let nf = n as f64;
    let amp = (nf * PI / f.p.sum() as f64).sin() / (PI * nf);
    Complex64::from_polar(amp, -2.0 * PI * nf * f.centre())
}

#[allow(clippy::too_many_arguments)]
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson integral of `f` over `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// `∫ 1_{Ω_t}(x) e(-n x) dx` by quadrature; the independent check on [`fhat`].
pub fn fhat_quadrature(f: BalancedFn, n: i64, tol: f64) -> Complex64 {
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let (lo, hi) = f.endpoints();
    let w = 2.0 * PI * n as f64;
    // a few panels per oscillation, otherwise the samples can alias onto a constant
    let panels = 4 * (n.unsigned_abs() as usize + 1);
    let h = (hi - lo) / panels as f64;
    let ptol = tol / panels as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for i in 0..panels {
        let (a, b) = (lo + i as f64 * h, lo + (i + 1) as f64 * h);
        re += integrate(&|x| (w * x).cos(), a, b, ptol);
        im += integrate(&|x| -(w * x).sin(), a, b, ptol);
    }
    Complex64::new(re, im)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Series {
    /// A single balanced indicator f_t.
    Ft(u32),
    /// The sum over all t.
    F,
    /// The λ-weighted combination (k - l even).
    G,
}

/// Order-`terms` truncation of the chosen series at `x`.
pub fn partial_sum(which: Series, p: KLParams, x: f64, terms: u64) -> Result<f64> {
    if terms == 0 {
        return Err(Error::Domain("truncation must be at least 1".into()));
    }
    let k_plus_l = p.sum() as f64;
    let m = p.diff() as f64;
    match which {
        Series::Ft(t) => {
            let f = BalancedFn::new(p, t)?;
            let c = f.centre();
            Ok((1..=terms)
                .map(|n| {
                    let n = n as f64;
                    2.0 / (PI * n) * (n * PI / k_plus_l).sin() * (2.0 * PI * n * (x - c)).cos()
                })
                .sum())
        }
        Series::F => {
            if p.diff() < 2 {
                return Err(Error::Domain(format!("F needs k - l >= 2, got {p}")));
            }
            let s: f64 = (1..=terms)
                .map(|n| {
                    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                    let n = n as f64;
                    sign / n * (m * n * PI / k_plus_l).sin() * (2.0 * PI * m * n * x).cos()
                })
                .sum();
            Ok(2.0 / PI * s)
        }
        Series::G => {
            if p.diff() < 2 || p.diff() % 2 != 0 {
                return Err(Error::Domain(format!("G needs k - l even and >= 2, got {p}")));
            }
            let mut s = 0.0;
            for q in 1..=terms {
                let (_, gamma) = beta_gamma(q as i64, p)?;
                if gamma != 0 {
                    let q = q as f64;
                    s += gamma as f64 / q * (m * q * PI / (2.0 * k_plus_l)).sin() * (PI * m * q * x).sin();
                }
            }
            Ok(4.0 / (PI * m) * s)
        }
    }
}

/// `Σ_{t in I1} λ_t f_t(x) - Σ_{t in I2} λ_{m+1-t} f_t(x)` from exact indicators.
pub fn lambda_combination(p: KLParams, lambda: &[f64], x: f64) -> Result<f64> {
    let m = p.diff() as usize;
    if m % 2 != 0 || lambda.len() != m / 2 {
        return Err(Error::Domain(format!("need k - l even and {} weights", m / 2)));
    }
    let mut s = 0.0;
    for t in 1..=m {
        let f = BalancedFn::new(p, t as u32)?.value(x);
        s += if t <= m / 2 { lambda[t - 1] * f } else { -lambda[m - t] * f };
    }
    Ok(s)
}

/// Distance from `x` to the nearest endpoint of any Ω_t, on the circle.
pub fn endpoint_distance(p: KLParams, x: f64) -> f64 {
    let y = x.rem_euclid(1.0);
    (1..=p.diff())
        .flat_map(|t| {
            let (a, b) = BalancedFn::new(p, t).unwrap().endpoints();
            [a, b]
        })
        .map(|e| {
            let d = (y - e).abs();
            d.min(1.0 - d)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Truncation tolerance model: partial sums of Σ sin(n·)/n converge like
/// 1/(T · distance to the jump).
pub fn truncation_tolerance(terms: u64, delta: f64) -> f64 {
    10.0 / (terms as f64 * delta) + 0.01
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CancellationReport {
    pub x: f64,
    pub terms: u64,
    pub f_series: f64,
    pub f_indicator: f64,
    pub f_residual: f64,
    pub g_series: Option<f64>,
    pub g_indicator: Option<f64>,
    pub g_residual: Option<f64>,
    pub tol: f64,
    pub pass: bool,
}

pub fn cancellation_check(p: KLParams, x: f64, terms: u64, delta: f64) -> Result<CancellationReport> {
    let dist = endpoint_distance(p, x);
    if dist < delta {
        return Err(Error::Domain(format!("x = {x} is {dist:.3e} from an endpoint, need {delta}")));
    }
    let f_series = partial_sum(Series::F, p, x, terms)?;
    let f_indicator: f64 = (1..=p.diff()).map(|t| BalancedFn::new(p, t).unwrap().value(x)).sum();
    let (g_series, g_indicator) = if p.diff() % 2 == 0 {
        let lambda = solve_coefficients(SolveTarget::LambdaD(p))?.coeffs;
        (Some(partial_sum(Series::G, p, x, terms)?), Some(lambda_combination(p, &lambda, x)?))
    } else {
        (None, None)
    };
    let f_residual = (f_series - f_indicator).abs();
    let g_residual = g_series.zip(g_indicator).map(|(a, b)| (a - b).abs());
    let tol = truncation_tolerance(terms, delta);
    let pass = f_residual <= tol && g_residual.is_none_or(|r| r <= tol);
    Ok(CancellationReport { x, terms, f_series, f_indicator, f_residual, g_series, g_indicator, g_residual, tol, pass })
}

/// A family parameter (u, v) together with the scale l; the pair it names is
/// k = (u+v) l / (u-v).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UVParams {
    pub u: u32,
    pub v: u32,
    pub l: u32,
}

impl UVParams {
    pub fn new(u: u32, v: u32, l: u32) -> Result<Self> {
        let uv = UVParams { u, v, l };
        uv.pair()?;
        Ok(uv)
    }

    pub fn pair(&self) -> Result<KLParams> {
        let UVParams { u, v, l } = *self;
        if u % 2 != 0 || v % 2 != 1 || v >= u || l == 0 {
            return Err(Error::Domain(format!("need u even, v odd, v < u, l >= 1; got ({u},{v},{l})")));
        }
        let num = (u + v) * l;
        if num % (u - v) != 0 {
            return Err(Error::Domain(format!("(u-v) = {} does not divide (u+v) l = {num}", u - v)));
        }
        let p = KLParams::new(num / (u - v), l)?;
        if p.diff() % 2 != 0 {
            return Err(Error::Domain(format!("{p} has odd k - l")));
        }
        Ok(p)
    }

    /// Whether `p` belongs to the family of this (u, v).
    pub fn admits(&self, p: KLParams) -> bool {
        (p.k() as u64) * (self.u - self.v) as u64 == (self.u + self.v) as u64 * p.l() as u64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescaleReport {
    pub f_diff: f64,
    pub g_diff: Option<f64>,
}

/// Compares `F_1(x/(k1-l1))` with `F_2(x/(k2-l2))`, and the (k-l)-scaled G's.
pub fn rescale_identity_check(uv: UVParams, p1: KLParams, p2: KLParams, x: f64, terms: u64) -> Result<RescaleReport> {
    if !uv.admits(p1) || !uv.admits(p2) {
        return Err(Error::Domain(format!("{p1} and {p2} are not both in the family of (u,v) = ({},{})", uv.u, uv.v)));
    }
    let (m1, m2) = (p1.diff() as f64, p2.diff() as f64);
    let f1 = partial_sum(Series::F, p1, x / m1, terms)?;
    let f2 = partial_sum(Series::F, p2, x / m2, terms)?;
    let g_diff = if p1.diff() % 2 == 0 && p2.diff() % 2 == 0 {
        let g1 = m1 * partial_sum(Series::G, p1, x / m1, terms)?;
        let g2 = m2 * partial_sum(Series::G, p2, x / m2, terms)?;
        Some((g1 - g2).abs())
    } else {
        None
    };
    Ok(RescaleReport { f_diff: (f1 - f2).abs(), g_diff })
}

/// `Σ_{|n| <= T} |f̂_t(n)|²`, which tends to `(1/(k+l))(1 - 1/(k+l))`.
pub fn parseval_sum(f: BalancedFn, terms: u64) -> f64 {
    2.0 * (1..=terms as i64).map(|n| fhat(f, n).norm_sqr()).sum::<f64>()
}

/// Maximum and mean absolute value of `Σ_{n in A} f_t(n x)` over the grid
/// `x = j / grid`, with exact rational membership.
pub fn dilated_sum_extremes(a: &crate::intset::IntSet, f: BalancedFn, grid: u64) -> (f64, f64) {
    let (k, l) = (f.p.k() as u128, f.p.l() as u128);
    let d = k * k - l * l;
    let base = (f.t - 1) as u128 * (k + l);
    let (lo, hi) = (base + l, base + k);
    let g = grid as u128;
    let shift = a.len() as f64 / f.p.sum() as f64;
    let mut max = f64::NEG_INFINITY;
    let mut l1 = 0.0;
    for j in 0..g {
        let hits = a
            .iter()
            .filter(|&n| {
                let r = (n as u128 * j) % g;
                lo * g < r * d && r * d < hi * g
            })
            .count();
        let v = hits as f64 - shift;
        max = max.max(v);
        l1 += v.abs();
    }
    (max, l1 / grid as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kl(k: u32, l: u32) -> KLParams {
        KLParams::new(k, l).unwrap()
    }

    #[test]
    fn fhat_examples() {
        let f = BalancedFn::new(kl(2, 1), 1).unwrap();
        let v = fhat(f, 1);
        assert!((v.re + 3f64.sqrt() / (2.0 * PI)).abs() < 1e-12 && v.im.abs() < 1e-12);
        assert_eq!(fhat(f, 0), Complex64::new(0.0, 0.0));
        assert!(fhat(BalancedFn::new(kl(3, 1), 1).unwrap(), 8).norm() < 1e-15);
    }

    #[test]
    fn fhat_matches_quadrature() {
        for (k, l) in [(2, 1), (3, 1), (5, 1), (7, 3)] {
            for t in 1..=k - l {
                let f = BalancedFn::new(kl(k, l), t).unwrap();
                for n in -12..=12 {
                    let d = (fhat(f, n) - fhat_quadrature(f, n, 1e-12)).norm();
                    assert!(d < 1e-9, "({k},{l}) t={t} n={n}: {d}");
                }
            }
        }
    }

    #[test]
    fn partial_sum_examples() {
        let big = 100_000;
        assert!((partial_sum(Series::F, kl(3, 1), 0.0, big).unwrap() + 0.5).abs() < 0.01);
        assert!((partial_sum(Series::Ft(1), kl(2, 1), 0.5, big).unwrap() - 2.0 / 3.0).abs() < 0.01);
        assert_eq!(partial_sum(Series::G, kl(3, 1), 0.0, 10).unwrap(), 0.0);
        assert!(partial_sum(Series::G, kl(4, 1), 0.1, 10).is_err());
        assert!(partial_sum(Series::F, kl(2, 1), 0.1, 10).is_err());
    }

    #[test]
    fn cancellation_examples() {
        let r = cancellation_check(kl(3, 1), 0.25, 100_000, DEFAULT_DELTA).unwrap();
        assert!((r.f_series - 0.5).abs() < 0.05);
        assert!((r.g_series.unwrap() - 1.0).abs() < 0.05);
        assert!(r.pass);
        let r = cancellation_check(kl(4, 2), 0.0, 100_000, DEFAULT_DELTA).unwrap();
        assert!((r.f_series + 1.0 / 3.0).abs() < 0.05);
        assert!(cancellation_check(kl(3, 1), 0.125, 100, DEFAULT_DELTA).is_err());
    }

    #[test]
    fn rescale_examples() {
        let uv = UVParams::new(2, 1, 1).unwrap();
        assert_eq!(uv.pair().unwrap(), kl(3, 1));
        let r = rescale_identity_check(uv, kl(3, 1), kl(6, 2), 0.2, 100_000).unwrap();
        assert!(r.f_diff <= 1e-3 && r.g_diff.unwrap() <= 1e-3);
        let same = rescale_identity_check(uv, kl(3, 1), kl(3, 1), 0.2, 1000).unwrap();
        assert_eq!((same.f_diff, same.g_diff), (0.0, Some(0.0)));
        let uv4 = UVParams::new(4, 1, 3).unwrap();
        assert_eq!(uv4.pair().unwrap(), kl(5, 3));
        let r = rescale_identity_check(uv4, kl(5, 3), kl(10, 6), 0.37, 100_000).unwrap();
        assert!(r.f_diff <= 1e-3 && r.g_diff.unwrap() <= 1e-3);
        assert!(rescale_identity_check(uv, kl(3, 1), kl(5, 1), 0.2, 10).is_err());
    }

    #[test]
    fn parseval_spot_check() {
        let f = BalancedFn::new(kl(3, 1), 2).unwrap();
        let want = 0.25 * 0.75;
        assert!((parseval_sum(f, 100_000) - want).abs() < 0.01);
    }

    #[test]
    fn max_dominates_half_l1() {
        let a = crate::intset::IntSet::new(vec![1, 2, 3, 5, 8, 13]).unwrap();
        let f = BalancedFn::new(kl(3, 1), 1).unwrap();
        let (max, l1) = dilated_sum_extremes(&a, f, 4096);
        assert!(max >= 0.5 * l1 - 1e-3, "max {max} l1 {l1}");
    }
}
