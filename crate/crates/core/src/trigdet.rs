//! The sine/cosine determinant identities, Chebyshev polynomials, and the
//! small linear solves that produce the λ, α, β weights.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::KLParams;

pub const MAX_DIRECT_N: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DetKind {
    /// Rows `sin(i θ_j)`, i = 1..n.
    A,
    /// Rows `cos(i θ_j)`, i = 0..n-1.
    B,
}

pub fn det_matrix(kind: DetKind, theta: &[f64]) -> DMatrix<f64> {
    let n = theta.len();
    DMatrix::from_fn(n, n, |i, j| match kind {
        DetKind::A => ((i + 1) as f64 * theta[j]).sin(),
        DetKind::B => (i as f64 * theta[j]).cos(),
    })
}

fn vandermonde_cos(theta: &[f64]) -> f64 {
    let mut p = 1.0;
    for k in 0..theta.len() {
        for l in k + 1..theta.len() {
            p *= theta[l].cos() - theta[k].cos();
        }
    }
    p
}

/// Closed forms: `det A_n = 2^{n(n-1)/2} Π sin θ_k Π_{k<l}(cos θ_l - cos θ_k)`,
/// `det B_n = 2^{(n-1)(n-2)/2} Π_{k<l}(cos θ_l - cos θ_k)`.
pub fn det_closed(kind: DetKind, theta: &[f64]) -> f64 {
    let n = theta.len() as i32;
    match kind {
        DetKind::A => {
            let sines: f64 = theta.iter().map(|t| t.sin()).product();
            2f64.powi(n * (n - 1) / 2) * sines * vandermonde_cos(theta)
        }
        DetKind::B => 2f64.powi((n - 1) * (n - 2) / 2) * vandermonde_cos(theta),
    }
}

/// Determinant of the explicit matrix by partially pivoted LU.
pub fn det_direct(kind: DetKind, theta: &[f64]) -> Result<f64> {
    if theta.is_empty() || theta.len() > MAX_DIRECT_N {
        return Err(Error::Size(format!("n = {} outside 1..={MAX_DIRECT_N}", theta.len())));
    }
    Ok(det_matrix(kind, theta).lu().determinant())
}

/// Error of `value` against `reference`, relative above 1e-6 and scaled by 1e-6 below.
pub fn scaled_error(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(1e-6)
}

pub fn chebyshev_t(n: u32, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut a, mut b) = (1.0, x);
            for _ in 1..n {
                let c = 2.0 * x * b - a;
                a = b;
                b = c;
            }
            b
        }
    }
}

/// Integer coefficients of T_n, lowest degree first.
pub fn chebyshev_coefficients(n: u32) -> Vec<i128> {
    let mut prev = vec![1i128];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![0i128, 1];
    for _ in 1..n {
        let mut next = vec![0i128; cur.len() + 1];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += 2 * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// Leading coefficient of T_n from its n-th forward difference at unit step:
/// `Δ^n T_n(0) = n! a_n`.
pub fn chebyshev_leading_fd(n: u32) -> f64 {
    let mut diff = 0.0;
    let mut binom = 1.0;
    for j in 0..=n {
        let sign = if (n - j) % 2 == 0 { 1.0 } else { -1.0 };
        diff += sign * binom * chebyshev_t(n, j as f64);
        binom = binom * (n - j) as f64 / (j + 1) as f64;
    }
    let fact: f64 = (1..=n).map(|i| i as f64).product();
    diff / fact
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveTarget {
    /// `D λ = (0,…,0,1)` with `d_ij = sin(i(2j-1)π/(k-l))`.
    LambdaD(KLParams),
    /// `X α = (-1,0,…,0)` with `x_ij = sin(i(2j-1)π/u)`.
    AlphaX { u: u32 },
    /// `Y β = (1,0,…,0)` with `y_ij = sin((2i-1)(2j-1)π/(2u))`.
    BetaY { u: u32 },
}

impl fmt::Display for SolveTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveTarget::LambdaD(p) => write!(f, "lambda{p}"),
            SolveTarget::AlphaX { u } => write!(f, "alpha(u={u})"),
            SolveTarget::BetaY { u } => write!(f, "beta(u={u})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffSolve {
    pub target: SolveTarget,
    pub coeffs: Vec<f64>,
    /// Max-norm residual of the solved system.
    pub residual: f64,
    /// Known existence bound on the coefficient size for these weights.
    pub bound: f64,
    pub bound_ok: bool,
}

fn system(target: SolveTarget) -> Result<(DMatrix<f64>, DVector<f64>, f64)> {
    match target {
        SolveTarget::LambdaD(p) => {
            let m = p.diff();
            if m % 2 != 0 {
                return Err(Error::Domain(format!("k - l must be even for {p}")));
            }
            let h = (m / 2) as usize;
            let a = DMatrix::from_fn(h, h, |i, j| ((i + 1) as f64 * (2 * j + 1) as f64 * PI / m as f64).sin());
            let mut b = DVector::zeros(h);
            b[h - 1] = 1.0;
            Ok((a, b, (p.k() as f64).powi(p.k() as i32)))
        }
        SolveTarget::AlphaX { u } | SolveTarget::BetaY { u } => {
            if u < 2 || u % 2 != 0 {
                return Err(Error::Domain(format!("u must be even and >= 2, got {u}")));
            }
            let t = (u / 2) as usize;
            let alpha = matches!(target, SolveTarget::AlphaX { .. });
            let a = DMatrix::from_fn(t, t, |i, j| {
                let (r, c) = ((i + 1) as f64, (2 * j + 1) as f64);
                if alpha {
                    (r * c * PI / u as f64).sin()
                } else {
                    ((2.0 * r - 1.0) * c * PI / (2 * u) as f64).sin()
                }
            });
            let mut b = DVector::zeros(t);
            b[0] = if alpha { -1.0 } else { 1.0 };
            Ok((a, b, (t as f64).powi(t as i32)))
        }
    }
}

pub fn solve_coefficients(target: SolveTarget) -> Result<CoeffSolve> {
    let (a, b, bound) = system(target)?;
    let x = a
        .clone()
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Singular(format!("{target} system is singular")))?;
    let residual = (&a * &x - &b).amax();
    let coeffs: Vec<f64> = x.iter().copied().collect();
    let bound_ok = coeffs.iter().all(|c| c.abs() <= bound);
    Ok(CoeffSolve { target, coeffs, residual, bound, bound_ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        assert!((det_closed(DetKind::A, &[PI / 2.0]) - 1.0).abs() < 1e-15);
        let v = det_closed(DetKind::A, &[PI / 2.0, PI / 3.0]);
        assert!((v - 3f64.sqrt() / 2.0).abs() < 1e-15);
        let th = [0.3, 1.1];
        assert!((det_closed(DetKind::B, &th) - (1.1f64.cos() - 0.3f64.cos())).abs() < 1e-15);
    }

    #[test]
    fn direct_examples() {
        let v = det_direct(DetKind::A, &[PI / 2.0, PI / 3.0]).unwrap();
        assert!((v - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(det_direct(DetKind::A, &[0.7]).unwrap(), 0.7f64.sin());
        assert_eq!(det_direct(DetKind::B, &[0.4, 0.4, 1.0]).unwrap().abs(), 0.0);
        assert_eq!(det_closed(DetKind::B, &[0.4, 0.4, 1.0]), 0.0);
        assert!(det_direct(DetKind::A, &[0.1; 13]).is_err());
    }

    #[test]
    fn chebyshev_examples() {
        assert!((chebyshev_t(2, 0.5) + 0.5).abs() < 1e-15);
        assert!((chebyshev_t(3, (PI / 9.0).cos()) - 0.5).abs() < 1e-14);
        assert_eq!(chebyshev_t(0, 0.123), 1.0);
        assert_eq!(chebyshev_coefficients(3), vec![0, -3, 0, 4]);
        for n in 1..=10 {
            assert_eq!(*chebyshev_coefficients(n).last().unwrap(), 1i128 << (n - 1));
            assert!((chebyshev_leading_fd(n) - 2f64.powi(n as i32 - 1)).abs() < 1e-6);
        }
    }

    #[test]
    fn solve_examples() {
        let s = solve_coefficients(SolveTarget::LambdaD(KLParams::new(5, 1).unwrap())).unwrap();
        assert!((s.coeffs[0] - 0.5).abs() < 1e-12 && (s.coeffs[1] + 0.5).abs() < 1e-12);
        let s = solve_coefficients(SolveTarget::LambdaD(KLParams::new(3, 1).unwrap())).unwrap();
        assert!((s.coeffs[0] - 1.0).abs() < 1e-15);
        let s = solve_coefficients(SolveTarget::AlphaX { u: 2 }).unwrap();
        assert!((s.coeffs[0] + 1.0).abs() < 1e-15);
        assert!(solve_coefficients(SolveTarget::LambdaD(KLParams::new(4, 1).unwrap())).is_err());
        assert!(solve_coefficients(SolveTarget::BetaY { u: 3 }).is_err());
    }
}
