//! The test function Φ pairing large against Σ e^{imx} and small against
//! rough-number dilates.
//!
//! Trigonometric polynomials live on ℝ/2πℤ with basis e^{inx}. Blocks are
//! filled greedily with sizes b^0, b^1, ... and the leftover elements form
//! the last block. Exponentials of |P̃_k| are not polynomials, so Q_k is
//! computed on an FFT grid and then cut back to its Fejér window.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::charfns::{char_value, enumerate_factor_set, is_prime, CharSpec, FactorKind, FactorSetSpec};
use crate::error::{Error, Result};
use crate::intset::IntSet;

/// Cap on the number of (n, m) terms in an H series.
pub const DEFAULT_TERM_BUDGET: u64 = 10_000_000;
/// Trailing-octave energy allowed in a sampled transform, relative to total.
pub const ALIAS_TOLERANCE: f64 = 1e-8;
pub const MAX_GRID: usize = 1 << 22;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Finitely supported Fourier series.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    coeffs: BTreeMap<i64, Complex64>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        TrigPoly::default()
    }

    pub fn constant(c: Complex64) -> Self {
        TrigPoly::monomial(0, c)
    }

    pub fn monomial(n: i64, c: Complex64) -> Self {
        let mut p = TrigPoly::zero();
        p.add_term(n, c);
        p
    }

    pub fn from_coeffs(it: impl IntoIterator<Item = (i64, Complex64)>) -> Self {
        let mut p = TrigPoly::zero();
        for (n, c) in it {
            p.add_term(n, c);
        }
        p
    }

    pub fn add_term(&mut self, n: i64, c: Complex64) {
        let e = self.coeffs.entry(n).or_insert(ZERO);
        *e += c;
        if *e == ZERO {
            self.coeffs.remove(&n);
        }
    }

    pub fn coeff(&self, n: i64) -> Complex64 {
        self.coeffs.get(&n).copied().unwrap_or(ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&n, &c)| (n, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    /// Smallest and largest frequency carried.
    pub fn support(&self) -> Option<(i64, i64)> {
        Some((*self.coeffs.keys().next()?, *self.coeffs.keys().next_back()?))
    }

    pub fn max_abs_freq(&self) -> u64 {
        self.support().map_or(0, |(a, b)| a.unsigned_abs().max(b.unsigned_abs()))
    }

    /// Conjugate symmetry up to `tol`, i.e. real-valued.
    pub fn is_real(&self, tol: f64) -> bool {
        self.iter().all(|(n, c)| (c - self.coeff(-n).conj()).norm() <= tol)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        TrigPoly::from_coeffs(self.iter().map(|(n, c)| (n, c * s)))
    }

    pub fn map_coeffs(&self, f: impl Fn(i64, Complex64) -> Complex64) -> Self {
        TrigPoly::from_coeffs(self.iter().map(|(n, c)| (n, f(n, c))))
    }

    /// Keeps frequencies with |n| <= r.
    pub fn project(&self, r: u64) -> Self {
        TrigPoly::from_coeffs(self.iter().filter(|(n, _)| n.unsigned_abs() <= r))
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.iter().map(|(n, c)| c * Complex64::from_polar(1.0, n as f64 * x)).sum()
    }

    /// L² norm for the normalised measure on the circle.
    pub fn l2_norm(&self) -> f64 {
        self.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Sum of |coefficient|.
    pub fn l1_coeff_mass(&self) -> f64 {
        self.iter().map(|(_, c)| c.norm()).sum()
    }

    /// Values at x_j = 2πj/grid, j = 0..grid.
    pub fn sample(&self, grid: usize) -> Result<Vec<Complex64>> {
        if 2 * self.max_abs_freq() as u128 >= grid as u128 {
            return Err(Error::Resolution(format!(
                "frequency {} does not fit a grid of {grid}",
                self.max_abs_freq()
            )));
        }
        let mut buf = vec![ZERO; grid];
        for (n, c) in self.iter() {
            buf[n.rem_euclid(grid as i64) as usize] += c;
        }
        FftPlanner::new().plan_fft_inverse(grid).process(&mut buf);
        Ok(buf)
    }
}

impl Add for &TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        let mut out = self.clone();
        for (n, c) in rhs.iter() {
            out.add_term(n, c);
        }
        out
    }
}

impl Sub for &TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: &TrigPoly) -> TrigPoly {
        let mut out = self.clone();
        for (n, c) in rhs.iter() {
            out.add_term(n, -c);
        }
        out
    }
}

impl Mul for &TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: &TrigPoly) -> TrigPoly {
        let mut acc: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (a, x) in self.iter() {
            for (b, y) in rhs.iter() {
                *acc.entry(a + b).or_insert(ZERO) += x * y;
            }
        }
        TrigPoly::from_coeffs(acc)
    }
}

/// Fourier coefficients of grid samples, frequencies in [-grid/2, grid/2).
fn analyse(samples: &[Complex64]) -> Vec<(i64, Complex64)> {
    let g = samples.len();
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(g).process(&mut buf);
    let scale = 1.0 / g as f64;
    buf.into_iter()
        .enumerate()
        .map(|(i, c)| (if i < g / 2 { i as i64 } else { i as i64 - g as i64 }, c * scale))
        .collect()
}

/// Energy in |n| >= grid/4 relative to total.
fn trailing_energy(spec: &[(i64, Complex64)], grid: usize) -> f64 {
    let total: f64 = spec.iter().map(|(_, c)| c.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let cut = (grid / 4) as u64;
    spec.iter().filter(|(n, _)| n.unsigned_abs() >= cut).map(|(_, c)| c.norm_sqr()).sum::<f64>() / total
}

fn guard(spec: &[(i64, Complex64)], grid: usize, what: &str) -> Result<f64> {
    let e = trailing_energy(spec, grid);
    if e >= ALIAS_TOLERANCE {
        return Err(Error::Resolution(format!(
            "{what}: trailing-octave energy {e:.3e} on a grid of {grid}"
        )));
    }
    Ok(e)
}

pub fn fejer(m: u64) -> Result<TrigPoly> {
    if m == 0 {
        return Err(Error::Domain("Fejér kernel needs M >= 1".into()));
    }
    let mi = m as i64;
    Ok(TrigPoly::from_coeffs(
        (1 - mi..mi).map(|n| (n, Complex64::new((mi - n.abs()) as f64 / m as f64, 0.0))),
    ))
}

/// n ↦ -i sgn(n) f̂(n). Real input comes back exactly conjugate-symmetric.
pub fn hilbert(f: &TrigPoly) -> TrigPoly {
    let raw = f.map_coeffs(|n, c| c * Complex64::new(0.0, -(n.signum() as f64)));
    if !f.is_real(1e-12) {
        return raw;
    }
    TrigPoly::from_coeffs(raw.iter().filter(|&(n, _)| n > 0).flat_map(|(n, c)| {
        let c = 0.5 * (c + raw.coeff(-n).conj());
        [(n, c), (-n, c.conj())]
    }))
}

/// ⟨f, g⟩ = Σ f̂(n) conj(ĝ(n)).
pub fn inner_product(f: &TrigPoly, g: &TrigPoly) -> Complex64 {
    let (small, big, swap) = if f.len() <= g.len() { (f, g, false) } else { (g, f, true) };
    small
        .iter()
        .map(|(n, c)| {
            let d = big.coeff(n);
            if swap { d * c.conj() } else { c * d.conj() }
        })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestFunctionSpec {
    pub a: IntSet,
    pub r0: u64,
    pub base: u64,
    pub grid: usize,
    /// Set when no grid was given: on an aliasing failure the grid doubles,
    /// up to [`MAX_GRID`].
    #[serde(default)]
    pub refine: bool,
}

impl TestFunctionSpec {
    pub fn new(a: IntSet, r0: u64, base: u64, grid: Option<usize>) -> Result<Self> {
        if r0 == 0 {
            return Err(Error::Domain("r0 must be positive".into()));
        }
        if base < 2 {
            return Err(Error::Domain(format!("block base must be >= 2, got {base}")));
        }
        if (a.len() as u64) < 1 + base {
            return Err(Error::Size(format!("|A| = {} is below 1 + base = {}", a.len(), 1 + base)));
        }
        let top = IntSet::max(&a).unwrap();
        let refine = grid.is_none();
        let grid = grid.unwrap_or_else(|| usize::next_power_of_two(8 * top as usize));
        if !grid.is_power_of_two() {
            return Err(Error::Domain(format!("grid {grid} is not a power of two")));
        }
        if (grid as u128) < 4 * top as u128 {
            return Err(Error::Resolution(format!("grid {grid} is below 4 * max A = {}", 4 * top)));
        }
        if grid > MAX_GRID {
            return Err(Error::Budget(format!("grid {grid} above {MAX_GRID}")));
        }
        Ok(TestFunctionSpec { a, r0, base, grid, refine })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub elements: IntSet,
    /// I_k = [lo, hi].
    pub lo: u64,
    pub hi: u64,
    /// Integer centre, so the shifted Fejér kernel stays a genuine kernel.
    pub xi: u64,
}

impl Block {
    /// Fejér order M = hi - lo + 1; weights are positive exactly on |n - xi| <= hi - lo.
    pub fn width(&self) -> u64 {
        self.hi - self.lo + 1
    }
}

pub fn build_blocks(spec: &TestFunctionSpec) -> Result<Vec<Block>> {
    let n = spec.a.len() as u64;
    if n < 1 + spec.base {
        return Err(Error::Size(format!("|A| = {n} is below 1 + base")));
    }
    let mut sizes = Vec::new();
    let (mut used, mut next) = (0u64, 1u64);
    while used + next < n {
        sizes.push(next);
        used += next;
        next = next.saturating_mul(spec.base);
    }
    sizes.push(n - used);
    let elems = spec.a.as_slice();
    let mut start = 0;
    Ok(sizes
        .into_iter()
        .map(|s| {
            let part = &elems[start..start + s as usize];
            start += s as usize;
            let (lo, hi) = (part[0], part[part.len() - 1]);
            Block { elements: IntSet::from_sorted(part.to_vec()), lo, hi, xi: lo + (hi - lo) / 2 }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockPQ {
    pub ptilde: TrigPoly,
    pub p: TrigPoly,
    pub q: TrigPoly,
    /// ℓ¹ share of Q̂_k that sat at positive frequencies before truncation.
    pub q_outside_mass: f64,
    /// Worst trailing-octave energy seen in the two sampled transforms.
    pub alias_energy: f64,
}

pub fn build_pq(block: &Block, spec: &TestFunctionSpec) -> Result<BlockPQ> {
    let b = block.elements.len() as f64;
    let ptilde = TrigPoly::from_coeffs(block.elements.iter().map(|m| (m as i64, Complex64::new(1.0 / b, 0.0))));
    let m = block.width();
    let mi = m as i64;
    let xi = block.xi as i64;
    let weight = |d: i64| (mi - d.abs()).max(0) as f64 / m as f64;
    let p = ptilde.map_coeffs(|n, c| c * weight(n - xi));

    let grid = spec.grid;
    let abs: Vec<Complex64> = ptilde.sample(grid)?.into_iter().map(|v| Complex64::new(v.norm(), 0.0)).collect();
    let c = analyse(&abs);
    let e1 = guard(&c, grid, "|P̃|")?;
    // |P̃| - iℋ|P̃| keeps the mean and doubles the negative frequencies
    let mut zhat = vec![ZERO; grid];
    for &(n, v) in &c {
        let s = match n.signum() {
            1 => ZERO,
            0 => v,
            _ => 2.0 * v,
        };
        zhat[n.rem_euclid(grid as i64) as usize] = s;
    }
    FftPlanner::new().plan_fft_inverse(grid).process(&mut zhat);
    let ez: Vec<Complex64> = zhat.into_iter().map(|z| (-z).exp()).collect();
    let e = analyse(&ez);
    let e2 = guard(&e, grid, "exp(-z)")?;

    let windowed: Vec<(i64, Complex64)> =
        e.into_iter().filter(|&(n, _)| n.abs() < mi).map(|(n, v)| (n, v * weight(n))).collect();
    let total: f64 = windowed.iter().map(|(_, v)| v.norm()).sum();
    let outside: f64 = windowed.iter().filter(|&&(n, _)| n > 0).map(|(_, v)| v.norm()).sum();
    let q = TrigPoly::from_coeffs(windowed.into_iter().filter(|&(n, _)| n <= 0));
    Ok(BlockPQ {
        ptilde,
        p,
        q,
        q_outside_mass: if total > 0.0 { outside / total } else { 0.0 },
        alias_energy: e1.max(e2),
    })
}

/// G = Σ_{λ∈Λ} Σ_{m∈A} e^{iλmx}; the construction uses Λ = {1, r0}.
pub fn g_series(a: &IntSet, multipliers: &[u64]) -> TrigPoly {
    let one = Complex64::new(1.0, 0.0);
    TrigPoly::from_coeffs(multipliers.iter().flat_map(|&l| a.iter().map(move |m| ((l * m) as i64, one))))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub spec: TestFunctionSpec,
    pub blocks: Vec<Block>,
    pub pq: Vec<BlockPQ>,
    pub phi: TrigPoly,
}

impl TestFunction {
    /// Φ = Σ_k P_k Q_{k+1} ⋯ Q_{k₀}, evaluated pointwise on the grid.
    pub fn explicit_on_grid(&self) -> Result<Vec<Complex64>> {
        let g = self.spec.grid;
        let mut acc = vec![ZERO; g];
        let mut tail = vec![Complex64::new(1.0, 0.0); g];
        for pq in self.pq.iter().rev() {
            let p = pq.p.sample(g)?;
            for j in 0..g {
                acc[j] += p[j] * tail[j];
            }
            let q = pq.q.sample(g)?;
            for j in 0..g {
                tail[j] *= q[j];
            }
        }
        Ok(acc)
    }
}

/// Φ_0 = P_0, Φ_k = Q_k Φ_{k-1} + P_k.
pub fn build_phi(spec: &TestFunctionSpec) -> Result<TestFunction> {
    let mut spec = spec.clone();
    loop {
        match build_phi_on_grid(&spec) {
            Err(Error::Resolution(_)) if spec.refine && spec.grid < MAX_GRID => spec.grid *= 2,
            other => return other,
        }
    }
}

fn build_phi_on_grid(spec: &TestFunctionSpec) -> Result<TestFunction> {
    let blocks = build_blocks(spec)?;
    let pq = blocks.iter().map(|b| build_pq(b, spec)).collect::<Result<Vec<_>>>()?;
    let mut phi = pq[0].p.clone();
    for x in &pq[1..] {
        phi = &(&x.q * &phi) + &x.p;
    }
    if phi.max_abs_freq() as u128 * 2 >= spec.grid as u128 {
        return Err(Error::Resolution(format!("Φ reaches frequency {}", phi.max_abs_freq())));
    }
    Ok(TestFunction { spec: spec.clone(), blocks, pq, phi })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerCheck {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl LedgerCheck {
    fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        LedgerCheck { name: name.into(), value, limit, pass: value <= limit }
    }

    fn strictly_below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        LedgerCheck { name: name.into(), value, limit, pass: value < limit }
    }

    fn above(name: impl Into<String>, value: f64, limit: f64) -> Self {
        LedgerCheck { name: name.into(), value, limit, pass: value > limit }
    }
}

/// Every base-independent property of the construction, measured.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantLedger {
    pub block_sizes: Vec<usize>,
    pub phi_sup: f64,
    pub g_pairings: Vec<Complex64>,
    pub g_phi_pairing: Complex64,
    pub checks: Vec<LedgerCheck>,
}

impl InvariantLedger {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn invariant_ledger(tf: &TestFunction) -> Result<InvariantLedger> {
    let g = tf.spec.grid;
    let mut checks = Vec::new();
    let phi_grid = tf.phi.sample(g)?;
    let phi_sup = phi_grid.iter().map(|v| v.norm()).fold(0.0, f64::max);
    checks.push(LedgerCheck::strictly_below("phi_sup", phi_sup, 10.0));

    let explicit = tf.explicit_on_grid()?;
    let gap = phi_grid.iter().zip(&explicit).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    checks.push(LedgerCheck::below("recursion_vs_explicit", gap, 1e-8));

    let gser = g_series(&tf.spec.a, &[1, tf.spec.r0]);
    let mut g_pairings = Vec::new();
    for (k, (blk, pq)) in tf.blocks.iter().zip(&tf.pq).enumerate() {
        let p = pq.p.sample(g)?;
        let q = pq.q.sample(g)?;
        let mixed = p.iter().zip(&q).map(|(a, b)| 0.1 * a.norm() + b.norm()).fold(0.0, f64::max);
        checks.push(LedgerCheck::below(format!("pq_sup[{k}]"), mixed, 1.0 + 1e-6));
        let one_minus_q = (&TrigPoly::constant(Complex64::new(1.0, 0.0)) - &pq.q).l2_norm();
        let bound = 2.0 / (blk.elements.len() as f64).sqrt();
        checks.push(LedgerCheck::below(format!("one_minus_q_l2[{k}]"), one_minus_q, bound + 1e-6));
        checks.push(LedgerCheck::below(format!("q_outside_mass[{k}]"), pq.q_outside_mass, 1e-6));
        let outside_p = pq
            .p
            .iter()
            .filter(|&(n, _)| n < blk.lo as i64 || n > blk.hi as i64)
            .count();
        checks.push(LedgerCheck::below(format!("p_support_outside[{k}]"), outside_p as f64, 0.0));
        let gp = inner_product(&gser, &pq.p);
        checks.push(LedgerCheck::above(format!("g_pairing[{k}]"), gp.re, 0.5));
        g_pairings.push(gp);
    }
    let total: f64 = g_pairings.iter().map(|c| c.re).sum();
    let k0 = (tf.blocks.len() - 1) as f64;
    checks.push(LedgerCheck::above("g_pairing_sum_minus_half_k0", total - k0 / 2.0, 0.0));
    Ok(InvariantLedger {
        block_sizes: tf.blocks.iter().map(|b| b.elements.len()).collect(),
        phi_sup,
        g_pairings,
        g_phi_pairing: inner_product(&gser, &tf.phi),
        checks,
    })
}

/// Coefficients a_n of an H series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HWeights {
    Ones,
    Character(CharSpec),
    Explicit(BTreeMap<u64, Complex64>),
}

impl HWeights {
    fn get(&self, n: u64) -> Result<Complex64> {
        Ok(match self {
            HWeights::Ones => Complex64::new(1.0, 0.0),
            HWeights::Character(c) => Complex64::new(char_value(*c, n)? as f64, 0.0),
            HWeights::Explicit(map) => map.get(&n).copied().unwrap_or(ZERO),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HSeriesSpec {
    pub weights: HWeights,
    /// Prime threshold for 𝒩: every prime factor at least `p`.
    pub p: u64,
    pub beta: i64,
    /// Dilations summed in the L¹ corollary; advisory size at most log|A|.
    pub gamma: Vec<i64>,
    /// 𝒩 is truncated to n <= bound.
    pub bound: u64,
}

impl HSeriesSpec {
    pub fn new(weights: HWeights, p: u64, beta: i64, gamma: Vec<i64>, bound: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::Domain(format!("P = {p} is not prime")));
        }
        if let HWeights::Explicit(map) = &weights {
            if let Some((n, c)) = map.iter().find(|(_, c)| c.norm() > 1.0 + 1e-12) {
                return Err(Error::Domain(format!("|a_{n}| = {} exceeds 1", c.norm())));
            }
        }
        Ok(HSeriesSpec { weights, p, beta, gamma, bound })
    }
}

fn h_with_beta(spec: &HSeriesSpec, a: &IntSet, beta: i64, budget: u64) -> Result<TrigPoly> {
    if spec.bound < spec.p {
        return Ok(TrigPoly::zero());
    }
    let rough = enumerate_factor_set(FactorSetSpec::new(FactorKind::RoughN, spec.p, spec.bound)?)?;
    let terms = rough.len() as u64 * a.len() as u64;
    if terms > budget {
        return Err(Error::Budget(format!("{terms} H terms above budget {budget}")));
    }
    let mut h = TrigPoly::zero();
    for n in rough.iter() {
        let w = spec.weights.get(n)? / n as f64;
        if w == ZERO {
            continue;
        }
        for m in a.iter() {
            let f = (beta as i128) * (m as i128) * (n as i128);
            let f = i64::try_from(f).map_err(|_| Error::Range(format!("frequency {f} overflows")))?;
            h.add_term(f, w);
        }
    }
    Ok(h)
}

/// Σ_{n∈𝒩, n<=bound, m∈A} (a_n/n) e^{iβmnx}.
pub fn build_h_series(spec: &HSeriesSpec, a: &IntSet, budget: u64) -> Result<TrigPoly> {
    h_with_beta(spec, a, spec.beta, budget)
}

/// Reported, never asserted: the constants in the paired estimates are unknown.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HDiagnostics {
    pub terms: usize,
    pub h_phi_pairing: f64,
    /// ‖Proj_{b_k} H‖₂ for each block's largest element b_k.
    pub proj_norms: Vec<(u64, f64)>,
    pub gamma_pairings: Vec<(i64, f64)>,
    /// (|⟨G,Φ⟩| - Σ_β |⟨H_β,Φ⟩|) / ‖Φ‖∞, a lower bound for ‖G + Σ_β H_β‖₁.
    pub l1_lower_bound: f64,
}

pub fn h_diagnostics(spec: &HSeriesSpec, tf: &TestFunction, budget: u64) -> Result<HDiagnostics> {
    let a = &tf.spec.a;
    let h = build_h_series(spec, a, budget)?;
    let proj_norms = tf.blocks.iter().map(|b| (b.hi, h.project(b.hi).l2_norm())).collect();
    let gamma_pairings = spec
        .gamma
        .iter()
        .map(|&beta| Ok((beta, inner_product(&h_with_beta(spec, a, beta, budget)?, &tf.phi).norm())))
        .collect::<Result<Vec<_>>>()?;
    let phi_sup = tf.phi.sample(tf.spec.grid)?.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let g = inner_product(&g_series(a, &[1, tf.spec.r0]), &tf.phi).norm();
    let lost: f64 = gamma_pairings.iter().map(|(_, v)| v).sum();
    Ok(HDiagnostics {
        terms: h.len(),
        h_phi_pairing: inner_product(&h, &tf.phi).norm(),
        proj_norms,
        gamma_pairings,
        l1_lower_bound: (g - lost) / phi_sup,
    })
}

/// a/10 + e^{-a} on a mesh of [0, amax]; the maximum stays at most 1 only
/// while amax < 9.9995, which is plenty since |P̃_k| <= 1.
pub fn basic_inequality_max(amax: f64, steps: usize) -> f64 {
    (0..=steps)
        .map(|i| {
            let a = amax * i as f64 / steps as f64;
            a / 10.0 + (-a).exp()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn spec64() -> TestFunctionSpec {
        TestFunctionSpec::new(IntSet::range(1, 64).unwrap(), 3, 4, Some(65536)).unwrap()
    }

    #[test]
    fn fejer_examples() {
        assert_eq!(fejer(1).unwrap(), TrigPoly::constant(c(1.0)));
        let f = fejer(2).unwrap();
        assert_eq!(f.iter().collect::<Vec<_>>(), vec![(-1, c(0.5)), (0, c(1.0)), (1, c(0.5))]);
        for m in 1..20 {
            assert!((fejer(m).unwrap().eval(0.0).re - m as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn hilbert_examples() {
        let cos3 = TrigPoly::from_coeffs([(3, c(0.5)), (-3, c(0.5))]);
        let h = hilbert(&cos3);
        for x in [0.1, 0.7, 2.0] {
            assert!((h.eval(x).re - (3.0 * x).sin()).abs() < 1e-12);
        }
        assert!(hilbert(&TrigPoly::constant(c(4.0))).is_zero());
        let sin2 = TrigPoly::from_coeffs([(2, Complex64::new(0.0, -0.5)), (-2, Complex64::new(0.0, 0.5))]);
        let h = hilbert(&sin2);
        assert!((h.eval(0.3).re + (0.6f64).cos()).abs() < 1e-12);
        assert!(h.is_real(0.0));
    }

    #[test]
    fn blocks_greedy() {
        let b = build_blocks(&spec64()).unwrap();
        let sizes: Vec<_> = b.iter().map(|x| (x.lo, x.hi)).collect();
        assert_eq!(sizes, vec![(1, 1), (2, 5), (6, 21), (22, 64)]);
        let auto = build_phi(&TestFunctionSpec::new(IntSet::range(1, 9).unwrap(), 1, 8, None).unwrap()).unwrap();
        assert!(auto.spec.grid > 128 && auto.spec.grid.is_power_of_two());
        let two = TestFunctionSpec::new(IntSet::range(1, 9).unwrap(), 1, 8, None).unwrap();
        assert_eq!(build_blocks(&two).unwrap().len(), 2);
        let tight = TestFunctionSpec::new(IntSet::range(1, 5).unwrap(), 1, 4, None).unwrap();
        assert_eq!(build_blocks(&tight).unwrap().len(), 2);
        assert!(TestFunctionSpec::new(IntSet::range(1, 4).unwrap(), 1, 4, None).is_err());
    }

    #[test]
    fn singleton_block_q_is_inverse_e() {
        let s = spec64();
        let b = &build_blocks(&s).unwrap()[0];
        let pq = build_pq(b, &s).unwrap();
        assert_eq!(pq.q.len(), 1);
        assert!((pq.q.coeff(0).re - (-1f64).exp()).abs() < 1e-12);
        assert_eq!(pq.p, TrigPoly::monomial(1, c(1.0)));
    }

    #[test]
    fn two_blocks_phi_matches_direct_product() {
        let coarse = TestFunctionSpec::new(IntSet::range(1, 5).unwrap(), 2, 4, Some(256)).unwrap();
        assert!(matches!(build_phi(&coarse), Err(Error::Resolution(_))));
        let s = TestFunctionSpec::new(IntSet::range(1, 5).unwrap(), 2, 4, Some(8192)).unwrap();
        let tf = build_phi(&s).unwrap();
        let direct = &(&tf.pq[1].q * &tf.pq[0].p) + &tf.pq[1].p;
        assert!((&tf.phi - &direct).l2_norm() < 1e-15);
        let grid = tf.explicit_on_grid().unwrap();
        let phi = tf.phi.sample(8192).unwrap();
        assert!(grid.iter().zip(&phi).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn ledger_on_one_to_sixty_four() {
        let tf = build_phi(&spec64()).unwrap();
        let ledger = invariant_ledger(&tf).unwrap();
        for ch in &ledger.checks {
            assert!(ch.pass, "{ch:?}");
        }
        assert_eq!(ledger.block_sizes, vec![1, 4, 16, 43]);
    }

    #[test]
    fn inner_product_examples() {
        let e = TrigPoly::monomial(5, c(1.0));
        assert_eq!(inner_product(&e, &e), c(1.0));
        assert_eq!(inner_product(&e, &TrigPoly::monomial(6, c(1.0))), ZERO);
        let f = TrigPoly::from_coeffs([(1, Complex64::new(0.0, 1.0)), (2, c(2.0))]);
        let g = TrigPoly::from_coeffs([(1, c(1.0)), (2, Complex64::new(0.0, 1.0)), (3, c(1.0))]);
        assert_eq!(inner_product(&f, &g), inner_product(&g, &f).conj());
    }

    #[test]
    fn h_series_examples() {
        let a = IntSet::new(vec![3]).unwrap();
        let one = HSeriesSpec::new(HWeights::Ones, 11, 2, vec![], 11).unwrap();
        let h = build_h_series(&one, &a, DEFAULT_TERM_BUDGET).unwrap();
        assert_eq!(h.iter().collect::<Vec<_>>(), vec![(66, c(1.0 / 11.0))]);
        let empty = HSeriesSpec::new(HWeights::Ones, 11, 1, vec![], 10).unwrap();
        assert!(build_h_series(&empty, &a, DEFAULT_TERM_BUDGET).unwrap().is_zero());
        let zero = HSeriesSpec::new(HWeights::Explicit(BTreeMap::new()), 11, 1, vec![], 500).unwrap();
        assert!(build_h_series(&zero, &a, DEFAULT_TERM_BUDGET).unwrap().is_zero());
        assert!(HSeriesSpec::new(HWeights::Ones, 12, 1, vec![], 10).is_err());
        let big = HSeriesSpec::new(HWeights::Ones, 2, 1, vec![], 1000).unwrap();
        assert!(matches!(build_h_series(&big, &a, 10), Err(Error::Budget(_))));
    }

    #[test]
    fn basic_inequality_holds() {
        assert!(basic_inequality_max(1.0, 100_000) <= 1.0);
        assert!(basic_inequality_max(9.99, 100_000) <= 1.0);
        assert!(basic_inequality_max(10.0, 100_000) > 1.0);
    }
}
