use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intset::IntSet;
use crate::params::KLParams;
use crate::sumset::{contains_projective_cube, is_restricted_sum_free, is_sum_free, SumLayers, DEFAULT_MAX_BITS};

pub const DEFAULT_SET_CAP: usize = 40;
pub const ORACLE_CAP: usize = 20;
pub const CUBE_CAP: usize = 25;
pub const DEFAULT_EXTREMAL_BUDGET: u64 = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    BranchAndBound,
    Exhaustive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveResult {
    pub size: usize,
    pub witness: IntSet,
    pub nodes_explored: u64,
    pub mode: SolveMode,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremalResult {
    pub n: usize,
    pub universe_bound: u64,
    pub min_value: usize,
    pub argmin_set: IntSet,
    pub exhaustive: bool,
    /// Sets whose optimum was computed.
    pub evaluations: u64,
}

/// A hereditary constraint that can be grown one element at a time, in
/// increasing element order, and rolled back.
trait Growable {
    fn push(&mut self, x: u64) -> bool;
    fn pop(&mut self);
}

impl Growable for SumLayers {
    fn push(&mut self, x: u64) -> bool {
        SumLayers::push(self, x)
    }
    fn pop(&mut self) {
        SumLayers::pop(self)
    }
}

struct CubeFree {
    d: u32,
    chosen: Vec<u64>,
}

impl Growable for CubeFree {
    fn push(&mut self, x: u64) -> bool {
        self.chosen.push(x);
        let s = IntSet::from_sorted(self.chosen.clone());
        // any cube in the old set was already excluded, so only cubes using x matter;
        // rechecking the whole (small) set keeps this obviously correct
        if contains_projective_cube(&s, self.d).unwrap().is_some() {
            self.chosen.pop();
            return false;
        }
        true
    }
    fn pop(&mut self) {
        self.chosen.pop();
    }
}

struct Search<'a, G> {
    elems: &'a [u64],
    state: G,
    /// compat[i] has bit j set when {e_i, e_j} is feasible.
    compat: Vec<u64>,
    cur: Vec<u64>,
    best: Vec<u64>,
    /// Size a DFS solution must reach to be recorded.
    target: usize,
    nodes: u64,
}

impl<G: Growable> Search<'_, G> {
    // Elements are decided in increasing order with the include branch first,
    // so the first optimum reached is the lexicographically smallest one.
    fn dfs(&mut self, cand: u64) {
        self.nodes += 1;
        let room = self.cur.len() + cand.count_ones() as usize;
        if room < self.target {
            return;
        }
        if cand == 0 {
            self.best = self.cur.clone();
            self.target = self.cur.len() + 1;
            return;
        }
        let i = cand.trailing_zeros() as usize;
        let rest = cand & (cand - 1);
        let x = self.elems[i];
        if self.state.push(x) {
            self.cur.push(x);
            self.dfs(rest & self.compat[i]);
            self.cur.pop();
            self.state.pop();
        }
        self.dfs(rest);
    }
}

fn run_search<G: Growable>(a: &IntSet, state: G, pair_ok: impl Fn(u64, u64) -> bool, seed_size: usize) -> SolveResult {
    let elems = a.as_slice();
    let n = elems.len();
    let mut compat = vec![0u64; n];
    for i in 0..n {
        for j in 0..n {
            if i == j || pair_ok(elems[i].min(elems[j]), elems[i].max(elems[j])) {
                compat[i] |= 1 << j;
            }
        }
    }
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut s = Search {
        elems,
        state,
        compat,
        cur: Vec::new(),
        best: Vec::new(),
        // a heuristic solution of this size exists, so nothing smaller can win
        target: seed_size.max(1),
        nodes: 0,
    };
    if n > 0 {
        s.dfs(all);
    }
    let witness = IntSet::from_sorted(s.best);
    SolveResult { size: witness.len(), witness, nodes_explored: s.nodes, mode: SolveMode::BranchAndBound }
}

fn predicate(p: KLParams, restricted: bool) -> impl Fn(&IntSet) -> bool {
    move |s: &IntSet| {
        if restricted {
            is_restricted_sum_free(s, p).unwrap()
        } else {
            is_sum_free(s, p).unwrap()
        }
    }
}

/// Greedy from the top; large elements rarely clash.
fn greedy_size(a: &IntSet, ok: &impl Fn(&IntSet) -> bool) -> usize {
    let mut chosen: Vec<u64> = Vec::new();
    for x in a.iter().rev() {
        chosen.push(x);
        let mut s = chosen.clone();
        s.sort_unstable();
        if !ok(&IntSet::from_sorted(s)) {
            chosen.pop();
        }
    }
    chosen.len()
}

pub fn max_sum_free_subset(a: &IntSet, p: KLParams, restricted: bool) -> Result<SolveResult> {
    max_sum_free_subset_capped(a, p, restricted, DEFAULT_SET_CAP)
}

pub fn max_sum_free_subset_capped(a: &IntSet, p: KLParams, restricted: bool, cap: usize) -> Result<SolveResult> {
    if a.len() > cap.min(64) {
        return Err(Error::Size(format!("|A| = {} above the solver cap {}", a.len(), cap.min(64))));
    }
    if a.is_empty() {
        return Ok(SolveResult { size: 0, witness: IntSet::empty(), nodes_explored: 0, mode: SolveMode::BranchAndBound });
    }
    // surfaces overflow as an error before the search starts
    is_sum_free(&IntSet::from_sorted(vec![a.max().unwrap()]), p)?;
    let ok = predicate(p, restricted);
    let lo = a.min().unwrap();
    let span = a.max().unwrap() - lo;
    let state = SumLayers::new(p, restricted, lo, span, a.len(), DEFAULT_MAX_BITS)?;
    let seed = greedy_size(a, &ok);
    let pair_ok = |x: u64, y: u64| ok(&IntSet::from_sorted(vec![x, y]));
    Ok(run_search(a, state, pair_ok, seed))
}

pub fn max_cube_free_subset(a: &IntSet, d: u32) -> Result<SolveResult> {
    if !(2..=3).contains(&d) {
        return Err(Error::Domain(format!("d must be 2 or 3, got {d}")));
    }
    if a.len() > CUBE_CAP {
        return Err(Error::Size(format!("|A| = {} above the cube solver cap {CUBE_CAP}", a.len())));
    }
    let ok = |s: &IntSet| contains_projective_cube(s, d).unwrap().is_none();
    let seed = greedy_size(a, &ok);
    let pair_ok = |x: u64, y: u64| ok(&IntSet::from_sorted(vec![x, y]));
    Ok(run_search(a, CubeFree { d, chosen: Vec::new() }, pair_ok, seed))
}

/// Exhaustive scan: sizes from |A| down, subsets of each size in lexicographic
/// order; the first one passing `ok` is returned.
pub fn brute_force_max(a: &IntSet, ok: impl Fn(&IntSet) -> bool) -> Result<SolveResult> {
    if a.len() > ORACLE_CAP {
        return Err(Error::Size(format!("|A| = {} above the oracle cap {ORACLE_CAP}", a.len())));
    }
    let xs = a.as_slice();
    let mut nodes = 0;
    for size in (0..=xs.len()).rev() {
        for idx in Combinations::new(xs.len(), size) {
            nodes += 1;
            let s = IntSet::from_sorted(idx.iter().map(|&i| xs[i]).collect());
            if ok(&s) {
                return Ok(SolveResult { size, witness: s, nodes_explored: nodes, mode: SolveMode::Exhaustive });
            }
        }
    }
    unreachable!("the empty set satisfies every hereditary predicate")
}

pub fn brute_force_oracle(a: &IntSet, p: KLParams, restricted: bool) -> Result<SolveResult> {
    if let Some(m) = a.max() {
        is_sum_free(&IntSet::from_sorted(vec![m]), p)?;
    }
    brute_force_max(a, predicate(p, restricted))
}

/// Index combinations of `size` out of `n`, in lexicographic order.
pub struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(n: usize, size: usize) -> Self {
        Combinations { n, idx: (0..size).collect(), done: size > n }
    }

    /// Starts at the combination of lexicographic rank `rank`.
    pub fn starting_at(n: usize, size: usize, mut rank: u128) -> Self {
        let mut idx = Vec::with_capacity(size);
        let mut next = 0;
        for slot in 0..size {
            let left = size - slot - 1;
            loop {
                let c = binomial((n - next - 1) as u64, left as u64);
                if rank < c {
                    break;
                }
                rank -= c;
                next += 1;
            }
            idx.push(next);
            next += 1;
        }
        Combinations { n, idx, done: size > n }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// C(n, k), saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = match c.checked_mul((n - i) as u128) {
            Some(v) => v / (i + 1) as u128,
            None => return u128::MAX,
        };
    }
    c
}

fn solve_size(s: &IntSet, p: KLParams, restricted: bool) -> usize {
    max_sum_free_subset(s, p, restricted).expect("desk-scale sets stay within caps").size
}

/// Smallest optimum over n-subsets of `[1, universe_bound]`.
///
/// Exhaustive when the number of subsets fits in `budget`, otherwise a seeded
/// swap descent with restarts; in that case `min_value` is only an upper bound
/// on the restricted-universe minimum.
pub fn extremal_search(n: usize, universe_bound: u64, p: KLParams, restricted: bool, budget: u64, seed: u64) -> Result<ExtremalResult> {
    if n == 0 || n as u64 > universe_bound {
        return Err(Error::Domain(format!("need 1 <= n <= universe bound, got n={n}, U={universe_bound}")));
    }
    if n > DEFAULT_SET_CAP {
        return Err(Error::Size(format!("n = {n} above the solver cap {DEFAULT_SET_CAP}")));
    }
    let total = binomial(universe_bound, n as u64);
    if total <= budget as u128 {
        Ok(exhaustive_extremal(n, universe_bound, p, restricted, total as u64))
    } else {
        Ok(local_extremal(n, universe_bound, p, restricted, budget, seed))
    }
}

fn exhaustive_extremal(n: usize, u: u64, p: KLParams, restricted: bool, total: u64) -> ExtremalResult {
    const CHUNK: u64 = 4096;
    let chunks = total.div_ceil(CHUNK);
    let (value, _, set) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let len = CHUNK.min(total - start);
            let mut best: Option<(usize, u64, Vec<usize>)> = None;
            for (off, idx) in Combinations::starting_at(u as usize, n, start as u128).take(len as usize).enumerate() {
                let s = IntSet::from_sorted(idx.iter().map(|&i| i as u64 + 1).collect());
                let v = solve_size(&s, p, restricted);
                if best.as_ref().is_none_or(|b| v < b.0) {
                    best = Some((v, start + off as u64, idx));
                }
            }
            best.unwrap()
        })
        // rank order makes the reduction independent of scheduling
        .reduce_with(|a, b| if (b.0, b.1) < (a.0, a.1) { b } else { a })
        .unwrap();
    ExtremalResult {
        n,
        universe_bound: u,
        min_value: value,
        argmin_set: IntSet::from_sorted(set.iter().map(|&i| i as u64 + 1).collect()),
        exhaustive: true,
        evaluations: total,
    }
}

fn local_extremal(n: usize, u: u64, p: KLParams, restricted: bool, budget: u64, seed: u64) -> ExtremalResult {
    let restarts: u64 = budget.clamp(1, 8);
    let per = (budget / restarts).max(1);
    let runs: Vec<(usize, Vec<u64>, u64)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(r));
            let mut universe: Vec<u64> = (1..=u).collect();
            universe.shuffle(&mut rng);
            let mut cur: Vec<u64> = universe[..n].to_vec();
            cur.sort_unstable();
            let mut val = solve_size(&IntSet::from_sorted(cur.clone()), p, restricted);
            let mut used = 1;
            'descent: while used < per {
                let mut moves: Vec<(usize, u64)> = (0..n)
                    .flat_map(|i| (1..=u).map(move |y| (i, y)))
                    .filter(|&(_, y)| cur.binary_search(&y).is_err())
                    .collect();
                moves.shuffle(&mut rng);
                for (i, y) in moves {
                    if used >= per {
                        break 'descent;
                    }
                    let mut cand = cur.clone();
                    cand[i] = y;
                    cand.sort_unstable();
                    used += 1;
                    let v = solve_size(&IntSet::from_sorted(cand.clone()), p, restricted);
                    if v < val {
                        val = v;
                        cur = cand;
                        continue 'descent;
                    }
                }
                break;
            }
            (val, cur, used)
        })
        .collect();
    let evaluations = runs.iter().map(|r| r.2).sum();
    let (value, set, _) = runs.into_iter().min_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1))).unwrap();
    ExtremalResult {
        n,
        universe_bound: u,
        min_value: value,
        argmin_set: IntSet::from_sorted(set),
        exhaustive: false,
        evaluations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kl(k: u32, l: u32) -> KLParams {
        KLParams::new(k, l).unwrap()
    }

    fn set(v: &[u64]) -> IntSet {
        IntSet::new(v.to_vec()).unwrap()
    }

    // frozen from an independent exhaustive Python scan
    #[test]
    fn solver_examples() {
        let r = max_sum_free_subset(&IntSet::range(1, 10).unwrap(), kl(2, 1), false).unwrap();
        assert_eq!((r.size, r.witness.as_slice()), (5, &[1, 3, 5, 7, 9][..]));
        let r = max_sum_free_subset(&IntSet::range(1, 10).unwrap(), kl(3, 1), false).unwrap();
        assert_eq!((r.size, r.witness.as_slice()), (7, &[4, 5, 6, 7, 8, 9, 10][..]));
        let r = max_sum_free_subset(&IntSet::range(1, 10).unwrap(), kl(2, 1), true).unwrap();
        assert_eq!((r.size, r.witness.as_slice()), (6, &[5, 6, 7, 8, 9, 10][..]));
        for p in [kl(2, 1), kl(7, 3), kl(64, 63)] {
            assert_eq!(max_sum_free_subset(&set(&[1]), p, false).unwrap().size, 1);
        }
    }

    #[test]
    fn oracle_examples() {
        let r = brute_force_oracle(&set(&[1, 2, 4]), kl(2, 1), false).unwrap();
        assert_eq!((r.size, r.witness.as_slice()), (2, &[1, 4][..]));
        assert_eq!(brute_force_oracle(&IntSet::empty(), kl(2, 1), false).unwrap().size, 0);
        assert_eq!(brute_force_oracle(&set(&[3, 5]), kl(2, 1), false).unwrap().size, 2);
        assert!(brute_force_oracle(&IntSet::range(1, 21).unwrap(), kl(2, 1), false).is_err());
    }

    #[test]
    fn caps() {
        assert!(matches!(max_sum_free_subset(&IntSet::range(1, 41).unwrap(), kl(2, 1), false), Err(Error::Size(_))));
        assert!(matches!(max_cube_free_subset(&IntSet::range(1, 26).unwrap(), 2), Err(Error::Size(_))));
    }

    #[test]
    fn cube_free_examples() {
        let r = max_cube_free_subset(&IntSet::range(1, 7).unwrap(), 3).unwrap();
        assert_eq!((r.size, r.witness.as_slice()), (5, &[1, 2, 4, 5, 7][..]));
        assert_eq!(max_cube_free_subset(&set(&[1, 2, 3]), 2).unwrap().size, 2);
        assert_eq!(max_cube_free_subset(&set(&[1]), 2).unwrap().size, 1);
    }

    #[test]
    fn square_free_matches_two_one() {
        let a = set(&[2, 3, 5, 7, 8, 10, 13, 15, 16]);
        let cube = max_cube_free_subset(&a, 2).unwrap();
        let sf = max_sum_free_subset(&a, kl(2, 1), false).unwrap();
        assert_eq!(cube.witness, sf.witness);
    }

    #[test]
    fn combinations_rank_and_order() {
        let all: Vec<_> = Combinations::new(5, 3).collect();
        assert_eq!(all.len(), 10);
        assert_eq!(all[0], vec![0, 1, 2]);
        assert_eq!(all[9], vec![2, 3, 4]);
        for (r, c) in all.iter().enumerate() {
            assert_eq!(&Combinations::starting_at(5, 3, r as u128).next().unwrap(), c);
        }
        assert_eq!(Combinations::new(3, 0).count(), 1);
        assert_eq!(binomial(24, 8), 735_471);
    }

    #[test]
    fn extremal_examples() {
        let r = extremal_search(3, 8, kl(2, 1), false, 1000, 0).unwrap();
        assert!(r.exhaustive);
        assert_eq!(r.evaluations, 56);
        assert_eq!((r.min_value, r.argmin_set.as_slice()), (2, &[1, 2, 3][..]));
        assert_eq!(extremal_search(1, 9, kl(3, 1), false, 1000, 0).unwrap().min_value, 1);
        let r = extremal_search(6, 20, kl(2, 1), false, 2000, 11).unwrap();
        assert!(!r.exhaustive);
        assert!(r.min_value >= 3);
        assert_eq!(r.min_value, max_sum_free_subset(&r.argmin_set, kl(2, 1), false).unwrap().size);
    }

    #[test]
    fn local_search_is_reproducible() {
        let a = extremal_search(7, 30, kl(2, 1), false, 800, 5).unwrap();
        let b = extremal_search(7, 30, kl(2, 1), false, 800, 5).unwrap();
        assert_eq!(a, b);
    }
}
