//! Command-line front end for klfree-core: argument parsing, dispatch to the
//! core modules, and reproducible JSON reports.
//!
//! Every report embeds the parsed command, the seed and the work budget, so
//! `klfree replay report.json` can re-run it and compare results.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use klfree_core::charfns::{
    char_value, multiplicativity_failures, sieve_ledger_pi, sieve_ledger_psi, CharKind, CharSpec,
};
use klfree_core::densitylab::{
    density_bound, density_on_multiples_profile, density_profile, folner_defect, folner_set, folner_trend,
    periodic_residue_sum_free,
};
use klfree_core::exact::{extremal_search, max_cube_free_subset, max_sum_free_subset, DEFAULT_EXTREMAL_BUDGET};
use klfree_core::littlewood::{build_phi, h_diagnostics, invariant_ledger, HWeights, DEFAULT_TERM_BUDGET};
use klfree_core::series::{cancellation_check, endpoint_distance, fhat, fhat_quadrature, DEFAULT_DELTA};
use klfree_core::sumset::{restricted_sumset_within, sumset_fold_within, DEFAULT_MAX_BITS};
use klfree_core::torus::{best_dilation_within, dilation_profile, omega, verify_omega_sum_free, DEFAULT_BREAKPOINT_BUDGET};
use klfree_core::trigdet::{chebyshev_leading_fd, det_closed, det_direct, scaled_error, DetKind};
use klfree_core::{
    BalancedFn, FolnerSpec, HSeriesSpec, IntSet, KLParams, Rational, ResidueSet, TestFunctionSpec,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Reads a set from text, or from a file when written `@path`.
pub fn parse_set(text: &str) -> klfree_core::Result<IntSet> {
    IntSet::parse(text)
}

fn set_arg(text: &str) -> Result<IntSet, String> {
    let owned;
    let body = match text.strip_prefix('@') {
        Some(path) => {
            owned = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
            owned.as_str()
        }
        None => text,
    };
    parse_set(body).map_err(|e| e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "klfree", version, about = "Exact and numerical experiments on (k,l)-sum-free sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Print the full JSON report.
    #[arg(long, global = true)]
    pub json: bool,
    /// Print plot data as CSV (dilate, chars, density profile).
    #[arg(long, global = true, conflicts_with = "json")]
    pub csv: bool,
    /// Worker threads for parallel searches.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// One cap for every work budget a command uses: solver bits, dilation
    /// breakpoints, extremal evaluations, H-series terms.
    #[arg(long, global = true, env = "KLFREE_BUDGET")]
    pub budget: Option<u64>,
    /// Write output here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Is the set (k,l)-sum-free?
    Check(CheckArgs),
    /// Largest sum-free (or projective-cube-free) subset.
    Max(MaxArgs),
    /// Best dilation of the set into the sum-free intervals.
    Dilate(DilateArgs),
    /// Smallest optimum over n-subsets of [1, universe].
    Extremal(ExtremalArgs),
    /// Table of a character function.
    Chars(CharsArgs),
    /// Fölner boxes, defects and max sum-free fractions.
    Folner(FolnerArgs),
    /// Density profiles, periodic bounds and residue sets.
    #[command(subcommand)]
    Density(DensityCmd),
    /// Identity and invariant ledgers.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Re-run a saved JSON report and compare results.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Check(_) => "check".into(),
            Command::Max(_) => "max".into(),
            Command::Dilate(_) => "dilate".into(),
            Command::Extremal(_) => "extremal".into(),
            Command::Chars(_) => "chars".into(),
            Command::Folner(_) => "folner".into(),
            Command::Density(d) => format!("density {}", d.name()),
            Command::Verify(v) => format!("verify {}", v.name()),
            Command::Replay(_) => "replay".into(),
        }
    }
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckArgs {
    #[arg(long)]
    pub kl: KLParams,
    #[arg(long, value_parser = set_arg)]
    pub set: IntSet,
    /// Only sums of distinct elements.
    #[arg(long)]
    pub restricted: bool,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxArgs {
    #[arg(long, required_unless_present = "cube")]
    pub kl: Option<KLParams>,
    #[arg(long, value_parser = set_arg)]
    pub set: IntSet,
    #[arg(long)]
    pub restricted: bool,
    /// Avoid projective cubes of this dimension (2 or 3) instead.
    #[arg(long, conflicts_with = "kl")]
    pub cube: Option<u32>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DilateArgs {
    #[arg(long)]
    pub kl: KLParams,
    #[arg(long, value_parser = set_arg)]
    pub set: IntSet,
    /// Restrict the CSV profile to one interval index.
    #[arg(long)]
    pub t: Option<u32>,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtremalArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub universe: u64,
    #[arg(long)]
    pub kl: KLParams,
    #[arg(long)]
    pub restricted: bool,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharsArgs {
    /// mu, psi, eta, pi, psi', pi', phi:U, Psi:U; prefix "mu*" for the Möbius twist.
    #[arg(long)]
    pub kind: CharSpec,
    #[arg(long, value_parser = set_arg, default_value = "1..100")]
    pub range: IntSet,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FolnerArgs {
    #[arg(long)]
    pub m: u32,
    /// Primes spanning the box; defaults to the first m primes.
    #[arg(long, value_delimiter = ',')]
    pub primes: Vec<u64>,
    /// Solve every level 0..=m exactly.
    #[arg(long, requires = "kl")]
    pub experiment: bool,
    #[arg(long)]
    pub kl: Option<KLParams>,
    #[arg(long)]
    pub restricted: bool,
    /// Report |Φ_m △ aΦ_m| / |Φ_m| for this a.
    #[arg(long)]
    pub defect: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityCmd {
    /// |A ∩ [n]| / n for n up to the horizon.
    Profile {
        #[arg(long, value_parser = set_arg)]
        set: IntSet,
        #[arg(long)]
        horizon: u64,
    },
    /// |A ∩ N!·[n]| / n.
    Multiples {
        #[arg(long, value_parser = set_arg)]
        set: IntSet,
        #[arg(long)]
        nfact: u32,
        #[arg(long)]
        n: u64,
    },
    /// Periodic density bound at level m.
    Bound {
        #[arg(long)]
        m: u64,
        #[arg(long)]
        kl: KLParams,
        #[arg(long)]
        restricted: bool,
    },
    /// Is the periodic set with these residues mod D sum-free?
    Residues {
        #[arg(long)]
        period: u64,
        #[arg(long, value_delimiter = ',')]
        residues: Vec<u64>,
        #[arg(long)]
        kl: KLParams,
    },
}

impl DensityCmd {
    fn name(&self) -> &'static str {
        match self {
            DensityCmd::Profile { .. } => "profile",
            DensityCmd::Multiples { .. } => "multiples",
            DensityCmd::Bound { .. } => "bound",
            DensityCmd::Residues { .. } => "residues",
        }
    }
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum VerifyCmd {
    /// Every interval is sum-free with length 1/(k+l), for k up to kmax.
    Omega {
        #[arg(long, default_value_t = 12)]
        kmax: u32,
    },
    /// Determinant closed forms on random angles.
    Det {
        #[arg(long, default_value_t = 8)]
        nmax: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Multiplicativity of π, Φ_u, Ψ_u on coprime pairs.
    Chars {
        #[arg(long, default_value_t = 10_000)]
        limit: u64,
        #[arg(long, value_delimiter = ',', default_value = "2,4,6,8")]
        u: Vec<u32>,
    },
    /// Möbius sieve convolution ledgers.
    Sieve {
        #[arg(long = "P", default_value_t = 101)]
        p: u64,
        #[arg(long, default_value_t = 10_000)]
        bound: u64,
    },
    /// Fourier coefficients and truncated series against indicators.
    Series(SeriesArgs),
    /// Invariant ledger of the test-function construction.
    Littlewood(LittlewoodArgs),
    /// Everything above with default parameters.
    All,
}

impl VerifyCmd {
    fn name(&self) -> &'static str {
        match self {
            VerifyCmd::Omega { .. } => "omega",
            VerifyCmd::Det { .. } => "det",
            VerifyCmd::Chars { .. } => "chars",
            VerifyCmd::Sieve { .. } => "sieve",
            VerifyCmd::Series(_) => "series",
            VerifyCmd::Littlewood(_) => "littlewood",
            VerifyCmd::All => "all",
        }
    }
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesArgs {
    /// Repeat for several pairs; defaults to (3,1), (4,2), (5,1).
    #[arg(long)]
    pub kl: Vec<KLParams>,
    #[arg(long, default_value_t = 100_000)]
    pub terms: u64,
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
}

impl Default for SeriesArgs {
    fn default() -> Self {
        SeriesArgs { kl: Vec::new(), terms: 100_000, points: 100, delta: DEFAULT_DELTA }
    }
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LittlewoodArgs {
    #[arg(long = "A", alias = "set", value_parser = set_arg, default_value = "1..64")]
    pub a: IntSet,
    #[arg(long, default_value_t = 3)]
    pub r0: u64,
    #[arg(long, default_value_t = 4)]
    pub base: u64,
    /// Power of two; chosen and refined automatically when omitted.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Prime threshold P of the H series; 0 skips the H diagnostics.
    #[arg(long, default_value_t = 11)]
    pub h_p: u64,
    #[arg(long, default_value_t = 2000)]
    pub h_bound: u64,
    #[arg(long, default_value_t = 1)]
    pub beta: i64,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub gamma: Vec<i64>,
    /// Coefficients a_n: "ones" or a character such as psi.
    #[arg(long, default_value = "psi")]
    pub weights: String,
}

impl Default for LittlewoodArgs {
    fn default() -> Self {
        LittlewoodArgs {
            a: IntSet::range(1, 64).unwrap(),
            r0: 3,
            base: 4,
            grid: None,
            h_p: 11,
            h_bound: 2000,
            beta: 1,
            gamma: vec![1, 2, 3],
            weights: "psi".into(),
        }
    }
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplayArgs {
    pub report: PathBuf,
}

/// Everything that determines a report's results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub command: Command,
    pub budget: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub command: String,
    pub params: Params,
    pub results: Value,
    pub timings_ms: f64,
    pub version: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    fn new(header: &[&str]) -> Self {
        Csv { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// Results plus whether every asserted invariant held.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub results: Value,
    pub pass: bool,
    pub csv: Option<Csv>,
}

impl Outcome {
    fn ok(results: Value) -> Self {
        Outcome { results, pass: true, csv: None }
    }

    fn checked(results: Value, pass: bool) -> Self {
        Outcome { results, pass, csv: None }
    }

    fn with_csv(mut self, csv: Csv) -> Self {
        self.csv = Some(csv);
        self
    }
}

pub struct Run {
    pub report: Report,
    pub pass: bool,
    pub csv: Option<Csv>,
}

pub fn run(params: &Params, seed: u64) -> anyhow::Result<Run> {
    let start = Instant::now();
    let out = dispatch(&params.command, params.budget, seed)?;
    let report = Report {
        command: params.command.name(),
        params: params.clone(),
        results: out.results,
        timings_ms: start.elapsed().as_secs_f64() * 1e3,
        version: VERSION.to_string(),
        seed,
    };
    Ok(Run { report, pass: out.pass, csv: out.csv })
}

fn dispatch(cmd: &Command, budget: Option<u64>, seed: u64) -> anyhow::Result<Outcome> {
    Ok(match cmd {
        Command::Check(a) => check(a, budget)?,
        Command::Max(a) => max(a)?,
        Command::Dilate(a) => dilate(a, budget)?,
        Command::Extremal(a) => extremal(a, budget, seed)?,
        Command::Chars(a) => chars(a)?,
        Command::Folner(a) => folner(a)?,
        Command::Density(d) => density(d)?,
        Command::Verify(v) => verify(v, budget, seed)?,
        Command::Replay(r) => replay(r)?,
    })
}

fn check(a: &CheckArgs, budget: Option<u64>) -> anyhow::Result<Outcome> {
    let bits = budget.unwrap_or(DEFAULT_MAX_BITS);
    let (ks, ls) = if a.restricted {
        (restricted_sumset_within(&a.set, a.kl.k(), bits)?, restricted_sumset_within(&a.set, a.kl.l(), bits)?)
    } else {
        (sumset_fold_within(&a.set, a.kl.k(), bits)?, sumset_fold_within(&a.set, a.kl.l(), bits)?)
    };
    // vacuous for the restricted notion when fewer than k elements exist
    let collision = ls.iter().find(|&s| ks.contains(s));
    Ok(Outcome::ok(json!({
        "sum_free": collision.is_none(),
        "restricted": a.restricted,
        "smallest_collision": collision,
    })))
}

fn max(a: &MaxArgs) -> anyhow::Result<Outcome> {
    let r = match (a.cube, a.kl) {
        (Some(d), _) => max_cube_free_subset(&a.set, d)?,
        (None, Some(p)) => max_sum_free_subset(&a.set, p, a.restricted)?,
        (None, None) => bail!("either --kl or --cube is required"),
    };
    Ok(Outcome::ok(serde_json::to_value(r)?))
}

fn dilate(a: &DilateArgs, budget: Option<u64>) -> anyhow::Result<Outcome> {
    let cap = budget.unwrap_or(DEFAULT_BREAKPOINT_BUDGET);
    let r = best_dilation_within(&a.set, a.kl, cap)?;
    let need = a.set.len().div_ceil(a.kl.sum() as usize);
    let mut csv = Csv::new(&["t", "x_lo", "x_hi", "count"]);
    let ts: Vec<u32> = match a.t {
        Some(t) => vec![t],
        None => (1..=a.kl.diff()).collect(),
    };
    for t in ts {
        for (lo, hi, c) in dilation_profile(&a.set, a.kl, t, cap)? {
            csv.rows.push(vec![t.to_string(), format!("{lo:.12}"), format!("{hi:.12}"), c.to_string()]);
        }
    }
    let arc = omega(a.kl, r.t)?;
    Ok(Outcome::checked(
        json!({
            "x": r.x.to_string(),
            "x_float": r.x.to_f64(),
            "t": r.t,
            "interval": arc,
            "count": r.count,
            "subset": r.subset,
            "lower_bound": need,
        }),
        r.count >= need,
    )
    .with_csv(csv))
}

fn extremal(a: &ExtremalArgs, budget: Option<u64>, seed: u64) -> anyhow::Result<Outcome> {
    let r = extremal_search(a.n, a.universe, a.kl, a.restricted, budget.unwrap_or(DEFAULT_EXTREMAL_BUDGET), seed)?;
    let general = a.n.div_ceil(a.kl.sum() as usize);
    let bourgain = ((a.kl.k(), a.kl.l()) == (2, 1)).then(|| (a.n + 2).div_ceil(3));
    let pass = r.min_value >= general && bourgain.is_none_or(|b| r.min_value >= b);
    let mut v = serde_json::to_value(&r)?;
    v["bounds"] = json!({ "general": general, "bourgain": bourgain });
    Ok(Outcome::checked(v, pass))
}

fn chars(a: &CharsArgs) -> anyhow::Result<Outcome> {
    let mut csv = Csv::new(&["n", "value"]);
    let mut rows = Vec::new();
    for n in a.range.iter() {
        let v = char_value(a.kind, n)?;
        csv.rows.push(vec![n.to_string(), v.to_string()]);
        rows.push(json!({ "n": n, "value": v }));
    }
    Ok(Outcome::ok(json!({ "kind": a.kind.to_string(), "values": rows })).with_csv(csv))
}

fn folner_spec(a: &FolnerArgs, m: u32) -> anyhow::Result<FolnerSpec> {
    Ok(if a.primes.is_empty() {
        FolnerSpec::first_primes(m, a.m as usize)
    } else {
        FolnerSpec::new(m, a.primes.clone())?
    })
}

fn folner(a: &FolnerArgs) -> anyhow::Result<Outcome> {
    let spec = folner_spec(a, a.m)?;
    if a.experiment {
        let p = a.kl.context("--experiment needs --kl")?;
        let levels: Vec<u32> = (0..=a.m).collect();
        let rows = folner_trend(&spec.primes, &levels, p, a.restricted)?;
        let pass = rows.iter().all(|r| r.lower_ok);
        let out: Vec<Value> = rows
            .iter()
            .map(|r| {
                json!({
                    "m": r.m,
                    "size": r.size,
                    "best": r.best,
                    "fraction": r.fraction.to_string(),
                    "witness": r.witness,
                    "lower_ok": r.lower_ok,
                    "ceil_ok": r.ceil_ok,
                })
            })
            .collect();
        return Ok(Outcome::checked(
            json!({ "primes": spec.primes, "rows": out, "finite_scale_proxy": true }),
            pass,
        ));
    }
    let set = folner_set(&spec)?;
    let mut v = json!({ "m": a.m, "primes": spec.primes, "size": set.len(), "set": set });
    if let Some(x) = a.defect {
        v["defect"] = json!(folner_defect(&spec, x)?.to_string());
    }
    Ok(Outcome::ok(v))
}

fn density(d: &DensityCmd) -> anyhow::Result<Outcome> {
    Ok(match d {
        DensityCmd::Profile { set, horizon } => {
            let prof = density_profile(set, *horizon);
            let mut csv = Csv::new(&["n", "density"]);
            for (i, v) in prof.values.iter().enumerate() {
                csv.rows.push(vec![(i + 1).to_string(), format!("{:.12}", v.to_f64())]);
            }
            Outcome::ok(json!({
                "horizon": horizon,
                "last": prof.values.last().map(Rational::to_string),
                "values": prof.values,
                "finite_scale_proxy": true,
            }))
            .with_csv(csv)
        }
        DensityCmd::Multiples { set, nfact, n } => Outcome::ok(json!({
            "value": density_on_multiples_profile(set, *nfact, *n)?.to_string(),
            "finite_scale_proxy": true,
        })),
        DensityCmd::Bound { m, kl, restricted } => {
            let b = density_bound(*m, *kl, *restricted)?;
            Outcome::ok(json!({ "bound": b.to_string(), "float": b.to_f64(), "limit": format!("1/{}", kl.sum()) }))
        }
        DensityCmd::Residues { period, residues, kl } => {
            let r = ResidueSet::new(*period, residues.clone())?;
            Outcome::ok(json!({ "sum_free": periodic_residue_sum_free(&r, *kl) }))
        }
    })
}

fn verify(v: &VerifyCmd, budget: Option<u64>, seed: u64) -> anyhow::Result<Outcome> {
    match v {
        VerifyCmd::Omega { kmax } => verify_omega(*kmax),
        VerifyCmd::Det { nmax, trials } => verify_det(*nmax, *trials, seed),
        VerifyCmd::Chars { limit, u } => verify_chars(*limit, u),
        VerifyCmd::Sieve { p, bound } => verify_sieve(*p, *bound),
        VerifyCmd::Series(a) => verify_series(a),
        VerifyCmd::Littlewood(a) => verify_littlewood(a, budget),
        VerifyCmd::All => {
            let parts = [
                VerifyCmd::Omega { kmax: 12 },
                VerifyCmd::Det { nmax: 8, trials: 100 },
                VerifyCmd::Chars { limit: 10_000, u: vec![2, 4, 6, 8] },
                VerifyCmd::Sieve { p: 101, bound: 10_000 },
                VerifyCmd::Series(SeriesArgs::default()),
                VerifyCmd::Littlewood(LittlewoodArgs::default()),
            ];
            let mut results = serde_json::Map::new();
            let mut pass = true;
            for part in &parts {
                let o = verify(part, budget, seed)?;
                pass &= o.pass;
                results.insert(part.name().to_string(), o.results);
            }
            results.insert("pass".into(), json!(pass));
            Ok(Outcome::checked(Value::Object(results), pass))
        }
    }
}

fn verify_omega(kmax: u32) -> anyhow::Result<Outcome> {
    let mut cases = 0u64;
    let mut failures = Vec::new();
    for k in 2..=kmax {
        for l in 1..k {
            let p = KLParams::new(k, l)?;
            for t in 1..=p.diff() {
                cases += 1;
                let len_ok = omega(p, t)?.length() == &Rational::new(1, p.sum() as i64);
                if !len_ok || !verify_omega_sum_free(p, t)? {
                    failures.push(json!({ "k": k, "l": l, "t": t }));
                }
            }
        }
    }
    let pass = failures.is_empty();
    Ok(Outcome::checked(json!({ "pass": pass, "cases": cases, "failures": failures }), pass))
}

fn verify_det(nmax: usize, trials: usize, seed: u64) -> anyhow::Result<Outcome> {
    use rand::{Rng, SeedableRng};
    if nmax > 12 {
        bail!("direct determinants are limited to n <= 12");
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut per_n = Vec::new();
    let mut worst_all: f64 = 0.0;
    for n in 1..=nmax {
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let theta: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..std::f64::consts::PI)).collect();
            let a = det_direct(DetKind::A, &theta)?;
            let b = det_direct(DetKind::B, &theta)?;
            let sines: f64 = theta.iter().map(|t| t.sin()).product();
            worst = worst
                .max(scaled_error(a, det_closed(DetKind::A, &theta)))
                .max(scaled_error(b, det_closed(DetKind::B, &theta)))
                .max(scaled_error(a, 2f64.powi(n as i32 - 1) * sines * b));
        }
        worst_all = worst_all.max(worst);
        per_n.push(json!({ "n": n, "worst_scaled_error": worst }));
    }
    let cheb = (1..=10u32)
        .map(|n| (chebyshev_leading_fd(n) - 2f64.powi(n as i32 - 1)).abs())
        .fold(0.0, f64::max);
    let pass = worst_all <= 1e-9 && cheb <= 1e-6;
    Ok(Outcome::checked(
        json!({ "pass": pass, "tol": 1e-9, "per_n": per_n, "chebyshev_lead_error": cheb }),
        pass,
    ))
}

fn verify_chars(limit: u64, us: &[u32]) -> anyhow::Result<Outcome> {
    let mut specs = vec![CharSpec::new(CharKind::PiChar)];
    for &u in us {
        specs.push(CharSpec::with_u(CharKind::PhiU, u));
        specs.push(CharSpec::with_u(CharKind::PsiCapU, u));
    }
    let mut rows = Vec::new();
    let mut pass = true;
    for s in specs {
        let f = multiplicativity_failures(s, limit)?;
        pass &= f.is_empty();
        rows.push(json!({
            "kind": s.to_string(),
            "multiplicative": f.is_empty(),
            "failing_pairs": f.len(),
            "first": f.first().map(|x| json!({ "a": x.a, "b": x.b, "f_ab": x.f_ab, "f_a_f_b": x.f_a_f_b })),
        }));
    }
    let psi = CharSpec::new(CharKind::Psi);
    let (p4, p2) = (char_value(psi, 4)?, char_value(psi, 2)?);
    let witness = p4 != p2 * p2;
    pass &= witness;
    Ok(Outcome::checked(
        json!({
            "pass": pass,
            "limit": limit,
            "characters": rows,
            "psi_not_multiplicative": { "psi(4)": p4, "psi(2)^2": p2 * p2, "exhibited": witness },
        }),
        pass,
    ))
}

fn verify_sieve(p: u64, bound: u64) -> anyhow::Result<Outcome> {
    let psi = sieve_ledger_psi(p, bound)?;
    let pi = sieve_ledger_pi(p, bound)?;
    let pass = psi.pass() && pi.pass();
    Ok(Outcome::checked(json!({ "pass": pass, "psi_ledger": psi, "pi_ledger": pi }), pass))
}

fn verify_series(a: &SeriesArgs) -> anyhow::Result<Outcome> {
    const TOL: f64 = 0.05;
    let pairs = if a.kl.is_empty() {
        vec![KLParams::new(3, 1)?, KLParams::new(4, 2)?, KLParams::new(5, 1)?]
    } else {
        a.kl.clone()
    };
    let mut rows = Vec::new();
    let mut pass = true;
    for p in pairs {
        let mut coeff_gap: f64 = 0.0;
        for t in 1..=p.diff() {
            let f = BalancedFn::new(p, t)?;
            for n in -50..=50 {
                coeff_gap = coeff_gap.max((fhat(f, n) - fhat_quadrature(f, n, 1e-11)).norm());
            }
        }
        let grid = 10 * a.points.max(1);
        let far: Vec<f64> =
            (0..grid).map(|j| j as f64 / grid as f64).filter(|&x| endpoint_distance(p, x) >= a.delta).collect();
        let pts: Vec<f64> = (0..a.points.min(far.len())).map(|i| far[i * far.len() / a.points]).collect();
        let res = {
            use rayon::prelude::*;
            pts.par_iter().map(|&x| cancellation_check(p, x, a.terms, a.delta)).collect::<Result<Vec<_>, _>>()?
        };
        let worst_f = res.iter().map(|r| r.f_residual).fold(0.0, f64::max);
        let worst_g = res.iter().filter_map(|r| r.g_residual).fold(0.0, f64::max);
        let ok = coeff_gap <= 1e-6 && worst_f <= TOL && worst_g <= TOL;
        pass &= ok;
        rows.push(json!({
            "kl": p.to_string(),
            "coefficient_gap": coeff_gap,
            "points": pts.len(),
            "worst_f_residual": worst_f,
            "worst_g_residual": if p.diff() % 2 == 0 { json!(worst_g) } else { Value::Null },
            "pass": ok,
        }));
    }
    Ok(Outcome::checked(json!({ "pass": pass, "tol": TOL, "terms": a.terms, "pairs": rows }), pass))
}

fn verify_littlewood(a: &LittlewoodArgs, budget: Option<u64>) -> anyhow::Result<Outcome> {
    let spec = TestFunctionSpec::new(a.a.clone(), a.r0, a.base, a.grid)?;
    let tf = build_phi(&spec)?;
    let ledger = invariant_ledger(&tf)?;
    let pass = ledger.pass();
    let diagnostics = if a.h_p > 0 && a.h_bound > 0 {
        let weights = match a.weights.as_str() {
            "ones" => HWeights::Ones,
            s => HWeights::Character(s.parse::<CharSpec>()?),
        };
        let h = HSeriesSpec::new(weights, a.h_p, a.beta, a.gamma.clone(), a.h_bound)?;
        let d = h_diagnostics(&h, &tf, budget.unwrap_or(DEFAULT_TERM_BUDGET))?;
        let log_n = (a.a.len() as f64).ln();
        json!({
            "h": d,
            "gamma_size": a.gamma.len(),
            "gamma_size_advisory_ok": (a.gamma.len() as f64) <= log_n,
            "asserted": false,
        })
    } else {
        Value::Null
    };
    let g_phi = ledger.g_phi_pairing;
    Ok(Outcome::checked(
        json!({
            "pass": pass,
            "grid": tf.spec.grid,
            "blocks": tf.blocks.iter().map(|b| json!({ "lo": b.lo, "hi": b.hi, "size": b.elements.len() })).collect::<Vec<_>>(),
            "ledger": ledger,
            "g_phi_pairing": { "re": g_phi.re, "im": g_phi.im },
            "diagnostics": diagnostics,
        }),
        pass,
    ))
}

fn replay(r: &ReplayArgs) -> anyhow::Result<Outcome> {
    let text = std::fs::read_to_string(&r.report).with_context(|| format!("reading {}", r.report.display()))?;
    let saved: Report = serde_json::from_str(&text).context("not a klfree report")?;
    if matches!(saved.params.command, Command::Replay(_)) {
        bail!("refusing to replay a replay");
    }
    let again = run(&saved.params, saved.seed)?;
    let identical = again.report.results == saved.results;
    Ok(Outcome::checked(
        json!({
            "report": r.report,
            "command": saved.command,
            "identical": identical,
            "saved_version": saved.version,
        }),
        identical,
    ))
}

/// Human-readable rendering of a results value.
pub fn render_human(report: &Report) -> String {
    let mut out = String::new();
    render_value(&mut out, "", &report.results, 0);
    let _ = writeln!(out, "({} in {:.1} ms)", report.command, report.timings_ms);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.iter().all(|x| x.is_number()) => {
            Some(a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
        }
        _ => None,
    }
}

fn render_value(out: &mut String, key: &str, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    if let Some(s) = scalar(v) {
        let _ = writeln!(out, "{pad}{key}: {s}");
        return;
    }
    match v {
        Value::Object(map) => {
            if !key.is_empty() {
                let _ = writeln!(out, "{pad}{key}:");
            }
            let d = if key.is_empty() { depth } else { depth + 1 };
            for (k, x) in map {
                render_value(out, k, x, d);
            }
        }
        Value::Array(rows) => {
            let _ = writeln!(out, "{pad}{key}:");
            let cols: Option<Vec<String>> = rows.first().and_then(|r| r.as_object()).map(|o| o.keys().cloned().collect());
            match cols {
                Some(cols) if rows.iter().all(|r| r.as_object().is_some_and(|o| o.values().all(|x| scalar(x).is_some()))) => {
                    let _ = writeln!(out, "{pad}  {}", cols.join("\t"));
                    for r in rows {
                        let cells: Vec<String> = cols.iter().map(|c| scalar(&r[c]).unwrap_or_default()).collect();
                        let _ = writeln!(out, "{pad}  {}", cells.join("\t"));
                    }
                }
                _ => {
                    for (i, r) in rows.iter().enumerate() {
                        render_value(out, &format!("[{i}]"), r, depth + 1);
                    }
                }
            }
        }
        _ => unreachable!(),
    }
}
