//! Seeded Monte Carlo experiments, exact small-`n` solvability, and curve
//! fitting.
//!
//! Trials run in parallel on a rayon pool but each one draws from its own
//! RNG stream (see [`crate::generators::trial_rng`]) and results are
//! aggregated in trial order, so the CSV output does not depend on the
//! thread count.

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use num_rational::Ratio;
use num_traits::Float;
use rayon::prelude::*;
use thiserror::Error;

use crate::derive::{cycle_stats, CycleStats};
use crate::enumeration::{solution_sets, DEFAULT_BUDGET};
use crate::generators::{trial_rng, Culture, CultureKind, GenError, DEFAULT_PHI};
use crate::model::{AgentId, Instance};
use crate::partition::stable_partition;

/// Exact CSV header.
pub const CSV_HEADER: &str = "culture,n,trials,seed,solvable,p_hat,avg_P,avg_RP,avg_M,avg_SC,avg_RSC,avg_SP,avg_nodd,avg_odd_len,avg_odd_cnt,c1,c3,c5,c7,c9,c11,c13plus,alpha_hat,timeouts,ms";

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "SR_THREADS";

/// Largest `n` for [`exact_pn`].
pub const EXACT_MAX_N: usize = 5;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("exact enumeration supports 2 <= n <= {EXACT_MAX_N}, got {0}")]
    TooLargeForExact(usize),
    #[error("could not build thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FitError {
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
}

/// Which statistics an experiment computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StatFlags {
    pub solvability: bool,
    /// `|P|` and `|RP|`.
    pub partitions: bool,
    /// `|M|`, `|SC|`, `|RSC|`, `|SP|`.
    pub enumeration: bool,
    pub odd_cycles: bool,
    pub alpha: bool,
}

impl Default for StatFlags {
    fn default() -> Self {
        StatFlags {
            solvability: true,
            partitions: false,
            enumeration: false,
            odd_cycles: true,
            alpha: true,
        }
    }
}

impl StatFlags {
    fn needs_enumeration(&self) -> bool {
        self.partitions || self.enumeration
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub cultures: Vec<Culture>,
    pub sizes: Vec<usize>,
    /// Trials per cell; `None` picks 10,000 (100 for `n >= 1000`, 2,000
    /// when enumeration statistics are on).
    pub trials: Option<u64>,
    pub seed: u64,
    pub stats: StatFlags,
    /// Node budget per enumeration call.
    pub budget: u64,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    pub out: Option<PathBuf>,
    /// Enumeration statistics are reported as NA above this size.
    pub enum_max_n: usize,
    /// Record wall-clock time per cell. Off by default since timings make
    /// the CSV non-reproducible.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            cultures: vec![Culture::new(CultureKind::Ic)],
            sizes: vec![10],
            trials: None,
            seed: 0,
            stats: StatFlags::default(),
            budget: DEFAULT_BUDGET,
            threads: 0,
            out: None,
            enum_max_n: 200,
            timing: false,
        }
    }
}

fn bad(key: &str, value: &str, reason: impl fmt::Display) -> ConfigError {
    ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(bad(key, value, "expected true or false")),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| bad(key, value, e))
}

/// Parses a size list such as `10,11,50..60` or `50..200:10` (ranges are
/// inclusive, with an optional step).
pub fn parse_sizes(value: &str) -> Result<Vec<usize>, ConfigError> {
    let mut sizes = Vec::new();
    for part in value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, rest)) = part.split_once("..") {
            let (hi, step) = match rest.split_once(':') {
                Some((hi, step)) => (hi, parse_num::<usize>("sizes", step)?),
                None => (rest, 1),
            };
            let lo: usize = parse_num("sizes", lo)?;
            let hi: usize = parse_num("sizes", hi)?;
            if step == 0 || lo > hi {
                return Err(bad("sizes", part, "empty range"));
            }
            sizes.extend((lo..=hi).step_by(step));
        } else {
            sizes.push(parse_num("sizes", part)?);
        }
    }
    if sizes.is_empty() {
        return Err(bad("sizes", value, "no sizes given"));
    }
    Ok(sizes)
}

impl ExperimentConfig {
    /// Parses flat `key=value` text; `#` starts a comment line.
    pub fn from_kv_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: k + 1 })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    /// Sets one key. Used for config files and command-line overrides alike.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "cultures" | "culture" => {
                let phi = self.phi();
                self.cultures = value
                    .split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(|t| {
                        t.parse::<CultureKind>()
                            .map(|kind| Culture { kind, phi })
                            .map_err(|e| bad(key, value, e))
                    })
                    .collect::<Result<_, _>>()?;
                if self.cultures.is_empty() {
                    return Err(bad(key, value, "no cultures given"));
                }
            }
            "sizes" | "n" => self.sizes = parse_sizes(value)?,
            "trials" => {
                let t: u64 = parse_num(key, value)?;
                if t == 0 {
                    return Err(bad(key, value, "need at least one trial"));
                }
                self.trials = Some(t);
            }
            "seed" => self.seed = parse_num(key, value)?,
            "solvability" => self.stats.solvability = parse_bool(key, value)?,
            "partitions" => self.stats.partitions = parse_bool(key, value)?,
            "enumeration" => self.stats.enumeration = parse_bool(key, value)?,
            "odd_cycles" => self.stats.odd_cycles = parse_bool(key, value)?,
            "alpha" => self.stats.alpha = parse_bool(key, value)?,
            "budget" => self.budget = parse_num(key, value)?,
            "threads" => self.threads = parse_num(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "enum_max_n" => self.enum_max_n = parse_num(key, value)?,
            "timing" => self.timing = parse_bool(key, value)?,
            "phi" => {
                let phi: f64 = parse_num(key, value)?;
                Culture::mallows(phi).map_err(|e| bad(key, value, e))?;
                for c in &mut self.cultures {
                    c.phi = phi;
                }
            }
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies `SR_THREADS` when it is set.
    pub fn apply_env(&mut self) -> Result<(), ConfigError> {
        if let Ok(v) = std::env::var(THREADS_ENV) {
            self.threads = parse_num(THREADS_ENV, v.trim())?;
        }
        Ok(())
    }

    fn phi(&self) -> f64 {
        self.cultures.first().map_or(DEFAULT_PHI, |c| c.phi)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.cultures.is_empty() {
            return Err(ConfigError::Invalid("no cultures".into()));
        }
        if self.sizes.iter().any(|&n| n < 2) {
            return Err(ConfigError::Invalid("sizes must be at least 2".into()));
        }
        if self.trials == Some(0) {
            return Err(ConfigError::Invalid("trials must be at least 1".into()));
        }
        Ok(())
    }

    /// Trials used for a cell of size `n`.
    pub fn trials_for(&self, n: usize) -> u64 {
        self.trials.unwrap_or(if n >= 1000 {
            100
        } else if self.stats.needs_enumeration() {
            2_000
        } else {
            10_000
        })
    }
}

/// Sizes of the enumerated solution sets of one instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counts {
    pub partitions: usize,
    pub reduced_partitions: usize,
    pub matchings: usize,
    pub stable_cycles: usize,
    pub reduced_stable_cycles: usize,
    pub stable_pairs: usize,
}

/// Statistics of a single trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialStats {
    pub solvable: bool,
    pub cycles: CycleStats,
    pub counts: Option<Counts>,
    pub timed_out: bool,
}

/// What a trial should compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOptions {
    pub enumerate: bool,
    pub budget: u64,
}

/// Regenerates trial `trial` of a cell and computes its statistics. Also
/// serves as the audit hook: the same coordinates always give the same
/// result.
pub fn run_trial(
    culture: &Culture,
    n: usize,
    master: u64,
    trial: u64,
    options: TrialOptions,
) -> Result<TrialStats, GenError> {
    let inst = culture.generate(n, &mut trial_rng(master, culture.kind, n, trial))?;
    Ok(trial_stats(&inst, options))
}

pub fn trial_stats(inst: &Instance, options: TrialOptions) -> TrialStats {
    let p = stable_partition(inst);
    let cycles = cycle_stats(&p);
    let solvable = cycles.odd_lengths.iter().all(|&l| l == 1);
    let (counts, timed_out) = if options.enumerate {
        let sets = solution_sets(inst, options.budget);
        let counts = Counts {
            partitions: sets.all_partitions.len(),
            reduced_partitions: sets.reduced_partitions.len(),
            matchings: sets.matchings.len(),
            stable_cycles: sets.stable_cycles.len(),
            reduced_stable_cycles: sets.reduced_stable_cycles.len(),
            stable_pairs: sets.stable_pairs.len(),
        };
        (Some(counts), sets.budget_exhausted)
    } else {
        (None, false)
    };
    TrialStats {
        solvable,
        cycles,
        counts,
        timed_out,
    }
}

/// One aggregated CSV row. `None` renders as `NA`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub culture: String,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub solvable: Option<u64>,
    pub p_hat: Option<f64>,
    pub avg_p: Option<f64>,
    pub avg_rp: Option<f64>,
    pub avg_m: Option<f64>,
    pub avg_sc: Option<f64>,
    pub avg_rsc: Option<f64>,
    pub avg_sp: Option<f64>,
    pub avg_nodd: Option<f64>,
    pub avg_odd_len: Option<f64>,
    pub avg_odd_cnt: Option<f64>,
    /// Mean number of odd cycles of length 1, 3, ..., 11 and 13 or more.
    pub length_counts: [Option<f64>; 7],
    pub alpha_hat: Option<f64>,
    pub timeouts: u64,
    pub ms: Option<f64>,
    /// Culture not defined for this `n` (symmetric with odd `n`).
    pub skipped: bool,
}

impl ExperimentRecord {
    fn skipped(culture: &Culture, n: usize, seed: u64) -> Self {
        ExperimentRecord {
            culture: culture.tag().to_string(),
            n,
            trials: 0,
            seed,
            solvable: None,
            p_hat: None,
            avg_p: None,
            avg_rp: None,
            avg_m: None,
            avg_sc: None,
            avg_rsc: None,
            avg_sp: None,
            avg_nodd: None,
            avg_odd_len: None,
            avg_odd_cnt: None,
            length_counts: [None; 7],
            alpha_hat: None,
            timeouts: 0,
            ms: None,
            skipped: true,
        }
    }

    pub fn to_csv_row(&self) -> String {
        fn f(v: Option<f64>) -> String {
            v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"))
        }
        let mut cols = vec![
            self.culture.clone(),
            self.n.to_string(),
            self.trials.to_string(),
            self.seed.to_string(),
            self.solvable
                .map_or_else(|| "NA".to_string(), |s| s.to_string()),
            f(self.p_hat),
            f(self.avg_p),
            f(self.avg_rp),
            f(self.avg_m),
            f(self.avg_sc),
            f(self.avg_rsc),
            f(self.avg_sp),
            f(self.avg_nodd),
            f(self.avg_odd_len),
            f(self.avg_odd_cnt),
        ];
        cols.extend(self.length_counts.iter().map(|&c| f(c)));
        cols.push(f(self.alpha_hat));
        cols.push(self.timeouts.to_string());
        cols.push(
            self.ms
                .map_or_else(|| "NA".to_string(), |m| format!("{m:.0}")),
        );
        cols.join(",")
    }
}

pub fn to_csv(records: &[ExperimentRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.to_csv_row());
        out.push('\n');
    }
    out
}

fn mean(sum: f64, count: u64) -> Option<f64> {
    (count > 0).then(|| sum / count as f64)
}

fn aggregate(
    culture: &Culture,
    n: usize,
    seed: u64,
    stats: StatFlags,
    results: &[TrialStats],
) -> ExperimentRecord {
    let mut rec = ExperimentRecord::skipped(culture, n, seed);
    rec.skipped = false;
    rec.trials = results.len() as u64;

    let kept: Vec<&TrialStats> = results.iter().filter(|t| !t.timed_out).collect();
    rec.timeouts = (results.len() - kept.len()) as u64;
    let total = kept.len() as u64;

    for t in &kept {
        let q = t.cycles.q;
        if !t.solvable {
            let min_q = if n.is_multiple_of(2) { 2 } else { 1 };
            assert!(
                q >= min_q,
                "unsolvable trial at n={n} with only {q} odd cycles"
            );
        }
    }

    let solvable = kept.iter().filter(|t| t.solvable).count() as u64;
    if stats.solvability {
        rec.solvable = Some(solvable);
        rec.p_hat = mean(solvable as f64, total);
    }

    let enumerated: Vec<(&TrialStats, Counts)> = kept
        .iter()
        .filter_map(|t| t.counts.map(|c| (*t, c)))
        .collect();
    if !enumerated.is_empty() {
        let all = enumerated.len() as u64;
        let sum =
            |g: fn(&Counts) -> usize| enumerated.iter().map(|(_, c)| g(c) as f64).sum::<f64>();
        let solvable_sum = |g: fn(&Counts) -> usize| {
            enumerated
                .iter()
                .filter(|(t, _)| t.solvable)
                .map(|(_, c)| g(c) as f64)
                .sum::<f64>()
        };
        let solvable_count = enumerated.iter().filter(|(t, _)| t.solvable).count() as u64;
        if stats.partitions {
            rec.avg_p = mean(sum(|c| c.partitions), all);
            rec.avg_rp = mean(sum(|c| c.reduced_partitions), all);
        }
        if stats.enumeration {
            rec.avg_m = mean(solvable_sum(|c| c.matchings), solvable_count);
            rec.avg_sc = mean(sum(|c| c.stable_cycles), all);
            rec.avg_rsc = mean(sum(|c| c.reduced_stable_cycles), all);
            rec.avg_sp = mean(solvable_sum(|c| c.stable_pairs), solvable_count);
        }
    }

    if stats.odd_cycles {
        let unsolvable: Vec<&&TrialStats> = kept.iter().filter(|t| !t.solvable).collect();
        let u = unsolvable.len() as u64;
        let n_odd: usize = unsolvable.iter().map(|t| t.cycles.n_odd).sum();
        let q: usize = unsolvable.iter().map(|t| t.cycles.q).sum();
        rec.avg_nodd = mean(n_odd as f64, u);
        rec.avg_odd_cnt = mean(q as f64, u);
        rec.avg_odd_len = mean(n_odd as f64, q as u64);
        let mut buckets = [0usize; 7];
        for t in &unsolvable {
            for (&len, &count) in &t.cycles.per_length_counts {
                buckets[(len / 2).min(6)] += count;
            }
        }
        for (slot, &b) in rec.length_counts.iter_mut().zip(&buckets) {
            *slot = mean(b as f64, u);
        }
    }

    if stats.alpha {
        let sum: f64 = kept
            .iter()
            .map(|t| *t.cycles.alpha.numer() as f64 / *t.cycles.alpha.denom() as f64)
            .sum();
        rec.alpha_hat = mean(sum, total);
    }
    rec
}

fn build_pool(threads: usize) -> Result<rayon::ThreadPool, ExperimentError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if threads > 0 {
        builder = builder.num_threads(threads);
    }
    builder
        .build()
        .map_err(|e| ExperimentError::ThreadPool(e.to_string()))
}

/// Runs every `(culture, n)` cell and writes the CSV when `out` is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    config.validate()?;
    let pool = build_pool(config.threads)?;
    let mut records = Vec::new();
    for culture in &config.cultures {
        for &n in &config.sizes {
            if culture.kind == CultureKind::Symmetric && n % 2 == 1 {
                records.push(ExperimentRecord::skipped(culture, n, config.seed));
                continue;
            }
            let start = Instant::now();
            let trials = config.trials_for(n);
            let options = TrialOptions {
                enumerate: config.stats.needs_enumeration() && n <= config.enum_max_n,
                budget: config.budget,
            };
            let results: Vec<TrialStats> = pool.install(|| {
                (0..trials)
                    .into_par_iter()
                    .map(|t| {
                        run_trial(culture, n, config.seed, t, options)
                            .expect("culture and size were validated")
                    })
                    .collect()
            });
            let mut rec = aggregate(culture, n, config.seed, config.stats, &results);
            if config.timing {
                rec.ms = Some(start.elapsed().as_secs_f64() * 1000.0);
            }
            records.push(rec);
        }
    }
    if let Some(path) = &config.out {
        fs::write(path, to_csv(&records))?;
    }
    Ok(records)
}

/// Mean `alpha` per cell over all trials, solvable or not.
pub fn alpha_sweep(config: &ExperimentConfig) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let mut cfg = config.clone();
    cfg.stats = StatFlags {
        solvability: true,
        partitions: false,
        enumeration: false,
        odd_cycles: false,
        alpha: true,
    };
    run_experiment(&cfg)
}

/// Exact count of solvable preference profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactPn {
    pub n: usize,
    pub solvable: u64,
    pub total: u64,
}

impl ExactPn {
    pub fn ratio(&self) -> Ratio<u64> {
        Ratio::new(self.solvable, self.total)
    }

    pub fn value(&self) -> f64 {
        self.solvable as f64 / self.total as f64
    }
}

impl fmt::Display for ExactPn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} = {:.4}", self.solvable, self.total, self.value())
    }
}

fn permutations(items: &[AgentId]) -> Vec<Vec<AgentId>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for k in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Fraction of all `((n-1)!)^n` profiles on `n` agents that are solvable,
/// by checking every profile.
pub fn exact_pn(n: usize) -> Result<ExactPn, ExperimentError> {
    if !(2..=EXACT_MAX_N).contains(&n) {
        return Err(ExperimentError::TooLargeForExact(n));
    }
    let options: Vec<Vec<Vec<AgentId>>> = (0..n)
        .map(|i| {
            let others: Vec<AgentId> = (0..n).filter(|&j| j != i).map(AgentId::new).collect();
            permutations(&others)
        })
        .collect();
    let per_row = options[0].len();
    // Split on agent 0's list; each chunk walks the remaining rows as an odometer.
    let solvable: u64 = (0..per_row)
        .into_par_iter()
        .map(|first| {
            let mut digits = vec![0usize; n];
            digits[0] = first;
            let mut count = 0u64;
            loop {
                let rows = (0..n).map(|i| options[i][digits[i]].clone()).collect();
                let inst = Instance::new(n, rows).expect("permutation rows");
                if cycle_stats(&stable_partition(&inst))
                    .odd_lengths
                    .iter()
                    .all(|&l| l == 1)
                {
                    count += 1;
                }
                let mut i = n - 1;
                loop {
                    if i == 0 {
                        return count;
                    }
                    digits[i] += 1;
                    if digits[i] < per_row {
                        break;
                    }
                    digits[i] = 0;
                    i -= 1;
                }
            }
        })
        .sum();
    Ok(ExactPn {
        n,
        solvable,
        total: (per_row as u64).pow(n as u32),
    })
}

/// A fitted curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model<F> {
    /// `a * n^b`
    PowerLaw { a: F, b: F },
    /// `c * sqrt(n / ln n)`
    SqrtLog { c: F },
}

impl<F: Float> Model<F> {
    pub fn eval(&self, n: F) -> F {
        match *self {
            Model::PowerLaw { a, b } => a * n.powf(b),
            Model::SqrtLog { c } => c * (n / n.ln()).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult<F> {
    pub model: Model<F>,
    /// Euclidean norm of `y - model(n)` over the input points.
    pub residual_norm: F,
}

fn residual<F: Float>(model: &Model<F>, points: &[(F, F)]) -> F {
    points
        .iter()
        .map(|&(x, y)| {
            let d = y - model.eval(x);
            d * d
        })
        .fold(F::zero(), |a, b| a + b)
        .sqrt()
}

fn check_points<F: Float>(points: &[(F, F)]) -> Result<(), FitError> {
    if points.len() < 3 {
        return Err(FitError::DegenerateInput("need at least 3 points"));
    }
    if points
        .iter()
        .any(|&(x, y)| !(x > F::zero() && y > F::zero()))
    {
        return Err(FitError::DegenerateInput("values must be positive"));
    }
    Ok(())
}

/// Least squares on `(ln n, ln y)`.
pub fn fit_power_law<F: Float>(points: &[(F, F)]) -> Result<FitResult<F>, FitError> {
    check_points(points)?;
    let m = F::from(points.len()).expect("point count fits a float");
    let logs: Vec<(F, F)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mx = logs.iter().fold(F::zero(), |s, p| s + p.0) / m;
    let my = logs.iter().fold(F::zero(), |s, p| s + p.1) / m;
    let sxx = logs
        .iter()
        .fold(F::zero(), |s, p| s + (p.0 - mx) * (p.0 - mx));
    let sxy = logs
        .iter()
        .fold(F::zero(), |s, p| s + (p.0 - mx) * (p.1 - my));
    if sxx <= F::epsilon() {
        return Err(FitError::DegenerateInput("all n values coincide"));
    }
    let b = sxy / sxx;
    let a = (my - b * mx).exp();
    let model = Model::PowerLaw { a, b };
    Ok(FitResult {
        model,
        residual_norm: residual(&model, points),
    })
}

/// One-parameter least squares for `c * sqrt(n / ln n)`.
pub fn fit_sqrt_log<F: Float>(points: &[(F, F)]) -> Result<FitResult<F>, FitError> {
    check_points(points)?;
    if points.iter().any(|&(x, _)| x <= F::one()) {
        return Err(FitError::DegenerateInput("n must exceed 1"));
    }
    let (num, den) = points
        .iter()
        .fold((F::zero(), F::zero()), |(num, den), &(x, y)| {
            let f = (x / x.ln()).sqrt();
            (num + y * f, den + f * f)
        });
    let model = Model::SqrtLog { c: num / den };
    Ok(FitResult {
        model,
        residual_norm: residual(&model, points),
    })
}
