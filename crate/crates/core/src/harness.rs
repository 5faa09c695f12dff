//! Experiment runner: random instances, oracle checks, benchmarks and
//! power-law fits.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::costmodel::{loglog, CostLedger, CostParams};
use crate::error::{Error, Result};
use crate::frameworks::TDescription;
use crate::geometry::{default_h, klee_coverage, AxisBox, CoverageInstance};
use crate::oracle::{Audit, Ctx, ErrorMode, ErrorModel, InstanceStore, Kind};
use crate::strings::{PoolingFamily, SignPattern};
use crate::{lds, matrix, oracles, strings};

/// Environment variable naming a JSON config file.
pub const CONFIG_ENV: &str = "QDC_CONFIG";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemTag {
    Ssst,
    Lisst,
    Lsic,
    L2002s,
    Dmsst,
    Kis,
    Kss,
    Rmp,
    Lds,
    Blds,
    Klee,
    Msm,
    M4c,
    Majred,
}

impl ProblemTag {
    pub const ALL: [ProblemTag; 14] = [
        ProblemTag::Ssst,
        ProblemTag::Lisst,
        ProblemTag::Lsic,
        ProblemTag::L2002s,
        ProblemTag::Dmsst,
        ProblemTag::Kis,
        ProblemTag::Kss,
        ProblemTag::Rmp,
        ProblemTag::Lds,
        ProblemTag::Blds,
        ProblemTag::Klee,
        ProblemTag::Msm,
        ProblemTag::M4c,
        ProblemTag::Majred,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemTag::Ssst => "ssst",
            ProblemTag::Lisst => "lisst",
            ProblemTag::Lsic => "lsic",
            ProblemTag::L2002s => "l2002s",
            ProblemTag::Dmsst => "dmsst",
            ProblemTag::Kis => "kis",
            ProblemTag::Kss => "kss",
            ProblemTag::Rmp => "rmp",
            ProblemTag::Lds => "lds",
            ProblemTag::Blds => "blds",
            ProblemTag::Klee => "klee",
            ProblemTag::Msm => "msm",
            ProblemTag::M4c => "m4c",
            ProblemTag::Majred => "majred",
        }
    }
}

impl fmt::Display for ProblemTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ProblemTag::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| Error::UnknownProblem(s.to_string()))
    }
}

/// Run settings. Loaded from JSON; command-line flags override fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub trials: usize,
    pub error_p: f64,
    pub error_mode: ErrorMode,
    /// Subsequence length for `kis` and `kss`.
    pub k: usize,
    /// Dimension for `dmsst` and `klee`.
    pub d: usize,
    /// Branching for `lds`, `blds` and `klee`; problem default when absent.
    pub h: Option<usize>,
    /// Symbols drawn for `lds` and `blds`.
    pub alphabet: u32,
    /// Integer entries are drawn from `-value_range..=value_range`.
    pub value_range: i64,
    /// Required success rate when failures are injected.
    pub min_success: f64,
    /// Record wall-clock times in benchmarks. Off keeps output reproducible.
    pub wall_clock: bool,
    pub cost: CostParams,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 1,
            trials: 20,
            error_p: 0.0,
            error_mode: ErrorMode::WrongValue,
            k: 3,
            d: 2,
            h: None,
            alphabet: 26,
            value_range: 1000,
            min_success: 0.9,
            wall_clock: false,
            cost: CostParams::default(),
        }
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Config = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Config::from_json(&text)
    }

    /// The file named by an explicit path, else by `QDC_CONFIG`, else defaults.
    pub fn resolve(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Config::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) => Config::load(Path::new(&p)),
                None => Ok(Config::default()),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cost.validate()?;
        self.error_model(0)?;
        if self.k == 0 || self.d == 0 || self.alphabet == 0 || self.value_range <= 0 {
            return Err(Error::Config("k, d, alphabet and value_range must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.min_success) {
            return Err(Error::Config(format!("min_success {} outside [0, 1]", self.min_success)));
        }
        Ok(())
    }

    pub fn errors_on(&self) -> bool {
        self.error_p > 0.0 && self.error_mode != ErrorMode::Off
    }

    fn error_model(&self, seed: u64) -> Result<ErrorModel> {
        let mode = if self.error_p > 0.0 { self.error_mode } else { ErrorMode::Off };
        ErrorModel::new(self.error_p, seed, mode).map_err(|e| Error::Config(e.to_string()))
    }

    fn ctx(&self, seed: u64) -> Result<Ctx> {
        // decorrelate the failure stream from the instance stream
        Ok(Ctx::with_errors(self.cost.clone(), self.error_model(seed ^ 0x9e37_79b9_7f4a_7c15)?))
    }
}

/// One solver run, with the oracle answer when an oracle ran.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub answer: String,
    pub expected: Option<String>,
    pub ledger: CostLedger,
    pub audit: Audit,
}

impl Outcome {
    pub fn correct(&self) -> Option<bool> {
        self.expected.as_ref().map(|e| *e == self.answer)
    }
}

fn show<T: fmt::Debug>(v: T) -> String {
    format!("{v:?}")
}

/// Keeps `Ok` oracle answers, maps capacity overflow to "no oracle".
fn oracle<T: fmt::Debug>(r: Result<T>, want: bool) -> Result<Option<String>> {
    if !want {
        return Ok(None);
    }
    match r {
        Ok(v) => Ok(Some(show(v))),
        Err(Error::OracleCapacity(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn ints(rng: &mut ChaCha8Rng, n: usize, r: i64) -> Vec<i64> {
    (0..n).map(|_| rng.gen_range(-r..=r)).collect()
}

fn need(n: usize, min: usize, what: &str) -> Result<()> {
    if n < min {
        return Err(Error::InvalidLength(format!("{what} needs n >= {min}, got {n}")));
    }
    Ok(())
}

/// Random box set of `n - 1` boxes on an integer grid in `[0, 8]^d`.
pub fn random_coverage(rng: &mut ChaCha8Rng, d: usize, n: usize) -> Result<CoverageInstance> {
    let boxes = (1..n)
        .map(|_| {
            let lo: Vec<i64> = (0..d).map(|_| rng.gen_range(-2..8)).collect();
            let hi: Vec<i64> = lo.iter().map(|&l| l + rng.gen_range(1..7)).collect();
            AxisBox::from_ints(&lo, &hi)
        })
        .collect::<Result<Vec<_>>>()?;
    CoverageInstance::new(AxisBox::from_ints(&vec![0; d], &vec![8; d])?, boxes)
}

/// Generates the `seed`-th instance of size `n`, solves it and, when
/// `with_oracle` is set and the instance is within the oracle's caps,
/// records the brute-force answer.
pub fn run_one(tag: ProblemTag, n: usize, seed: u64, cfg: &Config, with_oracle: bool) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ctx = cfg.ctx(seed)?;
    let c = &mut ctx;
    let r = cfg.value_range;
    let (answer, expected) = match tag {
        ProblemTag::Ssst => {
            need(n, 2, "ssst")?;
            let a = ints(&mut rng, n, r);
            (show(strings::ssst(c, &a)?), oracle(oracles::ssst(&a), with_oracle)?)
        }
        ProblemTag::Lisst => {
            need(n, 1, "lisst")?;
            let a = ints(&mut rng, n, r);
            (show(strings::lis_substring(c, &a)?), oracle(oracles::lis_substring(&a), with_oracle)?)
        }
        ProblemTag::Lsic => {
            need(n, 1, "lsic")?;
            let a: Vec<u32> = (0..n).map(|_| rng.gen_range(0..3)).collect();
            (show(strings::lsic(c, &a)?), oracle(oracles::lsic(&a), with_oracle)?)
        }
        ProblemTag::L2002s => {
            let a: Vec<u32> = (0..n).map(|_| [0, 0, 0, 0, 0, 0, 1, 2, 2, 2][rng.gen_range(0..10)]).collect();
            (show(strings::l2002s(c, &a)?), oracle(oracles::l2002s(&a), with_oracle)?)
        }
        ProblemTag::Dmsst => {
            need(n, 2, "dmsst side")?;
            let cells = n.checked_pow(cfg.d as u32).ok_or_else(|| Error::ValueRange("cube too large".into()))?;
            let a = ints(&mut rng, cells, r);
            (show(strings::d_msst(c, &a, cfg.d, n)?), oracle(oracles::d_msst(&a, cfg.d, n), with_oracle)?)
        }
        ProblemTag::Kis => {
            let a = ints(&mut rng, n, r);
            (show(strings::k_is(c, &a, cfg.k)?), oracle(oracles::k_is(&a, cfg.k), with_oracle)?)
        }
        ProblemTag::Kss => {
            let signs: Vec<i64> = (0..cfg.k).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
            let a = ints(&mut rng, n, r);
            let pattern = SignPattern::new(signs.clone())?;
            (show(strings::k_ss(c, &a, &pattern)?), oracle(oracles::k_ss(&a, &signs), with_oracle)?)
        }
        ProblemTag::Rmp => {
            if !n.is_power_of_two() {
                return Err(Error::InvalidLength(format!("rmp needs a power of two, got {n}")));
            }
            let fam = PoolingFamily::seeded(2, 1, n.trailing_zeros() as usize, seed)?;
            let a = ints(&mut rng, n, r);
            (show(strings::recursive_max_pooling(c, &fam, &a)?), oracle(oracles::max_pooling(&fam, &a), with_oracle)?)
        }
        ProblemTag::Lds => {
            need(n, 1, "lds")?;
            let a: Vec<u32> = (0..n).map(|_| rng.gen_range(0..cfg.alphabet)).collect();
            let h = cfg.h.unwrap_or(lds::DEFAULT_H);
            (show(lds::lds(c, &a, h)?), oracle(oracles::lds(&a), with_oracle)?)
        }
        ProblemTag::Blds => {
            need(n, 2, "blds")?;
            let a: Vec<u32> = (0..n).map(|_| rng.gen_range(0..cfg.alphabet)).collect();
            let mut pts = rand::seq::index::sample(&mut rng, n, 4.min(n)).into_vec();
            pts.sort_unstable();
            let desc = match pts.as_slice() {
                [x, y, z, w] => TDescription::new(vec![x + 1, y + 1, z + 1, w + 1])?,
                _ => TDescription::new(vec![1, 1, 2, 2])?,
            };
            let store = InstanceStore::qram(a.clone(), Kind::String);
            let h = cfg.h.unwrap_or(lds::DEFAULT_H);
            (show(lds::bipartite_lds(c, &store, &desc, h)?), oracle(oracles::blds(&a, &desc), with_oracle)?)
        }
        ProblemTag::Klee => {
            let inst = random_coverage(&mut rng, cfg.d.max(2), n.max(1))?;
            let h = cfg.h.unwrap_or(default_h(inst.d));
            (show(klee_coverage(c, &inst, h)?), oracle(oracles::coverage(&inst), with_oracle)?)
        }
        ProblemTag::Msm => {
            need(n, 1, "msm")?;
            let b: Vec<Vec<i64>> = (0..n).map(|_| ints(&mut rng, n, r)).collect();
            (show(matrix::max_submatrix(c, &b)?), oracle(oracles::max_submatrix(&b), with_oracle)?)
        }
        ProblemTag::M4c => {
            need(n, 1, "m4c")?;
            let b: Vec<Vec<i64>> = (0..n).map(|_| ints(&mut rng, n, r)).collect();
            (show(matrix::max_4combination(c, &b)?), oracle(oracles::max_4combination(&b), with_oracle)?)
        }
        ProblemTag::Majred => {
            need(n, 1, "majred")?;
            let x: Vec<bool> = (0..n * n).map(|_| rng.gen_bool(0.5)).collect();
            let (m, thr) = matrix::majority_reduction(&x)?;
            let got = matrix::max_submatrix(c, &m)?.0 > thr;
            let ones = x.iter().filter(|&&b| b).count();
            let truth = oracles::max_submatrix(&m).map(|_| ones > n * n / 2);
            (show(got), oracle(truth, with_oracle)?)
        }
    };
    Ok(Outcome { answer, expected, ledger: ctx.ledger, audit: ctx.audit })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub problem: ProblemTag,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub error_p: f64,
    pub matches: usize,
    pub rate: f64,
    pub audit_violations: usize,
    pub pass: bool,
}

/// Solver against oracle on `trials` seeded instances of size `n`.
/// Exact agreement is required without failures; with failures the
/// success rate must reach `cfg.min_success`.
pub fn verify(tag: ProblemTag, n: usize, cfg: &Config) -> Result<VerifyReport> {
    if cfg.trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    let outs: Vec<Outcome> =
        (0..cfg.trials as u64).into_par_iter().map(|t| run_one(tag, n, cfg.seed + t, cfg, true)).collect::<Result<_>>()?;
    if outs.iter().any(|o| o.expected.is_none()) {
        return Err(Error::OracleCapacity(format!("{tag} at n = {n} is beyond the oracle caps")));
    }
    let matches = outs.iter().filter(|o| o.correct() == Some(true)).count();
    let audit_violations = outs.iter().map(|o| o.audit.violations.len()).sum();
    let rate = matches as f64 / cfg.trials as f64;
    let pass = if cfg.errors_on() { rate >= cfg.min_success } else { matches == cfg.trials && audit_violations == 0 };
    Ok(VerifyReport { problem: tag, n, trials: cfg.trials, seed: cfg.seed, error_p: cfg.error_p, matches, rate, audit_violations, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub problem: ProblemTag,
    pub n: usize,
    pub seed: u64,
    pub queries: u64,
    pub time_units: f64,
    pub wall_ms: f64,
    pub correct: Option<bool>,
}

/// `nmin, nmin * factor, ...` up to `nmax`.
pub fn geometric_sizes(nmin: usize, nmax: usize, factor: usize) -> Result<Vec<usize>> {
    if nmin == 0 || factor < 2 || nmin > nmax {
        return Err(Error::Config(format!("bad size range {nmin}..{nmax} by {factor}")));
    }
    let mut out = vec![nmin];
    while let Some(n) = out.last().unwrap().checked_mul(factor).filter(|&n| n <= nmax) {
        out.push(n);
    }
    Ok(out)
}

/// One record per `(n, seed)`, ordered by `(n, seed)` whatever the thread schedule.
pub fn bench(tag: ProblemTag, sizes: &[usize], cfg: &Config, with_oracle: bool) -> Result<Vec<BenchRecord>> {
    let jobs: Vec<(usize, u64)> =
        sizes.iter().flat_map(|&n| (0..cfg.trials as u64).map(move |t| (n, cfg.seed + t))).collect();
    jobs.into_par_iter()
        .map(|(n, seed)| {
            let start = Instant::now();
            let o = run_one(tag, n, seed, cfg, with_oracle)?;
            let wall_ms = if cfg.wall_clock { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
            Ok(BenchRecord {
                problem: tag,
                n,
                seed,
                queries: o.ledger.queries,
                time_units: o.ledger.time_units,
                wall_ms,
                correct: o.correct(),
            })
        })
        .collect()
}

pub fn write_csv(records: &[BenchRecord], out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(|e| Error::Config(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Config(e.to_string()))
}

pub fn read_csv(input: impl std::io::Read) -> Result<Vec<BenchRecord>> {
    csv::Reader::from_reader(input).deserialize().map(|r| r.map_err(|e| Error::Parse(e.to_string()))).collect()
}

/// Polylog divisor applied to the query counts before fitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Divisor {
    None,
    /// `(log n)^x`.
    LogPow(f64),
    /// `log n * log log n`.
    LogLogLog,
}

impl Divisor {
    pub fn eval(self, n: f64) -> f64 {
        let lg = n.log2().max(1.0);
        match self {
            Divisor::None => 1.0,
            Divisor::LogPow(x) => lg.powf(x),
            Divisor::LogLogLog => lg * loglog(n),
        }
    }
}

impl fmt::Display for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Divisor::None => f.write_str("1"),
            Divisor::LogPow(x) => write!(f, "log^{x}"),
            Divisor::LogLogLog => f.write_str("log-loglog"),
        }
    }
}

impl FromStr for Divisor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "none" => Ok(Divisor::None),
            "log" => Ok(Divisor::LogPow(1.0)),
            "sqrt-log" => Ok(Divisor::LogPow(0.5)),
            "log-loglog" => Ok(Divisor::LogLogLog),
            _ => s
                .strip_prefix("log^")
                .and_then(|x| x.parse::<f64>().ok())
                .map(Divisor::LogPow)
                .ok_or_else(|| Error::Config(format!("unknown divisor {s:?}; use 1, log, sqrt-log, log-loglog or log^x"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub normalized_by: String,
    pub sizes: usize,
}

/// Least squares of `log2(mean queries / divisor)` against `log2 n`.
pub fn fit(records: &[BenchRecord], divisor: Divisor) -> Result<FitResult> {
    let mut by_n: std::collections::BTreeMap<usize, (f64, usize)> = Default::default();
    for r in records {
        let e = by_n.entry(r.n).or_default();
        e.0 += r.queries as f64;
        e.1 += 1;
    }
    if by_n.len() < 4 {
        return Err(Error::TooShort(format!("fit needs at least 4 sizes, got {}", by_n.len())));
    }
    let pts: Vec<(f64, f64)> =
        by_n.iter().map(|(&n, &(q, c))| ((n as f64).log2(), (q / c as f64 / divisor.eval(n as f64)).log2())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(FitResult { slope, intercept: my - slope * mx, r2, normalized_by: divisor.to_string(), sizes: by_n.len() })
}

/// `(2 alpha)^(2k) sqrt(n log^(k-1) n)`.
pub fn kis_query_bound(alpha: f64, k: usize, n: usize) -> f64 {
    let nf = n as f64;
    (2.0 * alpha).powi(2 * k as i32) * (nf * nf.log2().max(1.0).powi(k as i32 - 1)).sqrt()
}

/// Solves a problem on input text in the format the problem expects.
pub fn solve_text(tag: ProblemTag, text: &str, cfg: &Config) -> Result<(String, CostLedger)> {
    use crate::oracle::{load_ints, load_matrix_csv, load_text};
    let mut ctx = cfg.ctx(cfg.seed)?;
    let c = &mut ctx;
    let answer = match tag {
        ProblemTag::Ssst => show(strings::ssst(c, &load_ints(text)?)?),
        ProblemTag::Lisst => show(strings::lis_substring(c, &load_ints(text)?)?),
        ProblemTag::Lsic => show(strings::lsic(c, &load_text(text))?),
        ProblemTag::L2002s => {
            let digits = load_text(text).into_iter().map(|b| b.wrapping_sub(u32::from(b'0'))).collect::<Vec<_>>();
            show(strings::l2002s(c, &digits)?)
        }
        ProblemTag::Dmsst => {
            let a = load_ints(text)?;
            let side = (a.len() as f64).powf(1.0 / cfg.d as f64).round() as usize;
            show(strings::d_msst(c, &a, cfg.d, side)?)
        }
        ProblemTag::Kis => show(strings::k_is(c, &load_ints(text)?, cfg.k)?),
        ProblemTag::Kss => show(strings::k_ss(c, &load_ints(text)?, &SignPattern::transactions(cfg.k)?)?),
        ProblemTag::Rmp => {
            let a = load_ints(text)?;
            if !a.len().is_power_of_two() {
                return Err(Error::InvalidLength(format!("rmp needs a power of two, got {}", a.len())));
            }
            let fam = PoolingFamily::halves(a.len().trailing_zeros() as usize);
            show(strings::recursive_max_pooling(c, &fam, &a)?)
        }
        ProblemTag::Lds => show(lds::lds(c, &load_text(text), cfg.h.unwrap_or(lds::DEFAULT_H))?),
        ProblemTag::Blds => {
            let a = load_text(text);
            let n = a.len();
            need(n, 2, "blds")?;
            let desc = TDescription::new(vec![1, n / 2, n / 2 + 1, n])?;
            show(lds::bipartite_lds(c, &InstanceStore::qram(a, Kind::String), &desc, cfg.h.unwrap_or(lds::DEFAULT_H))?)
        }
        ProblemTag::Klee => {
            let inst = CoverageInstance::from_json(text)?;
            let h = cfg.h.unwrap_or(default_h(inst.d));
            show(klee_coverage(c, &inst, h)?)
        }
        ProblemTag::Msm => show(matrix::max_submatrix(c, &load_matrix_csv(text)?)?),
        ProblemTag::M4c => show(matrix::max_4combination(c, &load_matrix_csv(text)?)?),
        ProblemTag::Majred => {
            let x: Vec<bool> = load_ints(text)?.into_iter().map(|v| v != 0).collect();
            let (m, thr) = matrix::majority_reduction(&x)?;
            show(matrix::max_submatrix(c, &m)?.0 > thr)
        }
    };
    Ok((answer, ctx.ledger))
}
