//! Abstract cost parameters, the per-run cost ledger and the closed-form
//! cost functions used by every other module.
//!
//! Logarithms are base 2. `log log n` is clamped to at least 1 so that cost
//! expressions stay finite and monotone for small inputs.

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cost of one memory-gate application as a function of the memory size N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostModel {
    /// `max(1, log N)^2`.
    Log2,
    /// Constant 1.
    Unit,
    /// `r * max(1, log N)` with `r = cell_bits`.
    Rlog,
}

impl CostModel {
    pub fn eval(self, memory_size: u64, cell_bits: u32) -> f64 {
        let lg = log2(memory_size as f64).max(1.0);
        match self {
            CostModel::Log2 => lg * lg,
            CostModel::Unit => 1.0,
            CostModel::Rlog => cell_bits as f64 * lg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostParams {
    pub read_model: CostModel,
    pub write_model: CostModel,
    pub c_search: f64,
    pub alpha: f64,
    pub c_ed: f64,
    pub cell_bits: u32,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            read_model: CostModel::Log2,
            write_model: CostModel::Log2,
            c_search: 3.0,
            alpha: 3.0,
            c_ed: 3.0,
            cell_bits: 64,
        }
    }
}

impl CostParams {
    /// Checks the constant lower bounds and `write(N) >= read(N)` on every
    /// power of two up to 2^62.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("c_search", self.c_search), ("c_ed", self.c_ed)] {
            if !v.is_finite() || v < 1.0 {
                return Err(Error::Config(format!("{name} must be a finite number >= 1, got {v}")));
            }
        }
        if self.cell_bits == 0 {
            return Err(Error::Config("cell_bits must be positive".into()));
        }
        for e in 0..=62u32 {
            let n = 1u64 << e;
            if self.qw(n) < self.qr(n) {
                return Err(Error::Config(format!(
                    "write_model({n}) = {} is below read_model({n}) = {}",
                    self.qw(n),
                    self.qr(n)
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: CostParams = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    /// QR_N.
    pub fn qr(&self, memory_size: u64) -> f64 {
        self.read_model.eval(memory_size, self.cell_bits)
    }

    /// QW_N.
    pub fn qw(&self, memory_size: u64) -> f64 {
        self.write_model.eval(memory_size, self.cell_bits)
    }
}

/// Charged queries and abstract time units of one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    pub queries: u64,
    pub time_units: f64,
}

impl CostLedger {
    pub fn new(queries: u64, time_units: f64) -> Self {
        CostLedger { queries, time_units }
    }

    pub fn merge(self, other: CostLedger) -> CostLedger {
        self + other
    }

    pub fn charge(&mut self, queries: u64, time_units: f64) {
        self.queries += queries;
        self.time_units += time_units;
    }
}

impl Add for CostLedger {
    type Output = CostLedger;
    fn add(self, o: CostLedger) -> CostLedger {
        CostLedger { queries: self.queries + o.queries, time_units: self.time_units + o.time_units }
    }
}

impl AddAssign for CostLedger {
    fn add_assign(&mut self, o: CostLedger) {
        *self = *self + o;
    }
}

/// Difference of two snapshots of the same monotone ledger.
impl Sub for CostLedger {
    type Output = CostLedger;
    fn sub(self, o: CostLedger) -> CostLedger {
        CostLedger {
            queries: self.queries - o.queries,
            time_units: (self.time_units - o.time_units).max(0.0),
        }
    }
}

pub fn log2(x: f64) -> f64 {
    x.log2()
}

/// `max(1, log log n)`.
pub fn loglog(n: f64) -> f64 {
    let l = n.log2();
    if l <= 1.0 {
        1.0
    } else {
        l.log2().max(1.0)
    }
}

pub fn ceil_sqrt(j: usize) -> u64 {
    (j as f64).sqrt().ceil() as u64
}

/// `lambda_k(n, m) = min{ log^k n + m, log^{(k+1)/2} n (loglog n)^{k-1} + log^{(k-1)/2} n (loglog n)^{k-1} m }`.
pub fn lambda_k(k: u32, n: u64, m: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidLength(format!("lambda_k needs n >= 2, got {n}")));
    }
    if k < 1 {
        return Err(Error::InvalidLength("lambda_k needs k >= 1".into()));
    }
    let lg = (n as f64).log2();
    let ll = loglog(n as f64);
    let kf = k as f64;
    let first = lg.powf(kf) + m;
    let second = lg.powf((kf + 1.0) / 2.0) * ll.powf(kf - 1.0) + lg.powf((kf - 1.0) / 2.0) * ll.powf(kf - 1.0) * m;
    Ok(first.min(second))
}

/// Memory sizes per recursion level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemorySizePlan {
    pub n_star: u64,
    /// Instance length -> N(n) (constructible rule) or N'(n) (decomposable rule).
    pub sizes: BTreeMap<u64, u64>,
    /// Memory size of the whole run: N(n*) in both rules.
    pub total: u64,
}

fn child_len(n: u64, m: f64) -> Result<u64> {
    if m.is_nan() || m <= 0.0 {
        return Err(Error::ProblemDefinition(format!("shrink factor m({n}) = {m} is not positive")));
    }
    let c = (n as f64 / m).ceil() as u64;
    if c >= n {
        return Err(Error::ProblemDefinition(format!("shrink does not terminate: ceil({n}/{m}) = {c} >= {n}")));
    }
    Ok(c.max(1))
}

/// N(n) for constructible instances: `c0` on small lengths, otherwise the
/// smallest power of two strictly greater than `(h(n)+1) * max(n, N(ceil(n/m(n))))`.
///
/// The right-hand side uses the child size `N(ceil(n/m(n)))`; the literal
/// recurrence `max{n, N(n)}` is circular.
pub fn memory_size_constructible(
    n: u64,
    h: &dyn Fn(u64) -> u64,
    m: &dyn Fn(u64) -> f64,
    is_small: &dyn Fn(u64) -> bool,
    c0: u64,
) -> Result<MemorySizePlan> {
    let mut chain = vec![n];
    let mut cur = n;
    while !is_small(cur) {
        cur = child_len(cur, m(cur))?;
        chain.push(cur);
    }
    let mut sizes = BTreeMap::new();
    let mut below = c0;
    for &len in chain.iter().rev() {
        let size = if is_small(len) {
            c0
        } else {
            let bound = (h(len) + 1)
                .checked_mul(len.max(below))
                .ok_or_else(|| Error::ValueRange("memory size overflow".into()))?;
            smallest_pow2_above(bound)?
        };
        sizes.insert(len, size);
        below = size;
    }
    Ok(MemorySizePlan { n_star: n, total: sizes[&n], sizes })
}

fn smallest_pow2_above(x: u64) -> Result<u64> {
    let mut p = 1u64;
    while p <= x {
        p = p.checked_mul(2).ok_or_else(|| Error::ValueRange("memory size overflow".into()))?;
    }
    Ok(p)
}

/// N'(n) = N'(ceil(n/m(n))) + M(n) with N'(small) = c0, and N(n*) = n* + N'(n*).
pub fn memory_size_decomposable(
    n: u64,
    m: &dyn Fn(u64) -> f64,
    per_level: &dyn Fn(u64) -> u64,
    is_small: &dyn Fn(u64) -> bool,
    c0: u64,
) -> Result<MemorySizePlan> {
    let mut chain = vec![n];
    let mut cur = n;
    while !is_small(cur) {
        cur = child_len(cur, m(cur))?;
        chain.push(cur);
    }
    let mut sizes = BTreeMap::new();
    let mut below = c0;
    for &len in chain.iter().rev() {
        let size = if is_small(len) { c0 } else { below + per_level(len) };
        sizes.insert(len, size);
        below = size;
    }
    Ok(MemorySizePlan { n_star: n, total: n + sizes[&n], sizes })
}
