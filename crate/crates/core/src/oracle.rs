//! Counted access to the problem input, the stochastic failure model and the
//! per-run context that carries the ledger.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::costmodel::{CostLedger, CostParams};
use crate::error::{Error, Result};
use crate::qprimitives::TauModel;

/// Largest per-call failure probability the amplified primitives accept.
pub const MAX_FAILURE: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorMode {
    #[default]
    Off,
    WrongValue,
    RandomCandidate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModel {
    pub per_call_failure: f64,
    pub seed: u64,
    pub mode: ErrorMode,
}

impl Default for ErrorModel {
    fn default() -> Self {
        ErrorModel::off()
    }
}

impl ErrorModel {
    pub fn off() -> Self {
        ErrorModel { per_call_failure: 0.0, seed: 0, mode: ErrorMode::Off }
    }

    pub fn new(per_call_failure: f64, seed: u64, mode: ErrorMode) -> Result<Self> {
        let e = ErrorModel { per_call_failure, seed, mode };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=MAX_FAILURE).contains(&self.per_call_failure) {
            return Err(Error::Contract(format!(
                "per-call failure {} outside [0, {MAX_FAILURE}]",
                self.per_call_failure
            )));
        }
        Ok(())
    }

    /// True when failures can actually be drawn.
    pub fn active(&self) -> bool {
        self.mode != ErrorMode::Off && self.per_call_failure > 0.0
    }
}

/// Outcome of a recursion-node audit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Audit {
    pub nodes: u64,
    pub max_depth: u32,
    pub violations: Vec<String>,
}

/// Per-run state: parameters, ledger, failure model and its random stream.
#[derive(Debug, Clone)]
pub struct Ctx {
    pub params: CostParams,
    pub ledger: CostLedger,
    pub err: ErrorModel,
    pub rng: ChaCha8Rng,
    pub audit: Audit,
    pub tau: TauModel,
}

impl Ctx {
    pub fn new(params: CostParams) -> Self {
        Ctx::with_errors(params, ErrorModel::off())
    }

    pub fn with_errors(params: CostParams, err: ErrorModel) -> Self {
        Ctx {
            params,
            ledger: CostLedger::default(),
            rng: ChaCha8Rng::seed_from_u64(err.seed),
            err,
            audit: Audit::default(),
            tau: TauModel::default(),
        }
    }

    pub fn charge(&mut self, queries: u64, time_units: f64) {
        self.ledger.charge(queries, time_units);
    }
}

impl Default for Ctx {
    fn default() -> Self {
        Ctx::new(CostParams::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Access {
    /// Read-only memory.
    Qram,
    /// Read-write memory.
    Qrag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    String,
    IntArray,
    IntMatrix { n: usize },
    BoxSet,
    DCube { d: usize, side: usize },
}

/// The input with counted, 1-based access.
///
/// Cells past the input length up to `memory_size` form lazily allocated
/// scratch space that reads as `T::default()` until written.
#[derive(Debug, Clone)]
pub struct InstanceStore<T> {
    cells: Vec<T>,
    kind: Kind,
    access: Access,
    memory_size: u64,
    scratch: BTreeMap<usize, T>,
}

impl<T: Copy + Default> InstanceStore<T> {
    pub fn new(cells: Vec<T>, kind: Kind, access: Access, memory_size: u64) -> Result<Self> {
        if (memory_size as usize) < cells.len() {
            return Err(Error::InvalidLength(format!(
                "memory size {memory_size} below input length {}",
                cells.len()
            )));
        }
        Ok(InstanceStore { cells, kind, access, memory_size, scratch: BTreeMap::new() })
    }

    /// Read-only store whose memory is exactly the input.
    pub fn qram(cells: Vec<T>, kind: Kind) -> Self {
        let n = cells.len().max(1) as u64;
        InstanceStore { cells, kind, access: Access::Qram, memory_size: n, scratch: BTreeMap::new() }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn access(&self) -> Access {
        self.access
    }

    pub fn memory_size(&self) -> u64 {
        self.memory_size
    }

    pub fn cells(&self) -> &[T] {
        &self.cells
    }

    fn check(&self, index: usize) -> Result<()> {
        if index == 0 || index as u64 > self.memory_size {
            return Err(Error::Index { index, len: self.memory_size as usize });
        }
        Ok(())
    }

    /// Charged read: one query and `QR_N` time units.
    pub fn read(&self, ctx: &mut Ctx, index: usize) -> Result<T> {
        self.check(index)?;
        ctx.charge(1, ctx.params.qr(self.memory_size));
        Ok(self.peek(index))
    }

    /// Charged write: one query and `QW_N` time units.
    pub fn write(&mut self, ctx: &mut Ctx, index: usize, value: T) -> Result<()> {
        if self.access == Access::Qram {
            return Err(Error::Mode);
        }
        self.check(index)?;
        ctx.charge(1, ctx.params.qw(self.memory_size));
        if index <= self.cells.len() {
            self.cells[index - 1] = value;
        } else {
            self.scratch.insert(index, value);
        }
        Ok(())
    }

    /// Uncharged access for primitives whose cost is charged by formula.
    /// Panics on an index outside memory.
    pub fn peek(&self, index: usize) -> T {
        if index <= self.cells.len() {
            self.cells[index - 1]
        } else {
            assert!(index as u64 <= self.memory_size, "peek past memory");
            self.scratch.get(&index).copied().unwrap_or_default()
        }
    }
}

/// Plain text as a byte string.
pub fn load_text(text: &str) -> Vec<u32> {
    text.trim_end_matches(['\n', '\r']).bytes().map(u32::from).collect()
}

/// Integers separated by commas and/or whitespace.
pub fn load_ints(text: &str) -> Result<Vec<i64>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<i64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
        .collect()
}

/// Square integer matrix from CSV rows.
pub fn load_matrix_csv(text: &str) -> Result<Vec<Vec<i64>>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let row = rec
            .iter()
            .map(|t| t.parse::<i64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("matrix is not square ({n} rows)")));
    }
    Ok(rows)
}
