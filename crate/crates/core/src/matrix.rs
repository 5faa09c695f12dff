//! Rectangle problems on square integer matrices.

use std::cmp::Reverse;

use crate::error::{Error, Result};
use crate::oracle::{Ctx, InstanceStore, Kind};
use crate::qprimitives::q_max;
use crate::strings::{ssst, Span};

/// `(value, (i, k), (j, l))` with 1-based corners.
pub type Rect = (i64, (usize, usize), (usize, usize));

type RectKey = (i64, Reverse<(usize, usize, usize, usize)>);

fn side(b: &[Vec<i64>]) -> Result<usize> {
    let n = b.len();
    if n == 0 || b.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidLength("matrix must be square and non-empty".into()));
    }
    Ok(n)
}

/// Two-dimensional prefix sums with a zero border, indices `0..=n`.
#[derive(Debug, Clone)]
pub struct PrefixMatrix {
    store: InstanceStore<i64>,
    n: usize,
}

impl PrefixMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, k: usize) -> i64 {
        self.store.peek(self.index(i, k))
    }

    fn index(&self, i: usize, k: usize) -> usize {
        i * (self.n + 1) + k + 1
    }

    fn read(&self, ctx: &mut Ctx, i: usize, k: usize) -> Result<i64> {
        self.store.read(ctx, self.index(i, k))
    }

    /// `F_C((i, k), (j, l)) = C_jl - C_il - C_jk + C_ik`.
    pub fn f(&self, ctx: &mut Ctx, (i, k): (usize, usize), (j, l): (usize, usize)) -> Result<i64> {
        Ok(self.read(ctx, j, l)? - self.read(ctx, i, l)? - self.read(ctx, j, k)? + self.read(ctx, i, k)?)
    }
}

pub fn prefix_matrix(ctx: &mut Ctx, b: &[Vec<i64>]) -> Result<PrefixMatrix> {
    let n = side(b)?;
    let w = n + 1;
    let mut c = vec![0i64; w * w];
    let overflow = || Error::ValueRange("prefix sum overflows 64 bits".into());
    for i in 1..=n {
        for k in 1..=n {
            let v = b[i - 1][k - 1]
                .checked_add(c[(i - 1) * w + k])
                .and_then(|v| v.checked_add(c[i * w + k - 1]))
                .and_then(|v| v.checked_sub(c[(i - 1) * w + k - 1]))
                .ok_or_else(overflow)?;
            c[i * w + k] = v;
        }
    }
    let store = InstanceStore::new(c, Kind::IntMatrix { n: w }, crate::oracle::Access::Qrag, (w * w) as u64)?;
    let cells = (n * n) as u64;
    ctx.charge(cells, cells as f64 * ctx.params.qw(store.memory_size()));
    Ok(PrefixMatrix { store, n })
}

fn unkey((v, Reverse((i, k, j, l))): RectKey) -> Rect {
    (v, (i, k), (j, l))
}

/// Maximum rectangle sum over all `(i, k) <= (j, l)` corners.
pub fn max_submatrix(ctx: &mut Ctx, b: &[Vec<i64>]) -> Result<Rect> {
    let n = side(b)?;
    let c = prefix_matrix(ctx, b)?;
    let spans: Vec<(usize, usize)> = (1..=n).flat_map(|i| (i..=n).map(move |j| (i, j))).collect();
    let m = spans.len();
    let (_, key) = q_max(ctx, m * m, |cx, r| {
        let (i, j) = spans[(r - 1) / m];
        let (k, l) = spans[(r - 1) % m];
        Ok((c.f(cx, (i - 1, k - 1), (j, l))?, Reverse((i, k, j, l))))
    })?;
    Ok(unkey(key))
}

/// Maximum of `B_ik + B_jl - B_il - B_jk` over `i <= j`, `k <= l`.
///
/// Each row pair reduces to a stock problem on `A = B_j - B_i`, whose
/// entries are fetched on demand.
pub fn max_4combination(ctx: &mut Ctx, b: &[Vec<i64>]) -> Result<Rect> {
    let n = side(b)?;
    let store = InstanceStore::qram(b.iter().flatten().copied().collect(), Kind::IntMatrix { n });
    let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|i| (i..=n).map(move |j| (i, j))).collect();
    let (_, key) = q_max(ctx, pairs.len(), |cx, r| {
        let (i, j) = pairs[r - 1];
        let zero = (0, Reverse((i, 1, j, 1)));
        if i == j {
            return Ok(zero);
        }
        let (v, k, l) = row_pair(cx, &store, n, i, j)?;
        Ok(if v > 0 { (v, Reverse((i, k, j, l))) } else { zero })
    })?;
    Ok(unkey(key))
}

/// Best `A_l - A_k` with `k < l` for `A = B_j - B_i`.
fn row_pair(ctx: &mut Ctx, b: &InstanceStore<i64>, n: usize, i: usize, j: usize) -> Result<Span> {
    let a: Vec<i64> = (1..=n).map(|c| b.peek((j - 1) * n + c) - b.peek((i - 1) * n + c)).collect();
    let before = ctx.ledger;
    let span = ssst(ctx, &a)?;
    // every read of A stands for one read in each of the two rows
    let reads = (ctx.ledger - before).queries;
    ctx.charge(reads, 0.0);
    Ok(span)
}

/// Matrix whose maximum submatrix exceeds the returned threshold exactly
/// when more than half of `x` is set.
pub fn majority_reduction(x: &[bool]) -> Result<(Vec<Vec<i64>>, i64)> {
    let n = (x.len() as f64).sqrt().round() as usize;
    if n == 0 || n * n != x.len() {
        return Err(Error::InvalidLength(format!("{} bits do not form a square", x.len())));
    }
    let half = n * n / 2;
    let w = 2 * n + 1;
    let mut c = vec![vec![-1i64; w]; w];
    for r in 0..n {
        for k in 0..n {
            c[r][k] = i64::from(x[r * n + k]);
            c[r][n + 1 + k] = i64::from(r * n + k < half);
        }
        c[r][n] = -(n as i64) - 1;
    }
    Ok((c, half as i64))
}
