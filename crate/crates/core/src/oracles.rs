//! Brute-force references. None of these touch a cost ledger.

use std::collections::HashSet;
use std::hash::Hash;

use crate::error::{Error, Result};
use crate::ext::Ext;
use crate::frameworks::TDescription;
use crate::geometry::{brute_coverage, CoverageInstance};
use crate::strings::{CubeSpan, PoolingFamily, Span};

pub const MAX_ARRAY: usize = 1 << 12;
pub const MAX_K: usize = 5;
pub const MAX_MATRIX: usize = 16;
pub const MAX_BOXES: usize = 24;
pub const MAX_BOX_DIM: usize = 4;

fn cap(what: &str, got: usize, limit: usize) -> Result<()> {
    if got > limit {
        return Err(Error::OracleCapacity(format!("{what} {got} exceeds {limit}")));
    }
    Ok(())
}

/// Pairs scan; ties go to the smallest `(i, j)`.
pub fn ssst(a: &[i64]) -> Result<Span> {
    cap("array length", a.len(), MAX_ARRAY)?;
    if a.len() < 2 {
        return Err(Error::TooShort(format!("need at least 2 prices, got {}", a.len())));
    }
    let mut best = (i64::MIN, 0, 0);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let v = a[j] - a[i];
            if v > best.0 {
                best = (v, i + 1, j + 1);
            }
        }
    }
    Ok(best)
}

fn longest_run<T>(a: &[T], linked: impl Fn(&T, &T) -> bool) -> Span {
    let mut best = (1, 1, 1);
    let mut start = 0;
    for p in 1..=a.len() {
        if p == a.len() || !linked(&a[p - 1], &a[p]) {
            let len = (p - start) as i64;
            if len > best.0 {
                best = (len, start + 1, p);
            }
            start = p;
        }
    }
    best
}

pub fn lis_substring(a: &[i64]) -> Result<Span> {
    cap("array length", a.len(), MAX_ARRAY)?;
    Ok(longest_run(a, |x, y| x < y))
}

pub fn lsic(a: &[u32]) -> Result<Span> {
    cap("string length", a.len(), MAX_ARRAY)?;
    Ok(longest_run(a, |x, y| x == y))
}

pub fn l2002s(a: &[u32]) -> Result<Option<Span>> {
    cap("string length", a.len(), MAX_ARRAY)?;
    if let Some(&bad) = a.iter().find(|&&c| c > 2) {
        return Err(Error::Alphabet(bad.to_string()));
    }
    let mut best: Option<Span> = None;
    for i in 0..a.len() {
        if a[i] != 2 {
            continue;
        }
        if let Some(j) = (i + 1..a.len()).find(|&j| a[j] != 0) {
            let len = (j - i + 1) as i64;
            if a[j] == 2 && best.is_none_or(|b| len > b.0) {
                best = Some((len, i + 1, j + 1));
            }
        }
    }
    Ok(best)
}

/// All coordinatewise-ordered pairs, in lexicographic order of `(i, j)`.
pub fn d_msst(cube: &[i64], d: usize, side: usize) -> Result<CubeSpan> {
    cap("cube cells", cube.len(), MAX_ARRAY)?;
    if d == 0 || side.checked_pow(d as u32) != Some(cube.len()) {
        return Err(Error::InvalidLength(format!("{} cells for side {side} in dimension {d}", cube.len())));
    }
    let coords = |mut lin: usize| {
        let mut c = vec![0; d];
        for slot in c.iter_mut().rev() {
            *slot = lin % side;
            lin /= side;
        }
        c
    };
    let mut best: Option<CubeSpan> = None;
    for x in 0..cube.len() {
        let cx = coords(x);
        for y in 0..cube.len() {
            let cy = coords(y);
            if cx.iter().zip(&cy).all(|(a, b)| a < b) {
                let v = cube[y] - cube[x];
                if best.as_ref().is_none_or(|b| v > b.value) {
                    let one = |c: Vec<usize>| c.into_iter().map(|t| t + 1).collect();
                    best = Some(CubeSpan { value: v, i: one(cx.clone()), j: one(cy) });
                }
            }
        }
    }
    best.ok_or_else(|| Error::TooShort(format!("side {side} admits no ordered pair")))
}

/// Smallest last element of a strictly increasing `k`-subsequence above `gamma`.
pub fn f_k(a: &[i64], k: usize, gamma: Ext) -> Result<Ext> {
    cap("array length", a.len(), MAX_ARRAY)?;
    cap("k", k, MAX_K)?;
    if k < 1 {
        return Err(Error::Contract("k must be at least 1".into()));
    }
    // longest increasing subsequence above gamma ending at each index
    let mut ends = vec![0usize; a.len()];
    let mut best = Ext::PosInf;
    for i in 0..a.len() {
        if Ext::Fin(a[i]) <= gamma {
            continue;
        }
        ends[i] = 1 + (0..i).filter(|&p| ends[p] > 0 && a[p] < a[i]).map(|p| ends[p]).max().unwrap_or(0);
        if ends[i] >= k {
            best = best.min(Ext::Fin(a[i]));
        }
    }
    Ok(best)
}

pub fn k_is(a: &[i64], k: usize) -> Result<bool> {
    Ok(f_k(a, k, Ext::NegInf)? < Ext::PosInf)
}

/// Maximum signed sum over increasing index tuples, by a prefix table.
pub fn k_ss(a: &[i64], signs: &[i64]) -> Result<i64> {
    cap("array length", a.len(), MAX_ARRAY)?;
    cap("k", signs.len(), MAX_K)?;
    if a.len() < signs.len() {
        return Err(Error::Infeasible(format!("{} elements for {} signs", a.len(), signs.len())));
    }
    let mut best = vec![Ext::NegInf; signs.len() + 1];
    best[0] = Ext::Fin(0);
    for &x in a {
        for m in (1..=signs.len()).rev() {
            best[m] = best[m].max(best[m - 1] + Ext::Fin(signs[m - 1] * x));
        }
    }
    Ok(best[signs.len()].finite().expect("feasible"))
}

/// Sliding window.
pub fn lds<T: Eq + Hash + Copy>(a: &[T]) -> Result<i64> {
    cap("string length", a.len(), MAX_ARRAY)?;
    if a.is_empty() {
        return Err(Error::TooShort("empty string".into()));
    }
    let mut window = HashSet::new();
    let (mut lo, mut best) = (0, 0);
    for hi in 0..a.len() {
        while !window.insert(a[hi]) {
            window.remove(&a[lo]);
            lo += 1;
        }
        best = best.max(hi - lo + 1);
    }
    Ok(best as i64)
}

/// Every substring checked on its own.
pub fn lds_naive<T: Eq + Hash + Copy>(a: &[T]) -> Result<i64> {
    cap("string length", a.len(), MAX_ARRAY)?;
    if a.is_empty() {
        return Err(Error::TooShort("empty string".into()));
    }
    let mut best = 1;
    for i in 0..a.len() {
        for j in i + best..a.len() {
            let set: HashSet<_> = a[i..=j].iter().collect();
            if set.len() == j - i + 1 {
                best = j - i + 1;
            }
        }
    }
    Ok(best as i64)
}

/// Longest distinct substring of `a[I1..=I2] ++ a[I3..=I4]` containing the
/// symbol from position `I2` or `I3`.
pub fn blds<T: Eq + Hash + Copy>(a: &[T], desc: &TDescription) -> Result<i64> {
    cap("string length", a.len(), MAX_ARRAY)?;
    if desc.t() != 2 {
        return Err(Error::Description(format!("{desc} is not a 2-description")));
    }
    desc.validate(a.len())?;
    let s: Vec<T> = desc.positions().map(|p| a[p - 1]).collect();
    let mid = desc.get(2) - desc.get(1);
    let mut best = 0;
    for i in 0..=mid + 1 {
        let mut seen = HashSet::new();
        for (j, c) in s.iter().enumerate().skip(i) {
            if !seen.insert(*c) {
                break;
            }
            if j >= mid {
                best = best.max(j - i + 1);
            }
        }
    }
    Ok(best as i64)
}

fn square(b: &[Vec<i64>]) -> Result<usize> {
    let n = b.len();
    cap("matrix side", n, MAX_MATRIX)?;
    if n == 0 || b.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidLength("matrix must be square and non-empty".into()));
    }
    Ok(n)
}

/// `(value, (i, k), (j, l))` with 1-based corners.
pub type Rect = (i64, (usize, usize), (usize, usize));

/// Every rectangle summed through a running column accumulator.
pub fn max_submatrix(b: &[Vec<i64>]) -> Result<Rect> {
    let n = square(b)?;
    let mut best: Option<Rect> = None;
    for i in 0..n {
        let mut col = vec![0i64; n];
        for (j, brow) in b.iter().enumerate().skip(i) {
            for (c, row) in col.iter_mut().zip(brow) {
                *c += row;
            }
            for k in 0..n {
                let mut s = 0;
                for (l, v) in col.iter().enumerate().skip(k) {
                    s += v;
                    let cand = (s, (i + 1, k + 1), (j + 1, l + 1));
                    if best.is_none_or(|x| s > x.0 || (s == x.0 && (cand.1, cand.2) < (x.1, x.2))) {
                        best = Some(cand);
                    }
                }
            }
        }
    }
    Ok(best.expect("non-empty"))
}

/// Every rectangle summed cell by cell.
pub fn max_submatrix_naive(b: &[Vec<i64>]) -> Result<i64> {
    let n = square(b)?;
    let mut best = i64::MIN;
    for i in 0..n {
        for j in i..n {
            for k in 0..n {
                for l in k..n {
                    let s: i64 = (i..=j).flat_map(|r| (k..=l).map(move |c| (r, c))).map(|(r, c)| b[r][c]).sum();
                    best = best.max(s);
                }
            }
        }
    }
    Ok(best)
}

/// Quadruple enumeration of `B_ik + B_jl - B_il - B_jk` over `i <= j`, `k <= l`.
pub fn max_4combination(b: &[Vec<i64>]) -> Result<Rect> {
    let n = square(b)?;
    let mut best: Rect = (0, (1, 1), (1, 1));
    for i in 0..n {
        for j in i..n {
            for k in 0..n {
                for l in k..n {
                    let v = b[i][k] + b[j][l] - b[i][l] - b[j][k];
                    let cand = (v, (i + 1, k + 1), (j + 1, l + 1));
                    if v > best.0 || (v == best.0 && (cand.1, cand.2) < (best.1, best.2)) {
                        best = cand;
                    }
                }
            }
        }
    }
    Ok(best)
}

/// Compressed-grid sweep, capped at 24 boxes in at most 4 dimensions.
pub fn coverage(inst: &CoverageInstance) -> Result<bool> {
    cap("box count", inst.boxes.len(), MAX_BOXES)?;
    cap("dimension", inst.d, MAX_BOX_DIM)?;
    brute_coverage(inst)
}

/// Direct evaluation of the pooling tree.
pub fn max_pooling(fam: &PoolingFamily, a: &[i64]) -> Result<i64> {
    cap("array length", a.len(), MAX_ARRAY)?;
    fn go(fam: &PoolingFamily, level: usize, b: Vec<i64>) -> Result<i64> {
        if b.len() == 1 {
            return Ok(b[0]);
        }
        let maps = fam
            .levels
            .get(level)
            .ok_or_else(|| Error::ProblemDefinition(format!("no maps for level {}", level + 1)))?;
        let mut best = i64::MIN;
        for f in maps {
            let out = f(&b);
            if out.len() * fam.p != b.len() {
                return Err(Error::ProblemDefinition(format!("map output length {} at level {}", out.len(), level + 1)));
            }
            best = best.max(go(fam, level + 1, out)?);
        }
        Ok(best)
    }
    go(fam, 0, a.to_vec())
}
