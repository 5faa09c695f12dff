//! Array and string problems solved bottom-up over crossing blocks, the
//! increasing-subsequence and signed-sum recursions, and recursive max pooling.

use std::cmp::Reverse;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ext::Ext;
use crate::frameworks::{bottom_up_rootn, halves, run_constructible, Combine, Constructible};
use crate::oracle::{Ctx, InstanceStore, Kind};
use crate::qprimitives::{q_max, q_max_erroneous, q_min, q_min_erroneous, q_search, selector_two, Goal};

/// Value with its 1-based realizing pair `(i, j)`.
pub type Span = (i64, usize, usize);

type Key = (Ext, Reverse<usize>, Reverse<usize>);

fn pow2_at_least(n: usize) -> usize {
    n.max(2).next_power_of_two()
}

/// Position of a best key over `lo..=hi` by exact maximum finding.
fn max_over<K: Ord + Clone>(
    ctx: &mut Ctx,
    lo: usize,
    hi: usize,
    mut f: impl FnMut(&mut Ctx, usize) -> Result<K>,
) -> Result<(usize, K)> {
    let (r, v) = q_max(ctx, hi - lo + 1, |c, r| f(c, lo + r - 1))?;
    Ok((lo + r - 1, v))
}

fn min_over<K: Ord + Clone>(
    ctx: &mut Ctx,
    lo: usize,
    hi: usize,
    mut f: impl FnMut(&mut Ctx, usize) -> Result<K>,
) -> Result<(usize, K)> {
    let (r, v) = q_min(ctx, hi - lo + 1, |c, r| f(c, lo + r - 1))?;
    Ok((lo + r - 1, v))
}

/// Runs the crossing solver through the square-root bottom-up driver and
/// re-solves the winning block once more to report its pair.
fn crossing_search(
    ctx: &mut Ctx,
    n: usize,
    mut solve: impl FnMut(&mut Ctx, u32, usize) -> Result<Key>,
) -> Result<Key> {
    let (best, _) = bottom_up_rootn(ctx, n, Goal::Max, n as u64, &mut solve)?;
    solve(ctx, best.t, best.k)
}

/// Maximum of `A_j - A_i` over `i < j`, with the lexicographically smallest pair.
pub fn ssst(ctx: &mut Ctx, a: &[i64]) -> Result<Span> {
    if a.len() < 2 {
        return Err(Error::TooShort(format!("need at least 2 prices, got {}", a.len())));
    }
    let n = pow2_at_least(a.len());
    let mut cells: Vec<Ext> = a.iter().map(|&v| Ext::Fin(v)).collect();
    cells.resize(n, Ext::NegInf);
    let store = InstanceStore::qram(cells, Kind::IntArray);
    let (v, Reverse(i), Reverse(j)) = crossing_search(ctx, n, |c, t, k| ssst_crossing(c, &store, t, k))?;
    Ok((v.finite().expect("some pair is real"), i, j))
}

/// Best pair with `i` in the left half and `j` in the right half of block `(t, k)`.
pub fn ssst_crossing(ctx: &mut Ctx, store: &InstanceStore<Ext>, t: u32, k: usize) -> Result<Key> {
    let ((ls, le), (rs, re)) = halves(store.len(), t, k);
    let (j, (hi, _)) = max_over(ctx, rs, re, |c, p| Ok((store.read(c, p)?, Reverse(p))))?;
    if hi == Ext::NegInf {
        return Ok((Ext::NegInf, Reverse(0), Reverse(0)));
    }
    let (i, (lo, _)) = min_over(ctx, ls, le, |c, p| Ok((store.read(c, p)?, p)))?;
    Ok((hi + -lo, Reverse(i), Reverse(j)))
}

/// Crossing run through the block midpoint, for a relation `linked(x, y)` that
/// holds between consecutive symbols of a valid run.
fn run_crossing<T: Copy + Default>(
    ctx: &mut Ctx,
    store: &InstanceStore<T>,
    t: u32,
    k: usize,
    linked: impl Fn(T, T) -> bool,
) -> Result<Key> {
    let ((ls, le), (rs, re)) = halves(store.len(), t, k);
    // last break at or left of the midpoint
    let (_, brk) = max_over(ctx, ls, le, |c, p| {
        let (x, y) = (store.read(c, p)?, store.read(c, p + 1)?);
        Ok(if linked(x, y) { None } else { Some(p) })
    })?;
    let i = brk.map_or(ls, |p| p + 1);
    // first break at or right of the midpoint
    let (_, (unbroken, q)) = min_over(ctx, rs, re, |c, p| {
        let (x, y) = (store.read(c, p - 1)?, store.read(c, p)?);
        Ok((linked(x, y), p))
    })?;
    let j = if unbroken { re } else { q - 1 };
    let len = j as i64 - i as i64 + 1;
    Ok((Ext::Fin(len.max(0)), Reverse(i), Reverse(j)))
}

fn longest_run<T: Copy + Default>(
    ctx: &mut Ctx,
    a: &[T],
    pad: Vec<T>,
    linked: impl Fn(T, T) -> bool + Copy,
) -> Result<Span> {
    if a.is_empty() {
        return Err(Error::TooShort("empty input".into()));
    }
    if a.len() == 1 {
        return Ok((1, 1, 1));
    }
    let n = pow2_at_least(a.len());
    let mut cells = a.to_vec();
    cells.extend(pad.into_iter().cycle().take(n - a.len()));
    let store = InstanceStore::qram(cells, Kind::IntArray);
    let (len, Reverse(i), Reverse(j)) = crossing_search(ctx, n, |c, t, k| run_crossing(c, &store, t, k, linked))?;
    let len = len.finite().unwrap_or(0);
    Ok(if len >= 2 { (len, i, j) } else { (1, 1, 1) })
}

/// Longest strictly increasing contiguous run.
pub fn lis_substring(ctx: &mut Ctx, a: &[i64]) -> Result<Span> {
    let last = a.last().copied().unwrap_or_default();
    longest_run(ctx, a, vec![last], |x, y| x < y)
}

/// Longest run of identical symbols.
pub fn lsic(ctx: &mut Ctx, a: &[u32]) -> Result<Span> {
    let last = a.last().copied().unwrap_or_default();
    let pad: Vec<u32> = (0..3u32).filter(|&c| c != last).take(2).collect();
    longest_run(ctx, a, pad, |x, y| x == y)
}

/// Longest substring of the form `2 0* 2` over the alphabet `{0, 1, 2}`.
pub fn l2002s(ctx: &mut Ctx, a: &[u32]) -> Result<Option<Span>> {
    if let Some(&bad) = a.iter().find(|&&c| c > 2) {
        return Err(Error::Alphabet(bad.to_string()));
    }
    if a.len() < 2 {
        return Ok(None);
    }
    let n = pow2_at_least(a.len());
    let mut cells = a.to_vec();
    cells.resize(n, 0);
    let store = InstanceStore::qram(cells, Kind::String);
    let (len, Reverse(i), Reverse(j)) = crossing_search(ctx, n, |c, t, k| l2002s_crossing(c, &store, t, k))?;
    let len = len.finite().unwrap_or(0);
    Ok((len > 0).then_some((len, i, j)))
}

fn l2002s_crossing(ctx: &mut Ctx, store: &InstanceStore<u32>, t: u32, k: usize) -> Result<Key> {
    let none = (Ext::Fin(0), Reverse(0), Reverse(0));
    let ((ls, le), (rs, re)) = halves(store.len(), t, k);
    let (_, left) = max_over(ctx, ls, le, |c, p| Ok((store.read(c, p)? == 2).then_some(p)))?;
    let (_, (missing, j)) = min_over(ctx, rs, re, |c, p| Ok((store.read(c, p)? != 2, p)))?;
    let Some(i) = left else { return Ok(none) };
    if missing {
        return Ok(none);
    }
    let inner = j - i - 1;
    let nonzero = q_search(ctx, inner, |c, r| Ok(store.read(c, i + r)? != 0))?;
    if nonzero.is_some() {
        return Ok(none);
    }
    Ok((Ext::Fin((j - i + 1) as i64), Reverse(i), Reverse(j)))
}

/// Result of [`d_msst`]: value and 1-based coordinate vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeSpan {
    pub value: i64,
    pub i: Vec<usize>,
    pub j: Vec<usize>,
}

/// Maximum `A_j - A_i` over coordinatewise `i < j` in a `d`-cube of side
/// `side`, given row-major.
pub fn d_msst(ctx: &mut Ctx, cube: &[i64], d: usize, side: usize) -> Result<CubeSpan> {
    if d == 0 {
        return Err(Error::InvalidLength("dimension must be at least 1".into()));
    }
    let expect = side.checked_pow(d as u32).ok_or_else(|| Error::ValueRange("cube too large".into()))?;
    if cube.len() != expect {
        return Err(Error::InvalidLength(format!("{} cells for side {side} in dimension {d}", cube.len())));
    }
    if side < 2 {
        return Err(Error::TooShort(format!("side {side} admits no ordered pair")));
    }
    let n = pow2_at_least(side);
    let lv = n.trailing_zeros() as usize;
    let total = n.pow(d as u32);
    let mut cells = vec![Ext::NegInf; total];
    for (lin, &v) in cube.iter().enumerate() {
        cells[embed(lin, side, n, d)] = Ext::Fin(v);
    }
    let store = InstanceStore::qram(cells, Kind::DCube { d, side: n });
    let vectors = lv.pow(d as u32);
    let (_, key, _) = selector_two(ctx, vectors, Goal::Max, total as u64, |c, vi| {
        let ts = digits(vi - 1, lv, d);
        let boxes = 1usize << ts.iter().sum::<usize>();
        Ok(q_max_erroneous(c, boxes, |c2, b| cube_crossing(c2, &store, n, &ts, b - 1))?.1)
    })?;
    let (v, Reverse(i), Reverse(j)) = key;
    let coords = |lin: usize| digits(lin - 1, n, d).into_iter().map(|x| x + 1).collect::<Vec<_>>();
    Ok(CubeSpan { value: v.finite().expect("some pair is real"), i: coords(i), j: coords(j) })
}

/// Base-`radix` digits of `x`, most significant first.
fn digits(mut x: usize, radix: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = x % radix;
        x /= radix;
    }
    out
}

fn embed(lin: usize, side: usize, n: usize, d: usize) -> usize {
    digits(lin, side, d).into_iter().fold(0, |acc, x| acc * n + x)
}

/// Crossing value of box `b` (0-based, mixed radix `2^{t_k}`) for prefix lengths `ts`.
fn cube_crossing(ctx: &mut Ctx, store: &InstanceStore<Ext>, n: usize, ts: &[usize], mut b: usize) -> Result<Key> {
    let d = ts.len();
    let mut starts = vec![0; d];
    for a in (0..d).rev() {
        let cnt = 1usize << ts[a];
        starts[a] = (b % cnt) * (n >> ts[a]);
        b /= cnt;
    }
    let half: Vec<usize> = ts.iter().map(|&t| n >> (t + 1)).collect();
    let vol: usize = half.iter().product();
    let cell = |r: usize, upper: bool| {
        let mut lin = 0;
        let mut rem = r;
        let mut coord = vec![0; d];
        for a in (0..d).rev() {
            coord[a] = rem % half[a];
            rem /= half[a];
        }
        for a in 0..d {
            let base = starts[a] + if upper { half[a] } else { 0 };
            lin = lin * n + base + coord[a];
        }
        lin + 1
    };
    let (_, (hi, Reverse(j))) = q_max(ctx, vol, |c, r| {
        let p = cell(r - 1, true);
        Ok((store.read(c, p)?, Reverse(p)))
    })?;
    if hi == Ext::NegInf {
        return Ok((Ext::NegInf, Reverse(0), Reverse(0)));
    }
    let (_, (lo, i)) = q_min(ctx, vol, |c, r| {
        let p = cell(r - 1, false);
        Ok((store.read(c, p)?, p))
    })?;
    Ok((hi + -lo, Reverse(i), Reverse(j)))
}

/// Smallest last element of a strictly increasing `k`-subsequence whose
/// values all exceed `gamma`; `PosInf` if none.
pub fn f_k(ctx: &mut Ctx, a: &[i64], k: usize, gamma: Ext) -> Result<Ext> {
    if k < 1 {
        return Err(Error::Contract("k must be at least 1".into()));
    }
    if a.is_empty() {
        return Ok(Ext::PosInf);
    }
    let store = InstanceStore::qram(a.iter().map(|&v| Ext::Fin(v)).collect(), Kind::IntArray);
    fk_range(ctx, &store, 1, pow2_at_least(a.len()), k, gamma)
}

/// Whether `a` has a strictly increasing subsequence of length `k`.
pub fn k_is(ctx: &mut Ctx, a: &[i64], k: usize) -> Result<bool> {
    Ok(f_k(ctx, a, k, Ext::NegInf)? < Ext::PosInf)
}

/// `F_k` over the range `s..s+len` clipped to the input (`len` a power of two).
pub fn fk_range(ctx: &mut Ctx, store: &InstanceStore<Ext>, s: usize, len: usize, k: usize, gamma: Ext) -> Result<Ext> {
    let e = (s + len - 1).min(store.len());
    if s > e || e - s + 1 < k || gamma == Ext::PosInf {
        return Ok(Ext::PosInf);
    }
    if k == 1 {
        let (_, v) = q_min_erroneous(ctx, e - s + 1, |c, r| {
            let x = store.read(c, s + r - 1)?;
            Ok(if x > gamma { x } else { Ext::PosInf })
        })?;
        return Ok(v);
    }
    let lv = len.trailing_zeros() as usize;
    let (_, v, _) = selector_two(ctx, lv, Goal::Min, store.memory_size(), |c, ti| {
        let t = ti - 1;
        let blk = len >> t;
        let (_, v) = q_min_erroneous(c, 1 << t, |c2, b| {
            let bs = s + (b - 1) * blk;
            let half = blk / 2;
            let mut best = Ext::PosInf;
            for j in 1..k {
                let g = fk_range(c2, store, bs, half, j, gamma)?;
                best = best.min(fk_range(c2, store, bs + half, half, k - j, g)?);
            }
            Ok(best)
        })?;
        Ok(v)
    })?;
    Ok(v)
}

/// Signs `eps in {-1, +1}^k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignPattern(Vec<i64>);

impl SignPattern {
    pub fn new(signs: Vec<i64>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::InvalidLength("sign pattern must be nonempty".into()));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::ValueRange(format!("signs must be +1 or -1: {signs:?}")));
        }
        Ok(SignPattern(signs))
    }

    /// Alternating `(-1, +1, ..., -1, +1)` of length `2 * transactions`.
    pub fn transactions(transactions: usize) -> Result<Self> {
        SignPattern::new((0..2 * transactions).map(|i| if i % 2 == 0 { -1 } else { 1 }).collect())
    }

    pub fn signs(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Maximum of `sum_m eps_m A_{i_m}` over `i_1 < ... < i_k`.
pub fn k_ss(ctx: &mut Ctx, a: &[i64], eps: &SignPattern) -> Result<i64> {
    if a.len() < eps.len() {
        return Err(Error::Infeasible(format!("{} elements for {} signs", a.len(), eps.len())));
    }
    let store = InstanceStore::qram(a.iter().map(|&v| Ext::Fin(v)).collect(), Kind::IntArray);
    let v = kss_range(ctx, &store, 1, pow2_at_least(a.len()), eps.signs())?;
    Ok(v.finite().expect("feasible"))
}

/// Signed-sum optimum over `s..s+len` clipped to the input; `NegInf` if infeasible.
pub fn kss_range(ctx: &mut Ctx, store: &InstanceStore<Ext>, s: usize, len: usize, eps: &[i64]) -> Result<Ext> {
    let k = eps.len();
    let e = (s + len - 1).min(store.len());
    if s > e || e - s + 1 < k {
        return Ok(Ext::NegInf);
    }
    if k == 1 {
        let (_, v) = q_max_erroneous(ctx, e - s + 1, |c, r| Ok(store.read(c, s + r - 1)?.scale(eps[0])))?;
        return Ok(v);
    }
    let lv = len.trailing_zeros() as usize;
    let (_, v, _) = selector_two(ctx, lv, Goal::Max, store.memory_size(), |c, ti| {
        let t = ti - 1;
        let blk = len >> t;
        let (_, v) = q_max_erroneous(c, 1 << t, |c2, b| {
            let bs = s + (b - 1) * blk;
            let half = blk / 2;
            let mut best = Ext::NegInf;
            for j in 1..k {
                let l = kss_range(c2, store, bs, half, &eps[..j])?;
                if l == Ext::NegInf {
                    continue;
                }
                let r = kss_range(c2, store, bs + half, half, &eps[j..])?;
                best = best.max(l + r);
            }
            Ok(best)
        })?;
        Ok(v)
    })?;
    Ok(v)
}

/// One pooling map `f_i^{(j)}`.
pub type PoolFn = Arc<dyn Fn(&[i64]) -> Vec<i64> + Send + Sync>;

/// Per-level families of `h` maps shrinking their input by `p`.
#[derive(Clone)]
pub struct PoolingFamily {
    pub p: usize,
    pub h: usize,
    pub levels: Vec<Vec<PoolFn>>,
}

impl std::fmt::Debug for PoolingFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PoolingFamily {{ p: {}, h: {}, depth: {} }}", self.p, self.h, self.levels.len())
    }
}

impl PoolingFamily {
    pub fn new(p: usize, levels: Vec<Vec<PoolFn>>) -> Result<Self> {
        if p < 2 {
            return Err(Error::Contract(format!("shrink factor {p} must be at least 2")));
        }
        let h = levels.first().map_or(1, Vec::len);
        if h == 0 || levels.iter().any(|l| l.len() != h) {
            return Err(Error::ProblemDefinition("every level needs the same nonzero number of maps".into()));
        }
        Ok(PoolingFamily { p, h, levels })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// `h = 2`: left half and right half at every level.
    pub fn halves(depth: usize) -> Self {
        let left: PoolFn = Arc::new(|b: &[i64]| b[..b.len() / 2].to_vec());
        let right: PoolFn = Arc::new(|b: &[i64]| b[b.len() / 2..].to_vec());
        PoolingFamily { p: 2, h: 2, levels: vec![vec![left, right]; depth] }
    }

    /// `h = 1`: the left half only.
    pub fn left_half(depth: usize) -> Self {
        let left: PoolFn = Arc::new(|b: &[i64]| b[..b.len() / 2].to_vec());
        PoolingFamily { p: 2, h: 1, levels: vec![vec![left]; depth] }
    }

    /// `h = p^k` pseudo-random maps: output cell `r` is the larger of two
    /// strided input cells plus a small offset.
    pub fn seeded(p: usize, k: u32, depth: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = p.pow(k);
        let levels = (0..depth)
            .map(|_| {
                (0..h)
                    .map(|_| {
                        let (o1, o2, w) = (rng.gen_range(0..64usize), rng.gen_range(0..64usize), rng.gen_range(-3..=3i64));
                        let f: PoolFn = Arc::new(move |b: &[i64]| {
                            let l = b.len();
                            (0..l / p).map(|r| b[(p * r + o1) % l].max(b[(p * r + o2) % l]) + w).collect()
                        });
                        f
                    })
                    .collect()
            })
            .collect();
        PoolingFamily::new(p, levels)
    }
}

struct Pooling<'a> {
    fam: &'a PoolingFamily,
}

impl Constructible for Pooling<'_> {
    type Inst = (usize, Vec<i64>);
    type Ans = i64;

    fn combine(&self) -> Combine {
        Combine::Max
    }
    fn len(&self, inst: &Self::Inst) -> usize {
        inst.1.len()
    }
    fn h(&self, _: usize) -> usize {
        self.fam.h
    }
    fn m(&self, _: usize) -> f64 {
        self.fam.p as f64
    }
    fn is_small(&self, inst: &Self::Inst) -> bool {
        inst.1.len() == 1
    }
    fn base_solve(&self, _: &mut Ctx, inst: &Self::Inst) -> Result<i64> {
        Ok(inst.1[0])
    }
    fn create(&self, ctx: &mut Ctx, inst: &Self::Inst) -> Result<Vec<Self::Inst>> {
        let (level, b) = inst;
        let want = b.len() / self.fam.p;
        let maps = self
            .fam
            .levels
            .get(*level)
            .ok_or_else(|| Error::ProblemDefinition(format!("no maps for level {}", level + 1)))?;
        // each map is charged quadratic work in its input length
        ctx.charge(0, (maps.len() * b.len() * b.len()) as f64);
        maps.iter()
            .map(|f| {
                let out = f(b);
                if out.len() != want {
                    return Err(Error::ProblemDefinition(format!(
                        "level {} map produced length {}, expected {want}",
                        level + 1,
                        out.len()
                    )));
                }
                Ok((level + 1, out))
            })
            .collect()
    }
}

/// Recursive max pooling through the constructible-instance driver.
pub fn recursive_max_pooling(ctx: &mut Ctx, fam: &PoolingFamily, a: &[i64]) -> Result<i64> {
    let expect = fam.p.checked_pow(fam.depth() as u32).ok_or_else(|| Error::ValueRange("family too deep".into()))?;
    if a.len() != expect {
        return Err(Error::InvalidLength(format!("input length {} is not p^depth = {expect}", a.len())));
    }
    run_constructible(ctx, &Pooling { fam }, &(0, a.to_vec()))
}
