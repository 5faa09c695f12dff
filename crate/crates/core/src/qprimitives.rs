//! Search, minimum finding, element distinctness and boundary search.
//!
//! Every primitive computes its answer classically and charges the ledger by
//! formula. Candidate evaluations are run once to measure their own charges
//! (the ledger is rewound afterwards) and the formula then charges the
//! repetition count times the measured per-call cost.
//!
//! Under an active [`ErrorModel`](crate::oracle::ErrorModel) the amplified
//! primitives simulate their failure behaviour: each of a few independent
//! attempts fails with the per-call probability, and results are confirmed
//! by majority votes over noisy re-evaluations.

use std::collections::HashSet;
use std::hash::Hash;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::costmodel::CostLedger;
use crate::error::{Error, Result};
use crate::frameworks::TDescription;
use crate::oracle::{Ctx, ErrorMode, InstanceStore};

/// Per-call time used in the repetition formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TauModel {
    #[default]
    MeasuredMax,
    MeasuredMean,
}

/// Independent attempts made by an amplified primitive.
const ATTEMPTS: usize = 3;

/// Values of all candidates together with the cost each evaluation charged.
#[derive(Debug, Clone)]
pub struct Measured<V> {
    pub values: Vec<V>,
    pub costs: Vec<CostLedger>,
}

impl<V> Measured<V> {
    pub fn q_max(&self) -> u64 {
        self.costs.iter().map(|c| c.queries).max().unwrap_or(0)
    }
    pub fn q_sum(&self) -> u64 {
        self.costs.iter().map(|c| c.queries).sum()
    }
    pub fn t_max(&self) -> f64 {
        self.costs.iter().map(|c| c.time_units).fold(0.0, f64::max)
    }
    pub fn t_sum(&self) -> f64 {
        self.costs.iter().map(|c| c.time_units).sum()
    }
    pub fn tau(&self, model: TauModel) -> f64 {
        match model {
            TauModel::MeasuredMax => self.t_max(),
            TauModel::MeasuredMean if self.costs.is_empty() => 0.0,
            TauModel::MeasuredMean => self.t_sum() / self.costs.len() as f64,
        }
    }
}

/// Runs `eval` on candidates `1..=j`, records each call's charge and rewinds
/// the ledger to its state before the first call.
pub fn measure<V>(ctx: &mut Ctx, j: usize, mut eval: impl FnMut(&mut Ctx, usize) -> Result<V>) -> Result<Measured<V>> {
    let base = ctx.ledger;
    let mut values = Vec::with_capacity(j);
    let mut costs = Vec::with_capacity(j);
    for idx in 1..=j {
        let before = ctx.ledger;
        values.push(eval(ctx, idx)?);
        costs.push(ctx.ledger - before);
    }
    ctx.ledger = base;
    Ok(Measured { values, costs })
}

/// `ceil(coef * sqrt(j))`.
pub fn grover_reps(coef: f64, j: usize) -> u64 {
    (coef * (j as f64).sqrt()).ceil() as u64
}

/// Charges `reps` evaluations: `reps * max(1, q)` queries and
/// `reps * (log j + tau)` time units.
pub fn charge_grover<V>(ctx: &mut Ctx, coef: f64, m: &Measured<V>) -> CostLedger {
    let j = m.values.len();
    let reps = grover_reps(coef, j);
    let tau = m.tau(ctx.tau);
    let charged = CostLedger::new(reps * m.q_max().max(1), reps as f64 * ((j as f64).log2() + tau));
    ctx.ledger += charged;
    charged
}

/// Noisy reports per majority vote over a domain of size `j`.
pub fn votes(j: usize) -> usize {
    2 * ((j + 1) as f64).log2().ceil() as usize + 15
}

/// Majority over `count` noisy reports of `truth`, each flipped with probability `p`.
fn noisy_majority(ctx: &mut Ctx, truth: bool, count: usize) -> bool {
    let p = ctx.err.per_call_failure;
    let agree = (0..count).filter(|_| !ctx.rng.gen_bool(p)).count();
    if agree * 2 > count {
        truth
    } else {
        !truth
    }
}

fn faulty_attempt(ctx: &mut Ctx) -> bool {
    let p = ctx.err.per_call_failure;
    ctx.rng.gen_bool(p)
}

/// Simulated amplified search over known candidate values (0-based result).
pub fn noisy_search_select(ctx: &mut Ctx, marked: &[bool]) -> Option<usize> {
    let truth = marked.iter().position(|&b| b);
    let v = votes(marked.len());
    for _ in 0..ATTEMPTS {
        let cand = if faulty_attempt(ctx) {
            match ctx.err.mode {
                ErrorMode::WrongValue if truth.is_some() => None,
                _ => Some(ctx.rng.gen_range(0..marked.len())),
            }
        } else {
            truth
        };
        if let Some(c) = cand {
            if noisy_majority(ctx, marked[c], v) {
                return Some(c);
            }
        }
    }
    None
}

/// Simulated amplified selection of the best candidate (0-based result).
/// `better(a, b)` is the strict preference between candidate indices.
pub fn noisy_best_select(ctx: &mut Ctx, len: usize, exact: usize, better: &dyn Fn(usize, usize) -> bool) -> usize {
    if len == 1 {
        return 0;
    }
    let v = votes(len);
    let mut cands = Vec::with_capacity(ATTEMPTS);
    for _ in 0..ATTEMPTS {
        if faulty_attempt(ctx) {
            cands.push(ctx.rng.gen_range(0..len));
        } else {
            cands.push(exact);
        }
    }
    let mut best = cands[0];
    for &c in &cands[1..] {
        if c != best && noisy_majority(ctx, better(c, best), v) {
            best = c;
        }
    }
    best
}

fn argbest<V: Ord>(values: &[V], maximize: bool) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        let improves = if maximize { *v > values[best] } else { *v < values[best] };
        if improves {
            best = i;
        }
    }
    best
}

/// Exact search: smallest marked index (1-based), or `None`.
pub fn q_search(ctx: &mut Ctx, j: usize, eval: impl FnMut(&mut Ctx, usize) -> Result<bool>) -> Result<Option<usize>> {
    if j == 0 {
        return Ok(None);
    }
    let m = measure(ctx, j, eval)?;
    let c = ctx.params.c_search;
    charge_grover(ctx, c, &m);
    Ok(m.values.iter().position(|&b| b).map(|i| i + 1))
}

/// Search whose evaluations may fail; same charge as [`q_search`].
pub fn q_search_erroneous(
    ctx: &mut Ctx,
    j: usize,
    eval: impl FnMut(&mut Ctx, usize) -> Result<bool>,
) -> Result<Option<usize>> {
    ctx.err.validate()?;
    if !ctx.err.active() {
        return q_search(ctx, j, eval);
    }
    if j == 0 {
        return Ok(None);
    }
    let m = measure(ctx, j, eval)?;
    let c = ctx.params.c_search;
    charge_grover(ctx, c, &m);
    Ok(noisy_search_select(ctx, &m.values).map(|i| i + 1))
}

fn q_best<V: Ord + Clone>(
    ctx: &mut Ctx,
    j: usize,
    maximize: bool,
    erroneous: bool,
    eval: impl FnMut(&mut Ctx, usize) -> Result<V>,
) -> Result<(usize, V)> {
    if j == 0 {
        return Err(Error::EmptyDomain);
    }
    if erroneous {
        ctx.err.validate()?;
    }
    let m = measure(ctx, j, eval)?;
    let a = ctx.params.alpha;
    charge_grover(ctx, a, &m);
    let exact = argbest(&m.values, maximize);
    let pick = if erroneous && ctx.err.active() {
        let vals = &m.values;
        let better = |x: usize, y: usize| {
            if maximize {
                vals[x] > vals[y] || (vals[x] == vals[y] && x < y)
            } else {
                vals[x] < vals[y] || (vals[x] == vals[y] && x < y)
            }
        };
        noisy_best_select(ctx, j, exact, &better)
    } else {
        exact
    };
    Ok((pick + 1, m.values[pick].clone()))
}

/// Index (1-based, smallest on ties) and value of a minimum.
pub fn q_min<V: Ord + Clone>(ctx: &mut Ctx, j: usize, eval: impl FnMut(&mut Ctx, usize) -> Result<V>) -> Result<(usize, V)> {
    q_best(ctx, j, false, false, eval)
}

pub fn q_max<V: Ord + Clone>(ctx: &mut Ctx, j: usize, eval: impl FnMut(&mut Ctx, usize) -> Result<V>) -> Result<(usize, V)> {
    q_best(ctx, j, true, false, eval)
}

pub fn q_min_erroneous<V: Ord + Clone>(
    ctx: &mut Ctx,
    j: usize,
    eval: impl FnMut(&mut Ctx, usize) -> Result<V>,
) -> Result<(usize, V)> {
    q_best(ctx, j, false, true, eval)
}

pub fn q_max_erroneous<V: Ord + Clone>(
    ctx: &mut Ctx,
    j: usize,
    eval: impl FnMut(&mut Ctx, usize) -> Result<V>,
) -> Result<(usize, V)> {
    q_best(ctx, j, true, true, eval)
}

fn ed_charge(ctx: &mut Ctx, size: usize, memory_size: u64) -> CostLedger {
    let reps = (ctx.params.c_ed * (size as f64).powf(2.0 / 3.0)).ceil() as u64;
    let polylog = (size as f64).log2().max(1.0);
    CostLedger::new(reps, reps as f64 * polylog * ctx.params.qw(memory_size))
}

/// Whether the concatenation named by `desc` has pairwise distinct symbols.
/// Charges `ceil(c_ed * s^{2/3})` queries.
pub fn element_distinct<T: Copy + Default + Eq + Hash>(
    ctx: &mut Ctx,
    store: &InstanceStore<T>,
    desc: &TDescription,
) -> Result<bool> {
    desc.validate(store.len())?;
    let c = ed_charge(ctx, desc.size(), store.memory_size());
    ctx.ledger += c;
    let mut seen = HashSet::with_capacity(desc.size());
    Ok(desc.positions().all(|p| seen.insert(store.peek(p))))
}

/// [`element_distinct`] over an arbitrary symbol accessor.
pub fn element_distinct_with<T: Eq + Hash>(
    ctx: &mut Ctx,
    desc: &TDescription,
    memory_size: u64,
    sym: impl Fn(usize) -> T,
) -> bool {
    let c = ed_charge(ctx, desc.size(), memory_size);
    ctx.ledger += c;
    let mut seen = HashSet::with_capacity(desc.size());
    desc.positions().all(|p| seen.insert(sym(p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Left,
    Right,
}

/// Exact farthest rank reachable from rank `start` in direction `dir` with
/// every symbol on the way distinct. `at(rank)` returns the symbol.
pub fn distinct_reach<T: Eq + Hash>(start: usize, len: usize, dir: Direction, at: impl Fn(usize) -> T) -> usize {
    let mut seen = HashSet::new();
    let mut r = start;
    seen.insert(at(start));
    loop {
        let next = match dir {
            Direction::Right if r + 1 < len => r + 1,
            Direction::Left if r > 0 => r - 1,
            _ => return r,
        };
        if !seen.insert(at(next)) {
            return r;
        }
        r = next;
    }
}

/// Charge of one boundary search over a description of size `size`:
/// `ceil(log s)` distinctness probes, each repeated [`votes`] times for
/// majority voting when failures are active.
pub fn boundary_charge(ctx: &mut Ctx, size: usize, memory_size: u64) -> CostLedger {
    let probes = (size as f64).log2().ceil().max(1.0) as u64;
    let reps = if ctx.err.active() { votes(size) as u64 } else { 1 };
    let one = ed_charge(ctx, size, memory_size);
    let c = CostLedger::new(one.queries * probes * reps, one.time_units * (probes * reps) as f64);
    ctx.ledger += c;
    c
}

/// Binary search for the last rank in `[lo, hi]` satisfying a monotone
/// predicate whose exact boundary is `truth`, with noisy majority probes.
fn noisy_binary_search(ctx: &mut Ctx, mut lo: usize, mut hi: usize, truth: usize, size: usize) -> usize {
    let v = votes(size);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if noisy_majority(ctx, mid <= truth, v) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

/// Farthest position reachable from `k` inside the concatenation named by
/// `desc` such that the symbols between `k` and it are distinct.
pub fn noisy_boundary_search<T: Copy + Default + Eq + Hash>(
    ctx: &mut Ctx,
    store: &InstanceStore<T>,
    desc: &TDescription,
    k: usize,
    dir: Direction,
) -> Result<usize> {
    desc.validate(store.len())?;
    boundary_search_with(ctx, desc, k, dir, store.memory_size(), |p| store.peek(p))
}

/// Boundary search over an arbitrary symbol accessor; used by views.
pub fn boundary_search_with<T: Eq + Hash>(
    ctx: &mut Ctx,
    desc: &TDescription,
    k: usize,
    dir: Direction,
    memory_size: u64,
    sym: impl Fn(usize) -> T,
) -> Result<usize> {
    let rk = desc
        .rank_of(k)
        .ok_or_else(|| Error::Description(format!("position {k} outside description {desc}")))?;
    let s = desc.size();
    boundary_charge(ctx, s, memory_size);
    let exact = distinct_reach(rk, s, dir, |r| sym(desc.pos_at(r)));
    let rank = if ctx.err.active() {
        match dir {
            Direction::Right => noisy_binary_search(ctx, rk, s - 1, exact, s),
            Direction::Left => {
                // mirror ranks so the predicate stays "at most the boundary"
                let m = |r: usize| s - 1 - r;
                m(noisy_binary_search(ctx, m(rk), s - 1, m(exact), s))
            }
        }
    } else {
        exact
    };
    Ok(desc.pos_at(rank))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    /// Joint search over all evaluators.
    A1,
    /// Sequential evaluation with error reduction.
    A2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    Min,
    Max,
}

/// Selection over heterogeneous evaluators charged by the cheaper (in time)
/// of the two strategies:
/// A1 charges `ceil(alpha sqrt J) * q_max` queries and `ceil(alpha sqrt J) * (S_sum + q_max QR)` time,
/// A2 charges `ceil(alpha log J) * q_sum` queries and `ceil(alpha log J) * (S_sum + q_sum QR)` time,
/// where `S_j` is evaluator j's time net of its memory accesses.
pub fn selector_two<V: Ord + Clone>(
    ctx: &mut Ctx,
    j: usize,
    goal: Goal,
    memory_size: u64,
    eval: impl FnMut(&mut Ctx, usize) -> Result<V>,
) -> Result<(usize, V, Strategy)> {
    if j == 0 {
        return Err(Error::EmptyDomain);
    }
    let m = measure(ctx, j, eval)?;
    let qr = ctx.params.qr(memory_size);
    let s_sum: f64 = m.costs.iter().map(|c| (c.time_units - c.queries as f64 * qr).max(0.0)).sum();
    let (q_max, q_sum) = (m.q_max().max(1), m.q_sum().max(1));
    let alpha = ctx.params.alpha;
    let r1 = grover_reps(alpha, j);
    let r2 = (alpha * (j as f64).log2().max(1.0)).ceil() as u64;
    let a1 = CostLedger::new(r1 * q_max, r1 as f64 * (s_sum + q_max as f64 * qr));
    let a2 = CostLedger::new(r2 * q_sum, r2 as f64 * (s_sum + q_sum as f64 * qr));
    let (strategy, charged) = if a1.time_units <= a2.time_units { (Strategy::A1, a1) } else { (Strategy::A2, a2) };
    ctx.ledger += charged;
    let maximize = goal == Goal::Max;
    let exact = argbest(&m.values, maximize);
    let pick = if strategy == Strategy::A1 && ctx.err.active() {
        let vals = &m.values;
        let better = |x: usize, y: usize| {
            if maximize {
                vals[x] > vals[y] || (vals[x] == vals[y] && x < y)
            } else {
                vals[x] < vals[y] || (vals[x] == vals[y] && x < y)
            }
        };
        noisy_best_select(ctx, j, exact, &better)
    } else {
        exact
    };
    Ok((pick + 1, m.values[pick].clone(), strategy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{ErrorModel, Kind};
    use proptest::prelude::*;
    use super::Strategy;

    fn ctx() -> Ctx {
        Ctx::default()
    }

    #[test]
    fn search_examples() {
        let mut c = ctx();
        let f = [false, false, true, false];
        assert_eq!(q_search(&mut c, 4, |_, i| Ok(f[i - 1])).unwrap(), Some(3));
        assert_eq!(q_search(&mut c, 5, |_, _| Ok(false)).unwrap(), None);
        let before = c.ledger;
        assert_eq!(q_search(&mut c, 0, |_, _| Ok(true)).unwrap(), None);
        assert_eq!(c.ledger, before);
        let mut c = ctx();
        let got = q_search(&mut c, 8, |_, i| Ok(i == 2 || i == 7)).unwrap().unwrap();
        assert!(got == 2 || got == 7);
        assert!(c.ledger.queries <= (3.0 * 8f64.sqrt()).ceil() as u64);
    }

    #[test]
    fn min_examples() {
        let mut c = ctx();
        let f = [3, 1, 2, 5];
        assert_eq!(q_min(&mut c, 4, |_, i| Ok(f[i - 1])).unwrap(), (2, 1));
        assert_eq!(q_min(&mut c, 6, |_, _| Ok(7)).unwrap().0, 1);
        assert_eq!(q_min(&mut c, 0, |_, _| Ok(7)), Err(Error::EmptyDomain));
        let mut c = Ctx::with_errors(Default::default(), ErrorModel::new(0.3, 9, ErrorMode::WrongValue).unwrap());
        assert_eq!(q_min_erroneous(&mut c, 1, |_, _| Ok(4)).unwrap(), (1, 4));
    }

    #[test]
    fn erroneous_rejects_high_failure() {
        let mut c = ctx();
        c.err.per_call_failure = 0.31;
        c.err.mode = ErrorMode::WrongValue;
        assert!(matches!(q_search_erroneous(&mut c, 4, |_, _| Ok(true)), Err(Error::Contract(_))));
        assert!(matches!(q_min_erroneous(&mut c, 4, |_, i| Ok(i)), Err(Error::Contract(_))));
    }

    #[test]
    fn query_free_formula_audit() {
        for j in 1..200usize {
            let mut c = ctx();
            q_min(&mut c, j, |_, i| Ok(i % 7)).unwrap();
            assert_eq!(c.ledger.queries, (3.0 * (j as f64).sqrt()).ceil() as u64);
        }
    }

    #[test]
    fn element_distinct_examples() {
        let mut c = ctx();
        let st = InstanceStore::qram(crate::oracle::load_text("abc"), Kind::String);
        assert!(element_distinct(&mut c, &st, &TDescription::whole(3)).unwrap());
        let st = InstanceStore::qram(crate::oracle::load_text("aba"), Kind::String);
        assert!(!element_distinct(&mut c, &st, &TDescription::whole(3)).unwrap());
        let st = InstanceStore::qram(crate::oracle::load_text("abcdb"), Kind::String);
        let d = TDescription::new(vec![1, 3, 5, 5]).unwrap();
        assert!(!element_distinct(&mut c, &st, &d).unwrap());
        let bad = TDescription::new(vec![1, 9]).unwrap();
        assert!(matches!(element_distinct(&mut c, &st, &bad), Err(Error::Description(_))));
    }

    #[test]
    fn boundary_examples() {
        let mut c = ctx();
        let d = TDescription::new(vec![1, 2, 3, 4]).unwrap();
        let st = InstanceStore::qram(crate::oracle::load_text("abcd"), Kind::String);
        assert_eq!(noisy_boundary_search(&mut c, &st, &d, 1, Direction::Right).unwrap(), 4);
        let st = InstanceStore::qram(crate::oracle::load_text("abab"), Kind::String);
        assert_eq!(noisy_boundary_search(&mut c, &st, &d, 1, Direction::Right).unwrap(), 2);
        let st = InstanceStore::qram(crate::oracle::load_text("aaaa"), Kind::String);
        for k in 1..=4 {
            assert_eq!(noisy_boundary_search(&mut c, &st, &d, k, Direction::Right).unwrap(), k);
            assert_eq!(noisy_boundary_search(&mut c, &st, &d, k, Direction::Left).unwrap(), k);
        }
    }

    #[test]
    fn selector_examples() {
        let mut c = ctx();
        let (i, _, _) = selector_two(&mut c, 1, Goal::Min, 16, |_, _| Ok(5)).unwrap();
        assert_eq!(i, 1);
        let f = [9, 2, 5];
        let (i, v, _) = selector_two(&mut c, 3, Goal::Min, 16, |_, i| Ok(f[i - 1])).unwrap();
        assert_eq!((i, v), (2, 2));
    }

    #[test]
    fn selector_charges_cheaper_strategy() {
        // heterogeneous evaluators: evaluator j reads j cells
        let st = InstanceStore::qram(vec![0i64; 64], Kind::IntArray);
        for j in [2usize, 5, 16] {
            let mut c = ctx();
            let (_, _, strat) = selector_two(&mut c, j, Goal::Max, 64, |cx, i| {
                for p in 1..=i {
                    st.read(cx, p)?;
                }
                Ok(i)
            })
            .unwrap();
            let qr = c.params.qr(64);
            let (q_max, q_sum) = (j as f64, (j * (j + 1) / 2) as f64);
            let r1 = (3.0 * (j as f64).sqrt()).ceil();
            let r2 = (3.0 * (j as f64).log2().max(1.0)).ceil();
            let t1 = r1 * q_max * qr;
            let t2 = r2 * q_sum * qr;
            let want = if t1 <= t2 { Strategy::A1 } else { Strategy::A2 };
            assert_eq!(strat, want);
            assert!((c.ledger.time_units - t1.min(t2)).abs() < 1e-6);
        }
    }

    proptest! {
        #[test]
        fn exact_primitives_match_scan(vals in proptest::collection::vec(-50i64..50, 1..300)) {
            let mut c = ctx();
            let (i, v) = q_min(&mut c, vals.len(), |_, i| Ok(vals[i - 1])).unwrap();
            let m = *vals.iter().min().unwrap();
            prop_assert_eq!(v, m);
            prop_assert_eq!(i, vals.iter().position(|&x| x == m).unwrap() + 1);
            let (i, v) = q_max(&mut c, vals.len(), |_, i| Ok(vals[i - 1])).unwrap();
            let m = *vals.iter().max().unwrap();
            prop_assert_eq!(v, m);
            prop_assert_eq!(i, vals.iter().position(|&x| x == m).unwrap() + 1);
            let s = q_search(&mut c, vals.len(), |_, i| Ok(vals[i - 1] > 40)).unwrap();
            prop_assert_eq!(s, vals.iter().position(|&x| x > 40).map(|p| p + 1));
        }

        #[test]
        fn boundary_matches_linear_scan(s in proptest::collection::vec(0u32..12, 2..256), k_frac in 0.0f64..1.0, split in 0.0f64..1.0) {
            let n = s.len();
            let i2 = 1 + ((n - 1) as f64 * split) as usize;
            let i2 = i2.min(n - 1);
            let d = TDescription::new(vec![1, i2, i2 + 1, n]).unwrap();
            let st = InstanceStore::qram(s.clone(), Kind::String);
            let k = 1 + ((n - 1) as f64 * k_frac) as usize;
            let mut c = ctx();
            let r = noisy_boundary_search(&mut c, &st, &d, k, Direction::Right).unwrap();
            let mut seen = HashSet::new();
            let mut want = k;
            for p in k..=n { if !seen.insert(s[p - 1]) { break; } want = p; }
            prop_assert_eq!(r, want);
            let l = noisy_boundary_search(&mut c, &st, &d, k, Direction::Left).unwrap();
            let mut seen = HashSet::new();
            let mut want = k;
            for p in (1..=k).rev() { if !seen.insert(s[p - 1]) { break; } want = p; }
            prop_assert_eq!(l, want);
        }
    }
}
