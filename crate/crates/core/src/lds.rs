//! Longest distinct substring: the bipartite recursion over 2-descriptions
//! and the bottom-up driver around it.

use std::cell::RefCell;
use std::hash::Hash;

use crate::costmodel::memory_size_decomposable;
use crate::error::{Error, Result};
use crate::frameworks::{bottom_up, halves, run_decomposable, Child, Combine, Decomposable, Prep, TDescription};
use crate::oracle::{Ctx, InstanceStore, Kind};
use crate::qprimitives::{boundary_search_with, element_distinct_with, noisy_boundary_search, Direction, Goal};

/// Default branching of the bipartite recursion.
pub const DEFAULT_H: usize = 4;

/// `prev_{i,j}(k)` for `k >= j`.
pub fn prev(i: usize, j: usize, k: usize) -> Result<usize> {
    if i >= j || k < j {
        return Err(Error::Contract(format!("prev_{{{i},{j}}}({k}) needs i < j <= k")));
    }
    Ok(if k == j { i } else { k - 1 })
}

/// `succ_{i,j}(k)` for `k <= i`.
pub fn succ(i: usize, j: usize, k: usize) -> Result<usize> {
    if i >= j || k > i {
        return Err(Error::Contract(format!("succ_{{{i},{j}}}({k}) needs k <= i < j")));
    }
    Ok(if k == i { j } else { k + 1 })
}

fn check_two<T: Copy + Default>(store: &InstanceStore<T>, desc: &TDescription) -> Result<()> {
    if desc.t() != 2 {
        return Err(Error::Description(format!("{desc} is not a 2-description")));
    }
    desc.validate(store.len())
}

/// `L(a, I, k)`: left endpoint of the longest distinct substring of the
/// concatenation whose right endpoint is `k`.
pub fn endpoint_l<T: Copy + Default + Eq + Hash>(
    ctx: &mut Ctx,
    store: &InstanceStore<T>,
    desc: &TDescription,
    k: usize,
) -> Result<usize> {
    check_two(store, desc)?;
    noisy_boundary_search(ctx, store, desc, k, Direction::Left)
}

/// `R(a, I, k)`: right endpoint of the longest distinct substring of the
/// concatenation whose left endpoint is `k`.
pub fn endpoint_r<T: Copy + Default + Eq + Hash>(
    ctx: &mut Ctx,
    store: &InstanceStore<T>,
    desc: &TDescription,
    k: usize,
) -> Result<usize> {
    check_two(store, desc)?;
    noisy_boundary_search(ctx, store, desc, k, Direction::Right)
}

/// A 2-description read either directly or through the mirror `p -> n* + 1 - p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BldsInst {
    pub desc: TDescription,
    pub mirrored: bool,
}

pub struct BldsState {
    mirrored: bool,
    j: [usize; 4],
    n2: usize,
    n2p: i64,
    /// `(lend, rstart)` per child, filled by the create step.
    offsets: RefCell<Vec<(usize, usize)>>,
}

struct Blds<'a, T> {
    store: &'a InstanceStore<T>,
    h: usize,
    memory_size: u64,
}

impl<T: Copy + Default + Eq + Hash> Blds<'_, T> {
    fn sym(&self, mirrored: bool, p: usize) -> T {
        let n = self.store.len();
        self.store.peek(if mirrored { n + 1 - p } else { p })
    }

    fn reach(&self, ctx: &mut Ctx, mirrored: bool, d: &TDescription, k: usize, dir: Direction) -> Result<usize> {
        boundary_search_with(ctx, d, k, dir, self.memory_size, |p| self.sym(mirrored, p))
    }

    fn two(i: [usize; 4]) -> Result<TDescription> {
        TDescription::new(i.to_vec())
    }
}

impl<T: Copy + Default + Eq + Hash> Decomposable for Blds<'_, T> {
    type Inst = BldsInst;
    type State = BldsState;
    type Ans = i64;

    fn combine(&self) -> Combine {
        Combine::Max
    }

    fn desc<'a>(&self, inst: &'a BldsInst) -> &'a TDescription {
        &inst.desc
    }

    fn h(&self, _: usize) -> usize {
        self.h
    }

    fn is_small(&self, inst: &BldsInst) -> bool {
        inst.desc.size() <= 2
    }

    fn base_solve(&self, ctx: &mut Ctx, inst: &BldsInst) -> Result<i64> {
        let (a, b) = (inst.desc.get(2), inst.desc.get(3));
        let n = self.store.len();
        let map = |p: usize| if inst.mirrored { n + 1 - p } else { p };
        let x = self.store.read(ctx, map(a))?;
        let y = self.store.read(ctx, map(b))?;
        Ok(if x != y { 2 } else { 1 })
    }

    fn prepare(&self, ctx: &mut Ctx, inst: &BldsInst) -> Result<Prep<BldsState, i64>> {
        let d = &inst.desc;
        let mut m = inst.mirrored;
        let i = [d.get(1), d.get(2), d.get(3), d.get(4)];
        let r = self.reach(ctx, m, d, i[2], Direction::Right)?;
        let mut n2p = (r - i[2] + 1) as i64;
        let mut i1 = self.reach(ctx, m, d, i[1], Direction::Left)?;
        let mut j2 = self.reach(ctx, m, d, i[1], Direction::Right)?;
        let mut n1 = i[1] - i1 + 1;
        n2p = n2p.max(n1 as i64);
        if j2 < i[2] {
            return Ok(Prep::Done(n2p));
        }
        let mut n2 = j2 - i[2] + 1;
        let mut j = [i1, i[1], i[2], j2];
        if n2 > n1 {
            let n = self.store.len();
            let f = |p: usize| n + 1 - p;
            m = !m;
            let jr = [f(j2), f(i[2]), f(i[1]), f(i1)];
            let dr = Self::two(jr)?;
            i1 = self.reach(ctx, m, &dr, jr[1], Direction::Left)?;
            j2 = self.reach(ctx, m, &dr, jr[1], Direction::Right)?;
            if j2 < jr[2] {
                return Ok(Prep::Done(n2p.max((jr[1] - i1 + 1) as i64)));
            }
            n1 = jr[1] - i1 + 1;
            n2 = j2 - jr[2] + 1;
            j = [i1, jr[1], jr[2], j2];
        }
        if n2 == 1 {
            let probe = Self::two([j[0], j[1], j[2], j[2]])?;
            let fresh = element_distinct_with(ctx, &probe, self.memory_size, |p| self.sym(m, p));
            let v = if fresh { n1 + 1 } else { n1 };
            return Ok(Prep::Done(n2p.max(v as i64)));
        }
        Ok(Prep::Node(BldsState { mirrored: m, j, n2, n2p, offsets: RefCell::new(vec![(0, 0); self.h]) }))
    }

    fn delta(&self, ctx: &mut Ctx, _: &BldsInst, st: &BldsState, l: usize) -> Result<Child<BldsInst, i64>> {
        let l0 = l - 1;
        let (q, rem) = (st.n2 / self.h, st.n2 % self.h);
        let t = if l0 < rem { q + 1 } else { q };
        if t == 0 {
            return Ok(Child::Empty);
        }
        let j = st.j;
        let rstart = j[2] + l0 * q + l0.min(rem);
        let rend = rstart + t - 1;
        let dj = Self::two(j)?;
        let lstart = self.reach(ctx, st.mirrored, &dj, prev(j[1], j[2], rstart)?, Direction::Left)?;
        let lend = j[1].min(lstart + t - 1);
        let r = self.reach(ctx, st.mirrored, &dj, succ(j[1], j[2], lend)?, Direction::Right)?;
        let rmiddle = rend.min(r);
        st.offsets.borrow_mut()[l0] = (lend, rstart);
        if rmiddle < rstart {
            return Ok(Child::Direct((lend - lstart + 1) as i64));
        }
        Ok(Child::Recurse(BldsInst { desc: Self::two([lstart, lend, rstart, rmiddle])?, mirrored: st.mirrored }))
    }

    fn gamma(&self, _: &mut Ctx, _: &BldsInst, st: &BldsState, l: usize, child: Option<i64>) -> Result<i64> {
        let Some(v) = child else { return Ok(st.n2p) };
        let (lend, rstart) = st.offsets.borrow()[l - 1];
        let off = (st.j[1] - lend + rstart - st.j[2]) as i64;
        Ok(st.n2p.max(off + v))
    }
}

fn memory_for(n: usize, h: usize) -> Result<u64> {
    let plan = memory_size_decomposable(
        n as u64,
        &|_| h as f64,
        &|k| (k as f64).powf(2.0 / 3.0).ceil() as u64,
        &|k| k <= 2,
        1,
    )?;
    Ok(plan.total)
}

/// Longest distinct substring of `a[I1..=I2] ++ a[I3..=I4]` containing
/// position `I2` or `I3`.
pub fn bipartite_lds<T: Copy + Default + Eq + Hash>(
    ctx: &mut Ctx,
    store: &InstanceStore<T>,
    desc: &TDescription,
    h: usize,
) -> Result<i64> {
    check_two(store, desc)?;
    if h < 2 {
        return Err(Error::Contract(format!("branching {h} must be at least 2")));
    }
    let memory_size = memory_for(store.len(), h)?;
    blds_with(ctx, store, desc, h, memory_size)
}

fn blds_with<T: Copy + Default + Eq + Hash>(
    ctx: &mut Ctx,
    store: &InstanceStore<T>,
    desc: &TDescription,
    h: usize,
    memory_size: u64,
) -> Result<i64> {
    let p = Blds { store, h, memory_size };
    run_decomposable(ctx, &p, &BldsInst { desc: desc.clone(), mirrored: false }, store.len(), memory_size)
}

/// Length of a longest substring of `a` without repeated symbols.
pub fn lds<T: Copy + Default + Eq + Hash>(ctx: &mut Ctx, a: &[T], h: usize) -> Result<i64> {
    if a.is_empty() {
        return Err(Error::TooShort("empty string".into()));
    }
    if h < 2 {
        return Err(Error::Contract(format!("branching {h} must be at least 2")));
    }
    if a.len() == 1 {
        return Ok(1);
    }
    let n = a.len().next_power_of_two();
    let mut cells = a.to_vec();
    cells.resize(n, *a.last().unwrap());
    let store = InstanceStore::qram(cells, Kind::String);
    let memory_size = memory_for(n, h)?;
    let best = bottom_up(ctx, n, Goal::Max, |c, t, k| {
        let ((ls, le), (rs, re)) = halves(n, t, k);
        blds_with(c, &store, &TDescription::new(vec![ls, le, rs, re])?, h, memory_size)
    })?;
    Ok(best.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Vec<u32> {
        x.bytes().map(u32::from).collect()
    }

    fn d(v: [usize; 4]) -> TDescription {
        TDescription::new(v.to_vec()).unwrap()
    }

    #[test]
    fn prev_succ_examples() {
        assert_eq!(prev(2, 5, 5).unwrap(), 2);
        assert_eq!(prev(2, 5, 7).unwrap(), 6);
        assert_eq!(succ(2, 5, 2).unwrap(), 5);
        assert_eq!(succ(2, 5, 1).unwrap(), 2);
        assert!(prev(2, 5, 4).is_err());
        assert!(succ(2, 5, 3).is_err());
    }

    #[test]
    fn endpoint_examples() {
        let mut c = Ctx::default();
        let st = |x: &str| InstanceStore::qram(s(x), Kind::String);
        assert_eq!(endpoint_l(&mut c, &st("abcd"), &d([1, 2, 3, 4]), 4).unwrap(), 1);
        assert_eq!(endpoint_l(&mut c, &st("abca"), &d([1, 2, 3, 4]), 4).unwrap(), 2);
        assert_eq!(endpoint_l(&mut c, &st("aa"), &d([1, 1, 2, 2]), 2).unwrap(), 2);
        assert_eq!(endpoint_r(&mut c, &st("abca"), &d([1, 2, 3, 4]), 1).unwrap(), 3);
        assert!(endpoint_l(&mut c, &st("abca"), &d([1, 1, 3, 4]), 2).is_err());
    }

    #[test]
    fn blds_examples() {
        let mut c = Ctx::default();
        let st = |x: &str| InstanceStore::qram(s(x), Kind::String);
        assert_eq!(bipartite_lds(&mut c, &st("abcd"), &d([1, 2, 3, 4]), 4).unwrap(), 4);
        assert_eq!(bipartite_lds(&mut c, &st("abab"), &d([1, 2, 3, 4]), 4).unwrap(), 2);
        assert_eq!(bipartite_lds(&mut c, &st("abcabcbb"), &d([1, 4, 5, 8]), 2).unwrap(), 3);
        assert!(c.audit.violations.is_empty());
    }

    #[test]
    fn lds_examples() {
        let mut c = Ctx::default();
        assert_eq!(lds(&mut c, &s("abcd"), 4).unwrap(), 4);
        assert_eq!(lds(&mut c, &s("aaaa"), 4).unwrap(), 1);
        assert_eq!(lds(&mut c, &s("abcabcbb"), 4).unwrap(), 3);
        assert_eq!(lds(&mut c, &s("x"), 4).unwrap(), 1);
        assert!(lds(&mut c, &s(""), 4).is_err());
    }

    proptest::proptest! {
        #[test]
        fn blds_matches_brute(a in proptest::collection::vec(0u32..4, 2..40), cut in 0.0f64..1.0, h in 2usize..5) {
            let n = a.len();
            let i2 = 1 + ((n - 1) as f64 * cut) as usize;
            let i2 = i2.min(n - 1);
            let desc = d([1, i2, i2 + 1, n]);
            let store = InstanceStore::qram(a.clone(), Kind::String);
            let mut c = Ctx::default();
            proptest::prop_assert_eq!(bipartite_lds(&mut c, &store, &desc, h).unwrap(), crate::oracles::blds(&a, &desc).unwrap());
        }

        #[test]
        fn blds_with_gap_matches_brute(a in proptest::collection::vec(0u32..5, 4..48), pts in proptest::collection::btree_set(1usize..48, 4), h in 2usize..5) {
            let n = a.len();
            let v: Vec<usize> = pts.into_iter().map(|p| 1 + (p - 1) % n).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
            proptest::prop_assume!(v.len() == 4);
            let desc = d([v[0], v[1], v[2], v[3]]);
            let store = InstanceStore::qram(a.clone(), Kind::String);
            let mut c = Ctx::default();
            proptest::prop_assert_eq!(bipartite_lds(&mut c, &store, &desc, h).unwrap(), crate::oracles::blds(&a, &desc).unwrap());
        }

        #[test]
        fn lds_matches_brute(a in proptest::collection::vec(0u32..6, 1..80), h in 2usize..5) {
            let mut c = Ctx::default();
            proptest::prop_assert_eq!(lds(&mut c, &a, h).unwrap(), crate::oracles::lds(&a).unwrap());
        }
    }
}
