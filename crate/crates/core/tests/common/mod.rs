//! Checks shared by the integration suites and the acceptance runner.
//! Each panics on the first counterexample.
#![allow(dead_code)]

use std::collections::HashSet;

use qdc::ext::Ext;
use qdc::frameworks::{halves, TDescription};
use qdc::geometry::{cut, simplify_slabs, weigh, Simplified};
use qdc::harness::random_coverage;
use qdc::lds::{bipartite_lds, prev, succ};
use qdc::matrix::{majority_reduction, max_submatrix, prefix_matrix};
use qdc::oracle::{Ctx, InstanceStore, Kind};
use qdc::strings::{k_ss, ssst, SignPattern};
use qdc::{lds, oracles};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn distinct(s: &[u8]) -> bool {
    let mut seen = HashSet::new();
    s.iter().all(|c| seen.insert(*c))
}

fn lds_brute(s: &[u8]) -> usize {
    (0..s.len()).flat_map(|i| (i..s.len()).map(move |j| (i, j))).filter(|&(i, j)| distinct(&s[i..=j])).map(|(i, j)| j - i + 1).max().unwrap_or(0)
}

/// Positions (1-based, into `a`) of `a[i1..=i2] ++ a[i3..=i4]`; an empty right part when `i4 < i3`.
fn concat(i: [usize; 4]) -> Vec<usize> {
    (i[0]..=i[1]).chain(i[2]..=i[3]).collect()
}

/// Longest distinct run of the concatenation whose right end lies in `ends`.
fn lds_ending_in(a: &[u8], pos: &[usize], ends: &[usize]) -> usize {
    let mut best = 0;
    for (r, p) in pos.iter().enumerate() {
        if !ends.contains(p) {
            continue;
        }
        for l in (0..=r).rev() {
            let s: Vec<u8> = pos[l..=r].iter().map(|&q| a[q - 1]).collect();
            if !distinct(&s) {
                break;
            }
            best = best.max(r - l + 1);
        }
    }
    best
}

/// Longest distinct run touching the junction of the two parts.
fn blds_brute(a: &[u8], i: [usize; 4]) -> usize {
    let pos = concat(i);
    let mid = i[1] - i[0];
    let mut best = 0;
    for l in 0..=mid {
        for r in mid..pos.len() {
            let s: Vec<u8> = pos[l..=r].iter().map(|&q| a[q - 1]).collect();
            if distinct(&s) {
                best = best.max(r - l + 1);
            }
        }
    }
    if i[3] >= i[2] {
        for r in mid + 1..pos.len() {
            let s: Vec<u8> = pos[mid + 1..=r].iter().map(|&q| a[q - 1]).collect();
            if distinct(&s) {
                best = best.max(r - mid);
            }
        }
    }
    best
}

/// Leftmost start of a distinct run of the concatenation ending at `k`.
fn left_end(a: &[u8], i: [usize; 4], k: usize) -> usize {
    let pos = concat(i);
    let r = pos.iter().position(|&p| p == k).unwrap();
    let mut l = r;
    while l > 0 {
        let s: Vec<u8> = pos[l - 1..=r].iter().map(|&q| a[q - 1]).collect();
        if !distinct(&s) {
            break;
        }
        l -= 1;
    }
    pos[l]
}

fn right_end(a: &[u8], i: [usize; 4], k: usize) -> usize {
    let pos = concat(i);
    let l = pos.iter().position(|&p| p == k).unwrap();
    let mut r = l;
    while r + 1 < pos.len() {
        let s: Vec<u8> = pos[l..=r + 1].iter().map(|&q| a[q - 1]).collect();
        if !distinct(&s) {
            break;
        }
        r += 1;
    }
    pos[r]
}

pub fn removing_a_shared_distinct_middle() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let mut checked = 0;
    while checked < 2000 {
        let n = rng.gen_range(2..=64);
        let v = rng.gen_range(2..=n);
        let u = rng.gen_range(1..v);
        // a[1..=v] distinct from a pool of 96 symbols
        let mut pool: Vec<u8> = (0..96).collect();
        let mut a: Vec<u8> = Vec::with_capacity(n);
        for _ in 0..v {
            a.push(pool.swap_remove(rng.gen_range(0..pool.len())));
        }
        // a[v+1..] avoids a[u..=v] and itself, may reuse a[1..u-1]
        let mut avail: Vec<u8> = (0..96u8).filter(|c| !a[u - 1..v].contains(c)).collect();
        while a.len() < n && !avail.is_empty() {
            a.push(avail.swap_remove(rng.gen_range(0..avail.len())));
        }
        let n = a.len();
        assert!(distinct(&a[..v]) && distinct(&a[u - 1..]));
        let b: Vec<u8> = a[..u - 1].iter().chain(&a[v..]).copied().collect();
        assert_eq!(lds_brute(&a), v - u + 1 + lds_brute(&b), "a={a:?} u={u} v={v} n={n}");
        checked += 1;
    }
}

/// Random valid 2-description meeting the distinctness precondition on
/// `a[I2] ++ a[I3..=I4]`, over an alphabet of `sigma` symbols.
fn precondition_instance(rng: &mut ChaCha8Rng, max_len: usize, sigma: u8) -> (Vec<u8>, [usize; 4]) {
    loop {
        let n = rng.gen_range(2..=max_len);
        let a: Vec<u8> = (0..n).map(|_| rng.gen_range(0..sigma)).collect();
        let mut p: Vec<usize> = (0..4).map(|_| rng.gen_range(1..=n)).collect();
        p.sort_unstable();
        let i = [p[0], p[1], p[2], p[3]];
        if i[1] >= i[2] {
            continue;
        }
        let mut tail = vec![a[i[1] - 1]];
        tail.extend(&a[i[2] - 1..i[3]]);
        if distinct(&tail) {
            return (a, i);
        }
    }
}

fn blds_lib(a: &[u8], i: [usize; 4]) -> usize {
    let store = InstanceStore::qram(a.to_vec(), Kind::String);
    let desc = TDescription::new(i.to_vec()).unwrap();
    bipartite_lds(&mut Ctx::default(), &store, &desc, 3).unwrap() as usize
}

pub fn interval_restricted_blds_reduces_to_a_smaller_instance() {
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    for _ in 0..1500 {
        let (a, i) = precondition_instance(&mut rng, 40, 10);
        let k1 = rng.gen_range(i[2]..=i[3]);
        let k2 = rng.gen_range(k1..=i[3]);
        let t = k2 - k1 + 1;
        let before = prev(i[1], i[2], k1).unwrap();
        let i1 = left_end(&a, i, before);
        let i2 = i[1].min(i1 + t - 1);
        let k2p = k2.min(right_end(&a, i, succ(i[1], i[2], i2).unwrap()));
        let j = [i1, i2, k1, k2p];
        let mut ends: Vec<usize> = (k1..=k2).collect();
        ends.push(before);
        let lhs = lds_ending_in(&a, &concat(i), &ends);
        let rhs = i[1] - i2 + k1 - i[2] + blds_brute(&a, j);
        assert_eq!(lhs, rhs, "a={a:?} I={i:?} K={k1}..{k2} J={j:?}");
    }
}

pub fn blds_is_the_best_completed_interval_child() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for h in 2..=4usize {
        for _ in 0..600 {
            let (a, i) = precondition_instance(&mut rng, 40, 12);
            let m = i[3] - i[2] + 1;
            if m < h {
                continue;
            }
            // random partition of I3..=I4 into h nonempty intervals
            let mut cuts: Vec<usize> = rand::seq::index::sample(&mut rng, m - 1, h - 1).into_iter().map(|c| i[2] + c + 1).collect();
            cuts.sort_unstable();
            let starts: Vec<usize> = std::iter::once(i[2]).chain(cuts.iter().copied()).collect();
            let best = (0..h)
                .map(|l| {
                    let x = starts[l];
                    let y = starts.get(l + 1).map_or(i[3], |s| s - 1);
                    let p = left_end(&a, i, prev(i[1], i[2], x).unwrap());
                    let q = i[1].min(p + (y - x + 1) - 1);
                    let yp = y.min(right_end(&a, i, succ(i[1], i[2], q).unwrap()));
                    i[1] - q + x - i[2] + blds_brute(&a, [p, q, x, yp])
                })
                .max()
                .unwrap();
            let whole = blds_brute(&a, i);
            assert_eq!(whole, best, "a={a:?} I={i:?} starts={starts:?}");
            assert_eq!(blds_lib(&a, i), whole);
        }
    }
}

pub fn ssst_crossing_is_right_max_minus_left_min() {
    let mut rng = ChaCha8Rng::seed_from_u64(54);
    for p in 1..=6u32 {
        let n = 1usize << p;
        for _ in 0..20 {
            let a: Vec<i64> = (0..n).map(|_| rng.gen_range(-50..=50)).collect();
            for t in 0..p {
                for k in 1..=1usize << t {
                    let ((ls, le), (rs, re)) = halves(n, t, k);
                    let brute = (ls..=le).flat_map(|i| (rs..=re).map(move |j| (i, j))).map(|(i, j)| a[j - 1] - a[i - 1]).max().unwrap();
                    let hi = a[rs - 1..re].iter().max().unwrap();
                    let lo = a[ls - 1..le].iter().min().unwrap();
                    assert_eq!(brute, hi - lo);
                }
            }
        }
    }
}

/// Every strictly increasing `k`-tuple of 1-based indices in `lo..=hi`.
fn tuples(k: usize, lo: usize, hi: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, from: usize, hi: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in from..=hi {
            cur.push(i);
            go(k, i + 1, hi, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(k, lo, hi, &mut Vec::new(), &mut out);
    out
}

pub fn crossing_increasing_subsequence_splits_at_the_midpoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for _ in 0..300 {
        let len = 1usize << rng.gen_range(1..=5);
        let c: Vec<i64> = (0..len).map(|_| rng.gen_range(-12..=12)).collect();
        let half = len / 2;
        let gamma = if rng.gen_bool(0.3) { Ext::NegInf } else { Ext::Fin(rng.gen_range(-12..=6)) };
        for k in 2..=4usize.min(len) {
            let brute = tuples(k, 1, len)
                .into_iter()
                .filter(|t| t[0] <= half && t[k - 1] > half)
                .filter(|t| Ext::Fin(c[t[0] - 1]) > gamma && t.windows(2).all(|w| c[w[0] - 1] < c[w[1] - 1]))
                .map(|t| Ext::Fin(c[t[k - 1] - 1]))
                .min()
                .unwrap_or(Ext::PosInf);
            let (left, right) = c.split_at(half);
            let split = (1..k)
                .map(|j| {
                    let g = oracles::f_k(left, j, gamma).unwrap();
                    if g == Ext::PosInf { Ext::PosInf } else { oracles::f_k(right, k - j, g).unwrap() }
                })
                .min()
                .unwrap();
            assert_eq!(brute, split, "C={c:?} k={k} gamma={gamma:?}");
        }
    }
}

pub fn crossing_signed_sum_splits_at_the_midpoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(56);
    for _ in 0..300 {
        let len = 1usize << rng.gen_range(1..=5);
        let c: Vec<i64> = (0..len).map(|_| rng.gen_range(-20..=20)).collect();
        let half = len / 2;
        for k in 2..=4usize.min(len) {
            let eps: Vec<i64> = (0..k).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
            let brute = tuples(k, 1, len)
                .into_iter()
                .filter(|t| t[0] <= half && t[k - 1] > half)
                .map(|t| t.iter().zip(&eps).map(|(&i, e)| e * c[i - 1]).sum::<i64>())
                .max()
                .unwrap();
            let (left, right) = c.split_at(half);
            let split = (1..k)
                .filter(|&j| left.len() >= j && right.len() >= k - j)
                .map(|j| oracles::k_ss(left, &eps[..j]).unwrap() + oracles::k_ss(right, &eps[j..]).unwrap())
                .max()
                .unwrap();
            assert_eq!(brute, split, "C={c:?} eps={eps:?}");
        }
    }
}

pub fn rectangle_sums_from_prefix_corners() {
    let mut rng = ChaCha8Rng::seed_from_u64(57);
    for n in 1..=8usize {
        for _ in 0..10 {
            let b: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-100..=100)).collect()).collect();
            let mut ctx = Ctx::default();
            let c = prefix_matrix(&mut ctx, &b).unwrap();
            for i in 1..=n {
                for j in i..=n {
                    for k in 1..=n {
                        for l in k..=n {
                            let direct: i64 = (i..=j).flat_map(|r| (k..=l).map(move |s| (r, s))).map(|(r, s)| b[r - 1][s - 1]).sum();
                            assert_eq!(c.f(&mut ctx, (i - 1, k - 1), (j, l)).unwrap(), direct);
                        }
                    }
                }
            }
        }
    }
}

pub fn majority_iff_large_submatrix_exhaustive_n3() {
    for bits in 0u32..512 {
        let x: Vec<bool> = (0..9).map(|i| bits >> i & 1 == 1).collect();
        let (m, thr) = majority_reduction(&x).unwrap();
        assert_eq!(thr, 4);
        let maj = bits.count_ones() > 4;
        assert_eq!(max_submatrix(&mut Ctx::default(), &m).unwrap().0 > thr, maj, "x={bits:09b}");
        assert_eq!(oracles::max_submatrix(&m).unwrap().0 > thr, maj);
    }
}

pub fn klee_child_weight_decays() {
    let mut rng = ChaCha8Rng::seed_from_u64(58);
    let mut cuts = 0;
    for d in 2..=4usize {
        let h = 1usize << d;
        for _ in 0..150 {
            let n = rng.gen_range(2..=24);
            let inst = random_coverage(&mut rng, d, n).unwrap();
            let mut ctx = Ctx::default();
            let Simplified::Open(simple) = simplify_slabs(&mut ctx, &inst) else { continue };
            let faces = weigh(&simple, h);
            let bound = faces.total() / (h as f64).powf(2.0 / d as f64) * (1.0 + 1e-9);
            for mut child in cut(&mut ctx, &simple, &faces, h, 1).unwrap() {
                child.rotate_axes();
                assert!(weigh(&child, h).total() <= bound, "d={d} n={n}");
                cuts += 1;
            }
        }
    }
    assert!(cuts > 500, "only {cuts} children examined");
}

/// All words of length `len` over `0..sigma`, as base-`sigma` digits.
pub fn words(sigma: u64, len: usize) -> impl Iterator<Item = Vec<u8>> {
    (0..sigma.pow(len as u32)).map(move |mut w| {
        (0..len)
            .map(|_| {
                let d = (w % sigma) as u8;
                w /= sigma;
                d
            })
            .collect()
    })
}

pub fn lds_exhaustive_abc_up_to_12() {
    for len in 1..=12 {
        for w in words(3, len) {
            let got = lds::lds(&mut Ctx::default(), &w, lds::DEFAULT_H).unwrap();
            assert_eq!(got, oracles::lds(&w).unwrap(), "{w:?}");
        }
    }
}

pub fn two_sign_pattern_is_ssst_exhaustive() {
    let eps = SignPattern::new(vec![-1, 1]).unwrap();
    for len in 2..=10 {
        for w in words(5, len) {
            let a: Vec<i64> = w.iter().map(|&d| i64::from(d) - 2).collect();
            let mut c = Ctx::default();
            assert_eq!(k_ss(&mut c, &a, &eps).unwrap(), ssst(&mut c, &a).unwrap().0, "{a:?}");
        }
    }
}
