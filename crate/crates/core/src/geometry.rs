//! Klee's coverage: does a union of axis-parallel boxes cover a base box?
//!
//! Coordinates are exact rationals. The recursive solver simplifies slabs,
//! weighs the `(d-2)`-faces, cuts the base box into `h` slices along the
//! first axis and rotates the axis names before recursing.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frameworks::{run_constructible_in, Combine, Constructible};
use crate::oracle::Ctx;

pub type Q = Ratio<i128>;

/// Largest elementary grid the brute-force oracle will sweep.
pub const MAX_GRID_CELLS: u128 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AxisBox {
    pub lo: Vec<Q>,
    pub hi: Vec<Q>,
}

impl AxisBox {
    pub fn new(lo: Vec<Q>, hi: Vec<Q>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidLength(format!("corner dimensions {} and {}", lo.len(), hi.len())));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::Contract("box has lo > hi on some axis".into()));
        }
        Ok(AxisBox { lo, hi })
    }

    pub fn from_ints(lo: &[i64], hi: &[i64]) -> Result<Self> {
        let q = |v: &[i64]| v.iter().map(|&x| Q::from_integer(x as i128)).collect();
        AxisBox::new(q(lo), q(hi))
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(a, b)| a == b)
    }

    /// `self ∩ Int g ≠ ∅`.
    pub fn meets_interior(&self, g: &AxisBox) -> bool {
        (0..self.dim()).all(|a| self.lo[a] < g.hi[a] && self.hi[a] > g.lo[a])
    }

    /// The intersection with `g` has positive volume.
    pub fn overlaps(&self, g: &AxisBox) -> bool {
        (0..self.dim()).all(|a| self.lo[a].max(g.lo[a]) < self.hi[a].min(g.hi[a]))
    }

    pub fn contains_box(&self, g: &AxisBox) -> bool {
        (0..self.dim()).all(|a| self.lo[a] <= g.lo[a] && self.hi[a] >= g.hi[a])
    }

    pub fn volume(&self) -> Q {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    fn rotate(&mut self) {
        self.lo.rotate_left(1);
        self.hi.rotate_left(1);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageInstance {
    pub d: usize,
    pub gamma: AxisBox,
    pub boxes: Vec<AxisBox>,
}

impl CoverageInstance {
    pub fn new(gamma: AxisBox, boxes: Vec<AxisBox>) -> Result<Self> {
        let d = gamma.dim();
        if gamma.is_degenerate() {
            return Err(Error::Contract("base box must be full-dimensional".into()));
        }
        if let Some(b) = boxes.iter().find(|b| b.dim() != d) {
            return Err(Error::InvalidLength(format!("box of dimension {} in a {d}-dimensional instance", b.dim())));
        }
        Ok(CoverageInstance { d, gamma, boxes })
    }

    /// Instance length: the boxes plus the base box.
    pub fn len(&self) -> usize {
        self.boxes.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Distinct box endpoints strictly inside the base box, summed over axes.
    pub fn interior_coordinates(&self) -> usize {
        (0..self.d)
            .map(|a| {
                let (lo, hi) = (self.gamma.lo[a], self.gamma.hi[a]);
                self.boxes
                    .iter()
                    .filter(|b| b.overlaps(&self.gamma))
                    .flat_map(|b| [b.lo[a], b.hi[a]])
                    .filter(|&x| lo < x && x < hi)
                    .collect::<BTreeSet<_>>()
                    .len()
            })
            .sum()
    }

    /// Renames axes `(1, 2, ..., d)` as `(d, 1, ..., d-1)`.
    pub fn rotate_axes(&mut self) {
        self.gamma.rotate();
        self.boxes.iter_mut().for_each(AxisBox::rotate);
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawInstance = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let conv = |b: RawBox| -> Result<AxisBox> {
            let q = |v: Vec<RawQ>| v.into_iter().map(RawQ::into_q).collect::<Result<Vec<_>>>();
            AxisBox::new(q(b.lo)?, q(b.hi)?)
        };
        let gamma = conv(raw.gamma)?;
        if gamma.dim() != raw.d {
            return Err(Error::Parse(format!("declared d = {} but base box has dimension {}", raw.d, gamma.dim())));
        }
        let boxes = raw.boxes.into_iter().map(conv).collect::<Result<Vec<_>>>()?;
        CoverageInstance::new(gamma, boxes)
    }

    pub fn to_json(&self) -> String {
        let q = |v: &[Q]| v.iter().map(|x| RawQ::Pair([*x.numer() as i64, *x.denom() as i64])).collect();
        let conv = |b: &AxisBox| RawBox { lo: q(&b.lo), hi: q(&b.hi) };
        let raw = RawInstance { d: self.d, gamma: conv(&self.gamma), boxes: self.boxes.iter().map(conv).collect() };
        serde_json::to_string(&raw).expect("plain data serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    d: usize,
    gamma: RawBox,
    boxes: Vec<RawBox>,
}

#[derive(Serialize, Deserialize)]
struct RawBox {
    lo: Vec<RawQ>,
    hi: Vec<RawQ>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawQ {
    Pair([i64; 2]),
    Int(i64),
}

impl RawQ {
    fn into_q(self) -> Result<Q> {
        match self {
            RawQ::Int(v) => Ok(Q::from_integer(v as i128)),
            RawQ::Pair([_, 0]) => Err(Error::Parse("zero denominator".into())),
            RawQ::Pair([n, d]) => Ok(Q::new(n as i128, d as i128)),
        }
    }
}

/// Coordinate-compression sweep over every elementary cell of the base box.
pub fn brute_coverage(inst: &CoverageInstance) -> Result<bool> {
    let d = inst.d;
    let g = &inst.gamma;
    let axes: Vec<Vec<Q>> = (0..d)
        .map(|a| {
            let mut xs: BTreeSet<Q> = [g.lo[a], g.hi[a]].into();
            for b in &inst.boxes {
                for x in [b.lo[a], b.hi[a]] {
                    if g.lo[a] < x && x < g.hi[a] {
                        xs.insert(x);
                    }
                }
            }
            xs.into_iter().collect()
        })
        .collect();
    let cells: u128 = axes.iter().map(|xs| (xs.len() - 1) as u128).product();
    if cells > MAX_GRID_CELLS {
        return Err(Error::OracleCapacity(format!("{cells} grid cells exceed {MAX_GRID_CELLS}")));
    }
    let boxes: Vec<&AxisBox> = inst.boxes.iter().filter(|b| b.overlaps(g)).collect();
    let two = Q::from_integer(2);
    let mut idx = vec![0usize; d];
    loop {
        let mid: Vec<Q> = (0..d).map(|a| (axes[a][idx[a]] + axes[a][idx[a] + 1]) / two).collect();
        if !boxes.iter().any(|b| (0..d).all(|a| b.lo[a] < mid[a] && mid[a] < b.hi[a])) {
            return Ok(false);
        }
        let mut a = 0;
        loop {
            if a == d {
                return Ok(true);
            }
            idx[a] += 1;
            if idx[a] + 1 < axes[a].len() {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// Outcome of slab simplification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Simplified {
    /// Some slab covers the whole base box.
    Covered,
    Open(CoverageInstance),
}

/// The axis `k` along which `b` is a slab of `g`, with its extent inside `g`.
fn slab_axis(b: &AxisBox, g: &AxisBox) -> Option<(usize, Q, Q)> {
    let d = b.dim();
    let short: Vec<usize> = (0..d).filter(|&a| !(b.lo[a] <= g.lo[a] && b.hi[a] >= g.hi[a])).collect();
    let k = match short.as_slice() {
        [] => 0,
        [k] => *k,
        _ => return None,
    };
    let (a1, a2) = (b.lo[k].max(g.lo[k]), b.hi[k].min(g.hi[k]));
    (a1 < a2).then_some((k, a1, a2))
}

/// Repeatedly removes slabs and contracts their extent out of every box.
pub fn simplify_slabs(ctx: &mut Ctx, inst: &CoverageInstance) -> Simplified {
    simplify_in(ctx, inst, inst.len() as u64)
}

fn simplify_in(ctx: &mut Ctx, inst: &CoverageInstance, memory_size: u64) -> Simplified {
    let n = inst.len() as f64;
    ctx.charge(0, n * n * ctx.params.qw(memory_size));
    let mut cur = inst.clone();
    let mut changed = false;
    while let Some((idx, (k, a1, a2))) =
        cur.boxes.iter().enumerate().find_map(|(i, b)| slab_axis(b, &cur.gamma).map(|s| (i, s)))
    {
        if a1 == cur.gamma.lo[k] && a2 == cur.gamma.hi[k] {
            return Simplified::Covered;
        }
        let w = a2 - a1;
        let squeeze = |x: Q| {
            if x <= a1 {
                x
            } else if x < a2 {
                a1
            } else {
                x - w
            }
        };
        cur.boxes.swap_remove(idx);
        cur.gamma.hi[k] = squeeze(cur.gamma.hi[k]);
        for b in &mut cur.boxes {
            b.lo[k] = squeeze(b.lo[k]);
            b.hi[k] = squeeze(b.hi[k]);
        }
        changed = true;
    }
    if changed {
        let g = cur.gamma.clone();
        cur.boxes.retain(|b| b.overlaps(&g));
    }
    Simplified::Open(cur)
}

/// A `(d-2)`-face orthogonal to axes `i < j` (1-based), fixed at `at`.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub box_id: usize,
    pub axes: (usize, usize),
    pub at: (Q, Q),
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightedFaceSet {
    pub faces: Vec<Face>,
}

impl WeightedFaceSet {
    pub fn total(&self) -> f64 {
        self.faces.iter().map(|f| f.weight).sum()
    }

    /// Faces orthogonal to `axis` (1-based) with their coordinate on it.
    pub fn orthogonal_to(&self, axis: usize) -> impl Iterator<Item = (Q, f64)> + '_ {
        self.faces.iter().filter_map(move |f| match f.axes {
            (i, _) if i == axis => Some((f.at.0, f.weight)),
            (_, j) if j == axis => Some((f.at.1, f.weight)),
            _ => None,
        })
    }
}

pub fn face_weight(i: usize, j: usize, h: usize, d: usize) -> f64 {
    (h as f64).powf((i + j) as f64 / d as f64)
}

/// `(d-2)`-faces per box.
pub fn faces_per_box(d: usize) -> usize {
    2 * d * d.saturating_sub(1)
}

/// Weight bound per unit of instance length.
pub fn kappa(d: usize, h: usize) -> f64 {
    (faces_per_box(d) * h * h) as f64
}

/// Faces of every box that meet the open base box.
pub fn weigh(inst: &CoverageInstance, h: usize) -> WeightedFaceSet {
    let d = inst.d;
    let g = &inst.gamma;
    let mut faces = Vec::new();
    for (id, b) in inst.boxes.iter().enumerate() {
        if !b.meets_interior(g) {
            continue;
        }
        for i in 0..d {
            for j in i + 1..d {
                for x in [b.lo[i], b.hi[i]] {
                    for y in [b.lo[j], b.hi[j]] {
                        let inside = g.lo[i] < x && x < g.hi[i] && g.lo[j] < y && y < g.hi[j];
                        if inside {
                            let weight = face_weight(i + 1, j + 1, h, d);
                            faces.push(Face { box_id: id, axes: (i + 1, j + 1), at: (x, y), weight });
                        }
                    }
                }
            }
        }
    }
    WeightedFaceSet { faces }
}

/// Cut values along `axis` (1-based) so that no slice holds more than `W/h`
/// of the face weight orthogonal to that axis.
pub fn cut_values(inst: &CoverageInstance, faces: &WeightedFaceSet, h: usize, axis: usize) -> Vec<Q> {
    let a = axis - 1;
    let mut at: BTreeMap<Q, f64> = BTreeMap::new();
    for (x, w) in faces.orthogonal_to(axis) {
        *at.entry(x).or_default() += w;
    }
    let total: f64 = at.values().sum();
    let limit = total / h as f64 * (1.0 + 1e-12);
    let mut cuts = Vec::new();
    let mut acc = 0.0;
    for (&x, &w) in &at {
        if acc + w > limit && cuts.len() + 1 < h {
            // faces on the plane lie in no slice interior
            cuts.push(x);
            acc = 0.0;
        } else {
            acc += w;
        }
    }
    let two = Q::from_integer(2);
    while cuts.len() + 1 < h {
        let mut ends = vec![inst.gamma.lo[a]];
        ends.extend(&cuts);
        ends.push(inst.gamma.hi[a]);
        let widest = (0..ends.len() - 1).max_by(|&p, &q| (ends[p + 1] - ends[p]).cmp(&(ends[q + 1] - ends[q])).then(q.cmp(&p))).unwrap();
        cuts.push((ends[widest] + ends[widest + 1]) / two);
        cuts.sort();
    }
    cuts
}

/// The `h` slices of the base box along `axis` and the boxes meeting each interior.
pub fn cut(ctx: &mut Ctx, inst: &CoverageInstance, faces: &WeightedFaceSet, h: usize, axis: usize) -> Result<Vec<CoverageInstance>> {
    if axis == 0 || axis > inst.d || h < 2 {
        return Err(Error::Contract(format!("cut needs 1 <= axis <= d and h >= 2, got axis {axis}, h {h}")));
    }
    ctx.charge(0, inst.len() as f64 * ctx.params.qw(inst.len() as u64));
    let a = axis - 1;
    let mut ends = vec![inst.gamma.lo[a]];
    ends.extend(cut_values(inst, faces, h, axis));
    ends.push(inst.gamma.hi[a]);
    Ok(ends
        .windows(2)
        .map(|w| {
            let mut gk = inst.gamma.clone();
            gk.lo[a] = w[0];
            gk.hi[a] = w[1];
            let boxes = inst.boxes.iter().filter(|b| b.meets_interior(&gk)).cloned().collect();
            CoverageInstance { d: inst.d, gamma: gk, boxes }
        })
        .collect())
}

/// Pads every child to `target` length, repeating its first box or a
/// zero-volume box at the base corner when it has none.
pub fn pad_to(children: &mut [CoverageInstance], target: usize) -> Result<()> {
    for c in children.iter_mut() {
        if c.len() > target {
            return Err(Error::WeightAccounting(format!("child of length {} exceeds target {target}", c.len())));
        }
        let filler = c
            .boxes
            .first()
            .cloned()
            .unwrap_or_else(|| AxisBox { lo: c.gamma.lo.clone(), hi: c.gamma.lo.clone() });
        c.boxes.resize(target - 1, filler);
    }
    Ok(())
}

/// Pads to the uniform length `ceil(kappa * n / h^(2/d))`.
pub fn pad_children(children: &mut [CoverageInstance], kappa: f64, n: usize, h: usize, d: usize) -> Result<usize> {
    let target = (kappa * n as f64 / (h as f64).powf(2.0 / d as f64)).ceil() as usize;
    pad_to(children, target)?;
    Ok(target)
}

struct Klee {
    h: usize,
    /// Memory of the run, used to price writes.
    memory_size: u64,
}

impl Klee {
    /// Simplify, weigh, cut along the first axis, rotate, pad.
    fn children(&self, ctx: &mut Ctx, a: &CoverageInstance, memory_size: u64) -> Result<Vec<CoverageInstance>> {
        let simple = match simplify_in(ctx, a, memory_size) {
            Simplified::Covered => {
                let done = CoverageInstance { d: a.d, gamma: a.gamma.clone(), boxes: vec![a.gamma.clone()] };
                return Ok(vec![done; self.h]);
            }
            Simplified::Open(s) => s,
        };
        let faces = weigh(&simple, self.h);
        let w = faces.total();
        let bound = kappa(a.d, self.h) * simple.len() as f64;
        if w > bound {
            ctx.audit.violations.push(format!("face weight {w} exceeds kappa * n = {bound}"));
        }
        let mut kids = cut(ctx, &simple, &faces, self.h, 1)?;
        let decay = w / (self.h as f64).powf(2.0 / a.d as f64) * (1.0 + 1e-9);
        for k in &mut kids {
            k.rotate_axes();
            let wk = weigh(k, self.h).total();
            if wk > decay {
                ctx.audit.violations.push(format!("child weight {wk} exceeds decayed parent weight {decay}"));
            }
        }
        let target = kids.iter().map(CoverageInstance::len).max().unwrap_or(1);
        pad_to(&mut kids, target)?;
        Ok(kids)
    }

    /// Deepest child depth and longest instance in the recursion tree.
    fn shape(&self, a: &CoverageInstance, depth: u32) -> Result<(u32, usize)> {
        if self.is_small(a) {
            return Ok((depth, a.len()));
        }
        let mut scratch = Ctx::default();
        let mut acc = (depth, a.len());
        for k in self.children(&mut scratch, a, a.len() as u64)? {
            let (dk, lk) = self.shape(&k, depth + 1)?;
            acc = (acc.0.max(dk), acc.1.max(lk));
        }
        Ok(acc)
    }
}

impl Constructible for Klee {
    type Inst = CoverageInstance;
    /// Whether some point of the base box is left uncovered.
    type Ans = bool;

    fn combine(&self) -> Combine {
        Combine::Or
    }
    fn len(&self, inst: &CoverageInstance) -> usize {
        inst.len()
    }
    fn h(&self, _: usize) -> usize {
        self.h
    }
    fn m(&self, _: usize) -> f64 {
        1.0
    }
    fn is_small(&self, inst: &CoverageInstance) -> bool {
        inst.boxes.len() <= 1 || inst.interior_coordinates() == 0
    }
    fn base_solve(&self, ctx: &mut Ctx, inst: &CoverageInstance) -> Result<bool> {
        let n = inst.len() as u64;
        ctx.charge(n, 0.0);
        Ok(!brute_coverage(inst)?)
    }
    fn create(&self, ctx: &mut Ctx, inst: &CoverageInstance) -> Result<Vec<CoverageInstance>> {
        self.children(ctx, inst, self.memory_size)
    }
    /// Sized from the actual recursion tree: children tags for every level
    /// plus room for the longest instance.
    fn memory_size(&self, inst: &CoverageInstance) -> Result<u64> {
        let (depth, longest) = self.shape(inst, 0)?;
        let width = usize::BITS - self.h.leading_zeros();
        let bits = depth * width + (longest.next_power_of_two().trailing_zeros()).max(1);
        if bits > 62 {
            return Err(Error::ValueRange(format!("memory of 2^{bits} cells")));
        }
        Ok(1u64 << bits)
    }
}

/// Default branching `2^d`.
pub fn default_h(d: usize) -> usize {
    1 << d
}

/// Whether the boxes cover the base box, by the recursive solver.
pub fn klee_coverage(ctx: &mut Ctx, inst: &CoverageInstance, h: usize) -> Result<bool> {
    if inst.d < 2 {
        return Err(Error::Contract("dimension must be at least 2".into()));
    }
    if h < 2 {
        return Err(Error::Contract(format!("branching {h} must be at least 2")));
    }
    let memory_size = Klee { h, memory_size: 1 }.memory_size(inst)?;
    Ok(!run_constructible_in(ctx, &Klee { h, memory_size }, inst, memory_size)?)
}

/// Time exponent predicted by the recurrence `T(n) = sqrt(h) T(n/m) + ...`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentReport {
    pub d: usize,
    pub h: usize,
    pub kappa: f64,
    /// `h^(2/d) / kappa`; the recursion only shrinks when this exceeds 1.
    pub m: f64,
    /// `log sqrt(h) / log m` when `m > 1`.
    pub exponent: Option<f64>,
    /// The same ratio with `kappa` dropped, equal to `d/4`.
    pub ideal: f64,
}

pub fn exponent_report(d: usize, h: usize) -> ExponentReport {
    let hf = h as f64;
    let k = kappa(d, h);
    let m = hf.powf(2.0 / d as f64) / k;
    let exponent = (m > 1.0).then(|| 0.5 * hf.ln() / m.ln());
    ExponentReport { d, h, kappa: k, m, exponent, ideal: 0.5 * hf.ln() / (2.0 / d as f64 * hf.ln()) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bx(lo: &[i64], hi: &[i64]) -> AxisBox {
        AxisBox::from_ints(lo, hi).unwrap()
    }

    fn unit(d: usize, side: i64) -> AxisBox {
        bx(&vec![0; d], &vec![side; d])
    }

    #[test]
    fn trivial_instances() {
        let g = unit(3, 4);
        let mut c = Ctx::default();
        let empty = CoverageInstance::new(g.clone(), vec![]).unwrap();
        assert!(!klee_coverage(&mut c, &empty, 8).unwrap());
        let full = CoverageInstance::new(g.clone(), vec![g.clone()]).unwrap();
        assert!(klee_coverage(&mut c, &full, 8).unwrap());
        assert_eq!(simplify_slabs(&mut c, &full), Simplified::Covered);
        assert!(CoverageInstance::new(bx(&[0, 0], &[0, 1]), vec![]).is_err());
    }

    #[test]
    fn brute_hand_cases() {
        let g = unit(2, 2);
        let halves = CoverageInstance::new(g.clone(), vec![bx(&[0, 0], &[1, 2]), bx(&[1, 0], &[2, 2])]).unwrap();
        assert!(brute_coverage(&halves).unwrap());
        let corner = vec![bx(&[0, 0], &[2, 1]), bx(&[0, 1], &[1, 2])];
        assert!(!brute_coverage(&CoverageInstance::new(g, corner).unwrap()).unwrap());
    }

    #[test]
    fn slab_contracts_and_preserves() {
        let g = unit(2, 4);
        let inst = CoverageInstance::new(g, vec![bx(&[1, -1], &[2, 5]), bx(&[0, 0], &[3, 3]), bx(&[2, 2], &[4, 4])]).unwrap();
        let Simplified::Open(s) = simplify_slabs(&mut Ctx::default(), &inst) else { panic!("not covered") };
        assert_eq!(s.gamma.hi[0], Q::from_integer(3));
        assert_eq!(s.boxes.len(), 2);
        assert_eq!(brute_coverage(&s).unwrap(), brute_coverage(&inst).unwrap());
        let plain = CoverageInstance::new(unit(2, 4), vec![bx(&[1, 1], &[2, 2])]).unwrap();
        assert_eq!(simplify_slabs(&mut Ctx::default(), &plain), Simplified::Open(plain.clone()));
    }

    #[test]
    fn face_weights() {
        assert!((face_weight(1, 2, 4, 4) - 2f64.powf(1.5)).abs() < 1e-12);
        let inside = CoverageInstance::new(unit(3, 4), vec![bx(&[1, 1, 1], &[2, 2, 2])]).unwrap();
        assert_eq!(weigh(&inside, 8).faces.len(), 12);
        let away = CoverageInstance::new(unit(3, 4), vec![bx(&[5, 5, 5], &[6, 6, 6])]).unwrap();
        assert!(weigh(&away, 8).faces.is_empty());
    }

    #[test]
    fn balanced_two_way_cut() {
        let g = unit(2, 4);
        let q = |n, d| Q::new(n, d);
        let b1 = AxisBox::new(vec![q(1, 1), q(1, 1)], vec![q(3, 1), q(2, 1)]).unwrap();
        let inst = CoverageInstance::new(g, vec![b1]).unwrap();
        let faces = weigh(&inst, 2);
        let w = faces.total();
        let kids = cut(&mut Ctx::default(), &inst, &faces, 2, 1).unwrap();
        let v = kids[0].gamma.hi[0];
        assert!(q(1, 1) <= v && v <= q(3, 1));
        for k in &kids {
            assert!(weigh(k, 2).orthogonal_to(1).map(|x| x.1).sum::<f64>() <= w / 2.0 + 1e-9);
        }
        let none = CoverageInstance::new(unit(2, 4), vec![]).unwrap();
        let kids = cut(&mut Ctx::default(), &none, &WeightedFaceSet::default(), 4, 1).unwrap();
        assert!(kids.iter().all(|k| k.gamma.volume() == Q::from_integer(4)));
    }

    #[test]
    fn padding() {
        let g = unit(2, 4);
        let mut kids = vec![
            CoverageInstance::new(g.clone(), vec![bx(&[0, 0], &[1, 4]), bx(&[1, 0], &[4, 2])]).unwrap(),
            CoverageInstance::new(g.clone(), vec![]).unwrap(),
        ];
        let before = brute_coverage(&kids[0]).unwrap();
        pad_to(&mut kids, 6).unwrap();
        assert!(kids.iter().all(|k| k.len() == 6));
        assert_eq!(brute_coverage(&kids[0]).unwrap(), before);
        assert!(!brute_coverage(&kids[1]).unwrap());
        assert!(matches!(pad_to(&mut kids, 3), Err(Error::WeightAccounting(_))));
    }

    #[test]
    fn json_roundtrip() {
        let text = r#"{"d":2,"gamma":{"lo":[[0,1],[0,1]],"hi":[[1,1],[1,1]]},"boxes":[{"lo":[[0,1],[0,1]],"hi":[[1,2],[1,1]]}]}"#;
        let inst = CoverageInstance::from_json(text).unwrap();
        assert_eq!(inst.boxes[0].hi[0], Q::new(1, 2));
        assert_eq!(CoverageInstance::from_json(&inst.to_json()).unwrap(), inst);
    }

    #[test]
    fn exponent_at_d8() {
        let r = exponent_report(8, 256);
        assert!((r.ideal - 2.0).abs() < 1e-12);
        assert!(r.m < 1.0 && r.exponent.is_none());
    }

    pub(crate) fn random_instance(d: usize, n: usize) -> impl Strategy<Value = CoverageInstance> {
        let side = 8i64;
        let corner = prop::collection::vec((0..=side, 0..=side), d);
        prop::collection::vec(corner, n).prop_map(move |bs| {
            let boxes = bs
                .into_iter()
                .map(|c| {
                    let lo: Vec<i64> = c.iter().map(|&(a, b)| a.min(b) - 1).collect();
                    let hi: Vec<i64> = c.iter().map(|&(a, b)| a.max(b) + 1).collect();
                    AxisBox::from_ints(&lo, &hi).unwrap()
                })
                .collect();
            CoverageInstance::new(AxisBox::from_ints(&vec![0; d], &vec![side; d]).unwrap(), boxes).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn simplify_preserves(inst in (2usize..5).prop_flat_map(|d| random_instance(d, 10))) {
            let before = brute_coverage(&inst).unwrap();
            match simplify_slabs(&mut Ctx::default(), &inst) {
                Simplified::Covered => prop_assert!(before),
                Simplified::Open(s) => prop_assert_eq!(brute_coverage(&s).unwrap(), before),
            }
        }

        #[test]
        fn klee_matches_brute_3d(inst in random_instance(3, 15)) {
            let mut c = Ctx::default();
            prop_assert_eq!(klee_coverage(&mut c, &inst, 8).unwrap(), brute_coverage(&inst).unwrap());
            prop_assert!(c.audit.violations.is_empty(), "{:?}", c.audit.violations);
        }
    }
}
