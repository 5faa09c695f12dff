//! Generic divide-and-conquer drivers: the bottom-up drivers over crossing
//! blocks, and the recursive drivers for constructible and decomposable
//! instances.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::costmodel::{loglog, memory_size_constructible, CostLedger};
use crate::error::{Error, Result};
use crate::oracle::Ctx;
use crate::qprimitives::{
    charge_grover, measure, noisy_best_select, q_max_erroneous, q_min_erroneous, q_search_erroneous,
    selector_two, Goal, Strategy,
};

/// `(b_1, e_1, ..., b_t, e_t)` naming the concatenation of `t` input substrings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TDescription {
    bounds: Vec<usize>,
}

impl TDescription {
    /// Checks `1 <= b_1 <= e_1 < b_2 <= ... <= e_t`.
    pub fn new(bounds: Vec<usize>) -> Result<Self> {
        if bounds.is_empty() || !bounds.len().is_multiple_of(2) {
            return Err(Error::Description(format!("need an even, nonzero number of bounds, got {bounds:?}")));
        }
        if bounds[0] < 1 {
            return Err(Error::Description(format!("bounds start below 1: {bounds:?}")));
        }
        for w in bounds.chunks(2) {
            if w[0] > w[1] {
                return Err(Error::Description(format!("empty segment in {bounds:?}")));
            }
        }
        for i in (1..bounds.len() - 1).step_by(2) {
            if bounds[i] >= bounds[i + 1] {
                return Err(Error::Description(format!("segments overlap or are unordered in {bounds:?}")));
            }
        }
        Ok(TDescription { bounds })
    }

    pub fn whole(n: usize) -> Self {
        TDescription { bounds: vec![1, n] }
    }

    /// Checks the description against an input of length `n_star`.
    pub fn validate(&self, n_star: usize) -> Result<()> {
        if *self.bounds.last().unwrap() > n_star {
            return Err(Error::Description(format!("{self} exceeds input length {n_star}")));
        }
        Ok(())
    }

    pub fn t(&self) -> usize {
        self.bounds.len() / 2
    }

    pub fn bounds(&self) -> &[usize] {
        &self.bounds
    }

    /// 1-based component access, `get(1) = b_1`.
    pub fn get(&self, i: usize) -> usize {
        self.bounds[i - 1]
    }

    pub fn size(&self) -> usize {
        self.bounds.chunks(2).map(|w| w[1] - w[0] + 1).sum()
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.bounds.chunks(2).flat_map(|w| w[0]..=w[1])
    }

    /// Rank (0-based) of position `p` in the concatenation.
    pub fn rank_of(&self, p: usize) -> Option<usize> {
        let mut off = 0;
        for w in self.bounds.chunks(2) {
            if (w[0]..=w[1]).contains(&p) {
                return Some(off + p - w[0]);
            }
            off += w[1] - w[0] + 1;
        }
        None
    }

    /// Position at rank `r` of the concatenation. Panics past the end.
    pub fn pos_at(&self, mut r: usize) -> usize {
        for w in self.bounds.chunks(2) {
            let len = w[1] - w[0] + 1;
            if r < len {
                return w[0] + r;
            }
            r -= len;
        }
        panic!("rank past description end")
    }
}

impl fmt::Display for TDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, b) in self.bounds.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, ")")
    }
}

/// Block `C_{n,t,k} = {(k-1)n/2^t + 1, ..., kn/2^t}` as an inclusive range.
pub fn block(n: usize, t: u32, k: usize) -> (usize, usize) {
    let len = n >> t;
    ((k - 1) * len + 1, k * len)
}

/// Left and right halves of `C_{n,t,k}`.
pub fn halves(n: usize, t: u32, k: usize) -> ((usize, usize), (usize, usize)) {
    (block(n, t + 1, 2 * k - 1), block(n, t + 1, 2 * k))
}

/// `log2 n` for a power of two `n >= 2`.
pub fn levels(n: usize) -> Result<u32> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::PaddingRequired(n));
    }
    Ok(n.trailing_zeros())
}

/// `ceil(32 loglog n)` majority repetitions per level.
pub fn majority_reps(n: usize) -> u64 {
    (32.0 * loglog(n as f64)).ceil() as u64
}

/// Result of a bottom-up driver: the best crossing value and its `(t, k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BottomUp<V> {
    pub value: V,
    pub t: u32,
    pub k: usize,
}

fn better<V: Ord>(goal: Goal, a: &V, b: &V) -> bool {
    match goal {
        Goal::Max => a > b,
        Goal::Min => a < b,
    }
}

fn argbest<V: Ord>(goal: Goal, vals: &[V]) -> usize {
    let mut best = 0;
    for i in 1..vals.len() {
        if better(goal, &vals[i], &vals[best]) {
            best = i;
        }
    }
    best
}

/// Per level, selects the best block with `ceil(32 loglog n)` majority
/// repetitions, then takes the best level. Ties: smallest `t`, then `k`.
pub fn bottom_up<V: Ord + Clone>(
    ctx: &mut Ctx,
    n: usize,
    goal: Goal,
    mut solve: impl FnMut(&mut Ctx, u32, usize) -> Result<V>,
) -> Result<BottomUp<V>> {
    let lv = levels(n)?;
    let reps = majority_reps(n);
    let mut best: Option<BottomUp<V>> = None;
    for t in 0..lv {
        let m = measure(ctx, 1 << t, |c, k| solve(c, t, k))?;
        let alpha = ctx.params.alpha;
        let one = {
            let before = ctx.ledger;
            charge_grover(ctx, alpha, &m);
            ctx.ledger - before
        };
        ctx.ledger += CostLedger::new(one.queries * (reps - 1), one.time_units * (reps - 1) as f64);
        let exact = argbest(goal, &m.values);
        let k0 = if ctx.err.active() {
            let vals = &m.values;
            let pref = |x: usize, y: usize| better(goal, &vals[x], &vals[y]) || (vals[x] == vals[y] && x < y);
            let mut counts = vec![0u32; vals.len()];
            for _ in 0..reps {
                counts[noisy_best_select(ctx, vals.len(), exact, &pref)] += 1;
            }
            let top = *counts.iter().max().unwrap();
            counts.iter().position(|&c| c == top).unwrap()
        } else {
            exact
        };
        // recompute the value at the selected block
        ctx.ledger += m.costs[k0];
        let cand = BottomUp { value: m.values[k0].clone(), t, k: k0 + 1 };
        best = match best {
            Some(b) if !better(goal, &cand.value, &b.value) => Some(b),
            _ => Some(cand),
        };
    }
    Ok(best.expect("at least one level"))
}

/// Variant for crossing solvers of cost about `sqrt(n/2^t)`: each level runs
/// an amplified selection over its blocks and the levels are combined with
/// [`selector_two`].
pub fn bottom_up_rootn<V: Ord + Clone>(
    ctx: &mut Ctx,
    n: usize,
    goal: Goal,
    memory_size: u64,
    mut solve: impl FnMut(&mut Ctx, u32, usize) -> Result<V>,
) -> Result<(BottomUp<V>, Strategy)> {
    let lv = levels(n)?;
    let mut ks = vec![0usize; lv as usize];
    let (ti, value, strat) = selector_two(ctx, lv as usize, goal, memory_size, |c, ti| {
        let t = (ti - 1) as u32;
        let (k, v) = match goal {
            Goal::Max => q_max_erroneous(c, 1 << t, |c2, k| solve(c2, t, k))?,
            Goal::Min => q_min_erroneous(c, 1 << t, |c2, k| solve(c2, t, k))?,
        };
        ks[ti - 1] = k;
        Ok(v)
    })?;
    Ok((BottomUp { value, t: (ti - 1) as u32, k: ks[ti - 1] }, strat))
}

/// How child answers are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combine {
    Or,
    Min,
    Max,
}

/// Answers of the recursive drivers. `truthy` is the marking used by `Or`.
pub trait Answer: Ord + Clone + fmt::Debug {
    fn truthy(&self) -> bool;
}

impl Answer for bool {
    fn truthy(&self) -> bool {
        *self
    }
}

impl Answer for i64 {
    fn truthy(&self) -> bool {
        *self != 0
    }
}

impl Answer for crate::ext::Ext {
    fn truthy(&self) -> bool {
        *self != crate::ext::Ext::Fin(0)
    }
}

/// Selects among `h` evaluations with the amplified primitive for `combine`.
/// For `Or` without a marked child the first child's answer is returned.
fn select_children<A: Answer>(
    ctx: &mut Ctx,
    combine: Combine,
    h: usize,
    mut eval: impl FnMut(&mut Ctx, usize) -> Result<A>,
) -> Result<A> {
    match combine {
        Combine::Min => Ok(q_min_erroneous(ctx, h, eval)?.1),
        Combine::Max => Ok(q_max_erroneous(ctx, h, eval)?.1),
        Combine::Or => {
            let mut vals: Vec<Option<A>> = vec![None; h];
            let hit = q_search_erroneous(ctx, h, |c, j| {
                let v = eval(c, j)?;
                let mark = v.truthy();
                vals[j - 1] = Some(v);
                Ok(mark)
            })?;
            let pick = hit.unwrap_or(1);
            Ok(vals[pick - 1].take().expect("evaluated"))
        }
    }
}

fn selection_coef(ctx: &Ctx, combine: Combine) -> f64 {
    match combine {
        Combine::Or => ctx.params.c_search,
        Combine::Min | Combine::Max => ctx.params.alpha,
    }
}

fn bit_len(x: usize) -> u32 {
    usize::BITS - x.leading_zeros()
}

/// A problem whose children are written out explicitly by the create step.
pub trait Constructible {
    type Inst: Clone;
    type Ans: Answer;

    fn combine(&self) -> Combine;
    fn len(&self, inst: &Self::Inst) -> usize;
    fn h(&self, n: usize) -> usize;
    /// Shrink factor used by the default memory plan.
    fn m(&self, n: usize) -> f64;
    fn is_small(&self, inst: &Self::Inst) -> bool;
    fn base_solve(&self, ctx: &mut Ctx, inst: &Self::Inst) -> Result<Self::Ans>;
    /// The `h(n)` children, charging the create cost `S(n)`.
    fn create(&self, ctx: &mut Ctx, inst: &Self::Inst) -> Result<Vec<Self::Inst>>;
    fn completion(&self, _ctx: &mut Ctx, _inst: &Self::Inst, _j: usize, child: Self::Ans) -> Result<Self::Ans> {
        Ok(child)
    }
    /// Memory size `N(n*)`.
    fn memory_size(&self, inst: &Self::Inst) -> Result<u64> {
        let n = self.len(inst) as u64;
        let small_len = |k: u64| k <= 1 || self.m(k as usize) <= 1.0;
        let plan = memory_size_constructible(
            n,
            &|k| self.h(k as usize) as u64,
            &|k| self.m(k as usize),
            &|k| small_len(k),
            n.max(1).next_power_of_two(),
        );
        Ok(plan?.total)
    }
}

/// Memory section `M_u`: prefix `u` of `bits` bits inside a memory of `2^total_bits` cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Section {
    pub prefix: u64,
    pub bits: u32,
    pub total_bits: u32,
}

impl Section {
    pub fn root(memory_size: u64) -> Self {
        Section { prefix: 0, bits: 0, total_bits: memory_size.next_power_of_two().trailing_zeros() }
    }

    pub fn size_bits(&self) -> u32 {
        self.total_bits - self.bits
    }

    /// First address of the section.
    pub fn base(&self) -> u64 {
        if self.bits == 0 {
            0
        } else {
            self.prefix << self.size_bits()
        }
    }

    /// Section `M_{u v_j}` with `v_j` written on `width` bits.
    pub fn child(&self, j: usize, width: u32) -> Result<Section> {
        if self.size_bits() < width {
            return Err(Error::ProblemDefinition(format!(
                "memory section of 2^{} cells cannot hold children tagged with {width} bits",
                self.size_bits()
            )));
        }
        Ok(Section { prefix: (self.prefix << width) | j as u64, bits: self.bits + width, total_bits: self.total_bits })
    }
}

/// Runs the constructible-instance recursion on `input`, placing it at the
/// start of a memory of `problem.memory_size(input)` cells.
pub fn run_constructible<P: Constructible>(ctx: &mut Ctx, problem: &P, input: &P::Inst) -> Result<P::Ans> {
    let memory_size = problem.memory_size(input)?;
    run_constructible_in(ctx, problem, input, memory_size)
}

/// As [`run_constructible`] with an explicit memory size.
pub fn run_constructible_in<P: Constructible>(
    ctx: &mut Ctx,
    problem: &P,
    input: &P::Inst,
    memory_size: u64,
) -> Result<P::Ans> {
    let root = Section::root(memory_size);
    if (problem.len(input) as u64) > memory_size {
        return Err(Error::ProblemDefinition(format!("input of length {} exceeds memory {memory_size}", problem.len(input))));
    }
    constructible_node(ctx, problem, input, root, memory_size, 0)
}

fn constructible_node<P: Constructible>(
    ctx: &mut Ctx,
    problem: &P,
    inst: &P::Inst,
    sec: Section,
    memory_size: u64,
    depth: u32,
) -> Result<P::Ans> {
    ctx.audit.nodes += 1;
    ctx.audit.max_depth = ctx.audit.max_depth.max(depth);
    let qw = ctx.params.qw(memory_size);
    let logn = (memory_size as f64).log2().max(1.0);
    if problem.is_small(inst) {
        ctx.charge(0, logn + qw);
        return problem.base_solve(ctx, inst);
    }
    let n = problem.len(inst);
    let h = problem.h(n);
    let children = problem.create(ctx, inst)?;
    if children.len() != h {
        return Err(Error::ProblemDefinition(format!("create produced {} children, expected h = {h}", children.len())));
    }
    let width = bit_len(h);
    let len0 = problem.len(&children[0]);
    let mut sections = Vec::with_capacity(h);
    for (j, child) in children.iter().enumerate() {
        let len = problem.len(child);
        if len != len0 {
            return Err(Error::ProblemDefinition(format!("constitutive strings differ in length: {len} vs {len0}")));
        }
        let cs = sec.child(j + 1, width)?;
        if (len as u64) > (1u64 << cs.size_bits()) || (n as u64) > (1u64 << cs.size_bits()) {
            return Err(Error::ProblemDefinition(format!(
                "length {len} does not fit memory section of 2^{} cells",
                cs.size_bits()
            )));
        }
        sections.push(cs);
    }
    // write each child at the beginning of its section
    let cells = (h * len0) as u64;
    ctx.charge(cells, cells as f64 * qw);

    let combine = problem.combine();
    let coef = selection_coef(ctx, combine);
    let mut t_eval_max = 0.0f64;
    let before_select = ctx.ledger;
    let ans = select_children(ctx, combine, h, |c, j| {
        let b = c.ledger;
        let v = constructible_node(c, problem, &children[j - 1], sections[j - 1], memory_size, depth + 1)?;
        let v = problem.completion(c, inst, j, v)?;
        t_eval_max = t_eval_max.max((c.ledger - b).time_units);
        Ok(v)
    })?;
    let select_cost = ctx.ledger - before_select;
    let bound = ((coef + 1.0) * (h as f64).sqrt()).ceil() * (t_eval_max + (h as f64).log2().max(1.0));
    if select_cost.time_units > bound + 1e-6 {
        ctx.audit.violations.push(format!(
            "constructible node n={n}: selection time {} exceeds {bound}",
            select_cost.time_units
        ));
    }
    Ok(ans)
}

/// Node-local result of [`Decomposable::prepare`].
pub enum Prep<S, A> {
    /// The node is answered without recursion.
    Done(A),
    Node(S),
}

/// Child `j` of a decomposable node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Child<I, A> {
    Recurse(I),
    /// No constitutive string; the completion receives `None`.
    Empty,
    /// A child answered directly by the create step.
    Direct(A),
}

/// A problem whose children are concatenations of input substrings, named by
/// t-descriptions.
pub trait Decomposable {
    type Inst: Clone;
    type State;
    type Ans: Answer;

    fn combine(&self) -> Combine;
    fn desc<'a>(&self, inst: &'a Self::Inst) -> &'a TDescription;
    fn h(&self, n: usize) -> usize;
    fn is_small(&self, inst: &Self::Inst) -> bool;
    fn base_solve(&self, ctx: &mut Ctx, inst: &Self::Inst) -> Result<Self::Ans>;
    /// Node-local precomputation shared by all children.
    fn prepare(&self, ctx: &mut Ctx, inst: &Self::Inst) -> Result<Prep<Self::State, Self::Ans>>;
    fn delta(
        &self,
        ctx: &mut Ctx,
        inst: &Self::Inst,
        state: &Self::State,
        j: usize,
    ) -> Result<Child<Self::Inst, Self::Ans>>;
    fn gamma(
        &self,
        ctx: &mut Ctx,
        inst: &Self::Inst,
        state: &Self::State,
        j: usize,
        child: Option<Self::Ans>,
    ) -> Result<Self::Ans>;
}

/// Runs the decomposable-instance recursion from `inst` over an input of
/// length `n_star` held in a memory of `memory_size` cells.
pub fn run_decomposable<P: Decomposable>(
    ctx: &mut Ctx,
    problem: &P,
    inst: &P::Inst,
    n_star: usize,
    memory_size: u64,
) -> Result<P::Ans> {
    problem.desc(inst).validate(n_star)?;
    decomposable_node(ctx, problem, inst, n_star, memory_size, 0)
}

fn decomposable_node<P: Decomposable>(
    ctx: &mut Ctx,
    problem: &P,
    inst: &P::Inst,
    n_star: usize,
    memory_size: u64,
    depth: u32,
) -> Result<P::Ans> {
    ctx.audit.nodes += 1;
    ctx.audit.max_depth = ctx.audit.max_depth.max(depth);
    if problem.is_small(inst) {
        let t = (n_star as f64).log2().max(1.0) + ctx.params.qr(memory_size);
        ctx.charge(0, t);
        return problem.base_solve(ctx, inst);
    }
    let n = problem.desc(inst).size();
    let start = ctx.ledger;
    let state = match problem.prepare(ctx, inst)? {
        Prep::Done(a) => return Ok(a),
        Prep::Node(s) => s,
    };
    let h = problem.h(n);
    let mut children = Vec::with_capacity(h);
    for j in 1..=h {
        let child = problem.delta(ctx, inst, &state, j)?;
        if let Child::Recurse(ci) = &child {
            let d = problem.desc(ci);
            d.validate(n_star).map_err(|e| Error::ProblemDefinition(format!("child {j} of {}: {e}", problem.desc(inst))))?;
            if d.size() >= n {
                return Err(Error::ProblemDefinition(format!(
                    "child {j} description {d} of size {} does not shrink {n}",
                    d.size()
                )));
            }
        }
        children.push(child);
    }
    let local = ctx.ledger - start;

    let combine = problem.combine();
    let coef = selection_coef(ctx, combine);
    let mut q_eval_max = 0u64;
    let ans = select_children(ctx, combine, h, |c, j| {
        let b = c.ledger;
        let sub = match &children[j - 1] {
            Child::Recurse(ci) => Some(decomposable_node(c, problem, ci, n_star, memory_size, depth + 1)?),
            Child::Empty => None,
            Child::Direct(a) => Some(a.clone()),
        };
        let v = problem.gamma(c, inst, &state, j, sub)?;
        q_eval_max = q_eval_max.max((c.ledger - b).queries);
        Ok(v)
    })?;
    let bound = ((coef + 1.0) * (h as f64).sqrt()).ceil() * q_eval_max.max(1) as f64 + local.queries as f64;
    let total = (ctx.ledger - start).queries as f64;
    if total > bound {
        ctx.audit.violations.push(format!("decomposable node {}: {total} queries exceed {bound}", problem.desc(inst)));
    }
    Ok(ans)
}
