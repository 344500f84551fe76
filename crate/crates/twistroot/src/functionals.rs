//! Rational functionals on the weight space, the sign decompositions they
//! induce, parabolic subsets, and the three-stage induction pipeline.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cylsets::{CylinderSet, CylinderSetJson, ZSet};
use crate::rootspace::{q, qf, qser, Dot, RootSystem, Weight, Q};
use crate::shadow::{self, build_t, hybrid_direction, verify_main_i, Direction, ShadowAssignment};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FuncError {
    #[error("dimension mismatch")]
    Dimension,
    #[error("not a finite root system: {0}")]
    NotRootSystem(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("stage {stage} failed: {message}")]
    Stage { stage: String, message: String },
}

fn stage_err(stage: &str, message: impl Into<String>) -> FuncError {
    FuncError::Stage { stage: stage.into(), message: message.into() }
}

/// Linear functional given by its values on `ε_i`, `δ_p` and `δ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Functional {
    #[serde(with = "qser::vec")]
    pub eps: Vec<Q>,
    #[serde(with = "qser::vec")]
    pub del: Vec<Q>,
    #[serde(with = "qser")]
    pub delta: Q,
}

impl Functional {
    pub fn zero(m: usize, n: usize) -> Self {
        Functional { eps: vec![Q::zero(); m], del: vec![Q::zero(); n], delta: Q::zero() }
    }

    pub fn from_ints(eps: &[i64], del: &[i64], delta: i64) -> Self {
        Functional { eps: eps.iter().map(|&x| q(x)).collect(), del: del.iter().map(|&x| q(x)).collect(), delta: q(delta) }
    }

    /// Values in variable order `ε_1..ε_m, δ_1..δ_n, δ`.
    pub fn from_vec(m: usize, v: &[Q]) -> Self {
        Functional { eps: v[..m].to_vec(), del: v[m..v.len() - 1].to_vec(), delta: v[v.len() - 1].clone() }
    }

    pub fn to_vec(&self) -> Vec<Q> {
        self.eps.iter().chain(&self.del).chain([&self.delta]).cloned().collect()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.eps.len(), self.del.len())
    }

    pub fn eval_dot(&self, d: &Dot, k: i64) -> Q {
        let mut acc = &self.delta * q(k);
        for (c, x) in self.eps.iter().chain(&self.del).zip(&d.0) {
            acc += c * q(*x);
        }
        acc
    }

    pub fn eval(&self, w: &Weight) -> Result<Q, FuncError> {
        if w.dims() != self.dims() {
            return Err(FuncError::Dimension);
        }
        let mut acc = &self.delta * &w.delta;
        for (c, x) in self.eps.iter().chain(&self.del).zip(w.eps.iter().chain(&w.del)) {
            acc += c * x;
        }
        Ok(acc)
    }

    pub fn is_zero(&self) -> bool {
        self.to_vec().iter().all(Zero::is_zero)
    }
}

/// `{k : a + k·b > 0}`, `{… = 0}`, `{… < 0}`.
pub fn sign_zsets(a: &Q, b: &Q) -> (ZSet, ZSet, ZSet) {
    if b.is_zero() {
        let whole = |c: bool| if c { ZSet::all() } else { ZSet::empty() };
        return (whole(a.is_positive()), whole(a.is_zero()), whole(a.is_negative()));
    }
    let x = -(a / b);
    let above = ZSet::at_least(x.floor().to_integer().to_i64().expect("small") + 1);
    let below = ZSet::at_most(x.ceil().to_integer().to_i64().expect("small") - 1);
    let zero = if x.is_integer() { ZSet::point(x.to_integer().to_i64().expect("small")) } else { ZSet::empty() };
    if b.is_positive() {
        (above, zero, below)
    } else {
        (below, zero, above)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriDecomp {
    pub plus: CylinderSet,
    pub zero: CylinderSet,
    pub minus: CylinderSet,
}

pub fn tri_decompose(s: &CylinderSet, z: &Functional) -> TriDecomp {
    let rs = s.rs();
    let mut plus = Vec::new();
    let mut zero = Vec::new();
    let mut minus = Vec::new();
    for (d, set) in s.components() {
        if let Some(ks) = set.finite_members() {
            let by_sign = |keep: fn(&Q) -> bool| {
                let v: Vec<i64> = ks.iter().copied().filter(|&k| keep(&z.eval_dot(d, k))).collect();
                (d.clone(), ZSet::points(&v))
            };
            plus.push(by_sign(|x| x.is_positive()));
            zero.push(by_sign(|x| x.is_zero()));
            minus.push(by_sign(|x| x.is_negative()));
            continue;
        }
        let (p, o, n) = sign_zsets(&z.eval_dot(d, 0), &z.delta);
        plus.push((d.clone(), p.intersect(set)));
        zero.push((d.clone(), o.intersect(set)));
        minus.push((d.clone(), n.intersect(set)));
    }
    TriDecomp {
        plus: CylinderSet::from_components(rs, plus),
        zero: CylinderSet::from_components(rs, zero),
        minus: CylinderSet::from_components(rs, minus),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParabolicSet {
    pub p: CylinderSet,
    pub levi: CylinderSet,
    pub nilpart: CylinderSet,
}

impl ParabolicSet {
    /// `(Φ = P∪−P, (P+P)∩Φ ⊆ P)` for `Φ = R`.
    pub fn axioms(&self) -> (bool, bool) {
        let phi = CylinderSet::full(self.p.rs());
        let cover = self.p.union(&self.p.negate()).expect("same root system") == phi;
        let closed = self.p.minkowski(&self.p).expect("same root system").is_subset(&self.p);
        (cover, closed)
    }
}

/// `P_{λ,μ} = {λ>0} ∪ {λ=0, μ≥0}`, with `P_λ = {λ≥0}` when `μ` is absent.
pub fn parabolic(rs: &RootSystem, lam: &Functional, mu: Option<&Functional>) -> Result<ParabolicSet, FuncError> {
    let dims = (rs.m(), rs.n());
    if lam.dims() != dims || mu.is_some_and(|m| m.dims() != dims) {
        return Err(FuncError::Dimension);
    }
    let full = CylinderSet::full(rs);
    let l = tri_decompose(&full, lam);
    let p = match mu {
        None => l.plus.union(&l.zero),
        Some(mu) => {
            let inner = tri_decompose(&l.zero, mu);
            l.plus.union(&inner.plus).and_then(|x| x.union(&inner.zero))
        }
    }
    .expect("same root system");
    let neg = p.negate();
    let levi = p.intersect(&neg).expect("same root system");
    let nilpart = p.difference(&neg).expect("same root system");
    Ok(ParabolicSet { p, levi, nilpart })
}

/// Exact Fourier–Motzkin elimination with strict inequalities.
pub mod fm {
    use super::*;

    /// `Σ coeffs[i]·x_i + constant > 0` (strict) or `≥ 0`.
    #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
    pub struct Ineq {
        pub coeffs: Vec<Q>,
        pub constant: Q,
        pub strict: bool,
    }

    impl Ineq {
        pub fn new(coeffs: Vec<Q>, constant: Q, strict: bool) -> Self {
            Ineq { coeffs, constant, strict }
        }

        fn holds(&self, x: &[Q]) -> bool {
            let v: Q = self.coeffs.iter().zip(x).map(|(c, v)| c * v).sum::<Q>() + &self.constant;
            if self.strict {
                v.is_positive()
            } else {
                !v.is_negative()
            }
        }
    }

    enum Reduced {
        Keep(Ineq),
        Trivial,
        Infeasible,
    }

    fn normalize(mut c: Ineq) -> Reduced {
        let lead = c.coeffs.iter().find(|x| !x.is_zero()).map(|x| x.abs());
        match lead {
            None => {
                let ok = if c.strict { c.constant.is_positive() } else { !c.constant.is_negative() };
                if ok {
                    Reduced::Trivial
                } else {
                    Reduced::Infeasible
                }
            }
            Some(l) => {
                for x in c.coeffs.iter_mut() {
                    *x = &*x / &l;
                }
                c.constant = &c.constant / &l;
                Reduced::Keep(c)
            }
        }
    }

    /// Keeps, per direction, only the tightest constraint.
    fn simplify(sys: Vec<Ineq>) -> Option<Vec<Ineq>> {
        let mut best: BTreeMap<Vec<Q>, (Q, bool)> = BTreeMap::new();
        for c in sys {
            match normalize(c) {
                Reduced::Trivial => {}
                Reduced::Infeasible => return None,
                Reduced::Keep(c) => {
                    let e = best.entry(c.coeffs).or_insert((c.constant.clone(), c.strict));
                    if c.constant < e.0 || (c.constant == e.0 && c.strict) {
                        *e = (c.constant, c.strict);
                    }
                }
            }
        }
        Some(best.into_iter().map(|(coeffs, (constant, strict))| Ineq { coeffs, constant, strict }).collect())
    }

    /// Feasible point of the system, eliminating variables in `order` and
    /// back-substituting in reverse. Each variable takes 0 if allowed, else
    /// the admissible integer nearest 0, else the midpoint of its interval.
    pub fn solve(sys: &[Ineq], nvars: usize, order: &[usize]) -> Option<Vec<Q>> {
        let mut stages = Vec::with_capacity(order.len());
        let mut cur = simplify(sys.to_vec())?;
        for &v in order {
            stages.push(cur.clone());
            let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
            for c in cur {
                if c.coeffs[v].is_positive() {
                    pos.push(c);
                } else if c.coeffs[v].is_negative() {
                    neg.push(c);
                } else {
                    rest.push(c);
                }
            }
            for p in &pos {
                for n in &neg {
                    let (a, b) = (p.coeffs[v].clone(), -n.coeffs[v].clone());
                    let coeffs = p.coeffs.iter().zip(&n.coeffs).map(|(x, y)| x * &b + y * &a).collect();
                    rest.push(Ineq::new(coeffs, &p.constant * &b + &n.constant * &a, p.strict || n.strict));
                }
            }
            cur = simplify(rest)?;
        }
        let mut x = vec![Q::zero(); nvars];
        for (i, &v) in order.iter().enumerate().rev() {
            let mut lo: Option<(Q, bool)> = None;
            let mut hi: Option<(Q, bool)> = None;
            for c in &stages[i] {
                let cv = &c.coeffs[v];
                if cv.is_zero() {
                    continue;
                }
                let rest: Q = c
                    .coeffs
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != v)
                    .map(|(j, a)| a * &x[j])
                    .sum::<Q>()
                    + &c.constant;
                let bound = -(&rest / cv);
                if cv.is_positive() {
                    if lo.as_ref().is_none_or(|(l, s)| bound > *l || (bound == *l && c.strict && !s)) {
                        lo = Some((bound, c.strict));
                    }
                } else if hi.as_ref().is_none_or(|(h, s)| bound < *h || (bound == *h && c.strict && !s)) {
                    hi = Some((bound, c.strict));
                }
            }
            x[v] = pick(lo, hi)?;
        }
        sys.iter().all(|c| c.holds(&x)).then_some(x)
    }

    fn pick(lo: Option<(Q, bool)>, hi: Option<(Q, bool)>) -> Option<Q> {
        let ok = |v: &Q| {
            lo.as_ref().is_none_or(|(l, s)| if *s { v > l } else { v >= l })
                && hi.as_ref().is_none_or(|(h, s)| if *s { v < h } else { v <= h })
        };
        let zero = Q::zero();
        if ok(&zero) {
            return Some(zero);
        }
        let cand = match (&lo, &hi) {
            (Some((l, _)), _) if !l.is_negative() => {
                let c = l.ceil();
                if ok(&c) {
                    c
                } else {
                    c + Q::one()
                }
            }
            (_, Some((h, _))) if !h.is_positive() => {
                let c = h.floor();
                if ok(&c) {
                    c
                } else {
                    c - Q::one()
                }
            }
            _ => Q::zero(),
        };
        if ok(&cand) {
            return Some(cand);
        }
        match (lo.clone(), hi.clone()) {
            (Some((l, _)), Some((h, _))) => {
                let mid = (&l + &h) / q(2);
                ok(&mid).then_some(mid)
            }
            _ => None,
        }
    }
}

use fm::Ineq;

/// Constraints saying `k ↦ ζ(α̇) + kζ(δ)` is `≥ 0` (or `< 0` when `negative`)
/// on every `k ∈ x`.
fn extreme_constraints(d: &Dot, x: &ZSet, negative: bool, out: &mut Vec<Ineq>) {
    if x.is_empty() {
        return;
    }
    let nv = d.0.len() + 1;
    let at = |k: i64| -> Vec<Q> {
        let mut c: Vec<Q> = d.0.iter().map(|&v| q(v)).collect();
        c.push(q(k));
        if negative {
            c.iter_mut().for_each(|v| *v = -v.clone());
        }
        c
    };
    let slope = |sign: i64| -> Vec<Q> {
        let mut c = vec![Q::zero(); nv];
        c[nv - 1] = q(sign);
        c
    };
    let (up, down) = (!x.is_bounded_above(), !x.is_bounded_below());
    // slope sign forced by rays; ≥0 needs ζ(δ)≥0 on an up-ray, <0 needs ζ(δ)≤0
    if up {
        out.push(Ineq::new(slope(if negative { -1 } else { 1 }), Q::zero(), false));
    }
    if down {
        out.push(Ineq::new(slope(if negative { 1 } else { -1 }), Q::zero(), false));
    }
    let mut points = Vec::new();
    if let Some(k) = x.min() {
        points.push(k);
    }
    if let Some(k) = x.max() {
        points.push(k);
    }
    if up && down {
        points.push(shadow::sample_member(x).expect("nonempty"));
    }
    for k in points {
        out.push(Ineq::new(at(k), Q::zero(), negative));
    }
}

/// A functional `ζ` with `{α ∈ S∖R_ns : ζ(α) ≥ 0} = P`, if one exists.
pub fn solve_zeta(s: &CylinderSet, p: &CylinderSet) -> Result<Option<Functional>, FuncError> {
    let rs = s.rs();
    let base = s.difference(&s.ns_part()).expect("same root system");
    let pre = |m: String| Err(FuncError::Precondition(m));
    if !p.is_subset(&base) {
        let extra = p.difference(&base).expect("same root system");
        let (d, k) = extra.elements(256).into_iter().next().unwrap_or((Dot::zero(rs.dim()), 0));
        return pre(format!("{} is in P but not in S∖R_ns", rs.weight(&d, k)));
    }
    if p.union(&p.negate()).expect("same root system") != base {
        let miss = base.difference(&p.union(&p.negate()).expect("same root system")).expect("same root system");
        let (d, k) = miss.elements(256).into_iter().next().unwrap_or((Dot::zero(rs.dim()), 0));
        return pre(format!("neither {} nor its negative is in P", rs.weight(&d, k)));
    }
    let sums = p.minkowski(p).expect("same root system").intersect(&base).expect("same root system");
    if !sums.is_subset(p) {
        let bad = sums.difference(p).expect("same root system");
        let (d, k) = bad.elements(256).into_iter().next().unwrap_or((Dot::zero(rs.dim()), 0));
        return pre(format!("P is not closed: {} is a sum of elements of P", rs.weight(&d, k)));
    }
    let mut cons = Vec::new();
    for (d, z) in base.components() {
        let inside = p.component(d).cloned().unwrap_or_else(ZSet::empty).intersect(z);
        let outside = z.difference(&inside);
        extreme_constraints(d, &inside, false, &mut cons);
        extreme_constraints(d, &outside, true, &mut cons);
    }
    let nv = rs.dim() + 1;
    let order: Vec<usize> = (0..nv).collect();
    let Some(x) = fm::solve(&cons, nv, &order) else { return Ok(None) };
    let zeta = Functional::from_vec(rs.m(), &x);
    let td = tri_decompose(&base, &zeta);
    let got = td.plus.union(&td.zero).expect("same root system");
    if got != *p {
        return Err(stage_err("solve-zeta", "reconstruction differs from P"));
    }
    Ok(Some(zeta))
}

fn generic_functional(dim: usize, prime: i64) -> Vec<Q> {
    let mut v = Vec::with_capacity(dim);
    let mut c = q(1);
    for _ in 0..dim {
        v.push(c.clone());
        c /= q(prime);
    }
    v
}

fn coords(w: &Weight) -> Vec<Q> {
    w.eps.iter().chain(&w.del).cloned().collect()
}

fn dot_q(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn form(a: &Weight, b: &Weight) -> Q {
    a.form(b).expect("matching dimensions")
}

/// Reflection closure with integral Cartan numbers; `0` is ignored and
/// isotropic elements are rejected.
pub fn is_root_system(set: &[Weight]) -> bool {
    let roots: BTreeSet<Weight> =
        set.iter().filter(|w| !coords(w).iter().all(Zero::is_zero)).map(|w| Weight { delta: Q::zero(), ..w.clone() }).collect();
    for a in &roots {
        let aa = form(a, a);
        if aa.is_zero() {
            return false;
        }
        for b in &roots {
            let c = q(2) * form(b, a) / &aa;
            if !c.is_integer() {
                return false;
            }
            if !roots.contains(&(b - &a.scale(&c))) {
                return false;
            }
        }
    }
    true
}

/// Simple roots with respect to a generic functional, largest value first.
pub fn find_base(set: &[Weight]) -> Result<Vec<Weight>, FuncError> {
    if !is_root_system(set) {
        return Err(FuncError::NotRootSystem(format!("{} elements", set.len())));
    }
    let roots: BTreeSet<Weight> =
        set.iter().filter(|w| !coords(w).iter().all(Zero::is_zero)).map(|w| Weight { delta: Q::zero(), ..w.clone() }).collect();
    let Some(first) = roots.iter().next() else { return Ok(Vec::new()) };
    let dim = coords(first).len();
    for prime in [1009i64, 10007, 100003, 1000003] {
        let g = generic_functional(dim, prime);
        if roots.iter().any(|r| dot_q(&g, &coords(r)).is_zero()) {
            continue;
        }
        let pos: Vec<&Weight> = roots.iter().filter(|r| dot_q(&g, &coords(r)).is_positive()).collect();
        let mut base: Vec<&Weight> = pos
            .iter()
            .copied()
            .filter(|r| !pos.iter().any(|a| pos.iter().any(|b| &(*a + *b) == *r)))
            .collect();
        base.sort_by_key(|r| std::cmp::Reverse(dot_q(&g, &coords(r))));
        return Ok(base.into_iter().cloned().collect());
    }
    Err(FuncError::NotRootSystem("no generic functional found".into()))
}

/// Solution of `A·x = b` with free variables set from `free`, by exact
/// row reduction.
fn solve_affine(rows: &[(Vec<Q>, Q)], nvars: usize, free: &[Q]) -> Option<Vec<Q>> {
    let mut m: Vec<Vec<Q>> = rows.iter().map(|(a, b)| a.iter().cloned().chain([b.clone()]).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..nvars {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = Q::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let row_r = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(&row_r) {
                    *x = &*x - &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if m[r..].iter().any(|row| !row[nvars].is_zero()) {
        return None;
    }
    let mut x = vec![Q::zero(); nvars];
    let mut fi = 0;
    for (c, xc) in x.iter_mut().enumerate() {
        if !pivots.contains(&c) {
            *xc = free.get(fi).cloned().unwrap_or_else(Q::zero);
            fi += 1;
        }
    }
    for (i, &c) in pivots.iter().enumerate().rev() {
        let s: Q = (c + 1..nvars).map(|j| &m[i][j] * &x[j]).sum();
        x[c] = &m[i][nvars] - s;
    }
    Some(x)
}

fn dot_weight(rs: &RootSystem, d: &Dot) -> Weight {
    rs.weight(d, 0)
}

/// `ζ₁`: positive on a base of the even real part of `T(1)`, zero on
/// `T(2)` and `δ`, and nonzero on every other finite part of `T(1)`.
pub fn build_zeta1(t1: &CylinderSet, t2: &CylinderSet) -> Result<Functional, FuncError> {
    let rs = t1.rs();
    let (m, dim) = (rs.m(), rs.dim());
    let nv = dim + 1;
    let t1_re = t1.real_part();
    if t1_re.is_empty() {
        return Err(FuncError::Precondition("T(1)_re is empty".into()));
    }
    let even = shadow::even_part(&t1_re);
    let q0: Vec<Weight> = even.sdot().iter().map(|d| dot_weight(rs, d)).collect();
    let delta_base = find_base(&q0)?;
    let mut kernel_rows: Vec<(Vec<Q>, Q)> = t2
        .sdot()
        .iter()
        .filter(|d| !d.is_zero())
        .map(|d| (d.0.iter().map(|&x| q(x)).chain([Q::zero()]).collect(), Q::zero()))
        .collect();
    let mut delta_row = vec![Q::zero(); nv];
    delta_row[dim] = q(1);
    kernel_rows.push((delta_row, Q::zero()));
    let must_be_nonzero: Vec<Dot> = t1.cross_part().sdot().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut offending = None;
    for attempt in 0..256 {
        let targets: Vec<Q> = if attempt == 0 {
            vec![q(1); delta_base.len()]
        } else {
            (0..delta_base.len()).map(|_| q(rng.gen_range(1..=6))).collect()
        };
        let free: Vec<Q> = if attempt == 0 { Vec::new() } else { (0..nv).map(|_| q(rng.gen_range(-3..=3))).collect() };
        let mut rows = kernel_rows.clone();
        for (b, t) in delta_base.iter().zip(&targets) {
            rows.push((coords(b).into_iter().chain([Q::zero()]).collect(), t.clone()));
        }
        let Some(x) = solve_affine(&rows, nv, &free) else {
            return Err(stage_err("zeta1", "no functional is positive on the base and zero on T(2)"));
        };
        let z = Functional::from_vec(m, &x);
        match must_be_nonzero.iter().find(|d| z.eval_dot(d, 0).is_zero()) {
            None => return Ok(z),
            Some(d) => offending = Some(d.clone()),
        }
    }
    let d = offending.expect("attempted");
    Err(stage_err("zeta1", format!("every candidate vanishes on {}", rs.dot_string(&d))))
}

/// One stage of the induction chain: the functional and the sign split it
/// cuts on the current set.
#[derive(Clone, Debug, Serialize)]
pub struct StageReport {
    pub name: String,
    pub functional: Functional,
    pub plus: CylinderSetJson,
    pub zero: CylinderSetJson,
    pub minus: CylinderSetJson,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub direction: Direction,
    pub stages: Vec<StageReport>,
    pub t_zero_matches: bool,
    pub t_prime_finite: bool,
    pub t_prime: Vec<Weight>,
    pub chain: String,
}

fn stage_report(name: &str, z: &Functional, td: &TriDecomp) -> StageReport {
    StageReport {
        name: name.into(),
        functional: z.clone(),
        plus: td.plus.to_json(),
        zero: td.zero.to_json(),
        minus: td.minus.to_json(),
    }
}

/// Parabolic set `S^{ln} ∪ −S^{in} ∪ (σℤ^{≥0}δ ∩ S)` of a hybrid set `S`.
pub fn hybrid_parabolic(sa: &ShadowAssignment, s: &CylinderSet, dir: Direction) -> CylinderSet {
    let rs = s.rs();
    let ln = s.intersect(&sa.ln_set()).expect("same root system");
    let inj = s.intersect(&sa.in_set()).expect("same root system");
    let ray = match dir {
        Direction::AllDown => ZSet::at_most(0),
        _ => ZSet::at_least(0),
    };
    let im = CylinderSet::from_components(rs, [(Dot::zero(rs.dim()), ray)]).intersect(s).expect("same root system");
    ln.union(&inj.negate()).and_then(|x| x.union(&im)).expect("same root system")
}

/// `ζ₁`, `ζ₂`, `ζ₃` and the sets they cut, ending in the finite set `T′`.
pub fn pipeline(sa: &ShadowAssignment) -> Result<PipelineReport, FuncError> {
    let rs = sa.rs();
    let main = verify_main_i(sa).map_err(|e| stage_err("main-i", e.to_string()))?;
    if !main.pass {
        let bad = main.checks.iter().find(|c| !c.pass).expect("failing check");
        return Err(stage_err("main-i", format!("{}: {}", bad.name, bad.witness.clone().unwrap_or_default())));
    }
    let ts = build_t(sa);
    let dir = hybrid_direction(sa, &ts.t2).map_err(|e| stage_err("direction", e.to_string()))?;
    if dir == Direction::Mixed {
        return Err(stage_err("direction", "T(2) mixes up- and down-nilpotent hybrid roots, which no module allows"));
    }
    let z1 = build_zeta1(&ts.t1, &ts.t2)?;
    let d1 = tri_decompose(&ts.t, &z1);
    let expected = ts.t2.union(&CylinderSet::imaginary(rs)).expect("same root system");
    let s = d1.zero.clone();
    let t_zero_matches = s == expected;
    if !t_zero_matches {
        return Err(stage_err("zeta1", format!("kernel part {:?} differs from T(2)∪Zδ", s)));
    }
    let p2 = hybrid_parabolic(sa, &s, dir);
    let z2 = solve_zeta(&s, &p2)?.ok_or_else(|| stage_err("zeta2", "no functional realizes the hybrid parabolic"))?;
    let d2 = tri_decompose(&s, &z2);
    let t_prime = d2.zero.clone();
    let t_prime_finite = t_prime.is_finite();
    if !t_prime_finite {
        return Err(stage_err("zeta2", "T′ is infinite"));
    }
    let elems = t_prime.finite_elements().expect("finite");
    let mut z3 = None;
    for prime in [101i64, 1009, 10007, 100003] {
        let z = Functional::from_vec(rs.m(), &generic_functional(rs.dim() + 1, prime));
        if elems.iter().all(|(d, k)| (d.is_zero() && *k == 0) || !z.eval_dot(d, *k).is_zero()) {
            z3 = Some(z);
            break;
        }
    }
    let z3 = z3.ok_or_else(|| stage_err("zeta3", "no generic functional on T′"))?;
    let d3 = tri_decompose(&t_prime, &z3);
    Ok(PipelineReport {
        direction: dir,
        stages: vec![stage_report("zeta1", &z1, &d1), stage_report("zeta2", &z2, &d2), stage_report("zeta3", &z3, &d3)],
        t_zero_matches,
        t_prime_finite,
        t_prime: elems.iter().map(|(d, k)| rs.weight(d, *k)).collect(),
        chain: "Ind_zeta1 ∘ Ind_zeta2 ∘ Ind_zeta3".into(),
    })
}

/// A rational in `[-4, 4]` with denominator at most 3, zero with some weight.
pub fn random_value<R: Rng>(rng: &mut R) -> Q {
    if rng.gen_bool(0.2) {
        Q::zero()
    } else {
        qf(rng.gen_range(-12..=12), rng.gen_range(1..=3))
    }
}

pub fn random_functional<R: Rng>(m: usize, n: usize, rng: &mut R) -> Functional {
    Functional {
        eps: (0..m).map(|_| random_value(rng)).collect(),
        del: (0..n).map(|_| random_value(rng)).collect(),
        delta: random_value(rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootspace::FamilyKind;
    use crate::shadow::worked_example;
    use proptest::prelude::*;

    fn w(eps: &[i64], del: &[i64]) -> Weight {
        Weight::from_ints(eps, del, 0)
    }

    #[test]
    fn tri_decompose_examples() {
        let rs = RootSystem::new(FamilyKind::AOddOdd2, 2, 1).unwrap();
        let full = CylinderSet::full(&rs);
        let td = tri_decompose(&full, &Functional::zero(2, 1));
        assert_eq!(td.zero, full);
        let im = CylinderSet::imaginary(&rs);
        let td = tri_decompose(&im, &Functional::from_ints(&[0, 0], &[0], 1));
        let zero = Dot::zero(3);
        assert_eq!(td.plus.component(&zero).unwrap(), &ZSet::at_least(1));
        assert_eq!(td.zero.component(&zero).unwrap(), &ZSet::point(0));
        assert_eq!(td.minus.component(&zero).unwrap(), &ZSet::at_most(-1));
        let two_d = Dot(vec![0, 0, 2]);
        let s = CylinderSet::cosets(&rs, std::slice::from_ref(&two_d));
        let z = Functional { eps: vec![q(0), q(0)], del: vec![qf(1, 2)], delta: q(1) };
        assert_eq!(tri_decompose(&s, &z).plus.component(&two_d).unwrap(), &ZSet::up(0, 2));
    }

    #[test]
    fn parabolic_examples() {
        let rs = RootSystem::new(FamilyKind::AOddOdd2, 2, 1).unwrap();
        let full = CylinderSet::full(&rs);
        let p = parabolic(&rs, &Functional::zero(2, 1), None).unwrap();
        assert_eq!(p.p, full);
        assert_eq!(p.levi, full);
        let generic = Functional { eps: vec![q(1), qf(1, 7)], del: vec![qf(1, 49)], delta: q(0) };
        let p = parabolic(&rs, &generic, None).unwrap();
        assert_eq!(p.levi, CylinderSet::imaginary(&rs));
        assert_eq!(p.axioms(), (true, true));
        let sa = worked_example();
        let ts = build_t(&sa);
        let lam = Functional { eps: vec![qf(3, 2), qf(1, 2)], del: vec![q(0)], delta: q(0) };
        let p = parabolic(&rs, &lam, None).unwrap();
        assert_eq!(p.levi, ts.t2.union(&CylinderSet::imaginary(&rs)).unwrap());
    }

    #[test]
    fn worked_solve_zeta() {
        let sa = worked_example();
        let ts = build_t(&sa);
        let s = tri_decompose(&build_t(&sa).t, &build_zeta1(&ts.t1, &ts.t2).unwrap()).zero;
        let p = hybrid_parabolic(&sa, &s, Direction::AllUp);
        let z = solve_zeta(&s, &p).unwrap().unwrap();
        assert_eq!(z, Functional { eps: vec![q(0), q(0)], del: vec![qf(1, 2)], delta: q(1) });
        let all = s.difference(&s.ns_part()).unwrap();
        assert!(solve_zeta(&s, &all).unwrap().unwrap().is_zero());
    }

    #[test]
    fn solve_zeta_rejects_non_closed() {
        let rs = RootSystem::new(FamilyKind::D2, 1, 1).unwrap();
        let s = CylinderSet::imaginary(&rs);
        let odd = CylinderSet::from_components(&rs, [(Dot::zero(2), ZSet::at_least(0).union(&ZSet::point(-3)))]);
        assert!(matches!(solve_zeta(&s, &odd), Err(FuncError::Precondition(_))));
    }

    #[test]
    fn base_examples() {
        let c2 = [w(&[2, 0], &[]), w(&[-2, 0], &[]), w(&[0, 2], &[]), w(&[0, -2], &[]), w(&[1, 1], &[]), w(&[-1, -1], &[]), w(&[1, -1], &[]), w(&[-1, 1], &[])];
        assert_eq!(find_base(&c2).unwrap(), vec![w(&[1, -1], &[]), w(&[0, 2], &[])]);
        assert_eq!(find_base(&[w(&[], &[2]), w(&[], &[-2])]).unwrap(), vec![w(&[], &[2])]);
        assert_eq!(find_base(&[w(&[1], &[]), w(&[-1], &[]), w(&[2], &[]), w(&[-2], &[])]).unwrap(), vec![w(&[1], &[])]);
    }

    #[test]
    fn root_system_examples() {
        let c2 = [w(&[2, 0], &[0]), w(&[-2, 0], &[0]), w(&[0, 2], &[0]), w(&[0, -2], &[0]), w(&[1, 1], &[0]), w(&[-1, -1], &[0]), w(&[1, -1], &[0]), w(&[-1, 1], &[0]), w(&[0, 0], &[0])];
        assert!(is_root_system(&c2));
        assert!(is_root_system(&[w(&[1], &[0]), w(&[-1], &[0]), w(&[0], &[1]), w(&[0], &[-1])]));
        assert!(is_root_system(&[]));
        assert!(!is_root_system(&[w(&[1], &[1]), w(&[-1], &[-1])]));
        assert!(!is_root_system(&[w(&[1], &[]), w(&[-1], &[]), w(&[3], &[])]));
    }

    #[test]
    fn worked_zeta1() {
        let sa = worked_example();
        let ts = build_t(&sa);
        let z = build_zeta1(&ts.t1, &ts.t2).unwrap();
        assert_eq!(z, Functional { eps: vec![qf(3, 2), qf(1, 2)], del: vec![q(0)], delta: q(0) });
        for k in -10..=10 {
            assert!(z.eval_dot(&Dot(vec![0, 0, 2]), k).is_zero());
        }
        let all_ln = shadow::assignment_with(sa.rs(), shadow::CosetClass::full_ln(), &[]).unwrap();
        let ts = build_t(&all_ln);
        assert!(build_zeta1(&ts.t2, &ts.t1).is_err());
    }

    #[test]
    fn worked_pipeline() {
        let sa = worked_example();
        let rep = pipeline(&sa).unwrap();
        assert!(rep.t_zero_matches && rep.t_prime_finite);
        assert_eq!(rep.direction, Direction::AllUp);
        // T′ = {0} ∪ {±(2δ₁-δ)}∩R; the latter are not roots, so only 0 remains
        assert_eq!(rep.t_prime, vec![Weight::from_ints(&[0, 0], &[0], 0)]);
        let all_ln = shadow::assignment_with(sa.rs(), shadow::CosetClass::full_ln(), &[]).unwrap();
        assert!(matches!(pipeline(&all_ln), Err(FuncError::Stage { .. })));
    }

    fn small_ineq() -> impl Strategy<Value = Ineq> {
        (prop::collection::vec(-3i64..=3, 2), -3i64..=3, any::<bool>())
            .prop_map(|(c, k, s)| Ineq::new(c.into_iter().map(q).collect(), q(k), s))
    }

    proptest! {
        #[test]
        fn fm_agrees_with_grid_search(sys in prop::collection::vec(small_ineq(), 1..6)) {
            let sol = fm::solve(&sys, 2, &[0, 1]);
            // any solution found must satisfy every constraint
            if let Some(x) = &sol {
                for c in &sys {
                    let v = &c.coeffs[0] * &x[0] + &c.coeffs[1] * &x[1] + &c.constant;
                    let ok = if c.strict { v.is_positive() } else { !v.is_negative() };
                    prop_assert!(ok);
                }
            } else {
                // no point of a fine rational grid is feasible
                for a in -48..=48 {
                    for b in -48..=48 {
                        let x = [qf(a, 8), qf(b, 8)];
                        let ok = sys.iter().all(|c| {
                            let v = &c.coeffs[0] * &x[0] + &c.coeffs[1] * &x[1] + &c.constant;
                            if c.strict { v.is_positive() } else { !v.is_negative() }
                        });
                        prop_assert!(!ok, "grid point {:?} is feasible", x);
                    }
                }
            }
        }

        #[test]
        fn tri_decompose_partitions(e in prop::collection::vec(-4i64..=4, 2), dd in -3i64..=3) {
            let rs = RootSystem::new(FamilyKind::AEvenEven4, 1, 1).unwrap();
            let full = CylinderSet::full(&rs);
            let z = Functional::from_ints(&[e[0]], &[e[1]], dd);
            let td = tri_decompose(&full, &z);
            for (dot, k) in rs.enumerate(50) {
                let v = z.eval_dot(&dot, k);
                prop_assert_eq!(td.plus.member_dot(&dot, k), v.is_positive());
                prop_assert_eq!(td.zero.member_dot(&dot, k), v.is_zero());
                prop_assert_eq!(td.minus.member_dot(&dot, k), v.is_negative());
            }
        }
    }
}
