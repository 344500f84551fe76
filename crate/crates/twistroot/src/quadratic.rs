//! Graded Lie superalgebras given by structure constants over `ℚ(i)`:
//! the quadratic superalgebra `Q`, `gl(m|n)`, and twisted loop algebras with
//! their central extension and derivation.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::rootspace::{q, q_from_str, q_to_string, Parity, Q};

/// Element of `ℚ(i)`.
pub type C = Complex<Q>;

/// Sparse vector in the basis of an algebra.
pub type Elem = BTreeMap<usize, C>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuadError {
    #[error("degree window must be at least 2")]
    Window,
    #[error("sigma is not an automorphism: {0}")]
    NotAutomorphism(String),
    #[error("order must be 2 or 4")]
    Order,
    #[error("base algebra has no invariant form")]
    NoForm,
    #[error("element index {0} outside the basis")]
    OutsideBasis(usize),
    #[error("malformed input: {0}")]
    Malformed(String),
}

pub fn cq(x: Q) -> C {
    Complex::new(x, Q::zero())
}

pub fn ci(n: i64) -> C {
    cq(q(n))
}

pub fn c_to_string(c: &C) -> String {
    if c.im.is_zero() {
        q_to_string(&c.re)
    } else if c.re.is_zero() {
        format!("{}i", q_to_string(&c.im))
    } else if c.im > Q::zero() {
        format!("{}+{}i", q_to_string(&c.re), q_to_string(&c.im))
    } else {
        format!("{}{}i", q_to_string(&c.re), q_to_string(&c.im))
    }
}

/// Reads `"p/q"`, an integer, or `["re","im"]`.
pub fn c_from_json(v: &Value) -> Result<C, QuadError> {
    let part = |v: &Value| -> Result<Q, QuadError> {
        match v {
            Value::String(s) => q_from_str(s).map_err(|e| QuadError::Malformed(e.to_string())),
            Value::Number(n) => n
                .as_i64()
                .map(q)
                .ok_or_else(|| QuadError::Malformed(format!("{n} is not an integer"))),
            other => Err(QuadError::Malformed(format!("{other} is not a rational"))),
        }
    };
    match v {
        Value::Array(xs) if xs.len() == 2 => Ok(Complex::new(part(&xs[0])?, part(&xs[1])?)),
        other => Ok(cq(part(other)?)),
    }
}

pub fn c_to_json(c: &C) -> Value {
    if c.im.is_zero() {
        Value::String(q_to_string(&c.re))
    } else {
        Value::Array(vec![Value::String(q_to_string(&c.re)), Value::String(q_to_string(&c.im))])
    }
}

fn add_scaled(acc: &mut Elem, x: &Elem, s: &C) {
    if s.is_zero() {
        return;
    }
    for (i, c) in x {
        let e = acc.entry(*i).or_insert_with(C::zero);
        *e = &*e + c * s;
        if e.is_zero() {
            acc.remove(i);
        }
    }
}

pub fn basis_elem(i: usize) -> Elem {
    [(i, C::one())].into()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BasisElem {
    pub label: String,
    pub degree: i64,
    pub parity: Parity,
}

/// Basis with degrees and parities, sparse brackets, optional form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedSuperAlgebra {
    pub basis: Vec<BasisElem>,
    brackets: BTreeMap<(usize, usize), Elem>,
    /// Brackets whose value lies outside the degree window.
    overflow: BTreeMap<(usize, usize), ()>,
    form: BTreeMap<(usize, usize), C>,
    /// Designated Cartan subspace, as basis indices.
    pub cartan: Vec<usize>,
}

impl GradedSuperAlgebra {
    pub fn new(basis: Vec<BasisElem>) -> Self {
        GradedSuperAlgebra {
            basis,
            brackets: BTreeMap::new(),
            overflow: BTreeMap::new(),
            form: BTreeMap::new(),
            cartan: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn has_form(&self) -> bool {
        !self.form.is_empty()
    }

    pub fn set_bracket(&mut self, i: usize, j: usize, v: Elem) {
        let v: Elem = v.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        if v.is_empty() {
            self.brackets.remove(&(i, j));
        } else {
            self.brackets.insert((i, j), v);
        }
    }

    pub fn mark_overflow(&mut self, i: usize, j: usize) {
        self.overflow.insert((i, j), ());
    }

    pub fn set_form(&mut self, i: usize, j: usize, v: C) {
        if v.is_zero() {
            self.form.remove(&(i, j));
        } else {
            self.form.insert((i, j), v);
        }
    }

    pub fn bracket_entry(&self, i: usize, j: usize) -> Option<Elem> {
        if self.overflow.contains_key(&(i, j)) {
            None
        } else {
            Some(self.brackets.get(&(i, j)).cloned().unwrap_or_default())
        }
    }

    /// Bilinear extension; `None` if some needed basis bracket overflows.
    pub fn bracket(&self, x: &Elem, y: &Elem) -> Option<Elem> {
        let mut acc = Elem::new();
        for (i, a) in x {
            for (j, b) in y {
                if self.overflow.contains_key(&(*i, *j)) {
                    return None;
                }
                if let Some(v) = self.brackets.get(&(*i, *j)) {
                    add_scaled(&mut acc, v, &(a * b));
                }
            }
        }
        Some(acc)
    }

    pub fn form(&self, x: &Elem, y: &Elem) -> C {
        let mut acc = C::zero();
        for (i, a) in x {
            for (j, b) in y {
                if let Some(v) = self.form.get(&(*i, *j)) {
                    acc += a * b * v;
                }
            }
        }
        acc
    }

    pub fn parity_of(&self, i: usize) -> Parity {
        self.basis[i].parity
    }

    pub fn elem_string(&self, x: &Elem) -> String {
        if x.is_empty() {
            return "0".into();
        }
        x.iter()
            .map(|(i, c)| format!("({})·{}", c_to_string(c), self.basis[*i].label))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Structure constants as `[i, j, k, coeff]` rows.
    pub fn structure_constants(&self) -> Vec<(usize, usize, usize, String)> {
        let mut out = Vec::new();
        for ((i, j), v) in &self.brackets {
            for (k, c) in v {
                out.push((*i, *j, *k, c_to_string(c)));
            }
        }
        out
    }

    /// The same algebra with the stored bracket `[e_i, e_j]` replaced.
    pub fn with_entry(&self, i: usize, j: usize, v: Elem) -> Self {
        let mut a = self.clone();
        a.set_bracket(i, j, v);
        a
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.basis.iter().position(|b| b.label == label)
    }
}

fn sign(odd: bool) -> C {
    if odd {
        ci(-1)
    } else {
        ci(1)
    }
}

/// `Q` with basis `s^{4k+2}`, `t^{4k+2}`, `t^{4k±1}` of degree at most
/// `window` in absolute value.
pub fn q_algebra(window: i64) -> Result<GradedSuperAlgebra, QuadError> {
    if window < 2 {
        return Err(QuadError::Window);
    }
    let mut basis = Vec::new();
    for d in -window..=window {
        let r = d.rem_euclid(4);
        if r == 2 {
            basis.push(BasisElem { label: format!("s^{d}"), degree: d, parity: Parity::Even });
            basis.push(BasisElem { label: format!("t^{d}"), degree: d, parity: Parity::Even });
        } else if r % 2 == 1 {
            basis.push(BasisElem { label: format!("t^{d}"), degree: d, parity: Parity::Odd });
        }
    }
    let mut alg = GradedSuperAlgebra::new(basis);
    let idx: BTreeMap<String, usize> = alg.basis.iter().enumerate().map(|(i, b)| (b.label.clone(), i)).collect();
    let n = alg.dim();
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (&alg.basis[i], &alg.basis[j]);
            let sum = a.degree + b.degree;
            let is_s = |x: &BasisElem| x.label.starts_with('s');
            let (ra, rb) = (a.degree.rem_euclid(4), b.degree.rem_euclid(4));
            let coeff = match (is_s(a), is_s(b), ra, rb) {
                (true, false, 2, 1 | 3) => Some(1),
                (false, true, 1 | 3, 2) => Some(-1),
                (false, false, 1, 1) => Some(1),
                (false, false, 3, 3) => Some(-1),
                _ => None,
            };
            let Some(c) = coeff else { continue };
            if sum.abs() > window {
                alg.mark_overflow(i, j);
                continue;
            }
            let k = idx[&format!("t^{sum}")];
            alg.set_bracket(i, j, [(k, ci(c))].into());
        }
    }
    Ok(alg)
}

/// `gl(m|n)` on elementary matrices `E_ab` with the supercommutator and the
/// supertrace form.
pub fn gl_superalgebra(m: usize, n: usize) -> GradedSuperAlgebra {
    let size = m + n;
    let odd_idx = |a: usize| a >= m;
    let mut basis = Vec::new();
    for a in 0..size {
        for b in 0..size {
            basis.push(BasisElem {
                label: format!("E{}{}", a + 1, b + 1),
                degree: 0,
                parity: Parity::from_odd(odd_idx(a) ^ odd_idx(b)),
            });
        }
    }
    let mut alg = GradedSuperAlgebra::new(basis);
    let id = |a: usize, b: usize| a * size + b;
    for a in 0..size {
        for b in 0..size {
            for c in 0..size {
                for d in 0..size {
                    let mut v = Elem::new();
                    if b == c {
                        add_scaled(&mut v, &basis_elem(id(a, d)), &ci(1));
                    }
                    if d == a {
                        let p1 = odd_idx(a) ^ odd_idx(b);
                        let p2 = odd_idx(c) ^ odd_idx(d);
                        add_scaled(&mut v, &basis_elem(id(c, b)), &(-sign(p1 && p2)));
                    }
                    alg.set_bracket(id(a, b), id(c, d), v);
                    if b == c && d == a {
                        alg.set_form(id(a, b), id(c, d), sign(odd_idx(a)));
                    }
                }
            }
        }
    }
    alg.cartan = (0..size).map(|a| id(a, a)).collect();
    alg
}

/// Parity of the root vector `E_ab` of `gl(m|n)` (weight `e_a − e_b`).
pub fn gl_root_parity(m: usize, a: usize, b: usize) -> Parity {
    Parity::from_odd((a < m) != (b < m))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub triple: Vec<String>,
    pub residual: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JacobiReport {
    pub checked_triples: usize,
    pub skipped_triples: usize,
    pub violations: Vec<Violation>,
    pub antisymmetry_violations: Vec<Violation>,
}

impl JacobiReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty() && self.antisymmetry_violations.is_empty()
    }
}

fn in_window(alg: &GradedSuperAlgebra, window: i64) -> Vec<usize> {
    (0..alg.dim()).filter(|&i| alg.basis[i].degree.abs() <= window).collect()
}

/// Super-antisymmetry of every stored pair and the super-Jacobi identity on
/// every basis triple of degree at most `window`. Triples needing a bracket
/// outside the materialized window are skipped and counted.
pub fn super_jacobi_check(alg: &GradedSuperAlgebra, window: i64) -> JacobiReport {
    let idx = in_window(alg, window);
    let odd: Vec<bool> = (0..alg.dim()).map(|i| alg.parity_of(i).is_odd()).collect();
    let mut anti = Vec::new();
    for &i in &idx {
        for &j in &idx {
            let (Some(x), Some(y)) = (alg.bracket_entry(i, j), alg.bracket_entry(j, i)) else { continue };
            let mut r = x.clone();
            add_scaled(&mut r, &y, &sign(odd[i] && odd[j]));
            if !r.is_empty() {
                anti.push(Violation {
                    triple: vec![alg.basis[i].label.clone(), alg.basis[j].label.clone()],
                    residual: alg.elem_string(&r),
                });
            }
        }
    }
    let mut checked = 0;
    let mut skipped = 0;
    let mut violations = Vec::new();
    let e = basis_elem;
    for &x in &idx {
        for &y in &idx {
            for &z in &idx {
                let terms = [
                    (x, y, z, odd[x] && odd[z]),
                    (y, z, x, odd[y] && odd[x]),
                    (z, x, y, odd[z] && odd[y]),
                ];
                let mut acc = Elem::new();
                let mut skip = false;
                for (a, b, c, s) in terms {
                    let inner = alg.bracket_entry(b, c);
                    let outer = inner.and_then(|v| alg.bracket(&e(a), &v));
                    match outer {
                        Some(v) => add_scaled(&mut acc, &v, &sign(s)),
                        None => {
                            skip = true;
                            break;
                        }
                    }
                }
                if skip {
                    skipped += 1;
                    continue;
                }
                checked += 1;
                if !acc.is_empty() {
                    violations.push(Violation {
                        triple: [x, y, z].iter().map(|&i| alg.basis[i].label.clone()).collect(),
                        residual: alg.elem_string(&acc),
                    });
                }
            }
        }
    }
    JacobiReport { checked_triples: checked, skipped_triples: skipped, violations, antisymmetry_violations: anti }
}

/// Mutants of `Q`: single stored entries doubled (breaking antisymmetry) and
/// `s`–`t` brackets doubled in both orders away from the window edge.
pub fn q_mutants(alg: &GradedSuperAlgebra, window: i64, count_each: usize) -> Vec<(String, GradedSuperAlgebra)> {
    let entries: Vec<((usize, usize), Elem)> =
        alg.brackets.iter().filter(|((i, j), _)| i != j).map(|(k, v)| (*k, v.clone())).collect();
    let mut out = Vec::new();
    let step = (entries.len() / count_each.max(1)).max(1);
    for ((i, j), v) in entries.iter().step_by(step).take(count_each) {
        let doubled: Elem = v.iter().map(|(k, c)| (*k, c * ci(2))).collect();
        let name = format!("[{}, {}] doubled", alg.basis[*i].label, alg.basis[*j].label);
        out.push((name, alg.with_entry(*i, *j, doubled)));
    }
    let margin = window - 8;
    let st: Vec<(usize, usize)> = alg
        .brackets
        .keys()
        .copied()
        .filter(|&(i, j)| {
            let (a, b) = (&alg.basis[i], &alg.basis[j]);
            a.label.starts_with('s')
                && b.parity.is_odd()
                && a.degree.abs() <= margin
                && b.degree.abs() <= margin
                && (a.degree + b.degree).abs() <= margin
        })
        .collect();
    let step = (st.len() / count_each.max(1)).max(1);
    for &(i, j) in st.iter().step_by(step).take(count_each) {
        let double = |v: Elem| -> Elem { v.into_iter().map(|(k, c)| (k, c * ci(2))).collect() };
        let mut a = alg.clone();
        let v1 = alg.brackets[&(i, j)].clone();
        let v2 = alg.brackets[&(j, i)].clone();
        a.set_bracket(i, j, double(v1));
        a.set_bracket(j, i, double(v2));
        out.push((format!("[{}, {}] doubled in both orders", alg.basis[i].label, alg.basis[j].label), a));
    }
    out
}

/// Dense square matrix over `ℚ(i)`.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix(pub Vec<Vec<C>>);

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = self.0.iter().map(|r| r.iter().map(c_to_string).collect()).collect();
        write!(f, "{rows:?}")
    }
}

impl Matrix {
    pub fn identity(n: usize) -> Self {
        Matrix((0..n).map(|i| (0..n).map(|j| if i == j { C::one() } else { C::zero() }).collect()).collect())
    }

    pub fn size(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        let n = self.size();
        Matrix(
            (0..n)
                .map(|i| (0..n).map(|j| (0..n).fold(C::zero(), |acc, k| acc + &self.0[i][k] * &o.0[k][j])).collect())
                .collect(),
        )
    }

    /// `σ(e_j)` as a sparse vector (column `j`).
    pub fn apply(&self, x: &Elem) -> Elem {
        let mut out = Elem::new();
        for (j, c) in x {
            for i in 0..self.size() {
                let v = &self.0[i][*j] * c;
                if !v.is_zero() {
                    let e = out.entry(i).or_insert_with(C::zero);
                    *e = &*e + v;
                    if e.is_zero() {
                        out.remove(&i);
                    }
                }
            }
        }
        out
    }

    /// `Ad(g)` on `gl(m|n)` for a diagonal `g`.
    pub fn adjoint_diag(g: &[C]) -> Matrix {
        let s = g.len();
        let n = s * s;
        let mut m = vec![vec![C::zero(); n]; n];
        for a in 0..s {
            for b in 0..s {
                let i = a * s + b;
                m[i][i] = &g[a] / &g[b];
            }
        }
        Matrix(m)
    }

    pub fn from_json(v: &Value) -> Result<Matrix, QuadError> {
        let rows = v.as_array().ok_or_else(|| QuadError::Malformed("sigma must be a list of rows".into()))?;
        let mut out = Vec::new();
        for r in rows {
            let r = r.as_array().ok_or_else(|| QuadError::Malformed("sigma row must be a list".into()))?;
            out.push(r.iter().map(c_from_json).collect::<Result<Vec<C>, _>>()?);
        }
        if out.iter().any(|r| r.len() != out.len()) {
            return Err(QuadError::Malformed("sigma must be square".into()));
        }
        Ok(Matrix(out))
    }
}

/// Null space of a matrix over `ℚ(i)` by exact row reduction.
fn nullspace(rows: Vec<Vec<C>>, ncols: usize) -> Vec<Vec<C>> {
    let mut m = rows;
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = C::one() / &m[r][c];
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
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![C::zero(); ncols];
        v[free] = C::one();
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[i][free].clone();
        }
        out.push(v);
    }
    out
}

fn invert(cols: &[Vec<C>]) -> Option<Vec<Vec<C>>> {
    let n = cols.len();
    let mut m: Vec<Vec<C>> = (0..n)
        .map(|i| {
            (0..n).map(|j| cols[j][i].clone()).chain((0..n).map(|j| if i == j { C::one() } else { C::zero() })).collect()
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !m[i][c].is_zero())?;
        m.swap(c, p);
        let inv = C::one() / &m[c][c];
        for x in m[c].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..n {
            if i != c && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let row_c = m[c].clone();
                for (x, y) in m[i].iter_mut().zip(&row_c) {
                    *x = &*x - &f * y;
                }
            }
        }
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

fn root_of_unity(l: usize, j: usize) -> C {
    match (l, j % l) {
        (_, 0) => ci(1),
        (2, 1) => ci(-1),
        (4, 1) => Complex::new(Q::zero(), Q::one()),
        (4, 2) => ci(-1),
        (4, 3) => Complex::new(Q::zero(), -Q::one()),
        _ => unreachable!("order checked"),
    }
}

/// Checks that `σ` preserves parity, brackets, the form and the Cartan
/// subspace, and that `σ^l = 1`.
pub fn check_automorphism(base: &GradedSuperAlgebra, sigma: &Matrix, l: usize) -> Result<(), QuadError> {
    let n = base.dim();
    let bad = |m: String| Err(QuadError::NotAutomorphism(m));
    if sigma.size() != n {
        return bad(format!("sigma has size {} but the algebra has dimension {n}", sigma.size()));
    }
    let mut pow = Matrix::identity(n);
    for _ in 0..l {
        pow = sigma.mul(&pow);
    }
    if pow != Matrix::identity(n) {
        return bad(format!("sigma^{l} is not the identity"));
    }
    let images: Vec<Elem> = (0..n).map(|j| sigma.apply(&basis_elem(j))).collect();
    for (j, img) in images.iter().enumerate() {
        if img.keys().any(|&i| base.parity_of(i) != base.parity_of(j)) {
            return bad(format!("sigma does not preserve the parity of {}", base.basis[j].label));
        }
    }
    for &h in &base.cartan {
        if images[h].keys().any(|i| !base.cartan.contains(i)) {
            return bad(format!("sigma moves Cartan element {} out of the Cartan subspace", base.basis[h].label));
        }
    }
    for i in 0..n {
        for j in 0..n {
            let lhs = sigma.apply(&base.bracket_entry(i, j).unwrap_or_default());
            let rhs = base.bracket(&images[i], &images[j]).unwrap_or_default();
            if lhs != rhs {
                return bad(format!("bracket of ({}, {})", base.basis[i].label, base.basis[j].label));
            }
            if base.form(&images[i], &images[j]) != base.form(&basis_elem(i), &basis_elem(j)) {
                return bad(format!("form on ({}, {})", base.basis[i].label, base.basis[j].label));
            }
        }
    }
    Ok(())
}

/// Eigenvectors of `σ` per eigenvalue `ζ^j`, split by parity.
pub fn eigenspaces(base: &GradedSuperAlgebra, sigma: &Matrix, l: usize) -> Vec<Vec<Vec<C>>> {
    let n = base.dim();
    let mut out = Vec::new();
    for j in 0..l {
        let z = root_of_unity(l, j);
        let mut vecs = Vec::new();
        for parity in [Parity::Even, Parity::Odd] {
            let idx: Vec<usize> = (0..n).filter(|&i| base.parity_of(i) == parity).collect();
            let rows: Vec<Vec<C>> = idx
                .iter()
                .map(|&r| idx.iter().map(|&c| if r == c { &sigma.0[r][c] - &z } else { sigma.0[r][c].clone() }).collect())
                .collect();
            for v in nullspace(rows, idx.len()) {
                let mut full = vec![C::zero(); n];
                for (k, &i) in idx.iter().enumerate() {
                    full[i] = v[k].clone();
                }
                vecs.push(full);
            }
        }
        out.push(vecs);
    }
    out
}

/// The loop algebra `⊕_j [j]base ⊗ t^j ℂ[t^{±l}] ⊕ ℂc ⊕ ℂd` truncated to
/// `|p| ≤ window`. The last two basis elements are `c` and `d`.
pub fn loop_algebra(base: &GradedSuperAlgebra, sigma: &Matrix, l: usize, window: i64) -> Result<GradedSuperAlgebra, QuadError> {
    if l != 2 && l != 4 {
        return Err(QuadError::Order);
    }
    if !base.has_form() {
        return Err(QuadError::NoForm);
    }
    check_automorphism(base, sigma, l)?;
    let n = base.dim();
    let spaces = eigenspaces(base, sigma, l);
    let eig: Vec<(usize, Vec<C>)> = spaces.iter().enumerate().flat_map(|(j, vs)| vs.iter().map(move |v| (j, v.clone()))).collect();
    if eig.len() != n {
        return Err(QuadError::NotAutomorphism(format!("eigenspaces have total dimension {} ≠ {n}", eig.len())));
    }
    let cols: Vec<Vec<C>> = eig.iter().map(|(_, v)| v.clone()).collect();
    let inv = invert(&cols).ok_or_else(|| QuadError::NotAutomorphism("eigenvectors are dependent".into()))?;
    let to_elem = |v: &[C]| -> Elem { v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i, c.clone())).collect() };
    let eig_elem: Vec<Elem> = cols.iter().map(|v| to_elem(v)).collect();
    let coords = |x: &Elem| -> Vec<C> {
        (0..n).map(|r| x.iter().fold(C::zero(), |acc, (i, c)| acc + &inv[r][*i] * c)).collect()
    };

    let mut basis = Vec::new();
    let mut index: BTreeMap<(usize, i64), usize> = BTreeMap::new();
    for p in -window..=window {
        for (e, (j, v)) in eig.iter().enumerate() {
            if (p - *j as i64).rem_euclid(l as i64) != 0 {
                continue;
            }
            let parity = base.parity_of(*to_elem(v).keys().next().expect("nonzero eigenvector"));
            index.insert((e, p), basis.len());
            basis.push(BasisElem { label: format!("v{e}[{j}]⊗t^{p}"), degree: p, parity });
        }
    }
    let c_idx = basis.len();
    basis.push(BasisElem { label: "c".into(), degree: 0, parity: Parity::Even });
    let d_idx = basis.len();
    basis.push(BasisElem { label: "d".into(), degree: 0, parity: Parity::Even });
    let mut alg = GradedSuperAlgebra::new(basis);
    let items: Vec<((usize, i64), usize)> = index.iter().map(|(k, v)| (*k, *v)).collect();
    for &((e1, p), i1) in &items {
        for &((e2, q2), i2) in &items {
            let br = base.bracket(&eig_elem[e1], &eig_elem[e2]).expect("base has no overflow");
            let cw = coords(&br);
            let mut v = Elem::new();
            let mut overflow = false;
            for (e3, c) in cw.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                match index.get(&(e3, p + q2)) {
                    Some(&k) => add_scaled(&mut v, &basis_elem(k), c),
                    None => overflow = true,
                }
            }
            if p + q2 == 0 {
                let f = base.form(&eig_elem[e1], &eig_elem[e2]);
                add_scaled(&mut v, &basis_elem(c_idx), &(ci(p) * f.clone()));
                alg.set_form(i1, i2, f);
            }
            if overflow {
                alg.mark_overflow(i1, i2);
            } else {
                alg.set_bracket(i1, i2, v);
            }
        }
        alg.set_bracket(d_idx, i1, [(i1, ci(p))].into());
        alg.set_bracket(i1, d_idx, [(i1, ci(-p))].into());
    }
    alg.set_form(c_idx, d_idx, ci(1));
    alg.set_form(d_idx, c_idx, ci(1));
    alg.cartan = vec![c_idx, d_idx];
    Ok(alg)
}

/// `([x,y],z) = (x,[y,z])` on basis triples; returns failing triples.
pub fn form_invariance_check(alg: &GradedSuperAlgebra, window: i64) -> (usize, Vec<Violation>) {
    let idx = in_window(alg, window);
    let mut checked = 0;
    let mut bad = Vec::new();
    for &x in &idx {
        for &y in &idx {
            let Some(xy) = alg.bracket_entry(x, y) else { continue };
            for &z in &idx {
                let Some(yz) = alg.bracket_entry(y, z) else { continue };
                checked += 1;
                let l = alg.form(&xy, &basis_elem(z));
                let r = alg.form(&basis_elem(x), &yz);
                if l != r {
                    bad.push(Violation {
                        triple: [x, y, z].iter().map(|&i| alg.basis[i].label.clone()).collect(),
                        residual: c_to_string(&(l - r)),
                    });
                }
            }
        }
    }
    (checked, bad)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CentralityEntry {
    pub candidate: String,
    pub central: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

/// Whether each candidate brackets to zero with every basis element of
/// degree at most `window`.
pub fn centrality_check(alg: &GradedSuperAlgebra, candidates: &[Elem], window: i64) -> Result<Vec<CentralityEntry>, QuadError> {
    let idx = in_window(alg, window);
    let mut out = Vec::new();
    for x in candidates {
        if let Some(&i) = x.keys().find(|&&i| i >= alg.dim()) {
            return Err(QuadError::OutsideBasis(i));
        }
        let mut witness = None;
        for &b in &idx {
            match alg.bracket(x, &basis_elem(b)) {
                Some(v) if v.is_empty() => {}
                Some(v) => {
                    witness = Some(format!("[x, {}] = {}", alg.basis[b].label, alg.elem_string(&v)));
                    break;
                }
                None => {}
            }
        }
        out.push(CentralityEntry { candidate: alg.elem_string(x), central: witness.is_none(), witness });
    }
    Ok(out)
}

/// `[d, x] = deg(x)·x` for every basis element; returns failing labels.
pub fn derivation_check(alg: &GradedSuperAlgebra, d: usize) -> Vec<String> {
    (0..alg.dim())
        .filter(|&i| {
            let want: Elem = if alg.basis[i].degree == 0 { Elem::new() } else { [(i, ci(alg.basis[i].degree))].into() };
            alg.bracket_entry(d, i) != Some(want)
        })
        .map(|i| alg.basis[i].label.clone())
        .collect()
}

/// JSON export of structure constants.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StructureJson {
    pub basis: Vec<String>,
    pub brackets: Vec<(usize, usize, usize, String)>,
}

impl GradedSuperAlgebra {
    pub fn to_json(&self) -> StructureJson {
        StructureJson { basis: self.basis.iter().map(|b| b.label.clone()).collect(), brackets: self.structure_constants() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootspace::{qf, Dot, FamilyKind, RootSystem};

    fn get(alg: &GradedSuperAlgebra, a: &str, b: &str) -> Elem {
        alg.bracket_entry(alg.index_of(a).unwrap(), alg.index_of(b).unwrap()).unwrap()
    }

    fn one(alg: &GradedSuperAlgebra, a: &str) -> Elem {
        basis_elem(alg.index_of(a).unwrap())
    }

    #[test]
    fn q_bracket_examples() {
        let alg = q_algebra(8).unwrap();
        assert_eq!(get(&alg, "t^1", "t^1"), one(&alg, "t^2"));
        assert!(get(&alg, "t^1", "t^-1").is_empty());
        assert_eq!(get(&alg, "s^2", "t^-1"), one(&alg, "t^1"));
        assert_eq!(get(&alg, "s^-2", "t^1"), one(&alg, "t^-1"));
        let mut neg = one(&alg, "t^-2");
        neg.values_mut().for_each(|c| *c = -c.clone());
        assert_eq!(get(&alg, "t^-1", "t^-1"), neg);
        assert!(get(&alg, "s^2", "t^2").is_empty());
        assert!(q_algebra(1).is_err());
    }

    #[test]
    fn q_is_a_lie_superalgebra() {
        let alg = q_algebra(12).unwrap();
        let rep = super_jacobi_check(&alg, 12);
        assert!(rep.ok(), "{:?}", &rep.violations[..rep.violations.len().min(3)]);
        assert!(rep.checked_triples > 0 && rep.skipped_triples > 0);
    }

    #[test]
    fn perturbed_coefficient_is_detected() {
        let alg = q_algebra(12).unwrap();
        let (i, j) = (alg.index_of("t^1").unwrap(), alg.index_of("t^1").unwrap());
        let k = alg.index_of("t^2").unwrap();
        let bad = alg.with_entry(i, j, [(k, ci(2))].into());
        // symmetric odd–odd rescaling of a single diagonal entry is detected by Jacobi
        let rep = super_jacobi_check(&bad, 12);
        assert!(!rep.ok());
        for (name, m) in q_mutants(&alg, 12, 5) {
            assert!(!super_jacobi_check(&m, 12).ok(), "missed {name}");
        }
    }

    #[test]
    fn abelian_algebra_passes() {
        let alg = GradedSuperAlgebra::new(
            (0..3).map(|i| BasisElem { label: format!("x{i}"), degree: i, parity: Parity::from_odd(i == 1) }).collect(),
        );
        assert!(super_jacobi_check(&alg, 5).ok());
    }

    #[test]
    fn gl_examples() {
        let g = gl_superalgebra(2, 1);
        let e12 = one(&g, "E12");
        let e21 = one(&g, "E21");
        let comm = g.bracket(&e12, &e21).unwrap();
        let mut want = one(&g, "E11");
        want.insert(g.index_of("E22").unwrap(), ci(-1));
        assert_eq!(comm, want);
        let e13 = one(&g, "E13");
        let e31 = one(&g, "E31");
        assert_eq!(g.form(&e13, &e31), ci(1));
        assert_eq!(g.form(&e31, &e13), ci(-1));
        assert!(g.parity_of(g.index_of("E13").unwrap()).is_odd());
        assert_eq!(gl_root_parity(2, 0, 2), Parity::Odd);
        let rep = super_jacobi_check(&g, 0);
        assert!(rep.ok());
        assert!(form_invariance_check(&g, 0).1.is_empty());
    }

    #[test]
    fn gl_parity_matches_root_table() {
        // mixed ε_i ± δ_p cosets are odd; pure ε or δ differences are even
        let rs = RootSystem::new(FamilyKind::D2, 2, 2).unwrap();
        for d in rs.finite_roots() {
            let support: Vec<usize> = (0..4).filter(|&i| d.0[i] != 0).collect();
            if support.len() != 2 {
                continue;
            }
            let (a, b) = (support[0], support[1]);
            let oracle = gl_root_parity(2, a, b);
            for k in -4..=4 {
                if let Some(p) = rs.parity_dot(&d, k) {
                    assert_eq!(p, oracle, "{:?} at {k}", d);
                }
            }
        }
        let _ = Dot(vec![]);
    }

    fn loop_checks(base: &GradedSuperAlgebra, sigma: &Matrix, l: usize) {
        let alg = loop_algebra(base, sigma, l, 4).unwrap();
        let rep = super_jacobi_check(&alg, 4);
        assert!(rep.ok(), "{:?}", &rep.violations[..rep.violations.len().min(3)]);
        assert!(form_invariance_check(&alg, 4).1.is_empty());
        let c = alg.dim() - 2;
        let d = alg.dim() - 1;
        let cent = centrality_check(&alg, &[basis_elem(c), basis_elem(d)], 4).unwrap();
        assert!(cent[0].central);
        assert!(!cent[1].central && cent[1].witness.is_some());
        assert!(derivation_check(&alg, d).is_empty());
        let dims: usize = eigenspaces(base, sigma, l).iter().map(Vec::len).sum();
        assert_eq!(dims, base.dim());
    }

    #[test]
    fn loop_algebras_over_gl21() {
        let g = gl_superalgebra(2, 1);
        loop_checks(&g, &Matrix::identity(9), 2);
        loop_checks(&g, &Matrix::adjoint_diag(&[ci(1), ci(-1), ci(1)]), 2);
        let i = Complex::new(Q::zero(), Q::one());
        loop_checks(&g, &Matrix::adjoint_diag(&[ci(1), i, ci(1)]), 4);
    }

    #[test]
    fn loop_bracket_formulas() {
        let g = gl_superalgebra(2, 1);
        let alg = loop_algebra(&g, &Matrix::identity(9), 2, 4).unwrap();
        let x = alg.index_of("v1[0]⊗t^2").unwrap();
        let y = alg.index_of("v2[0]⊗t^-2").unwrap();
        let c = alg.dim() - 2;
        let d = alg.dim() - 1;
        // v1 = E12, v2 = E21: [E12⊗t², E21⊗t⁻²] = (E11−E22)⊗1 + 2(E12,E21)c
        let br = alg.bracket(&basis_elem(x), &basis_elem(y)).unwrap();
        assert_eq!(br.get(&c), Some(&ci(2)));
        assert_eq!(br.len(), 3);
        let z = alg.index_of("v1[0]⊗t^4").unwrap();
        assert_eq!(alg.bracket_entry(d, z).unwrap(), [(z, ci(4))].into());
        assert!(alg.bracket_entry(c, z).unwrap().is_empty());
        let bad = Matrix::adjoint_diag(&[ci(1), ci(2), ci(1)]);
        assert!(matches!(loop_algebra(&g, &bad, 2, 4), Err(QuadError::NotAutomorphism(_))));
        let _ = qf(1, 2);
    }

    #[test]
    fn t2_is_central_in_q() {
        let alg = q_algebra(12).unwrap();
        let t2 = one(&alg, "t^2");
        let t1 = one(&alg, "t^1");
        let rep = centrality_check(&alg, &[t2, t1], 12).unwrap();
        assert!(rep[0].central);
        assert!(!rep[1].central);
        assert!(matches!(centrality_check(&alg, &[basis_elem(10_000)], 12), Err(QuadError::OutsideBasis(_))));
    }

    #[test]
    fn ring_round_trip() {
        let c = Complex::new(qf(1, 2), qf(-3, 4));
        assert_eq!(c_from_json(&c_to_json(&c)).unwrap(), c);
        assert_eq!(c_to_string(&c), "1/2-3/4i");
        assert_eq!(c_from_json(&Value::from(3)).unwrap(), ci(3));
    }
}
