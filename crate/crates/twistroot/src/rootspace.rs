//! Weights, the indefinite bilinear form and the four twisted root-system
//! families.
//!
//! A weight lives in the rational span of `ε_1..ε_m`, `δ_1..δ_n` and the null
//! root `δ`. Roots of the twisted families always have integral coordinates,
//! so the membership machinery works on a lattice split [`Dot`] (the finite
//! part) plus an integer `δ`-coefficient.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact rational scalar used throughout the crate.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Renders a rational as `"p/q"` (or `"p"` when integral).
pub fn q_to_string(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn q_from_str(s: &str) -> Result<Q, RootError> {
    let s = s.trim();
    let bad = || RootError::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((a, b)) => {
            let a = BigInt::from_str(a.trim()).map_err(|_| bad())?;
            let b = BigInt::from_str(b.trim()).map_err(|_| bad())?;
            if b.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(a, b))
        }
        None => Ok(Q::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

/// Serde adapter that writes rationals as strings and reads strings or integers.
pub mod qser {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q_to_string(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        value_to_q(&v).map_err(D::Error::custom)
    }

    pub fn value_to_q(v: &serde_json::Value) -> Result<Q, String> {
        match v {
            serde_json::Value::String(s) => q_from_str(s).map_err(|e| e.to_string()),
            serde_json::Value::Number(n) => n
                .as_i64()
                .map(q)
                .ok_or_else(|| format!("non-integral number {n}; use a \"p/q\" string")),
            other => Err(format!("expected rational, found {other}")),
        }
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(xs.len()))?;
            for x in xs {
                seq.serialize_element(&q_to_string(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
            let v = Vec::<serde_json::Value>::deserialize(d)?;
            v.iter()
                .map(|x| value_to_q(x).map_err(D::Error::custom))
                .collect()
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RootError {
    #[error("dimension mismatch: ({0},{1}) vs ({2},{3})")]
    Dimension(usize, usize, usize, usize),
    #[error("invalid family parameters: {0}")]
    BadFamily(String),
    #[error("{0} is not a nonzero finite root")]
    NotFiniteRoot(String),
    #[error("{0} is not a root")]
    NotARoot(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Exact rational vector `Σ a_i ε_i + Σ b_p δ_p + c δ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Weight {
    #[serde(with = "qser::vec")]
    pub eps: Vec<Q>,
    #[serde(with = "qser::vec")]
    pub del: Vec<Q>,
    #[serde(with = "qser")]
    pub delta: Q,
}

impl Weight {
    pub fn zero(m: usize, n: usize) -> Self {
        Weight { eps: vec![Q::zero(); m], del: vec![Q::zero(); n], delta: Q::zero() }
    }

    pub fn eps(m: usize, n: usize, i: usize) -> Self {
        let mut w = Self::zero(m, n);
        w.eps[i] = Q::one();
        w
    }

    pub fn del(m: usize, n: usize, p: usize) -> Self {
        let mut w = Self::zero(m, n);
        w.del[p] = Q::one();
        w
    }

    pub fn null(m: usize, n: usize) -> Self {
        let mut w = Self::zero(m, n);
        w.delta = Q::one();
        w
    }

    pub fn from_ints(eps: &[i64], del: &[i64], delta: i64) -> Self {
        Weight {
            eps: eps.iter().map(|&x| q(x)).collect(),
            del: del.iter().map(|&x| q(x)).collect(),
            delta: q(delta),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.eps.len(), self.del.len())
    }

    fn check(&self, other: &Weight) -> Result<(), RootError> {
        if self.dims() != other.dims() {
            let (a, b) = self.dims();
            let (c, d) = other.dims();
            return Err(RootError::Dimension(a, b, c, d));
        }
        Ok(())
    }

    pub fn scale(&self, c: &Q) -> Weight {
        Weight {
            eps: self.eps.iter().map(|x| x * c).collect(),
            del: self.del.iter().map(|x| x * c).collect(),
            delta: &self.delta * c,
        }
    }

    pub fn try_add(&self, other: &Weight) -> Result<Weight, RootError> {
        self.check(other)?;
        Ok(Weight {
            eps: self.eps.iter().zip(&other.eps).map(|(a, b)| a + b).collect(),
            del: self.del.iter().zip(&other.del).map(|(a, b)| a + b).collect(),
            delta: &self.delta + &other.delta,
        })
    }

    /// The form `(ε_i,ε_j)=δ_ij`, `(δ_p,δ_q)=-δ_pq`, `δ` orthogonal to everything.
    pub fn form(&self, other: &Weight) -> Result<Q, RootError> {
        self.check(other)?;
        let mut acc = Q::zero();
        for (a, b) in self.eps.iter().zip(&other.eps) {
            acc += a * b;
        }
        for (a, b) in self.del.iter().zip(&other.del) {
            acc -= a * b;
        }
        Ok(acc)
    }

    /// The finite part (drops the `δ` coefficient).
    pub fn finite(&self) -> Weight {
        Weight { eps: self.eps.clone(), del: self.del.clone(), delta: Q::zero() }
    }

    /// Integral coordinates as a lattice point, if every coefficient is an integer.
    pub fn to_lattice(&self) -> Option<(Dot, i64)> {
        let mut c = Vec::with_capacity(self.eps.len() + self.del.len());
        for x in self.eps.iter().chain(&self.del) {
            if !x.is_integer() {
                return None;
            }
            c.push(x.to_integer().to_i64()?);
        }
        if !self.delta.is_integer() {
            return None;
        }
        Some((Dot(c), self.delta.to_integer().to_i64()?))
    }

    pub fn from_lattice(m: usize, d: &Dot, k: i64) -> Weight {
        Weight {
            eps: d.0[..m].iter().map(|&x| q(x)).collect(),
            del: d.0[m..].iter().map(|&x| q(x)).collect(),
            delta: q(k),
        }
    }
}

impl Add for &Weight {
    type Output = Weight;
    fn add(self, o: &Weight) -> Weight {
        self.try_add(o).expect("weight dimension mismatch")
    }
}

impl Sub for &Weight {
    type Output = Weight;
    fn sub(self, o: &Weight) -> Weight {
        self.try_add(&-o).expect("weight dimension mismatch")
    }
}

impl Neg for &Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        self.scale(&-Q::one())
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        let mut push = |c: &Q, name: String| {
            if c.is_zero() {
                return;
            }
            let s = if c.is_one() {
                name
            } else if *c == -Q::one() {
                format!("-{name}")
            } else {
                format!("{}{}", q_to_string(c), name)
            };
            terms.push(s);
        };
        for (i, c) in self.eps.iter().enumerate() {
            push(c, format!("e{}", i + 1));
        }
        for (p, c) in self.del.iter().enumerate() {
            push(c, format!("d{}", p + 1));
        }
        push(&self.delta, "delta".to_string());
        if terms.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", terms.join("+").replace("+-", "-"))
    }
}

/// Integral finite part `α̇`: the first `m` entries are `ε`-coefficients, the
/// remaining `n` are `δ_p`-coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dot(pub Vec<i64>);

impl Dot {
    pub fn zero(dim: usize) -> Dot {
        Dot(vec![0; dim])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn neg(&self) -> Dot {
        Dot(self.0.iter().map(|x| -x).collect())
    }

    pub fn add(&self, o: &Dot) -> Dot {
        Dot(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &Dot) -> Dot {
        Dot(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: i64) -> Dot {
        Dot(self.0.iter().map(|x| x * c).collect())
    }

    /// Exact division by `c`, if every coordinate is divisible.
    pub fn div_exact(&self, c: i64) -> Option<Dot> {
        if self.0.iter().all(|x| x % c == 0) {
            Some(Dot(self.0.iter().map(|x| x / c).collect()))
        } else {
            None
        }
    }

    /// Canonical representative of `{α̇, -α̇}`: first nonzero coordinate positive.
    pub fn is_positive_rep(&self) -> bool {
        self.0.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FamilyKind {
    /// `A(2m,2n-1)^(2)`
    AEvenOdd2,
    /// `A(2m-1,2n-1)^(2)`
    AOddOdd2,
    /// `A(2m,2n)^(4)`
    AEvenEven4,
    /// `D(m+1,n)^(2)`
    D2,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 4] =
        [FamilyKind::AEvenOdd2, FamilyKind::AOddOdd2, FamilyKind::AEvenEven4, FamilyKind::D2];

    pub fn label(self) -> &'static str {
        match self {
            FamilyKind::AEvenOdd2 => "A2m,2n-1^2",
            FamilyKind::AOddOdd2 => "A2m-1,2n-1^2",
            FamilyKind::AEvenEven4 => "A2m,2n^4",
            FamilyKind::D2 => "Dm+1,n^2",
        }
    }

    pub fn admissible(self, m: usize, n: usize) -> bool {
        match self {
            FamilyKind::AEvenOdd2 | FamilyKind::D2 => n != 0,
            FamilyKind::AOddOdd2 => m > 0 && n > 0 && (m, n) != (1, 1),
            FamilyKind::AEvenEven4 => (m, n) != (0, 0),
        }
    }
}

impl FromStr for FamilyKind {
    type Err = RootError;
    fn from_str(s: &str) -> Result<Self, RootError> {
        let norm: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match norm.as_str() {
            "A2m,2n-1^2" | "A-even-odd-2" | "AEvenOdd2" => Ok(FamilyKind::AEvenOdd2),
            "A2m-1,2n-1^2" | "A-odd-odd-2" | "AOddOdd2" => Ok(FamilyKind::AOddOdd2),
            "A2m,2n^4" | "A-even-even-4" | "AEvenEven4" => Ok(FamilyKind::AEvenEven4),
            "Dm+1,n^2" | "D-2" | "D2" => Ok(FamilyKind::D2),
            _ => Err(RootError::Parse(format!("unknown family {s:?}"))),
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FamilyId {
    pub kind: FamilyKind,
    pub m: usize,
    pub n: usize,
}

impl FamilyId {
    pub fn new(kind: FamilyKind, m: usize, n: usize) -> Result<Self, RootError> {
        if !kind.admissible(m, n) {
            return Err(RootError::BadFamily(format!("{kind} with m={m}, n={n}")));
        }
        Ok(FamilyId { kind, m, n })
    }
}

/// Shape of a finite part, up to the sign pattern that Table 1 rows quantify over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    Zero,
    /// `±ε_i`
    E,
    /// `±δ_p`
    D,
    /// `±2ε_i`
    TwoE,
    /// `±2δ_p`
    TwoD,
    /// `±ε_i±ε_j`, `i≠j`
    EE,
    /// `±δ_p±δ_q`, `p≠q`
    DD,
    /// `±ε_i±δ_p`
    ED,
}

impl Shape {
    pub fn of(m: usize, d: &Dot) -> Option<Shape> {
        let (e, dl) = d.0.split_at(m);
        let nz = |v: &[i64]| v.iter().filter(|&&x| x != 0).copied().collect::<Vec<_>>();
        let (ne, nd) = (nz(e), nz(dl));
        let unit = |v: &[i64]| v.iter().all(|x| x.abs() == 1);
        match (ne.len(), nd.len()) {
            (0, 0) => Some(Shape::Zero),
            (1, 0) if unit(&ne) => Some(Shape::E),
            (1, 0) if ne[0].abs() == 2 => Some(Shape::TwoE),
            (0, 1) if unit(&nd) => Some(Shape::D),
            (0, 1) if nd[0].abs() == 2 => Some(Shape::TwoD),
            (2, 0) if unit(&ne) => Some(Shape::EE),
            (0, 2) if unit(&nd) => Some(Shape::DD),
            (1, 1) if unit(&ne) && unit(&nd) => Some(Shape::ED),
            _ => None,
        }
    }
}

/// Parity rule of a `δ`-coset: constant, or depending on `k mod 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParityRule {
    Even,
    Odd,
    /// Odd part is `α̇+(2ℤ+1)δ`.
    OddOnOddK,
    /// Odd part is `α̇+2ℤδ`.
    OddOnEvenK,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }
    pub fn from_odd(odd: bool) -> Parity {
        if odd {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

impl std::ops::Add for Parity {
    type Output = Parity;

    fn add(self, o: Parity) -> Parity {
        Parity::from_odd(self.is_odd() != o.is_odd())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RootClass {
    Real,
    Nonsingular,
    Imaginary,
    NotARoot,
}

/// `(period, residue)` of the `k`-set of each shape, straight from Table 1.
fn table1_row(kind: FamilyKind, s: Shape) -> Option<(i64, i64)> {
    use FamilyKind::*;
    use Shape::*;
    match (kind, s) {
        (_, Zero) => Some((1, 0)),
        (AEvenOdd2, E | D | EE | DD | ED) => Some((1, 0)),
        (AEvenOdd2, TwoE) => Some((2, 1)),
        (AEvenOdd2, TwoD) => Some((2, 0)),
        (AOddOdd2, EE | DD | ED) => Some((1, 0)),
        (AOddOdd2, TwoE) => Some((2, 1)),
        (AOddOdd2, TwoD) => Some((2, 0)),
        (AOddOdd2, E | D) => None,
        (AEvenEven4, E | D) => Some((1, 0)),
        (AEvenEven4, EE | DD | ED) => Some((2, 0)),
        (AEvenEven4, TwoE) => Some((4, 2)),
        (AEvenEven4, TwoD) => Some((4, 0)),
        (D2, E | D) => Some((1, 0)),
        (D2, TwoD | EE | DD | ED) => Some((2, 0)),
        (D2, TwoE) => None,
    }
}

/// Parity of each coset. The odd cosets follow the block structure of the
/// matrix realizations (`ε_i±δ_p` always odd); see `quadratic::gl_root_parity`.
fn parity_rule(kind: FamilyKind, s: Shape) -> ParityRule {
    use FamilyKind::*;
    use Shape::*;
    match (kind, s) {
        (_, ED) => ParityRule::Odd,
        (AEvenOdd2, D) => ParityRule::Odd,
        (D2, D) => ParityRule::Odd,
        (AEvenEven4, Zero | E) => ParityRule::OddOnOddK,
        (AEvenEven4, D) => ParityRule::OddOnEvenK,
        _ => ParityRule::Even,
    }
}

/// One of the four twisted families with fixed `(m, n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RootSystem {
    pub family: FamilyId,
}

impl RootSystem {
    pub fn new(kind: FamilyKind, m: usize, n: usize) -> Result<Self, RootError> {
        Ok(RootSystem { family: FamilyId::new(kind, m, n)? })
    }

    pub fn kind(&self) -> FamilyKind {
        self.family.kind
    }
    pub fn m(&self) -> usize {
        self.family.m
    }
    pub fn n(&self) -> usize {
        self.family.n
    }
    pub fn dim(&self) -> usize {
        self.family.m + self.family.n
    }

    pub fn shape(&self, d: &Dot) -> Option<Shape> {
        if d.0.len() != self.dim() {
            return None;
        }
        Shape::of(self.m(), d)
    }

    /// `(period, residue)` of `{k : α̇+kδ ∈ R}`, or `None` when `α̇ ∉ Ṙ`.
    pub fn string(&self, d: &Dot) -> Option<(i64, i64)> {
        let s = self.shape(d)?;
        table1_row(self.kind(), s)
    }

    pub fn contains_dot(&self, d: &Dot, k: i64) -> bool {
        match self.string(d) {
            Some((p, c)) => (k - c).rem_euclid(p) == 0,
            None => false,
        }
    }

    pub fn contains(&self, w: &Weight) -> bool {
        if w.dims() != (self.m(), self.n()) {
            return false;
        }
        match w.to_lattice() {
            Some((d, k)) => self.contains_dot(&d, k),
            None => false,
        }
    }

    pub fn form_dot(&self, a: &Dot, b: &Dot) -> i64 {
        let m = self.m();
        a.0.iter()
            .zip(&b.0)
            .enumerate()
            .map(|(i, (x, y))| if i < m { x * y } else { -x * y })
            .sum()
    }

    pub fn classify_dot(&self, d: &Dot, k: i64) -> RootClass {
        if !self.contains_dot(d, k) {
            RootClass::NotARoot
        } else if d.is_zero() {
            RootClass::Imaginary
        } else if self.form_dot(d, d) != 0 {
            RootClass::Real
        } else {
            RootClass::Nonsingular
        }
    }

    pub fn classify(&self, w: &Weight) -> RootClass {
        match w.to_lattice() {
            Some((d, k)) if w.dims() == (self.m(), self.n()) => self.classify_dot(&d, k),
            _ => RootClass::NotARoot,
        }
    }

    /// `(r, k)` with `(α̇+ℤδ)∩R = α̇+kδ+rℤδ`, read off from membership.
    pub fn string_data_dot(&self, d: &Dot) -> Result<(i64, i64), RootError> {
        let fail = || RootError::NotFiniteRoot(format!("{}", Weight::from_lattice(self.m(), d, 0)));
        if d.is_zero() || self.string(d).is_none() {
            return Err(fail());
        }
        let pattern: Vec<bool> = (0..8).map(|k| self.contains_dot(d, k)).collect();
        for r in [1i64, 2, 4] {
            let periodic = (0..8 - r as usize).all(|k| pattern[k] == pattern[k + r as usize]);
            if periodic {
                let k = (0..r).find(|&k| pattern[k as usize]).ok_or_else(fail)?;
                return Ok((r, k));
            }
        }
        Err(fail())
    }

    pub fn string_data(&self, a_dot: &Weight) -> Result<(i64, i64), RootError> {
        let fail = || RootError::NotFiniteRoot(a_dot.to_string());
        if !a_dot.delta.is_zero() || a_dot.dims() != (self.m(), self.n()) {
            return Err(fail());
        }
        let (d, _) = a_dot.to_lattice().ok_or_else(fail)?;
        self.string_data_dot(&d)
    }

    /// `Ṙ`, including `0`, in canonical order.
    pub fn finite_roots(&self) -> BTreeSet<Dot> {
        let (m, dim) = (self.m(), self.dim());
        let mut out = BTreeSet::new();
        out.insert(Dot::zero(dim));
        let mut put = |entries: &[(usize, i64)]| {
            let mut v = vec![0; dim];
            for &(i, c) in entries {
                v[i] += c;
            }
            let d = Dot(v);
            if self.string(&d).is_some() {
                out.insert(d);
            }
        };
        for a in 0..dim {
            for s in [1, -1, 2, -2] {
                put(&[(a, s)]);
            }
            for b in 0..dim {
                if a == b {
                    continue;
                }
                for s in [1, -1] {
                    for t in [1, -1] {
                        put(&[(a, s), (b, t)]);
                    }
                }
            }
        }
        let _ = m;
        out
    }

    pub fn real_finite_roots(&self) -> BTreeSet<Dot> {
        self.finite_roots().into_iter().filter(|d| self.form_dot(d, d) != 0).collect()
    }

    pub fn ns_finite_roots(&self) -> BTreeSet<Dot> {
        self.finite_roots()
            .into_iter()
            .filter(|d| !d.is_zero() && self.form_dot(d, d) == 0)
            .collect()
    }

    pub fn kappa(&self) -> i64 {
        if self.kind() == FamilyKind::AOddOdd2 {
            2
        } else {
            1
        }
    }

    pub fn parity_rule(&self, d: &Dot) -> Option<ParityRule> {
        self.shape(d).map(|s| parity_rule(self.kind(), s))
    }

    pub fn parity_dot(&self, d: &Dot, k: i64) -> Option<Parity> {
        if !self.contains_dot(d, k) {
            return None;
        }
        let odd_k = k.rem_euclid(2) == 1;
        Some(match self.parity_rule(d)? {
            ParityRule::Even => Parity::Even,
            ParityRule::Odd => Parity::Odd,
            ParityRule::OddOnOddK => Parity::from_odd(odd_k),
            ParityRule::OddOnEvenK => Parity::from_odd(!odd_k),
        })
    }

    pub fn parity(&self, w: &Weight) -> Result<Parity, RootError> {
        let (d, k) = w.to_lattice().ok_or_else(|| RootError::NotARoot(w.to_string()))?;
        self.parity_dot(&d, k).ok_or_else(|| RootError::NotARoot(w.to_string()))
    }

    /// Every root with `|k| ≤ depth`, in canonical order.
    pub fn enumerate(&self, depth: i64) -> Vec<(Dot, i64)> {
        let mut out = Vec::new();
        for d in self.finite_roots() {
            for k in -depth..=depth {
                if self.contains_dot(&d, k) {
                    out.push((d.clone(), k));
                }
            }
        }
        out
    }

    pub fn weight(&self, d: &Dot, k: i64) -> Weight {
        Weight::from_lattice(self.m(), d, k)
    }

    pub fn dot_string(&self, d: &Dot) -> String {
        self.weight(d, 0).to_string()
    }
}

/// The sets `Ṙ_re` and `Ṙ_ns` listed verbatim per family (an independent
/// transcription used to cross-check the membership predicate).
pub fn table2(kind: FamilyKind, m: usize, n: usize) -> (BTreeSet<Dot>, BTreeSet<Dot>) {
    let dim = m + n;
    let unit = |i: usize, c: i64| {
        let mut v = vec![0; dim];
        v[i] = c;
        Dot(v)
    };
    let mut re = BTreeSet::new();
    let mut ns = BTreeSet::new();
    let short = !matches!(kind, FamilyKind::AOddOdd2);
    let long_e = !matches!(kind, FamilyKind::D2);
    for s in [1, -1] {
        for i in 0..m {
            if short {
                re.insert(unit(i, s));
            }
            if long_e {
                re.insert(unit(i, 2 * s));
            }
        }
        for p in 0..n {
            if short {
                re.insert(unit(m + p, s));
            }
            re.insert(unit(m + p, 2 * s));
        }
    }
    for (lo, hi) in [(0, m), (m, m + n)] {
        for a in lo..hi {
            for b in lo..hi {
                if a != b {
                    for s in [1, -1] {
                        for t in [1, -1] {
                            re.insert(unit(a, s).add(&unit(b, t)));
                        }
                    }
                }
            }
        }
    }
    for i in 0..m {
        for p in 0..n {
            for s in [1, -1] {
                for t in [1, -1] {
                    ns.insert(unit(i, s).add(&unit(m + p, t)));
                }
            }
        }
    }
    (re, ns)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rs(kind: FamilyKind, m: usize, n: usize) -> RootSystem {
        RootSystem::new(kind, m, n).unwrap()
    }

    #[test]
    fn form_examples() {
        let e1 = Weight::eps(1, 1, 0);
        let d1 = Weight::del(1, 1, 0);
        let dl = Weight::null(1, 1);
        assert_eq!(e1.form(&e1).unwrap(), q(1));
        assert_eq!(d1.form(&d1).unwrap(), q(-1));
        let s = &e1 + &d1;
        assert_eq!(s.form(&s).unwrap(), q(0));
        let w = &e1 + &dl.scale(&q(3));
        assert_eq!(dl.form(&w).unwrap(), q(0));
        assert!(e1.form(&Weight::zero(2, 1)).is_err());
    }

    #[test]
    fn contains_examples() {
        let r = rs(FamilyKind::AEvenOdd2, 1, 1);
        assert!(r.contains(&Weight::from_ints(&[1], &[0], 5)));
        assert!(!r.contains(&Weight::from_ints(&[2], &[0], 2)));
        assert!(r.contains(&Weight::from_ints(&[0], &[2], 2)));
        let half = Weight { eps: vec![qf(1, 2)], del: vec![q(0)], delta: q(0) };
        assert!(!r.contains(&half));
    }

    #[test]
    fn classify_examples() {
        let r = rs(FamilyKind::AEvenOdd2, 1, 1);
        assert_eq!(r.classify(&Weight::from_ints(&[2], &[0], 1)), RootClass::Real);
        assert_eq!(r.classify(&Weight::from_ints(&[0], &[0], 3)), RootClass::Imaginary);
        assert_eq!(r.classify(&Weight::zero(1, 1)), RootClass::Imaginary);
        let d = rs(FamilyKind::D2, 1, 1);
        assert_eq!(d.classify(&Weight::from_ints(&[1], &[1], 0)), RootClass::Nonsingular);
        assert_eq!(d.classify(&Weight::from_ints(&[1], &[1], 1)), RootClass::NotARoot);
    }

    #[test]
    fn string_data_examples() {
        let r = rs(FamilyKind::AEvenEven4, 1, 1);
        assert_eq!(r.string_data(&Weight::from_ints(&[2], &[0], 0)).unwrap(), (4, 2));
        assert_eq!(r.string_data(&Weight::from_ints(&[1], &[0], 0)).unwrap(), (1, 0));
        assert_eq!(r.string_data(&Weight::from_ints(&[0], &[2], 0)).unwrap(), (4, 0));
        assert!(r.string_data(&Weight::zero(1, 1)).is_err());
        assert!(r.string_data(&Weight::from_ints(&[3], &[0], 0)).is_err());
    }

    #[test]
    fn finite_roots_examples() {
        let r = rs(FamilyKind::AEvenOdd2, 1, 1);
        let got: BTreeSet<Dot> = r.finite_roots();
        let mut want = BTreeSet::new();
        for v in [[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1], [2, 0], [-2, 0], [0, 2], [0, -2]] {
            want.insert(Dot(v.to_vec()));
        }
        for s in [1, -1] {
            for t in [1, -1] {
                want.insert(Dot(vec![s, t]));
            }
        }
        assert_eq!(got, want);

        let d = rs(FamilyKind::D2, 1, 1);
        let got = d.finite_roots();
        assert_eq!(got.len(), 1 + 2 + 2 + 2 + 4);
        assert!(!got.contains(&Dot(vec![2, 0])));

        let a = rs(FamilyKind::AOddOdd2, 2, 1);
        let got = a.finite_roots();
        assert_eq!(got.len(), 1 + 4 + 4 + 2 + 8);
        assert!(!got.contains(&Dot(vec![1, 0, 0])));
    }

    #[test]
    fn parity_examples() {
        let d = rs(FamilyKind::D2, 1, 1);
        assert_eq!(d.parity(&Weight::from_ints(&[1], &[1], 2)).unwrap(), Parity::Odd);
        assert_eq!(d.parity(&Weight::from_ints(&[0], &[2], 2)).unwrap(), Parity::Even);
        for k in -3..=3 {
            assert_eq!(d.parity(&Weight::from_ints(&[0], &[0], k)).unwrap(), Parity::Even);
        }
        assert!(d.parity(&Weight::from_ints(&[2], &[0], 0)).is_err());
        let a4 = rs(FamilyKind::AEvenEven4, 1, 1);
        assert_eq!(a4.parity(&Weight::from_ints(&[0], &[0], 2)).unwrap(), Parity::Even);
        assert_eq!(a4.parity(&Weight::from_ints(&[0], &[0], 1)).unwrap(), Parity::Odd);
    }

    #[test]
    fn family_parsing_and_constraints() {
        for k in FamilyKind::ALL {
            assert_eq!(k.label().parse::<FamilyKind>().unwrap(), k);
        }
        assert!(RootSystem::new(FamilyKind::AOddOdd2, 1, 1).is_err());
        assert!(RootSystem::new(FamilyKind::AEvenOdd2, 2, 0).is_err());
        assert!(RootSystem::new(FamilyKind::AEvenEven4, 0, 0).is_err());
        assert!(RootSystem::new(FamilyKind::D2, 3, 0).is_err());
        assert!(RootSystem::new(FamilyKind::AEvenEven4, 1, 0).is_ok());
    }

    #[test]
    fn rational_strings_round_trip() {
        for s in ["3/4", "-7/2", "5", "0"] {
            assert_eq!(q_to_string(&q_from_str(s).unwrap()), s);
        }
        assert!(q_from_str("1/0").is_err());
        let w = Weight { eps: vec![qf(1, 2)], del: vec![q(-3)], delta: q(2) };
        let js = serde_json::to_string(&w).unwrap();
        assert_eq!(js, r#"{"eps":["1/2"],"del":["-3"],"delta":"2"}"#);
        let back: Weight = serde_json::from_str(&js).unwrap();
        assert_eq!(back, w);
        let ints: Weight = serde_json::from_str(r#"{"eps":[1],"del":[0],"delta":4}"#).unwrap();
        assert_eq!(ints, Weight::from_ints(&[1], &[0], 4));
    }

    #[test]
    fn doubled_odd_real_roots_are_even() {
        for kind in FamilyKind::ALL {
            for (m, n) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
                let Ok(r) = RootSystem::new(kind, m, n) else { continue };
                for (d, k) in r.enumerate(6) {
                    if r.form_dot(&d, &d) == 0 || r.parity_dot(&d, k) != Some(Parity::Odd) {
                        continue;
                    }
                    let (dd, kk) = (d.scale(2), 2 * k);
                    if r.contains_dot(&dd, kk) {
                        assert_eq!(r.parity_dot(&dd, kk), Some(Parity::Even), "{kind:?} {d:?} {k}");
                    }
                }
            }
        }
    }

    #[test]
    fn odd_real_cosets_have_allowed_shapes() {
        for kind in FamilyKind::ALL {
            let r = rs(kind, 2, 2);
            for d in r.real_finite_roots() {
                let odd: Vec<bool> = (0..4)
                    .map(|k| r.parity_dot(&d, k) == Some(Parity::Odd))
                    .collect();
                let members: Vec<bool> = (0..4).map(|k| r.contains_dot(&d, k)).collect();
                let odd_on = |keep: &dyn Fn(i64) -> bool| {
                    (0..4).all(|k| odd[k as usize] == (members[k as usize] && keep(k)))
                };
                let ok = odd_on(&|_| false)
                    || odd_on(&|_| true)
                    || odd_on(&|k| k % 2 == 0)
                    || odd_on(&|k| k % 2 == 1);
                assert!(ok, "{kind:?} {d:?}");
            }
        }
    }
}
