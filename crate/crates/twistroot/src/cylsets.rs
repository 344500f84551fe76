//! Finite descriptions of `δ`-periodic subsets of a root system.
//!
//! A [`ZSet`] is an eventually periodic set of integers in both directions; a
//! [`CylinderSet`] attaches one `ZSet` (the admissible `k`) to each finite root
//! `α̇`, describing `{α̇+kδ}`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rootspace::{Dot, RootClass, RootSystem, Weight};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SetError {
    #[error("root systems differ")]
    RootSystemMismatch,
    #[error("malformed component: {0}")]
    Malformed(String),
}

/// One piece of the union-of-components view of a [`ZSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Piece {
    Point(i64),
    /// `{offset + j·period : j ∈ ℤ}`
    Prog(i64, i64),
    /// `{start + j·period : j ≥ 0}`
    Up(i64, i64),
    /// `{end - j·period : j ≥ 0}`
    Down(i64, i64),
}

/// Eventually periodic subset of `ℤ`, kept in a canonical form.
///
/// For `k ≥ a` membership is `above[k mod p]`, for `k ≤ b` it is
/// `below[k mod p]`, and in between it is `mid[k-b-1]`. A purely periodic set
/// has `above == below`, `b = -1`, `a = 0`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ZSet {
    p: i64,
    above: Vec<bool>,
    below: Vec<bool>,
    a: i64,
    b: i64,
    mid: Vec<bool>,
}

fn minimal_period(pat: &[bool]) -> usize {
    let n = pat.len();
    (1..=n).find(|&d| n.is_multiple_of(d) && (0..n).all(|i| pat[i] == pat[i % d])).unwrap_or(n)
}

impl ZSet {
    /// Builds a set from a predicate that is `period`-periodic on `k < lo` and
    /// on `k > hi` (separately).
    pub fn tabulate(period: i64, lo: i64, hi: i64, f: impl Fn(i64) -> bool) -> ZSet {
        assert!(period >= 1);
        let hi = hi.max(lo - 1);
        let up_base = hi + 1;
        let down_base = lo - period;
        let above_raw: Vec<bool> = (0..period)
            .map(|r| f(up_base + (r - up_base).rem_euclid(period)))
            .collect();
        let below_raw: Vec<bool> = (0..period)
            .map(|r| f(down_base + (r - down_base).rem_euclid(period)))
            .collect();
        let pa = minimal_period(&above_raw) as i64;
        let pb = minimal_period(&below_raw) as i64;
        let p = pa.lcm(&pb);
        let above: Vec<bool> = (0..p).map(|r| above_raw[r as usize]).collect();
        let below: Vec<bool> = (0..p).map(|r| below_raw[r as usize]).collect();
        let at = |pat: &[bool], k: i64| pat[k.rem_euclid(p) as usize];

        if above == below && (lo..=hi).all(|k| f(k) == at(&above, k)) {
            return ZSet { p, below: above.clone(), above, a: 0, b: -1, mid: Vec::new() };
        }
        let mut a = hi + 1;
        while a > lo - p && f(a - 1) == at(&above, a - 1) {
            a -= 1;
        }
        let mut b = lo - 1;
        while b < hi + p && f(b + 1) == at(&below, b + 1) {
            b += 1;
        }
        let mid = if a > b + 1 { (b + 1..a).map(&f).collect() } else { Vec::new() };
        ZSet { p, above, below, a, b, mid }
    }

    pub fn empty() -> ZSet {
        ZSet::tabulate(1, 0, -1, |_| false)
    }

    pub fn all() -> ZSet {
        ZSet::tabulate(1, 0, -1, |_| true)
    }

    pub fn point(k: i64) -> ZSet {
        ZSet::tabulate(1, k, k, move |x| x == k)
    }

    pub fn points(ks: &[i64]) -> ZSet {
        let lo = ks.iter().copied().min().unwrap_or(0);
        let hi = ks.iter().copied().max().unwrap_or(-1);
        let set: BTreeSet<i64> = ks.iter().copied().collect();
        ZSet::tabulate(1, lo, hi, move |x| set.contains(&x))
    }

    pub fn prog(offset: i64, period: i64) -> ZSet {
        ZSet::tabulate(period, 0, -1, move |x| (x - offset).rem_euclid(period) == 0)
    }

    pub fn up(start: i64, period: i64) -> ZSet {
        ZSet::tabulate(period, start, start, move |x| {
            x >= start && (x - start).rem_euclid(period) == 0
        })
    }

    pub fn down(end: i64, period: i64) -> ZSet {
        ZSet::tabulate(period, end, end, move |x| x <= end && (end - x).rem_euclid(period) == 0)
    }

    /// `{k ≥ start}`
    pub fn at_least(start: i64) -> ZSet {
        ZSet::up(start, 1)
    }

    /// `{k ≤ end}`
    pub fn at_most(end: i64) -> ZSet {
        ZSet::down(end, 1)
    }

    pub fn from_pieces(pieces: &[Piece]) -> ZSet {
        let mut acc = ZSet::empty();
        let mut pts = Vec::new();
        for pc in pieces {
            match *pc {
                Piece::Point(k) => pts.push(k),
                Piece::Prog(o, p) => acc = acc.union(&ZSet::prog(o, p)),
                Piece::Up(s, p) => acc = acc.union(&ZSet::up(s, p)),
                Piece::Down(e, p) => acc = acc.union(&ZSet::down(e, p)),
            }
        }
        acc.union(&ZSet::points(&pts))
    }

    pub fn contains(&self, k: i64) -> bool {
        if k >= self.a {
            self.above[k.rem_euclid(self.p) as usize]
        } else if k <= self.b {
            self.below[k.rem_euclid(self.p) as usize]
        } else {
            self.mid[(k - self.b - 1) as usize]
        }
    }

    pub fn period(&self) -> i64 {
        self.p
    }

    pub fn is_pure(&self) -> bool {
        self.a == 0 && self.b == -1 && self.above == self.below
    }

    /// Largest absolute coordinate where the description changes behaviour.
    pub fn boundary(&self) -> i64 {
        if self.is_pure() {
            0
        } else {
            self.a.abs().max(self.b.abs())
        }
    }

    /// `(lo, hi)` such that outside `[lo, hi]` the set is periodic on each side.
    fn window(&self) -> (i64, i64) {
        if self.is_pure() {
            (0, -1)
        } else {
            (self.b.min(self.a) - self.p, self.a.max(self.b) + self.p)
        }
    }

    fn combine(&self, o: &ZSet, f: impl Fn(bool, bool) -> bool) -> ZSet {
        let (l1, h1) = self.window();
        let (l2, h2) = o.window();
        let p = self.p.lcm(&o.p);
        ZSet::tabulate(p, l1.min(l2), h1.max(h2), |k| f(self.contains(k), o.contains(k)))
    }

    pub fn union(&self, o: &ZSet) -> ZSet {
        self.combine(o, |x, y| x || y)
    }

    pub fn intersect(&self, o: &ZSet) -> ZSet {
        self.combine(o, |x, y| x && y)
    }

    pub fn difference(&self, o: &ZSet) -> ZSet {
        self.combine(o, |x, y| x && !y)
    }

    pub fn complement(&self) -> ZSet {
        let (lo, hi) = self.window();
        ZSet::tabulate(self.p, lo, hi, |k| !self.contains(k))
    }

    pub fn negate(&self) -> ZSet {
        let (lo, hi) = self.window();
        ZSet::tabulate(self.p, -hi, -lo, |k| self.contains(-k))
    }

    pub fn shift(&self, s: i64) -> ZSet {
        let (lo, hi) = self.window();
        ZSet::tabulate(self.p, lo + s, hi + s, |k| self.contains(k - s))
    }

    /// `{k : c·k ∈ self}` for `c > 0`.
    pub fn preimage_scale(&self, c: i64) -> ZSet {
        assert!(c > 0);
        let (lo, hi) = self.window();
        ZSet::tabulate(self.p, lo.div_euclid(c) - 1, hi.div_euclid(c) + 2, |k| {
            self.contains(c * k)
        })
    }

    pub fn is_empty(&self) -> bool {
        self.is_pure() && self.above.iter().all(|x| !x)
            || (!self.above.iter().any(|&x| x)
                && !self.below.iter().any(|&x| x)
                && !self.mid.iter().any(|&x| x))
    }

    pub fn is_finite(&self) -> bool {
        !self.above.iter().any(|&x| x) && !self.below.iter().any(|&x| x)
    }

    pub fn is_bounded_above(&self) -> bool {
        !self.above.iter().any(|&x| x)
    }

    pub fn is_bounded_below(&self) -> bool {
        !self.below.iter().any(|&x| x)
    }

    pub fn is_subset(&self, o: &ZSet) -> bool {
        self.difference(o).is_empty()
    }

    pub fn min(&self) -> Option<i64> {
        if !self.is_bounded_below() || self.is_empty() {
            return None;
        }
        let (lo, hi) = self.window();
        let top = hi + self.p;
        (lo..=top).find(|&k| self.contains(k))
    }

    pub fn max(&self) -> Option<i64> {
        if !self.is_bounded_above() || self.is_empty() {
            return None;
        }
        let (lo, hi) = self.window();
        let bottom = lo - self.p;
        (bottom..=hi).rev().find(|&k| self.contains(k))
    }

    /// Members in `[lo, hi]`.
    pub fn members_in(&self, lo: i64, hi: i64) -> Vec<i64> {
        (lo..=hi).filter(|&k| self.contains(k)).collect()
    }

    /// Members of a finite set.
    pub fn finite_members(&self) -> Option<Vec<i64>> {
        if !self.is_finite() {
            return None;
        }
        let (lo, hi) = self.window();
        Some(self.members_in(lo, hi))
    }

    /// Union-of-components view with progressions, rays and points.
    pub fn pieces(&self) -> Vec<Piece> {
        let p = self.p;
        let (lo, hi) = self.window();
        let mut out = Vec::new();
        for r in 0..p {
            let first = lo + (r - lo).rem_euclid(p);
            let mut ks = Vec::new();
            let mut k = first;
            while k <= hi {
                ks.push(k);
                k += p;
            }
            let (ina, inb) = (self.above[r as usize], self.below[r as usize]);
            let inside: Vec<bool> = ks.iter().map(|&k| self.contains(k)).collect();
            if ina && inb && inside.iter().all(|&x| x) {
                out.push(Piece::Prog(r, p));
                continue;
            }
            let mut lo_i = 0usize;
            let mut hi_i = ks.len();
            if inb {
                while lo_i < ks.len() && inside[lo_i] {
                    lo_i += 1;
                }
                let end = if lo_i == 0 { first - p } else { ks[lo_i - 1] };
                out.push(Piece::Down(end, p));
            }
            if ina {
                while hi_i > lo_i && inside[hi_i - 1] {
                    hi_i -= 1;
                }
                let start = if hi_i == ks.len() { ks.last().map_or(first, |l| l + p) } else { ks[hi_i] };
                out.push(Piece::Up(start, p));
            }
            for i in lo_i..hi_i {
                if inside[i] {
                    out.push(Piece::Point(ks[i]));
                }
            }
        }
        out.sort();
        out
    }

    /// Sumset `{x + y : x ∈ self, y ∈ o}`.
    pub fn sumset(&self, o: &ZSet) -> ZSet {
        let pa = self.pieces();
        let pb = o.pieces();
        let mut acc = ZSet::empty();
        let mut pts = Vec::new();
        for x in &pa {
            for y in &pb {
                match piece_sum(*x, *y) {
                    PieceSum::Points(v) => pts.extend(v),
                    PieceSum::Set(z) => acc = acc.union(&z),
                }
            }
        }
        acc.union(&ZSet::points(&pts))
    }
}

enum PieceSum {
    Points(Vec<i64>),
    Set(ZSet),
}

/// `{i·p1 + j·p2 : i, j ≥ 0}` as points below the conductor plus an up-ray.
fn semigroup(p1: i64, p2: i64) -> (Vec<i64>, i64, i64) {
    let g = p1.gcd(&p2);
    let conductor = (p1 / g) * (p2 / g) * g;
    let mut pts = BTreeSet::new();
    let mut i = 0;
    while i * p1 < conductor {
        let mut j = 0;
        while i * p1 + j * p2 < conductor {
            pts.insert(i * p1 + j * p2);
            j += 1;
        }
        i += 1;
    }
    (pts.into_iter().collect(), conductor, g)
}

fn piece_sum(x: Piece, y: Piece) -> PieceSum {
    use Piece::*;
    match (x, y) {
        (Point(a), Point(b)) => PieceSum::Points(vec![a + b]),
        (Point(a), Prog(o, p)) | (Prog(o, p), Point(a)) => PieceSum::Set(ZSet::prog(o + a, p)),
        (Point(a), Up(s, p)) | (Up(s, p), Point(a)) => PieceSum::Set(ZSet::up(s + a, p)),
        (Point(a), Down(e, p)) | (Down(e, p), Point(a)) => PieceSum::Set(ZSet::down(e + a, p)),
        (Prog(o, p), Prog(o2, p2) | Up(o2, p2) | Down(o2, p2))
        | (Up(o2, p2) | Down(o2, p2), Prog(o, p)) => PieceSum::Set(ZSet::prog(o + o2, p.gcd(&p2))),
        (Up(s, p), Down(e, p2)) | (Down(e, p2), Up(s, p)) => {
            PieceSum::Set(ZSet::prog(s + e, p.gcd(&p2)))
        }
        (Up(s, p), Up(s2, p2)) => {
            let (pts, c, g) = semigroup(p, p2);
            let base = s + s2;
            let z = ZSet::up(base + c, g).union(&ZSet::points(
                &pts.iter().map(|v| base + v).collect::<Vec<_>>(),
            ));
            PieceSum::Set(z)
        }
        (Down(e, p), Down(e2, p2)) => {
            let (pts, c, g) = semigroup(p, p2);
            let base = e + e2;
            let z = ZSet::down(base - c, g).union(&ZSet::points(
                &pts.iter().map(|v| base - v).collect::<Vec<_>>(),
            ));
            PieceSum::Set(z)
        }
    }
}

impl fmt::Debug for ZSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ZSet{:?}", self.pieces())
    }
}

/// JSON form of a [`ZSet`]: `finite`, `prog`, `up`, `down`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZSetJson {
    #[serde(default)]
    pub finite: Vec<i64>,
    #[serde(default)]
    pub prog: Vec<[i64; 2]>,
    #[serde(default)]
    pub up: Vec<[i64; 2]>,
    #[serde(default)]
    pub down: Vec<[i64; 2]>,
}

impl ZSetJson {
    pub fn from_zset(z: &ZSet) -> Self {
        let mut j = ZSetJson::default();
        for pc in z.pieces() {
            match pc {
                Piece::Point(k) => j.finite.push(k),
                Piece::Prog(o, p) => j.prog.push([o, p]),
                Piece::Up(s, p) => j.up.push([s, p]),
                Piece::Down(e, p) => j.down.push([e, p]),
            }
        }
        j
    }

    pub fn to_zset(&self) -> Result<ZSet, SetError> {
        let mut pieces: Vec<Piece> = self.finite.iter().map(|&k| Piece::Point(k)).collect();
        let check = |p: i64| {
            if p >= 1 {
                Ok(p)
            } else {
                Err(SetError::Malformed(format!("period {p} must be positive")))
            }
        };
        for &[o, p] in &self.prog {
            pieces.push(Piece::Prog(o, check(p)?));
        }
        for &[s, p] in &self.up {
            pieces.push(Piece::Up(s, check(p)?));
        }
        for &[e, p] in &self.down {
            pieces.push(Piece::Down(e, check(p)?));
        }
        Ok(ZSet::from_pieces(&pieces))
    }
}

/// A subset of `R` given by one [`ZSet`] per finite root.
#[derive(Clone, PartialEq, Eq)]
pub struct CylinderSet {
    rs: RootSystem,
    comps: BTreeMap<Dot, ZSet>,
}

/// Result of [`CylinderSet::closure_report`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureReport {
    pub closed: bool,
    /// The window bound `B = 2·(max boundary) + 2·lcm(periods)`.
    pub window_bound: i64,
    /// `(α, β)` in the set with `α+β ∈ R` outside the set.
    pub witness: Option<((Dot, i64), (Dot, i64))>,
}

impl CylinderSet {
    pub fn empty(rs: &RootSystem) -> Self {
        CylinderSet { rs: rs.clone(), comps: BTreeMap::new() }
    }

    pub fn full(rs: &RootSystem) -> Self {
        let mut s = Self::empty(rs);
        for d in rs.finite_roots() {
            let z = s.string_zset(&d);
            s.comps.insert(d, z);
        }
        s
    }

    /// `ℤδ`
    pub fn imaginary(rs: &RootSystem) -> Self {
        let mut s = Self::empty(rs);
        s.comps.insert(Dot::zero(rs.dim()), ZSet::all());
        s
    }

    /// Builds a set from components, intersecting each with the root string.
    pub fn from_components(rs: &RootSystem, comps: impl IntoIterator<Item = (Dot, ZSet)>) -> Self {
        let mut s = Self::empty(rs);
        for (d, z) in comps {
            if rs.string(&d).is_none() {
                continue;
            }
            let z = z.intersect(&s.string_zset(&d));
            let merged = match s.comps.remove(&d) {
                Some(old) => old.union(&z),
                None => z,
            };
            s.put(d, merged);
        }
        s
    }

    /// Full cosets `(α̇+ℤδ)∩R` for each given finite part.
    pub fn cosets<'a>(rs: &RootSystem, dots: impl IntoIterator<Item = &'a Dot>) -> Self {
        Self::from_components(rs, dots.into_iter().map(|d| (d.clone(), ZSet::all())))
    }

    pub fn singleton(rs: &RootSystem, d: &Dot, k: i64) -> Self {
        Self::from_components(rs, [(d.clone(), ZSet::point(k))])
    }

    fn put(&mut self, d: Dot, z: ZSet) {
        if z.is_empty() {
            self.comps.remove(&d);
        } else {
            self.comps.insert(d, z);
        }
    }

    pub fn rs(&self) -> &RootSystem {
        &self.rs
    }

    pub fn string_zset(&self, d: &Dot) -> ZSet {
        match self.rs.string(d) {
            Some((p, c)) => ZSet::prog(c, p),
            None => ZSet::empty(),
        }
    }

    pub fn component(&self, d: &Dot) -> Option<&ZSet> {
        self.comps.get(d)
    }

    pub fn components(&self) -> impl Iterator<Item = (&Dot, &ZSet)> {
        self.comps.iter()
    }

    pub fn member_dot(&self, d: &Dot, k: i64) -> bool {
        self.comps.get(d).is_some_and(|z| z.contains(k))
    }

    pub fn member(&self, w: &Weight) -> bool {
        if w.dims() != (self.rs.m(), self.rs.n()) {
            return false;
        }
        match w.to_lattice() {
            Some((d, k)) => self.member_dot(&d, k),
            None => false,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.comps.values().all(ZSet::is_finite)
    }

    fn same_rs(&self, o: &CylinderSet) -> Result<(), SetError> {
        if self.rs != o.rs {
            Err(SetError::RootSystemMismatch)
        } else {
            Ok(())
        }
    }

    fn zip(&self, o: &CylinderSet, f: impl Fn(&ZSet, &ZSet) -> ZSet) -> Result<CylinderSet, SetError> {
        self.same_rs(o)?;
        let keys: BTreeSet<&Dot> = self.comps.keys().chain(o.comps.keys()).collect();
        let empty = ZSet::empty();
        let mut out = CylinderSet::empty(&self.rs);
        for d in keys {
            let z = f(self.comps.get(d).unwrap_or(&empty), o.comps.get(d).unwrap_or(&empty));
            out.put(d.clone(), z);
        }
        Ok(out)
    }

    pub fn union(&self, o: &CylinderSet) -> Result<CylinderSet, SetError> {
        self.zip(o, ZSet::union)
    }

    pub fn intersect(&self, o: &CylinderSet) -> Result<CylinderSet, SetError> {
        self.zip(o, ZSet::intersect)
    }

    pub fn difference(&self, o: &CylinderSet) -> Result<CylinderSet, SetError> {
        self.zip(o, ZSet::difference)
    }

    pub fn negate(&self) -> CylinderSet {
        let mut out = CylinderSet::empty(&self.rs);
        for (d, z) in &self.comps {
            out.put(d.neg(), z.negate());
        }
        out
    }

    /// `(S+T)∩R`
    pub fn minkowski(&self, o: &CylinderSet) -> Result<CylinderSet, SetError> {
        self.same_rs(o)?;
        let mut acc: BTreeMap<Dot, ZSet> = BTreeMap::new();
        for (a, za) in &self.comps {
            for (b, zb) in &o.comps {
                let c = a.add(b);
                if self.rs.string(&c).is_none() {
                    continue;
                }
                let z = za.sumset(zb).intersect(&self.string_zset(&c));
                let e = acc.entry(c).or_insert_with(ZSet::empty);
                *e = e.union(&z);
            }
        }
        let mut out = CylinderSet::empty(&self.rs);
        for (d, z) in acc {
            out.put(d, z);
        }
        Ok(out)
    }

    pub fn is_subset(&self, o: &CylinderSet) -> bool {
        self.rs == o.rs
            && self.comps.iter().all(|(d, z)| o.comps.get(d).is_some_and(|w| z.is_subset(w)))
    }

    pub fn is_symmetric(&self) -> bool {
        self.comps.iter().all(|(d, z)| self.comps.get(&d.neg()).is_some_and(|w| *w == z.negate()))
    }

    /// Window bound `B` used by the brute-force closure check.
    pub fn window_bound(&self) -> i64 {
        let boundary = self.comps.values().map(ZSet::boundary).max().unwrap_or(0);
        let l = self.comps.values().fold(1i64, |acc, z| acc.lcm(&z.period()));
        2 * boundary + 2 * l
    }

    /// Exact closedness `(S+S)∩R ⊆ S`, decided by comparing the sumset of every
    /// pair of components with the target component.
    pub fn closure_report(&self) -> ClosureReport {
        let window_bound = self.window_bound();
        for (a, za) in &self.comps {
            for (b, zb) in &self.comps {
                let c = a.add(b);
                if self.rs.string(&c).is_none() {
                    continue;
                }
                let sums = za.sumset(zb).intersect(&self.string_zset(&c));
                let target = self.comps.get(&c).cloned().unwrap_or_else(ZSet::empty);
                let missing = sums.difference(&target);
                if missing.is_empty() {
                    continue;
                }
                let witness = find_sum_witness(za, zb, &missing, window_bound)
                    .map(|(x, y)| ((a.clone(), x), (b.clone(), y)));
                return ClosureReport { closed: false, window_bound, witness };
            }
        }
        ClosureReport { closed: true, window_bound, witness: None }
    }

    pub fn is_closed(&self) -> bool {
        self.closure_report().closed
    }

    /// `Ṡ`
    pub fn sdot(&self) -> BTreeSet<Dot> {
        self.comps.keys().cloned().collect()
    }

    fn filter(&self, keep: impl Fn(&Dot) -> bool) -> CylinderSet {
        let mut out = CylinderSet::empty(&self.rs);
        for (d, z) in &self.comps {
            if keep(d) {
                out.put(d.clone(), z.clone());
            }
        }
        out
    }

    pub fn real_part(&self) -> CylinderSet {
        self.filter(|d| self.rs.form_dot(d, d) != 0)
    }

    pub fn ns_part(&self) -> CylinderSet {
        self.filter(|d| !d.is_zero() && self.rs.form_dot(d, d) == 0)
    }

    pub fn im_part(&self) -> CylinderSet {
        self.filter(Dot::is_zero)
    }

    pub fn cross_part(&self) -> CylinderSet {
        self.filter(|d| !d.is_zero())
    }

    /// `(S_re, S_ns, S_im, S^×)`
    pub fn parts(&self) -> (CylinderSet, CylinderSet, CylinderSet, CylinderSet) {
        (self.real_part(), self.ns_part(), self.im_part(), self.cross_part())
    }

    /// Elements with `|k| ≤ depth`, canonical order.
    pub fn elements(&self, depth: i64) -> Vec<(Dot, i64)> {
        let mut out = Vec::new();
        for (d, z) in &self.comps {
            for k in z.members_in(-depth, depth) {
                out.push((d.clone(), k));
            }
        }
        out
    }

    /// All elements of a finite set.
    pub fn finite_elements(&self) -> Option<Vec<(Dot, i64)>> {
        let mut out = Vec::new();
        for (d, z) in &self.comps {
            for k in z.finite_members()? {
                out.push((d.clone(), k));
            }
        }
        Some(out)
    }

    pub fn class_of(&self, d: &Dot, k: i64) -> RootClass {
        self.rs.classify_dot(d, k)
    }

    pub fn to_json(&self) -> CylinderSetJson {
        CylinderSetJson {
            components: self
                .comps
                .iter()
                .map(|(d, z)| ComponentJson { root: self.rs.weight(d, 0), set: ZSetJson::from_zset(z) })
                .collect(),
        }
    }

    pub fn from_json(rs: &RootSystem, j: &CylinderSetJson) -> Result<Self, SetError> {
        let mut comps = Vec::new();
        for c in &j.components {
            if c.root.dims() != (rs.m(), rs.n()) {
                return Err(SetError::Malformed(format!("root {} has wrong dimensions", c.root)));
            }
            let (d, k) = c
                .root
                .to_lattice()
                .ok_or_else(|| SetError::Malformed(format!("root {} is not integral", c.root)))?;
            let z = c.set.to_zset()?.shift(k);
            comps.push((d, z));
        }
        Ok(Self::from_components(rs, comps))
    }
}

fn find_sum_witness(za: &ZSet, zb: &ZSet, missing: &ZSet, bound: i64) -> Option<(i64, i64)> {
    let mut radius = bound.max(4);
    for _ in 0..6 {
        for x in za.members_in(-radius, radius) {
            for y in zb.members_in(-radius, radius) {
                if missing.contains(x + y) {
                    return Some((x, y));
                }
            }
        }
        radius *= 2;
    }
    None
}

impl fmt::Debug for CylinderSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (d, z) in &self.comps {
            m.entry(&self.rs.dot_string(d), z);
        }
        m.finish()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentJson {
    pub root: Weight,
    #[serde(flatten)]
    pub set: ZSetJson,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CylinderSetJson {
    pub components: Vec<ComponentJson>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootspace::FamilyKind;
    use proptest::prelude::*;

    fn brute(z: &ZSet, d: i64) -> Vec<i64> {
        z.members_in(-d, d)
    }

    #[test]
    fn zset_normal_form() {
        let u = ZSet::prog(0, 4).union(&ZSet::prog(2, 4));
        assert_eq!(u, ZSet::prog(0, 2));
        assert_eq!(u.pieces(), vec![Piece::Prog(0, 2)]);
        assert_eq!(ZSet::at_least(0).negate(), ZSet::at_most(0));
        let r = ZSet::up(3, 1).union(&ZSet::point(2));
        assert_eq!(r, ZSet::up(2, 1));
        assert!(ZSet::empty().is_empty());
        assert!(ZSet::all().complement().is_empty());
    }

    #[test]
    fn member_examples() {
        let r = RootSystem::new(FamilyKind::AEvenOdd2, 1, 1).unwrap();
        let full = CylinderSet::full(&r);
        assert!(full.member(&Weight::from_ints(&[1], &[0], 7)));
        let s = CylinderSet::from_components(&r, [(Dot(vec![0, 2]), ZSet::prog(0, 2))]);
        assert!(!s.member(&Weight::from_ints(&[0], &[2], 3)));
        let im = CylinderSet::imaginary(&r);
        assert!(im.member(&Weight::from_ints(&[0], &[0], -4)));
    }

    #[test]
    fn symmetric_examples() {
        let r = RootSystem::new(FamilyKind::AEvenOdd2, 1, 1).unwrap();
        assert!(!CylinderSet::singleton(&r, &Dot(vec![1, 0]), 0).is_symmetric());
        assert!(CylinderSet::imaginary(&r).is_symmetric());
        assert!(CylinderSet::full(&r).is_symmetric());
    }

    #[test]
    fn closed_examples() {
        let r = RootSystem::new(FamilyKind::D2, 1, 1).unwrap();
        assert!(CylinderSet::full(&r).is_closed());
        let s = CylinderSet::cosets(&r, &[Dot(vec![0, 2]), Dot(vec![0, -2])]);
        let rep = s.closure_report();
        assert!(!rep.closed);
        let ((a, x), (b, y)) = rep.witness.unwrap();
        assert!(r.contains_dot(&a.add(&b), x + y));
        assert!(!s.member_dot(&a.add(&b), x + y));
        let with_im = s.union(&CylinderSet::imaginary(&r)).unwrap();
        assert!(with_im.is_closed());
    }

    #[test]
    fn sdot_and_parts_examples() {
        let r = RootSystem::new(FamilyKind::D2, 1, 1).unwrap();
        assert_eq!(CylinderSet::imaginary(&r).sdot(), [Dot(vec![0, 0])].into_iter().collect());
        assert!(CylinderSet::empty(&r).sdot().is_empty());
        let (re, ns, im, cross) = CylinderSet::full(&r).parts();
        assert_eq!(im, CylinderSet::imaginary(&r));
        for d in ns.sdot() {
            assert_eq!(ns.component(&d).unwrap(), &ZSet::prog(0, 2));
        }
        assert_eq!(ns.sdot().len(), 4);
        assert_eq!(re.union(&ns).unwrap(), cross);
        let (re, ns, _, _) = CylinderSet::imaginary(&r).parts();
        assert!(re.is_empty() && ns.is_empty());
        let a = RootSystem::new(FamilyKind::AEvenOdd2, 1, 1).unwrap();
        assert_eq!(CylinderSet::full(&a).im_part(), CylinderSet::imaginary(&a));
    }

    #[test]
    fn minkowski_example() {
        let r = RootSystem::new(FamilyKind::D2, 1, 1).unwrap();
        let a = CylinderSet::cosets(&r, &[Dot(vec![0, 2])]);
        let b = CylinderSet::cosets(&r, &[Dot(vec![0, -2])]);
        let s = a.minkowski(&b).unwrap();
        assert_eq!(s.sdot(), [Dot(vec![0, 0])].into_iter().collect());
        assert_eq!(s.component(&Dot(vec![0, 0])).unwrap(), &ZSet::prog(0, 2));
    }

    #[test]
    fn json_round_trip() {
        let r = RootSystem::new(FamilyKind::AEvenEven4, 1, 1).unwrap();
        let s = CylinderSet::from_components(
            &r,
            [(Dot(vec![1, 0]), ZSet::up(3, 1).union(&ZSet::point(-5))), (Dot(vec![0, 0]), ZSet::prog(0, 2))],
        );
        let j = serde_json::to_string(&s.to_json()).unwrap();
        let back = CylinderSet::from_json(&r, &serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    fn arb_piece() -> impl Strategy<Value = Piece> {
        prop_oneof![
            (-12i64..12).prop_map(Piece::Point),
            (-6i64..6, 1i64..5).prop_map(|(o, p)| Piece::Prog(o, p)),
            (-12i64..12, 1i64..5).prop_map(|(s, p)| Piece::Up(s, p)),
            (-12i64..12, 1i64..5).prop_map(|(e, p)| Piece::Down(e, p)),
        ]
    }

    fn arb_zset() -> impl Strategy<Value = ZSet> {
        prop::collection::vec(arb_piece(), 0..4).prop_map(|v| ZSet::from_pieces(&v))
    }

    fn piece_contains(p: &Piece, k: i64) -> bool {
        match *p {
            Piece::Point(x) => k == x,
            Piece::Prog(o, q) => (k - o).rem_euclid(q) == 0,
            Piece::Up(s, q) => k >= s && (k - s).rem_euclid(q) == 0,
            Piece::Down(e, q) => k <= e && (e - k).rem_euclid(q) == 0,
        }
    }

    proptest! {
        #[test]
        fn pieces_agree_with_membership(v in prop::collection::vec(arb_piece(), 0..5)) {
            let z = ZSet::from_pieces(&v);
            for k in -50..=50 {
                prop_assert_eq!(z.contains(k), v.iter().any(|p| piece_contains(p, k)));
            }
            prop_assert_eq!(ZSet::from_pieces(&z.pieces()), z);
        }

        #[test]
        fn algebra_matches_brute_force(a in arb_zset(), b in arb_zset()) {
            let u = a.union(&b);
            let i = a.intersect(&b);
            let d = a.difference(&b);
            let n = a.negate();
            for k in -50..=50 {
                prop_assert_eq!(u.contains(k), a.contains(k) || b.contains(k));
                prop_assert_eq!(i.contains(k), a.contains(k) && b.contains(k));
                prop_assert_eq!(d.contains(k), a.contains(k) && !b.contains(k));
                prop_assert_eq!(n.contains(k), a.contains(-k));
            }
        }

        #[test]
        fn sumset_matches_brute_force(a in arb_zset(), b in arb_zset()) {
            let s = a.sumset(&b);
            // every sum of members within a generous window is present
            let xa = brute(&a, 80);
            let xb = brute(&b, 80);
            for &x in &xa {
                for &y in &xb {
                    if (x + y).abs() <= 50 {
                        prop_assert!(s.contains(x + y));
                    }
                }
            }
            // every member of the sumset near the origin is witnessed
            for k in -30..=30 {
                if s.contains(k) {
                    let ok = xa.iter().any(|&x| xb.contains(&(k - x)));
                    prop_assert!(ok, "no witness for {}", k);
                }
            }
        }

        #[test]
        fn preimage_scale_matches(a in arb_zset(), c in 1i64..4) {
            let p = a.preimage_scale(c);
            for k in -40..=40 {
                prop_assert_eq!(p.contains(k), a.contains(c * k));
            }
        }
    }
}
