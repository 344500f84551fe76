//! Shadow assignments: the locally nilpotent / injective class of every real
//! `δ`-coset, the sets `T(1)`, `T(2)`, `T` built from them, and a small
//! saturation engine for support arguments.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_traits::{Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cylsets::{CylinderSet, ZSet};
use crate::functionals::Functional;
use crate::rootspace::{q, qf, Dot, FamilyKind, ParityRule, RootSystem, Weight, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShadowError {
    #[error("{0} is not a real finite root")]
    NotReal(String),
    #[error("real coset {0} is not assigned")]
    Unassigned(String),
    #[error("hybrid class on {0} needs t in {{-1,0,1}}")]
    BadT(String),
    #[error("class of {0} is not the mirror of the class of its negative")]
    BadMirror(String),
    #[error("{0} and its double disagree on local nilpotence at {1}")]
    Doubling(String, String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("malformed family: {0}")]
    MalformedFamily(String),
    #[error("malformed assignment: {0}")]
    Malformed(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassTag {
    FullLN,
    FullIN,
    DownHybrid,
    UpHybrid,
}

impl ClassTag {
    pub fn is_hybrid(self) -> bool {
        matches!(self, ClassTag::DownHybrid | ClassTag::UpHybrid)
    }
}

/// Class of one real coset. `r` is measured from the coset's base offset
/// `k_α̇`, so the split point sits at `α̇+(k_α̇+r)δ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CosetClass {
    pub tag: ClassTag,
    pub r: i64,
    pub t: i64,
}

impl CosetClass {
    pub fn full_ln() -> Self {
        CosetClass { tag: ClassTag::FullLN, r: 0, t: 0 }
    }
    pub fn full_in() -> Self {
        CosetClass { tag: ClassTag::FullIN, r: 0, t: 0 }
    }
    pub fn up(r: i64, t: i64) -> Self {
        CosetClass { tag: ClassTag::UpHybrid, r, t }
    }
    pub fn down(r: i64, t: i64) -> Self {
        CosetClass { tag: ClassTag::DownHybrid, r, t }
    }
}

/// `k`-sets of the locally nilpotent parts on `β̇` and on `−β̇`, for a class
/// with absolute split point `e`.
fn ln_pattern(tag: ClassTag, e: i64, t: i64) -> (ZSet, ZSet) {
    match tag {
        ClassTag::FullLN => (ZSet::all(), ZSet::all()),
        ClassTag::FullIN => (ZSet::empty(), ZSet::empty()),
        ClassTag::UpHybrid => (ZSet::at_least(e), ZSet::at_least(-e + 1 - t)),
        ClassTag::DownHybrid => (ZSet::at_most(e), ZSet::at_most(-e + t - 1)),
    }
}

/// Every real coset's class.
#[derive(Clone, PartialEq, Eq)]
pub struct ShadowAssignment {
    rs: RootSystem,
    classes: BTreeMap<Dot, CosetClass>,
}

impl fmt::Debug for ShadowAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (d, c) in &self.classes {
            m.entry(&self.rs.dot_string(d), c);
        }
        m.finish()
    }
}

impl ShadowAssignment {
    /// Validates and builds an assignment. A hybrid class given on only one
    /// of `±β̇` is completed by its mirror.
    pub fn new(rs: &RootSystem, classes: BTreeMap<Dot, CosetClass>) -> Result<Self, ShadowError> {
        let real = rs.real_finite_roots();
        let mut classes = classes;
        for d in classes.keys() {
            if !real.contains(d) {
                return Err(ShadowError::NotReal(rs.dot_string(d)));
            }
        }
        let missing: Vec<(Dot, CosetClass)> = classes
            .iter()
            .filter(|(d, c)| c.tag.is_hybrid() && !classes.contains_key(&d.neg()))
            .map(|(d, c)| {
                let e = base_offset(rs, d) + c.r;
                let e_neg = match c.tag {
                    ClassTag::UpHybrid => -e + 1 - c.t,
                    _ => -e + c.t - 1,
                };
                (d.neg(), CosetClass { tag: c.tag, r: e_neg - base_offset(rs, &d.neg()), t: c.t })
            })
            .collect();
        classes.extend(missing);
        for d in &real {
            if !classes.contains_key(d) {
                return Err(ShadowError::Unassigned(rs.dot_string(d)));
            }
        }
        let sa = ShadowAssignment { rs: rs.clone(), classes };
        sa.validate()?;
        Ok(sa)
    }

    fn validate(&self) -> Result<(), ShadowError> {
        let rs = &self.rs;
        for (d, c) in &self.classes {
            if c.tag.is_hybrid() && !(-1..=1).contains(&c.t) {
                return Err(ShadowError::BadT(rs.dot_string(d)));
            }
            let other = &self.classes[&d.neg()];
            if c.tag.is_hybrid() || other.tag.is_hybrid() {
                let (_, implied) = self.own_pattern(d);
                let implied = implied.intersect(&self.string(&d.neg()));
                if c.tag != other.tag || implied != self.ln_zset(&d.neg()) {
                    return Err(ShadowError::BadMirror(rs.dot_string(d)));
                }
            }
        }
        for d in self.classes.keys() {
            let twice = d.scale(2);
            if !self.classes.contains_key(&twice) {
                continue;
            }
            let halves = self.string(&twice).preimage_scale(2).intersect(&self.string(d));
            let direct = self.ln_zset(d).intersect(&halves);
            let via_double = self.ln_zset(&twice).preimage_scale(2).intersect(&halves);
            if direct != via_double {
                let k = direct.difference(&via_double).union(&via_double.difference(&direct));
                let at = k.members_in(-64, 64).first().copied().unwrap_or(0);
                return Err(ShadowError::Doubling(rs.dot_string(d), format!("k={at}")));
            }
        }
        Ok(())
    }

    pub fn rs(&self) -> &RootSystem {
        &self.rs
    }

    pub fn class(&self, d: &Dot) -> Option<&CosetClass> {
        self.classes.get(d)
    }

    pub fn classes(&self) -> impl Iterator<Item = (&Dot, &CosetClass)> {
        self.classes.iter()
    }

    fn string(&self, d: &Dot) -> ZSet {
        match self.rs.string(d) {
            Some((p, c)) => ZSet::prog(c, p),
            None => ZSet::empty(),
        }
    }

    /// Absolute split point `k_β̇ + r`.
    pub fn split_point(&self, d: &Dot) -> Option<i64> {
        let c = self.classes.get(d)?;
        Some(base_offset(&self.rs, d) + c.r)
    }

    fn own_pattern(&self, d: &Dot) -> (ZSet, ZSet) {
        let c = &self.classes[d];
        ln_pattern(c.tag, base_offset(&self.rs, d) + c.r, c.t)
    }

    /// `{k : β̇+kδ ∈ R^{ln}}`
    pub fn ln_zset(&self, d: &Dot) -> ZSet {
        if !self.classes.contains_key(d) {
            return ZSet::empty();
        }
        self.own_pattern(d).0.intersect(&self.string(d))
    }

    /// `{k : β̇+kδ ∈ R^{in}}`
    pub fn in_zset(&self, d: &Dot) -> ZSet {
        self.string(d).difference(&self.ln_zset(d))
    }

    pub fn ln_set(&self) -> CylinderSet {
        CylinderSet::from_components(&self.rs, self.classes.keys().map(|d| (d.clone(), self.ln_zset(d))))
    }

    pub fn in_set(&self) -> CylinderSet {
        CylinderSet::from_components(&self.rs, self.classes.keys().map(|d| (d.clone(), self.in_zset(d))))
    }

    /// Real `β̇` with `±(β̇+kδ)` both locally nilpotent for some `k`.
    pub fn ln_pair_dots(&self) -> BTreeSet<Dot> {
        self.classes
            .keys()
            .filter(|d| !self.ln_zset(d).intersect(&self.ln_zset(&d.neg()).negate()).is_empty())
            .cloned()
            .collect()
    }

    pub fn tag(&self, d: &Dot) -> Option<ClassTag> {
        self.classes.get(d).map(|c| c.tag)
    }

    /// `±β̇` both full-ln.
    pub fn is_full_ln_pair(&self, d: &Dot) -> bool {
        self.tag(d) == Some(ClassTag::FullLN) && self.tag(&d.neg()) == Some(ClassTag::FullLN)
    }

    pub fn is_hybrid(&self, d: &Dot) -> bool {
        self.tag(d).is_some_and(ClassTag::is_hybrid)
    }

    pub fn to_json(&self) -> AssignmentJson {
        AssignmentJson {
            family: Some(self.rs.kind().label().to_string()),
            m: Some(self.rs.m()),
            n: Some(self.rs.n()),
            cosets: self
                .classes
                .iter()
                .map(|(d, c)| CosetJson {
                    root: self.rs.weight(d, 0),
                    class: c.tag,
                    r: c.r,
                    t: c.t,
                })
                .collect(),
        }
    }

    pub fn from_json(rs: &RootSystem, j: &AssignmentJson) -> Result<Self, ShadowError> {
        let mut classes = BTreeMap::new();
        for c in &j.cosets {
            if c.root.dims() != (rs.m(), rs.n()) {
                return Err(ShadowError::Malformed(format!("root {} has wrong dimensions", c.root)));
            }
            let (d, k) = c
                .root
                .to_lattice()
                .ok_or_else(|| ShadowError::Malformed(format!("root {} is not integral", c.root)))?;
            if k != 0 {
                return Err(ShadowError::Malformed(format!("root {} must have zero δ-part", c.root)));
            }
            let class = CosetClass { tag: c.class, r: c.r, t: c.t };
            if classes.insert(d, class).is_some() {
                return Err(ShadowError::Malformed(format!("root {} listed twice", c.root)));
            }
        }
        ShadowAssignment::new(rs, classes)
    }
}

/// `k_α̇` from the string data of `α̇`.
fn base_offset(rs: &RootSystem, d: &Dot) -> i64 {
    rs.string(d).map_or(0, |(_, c)| c)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetJson {
    pub root: Weight,
    pub class: ClassTag,
    #[serde(default)]
    pub r: i64,
    #[serde(default)]
    pub t: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub cosets: Vec<CosetJson>,
}

/// `T(1)`, `T(2)` and `T` of an assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TSets {
    pub t1: CylinderSet,
    pub t2: CylinderSet,
    pub t: CylinderSet,
}

/// Nonsingular cosets `α̇` with `κα̇ ∈ Ḃ+Ḃ`, taken whole.
fn ns_cover(rs: &RootSystem, re: &BTreeSet<Dot>) -> CylinderSet {
    let kappa = rs.kappa();
    let mut dots = BTreeSet::new();
    for a in re {
        for b in re {
            if let Some(c) = a.add(b).div_exact(kappa) {
                if !c.is_zero() && rs.string(&c).is_some() && rs.form_dot(&c, &c) == 0 {
                    dots.insert(c);
                }
            }
        }
    }
    CylinderSet::cosets(rs, &dots)
}

fn with_imaginary_sums(rs: &RootSystem, re: &BTreeSet<Dot>) -> CylinderSet {
    let cross = CylinderSet::cosets(rs, re).union(&ns_cover(rs, re)).expect("same root system");
    let im = cross.minkowski(&cross).expect("same root system").im_part();
    cross.union(&im).expect("same root system")
}

pub fn build_t(sa: &ShadowAssignment) -> TSets {
    let rs = sa.rs();
    let t1_re: BTreeSet<Dot> = sa.classes.keys().filter(|d| sa.is_full_ln_pair(d)).cloned().collect();
    let t2_re: BTreeSet<Dot> = sa.classes.keys().filter(|d| sa.is_hybrid(d)).cloned().collect();
    let t1 = with_imaginary_sums(rs, &t1_re);
    let t2 = with_imaginary_sums(rs, &t2_re);
    let all_re: BTreeSet<Dot> = t1_re.union(&t2_re).cloned().collect();
    let t = CylinderSet::imaginary(rs)
        .union(&CylinderSet::cosets(rs, &all_re))
        .and_then(|s| s.union(&ns_cover(rs, &all_re)))
        .expect("same root system");
    TSets { t1, t2, t }
}

/// `{k : α̇+kδ ∈ R₀}`
pub fn even_zset(rs: &RootSystem, d: &Dot) -> ZSet {
    let Some((p, c)) = rs.string(d) else { return ZSet::empty() };
    let string = ZSet::prog(c, p);
    match rs.parity_rule(d).expect("root") {
        ParityRule::Even => string,
        ParityRule::Odd => ZSet::empty(),
        ParityRule::OddOnOddK => string.intersect(&ZSet::prog(0, 2)),
        ParityRule::OddOnEvenK => string.intersect(&ZSet::prog(1, 2)),
    }
}

/// `S∩R₀`
pub fn even_part(s: &CylinderSet) -> CylinderSet {
    let rs = s.rs();
    CylinderSet::from_components(rs, s.components().map(|(d, z)| (d.clone(), z.intersect(&even_zset(rs, d)))))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Verdict depends on the bundled parity data.
    pub parity_conditional: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MainIReport {
    pub checks: Vec<Check>,
    pub pass: bool,
}

fn symmetric_check(name: &str, s: &CylinderSet) -> Check {
    let witness = if s.is_symmetric() {
        None
    } else {
        s.components()
            .find(|(d, z)| s.component(&d.neg()).is_none_or(|w| w.negate() != **z))
            .map(|(d, z)| {
                let neg = s.component(&d.neg()).cloned().unwrap_or_else(ZSet::empty).negate();
                let k = z.difference(&neg).members_in(-256, 256).first().copied();
                match k {
                    Some(k) => format!("{} in set, negative missing", s.rs().weight(d, k)),
                    None => format!("component {} differs from its negative", s.rs().dot_string(d)),
                }
            })
    };
    Check { name: format!("{name} symmetric"), pass: witness.is_none(), parity_conditional: false, witness }
}

fn closed_check(name: &str, s: &CylinderSet) -> Check {
    let rep = s.closure_report();
    let witness = if rep.closed {
        None
    } else {
        Some(match rep.witness {
            Some(((a, x), (b, y))) => {
                let rs = s.rs();
                format!("{} + {} = {} not in set", rs.weight(&a, x), rs.weight(&b, y), rs.weight(&a.add(&b), x + y))
            }
            None => "sum outside set".to_string(),
        })
    };
    Check { name: format!("{name} closed"), pass: rep.closed, parity_conditional: false, witness }
}

/// `T(i)_im` as `ℤδ` or `2ℤδ`, if it is one of these.
fn im_kind(s: &CylinderSet) -> Option<i64> {
    let z = s.im_part().component(&Dot::zero(s.rs().dim())).cloned().unwrap_or_else(ZSet::empty);
    if z == ZSet::all() {
        Some(1)
    } else if z == ZSet::prog(0, 2) {
        Some(2)
    } else {
        None
    }
}

/// Checks that `T`, `T(1)`, `T(2)` are symmetric and closed, that
/// `T(i)_im ∈ {ℤδ, 2ℤδ}`, and that `T(2)_im = 2ℤδ` forces `T(2) ⊆ R₀`.
pub fn verify_main_i(sa: &ShadowAssignment) -> Result<MainIReport, ShadowError> {
    let ts = build_t(sa);
    if ts.t1.real_part().is_empty() || ts.t2.real_part().is_empty() {
        return Err(ShadowError::Precondition("T(1)_re and T(2)_re must be nonempty".into()));
    }
    let mut checks = Vec::new();
    for (name, s) in [("T", &ts.t), ("T(1)", &ts.t1), ("T(2)", &ts.t2)] {
        checks.push(symmetric_check(name, s));
        checks.push(closed_check(name, s));
    }
    for (name, s) in [("T(1)", &ts.t1), ("T(2)", &ts.t2)] {
        let kind = im_kind(s);
        checks.push(Check {
            name: format!("{name}_im is Zδ or 2Zδ"),
            pass: kind.is_some(),
            parity_conditional: false,
            witness: kind.is_none().then(|| format!("{:?}", s.im_part())),
        });
    }
    if im_kind(&ts.t2) == Some(2) {
        let odd = ts.t2.difference(&even_part(&ts.t2)).expect("same root system");
        let witness = odd.elements(16).first().map(|(d, k)| format!("{} is odd", sa.rs().weight(d, *k)));
        checks.push(Check {
            name: "T(2)_im = 2Zδ implies T(2) even".into(),
            pass: odd.is_empty(),
            parity_conditional: true,
            witness,
        });
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(MainIReport { checks, pass })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    AllUp,
    AllDown,
    Mixed,
}

/// Whether the real roots of `S` are all up-nilpotent or all down-nilpotent
/// hybrid.
pub fn hybrid_direction(sa: &ShadowAssignment, s: &CylinderSet) -> Result<Direction, ShadowError> {
    let pre = |m: String| Err(ShadowError::Precondition(m));
    let sym = symmetric_check("S", s);
    if !sym.pass {
        return pre(sym.witness.unwrap_or_default());
    }
    let closed = closed_check("S", s);
    if !closed.pass {
        return pre(closed.witness.unwrap_or_default());
    }
    let re = s.real_part();
    if re.is_empty() {
        return pre("S_re is empty".into());
    }
    let rs = s.rs();
    for (d, z) in s.cross_part().components() {
        let missing = even_zset(rs, d).difference(z);
        if let Some(k) = missing.members_in(-256, 256).first() {
            return pre(format!("{} is even, shares a coset with S, and is missing", rs.weight(d, *k)));
        }
    }
    let mut up = false;
    let mut down = false;
    for d in re.sdot() {
        match sa.tag(&d) {
            Some(ClassTag::UpHybrid) => up = true,
            Some(ClassTag::DownHybrid) => down = true,
            _ => return pre(format!("{} is not hybrid", rs.dot_string(&d))),
        }
    }
    Ok(match (up, down) {
        (true, false) => Direction::AllUp,
        (false, true) => Direction::AllDown,
        _ => Direction::Mixed,
    })
}

/// A generated assignment together with the functional its hybrid cosets
/// were cut from.
#[derive(Clone, Debug)]
pub struct Generated {
    pub sa: ShadowAssignment,
    pub zeta: Functional,
    /// Coordinates (as `Dot` indices) carrying `T(1)` and `T(2)`.
    pub t1_coords: Vec<usize>,
    pub t2_coords: Vec<usize>,
}

fn random_rational<R: Rng>(rng: &mut R) -> Q {
    let den = rng.gen_range(1..=4);
    let num = rng.gen_range(-8..=8);
    qf(num, den)
}

fn supported_in(d: &Dot, coords: &[usize]) -> bool {
    d.0.iter().enumerate().all(|(i, &c)| c == 0 || coords.contains(&i))
}

/// Hybrid class of `β̇` cut out by `ζ ≥ 0`, for `ζ(δ) ≠ 0`.
pub fn hybrid_class_from(rs: &RootSystem, zeta: &Functional, d: &Dot) -> CosetClass {
    let zd = &zeta.delta;
    let zb = zeta.eval_dot(d, 0);
    let (tag, e, t) = if zd.is_positive() {
        let x = &zb / zd;
        (ClassTag::UpHybrid, (-&x).ceil(), if x.is_integer() { 1 } else { 0 })
    } else {
        let y = &zb / &(-zd);
        (ClassTag::DownHybrid, y.floor(), if y.is_integer() { 1 } else { 0 })
    };
    let e = e.to_integer().to_i64().expect("small offset");
    CosetClass { tag, r: e - base_offset(rs, d), t }
}

/// Draws a valid assignment: one of the `ε`/`δ_p` blocks carries a full-ln
/// `T(1)` on a random coordinate subset, the other a hybrid `T(2)` cut out
/// by a random functional, and the remaining real cosets are never full-ln
/// on both signs.
pub fn random_assignment<R: Rng>(rs: &RootSystem, rng: &mut R) -> Result<Generated, ShadowError> {
    let (m, n) = (rs.m(), rs.n());
    if m == 0 || n == 0 {
        return Err(ShadowError::Precondition("both blocks must be nonempty".into()));
    }
    let eps: Vec<usize> = (0..m).collect();
    let del: Vec<usize> = (m..m + n).collect();
    let pick = |rng: &mut R, block: &[usize]| -> Vec<usize> {
        loop {
            let s: Vec<usize> = block.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
            if !s.is_empty() {
                return s;
            }
        }
    };
    let (b1, b2) = if rng.gen_bool(0.5) { (&eps, &del) } else { (&del, &eps) };
    let t1_coords = pick(rng, b1);
    let t2_coords = pick(rng, b2);

    let mut zeta = Functional::zero(m, n);
    zeta.delta = if rng.gen_bool(0.5) { q(1) } else { q(-1) };
    for &i in &t2_coords {
        let v = random_rational(rng);
        if i < m {
            zeta.eps[i] = v;
        } else {
            zeta.del[i - m] = v;
        }
    }

    let real = rs.real_finite_roots();
    let mut classes = BTreeMap::new();
    let mut rest = Vec::new();
    for d in &real {
        if supported_in(d, &t1_coords) {
            classes.insert(d.clone(), CosetClass::full_ln());
        } else if supported_in(d, &t2_coords) {
            classes.insert(d.clone(), hybrid_class_from(rs, &zeta, d));
        } else if d.is_positive_rep() {
            rest.push(d.clone());
        }
    }
    // primitive roots first so that doubles copy their class
    rest.sort_by_key(|d| d.0.iter().map(|x| x.abs()).sum::<i64>());
    let choices = [
        (CosetClass::full_ln(), CosetClass::full_in()),
        (CosetClass::full_in(), CosetClass::full_ln()),
        (CosetClass::full_in(), CosetClass::full_in()),
    ];
    for d in &rest {
        if classes.contains_key(d) {
            continue;
        }
        let (a, b) = *choices.choose(rng).expect("nonempty");
        classes.insert(d.clone(), a);
        classes.insert(d.neg(), b);
        let twice = d.scale(2);
        if real.contains(&twice) {
            classes.insert(twice.clone(), a);
            classes.insert(twice.neg(), b);
        }
    }
    let sa = ShadowAssignment::new(rs, classes)?;
    Ok(Generated { sa, zeta, t1_coords, t2_coords })
}

// ---------------------------------------------------------------------------
// Support saturation

/// `{μ₀ + s·v + (a·s+b)δ : s large}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SuppFamily {
    pub base: Weight,
    pub dir: Weight,
    #[serde(default)]
    pub a: i64,
    #[serde(default)]
    pub b: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuppState {
    #[serde(default)]
    pub concrete: BTreeSet<Weight>,
    #[serde(default)]
    pub families: BTreeSet<SuppFamily>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SaturationResult {
    Consistent(SuppState),
    /// Derivation chain from a seed to a family along a full-ln direction.
    Contradiction(Vec<String>),
    BudgetExhausted(SuppState),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Item {
    Concrete(Weight),
    Family { base: Weight, dir: Weight, dilated: bool },
}

fn finite_part(w: &Weight) -> Weight {
    Weight { delta: Q::zero(), ..w.clone() }
}

fn form(a: &Weight, b: &Weight) -> Q {
    a.form(b).expect("matching dimensions")
}

/// Representative of `base + ℤ·dir` with the first nonzero ratio in `[0,1)`.
fn canonical_base(base: &Weight, dir: &Weight) -> Weight {
    let coords = dir.eps.iter().chain(&dir.del);
    let vals = base.eps.iter().chain(&base.del);
    match coords.zip(vals).find(|(d, _)| !d.is_zero()) {
        Some((d, v)) => {
            let shift = (v / d).floor();
            base - &dir.scale(&shift)
        }
        None => base.clone(),
    }
}

fn family_item(base: Weight, dir: Weight, dilated: bool) -> Item {
    let base = canonical_base(&finite_part(&base), &dir);
    Item::Family { base, dir: finite_part(&dir), dilated }
}

fn item_string(it: &Item) -> String {
    match it {
        Item::Concrete(w) => format!("{w}"),
        Item::Family { base, dir, .. } => format!("{base} + s({dir})"),
    }
}

/// `α̇` with a full-ln coset such that `dir = c·α̇`, `c > 0`.
fn full_ln_direction(sa: &ShadowAssignment, real: &[(Dot, Weight)], dir: &Weight) -> Option<Dot> {
    for (d, w) in real {
        if sa.tag(d) != Some(ClassTag::FullLN) {
            continue;
        }
        let ratio = |x: &Q, y: &Q| if y.is_zero() { None } else { Some(x / y) };
        let pairs: Vec<(&Q, &Q)> = dir.eps.iter().chain(&dir.del).zip(w.eps.iter().chain(&w.del)).collect();
        let c = pairs.iter().find_map(|(x, y)| ratio(x, y));
        if let Some(c) = c {
            if c.is_positive() && pairs.iter().all(|(x, y)| **x == &c * *y) {
                return Some(d.clone());
            }
        }
    }
    None
}

/// Applies the subtraction rule `μ ↦ μ−β̇` (for `±β̇` locally nilpotent and
/// positive pairing) to concrete weights and uniformly to families, until a
/// family runs along a full-ln root, a fixpoint is reached, or the budget of
/// rule applications is spent. Weights are taken modulo `δ`.
pub fn saturate(state: &SuppState, sa: &ShadowAssignment, budget: usize) -> Result<SaturationResult, ShadowError> {
    let rs = sa.rs();
    let (m, n) = (rs.m(), rs.n());
    for w in state.concrete.iter().chain(state.families.iter().flat_map(|f| [&f.base, &f.dir])) {
        if w.dims() != (m, n) {
            return Err(ShadowError::MalformedFamily(format!("{w} has wrong dimensions")));
        }
    }
    if let Some(f) = state.families.iter().find(|f| f.dir.eps.iter().chain(&f.dir.del).all(Zero::is_zero)) {
        return Err(ShadowError::MalformedFamily(format!("zero direction at {}", f.base)));
    }
    let real: Vec<(Dot, Weight)> = rs.real_finite_roots().into_iter().map(|d| (d.clone(), rs.weight(&d, 0))).collect();
    let ln_pairs = sa.ln_pair_dots();
    let string_ok: BTreeSet<Dot> = real
        .iter()
        .filter(|(d, _)| sa.is_full_ln_pair(d) || sa.is_hybrid(d))
        .map(|(d, _)| d.clone())
        .collect();

    let mut seen: BTreeMap<Item, Option<(Item, String)>> = BTreeMap::new();
    let mut queue = VecDeque::new();
    let mut seeds: Vec<Item> = state.concrete.iter().map(|w| Item::Concrete(finite_part(w))).collect();
    seeds.extend(state.families.iter().map(|f| family_item(f.base.clone(), f.dir.clone(), false)));
    for it in seeds {
        if seen.insert(it.clone(), None).is_none() {
            queue.push_back(it);
        }
    }
    let chain = |seen: &BTreeMap<Item, Option<(Item, String)>>, last: &Item| {
        let mut out = vec![item_string(last)];
        let mut cur = last.clone();
        while let Some(Some((parent, rule))) = seen.get(&cur) {
            out.push(format!("{} via {rule}", item_string(parent)));
            cur = parent.clone();
        }
        out.reverse();
        out
    };
    for it in seen.keys() {
        if let Item::Family { dir, .. } = it {
            if let Some(d) = full_ln_direction(sa, &real, dir) {
                let mut c = chain(&seen, it);
                c.push(format!("direction is a positive multiple of full-ln {}", rs.dot_string(&d)));
                return Ok(SaturationResult::Contradiction(c));
            }
        }
    }

    let mut applied = 0usize;
    while let Some(it) = queue.pop_front() {
        let mut derived: Vec<(Item, String)> = Vec::new();
        match &it {
            Item::Concrete(mu) => {
                for (d, w) in &real {
                    if !ln_pairs.contains(d) {
                        continue;
                    }
                    if (q(2) * form(mu, w) / form(w, w)).is_positive() {
                        derived.push((Item::Concrete(mu - w), format!("subtract {}", rs.dot_string(d))));
                    }
                }
            }
            Item::Family { base, dir, dilated } => {
                if !dilated {
                    derived.push((family_item(base.clone(), dir.scale(&q(2)), true), "dilate s ↦ 2s".into()));
                }
                for (d, w) in &real {
                    let nw = form(w, w);
                    let a = q(2) * form(base, w) / &nw;
                    let b = q(2) * form(dir, w) / &nw;
                    if ln_pairs.contains(d) && (b.is_positive() || (b.is_zero() && a.is_positive())) {
                        derived.push((
                            family_item(base - w, dir.clone(), *dilated),
                            format!("subtract {} uniformly", rs.dot_string(d)),
                        ));
                    }
                    if string_ok.contains(d) && b >= q(2) {
                        let jmax = (&b / q(2)).floor().to_integer().to_i64().unwrap_or(0);
                        for j in 1..=jmax {
                            let jq = q(j);
                            // shift the base until every step of the string stays positive
                            let slack = &a + q(2) + (&b - q(2) * &jq);
                            let s0 = if slack.is_positive() {
                                0
                            } else {
                                ((-slack) / &b).floor().to_integer().to_i64().unwrap_or(0) + 1
                            };
                            let new_base = base + &dir.scale(&q(s0));
                            let new_dir = dir - &w.scale(&jq);
                            if new_dir.eps.iter().chain(&new_dir.del).all(Zero::is_zero) {
                                continue;
                            }
                            derived.push((
                                family_item(new_base, new_dir, *dilated),
                                format!("subtract {}·{} along the family", j, rs.dot_string(d)),
                            ));
                        }
                    }
                }
            }
        }
        for (new, rule) in derived {
            applied += 1;
            if applied > budget {
                return Ok(SaturationResult::BudgetExhausted(collect_state(&seen, m, n)));
            }
            if seen.contains_key(&new) {
                continue;
            }
            seen.insert(new.clone(), Some((it.clone(), rule)));
            if let Item::Family { dir, .. } = &new {
                if let Some(d) = full_ln_direction(sa, &real, dir) {
                    let mut c = chain(&seen, &new);
                    c.push(format!("direction is a positive multiple of full-ln {}", rs.dot_string(&d)));
                    return Ok(SaturationResult::Contradiction(c));
                }
            }
            queue.push_back(new);
        }
    }
    Ok(SaturationResult::Consistent(collect_state(&seen, m, n)))
}

fn collect_state(seen: &BTreeMap<Item, Option<(Item, String)>>, m: usize, n: usize) -> SuppState {
    let mut st = SuppState::default();
    for it in seen.keys() {
        match it {
            Item::Concrete(w) => {
                st.concrete.insert(w.clone());
            }
            Item::Family { base, dir, .. } => {
                st.families.insert(SuppFamily { base: base.clone(), dir: dir.clone(), a: 0, b: 0 });
            }
        }
    }
    debug_assert!(st.concrete.iter().all(|w| w.dims() == (m, n)));
    st
}

/// Saturation input: root system, assignment, seeds and budget.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioJson {
    pub family: String,
    pub m: usize,
    pub n: usize,
    pub assignment: AssignmentJson,
    #[serde(default)]
    pub seeds: Vec<Weight>,
    #[serde(default)]
    pub families: Vec<SuppFamily>,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

fn default_budget() -> usize {
    10_000
}

/// Assignment with the given classes on some cosets and `fill` elsewhere.
pub fn assignment_with(
    rs: &RootSystem,
    fill: CosetClass,
    overrides: &[(Dot, CosetClass)],
) -> Result<ShadowAssignment, ShadowError> {
    let mut classes: BTreeMap<Dot, CosetClass> = rs.real_finite_roots().into_iter().map(|d| (d, fill)).collect();
    for (d, c) in overrides {
        classes.insert(d.clone(), *c);
    }
    ShadowAssignment::new(rs, classes)
}

/// The running example: `A(2m-1,2n-1)^(2)` with `m=2, n=1`, full-ln on the
/// `ε`-block and up-nilpotent hybrid (`r=0, t=0`) on `±2δ₁`.
pub fn worked_example() -> ShadowAssignment {
    let rs = RootSystem::new(FamilyKind::AOddOdd2, 2, 1).expect("admissible");
    let two_d = Dot(vec![0, 0, 2]);
    assignment_with(&rs, CosetClass::full_ln(), &[(two_d.clone(), CosetClass::up(0, 0)), (two_d.neg(), CosetClass::up(1, 0))])
        .expect("valid assignment")
}

/// Integer `k` nearest zero in a `ZSet`, used for readable witnesses.
pub fn sample_member(z: &ZSet) -> Option<i64> {
    (0..512).flat_map(|k| [k, -k]).find(|&k| z.contains(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn aoo() -> RootSystem {
        RootSystem::new(FamilyKind::AOddOdd2, 2, 1).unwrap()
    }

    #[test]
    fn all_full_ln_sets() {
        let rs = aoo();
        let sa = assignment_with(&rs, CosetClass::full_ln(), &[]).unwrap();
        assert_eq!(sa.ln_set(), CylinderSet::full(&rs).real_part());
        assert!(sa.in_set().is_empty());
    }

    #[test]
    fn up_hybrid_rays() {
        let sa = worked_example();
        let d = Dot(vec![0, 0, 2]);
        assert_eq!(sa.ln_zset(&d), ZSet::up(0, 2));
        assert_eq!(sa.ln_zset(&d.neg()), ZSet::up(2, 2));
        assert_eq!(sa.in_zset(&d.neg()), ZSet::down(0, 2));
    }

    #[test]
    fn mirror_is_filled_and_checked() {
        let rs = aoo();
        let d = Dot(vec![0, 0, 2]);
        let sa = assignment_with(&rs, CosetClass::full_ln(), &[(d.clone(), CosetClass::up(0, 0))]);
        assert!(sa.is_err(), "FullLN fill on -2δ₁ is not a mirror");
        let mut classes: BTreeMap<Dot, CosetClass> =
            rs.real_finite_roots().into_iter().filter(|x| x.0[2] == 0).map(|x| (x, CosetClass::full_ln())).collect();
        classes.insert(d.clone(), CosetClass::up(0, 0));
        let sa = ShadowAssignment::new(&rs, classes).unwrap();
        assert_eq!(sa.ln_zset(&d.neg()), ZSet::up(2, 2));
        let bad = assignment_with(&rs, CosetClass::full_ln(), &[(d.clone(), CosetClass::up(0, 0)), (d.neg(), CosetClass::up(-3, 0))]);
        assert!(matches!(bad, Err(ShadowError::BadMirror(_))));
    }

    #[test]
    fn doubling_is_enforced() {
        let rs = RootSystem::new(FamilyKind::D2, 1, 1).unwrap();
        let d = Dot(vec![0, 1]);
        let bad = assignment_with(&rs, CosetClass::full_ln(), &[(d.clone(), CosetClass::full_in())]);
        assert!(matches!(bad, Err(ShadowError::Doubling(..))));
        let ok = assignment_with(
            &rs,
            CosetClass::full_ln(),
            &[(d.clone(), CosetClass::full_in()), (d.scale(2), CosetClass::full_in())],
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn worked_t_sets() {
        let sa = worked_example();
        let rs = sa.rs().clone();
        let ts = build_t(&sa);
        assert!(ts.t1.ns_part().is_empty());
        let zero = Dot::zero(3);
        assert_eq!(ts.t2.im_part().component(&zero).unwrap(), &ZSet::prog(0, 2));
        assert_eq!(ts.t.ns_part(), CylinderSet::full(&rs).ns_part());
        let rep = verify_main_i(&sa).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(hybrid_direction(&sa, &ts.t2).unwrap(), Direction::AllUp);
    }

    #[test]
    fn preconditions() {
        let rs = aoo();
        let sa = assignment_with(&rs, CosetClass::full_ln(), &[]).unwrap();
        assert!(matches!(verify_main_i(&sa), Err(ShadowError::Precondition(_))));
        let ts = build_t(&sa);
        assert!(hybrid_direction(&sa, &ts.t1).is_err());
    }

    #[test]
    fn mixed_directions() {
        let rs = RootSystem::new(FamilyKind::AOddOdd2, 1, 2).unwrap();
        let over = [
            (Dot(vec![0, 2, 0]), CosetClass::up(0, 0)),
            (Dot(vec![0, 0, 2]), CosetClass::down(0, 0)),
            (Dot(vec![0, 1, 1]), CosetClass::up(0, 0)),
            (Dot(vec![0, 1, -1]), CosetClass::up(0, 0)),
        ];
        let sa = assignment_with(&rs, CosetClass::full_ln(), &over);
        let classes: BTreeMap<Dot, CosetClass> = rs
            .real_finite_roots()
            .into_iter()
            .filter(|d| d.0[1] == 0 && d.0[2] == 0)
            .map(|d| (d, CosetClass::full_ln()))
            .chain(over.iter().cloned())
            .collect();
        assert!(sa.is_err());
        let sa = ShadowAssignment::new(&rs, classes).unwrap();
        let ts = build_t(&sa);
        assert_eq!(hybrid_direction(&sa, &ts.t2).unwrap(), Direction::Mixed);
    }

    #[test]
    fn generator_produces_valid_assignments() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for kind in FamilyKind::ALL {
            for (m, n) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
                let Ok(rs) = RootSystem::new(kind, m, n) else { continue };
                for _ in 0..5 {
                    let g = random_assignment(&rs, &mut rng).unwrap();
                    let ts = build_t(&g.sa);
                    assert!(!ts.t1.real_part().is_empty());
                    assert!(!ts.t2.real_part().is_empty());
                }
            }
        }
    }

    fn w(eps: &[i64], del: &[i64]) -> Weight {
        Weight::from_ints(eps, del, 0)
    }

    #[test]
    fn seed_family_along_full_ln_root() {
        let rs = aoo();
        let sa = assignment_with(&rs, CosetClass::full_ln(), &[]).unwrap();
        let st = SuppState {
            concrete: BTreeSet::new(),
            families: [SuppFamily { base: w(&[0, 0], &[0]), dir: w(&[2, 0], &[0]), a: 0, b: 0 }].into(),
        };
        assert!(matches!(saturate(&st, &sa, 100).unwrap(), SaturationResult::Contradiction(_)));
    }

    #[test]
    fn orthogonal_seed_is_a_fixpoint() {
        let rs = aoo();
        let sa = assignment_with(&rs, CosetClass::full_ln(), &[]).unwrap();
        let seed = Weight::from_ints(&[0, 0], &[0], 3);
        let st = SuppState { concrete: [seed].into(), families: BTreeSet::new() };
        match saturate(&st, &sa, 100).unwrap() {
            SaturationResult::Consistent(s) => {
                assert_eq!(s.concrete, [w(&[0, 0], &[0])].into());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn positive_pairing_subtracts_once() {
        let rs = aoo();
        let sa = assignment_with(&rs, CosetClass::full_ln(), &[]).unwrap();
        let st = SuppState { concrete: [w(&[1, 0], &[0])].into(), families: BTreeSet::new() };
        match saturate(&st, &sa, 1000).unwrap() {
            SaturationResult::Consistent(s) => {
                assert!(s.concrete.contains(&w(&[-1, 0], &[0])));
                let expect: BTreeSet<Weight> =
                    [w(&[1, 0], &[0]), w(&[-1, 0], &[0]), w(&[0, 1], &[0]), w(&[0, -1], &[0])].into();
                assert_eq!(s.concrete, expect);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_direction_is_rejected() {
        let sa = worked_example();
        let st = SuppState {
            concrete: BTreeSet::new(),
            families: [SuppFamily { base: w(&[0, 0], &[0]), dir: Weight::from_ints(&[0, 0], &[0], 1), a: 0, b: 0 }]
                .into(),
        };
        assert!(matches!(saturate(&st, &sa, 10), Err(ShadowError::MalformedFamily(_))));
    }

    #[test]
    fn json_round_trip() {
        let sa = worked_example();
        let j = serde_json::to_string(&sa.to_json()).unwrap();
        let back = ShadowAssignment::from_json(sa.rs(), &serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(back, sa);
    }
}
