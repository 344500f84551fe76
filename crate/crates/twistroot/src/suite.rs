//! The acceptance suite: nine criteria, each checked against brute-force
//! oracles. Shared by the `sweep` command and the acceptance test.

use std::collections::BTreeSet;
use std::time::Instant;

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cylsets::CylinderSet;
use crate::functionals::{hybrid_parabolic, parabolic, pipeline, random_functional, solve_zeta, tri_decompose};
use crate::quadratic::{
    basis_elem, centrality_check, derivation_check, form_invariance_check, gl_superalgebra, loop_algebra, q_algebra,
    q_mutants, super_jacobi_check, Matrix, ci, C,
};
use crate::rootspace::{table2, Dot, FamilyKind, RootSystem};
use crate::shadow::{
    build_t, hybrid_direction, random_assignment, saturate, verify_main_i, Direction, SaturationResult, ScenarioJson,
    ShadowAssignment, SuppState,
};

pub const SCENARIO_CONTRADICTION: &str = include_str!("../data/lemma_contradiction.json");
pub const SCENARIO_FIXPOINT_IMAGINARY: &str = include_str!("../data/fixpoint_imaginary.json");
pub const SCENARIO_FIXPOINT_ORBIT: &str = include_str!("../data/fixpoint_weyl_orbit.json");
pub const WORKED_SHADOW: &str = include_str!("../data/worked_shadow.json");

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub cases: usize,
    pub failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
    #[serde(skip)]
    pub elapsed_ms: u128,
}

struct Tally {
    cases: usize,
    failures: usize,
    first: Option<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { cases: 0, failures: 0, first: None }
    }

    fn check(&mut self, ok: bool, why: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(why());
            }
        }
    }

    fn finish(self, id: u8, name: &str, start: Instant) -> CriterionResult {
        CriterionResult {
            id,
            name: name.into(),
            pass: self.failures == 0 && self.cases > 0,
            cases: self.cases,
            failures: self.failures,
            first_failure: self.first,
            elapsed_ms: start.elapsed().as_millis(),
        }
    }
}

/// Admissible `(m, n) ∈ {1,2}²` for a family.
pub fn small_ranks(kind: FamilyKind) -> Vec<(usize, usize)> {
    [(1, 1), (1, 2), (2, 1), (2, 2)].into_iter().filter(|&(m, n)| kind.admissible(m, n)).collect()
}

// ---------------------------------------------------------------------------
// Oracles

fn unit(dim: usize, entries: &[(usize, i64)]) -> Dot {
    let mut v = vec![0; dim];
    for &(i, c) in entries {
        v[i] += c;
    }
    Dot(v)
}

/// Literal transcription of the rows of the root table: every root with
/// `|k| ≤ depth`.
pub fn table1_oracle(kind: FamilyKind, m: usize, n: usize, depth: i64) -> BTreeSet<(Dot, i64)> {
    use FamilyKind::*;
    let dim = m + n;
    let eps: Vec<usize> = (0..m).collect();
    let del: Vec<usize> = (m..m + n).collect();
    let mut out = BTreeSet::new();
    let mut row = |finite: Vec<Dot>, period: i64, residue: i64| {
        for d in finite {
            for k in -depth..=depth {
                if (k - residue).rem_euclid(period) == 0 {
                    out.insert((d.clone(), k));
                }
            }
        }
    };
    let singles = |idx: &[usize], c: i64| -> Vec<Dot> {
        idx.iter().flat_map(|&i| [unit(dim, &[(i, c)]), unit(dim, &[(i, -c)])]).collect()
    };
    let pairs = |a: &[usize], b: &[usize]| -> Vec<Dot> {
        let mut v = Vec::new();
        for &i in a {
            for &j in b {
                if i != j {
                    for s in [1, -1] {
                        for t in [1, -1] {
                            v.push(unit(dim, &[(i, s), (j, t)]));
                        }
                    }
                }
            }
        }
        v
    };
    let mixed = || [pairs(&eps, &eps), pairs(&del, &del), pairs(&eps, &del)].concat();
    row(vec![Dot::zero(dim)], 1, 0);
    match kind {
        AEvenOdd2 => {
            row([singles(&eps, 1), singles(&del, 1), mixed()].concat(), 1, 0);
            row(singles(&eps, 2), 2, 1);
            row(singles(&del, 2), 2, 0);
        }
        AOddOdd2 => {
            row(mixed(), 1, 0);
            row(singles(&eps, 2), 2, 1);
            row(singles(&del, 2), 2, 0);
        }
        AEvenEven4 => {
            row([singles(&eps, 1), singles(&del, 1)].concat(), 1, 0);
            row(mixed(), 2, 0);
            row(singles(&eps, 2), 4, 2);
            row(singles(&del, 2), 4, 0);
        }
        D2 => {
            row([singles(&eps, 1), singles(&del, 1)].concat(), 1, 0);
            row([singles(&del, 2), mixed()].concat(), 2, 0);
        }
    }
    out
}

/// Fixed-width bitset over `[-depth, depth]`.
#[derive(Clone)]
struct Bits {
    words: Vec<u64>,
}

impl Bits {
    fn new(width: usize) -> Self {
        Bits { words: vec![0; width.div_ceil(64)] }
    }
    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }
    fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }
    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &x)| (0..64).filter(move |b| x >> b & 1 == 1).map(move |b| w * 64 + b))
    }
    /// `self |= other << shift`
    fn or_shifted(&mut self, other: &Bits, shift: usize) {
        let (ws, bs) = (shift / 64, shift % 64);
        for (i, &x) in other.words.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let j = i + ws;
            if j < self.words.len() {
                self.words[j] |= x << bs;
            }
            if bs > 0 && j + 1 < self.words.len() {
                self.words[j + 1] |= x >> (64 - bs);
            }
        }
    }
}

/// Brute-force `(S+S)∩R ⊆ S` on elements with `|k| ≤ depth`, by shift-OR
/// sumsets of per-coset bitsets.
pub fn brute_closed(s: &CylinderSet, depth: i64) -> bool {
    let rs = s.rs();
    let width = (2 * depth + 1) as usize;
    let bits = |f: &dyn Fn(i64) -> bool| {
        let mut b = Bits::new(width);
        for k in -depth..=depth {
            if f(k) {
                b.set((k + depth) as usize);
            }
        }
        b
    };
    let comps: Vec<(Dot, Bits)> = s
        .components()
        .map(|(d, _)| (d.clone(), bits(&|k| s.member_dot(d, k))))
        .filter(|(_, b)| b.words.iter().any(|&w| w != 0))
        .collect();
    for (a, ba) in &comps {
        for (b, bb) in &comps {
            let c = a.add(b);
            if rs.string(&c).is_none() {
                continue;
            }
            let mut sum = Bits::new(2 * width);
            for x in ba.ones() {
                sum.or_shifted(bb, x);
            }
            for k in -depth..=depth {
                // index of x+y is (x+depth)+(y+depth)
                if sum.get((k + 2 * depth) as usize) && rs.contains_dot(&c, k) && !s.member_dot(&c, k) {
                    return false;
                }
            }
        }
    }
    true
}

pub fn brute_symmetric(s: &CylinderSet, depth: i64) -> bool {
    s.elements(depth).iter().all(|(d, k)| s.member_dot(&d.neg(), -k))
}

// ---------------------------------------------------------------------------
// Criteria

pub fn criterion_1() -> CriterionResult {
    let start = Instant::now();
    let depth = 12;
    let mut t = Tally::new();
    for kind in FamilyKind::ALL {
        for (m, n) in small_ranks(kind) {
            let rs = RootSystem::new(kind, m, n).expect("admissible");
            let oracle = table1_oracle(kind, m, n, depth);
            let dim = m + n;
            let mut direct = BTreeSet::new();
            for code in 0..5usize.pow(dim as u32) {
                let d = Dot((0..dim).map(|i| (code / 5usize.pow(i as u32) % 5) as i64 - 2).collect());
                for k in -depth..=depth {
                    if rs.contains_dot(&d, k) {
                        direct.insert((d.clone(), k));
                    }
                }
            }
            let mut regen = BTreeSet::new();
            for d in rs.finite_roots() {
                let (r, k0) = if d.is_zero() { (1, 0) } else { rs.string_data_dot(&d).expect("finite root") };
                for k in -depth..=depth {
                    if (k - k0).rem_euclid(r) == 0 {
                        regen.insert((d.clone(), k));
                    }
                }
            }
            let tag = format!("{kind} m={m} n={n}");
            t.check(direct == oracle, || {
                format!("{tag}: membership differs at {:?}", direct.symmetric_difference(&oracle).next())
            });
            t.check(regen == oracle, || {
                format!("{tag}: string data differs at {:?}", regen.symmetric_difference(&oracle).next())
            });
        }
    }
    t.finish(1, "Table 1 fidelity", start)
}

pub fn criterion_2() -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::new();
    for kind in FamilyKind::ALL {
        for (m, n) in small_ranks(kind) {
            let rs = RootSystem::new(kind, m, n).expect("admissible");
            let (re, ns) = table2(kind, m, n);
            let tag = format!("{kind} m={m} n={n}");
            t.check(rs.real_finite_roots() == re, || format!("{tag}: real roots differ"));
            t.check(rs.ns_finite_roots() == ns, || format!("{tag}: nonsingular roots differ"));
            let kappa = rs.kappa();
            t.check(kappa == if kind == FamilyKind::AOddOdd2 { 2 } else { 1 }, || format!("{tag}: kappa {kappa}"));
            let covered = |kap: i64, a: &Dot| re.iter().any(|b| re.iter().any(|c| b.add(c) == a.scale(kap)));
            for a in &ns {
                t.check(covered(kappa, a), || format!("{tag}: {} not covered", rs.dot_string(a)));
            }
            if kind == FamilyKind::AOddOdd2 {
                t.check(ns.iter().any(|a| !covered(1, a)), || format!("{tag}: kappa 1 would already cover"));
            }
        }
    }
    t.finish(2, "Table 2 and kappa fidelity", start)
}

/// The assignments swept by criteria 3 and 5.
pub fn sweep_assignments(kind: FamilyKind, count: usize, seed: u64) -> Vec<ShadowAssignment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((kind as u64 + 1) * 0x9e37_79b9));
    let ranks = small_ranks(kind);
    (0..count)
        .map(|i| {
            let (m, n) = ranks[i % ranks.len()];
            let rs = RootSystem::new(kind, m, n).expect("admissible");
            random_assignment(&rs, &mut rng).expect("generator").sa
        })
        .collect()
}

pub const SWEEP_COUNT: usize = 210;

pub fn criterion_3(seed: u64) -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::new();
    for kind in FamilyKind::ALL {
        for (i, sa) in sweep_assignments(kind, SWEEP_COUNT, seed).iter().enumerate() {
            let tag = format!("{kind} #{i}");
            match verify_main_i(sa) {
                Ok(rep) => t.check(rep.pass, || {
                    let bad = rep.checks.iter().find(|c| !c.pass).expect("failing check");
                    format!("{tag}: {} ({:?})", bad.name, bad.witness)
                }),
                Err(e) => t.check(false, || format!("{tag}: {e}")),
            }
            let ts = build_t(sa);
            for (name, s) in [("T", &ts.t), ("T(1)", &ts.t1), ("T(2)", &ts.t2)] {
                let depth = 3 * s.window_bound();
                t.check(brute_closed(s, depth) == s.is_closed(), || format!("{tag}: {name} closure oracle disagrees"));
                t.check(brute_symmetric(s, depth) == s.is_symmetric(), || {
                    format!("{tag}: {name} symmetry oracle disagrees")
                });
            }
        }
    }
    t.finish(3, "T, T(1), T(2) symmetric and closed", start)
}

pub fn criterion_4(seed: u64) -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::new();
    for kind in FamilyKind::ALL {
        for (i, sa) in sweep_assignments(kind, 120, seed.wrapping_add(4)).iter().enumerate() {
            let tag = format!("{kind} #{i}");
            let rs = sa.rs();
            let ts = build_t(sa);
            let s = ts.t2.union(&CylinderSet::imaginary(rs)).expect("same root system");
            let dir = match hybrid_direction(sa, &s) {
                Ok(d) if d != Direction::Mixed => d,
                other => {
                    t.check(false, || format!("{tag}: direction {other:?}"));
                    continue;
                }
            };
            let p = hybrid_parabolic(sa, &s, dir);
            match solve_zeta(&s, &p) {
                Ok(Some(z)) => {
                    let td = tri_decompose(&s, &z);
                    let recon = td.plus.union(&td.zero).expect("same root system");
                    t.check(recon == p, || format!("{tag}: reconstruction differs from P"));
                }
                Ok(None) => t.check(false, || format!("{tag}: reported infeasible")),
                Err(e) => t.check(false, || format!("{tag}: {e}")),
            }
        }
    }
    t.finish(4, "hybrid parabolics realized by a functional", start)
}

pub fn criterion_5(seed: u64) -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::new();
    for kind in FamilyKind::ALL {
        for (i, sa) in sweep_assignments(kind, SWEEP_COUNT, seed).iter().enumerate() {
            match pipeline(sa) {
                Ok(rep) => t.check(rep.t_zero_matches && rep.t_prime_finite, || format!("{kind} #{i}: {}", rep.chain)),
                Err(e) => t.check(false, || format!("{kind} #{i}: {e}")),
            }
        }
    }
    t.finish(5, "pipeline ends in a finite set", start)
}

pub fn criterion_6(seed: u64) -> CriterionResult {
    let start = Instant::now();
    let depth = 20;
    let mut t = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(6));
    for kind in FamilyKind::ALL {
        let ranks = small_ranks(kind);
        for i in 0..100 {
            let (m, n) = ranks[i % ranks.len()];
            let rs = RootSystem::new(kind, m, n).expect("admissible");
            let lam = random_functional(m, n, &mut rng);
            let mu = random_functional(m, n, &mut rng);
            let tag = format!("{kind} #{i}");
            let ps = match parabolic(&rs, &lam, Some(&mu)) {
                Ok(ps) => ps,
                Err(e) => {
                    t.check(false, || format!("{tag}: {e}"));
                    continue;
                }
            };
            let (cover, closed) = ps.axioms();
            t.check(cover && closed, || format!("{tag}: axioms cover={cover} closed={closed}"));
            let brute_cover =
                rs.enumerate(depth).iter().all(|(d, k)| ps.p.member_dot(d, *k) || ps.p.member_dot(&d.neg(), -k));
            t.check(brute_cover, || format!("{tag}: brute-force cover fails"));
            t.check(brute_closed(&ps.p, depth), || format!("{tag}: brute-force closure fails"));
        }
    }
    t.finish(6, "parabolic axioms", start)
}

pub fn criterion_7() -> CriterionResult {
    let start = Instant::now();
    let window = 21;
    let mut t = Tally::new();
    let alg = q_algebra(window).expect("window");
    let rep = super_jacobi_check(&alg, window);
    t.check(rep.violations.is_empty(), || format!("Jacobi: {:?}", rep.violations.first()));
    t.check(rep.antisymmetry_violations.is_empty(), || {
        format!("antisymmetry: {:?}", rep.antisymmetry_violations.first())
    });
    let mutants = q_mutants(&alg, window, 25);
    t.check(mutants.len() == 50, || format!("only {} mutants", mutants.len()));
    for (name, m) in &mutants {
        t.check(!super_jacobi_check(m, window).ok(), || format!("missed mutant {name}"));
    }
    t.finish(7, "Q is a Lie superalgebra", start)
}

/// The order-2 and order-4 automorphisms of `gl(2|1)` used by criterion 8.
pub fn gl21_sigmas() -> Vec<(String, Matrix, usize)> {
    let i = C::new(Zero::zero(), num_traits::One::one());
    vec![
        ("identity".into(), Matrix::identity(9), 2),
        ("Ad diag(1,-1|1)".into(), Matrix::adjoint_diag(&[ci(1), ci(-1), ci(1)]), 2),
        ("Ad diag(1,i|1)".into(), Matrix::adjoint_diag(&[ci(1), i, ci(1)]), 4),
    ]
}

pub fn criterion_8() -> CriterionResult {
    let start = Instant::now();
    let window = 4;
    let mut t = Tally::new();
    let base = gl_superalgebra(2, 1);
    for (name, sigma, l) in gl21_sigmas() {
        let alg = match loop_algebra(&base, &sigma, l, window) {
            Ok(a) => a,
            Err(e) => {
                t.check(false, || format!("{name}: {e}"));
                continue;
            }
        };
        let rep = super_jacobi_check(&alg, window);
        t.check(rep.ok(), || format!("{name}: Jacobi {:?}", rep.violations.first()));
        let (_, bad) = form_invariance_check(&alg, window);
        t.check(bad.is_empty(), || format!("{name}: form {:?}", bad.first()));
        let c = alg.dim() - 2;
        let d = alg.dim() - 1;
        let cent = centrality_check(&alg, &[basis_elem(c)], window).expect("in basis");
        t.check(cent[0].central, || format!("{name}: c not central ({:?})", cent[0].witness));
        let bad = derivation_check(&alg, d);
        t.check(bad.is_empty(), || format!("{name}: d fails on {:?}", bad.first()));
    }
    t.finish(8, "loop bracket laws over gl(2|1)", start)
}

/// Runs a saturation scenario given as JSON.
pub fn run_scenario(text: &str) -> Result<SaturationResult, String> {
    let sc: ScenarioJson = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let kind: FamilyKind = sc.family.parse().map_err(|e: crate::rootspace::RootError| e.to_string())?;
    let rs = RootSystem::new(kind, sc.m, sc.n).map_err(|e| e.to_string())?;
    let sa = ShadowAssignment::from_json(&rs, &sc.assignment).map_err(|e| e.to_string())?;
    let state = SuppState { concrete: sc.seeds.into_iter().collect(), families: sc.families.into_iter().collect() };
    saturate(&state, &sa, sc.budget).map_err(|e| e.to_string())
}

pub fn criterion_9() -> CriterionResult {
    let start = Instant::now();
    let mut t = Tally::new();
    match run_scenario(SCENARIO_CONTRADICTION) {
        Ok(SaturationResult::Contradiction(_)) => t.check(true, String::new),
        other => t.check(false, || format!("full-ln scenario gave {other:?}")),
    }
    for (name, text) in [("imaginary seed", SCENARIO_FIXPOINT_IMAGINARY), ("orbit seed", SCENARIO_FIXPOINT_ORBIT)] {
        match run_scenario(text) {
            Ok(SaturationResult::Consistent(_)) => t.check(true, String::new),
            other => t.check(false, || format!("{name} gave {other:?}")),
        }
    }
    t.finish(9, "saturation replay", start)
}

pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(seed),
        criterion_4(seed),
        criterion_5(seed),
        criterion_6(seed),
        criterion_7(),
        criterion_8(),
        criterion_9(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cylsets::ZSet;

    #[test]
    fn brute_closure_agrees_on_small_sets() {
        let rs = RootSystem::new(FamilyKind::D2, 1, 1).unwrap();
        let e = Dot(vec![1, 0]);
        let only_e = CylinderSet::from_components(&rs, [(e.clone(), ZSet::all())]);
        assert!(brute_closed(&only_e, 12) && only_e.is_closed());
        let line = CylinderSet::from_components(&rs, [(e.clone(), ZSet::all()), (e.neg(), ZSet::all())]);
        assert!(!brute_closed(&line, 12) && !line.is_closed());
        let full = CylinderSet::full(&rs);
        assert!(brute_closed(&full, 12));
    }

    #[test]
    fn oracle_row_counts() {
        // D(2,1)^(2): 0, ±ε₁, ±δ₁ every k; ±2δ₁, ±ε₁±δ₁ on even k
        let o = table1_oracle(FamilyKind::D2, 1, 1, 1);
        assert_eq!(o.len(), 3 * 5 + 6);
    }

    #[test]
    fn fast_criteria_pass() {
        for r in [criterion_1(), criterion_2(), criterion_9()] {
            assert!(r.pass, "{r:?}");
        }
    }
}
