//! Finite local Moufang sets as explicit permutation data.
//!
//! A [`FinMoufang`] is built from a point set with an equivalence partition,
//! the full element list of one root group `U_inf`, and a permutation `tau`.
//! The constructor validates the construction hypotheses (a fixed point with
//! sharp transitivity off its class, induced sharp transitivity on classes,
//! and the two-step condition on `tau`), then derives the translations
//! `alpha_x`, the opposite root group `U_0`, negation on both sides and the
//! mu-maps of all units.
//!
//! All actions are on the right: `x * (f * g)` means apply `f` first. The
//! identity suites quantify over all unit mu-maps wherever a statement is
//! about mu-maps in general.

use crate::jordan::Side;
use crate::report::VerifyReport;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use thiserror::Error;

/// A permutation of the point set, stored as a dense image table.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    map: Vec<usize>,
}

impl Perm {
    pub fn identity(n: usize) -> Perm {
        Perm {
            map: (0..n).collect(),
        }
    }

    pub fn new(map: Vec<usize>) -> Result<Perm, MoufangError> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &v in &map {
            if v >= n || seen[v] {
                return Err(MoufangError::NotBijective);
            }
            seen[v] = true;
        }
        Ok(Perm { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    /// Right-action composition: `x * self.then(g) == (x * self) * g`.
    pub fn then(&self, g: &Perm) -> Perm {
        Perm {
            map: self.map.iter().map(|&v| g.map[v]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut map = vec![0; self.map.len()];
        for (i, &v) in self.map.iter().enumerate() {
            map[v] = i;
        }
        Perm { map }
    }

    /// Conjugate `self^h = h^{-1} self h`.
    pub fn conj(&self, h: &Perm) -> Perm {
        h.inverse().then(self).then(h)
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &v)| i == v)
    }

    pub fn table(&self) -> &[usize] {
        &self.map
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MoufangError {
    #[error("permutation table is not a bijection")]
    NotBijective,
    #[error("classes do not partition the point set")]
    BadPartition,
    #[error("need more than 2 equivalence classes, got {0}")]
    TooFewClasses(usize),
    #[error("root group data is not a group: {0}")]
    NotAGroup(String),
    #[error("{0} does not preserve the equivalence partition")]
    ClassNotPreserved(String),
    #[error("fixed-point condition fails: {0}")]
    C1Failure(String),
    #[error("induced class action is not sharply transitive: {0}")]
    C1PrimeFailure(String),
    #[error("two-step condition on tau fails: {0}")]
    C2Failure(String),
    #[error("point {0} is not a unit")]
    NotUnit(String),
    #[error("point {0} violates the side restriction for this operation")]
    SideViolation(String),
    #[error("scalar hypothesis fails: {0}")]
    HypothesisFailed(String),
    #[error("division has no solution for {0}")]
    NoSolution(String),
    #[error("division is not unique for {0}")]
    NotUnique(String),
    #[error("constructive division formula disagrees with search at {0}")]
    DivisionMismatch(String),
    #[error("mu-map factorization disagrees with the construction at {0}")]
    MuMismatch(String),
    #[error("group closure exceeds cap {0}")]
    CapExceeded(usize),
    #[error("moufang data is malformed: {0}")]
    BadData(String),
}

/// Serialized form of a [`FinMoufang`]: point labels, the equivalence
/// partition, the full element list of `U_inf` and `tau`, all as dense
/// tables. Round-trips losslessly.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct MoufangData {
    pub points: Vec<String>,
    pub classes: Vec<Vec<usize>>,
    pub u_inf: Vec<Vec<usize>>,
    pub tau: Vec<usize>,
}

impl MoufangData {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("moufang data serializes")
    }

    pub fn from_json(s: &str) -> Result<MoufangData, MoufangError> {
        serde_json::from_str(s).map_err(|e| MoufangError::BadData(e.to_string()))
    }
}

/// Result of the little-projective-group closure.
#[derive(Debug, Clone)]
pub struct GroupSummary {
    pub order: usize,
    pub pair_transitive: bool,
    pub elements: Vec<Perm>,
}

/// A validated finite local-Moufang-set candidate with all derived data.
#[derive(Debug, Clone)]
pub struct FinMoufang {
    labels: Vec<String>,
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
    u_inf: Vec<Perm>,
    tau: Perm,
    inf: usize,
    zero: usize,
    alpha_of: Vec<Option<usize>>,
    u0: Vec<Perm>,
    g0_of: Vec<Option<usize>>,
    neg_of: Vec<Option<usize>>,
    tneg_of: Vec<Option<usize>>,
    mu_of: Vec<Option<Perm>>,
    units: Vec<usize>,
}

impl FinMoufang {
    /// Run the construction: validate the input data and hypotheses, then
    /// derive translations, the opposite root group and all mu-maps.
    ///
    /// If several points are fixed by the whole of `U_inf` (they necessarily
    /// share one class), the designated infinity is the first one in
    /// enumeration order satisfying the two-step condition on `tau`.
    pub fn build(
        labels: Vec<String>,
        classes: Vec<Vec<usize>>,
        u_inf: Vec<Perm>,
        tau: Perm,
    ) -> Result<FinMoufang, MoufangError> {
        let n = labels.len();
        if tau.len() != n || u_inf.iter().any(|p| p.len() != n) {
            return Err(MoufangError::BadData(
                "permutation length does not match point count".into(),
            ));
        }

        let mut class_of = vec![usize::MAX; n];
        for (cid, class) in classes.iter().enumerate() {
            if class.is_empty() {
                return Err(MoufangError::BadPartition);
            }
            for &p in class {
                if p >= n || class_of[p] != usize::MAX {
                    return Err(MoufangError::BadPartition);
                }
                class_of[p] = cid;
            }
        }
        if class_of.contains(&usize::MAX) {
            return Err(MoufangError::BadPartition);
        }
        if classes.len() <= 2 {
            return Err(MoufangError::TooFewClasses(classes.len()));
        }

        // classes map onto classes; bijectivity makes the one-sided check enough
        let preserves = |p: &Perm| -> bool {
            classes.iter().all(|class| {
                let target = class_of[p.apply(class[0])];
                class.iter().all(|&x| class_of[p.apply(x)] == target)
            })
        };
        for (i, p) in u_inf.iter().enumerate() {
            if !preserves(p) {
                return Err(MoufangError::ClassNotPreserved(format!("u_inf[{i}]")));
            }
        }
        if !preserves(&tau) {
            return Err(MoufangError::ClassNotPreserved("tau".into()));
        }

        let set: HashSet<&Perm> = u_inf.iter().collect();
        if set.len() != u_inf.len() {
            return Err(MoufangError::NotAGroup("duplicate elements".into()));
        }
        if !set.contains(&Perm::identity(n)) {
            return Err(MoufangError::NotAGroup("missing identity".into()));
        }
        for p in &u_inf {
            if !set.contains(&p.inverse()) {
                return Err(MoufangError::NotAGroup("not closed under inverse".into()));
            }
            for q in &u_inf {
                if !set.contains(&p.then(q)) {
                    return Err(MoufangError::NotAGroup(
                        "not closed under composition".into(),
                    ));
                }
            }
        }

        // fixed points of U, all in one class; sharp transitivity off it
        let fixed: Vec<usize> = (0..n)
            .filter(|&x| u_inf.iter().all(|u| u.apply(x) == x))
            .collect();
        let Some(&first_fixed) = fixed.first() else {
            return Err(MoufangError::C1Failure("U has no fixed point".into()));
        };
        if fixed.iter().any(|&x| class_of[x] != class_of[first_fixed]) {
            return Err(MoufangError::C1Failure(
                "fixed points of U span more than one class".into(),
            ));
        }
        let inf_class = class_of[first_fixed];
        let off_class = n - classes[inf_class].len();
        if u_inf.len() != off_class {
            return Err(MoufangError::C1Failure(format!(
                "|U| = {} but the complement of the fixed class has {off_class} points",
                u_inf.len()
            )));
        }
        let base = (0..n)
            .find(|&x| class_of[x] != inf_class)
            .expect("more than two classes");
        {
            let mut seen = vec![false; n];
            for u in &u_inf {
                let img = u.apply(base);
                if class_of[img] == inf_class || seen[img] {
                    return Err(MoufangError::C1Failure(
                        "orbit off the fixed class is not regular".into(),
                    ));
                }
                seen[img] = true;
            }
        }

        // pick infinity: first fixed point with inf*tau not~ inf, inf*tau^2 = inf
        let inf = match fixed
            .iter()
            .copied()
            .find(|&p| class_of[tau.apply(p)] != class_of[p] && tau.apply(tau.apply(p)) == p)
        {
            Some(p) => p,
            None => {
                let p = first_fixed;
                return Err(MoufangError::C2Failure(format!(
                    "no fixed point qualifies; e.g. {}: tau moves it to {} and tau^2 to {}",
                    labels[p],
                    labels[tau.apply(p)],
                    labels[tau.apply(tau.apply(p))],
                )));
            }
        };
        let zero = tau.apply(inf);

        // induced action on classes is sharply transitive off the fixed class
        let induced_of = |p: &Perm| -> Vec<usize> {
            let mut map = vec![usize::MAX; classes.len()];
            for x in 0..n {
                map[class_of[x]] = class_of[p.apply(x)];
            }
            map
        };
        let induced_set: HashSet<Vec<usize>> = u_inf.iter().map(induced_of).collect();
        if induced_set.len() != classes.len() - 1 {
            return Err(MoufangError::C1PrimeFailure(format!(
                "induced group has order {} on {} classes",
                induced_set.len(),
                classes.len()
            )));
        }
        {
            let base_class = (0..classes.len()).find(|&c| c != inf_class).unwrap();
            let mut seen = vec![false; classes.len()];
            for q in &induced_set {
                let img = q[base_class];
                if img == inf_class || seen[img] {
                    return Err(MoufangError::C1PrimeFailure(
                        "induced orbit is not regular".into(),
                    ));
                }
                seen[img] = true;
            }
        }

        let mut alpha_of = vec![None; n];
        for (i, u) in u_inf.iter().enumerate() {
            alpha_of[u.apply(zero)] = Some(i);
        }
        let u0: Vec<Perm> = u_inf.iter().map(|u| u.conj(&tau)).collect();
        let mut g0_of = vec![None; n];
        for (i, g) in u0.iter().enumerate() {
            g0_of[g.apply(inf)] = Some(i);
        }
        let neg_of: Vec<Option<usize>> = (0..n)
            .map(|x| alpha_of[x].map(|i| u_inf[i].inverse().apply(zero)))
            .collect();
        let tneg_of: Vec<Option<usize>> = (0..n)
            .map(|y| g0_of[y].map(|i| u0[i].inverse().apply(inf)))
            .collect();
        let units: Vec<usize> = (0..n)
            .filter(|&x| class_of[x] != class_of[zero] && class_of[x] != inf_class)
            .collect();

        let mut m = FinMoufang {
            labels,
            class_of,
            classes,
            u_inf,
            tau,
            inf,
            zero,
            alpha_of,
            u0,
            g0_of,
            neg_of,
            tneg_of,
            mu_of: vec![None; n],
            units: units.clone(),
        };
        let tau_inv = m.tau.inverse();
        for &x in &units {
            let t1 = tau_inv.apply(m.neg(x));
            let t2 = m.neg(tau_inv.apply(x));
            let mu = m.gamma(t1).then(m.alpha(x)).then(&m.gamma(t2));
            m.mu_of[x] = Some(mu);
        }
        Ok(m)
    }

    pub fn from_data(data: MoufangData) -> Result<FinMoufang, MoufangError> {
        let n = data.points.len();
        let u_inf = data
            .u_inf
            .into_iter()
            .map(|t| {
                if t.len() != n {
                    return Err(MoufangError::BadData("u_inf length mismatch".into()));
                }
                Perm::new(t)
            })
            .collect::<Result<Vec<_>, _>>()?;
        if data.tau.len() != n {
            return Err(MoufangError::BadData("tau length mismatch".into()));
        }
        let tau = Perm::new(data.tau)?;
        FinMoufang::build(data.points, data.classes, u_inf, tau)
    }

    pub fn export(&self) -> MoufangData {
        MoufangData {
            points: self.labels.clone(),
            classes: self.classes.clone(),
            u_inf: self.u_inf.iter().map(|p| p.map.clone()).collect(),
            tau: self.tau.map.clone(),
        }
    }

    // ----- accessors -----

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn class_of(&self, x: usize) -> usize {
        self.class_of[x]
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn equivalent(&self, x: usize, y: usize) -> bool {
        self.class_of[x] == self.class_of[y]
    }

    pub fn inf(&self) -> usize {
        self.inf
    }

    pub fn zero(&self) -> usize {
        self.zero
    }

    pub fn tau(&self) -> &Perm {
        &self.tau
    }

    pub fn u_inf(&self) -> &[Perm] {
        &self.u_inf
    }

    pub fn u_zero(&self) -> &[Perm] {
        &self.u0
    }

    pub fn near_inf(&self, x: usize) -> bool {
        self.class_of[x] == self.class_of[self.inf]
    }

    pub fn near_zero(&self, x: usize) -> bool {
        self.class_of[x] == self.class_of[self.zero]
    }

    /// A unit is a point equivalent to neither 0 nor infinity.
    pub fn is_unit(&self, x: usize) -> bool {
        !self.near_zero(x) && !self.near_inf(x)
    }

    pub fn units(&self) -> &[usize] {
        &self.units
    }

    /// The unique element of `U_inf` sending 0 to x (requires x not ~ inf).
    pub fn alpha(&self, x: usize) -> &Perm {
        &self.u_inf[self.alpha_of[x].expect("alpha is defined off the class of infinity")]
    }

    /// The unique element of `U_0` sending inf to y (requires y not ~ 0).
    pub fn g0(&self, y: usize) -> &Perm {
        &self.u0[self.g0_of[y].expect("g0 is defined off the class of zero")]
    }

    /// `gamma_t`: `alpha_t` conjugated by tau; sends inf to t*tau.
    pub fn gamma(&self, t: usize) -> Perm {
        self.alpha(t).conj(&self.tau)
    }

    /// -x = 0 * alpha_x^{-1} (requires x not ~ inf).
    pub fn neg(&self, x: usize) -> usize {
        self.neg_of[x].expect("negation is defined off the class of infinity")
    }

    /// Additive inverse on the infinity side: inf * g0_y^{-1} (y not ~ 0).
    pub fn tneg(&self, y: usize) -> usize {
        self.tneg_of[y].expect("tilde negation is defined off the class of zero")
    }

    /// The mu-map of a unit, from the construction formula.
    pub fn mu(&self, x: usize) -> Result<&Perm, MoufangError> {
        self.mu_of[x]
            .as_ref()
            .ok_or_else(|| MoufangError::NotUnit(self.labels[x].clone()))
    }

    /// x + z = 0 * alpha_x * alpha_z (both not ~ inf).
    pub fn add_plus(&self, x: usize, z: usize) -> usize {
        self.alpha(z).apply(self.alpha(x).apply(self.zero))
    }

    /// y + w on the infinity side: inf * g0_y * g0_w (both not ~ 0).
    pub fn add_minus(&self, y: usize, w: usize) -> usize {
        self.g0(w).apply(self.g0(y).apply(self.inf))
    }

    /// The mu-map recomputed from its double-coset characterization: g *
    /// alpha_x * h with g, h in `U_0`, g sending inf to -x and h sending x to
    /// inf. Asserts it swaps 0 and infinity and agrees with the construction
    /// formula.
    pub fn mu_factored(&self, x: usize) -> Result<Perm, MoufangError> {
        if !self.is_unit(x) {
            return Err(MoufangError::NotUnit(self.labels[x].clone()));
        }
        let g = self.g0(self.neg(x));
        let h = self.g0(x).inverse();
        let mu = g.then(self.alpha(x)).then(&h);
        if mu.apply(self.zero) != self.inf || mu.apply(self.inf) != self.zero {
            return Err(MoufangError::MuMismatch(format!(
                "{}: product does not swap 0 and infinity",
                self.labels[x]
            )));
        }
        if &mu != self.mu(x)? {
            return Err(MoufangError::MuMismatch(self.labels[x].clone()));
        }
        Ok(mu)
    }

    /// Scalar action: `x . n` = 0 * alpha_x^n on the plus side (x not ~ inf),
    /// `x ~. n` = inf * g0_x^n on the minus side (x not ~ 0).
    pub fn scalar(&self, x: usize, n: usize, side: Side) -> Result<usize, MoufangError> {
        let (p, mut acc) = match side {
            Side::Plus => {
                if self.near_inf(x) {
                    return Err(MoufangError::SideViolation(self.labels[x].clone()));
                }
                (self.alpha(x), self.zero)
            }
            Side::Minus => {
                if self.near_zero(x) {
                    return Err(MoufangError::SideViolation(self.labels[x].clone()));
                }
                (self.g0(x), self.inf)
            }
        };
        for _ in 0..n {
            acc = p.apply(acc);
        }
        Ok(acc)
    }

    fn scalar_domain(&self, side: Side) -> impl Iterator<Item = usize> + '_ {
        let skip = match side {
            Side::Plus => self.class_of[self.inf],
            Side::Minus => self.class_of[self.zero],
        };
        (0..self.len()).filter(move |&x| self.class_of[x] != skip)
    }

    /// The scalar hypothesis behind unique division: every unit stays a unit
    /// under `. k` for all k <= n.
    pub fn division_hypothesis(&self, n: usize, side: Side) -> Result<(), MoufangError> {
        for &u in &self.units {
            for k in 2..=n {
                let uk = self.scalar(u, k, side)?;
                if !self.is_unit(uk) {
                    return Err(MoufangError::HypothesisFailed(format!(
                        "unit {} scaled by {k} gives non-unit {}",
                        self.labels[u], self.labels[uk]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Unique division: the unique y with y . n = x, by exhaustive search
    /// with a uniqueness assertion. For plus-side units the constructive
    /// formula ((-x) . n) mu_{-x} is evaluated as well and must agree.
    pub fn divide(&self, x: usize, n: usize, side: Side) -> Result<usize, MoufangError> {
        self.division_hypothesis(n, side)?;
        match side {
            Side::Plus if self.near_inf(x) => {
                return Err(MoufangError::SideViolation(self.labels[x].clone()))
            }
            Side::Minus if self.near_zero(x) => {
                return Err(MoufangError::SideViolation(self.labels[x].clone()))
            }
            _ => {}
        }
        let mut found = None;
        for y in self.scalar_domain(side) {
            if self.scalar(y, n, side)? == x {
                if found.is_some() {
                    return Err(MoufangError::NotUnique(self.labels[x].clone()));
                }
                found = Some(y);
            }
        }
        let y = found.ok_or_else(|| MoufangError::NoSolution(self.labels[x].clone()))?;
        if side == Side::Plus && self.is_unit(x) {
            let nx = self.neg(x);
            let formula = self.mu(nx)?.apply(self.scalar(nx, n, Side::Plus)?);
            if formula != y {
                return Err(MoufangError::DivisionMismatch(self.labels[x].clone()));
            }
        }
        Ok(y)
    }

    /// (-x) tau = -(x tau) for all units.
    pub fn check_special(&self) -> bool {
        self.units
            .iter()
            .all(|&x| self.tau.apply(self.neg(x)) == self.neg(self.tau.apply(x)))
    }

    pub fn check_abelian(&self) -> bool {
        self.u_inf
            .iter()
            .enumerate()
            .all(|(i, p)| self.u_inf[i + 1..].iter().all(|q| p.then(q) == q.then(p)))
    }

    /// The root group at x: `U_0` conjugated by alpha_x off the class of
    /// infinity, `U_inf` conjugated by gamma_{x tau^{-1}} on it.
    pub fn root_group(&self, x: usize) -> Vec<Perm> {
        if !self.near_inf(x) {
            let a = self.alpha(x);
            self.u0.iter().map(|g| g.conj(a)).collect()
        } else {
            let t = self.tau.inverse().apply(x);
            let c = self.gamma(t);
            self.u_inf.iter().map(|u| u.conj(&c)).collect()
        }
    }

    fn sorted(mut v: Vec<Perm>) -> Vec<Perm> {
        v.sort();
        v
    }

    fn induced(&self, p: &Perm) -> Vec<usize> {
        let mut map = vec![usize::MAX; self.classes.len()];
        for x in 0..self.len() {
            map[self.class_of[x]] = self.class_of[p.apply(x)];
        }
        map
    }

    /// Verify the local Moufang set axioms and all three acceptance criteria
    /// of the construction. The conjugation axiom is checked under `U_inf`
    /// and `U_0`, which generate the little projective group; pass a closure
    /// cap to conjugate by the whole group instead.
    pub fn verify(&self, full_group_cap: Option<usize>) -> VerifyReport {
        let mut rep = VerifyReport::new();
        let n = self.len();

        let u_inf_sorted = Self::sorted(self.u_inf.clone());
        let u0_sorted = Self::sorted(self.u0.clone());
        let groups: Vec<Vec<Perm>> = (0..n).map(|x| Self::sorted(self.root_group(x))).collect();

        rep.sweep("criterion_gamma_conjugate", || {
            for &x in &self.units {
                let t = self.tau.inverse().apply(x);
                let c = self.gamma(t);
                let conj = Self::sorted(self.u_inf.iter().map(|u| u.conj(&c)).collect());
                if conj != groups[x] {
                    return Some(format!("x={}", self.labels[x]));
                }
            }
            None
        });

        rep.sweep("criterion_mu_zero_to_inf", || {
            for &x in &self.units {
                let mu = self.mu_of[x].as_ref().unwrap();
                let conj = Self::sorted(self.u0.iter().map(|g| g.conj(mu)).collect());
                if conj != u_inf_sorted {
                    return Some(format!("x={}", self.labels[x]));
                }
            }
            None
        });

        rep.sweep("criterion_mu_inf_to_zero", || {
            for &x in &self.units {
                let mu = self.mu_of[x].as_ref().unwrap();
                let conj = Self::sorted(self.u_inf.iter().map(|u| u.conj(mu)).collect());
                if conj != u0_sorted {
                    return Some(format!("x={}", self.labels[x]));
                }
            }
            None
        });

        rep.sweep("lm1_class_determines_induced_group", || {
            for class in &self.classes {
                let first: HashSet<Vec<usize>> = groups[class[0]]
                    .iter()
                    .map(|p| self.induced(p))
                    .collect();
                for &y in &class[1..] {
                    let other: HashSet<Vec<usize>> =
                        groups[y].iter().map(|p| self.induced(p)).collect();
                    if other != first {
                        return Some(format!("x={} y={}", self.labels[class[0]], self.labels[y]));
                    }
                }
            }
            None
        });

        rep.sweep("lm2_sharp_transitivity", || {
            for (x, ux) in groups.iter().enumerate() {
                if ux.iter().any(|p| p.apply(x) != x) {
                    return Some(format!("x={}: group does not fix x", self.labels[x]));
                }
                let off: Vec<usize> = (0..n).filter(|&y| !self.equivalent(x, y)).collect();
                if ux.len() != off.len() {
                    return Some(format!("x={}: order mismatch", self.labels[x]));
                }
                if let Some(&base) = off.first() {
                    let mut seen = vec![false; n];
                    for p in ux {
                        let img = p.apply(base);
                        if self.equivalent(img, x) || seen[img] {
                            return Some(format!("x={}: orbit not regular", self.labels[x]));
                        }
                        seen[img] = true;
                    }
                }
            }
            None
        });

        rep.sweep("lm2_prime_class_transitivity", || {
            for (cid, class) in self.classes.iter().enumerate() {
                let induced: HashSet<Vec<usize>> = groups[class[0]]
                    .iter()
                    .map(|p| self.induced(p))
                    .collect();
                if induced.iter().any(|p| p[cid] != cid) {
                    return Some(format!("class of {}: not fixed", self.labels[class[0]]));
                }
                if induced.len() != self.classes.len() - 1 {
                    return Some(format!(
                        "class of {}: induced order {}",
                        self.labels[class[0]],
                        induced.len()
                    ));
                }
                let base = (0..self.classes.len()).find(|&c| c != cid).unwrap();
                let mut seen = vec![false; self.classes.len()];
                for p in &induced {
                    let img = p[base];
                    if img == cid || seen[img] {
                        return Some(format!(
                            "class of {}: orbit not regular",
                            self.labels[class[0]]
                        ));
                    }
                    seen[img] = true;
                }
            }
            None
        });

        let closure_elements;
        let conjugators: Vec<&Perm> = match full_group_cap {
            None => self.u_inf.iter().chain(self.u0.iter()).collect(),
            Some(cap) => match self.little_projective_group(cap) {
                Ok(summary) => {
                    closure_elements = summary.elements;
                    closure_elements.iter().collect()
                }
                Err(e) => {
                    rep.fail("lm3_conjugation", format!("closure failed: {e}"));
                    return rep;
                }
            },
        };
        rep.note(
            "lm3_conjugation_scope",
            if full_group_cap.is_some() {
                "full little projective group".to_string()
            } else {
                "generators U_inf and U_0 (these generate the little projective group)"
                    .to_string()
            },
        );

        rep.sweep("lm3_conjugation", || {
            for x in 0..n {
                for g in &conjugators {
                    let conj = Self::sorted(groups[x].iter().map(|p| p.conj(g)).collect());
                    if conj != groups[g.apply(x)] {
                        return Some(format!("x={}", self.labels[x]));
                    }
                }
            }
            None
        });

        rep.sweep("unit_characterization", || {
            for x in (0..n).filter(|&x| !self.near_inf(x)) {
                let by_class = self.is_unit(x);
                let ind = self.induced(self.alpha(x));
                let zero_class = self.class_of[self.zero];
                if by_class != (ind[zero_class] != zero_class) {
                    return Some(format!("x={}", self.labels[x]));
                }
            }
            None
        });

        rep.sweep("mu_factored_agrees", || {
            for &x in &self.units {
                if let Err(e) = self.mu_factored(x) {
                    return Some(e.to_string());
                }
            }
            None
        });

        rep
    }

    /// Breadth-first closure of `U_inf` and `U_0` under composition; also
    /// verifies transitivity on ordered pairs of non-equivalent points.
    pub fn little_projective_group(&self, cap: usize) -> Result<GroupSummary, MoufangError> {
        let mut gens: Vec<&Perm> = Vec::new();
        let mut gen_seen: HashSet<&Perm> = HashSet::new();
        for p in self.u_inf.iter().chain(self.u0.iter()) {
            if gen_seen.insert(p) {
                gens.push(p);
            }
        }
        let mut elements: Vec<Perm> = vec![Perm::identity(self.len())];
        let mut seen: HashSet<Perm> = elements.iter().cloned().collect();
        let mut head = 0;
        while head < elements.len() {
            let current = elements[head].clone();
            head += 1;
            for g in &gens {
                let next = current.then(g);
                if !seen.contains(&next) {
                    if elements.len() >= cap {
                        return Err(MoufangError::CapExceeded(cap));
                    }
                    seen.insert(next.clone());
                    elements.push(next);
                }
            }
        }

        let mut pair_orbit: HashSet<(usize, usize)> = HashSet::new();
        for g in &elements {
            pair_orbit.insert((g.apply(self.zero), g.apply(self.inf)));
        }
        let mut all_pairs = 0usize;
        let mut pair_transitive = true;
        for x in 0..self.len() {
            for y in 0..self.len() {
                if !self.equivalent(x, y) {
                    all_pairs += 1;
                    if !pair_orbit.contains(&(x, y)) {
                        pair_transitive = false;
                    }
                }
            }
        }
        pair_transitive &= pair_orbit.len() == all_pairs;

        Ok(GroupSummary {
            order: elements.len(),
            pair_transitive,
            elements,
        })
    }

    fn unit_mus(&self) -> Vec<(usize, &Perm)> {
        self.units
            .iter()
            .map(|&u| (u, self.mu_of[u].as_ref().unwrap()))
            .collect()
    }

    /// The identity suite for the root-group calculus: mu-map inverses and
    /// conjugation, the Hua conjugation law, the sum formula, the special
    /// and abelian identities, scalar scaling laws and division
    /// consequences. Statements quantified over mu-maps run over all unit
    /// mu-maps. Checks whose hypotheses fail (not special, non-abelian root
    /// group, units not closed under doubling/tripling) are reported as
    /// skipped.
    pub fn identity_suite(&self) -> VerifyReport {
        let mut rep = VerifyReport::new();
        let special = self.check_special();
        let abelian = self.check_abelian();
        let j3_plus = self.division_hypothesis(3, Side::Plus).is_ok();
        let j3_minus = self.division_hypothesis(3, Side::Minus).is_ok();
        let mus = self.unit_mus();
        let lab = |x: usize| -> &str { &self.labels[x] };

        rep.note("special", special.to_string());
        rep.note("abelian_root_group", abelian.to_string());
        rep.note("unit_scalar_closure_plus", j3_plus.to_string());
        rep.note("unit_scalar_closure_minus", j3_minus.to_string());

        rep.sweep("mu_unit_preservation", || {
            for &(x, mu) in &mus {
                for y in 0..self.len() {
                    if self.is_unit(y) != self.is_unit(mu.apply(y)) {
                        return Some(format!("x={} y={}", lab(x), lab(y)));
                    }
                }
            }
            None
        });

        rep.sweep("mu_neg_inverse", || {
            for &(x, mu) in &mus {
                if self.mu_of[self.neg(x)].as_ref() != Some(&mu.inverse()) {
                    return Some(format!("x={}", lab(x)));
                }
            }
            None
        });

        rep.sweep("mu_conjugation", || {
            for &(x, _) in &mus {
                for &(t, mu_t) in &mus {
                    let xt = mu_t.apply(x);
                    if !self.is_unit(xt) {
                        return Some(format!("x={} t={}: image not a unit", lab(x), lab(t)));
                    }
                    let lhs = self.mu_of[xt].as_ref().unwrap();
                    let rhs = self.mu_of[self.neg(x)].as_ref().unwrap().conj(mu_t);
                    if *lhs != rhs {
                        return Some(format!("x={} t={}", lab(x), lab(t)));
                    }
                }
            }
            None
        });

        rep.sweep("hua_conjugation", || {
            for &(t, mu_t) in &mus {
                for &(u, mu_u) in &mus {
                    let h = mu_t.then(mu_u);
                    for x in (0..self.len()).filter(|&x| !self.near_inf(x)) {
                        if self.alpha(x).conj(&h) != *self.alpha(h.apply(x)) {
                            return Some(format!(
                                "tau=mu_{} mu=mu_{} x={}",
                                lab(t),
                                lab(u),
                                lab(x)
                            ));
                        }
                    }
                }
            }
            None
        });

        rep.sweep("mu_sum_formula", || {
            for &(x, _) in &mus {
                for &(y, _) in &mus {
                    if self.equivalent(x, y) {
                        continue;
                    }
                    // z = (x tau^{-1}) alpha_{-(y tau^{-1})} tau, independent
                    // of which mu-map plays tau
                    let mut z_all: Option<usize> = None;
                    for &(t, mu_t) in &mus {
                        let ti = mu_t.inverse();
                        let z = mu_t.apply(self.alpha(self.neg(ti.apply(y))).apply(ti.apply(x)));
                        match z_all {
                            None => z_all = Some(z),
                            Some(prev) if prev != z => {
                                return Some(format!(
                                    "x={} y={}: z depends on tau=mu_{}",
                                    lab(x),
                                    lab(y),
                                    lab(t)
                                ))
                            }
                            _ => {}
                        }
                    }
                    let z = z_all.unwrap();
                    if !self.is_unit(z) {
                        return Some(format!("x={} y={}: z={} not a unit", lab(x), lab(y), lab(z)));
                    }
                    let y_shift = self.alpha(self.neg(x)).apply(y);
                    let lhs = self.mu_of[y]
                        .as_ref()
                        .unwrap()
                        .then(self.mu_of[z].as_ref().unwrap())
                        .then(self.mu_of[self.neg(x)].as_ref().unwrap());
                    if lhs != *self.mu_of[y_shift].as_ref().unwrap() {
                        return Some(format!("x={} y={}", lab(x), lab(y)));
                    }
                }
            }
            None
        });

        rep.sweep("tilde_element_via_mu", || {
            // (-(x tau^{-1})) tau = -((-x) mu_x) for every mu-map tau, and
            // both agree with the opposite-side negation
            for &(x, mu_x) in &mus {
                let direct = self.neg(mu_x.apply(self.neg(x)));
                if self.tneg(x) != direct {
                    return Some(format!("x={}: opposite-side negation differs", lab(x)));
                }
                for &(t, mu_t) in &mus {
                    let via_tau = mu_t.apply(self.neg(mu_t.inverse().apply(x)));
                    if via_tau != direct {
                        return Some(format!("x={} tau=mu_{}", lab(x), lab(t)));
                    }
                }
            }
            None
        });

        if special {
            rep.sweep("special_x_mu_x", || {
                for &(x, mu_x) in &mus {
                    let nx = self.neg(x);
                    if mu_x.apply(x) != nx || self.mu_of[nx].as_ref().unwrap().apply(x) != nx {
                        return Some(format!("x={}", lab(x)));
                    }
                }
                None
            });

            rep.sweep("special_mu_product", || {
                for &(x, mu_x) in &mus {
                    let a = self.alpha(x);
                    for sign_mu in [mu_x, self.mu_of[self.neg(x)].as_ref().unwrap()] {
                        if a.then(&a.conj(sign_mu)).then(a) != *mu_x {
                            return Some(format!("x={}", lab(x)));
                        }
                    }
                }
                None
            });

            rep.sweep("special_sum_identity", || {
                // x mu_{x alpha_y} = (-y) alpha_{-x} alpha_{x mu_y} alpha_{-y}
                for &(x, _) in &mus {
                    for &(y, mu_y) in &mus {
                        let xay = self.alpha(y).apply(x);
                        if !self.is_unit(xay) {
                            continue;
                        }
                        let lhs = self.mu_of[xay].as_ref().unwrap().apply(x);
                        let mut p = self.neg(y);
                        p = self.alpha(self.neg(x)).apply(p);
                        p = self.alpha(mu_y.apply(x)).apply(p);
                        p = self.alpha(self.neg(y)).apply(p);
                        if lhs != p {
                            return Some(format!("x={} y={}", lab(x), lab(y)));
                        }
                    }
                }
                None
            });
        } else {
            for name in ["special_x_mu_x", "special_mu_product", "special_sum_identity"] {
                rep.skip(name, "not a special local Moufang set");
            }
        }

        if special && abelian {
            rep.sweep("abelian_mu_involution", || {
                for &(x, mu_x) in &mus {
                    if !mu_x.then(mu_x).is_identity()
                        || self.mu_of[self.neg(x)].as_ref() != Some(mu_x)
                    {
                        return Some(format!("x={}", lab(x)));
                    }
                }
                None
            });

            rep.sweep("abelian_mu_conj_transfer", || {
                for &(x, mu_x) in &mus {
                    for &(y, mu_y) in &mus {
                        let img = mu_y.apply(x);
                        if !self.is_unit(img) {
                            return Some(format!("x={} y={}: image not a unit", lab(x), lab(y)));
                        }
                        if mu_x.conj(mu_y) != *self.mu_of[img].as_ref().unwrap() {
                            return Some(format!("x={} y={}", lab(x), lab(y)));
                        }
                    }
                }
                None
            });

            rep.sweep("abelian_three_term_commutation", || {
                for &(x, mu_x) in &mus {
                    for &(y, mu_y) in &mus {
                        let xay = self.alpha(y).apply(x);
                        if !self.is_unit(xay) {
                            continue;
                        }
                        let mu_xay = self.mu_of[xay].as_ref().unwrap();
                        let a = mu_x.then(mu_xay).then(mu_y);
                        let b = mu_y.then(mu_xay).then(mu_x);
                        if a != b {
                            return Some(format!("x={} y={}", lab(x), lab(y)));
                        }
                        // both also equal the mu-map of (x tau alpha_{y tau}) tau
                        for &(t, mu_t) in &mus {
                            let z =
                                mu_t.apply(self.alpha(mu_t.apply(y)).apply(mu_t.apply(x)));
                            if !self.is_unit(z) {
                                return Some(format!(
                                    "x={} y={} tau=mu_{}: composite not a unit",
                                    lab(x),
                                    lab(y),
                                    lab(t)
                                ));
                            }
                            if a != *self.mu_of[z].as_ref().unwrap() {
                                return Some(format!(
                                    "x={} y={} tau=mu_{}",
                                    lab(x),
                                    lab(y),
                                    lab(t)
                                ));
                            }
                        }
                    }
                }
                None
            });
        } else {
            for name in [
                "abelian_mu_involution",
                "abelian_mu_conj_transfer",
                "abelian_three_term_commutation",
            ] {
                rep.skip(name, "root groups not abelian (or set not special)");
            }
        }

        rep.sweep("scalar_duality", || {
            // (x.n) tau = (x tau) ~.n for the designated tau and all mu-maps
            let mut taus: Vec<&Perm> = vec![&self.tau];
            taus.extend(mus.iter().map(|&(_, m)| m));
            for tau in taus {
                for x in (0..self.len()).filter(|&x| !self.near_inf(x)) {
                    for n in [2usize, 3] {
                        let lhs = tau.apply(self.scalar(x, n, Side::Plus).unwrap());
                        let rhs = self.scalar(tau.apply(x), n, Side::Minus).unwrap();
                        if lhs != rhs {
                            return Some(format!("x={} n={n}", lab(x)));
                        }
                    }
                }
            }
            None
        });

        if special && abelian && j3_plus {
            rep.sweep("mu_scaling", || {
                for &(x, mu_x) in &mus {
                    let x2 = self.scalar(x, 2, Side::Plus).unwrap();
                    let x3 = self.scalar(x, 3, Side::Plus).unwrap();
                    let xh = match self.divide(x, 2, Side::Plus) {
                        Ok(v) => v,
                        Err(e) => return Some(format!("x={}: {e}", lab(x))),
                    };
                    let xt = match self.divide(x, 3, Side::Plus) {
                        Ok(v) => v,
                        Err(e) => return Some(format!("x={}: {e}", lab(x))),
                    };
                    if ![x2, x3, xh, xt].iter().all(|&p| self.is_unit(p)) {
                        return Some(format!("x={}: scaled point not a unit", lab(x)));
                    }
                    let mu_x2 = self.mu_of[x2].as_ref().unwrap();
                    let mu_x3 = self.mu_of[x3].as_ref().unwrap();
                    let mu_xh = self.mu_of[xh].as_ref().unwrap();
                    let mu_xt = self.mu_of[xt].as_ref().unwrap();
                    for y in (0..self.len()).filter(|&y| !self.near_zero(y)) {
                        let base = mu_x.apply(y);
                        if mu_x2.apply(y) != self.scalar(base, 4, Side::Plus).unwrap()
                            || mu_x3.apply(y) != self.scalar(base, 9, Side::Plus).unwrap()
                            || self.scalar(mu_xh.apply(y), 4, Side::Plus).unwrap() != base
                            || self.scalar(mu_xt.apply(y), 9, Side::Plus).unwrap() != base
                        {
                            return Some(format!("x={} y={}", lab(x), lab(y)));
                        }
                    }
                }
                None
            });
        } else {
            rep.skip("mu_scaling", "requires special + abelian + unit scalar closure");
        }

        if special && abelian && j3_minus {
            rep.sweep("mu_scaling_tilde", || {
                for &(x, mu_x) in &mus {
                    let x2 = self.scalar(x, 2, Side::Minus).unwrap();
                    let x3 = self.scalar(x, 3, Side::Minus).unwrap();
                    let xh = match self.divide(x, 2, Side::Minus) {
                        Ok(v) => v,
                        Err(e) => return Some(format!("x={}: {e}", lab(x))),
                    };
                    let xt = match self.divide(x, 3, Side::Minus) {
                        Ok(v) => v,
                        Err(e) => return Some(format!("x={}: {e}", lab(x))),
                    };
                    if ![x2, x3, xh, xt].iter().all(|&p| self.is_unit(p)) {
                        return Some(format!("x={}: scaled point not a unit", lab(x)));
                    }
                    let mu_x2 = self.mu_of[x2].as_ref().unwrap();
                    let mu_x3 = self.mu_of[x3].as_ref().unwrap();
                    let mu_xh = self.mu_of[xh].as_ref().unwrap();
                    let mu_xt = self.mu_of[xt].as_ref().unwrap();
                    for y in (0..self.len()).filter(|&y| !self.near_inf(y)) {
                        let base = mu_x.apply(y);
                        if mu_x2.apply(y) != self.scalar(base, 4, Side::Minus).unwrap()
                            || mu_x3.apply(y) != self.scalar(base, 9, Side::Minus).unwrap()
                            || self.scalar(mu_xh.apply(y), 4, Side::Minus).unwrap() != base
                            || self.scalar(mu_xt.apply(y), 9, Side::Minus).unwrap() != base
                        {
                            return Some(format!("x={} y={}", lab(x), lab(y)));
                        }
                    }
                }
                None
            });
        } else {
            rep.skip(
                "mu_scaling_tilde",
                "requires special + abelian + unit scalar closure",
            );
        }

        if special && j3_plus {
            rep.sweep("division_mu_consequence", || {
                for &(x, _) in &mus {
                    let nx = self.neg(x);
                    let mu_nx = self.mu_of[nx].as_ref().unwrap();
                    for k in [2usize, 3] {
                        let xk = self.scalar(x, k, Side::Plus).unwrap();
                        if self.scalar(mu_nx.apply(xk), k, Side::Plus).unwrap() != nx {
                            return Some(format!("x={} k={k}", lab(x)));
                        }
                    }
                }
                None
            });

            rep.sweep("division_tau_consequence", || {
                for &(x, _) in &mus {
                    for k in [2usize, 3] {
                        let xk = self.scalar(x, k, Side::Plus).unwrap();
                        for &(_, mu_t) in &mus {
                            if self.scalar(mu_t.apply(xk), k, Side::Plus).unwrap() != mu_t.apply(x)
                            {
                                return Some(format!("x={} k={k}", lab(x)));
                            }
                        }
                    }
                }
                None
            });

            rep.sweep("division_unique", || {
                for x in (0..self.len()).filter(|&x| !self.near_inf(x)) {
                    for k in [2usize, 3] {
                        match self.divide(x, k, Side::Plus) {
                            Ok(y) => {
                                if self.scalar(y, k, Side::Plus).unwrap() != x {
                                    return Some(format!("x={} k={k}", lab(x)));
                                }
                            }
                            Err(e) => return Some(format!("x={} k={k}: {e}", lab(x))),
                        }
                    }
                }
                None
            });
        } else {
            for name in [
                "division_mu_consequence",
                "division_tau_consequence",
                "division_unique",
            ] {
                rep.skip(name, "requires special + unit scalar closure");
            }
        }

        rep
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perm_composition_is_right_action() {
        let f = Perm::new(vec![1, 0, 2]).unwrap();
        let g = Perm::new(vec![0, 2, 1]).unwrap();
        // x * (f then g) = g[f[x]]
        assert_eq!(f.then(&g).apply(0), 2);
        assert_eq!(f.then(&g).apply(1), 0);
        assert_eq!(f.inverse().then(&f).apply(1), 1);
        let h = Perm::new(vec![2, 1, 0]).unwrap();
        let c = f.conj(&h);
        for x in 0..3 {
            assert_eq!(c.apply(h.apply(x)), h.apply(f.apply(x)));
        }
        assert!(Perm::new(vec![0, 0, 1]).is_err());
    }

    /// A regular nonabelian control: S_3 acting on itself by right
    /// translation, one extra fixed point, singleton classes, and tau
    /// swapping the fixed point with the identity element.
    fn s3_control() -> FinMoufang {
        let s3: Vec<Perm> = vec![
            Perm::new(vec![0, 1, 2]).unwrap(),
            Perm::new(vec![0, 2, 1]).unwrap(),
            Perm::new(vec![1, 0, 2]).unwrap(),
            Perm::new(vec![1, 2, 0]).unwrap(),
            Perm::new(vec![2, 0, 1]).unwrap(),
            Perm::new(vec![2, 1, 0]).unwrap(),
        ];
        let index = |p: &Perm| s3.iter().position(|q| q == p).unwrap();
        // point 0 is the extra fixed point; points 1..=6 are S_3
        let u: Vec<Perm> = s3
            .iter()
            .map(|g| {
                let mut map = vec![0usize];
                map.extend(s3.iter().map(|x| index(&x.then(g)) + 1));
                Perm::new(map).unwrap()
            })
            .collect();
        let mut tau_map: Vec<usize> = (0..7).collect();
        tau_map.swap(0, 1);
        let labels = (0..7).map(|i| format!("p{i}")).collect();
        let classes = (0..7).map(|i| vec![i]).collect();
        FinMoufang::build(labels, classes, u, Perm::new(tau_map).unwrap()).unwrap()
    }

    #[test]
    fn nonabelian_control_builds_and_reports() {
        let m = s3_control();
        assert_eq!(m.inf(), 0);
        assert_eq!(m.zero(), 1);
        assert!(!m.check_abelian());
        assert_eq!(m.units().len(), 5);
    }

    #[test]
    fn build_rejects_identity_tau() {
        let m = s3_control();
        let data = m.export();
        let bad = MoufangData {
            tau: (0..7).collect(),
            ..data
        };
        assert!(matches!(
            FinMoufang::from_data(bad),
            Err(MoufangError::C2Failure(_))
        ));
    }

    #[test]
    fn build_rejects_two_classes() {
        let mut data = s3_control().export();
        data.classes = vec![vec![0], (1..7).collect()];
        assert!(matches!(
            FinMoufang::from_data(data),
            Err(MoufangError::TooFewClasses(2))
        ));
    }

    #[test]
    fn build_rejects_bad_perm() {
        let mut data = s3_control().export();
        data.tau = vec![0; 7];
        assert!(matches!(
            FinMoufang::from_data(data),
            Err(MoufangError::NotBijective)
        ));
    }

    #[test]
    fn export_import_roundtrip() {
        let data = s3_control().export();
        let json = data.to_json();
        let back = MoufangData::from_json(&json).unwrap();
        assert_eq!(back, data);
        let m2 = FinMoufang::from_data(back).unwrap();
        assert_eq!(m2.export(), data);
    }
}
