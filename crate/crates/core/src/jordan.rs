//! Quadratic Jordan pairs over finite abelian groups.
//!
//! A pair consists of two finite additive modules (V+, V-) together with a
//! family of quadratic operators Q: for x in one module, `Q_x` maps the other
//! module back into x's module. Everything downstream (quasi-inverses, the
//! Bergman operator, the radical, locality, the axiom verifier) is decided by
//! exhaustive computation over the finite carriers, with uniqueness asserted
//! wherever an inverse is solved for by search.
//!
//! Construction is two-stage: a [`PairCandidate`] holds the raw operator
//! tables and can be precheck-verified (additivity and quadraticity of Q);
//! [`PairCandidate::validate`] promotes it to a [`JordanPair`], so downstream
//! code may assume the prechecks hold.

use crate::report::VerifyReport;
use crate::ring::Ring;
use std::fmt;
use std::sync::OnceLock;
use thiserror::Error;

/// Which of the two modules an element lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Plus => write!(f, "+"),
            Side::Minus => write!(f, "-"),
        }
    }
}

/// A sided element: an index into the module of its side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JElem {
    pub side: Side,
    pub idx: usize,
}

impl JElem {
    pub fn plus(idx: usize) -> Self {
        JElem {
            side: Side::Plus,
            idx,
        }
    }
    pub fn minus(idx: usize) -> Self {
        JElem {
            side: Side::Minus,
            idx,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JordanError {
    #[error("side mismatch: expected {expected}, got {got}")]
    SideMismatch { expected: Side, got: Side },
    #[error("element {0} is not invertible")]
    NotInvertible(String),
    #[error("pair ({0}, {1}) is not quasi-invertible")]
    NotQuasiInvertible(String, String),
    #[error("operator precheck failed: {name} (witness: {witness})")]
    PrecheckFailed { name: String, witness: String },
    #[error("modules have inconsistent table sizes")]
    BadTables,
}

/// A finite additive abelian group with a fixed enumeration and labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinModule {
    name: String,
    labels: Vec<String>,
    add: Vec<usize>,
    neg: Vec<usize>,
    zero: usize,
}

impl FinModule {
    pub fn from_tables(
        name: String,
        labels: Vec<String>,
        add: Vec<usize>,
        neg: Vec<usize>,
        zero: usize,
    ) -> Result<Self, JordanError> {
        let n = labels.len();
        let ok = add.len() == n * n
            && neg.len() == n
            && zero < n
            && add.iter().all(|&v| v < n)
            && neg.iter().all(|&v| v < n);
        if !ok {
            return Err(JordanError::BadTables);
        }
        Ok(FinModule {
            name,
            labels,
            add,
            neg,
            zero,
        })
    }

    /// The additive group of a finite local ring.
    pub fn from_ring(ring: &Ring) -> Self {
        let n = ring.size() as usize;
        let elems: Vec<_> = ring.elements().collect();
        let mut add = vec![0usize; n * n];
        for (i, &a) in elems.iter().enumerate() {
            for (j, &b) in elems.iter().enumerate() {
                add[i * n + j] = ring.add(a, b).rep() as usize;
            }
        }
        let neg = elems.iter().map(|&a| ring.neg(a).rep() as usize).collect();
        let labels = elems.iter().map(|&a| ring.label(a)).collect();
        FinModule {
            name: ring.spec().to_string(),
            labels,
            add,
            neg,
            zero: 0,
        }
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn zero(&self) -> usize {
        self.zero
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.size() + b]
    }

    pub fn neg(&self, a: usize) -> usize {
        self.neg[a]
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg[b])
    }

    /// n-fold sum of `a` with itself.
    pub fn scalar(&self, a: usize, n: usize) -> usize {
        let mut acc = self.zero;
        for _ in 0..n {
            acc = self.add(acc, a);
        }
        acc
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    /// The inverse of `a -> n*a` if that map is a bijection.
    pub fn division_map(&self, n: usize) -> Option<Vec<usize>> {
        let mut inv = vec![usize::MAX; self.size()];
        for a in 0..self.size() {
            let m = self.scalar(a, n);
            if inv[m] != usize::MAX {
                return None;
            }
            inv[m] = a;
        }
        Some(inv)
    }

    /// First witness violating the abelian-group laws, if any.
    pub fn abelian_group_witness(&self) -> Option<String> {
        let n = self.size();
        for a in 0..n {
            if self.add(a, self.zero) != a {
                return Some(format!("{} + 0 != {0}", self.label(a)));
            }
            if self.add(a, self.neg(a)) != self.zero {
                return Some(format!("{} + (-{0}) != 0", self.label(a)));
            }
            for b in 0..n {
                if self.add(a, b) != self.add(b, a) {
                    return Some(format!("{} + {} not commutative", self.label(a), self.label(b)));
                }
                for c in 0..n {
                    if self.add(self.add(a, b), c) != self.add(a, self.add(b, c)) {
                        return Some(format!(
                            "({} + {}) + {} not associative",
                            self.label(a),
                            self.label(b),
                            self.label(c)
                        ));
                    }
                }
            }
        }
        None
    }
}

/// Raw pair data: two modules and dense operator tables.
///
/// `q_plus[x * |V-| + y]` is `y Q_x` for x in V+, y in V-; `q_minus` is the
/// mirror. No algebraic properties are assumed until the prechecks pass.
#[derive(Debug, Clone)]
pub struct PairCandidate {
    pub plus: FinModule,
    pub minus: FinModule,
    pub q_plus: Vec<usize>,
    pub q_minus: Vec<usize>,
}

impl PairCandidate {
    pub fn new(
        plus: FinModule,
        minus: FinModule,
        q_plus: impl Fn(usize, usize) -> usize,
        q_minus: impl Fn(usize, usize) -> usize,
    ) -> Self {
        let (np, nm) = (plus.size(), minus.size());
        let mut qp = vec![0usize; np * nm];
        for x in 0..np {
            for y in 0..nm {
                qp[x * nm + y] = q_plus(x, y);
            }
        }
        let mut qm = vec![0usize; nm * np];
        for y in 0..nm {
            for x in 0..np {
                qm[y * np + x] = q_minus(y, x);
            }
        }
        PairCandidate {
            plus,
            minus,
            q_plus: qp,
            q_minus: qm,
        }
    }

    fn orient(&self, plus_first: bool) -> RawOrient<'_> {
        RawOrient {
            c: self,
            plus_first,
        }
    }

    /// Eager construction-time checks: each Q_x is additive in its argument,
    /// and x -> Q_x is quadratic (doubling/tripling scale by n^2, and the
    /// polarization Q_{x,z} is bi-additive). Exhaustive on both sides.
    pub fn precheck_report(&self) -> VerifyReport {
        let mut rep = VerifyReport::new();
        for plus_first in [true, false] {
            let o = self.orient(plus_first);
            let side = if plus_first { "+" } else { "-" };
            let (n1, n2) = (o.m1().size(), o.m2().size());

            rep.sweep(&format!("q_additive[{side}]"), || {
                for x in 0..n1 {
                    for y in 0..n2 {
                        for y2 in 0..n2 {
                            let lhs = o.q(x, o.m2().add(y, y2));
                            let rhs = o.m1().add(o.q(x, y), o.q(x, y2));
                            if lhs != rhs {
                                return Some(o.witness(&[("x", 1, x), ("y", 2, y), ("y'", 2, y2)]));
                            }
                        }
                    }
                }
                None
            });

            rep.sweep(&format!("q_quadratic_scaling[{side}]"), || {
                for x in 0..n1 {
                    for n in [2usize, 3] {
                        let nx = o.m1().scalar(x, n);
                        for y in 0..n2 {
                            if o.q(nx, y) != o.m1().scalar(o.q(x, y), n * n) {
                                return Some(format!(
                                    "n={n} {}",
                                    o.witness(&[("x", 1, x), ("y", 2, y)])
                                ));
                            }
                        }
                    }
                }
                None
            });

            rep.sweep(&format!("q_biadditive[{side}]"), || {
                for x in 0..n1 {
                    for x2 in 0..n1 {
                        for z in 0..n1 {
                            for y in 0..n2 {
                                let lhs = o.qbi(o.m1().add(x, x2), z, y);
                                let rhs = o.m1().add(o.qbi(x, z, y), o.qbi(x2, z, y));
                                if lhs != rhs {
                                    return Some(o.witness(&[
                                        ("x", 1, x),
                                        ("x'", 1, x2),
                                        ("z", 1, z),
                                        ("y", 2, y),
                                    ]));
                                }
                            }
                        }
                    }
                }
                None
            });
        }
        rep
    }

    /// Promote to a validated pair, or return the failing precheck.
    pub fn validate(self) -> Result<JordanPair, JordanError> {
        let report = self.precheck_report();
        if let Some(c) = report.failed().next() {
            return Err(JordanError::PrecheckFailed {
                name: c.name.clone(),
                witness: c.witness.clone().unwrap_or_default(),
            });
        }
        Ok(JordanPair::from_candidate(self))
    }
}

/// Orientation view over raw candidate tables (no invertibility data).
#[derive(Clone, Copy)]
struct RawOrient<'a> {
    c: &'a PairCandidate,
    plus_first: bool,
}

impl<'a> RawOrient<'a> {
    fn m1(&self) -> &'a FinModule {
        if self.plus_first {
            &self.c.plus
        } else {
            &self.c.minus
        }
    }
    fn m2(&self) -> &'a FinModule {
        if self.plus_first {
            &self.c.minus
        } else {
            &self.c.plus
        }
    }
    /// y Q_x with x on side 1, y on side 2; lands on side 1.
    fn q(&self, x: usize, y: usize) -> usize {
        if self.plus_first {
            self.c.q_plus[x * self.c.minus.size() + y]
        } else {
            self.c.q_minus[x * self.c.plus.size() + y]
        }
    }
    /// y Q_{x,z} = y Q_{x+z} - y Q_x - y Q_z, on side 1.
    fn qbi(&self, x: usize, z: usize, y: usize) -> usize {
        let m1 = self.m1();
        m1.sub(m1.sub(self.q(m1.add(x, z), y), self.q(x, y)), self.q(z, y))
    }

    fn q_bijective(&self, v: usize) -> bool {
        let (n1, n2) = (self.m1().size(), self.m2().size());
        if n1 != n2 {
            return false;
        }
        let mut seen = vec![false; n1];
        for y in 0..n2 {
            let img = self.q(v, y);
            if seen[img] {
                return false;
            }
            seen[img] = true;
        }
        true
    }
    fn witness(&self, parts: &[(&str, u8, usize)]) -> String {
        let side = if self.plus_first { "+" } else { "-" };
        let body: Vec<String> = parts
            .iter()
            .map(|&(name, m, v)| {
                let label = if m == 1 { self.m1().label(v) } else { self.m2().label(v) };
                format!("{name}={label}")
            })
            .collect();
        format!("side={side} {}", body.join(" "))
    }
}

/// A validated quadratic Jordan pair with cached invertibility, radical and
/// quasi-inverse tables. Immutable and shareable.
#[derive(Debug)]
pub struct JordanPair {
    data: PairCandidate,
    inv_plus: Vec<bool>,
    inv_minus: Vec<bool>,
    // x^y for (x, y) in V+ x V- (usize::MAX when not quasi-invertible)
    qi_plus: OnceLock<Vec<usize>>,
    qi_minus: OnceLock<Vec<usize>>,
    rad: OnceLock<(Vec<bool>, Vec<bool>)>,
}

const NOT_QI: usize = usize::MAX;

impl JordanPair {
    fn from_candidate(data: PairCandidate) -> Self {
        let inv_plus = {
            let o = data.orient(true);
            (0..data.plus.size()).map(|v| o.q_bijective(v)).collect()
        };
        let inv_minus = {
            let o = data.orient(false);
            (0..data.minus.size()).map(|v| o.q_bijective(v)).collect()
        };
        JordanPair {
            data,
            inv_plus,
            inv_minus,
            qi_plus: OnceLock::new(),
            qi_minus: OnceLock::new(),
            rad: OnceLock::new(),
        }
    }

    pub fn plus(&self) -> &FinModule {
        &self.data.plus
    }

    pub fn minus(&self) -> &FinModule {
        &self.data.minus
    }

    pub fn module(&self, side: Side) -> &FinModule {
        match side {
            Side::Plus => self.plus(),
            Side::Minus => self.minus(),
        }
    }

    pub(crate) fn orient(&self, plus_first: bool) -> Orient<'_> {
        Orient {
            jp: self,
            plus_first,
        }
    }

    pub fn candidate(&self) -> &PairCandidate {
        &self.data
    }

    pub fn label(&self, e: JElem) -> String {
        self.module(e.side).label(e.idx).to_string()
    }

    // ----- element-level operations (spec surface) -----

    fn expect_side(e: JElem, want: Side) -> Result<usize, JordanError> {
        if e.side == want {
            Ok(e.idx)
        } else {
            Err(JordanError::SideMismatch {
                expected: want,
                got: e.side,
            })
        }
    }

    /// y Q_x. Requires side(y) = -side(x); result is on side(x).
    pub fn q_apply(&self, x: JElem, y: JElem) -> Result<JElem, JordanError> {
        let yi = Self::expect_side(y, x.side.flip())?;
        let o = self.orient(x.side == Side::Plus);
        Ok(JElem {
            side: x.side,
            idx: o.q(x.idx, yi),
        })
    }

    /// y Q_{x,z} = {x y z}. Requires side(x) = side(z) = -side(y).
    pub fn q_bilinear(&self, x: JElem, z: JElem, y: JElem) -> Result<JElem, JordanError> {
        let zi = Self::expect_side(z, x.side)?;
        let yi = Self::expect_side(y, x.side.flip())?;
        let o = self.orient(x.side == Side::Plus);
        Ok(JElem {
            side: x.side,
            idx: o.qbi(x.idx, zi, yi),
        })
    }

    /// The triple product {x y z} = y Q_{x,z}.
    pub fn triple(&self, x: JElem, y: JElem, z: JElem) -> Result<JElem, JordanError> {
        self.q_bilinear(x, z, y)
    }

    /// z B_{x,y} = z - z D_{x,y} + z Q_y Q_x, for x,z on one side and y on
    /// the other.
    pub fn bergman_apply(&self, x: JElem, y: JElem, z: JElem) -> Result<JElem, JordanError> {
        let yi = Self::expect_side(y, x.side.flip())?;
        let zi = Self::expect_side(z, x.side)?;
        let o = self.orient(x.side == Side::Plus);
        Ok(JElem {
            side: x.side,
            idx: o.bergman(x.idx, yi, zi),
        })
    }

    /// True iff Q_v is a bijection between the modules.
    pub fn is_invertible(&self, v: JElem) -> bool {
        match v.side {
            Side::Plus => self.inv_plus[v.idx],
            Side::Minus => self.inv_minus[v.idx],
        }
    }

    /// v^{-1} = v Q_v^{-1}: the unique w on the opposite side with w Q_v = v.
    pub fn jp_inverse(&self, v: JElem) -> Result<JElem, JordanError> {
        if !self.is_invertible(v) {
            return Err(JordanError::NotInvertible(self.label(v)));
        }
        let o = self.orient(v.side == Side::Plus);
        Ok(JElem {
            side: v.side.flip(),
            idx: o.jinv(v.idx),
        })
    }

    /// True iff the Bergman operator B_{x,y} is a bijection.
    pub fn is_quasi_invertible(&self, x: JElem, y: JElem) -> Result<bool, JordanError> {
        let yi = Self::expect_side(y, x.side.flip())?;
        let o = self.orient(x.side == Side::Plus);
        Ok(o.qi(x.idx, yi).is_some())
    }

    /// The quasi-inverse x^y = (x - y Q_x) B_{x,y}^{-1}, solved by exhaustive
    /// search (bijectivity of B guarantees a unique solution).
    pub fn quasi_inverse(&self, x: JElem, y: JElem) -> Result<JElem, JordanError> {
        let yi = Self::expect_side(y, x.side.flip())?;
        let o = self.orient(x.side == Side::Plus);
        match o.qi(x.idx, yi) {
            Some(z) => Ok(JElem {
                side: x.side,
                idx: z,
            }),
            None => Err(JordanError::NotQuasiInvertible(
                self.label(x),
                self.label(y),
            )),
        }
    }

    // ----- cached sweeps -----

    fn qi_table(&self, plus_first: bool) -> &Vec<usize> {
        let cell = if plus_first {
            &self.qi_plus
        } else {
            &self.qi_minus
        };
        cell.get_or_init(|| {
            let o = self.orient(plus_first);
            let (n1, n2) = (o.m1().size(), o.m2().size());
            let mut table = vec![NOT_QI; n1 * n2];
            let mut seen = vec![false; n1];
            for x in 0..n1 {
                for y in 0..n2 {
                    // One scan decides bijectivity of B_{x,y} and solves
                    // z B_{x,y} = x - y Q_x.
                    seen.iter_mut().for_each(|s| *s = false);
                    let target = o.m1().sub(x, o.q(x, y));
                    let mut sol = NOT_QI;
                    let mut bijective = true;
                    for z in 0..n1 {
                        let img = o.bergman(x, y, z);
                        if seen[img] {
                            bijective = false;
                            break;
                        }
                        seen[img] = true;
                        if img == target {
                            sol = z;
                        }
                    }
                    if bijective {
                        debug_assert!(sol != NOT_QI);
                        table[x * n2 + y] = sol;
                    }
                }
            }
            table
        })
    }

    fn rad_tables(&self) -> &(Vec<bool>, Vec<bool>) {
        self.rad.get_or_init(|| {
            let compute = |plus_first: bool| {
                let o = self.orient(plus_first);
                (0..o.m1().size())
                    .map(|x| (0..o.m2().size()).all(|y| o.qi(x, y).is_some()))
                    .collect::<Vec<bool>>()
            };
            (compute(true), compute(false))
        })
    }

    /// The Jacobson radical: per side, the elements x such that (x, y) is
    /// quasi-invertible for every y on the other side.
    pub fn radical(&self) -> (Vec<usize>, Vec<usize>) {
        let (rp, rm) = self.rad_tables();
        let collect = |v: &[bool]| {
            v.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(i, _)| i)
                .collect()
        };
        (collect(rp), collect(rm))
    }

    pub fn in_radical(&self, e: JElem) -> bool {
        let (rp, rm) = self.rad_tables();
        match e.side {
            Side::Plus => rp[e.idx],
            Side::Minus => rm[e.idx],
        }
    }

    // ----- verification sweeps -----

    /// Locality: the non-invertible elements coincide with the radical, the
    /// radical is a proper ideal (submodule plus the three closure
    /// conditions), on both sides.
    pub fn verify_local(&self) -> VerifyReport {
        let mut rep = self.data.precheck_report();
        for plus_first in [true, false] {
            let o = self.orient(plus_first);
            let side = if plus_first { "+" } else { "-" };
            let (n1, n2) = (o.m1().size(), o.m2().size());

            rep.sweep(&format!("rad_equals_noninvertible[{side}]"), || {
                (0..n1).find_map(|x| {
                    if o.rad1(x) == o.inv1(x) {
                        Some(format!(
                            "side={side} x={} radical={} invertible={}",
                            o.m1().label(x),
                            o.rad1(x),
                            o.inv1(x)
                        ))
                    } else {
                        None
                    }
                })
            });

            rep.sweep(&format!("rad_submodule[{side}]"), || {
                if !o.rad1(o.m1().zero()) {
                    return Some(format!("side={side} zero not in radical"));
                }
                for a in (0..n1).filter(|&a| o.rad1(a)) {
                    if !o.rad1(o.m1().neg(a)) {
                        return Some(format!("side={side} -{} not in radical", o.m1().label(a)));
                    }
                    for b in (0..n1).filter(|&b| o.rad1(b)) {
                        if !o.rad1(o.m1().add(a, b)) {
                            return Some(format!(
                                "side={side} {}+{} escapes radical",
                                o.m1().label(a),
                                o.m1().label(b)
                            ));
                        }
                    }
                }
                None
            });

            // Ideal closure: for u in Rad^s, v in V^{-s}, v' in V^s:
            // v Q_u, u Q_v and {v' v u} stay in the radical.
            rep.sweep(&format!("rad_ideal[{side}]"), || {
                for u in (0..n1).filter(|&u| o.rad1(u)) {
                    for v in 0..n2 {
                        if !o.rad1(o.q(u, v)) {
                            return Some(o.witness2("vQ_u escapes radical", &[("u", 1, u), ("v", 2, v)]));
                        }
                        if !o.rad2(o.qop(v, u)) {
                            return Some(o.witness2("uQ_v escapes radical", &[("u", 1, u), ("v", 2, v)]));
                        }
                        for vp in 0..n1 {
                            if !o.rad1(o.qbi(vp, u, v)) {
                                return Some(o.witness2(
                                    "{v' v u} escapes radical",
                                    &[("u", 1, u), ("v", 2, v), ("v'", 1, vp)],
                                ));
                            }
                        }
                    }
                }
                None
            });

            rep.sweep(&format!("rad_proper[{side}]"), || {
                if (0..n1).all(|x| o.rad1(x)) {
                    Some(format!("side={side} radical is the whole module"))
                } else {
                    None
                }
            });
        }
        rep
    }

    /// The Jordan pair axioms, checked exhaustively on both orientations:
    /// JP1, JP2, JP3, their full linearizations, and the squared forms. The
    /// 2-torsion hypothesis of the sufficiency criterion is reported as a
    /// note (it is not an axiom and may legitimately fail, e.g. over Z/4).
    pub fn verify_axioms(&self) -> VerifyReport {
        let mut rep = self.data.precheck_report();

        for plus_first in [true, false] {
            let o = self.orient(plus_first);
            let side = if plus_first { "+" } else { "-" };
            let (n1, n2) = (o.m1().size(), o.m2().size());
            let m1 = o.m1();

            let torsion = (0..n1)
                .find(|&x| x != m1.zero() && m1.scalar(x, 2) == m1.zero())
                .map(|x| m1.label(x).to_string());
            rep.note(
                &format!("no_2_torsion[{side}]"),
                match torsion {
                    None => "holds".to_string(),
                    Some(w) => format!(
                        "fails (2*{w} = 0): sufficiency criterion inapplicable, axioms checked directly"
                    ),
                },
            );

            // JP1: {x y zQ_x} = {y x z} Q_x
            rep.sweep(&format!("jp1[{side}]"), || {
                for x in 0..n1 {
                    for y in 0..n2 {
                        for z in 0..n2 {
                            let lhs = o.qbi(x, o.q(x, z), y);
                            let rhs = o.q(x, o.qbiop(y, z, x));
                            if lhs != rhs {
                                return Some(o.witness2("", &[("x", 1, x), ("y", 2, y), ("z", 2, z)]));
                            }
                        }
                    }
                }
                None
            });

            // JP2: {yQ_x y z} = {x xQ_y z}
            rep.sweep(&format!("jp2[{side}]"), || {
                for x in 0..n1 {
                    for y in 0..n2 {
                        for z in 0..n1 {
                            let lhs = o.qbi(o.q(x, y), z, y);
                            let rhs = o.qbi(x, z, o.qop(y, x));
                            if lhs != rhs {
                                return Some(o.witness2("", &[("x", 1, x), ("y", 2, y), ("z", 1, z)]));
                            }
                        }
                    }
                }
                None
            });

            // JP3: Q_{yQ_x} = Q_x Q_y Q_x
            rep.sweep(&format!("jp3[{side}]"), || {
                for x in 0..n1 {
                    for y in 0..n2 {
                        let yqx = o.q(x, y);
                        for w in 0..n2 {
                            let lhs = o.q(yqx, w);
                            let rhs = o.q(x, o.qop(y, o.q(x, w)));
                            if lhs != rhs {
                                return Some(o.witness2("", &[("x", 1, x), ("y", 2, y), ("w", 2, w)]));
                            }
                        }
                    }
                }
                None
            });

            // Full linearization of JP1:
            // {x y wQ_{v,z}} + {v y wQ_{x,z}} + {z y wQ_{x,v}}
            //   = {y x w}Q_{v,z} + {y v w}Q_{x,z} + {y z w}Q_{x,v}
            rep.sweep(&format!("jp1_linearized[{side}]"), || {
                for x in 0..n1 {
                    for v in 0..n1 {
                        for z in 0..n1 {
                            for y in 0..n2 {
                                for w in 0..n2 {
                                    let lhs = m1.add(
                                        m1.add(
                                            o.qbi(x, o.qbi(v, z, w), y),
                                            o.qbi(v, o.qbi(x, z, w), y),
                                        ),
                                        o.qbi(z, o.qbi(x, v, w), y),
                                    );
                                    let rhs = m1.add(
                                        m1.add(
                                            o.qbi(v, z, o.qbiop(y, w, x)),
                                            o.qbi(x, z, o.qbiop(y, w, v)),
                                        ),
                                        o.qbi(x, v, o.qbiop(y, w, z)),
                                    );
                                    if lhs != rhs {
                                        return Some(o.witness2(
                                            "",
                                            &[
                                                ("x", 1, x),
                                                ("v", 1, v),
                                                ("z", 1, z),
                                                ("y", 2, y),
                                                ("w", 2, w),
                                            ],
                                        ));
                                    }
                                }
                            }
                        }
                    }
                }
                None
            });

            // Full linearization of JP2:
            // {v xQ_{y,w} z} + {x vQ_{y,w} z} = {yQ_{x,v} w z} + {wQ_{x,v} y z}
            rep.sweep(&format!("jp2_linearized[{side}]"), || {
                for x in 0..n1 {
                    for v in 0..n1 {
                        for z in 0..n1 {
                            for y in 0..n2 {
                                for w in 0..n2 {
                                    let lhs = m1.add(
                                        o.qbi(v, z, o.qbiop(y, w, x)),
                                        o.qbi(x, z, o.qbiop(y, w, v)),
                                    );
                                    let rhs = m1.add(
                                        o.qbi(o.qbi(x, v, y), z, w),
                                        o.qbi(o.qbi(x, v, w), z, y),
                                    );
                                    if lhs != rhs {
                                        return Some(o.witness2(
                                            "",
                                            &[
                                                ("x", 1, x),
                                                ("v", 1, v),
                                                ("z", 1, z),
                                                ("y", 2, y),
                                                ("w", 2, w),
                                            ],
                                        ));
                                    }
                                }
                            }
                        }
                    }
                }
                None
            });

            // Squared forms: {x y wQ_{x,x}} = {y x w}Q_{x,x}
            rep.sweep(&format!("jp1_squared[{side}]"), || {
                for x in 0..n1 {
                    for y in 0..n2 {
                        for w in 0..n2 {
                            let lhs = o.qbi(x, o.qbi(x, x, w), y);
                            let rhs = o.qbi(x, x, o.qbiop(y, w, x));
                            if lhs != rhs {
                                return Some(o.witness2("", &[("x", 1, x), ("y", 2, y), ("w", 2, w)]));
                            }
                        }
                    }
                }
                None
            });

            // {x xQ_{y,y} z} = {yQ_{x,x} y z}
            rep.sweep(&format!("jp2_squared[{side}]"), || {
                for x in 0..n1 {
                    for y in 0..n2 {
                        for z in 0..n1 {
                            let lhs = o.qbi(x, z, o.qbiop(y, y, x));
                            let rhs = o.qbi(o.qbi(x, x, y), z, y);
                            if lhs != rhs {
                                return Some(o.witness2("", &[("x", 1, x), ("y", 2, y), ("z", 1, z)]));
                            }
                        }
                    }
                }
                None
            });
        }
        rep
    }

    /// Quasi-inverse and radical identities that hold in any Jordan pair:
    /// the fundamental bilinear identity, the Bergman factorization, the
    /// shift/symmetry/transfer laws for quasi-inverses, and the radical
    /// absorption properties. Exhaustive on both orientations.
    pub fn verify_identities(&self) -> VerifyReport {
        let mut rep = VerifyReport::new();
        for plus_first in [true, false] {
            let o = self.orient(plus_first);
            let side = if plus_first { "+" } else { "-" };
            let (n1, n2) = (o.m1().size(), o.m2().size());
            let (m1, m2) = (o.m1(), o.m2());

            // Q_{x,yQ_x} = Q_x D_{x,y} = D_{y,x} Q_x
            rep.sweep(&format!("fundamental_bilinear[{side}]"), || {
                for x in 0..n1 {
                    for y in 0..n2 {
                        let yqx = o.q(x, y);
                        for w in 0..n2 {
                            let a = o.qbi(x, yqx, w);
                            let b = o.qbi(x, o.q(x, w), y);
                            let c = o.q(x, o.qbiop(y, w, x));
                            if a != b || b != c {
                                return Some(o.witness2("", &[("x", 1, x), ("y", 2, y), ("w", 2, w)]));
                            }
                        }
                    }
                }
                None
            });

            // invertible x: B_{x,y} = Q_{x^{-1}-y} Q_x
            rep.sweep(&format!("bergman_factorization[{side}]"), || {
                for x in (0..n1).filter(|&x| o.inv1(x)) {
                    let xinv = o.jinv(x);
                    for y in 0..n2 {
                        let t = m2.sub(xinv, y);
                        for z in 0..n1 {
                            if o.bergman(x, y, z) != o.q(x, o.qop(t, z)) {
                                return Some(o.witness2(
                                    "",
                                    &[("x", 1, x), ("y", 2, y), ("z", 1, z)],
                                ));
                            }
                        }
                    }
                }
                None
            });

            // x^{y+z} = (x^y)^z with the domain biconditional
            rep.sweep(&format!("qi_shift[{side}]"), || {
                for x in 0..n1 {
                    for y in 0..n2 {
                        let Some(xy) = o.qi(x, y) else { continue };
                        for z in 0..n2 {
                            let whole = o.qi(x, m2.add(y, z));
                            let stepped = o.qi(xy, z);
                            if whole.is_some() != stepped.is_some() || whole != stepped {
                                return Some(o.witness2("", &[("x", 1, x), ("y", 2, y), ("z", 2, z)]));
                            }
                        }
                    }
                }
                None
            });

            // (x,y) QI <=> (y,x) QI; then x^y = x + y^x Q_x
            rep.sweep(&format!("qi_symmetry[{side}]"), || {
                for x in 0..n1 {
                    for y in 0..n2 {
                        let fwd = o.qi(x, y);
                        let bwd = o.qiop(y, x);
                        if fwd.is_some() != bwd.is_some() {
                            return Some(o.witness2("asymmetric", &[("x", 1, x), ("y", 2, y)]));
                        }
                        if let (Some(xy), Some(yx)) = (fwd, bwd) {
                            if xy != m1.add(x, o.q(x, yx)) {
                                return Some(o.witness2("", &[("x", 1, x), ("y", 2, y)]));
                            }
                        }
                    }
                }
                None
            });

            // (x,zQ_y) QI <=> (xQ_y,z) QI; then (xQ_y)^z = x^{zQ_y} Q_y
            rep.sweep(&format!("qi_transfer[{side}]"), || {
                for x in 0..n1 {
                    for y in 0..n2 {
                        let xqy = o.qop(y, x);
                        for z in 0..n1 {
                            let a = o.qi(x, o.qop(y, z));
                            let b = o.qiop(xqy, z);
                            if a.is_some() != b.is_some() {
                                return Some(o.witness2(
                                    "domain mismatch",
                                    &[("x", 1, x), ("y", 2, y), ("z", 1, z)],
                                ));
                            }
                            if let (Some(a), Some(b)) = (a, b) {
                                if b != o.qop(y, a) {
                                    return Some(o.witness2(
                                        "",
                                        &[("x", 1, x), ("y", 2, y), ("z", 1, z)],
                                    ));
                                }
                            }
                        }
                    }
                }
                None
            });

            rep.sweep(&format!("radical_absorption[{side}]"), || {
                for x in (0..n1).filter(|&x| o.rad1(x)) {
                    for y in 0..n2 {
                        match o.qi(x, y) {
                            Some(xy) if o.rad1(xy) => {}
                            _ => {
                                return Some(o.witness2("", &[("x", 1, x), ("y", 2, y)]));
                            }
                        }
                    }
                }
                None
            });

            // x, y invertible with x - y radical => x^{-1} - y^{-1} radical
            rep.sweep(&format!("inverse_radical[{side}]"), || {
                for x in (0..n1).filter(|&x| o.inv1(x)) {
                    for y in (0..n1).filter(|&y| o.inv1(y)) {
                        if o.rad1(m1.sub(x, y)) && !o.rad2(m2.sub(o.jinv(x), o.jinv(y))) {
                            return Some(o.witness2("", &[("x", 1, x), ("y", 1, y)]));
                        }
                    }
                }
                None
            });
        }
        rep
    }
}

/// Orientation view over a validated pair, with cached invertibility,
/// quasi-inverse and radical lookups.
#[derive(Clone, Copy)]
pub(crate) struct Orient<'a> {
    jp: &'a JordanPair,
    pub plus_first: bool,
}

impl<'a> Orient<'a> {
    pub fn m1(&self) -> &'a FinModule {
        if self.plus_first {
            self.jp.plus()
        } else {
            self.jp.minus()
        }
    }

    pub fn m2(&self) -> &'a FinModule {
        if self.plus_first {
            self.jp.minus()
        } else {
            self.jp.plus()
        }
    }

    /// y Q_x, x on side 1.
    pub fn q(&self, x: usize, y: usize) -> usize {
        if self.plus_first {
            self.jp.data.q_plus[x * self.jp.minus().size() + y]
        } else {
            self.jp.data.q_minus[x * self.jp.plus().size() + y]
        }
    }

    /// x Q_y, y on side 2.
    pub fn qop(&self, y: usize, x: usize) -> usize {
        if self.plus_first {
            self.jp.data.q_minus[y * self.jp.plus().size() + x]
        } else {
            self.jp.data.q_plus[y * self.jp.minus().size() + x]
        }
    }

    /// y Q_{x,z}, x and z on side 1.
    pub fn qbi(&self, x: usize, z: usize, y: usize) -> usize {
        let m1 = self.m1();
        m1.sub(m1.sub(self.q(m1.add(x, z), y), self.q(x, y)), self.q(z, y))
    }

    /// x Q_{y,w}, y and w on side 2.
    pub fn qbiop(&self, y: usize, w: usize, x: usize) -> usize {
        let m2 = self.m2();
        m2.sub(
            m2.sub(self.qop(m2.add(y, w), x), self.qop(y, x)),
            self.qop(w, x),
        )
    }

    /// z B_{x,y} = z - z D_{x,y} + (z Q_y) Q_x, all of x, z on side 1.
    pub fn bergman(&self, x: usize, y: usize, z: usize) -> usize {
        let m1 = self.m1();
        m1.add(m1.sub(z, self.qbi(x, z, y)), self.q(x, self.qop(y, z)))
    }

    pub fn inv1(&self, v: usize) -> bool {
        if self.plus_first {
            self.jp.inv_plus[v]
        } else {
            self.jp.inv_minus[v]
        }
    }

    pub fn inv2(&self, v: usize) -> bool {
        if self.plus_first {
            self.jp.inv_minus[v]
        } else {
            self.jp.inv_plus[v]
        }
    }

    /// v^{-1} for invertible v on side 1: the unique w with w Q_v = v.
    pub fn jinv(&self, v: usize) -> usize {
        debug_assert!(self.inv1(v));
        (0..self.m2().size())
            .find(|&w| self.q(v, w) == v)
            .expect("invertible element has an inverse")
    }

    /// x^y for x on side 1, if (x, y) is quasi-invertible.
    pub fn qi(&self, x: usize, y: usize) -> Option<usize> {
        let t = self.jp.qi_table(self.plus_first);
        match t[x * self.m2().size() + y] {
            NOT_QI => None,
            z => Some(z),
        }
    }

    /// y^x for y on side 2.
    pub fn qiop(&self, y: usize, x: usize) -> Option<usize> {
        let t = self.jp.qi_table(!self.plus_first);
        match t[y * self.m1().size() + x] {
            NOT_QI => None,
            z => Some(z),
        }
    }

    pub fn rad1(&self, x: usize) -> bool {
        let (rp, rm) = self.jp.rad_tables();
        if self.plus_first {
            rp[x]
        } else {
            rm[x]
        }
    }

    pub fn rad2(&self, y: usize) -> bool {
        let (rp, rm) = self.jp.rad_tables();
        if self.plus_first {
            rm[y]
        } else {
            rp[y]
        }
    }

    fn witness2(&self, msg: &str, parts: &[(&str, u8, usize)]) -> String {
        let side = if self.plus_first { "+" } else { "-" };
        let body: Vec<String> = parts
            .iter()
            .map(|&(name, m, v)| {
                let label = if m == 1 { self.m1().label(v) } else { self.m2().label(v) };
                format!("{name}={label}")
            })
            .collect();
        if msg.is_empty() {
            format!("side={side} {}", body.join(" "))
        } else {
            format!("side={side} {msg}: {}", body.join(" "))
        }
    }
}

/// The pair (A, A) of a finite local ring with y Q_x = x*y*x.
pub fn pair_from_ring(ring: &Ring) -> JordanPair {
    let module = FinModule::from_ring(ring);
    let q = |x: usize, y: usize| {
        let (ex, ey) = (ring.elt(x as u64), ring.elt(y as u64));
        ring.mul(ring.mul(ex, ey), ex).rep() as usize
    };
    PairCandidate::new(module.clone(), module, q, q)
        .validate()
        .expect("the ring pair satisfies the operator prechecks")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(s: &str) -> Ring {
        Ring::new(s.parse().unwrap()).unwrap()
    }

    fn pair(s: &str) -> JordanPair {
        pair_from_ring(&ring(s))
    }

    #[test]
    fn q_apply_basics() {
        let v = pair("zmod:5:2");
        // yQ_x = x^2 y
        let r = v.q_apply(JElem::plus(2), JElem::minus(3)).unwrap();
        assert_eq!(r, JElem::plus(12));
        assert_eq!(
            v.q_apply(JElem::plus(0), JElem::minus(7)).unwrap(),
            JElem::plus(0)
        );
        let z4 = pair("zmod:4:1");
        assert_eq!(
            z4.q_apply(JElem::plus(2), JElem::minus(1)).unwrap(),
            JElem::plus(0)
        );
        let f5t = pair("poly:5:2");
        // x = t (rep 5): t^2 = 0
        assert_eq!(
            f5t.q_apply(JElem::plus(5), JElem::minus(1)).unwrap(),
            JElem::plus(0)
        );
        let z7 = pair("zmod:7:1");
        assert_eq!(
            z7.q_apply(JElem::plus(3), JElem::minus(2)).unwrap(),
            JElem::plus(4)
        );
        assert!(matches!(
            v.q_apply(JElem::plus(1), JElem::plus(1)),
            Err(JordanError::SideMismatch { .. })
        ));
    }

    #[test]
    fn bilinear_and_bergman() {
        let v = pair("zmod:5:2");
        // yQ_{x,z} = 2xzy
        assert_eq!(
            v.q_bilinear(JElem::plus(1), JElem::plus(2), JElem::minus(1))
                .unwrap(),
            JElem::plus(4)
        );
        // Q_{x,x} = 2 Q_x
        for x in 0..25 {
            for y in 0..25 {
                let twice = v
                    .q_apply(JElem::plus(x), JElem::minus(y))
                    .map(|r| v.plus().scalar(r.idx, 2))
                    .unwrap();
                assert_eq!(
                    v.q_bilinear(JElem::plus(x), JElem::plus(x), JElem::minus(y))
                        .unwrap()
                        .idx,
                    twice
                );
            }
        }
        assert_eq!(
            v.q_bilinear(JElem::plus(3), JElem::plus(0), JElem::minus(4))
                .unwrap(),
            JElem::plus(0)
        );

        // In (A,A), B_{x,y} is multiplication by (1-xy)^2: oracle cross-check.
        let r = ring("zmod:5:2");
        for x in 0..25u64 {
            for y in 0..25u64 {
                let factor = r.sub(r.one(), r.mul(r.elt(x), r.elt(y)));
                let sq = r.mul(factor, factor);
                for z in 0..25u64 {
                    let want = r.mul(r.elt(z), sq).rep() as usize;
                    let got = v
                        .bergman_apply(
                            JElem::plus(x as usize),
                            JElem::minus(y as usize),
                            JElem::plus(z as usize),
                        )
                        .unwrap();
                    assert_eq!(got.idx, want);
                }
            }
        }
        assert_eq!(
            v.bergman_apply(JElem::plus(2), JElem::minus(3), JElem::plus(1))
                .unwrap(),
            JElem::plus(0)
        );
        assert_eq!(
            v.bergman_apply(JElem::plus(0), JElem::minus(3), JElem::plus(1))
                .unwrap(),
            JElem::plus(1)
        );
        assert_eq!(
            v.bergman_apply(JElem::plus(2), JElem::minus(0), JElem::plus(1))
                .unwrap(),
            JElem::plus(1)
        );
    }

    #[test]
    fn invertibility_and_inverse() {
        let v = pair("zmod:5:2");
        assert!(v.is_invertible(JElem::plus(2)));
        assert!(!v.is_invertible(JElem::plus(5)));
        assert!(!v.is_invertible(JElem::plus(0)));
        assert_eq!(
            v.jp_inverse(JElem::plus(2)).unwrap(),
            JElem::minus(13) // solve 4w = 2 mod 25
        );
        assert_eq!(v.jp_inverse(JElem::plus(1)).unwrap(), JElem::minus(1));
        let z7 = pair("zmod:7:1");
        assert_eq!(z7.jp_inverse(JElem::plus(3)).unwrap(), JElem::minus(5));
        assert!(v.jp_inverse(JElem::plus(5)).is_err());
    }

    #[test]
    fn quasi_inverses() {
        let v = pair("zmod:5:2");
        assert!(v
            .is_quasi_invertible(JElem::plus(5), JElem::minus(3))
            .unwrap());
        assert!(!v
            .is_quasi_invertible(JElem::plus(2), JElem::minus(3))
            .unwrap());
        for x in 0..25 {
            assert!(v
                .is_quasi_invertible(JElem::plus(x), JElem::minus(0))
                .unwrap());
            assert_eq!(
                v.quasi_inverse(JElem::plus(x), JElem::minus(0)).unwrap(),
                JElem::plus(x)
            );
        }
        for y in 0..25 {
            assert_eq!(
                v.quasi_inverse(JElem::plus(0), JElem::minus(y)).unwrap(),
                JElem::plus(0)
            );
        }
        // brute-force oracle: z with z(1-xy)^2 = x(1-xy) over Z/25
        let r = ring("zmod:5:2");
        let (x, y) = (r.elt(5), r.elt(3));
        let f = r.sub(r.one(), r.mul(x, y));
        let target = r.mul(x, f);
        let sq = r.mul(f, f);
        let sols: Vec<u64> = (0..25u64)
            .filter(|&z| r.mul(r.elt(z), sq) == target)
            .collect();
        assert_eq!(sols, vec![5]);
        assert_eq!(
            v.quasi_inverse(JElem::plus(5), JElem::minus(3)).unwrap(),
            JElem::plus(5)
        );
        assert!(v
            .quasi_inverse(JElem::plus(2), JElem::minus(3))
            .is_err());
    }

    #[test]
    fn radical_sweeps() {
        let (rp, rm) = pair("zmod:5:2").radical();
        assert_eq!(rp, vec![0, 5, 10, 15, 20]);
        assert_eq!(rm, vec![0, 5, 10, 15, 20]);
        let (rp, rm) = pair("zmod:5:1").radical();
        assert_eq!((rp, rm), (vec![0], vec![0]));
        let (rp, rm) = pair("zmod:4:1").radical();
        assert_eq!((rp, rm), (vec![0, 2], vec![0, 2]));
    }

    #[test]
    fn locality_and_axioms_on_catalog() {
        for spec in ["zmod:5:1", "zmod:4:1", "zmod:5:2", "poly:5:2"] {
            let v = pair(spec);
            let local = v.verify_local();
            assert!(local.all_pass(), "{spec}: {:?}", local.failed().next());
            let axioms = v.verify_axioms();
            assert!(axioms.all_pass(), "{spec}: {:?}", axioms.failed().next());
            let ids = v.verify_identities();
            assert!(ids.all_pass(), "{spec}: {:?}", ids.failed().next());
        }
    }

    #[test]
    fn torsion_note_reported() {
        let rep = pair("zmod:4:1").verify_axioms();
        let note = rep.notes.iter().find(|n| n.name == "no_2_torsion[+]").unwrap();
        assert!(note.value.starts_with("fails"));
        let rep = pair("zmod:5:2").verify_axioms();
        let note = rep.notes.iter().find(|n| n.name == "no_2_torsion[+]").unwrap();
        assert_eq!(note.value, "holds");
    }

    #[test]
    fn mutated_pairs_fail_prechecks() {
        let r = ring("zmod:5:2");
        let module = FinModule::from_ring(&r);
        // linear operator yQ_x := xy is not quadratic
        let linear = |x: usize, y: usize| r.mul(r.elt(x as u64), r.elt(y as u64)).rep() as usize;
        let cand = PairCandidate::new(module.clone(), module.clone(), linear, linear);
        let rep = cand.precheck_report();
        let fail = rep.failed().next().expect("linear Q must fail");
        assert!(fail.name.starts_with("q_quadratic_scaling"));
        assert!(fail.witness.is_some());
        assert!(cand.validate().is_err());

        // shifted operator yQ_x := x^2 y + x is not additive (Q_x 0 != 0)
        let shifted = |x: usize, y: usize| {
            let (ex, ey) = (r.elt(x as u64), r.elt(y as u64));
            r.add(r.mul(r.mul(ex, ey), ex), ex).rep() as usize
        };
        let cand = PairCandidate::new(module.clone(), module, shifted, shifted);
        let rep = cand.precheck_report();
        let fail = rep.failed().next().expect("shifted Q must fail");
        assert!(fail.name.starts_with("q_additive"));
        assert!(fail.witness.is_some());
    }
}
