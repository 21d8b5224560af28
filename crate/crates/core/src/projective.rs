//! The projective space of a local Jordan pair.
//!
//! Points are kept in canonical form: an affine point `[x, 0]` for each x in
//! V+, plus one offset point `[e, e^{-1} + y]` for each y in the radical of
//! V-, where e is a distinguished invertible element of V+. Whenever a point
//! admits an affine form, the affine form is the canonical one, so point
//! equality is plain index equality.
//!
//! On top of the point set the module realizes the three permutation
//! families that seed the Moufang construction: the translations `alpha_v`,
//! the opposite translations `zeta_w`, and the involutions `mu_v` of
//! invertible elements, each computed from its closed-form action and
//! cross-checked against the composite `zeta alpha zeta`.

use crate::jordan::JordanPair;
use crate::moufang::{FinMoufang, MoufangError, Perm};
use crate::report::VerifyReport;
use std::sync::Arc;
use thiserror::Error;

/// Canonical form of a projective point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjPoint {
    /// `[x, 0]` for x in V+.
    Affine(usize),
    /// `[e, e^{-1} + y]` for y in Rad V-.
    RadOffset(usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProjError {
    #[error("distinguished element {0} is not invertible")]
    ENotInvertible(String),
    #[error("the pair is not local: {0}")]
    NonLocal(String),
    #[error("element {0} is not invertible")]
    NotInvertible(String),
    #[error("closed-form action disagrees with the composite at {0}")]
    MuCompositeMismatch(String),
    #[error(transparent)]
    Moufang(#[from] MoufangError),
}

/// The enumerated point set of `P(V)` with its radical equivalence.
pub struct ProjSpace {
    pair: Arc<JordanPair>,
    e: usize,
    e_inv: usize,
    rad_plus: Vec<bool>,
    rad_minus: Vec<bool>,
    rad_minus_elems: Vec<usize>,
    radoff_id: Vec<Option<usize>>,
    jinv_plus: Vec<Option<usize>>,
    jinv_minus: Vec<Option<usize>>,
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
    labels: Vec<String>,
}

impl ProjSpace {
    pub fn new(pair: Arc<JordanPair>, e: usize) -> Result<ProjSpace, ProjError> {
        let o = pair.orient(true);
        if !o.inv1(e) {
            return Err(ProjError::ENotInvertible(o.m1().label(e).to_string()));
        }
        let (np, nm) = (pair.plus().size(), pair.minus().size());
        // canonical representatives need locality: non-invertible = radical
        for x in 0..np {
            if o.inv1(x) == o.rad1(x) {
                return Err(ProjError::NonLocal(format!(
                    "element {} of V+ breaks invertible/radical dichotomy",
                    o.m1().label(x),
                )));
            }
        }
        for y in 0..nm {
            if o.inv2(y) == o.rad2(y) {
                return Err(ProjError::NonLocal(format!(
                    "element {} of V- breaks invertible/radical dichotomy",
                    o.m2().label(y),
                )));
            }
        }

        let rad_plus: Vec<bool> = (0..np).map(|x| o.rad1(x)).collect();
        let rad_minus: Vec<bool> = (0..nm).map(|y| o.rad2(y)).collect();
        let rad_minus_elems: Vec<usize> = (0..nm).filter(|&y| rad_minus[y]).collect();
        let mut radoff_id = vec![None; nm];
        for (j, &y) in rad_minus_elems.iter().enumerate() {
            radoff_id[y] = Some(np + j);
        }

        let jinv_plus: Vec<Option<usize>> = (0..np)
            .map(|v| if o.inv1(v) { Some(o.jinv(v)) } else { None })
            .collect();
        let om = pair.orient(false);
        let jinv_minus: Vec<Option<usize>> = (0..nm)
            .map(|v| if om.inv1(v) { Some(om.jinv(v)) } else { None })
            .collect();

        let e_inv = jinv_plus[e].unwrap();

        // radical-equivalence classes: affine points by radical coset, all
        // offset points together
        let n_points = np + rad_minus_elems.len();
        let mut class_of = vec![usize::MAX; n_points];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for x in 0..np {
            if class_of[x] != usize::MAX {
                continue;
            }
            let cid = classes.len();
            let mut members = Vec::new();
            for x2 in x..np {
                if class_of[x2] == usize::MAX && rad_plus[pair.plus().sub(x2, x)] {
                    class_of[x2] = cid;
                    members.push(x2);
                }
            }
            classes.push(members);
        }
        let cid = classes.len();
        let offset_class: Vec<usize> = (np..n_points).collect();
        for &p in &offset_class {
            class_of[p] = cid;
        }
        classes.push(offset_class);

        let mut labels: Vec<String> = (0..np)
            .map(|x| format!("A:{}", pair.plus().label(x)))
            .collect();
        labels.extend(
            rad_minus_elems
                .iter()
                .map(|&y| format!("R:{}", pair.minus().label(y))),
        );

        Ok(ProjSpace {
            pair,
            e,
            e_inv,
            rad_plus,
            rad_minus,
            rad_minus_elems,
            radoff_id,
            jinv_plus,
            jinv_minus,
            class_of,
            classes,
            labels,
        })
    }

    pub fn pair(&self) -> &Arc<JordanPair> {
        &self.pair
    }

    pub fn e(&self) -> usize {
        self.e
    }

    pub fn e_inv(&self) -> usize {
        self.e_inv
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn label(&self, p: usize) -> &str {
        &self.labels[p]
    }

    pub fn point(&self, p: usize) -> ProjPoint {
        let np = self.pair.plus().size();
        if p < np {
            ProjPoint::Affine(p)
        } else {
            ProjPoint::RadOffset(self.rad_minus_elems[p - np])
        }
    }

    /// All points in enumeration order: the affine points in module order,
    /// then the offset points over the radical in module order.
    pub fn points(&self) -> impl Iterator<Item = ProjPoint> + '_ {
        (0..self.len()).map(|p| self.point(p))
    }

    /// Point id of the affine point `[x, 0]`.
    pub fn affine_id(&self, x: usize) -> usize {
        x
    }

    /// Point id of `[e, e^{-1}+y]` for y in Rad V-.
    pub fn radoff_id(&self, y: usize) -> Option<usize> {
        self.radoff_id[y]
    }

    /// The representative pair (x, y) of a canonical point.
    pub fn expand(&self, p: usize) -> (usize, usize) {
        match self.point(p) {
            ProjPoint::Affine(x) => (x, self.pair.minus().zero()),
            ProjPoint::RadOffset(y) => (self.e, self.pair.minus().add(self.e_inv, y)),
        }
    }

    /// Canonical point of the pair `[x, y]`: the affine point of the
    /// quasi-inverse when (x, y) is quasi-invertible, otherwise the offset
    /// point of `y - x^{-1}`.
    pub fn canonicalize(&self, x: usize, y: usize) -> Result<usize, ProjError> {
        let o = self.pair.orient(true);
        if let Some(xy) = o.qi(x, y) {
            return Ok(xy);
        }
        let xinv = self.jinv_plus[x].ok_or_else(|| {
            ProjError::NonLocal(format!(
                "({}, {}) not quasi-invertible yet {} not invertible",
                self.pair.plus().label(x),
                self.pair.minus().label(y),
                self.pair.plus().label(x),
            ))
        })?;
        let t = self.pair.minus().sub(y, xinv);
        self.radoff_id[t].ok_or_else(|| {
            ProjError::NonLocal(format!(
                "offset {} is not radical",
                self.pair.minus().label(t)
            ))
        })
    }

    /// The point `[e, e^{-1}+s]` for arbitrary s in V-: an offset point when
    /// s is radical, otherwise the affine point of `-s^{-1}`.
    pub fn point_of_minus(&self, s: usize) -> usize {
        match self.radoff_id[s] {
            Some(p) => p,
            None => {
                let sinv = self.jinv_minus[s].expect("non-radical element is invertible");
                self.pair.plus().neg(sinv)
            }
        }
    }

    /// Projective equivalence of raw pairs, straight from the definition:
    /// (x, y - y') quasi-invertible with x' = x^{y-y'}.
    pub fn proj_equivalent(&self, a: (usize, usize), b: (usize, usize)) -> bool {
        let o = self.pair.orient(true);
        let d = self.pair.minus().sub(a.1, b.1);
        o.qi(a.0, d) == Some(b.0)
    }

    /// Radical equivalence of canonical points.
    pub fn rad_equivalent(&self, p: usize, q: usize) -> bool {
        self.class_of[p] == self.class_of[q]
    }

    /// Radical equivalence evaluated case by case from its definition,
    /// without the precomputed classes.
    pub fn rad_equivalent_direct(&self, p: usize, q: usize) -> bool {
        match (self.point(p), self.point(q)) {
            (ProjPoint::Affine(x), ProjPoint::Affine(x2)) => {
                self.rad_plus[self.pair.plus().sub(x, x2)]
            }
            (ProjPoint::RadOffset(y), ProjPoint::RadOffset(y2)) => {
                self.rad_minus[self.pair.minus().sub(y, y2)]
            }
            _ => false,
        }
    }

    pub fn class_of(&self, p: usize) -> usize {
        self.class_of[p]
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    fn assert_class_preserving(&self, perm: &Perm, what: &str) {
        for class in &self.classes {
            let target = self.class_of[perm.apply(class[0])];
            assert!(
                class.iter().all(|&p| self.class_of[perm.apply(p)] == target),
                "{what} does not preserve radical equivalence"
            );
        }
    }

    /// The translation `alpha_v`: `[x,0] -> [x+v,0]` and
    /// `[e,e^{-1}+y] -> [e,e^{-1}+y^v]`.
    pub fn alpha(&self, v: usize) -> Perm {
        let plus = self.pair.plus();
        let om = self.pair.orient(false);
        let mut map = Vec::with_capacity(self.len());
        for p in 0..self.len() {
            map.push(match self.point(p) {
                ProjPoint::Affine(x) => plus.add(x, v),
                ProjPoint::RadOffset(y) => {
                    let yv = om
                        .qi(y, v)
                        .expect("radical elements are properly quasi-invertible");
                    self.radoff_id[yv].expect("quasi-inverse of a radical element is radical")
                }
            });
        }
        let perm = Perm::new(map).expect("alpha is a bijection");
        self.assert_class_preserving(&perm, "alpha");
        perm
    }

    /// The opposite translation `zeta_w`: `[x,0] -> [x^w,0]` on the radical
    /// affine points, translation by w in the offset chart elsewhere.
    pub fn zeta(&self, w: usize) -> Perm {
        let o = self.pair.orient(true);
        let minus = self.pair.minus();
        let mut map = Vec::with_capacity(self.len());
        for p in 0..self.len() {
            map.push(match self.point(p) {
                ProjPoint::Affine(x) if self.rad_plus[x] => o
                    .qi(x, w)
                    .expect("radical elements are properly quasi-invertible"),
                ProjPoint::Affine(x) => {
                    // [x,0] = [e, e^{-1} - x^{-1}]; translate, re-canonicalize
                    let xinv = self.jinv_plus[x].expect("non-radical element is invertible");
                    self.point_of_minus(minus.add(minus.neg(xinv), w))
                }
                ProjPoint::RadOffset(y) => self.point_of_minus(minus.add(y, w)),
            });
        }
        let perm = Perm::new(map).expect("zeta is a bijection");
        self.assert_class_preserving(&perm, "zeta");
        perm
    }

    /// The involution `mu_v = zeta_{v^{-1}} alpha_v zeta_{v^{-1}}` of an
    /// invertible v, computed from the closed-form action on every point and
    /// verified against the composite; also checks the consolidated forms
    /// and that the result squares to the identity.
    pub fn mu(&self, v: usize) -> Result<Perm, ProjError> {
        let o = self.pair.orient(true);
        let plus = self.pair.plus();
        let minus = self.pair.minus();
        let vinv = self.jinv_plus[v]
            .ok_or_else(|| ProjError::NotInvertible(plus.label(v).to_string()))?;

        // inverse of Q_v as a table: the z with z Q_v = x, for every x
        let mut qv_inv = vec![usize::MAX; plus.size()];
        for z in 0..minus.size() {
            qv_inv[o.q(v, z)] = z;
        }

        let mut map = Vec::with_capacity(self.len());
        for p in 0..self.len() {
            let img = match self.point(p) {
                // [e,e^{-1}+y] -> [yQ_v, 0]
                ProjPoint::RadOffset(y) => o.q(v, y),
                ProjPoint::Affine(x) => {
                    // consolidated form [x,0] -> [e, e^{-1} + xQ_v^{-1}]
                    let img = self.point_of_minus(qv_inv[x]);
                    if let Some(xinv) = self.jinv_plus[x] {
                        // invertible chart: [x,0] -> [-x^{-1}Q_v, 0]
                        let direct = plus.neg(o.q(v, xinv));
                        if img != direct {
                            return Err(ProjError::MuCompositeMismatch(format!(
                                "consolidated form at {}",
                                self.labels[p]
                            )));
                        }
                        // offset chart: [e,e^{-1}+y] -> [e,e^{-1}-y^{-1}Q_v^{-1}]
                        // with y = -x^{-1}
                        let y = minus.neg(xinv);
                        let yinv = self.jinv_minus[y].expect("y invertible");
                        let offset_form = self.point_of_minus(minus.neg(qv_inv[yinv]));
                        if img != offset_form {
                            return Err(ProjError::MuCompositeMismatch(format!(
                                "offset chart form at {}",
                                self.labels[p]
                            )));
                        }
                    }
                    img
                }
            };
            map.push(img);
        }
        let perm = Perm::new(map).expect("mu is a bijection");

        let z = self.zeta(vinv);
        let composite = z.then(&self.alpha(v)).then(&z);
        if composite != perm {
            return Err(ProjError::MuCompositeMismatch(format!(
                "mu_{}",
                plus.label(v)
            )));
        }
        if !perm.then(&perm).is_identity() {
            return Err(ProjError::MuCompositeMismatch(format!(
                "mu_{} is not an involution",
                plus.label(v)
            )));
        }
        Ok(perm)
    }

    /// Assemble the Moufang construction input: the point set with its
    /// radical equivalence, `U = {alpha_v}`, and `tau = mu_e`. Point indices
    /// of the result coincide with this space's point ids.
    pub fn to_moufang(&self) -> Result<FinMoufang, ProjError> {
        let u_inf: Vec<Perm> = (0..self.pair.plus().size()).map(|v| self.alpha(v)).collect();
        let tau = self.mu(self.e)?;
        Ok(FinMoufang::build(
            self.labels.clone(),
            self.classes.clone(),
            u_inf,
            tau,
        )?)
    }

    /// The projective verification sweep: counts, canonical-form properties,
    /// morphism laws for the translation families, equivalence preservation,
    /// closed-form/composite agreement for every mu, and the conjugation
    /// dictionary between the two translation families.
    pub fn verify(&self) -> VerifyReport {
        let mut rep = VerifyReport::new();
        let o = self.pair.orient(true);
        let plus = self.pair.plus();
        let minus = self.pair.minus();
        let (np, nm) = (plus.size(), minus.size());

        rep.sweep("point_count", || {
            let expected = np + self.rad_minus_elems.len();
            if self.len() != expected {
                return Some(format!(
                    "|P(V)| = {} but |V+| + |Rad V-| = {expected}",
                    self.len()
                ));
            }
            None
        });

        rep.sweep("canonicalize_idempotent", || {
            for p in 0..self.len() {
                let (x, y) = self.expand(p);
                match self.canonicalize(x, y) {
                    Ok(q) if q == p => {}
                    Ok(q) => {
                        return Some(format!(
                            "{} re-canonicalizes to {}",
                            self.labels[p], self.labels[q]
                        ))
                    }
                    Err(e) => return Some(format!("{}: {e}", self.labels[p])),
                }
            }
            None
        });

        rep.sweep("canonicalize_projectively_equivalent", || {
            for x in 0..np {
                for y in 0..nm {
                    let p = match self.canonicalize(x, y) {
                        Ok(p) => p,
                        Err(e) => {
                            return Some(format!("x={} y={}: {e}", plus.label(x), minus.label(y)))
                        }
                    };
                    let (x2, y2) = self.expand(p);
                    if !self.proj_equivalent((x, y), (x2, y2)) {
                        return Some(format!("x={} y={}", plus.label(x), minus.label(y)));
                    }
                }
            }
            None
        });

        rep.sweep("alpha_morphism", || {
            for v in 0..np {
                let av = self.alpha(v);
                for v2 in 0..np {
                    if av.then(&self.alpha(v2)) != self.alpha(plus.add(v, v2)) {
                        return Some(format!("v={} v'={}", plus.label(v), plus.label(v2)));
                    }
                }
            }
            None
        });

        rep.sweep("zeta_morphism", || {
            for w in 0..nm {
                let zw = self.zeta(w);
                for w2 in 0..nm {
                    if zw.then(&self.zeta(w2)) != self.zeta(minus.add(w, w2)) {
                        return Some(format!("w={} w'={}", minus.label(w), minus.label(w2)));
                    }
                }
            }
            None
        });

        rep.sweep("rad_equivalence_definition_agrees", || {
            for p in 0..self.len() {
                for q in 0..self.len() {
                    if self.rad_equivalent(p, q) != self.rad_equivalent_direct(p, q) {
                        return Some(format!("p={} q={}", self.labels[p], self.labels[q]));
                    }
                }
            }
            None
        });

        rep.sweep("translations_preserve_equivalence", || {
            let check = |perm: &Perm, name: String| -> Option<String> {
                for p in 0..self.len() {
                    for q in 0..self.len() {
                        if self.rad_equivalent(p, q)
                            != self.rad_equivalent(perm.apply(p), perm.apply(q))
                        {
                            return Some(format!(
                                "{name} at p={} q={}",
                                self.labels[p], self.labels[q]
                            ));
                        }
                    }
                }
                None
            };
            for v in 0..np {
                if let Some(w) = check(&self.alpha(v), format!("alpha_{}", plus.label(v))) {
                    return Some(w);
                }
            }
            for w in 0..nm {
                if let Some(wit) = check(&self.zeta(w), format!("zeta_{}", minus.label(w))) {
                    return Some(wit);
                }
            }
            for v in (0..np).filter(|&v| o.inv1(v)) {
                let mu = match self.mu(v) {
                    Ok(m) => m,
                    Err(e) => return Some(e.to_string()),
                };
                if let Some(wit) = check(&mu, format!("mu_{}", plus.label(v))) {
                    return Some(wit);
                }
            }
            None
        });

        rep.sweep("mu_closed_form_equals_composite", || {
            // mu() itself cross-checks the closed forms against the
            // composite zeta alpha zeta; report any failure as a witness
            for v in (0..np).filter(|&v| o.inv1(v)) {
                if let Err(e) = self.mu(v) {
                    return Some(e.to_string());
                }
            }
            None
        });

        rep.sweep("mu_involution", || {
            for v in (0..np).filter(|&v| o.inv1(v)) {
                match self.mu(v) {
                    Ok(mu) => {
                        if !mu.then(&mu).is_identity() {
                            return Some(format!("v={}", plus.label(v)));
                        }
                    }
                    Err(e) => return Some(e.to_string()),
                }
            }
            None
        });

        rep.sweep("mu_moves_affine_to_negative", || {
            for t in (0..np).filter(|&t| o.inv1(t)) {
                match self.mu(t) {
                    Ok(mu) => {
                        if mu.apply(t) != plus.neg(t) {
                            return Some(format!("t={}", plus.label(t)));
                        }
                    }
                    Err(e) => return Some(e.to_string()),
                }
            }
            None
        });

        rep.sweep("alpha_mu_zeta_dictionary", || {
            // alpha_v conjugated by mu_t equals zeta_{v Q_t^{-1}}
            for t in (0..np).filter(|&t| o.inv1(t)) {
                let mu = match self.mu(t) {
                    Ok(m) => m,
                    Err(e) => return Some(e.to_string()),
                };
                let mut qt_inv = vec![usize::MAX; np];
                for z in 0..nm {
                    qt_inv[o.q(t, z)] = z;
                }
                for (v, &w) in qt_inv.iter().enumerate() {
                    if self.alpha(v).conj(&mu) != self.zeta(w) {
                        return Some(format!("t={} v={}", plus.label(t), plus.label(v)));
                    }
                }
            }
            None
        });

        rep
    }
}
