//! Exact arithmetic in finite commutative local rings.
//!
//! Two families are supported, both with canonical unique representations:
//!
//! * `Zmod`: the residue ring Z/p^k, elements stored as residues in `[0, p^k)`;
//! * `Poly`: the truncated polynomial ring F_p[t]/(t^k), elements stored as
//!   the integer `c0 + c1*p + ... + c_{k-1}*p^{k-1}` packing the coefficient
//!   sequence.
//!
//! Enumeration order is the numeric order of the canonical representation,
//! which puts zero first and (for `Poly`) is lexicographic from the constant
//! coefficient up. All operations are pure; a [`Ring`] is immutable and can
//! be shared freely across threads.

use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Default bound on the number of ring elements (5^5).
pub const DEFAULT_SIZE_CAP: u64 = 3125;

/// Hard bound on cap overrides, so that products of representations never
/// overflow `u64`.
const MAX_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RingKind {
    Zmod,
    Poly,
}

impl fmt::Display for RingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingKind::Zmod => write!(f, "zmod"),
            RingKind::Poly => write!(f, "poly"),
        }
    }
}

/// A validated description of a finite local ring: Z/p^k or F_p[t]/(t^k).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RingSpec {
    pub kind: RingKind,
    pub p: u64,
    pub k: u32,
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.kind, self.p, self.k)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("{0} is not prime")]
    NonPrime(u64),
    #[error("exponent must be at least 1")]
    ZeroExponent,
    #[error("ring size {size} exceeds cap {cap}")]
    SizeOverCap { size: u64, cap: u64 },
    #[error("element {0} is not a unit")]
    NonUnit(String),
    #[error("bad ring spec `{0}`: expected zmod:p:k or poly:p:k")]
    BadSpec(String),
    #[error("bad element `{elem}` for ring {ring}")]
    BadElement { elem: String, ring: String },
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Smallest prime factor, or `None` for n < 2.
fn least_prime_factor(n: u64) -> Option<u64> {
    if n < 2 {
        return None;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return Some(d);
        }
        d += 1;
    }
    Some(n)
}

impl RingSpec {
    pub fn new(kind: RingKind, p: u64, k: u32) -> Result<Self, RingError> {
        if k == 0 {
            return Err(RingError::ZeroExponent);
        }
        if !is_prime(p) {
            return Err(RingError::NonPrime(p));
        }
        Ok(RingSpec { kind, p, k })
    }

    pub fn size(&self) -> u64 {
        self.p.pow(self.k)
    }
}

impl FromStr for RingSpec {
    type Err = RingError;

    /// Parse the CLI grammar `zmod:p:k` / `poly:p:k`.
    ///
    /// For `zmod`, the modulus p^k is normalized to a canonical prime-power
    /// form, so `zmod:4:1` denotes Z/4 = Z/2^2. A modulus that is not a
    /// prime power is rejected. `poly` requires p itself to be prime.
    fn from_str(s: &str) -> Result<Self, RingError> {
        let bad = || RingError::BadSpec(s.to_string());
        let mut parts = s.split(':');
        let kind = match parts.next() {
            Some("zmod") => RingKind::Zmod,
            Some("poly") => RingKind::Poly,
            _ => return Err(bad()),
        };
        let p: u64 = parts.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
        let k: u32 = parts.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        if k == 0 {
            return Err(RingError::ZeroExponent);
        }
        match kind {
            RingKind::Poly => RingSpec::new(RingKind::Poly, p, k),
            RingKind::Zmod => {
                let modulus = p
                    .checked_pow(k)
                    .filter(|&m| m <= MAX_CAP)
                    .ok_or(RingError::SizeOverCap {
                        size: u64::MAX,
                        cap: MAX_CAP,
                    })?;
                let q = least_prime_factor(modulus).ok_or(RingError::NonPrime(p))?;
                let mut j = 0;
                let mut m = modulus;
                while m % q == 0 {
                    m /= q;
                    j += 1;
                }
                if m != 1 {
                    // not a prime power, e.g. zmod:6:1
                    return Err(RingError::NonPrime(p));
                }
                RingSpec::new(RingKind::Zmod, q, j)
            }
        }
    }
}

/// An element in canonical form. Equality is representation equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingElt {
    rep: u64,
}

impl RingElt {
    /// The canonical integer representation: the residue for `Zmod`,
    /// the base-p packed coefficient sequence for `Poly`.
    pub fn rep(&self) -> u64 {
        self.rep
    }
}

/// A finite local ring handle. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ring {
    spec: RingSpec,
    size: u64,
}

impl Ring {
    pub fn new(spec: RingSpec) -> Result<Self, RingError> {
        Self::with_cap(spec, DEFAULT_SIZE_CAP)
    }

    /// Construct with an explicit size cap override.
    pub fn with_cap(spec: RingSpec, cap: u64) -> Result<Self, RingError> {
        if spec.k == 0 {
            return Err(RingError::ZeroExponent);
        }
        if !is_prime(spec.p) {
            return Err(RingError::NonPrime(spec.p));
        }
        let cap = cap.min(MAX_CAP);
        let size = spec
            .p
            .checked_pow(spec.k)
            .filter(|&s| s <= cap)
            .ok_or(RingError::SizeOverCap {
                size: spec.p.saturating_pow(spec.k),
                cap,
            })?;
        Ok(Ring { spec, size })
    }

    pub fn spec(&self) -> RingSpec {
        self.spec
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn zero(&self) -> RingElt {
        RingElt { rep: 0 }
    }

    pub fn one(&self) -> RingElt {
        RingElt { rep: 1 }
    }

    pub fn elt(&self, rep: u64) -> RingElt {
        assert!(rep < self.size, "element representation out of range");
        RingElt { rep }
    }

    /// All elements in the fixed deterministic order, zero first.
    pub fn elements(&self) -> impl Iterator<Item = RingElt> {
        (0..self.size).map(|rep| RingElt { rep })
    }

    fn coeffs(&self, a: RingElt) -> Vec<u64> {
        let p = self.spec.p;
        let mut rep = a.rep;
        (0..self.spec.k)
            .map(|_| {
                let c = rep % p;
                rep /= p;
                c
            })
            .collect()
    }

    fn pack(&self, coeffs: &[u64]) -> RingElt {
        let p = self.spec.p;
        let mut rep = 0;
        for &c in coeffs.iter().rev() {
            rep = rep * p + c % p;
        }
        RingElt { rep }
    }

    pub fn add(&self, a: RingElt, b: RingElt) -> RingElt {
        match self.spec.kind {
            RingKind::Zmod => RingElt {
                rep: (a.rep + b.rep) % self.size,
            },
            RingKind::Poly => {
                let (ca, cb) = (self.coeffs(a), self.coeffs(b));
                let sum: Vec<u64> = ca.iter().zip(&cb).map(|(x, y)| x + y).collect();
                self.pack(&sum)
            }
        }
    }

    pub fn neg(&self, a: RingElt) -> RingElt {
        match self.spec.kind {
            RingKind::Zmod => RingElt {
                rep: (self.size - a.rep) % self.size,
            },
            RingKind::Poly => {
                let p = self.spec.p;
                let ca: Vec<u64> = self.coeffs(a).iter().map(|&c| (p - c) % p).collect();
                self.pack(&ca)
            }
        }
    }

    pub fn sub(&self, a: RingElt, b: RingElt) -> RingElt {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: RingElt, b: RingElt) -> RingElt {
        match self.spec.kind {
            RingKind::Zmod => RingElt {
                rep: (a.rep * b.rep) % self.size,
            },
            RingKind::Poly => {
                let k = self.spec.k as usize;
                let (ca, cb) = (self.coeffs(a), self.coeffs(b));
                let mut prod = vec![0u64; k];
                for (i, &x) in ca.iter().enumerate() {
                    for (j, &y) in cb.iter().enumerate() {
                        if i + j < k {
                            prod[i + j] += x * y;
                        }
                    }
                }
                self.pack(&prod)
            }
        }
    }

    /// True iff `a` is invertible: prime to p for `Zmod`, nonzero constant
    /// coefficient for `Poly`. Both amount to `rep mod p != 0` in the packed
    /// representation.
    pub fn is_unit(&self, a: RingElt) -> bool {
        !a.rep.is_multiple_of(self.spec.p)
    }

    /// Multiplicative inverse, by exhaustive search.
    pub fn invert(&self, a: RingElt) -> Result<RingElt, RingError> {
        if !self.is_unit(a) {
            return Err(RingError::NonUnit(self.label(a)));
        }
        let one = self.one();
        for b in self.elements() {
            if self.mul(a, b) == one {
                return Ok(b);
            }
        }
        unreachable!("unit without inverse in a finite local ring")
    }

    /// Canonical textual form of an element: its integer representation.
    pub fn label(&self, a: RingElt) -> String {
        a.rep.to_string()
    }

    /// Human-readable polynomial form, e.g. `1+2t+t^2`; decimal for `Zmod`.
    pub fn pretty(&self, a: RingElt) -> String {
        match self.spec.kind {
            RingKind::Zmod => a.rep.to_string(),
            RingKind::Poly => {
                let terms: Vec<String> = self
                    .coeffs(a)
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0)
                    .map(|(i, &c)| match (i, c) {
                        (0, c) => c.to_string(),
                        (1, 1) => "t".to_string(),
                        (1, c) => format!("{c}t"),
                        (i, 1) => format!("t^{i}"),
                        (i, c) => format!("{c}t^{i}"),
                    })
                    .collect();
                if terms.is_empty() {
                    "0".to_string()
                } else {
                    terms.join("+")
                }
            }
        }
    }

    /// Parse an element: either the canonical integer representation, or
    /// (for `Poly`) a comma-separated coefficient list `c0,c1,...`.
    pub fn parse_elt(&self, s: &str) -> Result<RingElt, RingError> {
        let bad = || RingError::BadElement {
            elem: s.to_string(),
            ring: self.spec.to_string(),
        };
        if s.contains(',') {
            if self.spec.kind != RingKind::Poly {
                return Err(bad());
            }
            let coeffs: Vec<u64> = s
                .split(',')
                .map(|t| t.trim().parse::<u64>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad())?;
            if coeffs.len() > self.spec.k as usize || coeffs.iter().any(|&c| c >= self.spec.p) {
                return Err(bad());
            }
            let mut full = vec![0u64; self.spec.k as usize];
            full[..coeffs.len()].copy_from_slice(&coeffs);
            Ok(self.pack(&full))
        } else {
            let rep: u64 = s.trim().parse().map_err(|_| bad())?;
            if rep >= self.size {
                return Err(bad());
            }
            Ok(RingElt { rep })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(s: &str) -> Ring {
        Ring::new(s.parse().unwrap()).unwrap()
    }

    #[test]
    fn construction_and_sizes() {
        assert_eq!(ring("zmod:5:2").size(), 25);
        assert_eq!(ring("poly:5:2").size(), 25);
        // p = 4 is rejected when constructing a RingSpec directly...
        assert_eq!(
            RingSpec::new(RingKind::Zmod, 4, 1),
            Err(RingError::NonPrime(4))
        );
        // ...but the CLI grammar normalizes prime-power moduli.
        let spec: RingSpec = "zmod:4:1".parse().unwrap();
        assert_eq!((spec.p, spec.k), (2, 2));
        assert_eq!(Ring::new(spec).unwrap().size(), 4);
        assert!(matches!(
            "zmod:6:1".parse::<RingSpec>(),
            Err(RingError::NonPrime(_))
        ));
        assert!(matches!(
            "poly:4:1".parse::<RingSpec>(),
            Err(RingError::NonPrime(4))
        ));
        assert!(matches!(
            "zmod:5:0".parse::<RingSpec>(),
            Err(RingError::ZeroExponent)
        ));
        assert!(matches!(
            Ring::new("zmod:5:6".parse().unwrap()),
            Err(RingError::SizeOverCap { .. })
        ));
        assert!(Ring::with_cap("zmod:5:6".parse().unwrap(), 20000).is_ok());
    }

    #[test]
    fn enumeration_order() {
        let r = ring("zmod:4:1");
        let reps: Vec<u64> = r.elements().map(|e| e.rep()).collect();
        assert_eq!(reps, vec![0, 1, 2, 3]);

        let f2t = ring("poly:2:2");
        let labels: Vec<String> = f2t.elements().map(|e| f2t.pretty(e)).collect();
        assert_eq!(labels, vec!["0", "1", "t", "1+t"]);

        assert_eq!(ring("zmod:5:1").elements().count(), 5);
    }

    #[test]
    fn units_and_inverses() {
        let z25 = ring("zmod:5:2");
        assert!(z25.is_unit(z25.elt(3)));
        assert!(!z25.is_unit(z25.elt(10)));
        let f5t = ring("poly:5:2");
        assert!(!f5t.is_unit(f5t.elt(5))); // t is nilpotent

        // Frozen values, derived by the exhaustive-search oracle below.
        let oracle = |r: &Ring, a: u64| {
            r.elements()
                .find(|&b| r.mul(r.elt(a), b) == r.one())
                .unwrap()
        };
        assert_eq!(oracle(&z25, 11).rep(), 16);
        assert_eq!(z25.invert(z25.elt(11)).unwrap().rep(), 16);
        assert_eq!(oracle(&z25, 2).rep(), 13);
        assert_eq!(z25.invert(z25.elt(2)).unwrap().rep(), 13);
        assert_eq!(z25.invert(z25.one()).unwrap(), z25.one());
        assert!(matches!(
            z25.invert(z25.elt(10)),
            Err(RingError::NonUnit(_))
        ));
    }

    #[test]
    fn ring_axioms_exhaustive() {
        for spec in ["zmod:5:1", "zmod:4:1", "zmod:5:2", "poly:5:2", "poly:2:2"] {
            let r = ring(spec);
            let elems: Vec<RingElt> = r.elements().collect();
            for &a in &elems {
                assert_eq!(r.add(a, r.zero()), a);
                assert_eq!(r.add(a, r.neg(a)), r.zero());
                assert_eq!(r.mul(a, r.one()), a);
                for &b in &elems {
                    assert_eq!(r.add(a, b), r.add(b, a));
                    assert_eq!(r.mul(a, b), r.mul(b, a));
                    for &c in &elems {
                        assert_eq!(r.add(r.add(a, b), c), r.add(a, r.add(b, c)));
                        assert_eq!(r.mul(r.mul(a, b), c), r.mul(a, r.mul(b, c)));
                        assert_eq!(
                            r.mul(a, r.add(b, c)),
                            r.add(r.mul(a, b), r.mul(a, c))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn nonunits_form_ideal_of_index_p() {
        for spec in ["zmod:5:2", "poly:5:2", "zmod:4:1", "zmod:7:1"] {
            let r = ring(spec);
            let nonunits: Vec<RingElt> = r.elements().filter(|&a| !r.is_unit(a)).collect();
            assert_eq!(nonunits.len() as u64, r.size() / r.spec().p);
            for &a in &nonunits {
                for &b in &nonunits {
                    assert!(!r.is_unit(r.add(a, b)));
                }
                for b in r.elements() {
                    assert!(!r.is_unit(r.mul(a, b)));
                }
            }
            // invert is an involution on units
            for a in r.elements().filter(|&a| r.is_unit(a)) {
                assert_eq!(r.invert(r.invert(a).unwrap()).unwrap(), a);
            }
        }
    }

    #[test]
    fn element_parsing() {
        let f5t = ring("poly:5:2");
        assert_eq!(f5t.parse_elt("7").unwrap(), f5t.elt(7));
        assert_eq!(f5t.parse_elt("2,1").unwrap(), f5t.elt(7));
        assert!(f5t.parse_elt("25").is_err());
        assert!(f5t.parse_elt("1,5").is_err());
        let z25 = ring("zmod:5:2");
        assert!(z25.parse_elt("1,2").is_err());
    }
}
