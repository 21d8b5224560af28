//! Computational algebra for finite local Moufang sets and quadratic Jordan
//! pairs.
//!
//! The crate builds the projective line of a local Jordan pair over a finite
//! local ring, turns it into a local Moufang set given by explicit point
//! permutations, extracts a Jordan pair back out of a suitable local Moufang
//! set, and verifies every axiom and identity involved by exhaustive sweeps
//! at desk scale.
//!
//! Modules:
//!
//! * [`ring`] - exact arithmetic in Z/p^k and F_p[t]/(t^k);
//! * [`jordan`] - quadratic Jordan pairs over finite modules, quasi-inverse
//!   algebra, radical, locality and the axiom verifier;
//! * [`projective`] - the projective space of a pair, canonical point
//!   representatives and the permutations seeding the Moufang construction;
//! * [`moufang`] - finite local Moufang sets as permutation data, their
//!   construction, verification and identity suites;
//! * [`extraction`] - recovering a Jordan pair from a local Moufang set and
//!   the round-trip isomorphism checks;
//! * [`report`] - deterministic check reporting.

pub mod extraction;
pub mod jordan;
pub mod moufang;
pub mod projective;
pub mod report;
pub mod ring;

pub use jordan::{pair_from_ring, FinModule, JElem, JordanError, JordanPair, PairCandidate, Side};
pub use report::{Check, VerifyReport};
pub use ring::{Ring, RingElt, RingError, RingKind, RingSpec};

/// The ring specs exercised by the test and acceptance suites.
pub const CATALOG: [&str; 5] = ["zmod:5:1", "zmod:7:1", "zmod:4:1", "zmod:5:2", "poly:5:2"];

#[cfg(test)]
mod tests {
    // all handles are immutable after construction and shareable across
    // threads
    fn assert_send_sync<T: Send + Sync>() {}

    #[test]
    fn handles_are_send_sync() {
        assert_send_sync::<crate::ring::Ring>();
        assert_send_sync::<crate::jordan::JordanPair>();
        assert_send_sync::<crate::projective::ProjSpace>();
        assert_send_sync::<crate::moufang::FinMoufang>();
        assert_send_sync::<crate::extraction::Extraction>();
    }
}
