//! Acceptance suite: one test per criterion, each printing a PASS line once
//! its assertions hold. Criteria phrased against the CLI run the binary;
//! the rest drive the library directly.
//!
//! Run with `cargo test -p local-moufang-cli --test acceptance -- --nocapture`
//! to see the per-criterion lines.

use local_moufang::extraction::{verify_roundtrip_pair, verify_star_and_iso, Extraction};
use local_moufang::jordan::{pair_from_ring, FinModule, PairCandidate, Side};
use local_moufang::projective::ProjSpace;
use local_moufang::report::VerifyReport;
use local_moufang::ring::Ring;
use local_moufang::CATALOG;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

const EXTRACTION_CATALOG: [&str; 4] = ["zmod:5:1", "zmod:7:1", "zmod:5:2", "poly:5:2"];

fn ring(spec: &str) -> Ring {
    Ring::new(spec.parse().unwrap()).unwrap()
}

fn space(spec: &str) -> ProjSpace {
    ProjSpace::new(Arc::new(pair_from_ring(&ring(spec))), 1).unwrap()
}

fn run_cli(args: &[&str]) -> (Option<i32>, serde_json::Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_moufang"))
        .args(args)
        .output()
        .expect("binary runs");
    let value = serde_json::from_slice(&out.stdout).unwrap_or(serde_json::Value::Null);
    (out.status.code(), value)
}

fn assert_no_skips(rep: &VerifyReport, what: &str) {
    for c in &rep.checks {
        assert!(
            c.note.is_none(),
            "{what}: check {} was skipped instead of run",
            c.name
        );
    }
}

#[test]
fn criterion_01_jordan_axiom_suite() {
    for spec in CATALOG {
        let start = Instant::now();
        let (code, report) = run_cli(&["jp-verify", spec]);
        assert_eq!(code, Some(0), "{spec}: jp-verify must exit 0");
        assert_eq!(report["summary"]["failed"], 0, "{spec}: zero counterexamples");
        let named = |n: &str| {
            report["checks"]
                .as_array()
                .unwrap()
                .iter()
                .any(|c| c["name"] == n && c["pass"] == true)
        };
        for check in [
            "axioms.jp1[+]",
            "axioms.jp2[+]",
            "axioms.jp3[+]",
            "axioms.jp1_linearized[+]",
            "axioms.jp2_linearized[+]",
            "local.rad_equals_noninvertible[+]",
            "local.rad_ideal[+]",
        ] {
            assert!(named(check), "{spec}: missing passing check {check}");
        }
        let elapsed = start.elapsed();
        assert!(
            elapsed < Duration::from_secs(30),
            "{spec}: jp-verify took {elapsed:?}"
        );
    }

    // negative controls: a linear operator and a shifted operator must be
    // rejected by the prechecks, each with a witness
    let r = ring("zmod:5:2");
    let module = FinModule::from_ring(&r);
    let linear = |x: usize, y: usize| r.mul(r.elt(x as u64), r.elt(y as u64)).rep() as usize;
    let rep = PairCandidate::new(module.clone(), module.clone(), linear, linear).precheck_report();
    let fail = rep.failed().next().expect("linear control must fail");
    assert!(fail.witness.is_some());
    let shifted = |x: usize, y: usize| {
        let (ex, ey) = (r.elt(x as u64), r.elt(y as u64));
        r.add(r.mul(r.mul(ex, ey), ex), ex).rep() as usize
    };
    let rep = PairCandidate::new(module.clone(), module, shifted, shifted).precheck_report();
    let fail = rep.failed().next().expect("shifted control must fail");
    assert!(fail.witness.is_some());

    println!("criterion 01 (jordan axiom suite + negative controls): PASS");
}

#[test]
fn criterion_02_projective_counts() {
    let s = space("zmod:5:2");
    assert_eq!((s.len(), s.n_classes()), (30, 6));
    let s = space("zmod:4:1");
    assert_eq!((s.len(), s.n_classes()), (6, 3));
    for spec in CATALOG {
        let s = space(spec);
        let (_, rad_minus) = s.pair().radical();
        assert_eq!(
            s.len(),
            s.pair().plus().size() + rad_minus.len(),
            "{spec}: |P(V)| = |V+| + |Rad V-|"
        );
    }
    println!("criterion 02 (projective point counts): PASS");
}

#[test]
fn criterion_03_mu_action_equivalence() {
    for spec in CATALOG {
        let rep = space(spec).verify();
        for name in ["mu_closed_form_equals_composite", "mu_involution"] {
            let check = rep.get(name).unwrap();
            assert!(check.pass, "{spec}: {name} fails: {:?}", check.witness);
        }
    }
    println!("criterion 03 (closed-form mu equals composite, involutive): PASS");
}

#[test]
fn criterion_04_moufang_acceptance() {
    for spec in CATALOG {
        let m = space(spec).to_moufang().unwrap();
        let rep = m.verify(None);
        assert!(rep.all_pass(), "{spec}: {:?}", rep.failed().next());
        for name in [
            "criterion_gamma_conjugate",
            "criterion_mu_zero_to_inf",
            "criterion_mu_inf_to_zero",
            "lm1_class_determines_induced_group",
            "lm2_sharp_transitivity",
            "lm2_prime_class_transitivity",
            "lm3_conjugation",
        ] {
            assert!(rep.get(name).unwrap().pass, "{spec}: {name}");
        }
    }
    println!("criterion 04 (moufang axioms and construction criteria): PASS");
}

#[test]
fn criterion_05_conjugation_dictionary() {
    for spec in CATALOG {
        let rep = space(spec).verify();
        let check = rep.get("alpha_mu_zeta_dictionary").unwrap();
        assert!(check.pass, "{spec}: dictionary fails: {:?}", check.witness);
    }
    println!("criterion 05 (alpha/mu/zeta conjugation dictionary): PASS");
}

#[test]
fn criterion_06_identity_suites_z25() {
    let start = Instant::now();
    let s = space("zmod:5:2");
    let m = Arc::new(s.to_moufang().unwrap());

    let suite = m.identity_suite();
    assert!(suite.all_pass(), "{:?}", suite.failed().next());
    assert_no_skips(&suite, "root-group identity suite");

    let ext = Extraction::new(m, Some(s.affine_id(1))).unwrap();
    let pre = ext.preconditions();
    assert!(pre.all_pass(), "{:?}", pre.failed().next());
    assert_no_skips(&pre, "extraction preconditions");

    let extracted = ext.extract().unwrap();
    assert!(
        extracted.report.all_pass(),
        "{:?}",
        extracted.report.failed().next()
    );
    assert_no_skips(&extracted.report, "extracted pair suite");

    let ids = ext.identity_suite(true);
    assert!(ids.all_pass(), "{:?}", ids.failed().next());
    assert_no_skips(&ids, "extraction identity suite");

    let elapsed = start.elapsed();
    assert!(
        elapsed < Duration::from_secs(300),
        "identity suites took {elapsed:?}"
    );
    println!(
        "criterion 06 (identity suites on the 30-point set, {:.1?}): PASS",
        elapsed
    );
}

#[test]
fn criterion_07_extraction_roundtrip() {
    for spec in EXTRACTION_CATALOG {
        let pair = Arc::new(pair_from_ring(&ring(spec)));
        let rt = verify_roundtrip_pair(pair, 1, false).unwrap();
        assert!(rt.report.all_pass(), "{spec}: {:?}", rt.report.failed().next());
        assert!(rt.extracted.is_some(), "{spec}: extraction must run");
        for name in [
            "preconditions.special",
            "preconditions.abelian_root_group",
            "preconditions.unit_scalar_closure[+]",
            "preconditions.mu_bilinear_additive[+]",
            "extracted.radical_is_pair_of_classes",
            "h_plus_additive",
            "h_minus_additive",
            "h_intertwines_q_plus",
            "h_intertwines_q_minus",
            "h_mu_chain_plus_units",
            "h_mu_chain_plus_nonunits",
            "h_mu_chain_minus_units",
            "h_mu_chain_minus_nonunits",
        ] {
            assert!(
                rt.report.get(name).unwrap().pass,
                "{spec}: {name} must pass"
            );
        }
    }

    // Z/4 is rejected at the scalar-closure precondition, with a witness
    let pair = Arc::new(pair_from_ring(&ring("zmod:4:1")));
    let rt = verify_roundtrip_pair(pair, 1, false).unwrap();
    let closure = rt
        .report
        .get("preconditions.unit_scalar_closure[+]")
        .unwrap();
    assert!(!closure.pass);
    assert!(closure.witness.is_some());
    assert!(rt.extracted.is_none());

    println!("criterion 07 (extraction round trip, pair isomorphism): PASS");
}

#[test]
fn criterion_08_star_condition_and_moufang_isomorphism() {
    for spec in EXTRACTION_CATALOG {
        let pair = Arc::new(pair_from_ring(&ring(spec)));
        let rt = verify_roundtrip_pair(pair, 1, false).unwrap();
        let extracted = rt.extracted.as_ref().expect("extraction runs");
        let star = verify_star_and_iso(&rt.extraction, extracted).unwrap();
        assert!(star.all_pass(), "{spec}: {:?}", star.failed().next());
        for name in [
            "star_condition",
            "phi_bijective",
            "phi_preserves_equivalence",
            "phi_intertwines_translations",
            "phi_intertwines_tau",
        ] {
            assert!(star.get(name).unwrap().pass, "{spec}: {name}");
        }
    }
    println!("criterion 08 (pointwise condition and moufang isomorphism): PASS");
}

#[test]
fn criterion_09_little_projective_group_order() {
    let (code, report) = run_cli(&["ms-group", "zmod:5:1"]);
    assert_eq!(code, Some(0));
    assert_eq!(report["extras"]["order"], 60);
    let transitive = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "pair_transitivity")
        .unwrap();
    assert_eq!(transitive["pass"], true);
    println!("criterion 09 (little projective group of order 60): PASS");
}

#[test]
fn criterion_10_unique_division() {
    let s = space("zmod:5:2");
    let m = s.to_moufang().unwrap();
    for x in (0..m.len()).filter(|&x| !m.near_inf(x)) {
        for n in [2usize, 3] {
            // divide() performs the exhaustive search with an internal
            // uniqueness assertion and checks the constructive formula
            let y = m.divide(x, n, Side::Plus).unwrap();
            assert_eq!(m.scalar(y, n, Side::Plus).unwrap(), x);
            if m.is_unit(x) {
                let nx = m.neg(x);
                let formula = m.mu(nx).unwrap().apply(m.scalar(nx, n, Side::Plus).unwrap());
                assert_eq!(formula, y, "constructive formula at x={}", m.label(x));
            }
        }
    }
    println!("criterion 10 (unique division with constructive formula): PASS");
}
