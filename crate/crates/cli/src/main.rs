//! Batch driver for the verification suites: builds rings, Jordan pairs and
//! local Moufang sets from command-line specs or JSON files, runs the
//! requested checks, and prints one machine-readable JSON report to stdout.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails (the report
//! is still emitted), 2 on usage or input errors (reported on stderr).

use clap::{Args, Parser, Subcommand};
use local_moufang::extraction::{verify_roundtrip_pair, verify_star_and_iso, Extraction};
use local_moufang::jordan::{pair_from_ring, JordanPair, Side};
use local_moufang::moufang::{FinMoufang, MoufangData};
use local_moufang::projective::ProjSpace;
use local_moufang::report::{Check, ReportNote, VerifyReport};
use local_moufang::ring::{Ring, RingKind, RingSpec};
use serde::Serialize;
use serde_json::{json, Value};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "moufang",
    version,
    about = "Finite local Moufang sets and quadratic Jordan pairs: constructions and exhaustive verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Distinguished invertible element (ring element for ring specs, point
    /// index or label for Moufang files); defaults to the ring unit 1 or the
    /// first unit point
    #[arg(long)]
    e: Option<String>,

    /// Element cap for the group closure
    #[arg(long, default_value_t = 200_000)]
    cap: usize,

    /// Override the ring size cap
    #[arg(long = "ring-cap")]
    ring_cap: Option<u64>,

    /// Also run the deep operator-identity suite
    #[arg(long)]
    deep: bool,

    /// Accepted for compatibility; every derivation is deterministic and
    /// seed-free regardless
    #[arg(long)]
    seedless: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Structure and arithmetic checks for a finite local ring
    RingInfo {
        /// Ring spec: zmod:p:k or poly:p:k
        input: String,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Full Jordan pair suite for the ring pair (A, A): operator prechecks,
    /// axioms and linearizations, quasi-inverse identities, locality
    JpVerify {
        input: String,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// The radical of the ring pair, element by element
    JpRadical {
        input: String,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Build the projective Moufang set of a ring pair, verify the
    /// projective layer, and emit the portable Moufang JSON data
    MsBuild {
        input: String,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Verify the local Moufang set axioms, the construction criteria and
    /// the root-group identity suite (ring spec or Moufang JSON file)
    MsVerify {
        /// Ring spec or path to a Moufang JSON file
        input: String,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Closure of the little projective group and pair transitivity
    MsGroup {
        input: String,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Extract a Jordan pair from a local Moufang set and verify it
    MsExtract {
        input: String,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Full round trip: pair -> Moufang set -> pair, the explicit pair
    /// isomorphism, the pointwise condition and the Moufang isomorphism
    Roundtrip {
        input: String,
        #[command(flatten)]
        opts: CommonOpts,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::RingInfo { .. } => "ring-info",
            Command::JpVerify { .. } => "jp-verify",
            Command::JpRadical { .. } => "jp-radical",
            Command::MsBuild { .. } => "ms-build",
            Command::MsVerify { .. } => "ms-verify",
            Command::MsGroup { .. } => "ms-group",
            Command::MsExtract { .. } => "ms-extract",
            Command::Roundtrip { .. } => "roundtrip",
        }
    }

    fn parts(&self) -> (&str, &CommonOpts) {
        match self {
            Command::RingInfo { input, opts }
            | Command::JpVerify { input, opts }
            | Command::JpRadical { input, opts }
            | Command::MsBuild { input, opts }
            | Command::MsVerify { input, opts }
            | Command::MsGroup { input, opts }
            | Command::MsExtract { input, opts }
            | Command::Roundtrip { input, opts } => (input, opts),
        }
    }
}

#[derive(Serialize)]
struct Report {
    schema: u32,
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    input: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    e: Option<String>,
    deep: bool,
    seedless: bool,
    checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    notes: Vec<ReportNote>,
    summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    extras: Option<Value>,
    timing_ms: u128,
}

#[derive(Serialize)]
struct Summary {
    total: usize,
    passed: usize,
    failed: usize,
}

struct Outcome {
    report: VerifyReport,
    e_label: Option<String>,
    extras: Option<Value>,
}

fn is_ring_spec(input: &str) -> bool {
    input.starts_with("zmod:") || input.starts_with("poly:")
}

fn make_ring(input: &str, opts: &CommonOpts) -> Result<Ring, String> {
    let spec: RingSpec = input.parse().map_err(|e| format!("{e}"))?;
    match opts.ring_cap {
        Some(cap) => Ring::with_cap(spec, cap),
        None => Ring::new(spec),
    }
    .map_err(|e| format!("{e}"))
}

/// The distinguished invertible ring element: the flag value, or 1.
fn ring_e(ring: &Ring, opts: &CommonOpts) -> Result<usize, String> {
    match &opts.e {
        None => Ok(1),
        Some(s) => ring
            .parse_elt(s)
            .map(|e| e.rep() as usize)
            .map_err(|e| format!("{e}")),
    }
}

/// The distinguished unit point of a file-loaded Moufang set: a point index
/// or an exact point label.
fn point_e(m: &FinMoufang, opts: &CommonOpts) -> Result<Option<usize>, String> {
    match &opts.e {
        None => Ok(None),
        Some(s) => {
            if let Ok(idx) = s.parse::<usize>() {
                if idx < m.len() {
                    return Ok(Some(idx));
                }
            }
            (0..m.len())
                .find(|&p| m.label(p) == s)
                .map(Some)
                .ok_or_else(|| format!("no point with index or label `{s}`"))
        }
    }
}

struct MoufangInput {
    m: Arc<FinMoufang>,
    /// Present when the set was built from a ring spec.
    ring_side: Option<(Ring, Arc<JordanPair>, ProjSpace)>,
    e_point: Option<usize>,
}

fn load_moufang(input: &str, opts: &CommonOpts) -> Result<MoufangInput, String> {
    if is_ring_spec(input) {
        let ring = make_ring(input, opts)?;
        let e = ring_e(&ring, opts)?;
        let pair = Arc::new(pair_from_ring(&ring));
        let space = ProjSpace::new(pair.clone(), e).map_err(|e| format!("{e}"))?;
        let m = Arc::new(space.to_moufang().map_err(|e| format!("{e}"))?);
        let e_point = Some(space.affine_id(e));
        Ok(MoufangInput {
            m,
            ring_side: Some((ring, pair, space)),
            e_point,
        })
    } else {
        let m = Arc::new(parse_moufang_file(input)?);
        let e_point = point_e(&m, opts)?;
        Ok(MoufangInput {
            m,
            ring_side: None,
            e_point,
        })
    }
}

/// Read a Moufang JSON file: either the bare data object or a full ms-build
/// report carrying it under `extras.moufang`.
fn parse_moufang_file(path: &str) -> Result<FinMoufang, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
    let data = match MoufangData::from_json(&text) {
        Ok(d) => d,
        Err(first) => {
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| format!("{path} is not valid JSON: {e}"))?;
            let nested = value
                .pointer("/extras/moufang")
                .ok_or_else(|| format!("{path}: {first}"))?;
            serde_json::from_value(nested.clone())
                .map_err(|e| format!("{path}: bad moufang object: {e}"))?
        }
    };
    FinMoufang::from_data(data).map_err(|e| format!("{path}: {e}"))
}

fn run_ring_info(input: &str, opts: &CommonOpts) -> Result<Outcome, String> {
    let ring = make_ring(input, opts)?;
    let n = ring.size() as usize;
    let mut rep = VerifyReport::new();

    if n <= 512 {
        rep.sweep("ring_axioms", || {
            let elems: Vec<_> = ring.elements().collect();
            for &a in &elems {
                for &b in &elems {
                    if ring.add(a, b) != ring.add(b, a) || ring.mul(a, b) != ring.mul(b, a) {
                        return Some(format!("a={} b={}", ring.label(a), ring.label(b)));
                    }
                    for &c in &elems {
                        let assoc = ring.add(ring.add(a, b), c) == ring.add(a, ring.add(b, c))
                            && ring.mul(ring.mul(a, b), c) == ring.mul(a, ring.mul(b, c));
                        let dist =
                            ring.mul(a, ring.add(b, c)) == ring.add(ring.mul(a, b), ring.mul(a, c));
                        if !assoc || !dist {
                            return Some(format!(
                                "a={} b={} c={}",
                                ring.label(a),
                                ring.label(b),
                                ring.label(c)
                            ));
                        }
                    }
                }
            }
            None
        });
    } else {
        rep.skip("ring_axioms", "cubic sweep skipped above 512 elements");
    }

    rep.sweep("nonunits_form_ideal", || {
        let nonunits: Vec<_> = ring.elements().filter(|&a| !ring.is_unit(a)).collect();
        if nonunits.len() as u64 != ring.size() / ring.spec().p {
            return Some(format!(
                "{} non-units, expected index {}",
                nonunits.len(),
                ring.spec().p
            ));
        }
        for &a in &nonunits {
            for &b in &nonunits {
                if ring.is_unit(ring.add(a, b)) {
                    return Some(format!("{} + {} is a unit", ring.label(a), ring.label(b)));
                }
            }
            for b in ring.elements() {
                if ring.is_unit(ring.mul(a, b)) {
                    return Some(format!("{} * {} is a unit", ring.label(a), ring.label(b)));
                }
            }
        }
        None
    });

    rep.sweep("invert_involution", || {
        for a in ring.elements().filter(|&a| ring.is_unit(a)) {
            let inv = ring.invert(a).ok()?;
            if ring.invert(inv).ok()? != a {
                return Some(format!("a={}", ring.label(a)));
            }
        }
        None
    });

    let radical: Vec<String> = ring
        .elements()
        .filter(|&a| !ring.is_unit(a))
        .map(|a| ring.label(a))
        .collect();
    let mut extras = json!({
        "kind": match ring.spec().kind { RingKind::Zmod => "zmod", RingKind::Poly => "poly" },
        "p": ring.spec().p,
        "k": ring.spec().k,
        "size": ring.size(),
        "units": ring.size() - ring.size() / ring.spec().p,
        "radical_size": radical.len(),
    });
    if radical.len() <= 64 {
        extras["radical"] = json!(radical);
    }
    Ok(Outcome {
        report: rep,
        e_label: None,
        extras: Some(extras),
    })
}

fn run_jp_verify(input: &str, opts: &CommonOpts) -> Result<Outcome, String> {
    let ring = make_ring(input, opts)?;
    let pair = pair_from_ring(&ring);
    let mut rep = VerifyReport::new();
    rep.merge("axioms", pair.verify_axioms());
    rep.merge("identities", pair.verify_identities());
    rep.merge("local", pair.verify_local());
    let (rp, rm) = pair.radical();
    let extras = json!({
        "radical_plus_size": rp.len(),
        "radical_minus_size": rm.len(),
    });
    Ok(Outcome {
        report: rep,
        e_label: None,
        extras: Some(extras),
    })
}

fn run_jp_radical(input: &str, opts: &CommonOpts) -> Result<Outcome, String> {
    let ring = make_ring(input, opts)?;
    let pair = pair_from_ring(&ring);
    let (rp, rm) = pair.radical();
    let to_labels = |v: Vec<usize>, side: Side| -> Vec<String> {
        v.into_iter()
            .map(|i| pair.module(side).label(i).to_string())
            .collect()
    };
    let extras = json!({
        "radical_plus": to_labels(rp, Side::Plus),
        "radical_minus": to_labels(rm, Side::Minus),
    });
    Ok(Outcome {
        report: VerifyReport::new(),
        e_label: None,
        extras: Some(extras),
    })
}

fn run_ms_build(input: &str, opts: &CommonOpts) -> Result<Outcome, String> {
    if !is_ring_spec(input) {
        return Err("ms-build needs a ring spec (zmod:p:k or poly:p:k)".into());
    }
    let loaded = load_moufang(input, opts)?;
    let (ring, _, space) = loaded.ring_side.as_ref().unwrap();
    let rep = space.verify();
    let extras = json!({
        "points": space.len(),
        "classes": space.n_classes(),
        "moufang": serde_json::to_value(loaded.m.export()).unwrap(),
    });
    Ok(Outcome {
        report: rep,
        e_label: Some(ring.label(ring.elt(space.e() as u64))),
        extras: Some(extras),
    })
}

fn run_ms_verify(input: &str, opts: &CommonOpts) -> Result<Outcome, String> {
    let loaded = load_moufang(input, opts)?;
    let m = &loaded.m;
    let mut rep = VerifyReport::new();
    rep.merge("axioms", m.verify(None));
    rep.merge("identities", m.identity_suite());
    let extras = json!({
        "points": m.len(),
        "classes": m.n_classes(),
        "units": m.units().len(),
        "special": m.check_special(),
        "abelian": m.check_abelian(),
    });
    Ok(Outcome {
        report: rep,
        e_label: loaded.e_point.map(|p| m.label(p).to_string()),
        extras: Some(extras),
    })
}

fn run_ms_group(input: &str, opts: &CommonOpts) -> Result<Outcome, String> {
    let loaded = load_moufang(input, opts)?;
    let mut rep = VerifyReport::new();
    let mut extras = json!({ "cap": opts.cap });
    match loaded.m.little_projective_group(opts.cap) {
        Ok(summary) => {
            rep.pass("closure_within_cap");
            rep.push(
                "pair_transitivity",
                (!summary.pair_transitive)
                    .then(|| "some non-equivalent pair is unreachable".to_string()),
            );
            extras["order"] = json!(summary.order);
        }
        Err(e) => {
            rep.fail("closure_within_cap", format!("{e}"));
        }
    }
    Ok(Outcome {
        report: rep,
        e_label: None,
        extras: Some(extras),
    })
}

fn run_ms_extract(input: &str, opts: &CommonOpts) -> Result<Outcome, String> {
    let loaded = load_moufang(input, opts)?;
    let ext = Extraction::new(loaded.m.clone(), loaded.e_point).map_err(|e| format!("{e}"))?;
    let mut rep = VerifyReport::new();
    let pre = ext.preconditions();
    let extractable = pre.all_pass();
    rep.merge("preconditions", pre);

    let mut extras = json!({
        "e": loaded.m.label(ext.e()),
        "vplus_size": ext.vplus().len(),
        "vminus_size": ext.vminus().len(),
        "jordan_extractable": extractable,
    });

    if extractable {
        let extracted = ext.extract().map_err(|e| format!("{e}"))?;
        rep.merge("extracted", extracted.report.clone());
        rep.merge("identities", ext.identity_suite(opts.deep));

        let pair = &extracted.pair;
        let (rp, rm) = pair.radical();
        extras["radical_plus_size"] = json!(rp.len());
        extras["radical_minus_size"] = json!(rm.len());
        let (np, nm) = (pair.plus().size(), pair.minus().size());
        let table = |f: &dyn Fn(usize, usize) -> usize, rows: usize, cols: usize| -> Vec<Vec<usize>> {
            (0..rows).map(|i| (0..cols).map(|j| f(i, j)).collect()).collect()
        };
        extras["pair_tables"] = json!({
            "plus_labels": (0..np).map(|i| pair.plus().label(i)).collect::<Vec<_>>(),
            "minus_labels": (0..nm).map(|i| pair.minus().label(i)).collect::<Vec<_>>(),
            "plus_add": table(&|i, j| pair.plus().add(i, j), np, np),
            "minus_add": table(&|i, j| pair.minus().add(i, j), nm, nm),
            "q_plus": table(&|i, j| pair.candidate().q_plus[i * nm + j], np, nm),
            "q_minus": table(&|i, j| pair.candidate().q_minus[i * np + j], nm, np),
        });
    } else {
        rep.merge("identities", ext.identity_suite(opts.deep));
        rep.note("extraction", "not Jordan-extractable: preconditions fail".to_string());
    }

    Ok(Outcome {
        report: rep,
        e_label: Some(loaded.m.label(ext.e()).to_string()),
        extras: Some(extras),
    })
}

fn run_roundtrip(input: &str, opts: &CommonOpts) -> Result<Outcome, String> {
    if !is_ring_spec(input) {
        return Err("roundtrip needs a ring spec (zmod:p:k or poly:p:k)".into());
    }
    let ring = make_ring(input, opts)?;
    let e = ring_e(&ring, opts)?;
    let pair = Arc::new(pair_from_ring(&ring));
    let rt = verify_roundtrip_pair(pair, e, opts.deep).map_err(|e| format!("{e}"))?;
    let mut rep = rt.report.clone();
    let mut extras = json!({
        "points": rt.space.len(),
        "classes": rt.space.n_classes(),
        "extracted": rt.extracted.is_some(),
    });
    if let Some(extracted) = &rt.extracted {
        let star = verify_star_and_iso(&rt.extraction, extracted).map_err(|e| format!("{e}"))?;
        rep.merge("star", star);
        let (rp, rm) = extracted.pair.radical();
        extras["radical_plus_size"] = json!(rp.len());
        extras["radical_minus_size"] = json!(rm.len());
    }
    Ok(Outcome {
        report: rep,
        e_label: Some(ring.label(ring.elt(e as u64))),
        extras: Some(extras),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints help/version to stdout with code 0, errors to
            // stderr with code 2
            e.exit();
        }
    };

    let start = Instant::now();
    let (input, opts) = cli.command.parts();
    let result = match &cli.command {
        Command::RingInfo { .. } => run_ring_info(input, opts),
        Command::JpVerify { .. } => run_jp_verify(input, opts),
        Command::JpRadical { .. } => run_jp_radical(input, opts),
        Command::MsBuild { .. } => run_ms_build(input, opts),
        Command::MsVerify { .. } => run_ms_verify(input, opts),
        Command::MsGroup { .. } => run_ms_group(input, opts),
        Command::MsExtract { .. } => run_ms_extract(input, opts),
        Command::Roundtrip { .. } => run_roundtrip(input, opts),
    };

    let outcome = match result {
        Ok(o) => o,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };

    let passed = outcome.report.checks.iter().filter(|c| c.pass).count();
    let total = outcome.report.checks.len();
    let all_pass = outcome.report.all_pass();
    let report = Report {
        schema: 1,
        tool: "moufang",
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name(),
        input: input.to_string(),
        e: outcome.e_label,
        deep: opts.deep,
        seedless: opts.seedless,
        checks: outcome.report.checks,
        notes: outcome.report.notes,
        summary: Summary {
            total,
            passed,
            failed: total - passed,
        },
        extras: outcome.extras,
        timing_ms: start.elapsed().as_millis(),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    ExitCode::from(if all_pass { 0 } else { 1 })
}
