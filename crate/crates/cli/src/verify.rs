//! `hdx verify`.

use std::path::Path;

use hdx_core::constructions::{certify_complex_links, certify_transitivity};
use hdx_core::schreier::LiftOptions;
use hdx_core::{CtsInstance, HdxError, Result, SpectralOptions};
use serde::Serialize;
use serde_json::{json, Value};

use crate::files::{emit, instance_from_meta, load_complex, load_meta, size_cap, to_json_text};
use crate::Outcome;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub lemma: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    pub values: Value,
}

#[derive(Serialize)]
pub struct ReportDocument {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub complex_sha256: String,
    /// Whether the sidecar recorded the same fingerprint.
    pub meta_matches: Option<bool>,
    pub seed: u64,
    pub checks: Vec<CheckEntry>,
    pub all_pass: bool,
}

const CHECKS: [(&str, &str); 7] = [
    ("cts", "def:cts-conditions"),
    ("two-centers", "lemma:every-edge-two-centers"),
    ("lift", "lemma:lift"),
    ("transitivity", "lemma:symmetry"),
    ("links", "thm:links-isomorphic"),
    ("inv", "def:property-inv"),
    ("bound", "thm:cts-walk-bound"),
];

/// A float with the tolerance it was computed to.
pub fn measured(value: f64, tolerance: f64) -> Value {
    json!({ "value": value, "tolerance": tolerance })
}

fn entry(name: &str, lemma: &'static str, status: Status) -> CheckEntry {
    CheckEntry {
        name: name.to_string(),
        lemma,
        status,
        reason: None,
        witness: None,
        values: Value::Object(Default::default()),
    }
}

fn skipped(name: &str, lemma: &'static str, reason: impl Into<String>) -> CheckEntry {
    CheckEntry {
        reason: Some(reason.into()),
        ..entry(name, lemma, Status::Skipped)
    }
}

fn verdict(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

struct Context<'a> {
    complex: &'a hdx_core::TwoComplex,
    instance: Option<&'a CtsInstance>,
    seed: u64,
    cap: usize,
}

fn needs_valid<'a>(
    ctx: &Context<'a>,
    name: &str,
    lemma: &'static str,
) -> std::result::Result<&'a CtsInstance, CheckEntry> {
    let Some(inst) = ctx.instance else {
        return Err(skipped(name, lemma, "no group metadata: not a Schreier complex built by hdx"));
    };
    if !inst.record().all_pass() {
        return Err(skipped(
            name,
            lemma,
            format!("CTS conditions {:?} fail", inst.record().failed()),
        ));
    }
    Ok(inst)
}

fn run_check(ctx: &Context, name: &str, lemma: &'static str) -> Result<CheckEntry> {
    let e = match name {
        "cts" => match ctx.instance {
            None => skipped(name, lemma, "no group metadata: not a Schreier complex built by hdx"),
            Some(inst) => {
                let r = inst.record();
                CheckEntry {
                    witness: (!r.all_pass()).then(|| format!("{:?}", r.witness)),
                    values: serde_json::to_value(r)?,
                    ..entry(name, lemma, verdict(r.all_pass()))
                }
            }
        },
        "two-centers" => match needs_valid(ctx, name, lemma) {
            Err(s) => s,
            Ok(inst) => {
                let o = inst.check_two_centers()?;
                CheckEntry {
                    witness: o.witness,
                    ..entry(name, lemma, verdict(o.passed))
                }
            }
        },
        "lift" => match needs_valid(ctx, name, lemma) {
            Err(s) => s,
            Ok(inst) => {
                let r = inst.verify_lift(&LiftOptions {
                    seed: ctx.seed,
                    ..LiftOptions::default()
                })?;
                CheckEntry {
                    witness: r.witness.clone(),
                    values: serde_json::to_value(&r)?,
                    ..entry(name, lemma, verdict(r.passed))
                }
            }
        },
        "transitivity" => match needs_valid(ctx, name, lemma) {
            Err(s) => s,
            Ok(inst) => match certify_transitivity(inst) {
                Ok((_, cert)) => CheckEntry {
                    witness: cert.obstruction.clone(),
                    values: serde_json::to_value(&cert)?,
                    ..entry(name, lemma, verdict(cert.transitive))
                },
                Err(HdxError::Structural { message, witness }) => CheckEntry {
                    reason: Some(message),
                    witness: Some(witness),
                    ..entry(name, lemma, Status::Fail)
                },
                Err(e) => return Err(e),
            },
        },
        "links" => {
            let c = certify_complex_links(ctx.complex, 200, ctx.seed)?;
            let ok = c.link_isomorphic && c.link_regular;
            CheckEntry {
                witness: c
                    .mismatch
                    .as_ref()
                    .map(|(a, b)| format!("links of {a} and {b} are not isomorphic")),
                values: serde_json::to_value(&c)?,
                ..entry(name, lemma, verdict(ok))
            }
        }
        "inv" => {
            if ctx.complex.coloring().is_none() {
                skipped(name, lemma, "complex has no coloring")
            } else {
                match ctx.complex.check_property_inv() {
                    Ok(r) => CheckEntry {
                        witness: r.witness.map(|(e, img)| {
                            format!(
                                "edge {{{}, {}}} present, {{{}, {}}} missing",
                                ctx.complex.label(e[0]),
                                ctx.complex.label(e[1]),
                                ctx.complex.label(img[0]),
                                ctx.complex.label(img[1])
                            )
                        }),
                        ..entry(name, lemma, verdict(r.holds))
                    },
                    Err(HdxError::Infeasible(m)) => skipped(name, lemma, m),
                    Err(e) => return Err(e),
                }
            }
        }
        "bound" => match needs_valid(ctx, name, lemma) {
            Err(s) => s,
            Ok(inst) => {
                let opts = SpectralOptions {
                    max_vertices: ctx.cap,
                    dense_cap: ctx.cap.min(crate::files::DEFAULT_SIZE_CAP),
                    ..SpectralOptions::default()
                };
                match inst.bound_check(&opts) {
                    Ok(b) => CheckEntry {
                        values: json!({
                            "lambda_walk": measured(b.walk.lambda_abs, b.tolerance),
                            "lambda_zigzag": measured(b.zigzag.lambda_abs, b.tolerance),
                            "bound": measured(b.bound, b.tolerance),
                            "corollary_bound": measured(b.corollary_bound, b.tolerance),
                            "margin": measured(b.margin, b.tolerance),
                            "dual_components": b.dual_components,
                            "walk_components": b.walk_components,
                        }),
                        ..entry(name, lemma, verdict(b.holds))
                    },
                    Err(HdxError::Size { what, actual, cap }) => skipped(
                        name,
                        lemma,
                        format!("{what} has {actual} vertices, above the cap of {cap}; raise HDX_SIZE_CAP"),
                    ),
                    Err(e) => return Err(e),
                }
            }
        },
        other => {
            return Err(HdxError::Parameter(format!(
                "unknown check '{other}'; expected one of {:?}",
                CHECKS.map(|(n, _)| n)
            )))
        }
    };
    Ok(e)
}

pub fn run(
    complex_path: &Path,
    checks: &str,
    meta_path: Option<&Path>,
    seed: u64,
    out: Option<&Path>,
) -> Result<Outcome> {
    let names: Vec<&str> = checks
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    for n in &names {
        if !CHECKS.iter().any(|(c, _)| c == n) {
            return Err(HdxError::Parameter(format!(
                "unknown check '{n}'; expected one of {:?}",
                CHECKS.map(|(n, _)| n)
            )));
        }
    }
    let loaded = load_complex(complex_path)?;
    let meta = load_meta(complex_path, meta_path)?;
    let instance = match &meta {
        Some(m) => instance_from_meta(m, &loaded.complex)?,
        None => None,
    };
    let ctx = Context {
        complex: &loaded.complex,
        instance: instance.as_ref(),
        seed,
        cap: size_cap(None)?,
    };
    let mut entries = Vec::with_capacity(names.len());
    for n in names {
        let lemma = CHECKS
            .iter()
            .find(|(c, _)| *c == n)
            .map(|(_, l)| *l)
            .expect("validated above");
        entries.push(run_check(&ctx, n, lemma)?);
    }
    let all_pass = entries.iter().all(|e| e.status != Status::Fail);
    let doc = ReportDocument {
        tool: "hdx",
        tool_version: hdx_core::VERSION,
        meta_matches: meta.as_ref().map(|m| m.complex_sha256 == loaded.sha256),
        complex_sha256: loaded.sha256,
        seed,
        checks: entries,
        all_pass,
    };
    emit(out, &to_json_text(&doc))?;
    Ok(if all_pass { Outcome::Pass } else { Outcome::Fail })
}
