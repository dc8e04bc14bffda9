//! `hdx spectrum`.

use std::path::Path;

use hdx_core::spectra::{lambda, walk_graph};
use hdx_core::{HdxError, Result, SpectralOptions, SpectralReport, WeightedGraph};
use serde::Serialize;
use serde_json::{json, Value};

use crate::files::{
    emit, instance_from_meta, load_complex, load_meta, size_cap, to_json_text, write_atomic,
    DEFAULT_SIZE_CAP,
};
use crate::verify::measured;
use crate::{GraphSelector, Outcome};

pub struct Request<'a> {
    pub complex: &'a Path,
    pub graph: GraphSelector,
    pub tol: f64,
    pub bound: bool,
    pub meta: Option<&'a Path>,
    pub size_cap: Option<usize>,
    pub edges: Option<&'a Path>,
    pub out: Option<&'a Path>,
}

#[derive(Serialize)]
struct SpectrumDocument {
    tool: &'static str,
    tool_version: &'static str,
    complex_sha256: String,
    graph: GraphSelector,
    vertices: usize,
    edges: Option<usize>,
    degree: Option<u64>,
    method: hdx_core::spectra::Method,
    lambda_signed: Value,
    lambda_min: Value,
    lambda_abs: Value,
    spectral_gap: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound: Option<Value>,
}

fn check_cap(what: &str, n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(HdxError::Size {
            what: what.to_string(),
            actual: n,
            cap,
        });
    }
    Ok(())
}

pub fn run(req: Request) -> Result<Outcome> {
    if req.tol.is_nan() || req.tol <= 0.0 {
        return Err(HdxError::Parameter(format!("--tol must be positive, got {}", req.tol)));
    }
    let cap = size_cap(req.size_cap)?;
    let opts = SpectralOptions {
        tol: req.tol,
        max_vertices: cap,
        dense_cap: cap.min(DEFAULT_SIZE_CAP),
        ..SpectralOptions::default()
    };
    let loaded = load_complex(req.complex)?;
    let needs_group = req.graph != GraphSelector::Walk || req.bound;
    let instance = if needs_group {
        let meta = load_meta(req.complex, req.meta)?.ok_or_else(|| {
            HdxError::Parameter(format!(
                "{:?} graph and --bound need the metadata sidecar of a Schreier complex",
                req.graph
            ))
        })?;
        let inst = instance_from_meta(&meta, &loaded.complex)?.ok_or_else(|| {
            HdxError::Parameter("metadata has no group or small complex".into())
        })?;
        inst.require_valid()?;
        Some(inst)
    } else {
        None
    };

    let (graph, report): (Option<WeightedGraph>, SpectralReport) = match req.graph {
        GraphSelector::Walk => {
            check_cap("walk graph", loaded.complex.edges().len(), cap)?;
            let g = walk_graph(&loaded.complex)?;
            let r = lambda(&g, &opts)?;
            (Some(g), r)
        }
        GraphSelector::Dual | GraphSelector::L | GraphSelector::Rep => {
            let inst = instance.as_ref().expect("loaded above");
            let g = match req.graph {
                GraphSelector::Dual => inst.dual_graph()?,
                GraphSelector::L => inst.type_graph()?,
                _ => {
                    let rep = inst.replacement()?;
                    check_cap("replacement product", rep.num_vertices(), cap)?;
                    rep.graph()?
                }
            };
            check_cap("graph", g.num_vertices(), cap)?;
            let r = lambda(&g, &opts)?;
            (Some(g), r)
        }
        GraphSelector::Zigzag => {
            let rep = instance.as_ref().expect("loaded above").replacement()?;
            check_cap("zig-zag product", rep.num_vertices(), cap)?;
            let r = rep.zigzag_lambda(&opts)?;
            let g = if req.edges.is_some() {
                Some(rep.zigzag()?)
            } else {
                None
            };
            (g, r)
        }
    };

    if let Some(path) = req.edges {
        let g = graph.as_ref().expect("edge export materializes the graph");
        write_atomic(path, g.to_tsv().as_bytes())?;
    }

    let tol = report.tolerance;
    let bound = match &instance {
        Some(inst) if req.bound => {
            let b = inst.bound_check(&opts)?;
            Some((
                b.holds,
                json!({
                    "lambda_walk": measured(b.walk.lambda_abs, b.tolerance),
                    "lambda_zigzag": measured(b.zigzag.lambda_abs, b.tolerance),
                    "lambda_dual": measured(b.dual.lambda_abs, b.tolerance),
                    "lambda_L": measured(b.cloud.lambda_abs, b.tolerance),
                    "bound": measured(b.bound, b.tolerance),
                    "corollary_bound": measured(b.corollary_bound, b.tolerance),
                    "margin": measured(b.margin, b.tolerance),
                    "holds": b.holds,
                    "dual_components": b.dual_components,
                    "walk_components": b.walk_components,
                }),
            ))
        }
        _ => None,
    };
    let doc = SpectrumDocument {
        tool: "hdx",
        tool_version: hdx_core::VERSION,
        complex_sha256: loaded.sha256,
        graph: req.graph,
        vertices: report.vertices,
        edges: graph.as_ref().map(WeightedGraph::num_edges),
        degree: report.degree,
        method: report.method,
        lambda_signed: measured(report.lambda_signed, tol),
        lambda_min: measured(report.lambda_min, tol),
        lambda_abs: measured(report.lambda_abs, tol),
        spectral_gap: report.spectral_gap.map(|s| measured(s, tol)),
        bound: bound.as_ref().map(|(_, v)| v.clone()),
    };
    emit(req.out, &to_json_text(&doc))?;
    Ok(match bound {
        Some((false, _)) => Outcome::Fail,
        _ => Outcome::Pass,
    })
}
