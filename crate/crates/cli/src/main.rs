//! `hdx`: build complexes, verify their structure and report spectra.

mod build;
mod files;
mod spectrum;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hdx_core::HdxError;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "hdx", version, about = "Transitive 2-dimensional expander complexes")]
struct Cli {
    /// Worker threads for internal parallelism (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a complex and write it with a metadata sidecar.
    Build {
        #[arg(long, value_enum)]
        construction: Construction,
        /// JSON parameter file for the construction.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output complex file; metadata goes to `<out>.meta.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run structural checks on a complex file.
    Verify {
        complex: PathBuf,
        /// Comma separated: cts, two-centers, lift, transitivity, links, inv, bound.
        #[arg(long, default_value = "cts,two-centers,lift")]
        checks: String,
        /// Metadata sidecar (default: `<complex>.meta.json` when present).
        #[arg(long)]
        meta: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectral report for one derived graph.
    Spectrum {
        complex: PathBuf,
        #[arg(long, value_enum, default_value = "walk")]
        graph: GraphSelector,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Add the walk bound check and its margin.
        #[arg(long)]
        bound: bool,
        #[arg(long)]
        meta: Option<PathBuf>,
        /// Vertex cap for spectral work (overrides HDX_SIZE_CAP).
        #[arg(long)]
        size_cap: Option<usize>,
        /// Also export the selected graph as a TSV edge list.
        #[arg(long)]
        edges: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    Conlon,
    ThreeProduct,
    HdzMinus,
    HdzPlus,
    Hpower,
    Multipartite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum GraphSelector {
    Walk,
    Dual,
    #[value(name = "L")]
    #[serde(rename = "L")]
    L,
    Rep,
    Zigzag,
}

/// Outcome of a command: an exit status, or an error to report.
pub enum Outcome {
    Pass,
    Fail,
}

#[derive(Serialize)]
struct ErrorDocument {
    error: &'static str,
    message: String,
    exit_code: u8,
}

fn classify(e: &HdxError) -> (&'static str, u8) {
    match e {
        HdxError::Infeasible(_) => ("infeasible", 3),
        HdxError::Size { .. } => ("size", 3),
        HdxError::Structural { .. } => ("structural", 1),
        HdxError::Disconnected { .. } => ("disconnected", 1),
        HdxError::Parameter(_) => ("parameter", 2),
        HdxError::Mode(_) => ("mode", 2),
        HdxError::State(_) => ("state", 2),
        HdxError::Parse(_) => ("parse", 2),
        HdxError::Io(_) => ("io", 2),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    let result = match cli.command {
        Command::Build {
            construction,
            params,
            seed,
            out,
        } => build::run(construction, params.as_deref(), seed, &out),
        Command::Verify {
            complex,
            checks,
            meta,
            seed,
            out,
        } => verify::run(&complex, &checks, meta.as_deref(), seed, out.as_deref()),
        Command::Spectrum {
            complex,
            graph,
            tol,
            bound,
            meta,
            size_cap,
            edges,
            out,
        } => spectrum::run(spectrum::Request {
            complex: &complex,
            graph,
            tol,
            bound,
            meta: meta.as_deref(),
            size_cap,
            edges: edges.as_deref(),
            out: out.as_deref(),
        }),
    };
    match result {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            let (error, code) = classify(&e);
            let mut message = e.to_string();
            if matches!(e, HdxError::Size { .. }) {
                message.push_str(
                    "; raise --size-cap or HDX_SIZE_CAP, or use the sampled lift check of `hdx verify`",
                );
            }
            let doc = ErrorDocument {
                error,
                message,
                exit_code: code,
            };
            eprintln!(
                "{}",
                serde_json::to_string(&doc).expect("error document serializes")
            );
            ExitCode::from(code)
        }
    }
}
