//! `hdx build`.

use std::path::{Path, PathBuf};

use hdx_core::constructions::{
    build_conlon, build_three_product, complete_multipartite_base, find_sidon_set,
};
use hdx_core::groups::sample_symmetric_generators;
use hdx_core::hdz::{build_hdz, HdzMode, HdzSpec};
use hdx_core::rng::derive_stream;
use hdx_core::{
    CtsInstance, FiniteGroup, GeneratorSet, GroupDescriptor, HdxError, Result, SpectralOptions,
    TwoComplex,
};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::files::{load_complex, meta_path, read_text, sha256_hex, write_atomic, InstanceMeta};
use crate::{Construction, Outcome};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConlonParams {
    t: u32,
    #[serde(default)]
    size: Option<usize>,
    #[serde(default)]
    elements: Option<Vec<usize>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ThreeProductParams {
    groups: [GroupDescriptor; 3],
    sets: [Vec<usize>; 3],
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BaseParams {
    File { file: PathBuf },
    Multipartite { chi: usize, n: usize },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HdzParams {
    base: BaseParams,
    groups: Vec<GroupDescriptor>,
    /// Element indices per color; sampled from the seed when absent.
    #[serde(default)]
    generators: Option<Vec<Vec<usize>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HpowerParams {
    input: PathBuf,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MultipartiteParams {
    chi: usize,
    n: usize,
}

fn params<T: DeserializeOwned>(path: Option<&Path>) -> Result<T> {
    let path = path.ok_or_else(|| HdxError::Parameter("--params is required".into()))?;
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| HdxError::Parse(format!("{}: {e}", path.display())))
}

/// Paths inside a params file are relative to that file.
fn resolve(params: Option<&Path>, p: &Path) -> PathBuf {
    match params.and_then(Path::parent) {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    }
}

struct Built {
    complex: TwoComplex,
    group: Option<GroupDescriptor>,
    components: Vec<GroupDescriptor>,
    generators: Vec<Vec<usize>>,
    small_triangles: Vec<[usize; 3]>,
}

fn from_instance(
    instance: &CtsInstance,
    components: Vec<GroupDescriptor>,
    generators: Vec<Vec<usize>>,
) -> Result<Built> {
    if !instance.record().all_pass() {
        let failed = instance.record().failed();
        return Err(HdxError::Structural {
            message: format!("CTS conditions {failed:?} fail"),
            witness: format!("{:?}", instance.record().witness),
        });
    }
    Ok(Built {
        complex: instance.complex()?.clone(),
        group: Some(instance.group().descriptor().clone()),
        components,
        generators,
        small_triangles: instance.action().element_triangles(),
    })
}

fn conlon(p: ConlonParams, seed: u64) -> Result<Built> {
    let elements = match (p.elements, p.size) {
        (Some(e), None) => e,
        (None, Some(size)) => find_sidon_set(p.t, size, seed)?.elements().to_vec(),
        _ => {
            return Err(HdxError::Parameter(
                "conlon params need exactly one of `size` and `elements`".into(),
            ))
        }
    };
    let instance = build_conlon(p.t, &elements)?;
    from_instance(
        &instance,
        vec![GroupDescriptor::BooleanVector { t: p.t }],
        vec![elements],
    )
}

fn three_product(p: ThreeProductParams) -> Result<Built> {
    let groups = p
        .groups
        .iter()
        .map(FiniteGroup::new)
        .collect::<Result<Vec<_>>>()?;
    let tp = build_three_product::<f64>(
        [&groups[0], &groups[1], &groups[2]],
        [&p.sets[0], &p.sets[1], &p.sets[2]],
        &SpectralOptions::default(),
    )?;
    from_instance(&tp.instance, p.groups.to_vec(), p.sets.to_vec())
}

fn hdz(p: HdzParams, mode: HdzMode, seed: u64, params_path: Option<&Path>) -> Result<Built> {
    let base = match &p.base {
        BaseParams::File { file } => load_complex(&resolve(params_path, file))?.complex,
        BaseParams::Multipartite { chi, n } => complete_multipartite_base(*chi, *n)?,
    };
    let coloring = base
        .coloring()
        .ok_or_else(|| HdxError::Parameter("HDZ base complex needs a coloring".into()))?;
    if coloring.chi() != p.groups.len() {
        return Err(HdxError::Parameter(format!(
            "base has {} colors but {} groups were given",
            coloring.chi(),
            p.groups.len()
        )));
    }
    let groups = p
        .groups
        .iter()
        .map(FiniteGroup::new)
        .collect::<Result<Vec<_>>>()?;
    let generators: Vec<GeneratorSet> = match &p.generators {
        Some(lists) => {
            if lists.len() != groups.len() {
                return Err(HdxError::Parameter(format!(
                    "{} generator lists for {} groups",
                    lists.len(),
                    groups.len()
                )));
            }
            groups
                .iter()
                .zip(lists)
                .map(|(g, l)| GeneratorSet::new(g, l.clone()))
                .collect::<Result<_>>()?
        }
        None => groups
            .iter()
            .zip(coloring.part_sizes())
            .enumerate()
            .map(|(c, (g, size))| {
                let pairs = match mode {
                    HdzMode::Plus => size,
                    HdzMode::Minus if size % 2 == 0 => size / 2,
                    HdzMode::Minus => {
                        return Err(HdxError::Parameter(format!(
                            "color {c} has odd size {size}; minus mode needs even parts (use hdz-plus)"
                        )))
                    }
                };
                sample_symmetric_generators(g, pairs, &mut derive_stream(seed, &format!("generators/{c}")))
            })
            .collect::<Result<_>>()?,
    };
    let lists: Vec<Vec<usize>> = generators.iter().map(|f| f.elements().to_vec()).collect();
    let build = build_hdz(HdzSpec {
        base,
        groups,
        generators,
        mode,
        independent: true,
    })?;
    from_instance(&build.instance, p.groups, lists)
}

fn plain(complex: TwoComplex) -> Built {
    Built {
        complex,
        group: None,
        components: Vec::new(),
        generators: Vec::new(),
        small_triangles: Vec::new(),
    }
}

pub fn run(kind: Construction, params_path: Option<&Path>, seed: u64, out: &Path) -> Result<Outcome> {
    let built = match kind {
        Construction::Conlon => conlon(params(params_path)?, seed)?,
        Construction::ThreeProduct => three_product(params(params_path)?)?,
        Construction::HdzMinus => hdz(params(params_path)?, HdzMode::Minus, seed, params_path)?,
        Construction::HdzPlus => hdz(params(params_path)?, HdzMode::Plus, seed, params_path)?,
        Construction::Hpower => {
            let p: HpowerParams = params(params_path)?;
            plain(load_complex(&resolve(params_path, &p.input))?.complex.hpower()?)
        }
        Construction::Multipartite => {
            let p: MultipartiteParams = params(params_path)?;
            plain(complete_multipartite_base(p.chi, p.n)?)
        }
    };
    let text = built.complex.to_json();
    let meta = InstanceMeta {
        tool_version: hdx_core::VERSION.to_string(),
        construction: serde_json::to_value(kind)?
            .as_str()
            .expect("construction names serialize as strings")
            .to_string(),
        seed,
        group: built.group,
        components: built.components,
        generators: built.generators,
        small_triangles: built.small_triangles,
        complex_sha256: sha256_hex(text.as_bytes()),
    };
    write_atomic(out, text.as_bytes())?;
    write_atomic(&meta_path(out), crate::files::to_json_text(&meta).as_bytes())?;
    Ok(Outcome::Pass)
}
