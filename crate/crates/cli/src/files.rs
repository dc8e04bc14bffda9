//! Atomic writes, fingerprints and the metadata sidecar.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use hdx_core::groups::GroupDescriptor;
use hdx_core::schreier::ActionComplex;
use hdx_core::{CtsInstance, FiniteGroup, HdxError, Result, TwoComplex};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Instance metadata written next to every built complex.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub tool_version: String,
    pub construction: String,
    pub seed: u64,
    /// Acting group, when the complex is a Schreier complex.
    #[serde(default)]
    pub group: Option<GroupDescriptor>,
    /// Per-color (or per-coordinate) groups.
    #[serde(default)]
    pub components: Vec<GroupDescriptor>,
    /// Generator sets as element indices of the matching component.
    #[serde(default)]
    pub generators: Vec<Vec<usize>>,
    /// Small complex as element indices of `group`.
    #[serde(default)]
    pub small_triangles: Vec<[usize; 3]>,
    pub complex_sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary file in the same directory and renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| HdxError::Parameter(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn meta_path(complex: &Path) -> PathBuf {
    let mut s = complex.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Reads a file, naming it in the error.
pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| {
        HdxError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

pub fn read_text(path: &Path) -> Result<String> {
    String::from_utf8(read_file(path)?)
        .map_err(|e| HdxError::Parse(format!("{}: {e}", path.display())))
}

pub fn read_meta(path: &Path) -> Result<InstanceMeta> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| HdxError::Parse(format!("{}: {e}", path.display())))
}

/// Loads the sidecar given explicitly, or the default one if it exists.
pub fn load_meta(complex: &Path, explicit: Option<&Path>) -> Result<Option<InstanceMeta>> {
    match explicit {
        Some(p) => read_meta(p).map(Some),
        None => {
            let p = meta_path(complex);
            if p.exists() {
                read_meta(&p).map(Some)
            } else {
                Ok(None)
            }
        }
    }
}

/// Complex file contents with their fingerprint.
pub struct LoadedComplex {
    pub complex: TwoComplex,
    pub sha256: String,
}

pub fn load_complex(path: &Path) -> Result<LoadedComplex> {
    let bytes = read_file(path)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| HdxError::Parse(format!("{}: {e}", path.display())))?;
    Ok(LoadedComplex {
        complex: TwoComplex::from_json(text)?,
        sha256: sha256_hex(&bytes),
    })
}

/// Rebuilds the CTS instance described by `meta` around the file's complex.
pub fn instance_from_meta(meta: &InstanceMeta, complex: &TwoComplex) -> Result<Option<CtsInstance>> {
    let Some(desc) = &meta.group else {
        return Ok(None);
    };
    if meta.small_triangles.is_empty() {
        return Ok(None);
    }
    let group = FiniteGroup::new(desc)?;
    if complex.num_vertices() != group.order() {
        return Err(HdxError::Parse(format!(
            "complex has {} vertices but {} has order {}",
            complex.num_vertices(),
            desc,
            group.order()
        )));
    }
    if let Some(v) = (0..group.order()).find(|&x| complex.label(x as u32) != group.label(x)) {
        return Err(HdxError::Parse(format!(
            "vertex {v} is labelled {} but group element {v} is {}",
            complex.label(v as u32),
            group.label(v)
        )));
    }
    let action = ActionComplex::new(group, &meta.small_triangles)?;
    Ok(Some(CtsInstance::new(action).with_complex(complex.clone())?))
}

/// Size cap from the flag, then `HDX_SIZE_CAP`, then 4000.
pub fn size_cap(flag: Option<usize>) -> Result<usize> {
    if let Some(c) = flag {
        return Ok(c);
    }
    match std::env::var("HDX_SIZE_CAP") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| HdxError::Parameter(format!("HDX_SIZE_CAP={v} is not a vertex count"))),
        Err(_) => Ok(DEFAULT_SIZE_CAP),
    }
}

pub const DEFAULT_SIZE_CAP: usize = 4000;

/// Pretty JSON with a trailing newline.
pub fn to_json_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Writes to `out` atomically, or to stdout.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
