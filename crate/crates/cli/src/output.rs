//! Output files, digests and the run manifest.
//!
//! Data files carry no timestamps, so identical inputs give identical bytes.
//! The manifest is the only file with a wall-clock time in it.

use std::fs;
use std::path::{Path, PathBuf};

use microcavity_core::{FrequencyGrid, JsaMatrix};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";
pub const RESOLVED_CONFIG: &str = "resolved.toml";

/// Scientific notation with 17 significant digits; round-trips any f64.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// A JSON number token in the same format as [`num`].
pub fn json_num(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() {
        num(x)
    } else {
        "null".to_string()
    };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    started: String,
    finished: String,
    config: &'a str,
    files: &'a [FileRecord],
}

/// Collects the files written by one command.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileRecord>,
    started: String,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self, CliError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| CliError::io(&root, e))?;
        Ok(Self {
            root,
            files: Vec::new(),
            started: now(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileRecord {
            path: name.to_string(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn write_csv<R: AsRef<[f64]>>(
        &mut self,
        name: &str,
        header: &[&str],
        rows: &[R],
    ) -> Result<(), CliError> {
        self.write(name, csv(header, rows).as_bytes())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("output serializes");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes the resolved configuration and the manifest; returns the file list.
    pub fn finish(mut self, command: &str, config_toml: &str) -> Result<Vec<FileRecord>, CliError> {
        self.write(RESOLVED_CONFIG, config_toml.as_bytes())?;
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            started: self.started.clone(),
            finished: now(),
            config: config_toml,
            files: &self.files,
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        let path = self.root.join(MANIFEST);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(self.files)
    }
}

pub fn csv<R: AsRef<[f64]>>(header: &[&str], rows: &[R]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.as_ref().iter().map(|&x| num(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

const MAGIC: &[u8; 8] = b"MCJSA\0\0\x01";
const HEADER_LEN: usize = 8 + 2 * 8 + 4 * 8;

/// Little-endian binary layout: magic, signal and idler point counts (u64),
/// signal then idler band edges (f64, rad/s), then row-major (Re, Im) pairs
/// with the signal index running slowest.
pub fn encode_jsa(jsa: &JsaMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * jsa.values().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(jsa.n_signal() as u64).to_le_bytes());
    out.extend_from_slice(&(jsa.n_idler() as u64).to_le_bytes());
    for g in [&jsa.grid_s, &jsa.grid_i] {
        out.extend_from_slice(&g.omega_min.to_le_bytes());
        out.extend_from_slice(&g.omega_max.to_le_bytes());
    }
    for z in jsa.values() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn decode_jsa(bytes: &[u8]) -> Result<JsaMatrix, CliError> {
    let bad = |msg: &str| CliError::Config(format!("matrix file: {msg}"));
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err(bad("not a JSA matrix file"));
    }
    let u64_at = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
    let f64_at = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
    let (ns, ni) = (u64_at(8) as usize, u64_at(16) as usize);
    let expected = ns
        .checked_mul(ni)
        .and_then(|n| n.checked_mul(16))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| bad("dimensions overflow"))?;
    if bytes.len() != expected {
        return Err(bad(&format!(
            "expected {expected} bytes for {ns}x{ni}, found {}",
            bytes.len()
        )));
    }
    let grid = |offset: usize, n: usize| {
        FrequencyGrid::new(f64_at(offset), f64_at(offset + 8), n).map_err(|e| bad(&e.to_string()))
    };
    let grid_s = grid(24, ns)?;
    let grid_i = grid(40, ni)?;
    let values = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    JsaMatrix::from_values(grid_s, grid_i, values).map_err(|e| bad(&e.to_string()))
}

/// Evenly strided indices including both ends, at most `max` of them.
pub fn decimate(n: usize, max: usize) -> Vec<usize> {
    if n <= max {
        return (0..n).collect();
    }
    let stride = (n - 1).div_ceil(max - 1);
    let mut idx: Vec<usize> = (0..n).step_by(stride).collect();
    if *idx.last().unwrap() != n - 1 {
        idx.push(n - 1);
    }
    idx
}
