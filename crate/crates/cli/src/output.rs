//! Run manifests and artifact writers. Every number is printed with 17
//! significant digits so it round-trips to the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use minphase::{MmseConfig, Offset, Scaling, SolverConfig};
use serde::Serialize;

use crate::Failure;

pub const MANIFEST: &str = "manifest.json";

/// Settings a command actually ran with, after precedence was applied.
#[derive(Debug, Default, Serialize)]
pub struct ResolvedConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub padding: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<Offset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_psd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaling: Option<Scaling>,
    pub grid: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mmse: Option<MmseConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paddings: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_file: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub version: &'static str,
    pub inputs: Vec<String>,
    pub config: ResolvedConfig,
    pub outputs: Vec<String>,
}

/// Collects artifacts for one run in an output directory.
pub struct Artifacts {
    dir: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::Domain(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn put(&mut self, name: &str, body: &str) -> Result<(), Failure> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|e| Failure::Domain(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Tap file headed by a comment naming the manifest.
    pub fn taps(&mut self, name: &str, taps: &[f64]) -> Result<(), Failure> {
        let body = format!("# {MANIFEST}\n{}", minphase::taps::format_taps(taps));
        self.put(name, &body)
    }

    pub fn csv(&mut self, name: &str, header: &str, rows: impl IntoIterator<Item = Vec<Cell>>) -> Result<(), Failure> {
        let mut body = format!("{header}\n");
        for row in rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(body, "{}", cells.join(","));
        }
        self.put(name, &body)
    }

    /// JSON report carrying a `manifest` field.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let mut v = serde_json::to_value(value).map_err(|e| Failure::Domain(e.to_string()))?;
        if let serde_json::Value::Object(map) = &mut v {
            map.insert("manifest".into(), MANIFEST.into());
        }
        self.put(name, &pretty(&v)?)
    }

    pub fn finish(mut self, command: &'static str, inputs: &[&Path], config: ResolvedConfig) -> Result<(), Failure> {
        let manifest = RunManifest {
            command,
            version: env!("CARGO_PKG_VERSION"),
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            config,
            outputs: self.written.clone(),
        };
        let body = pretty(&manifest)?;
        self.put(MANIFEST, &body)
    }
}

fn pretty<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::Domain(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub enum Cell {
    Real(f64),
    Int(usize),
    Flag(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Real(x) => real(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Flag(b) => b.to_string(),
        }
    }
}

/// 17 significant digits; non-finite values as `inf`, `-inf` or `nan`.
pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}
