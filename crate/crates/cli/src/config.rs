//! Settings resolution: flags, then `minphase.cfg`, then built-in defaults.
//! `MINPHASE_GRID` replaces the built-in grid default only.

use std::fs;
use std::path::{Path, PathBuf};

use minphase::signal::DEFAULT_GRID;
use minphase::{Offset, Scaling, SolverConfig};
use serde::Deserialize;

use crate::Failure;

pub const CONFIG_FILE: &str = "minphase.cfg";
pub const GRID_ENV: &str = "MINPHASE_GRID";

/// A setting that is either a number or a keyword such as `auto`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NumberOr {
    Number(f64),
    Text(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverFile {
    pub max_iterations: Option<usize>,
    pub gradient_tolerance: Option<f64>,
    pub step_tolerance: Option<f64>,
    pub initial_damping: Option<f64>,
    pub newton_polish: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub q: Option<usize>,
    pub epsilon: Option<NumberOr>,
    pub gamma_psd: Option<f64>,
    pub scale: Option<NumberOr>,
    pub grid: Option<usize>,
    pub jobs: Option<usize>,
    pub sigma2: Option<f64>,
    pub plen: Option<usize>,
    #[serde(default)]
    pub solver: SolverFile,
}

impl FileConfig {
    /// Reads `explicit`, or `minphase.cfg` if it exists. A missing explicit
    /// file is an error; a missing default file is not.
    pub fn load(explicit: Option<&Path>) -> Result<(Self, Option<PathBuf>), Failure> {
        let path = match explicit {
            Some(p) => p.to_path_buf(),
            None => {
                let p = PathBuf::from(CONFIG_FILE);
                if !p.is_file() {
                    return Ok((Self::default(), None));
                }
                p
            }
        };
        let text = fs::read_to_string(&path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let cfg = toml::from_str(&text).map_err(|e| Failure::Usage(format!("bad config {}: {e}", path.display())))?;
        Ok((cfg, Some(path)))
    }

    pub fn solver(&self) -> Result<SolverConfig, Failure> {
        let d = SolverConfig::default();
        let s = &self.solver;
        let cfg = SolverConfig {
            max_iterations: s.max_iterations.unwrap_or(d.max_iterations),
            gradient_tolerance: s.gradient_tolerance.unwrap_or(d.gradient_tolerance),
            step_tolerance: s.step_tolerance.unwrap_or(d.step_tolerance),
            initial_damping: s.initial_damping.unwrap_or(d.initial_damping),
            newton_polish: s.newton_polish.unwrap_or(d.newton_polish),
        };
        cfg.validate()
            .map_err(|e| Failure::Usage(format!("bad solver settings: {e}")))?;
        Ok(cfg)
    }

    pub fn grid(&self, flag: Option<usize>) -> Result<usize, Failure> {
        let grid = match flag.or(self.grid) {
            Some(g) => g,
            None => match std::env::var(GRID_ENV) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| Failure::Usage(format!("{GRID_ENV} must be a positive integer, got {v:?}")))?,
                Err(_) => DEFAULT_GRID,
            },
        };
        if grid < 2 {
            return Err(Failure::Usage(format!("grid needs at least 2 points, got {grid}")));
        }
        Ok(grid)
    }

    pub fn offset(&self, flag: Option<&str>) -> Result<Offset, Failure> {
        match (flag, &self.epsilon) {
            (Some(text), _) => parse_offset(text),
            (None, Some(NumberOr::Number(x))) => Ok(Offset::Fixed(*x)),
            (None, Some(NumberOr::Text(text))) => parse_offset(text),
            (None, None) => Ok(Offset::Auto),
        }
    }

    pub fn scaling(&self, flag: Option<&str>) -> Result<Scaling, Failure> {
        match (flag, &self.scale) {
            (Some(text), _) => parse_scaling(text),
            (None, Some(NumberOr::Number(x))) => fixed_scale(*x),
            (None, Some(NumberOr::Text(text))) => parse_scaling(text),
            (None, None) => Ok(Scaling::UnitPeak),
        }
    }
}

fn parse_offset(text: &str) -> Result<Offset, Failure> {
    if text.eq_ignore_ascii_case("auto") {
        return Ok(Offset::Auto);
    }
    match text.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(Offset::Fixed(x)),
        _ => Err(Failure::Usage(format!(
            "epsilon must be a number or `auto`, got {text:?}"
        ))),
    }
}

fn parse_scaling(text: &str) -> Result<Scaling, Failure> {
    if text.eq_ignore_ascii_case("unit-peak") {
        return Ok(Scaling::UnitPeak);
    }
    match text.trim().parse::<f64>() {
        Ok(x) => fixed_scale(x),
        Err(_) => Err(Failure::Usage(format!(
            "scale must be `unit-peak` or a number, got {text:?}"
        ))),
    }
}

fn fixed_scale(x: f64) -> Result<Scaling, Failure> {
    if x > 0.0 && x.is_finite() {
        Ok(Scaling::Fixed(x))
    } else {
        Err(Failure::Usage(format!("scale must be positive and finite, got {x}")))
    }
}
