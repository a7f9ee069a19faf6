//! Tap files.
//!
//! Text form: one decimal tap per line; blank lines and `#` comments are
//! skipped. JSON form: `{"taps": [...], "kind": "fir" | "linear_phase"}`.
//! Writers emit 17 significant digits so every `f64` round-trips.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{FirFilter, LinearPhasePrototype};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TapKind {
    Fir,
    LinearPhase,
}

/// Parsed tap file; `kind` is `None` for the text form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TapFile {
    pub taps: Vec<f64>,
    #[serde(default)]
    pub kind: Option<TapKind>,
}

impl TapFile {
    pub fn into_fir(self) -> Result<FirFilter> {
        FirFilter::new(self.taps)
    }

    pub fn into_prototype(self) -> Result<LinearPhasePrototype> {
        LinearPhasePrototype::new(self.taps)
    }
}

/// Parses either form, choosing JSON when the first non-blank character is `{`.
pub fn parse_taps(text: &str) -> Result<TapFile> {
    if text.trim_start().starts_with('{') {
        let file: TapFile = serde_json::from_str(text)?;
        if file.taps.is_empty() {
            return Err(Error::Empty);
        }
        return Ok(file);
    }
    let mut taps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let value: f64 = line.parse().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("not a number: {line:?}"),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("tap is not finite: {line:?}"),
            });
        }
        taps.push(value);
    }
    if taps.is_empty() {
        return Err(Error::Empty);
    }
    Ok(TapFile { taps, kind: None })
}

pub fn read_taps(path: impl AsRef<Path>) -> Result<TapFile> {
    parse_taps(&fs::read_to_string(path)?)
}

/// One tap per line in `{:.16e}` form.
pub fn format_taps(taps: &[f64]) -> String {
    taps.iter().map(|t| format!("{t:.16e}\n")).collect()
}

pub fn write_taps(path: impl AsRef<Path>, taps: &[f64]) -> Result<()> {
    fs::write(path, format_taps(taps))?;
    Ok(())
}

#[cfg(test)]
mod test {
    use super::*;

    #[test]
    fn text_with_comments() {
        let f = parse_taps("# header\n0.5\n\n1.25 # centre\n0.5\n").unwrap();
        assert_eq!(f.taps, vec![0.5, 1.25, 0.5]);
        assert_eq!(f.kind, None);
    }

    #[test]
    fn json_form() {
        let f = parse_taps(r#"{"taps": [3, 1], "kind": "fir"}"#).unwrap();
        assert_eq!(f.taps, vec![3.0, 1.0]);
        assert_eq!(f.kind, Some(TapKind::Fir));
        let f = parse_taps(r#"{"taps": [1], "kind": "linear_phase"}"#).unwrap();
        assert_eq!(f.kind, Some(TapKind::LinearPhase));
    }

    #[test]
    fn malformed_input() {
        assert!(matches!(parse_taps("1.0\nabc\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_taps("# nothing\n"), Err(Error::Empty)));
        assert!(matches!(parse_taps("inf\n"), Err(Error::Parse { line: 1, .. })));
        assert!(parse_taps(r#"{"taps": "x"}"#).is_err());
    }

    #[test]
    fn round_trip_is_exact() {
        let taps = vec![0.1, -1.0 / 3.0, 5.832240436431935e-6, f64::MIN_POSITIVE, 1e300];
        assert_eq!(parse_taps(&format_taps(&taps)).unwrap().taps, taps);
    }
}
