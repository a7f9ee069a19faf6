//! Minimum-phase transformation of an arbitrary-phase FIR, and an MMSE
//! feedforward baseline.
//!
//! The autocorrelation of any FIR is a nonnegative linear-phase prototype, so
//! no lift is needed: factor its Gramian, read the symmetry column, refine.
//! The symmetry row of `F = (Cᵀ)⁻¹Hᵀ` is the anti-causal prefilter `f` with
//! `c[k] ≈ Σ_p f[p]·h[k+p]`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gramian::{build_gramian, extract_minphase, prefilter_taps};
use crate::orchard_wilson::{refine_target, residual, ResidualReport, SolverConfig, Target};
use crate::signal::{
    amplitude_extremum, autocorrelation, frequency_response_magnitude, Extremum, FirFilter, FrequencyGrid, DEFAULT_GRID,
};

/// `min |H(Ω)|²` at or below this fraction of the peak counts as a zero on
/// the unit circle.
pub const UNIT_CIRCLE_TOLERANCE: f64 = 1e-13;

/// Minimum-phase filter, its prefilter and quality measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformResult {
    pub c: FirFilter,
    /// Anti-causal prefilter, `f_taps[p]` weighting `h[k+p]`.
    pub f_taps: Vec<f64>,
    pub residual: ResidualReport,
    /// `max_Ω ||C(Ω)| − |H(Ω)||`.
    pub spectral_error: f64,
}

/// Feedforward length `P + 1` and noise variance for [`mmse_transform`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmseConfig {
    pub taps: usize,
    pub sigma2: f64,
}

impl MmseConfig {
    /// `σ² = 1e-4` and `P + 1 = 10·M`.
    pub fn for_filter(h: &FirFilter) -> Self {
        Self {
            taps: 10 * h.len(),
            sigma2: 1e-4,
        }
    }

    pub fn validate(&self, h: &FirFilter) -> Result<()> {
        if self.taps < h.len() {
            return Err(Error::InvalidInput(format!(
                "feedforward length {} is shorter than the filter ({})",
                self.taps,
                h.len()
            )));
        }
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "noise variance must be finite and nonnegative, got {}",
                self.sigma2
            )));
        }
        Ok(())
    }
}

/// Rejects filters with a zero on (or numerically at) the unit circle.
fn check_unit_circle(h: &FirFilter) -> Result<()> {
    let g = autocorrelation(h);
    let lo = amplitude_extremum(&g, DEFAULT_GRID, Extremum::Min).value;
    let hi = amplitude_extremum(&g, DEFAULT_GRID, Extremum::Max).value;
    if lo <= UNIT_CIRCLE_TOLERANCE * hi {
        return Err(Error::NotPositiveDefinite { pivot: None, value: lo });
    }
    Ok(())
}

/// Minimum-phase equivalent of `h` at padding `Q`, refined with default settings.
///
/// Refinement targets the exact lag products of `h` rather than their
/// double-rounded autocorrelation, so a minimum-phase input is recovered to
/// rounding of its own taps.
pub fn transform(h: &FirFilter, padding: usize) -> Result<TransformResult> {
    transform_with(h, padding, &SolverConfig::default())
}

/// [`transform`] with explicit solver settings.
pub fn transform_with(h: &FirFilter, padding: usize, cfg: &SolverConfig) -> Result<TransformResult> {
    check_unit_circle(h)?;
    let g = autocorrelation(h);
    let factor = build_gramian(&g, padding, 0.0)?.cholesky()?;
    let c_approx = extract_minphase(&factor, h.len())?;
    let f_taps = prefilter_taps(h, &factor);
    let (c, residual) = refine_target(&c_approx, &Target::autocorrelation_of(h), cfg)?;
    let spectral_error = spectral_equality_check(h, &c, &FrequencyGrid::default())?;
    Ok(TransformResult {
        c,
        f_taps,
        residual,
        spectral_error,
    })
}

/// Wiener feedforward baseline with a monic, unbiased target.
///
/// Observations `y = H_c·s + w` over a window of `P + 1` samples, with
/// `H_c[j, j − k + M − 1] = h[k]`. For a target `c ⋆ s` with `c[0] = 1` the
/// optimal feedforward is `f = X·c`, `X = R_yy⁻¹·H_c·E`, where `E` picks the
/// `M` symbols the target depends on; the best `c` minimizes `cᵀΦc` with
/// `Φ = I − EᵀH_cᵀX`, giving `c ∝ Φ⁻¹e₀`. The realized response is read from
/// `H_cᵀf`, then `c` and `f` are rescaled so `‖c‖² = ‖h‖²`.
pub fn mmse_transform(h: &FirFilter, cfg: &MmseConfig) -> Result<TransformResult> {
    cfg.validate(h)?;
    let m = h.len();
    let rows = cfg.taps;
    let cols = cfg.taps + m - 1;
    let hc = DMatrix::from_fn(rows, cols, |j, col| {
        (j + m - 1)
            .checked_sub(col)
            .filter(|&k| k < m)
            .map_or(0.0, |k| h.taps()[k])
    });
    // E[M − 1 − k, k] = 1
    let hc_e = DMatrix::from_fn(rows, m, |j, k| hc[(j, m - 1 - k)]);
    let ryy = &hc * hc.transpose() + DMatrix::<f64>::identity(rows, rows) * cfg.sigma2;
    let chol = ryy
        .cholesky()
        .ok_or_else(|| Error::Singular("observation covariance is not positive definite".into()))?;
    let x = chol.solve(&hc_e);
    let phi = DMatrix::<f64>::identity(m, m) - hc_e.transpose() * &x;
    let mut e0 = DVector::zeros(m);
    e0[0] = 1.0;
    let u = phi
        .lu()
        .solve(&e0)
        .ok_or_else(|| Error::Singular("MMSE error covariance is singular".into()))?;
    if u[0] == 0.0 || !u.iter().all(|v| v.is_finite()) {
        return Err(Error::Singular("MMSE target has no monic solution".into()));
    }
    let c_opt = &u / u[0];
    let f = &x * c_opt;
    let q = hc.transpose() * &f;
    let c_raw: Vec<f64> = (0..m).map(|k| q[m - 1 - k]).collect();
    let energy: f64 = c_raw.iter().map(|v| v * v).sum();
    if energy.is_nan() || energy <= 0.0 {
        return Err(Error::Singular("MMSE response vanished".into()));
    }
    let k = (h.energy() / energy).sqrt();
    let c = FirFilter::new(c_raw.iter().map(|v| v * k).collect())?;
    let f_taps: Vec<f64> = f.iter().map(|v| v * k).collect();
    let residual = residual(&c, &autocorrelation(h))?;
    let spectral_error = spectral_equality_check(h, &c, &FrequencyGrid::default())?;
    Ok(TransformResult {
        c,
        f_taps,
        residual,
        spectral_error,
    })
}

/// `max_Ω ||C(Ω)| − |H(Ω)||` over the grid.
pub fn spectral_equality_check(h: &FirFilter, c: &FirFilter, grid: &FrequencyGrid) -> Result<f64> {
    if h.len() != c.len() {
        return Err(Error::LengthMismatch {
            expected: h.len(),
            actual: c.len(),
        });
    }
    let a = frequency_response_magnitude(h, grid);
    let b = frequency_response_magnitude(c, grid);
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}
