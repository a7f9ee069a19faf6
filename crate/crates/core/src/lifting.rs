//! Chebyshev minimum-phase design by lifting.
//!
//! An equiripple prototype's amplitude dips to `−γ_psd` in the stopband.
//! Adding `γ = γ_psd + ε` to the centre tap makes it factorable; the design
//! flow scales the lifted prototype, seeds the factor from the Cholesky
//! symmetry column and refines it on the Orchard–Wilson equations. The
//! waterfall sweep maps the residual floor against `ε`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gramian::{build_gramian, extract_minphase};
use crate::orchard_wilson::{refine, ResidualReport, SolverConfig};
use crate::signal::{amplitude_extremum, Extremum, FirFilter, LinearPhasePrototype, DEFAULT_GRID};

/// Residual target for an accepted design.
pub const DESIGN_TOLERANCE: f64 = 1e-14;

/// Auto-offset bisection steps on the log scale.
const AUTO_ITERATIONS: usize = 40;

/// Minimum-phase lowpass target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub delta_p: f64,
    pub delta_a: f64,
    pub omega_p: f64,
    pub omega_s: f64,
}

impl DesignSpec {
    pub fn new(delta_p: f64, delta_a: f64, omega_p: f64, omega_s: f64) -> Result<Self> {
        let pi = std::f64::consts::PI;
        if !(0.0 < delta_a && delta_a < delta_p && delta_p < 1.0) {
            return Err(Error::InvalidInput(format!(
                "ripples must satisfy 0 < δa < δp < 1, got δp = {delta_p}, δa = {delta_a}"
            )));
        }
        if !(0.0 < omega_p && omega_p < omega_s && omega_s < pi) {
            return Err(Error::InvalidInput(format!(
                "band edges must satisfy 0 < Ωp < Ωs < π, got Ωp = {omega_p}, Ωs = {omega_s}"
            )));
        }
        Ok(Self {
            delta_p,
            delta_a,
            omega_p,
            omega_s,
        })
    }
}

/// Equivalent ripples of the linear-phase prototype.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearPhaseRipples {
    pub delta_p: f64,
    pub delta_a: f64,
}

/// `Δp = 4δp / (2 + 2δp² − δa²)` and `Δa = δa² / (2 + 2δp² − δa²)`.
pub fn convert_ripples(spec: &DesignSpec) -> LinearPhaseRipples {
    ripples(spec.delta_p, spec.delta_a)
}

fn ripples(dp: f64, da: f64) -> LinearPhaseRipples {
    let den = 2.0 + 2.0 * dp * dp - da * da;
    LinearPhaseRipples {
        delta_p: 4.0 * dp / den,
        delta_a: da * da / den,
    }
}

/// `−min A(Ω)` over `[0, π]`, or 0 when the amplitude never goes negative.
pub fn measure_gamma_psd(g: &LinearPhasePrototype) -> f64 {
    measure_gamma_psd_on(g, DEFAULT_GRID)
}

/// [`measure_gamma_psd`] with an explicit scan grid.
pub fn measure_gamma_psd_on(g: &LinearPhasePrototype, grid: usize) -> f64 {
    (-amplitude_extremum(g, grid, Extremum::Min).value).max(0.0)
}

/// How the lifted prototype is normalized before factorization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    /// `s = 1 / max(A(Ω) + γ)`, so the lifted amplitude peaks at 1.
    UnitPeak,
    Fixed(f64),
}

/// Lift offset above `γ_psd`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Offset {
    /// Smallest offset reaching [`DESIGN_TOLERANCE`], by log bisection.
    Auto,
    Fixed(f64),
}

/// Settings shared by [`design_minphase`] and [`waterfall_sweep_with`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignOptions {
    pub padding: usize,
    pub solver: SolverConfig,
    pub offset: Offset,
    pub scaling: Scaling,
    /// Use this `γ_psd` instead of measuring it from the taps.
    pub gamma_psd: Option<f64>,
    pub grid: usize,
}

impl DesignOptions {
    /// Defaults with padding `Q = 10·L`, `L` the factor length of `g`.
    pub fn for_prototype(g: &LinearPhasePrototype) -> Self {
        Self::with_padding(10 * g.factor_len())
    }

    pub fn with_padding(padding: usize) -> Self {
        Self {
            padding,
            solver: SolverConfig::default(),
            offset: Offset::Auto,
            scaling: Scaling::UnitPeak,
            gamma_psd: None,
            grid: DEFAULT_GRID,
        }
    }

    fn gamma_psd_of(&self, g: &LinearPhasePrototype) -> f64 {
        self.gamma_psd.unwrap_or_else(|| measure_gamma_psd_on(g, self.grid))
    }
}

/// One point of a waterfall curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaterfallPoint {
    pub gamma: f64,
    pub offset: f64,
    /// `+∞` when no factor could be seeded.
    #[serde(rename = "E_L2")]
    pub e_l2: f64,
    pub converged: bool,
}

/// Lift bookkeeping for a finished design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftReport {
    pub gamma_psd: f64,
    pub gamma_final: f64,
    pub offset: f64,
    pub scale: f64,
    pub waterfall: Vec<WaterfallPoint>,
}

/// Result of [`design_minphase`].
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub c: FirFilter,
    /// Cholesky seed before refinement.
    pub c_approx: FirFilter,
    /// Lifted and scaled prototype that `c` factors.
    pub g_adj: LinearPhasePrototype,
    pub lift: LiftReport,
    pub residual: ResidualReport,
}

struct Attempt {
    c_approx: FirFilter,
    g_adj: LinearPhasePrototype,
    scale: f64,
    outcome: Result<(FirFilter, ResidualReport)>,
}

fn scale_for(g: &LinearPhasePrototype, gamma: f64, scaling: Scaling, grid: usize) -> Result<f64> {
    let s = match scaling {
        Scaling::UnitPeak => 1.0 / (amplitude_extremum(g, grid, Extremum::Max).value + gamma),
        Scaling::Fixed(s) => s,
    };
    if s > 0.0 && s.is_finite() {
        Ok(s)
    } else {
        Err(Error::DesignFailure(format!(
            "scale factor must be positive and finite, got {s}"
        )))
    }
}

/// Cholesky seed for `g` lifted by `gamma`. When the Gramian is indefinite,
/// seeds instead from the mirror lift `γ_psd + |offset|`, raised tenfold
/// until it factors.
fn seed(g: &LinearPhasePrototype, gamma_psd: f64, gamma: f64, scale: f64, padding: usize) -> Result<FirFilter> {
    let len = g.factor_len();
    let first = build_gramian(&g.lifted(gamma).scaled(scale), padding, 0.0)?.cholesky();
    let mut last = match first {
        Ok(c) => return extract_minphase(&c, len),
        Err(e) => e,
    };
    let peak = g.lags().iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    let mut extra = (gamma - gamma_psd).abs().max(f64::EPSILON * peak);
    for _ in 0..24 {
        let lifted = g.lifted(gamma_psd + extra).scaled(scale);
        match build_gramian(&lifted, padding, 0.0)?.cholesky() {
            Ok(c) => return extract_minphase(&c, len),
            Err(e) => last = e,
        }
        extra *= 10.0;
    }
    Err(last)
}

fn attempt(g: &LinearPhasePrototype, gamma_psd: f64, offset: f64, opts: &DesignOptions) -> Result<Attempt> {
    let gamma = gamma_psd + offset;
    let scale = scale_for(g, gamma, opts.scaling, opts.grid)?;
    let g_adj = g.lifted(gamma).scaled(scale);
    let c_approx = seed(g, gamma_psd, gamma, scale, opts.padding)?;
    let outcome = refine(&c_approx, &g_adj, &opts.solver);
    Ok(Attempt {
        c_approx,
        g_adj,
        scale,
        outcome,
    })
}

fn point(gamma_psd: f64, offset: f64, a: &Result<Attempt>) -> WaterfallPoint {
    let (e_l2, converged) = match a {
        Ok(Attempt {
            outcome: Ok((_, r)), ..
        }) => (r.e_l2, r.converged),
        Ok(Attempt {
            outcome: Err(Error::NonConvergence { report, .. }),
            ..
        }) => (report.e_l2, false),
        _ => (f64::INFINITY, false),
    };
    WaterfallPoint {
        gamma: gamma_psd + offset,
        offset,
        e_l2,
        converged,
    }
}

/// Residual floor at each `γ = γ_psd + offset`, in input order.
pub fn waterfall_sweep(
    g: &LinearPhasePrototype,
    offsets: &[f64],
    padding: usize,
    cfg: &SolverConfig,
) -> Vec<WaterfallPoint> {
    let opts = DesignOptions {
        solver: cfg.clone(),
        ..DesignOptions::with_padding(padding)
    };
    waterfall_sweep_with(g, offsets, &opts)
}

/// [`waterfall_sweep`] with full design options; `opts.offset` is ignored.
pub fn waterfall_sweep_with(g: &LinearPhasePrototype, offsets: &[f64], opts: &DesignOptions) -> Vec<WaterfallPoint> {
    let gamma_psd = opts.gamma_psd_of(g);
    offsets
        .par_iter()
        .map(|&offset| point(gamma_psd, offset, &attempt(g, gamma_psd, offset, opts)))
        .collect()
}

fn accepts(a: &Result<Attempt>) -> bool {
    matches!(a, Ok(Attempt { outcome: Ok((_, r)), .. }) if r.e_l2 <= DESIGN_TOLERANCE)
}

/// Lifts, scales, factors and refines `g` into a minimum-phase filter.
///
/// With [`Offset::Auto`] the offset is bisected on a log scale over
/// `[1e-16·γ_psd, 1e-6·γ_psd]` for the smallest value whose refined residual
/// meets [`DESIGN_TOLERANCE`]; every probe is recorded in the report's
/// waterfall. A prototype that is already nonnegative tries `ε = 0` first.
pub fn design_minphase(g: &LinearPhasePrototype, opts: &DesignOptions) -> Result<Design> {
    let gamma_psd = opts.gamma_psd_of(g);
    if !(gamma_psd >= 0.0 && gamma_psd.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "γ_psd must be finite and nonnegative, got {gamma_psd}"
        )));
    }
    let mut waterfall = Vec::new();
    let mut probe = |offset: f64| {
        let a = attempt(g, gamma_psd, offset, opts);
        waterfall.push(point(gamma_psd, offset, &a));
        a
    };

    let (offset, chosen) = match opts.offset {
        Offset::Fixed(offset) => (offset, probe(offset)?),
        Offset::Auto => {
            let zero = (gamma_psd == 0.0).then(|| probe(0.0));
            match zero {
                Some(a) if accepts(&a) => (0.0, a?),
                _ => {
                    let base = if gamma_psd > 0.0 {
                        gamma_psd
                    } else {
                        g.lags().iter().fold(0.0_f64, |a, b| a.max(b.abs()))
                    };
                    let (mut lo, mut hi) = (1e-16 * base, 1e-6 * base);
                    let top = probe(hi);
                    if !accepts(&top) {
                        return Err(Error::DesignFailure(format!(
                            "no lift offset up to {hi:e} reaches a residual of {DESIGN_TOLERANCE:e}"
                        )));
                    }
                    let bottom = probe(lo);
                    if accepts(&bottom) {
                        (lo, bottom?)
                    } else {
                        let mut best = top?;
                        for _ in 0..AUTO_ITERATIONS {
                            let mid = (lo * hi).sqrt();
                            let a = probe(mid);
                            if accepts(&a) {
                                hi = mid;
                                best = a?;
                            } else {
                                lo = mid;
                            }
                        }
                        (hi, best)
                    }
                }
            }
        }
    };

    let (c, residual) = chosen.outcome.map_err(|e| match e {
        Error::NonConvergence { report, .. } => Error::DesignFailure(format!(
            "refinement stalled at E_L2 = {:e} for offset {offset:e}; raise the offset",
            report.e_l2
        )),
        other => other,
    })?;
    waterfall.sort_by(|a, b| a.offset.total_cmp(&b.offset));
    Ok(Design {
        c,
        c_approx: chosen.c_approx,
        g_adj: chosen.g_adj,
        lift: LiftReport {
            gamma_psd,
            gamma_final: gamma_psd + offset,
            offset,
            scale: chosen.scale,
            waterfall,
        },
        residual,
    })
}
