//! Orchard–Wilson equations: the lagged products of a length-`L` factor `c`
//! must reproduce the causal half of a prototype,
//!
//! ```text
//! e_k = Σ_{n=0}^{L−1−k} c[n]·c[n+k] − g.lag(k),   k = 0..L−1
//! ```
//!
//! `g.lag(k)` is the tap `k` places right of the centre, so the prototype's
//! own `g[M−1−k]` indexing never leaves this module.
//!
//! Residuals are accumulated with error-free products and sums, so they are
//! accurate to about one rounding of the result even when the taps are large
//! and the residual tiny. Newton steps then converge to the root of the
//! stored equations rather than stalling at the summation noise floor.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{FirFilter, LinearPhasePrototype};

/// Residual norm at or below which a factor counts as exact.
pub const FACTORABLE_TOLERANCE: f64 = 1e-12;

/// Damping above which a step is considered impossible.
const MAX_DAMPING: f64 = 1e16;

/// Undamped iterations tried past a rejected Gauss–Newton step.
const LOOKAHEAD_STEPS: usize = 30;

/// One solver iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub lambda: f64,
    #[serde(rename = "E_L2")]
    pub e_l2: f64,
    pub accepted: bool,
}

/// Residual vector, its norm and, after [`refine`], the solver trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub residual: Vec<f64>,
    #[serde(rename = "E_L2")]
    pub e_l2: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceEntry>,
}

impl ResidualReport {
    fn from_residual(residual: Vec<f64>) -> Self {
        let e_l2 = norm(&residual);
        Self {
            residual,
            e_l2,
            iterations: 0,
            converged: e_l2 <= FACTORABLE_TOLERANCE,
            trace: Vec::new(),
        }
    }
}

/// Levenberg–Marquardt settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub step_tolerance: f64,
    pub initial_damping: f64,
    /// One exact-Hessian Newton step after the damped iterations.
    #[serde(default)]
    pub newton_polish: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            gradient_tolerance: 1e-16,
            step_tolerance: 1e-16,
            initial_damping: 1e-3,
            newton_polish: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gradient_tolerance", self.gradient_tolerance),
            ("step_tolerance", self.step_tolerance),
            ("initial_damping", self.initial_damping),
        ];
        if self.max_iterations == 0 {
            return Err(Error::InvalidInput("max_iterations must be positive".into()));
        }
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `Σ x[n]·x[n+k]` as an unevaluated sum `hi + lo`.
fn lag_dot2(x: &[f64], k: usize) -> (f64, f64) {
    let mut hi = 0.0;
    let mut lo = 0.0;
    for n in 0..x.len() - k {
        let p = x[n] * x[n + k];
        let ep = x[n].mul_add(x[n + k], -p);
        let (s, es) = two_sum(hi, p);
        hi = s;
        lo += ep + es;
    }
    two_sum(hi, lo)
}

/// Right-hand side of the Orchard–Wilson equations in double-double form.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Target {
    hi: Vec<f64>,
    lo: Vec<f64>,
}

impl Target {
    fn of_prototype(g: &LinearPhasePrototype) -> Self {
        let hi = g.lags().to_vec();
        let lo = vec![0.0; hi.len()];
        Self { hi, lo }
    }

    /// Exact lag products of `h`, carried beyond double precision.
    pub(crate) fn autocorrelation_of(h: &FirFilter) -> Self {
        let (hi, lo) = (0..h.len()).map(|k| lag_dot2(h.taps(), k)).unzip();
        Self { hi, lo }
    }

    fn len(&self) -> usize {
        self.hi.len()
    }
}

fn residual_vec(c: &[f64], t: &Target) -> Vec<f64> {
    (0..c.len())
        .map(|k| {
            let (hi, lo) = lag_dot2(c, k);
            let (d, ed) = two_sum(hi, -t.hi[k]);
            d + (ed + (lo - t.lo[k]))
        })
        .collect()
}

fn check_len(c: &FirFilter, g: &LinearPhasePrototype) -> Result<()> {
    if c.len() != g.factor_len() {
        return Err(Error::LengthMismatch {
            expected: g.factor_len(),
            actual: c.len(),
        });
    }
    Ok(())
}

/// Residual of `c` against the prototype `g_adj`.
pub fn residual(c: &FirFilter, g_adj: &LinearPhasePrototype) -> Result<ResidualReport> {
    check_len(c, g_adj)?;
    Ok(ResidualReport::from_residual(residual_vec(
        c.taps(),
        &Target::of_prototype(g_adj),
    )))
}

/// `J[k][j] = ∂e_k/∂c_j = c[j+k] + c[j−k]`, out-of-range terms zero.
pub fn jacobian(c: &FirFilter) -> DMatrix<f64> {
    jacobian_of(c.taps())
}

fn jacobian_of(c: &[f64]) -> DMatrix<f64> {
    let m = c.len();
    DMatrix::from_fn(m, m, |k, j| {
        let up = if j + k < m { c[j + k] } else { 0.0 };
        let down = if j >= k { c[j - k] } else { 0.0 };
        up + down
    })
}

/// Least-squares solution of `[J; √λ·I]·δ = [−e; 0]` by Householder QR.
fn damped_step(j: &DMatrix<f64>, e: &[f64], lambda: f64) -> Option<Vec<f64>> {
    let m = j.ncols();
    let rows = if lambda > 0.0 { 2 * m } else { m };
    let mut a = DMatrix::zeros(rows, m);
    a.view_mut((0, 0), (j.nrows(), m)).copy_from(j);
    let mut b = DVector::zeros(rows);
    for (i, &v) in e.iter().enumerate() {
        b[i] = -v;
    }
    if lambda > 0.0 {
        let root = lambda.sqrt();
        for i in 0..m {
            a[(m + i, i)] = root;
        }
    }
    let qr = a.qr();
    let qtb = qr.q().transpose() * b;
    let r = qr.r();
    let x = r.solve_upper_triangular(&qtb.rows(0, m).into_owned())?;
    x.iter().all(|v| v.is_finite()).then(|| x.iter().copied().collect())
}

/// Exact-Hessian Newton step on `½‖e‖²`: `(JᵀJ + Σ e_k·(T_k + T_kᵀ))·δ = −Jᵀe`,
/// where `T_k` has ones on its `k`-th superdiagonal.
fn newton_step(c: &[f64], e: &[f64]) -> Option<Vec<f64>> {
    let m = c.len();
    let j = jacobian_of(c);
    let mut s = j.transpose() * &j;
    for (k, &ek) in e.iter().enumerate() {
        for n in 0..m - k {
            s[(n, n + k)] += ek;
            s[(n + k, n)] += ek;
        }
    }
    let rhs = -(j.transpose() * DVector::from_column_slice(e));
    let x = s.lu().solve(&rhs)?;
    x.iter().all(|v| v.is_finite()).then(|| x.iter().copied().collect())
}

/// Continues undamped Newton from a rejected trial point and returns the
/// first iterate whose residual beats `best`.
///
/// Newton on these equations converges from any minimum-phase start, but
/// often climbs before it descends; damping alone then crawls along a curved
/// valley. Only the improving iterate is returned, so accepted residuals stay
/// monotone.
fn newton_lookahead(mut c: Vec<f64>, mut e: Vec<f64>, best: f64, g_adj: &Target) -> Option<(Vec<f64>, Vec<f64>, f64)> {
    for _ in 0..LOOKAHEAD_STEPS {
        let delta = damped_step(&jacobian_of(&c), &e, 0.0)?;
        c = add(&c, &delta);
        e = residual_vec(&c, g_adj);
        let err = norm(&e);
        if !err.is_finite() {
            return None;
        }
        if err < best {
            return Some((c, e, err));
        }
    }
    None
}

fn add(c: &[f64], d: &[f64]) -> Vec<f64> {
    c.iter().zip(d).map(|(a, b)| a + b).collect()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

/// Refines `c0` towards an exact factor of `g_adj` by damped Gauss–Newton.
///
/// Each iteration first tries the undamped step and keeps it if `E_L2`
/// drops. If not, up to 30 further undamped iterations are tried from the
/// rejected point and the first that beats the current `E_L2` is taken.
/// Failing that it solves `(JᵀJ + λI)δ = −Jᵀe`, dividing `λ` by 10 on
/// acceptance and multiplying by 10 on rejection. Stops on
/// `‖Jᵀe‖∞ < gradient_tolerance`, `‖δ‖∞ < step_tolerance`, an exact zero
/// residual, exhausted damping, or `max_iterations`. The sign of `c0[0]`
/// is preserved.
///
/// Returns [`Error::NonConvergence`] carrying the best taps when the final
/// `E_L2` exceeds [`FACTORABLE_TOLERANCE`].
pub fn refine(c0: &FirFilter, g_adj: &LinearPhasePrototype, cfg: &SolverConfig) -> Result<(FirFilter, ResidualReport)> {
    check_len(c0, g_adj)?;
    refine_target(c0, &Target::of_prototype(g_adj), cfg)
}

/// [`refine`] against an explicit right-hand side.
pub(crate) fn refine_target(c0: &FirFilter, g_adj: &Target, cfg: &SolverConfig) -> Result<(FirFilter, ResidualReport)> {
    if c0.len() != g_adj.len() {
        return Err(Error::LengthMismatch {
            expected: g_adj.len(),
            actual: c0.len(),
        });
    }
    cfg.validate()?;
    let mut c = c0.taps().to_vec();
    let mut e = residual_vec(&c, g_adj);
    let mut err = norm(&e);
    let mut lambda = cfg.initial_damping;
    let mut trace = Vec::new();
    let mut iterations = 0;

    while iterations < cfg.max_iterations && err > 0.0 {
        iterations += 1;
        let j = jacobian_of(&c);
        let grad = j.transpose() * DVector::from_column_slice(&e);
        if grad.amax() < cfg.gradient_tolerance {
            break;
        }

        let mut step = None;
        if let Some(delta) = damped_step(&j, &e, 0.0) {
            let trial = add(&c, &delta);
            let trial_e = residual_vec(&trial, g_adj);
            let trial_err = norm(&trial_e);
            if trial_err < err {
                step = Some((delta, trial, trial_e, trial_err, 0.0));
            } else if let Some((ahead, ahead_e, ahead_err)) = newton_lookahead(trial, trial_e, err, g_adj) {
                let delta = ahead.iter().zip(&c).map(|(a, b)| a - b).collect();
                step = Some((delta, ahead, ahead_e, ahead_err, 0.0));
            }
        }
        while step.is_none() && lambda <= MAX_DAMPING {
            let Some(delta) = damped_step(&j, &e, lambda) else {
                lambda *= 10.0;
                continue;
            };
            let trial = add(&c, &delta);
            let trial_e = residual_vec(&trial, g_adj);
            let trial_err = norm(&trial_e);
            if trial_err < err {
                step = Some((delta, trial, trial_e, trial_err, lambda));
                lambda /= 10.0;
            } else {
                trace.push(TraceEntry {
                    iteration: iterations,
                    lambda,
                    e_l2: trial_err,
                    accepted: false,
                });
                lambda *= 10.0;
            }
        }

        let Some((delta, trial, trial_e, trial_err, used)) = step else {
            break;
        };
        c = trial;
        e = trial_e;
        err = trial_err;
        trace.push(TraceEntry {
            iteration: iterations,
            lambda: used,
            e_l2: err,
            accepted: true,
        });
        if inf_norm(&delta) < cfg.step_tolerance {
            break;
        }
    }

    if cfg.newton_polish && err > 0.0 {
        if let Some(delta) = newton_step(&c, &e) {
            let trial = add(&c, &delta);
            let trial_e = residual_vec(&trial, g_adj);
            let trial_err = norm(&trial_e);
            let accepted = trial_err < err;
            trace.push(TraceEntry {
                iteration: iterations + 1,
                lambda: 0.0,
                e_l2: trial_err,
                accepted,
            });
            if accepted {
                c = trial;
                e = trial_e;
                iterations += 1;
            }
        }
    }

    if (c[0] < 0.0) != (c0.taps()[0] < 0.0) {
        c.iter_mut().for_each(|t| *t = -*t);
    }
    let mut report = ResidualReport::from_residual(e);
    report.iterations = iterations;
    report.trace = trace;
    let taps = FirFilter::new(c)?;
    if report.converged {
        Ok((taps, report))
    } else {
        Err(Error::NonConvergence {
            taps: taps.into_taps(),
            report,
        })
    }
}

/// Factorability test: `E_L2(c, g_adj) ≤ tol` with real taps. Taps are
/// always real here, so only the residual is checked.
pub fn verify_definition(c: &FirFilter, g_adj: &LinearPhasePrototype, tol: f64) -> Result<bool> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    Ok(residual(c, g_adj)?.e_l2 <= tol)
}

/// Writes the trace as JSON lines `{"iteration", "lambda", "E_L2", "accepted"}`.
pub fn write_trace_jsonl<W: Write>(report: &ResidualReport, mut out: W) -> Result<()> {
    for entry in &report.trace {
        serde_json::to_writer(&mut out, entry)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
