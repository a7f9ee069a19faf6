//! FIR filter types, convolution, zero-phase amplitude and frequency
//! response evaluation, and minimum-phase diagnostics.
//!
//! Filters are causal: `taps[n]` multiplies the input delayed by `n` samples.
//! A [`LinearPhasePrototype`] is an odd-length symmetric tap vector whose
//! zero-phase amplitude `A(Ω) = g[m] + 2·Σ g[m−k]·cos(kΩ)` is real and may
//! dip below zero in the stopband.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of points on `[0, π]` used for response evaluation.
pub const DEFAULT_GRID: usize = 4096;

/// Largest filter accepted by [`zeros`].
pub const MAX_ROOT_ORDER: usize = 64;

/// Relative tolerance for the symmetry check in [`LinearPhasePrototype::new`].
const SYMMETRY_TOLERANCE: f64 = 1e-15;

fn check_taps(taps: &[f64]) -> Result<()> {
    if taps.is_empty() {
        return Err(Error::Empty);
    }
    if let Some((index, &value)) = taps.iter().enumerate().find(|(_, t)| !t.is_finite()) {
        return Err(Error::NonFinite { index, value });
    }
    Ok(())
}

/// Real tap vector of a causal FIR filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FirFilter {
    taps: Vec<f64>,
}

impl FirFilter {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        check_taps(&taps)?;
        Ok(Self { taps })
    }

    /// The unit impulse `[1]`.
    pub fn identity() -> Self {
        Self { taps: vec![1.0] }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn into_taps(self) -> Vec<f64> {
        self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Time-reversed copy (the maximum-phase mirror of a minimum-phase filter).
    pub fn reversed(&self) -> Self {
        Self {
            taps: self.taps.iter().rev().copied().collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            taps: self.taps.iter().map(|t| t * factor).collect(),
        }
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t * t).sum()
    }
}

impl TryFrom<Vec<f64>> for FirFilter {
    type Error = Error;

    fn try_from(taps: Vec<f64>) -> Result<Self> {
        Self::new(taps)
    }
}

impl From<FirFilter> for Vec<f64> {
    fn from(f: FirFilter) -> Self {
        f.taps
    }
}

/// Odd-length symmetric tap vector `g` with centre index `m = (M−1)/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LinearPhasePrototype {
    taps: Vec<f64>,
}

impl LinearPhasePrototype {
    /// Validates odd length and symmetry (to 1e-15 relative), then
    /// symmetrizes by averaging mirrored taps.
    pub fn new(mut taps: Vec<f64>) -> Result<Self> {
        check_taps(&taps)?;
        let len = taps.len();
        if len.is_multiple_of(2) {
            return Err(Error::EvenLength(len));
        }
        let scale = taps.iter().fold(0.0_f64, |acc, t| acc.max(t.abs()));
        for n in 0..len / 2 {
            let (a, b) = (taps[n], taps[len - 1 - n]);
            let difference = (a - b).abs();
            if difference > SYMMETRY_TOLERANCE * scale {
                return Err(Error::NotSymmetric { index: n, difference });
            }
            let mean = 0.5 * (a + b);
            taps[n] = mean;
            taps[len - 1 - n] = mean;
        }
        Ok(Self { taps })
    }

    /// Builds the prototype from its causal half `[g[m], g[m+1], …, g[2m]]`
    /// (lag 0 first).
    pub fn from_lags(lags: &[f64]) -> Result<Self> {
        check_taps(lags)?;
        let mut taps: Vec<f64> = lags.iter().rev().copied().collect();
        taps.extend_from_slice(&lags[1..]);
        Ok(Self { taps })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Centre index `m`, which is also the bandwidth of the Gramian.
    pub fn center(&self) -> usize {
        (self.taps.len() - 1) / 2
    }

    /// Length `(M+1)/2` of the minimum-phase factor.
    pub fn factor_len(&self) -> usize {
        self.center() + 1
    }

    /// Lag-`k` tap `g[m+k]`; zero beyond the support.
    pub fn lag(&self, k: usize) -> f64 {
        self.taps.get(self.center() + k).copied().unwrap_or(0.0)
    }

    /// Causal half `[g[m], …, g[2m]]`.
    pub fn lags(&self) -> &[f64] {
        &self.taps[self.center()..]
    }

    /// Adds `gamma` to the centre tap.
    pub fn lifted(&self, gamma: f64) -> Self {
        let mut taps = self.taps.clone();
        taps[self.center()] += gamma;
        Self { taps }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            taps: self.taps.iter().map(|t| t * factor).collect(),
        }
    }

    pub fn as_fir(&self) -> FirFilter {
        FirFilter {
            taps: self.taps.clone(),
        }
    }
}

impl TryFrom<Vec<f64>> for LinearPhasePrototype {
    type Error = Error;

    fn try_from(taps: Vec<f64>) -> Result<Self> {
        Self::new(taps)
    }
}

impl From<LinearPhasePrototype> for Vec<f64> {
    fn from(g: LinearPhasePrototype) -> Self {
        g.taps
    }
}

/// Uniform grid of `count` frequencies spanning `[0, π]`, endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    samples: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidInput(format!(
                "frequency grid needs at least 2 points, got {count}"
            )));
        }
        let step = PI / (count - 1) as f64;
        let mut samples: Vec<f64> = (0..count).map(|i| i as f64 * step).collect();
        samples[count - 1] = PI;
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        Self::new(DEFAULT_GRID).expect("default grid is valid")
    }
}

/// Full linear convolution, length `len(a) + len(b) − 1`.
pub fn convolve(a: &FirFilter, b: &FirFilter) -> FirFilter {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.taps.iter().enumerate() {
        for (j, &y) in b.taps.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    FirFilter { taps: out }
}

/// Lag-`k` products `Σ h[n]·h[n+k]` for `k = 0..M`.
pub(crate) fn lag_products(h: &[f64]) -> Vec<f64> {
    (0..h.len())
        .map(|k| {
            let mut s = 0.0;
            for n in 0..h.len() - k {
                s += h[n] * h[n + k];
            }
            s
        })
        .collect()
}

/// Autocorrelation of `h` as a linear-phase prototype of length `2M−1`.
///
/// Uses the same summation order as `convolve(h, h.reversed())`, so the two
/// agree bitwise.
pub fn autocorrelation(h: &FirFilter) -> LinearPhasePrototype {
    let lags = lag_products(&h.taps);
    let mut taps: Vec<f64> = lags.iter().rev().copied().collect();
    taps.extend_from_slice(&lags[1..]);
    LinearPhasePrototype { taps }
}

/// Zero-phase amplitude at a single frequency.
pub fn amplitude_at(g: &LinearPhasePrototype, omega: f64) -> f64 {
    let lags = g.lags();
    let mut a = lags[0];
    for (k, &gk) in lags.iter().enumerate().skip(1) {
        a += 2.0 * gk * (k as f64 * omega).cos();
    }
    a
}

/// First and second derivatives of `A(Ω)`.
fn amplitude_derivatives(g: &LinearPhasePrototype, omega: f64) -> (f64, f64) {
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for (k, &gk) in g.lags().iter().enumerate().skip(1) {
        let kf = k as f64;
        d1 -= 2.0 * gk * kf * (kf * omega).sin();
        d2 -= 2.0 * gk * kf * kf * (kf * omega).cos();
    }
    (d1, d2)
}

/// `A(Ω)` on every grid point.
pub fn amplitude_response(g: &LinearPhasePrototype, grid: &FrequencyGrid) -> Vec<f64> {
    grid.samples.iter().map(|&w| amplitude_at(g, w)).collect()
}

/// `|Σ h[n]·e^{−iΩn}|` on every grid point.
pub fn frequency_response_magnitude(h: &FirFilter, grid: &FrequencyGrid) -> Vec<f64> {
    grid.samples
        .iter()
        .map(|&w| {
            let (mut re, mut im) = (0.0, 0.0);
            for (n, &t) in h.taps.iter().enumerate() {
                let phase = n as f64 * w;
                re += t * phase.cos();
                im -= t * phase.sin();
            }
            re.hypot(im)
        })
        .collect()
}

/// Which extremum of `A(Ω)` to locate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Min,
    Max,
}

/// Location and value of a refined extremum of `A(Ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeExtremum {
    pub omega: f64,
    pub value: f64,
}

/// Global extremum of `A(Ω)` on `[0, π]`.
///
/// Every local extremum of the dense grid is polished by Newton steps on
/// `A'(Ω)` (a local parabola through the exact derivatives), confined to its
/// grid bracket and iterated until `|ΔΩ| < 1e-13`; the best polished value
/// wins. Equiripple stopbands have many near-equal peaks, so polishing only
/// the best grid point is not enough.
pub fn amplitude_extremum(g: &LinearPhasePrototype, grid_count: usize, which: Extremum) -> AmplitudeExtremum {
    let grid = FrequencyGrid::new(grid_count.max(3)).expect("grid count >= 3");
    let w = grid.samples();
    let a = amplitude_response(g, &grid);
    let sign = match which {
        Extremum::Min => 1.0,
        Extremum::Max => -1.0,
    };
    let n = a.len();
    let is_candidate = |i: usize| {
        let here = sign * a[i];
        let left = if i == 0 { f64::INFINITY } else { sign * a[i - 1] };
        let right = if i + 1 == n { f64::INFINITY } else { sign * a[i + 1] };
        here <= left && here <= right
    };

    let mut best = AmplitudeExtremum {
        omega: w[0],
        value: a[0],
    };
    for i in (0..n).filter(|&i| is_candidate(i)) {
        let lo = w[i.saturating_sub(1)];
        let hi = w[(i + 1).min(n - 1)];
        let mut omega = w[i];
        for _ in 0..100 {
            let (d1, d2) = amplitude_derivatives(g, omega);
            if sign * d2 <= 0.0 {
                break;
            }
            let next = (omega - d1 / d2).clamp(lo, hi);
            let step = (next - omega).abs();
            omega = next;
            if step < 1e-13 {
                break;
            }
        }
        let value = amplitude_at(g, omega);
        // polishing never moves away from the grid value
        let (omega, value) = if sign * value <= sign * a[i] {
            (omega, value)
        } else {
            (w[i], a[i])
        };
        if sign * value < sign * best.value {
            best = AmplitudeExtremum { omega, value };
        }
    }
    best
}

/// Roots of `h[0]·z^{M−1} + … + h[M−1]`, the zeros of `H(z)`.
///
/// Computed as eigenvalues of the companion matrix; unordered. A single-tap
/// filter has no zeros.
pub fn zeros(h: &FirFilter) -> Result<Vec<Complex<f64>>> {
    let m = h.len();
    if h.taps.iter().all(|&t| t == 0.0) {
        return Err(Error::InvalidInput("all-zero filter has no defined zeros".into()));
    }
    if m > MAX_ROOT_ORDER {
        return Err(Error::InvalidInput(format!(
            "root finding is limited to {MAX_ROOT_ORDER} taps, got {m}"
        )));
    }
    if h.taps[0] == 0.0 {
        return Err(Error::InvalidInput("leading tap must be nonzero".into()));
    }
    if m == 1 {
        return Ok(Vec::new());
    }
    let order = m - 1;
    let lead = h.taps[0];
    let companion = DMatrix::from_fn(order, order, |i, j| {
        if i == 0 {
            -h.taps[j + 1] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    Ok(companion.complex_eigenvalues().iter().copied().collect())
}

/// Largest zero modulus, the usual minimum-phase diagnostic.
pub fn max_zero_modulus(h: &FirFilter) -> Result<f64> {
    Ok(zeros(h)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Rebuilds monic-scaled polynomial taps `lead·Π(1 − z_j·z^{-1})` from roots.
/// Complex roots must come in conjugate pairs; the imaginary residue is dropped.
pub fn from_zeros(lead: f64, roots: &[Complex<f64>]) -> FirFilter {
    let mut poly = vec![Complex::new(lead, 0.0)];
    for &r in roots {
        let mut next = vec![Complex::new(0.0, 0.0); poly.len() + 1];
        for (i, &p) in poly.iter().enumerate() {
            next[i] += p;
            next[i + 1] -= p * r;
        }
        poly = next;
    }
    FirFilter {
        taps: poly.iter().map(|c| c.re).collect(),
    }
}

/// Prefix energies `P[k] = Σ_{n≤k} h[n]²`.
pub fn energy_concentration(h: &FirFilter) -> Vec<f64> {
    h.taps
        .iter()
        .scan(0.0, |acc, &t| {
            *acc += t * t;
            Some(*acc)
        })
        .collect()
}

#[cfg(test)]
mod test {
    use super::*;

    fn fir(t: &[f64]) -> FirFilter {
        FirFilter::new(t.to_vec()).unwrap()
    }

    #[test]
    fn convolve_examples() {
        assert_eq!(convolve(&fir(&[1.0]), &fir(&[5.0, 2.0])).taps(), &[5.0, 2.0]);
        assert_eq!(convolve(&fir(&[1.0, 0.5]), &fir(&[0.5, 1.0])).taps(), &[0.5, 1.25, 0.5]);
    }

    #[test]
    fn autocorrelation_examples() {
        assert_eq!(autocorrelation(&fir(&[1.0])).taps(), &[1.0]);
        assert_eq!(autocorrelation(&fir(&[1.0, 0.5])).taps(), &[0.5, 1.25, 0.5]);
        assert_eq!(autocorrelation(&fir(&[3.0, 1.0])).taps(), &[3.0, 10.0, 3.0]);
    }

    #[test]
    fn prototype_validation() {
        assert!(matches!(
            LinearPhasePrototype::new(vec![1.0, 2.0]),
            Err(Error::EvenLength(2))
        ));
        assert!(matches!(
            LinearPhasePrototype::new(vec![1.0, 2.0, 1.1]),
            Err(Error::NotSymmetric { .. })
        ));
        assert!(matches!(LinearPhasePrototype::new(vec![]), Err(Error::Empty)));
        assert!(matches!(
            FirFilter::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1, .. })
        ));
        // rounding-level asymmetry is averaged away
        let g = LinearPhasePrototype::new(vec![0.1, 1.0, 0.1 + 1e-17]).unwrap();
        assert_eq!(g.taps()[0], g.taps()[2]);
        assert_eq!(g.lags(), &[1.0, g.taps()[0]]);
    }

    #[test]
    fn from_lags_mirrors() {
        let g = LinearPhasePrototype::from_lags(&[1.25, 0.5]).unwrap();
        assert_eq!(g.taps(), &[0.5, 1.25, 0.5]);
        assert_eq!(g.lag(1), 0.5);
        assert_eq!(g.lag(7), 0.0);
    }

    #[test]
    fn grid_endpoints() {
        let grid = FrequencyGrid::new(5).unwrap();
        assert_eq!(grid.samples()[0], 0.0);
        assert_eq!(grid.samples()[4], PI);
        assert!(grid.samples().windows(2).all(|w| w[0] < w[1]));
        assert!(FrequencyGrid::new(1).is_err());
    }

    #[test]
    fn amplitude_examples() {
        let grid = FrequencyGrid::new(64).unwrap();
        let one = LinearPhasePrototype::new(vec![1.0]).unwrap();
        assert!(amplitude_response(&one, &grid).iter().all(|&a| a == 1.0));
        let g = LinearPhasePrototype::new(vec![0.5, 1.25, 0.5]).unwrap();
        assert!((amplitude_at(&g, 0.0) - 2.25).abs() < 1e-15);
        assert!((amplitude_at(&g, PI) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn magnitude_examples() {
        let grid = FrequencyGrid::new(33).unwrap();
        let mag = frequency_response_magnitude(&FirFilter::identity(), &grid);
        assert!(mag.iter().all(|&m| (m - 1.0).abs() < 1e-15));
        let mag = frequency_response_magnitude(&fir(&[0.5, 0.5]), &grid);
        assert!(mag[32] < 1e-16);
    }

    #[test]
    fn extremum_of_cosine() {
        // A(Ω) = 1 + cos Ω has its minimum 0 at π and maximum 2 at 0
        let g = LinearPhasePrototype::new(vec![0.5, 1.0, 0.5]).unwrap();
        let lo = amplitude_extremum(&g, 16, Extremum::Min);
        assert!(lo.value.abs() < 1e-15 && (lo.omega - PI).abs() < 1e-12);
        let hi = amplitude_extremum(&g, 16, Extremum::Max);
        assert!((hi.value - 2.0).abs() < 1e-15 && hi.omega == 0.0);
    }

    #[test]
    fn extremum_refines_between_grid_points() {
        // A(Ω) = 0.3 + 0.6·cos Ω + 0.5·cos 2Ω: interior minimum at cos Ω = −0.3
        let g = LinearPhasePrototype::new(vec![0.25, 0.3, 0.3, 0.3, 0.25]).unwrap();
        let m = amplitude_extremum(&g, 7, Extremum::Min);
        let w = (-0.3_f64).acos();
        let exact = 0.3 + 0.6 * w.cos() + 0.5 * (2.0 * w).cos();
        assert!((m.omega - w).abs() < 1e-10, "{} vs {}", m.omega, w);
        assert!((m.value - exact).abs() < 1e-15);
    }

    #[test]
    fn zeros_examples() {
        let z = zeros(&fir(&[1.0, -0.5])).unwrap();
        assert_eq!(z.len(), 1);
        assert!((z[0] - Complex::new(0.5, 0.0)).norm() < 1e-15);

        let mut z: Vec<f64> = zeros(&fir(&[1.0, 0.0, -0.25])).unwrap().iter().map(|z| z.re).collect();
        z.sort_by(f64::total_cmp);
        assert!((z[0] + 0.5).abs() < 1e-15 && (z[1] - 0.5).abs() < 1e-15);

        assert!(zeros(&FirFilter::identity()).unwrap().is_empty());
        assert!(zeros(&fir(&[0.0, 0.0])).is_err());
        assert!(zeros(&fir(&[0.0, 1.0])).is_err());
        assert!(zeros(&fir(&vec![1.0; 65])).is_err());
    }

    #[test]
    fn from_zeros_round_trip() {
        let h = fir(&[2.0, -1.0, 0.5, 0.25]);
        let rebuilt = from_zeros(2.0, &zeros(&h).unwrap());
        for (a, b) in rebuilt.taps().iter().zip(h.taps()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn energy_examples() {
        assert_eq!(energy_concentration(&fir(&[1.0, 0.0])), vec![1.0, 1.0]);
        assert_eq!(energy_concentration(&fir(&[3.0, 1.0])), vec![9.0, 10.0]);
    }
}
