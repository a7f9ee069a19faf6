//! Banded Toeplitz Gramian of a linear-phase prototype, its Cholesky factor,
//! minimum-phase extraction at the symmetry point, and the all-pass matrix
//! `F = (Cᵀ)⁻¹Hᵀ`.
//!
//! With `D = 2Q + M` and bandwidth `m = (M−1)/2`, the factor `C` is upper
//! triangular and `CᵀC = G + γI`. Far from the edges its rows settle into a
//! fixed stencil, so column `j* = Q + m` read upward from the diagonal is a
//! time-invariant filter: `c_approx[k] = C[j*−k, j*]`.
//!
//! Worked example, `g = [3, 10, 3]` (autocorrelation of `[3, 1]`), `Q = 1`,
//! `D = 5`, `j* = 2`:
//!
//! ```text
//!       | 3.1623 0.9487 0      0      0      |
//!       | 0      3.0166 0.9945 0      0      |
//!   C = | 0      0      3.0018 0.9994 0      |    column 2, upward: [3.0018, 0.9945]
//!       | 0      0      0      3.0002 0.9999 |
//!       | 0      0      0      0      3.0000 |
//! ```
//!
//! The diagonal falls from `√10` towards 3 and the superdiagonal climbs
//! towards 1; the symmetry-point column converges to `[3, 1]` as `Q` grows.

use nalgebra::DMatrix;

use crate::banded::{SymBand, UpperBand};
use crate::error::{Error, Result};
use crate::signal::{autocorrelation, FirFilter, LinearPhasePrototype};

/// Absolute width of the final bisection bracket in [`GramianSystem::min_eigenvalue`].
const EIGEN_TOLERANCE: f64 = 1e-13;

/// The lifted Gramian `G + γI` of a prototype, padded by `Q` on each side.
#[derive(Debug, Clone, PartialEq)]
pub struct GramianSystem {
    prototype: LinearPhasePrototype,
    padding: usize,
    lift: f64,
}

/// Builds the `(2Q + M)`-dimensional Gramian of `g` lifted by `gamma`.
pub fn build_gramian(g: &LinearPhasePrototype, padding: usize, gamma: f64) -> Result<GramianSystem> {
    if padding < 1 {
        return Err(Error::InvalidInput("padding Q must be at least 1".into()));
    }
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "lift must be finite and nonnegative, got {gamma}"
        )));
    }
    Ok(GramianSystem {
        prototype: g.clone(),
        padding,
        lift: gamma,
    })
}

impl GramianSystem {
    pub fn prototype(&self) -> &LinearPhasePrototype {
        &self.prototype
    }

    pub fn padding(&self) -> usize {
        self.padding
    }

    pub fn lift(&self) -> f64 {
        self.lift
    }

    pub fn dim(&self) -> usize {
        2 * self.padding + self.prototype.len()
    }

    pub fn bandwidth(&self) -> usize {
        self.prototype.center()
    }

    /// Diagonals `[g[m] + γ, g[m+1], …, g[2m]]`.
    pub fn diagonals(&self) -> Vec<f64> {
        let mut d = self.prototype.lags().to_vec();
        d[0] += self.lift;
        d
    }

    pub fn band(&self) -> SymBand {
        SymBand::toeplitz(self.dim(), &self.diagonals())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.band().to_dense()
    }

    /// Smallest eigenvalue, by definiteness bisection to about 1e-13.
    pub fn min_eigenvalue(&self) -> f64 {
        self.band().min_eigenvalue(EIGEN_TOLERANCE)
    }

    /// Banded Cholesky factorization.
    pub fn cholesky(&self) -> Result<CholeskyFactor> {
        let upper = self
            .band()
            .cholesky()
            .map_err(|(pivot, value)| Error::NotPositiveDefinite {
                pivot: Some(pivot),
                value,
            })?;
        Ok(CholeskyFactor {
            upper,
            padding: self.padding,
        })
    }
}

/// Upper-triangular banded `C` with `CᵀC = G + γI`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    upper: UpperBand,
    padding: usize,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.upper.dim()
    }

    pub fn bandwidth(&self) -> usize {
        self.upper.bandwidth()
    }

    pub fn padding(&self) -> usize {
        self.padding
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper.get(i, j)
    }

    pub fn upper(&self) -> &UpperBand {
        &self.upper
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.upper.to_dense()
    }

    /// Symmetry-point index `j* = Q + len − 1` for a factor of `len` taps.
    pub fn symmetry_point(&self, len: usize) -> usize {
        self.padding + len - 1
    }
}

/// Reads `len` taps upward from the diagonal of column `j* = Q + len − 1`.
pub fn extract_minphase(factor: &CholeskyFactor, len: usize) -> Result<FirFilter> {
    if len == 0 {
        return Err(Error::Empty);
    }
    if factor.padding < len {
        return Err(Error::InvalidInput(format!(
            "padding Q = {} must be at least the factor length {len}",
            factor.padding
        )));
    }
    let j = factor.symmetry_point(len);
    if j >= factor.dim() || len > factor.bandwidth() + 1 {
        return Err(Error::InvalidInput(format!(
            "factor of dimension {} and bandwidth {} cannot hold {len} taps",
            factor.dim(),
            factor.bandwidth()
        )));
    }
    FirFilter::new((0..len).map(|k| factor.get(j - k, j)).collect())
}

/// Dense all-pass matrix `F = (Cᵀ)⁻¹Hᵀ` of a filter `h` of length `M`.
///
/// `G = autocorrelation(h)` has dimension `D = 2Q + 2M − 1`, and `H` is the
/// full `(D + M − 1) × D` convolution matrix with `H[j + M − 1 − n, j] = h[n]`,
/// so `HᵀH = G` exactly and `FFᵀ = I`. Columns of `F` are indexed from
/// `−(M − 1)`: entry `(i, r)` is stored at column `r + M − 1`. Then
/// `F[i, r] = 0` whenever `r > i`, and row `j* = Q + M − 1` read leftward
/// from the diagonal is the anti-causal prefilter `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct AllPassMatrix {
    matrix: DMatrix<f64>,
    filter_len: usize,
    padding: usize,
}

/// Builds `F` for `h` at padding `Q`.
pub fn build_allpass(h: &FirFilter, padding: usize) -> Result<AllPassMatrix> {
    let m = h.len();
    let factor = build_gramian(&autocorrelation(h), padding, 0.0)?.cholesky()?;
    let d = factor.dim();
    let cols = d + m - 1;
    let mut matrix = DMatrix::zeros(d, cols);
    let mut column = vec![0.0; d];
    // column r (stored index) of Hᵀ has h[j + M − 1 − r] in row j
    for r in 0..cols {
        column.iter_mut().for_each(|x| *x = 0.0);
        for (n, &t) in h.taps().iter().enumerate() {
            if let Some(j) = (r + n).checked_sub(m - 1) {
                if j < d {
                    column[j] = t;
                }
            }
        }
        factor.upper().solve_lower_transpose(&mut column);
        matrix.set_column(r, &nalgebra::DVector::from_column_slice(&column));
    }
    Ok(AllPassMatrix {
        matrix,
        filter_len: m,
        padding,
    })
}

impl AllPassMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Stored dense matrix; column `s` holds `F[·, s − (M − 1)]`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn symmetry_point(&self) -> usize {
        self.padding + self.filter_len - 1
    }

    /// `F[i, r]` for `r` in `−(M−1)..D`.
    pub fn get(&self, i: usize, r: isize) -> f64 {
        let s = r + self.filter_len as isize - 1;
        if s < 0 || s as usize >= self.matrix.ncols() {
            0.0
        } else {
            self.matrix[(i, s as usize)]
        }
    }

    /// `F·x` for a vector over the stored columns.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.matrix.ncols() {
            return Err(Error::LengthMismatch {
                expected: self.matrix.ncols(),
                actual: x.len(),
            });
        }
        let v = &self.matrix * nalgebra::DVector::from_column_slice(x);
        Ok(v.iter().copied().collect())
    }

    /// Prefilter taps `f[p] = F[j*, j* − p]` for `p = 0..=j* + M − 1`.
    pub fn prefilter(&self) -> Vec<f64> {
        let j = self.symmetry_point();
        let m = self.filter_len as isize;
        (0..=(j as isize + m - 1))
            .map(|p| self.get(j, j as isize - p))
            .collect()
    }

    /// Largest entry of row `j*` on the causal side (`r > j*`).
    pub fn causal_leakage(&self) -> f64 {
        let j = self.symmetry_point();
        ((j as isize + 1)..(self.dim() as isize))
            .map(|r| self.get(j, r).abs())
            .fold(0.0, f64::max)
    }

    /// `max |FFᵀ − I|`.
    pub fn unitarity_error(&self) -> f64 {
        let gram = &self.matrix * self.matrix.transpose();
        let n = gram.nrows();
        (gram - DMatrix::<f64>::identity(n, n)).abs().max()
    }

    /// CSV rows of the stored matrix, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.matrix.row_iter() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Prefilter `f` for `h` from the symmetry row of `F`, without forming `F`.
///
/// Row `j*` of `(Cᵀ)⁻¹Hᵀ` is `(H·C⁻¹e_{j*})ᵀ`: one banded back substitution
/// and one convolution. Same indexing as [`AllPassMatrix::prefilter`].
pub fn prefilter_taps(h: &FirFilter, factor: &CholeskyFactor) -> Vec<f64> {
    let m = h.len();
    let d = factor.dim();
    let j = factor.symmetry_point(m);
    let mut y = vec![0.0; d];
    y[j] = 1.0;
    factor.upper().solve_upper(&mut y);
    // (H y)[s] over stored column index s: Σ_n h[n]·y[s + n − (M − 1)]
    let row = |s: usize| -> f64 {
        h.taps()
            .iter()
            .enumerate()
            .filter_map(|(n, &t)| (s + n).checked_sub(m - 1).filter(|&c| c < d).map(|c| t * y[c]))
            .sum()
    };
    // f[p] sits at r = j* − p, stored column j* − p + M − 1
    (0..j + m).map(|p| row(j + m - 1 - p)).collect()
}
