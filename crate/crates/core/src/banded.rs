//! Symmetric banded storage, banded Cholesky and smallest-eigenvalue
//! bisection.
//!
//! A symmetric matrix of dimension `n` and bandwidth `w` is stored by rows of
//! its upper band: `band[i·(w+1) + k] = A[i, i+k]` for `k = 0..=w`. Entries
//! that would fall past the last column are kept as zero.

use nalgebra::DMatrix;

/// Symmetric matrix with `A[i, j] = 0` whenever `|i − j| > bandwidth`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBand {
    dim: usize,
    bandwidth: usize,
    band: Vec<f64>,
}

impl SymBand {
    /// Symmetric Toeplitz band: `A[i, i+k] = diagonals[k]`.
    pub fn toeplitz(dim: usize, diagonals: &[f64]) -> Self {
        let bandwidth = diagonals.len().saturating_sub(1);
        let stride = bandwidth + 1;
        let mut band = vec![0.0; dim * stride];
        for i in 0..dim {
            for (k, &d) in diagonals.iter().enumerate() {
                if i + k < dim {
                    band[i * stride + k] = d;
                }
            }
        }
        Self { dim, bandwidth, band }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// `A[i, j]`, zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        if j - i > self.bandwidth {
            0.0
        } else {
            self.band[i * (self.bandwidth + 1) + j - i]
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    /// Gershgorin interval containing every eigenvalue.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.dim {
            let first = i.saturating_sub(self.bandwidth);
            let last = (i + self.bandwidth).min(self.dim - 1);
            let radius: f64 = (first..=last).filter(|&j| j != i).map(|j| self.get(i, j).abs()).sum();
            let d = self.get(i, i);
            lo = lo.min(d - radius);
            hi = hi.max(d + radius);
        }
        (lo, hi)
    }

    /// Upper banded Cholesky factor `U` with `UᵀU = A`, computed row by row.
    ///
    /// On failure returns the index and value of the first non-positive pivot.
    pub fn cholesky(&self) -> Result<UpperBand, (usize, f64)> {
        let w = self.bandwidth;
        let stride = w + 1;
        let n = self.dim;
        let mut u = vec![0.0; n * stride];
        for i in 0..n {
            for k in 0..stride {
                let j = i + k;
                if j >= n {
                    break;
                }
                let mut s = self.band[i * stride + k];
                for l in j.saturating_sub(w)..i {
                    s -= u[l * stride + (i - l)] * u[l * stride + (j - l)];
                }
                if k == 0 {
                    if s.is_nan() || s <= 0.0 {
                        return Err((i, s));
                    }
                    u[i * stride] = s.sqrt();
                } else {
                    u[i * stride + k] = s / u[i * stride];
                }
            }
        }
        Ok(UpperBand {
            dim: n,
            bandwidth: w,
            band: u,
        })
    }

    /// Whether `A − σI` is positive definite, by attempting its Cholesky
    /// factorization.
    pub fn is_positive_definite_shifted(&self, sigma: f64) -> bool {
        let mut shifted = self.clone();
        let stride = self.bandwidth + 1;
        for i in 0..self.dim {
            shifted.band[i * stride] -= sigma;
        }
        shifted.cholesky().is_ok()
    }

    /// Smallest eigenvalue by bisection on definiteness of `A − σI`, to
    /// absolute width `tol`.
    pub fn min_eigenvalue(&self, tol: f64) -> f64 {
        if self.dim == 0 {
            return f64::NAN;
        }
        let (mut lo, mut hi) = self.gershgorin();
        let pad = f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
        lo -= pad;
        hi += pad;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.is_positive_definite_shifted(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Upper-triangular banded matrix, stored like [`SymBand`]: `band[i·(w+1) + k] = U[i, i+k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperBand {
    dim: usize,
    bandwidth: usize,
    band: Vec<f64>,
}

impl UpperBand {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// `U[i, j]`, zero below the diagonal and outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j < i || j - i > self.bandwidth || j >= self.dim {
            0.0
        } else {
            self.band[i * (self.bandwidth + 1) + j - i]
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    /// Solves `U x = b` in place by back substitution.
    pub fn solve_upper(&self, b: &mut [f64]) {
        let stride = self.bandwidth + 1;
        for i in (0..self.dim).rev() {
            let mut s = b[i];
            for k in 1..stride {
                let j = i + k;
                if j >= self.dim {
                    break;
                }
                s -= self.band[i * stride + k] * b[j];
            }
            b[i] = s / self.band[i * stride];
        }
    }

    /// Solves `Uᵀ x = b` in place by forward substitution.
    #[allow(clippy::needless_range_loop)]
    pub fn solve_lower_transpose(&self, b: &mut [f64]) {
        let w = self.bandwidth;
        let stride = w + 1;
        for i in 0..self.dim {
            let mut s = b[i];
            for l in i.saturating_sub(w)..i {
                s -= self.band[l * stride + (i - l)] * b[l];
            }
            b[i] = s / self.band[i * stride];
        }
    }
}

#[cfg(test)]
mod test {
    use super::*;

    #[test]
    fn storage_round_trip() {
        let a = SymBand::toeplitz(4, &[2.0, -1.0]);
        let d = a.to_dense();
        assert_eq!(d[(0, 0)], 2.0);
        assert_eq!(d[(2, 1)], -1.0);
        assert_eq!(d[(0, 2)], 0.0);
        assert_eq!(d, d.transpose());
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = SymBand::toeplitz(30, &[4.0, 1.0, 0.5]);
        let u = a.cholesky().unwrap().to_dense();
        let diff = (u.transpose() * &u - a.to_dense()).abs().max();
        assert!(diff < 1e-14, "{diff}");
    }

    #[test]
    fn cholesky_reports_pivot() {
        let a = SymBand::toeplitz(3, &[1.0, 2.0]);
        let (pivot, value) = a.cholesky().unwrap_err();
        assert_eq!(pivot, 1);
        assert!(value < 0.0);
    }

    #[test]
    fn triangular_solves() {
        let a = SymBand::toeplitz(12, &[3.0, 1.0, 0.25]);
        let u = a.cholesky().unwrap();
        let b: Vec<f64> = (0..12).map(|i| i as f64 - 5.5).collect();
        let mut x = b.clone();
        u.solve_upper(&mut x);
        let back = u.to_dense() * nalgebra::DVector::from_vec(x);
        assert!(back.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-13));
        let mut y = b.clone();
        u.solve_lower_transpose(&mut y);
        let back = u.to_dense().transpose() * nalgebra::DVector::from_vec(y);
        assert!(back.iter().zip(&b).all(|(p, q)| (p - q).abs() < 1e-13));
    }

    #[test]
    fn definiteness_matches_dense_spectrum() {
        let a = SymBand::toeplitz(40, &[0.2, 0.5, -0.3, 0.1]);
        let mut eig: Vec<f64> = a.to_dense().symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        for sigma in [-2.0, -1.6, -1.5, -0.3, 0.0, 2.0] {
            assert_eq!(a.is_positive_definite_shifted(sigma), sigma < eig[0], "sigma {sigma}");
        }
        assert!((a.min_eigenvalue(1e-13) - eig[0]).abs() < 1e-12);
    }

    #[test]
    fn tridiagonal_closed_form() {
        let n = 25;
        let a = SymBand::toeplitz(n, &[1.25, 0.5]);
        let exact = 1.25 + (std::f64::consts::PI * n as f64 / (n + 1) as f64).cos();
        assert!((a.min_eigenvalue(1e-14) - exact).abs() < 1e-13);
    }
}
