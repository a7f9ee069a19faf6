//! Minimum-phase FIR filters by time-domain factorization.
//!
//! A linear-phase prototype `g` is the autocorrelation of a minimum-phase
//! filter `c` exactly when its zero-phase amplitude is nonnegative. This
//! crate builds the banded Toeplitz Gramian of `g`, factors it by Cholesky,
//! reads an approximate `c` from the symmetry column of the factor, and
//! refines it on the Orchard–Wilson equations by Levenberg–Marquardt.
//!
//! * [`lifting`] designs Chebyshev minimum-phase filters from equiripple
//!   prototypes, lifting the centre tap just past the most negative ripple.
//! * [`transform`] converts any FIR to its minimum-phase equivalent and
//!   exposes the anti-causal all-pass prefilter.
//!
//! ```
//! use minphase::{transform, FirFilter};
//!
//! let h = FirFilter::new(vec![1.0, 3.0]).unwrap();
//! let r = transform(&h, 20).unwrap();
//! assert!((r.c.taps()[0] - 3.0).abs() < 1e-12);
//! assert!((r.c.taps()[1] - 1.0).abs() < 1e-12);
//! ```

pub mod banded;
mod error;
pub mod fixtures;
pub mod gramian;
pub mod lifting;
pub mod orchard_wilson;
pub mod signal;
pub mod taps;
pub mod transform;

pub use error::{Error, Result};
pub use gramian::{build_allpass, build_gramian, extract_minphase, AllPassMatrix, CholeskyFactor, GramianSystem};
pub use lifting::{
    convert_ripples, design_minphase, measure_gamma_psd, waterfall_sweep, Design, DesignOptions, DesignSpec,
    LiftReport, LinearPhaseRipples, Offset, Scaling, WaterfallPoint,
};
pub use orchard_wilson::{jacobian, refine, residual, verify_definition, ResidualReport, SolverConfig};
pub use signal::{
    amplitude_response, autocorrelation, convolve, energy_concentration, frequency_response_magnitude, zeros,
    FirFilter, FrequencyGrid, LinearPhasePrototype,
};
pub use transform::{mmse_transform, spectral_equality_check, transform, MmseConfig, TransformResult};
