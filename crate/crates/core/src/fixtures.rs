//! Shipped prototypes and seeded random filters.

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::signal::{from_zeros, zeros, FirFilter, LinearPhasePrototype};
use crate::taps::parse_taps;

/// Text of `fixtures/table1_g.txt`.
pub const TABLE1_G: &str = include_str!("../fixtures/table1_g.txt");
/// Text of `fixtures/table2_g.txt`.
pub const TABLE2_G: &str = include_str!("../fixtures/table2_g.txt");

/// `γ` that lifts the 5-tap prototype to positive semi-definite.
pub const TABLE1_GAMMA: f64 = 0.00120505352635236;
/// `γ_psd` of the 25-tap prototype.
pub const TABLE2_GAMMA_PSD: f64 = 5.832240436431935e-6;
/// Lift offset above `γ_psd` used for the 25-tap design.
pub const TABLE2_OFFSET: f64 = 1.16e-13;

/// Distance from the unit circle below which a random draw is rejected.
const CIRCLE_MARGIN: f64 = 1e-3;

/// The 5-tap equiripple prototype.
pub fn table1_g() -> LinearPhasePrototype {
    parse_taps(TABLE1_G)
        .and_then(|f| f.into_prototype())
        .expect("bundled fixture parses")
}

/// The 25-tap equiripple prototype.
pub fn table2_g() -> LinearPhasePrototype {
    parse_taps(TABLE2_G)
        .and_then(|f| f.into_prototype())
        .expect("bundled fixture parses")
}

/// Uniform taps in `[−1, 1]`, redrawn until no zero lies within 1e-3 of the
/// unit circle. Deterministic in `seed`.
pub fn random_fir(seed: u64, len: usize) -> FirFilter {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let taps: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let Ok(h) = FirFilter::new(taps) else { continue };
        match zeros(&h) {
            Ok(z) if z.iter().all(|z| (z.norm() - 1.0).abs() >= CIRCLE_MARGIN) => return h,
            _ => continue,
        }
    }
}

/// The 10-tap random filter used for transform comparisons.
pub fn rand10_seed42() -> FirFilter {
    random_fir(42, 10)
}

/// Random minimum-phase filter of `len` taps with every zero inside radius
/// `max_radius`, built from conjugate pairs and real zeros. Leading tap in
/// `[0.5, 2]`.
pub fn random_minphase<R: Rng>(rng: &mut R, len: usize, max_radius: f64) -> FirFilter {
    let mut roots = Vec::with_capacity(len.saturating_sub(1));
    while roots.len() + 1 < len {
        if roots.len() + 2 < len && rng.random_bool(0.5) {
            let r = max_radius * rng.random::<f64>().sqrt();
            let theta = rng.random_range(0.0..std::f64::consts::PI);
            let z = Complex::from_polar(r, theta);
            roots.push(z);
            roots.push(z.conj());
        } else {
            roots.push(Complex::new(rng.random_range(-max_radius..=max_radius), 0.0));
        }
    }
    from_zeros(rng.random_range(0.5..=2.0), &roots)
}
