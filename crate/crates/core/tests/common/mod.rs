#![allow(dead_code)]

use minphase::fixtures::{table2_g, TABLE2_GAMMA_PSD, TABLE2_OFFSET};
use minphase::LinearPhasePrototype;

/// Optimal 13-tap minimum-phase factor of the lifted 25-tap prototype.
pub const TABLE3_C: [f64; 13] = [
    0.051115654818476,
    0.200710190492617,
    0.373675662335455,
    0.383763292854902,
    0.168110995957186,
    -0.081211240469989,
    -0.139792118109026,
    -0.028413408959431,
    0.060844647358445,
    0.040660368538867,
    -0.011537810825624,
    -0.023042542956496,
    -0.006536978978309,
];

/// Cholesky seed for the same design at Q = 10·25.
pub const TABLE3_C_APPROX: [f64; 13] = [
    0.053170658603589,
    0.206160489181734,
    0.378228787870903,
    0.380981033331147,
    0.159498759291175,
    -0.086362886469131,
    -0.137267954224048,
    -0.024127759326649,
    0.061160436307306,
    0.038606283413641,
    -0.012290539783330,
    -0.022479612134730,
    -0.006283513281458,
];

/// Published residual norm of the optimal factor.
pub const TABLE4_E_L2: f64 = 2.84549e-17;

/// The 25-tap prototype lifted by the published `γ_psd + 1.16e-13`, unscaled.
pub fn table2_lifted() -> LinearPhasePrototype {
    table2_g().lifted(TABLE2_GAMMA_PSD + TABLE2_OFFSET)
}

/// Least-squares scale `s` with `autocorrelation(TABLE3_C) ≈ s·g_aug`.
pub fn table3_scale() -> f64 {
    let g = table2_lifted();
    let a = lags(&TABLE3_C);
    let num: f64 = a.iter().zip(g.lags()).map(|(x, y)| x * y).sum();
    let den: f64 = g.lags().iter().map(|y| y * y).sum();
    num / den
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Independent lag-product oracle `Σ c[n]·c[n+k]`.
pub fn lags(c: &[f64]) -> Vec<f64> {
    (0..c.len())
        .map(|k| c.iter().zip(&c[k..]).map(|(a, b)| a * b).sum())
        .collect()
}
