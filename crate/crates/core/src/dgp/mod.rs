//! Seeded simulators for the synthetic experiments, plus a least-squares
//! fitter for the misspecification and drift diagnostics.
//!
//! Normal distributions are parameterized by variance: `N(0, 4)` has standard
//! deviation 2. Column `j` (1-based) of every generator draws from random
//! stream `j` and noise draws from stream 0, so a column's values depend only
//! on `(seed, n)` and not on the other parameters. Two drift samples with the
//! same seed share their features and differ only in the response.

mod linear;

use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

pub use linear::{ols_fit, LinearModelFit, LinearModelSpec};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// Total width of the full drift design.
pub const DRIFT_FEATURES: usize = 50;

/// One simulated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgpSample {
    pub name: String,
    pub x: DataMatrix,
    pub y: Vec<f64>,
    /// Time index for the drift process.
    pub t: Option<u32>,
    pub seed: u64,
    /// Additive noise, when the process has any.
    pub noise: Option<Vec<f64>>,
}

fn column<D: Distribution<f64>>(seed: u64, stream: u64, n: usize, dist: D) -> Vec<f64> {
    let mut rng = rng::stream(seed, Domain::Simulation, stream);
    (0..n).map(|_| dist.sample(&mut rng)).collect()
}

fn bernoulli_column(seed: u64, stream: u64, n: usize) -> Vec<f64> {
    let coin = Bernoulli::new(0.5).expect("valid probability");
    let mut rng = rng::stream(seed, Domain::Simulation, stream);
    (0..n)
        .map(|_| if rng.sample(coin) { 1.0 } else { 0.0 })
        .collect()
}

fn normal(variance: f64) -> Normal<f64> {
    Normal::new(0.0, variance.sqrt()).expect("finite variance")
}

fn names(d: usize) -> Vec<String> {
    (1..=d).map(|j| format!("x{j}")).collect()
}

/// `Xⱼ ~ U[−1, 1]` independently, `y = Σ aⱼ Xⱼ²`.
pub fn gen_quadratic(n: usize, coefficients: &[f64], seed: u64) -> Result<DgpSample> {
    if coefficients.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one coefficient is required".into(),
        ));
    }
    let uniform = Uniform::new_inclusive(-1.0, 1.0).expect("valid range");
    let columns: Vec<Vec<f64>> = (0..coefficients.len())
        .map(|j| column(seed, j as u64 + 1, n, uniform))
        .collect();
    let y = (0..n)
        .map(|i| {
            coefficients
                .iter()
                .zip(&columns)
                .map(|(a, c)| a * c[i] * c[i])
                .sum()
        })
        .collect();
    Ok(DgpSample {
        name: "quadratic".into(),
        x: DataMatrix::from_columns(&columns, names(coefficients.len()))?,
        y,
        t: None,
        seed,
        noise: None,
    })
}

/// `X₁, X₂ ~ Bernoulli(1/2)`, `y = X₁(1 − X₂) + X₂(1 − X₁)`.
pub fn gen_xor(n: usize, seed: u64) -> Result<DgpSample> {
    let x1 = bernoulli_column(seed, 1, n);
    let x2 = bernoulli_column(seed, 2, n);
    let y = x1
        .iter()
        .zip(&x2)
        .map(|(a, b)| a * (1.0 - b) + b * (1.0 - a))
        .collect();
    Ok(DgpSample {
        name: "xor".into(),
        x: DataMatrix::from_columns(&[x1, x2], names(2))?,
        y,
        t: None,
        seed,
        noise: None,
    })
}

/// Coefficients of the drift response at time `t`.
pub fn drift_coefficients(t: u32, width: usize) -> Vec<f64> {
    let shift = t as f64 / 10.0;
    let mut c = vec![1.0, 1.0, 1.0 + shift, 1.0 - shift];
    c.resize(width, 1.0);
    c
}

/// Drifting linear process. `X₁..X₄ ~ N(0, 4)`; with `full_width`,
/// `X₅..X₅₀ ~ N(0, 0.05)` join the design, otherwise they are absent. The
/// response `X₁ + X₂ + (1 + t/10)X₃ + (1 − t/10)X₄ + Σ_{i≥5} Xᵢ` is noiseless.
pub fn gen_drift(n: usize, t: u32, seed: u64, full_width: bool) -> Result<DgpSample> {
    let width = if full_width { DRIFT_FEATURES } else { 4 };
    let columns: Vec<Vec<f64>> = (0..width)
        .map(|j| {
            let variance = if j < 4 { 4.0 } else { 0.05 };
            column(seed, j as u64 + 1, n, normal(variance))
        })
        .collect();
    let coefficients = drift_coefficients(t, width);
    let y = (0..n)
        .map(|i| {
            coefficients
                .iter()
                .zip(&columns)
                .map(|(a, c)| a * c[i])
                .sum()
        })
        .collect();
    Ok(DgpSample {
        name: "drift".into(),
        x: DataMatrix::from_columns(&columns, names(width))?,
        y,
        t: Some(t),
        seed,
        noise: None,
    })
}

/// `y = X₁ + X₂ + 5X₃X₄X₅ + ε` with `X₁..X₃ ~ N(0, 1)`,
/// `X₄, X₅ ~ Bernoulli(1/2)` and `ε ~ N(0, 0.1)`.
pub fn gen_interaction(n: usize, seed: u64) -> Result<DgpSample> {
    let mut columns: Vec<Vec<f64>> = (0..3)
        .map(|j| column(seed, j + 1, n, normal(1.0)))
        .collect();
    columns.push(bernoulli_column(seed, 4, n));
    columns.push(bernoulli_column(seed, 5, n));
    let noise = column(seed, 0, n, normal(0.1));
    let y = (0..n)
        .map(|i| {
            columns[0][i]
                + columns[1][i]
                + 5.0 * columns[2][i] * columns[3][i] * columns[4][i]
                + noise[i]
        })
        .collect();
    Ok(DgpSample {
        name: "interaction".into(),
        x: DataMatrix::from_columns(&columns, names(5))?,
        y,
        t: None,
        seed,
        noise: Some(noise),
    })
}
