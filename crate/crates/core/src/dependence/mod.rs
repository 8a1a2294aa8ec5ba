//! Empirical dependence measures usable as Shapley characteristic functions.
//!
//! Each measure maps a target column `y` and a projected feature matrix
//! `X|_S` to a scalar. The empty coalition always scores 0 so that Shapley
//! values add up to the full-coalition score.
//!
//! | measure | value | range |
//! |---------|-------|-------|
//! | [`Measure::R2`] | `1 − |ρ(y, X_S)| / |ρ(X_S)|` | `[0, 1]` |
//! | [`Measure::Dc`] | distance correlation `R̂(y, X_S)` | `[0, 1]` |
//! | [`Measure::Aidc`] | `R̂` after whitening both sides | `[0, 1]` |
//! | [`Measure::Hsic`] | Gaussian-kernel HSIC (normalized by default) | `[0, 1]` normalized, `≥ 0` raw |

mod coalition;
mod correlation;
mod distance;
mod kernel;
pub mod moments;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use coalition::coalition_table;
pub use correlation::{pearson_correlation_matrix, r2_characteristic, SINGULAR_DETERMINANT};
pub use distance::{
    affine_invariant_distance_correlation, affine_whiten, distance_correlation,
    distance_correlation_sq, distance_covariance_sq, double_center, euclidean_distance_matrix,
    sample_covariance,
};
pub use kernel::{
    gaussian_kernel_matrix, hsic, hsic_with_bandwidths, median_heuristic, median_rescale,
    resolve_bandwidth, Bandwidth, HsicScale, MEDIAN_HEURISTIC_ROWS,
};

use crate::data::{DataMatrix, FeatureSubset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    R2,
    Dc,
    Aidc,
    Hsic,
}

impl Measure {
    pub const ALL: [Measure; 4] = [Measure::R2, Measure::Dc, Measure::Aidc, Measure::Hsic];

    pub fn name(self) -> &'static str {
        match self {
            Measure::R2 => "r2",
            Measure::Dc => "dc",
            Measure::Aidc => "aidc",
            Measure::Hsic => "hsic",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown measure `{s}`")))
    }
}

/// A dependence measure together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicSpec {
    pub measure: Measure,
    pub hsic_bandwidth: Bandwidth,
    pub hsic_scale: HsicScale,
    /// Ridge `ε` added to sample covariances before whitening (AIDC only).
    pub aidc_ridge: f64,
}

impl CharacteristicSpec {
    pub fn new(measure: Measure) -> Self {
        Self {
            measure,
            hsic_bandwidth: Bandwidth::MedianPerFeature,
            hsic_scale: HsicScale::Normalized,
            aidc_ridge: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Bandwidth::Fixed(s) = self.hsic_bandwidth {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::NonPositiveBandwidth(s));
            }
        }
        if !(self.aidc_ridge >= 0.0 && self.aidc_ridge.is_finite()) {
            return Err(Error::NegativeRidge(self.aidc_ridge));
        }
        Ok(())
    }
}

impl From<Measure> for CharacteristicSpec {
    fn from(measure: Measure) -> Self {
        Self::new(measure)
    }
}

/// One evaluated coalition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DependenceValue {
    pub value: f64,
    pub measure: Measure,
    pub subset: FeatureSubset,
}

/// Values inside `[lo − slack, hi + slack]` are clamped into `[lo, hi]`;
/// anything further out is reported as an internal inconsistency.
pub(crate) fn clamp_to_range(
    measure: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    slack: f64,
) -> Result<f64> {
    if value.is_nan() || value < lo - slack || value > hi + slack {
        return Err(Error::Inconsistent { measure, value });
    }
    Ok(value.clamp(lo, hi))
}

/// Evaluates the measure between `target` and `x|_S`, with 0 for `S = ∅`.
pub fn evaluate_characteristic(
    spec: &CharacteristicSpec,
    target: &[f64],
    x: &DataMatrix,
    subset: FeatureSubset,
) -> Result<DependenceValue> {
    spec.validate()?;
    if target.len() != x.nrows() {
        return Err(Error::RowCountMismatch {
            left: target.len(),
            right: x.nrows(),
        });
    }
    let value = if subset.is_empty() {
        if subset.universe() != x.ncols() {
            return Err(Error::ShapeMismatch {
                expected: x.ncols(),
                got: subset.universe(),
            });
        }
        0.0
    } else {
        let xs = x.project(subset)?;
        let y = DataMatrix::column_vector(target, "target")?;
        match spec.measure {
            Measure::R2 => r2_characteristic(target, &xs)?,
            Measure::Dc => distance_correlation(&y, &xs)?,
            Measure::Aidc => affine_invariant_distance_correlation(&y, &xs, spec.aidc_ridge)?,
            Measure::Hsic => hsic(&y, &xs, spec.hsic_bandwidth, spec.hsic_scale)?,
        }
    };
    Ok(DependenceValue {
        value,
        measure: spec.measure,
        subset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_names_round_trip() {
        for m in Measure::ALL {
            assert_eq!(m.name().parse::<Measure>().unwrap(), m);
        }
        assert!("pearson".parse::<Measure>().is_err());
    }

    #[test]
    fn empty_coalition_is_zero_for_every_measure() {
        let x = DataMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 1.0], vec![0.0, 5.0]]).unwrap();
        let y = [1.0, 0.0, 2.0];
        for m in Measure::ALL {
            let v = evaluate_characteristic(&m.into(), &y, &x, FeatureSubset::empty(2).unwrap())
                .unwrap();
            assert_eq!(v.value, 0.0);
        }
    }

    #[test]
    fn spec_validation() {
        let mut spec = CharacteristicSpec::new(Measure::Hsic);
        spec.hsic_bandwidth = Bandwidth::Fixed(0.0);
        assert!(spec.validate().is_err());
        let mut spec = CharacteristicSpec::new(Measure::Aidc);
        spec.aidc_ridge = -1e-3;
        assert_eq!(spec.validate().unwrap_err(), Error::NegativeRidge(-1e-3));
    }

    #[test]
    fn clamping_slack() {
        assert_eq!(
            clamp_to_range("x", 1.0 + 1e-10, 0.0, 1.0, 1e-9).unwrap(),
            1.0
        );
        assert!(clamp_to_range("x", 1.1, 0.0, 1.0, 1e-9).is_err());
    }
}
