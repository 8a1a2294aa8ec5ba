use serde::{Deserialize, Serialize};

use super::BootstrapSummary;
use crate::error::{Error, Result};
use crate::shapley::ShapleyDecomposition;

/// `φ_v / Σ_u φ_u`.
pub fn normalize(dec: &ShapleyDecomposition) -> Result<Vec<f64>> {
    let total = dec.total();
    if total == 0.0 || !total.is_finite() {
        return Err(Error::ZeroTotal);
    }
    Ok(dec.values.iter().map(|v| v / total).collect())
}

/// Per-feature gaps between two decompositions of the same players.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionDiff {
    /// `|φ_v(a) − φ_v(b)|`.
    pub differences: Vec<f64>,
    pub delta: f64,
    /// Features with a difference of at least `delta`.
    pub flagged: Vec<usize>,
}

pub fn compare(
    a: &ShapleyDecomposition,
    b: &ShapleyDecomposition,
    delta: f64,
) -> Result<DecompositionDiff> {
    if a.players() != b.players() {
        return Err(Error::ShapeMismatch {
            expected: a.players(),
            got: b.players(),
        });
    }
    if a.measure.map(|m| m.measure) != b.measure.map(|m| m.measure) {
        return Err(Error::InvalidArgument(
            "decompositions use different measures".into(),
        ));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be non-negative, got {delta}"
        )));
    }
    let differences: Vec<f64> = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .collect();
    let flagged = differences
        .iter()
        .enumerate()
        .filter(|(_, &d)| d >= delta)
        .map(|(v, _)| v)
        .collect();
    Ok(DecompositionDiff {
        differences,
        delta,
        flagged,
    })
}

/// Whether `[lower, upper]` of feature `v` in `a` meets that of feature `w`
/// in `b`.
pub fn bands_overlap(a: &BootstrapSummary, v: usize, b: &BootstrapSummary, w: usize) -> bool {
    a.lower[v] <= b.upper[w] && b.lower[w] <= a.upper[v]
}

/// Per feature: true when the two bands do not overlap.
pub fn significant_differences(a: &BootstrapSummary, b: &BootstrapSummary) -> Result<Vec<bool>> {
    if a.point.len() != b.point.len() {
        return Err(Error::ShapeMismatch {
            expected: a.point.len(),
            got: b.point.len(),
        });
    }
    Ok((0..a.point.len())
        .map(|v| !bands_overlap(a, v, b, v))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attribution::ResampleMode;
    use crate::dependence::Measure;
    use crate::shapley::{Method, TargetKind};

    fn dec(values: Vec<f64>) -> ShapleyDecomposition {
        let mut d = ShapleyDecomposition::new(values, Method::Exact, 0, 0);
        d.measure = Some(Measure::Dc.into());
        d
    }

    fn band(lower: Vec<f64>, upper: Vec<f64>) -> BootstrapSummary {
        BootstrapSummary {
            target_kind: TargetKind::Labels,
            point: lower.clone(),
            median: lower.clone(),
            lower,
            upper,
            samples: vec![],
            resamples: 0,
            resample_size: 2,
            seed: 0,
            mode: ResampleMode::Bootstrap,
        }
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize(&dec(vec![0.265, 0.265])).unwrap(), vec![0.5, 0.5]);
        assert_eq!(normalize(&dec(vec![1.0, 3.0])).unwrap(), vec![0.25, 0.75]);
        assert_eq!(
            normalize(&dec(vec![1.0, -1.0])).unwrap_err(),
            Error::ZeroTotal
        );
    }

    #[test]
    fn comparison_flags() {
        let a = dec(vec![0.1, 0.5, 0.3]);
        let same = compare(&a, &a, 0.0).unwrap();
        assert_eq!(same.differences, vec![0.0; 3]);
        let diff = compare(&a, &dec(vec![0.1, 0.2, 0.35]), 0.1).unwrap();
        assert_eq!(diff.flagged, vec![1]);
        assert!(compare(&a, &dec(vec![0.1]), 0.1).is_err());
    }

    #[test]
    fn overlap() {
        let a = band(vec![0.0, 0.0], vec![1.0, 1.0]);
        let b = band(vec![1.0, 1.5], vec![2.0, 2.0]);
        assert_eq!(significant_differences(&a, &b).unwrap(), vec![false, true]);
    }
}
