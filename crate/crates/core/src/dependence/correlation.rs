//! Pearson correlation and the coefficient of multiple correlation.

use nalgebra::DMatrix;

use super::clamp_to_range;
use super::moments::compensated_sum;
use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// Singular threshold on `|ρ(X_S)|`.
pub const SINGULAR_DETERMINANT: f64 = 1e-12;

/// Empirical Pearson correlation matrix of the columns of `m`.
///
/// Fails with [`Error::ZeroVarianceColumn`] when a column is constant.
pub fn pearson_correlation_matrix(m: &DataMatrix) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let d = m.ncols();
    let columns: Vec<Vec<f64>> = (0..d).map(|j| m.column(j)).collect();
    let centered: Vec<Vec<f64>> = columns
        .iter()
        .map(|c| {
            let mean = compensated_sum(c.iter().copied()) / n as f64;
            c.iter().map(|v| v - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = centered
        .iter()
        .map(|c| compensated_sum(c.iter().map(|v| v * v)).sqrt())
        .collect();
    for (j, &norm) in norms.iter().enumerate() {
        if norm == 0.0 {
            return Err(Error::ZeroVarianceColumn(m.column_names()[j].clone()));
        }
    }
    let mut out = DMatrix::identity(d, d);
    for a in 0..d {
        for b in a + 1..d {
            let dot = compensated_sum(centered[a].iter().zip(&centered[b]).map(|(x, y)| x * y));
            let r = (dot / (norms[a] * norms[b])).clamp(-1.0, 1.0);
            out[(a, b)] = r;
            out[(b, a)] = r;
        }
    }
    Ok(out)
}

/// `R² = 1 − |ρ(y, X_S)| / |ρ(X_S)|` from the correlation matrix `joint` of
/// `(y, X)`, for the features (0-based, excluding the target) in `members`.
pub(crate) fn r2_from_joint(joint: &DMatrix<f64>, members: &[usize]) -> Result<f64> {
    if members.is_empty() {
        return Ok(0.0);
    }
    let k = members.len();
    let features = DMatrix::from_fn(k, k, |a, b| joint[(members[a] + 1, members[b] + 1)]);
    let with_target = DMatrix::from_fn(k + 1, k + 1, |a, b| {
        let ia = if a == 0 { 0 } else { members[a - 1] + 1 };
        let ib = if b == 0 { 0 } else { members[b - 1] + 1 };
        joint[(ia, ib)]
    });
    let denominator = features.determinant();
    if denominator.abs() < SINGULAR_DETERMINANT {
        return Err(Error::SingularCorrelationMatrix(denominator));
    }
    clamp_to_range(
        "R2",
        1.0 - with_target.determinant() / denominator,
        0.0,
        1.0,
        1e-9,
    )
}

/// Coefficient of multiple correlation of `y` on the columns of `xs`.
///
/// An empty `xs` (no columns) is not representable; callers handle `S = ∅`
/// before projecting. A constant `y` carries no linear dependence and yields 0.
pub fn r2_characteristic(y: &[f64], xs: &DataMatrix) -> Result<f64> {
    if y.len() != xs.nrows() {
        return Err(Error::RowCountMismatch {
            left: y.len(),
            right: xs.nrows(),
        });
    }
    if y.iter().all(|&v| v == y[0]) {
        return Ok(0.0);
    }
    let joint = joint_correlation(y, xs)?;
    r2_from_joint(&joint, &(0..xs.ncols()).collect::<Vec<_>>())
}

/// Correlation matrix of `(y, X)` with the target in row/column 0.
pub(crate) fn joint_correlation(y: &[f64], x: &DataMatrix) -> Result<DMatrix<f64>> {
    let mut columns = vec![y.to_vec()];
    columns.extend((0..x.ncols()).map(|j| x.column(j)));
    let mut names = vec!["__target__".to_string()];
    names.extend(x.column_names().iter().cloned());
    pearson_correlation_matrix(&DataMatrix::from_columns(&columns, names)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_columns(a: &[f64], b: &[f64]) -> DataMatrix {
        DataMatrix::from_columns(&[a.to_vec(), b.to_vec()], vec!["a".into(), "b".into()]).unwrap()
    }

    #[test]
    fn identical_and_negated_columns() {
        let a = [1.0, 2.0, 4.0, 7.0];
        let r = pearson_correlation_matrix(&two_columns(&a, &a)).unwrap();
        assert!((r[(0, 1)] - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        let r = pearson_correlation_matrix(&two_columns(&a, &neg)).unwrap();
        assert!((r[(0, 1)] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn fixed_table_matches_covariance_quotient() {
        // x = 1..5, y = (2, 1, 4, 3, 5): means 3 and 3,
        // Σ dx·dy = 4 + 0 + 0 + 0 + 4 = 8, Σ dx² = Σ dy² = 10, so r = 0.8
        let r = pearson_correlation_matrix(&two_columns(
            &[1.0, 2.0, 3.0, 4.0, 5.0],
            &[2.0, 1.0, 4.0, 3.0, 5.0],
        ))
        .unwrap();
        assert!((r[(0, 1)] - 0.8).abs() < 1e-15);
        assert_eq!(r[(0, 0)], 1.0);
    }

    #[test]
    fn constant_column_is_rejected() {
        let err = pearson_correlation_matrix(&two_columns(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]))
            .unwrap_err();
        assert_eq!(err, Error::ZeroVarianceColumn("b".into()));
    }

    #[test]
    fn perfect_fit_gives_one() {
        let x = DataMatrix::column_vector(&[0.5, 1.0, -2.0, 3.0], "x").unwrap();
        let r2 = r2_characteristic(&[0.5, 1.0, -2.0, 3.0], &x).unwrap();
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collinear_features_are_singular() {
        let x = two_columns(&[1.0, 2.0, 3.0, 4.0], &[2.0, 4.0, 6.0, 8.0]);
        let err = r2_characteristic(&[1.0, 0.0, 1.0, 3.0], &x).unwrap_err();
        assert!(matches!(err, Error::SingularCorrelationMatrix(_)));
    }

    #[test]
    fn six_by_two_matches_determinant_oracle() {
        let x1 = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let x2 = [2.0, 1.0, 0.0, 1.0, 3.0, 2.0];
        let y = [1.5, 2.0, 2.5, 4.5, 6.0, 6.5];
        let xs = two_columns(&x1, &x2);
        // oracle: correlations by hand-rolled formula, 3×3 and 2×2 determinants expanded explicitly
        let cor = |a: &[f64], b: &[f64]| {
            let ma = a.iter().sum::<f64>() / 6.0;
            let mb = b.iter().sum::<f64>() / 6.0;
            let sab: f64 = a.iter().zip(b).map(|(p, q)| (p - ma) * (q - mb)).sum();
            let saa: f64 = a.iter().map(|p| (p - ma).powi(2)).sum();
            let sbb: f64 = b.iter().map(|q| (q - mb).powi(2)).sum();
            sab / (saa * sbb).sqrt()
        };
        let (ry1, ry2, r12) = (cor(&y, &x1), cor(&y, &x2), cor(&x1, &x2));
        let det3 = 1.0 + 2.0 * ry1 * ry2 * r12 - ry1 * ry1 - ry2 * ry2 - r12 * r12;
        let det2 = 1.0 - r12 * r12;
        let oracle = 1.0 - det3 / det2;
        let got = r2_characteristic(&y, &xs).unwrap();
        assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
    }
}
