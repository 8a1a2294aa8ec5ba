//! Energy statistics: distance covariance, distance correlation and the
//! affine-invariant distance correlation.
//!
//! The distance covariance here is the un-normalized double sum
//! `Σᵢⱼ A(Y)ᵢⱼ A(X)ᵢⱼ` over double-centered distance matrices. The usual
//! `1/n²` factor is omitted, so absolute covariance values depend on this
//! convention; the correlation, a ratio of such sums, does not.

use nalgebra::{DMatrix, SymmetricEigen};

use super::clamp_to_range;
use super::moments::{squared_distance, CenteredMoments, MomentAccumulator};
use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// Pairwise Euclidean distance matrix of the rows of `w`.
pub fn euclidean_distance_matrix(w: &DataMatrix) -> DMatrix<f64> {
    let n = w.nrows();
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let d = squared_distance(w.row(i), w.row(j)).sqrt();
            b[(i, j)] = d;
            b[(j, i)] = d;
        }
    }
    b
}

/// Subtracts row means and column means and adds back the grand mean.
///
/// # Panics
///
/// If `b` is not square.
pub fn double_center(b: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(b.is_square(), "double centering needs a square matrix");
    let n = b.nrows();
    if n == 0 {
        return b.clone();
    }
    let nf = n as f64;
    let row_means: Vec<f64> = (0..n).map(|i| b.row(i).sum() / nf).collect();
    let col_means: Vec<f64> = (0..n).map(|j| b.column(j).sum() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    DMatrix::from_fn(n, n, |i, j| b[(i, j)] - row_means[i] - col_means[j] + grand)
}

pub(crate) fn distance_moments(y: &DataMatrix, x: &DataMatrix) -> Result<CenteredMoments> {
    check_rows(y, x)?;
    let n = y.nrows();
    let mut acc = MomentAccumulator::new(n, 0.0, 0.0);
    for i in 0..n {
        let (yi, xi) = (y.row(i), x.row(i));
        acc.push_row(
            i,
            (i + 1..n).map(|j| {
                (
                    squared_distance(yi, y.row(j)).sqrt(),
                    squared_distance(xi, x.row(j)).sqrt(),
                )
            }),
        );
    }
    Ok(acc.finish())
}

/// Empirical squared distance covariance `Σᵢⱼ A(Y)ᵢⱼ A(X)ᵢⱼ`.
///
/// Slightly negative round-off is clamped to zero.
pub fn distance_covariance_sq(y: &DataMatrix, x: &DataMatrix) -> Result<f64> {
    let m = distance_moments(y, x)?;
    let scale = (m.left * m.right).sqrt().max(f64::MIN_POSITIVE);
    Ok(if m.cross < 0.0 && m.cross / scale > -1e-12 {
        0.0
    } else {
        m.cross
    })
}

fn squared_ratio(m: CenteredMoments) -> Result<f64> {
    let denom = m.left * m.right;
    if denom <= 0.0 {
        return Ok(0.0);
    }
    clamp_to_range(
        "distance correlation",
        m.cross / denom.sqrt(),
        0.0,
        1.0,
        1e-9,
    )
}

/// Squared empirical distance correlation
/// `V²(Y,X) / sqrt(V²(Y,Y) V²(X,X))`, or 0 when either marginal distance
/// covariance vanishes.
pub fn distance_correlation_sq(y: &DataMatrix, x: &DataMatrix) -> Result<f64> {
    squared_ratio(distance_moments(y, x)?)
}

/// Empirical distance correlation, the square root of
/// [`distance_correlation_sq`]. This is the value used as the `DC`
/// characteristic function.
pub fn distance_correlation(y: &DataMatrix, x: &DataMatrix) -> Result<f64> {
    Ok(distance_correlation_sq(y, x)?.sqrt())
}

/// Sample covariance (denominator `n − 1`) of the columns of `w`.
pub fn sample_covariance(w: &DataMatrix) -> DMatrix<f64> {
    let n = w.nrows();
    let d = w.ncols();
    let means: Vec<f64> = (0..d)
        .map(|j| (0..n).map(|i| w.get(i, j)).sum::<f64>() / n as f64)
        .collect();
    let mut cov = DMatrix::zeros(d, d);
    for i in 0..n {
        let row = w.row(i);
        for a in 0..d {
            let da = row[a] - means[a];
            for b in a..d {
                cov[(a, b)] += da * (row[b] - means[b]);
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            let v = cov[(a, b)] / (n as f64 - 1.0);
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    cov
}

/// Multiplies `w` on the right by `(S_W + εI)^{-1/2}`, the inverse symmetric
/// square root of its (ridged) sample covariance. Rows are not centered.
pub fn affine_whiten(w: &DataMatrix, ridge: f64) -> Result<DataMatrix> {
    if ridge.is_nan() || ridge < 0.0 {
        return Err(Error::NegativeRidge(ridge));
    }
    let d = w.ncols();
    let eig = SymmetricEigen::new(sample_covariance(w));
    let smallest = eig.eigenvalues.min();
    if smallest + ridge <= 1e-12 {
        return Err(Error::SingularCovariance(smallest));
    }
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / (l + ridge).sqrt()));
    let root = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
    let mut values = Vec::with_capacity(w.nrows() * d);
    for i in 0..w.nrows() {
        let row = w.row(i);
        values.extend((0..d).map(|b| (0..d).map(|a| row[a] * root[(a, b)]).sum::<f64>()));
    }
    DataMatrix::new(values, w.column_names().to_vec())
}

/// Distance correlation of the whitened arguments.
///
/// A target whose rows are all identical yields 0, the same degenerate case
/// as the plain distance correlation.
pub fn affine_invariant_distance_correlation(
    y: &DataMatrix,
    x: &DataMatrix,
    ridge: f64,
) -> Result<f64> {
    check_rows(y, x)?;
    if y.is_constant() || x.is_constant() {
        return Ok(0.0);
    }
    distance_correlation(&affine_whiten(y, ridge)?, &affine_whiten(x, ridge)?)
}

fn check_rows(y: &DataMatrix, x: &DataMatrix) -> Result<()> {
    if y.nrows() != x.nrows() {
        return Err(Error::RowCountMismatch {
            left: y.nrows(),
            right: x.nrows(),
        });
    }
    Ok(())
}
