//! Gaussian-kernel Hilbert–Schmidt independence criterion.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::clamp_to_range;
use super::moments::{squared_distance, CenteredMoments, MomentAccumulator};
use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// At most this many rows (evenly strided) feed the median heuristic.
pub const MEDIAN_HEURISTIC_ROWS: usize = 1000;

/// How the Gaussian kernel bandwidth `σ` is chosen for each argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bandwidth {
    /// `σ = m / √2` with `m` the median nonzero pairwise distance, so the
    /// kernel is `exp(−‖w − w'‖² / m²)`.
    MedianHeuristic,
    /// Each column is divided by its own median nonzero absolute pairwise
    /// difference `mⱼ`, giving the product kernel `exp(−Σⱼ (wⱼ − w'ⱼ)² / mⱼ²)`.
    /// Agrees with [`Bandwidth::MedianHeuristic`] on a single column.
    MedianPerFeature,
    Fixed(f64),
}

/// Raw biased estimate or the estimate normalized by the two self-HSIC terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HsicScale {
    Raw,
    Normalized,
}

/// `exp(−‖wᵢ − wⱼ‖² / (2σ²))` for all row pairs.
pub fn gaussian_kernel_matrix(w: &DataMatrix, sigma: f64) -> Result<DMatrix<f64>> {
    check_sigma(sigma)?;
    let n = w.nrows();
    let gamma = 1.0 / (2.0 * sigma * sigma);
    let mut k = DMatrix::identity(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = (-gamma * squared_distance(w.row(i), w.row(j))).exp();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveBandwidth(sigma))
    }
}

/// Row indices used by the median heuristic: all rows when `n` is small,
/// otherwise an even stride of [`MEDIAN_HEURISTIC_ROWS`] rows.
pub(crate) fn heuristic_rows(n: usize) -> Vec<usize> {
    if n <= MEDIAN_HEURISTIC_ROWS {
        (0..n).collect()
    } else {
        (0..MEDIAN_HEURISTIC_ROWS)
            .map(|k| k * n / MEDIAN_HEURISTIC_ROWS)
            .collect()
    }
}

/// Median of the nonzero values, consuming the buffer.
pub(crate) fn median_nonzero(mut values: Vec<f64>) -> Result<f64> {
    values.retain(|&v| v > 0.0);
    if values.is_empty() {
        return Err(Error::DegenerateBandwidth);
    }
    let mid = values.len() / 2;
    let (_, &mut upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    if values.len() % 2 == 1 {
        return Ok(upper);
    }
    let lower = values[..mid]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(0.5 * (lower + upper))
}

/// Median-heuristic bandwidth of `w`.
pub fn median_heuristic(w: &DataMatrix) -> Result<f64> {
    let rows = heuristic_rows(w.nrows());
    let mut dists = Vec::with_capacity(rows.len() * (rows.len() - 1) / 2);
    for (a, &i) in rows.iter().enumerate() {
        for &j in &rows[a + 1..] {
            dists.push(squared_distance(w.row(i), w.row(j)).sqrt());
        }
    }
    Ok(median_nonzero(dists)? / std::f64::consts::SQRT_2)
}

/// Divides each column by its median nonzero absolute pairwise difference.
/// Constant columns are left as they are.
pub fn median_rescale(w: &DataMatrix) -> Result<DataMatrix> {
    let rows = heuristic_rows(w.nrows());
    let mut scaled = Vec::with_capacity(w.ncols());
    for j in 0..w.ncols() {
        let column = w.column(j);
        let mut dists = Vec::with_capacity(rows.len() * (rows.len() - 1) / 2);
        for (a, &i) in rows.iter().enumerate() {
            dists.extend(rows[a + 1..].iter().map(|&k| (column[i] - column[k]).abs()));
        }
        let m = match median_nonzero(dists) {
            Ok(m) => m,
            Err(Error::DegenerateBandwidth) => 1.0,
            Err(e) => return Err(e),
        };
        scaled.push(column.iter().map(|v| v / m).collect());
    }
    DataMatrix::from_columns(&scaled, w.column_names().to_vec())
}

/// Bandwidth of `w` under `rule`. Per-feature scaling has no single `σ` for
/// several columns; use [`median_rescale`] and `σ = 1/√2` instead.
pub fn resolve_bandwidth(w: &DataMatrix, rule: Bandwidth) -> Result<f64> {
    match rule {
        Bandwidth::MedianHeuristic => median_heuristic(w),
        Bandwidth::MedianPerFeature if w.ncols() == 1 => median_heuristic(w),
        Bandwidth::MedianPerFeature => Err(Error::InvalidArgument(
            "per-feature bandwidths have no single σ for several columns".into(),
        )),
        Bandwidth::Fixed(s) => {
            check_sigma(s)?;
            Ok(s)
        }
    }
}

/// The data the kernel is applied to, and its bandwidth.
pub(crate) fn prepare(w: &DataMatrix, rule: Bandwidth) -> Result<(DataMatrix, f64)> {
    match rule {
        Bandwidth::MedianPerFeature => Ok((median_rescale(w)?, std::f64::consts::FRAC_1_SQRT_2)),
        _ => Ok((w.clone(), resolve_bandwidth(w, rule)?)),
    }
}

pub(crate) fn kernel_moments(
    y: &DataMatrix,
    x: &DataMatrix,
    sigma_y: f64,
    sigma_x: f64,
) -> Result<CenteredMoments> {
    if y.nrows() != x.nrows() {
        return Err(Error::RowCountMismatch {
            left: y.nrows(),
            right: x.nrows(),
        });
    }
    check_sigma(sigma_y)?;
    check_sigma(sigma_x)?;
    let n = y.nrows();
    let gy = 1.0 / (2.0 * sigma_y * sigma_y);
    let gx = 1.0 / (2.0 * sigma_x * sigma_x);
    let mut acc = MomentAccumulator::new(n, 1.0, 1.0);
    for i in 0..n {
        let (yi, xi) = (y.row(i), x.row(i));
        acc.push_row(
            i,
            (i + 1..n).map(|j| {
                (
                    (-gy * squared_distance(yi, y.row(j))).exp(),
                    (-gx * squared_distance(xi, x.row(j))).exp(),
                )
            }),
        );
    }
    Ok(acc.finish())
}

pub(crate) fn hsic_from_moments(m: CenteredMoments, n: usize, scale: HsicScale) -> Result<f64> {
    match scale {
        HsicScale::Raw => {
            let v = m.cross / (n as f64 * n as f64);
            let bound = (m.left * m.right).sqrt() / (n as f64 * n as f64);
            clamp_to_range("HSIC", v, 0.0, bound.max(0.0), 1e-12)
        }
        HsicScale::Normalized => {
            let denom = m.left * m.right;
            if denom <= 0.0 {
                return Ok(0.0);
            }
            clamp_to_range("normalized HSIC", m.cross / denom.sqrt(), 0.0, 1.0, 1e-9)
        }
    }
}

/// Biased empirical HSIC, `(1/n²) tr(K H L H)`, with explicit bandwidths.
pub fn hsic_with_bandwidths(
    y: &DataMatrix,
    x: &DataMatrix,
    sigma_y: f64,
    sigma_x: f64,
) -> Result<f64> {
    hsic_from_moments(
        kernel_moments(y, x, sigma_y, sigma_x)?,
        y.nrows(),
        HsicScale::Raw,
    )
}

/// HSIC between `y` and `x` with bandwidths chosen by `rule` independently for
/// each side. A constant argument yields 0.
pub fn hsic(y: &DataMatrix, x: &DataMatrix, rule: Bandwidth, scale: HsicScale) -> Result<f64> {
    if y.nrows() != x.nrows() {
        return Err(Error::RowCountMismatch {
            left: y.nrows(),
            right: x.nrows(),
        });
    }
    if y.is_constant() || x.is_constant() {
        return Ok(0.0);
    }
    let (y, sy) = prepare(y, rule)?;
    let (x, sx) = prepare(x, rule)?;
    hsic_from_moments(kernel_moments(&y, &x, sy, sx)?, y.nrows(), scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> DataMatrix {
        DataMatrix::column_vector(v, "w").unwrap()
    }

    #[test]
    fn kernel_of_identical_rows_is_all_ones() {
        let k = gaussian_kernel_matrix(&col(&[2.0, 2.0, 2.0]), 0.7).unwrap();
        assert!(k.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn kernel_at_sqrt_two_sigma() {
        let sigma = 0.8;
        let k = gaussian_kernel_matrix(&col(&[0.0, sigma * 2f64.sqrt()]), sigma).unwrap();
        assert!((k[(0, 1)] - (-1.0f64).exp()).abs() < 1e-15);
        let wide = gaussian_kernel_matrix(&col(&[0.0, 5.0]), 1e9).unwrap();
        assert!((wide[(0, 1)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bandwidth_must_be_positive() {
        assert_eq!(
            gaussian_kernel_matrix(&col(&[0.0, 1.0]), 0.0).unwrap_err(),
            Error::NonPositiveBandwidth(0.0)
        );
        assert!(resolve_bandwidth(&col(&[0.0, 1.0]), Bandwidth::Fixed(-1.0)).is_err());
    }

    #[test]
    fn median_ignores_zero_distances() {
        // two zero distances, four distances of 1
        let w = col(&[0.0, 0.0, 1.0, 1.0]);
        assert!((median_heuristic(&w).unwrap() - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(median_nonzero(vec![0.0, 3.0, 1.0, 2.0, 4.0]).unwrap(), 2.5);
        assert_eq!(
            median_nonzero(vec![0.0, 0.0]).unwrap_err(),
            Error::DegenerateBandwidth
        );
    }

    #[test]
    fn constant_feature_gives_zero() {
        let y = col(&[0.1, 0.5, 0.9, 0.2]);
        let x = col(&[3.0; 4]);
        assert_eq!(
            hsic(&y, &x, Bandwidth::MedianHeuristic, HsicScale::Raw).unwrap(),
            0.0
        );
        assert_eq!(hsic_with_bandwidths(&y, &x, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn per_feature_scaling() {
        let w = DataMatrix::from_rows(&[
            vec![0.0, 5.0, 1.0],
            vec![2.0, 5.0, 4.0],
            vec![4.0, 5.0, 7.0],
        ])
        .unwrap();
        let r = median_rescale(&w).unwrap();
        // medians of |differences|: {2,2,4} -> 2, constant -> kept, {3,3,6} -> 3
        assert_eq!(r.column(0), vec![0.0, 1.0, 2.0]);
        assert_eq!(r.column(1), vec![5.0; 3]);
        assert_eq!(r.column(2), vec![1.0 / 3.0, 4.0 / 3.0, 7.0 / 3.0]);
        let y = col(&[0.2, 0.9, 0.1]);
        let x = col(&[1.0, 3.0, 2.5]);
        let joint = hsic(&y, &x, Bandwidth::MedianHeuristic, HsicScale::Normalized).unwrap();
        let per = hsic(&y, &x, Bandwidth::MedianPerFeature, HsicScale::Normalized).unwrap();
        assert!((joint - per).abs() < 1e-14);
    }

    #[test]
    fn three_point_triple_sum() {
        let y = col(&[0.0, 1.0, 3.0]);
        let x = col(&[1.0, 0.5, -1.0]);
        let k = gaussian_kernel_matrix(&x, 1.0).unwrap();
        let l = gaussian_kernel_matrix(&y, 1.0).unwrap();
        let n = 3.0f64;
        let mut t1 = 0.0;
        let mut t2 = 0.0;
        let mut t3 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                t1 += k[(i, j)] * l[(i, j)];
                for q in 0..3 {
                    t3 += k[(i, j)] * l[(i, q)];
                    for r in 0..3 {
                        t2 += k[(i, j)] * l[(q, r)];
                    }
                }
            }
        }
        let oracle = t1 / n.powi(2) + t2 / n.powi(4) - 2.0 * t3 / n.powi(3);
        let got = hsic_with_bandwidths(&y, &x, 1.0, 1.0).unwrap();
        assert!(
            (got - oracle).abs() < 1e-15 * oracle.abs().max(1.0) * 10.0,
            "{got} vs {oracle}"
        );
    }
}
