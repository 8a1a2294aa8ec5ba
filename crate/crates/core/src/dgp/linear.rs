use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// Which regressors a linear model uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModelSpec {
    /// Feature columns entering linearly (may be empty: intercept only).
    pub columns: Vec<usize>,
    /// Columns whose product enters as one extra regressor.
    pub interaction: Option<Vec<usize>>,
    /// Per-observation ridge penalty `κ`; the fit minimizes
    /// `‖y − β₀ − Zβ‖² + κ n ‖β‖²` with the intercept unpenalized.
    pub ridge: f64,
}

impl LinearModelSpec {
    pub fn all_columns(x: &DataMatrix) -> Self {
        Self {
            columns: (0..x.ncols()).collect(),
            interaction: None,
            ridge: 0.0,
        }
    }
}

/// A fitted `E y = β₀ + β·x (+ γ Π x_k)` model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModelFit {
    pub spec: LinearModelSpec,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub interaction_coefficient: Option<f64>,
}

fn design_row(spec: &LinearModelSpec, row: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.extend(spec.columns.iter().map(|&j| row[j]));
    if let Some(cols) = &spec.interaction {
        out.push(cols.iter().map(|&j| row[j]).product());
    }
}

impl LinearModelFit {
    /// Least squares via a QR factorization of the centered design (augmented
    /// with `√(κn) I` when ridged).
    pub fn fit(x: &DataMatrix, y: &[f64], spec: LinearModelSpec) -> Result<Self> {
        let n = x.nrows();
        if y.len() != n {
            return Err(Error::RowCountMismatch {
                left: n,
                right: y.len(),
            });
        }
        let cols = x.ncols();
        let referenced = spec.columns.iter().chain(spec.interaction.iter().flatten());
        if let Some(&bad) = referenced.clone().find(|&&j| j >= cols) {
            return Err(Error::PlayerOutOfRange {
                player: bad,
                players: cols,
            });
        }
        if !(spec.ridge >= 0.0 && spec.ridge.is_finite()) {
            return Err(Error::NegativeRidge(spec.ridge));
        }
        let y_mean = y.iter().sum::<f64>() / n as f64;
        let mut buf = Vec::new();
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                design_row(&spec, x.row(i), &mut buf);
                buf.clone()
            })
            .collect();
        let p = rows.first().map_or(0, Vec::len);
        if p == 0 {
            return Ok(Self {
                spec,
                intercept: y_mean,
                coefficients: Vec::new(),
                interaction_coefficient: None,
            });
        }
        let means: Vec<f64> = (0..p)
            .map(|k| rows.iter().map(|r| r[k]).sum::<f64>() / n as f64)
            .collect();
        let extra = if spec.ridge > 0.0 { p } else { 0 };
        if n + extra < p + 1 {
            return Err(Error::RankDeficientDesign);
        }
        let shrink = (spec.ridge * n as f64).sqrt();
        let design = DMatrix::from_fn(n + extra, p, |i, k| {
            if i < n {
                rows[i][k] - means[k]
            } else if i - n == k {
                shrink
            } else {
                0.0
            }
        });
        let response = DVector::from_fn(n + extra, |i, _| if i < n { y[i] - y_mean } else { 0.0 });

        let qr = design.qr();
        let r = qr.r();
        let scale = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 || r.diagonal().iter().any(|v| v.abs() <= 1e-10 * scale) {
            return Err(Error::RankDeficientDesign);
        }
        let rhs = qr.q().transpose() * response;
        let beta = r
            .solve_upper_triangular(&rhs)
            .ok_or(Error::RankDeficientDesign)?;
        let intercept = y_mean - beta.iter().zip(&means).map(|(b, m)| b * m).sum::<f64>();
        let linear = spec.columns.len();
        Ok(Self {
            intercept,
            coefficients: beta.iter().take(linear).copied().collect(),
            interaction_coefficient: spec.interaction.as_ref().map(|_| beta[linear]),
            spec,
        })
    }

    pub fn predict(&self, x: &DataMatrix) -> Result<Vec<f64>> {
        let needed = self
            .spec
            .columns
            .iter()
            .chain(self.spec.interaction.iter().flatten())
            .max()
            .map_or(0, |m| m + 1);
        if x.ncols() < needed {
            return Err(Error::ShapeMismatch {
                expected: needed,
                got: x.ncols(),
            });
        }
        let mut buf = Vec::new();
        Ok((0..x.nrows())
            .map(|i| {
                design_row(&self.spec, x.row(i), &mut buf);
                let mut v = self.intercept;
                for (k, z) in buf.iter().enumerate() {
                    v += z * if k < self.coefficients.len() {
                        self.coefficients[k]
                    } else {
                        self.interaction_coefficient.unwrap_or(0.0)
                    };
                }
                v
            })
            .collect())
    }

    pub fn residuals(&self, x: &DataMatrix, y: &[f64]) -> Result<Vec<f64>> {
        Ok(self.predict(x)?.iter().zip(y).map(|(p, v)| v - p).collect())
    }
}

/// Ordinary least squares on every column of `x`; with `include_three_way`
/// the product of columns 3, 4 and 5 (1-based) is added as a regressor.
pub fn ols_fit(x: &DataMatrix, y: &[f64], include_three_way: bool) -> Result<LinearModelFit> {
    let mut spec = LinearModelSpec::all_columns(x);
    if include_three_way {
        spec.interaction = Some(vec![2, 3, 4]);
    }
    LinearModelFit::fit(x, y, spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_linear_data_interpolates() {
        let x = DataMatrix::from_rows(&[
            vec![1.0, 0.0],
            vec![2.0, 1.0],
            vec![0.5, -1.0],
            vec![3.0, 2.0],
            vec![-1.0, 0.5],
        ])
        .unwrap();
        let y: Vec<f64> = (0..5)
            .map(|i| 0.5 + 2.0 * x.get(i, 0) - 3.0 * x.get(i, 1))
            .collect();
        let fit = ols_fit(&x, &y, false).unwrap();
        let resid = fit.residuals(&x, &y).unwrap();
        assert!(resid.iter().map(|e| e * e).sum::<f64>().sqrt() < 1e-8);
        assert!((fit.intercept - 0.5).abs() < 1e-10);
    }

    #[test]
    fn intercept_only_predicts_mean() {
        let x = DataMatrix::from_rows(&[vec![1.0], vec![2.0], vec![4.0]]).unwrap();
        let spec = LinearModelSpec {
            columns: vec![],
            interaction: None,
            ridge: 0.0,
        };
        let fit = LinearModelFit::fit(&x, &[1.0, 2.0, 6.0], spec).unwrap();
        assert_eq!(fit.predict(&x).unwrap(), vec![3.0; 3]);
    }

    #[test]
    fn three_points_closed_form() {
        let xs = [1.0, 2.0, 4.0];
        let ys = [1.0, 3.0, 4.0];
        let x = DataMatrix::from_rows(&xs.iter().map(|&v| vec![v]).collect::<Vec<_>>()).unwrap();
        let fit = ols_fit(&x, &ys, false).unwrap();
        let (mx, my) = (7.0 / 3.0, 8.0 / 3.0);
        let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = xs.iter().map(|a| (a - mx).powi(2)).sum();
        let slope = sxy / sxx;
        assert!((fit.coefficients[0] - slope).abs() < 1e-12);
        assert!((fit.intercept - (my - slope * mx)).abs() < 1e-12);
    }

    #[test]
    fn collinear_design_is_rank_deficient() {
        let x = DataMatrix::from_rows(&[
            vec![1.0, 2.0],
            vec![2.0, 4.0],
            vec![3.0, 6.0],
            vec![4.0, 8.0],
        ])
        .unwrap();
        assert_eq!(
            ols_fit(&x, &[1.0, 2.0, 2.0, 5.0], false).unwrap_err(),
            Error::RankDeficientDesign
        );
        let constant = DataMatrix::from_rows(&[vec![1.0], vec![1.0], vec![1.0]]).unwrap();
        assert_eq!(
            ols_fit(&constant, &[1.0, 2.0, 3.0], false).unwrap_err(),
            Error::RankDeficientDesign
        );
    }

    #[test]
    fn ridge_shrinks_toward_zero() {
        let x = DataMatrix::from_rows(&[vec![-1.0], vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let y = [-2.0, 0.0, 2.0, 4.0];
        let spec = |ridge| LinearModelSpec {
            columns: vec![0],
            interaction: None,
            ridge,
        };
        let plain = LinearModelFit::fit(&x, &y, spec(0.0)).unwrap();
        let ridged = LinearModelFit::fit(&x, &y, spec(1.0)).unwrap();
        // centered Σx² = 5, so the slope shrinks by 5 / (5 + κn) = 5/9
        assert!((plain.coefficients[0] - 2.0).abs() < 1e-12);
        assert!((ridged.coefficients[0] - 2.0 * 5.0 / 9.0).abs() < 1e-12);
    }
}
