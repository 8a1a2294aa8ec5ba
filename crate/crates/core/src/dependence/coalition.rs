//! All-coalition evaluation.
//!
//! For the distance correlation and the HSIC, every coalition's distance
//! between rows `i` and `j` is a partial sum of the per-feature squared
//! differences, so a single pass over row pairs can serve all `2^d`
//! coalitions and several targets at once. The other measures fall back to
//! one evaluation per coalition.

use super::correlation::{joint_correlation, r2_from_joint};
use super::kernel::{hsic_from_moments, median_heuristic, median_rescale, prepare};
use super::moments::{CenteredMoments, CompensatedSum};
use super::{clamp_to_range, evaluate_characteristic, Bandwidth, CharacteristicSpec, Measure};
use crate::data::{DataMatrix, FeatureSubset};
use crate::error::{Error, Result};

/// Largest `n · 2^d` for which per-coalition row sums are held in memory.
const JOINT_PASS_CELLS: usize = 1 << 23;
const JOINT_PASS_MAX_FEATURES: usize = 16;
const MAX_TABLE_FEATURES: usize = 24;

/// `table[t][mask]` is the characteristic value of target `t` against the
/// columns of `x` selected by `mask` (bit `j` = column `j`). `table[t][0]` is
/// always 0.
pub fn coalition_table(
    spec: &CharacteristicSpec,
    targets: &[&[f64]],
    x: &DataMatrix,
) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let d = x.ncols();
    if d > MAX_TABLE_FEATURES {
        return Err(Error::TooManyPlayers(d));
    }
    for t in targets {
        if t.len() != x.nrows() {
            return Err(Error::RowCountMismatch {
                left: t.len(),
                right: x.nrows(),
            });
        }
    }
    let joint_ok = d <= JOINT_PASS_MAX_FEATURES && x.nrows() << d <= JOINT_PASS_CELLS;
    match spec.measure {
        Measure::Dc if joint_ok => joint_pass(targets, x, Kernel::Distance),
        Measure::Hsic if joint_ok => hsic_joint(spec, targets, x),
        Measure::R2 => targets.iter().map(|t| r2_table(t, x)).collect(),
        _ => targets.iter().map(|t| per_coalition(spec, t, x)).collect(),
    }
}

fn per_coalition(spec: &CharacteristicSpec, target: &[f64], x: &DataMatrix) -> Result<Vec<f64>> {
    let d = x.ncols();
    (0..1u64 << d)
        .map(|mask| {
            Ok(evaluate_characteristic(spec, target, x, FeatureSubset::from_bits(mask, d)?)?.value)
        })
        .collect()
}

fn r2_table(target: &[f64], x: &DataMatrix) -> Result<Vec<f64>> {
    let d = x.ncols();
    if target.iter().all(|&v| v == target[0]) {
        return Ok(vec![0.0; 1 << d]);
    }
    let joint = joint_correlation(target, x)?;
    (0..1u64 << d)
        .map(|mask| {
            let members: Vec<usize> = FeatureSubset::from_bits(mask, d)?.members().collect();
            r2_from_joint(&joint, &members)
        })
        .collect()
}

#[derive(Clone, Copy)]
enum Kernel {
    Distance,
    /// Per-target and per-coalition `1 / (2σ²)`; 0 marks a degenerate side.
    Gaussian,
}

fn hsic_joint(
    spec: &CharacteristicSpec,
    targets: &[&[f64]],
    x: &DataMatrix,
) -> Result<Vec<Vec<f64>>> {
    let d = x.ncols();
    let gamma = |sigma: f64| 1.0 / (2.0 * sigma * sigma);
    let mut kernel_targets = Vec::with_capacity(targets.len());
    let mut target_gamma = Vec::with_capacity(targets.len());
    for t in targets {
        let col = DataMatrix::column_vector(t, "target")?;
        if col.is_constant() {
            kernel_targets.push(t.to_vec());
            target_gamma.push(0.0);
        } else {
            let (w, sigma) = prepare(&col, spec.hsic_bandwidth)?;
            kernel_targets.push(w.column(0));
            target_gamma.push(gamma(sigma));
        }
    }
    let per_feature = matches!(spec.hsic_bandwidth, Bandwidth::MedianPerFeature);
    let kernel_x = if per_feature {
        median_rescale(x)?
    } else {
        x.clone()
    };
    let mut feature_gamma = vec![0.0; 1 << d];
    for mask in 1..1u64 << d {
        let xs = x.project(FeatureSubset::from_bits(mask, d)?)?;
        if !xs.is_constant() {
            feature_gamma[mask as usize] = gamma(match spec.hsic_bandwidth {
                Bandwidth::MedianHeuristic => median_heuristic(&xs)?,
                Bandwidth::MedianPerFeature => std::f64::consts::FRAC_1_SQRT_2,
                Bandwidth::Fixed(s) => s,
            });
        }
    }
    let refs: Vec<&[f64]> = kernel_targets.iter().map(Vec::as_slice).collect();
    let (targets, x) = (&refs[..], &kernel_x);
    let moments = joint_moments(targets, x, Kernel::Gaussian, &target_gamma, &feature_gamma);
    let n = x.nrows();
    moments
        .into_iter()
        .enumerate()
        .map(|(t, row)| {
            row.into_iter()
                .enumerate()
                .map(|(mask, m)| {
                    if mask == 0 || target_gamma[t] == 0.0 || feature_gamma[mask] == 0.0 {
                        Ok(0.0)
                    } else {
                        hsic_from_moments(m, n, spec.hsic_scale)
                    }
                })
                .collect()
        })
        .collect()
}

fn joint_pass(targets: &[&[f64]], x: &DataMatrix, kernel: Kernel) -> Result<Vec<Vec<f64>>> {
    let d = x.ncols();
    let moments = joint_moments(
        targets,
        x,
        kernel,
        &vec![0.0; targets.len()],
        &vec![0.0; 1 << d],
    );
    moments
        .into_iter()
        .map(|row| {
            row.into_iter()
                .enumerate()
                .map(|(mask, m)| {
                    if mask == 0 {
                        return Ok(0.0);
                    }
                    let denom = m.left * m.right;
                    if denom <= 0.0 {
                        return Ok(0.0);
                    }
                    Ok(clamp_to_range(
                        "distance correlation",
                        m.cross / denom.sqrt(),
                        0.0,
                        1.0,
                        1e-9,
                    )?
                    .sqrt())
                })
                .collect()
        })
        .collect()
}

/// Centered moments for every `(target, coalition)` pair. Summation order per
/// cell matches the single-coalition accumulator exactly.
fn joint_moments(
    targets: &[&[f64]],
    x: &DataMatrix,
    kernel: Kernel,
    target_gamma: &[f64],
    feature_gamma: &[f64],
) -> Vec<Vec<CenteredMoments>> {
    let n = x.nrows();
    let d = x.ncols();
    let cells = 1usize << d;
    let nt = targets.len();
    let diag = match kernel {
        Kernel::Distance => 0.0,
        Kernel::Gaussian => 1.0,
    };
    let nf = n as f64;

    let mut row_a = vec![diag; nt * n];
    let mut row_b = vec![diag; n * cells];
    let init = || {
        let mut c = CompensatedSum::default();
        c.add(nf * diag * diag);
        c
    };
    let mut ab = vec![init(); nt * cells];
    let mut aa = vec![init(); nt];
    let mut bb = vec![init(); cells];

    let mut sq = vec![0.0; d];
    let mut d2 = vec![0.0; cells];
    let mut b = vec![0.0; cells];
    let mut a = vec![0.0; nt];
    let mut p_ab = vec![0.0; nt * cells];
    let mut p_aa = vec![0.0; nt];
    let mut p_bb = vec![0.0; cells];
    let mut p_ra = vec![0.0; nt];
    let mut p_rb = vec![0.0; cells];

    for i in 0..n {
        p_ab.iter_mut().for_each(|v| *v = 0.0);
        p_aa.iter_mut().for_each(|v| *v = 0.0);
        p_bb.iter_mut().for_each(|v| *v = 0.0);
        p_ra.iter_mut().for_each(|v| *v = 0.0);
        p_rb.iter_mut().for_each(|v| *v = 0.0);
        let xi = x.row(i);
        for j in i + 1..n {
            let xj = x.row(j);
            for c in 0..d {
                let diff = xi[c] - xj[c];
                sq[c] = diff * diff;
            }
            for mask in 1..cells {
                let top = usize::BITS - 1 - mask.leading_zeros();
                d2[mask] = d2[mask ^ (1 << top)] + sq[top as usize];
            }
            match kernel {
                Kernel::Distance => {
                    for mask in 1..cells {
                        b[mask] = d2[mask].sqrt();
                    }
                    for t in 0..nt {
                        let diff = targets[t][i] - targets[t][j];
                        a[t] = (diff * diff).sqrt();
                    }
                }
                Kernel::Gaussian => {
                    for mask in 1..cells {
                        b[mask] = (-feature_gamma[mask] * d2[mask]).exp();
                    }
                    for t in 0..nt {
                        let diff = targets[t][i] - targets[t][j];
                        a[t] = (-target_gamma[t] * (diff * diff)).exp();
                    }
                }
            }
            let rb_j = &mut row_b[j * cells..(j + 1) * cells];
            for mask in 1..cells {
                let bv = b[mask];
                p_bb[mask] += bv * bv;
                p_rb[mask] += bv;
                rb_j[mask] += bv;
            }
            for t in 0..nt {
                let av = a[t];
                p_aa[t] += av * av;
                p_ra[t] += av;
                row_a[t * n + j] += av;
                let cross = &mut p_ab[t * cells..(t + 1) * cells];
                for mask in 1..cells {
                    cross[mask] += av * b[mask];
                }
            }
        }
        for mask in 1..cells {
            row_b[i * cells + mask] += p_rb[mask];
            bb[mask].add(2.0 * p_bb[mask]);
        }
        for t in 0..nt {
            row_a[t * n + i] += p_ra[t];
            aa[t].add(2.0 * p_aa[t]);
            for mask in 1..cells {
                ab[t * cells + mask].add(2.0 * p_ab[t * cells + mask]);
            }
        }
    }

    // row-sum reductions
    let mut sb = vec![CompensatedSum::default(); cells];
    let mut rb2 = vec![CompensatedSum::default(); cells];
    for i in 0..n {
        for mask in 1..cells {
            let v = row_b[i * cells + mask];
            sb[mask].add(v);
            rb2[mask].add(v * v);
        }
    }
    let center =
        |raw: f64, rows: f64, s1: f64, s2: f64| raw - 2.0 * rows / nf + s1 * s2 / (nf * nf);
    (0..nt)
        .map(|t| {
            let ra = &row_a[t * n..(t + 1) * n];
            let mut sa = CompensatedSum::default();
            let mut ra2 = CompensatedSum::default();
            for &v in ra {
                sa.add(v);
                ra2.add(v * v);
            }
            let sa = sa.value();
            let left = center(aa[t].value(), ra2.value(), sa, sa);
            (0..cells)
                .map(|mask| {
                    if mask == 0 {
                        return CenteredMoments {
                            cross: 0.0,
                            left,
                            right: 0.0,
                        };
                    }
                    let mut rab = CompensatedSum::default();
                    for i in 0..n {
                        rab.add(ra[i] * row_b[i * cells + mask]);
                    }
                    let s_b = sb[mask].value();
                    CenteredMoments {
                        cross: center(ab[t * cells + mask].value(), rab.value(), sa, s_b),
                        left,
                        right: center(bb[mask].value(), rb2[mask].value(), s_b, s_b),
                    }
                })
                .collect()
        })
        .collect()
}
