use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{attribute_many, AttributionRequest};
use crate::error::{Error, Result};
use crate::rng::{self, Domain};
use crate::shapley::TargetKind;

/// How rows are drawn for each resample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResampleMode {
    /// `n` rows with replacement.
    Bootstrap,
    /// Fewer than `n` rows without replacement.
    Subsample,
}

impl ResampleMode {
    pub fn for_size(rows: usize, size: usize) -> Result<Self> {
        match size {
            s if s < 2 || s > rows => Err(Error::InsufficientRows { size, rows }),
            s if s == rows => Ok(ResampleMode::Bootstrap),
            _ => Ok(ResampleMode::Subsample),
        }
    }
}

/// Per-feature point estimates and 95% resampling bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub target_kind: TargetKind,
    /// Estimate on the full data.
    pub point: Vec<f64>,
    /// `Q_{0.5}` of the resample distribution.
    pub median: Vec<f64>,
    /// `Q_{0.025}`.
    pub lower: Vec<f64>,
    /// `Q_{0.975}`.
    pub upper: Vec<f64>,
    /// `samples[r][v]`: value for feature `v` in resample `r`.
    pub samples: Vec<Vec<f64>>,
    pub resamples: usize,
    pub resample_size: usize,
    pub seed: u64,
    pub mode: ResampleMode,
}

/// Linearly interpolated sample quantile (`h = (m − 1) p`) of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Row indices of resample `r`.
pub fn resample_indices(rows: usize, size: usize, seed: u64, r: usize) -> Result<Vec<usize>> {
    let mut rng = rng::stream(seed, Domain::Resampling, r as u64);
    Ok(match ResampleMode::for_size(rows, size)? {
        ResampleMode::Bootstrap => (0..size).map(|_| rng.random_range(0..rows)).collect(),
        ResampleMode::Subsample => index::sample(&mut rng, rows, size).into_vec(),
    })
}

/// Per series: the full-data value and one value per resample.
pub type SeriesDraws = (Vec<f64>, Vec<Vec<f64>>);

/// Resamples an arbitrary vector-valued statistic of the rows. `statistic`
/// receives row indices and returns one vector per series; each series gets
/// its own summary.
pub fn bootstrap_series<F>(
    rows: usize,
    resamples: usize,
    size: usize,
    seed: u64,
    statistic: F,
) -> Result<Vec<SeriesDraws>>
where
    F: Fn(&[usize]) -> Result<Vec<Vec<f64>>> + Sync,
{
    ResampleMode::for_size(rows, size)?;
    if resamples == 0 {
        return Err(Error::InvalidArgument(
            "at least one resample is required".into(),
        ));
    }
    let all: Vec<usize> = (0..rows).collect();
    let point = statistic(&all)?;
    let draws = (0..resamples)
        .into_par_iter()
        .map(|r| statistic(&resample_indices(rows, size, seed, r)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(point
        .into_iter()
        .enumerate()
        .map(|(s, p)| (p, draws.iter().map(|d| d[s].clone()).collect()))
        .collect())
}

fn summarize(
    target_kind: TargetKind,
    point: Vec<f64>,
    samples: Vec<Vec<f64>>,
    size: usize,
    seed: u64,
    rows: usize,
) -> Result<BootstrapSummary> {
    let d = point.len();
    let mut median = Vec::with_capacity(d);
    let mut lower = Vec::with_capacity(d);
    let mut upper = Vec::with_capacity(d);
    for v in 0..d {
        let mut column: Vec<f64> = samples.iter().map(|s| s[v]).collect();
        column.sort_by(f64::total_cmp);
        median.push(quantile(&column, 0.5));
        lower.push(quantile(&column, 0.025));
        upper.push(quantile(&column, 0.975));
    }
    Ok(BootstrapSummary {
        target_kind,
        point,
        median,
        lower,
        upper,
        resamples: samples.len(),
        samples,
        resample_size: size,
        seed,
        mode: ResampleMode::for_size(rows, size)?,
    })
}

/// Bands for a single statistic.
pub fn bootstrap_statistic<F>(
    rows: usize,
    resamples: usize,
    size: usize,
    seed: u64,
    statistic: F,
) -> Result<BootstrapSummary>
where
    F: Fn(&[usize]) -> Result<Vec<f64>> + Sync,
{
    let (point, samples) =
        bootstrap_series(rows, resamples, size, seed, |idx| Ok(vec![statistic(idx)?]))?.remove(0);
    summarize(TargetKind::Custom, point, samples, size, seed, rows)
}

/// Resampled decomposition for one target kind.
pub fn bootstrap(
    req: &AttributionRequest,
    kind: TargetKind,
    resamples: usize,
    size: usize,
    seed: u64,
) -> Result<BootstrapSummary> {
    Ok(bootstrap_many(req, &[kind], resamples, size, seed)?.remove(0))
}

/// Resampled decompositions for several target kinds; every kind sees the
/// same resampled rows.
pub fn bootstrap_many(
    req: &AttributionRequest,
    kinds: &[TargetKind],
    resamples: usize,
    size: usize,
    seed: u64,
) -> Result<Vec<BootstrapSummary>> {
    req.validate()?;
    for &k in kinds {
        req.target(k)?;
    }
    let rows = req.x.nrows();
    let series = bootstrap_series(rows, resamples, size, seed, |idx| {
        let sub = if idx.len() == rows && idx.iter().enumerate().all(|(i, &r)| i == r) {
            None
        } else {
            Some(req.on_rows(idx)?)
        };
        let decs = attribute_many(sub.as_ref().unwrap_or(req), kinds)?;
        Ok(decs.into_iter().map(|d| d.values).collect())
    })?;
    series
        .into_iter()
        .zip(kinds)
        .map(|((point, samples), &kind)| summarize(kind, point, samples, size, seed, rows))
        .collect()
}
