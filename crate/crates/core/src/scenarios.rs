//! End-to-end experiment pipelines: simulate, optionally fit a linear model,
//! attribute, resample and check the outcome against fixed thresholds.
//!
//! Every scenario is a pure function of its [`ScenarioConfig`], so reruns
//! with the same seed produce identical reports.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::attribution::{
    bootstrap, bootstrap_many, normalize, AttributionRequest, BootstrapSummary,
};
use crate::data::{DataMatrix, FeatureSubset};
use crate::dependence::{
    evaluate_characteristic, pearson_correlation_matrix, CharacteristicSpec, Measure,
};
use crate::dgp::{self, LinearModelFit, LinearModelSpec};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::shapley::TargetKind;

pub const XOR_ROWS: usize = 10_000;
pub const XOR_DC_SHARE: f64 = 0.265;
pub const XOR_HSIC_SHARE: f64 = 0.16;
pub const XOR_TOLERANCE: f64 = 0.02;
/// Largest acceptable single-feature dependence between independent columns.
pub const PAIRWISE_MAX: f64 = 0.02;

pub const QUADRATIC_COEFFICIENTS: [f64; 5] = [0.0, 2.0, 4.0, 6.0, 8.0];
pub const QUADRATIC_POPULATION: usize = 10_000;
pub const QUADRATIC_SAMPLE: usize = 1_000;
pub const R2_POINT_MAX: f64 = 0.02;
pub const R2_BAND: (f64, f64) = (0.0, 0.05);
pub const FULL_COALITION_MIN: f64 = 0.1;
pub const RANKING_SEEDS: u64 = 20;

pub const DIAGNOSTIC_ROWS: usize = 1_000;
pub const DEFAULT_RESAMPLES: usize = 100;
pub const DRIFT_STEPS: u32 = 10;
/// Ridge penalty per observation for the deployed drift model.
pub const DRIFT_MODEL_RIDGE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Fig1R2,
    Fig2Decompositions,
    Table1Xor,
    Fig3Drift,
    Fig4Misspec,
    Fig5Correct,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Fig1R2,
        Scenario::Fig2Decompositions,
        Scenario::Table1Xor,
        Scenario::Fig3Drift,
        Scenario::Fig4Misspec,
        Scenario::Fig5Correct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig1R2 => "fig1_r2",
            Scenario::Fig2Decompositions => "fig2_decompositions",
            Scenario::Table1Xor => "table1_xor",
            Scenario::Fig3Drift => "fig3_drift",
            Scenario::Fig4Misspec => "fig4_misspec",
            Scenario::Fig5Correct => "fig5_correct",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scenario `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub resamples: usize,
}

impl ScenarioConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            resamples: DEFAULT_RESAMPLES,
        }
    }
}

/// One plotted quantity, in long format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub series: String,
    pub feature: String,
    pub t: Option<u32>,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub config: ScenarioConfig,
    pub records: Vec<Record>,
    pub checks: Vec<Check>,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Value of the first record matching `series`, `feature` and `t`.
    pub fn record(&self, series: &str, feature: &str, t: Option<u32>) -> Option<&Record> {
        self.records
            .iter()
            .find(|r| r.series == series && r.feature == feature && r.t == t)
    }

    fn push_check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
    }

    fn push_value(&mut self, series: &str, feature: &str, t: Option<u32>, value: f64) {
        self.records.push(Record {
            series: series.into(),
            feature: feature.into(),
            t,
            value,
            lower: None,
            upper: None,
        });
    }

    fn push_band(
        &mut self,
        series: &str,
        names: &[String],
        t: Option<u32>,
        band: &BootstrapSummary,
    ) {
        for (v, name) in names.iter().enumerate() {
            self.records.push(Record {
                series: series.into(),
                feature: name.clone(),
                t,
                value: band.point[v],
                lower: Some(band.lower[v]),
                upper: Some(band.upper[v]),
            });
        }
    }
}

pub fn run(scenario: Scenario, config: ScenarioConfig) -> Result<ScenarioReport> {
    if config.resamples == 0 {
        return Err(Error::InvalidArgument(
            "at least one resample is required".into(),
        ));
    }
    let mut report = ScenarioReport {
        scenario,
        config,
        records: Vec::new(),
        checks: Vec::new(),
    };
    match scenario {
        Scenario::Fig1R2 => fig1(&mut report)?,
        Scenario::Fig2Decompositions => fig2(&mut report)?,
        Scenario::Table1Xor => table1(&mut report)?,
        Scenario::Fig3Drift => fig3(&mut report)?,
        Scenario::Fig4Misspec => misspecification(&mut report, false)?,
        Scenario::Fig5Correct => misspecification(&mut report, true)?,
    }
    Ok(report)
}

fn full_coalition(measure: Measure, y: &[f64], x: &DataMatrix) -> Result<f64> {
    Ok(evaluate_characteristic(&measure.into(), y, x, FeatureSubset::full(x.ncols())?)?.value)
}

fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    let m = DataMatrix::from_columns(&[a.to_vec(), b.to_vec()], vec!["a".into(), "b".into()])?;
    Ok(pearson_correlation_matrix(&m)?[(0, 1)])
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        for &k in &order[i..=j] {
            r[k] = (i + j) as f64 / 2.0 + 1.0;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    pearson(&ranks(a), &ranks(b))
}

fn table1(report: &mut ScenarioReport) -> Result<()> {
    let s = dgp::gen_xor(XOR_ROWS, report.config.seed)?;
    let names = s.x.column_names().to_vec();
    for (measure, share) in [
        (Measure::Dc, XOR_DC_SHARE),
        (Measure::Aidc, XOR_DC_SHARE),
        (Measure::Hsic, XOR_HSIC_SHARE),
    ] {
        let req = AttributionRequest::new(s.x.clone(), measure).with_labels(s.y.clone());
        let dec = crate::attribution::adl(&req)?;
        for (v, name) in names.iter().enumerate() {
            report.push_value(&format!("shapley_{measure}"), name, None, dec.values[v]);
        }
        let worst = dec
            .values
            .iter()
            .map(|v| (v - share).abs())
            .fold(0.0, f64::max);
        report.push_check(
            &format!("shapley_{measure}"),
            worst <= XOR_TOLERANCE,
            format!("values {:?}, target {share} ± {XOR_TOLERANCE}", dec.values),
        );
    }
    let mut worst: f64 = 0.0;
    for (v, name) in names.iter().enumerate() {
        let column = s.x.select_columns(&[v])?;
        for measure in [Measure::Dc, Measure::Aidc, Measure::Hsic] {
            let value = full_coalition(measure, &s.y, &column)?;
            report.push_value(&format!("pairwise_{measure}"), name, None, value);
            worst = worst.max(value.abs());
        }
        let r = pearson(&s.y, &s.x.column(v))?;
        report.push_value("pairwise_pearson", name, None, r);
        worst = worst.max(r.abs());
    }
    report.push_check(
        "pairwise_near_zero",
        worst <= PAIRWISE_MAX,
        format!("largest |pairwise| {worst:.5} (limit {PAIRWISE_MAX})"),
    );
    Ok(())
}

fn fig1(report: &mut ScenarioReport) -> Result<()> {
    let seed = report.config.seed;
    let s = dgp::gen_quadratic(QUADRATIC_POPULATION, &QUADRATIC_COEFFICIENTS, seed)?;
    // the single-feature R² is the ADL of a one-player game
    let req = AttributionRequest::new(s.x.clone(), Measure::R2)
        .with_labels(s.y.clone())
        .with_scope(vec![3]);
    let band = bootstrap(
        &req,
        TargetKind::Labels,
        report.config.resamples,
        QUADRATIC_SAMPLE,
        seed,
    )?;
    report.push_band("r2_adl", &req.feature_names(), None, &band);
    let (point, lo, hi) = (band.point[0], band.lower[0], band.upper[0]);
    report.push_check(
        "r2_point_small",
        point <= R2_POINT_MAX,
        format!("R² of x4 = {point:.5} (limit {R2_POINT_MAX})"),
    );
    report.push_check(
        "r2_band_small",
        lo > R2_BAND.0 && hi < R2_BAND.1,
        format!("band ({lo:.5}, {hi:.5}) must lie inside {R2_BAND:?}"),
    );
    let mut lowest = f64::INFINITY;
    for measure in [Measure::Dc, Measure::Aidc, Measure::Hsic] {
        let value = full_coalition(measure, &s.y, &s.x)?;
        report.push_value(&format!("full_{measure}"), "all", None, value);
        lowest = lowest.min(value);
    }
    report.push_check(
        "nonlinear_measures_detect_dependence",
        lowest > FULL_COALITION_MIN,
        format!("smallest full-coalition value {lowest:.4} (must exceed {FULL_COALITION_MIN})"),
    );
    Ok(())
}

fn fig2(report: &mut ScenarioReport) -> Result<()> {
    let measures = [Measure::R2, Measure::Dc, Measure::Aidc, Measure::Hsic];
    let d = QUADRATIC_COEFFICIENTS.len();
    let mut mean_share = vec![vec![0.0; d]; measures.len()];
    let mut mean_rho = vec![0.0; measures.len()];
    let names: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    for k in 0..RANKING_SEEDS {
        let s = dgp::gen_quadratic(
            QUADRATIC_SAMPLE,
            &QUADRATIC_COEFFICIENTS,
            derive_seed(report.config.seed, k),
        )?;
        for (m, &measure) in measures.iter().enumerate() {
            let req = AttributionRequest::new(s.x.clone(), measure).with_labels(s.y.clone());
            let share = normalize(&crate::attribution::adl(&req)?)?;
            for v in 0..d {
                mean_share[m][v] += share[v] / RANKING_SEEDS as f64;
            }
            mean_rho[m] += spearman(&QUADRATIC_COEFFICIENTS, &share)? / RANKING_SEEDS as f64;
        }
    }
    for (m, measure) in measures.iter().enumerate() {
        for (v, name) in names.iter().enumerate() {
            report.push_value(
                &format!("normalized_{measure}"),
                name,
                None,
                mean_share[m][v],
            );
        }
        let rho = spearman(&QUADRATIC_COEFFICIENTS, &mean_share[m])?;
        report.push_value(
            &format!("spearman_{measure}"),
            "mean_decomposition",
            None,
            rho,
        );
        report.push_value(
            &format!("spearman_{measure}"),
            "mean_per_sample",
            None,
            mean_rho[m],
        );
        if *measure != Measure::R2 {
            report.push_check(
                &format!("monotone_{measure}"),
                rho >= 1.0 - 1e-12,
                format!(
                    "Spearman of the {RANKING_SEEDS}-sample mean decomposition = {rho:.4} (per-sample mean {:.4})",
                    mean_rho[m]
                ),
            );
        }
    }
    Ok(())
}

fn separated_above(high: &BootstrapSummary, v: usize, low: &BootstrapSummary, w: usize) -> bool {
    high.lower[v] > low.upper[w]
}

fn fig3(report: &mut ScenarioReport) -> Result<()> {
    let seed = report.config.seed;
    let scope = vec![0, 1, 2, 3];
    let base = dgp::gen_drift(DIAGNOSTIC_ROWS, 0, seed, true)?;
    let model = LinearModelFit::fit(
        &base.x,
        &base.y,
        LinearModelSpec {
            ridge: DRIFT_MODEL_RIDGE,
            ..LinearModelSpec::all_columns(&base.x)
        },
    )?;
    let y_hat = model.predict(&base.x)?;
    let mut adl = Vec::new();
    let mut adr = Vec::new();
    for t in 0..=DRIFT_STEPS {
        let s = dgp::gen_drift(DIAGNOSTIC_ROWS, t, seed, true)?;
        let req = AttributionRequest::new(s.x, Measure::Dc)
            .with_labels(s.y)
            .with_predictions(y_hat.clone())
            .with_scope(scope.clone());
        let names = req.feature_names();
        let mut bands = bootstrap_many(
            &req,
            &[TargetKind::Labels, TargetKind::Residuals],
            report.config.resamples,
            DIAGNOSTIC_ROWS,
            seed,
        )?;
        let r = bands.pop().expect("two bands");
        let l = bands.pop().expect("two bands");
        report.push_band("adl", &names, Some(t), &l);
        report.push_band("adr", &names, Some(t), &r);
        adl.push(l);
        adr.push(r);
    }
    let last = DRIFT_STEPS as usize;
    report.push_check(
        "adl_x3_rises",
        separated_above(&adl[last], 2, &adl[0], 2),
        format!(
            "x3 band t=0 [{:.4}, {:.4}], t={last} [{:.4}, {:.4}]",
            adl[0].lower[2], adl[0].upper[2], adl[last].lower[2], adl[last].upper[2]
        ),
    );
    report.push_check(
        "adl_x4_falls",
        separated_above(&adl[0], 3, &adl[last], 3),
        format!(
            "x4 band t=0 [{:.4}, {:.4}], t={last} [{:.4}, {:.4}]",
            adl[0].lower[3], adl[0].upper[3], adl[last].lower[3], adl[last].upper[3]
        ),
    );
    let x3: Vec<f64> = adl.iter().map(|b| b.point[2]).collect();
    let x4: Vec<f64> = adl.iter().map(|b| b.point[3]).collect();
    let steps: Vec<f64> = (0..=DRIFT_STEPS).map(f64::from).collect();
    let (up, down) = (spearman(&steps, &x3)?, spearman(&steps, &x4)?);
    report.push_check(
        "adl_trends",
        up >= 1.0 - 1e-12 && down <= -1.0 + 1e-12,
        format!("Spearman over t: x3 {up:.3}, x4 {down:.3}"),
    );
    let e = &adr[last].point;
    report.push_check(
        "adr_order",
        e[2] > e[3] && e[3] > e[0].max(e[1]),
        format!("ADR at t={last}: {e:?}"),
    );
    Ok(())
}

fn misspecification(report: &mut ScenarioReport, include_three_way: bool) -> Result<()> {
    let seed = report.config.seed;
    let train = dgp::gen_interaction(DIAGNOSTIC_ROWS, derive_seed(seed, 0))?;
    let test = dgp::gen_interaction(DIAGNOSTIC_ROWS, derive_seed(seed, 1))?;
    let model = dgp::ols_fit(&train.x, &train.y, include_three_way)?;
    for (k, c) in model.coefficients.iter().enumerate() {
        report.push_value("coefficient", &format!("x{}", k + 1), None, *c);
    }
    if let Some(g) = model.interaction_coefficient {
        report.push_value("coefficient", "x3*x4*x5", None, g);
    }
    let y_hat = model.predict(&test.x)?;
    let req = AttributionRequest::new(test.x, CharacteristicSpec::new(Measure::Dc))
        .with_labels(test.y)
        .with_predictions(y_hat);
    let names = req.feature_names();
    let bands = bootstrap_many(
        &req,
        &[
            TargetKind::Labels,
            TargetKind::Predictions,
            TargetKind::Residuals,
        ],
        report.config.resamples,
        DIAGNOSTIC_ROWS,
        seed,
    )?;
    let (l, p, r) = (&bands[0], &bands[1], &bands[2]);
    report.push_band("adl", &names, None, l);
    report.push_band("adp", &names, None, p);
    report.push_band("adr", &names, None, r);

    let apart = |v: usize| separated_above(p, v, l, v) || separated_above(l, v, p, v);
    let describe = |v: usize| {
        format!(
            "{}: ADL [{:.4}, {:.4}] ADP [{:.4}, {:.4}]",
            names[v], l.lower[v], l.upper[v], p.lower[v], p.upper[v]
        )
    };
    let residual_bands = |vs: &[usize]| {
        vs.iter()
            .map(|&v| format!("{} [{:.4}, {:.4}]", names[v], r.lower[v], r.upper[v]))
            .collect::<Vec<_>>()
            .join(", ")
    };
    if include_three_way {
        let split: Vec<usize> = (0..5).filter(|&v| apart(v)).collect();
        report.push_check(
            "adl_adp_agree",
            split.is_empty(),
            (0..5).map(describe).collect::<Vec<_>>().join("; "),
        );
        let mut disjoint = Vec::new();
        for v in 0..5 {
            for w in v + 1..5 {
                if !crate::attribution::bands_overlap(r, v, r, w) {
                    disjoint.push(format!("{}/{}", names[v], names[w]));
                }
            }
        }
        report.push_check(
            "adr_bands_overlap",
            disjoint.is_empty(),
            format!(
                "{}; separated pairs: {disjoint:?}",
                residual_bands(&[0, 1, 2, 3, 4])
            ),
        );
    } else {
        report.push_check("adp_above_adl_x3", separated_above(p, 2, l, 2), describe(2));
        report.push_check(
            "adp_below_adl_x4_x5",
            separated_above(l, 3, p, 3) && separated_above(l, 4, p, 4),
            format!("{}; {}", describe(3), describe(4)),
        );
        report.push_check(
            "adp_matches_adl_x1_x2",
            !apart(0) && !apart(1),
            format!("{}; {}", describe(0), describe(1)),
        );
        let e = &r.point;
        report.push_check(
            "adr_signs",
            e[0] < 0.0 && e[1] < 0.0 && e[2] > 0.0 && e[3] > 0.0 && e[4] > 0.0,
            format!("ADR points {e:?}"),
        );
        let separated = [2, 3, 4]
            .iter()
            .all(|&v| [0, 1].iter().all(|&w| separated_above(r, v, r, w)));
        report.push_check(
            "adr_bands_separate",
            separated,
            residual_bands(&[0, 1, 2, 3, 4]),
        );
    }
    Ok(())
}
