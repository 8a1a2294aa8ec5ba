use std::path::PathBuf;

use depshap::attribution::{self, quantile, AttributionRequest, BootstrapSummary};
use depshap::dependence::{CharacteristicSpec, Measure};
use depshap::dgp::{self, DgpSample};
use depshap::scenarios::{self, Scenario, ScenarioConfig, ScenarioReport};
use depshap::shapley::{Method, ShapleyDecomposition, TargetKind};
use depshap::DataMatrix;

use crate::input::Table;
use crate::output::{OutputDir, Report, ReportRecord};
use crate::{
    AttributeArgs, CliError, DgpArg, KindArg, MeasureArg, MethodArg, ReproduceArgs, SimulateArgs,
};

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(|p| p.trim().to_string())
        .filter(|p| !p.is_empty())
        .collect()
}

fn measure(m: MeasureArg) -> Measure {
    match m {
        MeasureArg::R2 => Measure::R2,
        MeasureArg::Dc => Measure::Dc,
        MeasureArg::Aidc => Measure::Aidc,
        MeasureArg::Hsic => Measure::Hsic,
    }
}

fn target_kind(k: KindArg) -> TargetKind {
    match k {
        KindArg::Labels => TargetKind::Labels,
        KindArg::Predictions => TargetKind::Predictions,
        KindArg::Residuals => TargetKind::Residuals,
    }
}

fn kind_name(k: TargetKind) -> &'static str {
    match k {
        TargetKind::Labels => "labels",
        TargetKind::Predictions => "predictions",
        TargetKind::Residuals => "residuals",
        TargetKind::Custom => "custom",
    }
}

/// Feature positions within `names`, in the order given.
fn positions(wanted: &[String], names: &[String], what: &str) -> Result<Vec<usize>, CliError> {
    wanted
        .iter()
        .map(|w| {
            names
                .iter()
                .position(|n| n == w)
                .ok_or_else(|| CliError::Config(format!("{what} `{w}` is not a feature column")))
        })
        .collect()
}

fn method(args: &AttributeArgs, players: &[String]) -> Result<Method, CliError> {
    match args.method {
        MethodArg::Exact => {
            if args.blocks.is_some() {
                return Err(CliError::Config("--blocks needs --method block".into()));
            }
            Ok(Method::Exact)
        }
        MethodArg::Mc => {
            if args.permutations == 0 {
                return Err(CliError::Config("--permutations must be at least 1".into()));
            }
            Ok(Method::MonteCarlo {
                permutations: args.permutations,
                seed: args.seed,
            })
        }
        MethodArg::Block => {
            let spec = args
                .blocks
                .as_deref()
                .ok_or_else(|| CliError::Config("--method block needs --blocks".into()))?;
            let blocks = spec
                .split(';')
                .map(|b| positions(&split_list(b), players, "block member"))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Method::Block { blocks })
        }
    }
}

/// Divides each row by its sum; a zero sum is a numeric failure.
fn normalized(values: &[f64]) -> Result<Vec<f64>, CliError> {
    let total: f64 = values.iter().sum();
    if total == 0.0 || !total.is_finite() {
        return Err(depshap::Error::ZeroTotal.into());
    }
    Ok(values.iter().map(|v| v / total).collect())
}

/// Bands recomputed from per-resample normalized decompositions.
fn normalized_bands(summary: &BootstrapSummary) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let rows = summary
        .samples
        .iter()
        .map(|s| normalized(s))
        .collect::<Result<Vec<_>, _>>()?;
    let d = summary.point.len();
    let mut lower = Vec::with_capacity(d);
    let mut upper = Vec::with_capacity(d);
    for v in 0..d {
        let mut col: Vec<f64> = rows.iter().map(|r| r[v]).collect();
        col.sort_by(f64::total_cmp);
        lower.push(quantile(&col, 0.025));
        upper.push(quantile(&col, 0.975));
    }
    Ok((lower, upper))
}

pub fn attribute(args: &AttributeArgs) -> Result<Vec<PathBuf>, CliError> {
    let out = OutputDir::create(&args.output_dir, Some(&args.input))?;
    out.check("report.json")?;
    out.check("attributions.csv")?;
    if let Some(delta) = args.delta {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(CliError::Config(format!(
                "--delta must be a non-negative number, got {delta}"
            )));
        }
    }

    let kind = target_kind(args.kind);
    let needs_labels = kind != TargetKind::Predictions || args.delta.is_some();
    let needs_predictions = kind != TargetKind::Labels || args.delta.is_some();
    if needs_predictions && args.pred_col.is_none() {
        return Err(CliError::Config(format!(
            "--pred-col is required for kind {}{}",
            kind_name(kind),
            if args.delta.is_some() {
                " and --delta"
            } else {
                ""
            }
        )));
    }
    if args.pred_col.as_deref() == Some(args.label_col.as_str()) {
        return Err(CliError::Config(
            "--label-col and --pred-col name the same column".into(),
        ));
    }

    let table = Table::read(&args.input)?;
    let labels = if needs_labels {
        Some(table.column(&args.label_col)?.to_vec())
    } else {
        table.column(&args.label_col).ok().map(<[f64]>::to_vec)
    };
    let predictions = match &args.pred_col {
        Some(p) => Some(table.column(p)?.to_vec()),
        None => None,
    };
    let mut exclude = vec![args.label_col.as_str()];
    if let Some(p) = &args.pred_col {
        exclude.push(p);
    }
    let x: DataMatrix = table.features(&exclude)?;

    let scope = match &args.features {
        Some(list) => {
            let wanted = split_list(list);
            if wanted.is_empty() {
                return Err(CliError::Config("--features lists no names".into()));
            }
            Some(positions(&wanted, x.column_names(), "feature")?)
        }
        None => None,
    };
    let players: Vec<String> = match &scope {
        Some(s) => s.iter().map(|&j| x.column_names()[j].clone()).collect(),
        None => x.column_names().to_vec(),
    };
    let method = method(args, &players)?;
    let spec = CharacteristicSpec::new(measure(args.measure));

    let mut req = AttributionRequest::new(x, spec).with_method(method.clone());
    if let Some(y) = labels {
        req = req.with_labels(y);
    }
    if let Some(y_hat) = predictions {
        req = req.with_predictions(y_hat);
    }
    if let Some(s) = scope {
        req = req.with_scope(s);
    }
    req.validate()?;
    let rows = req.x.nrows();

    let mut kinds = vec![kind];
    if args.delta.is_some() {
        for k in [TargetKind::Labels, TargetKind::Predictions] {
            if !kinds.contains(&k) {
                kinds.push(k);
            }
        }
    }
    let decs: Vec<ShapleyDecomposition> = attribution::attribute_many(&req, &kinds)?;
    let bands = if args.bootstrap_resamples > 0 {
        let size = args.resample_size.unwrap_or(rows);
        Some(attribution::bootstrap_many(
            &req,
            &kinds,
            args.bootstrap_resamples,
            size,
            args.seed,
        )?)
    } else {
        if args.resample_size.is_some() {
            return Err(CliError::Config(
                "--resample-size needs --bootstrap-resamples".into(),
            ));
        }
        None
    };

    let main = &decs[0];
    let values = if args.normalize {
        normalized(&main.values)?
    } else {
        main.values.clone()
    };
    let (lower, upper) = match (&bands, args.normalize) {
        (Some(b), true) => {
            let (lo, hi) = normalized_bands(&b[0])?;
            (Some(lo), Some(hi))
        }
        (Some(b), false) => (Some(b[0].lower.clone()), Some(b[0].upper.clone())),
        (None, _) => (None, None),
    };

    let mut report = Report::new("attribute");
    report.records = players
        .iter()
        .enumerate()
        .map(|(v, name)| ReportRecord {
            name: name.clone(),
            value: values[v],
            lower: lower.as_ref().map(|l| l[v]),
            upper: upper.as_ref().map(|u| u[v]),
            series: None,
            t: None,
        })
        .collect();
    report.meta("input", args.input.display().to_string());
    report.meta("rows", rows);
    report.meta("kind", kind_name(kind));
    report.meta("measure", spec);
    report.meta("method", &method);
    report.meta("seed", args.seed);
    report.meta("normalized", args.normalize);
    report.meta("evaluations_used", main.evaluations_used);
    report.meta("marginal_contributions", main.marginal_contributions);
    if let Some(se) = &main.std_errors {
        report.meta("std_errors", se);
    }
    if let Some(b) = &bands {
        report.meta("resamples", b[0].resamples);
        report.meta("resample_size", b[0].resample_size);
        report.meta("resample_mode", b[0].mode);
    }
    if let Some(delta) = args.delta {
        let find = |k: TargetKind| kinds.iter().position(|&x| x == k).expect("kind requested");
        let (l, p) = (find(TargetKind::Labels), find(TargetKind::Predictions));
        let diff = attribution::compare(&decs[p], &decs[l], delta)?;
        let flagged: Vec<&String> = diff.flagged.iter().map(|&v| &players[v]).collect();
        let mut comparison = serde_json::json!({
            "delta": delta,
            "adl": decs[l].values,
            "adp": decs[p].values,
            "differences": diff.differences,
            "flagged": flagged,
        });
        if let Some(b) = &bands {
            let separated = attribution::significant_differences(&b[p], &b[l])?;
            let names: Vec<&String> = players
                .iter()
                .zip(&separated)
                .filter(|(_, &s)| s)
                .map(|(n, _)| n)
                .collect();
            comparison["bands_separated"] = serde_json::json!(names);
        }
        report.meta("comparison", comparison);
    }

    let csv = report.records_csv()?;
    Ok(vec![
        out.write("report.json", report.to_json().as_bytes())?,
        out.write("attributions.csv", &csv)?,
    ])
}

fn sample_csv(sample: &DgpSample) -> Result<Vec<u8>, CliError> {
    let io = |e: csv::Error| CliError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["y".to_string()];
    header.extend(sample.x.column_names().iter().cloned());
    w.write_record(&header).map_err(io)?;
    for (i, y) in sample.y.iter().enumerate() {
        let mut row = vec![y.to_string()];
        row.extend(sample.x.row(i).iter().map(f64::to_string));
        w.write_record(&row).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

pub fn simulate(args: &SimulateArgs) -> Result<Vec<PathBuf>, CliError> {
    let config = |e: depshap::Error| CliError::Config(e.to_string());
    let coeffs_given = args.coeffs != "0,2,4,6,8";
    if coeffs_given && args.dgp != DgpArg::Quadratic {
        return Err(CliError::Config(
            "--coeffs only applies to --dgp quadratic".into(),
        ));
    }
    if (args.t != 0 || args.narrow) && args.dgp != DgpArg::Drift {
        return Err(CliError::Config(
            "--t and --narrow only apply to --dgp drift".into(),
        ));
    }
    let (sample, file) = match args.dgp {
        DgpArg::Quadratic => {
            let coeffs = split_list(&args.coeffs)
                .iter()
                .map(|c| {
                    c.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| {
                            CliError::Config(format!("--coeffs entry `{c}` is not a number"))
                        })
                })
                .collect::<Result<Vec<_>, _>>()?;
            (
                dgp::gen_quadratic(args.n, &coeffs, args.seed).map_err(config)?,
                "quadratic.csv".to_string(),
            )
        }
        DgpArg::Xor => (
            dgp::gen_xor(args.n, args.seed).map_err(config)?,
            "xor.csv".to_string(),
        ),
        DgpArg::Drift => (
            dgp::gen_drift(args.n, args.t, args.seed, !args.narrow).map_err(config)?,
            format!("drift_t{}.csv", args.t),
        ),
        DgpArg::Interaction => (
            dgp::gen_interaction(args.n, args.seed).map_err(config)?,
            "interaction.csv".to_string(),
        ),
    };
    let out = OutputDir::create(&args.output_dir, None)?;
    Ok(vec![out.write(&file, &sample_csv(&sample)?)?])
}

fn scenario_report(report: &ScenarioReport) -> Report {
    let mut out = Report::new("reproduce");
    out.scenario = Some(report.scenario.name().to_string());
    out.records = report
        .records
        .iter()
        .map(|r| ReportRecord {
            name: r.feature.clone(),
            value: r.value,
            lower: r.lower,
            upper: r.upper,
            series: Some(r.series.clone()),
            t: r.t,
        })
        .collect();
    out.checks = report.checks.clone();
    out.passed = Some(report.passed());
    out.meta("seed", report.config.seed);
    out.meta("resamples", report.config.resamples);
    out
}

pub fn reproduce(args: &ReproduceArgs) -> Result<Vec<PathBuf>, CliError> {
    let selected: Vec<Scenario> = if args.scenario == "all" {
        Scenario::ALL.to_vec()
    } else {
        vec![args
            .scenario
            .parse::<Scenario>()
            .map_err(|e| CliError::Config(e.to_string()))?]
    };
    if args.bootstrap_resamples == 0 {
        return Err(CliError::Config(
            "--bootstrap-resamples must be at least 1".into(),
        ));
    }
    let out = OutputDir::create(&args.output_dir, None)?;
    let config = ScenarioConfig {
        seed: args.seed,
        resamples: args.bootstrap_resamples,
    };
    let mut written = Vec::new();
    let mut failed = Vec::new();
    for scenario in selected {
        let result = scenarios::run(scenario, config)?;
        let report = scenario_report(&result);
        written.push(out.write(
            &format!("{}.json", scenario.name()),
            report.to_json().as_bytes(),
        )?);
        written.push(out.write(
            &format!("{}_plot.csv", scenario.name()),
            &report.records_csv()?,
        )?);
        if !result.passed() {
            let names: Vec<&str> = result
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| c.name.as_str())
                .collect();
            failed.push(format!("{} ({})", scenario.name(), names.join(", ")));
        }
    }
    if failed.is_empty() {
        Ok(written)
    } else {
        for p in &written {
            println!("{}", p.display());
        }
        Err(CliError::ScenarioFailed(format!(
            "checks failed: {}",
            failed.join("; ")
        )))
    }
}
