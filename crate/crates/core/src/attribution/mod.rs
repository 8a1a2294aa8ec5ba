//! Attributed dependence on labels (ADL), predictions (ADP) and residuals
//! (ADR).
//!
//! Each workflow picks a target column, restricts the data to the feature
//! scope, and decomposes the chosen dependence measure over the in-scope
//! features. Features outside the scope are not players at all: they never
//! enter any coalition.

mod bootstrap;
mod compare;

use serde::{Deserialize, Serialize};

pub use bootstrap::{
    bootstrap, bootstrap_many, bootstrap_series, bootstrap_statistic, quantile, resample_indices,
    BootstrapSummary, ResampleMode,
};
pub use compare::{bands_overlap, compare, normalize, significant_differences, DecompositionDiff};

use crate::data::{DataMatrix, FeatureSubset};
use crate::dependence::{coalition_table, evaluate_characteristic, CharacteristicSpec};
use crate::error::{Error, Result};
use crate::shapley::{
    block_shapley, monte_carlo_shapley, shapley_from_table, BlockPartition, Game, Method,
    ShapleyDecomposition, TargetKind, DEFAULT_EXACT_LIMIT,
};

/// Inputs for ADL/ADP/ADR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionRequest {
    pub x: DataMatrix,
    pub labels: Option<Vec<f64>>,
    pub predictions: Option<Vec<f64>>,
    pub spec: CharacteristicSpec,
    pub method: Method,
    /// Column indices of `x` that act as players, in the order reported.
    pub feature_scope: Option<Vec<usize>>,
}

impl AttributionRequest {
    pub fn new(x: DataMatrix, spec: impl Into<CharacteristicSpec>) -> Self {
        Self {
            x,
            labels: None,
            predictions: None,
            spec: spec.into(),
            method: Method::Exact,
            feature_scope: None,
        }
    }

    pub fn with_labels(mut self, y: Vec<f64>) -> Self {
        self.labels = Some(y);
        self
    }

    pub fn with_predictions(mut self, y_hat: Vec<f64>) -> Self {
        self.predictions = Some(y_hat);
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_scope(mut self, scope: Vec<usize>) -> Self {
        self.feature_scope = Some(scope);
        self
    }

    /// Checks lengths, the scope and the measure parameters.
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        let n = self.x.nrows();
        for column in self.labels.iter().chain(&self.predictions) {
            if column.len() != n {
                return Err(Error::RowCountMismatch {
                    left: column.len(),
                    right: n,
                });
            }
            if let Some(row) = column.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    column: "target".into(),
                    row,
                });
            }
        }
        if let Some(scope) = &self.feature_scope {
            if scope.is_empty() {
                return Err(Error::InvalidArgument("feature scope is empty".into()));
            }
            FeatureSubset::from_members(scope, self.x.ncols())?;
            let mut sorted = scope.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != scope.len() {
                return Err(Error::InvalidArgument(
                    "feature scope lists a column twice".into(),
                ));
            }
        }
        Ok(())
    }

    /// Column indices of the players.
    pub fn scope(&self) -> Vec<usize> {
        self.feature_scope
            .clone()
            .unwrap_or_else(|| (0..self.x.ncols()).collect())
    }

    /// Names of the players, in attribution order.
    pub fn feature_names(&self) -> Vec<String> {
        let names = self.x.column_names();
        self.scope().into_iter().map(|j| names[j].clone()).collect()
    }

    /// The target column for `kind`; residuals are `y − ŷ`.
    pub fn target(&self, kind: TargetKind) -> Result<Vec<f64>> {
        let labels = || self.labels.clone().ok_or(Error::MissingTarget("label"));
        let predictions = || {
            self.predictions
                .clone()
                .ok_or(Error::MissingTarget("prediction"))
        };
        match kind {
            TargetKind::Labels => labels(),
            TargetKind::Predictions => predictions(),
            TargetKind::Residuals => {
                let (y, y_hat) = (labels()?, predictions()?);
                Ok(y.iter().zip(&y_hat).map(|(a, b)| a - b).collect())
            }
            TargetKind::Custom => Err(Error::InvalidArgument(
                "custom targets are not part of a request".into(),
            )),
        }
    }

    /// Attribution over the given rows (repeats allowed).
    pub(crate) fn on_rows(&self, rows: &[usize]) -> Result<Self> {
        let pick = |v: &Vec<f64>| rows.iter().map(|&i| v[i]).collect();
        Ok(Self {
            x: self.x.select_rows(rows)?,
            labels: self.labels.as_ref().map(pick),
            predictions: self.predictions.as_ref().map(pick),
            spec: self.spec,
            method: self.method.clone(),
            feature_scope: self.feature_scope.clone(),
        })
    }
}

/// A dependence measure between one target and the columns of `x`, as a game.
pub struct CharacteristicGame<'a> {
    pub spec: CharacteristicSpec,
    pub target: &'a [f64],
    pub x: &'a DataMatrix,
}

impl Game for CharacteristicGame<'_> {
    fn players(&self) -> usize {
        self.x.ncols()
    }

    fn value(&self, coalition: FeatureSubset) -> Result<f64> {
        Ok(evaluate_characteristic(&self.spec, self.target, self.x, coalition)?.value)
    }
}

/// ADL: decomposition with the observed labels as target.
pub fn adl(req: &AttributionRequest) -> Result<ShapleyDecomposition> {
    attribute(req, TargetKind::Labels)
}

/// ADP: decomposition with the model predictions as target.
pub fn adp(req: &AttributionRequest) -> Result<ShapleyDecomposition> {
    attribute(req, TargetKind::Predictions)
}

/// ADR: decomposition with the residuals `y − ŷ` as target.
pub fn adr(req: &AttributionRequest) -> Result<ShapleyDecomposition> {
    attribute(req, TargetKind::Residuals)
}

pub fn attribute(req: &AttributionRequest, kind: TargetKind) -> Result<ShapleyDecomposition> {
    Ok(attribute_many(req, &[kind])?.remove(0))
}

/// Several decompositions of the same request. With the exact or block
/// engine all targets share one pass over the data.
pub fn attribute_many(
    req: &AttributionRequest,
    kinds: &[TargetKind],
) -> Result<Vec<ShapleyDecomposition>> {
    req.validate()?;
    let targets = kinds
        .iter()
        .map(|&k| req.target(k))
        .collect::<Result<Vec<_>>>()?;
    let x = match &req.feature_scope {
        Some(scope) => req.x.select_columns(scope)?,
        None => req.x.clone(),
    };
    let d = x.ncols();
    let mut decs = match &req.method {
        Method::Exact => {
            if d > DEFAULT_EXACT_LIMIT {
                return Err(Error::DimensionTooLarge {
                    players: d,
                    limit: DEFAULT_EXACT_LIMIT,
                });
            }
            let refs: Vec<&[f64]> = targets.iter().map(Vec::as_slice).collect();
            coalition_table(&req.spec, &refs, &x)?
                .into_iter()
                .map(|table| {
                    Ok(ShapleyDecomposition::new(
                        shapley_from_table(d, &table)?,
                        Method::Exact,
                        (1 << d) - 1,
                        d << d.saturating_sub(1),
                    ))
                })
                .collect::<Result<Vec<_>>>()?
        }
        Method::Block { blocks } => {
            let partition = BlockPartition::new(blocks.clone(), d)?;
            blocked(&req.spec, &targets, &x, &partition)?
        }
        Method::MonteCarlo { permutations, seed } => targets
            .iter()
            .map(|t| {
                let game = CharacteristicGame {
                    spec: req.spec,
                    target: t,
                    x: &x,
                };
                monte_carlo_shapley(&game, *permutations, *seed)
            })
            .collect::<Result<Vec<_>>>()?,
    };
    for (dec, &kind) in decs.iter_mut().zip(kinds) {
        dec.measure = Some(req.spec);
        dec.target_kind = kind;
    }
    Ok(decs)
}

fn blocked(
    spec: &CharacteristicSpec,
    targets: &[Vec<f64>],
    x: &DataMatrix,
    partition: &BlockPartition,
) -> Result<Vec<ShapleyDecomposition>> {
    let d = x.ncols();
    let mut values = vec![vec![0.0; d]; targets.len()];
    let mut evaluations = 0;
    for block in partition.blocks() {
        if block.len() > DEFAULT_EXACT_LIMIT {
            return Err(Error::DimensionTooLarge {
                players: block.len(),
                limit: DEFAULT_EXACT_LIMIT,
            });
        }
        let sub = x.select_columns(block)?;
        let refs: Vec<&[f64]> = targets.iter().map(Vec::as_slice).collect();
        for (t, table) in coalition_table(spec, &refs, &sub)?.into_iter().enumerate() {
            for (k, phi) in shapley_from_table(block.len(), &table)?
                .into_iter()
                .enumerate()
            {
                values[t][block[k]] = phi;
            }
        }
        evaluations += (1 << block.len()) - 1;
    }
    let method = Method::Block {
        blocks: partition.blocks().to_vec(),
    };
    Ok(values
        .into_iter()
        .map(|v| {
            ShapleyDecomposition::new(
                v,
                method.clone(),
                evaluations,
                partition.marginal_contributions(),
            )
        })
        .collect())
}

/// Reference implementation through the generic engine, used to cross-check
/// the shared-pass path.
pub fn attribute_with_engine(
    req: &AttributionRequest,
    kind: TargetKind,
) -> Result<ShapleyDecomposition> {
    req.validate()?;
    let target = req.target(kind)?;
    let x = match &req.feature_scope {
        Some(scope) => req.x.select_columns(scope)?,
        None => req.x.clone(),
    };
    let game = CharacteristicGame {
        spec: req.spec,
        target: &target,
        x: &x,
    };
    let mut dec = match &req.method {
        Method::Exact => crate::shapley::exact_shapley(&game)?,
        Method::Block { blocks } => {
            block_shapley(&game, &BlockPartition::new(blocks.clone(), x.ncols())?)?
        }
        Method::MonteCarlo { permutations, seed } => {
            monte_carlo_shapley(&game, *permutations, *seed)?
        }
    };
    dec.measure = Some(req.spec);
    dec.target_kind = kind;
    Ok(dec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependence::Measure;
    use crate::dgp;

    fn quadratic_request(measure: Measure) -> AttributionRequest {
        let s = dgp::gen_quadratic(120, &[0.0, 1.0, 3.0], 8).unwrap();
        let y_hat: Vec<f64> =
            s.y.iter()
                .enumerate()
                .map(|(i, v)| v + 0.1 * (i % 3) as f64)
                .collect();
        AttributionRequest::new(s.x, measure)
            .with_labels(s.y)
            .with_predictions(y_hat)
    }

    #[test]
    fn shared_pass_matches_generic_engine() {
        for m in Measure::ALL {
            let req = quadratic_request(m);
            for kind in [
                TargetKind::Labels,
                TargetKind::Predictions,
                TargetKind::Residuals,
            ] {
                let fast = attribute(&req, kind).unwrap();
                let slow = attribute_with_engine(&req, kind).unwrap();
                for (a, b) in fast.values.iter().zip(&slow.values) {
                    assert!((a - b).abs() < 1e-12, "{m} {kind:?}: {a} vs {b}");
                }
                assert_eq!(fast.evaluations_used, slow.evaluations_used);
            }
        }
    }

    #[test]
    fn perfect_predictions() {
        let mut req = quadratic_request(Measure::Dc);
        req.predictions = req.labels.clone();
        assert_eq!(adp(&req).unwrap().values, adl(&req).unwrap().values);
        assert!(adr(&req).unwrap().values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_predictions_give_zero() {
        let mut req = quadratic_request(Measure::Dc);
        req.predictions = Some(vec![2.5; req.x.nrows()]);
        assert!(adp(&req).unwrap().values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn missing_targets() {
        let s = dgp::gen_xor(20, 1).unwrap();
        let req = AttributionRequest::new(s.x, Measure::Dc);
        assert_eq!(adl(&req).unwrap_err(), Error::MissingTarget("label"));
        let req = req.with_labels(s.y);
        assert_eq!(adr(&req).unwrap_err(), Error::MissingTarget("prediction"));
    }

    #[test]
    fn scope_drops_other_features() {
        let req = quadratic_request(Measure::Dc).with_scope(vec![2, 0]);
        let dec = adl(&req).unwrap();
        assert_eq!(dec.players(), 2);
        assert_eq!(req.feature_names(), vec!["x3", "x1"]);
        let narrowed = AttributionRequest::new(req.x.select_columns(&[2, 0]).unwrap(), Measure::Dc)
            .with_labels(req.labels.clone().unwrap());
        assert_eq!(adl(&narrowed).unwrap().values, dec.values);
        assert!(adl(&req.clone().with_scope(vec![0, 0])).is_err());
        assert!(adl(&req.with_scope(vec![5])).is_err());
    }

    #[test]
    fn engines_agree_on_block_and_monte_carlo() {
        let req = quadratic_request(Measure::Dc);
        let exact = adl(&req).unwrap();
        let whole = adl(&req.clone().with_method(Method::Block {
            blocks: vec![vec![0, 1, 2]],
        }))
        .unwrap();
        for (a, b) in whole.values.iter().zip(&exact.values) {
            assert!((a - b).abs() < 1e-12);
        }
        let mc = adl(&req.with_method(Method::MonteCarlo {
            permutations: 4000,
            seed: 3,
        }))
        .unwrap();
        let se = mc.std_errors.clone().unwrap();
        for v in 0..3 {
            assert!((mc.values[v] - exact.values[v]).abs() <= 5.0 * se[v] + 1e-12);
        }
    }
}
