use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::game::{Game, MemoGame};
use super::{Method, ShapleyDecomposition};
use crate::data::FeatureSubset;
use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// Permutations per work item. Chunk `c` draws from random stream `c`, so the
/// estimate depends only on `(seed, permutations)`.
pub const PERMUTATION_CHUNK: usize = 256;

/// Running mean and sum of squared deviations per player.
#[derive(Clone)]
struct Moments {
    count: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(d: usize) -> Self {
        Self {
            count: 0.0,
            mean: vec![0.0; d],
            m2: vec![0.0; d],
        }
    }

    fn push(&mut self, sample: &[f64]) {
        self.count += 1.0;
        for (v, &x) in sample.iter().enumerate() {
            let delta = x - self.mean[v];
            self.mean[v] += delta / self.count;
            self.m2[v] += delta * (x - self.mean[v]);
        }
    }

    fn merge(mut self, other: &Moments) -> Self {
        let total = self.count + other.count;
        if other.count == 0.0 {
            return self;
        }
        for v in 0..self.mean.len() {
            let delta = other.mean[v] - self.mean[v];
            self.mean[v] += delta * other.count / total;
            self.m2[v] += other.m2[v] + delta * delta * self.count * other.count / total;
        }
        self.count = total;
        self
    }
}

fn run_chunk<G: Game>(game: &G, seed: u64, chunk: usize, size: usize) -> Result<Moments> {
    let d = game.players();
    let mut rng = rng::stream(seed, Domain::Permutations, chunk as u64);
    let mut order: Vec<usize> = (0..d).collect();
    let mut marginals = vec![0.0; d];
    let mut moments = Moments::new(d);
    let empty = game.value(FeatureSubset::empty(d)?)?;
    for _ in 0..size {
        order.sort_unstable();
        order.shuffle(&mut rng);
        let mut coalition = FeatureSubset::empty(d)?;
        let mut previous = empty;
        for &v in &order {
            coalition = coalition.with(v);
            let current = game.value(coalition)?;
            marginals[v] = current - previous;
            previous = current;
        }
        moments.push(&marginals);
    }
    Ok(moments)
}

/// Permutation-sampling estimate of the Shapley values.
///
/// Each sampled ordering contributes, for every player, the payoff gained when
/// that player joins the players preceding it. The result is deterministic in
/// `(seed, permutations)` regardless of thread count; standard errors are the
/// sample standard deviation of the per-permutation marginals over `√p`.
pub fn monte_carlo_shapley<G: Game>(
    game: &G,
    permutations: usize,
    seed: u64,
) -> Result<ShapleyDecomposition> {
    if permutations == 0 {
        return Err(Error::InvalidArgument(
            "at least one permutation is required".into(),
        ));
    }
    let d = game.players();
    if d > FeatureSubset::MAX_UNIVERSE {
        return Err(Error::TooManyPlayers(d));
    }
    let memo = MemoGame::new(game);
    let chunks = permutations.div_ceil(PERMUTATION_CHUNK);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let size = PERMUTATION_CHUNK.min(permutations - c * PERMUTATION_CHUNK);
            run_chunk(&memo, seed, c, size)
        })
        .collect::<Result<Vec<_>>>()?;
    let total = parts
        .iter()
        .fold(Moments::new(d), |acc, part| acc.merge(part));
    let p = permutations as f64;
    let std_errors = (permutations > 1).then(|| {
        total
            .m2
            .iter()
            .map(|m2| (m2 / (p - 1.0)).sqrt() / p.sqrt())
            .collect()
    });
    let mut dec = ShapleyDecomposition::new(
        total.mean,
        Method::MonteCarlo { permutations, seed },
        memo.evaluations(),
        permutations * d,
    );
    dec.std_errors = std_errors;
    Ok(dec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapley::{exact_shapley, AdditiveGame, TableGame};

    #[test]
    fn additive_game_is_exact_for_one_permutation() {
        let game = AdditiveGame {
            weights: vec![0.25, -0.5, 1.75],
        };
        let dec = monte_carlo_shapley(&game, 1, 99).unwrap();
        assert_eq!(dec.values, game.weights);
        assert!(dec.std_errors.is_none());
    }

    #[test]
    fn deterministic_given_seed() {
        let game = TableGame::from_fn(4, |s| (s.bits() as f64).sin()).unwrap();
        let a = monte_carlo_shapley(&game, 1000, 5).unwrap();
        let b = monte_carlo_shapley(&game, 1000, 5).unwrap();
        let c = monte_carlo_shapley(&game, 1000, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn converges_toward_exact() {
        let game = TableGame::from_fn(5, |s| {
            if s.is_empty() {
                0.0
            } else {
                (s.bits() as f64 * 1.3).cos()
            }
        })
        .unwrap();
        let exact = exact_shapley(&game).unwrap();
        let mc = monte_carlo_shapley(&game, 20_000, 1).unwrap();
        let se = mc.std_errors.as_ref().unwrap();
        for v in 0..5 {
            assert!((mc.values[v] - exact.values[v]).abs() <= 5.0 * se[v]);
        }
        assert_eq!(mc.evaluations_used, 31);
    }

    #[test]
    fn zero_permutations_rejected() {
        let game = AdditiveGame { weights: vec![1.0] };
        assert!(monte_carlo_shapley(&game, 0, 0).is_err());
    }
}
