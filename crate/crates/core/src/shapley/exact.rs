use rayon::prelude::*;

use super::game::{Game, MemoGame};
use super::{Method, ShapleyDecomposition};
use crate::data::FeatureSubset;
use crate::error::{Error, Result};

/// Largest player count the exact engine accepts without an explicit override.
pub const DEFAULT_EXACT_LIMIT: usize = 20;

/// Mean marginal contribution of player `v` over all `binomial(d−1, k)` teams
/// of size `k` that exclude it.
pub fn marginal_contribution_mean<G: Game + ?Sized>(game: &G, v: usize, k: usize) -> Result<f64> {
    let d = game.players();
    if v >= d {
        return Err(Error::PlayerOutOfRange {
            player: v,
            players: d,
        });
    }
    if k >= d {
        return Err(Error::TeamSizeOutOfRange {
            size: k,
            players: d,
        });
    }
    if d > 30 {
        return Err(Error::TooManyPlayers(d));
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for bits in 0..1u64 << d {
        if bits >> v & 1 == 1 || bits.count_ones() as usize != k {
            continue;
        }
        let s = FeatureSubset::from_bits(bits, d)?;
        total += game.value(s.with(v))? - game.value(s)?;
        count += 1;
    }
    Ok(total / count as f64)
}

/// `1 / (d · binomial(d−1, k))` for `k = 0..d−1`.
fn size_weights(d: usize) -> Vec<f64> {
    let mut weights = Vec::with_capacity(d);
    let mut binom = 1.0f64;
    for k in 0..d {
        weights.push(1.0 / (d as f64 * binom));
        binom = binom * (d - 1 - k) as f64 / (k + 1) as f64;
    }
    weights
}

/// Shapley values from a full payoff table indexed by bitmask.
pub fn shapley_from_table(players: usize, table: &[f64]) -> Result<Vec<f64>> {
    if table.len() != 1usize << players {
        return Err(Error::ShapeMismatch {
            expected: 1 << players,
            got: table.len(),
        });
    }
    let weights = size_weights(players);
    let values = (0..players)
        .into_par_iter()
        .map(|v| {
            let bit = 1usize << v;
            let mut phi = 0.0;
            for s in 0..table.len() {
                if s & bit == 0 {
                    phi += weights[s.count_ones() as usize] * (table[s | bit] - table[s]);
                }
            }
            phi
        })
        .collect();
    Ok(values)
}

/// Exact Shapley values by full enumeration, for at most
/// [`DEFAULT_EXACT_LIMIT`] players.
pub fn exact_shapley<G: Game>(game: &G) -> Result<ShapleyDecomposition> {
    exact_shapley_with_limit(game, DEFAULT_EXACT_LIMIT)
}

/// Exact Shapley values with a caller-chosen player cap (at most 30).
pub fn exact_shapley_with_limit<G: Game>(game: &G, limit: usize) -> Result<ShapleyDecomposition> {
    let d = game.players();
    if d > limit || d > 30 {
        return Err(Error::DimensionTooLarge {
            players: d,
            limit: limit.min(30),
        });
    }
    let memo = MemoGame::new(game);
    let table = (0..1u64 << d)
        .into_par_iter()
        .map(|bits| memo.value(FeatureSubset::from_bits(bits, d)?))
        .collect::<Result<Vec<f64>>>()?;
    let values = shapley_from_table(d, &table)?;
    let terms = if d == 0 { 0 } else { d << (d - 1) };
    Ok(ShapleyDecomposition::new(
        values,
        Method::Exact,
        memo.evaluations(),
        terms,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapley::{AdditiveGame, TableGame};

    #[test]
    fn additive_marginals_are_constant() {
        let game = AdditiveGame {
            weights: vec![0.5, -1.0, 2.0, 3.5],
        };
        for v in 0..4 {
            for k in 0..4 {
                assert!(
                    (marginal_contribution_mean(&game, v, k).unwrap() - game.weights[v]).abs()
                        < 1e-15
                );
            }
        }
        assert_eq!(
            marginal_contribution_mean(&game, 4, 0).unwrap_err(),
            Error::PlayerOutOfRange {
                player: 4,
                players: 4
            }
        );
        assert!(matches!(
            marginal_contribution_mean(&game, 0, 4),
            Err(Error::TeamSizeOutOfRange { .. })
        ));
    }

    #[test]
    fn symmetric_two_player_game() {
        let (a, b) = (0.2, 0.9);
        let game = TableGame::new(2, vec![0.0, a, a, b]).unwrap();
        assert_eq!(marginal_contribution_mean(&game, 0, 0).unwrap(), a);
        let dec = exact_shapley(&game).unwrap();
        assert!((dec.values[0] - b / 2.0).abs() < 1e-15);
        assert!((dec.values[1] - b / 2.0).abs() < 1e-15);
        assert_eq!(dec.evaluations_used, 3);
        assert_eq!(dec.marginal_contributions, 4);
    }

    #[test]
    fn limit_is_enforced() {
        let game = AdditiveGame {
            weights: vec![1.0; 21],
        };
        assert_eq!(
            exact_shapley(&game).unwrap_err(),
            Error::DimensionTooLarge {
                players: 21,
                limit: 20
            }
        );
    }

    #[test]
    fn weights_sum_to_one_over_sizes() {
        for d in 1..12 {
            let w = size_weights(d);
            // each size k has binomial(d-1,k) teams
            let mut binom = 1.0;
            let mut total = 0.0;
            for (k, wk) in w.iter().enumerate() {
                total += wk * binom;
                binom = binom * (d - 1 - k) as f64 / (k + 1) as f64;
            }
            assert!((total - 1.0).abs() < 1e-14);
        }
    }
}
