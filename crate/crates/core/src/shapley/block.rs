use serde::{Deserialize, Serialize};

use super::exact::exact_shapley;
use super::game::{Game, SubGame};
use super::{Method, ShapleyDecomposition};
use crate::data::{full_mask, FeatureSubset};
use crate::error::{Error, Result};

/// Disjoint player groups covering `[d]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    blocks: Vec<Vec<usize>>,
    players: usize,
}

impl BlockPartition {
    pub fn new(blocks: Vec<Vec<usize>>, players: usize) -> Result<Self> {
        if players > FeatureSubset::MAX_UNIVERSE {
            return Err(Error::TooManyPlayers(players));
        }
        let mut seen = 0u64;
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &p in block {
                if p >= players {
                    return Err(Error::InvalidPartition(format!(
                        "player {p} outside [0, {players})"
                    )));
                }
                if seen >> p & 1 == 1 {
                    return Err(Error::InvalidPartition(format!("player {p} appears twice")));
                }
                seen |= 1 << p;
            }
        }
        if seen != full_mask(players) {
            return Err(Error::InvalidPartition(
                "blocks do not cover every player".into(),
            ));
        }
        Ok(Self { blocks, players })
    }

    /// `k` consecutive blocks of `size` players each.
    pub fn uniform(k: usize, size: usize) -> Result<Self> {
        Self::new(
            (0..k)
                .map(|b| (b * size..(b + 1) * size).collect())
                .collect(),
            k * size,
        )
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn players(&self) -> usize {
        self.players
    }

    /// Marginal-contribution terms needed inside the blocks,
    /// `Σ |b| · 2^{|b|−1}`.
    pub fn marginal_contributions(&self) -> usize {
        self.blocks.iter().map(|b| b.len() << (b.len() - 1)).sum()
    }
}

/// Exact Shapley values computed separately inside each block, with players
/// of other blocks held absent.
///
/// This equals the full decomposition when the characteristic function is
/// additive across blocks, which is what the caller asserts by choosing the
/// partition.
pub fn block_shapley<G: Game>(
    game: &G,
    partition: &BlockPartition,
) -> Result<ShapleyDecomposition> {
    if partition.players() != game.players() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} players, game has {}",
            partition.players(),
            game.players()
        )));
    }
    let mut values = vec![0.0; game.players()];
    let mut evaluations = 0;
    for block in partition.blocks() {
        let sub = SubGame {
            inner: game,
            members: block.clone(),
        };
        let dec = exact_shapley(&sub)?;
        evaluations += dec.evaluations_used;
        for (k, &p) in block.iter().enumerate() {
            values[p] = dec.values[k];
        }
    }
    Ok(ShapleyDecomposition::new(
        values,
        Method::Block {
            blocks: partition.blocks().to_vec(),
        },
        evaluations,
        partition.marginal_contributions(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapley::{exact_shapley, TableGame};

    #[test]
    fn invalid_partitions() {
        assert!(BlockPartition::new(vec![vec![0, 1], vec![1, 2]], 3).is_err());
        assert!(BlockPartition::new(vec![vec![0], vec![2]], 3).is_err());
        assert!(BlockPartition::new(vec![vec![0, 3]], 3).is_err());
        assert!(BlockPartition::new(vec![vec![], vec![0]], 1).is_err());
    }

    #[test]
    fn single_block_equals_exact() {
        let game = TableGame::from_fn(4, |s| (s.bits() as f64).sqrt()).unwrap();
        let whole = BlockPartition::new(vec![vec![0, 1, 2, 3]], 4).unwrap();
        let blocked = block_shapley(&game, &whole).unwrap();
        let exact = exact_shapley(&game).unwrap();
        assert_eq!(blocked.values, exact.values);
        assert_eq!(blocked.evaluations_used, exact.evaluations_used);
    }

    #[test]
    fn fifteen_players_in_three_blocks() {
        let p = BlockPartition::uniform(3, 5).unwrap();
        assert_eq!(p.marginal_contributions(), 240);
        let game = TableGame::from_fn(15, |s| s.len() as f64).unwrap();
        let dec = block_shapley(&game, &p).unwrap();
        assert_eq!(dec.evaluations_used, 3 * 31);
        assert!(dec.values.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }
}
