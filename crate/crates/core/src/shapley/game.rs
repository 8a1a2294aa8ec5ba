use std::collections::HashMap;
use std::sync::RwLock;

use crate::data::FeatureSubset;
use crate::error::{Error, Result};

/// A cooperative game: a deterministic payoff for every coalition of
/// `players()` players. By convention the empty coalition pays 0.
pub trait Game: Sync {
    fn players(&self) -> usize;

    fn value(&self, coalition: FeatureSubset) -> Result<f64>;
}

impl<G: Game + ?Sized> Game for &G {
    fn players(&self) -> usize {
        (**self).players()
    }

    fn value(&self, coalition: FeatureSubset) -> Result<f64> {
        (**self).value(coalition)
    }
}

/// A game given by its full payoff table, indexed by coalition bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct TableGame {
    players: usize,
    values: Vec<f64>,
}

impl TableGame {
    pub fn new(players: usize, values: Vec<f64>) -> Result<Self> {
        if players > 30 {
            return Err(Error::TooManyPlayers(players));
        }
        if values.len() != 1 << players {
            return Err(Error::ShapeMismatch {
                expected: 1 << players,
                got: values.len(),
            });
        }
        Ok(Self { players, values })
    }

    /// Builds the table by calling `f` on every coalition.
    pub fn from_fn(players: usize, f: impl Fn(FeatureSubset) -> f64) -> Result<Self> {
        let values = (0..1u64 << players)
            .map(|m| FeatureSubset::from_bits(m, players).map(&f))
            .collect::<Result<Vec<_>>>()?;
        Self::new(players, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl Game for TableGame {
    fn players(&self) -> usize {
        self.players
    }

    fn value(&self, coalition: FeatureSubset) -> Result<f64> {
        self.values
            .get(coalition.bits() as usize)
            .copied()
            .ok_or_else(|| Error::PlayerOutOfRange {
                player: 63 - coalition.bits().leading_zeros() as usize,
                players: self.players,
            })
    }
}

/// `C(S) = Σ_{i∈S} wᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveGame {
    pub weights: Vec<f64>,
}

impl Game for AdditiveGame {
    fn players(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, coalition: FeatureSubset) -> Result<f64> {
        Ok(coalition.members().map(|i| self.weights[i]).sum())
    }
}

/// Caches coalition payoffs. Concurrent callers may race to compute the same
/// coalition; both store the same value, so the race is harmless.
pub struct MemoGame<G> {
    inner: G,
    cache: RwLock<HashMap<u64, f64>>,
}

impl<G: Game> MemoGame<G> {
    pub fn new(inner: G) -> Self {
        Self {
            inner,
            cache: RwLock::new(HashMap::new()),
        }
    }

    /// Distinct nonempty coalitions evaluated so far.
    pub fn evaluations(&self) -> usize {
        let cache = self.cache.read().expect("memo lock poisoned");
        cache.len() - usize::from(cache.contains_key(&0))
    }
}

impl<G: Game> Game for MemoGame<G> {
    fn players(&self) -> usize {
        self.inner.players()
    }

    fn value(&self, coalition: FeatureSubset) -> Result<f64> {
        if let Some(&v) = self
            .cache
            .read()
            .expect("memo lock poisoned")
            .get(&coalition.bits())
        {
            return Ok(v);
        }
        let v = self.inner.value(coalition)?;
        self.cache
            .write()
            .expect("memo lock poisoned")
            .insert(coalition.bits(), v);
        Ok(v)
    }
}

/// The game restricted to `block`: local player `k` is the `k`-th member of
/// `block`; players outside the block never join a coalition.
pub(crate) struct SubGame<'a, G> {
    pub inner: &'a G,
    pub members: Vec<usize>,
}

impl<G: Game> Game for SubGame<'_, G> {
    fn players(&self) -> usize {
        self.members.len()
    }

    fn value(&self, coalition: FeatureSubset) -> Result<f64> {
        let global: Vec<usize> = coalition.members().map(|k| self.members[k]).collect();
        self.inner
            .value(FeatureSubset::from_members(&global, self.inner.players())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn memo_counts_distinct_nonempty() {
        let game = MemoGame::new(AdditiveGame {
            weights: vec![1.0, 2.0, 3.0],
        });
        let s = FeatureSubset::from_members(&[0, 2], 3).unwrap();
        assert_eq!(game.value(s).unwrap(), 4.0);
        assert_eq!(game.value(s).unwrap(), 4.0);
        game.value(FeatureSubset::empty(3).unwrap()).unwrap();
        assert_eq!(game.evaluations(), 1);
    }

    #[test]
    fn table_shape_is_checked() {
        assert!(TableGame::new(2, vec![0.0; 3]).is_err());
        let t = TableGame::from_fn(2, |s| s.len() as f64).unwrap();
        assert_eq!(t.values(), &[0.0, 1.0, 1.0, 2.0]);
    }
}
