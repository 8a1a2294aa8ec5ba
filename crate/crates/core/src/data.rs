//! Observation tables and feature coalitions.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `n × d` table of finite reals with named columns, stored row-major.
///
/// Targets are represented as one-column matrices so that every dependence
/// measure works on the same type for both of its arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMatrix {
    values: Vec<f64>,
    names: Vec<String>,
    rows: usize,
}

impl DataMatrix {
    /// Builds a matrix from row-major values, validating shape, finiteness
    /// and name uniqueness. At least two rows are required.
    pub fn new(values: Vec<f64>, names: Vec<String>) -> Result<Self> {
        let cols = names.len();
        if cols == 0 {
            return Err(Error::InvalidArgument(
                "a data matrix needs at least one column".into(),
            ));
        }
        if !values.len().is_multiple_of(cols) {
            return Err(Error::ShapeMismatch {
                expected: (values.len() / cols + 1) * cols,
                got: values.len(),
            });
        }
        let rows = values.len() / cols;
        if rows < 2 {
            return Err(Error::TooFewRows { min: 2, got: rows });
        }
        let mut seen = HashSet::with_capacity(cols);
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                column: names[pos % cols].clone(),
                row: pos / cols,
            });
        }
        Ok(Self {
            values,
            names,
            rows,
        })
    }

    /// Builds a matrix from columns of equal length.
    pub fn from_columns(columns: &[Vec<f64>], names: Vec<String>) -> Result<Self> {
        if columns.len() != names.len() {
            return Err(Error::ShapeMismatch {
                expected: names.len(),
                got: columns.len(),
            });
        }
        let rows = columns.first().map_or(0, Vec::len);
        for col in columns {
            if col.len() != rows {
                return Err(Error::RowCountMismatch {
                    left: rows,
                    right: col.len(),
                });
            }
        }
        let mut values = Vec::with_capacity(rows * columns.len());
        for i in 0..rows {
            values.extend(columns.iter().map(|c| c[i]));
        }
        Self::new(values, names)
    }

    /// One-column matrix named `name`.
    pub fn column_vector(values: &[f64], name: &str) -> Result<Self> {
        Self::new(values.to_vec(), vec![name.to_string()])
    }

    /// Matrix with generated names `x1..xd`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        let names = (1..=cols).map(|j| format!("x{j}")).collect();
        Self::new(rows.concat(), names)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.names.len()
    }

    pub fn column_names(&self) -> &[String] {
        &self.names
    }

    /// Row-major backing storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.ncols();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ncols() + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Projection onto the listed columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&bad) = columns.iter().find(|&&j| j >= self.ncols()) {
            return Err(Error::PlayerOutOfRange {
                player: bad,
                players: self.ncols(),
            });
        }
        let mut values = Vec::with_capacity(self.rows * columns.len());
        for i in 0..self.rows {
            let row = self.row(i);
            values.extend(columns.iter().map(|&j| row[j]));
        }
        let names = columns.iter().map(|&j| self.names[j].clone()).collect();
        Self::new(values, names)
    }

    /// Projection `X|_S` onto the coalition's columns.
    pub fn project(&self, subset: FeatureSubset) -> Result<Self> {
        if subset.universe() != self.ncols() {
            return Err(Error::ShapeMismatch {
                expected: self.ncols(),
                got: subset.universe(),
            });
        }
        self.select_columns(&subset.members().collect::<Vec<_>>())
    }

    /// New matrix made of the listed rows (repeats allowed).
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let d = self.ncols();
        let mut values = Vec::with_capacity(rows.len() * d);
        for &i in rows {
            if i >= self.rows {
                return Err(Error::InvalidArgument(format!("row {i} out of range")));
            }
            values.extend_from_slice(self.row(i));
        }
        Self::new(values, self.names.clone())
    }

    /// Applies `f` to every entry; the result is revalidated.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.values.iter().map(|&v| f(v)).collect(),
            self.names.clone(),
        )
    }

    /// True when every row equals the first one.
    pub fn is_constant(&self) -> bool {
        let first = self.row(0);
        (1..self.rows).all(|i| self.row(i) == first)
    }
}

/// A coalition `S ⊆ [d]` stored as a bitmask. Universes are capped at 64.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FeatureSubset {
    bits: u64,
    universe: usize,
}

impl FeatureSubset {
    pub const MAX_UNIVERSE: usize = 64;

    pub fn from_bits(bits: u64, universe: usize) -> Result<Self> {
        if universe > Self::MAX_UNIVERSE {
            return Err(Error::TooManyPlayers(universe));
        }
        if universe < 64 && bits >> universe != 0 {
            return Err(Error::InvalidArgument(format!(
                "mask {bits:#b} has members outside a universe of {universe}"
            )));
        }
        Ok(Self { bits, universe })
    }

    pub fn empty(universe: usize) -> Result<Self> {
        Self::from_bits(0, universe)
    }

    pub fn full(universe: usize) -> Result<Self> {
        Self::from_bits(full_mask(universe), universe)
    }

    pub fn from_members(members: &[usize], universe: usize) -> Result<Self> {
        let mut bits = 0u64;
        for &m in members {
            if m >= universe {
                return Err(Error::PlayerOutOfRange {
                    player: m,
                    players: universe,
                });
            }
            bits |= 1 << m;
        }
        Self::from_bits(bits, universe)
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn universe(self) -> usize {
        self.universe
    }

    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn contains(self, player: usize) -> bool {
        player < self.universe && self.bits >> player & 1 == 1
    }

    pub fn with(self, player: usize) -> Self {
        Self {
            bits: self.bits | 1 << player,
            universe: self.universe,
        }
    }

    pub fn without(self, player: usize) -> Self {
        Self {
            bits: self.bits & !(1 << player),
            universe: self.universe,
        }
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.bits & other.bits == 0
    }

    /// Members in increasing order.
    pub fn members(self) -> impl Iterator<Item = usize> {
        let mut rest = self.bits;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let m = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(m)
        })
    }
}

impl fmt::Debug for FeatureSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members()).finish()
    }
}

pub(crate) fn full_mask(universe: usize) -> u64 {
    if universe >= 64 {
        u64::MAX
    } else {
        (1u64 << universe) - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_duplicates() {
        let err = DataMatrix::new(vec![1.0, f64::NAN, 2.0, 3.0], vec!["a".into(), "b".into()]);
        assert_eq!(
            err.unwrap_err(),
            Error::NonFinite {
                column: "b".into(),
                row: 0
            }
        );
        let err = DataMatrix::new(vec![1.0; 4], vec!["a".into(), "a".into()]);
        assert_eq!(err.unwrap_err(), Error::DuplicateColumn("a".into()));
        assert!(matches!(
            DataMatrix::new(vec![1.0], vec!["a".into()]),
            Err(Error::TooFewRows { .. })
        ));
    }

    #[test]
    fn projection_keeps_member_order() {
        let m = DataMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        let s = FeatureSubset::from_members(&[2, 0], 3).unwrap();
        let p = m.project(s).unwrap();
        assert_eq!(p.column_names(), ["x1", "x3"]);
        assert_eq!(p.as_slice(), &[1.0, 3.0, 4.0, 6.0]);
    }

    #[test]
    fn subset_bit_ops() {
        let s = FeatureSubset::from_members(&[1, 3], 4).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.contains(3) && !s.contains(0));
        assert_eq!(s.with(0).members().collect::<Vec<_>>(), vec![0, 1, 3]);
        assert_eq!(s.without(3).bits(), 0b10);
        assert!(FeatureSubset::from_bits(0b10000, 4).is_err());
        assert_eq!(FeatureSubset::full(64).unwrap().len(), 64);
    }
}
