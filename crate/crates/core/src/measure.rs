//! Discretized positive measure spaces.
//!
//! The outer index space and each per-node inner space are finite lists of
//! atoms with positive masses. A discrete space of this kind is itself an
//! exact instance of the continuous definitions (integrals become weighted
//! sums), so the theorems checked elsewhere hold as identities rather than
//! approximations; counting measure (all weights 1) recovers the discrete
//! setting.

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};

/// A single atom of a discrete measure space: a label and a positive mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureAtom {
    pub id: String,
    pub weight: f64,
}

impl MeasureAtom {
    pub fn new(id: impl Into<String>, weight: f64) -> Self {
        Self {
            id: id.into(),
            weight,
        }
    }
}

/// An ordered finite measure space with positive atom masses and unique ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasureSpace {
    pub atoms: Vec<MeasureAtom>,
}

impl DiscreteMeasureSpace {
    pub fn new(atoms: Vec<MeasureAtom>) -> Self {
        Self { atoms }
    }

    /// Counting-measure space with `n` atoms labeled `prefix0..prefix{n-1}`.
    pub fn counting(prefix: &str, n: usize) -> Self {
        Self {
            atoms: (0..n)
                .map(|i| MeasureAtom::new(format!("{prefix}{i}"), 1.0))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Total mass, summed left to right.
    pub fn total_mass(&self) -> f64 {
        let mut acc = 0.0;
        for atom in &self.atoms {
            acc += atom.weight;
        }
        acc
    }

    /// Check the type invariants: nonempty, positive finite weights,
    /// unique ids.
    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(FrameError::EmptySpace);
        }
        for atom in &self.atoms {
            if atom.weight <= 0.0 || !atom.weight.is_finite() {
                return Err(FrameError::NonPositiveWeight(format!(
                    "atom '{}' has weight {}",
                    atom.id, atom.weight
                )));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for atom in &self.atoms {
            if !seen.insert(atom.id.as_str()) {
                return Err(FrameError::DuplicateId(atom.id.clone()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_atom_total_mass() {
        let space = DiscreteMeasureSpace::new(vec![MeasureAtom::new("w0", 1.0)]);
        assert_eq!(space.total_mass(), 1.0);
    }

    #[test]
    fn total_mass_direct_sum() {
        let space = DiscreteMeasureSpace::new(vec![
            MeasureAtom::new("a", 0.5),
            MeasureAtom::new("b", 0.5),
            MeasureAtom::new("c", 2.0),
        ]);
        assert_eq!(space.total_mass(), 3.0);
    }

    #[test]
    fn total_mass_matches_resummation() {
        // 100 deterministic positive weights against an independent loop.
        let atoms: Vec<MeasureAtom> = (0..100)
            .map(|i| MeasureAtom::new(format!("w{i}"), 0.01 + ((i * 37) as f64 * 0.11).sin().abs()))
            .collect();
        let space = DiscreteMeasureSpace::new(atoms.clone());
        let mut oracle = 0.0;
        for a in atoms.iter().rev() {
            oracle += a.weight;
        }
        let relative = (space.total_mass() - oracle).abs() / oracle;
        assert!(relative <= 1e-12);
    }

    #[test]
    fn validates_distinct_positive_atoms() {
        let space = DiscreteMeasureSpace::new(vec![
            MeasureAtom::new("w1", 1.0),
            MeasureAtom::new("w2", 1.0),
        ]);
        assert!(space.validate().is_ok());
    }

    #[test]
    fn rejects_zero_weight() {
        let space = DiscreteMeasureSpace::new(vec![MeasureAtom::new("w1", 0.0)]);
        assert!(matches!(
            space.validate().unwrap_err(),
            FrameError::NonPositiveWeight(_)
        ));
    }

    #[test]
    fn rejects_nan_weight() {
        let space = DiscreteMeasureSpace::new(vec![MeasureAtom::new("w1", f64::NAN)]);
        assert!(matches!(
            space.validate().unwrap_err(),
            FrameError::NonPositiveWeight(_)
        ));
    }

    #[test]
    fn rejects_duplicate_id() {
        let space = DiscreteMeasureSpace::new(vec![
            MeasureAtom::new("w1", 1.0),
            MeasureAtom::new("w1", 2.0),
        ]);
        assert!(matches!(
            space.validate().unwrap_err(),
            FrameError::DuplicateId(_)
        ));
    }

    #[test]
    fn rejects_empty_space() {
        let space = DiscreteMeasureSpace::new(vec![]);
        assert!(matches!(
            space.validate().unwrap_err(),
            FrameError::EmptySpace
        ));
    }
}
