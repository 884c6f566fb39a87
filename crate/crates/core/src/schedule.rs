use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered time slots, each a set of group indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub slots: Vec<Vec<usize>>,
}

impl Schedule {
    pub fn new(slots: Vec<Vec<usize>>) -> Self {
        Schedule { slots }
    }

    /// All groups in one slot.
    pub fn single_slot(num_groups: usize) -> Self {
        Schedule::new(vec![(0..num_groups).collect()])
    }

    /// One group per slot.
    pub fn one_per_slot(num_groups: usize) -> Self {
        Schedule::new((0..num_groups).map(|i| vec![i]).collect())
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn slot_sizes(&self) -> Vec<usize> {
        self.slots.iter().map(Vec::len).collect()
    }

    /// Binary assignment matrix `x[i][t]`.
    pub fn assignment(&self, num_groups: usize) -> Vec<Vec<bool>> {
        let mut x = vec![vec![false; self.num_slots()]; num_groups];
        for (t, slot) in self.slots.iter().enumerate() {
            for &i in slot {
                if i < num_groups {
                    x[i][t] = true;
                }
            }
        }
        x
    }

    /// Checks that slots are nonempty and cover every group exactly once.
    pub fn validate(&self, num_groups: usize) -> Result<()> {
        let mut seen = vec![false; num_groups];
        for (t, slot) in self.slots.iter().enumerate() {
            if slot.is_empty() {
                return Err(Error::Contract(format!("slot {t} is empty")));
            }
            for &i in slot {
                if i >= num_groups {
                    return Err(Error::Contract(format!("slot {t} has unknown group {i}")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Contract(format!("group {i} is scheduled twice")));
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Contract(format!("group {i} is never scheduled")));
        }
        Ok(())
    }
}
