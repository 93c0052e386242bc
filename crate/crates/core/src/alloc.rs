//! Binary user × subband allocation matrix shared by every scheduler.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Allocation {
    n_user: usize,
    n_subband: usize,
    cells: Vec<bool>,
}

impl Allocation {
    pub fn empty(n_user: usize, n_subband: usize) -> Self {
        Self {
            n_user,
            n_subband,
            cells: vec![false; n_user * n_subband],
        }
    }

    pub fn n_user(&self) -> usize {
        self.n_user
    }

    pub fn n_subband(&self) -> usize {
        self.n_subband
    }

    #[inline]
    pub fn get(&self, user: usize, subband: usize) -> bool {
        self.cells[user * self.n_subband + subband]
    }

    #[inline]
    pub fn set(&mut self, user: usize, subband: usize, on: bool) {
        self.cells[user * self.n_subband + subband] = on;
    }

    /// Users scheduled on `subband`, ascending.
    pub fn users_on(&self, subband: usize) -> Vec<usize> {
        (0..self.n_user).filter(|&k| self.get(k, subband)).collect()
    }

    /// Subbands assigned to `user`, ascending.
    pub fn subbands_of(&self, user: usize) -> Vec<usize> {
        (0..self.n_subband).filter(|&j| self.get(user, j)).collect()
    }

    pub fn column_count(&self, subband: usize) -> usize {
        (0..self.n_user).filter(|&k| self.get(k, subband)).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&c| c)
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// Checks the per-subband co-scheduling limit and the expected shape.
    pub fn validate(&self, n_user: usize, n_subband: usize, max_per_subband: usize) -> Result<()> {
        if self.n_user != n_user || self.n_subband != n_subband {
            return Err(Error::Allocation(format!(
                "allocation is {}x{}, environment is {}x{}",
                self.n_user, self.n_subband, n_user, n_subband
            )));
        }
        for j in 0..n_subband {
            let c = self.column_count(j);
            if c > max_per_subband {
                return Err(Error::Allocation(format!(
                    "subband {j} carries {c} users, limit is {max_per_subband}"
                )));
            }
        }
        Ok(())
    }
}
