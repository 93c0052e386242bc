use crate::error::{Error, Result};

/// `C(n, k)` in `u128`; saturates instead of overflowing.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
    }
    acc
}

/// Every `m`-subset of `{0, …, n_user−1} ∪ {null}` in lexicographic order,
/// with `null` ranked after every real user.
///
/// Only the real users of each subset are stored, so `{u, null}` schedules
/// `u` alone. `null` appears at most once per subset, so the empty decision
/// is never offered for `m ≥ 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionTable {
    n_user: usize,
    m: usize,
    actions: Vec<Vec<usize>>,
}

impl ActionTable {
    pub fn new(n_user: usize, m: usize) -> Result<Self> {
        if n_user == 0 {
            return Err(Error::config("action table needs at least one user"));
        }
        if m == 0 || m > n_user + 1 {
            return Err(Error::config(format!(
                "users per subband must be in 1..={} for {n_user} users, got {m}",
                n_user + 1
            )));
        }
        let null = n_user;
        let mut actions = Vec::with_capacity(binomial(n_user as u64 + 1, m as u64) as usize);
        let mut combo: Vec<usize> = (0..m).collect();
        loop {
            actions.push(combo.iter().copied().filter(|&u| u != null).collect());
            // advance to the next combination of m out of n_user+1
            let Some(i) = (0..m).rev().find(|&i| combo[i] < n_user + 1 - m + i) else {
                break;
            };
            combo[i] += 1;
            for t in i + 1..m {
                combo[t] = combo[t - 1] + 1;
            }
        }
        Ok(Self { n_user, m, actions })
    }

    pub fn n_user(&self) -> usize {
        self.n_user
    }

    /// Users per subband, `M`.
    pub fn max_users(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Real users of action `index`, ascending.
    pub fn users(&self, index: usize) -> Result<&[usize]> {
        self.actions
            .get(index)
            .map(Vec::as_slice)
            .ok_or(Error::ActionOutOfRange {
                index,
                size: self.actions.len(),
            })
    }

    /// Index of the action scheduling exactly `users` (ascending, no
    /// duplicates), if the table offers it.
    pub fn index_of(&self, users: &[usize]) -> Option<usize> {
        self.actions.iter().position(|a| a == users)
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.actions.iter().map(Vec::as_slice)
    }
}
