use super::actions::ActionTable;
use crate::alloc::Allocation;
use crate::error::{Error, Result};

/// Position in the scheduling tree: subbands `0..next_subband` are decided,
/// the rest are empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EpisodeState {
    pub next_subband: usize,
    pub allocation: Allocation,
}

impl EpisodeState {
    pub fn root(n_user: usize, n_subband: usize) -> Self {
        Self {
            next_subband: 0,
            allocation: Allocation::empty(n_user, n_subband),
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.next_subband == self.allocation.n_subband()
    }

    /// Schedules action `action` on the next subband and returns the child.
    pub fn step(&self, action: usize, table: &ActionTable) -> Result<EpisodeState> {
        if self.is_terminal() {
            return Err(Error::TerminalState);
        }
        if table.n_user() != self.allocation.n_user() {
            return Err(Error::Shape(format!(
                "action table is for {} users, episode has {}",
                table.n_user(),
                self.allocation.n_user()
            )));
        }
        let mut next = self.clone();
        for &u in table.users(action)? {
            next.allocation.set(u, self.next_subband, true);
        }
        next.next_subband += 1;
        Ok(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pair_action_fills_first_column() {
        let table = ActionTable::new(4, 2).unwrap();
        let root = EpisodeState::root(4, 10);
        let a = table.index_of(&[1, 2]).unwrap();
        let s = root.step(a, &table).unwrap();
        assert_eq!(s.allocation.users_on(0), vec![1, 2]);
        assert_eq!(s.next_subband, 1);
        assert_eq!(root.next_subband, 0);
        assert!(root.allocation.is_empty());
    }

    #[test]
    fn null_slot_contributes_nothing() {
        let table = ActionTable::new(4, 2).unwrap();
        let a = table.index_of(&[0]).unwrap();
        let s = EpisodeState::root(4, 3).step(a, &table).unwrap();
        assert_eq!(s.allocation.count(), 1);
    }

    #[test]
    fn terminal_rejects_step() {
        let table = ActionTable::new(2, 2).unwrap();
        let mut s = EpisodeState::root(2, 3);
        for _ in 0..3 {
            assert!(!s.is_terminal());
            s = s.step(0, &table).unwrap();
        }
        assert!(s.is_terminal());
        assert!(matches!(s.step(0, &table), Err(Error::TerminalState)));
        assert!(EpisodeState::root(2, 3).step(3, &table).is_err());
    }

    #[test]
    fn leaf_count_matches_enumeration() {
        let table = ActionTable::new(2, 2).unwrap();
        let mut frontier = vec![EpisodeState::root(2, 3)];
        while !frontier[0].is_terminal() {
            frontier = frontier
                .iter()
                .flat_map(|s| (0..table.len()).map(|a| s.step(a, &table).unwrap()).collect::<Vec<_>>())
                .collect();
        }
        assert_eq!(frontier.len(), 27);
        let unique: std::collections::HashSet<_> = frontier.iter().map(|s| s.allocation.clone()).collect();
        assert_eq!(unique.len(), 27);
    }

    proptest! {
        #[test]
        fn random_episodes_respect_limits(
            n_user in 1usize..6, m_raw in 1usize..4, n_subband in 1usize..12,
            picks in proptest::collection::vec(0usize..1000, 12),
        ) {
            let m = 1 + (m_raw - 1) % (n_user + 1).min(3);
            let table = ActionTable::new(n_user, m).unwrap();
            let mut s = EpisodeState::root(n_user, n_subband);
            let mut steps = 0;
            while !s.is_terminal() {
                let next = s.step(picks[steps] % table.len(), &table).unwrap();
                for j in next.next_subband..n_subband {
                    prop_assert_eq!(next.allocation.column_count(j), 0);
                }
                s = next;
                steps += 1;
            }
            prop_assert_eq!(steps, n_subband);
            prop_assert!(s.allocation.validate(n_user, n_subband, m).is_ok());
        }
    }
}
