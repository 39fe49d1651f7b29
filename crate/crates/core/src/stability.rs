//! Blocking pairs and stability predicates for matchings and partitions.

use thiserror::Error;

use crate::model::{AgentId, Instance, Matching, Partition};

/// Why a permutation fails to be a stable partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PartitionViolation {
    #[error("{0} ranks its predecessor above its successor")]
    SuccessorWorse(AgentId),
    #[error("{0} and {1} both prefer each other to their predecessors")]
    BlockingPair(AgentId, AgentId),
    #[error("partition has {got} agents, instance has {expected}")]
    SizeMismatch { expected: usize, got: usize },
}

#[inline]
fn partner_rank(inst: &Instance, m: &Matching, i: AgentId) -> u32 {
    inst.rank(i, m.partner(i).unwrap_or(i))
}

/// `i` and `j` are distinct, not matched together, and each prefers the
/// other to its current situation (being unmatched is worst).
pub fn is_blocking_pair(inst: &Instance, m: &Matching, i: AgentId, j: AgentId) -> bool {
    i != j
        && m.partner(i) != Some(j)
        && inst.rank(i, j) < partner_rank(inst, m, i)
        && inst.rank(j, i) < partner_rank(inst, m, j)
}

/// First blocking pair `(i, j)` with `i < j`, if any.
pub fn find_blocking_pair(inst: &Instance, m: &Matching) -> Option<(AgentId, AgentId)> {
    let mut found: Option<(AgentId, AgentId)> = None;
    for i in inst.agents() {
        let limit = partner_rank(inst, m, i) as usize;
        for &j in &inst.prefs(i)[..limit.saturating_sub(1).min(inst.n() - 1)] {
            if inst.rank(j, i) < partner_rank(inst, m, j) {
                let pair = if i < j { (i, j) } else { (j, i) };
                if found.is_none_or(|f| pair < f) {
                    found = Some(pair);
                }
            }
        }
    }
    found
}

/// Stable means no blocking pair; an odd instance may leave agents unmatched.
pub fn is_stable_matching(inst: &Instance, m: &Matching) -> bool {
    m.n() == inst.n() && find_blocking_pair(inst, m).is_none()
}

/// Checks both partition conditions and reports the first violation.
pub fn check_partition(inst: &Instance, p: &Partition) -> Result<(), PartitionViolation> {
    if p.n() != inst.n() {
        return Err(PartitionViolation::SizeMismatch {
            expected: inst.n(),
            got: p.n(),
        });
    }
    for a in inst.agents() {
        if inst.rank(a, p.succ(a)) > inst.rank(a, p.pred(a)) {
            return Err(PartitionViolation::SuccessorWorse(a));
        }
    }
    let mut found: Option<(AgentId, AgentId)> = None;
    for a in inst.agents() {
        let limit = inst.rank(a, p.pred(a)) as usize - 1;
        for &b in &inst.prefs(a)[..limit.min(inst.n() - 1)] {
            if inst.rank(b, a) < inst.rank(b, p.pred(b)) {
                let pair = if a < b { (a, b) } else { (b, a) };
                if found.is_none_or(|f| pair < f) {
                    found = Some(pair);
                }
            }
        }
    }
    match found {
        Some((a, b)) => Err(PartitionViolation::BlockingPair(a, b)),
        None => Ok(()),
    }
}

pub fn is_stable_partition(inst: &Instance, p: &Partition) -> bool {
    check_partition(inst, p).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(rows: &[&[usize]]) -> Instance {
        let rows: Vec<Vec<usize>> = rows.iter().map(|r| r.to_vec()).collect();
        Instance::from_indices(&rows).unwrap()
    }

    fn ids(v: &[usize]) -> Vec<AgentId> {
        v.iter().map(|&i| AgentId::new(i)).collect()
    }

    #[test]
    fn two_agents_always_stable() {
        let i = inst(&[&[1], &[0]]);
        let m = Matching::from_pairs(2, &[(AgentId(0), AgentId(1))]).unwrap();
        assert!(is_stable_matching(&i, &m));
        assert!(!is_stable_matching(&i, &Matching::empty(2)));
        assert_eq!(
            find_blocking_pair(&i, &Matching::empty(2)),
            Some((AgentId(0), AgentId(1)))
        );
    }

    #[test]
    fn three_cycle_instance() {
        // 0 likes 1, 1 likes 2, 2 likes 0: no stable matching, the 3-cycle is stable.
        let i = inst(&[&[1, 2], &[2, 0], &[0, 1]]);
        let forward = Partition::from_succ(ids(&[1, 2, 0])).unwrap();
        assert!(is_stable_partition(&i, &forward));
        let backward = Partition::from_succ(ids(&[2, 0, 1])).unwrap();
        assert_eq!(
            check_partition(&i, &backward),
            Err(PartitionViolation::SuccessorWorse(AgentId(0)))
        );
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            let m = Matching::from_pairs(3, &[(AgentId(a), AgentId(b))]).unwrap();
            assert!(!is_stable_matching(&i, &m));
        }
    }

    #[test]
    fn identity_is_blocked() {
        let i = inst(&[&[1, 2], &[2, 0], &[0, 1]]);
        assert!(matches!(
            check_partition(&i, &Partition::identity(3)),
            Err(PartitionViolation::BlockingPair(..))
        ));
    }

    #[test]
    fn matching_and_partition_agree() {
        let i = inst(&[&[1, 2, 3], &[0, 2, 3], &[3, 0, 1], &[2, 0, 1]]);
        let good =
            Matching::from_pairs(4, &[(AgentId(0), AgentId(1)), (AgentId(2), AgentId(3))]).unwrap();
        let bad =
            Matching::from_pairs(4, &[(AgentId(0), AgentId(2)), (AgentId(1), AgentId(3))]).unwrap();
        assert!(is_stable_matching(&i, &good));
        assert!(is_stable_partition(&i, &good.to_partition()));
        assert!(!is_stable_matching(&i, &bad));
        assert!(!is_stable_partition(&i, &bad.to_partition()));
    }
}
