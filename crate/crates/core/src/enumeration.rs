//! Exhaustive enumeration of stable matchings and stable partitions.
//!
//! The backtracking searches only offer partners from the phase-one reduced
//! lists: in every stable partition both neighbours of an agent lie on its
//! reduced list, and an agent left alone has an empty one. Partial
//! assignments are cut as soon as two agents with known predecessors block
//! each other, or a successor is worse than the predecessor. Every leaf is
//! checked with the full stability predicate.
//!
//! The brute-force oracles scan every matching or permutation and are only
//! meant for small `n`.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{AgentId, Cycle, Instance, Matching, Partition};
use crate::partition::{is_solvable, phase_one_lists, stable_partition, ReducedLists};
use crate::stability::{is_stable_matching, is_stable_partition};

/// Default node budget per enumeration call.
pub const DEFAULT_BUDGET: u64 = 100_000_000;
/// Largest `n` accepted by [`brute_all_matchings`].
pub const MATCHING_ORACLE_MAX: usize = 12;
/// Largest `n` accepted by [`brute_all_partitions`].
pub const PARTITION_ORACLE_MAX: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumError {
    #[error("brute force is limited to n <= {max}, got {n}")]
    TooLargeForOracle { n: usize, max: usize },
    #[error("instance admits no stable matching")]
    Unsolvable,
}

/// Result of a budgeted enumeration. When `budget_exhausted` is set the
/// items are a correct but possibly incomplete subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration<T> {
    pub items: Vec<T>,
    pub budget_exhausted: bool,
    pub nodes: u64,
}

impl<T: Ord> Enumeration<T> {
    fn finish(mut items: Vec<T>, budget_exhausted: bool, nodes: u64) -> Self {
        items.sort();
        items.dedup();
        Enumeration {
            items,
            budget_exhausted,
            nodes,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Every stable matching by scanning all perfect matchings (odd `n`: all
/// matchings leaving exactly one agent out).
pub fn brute_all_matchings(inst: &Instance) -> Result<Vec<Matching>, EnumError> {
    let n = inst.n();
    if n > MATCHING_ORACLE_MAX {
        return Err(EnumError::TooLargeForOracle {
            n,
            max: MATCHING_ORACLE_MAX,
        });
    }
    fn rec(
        inst: &Instance,
        partner: &mut Vec<Option<AgentId>>,
        left_out: &mut Option<AgentId>,
        out: &mut Vec<Matching>,
    ) {
        let free = |partner: &[Option<AgentId>], left_out: Option<AgentId>, a: AgentId| {
            partner[a.index()].is_none() && left_out != Some(a)
        };
        let Some(a) = inst.agents().find(|&a| free(partner, *left_out, a)) else {
            let pairs: Vec<(AgentId, AgentId)> = inst
                .agents()
                .filter_map(|a| partner[a.index()].filter(|&b| a < b).map(|b| (a, b)))
                .collect();
            let m = Matching::from_pairs(inst.n(), &pairs).expect("disjoint pairs");
            if is_stable_matching(inst, &m) {
                out.push(m);
            }
            return;
        };
        for b in inst.agents().filter(|&b| b > a) {
            if !free(partner, *left_out, b) {
                continue;
            }
            partner[a.index()] = Some(b);
            partner[b.index()] = Some(a);
            rec(inst, partner, left_out, out);
            partner[a.index()] = None;
            partner[b.index()] = None;
        }
        if inst.n() % 2 == 1 && left_out.is_none() {
            *left_out = Some(a);
            rec(inst, partner, left_out, out);
            *left_out = None;
        }
    }
    let mut out = Vec::new();
    rec(inst, &mut vec![None; n], &mut None, &mut out);
    out.sort();
    Ok(out)
}

/// Every stable partition by scanning all `n!` permutations.
pub fn brute_all_partitions(inst: &Instance) -> Result<Vec<Partition>, EnumError> {
    let n = inst.n();
    if n > PARTITION_ORACLE_MAX {
        return Err(EnumError::TooLargeForOracle {
            n,
            max: PARTITION_ORACLE_MAX,
        });
    }
    let mut succ: Vec<AgentId> = inst.agents().collect();
    let mut out = Vec::new();
    let mut visit = |succ: &[AgentId]| {
        let p = Partition::from_succ(succ.to_vec()).expect("a permutation");
        if is_stable_partition(inst, &p) {
            out.push(p);
        }
    };
    // Heap's algorithm, iterative form.
    let mut c = vec![0usize; n];
    visit(&succ);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                succ.swap(0, i);
            } else {
                succ.swap(c[i], i);
            }
            visit(&succ);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out.sort();
    Ok(out)
}

struct Search<'a> {
    inst: &'a Instance,
    lists: ReducedLists,
    succ: Vec<Option<AgentId>>,
    pred: Vec<Option<AgentId>>,
    cap: Vec<u32>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance, budget: u64) -> Self {
        let n = inst.n();
        Search {
            inst,
            lists: phase_one_lists(inst),
            succ: vec![None; n],
            pred: vec![None; n],
            cap: vec![0; n],
            nodes: 0,
            budget,
            exhausted: false,
        }
    }

    /// Pins every odd cycle of a stable partition.
    fn pin_odd_cycles(&mut self) {
        for c in stable_partition(self.inst).odd_cycles() {
            let a = c.agents();
            for k in 0..a.len() {
                self.link(a[k], a[(k + 1) % a.len()]);
            }
        }
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
        }
        !self.exhausted
    }

    fn link(&mut self, u: AgentId, v: AgentId) {
        self.succ[u.index()] = Some(v);
        self.pred[v.index()] = Some(u);
    }

    fn unlink(&mut self, u: AgentId, v: AgentId) {
        self.succ[u.index()] = None;
        self.pred[v.index()] = None;
    }

    fn rank(&self, a: AgentId, b: AgentId) -> u32 {
        self.inst.rank(a, b)
    }

    /// Does `a`, whose predecessor is set, form a blocking pair with some
    /// agent whose predecessor is also set?
    fn blocks(&self, a: AgentId) -> bool {
        let pa = self.pred[a.index()].expect("predecessor set");
        let limit = self.rank(a, pa) as usize - 1;
        self.inst.prefs(a)[..limit.min(self.inst.n() - 1)]
            .iter()
            .any(
                |&c| matches!(self.pred[c.index()], Some(pc) if self.rank(c, a) < self.rank(c, pc)),
            )
    }

    /// Successor no worse than predecessor, when both are known.
    fn t1(&self, a: AgentId) -> bool {
        match (self.succ[a.index()], self.pred[a.index()]) {
            (Some(s), Some(p)) => self.rank(a, s) <= self.rank(a, p),
            _ => true,
        }
    }

    /// Recomputes `cap` for agents without a predecessor: such an agent
    /// must not take a predecessor ranked below the best agent that
    /// already prefers it to its own predecessor.
    fn refresh_caps(&mut self) {
        let n = self.inst.n();
        self.cap.fill(n as u32 + 1);
        for c in self.inst.agents() {
            let Some(pc) = self.pred[c.index()] else {
                continue;
            };
            let limit = self.rank(c, pc) as usize - 1;
            for &x in &self.inst.prefs(c)[..limit.min(n - 1)] {
                if self.pred[x.index()].is_none() {
                    let r = self.rank(x, c);
                    let cap = &mut self.cap[x.index()];
                    *cap = (*cap).min(r);
                }
            }
        }
    }

    /// Partners still open to `x` in a transposition, given current caps.
    fn pair_domain(&self, x: AgentId) -> Vec<AgentId> {
        self.lists
            .list(x)
            .iter()
            .copied()
            .filter(|&y| {
                self.succ[y.index()].is_none()
                    && self.rank(x, y) <= self.cap[x.index()]
                    && self.rank(y, x) <= self.cap[y.index()]
            })
            .collect()
    }

    /// Forward check for the cycle search: every agent still needs an
    /// admissible predecessor and successor.
    fn viable(&mut self) -> bool {
        self.refresh_caps();
        for x in self.inst.agents() {
            let list = self.lists.list(x);
            if list.is_empty() {
                continue;
            }
            match (self.pred[x.index()], self.succ[x.index()]) {
                (None, succ) => {
                    let ok = list.iter().any(|&y| {
                        self.succ[y.index()].is_none()
                            && self.rank(x, y) <= self.cap[x.index()]
                            && succ.is_none_or(|s| self.rank(x, s) <= self.rank(x, y))
                            && self.pred[y.index()]
                                .is_none_or(|py| self.rank(y, x) <= self.rank(y, py))
                    });
                    if !ok {
                        return false;
                    }
                }
                (Some(px), None) => {
                    let ok = list.iter().any(|&y| {
                        self.pred[y.index()].is_none()
                            && self.rank(x, y) <= self.rank(x, px)
                            && self.rank(y, x) <= self.cap[y.index()]
                    });
                    if !ok {
                        return false;
                    }
                }
                (Some(_), Some(_)) => {}
            }
        }
        true
    }

    fn lowest_open(&self) -> Option<AgentId> {
        self.succ.iter().position(Option::is_none).map(AgentId::new)
    }

    fn partition(&self) -> Partition {
        Partition::from_succ(self.succ.iter().map(|s| s.expect("complete")).collect())
            .expect("complete assignment is a permutation")
    }

    /// Fills the open agents with transpositions, plus at most
    /// `fixed_slots` fixed points on agents with empty reduced lists.
    /// Branches on the open agent with the fewest admissible partners.
    fn pairs(&mut self, fixed_slots: usize, out: &mut Vec<Partition>) {
        if !self.tick() {
            return;
        }
        self.refresh_caps();
        let mut best: Option<(AgentId, Vec<AgentId>)> = None;
        for x in self
            .inst
            .agents()
            .filter(|x| self.succ[x.index()].is_none())
        {
            if self.lists.list(x).is_empty() {
                if fixed_slots == 0 {
                    return;
                }
                best = Some((x, Vec::new()));
                break;
            }
            let domain = self.pair_domain(x);
            if domain.is_empty() {
                return;
            }
            if best.as_ref().is_none_or(|(_, d)| domain.len() < d.len()) {
                best = Some((x, domain));
            }
        }
        let Some((a, domain)) = best else {
            let p = self.partition();
            if is_stable_partition(self.inst, &p) {
                out.push(p);
            }
            return;
        };
        if domain.is_empty() {
            self.link(a, a);
            if !self.blocks(a) {
                self.pairs(fixed_slots - 1, out);
            }
            self.unlink(a, a);
            return;
        }
        for b in domain {
            self.link(a, b);
            self.link(b, a);
            if !self.blocks(a) && !self.blocks(b) {
                self.pairs(fixed_slots, out);
            }
            self.unlink(a, b);
            self.unlink(b, a);
            if self.exhausted {
                return;
            }
        }
    }

    /// Fills the open agents with cycles of any length; agents with empty
    /// reduced lists become fixed points.
    fn cycles(&mut self, out: &mut Vec<Partition>) {
        if !self.tick() || !self.viable() {
            return;
        }
        let Some(s) = self.lowest_open() else {
            let p = self.partition();
            if is_stable_partition(self.inst, &p) {
                out.push(p);
            }
            return;
        };
        if self.lists.list(s).is_empty() {
            self.link(s, s);
            if !self.blocks(s) {
                self.cycles(out);
            }
            self.unlink(s, s);
            return;
        }
        self.path(s, s, 1, out);
    }

    fn path(&mut self, s: AgentId, u: AgentId, len: usize, out: &mut Vec<Partition>) {
        if !self.tick() || !self.viable() {
            return;
        }
        let list = self.lists.list(u).to_vec();
        for v in list {
            // Candidates are in preference order; past the predecessor T1 fails.
            if let Some(p) = self.pred[u.index()] {
                if self.rank(u, v) > self.rank(u, p) {
                    break;
                }
            }
            if v == s {
                if len < 2 {
                    continue;
                }
                self.link(u, s);
                if self.t1(s) && !self.blocks(s) {
                    self.cycles(out);
                }
                self.unlink(u, s);
            } else if self.succ[v.index()].is_none() && self.pred[v.index()].is_none() {
                self.link(u, v);
                if !self.blocks(v) {
                    self.path(s, v, len + 1, out);
                }
                self.unlink(u, v);
            }
            if self.exhausted {
                return;
            }
        }
    }
}

/// Every stable matching. Fails with [`EnumError::Unsolvable`] when there
/// is none.
pub fn enum_stable_matchings(
    inst: &Instance,
    budget: u64,
) -> Result<Enumeration<Matching>, EnumError> {
    if !is_solvable(inst) {
        return Err(EnumError::Unsolvable);
    }
    let mut search = Search::new(inst, budget);
    let mut found = Vec::new();
    search.pairs(inst.n() % 2, &mut found);
    let items: Vec<Matching> = found
        .iter()
        .map(|p| {
            let pairs: Vec<(AgentId, AgentId)> = p
                .cycles()
                .iter()
                .filter(|c| c.len() == 2)
                .map(|c| (c.agents()[0], c.agents()[1]))
                .collect();
            Matching::from_pairs(inst.n(), &pairs).expect("disjoint pairs")
        })
        .filter(|m| is_stable_matching(inst, m))
        .collect();
    Ok(Enumeration::finish(items, search.exhausted, search.nodes))
}

/// Every reduced stable partition: the invariant odd cycles plus
/// transpositions on the remaining agents.
pub fn enum_reduced_partitions(inst: &Instance, budget: u64) -> Enumeration<Partition> {
    let mut search = Search::new(inst, budget);
    search.pin_odd_cycles();
    let mut found = Vec::new();
    search.pairs(0, &mut found);
    Enumeration::finish(found, search.exhausted, search.nodes)
}

/// Every stable partition.
///
/// Splitting a long even cycle of a stable partition either way gives a
/// stable partition again, so each stable partition sits above reduced
/// ones, and each of its long cycles alternates between two reduced stable
/// partitions that differ only on that cycle. The search collects those
/// alternating cycles from pairs of reduced partitions, in both
/// orientations, and substitutes disjoint sets of them back into each
/// reduced partition, keeping the stable results.
pub fn enum_all_partitions(inst: &Instance, budget: u64) -> Enumeration<Partition> {
    let reduced = enum_reduced_partitions(inst, budget);
    let mut all = all_partitions_from_reduced(inst, &reduced.items, budget);
    all.budget_exhausted |= reduced.budget_exhausted;
    all.nodes += reduced.nodes;
    all
}

/// Extends a list of reduced stable partitions to all stable partitions
/// (see [`enum_all_partitions`]).
pub fn all_partitions_from_reduced(
    inst: &Instance,
    reduced: &[Partition],
    budget: u64,
) -> Enumeration<Partition> {
    let mut candidates = BTreeSet::new();
    for (i, r) in reduced.iter().enumerate() {
        for other in &reduced[i + 1..] {
            for seq in alternating_cycles(r, other) {
                let reversed: Vec<AgentId> = std::iter::once(seq[0])
                    .chain(seq[1..].iter().rev().copied())
                    .collect();
                candidates.insert(Cycle::new(seq));
                candidates.insert(Cycle::new(reversed));
            }
        }
    }
    let mut walk = SubsetWalk {
        inst,
        nodes: 0,
        budget,
        exhausted: false,
        found: reduced.to_vec(),
    };
    for r in reduced {
        let fitting: Vec<&Cycle> = candidates
            .iter()
            .filter(|c| fits(r, c) && is_stable_partition(inst, &substitute(r, &[c])))
            .collect();
        let mut used = vec![false; inst.n()];
        walk.extend(r, &fitting, 0, &mut Vec::new(), &mut used);
        if walk.exhausted {
            break;
        }
    }
    Enumeration::finish(walk.found, walk.exhausted, walk.nodes)
}

/// Cycles of the union of two reduced partitions on the agents where they
/// differ, each listed from a pair of `r`.
fn alternating_cycles(r: &Partition, s: &Partition) -> Vec<Vec<AgentId>> {
    let mut seen = vec![false; r.n()];
    let mut out = Vec::new();
    for a in (0..r.n()).map(AgentId::new) {
        if seen[a.index()] || r.succ(a) == s.succ(a) {
            continue;
        }
        let mut seq = Vec::new();
        let mut x = a;
        loop {
            let y = r.succ(x);
            seen[x.index()] = true;
            seen[y.index()] = true;
            seq.push(x);
            seq.push(y);
            x = s.succ(y);
            if x == a {
                break;
            }
        }
        out.push(seq);
    }
    out
}

/// `r` pairs the agents of `c` along one of its two adjacent decompositions.
fn fits(r: &Partition, c: &Cycle) -> bool {
    let a = c.agents();
    let len = a.len();
    (0..2).any(|shift| {
        (0..len / 2).all(|i| r.succ(a[(2 * i + shift) % len]) == a[(2 * i + shift + 1) % len])
    })
}

fn substitute(r: &Partition, cycles: &[&Cycle]) -> Partition {
    let mut succ = r.successors().to_vec();
    for c in cycles {
        let a = c.agents();
        for k in 0..a.len() {
            succ[a[k].index()] = a[(k + 1) % a.len()];
        }
    }
    Partition::from_succ(succ).expect("substituted cycles cover the same agents")
}

struct SubsetWalk<'a> {
    inst: &'a Instance,
    nodes: u64,
    budget: u64,
    exhausted: bool,
    found: Vec<Partition>,
}

impl SubsetWalk<'_> {
    fn extend<'c>(
        &mut self,
        r: &Partition,
        fitting: &[&'c Cycle],
        start: usize,
        chosen: &mut Vec<&'c Cycle>,
        used: &mut [bool],
    ) {
        for j in start..fitting.len() {
            let c = fitting[j];
            if c.agents().iter().any(|a| used[a.index()]) {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                self.exhausted = true;
                return;
            }
            chosen.push(c);
            let p = substitute(r, chosen);
            if chosen.len() == 1 || is_stable_partition(self.inst, &p) {
                self.found.push(p);
                for a in c.agents() {
                    used[a.index()] = true;
                }
                self.extend(r, fitting, j + 1, chosen, used);
                for a in c.agents() {
                    used[a.index()] = false;
                }
            }
            chosen.pop();
            if self.exhausted {
                return;
            }
        }
    }
}

/// Every stable partition by direct backtracking over successors, without
/// using any structure of the solution set. Exponential in the worst case;
/// meant for cross-checking on small instances.
pub fn enum_all_partitions_direct(inst: &Instance, budget: u64) -> Enumeration<Partition> {
    let mut search = Search::new(inst, budget);
    let mut found = Vec::new();
    search.cycles(&mut found);
    Enumeration::finish(found, search.exhausted, search.nodes)
}

/// All solution sets of one instance. The fixed point of a solvable odd
/// instance counts as a stable pair `(a, a)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolutionSets {
    pub matchings: Vec<Matching>,
    pub reduced_partitions: Vec<Partition>,
    pub all_partitions: Vec<Partition>,
    pub stable_cycles: BTreeSet<Cycle>,
    pub reduced_stable_cycles: BTreeSet<Cycle>,
    pub stable_pairs: BTreeSet<(AgentId, AgentId)>,
    pub budget_exhausted: bool,
}

/// Derives stable cycles and stable pairs from populated solution lists.
pub fn collect_cycles_and_pairs(mut sets: SolutionSets) -> SolutionSets {
    sets.stable_cycles = sets
        .all_partitions
        .iter()
        .flat_map(Partition::cycles)
        .collect();
    sets.reduced_stable_cycles = sets
        .reduced_partitions
        .iter()
        .flat_map(Partition::cycles)
        .collect();
    sets.stable_pairs = sets
        .matchings
        .iter()
        .flat_map(|m| {
            let mut pairs = m.pairs();
            pairs.extend(m.unmatched().into_iter().map(|a| (a, a)));
            pairs
        })
        .collect();
    sets
}

/// Runs all three enumerations (each with its own budget) and collects the
/// cycle and pair sets.
pub fn solution_sets(inst: &Instance, budget: u64) -> SolutionSets {
    let (matchings, m_exhausted) = match enum_stable_matchings(inst, budget) {
        Ok(e) => (e.items, e.budget_exhausted),
        Err(_) => (Vec::new(), false),
    };
    let reduced = enum_reduced_partitions(inst, budget);
    let all = all_partitions_from_reduced(inst, &reduced.items, budget);
    collect_cycles_and_pairs(SolutionSets {
        matchings,
        budget_exhausted: m_exhausted || reduced.budget_exhausted || all.budget_exhausted,
        reduced_partitions: reduced.items,
        all_partitions: all.items,
        ..SolutionSets::default()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(rows: &[&[usize]]) -> Instance {
        let rows: Vec<Vec<usize>> = rows.iter().map(|r| r.to_vec()).collect();
        Instance::from_indices(&rows).unwrap()
    }

    #[test]
    fn two_agents() {
        let i = inst(&[&[1], &[0]]);
        assert_eq!(brute_all_matchings(&i).unwrap().len(), 1);
        assert_eq!(brute_all_partitions(&i).unwrap().len(), 1);
        assert_eq!(enum_stable_matchings(&i, DEFAULT_BUDGET).unwrap().len(), 1);
        assert_eq!(enum_all_partitions(&i, DEFAULT_BUDGET).len(), 1);
        let sets = solution_sets(&i, DEFAULT_BUDGET);
        assert_eq!(sets.stable_pairs.len(), 1);
    }

    #[test]
    fn three_cycle_has_no_matching() {
        let i = inst(&[&[1, 2], &[2, 0], &[0, 1]]);
        assert!(brute_all_matchings(&i).unwrap().is_empty());
        assert_eq!(
            enum_stable_matchings(&i, DEFAULT_BUDGET),
            Err(EnumError::Unsolvable)
        );
        let all = enum_all_partitions(&i, DEFAULT_BUDGET);
        assert_eq!(all.items, brute_all_partitions(&i).unwrap());
        assert_eq!(all.len(), 1);
    }

    #[test]
    fn odd_solvable_counts_fixed_point_pair() {
        let i = inst(&[&[1, 2], &[0, 2], &[0, 1]]);
        let sets = solution_sets(&i, DEFAULT_BUDGET);
        assert_eq!(sets.matchings.len(), 1);
        assert_eq!(
            sets.stable_pairs.iter().copied().collect::<Vec<_>>(),
            vec![(AgentId(0), AgentId(1)), (AgentId(2), AgentId(2))]
        );
    }

    #[test]
    fn oracle_guards() {
        let rows: Vec<Vec<usize>> = (0..13)
            .map(|i| (0..13).filter(|&j| j != i).collect())
            .collect();
        let big = Instance::from_indices(&rows).unwrap();
        assert!(matches!(
            brute_all_matchings(&big),
            Err(EnumError::TooLargeForOracle { .. })
        ));
        assert!(matches!(
            brute_all_partitions(&big),
            Err(EnumError::TooLargeForOracle { .. })
        ));
    }

    #[test]
    fn tiny_budget_is_reported() {
        let i = inst(&[&[1, 2, 3], &[2, 3, 0], &[3, 0, 1], &[0, 1, 2]]);
        let e = enum_all_partitions(&i, 1);
        assert!(e.budget_exhausted);
    }
}
