//! Instances, matchings, partitions and their cycles.
//!
//! Agent ids are 0-based here; the text and JSON formats use 1-based labels.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

/// Index of an agent inside its instance, always `< n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AgentId(pub u32);

impl AgentId {
    #[inline]
    pub fn new(index: usize) -> Self {
        AgentId(index as u32)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// 1-based label used by the text formats.
    pub fn label(self) -> u32 {
        self.0 + 1
    }
}

impl From<usize> for AgentId {
    fn from(index: usize) -> Self {
        AgentId::new(index)
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.label())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("an instance needs at least 2 agents, got {0}")]
    TooSmall(usize),
    #[error("expected {expected} preference rows, got {got}")]
    RowCount { expected: usize, got: usize },
    #[error("{agent}: preference list has length {len}, expected {expected}")]
    BadLength {
        agent: AgentId,
        len: usize,
        expected: usize,
    },
    #[error("{agent}: preference list is not a permutation of the other agents")]
    RowNotPermutation { agent: AgentId },
}

/// A roommates instance with complete strict preferences.
///
/// `rank(i, j)` is the 1-based position of `j` in `i`'s list. `rank(i, i)`
/// is the sentinel `n`, which sorts below every real agent: an agent always
/// prefers any partner to being alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    prefs: Vec<AgentId>,
    rank: Vec<u32>,
}

impl Instance {
    pub fn new(n: usize, rows: Vec<Vec<AgentId>>) -> Result<Self, InstanceError> {
        if n < 2 {
            return Err(InstanceError::TooSmall(n));
        }
        if rows.len() != n {
            return Err(InstanceError::RowCount {
                expected: n,
                got: rows.len(),
            });
        }
        let width = n - 1;
        let mut prefs = Vec::with_capacity(n * width);
        let mut rank = vec![0u32; n * n];
        for (i, row) in rows.iter().enumerate() {
            let agent = AgentId::new(i);
            if row.len() != width {
                return Err(InstanceError::BadLength {
                    agent,
                    len: row.len(),
                    expected: width,
                });
            }
            let ranks = &mut rank[i * n..(i + 1) * n];
            ranks[i] = n as u32;
            for (k, &j) in row.iter().enumerate() {
                let j = j.index();
                if j >= n || j == i || ranks[j] != 0 {
                    return Err(InstanceError::RowNotPermutation { agent });
                }
                ranks[j] = (k + 1) as u32;
            }
            prefs.extend_from_slice(row);
        }
        Ok(Instance { n, prefs, rank })
    }

    /// Builds an instance from plain 0-based indices.
    pub fn from_indices(rows: &[Vec<usize>]) -> Result<Self, InstanceError> {
        let rows: Vec<Vec<AgentId>> = rows
            .iter()
            .map(|r| r.iter().map(|&j| AgentId::new(j)).collect())
            .collect();
        Instance::new(rows.len(), rows)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> + '_ {
        (0..self.n).map(AgentId::new)
    }

    /// Preference list of `i`, most preferred first.
    #[inline]
    pub fn prefs(&self, i: AgentId) -> &[AgentId] {
        let w = self.n - 1;
        &self.prefs[i.index() * w..(i.index() + 1) * w]
    }

    #[inline]
    pub fn rank(&self, i: AgentId, j: AgentId) -> u32 {
        self.rank[i.index() * self.n + j.index()]
    }

    /// Does `i` strictly prefer `a` to `b`?
    #[inline]
    pub fn prefers(&self, i: AgentId, a: AgentId, b: AgentId) -> bool {
        self.rank(i, a) < self.rank(i, b)
    }

    /// The sub-instance on agents `0..k`, each list restricted to those agents.
    pub fn prefix(&self, k: usize) -> Result<Instance, InstanceError> {
        let rows = (0..k)
            .map(|i| {
                self.prefs(AgentId::new(i))
                    .iter()
                    .copied()
                    .filter(|j| j.index() < k)
                    .collect()
            })
            .collect();
        Instance::new(k, rows)
    }

    pub fn rows(&self) -> Vec<Vec<AgentId>> {
        self.agents().map(|i| self.prefs(i).to_vec()).collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchingError {
    #[error("agent label {0} out of range")]
    OutOfRange(usize),
    #[error("{0} cannot be paired with itself")]
    SelfPair(AgentId),
    #[error("{0} appears in more than one pair")]
    AlreadyMatched(AgentId),
}

/// A symmetric assignment of partners; agents may be unmatched.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Matching {
    partner: Vec<Option<AgentId>>,
}

impl Matching {
    pub fn empty(n: usize) -> Self {
        Matching {
            partner: vec![None; n],
        }
    }

    pub fn from_pairs(n: usize, pairs: &[(AgentId, AgentId)]) -> Result<Self, MatchingError> {
        let mut m = Matching::empty(n);
        for &(a, b) in pairs {
            m.add_pair(a, b)?;
        }
        Ok(m)
    }

    pub fn add_pair(&mut self, a: AgentId, b: AgentId) -> Result<(), MatchingError> {
        let n = self.partner.len();
        for x in [a, b] {
            if x.index() >= n {
                return Err(MatchingError::OutOfRange(x.index() + 1));
            }
        }
        if a == b {
            return Err(MatchingError::SelfPair(a));
        }
        for x in [a, b] {
            if self.partner[x.index()].is_some() {
                return Err(MatchingError::AlreadyMatched(x));
            }
        }
        self.partner[a.index()] = Some(b);
        self.partner[b.index()] = Some(a);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.partner.len()
    }

    #[inline]
    pub fn partner(&self, i: AgentId) -> Option<AgentId> {
        self.partner[i.index()]
    }

    /// Number of pairs.
    pub fn size(&self) -> usize {
        self.partner.iter().filter(|p| p.is_some()).count() / 2
    }

    /// Pairs `(a, b)` with `a < b`, sorted.
    pub fn pairs(&self) -> Vec<(AgentId, AgentId)> {
        self.partner
            .iter()
            .enumerate()
            .filter_map(|(i, p)| match p {
                Some(j) if i < j.index() => Some((AgentId::new(i), *j)),
                _ => None,
            })
            .collect()
    }

    pub fn unmatched(&self) -> Vec<AgentId> {
        self.partner
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_none())
            .map(|(i, _)| AgentId::new(i))
            .collect()
    }

    /// The matching as a permutation: transpositions plus fixed points.
    pub fn to_partition(&self) -> Partition {
        let succ = self
            .partner
            .iter()
            .enumerate()
            .map(|(i, p)| p.unwrap_or(AgentId::new(i)))
            .collect();
        Partition::from_succ(succ).expect("a matching is an involution")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("successor map is not a permutation of 0..{0}")]
    NotPermutation(usize),
    #[error("agent label {0} out of range")]
    OutOfRange(usize),
    #[error("cycles must be non-empty")]
    EmptyCycle,
}

/// Parity of a cycle length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

/// One cycle of a permutation, rotated so its smallest agent comes first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cycle {
    agents: Vec<AgentId>,
}

impl Cycle {
    /// Canonicalises a successor-ordered list of agents. Panics when empty.
    pub fn new(mut agents: Vec<AgentId>) -> Self {
        let start = agents
            .iter()
            .enumerate()
            .min_by_key(|(_, a)| **a)
            .map(|(k, _)| k)
            .expect("a cycle has at least one agent");
        agents.rotate_left(start);
        Cycle { agents }
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.agents
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn parity(&self) -> Parity {
        if self.len() % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn is_odd(&self) -> bool {
        self.parity() == Parity::Odd
    }

    /// Length 2 or odd.
    pub fn is_reduced(&self) -> bool {
        self.len() == 2 || self.is_odd()
    }

    pub fn min_agent(&self) -> AgentId {
        self.agents[0]
    }
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, a) in self.agents.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// A permutation of the agents, read as successor (`succ`) and predecessor
/// (`pred`) maps. Equality is equality of the permutation, so two partitions
/// compare equal exactly when their canonical cycle lists do.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition {
    succ: Vec<AgentId>,
    pred: Vec<AgentId>,
}

impl Partition {
    pub fn identity(n: usize) -> Self {
        let succ: Vec<AgentId> = (0..n).map(AgentId::new).collect();
        Partition {
            pred: succ.clone(),
            succ,
        }
    }

    pub fn from_succ(succ: Vec<AgentId>) -> Result<Self, PartitionError> {
        let n = succ.len();
        let mut pred = vec![AgentId(u32::MAX); n];
        for (i, s) in succ.iter().enumerate() {
            let s = s.index();
            if s >= n || pred[s].0 != u32::MAX {
                return Err(PartitionError::NotPermutation(n));
            }
            pred[s] = AgentId::new(i);
        }
        Ok(Partition { succ, pred })
    }

    /// Builds a partition from successor-ordered cycles covering `0..n`.
    pub fn from_cycles(n: usize, cycles: &[Vec<AgentId>]) -> Result<Self, PartitionError> {
        let mut succ = vec![AgentId(u32::MAX); n];
        for c in cycles {
            if c.is_empty() {
                return Err(PartitionError::EmptyCycle);
            }
            for (k, a) in c.iter().enumerate() {
                if a.index() >= n {
                    return Err(PartitionError::OutOfRange(a.index() + 1));
                }
                if succ[a.index()].0 != u32::MAX {
                    return Err(PartitionError::NotPermutation(n));
                }
                succ[a.index()] = c[(k + 1) % c.len()];
            }
        }
        if succ.iter().any(|s| s.0 == u32::MAX) {
            return Err(PartitionError::NotPermutation(n));
        }
        Partition::from_succ(succ)
    }

    pub fn n(&self) -> usize {
        self.succ.len()
    }

    #[inline]
    pub fn succ(&self, i: AgentId) -> AgentId {
        self.succ[i.index()]
    }

    #[inline]
    pub fn pred(&self, i: AgentId) -> AgentId {
        self.pred[i.index()]
    }

    pub fn successors(&self) -> &[AgentId] {
        &self.succ
    }

    /// Canonical cycle decomposition: each cycle min-rotated, cycles sorted
    /// by their minimum agent.
    pub fn cycles(&self) -> Vec<Cycle> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut agents = Vec::new();
            let mut a = start;
            while !seen[a] {
                seen[a] = true;
                agents.push(AgentId::new(a));
                a = self.succ[a].index();
            }
            // `start` is the smallest unseen agent, so the cycle is already canonical.
            out.push(Cycle { agents });
        }
        out
    }

    /// Rebuilds the partition from its canonical cycles.
    pub fn canonical(&self) -> Partition {
        let cycles: Vec<Vec<AgentId>> = self.cycles().into_iter().map(|c| c.agents).collect();
        Partition::from_cycles(self.n(), &cycles).expect("cycles of a permutation")
    }

    pub fn is_reduced(&self) -> bool {
        self.cycles().iter().all(Cycle::is_reduced)
    }

    pub fn odd_cycles(&self) -> Vec<Cycle> {
        self.cycles().into_iter().filter(Cycle::is_odd).collect()
    }

    /// A copy with `cycle` replaced by the given transpositions. The pairs
    /// must cover exactly the agents of `cycle`.
    pub fn with_cycle_replaced(
        &self,
        cycle: &Cycle,
        pairs: &[(AgentId, AgentId)],
    ) -> Result<Partition, PartitionError> {
        let mut succ = self.succ.clone();
        let mut covered: Vec<AgentId> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        covered.sort();
        let mut members = cycle.agents.clone();
        members.sort();
        if covered != members {
            return Err(PartitionError::NotPermutation(self.n()));
        }
        for &(a, b) in pairs {
            succ[a.index()] = b;
            succ[b.index()] = a;
        }
        Partition::from_succ(succ)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.cycles() {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Half-integral assignment induced by a partition: weight 1 on each
/// transposition, 1/2 on each edge of a longer cycle. A 1-cycle is kept
/// apart as `fixed_point` with self-weight 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfMatching {
    n: usize,
    weights: BTreeMap<(AgentId, AgentId), Ratio<u32>>,
    fixed_point: Option<AgentId>,
}

impl HalfMatching {
    pub(crate) fn new(
        n: usize,
        weights: BTreeMap<(AgentId, AgentId), Ratio<u32>>,
        fixed_point: Option<AgentId>,
    ) -> Self {
        HalfMatching {
            n,
            weights,
            fixed_point,
        }
    }

    pub fn weight(&self, a: AgentId, b: AgentId) -> Ratio<u32> {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.weights
            .get(&key)
            .copied()
            .unwrap_or_else(|| Ratio::from_integer(0))
    }

    /// Edges `(a, b)`, `a < b`, with positive weight.
    pub fn edges(&self) -> impl Iterator<Item = (AgentId, AgentId, Ratio<u32>)> + '_ {
        self.weights.iter().map(|(&(a, b), &w)| (a, b, w))
    }

    /// Degenerate self-weight carried by a 1-cycle agent.
    pub fn fixed_point(&self) -> Option<AgentId> {
        self.fixed_point
    }

    /// Sum of weights incident to `a`, including a fixed point's self-weight.
    pub fn agent_total(&self, a: AgentId) -> Ratio<u32> {
        let mut total = Ratio::from_integer(0);
        for (&(x, y), &w) in &self.weights {
            if x == a || y == a {
                total += w;
            }
        }
        if self.fixed_point == Some(a) {
            total += Ratio::from_integer(1);
        }
        total
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_integral(&self) -> bool {
        self.weights.values().all(|w| w.is_integer())
    }
}
