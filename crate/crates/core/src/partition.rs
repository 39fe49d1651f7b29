//! Computing a stable partition.
//!
//! The engine works on a reduction table: every agent starts with its full
//! list and pairs are deleted symmetrically. A proposal phase holds each agent
//! by at most one proposer and truncates below it. A rotation phase then
//! eliminates rotations until every list has at most two entries. At that
//! point `succ(a) = first(a)` defines a stable partition, with an agent whose
//! list emptied out becoming a fixed point.
//!
//! A deleted pair `{a, b}` always has one side ranking the other below its
//! current last entry, and last entries only improve, so no deleted pair can
//! block the final permutation.

use thiserror::Error;

use crate::model::{AgentId, Cycle, Instance, Matching, Partition};
use crate::stability::{check_partition, PartitionViolation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("all {0} agents have already been inserted")]
    AllInserted(usize),
    #[error("partition after inserting {agent} failed verification: {violation}")]
    VerificationFailed {
        agent: AgentId,
        violation: PartitionViolation,
    },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecompositionError {
    #[error("cycle of length {0} is not an even cycle of length at least 4")]
    NotEvenCycle(usize),
}

/// Preference lists under symmetric deletion.
pub(crate) struct Table<'a> {
    inst: &'a Instance,
    w: usize,
    alive: Vec<bool>,
    lo: Vec<u32>,
    hi: Vec<u32>,
    len: Vec<u32>,
}

impl<'a> Table<'a> {
    pub(crate) fn new(inst: &'a Instance) -> Self {
        let n = inst.n();
        let w = n - 1;
        Table {
            inst,
            w,
            alive: vec![true; n * w],
            lo: vec![0; n],
            hi: vec![(w - 1) as u32; n],
            len: vec![w as u32; n],
        }
    }

    #[inline]
    fn slot(&self, a: AgentId, b: AgentId) -> usize {
        a.index() * self.w + self.inst.rank(a, b) as usize - 1
    }

    fn first(&mut self, a: AgentId) -> Option<AgentId> {
        if self.len[a.index()] == 0 {
            return None;
        }
        let base = a.index() * self.w;
        let mut k = self.lo[a.index()] as usize;
        while !self.alive[base + k] {
            k += 1;
        }
        self.lo[a.index()] = k as u32;
        Some(self.inst.prefs(a)[k])
    }

    fn last(&mut self, a: AgentId) -> Option<AgentId> {
        if self.len[a.index()] == 0 {
            return None;
        }
        let base = a.index() * self.w;
        let mut k = self.hi[a.index()] as usize;
        while !self.alive[base + k] {
            k -= 1;
        }
        self.hi[a.index()] = k as u32;
        Some(self.inst.prefs(a)[k])
    }

    fn second(&mut self, a: AgentId) -> Option<AgentId> {
        self.first(a)?;
        let base = a.index() * self.w;
        let top = self.hi[a.index()] as usize;
        ((self.lo[a.index()] as usize + 1)..=top)
            .find(|&k| self.alive[base + k])
            .map(|k| self.inst.prefs(a)[k])
    }

    fn delete(&mut self, a: AgentId, b: AgentId) {
        let (sa, sb) = (self.slot(a, b), self.slot(b, a));
        if self.alive[sa] {
            self.alive[sa] = false;
            self.alive[sb] = false;
            self.len[a.index()] -= 1;
            self.len[b.index()] -= 1;
        }
    }

    /// Removes every entry of `b`'s list ranked below `a`.
    fn truncate_after(&mut self, b: AgentId, a: AgentId) {
        let pos = self.inst.rank(b, a) as usize - 1;
        let top = self.hi[b.index()] as usize;
        if top <= pos {
            return;
        }
        let base = b.index() * self.w;
        for k in (pos + 1)..=top {
            if self.alive[base + k] {
                let c = self.inst.prefs(b)[k];
                self.delete(b, c);
            }
        }
        self.hi[b.index()] = pos as u32;
    }

    /// Live entries of `a`, most preferred first.
    pub(crate) fn list(&self, a: AgentId) -> Vec<AgentId> {
        let base = a.index() * self.w;
        self.inst
            .prefs(a)
            .iter()
            .enumerate()
            .filter(|(k, _)| self.alive[base + k])
            .map(|(_, &b)| b)
            .collect()
    }

    /// Proposal phase. Afterwards `x` holds `y`'s proposal iff `y` is first
    /// on `x`'s list and `x` is last on `y`'s.
    pub(crate) fn phase_one(&mut self) {
        let n = self.inst.n();
        let mut held: Vec<Option<AgentId>> = vec![None; n];
        let mut free: Vec<AgentId> = (0..n).rev().map(AgentId::new).collect();
        while let Some(x) = free.pop() {
            let Some(y) = self.first(x) else { continue };
            if let Some(h) = held[y.index()] {
                free.push(h);
            }
            held[y.index()] = Some(x);
            self.truncate_after(y, x);
        }
    }

    /// Rotation phase. Restarts the search sequence after each elimination.
    fn phase_two(&mut self) {
        let n = self.inst.n();
        let mut pos = vec![usize::MAX; n];
        let mut seq: Vec<AgentId> = Vec::new();
        let mut start = 0;
        loop {
            while start < n && self.len[start] < 3 {
                start += 1;
            }
            if start == n {
                break;
            }
            seq.clear();
            let mut p = AgentId::new(start);
            while pos[p.index()] == usize::MAX {
                pos[p.index()] = seq.len();
                seq.push(p);
                let q = self
                    .second(p)
                    .expect("list of length >= 2 has a second entry");
                p = self.last(q).expect("q holds a proposal");
            }
            let xs: Vec<AgentId> = seq[pos[p.index()]..].to_vec();
            for a in &seq {
                pos[a.index()] = usize::MAX;
            }
            let ys: Vec<AgentId> = xs
                .iter()
                .map(|&x| self.first(x).expect("rotation member has a list"))
                .collect();
            let r = xs.len();
            for i in 0..r {
                self.truncate_after(ys[(i + 1) % r], xs[i]);
            }
        }
    }

    fn into_partition(mut self) -> Partition {
        let succ = self
            .inst
            .agents()
            .map(|a| self.first(a).unwrap_or(a))
            .collect();
        Partition::from_succ(succ).expect("a fully reduced table defines a permutation")
    }
}

/// A stable partition of `inst`. Deterministic for a given instance.
pub fn stable_partition(inst: &Instance) -> Partition {
    let mut table = Table::new(inst);
    table.phase_one();
    table.phase_two();
    let p = table.into_partition();
    debug_assert!(check_partition(inst, &p).is_ok());
    p
}

/// Whether `inst` admits a stable matching: no stable partition has an odd
/// cycle of length 3 or more.
pub fn is_solvable(inst: &Instance) -> bool {
    !has_long_odd_cycle(&stable_partition(inst))
}

fn has_long_odd_cycle(p: &Partition) -> bool {
    p.cycles().iter().any(|c| c.is_odd() && c.len() >= 3)
}

/// A stable matching when one exists. Every even cycle `(c1 c2 ... c2k)` of
/// the computed partition is split into `{c1,c2}, {c3,c4}, ...`.
pub fn solve(inst: &Instance) -> Option<Matching> {
    let p = stable_partition(inst);
    if has_long_odd_cycle(&p) {
        return None;
    }
    let mut m = Matching::empty(inst.n());
    for c in p.cycles() {
        if c.len() >= 2 {
            for pair in c.agents().chunks(2) {
                m.add_pair(pair[0], pair[1]).expect("cycles are disjoint");
            }
        }
    }
    Some(m)
}

/// The two ways of cutting an even cycle `(c1 ... c2k)`, `k >= 2`, into
/// adjacent pairs: `{c1,c2},{c3,c4},...` and `{c2,c3},...,{c2k,c1}`.
pub fn even_cycle_decompositions(
    cycle: &Cycle,
) -> Result<[Vec<(AgentId, AgentId)>; 2], DecompositionError> {
    let len = cycle.len();
    if len < 4 || len % 2 == 1 {
        return Err(DecompositionError::NotEvenCycle(len));
    }
    let c = cycle.agents();
    let first = (0..len).step_by(2).map(|i| (c[i], c[i + 1])).collect();
    let second = (1..len)
        .step_by(2)
        .map(|i| (c[i], c[(i + 1) % len]))
        .collect();
    Ok([first, second])
}

/// Phase-one reduced lists. In every stable partition each agent's successor
/// and predecessor lie on its reduced list, and a fixed point has an empty
/// list.
pub struct ReducedLists {
    lists: Vec<Vec<AgentId>>,
}

impl ReducedLists {
    pub fn list(&self, a: AgentId) -> &[AgentId] {
        &self.lists[a.index()]
    }
}

pub fn phase_one_lists(inst: &Instance) -> ReducedLists {
    let mut table = Table::new(inst);
    table.phase_one();
    ReducedLists {
        lists: inst.agents().map(|a| table.list(a)).collect(),
    }
}

/// Incremental insertion of agents in id order.
///
/// After `k` insertions the state holds a stable partition of the
/// sub-instance on agents `0..k` with lists restricted to those agents. Each
/// insertion recomputes that partition with the table engine.
#[derive(Debug, Clone)]
pub struct EngineState {
    inserted: usize,
    partition: Option<Partition>,
    verify: bool,
}

impl Default for EngineState {
    fn default() -> Self {
        EngineState::new()
    }
}

impl EngineState {
    /// Verification is on in debug builds.
    pub fn new() -> Self {
        EngineState {
            inserted: 0,
            partition: None,
            verify: cfg!(debug_assertions),
        }
    }

    pub fn with_verification(mut self, verify: bool) -> Self {
        self.verify = verify;
        self
    }

    pub fn inserted(&self) -> usize {
        self.inserted
    }

    /// Partition of the prefix sub-instance; `None` before two agents exist.
    pub fn partition(&self) -> Option<&Partition> {
        self.partition.as_ref()
    }

    /// Inserts agent `inserted()` of `inst`.
    pub fn add_agent(&mut self, inst: &Instance) -> Result<AgentId, EngineError> {
        if self.inserted >= inst.n() {
            return Err(EngineError::AllInserted(inst.n()));
        }
        let agent = AgentId::new(self.inserted);
        self.inserted += 1;
        if self.inserted == 1 {
            self.partition = Some(Partition::identity(1));
            return Ok(agent);
        }
        let sub = inst
            .prefix(self.inserted)
            .expect("prefix of a valid instance");
        let p = stable_partition(&sub);
        if self.verify {
            check_partition(&sub, &p)
                .map_err(|violation| EngineError::VerificationFailed { agent, violation })?;
        }
        self.partition = Some(p);
        Ok(agent)
    }
}
