//! Objects derived from a stable partition: reduced partitions, maximum
//! stable matchings, half-matchings and cycle statistics.

use std::collections::BTreeMap;

use num_rational::Ratio;

use crate::model::{AgentId, Cycle, HalfMatching, Instance, Matching, Partition};
use crate::partition::even_cycle_decompositions;
use crate::stability::{is_stable_matching, is_stable_partition};

/// Replaces every even cycle of length 4 or more by transpositions. The
/// `{c1,c2},{c3,c4},...` split is tried first, the other one if that fails.
pub fn reduce(inst: &Instance, p: &Partition) -> Partition {
    let mut out = p.clone();
    for c in p.cycles() {
        let Ok([first, second]) = even_cycle_decompositions(&c) else {
            continue;
        };
        let candidate = out
            .with_cycle_replaced(&c, &first)
            .expect("pairs cover the cycle");
        out = if is_stable_partition(inst, &candidate) {
            candidate
        } else {
            out.with_cycle_replaced(&c, &second)
                .expect("pairs cover the cycle")
        };
    }
    debug_assert!(!is_stable_partition(inst, p) || is_stable_partition(inst, &out));
    out
}

/// A largest stable matching among matched agents: reduce `p`, drop the
/// smallest agent from every odd cycle, and pair the rest around the cycle.
pub fn max_stable_matching(inst: &Instance, p: &Partition) -> Matching {
    let reduced = reduce(inst, p);
    let mut m = Matching::empty(inst.n());
    for c in reduced.cycles() {
        let agents = c.agents();
        let tail = if c.is_odd() { &agents[1..] } else { agents };
        for pair in tail.chunks(2) {
            m.add_pair(pair[0], pair[1]).expect("cycles are disjoint");
        }
    }
    debug_assert!(
        has_long_odd_cycle(&reduced)
            || !is_stable_partition(inst, p)
            || is_stable_matching(inst, &m)
    );
    m
}

fn has_long_odd_cycle(p: &Partition) -> bool {
    p.cycles().iter().any(|c| c.is_odd() && c.len() >= 3)
}

/// Weight 1 on transpositions, 1/2 on every edge of a longer cycle.
pub fn half_matching(p: &Partition) -> HalfMatching {
    let mut weights = BTreeMap::new();
    let mut fixed = None;
    for c in p.cycles() {
        let a = c.agents();
        match a.len() {
            1 => fixed = Some(a[0]),
            2 => {
                weights.insert(ordered(a[0], a[1]), Ratio::from_integer(1));
            }
            len => {
                for k in 0..len {
                    weights.insert(ordered(a[k], a[(k + 1) % len]), Ratio::new(1, 2));
                }
            }
        }
    }
    HalfMatching::new(p.n(), weights, fixed)
}

fn ordered(a: AgentId, b: AgentId) -> (AgentId, AgentId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Odd-cycle statistics of a partition. A fixed point counts as an odd
/// cycle of length 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleStats {
    pub q: usize,
    pub odd_lengths: Vec<usize>,
    pub n_odd: usize,
    pub has_fixed_point: bool,
    pub per_length_counts: BTreeMap<usize, usize>,
    pub alpha: Ratio<usize>,
}

pub fn cycle_stats(p: &Partition) -> CycleStats {
    let mut odd_lengths: Vec<usize> = p
        .cycles()
        .iter()
        .filter(|c| c.is_odd())
        .map(Cycle::len)
        .collect();
    odd_lengths.sort_unstable();
    let mut per_length_counts = BTreeMap::new();
    for &len in &odd_lengths {
        *per_length_counts.entry(len).or_insert(0) += 1;
    }
    let q = odd_lengths.len();
    CycleStats {
        q,
        n_odd: odd_lengths.iter().sum(),
        has_fixed_point: odd_lengths.first() == Some(&1),
        odd_lengths,
        per_length_counts,
        alpha: alpha(p.n(), q),
    }
}

/// Largest stable-matching size `(n - q) / 2` over `floor(n / 2)`, where `q`
/// counts odd cycles including a fixed point.
pub fn alpha(n: usize, q: usize) -> Ratio<usize> {
    Ratio::new((n - q) / 2, n / 2)
}

/// Maximum number of odd cycles a stable partition on `n` agents can have.
pub fn max_odd_cycles(n: usize) -> usize {
    n / 3 + (n % 3) % 2
}
