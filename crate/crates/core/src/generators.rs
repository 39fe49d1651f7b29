//! Random preference cultures.
//!
//! Every generator draws only from the RNG it is handed, so a seeded
//! [`TrialRng`] reproduces an instance exactly. [`trial_rng`] derives one
//! independent stream per `(master seed, culture, n, trial)`.

use std::fmt;
use std::str::FromStr;

use num_traits::Float;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{AgentId, Instance};

/// The PRNG used for experiment trials.
pub type TrialRng = ChaCha8Rng;

/// Dispersion used by the Mallows culture unless configured otherwise.
pub const DEFAULT_PHI: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("an instance needs at least 2 agents, got {0}")]
    TooSmall(usize),
    #[error("the symmetric culture needs an even number of agents, got {0}")]
    OddNotSupported(usize),
    #[error("dispersion must lie in (0, 1], got {0}")]
    BadDispersion(f64),
    #[error("expected {expected} weight vectors, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("unknown culture {0:?}")]
    UnknownCulture(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CultureKind {
    Ic,
    TwoIc,
    Symmetric,
    Asymmetric,
    Euclidean,
    Attributes,
    MallowsEuclidean,
}

impl CultureKind {
    pub const ALL: [CultureKind; 7] = [
        CultureKind::Ic,
        CultureKind::TwoIc,
        CultureKind::Symmetric,
        CultureKind::Asymmetric,
        CultureKind::Euclidean,
        CultureKind::Attributes,
        CultureKind::MallowsEuclidean,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            CultureKind::Ic => "ic",
            CultureKind::TwoIc => "2ic",
            CultureKind::Symmetric => "symmetric",
            CultureKind::Asymmetric => "asymmetric",
            CultureKind::Euclidean => "euclidean",
            CultureKind::Attributes => "attributes",
            CultureKind::MallowsEuclidean => "mallows-euclidean",
        }
    }

    fn code(self) -> u64 {
        match self {
            CultureKind::Ic => 1,
            CultureKind::TwoIc => 2,
            CultureKind::Symmetric => 3,
            CultureKind::Asymmetric => 4,
            CultureKind::Euclidean => 5,
            CultureKind::Attributes => 6,
            CultureKind::MallowsEuclidean => 7,
        }
    }
}

impl fmt::Display for CultureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for CultureKind {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CultureKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| GenError::UnknownCulture(s.to_string()))
    }
}

/// A culture together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Culture {
    pub kind: CultureKind,
    pub phi: f64,
}

impl Culture {
    pub fn new(kind: CultureKind) -> Self {
        Culture {
            kind,
            phi: DEFAULT_PHI,
        }
    }

    pub fn mallows(phi: f64) -> Result<Self, GenError> {
        check_phi(phi)?;
        Ok(Culture {
            kind: CultureKind::MallowsEuclidean,
            phi,
        })
    }

    pub fn tag(&self) -> &'static str {
        self.kind.tag()
    }

    pub fn generate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Instance, GenError> {
        match self.kind {
            CultureKind::Ic => gen_ic(n, rng),
            CultureKind::TwoIc => gen_2ic(n, rng),
            CultureKind::Symmetric => gen_symmetric(n, rng),
            CultureKind::Asymmetric => gen_asymmetric(n, rng),
            CultureKind::Euclidean => gen_euclidean(n, rng),
            CultureKind::Attributes => gen_attributes(n, rng),
            CultureKind::MallowsEuclidean => gen_mallows_euclidean(n, self.phi, rng),
        }
    }
}

impl From<CultureKind> for Culture {
    fn from(kind: CultureKind) -> Self {
        Culture::new(kind)
    }
}

fn check_n(n: usize) -> Result<(), GenError> {
    if n < 2 {
        Err(GenError::TooSmall(n))
    } else {
        Ok(())
    }
}

fn check_phi(phi: f64) -> Result<(), GenError> {
    if phi > 0.0 && phi <= 1.0 {
        Ok(())
    } else {
        Err(GenError::BadDispersion(phi))
    }
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one trial, a hash of its coordinates.
pub fn trial_seed(master: u64, culture: CultureKind, n: usize, trial: u64) -> u64 {
    const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut h = mix64(master.wrapping_add(GOLDEN));
    for part in [culture.code(), n as u64, trial] {
        h = mix64(h ^ part.wrapping_add(GOLDEN));
    }
    h
}

pub fn trial_rng(master: u64, culture: CultureKind, n: usize, trial: u64) -> TrialRng {
    TrialRng::seed_from_u64(trial_seed(master, culture, n, trial))
}

fn build(n: usize, rows: Vec<Vec<AgentId>>) -> Instance {
    Instance::new(n, rows).expect("generators produce complete strict lists")
}

fn others(n: usize, i: usize) -> Vec<AgentId> {
    (0..n).filter(|&j| j != i).map(AgentId::new).collect()
}

/// Impartial culture: every list an independent uniform permutation.
pub fn gen_ic<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Instance, GenError> {
    check_n(n)?;
    let rows = (0..n)
        .map(|i| {
            let mut row = others(n, i);
            row.shuffle(rng);
            row
        })
        .collect();
    Ok(build(n, rows))
}

/// Two groups of sizes `ceil(n/2)` and `floor(n/2)`. Each agent ranks its own
/// group first, each block in uniform random order.
pub fn gen_2ic<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Instance, GenError> {
    check_n(n)?;
    let split = n.div_ceil(2);
    let rows = (0..n)
        .map(|i| {
            let (own, other) = if i < split {
                (0..split, split..n)
            } else {
                (split..n, 0..split)
            };
            let mut head: Vec<AgentId> = own.filter(|&j| j != i).map(AgentId::new).collect();
            let mut tail: Vec<AgentId> = other.map(AgentId::new).collect();
            head.shuffle(rng);
            tail.shuffle(rng);
            head.extend(tail);
            head
        })
        .collect();
    Ok(build(n, rows))
}

fn random_relabeling<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<AgentId> {
    let mut perm: Vec<AgentId> = (0..n).map(AgentId::new).collect();
    perm.shuffle(rng);
    perm
}

/// Round-robin schedule by the circle method: `n - 1` perfect matchings
/// that together cover every pair exactly once. `n` must be even.
pub fn round_robin(n: usize) -> Vec<Vec<(usize, usize)>> {
    assert!(n >= 2 && n.is_multiple_of(2), "round robin needs an even n");
    let m = n - 1;
    (0..m)
        .map(|r| {
            let mut round = vec![(r, m)];
            for k in 1..n / 2 {
                round.push(((r + k) % m, (r + m - k) % m));
            }
            round
        })
        .collect()
}

/// Mutual ranks: `rank(i, j) == rank(j, i)` for every pair. A random
/// one-factorisation assigns each pair a round, the round is the rank.
pub fn gen_symmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Instance, GenError> {
    check_n(n)?;
    if n % 2 == 1 {
        return Err(GenError::OddNotSupported(n));
    }
    let label = random_relabeling(n, rng);
    let mut round_rank: Vec<usize> = (0..n - 1).collect();
    round_rank.shuffle(rng);
    let mut rows = vec![vec![AgentId(0); n - 1]; n];
    for (r, round) in round_robin(n).into_iter().enumerate() {
        let pos = round_rank[r];
        for (a, b) in round {
            let (a, b) = (label[a], label[b]);
            rows[a.index()][pos] = b;
            rows[b.index()][pos] = a;
        }
    }
    Ok(build(n, rows))
}

/// Cyclic ranks: `rank(i, j) = (j - i) mod n` up to a random relabeling, so
/// `rank(i, j) + rank(j, i) = n` for every pair.
pub fn gen_asymmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Instance, GenError> {
    check_n(n)?;
    let label = random_relabeling(n, rng);
    let mut rows = vec![Vec::new(); n];
    for i in 0..n {
        rows[label[i].index()] = (1..n).map(|k| label[(i + k) % n]).collect();
    }
    Ok(build(n, rows))
}

/// A point in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<F> {
    pub x: F,
    pub y: F,
}

impl<F: Float> Point<F> {
    pub fn new(x: F, y: F) -> Self {
        Point { x, y }
    }
}

fn sample_points<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Point<f64>> {
    (0..n)
        .map(|_| {
            let x = rng.gen::<f64>();
            let y = rng.gen::<f64>();
            Point::new(x, y)
        })
        .collect()
}

/// Each row lists the other agents by increasing `score(i, j)`, ties broken
/// by smaller id.
fn rows_by_score<F: Float>(n: usize, score: impl Fn(usize, usize) -> F) -> Vec<Vec<AgentId>> {
    (0..n)
        .map(|i| {
            let mut keyed: Vec<(F, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (score(i, j), j))
                .collect();
            keyed.sort_by(|a, b| {
                a.0.partial_cmp(&b.0)
                    .expect("finite scores")
                    .then(a.1.cmp(&b.1))
            });
            keyed.into_iter().map(|(_, j)| AgentId::new(j)).collect()
        })
        .collect()
}

/// Lists by increasing Euclidean distance between positions.
pub fn euclidean_from_points<F: Float>(points: &[Point<F>]) -> Result<Instance, GenError> {
    let n = points.len();
    check_n(n)?;
    let rows = rows_by_score(n, |i, j| {
        let dx = points[i].x - points[j].x;
        let dy = points[i].y - points[j].y;
        (dx * dx + dy * dy).sqrt()
    });
    Ok(build(n, rows))
}

/// Agent `i` ranks `j` by the distance between their attribute vectors,
/// with axes weighted by `i`'s own weight vector.
pub fn attributes_from<F: Float>(
    points: &[Point<F>],
    weights: &[Point<F>],
) -> Result<Instance, GenError> {
    let n = points.len();
    check_n(n)?;
    if weights.len() != n {
        return Err(GenError::WeightCount {
            expected: n,
            got: weights.len(),
        });
    }
    let rows = rows_by_score(n, |i, j| {
        let dx = points[i].x - points[j].x;
        let dy = points[i].y - points[j].y;
        (weights[i].x * dx * dx + weights[i].y * dy * dy).sqrt()
    });
    Ok(build(n, rows))
}

/// Uniform positions in the unit square.
pub fn gen_euclidean<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Instance, GenError> {
    check_n(n)?;
    euclidean_from_points(&sample_points(n, rng))
}

/// Uniform attributes and uniform per-agent axis weights.
pub fn gen_attributes<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Instance, GenError> {
    check_n(n)?;
    let points = sample_points(n, rng);
    let weights = sample_points(n, rng);
    attributes_from(&points, &weights)
}

/// Euclidean lists, each perturbed independently by a Mallows model with
/// dispersion `phi` centred on it.
pub fn gen_mallows_euclidean<R: Rng + ?Sized>(
    n: usize,
    phi: f64,
    rng: &mut R,
) -> Result<Instance, GenError> {
    check_n(n)?;
    check_phi(phi)?;
    let base = gen_euclidean(n, rng)?;
    let rows = base
        .agents()
        .map(|i| mallows_perturb(base.prefs(i), phi, rng))
        .collect();
    Ok(build(n, rows))
}

/// Insertion offset for the `t`-th item (`t` items already placed): the
/// item lands `d` places from the end with probability proportional to
/// `phi^d`, `0 <= d <= t`.
pub fn insertion_offset<R: Rng + ?Sized>(t: usize, phi: f64, rng: &mut R) -> usize {
    if phi >= 1.0 {
        return rng.gen_range(0..=t);
    }
    // P(d) = phi^d (1 - phi) / (1 - phi^(t+1)), sampled by inverse CDF.
    let u: f64 = rng.gen();
    let total = 1.0 - phi.powi(t as i32 + 1);
    let mut acc = 0.0;
    let mut w = 1.0 - phi;
    for d in 0..t {
        acc += w / total;
        if u < acc {
            return d;
        }
        w *= phi;
    }
    t
}

/// Repeated insertion model: items of `reference` are inserted in order,
/// so a small `phi` keeps the output close to the reference and `phi = 1`
/// gives a uniform permutation.
pub fn mallows_perturb<T: Copy, R: Rng + ?Sized>(reference: &[T], phi: f64, rng: &mut R) -> Vec<T> {
    let mut out: Vec<T> = Vec::with_capacity(reference.len());
    for (t, &item) in reference.iter().enumerate() {
        let d = insertion_offset(t, phi, rng);
        out.insert(t - d, item);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn rng(seed: u64) -> TrialRng {
        TrialRng::seed_from_u64(seed)
    }

    #[test]
    fn culture_tags_roundtrip() {
        for k in CultureKind::ALL {
            assert_eq!(k.tag().parse::<CultureKind>().unwrap(), k);
        }
        assert!("uniform".parse::<CultureKind>().is_err());
    }

    #[test]
    fn round_robin_covers_pairs_once() {
        for n in [2, 4, 6, 10] {
            let mut seen = HashSet::new();
            for round in round_robin(n) {
                let mut agents: Vec<usize> = round.iter().flat_map(|&(a, b)| [a, b]).collect();
                agents.sort_unstable();
                assert_eq!(agents, (0..n).collect::<Vec<_>>());
                for (a, b) in round {
                    assert!(seen.insert((a.min(b), a.max(b))));
                }
            }
            assert_eq!(seen.len(), n * (n - 1) / 2);
        }
    }

    #[test]
    fn symmetric_rejects_odd() {
        assert_eq!(
            gen_symmetric(5, &mut rng(1)),
            Err(GenError::OddNotSupported(5))
        );
        assert_eq!(gen_ic(1, &mut rng(1)), Err(GenError::TooSmall(1)));
    }

    #[test]
    fn two_groups_rank_own_group_first() {
        let inst = gen_2ic(7, &mut rng(3)).unwrap();
        for i in inst.agents() {
            let own = |j: AgentId| (j.index() < 4) == (i.index() < 4);
            let row = inst.prefs(i);
            let k = row.iter().take_while(|&&j| own(j)).count();
            assert!(row[k..].iter().all(|&j| !own(j)));
        }
    }

    #[test]
    fn mallows_extremes() {
        let reference: Vec<u32> = (0..30).collect();
        assert_eq!(
            mallows_perturb(&reference, f64::MIN_POSITIVE, &mut rng(9)),
            reference
        );
        let shuffled = mallows_perturb(&reference, 1.0, &mut rng(9));
        let mut sorted = shuffled.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, reference);
        assert_ne!(shuffled, reference);
    }

    #[test]
    fn bad_dispersion() {
        assert!(Culture::mallows(0.0).is_err());
        assert!(Culture::mallows(1.5).is_err());
        assert!(gen_mallows_euclidean(4, -1.0, &mut rng(0)).is_err());
    }

    #[test]
    fn seeds_differ_by_coordinate() {
        let base = trial_seed(7, CultureKind::Ic, 10, 0);
        assert_ne!(base, trial_seed(8, CultureKind::Ic, 10, 0));
        assert_ne!(base, trial_seed(7, CultureKind::TwoIc, 10, 0));
        assert_ne!(base, trial_seed(7, CultureKind::Ic, 11, 0));
        assert_ne!(base, trial_seed(7, CultureKind::Ic, 10, 1));
        assert_eq!(base, trial_seed(7, CultureKind::Ic, 10, 0));
    }
}
