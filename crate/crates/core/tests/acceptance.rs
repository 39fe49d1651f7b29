//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Exits 0 regardless of the verdicts unless `SR_ACCEPTANCE_STRICT` is set,
//! in which case any FAIL makes the process exit 1.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use roommates::derive::{cycle_stats, max_odd_cycles, max_stable_matching};
use roommates::enumeration::{
    brute_all_matchings, brute_all_partitions, enum_all_partitions, enum_reduced_partitions,
    enum_stable_matchings, solution_sets, DEFAULT_BUDGET,
};
use roommates::experiments::{
    alpha_sweep, exact_pn, fit_power_law, fit_sqrt_log, run_experiment, to_csv, ExperimentConfig,
    ExperimentRecord, Model, StatFlags,
};
use roommates::format::parse_instance;
use roommates::generators::{trial_rng, Culture, CultureKind};
use roommates::partition::{is_solvable, stable_partition};
use roommates::stability::{is_blocking_pair, is_stable_matching};
use roommates::{AgentId, Cycle, Instance, Matching, Partition};

const SEED: u64 = 20_240_601;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            pass,
            detail: detail.into(),
        }
    }
}

fn all_stats() -> StatFlags {
    StatFlags {
        solvability: true,
        partitions: true,
        enumeration: true,
        odd_cycles: true,
        alpha: true,
    }
}

fn config(
    kinds: &[CultureKind],
    sizes: &[usize],
    trials: u64,
    stats: StatFlags,
) -> ExperimentConfig {
    ExperimentConfig {
        cultures: kinds.iter().map(|&k| Culture::new(k)).collect(),
        sizes: sizes.to_vec(),
        trials: Some(trials),
        seed: SEED,
        stats,
        ..ExperimentConfig::default()
    }
}

fn solvability_only() -> StatFlags {
    StatFlags {
        solvability: true,
        partitions: false,
        enumeration: false,
        odd_cycles: false,
        alpha: false,
    }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn criterion_1() -> Verdict {
    let expected = [(2, "1.0000"), (3, "0.7500"), (4, "0.9630"), (5, "0.5896")];
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, want) in expected {
        let e = pool.install(|| exact_pn(n)).unwrap();
        let got = format!("{:.4}", e.value());
        pass &= got == want;
        parts.push(format!("P_{n}={}/{}={got}", e.solvable, e.total));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs <= 600.0;
    Verdict::new(
        pass,
        format!("{}; {secs:.1}s single-threaded", parts.join(", ")),
    )
}

fn criterion_2() -> Verdict {
    let cfg = config(
        &[CultureKind::Ic],
        &[6, 7, 10, 11],
        100_000,
        solvability_only(),
    );
    let recs = run_experiment(&cfg).unwrap();
    let targets = [0.9333, 0.4754, 0.8913, 0.3239];
    let mut pass = true;
    let mut parts = Vec::new();
    for (r, t) in recs.iter().zip(targets) {
        let p = r.p_hat.unwrap();
        pass &= within(p, t, 0.010);
        parts.push(format!("P^_{}={p:.4} (target {t})", r.n));
    }
    Verdict::new(pass, parts.join(", "))
}

fn successor_rank(inst: &Instance, p: &Partition, a: AgentId) -> u32 {
    inst.rank(a, p.succ(a))
}

fn criterion_3() -> Verdict {
    let trials = 7_000u64;
    let mut cells = Vec::new();
    for n in [10usize, 11, 50, 51] {
        for kind in [
            CultureKind::Symmetric,
            CultureKind::Asymmetric,
            CultureKind::Euclidean,
        ] {
            if kind == CultureKind::Symmetric && n % 2 == 1 {
                continue;
            }
            cells.push((kind, n));
        }
    }
    let failures: Vec<String> = cells
        .par_iter()
        .flat_map_iter(|&(kind, n)| {
            let culture = Culture::new(kind);
            (0..trials).filter_map(move |t| {
                let inst = culture
                    .generate(n, &mut trial_rng(SEED, kind, n, t))
                    .unwrap();
                let p = stable_partition(&inst);
                let ok = match kind {
                    CultureKind::Asymmetric if n % 2 == 1 => {
                        let cycles = p.cycles();
                        !is_solvable(&inst)
                            && cycles.len() == 1
                            && cycles[0].len() == n
                            && inst
                                .agents()
                                .all(|a| successor_rank(&inst, &p, a) as usize == (n - 1) / 2)
                    }
                    CultureKind::Asymmetric => is_solvable(&inst),
                    _ => {
                        let all = enum_all_partitions(&inst, DEFAULT_BUDGET);
                        is_solvable(&inst)
                            && !all.budget_exhausted
                            && all.items.len() == 1
                            && (kind != CultureKind::Euclidean
                                || *cycle_stats(&p).alpha.numer() == *cycle_stats(&p).alpha.denom())
                    }
                };
                (!ok).then(|| format!("{kind} n={n} trial={t}"))
            })
        })
        .collect();
    let detail = format!(
        "{} cells x {trials} trials; {} violations{}",
        cells.len(),
        failures.len(),
        failures
            .first()
            .map(|f| format!(", first: {f}"))
            .unwrap_or_default()
    );
    Verdict::new(failures.is_empty(), detail)
}

fn fixture(name: &str) -> Instance {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name);
    parse_instance(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn matching(n: usize, pairs: &[(usize, usize)]) -> Matching {
    let pairs: Vec<(AgentId, AgentId)> = pairs
        .iter()
        .map(|&(a, b)| (AgentId::new(a - 1), AgentId::new(b - 1)))
        .collect();
    Matching::from_pairs(n, &pairs).unwrap()
}

fn show(ms: &[Matching]) -> String {
    let text: Vec<String> = ms
        .iter()
        .map(|m| {
            let pairs: Vec<String> = m
                .pairs()
                .iter()
                .map(|(a, b)| format!("{}{}", a.label(), b.label()))
                .collect();
            format!("{{{}}}", pairs.join(","))
        })
        .collect();
    text.join(" ")
}

fn criterion_4() -> Verdict {
    let mut notes = Vec::new();

    let ex1 = fixture("example1.txt");
    let circled = matching(6, &[(1, 2), (3, 4), (5, 6)]);
    let ok1 = is_solvable(&ex1) && is_stable_matching(&ex1, &circled);
    notes.push(format!("ex1 {}", if ok1 { "ok" } else { "bad" }));

    let ex2 = fixture("example2.txt");
    let expected = Partition::from_cycles(
        6,
        &[
            vec![AgentId(0), AgentId(1), AgentId(2)],
            vec![AgentId(3), AgentId(4), AgentId(5)],
        ],
    )
    .unwrap();
    let all2 = brute_all_partitions(&ex2).unwrap();
    let ok2 = !is_solvable(&ex2)
        && all2 == vec![expected.clone()]
        && max_stable_matching(&ex2, &expected).size() == 2;
    notes.push(format!("ex2 {}", if ok2 { "ok" } else { "bad" }));

    let ex3 = fixture("example3.txt");
    let want: BTreeSet<Matching> = [
        matching(6, &[(1, 2), (3, 6), (4, 5)]),
        matching(6, &[(1, 3), (2, 5), (4, 6)]),
    ]
    .into_iter()
    .collect();
    let found = enum_stable_matchings(&ex3, DEFAULT_BUDGET).unwrap().items;
    let brute = brute_all_matchings(&ex3).unwrap();
    let got: BTreeSet<Matching> = found.iter().cloned().collect();
    let ok3 = got == want;
    notes.push(format!(
        "ex3 expects exactly 2 stable matchings, found {} (brute force {}): {}",
        found.len(),
        brute.len(),
        show(&found)
    ));
    Verdict::new(ok1 && ok2 && ok3, notes.join("; "))
}

fn criterion_5() -> Verdict {
    let kinds = [
        CultureKind::Ic,
        CultureKind::TwoIc,
        CultureKind::Attributes,
        CultureKind::MallowsEuclidean,
    ];
    let cells: Vec<(CultureKind, usize)> = kinds
        .iter()
        .flat_map(|&k| (3..=8).map(move |n| (k, n)))
        .collect();
    let trials = 500u64;
    let failures: Vec<String> = cells
        .par_iter()
        .flat_map_iter(|&(kind, n)| {
            let culture = Culture::new(kind);
            (0..trials).filter_map(move |t| {
                let inst = culture
                    .generate(n, &mut trial_rng(SEED, kind, n, t))
                    .unwrap();
                let all = brute_all_partitions(&inst).unwrap();
                let reduced: Vec<Partition> =
                    all.iter().filter(|p| p.is_reduced()).cloned().collect();
                let matchings = brute_all_matchings(&inst).unwrap();
                let m_ok = match enum_stable_matchings(&inst, DEFAULT_BUDGET) {
                    Ok(e) => e.items == matchings,
                    Err(_) => matchings.is_empty(),
                };
                let ok = m_ok
                    && enum_reduced_partitions(&inst, DEFAULT_BUDGET).items == reduced
                    && enum_all_partitions(&inst, DEFAULT_BUDGET).items == all;
                (!ok).then(|| format!("{kind} n={n} trial={t}"))
            })
        })
        .collect();
    Verdict::new(
        failures.is_empty(),
        format!(
            "{} instances; {} mismatches{}",
            cells.len() as u64 * trials,
            failures.len(),
            failures
                .first()
                .map(|f| format!(", first: {f}"))
                .unwrap_or_default()
        ),
    )
}

fn criterion_6() -> Verdict {
    let cfg = config(&[CultureKind::Ic], &[10], 10_000, all_stats());
    let r = &run_experiment(&cfg).unwrap()[0];
    let checks = [
        ("avg_P", r.avg_p, 1.77, 0.10),
        ("avg_RP", r.avg_rp, 1.38, 0.10),
        ("avg_odd_cnt", r.avg_odd_cnt, 2.00, 0.02),
        ("avg_odd_len", r.avg_odd_len, 2.62, 0.10),
        ("avg_nodd", r.avg_nodd, 5.24, 0.20),
    ];
    let mut pass = r.timeouts == 0;
    let mut parts = Vec::new();
    for (name, value, target, tol) in checks {
        let v = value.unwrap_or(f64::NAN);
        pass &= within(v, target, tol);
        parts.push(format!("{name}={v:.3} (target {target}+-{tol})"));
    }
    Verdict::new(pass, format!("{} trials; {}", r.trials, parts.join(", ")))
}

fn odd_multiset(p: &Partition) -> Vec<Cycle> {
    p.odd_cycles()
}

fn invariant_violation(inst: &Instance) -> Option<&'static str> {
    let n = inst.n();
    let p = stable_partition(inst);
    let sets = solution_sets(inst, DEFAULT_BUDGET);
    if sets.budget_exhausted {
        return Some("budget exhausted");
    }
    let odd = odd_multiset(&p);
    if sets.all_partitions.iter().any(|x| odd_multiset(x) != odd) {
        return Some("odd cycles differ between partitions");
    }
    let (m, rp, ap) = (
        sets.matchings.len(),
        sets.reduced_partitions.len(),
        sets.all_partitions.len(),
    );
    if !(m <= rp && rp <= ap) {
        return Some("|M| <= |RP| <= |P| violated");
    }
    let (sc, rsc) = (sets.stable_cycles.len(), sets.reduced_stable_cycles.len());
    if !(rsc <= sc && sc <= 3 * rsc) {
        return Some("|RSC| <= |SC| <= 3|RSC| violated");
    }
    if rsc > n * (n - 1) / 2 + 1 {
        return Some("|RSC| bound violated");
    }
    let stats = cycle_stats(&p);
    if stats.q > max_odd_cycles(n) {
        return Some("odd-cycle count bound violated");
    }
    let ms = max_stable_matching(inst, &p);
    if ms.size() != (n - stats.q) / 2 {
        return Some("max stable matching size");
    }
    for (a, b) in ms.pairs() {
        for (c, d) in ms.pairs() {
            for x in [a, b] {
                for y in [c, d] {
                    if x < y && is_blocking_pair(inst, &ms, x, y) {
                        return Some("matched-matched blocking pair");
                    }
                }
            }
        }
    }
    None
}

fn criterion_7() -> Verdict {
    let count = 10_000usize;
    let failures: Vec<String> = (0..count)
        .into_par_iter()
        .filter_map(|i| {
            let kind = CultureKind::ALL[i % CultureKind::ALL.len()];
            let mut n = 3 + (i / CultureKind::ALL.len()) % 62;
            if kind == CultureKind::Symmetric && n % 2 == 1 {
                n += 1;
            }
            let inst = Culture::new(kind)
                .generate(n, &mut trial_rng(SEED, kind, n, i as u64))
                .unwrap();
            invariant_violation(&inst).map(|why| format!("{kind} n={n} #{i}: {why}"))
        })
        .collect();
    Verdict::new(
        failures.is_empty(),
        format!(
            "{count} instances, n in 3..=64, all cultures; {} violations{}",
            failures.len(),
            failures
                .first()
                .map(|f| format!(", first: {f}"))
                .unwrap_or_default()
        ),
    )
}

fn criterion_8() -> Verdict {
    let small = alpha_sweep(&config(
        &[CultureKind::Ic],
        &[100],
        1_000,
        solvability_only(),
    ))
    .unwrap();
    let big = alpha_sweep(&config(
        &[CultureKind::Ic],
        &[5_000],
        100,
        solvability_only(),
    ))
    .unwrap();
    let a100 = small[0].alpha_hat.unwrap();
    let a5000 = big[0].alpha_hat.unwrap();

    let n = 5_001;
    let mut times: Vec<f64> = (0..5u64)
        .map(|t| {
            let inst = Culture::new(CultureKind::Ic)
                .generate(n, &mut trial_rng(SEED, CultureKind::Ic, n, t))
                .unwrap();
            let start = Instant::now();
            std::hint::black_box(stable_partition(&inst));
            start.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(f64::total_cmp);
    let median = times[times.len() / 2];
    let pass = a100 >= 0.985 && within(a5000, 0.9996, 0.002) && median <= 10.0;
    Verdict::new(
        pass,
        format!(
            "alpha^_100={a100:.5} (>=0.985), alpha^_5000={a5000:.5} (0.9996+-0.002, {} trials), median stable_partition at n=5001: {median:.2}s",
            big[0].trials
        ),
    )
}

/// `(n, p_hat)` for cells with at least one solvable trial; a log-log fit
/// cannot use zeros.
fn p_hat_points(records: &[ExperimentRecord]) -> Vec<(f64, f64)> {
    records
        .iter()
        .filter_map(|r| r.p_hat.filter(|&p| p > 0.0).map(|p| (r.n as f64, p)))
        .collect()
}

fn criterion_9() -> Verdict {
    let sizes: Vec<f64> = (1..=20).map(|k| 10.0 * k as f64).collect();
    let power: Vec<(f64, f64)> = sizes.iter().map(|&n| (n, 2.0 * n.powf(-0.25))).collect();
    let sqrt_log: Vec<(f64, f64)> = sizes
        .iter()
        .map(|&n| (n, 2.38 * (n / n.ln()).sqrt()))
        .collect();
    let (a, b) = match fit_power_law(&power).unwrap().model {
        Model::PowerLaw { a, b } => (a, b),
        other => panic!("unexpected model {other:?}"),
    };
    let c = match fit_sqrt_log(&sqrt_log).unwrap().model {
        Model::SqrtLog { c } => c,
        other => panic!("unexpected model {other:?}"),
    };
    let synthetic = within(a, 2.0, 1e-9) && within(b, -0.25, 1e-9) && within(c, 2.38, 1e-9);

    let even: Vec<usize> = (50..=200).step_by(10).collect();
    let odd: Vec<usize> = (51..=201).step_by(10).collect();
    let even_recs = run_experiment(&config(
        &[CultureKind::Ic],
        &even,
        10_000,
        solvability_only(),
    ))
    .unwrap();
    let odd_recs = run_experiment(&config(
        &[CultureKind::Ic],
        &odd,
        10_000,
        solvability_only(),
    ))
    .unwrap();
    let exponent = |pts: &[(f64, f64)]| match fit_power_law(pts).unwrap().model {
        Model::PowerLaw { b, .. } => b,
        other => panic!("unexpected model {other:?}"),
    };
    let even_pts = p_hat_points(&even_recs);
    let odd_pts = p_hat_points(&odd_recs);
    let b_even = exponent(&even_pts);
    let b_odd = exponent(&odd_pts);
    let pass = synthetic && (-0.35..=-0.15).contains(&b_even) && (-1.3..=-0.7).contains(&b_odd);
    Verdict::new(
        pass,
        format!(
            "synthetic a={a:.12} b={b:.12} c={c:.12}; IC even exponent {b_even:.3} over {} cells (in [-0.35,-0.15]); IC odd exponent {b_odd:.3} over {} nonzero cells of n=51..201 (in [-1.3,-0.7])",
            even_pts.len(),
            odd_pts.len()
        ),
    )
}

fn criterion_10() -> Verdict {
    let base = config(
        &[
            CultureKind::Ic,
            CultureKind::TwoIc,
            CultureKind::MallowsEuclidean,
            CultureKind::Symmetric,
        ],
        &[9, 10, 31, 40],
        400,
        all_stats(),
    );
    let csvs: Vec<String> = [1usize, 4, 16]
        .iter()
        .map(|&threads| {
            let cfg = ExperimentConfig {
                threads,
                ..base.clone()
            };
            to_csv(&run_experiment(&cfg).unwrap())
        })
        .collect();
    let pass = csvs.windows(2).all(|w| w[0] == w[1]);
    Verdict::new(
        pass,
        format!(
            "{} CSV bytes at 1, 4 and 16 threads; identical: {pass}",
            csvs[0].len()
        ),
    )
}

type Criterion = (u32, &'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "exact small-n solvability", criterion_1),
        (2, "Monte Carlo solvability", criterion_2),
        (3, "culture laws", criterion_3),
        (4, "fixtures", criterion_4),
        (5, "oracle equivalence", criterion_5),
        (6, "structure counts", criterion_6),
        (7, "invariant suite", criterion_7),
        (8, "alpha behaviour", criterion_8),
        (9, "fit recovery", criterion_9),
        (10, "determinism", criterion_10),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let v = run();
        let secs = start.elapsed().as_secs_f64();
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} criterion {id} ({name}): {} [{secs:.1}s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 && std::env::var_os("SR_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
