//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use thicket_core::compression::certify_scheme;
use thicket_core::learner::{
    monte_carlo_with_policy, rng_from_seed, trial_seed, ExactEvaluator, MaxMinPolicy,
};
use thicket_core::littlestone::ldim_reference;
use thicket_core::random::{all_classes, corpus, random_class_bounded};
use thicket_core::rational::{self, int, ratio, Rational};
use thicket_core::staged::intervals::{
    first_counterexample_negative, non_learnability_witness, plain_first_query,
};
use thicket_core::staged::{
    prefix_size, stage_eps, staged_runs, step_budget, IntervalFamily, StageSchedule, StagedConfig,
    StagedOutcome,
};
use thicket_core::thicket::{self as th, EdgeConvention};
use thicket_core::verify::{check_edge_pair, check_no_deficient_cycle, max_query_rank};
use thicket_core::{Concept, ConceptClass, Domain, QueryRank};

const CORPUS_SEED: u64 = 20_240_601;

fn main_corpus() -> Vec<ConceptClass> {
    corpus(CORPUS_SEED, 1000, 5, 8)
}

fn three_point_classes() -> Vec<ConceptClass> {
    let uniform = all_classes(Domain::uniform(3));
    let skewed =
        all_classes(Domain::with_weights(vec![ratio(1, 2), ratio(1, 3), ratio(1, 6)]).unwrap());
    uniform.chain(skewed).collect()
}

/// `Ldim(C) - Ldim(C_{a = A(a)})` by the unmemoised recursion.
fn reference_drop(class: &ConceptClass, a: &Concept, x: usize) -> i32 {
    let n = class.domain().len();
    let kept: Vec<Concept> = class
        .concepts()
        .iter()
        .filter(|c| c.value(x) == a.value(x))
        .cloned()
        .collect();
    ldim_reference(class.concepts(), n) - ldim_reference(&kept, n)
}

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn criterion_1() -> Verdict {
    let mut pairs = 0u64;
    let mut fails = Vec::new();
    for (ci, class) in main_corpus().iter().enumerate() {
        for i in 0..class.len() {
            for j in i + 1..class.len() {
                let (a, b) = (class.concept(i), class.concept(j));
                for x in a.symmetric_difference(b).unwrap() {
                    pairs += 1;
                    let lib = thicket_core::littlestone::drop(class, a, x).unwrap()
                        + thicket_core::littlestone::drop(class, b, x).unwrap();
                    let oracle = reference_drop(class, a, x) + reference_drop(class, b, x);
                    if lib != oracle || lib < 1 {
                        fails.push(format!(
                            "class {ci} ({i},{j},{x}): lib {lib} oracle {oracle}"
                        ));
                    }
                }
            }
        }
    }
    if fails.is_empty() {
        Ok(format!(
            "1000 classes, {pairs} (A,B,a) triples, drop sum >= 1 everywhere"
        ))
    } else {
        Err(format!("{} failures, first: {}", fails.len(), fails[0]))
    }
}

fn criterion_2() -> Verdict {
    let mut pairs = 0u64;
    let mut fails = 0usize;
    for class in main_corpus() {
        let (n, f) = check_edge_pair(&class, EdgeConvention::Target);
        pairs += n;
        fails += f.len();
    }
    let c3 = ConceptClass::from_bitstrings(&["10", "01", "11"]).unwrap();
    let (a, b) = (c3.concept(0), c3.concept(1));
    let ab = th::edge_weight(&c3, a, b).unwrap();
    let ba = th::edge_weight(&c3, b, a).unwrap();
    if fails > 0 {
        return Err(format!("{fails} pairs with d(A,B) + d(B,A) < 1"));
    }
    if ab != rational::half() || ba != rational::half() {
        return Err(format!(
            "{{10,01,11}}: d(A,B) = {}, d(B,A) = {}",
            rational::format(&ab),
            rational::format(&ba)
        ));
    }
    Ok(format!(
        "{pairs} unordered pairs pass; {{10,01,11}} gives d(A,B) = d(B,A) = 1/2"
    ))
}

fn criterion_3() -> Verdict {
    let mut classes = main_corpus();
    classes.extend(three_point_classes());
    let half = QueryRank::Finite(rational::half());
    let mut checked = 0;
    let mut worst: Option<QueryRank> = None;
    for class in classes.iter().filter(|c| c.len() >= 2) {
        let best = max_query_rank(class, EdgeConvention::Target).unwrap();
        checked += 1;
        if best < half {
            return Err(format!(
                "max query rank {best} < 1/2 on {:?}",
                class.concepts()
            ));
        }
        worst = Some(worst.map_or(best.clone(), |w| w.min(best)));
    }
    Ok(format!(
        "{checked} classes (corpus + all 3-point classes, two weightings); smallest max-min rank {}",
        worst.unwrap()
    ))
}

fn criterion_4() -> Verdict {
    let classes = corpus(CORPUS_SEED + 1, 200, 5, 8);
    for (i, class) in classes.iter().enumerate() {
        let (_, f) = check_no_deficient_cycle(class, 5, EdgeConvention::Target);
        if let Some(msg) = f.first() {
            return Err(format!("class {i}: {msg}"));
        }
    }
    Ok("200 classes, no deficient cycle of length <= 5".into())
}

/// Classes for the learner bound: every class over 1..=3 points plus 500
/// sampled classes over at most 4 points with at most 8 concepts.
fn learner_classes() -> Vec<ConceptClass> {
    let mut classes: Vec<ConceptClass> = (1..=3)
        .flat_map(|n| all_classes(Domain::uniform(n)))
        .collect();
    classes.extend(corpus(CORPUS_SEED + 2, 500, 4, 8));
    classes.retain(|c| c.len() >= 2);
    classes
}

fn criterion_5_bound() -> Verdict {
    let mut checked = 0u64;
    let mut violations = Vec::new();
    let mut ce_violations = 0u64;
    for class in learner_classes() {
        let policy = MaxMinPolicy::new(&class);
        let bound = int(2 * policy.cache().ldim_all() as i64);
        let eval = ExactEvaluator::new(&policy);
        for t in 0..class.len() {
            let e = eval.expected_queries(t).unwrap();
            checked += 1;
            if e > bound {
                violations.push((class.concepts().to_vec(), t, e.clone(), bound.clone()));
            }
            if e - int(1) > bound {
                ce_violations += 1;
            }
        }
    }
    println!(
        "  note: expected counterexamples (queries before the successful one) <= 2 Ldim: {} violations over {checked} targets",
        ce_violations
    );
    match violations
        .iter()
        .max_by(|a, b| (&a.2 - &a.3).cmp(&(&b.2 - &b.3)))
    {
        None => Ok(format!(
            "{checked} (class, target) pairs, E[queries] <= 2 Ldim exactly"
        )),
        Some((concepts, t, e, bound)) => {
            let shown: Vec<String> = concepts.iter().map(|c| c.to_string()).collect();
            Err(format!(
                "{} of {checked} targets exceed 2 Ldim; worst {{{}}} target {}: E = {} > {}",
                violations.len(),
                shown.join(","),
                concepts[*t],
                rational::format(e),
                rational::format(bound)
            ))
        }
    }
}

fn criterion_5_monte_carlo() -> Verdict {
    let classes = learner_classes();
    let mut compared = 0;
    let mut worst_z = 0.0f64;
    for (i, class) in classes.iter().enumerate().step_by(37).take(20) {
        let policy = MaxMinPolicy::new(class);
        let target = i % class.len();
        let exact = rational::to_f64(
            &ExactEvaluator::new(&policy)
                .expected_queries(target)
                .unwrap(),
        );
        let s = monte_carlo_with_policy(&policy, target, 10_000, trial_seed(CORPUS_SEED, i as u64))
            .unwrap();
        let se = s.stderr();
        let diff = (s.mean - exact).abs();
        compared += 1;
        if se == 0.0 {
            if diff > 1e-12 {
                return Err(format!(
                    "class {i}: zero-variance mean {} != exact {exact}",
                    s.mean
                ));
            }
        } else {
            worst_z = worst_z.max(diff / se);
            if diff > 3.0 * se {
                return Err(format!("class {i}: |{} - {exact}| > 3 * {se}", s.mean));
            }
        }
    }
    Ok(format!(
        "{compared} (class, target) pairs at 10^4 trials, largest |z| = {worst_z:.2}"
    ))
}

/// `Σ_{j<d} C(n, j) < 2^(n - m)`, i.e. the tail is below `2^-m`, by Pascal's rule.
fn tail_below(n: u32, d: u32, m: u32) -> bool {
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = vec![1u128; row.len() + 1];
        for j in 1..row.len() {
            next[j] = row[j - 1] + row[j];
        }
        row = next;
    }
    let sum: u128 = row.iter().take(d as usize).sum();
    n >= m && sum < 1u128 << (n - m)
}

fn criterion_6() -> Verdict {
    let mut cases = 0;
    for d in 1..=6u32 {
        for m in 2..=10u32 {
            let n = step_budget(d as usize, &rational::pow2_inv(m)).unwrap() as u32;
            if !tail_below(n, d, m) || (n > 0 && tail_below(n - 1, d, m)) {
                return Err(format!("d = {d}, eps = 2^-{m}: budget {n} is not minimal"));
            }
            cases += 1;
        }
    }
    let geometric = |i: usize| Some(rational::pow2_inv(i as u32));
    for k in 1..=20u32 {
        let n = prefix_size(geometric, &stage_eps(k)).unwrap();
        let s = StageSchedule::new(k, 1, geometric).unwrap();
        if n != k as usize + 1 || s.prefix_size != n {
            return Err(format!("stage {k}: prefix {n}, expected {}", k + 1));
        }
    }
    Ok(format!(
        "{cases} (d, eps) budgets minimal; geometric prefix N_k = k + 1 for k = 1..20"
    ))
}

fn criterion_7() -> Verdict {
    let family = IntervalFamily::new(rational::half()).unwrap();
    let config = StagedConfig::default();
    let runs = staged_runs(&family, CORPUS_SEED, 0..1000, &config).unwrap();
    let capped = runs
        .iter()
        .filter(|r| r.outcome == StagedOutcome::StageCapReached)
        .count();
    let mean = |rs: &[thicket_core::staged::StagedRun<Rational>]| {
        rs.iter().map(|r| r.query_count() as f64).sum::<f64>() / rs.len() as f64
    };
    let (m1, m2) = (mean(&runs[..500]), mean(&runs[500..]));
    let rel = (m1 - m2).abs() / ((m1 + m2) / 2.0);
    let detail = format!(
        "1000 runs, {capped} hit the cap of {}; mean queries {:.3} (halves {m1:.3} / {m2:.3}, rel. diff {:.1}%)",
        config.stage_cap,
        mean(&runs),
        rel * 100.0
    );
    if capped == 0 && rel < 0.2 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_8() -> Verdict {
    let family = IntervalFamily::new(rational::half()).unwrap();
    let threshold = ratio(99, 100);
    let mut worst = 0;
    for prefix in 1..=19 {
        match non_learnability_witness(&family, prefix, &threshold, 200) {
            Some((t, p)) => {
                worst = worst.max(t);
                if p != first_counterexample_negative(plain_first_query(&family, prefix), t) {
                    return Err("witness probability mismatch".into());
                }
            }
            None => return Err(format!("prefix {prefix}: no target <= 200 reaches 0.99")),
        }
    }
    // Larger prefixes need larger targets; the probability still tends to 1.
    for prefix in [20, 50, 100] {
        if non_learnability_witness(&family, prefix, &threshold, 20 * prefix).is_none() {
            return Err(format!("prefix {prefix}: no witness"));
        }
    }
    let h = plain_first_query(&family, 1);
    Ok(format!(
        "prefixes 1..19: witness target <= {worst} (<= 200) with P[negative] >= 0.99; prefix 1 queries I{h}; prefixes 20, 50, 100 have witnesses beyond 200"
    ))
}

fn criterion_9() -> Verdict {
    let mut classes: Vec<ConceptClass> = all_classes(Domain::uniform(3)).collect();
    for i in 0..500 {
        let mut rng = rng_from_seed(trial_seed(CORPUS_SEED + 3, i));
        classes.push(random_class_bounded(&mut rng, 5, 12));
    }
    let mut samples = 0;
    for (i, class) in classes.iter().enumerate() {
        let r = certify_scheme(class, class.domain().len()).unwrap();
        samples += r.samples_tested;
        if !r.passed() {
            return Err(format!("class {i}: {:?}", r.failures.first()));
        }
    }
    Ok(format!(
        "{} classes, {samples} realizable samples recovered by one of d+1 reconstructors",
        classes.len()
    ))
}

fn thicket(args: &[&str]) -> (Option<i32>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_thicket"))
        .args(args)
        .output()
        .expect("binary runs");
    (out.status.code(), out.stdout)
}

fn criterion_10() -> Verdict {
    let dir = std::env::temp_dir().join(format!("thicket-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let c3 = dir.join("c3.json");
    std::fs::write(
        &c3,
        r#"{"domain":["x1","x2"],"mu":["1/2","1/2"],"concepts":{"A":"10","B":"01","C":"11"}}"#,
    )
    .unwrap();
    let c3 = c3.to_str().unwrap().to_string();
    let runs: Vec<Vec<&str>> = vec![
        vec![
            "learn", "--class", &c3, "--target", "A", "--trials", "2000", "--seed", "1",
        ],
        vec!["learn-exact", "--class", &c3],
        vec![
            "staged",
            "--family",
            "intervals",
            "--prior-geometric",
            "0.5",
            "--trials",
            "300",
            "--seed",
            "1",
        ],
        vec![
            "verify",
            "--random-classes",
            "100",
            "--max-domain",
            "5",
            "--max-concepts",
            "8",
            "--seed",
            "7",
        ],
        vec!["compress", "--class", &c3],
        vec![
            "gen",
            "--seed",
            "3",
            "--domain",
            "4",
            "--concepts",
            "6",
            "--tau",
        ],
    ];
    for args in &runs {
        let (code1, out1) = thicket(args);
        let (code2, out2) = thicket(args);
        if code1 != Some(0) || code2 != Some(0) {
            return Err(format!("{args:?} exited {code1:?}"));
        }
        if out1 != out2 || out1.is_empty() {
            return Err(format!("{args:?} output differs between runs"));
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!(
        "{} commands byte-identical across repeated runs",
        runs.len()
    ))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1 drop pair sum", criterion_1),
        ("2 edge pair sum", criterion_2),
        ("3 max-min query rank", criterion_3),
        ("4 no deficient cycles", criterion_4),
        ("5 expected queries <= 2 Ldim (exact)", criterion_5_bound),
        ("5 monte carlo vs exact (3 SE)", criterion_5_monte_carlo),
        ("6 stage schedule", criterion_6),
        ("7 staged intervals", criterion_7),
        ("8 non-learnability witness", criterion_8),
        ("9 compression round trip", criterion_9),
        ("10 cli determinism", criterion_10),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let verdict = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criterion checks failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria pass");
}
