//! Exact property checks over concept classes.
//!
//! Every check compares rationals exactly. A failing instance carries the
//! offending class as a class file so it can be replayed.

use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::compression::certify_scheme;
use crate::concept::ConceptClass;
use crate::format::save_class;
use crate::learner::{ExactEvaluator, MaxMinPolicy};
use crate::littlestone::LdimCache;
use crate::rational::{self, Rational};
use crate::thicket::{EdgeConvention, QueryRank, ThicketGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// `u(A,a) + u(B,a) >= 1` whenever `A(a) != B(a)`.
    DropPair,
    /// `d(A,B) + d(B,A) >= 1`.
    EdgePair,
    /// Some concept has query rank at least 1/2.
    QueryRank,
    /// No deficient cycle up to the configured length.
    NoDeficientCycle,
    /// Expected counterexamples before identification `<= 2 Ldim`.
    LearnerBound,
    /// Compression round trip on every realizable sample.
    Compression,
}

impl Check {
    pub const ALL: [Check; 6] = [
        Check::DropPair,
        Check::EdgePair,
        Check::QueryRank,
        Check::NoDeficientCycle,
        Check::LearnerBound,
        Check::Compression,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::DropPair => "drop-pair",
            Check::EdgePair => "edge-pair",
            Check::QueryRank => "query-rank",
            Check::NoDeficientCycle => "no-deficient-cycle",
            Check::LearnerBound => "learner-bound",
            Check::Compression => "compression",
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub checks: Vec<Check>,
    pub max_cycle_len: usize,
    /// `None` certifies samples of every size.
    pub max_sample_size: Option<usize>,
    pub convention: EdgeConvention,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            checks: Check::ALL.to_vec(),
            max_cycle_len: 5,
            max_sample_size: None,
            convention: EdgeConvention::Target,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub check: Check,
    pub class_index: u64,
    pub detail: String,
    /// The offending class as a class file.
    pub witness: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckSummary {
    pub check: Check,
    pub instances: u64,
    pub failures: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub classes: u64,
    pub checks: Vec<CheckSummary>,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self, check: Check) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.check == check)
    }
}

/// Outcome of one check on one class: instances examined and failure details.
type Outcome = (u64, Vec<String>);

fn names(class: &ConceptClass, i: usize) -> String {
    format!("{}={}", class.label(i), class.concept(i))
}

pub fn check_drop_pair(class: &ConceptClass) -> Outcome {
    let cache = LdimCache::new(class);
    let all = class.all();
    let mut n = 0;
    let mut fails = Vec::new();
    for a in 0..class.len() {
        for b in a + 1..class.len() {
            for x in class
                .concept(a)
                .symmetric_difference(class.concept(b))
                .expect("same domain")
            {
                n += 1;
                let sum = cache.drop_of(&all, a, x) + cache.drop_of(&all, b, x);
                if sum < 1 {
                    fails.push(format!(
                        "u({}, {x}) + u({}, {x}) = {sum}",
                        names(class, a),
                        names(class, b)
                    ));
                }
            }
        }
    }
    (n, fails)
}

pub fn check_edge_pair(class: &ConceptClass, convention: EdgeConvention) -> Outcome {
    let cache = LdimCache::new(class);
    let g = ThicketGraph::with_convention(&cache, class.all(), convention);
    let mut n = 0;
    let mut fails = Vec::new();
    for a in 0..class.len() {
        for b in a + 1..class.len() {
            n += 1;
            let sum = g.edge_weight(a, b).expect("members") + g.edge_weight(b, a).expect("members");
            if sum < Rational::one() {
                fails.push(format!(
                    "d({}, {}) + reverse = {}",
                    names(class, a),
                    names(class, b),
                    rational::format(&sum)
                ));
            }
        }
    }
    (n, fails)
}

pub fn max_query_rank(class: &ConceptClass, convention: EdgeConvention) -> Option<QueryRank> {
    let cache = LdimCache::new(class);
    let g = ThicketGraph::with_convention(&cache, class.all(), convention);
    g.max_min_query().ok().map(|(_, r)| r)
}

pub fn check_query_rank(class: &ConceptClass, convention: EdgeConvention) -> Outcome {
    if class.len() < 2 {
        return (0, Vec::new());
    }
    let best = max_query_rank(class, convention).expect("nonempty");
    let ok = best >= QueryRank::Finite(rational::half());
    (
        1,
        if ok {
            Vec::new()
        } else {
            vec![format!("max query rank {best} < 1/2")]
        },
    )
}

pub fn check_no_deficient_cycle(
    class: &ConceptClass,
    max_len: usize,
    convention: EdgeConvention,
) -> Outcome {
    let cache = LdimCache::new(class);
    let g = ThicketGraph::with_convention(&cache, class.all(), convention);
    match g.find_deficient_cycle(max_len) {
        None => (1, Vec::new()),
        Some(cycle) => {
            let shown: Vec<String> = cycle.iter().map(|&i| names(class, i)).collect();
            (1, vec![format!("deficient cycle {}", shown.join(" -> "))])
        }
    }
}

/// Exact expected number of counterexamples (queries strictly before the
/// successful one) for every target, against `2 Ldim`.
pub fn check_learner_bound(class: &ConceptClass, convention: EdgeConvention) -> Outcome {
    if class.len() < 2 {
        return (0, Vec::new());
    }
    let policy = MaxMinPolicy::with_convention(class, convention);
    let bound = rational::int(2 * policy.cache().ldim_all() as i64);
    let eval = ExactEvaluator::new(&policy);
    let mut fails = Vec::new();
    for t in 0..class.len() {
        let before = eval.expected_queries(t).expect("member target") - Rational::one();
        if before > bound {
            fails.push(format!(
                "target {}: expected counterexamples {} > {}",
                names(class, t),
                rational::format(&before),
                rational::format(&bound)
            ));
        }
    }
    (class.len() as u64, fails)
}

pub fn check_compression(class: &ConceptClass, max_sample_size: Option<usize>) -> Outcome {
    let k = max_sample_size.unwrap_or(class.domain().len());
    let report = certify_scheme(class, k).expect("nonempty class");
    let mut fails: Vec<String> = report
        .failures
        .iter()
        .map(|f| format!("sample {:?} -> {:?}: {}", f.sample, f.tuple, f.reason))
        .collect();
    if report.rho_count != report.d + 1 {
        fails.push(format!(
            "{} reconstructors for d = {}",
            report.rho_count, report.d
        ));
    }
    (report.samples_tested, fails)
}

pub fn run_check(class: &ConceptClass, check: Check, opts: &VerifyOptions) -> Outcome {
    match check {
        Check::DropPair => check_drop_pair(class),
        Check::EdgePair => check_edge_pair(class, opts.convention),
        Check::QueryRank => check_query_rank(class, opts.convention),
        Check::NoDeficientCycle => {
            check_no_deficient_cycle(class, opts.max_cycle_len, opts.convention)
        }
        Check::LearnerBound => check_learner_bound(class, opts.convention),
        Check::Compression => check_compression(class, opts.max_sample_size),
    }
}

/// Runs the selected checks on every class, in parallel across classes.
/// The report lists violations in class order.
pub fn verify_classes(classes: &[ConceptClass], opts: &VerifyOptions) -> VerifyReport {
    let per_class: Vec<Vec<(Check, Outcome)>> = classes
        .par_iter()
        .map(|c| {
            opts.checks
                .iter()
                .map(|&check| (check, run_check(c, check, opts)))
                .collect()
        })
        .collect();

    let mut checks: Vec<CheckSummary> = opts
        .checks
        .iter()
        .map(|&check| CheckSummary {
            check,
            instances: 0,
            failures: 0,
        })
        .collect();
    let mut violations = Vec::new();
    for (ci, results) in per_class.into_iter().enumerate() {
        for (slot, (check, (n, fails))) in results.into_iter().enumerate() {
            checks[slot].instances += n;
            checks[slot].failures += fails.len() as u64;
            if !fails.is_empty() {
                let witness = String::from_utf8(save_class(&classes[ci])).expect("utf-8");
                violations.extend(fails.into_iter().map(|detail| Violation {
                    check,
                    class_index: ci as u64,
                    detail,
                    witness: witness.clone(),
                }));
            }
        }
    }
    VerifyReport {
        classes: classes.len() as u64,
        checks,
        violations,
    }
}
