//! The max-min equivalence-query learner and a random-counterexample teacher.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::concept::{Concept, ConceptClass, ConceptSet, Domain};
use crate::error::{Error, Result};
use crate::littlestone::LdimCache;
use crate::rational::Rational;
use crate::thicket::{EdgeConvention, ThicketGraph};

/// Answer to an equivalence query.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum TeacherResponse<P = usize> {
    Equivalent,
    Counterexample { point: P, label: bool },
}

/// Seeded generator used everywhere a run needs randomness.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-trial seed: the first word of ChaCha stream `index` keyed by `master`.
/// Independent of the order in which trials are executed.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

/// Picks index `i` with probability `weights[i] / Σ weights`.
///
/// Uses a uniform variate `u / 2^64` and exact rational cumulative sums: the
/// result is the first `i` with `u · total < 2^64 · cum_i`. Weights must be
/// nonnegative with a positive total.
pub fn sample_weighted<R: Rng + ?Sized>(weights: &[Rational], rng: &mut R) -> usize {
    let u = Rational::from_integer(BigInt::from(rng.next_u64()));
    let scale = Rational::from_integer(BigInt::one() << 64u32);
    let total: Rational = weights.iter().sum();
    let threshold = u * total;
    let mut cum = Rational::zero();
    for (i, w) in weights.iter().enumerate() {
        cum += w;
        if threshold < &scale * &cum {
            return i;
        }
    }
    // Unreachable with a positive total; keep the last positive weight.
    weights
        .iter()
        .rposition(|w| !w.is_zero())
        .expect("weights have positive total")
}

/// Random counterexample teacher: samples `x ∈ Δ(hypothesis, target)` with
/// probability `μ(x) / μ(Δ)` and reveals the target's label there.
pub fn teacher_respond<R: Rng + ?Sized>(
    target: &Concept,
    hypothesis: &Concept,
    domain: &Domain,
    rng: &mut R,
) -> Result<TeacherResponse> {
    let delta = target.symmetric_difference(hypothesis)?;
    if delta.is_empty() {
        return Ok(TeacherResponse::Equivalent);
    }
    let weights: Vec<Rational> = delta.iter().map(|&x| domain.weight(x).clone()).collect();
    let point = delta[sample_weighted(&weights, rng)];
    Ok(TeacherResponse::Counterexample {
        point,
        label: target.value(point),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Query<P = usize> {
    /// Concept index of the hypothesis (root-class index, or family index in
    /// staged runs).
    pub hypothesis: usize,
    pub response: TeacherResponse<P>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Transcript<P = usize> {
    pub queries: Vec<Query<P>>,
    pub seed: u64,
}

impl<P> Transcript<P> {
    pub fn new(seed: u64) -> Self {
        Self {
            queries: Vec::new(),
            seed,
        }
    }

    pub fn query_count(&self) -> usize {
        self.queries.len()
    }

    pub fn identified(&self) -> bool {
        matches!(
            self.queries.last(),
            Some(Query {
                response: TeacherResponse::Equivalent,
                ..
            })
        )
    }
}

/// The deterministic max-min query rule, memoised per subclass.
pub struct MaxMinPolicy<'a> {
    cache: LdimCache<'a>,
    convention: EdgeConvention,
    choices: RefCell<HashMap<ConceptSet, usize>>,
}

impl<'a> MaxMinPolicy<'a> {
    pub fn new(class: &'a ConceptClass) -> Self {
        Self::with_convention(class, EdgeConvention::Target)
    }

    pub fn with_convention(class: &'a ConceptClass, convention: EdgeConvention) -> Self {
        Self {
            cache: LdimCache::new(class),
            convention,
            choices: RefCell::new(HashMap::new()),
        }
    }

    pub fn class(&self) -> &'a ConceptClass {
        self.cache.class()
    }

    pub fn cache(&self) -> &LdimCache<'a> {
        &self.cache
    }

    /// Concept queried on the subclass `members`.
    pub fn query(&self, members: &ConceptSet) -> Result<usize> {
        if let Some(&q) = self.choices.borrow().get(members) {
            return Ok(q);
        }
        let (q, _) = ThicketGraph::with_convention(&self.cache, members.clone(), self.convention)
            .max_min_query()?;
        self.choices.borrow_mut().insert(members.clone(), q);
        Ok(q)
    }
}

/// Running state of one learning episode.
pub struct LearnerState<'p, 'a> {
    policy: &'p MaxMinPolicy<'a>,
    members: ConceptSet,
}

impl<'p, 'a> LearnerState<'p, 'a> {
    pub fn new(policy: &'p MaxMinPolicy<'a>) -> Self {
        Self::with_members(policy, policy.class().all())
    }

    pub fn with_members(policy: &'p MaxMinPolicy<'a>, members: ConceptSet) -> Self {
        Self { policy, members }
    }

    pub fn members(&self) -> &ConceptSet {
        &self.members
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_clear()
    }

    pub fn ldim(&self) -> i32 {
        self.policy.cache.ldim(&self.members)
    }

    pub fn next_query(&self) -> Result<usize> {
        self.policy.query(&self.members)
    }

    /// Keeps the concepts labelling `point` with `label`; returns the Ldim drop.
    pub fn observe(&mut self, point: usize, label: bool) -> i32 {
        let before = self.ldim();
        self.members = self.policy.class().split(&self.members, point, label);
        before - self.ldim()
    }
}

/// One episode of the max-min learner against the random teacher.
pub fn run_thicket_learner(
    class: &ConceptClass,
    target: &Concept,
    seed: u64,
) -> Result<Transcript> {
    let target = class.index_of(target).ok_or(Error::NotInClass)?;
    let policy = MaxMinPolicy::new(class);
    Ok(run_episode(&policy, target, seed)?.0)
}

/// Episode on a shared policy. Also returns the total Ldim drop.
pub fn run_episode(
    policy: &MaxMinPolicy<'_>,
    target: usize,
    seed: u64,
) -> Result<(Transcript, i64)> {
    let class = policy.class();
    if target >= class.len() {
        return Err(Error::NotInClass);
    }
    let target_concept = class.concept(target);
    let mut rng = rng_from_seed(seed);
    let mut state = LearnerState::new(policy);
    let mut transcript = Transcript::new(seed);
    let mut dropped = 0i64;
    loop {
        let q = state.next_query()?;
        let response = teacher_respond(target_concept, class.concept(q), class.domain(), &mut rng)?;
        transcript.queries.push(Query {
            hypothesis: q,
            response: response.clone(),
        });
        match response {
            TeacherResponse::Equivalent => return Ok((transcript, dropped)),
            TeacherResponse::Counterexample { point, label } => {
                dropped += state.observe(point, label) as i64;
                debug_assert!(state.members().contains(target));
            }
        }
    }
}

/// Exact expected number of queries, counting the final successful one.
pub fn exact_expected_queries(class: &ConceptClass, target: &Concept) -> Result<Rational> {
    let target = class.index_of(target).ok_or(Error::NotInClass)?;
    let policy = MaxMinPolicy::new(class);
    ExactEvaluator::new(&policy).expected_queries(target)
}

/// Memoised evaluator of `E[queries]` for a fixed policy.
pub struct ExactEvaluator<'p, 'a> {
    policy: &'p MaxMinPolicy<'a>,
}

impl<'p, 'a> ExactEvaluator<'p, 'a> {
    pub fn new(policy: &'p MaxMinPolicy<'a>) -> Self {
        Self { policy }
    }

    pub fn expected_queries(&self, target: usize) -> Result<Rational> {
        let class = self.policy.class();
        if target >= class.len() {
            return Err(Error::NotInClass);
        }
        let mut memo = HashMap::new();
        self.expect(&class.all(), target, &mut memo)
    }

    fn expect(
        &self,
        members: &ConceptSet,
        target: usize,
        memo: &mut HashMap<ConceptSet, Rational>,
    ) -> Result<Rational> {
        if let Some(v) = memo.get(members) {
            return Ok(v.clone());
        }
        let class = self.policy.class();
        let q = self.policy.query(members)?;
        let value = if q == target {
            Rational::one()
        } else {
            let t = class.concept(target);
            let delta = t.symmetric_difference(class.concept(q))?;
            let total = class.domain().mass(&delta);
            let mut sum = Rational::zero();
            for x in delta {
                let next = class.split(members, x, t.value(x));
                sum += class.domain().weight(x) * self.expect(&next, target, memo)?;
            }
            Rational::one() + sum / total
        };
        memo.insert(members.clone(), value.clone());
        Ok(value)
    }
}

/// Aggregate of many seeded episodes. Built from exact integer counts, so it
/// does not depend on trial execution order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub trials: u64,
    pub seed: u64,
    pub mean: f64,
    /// Unbiased sample variance (0 for a single trial).
    pub variance: f64,
    pub max: u64,
    pub histogram: BTreeMap<u64, u64>,
    pub counterexamples: u64,
    pub ldim_drop_total: i64,
}

impl Summary {
    pub fn from_counts(
        seed: u64,
        histogram: BTreeMap<u64, u64>,
        counterexamples: u64,
        ldim_drop_total: i64,
    ) -> Self {
        let trials: u64 = histogram.values().sum();
        let sum: u128 = histogram.iter().map(|(&q, &n)| q as u128 * n as u128).sum();
        let sum_sq: u128 = histogram
            .iter()
            .map(|(&q, &n)| (q as u128) * (q as u128) * n as u128)
            .sum();
        let mean = Rational::new(BigInt::from(sum), BigInt::from(trials.max(1)));
        let variance = if trials > 1 {
            // (Σq² - (Σq)²/n) / (n - 1), exact.
            let n = BigInt::from(trials);
            let num = BigInt::from(sum_sq) * &n - BigInt::from(sum) * BigInt::from(sum);
            Rational::new(num, &n * (&n - 1))
        } else {
            Rational::zero()
        };
        Self {
            trials,
            seed,
            mean: mean.to_f64().unwrap_or(f64::NAN),
            variance: variance.to_f64().unwrap_or(f64::NAN),
            max: histogram.keys().next_back().copied().unwrap_or(0),
            histogram,
            counterexamples,
            ldim_drop_total,
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        (self.variance / self.trials as f64).sqrt()
    }

    /// Average Ldim drop per counterexample, if any were received.
    pub fn mean_drop_per_counterexample(&self) -> Option<f64> {
        (self.counterexamples > 0)
            .then(|| self.ldim_drop_total as f64 / self.counterexamples as f64)
    }

    pub fn csv_row(&self, class: &str, target: &str) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            csv_field(class),
            csv_field(target),
            self.trials,
            self.seed,
            self.mean,
            self.variance,
            self.max
        )
    }
}

pub const CSV_HEADER: &str = "class,target,trials,seed,mean,variance,max";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn monte_carlo_trials(
    class: &ConceptClass,
    target: &Concept,
    trials: u64,
    seed: u64,
) -> Result<Summary> {
    let target = class.index_of(target).ok_or(Error::NotInClass)?;
    let policy = MaxMinPolicy::new(class);
    monte_carlo_with_policy(&policy, target, trials, seed)
}

pub fn monte_carlo_with_policy(
    policy: &MaxMinPolicy<'_>,
    target: usize,
    trials: u64,
    seed: u64,
) -> Result<Summary> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let mut histogram = BTreeMap::new();
    let mut counterexamples = 0u64;
    let mut dropped = 0i64;
    for i in 0..trials {
        let (t, d) = run_episode(policy, target, trial_seed(seed, i))?;
        *histogram.entry(t.query_count() as u64).or_insert(0) += 1;
        counterexamples += t.query_count() as u64 - 1;
        dropped += d;
    }
    Ok(Summary::from_counts(
        seed,
        histogram,
        counterexamples,
        dropped,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn c3() -> ConceptClass {
        ConceptClass::from_bitstrings(&["10", "01", "11"]).unwrap()
    }

    #[test]
    fn teacher_equivalent_and_forced() {
        let d = Domain::uniform(3);
        let mut rng = rng_from_seed(1);
        let a = Concept::parse("101").unwrap();
        let b = Concept::parse("111").unwrap();
        assert_eq!(
            teacher_respond(&a, &a, &d, &mut rng).unwrap(),
            TeacherResponse::Equivalent
        );
        for _ in 0..20 {
            assert_eq!(
                teacher_respond(&a, &b, &d, &mut rng).unwrap(),
                TeacherResponse::Counterexample {
                    point: 1,
                    label: false
                }
            );
        }
    }

    #[test]
    fn teacher_frequencies_match_conditional_mass() {
        let d = Domain::uniform(2);
        let a = Concept::parse("10").unwrap();
        let b = Concept::parse("01").unwrap();
        let mut rng = rng_from_seed(42);
        let hits = (0..10_000)
            .filter(|_| {
                matches!(
                    teacher_respond(&a, &b, &d, &mut rng).unwrap(),
                    TeacherResponse::Counterexample { point: 0, .. }
                )
            })
            .count();
        let freq = hits as f64 / 10_000.0;
        assert!((freq - 0.5).abs() <= 0.02, "{freq}");
    }

    #[test]
    fn weighted_sampling_skips_zero_weights() {
        let mut rng = rng_from_seed(3);
        let w = [int(0), int(1), int(0)];
        for _ in 0..100 {
            assert_eq!(sample_weighted(&w, &mut rng), 1);
        }
    }

    #[test]
    fn singleton_takes_one_query() {
        let c = ConceptClass::from_bitstrings(&["011"]).unwrap();
        let t = run_thicket_learner(&c, c.concept(0), 9).unwrap();
        assert_eq!(t.query_count(), 1);
        assert!(t.identified());
        assert_eq!(exact_expected_queries(&c, c.concept(0)).unwrap(), int(1));
    }

    #[test]
    fn two_concepts_at_most_two_queries() {
        let dom = Domain::with_weights(vec![ratio(1, 3), ratio(2, 3)]).unwrap();
        let c = ConceptClass::from_bitstrings_weighted(dom, &["10", "01"]).unwrap();
        for seed in 0..50 {
            for t in c.concepts() {
                let tr = run_thicket_learner(&c, t, seed).unwrap();
                assert!(tr.query_count() <= 2 && tr.identified());
            }
        }
        // Learner queries "10" first.
        assert_eq!(exact_expected_queries(&c, c.concept(1)).unwrap(), int(2));
        assert_eq!(exact_expected_queries(&c, c.concept(0)).unwrap(), int(1));
    }

    #[test]
    fn c3_exact_values() {
        let c = c3();
        // Query 11 first; its counterexample isolates the target.
        assert_eq!(exact_expected_queries(&c, c.concept(0)).unwrap(), int(2));
        assert_eq!(exact_expected_queries(&c, c.concept(1)).unwrap(), int(2));
        assert_eq!(exact_expected_queries(&c, c.concept(2)).unwrap(), int(1));
    }

    #[test]
    fn target_outside_class_is_rejected() {
        let c = c3();
        assert!(matches!(
            run_thicket_learner(&c, &Concept::parse("00").unwrap(), 0),
            Err(Error::NotInClass)
        ));
        assert!(matches!(
            exact_expected_queries(&c, &Concept::parse("00").unwrap()),
            Err(Error::NotInClass)
        ));
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let c = ConceptClass::from_bitstrings(&["100", "010", "001", "111"]).unwrap();
        let a = monte_carlo_trials(&c, c.concept(2), 500, 11).unwrap();
        let b = monte_carlo_trials(&c, c.concept(2), 500, 11).unwrap();
        assert_eq!(a, b);
        let single = monte_carlo_trials(&c, c.concept(2), 1, 11).unwrap();
        assert_eq!(single.trials, 1);
        assert_eq!(single.variance, 0.0);
        let s = ConceptClass::from_bitstrings(&["1"]).unwrap();
        let m = monte_carlo_trials(&s, s.concept(0), 100, 0).unwrap();
        assert_eq!((m.mean, m.variance, m.max), (1.0, 0.0, 1));
        assert!(monte_carlo_trials(&s, s.concept(0), 0, 0).is_err());
    }

    #[test]
    fn trial_seeds_differ_per_index() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| trial_seed(5, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_eq!(trial_seed(5, 17), trial_seed(5, 17));
    }

    #[test]
    fn csv_row_layout() {
        let s = Summary::from_counts(7, BTreeMap::from([(1, 1), (3, 1)]), 2, 1);
        assert_eq!(s.csv_row("c,3", "A"), "\"c,3\",A,2,7,2,2,3");
    }
}
