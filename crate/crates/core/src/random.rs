//! Seeded random classes and exhaustive class enumeration.

use rand::seq::index;
use rand::Rng;

use crate::concept::{Concept, ConceptClass, Domain};
use crate::learner::{rng_from_seed, trial_seed};
use crate::rational::{self, Rational};

/// Largest integer numerator used for random weights before normalising.
const WEIGHT_RANGE: i64 = 16;

/// Random strictly positive rational weights summing to 1.
pub fn random_weights<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Rational> {
    let raw: Vec<i64> = (0..n).map(|_| rng.random_range(1..=WEIGHT_RANGE)).collect();
    let total: i64 = raw.iter().sum();
    raw.into_iter().map(|w| rational::ratio(w, total)).collect()
}

/// Concept whose bit `i` is bit `i` of `code`.
pub fn concept_from_code(code: usize, n: usize) -> Concept {
    Concept::from_bits((0..n).map(|i| code >> i & 1 == 1).collect())
}

/// `concepts` distinct random concepts over `domain_size` points with random
/// weights. `concepts` is clamped to `2^domain_size`.
pub fn random_class<R: Rng + ?Sized>(
    rng: &mut R,
    domain_size: usize,
    concepts: usize,
) -> ConceptClass {
    assert!((1..usize::BITS as usize).contains(&domain_size));
    let space = 1usize << domain_size;
    let m = concepts.min(space);
    let domain =
        Domain::with_weights(random_weights(rng, domain_size)).expect("normalised weights");
    let concepts = index::sample(rng, space, m)
        .into_iter()
        .map(|code| concept_from_code(code, domain_size))
        .collect();
    ConceptClass::new(domain, concepts, None).expect("distinct concepts")
}

/// Domain size uniform in `1..=max_domain`, class size uniform in
/// `1..=min(max_concepts, 2^n)`.
pub fn random_class_bounded<R: Rng + ?Sized>(
    rng: &mut R,
    max_domain: usize,
    max_concepts: usize,
) -> ConceptClass {
    let n = rng.random_range(1..=max_domain);
    let cap = max_concepts.min(1 << n);
    let m = rng.random_range(1..=cap);
    random_class(rng, n, m)
}

/// Like [`random_class_bounded`] but with at least two concepts, as needed by
/// statements about pairs.
pub fn random_class_pairs<R: Rng + ?Sized>(
    rng: &mut R,
    max_domain: usize,
    max_concepts: usize,
) -> ConceptClass {
    assert!(max_concepts >= 2);
    let n = rng.random_range(1..=max_domain);
    let cap = max_concepts.min(1 << n);
    let m = rng.random_range(2..=cap.max(2));
    random_class(rng, n, m)
}

/// The `i`-th class of a reproducible corpus: class `i` depends only on
/// `(seed, i)`.
pub fn corpus_class(seed: u64, i: u64, max_domain: usize, max_concepts: usize) -> ConceptClass {
    let mut rng = rng_from_seed(trial_seed(seed, i));
    random_class_pairs(&mut rng, max_domain, max_concepts)
}

pub fn corpus(seed: u64, count: u64, max_domain: usize, max_concepts: usize) -> Vec<ConceptClass> {
    (0..count)
        .map(|i| corpus_class(seed, i, max_domain, max_concepts))
        .collect()
}

/// Every nonempty class over `n` points (subsets of the powerset), in order
/// of the subset bitmask, over the given domain.
pub fn all_classes(domain: Domain) -> impl Iterator<Item = ConceptClass> {
    let n = domain.len();
    assert!(n <= 4, "2^(2^n) classes; only feasible for n <= 4");
    let space = 1usize << n;
    let domain = std::sync::Arc::new(domain);
    (1u64..(1u64 << space)).map(move |mask| {
        let concepts = (0..space)
            .filter(|c| mask >> c & 1 == 1)
            .map(|c| concept_from_code(c, n))
            .collect();
        ConceptClass::new(domain.clone(), concepts, None).expect("distinct concepts")
    })
}
