//! Finite weighted domains, concepts and concept classes.
//!
//! Points and concepts are addressed by their position (file order). All
//! set-valued work inside the crate is done on [`ConceptSet`] masks over the
//! concept indices of a root class, so restricting a class never copies
//! concepts until a caller asks for a materialised [`ConceptClass`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Subset of the concept indices of a root class.
pub type ConceptSet = FixedBitSet;

/// A finite domain with a strictly positive probability weight per point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Domain {
    points: Vec<String>,
    mu: Vec<Rational>,
}

impl Domain {
    pub fn new(points: Vec<String>, mu: Vec<Rational>) -> Result<Self> {
        if points.len() != mu.len() {
            return Err(Error::WeightCountMismatch {
                points: points.len(),
                weights: mu.len(),
            });
        }
        let mut seen = HashSet::new();
        for p in &points {
            if !seen.insert(p.as_str()) {
                return Err(Error::DuplicatePoint(p.clone()));
            }
        }
        for (p, w) in points.iter().zip(&mu) {
            if !rational::is_positive(w) {
                return Err(Error::NonPositiveWeight {
                    point: p.clone(),
                    value: rational::format(w),
                });
            }
        }
        let total: Rational = mu.iter().sum();
        if !total.is_one() {
            return Err(Error::WeightsNotNormalized(rational::format(&total)));
        }
        Ok(Self { points, mu })
    }

    /// Uniform weights over points named `x1..xn`.
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "a domain needs at least one point");
        let points = (1..=n).map(|i| format!("x{i}")).collect();
        let mu = vec![rational::ratio(1, n as i64); n];
        Self { points, mu }
    }

    /// Points named `x1..xn` with the given (already normalised) weights.
    pub fn with_weights(mu: Vec<Rational>) -> Result<Self> {
        let points = (1..=mu.len()).map(|i| format!("x{i}")).collect();
        Self::new(points, mu)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn name(&self, point: usize) -> &str {
        &self.points[point]
    }

    pub fn weight(&self, point: usize) -> &Rational {
        &self.mu[point]
    }

    pub fn weights(&self) -> &[Rational] {
        &self.mu
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.points.iter().position(|p| p == name)
    }

    /// Exact measure of a set of points.
    pub fn mass(&self, points: &[usize]) -> Rational {
        points
            .iter()
            .fold(Rational::zero(), |acc, &p| acc + &self.mu[p])
    }

    /// Same points, weights replaced. Used by relabelling/scaling tests and
    /// the random generators.
    pub fn reweighted(&self, mu: Vec<Rational>) -> Result<Self> {
        Self::new(self.points.clone(), mu)
    }

    /// Reorders the points: point `i` of the result is point `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            points: perm.iter().map(|&i| self.points[i].clone()).collect(),
            mu: perm.iter().map(|&i| self.mu[i].clone()).collect(),
        }
    }
}

pub fn mass(domain: &Domain, points: &[usize]) -> Rational {
    domain.mass(points)
}

/// A total boolean function on a domain, stored in domain order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Concept {
    bits: Vec<bool>,
}

impl Concept {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            bits: vec![false; len],
        }
    }

    /// Parses `"0110"`; character `i` is the value at point `i`.
    pub fn parse(s: &str) -> Option<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Self::from_bits)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn value(&self, point: usize) -> bool {
        self.bits[point]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn to_bitstring(&self) -> String {
        self.bits
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }

    /// Points where the two concepts disagree, in domain order.
    pub fn symmetric_difference(&self, other: &Concept) -> Result<Vec<usize>> {
        if self.len() != other.len() {
            return Err(Error::DomainMismatch);
        }
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| i)
            .collect())
    }

    pub fn agrees_with(&self, assignment: &PartialAssignment) -> bool {
        assignment.iter().all(|(p, v)| self.bits.get(p) == Some(&v))
    }

    /// Reorders coordinates to match [`Domain::permuted`].
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self::from_bits(perm.iter().map(|&i| self.bits[i]).collect())
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bitstring())
    }
}

pub fn symmetric_difference(a: &Concept, b: &Concept) -> Result<Vec<usize>> {
    a.symmetric_difference(b)
}

/// A finite map from points to labels.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialAssignment {
    entries: BTreeMap<usize, bool>,
}

impl PartialAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Resolves point names against a domain.
    pub fn named<'a>(
        domain: &Domain,
        entries: impl IntoIterator<Item = (&'a str, bool)>,
    ) -> Result<Self> {
        let mut out = Self::new();
        for (name, v) in entries {
            let p = domain
                .index_of(name)
                .ok_or_else(|| Error::UnknownPoint(name.to_string()))?;
            out.insert(p, v);
        }
        Ok(out)
    }

    /// The restriction of `concept` to `points`.
    pub fn from_concept(concept: &Concept, points: impl IntoIterator<Item = usize>) -> Self {
        points.into_iter().map(|p| (p, concept.value(p))).collect()
    }

    pub fn insert(&mut self, point: usize, value: bool) -> Option<bool> {
        self.entries.insert(point, value)
    }

    pub fn get(&self, point: usize) -> Option<bool> {
        self.entries.get(&point).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.entries.iter().map(|(&p, &v)| (p, v))
    }

    /// Domain points in increasing order.
    pub fn points(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    /// True when every entry of `other` is present here with the same value.
    pub fn extends(&self, other: &PartialAssignment) -> bool {
        other.iter().all(|(p, v)| self.get(p) == Some(v))
    }

    /// Union of two assignments, `None` if they disagree somewhere.
    pub fn union(&self, other: &PartialAssignment) -> Option<PartialAssignment> {
        let mut out = self.clone();
        for (p, v) in other.iter() {
            if out.insert(p, v).is_some_and(|old| old != v) {
                return None;
            }
        }
        Some(out)
    }

    /// Total concept extending this assignment with 0 elsewhere.
    pub fn extend_with_zeros(&self, len: usize) -> Concept {
        let mut bits = vec![false; len];
        for (p, v) in self.iter() {
            bits[p] = v;
        }
        Concept::from_bits(bits)
    }
}

impl FromIterator<(usize, bool)> for PartialAssignment {
    fn from_iter<T: IntoIterator<Item = (usize, bool)>>(iter: T) -> Self {
        Self {
            entries: iter.into_iter().collect(),
        }
    }
}

/// An ordered set of distinct concepts over a shared domain.
#[derive(Clone, Debug)]
pub struct ConceptClass {
    domain: Arc<Domain>,
    concepts: Vec<Concept>,
    labels: Vec<String>,
    /// `ones[x]` holds the indices of concepts that are 1 at point `x`.
    ones: Vec<ConceptSet>,
}

impl PartialEq for ConceptClass {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain
            && self.concepts == other.concepts
            && self.labels == other.labels
    }
}

impl Eq for ConceptClass {}

impl ConceptClass {
    /// Builds a class; labels default to `C0, C1, ...`.
    pub fn new(
        domain: impl Into<Arc<Domain>>,
        concepts: Vec<Concept>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let domain = domain.into();
        let labels =
            labels.unwrap_or_else(|| (0..concepts.len()).map(|i| format!("C{i}")).collect());
        if labels.len() != concepts.len() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} concepts",
                labels.len(),
                concepts.len()
            )));
        }
        let mut seen_labels = HashSet::new();
        for l in &labels {
            if !seen_labels.insert(l.as_str()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        let mut seen: HashMap<&Concept, usize> = HashMap::new();
        for (i, c) in concepts.iter().enumerate() {
            if c.len() != domain.len() {
                return Err(Error::BitstringLength {
                    label: labels[i].clone(),
                    expected: domain.len(),
                    found: c.len(),
                });
            }
            if let Some(&j) = seen.get(c) {
                return Err(Error::DuplicateConcept {
                    first: labels[j].clone(),
                    second: labels[i].clone(),
                });
            }
            seen.insert(c, i);
        }
        Ok(Self::from_parts(domain, concepts, labels))
    }

    /// Class given by bitstrings over a uniform domain; handy in tests.
    pub fn from_bitstrings(bitstrings: &[&str]) -> Result<Self> {
        let n = bitstrings.first().map_or(1, |s| s.len());
        Self::from_bitstrings_weighted(Domain::uniform(n), bitstrings)
    }

    pub fn from_bitstrings_weighted(domain: Domain, bitstrings: &[&str]) -> Result<Self> {
        let labels: Vec<String> = (0..bitstrings.len()).map(|i| format!("C{i}")).collect();
        let concepts = bitstrings
            .iter()
            .zip(&labels)
            .map(|(s, l)| {
                Concept::parse(s).ok_or_else(|| Error::BitstringChar {
                    label: l.clone(),
                    found: s.chars().find(|c| *c != '0' && *c != '1').unwrap_or('?'),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(domain, concepts, Some(labels))
    }

    pub fn empty(domain: impl Into<Arc<Domain>>) -> Self {
        Self::from_parts(domain.into(), Vec::new(), Vec::new())
    }

    fn from_parts(domain: Arc<Domain>, concepts: Vec<Concept>, labels: Vec<String>) -> Self {
        let mut ones = vec![ConceptSet::with_capacity(concepts.len()); domain.len()];
        for (i, c) in concepts.iter().enumerate() {
            for (x, col) in ones.iter_mut().enumerate() {
                if c.value(x) {
                    col.insert(i);
                }
            }
        }
        Self {
            domain,
            concepts,
            labels,
            ones,
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn shared_domain(&self) -> Arc<Domain> {
        Arc::clone(&self.domain)
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn concept(&self, index: usize) -> &Concept {
        &self.concepts[index]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, concept: &Concept) -> Option<usize> {
        self.concepts.iter().position(|c| c == concept)
    }

    pub fn index_of_label(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Mask containing every concept.
    pub fn all(&self) -> ConceptSet {
        let mut s = ConceptSet::with_capacity(self.len());
        s.insert_range(..);
        s
    }

    /// Concepts of `set` with value `value` at `point`.
    pub fn split(&self, set: &ConceptSet, point: usize, value: bool) -> ConceptSet {
        let mut out = set.clone();
        if value {
            out.intersect_with(&self.ones[point]);
        } else {
            out.difference_with(&self.ones[point]);
        }
        out
    }

    /// Concepts of `set` agreeing with `assignment` everywhere.
    pub fn restrict_set(&self, set: &ConceptSet, assignment: &PartialAssignment) -> ConceptSet {
        assignment
            .iter()
            .fold(set.clone(), |acc, (p, v)| self.split(&acc, p, v))
    }

    /// Materialises a mask as a class over the same domain, keeping order and labels.
    pub fn subclass(&self, set: &ConceptSet) -> ConceptClass {
        let (concepts, labels) = set
            .ones()
            .map(|i| (self.concepts[i].clone(), self.labels[i].clone()))
            .unzip();
        Self::from_parts(Arc::clone(&self.domain), concepts, labels)
    }

    fn check_assignment(&self, assignment: &PartialAssignment) -> Result<()> {
        match assignment.points().find(|&p| p >= self.domain.len()) {
            Some(index) => Err(Error::PointOutOfRange {
                index,
                len: self.domain.len(),
            }),
            None => Ok(()),
        }
    }

    /// The subclass of concepts agreeing with `assignment`.
    pub fn restrict(&self, assignment: &PartialAssignment) -> Result<ConceptClass> {
        self.check_assignment(assignment)?;
        Ok(self.subclass(&self.restrict_set(&self.all(), assignment)))
    }

    /// Concepts relabelled by a point permutation (see [`Domain::permuted`]).
    pub fn permuted(&self, perm: &[usize]) -> ConceptClass {
        Self::from_parts(
            Arc::new(self.domain.permuted(perm)),
            self.concepts.iter().map(|c| c.permuted(perm)).collect(),
            self.labels.clone(),
        )
    }

    /// Same concepts over a reweighted domain.
    pub fn with_domain(&self, domain: Domain) -> Result<ConceptClass> {
        Self::new(domain, self.concepts.clone(), Some(self.labels.clone()))
    }
}

pub fn restrict(class: &ConceptClass, assignment: &PartialAssignment) -> Result<ConceptClass> {
    class.restrict(assignment)
}
