//! Extended `d`-compression with `d + 1` reconstruction functions, where `d`
//! is the Littlestone dimension of the class.
//!
//! Compression greedily picks sample points whose labelled restriction drops
//! the dimension, stopping when the sample becomes exceptional for the
//! current subclass or after `d` picks. A full run yields `d` distinct points
//! `(ā, d̄)`: the 1-labelled picks, then the 0-labelled ones. Early halts are
//! padded into tuples with repeated points:
//!
//! - `ā` nonempty, first element `a'`: `(ā, a', d̄, a', …, a')`, decoded by `ρ_1`;
//! - `ā` empty, `d̄` nonempty, first element `d'`: `(d̄, d', …, d')`, decoded by `ρ_0`;
//! - nothing picked: `(c, …, c)` for the first sample point `c`, decoded by
//!   `ρ_l` where `l` is the label at `c` that keeps the dimension of the root
//!   class.
//!
//! On tuples of distinct points `ρ_i` returns the first concept that is 1 on
//! the first `i` points and 0 on the rest.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::concept::{Concept, ConceptClass, ConceptSet, PartialAssignment};
use crate::error::{Error, Result};
use crate::littlestone::LdimCache;

/// Exactly `d` sample points, possibly repeated.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CompressedTuple(pub Vec<usize>);

impl CompressedTuple {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn points(&self) -> &[usize] {
        &self.0
    }

    fn is_distinct(&self) -> bool {
        self.0.iter().collect::<BTreeSet<_>>().len() == self.0.len()
    }

    fn all_equal(&self) -> Option<usize> {
        let first = *self.0.first()?;
        self.0.iter().all(|&p| p == first).then_some(first)
    }
}

/// What the greedy loop did for one sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressionTrace {
    /// Points picked with label 1, in pick order.
    pub ones: Vec<usize>,
    /// Points picked with label 0, in pick order.
    pub zeros: Vec<usize>,
    /// True when `d` points were picked.
    pub full_run: bool,
    pub tuple: CompressedTuple,
}

pub struct CompressionScheme<'a> {
    class: &'a ConceptClass,
    cache: LdimCache<'a>,
    d: usize,
}

impl<'a> CompressionScheme<'a> {
    pub fn new(class: &'a ConceptClass) -> Result<Self> {
        if class.is_empty() {
            return Err(Error::EmptyClass);
        }
        let cache = LdimCache::new(class);
        let d = cache.ldim_all() as usize;
        Ok(Self { class, cache, d })
    }

    pub fn class(&self) -> &'a ConceptClass {
        self.class
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn rho_count(&self) -> usize {
        self.d + 1
    }

    pub fn reconstructors(&self) -> Vec<Reconstructor<'_, 'a>> {
        (0..=self.d)
            .map(|index| Reconstructor {
                scheme: self,
                index,
            })
            .collect()
    }

    fn check_sample(&self, f: &PartialAssignment) -> Result<()> {
        if f.is_empty() {
            return Err(Error::EmptySample);
        }
        let len = self.class.domain().len();
        if let Some(index) = f.points().find(|&p| p >= len) {
            return Err(Error::PointOutOfRange { index, len });
        }
        if !self.class.concepts().iter().any(|c| c.agrees_with(f)) {
            return Err(Error::Unrealizable);
        }
        Ok(())
    }

    pub fn compress(&self, f: &PartialAssignment) -> Result<CompressedTuple> {
        self.trace(f).map(|t| t.tuple)
    }

    pub fn trace(&self, f: &PartialAssignment) -> Result<CompressionTrace> {
        self.check_sample(f)?;
        let mut current = self.class.all();
        let mut ones = Vec::new();
        let mut zeros = Vec::new();
        for _ in 0..self.d {
            if self.cache.is_exceptional(&current, f) {
                break;
            }
            let level = self.cache.ldim(&current);
            let (p, v, next) = f
                .iter()
                .find_map(|(p, v)| {
                    let next = self.class.split(&current, p, v);
                    (self.cache.ldim(&next) < level).then_some((p, v, next))
                })
                .expect("a non-exceptional sample has a dropping point");
            if v {
                ones.push(p);
            } else {
                zeros.push(p);
            }
            current = next;
        }
        let picked = ones.len() + zeros.len();
        let full_run = picked == self.d;
        let tuple = if full_run {
            ones.iter().chain(&zeros).copied().collect()
        } else if let Some(&a) = ones.first() {
            let mut t: Vec<usize> = ones.clone();
            t.push(a);
            t.extend(&zeros);
            t.resize(self.d, a);
            t
        } else if let Some(&z) = zeros.first() {
            let mut t = zeros.clone();
            t.resize(self.d, z);
            t
        } else {
            let c = f.points().next().expect("nonempty sample");
            vec![c; self.d]
        };
        Ok(CompressionTrace {
            ones,
            zeros,
            full_run,
            tuple: CompressedTuple(tuple),
        })
    }

    /// Label `l` at `c` with `Ldim(C_{c=l}) = Ldim(C)`, if one exists.
    pub fn collision_label(&self, c: usize) -> Option<bool> {
        let all = self.class.all();
        let d = self.cache.ldim(&all);
        [false, true]
            .into_iter()
            .find(|&v| self.cache.ldim(&self.class.split(&all, c, v)) == d)
    }

    /// Total extension (0 where undefined) of `f_S` for `S` the subclass
    /// agreeing with `ones ↦ 1, zeros ↦ 0`.
    fn extend_canonical(&self, ones: &[usize], zeros: &[usize]) -> Option<Concept> {
        let mut set: ConceptSet = self.class.all();
        for &p in ones {
            set = self.class.split(&set, p, true);
        }
        for &p in zeros {
            set = self.class.split(&set, p, false);
        }
        if set.is_clear() {
            return None;
        }
        Some(
            self.cache
                .canonical_partial(&set)
                .extend_with_zeros(self.class.domain().len()),
        )
    }

    fn failure(&self) -> Concept {
        Concept::zeros(self.class.domain().len())
    }

    /// `ρ_index` applied to `tuple`.
    pub fn reconstruct(&self, index: usize, tuple: &CompressedTuple) -> Concept {
        if index > self.d || tuple.len() != self.d {
            return self.failure();
        }
        if self.d == 0 {
            return self.class.concept(0).clone();
        }
        if let Some(c) = tuple.all_equal().filter(|_| index <= 1) {
            if self.collision_label(c) == Some(index == 1) {
                return self.extend_canonical(&[], &[]).expect("nonempty class");
            }
        }
        if tuple.is_distinct() {
            let pts = tuple.points();
            return self
                .class
                .concepts()
                .iter()
                .find(|g| {
                    pts.iter()
                        .enumerate()
                        .all(|(j, &p)| g.value(p) == (j < index))
                })
                .cloned()
                .unwrap_or_else(|| self.failure());
        }
        let decoded = match index {
            1 => decode_ones_padding(tuple),
            0 => decode_zeros_padding(tuple).map(|z| (Vec::new(), z)),
            _ => None,
        };
        decoded
            .and_then(|(ones, zeros)| self.extend_canonical(&ones, &zeros))
            .unwrap_or_else(|| self.failure())
    }
}

/// Inverse of the `(ā, a', d̄, a', …)` padding: `a'` is the first element,
/// `ā` the prefix before its second occurrence, `d̄` the following run of
/// points other than `a'`.
pub fn decode_ones_padding(tuple: &CompressedTuple) -> Option<(Vec<usize>, Vec<usize>)> {
    let pts = tuple.points();
    let first = *pts.first()?;
    let second = pts.iter().skip(1).position(|&p| p == first)? + 1;
    let ones = pts[..second].to_vec();
    let zeros = pts[second + 1..]
        .iter()
        .take_while(|&&p| p != first)
        .copied()
        .collect();
    Some((ones, zeros))
}

/// Inverse of the `(d̄, d', …, d')` padding: `d̄` is the prefix before the
/// second occurrence of the first element.
pub fn decode_zeros_padding(tuple: &CompressedTuple) -> Option<Vec<usize>> {
    let pts = tuple.points();
    let first = *pts.first()?;
    let second = pts.iter().skip(1).position(|&p| p == first)? + 1;
    Some(pts[..second].to_vec())
}

/// One reconstruction function of a scheme.
#[derive(Clone, Copy)]
pub struct Reconstructor<'s, 'a> {
    scheme: &'s CompressionScheme<'a>,
    index: usize,
}

impl Reconstructor<'_, '_> {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn apply(&self, tuple: &CompressedTuple) -> Concept {
        self.scheme.reconstruct(self.index, tuple)
    }
}

pub fn compress(class: &ConceptClass, f: &PartialAssignment) -> Result<CompressedTuple> {
    CompressionScheme::new(class)?.compress(f)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificationFailure {
    /// Sample as `(point name, label)` pairs.
    pub sample: Vec<(String, u8)>,
    pub tuple: Vec<String>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificationReport {
    pub d: usize,
    pub rho_count: usize,
    pub samples_tested: u64,
    pub successes: u64,
    pub tuple_length_ok: bool,
    pub subset_ok: bool,
    pub failures: Vec<CertificationFailure>,
}

impl CertificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
            && self.successes == self.samples_tested
            && self.tuple_length_ok
            && self.subset_ok
            && self.rho_count == self.d + 1
    }

    pub fn success_rate(&self) -> f64 {
        if self.samples_tested == 0 {
            1.0
        } else {
            self.successes as f64 / self.samples_tested as f64
        }
    }
}

/// Calls `visit` on every subset of `0..n` with `1..=max_size` elements, in
/// lexicographic order.
pub fn for_each_subset(n: usize, max_size: usize, mut visit: impl FnMut(&[usize])) {
    fn go(
        start: usize,
        n: usize,
        max_size: usize,
        cur: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        for x in start..n {
            cur.push(x);
            visit(cur);
            if cur.len() < max_size {
                go(x + 1, n, max_size, cur, visit);
            }
            cur.pop();
        }
    }
    go(0, n, max_size, &mut Vec::new(), &mut visit);
}

/// Compresses every realizable sample on at most `max_sample_size` points and
/// checks that some reconstructor recovers it.
pub fn certify_scheme(class: &ConceptClass, max_sample_size: usize) -> Result<CertificationReport> {
    let scheme = CompressionScheme::new(class)?;
    let d = scheme.dimension();
    let rhos = scheme.reconstructors();
    let domain = class.domain();
    let mut report = CertificationReport {
        d,
        rho_count: rhos.len(),
        samples_tested: 0,
        successes: 0,
        tuple_length_ok: true,
        subset_ok: true,
        failures: Vec::new(),
    };
    let mut failures = Vec::new();
    for_each_subset(domain.len(), max_sample_size, |subset| {
        let samples: BTreeSet<PartialAssignment> = class
            .concepts()
            .iter()
            .map(|c| PartialAssignment::from_concept(c, subset.iter().copied()))
            .collect();
        for f in samples {
            report.samples_tested += 1;
            let trace = scheme.trace(&f).expect("realizable nonempty sample");
            let mut reasons = check_trace(&scheme, &f, &trace);
            if trace.tuple.len() != d {
                report.tuple_length_ok = false;
            }
            if !trace.tuple.points().iter().all(|&p| f.get(p).is_some()) {
                report.subset_ok = false;
            }
            let recovered = rhos
                .iter()
                .any(|rho| rho.apply(&trace.tuple).agrees_with(&f));
            if recovered {
                report.successes += 1;
            } else {
                reasons.push("no reconstructor recovers the sample".to_string());
            }
            if !reasons.is_empty() {
                failures.push(CertificationFailure {
                    sample: f
                        .iter()
                        .map(|(p, v)| (domain.name(p).to_string(), v as u8))
                        .collect(),
                    tuple: trace
                        .tuple
                        .points()
                        .iter()
                        .map(|&p| domain.name(p).to_string())
                        .collect(),
                    reason: reasons.join("; "),
                });
            }
        }
    });
    report.failures = failures;
    Ok(report)
}

/// Structural invariants of one compression run.
fn check_trace(
    scheme: &CompressionScheme<'_>,
    f: &PartialAssignment,
    trace: &CompressionTrace,
) -> Vec<String> {
    let d = scheme.dimension();
    let mut reasons = Vec::new();
    if trace.tuple.len() != d {
        reasons.push(format!("tuple length {} != d = {d}", trace.tuple.len()));
    }
    if !trace.tuple.points().iter().all(|&p| f.get(p).is_some()) {
        reasons.push("tuple leaves the sample domain".into());
    }
    if d == 0 {
        return reasons;
    }
    let picked = trace.ones.len() + trace.zeros.len();
    if trace.full_run {
        if !trace.tuple.is_distinct() {
            reasons.push("full-run tuple repeats a point".into());
        }
        let class = scheme.class();
        let mut set = class.all();
        for &p in &trace.ones {
            set = class.split(&set, p, true);
        }
        for &p in &trace.zeros {
            set = class.split(&set, p, false);
        }
        if set.count_ones(..) != 1 {
            reasons.push("full-run restriction is not a singleton".into());
        }
    } else if !trace.ones.is_empty() {
        if picked + 1 > d {
            reasons.push("early-halt encoding longer than d".into());
        }
        if decode_ones_padding(&trace.tuple) != Some((trace.ones.clone(), trace.zeros.clone())) {
            reasons.push("ones-padding does not decode to the picks".into());
        }
    } else if !trace.zeros.is_empty()
        && decode_zeros_padding(&trace.tuple).as_deref() != Some(&trace.zeros[..])
    {
        reasons.push("zeros-padding does not decode to the picks".into());
    }
    reasons
}
