//! Exact Littlestone dimension and the quantities derived from it.
//!
//! `Ldim(∅) = -1`, `Ldim({c}) = 0`, and otherwise
//! `Ldim(S) = max_x 1 + min(Ldim(S_{x=0}), Ldim(S_{x=1}))`.
//!
//! [`LdimCache`] memoises the recursion on subsets of a root class. It uses
//! interior mutability and is meant to be owned by a single worker; parallel
//! code builds one cache per worker.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::concept::{Concept, ConceptClass, ConceptSet, PartialAssignment};
use crate::error::{Error, Result};

/// `floor(log2(n))` for `n >= 1`.
fn log2_floor(n: usize) -> i32 {
    (usize::BITS - 1 - n.leading_zeros()) as i32
}

/// Memoised Littlestone dimension over subsets of one root class.
pub struct LdimCache<'a> {
    class: &'a ConceptClass,
    memo: RefCell<HashMap<ConceptSet, i32>>,
}

impl<'a> LdimCache<'a> {
    pub fn new(class: &'a ConceptClass) -> Self {
        Self {
            class,
            memo: RefCell::new(HashMap::new()),
        }
    }

    pub fn class(&self) -> &'a ConceptClass {
        self.class
    }

    /// Number of cached subclasses.
    pub fn len(&self) -> usize {
        self.memo.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.memo.borrow().is_empty()
    }

    pub fn ldim_all(&self) -> i32 {
        self.ldim(&self.class.all())
    }

    pub fn ldim(&self, set: &ConceptSet) -> i32 {
        match set.count_ones(..) {
            0 => return -1,
            1 => return 0,
            _ => {}
        }
        if let Some(&v) = self.memo.borrow().get(set) {
            return v;
        }
        let v = self.compute(set);
        self.memo.borrow_mut().insert(set.clone(), v);
        v
    }

    fn compute(&self, set: &ConceptSet) -> i32 {
        let size = set.count_ones(..);
        let ceiling = log2_floor(size);
        let mut best = 0;
        for x in 0..self.class.domain().len() {
            let ones = self.class.split(set, x, true);
            let n1 = ones.count_ones(..);
            if n1 == 0 || n1 == size {
                continue;
            }
            let mut zeros = set.clone();
            zeros.difference_with(&ones);
            // The smaller side bounds the min; skip the larger side when that
            // bound cannot beat the current best.
            let (small, large) = if n1 <= size - n1 {
                (ones, zeros)
            } else {
                (zeros, ones)
            };
            if log2_floor(small.count_ones(..)) < best {
                continue;
            }
            let first = self.ldim(&small);
            if first < best {
                continue;
            }
            let second = self.ldim(&large);
            best = best.max(1 + first.min(second));
            if best == ceiling {
                break;
            }
        }
        best
    }

    /// `Ldim(S) - Ldim(S_{point = value})`.
    pub fn drop_at(&self, set: &ConceptSet, point: usize, value: bool) -> i32 {
        self.ldim(set) - self.ldim(&self.class.split(set, point, value))
    }

    /// `u(A, a)` relative to the subclass `set`, for concept index `concept`.
    pub fn drop_of(&self, set: &ConceptSet, concept: usize, point: usize) -> i32 {
        self.drop_at(set, point, self.class.concept(concept).value(point))
    }

    pub fn is_exceptional(&self, set: &ConceptSet, f: &PartialAssignment) -> bool {
        let d = self.ldim(set);
        f.iter()
            .all(|(p, v)| self.ldim(&self.class.split(set, p, v)) == d)
    }

    /// `f_S`: for each point, the label whose restriction keeps full Ldim.
    pub fn canonical_partial(&self, set: &ConceptSet) -> PartialAssignment {
        let d = self.ldim(set);
        let mut f = PartialAssignment::new();
        for x in 0..self.class.domain().len() {
            let keeps = |v| self.ldim(&self.class.split(set, x, v)) == d;
            // At most one side can keep Ldim on a class with two or more
            // concepts; on a singleton only the concept's own value does.
            if keeps(false) {
                f.insert(x, false);
            } else if keeps(true) {
                f.insert(x, true);
            }
        }
        f
    }
}

/// Littlestone dimension of a class, `-1` for the empty class.
pub fn ldim(class: &ConceptClass) -> i32 {
    LdimCache::new(class).ldim_all()
}

/// `u(A, a) = Ldim(C) - Ldim(C_{a = A(a)})`.
pub fn drop(class: &ConceptClass, concept: &Concept, point: usize) -> Result<i32> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    if concept.len() != class.domain().len() {
        return Err(Error::DomainMismatch);
    }
    if point >= class.domain().len() {
        return Err(Error::PointOutOfRange {
            index: point,
            len: class.domain().len(),
        });
    }
    let cache = LdimCache::new(class);
    Ok(cache.drop_at(&class.all(), point, concept.value(point)))
}

pub fn is_exceptional(class: &ConceptClass, f: &PartialAssignment) -> Result<bool> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    if let Some(index) = f.points().find(|&p| p >= class.domain().len()) {
        return Err(Error::PointOutOfRange {
            index,
            len: class.domain().len(),
        });
    }
    Ok(LdimCache::new(class).is_exceptional(&class.all(), f))
}

pub fn canonical_partial(class: &ConceptClass) -> Result<PartialAssignment> {
    if class.is_empty() {
        return Err(Error::EmptyClass);
    }
    Ok(LdimCache::new(class).canonical_partial(&class.all()))
}

/// Unmemoised textbook recursion over materialised classes. Exponential;
/// only for cross-checking [`LdimCache`] on small inputs.
pub fn ldim_reference(concepts: &[Concept], domain_len: usize) -> i32 {
    match concepts.len() {
        0 => -1,
        1 => 0,
        _ => (0..domain_len)
            .map(|x| {
                let (ones, zeros): (Vec<Concept>, Vec<Concept>) =
                    concepts.iter().cloned().partition(|c| c.value(x));
                if ones.is_empty() || zeros.is_empty() {
                    return 0;
                }
                1 + ldim_reference(&ones, domain_len).min(ldim_reference(&zeros, domain_len))
            })
            .max()
            .unwrap_or(0)
            .max(0),
    }
}
