use std::fmt::Debug;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;

use crate::concept::ConceptClass;
use crate::learner::TeacherResponse;
use crate::rational::Rational;

/// Finite quotient of a domain on which a set of family concepts is constant.
pub struct Atomized<'f, P> {
    /// Concepts over atoms; concept `i` is family index `indices[i]`.
    pub class: ConceptClass,
    pub indices: Vec<usize>,
    locate: Box<dyn Fn(&P) -> usize + 'f>,
}

impl<'f, P> Atomized<'f, P> {
    pub fn new(
        class: ConceptClass,
        indices: Vec<usize>,
        locate: impl Fn(&P) -> usize + 'f,
    ) -> Self {
        Self {
            class,
            indices,
            locate: Box::new(locate),
        }
    }

    /// Atom containing `point`.
    pub fn locate(&self, point: &P) -> usize {
        (self.locate)(point)
    }
}

/// A countable concept class with a prior over its enumeration.
///
/// Indices start at 1. Implementations supply an exact teacher on real points
/// and an atomizer for finite sets of concepts.
pub trait CountableFamily: Sync {
    type Point: Clone + Debug;

    /// `τ(index)`, or `None` past the end of a finite family.
    fn prior(&self, index: usize) -> Option<Rational>;

    fn eval(&self, index: usize, point: &Self::Point) -> bool;

    /// Upper bound on the Littlestone dimension of every finite subfamily.
    fn ldim_bound(&self) -> usize;

    /// Quotient for the given (distinct) indices, in that order.
    fn atomize(&self, indices: &[usize]) -> Atomized<'_, Self::Point>;

    /// Random counterexample to `hypothesis` when the target is `target`.
    fn teacher<R: Rng + ?Sized>(
        &self,
        target: usize,
        hypothesis: usize,
        rng: &mut R,
    ) -> TeacherResponse<Self::Point>;

    fn name(&self) -> String;
}

/// Draws a target index from the prior with a `u / 2^64` variate.
pub fn sample_target<F: CountableFamily + ?Sized, R: Rng + ?Sized>(
    family: &F,
    rng: &mut R,
) -> usize {
    let u = BigInt::from(rng.next_u64());
    let scale = BigInt::one() << 64u32;
    let mut cum = Rational::zero();
    let mut last = 1;
    for i in 1.. {
        let Some(w) = family.prior(i) else {
            return last;
        };
        if !w.is_zero() {
            last = i;
        }
        cum += w;
        // u / 2^64 < cum
        if Rational::from_integer(u.clone()) < &cum * Rational::from_integer(scale.clone()) {
            return i;
        }
    }
    unreachable!()
}
