//! Disjoint intervals `I_n = (1/(n+1), 1/n)` on `(0, 1)` under Lebesgue
//! measure, with a geometric prior `τ(n) = (1 - p) p^(n-1)`.
//!
//! Any two concepts are disjoint, so every finite subfamily has Littlestone
//! dimension at most 1.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

use crate::concept::{Concept, ConceptClass, Domain};
use crate::error::{Error, Result};
use crate::learner::{sample_weighted, MaxMinPolicy, TeacherResponse};
use crate::rational::{self, Rational};
use crate::staged::family::{Atomized, CountableFamily};

#[derive(Clone, Debug)]
pub struct IntervalFamily {
    ratio: Rational,
}

/// `(lower, upper)` endpoints of `I_n`.
pub fn interval(n: usize) -> (Rational, Rational) {
    assert!(n >= 1);
    (
        rational::ratio(1, n as i64 + 1),
        rational::ratio(1, n as i64),
    )
}

/// Lebesgue length of `I_n`: `1/(n(n+1))`.
pub fn interval_length(n: usize) -> Rational {
    let n = BigInt::from(n);
    Rational::new(BigInt::one(), &n * (&n + 1u32))
}

/// Index `n` with `x ∈ I_n`, or `None` for endpoints and points outside `(0, 1)`.
pub fn interval_of(x: &Rational) -> Option<usize> {
    if *x <= Rational::zero() || *x >= Rational::one() {
        return None;
    }
    let inv = x.recip();
    if inv.is_integer() {
        return None;
    }
    let n: BigInt = inv.numer().div_floor(inv.denom());
    n.try_into().ok()
}

impl IntervalFamily {
    pub fn new(ratio: Rational) -> Result<Self> {
        if ratio <= Rational::zero() || ratio >= Rational::one() {
            return Err(Error::InvalidParameter(format!(
                "geometric prior ratio must lie in (0, 1), got {}",
                rational::format(&ratio)
            )));
        }
        Ok(Self { ratio })
    }

    pub fn ratio(&self) -> &Rational {
        &self.ratio
    }

    /// Mass of `Δ(I_h, I_t)`: the two intervals are disjoint unless equal.
    pub fn delta_mass(&self, hypothesis: usize, target: usize) -> Rational {
        if hypothesis == target {
            Rational::zero()
        } else {
            interval_length(hypothesis) + interval_length(target)
        }
    }
}

impl CountableFamily for IntervalFamily {
    type Point = Rational;

    fn prior(&self, index: usize) -> Option<Rational> {
        assert!(index >= 1);
        let pow = num_traits::pow(self.ratio.clone(), index - 1);
        Some((Rational::one() - &self.ratio) * pow)
    }

    fn eval(&self, index: usize, point: &Rational) -> bool {
        interval_of(point) == Some(index)
    }

    fn ldim_bound(&self) -> usize {
        1
    }

    fn atomize(&self, indices: &[usize]) -> Atomized<'_, Rational> {
        let m = indices.len();
        let mut names: Vec<String> = indices.iter().map(|n| format!("I{n}")).collect();
        names.push("rest".into());
        let mut mu: Vec<Rational> = indices.iter().map(|&n| interval_length(n)).collect();
        let covered: Rational = mu.iter().sum();
        mu.push(Rational::one() - covered);
        let domain = Domain::new(names, mu).expect("finitely many intervals leave positive mass");
        let concepts = (0..m)
            .map(|i| Concept::from_bits((0..=m).map(|a| a == i).collect()))
            .collect();
        let labels = indices.iter().map(|n| format!("I{n}")).collect();
        let class = ConceptClass::new(domain, concepts, Some(labels)).expect("distinct intervals");
        let positions = indices.to_vec();
        Atomized::new(class, indices.to_vec(), move |x: &Rational| {
            interval_of(x)
                .and_then(|n| positions.iter().position(|&p| p == n))
                .unwrap_or(m)
        })
    }

    fn teacher<R: Rng + ?Sized>(
        &self,
        target: usize,
        hypothesis: usize,
        rng: &mut R,
    ) -> TeacherResponse<Rational> {
        if target == hypothesis {
            return TeacherResponse::Equivalent;
        }
        let side = sample_weighted(&[interval_length(hypothesis), interval_length(target)], rng);
        let n = if side == 0 { hypothesis } else { target };
        let (lo, hi) = interval(n);
        // Midpoint of a 2^-64 cell, strictly inside the open interval.
        let u = BigInt::from(rng.next_u64()) * 2u32 + 1u32;
        let frac = Rational::new(u, BigInt::one() << 65u32);
        let point = &lo + (hi - &lo) * frac;
        TeacherResponse::Counterexample {
            point,
            label: side == 1,
        }
    }

    fn name(&self) -> String {
        format!("intervals(p={})", rational::format(&self.ratio))
    }
}

/// Exact probability that the first counterexample to hypothesis `I_h` lies
/// in `I_h` (a negative example) when the target is `I_t`.
pub fn first_counterexample_negative(hypothesis: usize, target: usize) -> Rational {
    if hypothesis == target {
        return Rational::zero();
    }
    let h = interval_length(hypothesis);
    let t = interval_length(target);
    &h / (&h + t)
}

/// First query of the plain max-min learner confined to `I_1..I_prefix`.
pub fn plain_first_query(family: &IntervalFamily, prefix: usize) -> usize {
    let indices: Vec<usize> = (1..=prefix).collect();
    let atoms = family.atomize(&indices);
    let policy = MaxMinPolicy::new(&atoms.class);
    let q = policy.query(&atoms.class.all()).expect("nonempty prefix");
    atoms.indices[q]
}

/// Smallest target `t ≤ max_target` for which the plain learner on the given
/// prefix sees a negative first counterexample with probability `≥ threshold`.
pub fn non_learnability_witness(
    family: &IntervalFamily,
    prefix: usize,
    threshold: &Rational,
    max_target: usize,
) -> Option<(usize, Rational)> {
    let h = plain_first_query(family, prefix);
    (1..=max_target)
        .filter(|&t| t != h)
        .map(|t| (t, first_counterexample_negative(h, t)))
        .find(|(_, p)| p >= threshold)
}
