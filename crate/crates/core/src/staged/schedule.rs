//! Stage parameters: confidence `eps_k = 1/2^(k+1)`, the prior prefix that
//! covers `1 - eps_k` of the mass, and the query budget after which a
//! Binomial(n, 1/2) has fewer than `d` successes with probability `< eps_k`.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub fn stage_eps(k: u32) -> Rational {
    rational::pow2_inv(k + 1)
}

fn check_eps(eps: &Rational) -> Result<()> {
    if *eps <= Rational::zero() || *eps >= Rational::one() {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 1), got {}",
            rational::format(eps)
        )));
    }
    Ok(())
}

/// Smallest `N` with `Σ_{i ≤ N} τ(i) ≥ 1 - eps`. `prior(i)` is `τ(i)` for
/// `i ≥ 1` and `None` past the end of a finite enumeration.
pub fn prefix_size(prior: impl Fn(usize) -> Option<Rational>, eps: &Rational) -> Result<usize> {
    check_eps(eps)?;
    let goal = Rational::one() - eps;
    let mut cum = Rational::zero();
    for i in 1.. {
        match prior(i) {
            Some(w) => cum += w,
            None => return Err(Error::PriorExhausted(rational::format(&goal))),
        }
        if cum >= goal {
            return Ok(i);
        }
    }
    unreachable!()
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(BigInt::one(), |acc, i| {
        acc * BigInt::from(n - i) / BigInt::from(i + 1)
    })
}

/// `P[Binomial(n, 1/2) < d] = Σ_{j<d} C(n, j) / 2^n`.
pub fn binomial_tail(n: u64, d: u64) -> Rational {
    let num: BigInt = (0..d).map(|j| binomial(n, j)).sum();
    Rational::new(num, BigInt::one() << n)
}

/// Smallest `n` with `binomial_tail(n, d) < eps`.
pub fn step_budget(d: usize, eps: &Rational) -> Result<usize> {
    check_eps(eps)?;
    if d == 0 {
        return Err(Error::InvalidParameter("step budget needs d >= 1".into()));
    }
    let mut n = 0u64;
    while binomial_tail(n, d as u64) >= *eps {
        n += 1;
    }
    Ok(n as usize)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageSchedule {
    pub k: u32,
    #[serde(serialize_with = "ser_rational")]
    pub eps: Rational,
    pub prefix_size: usize,
    pub step_budget: usize,
}

fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rational::format(r))
}

impl StageSchedule {
    pub fn new(k: u32, d: usize, prior: impl Fn(usize) -> Option<Rational>) -> Result<Self> {
        let eps = stage_eps(k);
        Ok(Self {
            k,
            prefix_size: prefix_size(prior, &eps)?,
            step_budget: step_budget(d.max(1), &eps)?,
            eps,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{pow2_inv, ratio};

    fn geometric_half(i: usize) -> Option<Rational> {
        Some(pow2_inv(i as u32))
    }

    #[test]
    fn prefix_examples() {
        assert_eq!(prefix_size(geometric_half, &ratio(1, 4)).unwrap(), 2);
        let point_mass = |i: usize| Some(if i == 1 { ratio(1, 1) } else { ratio(0, 1) });
        for k in 1..8 {
            assert_eq!(prefix_size(point_mass, &stage_eps(k)).unwrap(), 1);
            assert_eq!(
                prefix_size(geometric_half, &stage_eps(k)).unwrap(),
                k as usize + 1
            );
        }
        let truncated = |i: usize| (i <= 2).then(|| ratio(1, 4));
        assert!(matches!(
            prefix_size(truncated, &ratio(1, 4)),
            Err(Error::PriorExhausted(_))
        ));
        assert!(prefix_size(geometric_half, &ratio(1, 1)).is_err());
    }

    #[test]
    fn budget_examples() {
        assert_eq!(binomial_tail(1, 1), ratio(1, 2));
        assert_eq!(binomial_tail(2, 1), ratio(1, 4));
        assert_eq!(step_budget(1, &ratio(1, 2)).unwrap(), 2);
        assert_eq!(step_budget(1, &ratio(1, 4)).unwrap(), 3);
        assert!(step_budget(0, &ratio(1, 4)).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(5, 0), BigInt::from(1));
        assert_eq!(binomial(3, 4), BigInt::from(0));
        assert_eq!(binomial(40, 20), BigInt::from(137_846_528_820u64));
    }
}
