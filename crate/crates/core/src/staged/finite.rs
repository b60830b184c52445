//! A finite class with an explicit prior, viewed as a countable family.

use std::collections::HashMap;

use num_traits::{One, Signed};
use rand::Rng;

use crate::concept::{Concept, ConceptClass, Domain};
use crate::error::{Error, Result};
use crate::format::ClassWithPrior;
use crate::learner::{teacher_respond, TeacherResponse};
use crate::littlestone;
use crate::rational::{self, Rational};
use crate::staged::family::{Atomized, CountableFamily};

/// Family index `i` is concept `i - 1` of the class.
#[derive(Clone, Debug)]
pub struct FiniteFamily {
    class: ConceptClass,
    tau: Vec<Rational>,
    ldim: usize,
}

impl FiniteFamily {
    pub fn new(class: ConceptClass, tau: Vec<Rational>) -> Result<Self> {
        if tau.len() != class.len() {
            return Err(Error::PriorLength {
                weights: tau.len(),
                concepts: class.len(),
            });
        }
        if class.is_empty() {
            return Err(Error::EmptyClass);
        }
        if let Some(w) = tau.iter().find(|w| w.is_negative()) {
            return Err(Error::NegativePrior(rational::format(w)));
        }
        let total: Rational = tau.iter().sum();
        if !total.is_one() {
            return Err(Error::PriorNotNormalized(rational::format(&total)));
        }
        let ldim = littlestone::ldim(&class).max(0) as usize;
        Ok(Self { class, tau, ldim })
    }

    pub fn from_file(file: ClassWithPrior) -> Result<Self> {
        let tau = file
            .prior
            .ok_or_else(|| Error::InvalidParameter("class file has no `tau` prior".into()))?;
        Self::new(file.class, tau)
    }

    pub fn class(&self) -> &ConceptClass {
        &self.class
    }
}

impl CountableFamily for FiniteFamily {
    type Point = usize;

    fn prior(&self, index: usize) -> Option<Rational> {
        index.checked_sub(1).and_then(|i| self.tau.get(i).cloned())
    }

    fn eval(&self, index: usize, point: &usize) -> bool {
        self.class.concept(index - 1).value(*point)
    }

    fn ldim_bound(&self) -> usize {
        self.ldim
    }

    /// Points with the same values under every selected concept share an atom.
    fn atomize(&self, indices: &[usize]) -> Atomized<'_, usize> {
        let n = self.class.domain().len();
        let mut signatures: Vec<Vec<bool>> = Vec::new();
        let mut by_signature: HashMap<Vec<bool>, usize> = HashMap::new();
        let mut atom_of = Vec::with_capacity(n);
        let mut names: Vec<String> = Vec::new();
        let mut mu: Vec<Rational> = Vec::new();
        for x in 0..n {
            let sig: Vec<bool> = indices.iter().map(|&i| self.eval(i, &x)).collect();
            let a = *by_signature.entry(sig.clone()).or_insert_with(|| {
                signatures.push(sig);
                names.push(String::new());
                mu.push(Rational::from_integer(0.into()));
                signatures.len() - 1
            });
            if !names[a].is_empty() {
                names[a].push('+');
            }
            names[a].push_str(self.class.domain().name(x));
            mu[a] += self.class.domain().weight(x);
            atom_of.push(a);
        }
        let domain = Domain::new(names, mu).expect("atoms partition a valid domain");
        let concepts = (0..indices.len())
            .map(|c| Concept::from_bits(signatures.iter().map(|s| s[c]).collect()))
            .collect();
        let labels = indices
            .iter()
            .map(|&i| self.class.label(i - 1).to_string())
            .collect();
        let class = ConceptClass::new(domain, concepts, Some(labels))
            .expect("distinct concepts stay distinct");
        Atomized::new(class, indices.to_vec(), move |x: &usize| atom_of[*x])
    }

    fn teacher<R: Rng + ?Sized>(
        &self,
        target: usize,
        hypothesis: usize,
        rng: &mut R,
    ) -> TeacherResponse<usize> {
        teacher_respond(
            self.class.concept(target - 1),
            self.class.concept(hypothesis - 1),
            self.class.domain(),
            rng,
        )
        .expect("concepts share the domain")
    }

    fn name(&self) -> String {
        format!("finite({} concepts)", self.class.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn atoms_merge_equal_columns() {
        let class = ConceptClass::from_bitstrings(&["1100", "0011", "1111"]).unwrap();
        let fam = FiniteFamily::new(class, vec![ratio(1, 2), ratio(1, 4), ratio(1, 4)]).unwrap();
        let a = fam.atomize(&[1, 2]);
        assert_eq!(a.class.domain().len(), 2);
        assert_eq!(a.class.domain().weights(), &[ratio(1, 2), ratio(1, 2)]);
        assert_eq!(a.locate(&3), 1);
        for x in 0..4 {
            for (c, &i) in a.indices.iter().enumerate() {
                assert_eq!(a.class.concept(c).value(a.locate(&x)), fam.eval(i, &x));
            }
        }
    }

    #[test]
    fn prior_validation() {
        let class = ConceptClass::from_bitstrings(&["10", "01"]).unwrap();
        assert!(FiniteFamily::new(class.clone(), vec![ratio(1, 2)]).is_err());
        assert!(FiniteFamily::new(class.clone(), vec![ratio(1, 2), ratio(1, 3)]).is_err());
        let fam = FiniteFamily::new(class, vec![ratio(1, 1), ratio(0, 1)]).unwrap();
        assert_eq!(fam.prior(3), None);
        assert_eq!(fam.prior(2), Some(ratio(0, 1)));
    }
}
