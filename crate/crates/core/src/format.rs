//! JSON class files.
//!
//! ```json
//! {"domain": ["x1", "x2", "x3"],
//!  "mu": ["1/6", "1/3", "1/2"],
//!  "concepts": {"A": "010", "B": "110"},
//!  "tau": ["1/2", "1/2"]}
//! ```
//!
//! `tau` is optional and only used by finite prior families. Concept order is
//! file order.

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::concept::{Concept, ConceptClass, Domain};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Debug, Serialize, Deserialize)]
struct ClassFile {
    domain: Vec<String>,
    mu: Vec<String>,
    concepts: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<Vec<String>>,
}

/// A class plus an optional prior over its concepts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassWithPrior {
    pub class: ConceptClass,
    pub prior: Option<Vec<Rational>>,
}

pub fn load_class(bytes: &[u8]) -> Result<ConceptClass> {
    load_with_prior(bytes).map(|c| c.class)
}

pub fn load_with_prior(bytes: &[u8]) -> Result<ClassWithPrior> {
    let file: ClassFile = serde_json::from_slice(bytes).map_err(|e| Error::Json(e.to_string()))?;
    let mu = file
        .mu
        .iter()
        .map(|w| rational::parse(w))
        .collect::<Result<Vec<_>>>()?;
    let domain = Domain::new(file.domain, mu)?;

    let mut labels = Vec::with_capacity(file.concepts.len());
    let mut concepts = Vec::with_capacity(file.concepts.len());
    for (label, value) in file.concepts {
        let s = value
            .as_str()
            .ok_or_else(|| Error::Json(format!("concept `{label}` must be a bitstring")))?;
        if let Some(found) = s.chars().find(|c| *c != '0' && *c != '1') {
            return Err(Error::BitstringChar { label, found });
        }
        if s.len() != domain.len() {
            return Err(Error::BitstringLength {
                label,
                expected: domain.len(),
                found: s.len(),
            });
        }
        concepts.push(Concept::parse(s).expect("validated bitstring"));
        labels.push(label);
    }
    let class = ConceptClass::new(domain, concepts, Some(labels))?;

    let prior = file
        .tau
        .map(|tau| parse_prior(&tau, class.len()))
        .transpose()?;
    Ok(ClassWithPrior { class, prior })
}

fn parse_prior(tau: &[String], concepts: usize) -> Result<Vec<Rational>> {
    if tau.len() != concepts {
        return Err(Error::PriorLength {
            weights: tau.len(),
            concepts,
        });
    }
    let weights = tau
        .iter()
        .map(|w| rational::parse(w))
        .collect::<Result<Vec<_>>>()?;
    if let Some(w) = weights.iter().find(|w| w.is_negative()) {
        return Err(Error::NegativePrior(rational::format(w)));
    }
    let total: Rational = weights.iter().sum();
    if !total.is_one() {
        return Err(Error::PriorNotNormalized(rational::format(&total)));
    }
    Ok(weights)
}

pub fn save_class(class: &ConceptClass) -> Vec<u8> {
    save_with_prior(class, None)
}

pub fn save_with_prior(class: &ConceptClass, prior: Option<&[Rational]>) -> Vec<u8> {
    let file = ClassFile {
        domain: class.domain().points().to_vec(),
        mu: class
            .domain()
            .weights()
            .iter()
            .map(rational::format)
            .collect(),
        concepts: class
            .labels()
            .iter()
            .zip(class.concepts())
            .map(|(l, c)| (l.clone(), Value::String(c.to_bitstring())))
            .collect(),
        tau: prior.map(|p| p.iter().map(rational::format).collect()),
    };
    let mut out = serde_json::to_vec_pretty(&file).expect("class file serialises");
    out.push(b'\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn minimal_file_loads_singleton() {
        let c = load_class(br#"{"domain":["x1"],"mu":["1"],"concepts":{"A":"0"}}"#).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.label(0), "A");
        assert_eq!(c.concept(0).to_bitstring(), "0");
    }

    #[test]
    fn weights_must_sum_to_one() {
        let e = load_class(br#"{"domain":["x1","x2"],"mu":["1/2","1/3"],"concepts":{"A":"01"}}"#)
            .unwrap_err();
        assert_eq!(e, Error::WeightsNotNormalized("5/6".into()));
    }

    #[test]
    fn duplicate_bitstrings_rejected() {
        let e = load_class(
            br#"{"domain":["x1","x2"],"mu":["1/2","1/2"],"concepts":{"A":"01","B":"01"}}"#,
        )
        .unwrap_err();
        assert!(matches!(e, Error::DuplicateConcept { .. }));
    }

    #[test]
    fn distinct_errors_for_each_defect() {
        let malformed =
            load_class(br#"{"domain":["x1"],"mu":["one"],"concepts":{"A":"0"}}"#).unwrap_err();
        assert!(matches!(malformed, Error::MalformedWeight(_)));
        let length =
            load_class(br#"{"domain":["x1"],"mu":["1"],"concepts":{"A":"01"}}"#).unwrap_err();
        assert!(matches!(length, Error::BitstringLength { .. }));
        let zero = load_class(br#"{"domain":["x1","x2"],"mu":["1","0"],"concepts":{"A":"01"}}"#)
            .unwrap_err();
        assert!(matches!(zero, Error::NonPositiveWeight { .. }));
        let json = load_class(b"{not json").unwrap_err();
        assert!(matches!(json, Error::Json(ref m) if m.contains("line 1")));
    }

    #[test]
    fn prior_round_trips() {
        let c = ConceptClass::from_bitstrings_weighted(
            Domain::with_weights(vec![ratio(1, 6), ratio(1, 3), ratio(1, 2)]).unwrap(),
            &["010", "110"],
        )
        .unwrap();
        let prior = [ratio(1, 4), ratio(3, 4)];
        let loaded = load_with_prior(&save_with_prior(&c, Some(&prior))).unwrap();
        assert_eq!(loaded.class, c);
        assert_eq!(loaded.prior.as_deref(), Some(&prior[..]));

        let bad = br#"{"domain":["x1"],"mu":["1"],"concepts":{"A":"0"},"tau":["1/2"]}"#;
        assert!(matches!(
            load_with_prior(bad),
            Err(Error::PriorNotNormalized(_))
        ));
    }
}
