use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("point index {index} out of range for a domain of {len} points")]
    PointOutOfRange { index: usize, len: usize },
    #[error("concepts are defined over different domains")]
    DomainMismatch,
    #[error("duplicate point identifier `{0}`")]
    DuplicatePoint(String),
    #[error("malformed weight `{0}`: expected an integer or `p/q`")]
    MalformedWeight(String),
    #[error("weight of point `{point}` is {value}, weights must be strictly positive")]
    NonPositiveWeight { point: String, value: String },
    #[error("weights sum to {0}, expected exactly 1")]
    WeightsNotNormalized(String),
    #[error("domain has {points} points but {weights} weights")]
    WeightCountMismatch { points: usize, weights: usize },
    #[error("concept `{label}` has bitstring of length {found}, expected {expected}")]
    BitstringLength {
        label: String,
        expected: usize,
        found: usize,
    },
    #[error("concept `{label}` has invalid character {found:?} in its bitstring")]
    BitstringChar { label: String, found: char },
    #[error("concepts `{first}` and `{second}` have the same bitstring")]
    DuplicateConcept { first: String, second: String },
    #[error("duplicate concept label `{0}`")]
    DuplicateLabel(String),
    #[error("prior has {weights} weights but the class has {concepts} concepts")]
    PriorLength { weights: usize, concepts: usize },
    #[error("prior weight `{0}` is negative")]
    NegativePrior(String),
    #[error("prior weights sum to {0}, expected exactly 1")]
    PriorNotNormalized(String),
    #[error("class file is not valid JSON: {0}")]
    Json(String),
    #[error("concept is not a member of the class")]
    NotInClass,
    #[error("concept label `{0}` not found in the class")]
    UnknownLabel(String),
    #[error("edge weight is undefined from a concept to itself")]
    SelfEdge,
    #[error("operation requires a nonempty class")]
    EmptyClass,
    #[error("partial function is not realized by any concept of the class")]
    Unrealizable,
    #[error("partial function has an empty domain")]
    EmptySample,
    #[error("prior enumeration exhausted before reaching mass {0}")]
    PriorExhausted(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
