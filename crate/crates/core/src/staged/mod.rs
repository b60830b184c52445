//! Learning a countable class whose target is drawn from a prior, by running
//! the max-min learner on growing prefixes of the enumeration.
//!
//! Stage `k` takes the shortest prefix carrying `1 - eps_k` of the prior,
//! drops every concept contradicted by a counterexample seen so far, and runs
//! the finite learner on the atom quotient for at most `n_k` queries.

pub mod family;
pub mod finite;
pub mod intervals;
pub mod schedule;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::learner::{
    rng_from_seed, trial_seed, LearnerState, MaxMinPolicy, Query, Summary, TeacherResponse,
    Transcript,
};

pub use family::{sample_target, Atomized, CountableFamily};
pub use finite::FiniteFamily;
pub use intervals::IntervalFamily;
pub use schedule::{binomial_tail, prefix_size, stage_eps, step_budget, StageSchedule};

pub const DEFAULT_STAGE_CAP: u32 = 30;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StagedConfig {
    pub stage_cap: u32,
}

impl Default for StagedConfig {
    fn default() -> Self {
        Self {
            stage_cap: DEFAULT_STAGE_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageRecord {
    pub schedule: StageSchedule,
    /// Prefix concepts consistent with the history at the start of the stage.
    pub consistent: usize,
    pub queries: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StagedOutcome {
    Identified,
    StageCapReached,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StagedRun<P> {
    pub target: usize,
    pub outcome: StagedOutcome,
    pub stages: Vec<StageRecord>,
    /// Hypotheses are family indices.
    pub transcript: Transcript<P>,
}

impl<P> StagedRun<P> {
    pub fn query_count(&self) -> usize {
        self.transcript.query_count()
    }

    pub fn final_stage(&self) -> u32 {
        self.stages.last().map_or(0, |s| s.schedule.k)
    }
}

/// Runs stages `1..=cap` until the target is returned by the teacher as
/// equivalent.
pub fn run_staged_learner<F: CountableFamily + ?Sized>(
    family: &F,
    target: usize,
    seed: u64,
    config: &StagedConfig,
) -> Result<StagedRun<F::Point>> {
    let mut rng = rng_from_seed(seed);
    run_staged_with_rng(family, target, seed, config, &mut rng)
}

fn run_staged_with_rng<F: CountableFamily + ?Sized, R: rand::Rng + ?Sized>(
    family: &F,
    target: usize,
    seed: u64,
    config: &StagedConfig,
    rng: &mut R,
) -> Result<StagedRun<F::Point>> {
    if target == 0 || family.prior(target).is_none() {
        return Err(Error::NotInClass);
    }
    let d = family.ldim_bound();
    let mut history: Vec<(F::Point, bool)> = Vec::new();
    let mut transcript = Transcript::new(seed);
    let mut stages = Vec::new();
    for k in 1..=config.stage_cap {
        let schedule = StageSchedule::new(k, d, |i| family.prior(i))?;
        let prefix: Vec<usize> = (1..=schedule.prefix_size)
            .filter(|&i| history.iter().all(|(x, y)| family.eval(i, x) == *y))
            .collect();
        let mut record = StageRecord {
            consistent: prefix.len(),
            queries: 0,
            schedule,
        };
        if prefix.is_empty() {
            stages.push(record);
            continue;
        }
        let atoms = family.atomize(&prefix);
        let policy = MaxMinPolicy::new(&atoms.class);
        let mut state = LearnerState::new(&policy);
        while record.queries < record.schedule.step_budget && !state.is_empty() {
            let q = state.next_query()?;
            let hypothesis = atoms.indices[q];
            let response = family.teacher(target, hypothesis, rng);
            record.queries += 1;
            transcript.queries.push(Query {
                hypothesis,
                response: response.clone(),
            });
            match response {
                TeacherResponse::Equivalent => {
                    stages.push(record);
                    return Ok(StagedRun {
                        target,
                        outcome: StagedOutcome::Identified,
                        stages,
                        transcript,
                    });
                }
                TeacherResponse::Counterexample { point, label } => {
                    state.observe(atoms.locate(&point), label);
                    history.push((point, label));
                }
            }
        }
        stages.push(record);
    }
    Ok(StagedRun {
        target,
        outcome: StagedOutcome::StageCapReached,
        stages,
        transcript,
    })
}

/// Aggregate over runs with targets drawn from the prior.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StagedSummary {
    /// Query counts over all runs, including those that hit the cap.
    pub queries: Summary,
    pub stage_cap: u32,
    pub stage_cap_hits: u64,
    /// Number of runs ending in each stage.
    pub final_stages: BTreeMap<u32, u64>,
    /// Number of runs per drawn target index.
    pub targets: BTreeMap<usize, u64>,
}

/// Trial `i` draws its target and teacher randomness from `trial_seed(seed, i)`.
pub fn staged_trial<F: CountableFamily + ?Sized>(
    family: &F,
    seed: u64,
    index: u64,
    config: &StagedConfig,
) -> Result<StagedRun<F::Point>> {
    let s = trial_seed(seed, index);
    let mut rng = rng_from_seed(s);
    let target = sample_target(family, &mut rng);
    run_staged_with_rng(family, target, s, config, &mut rng)
}

/// Runs trials `range` in parallel; results come back in trial order.
pub fn staged_runs<F: CountableFamily + ?Sized>(
    family: &F,
    seed: u64,
    range: std::ops::Range<u64>,
    config: &StagedConfig,
) -> Result<Vec<StagedRun<F::Point>>>
where
    F::Point: Send,
{
    range
        .into_par_iter()
        .map(|i| staged_trial(family, seed, i, config))
        .collect()
}

pub fn summarize<P>(runs: &[StagedRun<P>], seed: u64, config: &StagedConfig) -> StagedSummary {
    let mut histogram = BTreeMap::new();
    let mut final_stages = BTreeMap::new();
    let mut targets = BTreeMap::new();
    let mut counterexamples = 0u64;
    let mut hits = 0u64;
    for run in runs {
        let q = run.query_count() as u64;
        *histogram.entry(q).or_insert(0) += 1;
        *final_stages.entry(run.final_stage()).or_insert(0) += 1;
        *targets.entry(run.target).or_insert(0) += 1;
        match run.outcome {
            StagedOutcome::Identified => counterexamples += q - 1,
            StagedOutcome::StageCapReached => {
                counterexamples += q;
                hits += 1;
            }
        }
    }
    StagedSummary {
        queries: Summary::from_counts(seed, histogram, counterexamples, 0),
        stage_cap: config.stage_cap,
        stage_cap_hits: hits,
        final_stages,
        targets,
    }
}

pub fn staged_monte_carlo<F: CountableFamily + ?Sized>(
    family: &F,
    trials: u64,
    seed: u64,
    config: &StagedConfig,
) -> Result<StagedSummary>
where
    F::Point: Send,
{
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let runs = staged_runs(family, seed, 0..trials, config)?;
    Ok(summarize(&runs, seed, config))
}
