//! Halt-bit measurement, measurement schedules, exact branch tracking and a
//! seeded sampler.
//!
//! After a halt-bit measurement returns 0 the machine is left in the
//! renormalized running component, so at any time there is exactly one live
//! branch. A branch that reads 1 has its tape read at once and retires.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::evolution::{step, StepError};
use crate::machine::MachineSpec;
use crate::state::{InputSpec, QuantumState};
use crate::tape::Tape;

/// When the halt bit is measured.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeasurementSchedule {
    EveryStep,
    /// Distinct steps, all at least 1.
    AtSteps(BTreeSet<usize>),
    EndOnly(usize),
}

impl MeasurementSchedule {
    pub fn measures_at(&self, t: usize) -> bool {
        match self {
            MeasurementSchedule::EveryStep => t >= 1,
            MeasurementSchedule::AtSteps(steps) => steps.contains(&t),
            MeasurementSchedule::EndOnly(n) => t == *n,
        }
    }

    /// Latest scheduled step, if bounded.
    pub fn last_step(&self) -> Option<usize> {
        match self {
            MeasurementSchedule::EveryStep => None,
            MeasurementSchedule::AtSteps(steps) => steps.last().copied(),
            MeasurementSchedule::EndOnly(n) => Some(*n),
        }
    }
}

impl fmt::Display for MeasurementSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasurementSchedule::EveryStep => write!(f, "every"),
            MeasurementSchedule::EndOnly(n) => write!(f, "end:{n}"),
            MeasurementSchedule::AtSteps(steps) => {
                write!(f, "at:")?;
                for (i, s) in steps.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{s}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("unknown schedule `{0}`; expected every, end, end:N or at:k1,k2,...")]
    Unknown(String),
    #[error("bad step `{0}` in schedule")]
    BadStep(String),
    #[error("step {0} listed twice in schedule")]
    Duplicate(usize),
    #[error("scheduled step {step} is beyond the budget of {budget} steps")]
    BeyondBudget { step: usize, budget: usize },
}

/// Parses `every`, `end` (meaning `end:steps`), `end:N` or `at:k1,k2,...`.
pub fn parse_schedule(text: &str, steps: usize) -> Result<MeasurementSchedule, ScheduleError> {
    let text = text.trim();
    match text {
        "every" => return Ok(MeasurementSchedule::EveryStep),
        "end" => return Ok(MeasurementSchedule::EndOnly(steps)),
        _ => {}
    }
    if let Some(n) = text.strip_prefix("end:") {
        let n = n.trim().parse().map_err(|_| ScheduleError::BadStep(n.to_string()))?;
        return Ok(MeasurementSchedule::EndOnly(n));
    }
    let Some(list) = text.strip_prefix("at:") else {
        return Err(ScheduleError::Unknown(text.to_string()));
    };
    let mut set = BTreeSet::new();
    for token in list.split(',') {
        let k: usize = token
            .trim()
            .parse()
            .ok()
            .filter(|&k| k >= 1)
            .ok_or_else(|| ScheduleError::BadStep(token.to_string()))?;
        if !set.insert(k) {
            return Err(ScheduleError::Duplicate(k));
        }
    }
    Ok(MeasurementSchedule::AtSteps(set))
}

/// Parses a comma-separated list of schedules. Numbers following an `at:`
/// entry belong to it: `at:1,3,end` is `at:1,3` then `end`.
pub fn parse_schedule_list(text: &str, steps: usize) -> Result<Vec<MeasurementSchedule>, ScheduleError> {
    let mut groups: Vec<String> = Vec::new();
    for token in text.split(',') {
        let token = token.trim();
        let continues_at = token.chars().all(|c| c.is_ascii_digit())
            && !token.is_empty()
            && groups.last().is_some_and(|g| g.starts_with("at:"));
        match groups.last_mut() {
            Some(last) if continues_at => {
                last.push(',');
                last.push_str(token);
            }
            _ => groups.push(token.to_string()),
        }
    }
    groups.iter().map(|g| parse_schedule(g, steps)).collect()
}

/// One outcome of a halt-bit measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct HaltObservation {
    pub bit: bool,
    /// Born probability relative to the squared norm of the measured state.
    pub probability: f64,
    /// Renormalized post-measurement state.
    pub state: QuantumState,
}

/// Projective measurement of the halt bit. Zero-probability outcomes are
/// omitted; halted outcome first.
pub fn measure_halt(state: &QuantumState) -> Vec<HaltObservation> {
    let norm2 = state.norm2();
    if norm2 == 0.0 {
        return Vec::new();
    }
    [true, false]
        .into_iter()
        .filter_map(|bit| {
            let part = state.project(bit);
            (!part.is_empty()).then(|| HaltObservation {
                bit,
                probability: part.norm2() / norm2,
                state: part.normalized(),
            })
        })
        .collect()
}

/// Result key of a run. `step` is `None` once halting time is dropped.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Halted { step: Option<usize>, tape: Tape },
    Unhalted,
}

impl Outcome {
    /// Same outcome without the halting step.
    pub fn coarsened(&self) -> Outcome {
        match self {
            Outcome::Halted { tape, .. } => Outcome::Halted {
                step: None,
                tape: tape.clone(),
            },
            Outcome::Unhalted => Outcome::Unhalted,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Halted { step: Some(s), tape } => write!(f, "halted@{s} {tape}"),
            Outcome::Halted { step: None, tape } => write!(f, "halted {tape}"),
            Outcome::Unhalted => write!(f, "unhalted"),
        }
    }
}

/// Probabilities over outcomes, in canonical outcome order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputDistribution {
    pub probabilities: BTreeMap<Outcome, f64>,
}

impl OutputDistribution {
    pub fn point(outcome: Outcome) -> Self {
        OutputDistribution {
            probabilities: BTreeMap::from([(outcome, 1.0)]),
        }
    }

    pub fn add(&mut self, outcome: Outcome, p: f64) {
        *self.probabilities.entry(outcome).or_insert(0.0) += p;
    }

    pub fn get(&self, outcome: &Outcome) -> f64 {
        self.probabilities.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probabilities.values().fold(0.0, |acc, p| acc + p)
    }

    /// Probability of having observed a halt at or before step `n`.
    pub fn halted_by(&self, n: usize) -> f64 {
        self.probabilities
            .iter()
            .filter(|(o, _)| matches!(o, Outcome::Halted { step: Some(s), .. } if *s <= n))
            .fold(0.0, |acc, (_, p)| acc + p)
    }

    /// Merges outcomes that differ only in halting step.
    pub fn coarsened(&self) -> OutputDistribution {
        let mut out = OutputDistribution::default();
        for (o, p) in &self.probabilities {
            out.add(o.coarsened(), *p);
        }
        out
    }

    /// `1/2 * sum |p - q|` over the union of outcomes.
    pub fn total_variation(&self, other: &OutputDistribution) -> f64 {
        0.5 * self.differences(other).fold(0.0, |acc, d| acc + d)
    }

    pub fn max_abs_difference(&self, other: &OutputDistribution) -> f64 {
        self.differences(other).fold(0.0, f64::max)
    }

    fn differences<'a>(&'a self, other: &'a OutputDistribution) -> impl Iterator<Item = f64> + 'a {
        let keys: BTreeSet<&Outcome> = self.probabilities.keys().chain(other.probabilities.keys()).collect();
        keys.into_iter().map(|k| (self.get(k) - other.get(k)).abs())
    }
}

/// One scheduled halt-bit measurement of the live branch.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementEvent {
    pub step: usize,
    /// Probability of the live branch before measuring.
    pub branch_probability: f64,
    /// Probability of reading 1, given the branch.
    pub halt_probability: f64,
    /// Tape readouts after reading 1, with probabilities given the halt.
    pub tapes: Vec<(Tape, f64)>,
    /// Squared norm of the unmeasured branch state just before measuring.
    pub norm2: f64,
}

/// Exact result of a scheduled run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleRun {
    pub distribution: OutputDistribution,
    pub events: Vec<MeasurementEvent>,
    /// Largest `|norm^2 - 1|` of the live branch over the run.
    pub max_norm_deviation: f64,
    pub norm_audit_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasurementError {
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

/// Tracks the branch tree of `input` under `schedule` for `budget` steps.
/// `tol` bounds the norm drift tolerated before the audit flag is raised.
pub fn run_schedule(
    spec: &MachineSpec,
    input: &InputSpec,
    schedule: &MeasurementSchedule,
    budget: usize,
    tol: f64,
) -> Result<ScheduleRun, MeasurementError> {
    if let Some(last) = schedule.last_step().filter(|&s| s > budget) {
        return Err(ScheduleError::BeyondBudget { step: last, budget }.into());
    }
    let mut distribution = OutputDistribution::default();
    let mut events = Vec::new();
    let mut live = input.to_state(spec);
    let mut live_probability = 1.0;
    let mut max_norm_deviation = (live.norm2() - 1.0).abs();

    for t in 0..=budget {
        if t > 0 {
            live = step(spec, &live)?;
            max_norm_deviation = max_norm_deviation.max((live.norm2() - 1.0).abs());
        }
        if !schedule.measures_at(t) {
            continue;
        }
        let mut event = MeasurementEvent {
            step: t,
            branch_probability: live_probability,
            halt_probability: 0.0,
            tapes: Vec::new(),
            norm2: live.norm2(),
        };
        let mut next_live = None;
        for obs in measure_halt(&live) {
            if obs.bit {
                event.halt_probability = obs.probability;
                event.tapes = tape_readout(&obs.state);
                for (tape, p) in &event.tapes {
                    distribution.add(
                        Outcome::Halted {
                            step: Some(t),
                            tape: tape.clone(),
                        },
                        live_probability * obs.probability * p,
                    );
                }
            } else {
                next_live = Some((obs.probability, obs.state));
            }
        }
        events.push(event);
        match next_live {
            Some((p, state)) => {
                live_probability *= p;
                live = state;
            }
            None => {
                live_probability = 0.0;
                break;
            }
        }
    }
    if live_probability > 0.0 {
        distribution.add(Outcome::Unhalted, live_probability);
    }
    Ok(ScheduleRun {
        distribution,
        events,
        max_norm_deviation,
        norm_audit_flag: max_norm_deviation > tol,
    })
}

/// Computational-basis readout of the tape of a normalized state.
fn tape_readout(state: &QuantumState) -> Vec<(Tape, f64)> {
    let mut tapes: BTreeMap<&Tape, f64> = BTreeMap::new();
    for (c, a) in state.iter() {
        *tapes.entry(&c.tape).or_insert(0.0) += a.norm_sqr();
    }
    let total = tapes.values().fold(0.0, |acc, p| acc + p);
    tapes.into_iter().map(|(t, p)| (t.clone(), p / total)).collect()
}

/// Two schedules run on the same input, compared on outcomes without
/// halting time.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub steps: usize,
    pub schedules: [MeasurementSchedule; 2],
    pub distributions: [OutputDistribution; 2],
    pub total_variation: f64,
    pub max_abs_difference: f64,
    pub max_norm_deviation: f64,
    pub norm_audit_flag: bool,
}

pub fn compare_schedules(
    spec: &MachineSpec,
    input: &InputSpec,
    steps: usize,
    a: &MeasurementSchedule,
    b: &MeasurementSchedule,
    tol: f64,
) -> Result<ComparisonReport, MeasurementError> {
    let ra = run_schedule(spec, input, a, steps, tol)?;
    let rb = run_schedule(spec, input, b, steps, tol)?;
    let da = ra.distribution.coarsened();
    let db = rb.distribution.coarsened();
    Ok(ComparisonReport {
        steps,
        schedules: [a.clone(), b.clone()],
        total_variation: da.total_variation(&db),
        max_abs_difference: da.max_abs_difference(&db),
        distributions: [da, db],
        max_norm_deviation: ra.max_norm_deviation.max(rb.max_norm_deviation),
        norm_audit_flag: ra.norm_audit_flag || rb.norm_audit_flag,
    })
}

/// Outcome counts from independent seeded trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    pub seed: u64,
    pub samples: usize,
    pub counts: BTreeMap<Outcome, usize>,
}

impl EmpiricalDistribution {
    pub fn frequencies(&self) -> OutputDistribution {
        OutputDistribution {
            probabilities: self
                .counts
                .iter()
                .map(|(o, &n)| (o.clone(), n as f64 / self.samples as f64))
                .collect(),
        }
    }
}

/// Samples single trajectories, drawing each measurement result from the
/// exact branch probabilities.
pub fn sample_run(
    spec: &MachineSpec,
    input: &InputSpec,
    schedule: &MeasurementSchedule,
    budget: usize,
    seed: u64,
    samples: usize,
) -> Result<EmpiricalDistribution, MeasurementError> {
    let exact = run_schedule(spec, input, schedule, budget, f64::INFINITY)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    for _ in 0..samples {
        let outcome = sample_trajectory(&exact.events, &mut rng);
        *counts.entry(outcome).or_insert(0) += 1;
    }
    Ok(EmpiricalDistribution { seed, samples, counts })
}

fn sample_trajectory(events: &[MeasurementEvent], rng: &mut impl Rng) -> Outcome {
    for e in events {
        if rng.gen::<f64>() >= e.halt_probability {
            continue;
        }
        let mut u = rng.gen::<f64>();
        for (tape, p) in &e.tapes {
            if u < *p {
                return Outcome::Halted {
                    step: Some(e.step),
                    tape: tape.clone(),
                };
            }
            u -= p;
        }
        let (tape, _) = e.tapes.last().expect("a halt event reads some tape");
        return Outcome::Halted {
            step: Some(e.step),
            tape: tape.clone(),
        };
    }
    Outcome::Unhalted
}
