//! Unmeasured evolution under the step operator.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::machine::MachineSpec;
use crate::state::{Configuration, InputSpec, QuantumState};
use crate::tape::Symbol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    /// Quantum machines have no implicit halt: every reachable key needs a rule.
    #[error("no rule for ({state}, {read}) reached in configuration {configuration}")]
    MissingRule {
        state: String,
        read: Symbol,
        configuration: String,
    },
}

/// Image of one basis configuration, in rule order.
pub fn image_terms(spec: &MachineSpec, config: &Configuration) -> Result<Vec<(Configuration, Complex64)>, StepError> {
    let read = config.scanned();
    let targets = spec.rule(config.state, read).ok_or_else(|| StepError::MissingRule {
        state: spec.state_name(config.state).to_string(),
        read,
        configuration: config.display(spec).to_string(),
    })?;
    Ok(targets
        .iter()
        .map(|t| {
            let next = Configuration::new(
                spec,
                t.next,
                config.tape.with(config.head, t.write),
                config.head + t.movement.offset(),
            );
            (next, t.amplitude)
        })
        .collect())
}

/// `U|c>` as a state.
pub fn image(spec: &MachineSpec, config: &Configuration) -> Result<QuantumState, StepError> {
    Ok(QuantumState::from_terms(image_terms(spec, config)?))
}

/// One application of the step operator without pruning.
pub fn step(spec: &MachineSpec, state: &QuantumState) -> Result<QuantumState, StepError> {
    step_pruned(spec, state, 0.0)
}

/// One step, dropping entries whose modulus falls below `prune`.
///
/// Sources are visited in canonical order and their targets in rule order,
/// so the floating-point accumulation is reproducible.
pub fn step_pruned(spec: &MachineSpec, state: &QuantumState, prune: f64) -> Result<QuantumState, StepError> {
    let mut out: BTreeMap<Configuration, Complex64> = BTreeMap::new();
    for (config, amp) in state.iter() {
        for (next, weight) in image_terms(spec, config)? {
            *out.entry(next).or_default() += amp * weight;
        }
    }
    Ok(QuantumState::from_map(out, prune))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub support: usize,
    pub norm2: f64,
    pub halted_mass: f64,
}

/// Per-step statistics of an unmeasured run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionTrace {
    pub prune: f64,
    pub rows: Vec<TraceRow>,
}

impl EvolutionTrace {
    fn record(&mut self, step: usize, state: &QuantumState) {
        self.rows.push(TraceRow {
            step,
            support: state.len(),
            norm2: state.norm2(),
            halted_mass: state.halted_mass(),
        });
    }

    /// `step,support,norm2,halted_mass` with shortest round-trip floats.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,support,norm2,halted_mass\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{:?},{:?}", r.step, r.support, r.norm2, r.halted_mass);
        }
        out
    }
}

/// Evolves `input` for `steps` steps with no measurement.
pub fn evolve(
    spec: &MachineSpec,
    input: &InputSpec,
    steps: usize,
) -> Result<(QuantumState, EvolutionTrace), StepError> {
    evolve_state(spec, input.to_state(spec), steps, 0.0)
}

pub fn evolve_state(
    spec: &MachineSpec,
    mut state: QuantumState,
    steps: usize,
    prune: f64,
) -> Result<(QuantumState, EvolutionTrace), StepError> {
    let mut trace = EvolutionTrace {
        prune,
        rows: Vec::with_capacity(steps + 1),
    };
    trace.record(0, &state);
    for t in 1..=steps {
        state = step_pruned(spec, &state, prune)?;
        trace.record(t, &state);
    }
    Ok((state, trace))
}

/// Squared norm of the halted component of `state`.
pub fn halted_mass(state: &QuantumState) -> f64 {
    state.halted_mass()
}
