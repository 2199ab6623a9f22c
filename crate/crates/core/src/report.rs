//! JSON documents for reports.
//!
//! Every document is wrapped in an [`Envelope`] whose fields appear in the
//! order `tool, version, machine, parameters, result`. Objects inside
//! `parameters` and `result` are emitted with keys in lexicographic order,
//! and floats use the shortest representation that round-trips.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::classical::InjectivityWitness;
use crate::evolution::EvolutionTrace;
use crate::experiments::{MyersReport, SubspaceReport};
use crate::machine::MachineSpec;
use crate::measurement::{ComparisonReport, EmpiricalDistribution, Outcome, OutputDistribution, ScheduleRun};
use crate::state::{Configuration, QuantumState};
use crate::tape::Tape;
use crate::wellformed::WellformednessReport;

pub const TOOL: &str = "qtm";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub tool: String,
    pub version: String,
    pub machine: String,
    pub parameters: Value,
    pub result: Value,
}

impl Envelope {
    pub fn new(machine: impl Into<String>, parameters: Value, result: Value) -> Self {
        Envelope {
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            machine: machine.into(),
            parameters,
            result,
        }
    }

    /// Pretty-printed with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values serialize");
        s.push('\n');
        s
    }
}

pub fn complex(a: Complex64) -> Value {
    json!({ "re": a.re, "im": a.im })
}

pub fn tape(t: &Tape) -> Value {
    serde_json::to_value(t).expect("tapes serialize")
}

pub fn configuration(spec: &MachineSpec, c: &Configuration) -> Value {
    json!({
        "halted": c.halted,
        "state": spec.state_name(c.state),
        "head": c.head,
        "tape": tape(&c.tape),
    })
}

pub fn state(spec: &MachineSpec, s: &QuantumState) -> Value {
    Value::Array(
        s.iter()
            .map(|(c, a)| json!({ "configuration": configuration(spec, c), "amplitude": complex(*a) }))
            .collect(),
    )
}

pub fn outcome(o: &Outcome) -> Value {
    match o {
        Outcome::Halted { step, tape: t } => json!({ "halted": true, "step": step, "tape": tape(t) }),
        Outcome::Unhalted => json!({ "halted": false }),
    }
}

pub fn distribution(d: &OutputDistribution) -> Value {
    Value::Array(
        d.probabilities
            .iter()
            .map(|(o, p)| json!({ "outcome": outcome(o), "probability": p }))
            .collect(),
    )
}

/// `max_witnesses` caps the witness list; the total is always reported.
pub fn wellformedness(spec: &MachineSpec, r: &WellformednessReport, max_witnesses: usize) -> Value {
    let witnesses: Vec<Value> = r
        .orthogonality_witnesses
        .iter()
        .take(max_witnesses)
        .map(|w| {
            json!({
                "first": configuration(spec, &w.first),
                "second": configuration(spec, &w.second),
                "inner": complex(w.inner),
                "modulus": w.inner.norm(),
            })
        })
        .collect();
    json!({
        "verdict": r.verdict,
        "tol": r.tol,
        "candidates_checked": r.candidates_checked,
        "norm_violations": r.norm_violations,
        "witness_count": r.orthogonality_witnesses.len(),
        "orthogonality_witnesses": witnesses,
    })
}

pub fn injectivity(spec: &MachineSpec, witnesses: &[InjectivityWitness], max_witnesses: usize) -> Value {
    json!({
        "witness_count": witnesses.len(),
        "witnesses": witnesses.iter().take(max_witnesses).map(|w| json!({
            "first": configuration(spec, &w.first),
            "second": configuration(spec, &w.second),
            "image": configuration(spec, &w.image),
        })).collect::<Vec<_>>(),
    })
}

pub fn schedule_run(r: &ScheduleRun) -> Value {
    json!({
        "distribution": distribution(&r.distribution),
        "total_probability": r.distribution.total(),
        "measurements": r.events.iter().map(|e| json!({
            "step": e.step,
            "branch_probability": e.branch_probability,
            "halt_probability": e.halt_probability,
            "norm2": e.norm2,
        })).collect::<Vec<_>>(),
        "max_norm_deviation": r.max_norm_deviation,
        "norm_audit_flag": r.norm_audit_flag,
    })
}

pub fn comparison(r: &ComparisonReport) -> Value {
    json!({
        "outcome_key": "halted_by_n_and_tape",
        "steps": r.steps,
        "schedules": [r.schedules[0].to_string(), r.schedules[1].to_string()],
        "distributions": [distribution(&r.distributions[0]), distribution(&r.distributions[1])],
        "total_variation": r.total_variation,
        "max_abs_difference": r.max_abs_difference,
        "max_norm_deviation": r.max_norm_deviation,
        "norm_audit_flag": r.norm_audit_flag,
    })
}

pub fn empirical(e: &EmpiricalDistribution, exact: &OutputDistribution) -> Value {
    let freq = e.frequencies();
    json!({
        "seed": e.seed,
        "samples": e.samples,
        "counts": e.counts.iter().map(|(o, n)| json!({ "outcome": outcome(o), "count": n })).collect::<Vec<_>>(),
        "frequencies": distribution(&freq),
        "exact": distribution(exact),
        "total_variation_to_exact": freq.total_variation(exact),
    })
}

pub fn trace(t: &EvolutionTrace) -> Value {
    serde_json::to_value(t).expect("traces serialize")
}

pub fn myers(r: &MyersReport) -> Value {
    json!({
        "input_a": r.input_a,
        "input_b": r.input_b,
        "per_step": r.per_step.iter().map(|(s, m)| json!({ "step": s, "halted_mass": m })).collect::<Vec<_>>(),
        "window": r.window.map(|(a, b)| json!({ "first_step": a, "last_step": b })),
    })
}

pub fn subspace(spec: &MachineSpec, r: &SubspaceReport, max_vectors: usize) -> Value {
    json!({
        "window_steps": r.window_steps,
        "halted_basis_count": r.halted_basis_count,
        "running_count": r.running_count,
        "gram_deviation": r.gram_deviation,
        "newly_halting_vectors": r.newly_halting_vectors,
        "outside_span": r.outside_span,
        "max_overlap_with_uv": r.max_overlap_with_uv,
        "tol": r.tol,
        "verdict": r.verdict,
        "newly_halting": r.newly_halting.iter().take(max_vectors).map(|n| json!({
            "source": configuration(spec, &n.source),
            "norm": n.norm,
            "max_overlap": n.max_overlap,
            "projection_norm": n.projection_norm,
        })).collect::<Vec<_>>(),
    })
}
