//! Quantum Turing machine laboratory.
//!
//! Parses machine descriptions, certifies (or refutes with witnesses) that a
//! machine's step operator is an isometry on basis configurations, evolves
//! sparse superpositions of configurations, and simulates the halt-qubit
//! measurement scheme with exact branch tracking.

pub mod amplitude;
pub mod classical;
pub mod corpus;
pub mod evolution;
pub mod experiments;
pub mod machine;
pub mod measurement;
pub mod report;
pub mod state;
pub mod tape;
pub mod wellformed;
mod window;

pub use amplitude::{parse_amplitude, render_amplitude, Amplitude, AmplitudeError};
pub use classical::{
    check_reversible, lift_to_qtm, parse_classical, run_classical, ClassicalRunResult, ClassicalTM, InjectivityWitness,
    LiftError,
};
pub use evolution::{evolve, halted_mass, step, EvolutionTrace, StepError};
pub use experiments::{
    analyze_halting_subspace, myers_demo, ExperimentError, MyersReport, SubspaceReport, SubspaceVerdict,
};
pub use machine::{
    parse_machine, render_machine, validate_structure, MachineSpec, RuleKey, RuleTarget, SpecError, StateId, Violation,
};
pub use measurement::{
    compare_schedules, measure_halt, parse_schedule, parse_schedule_list, run_schedule, sample_run, ComparisonReport,
    EmpiricalDistribution, MeasurementError, MeasurementSchedule, Outcome, OutputDistribution, ScheduleRun,
};
pub use state::{parse_input, Configuration, InputSpec, QuantumState};
pub use tape::{Move, Symbol, Tape};
pub use wellformed::{check_wellformed, collision_candidates, CollisionCandidatePair, Verdict, WellformednessReport};

/// Default tolerance for norm and orthogonality checks.
pub const DEFAULT_TOL: f64 = 1e-9;
