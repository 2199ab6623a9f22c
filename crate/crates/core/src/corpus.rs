//! Fixture machines shipped with the crate, with the inputs each is
//! exercised on.

pub const OVERLAPPING_HADAMARD: &str = include_str!("../fixtures/overlapping_hadamard.qtm");
pub const HADAMARD_HALT: &str = include_str!("../fixtures/hadamard_halt.qtm");
pub const HADAMARD_SWEEP: &str = include_str!("../fixtures/hadamard_sweep.qtm");
pub const PHASE_SWEEP: &str = include_str!("../fixtures/phase_sweep.qtm");
pub const COIN_WALKER: &str = include_str!("../fixtures/coin_walker.qtm");
pub const GEOMETRIC_HALT: &str = include_str!("../fixtures/geometric_halt.qtm");
pub const MYERS_SCANNER: &str = include_str!("../fixtures/myers_scanner.qtm");

pub const RIGHT_SHIFT: &str = include_str!("../fixtures/right_shift.tm");
pub const LEFT_SHIFT: &str = include_str!("../fixtures/left_shift.tm");
pub const FLIP_SWEEP: &str = include_str!("../fixtures/flip_sweep.tm");
pub const FLIP_THEN_HALT: &str = include_str!("../fixtures/flip_then_halt.tm");
pub const INCREMENTER: &str = include_str!("../fixtures/incrementer.tm");
pub const PARITY: &str = include_str!("../fixtures/parity.tm");

/// A machine source with the input superpositions it is exercised on.
#[derive(Debug, Clone, Copy)]
pub struct Fixture {
    pub name: &'static str,
    pub source: &'static str,
    pub inputs: &'static [&'static str],
}

/// Hand-written quantum machines.
pub const QUANTUM: &[Fixture] = &[
    Fixture {
        name: "overlapping_hadamard",
        source: OVERLAPPING_HADAMARD,
        inputs: &["0", "1", "1/sqrt(2):0 + 1/sqrt(2):1"],
    },
    Fixture {
        name: "hadamard_halt",
        source: HADAMARD_HALT,
        inputs: &["0", "1", "1/sqrt(2):0 + 1/sqrt(2):00", "1/sqrt(2):0 + -1/sqrt(2):1"],
    },
    Fixture {
        name: "hadamard_sweep",
        source: HADAMARD_SWEEP,
        inputs: &["0", "0110", "1/sqrt(2):01 + 1/sqrt(2):10"],
    },
    Fixture {
        name: "phase_sweep",
        source: PHASE_SWEEP,
        inputs: &["1", "001", "1/2 + 1/2 i:0 + 1/sqrt(2):11"],
    },
    Fixture {
        name: "coin_walker",
        source: COIN_WALKER,
        inputs: &["1", "0110"],
    },
    Fixture {
        name: "geometric_halt",
        source: GEOMETRIC_HALT,
        inputs: &["000", "0101", "1/sqrt(2):0 + 1/sqrt(2):11"],
    },
    Fixture {
        name: "myers_scanner",
        source: MYERS_SCANNER,
        inputs: &["1", "1111", "1/sqrt(2):1 + 1/sqrt(2):1111", "110"],
    },
];

/// Reversible classical machines, lifted before use.
pub const CLASSICAL: &[Fixture] = &[
    Fixture {
        name: "right_shift",
        source: RIGHT_SHIFT,
        inputs: &["0", "0110"],
    },
    Fixture {
        name: "left_shift",
        source: LEFT_SHIFT,
        inputs: &["1", "10"],
    },
    Fixture {
        name: "flip_sweep",
        source: FLIP_SWEEP,
        inputs: &["0", "0110"],
    },
    Fixture {
        name: "flip_then_halt",
        source: FLIP_THEN_HALT,
        inputs: &["0", "0110", "111"],
    },
    Fixture {
        name: "incrementer",
        source: INCREMENTER,
        inputs: &["1", "111", "11111"],
    },
    Fixture {
        name: "parity",
        source: PARITY,
        inputs: &["0", "0110", "111", "10101"],
    },
];
