//! Deterministic Turing machines: executor, injectivity check and the lift
//! to a permutation quantum machine.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::machine::{parse_document, split_rule, MachineSpec, RuleKey, RuleTarget, SpecError, SpecErrorKind, StateId};
use crate::state::Configuration;
use crate::tape::{Move, Symbol, Tape};
use crate::window::Window;

/// Single-target transition of a classical machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ClassicalRule {
    pub next: StateId,
    pub write: Symbol,
    pub movement: Move,
}

/// A deterministic machine. At most one rule per key and none from the
/// halt state.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalTM {
    states: Vec<String>,
    initial: StateId,
    halt: StateId,
    alphabet: Vec<Symbol>,
    rules: BTreeMap<RuleKey, ClassicalRule>,
}

impl ClassicalTM {
    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn halt(&self) -> StateId {
        self.halt
    }

    pub fn alphabet(&self) -> &[Symbol] {
        &self.alphabet
    }

    pub fn rules(&self) -> &BTreeMap<RuleKey, ClassicalRule> {
        &self.rules
    }

    pub fn rule(&self, state: StateId, read: Symbol) -> Option<ClassicalRule> {
        self.rules.get(&RuleKey { state, read }).copied()
    }

    pub fn state_name(&self, id: StateId) -> &str {
        &self.states[usize::from(id.0)]
    }

    /// `|h>|q>|tape>|head>` with this machine's state names.
    pub fn describe(&self, c: &Configuration) -> String {
        format!(
            "|{}>|{}>|{}>|{}>",
            u8::from(c.halted),
            self.state_name(c.state),
            c.tape,
            c.head
        )
    }

    /// Validates `word` as an input over the non-blank alphabet.
    pub fn word(&self, word: &str) -> Result<Vec<Symbol>, SpecError> {
        word.chars()
            .map(Symbol)
            .map(|s| {
                if s.is_blank() || !self.alphabet.contains(&s) {
                    Err(SpecErrorKind::UnknownSymbol(s.to_string()).into())
                } else {
                    Ok(s)
                }
            })
            .collect()
    }

    /// Starting configuration for `input`.
    pub fn start(&self, input: &[Symbol]) -> ClassicalConfig {
        ClassicalConfig {
            state: self.initial,
            tape: Tape::from_symbols(input),
            head: 0,
        }
    }

    /// One step. A missing rule enters the halt state without touching the
    /// tape or head. Halted configurations are returned unchanged.
    pub fn step(&self, c: &ClassicalConfig) -> ClassicalConfig {
        if c.state == self.halt {
            return c.clone();
        }
        match self.rule(c.state, c.tape.read(c.head)) {
            Some(r) => ClassicalConfig {
                state: r.next,
                tape: c.tape.with(c.head, r.write),
                head: c.head + r.movement.offset(),
            },
            None => ClassicalConfig {
                state: self.halt,
                ..c.clone()
            },
        }
    }
}

/// Snapshot of a classical run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalConfig {
    pub state: StateId,
    pub tape: Tape,
    pub head: i64,
}

/// Parses the `tm-spec v1` format: `rule: q0 0 -> q1 1 R`, with `*`
/// accepted in the read and write slots as in the quantum format.
pub fn parse_classical(text: &str) -> Result<ClassicalTM, SpecError> {
    let doc = parse_document(text, "tm-spec v1")?;
    let mut rules = BTreeMap::new();
    for &(line, body) in &doc.rules {
        let (state, read, rhs) = split_rule(body, line)?;
        let state = doc.state(state, line)?;
        if state == doc.halt {
            return Err(SpecErrorKind::HaltSourceRule.at(line));
        }
        let reads = doc.read_slot(read, line)?;
        let fields: Vec<&str> = rhs.split_whitespace().collect();
        let [next, write, movement] = fields.as_slice() else {
            return Err(SpecErrorKind::Syntax("target must be `state symbol move`".into()).at(line));
        };
        let next = doc.state(next, line)?;
        let write = doc.write_slot(write, line)?;
        let movement =
            Move::parse(movement).ok_or_else(|| SpecErrorKind::InvalidMove(movement.to_string()).at(line))?;
        for read in reads {
            let rule = ClassicalRule {
                next,
                write: write.unwrap_or(read),
                movement,
            };
            if rules.insert(RuleKey { state, read }, rule).is_some() {
                return Err(
                    SpecErrorKind::DuplicateRule(doc.states[usize::from(state.0)].clone(), read.to_string()).at(line),
                );
            }
        }
    }
    Ok(ClassicalTM {
        states: doc.states,
        initial: doc.initial,
        halt: doc.halt,
        alphabet: doc.alphabet,
        rules,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalRunResult {
    pub halted: bool,
    pub steps: usize,
    pub final_state: StateId,
    pub final_tape: Tape,
    pub final_head: i64,
}

/// Runs `tm` on `input` for at most `budget` steps.
pub fn run_classical(tm: &ClassicalTM, input: &str, budget: usize) -> Result<ClassicalRunResult, SpecError> {
    let mut c = tm.start(&tm.word(input)?);
    let mut steps = 0;
    while c.state != tm.halt && steps < budget {
        c = tm.step(&c);
        steps += 1;
    }
    Ok(ClassicalRunResult {
        halted: c.state == tm.halt,
        steps,
        final_state: c.state,
        final_tape: c.tape,
        final_head: c.head,
    })
}

/// Every configuration of a run up to halting or `budget` steps, starting
/// with the initial one.
pub fn trace_classical(tm: &ClassicalTM, input: &str, budget: usize) -> Result<Vec<ClassicalConfig>, SpecError> {
    let mut c = tm.start(&tm.word(input)?);
    let mut out = vec![c.clone()];
    while c.state != tm.halt && out.len() <= budget {
        c = tm.step(&c);
        out.push(c.clone());
    }
    Ok(out)
}

/// Two running configurations with the same successor.
#[derive(Debug, Clone, PartialEq)]
pub struct InjectivityWitness {
    pub first: Configuration,
    pub second: Configuration,
    pub image: Configuration,
}

/// Collisions of the lifted step among running configurations on the
/// window. An empty result means the step is injective on running
/// configurations.
pub fn check_reversible(tm: &ClassicalTM) -> Vec<InjectivityWitness> {
    let spec = materialize(tm);
    let window = Window::new(&spec, |q| q != tm.halt);
    let (_, found) = window.collect_pairs(|a, b| (window.image_inner(a, b).norm() > 0.5).then_some((*a, *b)));
    let mut witnesses: Vec<InjectivityWitness> = found
        .into_iter()
        .map(|(a, b)| {
            let first = window.to_configuration(&a);
            let second = window.to_configuration(&b);
            let image = successor(&spec, &first);
            InjectivityWitness { first, second, image }
        })
        .collect();
    witnesses.sort_by(|x, y| {
        let fx = x.first.tape.footprint() + x.second.tape.footprint();
        let fy = y.first.tape.footprint() + y.second.tape.footprint();
        fx.cmp(&fy)
            .then_with(|| x.first.cmp(&y.first))
            .then_with(|| x.second.cmp(&y.second))
    });
    witnesses
}

fn successor(spec: &MachineSpec, c: &Configuration) -> Configuration {
    let t = spec.rule(c.state, c.scanned()).expect("materialized rules are total")[0];
    Configuration::new(spec, t.next, c.tape.with(c.head, t.write), c.head + t.movement.offset())
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LiftError {
    NotReversible(Vec<InjectivityWitness>),
}

impl fmt::Display for LiftError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LiftError::NotReversible(w) => {
                write!(f, "machine is not reversible: {} colliding pair(s)", w.len())
            }
        }
    }
}

/// Total rule table: every missing running key goes to the halt state
/// (write = read, move R) and the halt state drifts right.
fn materialize(tm: &ClassicalTM) -> MachineSpec {
    let one = Complex64::new(1.0, 0.0);
    let mut rules = BTreeMap::new();
    for q in (0..tm.states.len() as u16).map(StateId) {
        for &read in &tm.alphabet {
            let target = if q == tm.halt {
                RuleTarget {
                    amplitude: one,
                    next: tm.halt,
                    write: read,
                    movement: Move::R,
                }
            } else {
                let r = tm.rule(q, read).unwrap_or(ClassicalRule {
                    next: tm.halt,
                    write: read,
                    movement: Move::R,
                });
                RuleTarget {
                    amplitude: one,
                    next: r.next,
                    write: r.write,
                    movement: r.movement,
                }
            };
            rules.insert(RuleKey { state: q, read }, vec![target]);
        }
    }
    MachineSpec::new(tm.states.clone(), tm.initial, tm.halt, tm.alphabet.clone(), rules)
        .expect("a parsed classical machine has valid tables")
}

/// Lifts a reversible machine to a quantum machine with amplitude-1 rules.
pub fn lift_to_qtm(tm: &ClassicalTM) -> Result<MachineSpec, LiftError> {
    let witnesses = check_reversible(tm);
    if !witnesses.is_empty() {
        return Err(LiftError::NotReversible(witnesses));
    }
    Ok(materialize(tm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::evolution::step;
    use crate::state::QuantumState;
    use crate::wellformed::check_wellformed;
    use std::collections::HashMap;

    fn tm(src: &str) -> ClassicalTM {
        parse_classical(src).unwrap()
    }

    fn sym(c: char) -> Symbol {
        Symbol(c)
    }

    const NO_RULES: &str = "tm-spec v1\nstates: q0 qH\ninitial: q0\nhalt: qH\nalphabet: 0 1 _\n";

    const MERGING: &str = "tm-spec v1\nstates: q0 qH\ninitial: q0\nhalt: qH\nalphabet: 0 1 _\n\
                           rule: q0 0 -> qH 1 R\nrule: q0 1 -> qH 1 R\nrule: q0 _ -> q0 _ R\n";

    #[test]
    fn parses_wildcards_and_rejects_halt_rules() {
        let shift = tm(corpus::RIGHT_SHIFT);
        assert_eq!(shift.rules().len(), 3);
        assert_eq!(
            shift.rule(StateId(0), sym('1')),
            Some(ClassicalRule {
                next: StateId(0),
                write: sym('1'),
                movement: Move::R
            })
        );
        let bad = format!("{NO_RULES}rule: qH 0 -> qH 0 R\n");
        assert_eq!(parse_classical(&bad).unwrap_err().kind, SpecErrorKind::HaltSourceRule);
        let dup = format!("{NO_RULES}rule: q0 0 -> q0 0 R\nrule: q0 * -> q0 * L\n");
        assert_eq!(parse_classical(&dup).unwrap_err().line, Some(7));
    }

    #[test]
    fn missing_rule_halts_immediately() {
        let r = run_classical(&tm(NO_RULES), "1", 10).unwrap();
        assert!(r.halted);
        assert_eq!(r.steps, 1);
        assert_eq!(r.final_tape, Tape::from_symbols(&[sym('1')]));
        assert_eq!(r.final_head, 0);
    }

    #[test]
    fn zero_budget_does_nothing() {
        let r = run_classical(&tm(corpus::INCREMENTER), "111", 0).unwrap();
        assert!(!r.halted);
        assert_eq!(r.steps, 0);
    }

    /// Hand trace on "111": three moves over the 1s, write 1 on the blank,
    /// read the next blank and halt.
    #[test]
    fn incrementer_appends_a_one() {
        let r = run_classical(&tm(corpus::INCREMENTER), "111", 100).unwrap();
        assert!(r.halted);
        assert_eq!(r.final_tape.to_string(), "1111@0");
        assert_eq!(r.steps, 5);
        assert_eq!(r.final_head, 5);
    }

    #[test]
    fn parity_appends_the_parity_bit() {
        let parity = tm(corpus::PARITY);
        for (input, out) in [("0110", "01100@0"), ("111", "1111@0"), ("10101", "101011@0")] {
            let r = run_classical(&parity, input, 100).unwrap();
            assert!(r.halted);
            assert_eq!(r.final_tape.to_string(), out);
            assert_eq!(r.steps, input.len() + 1);
        }
    }

    #[test]
    fn budget_exhaustion_is_not_a_halt() {
        let r = run_classical(&tm(corpus::RIGHT_SHIFT), "01", 20).unwrap();
        assert!(!r.halted);
        assert_eq!(r.steps, 20);
        assert_eq!(r.final_head, 20);
    }

    #[test]
    fn merging_sources_are_witnessed() {
        let w = check_reversible(&tm(MERGING));
        assert!(!w.is_empty());
        let first = &w[0];
        assert_eq!(first.first.tape.footprint() + first.second.tape.footprint(), 2);
        assert!(matches!(lift_to_qtm(&tm(MERGING)), Err(LiftError::NotReversible(v)) if !v.is_empty()));
    }

    /// Exhaustive check: step every running window configuration and look
    /// for two with the same successor.
    fn brute_force_injective(tm: &ClassicalTM) -> bool {
        let k = tm.alphabet.len();
        let mut seen: HashMap<(StateId, i64, Tape), ClassicalConfig> = HashMap::new();
        for q in (0..tm.states.len() as u16).map(StateId).filter(|&q| q != tm.halt) {
            for head in -2..=2 {
                for code in 0..k.pow(7) {
                    let mut rest = code;
                    let mut cells = vec![Symbol::BLANK; 7];
                    for c in cells.iter_mut() {
                        *c = tm.alphabet[rest % k];
                        rest /= k;
                    }
                    let c = ClassicalConfig {
                        state: q,
                        tape: Tape::from_cells(-3, cells),
                        head,
                    };
                    let mut next = tm.step(&c);
                    if next.state == tm.halt && tm.rule(c.state, c.tape.read(c.head)).is_none() {
                        next.head += 1;
                    }
                    if seen.insert((next.state, next.head, next.tape), c).is_some() {
                        return false;
                    }
                }
            }
        }
        true
    }

    #[test]
    fn corpus_machines_are_reversible() {
        for src in [
            corpus::RIGHT_SHIFT,
            corpus::LEFT_SHIFT,
            corpus::FLIP_SWEEP,
            corpus::FLIP_THEN_HALT,
            corpus::INCREMENTER,
            corpus::PARITY,
        ] {
            let m = tm(src);
            assert!(check_reversible(&m).is_empty(), "{src}");
            assert!(brute_force_injective(&m), "{src}");
        }
        assert!(!brute_force_injective(&tm(MERGING)));
    }

    #[test]
    fn lift_adds_drift_and_materializes_missing_keys() {
        let lifted = lift_to_qtm(&tm(corpus::INCREMENTER)).unwrap();
        let q1 = lifted.state_id("q1").unwrap();
        let qh = lifted.halt();
        let t = lifted.rule(q1, sym('1')).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!((t[0].next, t[0].write, t[0].movement), (qh, sym('1'), Move::R));
        for &s in lifted.alphabet() {
            let d = lifted.rule(qh, s).unwrap()[0];
            assert_eq!((d.next, d.write, d.movement), (qh, s, Move::R));
        }
        assert!(crate::machine::validate_structure(&lifted, 1e-9).is_empty());
    }

    /// Non-halting lifts permute basis configurations. Lifts that can halt
    /// collide with the halted drift, which the checker reports.
    #[test]
    fn lifted_verdicts() {
        for src in [corpus::RIGHT_SHIFT, corpus::LEFT_SHIFT, corpus::FLIP_SWEEP] {
            let lifted = lift_to_qtm(&tm(src)).unwrap();
            assert!(check_wellformed(&lifted, 1e-9).is_well_formed(), "{src}");
        }
        for src in [corpus::FLIP_THEN_HALT, corpus::INCREMENTER, corpus::PARITY] {
            let lifted = lift_to_qtm(&tm(src)).unwrap();
            let report = check_wellformed(&lifted, 1e-9);
            assert!(report.norm_violations.is_empty());
            assert!(!report.orthogonality_witnesses.is_empty(), "{src}");
            for w in &report.orthogonality_witnesses {
                assert!(w.first.halted != w.second.halted);
            }
        }
    }

    #[test]
    fn lifted_run_tracks_the_classical_run() {
        for fixture in corpus::CLASSICAL {
            let m = tm(fixture.source);
            let lifted = lift_to_qtm(&m).unwrap();
            for input in fixture.inputs {
                let trace = trace_classical(&m, input, 30).unwrap();
                let mut state = QuantumState::basis(Configuration::new(
                    &lifted,
                    lifted.initial(),
                    Tape::from_symbols(&m.word(input).unwrap()),
                    0,
                ));
                for (n, c) in trace.iter().enumerate() {
                    if n > 0 {
                        state = step(&lifted, &state).unwrap();
                    }
                    assert_eq!(state.len(), 1);
                    let expected = Configuration::new(&lifted, c.state, c.tape.clone(), c.head);
                    assert_eq!(
                        state.amplitude(&expected),
                        Complex64::new(1.0, 0.0),
                        "{} {input} {n}",
                        fixture.name
                    );
                }
            }
        }
    }
}
