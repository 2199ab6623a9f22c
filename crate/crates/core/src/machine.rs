//! Machine descriptions: state table, alphabet and amplitude-weighted rules.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::Serialize;
use thiserror::Error;

use crate::amplitude::{parse_amplitude, render_amplitude, Amplitude, AmplitudeError};
use crate::tape::{Move, Symbol};

/// Index into [`MachineSpec::states`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct StateId(pub u16);

/// Left-hand side of a rule: internal state and the symbol under the head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleKey {
    pub state: StateId,
    pub read: Symbol,
}

/// One weighted branch of a rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleTarget {
    pub amplitude: Amplitude,
    pub next: StateId,
    pub write: Symbol,
    pub movement: Move,
}

/// Characters that cannot be tape symbols because the file formats use them.
pub const RESERVED_SYMBOLS: &[char] = &['*', ':', '|', '#', '+', '@', '-', '/', '(', ')'];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecErrorKind {
    #[error("expected `{0}` on the first line")]
    BadMagic(&'static str),
    #[error("missing header: {0}")]
    MissingHeader(&'static str),
    #[error("duplicate header: {0}")]
    DuplicateHeader(String),
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("invalid symbol `{0}`: symbols are single non-reserved characters")]
    InvalidSymbol(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("alphabet must contain the blank `_`")]
    MissingBlank,
    #[error("initial and halt state must differ")]
    InitialIsHalt,
    #[error("duplicate rule key ({0}, {1})")]
    DuplicateRule(String, String),
    #[error("duplicate target ({0}, {1}, {2}) in one rule")]
    DuplicateTarget(String, String, Move),
    #[error("rule has no targets")]
    EmptyRule,
    #[error("invalid move `{0}`")]
    InvalidMove(String),
    #[error("classical machines take no rules from the halt state")]
    HaltSourceRule,
    #[error("too many states")]
    TooManyStates,
    #[error("{0}")]
    Amplitude(#[from] AmplitudeError),
    #[error("{0}")]
    Syntax(String),
}

/// Error in a machine, classical machine or input description.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct SpecError {
    /// 1-based source line, when the error comes from a file.
    pub line: Option<usize>,
    pub kind: SpecErrorKind,
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.kind),
            None => write!(f, "{}", self.kind),
        }
    }
}

impl From<SpecErrorKind> for SpecError {
    fn from(kind: SpecErrorKind) -> Self {
        SpecError { line: None, kind }
    }
}

impl SpecErrorKind {
    pub(crate) fn at(self, line: usize) -> SpecError {
        SpecError {
            line: Some(line),
            kind: self,
        }
    }
}

/// A parsed quantum Turing machine.
///
/// Rules are stored expanded: one entry per `(state, symbol)` key. The halt
/// bit never appears in rules; it is derived from the target state.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineSpec {
    states: Vec<String>,
    initial: StateId,
    halt: StateId,
    alphabet: Vec<Symbol>,
    rules: BTreeMap<RuleKey, Vec<RuleTarget>>,
}

impl MachineSpec {
    /// Assembles a machine, checking the reference invariants that the file
    /// parser also enforces.
    pub fn new(
        states: Vec<String>,
        initial: StateId,
        halt: StateId,
        alphabet: Vec<Symbol>,
        rules: BTreeMap<RuleKey, Vec<RuleTarget>>,
    ) -> Result<Self, SpecError> {
        check_tables(&states, &alphabet)?;
        let n = states.len();
        for id in [initial, halt] {
            if usize::from(id.0) >= n {
                return Err(SpecErrorKind::UnknownState(format!("#{}", id.0)).into());
            }
        }
        if initial == halt {
            return Err(SpecErrorKind::InitialIsHalt.into());
        }
        for (key, targets) in &rules {
            if usize::from(key.state.0) >= n {
                return Err(SpecErrorKind::UnknownState(format!("#{}", key.state.0)).into());
            }
            if !alphabet.contains(&key.read) {
                return Err(SpecErrorKind::UnknownSymbol(key.read.to_string()).into());
            }
            if targets.is_empty() {
                return Err(SpecErrorKind::EmptyRule.into());
            }
            let mut seen = BTreeSet::new();
            for t in targets {
                if usize::from(t.next.0) >= n {
                    return Err(SpecErrorKind::UnknownState(format!("#{}", t.next.0)).into());
                }
                if !alphabet.contains(&t.write) {
                    return Err(SpecErrorKind::UnknownSymbol(t.write.to_string()).into());
                }
                if !seen.insert((t.next, t.write, t.movement)) {
                    return Err(SpecErrorKind::DuplicateTarget(
                        states[usize::from(t.next.0)].clone(),
                        t.write.to_string(),
                        t.movement,
                    )
                    .into());
                }
            }
        }
        Ok(MachineSpec {
            states,
            initial,
            halt,
            alphabet,
            rules,
        })
    }

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

    pub fn rules(&self) -> &BTreeMap<RuleKey, Vec<RuleTarget>> {
        &self.rules
    }

    pub fn rule(&self, state: StateId, read: Symbol) -> Option<&[RuleTarget]> {
        self.rules.get(&RuleKey { state, read }).map(Vec::as_slice)
    }

    pub fn state_name(&self, id: StateId) -> &str {
        &self.states[usize::from(id.0)]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name).map(|i| StateId(i as u16))
    }

    pub fn state_ids(&self) -> impl Iterator<Item = StateId> {
        (0..self.states.len()).map(|i| StateId(i as u16))
    }

    pub fn is_halt(&self, id: StateId) -> bool {
        id == self.halt
    }

    /// Largest number of targets in any rule.
    pub fn max_branching(&self) -> usize {
        self.rules.values().map(Vec::len).max().unwrap_or(0)
    }
}

pub(crate) fn check_tables(states: &[String], alphabet: &[Symbol]) -> Result<(), SpecError> {
    if states.len() > usize::from(u16::MAX) {
        return Err(SpecErrorKind::TooManyStates.into());
    }
    let mut seen = BTreeSet::new();
    for s in states {
        if !seen.insert(s.as_str()) {
            return Err(SpecErrorKind::DuplicateState(s.clone()).into());
        }
    }
    let mut seen = BTreeSet::new();
    for &s in alphabet {
        if s.0.is_whitespace() || RESERVED_SYMBOLS.contains(&s.0) {
            return Err(SpecErrorKind::InvalidSymbol(s.to_string()).into());
        }
        if !seen.insert(s) {
            return Err(SpecErrorKind::DuplicateSymbol(s.to_string()).into());
        }
    }
    if !alphabet.contains(&Symbol::BLANK) {
        return Err(SpecErrorKind::MissingBlank.into());
    }
    Ok(())
}

/// Header fields and raw rule lines shared by the quantum and classical
/// file formats.
pub(crate) struct Document<'a> {
    pub states: Vec<String>,
    pub initial: StateId,
    pub halt: StateId,
    pub alphabet: Vec<Symbol>,
    /// `(line, text after "rule:")`
    pub rules: Vec<(usize, &'a str)>,
}

impl Document<'_> {
    pub fn state(&self, token: &str, line: usize) -> Result<StateId, SpecError> {
        self.states
            .iter()
            .position(|s| s == token)
            .map(|i| StateId(i as u16))
            .ok_or_else(|| SpecErrorKind::UnknownState(token.to_string()).at(line))
    }

    pub fn symbol(&self, token: &str, line: usize) -> Result<Symbol, SpecError> {
        let mut chars = token.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) if self.alphabet.contains(&Symbol(c)) => Ok(Symbol(c)),
            _ => Err(SpecErrorKind::UnknownSymbol(token.to_string()).at(line)),
        }
    }

    /// Source symbols named by a rule's read slot; `*` is every symbol.
    pub fn read_slot(&self, token: &str, line: usize) -> Result<Vec<Symbol>, SpecError> {
        if token == "*" {
            Ok(self.alphabet.clone())
        } else {
            Ok(vec![self.symbol(token, line)?])
        }
    }

    /// Write slot: `None` means "write what was read".
    pub fn write_slot(&self, token: &str, line: usize) -> Result<Option<Symbol>, SpecError> {
        if token == "*" {
            Ok(None)
        } else {
            self.symbol(token, line).map(Some)
        }
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
    .trim()
}

pub(crate) fn parse_document<'a>(text: &'a str, magic: &'static str) -> Result<Document<'a>, SpecError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, strip_comment(l)))
        .filter(|(_, l)| !l.is_empty());

    match lines.next() {
        Some((_, first)) if first.split_whitespace().eq(magic.split_whitespace()) => {}
        Some((line, _)) => return Err(SpecErrorKind::BadMagic(magic).at(line)),
        None => return Err(SpecErrorKind::BadMagic(magic).at(1)),
    }

    let mut headers: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    let mut rules = Vec::new();
    for (line, text) in lines {
        let Some((key, value)) = text.split_once(':') else {
            return Err(SpecErrorKind::Syntax(format!("expected `field: value`, got `{text}`")).at(line));
        };
        let key = key.trim();
        match key {
            "rule" => rules.push((line, value.trim())),
            "states" | "initial" | "halt" | "alphabet" => {
                if headers.insert(key, (line, value.trim())).is_some() {
                    return Err(SpecErrorKind::DuplicateHeader(key.to_string()).at(line));
                }
            }
            other => return Err(SpecErrorKind::UnknownField(other.to_string()).at(line)),
        }
    }

    let header = |name: &'static str| {
        headers
            .get(name)
            .copied()
            .ok_or(SpecError::from(SpecErrorKind::MissingHeader(name)))
    };
    let (states_line, states_text) = header("states")?;
    let (alphabet_line, alphabet_text) = header("alphabet")?;
    let (initial_line, initial_text) = header("initial")?;
    let (halt_line, halt_text) = header("halt")?;

    let states: Vec<String> = states_text.split_whitespace().map(str::to_string).collect();
    let mut alphabet = Vec::new();
    for token in alphabet_text.split_whitespace() {
        let mut chars = token.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => alphabet.push(Symbol(c)),
            _ => return Err(SpecErrorKind::InvalidSymbol(token.to_string()).at(alphabet_line)),
        }
    }
    check_tables(&states, &alphabet).map_err(|e| {
        let line = match e.kind {
            SpecErrorKind::DuplicateState(_) | SpecErrorKind::TooManyStates => states_line,
            _ => alphabet_line,
        };
        e.kind.at(line)
    })?;

    let lookup = |name: &str, line: usize| {
        states
            .iter()
            .position(|s| s == name)
            .map(|i| StateId(i as u16))
            .ok_or_else(|| SpecErrorKind::UnknownState(name.to_string()).at(line))
    };
    let initial = lookup(initial_text, initial_line)?;
    let halt = lookup(halt_text, halt_line)?;
    if initial == halt {
        return Err(SpecErrorKind::InitialIsHalt.at(halt_line));
    }
    Ok(Document {
        states,
        initial,
        halt,
        alphabet,
        rules,
    })
}

/// Splits `lhs -> rhs`, returning the state and read tokens and the rhs.
pub(crate) fn split_rule(text: &str, line: usize) -> Result<(&str, &str, &str), SpecError> {
    let Some((lhs, rhs)) = text.split_once("->") else {
        return Err(SpecErrorKind::Syntax("rule needs `->`".into()).at(line));
    };
    let lhs: Vec<&str> = lhs.split_whitespace().collect();
    match lhs.as_slice() {
        [state, read] => Ok((state, read, rhs.trim())),
        _ => Err(SpecErrorKind::Syntax("rule source must be `state symbol`".into()).at(line)),
    }
}

/// Parses the `qtm-spec v1` format.
pub fn parse_machine(text: &str) -> Result<MachineSpec, SpecError> {
    let doc = parse_document(text, "qtm-spec v1")?;
    let mut rules = BTreeMap::new();

    for &(line, body) in &doc.rules {
        let (state, read, rhs) = split_rule(body, line)?;
        let state = doc.state(state, line)?;
        let reads = doc.read_slot(read, line)?;

        // (amplitude, next, write-or-copy, move)
        let mut templates = Vec::new();
        for target in rhs.split('|') {
            let Some((amp, rest)) = target.split_once(':') else {
                return Err(SpecErrorKind::Syntax("target must be `amplitude : state symbol move`".into()).at(line));
            };
            let amplitude = parse_amplitude(amp.trim()).map_err(|e| SpecErrorKind::Amplitude(e).at(line))?;
            let fields: Vec<&str> = rest.split_whitespace().collect();
            let [next, write, movement] = fields.as_slice() else {
                return Err(SpecErrorKind::Syntax("target must be `amplitude : state symbol move`".into()).at(line));
            };
            let next = doc.state(next, line)?;
            let write = doc.write_slot(write, line)?;
            let movement =
                Move::parse(movement).ok_or_else(|| SpecErrorKind::InvalidMove(movement.to_string()).at(line))?;
            templates.push((amplitude, next, write, movement));
        }

        for read in reads {
            let key = RuleKey { state, read };
            let targets: Vec<RuleTarget> = templates
                .iter()
                .map(|&(amplitude, next, write, movement)| RuleTarget {
                    amplitude,
                    next,
                    write: write.unwrap_or(read),
                    movement,
                })
                .collect();
            let mut seen = BTreeSet::new();
            for t in &targets {
                if !seen.insert((t.next, t.write, t.movement)) {
                    return Err(SpecErrorKind::DuplicateTarget(
                        doc.states[usize::from(t.next.0)].clone(),
                        t.write.to_string(),
                        t.movement,
                    )
                    .at(line));
                }
            }
            if rules.insert(key, targets).is_some() {
                return Err(
                    SpecErrorKind::DuplicateRule(doc.states[usize::from(state.0)].clone(), read.to_string()).at(line),
                );
            }
        }
    }

    MachineSpec::new(doc.states, doc.initial, doc.halt, doc.alphabet, rules)
}

/// Renders a machine in the `qtm-spec v1` format, one line per expanded rule.
pub fn render_machine(spec: &MachineSpec) -> String {
    let mut out = String::from("qtm-spec v1\n");
    let _ = writeln!(out, "states: {}", spec.states.join(" "));
    let _ = writeln!(out, "initial: {}", spec.state_name(spec.initial));
    let _ = writeln!(out, "halt: {}", spec.state_name(spec.halt));
    let alphabet: Vec<String> = spec.alphabet.iter().map(Symbol::to_string).collect();
    let _ = writeln!(out, "alphabet: {}", alphabet.join(" "));
    for (key, targets) in &spec.rules {
        let rhs: Vec<String> = targets
            .iter()
            .map(|t| {
                format!(
                    "{} : {} {} {}",
                    render_amplitude(t.amplitude),
                    spec.state_name(t.next),
                    t.write,
                    t.movement
                )
            })
            .collect();
        let _ = writeln!(
            out,
            "rule: {} {} -> {}",
            spec.state_name(key.state),
            key.read,
            rhs.join(" | ")
        );
    }
    out
}

/// Structural conditions that the rule format makes impossible to violate.
pub const SATISFIED_BY_CONSTRUCTION: &[&str] = &[
    "transition depends only on the internal state and the scanned symbol",
    "only the scanned cell is written",
    "the head moves at most one cell",
    "the halt bit is set exactly when the next state is the halt state",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// A rule for the halt state that does not keep state and tape fixed
    /// with a single amplitude-1 target.
    HaltedRule {
        state: String,
        read: Symbol,
        reason: String,
    },
    /// No rule for a halted configuration reading `read`.
    MissingHaltedRule { read: Symbol },
    /// Squared norms of a rule's amplitudes do not sum to 1.
    RowNorm { state: String, read: Symbol, norm2: f64 },
}

/// Reports every structural violation. An empty result means the machine
/// may be handed to the well-formedness checker.
pub fn validate_structure(spec: &MachineSpec, tol: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    for &read in &spec.alphabet {
        if spec.rule(spec.halt, read).is_none() {
            out.push(Violation::MissingHaltedRule { read });
        }
    }
    for (key, targets) in &spec.rules {
        let name = spec.state_name(key.state).to_string();
        if key.state == spec.halt {
            let reason = match targets.as_slice() {
                [t] if t.next != spec.halt => Some("halted rule leaves the halt state"),
                [t] if t.write != key.read => Some("halted rule changes the tape"),
                [t] if (t.amplitude - 1.0).norm() > tol => Some("halted rule amplitude is not 1"),
                [_] => None,
                _ => Some("halted rule must have exactly one target"),
            };
            if let Some(reason) = reason {
                out.push(Violation::HaltedRule {
                    state: name.clone(),
                    read: key.read,
                    reason: reason.to_string(),
                });
            }
        }
        let norm2: f64 = targets.iter().map(|t| t.amplitude.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > tol {
            out.push(Violation::RowNorm {
                state: name,
                read: key.read,
                norm2,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use num_complex::Complex64;
    use proptest::prelude::*;

    #[test]
    fn first_example_machine() {
        let spec = parse_machine(corpus::OVERLAPPING_HADAMARD).unwrap();
        assert_eq!(spec.states().len(), 2);
        // two q0 rows plus `qH *` expanded over {0, 1, _}
        assert_eq!(spec.rules().len(), 5);
        let q0 = spec.state_id("q0").unwrap();
        let row = spec.rule(q0, Symbol('0')).unwrap();
        assert_eq!(row.len(), 2);
        assert!((row[0].amplitude.re - 0.5f64.sqrt()).abs() < 1e-15);
        let halted = spec.rule(spec.halt(), Symbol('1')).unwrap();
        assert_eq!(halted[0].write, Symbol('1'));
        assert_eq!(halted[0].movement, Move::R);
        assert!(validate_structure(&spec, 1e-9).is_empty());
    }

    #[test]
    fn missing_header() {
        let text = "qtm-spec v1\nstates: a h\nhalt: h\nalphabet: 0 1 _\n";
        let err = parse_machine(text).unwrap_err();
        assert_eq!(err.kind, SpecErrorKind::MissingHeader("initial"));
        assert!(err.to_string().contains("missing header"));
    }

    #[test]
    fn duplicate_rule_key() {
        let text = "qtm-spec v1\nstates: q0 qH\ninitial: q0\nhalt: qH\nalphabet: 0 1 _\n\
                    rule: q0 0 -> 1 : qH 0 R\nrule: q0 0 -> 1 : qH 1 R\n";
        let err = parse_machine(text).unwrap_err();
        assert_eq!(err.line, Some(7));
        assert!(matches!(err.kind, SpecErrorKind::DuplicateRule(..)));

        let overlap = "qtm-spec v1\nstates: q0 qH\ninitial: q0\nhalt: qH\nalphabet: 0 1 _\n\
                       rule: q0 * -> 1 : qH * R\nrule: q0 1 -> 1 : qH 1 R\n";
        assert!(matches!(
            parse_machine(overlap).unwrap_err().kind,
            SpecErrorKind::DuplicateRule(..)
        ));
    }

    #[test]
    fn reference_errors_carry_lines() {
        let base = "qtm-spec v1\nstates: q0 qH\ninitial: q0\nhalt: qH\nalphabet: 0 1 _\n";
        let cases = [
            ("rule: q9 0 -> 1 : qH 0 R", SpecErrorKind::UnknownState("q9".into())),
            ("rule: q0 2 -> 1 : qH 0 R", SpecErrorKind::UnknownSymbol("2".into())),
            ("rule: q0 0 -> 1 : qH 0 X", SpecErrorKind::InvalidMove("X".into())),
            (
                "rule: q0 0 -> 1/sqrt(0) : qH 0 R",
                SpecErrorKind::Amplitude(AmplitudeError::BadSqrt { offset: 7 }),
            ),
        ];
        for (rule, kind) in cases {
            let err = parse_machine(&format!("{base}{rule}\n")).unwrap_err();
            assert_eq!(err.line, Some(6), "{rule}");
            assert_eq!(err.kind, kind);
        }
        assert_eq!(
            parse_machine("qtm-spec v2\n").unwrap_err().kind,
            SpecErrorKind::BadMagic("qtm-spec v1")
        );
        assert_eq!(
            parse_machine("qtm-spec v1\nstates: a b\ninitial: a\nhalt: a\nalphabet: _\n")
                .unwrap_err()
                .kind,
            SpecErrorKind::InitialIsHalt
        );
        assert_eq!(
            parse_machine("qtm-spec v1\nstates: a b\ninitial: a\nhalt: b\nalphabet: 0 1\n")
                .unwrap_err()
                .kind,
            SpecErrorKind::MissingBlank
        );
    }

    #[test]
    fn flipping_halted_rule_is_flagged() {
        let text = "qtm-spec v1\nstates: q0 qH\ninitial: q0\nhalt: qH\nalphabet: 0 1 _\n\
                    rule: q0 * -> 1 : qH * R\n\
                    rule: qH 0 -> 1 : qH 1 R\nrule: qH 1 -> 1 : qH 0 R\nrule: qH _ -> 1 : qH _ R\n";
        let spec = parse_machine(text).unwrap();
        let v = validate_structure(&spec, 1e-9);
        assert_eq!(v.len(), 2);
        assert!(v
            .iter()
            .all(|v| matches!(v, Violation::HaltedRule { reason, .. } if reason.contains("tape"))));
    }

    #[test]
    fn row_norm_is_flagged() {
        let text = "qtm-spec v1\nstates: q0 qH\ninitial: q0\nhalt: qH\nalphabet: 0 1 _\n\
                    rule: q0 0 -> 1 : qH 0 R | 1 : qH 1 R\nrule: qH * -> 1 : qH * R\n";
        let spec = parse_machine(text).unwrap();
        let v = validate_structure(&spec, 1e-9);
        assert_eq!(
            v,
            vec![Violation::RowNorm {
                state: "q0".into(),
                read: Symbol('0'),
                norm2: 2.0
            }]
        );
    }

    #[test]
    fn missing_halted_rule_is_flagged() {
        let text = "qtm-spec v1\nstates: q0 qH\ninitial: q0\nhalt: qH\nalphabet: 0 _\n\
                    rule: qH 0 -> 1 : qH 0 R\n";
        let spec = parse_machine(text).unwrap();
        assert_eq!(
            validate_structure(&spec, 1e-9),
            vec![Violation::MissingHaltedRule { read: Symbol::BLANK }]
        );
    }

    fn arb_spec() -> impl Strategy<Value = MachineSpec> {
        let alphabet_pool = ['0', '1', 'a', 'x', 'Z'];
        (2usize..5, 0usize..=alphabet_pool.len())
            .prop_flat_map(move |(n_states, n_sym)| {
                let mut alphabet: Vec<Symbol> = alphabet_pool[..n_sym].iter().map(|&c| Symbol(c)).collect();
                alphabet.push(Symbol::BLANK);
                let keys: Vec<RuleKey> = (0..n_states)
                    .flat_map(|q| {
                        alphabet.iter().map(move |&s| RuleKey {
                            state: StateId(q as u16),
                            read: s,
                        })
                    })
                    .collect();
                let n_keys = keys.len();
                let n_sym = alphabet.len();
                let target = (0..n_states, 0..n_sym, 0usize..3, -4.0f64..4.0, -4.0f64..4.0);
                let row = proptest::collection::vec(target, 1..4);
                (
                    Just(alphabet),
                    Just(keys),
                    proptest::collection::vec(proptest::option::of(row), n_keys),
                    Just(n_states),
                )
            })
            .prop_map(|(alphabet, keys, rows, n_states)| {
                let mut rules = BTreeMap::new();
                for (key, row) in keys.into_iter().zip(rows) {
                    let Some(row) = row else { continue };
                    let mut seen = BTreeSet::new();
                    let targets: Vec<RuleTarget> = row
                        .into_iter()
                        .filter(|&(q, s, m, _, _)| seen.insert((q, s, m)))
                        .map(|(q, s, m, re, im)| RuleTarget {
                            amplitude: Complex64::new(re, im),
                            next: StateId(q as u16),
                            write: alphabet[s],
                            movement: [Move::L, Move::N, Move::R][m],
                        })
                        .collect();
                    rules.insert(key, targets);
                }
                let states = (0..n_states).map(|i| format!("s{i}")).collect();
                MachineSpec::new(states, StateId(0), StateId(1), alphabet, rules).unwrap()
            })
    }

    proptest! {
        #[test]
        fn render_then_parse_is_identity(spec in arb_spec()) {
            let text = render_machine(&spec);
            let back = parse_machine(&text).unwrap();
            prop_assert_eq!(back, spec);
        }
    }
}
