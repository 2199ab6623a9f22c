//! Basis configurations, finite superpositions of them, and input
//! superpositions.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::amplitude::{parse_amplitude, Amplitude};
use crate::machine::{MachineSpec, SpecError, SpecErrorKind, StateId};
use crate::tape::{Symbol, Tape};

/// One basis state `|h>|q>|T>|x>`.
///
/// The derived ordering (halt bit, state, head, tape) is the canonical order
/// used for every amplitude accumulation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub halted: bool,
    pub state: StateId,
    pub head: i64,
    pub tape: Tape,
}

impl Configuration {
    /// Builds a configuration whose halt bit agrees with `state`.
    pub fn new(spec: &MachineSpec, state: StateId, tape: Tape, head: i64) -> Self {
        Configuration {
            halted: spec.is_halt(state),
            state,
            head,
            tape,
        }
    }

    pub fn scanned(&self) -> Symbol {
        self.tape.read(self.head)
    }

    /// Same configuration with head and tape moved by `offset` cells.
    pub fn translated(&self, offset: i64) -> Self {
        Configuration {
            halted: self.halted,
            state: self.state,
            head: self.head + offset,
            tape: self.tape.shifted(offset),
        }
    }

    pub fn display<'a>(&'a self, spec: &'a MachineSpec) -> impl fmt::Display + 'a {
        DisplayConfig { config: self, spec }
    }
}

struct DisplayConfig<'a> {
    config: &'a Configuration,
    spec: &'a MachineSpec,
}

impl fmt::Display for DisplayConfig<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.config;
        write!(
            f,
            "|{}>|{}>|{}>|{}>",
            u8::from(c.halted),
            self.spec.state_name(c.state),
            c.tape,
            c.head
        )
    }
}

/// Finite superposition of configurations with its cached squared norm.
///
/// Entries are kept in canonical configuration order and exact zeros are
/// never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuantumState {
    amplitudes: BTreeMap<Configuration, Complex64>,
    norm2: f64,
}

impl QuantumState {
    pub fn basis(config: Configuration) -> Self {
        Self::from_terms([(config, Complex64::new(1.0, 0.0))])
    }

    /// Sums amplitudes of repeated configurations, in the order given.
    pub fn from_terms(terms: impl IntoIterator<Item = (Configuration, Complex64)>) -> Self {
        let mut amplitudes: BTreeMap<Configuration, Complex64> = BTreeMap::new();
        for (config, amp) in terms {
            *amplitudes.entry(config).or_default() += amp;
        }
        Self::from_map(amplitudes, 0.0)
    }

    /// Drops entries with modulus below `prune`, and exact zeros.
    pub(crate) fn from_map(mut amplitudes: BTreeMap<Configuration, Complex64>, prune: f64) -> Self {
        amplitudes.retain(|_, a| *a != Complex64::new(0.0, 0.0) && a.norm() >= prune);
        let norm2 = amplitudes.values().fold(0.0, |acc, a| acc + a.norm_sqr());
        QuantumState { amplitudes, norm2 }
    }

    pub fn norm2(&self) -> f64 {
        self.norm2
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitude(&self, config: &Configuration) -> Complex64 {
        self.amplitudes.get(config).copied().unwrap_or_default()
    }

    /// Entries in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&Configuration, &Complex64)> {
        self.amplitudes.iter()
    }

    pub fn configurations(&self) -> impl Iterator<Item = &Configuration> {
        self.amplitudes.keys()
    }

    /// Squared norm of the halted component.
    pub fn halted_mass(&self) -> f64 {
        self.amplitudes
            .iter()
            .filter(|(c, _)| c.halted)
            .fold(0.0, |acc, (_, a)| acc + a.norm_sqr())
    }

    /// Component with halt bit `halted`, not renormalized.
    pub fn project(&self, halted: bool) -> QuantumState {
        let amplitudes = self
            .amplitudes
            .iter()
            .filter(|(c, _)| c.halted == halted)
            .map(|(c, a)| (c.clone(), *a))
            .collect();
        Self::from_map(amplitudes, 0.0)
    }

    pub fn scaled(&self, factor: f64) -> QuantumState {
        let amplitudes = self.amplitudes.iter().map(|(c, a)| (c.clone(), a * factor)).collect();
        Self::from_map(amplitudes, 0.0)
    }

    /// Rescaled to unit norm. The zero state is returned unchanged.
    pub fn normalized(&self) -> QuantumState {
        if self.norm2 == 0.0 {
            return self.clone();
        }
        self.scaled(1.0 / self.norm2.sqrt())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &QuantumState) -> Complex64 {
        let (small, large, flip) = if self.len() <= other.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, a) in small.iter() {
            if let Some(b) = large.amplitudes.get(c) {
                acc += if flip { b.conj() * a } else { a.conj() * b };
            }
        }
        acc
    }
}

/// Input superposition: distinct strings laid on cells `0..`, head at 0, in
/// the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSpec {
    terms: Vec<(Amplitude, Vec<Symbol>)>,
}

impl InputSpec {
    /// Validates symbols against the alphabet, distinctness and unit norm.
    pub fn new(terms: Vec<(Amplitude, Vec<Symbol>)>, spec: &MachineSpec, tol: f64) -> Result<Self, SpecError> {
        if terms.is_empty() {
            return Err(SpecErrorKind::Syntax("empty input".into()).into());
        }
        for (i, (_, word)) in terms.iter().enumerate() {
            for s in word {
                if s.is_blank() || !spec.alphabet().contains(s) {
                    return Err(SpecErrorKind::UnknownSymbol(s.to_string()).into());
                }
            }
            if terms[..i].iter().any(|(_, w)| w == word) {
                let word: String = word.iter().map(|s| s.0).collect();
                return Err(SpecErrorKind::Syntax(format!("duplicate input string `{word}`")).into());
            }
        }
        let norm2: f64 = terms.iter().map(|(a, _)| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > tol {
            return Err(
                SpecErrorKind::Syntax(format!("input amplitudes have squared norm {norm2}, expected 1")).into(),
            );
        }
        Ok(InputSpec { terms })
    }

    /// Single classical input with amplitude 1.
    pub fn classical(word: &str, spec: &MachineSpec) -> Result<Self, SpecError> {
        let symbols = word.chars().map(Symbol).collect();
        Self::new(vec![(Complex64::new(1.0, 0.0), symbols)], spec, 0.0)
    }

    pub fn terms(&self) -> &[(Amplitude, Vec<Symbol>)] {
        &self.terms
    }

    pub fn to_state(&self, spec: &MachineSpec) -> QuantumState {
        QuantumState::from_terms(self.terms.iter().map(|(amp, word)| {
            (
                Configuration::new(spec, spec.initial(), Tape::from_symbols(word), 0),
                *amp,
            )
        }))
    }
}

/// Parses `term ('+' term)*` with `term ::= [amp ':'] string`.
///
/// The amplitude may be omitted only for a single-term input.
pub fn parse_input(text: &str, spec: &MachineSpec, tol: f64) -> Result<InputSpec, SpecError> {
    let text = text.trim();
    if !text.contains(':') {
        return InputSpec::new(vec![(Complex64::new(1.0, 0.0), read_word(text)?)], spec, tol);
    }
    let mut terms = Vec::new();
    let mut rest = text;
    loop {
        let Some((amp, after)) = rest.split_once(':') else {
            return Err(SpecErrorKind::Syntax(format!("expected `amplitude:string` at `{rest}`")).into());
        };
        let amplitude = parse_amplitude(amp.trim()).map_err(SpecErrorKind::Amplitude)?;
        let after = after.trim_start();
        let end = after
            .find(|c: char| c.is_whitespace() || c == '+')
            .unwrap_or(after.len());
        terms.push((amplitude, read_word(&after[..end])?));
        let tail = after[end..].trim_start();
        if tail.is_empty() {
            break;
        }
        let Some(next) = tail.strip_prefix('+') else {
            return Err(SpecErrorKind::Syntax(format!("expected `+` before `{tail}`")).into());
        };
        rest = next;
    }
    InputSpec::new(terms, spec, tol)
}

fn read_word(word: &str) -> Result<Vec<Symbol>, SpecError> {
    if word.is_empty() {
        return Err(SpecErrorKind::Syntax("empty input string".into()).into());
    }
    Ok(word.chars().map(Symbol).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::machine::parse_machine;

    fn spec() -> MachineSpec {
        parse_machine(corpus::HADAMARD_HALT).unwrap()
    }

    #[test]
    fn default_amplitude() {
        let spec = parse_machine(corpus::HADAMARD_SWEEP).unwrap();
        let input = parse_input("0110", &spec, 1e-9).unwrap();
        assert_eq!(input.terms().len(), 1);
        assert_eq!(input.terms()[0].0, Complex64::new(1.0, 0.0));
        let state = input.to_state(&spec);
        let (config, _) = state.iter().next().unwrap();
        assert_eq!(config.head, 0);
        assert!(!config.halted);
        assert_eq!(config.state, spec.initial());
        assert_eq!(config.tape.to_string(), "0110@0");
    }

    #[test]
    fn two_term_superposition() {
        let input = parse_input("1/sqrt(2):0 + 1/sqrt(2):00", &spec(), 1e-9).unwrap();
        assert_eq!(input.terms().len(), 2);
        assert_eq!(input.terms()[1].1, vec![Symbol('0'), Symbol('0')]);
        let state = input.to_state(&spec());
        assert!((state.norm2() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn complex_amplitudes_with_plus_inside() {
        let input = parse_input("1/2 + 1/2 i:0 + 1/sqrt(2):1", &spec(), 1e-9).unwrap();
        assert_eq!(input.terms()[0].0, Complex64::new(0.5, 0.5));
    }

    #[test]
    fn input_errors() {
        let s = spec();
        assert!(parse_input("1/2:0 + 1/2:1", &s, 1e-9)
            .unwrap_err()
            .to_string()
            .contains("squared norm"));
        assert!(matches!(
            parse_input("012", &s, 1e-9).unwrap_err().kind,
            SpecErrorKind::UnknownSymbol(_)
        ));
        assert!(parse_input("1/sqrt(2):0 + 1/sqrt(2):0", &s, 1e-9)
            .unwrap_err()
            .to_string()
            .contains("duplicate"));
        assert!(parse_input("2:x", &s, 1e-9).is_err());
        assert!(parse_input("0_1", &s, 1e-9).is_err());
        assert!(parse_input("", &s, 1e-9).is_err());
    }

    #[test]
    fn state_bookkeeping() {
        let s = spec();
        let c1 = Configuration::new(&s, s.halt(), Tape::from_symbols(&[Symbol('1')]), 1);
        let c2 = Configuration::new(&s, s.initial(), Tape::from_symbols(&[Symbol('0')]), 0);
        let st = QuantumState::from_terms([
            (c1.clone(), Complex64::new(0.6, 0.0)),
            (c2.clone(), Complex64::new(0.8, 0.0)),
        ]);
        assert!((st.halted_mass() - 0.36).abs() < 1e-15);
        assert!((st.norm2() - 1.0).abs() < 1e-15);
        let cancelled =
            QuantumState::from_terms([(c2.clone(), Complex64::new(0.5, 0.0)), (c2, Complex64::new(-0.5, 0.0))]);
        assert!(cancelled.is_empty());
        assert_eq!(st.inner(&QuantumState::basis(c1)), Complex64::new(0.6, 0.0));
    }
}
