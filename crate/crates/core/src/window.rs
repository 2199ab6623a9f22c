//! Finite window of local configuration patterns.
//!
//! One step reads and writes only the scanned cell and moves the head by at
//! most one, so the images of two configurations can share a basis state
//! only if their heads are at most two cells apart and their tapes agree
//! away from the two head cells. Every such local pattern fits on cells
//! `-3..=3` with heads in `-2..=2`; pairs are emitted once per translation
//! class.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::machine::{MachineSpec, StateId};
use crate::state::Configuration;
use crate::tape::{Symbol, Tape};

pub(crate) const CELL_RADIUS: i64 = 3;
pub(crate) const HEAD_RADIUS: i64 = 2;
const CELLS: usize = (2 * CELL_RADIUS + 1) as usize;

/// Configuration on the window with symbols stored as alphabet indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct Local {
    pub state: u16,
    pub head: i8,
    pub tape: [u8; CELLS],
}

impl Local {
    fn cell(head: i8) -> usize {
        (i64::from(head) + CELL_RADIUS) as usize
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LocalTarget {
    pub amplitude: Complex64,
    pub state: u16,
    pub write: u8,
    pub shift: i8,
}

pub(crate) struct Window<'a> {
    spec: &'a MachineSpec,
    blank: u8,
    states: Vec<u16>,
    /// `rules[state * k + symbol]`, `None` for a missing rule.
    rules: Vec<Option<Vec<LocalTarget>>>,
}

impl<'a> Window<'a> {
    /// Window over configurations whose state satisfies `keep`.
    pub fn new(spec: &'a MachineSpec, keep: impl Fn(StateId) -> bool) -> Self {
        let alphabet = spec.alphabet();
        let index = |s: Symbol| alphabet.iter().position(|&a| a == s).unwrap() as u8;
        let mut rules = Vec::with_capacity(spec.states().len() * alphabet.len());
        for q in spec.state_ids() {
            for &s in alphabet {
                rules.push(spec.rule(q, s).map(|targets| {
                    targets
                        .iter()
                        .map(|t| LocalTarget {
                            amplitude: t.amplitude,
                            state: t.next.0,
                            write: index(t.write),
                            shift: t.movement.offset() as i8,
                        })
                        .collect()
                }));
            }
        }
        Window {
            spec,
            blank: index(Symbol::BLANK),
            states: spec.state_ids().filter(|&q| keep(q)).map(|q| q.0).collect(),
            rules,
        }
    }

    fn k(&self) -> usize {
        self.spec.alphabet().len()
    }

    pub fn targets(&self, c: &Local) -> Option<&[LocalTarget]> {
        let read = c.tape[Local::cell(c.head)] as usize;
        self.rules[c.state as usize * self.k() + read].as_deref()
    }

    /// Every configuration on the window, in ascending order.
    pub fn configurations(&self) -> Vec<Local> {
        let k = self.k();
        let tapes = k.pow(CELLS as u32);
        let mut out = Vec::with_capacity(self.states.len() * 5 * tapes);
        for &state in &self.states {
            for head in -HEAD_RADIUS..=HEAD_RADIUS {
                for code in 0..tapes {
                    let mut tape = [0u8; CELLS];
                    let mut rest = code;
                    for cell in tape.iter_mut().rev() {
                        *cell = (rest % k) as u8;
                        rest /= k;
                    }
                    out.push(Local {
                        state,
                        head: head as i8,
                        tape,
                    });
                }
            }
        }
        out
    }

    /// Partners `b > a` of `a` forming a candidate pair.
    pub fn partners(&self, a: &Local) -> Vec<Local> {
        let k = self.k() as u8;
        let x1 = i64::from(a.head);
        let mut out = Vec::new();
        for x2 in (x1 - 2).max(-HEAD_RADIUS)..=(x1 + 2).min(HEAD_RADIUS) {
            let (c1, c2) = (Local::cell(a.head), Local::cell(x2 as i8));
            for &state in &self.states {
                for s1 in 0..k {
                    for s2 in 0..k {
                        if c1 == c2 && s2 > 0 {
                            break;
                        }
                        let mut tape = a.tape;
                        tape[c1] = s1;
                        if c1 != c2 {
                            tape[c2] = s2;
                        }
                        let b = Local {
                            state,
                            head: x2 as i8,
                            tape,
                        };
                        if b > *a && self.is_representative(a, &b) {
                            out.push(b);
                        }
                    }
                }
            }
        }
        out
    }

    /// Among the translates of a pair that fit the window, keep the one
    /// whose leftmost head is closest to cell 0.
    fn is_representative(&self, a: &Local, b: &Local) -> bool {
        let min_head = i64::from(a.head.min(b.head));
        let max_head = i64::from(a.head.max(b.head));
        let used: Vec<i64> = (0..CELLS)
            .filter(|&i| a.tape[i] != self.blank || b.tape[i] != self.blank)
            .map(|i| i as i64 - CELL_RADIUS)
            .collect();
        let mut lo = -HEAD_RADIUS - min_head;
        let mut hi = HEAD_RADIUS - max_head;
        if let (Some(first), Some(last)) = (used.first(), used.last()) {
            lo = lo.max(-CELL_RADIUS - first);
            hi = hi.min(CELL_RADIUS - last);
        }
        (-min_head).clamp(lo, hi) == 0
    }

    /// `<U a | U b>` computed on the window.
    pub fn image_inner(&self, a: &Local, b: &Local) -> Complex64 {
        let (Some(ta), Some(tb)) = (self.targets(a), self.targets(b)) else {
            return Complex64::new(0.0, 0.0);
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for u in ta {
            let head_u = a.head + u.shift;
            let mut tape_u = a.tape;
            tape_u[Local::cell(a.head)] = u.write;
            for v in tb {
                if u.state != v.state || head_u != b.head + v.shift {
                    continue;
                }
                let mut tape_v = b.tape;
                tape_v[Local::cell(b.head)] = v.write;
                if tape_u == tape_v {
                    acc += u.amplitude.conj() * v.amplitude;
                }
            }
        }
        acc
    }

    /// Runs `f` on every candidate pair in parallel; results come back in
    /// ascending order of the first member.
    pub fn collect_pairs<R, F>(&self, f: F) -> (usize, Vec<R>)
    where
        R: Send,
        F: Fn(&Local, &Local) -> Option<R> + Sync,
    {
        let configs = self.configurations();
        let per_source: Vec<(usize, Vec<R>)> = configs
            .par_iter()
            .map(|a| {
                let partners = self.partners(a);
                let found = partners.iter().filter_map(|b| f(a, b)).collect();
                (partners.len(), found)
            })
            .collect();
        let count = per_source.iter().map(|(n, _)| n).sum();
        (count, per_source.into_iter().flat_map(|(_, r)| r).collect())
    }

    pub fn to_configuration(&self, c: &Local) -> Configuration {
        let alphabet = self.spec.alphabet();
        let cells = c.tape.iter().map(|&i| alphabet[i as usize]).collect();
        Configuration::new(
            self.spec,
            StateId(c.state),
            Tape::from_cells(-CELL_RADIUS, cells),
            i64::from(c.head),
        )
    }
}
