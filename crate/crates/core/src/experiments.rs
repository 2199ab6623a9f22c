//! Numerical experiments on halting: intermediate superpositions of halted
//! and running branches, and the halted subspace versus its image.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::evolution::{evolve, evolve_state, image, StepError};
use crate::machine::{MachineSpec, SpecError};
use crate::state::{Configuration, InputSpec, QuantumState};
use crate::tape::Symbol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Input(#[from] SpecError),
    #[error(transparent)]
    Step(#[from] StepError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MyersReport {
    pub input_a: String,
    pub input_b: String,
    /// `(step, halted mass)` for steps `0..=budget`.
    pub per_step: Vec<(usize, f64)>,
    /// First and last step with halted mass strictly between 0 and 1.
    pub window: Option<(usize, usize)>,
}

/// Evolves the equal superposition of two classical inputs and records
/// where it is partly halted.
pub fn myers_demo(
    spec: &MachineSpec,
    input_a: &str,
    input_b: &str,
    budget: usize,
    tol: f64,
) -> Result<MyersReport, ExperimentError> {
    let word = |w: &str| w.chars().map(Symbol).collect::<Vec<_>>();
    let input = if input_a == input_b {
        InputSpec::new(vec![(Complex64::new(1.0, 0.0), word(input_a))], spec, tol)?
    } else {
        let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        InputSpec::new(vec![(amp, word(input_a)), (amp, word(input_b))], spec, tol)?
    };
    let (_, trace) = evolve(spec, &input, budget)?;
    let per_step: Vec<(usize, f64)> = trace.rows.iter().map(|r| (r.step, r.halted_mass)).collect();
    let strict: Vec<usize> = per_step
        .iter()
        .filter(|(_, m)| *m > tol && *m < 1.0 - tol)
        .map(|(s, _)| *s)
        .collect();
    Ok(MyersReport {
        input_a: input_a.to_string(),
        input_b: input_b.to_string(),
        per_step,
        window: strict.first().zip(strict.last()).map(|(a, b)| (*a, *b)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SubspaceVerdict {
    NoHaltingObserved,
    GapFound,
    NoGapFound,
}

/// Halted component of the image of one running configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct NewlyHalting {
    pub source: Configuration,
    /// Norm of the halted component of `U source`.
    pub norm: f64,
    /// Largest `|<U v | c>|` over `v` in the halted set, for the normalized
    /// component `c`.
    pub max_overlap: f64,
    /// Norm of the projection of the normalized component onto
    /// `span{U v}`.
    pub projection_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceReport {
    pub window_steps: usize,
    /// Halted configurations seen within the window.
    pub halted_basis_count: usize,
    /// Running configurations seen before the last step.
    pub running_count: usize,
    /// Largest entry of `|G - I|` for the Gram matrix of `{U v}`.
    pub gram_deviation: f64,
    pub newly_halting_vectors: usize,
    pub max_overlap_with_uv: f64,
    /// Newly halting components whose projection norm is at most `tol`.
    pub outside_span: usize,
    pub tol: f64,
    pub verdict: SubspaceVerdict,
    /// Every newly halting component, in canonical source order.
    pub newly_halting: Vec<NewlyHalting>,
}

/// Compares the halted configurations `H` met within `steps` unmeasured
/// steps with the images of running configurations: a newly halting vector
/// orthogonal to `span{U v : v in H}` shows that the halted space is not
/// mapped onto itself.
pub fn analyze_halting_subspace(
    spec: &MachineSpec,
    input: &InputSpec,
    steps: usize,
    tol: f64,
) -> Result<SubspaceReport, StepError> {
    let mut halted: BTreeSet<Configuration> = BTreeSet::new();
    let mut running: BTreeSet<Configuration> = BTreeSet::new();
    let mut state = input.to_state(spec);
    for t in 0..=steps {
        if t > 0 {
            state = evolve_state(spec, state, 1, 0.0)?.0;
        }
        for c in state.configurations() {
            if c.halted {
                halted.insert(c.clone());
            } else if t < steps {
                running.insert(c.clone());
            }
        }
    }

    let images: Vec<QuantumState> = halted.iter().map(|v| image(spec, v)).collect::<Result<_, _>>()?;
    let gram_deviation = gram_deviation(&images);

    // Images sharing support with a vector are the only ones it overlaps.
    let mut index: BTreeMap<&Configuration, Vec<usize>> = BTreeMap::new();
    for (i, img) in images.iter().enumerate() {
        for c in img.configurations() {
            index.entry(c).or_default().push(i);
        }
    }

    let mut newly_halting = Vec::new();
    for w in &running {
        let component = image(spec, w)?.project(true);
        let norm = component.norm2().sqrt();
        if norm <= tol {
            continue;
        }
        let c = component.normalized();
        let touching: BTreeSet<usize> = c
            .configurations()
            .filter_map(|x| index.get(x))
            .flatten()
            .copied()
            .collect();
        let basis: Vec<&QuantumState> = touching.iter().map(|&i| &images[i]).collect();
        let max_overlap = basis.iter().map(|b| b.inner(&c).norm()).fold(0.0, f64::max);
        newly_halting.push(NewlyHalting {
            source: w.clone(),
            norm,
            max_overlap,
            projection_norm: projection_norm(&basis, &c, tol),
        });
    }

    let outside_span = newly_halting.iter().filter(|n| n.projection_norm <= tol).count();
    let verdict = if newly_halting.is_empty() {
        SubspaceVerdict::NoHaltingObserved
    } else if outside_span > 0 {
        SubspaceVerdict::GapFound
    } else {
        SubspaceVerdict::NoGapFound
    };
    Ok(SubspaceReport {
        window_steps: steps,
        halted_basis_count: halted.len(),
        running_count: running.len(),
        gram_deviation,
        newly_halting_vectors: newly_halting.len(),
        max_overlap_with_uv: newly_halting.iter().map(|n| n.max_overlap).fold(0.0, f64::max),
        outside_span,
        tol,
        verdict,
        newly_halting,
    })
}

/// `max |<u_i|u_j> - delta_ij|`, using an inverted index over supports.
fn gram_deviation(images: &[QuantumState]) -> f64 {
    let mut deviation = images.iter().map(|u| (u.norm2() - 1.0).abs()).fold(0.0, f64::max);
    let mut by_config: BTreeMap<&Configuration, Vec<usize>> = BTreeMap::new();
    for (i, u) in images.iter().enumerate() {
        for c in u.configurations() {
            by_config.entry(c).or_default().push(i);
        }
    }
    let mut checked = BTreeSet::new();
    for members in by_config.values() {
        for (k, &i) in members.iter().enumerate() {
            for &j in &members[k + 1..] {
                if checked.insert((i, j)) {
                    deviation = deviation.max(images[i].inner(&images[j]).norm());
                }
            }
        }
    }
    deviation
}

/// Norm of the projection of `target` onto the span of `basis`, by
/// modified Gram-Schmidt. Vectors with residual norm below `tol` are
/// treated as dependent.
fn projection_norm(basis: &[&QuantumState], target: &QuantumState, tol: f64) -> f64 {
    let mut ortho: Vec<QuantumState> = Vec::new();
    for b in basis {
        let mut r = (*b).clone();
        for e in &ortho {
            r = axpy(&r, -e.inner(&r), e);
        }
        if r.norm2().sqrt() > tol {
            ortho.push(r.normalized());
        }
    }
    ortho
        .iter()
        .map(|e| e.inner(target).norm_sqr())
        .fold(0.0, |acc, x| acc + x)
        .sqrt()
}

/// `x + a * y`.
fn axpy(x: &QuantumState, a: Complex64, y: &QuantumState) -> QuantumState {
    QuantumState::from_terms(
        x.iter()
            .map(|(c, v)| (c.clone(), *v))
            .chain(y.iter().map(|(c, v)| (c.clone(), a * v))),
    )
}
