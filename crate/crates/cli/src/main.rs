//! `qtm`: command-line front end for the quantum Turing machine laboratory.
//!
//! Exit status: 0 for a clean result, 2 when the tool ran and found
//! something (a well-formedness violation, a schedule mismatch, a norm audit
//! failure, an intermediate halting window, a subspace gap, a non-reversible
//! machine), 1 for usage, parse and runtime errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use qtm_core::report::{self, Envelope};
use qtm_core::{
    analyze_halting_subspace, check_wellformed, compare_schedules, lift_to_qtm, myers_demo, parse_classical,
    parse_input, parse_machine, parse_schedule, parse_schedule_list, render_machine, run_schedule, sample_run,
    InputSpec, LiftError, MachineSpec, SubspaceVerdict, DEFAULT_TOL,
};

#[derive(Debug, Parser)]
#[command(name = "qtm", version, about = "Quantum Turing machine laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check that the step operator is an isometry on basis configurations.
    Check {
        machine: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Write the JSON report here (`-` for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
        /// Witnesses listed in the JSON report.
        #[arg(long, default_value_t = 50)]
        max_witnesses: usize,
    },
    /// Exact output distribution under a halt-bit measurement schedule.
    Run {
        machine: PathBuf,
        #[arg(long)]
        input: String,
        #[arg(long)]
        steps: usize,
        /// every | end | at:k1,k2,...
        #[arg(long, default_value = "every")]
        schedule: String,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Seeded Monte Carlo trajectories.
    Sample {
        machine: PathBuf,
        #[arg(long)]
        input: String,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        schedule: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Compare the output distributions of two schedules.
    Compare {
        machine: PathBuf,
        #[arg(long)]
        input: String,
        #[arg(long)]
        steps: usize,
        /// Two schedules, e.g. `every,end` or `at:1,4,end`.
        #[arg(long)]
        schedules: String,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Per-step support size, norm and halted mass without measurement.
    Trace {
        machine: PathBuf,
        #[arg(long)]
        input: String,
        #[arg(long)]
        steps: usize,
        /// Drop amplitudes with modulus below this value.
        #[arg(long, default_value_t = 0.0)]
        prune: f64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Lift a reversible classical machine to a quantum machine.
    Lift {
        machine: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Halted mass of an equal superposition of two classical inputs.
    Myers {
        machine: PathBuf,
        #[arg(long = "input-a")]
        input_a: String,
        #[arg(long = "input-b")]
        input_b: String,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Halted subspace against its image under one step.
    Subspace {
        machine: PathBuf,
        #[arg(long)]
        input: String,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Newly halting vectors listed in the JSON report.
        #[arg(long, default_value_t = 50)]
        max_vectors: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Clean,
    Findings,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(Status::Clean) => ExitCode::SUCCESS,
        Ok(Status::Findings) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Reads a quantum machine. Classical `tm-spec v1` files are lifted.
fn load_machine(path: &Path) -> Result<MachineSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let classical = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .is_some_and(|l| l.starts_with("tm-spec"));
    if classical {
        let tm = parse_classical(&text).with_context(|| format!("parsing {}", path.display()))?;
        return lift_to_qtm(&tm).with_context(|| format!("lifting {}", path.display()));
    }
    parse_machine(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_input(text: &str, spec: &MachineSpec, tol: f64) -> Result<InputSpec> {
    parse_input(text, spec, tol).with_context(|| format!("parsing input `{text}`"))
}

/// Writes to `path`, or stdout for `-`.
fn emit(path: &Path, contents: &str) -> Result<()> {
    if path == Path::new("-") {
        print!("{contents}");
        return Ok(());
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn emit_json(path: Option<&PathBuf>, machine: &Path, parameters: Value, result: Value) -> Result<()> {
    if let Some(path) = path {
        let envelope = Envelope::new(machine.display().to_string(), parameters, result);
        emit(path, &envelope.to_json())?;
    }
    Ok(())
}

/// Human summary goes to stdout unless the JSON report does.
fn say(json: Option<&PathBuf>, line: impl AsRef<str>) {
    if json.is_some_and(|p| p == Path::new("-")) {
        eprintln!("{}", line.as_ref());
    } else {
        println!("{}", line.as_ref());
    }
}

fn dispatch(command: Command) -> Result<Status> {
    match command {
        Command::Check {
            machine,
            tol,
            json,
            max_witnesses,
        } => {
            let spec = load_machine(&machine)?;
            let structural = qtm_core::validate_structure(&spec, tol);
            let r = check_wellformed(&spec, tol);
            let json_ref = json.as_ref();
            say(
                json_ref,
                format!(
                    "verdict: {}",
                    if r.is_well_formed() { "well_formed" } else { "violation" }
                ),
            );
            say(json_ref, format!("candidate pairs checked: {}", r.candidates_checked));
            for v in &structural {
                say(json_ref, format!("structure: {}", serde_json::to_string(v)?));
            }
            for v in &r.norm_violations {
                say(
                    json_ref,
                    format!("norm: ({}, {}) squared norm {}", v.state, v.read, v.norm2),
                );
            }
            say(
                json_ref,
                format!("orthogonality witnesses: {}", r.orthogonality_witnesses.len()),
            );
            for w in r.orthogonality_witnesses.iter().take(5) {
                say(
                    json_ref,
                    format!(
                        "  {} vs {}: |<U a|U b>| = {}",
                        w.first.display(&spec),
                        w.second.display(&spec),
                        w.inner.norm()
                    ),
                );
            }
            let mut result = report::wellformedness(&spec, &r, max_witnesses);
            result["structure_violations"] = serde_json::to_value(&structural)?;
            emit_json(
                json_ref,
                &machine,
                json!({ "tol": tol, "max_witnesses": max_witnesses }),
                result,
            )?;
            Ok(if r.is_well_formed() && structural.is_empty() {
                Status::Clean
            } else {
                Status::Findings
            })
        }
        Command::Run {
            machine,
            input,
            steps,
            schedule,
            tol,
            json,
        } => {
            let spec = load_machine(&machine)?;
            let inp = load_input(&input, &spec, tol)?;
            let s = parse_schedule(&schedule, steps)?;
            let r = run_schedule(&spec, &inp, &s, steps, tol)?;
            let json_ref = json.as_ref();
            for (o, p) in &r.distribution.probabilities {
                say(json_ref, format!("{o}\t{p}"));
            }
            if r.norm_audit_flag {
                say(
                    json_ref,
                    format!("norm audit: branch norm drifted by {}", r.max_norm_deviation),
                );
            }
            let parameters = json!({ "input": input, "steps": steps, "schedule": s.to_string(), "tol": tol });
            emit_json(json_ref, &machine, parameters, report::schedule_run(&r))?;
            Ok(if r.norm_audit_flag {
                Status::Findings
            } else {
                Status::Clean
            })
        }
        Command::Sample {
            machine,
            input,
            steps,
            schedule,
            seed,
            samples,
            tol,
            json,
        } => {
            if samples == 0 {
                bail!("--samples must be at least 1");
            }
            let spec = load_machine(&machine)?;
            let inp = load_input(&input, &spec, tol)?;
            let s = parse_schedule(&schedule, steps)?;
            let exact = run_schedule(&spec, &inp, &s, steps, tol)?;
            let e = sample_run(&spec, &inp, &s, steps, seed, samples)?;
            let json_ref = json.as_ref();
            for (o, n) in &e.counts {
                say(json_ref, format!("{o}\t{n}"));
            }
            say(
                json_ref,
                format!(
                    "total variation to exact: {}",
                    e.frequencies().total_variation(&exact.distribution)
                ),
            );
            let parameters = json!({
                "input": input, "steps": steps, "schedule": s.to_string(),
                "seed": seed, "samples": samples, "tol": tol,
            });
            emit_json(
                json_ref,
                &machine,
                parameters,
                report::empirical(&e, &exact.distribution),
            )?;
            Ok(if exact.norm_audit_flag {
                Status::Findings
            } else {
                Status::Clean
            })
        }
        Command::Compare {
            machine,
            input,
            steps,
            schedules,
            tol,
            json,
        } => {
            let spec = load_machine(&machine)?;
            let inp = load_input(&input, &spec, tol)?;
            let list = parse_schedule_list(&schedules, steps)?;
            let [a, b] = list.as_slice() else {
                bail!("--schedules needs exactly two schedules, got {}", list.len());
            };
            let r = compare_schedules(&spec, &inp, steps, a, b, tol)?;
            let json_ref = json.as_ref();
            say(json_ref, format!("{a} vs {b} over {steps} steps"));
            say(json_ref, format!("total variation: {}", r.total_variation));
            say(json_ref, format!("max abs difference: {}", r.max_abs_difference));
            if r.norm_audit_flag {
                say(
                    json_ref,
                    format!("norm audit: branch norm drifted by {}", r.max_norm_deviation),
                );
            }
            let parameters = json!({
                "input": input, "steps": steps, "schedules": [a.to_string(), b.to_string()], "tol": tol,
            });
            emit_json(json_ref, &machine, parameters, report::comparison(&r))?;
            Ok(if r.total_variation > tol || r.norm_audit_flag {
                Status::Findings
            } else {
                Status::Clean
            })
        }
        Command::Trace {
            machine,
            input,
            steps,
            prune,
            tol,
            csv,
        } => {
            let spec = load_machine(&machine)?;
            let inp = load_input(&input, &spec, tol)?;
            let (_, trace) = qtm_core::evolution::evolve_state(&spec, inp.to_state(&spec), steps, prune)?;
            let text = trace.to_csv();
            match csv {
                Some(path) => emit(&path, &text)?,
                None => print!("{text}"),
            }
            Ok(Status::Clean)
        }
        Command::Lift { machine, output } => {
            let text = fs::read_to_string(&machine).with_context(|| format!("reading {}", machine.display()))?;
            let tm = parse_classical(&text).with_context(|| format!("parsing {}", machine.display()))?;
            match lift_to_qtm(&tm) {
                Ok(spec) => {
                    emit(&output, &render_machine(&spec))?;
                    Ok(Status::Clean)
                }
                Err(LiftError::NotReversible(witnesses)) => {
                    eprintln!("not reversible: {} colliding pair(s)", witnesses.len());
                    for w in witnesses.iter().take(5) {
                        eprintln!(
                            "  {} and {} both step to {}",
                            tm.describe(&w.first),
                            tm.describe(&w.second),
                            tm.describe(&w.image)
                        );
                    }
                    Ok(Status::Findings)
                }
            }
        }
        Command::Myers {
            machine,
            input_a,
            input_b,
            steps,
            tol,
            json,
        } => {
            let spec = load_machine(&machine)?;
            let r = myers_demo(&spec, &input_a, &input_b, steps, tol)?;
            let json_ref = json.as_ref();
            for (s, m) in &r.per_step {
                say(json_ref, format!("{s}\t{m}"));
            }
            match r.window {
                Some((a, b)) => say(json_ref, format!("intermediate window: steps {a}..={b}")),
                None => say(json_ref, "intermediate window: none"),
            }
            let parameters = json!({ "input_a": input_a, "input_b": input_b, "steps": steps, "tol": tol });
            emit_json(json_ref, &machine, parameters, report::myers(&r))?;
            Ok(if r.window.is_some() {
                Status::Findings
            } else {
                Status::Clean
            })
        }
        Command::Subspace {
            machine,
            input,
            steps,
            tol,
            json,
            max_vectors,
        } => {
            let spec = load_machine(&machine)?;
            let inp = load_input(&input, &spec, tol)?;
            let r = analyze_halting_subspace(&spec, &inp, steps, tol)?;
            let json_ref = json.as_ref();
            let verdict = serde_json::to_value(r.verdict)?;
            say(json_ref, format!("verdict: {}", verdict.as_str().unwrap_or_default()));
            say(
                json_ref,
                format!("halted basis configurations: {}", r.halted_basis_count),
            );
            say(json_ref, format!("gram deviation: {}", r.gram_deviation));
            say(
                json_ref,
                format!(
                    "newly halting vectors: {} ({} outside span)",
                    r.newly_halting_vectors, r.outside_span
                ),
            );
            say(json_ref, format!("max overlap with U v: {}", r.max_overlap_with_uv));
            let parameters = json!({ "input": input, "steps": steps, "tol": tol, "max_vectors": max_vectors });
            emit_json(json_ref, &machine, parameters, report::subspace(&spec, &r, max_vectors))?;
            Ok(if r.verdict == SubspaceVerdict::GapFound {
                Status::Findings
            } else {
                Status::Clean
            })
        }
    }
}
