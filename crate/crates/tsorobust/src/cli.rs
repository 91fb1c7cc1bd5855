//! Command-line front end. All commands print deterministic output: two runs
//! of the same invocation are byte-identical, including under `--jobs`.
//!
//! Exit codes: 0 when the checked property holds, 1 when it is refuted (a
//! witness is printed), 2 when the verdict is unknown within the bounds, and
//! 3 for usage, I/O or parse errors.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::abstraction::{self, AbstractionSpec};
use crate::exec::Execution;
use crate::explore::{explore_subtree, root_packets, run_subtrees, Bounds, ExploreStats, Visit};
use crate::lang::{parse_program, print_program, Program};
use crate::mover::check_write_atomicity;
use crate::report::*;
use crate::robust::{check_robustness, reachable_valuations, MemModel};
use crate::sc::ScModel;
use crate::trace::{build_trace, TraceVariant};
use crate::tso::TsoModel;

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "tsorobust",
    about = "Robustness analyses for concurrent programs under TSO store buffers",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Sc,
    Tso,
}

impl From<ModelArg> for MemModel {
    fn from(m: ModelArg) -> MemModel {
        match m {
            ModelArg::Sc => MemModel::Sc,
            ModelArg::Tso => MemModel::Tso,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Standard,
    Extended,
}

impl From<VariantArg> for TraceVariant {
    fn from(v: VariantArg) -> TraceVariant {
        match v {
            VariantArg::Standard => TraceVariant::Standard,
            VariantArg::Extended => TraceVariant::Extended,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a program; print its canonical form.
    Parse {
        program: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Enumerate bounded executions.
    Explore {
        program: PathBuf,
        #[arg(long, value_enum, default_value_t = ModelArg::Tso)]
        model: ModelArg,
        #[arg(long, default_value_t = 12)]
        steps: u32,
        #[arg(long, default_value_t = 4)]
        buf: u32,
        /// Number of executions to print.
        #[arg(long, default_value_t = 10)]
        limit: usize,
        /// Apply a read abstraction `thread:label:predicate` first.
        #[arg(long = "abstract")]
        abstractions: Vec<String>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Decide trace robustness over the bounded executions.
    Robust {
        program: PathBuf,
        #[arg(long, default_value_t = 12)]
        steps: u32,
        #[arg(long, default_value_t = 4)]
        buf: u32,
        #[arg(long, value_enum, default_value_t = VariantArg::Extended)]
        variant: VariantArg,
        #[arg(long = "abstract")]
        abstractions: Vec<String>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Check write atomicity through mover analysis of SC executions.
    Atomic {
        program: PathBuf,
        #[arg(long, default_value_t = 12)]
        steps: u32,
        #[arg(long = "abstract")]
        abstractions: Vec<String>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Validate read abstractions and print the rewritten program.
    Abstract {
        program: PathBuf,
        /// `thread:label:predicate`; defaults to the file's `abstract`
        /// annotations when omitted.
        #[arg(long = "abstract")]
        abstractions: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Compare reachable shared valuations: SC vs TSO of one program, or
    /// program vs program (subset check) when a second file is given.
    CompareStates {
        program: PathBuf,
        program2: Option<PathBuf>,
        #[arg(long, default_value_t = 12)]
        steps: u32,
        #[arg(long, default_value_t = 4)]
        buf: u32,
        #[arg(long = "abstract")]
        abstractions: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print one execution's trace as Graphviz DOT.
    TraceDot {
        program: PathBuf,
        #[arg(long, value_enum, default_value_t = ModelArg::Tso)]
        model: ModelArg,
        #[arg(long, default_value_t = 12)]
        steps: u32,
        #[arg(long, default_value_t = 4)]
        buf: u32,
        /// Execution index in enumeration order; defaults to the longest.
        #[arg(long)]
        index: Option<u64>,
        #[arg(long, value_enum, default_value_t = VariantArg::Extended)]
        variant: VariantArg,
        #[arg(long = "abstract")]
        abstractions: Vec<String>,
    },
}

/// Resolve a program path, falling back to `$TSOROBUST_CORPUS/<path>` for
/// relative paths that do not exist as given.
pub fn resolve_path(path: &Path) -> PathBuf {
    if path.exists() || path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os("TSOROBUST_CORPUS") {
        Some(dir) => {
            let candidate = PathBuf::from(dir).join(path);
            if candidate.exists() {
                candidate
            } else {
                path.to_path_buf()
            }
        }
        None => path.to_path_buf(),
    }
}

fn load_program(path: &Path, abstractions: &[String]) -> Result<Program, String> {
    let resolved = resolve_path(path);
    let text = std::fs::read_to_string(&resolved)
        .map_err(|e| format!("cannot read {}: {e}", resolved.display()))?;
    let p = parse_program(&text).map_err(|e| format!("{}: {e}", resolved.display()))?;
    if abstractions.is_empty() {
        return Ok(p);
    }
    let specs = abstractions
        .iter()
        .map(|f| abstraction::parse_spec_flag(&p, f))
        .collect::<Result<Vec<_>, _>>()?;
    abstraction::apply_abstraction(&p, &specs).map_err(|e| e.to_string())
}

fn render<T: serde::Serialize>(report: &T, text: String, format: Format) -> String {
    match format {
        Format::Text => text,
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
    }
}

/// Run one command, returning the exit code and the full output.
pub fn run(cli: Cli) -> (i32, String) {
    match dispatch(cli) {
        Ok(pair) => pair,
        Err(msg) => (EXIT_ERROR, format!("error: {msg}\n")),
    }
}

fn dispatch(cli: Cli) -> Result<(i32, String), String> {
    match cli.command {
        Command::Parse { program, format } => {
            let p = load_program(&program, &[])?;
            match format {
                Format::Text => Ok((EXIT_HOLDS, print_program(&p))),
                Format::Json => {
                    #[derive(serde::Serialize)]
                    struct ParseReport {
                        command: &'static str,
                        program: String,
                        domain: String,
                        shared: Vec<String>,
                        threads: Vec<ThreadInfo>,
                        instructions: usize,
                        text: String,
                    }
                    #[derive(serde::Serialize)]
                    struct ThreadInfo {
                        name: String,
                        regs: Vec<String>,
                        labels: usize,
                    }
                    let report = ParseReport {
                        command: "parse",
                        program: p.name.clone(),
                        domain: p.domain.to_string(),
                        shared: p.shared.clone(),
                        threads: p
                            .threads
                            .iter()
                            .map(|t| ThreadInfo {
                                name: t.name.clone(),
                                regs: t.regs.iter().map(|r| p.reg_name(*r).to_string()).collect(),
                                labels: t.labels.len(),
                            })
                            .collect(),
                        instructions: p.instrs.len(),
                        text: print_program(&p),
                    };
                    Ok((EXIT_HOLDS, render(&report, String::new(), Format::Json)))
                }
            }
        }

        Command::Explore {
            program,
            model,
            steps,
            buf,
            limit,
            abstractions,
            jobs,
            format,
        } => {
            let p = load_program(&program, &abstractions)?;
            let bounds = Bounds::new(steps, buf);
            let (stats, sample) = match model {
                ModelArg::Sc => explore_sampled::<ScModel>(&p, bounds, limit, jobs),
                ModelArg::Tso => explore_sampled::<TsoModel>(&p, bounds, limit, jobs),
            };
            let report = ExploreReport::new(&p, model.into(), bounds, &stats, &sample);
            let text = report.text();
            Ok((EXIT_HOLDS, render(&report, text, format)))
        }

        Command::Robust {
            program,
            steps,
            buf,
            variant,
            abstractions,
            jobs,
            format,
        } => {
            let p = load_program(&program, &abstractions)?;
            let verdict = check_robustness(&p, Bounds::new(steps, buf), variant.into(), jobs);
            let report = RobustReport::new(&p, &verdict);
            let text = report.text();
            Ok((report.exit_code(), render(&report, text, format)))
        }

        Command::Atomic {
            program,
            steps,
            abstractions,
            jobs,
            format,
        } => {
            let p = load_program(&program, &abstractions)?;
            let result = check_write_atomicity(&p, steps, jobs);
            let report = AtomicReport::new(&p, steps, &result);
            let text = report.text();
            Ok((report.exit_code(), render(&report, text, format)))
        }

        Command::Abstract {
            program,
            abstractions,
            format,
        } => {
            let p = load_program(&program, &[])?;
            let specs: Vec<AbstractionSpec> = if abstractions.is_empty() {
                p.annotations
                    .iter()
                    .map(AbstractionSpec::from_annotation)
                    .collect()
            } else {
                abstractions
                    .iter()
                    .map(|f| abstraction::parse_spec_flag(&p, f))
                    .collect::<Result<_, _>>()?
            };
            if specs.is_empty() {
                return Err(
                    "no abstraction specs given and the file carries no annotations".into(),
                );
            }
            match abstraction::apply_abstraction(&p, &specs) {
                Ok(q) => {
                    #[derive(serde::Serialize)]
                    struct AbstractReport {
                        command: &'static str,
                        program: String,
                        specs: usize,
                        valid: bool,
                        text: String,
                    }
                    let report = AbstractReport {
                        command: "abstract",
                        program: p.name.clone(),
                        specs: specs.len(),
                        valid: true,
                        text: print_program(&q),
                    };
                    let text = print_program(&q);
                    Ok((EXIT_HOLDS, render(&report, text, format)))
                }
                Err(e) => Ok((EXIT_REFUTED, format!("abstraction rejected: {e}\n"))),
            }
        }

        Command::CompareStates {
            program,
            program2,
            steps,
            buf,
            abstractions,
            format,
        } => {
            let bounds = Bounds::new(steps, buf);
            match program2 {
                None => {
                    let p = load_program(&program, &abstractions)?;
                    let sc = reachable_valuations(&p, MemModel::Sc, bounds);
                    let tso = reachable_valuations(&p, MemModel::Tso, bounds);
                    let report = CompareModelsReport::new(&p, bounds, &sc, &tso);
                    let text = report.text();
                    Ok((report.exit_code(), render(&report, text, format)))
                }
                Some(second) => {
                    let p = load_program(&program, &abstractions)?;
                    let q = load_program(&second, &[])?;
                    if p.shared != q.shared {
                        return Err(format!(
                            "programs declare different shared variables ({} vs {})",
                            p.shared.join(","),
                            q.shared.join(",")
                        ));
                    }
                    let mut sets = Vec::new();
                    for model in [MemModel::Sc, MemModel::Tso] {
                        let a = reachable_valuations(&p, model, bounds);
                        let b = reachable_valuations(&q, model, bounds);
                        sets.push((a, b));
                    }
                    let report = ComparePrograms {
                        command: "compare-states",
                        program: p.name.clone(),
                        other: q.name.clone(),
                        bounds: bounds.into(),
                        sc_subset: sets[0].0.set.is_subset(&sets[0].1.set),
                        tso_subset: sets[1].0.set.is_subset(&sets[1].1.set),
                        sc_equal: sets[0].0.set == sets[0].1.set,
                        tso_equal: sets[1].0.set == sets[1].1.set,
                    };
                    let text = report.text();
                    Ok((report.exit_code(), render(&report, text, format)))
                }
            }
        }

        Command::TraceDot {
            program,
            model,
            steps,
            buf,
            index,
            variant,
            abstractions,
        } => {
            let p = load_program(&program, &abstractions)?;
            let bounds = Bounds::new(steps, buf);
            let picked = match model {
                ModelArg::Sc => pick_execution::<ScModel>(&p, bounds, index),
                ModelArg::Tso => pick_execution::<TsoModel>(&p, bounds, index),
            };
            let e = picked.ok_or_else(|| "no execution at that index".to_string())?;
            let tr = build_trace(&p, &e.steps, variant.into());
            Ok((EXIT_HOLDS, crate::dot::trace_to_dot(&p, &tr)))
        }
    }
}

/// Count executions and keep the first `limit` in enumeration order,
/// splitting the root subtrees across workers.
fn explore_sampled<M: crate::explore::Model>(
    p: &Program,
    bounds: Bounds,
    limit: usize,
    jobs: usize,
) -> (ExploreStats, Vec<Execution>) {
    let (roots, root_flags) = root_packets::<M>(p, bounds);
    let initial = M::initial(p);
    let root_yield = M::yieldable(&initial);
    let results = run_subtrees(roots.len(), jobs, |i| {
        let mut sample = Vec::new();
        let stats = explore_subtree::<M>(p, bounds, &roots[i], &mut |steps, _| {
            if sample.len() < limit {
                sample.push(Execution::new(steps.to_vec()));
            }
            Visit::Continue
        });
        (stats, sample)
    });
    let mut stats = ExploreStats {
        yielded: root_yield as u64,
        truncated: root_flags.cap_blocked,
        stuck: root_flags.stuck as u64,
        cut_nonempty: 0,
    };
    let mut sample = Vec::new();
    if root_yield {
        sample.push(Execution::default());
    }
    for (s, sub) in &results {
        stats.merge(s);
        for e in sub {
            if sample.len() < limit {
                sample.push(e.clone());
            }
        }
    }
    (stats, sample)
}

/// The `index`-th yielded execution, or the longest one (first among ties).
fn pick_execution<M: crate::explore::Model>(
    p: &Program,
    bounds: Bounds,
    index: Option<u64>,
) -> Option<Execution> {
    let mut picked: Option<Execution> = None;
    let mut at = 0u64;
    crate::explore::explore_all::<M>(p, bounds, &mut |steps, _| {
        match index {
            Some(want) => {
                if at == want {
                    picked = Some(Execution::new(steps.to_vec()));
                    return Visit::Stop;
                }
                at += 1;
            }
            None => {
                if picked.as_ref().is_none_or(|b| steps.len() > b.len()) {
                    picked = Some(Execution::new(steps.to_vec()));
                }
            }
        }
        Visit::Continue
    });
    picked
}
