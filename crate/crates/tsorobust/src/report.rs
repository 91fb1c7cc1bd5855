//! Report structures shared by the CLI and the library: every analysis
//! result renders both as stable JSON and as plain text. Reports never embed
//! wall-clock data or worker counts, so identical invocations produce
//! identical bytes regardless of `--jobs`.

use std::fmt::Write;

use serde::Serialize;

use crate::exec::Execution;
use crate::explore::{Bounds, ExploreStats};
use crate::lang::{printer::instruction_text, InstrId, Program};
use crate::mover::{AtomicityReport, MoverWitness};
use crate::robust::{MemModel, RobustStatus, RobustnessVerdict, ValuationSet};
use crate::trace::TraceVariant;

#[derive(Serialize, Clone, Copy)]
pub struct JsonBounds {
    pub max_steps: u32,
    pub buf_cap: u32,
}

impl From<Bounds> for JsonBounds {
    fn from(b: Bounds) -> JsonBounds {
        JsonBounds {
            max_steps: b.max_steps,
            buf_cap: b.buf_cap,
        }
    }
}

fn instr_label(p: &Program, id: InstrId) -> String {
    format!(
        "{} ({})",
        p.instr_display(id),
        instruction_text(p, &p.instr(id).op)
    )
}

// ---------------------------------------------------------------------------
// robust
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct RobustReport {
    pub command: &'static str,
    pub program: String,
    pub variant: TraceVariant,
    pub bounds: JsonBounds,
    pub status: RobustStatus,
    /// Present on robust verdicts: whether bounds cut the exploration.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncated: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tso_executions: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
}

impl RobustReport {
    pub fn new(p: &Program, v: &RobustnessVerdict) -> RobustReport {
        RobustReport {
            command: "robust",
            program: p.name.clone(),
            variant: v.variant,
            bounds: v.bounds.into(),
            status: v.status,
            truncated: if v.status == RobustStatus::Robust {
                Some(v.truncated)
            } else {
                None
            },
            tso_executions: v.tso_executions,
            witness: v.witness.as_ref().map(|w| w.render(p)),
        }
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "program: {}", self.program);
        let _ = writeln!(out, "variant: {}", self.variant);
        let _ = writeln!(
            out,
            "bounds: steps={} buf={}",
            self.bounds.max_steps, self.bounds.buf_cap
        );
        match self.status {
            RobustStatus::Robust => {
                let _ = writeln!(out, "status: robust");
                if let Some(n) = self.tso_executions {
                    let _ = writeln!(out, "tso executions checked: {n}");
                }
                if self.truncated == Some(true) {
                    let _ = writeln!(
                        out,
                        "note: exploration truncated; verdict holds up to the bounds"
                    );
                }
            }
            RobustStatus::NotRobust => {
                let _ = writeln!(out, "status: not-robust");
                if let Some(w) = &self.witness {
                    let _ = writeln!(out, "witness ({} actions):", w.len());
                    for a in w {
                        let _ = writeln!(out, "  {a}");
                    }
                }
            }
            RobustStatus::Unknown => {
                let _ = writeln!(out, "status: unknown (bounds exhausted)");
            }
        }
        out
    }

    pub fn exit_code(&self) -> i32 {
        match self.status {
            RobustStatus::Robust => 0,
            RobustStatus::NotRobust => 1,
            RobustStatus::Unknown => 2,
        }
    }
}

// ---------------------------------------------------------------------------
// atomic
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct WitnessJson {
    pub actions: Vec<String>,
    pub failing_unit: usize,
}

fn witness_json(p: &Program, w: &MoverWitness) -> WitnessJson {
    WitnessJson {
        actions: w.execution.render(p),
        failing_unit: w.unit,
    }
}

#[derive(Serialize)]
pub struct MoverEntry {
    pub instruction: String,
    pub kind: &'static str,
    pub right_mover: bool,
    pub left_mover: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub right_refutation: Option<WitnessJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub left_refutation: Option<WitnessJson>,
}

#[derive(Serialize)]
pub struct WriteEntry {
    pub instruction: String,
    pub atomic: bool,
    pub via: crate::mover::AtomicVia,
    pub offending_reads: Vec<String>,
}

#[derive(Serialize)]
pub struct AtomicReport {
    pub command: &'static str,
    pub program: String,
    pub max_steps: u32,
    pub exhaustive: bool,
    pub program_atomic: bool,
    /// Atomic with exhaustive mover checks: certifies robustness.
    pub certified_robust: bool,
    pub writes: Vec<WriteEntry>,
    pub movers: Vec<MoverEntry>,
}

impl AtomicReport {
    pub fn new(p: &Program, max_steps: u32, r: &AtomicityReport) -> AtomicReport {
        AtomicReport {
            command: "atomic",
            program: p.name.clone(),
            max_steps,
            exhaustive: r.exhaustive,
            program_atomic: r.program_atomic,
            certified_robust: r.program_atomic && r.exhaustive,
            writes: r
                .writes
                .iter()
                .map(|w| WriteEntry {
                    instruction: instr_label(p, w.instr),
                    atomic: w.atomic,
                    via: w.via,
                    offending_reads: w.offending.iter().map(|r| instr_label(p, *r)).collect(),
                })
                .collect(),
            movers: r
                .movers
                .iter()
                .map(|c| MoverEntry {
                    instruction: instr_label(p, c.instr),
                    kind: c.kind(),
                    right_mover: c.right_mover,
                    left_mover: c.left_mover,
                    right_refutation: c.right_witness.as_ref().map(|w| witness_json(p, w)),
                    left_refutation: c.left_witness.as_ref().map(|w| witness_json(p, w)),
                })
                .collect(),
        }
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "program: {}", self.program);
        let _ = writeln!(out, "bounds: steps={}", self.max_steps);
        let _ = writeln!(
            out,
            "mover checks exhaustive: {}",
            if self.exhaustive {
                "yes"
            } else {
                "no (bounded)"
            }
        );
        let _ = writeln!(
            out,
            "write atomic: {}{}",
            if self.program_atomic { "yes" } else { "no" },
            if self.certified_robust {
                " (certifies robustness)"
            } else {
                ""
            }
        );
        for w in &self.writes {
            let via = match w.via {
                crate::mover::AtomicVia::LeftMover => "left mover",
                crate::mover::AtomicVia::AllReadsRightMover => {
                    "all buffer-free reachable reads move right"
                }
                crate::mover::AtomicVia::NotAtomic => "NOT ATOMIC",
            };
            let _ = writeln!(out, "  write {}: {via}", w.instruction);
            for r in &w.offending_reads {
                let _ = writeln!(out, "    offending read: {r}");
            }
        }
        let _ = writeln!(out, "movers:");
        for m in &self.movers {
            let _ = writeln!(out, "  {}: {}", m.instruction, m.kind);
        }
        out
    }

    pub fn exit_code(&self) -> i32 {
        if self.program_atomic {
            0
        } else {
            1
        }
    }
}

// ---------------------------------------------------------------------------
// explore
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct ExploreReport {
    pub command: &'static str,
    pub program: String,
    pub model: MemModel,
    pub bounds: JsonBounds,
    pub executions: u64,
    pub truncated: bool,
    pub stuck: u64,
    pub sample: Vec<Vec<String>>,
}

impl ExploreReport {
    pub fn new(
        p: &Program,
        model: MemModel,
        bounds: Bounds,
        stats: &ExploreStats,
        sample: &[Execution],
    ) -> ExploreReport {
        ExploreReport {
            command: "explore",
            program: p.name.clone(),
            model,
            bounds: bounds.into(),
            executions: stats.yielded,
            truncated: stats.truncated,
            stuck: stats.stuck,
            sample: sample.iter().map(|e| e.render(p)).collect(),
        }
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "program: {}", self.program);
        let _ = writeln!(out, "model: {}", self.model);
        let _ = writeln!(
            out,
            "bounds: steps={} buf={}",
            self.bounds.max_steps, self.bounds.buf_cap
        );
        let _ = writeln!(out, "executions: {}", self.executions);
        let _ = writeln!(out, "truncated: {}", self.truncated);
        if self.stuck > 0 {
            let _ = writeln!(out, "stuck (array index out of range): {}", self.stuck);
        }
        let _ = writeln!(out, "sample ({} shown):", self.sample.len());
        for (i, e) in self.sample.iter().enumerate() {
            if e.is_empty() {
                let _ = writeln!(out, "  {i}: (empty)");
            } else {
                let _ = writeln!(out, "  {i}: {}", e.join(" "));
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// compare-states
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct StateSetInfo {
    pub valuations: usize,
    pub complete: bool,
    pub states: u64,
    pub stuck: u64,
}

fn set_info(v: &ValuationSet) -> StateSetInfo {
    StateSetInfo {
        valuations: v.set.len(),
        complete: v.complete,
        states: v.states,
        stuck: v.stuck,
    }
}

#[derive(Serialize)]
pub struct CompareModelsReport {
    pub command: &'static str,
    pub program: String,
    pub bounds: JsonBounds,
    pub sc: StateSetInfo,
    pub tso: StateSetInfo,
    pub equal: bool,
    pub tso_only: Vec<String>,
    pub sc_only: Vec<String>,
}

impl CompareModelsReport {
    pub fn new(
        p: &Program,
        bounds: Bounds,
        sc: &ValuationSet,
        tso: &ValuationSet,
    ) -> CompareModelsReport {
        let render = |v: &Vec<i64>| crate::robust::render_valuation(p, v);
        CompareModelsReport {
            command: "compare-states",
            program: p.name.clone(),
            bounds: bounds.into(),
            sc: set_info(sc),
            tso: set_info(tso),
            equal: sc.set == tso.set,
            tso_only: tso.set.difference(&sc.set).map(render).collect(),
            sc_only: sc.set.difference(&tso.set).map(render).collect(),
        }
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "program: {}", self.program);
        let _ = writeln!(
            out,
            "bounds: steps={} buf={}",
            self.bounds.max_steps, self.bounds.buf_cap
        );
        let _ = writeln!(
            out,
            "sc:  {} valuations ({} states, complete={})",
            self.sc.valuations, self.sc.states, self.sc.complete
        );
        let _ = writeln!(
            out,
            "tso: {} valuations ({} states, complete={})",
            self.tso.valuations, self.tso.states, self.tso.complete
        );
        if self.sc.stuck + self.tso.stuck > 0 {
            let _ = writeln!(
                out,
                "stuck (array index out of range): sc={} tso={}",
                self.sc.stuck, self.tso.stuck
            );
        }
        let _ = writeln!(out, "equal: {}", self.equal);
        for v in &self.tso_only {
            let _ = writeln!(out, "  tso-only: {v}");
        }
        for v in &self.sc_only {
            let _ = writeln!(out, "  sc-only: {v}");
        }
        out
    }

    pub fn exit_code(&self) -> i32 {
        if self.equal {
            0
        } else {
            1
        }
    }
}

#[derive(Serialize)]
pub struct ComparePrograms {
    pub command: &'static str,
    pub program: String,
    pub other: String,
    pub bounds: JsonBounds,
    pub sc_subset: bool,
    pub tso_subset: bool,
    pub sc_equal: bool,
    pub tso_equal: bool,
}

impl ComparePrograms {
    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "programs: {} vs {}", self.program, self.other);
        let _ = writeln!(
            out,
            "bounds: steps={} buf={}",
            self.bounds.max_steps, self.bounds.buf_cap
        );
        let _ = writeln!(
            out,
            "sc:  {} subset of {}: {} (equal: {})",
            self.program, self.other, self.sc_subset, self.sc_equal
        );
        let _ = writeln!(
            out,
            "tso: {} subset of {}: {} (equal: {})",
            self.program, self.other, self.tso_subset, self.tso_equal
        );
        out
    }

    pub fn exit_code(&self) -> i32 {
        if self.sc_subset && self.tso_subset {
            0
        } else {
            1
        }
    }
}
