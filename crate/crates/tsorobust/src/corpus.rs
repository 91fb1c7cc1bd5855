//! Bundled example programs and their expected verdicts.
//!
//! The programs live under `corpus/` next to this crate's manifest and are
//! also embedded, so library users can parse them without touching the file
//! system. `corpus_check` replays the fixture manifest (one CLI invocation
//! per line with its expected exit code) through the command dispatcher.

use std::path::PathBuf;

use crate::cli::{self, Cli};
use crate::lang::{parse_program, Program};

pub const MP: &str = include_str!("../corpus/mp.prog");
pub const SB: &str = include_str!("../corpus/sb.prog");
pub const WSQ: &str = include_str!("../corpus/wsq.prog");
pub const WSQ_ABS: &str = include_str!("../corpus/wsq_abs.prog");
pub const FIG6: &str = include_str!("../corpus/fig6.prog");
pub const FIG6_ABS: &str = include_str!("../corpus/fig6_abs.prog");
pub const MANIFEST: &str = include_str!("../corpus/manifest.txt");

pub const PROGRAMS: &[(&str, &str)] = &[
    ("mp.prog", MP),
    ("sb.prog", SB),
    ("wsq.prog", WSQ),
    ("wsq_abs.prog", WSQ_ABS),
    ("fig6.prog", FIG6),
    ("fig6_abs.prog", FIG6_ABS),
];

/// Parse one bundled program by file name.
pub fn load(name: &str) -> Program {
    let text = PROGRAMS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .unwrap_or_else(|| panic!("no bundled program named '{name}'"));
    parse_program(text).expect("bundled programs parse")
}

/// Directory holding the corpus files: `$TSOROBUST_CORPUS` when set,
/// otherwise the copy shipped with the crate sources.
pub fn corpus_dir() -> PathBuf {
    match std::env::var_os("TSOROBUST_CORPUS") {
        Some(dir) => PathBuf::from(dir),
        None => PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus"),
    }
}

#[derive(Debug, Clone)]
pub struct ManifestEntry {
    pub line: String,
    pub file: String,
    pub argv: Vec<String>,
    pub expected_exit: i32,
}

pub fn manifest_entries() -> Vec<ManifestEntry> {
    let dir = corpus_dir();
    let mut out = Vec::new();
    for raw in MANIFEST.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (cmdline, expect) = line
            .split_once("->")
            .unwrap_or_else(|| panic!("manifest line without expected exit: {line}"));
        let expected_exit: i32 = expect.trim().parse().expect("expected exit code");
        let mut words = cmdline.split_whitespace();
        let file = words.next().expect("manifest file").to_string();
        let command = words.next().expect("manifest command").to_string();
        let mut argv = vec![
            "tsorobust".to_string(),
            command,
            dir.join(&file).to_string_lossy().into_owned(),
        ];
        for w in words {
            // A bare .prog token is a second program path to resolve.
            if w.ends_with(".prog") {
                argv.push(dir.join(w).to_string_lossy().into_owned());
            } else {
                argv.push(w.to_string());
            }
        }
        out.push(ManifestEntry {
            line: line.to_string(),
            file,
            argv,
            expected_exit,
        });
    }
    out
}

#[derive(Debug)]
pub struct FixtureResult {
    pub entry: ManifestEntry,
    pub exit: i32,
    pub output: String,
    pub pass: bool,
}

/// Run every manifest fixture through the CLI dispatcher.
pub fn corpus_check() -> Vec<FixtureResult> {
    manifest_entries()
        .into_iter()
        .map(|entry| {
            let cli = <Cli as clap::Parser>::try_parse_from(&entry.argv)
                .unwrap_or_else(|e| panic!("manifest argv invalid ({}): {e}", entry.line));
            let (exit, output) = cli::run(cli);
            let pass = exit == entry.expected_exit;
            FixtureResult {
                entry,
                exit,
                output,
                pass,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_programs_parse_and_validate() {
        for (name, _) in PROGRAMS {
            let p = load(name);
            assert!(!p.threads.is_empty(), "{name}");
        }
    }

    #[test]
    fn manifest_references_bundled_programs() {
        for entry in manifest_entries() {
            assert!(
                PROGRAMS.iter().any(|(n, _)| *n == entry.file),
                "manifest names unknown program {}",
                entry.file
            );
        }
    }
}
