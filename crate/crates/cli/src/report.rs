//! Rendering and writing of reports.
//!
//! Every report is written twice: as text for people and as JSON for
//! scripts. Reports hold results only. Wall times and cache status vary
//! from run to run, so they go to a separate timings file; two runs with
//! the same inputs therefore produce byte-identical reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Result;
use lra::eval::sat::{letter, SatRun};
use lra::eval::EvalReport;
use lra::similarity::Combination;
use serde::Serialize;

use crate::store::StageInfo;

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Prints `text` and, with a prefix, writes `<prefix>.txt` and
/// `<prefix>.json`.
pub fn emit<T: Serialize>(prefix: Option<&Path>, text: &str, data: &T) -> Result<()> {
    print!("{text}");
    if let Some(prefix) = prefix {
        lra::cache::write_atomic(&with_suffix(prefix, ".txt"), text.as_bytes())?;
        let mut json = serde_json::to_string_pretty(data)?;
        json.push('\n');
        lra::cache::write_atomic(&with_suffix(prefix, ".json"), json.as_bytes())?;
    }
    Ok(())
}

/// Writes an auxiliary file `<prefix><suffix>` when a prefix is set.
pub fn emit_extra(prefix: Option<&Path>, suffix: &str, text: &str) -> Result<Option<PathBuf>> {
    match prefix {
        Some(prefix) => {
            let path = with_suffix(prefix, suffix);
            lra::cache::write_atomic(&path, text.as_bytes())?;
            Ok(Some(path))
        }
        None => Ok(None),
    }
}

pub fn percent(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.1}"))
}

/// Summary line plus, for classification, the per-class table (classes
/// that never occur and are never predicted are left out).
pub fn eval_text(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", report.summary());
    let _ = writeln!(out, "accuracy {:.1}, ties {}", report.accuracy(), report.ties);
    if let Some(m) = &report.macro_average {
        let _ = writeln!(
            out,
            "macro average: P {:.1} R {:.1} F {:.1}",
            m.precision, m.recall, m.f
        );
        let _ = writeln!(
            out,
            "{:<14} {:>7} {:>9} {:>7} {:>6} {:>6} {:>6}",
            "class", "support", "predicted", "correct", "P", "R", "F"
        );
        for c in report.per_class.iter().filter(|c| c.support > 0 || c.predicted > 0) {
            let _ = writeln!(
                out,
                "{:<14} {:>7} {:>9} {:>7} {:>6} {:>6} {:>6.1}",
                c.label,
                c.support,
                c.predicted,
                c.correct,
                percent(c.precision),
                percent(c.recall),
                c.f
            );
        }
    }
    out
}

fn score(s: Option<f64>) -> String {
    s.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

/// One line per question: guess, answer, outcome and the five scores.
pub fn sat_text(title: &str, run: &SatRun) -> String {
    let mut out = format!("{title}\n{}", eval_text(&run.report));
    for (i, q) in run.questions.iter().enumerate() {
        let scores: Vec<String> = q.result.scores.iter().map(|&s| score(s)).collect();
        let _ = writeln!(
            out,
            "{:>4} {:<24} guess {} answer {} {:?}{} [{}]",
            i + 1,
            q.stem.to_string(),
            q.result.guess.map_or('-', letter),
            letter(q.answer),
            q.outcome,
            if q.result.tie { " (tie)" } else { "" },
            scores.join(" ")
        );
    }
    out
}

/// The cosines behind one stem and choice comparison.
#[derive(Debug, Clone, Serialize)]
pub struct PairingLog {
    pub question: usize,
    pub choice: char,
    pub similarity: Option<f64>,
    pub combinations: Vec<Combination>,
}

pub fn pairing_text(entries: &[PairingLog]) -> String {
    let mut out = String::new();
    for e in entries {
        let _ = writeln!(
            out,
            "question {} choice {}: similarity {}",
            e.question,
            e.choice,
            score(e.similarity)
        );
        for c in &e.combinations {
            let _ = writeln!(
                out,
                "  {:<24} {:<24} {:.4}{}",
                c.left.to_string(),
                c.right.to_string(),
                c.cosine,
                if c.is_original { "  original" } else { "" }
            );
        }
    }
    out
}

pub fn stages_text(stages: &[StageInfo], timings: &[(String, f64)]) -> String {
    let mut out = String::new();
    for s in stages {
        let _ = writeln!(
            out,
            "stage {:<9} {:>9.3}s {}  {}",
            s.name,
            s.seconds,
            if s.cached { "cached  " } else { "computed" },
            &s.key[..12.min(s.key.len())]
        );
    }
    for (name, secs) in timings {
        let _ = writeln!(out, "  step {name:<11} {secs:>9.3}s");
    }
    out
}
