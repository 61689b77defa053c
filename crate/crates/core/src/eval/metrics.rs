use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Correct,
    Incorrect,
    Skipped,
}

/// Precision, recall and F of one class, in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    /// Examples whose true class this is.
    pub support: usize,
    /// Examples predicted as this class.
    pub predicted: usize,
    pub correct: usize,
    /// Absent when nothing was predicted as this class.
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

/// Counts and percentages of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub correct: usize,
    pub incorrect: usize,
    pub skipped: usize,
    /// Absent when no guesses were made.
    pub precision: Option<f64>,
    /// Equal to percent correct.
    pub recall: f64,
    pub f: Option<f64>,
    /// Guesses decided by a tie.
    pub ties: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_class: Vec<ClassMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub macro_average: Option<MacroMetrics>,
}

pub(crate) fn f_measure(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn percent(n: usize, d: usize) -> Option<f64> {
    (d > 0).then(|| 100.0 * n as f64 / d as f64)
}

impl EvalReport {
    pub fn total(&self) -> usize {
        self.correct + self.incorrect + self.skipped
    }

    /// Percent correct over all items; the same as recall.
    pub fn accuracy(&self) -> f64 {
        self.recall
    }

    /// One-line summary, e.g. `correct 210, incorrect 160, skipped 4; P 56.8 R 56.1 F 56.5`.
    pub fn summary(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.1}"));
        format!(
            "correct {}, incorrect {}, skipped {}; P {} R {:.1} F {}",
            self.correct,
            self.incorrect,
            self.skipped,
            fmt(self.precision),
            self.recall,
            fmt(self.f)
        )
    }
}

/// Applies precision = correct / guesses, recall = correct / all,
/// F = harmonic mean.
pub fn score_run(outcomes: &[Outcome]) -> EvalReport {
    let count = |o: Outcome| outcomes.iter().filter(|&&x| x == o).count();
    let (correct, incorrect, skipped) = (
        count(Outcome::Correct),
        count(Outcome::Incorrect),
        count(Outcome::Skipped),
    );
    let precision = percent(correct, correct + incorrect);
    let recall = percent(correct, correct + incorrect + skipped).unwrap_or(0.0);
    EvalReport {
        correct,
        incorrect,
        skipped,
        precision,
        recall,
        f: precision.map(|p| f_measure(p, recall)),
        ties: 0,
        per_class: Vec::new(),
        macro_average: None,
    }
}

/// Per-class and macro-averaged metrics over `labels` (in that order).
/// A prediction of `None` is a skip. Undefined per-class precision counts
/// as 0 in the macro average.
pub fn class_metrics(labels: &[&str], truth: &[&str], predicted: &[Option<&str>]) -> (Vec<ClassMetrics>, MacroMetrics) {
    let per_class: Vec<ClassMetrics> = labels
        .iter()
        .map(|&label| {
            let support = truth.iter().filter(|&&t| t == label).count();
            let guessed = predicted.iter().filter(|p| **p == Some(label)).count();
            let correct = truth
                .iter()
                .zip(predicted)
                .filter(|(t, p)| **t == label && **p == Some(label))
                .count();
            let precision = percent(correct, guessed);
            let recall = percent(correct, support);
            ClassMetrics {
                label: label.to_string(),
                support,
                predicted: guessed,
                correct,
                precision,
                recall,
                f: f_measure(precision.unwrap_or(0.0), recall.unwrap_or(0.0)),
            }
        })
        .collect();
    let present: Vec<&ClassMetrics> = per_class.iter().filter(|c| c.support > 0).collect();
    let n = present.len().max(1) as f64;
    let macro_average = MacroMetrics {
        precision: present.iter().map(|c| c.precision.unwrap_or(0.0)).sum::<f64>() / n,
        recall: present.iter().map(|c| c.recall.unwrap_or(0.0)).sum::<f64>() / n,
        f: present.iter().map(|c| c.f).sum::<f64>() / n,
    };
    (per_class, macro_average)
}
