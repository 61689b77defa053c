use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{score_run, EvalReport, Outcome};
use crate::error::{LraError, Result};
use crate::pair::WordPair;
use crate::similarity::RelationalMeasure;

const LETTERS: [char; 5] = ['a', 'b', 'c', 'd', 'e'];

/// A five-choice analogy question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalogyQuestion {
    pub stem: WordPair,
    pub choices: Vec<WordPair>,
    /// Zero-based index of the correct choice.
    pub answer: usize,
}

impl AnalogyQuestion {
    pub fn new(stem: WordPair, choices: Vec<WordPair>, answer: usize) -> Result<Self> {
        if choices.len() != 5 {
            return Err(LraError::InvalidParameter(format!(
                "a question needs exactly 5 choices, got {}",
                choices.len()
            )));
        }
        if answer >= 5 {
            return Err(LraError::InvalidParameter(format!(
                "answer index {answer} out of range"
            )));
        }
        Ok(AnalogyQuestion { stem, choices, answer })
    }

    /// Every pair the question mentions, stem first.
    pub fn pairs(&self) -> impl Iterator<Item = &WordPair> {
        std::iter::once(&self.stem).chain(&self.choices)
    }
}

pub fn letter(index: usize) -> char {
    LETTERS[index]
}

/// Parses blocks of seven lines: the stem pair, five choice pairs and the
/// answer letter. Lines starting with `#` and blank lines are ignored. A
/// pair line may carry trailing fields after whitespace, which are ignored.
pub fn parse_questions(text: &str, source_name: &str) -> Result<Vec<AnalogyQuestion>> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let mut out = Vec::new();
    for block in lines.chunks(7) {
        if block.len() < 7 {
            return Err(LraError::parse(
                source_name,
                block[0].0,
                format!("incomplete question: {} of 7 lines", block.len()),
            ));
        }
        let pair_at = |&(n, line): &(usize, &str)| -> Result<WordPair> {
            let field = line.split_whitespace().next().unwrap_or("");
            field
                .parse()
                .map_err(|e: LraError| LraError::parse(source_name, n, e.to_string()))
        };
        let stem = pair_at(&block[0])?;
        let choices = block[1..6].iter().map(pair_at).collect::<Result<Vec<_>>>()?;
        let (n, ans) = block[6];
        let ans = ans.trim_matches(|c| c == '(' || c == ')').to_lowercase();
        let answer = match ans.chars().collect::<Vec<_>>()[..] {
            [c] => LETTERS.iter().position(|&l| l == c),
            _ => None,
        }
        .ok_or_else(|| LraError::parse(source_name, n, format!("expected an answer letter a-e, found `{ans}`")))?;
        out.push(AnalogyQuestion { stem, choices, answer });
    }
    Ok(out)
}

pub fn load_questions(path: &Path) -> Result<Vec<AnalogyQuestion>> {
    let text = std::fs::read_to_string(path).map_err(|e| LraError::io(path, e))?;
    parse_questions(&text, &path.display().to_string())
}

/// Writes questions in the format read by [`parse_questions`].
pub fn format_questions(questions: &[AnalogyQuestion]) -> String {
    let mut out = String::new();
    for q in questions {
        let _ = writeln!(out, "{}", q.stem);
        for c in &q.choices {
            let _ = writeln!(out, "{c}");
        }
        let _ = writeln!(out, "{}\n", letter(q.answer));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Answer {
    /// Chosen index, `None` when skipped.
    pub guess: Option<usize>,
    /// Similarity of the stem to each choice.
    pub scores: Vec<Option<f64>>,
    /// Another choice had the same winning score.
    pub tie: bool,
}

/// Picks the choice most similar to the stem; ties go to the earliest
/// choice and are flagged. Skips when no choice can be scored.
pub fn solve_question(q: &AnalogyQuestion, measure: &dyn RelationalMeasure) -> Answer {
    let scores: Vec<Option<f64>> = q.choices.iter().map(|c| measure.similarity(&q.stem, c)).collect();
    pick(scores)
}

pub(crate) fn pick(scores: Vec<Option<f64>>) -> Answer {
    let mut guess: Option<usize> = None;
    for (i, s) in scores.iter().enumerate() {
        if let Some(s) = s {
            if guess.is_none_or(|g| *s > scores[g].unwrap_or(f64::NEG_INFINITY)) {
                guess = Some(i);
            }
        }
    }
    let tie = guess.is_some_and(|g| scores.iter().enumerate().any(|(i, s)| i != g && *s == scores[g]));
    Answer { guess, scores, tie }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionResult {
    pub stem: WordPair,
    pub answer: usize,
    #[serde(flatten)]
    pub result: Answer,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatRun {
    pub report: EvalReport,
    pub questions: Vec<QuestionResult>,
}

fn outcome(answer: &Answer, truth: usize) -> Outcome {
    match answer.guess {
        None => Outcome::Skipped,
        Some(g) if g == truth => Outcome::Correct,
        Some(_) => Outcome::Incorrect,
    }
}

/// Answers every question (in parallel) and scores the run.
pub fn solve_all(questions: &[AnalogyQuestion], measure: &dyn RelationalMeasure) -> SatRun {
    let answers: Vec<Answer> = questions.par_iter().map(|q| solve_question(q, measure)).collect();
    finish(questions, answers)
}

/// Scores a run from precomputed answers, one per question.
pub fn finish(questions: &[AnalogyQuestion], answers: Vec<Answer>) -> SatRun {
    let results: Vec<QuestionResult> = questions
        .iter()
        .zip(answers)
        .map(|(q, a)| QuestionResult {
            stem: q.stem.clone(),
            answer: q.answer,
            outcome: outcome(&a, q.answer),
            result: a,
        })
        .collect();
    let mut report = score_run(&results.iter().map(|r| r.outcome).collect::<Vec<_>>());
    report.ties = results.iter().filter(|r| r.result.tie).count();
    SatRun {
        report,
        questions: results,
    }
}
