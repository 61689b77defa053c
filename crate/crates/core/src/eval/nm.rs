use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{class_metrics, score_run, EvalReport, Outcome};
use crate::error::{LraError, Result};
use crate::pair::WordPair;
use crate::similarity::RelationalMeasure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationGroup {
    Causality,
    Temporality,
    Spatial,
    Participant,
    Quality,
}

impl RelationGroup {
    pub const ALL: [RelationGroup; 5] = [
        RelationGroup::Causality,
        RelationGroup::Temporality,
        RelationGroup::Spatial,
        RelationGroup::Participant,
        RelationGroup::Quality,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelationGroup::Causality => "causality",
            RelationGroup::Temporality => "temporality",
            RelationGroup::Spatial => "spatial",
            RelationGroup::Participant => "participant",
            RelationGroup::Quality => "quality",
        }
    }
}

use RelationGroup::*;

/// `(abbreviation, name, group)` for the thirty relation classes.
pub const CLASSES: [(&str, &str, RelationGroup); 30] = [
    ("cs", "cause", Causality),
    ("eff", "effect", Causality),
    ("prp", "purpose", Causality),
    ("detr", "detraction", Causality),
    ("freq", "frequency", Temporality),
    ("tat", "time at", Temporality),
    ("tthr", "time through", Temporality),
    ("dir", "direction", Spatial),
    ("loc", "location", Spatial),
    ("lat", "location at", Spatial),
    ("lfr", "location from", Spatial),
    ("ag", "agent", Participant),
    ("ben", "beneficiary", Participant),
    ("inst", "instrument", Participant),
    ("obj", "object", Participant),
    ("obj_prop", "object property", Participant),
    ("part", "part", Participant),
    ("posr", "possessor", Participant),
    ("prop", "property", Participant),
    ("prod", "product", Participant),
    ("src", "source", Participant),
    ("st", "stative", Participant),
    ("whl", "whole", Participant),
    ("cntr", "container", Quality),
    ("cont", "content", Quality),
    ("eq", "equative", Quality),
    ("mat", "material", Quality),
    ("meas", "measure", Quality),
    ("top", "topic", Quality),
    ("type", "type", Quality),
];

/// Resolves an abbreviation or a full class name (spaces or underscores)
/// to the class abbreviation.
pub fn class_abbreviation(label: &str) -> Result<&'static str> {
    let l = label.trim().to_lowercase();
    CLASSES
        .iter()
        .find(|(abbr, name, _)| *abbr == l || name.replace(' ', "_") == l.replace(' ', "_"))
        .map(|c| c.0)
        .ok_or_else(|| LraError::UnknownClass(label.trim().to_string()))
}

/// The group a class belongs to.
pub fn collapse_class(label: &str) -> Result<RelationGroup> {
    let abbr = class_abbreviation(label)?;
    Ok(CLASSES
        .iter()
        .find(|c| c.0 == abbr)
        .map(|c| c.2)
        .expect("abbreviation is listed"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    Thirty,
    Five,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NounModifierExample {
    pub modifier: String,
    pub head: String,
    /// Class abbreviation.
    pub class30: String,
    pub class5: RelationGroup,
}

impl NounModifierExample {
    pub fn new(modifier: &str, head: &str, class: &str) -> Result<Self> {
        let class30 = class_abbreviation(class)?.to_string();
        let class5 = collapse_class(&class30)?;
        WordPair::new(modifier, head)?;
        Ok(NounModifierExample {
            modifier: modifier.trim().to_lowercase(),
            head: head.trim().to_lowercase(),
            class30,
            class5,
        })
    }

    pub fn pair(&self) -> WordPair {
        WordPair::new(&self.modifier, &self.head).expect("validated on construction")
    }

    pub fn label(&self, scheme: Scheme) -> &str {
        match scheme {
            Scheme::Thirty => &self.class30,
            Scheme::Five => self.class5.name(),
        }
    }
}

/// Parses `modifier,head,class` records after a header line. Lines
/// starting with `#` are comments.
pub fn parse_examples(text: &str, source_name: &str) -> Result<Vec<NounModifierExample>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            LraError::parse(source_name, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != 3 {
            return Err(LraError::parse(
                source_name,
                line,
                format!("expected 3 fields, found {}", record.len()),
            ));
        }
        let ex = NounModifierExample::new(&record[0], &record[1], &record[2])
            .map_err(|e| LraError::parse(source_name, line, e.to_string()))?;
        out.push(ex);
    }
    Ok(out)
}

pub fn load_examples(path: &Path) -> Result<Vec<NounModifierExample>> {
    let text = std::fs::read_to_string(path).map_err(|e| LraError::io(path, e))?;
    parse_examples(&text, &path.display().to_string())
}

pub fn format_examples(examples: &[NounModifierExample]) -> String {
    let mut out = String::from("modifier,head,class\n");
    for e in examples {
        out.push_str(&format!("{},{},{}\n", e.modifier, e.head, e.class30));
    }
    out
}

fn labels(scheme: Scheme) -> Vec<&'static str> {
    match scheme {
        Scheme::Thirty => CLASSES.iter().map(|c| c.0).collect(),
        Scheme::Five => RelationGroup::ALL.iter().map(|g| g.name()).collect(),
    }
}

/// Nearest neighbour of each example, `None` when nothing is comparable.
pub type Neighbours = Vec<Option<usize>>;

fn nearest(scores: impl Iterator<Item = (usize, Option<f64>)>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, s) in scores {
        if let Some(s) = s {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((j, s));
            }
        }
    }
    best.map(|b| b.0)
}

/// Leave-one-out nearest neighbours by exhaustive search; ties go to the
/// earliest example.
pub fn nearest_neighbours(examples: &[NounModifierExample], measure: &dyn RelationalMeasure) -> Neighbours {
    let pairs: Vec<WordPair> = examples.iter().map(|e| e.pair()).collect();
    (0..pairs.len())
        .into_par_iter()
        .map(|i| {
            nearest(
                (0..pairs.len())
                    .filter(|&j| j != i)
                    .map(|j| (j, measure.similarity(&pairs[i], &pairs[j]))),
            )
        })
        .collect()
}

/// Two-stage search: the `shortlist` best candidates under the cheap
/// measure, then the full measure on those only. An example the cheap
/// measure cannot score at all (say, its own row is empty) falls back to
/// exhaustive search under the full measure.
pub fn nearest_neighbours_two_stage(
    examples: &[NounModifierExample],
    cheap: &dyn RelationalMeasure,
    full: &dyn RelationalMeasure,
    shortlist: usize,
) -> Neighbours {
    let pairs: Vec<WordPair> = examples.iter().map(|e| e.pair()).collect();
    (0..pairs.len())
        .into_par_iter()
        .map(|i| {
            let mut ranked: Vec<(usize, f64)> = (0..pairs.len())
                .filter(|&j| j != i)
                .filter_map(|j| cheap.similarity(&pairs[i], &pairs[j]).map(|s| (j, s)))
                .collect();
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            if ranked.is_empty() {
                return nearest(
                    (0..pairs.len())
                        .filter(|&j| j != i)
                        .map(|j| (j, full.similarity(&pairs[i], &pairs[j]))),
                );
            }
            ranked.truncate(shortlist);
            ranked.sort_by_key(|r| r.0);
            nearest(ranked.iter().map(|&(j, _)| (j, full.similarity(&pairs[i], &pairs[j]))))
        })
        .collect()
}

/// Fraction of examples on which two neighbour lists agree.
pub fn agreement(a: &Neighbours, b: &Neighbours) -> f64 {
    if a.is_empty() {
        return 1.0;
    }
    a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / a.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub scheme: Scheme,
    pub report: EvalReport,
    pub predictions: Vec<Option<String>>,
}

/// Scores predicted labels against the examples under one scheme.
pub fn score_predictions(
    examples: &[NounModifierExample],
    predicted: &[Option<&str>],
    scheme: Scheme,
) -> Classification {
    let truth: Vec<&str> = examples.iter().map(|e| e.label(scheme)).collect();
    let outcomes: Vec<Outcome> = truth
        .iter()
        .zip(predicted)
        .map(|(t, p)| match p {
            None => Outcome::Skipped,
            Some(p) if p == t => Outcome::Correct,
            Some(_) => Outcome::Incorrect,
        })
        .collect();
    let mut report = score_run(&outcomes);
    let (per_class, macro_average) = class_metrics(&labels(scheme), &truth, predicted);
    report.per_class = per_class;
    report.macro_average = Some(macro_average);
    Classification {
        scheme,
        report,
        predictions: predicted.iter().map(|p| p.map(str::to_string)).collect(),
    }
}

/// Predicts each example's class as its neighbour's class.
pub fn classify(examples: &[NounModifierExample], neighbours: &Neighbours, scheme: Scheme) -> Classification {
    let predicted: Vec<Option<&str>> = neighbours
        .iter()
        .map(|n| n.map(|j| examples[j].label(scheme)))
        .collect();
    score_predictions(examples, &predicted, scheme)
}

/// Leave-one-out single nearest neighbour classification.
pub fn knn_classify(
    examples: &[NounModifierExample],
    measure: &dyn RelationalMeasure,
    scheme: Scheme,
) -> Result<Classification> {
    if examples.len() < 2 {
        return Err(LraError::InvalidParameter(
            "classification needs at least two examples".into(),
        ));
    }
    Ok(classify(examples, &nearest_neighbours(examples, measure), scheme))
}

/// Predicts the most frequent class for everything (earliest on ties).
pub fn majority_baseline(examples: &[NounModifierExample], scheme: Scheme) -> Classification {
    let mut counts: Vec<(&str, usize)> = Vec::new();
    for e in examples {
        let l = e.label(scheme);
        match counts.iter_mut().find(|c| c.0 == l) {
            Some(c) => c.1 += 1,
            None => counts.push((l, 1)),
        }
    }
    let top = counts.iter().fold(None::<(&str, usize)>, |best, &c| match best {
        Some(b) if b.1 >= c.1 => Some(b),
        _ => Some(c),
    });
    let predicted = vec![top.map(|t| t.0); examples.len()];
    score_predictions(examples, &predicted, scheme)
}
