//! The whole pipeline from input pairs to a relational similarity measure.
//!
//! The stages are exposed separately so a caller can cache each result:
//! [`build_families`], [`build_weighted_matrix`], [`build_space`].

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alternates::{filter_alternates, find_alternates};
use crate::corpus::Corpus;
use crate::error::{LraError, Result};
use crate::harvest::{harvest_directed_patterns, harvest_patterns, PhraseTable};
use crate::linalg::SvdOptions;
use crate::matrix::{build_directed_matrix, build_matrix, PairPatternMatrix};
use crate::pair::{Direction, PairFamily, WordPair};
use crate::projection::ProjectedSpace;
use crate::similarity::{
    evaluate_combinations, original_cosine, relational_similarity, AlternateMode, Combination, RelationalMeasure,
};
use crate::thesaurus::Thesaurus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LraParams {
    /// Thesaurus neighbours tried per pair member.
    pub num_sim: usize,
    /// Longest phrase, counting both pair members.
    pub max_phrase: usize,
    /// Alternates kept per pair.
    pub num_filter: usize,
    /// Undirected patterns kept; the matrix has twice as many columns.
    pub num_patterns: usize,
    /// SVD dimensions.
    pub k: usize,
}

impl Default for LraParams {
    fn default() -> Self {
        LraParams {
            num_sim: 10,
            max_phrase: 5,
            num_filter: 3,
            num_patterns: 4000,
            k: 300,
        }
    }
}

impl LraParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("num_sim", self.num_sim),
            ("num_patterns", self.num_patterns),
            ("k", self.k),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(LraError::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if self.max_phrase < 3 {
            return Err(LraError::InvalidParameter(format!(
                "max_phrase must be at least 3, got {}",
                self.max_phrase
            )));
        }
        Ok(())
    }
}

/// Switches for the ablation experiments. The default is full LRA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Variant {
    pub svd: bool,
    pub synonyms: bool,
    pub symmetry: bool,
    pub alternates: AlternateMode,
    /// Keep only the `n` largest values of each reconstructed row.
    pub top_n: Option<usize>,
}

impl Default for Variant {
    fn default() -> Self {
        Variant {
            svd: true,
            synonyms: true,
            symmetry: true,
            alternates: AlternateMode::Better,
            top_n: None,
        }
    }
}

impl Variant {
    pub fn validate(&self) -> Result<()> {
        match self.top_n {
            Some(0) => Err(LraError::Config("top_n must be positive".into())),
            Some(_) if !self.svd => Err(LraError::Config(
                "top_n truncates the SVD reconstruction and needs svd enabled".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Short label such as `full` or `no-svd,no-synonyms`.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if !self.svd {
            parts.push("no-svd".to_string());
        }
        if !self.synonyms {
            parts.push("no-synonyms".to_string());
        }
        if !self.symmetry {
            parts.push("no-symmetry".to_string());
        }
        if self.alternates == AlternateMode::All {
            parts.push("all-alternates".to_string());
        }
        if let Some(n) = self.top_n {
            parts.push(format!("top-{n}"));
        }
        if parts.is_empty() {
            "full".into()
        } else {
            parts.join(",")
        }
    }
}

/// Alternate families keyed by the canonical orientation of the original.
/// A family for `B:A` is always the reversal of the family for `A:B`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "StoredFamilies", into = "StoredFamilies")]
pub struct FamilySet {
    families: Vec<PairFamily>,
    /// The input pairs in the orientation they were given.
    requested: Vec<WordPair>,
    index: HashMap<WordPair, usize>,
}

#[derive(Serialize, Deserialize)]
struct StoredFamilies {
    families: Vec<PairFamily>,
    requested: Vec<WordPair>,
}

impl From<StoredFamilies> for FamilySet {
    fn from(s: StoredFamilies) -> Self {
        FamilySet::with_requested(s.families, s.requested)
    }
}

impl From<FamilySet> for StoredFamilies {
    fn from(set: FamilySet) -> Self {
        StoredFamilies {
            families: set.families,
            requested: set.requested,
        }
    }
}

impl FamilySet {
    /// Families whose originals are also the requested orientations.
    pub fn new(families: Vec<PairFamily>) -> Self {
        let requested = families.iter().map(|f| f.original.clone()).collect();
        Self::with_requested(families, requested)
    }

    pub fn with_requested(families: Vec<PairFamily>, requested: Vec<WordPair>) -> Self {
        let index = families
            .iter()
            .enumerate()
            .map(|(i, f)| (f.original.canonical().0, i))
            .collect();
        FamilySet {
            families,
            requested,
            index,
        }
    }

    /// The families in the orientations the pairs were requested in.
    pub fn oriented(&self) -> Vec<PairFamily> {
        self.requested.iter().map(|p| self.family(p)).collect()
    }

    pub fn families(&self) -> &[PairFamily] {
        &self.families
    }

    pub fn len(&self) -> usize {
        self.families.len()
    }

    pub fn is_empty(&self) -> bool {
        self.families.is_empty()
    }

    /// The family of `pair` in the orientation asked for; a bare singleton
    /// for pairs that were not part of the build.
    pub fn family(&self, pair: &WordPair) -> PairFamily {
        let (key, dir) = pair.canonical();
        match self.index.get(&key) {
            Some(&i) if dir == Direction::Forward => self.families[i].clone(),
            Some(&i) => self.families[i].reversed(),
            None => PairFamily::singleton(pair.clone()),
        }
    }

    /// Every distinct family member, in family order.
    pub fn members(&self) -> Vec<WordPair> {
        let mut seen = std::collections::HashSet::new();
        self.families
            .iter()
            .flat_map(|f| f.versions())
            .filter(|p| seen.insert((*p).clone()))
            .cloned()
            .collect()
    }
}

/// Steps 1 and 2: alternates from the thesaurus, filtered by corpus
/// frequency. Each family is built in canonical orientation.
pub fn build_families(
    corpus: &Corpus,
    thesaurus: Option<&Thesaurus>,
    pairs: &[WordPair],
    params: &LraParams,
) -> FamilySet {
    let mut keys: Vec<WordPair> = Vec::new();
    let mut requested: Vec<WordPair> = Vec::new();
    let (mut seen_keys, mut seen_pairs) = (std::collections::HashSet::new(), std::collections::HashSet::new());
    for p in pairs {
        if seen_pairs.insert(p.clone()) {
            requested.push(p.clone());
        }
        let key = p.canonical().0;
        if seen_keys.insert(key.clone()) {
            keys.push(key);
        }
    }
    let families = keys
        .par_iter()
        .map(|p| match thesaurus {
            Some(t) => {
                let candidates = find_alternates(p, t, params.num_sim);
                filter_alternates(p, &candidates, corpus, params.max_phrase, params.num_filter)
            }
            None => PairFamily {
                original_frequency: corpus.cooccurrence_frequency(p, params.max_phrase),
                ..PairFamily::singleton(p.clone())
            },
        })
        .collect();
    FamilySet::with_requested(families, requested)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MatrixStats {
    pub family_members: usize,
    pub patterns_available: usize,
    pub patterns_kept: usize,
    pub rows_before_drop: usize,
    pub dropped_rows: usize,
    pub rows: usize,
    pub columns: usize,
    pub nonzeros: usize,
    pub density: f64,
    /// Wall time per stage, in seconds, in execution order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub timings: Vec<(String, f64)>,
}

/// Steps 3 to 8: phrases, patterns, the raw matrix, zero-row removal
/// and log-entropy weighting.
pub fn build_weighted_matrix(
    corpus: &Corpus,
    families: &FamilySet,
    params: &LraParams,
    symmetric: bool,
) -> Result<(PairPatternMatrix, MatrixStats)> {
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, timings: &mut Vec<(String, f64)>| {
        timings.push((name.to_string(), clock.elapsed().as_secs_f64()));
        clock = Instant::now();
    };

    let members = families.members();
    let table = PhraseTable::collect(corpus, &members, params.max_phrase);
    lap("phrases", &mut timings);

    let (raw, available, kept) = if symmetric {
        let mut canonical: Vec<WordPair> = members.iter().map(|p| p.canonical().0).collect();
        canonical.sort();
        canonical.dedup();
        let h = harvest_patterns(&canonical, &table, params.num_patterns);
        lap("patterns", &mut timings);
        let m = build_matrix(families.families(), &h.patterns, &table);
        (m, h.available, h.patterns.len())
    } else {
        let oriented = families.oriented();
        let mut rows: Vec<WordPair> = oriented.iter().flat_map(|f| f.versions().cloned()).collect();
        let mut seen = std::collections::HashSet::new();
        rows.retain(|p| seen.insert(p.clone()));
        let h = harvest_directed_patterns(&rows, &table, 2 * params.num_patterns);
        lap("patterns", &mut timings);
        let m = build_directed_matrix(&oriented, &h.patterns, &table);
        (m, h.available, h.patterns.len())
    };
    lap("matrix", &mut timings);

    let rows_before_drop = raw.row_count();
    let (nonzero, dropped) = raw.drop_zero_rows();
    let (weighted, _) = nonzero.apply_log_entropy()?;
    lap("weighting", &mut timings);

    let cells = weighted.cells();
    let stats = MatrixStats {
        family_members: members.len(),
        patterns_available: available,
        patterns_kept: kept,
        rows_before_drop,
        dropped_rows: dropped.len(),
        rows: weighted.row_count(),
        columns: weighted.column_count(),
        nonzeros: cells.nnz(),
        density: cells.density(),
        timings,
    };
    Ok((weighted, stats))
}

/// Steps 9 and 10, or the variant's replacement for them.
pub fn build_space(
    matrix: &PairPatternMatrix,
    params: &LraParams,
    variant: &Variant,
    opts: &SvdOptions,
) -> Result<ProjectedSpace> {
    match (variant.svd, variant.top_n) {
        (false, _) => Ok(ProjectedSpace::unprojected(matrix)),
        (true, None) => ProjectedSpace::project(matrix, params.k, opts),
        (true, Some(n)) => ProjectedSpace::project_top_n(matrix, params.k, n, opts),
    }
}

/// A built model: families plus the space their rows live in.
#[derive(Debug, Clone)]
pub struct LraModel {
    families: FamilySet,
    space: ProjectedSpace,
    mode: AlternateMode,
}

impl LraModel {
    pub fn from_parts(families: FamilySet, space: ProjectedSpace, mode: AlternateMode) -> Self {
        LraModel { families, space, mode }
    }

    /// Runs every stage in memory.
    pub fn build(
        corpus: &Corpus,
        thesaurus: Option<&Thesaurus>,
        pairs: &[WordPair],
        params: &LraParams,
        variant: &Variant,
        opts: &SvdOptions,
    ) -> Result<(LraModel, MatrixStats)> {
        params.validate()?;
        variant.validate()?;
        let start = Instant::now();
        let thesaurus = if variant.synonyms { thesaurus } else { None };
        let families = build_families(corpus, thesaurus, pairs, params);
        let family_time = start.elapsed().as_secs_f64();
        let (matrix, mut stats) = build_weighted_matrix(corpus, &families, params, variant.symmetry)?;
        stats.timings.insert(0, ("alternates".into(), family_time));
        let start = Instant::now();
        let space = build_space(&matrix, params, variant, opts)?;
        stats.timings.push(("projection".into(), start.elapsed().as_secs_f64()));
        Ok((LraModel::from_parts(families, space, variant.alternates), stats))
    }

    pub fn families(&self) -> &FamilySet {
        &self.families
    }

    pub fn space(&self) -> &ProjectedSpace {
        &self.space
    }

    /// All combination cosines, or `None` when the pairs cannot be compared.
    pub fn combinations(&self, p1: &WordPair, p2: &WordPair) -> Option<Vec<Combination>> {
        evaluate_combinations(&self.families.family(p1), &self.families.family(p2), &self.space)
    }

    /// Cosine of the two original rows alone.
    pub fn original_cosine(&self, p1: &WordPair, p2: &WordPair) -> Option<f64> {
        self.space.cosine(p1, p2)
    }

    /// Highest cosine among the combinations.
    pub fn max_cosine(&self, p1: &WordPair, p2: &WordPair) -> Option<f64> {
        self.combinations(p1, p2)?.iter().map(|c| c.cosine).reduce(f64::max)
    }
}

impl RelationalMeasure for LraModel {
    fn similarity(&self, p1: &WordPair, p2: &WordPair) -> Option<f64> {
        let combos = self.combinations(p1, p2)?;
        relational_similarity(&combos, self.mode)
    }
}

/// Combinations of the originals only; a measure that ignores alternates.
pub fn original_only(model: &LraModel) -> impl RelationalMeasure + '_ {
    move |p1: &WordPair, p2: &WordPair| {
        let combos = model.combinations(p1, p2)?;
        original_cosine(&combos)
    }
}
