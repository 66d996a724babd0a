//! Normalization and weighted aggregation.
//!
//! Everything here is a pure function of its inputs. The arithmetic follows the
//! order the method prescribes: importances are normalized per level, criterion
//! scores are weighted and summed before dividing by the top of the scale, and
//! the article rating is the category-weighted sum of category scores.

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::catalog::CriteriaCatalog;
use crate::evaluation::{Assessment, WeightProfile};

/// Highest importance and highest criterion score.
pub const SCALE_MAX: u8 = 5;

/// Criterion id → score, in entry order.
pub type ScoreSheet = IndexMap<String, CriterionScore>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{what} {value} is outside {min}..={max}")]
pub struct RangeError {
    pub what: &'static str,
    pub value: i64,
    pub min: u8,
    pub max: u8,
}

/// Importance on a 0..=5 scale; zero excludes the item.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(try_from = "i64", into = "u8")]
pub struct ImportanceRating(u8);

impl ImportanceRating {
    pub const ZERO: ImportanceRating = ImportanceRating(0);

    pub fn new(value: i64) -> Result<Self, RangeError> {
        if (0..=SCALE_MAX as i64).contains(&value) {
            Ok(ImportanceRating(value as u8))
        } else {
            Err(RangeError {
                what: "importance",
                value,
                min: 0,
                max: SCALE_MAX,
            })
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn is_excluded(self) -> bool {
        self.0 == 0
    }

    /// Display label; purely cosmetic.
    pub fn label(self) -> &'static str {
        match self.0 {
            5 => "Extremely important",
            4 => "Important",
            3 => "Moderately important",
            2 => "Somewhat important",
            1 => "Slightly important",
            _ => "Not applicable",
        }
    }
}

impl TryFrom<i64> for ImportanceRating {
    type Error = RangeError;
    fn try_from(v: i64) -> Result<Self, RangeError> {
        ImportanceRating::new(v)
    }
}

impl From<ImportanceRating> for u8 {
    fn from(r: ImportanceRating) -> u8 {
        r.0
    }
}

impl fmt::Display for ImportanceRating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// How well an article addresses one criterion.
///
/// Serialized as the integer 1..=5 or the string `"NA"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CriterionScore {
    Scored(u8),
    NotApplicable,
}

impl CriterionScore {
    pub const NA_MARKER: &'static str = "NA";

    pub fn new(value: i64) -> Result<Self, RangeError> {
        if (1..=SCALE_MAX as i64).contains(&value) {
            Ok(CriterionScore::Scored(value as u8))
        } else {
            Err(RangeError {
                what: "score",
                value,
                min: 1,
                max: SCALE_MAX,
            })
        }
    }

    pub fn numeric(self) -> Option<u8> {
        match self {
            CriterionScore::Scored(v) => Some(v),
            CriterionScore::NotApplicable => None,
        }
    }

    pub fn is_not_applicable(self) -> bool {
        self == CriterionScore::NotApplicable
    }

    pub fn label(self) -> &'static str {
        match self {
            CriterionScore::Scored(5) => "To a very large extent",
            CriterionScore::Scored(4) => "To a large extent",
            CriterionScore::Scored(3) => "To a moderate extent",
            CriterionScore::Scored(2) => "To a small extent",
            CriterionScore::Scored(_) => "To a very small extent",
            CriterionScore::NotApplicable => "Not applicable",
        }
    }
}

impl fmt::Display for CriterionScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriterionScore::Scored(v) => v.fmt(f),
            CriterionScore::NotApplicable => f.write_str(Self::NA_MARKER),
        }
    }
}

impl std::str::FromStr for CriterionScore {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case(Self::NA_MARKER) {
            return Ok(CriterionScore::NotApplicable);
        }
        let v: i64 = s
            .parse()
            .map_err(|_| format!("expected 1..=5 or NA, got {s:?}"))?;
        CriterionScore::new(v).map_err(|e| e.to_string())
    }
}

impl Serialize for CriterionScore {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            CriterionScore::Scored(v) => ser.serialize_u8(*v),
            CriterionScore::NotApplicable => ser.serialize_str(Self::NA_MARKER),
        }
    }
}

impl<'de> Deserialize<'de> for CriterionScore {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(i64),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(v) => CriterionScore::new(v).map_err(serde::de::Error::custom),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Fractions in [0, 1] keyed by id, in input order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormalizedWeights(IndexMap<String, f64>);

impl NormalizedWeights {
    /// Weight for `id`; absent ids weigh nothing.
    pub fn get(&self, id: &str) -> f64 {
        self.0.get(id).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Entries with strictly positive weight.
    pub fn positive(&self) -> impl Iterator<Item = (&str, f64)> {
        self.iter().filter(|(_, w)| *w > 0.0)
    }

    pub fn total(&self) -> f64 {
        self.0.values().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> IndexMap<String, f64> {
        self.0
    }
}

impl FromIterator<(String, f64)> for NormalizedWeights {
    fn from_iter<T: IntoIterator<Item = (String, f64)>>(iter: T) -> Self {
        NormalizedWeights(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("every importance at this level is zero")]
    AllZeroImportance,
    #[error("criterion {0:?} carries weight but has no numeric score")]
    MissingScore(String),
    #[error("category {0:?} carries weight but has no category score")]
    MissingCategoryScore(String),
    #[error("criterion {id:?}: {source}")]
    ScoreOutOfRange {
        id: String,
        #[source]
        source: RangeError,
    },
}

/// The computation stage an evaluation error arose in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    CategoryWeights,
    CriterionWeights,
    CategoryScore,
    ArticleRating,
}

impl Step {
    /// Position in the seven-step method.
    pub fn number(self) -> u8 {
        match self {
            Step::CategoryWeights => 2,
            Step::CriterionWeights => 4,
            Step::CategoryScore => 6,
            Step::ArticleRating => 7,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Step::CategoryWeights => "category_weights",
            Step::CriterionWeights => "criterion_weights",
            Step::CategoryScore => "category_score",
            Step::ArticleRating => "article_rating",
        }
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {} ({})", self.number(), self.as_str())
    }
}

/// An [`EngineError`] tagged with where in [`evaluate`] it happened.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{step}{}: {error}", .scope.as_ref().map(|s| format!(" in category {s:?}")).unwrap_or_default())]
pub struct StepError {
    pub step: Step,
    /// Category being processed, if the step is per-category.
    pub scope: Option<String>,
    #[source]
    pub error: EngineError,
}

/// Divides each importance by the sum of all importances at the same level.
///
/// Zero-importance entries are kept with weight zero.
pub fn normalize<I, K>(importances: I) -> Result<NormalizedWeights, EngineError>
where
    I: IntoIterator<Item = (K, ImportanceRating)>,
    K: Into<String>,
{
    let entries: Vec<(String, u32)> = importances
        .into_iter()
        .map(|(k, r)| (k.into(), u32::from(r.value())))
        .collect();
    let total: u32 = entries.iter().map(|(_, v)| v).sum();
    if total == 0 {
        return Err(EngineError::AllZeroImportance);
    }
    let total = f64::from(total);
    Ok(entries
        .into_iter()
        .map(|(k, v)| (k, f64::from(v) / total))
        .collect())
}

/// Weighted criterion scores summed, then divided by [`SCALE_MAX`].
pub fn category_score(
    scores: &ScoreSheet,
    criterion_weights: &NormalizedWeights,
) -> Result<f64, EngineError> {
    let mut sum = 0.0;
    for (id, weight) in criterion_weights.positive() {
        let value = match scores.get(id) {
            Some(CriterionScore::Scored(v)) => *v,
            _ => return Err(EngineError::MissingScore(id.to_string())),
        };
        if !(1..=SCALE_MAX).contains(&value) {
            return Err(EngineError::ScoreOutOfRange {
                id: id.to_string(),
                source: RangeError {
                    what: "score",
                    value: i64::from(value),
                    min: 1,
                    max: SCALE_MAX,
                },
            });
        }
        sum += f64::from(value) * weight;
    }
    Ok(sum / f64::from(SCALE_MAX))
}

/// Category scores weighted by normalized category weight and summed.
pub fn article_rating(
    category_scores: &IndexMap<String, f64>,
    category_weights: &NormalizedWeights,
) -> Result<f64, EngineError> {
    let mut sum = 0.0;
    for (id, weight) in category_weights.positive() {
        let score = category_scores
            .get(id)
            .ok_or_else(|| EngineError::MissingCategoryScore(id.to_string()))?;
        sum += score * weight;
    }
    Ok(sum)
}

/// Renders a fraction as a percentage with two decimals, rounding half away
/// from zero: `0.755555…` → `"75.56%"`.
pub fn format_percent(fraction: f64) -> String {
    let hundredths = fraction * 10_000.0;
    // Snap binary noise (e.g. 1234.4999999997) before rounding the half.
    let snapped = (hundredths * 1e6).round() / 1e6;
    let rounded = snapped.round() / 100.0;
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{rounded:.2}%")
}

/// Key under which the article rating appears in
/// [`RatingReport::display_percentages`].
pub const RATING_KEY: &str = "article_rating";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingReport {
    pub article_id: String,
    /// Normalized weight of every category, excluded ones at zero.
    pub category_weights: NormalizedWeights,
    /// Normalized criterion weights for each category that carries weight.
    pub criterion_weights: IndexMap<String, NormalizedWeights>,
    /// Score of each category that carries weight.
    pub category_scores: IndexMap<String, f64>,
    pub article_rating: f64,
    /// Two-decimal percentages: one per category score plus [`RATING_KEY`].
    pub display_percentages: IndexMap<String, String>,
}

impl RatingReport {
    pub fn rating_display(&self) -> &str {
        &self.display_percentages[RATING_KEY]
    }
}

fn at(step: Step, scope: Option<&str>) -> impl FnOnce(EngineError) -> StepError + '_ {
    move |error| StepError {
        step,
        scope: scope.map(str::to_string),
        error,
    }
}

/// Runs the full computation for one assessment under one profile.
///
/// Criteria marked not-applicable are treated as importance zero when the
/// criterion weights of their category are normalized, so the remaining
/// criteria of that category again sum to one.
pub fn evaluate(
    catalog: &CriteriaCatalog,
    profile: &WeightProfile,
    assessment: &Assessment,
) -> Result<RatingReport, StepError> {
    let category_weights = normalize(
        catalog
            .categories
            .iter()
            .map(|c| (c.id.as_str(), profile.category_importance(&c.id))),
    )
    .map_err(at(Step::CategoryWeights, None))?;

    let mut criterion_weights = IndexMap::new();
    let mut category_scores = IndexMap::new();
    for cat in &catalog.categories {
        if category_weights.get(&cat.id) <= 0.0 {
            continue;
        }
        let importances = cat.criteria.iter().map(|c| {
            let imp = match assessment.scores.get(&c.id) {
                Some(CriterionScore::NotApplicable) => ImportanceRating::ZERO,
                _ => profile.criterion_importance(&c.id),
            };
            (c.id.as_str(), imp)
        });
        let weights = normalize(importances).map_err(at(Step::CriterionWeights, Some(&cat.id)))?;
        let score = category_score(&assessment.scores, &weights)
            .map_err(at(Step::CategoryScore, Some(&cat.id)))?;
        category_scores.insert(cat.id.clone(), score);
        criterion_weights.insert(cat.id.clone(), weights);
    }

    let rating = article_rating(&category_scores, &category_weights)
        .map_err(at(Step::ArticleRating, None))?;

    let mut display: IndexMap<String, String> = category_scores
        .iter()
        .map(|(id, s)| (id.clone(), format_percent(*s)))
        .collect();
    display.insert(RATING_KEY.to_string(), format_percent(rating));

    Ok(RatingReport {
        article_id: assessment.article_ref.clone(),
        category_weights,
        criterion_weights,
        category_scores,
        article_rating: rating,
        display_percentages: display,
    })
}
