//! Teaching-program profiles, article assessments and ranking.
//!
//! A [`WeightProfile`] records how much a teaching program cares about each
//! category and criterion. An [`Assessment`] records how well one article
//! addresses each criterion that the profile makes effective. Both are
//! immutable snapshots: every mutation returns a new value with a higher
//! revision.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use chrono::{DateTime, Utc};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{CatalogRef, CriteriaCatalog, Criterion};
use crate::engine::{
    self, normalize, CriterionScore, ImportanceRating, NormalizedWeights, RangeError, RatingReport,
    ScoreSheet, Step, StepError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvaluationError {
    #[error("unknown category {0:?}")]
    UnknownCategory(String),
    #[error("unknown criterion {0:?}")]
    UnknownCriterion(String),
    #[error(transparent)]
    OutOfRange(#[from] RangeError),
    #[error("profile targets catalog {found} but {expected} was supplied")]
    CatalogMismatch {
        expected: CatalogRef,
        found: CatalogRef,
    },
    #[error("assessment {assessment_id:?} pins profile {pinned} but {supplied} was supplied")]
    ProfileMismatch {
        assessment_id: String,
        pinned: ProfileRef,
        supplied: ProfileRef,
    },
    #[error("criterion {0:?} is excluded by the profile and cannot be scored")]
    IneffectiveCriterion(String),
    #[error("assessment {0:?} is incomplete")]
    Incomplete(String),
    #[error("assessment {0:?} belongs to a different profile revision than the rest")]
    MixedProfile(String),
    #[error("article {0:?} is assessed more than once")]
    DuplicateArticle(String),
    #[error("invalid article: {0}")]
    InvalidArticle(String),
    #[error(transparent)]
    Engine(#[from] StepError),
}

/// A profile pinned at one revision.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProfileRef {
    pub profile_id: String,
    pub revision: u64,
}

impl fmt::Display for ProfileRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@r{}", self.profile_id, self.revision)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightProfile {
    pub profile_id: String,
    pub name: String,
    pub catalog_ref: CatalogRef,
    pub category_importance: IndexMap<String, ImportanceRating>,
    pub criterion_importance: IndexMap<String, ImportanceRating>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
    pub revision: u64,
}

impl WeightProfile {
    /// A first-revision profile with every importance at zero.
    pub fn new(
        profile_id: impl Into<String>,
        name: impl Into<String>,
        catalog: &CriteriaCatalog,
    ) -> Self {
        let now = Utc::now();
        WeightProfile {
            profile_id: profile_id.into(),
            name: name.into(),
            catalog_ref: catalog.reference(),
            category_importance: catalog
                .categories
                .iter()
                .map(|c| (c.id.clone(), ImportanceRating::ZERO))
                .collect(),
            criterion_importance: catalog
                .criteria()
                .map(|c| (c.id.clone(), ImportanceRating::ZERO))
                .collect(),
            created_at: now,
            updated_at: now,
            revision: 1,
        }
    }

    /// Builds a first-revision profile from sparse importance maps; ids not
    /// mentioned get zero.
    pub fn from_importances(
        profile_id: impl Into<String>,
        name: impl Into<String>,
        catalog: &CriteriaCatalog,
        categories: &IndexMap<String, ImportanceRating>,
        criteria: &IndexMap<String, ImportanceRating>,
    ) -> Result<Self, EvaluationError> {
        let mut profile = WeightProfile::new(profile_id, name, catalog);
        for (id, r) in categories {
            match profile.category_importance.get_mut(id) {
                Some(slot) => *slot = *r,
                None => return Err(EvaluationError::UnknownCategory(id.clone())),
            }
        }
        for (id, r) in criteria {
            match profile.criterion_importance.get_mut(id) {
                Some(slot) => *slot = *r,
                None => return Err(EvaluationError::UnknownCriterion(id.clone())),
            }
        }
        Ok(profile)
    }

    pub fn reference(&self) -> ProfileRef {
        ProfileRef {
            profile_id: self.profile_id.clone(),
            revision: self.revision,
        }
    }

    pub fn category_importance(&self, id: &str) -> ImportanceRating {
        self.category_importance
            .get(id)
            .copied()
            .unwrap_or_default()
    }

    pub fn criterion_importance(&self, id: &str) -> ImportanceRating {
        self.criterion_importance
            .get(id)
            .copied()
            .unwrap_or_default()
    }

    /// Whether a criterion contributes: both it and its category carry
    /// non-zero importance.
    pub fn is_effective(&self, criterion: &Criterion) -> bool {
        !self
            .category_importance(&criterion.category_id)
            .is_excluded()
            && !self.criterion_importance(&criterion.id).is_excluded()
    }

    pub fn effective_criteria<'a>(
        &'a self,
        catalog: &'a CriteriaCatalog,
    ) -> impl Iterator<Item = &'a Criterion> + 'a {
        catalog.criteria().filter(move |c| self.is_effective(c))
    }

    /// Structural checks: the catalog matches and every stored id exists in it.
    pub fn validate(&self, catalog: &CriteriaCatalog) -> Result<(), EvaluationError> {
        if self.catalog_ref != catalog.reference() {
            return Err(EvaluationError::CatalogMismatch {
                expected: catalog.reference(),
                found: self.catalog_ref.clone(),
            });
        }
        if let Some(id) = self
            .category_importance
            .keys()
            .find(|id| catalog.category(id).is_none())
        {
            return Err(EvaluationError::UnknownCategory(id.clone()));
        }
        if let Some(id) = self
            .criterion_importance
            .keys()
            .find(|id| catalog.criterion(id).is_none())
        {
            return Err(EvaluationError::UnknownCriterion(id.clone()));
        }
        Ok(())
    }

    /// Normalized weight of every category.
    pub fn category_weights(
        &self,
        catalog: &CriteriaCatalog,
    ) -> Result<NormalizedWeights, StepError> {
        normalize(
            catalog
                .categories
                .iter()
                .map(|c| (c.id.as_str(), self.category_importance(&c.id))),
        )
        .map_err(|error| StepError {
            step: Step::CategoryWeights,
            scope: None,
            error,
        })
    }

    /// Normalized criterion weights for each category that carries weight.
    pub fn criterion_weights(
        &self,
        catalog: &CriteriaCatalog,
    ) -> Result<IndexMap<String, NormalizedWeights>, StepError> {
        let mut out = IndexMap::new();
        for cat in &catalog.categories {
            if self.category_importance(&cat.id).is_excluded() {
                continue;
            }
            let w = normalize(
                cat.criteria
                    .iter()
                    .map(|c| (c.id.as_str(), self.criterion_importance(&c.id))),
            )
            .map_err(|error| StepError {
                step: Step::CriterionWeights,
                scope: Some(cat.id.clone()),
                error,
            })?;
            out.insert(cat.id.clone(), w);
        }
        Ok(out)
    }

    /// Checks that both weight levels can be computed.
    pub fn check_evaluable(&self, catalog: &CriteriaCatalog) -> Result<(), StepError> {
        self.category_weights(catalog)?;
        self.criterion_weights(catalog)?;
        Ok(())
    }

    fn bumped(&self) -> Self {
        let mut next = self.clone();
        next.revision += 1;
        next.updated_at = Utc::now();
        next
    }

    pub fn set_category_importance(
        &self,
        catalog: &CriteriaCatalog,
        category_id: &str,
        rating: i64,
    ) -> Result<Self, EvaluationError> {
        if catalog.category(category_id).is_none() {
            return Err(EvaluationError::UnknownCategory(category_id.to_string()));
        }
        let rating = ImportanceRating::new(rating)?;
        let mut next = self.bumped();
        next.category_importance
            .insert(category_id.to_string(), rating);
        Ok(next)
    }

    pub fn set_criterion_importance(
        &self,
        catalog: &CriteriaCatalog,
        criterion_id: &str,
        rating: i64,
    ) -> Result<Self, EvaluationError> {
        if catalog.criterion(criterion_id).is_none() {
            return Err(EvaluationError::UnknownCriterion(criterion_id.to_string()));
        }
        let rating = ImportanceRating::new(rating)?;
        let mut next = self.bumped();
        next.criterion_importance
            .insert(criterion_id.to_string(), rating);
        Ok(next)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleRecord {
    pub article_id: String,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub authors: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    #[serde(default = "first_revision")]
    pub revision: u64,
}

fn first_revision() -> u64 {
    1
}

impl ArticleRecord {
    pub fn new(article_id: impl Into<String>, title: impl Into<String>) -> Self {
        ArticleRecord {
            article_id: article_id.into(),
            title: title.into(),
            authors: None,
            year: None,
            source: None,
            notes: None,
            revision: 1,
        }
    }

    pub fn validate(&self) -> Result<(), EvaluationError> {
        if self.article_id.trim().is_empty() {
            return Err(EvaluationError::InvalidArticle("empty article id".into()));
        }
        if self.title.trim().is_empty() {
            return Err(EvaluationError::InvalidArticle(format!(
                "article {:?} has an empty title",
                self.article_id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssessmentStatus {
    Draft,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assessment {
    pub assessment_id: String,
    pub article_ref: String,
    pub profile_ref: ProfileRef,
    pub scores: ScoreSheet,
    pub status: AssessmentStatus,
    pub updated_at: DateTime<Utc>,
    #[serde(default = "first_revision")]
    pub revision: u64,
}

impl Assessment {
    /// An empty draft for `article_id` pinned to the profile's current revision.
    pub fn new(
        assessment_id: impl Into<String>,
        article_id: impl Into<String>,
        profile: &WeightProfile,
    ) -> Self {
        Assessment {
            assessment_id: assessment_id.into(),
            article_ref: article_id.into(),
            profile_ref: profile.reference(),
            scores: ScoreSheet::new(),
            status: AssessmentStatus::Draft,
            updated_at: Utc::now(),
            revision: 1,
        }
    }

    /// The id given to assessments created without an explicit one.
    pub fn default_id(article_id: &str, profile: &ProfileRef) -> String {
        format!("{article_id}--{}-r{}", profile.profile_id, profile.revision)
    }

    pub fn is_complete(&self) -> bool {
        self.status == AssessmentStatus::Complete
    }

    /// Equality on what the assessment says, ignoring bookkeeping
    /// (timestamps and revision).
    pub fn content_eq(&self, other: &Assessment) -> bool {
        self.assessment_id == other.assessment_id
            && self.article_ref == other.article_ref
            && self.profile_ref == other.profile_ref
            && self.scores == other.scores
            && self.status == other.status
    }

    fn ensure_profile(&self, profile: &WeightProfile) -> Result<(), EvaluationError> {
        if self.profile_ref != profile.reference() {
            return Err(EvaluationError::ProfileMismatch {
                assessment_id: self.assessment_id.clone(),
                pinned: self.profile_ref.clone(),
                supplied: profile.reference(),
            });
        }
        Ok(())
    }

    /// Records a score for an effective criterion and recomputes the status.
    pub fn set_score(
        &self,
        catalog: &CriteriaCatalog,
        profile: &WeightProfile,
        criterion_id: &str,
        score: CriterionScore,
    ) -> Result<Self, EvaluationError> {
        self.ensure_profile(profile)?;
        let criterion = catalog
            .criterion(criterion_id)
            .ok_or_else(|| EvaluationError::UnknownCriterion(criterion_id.to_string()))?;
        if !profile.is_effective(criterion) {
            return Err(EvaluationError::IneffectiveCriterion(
                criterion_id.to_string(),
            ));
        }
        if let Some(v) = score.numeric() {
            CriterionScore::new(i64::from(v))?;
        }
        let mut next = self.clone();
        next.scores.insert(criterion_id.to_string(), score);
        Ok(next.restamped(catalog, profile))
    }

    /// Removes a score, which may flip a complete assessment back to draft.
    pub fn clear_score(
        &self,
        catalog: &CriteriaCatalog,
        profile: &WeightProfile,
        criterion_id: &str,
    ) -> Result<Self, EvaluationError> {
        self.ensure_profile(profile)?;
        if catalog.criterion(criterion_id).is_none() {
            return Err(EvaluationError::UnknownCriterion(criterion_id.to_string()));
        }
        let mut next = self.clone();
        next.scores.shift_remove(criterion_id);
        Ok(next.restamped(catalog, profile))
    }

    fn restamped(mut self, catalog: &CriteriaCatalog, profile: &WeightProfile) -> Self {
        self.status = completeness(catalog, profile, &self.scores);
        self.revision += 1;
        self.updated_at = Utc::now();
        self
    }
}

/// Decides completeness from the profile and the scores alone.
///
/// Complete means: the profile can be evaluated, every effective criterion
/// has a score or the not-applicable marker, and every weighted category keeps
/// at least one numeric score.
pub fn completeness(
    catalog: &CriteriaCatalog,
    profile: &WeightProfile,
    scores: &ScoreSheet,
) -> AssessmentStatus {
    if profile.check_evaluable(catalog).is_err() {
        return AssessmentStatus::Draft;
    }
    for cat in &catalog.categories {
        if profile.category_importance(&cat.id).is_excluded() {
            continue;
        }
        let mut numeric = 0;
        for crit in cat.criteria.iter().filter(|c| profile.is_effective(c)) {
            match scores.get(&crit.id) {
                None => return AssessmentStatus::Draft,
                Some(s) if s.numeric().is_some() => numeric += 1,
                Some(_) => {}
            }
        }
        if numeric == 0 {
            return AssessmentStatus::Draft;
        }
    }
    AssessmentStatus::Complete
}

/// Rates a complete assessment against the profile revision it pins.
pub fn rate(
    catalog: &CriteriaCatalog,
    profile: &WeightProfile,
    assessment: &Assessment,
) -> Result<RatingReport, EvaluationError> {
    assessment.ensure_profile(profile)?;
    if completeness(catalog, profile, &assessment.scores) != AssessmentStatus::Complete {
        // Surface the underlying degenerate weight case when there is one.
        profile.check_evaluable(catalog)?;
        return Err(EvaluationError::Incomplete(
            assessment.assessment_id.clone(),
        ));
    }
    Ok(engine::evaluate(catalog, profile, assessment)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingEntry {
    pub article_id: String,
    pub assessment_id: String,
    pub article_rating: f64,
    pub rank: usize,
    pub category_scores: IndexMap<String, f64>,
}

/// Rates each assessment and orders by rating, best first; equal ratings are
/// ordered by article id.
pub fn rank_articles(
    catalog: &CriteriaCatalog,
    profile: &WeightProfile,
    assessments: &[Assessment],
) -> Result<Vec<RankingEntry>, EvaluationError> {
    let pinned = profile.reference();
    for a in assessments {
        if a.profile_ref != pinned {
            return Err(EvaluationError::MixedProfile(a.assessment_id.clone()));
        }
        if completeness(catalog, profile, &a.scores) != AssessmentStatus::Complete {
            return Err(EvaluationError::Incomplete(a.assessment_id.clone()));
        }
    }
    rank_under(catalog, profile, assessments)
}

/// Ranking without the pinned-revision check; the sensitivity analysis uses
/// this to score assessments under a perturbed copy of their profile.
pub(crate) fn rank_under(
    catalog: &CriteriaCatalog,
    profile: &WeightProfile,
    assessments: &[Assessment],
) -> Result<Vec<RankingEntry>, EvaluationError> {
    let mut seen = HashSet::new();
    let mut entries = Vec::with_capacity(assessments.len());
    for a in assessments {
        if !seen.insert(a.article_ref.as_str()) {
            return Err(EvaluationError::DuplicateArticle(a.article_ref.clone()));
        }
        let report = engine::evaluate(catalog, profile, a)?;
        entries.push(RankingEntry {
            article_id: a.article_ref.clone(),
            assessment_id: a.assessment_id.clone(),
            article_rating: report.article_rating,
            rank: 0,
            category_scores: report.category_scores,
        });
    }
    entries.sort_by(|x, y| match y.article_rating.total_cmp(&x.article_rating) {
        Ordering::Equal => x.article_id.cmp(&y.article_id),
        o => o,
    });
    for (i, e) in entries.iter_mut().enumerate() {
        e.rank = i + 1;
    }
    Ok(entries)
}
