//! Workflow operations over a [`FileStore`], shared by the HTTP handlers and
//! the CLI so both expose the same behaviour and error codes.

use chrono::Utc;
use indexmap::IndexMap;
use rubric_core::store::{export_assessment_csv, export_ratings, import_assessment_csv};
use rubric_core::{
    format_percent, load_catalog, rank_articles, rate, stability_scan, what_if, ApiError,
    ArticleRecord, Assessment, CatalogRef, CriteriaCatalog, CriterionScore, ErrorCode,
    EvaluationError, FileStore, NormalizedWeights, ProfileRef, RankingEntry, RatingReport,
    SensitivityReport, StoreError, WeightProfile, WhatIfDelta,
};
use serde::{Deserialize, Serialize};

pub type OpResult<T> = Result<T, ApiError>;

// ----- catalogs -----

pub fn list_catalogs(store: &FileStore) -> OpResult<Vec<CatalogRef>> {
    Ok(store.list_catalogs()?)
}

/// A catalog by id; the latest version unless one is named.
pub fn get_catalog(
    store: &FileStore,
    catalog_id: &str,
    version: Option<&str>,
) -> OpResult<CriteriaCatalog> {
    Ok(match version {
        Some(v) => store.get_catalog(&CatalogRef {
            catalog_id: catalog_id.to_string(),
            version: v.to_string(),
        })?,
        None => store.get_latest_catalog(catalog_id)?,
    })
}

pub fn import_catalog(store: &FileStore, document: &str) -> OpResult<CatalogRef> {
    let catalog = load_catalog(document)?;
    store.put_catalog(&catalog)?;
    Ok(catalog.reference())
}

// ----- profiles -----

/// Normalized weights of a profile together with their two-decimal display
/// strings, keyed by category id and criterion id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsView {
    pub category_weights: NormalizedWeights,
    pub criterion_weights: IndexMap<String, NormalizedWeights>,
    pub display: IndexMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileView {
    #[serde(flatten)]
    pub profile: WeightProfile,
    /// Absent when the stored profile cannot be evaluated.
    pub weights: Option<WeightsView>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct ProfileInput {
    pub profile_id: String,
    pub name: String,
    /// Defaults to the built-in catalog.
    #[serde(default)]
    pub catalog_ref: Option<CatalogRef>,
    #[serde(default)]
    pub category_importance: IndexMap<String, i64>,
    #[serde(default)]
    pub criterion_importance: IndexMap<String, i64>,
}

/// Changes on top of the revision the client last read.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct ProfilePatch {
    pub revision: u64,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub category_importance: IndexMap<String, i64>,
    #[serde(default)]
    pub criterion_importance: IndexMap<String, i64>,
}

pub fn weights_view(catalog: &CriteriaCatalog, profile: &WeightProfile) -> OpResult<WeightsView> {
    let category_weights = profile.category_weights(catalog)?;
    let criterion_weights = profile.criterion_weights(catalog)?;
    let mut display: IndexMap<String, String> = category_weights
        .iter()
        .map(|(id, w)| (id.to_string(), format_percent(w)))
        .collect();
    for w in criterion_weights.values() {
        display.extend(w.iter().map(|(id, x)| (id.to_string(), format_percent(x))));
    }
    Ok(WeightsView {
        category_weights,
        criterion_weights,
        display,
    })
}

fn view(catalog: &CriteriaCatalog, profile: WeightProfile) -> ProfileView {
    let weights = weights_view(catalog, &profile).ok();
    ProfileView { profile, weights }
}

fn apply_importances(
    catalog: &CriteriaCatalog,
    mut profile: WeightProfile,
    categories: &IndexMap<String, i64>,
    criteria: &IndexMap<String, i64>,
) -> OpResult<WeightProfile> {
    // The setters bump the revision; callers fix it afterwards.
    for (id, v) in categories {
        profile = profile.set_category_importance(catalog, id, *v)?;
    }
    for (id, v) in criteria {
        profile = profile.set_criterion_importance(catalog, id, *v)?;
    }
    Ok(profile)
}

fn builtin_ref() -> CatalogRef {
    CatalogRef {
        catalog_id: "builtin".into(),
        version: "1".into(),
    }
}

/// Builds the profile described by `input` without storing it.
fn draft_profile(
    store: &FileStore,
    input: &ProfileInput,
) -> OpResult<(CriteriaCatalog, WeightProfile)> {
    let catalog = store.get_catalog(&input.catalog_ref.clone().unwrap_or_else(builtin_ref))?;
    let blank = WeightProfile::new(&input.profile_id, &input.name, &catalog);
    let mut profile = apply_importances(
        &catalog,
        blank,
        &input.category_importance,
        &input.criterion_importance,
    )?;
    profile.revision = 1;
    Ok((catalog, profile))
}

/// Weights for unsaved importances; nothing is stored.
pub fn preview_weights(store: &FileStore, input: &ProfileInput) -> OpResult<WeightsView> {
    let (catalog, profile) = draft_profile(store, input)?;
    weights_view(&catalog, &profile)
}

/// Stores revision 1 of a new profile. Profiles that cannot be evaluated are
/// rejected so every committed revision can rate articles.
pub fn create_profile(store: &FileStore, input: &ProfileInput) -> OpResult<ProfileView> {
    let (catalog, profile) = draft_profile(store, input)?;
    let weights = weights_view(&catalog, &profile)?;
    store.put_profile(&profile)?;
    Ok(ProfileView {
        profile,
        weights: Some(weights),
    })
}

pub fn update_profile(
    store: &FileStore,
    profile_id: &str,
    patch: &ProfilePatch,
) -> OpResult<ProfileView> {
    let latest = store.get_profile(profile_id)?;
    let catalog = store.get_catalog(&latest.catalog_ref)?;
    let mut next = apply_importances(
        &catalog,
        latest,
        &patch.category_importance,
        &patch.criterion_importance,
    )?;
    if let Some(name) = &patch.name {
        next.name = name.clone();
    }
    next.revision = patch.revision + 1;
    next.updated_at = Utc::now();
    let weights = weights_view(&catalog, &next)?;
    store.put_profile(&next)?;
    Ok(ProfileView {
        profile: next,
        weights: Some(weights),
    })
}

/// Resolves a profile at a given revision, or its latest one.
pub fn resolve_profile(
    store: &FileStore,
    profile_id: &str,
    revision: Option<u64>,
) -> OpResult<(CriteriaCatalog, WeightProfile)> {
    let profile = match revision {
        Some(revision) => store.get_profile_revision(&ProfileRef {
            profile_id: profile_id.to_string(),
            revision,
        })?,
        None => store.get_profile(profile_id)?,
    };
    let catalog = store.get_catalog(&profile.catalog_ref)?;
    Ok((catalog, profile))
}

pub fn get_profile(
    store: &FileStore,
    profile_id: &str,
    revision: Option<u64>,
) -> OpResult<ProfileView> {
    let (catalog, profile) = resolve_profile(store, profile_id, revision)?;
    Ok(view(&catalog, profile))
}

pub fn list_profiles(store: &FileStore) -> OpResult<Vec<ProfileView>> {
    let mut out = Vec::new();
    for p in store.list_profiles()? {
        let catalog = store.get_catalog(&p.catalog_ref)?;
        out.push(view(&catalog, p));
    }
    Ok(out)
}

pub fn delete_profile(store: &FileStore, profile_id: &str) -> OpResult<()> {
    Ok(store.delete_profile(profile_id)?)
}

// ----- articles -----

#[derive(Debug, Clone, Default, Deserialize)]
pub struct ArticlePatch {
    pub revision: u64,
    #[serde(default)]
    pub title: Option<String>,
    #[serde(default)]
    pub authors: Option<String>,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub source: Option<String>,
    #[serde(default)]
    pub notes: Option<String>,
}

pub fn create_article(store: &FileStore, article: &ArticleRecord) -> OpResult<ArticleRecord> {
    let mut article = article.clone();
    article.revision = 1;
    store.put_article(&article)?;
    Ok(article)
}

pub fn update_article(
    store: &FileStore,
    article_id: &str,
    patch: &ArticlePatch,
) -> OpResult<ArticleRecord> {
    let mut next = store.get_article(article_id)?;
    if let Some(v) = &patch.title {
        next.title = v.clone();
    }
    if patch.authors.is_some() {
        next.authors = patch.authors.clone();
    }
    if patch.year.is_some() {
        next.year = patch.year;
    }
    if patch.source.is_some() {
        next.source = patch.source.clone();
    }
    if patch.notes.is_some() {
        next.notes = patch.notes.clone();
    }
    next.revision = patch.revision + 1;
    store.put_article(&next)?;
    Ok(next)
}

pub fn get_article(store: &FileStore, article_id: &str) -> OpResult<ArticleRecord> {
    Ok(store.get_article(article_id)?)
}

pub fn list_articles(store: &FileStore) -> OpResult<Vec<ArticleRecord>> {
    Ok(store.list_articles()?)
}

pub fn delete_article(store: &FileStore, article_id: &str) -> OpResult<()> {
    Ok(store.delete_article(article_id)?)
}

// ----- assessments -----

/// A score as sent by clients: 1..=5 or `"NA"`. Kept loose so out-of-range
/// numbers surface as `out_of_range` rather than a parse failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScoreValue {
    Number(i64),
    Text(String),
}

impl ScoreValue {
    pub fn to_score(&self) -> OpResult<CriterionScore> {
        match self {
            ScoreValue::Number(n) => Ok(CriterionScore::new(*n).map_err(EvaluationError::from)?),
            ScoreValue::Text(s) => match s.trim().parse::<i64>() {
                Ok(n) => ScoreValue::Number(n).to_score(),
                Err(_) => s
                    .parse()
                    .map_err(|m: String| ApiError::new(ErrorCode::BadRequest, m)),
            },
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct AssessmentInput {
    /// Defaults to `Assessment::default_id`.
    #[serde(default)]
    pub assessment_id: Option<String>,
    pub article_id: String,
    pub profile_id: String,
    /// Defaults to the profile's latest revision.
    #[serde(default)]
    pub profile_revision: Option<u64>,
    #[serde(default)]
    pub scores: IndexMap<String, ScoreValue>,
}

/// Score changes on top of the revision the client last read; `null` clears
/// a score.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct ScorePatch {
    pub revision: u64,
    #[serde(default)]
    pub scores: IndexMap<String, Option<ScoreValue>>,
}

pub fn create_assessment(store: &FileStore, input: &AssessmentInput) -> OpResult<Assessment> {
    let (catalog, profile) = resolve_profile(store, &input.profile_id, input.profile_revision)?;
    store.get_article(&input.article_id)?;
    let id = input
        .assessment_id
        .clone()
        .unwrap_or_else(|| Assessment::default_id(&input.article_id, &profile.reference()));
    let mut a = Assessment::new(id, &input.article_id, &profile);
    for (criterion, v) in &input.scores {
        a = a.set_score(&catalog, &profile, criterion, v.to_score()?)?;
    }
    a.revision = 1;
    store.put_assessment(&a)?;
    Ok(a)
}

pub fn update_assessment(
    store: &FileStore,
    assessment_id: &str,
    patch: &ScorePatch,
) -> OpResult<Assessment> {
    let mut a = store.get_assessment(assessment_id)?;
    let profile = store.get_profile_revision(&a.profile_ref)?;
    let catalog = store.get_catalog(&profile.catalog_ref)?;
    for (criterion, v) in &patch.scores {
        a = match v {
            Some(v) => a.set_score(&catalog, &profile, criterion, v.to_score()?)?,
            None => a.clear_score(&catalog, &profile, criterion)?,
        };
    }
    a.revision = patch.revision + 1;
    a.updated_at = Utc::now();
    store.put_assessment(&a)?;
    Ok(a)
}

pub fn get_assessment(store: &FileStore, assessment_id: &str) -> OpResult<Assessment> {
    Ok(store.get_assessment(assessment_id)?)
}

/// All assessments, or those pinned to one profile (at a revision, or any).
pub fn list_assessments(
    store: &FileStore,
    profile_id: Option<&str>,
    revision: Option<u64>,
) -> OpResult<Vec<Assessment>> {
    Ok(store
        .list_assessments()?
        .into_iter()
        .filter(|a| profile_id.is_none_or(|p| a.profile_ref.profile_id == p))
        .filter(|a| revision.is_none_or(|r| a.profile_ref.revision == r))
        .collect())
}

pub fn delete_assessment(store: &FileStore, assessment_id: &str) -> OpResult<()> {
    Ok(store.delete_assessment(assessment_id)?)
}

// ----- evaluation -----

pub fn rating(store: &FileStore, assessment_id: &str) -> OpResult<RatingReport> {
    let a = store.get_assessment(assessment_id)?;
    let profile = store.get_profile_revision(&a.profile_ref)?;
    let catalog = store.get_catalog(&profile.catalog_ref)?;
    Ok(rate(&catalog, &profile, &a)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedArticle {
    #[serde(flatten)]
    pub entry: RankingEntry,
    pub title: String,
    /// Two-decimal percentages per category plus `article_rating`.
    pub display: IndexMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingView {
    pub profile_ref: ProfileRef,
    pub entries: Vec<RankedArticle>,
    /// Draft assessments under this revision, left out of the ranking.
    pub drafts: Vec<String>,
}

/// Complete assessments under one profile revision, plus the ids of drafts.
fn complete_assessments(
    store: &FileStore,
    profile: &WeightProfile,
) -> OpResult<(Vec<Assessment>, Vec<String>)> {
    let (complete, drafts): (Vec<_>, Vec<_>) = store
        .assessments_for(&profile.reference())?
        .into_iter()
        .partition(Assessment::is_complete);
    Ok((
        complete,
        drafts.into_iter().map(|a| a.assessment_id).collect(),
    ))
}

fn ranked(store: &FileStore, entries: Vec<RankingEntry>) -> OpResult<Vec<RankedArticle>> {
    entries
        .into_iter()
        .map(|entry| {
            let title = match store.get_article(&entry.article_id) {
                Ok(a) => a.title,
                Err(StoreError::NotFound { .. }) => String::new(),
                Err(e) => return Err(e.into()),
            };
            let mut display: IndexMap<String, String> = entry
                .category_scores
                .iter()
                .map(|(id, s)| (id.clone(), format_percent(*s)))
                .collect();
            display.insert(
                "article_rating".into(),
                format_percent(entry.article_rating),
            );
            Ok(RankedArticle {
                entry,
                title,
                display,
            })
        })
        .collect()
}

pub fn ranking(
    store: &FileStore,
    profile_id: &str,
    revision: Option<u64>,
) -> OpResult<RankingView> {
    let (catalog, profile) = resolve_profile(store, profile_id, revision)?;
    let (complete, drafts) = complete_assessments(store, &profile)?;
    let entries = rank_articles(&catalog, &profile, &complete)?;
    Ok(RankingView {
        profile_ref: profile.reference(),
        entries: ranked(store, entries)?,
        drafts,
    })
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct WhatIfRequest {
    pub profile_id: String,
    #[serde(default)]
    pub profile_revision: Option<u64>,
    #[serde(default)]
    pub deltas: Vec<DeltaInput>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct DeltaInput {
    pub target: String,
    pub new_importance: i64,
}

/// Ranks the profile's complete assessments with and without the deltas.
/// Nothing is stored.
pub fn whatif(store: &FileStore, req: &WhatIfRequest) -> OpResult<SensitivityReport> {
    let (catalog, profile) = resolve_profile(store, &req.profile_id, req.profile_revision)?;
    let deltas = req
        .deltas
        .iter()
        .map(|d| {
            let r = rubric_core::ImportanceRating::new(d.new_importance)
                .map_err(EvaluationError::from)?;
            Ok(WhatIfDelta::new(d.target.clone(), r))
        })
        .collect::<OpResult<Vec<_>>>()?;
    let (complete, _) = complete_assessments(store, &profile)?;
    Ok(what_if(&catalog, &profile, &complete, &deltas)?)
}

/// Per category and effective criterion: whether a one-step importance change
/// reverses any ranked pair.
pub fn stability(
    store: &FileStore,
    profile_id: &str,
    revision: Option<u64>,
) -> OpResult<IndexMap<String, bool>> {
    let (catalog, profile) = resolve_profile(store, profile_id, revision)?;
    let (complete, _) = complete_assessments(store, &profile)?;
    Ok(stability_scan(&catalog, &profile, &complete)?)
}

// ----- interchange -----

pub fn export_ratings_csv(
    store: &FileStore,
    profile_id: &str,
    revision: Option<u64>,
) -> OpResult<String> {
    let (catalog, profile) = resolve_profile(store, profile_id, revision)?;
    let (complete, _) = complete_assessments(store, &profile)?;
    let articles = store.list_articles()?;
    Ok(export_ratings(&catalog, &profile, &articles, &complete)?)
}

pub fn export_scores_csv(
    store: &FileStore,
    profile_id: &str,
    revision: Option<u64>,
) -> OpResult<String> {
    let (catalog, profile) = resolve_profile(store, profile_id, revision)?;
    let all = store.assessments_for(&profile.reference())?;
    Ok(export_assessment_csv(&catalog, &profile, &all)?)
}

/// Imports a score sheet against one profile revision. Rows for an article
/// that already has an assessment under that revision replace its scores as
/// a new revision; other rows create assessments. Every row's article must
/// exist, and nothing is written unless all rows parse.
pub fn import_scores_csv(
    store: &FileStore,
    profile_id: &str,
    revision: Option<u64>,
    document: &str,
) -> OpResult<Vec<Assessment>> {
    let (catalog, profile) = resolve_profile(store, profile_id, revision)?;
    let rows = import_assessment_csv(document, &catalog, &profile)?;
    for a in &rows {
        store.get_article(&a.article_ref)?;
    }
    let mut out = Vec::with_capacity(rows.len());
    for mut a in rows {
        match store.get_assessment(&a.assessment_id) {
            Ok(prev) => a.revision = prev.revision + 1,
            Err(StoreError::NotFound { .. }) => a.revision = 1,
            Err(e) => return Err(e.into()),
        }
        store.put_assessment(&a)?;
        out.push(a);
    }
    Ok(out)
}
