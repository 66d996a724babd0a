//! CSV interchange: the ratings report and the score sheet import/export.

use std::collections::{HashMap, HashSet};

use chrono::Utc;
use thiserror::Error;

use crate::catalog::CriteriaCatalog;
use crate::engine::{format_percent, CriterionScore, ScoreSheet};
use crate::evaluation::{
    completeness, rank_articles, ArticleRecord, Assessment, EvaluationError, WeightProfile,
};

/// First column of the score sheet CSV.
pub const ARTICLE_COLUMN: &str = "article_id";

#[derive(Debug, Error)]
pub enum ExchangeError {
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
    #[error("no article record for {0:?}")]
    MissingArticle(String),
    #[error("column {0:?} is not an effective criterion of the profile")]
    UnknownColumn(String),
    #[error("column {0:?} appears twice")]
    DuplicateColumn(String),
    #[error("first column must be {ARTICLE_COLUMN:?}, found {0:?}")]
    MissingArticleColumn(String),
    #[error("row {row}, column {column:?}: malformed cell {value:?}")]
    MalformedCell {
        row: u64,
        column: String,
        value: String,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

fn finish(wtr: csv::Writer<Vec<u8>>) -> String {
    let bytes = wtr.into_inner().expect("in-memory writer flushes");
    String::from_utf8(bytes).expect("csv of UTF-8 fields is UTF-8")
}

/// One row per ranked article: id, title, one `cat_<id>_score` column per
/// weighted category, `article_rating` and `rank`. Percentages carry two
/// decimals and a `%` sign.
pub fn export_ratings(
    catalog: &CriteriaCatalog,
    profile: &WeightProfile,
    articles: &[ArticleRecord],
    assessments: &[Assessment],
) -> Result<String, ExchangeError> {
    let titles: HashMap<&str, &str> = articles
        .iter()
        .map(|a| (a.article_id.as_str(), a.title.as_str()))
        .collect();
    let ranking = rank_articles(catalog, profile, assessments)?;
    let categories: Vec<&str> = catalog
        .categories
        .iter()
        .filter(|c| !profile.category_importance(&c.id).is_excluded())
        .map(|c| c.id.as_str())
        .collect();

    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["article_id".to_string(), "title".to_string()];
    header.extend(categories.iter().map(|id| format!("cat_{id}_score")));
    header.push("article_rating".into());
    header.push("rank".into());
    wtr.write_record(&header)?;

    for entry in &ranking {
        let title = titles
            .get(entry.article_id.as_str())
            .ok_or_else(|| ExchangeError::MissingArticle(entry.article_id.clone()))?;
        let mut row = vec![entry.article_id.clone(), title.to_string()];
        row.extend(
            categories
                .iter()
                .map(|id| format_percent(entry.category_scores[*id])),
        );
        row.push(format_percent(entry.article_rating));
        row.push(entry.rank.to_string());
        wtr.write_record(&row)?;
    }
    Ok(finish(wtr))
}

/// Score sheet in the import format: `article_id` then one column per
/// effective criterion; cells are 1..5, `NA`, or empty when unscored.
pub fn export_assessment_csv(
    catalog: &CriteriaCatalog,
    profile: &WeightProfile,
    assessments: &[Assessment],
) -> Result<String, ExchangeError> {
    let criteria: Vec<&str> = profile
        .effective_criteria(catalog)
        .map(|c| c.id.as_str())
        .collect();
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = vec![ARTICLE_COLUMN];
    header.extend(&criteria);
    wtr.write_record(&header)?;
    for a in assessments {
        let mut row = vec![a.article_ref.clone()];
        row.extend(criteria.iter().map(|id| {
            a.scores
                .get(*id)
                .map(ToString::to_string)
                .unwrap_or_default()
        }));
        wtr.write_record(&row)?;
    }
    Ok(finish(wtr))
}

/// Parses a score sheet into draft assessments pinned to `profile`, one per
/// row. Status is recomputed, so fully scored rows come back complete.
pub fn import_assessment_csv(
    document: &str,
    catalog: &CriteriaCatalog,
    profile: &WeightProfile,
) -> Result<Vec<Assessment>, ExchangeError> {
    let effective: HashSet<&str> = profile
        .effective_criteria(catalog)
        .map(|c| c.id.as_str())
        .collect();

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(document.as_bytes());
    let header = rdr.headers()?.clone();
    match header.get(0) {
        Some(ARTICLE_COLUMN) => {}
        other => {
            return Err(ExchangeError::MissingArticleColumn(
                other.unwrap_or("").to_string(),
            ))
        }
    }
    let mut columns = Vec::new();
    let mut seen = HashSet::new();
    for col in header.iter().skip(1) {
        if !effective.contains(col) {
            return Err(ExchangeError::UnknownColumn(col.to_string()));
        }
        if !seen.insert(col) {
            return Err(ExchangeError::DuplicateColumn(col.to_string()));
        }
        columns.push(col.to_string());
    }

    let pinned = profile.reference();
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line());
        let malformed = |column: &str, value: &str| ExchangeError::MalformedCell {
            row,
            column: column.to_string(),
            value: value.to_string(),
        };
        let article_id = record.get(0).unwrap_or("");
        if article_id.is_empty() {
            return Err(malformed(ARTICLE_COLUMN, article_id));
        }
        let mut scores = ScoreSheet::new();
        for (col, cell) in columns.iter().zip(record.iter().skip(1)) {
            if cell.is_empty() {
                continue;
            }
            let score: CriterionScore = cell.parse().map_err(|_| malformed(col, cell))?;
            scores.insert(col.clone(), score);
        }
        let status = completeness(catalog, profile, &scores);
        out.push(Assessment {
            assessment_id: Assessment::default_id(article_id, &pinned),
            article_ref: article_id.to_string(),
            profile_ref: pinned.clone(),
            scores,
            status,
            updated_at: Utc::now(),
            revision: 1,
        });
    }
    Ok(out)
}
