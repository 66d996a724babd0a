//! Multi-criteria rating of research articles as teaching material.
//!
//! A teaching program rates how important each category and criterion of a
//! [`CriteriaCatalog`] is; an evaluator scores an article against the
//! criteria that matter; the engine turns those three inputs into normalized
//! weights, category scores and a single article rating.
//!
//! ```
//! use rubric_core::{fixture, rate};
//!
//! let (catalog, profile, _article, assessment) = fixture::worked_example();
//! let report = rate(&catalog, &profile, &assessment).unwrap();
//! assert_eq!(report.rating_display(), "75.56%");
//! ```

pub mod catalog;
pub mod engine;
pub mod error;
pub mod evaluation;
pub mod fixture;
pub mod sensitivity;
pub mod store;

/// Version tag written into every stored document.
pub const SCHEMA_VERSION: &str = "1";

pub use catalog::{
    builtin_catalog, load_catalog, validate_catalog, CatalogError, CatalogRef, Category,
    CriteriaCatalog, Criterion, Violation,
};
pub use engine::{
    article_rating, category_score, evaluate, format_percent, normalize, CriterionScore,
    EngineError, ImportanceRating, NormalizedWeights, RatingReport, ScoreSheet, Step, StepError,
};
pub use error::{ApiError, ErrorCode};
pub use evaluation::{
    completeness, rank_articles, rate, ArticleRecord, Assessment, AssessmentStatus,
    EvaluationError, ProfileRef, RankingEntry, WeightProfile,
};
pub use sensitivity::{stability_scan, what_if, SensitivityError, SensitivityReport, WhatIfDelta};
pub use store::{FileStore, StoreError};
