//! The closed set of error codes shared by the HTTP service and the CLI.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::catalog::CatalogError;
use crate::engine::{EngineError, StepError};
use crate::evaluation::EvaluationError;
use crate::sensitivity::SensitivityError;
use crate::store::{ExchangeError, StoreError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    NotFound,
    Conflict,
    Referenced,
    ValidationError,
    InvalidId,
    ParseError,
    SchemaVersion,
    AllZeroImportance,
    MissingScore,
    MissingCategoryScore,
    OutOfRange,
    UnknownCategory,
    UnknownCriterion,
    UnknownTarget,
    IneffectiveCriterion,
    IncompleteAssessment,
    ProfileMismatch,
    MixedProfile,
    DuplicateArticle,
    InvalidPerturbation,
    UnknownColumn,
    DuplicateColumn,
    MalformedCell,
    MalformedCsv,
    BadRequest,
    StoreNotInitialized,
    StoreError,
}

impl ErrorCode {
    pub const ALL: &'static [ErrorCode] = &[
        ErrorCode::NotFound,
        ErrorCode::Conflict,
        ErrorCode::Referenced,
        ErrorCode::ValidationError,
        ErrorCode::InvalidId,
        ErrorCode::ParseError,
        ErrorCode::SchemaVersion,
        ErrorCode::AllZeroImportance,
        ErrorCode::MissingScore,
        ErrorCode::MissingCategoryScore,
        ErrorCode::OutOfRange,
        ErrorCode::UnknownCategory,
        ErrorCode::UnknownCriterion,
        ErrorCode::UnknownTarget,
        ErrorCode::IneffectiveCriterion,
        ErrorCode::IncompleteAssessment,
        ErrorCode::ProfileMismatch,
        ErrorCode::MixedProfile,
        ErrorCode::DuplicateArticle,
        ErrorCode::InvalidPerturbation,
        ErrorCode::UnknownColumn,
        ErrorCode::DuplicateColumn,
        ErrorCode::MalformedCell,
        ErrorCode::MalformedCsv,
        ErrorCode::BadRequest,
        ErrorCode::StoreNotInitialized,
        ErrorCode::StoreError,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::NotFound => "not_found",
            ErrorCode::Conflict => "conflict",
            ErrorCode::Referenced => "referenced",
            ErrorCode::ValidationError => "validation_error",
            ErrorCode::InvalidId => "invalid_id",
            ErrorCode::ParseError => "parse_error",
            ErrorCode::SchemaVersion => "schema_version",
            ErrorCode::AllZeroImportance => "all_zero_importance",
            ErrorCode::MissingScore => "missing_score",
            ErrorCode::MissingCategoryScore => "missing_category_score",
            ErrorCode::OutOfRange => "out_of_range",
            ErrorCode::UnknownCategory => "unknown_category",
            ErrorCode::UnknownCriterion => "unknown_criterion",
            ErrorCode::UnknownTarget => "unknown_target",
            ErrorCode::IneffectiveCriterion => "ineffective_criterion",
            ErrorCode::IncompleteAssessment => "incomplete_assessment",
            ErrorCode::ProfileMismatch => "profile_mismatch",
            ErrorCode::MixedProfile => "mixed_profile",
            ErrorCode::DuplicateArticle => "duplicate_article",
            ErrorCode::InvalidPerturbation => "invalid_perturbation",
            ErrorCode::UnknownColumn => "unknown_column",
            ErrorCode::DuplicateColumn => "duplicate_column",
            ErrorCode::MalformedCell => "malformed_cell",
            ErrorCode::MalformedCsv => "malformed_csv",
            ErrorCode::BadRequest => "bad_request",
            ErrorCode::StoreNotInitialized => "store_not_initialized",
            ErrorCode::StoreError => "store_error",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Error body returned by the service and printed by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default)]
    pub detail: Value,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError {
            code,
            message: message.into(),
            detail: Value::Null,
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }
}

impl fmt::Display for ApiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for ApiError {}

fn engine_code(e: &EngineError) -> ErrorCode {
    match e {
        EngineError::AllZeroImportance => ErrorCode::AllZeroImportance,
        EngineError::MissingScore(_) => ErrorCode::MissingScore,
        EngineError::MissingCategoryScore(_) => ErrorCode::MissingCategoryScore,
        EngineError::ScoreOutOfRange { .. } => ErrorCode::OutOfRange,
    }
}

impl From<StepError> for ApiError {
    fn from(e: StepError) -> Self {
        ApiError::new(engine_code(&e.error), e.to_string()).with_detail(json!({
            "step": e.step.as_str(),
            "step_number": e.step.number(),
            "scope": e.scope,
        }))
    }
}

impl From<CatalogError> for ApiError {
    fn from(e: CatalogError) -> Self {
        match &e {
            CatalogError::Parse(_) => ApiError::new(ErrorCode::ParseError, e.to_string()),
            CatalogError::SchemaVersion(_) => {
                ApiError::new(ErrorCode::SchemaVersion, e.to_string())
            }
            CatalogError::Invalid(vs) => {
                let ids: Vec<&str> = vs.iter().map(|v| v.subject()).collect();
                ApiError::new(ErrorCode::ValidationError, e.to_string())
                    .with_detail(json!({ "ids": ids }))
            }
        }
    }
}

impl From<EvaluationError> for ApiError {
    fn from(e: EvaluationError) -> Self {
        let (code, detail) = match &e {
            EvaluationError::Engine(step) => return step.clone().into(),
            EvaluationError::UnknownCategory(id) => {
                (ErrorCode::UnknownCategory, json!({ "id": id }))
            }
            EvaluationError::UnknownCriterion(id) => {
                (ErrorCode::UnknownCriterion, json!({ "id": id }))
            }
            EvaluationError::OutOfRange(r) => (
                ErrorCode::OutOfRange,
                json!({ "value": r.value, "min": r.min, "max": r.max }),
            ),
            EvaluationError::CatalogMismatch { .. } | EvaluationError::InvalidArticle(_) => {
                (ErrorCode::ValidationError, Value::Null)
            }
            EvaluationError::ProfileMismatch { assessment_id, .. } => {
                (ErrorCode::ProfileMismatch, json!({ "id": assessment_id }))
            }
            EvaluationError::IneffectiveCriterion(id) => {
                (ErrorCode::IneffectiveCriterion, json!({ "id": id }))
            }
            EvaluationError::Incomplete(id) => {
                (ErrorCode::IncompleteAssessment, json!({ "id": id }))
            }
            EvaluationError::MixedProfile(id) => (ErrorCode::MixedProfile, json!({ "id": id })),
            EvaluationError::DuplicateArticle(id) => {
                (ErrorCode::DuplicateArticle, json!({ "id": id }))
            }
        };
        ApiError::new(code, e.to_string()).with_detail(detail)
    }
}

impl From<SensitivityError> for ApiError {
    fn from(e: SensitivityError) -> Self {
        match e {
            SensitivityError::Baseline(inner) => inner.into(),
            SensitivityError::UnknownTarget(ref id) => {
                ApiError::new(ErrorCode::UnknownTarget, e.to_string())
                    .with_detail(json!({ "id": id }))
            }
            SensitivityError::InvalidPerturbation(_) => {
                ApiError::new(ErrorCode::InvalidPerturbation, e.to_string())
            }
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let e = match e {
            StoreError::Evaluation(inner) => return inner.into(),
            StoreError::Catalog(inner) => return inner.into(),
            other => other,
        };
        let (code, detail) = match &e {
            StoreError::Evaluation(_) | StoreError::Catalog(_) => unreachable!("handled above"),
            StoreError::NotFound { kind, id } => (
                ErrorCode::NotFound,
                json!({ "kind": kind.as_str(), "id": id }),
            ),
            StoreError::Conflict {
                kind,
                id,
                expected,
                found,
            } => (
                ErrorCode::Conflict,
                json!({ "kind": kind.as_str(), "id": id, "expected_revision": expected, "revision": found }),
            ),
            StoreError::Referenced { kind, id, by } => (
                ErrorCode::Referenced,
                json!({ "kind": kind.as_str(), "id": id, "referenced_by": by }),
            ),
            StoreError::InvalidId(id) => (ErrorCode::InvalidId, json!({ "id": id })),
            StoreError::Integrity(_) => (ErrorCode::ValidationError, Value::Null),
            StoreError::SchemaVersion(v) => {
                (ErrorCode::SchemaVersion, json!({ "schema_version": v }))
            }
            StoreError::NotInitialized(_) => (ErrorCode::StoreNotInitialized, Value::Null),
            StoreError::Corrupt { .. } | StoreError::Io(_) => (ErrorCode::StoreError, Value::Null),
        };
        ApiError::new(code, e.to_string()).with_detail(detail)
    }
}

impl From<ExchangeError> for ApiError {
    fn from(e: ExchangeError) -> Self {
        let (code, detail) = match &e {
            ExchangeError::Evaluation(inner) => return inner.clone().into(),
            ExchangeError::MissingArticle(id) => {
                (ErrorCode::NotFound, json!({ "kind": "article", "id": id }))
            }
            ExchangeError::UnknownColumn(c) => (ErrorCode::UnknownColumn, json!({ "column": c })),
            ExchangeError::DuplicateColumn(c) => {
                (ErrorCode::DuplicateColumn, json!({ "column": c }))
            }
            ExchangeError::MalformedCell { row, column, value } => (
                ErrorCode::MalformedCell,
                json!({ "row": row, "column": column, "value": value }),
            ),
            ExchangeError::MissingArticleColumn(_) | ExchangeError::Csv(_) => {
                (ErrorCode::MalformedCsv, Value::Null)
            }
        };
        ApiError::new(code, e.to_string()).with_detail(detail)
    }
}
