//! Criteria framework: ordered categories, each holding ordered criteria.
//!
//! The built-in catalog is the eleven-category, thirty-three-criterion framework
//! for judging how well a research article serves as teaching material. Custom
//! catalogs with any tree shape are accepted as long as they pass
//! [`validate_catalog`].

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::SCHEMA_VERSION;

/// Identifier of the catalog returned by [`builtin_catalog`].
pub const BUILTIN_CATALOG_ID: &str = "builtin";
/// Version of the catalog returned by [`builtin_catalog`].
pub const BUILTIN_CATALOG_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Criterion {
    pub id: String,
    pub prompt: String,
    /// Filled from the enclosing category; not part of the file format.
    #[serde(skip)]
    pub category_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Category {
    pub id: String,
    pub name: String,
    pub criteria: Vec<Criterion>,
}

impl Category {
    /// Builds a category, stamping each criterion with this category's id.
    pub fn new<I, S, P>(id: impl Into<String>, name: impl Into<String>, criteria: I) -> Self
    where
        I: IntoIterator<Item = (S, P)>,
        S: Into<String>,
        P: Into<String>,
    {
        let id = id.into();
        let criteria = criteria
            .into_iter()
            .map(|(cid, prompt)| Criterion {
                id: cid.into(),
                prompt: prompt.into(),
                category_id: id.clone(),
            })
            .collect();
        Category {
            id,
            name: name.into(),
            criteria,
        }
    }
}

/// Catalog identity as referenced by profiles.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CatalogRef {
    pub catalog_id: String,
    pub version: String,
}

impl fmt::Display for CatalogRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.catalog_id, self.version)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CriteriaCatalog {
    pub catalog_id: String,
    pub version: String,
    pub categories: Vec<Category>,
}

impl CriteriaCatalog {
    pub fn reference(&self) -> CatalogRef {
        CatalogRef {
            catalog_id: self.catalog_id.clone(),
            version: self.version.clone(),
        }
    }

    pub fn category(&self, id: &str) -> Option<&Category> {
        self.categories.iter().find(|c| c.id == id)
    }

    pub fn criterion(&self, id: &str) -> Option<&Criterion> {
        self.criteria().find(|c| c.id == id)
    }

    /// All criteria in catalog order.
    pub fn criteria(&self) -> impl Iterator<Item = &Criterion> {
        self.categories.iter().flat_map(|c| c.criteria.iter())
    }

    pub fn criterion_count(&self) -> usize {
        self.categories.iter().map(|c| c.criteria.len()).sum()
    }

    /// Re-stamps `category_id` on every criterion from its enclosing category.
    fn link(mut self) -> Self {
        for cat in &mut self.categories {
            for crit in &mut cat.criteria {
                crit.category_id = cat.id.clone();
            }
        }
        self
    }

    /// Serializes to the catalog file format (pretty JSON with `schema_version`).
    pub fn to_document(&self) -> String {
        let doc = CatalogDocument {
            schema_version: Some(SCHEMA_VERSION.to_string()),
            catalog_id: self.catalog_id.clone(),
            version: self.version.clone(),
            categories: self.categories.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("catalog serializes")
    }
}

impl<'de> Deserialize<'de> for CriteriaCatalog {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            catalog_id: String,
            version: String,
            categories: Vec<Category>,
        }
        let raw = Raw::deserialize(de)?;
        Ok(CriteriaCatalog {
            catalog_id: raw.catalog_id,
            version: raw.version,
            categories: raw.categories,
        }
        .link())
    }
}

#[derive(Serialize, Deserialize)]
struct CatalogDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema_version: Option<String>,
    catalog_id: String,
    version: String,
    categories: Vec<Category>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("catalog id is empty")]
    EmptyCatalogId,
    #[error("catalog has no categories")]
    NoCategories,
    #[error("duplicate category id {0:?}")]
    DuplicateCategory(String),
    #[error("category {0:?} has an empty name")]
    EmptyCategoryName(String),
    #[error("category {0:?} has no criteria")]
    EmptyCategory(String),
    #[error("duplicate criterion id {0:?}")]
    DuplicateCriterion(String),
    #[error("criterion {0:?} has an empty prompt")]
    EmptyPrompt(String),
    #[error("criterion {criterion:?} is not numbered under category {category:?}")]
    PrefixMismatch { criterion: String, category: String },
}

impl Violation {
    /// The id the violation is about.
    pub fn subject(&self) -> &str {
        match self {
            Violation::EmptyCatalogId | Violation::NoCategories => "",
            Violation::DuplicateCategory(id)
            | Violation::EmptyCategoryName(id)
            | Violation::EmptyCategory(id)
            | Violation::DuplicateCriterion(id)
            | Violation::EmptyPrompt(id) => id,
            Violation::PrefixMismatch { criterion, .. } => criterion,
        }
    }
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("malformed catalog document: {0}")]
    Parse(String),
    #[error("unsupported schema version {0:?}")]
    SchemaVersion(String),
    #[error("invalid catalog: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(vs: &[Violation]) -> String {
    vs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Checks every catalog invariant and reports all violations found.
pub fn validate_catalog(catalog: &CriteriaCatalog) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    if catalog.catalog_id.trim().is_empty() {
        out.push(Violation::EmptyCatalogId);
    }
    if catalog.categories.is_empty() {
        out.push(Violation::NoCategories);
    }
    let mut cat_ids = HashSet::new();
    let mut crit_ids = HashSet::new();
    for cat in &catalog.categories {
        if !cat_ids.insert(cat.id.as_str()) {
            out.push(Violation::DuplicateCategory(cat.id.clone()));
        }
        if cat.name.trim().is_empty() {
            out.push(Violation::EmptyCategoryName(cat.id.clone()));
        }
        if cat.criteria.is_empty() {
            out.push(Violation::EmptyCategory(cat.id.clone()));
        }
        for crit in &cat.criteria {
            if !crit_ids.insert(crit.id.as_str()) {
                out.push(Violation::DuplicateCriterion(crit.id.clone()));
            }
            if crit.prompt.trim().is_empty() {
                out.push(Violation::EmptyPrompt(crit.id.clone()));
            }
            let prefix_ok = crit
                .id
                .split_once('.')
                .is_some_and(|(head, tail)| head == cat.id && !tail.is_empty());
            if !prefix_ok || crit.category_id != cat.id {
                out.push(Violation::PrefixMismatch {
                    criterion: crit.id.clone(),
                    category: cat.id.clone(),
                });
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Parses and validates a catalog file.
pub fn load_catalog(document: &str) -> Result<CriteriaCatalog, CatalogError> {
    let doc: CatalogDocument =
        serde_json::from_str(document).map_err(|e| CatalogError::Parse(e.to_string()))?;
    if let Some(v) = doc.schema_version {
        if v != SCHEMA_VERSION {
            return Err(CatalogError::SchemaVersion(v));
        }
    }
    let catalog = CriteriaCatalog {
        catalog_id: doc.catalog_id,
        version: doc.version,
        categories: doc.categories,
    }
    .link();
    validate_catalog(&catalog).map_err(CatalogError::Invalid)?;
    Ok(catalog)
}

const FRAMEWORK: &[(&str, &[&str])] = &[
    (
        "Clarity",
        &[
            "How simple is the article narrative (i.e. avoiding unnecessary words, jargon, technical language, and the extended used of citations)?",
            "To what extent does the article use a top down structure where the initial paragraph provides the setting and main issues of the research article?",
        ],
    ),
    (
        "Succinctness",
        &[
            "To what extent does the article length match the effort required by students, as stipulated by the course, to allow them to conduct an optimal analysis of it?",
            "To what extent does the article provide sufficient information to allow students to develop coherent conclusions?",
            "To what extent does the article focus on the findings, rather than the inputs such as the literature review or the research methodology?",
        ],
    ),
    (
        "Objectiveness",
        &["To what extent is the article written in a neutral, unbiased manner, allowing students to develop their own opinion?"],
    ),
    (
        "Realism",
        &[
            "To what extent does the article incorporate real world examples?",
            "How authentic does the article seem given the level of evidence and facts presented?",
            "To what extent does the article cite participants to increase its realism?",
        ],
    ),
    (
        "Timeliness",
        &["To what extent are the research article's findings up-to-date?"],
    ),
    (
        "Teaching friendliness",
        &["To what extent has the article been previously assessed for use in other teaching programs?"],
    ),
    (
        "Depth",
        &[
            "To what extent does the article provide multiple perspectives from different stakeholders?",
            "To what extent does the article provide distractors (non-pertinent features) to challenge students' analytical skills?",
            "To what extent does the complexity of data (qualitative and qualitative) presented by the article help to develop students' problem solving skills?",
            "To what extent does the article contain teaching aids to support student learning?",
            "To what extent does the article let students make their own decisions by not providing a diagnosis of the problem?",
            "To what extent does the article provide feedback on the possible actions of students?",
            "To what extent does the article synthesize an existing body of research for the area of study?",
        ],
    ),
    (
        "Engagement",
        &[
            "To what extent does the article's storyline have a 'hook' to engage students?",
            "To what extent does the article have an engaging storyline?",
            "To what extent does the article include human factors such as cultural, socio-political factors, and ethical issues?",
            "To what extent does the article include controversy, contrast, conflict, dilemma, or other dramatic elements?",
            "To what extent does the article gradually disclose the content?",
            "To what extent does the article allow students to 'learn by doing'?",
        ],
    ),
    (
        "Relevance to practice",
        &[
            "To what extent does the article describe current practitioner issues?",
            "To what extent does the article contribute with an implementable approach to resolve a practical issue?",
            "To what extent does the article stimulate a reader's casual assumptions by identifying emerging trends, structural changes or paradigms?",
            "To what extent does the article reflect collaboration between researchers and practitioners?",
        ],
    ),
    (
        "Teaching objectives focus",
        &[
            "To what extent is the article applicable to the subject area?",
            "To what extent does the article fit into the teaching objectives of the subject?",
            "To what extent does the difficulty of the article match the ability of students in the subject?",
        ],
    ),
    (
        "Thinking skills development",
        &[
            "To what extent does the article enable students to develop problem solving skills?",
            "To what extent does the article enable students to develop critical thinking skills?",
        ],
    ),
];

/// The built-in article suitability framework.
pub fn builtin_catalog() -> CriteriaCatalog {
    let categories = FRAMEWORK
        .iter()
        .enumerate()
        .map(|(i, (name, prompts))| {
            let cat_id = (i + 1).to_string();
            let criteria = prompts
                .iter()
                .enumerate()
                .map(|(j, p)| (format!("{cat_id}.{}", j + 1), *p));
            Category::new(cat_id.clone(), *name, criteria)
        })
        .collect();
    CriteriaCatalog {
        catalog_id: BUILTIN_CATALOG_ID.to_string(),
        version: BUILTIN_CATALOG_VERSION.to_string(),
        categories,
    }
}
