//! File-backed entity store.
//!
//! Layout under the store root:
//!
//! ```text
//! store.json                       {"schema_version": "1"}
//! catalogs/<catalog_id>/<version>.json
//! profiles/<profile_id>/r<revision>.json
//! articles/<article_id>/r<revision>.json
//! assessments/<assessment_id>/r<revision>.json
//! .tmp/                            staging area, never read
//! ```
//!
//! Every document carries `schema_version`. A put stages the document in
//! `.tmp/` and publishes it with a hard link, which fails if the target
//! exists; the link is the optimistic revision check. Old revisions are kept,
//! so an assessment can always be re-rated against the profile revision it
//! pins.

mod exchange;

pub use exchange::{export_assessment_csv, export_ratings, import_assessment_csv, ExchangeError};

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use walkdir::WalkDir;

use crate::catalog::{
    builtin_catalog, load_catalog, validate_catalog, CatalogError, CatalogRef, CriteriaCatalog,
};
use crate::evaluation::{
    completeness, ArticleRecord, Assessment, EvaluationError, ProfileRef, WeightProfile,
};
use crate::SCHEMA_VERSION;

const MARKER: &str = "store.json";
const STAGING: &str = ".tmp";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntityKind {
    Catalog,
    Profile,
    Article,
    Assessment,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Catalog => "catalog",
            EntityKind::Profile => "profile",
            EntityKind::Article => "article",
            EntityKind::Assessment => "assessment",
        }
    }

    fn dir(self) -> &'static str {
        match self {
            EntityKind::Catalog => "catalogs",
            EntityKind::Profile => "profiles",
            EntityKind::Article => "articles",
            EntityKind::Assessment => "assessments",
        }
    }
}

impl std::fmt::Display for EntityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{kind} {id:?} not found")]
    NotFound { kind: EntityKind, id: String },
    #[error("{kind} {id:?}: revision {found} is stale, expected {expected}")]
    Conflict {
        kind: EntityKind,
        id: String,
        expected: u64,
        found: u64,
    },
    #[error("{kind} {id:?} is still referenced by {by}")]
    Referenced {
        kind: EntityKind,
        id: String,
        by: String,
    },
    #[error("invalid id {0:?}: use letters, digits, '-', '_' or '.'")]
    InvalidId(String),
    #[error("integrity: {0}")]
    Integrity(String),
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("unsupported schema version {0:?}")]
    SchemaVersion(String),
    #[error("{0} is not an initialized store")]
    NotInitialized(PathBuf),
    #[error("corrupt document {path}: {message}")]
    Corrupt { path: PathBuf, message: String },
    #[error("store I/O: {0}")]
    Io(#[from] io::Error),
}

pub type Result<T, E = StoreError> = std::result::Result<T, E>;

#[derive(Serialize)]
struct EnvelopeOut<'a, T> {
    schema_version: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

#[derive(Deserialize)]
struct EnvelopeIn<T> {
    schema_version: String,
    #[serde(flatten)]
    body: T,
}

#[derive(Serialize, Deserialize)]
struct Marker {
    schema_version: String,
}

/// Serializes an entity in its store document form.
pub fn to_document<T: Serialize>(entity: &T) -> String {
    serde_json::to_string_pretty(&EnvelopeOut {
        schema_version: SCHEMA_VERSION,
        body: entity,
    })
    .expect("entities serialize")
}

/// Parses a store document, rejecting unknown schema versions.
pub fn from_document<T: DeserializeOwned>(text: &str) -> Result<T, String> {
    let env: EnvelopeIn<T> = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if env.schema_version != SCHEMA_VERSION {
        return Err(format!(
            "unsupported schema version {:?}",
            env.schema_version
        ));
    }
    Ok(env.body)
}

fn check_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id.len() <= 128
        && !id.starts_with('.')
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(StoreError::InvalidId(id.to_string()))
    }
}

fn revision_file(rev: u64) -> String {
    format!("r{rev:010}.json")
}

fn parse_revision(name: &str) -> Option<u64> {
    name.strip_prefix('r')?.strip_suffix(".json")?.parse().ok()
}

static STAGE_SEQ: AtomicU64 = AtomicU64::new(0);

#[derive(Debug, Clone)]
pub struct FileStore {
    root: PathBuf,
}

impl FileStore {
    /// Creates (or re-opens) a store and installs the built-in catalog.
    pub fn init(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(&root)?;
        let marker = root.join(MARKER);
        if marker.exists() {
            Self::check_marker(&marker)?;
        } else {
            let body = serde_json::to_string_pretty(&Marker {
                schema_version: SCHEMA_VERSION.to_string(),
            })
            .expect("marker serializes");
            fs::write(&marker, body)?;
        }
        for kind in [
            EntityKind::Catalog,
            EntityKind::Profile,
            EntityKind::Article,
            EntityKind::Assessment,
        ] {
            fs::create_dir_all(root.join(kind.dir()))?;
        }
        fs::create_dir_all(root.join(STAGING))?;
        let store = FileStore { root };
        let builtin = builtin_catalog();
        if !store.catalog_path(&builtin.reference()).exists() {
            store.put_catalog(&builtin)?;
        }
        Ok(store)
    }

    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        let marker = root.join(MARKER);
        if !marker.exists() {
            return Err(StoreError::NotInitialized(root));
        }
        Self::check_marker(&marker)?;
        Ok(FileStore { root })
    }

    fn check_marker(path: &Path) -> Result<()> {
        let text = fs::read_to_string(path)?;
        let marker: Marker = serde_json::from_str(&text).map_err(|e| StoreError::Corrupt {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if marker.schema_version != SCHEMA_VERSION {
            return Err(StoreError::SchemaVersion(marker.schema_version));
        }
        Ok(())
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn entity_dir(&self, kind: EntityKind, id: &str) -> PathBuf {
        self.root.join(kind.dir()).join(id)
    }

    fn catalog_path(&self, r: &CatalogRef) -> PathBuf {
        self.entity_dir(EntityKind::Catalog, &r.catalog_id)
            .join(format!("{}.json", r.version))
    }

    /// Writes `body` to `target` only if `target` does not exist yet.
    /// Returns `Ok(false)` when it already exists.
    fn publish(&self, target: &Path, body: &str) -> Result<bool> {
        let staging = self.root.join(STAGING);
        fs::create_dir_all(&staging)?;
        let tmp = staging.join(format!(
            "{}-{}.json",
            std::process::id(),
            STAGE_SEQ.fetch_add(1, Ordering::Relaxed)
        ));
        let parent = target.parent().expect("entity paths have a parent");
        let created_parent = !parent.exists();
        let outcome = (|| -> io::Result<bool> {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(body.as_bytes())?;
            f.sync_all()?;
            drop(f);
            fs::create_dir_all(parent)?;
            match fs::hard_link(&tmp, target) {
                Ok(()) => Ok(true),
                Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Ok(false),
                Err(e) => Err(e),
            }
        })();
        let _ = fs::remove_file(&tmp);
        if !matches!(outcome, Ok(true)) && created_parent {
            let _ = fs::remove_dir(parent);
        }
        Ok(outcome?)
    }

    fn read_doc<T: DeserializeOwned>(&self, path: &Path) -> Result<T> {
        let text = fs::read_to_string(path)?;
        from_document(&text).map_err(|message| StoreError::Corrupt {
            path: path.to_path_buf(),
            message,
        })
    }

    fn revisions(&self, kind: EntityKind, id: &str) -> Result<Vec<u64>> {
        let dir = self.entity_dir(kind, id);
        let mut revs = Vec::new();
        match fs::read_dir(&dir) {
            Ok(entries) => {
                for e in entries {
                    if let Some(r) = parse_revision(&e?.file_name().to_string_lossy()) {
                        revs.push(r);
                    }
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(e.into()),
        }
        revs.sort_unstable();
        Ok(revs)
    }

    fn ids(&self, kind: EntityKind) -> Result<Vec<String>> {
        let mut ids = Vec::new();
        for e in fs::read_dir(self.root.join(kind.dir()))? {
            let e = e?;
            if e.file_type()?.is_dir() {
                ids.push(e.file_name().to_string_lossy().into_owned());
            }
        }
        ids.sort();
        Ok(ids)
    }

    fn put_revision<T: Serialize>(
        &self,
        kind: EntityKind,
        id: &str,
        revision: u64,
        entity: &T,
    ) -> Result<()> {
        let latest = self.revisions(kind, id)?.last().copied().unwrap_or(0);
        let expected = latest + 1;
        let conflict = || StoreError::Conflict {
            kind,
            id: id.to_string(),
            expected,
            found: revision,
        };
        if revision != expected {
            return Err(conflict());
        }
        let target = self.entity_dir(kind, id).join(revision_file(revision));
        if self.publish(&target, &to_document(entity))? {
            Ok(())
        } else {
            Err(conflict())
        }
    }

    fn get_latest<T: DeserializeOwned>(&self, kind: EntityKind, id: &str) -> Result<T> {
        check_id(id)?;
        let rev =
            self.revisions(kind, id)?
                .last()
                .copied()
                .ok_or_else(|| StoreError::NotFound {
                    kind,
                    id: id.to_string(),
                })?;
        self.read_doc(&self.entity_dir(kind, id).join(revision_file(rev)))
    }

    fn remove_entity(&self, kind: EntityKind, id: &str) -> Result<()> {
        let dir = self.entity_dir(kind, id);
        if !dir.exists() {
            return Err(StoreError::NotFound {
                kind,
                id: id.to_string(),
            });
        }
        // Move out of sight first so readers never see a half-deleted entity.
        let grave = self.root.join(STAGING).join(format!(
            "deleted-{}-{}-{}",
            kind.as_str(),
            std::process::id(),
            STAGE_SEQ.fetch_add(1, Ordering::Relaxed)
        ));
        fs::rename(&dir, &grave)?;
        fs::remove_dir_all(&grave)?;
        Ok(())
    }

    // ----- catalogs -----

    /// Stores a catalog version. Versions are immutable, so re-putting an
    /// existing id and version is a conflict.
    pub fn put_catalog(&self, catalog: &CriteriaCatalog) -> Result<()> {
        check_id(&catalog.catalog_id)?;
        check_id(&catalog.version)?;
        validate_catalog(catalog).map_err(|v| StoreError::Catalog(CatalogError::Invalid(v)))?;
        let path = self.catalog_path(&catalog.reference());
        if self.publish(&path, &catalog.to_document())? {
            Ok(())
        } else {
            Err(StoreError::Conflict {
                kind: EntityKind::Catalog,
                id: catalog.reference().to_string(),
                expected: 0,
                found: 0,
            })
        }
    }

    pub fn get_catalog(&self, r: &CatalogRef) -> Result<CriteriaCatalog> {
        check_id(&r.catalog_id)?;
        check_id(&r.version)?;
        let path = self.catalog_path(r);
        match fs::read_to_string(&path) {
            Ok(text) => load_catalog(&text).map_err(|e| StoreError::Corrupt {
                path,
                message: e.to_string(),
            }),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Err(StoreError::NotFound {
                kind: EntityKind::Catalog,
                id: r.to_string(),
            }),
            Err(e) => Err(e.into()),
        }
    }

    /// Latest version of a catalog, by lexical version order.
    pub fn get_latest_catalog(&self, catalog_id: &str) -> Result<CriteriaCatalog> {
        let r = self
            .list_catalogs()?
            .into_iter()
            .rfind(|r| r.catalog_id == catalog_id)
            .ok_or_else(|| StoreError::NotFound {
                kind: EntityKind::Catalog,
                id: catalog_id.to_string(),
            })?;
        self.get_catalog(&r)
    }

    pub fn list_catalogs(&self) -> Result<Vec<CatalogRef>> {
        let mut out = Vec::new();
        for id in self.ids(EntityKind::Catalog)? {
            for e in fs::read_dir(self.entity_dir(EntityKind::Catalog, &id))? {
                let name = e?.file_name().to_string_lossy().into_owned();
                if let Some(version) = name.strip_suffix(".json") {
                    out.push(CatalogRef {
                        catalog_id: id.clone(),
                        version: version.to_string(),
                    });
                }
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn delete_catalog(&self, r: &CatalogRef) -> Result<()> {
        let path = self.catalog_path(r);
        if !path.exists() {
            return Err(StoreError::NotFound {
                kind: EntityKind::Catalog,
                id: r.to_string(),
            });
        }
        if let Some(p) = self
            .list_profiles()?
            .into_iter()
            .find(|p| &p.catalog_ref == r)
        {
            return Err(StoreError::Referenced {
                kind: EntityKind::Catalog,
                id: r.to_string(),
                by: format!("profile {:?}", p.profile_id),
            });
        }
        fs::remove_file(&path)?;
        let _ = fs::remove_dir(path.parent().expect("catalog dir"));
        Ok(())
    }

    // ----- profiles -----

    /// Stores the next revision of a profile. The profile's revision must be
    /// exactly one past the latest stored revision (1 for a new profile).
    pub fn put_profile(&self, profile: &WeightProfile) -> Result<()> {
        check_id(&profile.profile_id)?;
        let catalog = self.get_catalog(&profile.catalog_ref)?;
        profile.validate(&catalog)?;
        self.put_revision(
            EntityKind::Profile,
            &profile.profile_id,
            profile.revision,
            profile,
        )
    }

    pub fn get_profile(&self, profile_id: &str) -> Result<WeightProfile> {
        self.get_latest(EntityKind::Profile, profile_id)
    }

    pub fn get_profile_revision(&self, r: &ProfileRef) -> Result<WeightProfile> {
        check_id(&r.profile_id)?;
        let path = self
            .entity_dir(EntityKind::Profile, &r.profile_id)
            .join(revision_file(r.revision));
        if !path.exists() {
            return Err(StoreError::NotFound {
                kind: EntityKind::Profile,
                id: r.to_string(),
            });
        }
        self.read_doc(&path)
    }

    pub fn profile_revisions(&self, profile_id: &str) -> Result<Vec<u64>> {
        check_id(profile_id)?;
        self.revisions(EntityKind::Profile, profile_id)
    }

    /// Latest revision of every profile.
    pub fn list_profiles(&self) -> Result<Vec<WeightProfile>> {
        self.ids(EntityKind::Profile)?
            .iter()
            .map(|id| self.get_profile(id))
            .collect()
    }

    pub fn delete_profile(&self, profile_id: &str) -> Result<()> {
        check_id(profile_id)?;
        if let Some(a) = self
            .list_assessments()?
            .into_iter()
            .find(|a| a.profile_ref.profile_id == profile_id)
        {
            return Err(StoreError::Referenced {
                kind: EntityKind::Profile,
                id: profile_id.to_string(),
                by: format!("assessment {:?}", a.assessment_id),
            });
        }
        self.remove_entity(EntityKind::Profile, profile_id)
    }

    // ----- articles -----

    pub fn put_article(&self, article: &ArticleRecord) -> Result<()> {
        check_id(&article.article_id)?;
        article.validate()?;
        self.put_revision(
            EntityKind::Article,
            &article.article_id,
            article.revision,
            article,
        )
    }

    pub fn get_article(&self, article_id: &str) -> Result<ArticleRecord> {
        self.get_latest(EntityKind::Article, article_id)
    }

    pub fn list_articles(&self) -> Result<Vec<ArticleRecord>> {
        self.ids(EntityKind::Article)?
            .iter()
            .map(|id| self.get_article(id))
            .collect()
    }

    pub fn delete_article(&self, article_id: &str) -> Result<()> {
        check_id(article_id)?;
        if let Some(a) = self
            .list_assessments()?
            .into_iter()
            .find(|a| a.article_ref == article_id)
        {
            return Err(StoreError::Referenced {
                kind: EntityKind::Article,
                id: article_id.to_string(),
                by: format!("assessment {:?}", a.assessment_id),
            });
        }
        self.remove_entity(EntityKind::Article, article_id)
    }

    // ----- assessments -----

    /// Stores the next revision of an assessment after checking that its
    /// article, profile revision and catalog exist, that every score targets
    /// an effective criterion, and that the recorded status is right.
    pub fn put_assessment(&self, assessment: &Assessment) -> Result<()> {
        check_id(&assessment.assessment_id)?;
        self.get_article(&assessment.article_ref)?;
        let profile = self.get_profile_revision(&assessment.profile_ref)?;
        let catalog = self.get_catalog(&profile.catalog_ref)?;
        for (id, score) in &assessment.scores {
            let crit = catalog
                .criterion(id)
                .ok_or_else(|| EvaluationError::UnknownCriterion(id.clone()))?;
            if !profile.is_effective(crit) {
                return Err(EvaluationError::IneffectiveCriterion(id.clone()).into());
            }
            if let Some(v) = score.numeric() {
                crate::engine::CriterionScore::new(i64::from(v)).map_err(EvaluationError::from)?;
            }
        }
        let status = completeness(&catalog, &profile, &assessment.scores);
        if status != assessment.status {
            return Err(StoreError::Integrity(format!(
                "assessment {:?} is recorded as {:?} but its scores make it {:?}",
                assessment.assessment_id, assessment.status, status
            )));
        }
        self.put_revision(
            EntityKind::Assessment,
            &assessment.assessment_id,
            assessment.revision,
            assessment,
        )
    }

    pub fn get_assessment(&self, assessment_id: &str) -> Result<Assessment> {
        self.get_latest(EntityKind::Assessment, assessment_id)
    }

    pub fn list_assessments(&self) -> Result<Vec<Assessment>> {
        self.ids(EntityKind::Assessment)?
            .iter()
            .map(|id| self.get_assessment(id))
            .collect()
    }

    /// Assessments pinned to exactly this profile revision.
    pub fn assessments_for(&self, profile: &ProfileRef) -> Result<Vec<Assessment>> {
        Ok(self
            .list_assessments()?
            .into_iter()
            .filter(|a| &a.profile_ref == profile)
            .collect())
    }

    pub fn delete_assessment(&self, assessment_id: &str) -> Result<()> {
        check_id(assessment_id)?;
        self.remove_entity(EntityKind::Assessment, assessment_id)
    }

    /// SHA-256 over every stored document path and its bytes; equal digests
    /// mean equal store contents.
    pub fn content_digest(&self) -> Result<String> {
        let mut paths = Vec::new();
        for entry in WalkDir::new(&self.root).sort_by_file_name() {
            let entry = entry.map_err(io::Error::other)?;
            let rel = entry.path().strip_prefix(&self.root).expect("under root");
            if rel.starts_with(STAGING) || !entry.file_type().is_file() {
                continue;
            }
            paths.push(rel.to_path_buf());
        }
        let mut hasher = Sha256::new();
        for rel in paths {
            hasher.update(rel.to_string_lossy().as_bytes());
            hasher.update([0]);
            hasher.update(fs::read(self.root.join(&rel))?);
            hasher.update([0]);
        }
        Ok(hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect())
    }
}
