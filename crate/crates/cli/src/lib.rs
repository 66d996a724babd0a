//! The `rubric` command line.
//!
//! Every command that touches the store goes through
//! [`rubric_service::ops`], so the CLI and the HTTP API share behaviour and
//! error codes. Read commands print tables, or JSON with `--json`.

mod demo;
mod render;

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use indexmap::IndexMap;
use rubric_core::{ApiError, ArticleRecord, CatalogRef, ErrorCode, FileStore};
use rubric_service::ops::{self, ScoreValue};
use serde::Serialize;

pub use demo::demo_trace;

/// Store directory used when neither `--store` nor `RUBRIC_STORE` is given.
pub const DEFAULT_STORE: &str = "rubric-store";

#[derive(Debug, Parser)]
#[command(
    name = "rubric",
    version,
    about = "Rate research articles against a weighted criteria rubric"
)]
pub struct Cli {
    /// Store directory.
    #[arg(long, global = true, env = "RUBRIC_STORE", default_value = DEFAULT_STORE)]
    pub store: PathBuf,
    /// Print machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a store (installs the built-in catalog).
    Init,
    #[command(subcommand)]
    Catalog(CatalogCmd),
    #[command(subcommand)]
    Profile(ProfileCmd),
    #[command(subcommand)]
    Article(ArticleCmd),
    #[command(subcommand)]
    Assess(AssessCmd),
    /// Rate one complete assessment.
    Rate { assessment: String },
    /// Rank the complete assessments under a profile revision.
    Rank(ProfileSel),
    /// Re-rank with transient importance changes, or scan every one-step change.
    Whatif {
        #[command(flatten)]
        profile: ProfileSel,
        /// Importance change, `<category or criterion id>=<0..5>`; repeatable.
        #[arg(
            long = "set",
            value_name = "ID=VALUE",
            required_unless_present = "scan"
        )]
        set: Vec<String>,
        /// Flag the targets where a one-step change reverses some ranking.
        #[arg(long, conflicts_with = "set")]
        scan: bool,
    },
    #[command(subcommand)]
    Export(ExportCmd),
    /// Import a score sheet CSV as assessments under a profile revision.
    Import {
        file: PathBuf,
        #[command(flatten)]
        profile: ProfileSel,
    },
    /// Walk through the two-category worked example step by step.
    Demo,
    /// Run the HTTP API.
    Serve {
        #[arg(long, env = "RUBRIC_ADDR", default_value = rubric_service::DEFAULT_ADDR)]
        addr: SocketAddr,
        /// Origin allowed by CORS; any origin when omitted.
        #[arg(long, env = "RUBRIC_CORS_ORIGIN")]
        cors_origin: Option<String>,
    },
    /// List the error codes commands and the API can report.
    ErrorCodes,
}

#[derive(Debug, Args)]
pub struct ProfileSel {
    #[arg(long)]
    pub profile: String,
    /// Profile revision; the latest when omitted.
    #[arg(long)]
    pub revision: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum CatalogCmd {
    List,
    /// Show a catalog; the built-in one by default.
    Show {
        #[arg(default_value = "builtin")]
        id: String,
        #[arg(long)]
        version: Option<String>,
    },
    /// Add a catalog from a JSON document.
    Import {
        file: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum ProfileCmd {
    List,
    /// Create a profile; importances not set are 0.
    Create {
        id: String,
        #[arg(long)]
        name: String,
        /// Catalog as `<id>@<version>`; the built-in catalog by default.
        #[arg(long)]
        catalog: Option<String>,
        /// `<category or criterion id>=<0..5>`; repeatable.
        #[arg(long = "set", value_name = "ID=VALUE")]
        set: Vec<String>,
    },
    /// Weights for importances without storing anything.
    Preview {
        #[arg(long)]
        catalog: Option<String>,
        #[arg(long = "set", value_name = "ID=VALUE", required = true)]
        set: Vec<String>,
    },
    /// Commit a new revision with changed importances.
    SetImportance {
        id: String,
        /// `<category or criterion id>=<0..5>` pairs.
        #[arg(value_name = "ID=VALUE", required = true)]
        pairs: Vec<String>,
        /// Revision the change is based on; the latest when omitted.
        #[arg(long)]
        revision: Option<u64>,
        #[arg(long)]
        name: Option<String>,
    },
    Show {
        id: String,
        #[arg(long)]
        revision: Option<u64>,
    },
    Delete {
        id: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum ArticleCmd {
    List,
    Add {
        id: String,
        #[command(flatten)]
        fields: ArticleFields,
    },
    Edit {
        id: String,
        /// Revision the change is based on; the latest when omitted.
        #[arg(long)]
        revision: Option<u64>,
        #[command(flatten)]
        fields: ArticleFields,
    },
    Show {
        id: String,
    },
    Delete {
        id: String,
    },
}

#[derive(Debug, Args)]
pub struct ArticleFields {
    #[arg(long)]
    pub title: Option<String>,
    #[arg(long)]
    pub authors: Option<String>,
    #[arg(long)]
    pub year: Option<i32>,
    #[arg(long)]
    pub source: Option<String>,
    #[arg(long)]
    pub notes: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum AssessCmd {
    /// List assessments, optionally only those under one profile.
    List {
        #[arg(long)]
        profile: Option<String>,
        #[arg(long, requires = "profile")]
        revision: Option<u64>,
    },
    /// Start an assessment of an article under a profile revision.
    New {
        article: String,
        #[command(flatten)]
        profile: ProfileSel,
        /// Assessment id; derived from article and profile when omitted.
        #[arg(long)]
        id: Option<String>,
        /// `<criterion id>=<1..5|NA>`; repeatable.
        #[arg(long = "score", value_name = "ID=SCORE")]
        scores: Vec<String>,
    },
    /// Record scores: `<criterion id>=<1..5|NA>`, or `<criterion id>=` to clear.
    Score {
        id: String,
        #[arg(value_name = "ID=SCORE", required = true)]
        pairs: Vec<String>,
        /// Revision the change is based on; the latest when omitted.
        #[arg(long)]
        revision: Option<u64>,
    },
    Show {
        id: String,
    },
    Delete {
        id: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum ExportCmd {
    /// Ranked ratings report as CSV.
    Ratings {
        #[command(flatten)]
        profile: ProfileSel,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Score sheet CSV in the import format.
    Scores {
        #[command(flatten)]
        profile: ProfileSel,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

fn usage(message: impl Into<String>) -> ApiError {
    ApiError::new(ErrorCode::BadRequest, message)
}

fn split_pair(pair: &str) -> Result<(&str, &str), ApiError> {
    pair.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| usage(format!("expected ID=VALUE, got {pair:?}")))
}

/// Category and criterion importances, in that order.
type Importances = (IndexMap<String, i64>, IndexMap<String, i64>);

fn importance_pairs(pairs: &[String]) -> Result<Importances, ApiError> {
    let mut categories = IndexMap::new();
    let mut criteria = IndexMap::new();
    for p in pairs {
        let (id, v) = split_pair(p)?;
        let v: i64 = v.parse().map_err(|_| {
            usage(format!(
                "importance for {id:?} must be an integer, got {v:?}"
            ))
        })?;
        // Criterion ids are dotted; category ids are not.
        if id.contains('.') {
            criteria.insert(id.to_string(), v);
        } else {
            categories.insert(id.to_string(), v);
        }
    }
    Ok((categories, criteria))
}

fn score_value(v: &str) -> ScoreValue {
    match v.parse::<i64>() {
        Ok(n) => ScoreValue::Number(n),
        Err(_) => ScoreValue::Text(v.to_string()),
    }
}

fn catalog_ref(s: &str) -> Result<CatalogRef, ApiError> {
    s.split_once('@')
        .map(|(id, version)| CatalogRef {
            catalog_id: id.to_string(),
            version: version.to_string(),
        })
        .ok_or_else(|| usage(format!("catalog must be <id>@<version>, got {s:?}")))
}

fn read_file(path: &Path) -> Result<String, ApiError> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn write_output(out: &mut dyn Write, path: Option<&Path>, doc: &str) -> Result<(), ApiError> {
    match path {
        Some(p) => std::fs::write(p, doc).map_err(|e| {
            ApiError::new(
                ErrorCode::StoreError,
                format!("cannot write {}: {e}", p.display()),
            )
        }),
        None => emit(out, doc),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), ApiError> {
    out.write_all(text.as_bytes())
        .map_err(|e| ApiError::new(ErrorCode::StoreError, format!("cannot write output: {e}")))
}

/// Prints `value` as JSON, or the table `render` produces.
fn show<T: Serialize>(
    out: &mut dyn Write,
    json: bool,
    value: &T,
    render: impl FnOnce(&T) -> String,
) -> Result<(), ApiError> {
    if json {
        let mut s = serde_json::to_string_pretty(value).expect("responses serialize");
        s.push('\n');
        emit(out, &s)
    } else {
        emit(out, &render(value))
    }
}

fn open(cli: &Cli) -> Result<FileStore, ApiError> {
    Ok(FileStore::open(&cli.store)?)
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), ApiError> {
    let json = cli.json;
    match &cli.command {
        Command::Init => {
            FileStore::init(&cli.store)?;
            emit(
                out,
                &format!("initialized store at {}\n", cli.store.display()),
            )
        }
        Command::Demo => {
            if json {
                let (catalog, profile, _, assessment) = rubric_core::fixture::worked_example();
                let report = rubric_core::rate(&catalog, &profile, &assessment)?;
                show(out, true, &report, |_| String::new())
            } else {
                emit(out, &demo_trace())
            }
        }
        Command::ErrorCodes => show(out, json, &ErrorCode::ALL, |codes| {
            codes.iter().map(|c| format!("{c}\n")).collect()
        }),
        Command::Serve { addr, cors_origin } => {
            let config = rubric_service::ServiceConfig {
                addr: *addr,
                store_root: cli.store.clone(),
                cors_origin: cors_origin.clone(),
            };
            let rt = tokio::runtime::Runtime::new().map_err(|e| {
                ApiError::new(ErrorCode::StoreError, format!("cannot start runtime: {e}"))
            })?;
            rt.block_on(async {
                let server = rubric_service::Server::bind(&config)
                    .await
                    .map_err(serve_error)?;
                if let Ok(a) = server.local_addr() {
                    emit(
                        out,
                        &format!("serving {} on http://{a}\n", cli.store.display()),
                    )?;
                    let _ = out.flush();
                }
                server
                    .run(rubric_service::shutdown_signal())
                    .await
                    .map_err(serve_error)
            })
        }
        Command::Catalog(cmd) => catalog(cli, cmd, out),
        Command::Profile(cmd) => profile(cli, cmd, out),
        Command::Article(cmd) => article(cli, cmd, out),
        Command::Assess(cmd) => assess(cli, cmd, out),
        Command::Rate { assessment } => {
            let store = open(cli)?;
            let report = ops::rating(&store, assessment)?;
            show(out, json, &report, render::rating)
        }
        Command::Rank(sel) => {
            let store = open(cli)?;
            let view = ops::ranking(&store, &sel.profile, sel.revision)?;
            show(out, json, &view, render::ranking)
        }
        Command::Whatif { profile, set, scan } => {
            let store = open(cli)?;
            if *scan {
                let flags = ops::stability(&store, &profile.profile, profile.revision)?;
                return show(out, json, &flags, render::stability);
            }
            let mut deltas = Vec::new();
            for p in set {
                let (target, v) = split_pair(p)?;
                let new_importance = v.parse().map_err(|_| {
                    usage(format!(
                        "importance for {target:?} must be an integer, got {v:?}"
                    ))
                })?;
                deltas.push(ops::DeltaInput {
                    target: target.to_string(),
                    new_importance,
                });
            }
            let req = ops::WhatIfRequest {
                profile_id: profile.profile.clone(),
                profile_revision: profile.revision,
                deltas,
            };
            let report = ops::whatif(&store, &req)?;
            show(out, json, &report, render::whatif)
        }
        Command::Export(ExportCmd::Ratings { profile, output }) => {
            let store = open(cli)?;
            let doc = ops::export_ratings_csv(&store, &profile.profile, profile.revision)?;
            write_output(out, output.as_deref(), &doc)
        }
        Command::Export(ExportCmd::Scores { profile, output }) => {
            let store = open(cli)?;
            let doc = ops::export_scores_csv(&store, &profile.profile, profile.revision)?;
            write_output(out, output.as_deref(), &doc)
        }
        Command::Import { file, profile } => {
            let store = open(cli)?;
            let doc = read_file(file)?;
            let imported =
                ops::import_scores_csv(&store, &profile.profile, profile.revision, &doc)?;
            show(out, json, &imported, |v| render::assessments(v))
        }
    }
}

fn serve_error(e: rubric_service::ServeError) -> ApiError {
    match e {
        rubric_service::ServeError::Store(s) => s.into(),
        other => ApiError::new(ErrorCode::StoreError, other.to_string()),
    }
}

fn catalog(cli: &Cli, cmd: &CatalogCmd, out: &mut dyn Write) -> Result<(), ApiError> {
    let store = open(cli)?;
    match cmd {
        CatalogCmd::List => {
            let refs = ops::list_catalogs(&store)?;
            show(out, cli.json, &refs, |v| {
                v.iter().map(|r| format!("{r}\n")).collect()
            })
        }
        CatalogCmd::Show { id, version } => {
            let c = ops::get_catalog(&store, id, version.as_deref())?;
            show(out, cli.json, &c, render::catalog)
        }
        CatalogCmd::Import { file } => {
            let r = ops::import_catalog(&store, &read_file(file)?)?;
            show(out, cli.json, &r, |r| format!("catalog {r} stored\n"))
        }
    }
}

fn profile(cli: &Cli, cmd: &ProfileCmd, out: &mut dyn Write) -> Result<(), ApiError> {
    let store = open(cli)?;
    match cmd {
        ProfileCmd::List => {
            let all = ops::list_profiles(&store)?;
            show(out, cli.json, &all, |v| render::profile_list(v))
        }
        ProfileCmd::Create {
            id,
            name,
            catalog,
            set,
        } => {
            let (category_importance, criterion_importance) = importance_pairs(set)?;
            let input = ops::ProfileInput {
                profile_id: id.clone(),
                name: name.clone(),
                catalog_ref: catalog.as_deref().map(catalog_ref).transpose()?,
                category_importance,
                criterion_importance,
            };
            let v = ops::create_profile(&store, &input)?;
            show(out, cli.json, &v, render::profile)
        }
        ProfileCmd::Preview { catalog, set } => {
            let (category_importance, criterion_importance) = importance_pairs(set)?;
            let input = ops::ProfileInput {
                profile_id: "preview".into(),
                name: "preview".into(),
                catalog_ref: catalog.as_deref().map(catalog_ref).transpose()?,
                category_importance,
                criterion_importance,
            };
            let w = ops::preview_weights(&store, &input)?;
            show(out, cli.json, &w, render::weights)
        }
        ProfileCmd::SetImportance {
            id,
            pairs,
            revision,
            name,
        } => {
            let (category_importance, criterion_importance) = importance_pairs(pairs)?;
            let base = match revision {
                Some(r) => *r,
                None => store.get_profile(id)?.revision,
            };
            let patch = ops::ProfilePatch {
                revision: base,
                name: name.clone(),
                category_importance,
                criterion_importance,
            };
            let v = ops::update_profile(&store, id, &patch)?;
            show(out, cli.json, &v, render::profile)
        }
        ProfileCmd::Show { id, revision } => {
            let v = ops::get_profile(&store, id, *revision)?;
            show(out, cli.json, &v, render::profile)
        }
        ProfileCmd::Delete { id } => {
            ops::delete_profile(&store, id)?;
            emit(out, &format!("profile {id} deleted\n"))
        }
    }
}

fn article(cli: &Cli, cmd: &ArticleCmd, out: &mut dyn Write) -> Result<(), ApiError> {
    let store = open(cli)?;
    match cmd {
        ArticleCmd::List => {
            let all = ops::list_articles(&store)?;
            show(out, cli.json, &all, |v| render::article_list(v))
        }
        ArticleCmd::Add { id, fields } => {
            let mut a = ArticleRecord::new(id.clone(), fields.title.clone().unwrap_or_default());
            a.authors = fields.authors.clone();
            a.year = fields.year;
            a.source = fields.source.clone();
            a.notes = fields.notes.clone();
            let a = ops::create_article(&store, &a)?;
            show(out, cli.json, &a, render::article)
        }
        ArticleCmd::Edit {
            id,
            revision,
            fields,
        } => {
            let base = match revision {
                Some(r) => *r,
                None => store.get_article(id)?.revision,
            };
            let patch = ops::ArticlePatch {
                revision: base,
                title: fields.title.clone(),
                authors: fields.authors.clone(),
                year: fields.year,
                source: fields.source.clone(),
                notes: fields.notes.clone(),
            };
            let a = ops::update_article(&store, id, &patch)?;
            show(out, cli.json, &a, render::article)
        }
        ArticleCmd::Show { id } => {
            let a = ops::get_article(&store, id)?;
            show(out, cli.json, &a, render::article)
        }
        ArticleCmd::Delete { id } => {
            ops::delete_article(&store, id)?;
            emit(out, &format!("article {id} deleted\n"))
        }
    }
}

fn assess(cli: &Cli, cmd: &AssessCmd, out: &mut dyn Write) -> Result<(), ApiError> {
    let store = open(cli)?;
    match cmd {
        AssessCmd::List { profile, revision } => {
            let all = ops::list_assessments(&store, profile.as_deref(), *revision)?;
            show(out, cli.json, &all, |v| render::assessments(v))
        }
        AssessCmd::New {
            article,
            profile,
            id,
            scores,
        } => {
            let mut map = IndexMap::new();
            for p in scores {
                let (k, v) = split_pair(p)?;
                map.insert(k.to_string(), score_value(v));
            }
            let input = ops::AssessmentInput {
                assessment_id: id.clone(),
                article_id: article.clone(),
                profile_id: profile.profile.clone(),
                profile_revision: profile.revision,
                scores: map,
            };
            let a = ops::create_assessment(&store, &input)?;
            show(out, cli.json, &a, render::assessment)
        }
        AssessCmd::Score {
            id,
            pairs,
            revision,
        } => {
            let mut map = IndexMap::new();
            for p in pairs {
                let (k, v) = split_pair(p)?;
                map.insert(k.to_string(), (!v.is_empty()).then(|| score_value(v)));
            }
            let base = match revision {
                Some(r) => *r,
                None => store.get_assessment(id)?.revision,
            };
            let a = ops::update_assessment(
                &store,
                id,
                &ops::ScorePatch {
                    revision: base,
                    scores: map,
                },
            )?;
            show(out, cli.json, &a, render::assessment)
        }
        AssessCmd::Show { id } => {
            let a = ops::get_assessment(&store, id)?;
            show(out, cli.json, &a, render::assessment)
        }
        AssessCmd::Delete { id } => {
            ops::delete_assessment(&store, id)?;
            emit(out, &format!("assessment {id} deleted\n"))
        }
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code:
/// 0 on success, 1 for domain errors (code printed on stderr), 2 for usage
/// errors.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(rendered.as_bytes());
            } else {
                let _ = err.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            if cli.json {
                let _ = writeln!(
                    err,
                    "{}",
                    serde_json::to_string(&e).expect("errors serialize")
                );
            } else {
                let _ = writeln!(err, "error[{}]: {}", e.code, e.message);
            }
            if e.code == ErrorCode::BadRequest {
                2
            } else {
                1
            }
        }
    }
}
