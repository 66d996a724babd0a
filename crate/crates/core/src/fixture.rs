//! The two-category worked example used by `demo`, the golden tests and the
//! acceptance suite.
//!
//! Clarity is rated 4 and Succinctness 2; within them criteria 1.1 = 5,
//! 2.1 = 4 and 2.2 = 5; the article scores 1.1 = 4, 2.1 = 5 and 2.2 = 2.
//! Everything else is excluded. The expected article rating is 34/45.

use chrono::{DateTime, TimeZone, Utc};

use crate::catalog::{builtin_catalog, CriteriaCatalog};
use crate::engine::{CriterionScore, ImportanceRating};
use crate::evaluation::{completeness, ArticleRecord, Assessment, WeightProfile};

pub const PROFILE_ID: &str = "ism-program";
pub const ARTICLE_ID: &str = "worked-example";
/// Matches `Assessment::default_id` so the score sheet CSV round-trips it.
pub const ASSESSMENT_ID: &str = "worked-example--ism-program-r1";

pub const CATEGORY_IMPORTANCE: &[(&str, u8)] = &[("1", 4), ("2", 2)];
pub const CRITERION_IMPORTANCE: &[(&str, u8)] = &[("1.1", 5), ("2.1", 4), ("2.2", 5)];
pub const SCORES: &[(&str, u8)] = &[("1.1", 4), ("2.1", 5), ("2.2", 2)];

fn epoch() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2018, 1, 1, 0, 0, 0).unwrap()
}

/// Catalog, profile, article and complete assessment of the worked example.
pub fn worked_example() -> (CriteriaCatalog, WeightProfile, ArticleRecord, Assessment) {
    let catalog = builtin_catalog();
    let mut profile = WeightProfile::new(PROFILE_ID, "Information security management", &catalog);
    profile.created_at = epoch();
    profile.updated_at = epoch();
    for (id, v) in CATEGORY_IMPORTANCE {
        profile.category_importance[*id] = ImportanceRating::new(i64::from(*v)).unwrap();
    }
    for (id, v) in CRITERION_IMPORTANCE {
        profile.criterion_importance[*id] = ImportanceRating::new(i64::from(*v)).unwrap();
    }

    let mut article = ArticleRecord::new(ARTICLE_ID, "Worked example article");
    article.notes = Some("Scores taken from the methodology walkthrough".into());

    let mut assessment = Assessment::new(ASSESSMENT_ID, ARTICLE_ID, &profile);
    assessment.updated_at = epoch();
    for (id, v) in SCORES {
        assessment
            .scores
            .insert(id.to_string(), CriterionScore::new(i64::from(*v)).unwrap());
    }
    assessment.status = completeness(&catalog, &profile, &assessment.scores);

    (catalog, profile, article, assessment)
}
