//! What-if analysis over profile importances.
//!
//! Perturbations are applied to a transient copy of the profile; nothing here
//! mutates the profile passed in or touches storage.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::CriteriaCatalog;
use crate::engine::{ImportanceRating, SCALE_MAX};
use crate::evaluation::{
    rank_articles, rank_under, Assessment, EvaluationError, RankingEntry, WeightProfile,
};

/// A transient importance change for one category or criterion id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhatIfDelta {
    pub target: String,
    pub new_importance: ImportanceRating,
}

impl WhatIfDelta {
    pub fn new(target: impl Into<String>, new_importance: ImportanceRating) -> Self {
        WhatIfDelta {
            target: target.into(),
            new_importance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub baseline_ranking: Vec<RankingEntry>,
    pub perturbed_ranking: Vec<RankingEntry>,
    /// Perturbed minus baseline rating, keyed by article id in baseline order.
    pub rating_deltas: IndexMap<String, f64>,
    /// Pairs whose relative order flipped, as (baseline winner, baseline loser).
    pub rank_reversals: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SensitivityError {
    #[error("baseline cannot be ranked: {0}")]
    Baseline(#[source] EvaluationError),
    #[error("what-if target {0:?} is neither a category nor a criterion")]
    UnknownTarget(String),
    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),
}

/// Copy of `profile` with the deltas applied; the revision is left unchanged.
pub fn perturb(
    catalog: &CriteriaCatalog,
    profile: &WeightProfile,
    deltas: &[WhatIfDelta],
) -> Result<WeightProfile, SensitivityError> {
    let mut next = profile.clone();
    for d in deltas {
        if catalog.category(&d.target).is_some() {
            next.category_importance
                .insert(d.target.clone(), d.new_importance);
        } else if catalog.criterion(&d.target).is_some() {
            next.criterion_importance
                .insert(d.target.clone(), d.new_importance);
        } else {
            return Err(SensitivityError::UnknownTarget(d.target.clone()));
        }
    }
    Ok(next)
}

pub fn what_if(
    catalog: &CriteriaCatalog,
    profile: &WeightProfile,
    assessments: &[Assessment],
    deltas: &[WhatIfDelta],
) -> Result<SensitivityReport, SensitivityError> {
    let baseline =
        rank_articles(catalog, profile, assessments).map_err(SensitivityError::Baseline)?;
    perturbed_report(catalog, profile, assessments, deltas, baseline)
}

fn perturbed_report(
    catalog: &CriteriaCatalog,
    profile: &WeightProfile,
    assessments: &[Assessment],
    deltas: &[WhatIfDelta],
    baseline: Vec<RankingEntry>,
) -> Result<SensitivityReport, SensitivityError> {
    let perturbed_profile = perturb(catalog, profile, deltas)?;
    perturbed_profile
        .check_evaluable(catalog)
        .map_err(|e| SensitivityError::InvalidPerturbation(e.to_string()))?;
    let perturbed = rank_under(catalog, &perturbed_profile, assessments)
        .map_err(|e| SensitivityError::InvalidPerturbation(e.to_string()))?;

    let perturbed_pos: IndexMap<&str, (usize, f64)> = perturbed
        .iter()
        .enumerate()
        .map(|(i, e)| (e.article_id.as_str(), (i, e.article_rating)))
        .collect();

    let rating_deltas = baseline
        .iter()
        .map(|e| {
            let after = perturbed_pos[e.article_id.as_str()].1;
            (e.article_id.clone(), after - e.article_rating)
        })
        .collect();

    let mut rank_reversals = Vec::new();
    for (i, hi) in baseline.iter().enumerate() {
        for lo in &baseline[i + 1..] {
            if perturbed_pos[hi.article_id.as_str()].0 > perturbed_pos[lo.article_id.as_str()].0 {
                rank_reversals.push((hi.article_id.clone(), lo.article_id.clone()));
            }
        }
    }

    Ok(SensitivityReport {
        baseline_ranking: baseline,
        perturbed_ranking: perturbed,
        rating_deltas,
        rank_reversals,
    })
}

/// Tries every ±1 importance step on each category and each effective
/// criterion, flagging the targets where some step reverses a ranked pair.
///
/// Steps that leave the profile unevaluable, or that make an unscored
/// criterion effective, are skipped.
pub fn stability_scan(
    catalog: &CriteriaCatalog,
    profile: &WeightProfile,
    assessments: &[Assessment],
) -> Result<IndexMap<String, bool>, SensitivityError> {
    let baseline =
        rank_articles(catalog, profile, assessments).map_err(SensitivityError::Baseline)?;

    let mut targets: Vec<(String, ImportanceRating)> = Vec::new();
    for cat in &catalog.categories {
        targets.push((cat.id.clone(), profile.category_importance(&cat.id)));
        for crit in cat.criteria.iter().filter(|c| profile.is_effective(c)) {
            targets.push((crit.id.clone(), profile.criterion_importance(&crit.id)));
        }
    }

    let mut flags = IndexMap::with_capacity(targets.len());
    for (target, current) in targets {
        let cur = i64::from(current.value());
        let mut reversed = false;
        for next in [cur - 1, cur + 1] {
            if !(0..=i64::from(SCALE_MAX)).contains(&next) {
                continue;
            }
            let delta = WhatIfDelta::new(
                target.clone(),
                ImportanceRating::new(next).expect("in range"),
            );
            match perturbed_report(catalog, profile, assessments, &[delta], baseline.clone()) {
                Ok(r) => reversed |= !r.rank_reversals.is_empty(),
                Err(SensitivityError::InvalidPerturbation(_)) => {}
                Err(e) => return Err(e),
            }
        }
        flags.insert(target, reversed);
    }
    Ok(flags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Category;
    use crate::engine::CriterionScore;
    use crate::evaluation::completeness;
    use crate::fixture;

    fn imp(v: i64) -> ImportanceRating {
        ImportanceRating::new(v).unwrap()
    }

    #[test]
    fn lowering_clarity_reweights_categories() {
        let (cat, profile, _, a) = fixture::worked_example();
        let report = what_if(&cat, &profile, &[a], &[WhatIfDelta::new("1", imp(2))]).unwrap();
        let after = report.perturbed_ranking[0].article_rating;
        assert!((after - (0.8 * 0.5 + (2.0 / 3.0) * 0.5)).abs() < 1e-12);
        assert!((report.rating_deltas[fixture::ARTICLE_ID] - (after - 34.0 / 45.0)).abs() < 1e-15);
        assert!(report.rank_reversals.is_empty());
        // the input profile is untouched
        assert_eq!(profile.category_importance("1").value(), 4);
    }

    #[test]
    fn empty_delta_is_identity() {
        let (cat, profile, _, a) = fixture::worked_example();
        let report = what_if(&cat, &profile, &[a], &[]).unwrap();
        assert_eq!(report.baseline_ranking, report.perturbed_ranking);
        assert!(report.rating_deltas.values().all(|d| *d == 0.0));
        assert!(report.rank_reversals.is_empty());
    }

    #[test]
    fn zeroing_every_category_is_invalid() {
        let (cat, profile, _, a) = fixture::worked_example();
        let deltas = [WhatIfDelta::new("1", imp(0)), WhatIfDelta::new("2", imp(0))];
        assert!(matches!(
            what_if(&cat, &profile, std::slice::from_ref(&a), &deltas),
            Err(SensitivityError::InvalidPerturbation(_))
        ));
        // raising an unscored criterion also leaves the assessment unusable
        assert!(matches!(
            what_if(
                &cat,
                &profile,
                std::slice::from_ref(&a),
                &[WhatIfDelta::new("2.3", imp(2))]
            ),
            Err(SensitivityError::InvalidPerturbation(_))
        ));
        assert_eq!(
            what_if(&cat, &profile, &[a], &[WhatIfDelta::new("42", imp(2))]),
            Err(SensitivityError::UnknownTarget("42".into()))
        );
    }

    /// Two categories, one criterion each.
    fn duel(
        scores_a: [u8; 2],
        scores_b: [u8; 2],
    ) -> (CriteriaCatalog, WeightProfile, Vec<Assessment>) {
        let catalog = CriteriaCatalog {
            catalog_id: "duel".into(),
            version: "1".into(),
            categories: vec![
                Category::new("1", "One", [("1.1", "first")]),
                Category::new("2", "Two", [("2.1", "second")]),
            ],
        };
        let mut profile = WeightProfile::new("p", "p", &catalog);
        for id in ["1", "2"] {
            profile.category_importance[id] = imp(3);
        }
        for id in ["1.1", "2.1"] {
            profile.criterion_importance[id] = imp(5);
        }
        let make = |article: &str, s: [u8; 2]| {
            let mut a = Assessment::new(format!("{article}-x"), article, &profile);
            a.scores.insert("1.1".into(), CriterionScore::Scored(s[0]));
            a.scores.insert("2.1".into(), CriterionScore::Scored(s[1]));
            a.status = completeness(&catalog, &profile, &a.scores);
            a
        };
        let assessments = vec![make("a", scores_a), make("b", scores_b)];
        (catalog, profile, assessments)
    }

    #[test]
    fn flipped_pair_is_reported() {
        // equal weights: a = (1.0 + 0.8)/2 = 0.9, b = (0.6 + 1.0)/2 = 0.8
        let (cat, profile, assessments) = duel([5, 4], [3, 5]);
        let base = rank_articles(&cat, &profile, &assessments).unwrap();
        assert!((base[0].article_rating - 0.9).abs() < 1e-12);
        assert!((base[1].article_rating - 0.8).abs() < 1e-12);
        // weights 1:5 -> a = (1 + 5*0.8)/6 = 5/6, b = (0.6 + 5)/6 = 0.9333
        let r = what_if(
            &cat,
            &profile,
            &assessments,
            &[WhatIfDelta::new("1", imp(1)), WhatIfDelta::new("2", imp(5))],
        )
        .unwrap();
        assert_eq!(r.rank_reversals, vec![("a".to_string(), "b".to_string())]);
        assert_eq!(r.perturbed_ranking[0].article_id, "b");
    }

    #[test]
    fn stability_scan_trivial_cases() {
        let (cat, profile, _, a) = fixture::worked_example();
        let flags = stability_scan(&cat, &profile, &[a]).unwrap();
        assert_eq!(flags.len(), 11 + 3);
        assert!(flags.values().all(|f| !f));

        let (cat, profile, assessments) = duel([4, 2], [4, 2]);
        let flags = stability_scan(&cat, &profile, &assessments).unwrap();
        assert!(flags.values().all(|f| !f));
    }

    #[test]
    fn stability_scan_flags_the_deciding_category() {
        // a wins category 1 only: a = (1.0 + 0.6)/2 = 0.8, b = (0.4 + 0.8)/2 = 0.6
        let (cat, mut profile, mut assessments) = duel([5, 3], [2, 4]);
        profile.category_importance["1"] = imp(1);
        profile.category_importance["2"] = imp(1);
        for a in &mut assessments {
            a.profile_ref = profile.reference();
        }
        let flags = stability_scan(&cat, &profile, &assessments).unwrap();
        // excluding category 1 leaves only category 2, where b leads
        assert!(flags["1"]);
        // category 2 at 0 or 2: a stays ahead (0.8 -> 1.0, 0.7333 vs 0.6667)
        assert!(!flags["2"]);
        // a single criterion per category keeps weight 1.0 for any non-zero step
        assert!(!flags["1.1"]);
        assert!(!flags["2.1"]);
    }
}
