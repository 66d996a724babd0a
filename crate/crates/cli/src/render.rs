//! Plain-text tables for the read commands.

use std::fmt::Write as _;

use indexmap::IndexMap;
use rubric_core::engine::RATING_KEY;
use rubric_core::{
    format_percent, ArticleRecord, Assessment, CriteriaCatalog, RatingReport, SensitivityReport,
};
use rubric_service::ops::{ProfileView, RankingView, WeightsView};

pub fn catalog(c: &CriteriaCatalog) -> String {
    let mut s = format!(
        "catalog {} ({} categories, {} criteria)\n",
        c.reference(),
        c.categories.len(),
        c.criterion_count()
    );
    for cat in &c.categories {
        let _ = writeln!(s, "{:<6}{}", cat.id, cat.name);
        for k in &cat.criteria {
            let _ = writeln!(s, "  {:<6}{}", k.id, k.prompt);
        }
    }
    s
}

pub fn weights(w: &WeightsView) -> String {
    let mut s = String::new();
    for (cat, weight) in w.category_weights.positive() {
        let _ = writeln!(s, "{:<8}{:>8}", cat, format_percent(weight));
        if let Some(crit) = w.criterion_weights.get(cat) {
            for (id, x) in crit.positive() {
                let _ = writeln!(s, "  {:<6}{:>8}", id, format_percent(x));
            }
        }
    }
    s
}

pub fn profile(v: &ProfileView) -> String {
    let p = &v.profile;
    let mut s = format!(
        "profile {} r{} {:?} (catalog {})\n",
        p.profile_id, p.revision, p.name, p.catalog_ref
    );
    let _ = writeln!(s, "{:<8}{:<26}{:>8}", "id", "importance", "weight");
    let weight = |cat: &str, id: Option<&str>| -> String {
        let Some(w) = &v.weights else {
            return "-".into();
        };
        match id {
            None => format_percent(w.category_weights.get(cat)),
            Some(id) => w
                .criterion_weights
                .get(cat)
                .map_or("-".into(), |cw| format_percent(cw.get(id))),
        }
    };
    let mut excluded = 0;
    for (cat, imp) in &p.category_importance {
        if imp.is_excluded() {
            excluded += 1;
            continue;
        }
        let label = format!("{} {}", imp, imp.label());
        let _ = writeln!(s, "{:<8}{:<26}{:>8}", cat, label, weight(cat, None));
        let prefix = format!("{cat}.");
        for (id, ci) in p
            .criterion_importance
            .iter()
            .filter(|(id, _)| id.starts_with(&prefix))
        {
            if ci.is_excluded() {
                continue;
            }
            let label = format!("{} {}", ci, ci.label());
            let _ = writeln!(s, "  {:<6}{:<26}{:>8}", id, label, weight(cat, Some(id)));
        }
    }
    if excluded > 0 {
        let _ = writeln!(s, "{excluded} categories excluded");
    }
    if v.weights.is_none() {
        let _ = writeln!(s, "weights unavailable: the profile cannot be evaluated");
    }
    s
}

pub fn profile_list(v: &[ProfileView]) -> String {
    v.iter()
        .map(|p| {
            format!(
                "{:<24} r{:<4} {}\n",
                p.profile.profile_id, p.profile.revision, p.profile.name
            )
        })
        .collect()
}

pub fn article(a: &ArticleRecord) -> String {
    let mut s = format!(
        "article {} r{}\n  title: {}\n",
        a.article_id, a.revision, a.title
    );
    for (k, v) in [
        ("authors", &a.authors),
        ("source", &a.source),
        ("notes", &a.notes),
    ] {
        if let Some(v) = v {
            let _ = writeln!(s, "  {k}: {v}");
        }
    }
    if let Some(y) = a.year {
        let _ = writeln!(s, "  year: {y}");
    }
    s
}

pub fn article_list(v: &[ArticleRecord]) -> String {
    v.iter()
        .map(|a| format!("{:<24} r{:<4} {}\n", a.article_id, a.revision, a.title))
        .collect()
}

fn status(a: &Assessment) -> &'static str {
    if a.is_complete() {
        "complete"
    } else {
        "draft"
    }
}

pub fn assessment(a: &Assessment) -> String {
    let mut s = format!(
        "assessment {} r{} ({}) of {} under {}\n",
        a.assessment_id,
        a.revision,
        status(a),
        a.article_ref,
        a.profile_ref
    );
    for (id, score) in &a.scores {
        let _ = writeln!(s, "  {:<6}{:<4}{}", id, score.to_string(), score.label());
    }
    s
}

pub fn assessments(v: &[Assessment]) -> String {
    v.iter()
        .map(|a| {
            format!(
                "{:<36} {:<9} {:<20} {}\n",
                a.assessment_id,
                status(a),
                a.article_ref,
                a.profile_ref
            )
        })
        .collect()
}

pub fn rating(r: &RatingReport) -> String {
    let mut s = format!("article {}\n", r.article_id);
    let _ = writeln!(s, "{:<10}{:>8}{:>10}", "category", "weight", "score");
    for (id, score) in &r.category_scores {
        let _ = writeln!(
            s,
            "{:<10}{:>8}{:>10}",
            id,
            format_percent(r.category_weights.get(id)),
            format_percent(*score)
        );
    }
    let _ = writeln!(s, "article rating: {}", r.display_percentages[RATING_KEY]);
    s
}

pub fn ranking(v: &RankingView) -> String {
    let mut s = format!("ranking under {}\n", v.profile_ref);
    let _ = writeln!(s, "{:<6}{:<24}{:>9}  title", "rank", "article", "rating");
    for e in &v.entries {
        let _ = writeln!(
            s,
            "{:<6}{:<24}{:>9}  {}",
            e.entry.rank, e.entry.article_id, e.display[RATING_KEY], e.title
        );
    }
    if !v.drafts.is_empty() {
        let _ = writeln!(s, "not ranked (draft): {}", v.drafts.join(", "));
    }
    s
}

pub fn whatif(r: &SensitivityReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<24}{:>10}{:>10}{:>10}{:>8}",
        "article", "baseline", "what-if", "delta", "rank"
    );
    for e in &r.baseline_ranking {
        let after = r
            .perturbed_ranking
            .iter()
            .find(|p| p.article_id == e.article_id)
            .expect("same articles on both sides");
        let delta = r.rating_deltas[&e.article_id];
        let sign = if delta < 0.0 && format_percent(-delta) != "0.00%" {
            "-"
        } else {
            "+"
        };
        let _ = writeln!(
            s,
            "{:<24}{:>10}{:>10}{:>10}{:>8}",
            e.article_id,
            format_percent(e.article_rating),
            format_percent(after.article_rating),
            format!("{sign}{}", format_percent(delta.abs())),
            format!("{}->{}", e.rank, after.rank)
        );
    }
    if r.rank_reversals.is_empty() {
        s.push_str("no rank reversals\n");
    } else {
        for (a, b) in &r.rank_reversals {
            let _ = writeln!(s, "reversal: {b} now ahead of {a}");
        }
    }
    s
}

pub fn stability(flags: &IndexMap<String, bool>) -> String {
    let mut s = format!("{:<8}{}\n", "target", "reversal on one-step change");
    for (id, flipped) in flags {
        let _ = writeln!(s, "{:<8}{}", id, if *flipped { "yes" } else { "no" });
    }
    s
}
