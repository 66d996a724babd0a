//! Step-by-step trace of the worked example.

use std::fmt::Write as _;

use rubric_core::fixture::worked_example;
use rubric_core::{format_percent, rate};

/// The trace `rubric demo` prints. Every number comes from the engine; only
/// the layout lives here.
pub fn demo_trace() -> String {
    let (catalog, profile, article, assessment) = worked_example();
    let report = rate(&catalog, &profile, &assessment).expect("worked example rates");
    let mut s = String::new();

    let _ = writeln!(s, "Worked example: {:?}", article.title);
    let _ = writeln!(s, "Profile: {} ({})", profile.name, profile.reference());
    let _ = writeln!(s, "Catalog: {}", catalog.reference());

    let weighted: Vec<_> = catalog
        .categories
        .iter()
        .filter(|c| !profile.category_importance(&c.id).is_excluded())
        .collect();
    let cat_total: u32 = weighted
        .iter()
        .map(|c| u32::from(profile.category_importance(&c.id).value()))
        .sum();

    let _ = writeln!(s, "\nStep 1. Category importance (0-5)");
    for c in &weighted {
        let imp = profile.category_importance(&c.id);
        let _ = writeln!(s, "  {:<4}{:<16}{}  {}", c.id, c.name, imp, imp.label());
    }
    let _ = writeln!(
        s,
        "  {} other categories rated 0 and excluded",
        catalog.categories.len() - weighted.len()
    );

    let _ = writeln!(
        s,
        "\nStep 2. Category weights = importance / total importance ({cat_total})"
    );
    for c in &weighted {
        let imp = profile.category_importance(&c.id);
        let _ = writeln!(
            s,
            "  {:<4}{:<16}{}/{}  {:>8}",
            c.id,
            c.name,
            imp,
            cat_total,
            format_percent(report.category_weights.get(&c.id))
        );
    }

    let _ = writeln!(
        s,
        "\nStep 3. Criterion importance (0-5), excluded criteria omitted"
    );
    for c in &weighted {
        for k in c.criteria.iter().filter(|k| profile.is_effective(k)) {
            let imp = profile.criterion_importance(&k.id);
            let _ = writeln!(s, "  {:<5}{}  {:<22}{}", k.id, imp, imp.label(), k.prompt);
        }
    }

    let _ = writeln!(s, "\nStep 4. Criterion weights within each category");
    for c in &weighted {
        let total: u32 = c
            .criteria
            .iter()
            .map(|k| u32::from(profile.criterion_importance(&k.id).value()))
            .sum();
        let weights = &report.criterion_weights[&c.id];
        for (id, w) in weights.positive() {
            let _ = writeln!(
                s,
                "  {:<5}{}/{}  {:>8}",
                id,
                profile.criterion_importance(id),
                total,
                format_percent(w)
            );
        }
    }

    let _ = writeln!(s, "\nStep 5. Criterion scores (1-5)");
    for (id, score) in &assessment.scores {
        let _ = writeln!(s, "  {:<5}{}  {}", id, score, score.label());
    }

    let _ = writeln!(
        s,
        "\nStep 6. Category score = sum(score x criterion weight) / 5"
    );
    for c in &weighted {
        let terms: Vec<String> = report.criterion_weights[&c.id]
            .positive()
            .map(|(id, w)| format!("{} x {:.4}", assessment.scores[id], w))
            .collect();
        let _ = writeln!(
            s,
            "  {:<4}{:<16}({}) / 5 = {}",
            c.id,
            c.name,
            terms.join(" + "),
            format_percent(report.category_scores[&c.id])
        );
    }

    let _ = writeln!(
        s,
        "\nStep 7. Article rating = sum(category score x category weight)"
    );
    let terms: Vec<String> = report
        .category_scores
        .iter()
        .map(|(id, score)| {
            format!(
                "{} x {}",
                format_percent(*score),
                format_percent(report.category_weights.get(id))
            )
        })
        .collect();
    let _ = writeln!(s, "  {} = {}", terms.join(" + "), report.rating_display());

    let _ = writeln!(s, "\nArticle rating: {}", report.rating_display());
    s
}
