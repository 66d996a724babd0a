//! Shared test support: random valid instances and their domain form.
#![allow(dead_code)]

pub mod oracle;

use oracle::{Instance, OracleCategory, OracleCriterion};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rubric_core::{
    completeness, Assessment, Category, CriteriaCatalog, CriterionScore, ImportanceRating,
    WeightProfile,
};

pub struct Shape {
    pub max_categories: usize,
    pub max_criteria: usize,
    /// Probability that a criterion is marked not-applicable.
    pub na_rate: f64,
}

pub const FULL: Shape = Shape {
    max_categories: 11,
    max_criteria: 7,
    na_rate: 0.0,
};

pub const WITH_NA: Shape = Shape {
    max_categories: 11,
    max_criteria: 7,
    na_rate: 0.15,
};

/// A random instance that the formulas accept: at least one weighted
/// category, and every weighted category keeps a weighted, numerically
/// scored criterion.
pub fn random_instance(seed: u64, shape: &Shape) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=shape.max_categories);
    let mut categories: Vec<OracleCategory> = (0..n)
        .map(|_| {
            let m = rng.gen_range(1..=shape.max_criteria);
            OracleCategory {
                importance: rng.gen_range(0..=5),
                criteria: (0..m)
                    .map(|_| OracleCriterion {
                        importance: rng.gen_range(0..=5),
                        score: if rng.gen_bool(shape.na_rate) {
                            None
                        } else {
                            Some(rng.gen_range(1..=5))
                        },
                    })
                    .collect(),
            }
        })
        .collect();
    if categories.iter().all(|c| c.importance == 0) {
        let i = rng.gen_range(0..n);
        categories[i].importance = rng.gen_range(1..=5);
    }
    for c in categories.iter_mut().filter(|c| c.importance > 0) {
        if !c
            .criteria
            .iter()
            .any(|k| k.importance > 0 && k.score.is_some())
        {
            let j = rng.gen_range(0..c.criteria.len());
            c.criteria[j].importance = rng.gen_range(1..=5);
            c.criteria[j].score = Some(rng.gen_range(1..=5));
        }
    }
    Instance { categories }
}

pub fn category_id(i: usize) -> String {
    (i + 1).to_string()
}

pub fn criterion_id(i: usize, j: usize) -> String {
    format!("{}.{}", i + 1, j + 1)
}

/// Catalog, profile and assessment equivalent to `inst`. Only criteria the
/// profile makes effective carry scores.
pub fn to_domain(inst: &Instance, article: &str) -> (CriteriaCatalog, WeightProfile, Assessment) {
    let catalog = CriteriaCatalog {
        catalog_id: "random".into(),
        version: "1".into(),
        categories: inst
            .categories
            .iter()
            .enumerate()
            .map(|(i, c)| {
                Category::new(
                    category_id(i),
                    format!("Category {}", i + 1),
                    (0..c.criteria.len())
                        .map(|j| (criterion_id(i, j), format!("Criterion {}", j + 1))),
                )
            })
            .collect(),
    };
    let mut profile = WeightProfile::new("random-profile", "random", &catalog);
    for (i, c) in inst.categories.iter().enumerate() {
        profile.category_importance[&category_id(i)] =
            ImportanceRating::new(c.importance as i64).unwrap();
        for (j, k) in c.criteria.iter().enumerate() {
            profile.criterion_importance[&criterion_id(i, j)] =
                ImportanceRating::new(k.importance as i64).unwrap();
        }
    }
    let assessment = scored(&catalog, &profile, inst, article);
    (catalog, profile, assessment)
}

/// Assessment of `inst`'s scores under `profile`.
pub fn scored(
    catalog: &CriteriaCatalog,
    profile: &WeightProfile,
    inst: &Instance,
    article: &str,
) -> Assessment {
    let mut a = Assessment::new(format!("{article}-assessment"), article, profile);
    for (i, c) in inst.categories.iter().enumerate() {
        if c.importance == 0 {
            continue;
        }
        for (j, k) in c.criteria.iter().enumerate() {
            if k.importance == 0 {
                continue;
            }
            let s = match k.score {
                Some(v) => CriterionScore::new(v as i64).unwrap(),
                None => CriterionScore::NotApplicable,
            };
            a.scores.insert(criterion_id(i, j), s);
        }
    }
    a.status = completeness(catalog, profile, &a.scores);
    a
}
