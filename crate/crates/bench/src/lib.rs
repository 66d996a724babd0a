//! Workloads for the benchmarks: the built-in catalog with every category
//! and criterion weighted, and batches of complete random assessments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rubric_core::{
    builtin_catalog, completeness, Assessment, CriteriaCatalog, CriterionScore, ImportanceRating,
    WeightProfile,
};

/// Built-in catalog and a profile weighting everything with random 1..=5.
pub fn full_profile(seed: u64) -> (CriteriaCatalog, WeightProfile) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let catalog = builtin_catalog();
    let mut profile = WeightProfile::new("bench", "bench", &catalog);
    for v in profile
        .category_importance
        .values_mut()
        .chain(profile.criterion_importance.values_mut())
    {
        *v = ImportanceRating::new(rng.gen_range(1..=5)).expect("in range");
    }
    (catalog, profile)
}

/// `n` complete assessments of distinct articles under `profile`.
pub fn assessments(
    catalog: &CriteriaCatalog,
    profile: &WeightProfile,
    n: usize,
    seed: u64,
) -> Vec<Assessment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let mut a = Assessment::new(format!("a{i}"), format!("article-{i}"), profile);
            for c in profile.effective_criteria(catalog) {
                let s = CriterionScore::new(rng.gen_range(1..=5)).expect("in range");
                a.scores.insert(c.id.clone(), s);
            }
            a.status = completeness(catalog, profile, &a.scores);
            a
        })
        .collect()
}
