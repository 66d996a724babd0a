//! Brute-force recomputation of the rating formulas over plain nested vectors.
//!
//! Deliberately shares no code with the engine: no maps, no ids, no
//! normalization helper. Each quantity is re-derived with explicit loops.

/// One criterion: importance 0..=5 and a score 1..=5, or `None` for
/// not-applicable.
#[derive(Debug, Clone)]
pub struct OracleCriterion {
    pub importance: u8,
    pub score: Option<u8>,
}

#[derive(Debug, Clone)]
pub struct OracleCategory {
    pub importance: u8,
    pub criteria: Vec<OracleCriterion>,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub categories: Vec<OracleCategory>,
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub category_weights: Vec<f64>,
    /// Per category, per criterion; all zeros for excluded categories.
    pub criterion_weights: Vec<Vec<f64>>,
    /// `None` for excluded categories.
    pub category_scores: Vec<Option<f64>>,
    pub rating: f64,
}

/// Returns `None` when the formulas are undefined (a zero denominator or a
/// weighted criterion without a numeric score).
pub fn brute_force(inst: &Instance) -> Option<OracleResult> {
    let mut cat_total = 0u32;
    for c in &inst.categories {
        cat_total += c.importance as u32;
    }
    if cat_total == 0 {
        return None;
    }
    let mut category_weights = Vec::new();
    let mut criterion_weights = Vec::new();
    let mut category_scores = Vec::new();
    let mut rating = 0.0;
    for c in &inst.categories {
        let cw = c.importance as f64 / cat_total as f64;
        category_weights.push(cw);
        if c.importance == 0 {
            criterion_weights.push(vec![0.0; c.criteria.len()]);
            category_scores.push(None);
            continue;
        }
        let mut crit_total = 0u32;
        for k in &c.criteria {
            if k.score.is_some() {
                crit_total += k.importance as u32;
            }
        }
        if crit_total == 0 {
            return None;
        }
        let mut weights = Vec::new();
        let mut sum = 0.0;
        for k in &c.criteria {
            let w = if k.score.is_some() {
                k.importance as f64 / crit_total as f64
            } else {
                0.0
            };
            weights.push(w);
            if w > 0.0 {
                sum += k.score? as f64 * w;
            }
        }
        let score = sum / 5.0;
        criterion_weights.push(weights);
        category_scores.push(Some(score));
        rating += score * cw;
    }
    Some(OracleResult {
        category_weights,
        criterion_weights,
        category_scores,
        rating,
    })
}
