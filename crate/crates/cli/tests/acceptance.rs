//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the browser workbench.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use common::oracle::brute_force;
use common::{criterion_id, random_instance, to_domain, FULL, WITH_NA};
use rubric_core::fixture::worked_example;
use rubric_core::{
    builtin_catalog, evaluate, format_percent, normalize, CriterionScore, FileStore,
    ImportanceRating, WeightProfile,
};

type Check = Result<String, String>;
type CheckFn = fn() -> Check;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(got: f64, want: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || {
        format!("{what}: got {got}, want {want} (tol {tol:e})")
    })
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || {
        format!("took {elapsed:?}, limit {limit:?}")
    })
}

fn golden_example() -> Check {
    let start = Instant::now();
    let (catalog, profile, _, assessment) = worked_example();
    let r = evaluate(&catalog, &profile, &assessment).map_err(|e| e.to_string())?;
    let tol = 1e-9;
    close(
        r.category_weights.get("1"),
        2.0 / 3.0,
        tol,
        "category weight 1",
    )?;
    close(
        r.category_weights.get("2"),
        1.0 / 3.0,
        tol,
        "category weight 2",
    )?;
    close(
        r.criterion_weights["1"].get("1.1"),
        1.0,
        tol,
        "criterion weight 1.1",
    )?;
    close(
        r.criterion_weights["2"].get("2.1"),
        4.0 / 9.0,
        tol,
        "criterion weight 2.1",
    )?;
    close(
        r.criterion_weights["2"].get("2.2"),
        5.0 / 9.0,
        tol,
        "criterion weight 2.2",
    )?;
    close(r.category_scores["1"], 0.8, tol, "category score 1")?;
    close(r.category_scores["2"], 2.0 / 3.0, tol, "category score 2")?;
    close(r.article_rating, 34.0 / 45.0, tol, "article rating")?;
    let shown = [
        format_percent(r.category_weights.get("1")),
        format_percent(r.category_weights.get("2")),
        format_percent(r.criterion_weights["2"].get("2.1")),
        format_percent(r.criterion_weights["2"].get("2.2")),
        format_percent(r.category_scores["1"]),
        format_percent(r.category_scores["2"]),
        r.rating_display().to_string(),
    ];
    let want = [
        "66.67%", "33.33%", "44.44%", "55.56%", "80.00%", "66.67%", "75.56%",
    ];
    ensure(shown == want, || {
        format!("displayed {shown:?}, want {want:?}")
    })?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!(
        "rating {:.6} shown {} in {elapsed:.2?}",
        r.article_rating,
        r.rating_display()
    ))
}

fn oracle_equivalence() -> Check {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for seed in 0..500u64 {
        let inst = random_instance(seed, &FULL);
        let want =
            brute_force(&inst).ok_or_else(|| format!("seed {seed}: oracle rejected instance"))?;
        let (catalog, profile, a) = to_domain(&inst, "x");
        let got = evaluate(&catalog, &profile, &a).map_err(|e| format!("seed {seed}: {e}"))?;
        let mut diff = (got.article_rating - want.rating).abs();
        for (i, cat) in inst.categories.iter().enumerate() {
            let id = (i + 1).to_string();
            diff = diff.max((got.category_weights.get(&id) - want.category_weights[i]).abs());
            if let Some(s) = want.category_scores[i] {
                diff = diff.max((got.category_scores[&id] - s).abs());
                for j in 0..cat.criteria.len() {
                    let w = got.criterion_weights[&id].get(&criterion_id(i, j));
                    diff = diff.max((w - want.criterion_weights[i][j]).abs());
                }
            }
        }
        ensure(diff <= 1e-9, || {
            format!("seed {seed}: max difference {diff:e}")
        })?;
        worst = worst.max(diff);
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(10))?;
    Ok(format!(
        "500 instances, max difference {worst:e}, {elapsed:.2?}"
    ))
}

fn imp(v: i64) -> ImportanceRating {
    ImportanceRating::new(v).unwrap()
}

fn rating_of(inst: &common::oracle::Instance) -> Result<f64, String> {
    let (c, p, a) = to_domain(inst, "x");
    evaluate(&c, &p, &a)
        .map(|r| r.article_rating)
        .map_err(|e| e.to_string())
}

const PROPERTY_SEEDS: u64 = 400;

fn property_suite() -> Check {
    let start = Instant::now();
    for seed in 0..PROPERTY_SEEDS {
        let inst = random_instance(seed, &WITH_NA);
        let (catalog, profile, a) = to_domain(&inst, "x");
        let base = evaluate(&catalog, &profile, &a).map_err(|e| format!("seed {seed}: {e}"))?;

        // Normalization sums to one.
        let raw: Vec<(String, ImportanceRating)> = inst
            .categories
            .iter()
            .enumerate()
            .map(|(i, c)| (i.to_string(), imp(c.importance as i64)))
            .collect();
        let w = normalize(raw).map_err(|e| e.to_string())?;
        ensure(
            (w.total() - 1.0).abs() <= 1e-12 && w.iter().all(|(_, x)| x >= 0.0),
            || format!("normalization, seed {seed}: total {}", w.total()),
        )?;
        for cw in base.criterion_weights.values() {
            ensure((cw.total() - 1.0).abs() <= 1e-12, || {
                format!("criterion normalization, seed {seed}")
            })?;
        }

        // Bounds.
        let numeric: Vec<u8> = a.scores.values().filter_map(|s| s.numeric()).collect();
        let lo = f64::from(*numeric.iter().min().unwrap()) / 5.0;
        let hi = f64::from(*numeric.iter().max().unwrap()) / 5.0;
        ensure(
            base.article_rating >= lo - 1e-12 && base.article_rating <= hi + 1e-12,
            || {
                format!(
                    "bounds, seed {seed}: {} outside [{lo}, {hi}]",
                    base.article_rating
                )
            },
        )?;

        // Monotonic sensitivity: one score step moves the rating by its weight.
        if let Some((id, v)) = a
            .scores
            .iter()
            .find_map(|(id, s)| s.numeric().filter(|v| *v < 5).map(|v| (id.clone(), v)))
        {
            let mut bumped = a.clone();
            bumped.scores[&id] = CriterionScore::Scored(v + 1);
            let after = evaluate(&catalog, &profile, &bumped).map_err(|e| e.to_string())?;
            let cat = id.split('.').next().unwrap();
            let want = base.criterion_weights[cat].get(&id) * base.category_weights.get(cat) / 5.0;
            close(
                after.article_rating - base.article_rating,
                want,
                1e-12,
                &format!("monotonic delta, seed {seed}"),
            )?;
        }

        // Uniform scale invariance: doubling every importance changes nothing.
        if inst
            .categories
            .iter()
            .all(|c| c.importance <= 2 && c.criteria.iter().all(|k| k.importance <= 2))
        {
            let mut doubled = inst.clone();
            for c in &mut doubled.categories {
                c.importance *= 2;
                for k in &mut c.criteria {
                    k.importance *= 2;
                }
            }
            close(
                rating_of(&doubled)?,
                base.article_rating,
                1e-12,
                &format!("scale invariance, seed {seed}"),
            )?;
        }
        let mut capped = inst.clone();
        for c in &mut capped.categories {
            c.importance = c.importance.min(1);
        }
        let capped_rating = rating_of(&capped)?;
        let mut scaled = capped.clone();
        let k = (seed % 4 + 2) as u8;
        for c in &mut scaled.categories {
            c.importance *= k;
        }
        close(
            rating_of(&scaled)?,
            capped_rating,
            1e-12,
            &format!("category scale invariance, seed {seed}"),
        )?;

        // Exclusion equivalence: importance 0 equals removing the category.
        let full = random_instance(seed, &FULL);
        let weighted: Vec<usize> = (0..full.categories.len())
            .filter(|i| full.categories[*i].importance > 0)
            .collect();
        if weighted.len() >= 2 {
            let drop = weighted[(seed as usize) % weighted.len()];
            let mut zeroed = full.clone();
            zeroed.categories[drop].importance = 0;
            let r_zero = rating_of(&zeroed)?;
            let (mut cat_r, _, a_full) = to_domain(&full, "x");
            let drop_id = (drop + 1).to_string();
            cat_r.categories.retain(|c| c.id != drop_id);
            let mut prof_r = WeightProfile::new("removed", "removed", &cat_r);
            for c in &cat_r.categories {
                let i = c.id.parse::<usize>().unwrap() - 1;
                prof_r.category_importance[&c.id] = imp(full.categories[i].importance as i64);
                for (j, kk) in full.categories[i].criteria.iter().enumerate() {
                    prof_r.criterion_importance[&criterion_id(i, j)] = imp(kk.importance as i64);
                }
            }
            let mut a_r = rubric_core::Assessment::new("r", "x", &prof_r);
            a_r.scores = a_full
                .scores
                .iter()
                .filter(|(id, _)| id.split('.').next() != Some(drop_id.as_str()))
                .map(|(k, v)| (k.clone(), *v))
                .collect();
            let r_removed = evaluate(&cat_r, &prof_r, &a_r)
                .map_err(|e| e.to_string())?
                .article_rating;
            close(
                r_zero,
                r_removed,
                1e-12,
                &format!("exclusion equivalence, seed {seed}"),
            )?;
        }

        // NA renormalization: NA equals importance 0 for that criterion.
        let pick = full.categories.iter().enumerate().find_map(|(i, c)| {
            let w: Vec<usize> = (0..c.criteria.len())
                .filter(|j| c.criteria[*j].importance > 0)
                .collect();
            (c.importance > 0 && w.len() >= 2).then(|| (i, w[0]))
        });
        if let Some((i, j)) = pick {
            let mut na = full.clone();
            na.categories[i].criteria[j].score = None;
            let mut zero = full.clone();
            zero.categories[i].criteria[j].importance = 0;
            close(
                rating_of(&na)?,
                rating_of(&zero)?,
                1e-12,
                &format!("NA renormalization, seed {seed}"),
            )?;
        }
    }
    Ok(format!(
        "normalization, bounds, monotonic delta, scale invariance, exclusion, NA over {PROPERTY_SEEDS} seeds in {:.2?}",
        start.elapsed()
    ))
}

fn catalog_fixture() -> Check {
    let c = builtin_catalog();
    let counts: Vec<usize> = c.categories.iter().map(|cat| cat.criteria.len()).collect();
    let want = [2, 3, 1, 3, 1, 1, 7, 6, 4, 3, 2];
    ensure(counts == want, || format!("criterion counts {counts:?}"))?;
    for (i, cat) in c.categories.iter().enumerate() {
        ensure(cat.id == (i + 1).to_string(), || {
            format!("category id {}", cat.id)
        })?;
        for (j, k) in cat.criteria.iter().enumerate() {
            ensure(k.id == format!("{}.{}", i + 1, j + 1), || {
                format!("criterion id {}", k.id)
            })?;
        }
    }
    let ids: Vec<&str> = c.criteria().map(|k| k.id.as_str()).collect();
    ensure(
        ids.first() == Some(&"1.1") && ids.last() == Some(&"11.2"),
        || format!("id range {ids:?}"),
    )?;
    Ok(format!(
        "{} categories, {} criteria, ids 1.1..11.2",
        c.categories.len(),
        ids.len()
    ))
}

fn rubric(store: &Path, args: &[&str]) -> Result<Output, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_rubric"))
        .arg("--store")
        .arg(store)
        .args(args)
        .env_remove("RUBRIC_STORE")
        .output()
        .map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(o)
    } else {
        Err(format!(
            "rubric {args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        ))
    }
}

fn end_to_end_cli() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let s = dir.path();

    let golden = include_str!("golden/demo.txt");
    let first = rubric(s, &["demo"])?.stdout;
    let second = rubric(s, &["demo"])?.stdout;
    ensure(first == second, || {
        "demo output differs between runs".into()
    })?;
    ensure(first == golden.as_bytes(), || {
        "demo output differs from the golden file".into()
    })?;

    // Put the worked example in a store through the CLI.
    let (_, profile, article, assessment) = worked_example();
    rubric(s, &["init"])?;
    let mut create = vec![
        "profile".to_string(),
        "create".into(),
        profile.profile_id.clone(),
        "--name".into(),
        profile.name.clone(),
    ];
    for (id, v) in profile
        .category_importance
        .iter()
        .chain(&profile.criterion_importance)
    {
        if !v.is_excluded() {
            create.push("--set".into());
            create.push(format!("{id}={v}"));
        }
    }
    rubric(s, &create.iter().map(String::as_str).collect::<Vec<_>>())?;
    rubric(
        s,
        &[
            "article",
            "add",
            &article.article_id,
            "--title",
            &article.title,
        ],
    )?;
    let mut new = vec![
        "assess".to_string(),
        "new".into(),
        article.article_id.clone(),
        "--profile".into(),
        profile.profile_id.clone(),
    ];
    for (id, v) in &assessment.scores {
        new.push("--score".into());
        new.push(format!("{id}={v}"));
    }
    rubric(s, &new.iter().map(String::as_str).collect::<Vec<_>>())?;

    let csv = String::from_utf8(
        rubric(s, &["export", "ratings", "--profile", &profile.profile_id])?.stdout,
    )
    .map_err(|e| e.to_string())?;
    ensure(csv.contains("75.56%"), || {
        format!("ratings export lacks 75.56%: {csv}")
    })?;

    let sheet = s.join("scores.csv");
    let sheet_str = sheet.to_str().unwrap();
    rubric(
        s,
        &[
            "export",
            "scores",
            "--profile",
            &profile.profile_id,
            "--output",
            sheet_str,
        ],
    )?;
    let stored = FileStore::open(s).map_err(|e| e.to_string())?;
    let before = stored.list_assessments().map_err(|e| e.to_string())?;
    ensure(
        before.len() == 1 && before[0].content_eq(&assessment),
        || "stored assessment differs from the example".into(),
    )?;

    rubric(s, &["assess", "delete", &before[0].assessment_id])?;
    rubric(s, &["import", sheet_str, "--profile", &profile.profile_id])?;
    let after = stored.list_assessments().map_err(|e| e.to_string())?;
    ensure(after.len() == 1 && after[0].content_eq(&before[0]), || {
        format!(
            "round-trip changed the assessment: {:?} vs {:?}",
            before, after
        )
    })?;
    Ok("demo matches golden file, export shows 75.56%, score sheet round-trips".into())
}

fn main() {
    let checks: &[(&str, CheckFn)] = &[
        ("golden example", golden_example),
        ("oracle equivalence", oracle_equivalence),
        ("property suite", property_suite),
        ("catalog fixture", catalog_fixture),
        ("end-to-end CLI", end_to_end_cli),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let (name, check) = (*name, *check);
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
