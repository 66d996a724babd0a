use rubric_core::fixture::{self, ARTICLE_ID, PROFILE_ID};
use rubric_core::store::{export_assessment_csv, export_ratings, import_assessment_csv};
use rubric_core::{format_percent, rank_articles, rate, ArticleRecord, FileStore, StoreError};

fn seeded() -> (tempfile::TempDir, FileStore) {
    let dir = tempfile::tempdir().unwrap();
    let store = FileStore::init(dir.path()).unwrap();
    let (_, profile, article, assessment) = fixture::worked_example();
    store.put_profile(&profile).unwrap();
    store.put_article(&article).unwrap();
    store.put_assessment(&assessment).unwrap();
    (dir, store)
}

#[test]
fn persisted_worked_example_rates_the_same_after_reopen() {
    let (dir, store) = seeded();
    drop(store);
    let store = FileStore::open(dir.path()).unwrap();
    let profile = store.get_profile(PROFILE_ID).unwrap();
    let catalog = store.get_catalog(&profile.catalog_ref).unwrap();
    let assessments = store.assessments_for(&profile.reference()).unwrap();
    assert_eq!(assessments.len(), 1);
    let report = rate(&catalog, &profile, &assessments[0]).unwrap();
    assert!((report.article_rating - 34.0 / 45.0).abs() < 1e-12);
    assert_eq!(format_percent(report.article_rating), "75.56%");
}

#[test]
fn profile_edits_keep_old_revisions_and_pinned_assessments() {
    let (_dir, store) = seeded();
    let (catalog, profile, _, _) = fixture::worked_example();
    let edited = profile.set_category_importance(&catalog, "2", 5).unwrap();
    assert_eq!(edited.revision, 2);
    store.put_profile(&edited).unwrap();

    // Writing revision 2 again is stale.
    assert!(matches!(
        store.put_profile(&edited),
        Err(StoreError::Conflict { .. })
    ));
    assert_eq!(store.profile_revisions(PROFILE_ID).unwrap(), [1, 2]);

    // The stored assessment still rates against revision 1.
    let a = &store.list_assessments().unwrap()[0];
    let pinned = store.get_profile_revision(&a.profile_ref).unwrap();
    let r = rate(&catalog, &pinned, a).unwrap();
    assert_eq!(r.rating_display(), "75.56%");
    assert!(store
        .assessments_for(&edited.reference())
        .unwrap()
        .is_empty());
}

#[test]
fn referenced_entities_cannot_be_deleted() {
    let (_dir, store) = seeded();
    assert!(matches!(
        store.delete_article(ARTICLE_ID),
        Err(StoreError::Referenced { .. })
    ));
    assert!(matches!(
        store.delete_profile(PROFILE_ID),
        Err(StoreError::Referenced { .. })
    ));
    store.delete_assessment(fixture::ASSESSMENT_ID).unwrap();
    store.delete_article(ARTICLE_ID).unwrap();
    store.delete_profile(PROFILE_ID).unwrap();
    assert!(matches!(
        store.get_article(ARTICLE_ID),
        Err(StoreError::NotFound { .. })
    ));
}

#[test]
fn score_sheet_exported_from_store_imports_back() {
    let (_dir, store) = seeded();
    let profile = store.get_profile(PROFILE_ID).unwrap();
    let catalog = store.get_catalog(&profile.catalog_ref).unwrap();
    let stored = store.list_assessments().unwrap();
    let sheet = export_assessment_csv(&catalog, &profile, &stored).unwrap();
    let back = import_assessment_csv(&sheet, &catalog, &profile).unwrap();
    assert_eq!(back.len(), stored.len());
    for (a, b) in stored.iter().zip(&back) {
        assert!(a.content_eq(b));
    }
}

#[test]
fn ratings_of_several_articles_rank_in_order() {
    let (_dir, store) = seeded();
    let profile = store.get_profile(PROFILE_ID).unwrap();
    let catalog = store.get_catalog(&profile.catalog_ref).unwrap();
    let doc = "article_id,1.1,2.1,2.2\nstrong,5,5,5\nweak,1,1,1\n";
    for a in import_assessment_csv(doc, &catalog, &profile).unwrap() {
        store
            .put_article(&ArticleRecord::new(
                a.article_ref.clone(),
                a.article_ref.to_uppercase(),
            ))
            .unwrap();
        store.put_assessment(&a).unwrap();
    }
    let assessments = store.assessments_for(&profile.reference()).unwrap();
    let ranking = rank_articles(&catalog, &profile, &assessments).unwrap();
    let order: Vec<_> = ranking.iter().map(|e| e.article_id.as_str()).collect();
    assert_eq!(order, ["strong", "worked-example", "weak"]);
    assert_eq!(format_percent(ranking[0].article_rating), "100.00%");
    assert_eq!(format_percent(ranking[2].article_rating), "20.00%");

    let csv = export_ratings(
        &catalog,
        &profile,
        &store.list_articles().unwrap(),
        &assessments,
    )
    .unwrap();
    assert_eq!(
        csv.lines().nth(2).unwrap(),
        "worked-example,Worked example article,80.00%,66.67%,75.56%,2"
    );
}
