use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use clap::CommandFactory;
use rubric_cli::Cli;
use rubric_core::FileStore;

const GOLDEN_DEMO: &str = include_str!("golden/demo.txt");

fn rubric(store: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rubric"))
        .arg("--store")
        .arg(store)
        .args(args)
        .env_remove("RUBRIC_STORE")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[track_caller]
fn ok(o: Output) -> String {
    assert!(o.status.success(), "stderr: {}", stderr(&o));
    stdout(&o)
}

/// A store with the worked example's profile and two articles, `a` scored
/// like the example and `b` scored all fives.
fn two_articles() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path();
    ok(rubric(s, &["init"]));
    ok(rubric(
        s,
        &[
            "profile", "create", "ism", "--name", "ISM", "--set", "1=4", "--set", "2=2", "--set",
            "1.1=5", "--set", "2.1=4", "--set", "2.2=5",
        ],
    ));
    ok(rubric(s, &["article", "add", "a", "--title", "Article A"]));
    ok(rubric(s, &["article", "add", "b", "--title", "Article B"]));
    ok(rubric(
        s,
        &[
            "assess",
            "new",
            "a",
            "--profile",
            "ism",
            "--score",
            "1.1=4",
            "--score",
            "2.1=5",
            "--score",
            "2.2=2",
        ],
    ));
    ok(rubric(
        s,
        &[
            "assess",
            "new",
            "b",
            "--profile",
            "ism",
            "--score",
            "1.1=5",
            "--score",
            "2.1=5",
            "--score",
            "2.2=5",
        ],
    ));
    dir
}

#[test]
fn demo_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let first = ok(rubric(dir.path(), &["demo"]));
    assert_eq!(first, GOLDEN_DEMO);
    assert_eq!(ok(rubric(dir.path(), &["demo"])), first);
    for s in ["66.67%", "33.33%", "44.44%", "55.56%", "80.00%"] {
        assert!(first.contains(s), "{s}");
    }
    assert!(first.trim_end().ends_with("75.56%"));
}

#[test]
fn demo_json_carries_the_rating() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(rubric(dir.path(), &["--json", "demo"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!((v["article_rating"].as_f64().unwrap() - 34.0 / 45.0).abs() < 1e-12);
    assert_eq!(v["display_percentages"]["article_rating"], "75.56%");
}

#[test]
fn rating_a_draft_fails_with_its_code() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path();
    ok(rubric(s, &["init"]));
    ok(rubric(
        s,
        &[
            "profile", "create", "p", "--name", "P", "--set", "1=3", "--set", "1.1=2", "--set",
            "1.2=2",
        ],
    ));
    ok(rubric(s, &["article", "add", "x", "--title", "X"]));
    ok(rubric(
        s,
        &["assess", "new", "x", "--profile", "p", "--score", "1.1=3"],
    ));
    let o = rubric(s, &["rate", "x--p-r1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("incomplete_assessment"),
        "{}",
        stderr(&o)
    );

    ok(rubric(s, &["assess", "score", "x--p-r1", "1.2=NA"]));
    let out = ok(rubric(s, &["rate", "x--p-r1"]));
    assert!(out.contains("article rating: 60.00%"), "{out}");
}

#[test]
fn all_fives_article_ranks_first() {
    let dir = two_articles();
    let out = ok(rubric(dir.path(), &["rank", "--profile", "ism"]));
    let rows: Vec<&str> = out.lines().skip(2).collect();
    assert!(
        rows[0].starts_with("1     b") && rows[0].contains("100.00%"),
        "{out}"
    );
    assert!(
        rows[1].starts_with("2     a") && rows[1].contains("75.56%"),
        "{out}"
    );

    let json = ok(rubric(dir.path(), &["--json", "rank", "--profile", "ism"]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["entries"][0]["article_id"], "b");
    assert_eq!(v["entries"][0]["rank"], 1);
}

#[test]
fn export_contains_rating_and_round_trips() {
    let dir = two_articles();
    let s = dir.path();
    let ratings = ok(rubric(s, &["export", "ratings", "--profile", "ism"]));
    assert!(
        ratings.contains("a,Article A,80.00%,66.67%,75.56%,2"),
        "{ratings}"
    );

    let sheet_path = s.join("scores.csv");
    ok(rubric(
        s,
        &[
            "export",
            "scores",
            "--profile",
            "ism",
            "--output",
            sheet_path.to_str().unwrap(),
        ],
    ));
    let before = FileStore::open(s).unwrap().list_assessments().unwrap();

    // Import into a fresh store holding the same profile and articles.
    let other = tempfile::tempdir().unwrap();
    let t = other.path();
    ok(rubric(t, &["init"]));
    ok(rubric(
        t,
        &[
            "profile", "create", "ism", "--name", "ISM", "--set", "1=4", "--set", "2=2", "--set",
            "1.1=5", "--set", "2.1=4", "--set", "2.2=5",
        ],
    ));
    ok(rubric(t, &["article", "add", "a", "--title", "Article A"]));
    ok(rubric(t, &["article", "add", "b", "--title", "Article B"]));
    ok(rubric(
        t,
        &["import", sheet_path.to_str().unwrap(), "--profile", "ism"],
    ));
    let after = FileStore::open(t).unwrap().list_assessments().unwrap();
    assert_eq!(before.len(), after.len());
    for (x, y) in before.iter().zip(&after) {
        assert!(x.content_eq(y), "{x:?} vs {y:?}");
    }
}

#[test]
fn whatif_and_scan_leave_the_store_unchanged() {
    let dir = two_articles();
    let s = dir.path();
    let digest = FileStore::open(s).unwrap().content_digest().unwrap();
    let out = ok(rubric(s, &["whatif", "--profile", "ism", "--set", "1=1"]));
    assert!(out.contains("no rank reversals"), "{out}");
    let out = ok(rubric(s, &["whatif", "--profile", "ism", "--scan"]));
    assert!(out.lines().any(|l| l.starts_with("1 ")), "{out}");
    ok(rubric(s, &["rank", "--profile", "ism"]));
    assert_eq!(
        FileStore::open(s).unwrap().content_digest().unwrap(),
        digest
    );
}

#[test]
fn errors_and_exit_codes() {
    let dir = two_articles();
    let s = dir.path();

    let o = rubric(s, &["profile", "create", "z", "--name", "Z"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("error[all_zero_importance]"),
        "{}",
        stderr(&o)
    );

    let o = rubric(
        s,
        &["profile", "set-importance", "ism", "1=3", "--revision", "0"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("conflict"));

    let o = rubric(s, &["article", "delete", "a"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("referenced"));

    let o = rubric(s, &["--json", "rate", "missing"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(v["code"], "not_found");

    assert_eq!(rubric(s, &["no-such-command"]).status.code(), Some(2));
    assert_eq!(rubric(s, &["rank"]).status.code(), Some(2));
    assert_eq!(
        rubric(s, &["profile", "set-importance", "ism", "oops"])
            .status
            .code(),
        Some(2)
    );

    let empty = tempfile::tempdir().unwrap();
    let o = rubric(&empty.path().join("none"), &["catalog", "list"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("store_not_initialized"));
}

#[test]
fn store_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_rubric"))
        .args(["init"])
        .env("RUBRIC_STORE", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_rubric"))
        .args(["catalog", "list"])
        .env("RUBRIC_STORE", dir.path())
        .output()
        .unwrap();
    assert_eq!(stdout(&o), "builtin@1\n");
}

#[test]
fn catalog_show_lists_the_framework() {
    let dir = tempfile::tempdir().unwrap();
    ok(rubric(dir.path(), &["init"]));
    let out = ok(rubric(dir.path(), &["catalog", "show"]));
    assert!(
        out.starts_with("catalog builtin@1 (11 categories, 33 criteria)"),
        "{out}"
    );
    let json = ok(rubric(
        dir.path(),
        &["--json", "catalog", "show", "builtin"],
    ));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["categories"].as_array().unwrap().len(), 11);
}

fn has_path(cmd: &clap::Command, path: &[&str]) -> bool {
    match path.split_first() {
        None => true,
        Some((head, rest)) => {
            if head.starts_with("--") {
                let name = head.trim_start_matches("--");
                return cmd.get_arguments().any(|a| a.get_long() == Some(name));
            }
            cmd.find_subcommand(head)
                .is_some_and(|sub| has_path(sub, rest))
        }
    }
}

#[test]
fn every_endpoint_has_a_cli_command() {
    let cli = Cli::command();
    for (endpoint, command) in rubric_service::PARITY {
        let path: Vec<&str> = command.split_whitespace().collect();
        assert!(
            has_path(&cli, &path),
            "{endpoint} maps to missing command {command:?}"
        );
    }
    // Every top-level command is either mapped or local to the CLI.
    let local = ["init", "demo", "serve", "help"];
    for sub in cli.get_subcommands() {
        let name = sub.get_name();
        assert!(
            local.contains(&name)
                || rubric_service::PARITY
                    .iter()
                    .any(|(_, c)| c.split_whitespace().next() == Some(name)),
            "command {name:?} has no endpoint"
        );
    }
}

#[test]
fn serve_answers_http() {
    let dir = tempfile::tempdir().unwrap();
    ok(rubric(dir.path(), &["init"]));
    let mut child = Command::new(env!("CARGO_BIN_EXE_rubric"))
        .args([
            "--store",
            dir.path().to_str().unwrap(),
            "serve",
            "--addr",
            "127.0.0.1:0",
        ])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let addr = line.trim().rsplit("http://").next().unwrap().to_string();

    let mut conn = TcpStream::connect(&addr).unwrap();
    write!(
        conn,
        "GET /api/catalogs/builtin HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n"
    )
    .unwrap();
    let mut resp = String::new();
    conn.read_to_string(&mut resp).unwrap();
    child.kill().unwrap();
    let _ = child.wait();
    assert!(resp.starts_with("HTTP/1.1 200"), "{resp}");
    assert!(resp.contains("\"Clarity\""));
}
