use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use truthscore::corpus::{save_dataset, ContextDoc, Dataset, Language, Record};
use truthscore::synthetic;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_truthscore"));
    for var in ["TRUTHSCORE_CONFIG", "TRUTHSCORE_PROFILE", "TRUTHSCORE_WORKERS", "TRUTHSCORE_SEED"] {
        c.env_remove(var);
    }
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_dataset(dir: &TempDir, name: &str, ds: &Dataset) -> PathBuf {
    let p = dir.path().join(name);
    save_dataset(ds, &p).unwrap();
    p
}

/// Writes a config with the synthetic product vocabulary as company terms.
fn english_config(dir: &TempDir) -> PathBuf {
    std::fs::write(dir.path().join("terms.txt"), synthetic::company_terms().join("\n")).unwrap();
    let p = dir.path().join("truthscore.toml");
    std::fs::write(&p, "profile = \"english\"\n[paths.english_lexicon]\ncompany_terms = \"terms.txt\"\n").unwrap();
    p
}

fn scored_lines(path: &Path) -> Vec<serde_json::Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn classify_example_messages() {
    let dir = TempDir::new().unwrap();
    let msgs = [
        ("e1", "I get the error: mutation cannot be executed", "error"),
        ("e2", "Would it be possible to adjust tax rates manually?", "binary"),
        ("e3", "How would I adjust tax rates manually?", "instruction"),
        ("e4", "I have adjusted tax settings, why don't I see a payslip anymore?", "reasoning"),
        ("e5", "write an email to notify customers of the new tax rates.", "reasoning"),
        ("e6", "Good morning", "reasoning"),
        ("e7", "I just ate a sandwich", "reasoning"),
    ];
    let ds = Dataset {
        name: "examples".into(),
        records: msgs.iter().map(|(id, m, _)| Record::new(*id, *m, "ok")).collect(),
    };
    let data = write_dataset(&dir, "examples.jsonl", &ds);
    let labels = dir.path().join("labels.tsv");
    let stdout = ok(&["classify", "--dataset", s(&data), "--out", s(&labels)]);

    let got = std::fs::read_to_string(&labels).unwrap();
    let want: String = msgs.iter().map(|(id, _, t)| format!("{id}\t{t}\n")).collect();
    assert_eq!(got, want);
    assert!(stdout.contains("reasoning    4"), "{stdout}");
    assert!(stdout.contains("binary       1"), "{stdout}");
}

#[test]
fn classify_empty_dataset_and_missing_rules() {
    let dir = TempDir::new().unwrap();
    let empty = dir.path().join("empty.jsonl");
    std::fs::write(&empty, "").unwrap();
    let stdout = ok(&["classify", "--dataset", s(&empty)]);
    assert_eq!(stdout.lines().count(), 7);
    assert!(stdout.lines().all(|l| l.ends_with(" 0")));

    let out = run(&["classify", "--dataset", s(&empty), "--rules", "/nonexistent/rules.toml"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("rules"));
}

#[test]
fn score_planted_corpus() {
    let dir = TempDir::new().unwrap();
    let (ds, truth) = synthetic::planted_truth(40, 11);
    let data = write_dataset(&dir, "planted.jsonl", &ds);
    let cfg = english_config(&dir);
    let out = dir.path().join("scored.jsonl");
    let stdout = ok(&["--config", s(&cfg), "score", "--dataset", s(&data), "--out", s(&out)]);

    let lines = scored_lines(&out);
    assert_eq!(lines.len(), 40);
    let mut below = 0;
    for (line, is_true) in lines.iter().zip(&truth) {
        assert_eq!(line["schema_version"], 1);
        assert_eq!(line["abstained"], false);
        let score = line["score"].as_f64().unwrap();
        if *is_true {
            assert!(score >= 3.0, "{line}");
        } else {
            assert_eq!(line["override"], "component_fail", "{line}");
            assert_eq!(score, 1.0);
        }
        if score < 3.0 {
            below += 1;
        }
    }
    assert!(stdout.contains(&format!("{below} scored records below 3")), "{stdout}");
}

#[test]
fn score_is_byte_identical_across_runs_and_workers() {
    let dir = TempDir::new().unwrap();
    let ds = synthetic::mixed_types(30, 5);
    let data = write_dataset(&dir, "mixed.jsonl", &ds);
    let cfg = english_config(&dir);
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    ok(&["--config", s(&cfg), "--workers", "1", "score", "--dataset", s(&data), "--out", s(&a)]);
    ok(&["--config", s(&cfg), "--workers", "4", "score", "--dataset", s(&data), "--out", s(&b)]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let abstained = scored_lines(&a).iter().filter(|l| l["abstained"] == true).count();
    assert!(abstained > 0);
}

#[test]
fn english_profile_rejects_untagged_records() {
    let dir = TempDir::new().unwrap();
    let ds = Dataset {
        name: "nl".into(),
        records: vec![Record::new("r1", "Kan ik de belasting aanpassen?", "Ja.")],
    };
    let data = write_dataset(&dir, "nl.jsonl", &ds);
    let out = run(&[
        "--profile",
        "english",
        "score",
        "--dataset",
        s(&data),
        "--out",
        s(&dir.path().join("o.jsonl")),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("r1"));
}

fn dutch_dataset() -> Dataset {
    let ctx = "Belasting wijzigen:\n1. Ga naar: Salaris Instellingen\n2. Klik op: Belasting Tabel\n3. Pas de belasting aan";
    let records = vec![
        Record::new(
            "nl-1",
            "Is het mogelijk om de belasting aan te passen?",
            "Ja, dat kan.\n1. Ga naar: Salaris Instellingen\n2. Klik op: Belasting Tabel\n3. Pas de belasting aan",
        )
        .with_context(ContextDoc::new("d1", "Belasting", ctx))
        .with_rating(5),
        Record::new(
            "nl-2",
            "Hoe kan ik de belasting aanpassen?",
            "Klik op: Winst Tovenaar en bevestig.",
        )
        .with_context(ContextDoc::new("d2", "Belasting", ctx))
        .with_rating(1),
    ];
    Dataset {
        name: "nl".into(),
        records: records.into_iter().map(|r| r.with_language(Language::Dutch)).collect(),
    }
}

fn translate_config(dir: &TempDir) -> PathBuf {
    std::fs::write(
        dir.path().join("dict.tsv"),
        "belasting\ttax\nga\tgo\nnaar\tto\nklik\tclick\nop\ton\npas\tadjust\nde\tthe\naan\t\nsalaris\tsalary\ninstellingen\tsettings\ntabel\ttable\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("rules_nl.toml"),
        r#"reasoning_matches_missing_question_mark = true
[[types]]
type = "error"
patterns = ["fout"]
[[types]]
type = "general"
patterns = ["uitleg", "wat is"]
[[types]]
type = "reasoning"
patterns = ["waarom"]
[[types]]
type = "instruction"
patterns = ["hoe ", "waar "]
[[types]]
type = "binary"
patterns = ["mogelijk", "kan "]
"#,
    )
    .unwrap();
    let p = dir.path().join("tr.toml");
    std::fs::write(
        &p,
        "[paths]\nrules = \"rules_nl.toml\"\ntranslation_cache = \"cache.jsonl\"\n[translation]\nendpoint = \"stub:dict.tsv\"\n",
    )
    .unwrap();
    p
}

#[test]
fn translated_scoring_with_stub_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let data = write_dataset(&dir, "nl.jsonl", &dutch_dataset());
    let cfg = translate_config(&dir);
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    ok(&["--config", s(&cfg), "score", "--translate", "--dataset", s(&data), "--out", s(&a)]);
    assert!(dir.path().join("cache.jsonl").exists());
    ok(&["--config", s(&cfg), "score", "--translate", "--dataset", s(&data), "--out", s(&b)]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let lines = scored_lines(&a);
    assert_eq!(lines[0]["override"], "guide_match");
    assert_eq!(lines[1]["override"], "component_fail");
}

#[test]
fn warm_fills_the_cache() {
    let dir = TempDir::new().unwrap();
    let data = write_dataset(&dir, "nl.jsonl", &dutch_dataset());
    let cfg = translate_config(&dir);
    let stdout = ok(&["--config", s(&cfg), "translate-cache", "warm", "--dataset", s(&data)]);
    assert!(stdout.starts_with("2 records translated"), "{stdout}");
    let cache = std::fs::read_to_string(dir.path().join("cache.jsonl")).unwrap();
    assert!(cache.contains("tax"));
}

#[test]
fn evaluate_writes_report_and_ablation() {
    let dir = TempDir::new().unwrap();
    let (ds, _) = synthetic::planted_truth(30, 2);
    let data = write_dataset(&dir, "planted.jsonl", &ds);
    let cfg = english_config(&dir);
    let out_dir = dir.path().join("report");
    let stdout = ok(&[
        "--config",
        s(&cfg),
        "evaluate",
        "--dataset",
        s(&data),
        "--out-dir",
        s(&out_dir),
        "--ablate",
    ]);
    assert!(stdout.contains("30 scored"), "{stdout}");
    for f in ["summary.json", "correlation.csv", "thresholds.csv", "ablation.csv", "report.txt"] {
        assert!(out_dir.join(f).exists(), "{f} missing");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert!(summary["correlation"]["rho"].as_f64().unwrap() > 0.5);

    let again = dir.path().join("report2");
    ok(&["--config", s(&cfg), "evaluate", "--dataset", s(&data), "--out-dir", s(&again), "--ablate"]);
    for f in ["summary.json", "correlation.csv", "thresholds.csv", "ablation.csv", "classification.csv"] {
        assert_eq!(std::fs::read(out_dir.join(f)).unwrap(), std::fs::read(again.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn evaluate_without_ratings_marks_correlation() {
    let dir = TempDir::new().unwrap();
    let (mut ds, _) = synthetic::planted_truth(10, 4);
    for r in &mut ds.records {
        r.human_rating = None;
    }
    let data = write_dataset(&dir, "unrated.jsonl", &ds);
    let cfg = english_config(&dir);
    let out_dir = dir.path().join("r");
    ok(&["--config", s(&cfg), "evaluate", "--dataset", s(&data), "--out-dir", s(&out_dir)]);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert!(summary["correlation"].is_null());
    assert!(summary["correlation_note"].is_string());
    assert!(!out_dir.join("ablation.csv").exists());
}

#[test]
fn permutations_need_a_seed() {
    let dir = TempDir::new().unwrap();
    let (ds, _) = synthetic::planted_truth(10, 4);
    let data = write_dataset(&dir, "p.jsonl", &ds);
    let cfg = english_config(&dir);
    let out_dir = dir.path().join("r");
    let base = ["--config", s(&cfg), "evaluate", "--dataset", s(&data), "--out-dir", s(&out_dir)];
    let out = run(&[&base[..], &["--permutations", "200"]].concat());
    assert!(!out.status.success());
    ok(&[&base[..], &["--permutations", "200", "--seed", "7"]].concat());
}

#[test]
fn build_lexicon_ranks_non_general_words() {
    let dir = TempDir::new().unwrap();
    let docs = dir.path().join("docs");
    std::fs::create_dir(&docs).unwrap();
    std::fs::write(docs.join("a.txt"), "payroll payroll payroll payslip payslip the report").unwrap();
    std::fs::write(docs.join("b.txt"), "payroll ledger ledger payslip report house").unwrap();
    let general = dir.path().join("general.txt");
    std::fs::write(&general, "report\nhouse\n").unwrap();
    let out = dir.path().join("terms.txt");
    ok(&[
        "--profile",
        "english",
        "build-lexicon",
        "--help-docs",
        s(&docs),
        "--general",
        s(&general),
        "--n",
        "5",
        "--out",
        s(&out),
    ]);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "payroll\npayslip\nledger\n");

    let empty = dir.path().join("none");
    std::fs::create_dir(&empty).unwrap();
    let res = run(&["build-lexicon", "--help-docs", s(&empty), "--out", s(&out)]);
    assert!(!res.status.success());
}

#[test]
fn env_overrides_profile() {
    let dir = TempDir::new().unwrap();
    let ds = Dataset {
        name: "nl".into(),
        records: vec![Record::new("r1", "Kan dit?", "Ja.")],
    };
    let data = write_dataset(&dir, "nl.jsonl", &ds);
    let out = bin()
        .env("TRUTHSCORE_PROFILE", "english")
        .args(["score", "--dataset", s(&data), "--out", s(&dir.path().join("o.jsonl"))])
        .output()
        .unwrap();
    assert!(!out.status.success());
    ok(&["score", "--dataset", s(&data), "--out", s(&dir.path().join("o.jsonl"))]);
}
