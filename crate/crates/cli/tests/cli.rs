use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use hids_core::flowdata::CICIDS_LABELS;
use hids_core::metrics::parse_report;
use hids_core::synth::{generate, SynthSpec};

fn hids(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hids")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = hids(args);
    assert!(
        out.status.success(),
        "hids {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Cleaned, split and trained once; shared by the read-only tests.
struct Trained {
    _dir: tempfile::TempDir,
    out: PathBuf,
}

impl Trained {
    fn file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn trained() -> &'static Trained {
    static CELL: OnceLock<Trained> = OnceLock::new();
    CELL.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let spec = SynthSpec::small(3);
        let data = dir.path().join("flows.csv");
        std::fs::write(&data, generate(&spec)).unwrap();
        let mut split = String::from("train_policy = random\ntest_policy = random\n");
        for (label, n) in CICIDS_LABELS.iter().zip(&spec.counts) {
            split.push_str(&format!("{label} = {} {}\n", n * 2 / 5, n * 2 / 5));
        }
        let split_file = dir.path().join("split.txt");
        std::fs::write(&split_file, split).unwrap();

        let out = dir.path().join("out");
        let o = s(&out);
        ok(&["clean", s(&data), "--out-dir", o]);
        let cleaned = out.join("cleaned.csv");
        ok(&["split", s(&cleaned), "--spec", s(&split_file), "--seed", "3", "--out-dir", o]);
        ok(&["train", s(&out.join("train.csv")), "--seed", "3", "--set", "stage3.tree_count=5", "--out-dir", o]);
        Trained { _dir: dir, out }
    })
}

#[test]
fn clean_reports_deltas() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("flows.csv");
    let spec = SynthSpec::small(1);
    std::fs::write(&data, generate(&spec)).unwrap();
    let stdout = ok(&["clean", s(&data), "--out-dir", s(dir.path())]);
    let kept = spec.total() - spec.marker_rows;
    assert!(stdout.contains(&format!("rows: {} -> {kept}", spec.total())), "{stdout}");
    assert!(stdout.contains("(-2)"), "two constant columns dropped: {stdout}");
    let provenance = std::fs::read_to_string(dir.path().join("cleaned.provenance.txt")).unwrap();
    assert!(provenance.contains("drop_constant_features"));
}

#[test]
fn evaluate_writes_both_report_formats() {
    let t = trained();
    let eval_dir = tempfile::tempdir().unwrap();
    let model = t.file("hierarchy.model");
    let table = ok(&["evaluate", s(&model), s(&t.file("test.csv")), "--out-dir", s(eval_dir.path())]);
    assert!(table.contains("TNR (BENIGN)") && table.contains("Accuracy"), "{table}");
    assert!(!table.contains("Training Time"));

    let kv = ok(&[
        "evaluate",
        s(&model),
        s(&t.file("test.csv")),
        "--format",
        "kv",
        "--timing",
        "--out-dir",
        s(eval_dir.path()),
    ]);
    let report = parse_report(&kv).unwrap();
    assert!(report.test_seconds.is_some());
    assert!(report.accuracy.value() > 0.9, "{}", report.accuracy);
}

#[test]
fn training_accuracy_is_at_least_test_accuracy() {
    let t = trained();
    let dir = tempfile::tempdir().unwrap();
    let model = t.file("hierarchy.model");
    let acc = |file: &str| {
        let kv = ok(&["evaluate", s(&model), s(&t.file(file)), "--format", "kv", "--out-dir", s(dir.path())]);
        parse_report(&kv).unwrap().accuracy.value()
    };
    assert!(acc("train.csv") >= acc("test.csv"));
}

#[test]
fn predict_appends_three_columns() {
    let t = trained();
    let dir = tempfile::tempdir().unwrap();
    // first ten test rows without their labels
    let test = std::fs::read_to_string(t.file("test.csv")).unwrap();
    let unlabeled: String = test
        .lines()
        .take(11)
        .map(|l| format!("{}\n", &l[..l.rfind(',').unwrap()]))
        .collect();
    let input = dir.path().join("rows.csv");
    std::fs::write(&input, unlabeled).unwrap();
    ok(&["predict", s(&t.file("hierarchy.model")), s(&input), "--out-dir", s(dir.path())]);

    let mut rdr = csv::Reader::from_path(dir.path().join("predictions.csv")).unwrap();
    let header = rdr.headers().unwrap().clone();
    let width = test.lines().next().unwrap().split(',').count() - 1;
    assert_eq!(header.len(), width + 3);
    assert_eq!(header.iter().skip(width).collect::<Vec<_>>(), ["Stage1", "Stage2", "Prediction"]);
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 10);
    for r in &rows {
        assert!(["BENIGN", "Attack"].contains(&&r[width]));
        assert!(CICIDS_LABELS.contains(&&r[width + 2]));
    }
}

#[test]
fn predict_rejects_bad_rows_without_output() {
    let t = trained();
    let dir = tempfile::tempdir().unwrap();
    let test = std::fs::read_to_string(t.file("test.csv")).unwrap();
    let mut lines: Vec<String> = test.lines().take(4).map(String::from).collect();
    lines[2] = "1,2,3".into();
    let input = dir.path().join("rows.csv");
    std::fs::write(&input, lines.join("\n") + "\n").unwrap();
    let out = hids(&["predict", s(&t.file("hierarchy.model")), s(&input), "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));
    assert!(!dir.path().join("predictions.csv").exists());
}

#[test]
fn exit_codes() {
    let t = trained();
    let dir = tempfile::tempdir().unwrap();
    let d = s(dir.path());
    let cleaned = t.file("cleaned.csv");
    let code = |args: &[&str]| hids(args).status.code();

    // configuration
    assert_eq!(code(&["split", s(&cleaned), "--out-dir", d]), Some(3), "seed is required");
    assert_eq!(code(&["train", s(&t.file("train.csv")), "--seed", "1", "--set", "stage1.bogus=1", "--out-dir", d]), Some(3));
    assert_eq!(code(&["train", s(&t.file("train.csv")), "--seed", "1", "--set", "stage2.learner=nope", "--out-dir", d]), Some(3));
    assert_eq!(code(&["frobnicate"]), Some(3));
    assert_eq!(code(&["evaluate", "--format", "xml", s(&t.file("hierarchy.model")), s(&cleaned)]), Some(3));

    // input
    assert_eq!(code(&["evaluate", "missing.model", s(&cleaned), "--out-dir", d]), Some(2));
    assert_eq!(code(&["clean", "missing.csv", "--out-dir", d]), Some(2));
    let garbage = dir.path().join("garbage.model");
    std::fs::write(&garbage, "not a model\n").unwrap();
    assert_eq!(code(&["predict", s(&garbage), s(&cleaned), "--out-dir", d]), Some(2));

    // the table2 preset needs far more rows than the synthetic set has
    assert_ne!(code(&["split", s(&cleaned), "--seed", "1", "--out-dir", d]), Some(0));
    assert!(!dir.path().join("train.csv").exists());
}

#[test]
fn empty_test_file() {
    let t = trained();
    let dir = tempfile::tempdir().unwrap();
    let header = std::fs::read_to_string(t.file("test.csv")).unwrap().lines().next().unwrap().to_string();
    let input = dir.path().join("empty.csv");
    std::fs::write(&input, header + "\n").unwrap();
    let out = hids(&["evaluate", s(&t.file("hierarchy.model")), s(&input), "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("report.kv").exists());
}

#[test]
fn tampered_model_is_rejected() {
    let t = trained();
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(t.file("hierarchy.model")).unwrap();
    let model = dir.path().join("m.model");
    let tampered = text.replacen("class BENIGN", "class BENIGM", 1);
    assert_ne!(tampered, text);
    std::fs::write(&model, tampered).unwrap();
    let out = hids(&["evaluate", s(&model), s(&t.file("test.csv")), "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}
