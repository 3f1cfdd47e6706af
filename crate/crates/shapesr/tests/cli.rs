use std::path::Path;
use std::process::{Command, Output};

fn shapesr(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shapesr"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn generate_writes_both_splits() {
    let dir = tempfile::tempdir().unwrap();
    let o = shapesr(
        &["generate", "I.6.20", "--noise", "--seed", "3", "--out", "d"],
        dir.path(),
    );
    assert!(o.status.success(), "{o:?}");
    let train = shapesr::csvio::load_csv(&dir.path().join("d/train.csv"), "y").unwrap();
    let test = shapesr::csvio::load_csv(&dir.path().join("d/test.csv"), "y").unwrap();
    assert_eq!((train.len(), test.len(), train.dim()), (100, 100, 2));
    let p = shapesr::problem::resolve("I.6.20", true, 3).unwrap();
    assert_eq!(train, p.train);
}

#[test]
fn unknown_problem_lists_names() {
    let dir = tempfile::tempdir().unwrap();
    let o = shapesr(&["generate", "Nope"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("unknown problem 'Nope'")
            && err.contains("Fuel flow")
            && err.contains("III.10.19")
    );
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        shapesr(&["run", "--algo", "sgd", "--problem", "I.6.20"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(shapesr(&["frobnicate"], dir.path()).status.code(), Some(2));
}

#[test]
fn run_check_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |algo: &str, extra: &[&str]| {
        let mut args = vec![
            "run",
            "--algo",
            algo,
            "--problem",
            "Fuel flow",
            "--pop-size",
            "30",
            "--generations",
            "5",
            "--out",
            "r",
        ];
        args.extend_from_slice(extra);
        shapesr(&args, d)
    };
    let o = run("gp", &["--constraints", "--audit-samples", "1000"]);
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("test NMSE:"));
    let o = run("itea", &[]);
    assert!(o.status.success(), "{o:?}");
    let records = shapesr::experiment::read_records(&d.join("r/records.jsonl")).unwrap();
    assert_eq!(records.len(), 2);
    assert!(records[0].audit.is_some() && records[0].constraints);

    let file = shapesr::ModelFile::load(&d.join("r/model.toml")).unwrap();
    assert_eq!(file.provenance.algorithm, "ITEA");
    assert_eq!(file.provenance.variables, ["Astar", "p0", "T0"]);

    let o = shapesr(&["check", "r/model.toml", "--samples", "2000"], d);
    let out = stdout(&o);
    assert_eq!(
        out.lines()
            .filter(|l| l.contains("of 2000 violated"))
            .count(),
        3,
        "{out}"
    );
    let feasible = out.lines().last() == Some("feasible");
    assert_eq!(o.status.code(), Some(if feasible { 0 } else { 1 }));

    let o = shapesr(&["report", "medians", "r/records.jsonl"], d);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("problem,algorithm,constraints,runs,train_nmse,test_nmse\n"));
    assert_eq!(text.lines().count(), 3);
    let o = shapesr(
        &["report", "violations", "r/records.jsonl", "--out", "v.csv"],
        d,
    );
    assert!(o.status.success());
    assert_eq!(
        std::fs::read_to_string(d.join("v.csv"))
            .unwrap()
            .lines()
            .count(),
        2
    );
}

#[test]
fn check_rejects_infeasible_model() {
    let dir = tempfile::tempdir().unwrap();
    // increasing in T0, which the problem requires to be non-increasing
    let model = "kind = \"tree\"\nexpression = \"x2\"\n\n[scaling]\na = 0.0\nb = 1.0\n\n[provenance]\nproblem = \"Fuel flow (noisy)\"\nalgorithm = \"GP\"\nseed = 0\nconstraints = false\nvariables = [\"Astar\", \"p0\", \"T0\"]\n";
    std::fs::write(dir.path().join("m.toml"), model).unwrap();
    let o = shapesr(&["check", "m.toml", "--samples", "100"], dir.path());
    assert_eq!(o.status.code(), Some(1), "{o:?}");
    let out = stdout(&o);
    assert!(out.contains("d/dx2 f <= 0: 100 of 100 violated"), "{out}");
    assert!(out.contains("d/dx0 f >= 0: 0 of 100 violated"), "{out}");
}

#[test]
fn fiit_without_constraints_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let toml = "builtin = \"I.6.20\"\nmonotonicity = [0, 0]\nn_train = 20\nn_test = 20\n";
    std::fs::write(dir.path().join("p.toml"), toml).unwrap();
    let base = [
        "run",
        "--algo",
        "fiit",
        "--problem",
        "p.toml",
        "--pop-size",
        "10",
        "--generations",
        "2",
    ];
    let o = shapesr(&base, dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--allow-empty-constraints"));
    let mut args = base.to_vec();
    args.push("--allow-empty-constraints");
    assert!(shapesr(&args, dir.path()).status.success());
}

#[test]
fn batch_writes_records_and_medians() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_shapesr"))
        .args([
            "batch",
            "--problems",
            "I.6.20,Fuel flow",
            "--algos",
            "gp,itea",
            "--constraints",
            "both",
            "--noise",
            "off",
        ])
        .args([
            "--reps",
            "2",
            "--pop-size",
            "10",
            "--generations",
            "2",
            "--out",
            "b",
        ])
        .env("SHAPESR_WORKERS", "2")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{o:?}");
    let records = shapesr::experiment::read_records(&dir.path().join("b/records.jsonl")).unwrap();
    // GP on and off, ITEA once: 2 problems x 3 variants x 2 reps
    assert_eq!(records.len(), 12);
    let medians = std::fs::read_to_string(dir.path().join("b/medians.csv")).unwrap();
    assert_eq!(medians.lines().count(), 7);
}
