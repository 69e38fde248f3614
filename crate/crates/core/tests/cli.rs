use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn planbench(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_planbench"))
        .args(args)
        .current_dir(dir)
        .env_remove("PLANBENCH_OUT")
        .output()
        .expect("spawn planbench")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = planbench(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn gen(dir: &Path, data: &str) {
    ok(dir, &["gen", "--seed", "3", "--per-split", "4", "--train-demos", "20", "--out", data]);
}

#[test]
fn gen_train_run_report() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    gen(dir, "data");
    assert!(dir.join("data/dataset.json").exists());
    ok(dir, &["train", "--data", "data"]);
    ok(dir, &["train", "--data", "data", "--no-stop"]);
    assert!(dir.join("data/models/factored.json").exists());
    assert!(dir.join("data/models/factored-nostop.json").exists());

    let stdout = ok(
        dir,
        &["run", "--data", "data", "--predictors", "oracle,coref-oracle", "--modes", "direct,assisted", "--jobs", "2"],
    );
    assert!(stdout.contains("oracle/assisted"));
    let run = dir.join("data/runs/default");
    let csv = fs::read_to_string(run.join("report.csv")).unwrap();
    assert!(csv.starts_with("condition,split,task,"));
    for split in ["divided_val_seen", "divided_test_seen", "divided_val_unseen", "divided_test_unseen"] {
        let rows = csv.lines().filter(|l| l.contains(&format!(",{split},all,"))).count();
        assert_eq!(rows, 4, "{split}");
    }
    let trace = fs::read_to_string(run.join("traces/oracle__assisted").join(first_instance(&run))).unwrap();
    assert!(trace.contains("\"records\""));
    let text = fs::read_to_string(run.join("report.txt")).unwrap();
    assert_eq!(ok(dir, &["report", "--run", "data/runs/default"]), text);

    // Resuming reuses every episode and reproduces the report.
    let again = ok(
        dir,
        &["run", "--data", "data", "--predictors", "oracle,coref-oracle", "--modes", "direct,assisted", "--resume"],
    );
    assert!(!again.contains("(0 resumed)"));
    assert_eq!(fs::read_to_string(run.join("report.csv")).unwrap(), csv);

    let factored = ok(
        dir,
        &[
            "run",
            "--data",
            "data",
            "--predictors",
            "factored,hierarchical,masked,factored-nostop,baseline,random",
            "--out",
            "r2",
        ],
    );
    assert!(factored.contains("masked/direct"));
}

fn first_instance(run: &Path) -> String {
    let mut names: Vec<_> = fs::read_dir(run.join("results/oracle__assisted"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names.swap_remove(0)
}

#[test]
fn gen_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "a");
    gen(tmp.path(), "b");
    let listing = |d: &str| {
        let mut files: Vec<_> = walk(&tmp.path().join(d));
        files.sort();
        files
    };
    let (a, b) = (listing("a"), listing("b"));
    assert_eq!(a.len(), b.len());
    for ((pa, ca), (pb, cb)) in a.iter().zip(&b) {
        assert_eq!(pa, pb);
        assert_eq!(ca, cb, "{pa}");
    }
}

fn walk(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().display().to_string();
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    out
}

#[test]
fn data_dir_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_planbench"))
        .args(["gen", "--seed", "1", "--per-split", "2", "--train-demos", "5"])
        .current_dir(tmp.path())
        .env("PLANBENCH_OUT", "envdata")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(tmp.path().join("envdata/dataset.json").exists());
}

#[test]
fn errors_exit_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let missing = planbench(dir, &["run", "--data", "nowhere"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error:"));

    ok(dir, &["gen", "--seed", "1", "--per-split", "2", "--train-demos", "5", "--out", "d"]);
    let unknown = planbench(dir, &["run", "--data", "d", "--predictors", "psychic"]);
    assert_eq!(unknown.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("psychic"));

    let untrained = planbench(dir, &["run", "--data", "d", "--predictors", "factored"]);
    assert_eq!(untrained.status.code(), Some(1));

    assert_eq!(planbench(dir, &["run", "--modes", "sideways"]).status.code(), Some(1));
    assert_eq!(planbench(dir, &["report", "--run", "d"]).status.code(), Some(1));
    assert_eq!(planbench(dir, &["--help"]).status.code(), Some(0));
}
