use std::path::Path;
use std::process::{Command, Output};

fn cnp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cnp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_star(dir: &Path, name: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, "# star\n0 1\n0 2\n0 3\n0 4\n0 5\n").unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn solve_prints_json_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_star(dir.path(), "star.txt");
    let trace = dir.path().join("trace.jsonl");
    let out = cnp(&[
        "solve",
        "--instance",
        &inst,
        "--k",
        "1",
        "--max-generations",
        "4",
        "--seed",
        "3",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["f_best"], 0);
    assert_eq!(v["nodes"], serde_json::json!([0]));
    assert_eq!(v["generations"], 4);
    let lines = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(lines.lines().count(), 4);
    let first: serde_json::Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    assert_eq!(first["gen"], 1);
    assert_eq!(first["ps"], 2);
}

#[test]
fn solve_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_star(dir.path(), "star.txt");
    // k >= n
    let out = cnp(&[
        "solve",
        "--instance",
        &inst,
        "--k",
        "6",
        "--max-generations",
        "1",
    ]);
    assert!(!out.status.success());
    // no budget
    let out = cnp(&["solve", "--instance", &inst, "--k", "1"]);
    assert!(!out.status.success());
    // k missing for an unregistered name
    let out = cnp(&["solve", "--instance", &inst, "--max-generations", "1"]);
    assert!(!out.status.success());
    let out = cnp(&[
        "solve",
        "--instance",
        "/nonexistent",
        "--k",
        "1",
        "--time-limit",
        "1",
    ]);
    assert!(!out.status.success());
    let out = cnp(&[
        "solve",
        "--instance",
        &inst,
        "--k",
        "1",
        "--time-limit",
        "0",
    ]);
    assert!(!out.status.success());
}

#[test]
fn bench_then_compare() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    std::fs::create_dir(&data).unwrap();
    write_star(&data, "star.txt");
    write_star(&data, "star2.txt");
    let registry = dir.path().join("registry.csv");
    std::fs::write(
        &registry,
        "name,n,m,k,f_bkv,optimal\nstar,6,5,1,0,true\nstar2,6,5,2,0,false\n",
    )
    .unwrap();
    let run = |out: &Path, mode: &str| {
        cnp(&[
            "bench",
            "--registry",
            registry.to_str().unwrap(),
            "--data-dir",
            data.to_str().unwrap(),
            "--repeats",
            "2",
            "--max-generations",
            "3",
            "--mode",
            mode,
            "--ps-max",
            "4",
            "--out",
            out.to_str().unwrap(),
        ])
    };
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.json");
    assert!(run(&a, "vpms").status.success());
    assert!(run(&b, "fpms").status.success());

    let csv = std::fs::read_to_string(&a).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("instance,seed,mode,f_best,t_to_best,gens,succ")
    );
    assert_eq!(lines.count(), 4);
    assert!(dir.path().join("a.summary.csv").exists());

    let out = cnp(&[
        "compare",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--indicator",
        "f_avg",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["ties"], 2);
    assert_eq!(r["wins_a"], 1.0);
}

#[test]
fn bench_reports_missing_instances() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r.csv");
    let out = cnp(&[
        "bench",
        "--data-dir",
        dir.path().to_str().unwrap(),
        "--instances",
        "BA500",
        "--repeats",
        "1",
        "--max-generations",
        "1",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("BA500"));
    // the (empty) result file is still written
    assert!(out_path.exists());
}

#[test]
fn compare_rejects_mismatched_sets() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    std::fs::write(
        &a,
        "instance,seed,mode,f_best,t_to_best,gens,succ\nx,1,vpms,3,,0,false\n",
    )
    .unwrap();
    std::fs::write(
        &b,
        "instance,seed,mode,f_best,t_to_best,gens,succ\ny,1,vpms,3,,0,false\n",
    )
    .unwrap();
    let out = cnp(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert!(!out.status.success());
}
