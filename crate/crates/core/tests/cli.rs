use std::path::PathBuf;
use std::process::{Command, Output};

fn qdc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdc")).args(args).env_remove("QDC_CONFIG").output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qdc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn bench_output_is_byte_identical_across_runs() {
    let args = ["bench", "lds", "--nmin", "16", "--nmax", "256", "--trials", "4", "--seed", "9", "--check"];
    let a = qdc(&args);
    let b = qdc(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("problem,n,seed,queries,time_units,wall_ms,correct\n"));
    assert_eq!(text.lines().count(), 1 + 5 * 4);
}

#[test]
fn files_and_json_mirror_are_reproducible() {
    let (c1, c2, j1, j2) = (scratch("a.csv"), scratch("b.csv"), scratch("a.json"), scratch("b.json"));
    for (c, j) in [(&c1, &j1), (&c2, &j2)] {
        let out = qdc(&["bench", "kss", "--nmin", "8", "--nmax", "128", "--trials", "3", "--out", c.to_str().unwrap(), "--json", j.to_str().unwrap()]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&c1).unwrap(), std::fs::read(&c2).unwrap());
    assert_eq!(std::fs::read(&j1).unwrap(), std::fs::read(&j2).unwrap());
    let fit = qdc(&["fit", c1.to_str().unwrap(), "--divisor", "log"]);
    assert!(fit.status.success());
    assert_eq!(fit.stdout, qdc(&["fit", c1.to_str().unwrap(), "--divisor", "log"]).stdout);
}

#[test]
fn verify_reports_and_exit_codes() {
    let ok = qdc(&["verify", "msm", "--n", "6", "--trials", "5"]);
    assert_eq!(ok.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["matches"], 5);
    assert_eq!(qdc(&["verify", "nosuch"]).status.code(), Some(2));
    assert_eq!(qdc(&["verify", "ssst", "--error-p", "0.9"]).status.code(), Some(2));
    assert_eq!(qdc(&["klee-exponent", "--d", "8"]).status.code(), Some(1));
}

#[test]
fn config_file_and_flag_precedence() {
    let cfg = scratch("cfg.json");
    std::fs::write(&cfg, r#"{"seed": 5, "trials": 2}"#).unwrap();
    let from_file = qdc(&["--config", cfg.to_str().unwrap(), "bench", "ssst", "--nmin", "8", "--nmax", "32"]);
    let text = String::from_utf8(from_file.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 2);
    assert!(text.lines().nth(1).unwrap().starts_with("ssst,8,5,"));
    let flagged = qdc(&["--config", cfg.to_str().unwrap(), "bench", "ssst", "--nmin", "8", "--nmax", "32", "--trials", "1"]);
    assert_eq!(String::from_utf8(flagged.stdout).unwrap().lines().count(), 1 + 3);
    std::fs::write(&cfg, r#"{"sede": 5}"#).unwrap();
    assert_eq!(qdc(&["--config", cfg.to_str().unwrap(), "verify", "ssst"]).status.code(), Some(2));
}

#[test]
fn solve_reads_instance_files() {
    let cases = [
        ("ssst", "3 -1 4 -1 5\n", "(6, 2, 5)"),
        ("lds", "abcabcbb", "3"),
        ("msm", "1,-2\n-3,4\n", "(4, (2, 2), (2, 2))"),
        ("klee", r#"{"d": 2, "gamma": {"lo": [0, 0], "hi": [4, 4]}, "boxes": [{"lo": [0, 0], "hi": [4, 2]}, {"lo": [0, 2], "hi": [4, 4]}]}"#, "true"),
    ];
    for (tag, input, want) in cases {
        let path = scratch(&format!("{tag}.in"));
        std::fs::write(&path, input).unwrap();
        let out = qdc(&["solve", tag, path.to_str().unwrap()]);
        assert!(out.status.success(), "{tag}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), want, "{tag}");
    }
}
