//! End-to-end checks of the binary: subcommand grammar, exit codes, and
//! output determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ctop(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctop"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn gen_t1(dir: &Path) -> PathBuf {
    let path = dir.join("t1.json");
    let out = ctop(
        &["gen", "preset", "t1", "--out", path.to_str().unwrap()],
        dir,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn validate_good_instance_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let t1 = gen_t1(dir.path());
    let out = ctop(&["validate", t1.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("\"ok\":true"));
}

#[test]
fn validate_broken_instance_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let t1 = gen_t1(dir.path());
    // rename only the resource definition; arcs and routes still say "P"
    let text = std::fs::read_to_string(&t1)
        .unwrap()
        .replacen("\"P\"", "\"UNKNOWN\"", 1);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, text).unwrap();
    let out = ctop(&["validate", bad.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), 1);
}

#[test]
fn unknown_flag_prints_usage_and_exits_64() {
    let dir = tempfile::tempdir().unwrap();
    let out = ctop(&["validate", "--definitely-not-a-flag"], dir.path());
    assert_eq!(code(&out), 64);
}

#[test]
fn oracle_refuses_oversized_instances_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let case = dir.path().join("case.json");
    let out = ctop(
        &[
            "gen",
            "case-study",
            "--demand-seed",
            "1",
            "--out",
            case.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let out = ctop(
        &["oracle", case.to_str().unwrap(), "--policy", "dynamic"],
        dir.path(),
    );
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn oracle_solves_t1() {
    let dir = tempfile::tempdir().unwrap();
    let t1 = gen_t1(dir.path());
    let out = ctop(
        &["oracle", t1.to_str().unwrap(), "--policy", "two-stage"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let json: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("machine-readable output");
    assert!((json["expected_cost"].as_f64().unwrap() - 3.0).abs() < 1e-6);
}

#[test]
fn compare_t1_writes_ordered_report() {
    let dir = tempfile::tempdir().unwrap();
    let t1 = gen_t1(dir.path());
    let csv_path = dir.path().join("report.csv");
    let out = ctop(
        &[
            "compare",
            t1.to_str().unwrap(),
            "--out",
            csv_path.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("variant,family,policy,expected_cost,ground_q0"));
    let rows: Vec<&str> = lines.collect();
    // six variants plus one perfect-information row per family
    assert_eq!(rows.len(), 8);

    let value = |variant: &str| -> f64 {
        rows.iter()
            .find(|r| r.starts_with(variant))
            .unwrap_or_else(|| panic!("row {variant}"))
            .split(',')
            .nth(3)
            .unwrap()
            .parse()
            .unwrap()
    };
    for family in ["lagrangian", "lagrangian-eulerian"] {
        let pi = value(&format!("{family}/perfect-information"));
        let dy = value(&format!("{family}/dynamic"));
        let semi = value(&format!("{family}/semi-dynamic"));
        let two = value(&format!("{family}/two-stage"));
        assert!(pi <= dy + 1e-6 && dy <= semi + 1e-6 && semi <= two + 1e-6);
    }
}

#[test]
fn gen_and_build_are_deterministic_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args_gen = |out: &str| {
        vec![
            "gen".to_string(),
            "synth".to_string(),
            "--flights".to_string(),
            "8".to_string(),
            "--periods".to_string(),
            "14".to_string(),
            "--seed".to_string(),
            "9".to_string(),
            "--out".to_string(),
            out.to_string(),
        ]
    };
    for name in ["a.json", "b.json"] {
        let args: Vec<String> = args_gen(dir.path().join(name).to_str().unwrap());
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        assert_eq!(code(&ctop(&refs, dir.path())), 0);
    }
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    let b = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b);

    for name in ["m1.mps", "m2.mps"] {
        let out = ctop(
            &[
                "build",
                dir.path().join("a.json").to_str().unwrap(),
                "--family",
                "lagrangian",
                "--policy",
                "dynamic",
                "--format",
                "mps",
                "--out",
                dir.path().join(name).to_str().unwrap(),
            ],
            dir.path(),
        );
        assert_eq!(code(&out), 0);
    }
    let m1 = std::fs::read(dir.path().join("m1.mps")).unwrap();
    let m2 = std::fs::read(dir.path().join("m2.mps")).unwrap();
    assert_eq!(m1, m2);
}

#[test]
fn missing_external_solver_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let t1 = gen_t1(dir.path());
    let out = ctop(
        &[
            "solve",
            t1.to_str().unwrap(),
            "--family",
            "lagrangian",
            "--policy",
            "two-stage",
            "--relax",
            "--external",
            "definitely-not-a-solver {in} {out}",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("solver not found"));
}

#[test]
fn solve_reports_machine_readable_json() {
    let dir = tempfile::tempdir().unwrap();
    let t1 = gen_t1(dir.path());
    let solution = dir.path().join("t1.sol");
    let out = ctop(
        &[
            "solve",
            t1.to_str().unwrap(),
            "--family",
            "lagrangian-eulerian",
            "--policy",
            "semi-dynamic",
            "--solution",
            solution.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["status"], "optimal");
    assert!((json["objective"].as_f64().unwrap() - 3.0).abs() < 1e-6);
    assert!(json["lp_integral"].as_bool().unwrap());
    let sol = std::fs::read_to_string(&solution).unwrap();
    assert!(sol.lines().count() > 10);
}

#[test]
fn config_file_sets_the_literal_objective_switch() {
    let dir = tempfile::tempdir().unwrap();
    let t1 = gen_t1(dir.path());
    let config = dir.path().join("ctop.toml");
    std::fs::write(
        &config,
        "[model]\nliteral_static_ground_coefficient = true\n",
    )
    .unwrap();
    let build = |cfg: Option<&Path>, out: &str| {
        let mut args = vec![
            "build".to_string(),
            t1.to_str().unwrap().to_string(),
            "--family".to_string(),
            "lagrangian-eulerian".to_string(),
            "--policy".to_string(),
            "two-stage".to_string(),
            "--format".to_string(),
            "lp".to_string(),
            "--out".to_string(),
            dir.path().join(out).to_str().unwrap().to_string(),
        ];
        if let Some(c) = cfg {
            args.push("--config".to_string());
            args.push(c.to_str().unwrap().to_string());
        }
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        assert_eq!(code(&ctop(&refs, dir.path())), 0);
    };
    build(None, "plain.lp");
    build(Some(&config), "literal.lp");
    let plain = std::fs::read_to_string(dir.path().join("plain.lp")).unwrap();
    let literal = std::fs::read_to_string(dir.path().join("literal.lp")).unwrap();
    assert_ne!(plain, literal, "the switch must change the objective");

    // rejected: tolerances are fixed
    std::fs::write(
        &config,
        "[tolerances]\nfeasibility = 1e-5\nreduced_cost = 1e-9\nintegrality = 1e-6\n",
    )
    .unwrap();
    let out = ctop(
        &[
            "validate",
            t1.to_str().unwrap(),
            "--config",
            config.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 1);
}

#[test]
fn check_integrality_reports_csv() {
    let dir = tempfile::tempdir().unwrap();
    let t1 = gen_t1(dir.path());
    let out = ctop(
        &["check-integrality", t1.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "instance,family,policy,objective,lp_integral,max_frac"
    );
    assert_eq!(lines.count(), 6, "six variants for the given instance");
}
