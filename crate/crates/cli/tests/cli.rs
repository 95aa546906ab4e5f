use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use superpose_core::generators::{self, GeneratorConfig};
use superpose_core::states::{PureState, StateFile};

fn superpose() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_superpose"));
    cmd.env_remove("SUPERPOSE_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    superpose().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

fn state(dir: &Path, name: &str, s: &PureState) -> String {
    write(dir, name, &StateFile::from_state(s).to_json())
}

#[test]
fn concurrence_of_bell_state() {
    let dir = tempfile::tempdir().unwrap();
    let bell = state(dir.path(), "bell.json", &PureState::maximally_entangled(2));
    let out = run(&["concurrence", &bell]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "C = 0.7071068\n");
    assert!(stderr(&out).contains("seed: 0"));
}

#[test]
fn unnormalized_input_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "s.json",
        r#"{"n":2,"m":2,"re":[1,0,0,1],"im":[0,0,0,0]}"#,
    );
    let out = run(&["--format", "json", "concurrence", &p]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["concurrence"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
}

#[test]
fn state_file_round_trip() {
    let cfg = GeneratorConfig::new(3, 3, 4);
    let s = generators::haar_state(&cfg, &mut cfg.rng(0));
    let (back, norm) = StateFile::parse(&StateFile::from_state(&s).to_json())
        .unwrap()
        .to_state()
        .unwrap();
    assert!((norm - 1.0).abs() < 1e-15);
    for (a, b) in s.matrix().as_slice().iter().zip(back.matrix().as_slice()) {
        assert!((a - b).norm() <= 1e-15);
    }
}

#[test]
fn wrong_length_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "s.json",
        r#"{"n":2,"m":2,"re":[1,0,0,0],"im":[0,0]}"#,
    );
    let out = run(&["concurrence", &p]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(
        err.contains("error: load_state") && err.contains("`im`"),
        "{err}"
    );
}

#[test]
fn missing_file_exits_2() {
    let out = run(&["concurrence", "/nonexistent/state.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_for_orthogonal_basis_states() {
    let dir = tempfile::tempdir().unwrap();
    let psi = state(dir.path(), "psi.json", &PureState::basis(2, 2, 0, 0));
    let phi = state(dir.path(), "phi.json", &PureState::basis(2, 2, 1, 1));
    let out = run(&["bounds", &psi, &phi, "--alpha-sq", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("theorem   T1\n"), "{text}");
    assert!(text.contains("actual    0.7071068\n"), "{text}");
    assert!(text.contains("upper     0.8660254 "), "{text}");

    let out = run(&["--format", "csv", "bounds", &psi, &phi]);
    let csv = stdout(&out);
    assert!(csv.starts_with("theorem,alpha_sq,actual,"), "{csv}");
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn forced_theorem_off_premise_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = GeneratorConfig::new(5, 2, 2);
    let mut rng = cfg.rng(0);
    let psi = state(
        dir.path(),
        "psi.json",
        &generators::haar_state(&cfg, &mut rng),
    );
    let phi = state(
        dir.path(),
        "phi.json",
        &generators::haar_state(&cfg, &mut rng),
    );
    let out = run(&["bounds", &psi, &phi, "--theorem", "T1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("error:"));
    let out = run(&["bounds", &psi, &phi, "--theorem", "T1", "--force"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("warning"));
}

#[test]
fn verify_small_campaign_succeeds() {
    let out = run(&[
        "verify",
        "--theorem",
        "T2",
        "--trials",
        "500",
        "--dims",
        "2x2,3x3",
        "--seed",
        "42",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["violations"], 0);
    assert_eq!(v["total"], 500);
    assert!(stderr(&out).contains("seed: 42"));
}

#[test]
fn verify_reports_injected_fault() {
    let out = run(&[
        "verify",
        "--theorem",
        "T2",
        "--trials",
        "100",
        "--inject-fault",
        "negate-tolerance",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_arguments_exit_2() {
    for args in [
        &["verify", "--dims", "2by2"][..],
        &["verify", "--alpha-sq-range", "0.8,0.2"],
        &["verify", "--trials", "0"],
        &["--tolerance", "-1", "verify"],
        &["frobnicate"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn seed_falls_back_to_environment() {
    let args = ["verify", "--theorem", "T3", "--trials", "300"];
    let from_env = superpose()
        .env("SUPERPOSE_SEED", "11")
        .args(args)
        .output()
        .unwrap();
    let from_flag = run(&[&args[..], &["--seed", "11"]].concat());
    let default = run(&args);
    assert!(stderr(&from_env).contains("seed: 11"));
    assert_eq!(from_env.stdout, from_flag.stdout);
    assert_ne!(from_env.stdout, default.stdout);
}

#[test]
fn records_are_streamed() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path: PathBuf = dir.path().join("r.csv");
    let jsonl_path: PathBuf = dir.path().join("r.jsonl");
    let base = [
        "verify",
        "--theorem",
        "T3",
        "--trials",
        "50",
        "--dims",
        "2x3",
    ];

    let out = run(&[&base[..], &["--records", csv_path.to_str().unwrap()]].concat());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "trial_index,n,m,alpha_sq,theorem,actual,lower_sym,lower_comb,upper_comb,upper_sym,rank_r,norm_sq,condition,violation_margin"
    );
    assert_eq!(lines.count(), 50);

    let args = [
        &base[..],
        &[
            "--records",
            jsonl_path.to_str().unwrap(),
            "--records-format",
            "jsonl",
        ],
    ]
    .concat();
    assert_eq!(run(&args).status.code(), Some(0));
    let jsonl = std::fs::read_to_string(&jsonl_path).unwrap();
    let rows: Vec<serde_json::Value> = jsonl
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(rows.len(), 50);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r["trial_index"], i);
        assert_eq!(r["n"], 2);
    }
}

#[test]
fn sweep_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let psi = state(dir.path(), "psi.json", &PureState::maximally_entangled(2));
    let phi = state(dir.path(), "phi.json", &PureState::basis(2, 2, 0, 1));
    let out = run(&["sweep", &psi, &phi, "--steps", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = stdout(&out);
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.lines().last().unwrap().starts_with("1.0,"), "{csv}");

    let out = run(&["replay", &psi, &phi, "--alpha-sq", "0.3"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("T3 pass"));
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let bell = state(dir.path(), "bell.json", &PureState::maximally_entangled(2));
    let target = dir.path().join("out.txt");
    let out = run(&["-o", target.to_str().unwrap(), "concurrence", &bell]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(target).unwrap(), "C = 0.7071068\n");
}
