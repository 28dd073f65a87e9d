use std::path::Path;
use std::process::{Command, Output};

use optomech_witness_cli::{exit, CommandResult, Report};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_omwitness"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path.display().to_string()
}

const NANOBEAM: &str = r#"{
  "hardware": {"g0_over_2pi_hz": 869e3, "kappa_over_2pi_hz": 846e6, "omega_m_over_2pi_hz": 5.25e9,
               "n_plus": 298, "n_minus": 318, "t1_s": 50e-9, "t2_s": 50e-9, "n0": 0.2, "eta": 0.1},
  "optimizer": {"alpha": {"fixed": 2.63}, "beta": {"fixed": -2.63}},
  "statistics": {"seed": 11, "replications": 500}
}"#;

fn report(bytes: &[u8]) -> Report {
    serde_json::from_slice(bytes).expect("report parses")
}

#[test]
fn feasibility_report_for_the_nanobeam_block() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "hw.json", NANOBEAM);
    let out = run_in(dir.path(), &["feasibility", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(exit::SUCCESS), "{}", String::from_utf8_lossy(&out.stderr));
    let CommandResult::Feasibility(f) = report(&out.stdout).result else {
        panic!("wrong result kind");
    };
    assert!((f.system.t - 0.30).abs() < 0.01);
    assert!(f.hardware_warnings.is_empty());
    assert!(f.setting.diff > 0.0);
    assert_eq!(f.n_total, f.plan.counts.iter().sum::<u64>());
    assert!(f.plan.significance >= 3.0);
    // Same number the library computes directly.
    let lib = optomech_witness::statistics::required_runs(&f.system, 2.63, -2.63, 3.0).unwrap();
    assert_eq!(lib.total, f.n_total);
}

#[test]
fn every_command_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let hw = write_config(dir.path(), "hw.json", NANOBEAM);
    let small = write_config(
        dir.path(),
        "small.json",
        r#"{"grids": {"T": [0.3], "eta": [0.5], "n0": [0.1], "p": [0.2], "displacements": [[1.0, -1.0]]},
            "system": {"p": 0.25, "t": 0.4, "eta": 0.5, "n0": 0.1}, "statistics": {"seed": 5, "replications": 50}}"#,
    );
    let cases: [(&str, &str, &str); 7] = [
        ("verify", &small, "json"),
        ("sweep", &small, "csv"),
        ("sweep", &small, "json"),
        ("optimize", &small, "json"),
        ("feasibility", &hw, "json"),
        ("simulate", &hw, "json"),
        ("simulate", &small, "csv"),
    ];
    for (cmd, cfg, fmt) in cases {
        let path = dir.path().join(format!("{cmd}.{fmt}"));
        let mut runs = Vec::new();
        for _ in 0..2 {
            let out = run_in(
                dir.path(),
                &[cmd, "--config", cfg, "--format", fmt, "--out", path.to_str().unwrap()],
            );
            assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
            runs.push(std::fs::read(&path).unwrap());
            std::fs::remove_file(&path).unwrap();
        }
        let (x, y) = (runs[0].clone(), runs[1].clone());
        assert_eq!(x, y, "{cmd} {fmt} output differs between runs");
        if fmt == "json" {
            let parsed = report(&x);
            let again = serde_json::to_vec_pretty(&parsed).unwrap();
            assert_eq!(report(&again), parsed);
            assert_eq!(parsed.config.command.map(|c| format!("{c:?}").to_lowercase()), Some(cmd.to_owned()));
        }
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let hw = write_config(dir.path(), "hw.json", NANOBEAM);
    let one = run_in(dir.path(), &["simulate", "--config", &hw, "--threads", "1"]);
    let two = run_in(dir.path(), &["simulate", "--config", &hw, "--threads", "3"]);
    assert_eq!(one.status.code(), Some(0));
    let (mut a, mut b) = (report(&one.stdout), report(&two.stdout));
    assert_eq!((a.config.threads, b.config.threads), (Some(1), Some(3)));
    a.config.threads = None;
    b.config.threads = None;
    assert_eq!(a, b);
}

#[test]
fn sweep_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "g.json", r#"{"grids": {"T": [0.5], "eta": [1.0], "n0": [0.0]}}"#);
    let out = run_in(dir.path(), &["sweep", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "T,eta,n0,alpha,beta,p,Q,S_star,diff");
    assert_eq!(lines.len(), 2);
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields.len(), 9);
    for f in &fields {
        assert!(!f.contains(['e', 'E']), "{f}");
        let v: f64 = f.parse().unwrap();
        if v != 0.0 {
            let digits: String = f.chars().filter(|c| c.is_ascii_digit()).collect();
            let significant = digits.trim_start_matches('0');
            assert_eq!(significant.len(), 12, "{f}");
        }
    }
    let diff: f64 = fields[8].parse().unwrap();
    let q: f64 = fields[6].parse().unwrap();
    let s: f64 = fields[7].parse().unwrap();
    assert!((diff - (q - s)).abs() < 1e-10);
}

#[test]
fn efficiency_ordering_in_sweep_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "fig2.json",
        r#"{"grids": {"T": [0.2, 0.6, 1.0], "eta": [0.1, 0.3, 0.5, 1.0], "n0": [0.0]}}"#,
    );
    let out = run_in(dir.path(), &["sweep", "--config", &cfg, "--format", "json"]);
    let CommandResult::Sweep { rows } = report(&out.stdout).result else {
        panic!("wrong result kind");
    };
    assert_eq!(rows.len(), 12);
    for t in 0..3 {
        let column: Vec<f64> = (0..4).map(|e| rows[e * 3 + t].diff).collect();
        assert!(column.windows(2).all(|w| w[0] < w[1]), "{column:?}");
    }
}

#[test]
fn simulated_feasibility_plan_mostly_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let hw = write_config(dir.path(), "hw.json", NANOBEAM);
    let out = run_in(dir.path(), &["simulate", "--config", &hw]);
    let CommandResult::Simulate { summary, values, seed, rng, .. } = report(&out.stdout).result else {
        panic!("wrong result kind");
    };
    assert_eq!((values.len(), seed, rng.as_str()), (500, 11, "ChaCha20"));
    assert!(summary.positive_fraction >= 0.99, "{summary:?}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = |name: &str, json: &str| write_config(d, name, json);
    let code = |args: &[&str]| run_in(d, args).status.code();

    let empty = cfg("empty.json", r#"{"grids": {"T": []}}"#);
    assert_eq!(code(&["sweep", "--config", &empty]), Some(exit::CONFIG));
    assert_eq!(code(&["verify", "--config", &empty]), Some(exit::CONFIG));

    let system = cfg("sys.json", r#"{"system": {"p": 0.25, "t": 0.4, "eta": 0.5, "n0": 0.1}}"#);
    assert_eq!(code(&["simulate", "--config", &system]), Some(exit::CONFIG));
    let no_reps = cfg(
        "reps.json",
        r#"{"system": {"p": 0.25, "t": 0.4, "eta": 0.5, "n0": 0.1}, "statistics": {"seed": 1, "replications": 0}}"#,
    );
    assert_eq!(code(&["simulate", "--config", &no_reps]), Some(exit::CONFIG));

    let eta0 = cfg("eta0.json", r#"{"system": {"p": 0.25, "t": 0.4, "eta": 0.0, "n0": 0.1}}"#);
    assert_eq!(code(&["feasibility", "--config", &eta0]), Some(exit::CONFIG));

    let both = cfg(
        "both.json",
        &NANOBEAM.replacen('{', r#"{"system": {"p": 0.25, "t": 0.4, "eta": 0.5, "n0": 0.1},"#, 1),
    );
    assert_eq!(code(&["feasibility", "--config", &both]), Some(exit::CONFIG));
    assert_eq!(code(&["optimize"]), Some(exit::CONFIG));
    assert_eq!(code(&["sweep", "--config", &system, "--format", "csv", "--threads", "0"]), Some(exit::CONFIG));
    assert_eq!(code(&["feasibility", "--config", &system, "--format", "csv"]), Some(exit::CONFIG));
    let unknown = cfg("unknown.json", r#"{"sytem": {}}"#);
    assert_eq!(code(&["optimize", "--config", &unknown]), Some(exit::CONFIG));

    let t0 = cfg("t0.json", r#"{"system": {"p": 0.25, "t": 0.0, "eta": 0.5, "n0": 0.1}}"#);
    assert_eq!(code(&["feasibility", "--config", &t0]), Some(exit::NO_VIOLATION));

    let out = run_in(d, &["verify", "--cutoff", "8"]);
    assert_eq!(out.status.code(), Some(exit::NUMERICAL));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("under-truncation") && err.contains("alpha=2.63"), "{err}");

    assert_eq!(
        code(&["optimize", "--config", &system, "--out", "/nonexistent-dir/x.json"]),
        Some(exit::IO)
    );
    assert_eq!(code(&["frobnicate"]), Some(2));
}

#[test]
fn only_the_declared_output_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sys.json", r#"{"system": {"p": 0.25, "t": 0.4, "eta": 0.5, "n0": 0.1}}"#);
    let before = std::fs::read(&cfg).unwrap();
    let out = run_in(dir.path(), &["optimize", "--config", &cfg, "--out", "result.json"]);
    assert_eq!(out.status.code(), Some(0));
    let mut names: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["result.json", "sys.json"]);
    assert_eq!(std::fs::read(&cfg).unwrap(), before);
}

#[test]
fn default_verification_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["verify"]);
    assert_eq!(out.status.code(), Some(0));
    let CommandResult::Verify { passed, max_abs_diff, .. } = report(&out.stdout).result else {
        panic!("wrong result kind");
    };
    assert!(passed && max_abs_diff < 1e-8);
}
