//! End-to-end checks of the binary: exit codes, file outputs, determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn spdc3(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spdc3"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("spdc3_cli_test_{name}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read_csv(dir: &Path, stem: &str) -> (PathBuf, String) {
    let entry = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(Result::ok)
        .find(|e| {
            let name = e.file_name().to_string_lossy().into_owned();
            name.starts_with(stem) && name.ends_with(".csv")
        })
        .unwrap_or_else(|| panic!("no {stem}*.csv in {}", dir.display()));
    let path = entry.path();
    let text = std::fs::read_to_string(&path).unwrap();
    (path, text)
}

#[test]
fn evolve_writes_trajectory_with_conserved_parity() {
    let dir = tmpdir("evolve");
    let out = spdc3(
        &[
            "evolve",
            "--g0",
            "0.1",
            "--t-final",
            "10",
            "--cutoff",
            "4",
            "--out",
            ".",
        ],
        &dir,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (_, text) = read_csv(&dir, "trajectory");
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap();
    assert!(header.starts_with("t,norm,P_expect,leak1,leak2,leak3,G_CV,G_CV_prime,G_DV"));
    let data: Vec<&str> = lines.collect();
    // 40 samples plus the t = 0 row
    assert!(data.len() >= 40, "only {} samples", data.len());
    for row in &data {
        let p: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert!((p - 1.0).abs() < 1e-8, "P_expect = {p}");
    }
    // t = 0 row carries zero witnesses
    let first: Vec<f64> = data[0].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert_eq!(first[6], 0.0);
    assert_eq!(first[8], 0.0);
}

#[test]
fn evolve_without_pump_keeps_observables_constant() {
    let dir = tmpdir("evolve_zero");
    let out = spdc3(
        &[
            "evolve",
            "--g0",
            "0",
            "--t-final",
            "3",
            "--cutoff",
            "3",
            "--out",
            ".",
        ],
        &dir,
    );
    assert!(out.status.success());
    let (_, text) = read_csv(&dir, "trajectory");
    for row in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let fields: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        // G_CV, G_CV_prime, G_DV never report entanglement without the pump
        assert!(fields[6] <= 1e-10 && fields[8] <= 1e-10);
    }
}

#[test]
fn missing_config_file_exits_2_and_names_path() {
    let dir = tmpdir("missing");
    let out = spdc3(&["evolve", "--config", "nope.conf"], &dir);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("nope.conf"), "stderr: {err}");
}

#[test]
fn unknown_command_and_flags_exit_2() {
    let dir = tmpdir("usage");
    assert_eq!(spdc3(&["frobnicate"], &dir).status.code(), Some(2));
    assert_eq!(spdc3(&["evolve", "--g0"], &dir).status.code(), Some(2));
    assert_eq!(spdc3(&[], &dir).status.code(), Some(2));
}

#[test]
fn config_file_applies_and_flags_override() {
    let dir = tmpdir("config");
    std::fs::write(
        dir.join("run.conf"),
        "# sample config\ncutoff = 3\ng0 = 0.3\nt_final = 2\n",
    )
    .unwrap();
    let out = spdc3(
        &[
            "evolve", "--config", "run.conf", "--g0", "0.05", "--out", ".",
        ],
        &dir,
    );
    assert!(out.status.success());
    let (_, text) = read_csv(&dir, "trajectory");
    assert!(text.contains("# g0 = 0.05"), "flag should override file");
    assert!(text.contains("# cutoffs = 3,3,3"));
    assert!(text.contains("# t_final = 2"));
}

#[test]
fn single_cell_sweep_writes_one_row_and_identical_bytes() {
    let dir = tmpdir("sweep_cell");
    let args = [
        "sweep",
        "--grid-g0",
        "0.1",
        "--grid-t",
        "5",
        "--cutoff",
        "3",
        "--out",
        ".",
    ];
    let out = spdc3(&args, &dir);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (csv_path, first) = read_csv(&dir, "sweep");
    let data_rows = first.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(data_rows, 2); // header + single cell
    let name = csv_path.file_name().unwrap().to_string_lossy().into_owned();
    // file names carry the grid hash
    assert!(
        name.trim_start_matches("sweep_")
            .trim_end_matches(".csv")
            .len()
            == 16
    );

    // repeated invocation reproduces identical bytes
    let out = spdc3(&args, &dir);
    assert!(out.status.success());
    let again = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(first, again);

    let summary = std::fs::read_dir(&dir)
        .unwrap()
        .filter_map(Result::ok)
        .find(|e| e.file_name().to_string_lossy().starts_with("summary"))
        .expect("summary json written");
    let json = std::fs::read_to_string(summary.path()).unwrap();
    assert!(json.contains("\"cells_cv_positive\": 1"));
    assert!(json.contains("\"cells_dv_positive\": 1"));
}

#[test]
fn verify_defaults_pass_and_literal_projector_fails() {
    let dir = tmpdir("verify");
    // the canonical invocation: every invariant at the reference parameters
    let ok = spdc3(&["verify"], &dir);
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert!(
        ok.status.success(),
        "verify failed:\n{stdout}\n{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    assert!(stdout.contains("commutator_h_projector PASS"));
    assert!(stdout.contains("ghz_mimic_moment_equality PASS"));
    assert!(stdout.contains("covariance_szsz_departs PASS"));
    assert!(!stdout.contains("FAIL"));

    let bad = spdc3(
        &[
            "verify",
            "--cutoff",
            "4",
            "--t-final",
            "5",
            "--samples",
            "2000",
            "--use-literal-P",
        ],
        &dir,
    );
    assert_eq!(bad.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&bad.stdout);
    assert!(
        stdout.contains("commutator_h_projector FAIL"),
        "expected documented commutator failure:\n{stdout}"
    );
}

#[test]
fn verify_cutoff_one_fails_convergence() {
    let dir = tmpdir("verify_small");
    let out = spdc3(
        &[
            "verify",
            "--cutoff",
            "1",
            "--t-final",
            "5",
            "--samples",
            "1000",
        ],
        &dir,
    );
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("cutoff_convergence_shift FAIL"),
        "expected convergence failure:\n{stdout}"
    );
}

#[test]
fn reference_reports() {
    let dir = tmpdir("reference");
    let ghz = spdc3(&["reference", "ghz"], &dir);
    assert!(ghz.status.success());
    let ghz_text = String::from_utf8_lossy(&ghz.stdout).into_owned();
    assert!(ghz_text.contains("cov S_z1 S_z2 = 0.250000000000"));

    let mimic = spdc3(&["reference", "mimic"], &dir);
    let mimic_text = String::from_utf8_lossy(&mimic.stdout).into_owned();
    for line in ghz_text
        .lines()
        .filter(|l| l.starts_with("cov ") || l.starts_with("mean "))
    {
        assert!(mimic_text.contains(line), "mimic table diverges at: {line}");
    }

    let zbound = spdc3(
        &["reference", "zbound", "--samples", "20000", "--seed", "5"],
        &dir,
    );
    let z_text = String::from_utf8_lossy(&zbound.stdout).into_owned();
    assert!(z_text.contains("bell state value = 0.250000000000"));

    assert_eq!(spdc3(&["reference", "bogus"], &dir).status.code(), Some(2));
}

#[test]
fn dump_emits_canonical_triplets() {
    let dir = tmpdir("dump");
    let out = spdc3(&["dump", "x3", "--cutoff", "1"], &dir);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    let mut previous = (0usize, 0usize);
    let mut first = true;
    for line in text.lines() {
        let parts: Vec<&str> = line.split(' ').collect();
        assert_eq!(parts.len(), 4, "line: {line}");
        let key = (parts[0].parse().unwrap(), parts[1].parse().unwrap());
        if !first {
            assert!(key > previous, "entries out of canonical order");
        }
        previous = key;
        first = false;
        let _re: f64 = parts[2].parse().unwrap();
        let _im: f64 = parts[3].parse().unwrap();
    }
    assert!(!first, "dump should not be empty");
}
