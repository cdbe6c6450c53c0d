use std::path::PathBuf;
use std::process::Command;

use pbd_lattice::io::{parse_energy_csv, parse_severance_csv, parse_trajectory_csv};

fn scn(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.scn"))
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pbd-lattice"))
}

#[test]
fn run_writes_trajectory_and_severance_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let status = bin()
        .args(["run", scn("case_d").to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let traj = parse_trajectory_csv(&std::fs::read_to_string(out.join("trajectory.csv")).unwrap()).unwrap();
    assert_eq!(traj.iter().filter(|r| r.step == 0).count(), 144);
    let sev = parse_severance_csv(&std::fs::read_to_string(out.join("severance.csv")).unwrap()).unwrap();
    assert!(!sev.is_empty());
}

#[test]
fn parallel_flag_gives_the_same_file() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let s = scn("case_f");
    let args = |o: &PathBuf| vec!["pbd-lattice".to_string(), "run".into(), s.display().to_string(), "--out".into(), o.display().to_string()];
    assert_eq!(pbd_lattice::cli::run(args(&a)), 0);
    let mut p = args(&b);
    p.push("--parallel".into());
    assert_eq!(pbd_lattice::cli::run(p), 0);
    let read = |d: &PathBuf| std::fs::read_to_string(d.join("trajectory.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn energy_writes_one_field_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["energy", scn("case_b").to_str().unwrap(), "--kind", "pe2", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let rows = parse_energy_csv(&std::fs::read_to_string(dir.path().join("energy_pe2.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 100 * 100);
    assert_eq!(rows[0].step, 1);
}

#[test]
fn plot_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.svg");
    let status = bin()
        .args(["plot", scn("case_f").to_str().unwrap(), "--step", "12", "--energy", "pe1", "--debug", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let svg = std::fs::read_to_string(&out).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("class=\"fictitious\""));
    assert!(svg.contains("max="));

    let status = bin()
        .args(["plot", scn("case_a").to_str().unwrap(), "--step", "401", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn track_follows_point_67() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let status = bin()
        .args(["track", scn("case_a").to_str().unwrap(), "--point", "67", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,x,y,pe1"));
    let xs: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(xs.len(), 401);
    // rises while the pull is on, relaxes toward the reference afterwards
    assert!(xs[1..=10].windows(2).all(|w| w[1] >= w[0]));
    assert!(xs[10] > xs[0]);
    assert!(xs[400] < xs[20]);
    assert!(xs[400] > xs[0]);

    let status = bin()
        .args(["track", scn("case_a").to_str().unwrap(), "--point", "9999", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn validate_reports_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.scn");
    std::fs::write(&bad, "name = bad\nlattice = square\nextent = 4x4\ntotal_steps = 5\nfracture = maybe\n").unwrap();
    let out = bin().arg("validate").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 5"), "{err}");

    let out = bin().arg("validate").arg(scn("case_a")).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("case_a: ok"));

    let out = bin().arg("validate").arg(dir.path().join("missing.scn")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_2() {
    assert_eq!(pbd_lattice::cli::run(["pbd-lattice", "frobnicate"]), 2);
    assert_eq!(pbd_lattice::cli::run(["pbd-lattice", "run", "x.scn"]), 2);
    assert_eq!(pbd_lattice::cli::run(["pbd-lattice", "energy", "x.scn", "--kind", "pe3", "--out", "o"]), 2);
    assert_eq!(pbd_lattice::cli::run(["pbd-lattice"]), 2);
    assert_eq!(pbd_lattice::cli::run(["pbd-lattice", "--help"]), 0);
}
