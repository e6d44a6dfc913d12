use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dicke_mirror::io::{read_timeseries, read_trajectory, Manifest};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dicke-mirror"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .expect("spawn dicke-mirror")
}

fn manifest(dir: &Path) -> Manifest {
    Manifest::parse(&fs::read_to_string(dir.join("manifest.txt")).expect("manifest written")).unwrap()
}

fn files(m: &Manifest) -> Vec<String> {
    let list = m.get("files").unwrap();
    if list.is_empty() {
        Vec::new()
    } else {
        list.split(',').map(str::to_string).collect()
    }
}

const SMALL: [&str; 10] = ["--g0", "0.02", "--cutoff-field", "12", "--cutoff-mirror", "12", "--steps", "40", "--tmax", "20"];

#[test]
fn normal_phase_figure_is_refused_with_lambda_c() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["fig2", "--lambda", "0.4"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("lambda_c = 0.5"), "{stderr}");
    let m = manifest(dir.path());
    assert_eq!(m.get("status"), Some("failed"));
    assert_eq!(m.get("exit_code"), Some("2"));
    assert!(m.get("error").unwrap().contains("mu = 1.562"));
    assert_eq!(m.get("derived.lambda_c"), Some("0.5"));
}

#[test]
fn empty_j_list_gives_only_the_limit_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["fig2", "--J-list", "", "--no-plot"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(dir.path());
    assert_eq!(files(&m), vec!["occupation_TL.csv", "convergence.csv"]);
    let tl = read_timeseries(fs::File::open(dir.path().join("occupation_TL.csv")).unwrap()).unwrap();
    assert_eq!(tl.len(), 401);
    // 4 Omega^2 / omega_m^2 with Omega = -0.0372777...
    assert!((tl.max() - 0.555_853_086_419_753).abs() < 1e-6);
}

#[test]
fn figure_runs_are_deterministic_and_list_every_file() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut args = vec!["fig2", "--J-list", "1/2,1"];
    args.extend(SMALL);
    for dir in [a.path(), b.path()] {
        let out = run(dir, &args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let m = manifest(a.path());
    let listed = files(&m);
    assert_eq!(
        listed,
        vec!["occupation_J1_2.csv", "occupation_J1.csv", "occupation_TL.csv", "convergence.csv", "plot_fig2.py"]
    );
    for f in &listed {
        assert!(a.path().join(f).exists(), "{f}");
        if f.ends_with(".csv") {
            assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
        }
    }
    assert_eq!(m.get("solver.parity_sector"), Some("even"));
    assert!(m.get("note.g0").is_some());
    assert!(m.get("cutoff.J1.mirror_top").is_some());
}

#[test]
fn single_j_entropy_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["fig3", "--J-list", "1"];
    args.extend(SMALL);
    let out = run(dir.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(dir.path());
    let series: Vec<_> = files(&m).into_iter().filter(|f| f.starts_with("entropy_J")).collect();
    assert_eq!(series, vec!["entropy_J1.csv"]);
    let s = read_timeseries(fs::File::open(dir.path().join("entropy_J1.csv")).unwrap()).unwrap();
    assert!(s.values[0].abs() < 1e-10);
    assert!(s.max() > 0.0);
}

#[test]
fn cutoff_failure_exits_3_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["fig2", "--J-list", "1", "--cutoff-field", "3", "--cutoff-mirror", "3", "--steps", "10", "--tmax", "5"],
    );
    assert_eq!(out.status.code(), Some(3));
    let m = manifest(dir.path());
    assert!(m.get("error").unwrap().contains("cutoff validation"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("params.txt");
    fs::write(&cfg, "lambda=0.4\nJ=1\ncutoff_field=10\n").unwrap();
    let out = run(dir.path(), &["ground", "--config", cfg.to_str().unwrap(), "--lambda", "0.7"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(dir.path());
    assert_eq!(m.get("param.lambda"), Some("0.7"));
    assert_eq!(m.get("param.J"), Some("1"));
    assert_eq!(m.get("param.cutoff_field"), Some("10"));

    fs::write(&cfg, "lambda=0.4\nspin=3\n").unwrap();
    let out = run(dir.path(), &["ground", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("spin"));
}

#[test]
fn unwritable_output_is_an_io_failure() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = run(&blocker.join("sub"), &["ground", "--J", "1"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn classical_dissipative_threshold_and_drive_identity() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["classical", "--kappa", "0.2", "--tmax", "1", "--dt", "0.01"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(dir.path());
    let lc: f64 = m.get("classical.lambda_c_kappa").unwrap().parse().unwrap();
    assert!((lc - 0.509902).abs() < 1e-6);

    let out = run(dir.path(), &["classical", "--J", "100000", "--tmax", "1", "--dt", "0.01"]);
    assert!(out.status.success());
    let m = manifest(dir.path());
    let f: f64 = m.get("classical.drive").unwrap().parse().unwrap();
    let g: f64 = m.get("classical.sqrt2_omega_m_abs_drive").unwrap().parse().unwrap();
    assert!((f - g).abs() <= 1e-12 * g);
    let traj = read_trajectory(fs::File::open(dir.path().join("trajectory.csv")).unwrap()).unwrap();
    assert_eq!(traj.times.len(), 101);
}

#[test]
fn classical_normal_phase_origin_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["classical", "--lambda", "0.4", "--initial", "origin", "--tmax", "5", "--dt", "0.05"]);
    assert!(out.status.success());
    let traj = read_trajectory(fs::File::open(dir.path().join("trajectory.csv")).unwrap()).unwrap();
    assert!(traj.states.iter().all(|s| s.norm() == 0.0));
    assert_eq!(manifest(dir.path()).get("classical.normal_phase"), Some("true"));
}

#[test]
fn classical_domain_violation_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["classical", "--J", "1/2", "--lambda", "30", "--initial", "0.5,0,3,0,0,0", "--tmax", "50", "--dt", "0.01"],
    );
    assert_eq!(out.status.code(), Some(3));
    let m = manifest(dir.path());
    assert!(m.get("error").unwrap().contains("domain violated at t = "));
    assert!(files(&m).contains(&"trajectory.csv".to_string()));

    let out = run(dir.path(), &["classical", "--initial", "1,2,3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn phase_scan_limit_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["phase-scan", "--lambda-grid", "0.3,0.5,0.6", "--no-dynamics", "--J", "2", "--cutoff-field", "20"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("phase_scan.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][2], "0");
    assert_eq!(rows[0][5], "NaN");
    assert_eq!(rows[1][2], "0");
    let peak: f64 = rows[2][2].parse().unwrap();
    assert!((peak - 0.555_853_086_419_753).abs() < 1e-9);
}

#[test]
fn evolve_driven_mirror() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["evolve", "--model", "mirror-driven", "--steps", "50"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let occ = read_timeseries(fs::File::open(dir.path().join("occupation.csv")).unwrap()).unwrap();
    let tl = read_timeseries(fs::File::open(dir.path().join("occupation_TL.csv")).unwrap()).unwrap();
    assert!(occ.linf_distance(&tl, f64::INFINITY).unwrap() < 1e-8);
}
