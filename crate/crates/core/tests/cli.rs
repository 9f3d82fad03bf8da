use std::path::Path;
use std::process::{Command, Output};

fn bhfem(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bhfem"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn no_arguments_prints_usage_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = bhfem(&[], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn check_conditions_for_example_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = bhfem(&["check-conditions"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let general = text.lines().find(|l| l.starts_with("general")).unwrap();
    assert!(general.contains("nu > 1.6000000000"), "{general}");
    assert!(general.contains("satisfied") && !general.contains("NOT"));
    assert!(text.contains("uniqueness: guaranteed"));
}

#[test]
fn converge_writes_csv_with_reference_rates() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("t1.toml"),
        "case = 'ex1-poly'\nmethod = 'cfem'\ndim = 2\nlevels = [4, 8, 16, 32]\n",
    )
    .unwrap();
    let o = bhfem(&["converge", "--config", "t1.toml", "--out", "res"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("res/ex1-poly_cfem_2d.csv")).unwrap();
    let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    assert_eq!(last[0], "32x32");
    let rate_h1: f64 = last[3].parse().unwrap();
    let rate_l2: f64 = last[5].parse().unwrap();
    // reference finest-level rates 0.9904 and 1.9951
    assert!((rate_h1 - 0.9904).abs() <= 0.1, "{rate_h1}");
    assert!((rate_l2 - 1.9951).abs() <= 0.15, "{rate_l2}");
    assert!(dir.path().join("res/summary.txt").exists());
}

#[test]
fn solve_writes_vtk_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = bhfem(
        &[
            "solve",
            "--out",
            "s",
            "--set",
            "method=dgfem",
            "--set",
            "n=4",
            "--set",
            "case=ex1-sine",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = std::fs::read_to_string(dir.path().join("s/summary.txt")).unwrap();
    assert!(summary.contains("newton_iters"));
    assert!(summary.contains("energy_bound    n/a"));
    let vtk = std::fs::read_to_string(dir.path().join("s/solution.vtk")).unwrap();
    assert!(vtk.contains("SCALARS u double 1") && vtk.contains("SCALARS u_exact double 1"));
}

#[test]
fn short_transient_writes_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let o = bhfem(
        &[
            "transient",
            "--out",
            "tr",
            "--set",
            "mesh_n=8",
            "--set",
            "t_end=1.0",
            "--set",
            "snapshot_times=[0.4, 1.0]",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("tr/snapshot_000002.vtk").exists());
    assert!(dir.path().join("tr/snapshot_000005.vtk").exists());
    assert!(stdout(&o).contains("steps          5"));
}

#[test]
fn error_categories_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = bhfem(&["solve", "--set", "foo=1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("'foo'"));

    let o = bhfem(&["solve", "--set", "delta=0.5"], dir.path());
    assert_eq!(o.status.code(), Some(2));

    let o = bhfem(&["solve", "--set", "newton_max_iter=1", "--set", "n=4"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("did not converge"));

    // output directory collides with an existing file
    std::fs::write(dir.path().join("taken"), "").unwrap();
    let o = bhfem(&["solve", "--out", "taken", "--set", "n=2"], dir.path());
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn gamma_outside_unit_interval_only_warns() {
    let dir = tempfile::tempdir().unwrap();
    let o = bhfem(&["check-conditions", "--set", "gamma=1.5"], dir.path());
    assert!(o.status.success());
    assert!(stderr(&o).contains("warning: gamma"));
}
