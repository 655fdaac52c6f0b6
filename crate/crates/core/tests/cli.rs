use std::process::Command;

use goafem::mesh::read_mesh;
use goafem::output::parse_csv;

fn goafem() -> Command {
    Command::new(env!("CARGO_BIN_EXE_goafem"))
}

#[test]
fn run_writes_csv_and_report_reads_it() {
    let dir = tempfile::tempdir().unwrap();
    let st = goafem()
        .args(["run", "--setup", "2", "--max-iter", "2", "--dump-mesh", "--output-dir"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(st.success());
    let csv = dir.path().join("setup2_convergence.csv");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("# goafem-ml v1\niter,dofs,mu,zeta,product,goal_value,n_indices,max_param,seconds\n"));
    let t = parse_csv(&text).unwrap();
    assert_eq!(t.rows.len(), 3);
    let mesh = read_mesh(std::io::BufReader::new(std::fs::File::open(dir.path().join("setup2_mesh0.txt")).unwrap())).unwrap();
    assert!((mesh.total_area() - 3.0).abs() < 1e-12);

    let out = goafem().arg("report").arg(dir.path()).args(["--setup", "2"]).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("slope (last 5 points):"));
    assert_eq!(stdout.lines().count(), 5);
}

#[test]
fn reference_writes_prefix_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, format!("setup = 3\ntol = 2e-3\nref-tol = 5e-4\noutput_dir = {}\n", dir.path().display())).unwrap();
    let st = goafem().arg("reference").arg("--config").arg(&cfg).status().unwrap();
    assert!(st.success());
    let conv = parse_csv(&std::fs::read_to_string(dir.path().join("setup3_convergence.csv")).unwrap()).unwrap();
    let refs = parse_csv(&std::fs::read_to_string(dir.path().join("setup3_reference.csv")).unwrap()).unwrap();
    assert_eq!(refs.columns, ["iter", "dofs", "product", "ref_error"]);
    assert_eq!(conv.rows.len(), refs.rows.len());
    assert!(*conv.column("product").unwrap().last().unwrap() < 2e-3);
    assert!(refs.column("ref_error").unwrap().iter().all(|&e| e >= 0.0));
}

#[test]
fn invalid_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["run", "--setup", "7"],
        vec!["run", "--setup", "1", "--theta", "0"],
        vec!["run", "--setup", "1", "--tol", "1e-4", "--ref-tol", "1e-3"],
        vec!["run"],
    ] {
        let out = goafem().args(&args).arg("--output-dir").arg(dir.path()).output().unwrap();
        assert!(!out.status.success(), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    }
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "setup = 1\ncolour = red\n").unwrap();
    assert!(!goafem().arg("run").arg("--config").arg(&cfg).status().unwrap().success());
    assert!(!goafem().args(["report", "/nonexistent.csv"]).status().unwrap().success());
}
