use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn srelab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srelab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn ground_state_prints_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let o = srelab(
        dir.path(),
        &["ground-state", "--model", "ti", "--length", "1", "--param", "1", "--out", "psi.csv"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("energy     -1.000000000000"));
    let psi = fs::read_to_string(dir.path().join("psi.csv")).unwrap();
    assert_eq!(psi.lines().count(), 3);
}

#[test]
fn sre_of_a_stabilizer_ground_state() {
    let dir = tempfile::tempdir().unwrap();
    let o = srelab(
        dir.path(),
        &["sre", "--model", "dxx", "--length", "8", "--param", "-1", "--out", "one.csv"],
    );
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(dir.path().join("one.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert!(row[6].parse::<f64>().unwrap().abs() < 1e-8);
}

#[test]
fn validation_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["sre", "--model", "ti", "--length", "4", "--param", "-1"][..],
        &["sweep", "--model", "ti", "--length", "14", "--grid", "0.5"],
        &["sweep", "--model", "ti", "--length", "6", "--grid", "0.5", "--method", "direct", "--length", "10"],
        &["sweep", "--config", "missing.toml"],
        &["dual-sweep", "--model", "ti", "--length", "6", "--grid", "1.5"],
        &["frobnicate"],
        &["plot", "absent.csv"],
    ] {
        let o = srelab(dir.path(), args);
        assert_eq!(code(&o), 1, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert!(!dir.path().join("out").exists());
}

#[test]
fn numerical_failures_exit_with_two_and_keep_the_csv() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("f.toml"),
        "model = \"transverse-ising\"\nlengths = [6]\ngrid = [0.5]\noutput = \"f\"\n[solver]\nmethod = \"lanczos\"\nmax_iterations = 3\n",
    )
    .unwrap();
    let o = srelab(dir.path(), &["sweep", "--config", "f.toml"]);
    assert_eq!(code(&o), 2);
    let csv = fs::read_to_string(dir.path().join("f.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains("did not converge"));
}

#[test]
fn sweep_is_deterministic_and_resumable() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("s.toml"),
        "model = \"cluster-ising\"\nlengths = [4, 6]\nboundary = \"pbc\"\ngrid = { start = 0.25, stop = 1.0, count = 4 }\noutput = \"a\"\n",
    )
    .unwrap();
    let run = |out: &str| {
        let o = srelab(dir.path(), &["sweep", "--config", "s.toml", "--out", out]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(dir.path().join(format!("{out}.csv"))).unwrap()
    };
    let a = run("a");
    assert_eq!(run("b"), a);
    assert_eq!(String::from_utf8_lossy(&a).lines().count(), 9);

    let text = String::from_utf8(a.clone()).unwrap();
    let partial: Vec<&str> = text.lines().take(4).collect();
    fs::write(dir.path().join("a.csv"), partial.join("\n") + "\n").unwrap();
    assert_eq!(run("a"), a);
    let gp = fs::read_to_string(dir.path().join("a.gp")).unwrap();
    assert_eq!(gp.matches("title 'L=").count(), 2);
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("s.toml"),
        "model = \"transverse-ising\"\nlengths = [4]\ngrid = [0.5]\noutput = \"x\"\n",
    )
    .unwrap();
    let o = srelab(
        dir.path(),
        &["sweep", "--config", "s.toml", "--length", "3", "--grid", "0.2,0.4", "--out", "y", "--no-plot"],
    );
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(dir.path().join("y.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().skip(1).all(|l| l.starts_with("transverse-ising,3,obc,")));
    assert!(!dir.path().join("y.gp").exists());
}

#[test]
fn dual_sweep_pbc_is_symmetric() {
    let dir = tempfile::tempdir().unwrap();
    let o = srelab(
        dir.path(),
        &["dual-sweep", "--model", "dxx", "--length", "4,6", "--boundary", "pbc", "--grid", "0.3,0.6", "--out", "d"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("d.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let delta: f64 = line.split(',').nth(7).unwrap().parse().unwrap();
        assert!(delta.abs() < 1e-8, "{line}");
    }
    let conv = fs::read_to_string(dir.path().join("d_convergence.csv")).unwrap();
    assert_eq!(conv.lines().count(), 3);
}

#[test]
fn plot_of_an_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("e.csv"), "model,L,boundary,parameter,alpha,method,value\n").unwrap();
    let o = srelab(dir.path(), &["plot", "e.csv"]);
    assert_eq!(code(&o), 0);
    let gp = fs::read_to_string(dir.path().join("e.gp")).unwrap();
    assert!(gp.lines().all(|l| l.starts_with('#')));
}

#[test]
fn spectral_and_basis_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = srelab(
        dir.path(),
        &["spectral-duality", "--model", "dxx", "--length", "6", "--param", "0.4", "--levels", "5", "--out", "s.csv"],
    );
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains(": pass"));
    assert_eq!(fs::read_to_string(dir.path().join("s.csv")).unwrap().lines().count(), 6);

    let o = srelab(
        dir.path(),
        &["basis-search", "--model", "ci", "--length", "4", "--param", "0.5", "--restarts", "2", "--out", "b.csv"],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(dir.path().join("b.csv")).unwrap().lines().count(), 3);
}
