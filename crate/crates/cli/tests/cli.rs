use std::fs;
use std::process::{Command, Output};

use tempfile::TempDir;

fn splitdg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splitdg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn run_writes_time_series() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        &dir,
        "tgv.cfg",
        "case = tgv\nN = 3\nelements = 2\nscheme = kg\nstab = llf\nt_end = 0.2\noutput_interval = 0.05\n",
    );
    let out = dir.path().join("tgv.csv");
    let res = splitdg(&["run", &cfg, "-o", out.to_str().unwrap()]);
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let table = rows(&fs::read_to_string(&out).unwrap());
    assert_eq!(
        table[0].join(","),
        "t,mass,mom_x,mom_y,mom_z,energy,kinetic_energy,entropy_total,enstrophy,ke_dissipation_rate,mu_num"
    );
    assert_eq!(table.len(), 6);
    let times: Vec<f64> = table[1..].iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(times.windows(2).all(|w| w[1] > w[0]));
    assert!((times[4] - 0.2).abs() < 1e-12);
    for r in &table[1..] {
        assert_eq!(r.len(), 11);
        for v in &r[..10] {
            assert!(v.parse::<f64>().unwrap().is_finite());
        }
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        &dir,
        "tgv.cfg",
        "case = tgv\nN = 2\nelements = 2\nscheme = ir\nt_end = 0.1\noutput_interval = 0.02\nthreads = 1\n",
    );
    let a = splitdg(&["run", &cfg]);
    let b = splitdg(&["run", &cfg]);
    assert_eq!(a.status.code(), Some(0));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn manufactured_first_row_is_exact() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        &dir,
        "mms.cfg",
        "case = manufactured\nN = 3\nelements = 2\nscheme = pi\nt_end = 0.05\noutput_interval = 0.05\n",
    );
    let res = splitdg(&["run", &cfg]);
    assert_eq!(res.status.code(), Some(0));
    let table = rows(&String::from_utf8(res.stdout).unwrap());
    let l2 = table[0].iter().position(|c| c == "l2_rho").unwrap();
    for v in &table[1][l2..] {
        assert!(v.parse::<f64>().unwrap() < 1e-14);
    }
}

#[test]
fn config_errors_exit_with_2() {
    let dir = TempDir::new().unwrap();
    for text in [
        "case = nope\n",
        "scheme = kg\nt_end = -1\n",
        "bogus = 3\n",
        "N = 0\n",
    ] {
        let cfg = config(&dir, "bad.cfg", text);
        let res = splitdg(&["run", &cfg]);
        assert_eq!(res.status.code(), Some(2), "{text}");
        assert!(!res.stderr.is_empty());
    }
    let missing = dir.path().join("missing.cfg");
    assert_eq!(
        splitdg(&["run", missing.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(splitdg(&["launch"]).status.code(), Some(2));
    let cfg = config(&dir, "one.cfg", "case = manufactured\ngrids = 2\n");
    assert_eq!(splitdg(&["converge", &cfg]).status.code(), Some(2));
}

#[test]
fn crash_exits_with_3_and_records_time() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        &dir,
        "crash.cfg",
        "case = tgv\nN = 2\nelements = 2\nscheme = standard\nstab = none\ncfl = 4\nt_end = 20\noutput_interval = 0\n",
    );
    let res = splitdg(&["run", &cfg]);
    assert_eq!(res.status.code(), Some(3));
    let table = rows(&String::from_utf8(res.stdout).unwrap());
    let last = table.last().unwrap();
    let t: f64 = last[0].parse().unwrap();
    assert!(t > 0.0 && t < 20.0);
    assert!(last[1..].iter().all(|v| v == "NA"));
}

#[test]
fn converge_reports_orders() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        &dir,
        "conv.cfg",
        "case = manufactured\nN = 2\ngrids = 2, 4\nscheme = kg\nstab = llf\nt_end = 0.1\n",
    );
    let res = splitdg(&["converge", &cfg]);
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let table = rows(&String::from_utf8(res.stdout).unwrap());
    assert_eq!(table[0][0], "elements");
    assert_eq!(table.len(), 3);
    assert_eq!(table[1][6], "NA");
    let order: f64 = table[2][6].parse().unwrap();
    assert!(order > 1.5, "{order}");
}

#[test]
fn sweep_classifies_runs() {
    let dir = TempDir::new().unwrap();
    let cfg = config(
        &dir,
        "sweep.cfg",
        "case = tgv\ndegrees = 2\ngrids = 2\nschemes = kg, standard\nstab = none\ncfl = 4\nt_end = 20\n",
    );
    let res = splitdg(&["sweep", &cfg]);
    assert_eq!(res.status.code(), Some(0));
    let table = rows(&String::from_utf8(res.stdout).unwrap());
    assert_eq!(
        table[0].join(","),
        "N,elements,scheme,stab,status,final_time"
    );
    assert_eq!(table.len(), 3);
    assert_eq!(table[2][2], "standard");
    assert_eq!(table[2][4], "crashed");
}
