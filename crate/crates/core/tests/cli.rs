use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nct(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nct"))
        .args(args)
        .output()
        .expect("spawn nct")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn modes_default_rows() {
    let o = nct(&["modes"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "l,kappa_L,f_hz,omega_rad_per_s,a_m,atilde_over_a,I_m,J_m2");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 6);
    assert!((rows[0][1] - 1.875104).abs() < 1e-6);
    assert!((rows[0][2] - 398e3).abs() < 1e-6);
    assert!((rows[0][4] - 0.2e-9).abs() / 0.2e-9 < 0.03);
    assert!((rows[3][1] - 3.5 * std::f64::consts::PI).abs() < 0.01);
    assert!(text.ends_with('\n') && !text.contains('\r'));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let a = nct(&["sweep", "--points", "4", "--jobs", "1"]);
    let b = nct(&["sweep", "--points", "4", "--jobs", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 1 + 5 * 4);
}

#[test]
fn density_units_are_equivalent() {
    let dir = tempfile::tempdir().unwrap();
    let cm3 = write_config(
        dir.path(),
        "a.ini",
        "[gas]\ndensity_per_cm3 = 5e12  # comment\nt_over_tbec = 1.5\n",
    );
    let m3 = write_config(dir.path(), "b.ini", "[gas]\ndensity_per_m3 = 5e18\nt_over_tbec = 1.5\n");
    for cmd in ["thermo", "rates", "cool"] {
        let a = nct(&[cmd, "--config", &cm3]);
        let b = nct(&[cmd, "--config", &m3]);
        assert_eq!(a.status.code(), Some(0), "{cmd}");
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn output_flag_and_json_mirror_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("t.csv");
    let json_path = dir.path().join("t.json");
    for (path, fmt) in [(&csv_path, "csv"), (&json_path, "json")] {
        let o = nct(&["thermo", "--output", path.to_str().unwrap(), "--format", fmt]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
    }
    let csv = fs::read_to_string(&csv_path).unwrap();
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json_path).unwrap()).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    for (k, v) in header.iter().zip(&row) {
        let j = json[0][k].as_f64().unwrap();
        assert!((j - v).abs() <= 1e-11 * v.abs(), "{k}");
    }
}

#[test]
fn config_format_key_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.ini", "[output]\nformat = json\n");
    let o = nct(&["thermo", "--config", &cfg]);
    assert!(stdout(&o).trim_start().starts_with('['));
}

#[test]
fn rates_methods_and_temperature_forms() {
    let tbec = {
        let o = nct(&["thermo"]);
        let text = stdout(&o);
        let row = text.lines().nth(1).unwrap().to_string();
        row.split(',').nth(2).unwrap().parse::<f64>().unwrap()
    };
    let by_ratio = nct(&["rates", "--t-over-tbec", "3", "--method", "fgr"]);
    let by_kelvin = nct(&["rates", "--temperature-k", &format!("{:e}", 3.0 * tbec), "--method", "fgr"]);
    let col = |o: &Output, i: usize| stdout(o).lines().nth(1).unwrap().split(',').nth(i).unwrap().to_string();
    assert_eq!(col(&by_ratio, 3), "fgr");
    let (a, b): (f64, f64) = (col(&by_ratio, 4).parse().unwrap(), col(&by_kelvin, 4).parse().unwrap());
    assert!((a - b).abs() < 1e-9 * a);
    for m in ["series", "simplified", "c5", "oracle"] {
        let o = nct(&["rates", "--method", m]);
        assert_eq!(o.status.code(), Some(0), "{m}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(nct(&[]).status.code(), Some(1));
    assert_eq!(nct(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(nct(&["--help"]).status.code(), Some(0));
    assert_eq!(nct(&["rates", "--method", "magic"]).status.code(), Some(1));
    // below T_BEC the rate formulas do not apply
    assert_eq!(nct(&["rates", "--t-over-tbec", "0.5"]).status.code(), Some(1));
    assert_eq!(nct(&["thermo", "--t-over-tbec", "0.5"]).status.code(), Some(0));
    assert_eq!(nct(&["thermo", "--config", "/nonexistent/x.ini"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.ini", "[beam]\nradius_m = 1e-9\nradius_nm = 1\n");
    let o = nct(&["modes", "--config", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn selfcheck_passes_and_catches_mutation() {
    let o = nct(&["selfcheck"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 6);
    assert!(!text.contains("FAIL"));

    let o = nct(&["selfcheck", "--perturb-v5", "1e-3"]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    let line = text
        .lines()
        .find(|l| l.starts_with("potential_closed_form_vs_quadrature"))
        .unwrap();
    assert!(line.ends_with("FAIL"));
}

#[test]
fn tables_flags_lambda_row() {
    let o = nct(&["tables"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.matches("NON-REPRODUCED").count(), 5);
    for line in text.lines().skip(1).filter(|l| !l.ends_with("NON-REPRODUCED")) {
        assert!(line.ends_with(",ok"), "{line}");
    }
}

#[test]
fn cool_reports_to_stderr() {
    let o = nct(&["cool", "--samples", "11", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "t_s,Tc_eff_K,p0,p1,p2,p3,p4,p5");
    assert_eq!(text.lines().count(), 12);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("converged = true"), "{err}");
}

#[test]
fn potential_header_exact() {
    let o = nct(&["potential", "--qbar-points", "11", "--qbar-max", "5"]);
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), "qbar,n,Vn");
    assert_eq!(text.lines().count(), 1 + 11 * 5);
}
