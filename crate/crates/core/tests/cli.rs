use std::path::Path;
use std::process::{Command, Output};

use flipcpw::fieldsolver::FieldExport;

fn flipcpw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flipcpw")).args(args).output().unwrap()
}

fn write_config(dir: &Path, json: &str) -> String {
    let p = dir.join("run.json");
    std::fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_string()
}

fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn single_point_line_params() {
    let out = flipcpw(&["line-params"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines = data_lines(&text);
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "h_s_um,l_conf_h_per_m,c_conf_f_per_m");
    let cells: Vec<f64> = lines[1].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(cells[0], 8.0);
    assert!((cells[1] / 3.427733012289145e-7 - 1.0).abs() < 1e-9);
    assert!((cells[2] / 1.507483485386657e-10 - 1.0).abs() < 1e-9);
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"cross_section": {"w": 12, "wdith": 3}}"#);
    let out = flipcpw(&["freq", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wdith"));
}

#[test]
fn malformed_sweep_exits_2() {
    for sweep in ["h_s=5:1:1", "h_s=1:5:0", "colour=1:2:1", "h_s"] {
        assert_eq!(flipcpw(&["line-params", "--sweep", sweep]).status.code(), Some(2), "{sweep}");
    }
}

#[test]
fn sweep_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for p in [&a, &b] {
        let out = flipcpw(&[
            "line-params",
            "--method",
            "both",
            "--sweep",
            "h_s=2:10:2",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("# flipcpw "));
    assert!(text.contains("# config_sha256: "));
    assert!(text.contains("# grid: "));
    let rows = data_lines(&text);
    assert_eq!(rows.len(), 6);
    let h: Vec<f64> = rows[1..].iter().map(|r| r.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(h, vec![2.0, 4.0, 6.0, 8.0, 10.0]);
}

#[test]
fn config_hash_tracks_overrides() {
    let hash = |args: &[&str]| {
        let text = String::from_utf8(flipcpw(args).stdout).unwrap();
        text.lines().find(|l| l.starts_with("# config_sha256")).unwrap().to_string()
    };
    let plain = hash(&["freq"]);
    assert_eq!(plain, hash(&["freq"]));
    assert_ne!(plain, hash(&["freq", "--sweep", "h_s=6:10:2"]));
}

#[test]
fn kinetic_inductance_lowers_frequency() {
    let out = flipcpw(&["freq", "--lambda-nm", "83"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = data_lines(&text);
    assert_eq!(rows[0], "h_s_um,l_tot_um,f_conf_hz,f_conf_lk_hz");
    let v: Vec<f64> = rows[1].split(',').map(|c| c.parse().unwrap()).collect();
    assert!(v[3] < v[2]);
}

#[test]
fn batch_outside_chip_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"gap_map": {"nw": 8.3, "ne": 9.3, "sw": 8.3, "se": 8.8, "width": 10000, "height": 10000},
            "resonators": [{"name": "a", "x": 100, "y": 100}, {"name": "b", "x": 10001, "y": 0}]}"#,
    );
    assert_eq!(flipcpw(&["batch", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn empty_batch_writes_header_only() {
    let out = flipcpw(&["batch"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(data_lines(&text), vec!["name,x_um,y_um,h_s_um,l_tot_um,f_conf_hz"]);
}

#[test]
fn batch_and_gap_interp_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"gap_map": {"nw": 8.3, "ne": 9.3, "sw": 8.3, "se": 8.8, "width": 10000, "height": 10000},
            "resonators": [{"name": "a", "x": 5000, "y": 5000}, {"name": "b", "x": 0, "y": 10000, "l_s": 3700}]}"#,
    );
    let gaps = String::from_utf8(flipcpw(&["gap-interp", "--config", &cfg]).stdout).unwrap();
    let rows = data_lines(&gaps);
    assert_eq!(rows[1], "a,5.0000000000e3,5.0000000000e3,8.6750000000e0");
    assert_eq!(rows[2], "b,0.0000000000e0,1.0000000000e4,8.3000000000e0");
    let batch = String::from_utf8(flipcpw(&["batch", "--config", &cfg]).stdout).unwrap();
    let rows = data_lines(&batch);
    assert_eq!(rows.len(), 3);
    assert!(rows[2].starts_with("b,0.0000000000e0,1.0000000000e4,8.3000000000e0,"));
}

#[test]
fn underdetermined_effective_length_fit_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"eff_length": {"samples": [[10, 6.8e9], [20, 6.78e9]]}}"#);
    assert_eq!(flipcpw(&["fit-efflen", "--config", &cfg]).status.code(), Some(4));
}

#[test]
fn unexplainable_measurement_exits_4() {
    // Measured frequency far below anything a penetration depth can reach.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"measured": [{"f_meas_hz": 1e9}, {"f_meas_hz": 1e9, "h_s": 10}]}"#);
    assert_eq!(flipcpw(&["fit-lambda", "--config", &cfg]).status.code(), Some(4));
}

#[test]
fn solve_field_export_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.txt");
    let out = flipcpw(&["solve-field", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let export = FieldExport::from_text(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(export.quantity, "potential_v");
    assert_eq!(export.rows.len(), export.grid.node_count());
    assert!(export.rows.iter().all(|r| (-1e-12..=1.0 + 1e-12).contains(&r.value)));
}

#[test]
fn solve_field_needs_a_destination() {
    assert_eq!(flipcpw(&["solve-field"]).status.code(), Some(2));
}

#[test]
fn optimize_cutout_reports_optimum() {
    let out = flipcpw(&["optimize-cutout"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = data_lines(&text);
    assert_eq!(rows.len(), 1 + 17);
    let gamma: f64 = rows[1].split(',').nth(3).unwrap().parse().unwrap();
    assert!((gamma - 0.75).abs() < 0.05);
}
