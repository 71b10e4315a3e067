use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;

fn cvconc(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_cvconc")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn cavity_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let (code, _, err) = cvconc(&["cavity", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let (header, rows) = read_csv(&out.join("fig2a.csv"));
    assert_eq!(header, ["phi0", "P", "S"]);
    assert_eq!(rows.len(), 401);
    let (header, _) = read_csv(&out.join("fig2b.csv"));
    assert_eq!(header, ["phi0", "F"]);
    let opt = read_json(&out.join("optimum.json"));
    assert!((opt["fidelity_star"].as_f64().unwrap() - 0.837).abs() < 5e-3);
    assert!((opt["phi0_star"].as_f64().unwrap() + PI / 10.0).abs() < 0.05);
}

#[test]
fn cavity_product_input_has_zero_entropy() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let (code, _, err) = cvconc(&["cavity", "--set", "lambda=0", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let (_, rows) = read_csv(&out.join("fig2a.csv"));
    for row in rows {
        // a vanishing success probability leaves a gap instead of a value
        assert!(row[2] == 0.0 || (row[2].is_nan() && row[1] == 0.0), "{row:?}");
    }
    assert!(read_json(&out.join("optimum.json"))["phi0_star"].is_null());
}

#[test]
fn malformed_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[cavity\nlambda = ").unwrap();
    let out = dir.path().join("run");
    let (code, _, _) = cvconc(&["cavity", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(!out.exists());

    std::fs::write(&cfg, "[kerr]\nlambda = 0.5\ncolour = 3\n").unwrap();
    let (code, _, err) = cvconc(&["kerr", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("colour"));
    let (code, _, _) = cvconc(&["kerr", "--set", "step=0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    let (code, _, _) = cvconc(&["cavity", "--format", "png", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(!out.exists());
}

#[test]
fn config_file_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[cavity]\nlambda = 0.3\nsteps = 5\n").unwrap();
    let out = dir.path().join("run");
    let (code, stdout, _) = cvconc(&["optimize", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let printed: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(printed["lambda"], 0.3);
    assert_eq!(read_json(&out.join("optimum.json")), printed);
}

#[test]
fn kerr_without_coupling_reproduces_input_gaussian() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let (code, _, err) = cvconc(&[
        "kerr", "--set", "phi=0", "--set", "half_width=4", "--set", "step=0.2", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let (header, rows) = read_csv(&out.join("fig5a.csv"));
    assert_eq!(header, ["x", "y", "Q"]);
    assert_eq!(rows.len(), 41 * 41);
    for r in &rows {
        let gauss = (-(r[0] * r[0] + r[1] * r[1])).exp() / PI;
        assert!((r[2] - gauss).abs() < 1e-12);
    }
    // every outcome sits exactly at F0, so only the zero threshold survives
    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["regions"].as_array().unwrap().len(), 1);
    assert!((summary["regions"][0]["avg_F_teleport"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    assert_eq!(summary["truncated_at"], 0.05);
    assert_eq!(summary["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn kerr_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let (code, _, err) = cvconc(&["kerr", "--out", out.to_str().unwrap(), "--format", "csv,json,svg"]);
    assert_eq!(code, 0, "{err}");
    let (_, rows) = read_csv(&out.join("fig5b.csv"));
    assert!(rows.iter().map(|r| r[2]).fold(0.0, f64::max) > 0.273);
    let (header, rows) = read_csv(&out.join("fig7.csv"));
    assert_eq!(header, ["delta_F", "F_teleport"]);
    assert_eq!(rows.len(), 9);
    for r in rows.iter().filter(|r| r[0] > 0.0) {
        assert!(r[1] > 0.75, "{r:?}");
    }
    let (header, _) = read_csv(&out.join("fig6.csv"));
    assert_eq!(header, ["delta_F", "avg_F", "P_omega"]);
    let (header, _) = read_csv(&out.join("grid.csv"));
    assert_eq!(header, ["x", "y", "Q", "F_phiN", "F_teleport"]);
    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["regions"].as_array().unwrap().len(), 9);
    assert!(summary["meta"]["threads"].as_u64().unwrap() >= 1);
    for name in ["fig5a.svg", "fig5b.svg", "fig6.svg", "fig7.svg"] {
        assert!(out.join(name).exists(), "{name}");
    }
}

#[test]
fn plot_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let fig6 = dir.path().join("fig6.csv");
    std::fs::write(&fig6, "delta_F,avg_F,P_omega\n0,0.3,0.28\n0.05,0.38,0.12\n0.1,0.43,0.05\n").unwrap();
    let fig5a = dir.path().join("fig5a.csv");
    std::fs::write(&fig5a, "x,y,Q\n0,0,0.3\n1,0,0.1\n0,1,0.1\n1,1,0.05\n").unwrap();
    let plots = dir.path().join("plots");
    let (code, _, err) = cvconc(&["plot", fig6.to_str().unwrap(), fig5a.to_str().unwrap(), "--out", plots.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let line = std::fs::read_to_string(plots.join("fig6.svg")).unwrap();
    assert_eq!(line.matches("<polyline").count(), 2);
    let heat = std::fs::read_to_string(plots.join("fig5a.svg")).unwrap();
    assert!(heat.matches("<rect x=").count() >= 4);

    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(cvconc(&["plot", empty.to_str().unwrap()]).0, 2);
    let narrow = dir.path().join("narrow.csv");
    std::fs::write(&narrow, "x\n1\n2\n").unwrap();
    assert_eq!(cvconc(&["plot", narrow.to_str().unwrap()]).0, 2);
    assert_eq!(cvconc(&["plot", dir.path().join("missing.csv").to_str().unwrap()]).0, 2);
}
