use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn hopex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hopex"))
        .args(args)
        .env("HOPEX_THREADS", "2")
        .output()
        .expect("hopex runs")
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn eta_writes_curve_with_meta() {
    let out = tempfile::tempdir().unwrap();
    let pmf = configs().join("dsbs.json");
    let o = hopex(&[
        "eta",
        "--pmf",
        pmf.to_str().unwrap(),
        "--rates",
        "0",
        "0.5",
        "2",
        "--seed",
        "3",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.path().join("eta.csv")).unwrap();
    assert!(csv.starts_with("# tool: hopex"), "{csv}");
    assert!(csv.contains("# seed: 3"));
    let rows = data_rows(&csv);
    assert_eq!(rows[0], "R,eta,hop");
    let eta: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(eta.len(), 3);
    assert!(eta[0].abs() < 1e-9);
    assert!(eta[0] < eta[1] && eta[1] < eta[2]);
    // I(X;Y) of a DSBS(0.1)
    assert!((eta[2] - 0.531_004_406).abs() < 1e-6);
}

#[test]
fn region_has_one_row_per_hop() {
    let out = tempfile::tempdir().unwrap();
    let cfg = configs().join("region.json");
    let o = hopex(&["region", "--config", cfg.to_str().unwrap(), "--out", out.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.path().join("region.csv")).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows[0], "k,R_k,eta_k,theta_max");
    assert_eq!(rows.len(), 3);
    let theta: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert!(theta[0] <= theta[1] + 1e-12, "theta_max accumulates along the chain");
}

#[test]
fn wz_at_zero_distortion_is_lossless() {
    let out = tempfile::tempdir().unwrap();
    let (pmf, dist) = (configs().join("dsbs.json"), configs().join("hamming.json"));
    let o = hopex(&[
        "wz",
        "--pmf",
        pmf.to_str().unwrap(),
        "--distortion",
        dist.to_str().unwrap(),
        "--D",
        "0",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.path().join("wz.csv")).unwrap();
    let rows = data_rows(&csv);
    assert_eq!(rows[0], "D,rate,achieved_distortion,lossless_bound");
    let f: Vec<f64> = rows[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert!((f[1] - f[3]).abs() < 1e-4, "{rows:?}");
}

#[test]
fn bad_config_lists_all_errors_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"command": "simulate", "rates": [0.5, -1], "blocklengths": [8, 4], "colour": 1}"#).unwrap();
    let o = hopex(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    for key in ["colour", "pmf", "rates", "blocklengths", "trials"] {
        assert!(err.contains(key), "missing complaint about {key}: {err}");
    }
}

#[test]
fn command_mismatch_is_a_config_error() {
    let cfg = configs().join("region.json");
    let o = hopex(&["diagnose", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn enumeration_cap_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cap.json");
    let pmf = configs().join("dsbs_chain.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"command": "diagnose", "pmf": {:?}, "rates": [0.5, 0.5], "blocklengths": [8],
                "enumeration_cap": 1000, "output_dir": {:?}}}"#,
            pmf,
            dir.path().join("out")
        ),
    )
    .unwrap();
    let o = hopex(&["diagnose", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap"));
}
