use std::process::{Command, Output};

fn poa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poa")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn pigou_poa_is_four_thirds() {
    let out = poa(&["poa", "--scenario", "pigou_affine", "--inflow", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v: f64 = stdout(&out).trim().parse().unwrap();
    assert!((v - 4.0 / 3.0).abs() < 1e-9);
}

#[test]
fn sweep_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = poa(&[
        "sweep", "--scenario", "pigou_monomial", "--d1", "1", "--d2", "2", "--from", "1e-3", "--to", "1e6", "--points",
        "40", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("M,eq_cost,opt_cost,poa,eq_gap,opt_gap"));
    assert_eq!(lines.count(), 40);
}

#[test]
fn sweep_output_is_stable_across_jobs() {
    let base = ["sweep", "--scenario", "wheatstone", "--from", "0.1", "--to", "10", "--points", "6"];
    let one = poa(&[&base[..], &["--jobs", "1"]].concat());
    let four = poa(&[&base[..], &["--jobs", "4"]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn classify_wheatstone_heavy_labels() {
    let out = poa(&["classify", "--scenario", "wheatstone", "--limit", "heavy"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["benchmark"]["edge"], 0);
    let labels: Vec<&str> = v["edges"].as_array().unwrap().iter().map(|e| e["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["tight", "slow", "fast", "fast", "slow"]);
}

#[test]
fn classify_with_explicit_benchmark() {
    let out = poa(&["classify", "--scenario", "wheatstone", "--limit", "light", "--benchmark", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let labels: Vec<String> =
        json(&out)["edges"].as_array().unwrap().iter().map(|e| e["label"].as_str().unwrap().to_string()).collect();
    assert_eq!(labels, ["fast", "fast", "fast", "tight", "tight"]);
}

#[test]
fn rate_reports_closed_form_and_bound() {
    let out = poa(&["rate", "--scenario", "pigou_monomial", "--limit", "heavy"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["estimate"]["exponent"], 0.5);
    assert!((v["estimate"]["constant"].as_f64().unwrap() - 0.088662).abs() < 1e-6);
    assert_eq!(v["bound"]["ka"], 4.0);
}

#[test]
fn limit_value_json() {
    let out = poa(&["limit", "--scenario", "pigou_monomial", "--limit", "heavy", "--benchmark", "x"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((json(&out)["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn sequence_sweep_and_salience() {
    let out = poa(&["sweep", "--scenario", "uncoupled", "--sequence", "example_inefficient", "--indices", "5,6"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("n,M,"));
    assert!(text.lines().nth(1).unwrap().starts_with("5,1.1000000000000000e1,"));
    let s = poa(&["salience", "--sequence", "example_inefficient", "--subset", "1", "--horizon", "1000"]);
    assert_eq!(json(&s)["salient"], false);
}

#[test]
fn network_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.json");
    let shown = poa(&["scenario", "show", "pigou_affine"]);
    std::fs::write(&path, &shown.stdout).unwrap();
    let out = poa(&["poa", "--network", path.to_str().unwrap(), "--total", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("1.33333333"));
}

#[test]
fn tntp_input() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.tntp");
    let trips = dir.path().join("trips.tntp");
    std::fs::write(
        &net,
        "<NUMBER OF ZONES> 2\n<NUMBER OF NODES> 2\n<FIRST THRU NODE> 1\n<NUMBER OF LINKS> 2\n<END OF METADATA>\n\
         1 2 1 1 2 0 1 0 0 1 ;\n1 2 1 1 1 1 1 0 0 1 ;\n",
    )
    .unwrap();
    std::fs::write(&trips, "<NUMBER OF ZONES> 2\n<TOTAL OD FLOW> 1.0\n<END OF METADATA>\nOrigin 1\n 2 : 1.0;\n").unwrap();
    // links 2 and 1 + x: Eq = 2, Opt = 1.75
    let out = poa(&["poa", "--tntp-net", net.to_str().unwrap(), "--tntp-trips", trips.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: f64 = stdout(&out).trim().parse().unwrap();
    assert!((v - 8.0 / 7.0).abs() < 1e-9);
}

#[test]
fn exit_codes() {
    assert_eq!(poa(&["poa", "--scenario", "nope", "--total", "1"]).status.code(), Some(2));
    assert_eq!(poa(&["poa", "--scenario", "pigou_affine"]).status.code(), Some(2));
    assert_eq!(poa(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(poa(&["rate", "--scenario", "oscillating_three_link", "--limit", "heavy"]).status.code(), Some(4));
    let starved = poa(&["solve", "--scenario", "pigou_monomial", "--inflow", "3", "--max-iter", "0"]);
    assert_eq!(starved.status.code(), Some(3));
}
