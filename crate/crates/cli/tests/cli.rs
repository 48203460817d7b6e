use std::process::{Command, Output};

fn data(name: &str) -> String {
    format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn lqdim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lqdim")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn bsi_of_unit_interval_ends_with_slope() {
    let o = lqdim(&["bsi", "--set", &data("box01.json"), "--levels", "3:20"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("n,r,log_count,ratio\n"));
    assert_eq!(out.lines().last(), Some("slope,,,0"));
}

#[test]
fn moran_cantor() {
    let o = lqdim(&["moran", "--ratios", "1/3,1/3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("quantity,value"));
    let v: f64 = lines.next().unwrap().strip_prefix("beta,").unwrap().parse().unwrap();
    assert!((v - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
}

#[test]
fn imubsi_check_on_two_points() {
    let o = lqdim(&[
        "check", "imubsi", "--set", &data("two_points.json"), "--n", "0", "--q", "0", "--measure", &data("delta0.json"),
        "--theta", "0.5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(out.lines().next(), Some("lhs,rhs,pass,params"));
    assert_eq!(row[2], "true");
    assert_eq!(row[0].parse::<f64>().unwrap(), 2.0);
    assert_eq!(row[1].parse::<f64>().unwrap(), 4.0);
}

#[test]
fn json_has_csv_columns() {
    let o = lqdim(&["dist", "--measure", &data("delta0.json"), &data("delta5.json"), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["quantity"], "fm");
    assert_eq!(v[0]["value"], 2.0);
}

#[test]
fn constructed_measure_json_reloads() {
    let o = lqdim(&["construct", "packing-upper", "--set", &data("box01.json"), "--t", "0.5", "--alpha", "1/8", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let mu = lqdim::measures::FiniteMeasure::from_json(&stdout(&o)).unwrap();
    assert_eq!(mu.len(), 9);
}

#[test]
fn probe_is_deterministic_and_needs_a_seed() {
    let args = ["probe", "--measure", &data("two_atoms.json"), "--r", "1/4", "--q", "2", "--seed", "11", "--trials", "8"];
    let a = lqdim(&args);
    let b = lqdim(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let o = lqdim(&["probe", "--measure", &data("two_atoms.json"), "--r", "1/4", "--q", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let missing = lqdim(&["lq", "--measure", &data("missing.json"), "--q", "2", "--r", "0.1"]);
    assert_eq!(missing.status.code(), Some(2));
    let bad_levels = lqdim(&["dims", "--set", &data("box01.json"), "--levels", "9"]);
    assert_eq!(bad_levels.status.code(), Some(2));
    let positive_q = lqdim(&[
        "check", "imubsi", "--set", &data("box01.json"), "--n", "3", "--q", "0.5", "--measure", &data("delta0.json"), "--theta",
        "0.5",
    ]);
    assert_eq!(positive_q.status.code(), Some(3));
    let big_r = lqdim(&["lq", "--measure", &data("two_atoms.json"), "--q", "2", "--r", "2"]);
    assert_eq!(big_r.status.code(), Some(3));
}

#[test]
fn convex_profile_of_point_and_interval() {
    let o = lqdim(&["convdim", "--profile", &data("zero_and_interval.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "quantity,value,argmin_weights\ns_u,0,\ns_conv,0,1;0\ns_conv_max,1,\n");
}

#[test]
fn iv_root_through_lq() {
    let o = lqdim(&["lq", "--measure", &data("two_atoms.json"), "--q", "2", "--r", "0.1,0.9", "--tau", "1/2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().nth(1), Some("root,0.25,0.5,,"));
}
