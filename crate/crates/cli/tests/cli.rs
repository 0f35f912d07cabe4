use std::path::PathBuf;
use std::process::{Command, Output};

fn pbsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbsim")).args(args).env_remove("PBSIM_PRECISION").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn circuit(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../circuits").join(name);
    p.to_str().unwrap().to_owned()
}

fn scratch(name: &str, text: &str) -> String {
    let p = std::env::temp_dir().join(format!("pbsim-{}-{name}", std::process::id()));
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn single_photon_always_passes() {
    let o = pbsim(&["simulate", "--photons", "1"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["probability"].as_f64(), Some(1.0));
    assert_eq!(v["photons"].as_u64(), Some(1));
}

#[test]
fn dumps_state_and_unitary() {
    let o = pbsim(&["simulate", "--photons", "2", "--dump-state", "--dump-unitary"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["state"]["photons"].as_u64(), Some(2));
    assert_eq!(v["state"]["terms"].as_array().unwrap().len(), 2);
    assert_eq!(v["unitary"]["matrix"].as_array().unwrap().len(), 4);
}

#[test]
fn ghz_file_gives_split_probability() {
    let o = pbsim(&["simulate", "--circuit", &circuit("ghz4.pbc")]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let p = v["probability"].as_f64().unwrap();
    assert!((p - 3.0 / 256.0 * 3.0 / 32.0).abs() < 1e-15);
}

#[test]
fn photon_cap_and_force() {
    let o = pbsim(&["simulate", "--photons", "11"]);
    assert!(!o.status.success());
    assert!(stdout(&o).is_empty());
    assert!(stderr(&o).contains("--force"));
    let o = pbsim(&["error", "--photons", "12"]);
    assert!(!o.status.success());
}

#[test]
fn parse_errors_name_the_line() {
    let path = scratch("bad.pbc", "modes 4\n\nbs 5 0 R=1/2\n");
    let o = pbsim(&["simulate", "--circuit", &path]);
    assert!(!o.status.success());
    assert!(stdout(&o).is_empty());
    let msg = stderr(&o);
    assert!(msg.contains("line 3") && msg.contains("port 5"), "{msg}");
}

#[test]
fn precision_variable_controls_digits() {
    let run = |prec: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_pbsim"))
            .args(["stats", "--basis", "linear", "--phi", "0.1"])
            .env("PBSIM_PRECISION", prec)
            .output()
            .unwrap();
        (o.status.success(), stdout(&o))
    };
    let (ok, text) = run("12");
    assert!(ok);
    let row = text.lines().nth(1).unwrap();
    let phi = row.split(',').nth(1).unwrap();
    assert_eq!(phi, "0.100000000000");
    let (ok, _) = run("6");
    assert!(!ok);
}

#[test]
fn circular_stats_leave_phi_empty() {
    let o = pbsim(&["stats"]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("basis,phi,delta_n,probability"));
    assert_eq!(lines.next(), Some("circular,,4,0.500000000000000"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn error_table_columns() {
    let o = pbsim(&["error", "--epsilon", "1", "--bad-port", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("delta_n,n_r,n_l,ideal_probability,mismatch_probability,weight,probability"));
    let expected = [3.0, 4.0, 2.0, 4.0, 3.0];
    for (line, e) in lines.zip(expected) {
        let p: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((p - e / 16.0).abs() < 1e-14, "{line}");
    }
    assert!(!pbsim(&["error", "--bad-port", "4"]).status.success());
}

#[test]
fn ghz_curve_rows() {
    let o = pbsim(&["ghz", "--epsilon", "0.9"]);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "kind,epsilon,fraction,closed_form,first_order,witness");
    assert_eq!(rows.len(), 13);
    assert!(rows[1].starts_with("point,0.900000000000000,") && rows[1].ends_with(",fail"));
    assert!(rows[2..].iter().all(|r| r.starts_with("curve,")));
}

#[test]
fn sweep_has_one_block_per_angle() {
    let o = pbsim(&["sweep", "--phi-steps", "8"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 1 + 8 * 5);
    assert!(!pbsim(&["sweep", "--phi-steps", "0"]).status.success());
}
