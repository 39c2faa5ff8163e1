use std::process::Command;

fn saddlegap() -> Command {
    Command::new(env!("CARGO_BIN_EXE_saddlegap"))
}

#[test]
fn rates_cc_writes_csv_with_closed_form_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cc.csv");
    let status = saddlegap()
        .args(["rates-cc", "--L", "1", "--T-list", "16", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("T,L,slingshot_bound,minimax_q_value"));
    assert!(lines[1].starts_with("16,1,0.0588235294118,"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let status = saddlegap()
            .args(["hard-instance", "--kappa", "10", "--T", "8", "--seed", "3", "--format", "json", "--out"])
            .arg(&path)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    let a = run("a.json");
    let b = run("b.json");
    assert_eq!(a, b);
    let rows: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 3);
    assert_eq!(rows[1]["method"], "extragradient");
}

#[test]
fn rates_scsc_to_stdout() {
    let out = saddlegap().args(["rates-scsc", "--kappa", "2", "--T-list", "4"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[2], "0.219512195122");
    assert_eq!(row[3], "0.0625");
    assert_eq!(row[4], "3.51219512195");
}

#[test]
fn conformal_validate_succeeds() {
    let out = saddlegap().args(["conformal-validate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().skip(1).all(|l| l.ends_with("true,false")));
}

#[test]
fn errors_exit_with_one() {
    let odd = saddlegap().args(["rates-scsc", "--kappa", "2", "--T-list", "3"]).output().unwrap();
    assert_eq!(odd.status.code(), Some(1));
    let method = saddlegap()
        .args(["hard-instance", "--kappa", "10", "--T", "4", "--methods", "newton"])
        .output()
        .unwrap();
    assert_eq!(method.status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let unwritable = saddlegap()
        .args(["conformal-validate", "--out"])
        .arg(dir.path().join("missing").join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(unwritable.status.code(), Some(1));
}

#[test]
fn non_converged_rows_exit_with_two() {
    // A relative gap of 1e-15 is below what the barrier can certify.
    let out = saddlegap()
        .args(["extremal", "--set", "intervals", "--mu", "0.5", "--L", "1", "--T-list", "8", "--tol", "1e-15"])
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(2), "{text}");
    assert!(text.lines().nth(1).unwrap().ends_with("false,true"));
}
