use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use quasipoly::qpoly::{EventualQP, Poly, QuasiPolynomial};
use serde_json::Value;

const TWIST: &str = "2*x + (2*t-2)*y <= t^2 - 2*t + 2\n2*x + (2*t-2)*y >= -(t^2 - 2*t + 2)\n\
                     (2-2*t)*x + 2*y <= t^2 - 2*t + 2\n(2-2*t)*x + 2*y >= -(t^2 - 2*t + 2)\n";
const EX_PA: &str = "exists y : 2*x + 2*y + 3 = 5*t and t < x and x <= y\n";

fn qpt(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qpt"));
    c.args(args).env_remove("QPT_THREADS");
    for (k, v) in envs {
        c.env(k, v);
    }
    c.output().unwrap()
}

fn ok(args: &[&str]) -> Value {
    let o = qpt(args, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = args.iter().position(|a| *a == "-o").map(|i| args[i + 1]).unwrap();
    serde_json::from_str(&fs::read_to_string(Path::new(out).join("report.json")).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn ehrhart_twist_round_trips() {
    let d = tempfile::tempdir().unwrap();
    let input = write(d.path(), "twist.poly", TWIST);
    let out = d.path().join("out").display().to_string();
    let r = ok(&["ehrhart", "--input", &input, "--window", "3", "60", "-o", &out]);
    assert_eq!(r["command"], "ehrhart");
    let fit: EventualQP = serde_json::from_value(r["result"]["ehrhart"]["fit"]["result"].clone()).unwrap();
    let want = QuasiPolynomial::new(vec![Poly::from_ints(&[5, -2, 1]), Poly::from_ints(&[2, -2, 1])]).unwrap();
    assert_eq!(fit.qp, want);
    assert_eq!(serde_json::to_value(&fit).unwrap(), r["result"]["ehrhart"]["fit"]["result"]);
    // the twisted square leaves the orthant, so Brion is skipped with a reason
    assert!(r["result"]["brion"].as_array().unwrap().iter().all(|b| b["skipped"] == "NegativeOrthant"));

    let dat = fs::read_to_string(Path::new(&out).join("count.dat")).unwrap();
    assert!(dat.starts_with("# t value fitted residual\n3 5 5 0\n4 13 13 0\n5 17 17 0\n"));
    let csv = fs::read_to_string(Path::new(&out).join("samples.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 58);
}

#[test]
fn ehrhart_brion_cross_check_on_triangle() {
    let d = tempfile::tempdir().unwrap();
    let input = write(d.path(), "tri.poly", "y >= 0\nx - y >= 0\n2*x <= t\n");
    let out = d.path().join("out").display().to_string();
    let r = ok(&["ehrhart", "--input", &input, "--window", "2", "80", "-o", &out]);
    let brion = r["result"]["brion"].as_array().unwrap();
    assert_eq!(brion.len(), 12);
    assert!(brion.iter().all(|b| b["agree"] == true), "{brion:?}");
    assert_eq!(r["result"]["ehrhart"]["period_claim"]["equal"], true);
}

#[test]
fn gcd_example() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().display().to_string();
    let r = ok(&["qpoly", "gcd", "2*t+1", "5*t+6", "--window", "0", "30", "-o", &out]);
    assert_eq!(r["result"]["bezout_identity"], true);
    let g = &r["result"]["gcd"]["d"];
    assert_eq!(g["period"], 7);
    let cs: Vec<&str> = g["constituents"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert_eq!(cs, ["1", "1", "1", "7", "1", "1", "1"]);
    let dat = fs::read_to_string(d.path().join("gcd.dat")).unwrap();
    assert!(dat.lines().skip(1).all(|l| l.ends_with(" 0")));
}

#[test]
fn qpoly_divmod_and_floor_match_integers() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().display().to_string();
    ok(&["qpoly", "divmod", "t^2 + 1", "2*t + 3", "-o", &out]);
    for name in ["quotient", "remainder"] {
        let dat = fs::read_to_string(d.path().join(format!("{name}.dat"))).unwrap();
        assert!(dat.lines().skip(1).filter(|l| !l.contains("nan")).count() > 50);
        assert!(dat.lines().skip(1).filter(|l| !l.contains("nan")).all(|l| l.ends_with(" 0")), "{dat}");
    }
    let r = ok(&["qpoly", "floor", "5*t - 3", "4", "-o", &out]);
    assert_eq!(r["result"]["floor"]["period"], 4);
    let dat = fs::read_to_string(d.path().join("floor.dat")).unwrap();
    assert!(dat.lines().skip(1).all(|l| l.ends_with(" 0")));
}

#[test]
fn normal_forms_agree_with_integer_oracle() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().display().to_string();
    let r = ok(&["snf", "--matrix", "2*t, 0; 0, t+1", "--window", "1", "30", "-o", &out]);
    assert_eq!(r["result"]["oracle_disagree"], Value::Array(vec![]));
    assert!(r["result"]["oracle_agree"].as_u64().unwrap() > 20);
    let r = ok(&["hnf", "--matrix", "t, 2; 0, 3", "--window", "1", "30", "-o", &out]);
    assert_eq!(r["result"]["oracle_disagree"], Value::Array(vec![]));
}

#[test]
fn presburger_property_two() {
    let d = tempfile::tempdir().unwrap();
    let input = write(d.path(), "expa.pf", EX_PA);
    let out = d.path().join("o").display().to_string();
    let r = ok(&["presburger", "check", "--property", "2", "--input", &input, "--window", "3", "120", "-o", &out]);
    assert_eq!(r["command"], "presburger check 2");
    assert_eq!(r["result"]["verdict"], "supported");
    let fit = &r["result"]["fits"][0];
    assert_eq!(fit["name"], "cardinality");
    let q: EventualQP = serde_json::from_value(fit["report"]["result"].clone()).unwrap();
    assert_eq!(q.qp.period(), 4);
    assert!(Path::new(&out).join("cardinality.dat").exists());
    assert!(Path::new(&out).join("existence.dat").exists());
}

#[test]
fn presburger_property_three_a_and_four() {
    let d = tempfile::tempdir().unwrap();
    let input = write(d.path(), "expa.pf", EX_PA);
    let out = d.path().join("o").display().to_string();
    let r = ok(&["presburger", "check", "--property", "3a", "--objective", "1", "--input", &input, "--window", "3", "120", "-o", &out]);
    assert_eq!(r["result"]["property"], "3a");
    assert_eq!(r["result"]["verdict"], "supported");

    let o = qpt(&["presburger", "check", "--property", "3a", "--input", &input, "-o", &out], &[]);
    assert_eq!(o.status.code(), Some(2));

    let tri = write(d.path(), "tri.pf", "2*x <= t and y <= x\n");
    let r = ok(&["presburger", "check", "--property", "4", "--input", &tri, "--window", "2", "30", "-o", &out]);
    assert_eq!(r["result"]["verdict"], "supported");
    let dat = fs::read_to_string(Path::new(&out).join("gf_count.dat")).unwrap();
    assert!(dat.lines().skip(1).all(|l| l.ends_with(" 0")));
}

#[test]
fn frobenius_report() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().display().to_string();
    let r = ok(&["frobenius", "t", "t+3", "--window", "2", "80", "-o", &out]);
    assert_eq!(r["result"]["existence"]["residues"], serde_json::json!([1, 2]));
    let q: EventualQP = serde_json::from_value(r["result"]["fits"][0]["report"]["result"].clone()).unwrap();
    assert_eq!(q.qp, QuasiPolynomial::from_poly(Poly::from_ints(&[-3, 1, 1])));
}

#[test]
fn gf_subcommands() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().display().to_string();
    // 1/((1 - y)(1 - y^2)^2)
    let hs = write(d.path(), "hs.json", r#"{"dim":1,"threshold":0,"terms":[{"coeff":"1/1","num":["0"],"dens":[["1"],["2"],["2"]]}]}"#);
    let r = ok(&["gf", "expand", "--input", &hs, "--box", "0,4", "--t", "0", "-o", &out]);
    let coeffs: Vec<&str> =
        r["result"]["samples"][0]["coefficients"].as_array().unwrap().iter().map(|c| c[1].as_str().unwrap()).collect();
    assert_eq!(coeffs, ["1/1", "1/1", "3/1", "3/1", "6/1"]);
    assert_eq!(r["result"]["samples"][0]["count"], "infinite");

    // x^t y^0 + … + x^0 y^t as a segment gf, with a flipped denominator
    let seg = write(
        d.path(),
        "seg.json",
        r#"{"dim":2,"threshold":0,"terms":[{"coeff":"1/1","num":["0","t"],"dens":[["1","-1"]]},{"coeff":"1/1","num":["t","0"],"dens":[["-1","1"]]}]}"#,
    );
    let r = ok(&["gf", "normalize", "--input", &seg, "--window", "1", "6", "-o", &out]);
    let dens = &r["result"]["normalized"]["classes"][0]["terms"][1]["dens"][0];
    assert_eq!(dens, &serde_json::json!(["1", "-1"]));
    let dat = fs::read_to_string(d.path().join("probe.dat")).unwrap();
    assert!(dat.lines().skip(1).all(|l| l.ends_with(" 0")));

    let norm = write(d.path(), "norm.json", &r["result"]["normalized"].to_string());
    let r = ok(&["gf", "specialize", "--input", &norm, "--box", "0,10;0,10", "--window", "1", "10", "-o", &out]);
    for (i, s) in r["result"]["samples"].as_array().unwrap().iter().enumerate() {
        assert_eq!(s["count"], format!("{}/1", i + 2));
    }
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let d = tempfile::tempdir().unwrap();
    let input = write(d.path(), "expa.pf", EX_PA);
    let mut reports = Vec::new();
    for (k, threads) in ["1", "4"].iter().enumerate() {
        let out = d.path().join(format!("o{k}")).display().to_string();
        let o = qpt(&["presburger", "check", "--property", "3", "--input", &input, "--window", "3", "80", "-o", &out], &[("QPT_THREADS", threads)]);
        assert!(o.status.success());
        let read = |n: &str| fs::read(Path::new(&out).join(n)).unwrap();
        reports.push((read("report.json"), read("samples.csv"), read("x.dat")));
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn errors_are_machine_readable() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().display().to_string();
    let o = qpt(&["qpoly", "gcd", "2*t+", "1", "-o", &out], &[]);
    assert_eq!(o.status.code(), Some(2));
    let e: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "Parse");

    let o = qpt(&["qpoly", "add", "t", "1", "--window", "5", "5", "-o", &out], &[]);
    assert_eq!(o.status.code(), Some(1));
    let e: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "Invalid");

    let o = qpt(&["ehrhart", "--input", "/nonexistent.poly", "-o", &out], &[]);
    let e: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "Io");

    let o = qpt(&["qpoly", "add", "t", "1", "-o", &out], &[("QPT_THREADS", "zero")]);
    assert_eq!(o.status.code(), Some(1));

    let o = qpt(&["nonsense"], &[]);
    assert_eq!(o.status.code(), Some(2));
    let e: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(e["error"]["kind"], "Usage");
    assert!(!d.path().join("report.json").exists());
}
