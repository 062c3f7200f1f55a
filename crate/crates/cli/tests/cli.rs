use std::process::{Command, Output};

use serde_json::Value;

fn wpshms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpshms")).args(args).output().expect("binary runs")
}

fn wpshms_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpshms"))
        .args(args)
        .env("WPSHMS_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn category_p32_counts() {
    let out = wpshms(&["category", "--weights", "3,2", "--base", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["objects"].as_array().unwrap().len(), 5);
    let forward = v["homs"].as_array().unwrap().iter().filter(|h| h["a"] != h["b"]).count();
    assert_eq!(forward, 6);
}

#[test]
fn category_p112_dims() {
    let v = json(&wpshms(&["category", "--weights", "1,1,2", "--base", "0"]));
    let homs = v["homs"].as_array().unwrap();
    for (d, dim) in [(1, 2), (2, 4), (3, 6)] {
        let count = homs.iter().filter(|h| h["a"] == 0 && h["b"] == d).count();
        assert_eq!(count, dim, "distance {d}");
    }
    let meeting = homs.iter().find(|h| h["a"] == 0 && h["b"] == 3 && h["K"] == serde_json::json!([0, 1, 1])).unwrap();
    assert_eq!(meeting["v"], serde_json::json!(["4/3", "4/3"]));
}

#[test]
fn golden_category_json() {
    let out = wpshms(&["category", "--weights", "3,2"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), include_str!("golden/category_3_2.json"));
}

#[test]
fn golden_category_text() {
    let out = wpshms(&["category", "--weights", "1,1,2", "--format", "text"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), include_str!("golden/category_1_1_2.txt"));
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let args = ["category", "--weights", "1,2,3"];
    let one = wpshms_env(&args, "1");
    let four = wpshms_env(&args, "4");
    let again = wpshms(&args);
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, again.stdout);
    let verify = ["verify", "--weights", "1,1,2", "--suite", "functor", "--seed", "3"];
    assert_eq!(wpshms_env(&verify, "1").stdout, wpshms_env(&verify, "3").stdout);
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let dir = std::env::temp_dir().join(format!("wpshms-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cat.json");
    let out = wpshms(&["category", "--weights", "3,2", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), include_str!("golden/category_3_2.json"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn invalid_weights_exit_2() {
    let out = wpshms(&["category", "--weights", "2,4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("gcd must be 1"), "{}", stderr(&out));
    assert_eq!(wpshms(&["info", "--weights", "0,1"]).status.code(), Some(2));
    assert_eq!(wpshms(&["info", "--weights", "3,2", "--chart", "2"]).status.code(), Some(2));
    assert_eq!(wpshms(&["verify", "--weights", "3,2", "--suite", "bogus"]).status.code(), Some(2));
    assert_eq!(wpshms(&["info"]).status.code(), Some(2));
    assert_eq!(wpshms_env(&["info", "--weights", "3,2"], "0").status.code(), Some(2));
}

#[test]
fn verify_examples_pass() {
    for args in [
        &["verify", "--weights", "3,2", "--suite", "all"][..],
        &["verify", "--weights", "1,2,3", "--suite", "functor"],
        &["verify", "--weights", "1,1", "--suite", "all"],
        &["verify", "--weights", "1,1,2", "--suite", "dims,ratio,charts", "--base", "-3"],
    ] {
        let out = wpshms(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stdout));
        let v = json(&out);
        assert_eq!(v["pass"], true);
        assert!(v["suites"].as_array().unwrap().iter().all(|s| s["failures"].as_array().unwrap().is_empty()));
    }
}

#[test]
fn verify_failure_exits_1_with_failures() {
    // a coarse RK4 step cannot meet the 1e-8 trajectory tolerance
    let out = wpshms(&["verify", "--weights", "3,2", "--suite", "flow", "--dt", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["pass"], false);
    assert!(!v["suites"][0]["failures"].as_array().unwrap().is_empty());
}

#[test]
fn info_reports_charts() {
    let v = json(&wpshms(&["info", "--weights", "1,1,2"]));
    assert_eq!(v["weights"]["scale"], 4);
    assert_eq!(v["charts"][0]["vertices"], serde_json::json!([["0", "0"], ["4", "0"], ["0", "2"]]));
    let text = wpshms(&["info", "--weights", "3,2", "--format", "text"]);
    assert!(String::from_utf8(text.stdout).unwrap().contains("chart 0: group order 3, vertices (0) (6)"));
}

#[test]
fn flow_trajectory_csv() {
    let out = wpshms(&["flow", "--weights", "3,2", "--pair", "0,2", "--k", "0,1", "--through", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap(), vec!["t", "x1", "exact1", "error"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let last = rows.last().unwrap();
    let end: f64 = last[1].parse().unwrap();
    assert!((end - 3.0).abs() < 1e-6, "ends at {end}");
    assert!(rows.iter().all(|r| r[3].parse::<f64>().unwrap() < 1e-8));
}

#[test]
fn flow_tree_json() {
    let out = wpshms(&["flow", "--weights", "1,1,2", "--tree", "0,1,3", "--k", "0,1,0", "--k2", "0,0,1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["meeting_residual"].as_f64().unwrap() < 1e-8);
    assert!(v["area_error"].as_f64().unwrap() < 1e-9);
    let root: Vec<f64> = v["v_ac"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((root[0] - 4.0 / 3.0).abs() < 1e-15 && (root[1] - 4.0 / 3.0).abs() < 1e-15);
    let bad = wpshms(&["flow", "--weights", "1,1,2", "--tree", "0,1", "--k", "0,1,0", "--k2", "0,0,1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn plot_generators_at_distance_3() {
    let out = wpshms(&["plot", "--weights", "1,1,2", "--dist", "3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let dots: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).filter(|r| &r[0] == "dot").collect();
    assert_eq!(dots.len(), 6);
    let meeting = dots.iter().find(|r| &r[1] == "(0,1,1)").unwrap();
    let (x, y): (f64, f64) = (meeting[2].parse().unwrap(), meeting[3].parse().unwrap());
    assert!((x - 4.0 / 3.0).abs() < 1e-15 && (y - 4.0 / 3.0).abs() < 1e-15);

    let svg = String::from_utf8(wpshms(&["plot", "--weights", "1,1,2", "--dist", "3"]).stdout).unwrap();
    assert!(svg.contains(r#"version="1.1""#));
    assert_eq!(svg.matches("<circle").count(), 6);
    assert!(!svg.contains("href"), "no external assets");
}

#[test]
fn plot_sections_of_p32() {
    let out = wpshms(&["plot", "--weights", "3,2", "--sections", "0..4", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let two_pi = 2.0 * std::f64::consts::PI;
    for r in rdr.records().map(|r| r.unwrap()).filter(|r| &r[0] == "segment") {
        let a: f64 = r[1][2..r[1].find(';').unwrap()].parse().unwrap();
        let p: Vec<f64> = (2..6).map(|i| r[i].parse().unwrap()).collect();
        let slope = (p[3] - p[1]) / (p[2] - p[0]);
        assert!((slope - a / 12.0 * two_pi).abs() < 1e-12, "{r:?}");
        // every piece extends to an intercept on the 2π lattice
        let intercept = p[1] - slope * p[0];
        assert!(((intercept / two_pi).round() - intercept / two_pi).abs() < 1e-9, "{r:?}");
        assert!(p[1] >= 0.0 && p[3] <= 3.0 * two_pi + 1e-12);
    }
}

#[test]
fn plot_rejects_high_dimension() {
    let out = wpshms(&["plot", "--weights", "1,2,3,4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("plots require n ≤ 2"));
    let out = wpshms(&["plot", "--weights", "1,1,2", "--sections", "0..2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("n = 1"));
}

#[test]
fn plot_tree_svg() {
    let out = wpshms(&["plot", "--weights", "1,1,2", "--tree", "0,1,3", "--k", "0,1,0", "--k2", "0,0,1"]);
    assert_eq!(out.status.code(), Some(0));
    let svg = String::from_utf8(out.stdout).unwrap();
    assert!(svg.contains("v_ac;(0,1,1)"));
    assert_eq!(svg.matches("grad f_").count(), 4);
}
