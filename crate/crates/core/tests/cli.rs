use std::fs;
use std::path::Path;

use v2v_motifs::cli::main_with_args;
use v2v_motifs::motif::{canonical_label, EdgeSubgraph};
use v2v_motifs::temporal_graph::{RawEvent, TemporalGraph};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["v2v-motifs"];
    full.extend_from_slice(args);
    let code = main_with_args(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn planted_edge_list(path: &Path) {
    let mut text = String::from("src,dst,t_ms\n");
    let mut t = 0;
    for rep in 0..6 {
        let b = rep * 10;
        for _ in 0..3 {
            text += &format!("{},{},{}\n{},{},{}\n{},{},{}\n", b, b + 1, t, b + 1, b + 2, t + 1, b + 2, b, t + 2);
            t += 3;
        }
        text += &format!("{},{},{}\n", b + 3, b, t);
        t += 1;
    }
    fs::write(path, text).unwrap();
}

/// Three parked cars on the first lane.
fn collinear_trace(path: &Path, xs: &[f64]) {
    let mut text = String::from("t_s,vehicle_id,x_m,y_m\n");
    for t in 0..=20 {
        for (i, x) in xs.iter().enumerate() {
            text += &format!("{t},{i},{x},1.75\n");
        }
    }
    fs::write(path, text).unwrap();
}

const SHORT_WINDOW: &str =
    "[events]\nwindow_s = 10\n[scenario]\neval_epochs = 2\neval_step_s = 5\n[null_model]\nsamples = 10\n";

#[test]
fn empty_edge_list_gives_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("e.csv");
    fs::write(&edges, "src,dst,t_ms\n").unwrap();
    let out = dir.path().join("out");
    let (code, _, err) = run(&["--out", s(&out), "mine", s(&edges)]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(fs::read_to_string(out.join("motifs.csv")).unwrap(), "canonical_label,k,f,f_ref,sigma_ref,z\n");
}

#[test]
fn planted_triangle_is_reported_and_reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("e.csv");
    planted_edge_list(&edges);
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[null_model]\nsamples = 30\n").unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for o in [&a, &b] {
        let (code, _, err) = run(&["--config", s(&cfg), "--seed", "4", "--out", s(o), "mine", s(&edges)]);
        assert_eq!(code, 0, "{err}");
    }
    let report = fs::read(a.join("motifs.csv")).unwrap();
    assert_eq!(report, fs::read(b.join("motifs.csv")).unwrap());

    let g = TemporalGraph::build(&[RawEvent::new(0, 1, 0), RawEvent::new(1, 2, 1), RawEvent::new(2, 0, 2)]).unwrap();
    let cycle = canonical_label(&EdgeSubgraph::new(g.edges().to_vec())).to_string();
    let mut rdr = csv::Reader::from_reader(&report[..]);
    let row = rdr.records().map(|r| r.unwrap()).find(|r| r[0] == cycle).expect("cycle class reported");
    assert!(row[5].parse::<f64>().unwrap() > 2.0);
}

#[test]
fn place_picks_middle_car_and_reports_both_strategies() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    collinear_trace(&trace, &[100.0, 140.0, 180.0]);
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, SHORT_WINDOW).unwrap();
    let out = dir.path().join("out");
    let (code, stdout, err) = run(&["--config", s(&cfg), "--out", s(&out), "place", s(&trace), "--count", "1"]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("motif:") && stdout.contains("location:"));

    let mut rdr = csv::Reader::from_path(out.join("placement.csv")).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["strategy", "vehicle_id", "role", "assigned_server", "influence", "rate_bps"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 6);
    let serving: Vec<&str> = rows.iter().filter(|r| &r[0] == "location" && &r[2] == "serving").map(|r| &r[1]).collect();
    assert_eq!(serving, ["1"]);
    for r in rows.iter().filter(|r| &r[0] == "location" && &r[2] == "non_serving") {
        assert_eq!(&r[3], "1");
        assert!(r[5].parse::<f64>().unwrap() > 0.0);
    }
    let summary = fs::read_to_string(out.join("placement_summary.csv")).unwrap();
    assert!(
        summary.starts_with("strategy,serving_count,objective_bps,motifs_found,fallback,kappa,proximity_cutoff_m\n")
    );
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn place_with_all_but_one_serving() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    collinear_trace(&trace, &[100.0, 140.0, 180.0, 260.0]);
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, SHORT_WINDOW).unwrap();
    let out = dir.path().join("out");
    let (code, _, err) = run(&["--config", s(&cfg), "--out", s(&out), "place", s(&trace), "-c", "3"]);
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(out.join("placement.csv")).unwrap();
    for strategy in ["motif", "location"] {
        let n = text.lines().filter(|l| l.starts_with(strategy) && l.contains(",non_serving,")).count();
        assert_eq!(n, 1, "{strategy}");
    }
}

#[test]
fn place_rejects_bad_count_and_missing_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    collinear_trace(&trace, &[100.0, 140.0, 180.0]);
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, SHORT_WINDOW).unwrap();
    let out = dir.path().join("out");
    let (code, _, _) = run(&["--config", s(&cfg), "--out", s(&out), "place", s(&trace), "-c", "3"]);
    assert_eq!(code, 1);
    let missing = dir.path().join("nope.csv");
    let (code, _, err) = run(&["--config", s(&cfg), "--out", s(&out), "place", s(&missing), "-c", "1"]);
    assert_eq!(code, 2);
    assert!(err.contains("nope.csv"), "{err}");
}

#[test]
fn malformed_inputs_exit_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("e.csv");
    fs::write(&edges, "src,dst,t_ms\n1,1,5\n").unwrap();
    let (code, _, err) = run(&["--out", s(dir.path()), "mine", s(&edges)]);
    assert_eq!(code, 1, "{err}");
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[motif]\nkay = 3\n").unwrap();
    assert_eq!(run(&["--config", s(&cfg), "simulate"]).0, 1);
    fs::write(&cfg, "[scenario]\nid = 3\n").unwrap();
    assert_eq!(run(&["--config", s(&cfg), "--out", s(dir.path()), "simulate"]).0, 1);
    assert_eq!(run(&["frobnicate"]).0, 1);
}

#[test]
fn dry_run_prints_defaults() {
    let (code, stdout, _) = run(&["--dry-run", "--seed", "17", "simulate"]);
    assert_eq!(code, 0);
    for key in [
        "seed = 17",
        "alpha = 3.0",
        "noise_dbm = -94.0",
        "bandwidth_hz = 75000000.0",
        "p_max_dbm = 20.0",
        "p_bs_w = 20.0",
        "sinr_threshold_db = 10.0",
        "theta_r = 2.0",
        "m_total = 10",
        "f_cached = 3",
        "t_constraint_s = 100.0",
        "lane_width_m = 3.5",
        "bs_distance_m = 10000.0",
    ] {
        assert!(stdout.contains(key), "missing {key} in\n{stdout}");
    }
}

#[test]
fn simulate_row_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    // default sweep and replication count, cheap reference model
    fs::write(&cfg, "[null_model]\nsamples = 2\n").unwrap();
    let out = dir.path().join("s1");
    let (code, _, err) = run(&["--config", s(&cfg), "--out", s(&out), "simulate"]);
    assert_eq!(code, 0, "{err}");
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().next().unwrap(), "scenario,sweep_point,strategy,replication,avg_rate_bps");
    assert_eq!(metrics.lines().count() - 1, 10 * 2 * 20);
    let cdf = fs::read_to_string(out.join("cdf.csv")).unwrap();
    assert_eq!(cdf.lines().next().unwrap(), "scenario,serving_count,strategy,rate_bps,cdf");

    fs::write(&cfg, "[null_model]\nsamples = 2\n[scenario]\nid = 2\nreplications = 1\n").unwrap();
    let out = dir.path().join("s2");
    let (code, _, err) = run(&["--config", s(&cfg), "--out", s(&out), "simulate"]);
    assert_eq!(code, 0, "{err}");
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let points: Vec<String> = summary.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().to_string()).collect();
    let expect: Vec<String> = (31..=53).step_by(2).map(|p: usize| p.to_string()).collect();
    assert_eq!(points, expect);
}
