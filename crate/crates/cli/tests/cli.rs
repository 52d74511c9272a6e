use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phylokit")).args(args).output().unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn ok_text(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn pipeline_writes_report_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let text = ok_text(&[
        "pipeline",
        "--distances",
        &data("table3.phy"),
        "--context",
        &data("motif_context.fa"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(text.contains("hs"));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    for key in ["specVersion", "pairwise", "newick", "pSame", "pAny", "p42", "genomeScale", "motifHits"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    assert_eq!(report["pairwise"].as_array().unwrap().len(), 45);
    let hits = report["motifHits"].as_array().unwrap();
    assert_eq!(hits.len(), 1);
    assert!(hits[0].to_string().contains("6173"));
    let p42 = report["p42"].as_f64().unwrap();
    let p_any = report["pAny"].as_f64().unwrap();
    assert!((p42 - p_any.powi(42)).abs() <= 1e-12 * p42);
}

#[test]
fn pipeline_from_alignment_matches_dist() {
    let report = ok_json(&["pipeline", "--alignment", &data("toy_fourfold.fa"), "--json"]);
    assert!(report["newick"].as_str().unwrap().ends_with(';'));
    let phy = ok_text(&["dist", "--alignment", &data("toy_fourfold.fa")]);
    let first = phy.lines().nth(1).unwrap();
    // gg hs: n = 43, k = 10
    let expected = -0.75 * (1.0 - 4.0 / 3.0 * 10.0 / 43.0f64).ln();
    let got: f64 = first.split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
}

#[test]
fn nj_build_reproduces_additive_tree() {
    let dir = tempfile::tempdir().unwrap();
    let metric = ok_text(&["tree", "metric", "--newick", &data("figure3.nwk")]);
    let phy = write(&dir, "m.phy", &metric);
    let r = ok_json(&["nj", "build", "--distances", &phy, "--json"]);
    assert_eq!(r["clampedBranches"], 0);
    let rebuilt = write(&dir, "nj.nwk", r["newick"].as_str().unwrap());
    let a = ok_json(&["tree", "splits", "--newick", &data("figure3.nwk")]);
    let b = ok_json(&["tree", "splits", "--newick", &rebuilt]);
    let set = |v: &Value| {
        let mut s: Vec<String> =
            v["splits"].as_array().unwrap().iter().map(|x| x["split"].as_str().unwrap().to_string()).collect();
        s.sort();
        s
    };
    assert_eq!(set(&a), set(&b));
    let fp = ok_json(&["tree", "fourpoint", "--distances", &phy]);
    assert_eq!(fp["isMetric"], true);
    assert_eq!(fp["fourPoint"], true);
}

#[test]
fn four_point_failure_names_a_quadruple() {
    let dir = tempfile::tempdir().unwrap();
    // d(a,b)+d(c,d) = 2 is strictly the largest of the three sums
    let phy = write(&dir, "d.phy", "4\na 0 1 2 2\nb 1 0 2 2\nc 2 2 0 1\nd 2 2 1 0\n");
    let bad = write(&dir, "e.phy", "4\na 0 2 1 1\nb 2 0 1 1\nc 1 1 0 2\nd 1 1 2 0\n");
    assert_eq!(ok_json(&["tree", "fourpoint", "--distances", &phy])["fourPoint"], true);
    let v = ok_json(&["tree", "fourpoint", "--distances", &bad]);
    assert_eq!(v["fourPoint"], false);
    assert_eq!(v["quadruple"].as_array().unwrap().len(), 4);
}

#[test]
fn align_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let uniform = r#"{"S": [[0.3333333333333333,0.3333333333333333,0.3333333333333333],
        [0.3333333333333333,0.3333333333333333,0.3333333333333333],
        [0.3333333333333333,0.3333333333333333,0.3333333333333333]],
        "tM": [[0.0625,0.0625,0.0625,0.0625],[0.0625,0.0625,0.0625,0.0625],
               [0.0625,0.0625,0.0625,0.0625],[0.0625,0.0625,0.0625,0.0625]],
        "tI": [0.25,0.25,0.25,0.25], "tD": [0.25,0.25,0.25,0.25]}"#;
    let params = write(&dir, "pair.json", uniform);
    // M, DI, ID: 1/16 + 2 * (1/4 * 1/3 * 1/4)
    let p = ok_json(&["align", "prob", "--params", &params, "A", "C"])["probability"].as_f64().unwrap();
    assert!((p - 5.0 / 48.0).abs() < 1e-15);

    let s = ok_json(&["align", "score", "--mis", "1", "--gap", "1", "ACGT", "ACGT"]);
    assert_eq!(s["score"], 4.0);
    assert_eq!(s["alignment"], "MMMM");

    let fa = write(&dir, "two.fa", ">x\nACGT\n>y\nAGT\n");
    let poly = ok_json(&["align", "polygon", "--fasta", &fa]);
    let verts = poly["vertices"].as_array().unwrap();
    assert_eq!(verts.len(), poly["witnesses"].as_array().unwrap().len());
    assert_eq!(verts[0], serde_json::json!([0, 1]));

    assert_eq!(ok_text(&["align", "enumerate", "--n", "2", "--m", "3", "--count"]).trim(), "25");
    assert_eq!(ok_text(&["align", "enumerate", "--n", "1", "--m", "1"]).lines().count(), 3);
}

#[test]
fn hmm_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(
        &dir,
        "coin.json",
        r#"{"k": 2, "l": 2, "S": [[0.9, 0.1], [0.2, 0.8]], "T": [[0.5, 0.5], [0.1, 0.9]],
            "mode": "stochastic", "states": ["F", "L"], "alphabet": ["H", "T"]}"#,
    );
    let obs = write(&dir, "obs.txt", "H\nTTTTTT\n");
    let f = ok_json(&["hmm", "forward", "--model", &model, "--obs", &obs]);
    assert!((f[0]["probability"].as_f64().unwrap() - 0.3).abs() < 1e-15);
    let v = ok_json(&["hmm", "viterbi", "--model", &model, "--obs", &obs]);
    assert_eq!(v[1]["path"], serde_json::json!(["L", "L", "L", "L", "L", "L"]));
    let t = ok_json(&["hmm", "train", "--model", &model, "--obs", &obs, "--iters", "5", "--tol", "-inf"]);
    let ll = t["logLikelihoods"].as_array().unwrap();
    assert_eq!(ll.len(), 6);
    assert_eq!(t["iterations"], 5);
    for w in ll.windows(2) {
        assert!(w[1].as_f64().unwrap() >= w[0].as_f64().unwrap() - 1e-9);
    }
    assert_eq!(t["model"]["k"], 2);
}

#[test]
fn codon_statistics_on_independent_counts() {
    let dir = tempfile::tempdir().unwrap();
    // all 64 codons once: the empirical table is a product of uniforms
    let mut seq = String::new();
    for a in "ACGT".chars() {
        for b in "ACGT".chars() {
            for c in "ACGT".chars() {
                seq.extend([a, b, c]);
            }
        }
    }
    let fa = write(&dir, "cds.fa", &format!(">cds\n{seq}\n"));
    let r = ok_json(&["codon", "--fasta", &fa]);
    assert_eq!(r["codons"], 64);
    assert!(r["g2"].as_f64().unwrap().abs() < 1e-12);
    assert!(r["sigma2"].as_f64().unwrap() < 1e-12);
    assert!(r["maxMinor"].as_f64().unwrap() < 1e-12);
}

#[test]
fn motif_and_simulate() {
    let m = ok_json(&["motif", "--fasta", &data("motif_context.fa")]);
    let hits = m["hits"].as_array().unwrap();
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0]["position"], 6173);

    let a = ok_text(&["simulate", "--newick", &data("figure3.nwk"), "--length", "50", "--seed", "7"]);
    let b = ok_text(&["simulate", "--newick", &data("figure3.nwk"), "--length", "50", "--seed", "7"]);
    assert_eq!(a, b);
    assert_eq!(a.matches('>').count(), 10);
}

#[test]
fn errors_exit_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let saturated = write(&dir, "sat.fa", ">a\nACGT\n>b\nCATG\n");
    let garbage = write(&dir, "bad.phy", "3\na 0 1\n");
    let asymmetric = write(&dir, "asym.phy", "2\na 0 1\nb 2 0\n");
    for args in [
        vec!["pipeline", "--distances", "/definitely/not/here.phy"],
        vec!["pipeline", "--alignment", saturated.as_str()],
        vec!["dist", "--alignment", saturated.as_str()],
        vec!["nj", "build", "--distances", garbage.as_str()],
        vec!["nj", "build", "--distances", asymmetric.as_str()],
        vec!["align", "score", "--mis", "1", "--gap", "1", "ACGX", "A"],
        vec!["no-such-command"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"), "{args:?}");
    }
}
