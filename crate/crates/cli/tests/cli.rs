use std::process::{Command, Output};

use seqindex_core::witness::verify_multiplier;
use seqindex_core::GroupOrder;
use serde_json::Value;

fn seqindex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqindex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn records(out: &Output) -> Vec<Value> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).expect("one JSON object per line"))
        .collect()
}

fn keys(v: &Value) -> Vec<String> {
    let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
    k.sort();
    k
}

#[test]
fn index_of_worked_example() {
    let out = seqindex(&["index", "--n", "35", "--terms", "2,3,31,34"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &records(&out)[0];
    assert_eq!(r["index"], "1");
    assert_eq!(r["argmin_unit"], 24);
}

#[test]
fn index_reports_fractions_exactly() {
    let out = seqindex(&["index", "--n", "10", "--terms", "2,5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(records(&out)[0]["index"], "7/10");
}

#[test]
fn verify_35_has_no_high_index_and_a_fixed_schema() {
    let out = seqindex(&["verify", "--n", "35"]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    assert_eq!(recs.len(), 1);
    assert_eq!(recs[0]["high_index"], Value::Array(vec![]));
    assert_eq!(recs[0]["complete"], true);
    assert_eq!(
        keys(&recs[0]),
        [
            "complete",
            "elapsed_ms",
            "high_index",
            "k",
            "n",
            "orbits",
            "orbits_total",
            "rule_histogram",
            "sequences_total"
        ]
    );
}

#[test]
fn search_lists_the_index_two_orbit_at_10() {
    let out = seqindex(&["search", "--n", "10", "--k", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    let hit = recs
        .iter()
        .find(|r| r["terms"] == serde_json::json!([2, 5, 6, 7]))
        .expect("(2,5,6,7) listed");
    assert_eq!(hit["index"], 2);
    assert!(recs.iter().all(|r| r["index"].as_u64().unwrap() >= 2));
}

#[test]
fn search_outside_the_conjecture_exits_zero() {
    // Length five is outside the conjecture, so hits there are not violations.
    let out = seqindex(&["search", "--n", "13", "--k", "5", "--orbits"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!records(&out).is_empty());
}

#[test]
fn csv_and_jsonl_agree() {
    let range = ["--n-range", "5:40", "--all", "--orbits"];
    let json = seqindex(&[&["verify"][..], &range].concat());
    let csv = seqindex(&[&["verify", "--format", "csv"][..], &range].concat());
    assert_eq!(json.status.code(), Some(0));
    assert_eq!(csv.status.code(), Some(0));
    let text = String::from_utf8(csv.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.join(","), seqindex_cli::CSV_HEADER);
    let recs = records(&json);
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), recs.len());
    assert_eq!(recs.len(), 36);
    for (row, rec) in rows.iter().zip(&recs) {
        for (name, cell) in header.iter().zip(row.split(',')) {
            let expected = match *name {
                "high_index_count" => rec["high_index"].as_array().unwrap().len().to_string(),
                field => rec[field].to_string(),
            };
            assert_eq!(cell, expected, "{name} for n={}", rec["n"]);
        }
    }
}

#[test]
fn verify_range_defaults_to_moduli_coprime_to_six() {
    let out = seqindex(&["verify", "--n-range", "20:30", "--orbits"]);
    assert_eq!(out.status.code(), Some(0));
    let ns: Vec<u64> = records(&out)
        .iter()
        .map(|r| r["n"].as_u64().unwrap())
        .collect();
    assert_eq!(ns, [23, 25, 29]);
}

#[test]
fn witness_records_round_trip() {
    let enumerate = seqindex(&["enumerate", "--n", "35", "--orbits"]);
    assert_eq!(enumerate.status.code(), Some(0));
    let order = GroupOrder::new(35).unwrap();
    let sequences = records(&enumerate);
    assert!(sequences.len() > 50);
    for seq in sequences.iter().step_by(7) {
        let terms: Vec<u64> = serde_json::from_value(seq["terms"].clone()).unwrap();
        let list = terms
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(",");
        let out = seqindex(&["witness", "--n", "35", "--terms", &list]);
        assert_eq!(out.status.code(), Some(0));
        let rec = &records(&out)[0];
        assert_eq!(
            keys(rec),
            ["index", "n", "rule", "terms", "trail", "witness_m"]
        );
        let m = rec["witness_m"].as_u64().expect("index one at 35");
        assert!(verify_multiplier(&order, &terms, m), "{list}");
    }
}

#[test]
fn witness_of_high_index_sequence_has_no_multiplier() {
    let out = seqindex(&["witness", "--n", "10", "--terms", "2,5,6,7"]);
    assert_eq!(out.status.code(), Some(0));
    let rec = &records(&out)[0];
    assert_eq!(rec["index"], 2);
    assert_eq!(rec["witness_m"], Value::Null);
    assert_eq!(rec["rule"], "HIGH_INDEX");
}

#[test]
fn reduce_reports_normal_form_and_trail() {
    let out = seqindex(&["reduce", "--n", "35", "--terms", "2,3,31,34"]);
    assert_eq!(out.status.code(), Some(0));
    let rec = &records(&out)[0];
    assert_eq!(rec["normal_form"], serde_json::json!([1, 2, 3, 4]));
    assert_eq!(rec["trail"]["complemented"], true);

    let out = seqindex(&["reduce", "--n", "25", "--terms", "5,15,15,15"]);
    let rec = &records(&out)[0];
    assert_eq!(rec["content"], 5);
    assert_eq!(rec["reduced_n"], 5);
    assert_eq!(rec["reduced_terms"], serde_json::json!([1, 3, 3, 3]));
}

#[test]
fn minimal_classifies_sequences() {
    let out = seqindex(&["minimal", "--n", "10", "--terms", "5,5"]);
    let rec = &records(&out)[0];
    assert_eq!(rec["zero_sum"], true);
    assert_eq!(rec["minimal"], true);
    let out = seqindex(&["minimal", "--n", "10", "--terms", "5,5,10"]);
    assert_eq!(records(&out)[0]["minimal"], false);
}

#[test]
fn invalid_input_exits_two() {
    for args in [
        &["index", "--n", "35", "--terms", "0,3"][..],
        &["index", "--n", "35", "--terms", "36"],
        &["index", "--n", "1", "--terms", "1"],
        &["index", "--n", "35"],
        &["index", "--n-range", "5:9", "--terms", "1"],
        &["verify", "--n-range", "9:5"],
        &["verify", "--n-range", "5-9"],
        &["verify", "--n", "35", "--jobs", "0"],
        &["witness", "--n", "35", "--terms", "1,2,3"],
        &["witness", "--n", "35", "--terms", "1,1,1,1"],
        &["reduce", "--n", "35", "--terms", "1,34,1,34"],
        &["bogus"],
    ] {
        let out = seqindex(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn interrupted_sweep_resumes_from_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("sweep.ckpt");
    let ckpt = ckpt.to_str().unwrap();
    let partial = seqindex(&[
        "verify",
        "--n",
        "25",
        "--checkpoint",
        ckpt,
        "--max-blocks",
        "6",
    ]);
    assert_eq!(partial.status.code(), Some(3));
    assert_eq!(records(&partial)[0]["complete"], false);

    let resumed = seqindex(&["verify", "--n", "25", "--checkpoint", ckpt]);
    let fresh = seqindex(&["verify", "--n", "25"]);
    assert_eq!(resumed.status.code(), Some(0));
    let (mut a, mut b) = (records(&resumed)[0].clone(), records(&fresh)[0].clone());
    a.as_object_mut().unwrap().remove("elapsed_ms");
    b.as_object_mut().unwrap().remove("elapsed_ms");
    assert_eq!(a, b);
}

#[test]
fn report_file_receives_the_records() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.jsonl");
    let out = seqindex(&["verify", "--n", "11", "--report", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let rec: Value = serde_json::from_str(text.trim()).unwrap();
    assert_eq!(rec["n"], 11);
}

#[test]
fn output_is_deterministic() {
    let strip = |o: Output| -> Vec<Value> {
        records(&o)
            .into_iter()
            .map(|mut v| {
                v.as_object_mut().unwrap().remove("elapsed_ms");
                v
            })
            .collect()
    };
    let a = strip(seqindex(&[
        "verify",
        "--n-range",
        "5:30",
        "--all",
        "--jobs",
        "1",
    ]));
    let b = strip(seqindex(&[
        "verify",
        "--n-range",
        "5:30",
        "--all",
        "--jobs",
        "3",
    ]));
    assert_eq!(a, b);
    let a = seqindex(&["enumerate", "--n", "12", "--k", "3"]).stdout;
    let b = seqindex(&["enumerate", "--n", "12", "--k", "3"]).stdout;
    assert_eq!(a, b);
}
