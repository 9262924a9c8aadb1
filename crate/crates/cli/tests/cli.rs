use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn agflats(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_agflats"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn spectrum_reports_match() {
    let out = agflats(&["spectrum", "-n", "3", "-k", "2", "-t", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["check"], "MATCH");
    assert_eq!(v["tool"], "agflats");
    assert_eq!(v["params"]["n"], 3);
    let members: Vec<u64> = serde_json::from_value(v["spectrum"]["members"].clone()).unwrap();
    assert_eq!(members, vec![3, 5, 6, 7]);
}

#[test]
fn spectrum_without_closed_form_is_unknown() {
    let v = json_of(&agflats(&["spectrum", "-n", "4", "-k", "2", "-t", "4"]));
    assert_eq!(v["check"], "UNKNOWN");
    assert!(v["closed_form"].is_null());
}

#[test]
fn spectrum_csv_has_one_row_per_size() {
    let out = agflats(&[
        "spectrum", "-n", "3", "-k", "1", "-t", "0", "--format", "csv",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "m,forced,closed_form");
    assert_eq!(lines.len(), 10);
    assert_eq!(lines[7], "6,true,true");
    assert_eq!(lines[8], "7,false,false");
}

#[test]
fn five_dimensional_spectrum_needs_pruning() {
    let out = agflats(&["spectrum", "-n", "5", "-k", "1", "-t", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("orbit pruning"));
    let pruned = agflats(&[
        "spectrum",
        "-n",
        "5",
        "-k",
        "1",
        "-t",
        "1",
        "--orbit-pruning",
    ]);
    assert_eq!(pruned.status.code(), Some(0));
    assert_eq!(json_of(&pruned)["check"], "MATCH");
}

#[test]
fn forces_gives_a_certified_witness() {
    let v = json_of(&agflats(&[
        "forces", "-n", "4", "-m", "5", "-k", "2", "-t", "4",
    ]));
    assert_eq!(v["forced"], false);
    assert_eq!(v["witness_certified"], true);
    assert_eq!(v["witness"]["points"].as_array().unwrap().len(), 5);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(agflats(&["spectrum", "-n", "3"]).status.code(), Some(2));
    assert_eq!(agflats(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(
        agflats(&["construct", "lex", "-n", "4"]).status.code(),
        Some(2)
    );
    assert_eq!(
        agflats(&["construct", "bose", "-n", "5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        agflats(&["spectrum", "-n", "3", "-k", "1", "-t", "1", "--jobs", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn evasive_construction_depends_only_on_seed() {
    let a = agflats(&["construct", "evasive", "-n", "9", "--seed", "3"]);
    let b = agflats(&[
        "construct",
        "evasive",
        "-n",
        "9",
        "--seed",
        "3",
        "--jobs",
        "1",
    ]);
    let c = agflats(&["construct", "evasive", "-n", "9", "--seed", "4"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let v = json_of(&a);
    assert_eq!(v["seed"], 3);
    assert_eq!(v["certificate"]["evasive"], true);
    assert!(v["certificate"]["witness"].is_null());
}

#[test]
fn combined_constructions_certify() {
    for kind in ["combine-union", "combine-diff"] {
        let out = agflats(&["construct", kind, "-n", "8", "-m", "77", "--seed", "1"]);
        assert_eq!(out.status.code(), Some(0), "{kind}");
        let v = json_of(&out);
        assert_eq!(v["construction"], kind);
        assert_eq!(v["certificate"]["profile_contained"], true);
    }
}

#[test]
fn lex_csv_lists_the_initial_segment() {
    let out = agflats(&["construct", "lex", "-n", "4", "-m", "5", "--format", "csv"]);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "point\n0\n1\n2\n3\n4\n"
    );
}

#[test]
fn energy_reads_standard_input() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_agflats"))
        .args(["energy", "--input", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(br#"{"n": 3, "points": [0, 1, 2, 4]}"#)
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    // no four points sum to zero, so E = 3m^2 - 2m
    assert_eq!(v["energy"], "40");
    assert_eq!(v["f23_from_energy"], "4");
    assert_eq!(v["f23_direct"], 4);
    assert_eq!(v["f23_agree"], true);
}

#[test]
fn output_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("agflats-cli-{}.csv", std::process::id()));
    let out = agflats(&[
        "cube",
        "-n",
        "2",
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(2).unwrap().starts_with("2,1,2,1,2,2,"));
}

#[test]
fn cube_of_input_set() {
    let path = std::env::temp_dir().join(format!("agflats-cube-{}.json", std::process::id()));
    std::fs::write(&path, r#"{"n": 3, "points": [0, 1, 2, 3]}"#).unwrap();
    let v = json_of(&agflats(&[
        "cube",
        "-n",
        "3",
        "--input",
        path.to_str().unwrap(),
    ]));
    std::fs::remove_file(&path).ok();
    assert_eq!(v["cut"]["crossing_edges"], 4);
    assert_eq!(v["bound_holds"], true);
}

#[test]
fn profile_of_lexicographic_set() {
    let v = json_of(&agflats(&["profile", "-k", "2", "-n", "4", "-m", "7"]));
    let sizes: Vec<u32> = serde_json::from_value(v["profile"]["sizes"].clone()).unwrap();
    assert_eq!(sizes, vec![0, 1, 2, 3, 4]);
}

#[test]
fn verify_suite_passes() {
    let out = agflats(&["verify", "small-spectra", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.lines().all(|l| l.starts_with("PASS ")));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("name,passed,detail\n"));
}
