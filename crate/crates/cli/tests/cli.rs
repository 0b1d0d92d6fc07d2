use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn permlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permlab")).args(args).env_remove("PERMLAB_BUDGET").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn elements(o: &Output) -> Vec<i64> {
    let v: Value = serde_json::from_str(&stdout(o)).unwrap();
    v["elements"].as_array().unwrap().iter().map(|e| e[0].as_i64().unwrap()).collect()
}

/// Drops the `elapsed_ms` field from every JSON line.
fn without_timing(text: &str) -> Vec<Value> {
    text.lines()
        .map(|l| {
            let mut v: Value = serde_json::from_str(l).unwrap();
            v.as_object_mut().unwrap().remove("elapsed_ms");
            v
        })
        .collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn construct_examples() {
    let o = permlab(&["construct", "thm1.2i", "--n", "4"]);
    assert_eq!((code(&o), elements(&o)), (0, vec![0, 3, 1, 2, 4]));
    let o = permlab(&["construct", "thm1.5", "--n", "7"]);
    assert_eq!((code(&o), elements(&o)), (0, vec![3, 2, 6, 4, 5, 1]));
    let o = permlab(&["construct", "thm1.3", "--elements", "0,5,6,10"]);
    assert_eq!((code(&o), elements(&o)), (0, vec![0, 6, 5, 10]));
    let o = permlab(&["construct", "thm1.1", "--elements", "-3,1,7"]);
    assert_eq!(elements(&o), vec![-3, 7, 1]);
}

#[test]
fn construct_exit_codes() {
    // outside the recipe's hypothesis
    assert_eq!(code(&permlab(&["construct", "cor1.1", "--n", "2"])), 3);
    let o = permlab(&["construct", "thm1.6", "--q", "25", "--op", "sum", "--target", "s"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("not_found"));
    assert_eq!(code(&permlab(&["construct", "thm1.6", "--q", "29", "--op", "diff", "--target", "t"])), 0);
    assert_eq!(code(&permlab(&["construct", "thm1.5"])), 3);
    assert_eq!(code(&permlab(&["construct", "thm9"])), 3);
    assert_eq!(code(&permlab(&["construct", "thm1.5", "--n", "12"])), 3);
}

#[test]
fn arrangement_files_round_trip() {
    let cases: [&[&str]; 6] = [
        &["construct", "thm1.2ii", "--n", "8"],
        &["construct", "thm1.4", "--elements", "1,2,4,8,9"],
        &["construct", "thm1.6", "--q", "27", "--op", "sum", "--target", "t"],
        &["construct", "rem1.2", "--elements", "0,1,2,3,4,5"],
        &["construct", "rem3.11", "--n", "9"],
        &["construct", "cor1.1", "--n", "6"],
    ];
    for args in cases {
        let o = permlab(args);
        assert_eq!(code(&o), 0, "{args:?}");
        let text = stdout(&o);
        let arr: permlab::Arrangement = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&arr).unwrap() + "\n", text);
    }
}

const PERMUTATION_N20: [i64; 21] = [0, 3, 12, 9, 15, 18, 6, 20, 19, 14, 13, 4, 2, 7, 16, 17, 11, 10, 5, 8, 1];

fn integer_arrangement(xs: &[i64]) -> String {
    let els: Vec<Vec<i64>> = xs.iter().map(|&x| vec![x]).collect();
    serde_json::json!({ "group": { "kind": "integers" }, "shape": "circular", "elements": els }).to_string()
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.json", &integer_arrangement(&PERMUTATION_N20));
    let o = permlab(&["check", "--arrangement", &good, "--conjecture", "3.16", "--params", "n=20"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let mut swapped = PERMUTATION_N20;
    swapped.swap(5, 6);
    let bad = write(dir.path(), "bad.json", &integer_arrangement(&swapped));
    let o = permlab(&["check", "--arrangement", &bad, "--conjecture", "3.16", "--params", "n=20"]);
    assert_eq!(code(&o), 1);
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(!report["violation"]["positions"].as_array().unwrap().is_empty());

    // the right arrangement for the wrong size is a negative, not a usage error
    let o = permlab(&["check", "--arrangement", &good, "--conjecture", "3.16", "--params", "n=21"]);
    assert_eq!(code(&o), 1);

    let junk = write(dir.path(), "junk.json", "{\"group\": ");
    assert_eq!(code(&permlab(&["check", "--arrangement", &junk, "--conjecture", "3.16", "--params", "n=20"])), 3);
    assert_eq!(code(&permlab(&["check", "--arrangement", &good, "--conjecture", "3.16"])), 3);
    assert_eq!(code(&permlab(&["check", "--arrangement", &good])), 3);
}

fn mod_diff_instance(n: u64) -> String {
    let ground: Vec<Vec<u64>> = (1..=n).map(|x| vec![x % n]).collect();
    serde_json::json!({
        "group": { "kind": "cyclic_product", "moduli": [n] },
        "shape": "linear",
        "ground": ground,
        "constraint": { "clauses": [{ "kind": "rainbow_diff" }] }
    })
    .to_string()
}

fn filz_instance(n: i64) -> String {
    let ground: Vec<Vec<i64>> = (1..=n).map(|x| vec![x]).collect();
    serde_json::json!({
        "group": { "kind": "integers" },
        "shape": "circular",
        "ground": ground,
        "constraint": { "clauses": [{
            "kind": "edge_predicate",
            "predicate": { "kind": "prime_predicate" },
            "labeler": { "kind": "sum" }
        }] }
    })
    .to_string()
}

#[test]
fn search_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let odd = write(dir.path(), "odd.json", &mod_diff_instance(5));
    let o = permlab(&["search", "--instance", &odd, "--all-small"]);
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["search"]["status"], "exhausted");
    assert_eq!(v["brute_force"]["canonical_count"], 0);
    assert_eq!(v["agree"], true);

    let filz = write(dir.path(), "filz.json", &filz_instance(6));
    let o = permlab(&["search", "--instance", &filz, "--budget", "1e6"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "witness");

    let hard = write(dir.path(), "hard.json", &filz_instance(30));
    assert_eq!(code(&permlab(&["search", "--instance", &hard, "--budget", "10"])), 2);
    assert_eq!(code(&permlab(&["search", "--instance", &hard, "--all-small"])), 3);
    assert_eq!(code(&permlab(&["search", "--instance", &hard, "--budget", "0"])), 3);

    let out = Command::new(env!("CARGO_BIN_EXE_permlab"))
        .args(["search", "--instance", &hard])
        .env("PERMLAB_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2, "PERMLAB_BUDGET sets the default budget");
}

#[test]
fn verify_writes_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.jsonl");
    let out_s = out.to_str().unwrap();
    let run = |extra: &[&str]| {
        let mut args = vec!["verify", "--conjecture", "3.13", "--from", "1", "--to", "30", "--out", out_s];
        if !extra.contains(&"--jobs") {
            args.extend(["--jobs", "4"]);
        }
        args.extend_from_slice(extra);
        permlab(&args)
    };
    let o = run(&[]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("seed=0"));
    let first = fs::read_to_string(&out).unwrap();
    let lines = without_timing(&first);
    assert_eq!(lines.len(), 30);
    assert!(lines.iter().all(|r| r["status"] == "witness"));

    let o = run(&["--resume"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("ran 0 searches"), "{}", stdout(&o));
    assert_eq!(fs::read_to_string(&out).unwrap(), first);

    // an interrupted write: the partial line is dropped and re-done
    fs::write(&out, &first[..first.len() - 20]).unwrap();
    let o = run(&["--resume"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("ran 1 searches"), "{}", stdout(&o));
    assert_eq!(without_timing(&fs::read_to_string(&out).unwrap()), lines);

    // a fresh run replaces the file and reproduces the same records
    let o = run(&["--jobs", "1"]);
    assert_eq!(code(&o), 0);
    assert_eq!(without_timing(&fs::read_to_string(&out).unwrap()), lines);
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.jsonl");
    let out_s = out.to_str().unwrap();
    let o = permlab(&["verify", "--conjecture", "3.12", "--family", "exceptional", "--out", out_s]);
    assert_eq!(code(&o), 0);
    let records = without_timing(&fs::read_to_string(&out).unwrap());
    assert!(!records.is_empty() && records.iter().all(|r| r["status"] == "exhausted"));

    // min and max cannot be adjacent for two seven-element sets
    let o = permlab(&["verify", "--conjecture", "3.2", "--from", "7", "--to", "7", "--out", out_s]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("VIOLATION"));

    let o = permlab(&["verify", "--conjecture", "3.16", "--from", "30", "--to", "30", "--budget", "100", "--out", out_s]);
    assert_eq!(code(&o), 2);

    // records on stdout when there is no --out
    let o = permlab(&["verify", "--conjecture", "filz", "--from", "2", "--to", "6"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 5);

    assert_eq!(code(&permlab(&["verify", "--conjecture", "3.13", "--from", "5", "--to", "1"])), 3);
    assert_eq!(code(&permlab(&["verify", "--conjecture", "3.13"])), 3);
    assert_eq!(code(&permlab(&["verify", "--conjecture", "3.99", "--from", "1", "--to", "2"])), 3);
    assert_eq!(code(&permlab(&["verify", "--conjecture", "3.13", "--from", "1", "--to", "2", "--family", "nope"])), 3);
    assert_eq!(code(&permlab(&["verify", "--conjecture", "3.13", "--from", "1", "--to", "2", "--resume"])), 3);
}

#[test]
fn verify_aliases_fix_the_part() {
    let o = permlab(&["verify", "--conjecture", "3.7ii-sums", "--from", "23", "--to", "60"]);
    assert_eq!(code(&o), 0);
    let records = without_timing(&stdout(&o));
    assert!(!records.is_empty());
    for r in records {
        assert_eq!((r["params"]["part"].as_i64(), r["params"]["op"].as_i64()), (Some(2), Some(0)));
        assert_eq!(r["status"], "witness");
    }
}

#[test]
fn fixtures_pass_and_repeat() {
    let a = permlab(&["fixtures"]);
    assert_eq!(code(&a), 0, "{}", stdout(&a));
    let b = permlab(&["fixtures"]);
    assert_eq!(without_timing(&stdout(&a)), without_timing(&stdout(&b)));
}

#[test]
fn list_names_every_problem() {
    let o = permlab(&["list"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    for id in permlab::conjectures::ConjectureId::ALL {
        assert!(text.lines().any(|l| l == id.as_str()), "{id} missing");
    }
}
