use std::collections::HashSet;

use permlab::conjectures::{
    check_against, counterexample_fixtures, golden_fixtures, params, resolve_alias, verdict, verify_range, Campaign,
    ConjectureError, ConjectureId, RecordStatus, Verdict, VerificationRecord,
};
use permlab::records::{parse_records, RecordWriter};
use permlab::search;

fn run(campaign: &Campaign, jobs: usize) -> Vec<VerificationRecord> {
    let plan = campaign.plan().unwrap();
    let mut out = Vec::new();
    verify_range(campaign.id, &plan, 10_000_000, jobs, &HashSet::new(), &mut |r| {
        out.push(r);
        Ok(())
    })
    .unwrap();
    out.iter_mut().for_each(|r| r.elapsed_ms = 0);
    out
}

#[test]
fn printed_arrangements_pass() {
    let fixtures = golden_fixtures();
    assert!(fixtures.len() >= 8);
    for f in fixtures {
        assert!(f.passes().unwrap(), "{}", f.name);
        // check_against tests the conclusion; an unpinned circle for the
        // ends-adjacent problem only witnesses its hypothesis
        let hypothesis_only =
            f.conjecture == ConjectureId::DistanceCircleEndsAdjacent && f.instance.constraint.pins.is_empty();
        let pass = check_against(f.conjecture, &f.params, &f.arrangement).unwrap().pass;
        assert_eq!(pass, !hypothesis_only, "{}", f.name);
    }
}

#[test]
fn disturbed_arrangements_fail() {
    for f in golden_fixtures() {
        let mut arr = f.arrangement.clone();
        let n = arr.elements.len();
        arr.elements.swap(1, n / 2 + 1);
        let report = check_against(f.conjecture, &f.params, &arr).unwrap();
        // a swap can happen to preserve the property; it must at least be checked
        if !report.pass {
            assert!(report.violation.is_some(), "{}", f.name);
        }
        arr.elements.pop();
        assert!(!check_against(f.conjecture, &f.params, &arr).unwrap().pass, "{}: dropped element accepted", f.name);
    }
}

#[test]
fn impossibility_fixtures_hold() {
    for c in counterexample_fixtures() {
        let out = search(&c.instance, 100_000_000).unwrap();
        assert_eq!(out.status, c.expected, "{}", c.name);
    }
}

#[test]
fn pooled_and_sequential_campaigns_match() {
    for (alias, from, to) in [("3.13", 1, 25), ("3.3", 2, 8), ("3.5", 2, 7), ("3.12", 1, 5)] {
        let (id, fixed) = resolve_alias(alias).unwrap();
        let mut c = Campaign::new(id, from, to);
        c.fixed = fixed;
        assert_eq!(run(&c, 1), run(&c, 4), "{alias}");
    }
}

#[test]
fn records_follow_plan_order_and_skip_done() {
    let c = Campaign::new(ConjectureId::TwinPrimeSums, 1, 12);
    let plan = c.plan().unwrap();
    let done: HashSet<_> = plan.iter().step_by(3).cloned().collect();
    let mut seen = Vec::new();
    let ran = verify_range(c.id, &plan, 1_000_000, 3, &done, &mut |r| {
        seen.push(r.params);
        Ok(())
    })
    .unwrap();
    let expected: Vec<_> = plan.iter().filter(|p| !done.contains(*p)).cloned().collect();
    assert_eq!(ran, expected.len());
    assert_eq!(seen, expected);
}

#[test]
fn sink_failure_stops_the_campaign() {
    let c = Campaign::new(ConjectureId::TwinPrimeSums, 1, 40);
    let plan = c.plan().unwrap();
    let mut calls = 0;
    let r = verify_range(c.id, &plan, 1_000_000, 4, &HashSet::new(), &mut |_| {
        calls += 1;
        Err(ConjectureError::Io(std::io::Error::other("disk full")))
    });
    assert!(matches!(r, Err(ConjectureError::Io(_))));
    assert_eq!(calls, 1);
}

#[test]
fn random_families_follow_the_seed() {
    let mut c = Campaign::new(ConjectureId::DistancePathFromStart, 3, 6);
    c.family = "random".into();
    let a = c.plan().unwrap();
    assert_eq!(a, c.plan().unwrap());
    assert!(a.iter().all(|p| p["seed"] == 0));
    c.seed = 7;
    let b = c.plan().unwrap();
    assert!(b.iter().all(|p| p["seed"] == 7));
    assert_eq!(run(&c, 2), run(&c, 1));
}

#[test]
fn expected_impossibilities_conform_when_exhausted() {
    let mut c = Campaign::new(ConjectureId::SumsAndProducts, 4, 6);
    c.family = "exceptional".into();
    let records = run(&c, 2);
    assert!(!records.is_empty());
    for r in &records {
        assert_eq!(r.status, RecordStatus::Exhausted, "{:?}", r.params);
        assert_eq!(verdict(r), Verdict::Conforming);
    }
}

#[test]
fn records_survive_the_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.jsonl");
    let mut records = run(&Campaign::new(ConjectureId::CoprimeSums, 1, 9), 1);
    records.extend(run(&Campaign::new(ConjectureId::DistanceCircleEndsAdjacent, 7, 7), 1));
    let statuses: HashSet<_> = records.iter().map(|r| r.status).collect();
    assert!(statuses.contains(&RecordStatus::Witness) && statuses.contains(&RecordStatus::Exhausted));
    assert!(statuses.contains(&RecordStatus::SkippedPrecondition));
    let mut w = RecordWriter::create(&path).unwrap();
    for r in &records {
        w.append(r).unwrap();
    }
    drop(w);
    let back = parse_records(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back.records, records);
    assert!(!back.truncated);

    // resuming keeps every record and the file unchanged
    let before = std::fs::read(&path).unwrap();
    let (set, _w) = RecordWriter::resume(&path).unwrap();
    assert_eq!(set.records, records);
    assert_eq!(std::fs::read(&path).unwrap(), before);
    assert_eq!(set.done(ConjectureId::CoprimeSums).len(), 9);
}

#[test]
fn witnesses_recheck_offline() {
    for r in run(&Campaign::new(ConjectureId::SophieGermainSums, 1, 15), 1) {
        if let Some(w) = &r.witness {
            assert!(permlab::conjectures::recheck(r.conjecture, &r.params, w).unwrap());
            let mut bad = w.clone();
            bad.reverse();
            bad.swap(0, 1);
            bad.pop();
            assert!(!permlab::conjectures::recheck(r.conjecture, &r.params, &bad).unwrap());
        }
    }
    assert!(permlab::conjectures::recheck(ConjectureId::TwinPrimeSums, &params(&[("n", 0)]), &[]).is_err());
}
