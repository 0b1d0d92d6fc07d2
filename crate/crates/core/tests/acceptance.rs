//! Acceptance suite: one line per criterion with its pinned time limit.
//! Runs as a plain binary so the lines are always printed.

mod common;

use std::collections::HashSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{kind_name, small_instances, Small, ALL_KINDS};
use permlab::conjectures::{
    counterexample_fixtures, golden_fixtures, params, resolve_alias, verify_range, Campaign, RecordStatus, VerificationRecord,
};
use permlab::constructions::{
    circular_distinct_diffs, coprime_circle_odd, mod_distinct_diffs, prime_circle_distinct_distances, qr_cycle,
    reduced_residue_cycle, repair_adjacent_sums, triple_sum_cycle, weighted_sum_cycle, zigzag_distances,
    Construction, QrClass, QrCycle, QrOp,
};
use permlab::numtheory::{euler_phi, gcd, is_prime, prime_power};
use permlab::search::{brute_force_enumerate, brute_force_pairings, search_pairing};
use permlab::{check, search, Clause, Constraint, GroupElement, GroupSpec, Instance, SearchStatus, Shape};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Name, time limit in seconds, check.
type Criterion = (&'static str, u64, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn distinct_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<i128> {
    // narrow windows make the collision branches likely
    let spread: i128 = if rng.gen_bool(0.5) { 2 * n as i128 + 2 } else { 1 << 30 };
    let mut out = HashSet::new();
    while out.len() < n {
        out.insert(rng.gen_range(-spread..=spread));
    }
    let mut v: Vec<i128> = out.into_iter().collect();
    v.sort();
    v.shuffle(rng);
    v
}

fn distinct_vectors(rng: &mut ChaCha8Rng, n: usize) -> Vec<GroupElement> {
    let mut out = HashSet::new();
    while out.len() < n {
        out.insert(GroupElement(vec![rng.gen_range(-3..=3), rng.gen_range(-20..=20)]));
    }
    out.into_iter().collect()
}

fn checked(c: &Construction) -> Result<(), String> {
    let r = check(&c.arrangement, &c.constraint).map_err(|e| e.to_string())?;
    ensure(r.pass, || format!("{} fails: {:?}", c.arrangement, r.violation))
}

const INSTANCES: usize = 500;

fn construction_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2013);
    let odd_prime_powers = |max: u64| (3..=max).filter(|&n| n % 2 == 1 && prime_power(n).is_some()).collect::<Vec<_>>();
    let residue_moduli: Vec<u64> = odd_prime_powers(200).into_iter().filter(|&n| euler_phi(n).unwrap() <= 64).collect();
    let square_fields = odd_prime_powers(129);
    let mut not_found = 0;
    for i in 0..INSTANCES {
        let n = rng.gen_range(4..=64usize);
        let values = distinct_values(&mut rng, n);
        let size = rng.gen_range(1..=64);
        checked(&zigzag_distances(&distinct_values(&mut rng, size)).map_err(|e| e.to_string())?)?;
        let primes = [1usize].into_iter().chain(3..=64).collect::<Vec<_>>();
        checked(&prime_circle_distinct_distances(*primes.choose(&mut rng).unwrap()).map_err(|e| e.to_string())?)?;
        checked(&circular_distinct_diffs(rng.gen_range(4..=63)).map_err(|e| e.to_string())?)?;
        checked(&mod_distinct_diffs(2 * rng.gen_range(1..=32)).map_err(|e| e.to_string())?)?;
        let (group, els) = if i % 3 == 0 {
            (GroupSpec::IntegerVectors { rank: 2 }, distinct_vectors(&mut rng, n))
        } else {
            (GroupSpec::Integers, values.iter().map(|&x| GroupElement::scalar(x)).collect())
        };
        checked(&weighted_sum_cycle(&group, &els).map_err(|e| e.to_string())?.0)?;
        checked(&triple_sum_cycle(&group, &els).map_err(|e| e.to_string())?.0)?;
        checked(&reduced_residue_cycle(*residue_moduli.choose(&mut rng).unwrap()).map_err(|e| e.to_string())?)?;
        let q = *square_fields.choose(&mut rng).unwrap();
        let op = if rng.gen_bool(0.5) { QrOp::Sum } else { QrOp::Difference };
        let class = if rng.gen_bool(0.5) { QrClass::Squares } else { QrClass::Nonsquares };
        match qr_cycle(q, op, class).map_err(|e| e.to_string())? {
            QrCycle::Found { construction, .. } => checked(&construction)?,
            QrCycle::NotFound => not_found += 1,
        }
        checked(&coprime_circle_odd(2 * rng.gen_range(1..=31) + 1).map_err(|e| e.to_string())?)?;
        let size = rng.gen_range(3..=64);
        checked(&repair_adjacent_sums(&distinct_values(&mut rng, size)).map_err(|e| e.to_string())?)?;
    }
    Ok(format!("10 constructions x {INSTANCES} instances; {not_found} square-circle draws had no generator"))
}

fn golden() -> Outcome {
    let fixtures = golden_fixtures();
    ensure(fixtures.len() >= 12, || format!("only {} fixtures", fixtures.len()))?;
    for f in &fixtures {
        ensure(f.passes().map_err(|e| e.to_string())?, || format!("{} fails", f.name))?;
    }
    Ok(format!("{} printed arrangements pass", fixtures.len()))
}

fn parity() -> Outcome {
    for n in 3..=12i128 {
        let g = GroupSpec::CyclicProduct { moduli: vec![n as u64] };
        let inst = Instance::new(
            g,
            Shape::Linear,
            (1..=n).map(|x| GroupElement::scalar(x % n)).collect(),
            Constraint::single(Clause::RainbowDiff),
        );
        let out = search(&inst, 100_000_000).map_err(|e| e.to_string())?;
        if n % 2 == 1 {
            if !matches!(n, 3 | 5 | 7 | 9) {
                continue;
            }
            ensure(out.status == SearchStatus::Exhausted, || format!("n = {n}: {:?}", out.status))?;
            if n <= 7 {
                let brute = brute_force_enumerate(&inst).map_err(|e| e.to_string())?;
                ensure(!brute.exists(), || format!("n = {n}: brute force finds an arrangement"))?;
            }
        } else {
            ensure(out.status == SearchStatus::Witness, || format!("n = {n}: {:?}", out.status))?;
            let w = out.witness.unwrap().scalars().unwrap();
            let lift = |x: i128| if x == 0 { n } else { x };
            ensure(2 * (lift(w[0]) - lift(w[w.len() - 1])) % n == 0, || format!("n = {n}: {w:?} breaks n | 2(i_1 - i_n)"))?;
        }
    }
    Ok("odd n in {3,5,7,9} exhausted (brute force agrees to 7), even n <= 12 found".into())
}

fn oracle() -> Outcome {
    let drawn = small_instances(7);
    let mut kinds = HashSet::new();
    for d in &drawn {
        let (found, exists) = match &d.problem {
            Small::Search(inst) => {
                kinds.extend(inst.constraint.clauses.iter().map(kind_name));
                let out = search(inst, 100_000_000).map_err(|e| e.to_string())?;
                let brute = brute_force_enumerate(inst).map_err(|e| e.to_string())?;
                ensure(out.status != SearchStatus::BudgetExceeded, || format!("{} {:?}: budget", d.id, d.params))?;
                (out.status == SearchStatus::Witness, brute.exists())
            }
            Small::Pairing(group, set) => {
                kinds.insert("pairing");
                let out = search_pairing(group, set, 100_000_000).map_err(|e| e.to_string())?;
                let count = brute_force_pairings(group, set).map_err(|e| e.to_string())?;
                (out.status == SearchStatus::Witness, count > 0)
            }
        };
        ensure(found == exists, || format!("{} {:?}: search {found}, brute force {exists}", d.id, d.params))?;
    }
    for k in ALL_KINDS {
        ensure(kinds.contains(k), || format!("no instance uses {k}"))?;
    }
    Ok(format!("{} instances, {} constraint kinds", drawn.len(), ALL_KINDS.len()))
}

fn squares_range() -> Outcome {
    let mut count = 0;
    for q in (17..=100).filter(|&q| is_prime(q)) {
        for op in [QrOp::Sum, QrOp::Difference] {
            for class in [QrClass::Squares, QrClass::Nonsquares] {
                match qr_cycle(q, op, class).map_err(|e| e.to_string())? {
                    QrCycle::Found { construction, .. } => checked(&construction)?,
                    QrCycle::NotFound => return Err(format!("q = {q} {op:?} {class:?}: no generator")),
                }
                count += 1;
            }
        }
    }
    Ok(format!("{count} (q, op, class) cases"))
}

fn campaign(alias: &str, from: i64, to: i64) -> Result<Vec<VerificationRecord>, String> {
    let (id, fixed) = resolve_alias(alias).map_err(|e| e.to_string())?;
    let mut c = Campaign::new(id, from, to);
    c.fixed = fixed;
    let plan = c.plan().map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    verify_range(id, &plan, 100_000_000, jobs(), &HashSet::new(), &mut |r| {
        out.push(r);
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    Ok(out)
}

fn primitive_sums() -> Outcome {
    let records = campaign("3.7", 1, 99)?;
    let mut witnesses = [0; 2];
    for r in &records {
        match r.status {
            RecordStatus::Witness => witnesses[r.params["part"] as usize - 1] += 1,
            RecordStatus::SkippedPrecondition => {}
            s => return Err(format!("{:?}: {s:?}", r.params)),
        }
    }
    // every prime 23 <= p < 100 for part 2 sums, as in the statement's range
    for p in (23..100).filter(|&p| is_prime(p)) {
        let key = params(&[("part", 2), ("op", 0), ("p", p as i64)]);
        ensure(records.iter().any(|r| r.params == key && r.status == RecordStatus::Witness), || format!("p = {p} missing"))?;
    }
    Ok(format!("part 1: {} fields, part 2: {} primes x ops, all witness", witnesses[0], witnesses[1]))
}

fn twin_sums() -> Outcome {
    let records = campaign("3.13", 1, 30)?;
    ensure(records.len() == 30, || format!("{} records", records.len()))?;
    for r in &records {
        ensure(r.status == RecordStatus::Witness, || format!("{:?}: {:?}", r.params, r.status))?;
    }
    Ok("n = 1..30 all witness".into())
}

fn impossibilities() -> Outcome {
    let required = [
        "klein-four-differences",
        "sums-products-two-pairs",
        "sums-products-two-pairs-and-one",
        "sums-products-three-pairs",
        "zero-to-seven-coprime-to-90",
    ];
    let fixtures = counterexample_fixtures();
    for name in required {
        let f = fixtures.iter().find(|f| f.name == name).ok_or(format!("{name} missing"))?;
        ensure(f.expected == SearchStatus::Exhausted, || format!("{name} not expected exhausted"))?;
    }
    for f in &fixtures {
        let out = search(&f.instance, 100_000_000).map_err(|e| e.to_string())?;
        ensure(out.status == f.expected, || format!("{}: {:?}, expected {:?}", f.name, out.status, f.expected))?;
    }
    Ok(format!("{} fixtures as expected", fixtures.len()))
}

/// Everything the fixture suite reports, timing left out.
fn fixture_transcript() -> Result<String, String> {
    let mut out = String::new();
    for f in golden_fixtures() {
        let pass = f.passes().map_err(|e| e.to_string())?;
        out += &format!("{} {} {pass}\n", f.name, f.conjecture);
    }
    for f in counterexample_fixtures() {
        let o = search(&f.instance, 100_000_000).map_err(|e| e.to_string())?;
        out += &format!("{} {:?} {} {:?}\n", f.name, o.status, o.nodes, o.witness);
    }
    for mut r in campaign("3.16", 1, 12)? {
        r.elapsed_ms = 0;
        out += &(serde_json::to_string(&r).unwrap() + "\n");
    }
    Ok(out)
}

fn determinism() -> Outcome {
    let (a, b) = (fixture_transcript()?, fixture_transcript()?);
    ensure(a == b, || "two runs differ".into())?;
    Ok(format!("{} identical lines", a.lines().count()))
}

fn residue_cycles() -> Outcome {
    let mut count = 0;
    for n in (3..=2187u64).filter(|&n| n % 2 == 1 && prime_power(n).is_some()) {
        let c = reduced_residue_cycle(n).map_err(|e| e.to_string())?;
        let xs: Vec<u64> = c.arrangement.scalars().unwrap().into_iter().map(|x| x.rem_euclid(n as i128) as u64).collect();
        let phi = euler_phi(n).unwrap() as usize;
        let diffs: Vec<u64> = (0..xs.len()).map(|i| (xs[(i + 1) % xs.len()] + n - xs[i]) % n).collect();
        for (what, set) in [("elements", &xs), ("differences", &diffs)] {
            let distinct: HashSet<_> = set.iter().collect();
            ensure(set.len() == phi && distinct.len() == phi && set.iter().all(|&x| gcd(x, n) == 1), || {
                format!("n = {n}: {what} are not a reduced residue system")
            })?;
        }
        count += 1;
    }
    Ok(format!("{count} odd prime powers up to 2187"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("construction soundness", 60, construction_soundness),
        ("printed arrangements", 1, golden),
        ("differences mod n parity", 30, parity),
        ("search equals brute force", 600, oracle),
        ("squares circles for primes 17..100", 30, squares_range),
        ("primitive sums, q and p < 100", 600, primitive_sums),
        ("twin-prime sums, n <= 30", 300, twin_sums),
        ("impossibility fixtures", 60, impossibilities),
        ("determinism", u64::MAX, determinism),
        ("residue cycles up to 2187", 10, residue_cycles),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let started = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = started.elapsed();
        let within = elapsed <= Duration::from_secs(limit);
        let limit = if limit == u64::MAX { "none".to_string() } else { format!("{limit} s") };
        let (verdict, detail) = match (&result, within) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("over time limit; {d}")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2} {verdict} {name} [{:.2} s, limit {limit}]: {detail}", i + 1, elapsed.as_secs_f64());
    }
    println!("acceptance: {} of 10 criteria pass", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
