//! `permlab`: constructions, checking, search and verification campaigns.
//!
//! Exit codes: 0 the property holds or a witness was found, 1 a definite
//! negative (failed check, exhausted search, violation), 2 inconclusive
//! (node budget), 3 usage or I/O error.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use permlab::conjectures::{
    check_against, counterexample_fixtures, golden_fixtures, parse_params, resolve_alias, verdict, verify_range,
    Campaign, ConjectureId, Verdict, VerificationRecord,
};
use permlab::constructions::{self as cons, Construction, ConstructionError, QrClass, QrCycle, QrOp};
use permlab::records::{RecordSet, RecordWriter};
use permlab::search::{brute_force_enumerate, DEFAULT_BUDGET, MAX_BRUTE_GROUND};
use permlab::{check, search, Arrangement, Constraint, GroupElement, GroupSpec, Instance, SearchStatus};
use serde_json::json;

const HOLDS: u8 = 0;
const NEGATIVE: u8 = 1;
const INCONCLUSIVE: u8 = 2;
const USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "permlab", version, about = "Permutations with distinct or constrained adjacent labels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an arrangement with one of the explicit constructions.
    Construct(ConstructArgs),
    /// Check an arrangement against a problem instance or a constraint.
    Check(CheckArgs),
    /// Search one instance file.
    Search(SearchArgs),
    /// Run a verification campaign over a parameter range.
    Verify(VerifyArgs),
    /// Run the built-in witness and impossibility fixtures.
    Fixtures(FixturesArgs),
    /// List problem ids, their parameters and instance families.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Recipe {
    /// Linear order of a real set with distinct adjacent distances.
    #[value(name = "thm1.1")]
    Zigzag,
    /// Circle of the first n primes with distinct adjacent distances.
    #[value(name = "cor1.1")]
    PrimeCircle,
    /// Circle of 0..=n from 0 to n with distinct adjacent differences.
    #[value(name = "thm1.2i")]
    CircularDiffs,
    /// Order of 1..=n with adjacent differences distinct mod n (n even).
    #[value(name = "thm1.2ii")]
    ModDiffs,
    /// Circle with distinct a + 2b.
    #[value(name = "thm1.3")]
    Weighted,
    /// Circle with distinct consecutive triple sums.
    #[value(name = "thm1.4")]
    Triple,
    /// Primitive-root circle of the reduced residues mod an odd prime power.
    #[value(name = "thm1.5")]
    Residues,
    /// Circle of the nonzero squares of F_q with sums or differences in one class.
    #[value(name = "thm1.6")]
    Squares,
    /// Circle with distinct adjacent sums, by swap repair.
    #[value(name = "rem1.2")]
    Repair,
    /// Circle of 0..=n, n odd, with sums coprime to n-1 and n+1.
    #[value(name = "rem3.11")]
    Coprime,
}

#[derive(Clone, Copy, ValueEnum)]
enum OpArg {
    #[value(alias = "sums", alias = "plus")]
    Sum,
    #[value(alias = "difference", alias = "diffs", alias = "minus")]
    Diff,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    #[value(alias = "s", alias = "squares")]
    Square,
    #[value(alias = "t", alias = "nonsquares")]
    Nonsquare,
}

#[derive(Args)]
struct ConstructArgs {
    recipe: Recipe,
    #[arg(long)]
    n: Option<u64>,
    /// Comma-separated integers.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    elements: Option<Vec<i128>>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long, value_enum, default_value = "sum")]
    op: OpArg,
    #[arg(long, value_enum, default_value = "square")]
    target: TargetArg,
}

#[derive(Args)]
struct CheckArgs {
    /// Arrangement file: {"group", "shape", "elements"}.
    #[arg(long)]
    arrangement: PathBuf,
    /// Problem id, optionally with a part suffix such as 3.7ii-sums.
    #[arg(long, conflicts_with = "constraint", required_unless_present = "constraint")]
    conjecture: Option<String>,
    /// Instance parameters as key=value.
    #[arg(long, num_args = 1.., allow_hyphen_values = true, requires = "conjecture")]
    params: Vec<String>,
    /// Constraint file.
    #[arg(long)]
    constraint: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    /// Instance file: {"group", "shape", "ground", "constraint"}.
    #[arg(long)]
    instance: PathBuf,
    /// Node budget (default: PERMLAB_BUDGET or 10^8).
    #[arg(long, value_parser = parse_budget)]
    budget: Option<u64>,
    /// Also enumerate by brute force and compare (ground sets of at most 9).
    #[arg(long)]
    all_small: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Problem id, optionally with a part suffix such as 3.7ii-sums.
    #[arg(long)]
    conjecture: String,
    #[arg(long, allow_hyphen_values = true)]
    from: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    to: Option<i64>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    jobs: Option<usize>,
    /// Node budget per search (default: PERMLAB_BUDGET or 10^8).
    #[arg(long, value_parser = parse_budget)]
    budget: Option<u64>,
    /// Record file (JSONL). Without it, records go to standard output and
    /// the report to standard error.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Keep the records already in --out and run only the missing instances.
    #[arg(long, requires = "out")]
    resume: bool,
    #[arg(long, default_value = "default")]
    family: String,
    /// Seed of the randomized families.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct FixturesArgs {
    #[arg(long, value_parser = parse_budget)]
    budget: Option<u64>,
}

/// A failure that ends the command with exit code 3.
struct Fail(String);

impl<E: Display> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail(e.to_string())
    }
}

type Res = Result<u8, Fail>;

/// Accepts `100000000`, `100_000_000` and `1e8`.
fn parse_budget(s: &str) -> Result<u64, String> {
    let t = s.trim().replace('_', "");
    let n = match t.split_once(['e', 'E']) {
        Some((m, e)) => {
            let (m, e): (u64, u32) = (m.parse().map_err(|_| "bad budget")?, e.parse().map_err(|_| "bad budget")?);
            10u64.checked_pow(e).and_then(|p| p.checked_mul(m)).ok_or("budget too large")?
        }
        None => t.parse().map_err(|_| format!("budget {s:?} is not a node count"))?,
    };
    if n == 0 {
        return Err("budget must be at least 1".into());
    }
    Ok(n)
}

fn budget(flag: Option<u64>) -> Result<u64, Fail> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var("PERMLAB_BUDGET") {
        Ok(s) => parse_budget(&s).map_err(|e| Fail(format!("PERMLAB_BUDGET: {e}"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Fail> {
    let text = fs::read_to_string(path).map_err(|e| Fail(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Fail(format!("{}: {e}", path.display())))
}

fn print_json(v: &impl serde::Serialize) -> Result<(), Fail> {
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn construct(a: ConstructArgs) -> Res {
    let need_n = || a.n.ok_or_else(|| Fail("this construction needs --n".into()));
    let need_elements = || a.elements.clone().ok_or_else(|| Fail("this construction needs --elements".into()));
    let ints = |v: Vec<i128>| v.into_iter().map(GroupElement::scalar).collect::<Vec<_>>();
    let built: Result<Construction, ConstructionError> = match a.recipe {
        Recipe::Zigzag => cons::zigzag_distances(&need_elements()?),
        Recipe::PrimeCircle => cons::prime_circle_distinct_distances(need_n()? as usize),
        Recipe::CircularDiffs => cons::circular_distinct_diffs(need_n()?),
        Recipe::ModDiffs => cons::mod_distinct_diffs(need_n()?),
        Recipe::Weighted => cons::weighted_sum_cycle(&GroupSpec::Integers, &ints(need_elements()?)).map(|(c, _)| c),
        Recipe::Triple => cons::triple_sum_cycle(&GroupSpec::Integers, &ints(need_elements()?)).map(|(c, _)| c),
        Recipe::Residues => cons::reduced_residue_cycle(need_n()?),
        Recipe::Repair => cons::repair_adjacent_sums(&need_elements()?),
        Recipe::Coprime => cons::coprime_circle_odd(need_n()?),
        Recipe::Squares => {
            let q = a.q.ok_or_else(|| Fail("thm1.6 needs --q".into()))?;
            let op = match a.op {
                OpArg::Sum => QrOp::Sum,
                OpArg::Diff => QrOp::Difference,
            };
            let target = match a.target {
                TargetArg::Square => QrClass::Squares,
                TargetArg::Nonsquare => QrClass::Nonsquares,
            };
            match cons::qr_cycle(q, op, target) {
                Ok(QrCycle::Found { construction, .. }) => Ok(construction),
                Ok(QrCycle::NotFound) => {
                    print_json(&json!({ "status": "not_found", "q": q, "op": op, "target": target }))?;
                    return Ok(NEGATIVE);
                }
                Err(e) => Err(e),
            }
        }
    };
    match built {
        Ok(c) => {
            print_json(&c.arrangement)?;
            Ok(HOLDS)
        }
        // outside the recipe's hypothesis (including the cases it rules out)
        Err(e) => Err(e.into()),
    }
}

fn check_cmd(a: CheckArgs) -> Res {
    let arr: Arrangement = read_json(&a.arrangement)?;
    let report = match (&a.conjecture, &a.constraint) {
        (Some(id), _) => {
            let (id, mut params) = resolve_alias(id)?;
            params.extend(parse_params(&a.params)?);
            check_against(id, &params, &arr)?
        }
        (None, Some(path)) => {
            let c: Constraint = read_json(path)?;
            check(&arr, &c)?
        }
        (None, None) => return Err(Fail("give --conjecture or --constraint".into())),
    };
    print_json(&report)?;
    Ok(if report.pass { HOLDS } else { NEGATIVE })
}

fn status_code(s: SearchStatus) -> u8 {
    match s {
        SearchStatus::Witness => HOLDS,
        SearchStatus::Exhausted => NEGATIVE,
        SearchStatus::BudgetExceeded => INCONCLUSIVE,
    }
}

fn search_cmd(a: SearchArgs) -> Res {
    let inst: Instance = read_json(&a.instance)?;
    let budget = budget(a.budget)?;
    if a.all_small && inst.ground.len() > MAX_BRUTE_GROUND {
        return Err(Fail(format!("--all-small needs a ground set of at most {MAX_BRUTE_GROUND} elements")));
    }
    let outcome = search(&inst, budget)?;
    if !a.all_small {
        print_json(&outcome)?;
        return Ok(status_code(outcome.status));
    }
    let brute = brute_force_enumerate(&inst)?;
    let agree = match outcome.status {
        SearchStatus::Witness => brute.exists(),
        SearchStatus::Exhausted => !brute.exists(),
        SearchStatus::BudgetExceeded => true,
    };
    print_json(&json!({ "search": outcome, "brute_force": brute, "agree": agree }))?;
    if !agree {
        eprintln!("search and brute force disagree");
        return Ok(NEGATIVE);
    }
    Ok(status_code(outcome.status))
}

fn verify(a: VerifyArgs) -> Res {
    let (id, fixed) = resolve_alias(&a.conjecture)?;
    let (from, to) = match (a.from, a.to, id.default_range(&a.family)) {
        (Some(f), Some(t), _) => (f, t),
        (f, t, Some((df, dt))) => (f.unwrap_or(df), t.unwrap_or(dt)),
        _ => return Err(Fail(format!("{id} needs --from and --to (range over {})", id.range_key()))),
    };
    let jobs = a.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let budget = budget(a.budget)?;
    let mut campaign = Campaign::new(id, from, to);
    campaign.fixed = fixed.clone();
    campaign.family = a.family.clone();
    campaign.seed = a.seed;
    let plan = campaign.plan()?;

    let (existing, mut writer) = match (&a.out, a.resume) {
        (Some(path), true) => {
            let (set, w) = RecordWriter::resume(path)?;
            (set, Some(w))
        }
        (Some(path), false) => (RecordSet::default(), Some(RecordWriter::create(path)?)),
        (None, _) => (RecordSet::default(), None),
    };
    // With records on stdout, the report moves to stderr.
    let mut report: Box<dyn Write> = match writer {
        Some(_) => Box::new(io::stdout()),
        None => Box::new(io::stderr()),
    };
    let done = existing.done(id);
    let fixed_note = if fixed.is_empty() { String::new() } else { format!(" fixed={}", serde_json::to_string(&fixed)?) };
    writeln!(report, "# permlab {} verify {id}{fixed_note}: {}", env!("CARGO_PKG_VERSION"), id.describe())?;
    writeln!(
        report,
        "# family={} seed={} {}: {from}..={to} budget={budget} jobs={jobs}",
        a.family,
        a.seed,
        id.range_key()
    )?;
    let already = plan.iter().filter(|p| done.contains(*p)).count();
    if existing.truncated {
        writeln!(report, "# dropped a partial final line; that instance runs again")?;
    }
    writeln!(report, "# {} instances planned, {already} already recorded, {} to run", plan.len(), plan.len() - already)?;

    let mut statuses: BTreeMap<String, usize> = BTreeMap::new();
    let mut verdicts: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut tally = |r: &VerificationRecord, report: &mut dyn Write| -> io::Result<()> {
        *statuses.entry(serde_json::to_value(r.status).unwrap().as_str().unwrap().to_string()).or_default() += 1;
        let v = verdict(r);
        *verdicts
            .entry(match v {
                Verdict::Conforming => "conforming",
                Verdict::Violation => "violation",
                Verdict::Inconclusive => "inconclusive",
            })
            .or_default() += 1;
        if v == Verdict::Violation {
            let params = serde_json::to_string(&r.params).unwrap();
            let status = serde_json::to_value(r.status).unwrap();
            writeln!(report, "!!! VIOLATION {} {params}: {} after {} nodes", r.conjecture, status.as_str().unwrap(), r.nodes)?;
        }
        Ok(())
    };
    let planned: std::collections::HashSet<_> = plan.iter().collect();
    for r in existing.records.iter().filter(|r| r.conjecture == id && planned.contains(&r.params)) {
        tally(r, &mut report)?;
    }
    let ran = verify_range(id, &plan, budget, jobs, &done, &mut |r| {
        tally(&r, &mut report)?;
        match writer.as_mut() {
            Some(w) => w.append(&r)?,
            None => {
                let mut out = io::stdout().lock();
                serde_json::to_writer(&mut out, &r).map_err(io::Error::other)?;
                writeln!(out)?;
            }
        }
        Ok(())
    })?;
    let count = |k| verdicts.get(k).copied().unwrap_or(0);
    writeln!(report, "# ran {ran} searches; statuses {}", serde_json::to_string(&statuses)?)?;
    writeln!(
        report,
        "# conforming {}, violations {}, inconclusive {}",
        count("conforming"),
        count("violation"),
        count("inconclusive")
    )?;
    Ok(if count("violation") > 0 {
        NEGATIVE
    } else if count("inconclusive") > 0 {
        INCONCLUSIVE
    } else {
        HOLDS
    })
}

fn fixtures(a: FixturesArgs) -> Res {
    let budget = budget(a.budget)?;
    let mut all_pass = true;
    for f in golden_fixtures() {
        let pass = f.passes()?;
        all_pass &= pass;
        print_json(&json!({ "kind": "golden", "name": f.name, "conjecture": f.conjecture, "params": f.params, "pass": pass }))?;
    }
    for c in counterexample_fixtures() {
        let o = search(&c.instance, budget)?;
        let pass = o.status == c.expected;
        all_pass &= pass;
        print_json(&json!({
            "kind": "impossibility",
            "name": c.name,
            "conjecture": c.conjecture,
            "expected": c.expected,
            "status": o.status,
            "nodes": o.nodes,
            "elapsed_ms": o.elapsed_ms,
            "pass": pass,
        }))?;
    }
    Ok(if all_pass { HOLDS } else { NEGATIVE })
}

fn list() -> Res {
    let mut out = io::stdout().lock();
    for id in ConjectureId::ALL {
        writeln!(out, "{id}\n    {}", id.describe())?;
        writeln!(out, "    range: {}; families: {}", id.range_key(), id.families().join(", "))?;
        let parts: Vec<String> =
            id.variants().into_iter().filter(|v| !v.is_empty()).map(|v| serde_json::to_string(&v).unwrap()).collect();
        if !parts.is_empty() {
            writeln!(out, "    parts: {}", parts.join(" "))?;
        }
    }
    Ok(HOLDS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { HOLDS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Construct(a) => construct(a),
        Command::Check(a) => check_cmd(a),
        Command::Search(a) => search_cmd(a),
        Command::Verify(a) => verify(a),
        Command::Fixtures(a) => fixtures(a),
        Command::List => list(),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Fail(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
    }
}
