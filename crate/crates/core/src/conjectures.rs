//! Registry of open arrangement problems as concrete search instances, the
//! instance families used to probe them, and the campaign runner that turns a
//! parameter range into verification records.
//!
//! Problems are addressed by their short ids (`"3.13"`, `"filz"`, ...).
//! Instance parameters are a flat map of integers, so a record's
//! `(conjecture, params)` pair fully determines the instance it describes.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{abelian_groups_upto, field_view, sylow2_cyclic, GroupElement, GroupSpec};
use crate::constraint::{Arrangement, Clause, Constraint, ConstraintError, Instance, Labeler, Shape};
use crate::constructions::{qr_cycle, QrClass, QrCycle, QrOp};
use crate::numtheory::{self, PredicateSpec};
use crate::search::{check, check_pairing, CheckReport, Violation, search, search_pairing, SearchStatus, MAX_GROUND, MAX_PAIRING};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Sets drawn per size (or per group) by the seeded random families.
pub const RANDOM_PER_CLASS: u64 = 20;
/// Largest set drawn by the random integer families.
pub const MAX_RANDOM_SET: i64 = 12;
/// Largest cyclic group whose subsets the default family enumerates.
pub const MAX_SUBSET_MODULUS: i64 = 16;
/// Largest group order for the full-group and random-subset families
/// (subsets are stored as 62-bit masks).
pub const MAX_GROUP_ORDER: i64 = 62;

#[derive(Debug, Error)]
pub enum ConjectureError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

type Result<T> = std::result::Result<T, ConjectureError>;

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConjectureError::Usage(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ConjectureId {
    DistancePathFromStart,
    DistanceCircleEndsAdjacent,
    DifferencePathInGroup,
    SumOrDifferenceCycleInGroup,
    WeightedSums,
    TripleSums,
    PrimitiveSums,
    ResiduePrimitiveSums,
    SquareShiftResidues,
    AffineProductPrimitive,
    CoprimeSums,
    SumsAndProducts,
    TwinPrimeSums,
    SophieGermainSums,
    HalfPrimeDistances,
    SquarePlusHalfPrime,
    SquarePlusQuarterPrime,
    ProductPrimes,
    PrimeCircle,
    SquareCircle,
}

impl ConjectureId {
    pub const ALL: [ConjectureId; 20] = [
        ConjectureId::DistancePathFromStart,
        ConjectureId::DistanceCircleEndsAdjacent,
        ConjectureId::DifferencePathInGroup,
        ConjectureId::SumOrDifferenceCycleInGroup,
        ConjectureId::WeightedSums,
        ConjectureId::TripleSums,
        ConjectureId::PrimitiveSums,
        ConjectureId::ResiduePrimitiveSums,
        ConjectureId::SquareShiftResidues,
        ConjectureId::AffineProductPrimitive,
        ConjectureId::CoprimeSums,
        ConjectureId::SumsAndProducts,
        ConjectureId::TwinPrimeSums,
        ConjectureId::SophieGermainSums,
        ConjectureId::HalfPrimeDistances,
        ConjectureId::SquarePlusHalfPrime,
        ConjectureId::SquarePlusQuarterPrime,
        ConjectureId::ProductPrimes,
        ConjectureId::PrimeCircle,
        ConjectureId::SquareCircle,
    ];

    pub fn as_str(self) -> &'static str {
        use ConjectureId::*;
        match self {
            DistancePathFromStart => "3.1",
            DistanceCircleEndsAdjacent => "3.2",
            DifferencePathInGroup => "3.3",
            SumOrDifferenceCycleInGroup => "3.4",
            WeightedSums => "3.5",
            TripleSums => "3.6",
            PrimitiveSums => "3.7",
            ResiduePrimitiveSums => "3.8",
            SquareShiftResidues => "3.9",
            AffineProductPrimitive => "3.10",
            CoprimeSums => "3.11",
            SumsAndProducts => "3.12",
            TwinPrimeSums => "3.13",
            SophieGermainSums => "3.14",
            HalfPrimeDistances => "3.15",
            SquarePlusHalfPrime => "3.16",
            SquarePlusQuarterPrime => "3.17",
            ProductPrimes => "3.18",
            PrimeCircle => "filz",
            SquareCircle => "thm1.6-range",
        }
    }

    pub fn describe(self) -> &'static str {
        use ConjectureId::*;
        match self {
            DistancePathFromStart => "path through a real set from a given start with distinct adjacent distances",
            DistanceCircleEndsAdjacent => {
                "if a circle with distinct adjacent distances exists, one exists with min and max adjacent"
            }
            DifferencePathInGroup => "path through a group subset from a given start with distinct differences",
            SumOrDifferenceCycleInGroup => "cycle through a group subset with distinct sums (part 1) or differences (part 2)",
            WeightedSums => "distinct a+2b around a cycle (part 1) or over a pairing (part 2)",
            TripleSums => "cycle with distinct sums of consecutive triples",
            PrimitiveSums => "adjacent sums are primitive: all of F_q (part 1), or 1..n mod p = 2n+1 (part 2)",
            ResiduePrimitiveSums => "circle of the quadratic residues mod p with primitive-root sums or differences",
            SquareShiftResidues => "circle of 1..n with i^2 +- j a residue (part 1) or primitive root (part 2) mod 2n+1",
            AffineProductPrimitive => "circle of F_q^* with every a0 + xy primitive",
            CoprimeSums => "0..n from 0 to n with sums coprime to (n-1)(n+1)",
            SumsAndProducts => "circle with distinct sums (part 1) or differences (part 2) and distinct products",
            TwinPrimeSums => "circle of 0..n with every sum k giving twin primes 6k-1, 6k+1",
            SophieGermainSums => "circle of 0..n with every sum of the form (p+1)/6, p a Sophie Germain prime",
            HalfPrimeDistances => "circle of 0..n with |x+-y| (part 1) or |x^2-y^2| (part 2) of the form (p-1)/2",
            SquarePlusHalfPrime => "circle of 0..n from 0 to 1 with x^2+y of the form (p-1)/2",
            SquarePlusQuarterPrime => "circle of 0..n with x^2+y of the form (p-1)/4 (part 1) or (p+1)/4 from 0 to 1 (part 2)",
            ProductPrimes => "circle of 1..n with xy-1 (form 1), 2xy-1 (form 2) or 2xy+1 (form 3) prime",
            PrimeCircle => "circle of 1..n, n even, with prime adjacent sums",
            SquareCircle => "circle of the squares of F_q with sums/differences distinct and all squares/nonsquares",
        }
    }

    /// The parameter `--from`/`--to` ranges over.
    pub fn range_key(self) -> &'static str {
        use ConjectureId::*;
        match self {
            DistancePathFromStart | DistanceCircleEndsAdjacent | SumsAndProducts => "n (set size)",
            DifferencePathInGroup | SumOrDifferenceCycleInGroup | WeightedSums | TripleSums => "m (group order)",
            PrimitiveSums => "q (part 1) or p (part 2)",
            ResiduePrimitiveSums | SquareShiftResidues => "p",
            AffineProductPrimitive | SquareCircle => "q",
            _ => "n",
        }
    }

    pub fn families(self) -> &'static [&'static str] {
        use ConjectureId::*;
        match self {
            DistancePathFromStart | DistanceCircleEndsAdjacent => &["default", "random"],
            SumsAndProducts => &["default", "random", "exceptional"],
            DifferencePathInGroup | SumOrDifferenceCycleInGroup | WeightedSums | TripleSums => {
                &["default", "full", "random"]
            }
            CoprimeSums => &["default", "guess"],
            SquareCircle => &["default", "prime-powers"],
            _ => &["default"],
        }
    }

    /// The range a family covers when none is given: only families that are
    /// finite by nature have one.
    pub fn default_range(self, family: &str) -> Option<(i64, i64)> {
        match (self, family) {
            (ConjectureId::SumsAndProducts, "exceptional") => Some((4, 6)),
            _ => None,
        }
    }

    /// Sub-statement selectors the plan expands over when not fixed.
    pub fn variants(self) -> Vec<InstanceParams> {
        use ConjectureId::*;
        let one = |k: &str, v: i64| params(&[(k, v)]);
        match self {
            SumOrDifferenceCycleInGroup | WeightedSums | SumsAndProducts | HalfPrimeDistances
            | SquarePlusQuarterPrime => vec![one("part", 1), one("part", 2)],
            PrimitiveSums => vec![one("part", 1), params(&[("part", 2), ("op", 0)]), params(&[("part", 2), ("op", 1)])],
            ResiduePrimitiveSums => vec![one("op", 0), one("op", 1)],
            SquareShiftResidues => [1, 2]
                .into_iter()
                .flat_map(|part| [0, 1].map(|op| params(&[("part", part), ("op", op)])))
                .collect(),
            ProductPrimes => (1..=3).map(|f| one("form", f)).collect(),
            SquareCircle => [0, 1]
                .into_iter()
                .flat_map(|op| [0, 1].map(|t| params(&[("op", op), ("target", t)])))
                .collect(),
            _ => vec![InstanceParams::new()],
        }
    }
}

impl fmt::Display for ConjectureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConjectureId {
    type Err = ConjectureError;

    fn from_str(s: &str) -> Result<Self> {
        ConjectureId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| ConjectureError::Usage(format!("unknown problem id {s:?}")))
    }
}

impl TryFrom<String> for ConjectureId {
    type Error = ConjectureError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ConjectureId> for String {
    fn from(id: ConjectureId) -> String {
        id.as_str().to_string()
    }
}

/// Resolves an id with optional part and operation suffixes, e.g. `"3.7"`,
/// `"3.7ii"`, `"3.7ii-sums"`, `"3.9i-minus"`, into the base id and the
/// parameters the suffixes fix.
pub fn resolve_alias(s: &str) -> Result<(ConjectureId, InstanceParams)> {
    if let Ok(id) = s.parse::<ConjectureId>() {
        return Ok((id, InstanceParams::new()));
    }
    let mut ids = ConjectureId::ALL.to_vec();
    ids.sort_by_key(|id| std::cmp::Reverse(id.as_str().len()));
    for id in ids {
        let Some(rest) = s.strip_prefix(id.as_str()) else { continue };
        let (part, op) = match rest.split_once('-') {
            Some((p, o)) => (p, Some(o)),
            None => (rest, None),
        };
        let mut fixed = InstanceParams::new();
        match part {
            "" => {}
            "i" => {
                fixed.insert("part".into(), 1);
            }
            "ii" => {
                fixed.insert("part".into(), 2);
            }
            _ => continue,
        }
        match op {
            None => {}
            Some("sums" | "plus") => {
                fixed.insert("op".into(), 0);
            }
            Some("diffs" | "minus") => {
                fixed.insert("op".into(), 1);
            }
            Some(_) => continue,
        }
        let usable = id.variants().iter().any(|v| fixed.iter().all(|(k, x)| v.get(k) == Some(x)));
        if !usable {
            return usage(format!("{s:?}: {id} has no such part or operation"));
        }
        return Ok((id, fixed));
    }
    usage(format!("unknown problem id {s:?}"))
}

/// Integer parameters of one instance, e.g. `{"n": 12}` or `{"part": 2, "p": 23, "op": 1}`.
pub type InstanceParams = BTreeMap<String, i64>;

pub fn params(pairs: &[(&str, i64)]) -> InstanceParams {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

/// Parses `key=value` strings into parameters.
pub fn parse_params<S: AsRef<str>>(items: &[S]) -> Result<InstanceParams> {
    let mut out = InstanceParams::new();
    for item in items {
        let item = item.as_ref();
        let Some((k, v)) = item.split_once('=') else {
            return usage(format!("parameter {item:?} is not of the form key=value"));
        };
        let v: i64 = v.trim().parse().map_err(|_| ConjectureError::Usage(format!("parameter {k} needs an integer value")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

struct Reader<'a> {
    id: ConjectureId,
    params: &'a InstanceParams,
}

impl Reader<'_> {
    fn allow(&self, keys: &[&str]) -> Result<()> {
        match self.params.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => usage(format!("{} takes no parameter {k:?} (allowed: {})", self.id, keys.join(", "))),
            None => Ok(()),
        }
    }

    fn get(&self, key: &str) -> Result<i64> {
        self.params
            .get(key)
            .copied()
            .ok_or_else(|| ConjectureError::Usage(format!("{} needs parameter {key:?}", self.id)))
    }

    fn opt(&self, key: &str) -> Option<i64> {
        self.params.get(key).copied()
    }

    fn choice(&self, key: &str, options: &[i64]) -> Result<i64> {
        let v = self.get(key)?;
        if !options.contains(&v) {
            return usage(format!("{}: {key} must be one of {options:?}", self.id));
        }
        Ok(v)
    }

    fn at_least(&self, key: &str, min: i64) -> Result<i64> {
        let v = self.get(key)?;
        if v < min {
            return usage(format!("{}: {key} must be at least {min}", self.id));
        }
        Ok(v)
    }
}

/// What running one instance means.
#[derive(Debug, Clone)]
pub enum Task {
    Search(Instance),
    /// `pinned` is searched only when `unpinned` has a witness; the claim is
    /// the implication.
    Conditional { unpinned: Instance, pinned: Instance },
    /// A bijection `sigma` of `set` with all `a + 2 sigma(a)` distinct.
    Pairing { group: GroupSpec, set: Vec<GroupElement> },
    /// The squares circle: the algebraic construction is tried first, the
    /// instance searched only if no generator qualifies.
    SquareCircle { q: u64, op: QrOp, target: QrClass, instance: Instance },
    /// The statement's hypothesis excludes these parameters.
    Skipped(String),
}

fn ints(xs: impl IntoIterator<Item = i128>) -> Vec<GroupElement> {
    xs.into_iter().map(GroupElement::scalar).collect()
}

fn prime_window(r: &Reader, key: &str) -> Result<(u64, i128)> {
    let p = r.get(key)?;
    if p < 3 || !numtheory::is_prime(p as u64) {
        return usage(format!("{}: {key} = {p} must be an odd prime", r.id));
    }
    Ok((p as u64, (p as i128 - 1) / 2))
}

fn field_q(r: &Reader, key: &str) -> Result<(u64, GroupSpec)> {
    let q = r.get(key)?;
    if q < 2 {
        return usage(format!("{}: {key} = {q} is not a prime power", r.id));
    }
    let g = GroupSpec::field_of_order(q as u64).map_err(|e| ConjectureError::Usage(e.to_string()))?;
    Ok((q as u64, g))
}

fn bits(mask: i64) -> impl Iterator<Item = u32> {
    (0..63).filter(move |b| mask >> b & 1 == 1)
}

/// Integer set: either a window `{lo + i : bit i of mask}` or a seeded draw
/// `{n, seed, index}`. The second value is the first element drawn.
fn integer_set(r: &Reader, radius: i128, nonzero: bool) -> Result<(Vec<i128>, i128)> {
    if let (Some(lo), Some(mask)) = (r.opt("lo"), r.opt("mask")) {
        if mask <= 0 || mask >= 1 << 62 {
            return usage(format!("{}: mask must be a positive 62-bit set", r.id));
        }
        let set: Vec<i128> = bits(mask).map(|b| lo as i128 + b as i128).collect();
        let first = set[0];
        return Ok((set, first));
    }
    let n = r.at_least("n", 1)?;
    if n > MAX_RANDOM_SET {
        return usage(format!("{}: random sets have at most {MAX_RANDOM_SET} elements", r.id));
    }
    let set = random_integer_set(r.get("seed")? as u64, n as usize, r.at_least("index", 0)? as u64, radius, nonzero);
    let first = set[0];
    Ok((set, first))
}

/// Distinct integers from `[-radius, radius]`, in draw order.
pub fn random_integer_set(seed: u64, n: usize, index: u64, radius: i128, nonzero: bool) -> Vec<i128> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((n as u64) << 32 | index);
    let mut out: Vec<i128> = Vec::with_capacity(n);
    while out.len() < n {
        let x = rng.gen_range(-radius..=radius);
        if (nonzero && x == 0) || out.contains(&x) {
            continue;
        }
        out.push(x);
    }
    out
}

/// Finite group `Z/m1 + Z/m2 + ...` and the subset selected by `mask` (bit
/// `i` is the element with mixed-radix index `i`).
fn group_subset(r: &Reader) -> Result<(GroupSpec, Vec<GroupElement>)> {
    let moduli: Vec<u64> = ["m1", "m2", "m3"]
        .iter()
        .map_while(|k| r.opt(k))
        .map(|m| if m >= 2 { Ok(m as u64) } else { usage(format!("{}: moduli must be at least 2", r.id)) })
        .collect::<Result<_>>()?;
    if moduli.is_empty() {
        return usage(format!("{} needs a group: m1 [m2 [m3]]", r.id));
    }
    let group = GroupSpec::CyclicProduct { moduli };
    let order = group.order().expect("finite") as i64;
    if order > MAX_GROUP_ORDER {
        return usage(format!("{}: groups of order above {MAX_GROUP_ORDER} are not supported", r.id));
    }
    let mask = r.get("mask")?;
    if mask <= 0 || mask >> order != 0 {
        return usage(format!("{}: mask must be a nonempty subset of the {order} group elements", r.id));
    }
    let set = bits(mask).map(|b| group.element_from_index(b as u64)).collect::<std::result::Result<_, _>>()
        .map_err(|e| ConjectureError::Usage(e.to_string()))?;
    Ok((group, set))
}

const GROUP_KEYS: [&str; 6] = ["m1", "m2", "m3", "mask", "seed", "index"];
const SET_KEYS: [&str; 5] = ["lo", "mask", "n", "seed", "index"];

fn keys<'a>(base: &[&'a str], extra: &[&'a str]) -> Vec<&'a str> {
    base.iter().chain(extra).copied().collect()
}

/// Builds the instance (or instances) that parameters describe.
pub fn instance(id: ConjectureId, p: &InstanceParams) -> Result<Task> {
    use ConjectureId::*;
    let r = Reader { id, params: p };
    let circ = |g: GroupSpec, ground: Vec<GroupElement>, c: Constraint| Task::Search(Instance::new(g, Shape::Circular, ground, c));
    let range_circle = |lo: i128, n: i64, c: Constraint| circ(GroupSpec::Integers, ints(lo..=n as i128), c);
    let zero_one = || (Some(GroupElement::scalar(0)), Some(GroupElement::scalar(1)));
    let task = match id {
        DistancePathFromStart => {
            r.allow(&keys(&SET_KEYS, &["first"]))?;
            let (set, drawn_first) = integer_set(&r, 50, false)?;
            let first = match r.opt("first") {
                Some(f) if set.contains(&(f as i128)) => f as i128,
                Some(f) => return usage(format!("{id}: first = {f} is not in the set")),
                None if r.opt("lo").is_some() => return usage(format!("{id}: window sets need a first element")),
                None => drawn_first,
            };
            let c = Constraint::single(Clause::RainbowDistance).with_pins(Some(GroupElement::scalar(first)), None);
            Task::Search(Instance::new(GroupSpec::Integers, Shape::Linear, ints(set), c))
        }
        DistanceCircleEndsAdjacent => {
            r.allow(&SET_KEYS)?;
            let (set, _) = integer_set(&r, 50, false)?;
            let (lo, hi) = (*set.iter().min().unwrap(), *set.iter().max().unwrap());
            let unpinned = Instance::new(
                GroupSpec::Integers,
                Shape::Circular,
                ints(set.clone()),
                Constraint::single(Clause::RainbowDistance),
            );
            let mut pinned = unpinned.clone();
            pinned.constraint = pinned.constraint.with_pins(Some(GroupElement::scalar(lo)), Some(GroupElement::scalar(hi)));
            Task::Conditional { unpinned, pinned }
        }
        DifferencePathInGroup => {
            r.allow(&GROUP_KEYS)?;
            let (g, set) = group_subset(&r)?;
            let zero = g.zero();
            if !set.contains(&zero) {
                return usage(format!("{id}: subsets are translated to start at 0 and must contain it"));
            }
            let (n, order) = (set.len() as u128, g.order().unwrap());
            let moduli = match &g {
                GroupSpec::CyclicProduct { moduli } => moduli.clone(),
                _ => unreachable!(),
            };
            if order % n == 0 && !(n % 2 == 0 && sylow2_cyclic(&moduli)) {
                Task::Skipped(format!("{n} divides |G| = {order} and the even-size Sylow condition fails"))
            } else {
                let c = Constraint::single(Clause::RainbowDiff).with_pins(Some(zero), None);
                Task::Search(Instance::new(g, Shape::Linear, set, c))
            }
        }
        SumOrDifferenceCycleInGroup => {
            r.allow(&keys(&GROUP_KEYS, &["part"]))?;
            let part = r.choice("part", &[1, 2])?;
            let (g, set) = group_subset(&r)?;
            let (n, order) = (set.len() as u128, g.order().unwrap());
            if n % 2 == 0 && order % n == 0 {
                Task::Skipped(format!("n = {n} is even and divides |G| = {order}"))
            } else if n == 2 {
                // x + y and y + x always coincide; the statement is vacuous.
                Task::Skipped("a two-element circle repeats its only sum".into())
            } else if part == 2 && !(3 < n && n < order) {
                Task::Skipped(format!("differences need 3 < n < |G|, got n = {n}, |G| = {order}"))
            } else {
                let clause = if part == 1 { Clause::RainbowSum } else { Clause::RainbowDiff };
                circ(g, set, Constraint::single(clause))
            }
        }
        WeightedSums => {
            r.allow(&keys(&GROUP_KEYS, &["part"]))?;
            let part = r.choice("part", &[1, 2])?;
            let (g, set) = group_subset(&r)?;
            let (n, order) = (set.len(), g.order().unwrap());
            if n <= 3 {
                Task::Skipped(format!("needs more than 3 elements, got {n}"))
            } else if part == 1 && order % 3 == 0 {
                Task::Skipped(format!("|G| = {order} is divisible by 3"))
            } else if part == 1 {
                circ(g, set, Constraint::single(Clause::RainbowWeighted))
            } else if n > MAX_PAIRING {
                return usage(format!("{id}: pairing search is limited to {MAX_PAIRING} elements"));
            } else {
                Task::Pairing { group: g, set }
            }
        }
        TripleSums => {
            r.allow(&GROUP_KEYS)?;
            let (g, set) = group_subset(&r)?;
            if set.len() <= 3 {
                Task::Skipped(format!("needs more than 3 elements, got {}", set.len()))
            } else {
                circ(g, set, Constraint::single(Clause::RainbowTriple))
            }
        }
        PrimitiveSums => {
            let part = r.choice("part", &[1, 2])?;
            if part == 1 {
                r.allow(&["part", "q"])?;
                let (q, g) = field_q(&r, "q")?;
                if q <= 7 {
                    Task::Skipped(format!("needs q > 7, got {q}"))
                } else {
                    let ground = g.elements().map_err(|e| ConjectureError::Usage(e.to_string()))?;
                    circ(g, ground, Constraint::predicate(PredicateSpec::PrimitiveElement, Labeler::Sum))
                }
            } else {
                r.allow(&["part", "op", "p"])?;
                let op = r.choice("op", &[0, 1])?;
                let (p, n) = prime_window(&r, "p")?;
                let floor = if op == 0 { 19 } else { 13 };
                if p <= floor {
                    Task::Skipped(format!("needs p > {floor}, got {p}"))
                } else {
                    let lab = if op == 0 { Labeler::Sum } else { Labeler::Diff };
                    range_circle(1, n as i64, Constraint::predicate(PredicateSpec::PrimitiveRootMod { p }, lab))
                }
            }
        }
        ResiduePrimitiveSums => {
            r.allow(&["op", "p"])?;
            let op = r.choice("op", &[0, 1])?;
            let (p, _) = prime_window(&r, "p")?;
            let floor = if op == 0 { 19 } else { 13 };
            if p <= floor {
                Task::Skipped(format!("needs p > {floor}, got {p}"))
            } else {
                let residues: Vec<i128> = (1..p as i128)
                    .filter(|&x| numtheory::is_quadratic_residue(x, p).unwrap_or(false))
                    .collect();
                let lab = if op == 0 { Labeler::Sum } else { Labeler::Diff };
                circ(GroupSpec::Integers, ints(residues), Constraint::predicate(PredicateSpec::PrimitiveRootMod { p }, lab))
            }
        }
        SquareShiftResidues => {
            r.allow(&["part", "op", "p"])?;
            let part = r.choice("part", &[1, 2])?;
            let op = r.choice("op", &[0, 1])?;
            let (p, n) = prime_window(&r, "p")?;
            let floor = if part == 1 { 11 } else { 13 };
            if p <= floor {
                Task::Skipped(format!("needs p > {floor}, got {p}"))
            } else {
                let pred =
                    if part == 1 { PredicateSpec::QuadraticResidueMod { p } } else { PredicateSpec::PrimitiveRootMod { p } };
                let lab = if op == 0 { Labeler::SquarePlus } else { Labeler::SquareMinus };
                range_circle(1, n as i64, Constraint::predicate(pred, lab))
            }
        }
        AffineProductPrimitive => {
            r.allow(&["q", "a0"])?;
            let (q, g) = field_q(&r, "q")?;
            let a0 = r.at_least("a0", 0)?;
            if a0 as u64 >= q {
                return usage(format!("{id}: a0 is a field index below q = {q}"));
            }
            if q <= 7 {
                Task::Skipped(format!("needs q > 7, got {q}"))
            } else {
                let a0 = g.element_from_index(a0 as u64).expect("index below q");
                let ground: Vec<GroupElement> = g
                    .elements()
                    .map_err(|e| ConjectureError::Usage(e.to_string()))?
                    .into_iter()
                    .filter(|x| *x != g.zero())
                    .collect();
                circ(g, ground, Constraint::predicate(PredicateSpec::PrimitiveElement, Labeler::AffineProduct { a0 }))
            }
        }
        CoprimeSums => {
            r.allow(&["n", "guess"])?;
            let n = r.at_least("n", 1)?;
            let guess = r.opt("guess").unwrap_or(0);
            if ![0, 1].contains(&guess) {
                return usage(format!("{id}: guess is 0 or 1"));
            }
            if n == 2 || n == 4 {
                Task::Skipped(format!("n = {n} is excluded"))
            } else {
                let k = if guess == 1 { 2 * n } else { n } as u64;
                let m = (k - 1) * (k + 1);
                let c = Constraint::predicate(PredicateSpec::CoprimeTo { m }, Labeler::Sum)
                    .with_pins(Some(GroupElement::scalar(0)), Some(GroupElement::scalar(n as i128)));
                range_circle(0, n, c)
            }
        }
        SumsAndProducts => {
            r.allow(&keys(&SET_KEYS, &["part", "exceptional"]))?;
            let part = r.choice("part", &[1, 2])?;
            let (set, _) = integer_set(&r, 30, true)?;
            if set.contains(&0) {
                return usage(format!("{id}: elements must be nonzero"));
            }
            let expect_none = r.opt("exceptional") == Some(1);
            let form = exceptional_form(&set, part);
            let n = set.len();
            let clause = if part == 1 { Clause::RainbowSum } else { Clause::RainbowDiff };
            let c = Constraint::new(vec![clause, Clause::RainbowProduct]);
            if expect_none && form.is_none() {
                return usage(format!("{id}: {set:?} is not of an exceptional form"));
            }
            if n <= part as usize + 1 {
                Task::Skipped(format!("needs more than {} elements, got {n}", part + 1))
            } else if let (Some(form), false) = (form, expect_none) {
                Task::Skipped(format!("exceptional form {form}"))
            } else {
                circ(GroupSpec::Integers, ints(set), c)
            }
        }
        TwinPrimeSums => {
            r.allow(&["n"])?;
            let n = r.at_least("n", 1)?;
            range_circle(0, n, Constraint::predicate(PredicateSpec::TwinIndex, Labeler::Sum))
        }
        SophieGermainSums => {
            r.allow(&["n"])?;
            let n = r.at_least("n", 1)?;
            if n <= 2 {
                Task::Skipped(format!("needs n > 2, got {n}"))
            } else {
                range_circle(0, n, Constraint::predicate(PredicateSpec::SophieGermainIndex, Labeler::Sum))
            }
        }
        HalfPrimeDistances => {
            r.allow(&["n", "part"])?;
            let part = r.choice("part", &[1, 2])?;
            let n = r.at_least("n", 1)?;
            let half = PredicateSpec::PrimeShift { a: 2, b: 1 };
            if part == 1 {
                range_circle(0, n, Constraint::predicate(half, Labeler::AbsDiffAndSum))
            } else if n == 2 || n == 4 {
                Task::Skipped(format!("n = {n} is excluded"))
            } else {
                range_circle(0, n, Constraint::predicate(half, Labeler::AbsSquareDiff))
            }
        }
        SquarePlusHalfPrime => {
            r.allow(&["n"])?;
            let n = r.at_least("n", 1)?;
            if n == 4 {
                Task::Skipped("n = 4 is excluded".into())
            } else {
                // Starting at 0 forces the circle to end at 1: a last element
                // divisible by 3 would force every element before it to be.
                let (f, l) = zero_one();
                let c = Constraint::predicate(PredicateSpec::PrimeShift { a: 2, b: 1 }, Labeler::SquarePlus).with_pins(f, l);
                range_circle(0, n, c)
            }
        }
        SquarePlusQuarterPrime => {
            r.allow(&["n", "part"])?;
            let part = r.choice("part", &[1, 2])?;
            let n = r.at_least("n", 1)?;
            if part == 1 {
                range_circle(0, n, Constraint::predicate(PredicateSpec::PrimeShift { a: 4, b: 1 }, Labeler::SquarePlus))
            } else {
                let (f, l) = zero_one();
                let c = Constraint::predicate(PredicateSpec::PrimeShift { a: 4, b: -1 }, Labeler::SquarePlus).with_pins(f, l);
                range_circle(0, n, c)
            }
        }
        ProductPrimes => {
            r.allow(&["n", "form"])?;
            let form = r.choice("form", &[1, 2, 3])?;
            let n = r.at_least("n", 1)?;
            let (excluded, lab) = match form {
                1 => (n <= 5 || n == 13, Labeler::ProductMinusOne),
                2 => (n <= 1, Labeler::TwoProductMinusOne),
                _ => (n == 4, Labeler::TwoProductPlusOne),
            };
            if excluded {
                Task::Skipped(format!("n = {n} is excluded for form {form}"))
            } else {
                range_circle(1, n, Constraint::predicate(PredicateSpec::PrimePredicate, lab))
            }
        }
        PrimeCircle => {
            r.allow(&["n"])?;
            let n = r.at_least("n", 1)?;
            if n % 2 == 1 {
                Task::Skipped(format!("n = {n} is odd"))
            } else {
                range_circle(1, n, Constraint::predicate(PredicateSpec::PrimePredicate, Labeler::Sum))
            }
        }
        SquareCircle => {
            r.allow(&["q", "op", "target"])?;
            let op = if r.choice("op", &[0, 1])? == 0 { QrOp::Sum } else { QrOp::Difference };
            let target = if r.choice("target", &[0, 1])? == 0 { QrClass::Squares } else { QrClass::Nonsquares };
            let (q, g) = field_q(&r, "q")?;
            if q % 2 == 0 {
                return usage(format!("{id}: q must be odd"));
            }
            if q <= 13 {
                Task::Skipped(format!("needs q > 13, got {q}"))
            } else {
                let (p, k) = numtheory::prime_power(q).expect("field order");
                let f = field_view(p, k).map_err(|e| ConjectureError::Usage(e.to_string()))?;
                let squares = f.squares.iter().map(|&i| f.element(i)).collect();
                let c = Constraint::new(vec![
                    op.rainbow(),
                    Clause::EdgePredicate { predicate: target.predicate(), labeler: op.labeler() },
                ]);
                Task::SquareCircle { q, op, target, instance: Instance::new(g, Shape::Circular, squares, c) }
            }
        }
    };
    if let Task::Search(inst) | Task::SquareCircle { instance: inst, .. } = &task {
        if inst.ground.len() > MAX_GROUND {
            return usage(format!("{id}: {} elements exceed the search limit of {MAX_GROUND}", inst.ground.len()));
        }
        inst.validate()?;
    }
    Ok(task)
}

/// Which exceptional shape (a), (b) or (c) a nonzero set has, if any:
/// `{+-s, +-t}`, `{r, +-s, +-t}` or `{+-r, +-s, +-t}`. Only (a) is exceptional
/// for the difference variant.
pub fn exceptional_form(set: &[i128], part: i64) -> Option<char> {
    let paired = set.iter().filter(|&&x| set.contains(&-x)).count();
    match (set.len(), paired) {
        (4, 4) => Some('a'),
        (5, 4) if part == 1 => Some('b'),
        (6, 6) if part == 1 => Some('c'),
        _ => None,
    }
}

/// Status of one verification record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RecordStatus {
    #[serde(rename = "witness")]
    Witness,
    #[serde(rename = "exhausted")]
    Exhausted,
    #[serde(rename = "budget")]
    Budget,
    #[serde(rename = "skipped-precondition")]
    SkippedPrecondition,
}

impl From<SearchStatus> for RecordStatus {
    fn from(s: SearchStatus) -> Self {
        match s {
            SearchStatus::Witness => RecordStatus::Witness,
            SearchStatus::Exhausted => RecordStatus::Exhausted,
            SearchStatus::BudgetExceeded => RecordStatus::Budget,
        }
    }
}

/// One line of a campaign's output. Self-contained: `instance(conjecture,
/// params)` rebuilds the instance and `recheck` re-validates the witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub conjecture: ConjectureId,
    pub params: InstanceParams,
    pub status: RecordStatus,
    /// The arrangement found (for pairings: the partner of each sorted element).
    pub witness: Option<Vec<GroupElement>>,
    pub nodes: u64,
    pub elapsed_ms: u64,
    pub tool_version: String,
}

impl VerificationRecord {
    pub fn key(&self) -> (ConjectureId, InstanceParams) {
        (self.conjecture, self.params.clone())
    }
}

/// How a record bears on its statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Conforming,
    Violation,
    Inconclusive,
}

/// Witnesses (and excluded parameters) conform; exhaustion is a violation,
/// except for instances flagged as expected to have no arrangement, where
/// the roles swap. Budget stops settle nothing.
pub fn verdict(record: &VerificationRecord) -> Verdict {
    let expect_none = record.params.get("exceptional") == Some(&1);
    match (record.status, expect_none) {
        (RecordStatus::Budget, _) => Verdict::Inconclusive,
        (RecordStatus::SkippedPrecondition, _) => Verdict::Conforming,
        (RecordStatus::Witness, false) | (RecordStatus::Exhausted, true) => Verdict::Conforming,
        _ => Verdict::Violation,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub status: RecordStatus,
    pub witness: Option<Vec<GroupElement>>,
    pub nodes: u64,
}

pub fn run_task(task: &Task, budget: u64) -> Result<Outcome> {
    let from_search = |o: crate::search::SearchOutcome| Outcome {
        status: o.status.into(),
        witness: o.witness.map(|a| a.elements),
        nodes: o.nodes,
    };
    Ok(match task {
        Task::Search(inst) => from_search(search(inst, budget)?),
        Task::Conditional { unpinned, pinned } => {
            let first = search(unpinned, budget)?;
            match first.status {
                SearchStatus::Witness => {
                    let second = search(pinned, budget)?;
                    Outcome { nodes: first.nodes + second.nodes, ..from_search(second) }
                }
                SearchStatus::Exhausted => Outcome { status: RecordStatus::SkippedPrecondition, witness: None, nodes: first.nodes },
                SearchStatus::BudgetExceeded => from_search(first),
            }
        }
        Task::Pairing { group, set } => {
            let o = search_pairing(group, set, budget)?;
            Outcome { status: o.status.into(), witness: o.partners, nodes: o.nodes }
        }
        Task::SquareCircle { q, op, target, instance } => {
            match qr_cycle(*q, *op, *target).map_err(|e| ConjectureError::Usage(e.to_string()))? {
                QrCycle::Found { construction, .. } => Outcome {
                    status: RecordStatus::Witness,
                    witness: Some(construction.arrangement.elements),
                    nodes: 0,
                },
                QrCycle::NotFound => from_search(search(instance, budget)?),
            }
        }
        Task::Skipped(_) => Outcome { status: RecordStatus::SkippedPrecondition, witness: None, nodes: 0 },
    })
}

fn same_elements(a: &[GroupElement], b: &[GroupElement]) -> bool {
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    a.sort();
    b.sort();
    a == b
}

fn passes(inst: &Instance, witness: &[GroupElement]) -> Result<bool> {
    if !same_elements(&inst.ground, witness) {
        return Ok(false);
    }
    let arr = Arrangement::new(inst.group.clone(), inst.shape, witness.to_vec());
    Ok(check(&arr, &inst.constraint)?.pass)
}

/// Independently re-validates a witness against the instance its
/// parameters describe.
pub fn recheck(id: ConjectureId, params: &InstanceParams, witness: &[GroupElement]) -> Result<bool> {
    match instance(id, params)? {
        Task::Search(inst) | Task::SquareCircle { instance: inst, .. } => passes(&inst, witness),
        Task::Conditional { pinned, .. } => passes(&pinned, witness),
        Task::Pairing { group, set } => Ok(check_pairing(&group, &set, witness)?),
        Task::Skipped(_) => Ok(false),
    }
}

/// Checks a full arrangement against the instance that parameters
/// describe: same group, shape and ground set, then the constraint. For
/// pairing instances the elements are the partners of the sorted set.
pub fn check_against(id: ConjectureId, params: &InstanceParams, arr: &Arrangement) -> Result<CheckReport> {
    let mismatch = |reason: &str| CheckReport {
        pass: false,
        violation: Some(Violation { clause: None, reason: reason.to_string(), positions: vec![] }),
    };
    let inst = match instance(id, params)? {
        Task::Search(inst) | Task::SquareCircle { instance: inst, .. } | Task::Conditional { pinned: inst, .. } => inst,
        Task::Pairing { group, set } => {
            if arr.group != group {
                return Ok(mismatch("arrangement is over a different group"));
            }
            let pass = check_pairing(&group, &set, &arr.elements)?;
            return Ok(if pass { CheckReport { pass, violation: None } } else { mismatch("partners do not form a valid pairing") });
        }
        Task::Skipped(why) => return usage(format!("{id} {params:?} is excluded by its hypothesis: {why}")),
    };
    if arr.group != inst.group {
        return Ok(mismatch("arrangement is over a different group"));
    }
    if arr.shape != inst.shape {
        return Ok(mismatch("arrangement has the wrong shape"));
    }
    if !same_elements(&inst.ground, &arr.elements) {
        return Ok(mismatch("elements are not the instance's ground set"));
    }
    Ok(check(arr, &inst.constraint)?)
}

/// Runs one instance into a record; any witness is re-checked first.
pub fn run_instance(id: ConjectureId, params: &InstanceParams, budget: u64) -> Result<VerificationRecord> {
    let started = Instant::now();
    let outcome = run_task(&instance(id, params)?, budget)?;
    if let Some(w) = &outcome.witness {
        assert!(recheck(id, params, w)?, "witness for {id} {params:?} failed its re-check");
    }
    Ok(VerificationRecord {
        conjecture: id,
        params: params.clone(),
        status: outcome.status,
        witness: outcome.witness,
        nodes: outcome.nodes,
        elapsed_ms: started.elapsed().as_millis() as u64,
        tool_version: TOOL_VERSION.to_string(),
    })
}

/// A range of one problem's instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Campaign {
    pub id: ConjectureId,
    /// Parameters fixed up front (e.g. a part selected through an alias).
    pub fixed: InstanceParams,
    pub from: i64,
    pub to: i64,
    pub family: String,
    pub seed: u64,
}

impl Campaign {
    pub fn new(id: ConjectureId, from: i64, to: i64) -> Self {
        Campaign { id, fixed: InstanceParams::new(), from, to, family: "default".into(), seed: 0 }
    }

    /// Every instance of the campaign, in a fixed order.
    pub fn plan(&self) -> Result<Vec<InstanceParams>> {
        use ConjectureId::*;
        let id = self.id;
        if self.from > self.to {
            return usage(format!("empty range {}..={}", self.from, self.to));
        }
        if !id.families().contains(&self.family.as_str()) {
            return usage(format!("{id} has no family {:?} (available: {})", self.family, id.families().join(", ")));
        }
        let variants: Vec<InstanceParams> = id
            .variants()
            .into_iter()
            .filter(|v| self.fixed.iter().all(|(k, x)| v.get(k) == Some(x)))
            .collect();
        if variants.is_empty() {
            return usage(format!("{id}: no part matches {:?}", self.fixed));
        }
        let range = self.from.max(1)..=self.to;
        let mut out = Vec::new();
        for v in variants {
            let with = |extra: &[(&str, i64)]| {
                let mut p = v.clone();
                p.extend(extra.iter().map(|&(k, x)| (k.to_string(), x)));
                p
            };
            let part = v.get("part").copied();
            match (id, self.family.as_str()) {
                (DistancePathFromStart | DistanceCircleEndsAdjacent | SumsAndProducts, "random") => {
                    if self.to > MAX_RANDOM_SET {
                        return usage(format!("random sets have at most {MAX_RANDOM_SET} elements"));
                    }
                    for n in range.clone() {
                        for index in 0..RANDOM_PER_CLASS as i64 {
                            out.push(with(&[("n", n), ("seed", self.seed as i64), ("index", index)]));
                        }
                    }
                }
                (DistancePathFromStart, _) => {
                    // Distances are translation invariant: start at 0 inside [-4, 4].
                    for mask in window_masks(9, range.clone()).filter(|m| m >> 4 & 1 == 1) {
                        out.push(with(&[("lo", -4), ("mask", mask), ("first", 0)]));
                    }
                }
                (DistanceCircleEndsAdjacent, _) => {
                    for mask in window_masks(9, range.clone()).filter(|m| m & 1 == 1) {
                        out.push(with(&[("lo", 1), ("mask", mask)]));
                    }
                }
                (SumsAndProducts, "exceptional") => {
                    for mask in window_masks(11, range.clone()).filter(|m| m >> 5 & 1 == 0) {
                        let set: Vec<i128> = bits(mask).map(|b| b as i128 - 5).collect();
                        if exceptional_form(&set, part.unwrap()).is_some() {
                            out.push(with(&[("lo", -5), ("mask", mask), ("exceptional", 1)]));
                        }
                    }
                }
                (SumsAndProducts, _) => {
                    for mask in window_masks(9, range.clone()).filter(|m| m >> 4 & 1 == 0) {
                        out.push(with(&[("lo", -4), ("mask", mask)]));
                    }
                }
                (DifferencePathInGroup | SumOrDifferenceCycleInGroup | WeightedSums | TripleSums, family) => {
                    let pairing = id == WeightedSums && part == Some(2);
                    let size_ok = |mask: i64| !pairing || mask.count_ones() as usize <= MAX_PAIRING;
                    match family {
                        "full" | "random" => {
                            if self.to > MAX_GROUP_ORDER {
                                return usage(format!("group families stop at order {MAX_GROUP_ORDER}"));
                            }
                            for factors in abelian_groups_upto(self.to as u64) {
                                let order: u64 = factors.iter().product();
                                if (order as i64) < self.from || factors.len() > 3 {
                                    continue;
                                }
                                let mut g: Vec<(&str, i64)> =
                                    ["m1", "m2", "m3"].iter().copied().zip(factors.iter().map(|&m| m as i64)).collect();
                                if family == "full" {
                                    let mask = (1i64 << order) - 1;
                                    if size_ok(mask) {
                                        g.push(("mask", mask));
                                        out.push(with(&g));
                                    }
                                    continue;
                                }
                                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                                rng.set_stream(order << 16 | factors.len() as u64);
                                for index in 0..RANDOM_PER_CLASS as i64 {
                                    let mask = loop {
                                        // Translation invariance: every subset contains 0.
                                        let m = (rng.gen::<u64>() & ((1u64 << order) - 1)) as i64 | 1;
                                        if size_ok(m) {
                                            break m;
                                        }
                                    };
                                    let mut p = g.clone();
                                    p.extend([("mask", mask), ("seed", self.seed as i64), ("index", index)]);
                                    out.push(with(&p));
                                }
                            }
                        }
                        _ => {
                            if self.to > MAX_SUBSET_MODULUS {
                                return usage(format!("subset enumeration stops at Z/{MAX_SUBSET_MODULUS}"));
                            }
                            for m in range.clone().filter(|&m| m >= 2) {
                                // Translation invariance: every subset contains 0.
                                for mask in (1..1i64 << m).step_by(2).filter(|&k| size_ok(k)) {
                                    out.push(with(&[("m1", m), ("mask", mask)]));
                                }
                            }
                        }
                    }
                }
                (PrimitiveSums, _) if part == Some(1) => {
                    out.extend(range.clone().filter(|&q| numtheory::prime_power(q as u64).is_some()).map(|q| with(&[("q", q)])));
                }
                (PrimitiveSums | ResiduePrimitiveSums | SquareShiftResidues, _) => {
                    out.extend(range.clone().filter(|&p| p > 2 && numtheory::is_prime(p as u64)).map(|p| with(&[("p", p)])));
                }
                (AffineProductPrimitive, _) => {
                    for q in range.clone().filter(|&q| numtheory::prime_power(q as u64).is_some()) {
                        out.extend((0..q).map(|a0| with(&[("q", q), ("a0", a0)])));
                    }
                }
                (SquareCircle, family) => {
                    let admit = |q: u64| match family {
                        "prime-powers" => numtheory::prime_power(q).is_some(),
                        _ => numtheory::is_prime(q),
                    };
                    out.extend(range.clone().filter(|&q| q % 2 == 1 && admit(q as u64)).map(|q| with(&[("q", q)])));
                }
                (CoprimeSums, "guess") => out.extend(range.clone().map(|n| with(&[("n", n), ("guess", 1)]))),
                _ => out.extend(range.clone().map(|n| with(&[("n", n)]))),
            }
        }
        Ok(out)
    }
}

/// Masks over `width` bits whose popcount lies in `sizes`, ascending.
fn window_masks(width: u32, sizes: std::ops::RangeInclusive<i64>) -> impl Iterator<Item = i64> {
    (1..1i64 << width).filter(move |m| sizes.contains(&(m.count_ones() as i64)))
}

/// Runs every planned instance whose key is not in `done`, handing records
/// to `sink` in plan order. With the `parallel` feature and `jobs > 1` the
/// instances run on a worker pool while the calling thread, the only one
/// touching `sink`, reorders completions. Returns the number of instances
/// run.
pub fn verify_range(
    id: ConjectureId,
    plan: &[InstanceParams],
    budget: u64,
    jobs: usize,
    done: &HashSet<InstanceParams>,
    sink: &mut dyn FnMut(VerificationRecord) -> Result<()>,
) -> Result<usize> {
    if jobs == 0 {
        return usage("jobs must be at least 1");
    }
    let todo: Vec<&InstanceParams> = plan.iter().filter(|p| !done.contains(*p)).collect();
    dispatch(id, &todo, budget, jobs, sink)?;
    Ok(todo.len())
}

#[cfg(not(feature = "parallel"))]
fn dispatch(
    id: ConjectureId,
    todo: &[&InstanceParams],
    budget: u64,
    _jobs: usize,
    sink: &mut dyn FnMut(VerificationRecord) -> Result<()>,
) -> Result<()> {
    sequential(id, todo, budget, sink)
}

fn sequential(
    id: ConjectureId,
    todo: &[&InstanceParams],
    budget: u64,
    sink: &mut dyn FnMut(VerificationRecord) -> Result<()>,
) -> Result<()> {
    for p in todo {
        sink(run_instance(id, p, budget)?)?;
    }
    Ok(())
}

#[cfg(feature = "parallel")]
fn dispatch(
    id: ConjectureId,
    todo: &[&InstanceParams],
    budget: u64,
    jobs: usize,
    sink: &mut dyn FnMut(VerificationRecord) -> Result<()>,
) -> Result<()> {
    use rayon::prelude::*;
    use std::sync::atomic::{AtomicBool, Ordering};

    if jobs == 1 || todo.len() <= 1 {
        return sequential(id, todo, budget, sink);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| ConjectureError::Usage(format!("cannot start {jobs} workers: {e}")))?;
    let cancel = AtomicBool::new(false);
    let (tx, rx) = std::sync::mpsc::channel::<(usize, Result<VerificationRecord>)>();
    std::thread::scope(|s| {
        let (pool, cancel) = (&pool, &cancel);
        s.spawn(move || {
            pool.install(|| {
                todo.par_iter().enumerate().for_each_with(tx, |tx, (i, p)| {
                    if !cancel.load(Ordering::Relaxed) {
                        // The receiver only disappears after cancelling.
                        let _ = tx.send((i, run_instance(id, p, budget)));
                    }
                })
            })
        });
        let mut pending = BTreeMap::new();
        let mut next = 0;
        let mut result = Ok(());
        for (i, r) in rx {
            pending.insert(i, r);
            while let Some(r) = pending.remove(&next) {
                next += 1;
                if result.is_ok() {
                    result = r.and_then(&mut *sink);
                    if result.is_err() {
                        cancel.store(true, Ordering::Relaxed);
                    }
                }
            }
        }
        result
    })
}

/// A paper-printed arrangement and the instance it solves.
#[derive(Debug, Clone)]
pub struct GoldenFixture {
    pub name: &'static str,
    pub conjecture: ConjectureId,
    pub params: InstanceParams,
    pub instance: Instance,
    pub arrangement: Arrangement,
}

impl GoldenFixture {
    pub fn passes(&self) -> Result<bool> {
        passes(&self.instance, &self.arrangement.elements)
    }
}

fn search_instance(id: ConjectureId, p: &InstanceParams, pinned: bool) -> Instance {
    match instance(id, p).expect("fixture parameters are valid") {
        Task::Search(i) | Task::SquareCircle { instance: i, .. } => i,
        Task::Conditional { unpinned, pinned: pin } => {
            if pinned {
                pin
            } else {
                unpinned
            }
        }
        other => panic!("fixture {id} {p:?} is not a search: {other:?}"),
    }
}

/// The explicit arrangements printed alongside the statements.
pub fn golden_fixtures() -> Vec<GoldenFixture> {
    use ConjectureId::*;
    let mk = |name, id, p: InstanceParams, pinned: bool, xs: &[i128]| {
        let instance = search_instance(id, &p, pinned);
        let elements = match &instance.group {
            GroupSpec::Integers => ints(xs.iter().copied()),
            g => xs.iter().map(|&x| g.element_from_index(x as u64).expect("fixture element")).collect(),
        };
        let arrangement = Arrangement::new(instance.group.clone(), instance.shape, elements);
        GoldenFixture { name, conjecture: id, params: p, instance, arrangement }
    };
    // {11, 13, 17, 19, 23, 29} as a window starting at 11.
    let six_primes = (1 << 0) | (1 << 2) | (1 << 6) | (1 << 8) | (1 << 12) | (1 << 18);
    vec![
        mk("primitive-sums-f11", PrimitiveSums, params(&[("part", 1), ("q", 11)]), false, &[0, 6, 7, 1, 5, 3, 10, 8, 9, 4, 2]),
        mk(
            "square-plus-primitive-p23",
            SquareShiftResidues,
            params(&[("part", 2), ("op", 0), ("p", 23)]),
            false,
            &[1, 6, 7, 11, 4, 5, 3, 8, 10, 9, 2],
        ),
        mk(
            "square-minus-primitive-p23",
            SquareShiftResidues,
            params(&[("part", 2), ("op", 1), ("p", 23)]),
            false,
            &[1, 9, 7, 5, 11, 10, 3, 2, 6, 8, 4],
        ),
        mk(
            "product-minus-one-primitive-f11",
            AffineProductPrimitive,
            params(&[("q", 11), ("a0", 10)]),
            false,
            &[1, 9, 2, 4, 5, 8, 10, 3, 6, 7],
        ),
        mk("half-prime-distances-n9", HalfPrimeDistances, params(&[("part", 1), ("n", 9)]), false, &[0, 1, 2, 3, 5, 4, 7, 8, 6, 9]),
        mk("half-prime-square-distances-n5", HalfPrimeDistances, params(&[("part", 2), ("n", 5)]), false, &[0, 1, 4, 5, 2, 3]),
        mk(
            "square-plus-half-prime-n20",
            SquarePlusHalfPrime,
            params(&[("n", 20)]),
            false,
            &[0, 3, 12, 9, 15, 18, 6, 20, 19, 14, 13, 4, 2, 7, 16, 17, 11, 10, 5, 8, 1],
        ),
        mk(
            "square-plus-quarter-prime-n9",
            SquarePlusQuarterPrime,
            params(&[("part", 1), ("n", 9)]),
            false,
            &[0, 1, 2, 3, 4, 6, 9, 7, 8, 5],
        ),
        mk(
            "square-plus-quarter-prime-pinned-n9",
            SquarePlusQuarterPrime,
            params(&[("part", 2), ("n", 9)]),
            false,
            &[0, 3, 6, 9, 2, 4, 5, 8, 7, 1],
        ),
        mk(
            "product-minus-one-prime-n23",
            ProductPrimes,
            params(&[("form", 1), ("n", 23)]),
            false,
            &[1, 6, 23, 10, 9, 22, 11, 18, 13, 14, 21, 2, 15, 4, 17, 16, 5, 12, 7, 20, 19, 8, 3],
        ),
        mk(
            "six-primes-distances",
            DistanceCircleEndsAdjacent,
            params(&[("lo", 11), ("mask", six_primes)]),
            false,
            &[11, 13, 29, 17, 23, 19],
        ),
        mk(
            "six-primes-distances-ends-adjacent",
            DistanceCircleEndsAdjacent,
            params(&[("lo", 11), ("mask", six_primes)]),
            true,
            &[11, 19, 17, 13, 23, 29],
        ),
    ]
}

/// An instance whose outcome the text states outright.
#[derive(Debug, Clone)]
pub struct CounterexampleFixture {
    pub name: &'static str,
    pub conjecture: ConjectureId,
    pub instance: Instance,
    pub expected: SearchStatus,
}

/// The stated impossibilities, plus the companion instance needed to read
/// the coprime-to-90 claim against the coprime-sums statement.
pub fn counterexample_fixtures() -> Vec<CounterexampleFixture> {
    use ConjectureId::*;
    let klein = GroupSpec::CyclicProduct { moduli: vec![2, 2] };
    let z3z3 = GroupSpec::CyclicProduct { moduli: vec![3, 3] };
    let sum_prod = Constraint::new(vec![Clause::RainbowSum, Clause::RainbowProduct]);
    let diff_prod = Constraint::new(vec![Clause::RainbowDiff, Clause::RainbowProduct]);
    let ex = |name, conjecture, instance, expected| CounterexampleFixture { name, conjecture, instance, expected };
    use SearchStatus::{Exhausted, Witness};
    vec![
        ex(
            "klein-four-differences",
            DifferencePathInGroup,
            Instance::new(
                klein.clone(),
                Shape::Linear,
                klein.elements().unwrap(),
                Constraint::single(Clause::RainbowDiff).with_pins(Some(klein.zero()), None),
            ),
            Exhausted,
        ),
        ex(
            "klein-four-differences-unpinned",
            DifferencePathInGroup,
            Instance::new(klein.clone(), Shape::Linear, klein.elements().unwrap(), Constraint::single(Clause::RainbowDiff)),
            Exhausted,
        ),
        ex("sums-products-two-pairs", SumsAndProducts, Instance::integers(Shape::Circular, [1, -1, 2, -2], sum_prod.clone()), Exhausted),
        ex(
            "sums-products-two-pairs-and-one",
            SumsAndProducts,
            Instance::integers(Shape::Circular, [3, 1, -1, 2, -2], sum_prod.clone()),
            Exhausted,
        ),
        ex(
            "sums-products-three-pairs",
            SumsAndProducts,
            Instance::integers(Shape::Circular, [1, -1, 2, -2, 3, -3], sum_prod),
            Exhausted,
        ),
        ex("differences-products-two-pairs", SumsAndProducts, Instance::integers(Shape::Circular, [1, -1, 2, -2], diff_prod), Exhausted),
        ex(
            "zero-to-seven-coprime-to-90",
            CoprimeSums,
            Instance::integers(Shape::Circular, 0..=7, Constraint::predicate(PredicateSpec::CoprimeTo { m: 90 }, Labeler::Sum)),
            Exhausted,
        ),
        ex(
            "zero-to-seven-coprime-to-6-and-8",
            CoprimeSums,
            search_instance(CoprimeSums, &params(&[("n", 7)]), false),
            Witness,
        ),
        ex(
            "weighted-sums-z3-squared",
            WeightedSums,
            Instance::new(z3z3.clone(), Shape::Circular, z3z3.elements().unwrap(), Constraint::single(Clause::RainbowWeighted)),
            Exhausted,
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in ConjectureId::ALL {
            assert_eq!(id.as_str().parse::<ConjectureId>().unwrap(), id);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(serde_json::from_str::<ConjectureId>(&json).unwrap(), id);
        }
        assert!("3.19".parse::<ConjectureId>().is_err());
    }

    #[test]
    fn aliases() {
        let (id, p) = resolve_alias("3.7ii-sums").unwrap();
        assert_eq!((id, p), (ConjectureId::PrimitiveSums, params(&[("part", 2), ("op", 0)])));
        let (id, p) = resolve_alias("3.11").unwrap();
        assert_eq!((id, p.len()), (ConjectureId::CoprimeSums, 0));
        assert_eq!(resolve_alias("3.9i-minus").unwrap().1, params(&[("part", 1), ("op", 1)]));
        assert!(resolve_alias("3.1ii").is_err());
        assert!(resolve_alias("3.13-sums").is_err());
        assert!(resolve_alias("nope").is_err());
    }

    #[test]
    fn schema_is_enforced() {
        let id = ConjectureId::TwinPrimeSums;
        assert!(instance(id, &params(&[("n", 3), ("p", 5)])).is_err());
        assert!(instance(id, &params(&[])).is_err());
        assert!(instance(ConjectureId::PrimitiveSums, &params(&[("part", 2), ("op", 0), ("p", 21)])).is_err());
        assert!(matches!(
            instance(ConjectureId::PrimitiveSums, &params(&[("part", 2), ("op", 0), ("p", 19)])).unwrap(),
            Task::Skipped(_)
        ));
    }

    #[test]
    fn twin_sums_n1() {
        let rec = run_instance(ConjectureId::TwinPrimeSums, &params(&[("n", 1)]), 1000).unwrap();
        assert_eq!(rec.status, RecordStatus::Witness);
        assert_eq!(rec.witness.unwrap(), ints([0, 1]));
    }

    #[test]
    fn exceptional_shapes() {
        assert_eq!(exceptional_form(&[1, -1, 2, -2], 1), Some('a'));
        assert_eq!(exceptional_form(&[3, 1, -1, 2, -2], 1), Some('b'));
        assert_eq!(exceptional_form(&[3, 1, -1, 2, -2], 2), None);
        assert_eq!(exceptional_form(&[1, -1, 2, -2, 3, -3], 1), Some('c'));
        assert_eq!(exceptional_form(&[1, 2, 3, 4], 1), None);
    }

    #[test]
    fn sylow_condition_skips() {
        let klein_full = params(&[("m1", 2), ("m2", 2), ("mask", 15)]);
        assert!(matches!(instance(ConjectureId::DifferencePathInGroup, &klein_full).unwrap(), Task::Skipped(_)));
        let z4_full = params(&[("m1", 4), ("mask", 15)]);
        assert!(matches!(instance(ConjectureId::DifferencePathInGroup, &z4_full).unwrap(), Task::Search(_)));
    }

    #[test]
    fn plans_are_deterministic() {
        let mut c = Campaign::new(ConjectureId::TripleSums, 4, 9);
        c.family = "random".into();
        c.seed = 7;
        assert_eq!(c.plan().unwrap(), c.plan().unwrap());
        c.family = "bogus".into();
        assert!(c.plan().is_err());
    }
}
