//! Search-free permutation constructions. Each one re-checks its output with
//! the independent checker and panics if the check fails: a failing
//! postcondition is a transcription bug, never a recoverable condition.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{field_view, GroupElement, GroupSpec, Structure, ELEMENT_BOUND};
use crate::constraint::{Arrangement, Clause, Constraint, Labeler, Shape};
use crate::numtheory::{self, PredicateSpec};
use crate::search::check;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("domain error: {0}")]
    Domain(String),
}

type Result<T> = std::result::Result<T, ConstructionError>;

/// A constructed arrangement together with the constraint it was verified
/// against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Construction {
    pub arrangement: Arrangement,
    pub constraint: Constraint,
}

fn verified(arrangement: Arrangement, constraint: Constraint) -> Construction {
    let report = check(&arrangement, &constraint).unwrap_or_else(|e| panic!("checker rejected {arrangement}: {e}"));
    assert!(
        report.pass,
        "construction postcondition failed for {arrangement} under {constraint:?}: {:?}",
        report.violation
    );
    Construction { arrangement, constraint }
}

fn sorted_distinct(values: &[i128]) -> Result<Vec<i128>> {
    let mut v = values.to_vec();
    v.sort_unstable();
    if v.windows(2).any(|w| w[0] == w[1]) {
        return Err(ConstructionError::Usage("input values must be distinct".into()));
    }
    if v.iter().any(|x| x.abs() > ELEMENT_BOUND) {
        return Err(ConstructionError::Usage("input values must lie within +-2^40".into()));
    }
    Ok(v)
}

/// `(a_1, a_n, a_2, a_{n-1}, ...)` of the sorted input: a linear order whose
/// adjacent distances strictly decrease.
pub fn zigzag_distances(values: &[i128]) -> Result<Construction> {
    if values.is_empty() {
        return Err(ConstructionError::Usage("need at least one value".into()));
    }
    let a = sorted_distinct(values)?;
    let out = zigzag(&a);
    let dists: Vec<i128> = out.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    assert!(dists.windows(2).all(|w| w[0] > w[1]), "zigzag distances not decreasing for {a:?}");
    Ok(verified(Arrangement::integers(Shape::Linear, &out), Constraint::single(Clause::RainbowDistance)))
}

fn zigzag(a: &[i128]) -> Vec<i128> {
    let (mut lo, mut hi) = (0, a.len());
    let mut out = Vec::with_capacity(a.len());
    while lo < hi {
        out.push(a[lo]);
        lo += 1;
        if lo < hi {
            hi -= 1;
            out.push(a[hi]);
        }
    }
    out
}

/// Circle of the first `n` primes starting at 2 and ending at `p_n` with
/// pairwise distinct adjacent distances: zigzag on `-p_n < ... < -p_2`, then
/// read back negated and put 2 in front. The two seam distances are odd, all
/// others even.
///
/// For `n = 2` the two distances of the circle `(2, 3)` coincide, so no such
/// circle exists; that case is a domain error.
pub fn prime_circle_distinct_distances(n: usize) -> Result<Construction> {
    if n == 0 {
        return Err(ConstructionError::Usage("n must be at least 1".into()));
    }
    if n == 2 {
        return Err(ConstructionError::Domain(
            "the circle (2, 3) has both distances equal to 1; n = 2 has no solution".into(),
        ));
    }
    let primes = numtheory::first_primes(n);
    let mut q = vec![2i128];
    if n > 1 {
        let neg: Vec<i128> = primes[1..].iter().rev().map(|&p| -(p as i128)).collect();
        q.extend(zigzag(&neg).into_iter().rev().map(|x| -x));
    }
    debug_assert_eq!(*q.last().unwrap(), primes[n - 1] as i128);
    Ok(verified(Arrangement::integers(Shape::Circular, &q), Constraint::single(Clause::RainbowDistance)))
}

/// Circle `(i_0, ..., i_n)` of `0..=n` with `i_0 = 0`, `i_n = n` and all
/// `n + 1` signed adjacent differences distinct, for `n > 3`.
pub fn circular_distinct_diffs(n: u64) -> Result<Construction> {
    if n <= 3 {
        return Err(ConstructionError::Domain(format!("need n > 3, got {n}")));
    }
    let n = n as i128;
    let k = n / 2;
    let mut s = vec![0i128];
    match (n % 2, k % 2) {
        (0, 0) => {
            for j in 1..k {
                s.extend([2 * k - j, j]);
            }
            s.push(k);
        }
        (0, _) => {
            for j in 1..k {
                s.extend([j, 2 * k - j]);
            }
            s.push(k);
        }
        (_, 0) => {
            for j in 1..=k {
                s.extend([2 * k + 1 - j, j]);
            }
        }
        _ => {
            s.extend([k, k + 2, k + 1]);
            for j in 1..k {
                s.extend([k - j, k + 2 + j]);
            }
        }
    }
    if n % 2 == 0 || k % 2 == 0 {
        s.push(n);
    }
    let pins = (Some(GroupElement::scalar(0)), Some(GroupElement::scalar(n)));
    Ok(verified(
        Arrangement::integers(Shape::Circular, &s),
        Constraint::single(Clause::RainbowDiff).with_pins(pins.0, pins.1),
    ))
}

/// Linear order of `1..=n` whose adjacent differences are distinct modulo
/// `n`. The arrangement lives in `Z/n`, so `n` itself appears as 0.
pub fn mod_distinct_diffs(n: u64) -> Result<Construction> {
    if n < 2 {
        return Err(ConstructionError::Usage(format!("need n >= 2, got {n}")));
    }
    if n % 2 == 1 {
        return Err(ConstructionError::Domain(format!(
            "n = {n} is odd: the differences would cover every nonzero residue in both directions, \
             forcing n | 2(i_1 - i_n), which implies that n is even"
        )));
    }
    let m = (n / 2) as i128;
    let mut s = vec![m];
    for j in 1..m {
        s.extend([m - j, m + j]);
    }
    s.push(2 * m);
    let g = GroupSpec::CyclicProduct { moduli: vec![n] };
    let els = s.iter().map(|&x| GroupElement::scalar(x % n as i128)).collect();
    Ok(verified(Arrangement::new(g, Shape::Linear, els), Constraint::single(Clause::RainbowDiff)))
}

fn ordered_input(group: &GroupSpec, values: &[GroupElement]) -> Result<Vec<GroupElement>> {
    if !group.is_ordered() {
        return Err(ConstructionError::Domain(format!("{group:?} has no compatible order")));
    }
    for x in values {
        group.validate_element(x).map_err(|e| ConstructionError::Usage(e.to_string()))?;
        if x.0.iter().any(|c| c.abs() > ELEMENT_BOUND) {
            return Err(ConstructionError::Usage("coordinates must lie within +-2^40".into()));
        }
    }
    let mut a = values.to_vec();
    a.sort();
    if a.windows(2).any(|w| w[0] == w[1]) {
        return Err(ConstructionError::Usage("input values must be distinct".into()));
    }
    if a.len() <= 3 {
        return Err(ConstructionError::Domain(format!("need more than 3 elements, got {}", a.len())));
    }
    Ok(a)
}

/// 1-indexed sequence access, matching the proofs' notation.
struct Seq<'a> {
    st: &'a Structure,
    a: &'a [GroupElement],
}

impl Seq<'_> {
    fn n(&self) -> usize {
        self.a.len()
    }
    fn at(&self, i: usize) -> &GroupElement {
        &self.a[i - 1]
    }
    fn w(&self, i: usize, j: usize) -> GroupElement {
        self.st.add(self.at(i), &self.st.add(self.at(j), self.at(j)))
    }
    fn t(&self, i: usize, j: usize, k: usize) -> GroupElement {
        self.st.add(&self.st.add(self.at(i), self.at(j)), self.at(k))
    }
    fn gap(&self, i: usize) -> GroupElement {
        self.st.sub(self.at(i + 1), self.at(i))
    }
    /// `a_i, ..., a_{i+len-1}` is an arithmetic progression.
    fn progression(&self, i: usize, len: usize) -> bool {
        (i..i + len - 2).all(|k| self.gap(k) == self.gap(k + 1))
    }
}

fn identity(n: usize) -> Vec<usize> {
    (1..=n).collect()
}

/// Identity with `positions[start..]` overwritten by `indices` (1-indexed).
fn overwrite(n: usize, start: usize, indices: &[usize]) -> Vec<usize> {
    let mut p = identity(n);
    p[start - 1..start - 1 + indices.len()].copy_from_slice(indices);
    p
}

fn swap(n: usize, x: usize, y: usize) -> Vec<usize> {
    let mut p = identity(n);
    p.swap(x - 1, y - 1);
    p
}

fn apply(a: &[GroupElement], perm: &[usize]) -> Vec<GroupElement> {
    perm.iter().map(|&i| a[i - 1].clone()).collect()
}

/// Which branch of the weighted-sum argument produced the order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightedCase {
    /// `a_n + 2a_1` collides with no `a_i + 2a_{i+1}`.
    NoCollision,
    /// Collision at `i = 1`: swap the second and third elements.
    FirstPair,
    /// Collision at `i > 1` with four elements.
    FourElements,
    /// `a_{i-1}, a_i, a_{i+1}` not in progression: swap `a_i, a_{i+1}`.
    NonProgression,
    /// Three-term progression broken after `a_{i+1}`: swap `a_{i+1}, a_{i+2}`.
    ProgressionBreaks,
    /// Four-term progression from `a_{i-1}`: reverse `a_i..a_{i+2}`.
    FourTermProgression,
    /// `i = n-2`, progression broken before `a_{i-1}`: swap `a_{i-1}, a_i`.
    LateProgressionBreaks,
    /// `i = n-2`, four-term progression ending at `a_{i+1}`: reverse `a_{i-1}..a_{i+1}`.
    LateFourTermProgression,
}

/// Circular order with all `b_i + 2b_{i+1}` distinct, for more than three
/// distinct elements of `Z` or lexicographically ordered `Z^r`.
pub fn weighted_sum_cycle(group: &GroupSpec, values: &[GroupElement]) -> Result<(Construction, WeightedCase)> {
    let a = ordered_input(group, values)?;
    let st = Structure::new(group).map_err(|e| ConstructionError::Usage(e.to_string()))?;
    let s = Seq { st: &st, a: &a };
    let n = s.n();
    let wrap = s.st.add(s.at(n), &s.st.add(s.at(1), s.at(1)));
    let collision = (1..n).find(|&i| s.w(i, i + 1) == wrap);
    let (perm, case) = match collision {
        None => (identity(n), WeightedCase::NoCollision),
        Some(1) => (swap(n, 2, 3), WeightedCase::FirstPair),
        Some(_) if n == 4 => (vec![2, 1, 3, 4], WeightedCase::FourElements),
        Some(i) if !s.progression(i - 1, 3) => (swap(n, i, i + 1), WeightedCase::NonProgression),
        Some(i) if i < n - 2 => {
            if s.progression(i - 1, 4) {
                (overwrite(n, i, &[i + 2, i + 1, i]), WeightedCase::FourTermProgression)
            } else {
                (swap(n, i + 1, i + 2), WeightedCase::ProgressionBreaks)
            }
        }
        Some(i) => {
            debug_assert_eq!(i, n - 2);
            if s.progression(i - 2, 4) {
                (overwrite(n, i - 1, &[i + 1, i, i - 1]), WeightedCase::LateFourTermProgression)
            } else {
                (swap(n, i - 1, i), WeightedCase::LateProgressionBreaks)
            }
        }
    };
    let arr = Arrangement::new(group.clone(), Shape::Circular, apply(&a, &perm));
    Ok((verified(arr, Constraint::single(Clause::RainbowWeighted)), case))
}

/// Which branch of the triple-sum argument produced the order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TripleCase {
    FourElements,
    /// Neither wrap-around triple sum lies among the interior sums.
    NoCollision,
    Five,
    SixLow,
    SixHigh,
    SevenTop,
    SevenLow,
    SevenMiddleSplit,
    SevenMiddleJoint,
    /// One collision, early: swap `a_{i+1}, a_{i+2}`.
    SingleEarly,
    /// One collision near the end: swap `a_{i-2}, a_{i-1}`.
    SingleLate,
    /// One collision near the end with a second coincidence: rotate
    /// `a_{i-2}, a_{i-1}, a_i`.
    SingleLateRotated,
    /// Two collisions at least five apart: two independent swaps.
    DoubleWide,
    DoubleGapFour,
    DoubleGapThree,
    /// Collisions two apart with room on the left.
    DoubleGapTwoLeft,
    /// Collisions two apart with room on the right.
    DoubleGapTwoRight,
    EightSplit,
    EightJoint,
    NineSplit,
    NineJoint,
}

/// Branch plus the two reflections the argument may apply: `negated` when
/// the input was reflected so that the later wrap-around sum collides, and
/// `mirrored` for the eight-element collision pair handled by reflection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TripleTrace {
    pub case: TripleCase,
    pub negated: bool,
    pub mirrored: bool,
}

/// Circular order with all consecutive triple sums distinct, for more than
/// three distinct elements of `Z` or lexicographically ordered `Z^r`.
pub fn triple_sum_cycle(group: &GroupSpec, values: &[GroupElement]) -> Result<(Construction, TripleTrace)> {
    let a = ordered_input(group, values)?;
    let st = Structure::new(group).map_err(|e| ConstructionError::Usage(e.to_string()))?;
    let (perm, trace) = triple_perm(&st, &a, 0);
    let arr = Arrangement::new(group.clone(), Shape::Circular, apply(&a, &perm));
    Ok((verified(arr, Constraint::single(Clause::RainbowTriple)), trace))
}

/// `a'_k = -a_{n+1-k}`, again increasing.
fn reflect(st: &Structure, a: &[GroupElement]) -> Vec<GroupElement> {
    let zero = st.spec().zero();
    a.iter().rev().map(|x| st.sub(&zero, x)).collect()
}

/// A permutation of the reflected sequence, read back on the original: the
/// negated image of `b'_k = a'_{p_k}` is `a_{n+1-p_k}`.
fn unreflect(n: usize, perm: Vec<usize>) -> Vec<usize> {
    perm.into_iter().map(|p| n + 1 - p).collect()
}

fn interior_index(s: &Seq, x: &GroupElement) -> Option<usize> {
    (2..s.n()).find(|&i| &s.t(i - 1, i, i + 1) == x)
}

fn triple_perm(st: &Structure, a: &[GroupElement], depth: u32) -> (Vec<usize>, TripleTrace) {
    let s = Seq { st, a };
    let n = s.n();
    let plain = |case| TripleTrace { case, negated: false, mirrored: false };
    if n == 4 {
        return (identity(4), plain(TripleCase::FourElements));
    }
    let x = s.t(n - 1, n, 1);
    let y = s.t(n, 1, 2);
    match (interior_index(&s, &x), interior_index(&s, &y)) {
        (None, None) => (identity(n), plain(TripleCase::NoCollision)),
        (None, Some(_)) => {
            assert_eq!(depth, 0, "reflection applied twice");
            let (perm, trace) = triple_perm(st, &reflect(st, a), depth + 1);
            (unreflect(n, perm), TripleTrace { negated: true, ..trace })
        }
        (Some(i), j) => {
            let (perm, case, mirrored) = triple_with_collision(&s, i, j);
            (perm, TripleTrace { case, negated: false, mirrored })
        }
    }
}

/// The argument under `a_{n-1} + a_n + a_1 = a_{i-1} + a_i + a_{i+1}`; `j`
/// locates `a_n + a_1 + a_2` among the interior sums, if it is one.
fn triple_with_collision(s: &Seq, i: usize, j: Option<usize>) -> (Vec<usize>, TripleCase, bool) {
    use TripleCase::*;
    let n = s.n();
    match n {
        5 => return (vec![1, 2, 3, 5, 4], Five, false),
        6 => {
            return if i == 3 {
                (vec![1, 2, 5, 3, 4, 6], SixLow, false)
            } else {
                (vec![1, 2, 3, 4, 6, 5], SixHigh, false)
            }
        }
        7 => {
            return match i {
                5 => (vec![2, 1, 4, 5, 3, 6, 7], SevenTop, false),
                3 => (vec![1, 2, 3, 5, 4, 6, 7], SevenLow, false),
                _ if s.t(5, 6, 1) != s.t(2, 3, 4) => (vec![1, 2, 3, 4, 7, 5, 6], SevenMiddleSplit, false),
                _ => (vec![1, 2, 3, 4, 6, 5, 7], SevenMiddleJoint, false),
            }
        }
        _ => {}
    }
    let Some(j) = j else {
        if i < n - 3 {
            return (swap(n, i + 1, i + 2), SingleEarly, false);
        }
        return if s.t(1, 2, n) != s.t(i - 4, i - 3, i - 1) {
            (swap(n, i - 2, i - 1), SingleLate, false)
        } else {
            (overwrite(n, i - 2, &[i, i - 2, i - 1]), SingleLateRotated, false)
        };
    };
    assert!(j + 1 < i, "adjacent collisions are impossible for n > 6");
    match i - j {
        d if d >= 5 => {
            let mut p = swap(n, j + 1, j + 2);
            p.swap(i - 3, i - 2);
            (p, DoubleWide, false)
        }
        4 => (overwrite(n, j + 1, &[j + 2, j + 3, j + 1]), DoubleGapFour, false),
        3 => (swap(n, j + 1, j + 2), DoubleGapThree, false),
        _ if j > 4 => (overwrite(n, j - 2, &[j - 1, j - 2, j + 1, j]), DoubleGapTwoLeft, false),
        _ if i <= n - 4 => (overwrite(n, j + 1, &[i, i - 1, i + 2, i + 1]), DoubleGapTwoRight, false),
        _ if n == 8 && (i, j) == (6, 4) => {
            let (p, c) = eight_six_four(s);
            (p, c, false)
        }
        _ if n == 8 => {
            assert_eq!((i, j), (5, 3));
            let r = reflect(s.st, s.a);
            let (p, c) = eight_six_four(&Seq { st: s.st, a: &r });
            (unreflect(n, p), c, true)
        }
        _ => {
            assert_eq!((n, i, j), (9, 6, 4));
            if s.st.add(s.at(7), s.at(7)) != s.st.add(s.at(8), s.at(4)) {
                (vec![1, 2, 3, 4, 6, 5, 8, 7, 9], NineSplit, false)
            } else {
                (vec![1, 2, 3, 4, 6, 8, 5, 7, 9], NineJoint, false)
            }
        }
    }
}

fn eight_six_four(s: &Seq) -> (Vec<usize>, TripleCase) {
    if s.st.add(s.at(5), s.at(5)) != s.st.add(s.at(4), s.at(7)) {
        (vec![1, 2, 3, 4, 6, 7, 5, 8], TripleCase::EightSplit)
    } else {
        (vec![1, 2, 3, 4, 5, 7, 8, 6], TripleCase::EightJoint)
    }
}

/// Powers `g, g^2, ..., g^{phi(n)}` of the smallest primitive root modulo an
/// odd prime power `n`: both the elements and the cyclic differences are
/// reduced residue systems.
pub fn reduced_residue_cycle(n: u64) -> Result<Construction> {
    let odd_prime_power = n > 1 && n % 2 == 1 && numtheory::prime_power(n).is_some();
    if !odd_prime_power {
        return Err(ConstructionError::Domain(format!("{n} is not an odd prime power > 1")));
    }
    let g = numtheory::find_primitive_root(n).map_err(|e| ConstructionError::Domain(e.to_string()))?;
    let phi = numtheory::euler_phi(n).expect("n >= 1");
    let mut x = 1u64;
    let mut els = Vec::with_capacity(phi as usize);
    for _ in 0..phi {
        x = numtheory::mul_mod(x, g, n);
        els.push(GroupElement::scalar(x as i128));
    }
    assert!(
        els.iter().all(|e| numtheory::gcd(e.0[0] as u64, n) == 1),
        "powers of a unit must be units"
    );
    let group = GroupSpec::CyclicProduct { moduli: vec![n] };
    let constraint = Constraint::new(vec![
        Clause::RainbowDiff,
        Clause::EdgePredicate { predicate: PredicateSpec::CoprimeTo { m: n }, labeler: Labeler::Diff },
    ]);
    Ok(verified(Arrangement::new(group, Shape::Circular, els), constraint))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QrOp {
    Sum,
    Difference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QrClass {
    /// Nonzero squares.
    Squares,
    /// Nonsquares.
    Nonsquares,
}

impl QrClass {
    pub fn predicate(self) -> PredicateSpec {
        match self {
            QrClass::Squares => PredicateSpec::FieldSquare,
            QrClass::Nonsquares => PredicateSpec::FieldNonsquare,
        }
    }
}

impl QrOp {
    pub fn labeler(self) -> Labeler {
        match self {
            QrOp::Sum => Labeler::Sum,
            QrOp::Difference => Labeler::Diff,
        }
    }

    pub fn rainbow(self) -> Clause {
        match self {
            QrOp::Sum => Clause::RainbowSum,
            QrOp::Difference => Clause::RainbowDiff,
        }
    }
}

/// Result of the squares-circle construction: not finding a suitable
/// generator is an outcome, not an error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum QrCycle {
    Found {
        /// Field index of the generator used.
        generator: u64,
        construction: Construction,
    },
    NotFound,
}

/// Circle `g^2, g^4, ..., g^{q-1}` of all nonzero squares of `F_q`, where `g`
/// is the smallest primitive element (by index) with `1 + eps g^2` in the
/// requested class. Consecutive sums (`eps = 1`) or differences (`eps = -1`)
/// are then `g^{2i}(1 + eps g^2)`: distinct, and all in that class.
pub fn qr_cycle(q: u64, op: QrOp, target: QrClass) -> Result<QrCycle> {
    let group = GroupSpec::field_of_order(q).map_err(|e| ConstructionError::Usage(e.to_string()))?;
    if q % 2 == 0 {
        return Err(ConstructionError::Domain(format!(
            "q = {q} is even: every nonzero element is a square and the nonsquare class is empty"
        )));
    }
    let f = field_view_of(&group)?;
    let in_class = |x: u64| match target {
        QrClass::Squares => f.is_square(x),
        QrClass::Nonsquares => x != 0 && !f.is_square(x),
    };
    let found = f.primitive_elements().find(|&g| {
        let g2 = f.mul(g, g);
        let shifted = match op {
            QrOp::Sum => f.add(1, g2),
            QrOp::Difference => f.add(1, f.neg(g2)),
        };
        in_class(shifted)
    });
    let Some(g) = found else {
        return Ok(QrCycle::NotFound);
    };
    let n = (q - 1) / 2;
    let g2 = f.mul(g, g);
    let els = (1..=n).map(|i| f.element(f.pow(g2, i))).collect();
    let constraint = Constraint::new(vec![
        op.rainbow(),
        Clause::EdgePredicate { predicate: target.predicate(), labeler: op.labeler() },
    ]);
    Ok(QrCycle::Found { generator: g, construction: verified(Arrangement::new(group, Shape::Circular, els), constraint) })
}

fn field_view_of(group: &GroupSpec) -> Result<std::sync::Arc<crate::algebra::FieldView>> {
    let (p, k) = match group {
        GroupSpec::PrimeField { p } => (*p, 1),
        GroupSpec::PrimePowerField { p, k, .. } => (*p, *k),
        _ => unreachable!("field_of_order returns a field"),
    };
    field_view(p, k).map_err(|e| ConstructionError::Usage(e.to_string()))
}

/// Circle of `0..=n` for odd `n >= 3`, from 0 to `n`, with every adjacent sum
/// coprime to `n - 1` and `n + 1`. For `n = 1, 3 (mod 6)` the sums are
/// `n - 2, n, 2n - 1`; for `n = 5 (mod 6)` they are `1, n, n + 2`.
pub fn coprime_circle_odd(n: u64) -> Result<Construction> {
    if n % 2 == 0 || n < 3 {
        return Err(ConstructionError::Domain(format!("need odd n >= 3, got {n}")));
    }
    let m = n as i128;
    let mut s = Vec::with_capacity(n as usize + 1);
    if n % 6 == 5 {
        s.push(0);
        for t in 0..(m - 1) / 2 {
            s.extend([2 * t + 1, m - 1 - 2 * t]);
        }
        s.push(m);
    } else {
        for t in 0..(m - 1) / 2 {
            s.extend([2 * t, m - 2 - 2 * t]);
        }
        s.extend([m - 1, m]);
    }
    Ok(verified(Arrangement::integers(Shape::Circular, &s), coprime_constraint(n)))
}

/// Sums coprime to `(n-1)(n+1)`, circle pinned from 0 to `n`.
pub fn coprime_constraint(n: u64) -> Constraint {
    Constraint::predicate(PredicateSpec::CoprimeTo { m: (n - 1) * (n + 1) }, Labeler::Sum)
        .with_pins(Some(GroupElement::scalar(0)), Some(GroupElement::scalar(n as i128)))
}

/// Circle of distinct integers with pairwise distinct adjacent sums, by the
/// swap repairs of the sorted order.
pub fn repair_adjacent_sums(values: &[i128]) -> Result<Construction> {
    if values.len() < 3 {
        return Err(ConstructionError::Usage("need at least 3 values".into()));
    }
    let a = sorted_distinct(values)?;
    let n = a.len();
    let collision = (1..n).find(|&i| a[n - 1] + a[0] == a[i - 1] + a[i]);
    let perm = match collision {
        _ if n == 3 => identity(3),
        None => identity(n),
        Some(_) if n == 4 => vec![1, 2, 4, 3],
        Some(i) if i > 2 => swap(n, i - 1, i),
        Some(i) => swap(n, i + 1, i + 2),
    };
    let out: Vec<i128> = perm.iter().map(|&i| a[i - 1]).collect();
    Ok(verified(Arrangement::integers(Shape::Circular, &out), Constraint::single(Clause::RainbowSum)))
}
