//! Exact integer number theory: primality, sieving, factorization, Euler's
//! totient, primitive roots, quadratic residues and the edge predicates used
//! by the conjecture registry.
//!
//! Everything here is a pure function over immutable data. [`PredicateTable`]
//! is the memoized form used by the search kernel; it is built once per
//! search and shared read-only.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, NumError>;

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Witness set for the strong-pseudoprime test. Checking the first twelve
/// primes as bases is deterministic for every n < 3.3 * 10^24, which covers
/// all of `u64`.
const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &MR_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Sieve of Eratosthenes over `0..=limit`, one bit per integer.
#[derive(Debug, Clone)]
pub struct PrimeSieve {
    limit: u64,
    bits: Vec<u64>,
}

impl PrimeSieve {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn is_prime(&self, k: u64) -> bool {
        k <= self.limit && self.bits[(k / 64) as usize] >> (k % 64) & 1 == 1
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        (0..=self.limit).filter(move |&k| self.is_prime(k))
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }
}

pub fn primes_upto(limit: u64) -> Result<PrimeSieve> {
    if limit < 2 {
        return Err(NumError::Usage(format!("sieve limit must be at least 2, got {limit}")));
    }
    let words = (limit / 64 + 1) as usize;
    let mut bits = vec![u64::MAX; words];
    let clear = |bits: &mut Vec<u64>, k: u64| bits[(k / 64) as usize] &= !(1u64 << (k % 64));
    clear(&mut bits, 0);
    clear(&mut bits, 1);
    let mut p = 2u64;
    while p * p <= limit {
        if bits[(p / 64) as usize] >> (p % 64) & 1 == 1 {
            let mut m = p * p;
            while m <= limit {
                clear(&mut bits, m);
                m += p;
            }
        }
        p += 1;
    }
    // Bits past `limit` in the final word stay clear.
    let tail = (limit % 64) + 1;
    if tail < 64 {
        let last = words - 1;
        bits[last] &= (1u64 << tail) - 1;
    }
    Ok(PrimeSieve { limit, bits })
}

/// The first `n` primes, in increasing order.
pub fn first_primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut k = 2u64;
    while out.len() < n {
        if is_prime(k) {
            out.push(k);
        }
        k += 1;
    }
    out
}

/// Prime factorization with strictly increasing primes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization(pub Vec<(u64, u32)>);

impl Factorization {
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.0.iter().map(|&(p, _)| p)
    }

    pub fn value(&self) -> u128 {
        self.0.iter().map(|&(p, e)| (p as u128).pow(e)).product()
    }
}

fn pollard_brent(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn factor_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_brent(n);
    factor_into(d, out);
    factor_into(n / d, out);
}

pub fn factorize(mut n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(NumError::Usage("cannot factor 0".into()));
    }
    let mut primes = Vec::new();
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        while n % p == 0 {
            primes.push(p);
            n /= p;
        }
    }
    factor_into(n, &mut primes);
    primes.sort_unstable();
    let mut pairs: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match pairs.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => pairs.push((p, 1)),
        }
    }
    Ok(Factorization(pairs))
}

pub fn euler_phi(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(NumError::Usage("euler_phi(0) is undefined".into()));
    }
    let f = factorize(n)?;
    Ok(f.0.iter().fold(n, |acc, &(p, _)| acc / p * (p - 1)))
}

/// If `n = p^k` for a prime `p` and `k >= 1`, returns `(p, k)`.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    if n < 2 {
        return None;
    }
    let f = factorize(n).ok()?;
    match f.0.as_slice() {
        [(p, k)] => Some((*p, *k)),
        _ => None,
    }
}

/// True iff the multiplicative group mod `n` is cyclic: n in {1, 2, 4, p^k, 2p^k}.
pub fn has_primitive_root(n: u64) -> bool {
    match n {
        0 => false,
        1 | 2 | 4 => true,
        _ => {
            let odd = if n % 2 == 0 { n / 2 } else { n };
            odd % 2 == 1 && matches!(prime_power(odd), Some((p, _)) if p != 2)
        }
    }
}

fn check_unit_mod(g: u64, n: u64) -> Result<()> {
    if !has_primitive_root(n) || n < 2 {
        return Err(NumError::Domain(format!("{n} has no primitive roots")));
    }
    if gcd(g % n, n) != 1 {
        return Err(NumError::Domain(format!("gcd({g}, {n}) != 1")));
    }
    Ok(())
}

/// Order test via `g^(phi/q) != 1` for every prime `q | phi`. Assumes `g` is
/// a unit mod `n` and `phi_factors` factors `phi(n)`.
fn is_generator(g: u64, n: u64, phi: u64, phi_factors: &Factorization) -> bool {
    phi_factors.primes().all(|q| pow_mod(g, phi / q, n) != 1)
}

pub fn is_primitive_root(g: u64, n: u64) -> Result<bool> {
    check_unit_mod(g, n)?;
    let phi = euler_phi(n)?;
    let f = factorize(phi)?;
    Ok(is_generator(g, n, phi, &f))
}

/// Smallest primitive root `g >= 2` mod `n`. For `n = 2` the only unit is 1,
/// which is returned.
pub fn find_primitive_root(n: u64) -> Result<u64> {
    if !has_primitive_root(n) || n < 2 {
        return Err(NumError::Domain(format!("{n} has no primitive roots")));
    }
    if n == 2 {
        return Ok(1);
    }
    let phi = euler_phi(n)?;
    let f = factorize(phi)?;
    (2..n)
        .find(|&g| gcd(g, n) == 1 && is_generator(g, n, phi, &f))
        .ok_or_else(|| NumError::Domain(format!("no primitive root found mod {n}")))
}

fn check_odd_prime(p: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(NumError::Usage(format!("{p} is not an odd prime")));
    }
    Ok(())
}

/// Euler's criterion. `a` may be negative; it is reduced mod `p` first.
pub fn is_quadratic_residue(a: i128, p: u64) -> Result<bool> {
    check_odd_prime(p)?;
    let r = a.rem_euclid(p as i128) as u64;
    if r == 0 {
        return Err(NumError::Domain(format!("{p} divides {a}")));
    }
    Ok(pow_mod(r, (p - 1) / 2, p) == 1)
}

/// Named number-theoretic predicates on integers, plus the three field-level
/// predicates that need a finite field to interpret their argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PredicateSpec {
    /// `a*k + b` is prime.
    PrimeShift { a: i64, b: i64 },
    /// `6k - 1` and `6k + 1` are both prime.
    TwinIndex,
    /// `6k - 1` and `12k - 1` are both prime.
    SophieGermainIndex,
    PrimitiveRootMod { p: u64 },
    QuadraticResidueMod { p: u64 },
    QuadraticNonresidueMod { p: u64 },
    CoprimeTo { m: u64 },
    PrimePredicate,
    /// Generator of the multiplicative group of the ambient field.
    PrimitiveElement,
    /// Nonzero square of the ambient field.
    FieldSquare,
    /// Nonzero nonsquare of the ambient field.
    FieldNonsquare,
}

impl PredicateSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PredicateSpec::PrimeShift { a: 0, .. } => {
                Err(NumError::Usage("PrimeShift requires a != 0".into()))
            }
            PredicateSpec::PrimitiveRootMod { p }
            | PredicateSpec::QuadraticResidueMod { p }
            | PredicateSpec::QuadraticNonresidueMod { p } => check_odd_prime(p),
            _ => Ok(()),
        }
    }

    /// Field predicates are evaluated against a field element, not an integer.
    pub fn is_field_level(&self) -> bool {
        matches!(
            self,
            PredicateSpec::PrimitiveElement | PredicateSpec::FieldSquare | PredicateSpec::FieldNonsquare
        )
    }

    /// Modulus the predicate reduces by, if any.
    pub fn modulus(&self) -> Option<u64> {
        match *self {
            PredicateSpec::PrimitiveRootMod { p }
            | PredicateSpec::QuadraticResidueMod { p }
            | PredicateSpec::QuadraticNonresidueMod { p } => Some(p),
            PredicateSpec::CoprimeTo { m } if m > 0 => Some(m),
            _ => None,
        }
    }
}

fn prime_i128(v: i128, what: &str) -> Result<bool> {
    if v < 0 {
        return Err(NumError::Domain(format!("{what} = {v} is negative")));
    }
    u64::try_from(v)
        .map(is_prime)
        .map_err(|_| NumError::Domain(format!("{what} = {v} exceeds 64 bits")))
}

/// Evaluates an integer predicate. Modular kinds reduce `k` first; a residue
/// of 0 is a domain error for the root/residue kinds. Field-level kinds are
/// rejected here (see `algebra::FieldView`).
pub fn eval_predicate(spec: PredicateSpec, k: i128) -> Result<bool> {
    spec.validate()?;
    match spec {
        PredicateSpec::PrimeShift { a, b } => {
            let v = (a as i128)
                .checked_mul(k)
                .and_then(|x| x.checked_add(b as i128))
                .ok_or_else(|| NumError::Domain(format!("{a}*{k}+{b} overflows")))?;
            prime_i128(v, "a*k+b")
        }
        PredicateSpec::TwinIndex => {
            let lo = prime_i128(6 * k - 1, "6k-1")?;
            Ok(lo && prime_i128(6 * k + 1, "6k+1")?)
        }
        PredicateSpec::SophieGermainIndex => {
            let lo = prime_i128(6 * k - 1, "6k-1")?;
            Ok(lo && prime_i128(12 * k - 1, "12k-1")?)
        }
        PredicateSpec::PrimitiveRootMod { p } => {
            let r = k.rem_euclid(p as i128) as u64;
            if r == 0 {
                return Err(NumError::Domain(format!("{k} = 0 mod {p}")));
            }
            is_primitive_root(r, p)
        }
        PredicateSpec::QuadraticResidueMod { p } => is_quadratic_residue(k, p),
        PredicateSpec::QuadraticNonresidueMod { p } => is_quadratic_residue(k, p).map(|r| !r),
        PredicateSpec::CoprimeTo { m } => {
            let kk = u64::try_from(k.unsigned_abs())
                .map_err(|_| NumError::Domain(format!("{k} exceeds 64 bits")))?;
            Ok(gcd(kk, m) == 1)
        }
        PredicateSpec::PrimePredicate => prime_i128(k, "k"),
        PredicateSpec::PrimitiveElement | PredicateSpec::FieldSquare | PredicateSpec::FieldNonsquare => Err(
            NumError::Usage(format!("{spec:?} needs a field element, not an integer")),
        ),
    }
}

/// Largest dense table the memo will allocate for non-modular predicates.
const DENSE_LIMIT: i128 = 1 << 22;

/// Memoized integer predicate. Modular kinds are tabulated over residues;
/// the others over a caller-supplied value window, falling back to direct
/// evaluation outside it. Domain errors read as `false`.
#[derive(Debug, Clone)]
pub struct PredicateTable {
    spec: PredicateSpec,
    modulus: Option<u64>,
    offset: i128,
    table: Vec<bool>,
}

impl PredicateTable {
    pub fn build(spec: PredicateSpec, lo: i128, hi: i128) -> Result<Self> {
        spec.validate()?;
        if spec.is_field_level() {
            return Err(NumError::Usage(format!("{spec:?} cannot be tabulated over integers")));
        }
        let eval = |k: i128| eval_predicate(spec, k).unwrap_or(false);
        if let Some(m) = spec.modulus().filter(|&m| m as i128 <= DENSE_LIMIT) {
            let table = (0..m as i128).map(eval).collect();
            return Ok(PredicateTable { spec, modulus: Some(m), offset: 0, table });
        }
        let table = if hi >= lo && hi - lo < DENSE_LIMIT {
            (lo..=hi).map(eval).collect()
        } else {
            Vec::new()
        };
        Ok(PredicateTable { spec, modulus: None, offset: lo, table })
    }

    pub fn spec(&self) -> PredicateSpec {
        self.spec
    }

    #[inline]
    pub fn get(&self, k: i128) -> bool {
        if let Some(m) = self.modulus {
            return self.table[k.rem_euclid(m as i128) as usize];
        }
        let idx = k - self.offset;
        if idx >= 0 && (idx as usize) < self.table.len() {
            self.table[idx as usize]
        } else {
            eval_predicate(self.spec, k).unwrap_or(false)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn small_primality() {
        assert!(is_prime(2));
        assert!(!is_prime(1));
        assert!(!is_prime(0));
        assert!(trial_division(541));
        assert!(is_prime(541));
    }

    #[test]
    fn large_primality() {
        assert!(is_prime(18_446_744_073_709_551_557)); // largest 64-bit prime
        assert!(!is_prime(18_446_744_073_709_551_615));
        // strong pseudoprimes to several small bases
        assert!(!is_prime(3_215_031_751));
        assert!(!is_prime(3_825_123_056_546_413_051));
        assert!(!is_prime(4_294_967_297)); // F5 = 641 * 6700417
    }

    #[test]
    fn sieve_examples() {
        let s = primes_upto(10).unwrap();
        assert_eq!(s.primes().collect::<Vec<_>>(), vec![2, 3, 5, 7]);
        assert_eq!(primes_upto(2).unwrap().primes().collect::<Vec<_>>(), vec![2]);
        let count = (0..=100).filter(|&k| trial_division(k)).count();
        assert_eq!(count, 25);
        assert_eq!(primes_upto(100).unwrap().count(), count);
        assert!(matches!(primes_upto(1), Err(NumError::Usage(_))));
        assert_eq!(primes_upto(64).unwrap().count(), 18);
        assert_eq!(primes_upto(63).unwrap().count(), 18);
    }

    #[test]
    fn sieve_agrees_with_miller_rabin() {
        let s = primes_upto(10_000).unwrap();
        for n in 0..=10_000 {
            assert_eq!(s.is_prime(n), is_prime(n), "n = {n}");
        }
    }

    #[test]
    fn phi_examples() {
        assert_eq!(euler_phi(1).unwrap(), 1);
        let brute = |n: u64| (1..=n).filter(|&k| gcd(k, n) == 1).count() as u64;
        assert_eq!(brute(9), 6);
        assert_eq!(euler_phi(9).unwrap(), 6);
        assert_eq!(euler_phi(27).unwrap(), 18);
        assert!(euler_phi(0).is_err());
    }

    #[test]
    fn factorization_reconstructs() {
        for n in [1u64, 2, 12, 97, 1 << 40, 600_851_475_143, 18_446_744_073_709_551_615] {
            let f = factorize(n).unwrap();
            assert_eq!(f.value(), n as u128);
            assert!(f.0.windows(2).all(|w| w[0].0 < w[1].0));
            assert!(f.primes().all(is_prime));
        }
    }

    #[test]
    fn primitive_root_examples() {
        assert!(is_primitive_root(3, 7).unwrap());
        assert!(!is_primitive_root(2, 7).unwrap());
        assert!(is_primitive_root(6, 11).unwrap());
        assert_eq!(find_primitive_root(7).unwrap(), 3);
        assert_eq!(find_primitive_root(11).unwrap(), 2);
        assert_eq!(find_primitive_root(9).unwrap(), 2);
        assert!(matches!(is_primitive_root(3, 8), Err(NumError::Domain(_))));
        assert!(matches!(is_primitive_root(3, 9), Err(NumError::Domain(_))));
        assert!(matches!(find_primitive_root(15), Err(NumError::Domain(_))));
    }

    #[test]
    fn primitive_root_counts() {
        for n in 2..=10_000u64 {
            if !has_primitive_root(n) {
                continue;
            }
            let phi = euler_phi(n).unwrap();
            let f = factorize(phi).unwrap();
            let count = (1..n)
                .filter(|&g| gcd(g, n) == 1 && is_generator(g, n, phi, &f))
                .count() as u64;
            assert_eq!(count, euler_phi(phi).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn quadratic_residue_examples() {
        assert_eq!(11 * 11 % 29, 5);
        assert!(is_quadratic_residue(5, 29).unwrap());
        assert!(!is_quadratic_residue(2, 11).unwrap());
        for p in [3u64, 5, 7, 101] {
            assert!(is_quadratic_residue(1, p).unwrap());
        }
        assert!(matches!(is_quadratic_residue(29, 29), Err(NumError::Domain(_))));
        assert!(is_quadratic_residue(-1, 13).unwrap());
        assert!(!is_quadratic_residue(-1, 11).unwrap());
    }

    #[test]
    fn residue_counts() {
        let sieve = primes_upto(1000).unwrap();
        for p in sieve.primes().filter(|&p| p > 2) {
            let qr = (1..p as i128).filter(|&a| is_quadratic_residue(a, p).unwrap()).count();
            assert_eq!(qr as u64, (p - 1) / 2);
        }
    }

    #[test]
    fn predicate_examples() {
        assert!(eval_predicate(PredicateSpec::TwinIndex, 1).unwrap());
        assert!(eval_predicate(PredicateSpec::SophieGermainIndex, 1).unwrap());
        assert!(eval_predicate(PredicateSpec::PrimitiveRootMod { p: 11 }, 6).unwrap());
        assert!(eval_predicate(PredicateSpec::PrimitiveRootMod { p: 11 }, 17).unwrap());
        assert!(eval_predicate(PredicateSpec::PrimitiveRootMod { p: 11 }, 22).is_err());
        assert!(eval_predicate(PredicateSpec::TwinIndex, 0).is_err());
        assert!(eval_predicate(PredicateSpec::PrimeShift { a: 2, b: 1 }, -3).is_err());
        assert!(eval_predicate(PredicateSpec::PrimeShift { a: 0, b: 1 }, 3).is_err());
        assert!(eval_predicate(PredicateSpec::PrimitiveRootMod { p: 9 }, 2).is_err());
        assert!(eval_predicate(PredicateSpec::CoprimeTo { m: 48 }, 5).unwrap());
        assert!(!eval_predicate(PredicateSpec::CoprimeTo { m: 48 }, 9).unwrap());
        assert!(eval_predicate(PredicateSpec::CoprimeTo { m: 0 }, 1).unwrap());
        assert!(!eval_predicate(PredicateSpec::CoprimeTo { m: 0 }, 3).unwrap());
        assert!(eval_predicate(PredicateSpec::FieldSquare, 3).is_err());
    }

    #[test]
    fn twin_index_matches_definition() {
        for k in 1..=100_000i128 {
            let direct = is_prime((6 * k - 1) as u64) && is_prime((6 * k + 1) as u64);
            assert_eq!(eval_predicate(PredicateSpec::TwinIndex, k).unwrap(), direct);
        }
    }

    #[test]
    fn table_matches_direct_evaluation() {
        let specs = [
            PredicateSpec::PrimitiveRootMod { p: 23 },
            PredicateSpec::QuadraticNonresidueMod { p: 29 },
            PredicateSpec::PrimeShift { a: 4, b: -1 },
            PredicateSpec::TwinIndex,
            PredicateSpec::CoprimeTo { m: 90 },
        ];
        for spec in specs {
            let t = PredicateTable::build(spec, -50, 400).unwrap();
            for k in -100..600 {
                assert_eq!(t.get(k), eval_predicate(spec, k).unwrap_or(false), "{spec:?} {k}");
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]
            #[test]
            fn phi_multiplicative(a in 1u64..=10_000, b in 1u64..=10_000) {
                prop_assume!(gcd(a, b) == 1);
                prop_assert_eq!(
                    euler_phi(a * b).unwrap(),
                    euler_phi(a).unwrap() * euler_phi(b).unwrap()
                );
            }
        }
    }
}
