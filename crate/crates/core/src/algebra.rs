//! Ambient structures for arrangements.
//!
//! Torsion-free groups are modelled as `Z` and `Z^r` under the lexicographic
//! order (a total order compatible with addition). Finite groups are products
//! of cyclic groups; finite fields are either prime fields or table-based
//! prime-power fields.
//!
//! Addition never needs tables, so [`group_add`], [`group_neg`] and
//! [`group_cmp`] work straight off a [`GroupSpec`]. Multiplication in a
//! prime-power field goes through [`Structure`], which carries the field's
//! log/exp tables.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numtheory::{self, factorize, is_prime};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("capacity error: {0}")]
    Capacity(String),
}

pub type Result<T> = std::result::Result<T, AlgebraError>;

/// Largest field handled by the table-based representation.
pub const MAX_FIELD_SIZE: u64 = 1 << 20;

/// Bound on integer ground-set coordinates; keeps every derived label (sums
/// of three, products, squares) exact in 128-bit arithmetic.
pub const ELEMENT_BOUND: i128 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupSpec {
    Integers,
    /// `Z^rank` with the lexicographic order.
    IntegerVectors { rank: usize },
    CyclicProduct { moduli: Vec<u64> },
    PrimeField { p: u64 },
    /// `F_p[x] / (poly)`; `poly` lists coefficients from the constant term up,
    /// ending with the leading 1.
    PrimePowerField { p: u64, k: u32, poly: Vec<u64> },
}

/// Coordinates of an element; see [`GroupSpec`] for the length per variant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(pub Vec<i128>);

impl GroupElement {
    pub fn scalar(x: i128) -> Self {
        GroupElement(vec![x])
    }

    pub fn coords(&self) -> &[i128] {
        &self.0
    }

    /// The single coordinate of a rank-1 element.
    pub fn as_scalar(&self) -> Option<i128> {
        match self.0.as_slice() {
            [x] => Some(*x),
            _ => None,
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_scalar() {
            Some(x) => write!(f, "{x}"),
            None => {
                write!(f, "(")?;
                for (i, c) in self.0.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl GroupSpec {
    /// Validates the spec itself (moduli, primality, irreducibility).
    pub fn validate(&self) -> Result<()> {
        match self {
            GroupSpec::Integers => Ok(()),
            GroupSpec::IntegerVectors { rank } => {
                if *rank == 0 {
                    return Err(AlgebraError::Usage("IntegerVectors rank must be >= 1".into()));
                }
                Ok(())
            }
            GroupSpec::CyclicProduct { moduli } => {
                if moduli.is_empty() || moduli.iter().any(|&m| m < 2) {
                    return Err(AlgebraError::Usage(format!("invalid moduli {moduli:?}")));
                }
                Ok(())
            }
            GroupSpec::PrimeField { p } => {
                if !is_prime(*p) {
                    return Err(AlgebraError::Usage(format!("{p} is not prime")));
                }
                Ok(())
            }
            GroupSpec::PrimePowerField { p, k, poly } => {
                if !is_prime(*p) || *k < 2 {
                    return Err(AlgebraError::Usage(format!("bad prime power field {p}^{k}")));
                }
                if poly.len() != *k as usize + 1 || poly[*k as usize] != 1 || poly.iter().any(|&c| c >= *p) {
                    return Err(AlgebraError::Usage(format!("modulus {poly:?} is not monic of degree {k}")));
                }
                if !is_irreducible(poly, *p) {
                    return Err(AlgebraError::Usage(format!("modulus {poly:?} is reducible mod {p}")));
                }
                Ok(())
            }
        }
    }

    /// The field `F_{p^k}` with its deterministic modulus.
    pub fn field(p: u64, k: u32) -> Result<GroupSpec> {
        if k == 1 {
            if !is_prime(p) {
                return Err(AlgebraError::Usage(format!("{p} is not prime")));
            }
            return Ok(GroupSpec::PrimeField { p });
        }
        let view = field_make(p, k)?;
        Ok(GroupSpec::PrimePowerField { p, k, poly: view.poly.clone() })
    }

    /// Field for a prime power `q`, if it is one.
    pub fn field_of_order(q: u64) -> Result<GroupSpec> {
        let (p, k) = numtheory::prime_power(q)
            .ok_or_else(|| AlgebraError::Usage(format!("{q} is not a prime power")))?;
        GroupSpec::field(p, k)
    }

    pub fn rank(&self) -> usize {
        match self {
            GroupSpec::Integers | GroupSpec::PrimeField { .. } => 1,
            GroupSpec::IntegerVectors { rank } => *rank,
            GroupSpec::CyclicProduct { moduli } => moduli.len(),
            GroupSpec::PrimePowerField { k, .. } => *k as usize,
        }
    }

    pub fn is_ordered(&self) -> bool {
        matches!(self, GroupSpec::Integers | GroupSpec::IntegerVectors { .. })
    }

    pub fn is_field(&self) -> bool {
        matches!(self, GroupSpec::PrimeField { .. } | GroupSpec::PrimePowerField { .. })
    }

    /// Group order, for finite specs.
    pub fn order(&self) -> Option<u128> {
        match self {
            GroupSpec::Integers | GroupSpec::IntegerVectors { .. } => None,
            GroupSpec::CyclicProduct { moduli } => Some(moduli.iter().map(|&m| m as u128).product()),
            GroupSpec::PrimeField { p } => Some(*p as u128),
            GroupSpec::PrimePowerField { p, k, .. } => Some((*p as u128).pow(*k)),
        }
    }

    /// Per-coordinate modulus for finite specs.
    fn coord_moduli(&self) -> Option<Vec<u64>> {
        match self {
            GroupSpec::CyclicProduct { moduli } => Some(moduli.clone()),
            GroupSpec::PrimeField { p } => Some(vec![*p]),
            GroupSpec::PrimePowerField { p, k, .. } => Some(vec![*p; *k as usize]),
            _ => None,
        }
    }

    pub fn validate_element(&self, x: &GroupElement) -> Result<()> {
        if x.0.len() != self.rank() {
            return Err(AlgebraError::Usage(format!(
                "element {x} has {} coordinates, expected {}",
                x.0.len(),
                self.rank()
            )));
        }
        if let Some(moduli) = self.coord_moduli() {
            for (&c, &m) in x.0.iter().zip(&moduli) {
                if c < 0 || c >= m as i128 {
                    return Err(AlgebraError::Usage(format!("element {x} is not reduced mod {m}")));
                }
            }
        }
        Ok(())
    }

    /// Every element, in ascending coordinate order. Finite specs only.
    pub fn elements(&self) -> Result<Vec<GroupElement>> {
        let moduli = self
            .coord_moduli()
            .ok_or_else(|| AlgebraError::Domain("infinite group has no element list".into()))?;
        let total: u128 = moduli.iter().map(|&m| m as u128).product();
        if total > MAX_FIELD_SIZE as u128 {
            return Err(AlgebraError::Capacity(format!("group of order {total} too large to list")));
        }
        let mut out = vec![GroupElement(Vec::with_capacity(moduli.len()))];
        for &m in &moduli {
            out = out
                .into_iter()
                .flat_map(|e| {
                    (0..m as i128).map(move |c| {
                        let mut v = e.0.clone();
                        v.push(c);
                        GroupElement(v)
                    })
                })
                .collect();
        }
        Ok(out)
    }

    /// Element from its integer encoding: the value itself for rank-1 specs,
    /// mixed-radix digits (first coordinate least significant) otherwise.
    pub fn element_from_index(&self, idx: u64) -> Result<GroupElement> {
        match self {
            GroupSpec::Integers => Ok(GroupElement::scalar(idx as i128)),
            GroupSpec::IntegerVectors { .. } => Err(AlgebraError::Domain("no index encoding for Z^r".into())),
            _ => {
                let moduli = self.coord_moduli().expect("finite spec");
                let order = self.order().expect("finite spec");
                if idx as u128 >= order {
                    return Err(AlgebraError::Usage(format!("index {idx} out of range for order {order}")));
                }
                let mut rest = idx;
                let coords = moduli
                    .iter()
                    .map(|&m| {
                        let c = rest % m;
                        rest /= m;
                        c as i128
                    })
                    .collect();
                Ok(GroupElement(coords))
            }
        }
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement(vec![0; self.rank()])
    }
}

fn reduce(c: i128, m: u64) -> i128 {
    c.rem_euclid(m as i128)
}

pub fn group_add(spec: &GroupSpec, x: &GroupElement, y: &GroupElement) -> GroupElement {
    let mut out: Vec<i128> = x.0.iter().zip(&y.0).map(|(a, b)| a + b).collect();
    if let Some(moduli) = spec.coord_moduli() {
        for (c, m) in out.iter_mut().zip(moduli) {
            *c = reduce(*c, m);
        }
    }
    GroupElement(out)
}

pub fn group_neg(spec: &GroupSpec, x: &GroupElement) -> GroupElement {
    let mut out: Vec<i128> = x.0.iter().map(|a| -a).collect();
    if let Some(moduli) = spec.coord_moduli() {
        for (c, m) in out.iter_mut().zip(moduli) {
            *c = reduce(*c, m);
        }
    }
    GroupElement(out)
}

pub fn group_sub(spec: &GroupSpec, x: &GroupElement, y: &GroupElement) -> GroupElement {
    group_add(spec, x, &group_neg(spec, y))
}

/// Addition-compatible total order; only torsion-free specs have one.
pub fn group_cmp(spec: &GroupSpec, x: &GroupElement, y: &GroupElement) -> Result<Ordering> {
    if !spec.is_ordered() {
        return Err(AlgebraError::Domain(format!("{spec:?} has no order compatible with addition")));
    }
    Ok(x.0.cmp(&y.0))
}

/// Invariant factors `d_1 | d_2 | ... | d_r` (all > 1) of `Z/m_1 + ... + Z/m_k`.
pub fn invariant_factors(moduli: &[u64]) -> Vec<u64> {
    let mut by_prime: HashMap<u64, Vec<u32>> = HashMap::new();
    for &m in moduli {
        if m < 2 {
            continue;
        }
        for (p, e) in factorize(m).expect("nonzero").0 {
            by_prime.entry(p).or_default().push(e);
        }
    }
    let width = by_prime.values().map(Vec::len).max().unwrap_or(0);
    let mut factors = vec![1u64; width];
    for (p, mut exps) in by_prime {
        exps.sort_unstable_by(|a, b| b.cmp(a));
        // Largest exponent goes to the last (largest) invariant factor.
        for (slot, e) in exps.into_iter().enumerate() {
            factors[width - 1 - slot] *= p.pow(e);
        }
    }
    factors
}

/// Whether the Sylow 2-subgroup of the product is cyclic, i.e. at most one
/// invariant factor is even.
pub fn sylow2_cyclic(moduli: &[u64]) -> bool {
    invariant_factors(moduli).iter().filter(|&&d| d % 2 == 0).count() <= 1
}

/// All finite abelian groups of order in `2..=max_order`, as invariant
/// factor lists, ordered by group order then lexicographically.
pub fn abelian_groups_upto(max_order: u64) -> Vec<Vec<u64>> {
    fn extend(prefix: &mut Vec<u64>, order: u64, max: u64, out: &mut Vec<Vec<u64>>) {
        if !prefix.is_empty() {
            out.push(prefix.clone());
        }
        let last = prefix.last().copied().unwrap_or(1);
        let mut d = if prefix.is_empty() { 2 } else { last };
        while order * d <= max {
            if d % last == 0 {
                prefix.push(d);
                extend(prefix, order * d, max, out);
                prefix.pop();
            }
            d += 1;
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), 1, max_order, &mut out);
    out.sort_by_key(|f| (f.iter().product::<u64>(), f.clone()));
    out
}

// ----- polynomials over F_p, coefficients from the constant term up -----

fn poly_trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let dm = m.len() - 1;
    let lead_inv = numtheory::pow_mod(m[dm], p - 2, p);
    while r.len() > dm {
        let shift = r.len() - 1 - dm;
        let coef = numtheory::mul_mod(*r.last().unwrap(), lead_inv, p);
        for (i, &c) in m.iter().enumerate() {
            let sub = numtheory::mul_mod(coef, c, p);
            r[shift + i] = (r[shift + i] + p - sub) % p;
        }
        poly_trim(&mut r);
    }
    r
}

fn digits(mut idx: u64, p: u64, len: usize) -> Vec<u64> {
    (0..len)
        .map(|_| {
            let d = idx % p;
            idx /= p;
            d
        })
        .collect()
}

fn undigits(d: &[u64], p: u64) -> u64 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
fn is_irreducible(poly: &[u64], p: u64) -> bool {
    let deg = poly.len() - 1;
    for d in 1..=deg / 2 {
        let count = p.pow(d as u32);
        for t in 0..count {
            let mut divisor = digits(t, p, d);
            divisor.push(1);
            if poly_rem(poly, &divisor, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Multiplicative structure of `F_q`, with `q = p^k`, over a fixed generator.
///
/// Elements are addressed by index `c_0 + c_1 p + ... + c_{k-1} p^{k-1}`.
#[derive(Debug, Clone)]
pub struct FieldView {
    pub p: u64,
    pub k: u32,
    pub q: u64,
    /// Modulus coefficients from the constant term up, leading 1 last.
    pub poly: Vec<u64>,
    /// Index of the generator.
    pub generator: u64,
    /// `exp[i]` is the index of `generator^i`, `0 <= i < q-1`.
    pub exp: Vec<u32>,
    /// Inverse of `exp` on nonzero indices; `log[0]` is unused.
    pub log: Vec<u32>,
    /// Nonzero squares `S`, ascending by index.
    pub squares: Vec<u64>,
    /// Nonzero nonsquares `T`, ascending by index.
    pub nonsquares: Vec<u64>,
}

impl FieldView {
    #[cfg(test)]
    fn poly_mul_idx(&self, a: u64, b: u64) -> u64 {
        poly_mul_idx(a, b, self.p, self.k as usize, &self.poly)
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        let (da, db) = (digits(a, self.p, self.k as usize), digits(b, self.p, self.k as usize));
        let s: Vec<u64> = da.iter().zip(&db).map(|(x, y)| (x + y) % self.p).collect();
        undigits(&s, self.p)
    }

    pub fn neg(&self, a: u64) -> u64 {
        let d: Vec<u64> = digits(a, self.p, self.k as usize)
            .into_iter()
            .map(|x| (self.p - x) % self.p)
            .collect();
        undigits(&d, self.p)
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if a == 0 || b == 0 {
            return 0;
        }
        let e = (self.log[a as usize] as u64 + self.log[b as usize] as u64) % (self.q - 1);
        self.exp[e as usize] as u64
    }

    pub fn pow(&self, a: u64, e: u64) -> u64 {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let l = (self.log[a as usize] as u128 * e as u128) % (self.q - 1) as u128;
        self.exp[l as usize] as u64
    }

    pub fn is_square(&self, a: u64) -> bool {
        a != 0 && (self.q % 2 == 0 || self.log[a as usize] % 2 == 0)
    }

    pub fn is_primitive(&self, a: u64) -> bool {
        a != 0 && numtheory::gcd(self.log[a as usize] as u64, self.q - 1) == 1
    }

    /// Primitive elements in ascending index order.
    pub fn primitive_elements(&self) -> impl Iterator<Item = u64> + '_ {
        (1..self.q).filter(move |&a| self.is_primitive(a))
    }

    pub fn index_of(&self, x: &GroupElement) -> u64 {
        x.0.iter().rev().fold(0u64, |acc, &c| acc * self.p + c as u64)
    }

    pub fn element(&self, idx: u64) -> GroupElement {
        GroupElement(digits(idx, self.p, self.k as usize).into_iter().map(|c| c as i128).collect())
    }
}

fn poly_mul_idx(a: u64, b: u64, p: u64, k: usize, modulus: &[u64]) -> u64 {
    let (da, db) = (digits(a, p, k), digits(b, p, k));
    let mut prod = vec![0u64; 2 * k];
    for (i, &x) in da.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in db.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    let mut r = poly_rem(&prod, modulus, p);
    r.resize(k, 0);
    undigits(&r, p)
}

/// Builds `F_{p^k}`: the lexicographically smallest monic irreducible modulus
/// (for `k >= 2`), tables over the smallest primitive element, and the
/// square/nonsquare split.
pub fn field_make(p: u64, k: u32) -> Result<FieldView> {
    if !is_prime(p) {
        return Err(AlgebraError::Usage(format!("{p} is not prime")));
    }
    if k == 0 {
        return Err(AlgebraError::Usage("field degree must be >= 1".into()));
    }
    let q = (p as u128).checked_pow(k).filter(|&q| q <= MAX_FIELD_SIZE as u128).ok_or_else(|| {
        AlgebraError::Capacity(format!("{p}^{k} exceeds the table limit {MAX_FIELD_SIZE}"))
    })? as u64;
    let kk = k as usize;
    let poly = if k == 1 {
        vec![0, 1]
    } else {
        (0..q)
            .map(|t| {
                let mut c = digits(t, p, kk);
                c.push(1);
                c
            })
            .find(|c| is_irreducible(c, p))
            .expect("irreducible polynomials exist in every degree")
    };
    let order = q - 1;
    let order_primes: Vec<u64> = if order > 1 {
        factorize(order).expect("nonzero").primes().collect()
    } else {
        Vec::new()
    };
    let pow_idx = |mut base: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_mul_idx(acc, base, p, kk, &poly);
            }
            base = poly_mul_idx(base, base, p, kk, &poly);
            e >>= 1;
        }
        acc
    };
    let generator = (1..q)
        .find(|&g| order_primes.iter().all(|&r| pow_idx(g, order / r) != 1))
        .expect("the multiplicative group of a finite field is cyclic");
    let mut exp = Vec::with_capacity(order as usize);
    let mut log = vec![u32::MAX; q as usize];
    let mut cur = 1u64;
    for i in 0..order {
        exp.push(cur as u32);
        log[cur as usize] = i as u32;
        cur = poly_mul_idx(cur, generator, p, kk, &poly);
    }
    let mut view = FieldView { p, k, q, poly, generator, exp, log, squares: Vec::new(), nonsquares: Vec::new() };
    let (squares, nonsquares): (Vec<u64>, Vec<u64>) = (1..q).partition(|&a| view.is_square(a));
    view.squares = squares;
    view.nonsquares = nonsquares;
    Ok(view)
}

/// Shared, cached field tables.
pub fn field_view(p: u64, k: u32) -> Result<Arc<FieldView>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), Arc<FieldView>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().expect("field cache poisoned").get(&(p, k)) {
        return Ok(v.clone());
    }
    let view = Arc::new(field_make(p, k)?);
    cache.lock().expect("field cache poisoned").insert((p, k), view.clone());
    Ok(view)
}

/// A [`GroupSpec`] with whatever tables its ring operations need.
#[derive(Debug, Clone)]
pub struct Structure {
    spec: GroupSpec,
    field: Option<Arc<FieldView>>,
}

impl Structure {
    pub fn new(spec: &GroupSpec) -> Result<Self> {
        spec.validate()?;
        let field = match spec {
            GroupSpec::PrimePowerField { p, k, poly } => {
                let view = field_view(*p, *k)?;
                if &view.poly != poly {
                    // TODO: build uncached tables for non-canonical moduli.
                    return Err(AlgebraError::Usage(format!(
                        "prime power field modulus {poly:?} differs from the canonical {:?}",
                        view.poly
                    )));
                }
                Some(view)
            }
            GroupSpec::PrimeField { p } if *p <= MAX_FIELD_SIZE => Some(field_view(*p, 1)?),
            _ => None,
        };
        Ok(Structure { spec: spec.clone(), field })
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn field(&self) -> Option<&FieldView> {
        self.field.as_deref()
    }

    pub fn add(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        group_add(&self.spec, x, y)
    }

    pub fn sub(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        group_sub(&self.spec, x, y)
    }

    /// Ring multiplication: integers, coordinatewise on `Z/m` products, and
    /// field multiplication. `Z^r` has none.
    pub fn mul(&self, x: &GroupElement, y: &GroupElement) -> Result<GroupElement> {
        match &self.spec {
            GroupSpec::Integers => Ok(GroupElement::scalar(x.0[0] * y.0[0])),
            GroupSpec::IntegerVectors { .. } => {
                Err(AlgebraError::Domain("Z^r has no multiplication".into()))
            }
            GroupSpec::CyclicProduct { moduli } => Ok(GroupElement(
                x.0.iter().zip(&y.0).zip(moduli).map(|((a, b), &m)| reduce(a * b, m)).collect(),
            )),
            GroupSpec::PrimeField { p } => Ok(GroupElement::scalar(reduce(x.0[0] * y.0[0], *p))),
            GroupSpec::PrimePowerField { .. } => {
                let f = self.field.as_ref().expect("prime power field tables");
                Ok(f.element(f.mul(f.index_of(x), f.index_of(y))))
            }
        }
    }

    /// Image of the integer `c` under the unital ring map.
    pub fn constant(&self, c: i128) -> Result<GroupElement> {
        match &self.spec {
            GroupSpec::Integers => Ok(GroupElement::scalar(c)),
            GroupSpec::IntegerVectors { .. } => {
                Err(AlgebraError::Domain("Z^r has no ring constants".into()))
            }
            GroupSpec::CyclicProduct { moduli } => {
                Ok(GroupElement(moduli.iter().map(|&m| reduce(c, m)).collect()))
            }
            GroupSpec::PrimeField { p } => Ok(GroupElement::scalar(reduce(c, *p))),
            GroupSpec::PrimePowerField { p, k, .. } => {
                let mut v = vec![0i128; *k as usize];
                v[0] = reduce(c, *p);
                Ok(GroupElement(v))
            }
        }
    }
}
