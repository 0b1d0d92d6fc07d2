//! Arrangements, declarative adjacency constraints and the label functions
//! that give each clause its meaning.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, GroupElement, GroupSpec, Structure, ELEMENT_BOUND};
use crate::numtheory::{self, PredicateSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("capacity error: {0}")]
    Capacity(String),
}

impl From<AlgebraError> for ConstraintError {
    fn from(e: AlgebraError) -> Self {
        match e {
            AlgebraError::Capacity(m) => ConstraintError::Capacity(m),
            other => ConstraintError::Usage(other.to_string()),
        }
    }
}

impl From<numtheory::NumError> for ConstraintError {
    fn from(e: numtheory::NumError) -> Self {
        ConstraintError::Usage(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Linear,
    Circular,
}

/// A linear or circular sequence of distinct elements of a group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Arrangement {
    pub group: GroupSpec,
    pub shape: Shape,
    pub elements: Vec<GroupElement>,
}

impl Arrangement {
    pub fn new(group: GroupSpec, shape: Shape, elements: Vec<GroupElement>) -> Self {
        Arrangement { group, shape, elements }
    }

    pub fn integers(shape: Shape, values: &[i128]) -> Self {
        Arrangement::new(GroupSpec::Integers, shape, values.iter().map(|&x| GroupElement::scalar(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Scalar values of a rank-1 arrangement.
    pub fn scalars(&self) -> Option<Vec<i128>> {
        self.elements.iter().map(GroupElement::as_scalar).collect()
    }

    /// Position pairs of the adjacent edges, in traversal order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        edge_positions(self.shape, self.len())
    }
}

impl fmt::Display for Arrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// A circle of two elements has both the `x -> y` and the `y -> x` edge; a
/// single element has none.
pub fn edge_positions(shape: Shape, len: usize) -> Vec<(usize, usize)> {
    match shape {
        Shape::Linear => (1..len).map(|i| (i - 1, i)).collect(),
        Shape::Circular if len >= 2 => (0..len).map(|i| (i, (i + 1) % len)).collect(),
        Shape::Circular => Vec::new(),
    }
}

pub fn triple_positions(shape: Shape, len: usize) -> Vec<(usize, usize, usize)> {
    match shape {
        Shape::Linear => (2..len).map(|i| (i - 2, i - 1, i)).collect(),
        Shape::Circular if len >= 3 => (0..len).map(|i| (i, (i + 1) % len, (i + 2) % len)).collect(),
        Shape::Circular => Vec::new(),
    }
}

/// How an edge `(x, y)` is turned into the value(s) a predicate must accept.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Labeler {
    Sum,
    Diff,
    /// Both `|x - y|` and `x + y`.
    AbsDiffAndSum,
    /// `|x^2 - y^2|`.
    AbsSquareDiff,
    SquarePlus,
    SquareMinus,
    ProductMinusOne,
    TwoProductMinusOne,
    TwoProductPlusOne,
    AffineProduct { a0: GroupElement },
}

impl Labeler {
    pub fn is_symmetric(&self) -> bool {
        !matches!(self, Labeler::Diff | Labeler::SquarePlus | Labeler::SquareMinus)
    }

    fn needs_ring(&self) -> bool {
        !matches!(self, Labeler::Sum | Labeler::Diff)
    }

    fn integers_only(&self) -> bool {
        matches!(self, Labeler::AbsDiffAndSum | Labeler::AbsSquareDiff)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Clause {
    /// `x + y` pairwise distinct over edges.
    RainbowSum,
    /// `x - y` (directed) pairwise distinct.
    RainbowDiff,
    /// `|x - y|` pairwise distinct.
    RainbowDistance,
    /// `x + 2y` (directed) pairwise distinct.
    RainbowWeighted,
    /// `x + y + z` over consecutive triples pairwise distinct.
    RainbowTriple,
    /// `x * y` pairwise distinct.
    RainbowProduct,
    EdgePredicate { predicate: PredicateSpec, labeler: Labeler },
}

impl Clause {
    /// Whether reversing an arrangement maps satisfying arrangements to
    /// satisfying arrangements. Only declared symmetry counts; directed
    /// kinds are never assumed symmetric.
    pub fn is_reversal_symmetric(&self) -> bool {
        match self {
            Clause::RainbowSum | Clause::RainbowDistance | Clause::RainbowProduct | Clause::RainbowTriple => true,
            Clause::RainbowDiff | Clause::RainbowWeighted => false,
            Clause::EdgePredicate { labeler, .. } => labeler.is_symmetric(),
        }
    }

    pub fn is_rainbow_pair(&self) -> bool {
        matches!(
            self,
            Clause::RainbowSum
                | Clause::RainbowDiff
                | Clause::RainbowDistance
                | Clause::RainbowWeighted
                | Clause::RainbowProduct
        )
    }

    pub fn name(&self) -> String {
        match self {
            Clause::RainbowSum => "rainbow_sum".into(),
            Clause::RainbowDiff => "rainbow_diff".into(),
            Clause::RainbowDistance => "rainbow_distance".into(),
            Clause::RainbowWeighted => "rainbow_weighted".into(),
            Clause::RainbowTriple => "rainbow_triple".into(),
            Clause::RainbowProduct => "rainbow_product".into(),
            Clause::EdgePredicate { predicate, labeler } => format!("edge_predicate({predicate:?}, {labeler:?})"),
        }
    }
}

/// Positional requirements on an arrangement.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pins {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first: Option<GroupElement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last: Option<GroupElement>,
}

impl Pins {
    pub fn is_empty(&self) -> bool {
        self.first.is_none() && self.last.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Constraint {
    pub clauses: Vec<Clause>,
    #[serde(default, skip_serializing_if = "Pins::is_empty")]
    pub pins: Pins,
}

impl Constraint {
    pub fn new(clauses: Vec<Clause>) -> Self {
        Constraint { clauses, pins: Pins::default() }
    }

    pub fn single(clause: Clause) -> Self {
        Constraint::new(vec![clause])
    }

    pub fn predicate(predicate: PredicateSpec, labeler: Labeler) -> Self {
        Constraint::single(Clause::EdgePredicate { predicate, labeler })
    }

    pub fn with_pins(mut self, first: Option<GroupElement>, last: Option<GroupElement>) -> Self {
        self.pins = Pins { first, last };
        self
    }

    pub fn is_reversal_symmetric(&self) -> bool {
        self.clauses.iter().all(Clause::is_reversal_symmetric)
    }

    pub fn has_triple(&self) -> bool {
        self.clauses.iter().any(|c| matches!(c, Clause::RainbowTriple))
    }

    /// Checks that every clause makes sense over `group` and for an
    /// arrangement of `len` elements.
    pub fn validate(&self, group: &GroupSpec, len: usize) -> Result<(), ConstraintError> {
        if self.clauses.is_empty() {
            return Err(ConstraintError::Usage("constraint has no clauses".into()));
        }
        for clause in &self.clauses {
            match clause {
                Clause::RainbowDistance if !group.is_ordered() => {
                    return Err(ConstraintError::Usage(format!("distance needs an ordered group, not {group:?}")));
                }
                Clause::RainbowProduct if matches!(group, GroupSpec::IntegerVectors { .. }) => {
                    return Err(ConstraintError::Usage("Z^r has no products".into()));
                }
                Clause::RainbowTriple if len < 3 => {
                    return Err(ConstraintError::Usage("rainbow triple needs at least 3 elements".into()));
                }
                Clause::EdgePredicate { predicate, labeler } => {
                    predicate.validate()?;
                    if labeler.needs_ring() && matches!(group, GroupSpec::IntegerVectors { .. }) {
                        return Err(ConstraintError::Usage(format!("{labeler:?} needs a ring")));
                    }
                    if labeler.integers_only() && *group != GroupSpec::Integers {
                        return Err(ConstraintError::Usage(format!("{labeler:?} is defined over the integers only")));
                    }
                    if predicate.is_field_level() && !group.is_field() {
                        return Err(ConstraintError::Usage(format!("{predicate:?} needs a field")));
                    }
                    if !predicate.is_field_level() && group.rank() != 1 {
                        return Err(ConstraintError::Usage(format!("{predicate:?} needs rank-1 labels")));
                    }
                    if let Labeler::AffineProduct { a0 } = labeler {
                        group.validate_element(a0)?;
                    }
                }
                _ => {}
            }
        }
        for pin in [&self.pins.first, &self.pins.last].into_iter().flatten() {
            group.validate_element(pin)?;
        }
        Ok(())
    }
}

/// Edge label of a rainbow pair clause.
pub fn pair_label(st: &Structure, clause: &Clause, x: &GroupElement, y: &GroupElement) -> GroupElement {
    match clause {
        Clause::RainbowSum => st.add(x, y),
        Clause::RainbowDiff => st.sub(x, y),
        Clause::RainbowDistance => {
            let (d, e) = (st.sub(x, y), st.sub(y, x));
            // lexicographic max of d and -d is the absolute value in Z^r
            if d >= e {
                d
            } else {
                e
            }
        }
        Clause::RainbowWeighted => st.add(x, &st.add(y, y)),
        Clause::RainbowProduct => st.mul(x, y).expect("validated ring"),
        Clause::RainbowTriple | Clause::EdgePredicate { .. } => {
            panic!("{clause:?} is not a rainbow pair clause")
        }
    }
}

pub fn triple_label(st: &Structure, x: &GroupElement, y: &GroupElement, z: &GroupElement) -> GroupElement {
    st.add(&st.add(x, y), z)
}

/// The values a predicate must accept on edge `(x, y)`.
pub fn labeler_values(st: &Structure, labeler: &Labeler, x: &GroupElement, y: &GroupElement) -> Vec<GroupElement> {
    let mul = |a: &GroupElement, b: &GroupElement| st.mul(a, b).expect("validated ring");
    let c = |v: i128| st.constant(v).expect("validated ring");
    match labeler {
        Labeler::Sum => vec![st.add(x, y)],
        Labeler::Diff => vec![st.sub(x, y)],
        Labeler::AbsDiffAndSum => {
            let (a, b) = (x.as_scalar().unwrap(), y.as_scalar().unwrap());
            vec![GroupElement::scalar((a - b).abs()), GroupElement::scalar(a + b)]
        }
        Labeler::AbsSquareDiff => {
            let (a, b) = (x.as_scalar().unwrap(), y.as_scalar().unwrap());
            vec![GroupElement::scalar((a * a - b * b).abs())]
        }
        Labeler::SquarePlus => vec![st.add(&mul(x, x), y)],
        Labeler::SquareMinus => vec![st.sub(&mul(x, x), y)],
        Labeler::ProductMinusOne => vec![st.sub(&mul(x, y), &c(1))],
        Labeler::TwoProductMinusOne => vec![st.sub(&mul(&c(2), &mul(x, y)), &c(1))],
        Labeler::TwoProductPlusOne => vec![st.add(&mul(&c(2), &mul(x, y)), &c(1))],
        Labeler::AffineProduct { a0 } => vec![st.add(a0, &mul(x, y))],
    }
}

/// Direct (unmemoized) predicate evaluation on a label. Domain errors count
/// as failure: 0 is neither a primitive root nor in a residue class.
pub fn predicate_holds(st: &Structure, predicate: &PredicateSpec, value: &GroupElement) -> bool {
    if predicate.is_field_level() {
        return match (st.spec(), st.field()) {
            (GroupSpec::PrimeField { p }, None) => {
                let a = value.0[0];
                match predicate {
                    PredicateSpec::PrimitiveElement => {
                        numtheory::eval_predicate(PredicateSpec::PrimitiveRootMod { p: *p }, a).unwrap_or(false)
                    }
                    PredicateSpec::FieldSquare => numtheory::is_quadratic_residue(a, *p).unwrap_or(false),
                    _ => numtheory::is_quadratic_residue(a, *p).map(|r| !r).unwrap_or(false),
                }
            }
            (_, Some(f)) => {
                let idx = f.index_of(value);
                match predicate {
                    PredicateSpec::PrimitiveElement => f.is_primitive(idx),
                    PredicateSpec::FieldSquare => f.is_square(idx),
                    _ => idx != 0 && !f.is_square(idx),
                }
            }
            _ => false,
        };
    }
    value
        .as_scalar()
        .map(|k| numtheory::eval_predicate(*predicate, k).unwrap_or(false))
        .unwrap_or(false)
}

/// A complete search problem: a ground set inside a group, the arrangement
/// shape, and the constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub group: GroupSpec,
    pub shape: Shape,
    pub ground: Vec<GroupElement>,
    pub constraint: Constraint,
}

impl Instance {
    pub fn new(group: GroupSpec, shape: Shape, ground: Vec<GroupElement>, constraint: Constraint) -> Self {
        Instance { group, shape, ground, constraint }
    }

    pub fn integers(shape: Shape, ground: impl IntoIterator<Item = i128>, constraint: Constraint) -> Self {
        Instance::new(
            GroupSpec::Integers,
            shape,
            ground.into_iter().map(GroupElement::scalar).collect(),
            constraint,
        )
    }

    /// Validates elements, bounds, distinctness, pins and the constraint.
    pub fn validate(&self) -> Result<(), ConstraintError> {
        self.group.validate()?;
        if self.ground.is_empty() {
            return Err(ConstraintError::Usage("ground set is empty".into()));
        }
        let mut seen = BTreeSet::new();
        for x in &self.ground {
            self.group.validate_element(x)?;
            if x.0.iter().any(|c| c.abs() > ELEMENT_BOUND) {
                return Err(ConstraintError::Usage(format!("element {x} exceeds the 2^40 bound")));
            }
            if !seen.insert(x) {
                return Err(ConstraintError::Usage(format!("duplicate ground element {x}")));
            }
        }
        self.constraint.validate(&self.group, self.ground.len())?;
        for pin in [&self.constraint.pins.first, &self.constraint.pins.last].into_iter().flatten() {
            if !seen.contains(pin) {
                return Err(ConstraintError::Usage(format!("pinned element {pin} is not in the ground set")));
            }
        }
        if let (Some(a), Some(b)) = (&self.constraint.pins.first, &self.constraint.pins.last) {
            if a == b && self.ground.len() > 1 {
                return Err(ConstraintError::Usage("first and last pins coincide".into()));
            }
        }
        Ok(())
    }

    /// Ground set in ascending canonical order.
    pub fn sorted_ground(&self) -> Vec<GroupElement> {
        let mut g = self.ground.clone();
        g.sort();
        g
    }
}
