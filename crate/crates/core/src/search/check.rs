//! Independent certificate checker: recomputes every label from scratch.

use std::collections::HashMap;

use serde::Serialize;

use crate::algebra::{GroupElement, Structure};
use crate::constraint::{
    edge_positions, labeler_values, pair_label, predicate_holds, triple_label, triple_positions,
    Arrangement, Clause, Constraint, ConstraintError,
};

/// Why an arrangement fails. `clause` is `None` for structural problems
/// (repeated elements, violated pins).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub clause: Option<usize>,
    pub reason: String,
    pub positions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<Violation>,
}

impl CheckReport {
    fn ok() -> Self {
        CheckReport { pass: true, violation: None }
    }

    fn fail(clause: Option<usize>, reason: String, positions: Vec<usize>) -> Self {
        CheckReport { pass: false, violation: Some(Violation { clause, reason, positions }) }
    }
}

/// Checker bound to one group and constraint, for checking many
/// arrangements without re-validating.
#[derive(Debug, Clone)]
pub struct Checker {
    st: Structure,
    constraint: Constraint,
}

impl Checker {
    pub fn new(group: &crate::algebra::GroupSpec, constraint: &Constraint) -> Result<Self, ConstraintError> {
        let st = Structure::new(group)?;
        for clause in &constraint.clauses {
            // length-dependent validation happens per arrangement
            if !matches!(clause, Clause::RainbowTriple) {
                Constraint::single(clause.clone()).validate(group, usize::MAX)?;
            }
        }
        if constraint.clauses.is_empty() {
            return Err(ConstraintError::Usage("constraint has no clauses".into()));
        }
        Ok(Checker { st, constraint: constraint.clone() })
    }

    pub fn check_elements(
        &self,
        shape: crate::constraint::Shape,
        elements: &[GroupElement],
    ) -> Result<CheckReport, ConstraintError> {
        let group = self.st.spec();
        if elements.is_empty() {
            return Err(ConstraintError::Usage("empty arrangement".into()));
        }
        for x in elements {
            group.validate_element(x)?;
        }
        if self.constraint.has_triple() && elements.len() < 3 {
            return Err(ConstraintError::Usage("rainbow triple needs at least 3 elements".into()));
        }

        let mut seen: HashMap<&GroupElement, usize> = HashMap::new();
        for (i, x) in elements.iter().enumerate() {
            if let Some(&j) = seen.get(x) {
                return Ok(CheckReport::fail(None, format!("element {x} repeated"), vec![j, i]));
            }
            seen.insert(x, i);
        }
        let pins = &self.constraint.pins;
        if let Some(f) = &pins.first {
            if &elements[0] != f {
                return Ok(CheckReport::fail(None, format!("first element must be {f}"), vec![0]));
            }
        }
        if let Some(l) = &pins.last {
            let last = elements.len() - 1;
            if &elements[last] != l {
                return Ok(CheckReport::fail(None, format!("last element must be {l}"), vec![last]));
            }
        }

        let edges = edge_positions(shape, elements.len());
        for (ci, clause) in self.constraint.clauses.iter().enumerate() {
            match clause {
                Clause::RainbowTriple => {
                    let mut labels: HashMap<GroupElement, usize> = HashMap::new();
                    for (t, &(a, b, c)) in triple_positions(shape, elements.len()).iter().enumerate() {
                        let l = triple_label(&self.st, &elements[a], &elements[b], &elements[c]);
                        if let Some(&prev) = labels.get(&l) {
                            return Ok(CheckReport::fail(
                                Some(ci),
                                format!("triple sum {l} repeated"),
                                vec![prev, t],
                            ));
                        }
                        labels.insert(l, t);
                    }
                }
                Clause::EdgePredicate { predicate, labeler } => {
                    for &(a, b) in &edges {
                        for v in labeler_values(&self.st, labeler, &elements[a], &elements[b]) {
                            if !predicate_holds(&self.st, predicate, &v) {
                                return Ok(CheckReport::fail(
                                    Some(ci),
                                    format!("edge label {v} fails {predicate:?}"),
                                    vec![a, b],
                                ));
                            }
                        }
                    }
                }
                _ => {
                    let mut labels: HashMap<GroupElement, usize> = HashMap::new();
                    for &(a, b) in &edges {
                        let l = pair_label(&self.st, clause, &elements[a], &elements[b]);
                        if let Some(&prev) = labels.get(&l) {
                            return Ok(CheckReport::fail(
                                Some(ci),
                                format!("{} label {l} repeated", clause.name()),
                                vec![prev, a],
                            ));
                        }
                        labels.insert(l, a);
                    }
                }
            }
        }
        Ok(CheckReport::ok())
    }

    pub fn check(&self, arrangement: &Arrangement) -> Result<CheckReport, ConstraintError> {
        if &arrangement.group != self.st.spec() {
            return Err(ConstraintError::Usage("arrangement group differs from checker group".into()));
        }
        self.check_elements(arrangement.shape, &arrangement.elements)
    }
}

/// Checks `arrangement` against `constraint` by direct recomputation.
///
/// Violation positions are element positions: both endpoints of the failing
/// edge, or the edge/triple start positions of two colliding labels.
pub fn check(arrangement: &Arrangement, constraint: &Constraint) -> Result<CheckReport, ConstraintError> {
    Checker::new(&arrangement.group, constraint)?.check(arrangement)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::GroupSpec;
    use crate::constraint::{Labeler, Shape};
    use crate::numtheory::PredicateSpec;

    fn over(group: GroupSpec, shape: Shape, xs: &[i128]) -> Arrangement {
        Arrangement::new(group, shape, xs.iter().map(|&x| GroupElement::scalar(x)).collect())
    }

    #[test]
    fn primitive_root_sums_mod_11() {
        let a = over(GroupSpec::PrimeField { p: 11 }, Shape::Circular, &[0, 6, 7, 1, 5, 3, 10, 8, 9, 4, 2]);
        let c = Constraint::predicate(PredicateSpec::PrimitiveRootMod { p: 11 }, Labeler::Sum);
        assert!(check(&a, &c).unwrap().pass);
    }

    #[test]
    fn product_minus_one_primitive_roots() {
        let a = Arrangement::integers(Shape::Circular, &[1, 9, 2, 4, 5, 8, 10, 3, 6, 7]);
        let c = Constraint::predicate(PredicateSpec::PrimitiveRootMod { p: 11 }, Labeler::ProductMinusOne);
        assert!(check(&a, &c).unwrap().pass);
    }

    #[test]
    fn sums_mod_4_collide() {
        let a = over(GroupSpec::CyclicProduct { moduli: vec![4] }, Shape::Circular, &[1, 2, 3, 0]);
        let r = check(&a, &Constraint::single(Clause::RainbowSum)).unwrap();
        assert!(!r.pass);
        let v = r.violation.unwrap();
        assert_eq!(v.clause, Some(0));
        // edges (1,2) and (3,0) both sum to 3
        assert_eq!(v.positions, vec![0, 2]);
    }

    #[test]
    fn structural_failures() {
        let a = Arrangement::integers(Shape::Linear, &[1, 2, 1]);
        let r = check(&a, &Constraint::single(Clause::RainbowSum)).unwrap();
        assert_eq!(r.violation.unwrap().positions, vec![0, 2]);
        let a = Arrangement::integers(Shape::Linear, &[1, 2]);
        assert!(check(&a, &Constraint::single(Clause::RainbowTriple)).is_err());
        let pinned = Constraint::single(Clause::RainbowSum).with_pins(None, Some(GroupElement::scalar(1)));
        assert!(!check(&a, &pinned).unwrap().pass);
        let bad = over(GroupSpec::CyclicProduct { moduli: vec![4] }, Shape::Linear, &[1, 5]);
        assert!(check(&bad, &Constraint::single(Clause::RainbowSum)).is_err());
    }

    #[test]
    fn singleton_and_pair_circles() {
        let one = Arrangement::integers(Shape::Circular, &[5]);
        assert!(check(&one, &Constraint::single(Clause::RainbowDiff)).unwrap().pass);
        // two-element circle: both x+y edges coincide
        let two = Arrangement::integers(Shape::Circular, &[1, 2]);
        assert!(!check(&two, &Constraint::single(Clause::RainbowSum)).unwrap().pass);
        assert!(check(&two, &Constraint::single(Clause::RainbowDiff)).unwrap().pass);
    }
}
