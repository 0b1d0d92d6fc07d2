//! Naive enumeration, the reference oracle for the kernel.

use std::collections::BTreeSet;

use itertools::Itertools;
use serde::Serialize;

use crate::algebra::GroupElement;
use crate::constraint::{Arrangement, Constraint, ConstraintError, Instance, Shape};
use crate::search::check::Checker;

pub const MAX_BRUTE_GROUND: usize = 9;
const LIST_LIMIT: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BruteForceReport {
    /// Satisfying arrangements up to the symmetries the constraint admits.
    pub canonical_count: usize,
    /// Satisfying sequences, every rotation and reflection counted.
    pub raw_count: usize,
    /// Canonical witnesses in ascending order, when there are at most 1000.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Vec<Arrangement>>,
}

impl BruteForceReport {
    pub fn exists(&self) -> bool {
        self.canonical_count > 0
    }
}

/// Rotates a circular arrangement so its minimum comes first and, when every
/// clause is reversal-symmetric, picks the lexicographically smaller of the
/// two orientations. A linear arrangement is only ever reversed (symmetric
/// clauses); pinned arrangements are returned unchanged.
pub fn canonical_form(arrangement: &Arrangement, constraint: &Constraint) -> Arrangement {
    let els = &arrangement.elements;
    if !constraint.pins.is_empty() || els.len() < 2 {
        return arrangement.clone();
    }
    if arrangement.shape == Shape::Linear {
        if !constraint.is_reversal_symmetric() {
            return arrangement.clone();
        }
        let rev: Vec<GroupElement> = els.iter().rev().cloned().collect();
        return Arrangement::new(arrangement.group.clone(), arrangement.shape, els.clone().min(rev));
    }
    let rotate = |v: &[GroupElement]| -> Vec<GroupElement> {
        let k = v.iter().position_min().unwrap();
        v[k..].iter().chain(&v[..k]).cloned().collect()
    };
    let mut best = rotate(els);
    if constraint.is_reversal_symmetric() {
        let rev: Vec<GroupElement> = els.iter().rev().cloned().collect();
        best = best.min(rotate(&rev));
    }
    Arrangement::new(arrangement.group.clone(), arrangement.shape, best)
}

/// Enumerates every ordering of the ground set and counts the satisfiers.
pub fn brute_force_enumerate(inst: &Instance) -> Result<BruteForceReport, ConstraintError> {
    if inst.ground.len() > MAX_BRUTE_GROUND {
        return Err(ConstraintError::Capacity(format!(
            "brute force supports at most {MAX_BRUTE_GROUND} elements"
        )));
    }
    inst.validate()?;
    let checker = Checker::new(&inst.group, &inst.constraint)?;
    let ground = inst.sorted_ground();
    let mut raw_count = 0;
    let mut canon = BTreeSet::new();
    for perm in ground.iter().cloned().permutations(ground.len()) {
        if checker.check_elements(inst.shape, &perm)?.pass {
            raw_count += 1;
            let arr = Arrangement::new(inst.group.clone(), inst.shape, perm);
            canon.insert(canonical_form(&arr, &inst.constraint).elements);
        }
    }
    let canonical_count = canon.len();
    let witnesses = (canonical_count <= LIST_LIMIT).then(|| {
        canon.into_iter().map(|els| Arrangement::new(inst.group.clone(), inst.shape, els)).collect()
    });
    Ok(BruteForceReport { canonical_count, raw_count, witnesses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::Clause;

    #[test]
    fn canonical_examples() {
        let sym = Constraint::single(Clause::RainbowSum);
        let dir = Constraint::single(Clause::RainbowDiff);
        let a = Arrangement::integers(Shape::Circular, &[3, 1, 2]);
        assert_eq!(canonical_form(&a, &sym).scalars().unwrap(), vec![1, 2, 3]);
        assert_eq!(canonical_form(&a, &dir).scalars().unwrap(), vec![1, 2, 3]);
        let b = Arrangement::integers(Shape::Circular, &[3, 2, 1]);
        assert_eq!(canonical_form(&b, &sym).scalars().unwrap(), vec![1, 2, 3]);
        assert_eq!(canonical_form(&b, &dir).scalars().unwrap(), vec![1, 3, 2]);
        let l = Arrangement::integers(Shape::Linear, &[2, 1, 3]);
        assert_eq!(canonical_form(&l, &sym).scalars().unwrap(), vec![2, 1, 3]);
    }

    #[test]
    fn trivial_counts() {
        let one = Instance::integers(Shape::Circular, [4], Constraint::single(Clause::RainbowDiff));
        assert_eq!(brute_force_enumerate(&one).unwrap().canonical_count, 1);
        let two = Instance::integers(Shape::Linear, [1, 2], Constraint::single(Clause::RainbowSum));
        let r = brute_force_enumerate(&two).unwrap();
        assert_eq!((r.canonical_count, r.raw_count), (1, 2));
        let directed = Instance::integers(Shape::Linear, [1, 2], Constraint::single(Clause::RainbowDiff));
        assert_eq!(brute_force_enumerate(&directed).unwrap().canonical_count, 2);
        let big = Instance::integers(Shape::Linear, 0..10, Constraint::single(Clause::RainbowSum));
        assert!(matches!(brute_force_enumerate(&big), Err(ConstraintError::Capacity(_))));
    }
}
