//! Two-numbering search: a bijection `sigma` of a set `A` with all the sums
//! `a + 2 sigma(a)` pairwise distinct.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::algebra::{GroupElement, GroupSpec, Structure};
use crate::constraint::ConstraintError;
use crate::search::kernel::SearchStatus;

/// The pairing search grows factorially squared; six elements is the cap.
pub const MAX_PAIRING: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingOutcome {
    pub status: SearchStatus,
    /// `sigma(a)` for each `a` of the sorted set, when a pairing was found.
    pub partners: Option<Vec<GroupElement>>,
    pub nodes: u64,
    pub elapsed_ms: u64,
}

fn prepare(group: &GroupSpec, set: &[GroupElement]) -> Result<(Structure, Vec<GroupElement>), ConstraintError> {
    if set.is_empty() || set.len() > MAX_PAIRING {
        return Err(ConstraintError::Capacity(format!("pairing search needs 1..={MAX_PAIRING} elements")));
    }
    let st = Structure::new(group)?;
    let mut sorted = set.to_vec();
    sorted.sort();
    for x in &sorted {
        group.validate_element(x)?;
    }
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(ConstraintError::Usage("pairing set has repeated elements".into()));
    }
    Ok((st, sorted))
}

/// Direct check that `partners` is a rearrangement of `set` (sorted) with
/// all `a_i + 2 b_i` distinct.
pub fn check_pairing(group: &GroupSpec, set: &[GroupElement], partners: &[GroupElement]) -> Result<bool, ConstraintError> {
    let (st, sorted) = prepare(group, set)?;
    let mut ps = partners.to_vec();
    ps.sort();
    if ps != sorted {
        return Ok(false);
    }
    let mut seen = HashSet::new();
    Ok(sorted.iter().zip(partners).all(|(a, b)| seen.insert(st.add(a, &st.add(b, b)))))
}

/// Backtracking over partner choices for the sorted elements in order,
/// partners tried ascending.
pub fn search_pairing(group: &GroupSpec, set: &[GroupElement], budget: u64) -> Result<PairingOutcome, ConstraintError> {
    let started = Instant::now();
    if budget == 0 {
        return Err(ConstraintError::Usage("budget must be at least 1 node".into()));
    }
    let (st, sorted) = prepare(group, set)?;
    let n = sorted.len();
    let mut ids = HashMap::new();
    let label: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let next = ids.len();
                    *ids.entry(st.add(&sorted[i], &st.add(&sorted[j], &sorted[j]))).or_insert(next)
                })
                .collect()
        })
        .collect();

    struct State<'a> {
        label: &'a [Vec<usize>],
        used_label: Vec<bool>,
        used_partner: Vec<bool>,
        choice: Vec<usize>,
        nodes: u64,
        budget: u64,
    }
    fn go(s: &mut State, i: usize) -> Option<bool> {
        let n = s.used_partner.len();
        if i == n {
            return Some(true);
        }
        for j in 0..n {
            if s.used_partner[j] {
                continue;
            }
            if s.nodes == s.budget {
                return None;
            }
            s.nodes += 1;
            let l = s.label[i][j];
            if s.used_label[l] {
                continue;
            }
            s.used_label[l] = true;
            s.used_partner[j] = true;
            s.choice.push(j);
            match go(s, i + 1) {
                Some(false) => {}
                other => return other,
            }
            s.choice.pop();
            s.used_partner[j] = false;
            s.used_label[l] = false;
        }
        Some(false)
    }
    let mut s = State {
        label: &label,
        used_label: vec![false; ids.len()],
        used_partner: vec![false; n],
        choice: Vec::new(),
        nodes: 0,
        budget,
    };
    let (status, partners) = match go(&mut s, 0) {
        Some(true) => {
            let partners: Vec<GroupElement> = s.choice.iter().map(|&j| sorted[j].clone()).collect();
            assert!(check_pairing(group, &sorted, &partners)?, "pairing search produced an invalid pairing");
            (SearchStatus::Witness, Some(partners))
        }
        Some(false) => (SearchStatus::Exhausted, None),
        None => (SearchStatus::BudgetExceeded, None),
    };
    Ok(PairingOutcome { status, partners, nodes: s.nodes, elapsed_ms: started.elapsed().as_millis() as u64 })
}

/// Number of valid pairings, by enumerating every rearrangement.
pub fn brute_force_pairings(group: &GroupSpec, set: &[GroupElement]) -> Result<usize, ConstraintError> {
    let (_, sorted) = prepare(group, set)?;
    let mut count = 0;
    for perm in sorted.iter().cloned().permutations(sorted.len()) {
        if check_pairing(group, &sorted, &perm)? {
            count += 1;
        }
    }
    Ok(count)
}
