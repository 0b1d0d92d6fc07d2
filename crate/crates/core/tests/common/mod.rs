//! Small instances drawn from every problem's instance families.

#![allow(dead_code)]

use permlab::conjectures::{instance, Campaign, ConjectureId, InstanceParams, Task};
use permlab::{Clause, GroupElement, GroupSpec, Instance};

/// A search instance, or a pairing problem, with the plan entry it came from.
pub enum Small {
    Search(Instance),
    Pairing(GroupSpec, Vec<GroupElement>),
}

pub struct Drawn {
    pub id: ConjectureId,
    pub params: InstanceParams,
    pub problem: Small,
}

/// Range for a family: wide enough to reach every shape the family has,
/// narrow enough that most instances stay small.
fn range(id: ConjectureId, family: &str, max_ground: usize) -> (i64, i64) {
    use ConjectureId::*;
    let max = max_ground as i64;
    match (id, family) {
        (DistancePathFromStart | DistanceCircleEndsAdjacent | SumsAndProducts, "exceptional") => (4, 6),
        (DistancePathFromStart | DistanceCircleEndsAdjacent | SumsAndProducts, _) => (1, max),
        (DifferencePathInGroup | SumOrDifferenceCycleInGroup | WeightedSums | TripleSums, "full") => (1, max),
        (DifferencePathInGroup | SumOrDifferenceCycleInGroup | WeightedSums | TripleSums, _) => (1, max + 3),
        _ => (1, 4 * max + 3),
    }
}

fn kinds(task: Task) -> Vec<Small> {
    match task {
        Task::Search(i) | Task::SquareCircle { instance: i, .. } => vec![Small::Search(i)],
        Task::Conditional { unpinned, pinned } => vec![Small::Search(unpinned), Small::Search(pinned)],
        Task::Pairing { group, set } => vec![Small::Pairing(group, set)],
        Task::Skipped(_) => vec![],
    }
}

fn size(s: &Small) -> usize {
    match s {
        Small::Search(i) => i.ground.len(),
        Small::Pairing(_, set) => set.len(),
    }
}

/// Every instance with at most `max_ground` elements from every family's
/// plan over a small range, in a fixed order.
pub fn small_instances(max_ground: usize) -> Vec<Drawn> {
    let mut out = Vec::new();
    for id in ConjectureId::ALL {
        for &family in id.families() {
            let (from, to) = range(id, family, max_ground);
            let mut campaign = Campaign::new(id, from, to);
            campaign.family = family.to_string();
            for params in campaign.plan().unwrap() {
                for problem in kinds(instance(id, &params).unwrap()) {
                    if size(&problem) <= max_ground {
                        out.push(Drawn { id, params: params.clone(), problem });
                    }
                }
            }
        }
    }
    out
}

/// Short name of a clause's kind, for coverage bookkeeping.
pub fn kind_name(c: &Clause) -> &'static str {
    match c {
        Clause::RainbowSum => "rainbow_sum",
        Clause::RainbowDiff => "rainbow_diff",
        Clause::RainbowDistance => "rainbow_distance",
        Clause::RainbowWeighted => "rainbow_weighted",
        Clause::RainbowTriple => "rainbow_triple",
        Clause::RainbowProduct => "rainbow_product",
        Clause::EdgePredicate { .. } => "edge_predicate",
    }
}

pub const ALL_KINDS: [&str; 8] = [
    "rainbow_sum",
    "rainbow_diff",
    "rainbow_distance",
    "rainbow_weighted",
    "rainbow_triple",
    "rainbow_product",
    "edge_predicate",
    "pairing",
];
