//! Exact backtracking over arrangements of a ground set of at most
//! [`MAX_GROUND`] elements.
//!
//! Everything label-related is precomputed into dense tables indexed by the
//! positions of elements in the sorted ground set, so the inner loop only
//! touches bitsets and `u32` label ids.

use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::algebra::{GroupElement, Structure};
use crate::constraint::{
    labeler_values, pair_label, predicate_holds, triple_label, Arrangement, Clause, ConstraintError, Instance,
    Shape,
};
use crate::numtheory::PredicateTable;
use crate::search::check::Checker;

const WORDS: usize = 4;
pub const MAX_GROUND: usize = 64 * WORDS;
/// Triple labels are tabulated densely (`m^3` entries).
pub const MAX_TRIPLE_GROUND: usize = 128;
pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    Witness,
    Exhausted,
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub status: SearchStatus,
    pub witness: Option<Arrangement>,
    pub nodes: u64,
    pub elapsed_ms: u64,
}

#[derive(Clone, Copy, Default, PartialEq, Eq, Debug)]
struct Bits([u64; WORDS]);

impl Bits {
    #[inline]
    fn set(&mut self, i: usize) {
        self.0[i >> 6] |= 1 << (i & 63);
    }
    #[inline]
    fn clear(&mut self, i: usize) {
        self.0[i >> 6] &= !(1 << (i & 63));
    }
    #[inline]
    fn get(&self, i: usize) -> bool {
        self.0[i >> 6] >> (i & 63) & 1 == 1
    }
    #[inline]
    fn and(self, o: Bits) -> Bits {
        Bits(std::array::from_fn(|w| self.0[w] & o.0[w]))
    }
    #[inline]
    fn or(self, o: Bits) -> Bits {
        Bits(std::array::from_fn(|w| self.0[w] | o.0[w]))
    }
    #[inline]
    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
    #[inline]
    fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }
    fn single(i: usize) -> Bits {
        let mut b = Bits::default();
        b.set(i);
        b
    }
    fn iter(self) -> impl Iterator<Item = usize> {
        (0..WORDS).flat_map(move |w| {
            let mut word = self.0[w];
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let t = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + t)
            })
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Flow {
    Found,
    Exhausted,
    Budget,
}

const TRIPLE: u32 = u32::MAX;

struct Kernel {
    m: usize,
    circular: bool,
    succ: Vec<Bits>,
    pred: Vec<Bits>,
    /// Only predicate clauses make adjacency sparse; rainbow-only searches
    /// skip the degree pruning.
    sparse: bool,
    pair: Vec<Vec<u32>>,
    pair_used: Vec<Vec<bool>>,
    triple: Vec<u32>,
    triple_used: Vec<bool>,
    has_triple: bool,
    above: Vec<Bits>,
    first_pin: Option<usize>,
    last_pin: Option<usize>,
    fix_first: bool,
    orient: bool,
    seq: Vec<usize>,
    unplaced: Bits,
    trail: Vec<(u32, u32)>,
    nodes: u64,
    budget: u64,
}

fn intern(ids: &mut HashMap<GroupElement, u32>, label: GroupElement) -> u32 {
    let next = ids.len() as u32;
    *ids.entry(label).or_insert(next)
}

impl Kernel {
    fn build(inst: &Instance, ground: &[GroupElement], st: &Structure, budget: u64) -> Result<Self, ConstraintError> {
        let m = ground.len();
        let c = &inst.constraint;
        let mut succ = vec![Bits::default(); m];
        for (u, row) in succ.iter_mut().enumerate() {
            for v in 0..m {
                if u != v {
                    row.set(v);
                }
            }
        }
        let mut sparse = false;
        let mut pair = Vec::new();
        let mut has_triple = false;
        for clause in &c.clauses {
            match clause {
                Clause::EdgePredicate { predicate, labeler } => {
                    sparse = true;
                    let mut vals = Vec::with_capacity(m * m);
                    for u in 0..m {
                        for v in 0..m {
                            if u != v {
                                vals.push(labeler_values(st, labeler, &ground[u], &ground[v]));
                            } else {
                                vals.push(Vec::new());
                            }
                        }
                    }
                    let holds: Box<dyn Fn(&GroupElement) -> bool> = if predicate.is_field_level() {
                        Box::new(|x| predicate_holds(st, predicate, x))
                    } else {
                        let scalars = vals.iter().flatten().filter_map(GroupElement::as_scalar);
                        let (lo, hi) = scalars.fold((i128::MAX, i128::MIN), |(a, b), x| (a.min(x), b.max(x)));
                        let table = PredicateTable::build(*predicate, lo.min(hi), hi)?;
                        Box::new(move |x| x.as_scalar().is_some_and(|k| table.get(k)))
                    };
                    for u in 0..m {
                        for v in 0..m {
                            if u != v && !vals[u * m + v].iter().all(&holds) {
                                succ[u].clear(v);
                            }
                        }
                    }
                }
                Clause::RainbowTriple => has_triple = true,
                _ => {
                    let mut ids = HashMap::new();
                    let mut table = vec![0u32; m * m];
                    for u in 0..m {
                        for v in 0..m {
                            if u != v {
                                table[u * m + v] = intern(&mut ids, pair_label(st, clause, &ground[u], &ground[v]));
                            }
                        }
                    }
                    pair.push(table);
                }
            }
        }
        let pair_used = pair.iter().map(|t| vec![false; t.iter().max().map_or(0, |&x| x as usize + 1)]).collect();

        let mut triple = Vec::new();
        if has_triple {
            if m > MAX_TRIPLE_GROUND {
                return Err(ConstraintError::Capacity(format!(
                    "rainbow triple search supports at most {MAX_TRIPLE_GROUND} elements"
                )));
            }
            let mut ids = HashMap::new();
            triple = vec![0u32; m * m * m];
            for a in 0..m {
                for b in 0..m {
                    for d in 0..m {
                        if a != b && b != d && a != d {
                            triple[(a * m + b) * m + d] =
                                intern(&mut ids, triple_label(st, &ground[a], &ground[b], &ground[d]));
                        }
                    }
                }
            }
        }
        let triple_used = vec![false; triple.iter().max().map_or(0, |&x| x as usize + 1)];

        let mut pred = vec![Bits::default(); m];
        for u in 0..m {
            for v in succ[u].iter() {
                pred[v].set(u);
            }
        }
        let above = (0..m)
            .map(|i| {
                let mut b = Bits::default();
                for j in i + 1..m {
                    b.set(j);
                }
                b
            })
            .collect();
        let find = |x: &Option<GroupElement>| x.as_ref().map(|e| ground.binary_search(e).expect("validated pin"));
        let circular = inst.shape == Shape::Circular;
        let unpinned = c.pins.is_empty();
        let mut unplaced = Bits::default();
        for i in 0..m {
            unplaced.set(i);
        }
        Ok(Kernel {
            m,
            circular,
            succ,
            pred,
            sparse,
            pair,
            pair_used,
            triple,
            triple_used,
            has_triple,
            above,
            first_pin: find(&c.pins.first),
            last_pin: find(&c.pins.last),
            fix_first: circular && unpinned,
            orient: circular && unpinned && m >= 3 && c.is_reversal_symmetric(),
            seq: Vec::with_capacity(m),
            unplaced,
            trail: Vec::new(),
            nodes: 0,
            budget,
        })
    }

    #[inline]
    fn tri(&self, a: usize, b: usize, d: usize) -> u32 {
        self.triple[(a * self.m + b) * self.m + d]
    }

    #[inline]
    fn mark(&mut self, clause: u32, label: u32) -> bool {
        let used = if clause == TRIPLE {
            &mut self.triple_used[label as usize]
        } else {
            &mut self.pair_used[clause as usize][label as usize]
        };
        if *used {
            return false;
        }
        *used = true;
        self.trail.push((clause, label));
        true
    }

    fn rollback(&mut self, to: usize) {
        while self.trail.len() > to {
            let (clause, label) = self.trail.pop().unwrap();
            if clause == TRIPLE {
                self.triple_used[label as usize] = false;
            } else {
                self.pair_used[clause as usize][label as usize] = false;
            }
        }
    }

    /// Marks every label created by putting `v` at position `pos`, including
    /// the closing edge and triples of a circle. Leaves the trail untouched
    /// on failure.
    fn place(&mut self, pos: usize, v: usize) -> bool {
        let start = self.trail.len();
        let ok = self.place_labels(pos, v);
        if !ok {
            self.rollback(start);
        }
        ok
    }

    fn place_labels(&mut self, pos: usize, v: usize) -> bool {
        let m = self.m;
        if pos == 0 {
            return true;
        }
        let u = self.seq[pos - 1];
        for c in 0..self.pair.len() {
            if !self.mark(c as u32, self.pair[c][u * m + v]) {
                return false;
            }
        }
        if self.has_triple && pos >= 2 && !self.mark(TRIPLE, self.tri(self.seq[pos - 2], u, v)) {
            return false;
        }
        if self.circular && pos == m - 1 {
            let s0 = self.seq[0];
            if !self.succ[v].get(s0) {
                return false;
            }
            for c in 0..self.pair.len() {
                if !self.mark(c as u32, self.pair[c][v * m + s0]) {
                    return false;
                }
            }
            if self.has_triple {
                let (t1, t2) = (self.tri(u, v, s0), self.tri(v, s0, self.seq[1]));
                if !self.mark(TRIPLE, t1) || !self.mark(TRIPLE, t2) {
                    return false;
                }
            }
        }
        true
    }

    /// Feasible next elements at `pos`, or empty if the partial arrangement
    /// provably cannot be completed.
    fn candidates(&self, pos: usize) -> Bits {
        let m = self.m;
        if pos == 0 {
            if let Some(f) = self.first_pin {
                return Bits::single(f);
            }
            if self.fix_first {
                return Bits::single(0);
            }
            let mut all = self.unplaced;
            if let (Some(l), true) = (self.last_pin, m > 1) {
                all.clear(l);
            }
            return all;
        }
        let end = self.seq[pos - 1];
        let mut cands = self.succ[end].and(self.unplaced);
        if let Some(l) = self.last_pin {
            if pos == m - 1 {
                cands = cands.and(Bits::single(l));
            } else {
                cands.clear(l);
            }
        }
        if self.orient && pos >= 2 {
            let higher = self.unplaced.and(self.above[self.seq[1]]);
            if higher.is_empty() {
                return Bits::default();
            }
            if pos == m - 1 {
                cands = cands.and(higher);
            }
        }
        if cands.is_empty() || !self.sparse || pos == m - 1 {
            return cands;
        }
        match self.degree_filter(end) {
            Some(Some(forced)) => cands.and(Bits::single(forced)),
            Some(None) => cands,
            None => Bits::default(),
        }
    }

    /// Degree pruning over the unplaced elements: each needs a feasible
    /// predecessor and successor among what remains. Returns `None` when the
    /// branch is dead, `Some(Some(w))` when `w` is the only element that can
    /// follow the current end.
    fn degree_filter(&self, end: usize) -> Option<Option<usize>> {
        let start = self.seq[0];
        let end_set = Bits::single(end);
        let mut forced_next = None;
        let mut forced_count = 0;
        let mut closing_count = 0;
        let mut dead_ends = 0;
        for w in self.unplaced.iter() {
            let ins = self.pred[w].and(self.unplaced.or(end_set));
            if ins.is_empty() {
                return None;
            }
            if ins == end_set {
                forced_count += 1;
                forced_next = Some(w);
            }
            if self.circular {
                let outs = self.succ[w].and(self.unplaced.or(Bits::single(start)));
                if outs.is_empty() {
                    return None;
                }
                // in a circle of length >= 3 the two neighbours differ
                if self.m >= 3 && ins == outs && ins.count() == 1 {
                    return None;
                }
                if outs.count() == 1 && outs.get(start) {
                    closing_count += 1;
                }
            } else {
                let outs = self.succ[w].and(self.unplaced);
                if outs.is_empty() {
                    if self.last_pin.is_some_and(|l| l != w) {
                        return None;
                    }
                    dead_ends += 1;
                }
            }
        }
        if forced_count > 1 || closing_count > 1 || dead_ends > 1 {
            return None;
        }
        Some(if forced_count == 1 { forced_next } else { None })
    }

    fn dfs(&mut self, pos: usize) -> Flow {
        if pos == self.m {
            return Flow::Found;
        }
        for v in self.candidates(pos).iter() {
            if self.nodes == self.budget {
                return Flow::Budget;
            }
            self.nodes += 1;
            let mark = self.trail.len();
            if !self.place(pos, v) {
                continue;
            }
            self.seq.push(v);
            self.unplaced.clear(v);
            match self.dfs(pos + 1) {
                Flow::Exhausted => {}
                other => return other,
            }
            self.seq.pop();
            self.unplaced.set(v);
            self.rollback(mark);
        }
        Flow::Exhausted
    }
}

/// Searches for an arrangement of the instance's ground set satisfying its
/// constraint, trying extensions in ascending element order.
///
/// Circular searches without pins fix the smallest element first, and also
/// require `second < last` when every clause is reversal-symmetric; so
/// `Exhausted` means no arrangement exists at all. A node is one attempted
/// placement; the search stops with `BudgetExceeded` after `budget` nodes.
pub fn search(inst: &Instance, budget: u64) -> Result<SearchOutcome, ConstraintError> {
    let started = Instant::now();
    if budget == 0 {
        return Err(ConstraintError::Usage("budget must be at least 1 node".into()));
    }
    inst.validate()?;
    if inst.ground.len() > MAX_GROUND {
        return Err(ConstraintError::Capacity(format!("search supports at most {MAX_GROUND} elements")));
    }
    let ground = inst.sorted_ground();
    let st = Structure::new(&inst.group)?;
    let mut kernel = Kernel::build(inst, &ground, &st, budget)?;
    let flow = kernel.dfs(0);
    let (status, witness) = match flow {
        Flow::Found => {
            let elements = kernel.seq.iter().map(|&i| ground[i].clone()).collect();
            let arr = Arrangement::new(inst.group.clone(), inst.shape, elements);
            let report = Checker::new(&inst.group, &inst.constraint)?.check(&arr)?;
            assert!(report.pass, "search produced a witness the checker rejects: {arr} {report:?}");
            (SearchStatus::Witness, Some(arr))
        }
        Flow::Exhausted => (SearchStatus::Exhausted, None),
        Flow::Budget => (SearchStatus::BudgetExceeded, None),
    };
    Ok(SearchOutcome { status, witness, nodes: kernel.nodes, elapsed_ms: started.elapsed().as_millis() as u64 })
}
