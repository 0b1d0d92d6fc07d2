//! Certificate checker, backtracking kernel and brute-force oracle.

mod brute;
mod check;
mod kernel;
mod pairing;

pub use brute::{brute_force_enumerate, canonical_form, BruteForceReport, MAX_BRUTE_GROUND};
pub use check::{check, CheckReport, Checker, Violation};
pub use kernel::{search, SearchOutcome, SearchStatus, DEFAULT_BUDGET, MAX_GROUND, MAX_TRIPLE_GROUND};
pub use pairing::{brute_force_pairings, check_pairing, search_pairing, PairingOutcome, MAX_PAIRING};
