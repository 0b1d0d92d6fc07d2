//! Verified permutation constructions and an exact search engine for
//! rainbow- and predicate-constrained arrangements.

pub mod algebra;
pub mod conjectures;
pub mod constraint;
pub mod constructions;
pub mod numtheory;
pub mod records;
pub mod search;

pub use algebra::{GroupElement, GroupSpec};
pub use constraint::{Arrangement, Clause, Constraint, Instance, Labeler, Pins, Shape};
pub use numtheory::PredicateSpec;
pub use search::{check, search, SearchOutcome, SearchStatus};
