//! Modal definability and separability for the modal µ-calculus.
//!
//! The crate decides whether µ-calculus formulas are definable in, or
//! separable by, plain modal logic over several classes of tree models,
//! decides Craig interpolant existence for modal logic over d-ary trees,
//! builds separators, and ships brute-force oracles used to cross-check
//! every answer on small instances.

pub mod automata;
pub mod budget;
pub mod construct;
pub mod decide;
pub mod error;
pub mod formula;
pub mod games;
pub mod kripke;
pub mod oracle;
pub mod translate;
mod util;

pub use budget::Budget;
pub use decide::{ModelClass, Verdict};
pub use error::{Error, Result};
pub use formula::{Formula, Signature};
pub use kripke::KripkeTree;
