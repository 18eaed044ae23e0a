//! Brute-force oracles: direct fixpoint evaluation and exhaustive searches
//! that share no code with the automata pipeline.

mod brute;
mod eval;
mod joint;

pub use brute::{
    equivalence_bruteforce, iso_consistency_bruteforce, prefix_extendable, quotient_member_bruteforce, quotient_member_explicit,
};
pub use eval::{eval_structure, eval_tree, Structure};
pub use joint::{joint_consistency_bruteforce, joint_consistency_with, realized_prefixes, JointOutcome, Relation};
