//! Property tests: library answers against the brute-force oracles on
//! randomly generated small formulas.

use modsep::construct::simplify;
use modsep::decide::{decide_separability, entails};
use modsep::formula::{normalize, parse_formula};
use modsep::games::model_check;
use modsep::kripke::enumerate_trees;
use modsep::oracle::{equivalence_bruteforce, eval_tree, joint_consistency_with, JointOutcome, Relation};
use modsep::{Budget, Formula, KripkeTree, ModelClass, Signature};
use proptest::prelude::*;

fn modal_over(props: &'static [&'static str]) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::True),
        Just(Formula::False),
        proptest::sample::select(props).prop_map(Formula::prop),
        proptest::sample::select(props).prop_map(|p| Formula::NegProp(p.to_string())),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Formula::and(x, y)),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Formula::or(x, y)),
            inner.clone().prop_map(Formula::dia),
            inner.prop_map(Formula::boxed),
        ]
    })
}

fn modal() -> impl Strategy<Value = Formula> {
    modal_over(&["a"])
}

/// Small fixpoint formulas built from templates over a modal body.
fn fixpoint() -> impl Strategy<Value = Formula> {
    (modal(), 0..4usize).prop_map(|(g, t)| {
        let src = match t {
            0 => format!("mu X. ({g}) | <>X"),
            1 => format!("nu X. ({g}) & []X"),
            2 => format!("nu X. ({g}) & <>X"),
            _ => format!("mu X. ({g}) | []X"),
        };
        parse_formula(&src).unwrap()
    })
}

fn small_trees() -> Vec<KripkeTree> {
    enumerate_trees(&Signature::from_names(["a"]), 2, 3, usize::MAX).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn display_round_trips(phi in prop_oneof![modal_over(&["a", "b"]), fixpoint()]) {
        prop_assert_eq!(parse_formula(&phi.to_string()).unwrap(), phi);
    }

    #[test]
    fn model_checker_matches_oracle(phi in prop_oneof![modal(), fixpoint()]) {
        for t in small_trees().iter().step_by(97) {
            prop_assert_eq!(model_check(t, &phi).unwrap(), eval_tree(t, &phi).unwrap(), "{} on {}", phi, t.to_sexpr());
        }
    }

    #[test]
    fn simplify_and_normalize_preserve_semantics(phi in modal()) {
        let neg = normalize(&Formula::not(Formula::not(phi.clone()))).unwrap();
        prop_assert!(equivalence_bruteforce(&phi, &simplify(&phi), 2, 3).is_none());
        prop_assert!(equivalence_bruteforce(&phi, &neg, 2, 3).is_none());
    }

    #[test]
    fn entailment_matches_finite_models(phi in modal(), psi in modal()) {
        // Modal formulas have the finite tree property, so a countermodel of
        // depth ≤ 3 and outdegree ≤ 2 exists whenever entailment fails over T².
        let claimed = entails(&phi, &psi, &ModelClass::Binary).unwrap();
        let imp = Formula::or(normalize(&Formula::not(phi.clone())).unwrap(), psi.clone());
        let brute = equivalence_bruteforce(&imp, &Formula::True, 2, 3).is_none();
        prop_assert_eq!(claimed, brute, "{} |= {}", phi, psi);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn separability_matches_oracle(phi in fixpoint(), psi in prop_oneof![modal(), fixpoint()]) {
        let sigma = phi.sig().union(&psi.sig());
        let v = decide_separability(&phi, &psi, &ModelClass::Binary, None).unwrap();
        let budget = Budget::new(20_000_000);
        let probe = v.bounds.first_failure.filter(|_| v.decision).unwrap_or(2).min(2);
        let joint = joint_consistency_with(&phi, &psi, &sigma, probe, Some(2), Relation::Bisim, &budget).unwrap();
        match joint {
            JointOutcome::Found(..) => prop_assert!(!v.decision || probe < v.bounds.first_failure.unwrap(), "{} / {}", phi, psi),
            JointOutcome::ExhaustedNone => prop_assert!(v.decision, "{} / {}", phi, psi),
            JointOutcome::BudgetHit => {}
        }
        let swapped = decide_separability(&psi, &phi, &ModelClass::Binary, None).unwrap();
        prop_assert_eq!(v.decision, swapped.decision);
    }

    #[test]
    fn larger_signature_never_hurts(phi in fixpoint(), psi in modal_over(&["a", "b"])) {
        let small = Signature::from_names(["a"]);
        let big = Signature::from_names(["a", "b"]);
        let s = decide_separability(&phi, &psi, &ModelClass::Words, Some(&small)).unwrap();
        let b = decide_separability(&phi, &psi, &ModelClass::Words, Some(&big)).unwrap();
        prop_assert!(!s.decision || b.decision, "{} / {}", phi, psi);
    }
}
