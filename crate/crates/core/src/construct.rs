//! Separator and uniform-consequence construction, and separator
//! verification by satisfiability checks.

use std::collections::{BTreeMap, BTreeSet};

use crate::automata::{prefix_automaton, Npta, Pattern};
use crate::decide::{satisfiable, ModelClass};
use crate::error::{Error, Result};
use crate::formula::{characteristic_formula, normalize, Formula, Signature};
use crate::kripke::{all_trees, KripkeTree};
use crate::translate::muml_to_npta;

// ---------------------------------------------------------------------------
// Simplification

/// Semantics-preserving cleanup: constant folding, flattening and dedup of
/// ∧/∨, absorption, complementary-literal merging ((l ∧ X) ∨ (¬l ∧ X) → X)
/// and dropping ◇⊤ next to another diamond.
pub fn simplify(f: &Formula) -> Formula {
    match f {
        Formula::And(..) => {
            let mut parts = Vec::new();
            collect(f, true, &mut parts);
            build_and(parts.iter().map(|g| simplify(g)).collect())
        }
        Formula::Or(..) => {
            let mut parts = Vec::new();
            collect(f, false, &mut parts);
            build_or(parts.iter().map(|g| simplify(g)).collect())
        }
        Formula::Diamond(k, g) => match simplify(g) {
            Formula::False => Formula::False,
            g => Formula::Diamond(*k, Box::new(g)),
        },
        Formula::Square(k, g) => match simplify(g) {
            Formula::True => Formula::True,
            g => Formula::Square(*k, Box::new(g)),
        },
        Formula::Not(g) => match simplify(g) {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Prop(p) => Formula::NegProp(p),
            Formula::NegProp(p) => Formula::Prop(p),
            g => Formula::not(g),
        },
        Formula::Mu(x, g) => Formula::mu(x.clone(), simplify(g)),
        Formula::Nu(x, g) => Formula::nu(x.clone(), simplify(g)),
        other => other.clone(),
    }
}

fn collect<'a>(f: &'a Formula, and: bool, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::And(a, b) if and => {
            collect(a, and, out);
            collect(b, and, out);
        }
        Formula::Or(a, b) if !and => {
            collect(a, and, out);
            collect(b, and, out);
        }
        other => out.push(other),
    }
}

fn parts_of(f: &Formula, and: bool) -> BTreeSet<Formula> {
    let mut v = Vec::new();
    collect(f, and, &mut v);
    v.into_iter().cloned().collect()
}

fn complementary(a: &Formula, b: &Formula) -> bool {
    matches!((a, b), (Formula::Prop(p), Formula::NegProp(q)) | (Formula::NegProp(q), Formula::Prop(p)) if p == q)
}

fn build_and(items: Vec<Formula>) -> Formula {
    let mut set: BTreeSet<Formula> = BTreeSet::new();
    for it in items {
        match it {
            Formula::True => {}
            Formula::False => return Formula::False,
            Formula::And(..) => set.extend(parts_of(&it, true)),
            other => {
                set.insert(other);
            }
        }
    }
    if set.iter().any(|a| set.iter().any(|b| complementary(a, b))) {
        return Formula::False;
    }
    let dia_true = Formula::dia(Formula::True);
    if set.contains(&dia_true) && set.iter().any(|g| matches!(g, Formula::Diamond(1, _)) && *g != dia_true) {
        set.remove(&dia_true);
    }
    // a ∧ (a ∨ b) = a
    let list: Vec<Formula> = set.into_iter().collect();
    let sets: Vec<BTreeSet<Formula>> = list.iter().map(|g| parts_of(g, false)).collect();
    let keep: Vec<Formula> = list
        .iter()
        .enumerate()
        .filter(|(i, _)| !(0..list.len()).any(|j| j != *i && sets[j].is_subset(&sets[*i]) && (sets[j] != sets[*i] || j < *i)))
        .map(|(_, g)| g.clone())
        .collect();
    Formula::conj(keep)
}

fn build_or(items: Vec<Formula>) -> Formula {
    let mut set: BTreeSet<Formula> = BTreeSet::new();
    for it in items {
        match it {
            Formula::False => {}
            Formula::True => return Formula::True,
            Formula::Or(..) => set.extend(parts_of(&it, false)),
            other => {
                set.insert(other);
            }
        }
    }
    if set.iter().any(|a| set.iter().any(|b| complementary(a, b))) {
        return Formula::True;
    }
    let mut list: Vec<BTreeSet<Formula>> = set.iter().map(|g| parts_of(g, true)).collect();
    // (l ∧ X) ∨ (¬l ∧ X) = X, repeated to a fixpoint.
    loop {
        list.sort();
        list.dedup();
        let mut merged = None;
        'outer: for i in 0..list.len() {
            for j in i + 1..list.len() {
                if list[i].len() != list[j].len() {
                    continue;
                }
                let di: Vec<&Formula> = list[i].difference(&list[j]).collect();
                let dj: Vec<&Formula> = list[j].difference(&list[i]).collect();
                if di.len() == 1 && dj.len() == 1 && complementary(di[0], dj[0]) {
                    let mut rest = list[i].clone();
                    rest.remove(di[0]);
                    merged = Some((i, j, rest));
                    break 'outer;
                }
            }
        }
        match merged {
            Some((i, j, rest)) => {
                list.remove(j);
                list[i] = rest;
            }
            None => break,
        }
    }
    if list.iter().any(BTreeSet::is_empty) {
        return Formula::True;
    }
    // a ∨ (a ∧ b) = a
    let keep: Vec<&BTreeSet<Formula>> = list
        .iter()
        .enumerate()
        .filter(|(i, s)| !(0..list.len()).any(|j| j != *i && list[j].is_subset(s)))
        .map(|(_, s)| s)
        .collect();
    let disjuncts: Vec<Formula> = keep.into_iter().map(|s| build_and(s.iter().cloned().collect())).collect();
    let mut out: BTreeSet<Formula> = BTreeSet::new();
    for d in disjuncts {
        match d {
            Formula::True => return Formula::True,
            Formula::False => {}
            d => {
                out.insert(d);
            }
        }
    }
    Formula::disj(out)
}

// ---------------------------------------------------------------------------
// Letters over a target signature

/// σ-letters (as formulas) compatible with automaton letter `c`:
/// agreement on the shared propositions.
fn sigma_letter(a: &Npta, sigma: &Signature, c: u32) -> Formula {
    let props = a.sig.letter_props(c);
    Formula::conj(sigma.iter().filter(|p| a.sig.contains(p)).map(|p| Formula::lit(p.clone(), props.contains(p))))
}

fn letters_formula(a: &Npta, sigma: &Signature, letters: impl IntoIterator<Item = u32>) -> Formula {
    let set: BTreeSet<Formula> = letters.into_iter().map(|c| sigma_letter(a, sigma, c)).collect();
    simplify(&Formula::disj(set))
}

fn live_pattern(p: &Pattern, live: &[bool]) -> bool {
    p.fixed.iter().all(|&s| live[s])
}

// ---------------------------------------------------------------------------
// Words

/// ML^n-uniform consequence of a word automaton over its own signature.
pub fn uniform_consequence_words(a: &Npta, n: usize) -> Result<Formula> {
    uniform_consequence_words_over(a, n, &a.sig.clone())
}

/// ML^n_σ-uniform consequence of a word automaton (arity 1): a word
/// satisfies it iff its n-prefix agrees on σ with that of an accepted word.
pub fn uniform_consequence_words_over(a: &Npta, n: usize, sigma: &Signature) -> Result<Formula> {
    if a.arity() != Some(1) {
        return Err(Error::ArityMismatch(format!("word construction needs arity 1, got {:?}", a.arity())));
    }
    if a.is_empty() {
        return Ok(Formula::False);
    }
    let live = a.live_states().to_vec();
    let states: Vec<usize> = (0..a.len()).filter(|&q| live[q]).collect();
    let mut runs = WordRuns { a, sigma, live: &live, memo: BTreeMap::new() };
    let cont = |q: usize| {
        letters_formula(a, sigma, a.letters().filter(|&c| a.delta[q][c as usize].iter().any(|p| live_pattern(p, &live))))
    };
    let acc = |q: usize| letters_formula(a, sigma, a.letters().filter(|&c| a.delta[q][c as usize].iter().any(|p| p.fixed.is_empty())));
    let mut disjuncts = Vec::new();
    for &q in &states {
        let run = runs.get(n, a.initial, q);
        disjuncts.push(simplify(&Formula::and(run, Formula::dia_power(n, cont(q)))));
    }
    for m in 0..n {
        for &q in &states {
            let run = runs.get(m, a.initial, q);
            let tail = Formula::and(Formula::dia_power(m, acc(q)), Formula::box_power(m + 1, Formula::False));
            disjuncts.push(simplify(&Formula::and(run, tail)));
        }
    }
    Ok(simplify(&Formula::disj(disjuncts)))
}

/// ψ^m_{pq}: a run from p to q over the first m letters.
struct WordRuns<'a> {
    a: &'a Npta,
    sigma: &'a Signature,
    live: &'a [bool],
    memo: BTreeMap<(usize, usize, usize), Formula>,
}

impl WordRuns<'_> {
    fn get(&mut self, m: usize, p: usize, q: usize) -> Formula {
        if let Some(f) = self.memo.get(&(m, p, q)) {
            return f.clone();
        }
        let f = match m {
            0 if p == q => Formula::True,
            0 => Formula::False,
            1 => {
                let a = self.a;
                let steps = a.letters().filter(|&c| {
                    self.live[q]
                        && a.delta[p][c as usize]
                            .iter()
                            .any(|pat| pat.fixed == [q] || (pat.fixed.is_empty() && pat.repeat.contains(&q)))
                });
                letters_formula(a, self.sigma, steps)
            }
            _ => {
                let (lo, hi) = (m / 2, m - m / 2);
                let mut parts = Vec::new();
                for r in (0..self.a.len()).filter(|&r| self.live[r]) {
                    let first = self.get(lo, p, r);
                    if first == Formula::False {
                        continue;
                    }
                    let second = self.get(hi, r, q);
                    if second == Formula::False {
                        continue;
                    }
                    parts.push(Formula::and(first, Formula::dia_power(lo, second)));
                }
                simplify(&Formula::disj(parts))
            }
        };
        self.memo.insert((m, p, q), f.clone());
        f
    }
}

// ---------------------------------------------------------------------------
// All models and binary trees

/// ML^n-uniform consequence over all models or over binary trees, over the
/// automaton's signature.
pub fn uniform_consequence(a: &Npta, n: usize, class: &ModelClass) -> Result<Formula> {
    uniform_consequence_over(a, n, class, &a.sig.clone())
}

/// ML^n_σ-uniform consequence ψ_{n,q_I} with ψ_{0,q} the root letters of
/// nonempty A[q] and ψ_{m+1,q} = ⋁ c ∧ ∇{ψ_{m,p} : p ∈ S} over child state
/// sets S of transitions. Over all models a transition (F, R) offers
/// S = supp(F) ∪ Y for Y ⊆ R; over binary trees S ranges over concrete
/// child tuples, which needs a duplication-safe automaton.
pub fn uniform_consequence_over(a: &Npta, n: usize, class: &ModelClass, sigma: &Signature) -> Result<Formula> {
    let binary = match class {
        ModelClass::All => false,
        ModelClass::Binary => {
            if a.arity() != Some(2) {
                return Err(Error::ArityMismatch(format!("binary construction needs arity 2, got {:?}", a.arity())));
            }
            if !a.is_duplication_safe() {
                return Err(Error::Precondition("automaton is not duplication safe".into()));
            }
            true
        }
        other => return Err(Error::Unsupported(format!("uniform consequences over {other}"))),
    };
    if a.is_empty() {
        return Ok(Formula::False);
    }
    let live = a.live_states().to_vec();
    let mut psi: Vec<Formula> = (0..a.len())
        .map(|q| {
            if !live[q] {
                return Formula::False;
            }
            letters_formula(a, sigma, a.letters().filter(|&c| a.delta[q][c as usize].iter().any(|p| live_pattern(p, &live))))
        })
        .collect();
    for _ in 0..n {
        let mut next = Vec::with_capacity(a.len());
        for q in 0..a.len() {
            if !live[q] {
                next.push(Formula::False);
                continue;
            }
            let mut parts: BTreeSet<Formula> = BTreeSet::new();
            for c in a.letters() {
                let letter = sigma_letter(a, sigma, c);
                for p in a.delta[q][c as usize].iter().filter(|p| live_pattern(p, &live)) {
                    for s in child_state_sets(p, &live, binary) {
                        let nabla = Formula::nabla(s.iter().map(|&x| psi[x].clone()).collect());
                        parts.insert(simplify(&Formula::and(letter.clone(), nabla)));
                    }
                }
            }
            next.push(simplify(&Formula::disj(parts)));
        }
        psi = next;
    }
    Ok(psi[a.initial].clone())
}

fn child_state_sets(p: &Pattern, live: &[bool], binary: bool) -> BTreeSet<BTreeSet<usize>> {
    let rep: Vec<usize> = p.repeat.iter().copied().filter(|&r| live[r]).collect();
    let mut out = BTreeSet::new();
    if binary {
        for k in p.fixed.len()..=2 {
            if k > p.fixed.len() && rep.is_empty() {
                break;
            }
            let extra = k - p.fixed.len();
            let mut fill = |add: &[usize]| {
                let mut s: BTreeSet<usize> = p.fixed.iter().copied().collect();
                s.extend(add.iter().copied());
                out.insert(s);
            };
            match extra {
                0 => fill(&[]),
                1 => rep.iter().for_each(|&r| fill(&[r])),
                _ => {
                    for &r in &rep {
                        for &r2 in &rep {
                            fill(&[r, r2]);
                        }
                    }
                }
            }
        }
    } else {
        for mask in 0u64..(1 << rep.len()) {
            let mut s: BTreeSet<usize> = p.fixed.iter().copied().collect();
            s.extend(rep.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &r)| r));
            out.insert(s);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Type disjunctions

/// Disjunction of the characteristic formulas of the depth-n σ-types (of
/// trees with outdegree ≤ d) consistent with `phi` over `class`.
fn realized_types(phi: &Formula, d: usize, sigma: &Signature, n: usize) -> Result<BTreeMap<String, KripkeTree>> {
    let prefixes = prefix_automaton(&muml_to_npta(phi, Some(d))?, sigma)?;
    let mut seen = BTreeMap::new();
    for t in all_trees(sigma, d, n) {
        if prefixes.accepts_prefix(&t, n) {
            seen.entry(t.code(t.root(), Some(sigma), n, true)).or_insert(t);
        }
    }
    Ok(seen)
}

fn type_disjunction(phi: &Formula, d: usize, sigma: &Signature, n: usize) -> Result<Formula> {
    let types = realized_types(phi, d, sigma, n)?;
    let parts: Vec<Formula> = types.values().map(|t| characteristic_formula(t, sigma, n)).collect();
    Ok(simplify(&Formula::disj(parts)))
}

/// Separator over T^d (d ≥ 3) at modal depth `n`: the disjunction of the
/// depth-n σ-types of d-ary trees realized by models of φ. It separates
/// exactly when no such type is realized by a model of φ′, so the result
/// is correct by construction; `None` when the type sets meet.
pub fn separator_td(phi: &Formula, phi2: &Formula, d: usize, sigma: &Signature, n: usize) -> Result<Option<Formula>> {
    ModelClass::dary(d)?;
    let left = realized_types(phi, d, sigma, n)?;
    let right = realized_types(phi2, d, sigma, n)?;
    if left.keys().any(|k| right.contains_key(k)) {
        return Ok(None);
    }
    let parts: Vec<Formula> = left.values().map(|t| characteristic_formula(t, sigma, n)).collect();
    Ok(Some(simplify(&Formula::disj(parts))))
}

/// Craig-style separator ψ over σ with θ ⊨ ψ ⊨ ¬θ′ over `class`, of modal
/// depth at most the larger depth of the inputs.
pub fn ml_craig_interpolant(theta: &Formula, theta2: &Formula, sigma: &Signature, class: &ModelClass) -> Result<Formula> {
    if !theta.is_ml() || !theta2.is_ml() {
        return Err(Error::Precondition("interpolation inputs must be modal formulas".into()));
    }
    let n = theta.modal_depth().max(theta2.modal_depth());
    let psi = consequence_for_class(theta, class, sigma, n)?;
    if !verify_separator(theta, theta2, &psi, class)? {
        return Err(Error::Precondition("the first formula does not entail the negation of the second".into()));
    }
    Ok(psi)
}

/// ML^n_σ-consequence of φ used as separator candidate for each class.
pub(crate) fn consequence_for_class(phi: &Formula, class: &ModelClass, sigma: &Signature, n: usize) -> Result<Formula> {
    match class {
        ModelClass::FiniteTrees(_) => {
            let (f, _) = class.relativize(phi)?;
            consequence_for_class(&f, class.base(), sigma, n)
        }
        ModelClass::Words => uniform_consequence_words_over(&muml_to_npta(phi, Some(1))?, n, sigma),
        ModelClass::Binary => {
            let a = muml_to_npta(phi, Some(2))?.duplication_safe_closure()?;
            uniform_consequence_over(&a, n, class, sigma)
        }
        ModelClass::All if !phi.is_graded() => uniform_consequence_over(&muml_to_npta(phi, None)?, n, class, sigma),
        ModelClass::All => Err(Error::Unsupported("graded formulas have no construction over all models".into())),
        ModelClass::Dary(d) => type_disjunction(phi, *d, sigma, n),
    }
}

// ---------------------------------------------------------------------------
// Verification

/// Outcome of checking a separator candidate.
#[derive(Clone, Debug)]
pub struct SeparatorCheck {
    /// φ ⊨ ψ.
    pub left_entails: bool,
    /// ψ ⊨ ¬φ′.
    pub right_excluded: bool,
    /// A finite prefix of a falsifying model, when one was found.
    pub countermodel: Option<KripkeTree>,
}

impl SeparatorCheck {
    pub fn valid(&self) -> bool {
        self.left_entails && self.right_excluded
    }
}

/// Checks φ ⊨ ψ and ψ ⊨ ¬φ′ over `class` by emptiness of φ ∧ ¬ψ and
/// ψ ∧ φ′.
pub fn check_separator(phi: &Formula, phi2: &Formula, psi: &Formula, class: &ModelClass) -> Result<SeparatorCheck> {
    let neg = normalize(&Formula::not(psi.clone()))?;
    let left = satisfiable(&Formula::and(phi.clone(), neg), class)?;
    let right = if left.is_none() { satisfiable(&Formula::and(psi.clone(), phi2.clone()), class)? } else { None };
    Ok(SeparatorCheck {
        left_entails: left.is_none(),
        right_excluded: left.is_none() && right.is_none(),
        countermodel: left.or(right),
    })
}

pub fn verify_separator(phi: &Formula, phi2: &Formula, psi: &Formula, class: &ModelClass) -> Result<bool> {
    Ok(check_separator(phi, phi2, psi, class)?.valid())
}
