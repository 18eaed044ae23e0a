//! Decision procedures: definability, separability, interpolant
//! existence, graded variants and the finite-tree reduction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::automata::{consistency_for_all_n, qpl_automaton, qpl_consistency, Npta};
use crate::budget::Budget;
use crate::construct::{check_separator, consequence_for_class, separator_td, simplify};
use crate::error::{Error, Result};
use crate::formula::{characteristic_formula, normalize, Formula, FormulaGraph, NodeKind, Signature};
use crate::kripke::{check_bisim, KripkeTree};
use crate::translate::muml_to_npta_with;

/// Classes of tree models.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ModelClass {
    All,
    /// T¹.
    Words,
    /// T².
    Binary,
    /// T^d with d ≥ 3.
    Dary(usize),
    /// Finite trees of the inner class.
    FiniteTrees(Box<ModelClass>),
}

impl ModelClass {
    /// T^d, normalizing d = 1, 2 to words and binary trees.
    pub fn dary(d: usize) -> Result<Self> {
        match d {
            0 => Err(Error::Unsupported("outdegree bound 0".into())),
            1 => Ok(ModelClass::Words),
            2 => Ok(ModelClass::Binary),
            d => Ok(ModelClass::Dary(d)),
        }
    }

    pub fn finite(inner: ModelClass) -> Self {
        match inner {
            ModelClass::FiniteTrees(_) => inner,
            other => ModelClass::FiniteTrees(Box::new(other)),
        }
    }

    /// Parses `all`, `words`, `binary`, `dary:<d>` and `finite:<class>`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        match t {
            "all" => Ok(ModelClass::All),
            "words" => Ok(ModelClass::Words),
            "binary" => Ok(ModelClass::Binary),
            _ => {
                if let Some(d) = t.strip_prefix("dary:") {
                    let d: usize = d.parse().map_err(|_| Error::Unsupported(format!("unknown class {t}")))?;
                    ModelClass::dary(d)
                } else if let Some(inner) = t.strip_prefix("finite:") {
                    Ok(ModelClass::finite(ModelClass::parse(inner)?))
                } else {
                    Err(Error::Unsupported(format!("unknown class {t}")))
                }
            }
        }
    }

    /// The class with any finite-tree wrapper removed.
    pub fn base(&self) -> &ModelClass {
        match self {
            ModelClass::FiniteTrees(inner) => inner.base(),
            other => other,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ModelClass::FiniteTrees(_))
    }

    /// Outdegree bound of the class, if any.
    pub fn bound(&self) -> Option<usize> {
        match self.base() {
            ModelClass::All => None,
            ModelClass::Words => Some(1),
            ModelClass::Binary => Some(2),
            ModelClass::Dary(d) => Some(*d),
            ModelClass::FiniteTrees(_) => unreachable!("base is unwrapped"),
        }
    }

    /// The formula read over the base class: finite-tree classes conjoin
    /// ¬θ∞.
    pub fn relativize(&self, phi: &Formula) -> Result<(Formula, &ModelClass)> {
        let f = if self.is_finite() { finite_tree_formula(phi)? } else { phi.clone() };
        Ok((f, self.base()))
    }
}

impl fmt::Display for ModelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelClass::All => write!(f, "all"),
            ModelClass::Words => write!(f, "words"),
            ModelClass::Binary => write!(f, "binary"),
            ModelClass::Dary(d) => write!(f, "dary:{d}"),
            ModelClass::FiniteTrees(inner) => write!(f, "finite:{inner}"),
        }
    }
}

/// Common prefix witnesses at probe depth `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evidence {
    pub n: usize,
    pub left: KripkeTree,
    pub right: KripkeTree,
}

/// Bounds used by a decision.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Bounds {
    /// Outdegree the automata were built for (`None`: unbounded).
    pub d: Option<usize>,
    /// Pumping bound |A|×|A′|+1 of the tallness chain.
    pub m: Option<usize>,
    /// Least depth at which joint consistency fails.
    pub first_failure: Option<usize>,
    /// Index at which the consistency chain stabilized.
    pub stable_index: Option<usize>,
    /// Modal depth bound of a bounded search.
    pub depth: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub decision: bool,
    pub separator: Option<Formula>,
    pub evidence: Option<Evidence>,
    pub bounds: Bounds,
    pub notes: Vec<String>,
}

impl Verdict {
    fn new(decision: bool, bounds: Bounds) -> Self {
        Verdict { decision, separator: None, evidence: None, bounds, notes: Vec::new() }
    }
}

// ---------------------------------------------------------------------------
// Satisfiability over a class

fn graded_bound(phi: &Formula) -> usize {
    phi.max_grade().max(1) as usize * phi.size() + 1
}

/// Satisfiability of φ over `class`; returns a prefix of some model.
pub fn satisfiable(phi: &Formula, class: &ModelClass) -> Result<Option<KripkeTree>> {
    satisfiable_with(phi, class, &Budget::from_env())
}

pub fn satisfiable_with(phi: &Formula, class: &ModelClass, budget: &Budget) -> Result<Option<KripkeTree>> {
    let (f, base) = class.relativize(phi)?;
    let d = match base {
        ModelClass::All if f.is_graded() => Some(graded_bound(&f)),
        other => other.bound(),
    };
    let a = muml_to_npta_with(&f, d, budget)?;
    Ok(a.witness_prefix().map(|(t, _)| t))
}

/// φ ⊨ ψ over `class`.
pub fn entails(phi: &Formula, psi: &Formula, class: &ModelClass) -> Result<bool> {
    let neg = normalize(&Formula::not(psi.clone()))?;
    Ok(satisfiable(&Formula::and(phi.clone(), neg), class)?.is_none())
}

// ---------------------------------------------------------------------------
// Separability

/// Consistency of both formulas at every prefix depth, via the tallness
/// chain of the product of prefix automata (or of QPL automata).
struct Consistency {
    consistent: bool,
    first_failure: Option<usize>,
    stable_index: usize,
    m: Option<usize>,
    d: Option<usize>,
    witness: Option<(usize, KripkeTree)>,
}

const MAX_PROBE: usize = 4;

fn iso_chain(a: &Npta, b: &Npta, sigma: &Signature, d: usize) -> Result<Consistency> {
    let chain = consistency_for_all_n(a, b, sigma, d)?;
    let probe = (chain.stable_index + 1).min(chain.m).min(MAX_PROBE);
    let witness = if chain.consistent { chain.witness(probe).map(|t| (probe, t)) } else { None };
    Ok(Consistency {
        consistent: chain.consistent,
        first_failure: chain.first_failure,
        stable_index: chain.stable_index,
        m: Some(chain.m),
        d: Some(d),
        witness,
    })
}

fn quotient_chain(phi: &Formula, phi2: &Formula, sigma: &Signature, d: usize, budget: &Budget) -> Result<Consistency> {
    let a = qpl_automaton(&muml_to_npta_with(phi, Some(d), budget)?, sigma)?;
    let b = qpl_automaton(&muml_to_npta_with(phi2, Some(d), budget)?, sigma)?;
    let chain = qpl_consistency(&a, &b, budget)?;
    let probe = (chain.stable_index + 1).min(MAX_PROBE);
    let witness = if chain.consistent { chain.witness(probe, &a, &b).map(|t| (probe, t)) } else { None };
    Ok(Consistency {
        consistent: chain.consistent,
        first_failure: chain.first_failure,
        stable_index: chain.stable_index,
        m: Some(a.len() * b.len() + 1),
        d: Some(d),
        witness,
    })
}

fn class_consistency(phi: &Formula, phi2: &Formula, class: &ModelClass, sigma: &Signature, budget: &Budget) -> Result<Consistency> {
    match class {
        ModelClass::Words => {
            let a = muml_to_npta_with(phi, Some(1), budget)?;
            let b = muml_to_npta_with(phi2, Some(1), budget)?;
            iso_chain(&a, &b, sigma, 1)
        }
        ModelClass::Binary => {
            let a = muml_to_npta_with(phi, Some(2), budget)?.duplication_safe_closure()?;
            let b = muml_to_npta_with(phi2, Some(2), budget)?.duplication_safe_closure()?;
            iso_chain(&a, &b, sigma, 2)
        }
        ModelClass::All => {
            let d = phi.size() + phi2.size();
            let a = muml_to_npta_with(phi, Some(d), budget)?;
            let b = muml_to_npta_with(phi2, Some(d), budget)?;
            iso_chain(&a, &b, sigma, d)
        }
        ModelClass::Dary(d) => quotient_chain(phi, phi2, sigma, *d, budget),
        ModelClass::FiniteTrees(_) => unreachable!("finite classes are reduced first"),
    }
}

fn reject_graded(fs: &[&Formula]) -> Result<()> {
    if fs.iter().any(|f| f.is_graded()) {
        return Err(Error::Unsupported("graded formulas go through the graded procedures".into()));
    }
    Ok(())
}

/// ML_σ-separability of φ and φ′ over `class`; σ defaults to the joint
/// signature. Separable verdicts carry a verified separator, others a
/// common σ-prefix at a probe depth.
pub fn decide_separability(phi: &Formula, phi2: &Formula, class: &ModelClass, sigma: Option<&Signature>) -> Result<Verdict> {
    decide_separability_with(phi, phi2, class, sigma, &Budget::from_env())
}

pub fn decide_separability_with(
    phi: &Formula,
    phi2: &Formula,
    class: &ModelClass,
    sigma: Option<&Signature>,
    budget: &Budget,
) -> Result<Verdict> {
    reject_graded(&[phi, phi2])?;
    let sigma = sigma.cloned().unwrap_or_else(|| phi.sig().union(&phi2.sig()));
    let (f, base) = class.relativize(phi)?;
    let (f2, _) = class.relativize(phi2)?;
    let c = class_consistency(&f, &f2, base, &sigma, budget)?;
    let bounds = Bounds {
        d: c.d,
        m: c.m,
        first_failure: if c.consistent { None } else { c.first_failure },
        stable_index: Some(c.stable_index),
        depth: None,
    };
    let mut v = Verdict::new(!c.consistent, bounds);
    if c.consistent {
        if let Some((n, t)) = c.witness {
            v.evidence = Some(Evidence { n, left: t.clone(), right: t });
            v.notes.push(format!("common σ-prefix of depth {n} shared by models of both formulas"));
        }
        return Ok(v);
    }
    let n = c.first_failure.expect("inconsistent chains fail somewhere");
    let candidate = match base {
        ModelClass::Dary(d) => separator_td(&f, &f2, *d, &sigma, n)?,
        _ => Some(consequence_for_class(&f, base, &sigma, n)?),
    };
    match candidate {
        Some(psi) if matches!(base, ModelClass::Dary(_)) => {
            v.notes.push(format!("separator built from disjoint depth-{n} type sets"));
            v.separator = Some(psi);
        }
        Some(psi) => {
            let psi = simplify(&psi);
            let check = check_separator(phi, phi2, &psi, class)?;
            if check.valid() {
                v.separator = Some(psi);
            } else {
                v.notes.push(format!("separator candidate of depth {n} failed verification"));
            }
        }
        None => v.notes.push(format!("no separator found at depth {n}")),
    }
    Ok(v)
}

/// ML-definability of φ over `class`: separability of φ and ¬φ over sig(φ).
pub fn decide_definability(phi: &Formula, class: &ModelClass) -> Result<Verdict> {
    let neg = normalize(&Formula::not(phi.clone()))?;
    let mut v = decide_separability(phi, &neg, class, Some(&phi.sig()))?;
    if let Some(psi) = &v.separator {
        v.notes.push(format!("equivalent modal formula: {psi}"));
    }
    Ok(v)
}

/// Craig separability (separators over sig(φ) ∩ sig(φ′)) over all models,
/// words or binary trees, where it coincides with plain separability.
pub fn decide_craig_separability(phi: &Formula, phi2: &Formula, class: &ModelClass) -> Result<Verdict> {
    if matches!(class.base(), ModelClass::Dary(_)) {
        return Err(Error::Unsupported("Craig separability differs from separability over d-ary trees for d ≥ 3".into()));
    }
    let common = phi.sig().intersection(&phi2.sig());
    let plain = decide_separability(phi, phi2, class, None)?;
    let mut v = decide_separability(phi, phi2, class, Some(&common))?;
    v.notes.push(format!("common signature {{{}}}", common.names().join(" ")));
    if v.decision != plain.decision {
        v.notes.push("plain and Craig separability disagree".into());
    }
    Ok(v)
}

/// (φ ∧ ¬θ∞, φ′ ∧ ¬θ∞), normalized.
pub fn reduce_finite_trees(phi: &Formula, phi2: &Formula) -> Result<(Formula, Formula)> {
    Ok((finite_tree_formula(phi)?, finite_tree_formula(phi2)?))
}

fn finite_tree_formula(phi: &Formula) -> Result<Formula> {
    let fin = normalize(&Formula::not(Formula::theta_inf()))?;
    normalize(&Formula::and(phi.clone(), fin))
}

// ---------------------------------------------------------------------------
// Graded variants

/// Separability of graded formulas over all models, by graded modal
/// formulas (`graded_separator`) or by plain modal formulas.
pub fn decide_graded_separability(phi: &Formula, phi2: &Formula, graded_separator: bool) -> Result<Verdict> {
    let budget = Budget::from_env();
    let g = phi.max_grade().max(phi2.max_grade()).max(1) as usize;
    let d = g * (phi.size() + phi2.size());
    let sigma = phi.sig().union(&phi2.sig());
    let c = if graded_separator {
        let a = muml_to_npta_with(phi, Some(d), &budget)?;
        let b = muml_to_npta_with(phi2, Some(d), &budget)?;
        iso_chain(&a, &b, &sigma, d)?
    } else {
        quotient_chain(phi, phi2, &sigma, d, &budget)?
    };
    let bounds = Bounds {
        d: Some(d),
        m: c.m,
        first_failure: if c.consistent { None } else { c.first_failure },
        stable_index: Some(c.stable_index),
        depth: None,
    };
    let mut v = Verdict::new(!c.consistent, bounds);
    if let Some((n, t)) = c.witness {
        v.evidence = Some(Evidence { n, left: t.clone(), right: t });
    }
    if v.decision {
        let usable = |f: &Formula| f.is_ml() && (graded_separator || !f.is_graded());
        let class = ModelClass::All;
        let neg2 = simplify(&normalize(&Formula::not(phi2.clone()))?);
        for cand in [phi.clone(), neg2] {
            if usable(&cand) && check_separator(phi, phi2, &cand, &class)?.valid() {
                v.separator = Some(cand);
                break;
            }
        }
        if v.separator.is_none() {
            v.notes.push("decision only: no separator construction for graded inputs".into());
        }
    }
    Ok(v)
}

/// µML-definability of a graded formula: φ ≡ flat(φ), checked over
/// T^{d₀} with d₀ = g_max×|φ|+1. The notes also report ML-definability.
pub fn decide_mu_definability_graded(phi: &Formula) -> Result<Verdict> {
    let d0 = graded_bound(phi);
    let flat = phi.flatten();
    let class = ModelClass::dary(d0)?;
    let forward = satisfiable(&Formula::and(phi.clone(), normalize(&Formula::not(flat.clone()))?), &class)?;
    let backward = if forward.is_none() {
        satisfiable(&Formula::and(flat.clone(), normalize(&Formula::not(phi.clone()))?), &class)?
    } else {
        None
    };
    let equivalent = forward.is_none() && backward.is_none();
    let mut v = Verdict::new(equivalent, Bounds { d: Some(d0), ..Bounds::default() });
    if let Some(t) = forward.or(backward) {
        v.notes.push(format!("model prefix separating the formula from its flattening: {}", t.to_sexpr()));
    }
    if equivalent {
        v.separator = Some(flat.clone());
        let ml = decide_definability(&flat, &ModelClass::All)?;
        v.notes.push(format!("ML-definable: {}", if ml.decision { "yes" } else { "no" }));
    } else {
        v.notes.push("ML-definable: no".into());
    }
    Ok(v)
}

/// ML-definability of a graded formula over all models.
pub fn decide_ml_definability_graded(phi: &Formula) -> Result<bool> {
    let mu = decide_mu_definability_graded(phi)?;
    Ok(mu.decision && decide_definability(&phi.flatten(), &ModelClass::All)?.decision)
}

// ---------------------------------------------------------------------------
// Craig interpolant existence

/// Modal-depth-bounded evaluation of a modal formula: truth of every
/// subformula position at a node, from the node's label and children.
struct MlEval {
    g: FormulaGraph,
    names: Vec<String>,
}

impl MlEval {
    fn new(phi: &Formula) -> Result<Self> {
        if !phi.is_ml() {
            return Err(Error::Precondition(format!("{phi} is not a modal formula")));
        }
        let g = FormulaGraph::new(phi)?;
        let names = g.sig.names();
        Ok(MlEval { g, names })
    }

    fn vector(&self, label: &BTreeSet<String>, kids: &[&Vec<bool>]) -> Vec<bool> {
        let mut out = vec![false; self.g.len()];
        for v in (0..self.g.len()).rev() {
            out[v] = match self.g.nodes[v] {
                NodeKind::True => true,
                NodeKind::False => false,
                NodeKind::Lit { prop, positive } => label.contains(&self.names[prop]) == positive,
                NodeKind::And(a, b) => out[a] && out[b],
                NodeKind::Or(a, b) => out[a] || out[b],
                NodeKind::Dia { grade, body } => kids.iter().filter(|k| k[body]).count() >= grade as usize,
                NodeKind::Box { grade, body } => kids.iter().filter(|k| !k[body]).count() <= grade as usize,
                NodeKind::Var { .. } | NodeKind::Fix { .. } => unreachable!("modal formulas have no fixpoints"),
            };
        }
        out
    }
}

/// Trees of height ≤ n and outdegree ≤ d over one formula's signature,
/// grouped by (σ-bisimulation code, truth vector).
fn search_side(eval: &MlEval, sigma: &Signature, n: usize, d: usize, budget: &Budget) -> Result<BTreeMap<(String, Vec<bool>), KripkeTree>> {
    let sig = &eval.g.sig;
    let letters: Vec<BTreeSet<String>> = (0..sig.letter_count() as u32).map(|c| sig.letter_props(c)).collect();
    let mut level: BTreeMap<(String, Vec<bool>), KripkeTree> = BTreeMap::new();
    for l in &letters {
        let t = KripkeTree::from_label_set(l.clone(), Vec::new());
        level.insert((t.code(0, Some(sigma), n, true), eval.vector(l, &[])), t);
    }
    for h in 1..=n {
        let items: Vec<(&(String, Vec<bool>), &KripkeTree)> = level.iter().collect();
        let mut next = level.clone();
        let mut combo: Vec<usize> = Vec::new();
        while crate::kripke::next_multiset(&mut combo, items.len(), d) {
            if !combo.iter().any(|&i| items[i].1.height() == h - 1) {
                continue;
            }
            budget.charge(letters.len() as u64, "interpolant search")?;
            let kids: Vec<&Vec<bool>> = combo.iter().map(|&i| &items[i].0 .1).collect();
            for l in &letters {
                let t = KripkeTree::from_label_set(l.clone(), combo.iter().map(|&i| items[i].1.clone()).collect());
                next.entry((t.code(t.root(), Some(sigma), n, true), eval.vector(l, &kids))).or_insert(t);
            }
        }
        level = next;
    }
    Ok(level)
}

/// Craig interpolant existence for φ ⊨ φ′ (modal formulas) over T^d, by
/// exhaustive search for M ⊨ φ and M′ ⊨ ¬φ′ of depth ≤ n that are
/// n-bisimilar over σ = sig(φ) ∩ sig(φ′), each labelled only by its own
/// formula's propositions. Without such a pair the interpolant is the
/// disjunction of the σ-types realized by models of φ.
pub fn decide_interpolant_existence(phi: &Formula, phi2: &Formula, d: usize) -> Result<Verdict> {
    let budget = Budget::from_env();
    let class = ModelClass::dary(d)?;
    let neg2 = normalize(&Formula::not(phi2.clone()))?;
    let left = MlEval::new(phi)?;
    let right = MlEval::new(&neg2)?;
    let sigma = phi.sig().intersection(&phi2.sig());
    let n = phi.modal_depth().max(phi2.modal_depth());
    let mut v = Verdict::new(false, Bounds { d: Some(d), depth: Some(n), ..Bounds::default() });
    let ls = search_side(&left, &sigma, n, d, &budget)?;
    let rs = search_side(&right, &sigma, n, d, &budget)?;
    let lt: BTreeMap<&String, &KripkeTree> = ls.iter().filter(|((_, vec), _)| vec[left.g.root]).map(|((c, _), t)| (c, t)).collect();
    let rt: BTreeMap<&String, &KripkeTree> = rs.iter().filter(|((_, vec), _)| vec[right.g.root]).map(|((c, _), t)| (c, t)).collect();
    if let Some((code, m)) = lt.iter().find(|(c, _)| rt.contains_key(*c)) {
        let m2 = rt[*code];
        debug_assert!(check_bisim(m, m2, &sigma, n).is_some());
        v.evidence = Some(Evidence { n, left: (*m).clone(), right: m2.clone() });
        return Ok(v);
    }
    v.decision = true;
    let psi = simplify(&Formula::disj(lt.values().map(|t| characteristic_formula(t, &sigma, n))));
    let check = check_separator(phi, &neg2, &psi, &class)?;
    if check.valid() {
        v.separator = Some(psi);
    } else {
        v.notes.push("type disjunction failed verification".into());
    }
    Ok(v)
}
