//! µML / µgrML formulas: syntax, parsing, printing, normalization and the
//! derived constructors used by the decision procedures.

mod graph;
mod normalize;
mod parse;
mod print;

use std::collections::BTreeSet;
use std::fmt;

pub use graph::{FormulaGraph, NodeKind};
pub use normalize::normalize;
pub use parse::parse_formula;

use crate::kripke::KripkeTree;

/// A formula of the (graded) modal µ-calculus.
///
/// `Diamond(k, φ)` is ◇≥k φ (plain ◇ has k = 1) and `Square(k, φ)` is □≥k φ,
/// "all but at most k children satisfy φ" (plain □ has k = 0). `Not` only
/// occurs before normalization.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Prop(String),
    NegProp(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Diamond(u32, Box<Formula>),
    Square(u32, Box<Formula>),
    Var(String),
    Mu(String, Box<Formula>),
    Nu(String, Box<Formula>),
}

/// Finite ordered set of proposition names.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature(BTreeSet<String>);

impl Signature {
    pub fn new() -> Self {
        Signature(BTreeSet::new())
    }

    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Signature(names.into_iter().map(Into::into).collect())
    }

    /// Parses a comma- or whitespace-separated list such as `a,b`.
    pub fn parse_list(text: &str) -> Self {
        Signature::from_names(
            text.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty()),
        )
    }

    pub fn contains(&self, p: &str) -> bool {
        self.0.contains(p)
    }

    pub fn insert(&mut self, p: impl Into<String>) {
        self.0.insert(p.into());
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &String> {
        self.0.iter()
    }

    pub fn names(&self) -> Vec<String> {
        self.0.iter().cloned().collect()
    }

    pub fn index_of(&self, p: &str) -> Option<usize> {
        self.0.iter().position(|q| q == p)
    }

    pub fn union(&self, other: &Signature) -> Signature {
        Signature(self.0.union(&other.0).cloned().collect())
    }

    pub fn intersection(&self, other: &Signature) -> Signature {
        Signature(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn is_subset(&self, other: &Signature) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Number of letters (valuations) over this signature.
    pub fn letter_count(&self) -> usize {
        1usize << self.0.len()
    }

    /// Valuation named by a letter bitmask (bit i = i-th proposition).
    pub fn letter_props(&self, letter: u32) -> BTreeSet<String> {
        self.0
            .iter()
            .enumerate()
            .filter(|(i, _)| letter >> i & 1 == 1)
            .map(|(_, p)| p.clone())
            .collect()
    }

    /// Letter of a valuation; propositions outside the signature are dropped.
    pub fn letter_of<'a, I>(&self, props: I) -> u32
    where
        I: IntoIterator<Item = &'a String>,
    {
        let mut mask = 0u32;
        for p in props {
            if let Some(i) = self.index_of(p) {
                mask |= 1 << i;
            }
        }
        mask
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(String::as_str).collect();
        write!(f, "{{{}}}", names.join(" "))
    }
}

impl FromIterator<String> for Signature {
    fn from_iter<T: IntoIterator<Item = String>>(iter: T) -> Self {
        Signature(iter.into_iter().collect())
    }
}

/// Modal depth, signature and printed size of a formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Metrics {
    pub depth: usize,
    pub sig: Signature,
    pub size: usize,
}

impl Formula {
    pub fn prop(p: impl Into<String>) -> Formula {
        Formula::Prop(p.into())
    }

    pub fn lit(p: impl Into<String>, positive: bool) -> Formula {
        if positive {
            Formula::Prop(p.into())
        } else {
            Formula::NegProp(p.into())
        }
    }

    pub fn var(x: impl Into<String>) -> Formula {
        Formula::Var(x.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn dia(f: Formula) -> Formula {
        Formula::Diamond(1, Box::new(f))
    }

    pub fn dia_k(k: u32, f: Formula) -> Formula {
        Formula::Diamond(k, Box::new(f))
    }

    pub fn boxed(f: Formula) -> Formula {
        Formula::Square(0, Box::new(f))
    }

    pub fn box_k(k: u32, f: Formula) -> Formula {
        Formula::Square(k, Box::new(f))
    }

    pub fn mu(x: impl Into<String>, body: Formula) -> Formula {
        Formula::Mu(x.into(), Box::new(body))
    }

    pub fn nu(x: impl Into<String>, body: Formula) -> Formula {
        Formula::Nu(x.into(), Box::new(body))
    }

    /// `¬a ∨ b`, with a literal `a` negated in place.
    pub fn implies(a: Formula, b: Formula) -> Formula {
        let na = match a {
            Formula::Prop(p) => Formula::NegProp(p),
            Formula::NegProp(p) => Formula::Prop(p),
            other => Formula::not(other),
        };
        Formula::or(na, b)
    }

    /// Left-nested conjunction; `true` conjuncts are dropped, empty is `true`.
    pub fn conj<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        let mut acc: Option<Formula> = None;
        for f in items {
            if f == Formula::True {
                continue;
            }
            acc = Some(match acc {
                None => f,
                Some(a) => Formula::and(a, f),
            });
        }
        acc.unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `false` disjuncts are dropped, empty is `false`.
    pub fn disj<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        let mut acc: Option<Formula> = None;
        for f in items {
            if f == Formula::False {
                continue;
            }
            acc = Some(match acc {
                None => f,
                Some(a) => Formula::or(a, f),
            });
        }
        acc.unwrap_or(Formula::False)
    }

    /// ∇Φ = ⋀{◇θ : θ ∈ Φ} ∧ □⋁Φ.
    pub fn nabla(items: Vec<Formula>) -> Formula {
        let dias: Vec<Formula> = items.iter().cloned().map(Formula::dia).collect();
        Formula::conj(dias.into_iter().chain([Formula::boxed(Formula::disj(items))]))
    }

    /// □^k φ.
    pub fn box_power(k: usize, f: Formula) -> Formula {
        (0..k).fold(f, |acc, _| Formula::boxed(acc))
    }

    /// ◇^k φ.
    pub fn dia_power(k: usize, f: Formula) -> Formula {
        (0..k).fold(f, |acc, _| Formula::dia(acc))
    }

    /// The letter `c ⊆ sig` as a complete conjunction of literals.
    pub fn letter(sig: &Signature, letter: u32) -> Formula {
        Formula::conj(
            sig.iter()
                .enumerate()
                .map(|(i, p)| Formula::lit(p.clone(), letter >> i & 1 == 1)),
        )
    }

    /// θ∞ = νX.◇X: some infinite path exists.
    pub fn theta_inf() -> Formula {
        Formula::nu("X", Formula::dia(Formula::var("X")))
    }

    /// θ_d = νX.(□X ∧ □≥d ⊥): every point has fewer than d+1 children.
    pub fn theta_d(d: u32) -> Formula {
        Formula::nu(
            "X",
            Formula::and(
                Formula::boxed(Formula::var("X")),
                Formula::box_k(d, Formula::False),
            ),
        )
    }

    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::True
            | Formula::False
            | Formula::Prop(_)
            | Formula::NegProp(_)
            | Formula::Var(_) => 0,
            Formula::Not(f) | Formula::Mu(_, f) | Formula::Nu(_, f) => f.modal_depth(),
            Formula::And(a, b) | Formula::Or(a, b) => a.modal_depth().max(b.modal_depth()),
            Formula::Diamond(_, f) | Formula::Square(_, f) => 1 + f.modal_depth(),
        }
    }

    pub fn sig(&self) -> Signature {
        let mut s = Signature::new();
        self.collect_sig(&mut s);
        s
    }

    fn collect_sig(&self, s: &mut Signature) {
        match self {
            Formula::Prop(p) | Formula::NegProp(p) => s.insert(p.clone()),
            Formula::True | Formula::False | Formula::Var(_) => {}
            Formula::Not(f)
            | Formula::Mu(_, f)
            | Formula::Nu(_, f)
            | Formula::Diamond(_, f)
            | Formula::Square(_, f) => f.collect_sig(s),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_sig(s);
                b.collect_sig(s);
            }
        }
    }

    /// Length of the canonical rendering.
    pub fn size(&self) -> usize {
        self.to_string().len()
    }

    pub fn metrics(&self) -> Metrics {
        Metrics { depth: self.modal_depth(), sig: self.sig(), size: self.size() }
    }

    /// True when the formula contains no fixpoint binders or variables.
    pub fn is_ml(&self) -> bool {
        match self {
            Formula::Var(_) | Formula::Mu(..) | Formula::Nu(..) => false,
            Formula::True | Formula::False | Formula::Prop(_) | Formula::NegProp(_) => true,
            Formula::Not(f) | Formula::Diamond(_, f) | Formula::Square(_, f) => f.is_ml(),
            Formula::And(a, b) | Formula::Or(a, b) => a.is_ml() && b.is_ml(),
        }
    }

    /// True when some modality carries a non-default grade.
    pub fn is_graded(&self) -> bool {
        match self {
            Formula::Diamond(k, f) => *k != 1 || f.is_graded(),
            Formula::Square(k, f) => *k != 0 || f.is_graded(),
            Formula::Not(f) | Formula::Mu(_, f) | Formula::Nu(_, f) => f.is_graded(),
            Formula::And(a, b) | Formula::Or(a, b) => a.is_graded() || b.is_graded(),
            _ => false,
        }
    }

    /// Largest grade of a graded diamond (1 when there is none).
    pub fn max_grade(&self) -> u32 {
        match self {
            Formula::Diamond(k, f) => (*k).max(f.max_grade()),
            Formula::Square(k, f) => (*k).max(f.max_grade()).max(1),
            Formula::Not(f) | Formula::Mu(_, f) | Formula::Nu(_, f) => f.max_grade(),
            Formula::And(a, b) | Formula::Or(a, b) => a.max_grade().max(b.max_grade()),
            _ => 1,
        }
    }

    /// Collapses every grade: diamonds to ◇, boxes to □.
    pub fn flatten(&self) -> Formula {
        match self {
            Formula::Diamond(_, f) => Formula::dia(f.flatten()),
            Formula::Square(_, f) => Formula::boxed(f.flatten()),
            Formula::Not(f) => Formula::not(f.flatten()),
            Formula::Mu(x, f) => Formula::mu(x.clone(), f.flatten()),
            Formula::Nu(x, f) => Formula::nu(x.clone(), f.flatten()),
            Formula::And(a, b) => Formula::and(a.flatten(), b.flatten()),
            Formula::Or(a, b) => Formula::or(a.flatten(), b.flatten()),
            other => other.clone(),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::render(self))
    }
}

/// Hintikka formula χ with N ⊨ χ iff N ≈^n_σ M.
pub fn characteristic_formula(m: &KripkeTree, sig: &Signature, n: usize) -> Formula {
    characteristic_at(m, m.root(), sig, n)
}

pub(crate) fn characteristic_at(m: &KripkeTree, v: usize, sig: &Signature, n: usize) -> Formula {
    let label = m.label(v);
    let lits = sig.iter().map(|p| Formula::lit(p.clone(), label.contains(p)));
    if n == 0 {
        return Formula::conj(lits);
    }
    let mut kids: Vec<Formula> = m
        .children(v)
        .iter()
        .map(|&c| characteristic_at(m, c, sig, n - 1))
        .collect();
    kids.sort();
    kids.dedup();
    let dias: Vec<Formula> = kids.iter().cloned().map(Formula::dia).collect();
    Formula::conj(lits.chain(dias).chain([Formula::boxed(Formula::disj(kids))]))
}

fn b_prop(i: usize) -> String {
    format!("b{i}")
}

/// The formula families ψ_i and ψ′_i of the interpolant-size lower bound.
pub fn gadget(i: usize) -> (Formula, Formula) {
    let mut psi = Formula::prop("a");
    let mut psi_p = Formula::prop("a");
    for k in 0..i {
        psi = gadget_step(k, psi);
        psi_p = gadget_step_prime(k, psi_p);
    }
    (psi, psi_p)
}

fn boxes_below(i: usize, f: &Formula) -> Formula {
    Formula::conj((0..i).map(|j| Formula::box_power(j, f.clone())))
}

fn gadget_step(i: usize, prev: Formula) -> Formula {
    let a = Formula::prop("a");
    let b = Formula::prop(b_prop(i));
    let nb = Formula::NegProp(b_prop(i));
    let mut inner = vec![prev];
    if i > 0 {
        inner.push(Formula::implies(b.clone(), boxes_below(i, &b)));
        inner.push(Formula::implies(nb.clone(), boxes_below(i, &nb)));
    }
    Formula::conj([
        Formula::dia(Formula::and(a.clone(), b)),
        Formula::dia(Formula::and(a.clone(), nb)),
        Formula::boxed(Formula::implies(a, Formula::conj(inner))),
    ])
}

fn gadget_step_prime(i: usize, prev: Formula) -> Formula {
    let a = Formula::prop("a");
    let na = Formula::NegProp("a".into());
    let guard = |last: Formula| {
        let mut parts = vec![na.clone()];
        if i > 0 {
            parts.push(boxes_below(i, &na));
        }
        parts.push(last);
        Formula::conj(parts)
    };
    Formula::conj([
        Formula::dia(guard(Formula::prop("c"))),
        Formula::dia(guard(Formula::NegProp("c".into()))),
        Formula::dia(Formula::and(a, prev)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn metrics_examples() {
        let f = p("a & <>(a & <>a)");
        let m = f.metrics();
        assert_eq!(m.depth, 2);
        assert_eq!(m.sig, Signature::from_names(["a"]));
        assert_eq!(p("a").modal_depth(), 0);
        let t = p("nu X. <>X");
        assert_eq!(t.modal_depth(), 1);
        assert!(t.sig().is_empty());
        assert_eq!(t.size(), "nu X. <>X".len());
    }

    #[test]
    fn flatten_examples() {
        assert_eq!(p("<3> a").flatten(), p("<>a"));
        assert_eq!(p("THETA_D(2)").flatten(), p("nu X. []X & []false"));
        let f = p("mu X. a | <>X & []b");
        assert_eq!(f.flatten(), f);
    }

    #[test]
    fn flatten_keeps_depth_and_sig() {
        let f = p("<2>(a & [1]<3>b) | mu Y. [2]Y");
        let g = f.flatten();
        assert_eq!(f.modal_depth(), g.modal_depth());
        assert_eq!(f.sig(), g.sig());
        assert!(!g.is_graded());
    }

    #[test]
    fn characteristic_examples() {
        let sig = Signature::from_names(["a"]);
        let single = KripkeTree::leaf(["a"]);
        assert_eq!(characteristic_formula(&single, &sig, 1), p("a & []false"));
        let t = KripkeTree::node(Vec::<&str>::new(), vec![KripkeTree::leaf(["a"])]);
        assert_eq!(characteristic_formula(&t, &sig, 1), p("~a & <>a & []a"));
        assert_eq!(characteristic_formula(&t, &sig, 0), p("~a"));
    }

    #[test]
    fn gadget_examples() {
        let (g0, g0p) = gadget(0);
        assert_eq!(g0, p("a"));
        assert_eq!(g0p, p("a"));
        let (g1, _) = gadget(1);
        assert_eq!(g1, p("<>(a & b0) & <>(a & ~b0) & [](~a | a)"));
        let (g2, g2p) = gadget(2);
        assert_eq!(g2.sig(), Signature::from_names(["a", "b0", "b1"]));
        assert_eq!(g2p.sig(), Signature::from_names(["a", "c"]));
    }

    #[test]
    fn gadget_size_is_quadratic() {
        let sizes: Vec<usize> = (1..=8).map(|i| gadget(i).0.size()).collect();
        for (i, s) in sizes.iter().enumerate() {
            let i = i + 1;
            assert!(*s <= 40 * i * i, "size {s} at i={i}");
        }
    }

    #[test]
    fn nabla_of_empty_is_box_false() {
        assert_eq!(Formula::nabla(vec![]), p("[]false"));
        assert_eq!(Formula::nabla(vec![p("a")]), p("<>a & []a"));
    }
}
