use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::rc::Rc;

use super::eval::{local_vector, truth_table, Structure};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::formula::{Formula, FormulaGraph, NodeKind, Signature};
use crate::kripke::KripkeTree;

/// Which prefix equivalence relates the two models.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// ≈^n_σ: bounded σ-bisimilarity.
    Bisim,
    /// ≅^n_σ: isomorphism of σ-reducts of n-prefixes.
    Iso,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum JointOutcome {
    Found(KripkeTree, KripkeTree),
    ExhaustedNone,
    BudgetHit,
}

/// How deep small cyclic continuation worlds are unravelled in witnesses.
const WORLD_UNRAVEL: usize = 2;

enum Real {
    World(Rc<Structure>, usize),
    Node(BTreeSet<String>, Vec<Rc<Real>>),
}

impl Real {
    fn tree(&self) -> KripkeTree {
        match self {
            Real::World(s, v) => s.unravel(*v, WORLD_UNRAVEL),
            Real::Node(l, kids) => KripkeTree::from_label_set(l.clone(), kids.iter().map(|k| k.tree()).collect()),
        }
    }
}

type Vector = Vec<bool>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Summary {
    counts: Vec<(u8, u8)>,
    total: usize,
    codes: Vec<String>,
}

/// Profile machinery for one formula over the signature sig(φ) ∪ σ.
struct Side<'a> {
    g: FormulaGraph,
    full: Signature,
    sigma: &'a Signature,
    modal_of: Vec<usize>,
    bodies: Vec<usize>,
    cap: u8,
    d: Option<usize>,
    rel: Relation,
    has: Vec<Vec<bool>>,
    budget: &'a Budget,
}

impl<'a> Side<'a> {
    fn new(phi: &Formula, sigma: &'a Signature, d: Option<usize>, rel: Relation, budget: &'a Budget) -> Result<Self> {
        let g = FormulaGraph::new(phi)?;
        let full = g.sig.union(sigma);
        let mut modal_of = vec![usize::MAX; g.len()];
        let mut bodies = Vec::new();
        for (v, k) in g.nodes.iter().enumerate() {
            if let NodeKind::Dia { body, .. } | NodeKind::Box { body, .. } = k {
                modal_of[v] = bodies.len();
                bodies.push(*body);
            }
        }
        let cap = (phi.max_grade() as usize + 1).min(u8::MAX as usize) as u8;
        let names = g.sig.names();
        let has = (0..full.letter_count() as u32)
            .map(|c| {
                let props = full.letter_props(c);
                names.iter().map(|p| props.contains(p)).collect()
            })
            .collect();
        Ok(Side { g, full, sigma, modal_of, bodies, cap, d, rel, has, budget })
    }

    fn letters(&self) -> u32 {
        self.full.letter_count() as u32
    }

    fn sigma_label(&self, c: u32) -> String {
        let props: Vec<String> = self.full.letter_props(c).into_iter().filter(|p| self.sigma.contains(p)).collect();
        format!("{{{}}}", props.join(" "))
    }

    fn vector(&self, c: u32, s: &Summary) -> Vector {
        let has = &self.has[c as usize];
        let counts = |m: usize| {
            let (a, b) = s.counts[self.modal_of[m]];
            (a as usize, b as usize)
        };
        local_vector(&self.g, &|i| has[i], &counts)
    }

    fn empty_summary(&self) -> Summary {
        Summary { counts: vec![(0, 0); self.bodies.len()], total: 0, codes: Vec::new() }
    }

    fn add(&self, s: &Summary, v: &Vector, code: Option<&String>) -> Option<Summary> {
        if self.d.is_some_and(|d| s.total >= d) {
            return None;
        }
        let mut t = s.clone();
        for (i, &b) in self.bodies.iter().enumerate() {
            let slot = if v[b] { &mut t.counts[i].0 } else { &mut t.counts[i].1 };
            *slot = (*slot + 1).min(self.cap);
        }
        if self.d.is_some() {
            t.total += 1;
        }
        if let Some(code) = code {
            let pos = t.codes.binary_search(code).unwrap_or_else(|p| p);
            if self.rel == Relation::Iso || t.codes.get(pos) != Some(code) {
                t.codes.insert(pos, code.clone());
            }
        }
        Some(t)
    }

    /// Every child summary reachable by adding elements one at a time, with
    /// one realizing choice of elements each.
    fn summaries(&self, elems: &[(Option<&String>, &Vector)]) -> Result<BTreeMap<Summary, Vec<usize>>> {
        let mut seen: BTreeMap<Summary, Vec<usize>> = BTreeMap::new();
        let start = self.empty_summary();
        seen.insert(start.clone(), Vec::new());
        let mut queue = VecDeque::from([start]);
        while let Some(s) = queue.pop_front() {
            self.budget.charge(elems.len() as u64 + 1, "oracle child summaries")?;
            for (i, (code, v)) in elems.iter().enumerate() {
                let Some(t) = self.add(&s, v, *code) else { continue };
                if !seen.contains_key(&t) {
                    let mut prov = seen[&s].clone();
                    prov.push(i);
                    seen.insert(t.clone(), prov);
                    queue.push_back(t);
                }
            }
        }
        Ok(seen)
    }

    /// Small cyclic worlds (one or two states) standing in for infinite
    /// continuations, followed by closure under building finite trees on
    /// top of them.
    fn catalog(&self) -> Result<BTreeMap<(u32, Vector), Rc<Real>>> {
        let mut cat: BTreeMap<(u32, Vector), Rc<Real>> = BTreeMap::new();
        let letters = self.letters();
        let max_out = self.d.unwrap_or(usize::MAX);
        for size in 1..=2usize {
            let edge_sets = 1u32 << (size * size);
            for lab in 0..letters.pow(size as u32) {
                let labs: Vec<u32> = (0..size).map(|i| lab / letters.pow(i as u32) % letters).collect();
                for edges in 0..edge_sets {
                    let succ: Vec<Vec<usize>> =
                        (0..size).map(|u| (0..size).filter(|w| edges >> (u * size + w) & 1 == 1).collect()).collect();
                    if succ.iter().any(|s| s.len() > max_out) {
                        continue;
                    }
                    self.budget.charge(self.g.len() as u64, "oracle continuation worlds")?;
                    let s = Rc::new(Structure { labels: labs.iter().map(|&c| self.full.letter_props(c)).collect(), succ });
                    let table = truth_table(&s, &self.g);
                    for (v, &c) in labs.iter().enumerate() {
                        let vec: Vector = table.iter().map(|col| col[v]).collect();
                        cat.entry((c, vec)).or_insert_with(|| Rc::new(Real::World(s.clone(), v)));
                    }
                }
            }
        }
        loop {
            let keys: Vec<(u32, Vector)> = cat.keys().cloned().collect();
            let elems: Vec<(Option<&String>, &Vector)> = keys.iter().map(|(_, v)| (None, v)).collect();
            let sums = self.summaries(&elems)?;
            let mut fresh = Vec::new();
            for (s, prov) in &sums {
                for c in 0..letters {
                    let vec = self.vector(c, s);
                    let key = (c, vec);
                    if !cat.contains_key(&key) && !fresh.iter().any(|(k, _)| k == &key) {
                        let kids = prov.iter().map(|&i| cat[&keys[i]].clone()).collect();
                        fresh.push((key, Rc::new(Real::Node(self.full.letter_props(c), kids))));
                    }
                }
            }
            if fresh.is_empty() {
                return Ok(cat);
            }
            cat.extend(fresh);
        }
    }

    /// σ-codes of n-prefixes of models of the formula, each with a witness.
    fn realized(&self, n: usize) -> Result<BTreeMap<String, Rc<Real>>> {
        let cat = self.catalog()?;
        let mut level: BTreeMap<(String, Vector), Rc<Real>> = BTreeMap::new();
        for ((c, v), r) in cat {
            level.entry((self.sigma_label(c), v)).or_insert(r);
        }
        for _ in 0..n {
            let keys: Vec<(String, Vector)> = level.keys().cloned().collect();
            let elems: Vec<(Option<&String>, &Vector)> = keys.iter().map(|(code, v)| (Some(code), v)).collect();
            let sums = self.summaries(&elems)?;
            let mut next: BTreeMap<(String, Vector), Rc<Real>> = BTreeMap::new();
            for (s, prov) in &sums {
                for c in 0..self.letters() {
                    let code = format!("{}({})", self.sigma_label(c), s.codes.concat());
                    let key = (code, self.vector(c, s));
                    if !next.contains_key(&key) {
                        let kids = prov.iter().map(|&i| level[&keys[i]].clone()).collect();
                        next.insert(key, Rc::new(Real::Node(self.full.letter_props(c), kids)));
                    }
                }
            }
            level = next;
        }
        let mut out = BTreeMap::new();
        for ((code, v), r) in level {
            if v[self.g.root] {
                out.entry(code).or_insert(r);
            }
        }
        Ok(out)
    }
}

/// σ-codes (in the format of [`KripkeTree::code`]) of the n-prefixes of
/// models of `phi` in T^d (unbounded branching when `d` is `None`), each
/// with a finite witness whose n-prefix realizes it.
///
/// Models range over finite trees whose leaves may continue into small
/// cyclic worlds of at most two states, unravelled to a fixed depth in the
/// witness.
pub fn realized_prefixes(
    phi: &Formula,
    sigma: &Signature,
    n: usize,
    d: Option<usize>,
    rel: Relation,
    budget: &Budget,
) -> Result<BTreeMap<String, KripkeTree>> {
    if rel == Relation::Iso && d.is_none() {
        return Err(Error::Precondition("isomorphism profiles need a branching bound".into()));
    }
    let side = Side::new(phi, sigma, d, rel, budget)?;
    Ok(side.realized(n)?.into_iter().map(|(k, r)| (k, r.tree())).collect())
}

/// Joint consistency of `phi` and `psi` modulo `rel` at level `n` within T^d.
pub fn joint_consistency_with(
    phi: &Formula,
    psi: &Formula,
    sigma: &Signature,
    n: usize,
    d: Option<usize>,
    rel: Relation,
    budget: &Budget,
) -> Result<JointOutcome> {
    let run = || -> Result<JointOutcome> {
        let left = realized_prefixes(phi, sigma, n, d, rel, budget)?;
        let right = realized_prefixes(psi, sigma, n, d, rel, budget)?;
        Ok(match left.iter().find(|(k, _)| right.contains_key(*k)) {
            Some((k, m)) => JointOutcome::Found(m.clone(), right[k].clone()),
            None => JointOutcome::ExhaustedNone,
        })
    };
    match run() {
        Err(Error::BudgetExhausted(_)) => Ok(JointOutcome::BudgetHit),
        other => other,
    }
}

/// Searches for M ⊨ φ and M′ ⊨ φ′ in T^d with M ≈^n_σ M′.
///
/// Panics only on malformed formulas; use [`joint_consistency_with`] for a
/// fallible variant.
pub fn joint_consistency_bruteforce(phi: &Formula, psi: &Formula, sigma: &Signature, n: usize, d: usize, budget: u64) -> JointOutcome {
    joint_consistency_with(phi, psi, sigma, n, Some(d), Relation::Bisim, &Budget::new(budget))
        .expect("oracle formulas must be well formed")
}
