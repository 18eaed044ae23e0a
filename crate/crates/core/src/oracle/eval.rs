use std::collections::BTreeSet;

use crate::error::Result;
use crate::formula::{Formula, FormulaGraph, NodeKind};
use crate::kripke::KripkeTree;

/// Finite Kripke structure (any graph, cycles allowed).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Structure {
    pub labels: Vec<BTreeSet<String>>,
    pub succ: Vec<Vec<usize>>,
}

impl Structure {
    pub fn from_tree(t: &KripkeTree) -> Self {
        Structure {
            labels: (0..t.len()).map(|v| t.label(v).clone()).collect(),
            succ: (0..t.len()).map(|v| t.children(v).to_vec()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Finite unravelling from `v` down to `depth`.
    pub fn unravel(&self, v: usize, depth: usize) -> KripkeTree {
        let kids = if depth == 0 { Vec::new() } else { self.succ[v].iter().map(|&w| self.unravel(w, depth - 1)).collect() };
        KripkeTree::from_label_set(self.labels[v].clone(), kids)
    }
}

/// Knaster–Tarski evaluation: the set of worlds satisfying each closed
/// subformula position, with free variables read as their binders.
pub fn truth_table(s: &Structure, g: &FormulaGraph) -> Vec<Vec<bool>> {
    let n = s.len();
    let mut env: Vec<Option<Vec<bool>>> = vec![None; g.len()];
    let mut out = vec![Vec::new(); g.len()];
    // Binders precede their bodies, so enclosing binders are closed first.
    for v in 0..g.len() {
        if let NodeKind::Fix { .. } = g.nodes[v] {
            let val = eval_set(s, g, v, &mut env);
            env[v] = Some(val);
        }
    }
    for v in 0..g.len() {
        out[v] = match &env[v] {
            Some(val) if matches!(g.nodes[v], NodeKind::Fix { .. }) => val.clone(),
            _ => eval_set(s, g, v, &mut env),
        };
        debug_assert_eq!(out[v].len(), n);
    }
    out
}

fn eval_set(s: &Structure, g: &FormulaGraph, v: usize, env: &mut Vec<Option<Vec<bool>>>) -> Vec<bool> {
    let n = s.len();
    match g.nodes[v] {
        NodeKind::True => vec![true; n],
        NodeKind::False => vec![false; n],
        NodeKind::Lit { prop, positive } => {
            let name = g.sig.iter().nth(prop).expect("proposition index");
            (0..n).map(|w| s.labels[w].contains(name) == positive).collect()
        }
        NodeKind::And(a, b) | NodeKind::Or(a, b) => {
            let x = eval_set(s, g, a, env);
            let y = eval_set(s, g, b, env);
            let and = matches!(g.nodes[v], NodeKind::And(..));
            x.iter().zip(&y).map(|(p, q)| if and { *p && *q } else { *p || *q }).collect()
        }
        NodeKind::Dia { grade, body } => {
            let x = eval_set(s, g, body, env);
            (0..n).map(|w| s.succ[w].iter().filter(|&&u| x[u]).count() >= grade as usize).collect()
        }
        NodeKind::Box { grade, body } => {
            let x = eval_set(s, g, body, env);
            (0..n).map(|w| s.succ[w].iter().filter(|&&u| !x[u]).count() <= grade as usize).collect()
        }
        NodeKind::Var { binder } => env[binder].clone().expect("variable evaluated inside its binder"),
        NodeKind::Fix { nu, body } => {
            let saved = env[v].take();
            let mut cur = vec![nu; n];
            loop {
                env[v] = Some(cur.clone());
                let next = eval_set(s, g, body, env);
                if next == cur {
                    break;
                }
                cur = next;
            }
            env[v] = saved;
            cur
        }
    }
}

/// Satisfaction at world `v` by direct fixpoint iteration.
pub fn eval_structure(s: &Structure, v: usize, phi: &Formula) -> Result<bool> {
    let g = FormulaGraph::new(phi)?;
    Ok(truth_table(s, &g)[g.root][v])
}

/// Satisfaction at the root of a finite tree by direct fixpoint iteration.
pub fn eval_tree(t: &KripkeTree, phi: &Formula) -> Result<bool> {
    eval_structure(&Structure::from_tree(t), t.root(), phi)
}

/// Closed truth values of every subformula position at a single world.
/// `has(i)` tells whether proposition `i` of the formula signature holds;
/// `counts(m)` gives, for modal position `m`, how many children satisfy and
/// how many falsify its body (capped counts are fine above the grade).
pub(crate) fn local_vector(g: &FormulaGraph, has: &dyn Fn(usize) -> bool, counts: &dyn Fn(usize) -> (usize, usize)) -> Vec<bool> {
    let mut env: Vec<Option<bool>> = vec![None; g.len()];
    let mut out = vec![false; g.len()];
    for v in 0..g.len() {
        if let NodeKind::Fix { .. } = g.nodes[v] {
            env[v] = Some(eval_point(g, v, has, counts, &mut env));
        }
    }
    for v in 0..g.len() {
        out[v] = match g.nodes[v] {
            NodeKind::Fix { .. } => env[v].expect("binder value"),
            _ => eval_point(g, v, has, counts, &mut env),
        };
    }
    out
}

fn eval_point(
    g: &FormulaGraph,
    v: usize,
    has: &dyn Fn(usize) -> bool,
    counts: &dyn Fn(usize) -> (usize, usize),
    env: &mut Vec<Option<bool>>,
) -> bool {
    match g.nodes[v] {
        NodeKind::True => true,
        NodeKind::False => false,
        NodeKind::Lit { prop, positive } => has(prop) == positive,
        NodeKind::And(a, b) => eval_point(g, a, has, counts, env) && eval_point(g, b, has, counts, env),
        NodeKind::Or(a, b) => eval_point(g, a, has, counts, env) || eval_point(g, b, has, counts, env),
        NodeKind::Dia { grade, .. } => counts(v).0 >= grade as usize,
        NodeKind::Box { grade, .. } => counts(v).1 <= grade as usize,
        NodeKind::Var { binder } => env[binder].expect("variable evaluated inside its binder"),
        NodeKind::Fix { nu, body } => {
            let saved = env[v].take();
            let mut cur = nu;
            loop {
                env[v] = Some(cur);
                let next = eval_point(g, body, has, counts, env);
                if next == cur {
                    break;
                }
                cur = next;
            }
            env[v] = saved;
            cur
        }
    }
}
