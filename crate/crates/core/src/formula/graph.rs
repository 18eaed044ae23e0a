use std::collections::BTreeSet;

use super::{normalize, Formula, Signature};
use crate::error::{Error, Result};
use crate::util::scc;

/// One position of the subformula graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NodeKind {
    True,
    False,
    Lit { prop: usize, positive: bool },
    And(usize, usize),
    Or(usize, usize),
    Dia { grade: u32, body: usize },
    Box { grade: u32, body: usize },
    Var { binder: usize },
    Fix { nu: bool, body: usize },
}

/// Syntax positions of a normalized formula with variables linked to their
/// binders and max-parity priorities on binders (ν even, µ odd).
///
/// A binder X gets the least priority of its parity that is at least the
/// priority of every binder Y nested in X's body in which X occurs free;
/// all other positions get 0. The highest binder regenerated infinitely
/// often along a play is then the outermost one.
#[derive(Clone, Debug)]
pub struct FormulaGraph {
    pub nodes: Vec<NodeKind>,
    pub root: usize,
    pub sig: Signature,
    pub priority: Vec<u32>,
    names: Vec<Option<String>>,
    comp: Vec<usize>,
}

impl FormulaGraph {
    /// Normalizes `f` and builds its graph.
    pub fn new(f: &Formula) -> Result<Self> {
        let n = normalize(f)?;
        Self::from_normalized(&n)
    }

    /// Builds the graph of a formula already in negation normal form.
    pub fn from_normalized(f: &Formula) -> Result<Self> {
        let sig = f.sig();
        let mut g = FormulaGraph {
            nodes: Vec::new(),
            root: 0,
            sig,
            priority: Vec::new(),
            names: Vec::new(),
            comp: Vec::new(),
        };
        g.root = g.build(f, &mut Vec::new())?;
        g.assign_priorities();
        let comp = scc(g.nodes.len(), |v| g.all_succ(v));
        g.comp = comp;
        Ok(g)
    }

    fn build(&mut self, f: &Formula, scope: &mut Vec<(String, usize)>) -> Result<usize> {
        let idx = self.nodes.len();
        self.nodes.push(NodeKind::True);
        self.names.push(None);
        let kind = match f {
            Formula::True => NodeKind::True,
            Formula::False => NodeKind::False,
            Formula::Prop(p) | Formula::NegProp(p) => NodeKind::Lit {
                prop: self.sig.index_of(p).expect("proposition in signature"),
                positive: matches!(f, Formula::Prop(_)),
            },
            Formula::Not(_) => {
                return Err(Error::Precondition("formula is not in negation normal form".into()))
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                let x = self.build(a, scope)?;
                let y = self.build(b, scope)?;
                if matches!(f, Formula::And(..)) {
                    NodeKind::And(x, y)
                } else {
                    NodeKind::Or(x, y)
                }
            }
            Formula::Diamond(k, b) => {
                let body = self.build(b, scope)?;
                NodeKind::Dia { grade: *k, body }
            }
            Formula::Square(k, b) => {
                let body = self.build(b, scope)?;
                NodeKind::Box { grade: *k, body }
            }
            Formula::Var(x) => {
                let binder = scope
                    .iter()
                    .rev()
                    .find(|(y, _)| y == x)
                    .map(|(_, i)| *i)
                    .ok_or_else(|| Error::UnboundVariable(x.clone()))?;
                NodeKind::Var { binder }
            }
            Formula::Mu(x, b) | Formula::Nu(x, b) => {
                self.names[idx] = Some(x.clone());
                scope.push((x.clone(), idx));
                let body = self.build(b, scope);
                scope.pop();
                NodeKind::Fix { nu: matches!(f, Formula::Nu(..)), body: body? }
            }
        };
        self.nodes[idx] = kind;
        Ok(idx)
    }

    fn children(&self, v: usize) -> Vec<usize> {
        match self.nodes[v] {
            NodeKind::And(a, b) | NodeKind::Or(a, b) => vec![a, b],
            NodeKind::Dia { body, .. } | NodeKind::Box { body, .. } | NodeKind::Fix { body, .. } => {
                vec![body]
            }
            _ => vec![],
        }
    }

    /// Successors that stay at the same tree node (no modality crossed).
    pub fn local_succ(&self, v: usize) -> Vec<usize> {
        match self.nodes[v] {
            NodeKind::And(a, b) | NodeKind::Or(a, b) => vec![a, b],
            NodeKind::Fix { body, .. } => vec![body],
            NodeKind::Var { binder } => vec![binder],
            _ => vec![],
        }
    }

    fn all_succ(&self, v: usize) -> Vec<usize> {
        match self.nodes[v] {
            NodeKind::Dia { body, .. } | NodeKind::Box { body, .. } => vec![body],
            _ => self.local_succ(v),
        }
    }

    fn assign_priorities(&mut self) {
        let n = self.nodes.len();
        let mut end = vec![0; n];
        for v in (0..n).rev() {
            end[v] = self.children(v).iter().map(|&c| end[c]).max().unwrap_or(v + 1).max(v + 1);
        }
        let mut free: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for v in (0..n).rev() {
            let mut s = BTreeSet::new();
            for c in self.children(v) {
                s.extend(free[c].iter().copied());
            }
            match self.nodes[v] {
                NodeKind::Var { binder } => {
                    s.insert(binder);
                }
                NodeKind::Fix { .. } => {
                    s.remove(&v);
                }
                _ => {}
            }
            free[v] = s;
        }
        let mut prio = vec![0u32; n];
        for x in (0..n).rev() {
            if let NodeKind::Fix { nu, body } = self.nodes[x] {
                let mut floor = 0;
                for y in body..end[x] {
                    if matches!(self.nodes[y], NodeKind::Fix { .. }) && free[y].contains(&x) {
                        floor = floor.max(prio[y]);
                    }
                }
                let parity = if nu { 0 } else { 1 };
                prio[x] = if floor % 2 == parity { floor } else { floor + 1 };
            }
        }
        self.priority = prio;
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_priority(&self) -> u32 {
        self.priority.iter().copied().max().unwrap_or(0)
    }

    pub fn has_mu(&self) -> bool {
        self.nodes.iter().any(|k| matches!(k, NodeKind::Fix { nu: false, .. }))
    }

    /// Component of `v` in the full subformula graph.
    pub fn component(&self, v: usize) -> usize {
        self.comp[v]
    }

    /// True when no component mixes µ- and ν-binders.
    pub fn is_weak(&self) -> bool {
        let ncomp = self.comp.iter().copied().max().map_or(0, |m| m + 1);
        let mut kinds = vec![(false, false); ncomp];
        for (v, k) in self.nodes.iter().enumerate() {
            if let NodeKind::Fix { nu, .. } = k {
                let e = &mut kinds[self.comp[v]];
                if *nu {
                    e.0 = true;
                } else {
                    e.1 = true;
                }
            }
        }
        kinds.iter().all(|&(a, b)| !(a && b))
    }

    /// True when the component of `v` contains a µ-binder.
    pub fn component_is_mu(&self, v: usize) -> bool {
        let c = self.comp[v];
        self.nodes
            .iter()
            .enumerate()
            .any(|(u, k)| self.comp[u] == c && matches!(k, NodeKind::Fix { nu: false, .. }))
    }

    /// Subformula at position `v`, with free variables left as variables.
    pub fn formula_at(&self, v: usize) -> Formula {
        match &self.nodes[v] {
            NodeKind::True => Formula::True,
            NodeKind::False => Formula::False,
            NodeKind::Lit { prop, positive } => {
                Formula::lit(self.sig.names()[*prop].clone(), *positive)
            }
            NodeKind::And(a, b) => Formula::and(self.formula_at(*a), self.formula_at(*b)),
            NodeKind::Or(a, b) => Formula::or(self.formula_at(*a), self.formula_at(*b)),
            NodeKind::Dia { grade, body } => Formula::dia_k(*grade, self.formula_at(*body)),
            NodeKind::Box { grade, body } => Formula::box_k(*grade, self.formula_at(*body)),
            NodeKind::Var { binder } => {
                Formula::Var(self.names[*binder].clone().unwrap_or_default())
            }
            NodeKind::Fix { nu, body } => {
                let x = self.names[v].clone().unwrap_or_default();
                if *nu {
                    Formula::nu(x, self.formula_at(*body))
                } else {
                    Formula::mu(x, self.formula_at(*body))
                }
            }
        }
    }
}
