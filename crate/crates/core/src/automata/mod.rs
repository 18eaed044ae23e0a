//! Nondeterministic parity tree automata (NPTA) over unordered trees, their
//! prefix languages, the tallness chain deciding joint consistency, and the
//! quotient constructions.

mod det;
mod empty;
mod prefix;
mod qpl;
mod quotient;
mod text;

use std::cell::OnceCell;
use std::collections::BTreeSet;
use std::fmt;

pub use det::{DState, Determinizer, Stage, TraceSpec};
pub use prefix::{consistency_for_all_n, prefix_automaton, ChainResult, FinTreeAutomaton};
pub use qpl::{qpl_automaton, qpl_consistency, QplAutomaton, QplChain};
pub use quotient::quotient_automaton;
pub use text::parse_npta;

use crate::error::{Error, Result};
use crate::formula::Signature;
use crate::kripke::KripkeTree;
use crate::util::saturating_matching;

/// Child obligations of one transition: every state of `fixed` labels
/// exactly one child (a multiset, kept sorted), and each remaining child is
/// labelled by some state of `repeat`. `(p q)` is `fixed = [p, q]`,
/// `repeat = []`; a set transition `{p q}` is `fixed = repeat = [p, q]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    pub fixed: Vec<usize>,
    pub repeat: Vec<usize>,
}

impl Pattern {
    pub fn new(mut fixed: Vec<usize>, mut repeat: Vec<usize>) -> Self {
        fixed.sort_unstable();
        repeat.sort_unstable();
        repeat.dedup();
        Pattern { fixed, repeat }
    }

    pub fn tuple(fixed: Vec<usize>) -> Self {
        Pattern::new(fixed, Vec::new())
    }

    pub fn set(states: Vec<usize>) -> Self {
        let mut s = states;
        s.sort_unstable();
        s.dedup();
        Pattern::new(s.clone(), s)
    }

    /// Least number of children a node using this transition has.
    pub fn min_children(&self) -> usize {
        self.fixed.len()
    }

    /// Whether `k` children can be labelled within outdegree bound `d`.
    pub fn admits(&self, k: usize, d: Option<usize>) -> bool {
        k >= self.fixed.len() && (k == self.fixed.len() || !self.repeat.is_empty()) && d.map_or(true, |d| k <= d)
    }

    /// Whether children whose accepting state sets are `kids` can be
    /// labelled consistently with this transition.
    pub fn matches(&self, kids: &[&[bool]]) -> bool {
        if !self.admits(kids.len(), None) {
            return false;
        }
        let adj: Vec<Vec<usize>> =
            self.fixed.iter().map(|&p| (0..kids.len()).filter(|&j| kids[j][p]).collect()).collect();
        let must: Vec<bool> = kids.iter().map(|k| !self.repeat.iter().any(|&r| k[r])).collect();
        saturating_matching(&adj, kids.len(), &must)
    }
}

/// Tree shape accepted by an automaton: at most `d` children, or any finite
/// number of children.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branching {
    Tuple(usize),
    Set,
}

impl Branching {
    pub fn bound(self) -> Option<usize> {
        match self {
            Branching::Tuple(d) => Some(d),
            Branching::Set => None,
        }
    }
}

/// Nondeterministic max-parity tree automaton; letters are bitmasks over
/// `sig` and transitions are stored densely per state and letter.
#[derive(Clone)]
pub struct Npta {
    pub sig: Signature,
    pub branching: Branching,
    pub names: Vec<String>,
    pub initial: usize,
    pub priority: Vec<u32>,
    pub delta: Vec<Vec<Vec<Pattern>>>,
    live: OnceCell<Vec<bool>>,
}

impl fmt::Debug for Npta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl Npta {
    pub fn new(sig: Signature, branching: Branching) -> Self {
        Npta {
            sig,
            branching,
            names: Vec::new(),
            initial: 0,
            priority: Vec::new(),
            delta: Vec::new(),
            live: OnceCell::new(),
        }
    }

    pub fn add_state(&mut self, name: impl Into<String>, priority: u32) -> usize {
        self.names.push(name.into());
        self.priority.push(priority);
        self.delta.push(vec![Vec::new(); self.sig.letter_count()]);
        self.live = OnceCell::new();
        self.names.len() - 1
    }

    /// Adds a transition; patterns that can never fit the outdegree bound
    /// are dropped and duplicates ignored.
    pub fn add_transition(&mut self, q: usize, letter: u32, pattern: Pattern) {
        if let Branching::Tuple(d) = self.branching {
            if pattern.fixed.len() > d {
                return;
            }
        }
        let slot = &mut self.delta[q][letter as usize];
        if !slot.contains(&pattern) {
            slot.push(pattern);
        }
        self.live = OnceCell::new();
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty_automaton(&self) -> bool {
        self.names.is_empty()
    }

    pub fn arity(&self) -> Option<usize> {
        self.branching.bound()
    }

    pub fn letters(&self) -> impl Iterator<Item = u32> {
        0..self.sig.letter_count() as u32
    }

    pub fn transition_count(&self) -> usize {
        self.delta.iter().flatten().map(Vec::len).sum()
    }

    /// The automaton started in `q` instead of the initial state.
    pub fn with_initial(&self, q: usize) -> Npta {
        let mut a = self.clone();
        a.initial = q;
        a
    }

    pub(crate) fn require_tuple(&self) -> Result<usize> {
        match self.branching {
            Branching::Tuple(d) => Ok(d),
            Branching::Set => Err(Error::Unsupported("set-mode automaton where tuple mode is required".into())),
        }
    }

    /// Letter of a tree node over this automaton's signature.
    pub fn letter_of_node(&self, t: &KripkeTree, v: usize) -> u32 {
        self.sig.letter_of(t.label(v).iter())
    }

    /// States accepting the finite subtree at each node, bottom-up.
    pub fn accepting_states(&self, t: &KripkeTree) -> Vec<Vec<bool>> {
        let n = self.len();
        let mut acc = vec![vec![false; n]; t.len()];
        for v in (0..t.len()).rev() {
            if self.arity().is_some_and(|d| t.children(v).len() > d) {
                continue;
            }
            let c = self.letter_of_node(t, v) as usize;
            let kids: Vec<&[bool]> = t.children(v).iter().map(|&w| acc[w].as_slice()).collect();
            let row: Vec<bool> = (0..n).map(|q| self.delta[q][c].iter().any(|p| p.matches(&kids))).collect();
            acc[v] = row;
        }
        acc
    }

    /// Membership of a finite tree (no acceptance condition is involved).
    pub fn accepts(&self, t: &KripkeTree) -> bool {
        !self.is_empty_automaton() && self.accepting_states(t)[t.root()][self.initial]
    }

    /// Adds `(p p)` for every singleton transition `(p)`.
    pub fn duplication_safe_closure(&self) -> Result<Npta> {
        let d = self.require_tuple()?;
        let mut a = self.clone();
        if d < 2 {
            return Ok(a);
        }
        for q in 0..a.len() {
            for c in 0..a.sig.letter_count() {
                let extra: Vec<Pattern> = a.delta[q][c]
                    .iter()
                    .filter(|p| p.fixed.len() == 1 && p.repeat.is_empty())
                    .map(|p| Pattern::tuple(vec![p.fixed[0], p.fixed[0]]))
                    .collect();
                for p in extra {
                    a.add_transition(q, c as u32, p);
                }
            }
        }
        Ok(a)
    }

    pub fn is_duplication_safe(&self) -> bool {
        self.delta.iter().flatten().all(|ps| {
            ps.iter().filter(|p| p.fixed.len() == 1 && p.repeat.is_empty()).all(|p| {
                ps.contains(&Pattern::tuple(vec![p.fixed[0], p.fixed[0]]))
            })
        })
    }

    /// Successor states over all transitions.
    pub(crate) fn successors(&self, q: usize) -> BTreeSet<usize> {
        self.delta[q].iter().flatten().flat_map(|p| p.fixed.iter().chain(&p.repeat).copied()).collect()
    }

    /// Keeps only the states reachable from the initial state.
    pub fn trim_unreachable(&self) -> Npta {
        let mut seen = vec![false; self.len()];
        let mut order = Vec::new();
        if !self.is_empty_automaton() {
            let mut stack = vec![self.initial];
            seen[self.initial] = true;
            while let Some(q) = stack.pop() {
                order.push(q);
                for p in self.successors(q) {
                    if !seen[p] {
                        seen[p] = true;
                        stack.push(p);
                    }
                }
            }
        }
        order.sort_unstable();
        let mut index = vec![usize::MAX; self.len()];
        for (i, &q) in order.iter().enumerate() {
            index[q] = i;
        }
        let mut a = Npta::new(self.sig.clone(), self.branching);
        for &q in &order {
            a.add_state(self.names[q].clone(), self.priority[q]);
        }
        for &q in &order {
            for c in self.letters() {
                for p in &self.delta[q][c as usize] {
                    let map = |v: &Vec<usize>| v.iter().map(|&s| index[s]).collect::<Vec<_>>();
                    a.add_transition(index[q], c, Pattern::new(map(&p.fixed), map(&p.repeat)));
                }
            }
        }
        a.initial = if order.is_empty() { 0 } else { index[self.initial] };
        a
    }
}
