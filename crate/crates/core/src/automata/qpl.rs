use std::collections::{BTreeMap, BTreeSet};

use super::prefix::{prefix_automaton, FinTreeAutomaton};
use super::Npta;
use crate::budget::Budget;
use crate::error::Result;
use crate::formula::Signature;
use crate::kripke::KripkeTree;
use crate::util::{combinations, Matching};

/// Recognizer of QPL(L): finite trees (with cut nodes) that are images of
/// finite prefixes of accepted trees under functional bisimulations. Runs
/// on sets of prefix-automaton states: the states that some preimage
/// subtree can be in.
#[derive(Clone, Debug)]
pub struct QplAutomaton {
    pub fin: FinTreeAutomaton,
}

pub fn qpl_automaton(a: &Npta, sig: &Signature) -> Result<QplAutomaton> {
    Ok(QplAutomaton { fin: prefix_automaton(a, sig)? })
}

type StateSet = Vec<bool>;

impl QplAutomaton {
    pub fn len(&self) -> usize {
        self.fin.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fin.is_empty()
    }

    /// Whether some preimage node in state `q` with letter `c` can have
    /// its children mapped onto children whose state sets are `kids`.
    fn valid(&self, q: usize, c: usize, kids: &[&StateSet]) -> bool {
        let d = self.fin.arity;
        self.fin.delta[q][c].iter().any(|p| {
            if kids.is_empty() {
                return p.fixed.is_empty();
            }
            if !p.fixed.iter().all(|&f| kids.iter().any(|x| x[f])) {
                return false;
            }
            let adj: Vec<Vec<usize>> =
                kids.iter().map(|x| (0..p.fixed.len()).filter(|&i| x[p.fixed[i]]).collect()).collect();
            let needs: Vec<bool> = kids.iter().map(|x| !p.repeat.iter().any(|&r| x[r])).collect();
            let mut m = Matching::new(adj, p.fixed.len());
            for (j, &need) in needs.iter().enumerate() {
                if need && !m.augment(j) {
                    return false;
                }
            }
            for (j, &need) in needs.iter().enumerate() {
                if !need {
                    m.augment(j);
                }
            }
            let uncovered = kids.len() - m.size();
            d.map_or(true, |d| p.fixed.len() + uncovered <= d)
        })
    }

    fn image(&self, c: usize, kids: &[&StateSet]) -> StateSet {
        (0..self.len()).map(|q| self.valid(q, c, kids)).collect()
    }

    fn cut_set(&self, c: usize) -> StateSet {
        (0..self.len()).map(|q| self.fin.leaf_accept[q][c]).collect()
    }

    pub fn state_sets(&self, t: &KripkeTree, cut: &dyn Fn(usize) -> bool) -> Vec<StateSet> {
        let mut x: Vec<StateSet> = vec![Vec::new(); t.len()];
        for v in (0..t.len()).rev() {
            let c = self.fin.sig.letter_of(t.label(v).iter()) as usize;
            x[v] = if cut(v) {
                self.cut_set(c)
            } else {
                let kids: Vec<&StateSet> = t.children(v).iter().map(|&w| &x[w]).collect();
                self.image(c, &kids)
            };
        }
        x
    }

    pub fn accepts_with(&self, t: &KripkeTree, cut: &dyn Fn(usize) -> bool) -> bool {
        match self.fin.initial {
            Some(q) => self.state_sets(t, cut)[t.root()][q],
            None => false,
        }
    }

    /// Membership of the n-prefix of `t` (nodes at depth n are cut).
    pub fn accepts_prefix(&self, t: &KripkeTree, n: usize) -> bool {
        let p = t.prefix(n);
        let depths = p.depths();
        self.accepts_with(&p, &|v| depths[v] == n)
    }

    /// Membership of a finite tree read as a whole (no cut nodes).
    pub fn accepts_tree(&self, t: &KripkeTree) -> bool {
        self.accepts_with(t, &|_| false)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Origin {
    Cut(u32),
    Node(u32, Vec<(StateSet, StateSet)>),
}

/// Joint QPL chain: level i holds the maximal pairs (X, X′) realized by
/// one tree all of whose cut nodes lie at depth ≥ i.
#[derive(Clone, Debug)]
pub struct QplChain {
    pub consistent: bool,
    pub first_failure: Option<usize>,
    pub stable_index: usize,
    pub sizes: Vec<usize>,
    levels: Vec<BTreeMap<(StateSet, StateSet), Origin>>,
    sig: Signature,
}

impl QplChain {
    /// A σ-tree in both QPL languages as an n-prefix, if one exists.
    pub fn witness(&self, n: usize, a: &QplAutomaton, b: &QplAutomaton) -> Option<KripkeTree> {
        let (i1, i2) = (a.fin.initial?, b.fin.initial?);
        let level = &self.levels[n.min(self.levels.len() - 1)];
        let key = level.keys().find(|(x, y)| x[i1] && y[i2])?;
        Some(self.unfold(n, key))
    }

    fn unfold(&self, n: usize, key: &(StateSet, StateSet)) -> KripkeTree {
        let level = &self.levels[n.min(self.levels.len() - 1)];
        match &level[key] {
            Origin::Cut(c) => KripkeTree::from_label_set(self.sig.letter_props(*c), Vec::new()),
            Origin::Node(c, kids) => {
                let children = kids.iter().map(|k| self.unfold(n - 1, k)).collect();
                KripkeTree::from_label_set(self.sig.letter_props(*c), children)
            }
        }
    }
}

fn maximal(items: BTreeMap<(StateSet, StateSet), Origin>) -> BTreeMap<(StateSet, StateSet), Origin> {
    let sub = |a: &StateSet, b: &StateSet| a.iter().zip(b).all(|(x, y)| !x || *y);
    let keys: Vec<&(StateSet, StateSet)> = items.keys().collect();
    let keep: BTreeSet<(StateSet, StateSet)> = keys
        .iter()
        .filter(|k| !keys.iter().any(|o| o != *k && sub(&k.0, &o.0) && sub(&k.1, &o.1)))
        .map(|k| (*k).clone())
        .collect();
    items.into_iter().filter(|(k, _)| keep.contains(k)).collect()
}

/// Decides whether both QPL languages share an n-prefix for every n.
/// Children are drawn as sets of distinct maximal pairs from the level
/// below, which loses nothing: merging children with equal pairs or
/// enlarging a child's pair only enlarges the parent's pair.
pub fn qpl_consistency(a: &QplAutomaton, b: &QplAutomaton, budget: &Budget) -> Result<QplChain> {
    let sig = a.fin.sig.clone();
    let letters = sig.letter_count() as u32;
    let arity = match (a.fin.arity, b.fin.arity) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    };
    let (Some(i1), Some(i2)) = (a.fin.initial, b.fin.initial) else {
        return Ok(QplChain {
            consistent: false,
            first_failure: Some(0),
            stable_index: 0,
            sizes: vec![0],
            levels: vec![BTreeMap::new()],
            sig,
        });
    };
    let mut level: BTreeMap<(StateSet, StateSet), Origin> = BTreeMap::new();
    for c in 0..letters {
        level.insert((a.cut_set(c as usize), b.cut_set(c as usize)), Origin::Cut(c));
    }
    let mut levels = vec![maximal(level)];
    loop {
        let prev = levels.last().expect("level");
        let elems: Vec<&(StateSet, StateSet)> = prev.keys().collect();
        let cap = arity.unwrap_or(elems.len()).min(elems.len());
        let mut next: BTreeMap<(StateSet, StateSet), Origin> = BTreeMap::new();
        for size in 0..=cap {
            let subsets = combinations(elems.len(), size);
            budget.charge((subsets.len() as u64) * letters as u64, "quotient-prefix chain")?;
            for subset in subsets {
                let xs: Vec<&StateSet> = subset.iter().map(|&i| &elems[i].0).collect();
                let ys: Vec<&StateSet> = subset.iter().map(|&i| &elems[i].1).collect();
                for c in 0..letters {
                    let key = (a.image(c as usize, &xs), b.image(c as usize, &ys));
                    if key.0.iter().any(|&x| x) || key.1.iter().any(|&y| y) {
                        next.entry(key).or_insert_with(|| {
                            Origin::Node(c, subset.iter().map(|&i| elems[i].clone()).collect())
                        });
                    }
                }
            }
        }
        let next = maximal(next);
        let stable = next.keys().eq(prev.keys());
        levels.push(next);
        if stable {
            break;
        }
    }
    let member = |l: &BTreeMap<(StateSet, StateSet), Origin>| l.keys().any(|(x, y)| x[i1] && y[i2]);
    let first_failure = levels.iter().position(|l| !member(l));
    Ok(QplChain {
        consistent: member(levels.last().expect("level")),
        first_failure,
        stable_index: levels.len() - 2,
        sizes: levels.iter().map(BTreeMap::len).collect(),
        levels,
        sig,
    })
}
