use std::collections::{BTreeSet, HashMap};

use super::{Npta, Pattern};
use crate::error::{Error, Result};
use crate::formula::Signature;
use crate::kripke::KripkeTree;

/// Recognizer of finite trees read as prefixes: a node may be *cut*
/// (its children unknown), in which case `leaf_accept` decides; otherwise
/// its children must match a transition exactly, so a node without
/// children is a real leaf.
#[derive(Clone, Debug)]
pub struct FinTreeAutomaton {
    pub sig: Signature,
    pub names: Vec<String>,
    /// `None` when the language is empty.
    pub initial: Option<usize>,
    pub delta: Vec<Vec<Vec<Pattern>>>,
    pub leaf_accept: Vec<Vec<bool>>,
    pub arity: Option<usize>,
}

/// Outcome of the tallness chain S₀ ⊇ S₁ ⊇ … on a product automaton.
#[derive(Clone, Debug)]
pub struct ChainResult {
    /// Initial state in S_m, i.e. joint consistency at every depth.
    pub consistent: bool,
    /// Least n whose S_n misses the initial state.
    pub first_failure: Option<usize>,
    /// Least i with S_i = S_{i+1}.
    pub stable_index: usize,
    /// Pumping bound |A|×|A′|+1.
    pub m: usize,
    /// Number of product states.
    pub product_states: usize,
    pub sizes: Vec<usize>,
    pub(crate) chain: Vec<Vec<bool>>,
    pub(crate) product: FinTreeAutomaton,
}

impl ChainResult {
    /// A σ-tree accepted by both prefix automata as an n-prefix (cut
    /// exactly at depth n), when one exists.
    pub fn witness(&self, n: usize) -> Option<KripkeTree> {
        self.product.chain_witness(&self.chain, n)
    }
}

impl FinTreeAutomaton {
    pub fn empty(sig: Signature, arity: Option<usize>) -> Self {
        FinTreeAutomaton { sig, names: Vec::new(), initial: None, delta: Vec::new(), leaf_accept: Vec::new(), arity }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.initial.is_none()
    }

    fn letters(&self) -> std::ops::Range<u32> {
        0..self.sig.letter_count() as u32
    }

    /// Accepting states per node; `cut(v)` marks nodes whose children are
    /// unknown.
    pub fn accepting_sets(&self, t: &KripkeTree, cut: &dyn Fn(usize) -> bool) -> Vec<Vec<bool>> {
        let n = self.len();
        let mut acc = vec![vec![false; n]; t.len()];
        for v in (0..t.len()).rev() {
            let c = self.sig.letter_of(t.label(v).iter()) as usize;
            if cut(v) {
                acc[v] = (0..n).map(|q| self.leaf_accept[q][c]).collect();
                continue;
            }
            if self.arity.is_some_and(|d| t.children(v).len() > d) {
                continue;
            }
            let kids: Vec<&[bool]> = t.children(v).iter().map(|&w| acc[w].as_slice()).collect();
            acc[v] = (0..n).map(|q| self.delta[q][c].iter().any(|p| p.matches(&kids))).collect();
        }
        acc
    }

    pub fn accepts_with(&self, t: &KripkeTree, cut: &dyn Fn(usize) -> bool) -> bool {
        match self.initial {
            Some(q) => self.accepting_sets(t, cut)[t.root()][q],
            None => false,
        }
    }

    /// Membership of the n-prefix of `t`: nodes at depth n are cut, nodes
    /// above are expanded.
    pub fn accepts_prefix(&self, t: &KripkeTree, n: usize) -> bool {
        let p = t.prefix(n);
        let depths = p.depths();
        self.accepts_with(&p, &|v| depths[v] == n)
    }

    /// Product automaton recognizing the intersection of both languages.
    pub fn intersect(&self, other: &FinTreeAutomaton) -> Result<FinTreeAutomaton> {
        if self.sig != other.sig {
            return Err(Error::Precondition(format!(
                "product of automata over different signatures {} and {}",
                self.sig, other.sig
            )));
        }
        let arity = match (self.arity, other.arity) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let (Some(i1), Some(i2)) = (self.initial, other.initial) else {
            return Ok(FinTreeAutomaton::empty(self.sig.clone(), arity));
        };
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        let mut out = FinTreeAutomaton::empty(self.sig.clone(), arity);
        let intern = |p: (usize, usize), index: &mut HashMap<(usize, usize), usize>, pairs: &mut Vec<(usize, usize)>| {
            *index.entry(p).or_insert_with(|| {
                pairs.push(p);
                pairs.len() - 1
            })
        };
        intern((i1, i2), &mut index, &mut pairs);
        let mut k = 0;
        while k < pairs.len() {
            let (q1, q2) = pairs[k];
            let mut row = Vec::new();
            let mut leaf = Vec::new();
            for c in self.letters() {
                let c = c as usize;
                leaf.push(self.leaf_accept[q1][c] && other.leaf_accept[q2][c]);
                let mut pats = BTreeSet::new();
                for t in &self.delta[q1][c] {
                    for u in &other.delta[q2][c] {
                        for (fixed, repeat) in product_patterns(t, u, arity) {
                            let f = fixed.into_iter().map(|p| intern(p, &mut index, &mut pairs)).collect();
                            let r = repeat.into_iter().map(|p| intern(p, &mut index, &mut pairs)).collect();
                            pats.insert(Pattern::new(f, r));
                        }
                    }
                }
                row.push(pats.into_iter().collect());
            }
            out.names.push(format!("{}|{}", self.names[q1], other.names[q2]));
            out.delta.push(row);
            out.leaf_accept.push(leaf);
            k += 1;
        }
        out.initial = Some(0);
        Ok(out)
    }

    /// S₀ = states accepting a cut node; S_{i+1} = states with a
    /// transition whose fixed children lie in S_i. Returned up to the
    /// first repetition (inclusive).
    pub fn tallness_chain(&self) -> Vec<Vec<bool>> {
        let n = self.len();
        let s0: Vec<bool> = (0..n).map(|q| self.leaf_accept[q].iter().any(|&b| b)).collect();
        let mut chain = vec![s0];
        loop {
            let prev = chain.last().expect("nonempty chain");
            let next: Vec<bool> = (0..n)
                .map(|q| {
                    self.delta[q].iter().flatten().any(|p| {
                        self.arity.map_or(true, |d| p.fixed.len() <= d) && p.fixed.iter().all(|&s| prev[s])
                    })
                })
                .collect();
            let stable = &next == prev;
            chain.push(next);
            if stable {
                return chain;
            }
        }
    }

    fn chain_witness(&self, chain: &[Vec<bool>], n: usize) -> Option<KripkeTree> {
        let q0 = self.initial?;
        let level = |i: usize| &chain[i.min(chain.len() - 1)];
        if !level(n)[q0] {
            return None;
        }
        Some(self.unfold(q0, n, &level))
    }

    fn unfold<'a>(&self, q: usize, left: usize, level: &dyn Fn(usize) -> &'a Vec<bool>) -> KripkeTree {
        if left == 0 {
            let c = self.letters().find(|&c| self.leaf_accept[q][c as usize]).expect("cut-accepting letter");
            return KripkeTree::from_label_set(self.sig.letter_props(c), Vec::new());
        }
        let below = level(left - 1);
        for c in self.letters() {
            for p in &self.delta[q][c as usize] {
                if self.arity.map_or(true, |d| p.fixed.len() <= d) && p.fixed.iter().all(|&s| below[s]) {
                    let kids = p.fixed.iter().map(|&s| self.unfold(s, left - 1, level)).collect();
                    return KripkeTree::from_label_set(self.sig.letter_props(c), kids);
                }
            }
        }
        unreachable!("state in S_i has a transition into S_(i-1)")
    }

    /// Tallness chain on the product with `other`, judged at depth `m`.
    pub fn consistency_with(&self, other: &FinTreeAutomaton, m: usize) -> Result<ChainResult> {
        let product = self.intersect(other)?;
        let chain = if product.is_empty() { vec![Vec::new()] } else { product.tallness_chain() };
        let member = |i: usize| product.initial.is_some_and(|q| chain[i.min(chain.len() - 1)][q]);
        let first_failure = (0..chain.len()).find(|&i| !member(i));
        Ok(ChainResult {
            consistent: member(m),
            first_failure,
            stable_index: chain.len().saturating_sub(2),
            m,
            product_states: product.len(),
            sizes: chain.iter().map(|s| s.iter().filter(|&&b| b).count()).collect(),
            chain,
            product,
        })
    }
}

/// Product transitions of `t` and `u`: each fixed child of `t` shares a
/// node with a distinct fixed child of `u` or with a repeat state of `u`,
/// leftover fixed children of `u` take repeat states of `t`, and all other
/// children pair repeat states.
pub(crate) fn product_patterns(
    t: &Pattern,
    u: &Pattern,
    bound: Option<usize>,
) -> Vec<(Vec<(usize, usize)>, Vec<(usize, usize)>)> {
    let mut out = BTreeSet::new();
    let mut used = vec![false; u.fixed.len()];
    let mut cur = Vec::new();
    pair_fixed(0, t, u, bound, &mut used, &mut cur, &mut out);
    let repeat: Vec<(usize, usize)> =
        t.repeat.iter().flat_map(|&r| u.repeat.iter().map(move |&s| (r, s))).collect();
    out.into_iter().map(|f| (f, repeat.clone())).collect()
}

fn pair_fixed(
    i: usize,
    t: &Pattern,
    u: &Pattern,
    bound: Option<usize>,
    used: &mut Vec<bool>,
    cur: &mut Vec<(usize, usize)>,
    out: &mut BTreeSet<Vec<(usize, usize)>>,
) {
    if i == t.fixed.len() {
        let left: Vec<usize> = (0..u.fixed.len()).filter(|&j| !used[j]).map(|j| u.fixed[j]).collect();
        if bound.is_some_and(|d| cur.len() + left.len() > d) || (!left.is_empty() && t.repeat.is_empty()) {
            return;
        }
        let mut choice = vec![0usize; left.len()];
        loop {
            let mut f = cur.clone();
            f.extend(left.iter().zip(&choice).map(|(&s, &k)| (t.repeat[k], s)));
            f.sort_unstable();
            out.insert(f);
            let mut k = 0;
            loop {
                if k == choice.len() {
                    return;
                }
                choice[k] += 1;
                if choice[k] < t.repeat.len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
    }
    let a = t.fixed[i];
    for j in 0..u.fixed.len() {
        if used[j] || (0..j).any(|j2| !used[j2] && u.fixed[j2] == u.fixed[j]) {
            continue;
        }
        used[j] = true;
        cur.push((a, u.fixed[j]));
        pair_fixed(i + 1, t, u, bound, used, cur, out);
        cur.pop();
        used[j] = false;
    }
    for &r in &u.repeat {
        cur.push((a, r));
        pair_fixed(i + 1, t, u, bound, used, cur, out);
        cur.pop();
    }
}

/// Prefix automaton over σ: recognizes finite σ-trees (with cut nodes)
/// that are prefixes of σ-reducts of accepted trees. Dead states are
/// removed and propositions outside σ are projected away existentially.
pub fn prefix_automaton(a: &Npta, sig: &Signature) -> Result<FinTreeAutomaton> {
    let d = a.require_tuple()?;
    let arity = Some(d);
    if a.is_empty() {
        return Ok(FinTreeAutomaton::empty(sig.clone(), arity));
    }
    let live = a.live_states();
    let states: Vec<usize> = (0..a.len()).filter(|&q| live[q]).collect();
    let mut index = vec![usize::MAX; a.len()];
    for (i, &q) in states.iter().enumerate() {
        index[q] = i;
    }
    // Bits of σ that the automaton also reads, and the projection of each
    // automaton letter onto them.
    let mut shared_mask = 0u32;
    for (i, p) in sig.iter().enumerate() {
        if a.sig.contains(p) {
            shared_mask |= 1 << i;
        }
    }
    let project = |c: u32| -> u32 {
        let mut m = 0u32;
        for (i, p) in a.sig.iter().enumerate() {
            if c >> i & 1 == 1 {
                if let Some(j) = sig.index_of(p) {
                    m |= 1 << j;
                }
            }
        }
        m
    };
    let mut out = FinTreeAutomaton::empty(sig.clone(), arity);
    for &q in &states {
        let mut row: Vec<BTreeSet<Pattern>> = vec![BTreeSet::new(); sig.letter_count()];
        for c2 in a.letters() {
            let proj = project(c2);
            for p in &a.delta[q][c2 as usize] {
                if !p.fixed.iter().all(|&s| live[s]) {
                    continue;
                }
                let f = p.fixed.iter().map(|&s| index[s]).collect();
                let r = p.repeat.iter().filter(|&&s| live[s]).map(|&s| index[s]).collect();
                let pat = Pattern::new(f, r);
                for c in 0..sig.letter_count() as u32 {
                    if c & shared_mask == proj {
                        row[c as usize].insert(pat.clone());
                    }
                }
            }
        }
        out.leaf_accept.push(row.iter().map(|s| !s.is_empty()).collect());
        out.delta.push(row.into_iter().map(|s| s.into_iter().collect()).collect());
        out.names.push(a.names[q].clone());
    }
    out.initial = Some(index[a.initial]);
    Ok(out)
}

/// Joint ≅ⁿ_σ-consistency of both automata over T^d for every n, via the
/// tallness chain on the product of the prefix automata.
pub fn consistency_for_all_n(a: &Npta, b: &Npta, sig: &Signature, d: usize) -> Result<ChainResult> {
    for x in [a, b] {
        if x.require_tuple()? != d {
            return Err(Error::ArityMismatch(format!("automaton arity {:?} differs from {d}", x.arity())));
        }
    }
    let pa = prefix_automaton(a, sig)?;
    let pb = prefix_automaton(b, sig)?;
    pa.consistency_with(&pb, a.len() * b.len() + 1)
}
