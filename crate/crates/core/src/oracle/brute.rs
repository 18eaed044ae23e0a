use std::collections::{BTreeMap, BTreeSet};

use super::eval::eval_tree;
use super::joint::{realized_prefixes, Relation};
use crate::automata::Npta;
use crate::budget::Budget;
use crate::error::Result;
use crate::formula::{Formula, Signature};
use crate::kripke::{all_trees, KripkeTree};

/// First tree (in enumeration order) of outdegree ≤ d and height ≤ depth on
/// which the formulas disagree, evaluated by direct fixpoint iteration.
pub fn equivalence_bruteforce(phi: &Formula, psi: &Formula, d: usize, depth: usize) -> Option<KripkeTree> {
    let sig = phi.sig().union(&psi.sig());
    all_trees(&sig, d, depth)
        .into_iter()
        .find(|t| eval_tree(t, phi).expect("well-formed formula") != eval_tree(t, psi).expect("well-formed formula"))
}

/// Whether the finite tree `m`, read with its nodes at depth `n` cut, is
/// (over sig(φ)) the n-prefix of some model of φ in T^d.
pub fn prefix_extendable(phi: &Formula, m: &KripkeTree, n: usize, d: usize, budget: &Budget) -> Result<bool> {
    let sig = phi.sig();
    let codes = realized_prefixes(phi, &sig, n, Some(d), Relation::Iso, budget)?;
    Ok(codes.contains_key(&m.code(m.root(), Some(&sig), n, false)))
}

fn compatible(a: &Npta, sigma: &Signature, ca: u32, c: u32) -> bool {
    let props = a.sig.letter_props(ca);
    let want = sigma.letter_props(c);
    sigma.iter().filter(|p| a.sig.contains(p)).all(|p| props.contains(p) == want.contains(p))
}

/// All ways to write a multiset of `k` child states as the fixed part of
/// `p` plus copies of repeat states, as sorted vectors.
fn slot_fillings(fixed: &[usize], repeat: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k < fixed.len() || (k > fixed.len() && repeat.is_empty()) {
        return Vec::new();
    }
    let extra = k - fixed.len();
    let mut out = Vec::new();
    let mut pick = vec![0usize; extra];
    loop {
        let mut v: Vec<usize> = fixed.to_vec();
        v.extend(pick.iter().map(|&i| repeat[i]));
        v.sort_unstable();
        out.push(v);
        // Non-decreasing index vectors enumerate multisets.
        let mut i = extra;
        loop {
            if i == 0 {
                out.sort();
                out.dedup();
                return out;
            }
            i -= 1;
            if pick[i] + 1 < repeat.len() {
                pick[i] += 1;
                for j in i + 1..extra {
                    pick[j] = pick[i];
                }
                break;
            }
        }
    }
}

/// Whether the children with state sets `kids` can carry the states of
/// `slots` one each (as a bijection).
fn assignable(slots: &[usize], kids: &[&BTreeSet<usize>]) -> bool {
    fn go(i: usize, slots: &[usize], kids: &[&BTreeSet<usize>], used: &mut Vec<bool>) -> bool {
        if i == kids.len() {
            return true;
        }
        for j in 0..slots.len() {
            if !used[j] && kids[i].contains(&slots[j]) {
                used[j] = true;
                if go(i + 1, slots, kids, used) {
                    return true;
                }
                used[j] = false;
            }
        }
        false
    }
    slots.len() == kids.len() && go(0, slots, kids, &mut vec![false; slots.len()])
}

fn next_multiset(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] + 1 < n {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[i];
            }
            return true;
        }
    }
    false
}

fn profile(a: &Npta, live: &[bool], sigma: &Signature, c: u32, kids: &[&BTreeSet<usize>], cut: bool) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for q in (0..a.len()).filter(|&q| live[q]) {
        let ok = a.letters().filter(|&ca| compatible(a, sigma, ca, c)).any(|ca| {
            a.delta[q][ca as usize].iter().any(|p| {
                if !p.fixed.iter().all(|&s| live[s]) {
                    return false;
                }
                if cut {
                    return true;
                }
                let rep: Vec<usize> = p.repeat.iter().copied().filter(|&s| live[s]).collect();
                slot_fillings(&p.fixed, &rep, kids.len()).iter().any(|slots| assignable(slots, kids))
            })
        });
        if ok {
            out.insert(q);
        }
    }
    out
}

/// For every n ≤ `n_max`: does some finite σ-tree arise (up to
/// isomorphism) as the n-prefix of σ-reducts of accepted trees of both
/// automata, all of outdegree ≤ d? Computed by explicit profile levels over
/// concrete child multisets, straight from the transition tables.
pub fn iso_consistency_bruteforce(a: &Npta, b: &Npta, sigma: &Signature, d: usize, n_max: usize) -> Vec<bool> {
    let (la, lb) = (a.live_states().to_vec(), b.live_states().to_vec());
    type Pair = (BTreeSet<usize>, BTreeSet<usize>);
    let letters = sigma.letter_count() as u32;
    let mut level: BTreeSet<Pair> = (0..letters)
        .map(|c| (profile(a, &la, sigma, c, &[], true), profile(b, &lb, sigma, c, &[], true)))
        .collect();
    let mut out = Vec::new();
    for n in 0..=n_max {
        out.push(level.iter().any(|(x, y)| x.contains(&a.initial) && y.contains(&b.initial)));
        if n == n_max {
            break;
        }
        let items: Vec<&Pair> = level.iter().collect();
        let mut next = BTreeSet::new();
        for k in 0..=d {
            if k > 0 && items.is_empty() {
                break;
            }
            let mut combo = vec![0usize; k];
            loop {
                let xs: Vec<&BTreeSet<usize>> = combo.iter().map(|&i| &items[i].0).collect();
                let ys: Vec<&BTreeSet<usize>> = combo.iter().map(|&i| &items[i].1).collect();
                for c in 0..letters {
                    next.insert((profile(a, &la, sigma, c, &xs, false), profile(b, &lb, sigma, c, &ys, false)));
                }
                if !next_multiset(&mut combo, items.len()) {
                    break;
                }
            }
        }
        level = next;
    }
    out
}

/// Surjections from `s` slots onto `k` children, as slot → child vectors.
fn surjections(s: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k == 0 {
        if s == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let total = k.pow(s as u32);
    for mut code in 0..total {
        let h: Vec<usize> = (0..s)
            .map(|_| {
                let x = code % k;
                code /= k;
                x
            })
            .collect();
        if (0..k).all(|j| h.contains(&j)) {
            out.push(h);
        }
    }
    out
}

/// Whether some finite tree accepted by `a` maps onto `t` by a surjective
/// functional bisimulation, via per-node state sets over concrete slot
/// fillings and surjections.
pub fn quotient_member_bruteforce(a: &Npta, t: &KripkeTree) -> bool {
    let d = a.arity().unwrap_or(usize::MAX);
    let mut acc: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); t.len()];
    for v in (0..t.len()).rev() {
        let kids = t.children(v);
        let k = kids.len();
        let c = a.letter_of_node(t, v) as usize;
        let top = if k == 0 { 0 } else { d.min(k + 2 * a.len() + 2) };
        for q in 0..a.len() {
            let ok = a.delta[q][c].iter().any(|p| {
                (k..=top).any(|s| {
                    slot_fillings(&p.fixed, &p.repeat, s).iter().any(|slots| {
                        surjections(s, k).iter().any(|h| slots.iter().zip(h).all(|(&st, &j)| acc[kids[j]].contains(&st)))
                    })
                })
            });
            if ok {
                acc[v].insert(q);
            }
        }
    }
    acc[t.root()].contains(&a.initial)
}

/// Explicit version of [`quotient_member_bruteforce`]: enumerates every
/// preimage tree (up to isomorphism) and tests membership directly.
/// Exponential; meant for trees of height ≤ 2.
pub fn quotient_member_explicit(a: &Npta, t: &KripkeTree) -> bool {
    let d = a.arity().unwrap_or(t.outdegree() + 2);
    preimages(t, t.root(), d).iter().any(|n| a.accepts(n))
}

fn preimages(t: &KripkeTree, v: usize, d: usize) -> Vec<KripkeTree> {
    let kids = t.children(v);
    let label = t.label(v).clone();
    if kids.is_empty() {
        return vec![KripkeTree::from_label_set(label, Vec::new())];
    }
    let below: Vec<Vec<KripkeTree>> = kids.iter().map(|&w| preimages(t, w, d)).collect();
    if below.iter().any(Vec::is_empty) {
        return Vec::new();
    }
    let mut out: BTreeMap<String, KripkeTree> = BTreeMap::new();
    for s in kids.len()..=d {
        for h in surjections(s, kids.len()) {
            let mut choice = vec![0usize; s];
            loop {
                let children: Vec<KripkeTree> = (0..s).map(|i| below[h[i]][choice[i]].clone()).collect();
                let n = KripkeTree::from_label_set(label.clone(), children);
                out.entry(n.code(n.root(), None, usize::MAX, false)).or_insert(n);
                let mut i = 0;
                while i < s {
                    choice[i] += 1;
                    if choice[i] < below[h[i]].len() {
                        break;
                    }
                    choice[i] = 0;
                    i += 1;
                }
                if i == s {
                    break;
                }
            }
        }
    }
    out.into_values().collect()
}
