use std::collections::{BTreeSet, HashMap};

use super::{Branching, DState, Determinizer, Npta, Pattern, Stage, TraceSpec};
use crate::error::Result;
use crate::util::scc;

/// Trace condition of an automaton's own states, with the weak stage
/// chosen when every cycle class has priorities of a single parity.
pub(crate) fn state_determinizer(a: &Npta) -> Determinizer {
    let n = a.len();
    let succ: Vec<Vec<usize>> = (0..n).map(|q| a.successors(q).into_iter().collect()).collect();
    let comp = scc(n, |q| succ[q].clone());
    let ncomp = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut parities: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); ncomp];
    for q in 0..n {
        let cyclic = succ[q].iter().any(|&p| comp[p] == comp[q]);
        if cyclic {
            parities[comp[q]].insert(a.priority[q] % 2);
        }
    }
    let spec = TraceSpec {
        priority: a.priority.clone(),
        comp: comp.clone(),
        bad_comp: parities.iter().map(|s| s.contains(&1)).collect(),
    };
    let auto = Determinizer::auto(spec.clone());
    if auto.stage() == Stage::Safra && parities.iter().all(|s| s.len() <= 1) {
        Determinizer::new(spec, Stage::Weak)
    } else {
        auto
    }
}

/// Per-child sets of (parent state, child state) pairs produced by one
/// state's transition under one surjection onto `k` children.
type Spread = Vec<BTreeSet<(usize, usize)>>;

fn spreads(q: usize, p: &Pattern, k: usize, d: usize, out: &mut BTreeSet<Spread>) {
    if p.fixed.len() > d {
        return;
    }
    let room = d - p.fixed.len();
    let mut copies: Vec<usize> = Vec::new();
    loop {
        let slots: Vec<usize> = p.fixed.iter().chain(&copies).copied().collect();
        if slots.len() >= k {
            let mut assign = vec![0usize; slots.len()];
            loop {
                let mut hit = vec![false; k];
                for &j in &assign {
                    hit[j] = true;
                }
                if hit.iter().all(|&h| h) {
                    let mut s: Spread = vec![BTreeSet::new(); k];
                    for (i, &j) in assign.iter().enumerate() {
                        s[j].insert((q, slots[i]));
                    }
                    out.insert(s);
                }
                let mut i = 0;
                loop {
                    if i == assign.len() {
                        break;
                    }
                    assign[i] += 1;
                    if assign[i] < k {
                        break;
                    }
                    assign[i] = 0;
                    i += 1;
                }
                if i == assign.len() {
                    break;
                }
            }
        }
        // Next multiset of repeat copies, by size then lexicographically.
        if p.repeat.is_empty() || !next_copies(&mut copies, &p.repeat, room) {
            return;
        }
    }
}

fn next_copies(c: &mut Vec<usize>, repeat: &[usize], room: usize) -> bool {
    let pos = |s: usize| repeat.iter().position(|&r| r == s).expect("repeat state");
    let mut i = c.len();
    while i > 0 {
        let j = pos(c[i - 1]);
        if j + 1 < repeat.len() {
            let v = repeat[j + 1];
            c.truncate(i - 1);
            while c.len() < i {
                c.push(v);
            }
            return true;
        }
        i -= 1;
    }
    if c.len() < room {
        let len = c.len() + 1;
        c.clear();
        c.resize(len, repeat[0]);
        true
    } else {
        false
    }
}

/// Automaton for the bisimulation quotients of accepted trees: trees M
/// admitting an accepted N with a functional bisimulation N → M. A state
/// tracks the set of automaton states of the N-nodes mapped to one node of
/// M, plus a deterministic check that every trace through these sets is
/// accepting. Each N-node's children map onto all children of its image,
/// so repeated states inside one transition need no special treatment.
pub fn quotient_automaton(a: &Npta) -> Result<Npta> {
    let d = a.require_tuple()?;
    let mut out = Npta::new(a.sig.clone(), Branching::Tuple(d));
    if a.is_empty() {
        out.add_state("empty", 1);
        return Ok(out);
    }
    let live = a.live_states().to_vec();
    let mut trimmed = a.clone();
    for q in 0..a.len() {
        for row in trimmed.delta[q].iter_mut() {
            row.retain(|p| live[q] && p.fixed.iter().all(|&s| live[s]));
            for p in row.iter_mut() {
                p.repeat.retain(|&s| live[s]);
            }
        }
    }
    let det = state_determinizer(&trimmed);
    let mut index: HashMap<DState, usize> = HashMap::new();
    let mut states: Vec<DState> = Vec::new();
    let start = det.initial(&[a.initial]);
    index.insert(start.clone(), 0);
    states.push(start);
    out.add_state("D0", states[0].priority);
    let mut k = 0;
    while k < states.len() {
        let s = states[k].clone();
        for c in a.letters() {
            let rows: Vec<&Vec<Pattern>> = s.current.iter().map(|&q| &trimmed.delta[q][c as usize]).collect();
            if rows.iter().all(|r| r.iter().any(|p| p.fixed.is_empty())) {
                out.add_transition(k, c, Pattern::tuple(Vec::new()));
            }
            for kids in 1..=d {
                let per_state: Vec<BTreeSet<Spread>> = s
                    .current
                    .iter()
                    .zip(&rows)
                    .map(|(&q, row)| {
                        let mut acc = BTreeSet::new();
                        for p in row.iter() {
                            spreads(q, p, kids, d, &mut acc);
                        }
                        acc
                    })
                    .collect();
                if per_state.iter().any(BTreeSet::is_empty) {
                    continue;
                }
                let mut combos: BTreeSet<Vec<BTreeSet<(usize, usize)>>> = BTreeSet::new();
                combos.insert(vec![BTreeSet::new(); kids]);
                for options in &per_state {
                    let mut next = BTreeSet::new();
                    for base in &combos {
                        for o in options {
                            let mut m = base.clone();
                            for j in 0..kids {
                                m[j].extend(o[j].iter().copied());
                            }
                            m.sort();
                            next.insert(m);
                        }
                    }
                    combos = next;
                }
                for combo in combos {
                    let mut fixed = Vec::new();
                    for rel in combo {
                        let rel: Vec<(usize, usize)> = rel.into_iter().collect();
                        let child = det.step(&s, &rel);
                        let id = match index.get(&child) {
                            Some(&id) => id,
                            None => {
                                let id = states.len();
                                index.insert(child.clone(), id);
                                out.add_state(format!("D{id}"), child.priority);
                                states.push(child);
                                id
                            }
                        };
                        fixed.push(id);
                    }
                    out.add_transition(k, c, Pattern::tuple(fixed));
                }
            }
        }
        k += 1;
    }
    Ok(out)
}
