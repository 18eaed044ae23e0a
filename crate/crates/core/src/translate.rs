//! Compilation of (graded) µ-calculus formulas into NPTAs. A state is a
//! deterministic trace-checker state whose current trace states name the
//! subformulas owed at a tree node; a transition guesses Eve's local
//! choices and distributes modal obligations over the children.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::automata::{Branching, DState, Determinizer, Npta, Pattern, Stage, TraceSpec};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::formula::{Formula, FormulaGraph, NodeKind};

/// Trace-state encoding: formula node × segment priority, where segment
/// priority 1 means no binder was passed and 2 + p means the highest
/// binder passed had priority p. Every infinite trace passes binders
/// infinitely often, so the extra odd value never decides a play.
struct Traces {
    width: usize,
}

impl Traces {
    fn id(&self, node: usize, seg: u32) -> usize {
        node * self.width + seg as usize
    }
    fn node(&self, u: usize) -> usize {
        u / self.width
    }
}

/// Eve's local choice at one tree node.
struct Local {
    pos: u32,
    neg: u32,
    diamonds: Vec<usize>,
    boxes: Vec<usize>,
    /// (entry node, modal node, segment priority) reachable locally.
    segments: Vec<(usize, usize, u32)>,
}

/// Stage used by [`muml_to_npta`] for a formula.
pub fn stage_for(g: &FormulaGraph) -> Stage {
    if !g.has_mu() {
        Stage::Safety
    } else if g.is_weak() {
        Stage::Weak
    } else {
        Determinizer::auto(trace_spec(g).0).stage()
    }
}

fn trace_spec(g: &FormulaGraph) -> (TraceSpec, Traces) {
    let width = g.max_priority() as usize + 3;
    let n = g.len();
    let ncomp = (0..n).map(|v| g.component(v)).max().map_or(0, |m| m + 1);
    let mut bad_comp = vec![false; ncomp];
    for v in 0..n {
        if g.component_is_mu(v) {
            bad_comp[g.component(v)] = true;
        }
    }
    let spec = TraceSpec {
        priority: (0..n * width).map(|u| (u % width) as u32).collect(),
        comp: (0..n * width).map(|u| g.component(u / width)).collect(),
        bad_comp,
    };
    (spec, Traces { width })
}

/// Compiles `φ` into an automaton equivalent to it over trees of
/// outdegree ≤ d (tuple mode), or over all trees when `d` is `None`
/// (set mode). Graded formulas need a finite `d`.
pub fn muml_to_npta(phi: &Formula, d: Option<usize>) -> Result<Npta> {
    muml_to_npta_with(phi, d, &Budget::from_env())
}

pub fn muml_to_npta_with(phi: &Formula, d: Option<usize>, budget: &Budget) -> Result<Npta> {
    if d.is_none() && phi.is_graded() {
        return Err(Error::Unsupported("graded formulas need a bounded outdegree".into()));
    }
    let g = FormulaGraph::new(phi)?;
    let (spec, traces) = trace_spec(&g);
    let stage = stage_for(&g);
    let det = Determinizer::new(spec, stage);
    let branching = match d {
        Some(d) => Branching::Tuple(d),
        None => Branching::Set,
    };
    let mut out = Npta::new(g.sig.clone(), branching);
    let mut index: HashMap<DState, usize> = HashMap::new();
    let mut states = vec![det.initial(&[traces.id(g.root, 1)])];
    index.insert(states[0].clone(), 0);
    out.add_state("s0", states[0].priority);
    let mut locals_cache: HashMap<Vec<usize>, std::rc::Rc<Vec<Local>>> = HashMap::new();
    let mut k = 0;
    while k < states.len() {
        budget.charge(1 + out.sig.letter_count() as u64, "formula translation")?;
        let s = states[k].clone();
        let entries: Vec<usize> = s.current.iter().map(|&u| traces.node(u)).collect::<BTreeSet<_>>().into_iter().collect();
        let locals = locals_cache
            .entry(entries.clone())
            .or_insert_with(|| std::rc::Rc::new(local_choices(&g, &entries)))
            .clone();
        for local in locals.iter() {
            let mut intern = |child: DState, out: &mut Npta| -> usize {
                if let Some(&id) = index.get(&child) {
                    return id;
                }
                let id = states.len();
                index.insert(child.clone(), id);
                out.add_state(format!("s{id}"), child.priority);
                states.push(child);
                id
            };
            // Trace relation for a child receiving the given modal nodes.
            let relation = |targets: &BTreeSet<usize>| -> Vec<(usize, usize)> {
                let mut rel = BTreeSet::new();
                for &u in &s.current {
                    let e = traces.node(u);
                    for &(from, m, seg) in &local.segments {
                        if from == e && targets.contains(&m) {
                            let body = match g.nodes[m] {
                                NodeKind::Dia { body, .. } | NodeKind::Box { body, .. } => body,
                                _ => unreachable!("modal node"),
                            };
                            rel.insert((u, traces.id(body, seg)));
                        }
                    }
                }
                rel.into_iter().collect()
            };
            let all_boxes: BTreeSet<usize> = local.boxes.iter().copied().collect();
            let repeat_state = intern(det.step(&s, &relation(&all_boxes)), &mut out);
            let mut patterns = Vec::new();
            for group in child_types(&g, local, d) {
                budget.charge(group.len() as u64 + 1, "formula translation")?;
                let mut fixed = Vec::with_capacity(group.len());
                for (w, e) in group {
                    let mut targets: BTreeSet<usize> =
                        local.diamonds.iter().enumerate().filter(|(i, _)| w >> i & 1 == 1).map(|(_, &m)| m).collect();
                    targets.extend(local.boxes.iter().enumerate().filter(|(i, _)| e >> i & 1 == 0).map(|(_, &m)| m));
                    fixed.push(intern(det.step(&s, &relation(&targets)), &mut out));
                }
                patterns.push(Pattern::new(fixed, vec![repeat_state]));
            }
            for c in out.letters().collect::<Vec<_>>() {
                if c & local.pos == local.pos && c & local.neg == 0 {
                    for p in &patterns {
                        out.add_transition(k, c, p.clone());
                    }
                }
            }
        }
        k += 1;
    }
    Ok(out)
}

/// Multisets of child types (diamonds served, boxes excepted): each
/// diamond of grade g is served by exactly g children, each box of grade g
/// has at most g exceptions, and at most d children are special.
fn child_types(g: &FormulaGraph, local: &Local, d: Option<usize>) -> Vec<Vec<(u32, u32)>> {
    let grade = |m: usize| match g.nodes[m] {
        NodeKind::Dia { grade, .. } | NodeKind::Box { grade, .. } => grade as usize,
        _ => 0,
    };
    let need: Vec<usize> = local.diamonds.iter().map(|&m| grade(m)).collect();
    let allow: Vec<usize> = local.boxes.iter().map(|&m| grade(m)).collect();
    let limit = d.unwrap_or_else(|| need.iter().sum::<usize>());
    let nw = local.diamonds.len();
    let nb = local.boxes.len();
    let mut types = Vec::new();
    for w in 0..1u32 << nw {
        for e in 0..1u32 << nb {
            let exceptions_ok = (0..nb).all(|j| e >> j & 1 == 0 || allow[j] > 0);
            if (w, e) != (0, 0) && exceptions_ok {
                types.push((w, e));
            }
        }
    }
    let mut out = Vec::new();
    let mut cur = Vec::new();
    let mut served = vec![0usize; nw];
    let mut excepted = vec![0usize; nb];
    #[allow(clippy::too_many_arguments)]
    fn rec(
        i: usize,
        types: &[(u32, u32)],
        need: &[usize],
        allow: &[usize],
        limit: usize,
        cur: &mut Vec<(u32, u32)>,
        served: &mut Vec<usize>,
        excepted: &mut Vec<usize>,
        out: &mut Vec<Vec<(u32, u32)>>,
    ) {
        if served.iter().zip(need).all(|(s, n)| s == n) {
            out.push(cur.clone());
        }
        if cur.len() == limit {
            return;
        }
        for t in i..types.len() {
            let (w, e) = types[t];
            let fits = (0..need.len()).all(|j| w >> j & 1 == 0 || served[j] < need[j])
                && (0..allow.len()).all(|j| e >> j & 1 == 0 || excepted[j] < allow[j]);
            if !fits {
                continue;
            }
            for j in 0..need.len() {
                served[j] += (w >> j & 1) as usize;
            }
            for j in 0..allow.len() {
                excepted[j] += (e >> j & 1) as usize;
            }
            cur.push((w, e));
            rec(t, types, need, allow, limit, cur, served, excepted, out);
            cur.pop();
            for j in 0..need.len() {
                served[j] -= (w >> j & 1) as usize;
            }
            for j in 0..allow.len() {
                excepted[j] -= (e >> j & 1) as usize;
            }
        }
    }
    rec(0, &types, &need, &allow, limit, &mut cur, &mut served, &mut excepted, &mut out);
    out
}

/// All consistent resolutions of disjunctions reachable from `entries`
/// without crossing a modality.
fn local_choices(g: &FormulaGraph, entries: &[usize]) -> Vec<Local> {
    let mut out = Vec::new();
    let mut choice: BTreeMap<usize, usize> = BTreeMap::new();
    explore(g, entries, &mut choice, &mut out);
    out
}

fn closure(g: &FormulaGraph, entries: &[usize], choice: &BTreeMap<usize, usize>) -> std::result::Result<BTreeSet<usize>, usize> {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<usize> = entries.to_vec();
    while let Some(v) = stack.pop() {
        if !seen.insert(v) {
            continue;
        }
        match g.nodes[v] {
            NodeKind::Or(..) => match choice.get(&v) {
                Some(&w) => stack.push(w),
                None => return Err(v),
            },
            _ => stack.extend(g.local_succ(v)),
        }
    }
    Ok(seen)
}

fn explore(g: &FormulaGraph, entries: &[usize], choice: &mut BTreeMap<usize, usize>, out: &mut Vec<Local>) {
    let seen = match closure(g, entries, choice) {
        Err(open) => {
            if let NodeKind::Or(a, b) = g.nodes[open] {
                for w in [a, b] {
                    choice.insert(open, w);
                    explore(g, entries, choice, out);
                    choice.remove(&open);
                }
            }
            return;
        }
        Ok(seen) => seen,
    };
    let mut pos = 0u32;
    let mut neg = 0u32;
    let mut diamonds = Vec::new();
    let mut boxes = Vec::new();
    for &v in &seen {
        match g.nodes[v] {
            NodeKind::False => return,
            NodeKind::Lit { prop, positive } => {
                if positive {
                    pos |= 1 << prop;
                } else {
                    neg |= 1 << prop;
                }
            }
            NodeKind::Dia { .. } => diamonds.push(v),
            NodeKind::Box { .. } => boxes.push(v),
            _ => {}
        }
    }
    if pos & neg != 0 {
        return;
    }
    let succ = |v: usize| -> Vec<usize> {
        match g.nodes[v] {
            NodeKind::Or(..) => vec![choice[&v]],
            NodeKind::Dia { .. } | NodeKind::Box { .. } => vec![],
            _ => g.local_succ(v),
        }
    };
    // A local cycle whose top priority is odd lets Adam win at this node.
    for &x in &seen {
        if !matches!(g.nodes[x], NodeKind::Fix { .. }) || g.priority[x] % 2 == 0 {
            continue;
        }
        let p = g.priority[x];
        let mut visited = BTreeSet::new();
        let mut stack: Vec<usize> = succ(x).into_iter().filter(|&y| g.priority[y] <= p).collect();
        while let Some(y) = stack.pop() {
            if y == x {
                return;
            }
            if visited.insert(y) {
                stack.extend(succ(y).into_iter().filter(|&z| g.priority[z] <= p));
            }
        }
    }
    let binder = |v: usize| matches!(g.nodes[v], NodeKind::Fix { .. }).then(|| g.priority[v]);
    let mut segments = BTreeSet::new();
    for &e in entries {
        let mut visited: BTreeSet<(usize, Option<u32>)> = BTreeSet::new();
        let mut stack = vec![(e, binder(e))];
        while let Some((v, top)) = stack.pop() {
            if !visited.insert((v, top)) {
                continue;
            }
            if matches!(g.nodes[v], NodeKind::Dia { .. } | NodeKind::Box { .. }) {
                segments.insert((e, v, top.map_or(1, |p| p + 2)));
                continue;
            }
            for w in succ(v) {
                let t = match (top, binder(w)) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    (a, b) => a.or(b),
                };
                stack.push((w, t));
            }
        }
    }
    out.push(Local { pos, neg, diamonds, boxes, segments: segments.into_iter().collect() });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, Signature};
    use crate::games::model_check;
    use crate::kripke::all_trees;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn agree(phi: &str, d: usize, depth: usize, sig: &[&str]) {
        let phi = f(phi);
        let a = muml_to_npta(&phi, Some(d)).unwrap();
        let sig = Signature::from_names(sig.iter().copied());
        for t in all_trees(&sig, d, depth) {
            assert_eq!(a.accepts(&t), model_check(&t, &phi).unwrap(), "{phi} on {t}");
        }
    }

    #[test]
    fn true_is_universal() {
        let a = muml_to_npta(&Formula::True, Some(2)).unwrap();
        assert!(a.accepts(&crate::kripke::parse_tree("(n {} (n {}) (n {}))").unwrap()));
        assert!(!a.is_empty());
    }

    #[test]
    fn diamond_agrees_with_model_checking() {
        agree("<>a", 2, 2, &["a"]);
    }

    #[test]
    fn finite_tree_agreement_corpus() {
        for phi in [
            "a & []~a",
            "mu X. a | <>X",
            "mu X. a | []X",
            "nu X. a & []X",
            "mu X. []X",
            "nu X. <>X",
            "<>(a & <>~a) | []false",
            "nu X. mu Y. (a & <>X) | <>Y",
            "mu X. nu Y. (a & []X) | (~a & []Y)",
        ] {
            agree(phi, 2, 2, &["a"]);
        }
    }

    #[test]
    fn graded_agreement() {
        for phi in ["<2>a", "[1]a", "<2>true & [1]~a", "<3>true", "[2]a | <2>~a"] {
            agree(phi, 3, 2, &["a"]);
        }
        assert!(muml_to_npta(&f("<2>a"), None).is_err());
    }

    #[test]
    fn set_mode_agreement() {
        let sig = Signature::from_names(["a"]);
        for phi in ["<>a & <>~a", "mu X. a | <>X", "[]a"] {
            let phi = f(phi);
            let a = muml_to_npta(&phi, None).unwrap();
            for t in all_trees(&sig, 3, 2) {
                assert_eq!(a.accepts(&t), model_check(&t, &phi).unwrap(), "{phi} on {t}");
            }
        }
    }

    #[test]
    fn emptiness_of_unsatisfiable_formulas() {
        for (phi, empty) in [
            ("nu X. <>X", false),
            ("(nu X. <>X) & []false", true),
            ("mu X. <>X", true),
            ("nu X. mu Y. <>(a & X) | <>Y", false),
            ("mu X. nu Y. <>(a & X) | <>(~a & Y)", false),
            ("(nu X. mu Y. (a & <>X) | <>Y) & (mu Z. nu W. (~a & <>W) | []Z)", false),
            ("(nu X. mu Y. (a & []X) | []Y) & nu Z. (~a & []Z) & <>true", true),
            ("mu X. X", true),
            ("nu X. X", false),
        ] {
            let a = muml_to_npta(&f(phi), Some(2)).unwrap();
            assert_eq!(a.is_empty(), empty, "{phi}");
        }
    }

    #[test]
    fn paths_over_words() {
        let a = muml_to_npta(&Formula::theta_inf(), Some(1)).unwrap();
        let p = crate::automata::prefix_automaton(&a, &Signature::new()).unwrap();
        let mut path = crate::kripke::KripkeTree::leaf(Vec::<String>::new());
        for n in 0..6 {
            assert!(p.accepts_prefix(&path, n));
            assert!(!a.accepts(&path), "a finite path is not a model of the infinite path formula");
            path = crate::kripke::KripkeTree::node(Vec::<String>::new(), vec![path]);
        }
    }
}
