//! Deterministic automata over relation words that accept exactly when
//! every trace through the word satisfies the max-parity condition (even
//! is good). Used to verify all branches of a guessed strategy at once.

use std::collections::{BTreeSet, HashMap};

/// Trace states with priorities; `comp` groups states so that a trace
/// that stays in one group forever is bad exactly when `bad_comp` says so
/// (only consulted by the weak stage).
#[derive(Clone, Debug)]
pub struct TraceSpec {
    pub priority: Vec<u32>,
    pub comp: Vec<usize>,
    pub bad_comp: Vec<bool>,
}

/// Construction used for the trace condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    /// Every trace is good; only the current states are tracked.
    Safety,
    /// Breakpoint on traces that stay inside a bad group.
    Weak,
    /// Breakpoint on visits to the top (even) priority; every other
    /// priority must be odd.
    Buchi,
    /// Safra trees for the general case.
    Safra,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Extra {
    None,
    Owing(Vec<usize>),
    Tree(Vec<(usize, Vec<usize>)>),
}

/// State of the deterministic automaton; `priority` is the priority of
/// the step that produced it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DState {
    pub current: Vec<usize>,
    extra: Extra,
    pub priority: u32,
}

impl DState {
    pub fn is_sink(&self) -> bool {
        self.current.is_empty()
    }
}

pub struct Determinizer {
    spec: TraceSpec,
    stage: Stage,
    top: u32,
    odd: Vec<u32>,
    /// Safra rank bound.
    k: u32,
}

const ROOT: usize = usize::MAX;

impl Determinizer {
    pub fn new(spec: TraceSpec, stage: Stage) -> Self {
        let top = spec.priority.iter().copied().max().unwrap_or(0);
        let odd: Vec<u32> = (0..=top).filter(|p| p % 2 == 1).collect();
        let nbw = spec.priority.len() * (odd.len() + 1);
        Determinizer { spec, stage, top, odd, k: 2 * nbw as u32 + 2 }
    }

    /// Picks the cheapest stage that is exact for `spec`.
    pub fn auto(spec: TraceSpec) -> Self {
        let top = spec.priority.iter().copied().max().unwrap_or(0);
        let stage = if spec.priority.iter().all(|p| p % 2 == 0) {
            Stage::Safety
        } else if top % 2 == 0 && spec.priority.iter().all(|&p| p == top || p % 2 == 1) {
            Stage::Buchi
        } else {
            Stage::Safra
        };
        Determinizer::new(spec, stage)
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn max_priority(&self) -> u32 {
        match self.stage {
            Stage::Safety => 0,
            Stage::Weak | Stage::Buchi => 2,
            Stage::Safra => 2 * self.k + 2,
        }
    }

    pub fn initial(&self, start: &[usize]) -> DState {
        let mut current = start.to_vec();
        current.sort_unstable();
        current.dedup();
        let extra = match self.stage {
            Stage::Safety => Extra::None,
            Stage::Weak | Stage::Buchi => Extra::Owing(Vec::new()),
            Stage::Safra => {
                if current.is_empty() {
                    Extra::Tree(Vec::new())
                } else {
                    Extra::Tree(vec![(ROOT, current.iter().map(|&u| self.nbw(u, 0)).collect())])
                }
            }
        };
        let mut s = DState { current, extra, priority: 0 };
        s.priority = self.idle_priority();
        s
    }

    fn idle_priority(&self) -> u32 {
        match self.stage {
            Stage::Safety => 0,
            Stage::Weak | Stage::Buchi => 1,
            Stage::Safra => 2,
        }
    }

    /// Follows the trace relation `rel` (pairs of trace states) one step.
    pub fn step(&self, s: &DState, rel: &[(usize, usize)]) -> DState {
        let mut succ: HashMap<usize, Vec<usize>> = HashMap::new();
        for &(u, v) in rel {
            succ.entry(u).or_default().push(v);
        }
        let image = |set: &[usize]| -> Vec<usize> {
            let out: BTreeSet<usize> = set.iter().flat_map(|u| succ.get(u).into_iter().flatten().copied()).collect();
            out.into_iter().collect()
        };
        let current = image(&s.current);
        match (&self.stage, &s.extra) {
            (Stage::Safety, _) => DState { current, extra: Extra::None, priority: 0 },
            (Stage::Weak, Extra::Owing(o)) => {
                let next: Vec<usize> = if o.is_empty() {
                    current.iter().copied().filter(|&v| self.spec.bad_comp[self.spec.comp[v]]).collect()
                } else {
                    let out: BTreeSet<usize> = o
                        .iter()
                        .flat_map(|u| succ.get(u).into_iter().flatten().map(move |&v| (*u, v)))
                        .filter(|&(u, v)| self.spec.comp[u] == self.spec.comp[v])
                        .map(|(_, v)| v)
                        .collect();
                    out.into_iter().collect()
                };
                let priority = if next.is_empty() { 2 } else { 1 };
                DState { current, extra: Extra::Owing(next), priority }
            }
            (Stage::Buchi, Extra::Owing(o)) => {
                let base = if o.is_empty() { current.clone() } else { image(o) };
                let next: Vec<usize> = base.into_iter().filter(|&v| self.spec.priority[v] != self.top).collect();
                let priority = if next.is_empty() { 2 } else { 1 };
                DState { current, extra: Extra::Owing(next), priority }
            }
            (Stage::Safra, Extra::Tree(t)) => self.safra_step(t, &succ),
            _ => unreachable!("state built by a different stage"),
        }
    }

    // Complement of "every trace is good": some trace eventually stays at
    // or below an odd k and sees k infinitely often. Büchi states are
    // (u, mode) with mode 0 = not yet committed, mode j = committed to the
    // j-th odd priority.
    fn nbw(&self, u: usize, mode: usize) -> usize {
        u * (self.odd.len() + 1) + mode
    }

    fn nbw_parts(&self, b: usize) -> (usize, usize) {
        (b / (self.odd.len() + 1), b % (self.odd.len() + 1))
    }

    fn nbw_final(&self, b: usize) -> bool {
        let (u, mode) = self.nbw_parts(b);
        mode > 0 && self.spec.priority[u] == self.odd[mode - 1]
    }

    fn nbw_succ(&self, b: usize, succ: &HashMap<usize, Vec<usize>>, out: &mut BTreeSet<usize>) {
        let (u, mode) = self.nbw_parts(b);
        for &v in succ.get(&u).into_iter().flatten() {
            let p = self.spec.priority[v];
            if mode == 0 {
                out.insert(self.nbw(v, 0));
                for (j, &k) in self.odd.iter().enumerate() {
                    if k >= p {
                        out.insert(self.nbw(v, j + 1));
                    }
                }
            } else if p <= self.odd[mode - 1] {
                out.insert(self.nbw(v, mode));
            }
        }
    }

    fn safra_step(&self, tree: &[(usize, Vec<usize>)], succ: &HashMap<usize, Vec<usize>>) -> DState {
        // Nodes in age order; the index is the rank, parents are older.
        let mut nodes: Vec<(usize, Vec<usize>)> = tree.to_vec();
        let n0 = nodes.len();
        for i in 0..n0 {
            let f: Vec<usize> = nodes[i].1.iter().copied().filter(|&b| self.nbw_final(b)).collect();
            if !f.is_empty() {
                nodes.push((i, f));
            }
        }
        for node in nodes.iter_mut() {
            let mut out = BTreeSet::new();
            for &b in &node.1 {
                self.nbw_succ(b, succ, &mut out);
            }
            node.1 = out.into_iter().collect();
        }
        let n = nodes.len();
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, node) in nodes.iter().enumerate() {
            if node.0 != ROOT {
                children[node.0].push(i);
            }
        }
        // Horizontal merge: a state stays only in the oldest branch.
        fn merge(v: usize, nodes: &mut [(usize, Vec<usize>)], children: &[Vec<usize>]) {
            let mut avail: BTreeSet<usize> = nodes[v].1.iter().copied().collect();
            for &c in &children[v] {
                let kept: Vec<usize> = nodes[c].1.iter().copied().filter(|b| avail.contains(b)).collect();
                nodes[c].1 = kept;
                merge(c, nodes, children);
                for b in &nodes[c].1 {
                    avail.remove(b);
                }
            }
        }
        let mut alive = vec![true; n];
        let mut green_min = u32::MAX;
        let mut del_min = u32::MAX;
        if n > 0 {
            merge(0, &mut nodes, &children);
            for i in 0..n {
                let parent_dead = nodes[i].0 != ROOT && !alive[nodes[i].0];
                if parent_dead || nodes[i].1.is_empty() {
                    alive[i] = false;
                    del_min = del_min.min(i as u32);
                }
            }
            // Vertical merge, top-down (parents precede children).
            for i in 0..n {
                if !alive[i] {
                    continue;
                }
                let mut union = BTreeSet::new();
                for &c in &children[i] {
                    if alive[c] {
                        union.extend(nodes[c].1.iter().copied());
                    }
                }
                if !children[i].iter().any(|&c| alive[c]) || union.len() != nodes[i].1.len() {
                    continue;
                }
                green_min = green_min.min(i as u32);
                let mut stack = children[i].clone();
                while let Some(c) = stack.pop() {
                    if alive[c] {
                        alive[c] = false;
                        del_min = del_min.min(c as u32);
                    }
                    stack.extend(children[c].iter().copied());
                }
            }
        }
        // Min-parity with even = some bad trace; deletion at a rank
        // outranks greenness at the same rank.
        let p = if green_min == u32::MAX && del_min == u32::MAX {
            2 * self.k + 1
        } else if green_min < del_min {
            2 * green_min + 2
        } else {
            2 * del_min + 1
        };
        let mut rank = vec![usize::MAX; n];
        let mut out: Vec<(usize, Vec<usize>)> = Vec::new();
        for i in 0..n {
            if alive[i] {
                rank[i] = out.len();
                let parent = if nodes[i].0 == ROOT { ROOT } else { rank[nodes[i].0] };
                out.push((parent, std::mem::take(&mut nodes[i].1)));
            }
        }
        let current: BTreeSet<usize> =
            out.first().map(|r| r.1.iter().map(|&b| self.nbw_parts(b).0).collect()).unwrap_or_default();
        DState { current: current.into_iter().collect(), extra: Extra::Tree(out), priority: 2 * self.k + 3 - p }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Runs a lasso word (prefix then loop, both as relations) until the
    /// state sequence repeats and returns the max priority on the cycle.
    fn lasso(det: &Determinizer, start: &[usize], prefix: &[Vec<(usize, usize)>], cycle: &[Vec<(usize, usize)>]) -> u32 {
        let mut s = det.initial(start);
        for r in prefix {
            s = det.step(&s, r);
        }
        let mut seen: HashMap<(DState, usize), usize> = HashMap::new();
        let mut trace = Vec::new();
        let mut i = 0;
        loop {
            let key = (s.clone(), i % cycle.len());
            if let Some(&at) = seen.get(&key) {
                return trace[at..].iter().copied().max().unwrap();
            }
            seen.insert(key, trace.len());
            s = det.step(&s, &cycle[i % cycle.len()]);
            trace.push(s.priority);
            i += 1;
        }
    }

    /// Brute force on lasso words: is every trace good? Traces are
    /// explored on the product of trace states and loop positions.
    fn all_good(spec: &TraceSpec, start: &[usize], prefix: &[Vec<(usize, usize)>], cycle: &[Vec<(usize, usize)>]) -> bool {
        let mut cur: BTreeSet<usize> = start.iter().copied().collect();
        for r in prefix {
            cur = r.iter().filter(|(u, _)| cur.contains(u)).map(|&(_, v)| v).collect();
        }
        let m = cycle.len();
        let n = spec.priority.len();
        // Node (u, i): trace at u before reading cycle[i].
        let id = |u: usize, i: usize| u * m + i;
        let mut edges = vec![Vec::new(); n * m];
        for i in 0..m {
            for &(u, v) in &cycle[i] {
                edges[id(u, i)].push(id(v, (i + 1) % m));
            }
        }
        let mut reach = vec![false; n * m];
        let mut stack: Vec<usize> = cur.iter().map(|&u| id(u, 0)).collect();
        while let Some(x) = stack.pop() {
            if !reach[x] {
                reach[x] = true;
                stack.extend(edges[x].iter().copied());
            }
        }
        // A bad trace exists iff some reachable node x with odd priority p
        // lies on a cycle using only nodes of priority <= p.
        let prio = |x: usize| spec.priority[x / m];
        for x in 0..n * m {
            let p = prio(x);
            if !reach[x] || p % 2 == 0 {
                continue;
            }
            let mut seen = vec![false; n * m];
            let mut st: Vec<usize> = edges[x].iter().copied().filter(|&y| prio(y) <= p).collect();
            while let Some(y) = st.pop() {
                if y == x {
                    return false;
                }
                if !seen[y] {
                    seen[y] = true;
                    st.extend(edges[y].iter().copied().filter(|&z| prio(z) <= p));
                }
            }
        }
        true
    }

    fn random_rel(rng: &mut impl rand::Rng, n: usize) -> Vec<(usize, usize)> {
        let mut r = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if rng.gen_bool(0.35) {
                    r.push((u, v));
                }
            }
        }
        r
    }

    #[test]
    fn stages_agree_with_brute_force_on_lassos() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut outcomes = [0usize; 2];
        for round in 0..3000 {
            let n = rng.gen_range(1..5);
            let maxp = [2u32, 3, 4, 5][round % 4];
            let priority: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=maxp)).collect();
            let spec = TraceSpec { priority: priority.clone(), comp: (0..n).collect(), bad_comp: vec![false; n] };
            let prefix: Vec<_> = (0..rng.gen_range(0..2)).map(|_| random_rel(&mut rng, n)).collect();
            let cycle: Vec<_> = (0..rng.gen_range(1..3)).map(|_| random_rel(&mut rng, n)).collect();
            let expect = all_good(&spec, &[0], &prefix, &cycle);
            outcomes[expect as usize] += 1;
            let safra = Determinizer::new(spec.clone(), Stage::Safra);
            assert_eq!(lasso(&safra, &[0], &prefix, &cycle) % 2 == 0, expect, "safra {priority:?} {prefix:?} {cycle:?}");
            let auto = Determinizer::auto(spec.clone());
            assert_eq!(lasso(&auto, &[0], &prefix, &cycle) % 2 == 0, expect, "{:?} {priority:?}", auto.stage());
        }
        assert!(outcomes.iter().all(|&k| k > 200), "{outcomes:?}");
    }

    #[test]
    fn weak_stage_tracks_bad_groups() {
        // States 0 (bad group) and 1 (good group); 0 -> 0, 0 -> 1, 1 -> 1.
        let spec = TraceSpec { priority: vec![1, 2], comp: vec![0, 1], bad_comp: vec![true, false] };
        let det = Determinizer::new(spec, Stage::Weak);
        let stay = vec![vec![(0, 0), (1, 1)]];
        let leave = vec![vec![(0, 1), (1, 1)]];
        assert_eq!(lasso(&det, &[0], &[], &stay) % 2, 1);
        assert_eq!(lasso(&det, &[0], &[], &leave) % 2, 0);
    }
}
