//! Small shared helpers: strongly connected components, subsets and matchings.

/// Tarjan's algorithm; returns the component index of every vertex.
/// Components are numbered in reverse topological order (sinks first).
pub(crate) fn scc<F>(n: usize, succ: F) -> Vec<usize>
where
    F: Fn(usize) -> Vec<usize>,
{
    const UNSET: usize = usize::MAX;
    let mut index = vec![UNSET; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSET; n];
    let mut stack = Vec::new();
    let mut next = 0;
    let mut ncomp = 0;
    for start in 0..n {
        if index[start] != UNSET {
            continue;
        }
        let mut work: Vec<(usize, Vec<usize>, usize)> = vec![(start, succ(start), 0)];
        index[start] = next;
        low[start] = next;
        next += 1;
        stack.push(start);
        on_stack[start] = true;
        while let Some((v, succs, pos)) = work.last_mut() {
            let v = *v;
            if *pos < succs.len() {
                let w = succs[*pos];
                *pos += 1;
                if index[w] == UNSET {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    let s = succ(w);
                    work.push((w, s, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some((u, _, _)) = work.last() {
                    let u = *u;
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = ncomp;
                        if w == v {
                            break;
                        }
                    }
                    ncomp += 1;
                }
            }
        }
    }
    comp
}

/// All k-element subsets of 0..n in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        out.push(c.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if c[i] < n - k + i {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        c[i] += 1;
        for j in i + 1..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

/// Bipartite matching by augmenting paths (Kuhn). Left vertices stay
/// matched once matched.
pub(crate) struct Matching {
    adj: Vec<Vec<usize>>,
    left: Vec<Option<usize>>,
    right: Vec<Option<usize>>,
}

impl Matching {
    pub(crate) fn new(adj: Vec<Vec<usize>>, right: usize) -> Self {
        let n = adj.len();
        Matching { adj, left: vec![None; n], right: vec![None; right] }
    }

    pub(crate) fn augment(&mut self, l: usize) -> bool {
        let mut seen = vec![false; self.right.len()];
        self.try_augment(l, &mut seen)
    }

    fn try_augment(&mut self, l: usize, seen: &mut [bool]) -> bool {
        for k in 0..self.adj[l].len() {
            let r = self.adj[l][k];
            if seen[r] {
                continue;
            }
            seen[r] = true;
            let free = match self.right[r] {
                None => true,
                Some(l2) => self.try_augment(l2, seen),
            };
            if free {
                self.right[r] = Some(l);
                self.left[l] = Some(r);
                return true;
            }
        }
        false
    }

    pub(crate) fn size(&self) -> usize {
        self.left.iter().filter(|m| m.is_some()).count()
    }
}

/// Whether a matching exists that saturates every left vertex and every
/// right vertex flagged in `must_right` (Mendelsohn–Dulmage).
pub(crate) fn saturating_matching(adj: &[Vec<usize>], right: usize, must_right: &[bool]) -> bool {
    let mut m = Matching::new(adj.to_vec(), right);
    if !(0..adj.len()).all(|l| m.augment(l)) {
        return false;
    }
    let mut radj = vec![Vec::new(); right];
    for (l, rs) in adj.iter().enumerate() {
        for &r in rs {
            radj[r].push(l);
        }
    }
    let mut m2 = Matching::new(radj, adj.len());
    (0..right).filter(|&r| must_right[r]).all(|r| m2.augment(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scc_finds_cycles() {
        let edges = [vec![1], vec![2], vec![0, 3], vec![3], vec![]];
        let c = scc(5, |v| edges[v].clone());
        assert_eq!(c[0], c[1]);
        assert_eq!(c[1], c[2]);
        assert_ne!(c[2], c[3]);
        assert_ne!(c[3], c[4]);
    }

    #[test]
    fn matching_saturation() {
        // Slots 0,1 both fit only child 0: no matching saturates the slots.
        assert!(!saturating_matching(&[vec![0], vec![0]], 2, &[false, false]));
        assert!(saturating_matching(&[vec![0, 1], vec![0]], 2, &[true, true]));
        // One slot, two children that must be covered.
        assert!(!saturating_matching(&[vec![0, 1]], 2, &[true, true]));
        let mut m = Matching::new(vec![vec![0, 1], vec![0]], 2);
        assert!(m.augment(0) && m.augment(1));
        assert_eq!(m.size(), 2);
    }

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(5, 2).len(), 10);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert!(combinations(2, 3).is_empty());
    }
}
