use super::KripkeTree;
use crate::formula::Signature;

/// A level-respecting relation between the nodes of two trees, stored per
/// depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelRelation {
    pub levels: Vec<Vec<(usize, usize)>>,
}

impl LevelRelation {
    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.levels.iter().any(|l| l.contains(&(u, v)))
    }

    pub fn len(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn by_depth(m: &KripkeTree, n: usize) -> Vec<Vec<usize>> {
    let depth = m.depths();
    let mut levels = vec![Vec::new(); n + 1];
    for (v, &d) in depth.iter().enumerate() {
        if d <= n {
            levels[d].push(v);
        }
    }
    levels
}

fn same_label(m: &KripkeTree, u: usize, m2: &KripkeTree, v: usize, sig: &Signature) -> bool {
    sig.iter().all(|p| m.label(u).contains(p) == m2.label(v).contains(p))
}

/// Greatest level relation satisfying the base condition at every depth
/// ≤ n and the child condition `step` below depth n. Returns related pairs
/// per depth.
fn greatest<F>(m: &KripkeTree, m2: &KripkeTree, sig: &Signature, n: usize, step: F) -> Vec<Vec<(usize, usize)>>
where
    F: Fn(&[usize], &[usize], &dyn Fn(usize, usize) -> bool) -> bool,
{
    let (l1, l2) = (by_depth(m, n), by_depth(m2, n));
    let mut idx1 = vec![usize::MAX; m.len()];
    let mut idx2 = vec![usize::MAX; m2.len()];
    for level in &l1 {
        for (i, &v) in level.iter().enumerate() {
            idx1[v] = i;
        }
    }
    for level in &l2 {
        for (i, &v) in level.iter().enumerate() {
            idx2[v] = i;
        }
    }
    let mut rel: Vec<Vec<Vec<bool>>> = vec![Vec::new(); n + 1];
    for k in (0..=n).rev() {
        let mut mat = vec![vec![false; l2[k].len()]; l1[k].len()];
        for (i, &u) in l1[k].iter().enumerate() {
            for (j, &v) in l2[k].iter().enumerate() {
                if !same_label(m, u, m2, v, sig) {
                    continue;
                }
                mat[i][j] = k == n || {
                    let below = &rel[k + 1];
                    step(m.children(u), m2.children(v), &|a, b| below[idx1[a]][idx2[b]])
                };
            }
        }
        rel[k] = mat;
    }
    (0..=n)
        .map(|k| {
            let mut pairs = Vec::new();
            for (i, &u) in l1[k].iter().enumerate() {
                for (j, &v) in l2[k].iter().enumerate() {
                    if rel[k][i][j] {
                        pairs.push((u, v));
                    }
                }
            }
            pairs
        })
        .collect()
}

/// Maximal (σ,n)-bisimulation between M and M′ if it links the roots.
pub fn check_bisim(m: &KripkeTree, m2: &KripkeTree, sig: &Signature, n: usize) -> Option<LevelRelation> {
    let levels = greatest(m, m2, sig, n, |cu, cv, z| {
        cu.iter().all(|&a| cv.iter().any(|&b| z(a, b)))
            && cv.iter().all(|&b| cu.iter().any(|&a| z(a, b)))
    });
    levels[0].contains(&(m.root(), m2.root())).then_some(LevelRelation { levels })
}

/// (σ,n)-isomorphism of the n-prefixes of the σ-reducts.
pub fn check_iso(m: &KripkeTree, m2: &KripkeTree, sig: &Signature, n: usize) -> bool {
    m.code(m.root(), Some(sig), n, false) == m2.code(m2.root(), Some(sig), n, false)
}

/// Whether the left vertices in `subset` can be matched injectively into
/// the right vertices `0..right` along `adj`.
fn matchable(subset: &[usize], right: usize, adj: &dyn Fn(usize, usize) -> bool) -> bool {
    fn augment(
        a: usize,
        right: usize,
        adj: &dyn Fn(usize, usize) -> bool,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for b in 0..right {
            if adj(a, b) && !seen[b] {
                seen[b] = true;
                if owner[b].is_none_or(|o| augment(o, right, adj, seen, owner)) {
                    owner[b] = Some(a);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; right];
    subset.iter().all(|&a| {
        let mut seen = vec![false; right];
        augment(a, right, adj, &mut seen, &mut owner)
    })
}

/// Every set of at most g distinct left children has distinct partners.
fn graded_forth(left: usize, right: usize, g: usize, adj: &dyn Fn(usize, usize) -> bool) -> bool {
    let k = g.min(left);
    let mut subset: Vec<usize> = Vec::new();
    fn rec(
        start: usize,
        left: usize,
        k: usize,
        right: usize,
        subset: &mut Vec<usize>,
        adj: &dyn Fn(usize, usize) -> bool,
    ) -> bool {
        if subset.len() == k {
            return matchable(subset, right, adj);
        }
        for a in start..left {
            subset.push(a);
            let ok = rec(a + 1, left, k, right, subset, adj);
            subset.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    // Matchability of every k-subset implies it for all smaller subsets.
    rec(0, left, k, right, &mut subset, adj)
}

/// g-graded (σ,n)-bisimulation linking the roots.
pub fn check_graded_bisim(m: &KripkeTree, m2: &KripkeTree, sig: &Signature, n: usize, g: usize) -> bool {
    let levels = greatest(m, m2, sig, n, |cu, cv, z| {
        let fwd = |a: usize, b: usize| z(cu[a], cv[b]);
        let bwd = |b: usize, a: usize| z(cu[a], cv[b]);
        graded_forth(cu.len(), cv.len(), g, &fwd) && graded_forth(cv.len(), cu.len(), g, &bwd)
    });
    levels[0].contains(&(m.root(), m2.root()))
}
