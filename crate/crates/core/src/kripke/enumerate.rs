use std::collections::BTreeSet;

use super::KripkeTree;
use crate::formula::Signature;

/// Streams trees of height ≤ depth with outdegree ≤ d over valuations ⊆ σ,
/// one per isomorphism class, in a fixed canonical order.
pub fn enumerate_trees(sig: &Signature, d: usize, depth: usize, limit: usize) -> TreeEnumerator {
    TreeEnumerator::new(sig, d, depth, limit)
}

/// Iterator behind [`enumerate_trees`]. Trees of height ≤ k are built as a
/// root valuation plus a multiset (non-decreasing index sequence) of trees of
/// height ≤ k−1.
pub struct TreeEnumerator {
    labels: Vec<BTreeSet<String>>,
    sub: Vec<KripkeTree>,
    d: usize,
    label_idx: usize,
    combo: Vec<usize>,
    started: bool,
    emitted: usize,
    limit: usize,
}

fn labels_of(sig: &Signature) -> Vec<BTreeSet<String>> {
    (0..sig.letter_count() as u32).map(|c| sig.letter_props(c)).collect()
}

/// Advances a non-decreasing sequence over `0..n`, growing its length up to
/// `max_len`. Returns false once every sequence has been produced.
pub(crate) fn next_multiset(combo: &mut Vec<usize>, n: usize, max_len: usize) -> bool {
    if n > 0 {
        let mut i = combo.len();
        while i > 0 {
            i -= 1;
            if combo[i] + 1 < n {
                let v = combo[i] + 1;
                for c in combo[i..].iter_mut() {
                    *c = v;
                }
                return true;
            }
        }
    }
    if combo.len() < max_len && n > 0 {
        let len = combo.len() + 1;
        combo.clear();
        combo.resize(len, 0);
        return true;
    }
    false
}

impl TreeEnumerator {
    fn new(sig: &Signature, d: usize, depth: usize, limit: usize) -> Self {
        let labels = labels_of(sig);
        let sub = if depth == 0 {
            Vec::new()
        } else {
            all_trees(sig, d, depth - 1)
        };
        TreeEnumerator {
            labels,
            sub,
            d,
            label_idx: 0,
            combo: Vec::new(),
            started: false,
            emitted: 0,
            limit,
        }
    }
}

impl Iterator for TreeEnumerator {
    type Item = KripkeTree;

    fn next(&mut self) -> Option<KripkeTree> {
        if self.emitted >= self.limit || self.label_idx >= self.labels.len() {
            return None;
        }
        if self.started && !next_multiset(&mut self.combo, self.sub.len(), self.d) {
            self.label_idx += 1;
            self.combo.clear();
            if self.label_idx >= self.labels.len() {
                return None;
            }
        }
        self.started = true;
        self.emitted += 1;
        let kids = self.combo.iter().map(|&i| self.sub[i].clone()).collect();
        Some(KripkeTree::from_label_set(self.labels[self.label_idx].clone(), kids))
    }
}

/// All trees of height ≤ depth (materialized).
pub(crate) fn all_trees(sig: &Signature, d: usize, depth: usize) -> Vec<KripkeTree> {
    TreeEnumerator::new(sig, d, depth, usize::MAX).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn sig_a() -> Signature {
        Signature::from_names(["a"])
    }

    #[test]
    fn counts() {
        assert_eq!(enumerate_trees(&sig_a(), 0, 0, 100).count(), 2);
        assert_eq!(enumerate_trees(&sig_a(), 1, 1, 100).count(), 6);
        assert_eq!(enumerate_trees(&sig_a(), 2, 2, 1000).count(), 2 * (1 + 12 + 78));
        assert_eq!(enumerate_trees(&sig_a(), 2, 2, 3).count(), 3);
        assert_eq!(enumerate_trees(&Signature::new(), 3, 1, 100).count(), 4);
    }

    #[test]
    fn duplicate_free_up_to_iso() {
        let trees: Vec<KripkeTree> = enumerate_trees(&sig_a(), 2, 2, usize::MAX).collect();
        let codes: HashSet<String> = trees.iter().map(|t| t.code(0, None, 9, false)).collect();
        assert_eq!(codes.len(), trees.len());
        for t in &trees {
            assert!(t.height() <= 2 && t.outdegree() <= 2);
        }
    }

    #[test]
    fn deterministic_order() {
        let a: Vec<String> = enumerate_trees(&sig_a(), 2, 2, 50).map(|t| t.to_sexpr()).collect();
        let b: Vec<String> = enumerate_trees(&sig_a(), 2, 2, 50).map(|t| t.to_sexpr()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn multiset_sequences() {
        let mut c = Vec::new();
        let mut seen = vec![c.clone()];
        while next_multiset(&mut c, 3, 2) {
            seen.push(c.clone());
        }
        assert_eq!(seen.len(), 1 + 3 + 6);
    }
}
