//! Finite pointed tree models: construction, text format, bisimulation and
//! isomorphism checks, quotients and enumeration.

mod bisim;
mod enumerate;
mod text;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use bisim::{check_bisim, check_graded_bisim, check_iso, LevelRelation};
pub use enumerate::{enumerate_trees, TreeEnumerator};
pub(crate) use enumerate::{all_trees, next_multiset};
pub use text::parse_tree;

use crate::formula::Signature;

/// A node: its valuation and ordered children.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub label: BTreeSet<String>,
    pub children: Vec<usize>,
}

/// Finite pointed labelled tree; node 0 is the root and nodes are stored in
/// preorder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeTree {
    nodes: Vec<TreeNode>,
}

impl KripkeTree {
    pub fn leaf<I, S>(label: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        KripkeTree::node(label, Vec::new())
    }

    pub fn node<I, S>(label: I, children: Vec<KripkeTree>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        KripkeTree::from_label_set(label.into_iter().map(Into::into).collect(), children)
    }

    pub fn from_label_set(label: BTreeSet<String>, children: Vec<KripkeTree>) -> Self {
        let mut nodes = vec![TreeNode { label, children: Vec::new() }];
        for child in children {
            let offset = nodes.len();
            nodes[0].children.push(offset);
            for mut n in child.nodes {
                for c in &mut n.children {
                    *c += offset;
                }
                nodes.push(n);
            }
        }
        KripkeTree { nodes }
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn label(&self, v: usize) -> &BTreeSet<String> {
        &self.nodes[v].label
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.nodes[v].children
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.nodes[v].children.is_empty()
    }

    /// Depth of every node.
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.nodes.len()];
        for v in 0..self.nodes.len() {
            for &c in &self.nodes[v].children {
                depth[c] = depth[v] + 1;
            }
        }
        depth
    }

    /// Length of the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        self.depths().into_iter().max().unwrap_or(0)
    }

    /// Maximal number of children of a node.
    pub fn outdegree(&self) -> usize {
        self.nodes.iter().map(|n| n.children.len()).max().unwrap_or(0)
    }

    /// Propositions true somewhere in the tree.
    pub fn sig(&self) -> Signature {
        self.nodes.iter().flat_map(|n| n.label.iter().cloned()).collect()
    }

    pub fn subtree(&self, v: usize) -> KripkeTree {
        let kids = self.nodes[v].children.iter().map(|&c| self.subtree(c)).collect();
        KripkeTree::from_label_set(self.nodes[v].label.clone(), kids)
    }

    /// The n-prefix M|_n: nodes of depth at most n.
    pub fn prefix(&self, n: usize) -> KripkeTree {
        self.map_tree(self.root(), n, &|l| l.clone())
    }

    /// σ-reduct: valuations intersected with σ.
    pub fn restrict(&self, sig: &Signature) -> KripkeTree {
        self.map_tree(self.root(), usize::MAX, &|l| {
            l.iter().filter(|p| sig.contains(p)).cloned().collect()
        })
    }

    fn map_tree(
        &self,
        v: usize,
        depth_left: usize,
        f: &dyn Fn(&BTreeSet<String>) -> BTreeSet<String>,
    ) -> KripkeTree {
        let kids = if depth_left == 0 {
            Vec::new()
        } else {
            self.nodes[v]
                .children
                .iter()
                .map(|&c| self.map_tree(c, depth_left - 1, f))
                .collect()
        };
        KripkeTree::from_label_set(f(&self.nodes[v].label), kids)
    }

    /// Duplicates child subtrees until every inner node has exactly d children.
    pub fn full_dary_completion(&self, d: usize) -> KripkeTree {
        self.complete_at(self.root(), d)
    }

    fn complete_at(&self, v: usize, d: usize) -> KripkeTree {
        let mut kids: Vec<KripkeTree> =
            self.nodes[v].children.iter().map(|&c| self.complete_at(c, d)).collect();
        if let Some(last) = kids.last().cloned() {
            while kids.len() < d {
                kids.push(last.clone());
            }
        }
        KripkeTree::from_label_set(self.nodes[v].label.clone(), kids)
    }

    /// Canonical code of the subtree at `v`: valuation (restricted to σ if
    /// given) followed by the sorted codes of the children, cut at `depth`.
    /// With `dedup` the children form a set, which identifies subtrees up
    /// to bisimilarity instead of isomorphism.
    pub fn code(&self, v: usize, sig: Option<&Signature>, depth: usize, dedup: bool) -> String {
        let label: Vec<&str> = self.nodes[v]
            .label
            .iter()
            .filter(|p| sig.is_none_or(|s| s.contains(p)))
            .map(String::as_str)
            .collect();
        let mut out = format!("{{{}}}", label.join(" "));
        if depth > 0 {
            let mut kids: Vec<String> = self.nodes[v]
                .children
                .iter()
                .map(|&c| self.code(c, sig, depth - 1, dedup))
                .collect();
            kids.sort();
            if dedup {
                kids.dedup();
            }
            out.push('(');
            out.push_str(&kids.concat());
            out.push(')');
        }
        out
    }

    /// Bisimilarity quotient: sibling subtrees that are bisimilar merge.
    pub fn quotient(&self) -> KripkeTree {
        self.quotient_at(self.root())
    }

    fn quotient_at(&self, v: usize) -> KripkeTree {
        let mut by_code: BTreeMap<String, KripkeTree> = BTreeMap::new();
        for &c in &self.nodes[v].children {
            by_code
                .entry(self.code(c, None, usize::MAX, true))
                .or_insert_with(|| self.quotient_at(c));
        }
        KripkeTree::from_label_set(self.nodes[v].label.clone(), by_code.into_values().collect())
    }

    /// Prints the S-expression form `(node {a b} (node {}) ...)`.
    pub fn to_sexpr(&self) -> String {
        let mut out = String::new();
        self.write_sexpr(self.root(), &mut out);
        out
    }

    fn write_sexpr(&self, v: usize, out: &mut String) {
        let label: Vec<&str> = self.nodes[v].label.iter().map(String::as_str).collect();
        out.push_str("(node {");
        out.push_str(&label.join(" "));
        out.push('}');
        for &c in &self.nodes[v].children {
            out.push(' ');
            self.write_sexpr(c, out);
        }
        out.push(')');
    }
}

impl fmt::Display for KripkeTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sexpr())
    }
}

/// The two models of the Craig-interpolation counterexample over ternary
/// trees, linked by an {a}-bisimulation.
pub fn ternary_witnesses() -> (KripkeTree, KripkeTree) {
    let none: [&str; 0] = [];
    let m = KripkeTree::node(
        none,
        vec![KripkeTree::leaf(["a", "b"]), KripkeTree::leaf(["a"]), KripkeTree::leaf(none)],
    );
    let m2 = KripkeTree::node(
        none,
        vec![KripkeTree::leaf(["c"]), KripkeTree::leaf(none), KripkeTree::leaf(["a"])],
    );
    (m, m2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> KripkeTree {
        parse_tree(s).unwrap()
    }

    #[test]
    fn quotient_examples() {
        let m = t("(node {} (node {a}) (node {a}))");
        assert_eq!(m.quotient(), t("(node {} (node {a}))"));
        let minimal = t("(node {} (node {a}) (node {b} (node {})))");
        assert_eq!(minimal.quotient().code(0, None, 9, false), minimal.code(0, None, 9, false));
        let full = t("(node {} (node {} (node {}) (node {})) (node {} (node {}) (node {})))");
        assert_eq!(full.quotient(), t("(node {} (node {} (node {})))"));
    }

    #[test]
    fn quotient_is_idempotent_and_bisimilar() {
        let m = t("(node {a} (node {} (node {a}) (node {a})) (node {} (node {a})) (node {b}))");
        let q = m.quotient();
        assert_eq!(q.quotient(), q);
        let sig = Signature::from_names(["a", "b"]);
        assert!(check_bisim(&m, &q, &sig, 5).is_some());
    }

    #[test]
    fn prefix_and_completion() {
        let m = t("(node {} (node {a} (node {b})) (node {}))");
        assert_eq!(m.prefix(1), t("(node {} (node {a}) (node {}))"));
        assert_eq!(m.prefix(0), t("(node {})"));
        let c = t("(node {} (node {a}))").full_dary_completion(2);
        assert_eq!(c, t("(node {} (node {a}) (node {a}))"));
        assert_eq!(m.height(), 2);
        assert_eq!(m.outdegree(), 2);
    }

    #[test]
    fn restrict_drops_props() {
        let m = t("(node {a b} (node {c}))");
        let sig = Signature::from_names(["a"]);
        assert_eq!(m.restrict(&sig), t("(node {a} (node {}))"));
    }
}
