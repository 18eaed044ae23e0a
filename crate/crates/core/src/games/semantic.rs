use std::collections::HashMap;

use super::{solve_parity, ParityGame, Player};
use crate::error::Result;
use crate::formula::{Formula, FormulaGraph, NodeKind};
use crate::kripke::KripkeTree;
use crate::util::combinations;

/// Position of the semantic game: a tree node paired with a subformula
/// position, or an intermediate graded choice.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SemPos {
    At { node: usize, sub: usize },
    /// Children picked by Eve for ◇≥k, or the children left after Eve's
    /// exceptions for □≥k; Adam moves to one of them.
    Chosen { node: usize, sub: usize, children: Vec<usize> },
}

struct Builder<'a> {
    tree: &'a KripkeTree,
    graph: &'a FormulaGraph,
    game: ParityGame<SemPos>,
    index: HashMap<SemPos, usize>,
    todo: Vec<usize>,
}

impl Builder<'_> {
    fn position(&mut self, pos: SemPos) -> usize {
        if let Some(&i) = self.index.get(&pos) {
            return i;
        }
        let (owner, prio) = match &pos {
            SemPos::Chosen { .. } => (Player::Adam, 0),
            SemPos::At { node, sub } => {
                let owner = match &self.graph.nodes[*sub] {
                    NodeKind::True | NodeKind::And(..) | NodeKind::Box { grade: 0, .. } => Player::Adam,
                    NodeKind::Lit { prop, positive } => {
                        let name = &self.graph.sig.names()[*prop];
                        if self.tree.label(*node).contains(name) == *positive {
                            Player::Adam
                        } else {
                            Player::Eve
                        }
                    }
                    _ => Player::Eve,
                };
                (owner, self.graph.priority[*sub])
            }
        };
        let i = self.game.add_position(owner, prio, pos.clone());
        self.index.insert(pos, i);
        self.todo.push(i);
        i
    }

    fn expand(&mut self, i: usize) {
        let targets: Vec<SemPos> = match self.game.payload[i].clone() {
            SemPos::Chosen { sub, children, .. } => {
                let body = match self.graph.nodes[sub] {
                    NodeKind::Dia { body, .. } | NodeKind::Box { body, .. } => body,
                    _ => unreachable!("graded choice at a non-modal position"),
                };
                children.into_iter().map(|c| SemPos::At { node: c, sub: body }).collect()
            }
            SemPos::At { node, sub } => {
                let kids = self.tree.children(node);
                let at = |s: usize| SemPos::At { node, sub: s };
                match self.graph.nodes[sub] {
                    NodeKind::True | NodeKind::False | NodeKind::Lit { .. } => vec![],
                    NodeKind::And(a, b) | NodeKind::Or(a, b) => vec![at(a), at(b)],
                    NodeKind::Fix { body, .. } => vec![at(body)],
                    NodeKind::Var { binder } => vec![at(binder)],
                    NodeKind::Dia { grade: 1, body } | NodeKind::Box { grade: 0, body } => {
                        kids.iter().map(|&c| SemPos::At { node: c, sub: body }).collect()
                    }
                    NodeKind::Dia { grade, .. } => combinations(kids.len(), grade as usize)
                        .into_iter()
                        .map(|s| SemPos::Chosen { node, sub, children: s.iter().map(|&j| kids[j]).collect() })
                        .collect(),
                    NodeKind::Box { grade, .. } => {
                        let e = (grade as usize).min(kids.len());
                        combinations(kids.len(), e)
                            .into_iter()
                            .map(|ex| SemPos::Chosen {
                                node,
                                sub,
                                children: (0..kids.len()).filter(|j| !ex.contains(j)).map(|j| kids[j]).collect(),
                            })
                            .collect()
                    }
                }
            }
        };
        for t in targets {
            let j = self.position(t);
            self.game.add_move(i, j);
        }
    }
}

/// Builds the game G(M, φ) from the root of `tree`. Positions reachable
/// from the initial position only. `φ` is normalized first.
pub fn semantic_game(tree: &KripkeTree, phi: &Formula) -> Result<ParityGame<SemPos>> {
    let graph = FormulaGraph::new(phi)?;
    Ok(semantic_game_on(tree, &graph))
}

pub(crate) fn semantic_game_on(tree: &KripkeTree, graph: &FormulaGraph) -> ParityGame<SemPos> {
    let mut b = Builder { tree, graph, game: ParityGame::new(), index: HashMap::new(), todo: Vec::new() };
    let init = b.position(SemPos::At { node: tree.root(), sub: graph.root });
    b.game.initial = init;
    while let Some(i) = b.todo.pop() {
        b.expand(i);
    }
    b.game
}

/// True iff the root of `tree` satisfies `φ`.
pub fn model_check(tree: &KripkeTree, phi: &Formula) -> Result<bool> {
    let g = semantic_game(tree, phi)?;
    Ok(solve_parity(&g).eve_wins(g.initial))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::kripke::parse_tree;

    fn check(t: &str, f: &str) -> bool {
        model_check(&parse_tree(t).unwrap(), &parse_formula(f).unwrap()).unwrap()
    }

    #[test]
    fn literal_game_is_terminal() {
        let g = semantic_game(&parse_tree("(n {a})").unwrap(), &parse_formula("a").unwrap()).unwrap();
        assert_eq!(g.len(), 1);
        assert!(g.moves[0].is_empty());
        assert_eq!(g.owner[0], Player::Adam);
        assert!(solve_parity(&g).eve_wins(0));
    }

    #[test]
    fn nu_loop_is_even() {
        let g = semantic_game(&parse_tree("(n {a} (n {b}))").unwrap(), &parse_formula("nu X. X").unwrap()).unwrap();
        assert!(g.priority.iter().all(|p| p % 2 == 0));
        assert!(g.moves.iter().all(|m| m.len() == 1));
        assert!(solve_parity(&g).eve_wins(g.initial));
    }

    #[test]
    fn graded_subset_move() {
        let g = semantic_game(&parse_tree("(n {} (n {a}) (n {a}))").unwrap(), &parse_formula("<2>a").unwrap()).unwrap();
        assert!(g.payload.iter().any(|p| matches!(p, SemPos::Chosen { children, .. } if children.len() == 2)));
        assert!(solve_parity(&g).eve_wins(g.initial));
    }

    #[test]
    fn examples() {
        assert!(check("(n {} (n {a}))", "<>a"));
        assert!(!check("(n {} (n {a} (n {b})))", "mu X. <>X"));
        assert!(!check("(n {a})", "mu X. <>X"));
        assert!(check("(n {} (n {a}) (n {}))", "[1]a"));
        assert!(!check("(n {} (n {a}) (n {}) (n {}))", "[1]a"));
        assert!(!check("(n {} (n {a}))", "<2>a"));
        assert!(check("(n {} (n {a}) (n {b}))", "[2]false"));
        assert!(check("(n {} (n {b} (n {a})))", "mu X. a | <>X"));
        assert!(check("(n {} (n {b}) (n {c}))", "nu X. []X"));
        assert!(check("(n {} (n {} (n {a})) (n {}))", "mu X. a | <>X"));
        assert!(check("(n {} (n {} (n {a})) (n {}))", "mu X. a | []X"));
        assert!(!check("(n {} (n {} (n {a})) (n {}))", "mu X. a | ([]X & <>true)"));
    }
}
