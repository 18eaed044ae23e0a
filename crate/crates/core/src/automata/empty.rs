use std::collections::HashMap;

use super::{Npta, Pattern};
use crate::games::{solve_parity, ParityGame, Player, Solution};
use crate::kripke::KripkeTree;

#[derive(Clone, Debug)]
enum EPos {
    State,
    Choice { letter: u32, pattern: Pattern },
}

impl Npta {
    /// Emptiness game: Eve picks a letter and a transition at a state, Adam
    /// picks one of its fixed child states. Repeat states are never needed
    /// since extra children only add obligations.
    fn emptiness_game(&self) -> ParityGame<EPos> {
        let mut g = ParityGame::new();
        for q in 0..self.len() {
            g.add_position(Player::Eve, self.priority[q], EPos::State);
        }
        for q in 0..self.len() {
            let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
            for c in self.letters() {
                for p in &self.delta[q][c as usize] {
                    let mut key = p.fixed.clone();
                    key.dedup();
                    let pos = *seen.entry(key.clone()).or_insert_with(|| {
                        let pos = g.add_position(Player::Adam, 0, EPos::Choice { letter: c, pattern: p.clone() });
                        for &s in &key {
                            g.add_move(pos, s);
                        }
                        pos
                    });
                    if !g.moves[q].contains(&pos) {
                        g.add_move(q, pos);
                    }
                }
            }
        }
        g.initial = self.initial;
        g
    }

    fn solved(&self) -> (ParityGame<EPos>, Solution) {
        let g = self.emptiness_game();
        let s = solve_parity(&g);
        (g, s)
    }

    /// States from which some tree is accepted.
    pub fn live_states(&self) -> &[bool] {
        self.live.get_or_init(|| {
            let (_, s) = self.solved();
            s.eve_region[..self.len()].to_vec()
        })
    }

    pub fn is_empty(&self) -> bool {
        self.is_empty_automaton() || !self.live_states()[self.initial]
    }

    /// A finite prefix of an accepted tree, unfolded from Eve's winning
    /// strategy to depth `|Q| + 1`; nodes at that depth are cut.
    pub fn witness_prefix(&self) -> Option<(KripkeTree, usize)> {
        if self.is_empty() {
            return None;
        }
        let (g, s) = self.solved();
        let limit = self.len() + 1;
        let build = |q: usize| -> (u32, Vec<usize>) {
            let adam = s.eve_strategy.choice[&q];
            match &g.payload[adam] {
                EPos::Choice { letter, pattern } => (*letter, pattern.fixed.clone()),
                EPos::State => unreachable!("strategy moves to a choice"),
            }
        };
        fn unfold(
            q: usize,
            depth: usize,
            limit: usize,
            a: &Npta,
            build: &dyn Fn(usize) -> (u32, Vec<usize>),
        ) -> KripkeTree {
            let (c, kids) = build(q);
            let label = a.sig.letter_props(c);
            if depth == limit {
                return KripkeTree::from_label_set(label, Vec::new());
            }
            let children = kids.iter().map(|&p| unfold(p, depth + 1, limit, a, build)).collect();
            KripkeTree::from_label_set(label, children)
        }
        Some((unfold(self.initial, 0, limit, self, &build), limit))
    }
}
