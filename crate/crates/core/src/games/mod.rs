//! Parity games, a recursive (Zielonka) solver with positional strategies,
//! and the semantic game of the µ-calculus on finite trees.

mod semantic;

use std::collections::BTreeMap;

pub use semantic::{model_check, semantic_game, SemPos};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    Eve,
    Adam,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Eve => Player::Adam,
            Player::Adam => Player::Eve,
        }
    }

    /// The player favoured by a priority under the max-parity condition.
    pub fn of_priority(p: u32) -> Player {
        if p % 2 == 0 {
            Player::Eve
        } else {
            Player::Adam
        }
    }
}

/// Finite max-parity game: Eve wins a play iff the highest priority seen
/// infinitely often is even. A position without moves is lost by its owner.
#[derive(Clone, Debug)]
pub struct ParityGame<P = ()> {
    pub owner: Vec<Player>,
    pub priority: Vec<u32>,
    pub moves: Vec<Vec<usize>>,
    pub payload: Vec<P>,
    pub initial: usize,
}

impl<P> Default for ParityGame<P> {
    fn default() -> Self {
        ParityGame { owner: Vec::new(), priority: Vec::new(), moves: Vec::new(), payload: Vec::new(), initial: 0 }
    }
}

impl<P> ParityGame<P> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_position(&mut self, owner: Player, priority: u32, payload: P) -> usize {
        self.owner.push(owner);
        self.priority.push(priority);
        self.moves.push(Vec::new());
        self.payload.push(payload);
        self.owner.len() - 1
    }

    pub fn add_move(&mut self, from: usize, to: usize) {
        self.moves[from].push(to);
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }
}

/// Positional strategy of one player: chosen successor per position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strategy {
    pub player: Player,
    pub choice: BTreeMap<usize, usize>,
}

/// Winning regions with certifying positional strategies.
#[derive(Clone, Debug)]
pub struct Solution {
    pub eve_region: Vec<bool>,
    pub eve_strategy: Strategy,
    pub adam_strategy: Strategy,
}

impl Solution {
    pub fn eve_wins(&self, v: usize) -> bool {
        self.eve_region[v]
    }
}

struct Arena {
    owner: Vec<Player>,
    priority: Vec<u32>,
    moves: Vec<Vec<usize>>,
    preds: Vec<Vec<usize>>,
}

impl Arena {
    fn attractor(&self, sub: &[bool], target: &[bool], player: Player, strat: &mut [Option<usize>]) -> Vec<bool> {
        let n = self.owner.len();
        let mut attr = target.to_vec();
        let mut count: Vec<usize> = (0..n)
            .map(|v| if sub[v] { self.moves[v].iter().filter(|&&w| sub[w]).count() } else { 0 })
            .collect();
        let mut queue: Vec<usize> = (0..n).filter(|&v| attr[v]).collect();
        while let Some(w) = queue.pop() {
            for &v in &self.preds[w] {
                if !sub[v] || attr[v] {
                    continue;
                }
                if self.owner[v] == player {
                    attr[v] = true;
                    strat[v] = Some(w);
                    queue.push(v);
                } else {
                    count[v] -= 1;
                    if count[v] == 0 {
                        attr[v] = true;
                        queue.push(v);
                    }
                }
            }
        }
        attr
    }

    /// Returns Eve's region within `sub`; writes winning moves into `strat`.
    fn zielonka(&self, sub: &[bool], strat: &mut [Option<usize>]) -> Vec<bool> {
        let n = self.owner.len();
        let Some(p) = (0..n).filter(|&v| sub[v]).map(|v| self.priority[v]).max() else {
            return vec![false; n];
        };
        let i = Player::of_priority(p);
        let top: Vec<bool> = (0..n).map(|v| sub[v] && self.priority[v] == p).collect();
        let mut attr_strat = vec![None; n];
        let a = self.attractor(sub, &top, i, &mut attr_strat);
        let rest: Vec<bool> = (0..n).map(|v| sub[v] && !a[v]).collect();
        let mut s1 = vec![None; n];
        let eve1 = self.zielonka(&rest, &mut s1);
        let opp_win: Vec<bool> = (0..n).map(|v| rest[v] && (eve1[v] != (i == Player::Eve))).collect();
        if !opp_win.iter().any(|&b| b) {
            for v in 0..n {
                if !sub[v] {
                    continue;
                }
                strat[v] = if rest[v] {
                    s1[v]
                } else if top[v] {
                    self.moves[v].iter().copied().find(|&w| sub[w])
                } else {
                    attr_strat[v]
                };
            }
            return if i == Player::Eve { sub.to_vec() } else { vec![false; n] };
        }
        let opp = i.opponent();
        let mut b_strat = vec![None; n];
        let b = self.attractor(sub, &opp_win, opp, &mut b_strat);
        let rest2: Vec<bool> = (0..n).map(|v| sub[v] && !b[v]).collect();
        let mut s2 = vec![None; n];
        let eve2 = self.zielonka(&rest2, &mut s2);
        let mut eve = vec![false; n];
        for v in 0..n {
            if !sub[v] {
                continue;
            }
            if b[v] {
                eve[v] = opp == Player::Eve;
                strat[v] = if opp_win[v] { s1[v] } else { b_strat[v] };
            } else {
                eve[v] = eve2[v];
                strat[v] = s2[v];
            }
        }
        eve
    }
}

/// Solves a finite max-parity game with Zielonka's recursive algorithm.
pub fn solve_parity<P>(g: &ParityGame<P>) -> Solution {
    let n = g.len();
    // Two sinks absorb dead ends: index n is won by Eve, n + 1 by Adam.
    let mut ranks: Vec<u32> = g.priority.clone();
    ranks.sort_unstable();
    ranks.dedup();
    let mut compressed = BTreeMap::new();
    let mut out = 0u32;
    for (k, &r) in ranks.iter().enumerate() {
        if k == 0 {
            out = r % 2;
        } else if (r - ranks[k - 1]) % 2 == 1 {
            out += 1;
        }
        compressed.insert(r, out);
    }
    let mut owner = g.owner.clone();
    let mut priority: Vec<u32> = g.priority.iter().map(|p| compressed[p]).collect();
    let mut moves = g.moves.clone();
    owner.push(Player::Eve);
    priority.push(0);
    moves.push(vec![n]);
    owner.push(Player::Adam);
    priority.push(1);
    moves.push(vec![n + 1]);
    for v in 0..n {
        if moves[v].is_empty() {
            moves[v].push(if owner[v] == Player::Eve { n + 1 } else { n });
        }
    }
    let total = n + 2;
    let mut preds = vec![Vec::new(); total];
    for (v, ms) in moves.iter().enumerate() {
        for &w in ms {
            preds[w].push(v);
        }
    }
    let arena = Arena { owner, priority, moves, preds };
    let mut strat = vec![None; total];
    let eve = arena.zielonka(&vec![true; total], &mut strat);
    let mut eve_strategy = Strategy { player: Player::Eve, choice: BTreeMap::new() };
    let mut adam_strategy = Strategy { player: Player::Adam, choice: BTreeMap::new() };
    for v in 0..n {
        let Some(w) = strat[v] else { continue };
        if w >= n {
            continue;
        }
        let wins = eve[v] == (g.owner[v] == Player::Eve);
        if !wins {
            continue;
        }
        match g.owner[v] {
            Player::Eve => eve_strategy.choice.insert(v, w),
            Player::Adam => adam_strategy.choice.insert(v, w),
        };
    }
    Solution { eve_region: eve[..n].to_vec(), eve_strategy, adam_strategy }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_loops() {
        for (p, eve) in [(0, true), (1, false), (4, true), (7, false)] {
            let mut g: ParityGame = ParityGame::new();
            let v = g.add_position(Player::Eve, p, ());
            g.add_move(v, v);
            assert_eq!(solve_parity(&g).eve_wins(v), eve);
        }
    }

    #[test]
    fn eve_picks_even_loop() {
        let mut g: ParityGame = ParityGame::new();
        let c = g.add_position(Player::Eve, 0, ());
        let even = g.add_position(Player::Eve, 0, ());
        let odd = g.add_position(Player::Eve, 1, ());
        g.add_move(c, even);
        g.add_move(c, odd);
        g.add_move(even, even);
        g.add_move(odd, odd);
        let s = solve_parity(&g);
        assert!(s.eve_wins(c));
        assert_eq!(s.eve_strategy.choice.get(&c), Some(&even));
    }

    #[test]
    fn dead_ends_lose() {
        let mut g: ParityGame = ParityGame::new();
        let e = g.add_position(Player::Eve, 0, ());
        let a = g.add_position(Player::Adam, 0, ());
        let s = solve_parity(&g);
        assert!(!s.eve_wins(e));
        assert!(s.eve_wins(a));
    }

    #[test]
    fn higher_priority_dominates() {
        // Adam alternates between a 2-loop through priority 3 and 4.
        let mut g: ParityGame = ParityGame::new();
        let a = g.add_position(Player::Adam, 0, ());
        let x = g.add_position(Player::Eve, 3, ());
        let y = g.add_position(Player::Eve, 4, ());
        g.add_move(a, x);
        g.add_move(x, a);
        g.add_move(x, y);
        g.add_move(y, a);
        let s = solve_parity(&g);
        assert!(s.eve_wins(a));
        assert_eq!(s.eve_strategy.choice.get(&x), Some(&y));
    }

    #[test]
    fn strategies_are_winning_on_random_games() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(1..9);
            let mut g: ParityGame = ParityGame::new();
            for _ in 0..n {
                let owner = if rng.gen_bool(0.5) { Player::Eve } else { Player::Adam };
                g.add_position(owner, rng.gen_range(0..5), ());
            }
            for v in 0..n {
                for w in 0..n {
                    if rng.gen_bool(0.3) {
                        g.add_move(v, w);
                    }
                }
            }
            let s = solve_parity(&g);
            for v in 0..n {
                assert_eq!(s.eve_wins(v), brute_force(&g, v), "game {g:?} pos {v}");
            }
        }
    }

    /// Tries every positional Eve strategy and checks all Adam replies by
    /// searching for a cycle with odd maximum reachable under the strategy.
    fn brute_force(g: &ParityGame, start: usize) -> bool {
        let n = g.len();
        let eve: Vec<usize> = (0..n).filter(|&v| g.owner[v] == Player::Eve && !g.moves[v].is_empty()).collect();
        let mut choice = vec![0usize; eve.len()];
        loop {
            let mut succ: Vec<Vec<usize>> = g.moves.clone();
            for (k, &v) in eve.iter().enumerate() {
                succ[v] = vec![g.moves[v][choice[k]]];
            }
            if !adam_can_win(g, &succ, start) {
                return true;
            }
            let mut k = 0;
            loop {
                if k == eve.len() {
                    return false;
                }
                choice[k] += 1;
                if choice[k] < g.moves[eve[k]].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
    }

    fn adam_can_win(g: &ParityGame, succ: &[Vec<usize>], start: usize) -> bool {
        let n = g.len();
        let mut reach = vec![false; n];
        let mut stack = vec![start];
        reach[start] = true;
        while let Some(v) = stack.pop() {
            for &w in &succ[v] {
                if !reach[w] {
                    reach[w] = true;
                    stack.push(w);
                }
            }
        }
        for v in 0..n {
            if !reach[v] {
                continue;
            }
            if succ[v].is_empty() && g.owner[v] == Player::Eve {
                return true;
            }
            let p = g.priority[v];
            if p % 2 == 1 {
                // Cycle through v using only priorities ≤ p.
                let ok = |u: usize| g.priority[u] <= p;
                let mut seen = vec![false; n];
                let mut st: Vec<usize> = succ[v].iter().copied().filter(|&u| ok(u)).collect();
                while let Some(u) = st.pop() {
                    if u == v {
                        return true;
                    }
                    if seen[u] {
                        continue;
                    }
                    seen[u] = true;
                    st.extend(succ[u].iter().copied().filter(|&x| ok(x)));
                }
            }
        }
        false
    }
}
