use std::collections::HashMap;
use std::fmt::Write;

use super::{Branching, Npta, Pattern};
use crate::error::{Error, Result};
use crate::formula::Signature;

fn syntax<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Syntax { pos: line, msg: msg.into() })
}

/// Parses the line-oriented automaton format:
///
/// ```text
/// sig: a b
/// arity: 2            # or: unbounded
/// states: q0 q1
/// initial: q0
/// prio: q0=0 q1=1
/// q0 , {a} -> (q1 q1*)   # q1* may label any number of further children
/// q1 , * -> ()           # '*' stands for every letter
/// q1 , {} -> {q0 q1}     # set transition
/// ```
///
/// Syntax error positions are line numbers.
pub fn parse_npta(text: &str) -> Result<Npta> {
    let mut sig = None;
    let mut branching = None;
    let mut states: Vec<String> = Vec::new();
    let mut initial = None;
    let mut prio: HashMap<String, u32> = HashMap::new();
    let mut rules: Vec<(usize, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.contains("->") {
            rules.push((lineno, line.to_string()));
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            return syntax(lineno, "expected 'key: value' or a transition");
        };
        let value = value.trim();
        match key.trim() {
            "sig" => sig = Some(Signature::from_names(value.split_whitespace())),
            "arity" => {
                branching = Some(if value == "unbounded" {
                    Branching::Set
                } else {
                    match value.parse() {
                        Ok(d) => Branching::Tuple(d),
                        Err(_) => return syntax(lineno, "arity must be a number or 'unbounded'"),
                    }
                })
            }
            "states" => states = value.split_whitespace().map(str::to_string).collect(),
            "initial" => initial = Some(value.to_string()),
            "prio" => {
                for item in value.split_whitespace() {
                    let Some((q, p)) = item.split_once('=') else {
                        return syntax(lineno, format!("bad priority entry '{item}'"));
                    };
                    let Ok(p) = p.parse() else {
                        return syntax(lineno, format!("bad priority entry '{item}'"));
                    };
                    prio.insert(q.to_string(), p);
                }
            }
            other => return syntax(lineno, format!("unknown header '{other}'")),
        }
    }
    let sig = sig.unwrap_or_default();
    let Some(branching) = branching else { return syntax(0, "missing 'arity:' header") };
    if states.is_empty() {
        return syntax(0, "missing 'states:' header");
    }
    let mut a = Npta::new(sig.clone(), branching);
    let mut index = HashMap::new();
    for s in &states {
        let q = a.add_state(s.clone(), prio.get(s).copied().unwrap_or(0));
        index.insert(s.clone(), q);
    }
    for q in prio.keys() {
        if !index.contains_key(q) {
            return syntax(0, format!("priority for undeclared state '{q}'"));
        }
    }
    a.initial = match initial {
        Some(q) => match index.get(&q) {
            Some(&i) => i,
            None => return syntax(0, format!("undeclared initial state '{q}'")),
        },
        None => 0,
    };
    for (lineno, rule) in rules {
        let (lhs, rhs) = rule.split_once("->").expect("rule line");
        let Some((q, letter)) = lhs.split_once(',') else {
            return syntax(lineno, "expected 'state , letter -> children'");
        };
        let Some(&q) = index.get(q.trim()) else {
            return syntax(lineno, format!("undeclared state '{}'", q.trim()));
        };
        let letter = letter.trim();
        let letters: Vec<u32> = if letter == "*" {
            a.letters().collect()
        } else {
            let Some(inner) = letter.strip_prefix('{').and_then(|s| s.strip_suffix('}')) else {
                return syntax(lineno, "letter must be '{...}' or '*'");
            };
            let mut mask = 0u32;
            for p in inner.split_whitespace() {
                match sig.index_of(p) {
                    Some(i) => mask |= 1 << i,
                    None => return syntax(lineno, format!("proposition '{p}' not in sig")),
                }
            }
            vec![mask]
        };
        let rhs = rhs.trim();
        let (set_mode, inner) = if let Some(s) = rhs.strip_prefix('{').and_then(|s| s.strip_suffix('}')) {
            (true, s)
        } else if let Some(s) = rhs.strip_prefix('(').and_then(|s| s.strip_suffix(')')) {
            (false, s)
        } else {
            return syntax(lineno, "children must be '(...)' or '{...}'");
        };
        let mut fixed = Vec::new();
        let mut repeat = Vec::new();
        for tok in inner.split_whitespace() {
            let (name, star) = match tok.strip_suffix('*') {
                Some(n) => (n, true),
                None => (tok, false),
            };
            let Some(&p) = index.get(name) else {
                return syntax(lineno, format!("undeclared state '{name}'"));
            };
            if set_mode && star {
                return syntax(lineno, "'*' is not allowed inside a set transition");
            }
            if star {
                repeat.push(p);
            } else {
                fixed.push(p);
            }
        }
        let pattern = if set_mode { Pattern::set(fixed) } else { Pattern::new(fixed, repeat) };
        if let Branching::Tuple(d) = branching {
            if pattern.fixed.len() > d {
                return Err(Error::ArityMismatch(format!("line {lineno}: transition exceeds arity {d}")));
            }
        }
        for &c in &letters {
            a.add_transition(q, c, pattern.clone());
        }
    }
    Ok(a)
}

impl Npta {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "sig: {}", self.sig.names().join(" "));
        let _ = match self.branching {
            Branching::Tuple(d) => writeln!(out, "arity: {d}"),
            Branching::Set => writeln!(out, "arity: unbounded"),
        };
        let _ = writeln!(out, "states: {}", self.names.join(" "));
        if !self.names.is_empty() {
            let _ = writeln!(out, "initial: {}", self.names[self.initial]);
        }
        let prio: Vec<String> = self.names.iter().zip(&self.priority).map(|(n, p)| format!("{n}={p}")).collect();
        let _ = writeln!(out, "prio: {}", prio.join(" "));
        for q in 0..self.len() {
            for c in self.letters() {
                let letter = self.sig.letter_props(c).into_iter().collect::<Vec<_>>().join(" ");
                for p in &self.delta[q][c as usize] {
                    let body = if !p.fixed.is_empty() && p.fixed == p.repeat {
                        let items: Vec<&str> = p.fixed.iter().map(|&s| self.names[s].as_str()).collect();
                        format!("{{{}}}", items.join(" "))
                    } else {
                        let items: Vec<String> = p
                            .fixed
                            .iter()
                            .map(|&s| self.names[s].clone())
                            .chain(p.repeat.iter().map(|&s| format!("{}*", self.names[s])))
                            .collect();
                        format!("({})", items.join(" "))
                    };
                    let _ = writeln!(out, "{} , {{{}}} -> {}", self.names[q], letter, body);
                }
            }
        }
        out
    }
}
