use std::collections::BTreeSet;

use super::KripkeTree;
use crate::error::{Error, Result};

/// Parses `(node {a b} (node {}) ...)`; the tag word of each node is free.
pub fn parse_tree(text: &str) -> Result<KripkeTree> {
    let mut p = TreeParser { src: text.as_bytes(), pos: 0 };
    let tree = p.tree()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return p.err("trailing input after tree");
    }
    Ok(tree)
}

struct TreeParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl TreeParser<'_> {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Syntax { pos: self.pos, msg: msg.to_string() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() {
            match self.src[self.pos] {
                c if c.is_ascii_whitespace() => self.pos += 1,
                b'#' => {
                    while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn eat(&mut self, b: u8) -> bool {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        (self.pos > start).then(|| String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn tree(&mut self) -> Result<KripkeTree> {
        if !self.eat(b'(') {
            return self.err("expected '('");
        }
        if self.ident().is_none() {
            return self.err("expected node tag");
        }
        if !self.eat(b'{') {
            return self.err("expected '{'");
        }
        let mut label = BTreeSet::new();
        loop {
            if self.eat(b'}') {
                break;
            }
            match self.ident() {
                Some(p) if p.as_bytes()[0].is_ascii_lowercase() => {
                    label.insert(p);
                }
                _ => return self.err("expected lowercase proposition or '}'"),
            }
            self.eat(b',');
        }
        let mut kids = Vec::new();
        loop {
            if self.eat(b')') {
                break;
            }
            self.skip_ws();
            if self.src.get(self.pos) != Some(&b'(') {
                return self.err("expected child or ')'");
            }
            kids.push(self.tree()?);
        }
        Ok(KripkeTree::from_label_set(label, kids))
    }
}
