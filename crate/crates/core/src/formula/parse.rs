use std::collections::BTreeSet;

use super::Formula;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Not,
    And,
    Or,
    Dia(u32),
    Box(u32),
    Dot,
    True,
    False,
    Mu,
    Nu,
    Prop(String),
    Var(String),
    ThetaInf,
    ThetaD(u32),
    Eof,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn err<T>(&self, pos: usize, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_whitespace() {
                self.pos += 1;
            } else if c == b'#' {
                while self.pos < self.src.len() && self.src[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).ok()?.parse().ok()
    }

    fn expect_byte(&mut self, b: u8, what: &str) -> Result<()> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&b) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(self.pos, format!("expected {what}"))
        }
    }

    fn tokens(mut self) -> Result<Vec<(usize, Tok)>> {
        let mut out = Vec::new();
        loop {
            self.skip_ws();
            let start = self.pos;
            if self.pos >= self.src.len() {
                out.push((start, Tok::Eof));
                return Ok(out);
            }
            let c = self.src[self.pos];
            let tok = match c {
                b'(' => {
                    self.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    self.pos += 1;
                    Tok::RParen
                }
                b'~' => {
                    self.pos += 1;
                    Tok::Not
                }
                b'&' => {
                    self.pos += 1;
                    Tok::And
                }
                b'|' => {
                    self.pos += 1;
                    Tok::Or
                }
                b'.' => {
                    self.pos += 1;
                    Tok::Dot
                }
                b'<' | b'[' => {
                    let close = if c == b'<' { b'>' } else { b']' };
                    self.pos += 1;
                    self.skip_ws();
                    let grade = if self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                        match self.number() {
                            Some(g) => Some(g),
                            None => return self.err(start, "grade out of range"),
                        }
                    } else {
                        None
                    };
                    self.expect_byte(close, if c == b'<' { "'>'" } else { "']'" })?;
                    if c == b'<' {
                        match grade {
                            Some(0) => return self.err(start, "diamond grade must be at least 1"),
                            Some(g) => Tok::Dia(g),
                            None => Tok::Dia(1),
                        }
                    } else {
                        Tok::Box(grade.unwrap_or(0))
                    }
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    while self.pos < self.src.len()
                        && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                    {
                        self.pos += 1;
                    }
                    let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
                    match word.as_str() {
                        "true" => Tok::True,
                        "false" => Tok::False,
                        "mu" => Tok::Mu,
                        "nu" => Tok::Nu,
                        "THETA_INF" => Tok::ThetaInf,
                        "THETA_D" => {
                            self.expect_byte(b'(', "'(' after THETA_D")?;
                            self.skip_ws();
                            let d = match self.number() {
                                Some(d) => d,
                                None => return self.err(self.pos, "expected a number"),
                            };
                            self.expect_byte(b')', "')'")?;
                            Tok::ThetaD(d)
                        }
                        _ if word.as_bytes()[0].is_ascii_uppercase() => Tok::Var(word),
                        _ if word.as_bytes()[0].is_ascii_lowercase() => Tok::Prop(word),
                        _ => return self.err(start, format!("unexpected identifier {word}")),
                    }
                }
                _ => return self.err(start, format!("unexpected character '{}'", c as char)),
            };
            out.push((start, tok));
        }
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    used_vars: BTreeSet<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if t != Tok::Eof {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn fresh(&mut self) -> String {
        let mut name = "X".to_string();
        let mut i = 0;
        while self.used_vars.contains(&name) {
            i += 1;
            name = format!("X{i}");
        }
        self.used_vars.insert(name.clone());
        name
    }

    fn binder_level(&mut self) -> Result<Formula> {
        match self.peek() {
            Tok::Mu | Tok::Nu => {
                let is_mu = self.bump() == Tok::Mu;
                let name = match self.bump() {
                    Tok::Var(x) => x,
                    _ => {
                        self.at -= 1;
                        return self.err("expected an uppercase fixpoint variable");
                    }
                };
                if self.bump() != Tok::Dot {
                    self.at -= 1;
                    return self.err("expected '.' after binder variable");
                }
                let body = self.binder_level()?;
                Ok(if is_mu { Formula::mu(name, body) } else { Formula::nu(name, body) })
            }
            _ => self.or_level(),
        }
    }

    fn or_level(&mut self) -> Result<Formula> {
        let mut left = self.and_level()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let right = self.and_level()?;
            left = Formula::or(left, right);
        }
        Ok(left)
    }

    fn and_level(&mut self) -> Result<Formula> {
        let mut left = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let right = self.unary()?;
            left = Formula::and(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                match self.unary()? {
                    Formula::Prop(p) => Ok(Formula::NegProp(p)),
                    f => Ok(Formula::not(f)),
                }
            }
            Tok::Dia(k) => {
                self.bump();
                Ok(Formula::dia_k(k, self.unary()?))
            }
            Tok::Box(k) => {
                self.bump();
                Ok(Formula::box_k(k, self.unary()?))
            }
            Tok::Mu | Tok::Nu => self.binder_level(),
            Tok::LParen => {
                self.bump();
                let f = self.binder_level()?;
                if *self.peek() != Tok::RParen {
                    return self.err("expected ')'");
                }
                self.bump();
                Ok(f)
            }
            Tok::True => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::False => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Prop(p) => {
                self.bump();
                Ok(Formula::Prop(p))
            }
            Tok::Var(x) => {
                self.bump();
                Ok(Formula::Var(x))
            }
            Tok::ThetaInf => {
                self.bump();
                let x = self.fresh();
                Ok(Formula::nu(x.clone(), Formula::dia(Formula::Var(x))))
            }
            Tok::ThetaD(d) => {
                self.bump();
                let x = self.fresh();
                Ok(Formula::nu(
                    x.clone(),
                    Formula::and(Formula::boxed(Formula::Var(x)), Formula::box_k(d, Formula::False)),
                ))
            }
            Tok::Eof => self.err("unexpected end of input"),
            t => self.err(format!("unexpected token {t:?}")),
        }
    }
}

/// Checks scoping: every variable bound, no binder shadows an enclosing
/// binder of the same name.
pub(crate) fn check_scopes(f: &Formula) -> Result<()> {
    fn go(f: &Formula, scope: &mut Vec<String>) -> Result<()> {
        match f {
            Formula::Var(x) => {
                if scope.contains(x) {
                    Ok(())
                } else {
                    Err(Error::UnboundVariable(x.clone()))
                }
            }
            Formula::Mu(x, b) | Formula::Nu(x, b) => {
                if scope.contains(x) {
                    return Err(Error::DuplicateBinder(x.clone()));
                }
                scope.push(x.clone());
                let r = go(b, scope);
                scope.pop();
                r
            }
            Formula::Not(b) | Formula::Diamond(_, b) | Formula::Square(_, b) => go(b, scope),
            Formula::And(a, b) | Formula::Or(a, b) => {
                go(a, scope)?;
                go(b, scope)
            }
            _ => Ok(()),
        }
    }
    go(f, &mut Vec::new())
}

/// Parses the ASCII formula grammar; named constants are expanded.
pub fn parse_formula(text: &str) -> Result<Formula> {
    let toks = Lexer { src: text.as_bytes(), pos: 0 }.tokens()?;
    let used_vars = toks
        .iter()
        .filter_map(|(_, t)| match t {
            Tok::Var(x) => Some(x.clone()),
            _ => None,
        })
        .collect();
    let mut p = Parser { toks, at: 0, used_vars };
    let f = p.binder_level()?;
    if *p.peek() != Tok::Eof {
        return p.err("trailing input");
    }
    check_scopes(&f)?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binder_extends_right() {
        let f = parse_formula("nu X. a & <>X").unwrap();
        assert_eq!(
            f,
            Formula::nu("X", Formula::and(Formula::prop("a"), Formula::dia(Formula::var("X"))))
        );
        let g = parse_formula("a & mu X. b | <>X").unwrap();
        assert_eq!(
            g,
            Formula::and(
                Formula::prop("a"),
                Formula::mu("X", Formula::or(Formula::prop("b"), Formula::dia(Formula::var("X"))))
            )
        );
    }

    #[test]
    fn precedence() {
        let f = parse_formula("a | b & ~c").unwrap();
        assert_eq!(
            f,
            Formula::or(Formula::prop("a"), Formula::and(Formula::prop("b"), Formula::NegProp("c".into())))
        );
        let g = parse_formula("<>a & []b").unwrap();
        assert_eq!(g, Formula::and(Formula::dia(Formula::prop("a")), Formula::boxed(Formula::prop("b"))));
    }

    #[test]
    fn named_constants() {
        assert_eq!(parse_formula("THETA_INF").unwrap(), Formula::theta_inf());
        assert_eq!(parse_formula("THETA_D(2)").unwrap(), Formula::theta_d(2));
        let f = parse_formula("mu X. <>X | THETA_INF").unwrap();
        assert!(matches!(f, Formula::Mu(_, _)));
    }

    #[test]
    fn grades() {
        assert_eq!(parse_formula("<2> a").unwrap(), Formula::dia_k(2, Formula::prop("a")));
        assert_eq!(parse_formula("[1]a").unwrap(), Formula::box_k(1, Formula::prop("a")));
        assert!(parse_formula("<0>a").is_err());
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_formula("a &"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_formula("a $ b"), Err(Error::Syntax { pos: 2, .. })));
        assert_eq!(parse_formula("<>X"), Err(Error::UnboundVariable("X".into())));
        assert_eq!(
            parse_formula("mu X. nu X. X"),
            Err(Error::DuplicateBinder("X".into()))
        );
        assert!(parse_formula("(mu X. <>X) & (nu X. []X)").is_ok());
    }

    #[test]
    fn comments_are_skipped() {
        let f = parse_formula("# left formula\n<>a # trailing\n").unwrap();
        assert_eq!(f, Formula::dia(Formula::prop("a")));
    }
}
