use std::collections::BTreeSet;

use super::Formula;
use crate::error::{Error, Result};

/// Negation normal form with binder variables renamed apart.
///
/// ¬◇≥g φ becomes □≥(g−1) ¬φ, ¬□≥g φ becomes ◇≥(g+1) ¬φ and ¬µX.φ becomes
/// νX.¬φ with X kept positive. Idempotent.
pub fn normalize(f: &Formula) -> Result<Formula> {
    check_scopes_relaxed(f)?;
    let nnf = to_nnf(f, false, &mut Vec::new())?;
    Ok(rename_apart(&nnf))
}

/// Like the parser's scope check, but tolerant of shadowing (renamed away).
fn check_scopes_relaxed(f: &Formula) -> Result<()> {
    fn go(f: &Formula, scope: &mut Vec<String>) -> Result<()> {
        match f {
            Formula::Var(x) if !scope.contains(x) => Err(Error::UnboundVariable(x.clone())),
            Formula::Mu(x, b) | Formula::Nu(x, b) => {
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

fn to_nnf(f: &Formula, neg: bool, scope: &mut Vec<(String, bool)>) -> Result<Formula> {
    Ok(match f {
        Formula::True => {
            if neg {
                Formula::False
            } else {
                Formula::True
            }
        }
        Formula::False => {
            if neg {
                Formula::True
            } else {
                Formula::False
            }
        }
        Formula::Prop(p) => Formula::lit(p.clone(), !neg),
        Formula::NegProp(p) => Formula::lit(p.clone(), neg),
        Formula::Not(g) => to_nnf(g, !neg, scope)?,
        Formula::And(a, b) => {
            let (a, b) = (to_nnf(a, neg, scope)?, to_nnf(b, neg, scope)?);
            if neg {
                Formula::or(a, b)
            } else {
                Formula::and(a, b)
            }
        }
        Formula::Or(a, b) => {
            let (a, b) = (to_nnf(a, neg, scope)?, to_nnf(b, neg, scope)?);
            if neg {
                Formula::and(a, b)
            } else {
                Formula::or(a, b)
            }
        }
        Formula::Diamond(k, g) => {
            let body = to_nnf(g, neg, scope)?;
            if neg {
                Formula::box_k(k.saturating_sub(1), body)
            } else {
                Formula::dia_k(*k, body)
            }
        }
        Formula::Square(k, g) => {
            let body = to_nnf(g, neg, scope)?;
            if neg {
                Formula::dia_k(k + 1, body)
            } else {
                Formula::box_k(*k, body)
            }
        }
        Formula::Var(x) => {
            let bound_neg = scope
                .iter()
                .rev()
                .find(|(y, _)| y == x)
                .map(|(_, n)| *n)
                .ok_or_else(|| Error::UnboundVariable(x.clone()))?;
            if bound_neg != neg {
                return Err(Error::NegativeOccurrence(x.clone()));
            }
            Formula::Var(x.clone())
        }
        Formula::Mu(x, g) | Formula::Nu(x, g) => {
            scope.push((x.clone(), neg));
            let body = to_nnf(g, neg, scope);
            scope.pop();
            let body = body?;
            let is_mu = matches!(f, Formula::Mu(..)) != neg;
            if is_mu {
                Formula::mu(x.clone(), body)
            } else {
                Formula::nu(x.clone(), body)
            }
        }
    })
}

fn rename_apart(f: &Formula) -> Formula {
    fn go(
        f: &Formula,
        used: &mut BTreeSet<String>,
        scope: &mut Vec<(String, String)>,
    ) -> Formula {
        match f {
            Formula::Var(x) => {
                let renamed = scope
                    .iter()
                    .rev()
                    .find(|(y, _)| y == x)
                    .map(|(_, z)| z.clone())
                    .unwrap_or_else(|| x.clone());
                Formula::Var(renamed)
            }
            Formula::Mu(x, b) | Formula::Nu(x, b) => {
                let mut name = x.clone();
                let mut i = 0;
                while used.contains(&name) {
                    i += 1;
                    name = format!("{x}{i}");
                }
                used.insert(name.clone());
                scope.push((x.clone(), name.clone()));
                let body = go(b, used, scope);
                scope.pop();
                if matches!(f, Formula::Mu(..)) {
                    Formula::mu(name, body)
                } else {
                    Formula::nu(name, body)
                }
            }
            Formula::Not(b) => Formula::not(go(b, used, scope)),
            Formula::Diamond(k, b) => Formula::dia_k(*k, go(b, used, scope)),
            Formula::Square(k, b) => Formula::box_k(*k, go(b, used, scope)),
            Formula::And(a, b) => Formula::and(go(a, used, scope), go(b, used, scope)),
            Formula::Or(a, b) => Formula::or(go(a, used, scope), go(b, used, scope)),
            other => other.clone(),
        }
    }
    go(f, &mut BTreeSet::new(), &mut Vec::new())
}
