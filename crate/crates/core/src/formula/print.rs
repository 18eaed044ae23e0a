use super::Formula;

const TOP: u8 = 0;
const OR: u8 = 1;
const AND: u8 = 2;
const UNARY: u8 = 3;

pub(crate) fn render(f: &Formula) -> String {
    let mut out = String::new();
    write(f, TOP, &mut out);
    out
}

fn write(f: &Formula, ctx: u8, out: &mut String) {
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Prop(p) => out.push_str(p),
        Formula::NegProp(p) => {
            out.push('~');
            out.push_str(p);
        }
        Formula::Var(x) => out.push_str(x),
        Formula::Not(g) => {
            out.push('~');
            write(g, UNARY, out);
        }
        Formula::Diamond(k, g) => {
            if *k == 1 {
                out.push_str("<>");
            } else {
                out.push_str(&format!("<{k}>"));
            }
            write(g, UNARY, out);
        }
        Formula::Square(k, g) => {
            if *k == 0 {
                out.push_str("[]");
            } else {
                out.push_str(&format!("[{k}]"));
            }
            write(g, UNARY, out);
        }
        Formula::And(a, b) => paren(ctx > AND, out, |out| {
            write(a, AND, out);
            out.push_str(" & ");
            write(b, UNARY, out);
        }),
        Formula::Or(a, b) => paren(ctx > OR, out, |out| {
            write(a, OR, out);
            out.push_str(" | ");
            write(b, AND, out);
        }),
        Formula::Mu(x, g) | Formula::Nu(x, g) => paren(ctx > TOP, out, |out| {
            out.push_str(if matches!(f, Formula::Mu(..)) { "mu " } else { "nu " });
            out.push_str(x);
            out.push_str(". ");
            write(g, TOP, out);
        }),
    }
}

fn paren(needed: bool, out: &mut String, body: impl FnOnce(&mut String)) {
    if needed {
        out.push('(');
    }
    body(out);
    if needed {
        out.push(')');
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_formula;

    fn round(s: &str) -> String {
        parse_formula(s).unwrap().to_string()
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(round("nu X.(a & <>X)"), "nu X. a & <>X");
        assert_eq!(round("THETA_INF"), "nu X. <>X");
        assert_eq!(round("(a | b) & c"), "(a | b) & c");
        assert_eq!(round("a & (b & c)"), "a & (b & c)");
        assert_eq!(round("<>(nu X. <>X) & b"), "<>(nu X. <>X) & b");
        assert_eq!(round("<2>a | [1]~b"), "<2>a | [1]~b");
        assert_eq!(round("~<>a"), "~<>a");
        assert_eq!(round("<1>a & [0]b"), "<>a & []b");
    }
}
