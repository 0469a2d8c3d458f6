//! Pretty printer for the concrete grammar. Printing a parsed expression
//! yields its canonical form; parsing the output gives the expression back.

use super::{Term, Test};

#[derive(Clone, Copy, PartialEq)]
enum TermPos {
    Top,
    AppFn,
    AppArg,
}

pub fn term_to_string(t: &Term) -> String {
    let mut s = String::new();
    write_term(&mut s, t, TermPos::Top);
    s
}

pub fn test_to_string(q: &Test) -> String {
    let mut s = String::new();
    write_test(&mut s, q, false);
    s
}

fn write_term(out: &mut String, t: &Term, pos: TermPos) {
    match t {
        Term::Var(x) => out.push_str(x),
        Term::Jg(g, n) => {
            out.push_str("Jg[");
            out.push_str(&g.to_string());
            out.push_str("](");
            out.push_str(&n.to_string());
            out.push(')');
        }
        Term::Lam(_, _) => {
            let parens = pos != TermPos::Top;
            if parens {
                out.push('(');
            }
            let mut binders = Vec::new();
            let mut cur = t;
            while let Term::Lam(x, b) = cur {
                binders.push(x.as_str());
                cur = b;
            }
            out.push('\\');
            out.push_str(&binders.join(" "));
            out.push_str(". ");
            write_term(out, cur, TermPos::Top);
            if parens {
                out.push(')');
            }
        }
        Term::App(f, a) => {
            let parens = pos == TermPos::AppArg;
            if parens {
                out.push('(');
            }
            write_term(out, f, TermPos::AppFn);
            out.push(' ');
            write_term(out, a, TermPos::AppArg);
            if parens {
                out.push(')');
            }
        }
        Term::TauBarSum(summands) => {
            if summands.is_empty() {
                out.push('0');
                return;
            }
            if summands.iter().all(|(_, q)| q.is_eps()) {
                out.push_str("eb<{");
                for (i, (e, _)) in summands.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push_str(&e.to_string());
                }
                out.push_str("}>");
                return;
            }
            let parens = summands.len() > 1 && pos != TermPos::Top;
            if parens {
                out.push('(');
            }
            for (i, (e, q)) in summands.iter().enumerate() {
                if i > 0 {
                    out.push_str(" + ");
                }
                if q.is_eps() {
                    out.push_str("eb<{");
                    out.push_str(&e.to_string());
                    out.push_str("}>");
                } else {
                    out.push_str("tb<");
                    out.push_str(&e.to_string());
                    out.push_str(">(");
                    write_test(out, q, false);
                    out.push(')');
                }
            }
            if parens {
                out.push(')');
            }
        }
    }
}

fn write_test(out: &mut String, q: &Test, product_child: bool) {
    match q {
        Test::Sum(children) => {
            if children.is_empty() {
                out.push('0');
                return;
            }
            if product_child {
                out.push('(');
            }
            for (i, c) in children.iter().enumerate() {
                if i > 0 {
                    out.push_str(" + ");
                }
                write_test(out, c, false);
            }
            if product_child {
                out.push(')');
            }
        }
        Test::Prod(children) => {
            if children.is_empty() {
                out.push_str("eps");
                return;
            }
            for (i, c) in children.iter().enumerate() {
                if i > 0 {
                    out.push_str(" * ");
                }
                write_test(out, c, true);
            }
        }
        Test::Tau(e, m) => {
            out.push_str("tau<");
            out.push_str(&e.to_string());
            out.push_str(">(");
            write_term(out, m, TermPos::Top);
            out.push(')');
        }
    }
}
