//! Separating-context synthesis for pure lambda-terms: when two
//! head-converging terms disagree on a head-structure clause, an explicit
//! context makes the left converge and the right diverge. Every candidate
//! context is validated by running both filled terms before it is
//! reported; if no clause refutes within fuel the answer is `Unknown`.

use crate::kmodel::Model;
use crate::reduction::{head_converges, EngineError, Result};
use crate::syntax::{omega, subst_term, Context, Expr, Term, HOLE_NAME};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SepOutcome {
    /// A context `C` with `C[M]` converging and `C[N]` exhausting fuel.
    Separated(Context),
    Unknown,
}

struct HeadForm {
    binders: Vec<String>,
    head: String,
    args: Vec<Term>,
}

fn decompose_hnf(t: &Term) -> Option<HeadForm> {
    let mut binders = Vec::new();
    let mut cur = t;
    while let Term::Lam(x, b) = cur {
        binders.push(x.clone());
        cur = b;
    }
    let mut args = Vec::new();
    while let Term::App(f, a) = cur {
        args.push((**a).clone());
        cur = f;
    }
    args.reverse();
    match cur {
        Term::Var(x) => Some(HeadForm { binders, head: x.clone(), args }),
        _ => None,
    }
}

/// Renames the leading binders to `c1..cn` so both head forms speak about
/// the same variable names.
fn align(form: &HeadForm) -> HeadForm {
    let mut head = form.head.clone();
    let mut args = form.args.clone();
    let mut binders = Vec::new();
    for (i, b) in form.binders.iter().enumerate() {
        let fresh = format!("c{}", i + 1);
        if head == *b {
            head = fresh.clone();
        }
        args = args
            .iter()
            .map(|a| subst_term(a, b, &Term::var(fresh.clone())))
            .collect();
        binders.push(fresh);
    }
    HeadForm { binders, head, args }
}

fn hole() -> Term {
    Term::var(HOLE_NAME)
}

fn var(n: &str) -> Term {
    Term::var(n)
}

/// `\z1…zk. body`
fn lams(k: usize, name: &str, body: Term) -> Term {
    let mut t = body;
    for i in (1..=k).rev() {
        t = Term::lam(format!("{name}{i}"), t);
    }
    t
}

fn cvar(i: usize) -> Term {
    var(&format!("c{i}"))
}

/// Applies `f` to `c1 … cn`, skipping index `skip` (0 for none) and
/// substituting `repl` there.
fn apply_cvars(f: Term, n: usize, skip: usize, repl: Option<Term>) -> Term {
    let mut t = f;
    for i in 1..=n {
        if i == skip {
            if let Some(r) = repl.clone() {
                t = Term::app(t, r);
            }
        } else {
            t = Term::app(t, cvar(i));
        }
    }
    t
}

struct Separator<'m> {
    model: &'m Model,
    max_states: usize,
}

impl<'m> Separator<'m> {
    fn converges(&self, t: &Term, fuel: usize) -> Result<bool> {
        Ok(head_converges(self.model, &Expr::Term(t.clone()), fuel, self.max_states)?.converged())
    }

    /// Checks a candidate by running both sides.
    fn validated(&self, c: Term, m: &Term, n: &Term, fuel: usize) -> Result<Option<Context>> {
        let ctx = Context(c);
        let cm = ctx.fill(m);
        let cn = ctx.fill(n);
        if self.converges(&cm, fuel)? && !self.converges(&cn, fuel)? {
            Ok(Some(ctx))
        } else {
            Ok(None)
        }
    }

    fn separate(&self, m: &Term, n: &Term, fuel: usize) -> Result<SepOutcome> {
        if fuel == 0 {
            return Ok(SepOutcome::Unknown);
        }
        let m_conv = self.converges(m, fuel)?;
        let n_conv = self.converges(n, fuel)?;
        if !m_conv {
            // a diverging left side is below everything
            return Ok(SepOutcome::Unknown);
        }
        if !n_conv {
            // the hole itself separates
            return Ok(SepOutcome::Separated(Context::hole()));
        }
        let m_tr = head_converges(self.model, &Expr::Term(m.clone()), fuel, self.max_states)?;
        let n_tr = head_converges(self.model, &Expr::Term(n.clone()), fuel, self.max_states)?;
        let (Expr::Term(m_hnf), Expr::Term(n_hnf)) = (m_tr.last_expr(), n_tr.last_expr()) else {
            return Ok(SepOutcome::Unknown);
        };
        let (Some(mf), Some(nf)) = (decompose_hnf(m_hnf), decompose_hnf(n_hnf)) else {
            return Ok(SepOutcome::Unknown);
        };
        let mf = align(&mf);
        let nf = align(&nf);
        let (n_m, k_m) = (mf.binders.len(), mf.args.len());
        let (n_n, k_n) = (nf.binders.len(), nf.args.len());
        let y_bound = nf.binders.contains(&nf.head);
        let j = nf.binders.iter().position(|b| *b == nf.head).map(|p| p + 1);
        let total = n_n.max(n_m) + k_m.max(k_n);

        // heads differ
        if mf.head != nf.head {
            let candidates = match j {
                None => vec![
                    Term::app(Term::lam(nf.head.clone(), hole()), omega()),
                    Term::app(
                        Term::lam(nf.head.clone(), apply_cvars(hole(), total, 0, None)),
                        omega(),
                    ),
                ],
                Some(j) => vec![
                    apply_cvars(hole(), j, j, Some(omega())),
                    apply_cvars(hole(), total, j, Some(omega())),
                ],
            };
            for c in candidates {
                if let Some(ctx) = self.validated(c, m, n, fuel)? {
                    return Ok(SepOutcome::Separated(ctx));
                }
            }
            return Ok(SepOutcome::Unknown);
        }

        // same head, different binder/argument balance
        if n_m as i64 - k_m as i64 != n_n as i64 - k_n as i64 {
            let swallow = lams(k_m + k_n, "z", Term::lam("u", var("u")));
            let candidates = match (y_bound, j) {
                (false, _) => vec![Term::apps(
                    Term::lam(mf.head.clone(), apply_cvars(hole(), n_n + k_m, 0, None)),
                    [swallow.clone(), omega()],
                )],
                (true, Some(j)) => vec![Term::app(
                    apply_cvars(hole(), n_n + k_m, j, Some(swallow)),
                    omega(),
                )],
                _ => vec![],
            };
            for c in candidates {
                if let Some(ctx) = self.validated(c, m, n, fuel)? {
                    return Ok(SepOutcome::Separated(ctx));
                }
            }
            return Ok(SepOutcome::Unknown);
        }

        // argument-wise disagreement, eta-padded on either side: feed both
        // sides the same variables until the argument lists line up, project
        // the disagreeing position out, and wrap the inner context around
        // the whole projection so its binders can capture
        let n_max = n_m.max(n_n);
        let w = k_m + n_max - n_m;
        let args_at = |form: &HeadForm, i: usize| -> Term {
            if i <= form.args.len() {
                form.args[i - 1].clone()
            } else {
                cvar(form.binders.len() + (i - form.args.len()))
            }
        };
        for i in 1..=w {
            let left = args_at(&mf, i);
            let right = args_at(&nf, i);
            if let SepOutcome::Separated(inner) = self.separate(&left, &right, fuel - 1)? {
                let selector = lams(w, "z", var(&format!("z{i}")));
                let project = match j {
                    None => Term::app(
                        Term::lam(mf.head.clone(), apply_cvars(hole(), n_max, 0, None)),
                        selector,
                    ),
                    Some(j) => apply_cvars(hole(), n_max.max(j), j, Some(selector)),
                };
                let composed = inner.fill(&project);
                if let Some(ctx) = self.validated(composed, m, n, fuel)? {
                    return Ok(SepOutcome::Separated(ctx));
                }
            }
        }
        Ok(SepOutcome::Unknown)
    }
}

/// Searches the head structure of two converging terms for a clause that
/// separates them observationally.
pub fn separating_context(
    model: &Model,
    m: &Term,
    n: &Term,
    fuel: usize,
    max_states: usize,
) -> Result<SepOutcome> {
    let sep = Separator { model, max_states };
    if !sep.converges(m, fuel)? || !sep.converges(n, fuel)? {
        return Err(EngineError::Model(crate::kmodel::ModelError::Builtin(
            "separating_context needs both inputs to head-converge within fuel".into(),
        )));
    }
    sep.separate(m, n, fuel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmodel::BuiltinModel;
    use crate::syntax::{identity, parse_term};

    fn norm() -> Model {
        Model::builtin(&BuiltinModel::Norm).unwrap()
    }

    fn run(m: &str, n: &str, fuel: usize) -> SepOutcome {
        let model = norm();
        let mt = parse_term(m, &model).unwrap();
        let nt = parse_term(n, &model).unwrap();
        separating_context(&model, &mt, &nt, fuel, 100_000).unwrap()
    }

    #[test]
    fn equal_terms_are_unknown() {
        assert_eq!(run(r"\x. x", r"\y. y", 50), SepOutcome::Unknown);
        assert_eq!(run("I", "church(1)", 50), SepOutcome::Unknown);
    }

    #[test]
    fn different_free_heads_separate() {
        match run(r"\x. y", r"\x. z", 50) {
            SepOutcome::Separated(c) => {
                let shown = c.to_string();
                assert!(shown.contains("[.]"), "{shown}");
            }
            SepOutcome::Unknown => panic!("heads differ, must separate"),
        }
    }

    #[test]
    fn bound_vs_free_head_separates() {
        assert!(matches!(run(r"\x. x", r"\x. y", 50), SepOutcome::Separated(_)));
        assert!(matches!(run(r"\x. y", r"\x. x", 50), SepOutcome::Separated(_)));
    }

    #[test]
    fn eta_mismatch_is_not_separated() {
        // eta-equivalent pairs satisfy every clause
        assert_eq!(run(r"\x. \y. x y", r"\x. x", 50), SepOutcome::Unknown);
    }

    #[test]
    fn argument_counts_separate() {
        assert!(matches!(run(r"\x. x x", r"\x. x", 50), SepOutcome::Separated(_)));
    }

    #[test]
    fn nested_arguments_recurse() {
        // x (\u. y) vs x (\u. z): clause three recursion on the arguments
        match run(r"x (\u. y)", r"x (\u. z)", 50) {
            SepOutcome::Separated(_) => {}
            SepOutcome::Unknown => panic!("inner heads differ, must separate"),
        }
    }

    #[test]
    fn diverging_inputs_are_rejected() {
        let model = norm();
        let m = identity();
        let n = crate::syntax::omega();
        assert!(separating_context(&model, &m, &n, 50, 100_000).is_err());
    }
}
