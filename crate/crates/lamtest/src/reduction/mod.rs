//! Small-step engine: redex enumeration for the full reduction, head
//! reduction as a branching relation, may-head-normal-form recognition, and
//! bounded breadth-first convergence search.
//!
//! Head reduction here is a relation, not a strategy: sums let several
//! summands step, so convergence is explored breadth-first up to a fuel
//! bound and `Exhausted` only ever means "no may-head-normal form within
//! fuel", never "diverges".

mod gen;
mod parallel;

pub use gen::{random_term, GenConfig, GenKind};
pub use parallel::{full_parallel_reduct, par_reduces, parallel_reducts};

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::kmodel::{Model, ModelError};
use crate::syntax::{
    alpha_key, build_g, canon_expr, eps_bar, subst_term, Expr, ExprKey, Term, Test,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("search cap of {0} states exceeded")]
    StateCap(usize),
    #[error("no `{rule}` redex at position {pos}")]
    BadStep { rule: RuleName, pos: Path },
}

pub type Result<T> = std::result::Result<T, EngineError>;

/// The effective rewriting rules. Contextual closure is recorded through
/// the position a rule fires at, not as separate rule names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleName {
    Beta,
    TauBar,
    Tau,
    TauTauBar,
    ProdSum,
    TauBarSumDist,
    DeltaJg,
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleName::Beta => "beta",
            RuleName::TauBar => "tbar",
            RuleName::Tau => "tau",
            RuleName::TauTauBar => "tautbar",
            RuleName::ProdSum => "prod-sum",
            RuleName::TauBarSumDist => "tbar-sum",
            RuleName::DeltaJg => "delta-Jg",
        })
    }
}

impl std::str::FromStr for RuleName {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "beta" => RuleName::Beta,
            "tbar" => RuleName::TauBar,
            "tau" => RuleName::Tau,
            "tautbar" => RuleName::TauTauBar,
            "prod-sum" => RuleName::ProdSum,
            "tbar-sum" => RuleName::TauBarSumDist,
            "delta-Jg" => RuleName::DeltaJg,
            _ => return Err(format!("unknown rule `{s}`")),
        })
    }
}

/// A path into the canonical tree. Children are numbered: lambda body 0;
/// application function 0, argument 1; tau body 0; the i-th summand's test
/// of a tau-bar sum, and the i-th child of a sum or product, are i.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Path(pub Vec<usize>);

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        for (i, seg) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{seg}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub rule: RuleName,
    pub pos: Path,
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Converged { steps: usize },
    Exhausted { fuel: usize },
}

/// A reduction sequence: each step names the rule, the position it fired
/// at, and the resulting expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub start: Expr,
    pub steps: Vec<Step>,
    pub verdict: Verdict,
}

impl Trace {
    pub fn converged(&self) -> bool {
        matches!(self.verdict, Verdict::Converged { .. })
    }

    pub fn rules(&self) -> Vec<RuleName> {
        self.steps.iter().map(|s| s.rule).collect()
    }

    pub fn last_expr(&self) -> &Expr {
        self.steps.last().map(|s| &s.expr).unwrap_or(&self.start)
    }

    /// One line per step, then the verdict line.
    pub fn render(&self, tsv: bool) -> String {
        let mut out = String::new();
        for (i, s) in self.steps.iter().enumerate() {
            if tsv {
                out.push_str(&format!("step\t{}\t{}\t{}\t{}\n", i + 1, s.rule, s.pos, s.expr));
            } else {
                out.push_str(&format!("{:<4} {}@{}  {}\n", i + 1, s.rule, s.pos, s.expr));
            }
        }
        match &self.verdict {
            Verdict::Converged { steps } => {
                if tsv {
                    out.push_str(&format!("verdict\tconverged\t{steps}\n"));
                } else {
                    out.push_str(&format!("VERDICT converged({steps})\n"));
                }
            }
            Verdict::Exhausted { fuel } => {
                if tsv {
                    out.push_str(&format!("verdict\texhausted\t{fuel}\n"));
                } else {
                    out.push_str(&format!("VERDICT exhausted({fuel})\n"));
                }
            }
        }
        out
    }
}

fn is_application_like(t: &Term) -> bool {
    matches!(t, Term::App(_, _) | Term::Jg(_, _))
}

// ---------------------------------------------------------------------------
// redexes and single steps

/// Every position where a rule fires under the free contextual closure.
pub fn redexes(model: &Model, e: &Expr) -> Result<Vec<(Path, RuleName)>> {
    let mut out = Vec::new();
    match e {
        Expr::Term(t) => redexes_term(model, t, &mut Vec::new(), &mut out)?,
        Expr::Test(q) => redexes_test(model, q, &mut Vec::new(), &mut out)?,
    }
    out.sort();
    Ok(out)
}

fn local_rules_term(t: &Term) -> Vec<RuleName> {
    match t {
        Term::App(f, _) => match **f {
            Term::Lam(_, _) => vec![RuleName::Beta],
            Term::TauBarSum(_) => vec![RuleName::TauBar],
            _ => vec![],
        },
        Term::Jg(_, _) => vec![RuleName::DeltaJg],
        _ => vec![],
    }
}

fn local_rules_test(q: &Test) -> Vec<RuleName> {
    match q {
        Test::Tau(_, m) => match **m {
            Term::Lam(_, _) => vec![RuleName::Tau],
            Term::TauBarSum(_) => vec![RuleName::TauTauBar],
            _ => vec![],
        },
        Test::Prod(cs) if cs.iter().any(|c| matches!(c, Test::Sum(_))) => {
            vec![RuleName::ProdSum]
        }
        _ => vec![],
    }
}

fn redexes_term(
    model: &Model,
    t: &Term,
    path: &mut Vec<usize>,
    out: &mut Vec<(Path, RuleName)>,
) -> Result<()> {
    for r in local_rules_term(t) {
        out.push((Path(path.clone()), r));
    }
    match t {
        Term::Var(_) | Term::Jg(_, _) => {}
        Term::Lam(_, b) => {
            path.push(0);
            redexes_term(model, b, path, out)?;
            path.pop();
        }
        Term::App(f, a) => {
            path.push(0);
            redexes_term(model, f, path, out)?;
            path.pop();
            path.push(1);
            redexes_term(model, a, path, out)?;
            path.pop();
        }
        Term::TauBarSum(s) => {
            for (i, (_, q)) in s.iter().enumerate() {
                if matches!(q, Test::Sum(_)) {
                    let mut p = path.clone();
                    p.push(i);
                    out.push((Path(p), RuleName::TauBarSumDist));
                }
                path.push(i);
                redexes_test(model, q, path, out)?;
                path.pop();
            }
        }
    }
    Ok(())
}

fn redexes_test(
    model: &Model,
    q: &Test,
    path: &mut Vec<usize>,
    out: &mut Vec<(Path, RuleName)>,
) -> Result<()> {
    for r in local_rules_test(q) {
        out.push((Path(path.clone()), r));
    }
    match q {
        Test::Tau(_, m) => {
            path.push(0);
            redexes_term(model, m, path, out)?;
            path.pop();
        }
        Test::Sum(cs) | Test::Prod(cs) => {
            for (i, c) in cs.iter().enumerate() {
                path.push(i);
                redexes_test(model, c, path, out)?;
                path.pop();
            }
        }
    }
    Ok(())
}

/// Applies `rule` at `pos`; the contractum is canonicalized.
pub fn step(model: &Model, e: &Expr, pos: &Path, rule: RuleName) -> Result<Expr> {
    let out = match e {
        Expr::Term(t) => Expr::Term(step_term(model, t, &pos.0, rule, pos)?),
        Expr::Test(q) => Expr::Test(step_test(model, q, &pos.0, rule, pos)?),
    };
    Ok(canon_expr(&out))
}

fn bad(rule: RuleName, pos: &Path) -> EngineError {
    EngineError::BadStep { rule, pos: pos.clone() }
}

fn step_term(model: &Model, t: &Term, rest: &[usize], rule: RuleName, full: &Path) -> Result<Term> {
    if let Some((&i, tail)) = rest.split_first() {
        // tbar-sum fires at the summand's test position of its tau-bar node
        if tail.is_empty() && rule == RuleName::TauBarSumDist {
            if let Term::TauBarSum(s) = t {
                let (point, q) = s.get(i).ok_or_else(|| bad(rule, full))?;
                if let Test::Sum(children) = q {
                    let mut out = s.clone();
                    out.remove(i);
                    for c in children {
                        out.push((point.clone(), c.clone()));
                    }
                    return Ok(Term::TauBarSum(out));
                }
                return Err(bad(rule, full));
            }
        }
        return match t {
            Term::Lam(x, b) if i == 0 => Ok(Term::Lam(
                x.clone(),
                Box::new(step_term(model, b, tail, rule, full)?),
            )),
            Term::App(f, a) if i == 0 => Ok(Term::App(
                Box::new(step_term(model, f, tail, rule, full)?),
                a.clone(),
            )),
            Term::App(f, a) if i == 1 => Ok(Term::App(
                f.clone(),
                Box::new(step_term(model, a, tail, rule, full)?),
            )),
            Term::TauBarSum(s) if i < s.len() => {
                let mut out = s.clone();
                out[i].1 = step_test(model, &s[i].1, tail, rule, full)?;
                Ok(Term::TauBarSum(out))
            }
            _ => Err(bad(rule, full)),
        };
    }
    match (rule, t) {
        (RuleName::Beta, Term::App(f, a)) => match &**f {
            Term::Lam(x, b) => Ok(subst_term(b, x, a)),
            _ => Err(bad(rule, full)),
        },
        (RuleName::TauBar, Term::App(f, a)) => match &**f {
            Term::TauBarSum(s) => {
                let mut out = Vec::with_capacity(s.len());
                for (point, q) in s {
                    let (head, tail_pt) = model.unfold1(point)?;
                    let mut factors = vec![q.clone()];
                    for g in head.iter() {
                        factors.push(Test::tau(g.clone(), (**a).clone()));
                    }
                    out.push((tail_pt, Test::Prod(factors)));
                }
                Ok(Term::TauBarSum(out))
            }
            _ => Err(bad(rule, full)),
        },
        (RuleName::DeltaJg, Term::Jg(g, n)) => Ok(Term::app(build_g(g, *n), Term::Jg(g.clone(), n + 1))),
        _ => Err(bad(rule, full)),
    }
}

fn step_test(model: &Model, q: &Test, rest: &[usize], rule: RuleName, full: &Path) -> Result<Test> {
    if let Some((&i, tail)) = rest.split_first() {
        return match q {
            Test::Tau(e, m) if i == 0 => Ok(Test::Tau(
                e.clone(),
                Box::new(step_term(model, m, tail, rule, full)?),
            )),
            Test::Sum(cs) if i < cs.len() => {
                let mut out = cs.clone();
                out[i] = step_test(model, &cs[i], tail, rule, full)?;
                Ok(Test::Sum(out))
            }
            Test::Prod(cs) if i < cs.len() => {
                let mut out = cs.clone();
                out[i] = step_test(model, &cs[i], tail, rule, full)?;
                Ok(Test::Prod(out))
            }
            _ => Err(bad(rule, full)),
        };
    }
    match (rule, q) {
        (RuleName::Tau, Test::Tau(point, m)) => match &**m {
            Term::Lam(x, b) => {
                let (head, tail_pt) = model.unfold1(point)?;
                Ok(Test::Tau(
                    tail_pt,
                    Box::new(subst_term(b, x, &eps_bar(&head))),
                ))
            }
            _ => Err(bad(rule, full)),
        },
        (RuleName::TauTauBar, Test::Tau(point, m)) => match &**m {
            Term::TauBarSum(s) => {
                let mut kept = Vec::new();
                for (beta, body) in s {
                    if model.leq(point, beta)? {
                        kept.push(body.clone());
                    }
                }
                Ok(Test::Sum(kept))
            }
            _ => Err(bad(rule, full)),
        },
        (RuleName::ProdSum, Test::Prod(cs)) => {
            if !cs.iter().any(|c| matches!(c, Test::Sum(_))) {
                return Err(bad(rule, full));
            }
            let mut tuples: Vec<Vec<Test>> = vec![Vec::new()];
            for c in cs {
                let parts = c.sum_parts();
                let mut next = Vec::with_capacity(tuples.len() * parts.len().max(1));
                for tuple in &tuples {
                    for p in &parts {
                        let mut t2 = tuple.clone();
                        t2.push(p.clone());
                        next.push(t2);
                    }
                }
                tuples = next;
            }
            Ok(Test::Sum(tuples.into_iter().map(Test::Prod).collect()))
        }
        _ => Err(bad(rule, full)),
    }
}

// ---------------------------------------------------------------------------
// head reduction

/// Head redexes under the head-contextual rules. Inside an application or
/// a tau operator, only application-shaped subjects keep reducing; summands
/// of a sum may all step; products step in non-sum factors or distribute.
pub fn head_redexes(model: &Model, e: &Expr) -> Result<Vec<(Path, RuleName)>> {
    let mut out = Vec::new();
    match e {
        Expr::Term(t) => head_redexes_term(model, t, &mut Vec::new(), &mut out)?,
        Expr::Test(q) => head_redexes_test(model, q, &mut Vec::new(), &mut out)?,
    }
    Ok(out)
}

fn head_redexes_term(
    model: &Model,
    t: &Term,
    path: &mut Vec<usize>,
    out: &mut Vec<(Path, RuleName)>,
) -> Result<()> {
    match t {
        Term::Var(_) => {}
        Term::Jg(_, _) => out.push((Path(path.clone()), RuleName::DeltaJg)),
        Term::Lam(_, b) => {
            path.push(0);
            head_redexes_term(model, b, path, out)?;
            path.pop();
        }
        Term::App(f, _) => match &**f {
            Term::Lam(_, _) => out.push((Path(path.clone()), RuleName::Beta)),
            Term::TauBarSum(_) => out.push((Path(path.clone()), RuleName::TauBar)),
            _ if is_application_like(f) => {
                path.push(0);
                head_redexes_term(model, f, path, out)?;
                path.pop();
            }
            _ => {}
        },
        Term::TauBarSum(s) => {
            for (i, (_, q)) in s.iter().enumerate() {
                if matches!(q, Test::Sum(_)) {
                    let mut p = path.clone();
                    p.push(i);
                    out.push((Path(p), RuleName::TauBarSumDist));
                } else {
                    path.push(i);
                    head_redexes_test(model, q, path, out)?;
                    path.pop();
                }
            }
        }
    }
    Ok(())
}

fn head_redexes_test(
    model: &Model,
    q: &Test,
    path: &mut Vec<usize>,
    out: &mut Vec<(Path, RuleName)>,
) -> Result<()> {
    match q {
        Test::Tau(_, m) => match &**m {
            Term::Lam(_, _) => out.push((Path(path.clone()), RuleName::Tau)),
            Term::TauBarSum(_) => out.push((Path(path.clone()), RuleName::TauTauBar)),
            _ if is_application_like(m) => {
                path.push(0);
                head_redexes_term(model, m, path, out)?;
                path.pop();
            }
            _ => {}
        },
        Test::Sum(cs) => {
            for (i, c) in cs.iter().enumerate() {
                path.push(i);
                head_redexes_test(model, c, path, out)?;
                path.pop();
            }
        }
        Test::Prod(cs) => {
            if cs.iter().any(|c| matches!(c, Test::Sum(_))) {
                out.push((Path(path.clone()), RuleName::ProdSum));
            }
            for (i, c) in cs.iter().enumerate() {
                if !matches!(c, Test::Sum(_)) {
                    path.push(i);
                    head_redexes_test(model, c, path, out)?;
                    path.pop();
                }
            }
        }
    }
    Ok(())
}

/// All one-step head successors, sorted by (rule, position).
pub fn head_successors(model: &Model, e: &Expr) -> Result<Vec<(RuleName, Expr)>> {
    Ok(head_successors_full(model, e)?
        .into_iter()
        .map(|(r, _, e)| (r, e))
        .collect())
}

pub fn head_successors_full(model: &Model, e: &Expr) -> Result<Vec<(RuleName, Path, Expr)>> {
    let mut rxs = head_redexes(model, e)?;
    rxs.sort_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0)));
    let mut out = Vec::with_capacity(rxs.len());
    for (pos, rule) in rxs {
        let next = step(model, e, &pos, rule)?;
        out.push((rule, pos, next));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// may-head-normal forms

fn spine_head_is_var(mut t: &Term) -> bool {
    while let Term::App(f, _) = t {
        t = f;
    }
    matches!(t, Term::Var(_))
}

/// A product of tau tests over variable-headed spines; the unit product
/// qualifies, a sum never does.
fn is_hnf_summand(q: &Test) -> bool {
    match q {
        Test::Prod(cs) => cs.iter().all(is_tau_over_var_spine),
        Test::Tau(_, _) => is_tau_over_var_spine(q),
        Test::Sum(_) => false,
    }
}

fn is_tau_over_var_spine(q: &Test) -> bool {
    matches!(q, Test::Tau(_, m) if spine_head_is_var(m))
}

fn strip_lams(mut t: &Term) -> &Term {
    while let Term::Lam(_, b) = t {
        t = b;
    }
    t
}

pub fn is_hnf(e: &Expr) -> bool {
    match e {
        Expr::Term(t) => match strip_lams(t) {
            body if spine_head_is_var(body) => true,
            Term::TauBarSum(s) => !s.is_empty() && s.iter().all(|(_, q)| is_hnf_summand(q)),
            _ => false,
        },
        Expr::Test(q) => {
            let parts = q.sum_parts();
            !parts.is_empty() && parts.iter().all(is_hnf_summand)
        }
    }
}

/// May-head-normal form: a head-normal form, or a sum with at least one
/// head-normal summand.
pub fn is_mhnf(e: &Expr) -> bool {
    match e {
        Expr::Term(t) => match strip_lams(t) {
            body if spine_head_is_var(body) => true,
            Term::TauBarSum(s) => s.iter().any(|(_, q)| is_hnf_summand(q)),
            _ => false,
        },
        Expr::Test(q) => q.sum_parts().iter().any(is_hnf_summand),
    }
}

// ---------------------------------------------------------------------------
// bounded convergence search

pub const DEFAULT_MAX_STATES: usize = 200_000;

/// The fuel-bounded breadth-first search for a may-head-normal form.
/// `Converged` carries a shortest witnessing trace (ties broken by rule
/// then position). `Exhausted` carries a deterministic sample path for
/// inspection; it never claims divergence.
pub fn head_converges(model: &Model, start: &Expr, fuel: usize, max_states: usize) -> Result<Trace> {
    bfs_converges(model, start, fuel, max_states, head_successors_full)
}

/// Same search over the full reduction relation.
pub fn full_converges(model: &Model, start: &Expr, fuel: usize, max_states: usize) -> Result<Trace> {
    bfs_converges(model, start, fuel, max_states, |m, e| {
        let rxs = redexes(m, e)?;
        let mut out = Vec::with_capacity(rxs.len());
        for (pos, rule) in rxs {
            out.push((rule, pos.clone(), step(m, e, &pos, rule)?));
        }
        out.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
        Ok(out)
    })
}

fn bfs_converges(
    model: &Model,
    start: &Expr,
    fuel: usize,
    max_states: usize,
    succ: impl Fn(&Model, &Expr) -> Result<Vec<(RuleName, Path, Expr)>>,
) -> Result<Trace> {
    let start = canon_expr(start);
    if is_mhnf(&start) {
        return Ok(Trace {
            start,
            steps: Vec::new(),
            verdict: Verdict::Converged { steps: 0 },
        });
    }
    let mut states: Vec<Expr> = vec![start.clone()];
    let mut seen: HashMap<ExprKey, usize> = HashMap::new();
    seen.insert(alpha_key(&start), 0);
    let mut parent: Vec<Option<(usize, RuleName, Path)>> = vec![None];
    let mut depth: Vec<usize> = vec![0];
    let mut at = 0;
    while at < states.len() {
        let id = at;
        at += 1;
        if depth[id] >= fuel {
            continue;
        }
        let here = states[id].clone();
        for (rule, pos, next) in succ(model, &here)? {
            let key = alpha_key(&next);
            if seen.contains_key(&key) {
                continue;
            }
            let nid = states.len();
            if nid > max_states {
                return Err(EngineError::StateCap(max_states));
            }
            seen.insert(key, nid);
            states.push(next.clone());
            parent.push(Some((id, rule, pos)));
            depth.push(depth[id] + 1);
            if is_mhnf(&next) {
                let mut rev = Vec::new();
                let mut cur = nid;
                while let Some((p, rule, pos)) = parent[cur].clone() {
                    rev.push(Step { rule, pos, expr: states[cur].clone() });
                    cur = p;
                }
                rev.reverse();
                let n = rev.len();
                return Ok(Trace {
                    start,
                    steps: rev,
                    verdict: Verdict::Converged { steps: n },
                });
            }
        }
    }
    // no mhnf within fuel: keep a deterministic first-successor sample path
    let mut steps = Vec::new();
    let mut cur = start.clone();
    let mut seen_path: HashMap<ExprKey, ()> = HashMap::new();
    seen_path.insert(alpha_key(&cur), ());
    for _ in 0..fuel.min(200) {
        let succs = succ(model, &cur)?;
        let Some((rule, pos, next)) = succs.into_iter().next() else {
            break;
        };
        if seen_path.insert(alpha_key(&next), ()).is_some() {
            steps.push(Step { rule, pos, expr: next });
            break;
        }
        steps.push(Step { rule, pos, expr: next.clone() });
        cur = next;
    }
    Ok(Trace { start, steps, verdict: Verdict::Exhausted { fuel } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmodel::{BuiltinModel, Element};
    use crate::syntax::{identity, parse_expr, parse_term, parse_test};

    fn norm() -> Model {
        Model::builtin(&BuiltinModel::Norm).unwrap()
    }
    fn dinf() -> Model {
        Model::builtin(&BuiltinModel::Dinf).unwrap()
    }
    fn park() -> Model {
        Model::builtin(&BuiltinModel::Park).unwrap()
    }

    #[test]
    fn redexes_on_examples() {
        let m = norm();
        let e = parse_expr(r"(\x. x) y", &m).unwrap();
        assert_eq!(redexes(&m, &e).unwrap(), vec![(Path(vec![]), RuleName::Beta)]);

        // tau over an abstraction always fires, the point unfolds
        let q = parse_expr("tau<{{q} -> q} -> p>(\\x. x)", &m).unwrap();
        let rs = redexes(&m, &q).unwrap();
        assert_eq!(rs, vec![(Path(vec![]), RuleName::Tau)]);

        let p = park();
        let e = parse_expr("eb<{*}> eb<{*}>", &p).unwrap();
        assert_eq!(redexes(&p, &e).unwrap(), vec![(Path(vec![]), RuleName::TauBar)]);
    }

    #[test]
    fn step_tau_tbar_examples() {
        let m = norm();
        // p <= q, so the selecting rule keeps the body
        let q = parse_expr("tau<p>(eb<{q}>)", &m).unwrap();
        let out = step(&m, &q, &Path(vec![]), RuleName::TauTauBar).unwrap();
        assert_eq!(out, Expr::Test(Test::eps()));

        // q <= p fails, so it refutes
        let q = parse_expr("tau<q>(eb<{p}>)", &m).unwrap();
        let out = step(&m, &q, &Path(vec![]), RuleName::TauTauBar).unwrap();
        assert_eq!(out, Expr::Test(Test::zero()));
    }

    #[test]
    fn tbar_rule_builds_the_product() {
        let m = norm();
        // (tb<p>(eps)) y: p unfolds to {q} -> p, so the tau product tests y at q
        let e = parse_expr("eb<{p}> y", &m).unwrap();
        let out = step(&m, &e, &Path(vec![]), RuleName::TauBar).unwrap();
        let expected = parse_expr("tb<p>(tau<q>(y))", &m).unwrap();
        assert_eq!(out, expected);
    }

    #[test]
    fn golden_trace_dinf_converging() {
        let d = dinf();
        let e = parse_expr(r"tau<*>((\x.\y. x y) eb<{*}>)", &d).unwrap();
        let tr = head_converges(&d, &e, 100, DEFAULT_MAX_STATES).unwrap();
        assert!(tr.converged());
        assert_eq!(
            tr.rules(),
            vec![RuleName::Beta, RuleName::Tau, RuleName::TauBar, RuleName::TauTauBar]
        );
        assert_eq!(tr.last_expr(), &Expr::Test(Test::eps()));
    }

    #[test]
    fn golden_trace_dinf_refuting() {
        let d = dinf();
        let e = parse_expr(r"tau<*>((\x.\y. y x) eb<{*}>)", &d).unwrap();
        let tr = head_converges(&d, &e, 100, DEFAULT_MAX_STATES).unwrap();
        assert!(!tr.converged());
        // the sample path passes through the refuted test and ends at 0
        assert_eq!(
            tr.rules(),
            vec![RuleName::Beta, RuleName::Tau, RuleName::TauBar, RuleName::TauTauBar]
        );
        assert_eq!(tr.last_expr(), &Expr::Test(Test::zero()));
    }

    #[test]
    fn golden_trace_park_self_application() {
        let p = park();
        let e = parse_expr(r"tau<*>(\x. x x)", &p).unwrap();
        let tr = head_converges(&p, &e, 100, DEFAULT_MAX_STATES).unwrap();
        assert!(tr.converged());
        assert_eq!(
            tr.rules(),
            vec![RuleName::Tau, RuleName::TauBar, RuleName::TauTauBar, RuleName::TauTauBar]
        );
        assert_eq!(tr.last_expr(), &Expr::Test(Test::eps()));
    }

    #[test]
    fn golden_trace_norm_identity() {
        let m = norm();
        let e = parse_expr(r"tau<p>(\x. x)", &m).unwrap();
        let tr = head_converges(&m, &e, 100, DEFAULT_MAX_STATES).unwrap();
        assert!(tr.converged());
        assert_eq!(tr.rules(), vec![RuleName::Tau, RuleName::TauTauBar]);
        assert_eq!(tr.last_expr(), &Expr::Test(Test::eps()));

        let e = parse_expr(r"tau<q>(\x. x)", &m).unwrap();
        let tr = head_converges(&m, &e, 100, DEFAULT_MAX_STATES).unwrap();
        assert!(!tr.converged());
        assert_eq!(tr.last_expr(), &Expr::Test(Test::zero()));
    }

    #[test]
    fn mhnf_shapes() {
        let m = norm();
        // a head variable under lambdas
        assert!(is_mhnf(&parse_expr(r"\x. y x", &m).unwrap()));
        // the empty sum is not a may-head-normal form
        assert!(!is_mhnf(&parse_expr("0", &m).unwrap()));
        assert!(!is_mhnf(&Expr::Test(Test::zero())));
        // a sum with one head-normal summand may-converges
        let e = parse_expr(r"\x. tb<p>(tau<q>(y)) + tb<p>(tau<q>((\z. z) w))", &m).unwrap();
        assert!(is_mhnf(&e));
        // tau over a variable-headed application is head-normal
        assert!(is_mhnf(&parse_expr("tau<p>(x y)", &m).unwrap()));
        // eps is head-normal, and a sum containing it may-converges
        assert!(is_mhnf(&Expr::Test(Test::eps())));
        assert!(is_mhnf(&parse_expr("eps + tau<p>((\\x. x) y)", &m).unwrap()));
        // tau over an abstraction is not: the point always unfolds
        assert!(!is_mhnf(&parse_expr(r"tau<p>(\x. x)", &m).unwrap()));
    }

    #[test]
    fn head_successors_branch_on_sums() {
        let m = norm();
        let e = parse_expr(
            r"tau<p>((\x. x) y) + tau<q>((\z. z) w)",
            &m,
        )
        .unwrap();
        let succs = head_successors(&m, &e).unwrap();
        assert_eq!(succs.len(), 2);
        assert!(succs.iter().all(|(r, _)| *r == RuleName::Beta));
    }

    #[test]
    fn theta_unfolds_in_two_betas() {
        let m = norm();
        let theta_f = Term::app(crate::syntax::theta(), Term::var("f"));
        let e = Expr::Term(crate::syntax::canon_term(&theta_f));
        let one = head_successors(&m, &e).unwrap();
        assert_eq!(one.len(), 1);
        let two = head_successors(&m, &one[0].1).unwrap();
        assert_eq!(two.len(), 1);
        let expected = Term::app(Term::var("f"), theta_f.clone());
        assert!(crate::syntax::alpha_eq(&two[0].1, &Expr::Term(crate::syntax::canon_term(&expected))));
    }

    #[test]
    fn identity_applies() {
        let m = norm();
        let e = Expr::Term(Term::app(identity(), Term::var("y")));
        let succs = head_successors(&m, &e).unwrap();
        assert_eq!(succs, vec![(RuleName::Beta, Expr::Term(Term::var("y")))]);
    }

    #[test]
    fn delta_rule_unfolds_the_counterexample_symbol() {
        let m = norm();
        let g = crate::kmodel::GSpec::Const(1);
        let e = parse_term("Jg[const 1](0)", &m).unwrap();
        let rs = redexes(&m, &Expr::Term(e.clone())).unwrap();
        assert_eq!(rs, vec![(Path(vec![]), RuleName::DeltaJg)]);
        let out = step(&m, &Expr::Term(e), &Path(vec![]), RuleName::DeltaJg).unwrap();
        let expected = Expr::Term(Term::app(crate::syntax::build_g(&g, 0), Term::Jg(g.clone(), 1)));
        assert_eq!(out, canon_expr(&expected));
    }

    #[test]
    fn prod_sum_distributes_including_empty() {
        let m = norm();
        let q = parse_test("tau<p>(x) * (tau<q>(y) + tau<p>(z))", &m).unwrap();
        let e = Expr::Test(q);
        let rs = redexes(&m, &e).unwrap();
        assert!(rs.contains(&(Path(vec![]), RuleName::ProdSum)));
        let out = step(&m, &e, &Path(vec![]), RuleName::ProdSum).unwrap();
        match out {
            Expr::Test(Test::Sum(children)) => assert_eq!(children.len(), 2),
            other => panic!("expected a sum, got {other}"),
        }

        // a product with an empty-sum factor distributes to 0
        let q = parse_test("tau<p>(x) * 0", &m).unwrap();
        let out = step(&m, &Expr::Test(q), &Path(vec![]), RuleName::ProdSum).unwrap();
        assert_eq!(out, Expr::Test(Test::zero()));
    }

    #[test]
    fn trace_rendering_is_line_oriented() {
        let m = norm();
        let e = parse_expr(r"tau<p>(\x. x)", &m).unwrap();
        let tr = head_converges(&m, &e, 100, DEFAULT_MAX_STATES).unwrap();
        let human = tr.render(false);
        assert!(human.lines().count() == 3);
        assert!(human.contains("tau@root"));
        assert!(human.trim_end().ends_with("VERDICT converged(2)"));
        let tsv = tr.render(true);
        assert!(tsv.lines().all(|l| l.starts_with("step\t") || l.starts_with("verdict\t")));
    }
}
