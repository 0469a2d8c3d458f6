//! The point-wise interpretation: derivability in the intersection-style
//! assignment system, bounded interpretation windows, and the operational
//! membership oracle.
//!
//! The search runs an algorithmic reformulation of the assignment rules:
//! order subsumption is absorbed into the variable and tau-bar axioms and
//! weakening into the leaves, because a search with free-floating
//! subsumption does not terminate. Found derivations re-check against the
//! rules node by node, independently of the search path.

mod separate;

pub use separate::{separating_context, SepOutcome};

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;

use crate::kmodel::{Antichain, Element, Model};
use crate::reduction::{head_converges, EngineError, Result, Trace};
use crate::syntax::{
    alpha_key, eps_bar, subst_term_many, Expr, ExprKey, Term, Test,
};

/// `x1:a1, …, xn:an ⊢ M : α` for terms, `… ⊢ Q` for tests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judgment {
    pub env: Vec<(String, Antichain)>,
    pub subject: Expr,
    pub point: Option<Element>,
}

impl fmt::Display for Judgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, a)) in self.env.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}:{a}")?;
        }
        if !self.env.is_empty() {
            write!(f, " ")?;
        }
        write!(f, "|- {}", self.subject)?;
        if let Some(p) = &self.point {
            write!(f, " : {p}")?;
        }
        Ok(())
    }
}

/// Three-valued outcome of a semi-decidable query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict3 {
    Yes(Witness),
    NoWithinBounds(usize),
}

impl Verdict3 {
    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict3::Yes(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Derivation(Derivation),
    Trace(Trace),
}

/// Enumeration and derivation-search bounds: the element window is
/// enumerate_elements(depth, width); search_depth bounds derivation depth.
#[derive(Debug, Clone, Copy)]
pub struct Bounds {
    pub depth: usize,
    pub width: usize,
    pub search_depth: usize,
    pub cap: usize,
}

impl Bounds {
    pub fn new(depth: usize, width: usize, search_depth: usize) -> Bounds {
        Bounds { depth, width, search_depth, cap: 200_000 }
    }
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds::new(2, 2, 8)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivRule {
    Var,
    Lam,
    App,
    TauBarSum,
    Tau,
    Sum,
    Prod,
}

impl fmt::Display for DerivRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DerivRule::Var => "var",
            DerivRule::Lam => "lam",
            DerivRule::App => "app",
            DerivRule::TauBarSum => "tbar",
            DerivRule::Tau => "tau",
            DerivRule::Sum => "sum",
            DerivRule::Prod => "prod",
        })
    }
}

/// A derivation tree; checkable against the assignment rules without
/// reference to how it was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub rule: DerivRule,
    pub judgment: Judgment,
    /// The existential data of the rule: the argument antichain for app,
    /// the chosen summand index for tbar and sum.
    pub choice: Option<Choice>,
    pub premises: Vec<Derivation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Choice {
    Antichain(Antichain),
    Summand(usize),
}

impl Derivation {
    pub fn depth(&self) -> usize {
        1 + self.premises.iter().map(Derivation::depth).max().unwrap_or(0)
    }

    pub fn render(&self) -> String {
        fn go(d: &Derivation, indent: usize, out: &mut String) {
            for _ in 0..indent {
                out.push_str("  ");
            }
            out.push_str(&format!("[{}] {}", d.rule, d.judgment));
            if let Some(Choice::Antichain(a)) = &d.choice {
                out.push_str(&format!("   (arg {a})"));
            }
            out.push('\n');
            for p in &d.premises {
                go(p, indent + 1, out);
            }
        }
        let mut s = String::new();
        go(self, 0, &mut s);
        s
    }

    /// Re-checks every node against the assignment rules (with the
    /// subsumption side conditions spelled out), premises included.
    pub fn validate(&self, model: &Model) -> Result<bool> {
        let env = &self.judgment.env;
        let lookup = |x: &str| env.iter().rev().find(|(y, _)| y == x).map(|(_, a)| a);
        match (&self.rule, &self.judgment.subject) {
            (DerivRule::Var, Expr::Term(Term::Var(x))) => {
                let Some(point) = &self.judgment.point else { return Ok(false) };
                let Some(a) = lookup(x) else { return Ok(false) };
                if !self.premises.is_empty() {
                    return Ok(false);
                }
                for beta in a.iter() {
                    if model.leq(point, beta)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            (DerivRule::Lam, Expr::Term(Term::Lam(x, body))) => {
                let Some(point) = &self.judgment.point else { return Ok(false) };
                let (head, tail) = model.unfold1(point)?;
                let [p] = &self.premises[..] else { return Ok(false) };
                let mut env2 = env.clone();
                env2.push((x.clone(), head));
                let expect = Judgment {
                    env: env2,
                    subject: Expr::Term((**body).clone()),
                    point: Some(tail),
                };
                Ok(p.judgment == expect && p.validate(model)?)
            }
            (DerivRule::App, Expr::Term(Term::App(f, arg))) => {
                let Some(point) = &self.judgment.point else { return Ok(false) };
                let Some(Choice::Antichain(b)) = &self.choice else { return Ok(false) };
                if self.premises.len() != 1 + b.len() {
                    return Ok(false);
                }
                let fun_point = model.fold(b, point);
                let expect_f = Judgment {
                    env: env.clone(),
                    subject: Expr::Term((**f).clone()),
                    point: Some(fun_point),
                };
                if self.premises[0].judgment != expect_f || !self.premises[0].validate(model)? {
                    return Ok(false);
                }
                for (beta, p) in b.iter().zip(&self.premises[1..]) {
                    let expect = Judgment {
                        env: env.clone(),
                        subject: Expr::Term((**arg).clone()),
                        point: Some(beta.clone()),
                    };
                    if p.judgment != expect || !p.validate(model)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            (DerivRule::TauBarSum, Expr::Term(Term::TauBarSum(s))) => {
                let Some(point) = &self.judgment.point else { return Ok(false) };
                let Some(Choice::Summand(i)) = &self.choice else { return Ok(false) };
                let Some((alpha_i, q_i)) = s.get(*i) else { return Ok(false) };
                if !model.leq(point, alpha_i)? {
                    return Ok(false);
                }
                let [p] = &self.premises[..] else { return Ok(false) };
                let expect = Judgment {
                    env: env.clone(),
                    subject: Expr::Test(q_i.clone()),
                    point: None,
                };
                Ok(p.judgment == expect && p.validate(model)?)
            }
            (DerivRule::Tau, Expr::Test(Test::Tau(alpha, m))) => {
                if self.judgment.point.is_some() {
                    return Ok(false);
                }
                let [p] = &self.premises[..] else { return Ok(false) };
                let expect = Judgment {
                    env: env.clone(),
                    subject: Expr::Term((**m).clone()),
                    point: Some(alpha.clone()),
                };
                Ok(p.judgment == expect && p.validate(model)?)
            }
            (DerivRule::Sum, Expr::Test(Test::Sum(cs))) => {
                let Some(Choice::Summand(i)) = &self.choice else { return Ok(false) };
                let Some(c) = cs.get(*i) else { return Ok(false) };
                let [p] = &self.premises[..] else { return Ok(false) };
                let expect = Judgment {
                    env: env.clone(),
                    subject: Expr::Test(c.clone()),
                    point: None,
                };
                Ok(p.judgment == expect && p.validate(model)?)
            }
            (DerivRule::Prod, Expr::Test(Test::Prod(cs))) => {
                if self.premises.len() != cs.len() {
                    return Ok(false);
                }
                for (c, p) in cs.iter().zip(&self.premises) {
                    let expect = Judgment {
                        env: env.clone(),
                        subject: Expr::Test(c.clone()),
                        point: None,
                    };
                    if p.judgment != expect || !p.validate(model)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            _ => Ok(false),
        }
    }
}

// ---------------------------------------------------------------------------
// the bounded derivation search

type EnvKey = Vec<(String, Antichain)>;
type MemoKey = (EnvKey, ExprKey, Option<Element>);

enum MemoVal {
    Yes(Rc<Derivation>),
    NoUpTo(usize),
}

pub struct TypeSearch<'m> {
    model: &'m Model,
    /// Candidate argument antichains, smallest first.
    candidates: Vec<Antichain>,
    bounds: Bounds,
    memo: HashMap<MemoKey, MemoVal>,
}

impl<'m> TypeSearch<'m> {
    pub fn new(model: &'m Model, bounds: Bounds) -> Result<TypeSearch<'m>> {
        let window = model.enumerate_elements(bounds.depth, bounds.width, bounds.cap)?;
        let mut candidates = model.antichains_over(&window, bounds.width)?;
        // unfolding heads of window elements guide variable-headed spines
        for e in &window {
            let (head, _) = model.unfold1(e)?;
            if !candidates.contains(&head) {
                candidates.push(head);
            }
        }
        candidates.sort_by_key(|a| (a.len(), a.clone()));
        candidates.dedup();
        Ok(TypeSearch { model, candidates, bounds, memo: HashMap::new() })
    }

    pub fn window(&self) -> Result<Vec<Element>> {
        self.model
            .enumerate_elements(self.bounds.depth, self.bounds.width, self.bounds.cap)
            .map_err(Into::into)
    }

    pub fn candidates(&self) -> &[Antichain] {
        &self.candidates
    }

    /// Searches for a derivation of bounded depth.
    pub fn derive(&mut self, j: &Judgment) -> Result<Option<Derivation>> {
        let depth = self.bounds.search_depth;
        Ok(self
            .search(&j.env, &j.subject, &j.point, depth)?
            .map(|rc| (*rc).clone()))
    }

    fn memo_key(env: &[(String, Antichain)], subject: &Expr, point: &Option<Element>) -> MemoKey {
        // weakening is fused away: only bindings of free variables matter
        let fv = crate::syntax::free_vars(subject);
        let mut live: Vec<(String, Antichain)> = Vec::new();
        for x in &fv {
            if let Some((_, a)) = env.iter().rev().find(|(y, _)| y == x) {
                live.push((x.clone(), a.clone()));
            }
        }
        (live, alpha_key(subject), point.clone())
    }

    fn search(
        &mut self,
        env: &[(String, Antichain)],
        subject: &Expr,
        point: &Option<Element>,
        depth: usize,
    ) -> Result<Option<Rc<Derivation>>> {
        if depth == 0 {
            return Ok(None);
        }
        let key = Self::memo_key(env, subject, point);
        match self.memo.get(&key) {
            Some(MemoVal::Yes(d)) if d.depth() <= depth => return Ok(Some(d.clone())),
            Some(MemoVal::NoUpTo(d)) if depth <= *d => return Ok(None),
            _ => {}
        }
        let found = self.search_inner(env, subject, point, depth)?;
        match &found {
            Some(d) => {
                self.memo.insert(key, MemoVal::Yes(d.clone()));
            }
            None => {
                let keep = match self.memo.get(&key) {
                    Some(MemoVal::NoUpTo(d)) => *d < depth,
                    Some(MemoVal::Yes(_)) => false,
                    None => true,
                };
                if keep {
                    self.memo.insert(key, MemoVal::NoUpTo(depth));
                }
            }
        }
        Ok(found)
    }

    fn search_inner(
        &mut self,
        env: &[(String, Antichain)],
        subject: &Expr,
        point: &Option<Element>,
        depth: usize,
    ) -> Result<Option<Rc<Derivation>>> {
        let judgment = |point: &Option<Element>| Judgment {
            env: env.to_vec(),
            subject: subject.clone(),
            point: point.clone(),
        };
        match subject {
            Expr::Term(term) => {
                let Some(alpha) = point else { return Ok(None) };
                match term {
                    Term::Var(x) => {
                        let Some((_, a)) = env.iter().rev().find(|(y, _)| y == x) else {
                            return Ok(None);
                        };
                        for beta in a.iter() {
                            if self.model.leq(alpha, beta)? {
                                return Ok(Some(Rc::new(Derivation {
                                    rule: DerivRule::Var,
                                    judgment: judgment(point),
                                    choice: None,
                                    premises: vec![],
                                })));
                            }
                        }
                        Ok(None)
                    }
                    Term::Lam(x, body) => {
                        let (head, tail) = self.model.unfold1(alpha)?;
                        let mut env2 = env.to_vec();
                        env2.push((x.clone(), head));
                        let sub = Expr::Term((**body).clone());
                        match self.search(&env2, &sub, &Some(tail), depth - 1)? {
                            Some(p) => Ok(Some(Rc::new(Derivation {
                                rule: DerivRule::Lam,
                                judgment: judgment(point),
                                choice: None,
                                premises: vec![(*p).clone()],
                            }))),
                            None => Ok(None),
                        }
                    }
                    Term::App(f, arg) => {
                        let fun = Expr::Term((**f).clone());
                        let argt = Expr::Term((**arg).clone());
                        let candidates = self.candidates.clone();
                        for b in &candidates {
                            let fun_point = self.model.fold(b, alpha);
                            let Some(pf) = self.search(env, &fun, &Some(fun_point), depth - 1)?
                            else {
                                continue;
                            };
                            let mut premises = vec![(*pf).clone()];
                            let mut ok = true;
                            for beta in b.iter() {
                                match self.search(env, &argt, &Some(beta.clone()), depth - 1)? {
                                    Some(pa) => premises.push((*pa).clone()),
                                    None => {
                                        ok = false;
                                        break;
                                    }
                                }
                            }
                            if ok {
                                return Ok(Some(Rc::new(Derivation {
                                    rule: DerivRule::App,
                                    judgment: judgment(point),
                                    choice: Some(Choice::Antichain(b.clone())),
                                    premises,
                                })));
                            }
                        }
                        Ok(None)
                    }
                    Term::TauBarSum(s) => {
                        for (i, (alpha_i, q_i)) in s.iter().enumerate() {
                            if !self.model.leq(alpha, alpha_i)? {
                                continue;
                            }
                            let sub = Expr::Test(q_i.clone());
                            if let Some(p) = self.search(env, &sub, &None, depth - 1)? {
                                return Ok(Some(Rc::new(Derivation {
                                    rule: DerivRule::TauBarSum,
                                    judgment: judgment(point),
                                    choice: Some(Choice::Summand(i)),
                                    premises: vec![(*p).clone()],
                                })));
                            }
                        }
                        Ok(None)
                    }
                    // the opaque counterexample symbol has no assignment rule
                    Term::Jg(_, _) => Ok(None),
                }
            }
            Expr::Test(test) => {
                if point.is_some() {
                    return Ok(None);
                }
                match test {
                    Test::Tau(alpha, m) => {
                        let sub = Expr::Term((**m).clone());
                        match self.search(env, &sub, &Some(alpha.clone()), depth - 1)? {
                            Some(p) => Ok(Some(Rc::new(Derivation {
                                rule: DerivRule::Tau,
                                judgment: judgment(&None),
                                choice: None,
                                premises: vec![(*p).clone()],
                            }))),
                            None => Ok(None),
                        }
                    }
                    Test::Sum(cs) => {
                        for (i, c) in cs.iter().enumerate() {
                            let sub = Expr::Test(c.clone());
                            if let Some(p) = self.search(env, &sub, &None, depth - 1)? {
                                return Ok(Some(Rc::new(Derivation {
                                    rule: DerivRule::Sum,
                                    judgment: judgment(&None),
                                    choice: Some(Choice::Summand(i)),
                                    premises: vec![(*p).clone()],
                                })));
                            }
                        }
                        Ok(None)
                    }
                    Test::Prod(cs) => {
                        let mut premises = Vec::with_capacity(cs.len());
                        for c in cs {
                            let sub = Expr::Test(c.clone());
                            match self.search(env, &sub, &None, depth - 1)? {
                                Some(p) => premises.push((*p).clone()),
                                None => return Ok(None),
                            }
                        }
                        Ok(Some(Rc::new(Derivation {
                            rule: DerivRule::Prod,
                            judgment: judgment(&None),
                            choice: None,
                            premises,
                        })))
                    }
                }
            }
        }
    }
}

/// Bounded derivability. `Yes` carries a derivation that re-checks against
/// the rules; `NoWithinBounds` only rules out derivations within depth.
pub fn derivable(model: &Model, j: &Judgment, bounds: &Bounds) -> Result<Verdict3> {
    let mut search = TypeSearch::new(model, *bounds)?;
    match search.derive(j)? {
        Some(d) => {
            debug_assert!(d.validate(model)?, "search returned an invalid derivation");
            Ok(Verdict3::Yes(Witness::Derivation(d)))
        }
        None => Ok(Verdict3::NoWithinBounds(bounds.search_depth)),
    }
}

/// A finite window onto the interpretation of `M`: all `(a⃗, α)` drawn
/// from the enumeration that are derivable within bounds.
pub fn interp_points(
    model: &Model,
    m: &Term,
    vars: &[String],
    bounds: &Bounds,
) -> Result<BTreeSet<(Vec<Antichain>, Element)>> {
    for x in crate::syntax::free_vars_term(m) {
        if !vars.contains(&x) {
            return Err(EngineError::Model(crate::kmodel::ModelError::Builtin(format!(
                "free variable `{x}` not covered by the judgment variables"
            ))));
        }
    }
    let mut search = TypeSearch::new(model, *bounds)?;
    let window = search.window()?;
    let envs = env_assignments(search.candidates(), vars, bounds.cap)?;
    let mut out = BTreeSet::new();
    for env in &envs {
        for alpha in &window {
            let j = Judgment {
                env: env.clone(),
                subject: Expr::Term(m.clone()),
                point: Some(alpha.clone()),
            };
            if search.derive(&j)?.is_some() {
                let a_vec: Vec<Antichain> = env.iter().map(|(_, a)| a.clone()).collect();
                out.insert((a_vec, alpha.clone()));
                if out.len() > bounds.cap {
                    return Err(EngineError::Model(crate::kmodel::ModelError::ResourceLimit(
                        bounds.cap,
                    )));
                }
            }
        }
    }
    Ok(out)
}

fn env_assignments(
    candidates: &[Antichain],
    vars: &[String],
    cap: usize,
) -> Result<Vec<Vec<(String, Antichain)>>> {
    let mut out: Vec<Vec<(String, Antichain)>> = vec![Vec::new()];
    for x in vars {
        let mut next = Vec::new();
        for env in &out {
            for a in candidates {
                let mut env2 = env.clone();
                env2.push((x.clone(), a.clone()));
                next.push(env2);
            }
        }
        out = next;
        if out.len() > cap {
            return Err(EngineError::Model(crate::kmodel::ModelError::ResourceLimit(cap)));
        }
    }
    Ok(out)
}

/// The operational membership oracle: wraps `M[ε̄_{aᵢ}/xᵢ]` in a tau test
/// at `α` (simultaneous substitution) and searches for head convergence.
pub fn member_op(
    model: &Model,
    m: &Term,
    env: &[(String, Antichain)],
    alpha: &Element,
    fuel: usize,
    max_states: usize,
) -> Result<Verdict3> {
    let subs = env
        .iter()
        .map(|(x, a)| (x.clone(), eps_bar(a)))
        .collect();
    let closed = subst_term_many(m, &subs);
    let probe = Expr::Test(Test::tau(alpha.clone(), closed));
    let trace = head_converges(model, &probe, fuel, max_states)?;
    if trace.converged() {
        Ok(Verdict3::Yes(Witness::Trace(trace)))
    } else {
        Ok(Verdict3::NoWithinBounds(fuel))
    }
}

/// Whether `Γ, x:a ⊢ M : α` and `Γ ⊢ M[ε̄_a/x] : α` agree at the given
/// bounds. A property check, not a decision procedure.
pub fn typed_subst_check(
    model: &Model,
    env: &[(String, Antichain)],
    x: &str,
    a: &Antichain,
    m: &Term,
    alpha: &Element,
    bounds: &Bounds,
) -> Result<bool> {
    let mut env_ext = env.to_vec();
    env_ext.push((x.to_string(), a.clone()));
    let lhs = derivable(
        model,
        &Judgment {
            env: env_ext,
            subject: Expr::Term(m.clone()),
            point: Some(alpha.clone()),
        },
        bounds,
    )?;
    let mut subs = std::collections::BTreeMap::new();
    subs.insert(x.to_string(), eps_bar(a));
    let substituted = subst_term_many(m, &subs);
    let rhs = derivable(
        model,
        &Judgment {
            env: env.to_vec(),
            subject: Expr::Term(substituted),
            point: Some(alpha.clone()),
        },
        bounds,
    )?;
    Ok(lhs.is_yes() == rhs.is_yes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmodel::BuiltinModel;
    use crate::syntax::{church, identity, omega, parse_term};

    fn norm() -> Model {
        Model::builtin(&BuiltinModel::Norm).unwrap()
    }
    fn dinf() -> Model {
        Model::builtin(&BuiltinModel::Dinf).unwrap()
    }

    fn closed(m: &Model, subject: Term, point: Element) -> Judgment {
        let _ = m;
        Judgment { env: vec![], subject: Expr::Term(subject), point: Some(point) }
    }

    #[test]
    fn identity_has_the_folded_point() {
        // |- I : p uses p <= q at the variable axiom, since p = {q} -> p
        let m = norm();
        let j = closed(&m, identity(), Element::atom("p"));
        let v = derivable(&m, &j, &Bounds::default()).unwrap();
        match v {
            Verdict3::Yes(Witness::Derivation(d)) => {
                assert!(d.validate(&m).unwrap());
                assert_eq!(d.rule, DerivRule::Lam);
            }
            other => panic!("expected yes, got {other:?}"),
        }
        // |- I : q needs q <= p, which fails
        let j = closed(&m, identity(), Element::atom("q"));
        assert!(!derivable(&m, &j, &Bounds::default()).unwrap().is_yes());
    }

    #[test]
    fn eps_is_always_derivable_and_zero_never() {
        let m = norm();
        let j = Judgment { env: vec![], subject: Expr::Test(Test::eps()), point: None };
        assert!(derivable(&m, &j, &Bounds::default()).unwrap().is_yes());

        let j = closed(&m, Term::zero(), Element::atom("p"));
        assert!(!derivable(&m, &j, &Bounds::default()).unwrap().is_yes());
    }

    #[test]
    fn dinf_identity_window_contains_the_arrow() {
        let d = dinf();
        let pts = interp_points(&d, &identity(), &[], &Bounds::new(1, 1, 6)).unwrap();
        let star = Element::atom("*");
        let arrow = Element::Arrow(Antichain::singleton(star.clone()), Box::new(star.clone()));
        assert!(pts.contains(&(vec![], arrow)));
    }

    #[test]
    fn omega_has_empty_windows() {
        let m = norm();
        let pts = interp_points(&m, &omega(), &[], &Bounds::new(1, 2, 8)).unwrap();
        assert!(pts.is_empty());
    }

    #[test]
    fn church_one_equals_identity_on_windows() {
        for model in [norm(), dinf()] {
            let b = Bounds::new(1, 2, 10);
            let one = interp_points(&model, &church(1), &[], &b).unwrap();
            let id = interp_points(&model, &identity(), &[], &b).unwrap();
            assert_eq!(one, id, "model {}", model.name());
        }
    }

    #[test]
    fn member_op_examples() {
        let m = norm();
        // identity at p: two steps, tau then the selection rule
        let v = member_op(&m, &identity(), &[], &Element::atom("p"), 100, 100_000).unwrap();
        match v {
            Verdict3::Yes(Witness::Trace(tr)) => assert_eq!(tr.steps.len(), 2),
            other => panic!("expected yes, got {other:?}"),
        }
        // the looping term never converges
        let v = member_op(&m, &omega(), &[], &Element::atom("p"), 500, 100_000).unwrap();
        assert!(!v.is_yes());
        // a variable against its own environment point: one selection step
        let env = vec![("x".to_string(), Antichain::singleton(Element::atom("q")))];
        let v = member_op(&m, &Term::var("x"), &env, &Element::atom("q"), 100, 100_000).unwrap();
        match v {
            Verdict3::Yes(Witness::Trace(tr)) => assert_eq!(tr.steps.len(), 1),
            other => panic!("expected yes, got {other:?}"),
        }
    }

    #[test]
    fn tau_wrapping_matches_term_judgment() {
        let m = norm();
        let mut search = TypeSearch::new(&m, Bounds::default()).unwrap();
        let window = search.window().unwrap();
        let subject = parse_term(r"\x. x", &m).unwrap();
        for alpha in window.iter().take(20) {
            let as_term = Judgment {
                env: vec![],
                subject: Expr::Term(subject.clone()),
                point: Some(alpha.clone()),
            };
            let as_test = Judgment {
                env: vec![],
                subject: Expr::Test(Test::tau(alpha.clone(), subject.clone())),
                point: None,
            };
            assert_eq!(
                search.derive(&as_term).unwrap().is_some(),
                search.derive(&as_test).unwrap().is_some(),
                "point {alpha}"
            );
        }
    }

    #[test]
    fn typed_subst_agreement_examples() {
        let m = norm();
        let b = Bounds::new(1, 2, 8);
        let p = Element::atom("p");
        let a = Antichain::singleton(p.clone());
        // M = x with x:a
        assert!(typed_subst_check(&m, &[], "x", &a, &Term::var("x"), &p, &b).unwrap());
        // x not free: substitution is the identity
        let env = vec![("y".to_string(), a.clone())];
        assert!(typed_subst_check(&m, &env, "x", &a, &Term::var("y"), &p, &b).unwrap());
    }

    #[test]
    fn derivation_rendering_mentions_rules() {
        let m = norm();
        let j = closed(&m, identity(), Element::atom("p"));
        let Verdict3::Yes(Witness::Derivation(d)) = derivable(&m, &j, &Bounds::default()).unwrap()
        else {
            panic!("expected a derivation");
        };
        let shown = d.render();
        assert!(shown.contains("[lam]"));
        assert!(shown.contains("[var]"));
    }
}
