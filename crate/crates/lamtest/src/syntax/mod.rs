//! Terms and tests over a model's points.
//!
//! Sums and products are multisets: nested same-shape nodes are flattened,
//! units (`0` for sums, `eps` for products) disappear, singletons collapse
//! to their only member, and children are kept sorted under a total order
//! on binder-insensitive skeletons. Every public operation returns
//! expressions in this canonical form.

mod parse;
mod print;

pub use parse::{parse_expr, parse_judgment_env, parse_term, parse_test, SyntaxError};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::kmodel::{Antichain, Element, GSpec};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Lam(String, Box<Term>),
    App(Box<Term>, Box<Term>),
    /// A sum of `tb<point>(test)` operators; the empty sum is the term `0`.
    TauBarSum(Vec<(Element, Test)>),
    /// Opaque counterexample symbol `Jg[g](n)`, rewritten by its own rule.
    Jg(GSpec, u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Test {
    Sum(Vec<Test>),
    Prod(Vec<Test>),
    Tau(Element, Box<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Term(Term),
    Test(Test),
}

impl Term {
    pub fn zero() -> Term {
        Term::TauBarSum(Vec::new())
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn lam(binder: impl Into<String>, body: Term) -> Term {
        Term::Lam(binder.into(), Box::new(body))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    /// Left-associated application to several arguments.
    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Term::TauBarSum(s) if s.is_empty())
    }
}

impl Test {
    pub fn zero() -> Test {
        Test::Sum(Vec::new())
    }

    pub fn eps() -> Test {
        Test::Prod(Vec::new())
    }

    pub fn tau(point: Element, body: Term) -> Test {
        Test::Tau(point, Box::new(body))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Test::Sum(s) if s.is_empty())
    }

    pub fn is_eps(&self) -> bool {
        matches!(self, Test::Prod(p) if p.is_empty())
    }

    /// The multiset of summands, reading a non-sum as a one-element sum.
    pub fn sum_parts(&self) -> Vec<Test> {
        match self {
            Test::Sum(children) => children.clone(),
            other => vec![other.clone()],
        }
    }

    /// The multiset of factors, reading a non-product as a single factor.
    pub fn prod_parts(&self) -> Vec<Test> {
        match self {
            Test::Prod(children) => children.clone(),
            other => vec![other.clone()],
        }
    }
}

impl Expr {
    pub fn as_term(&self) -> Option<&Term> {
        match self {
            Expr::Term(t) => Some(t),
            Expr::Test(_) => None,
        }
    }

    pub fn as_test(&self) -> Option<&Test> {
        match self {
            Expr::Test(q) => Some(q),
            Expr::Term(_) => None,
        }
    }
}

impl From<Term> for Expr {
    fn from(t: Term) -> Expr {
        Expr::Term(t)
    }
}
impl From<Test> for Expr {
    fn from(q: Test) -> Expr {
        Expr::Test(q)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::term_to_string(self))
    }
}
impl fmt::Display for Test {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::test_to_string(self))
    }
}
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Term(t) => t.fmt(f),
            Expr::Test(q) => q.fmt(f),
        }
    }
}

// ---------------------------------------------------------------------------
// binder-insensitive skeletons: alpha-equality, hashing, multiset ordering

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermKey {
    BVar(usize),
    FVar(String),
    Lam(Box<TermKey>),
    App(Box<TermKey>, Box<TermKey>),
    TauBarSum(Vec<(Element, TestKey)>),
    Jg(GSpec, u32),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TestKey {
    Sum(Vec<TestKey>),
    Prod(Vec<TestKey>),
    Tau(Element, Box<TermKey>),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExprKey {
    Term(TermKey),
    Test(TestKey),
}

fn term_key(t: &Term, env: &mut Vec<String>) -> TermKey {
    match t {
        Term::Var(x) => match env.iter().rev().position(|b| b == x) {
            Some(i) => TermKey::BVar(i),
            None => TermKey::FVar(x.clone()),
        },
        Term::Lam(x, b) => {
            env.push(x.clone());
            let k = term_key(b, env);
            env.pop();
            TermKey::Lam(Box::new(k))
        }
        Term::App(f, a) => TermKey::App(Box::new(term_key(f, env)), Box::new(term_key(a, env))),
        Term::TauBarSum(summands) => {
            let mut ks: Vec<(Element, TestKey)> = summands
                .iter()
                .map(|(e, q)| (e.clone(), test_key(q, env)))
                .collect();
            ks.sort();
            TermKey::TauBarSum(ks)
        }
        Term::Jg(g, n) => TermKey::Jg(g.clone(), *n),
    }
}

fn test_key(q: &Test, env: &mut Vec<String>) -> TestKey {
    match q {
        Test::Sum(children) => {
            let mut ks: Vec<TestKey> = children.iter().map(|c| test_key(c, env)).collect();
            ks.sort();
            TestKey::Sum(ks)
        }
        Test::Prod(children) => {
            let mut ks: Vec<TestKey> = children.iter().map(|c| test_key(c, env)).collect();
            ks.sort();
            TestKey::Prod(ks)
        }
        Test::Tau(e, m) => TestKey::Tau(e.clone(), Box::new(term_key(m, env))),
    }
}

pub fn alpha_key(e: &Expr) -> ExprKey {
    let mut env = Vec::new();
    match e {
        Expr::Term(t) => ExprKey::Term(term_key(t, &mut env)),
        Expr::Test(q) => ExprKey::Test(test_key(q, &mut env)),
    }
}

pub fn alpha_key_term(t: &Term) -> TermKey {
    term_key(t, &mut Vec::new())
}

pub fn alpha_key_test(q: &Test) -> TestKey {
    test_key(q, &mut Vec::new())
}

/// Structural equality modulo binder names and multiset reordering.
pub fn alpha_eq(a: &Expr, b: &Expr) -> bool {
    alpha_key(a) == alpha_key(b)
}

pub fn alpha_eq_term(a: &Term, b: &Term) -> bool {
    alpha_key_term(a) == alpha_key_term(b)
}

pub fn alpha_eq_test(a: &Test, b: &Test) -> bool {
    alpha_key_test(a) == alpha_key_test(b)
}

// ---------------------------------------------------------------------------
// canonical form

fn canon_term_in(t: &Term, env: &mut Vec<String>) -> Term {
    match t {
        Term::Var(_) | Term::Jg(_, _) => t.clone(),
        Term::Lam(x, b) => {
            env.push(x.clone());
            let b = canon_term_in(b, env);
            env.pop();
            Term::Lam(x.clone(), Box::new(b))
        }
        Term::App(f, a) => Term::App(
            Box::new(canon_term_in(f, env)),
            Box::new(canon_term_in(a, env)),
        ),
        Term::TauBarSum(summands) => {
            let mut out: Vec<(Element, Test)> = summands
                .iter()
                .map(|(e, q)| (e.clone(), canon_test_in(q, env)))
                .collect();
            out.sort_by_cached_key(|(e, q)| (e.clone(), test_key(q, env)));
            Term::TauBarSum(out)
        }
    }
}

fn canon_test_in(q: &Test, env: &mut Vec<String>) -> Test {
    match q {
        Test::Sum(children) => {
            let mut flat: Vec<Test> = Vec::new();
            for c in children {
                match canon_test_in(c, env) {
                    Test::Sum(inner) => flat.extend(inner),
                    other => flat.push(other),
                }
            }
            if flat.len() == 1 {
                return flat.pop().unwrap();
            }
            flat.sort_by_cached_key(|c| test_key(c, env));
            Test::Sum(flat)
        }
        Test::Prod(children) => {
            let mut flat: Vec<Test> = Vec::new();
            for c in children {
                match canon_test_in(c, env) {
                    Test::Prod(inner) => flat.extend(inner),
                    other => flat.push(other),
                }
            }
            if flat.len() == 1 {
                return flat.pop().unwrap();
            }
            flat.sort_by_cached_key(|c| test_key(c, env));
            Test::Prod(flat)
        }
        Test::Tau(e, m) => Test::Tau(e.clone(), Box::new(canon_term_in(m, env))),
    }
}

pub fn canon_term(t: &Term) -> Term {
    canon_term_in(t, &mut Vec::new())
}

pub fn canon_test(q: &Test) -> Test {
    canon_test_in(q, &mut Vec::new())
}

pub fn canon_expr(e: &Expr) -> Expr {
    match e {
        Expr::Term(t) => Expr::Term(canon_term(t)),
        Expr::Test(q) => Expr::Test(canon_test(q)),
    }
}

// ---------------------------------------------------------------------------
// free variables and substitution

fn fv_term(t: &Term, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(x) => {
            if !bound.iter().any(|b| b == x) {
                out.insert(x.clone());
            }
        }
        Term::Lam(x, b) => {
            bound.push(x.clone());
            fv_term(b, bound, out);
            bound.pop();
        }
        Term::App(f, a) => {
            fv_term(f, bound, out);
            fv_term(a, bound, out);
        }
        Term::TauBarSum(summands) => {
            for (_, q) in summands {
                fv_test(q, bound, out);
            }
        }
        Term::Jg(_, _) => {}
    }
}

fn fv_test(q: &Test, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match q {
        Test::Sum(cs) | Test::Prod(cs) => {
            for c in cs {
                fv_test(c, bound, out);
            }
        }
        Test::Tau(_, m) => fv_term(m, bound, out),
    }
}

pub fn free_vars_term(t: &Term) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fv_term(t, &mut Vec::new(), &mut out);
    out
}

pub fn free_vars_test(q: &Test) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fv_test(q, &mut Vec::new(), &mut out);
    out
}

pub fn free_vars(e: &Expr) -> BTreeSet<String> {
    match e {
        Expr::Term(t) => free_vars_term(t),
        Expr::Test(q) => free_vars_test(q),
    }
}

fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let mut name = format!("{base}'");
    while avoid.contains(&name) {
        name.push('\'');
    }
    name
}

fn subst_term_raw(t: &Term, subs: &BTreeMap<String, Term>) -> Term {
    match t {
        Term::Var(x) => subs.get(x).cloned().unwrap_or_else(|| t.clone()),
        Term::Jg(_, _) => t.clone(),
        Term::App(f, a) => Term::App(
            Box::new(subst_term_raw(f, subs)),
            Box::new(subst_term_raw(a, subs)),
        ),
        Term::TauBarSum(summands) => Term::TauBarSum(
            summands
                .iter()
                .map(|(e, q)| (e.clone(), subst_test_raw(q, subs)))
                .collect(),
        ),
        Term::Lam(y, b) => {
            let body_fv = free_vars_term(b);
            let live: BTreeMap<String, Term> = subs
                .iter()
                .filter(|(k, _)| *k != y && body_fv.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            if live.is_empty() {
                return t.clone();
            }
            let captures = live.values().any(|v| free_vars_term(v).contains(y));
            if captures {
                let mut avoid: BTreeSet<String> = body_fv;
                for v in live.values() {
                    avoid.extend(free_vars_term(v));
                }
                avoid.extend(live.keys().cloned());
                let y2 = fresh_name(y, &avoid);
                let mut rename = BTreeMap::new();
                rename.insert(y.clone(), Term::var(y2.clone()));
                let b2 = subst_term_raw(b, &rename);
                Term::Lam(y2, Box::new(subst_term_raw(&b2, &live)))
            } else {
                Term::Lam(y.clone(), Box::new(subst_term_raw(b, &live)))
            }
        }
    }
}

fn subst_test_raw(q: &Test, subs: &BTreeMap<String, Term>) -> Test {
    match q {
        Test::Sum(cs) => Test::Sum(cs.iter().map(|c| subst_test_raw(c, subs)).collect()),
        Test::Prod(cs) => Test::Prod(cs.iter().map(|c| subst_test_raw(c, subs)).collect()),
        Test::Tau(e, m) => Test::Tau(e.clone(), Box::new(subst_term_raw(m, subs))),
    }
}

/// Capture-avoiding simultaneous substitution; the result is canonical.
pub fn subst_term_many(t: &Term, subs: &BTreeMap<String, Term>) -> Term {
    canon_term(&subst_term_raw(t, subs))
}

pub fn subst_test_many(q: &Test, subs: &BTreeMap<String, Term>) -> Test {
    canon_test(&subst_test_raw(q, subs))
}

/// `M[N/x]`, capture-avoiding.
pub fn subst_term(t: &Term, x: &str, n: &Term) -> Term {
    let mut subs = BTreeMap::new();
    subs.insert(x.to_string(), n.clone());
    subst_term_many(t, &subs)
}

pub fn subst_test(q: &Test, x: &str, n: &Term) -> Test {
    let mut subs = BTreeMap::new();
    subs.insert(x.to_string(), n.clone());
    subst_test_many(q, &subs)
}

pub fn subst_expr(e: &Expr, x: &str, n: &Term) -> Expr {
    match e {
        Expr::Term(t) => Expr::Term(subst_term(t, x, n)),
        Expr::Test(q) => Expr::Test(subst_test(q, x, n)),
    }
}

// ---------------------------------------------------------------------------
// named combinators and the counterexample family

/// `\x. x`
pub fn identity() -> Term {
    Term::lam("x", Term::var("x"))
}

/// `(\x. x x) (\x. x x)`
pub fn omega() -> Term {
    let d = Term::lam("x", Term::app(Term::var("x"), Term::var("x")));
    Term::app(d.clone(), d)
}

/// Turing's fixpoint: `(\u v. v (u u v)) (\u v. v (u u v))`
pub fn theta() -> Term {
    let half = Term::lam(
        "u",
        Term::lam(
            "v",
            Term::app(
                Term::var("v"),
                Term::apps(Term::var("u"), [Term::var("u"), Term::var("v")]),
            ),
        ),
    );
    Term::app(half.clone(), half)
}

/// Church successor: `\u f x. u f (f x)`
pub fn successor() -> Term {
    Term::lam(
        "u",
        Term::lam(
            "f",
            Term::lam(
                "x",
                Term::app(
                    Term::app(Term::var("u"), Term::var("f")),
                    Term::app(Term::var("f"), Term::var("x")),
                ),
            ),
        ),
    )
}

/// The n-th Church numeral `\f x. f (f … (f x))`.
pub fn church(n: u32) -> Term {
    let mut body = Term::var("x");
    for _ in 0..n {
        body = Term::app(Term::var("f"), body);
    }
    Term::lam("f", Term::lam("x", body))
}

pub fn combinator(name: &str) -> Option<Term> {
    match name {
        "I" => Some(identity()),
        "S" => Some(successor()),
        "Theta" => Some(theta()),
        "Omega" => Some(omega()),
        _ => None,
    }
}

/// The canonical term of a finite antichain: one `tb<point>(eps)` summand
/// per member; the empty antichain gives the term `0`.
pub fn eps_bar(a: &Antichain) -> Term {
    canon_term(&Term::TauBarSum(
        a.iter().map(|e| (e.clone(), Test::eps())).collect(),
    ))
}

pub fn eps_bar_point(e: &Element) -> Term {
    Term::TauBarSum(vec![(e.clone(), Test::eps())])
}

/// `\u e x1 … x_{g(n)}. e (u x1) … (u x_{g(n)})`
pub fn build_g(g: &GSpec, n: u32) -> Term {
    let width = g.eval(n);
    let xs: Vec<String> = (1..=width).map(|i| format!("x{i}")).collect();
    let mut body = Term::var("e");
    for x in &xs {
        body = Term::app(body, Term::app(Term::var("u"), Term::var(x)));
    }
    let mut t = body;
    for x in xs.iter().rev() {
        t = Term::lam(x.clone(), t);
    }
    Term::lam("u", Term::lam("e", t))
}

/// The opaque counterexample symbol; see the reduction module for its rule.
pub fn jg(g: &GSpec, n: u32) -> Term {
    Term::Jg(g.clone(), n)
}

// ---------------------------------------------------------------------------
// contexts: term syntax with a hole, filled literally (capture permitted)

pub const HOLE_NAME: &str = "<hole>";

/// A term context. The hole is a reserved variable that the parser can
/// never produce; filling replaces it literally, so binders in the context
/// may capture the filled term's free variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context(pub Term);

impl Context {
    pub fn hole() -> Context {
        Context(Term::var(HOLE_NAME))
    }

    pub fn fill(&self, m: &Term) -> Term {
        fn go(t: &Term, m: &Term) -> Term {
            match t {
                Term::Var(x) if x == HOLE_NAME => m.clone(),
                Term::Var(_) | Term::Jg(_, _) => t.clone(),
                Term::Lam(x, b) => Term::Lam(x.clone(), Box::new(go(b, m))),
                Term::App(f, a) => Term::App(Box::new(go(f, m)), Box::new(go(a, m))),
                Term::TauBarSum(summands) => Term::TauBarSum(
                    summands
                        .iter()
                        .map(|(e, q)| (e.clone(), go_test(q, m)))
                        .collect(),
                ),
            }
        }
        fn go_test(q: &Test, m: &Term) -> Test {
            match q {
                Test::Sum(cs) => Test::Sum(cs.iter().map(|c| go_test(c, m)).collect()),
                Test::Prod(cs) => Test::Prod(cs.iter().map(|c| go_test(c, m)).collect()),
                Test::Tau(e, t) => Test::Tau(e.clone(), Box::new(go(t, m))),
            }
        }
        canon_term(&go(&self.0, m))
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shown = print::term_to_string(&self.0).replace(HOLE_NAME, "[.]");
        f.write_str(&shown)
    }
}

/// Total node count, used by generators and resource guards.
pub fn term_size(t: &Term) -> usize {
    match t {
        Term::Var(_) | Term::Jg(_, _) => 1,
        Term::Lam(_, b) => 1 + term_size(b),
        Term::App(f, a) => 1 + term_size(f) + term_size(a),
        Term::TauBarSum(s) => 1 + s.iter().map(|(_, q)| test_size(q)).sum::<usize>(),
    }
}

pub fn test_size(q: &Test) -> usize {
    match q {
        Test::Sum(cs) | Test::Prod(cs) => 1 + cs.iter().map(test_size).sum::<usize>(),
        Test::Tau(_, m) => 1 + term_size(m),
    }
}

pub fn expr_size(e: &Expr) -> usize {
    match e {
        Expr::Term(t) => term_size(t),
        Expr::Test(q) => test_size(q),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmodel::{BuiltinModel, Model};

    #[test]
    fn subst_examples() {
        // (\y. x)[z/x] = \y. z
        let t = Term::lam("y", Term::var("x"));
        assert_eq!(subst_term(&t, "x", &Term::var("z")), Term::lam("y", Term::var("z")));

        // (\z. x)[z/x] renames the binder
        let t = Term::lam("z", Term::var("x"));
        let s = subst_term(&t, "x", &Term::var("z"));
        assert_eq!(s, Term::lam("z'", Term::var("z")));
        assert!(alpha_eq_term(&s, &Term::lam("w", Term::var("z"))));

        // substitution descends into tests
        let p = Element::atom("p");
        let q = Test::tau(p.clone(), Term::app(Term::var("x"), Term::var("y")));
        let n = eps_bar_point(&Element::atom("q"));
        let s = subst_test(&q, "x", &n);
        assert_eq!(s, Test::tau(p, Term::app(n.clone(), Term::var("y"))));
    }

    #[test]
    fn subst_is_compositional() {
        // (M[N/x])[L/y] = M[L/y][N[L/y]/x] when x not free in L and x != y
        let m = Term::app(
            Term::var("x"),
            Term::lam("z", Term::app(Term::var("y"), Term::var("x"))),
        );
        let n = Term::app(Term::var("y"), Term::var("w"));
        let l = Term::lam("u", Term::var("u"));
        let lhs = subst_term(&subst_term(&m, "x", &n), "y", &l);
        let rhs = subst_term(
            &subst_term(&m, "y", &l),
            "x",
            &subst_term(&n, "y", &l),
        );
        assert!(alpha_eq_term(&lhs, &rhs));
    }

    #[test]
    fn fv_of_substitution_is_contained() {
        let m = Term::app(Term::var("x"), Term::lam("y", Term::var("x")));
        let n = Term::app(Term::var("a"), Term::var("b"));
        let s = subst_term(&m, "x", &n);
        let mut expected: BTreeSet<String> = free_vars_term(&m);
        expected.remove("x");
        expected.extend(free_vars_term(&n));
        assert!(free_vars_term(&s).is_subset(&expected));
    }

    #[test]
    fn alpha_examples() {
        assert!(alpha_eq_term(&Term::lam("x", Term::var("x")), &Term::lam("y", Term::var("y"))));
        let a = Term::lam("x", Term::lam("y", Term::var("x")));
        let b = Term::lam("y", Term::lam("x", Term::var("x")));
        assert!(!alpha_eq_term(&a, &b));
        // sums are multisets
        let p = Element::atom("p");
        let q = Element::atom("q");
        let s1 = Test::Sum(vec![Test::tau(p.clone(), Term::var("x")), Test::tau(q.clone(), Term::var("y"))]);
        let s2 = Test::Sum(vec![Test::tau(q, Term::var("y")), Test::tau(p, Term::var("x"))]);
        assert!(alpha_eq_test(&s1, &s2));
    }

    #[test]
    fn multiset_laws_hold_after_canonicalization() {
        let p = Test::tau(Element::atom("p"), Term::var("x"));
        let q = Test::tau(Element::atom("q"), Term::var("y"));
        let r = Test::tau(Element::atom("p"), Term::var("z"));
        let assoc_l = canon_test(&Test::Sum(vec![p.clone(), Test::Sum(vec![q.clone(), r.clone()])]));
        let assoc_r = canon_test(&Test::Sum(vec![Test::Sum(vec![p.clone(), q.clone()]), r.clone()]));
        assert_eq!(assoc_l, assoc_r);
        let unit = canon_test(&Test::Sum(vec![p.clone(), Test::zero()]));
        assert_eq!(unit, p);
        let prod_unit = canon_test(&Test::Prod(vec![q.clone(), Test::eps()]));
        assert_eq!(prod_unit, q);
    }

    #[test]
    fn eps_bar_shapes() {
        let norm = Model::builtin(&BuiltinModel::Norm).unwrap();
        assert_eq!(eps_bar(&Antichain::empty()), Term::zero());
        let a = norm.normalize_antichain(&[Element::atom("p")]).unwrap();
        assert_eq!(
            eps_bar(&a),
            Term::TauBarSum(vec![(Element::atom("p"), Test::eps())])
        );
        let two = Antichain::from_vec_unchecked(vec![Element::atom("p"), Element::atom("q")]);
        assert_eq!(eps_bar(&two).to_string(), "eb<{p,q}>");
    }

    #[test]
    fn build_g_binder_counts() {
        let g = GSpec::Const(1);
        let t = build_g(&g, 0);
        assert_eq!(
            t,
            Term::lam(
                "u",
                Term::lam(
                    "e",
                    Term::lam("x1", Term::app(Term::var("e"), Term::app(Term::var("u"), Term::var("x1"))))
                )
            )
        );
        assert!(free_vars_term(&t).is_empty());

        let zero = build_g(&GSpec::Const(0), 7);
        assert_eq!(zero, Term::lam("u", Term::lam("e", Term::var("e"))));

        let table = build_g(&GSpec::Table(vec![2, 3]), 1);
        let mut lams = 0;
        let mut cur = &table;
        while let Term::Lam(_, b) = cur {
            lams += 1;
            cur = b;
        }
        assert_eq!(lams, 3 + 2); // g(1) + 2
    }

    #[test]
    fn context_fill_is_literal() {
        // (\y. [.]) filled with y captures
        let c = Context(Term::lam("y", Context::hole().0));
        let filled = c.fill(&Term::var("y"));
        assert_eq!(filled, Term::lam("y", Term::var("y")));
    }

    #[test]
    fn theta_and_church_shapes() {
        assert_eq!(church(0), Term::lam("f", Term::lam("x", Term::var("x"))));
        assert!(free_vars_term(&theta()).is_empty());
        assert!(combinator("I").is_some());
        assert!(combinator("K").is_none());
    }
}
