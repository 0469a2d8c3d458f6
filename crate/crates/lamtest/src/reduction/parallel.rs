//! Parallel reduction: the deterministic maximal parallel reduct, a
//! bounded enumerator of one-step parallel reducts, and a rule-directed
//! decision procedure for the one-step parallel relation.
//!
//! The decision procedure matches the target against the source shape,
//! carrying a pending substitution environment for redexes whose
//! contracta substitute (beta and the tau rule). Multiset nodes are
//! matched by assigning target summands to source summands and recursing
//! on the fibers; products are matched both without distribution and
//! under the full distribution of their sum factors.

use std::collections::{BTreeMap, HashMap};

use super::{EngineError, Result};
use crate::kmodel::{Antichain, Element, Model};
use crate::syntax::{
    alpha_eq_term, alpha_key_term, alpha_key_test, build_g, canon_expr, canon_term, canon_test,
    eps_bar, subst_term, subst_term_many, Expr, Term, TermKey, Test, TestKey,
};

// ---------------------------------------------------------------------------
// maximal parallel reduct

/// The maximal parallel reduct: every visible redex fires at once, with
/// sums distributed out of products and tau-bar operators.
pub fn full_parallel_reduct(model: &Model, e: &Expr) -> Result<Expr> {
    let out = match e {
        Expr::Term(t) => Expr::Term(fpr_term(model, t)?),
        Expr::Test(q) => Expr::Test(fpr_test(model, q)?),
    };
    Ok(canon_expr(&out))
}

fn fpr_term(model: &Model, t: &Term) -> Result<Term> {
    match t {
        Term::Var(_) => Ok(t.clone()),
        Term::Jg(g, n) => Ok(Term::app(build_g(g, *n), Term::Jg(g.clone(), n + 1))),
        Term::Lam(x, b) => Ok(Term::Lam(x.clone(), Box::new(fpr_term(model, b)?))),
        Term::App(f, a) => match &**f {
            Term::Lam(x, b) => {
                let b2 = fpr_term(model, b)?;
                let a2 = fpr_term(model, a)?;
                Ok(subst_term(&b2, x, &a2))
            }
            Term::TauBarSum(s) => {
                let a2 = fpr_term(model, a)?;
                let mut out = Vec::new();
                for (point, q) in s {
                    let (head, tail) = model.unfold1(point)?;
                    let image = canon_test(&fpr_test(model, q)?);
                    let mut parts = image.sum_parts();
                    if parts.is_empty() {
                        // a summand whose body collapsed still leaves a dead
                        // product behind one application step; keep it so
                        // one-step forks rejoin in a single parallel step
                        parts.push(Test::zero());
                    }
                    for part in parts {
                        let mut factors = vec![part];
                        for g in head.iter() {
                            factors.push(Test::tau(g.clone(), a2.clone()));
                        }
                        out.push((tail.clone(), Test::Prod(factors)));
                    }
                }
                Ok(Term::TauBarSum(out))
            }
            _ => Ok(Term::App(
                Box::new(fpr_term(model, f)?),
                Box::new(fpr_term(model, a)?),
            )),
        },
        Term::TauBarSum(s) => {
            let mut out = Vec::new();
            for (point, q) in s {
                for part in q.sum_parts() {
                    out.push((point.clone(), fpr_test(model, &part)?));
                }
            }
            Ok(Term::TauBarSum(out))
        }
    }
}

fn fpr_test(model: &Model, q: &Test) -> Result<Test> {
    match q {
        Test::Tau(point, m) => match &**m {
            Term::Lam(x, b) => {
                let (head, tail) = model.unfold1(point)?;
                let b2 = fpr_term(model, b)?;
                Ok(Test::Tau(tail, Box::new(subst_term(&b2, x, &eps_bar(&head)))))
            }
            Term::TauBarSum(s) => {
                let mut kept = Vec::new();
                for (beta, body) in s {
                    if model.leq(point, beta)? {
                        kept.push(fpr_test(model, body)?);
                    }
                }
                Ok(Test::Sum(kept))
            }
            _ => Ok(Test::Tau(point.clone(), Box::new(fpr_term(model, m)?))),
        },
        Test::Sum(cs) => Ok(Test::Sum(
            cs.iter().map(|c| fpr_test(model, c)).collect::<Result<Vec<_>>>()?,
        )),
        Test::Prod(cs) => {
            let mut tuples: Vec<Vec<Test>> = vec![Vec::new()];
            for c in cs {
                let parts = c.sum_parts();
                let mut next = Vec::new();
                for tuple in &tuples {
                    for p in &parts {
                        let mut t2 = tuple.clone();
                        t2.push(fpr_test(model, p)?);
                        next.push(t2);
                    }
                }
                tuples = next;
            }
            Ok(Test::Sum(tuples.into_iter().map(Test::Prod).collect()))
        }
    }
}

// ---------------------------------------------------------------------------
// bounded enumeration of one-step parallel reducts

struct EnumCtx<'m> {
    model: &'m Model,
    cap: usize,
}

fn dedup_terms(v: Vec<Term>) -> Vec<Term> {
    let mut seen = HashMap::new();
    let mut out = Vec::new();
    for t in v {
        let k = alpha_key_term(&t);
        if seen.insert(k, ()).is_none() {
            out.push(t);
        }
    }
    out
}

fn dedup_tests(v: Vec<Test>) -> Vec<Test> {
    let mut seen = HashMap::new();
    let mut out = Vec::new();
    for t in v {
        let k = alpha_key_test(&t);
        if seen.insert(k, ()).is_none() {
            out.push(t);
        }
    }
    out
}

fn guard(cx: &EnumCtx, n: usize) -> Result<()> {
    if n > cx.cap {
        return Err(EngineError::StateCap(cx.cap));
    }
    Ok(())
}

/// All one-step parallel reducts, up to a cap. Sum distributions are
/// enumerated at the finest grain only; the decision procedure, not this
/// enumerator, is the arbiter of the relation.
pub fn parallel_reducts(model: &Model, e: &Expr, cap: usize) -> Result<Vec<Expr>> {
    let cx = EnumCtx { model, cap };
    Ok(match e {
        Expr::Term(t) => pe_term(&cx, t)?
            .into_iter()
            .map(|t| canon_expr(&Expr::Term(t)))
            .collect(),
        Expr::Test(q) => pe_test(&cx, q)?
            .into_iter()
            .map(|q| canon_expr(&Expr::Test(q)))
            .collect(),
    })
}

fn pe_term(cx: &EnumCtx, t: &Term) -> Result<Vec<Term>> {
    let out = match t {
        Term::Var(_) => vec![t.clone()],
        Term::Jg(g, n) => vec![
            t.clone(),
            Term::app(build_g(g, *n), Term::Jg(g.clone(), n + 1)),
        ],
        Term::Lam(x, b) => pe_term(cx, b)?
            .into_iter()
            .map(|b2| Term::Lam(x.clone(), Box::new(b2)))
            .collect(),
        Term::App(f, a) => {
            let fs = pe_term(cx, f)?;
            let args = pe_term(cx, a)?;
            let mut out = Vec::new();
            for f2 in &fs {
                for a2 in &args {
                    out.push(Term::App(Box::new(f2.clone()), Box::new(a2.clone())));
                    guard(cx, out.len())?;
                }
            }
            if let Term::Lam(x, b) = &**f {
                for b2 in pe_term(cx, b)? {
                    for a2 in &args {
                        out.push(subst_term(&b2, x, a2));
                        guard(cx, out.len())?;
                    }
                }
            }
            if let Term::TauBarSum(s) = &**f {
                // per summand choose a body image; its sum parts fan out
                let mut per_summand: Vec<Vec<Vec<(Element, Test)>>> = Vec::new();
                for (point, q) in s {
                    let (head, tail) = cx.model.unfold1(point)?;
                    let mut options = Vec::new();
                    for img in pe_test(cx, q)? {
                        let img = canon_test(&img);
                        let mut entries = Vec::new();
                        for part in img.sum_parts() {
                            let mut factors = vec![part];
                            for g in head.iter() {
                                factors.push(Test::tau(g.clone(), Term::var("?")));
                            }
                            entries.push((tail.clone(), Test::Prod(factors)));
                        }
                        options.push(entries);
                    }
                    per_summand.push(dedup_entryset(options));
                }
                let mut sums: Vec<Vec<(Element, Test)>> = vec![Vec::new()];
                for options in &per_summand {
                    let mut next = Vec::new();
                    for acc in &sums {
                        for opt in options {
                            let mut acc2 = acc.clone();
                            acc2.extend(opt.clone());
                            next.push(acc2);
                        }
                    }
                    sums = next;
                    guard(cx, sums.len())?;
                }
                for a2 in &args {
                    for entries in &sums {
                        let filled: Vec<(Element, Test)> = entries
                            .iter()
                            .map(|(pt, q)| (pt.clone(), fill_arg(q, a2)))
                            .collect();
                        out.push(Term::TauBarSum(filled));
                        guard(cx, out.len())?;
                    }
                }
            }
            out
        }
        Term::TauBarSum(s) => {
            let mut per_entry: Vec<Vec<Vec<(Element, Test)>>> = Vec::new();
            for (point, q) in s {
                let mut options: Vec<Vec<(Element, Test)>> = pe_test(cx, q)?
                    .into_iter()
                    .map(|q2| vec![(point.clone(), q2)])
                    .collect();
                if let Test::Sum(parts) = q {
                    // finest distribution: one tau-bar per part
                    let mut distributed: Vec<Vec<(Element, Test)>> = vec![Vec::new()];
                    for p in parts {
                        let imgs = pe_test(cx, p)?;
                        let mut next = Vec::new();
                        for acc in &distributed {
                            for img in &imgs {
                                let mut acc2 = acc.clone();
                                acc2.push((point.clone(), img.clone()));
                                next.push(acc2);
                            }
                        }
                        distributed = next;
                        guard(cx, distributed.len())?;
                    }
                    options.extend(distributed);
                }
                per_entry.push(dedup_entryset(options));
            }
            let mut sums: Vec<Vec<(Element, Test)>> = vec![Vec::new()];
            for options in &per_entry {
                let mut next = Vec::new();
                for acc in &sums {
                    for opt in options {
                        let mut acc2 = acc.clone();
                        acc2.extend(opt.clone());
                        next.push(acc2);
                    }
                }
                sums = next;
                guard(cx, sums.len())?;
            }
            sums.into_iter().map(Term::TauBarSum).collect()
        }
    };
    Ok(dedup_terms(out.into_iter().map(|t| canon_term(&t)).collect()))
}

fn dedup_entryset(v: Vec<Vec<(Element, Test)>>) -> Vec<Vec<(Element, Test)>> {
    let mut seen = HashMap::new();
    let mut out = Vec::new();
    for entries in v {
        let key: Vec<(Element, TestKey)> = {
            let mut k: Vec<_> = entries
                .iter()
                .map(|(e, q)| (e.clone(), alpha_key_test(q)))
                .collect();
            k.sort();
            k
        };
        if seen.insert(key, ()).is_none() {
            out.push(entries);
        }
    }
    out
}

/// The tau-bar application rule shares one argument image across every
/// summand; entries are built with a placeholder first and filled here.
fn fill_arg(q: &Test, arg: &Term) -> Test {
    match q {
        Test::Sum(cs) => Test::Sum(cs.iter().map(|c| fill_arg(c, arg)).collect()),
        Test::Prod(cs) => Test::Prod(cs.iter().map(|c| fill_arg(c, arg)).collect()),
        Test::Tau(e, m) => match &**m {
            Term::Var(v) if v == "?" => Test::Tau(e.clone(), Box::new(arg.clone())),
            _ => q.clone(),
        },
    }
}

fn pe_test(cx: &EnumCtx, q: &Test) -> Result<Vec<Test>> {
    let out = match q {
        Test::Tau(point, m) => {
            let mut out: Vec<Test> = pe_term(cx, m)?
                .into_iter()
                .map(|m2| Test::Tau(point.clone(), Box::new(m2)))
                .collect();
            if let Term::Lam(x, b) = &**m {
                let (head, tail) = cx.model.unfold1(point)?;
                let eb = eps_bar(&head);
                for b2 in pe_term(cx, b)? {
                    out.push(Test::Tau(tail.clone(), Box::new(subst_term(&b2, x, &eb))));
                }
            }
            if let Term::TauBarSum(s) = &**m {
                let mut kept_options: Vec<Vec<Test>> = vec![Vec::new()];
                for (beta, body) in s {
                    if cx.model.leq(point, beta)? {
                        let imgs = pe_test(cx, body)?;
                        let mut next = Vec::new();
                        for acc in &kept_options {
                            for img in &imgs {
                                let mut acc2 = acc.clone();
                                acc2.push(img.clone());
                                next.push(acc2);
                            }
                        }
                        kept_options = next;
                        guard(cx, kept_options.len())?;
                    }
                }
                out.extend(kept_options.into_iter().map(Test::Sum));
            }
            out
        }
        Test::Sum(cs) => {
            let mut sums: Vec<Vec<Test>> = vec![Vec::new()];
            for c in cs {
                let imgs = pe_test(cx, c)?;
                let mut next = Vec::new();
                for acc in &sums {
                    for img in &imgs {
                        let mut acc2 = acc.clone();
                        acc2.push(img.clone());
                        next.push(acc2);
                    }
                }
                sums = next;
                guard(cx, sums.len())?;
            }
            sums.into_iter().map(Test::Sum).collect()
        }
        Test::Prod(cs) => {
            let mut out = Vec::new();
            // factor-wise images, no distribution
            let mut prods: Vec<Vec<Test>> = vec![Vec::new()];
            for c in cs {
                let imgs = pe_test(cx, c)?;
                let mut next = Vec::new();
                for acc in &prods {
                    for img in &imgs {
                        let mut acc2 = acc.clone();
                        acc2.push(img.clone());
                        next.push(acc2);
                    }
                }
                prods = next;
                guard(cx, prods.len())?;
            }
            out.extend(prods.into_iter().map(Test::Prod));
            // full distribution at the finest grain: one image is chosen
            // per summand and shared across every tuple it lands in
            if cs.iter().any(|c| matches!(c, Test::Sum(_))) {
                let mut factor_choices: Vec<Vec<Vec<Test>>> = Vec::new();
                for c in cs {
                    let mut choices: Vec<Vec<Test>> = vec![Vec::new()];
                    for p in c.sum_parts() {
                        let imgs = pe_test(cx, &p)?;
                        let mut next = Vec::new();
                        for acc in &choices {
                            for img in &imgs {
                                let mut acc2 = acc.clone();
                                acc2.push(img.clone());
                                next.push(acc2);
                            }
                        }
                        choices = next;
                        guard(cx, choices.len())?;
                    }
                    factor_choices.push(choices);
                }
                let mut combos: Vec<Vec<&Vec<Test>>> = vec![Vec::new()];
                for choices in &factor_choices {
                    let mut next = Vec::new();
                    for acc in &combos {
                        for choice in choices {
                            let mut acc2 = acc.clone();
                            acc2.push(choice);
                            next.push(acc2);
                        }
                    }
                    combos = next;
                    guard(cx, combos.len())?;
                }
                for combo in combos {
                    let mut tuples: Vec<Vec<Test>> = vec![Vec::new()];
                    for images in &combo {
                        let mut next = Vec::new();
                        for tuple in &tuples {
                            for img in images.iter() {
                                let mut t2 = tuple.clone();
                                t2.push(img.clone());
                                next.push(t2);
                            }
                        }
                        tuples = next;
                        guard(cx, tuples.len())?;
                    }
                    out.push(Test::Sum(tuples.into_iter().map(Test::Prod).collect()));
                }
            }
            out
        }
    };
    Ok(dedup_tests(out.into_iter().map(|q| canon_test(&q)).collect()))
}

// ---------------------------------------------------------------------------
// the decision procedure

type Subst = BTreeMap<String, Term>;
type SubstKey = Vec<(String, TermKey)>;

#[derive(Clone, Copy, PartialEq)]
enum MemoState {
    InProgress,
    Done(bool),
}

struct MatchCtx<'m> {
    model: &'m Model,
    memo_t: HashMap<(TermKey, SubstKey, TermKey), MemoState>,
    memo_q: HashMap<(TestKey, SubstKey, TestKey), MemoState>,
    /// Key of the instantiated source, per (source, substitution).
    inst_t: HashMap<(TermKey, SubstKey), TermKey>,
    inst_q: HashMap<(TestKey, SubstKey), TestKey>,
    /// Parallel reducts of argument positions.
    args: HashMap<TermKey, Vec<Term>>,
    /// Tuple-vs-image outcomes, shared across product decompositions.
    pairs: HashMap<(Vec<Vec<TestKey>>, SubstKey, TestKey), bool>,
    budget: usize,
    fresh: usize,
    arg_cap: usize,
}

impl<'m> MatchCtx<'m> {
    fn tick(&mut self) -> Result<()> {
        if self.budget == 0 {
            return Err(EngineError::StateCap(0));
        }
        self.budget -= 1;
        Ok(())
    }

    fn fresh_var(&mut self) -> String {
        self.fresh += 1;
        format!("#{}", self.fresh)
    }
}

fn subst_key(s: &Subst) -> SubstKey {
    s.iter().map(|(k, v)| (k.clone(), alpha_key_term(v))).collect()
}

/// Decides whether `from` reduces to `to` in one parallel step. The
/// relation is reflexive and contains every single full-reduction step.
pub fn par_reduces(model: &Model, from: &Expr, to: &Expr) -> Result<bool> {
    let mut cx = MatchCtx {
        model,
        memo_t: HashMap::new(),
        memo_q: HashMap::new(),
        inst_t: HashMap::new(),
        inst_q: HashMap::new(),
        args: HashMap::new(),
        pairs: HashMap::new(),
        budget: 5_000_000,
        fresh: 0,
        arg_cap: 4096,
    };
    let from = canon_expr(from);
    let to = canon_expr(to);
    let empty = Subst::new();
    match (&from, &to) {
        (Expr::Term(a), Expr::Term(b)) => rs_term(&mut cx, a, &empty, b),
        (Expr::Test(a), Expr::Test(b)) => rs_test(&mut cx, a, &empty, b),
        _ => Ok(false),
    }
}

fn instantiate(t: &Term, sigma: &Subst) -> Term {
    if sigma.is_empty() {
        t.clone()
    } else {
        subst_term_many(t, sigma)
    }
}

fn rs_term(cx: &mut MatchCtx, from: &Term, sigma: &Subst, to: &Term) -> Result<bool> {
    cx.tick()?;
    let key = (alpha_key_term(from), subst_key(sigma), alpha_key_term(to));
    match cx.memo_t.get(&key) {
        Some(MemoState::Done(hit)) => return Ok(*hit),
        // a cyclic premise proves nothing on its own
        Some(MemoState::InProgress) => return Ok(false),
        None => {}
    }
    // reflexivity shortcut: the instantiated source is the target
    let ikey = (key.0.clone(), key.1.clone());
    let inst = match cx.inst_t.get(&ikey) {
        Some(k) => k.clone(),
        None => {
            let k = alpha_key_term(&instantiate(from, sigma));
            cx.inst_t.insert(ikey, k.clone());
            k
        }
    };
    if inst == key.2 {
        cx.memo_t.insert(key, MemoState::Done(true));
        return Ok(true);
    }
    cx.memo_t.insert(key.clone(), MemoState::InProgress);
    let out = rs_term_inner(cx, from, sigma, to)?;
    cx.memo_t.insert(key, MemoState::Done(out));
    Ok(out)
}

fn rs_term_inner(cx: &mut MatchCtx, from: &Term, sigma: &Subst, to: &Term) -> Result<bool> {
    match from {
        Term::Var(x) => Ok(match sigma.get(x) {
            Some(v) => alpha_eq_term(v, to),
            None => matches!(to, Term::Var(y) if y == x),
        }),
        Term::Jg(g, n) => {
            let unfolded = canon_term(&Term::app(build_g(g, *n), Term::Jg(g.clone(), n + 1)));
            Ok(alpha_eq_term(to, &Term::Jg(g.clone(), *n)) || alpha_eq_term(to, &unfolded))
        }
        Term::Lam(x, b) => {
            let Term::Lam(y, c) = to else { return Ok(false) };
            let z = cx.fresh_var();
            let b2 = subst_term(b, x, &Term::var(z.clone()));
            let c2 = subst_term(c, y, &Term::var(z));
            rs_term(cx, &b2, sigma, &c2)
        }
        Term::App(f, a) => {
            // keep the application shape
            if let Term::App(f2, a2) = to {
                if rs_term(cx, f, sigma, f2)? && rs_term(cx, a, sigma, a2)? {
                    return Ok(true);
                }
            }
            // contract a beta redex
            if let Term::Lam(x, b) = &**f {
                for image in arg_images(cx, a, sigma)? {
                    let z = cx.fresh_var();
                    let b2 = subst_term(b, x, &Term::var(z.clone()));
                    let mut sigma2 = sigma.clone();
                    sigma2.insert(z, image);
                    if rs_term(cx, &b2, &sigma2, to)? {
                        return Ok(true);
                    }
                }
            }
            // contract a tau-bar application
            if let Term::TauBarSum(s) = &**f {
                if rs_tbar_app(cx, s, a, sigma, to)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Term::TauBarSum(s) => {
            let Term::TauBarSum(gs) = to else { return Ok(false) };
            let sources: Vec<(Element, Test)> = s.clone();
            let targets: Vec<(Element, Test)> = gs.clone();
            assign_entries(cx, sigma, &sources, &targets, &mut |cx, sigma, q, fiber| {
                tbar_entry_ok(cx, sigma, q, fiber)
            })
        }
    }
}

/// Images of an argument position: every parallel reduct, instantiated.
fn arg_images(cx: &mut MatchCtx, a: &Term, sigma: &Subst) -> Result<Vec<Term>> {
    let key = alpha_key_term(a);
    let reducts = match cx.args.get(&key) {
        Some(r) => r.clone(),
        None => {
            let r = pe_term(&EnumCtx { model: cx.model, cap: cx.arg_cap }, a)?;
            cx.args.insert(key, r.clone());
            r
        }
    };
    Ok(dedup_terms(
        reducts.into_iter().map(|r| instantiate(&r, sigma)).collect(),
    ))
}

/// `(sum of tau-bars) arg ==> to`: one argument image is shared by every
/// summand; each target entry is produced by one source summand, whose
/// body evolves into the entry bodies after the tau factors over the
/// unfolded head are peeled off.
fn rs_tbar_app(
    cx: &mut MatchCtx,
    s: &[(Element, Test)],
    arg: &Term,
    sigma: &Subst,
    to: &Term,
) -> Result<bool> {
    let Term::TauBarSum(gs) = to else { return Ok(false) };
    let mut unfolded = Vec::with_capacity(s.len());
    for (point, q) in s {
        let (head, tail) = cx.model.unfold1(point)?;
        unfolded.push((head, tail, q.clone()));
    }
    let candidates: Vec<Term> = if unfolded.iter().all(|(h, _, _)| h.is_empty()) {
        vec![instantiate(arg, sigma)]
    } else {
        arg_images(cx, arg, sigma)?
    };
    for image in candidates {
        let sources: Vec<(Element, Test)> = unfolded
            .iter()
            .map(|(_, tail, q)| (tail.clone(), q.clone()))
            .collect();
        let heads: Vec<&Antichain> = unfolded.iter().map(|(h, _, _)| h).collect();
        // peel the expected tau factors per target entry before matching
        let ok = assign_entries_indexed(cx, sigma, &sources, gs, &mut |cx, sigma, i, fiber| {
            let mut remainders = Vec::with_capacity(fiber.len());
            for body in fiber {
                match peel_tau_factors(body, heads[i], &image) {
                    Some(rest) => remainders.push(rest),
                    None => return Ok(false),
                }
            }
            let target = canon_test(&Test::Sum(remainders));
            rs_test(cx, &sources[i].1, sigma, &target)
        })?;
        if ok {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Removes one `tau<g>(image)` factor per head member from a product body.
fn peel_tau_factors(body: &Test, head: &Antichain, image: &Term) -> Option<Test> {
    let mut factors = body.prod_parts();
    for g in head.iter() {
        let wanted = canon_test(&Test::tau(g.clone(), image.clone()));
        let wanted_key = alpha_key_test(&wanted);
        let at = factors.iter().position(|f| alpha_key_test(f) == wanted_key)?;
        factors.remove(at);
    }
    Some(canon_test(&Test::Prod(factors)))
}

/// A multiset of tests grouped by skeleton, counts positive.
fn to_kinds(items: &[Test]) -> Vec<(Test, usize)> {
    let mut kinds: Vec<(TestKey, Test, usize)> = Vec::new();
    for t in items {
        let k = alpha_key_test(t);
        match kinds.iter_mut().find(|(key, _, _)| *key == k) {
            Some((_, _, c)) => *c += 1,
            None => kinds.push((k, t.clone(), 1)),
        }
    }
    kinds.sort_by(|a, b| a.0.cmp(&b.0));
    kinds.into_iter().map(|(_, t, c)| (t, c)).collect()
}

fn expand(kinds: &[(Test, usize)], counts: &[usize]) -> Vec<Test> {
    let mut out = Vec::new();
    for ((t, _), c) in kinds.iter().zip(counts) {
        for _ in 0..*c {
            out.push(t.clone());
        }
    }
    out
}

/// Distributes a multiset among slots: every item lands in exactly one
/// slot and `check(slot, chosen)` accepts each slot's share. Identical
/// items are interchangeable, and completability from a (slot, remainder)
/// state is memoized, so repeated parts do not blow the search up.
struct Distributor<'k> {
    kinds: &'k [(Test, usize)],
    n_slots: usize,
    memo: HashMap<(usize, Vec<usize>), bool>,
}

impl<'k> Distributor<'k> {
    fn run(
        cx: &mut MatchCtx,
        kinds: &'k [(Test, usize)],
        n_slots: usize,
        check: &mut dyn FnMut(&mut MatchCtx, usize, &[Test]) -> Result<bool>,
    ) -> Result<bool> {
        if n_slots == 0 {
            return Ok(kinds.iter().all(|(_, c)| *c == 0));
        }
        let mut d = Distributor { kinds, n_slots, memo: HashMap::new() };
        let mut remaining: Vec<usize> = kinds.iter().map(|(_, c)| *c).collect();
        d.slot(cx, 0, &mut remaining, check)
    }

    fn slot(
        &mut self,
        cx: &mut MatchCtx,
        s: usize,
        remaining: &mut Vec<usize>,
        check: &mut dyn FnMut(&mut MatchCtx, usize, &[Test]) -> Result<bool>,
    ) -> Result<bool> {
        cx.tick()?;
        if s == self.n_slots - 1 {
            let chosen = expand(self.kinds, remaining);
            return check(cx, s, &chosen);
        }
        let key = (s, remaining.clone());
        if let Some(&hit) = self.memo.get(&key) {
            return Ok(hit);
        }
        let mut counts = vec![0usize; self.kinds.len()];
        let out = self.choose(cx, s, 0, remaining, &mut counts, check)?;
        self.memo.insert(key, out);
        Ok(out)
    }

    fn choose(
        &mut self,
        cx: &mut MatchCtx,
        s: usize,
        k: usize,
        remaining: &mut Vec<usize>,
        counts: &mut Vec<usize>,
        check: &mut dyn FnMut(&mut MatchCtx, usize, &[Test]) -> Result<bool>,
    ) -> Result<bool> {
        if k == self.kinds.len() {
            let chosen = expand(self.kinds, counts);
            if check(cx, s, &chosen)? {
                for i in 0..remaining.len() {
                    remaining[i] -= counts[i];
                }
                let ok = self.slot(cx, s + 1, remaining, check)?;
                for i in 0..remaining.len() {
                    remaining[i] += counts[i];
                }
                return Ok(ok);
            }
            return Ok(false);
        }
        for c in 0..=remaining[k] {
            counts[k] = c;
            if self.choose(cx, s, k + 1, remaining, counts, check)? {
                return Ok(true);
            }
        }
        counts[k] = 0;
        Ok(false)
    }
}

/// Assigns each target entry to a source entry with the same point, then
/// checks every source against its fiber of target bodies. Points split
/// the problem into independent groups.
fn assign_entries(
    cx: &mut MatchCtx,
    sigma: &Subst,
    sources: &[(Element, Test)],
    targets: &[(Element, Test)],
    check: &mut impl FnMut(&mut MatchCtx, &Subst, &Test, &[Test]) -> Result<bool>,
) -> Result<bool> {
    assign_entries_indexed(cx, sigma, sources, targets, &mut |cx, sigma, i, fiber| {
        check(cx, sigma, &sources[i].1, fiber)
    })
}

fn assign_entries_indexed(
    cx: &mut MatchCtx,
    sigma: &Subst,
    sources: &[(Element, Test)],
    targets: &[(Element, Test)],
    check: &mut impl FnMut(&mut MatchCtx, &Subst, usize, &[Test]) -> Result<bool>,
) -> Result<bool> {
    let mut points: Vec<&Element> = sources.iter().map(|(p, _)| p).collect();
    points.sort();
    points.dedup();
    for (pt, _) in targets {
        if !points.contains(&pt) {
            return Ok(false);
        }
    }
    for pt in points {
        let idx: Vec<usize> = sources
            .iter()
            .enumerate()
            .filter(|(_, (p, _))| p == pt)
            .map(|(i, _)| i)
            .collect();
        let bodies: Vec<Test> = targets
            .iter()
            .filter(|(p, _)| p == pt)
            .map(|(_, q)| q.clone())
            .collect();
        let kinds = to_kinds(&bodies);
        let ok = Distributor::run(cx, &kinds, idx.len(), &mut |cx, slot, chosen| {
            check(cx, sigma, idx[slot], chosen)
        })?;
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A tau-bar entry's body against its fiber of target bodies: the body's
/// summands split into one group per target body, and each group, read as
/// a sum, must reduce to its body. An empty group only matches a target
/// the empty sum reduces to.
fn tbar_entry_ok(cx: &mut MatchCtx, sigma: &Subst, q: &Test, fiber: &[Test]) -> Result<bool> {
    let parts = q.sum_parts();
    if fiber.is_empty() {
        return Ok(parts.is_empty());
    }
    let kinds = to_kinds(&parts);
    let fiber = fiber.to_vec();
    Distributor::run(cx, &kinds, fiber.len(), &mut |cx, slot, chosen| {
        let group = canon_test(&Test::Sum(chosen.to_vec()));
        rs_test(cx, &group, sigma, &fiber[slot])
    })
}

fn rs_test(cx: &mut MatchCtx, from: &Test, sigma: &Subst, to: &Test) -> Result<bool> {
    cx.tick()?;
    let key = (alpha_key_test(from), subst_key(sigma), alpha_key_test(to));
    match cx.memo_q.get(&key) {
        Some(MemoState::Done(hit)) => return Ok(*hit),
        Some(MemoState::InProgress) => return Ok(false),
        None => {}
    }
    let ikey = (key.0.clone(), key.1.clone());
    let inst = match cx.inst_q.get(&ikey) {
        Some(k) => k.clone(),
        None => {
            let k = if sigma.is_empty() {
                key.0.clone()
            } else {
                alpha_key_test(&crate::syntax::subst_test_many(from, sigma))
            };
            cx.inst_q.insert(ikey, k.clone());
            k
        }
    };
    if inst == key.2 {
        cx.memo_q.insert(key, MemoState::Done(true));
        return Ok(true);
    }
    cx.memo_q.insert(key.clone(), MemoState::InProgress);
    let out = rs_test_inner(cx, from, sigma, to)?;
    cx.memo_q.insert(key, MemoState::Done(out));
    Ok(out)
}

fn rs_test_inner(cx: &mut MatchCtx, from: &Test, sigma: &Subst, to: &Test) -> Result<bool> {
    if rs_test_direct(cx, from, sigma, to)? {
        return Ok(true);
    }
    // the unit product is neutral, so any test also reads as a product
    // with one invisible eps factor, and that factor can distribute; only
    // targets shaped by a distribution can need this reading
    let needs_virtual_factor = |to: &Test| {
        matches!(to, Test::Sum(_)) || to.prod_parts().iter().any(Test::is_zero)
    };
    if !matches!(from, Test::Prod(_)) && !from.is_zero() && needs_virtual_factor(to) {
        let mut fs = from.prod_parts();
        fs.push(Test::eps());
        if rs_prod(cx, sigma, &fs, to)? {
            return Ok(true);
        }
    }
    Ok(false)
}

fn rs_test_direct(cx: &mut MatchCtx, from: &Test, sigma: &Subst, to: &Test) -> Result<bool> {
    match from {
        Test::Tau(point, m) => {
            // keep the tau node
            if let Test::Tau(pt2, m2) = to {
                if pt2 == point && rs_term(cx, m, sigma, m2)? {
                    return Ok(true);
                }
            }
            // unfold the point against an abstraction
            if let Term::Lam(x, b) = &**m {
                let (head, tail) = cx.model.unfold1(point)?;
                if let Test::Tau(pt2, c) = to {
                    if *pt2 == tail {
                        let z = cx.fresh_var();
                        let b2 = subst_term(b, x, &Term::var(z.clone()));
                        let mut sigma2 = sigma.clone();
                        sigma2.insert(z, eps_bar(&head));
                        if rs_term(cx, &b2, &sigma2, c)? {
                            return Ok(true);
                        }
                    }
                }
            }
            // select the dominating summands
            if let Term::TauBarSum(s) = &**m {
                let mut kept = Vec::new();
                for (beta, body) in s {
                    if cx.model.leq(point, beta)? {
                        kept.push(body.clone());
                    }
                }
                let targets = to.sum_parts();
                if assign_fibers(cx, sigma, &kept, &targets)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Test::Sum(cs) => {
            let targets = to.sum_parts();
            assign_fibers(cx, sigma, cs, &targets)
        }
        Test::Prod(fs) => {
            if rs_prod(cx, sigma, fs, to)? {
                return Ok(true);
            }
            let mut padded = fs.clone();
            padded.push(Test::eps());
            rs_prod(cx, sigma, &padded, to)
        }
    }
}

/// Each target part is produced by exactly one source; a source's fiber,
/// read as a sum, is its image. Unit sources are deterministic — `eps`
/// only reduces to itself and the empty sum only to nothing — so their
/// fibers are forced and cancelled up front.
fn assign_fibers(cx: &mut MatchCtx, sigma: &Subst, sources: &[Test], targets: &[Test]) -> Result<bool> {
    let mut live_sources: Vec<Test> = Vec::new();
    let mut targets: Vec<Test> = targets.to_vec();
    for s in sources {
        if s.is_zero() {
            continue;
        }
        if s.is_eps() {
            match targets.iter().position(Test::is_eps) {
                Some(i) => {
                    targets.swap_remove(i);
                }
                None => return Ok(false),
            }
            continue;
        }
        live_sources.push(s.clone());
    }
    if live_sources.is_empty() {
        return Ok(targets.is_empty());
    }
    let kinds = to_kinds(&targets);
    Distributor::run(cx, &kinds, live_sources.len(), &mut |cx, slot, chosen| {
        let image = canon_test(&Test::Sum(chosen.to_vec()));
        rs_test(cx, &live_sources[slot], sigma, &image)
    })
}

/// Products match either without distribution or under distribution; each
/// factor independently stays whole or splits into its summands, so both
/// modes and their mixtures are covered by one group choice per factor.
/// Because the empty sum is neutral, a factor also decomposes with extra
/// empty groups (`q = q + 0`), which show up as zero factors after
/// distribution.
fn rs_prod(cx: &mut MatchCtx, sigma: &Subst, fs: &[Test], to: &Test) -> Result<bool> {
    let to_parts = to.sum_parts();
    // per factor: one group (the factor itself) or one group per summand,
    // each optionally padded with empty groups
    let pad_max = to_parts.len().min(2);
    let mut options: Vec<Vec<Vec<Vec<Test>>>> = Vec::new();
    for f in fs {
        let mut bases: Vec<Vec<Vec<Test>>> = vec![vec![f.sum_parts()]];
        if let Test::Sum(parts) = f {
            let fine: Vec<Vec<Test>> = parts.iter().map(|p| vec![p.clone()]).collect();
            if fine.len() != 1 {
                bases.push(fine);
            }
        }
        let mut opts = Vec::new();
        for base in bases {
            for pad in 0..=pad_max {
                let mut padded = base.clone();
                for _ in 0..pad {
                    padded.push(Vec::new());
                }
                opts.push(padded);
            }
        }
        options.push(opts);
    }
    let mut combo = vec![0usize; fs.len()];
    loop {
        cx.tick()?;
        let groups_per_factor: Vec<&Vec<Vec<Test>>> = combo
            .iter()
            .enumerate()
            .map(|(i, &c)| &options[i][c])
            .collect();
        let mut tuple_count = 1usize;
        for g in &groups_per_factor {
            tuple_count = tuple_count.saturating_mul(g.len());
        }
        if tuple_count <= 128 {
            let mut tuples: Vec<Vec<Vec<Test>>> = vec![Vec::new()];
            for g in &groups_per_factor {
                let mut next = Vec::new();
                for t in &tuples {
                    for group in g.iter() {
                        let mut t2 = t.clone();
                        t2.push(group.clone());
                        next.push(t2);
                    }
                }
                tuples = next;
            }
            if match_tuples(cx, sigma, &tuples, &to_parts)? {
                return Ok(true);
            }
        }
        // next combo
        let mut i = 0;
        loop {
            if i == combo.len() {
                return Ok(false);
            }
            combo[i] += 1;
            if combo[i] < options[i].len() {
                break;
            }
            combo[i] = 0;
            i += 1;
        }
    }
}

/// Each target part is produced by exactly one tuple; a tuple's fiber,
/// read as a sum, is its image. Tuples with empty fibers must be able to
/// collapse to the empty sum; fibers with several parts arise when a
/// tuple's image splices into the surrounding sum.
fn match_tuples(
    cx: &mut MatchCtx,
    sigma: &Subst,
    tuples: &[Vec<Vec<Test>>],
    to_parts: &[Test],
) -> Result<bool> {
    // tuples built from unit groups are deterministic: each group's image
    // is fixed, so the whole tuple image is fixed and cancelled up front
    let mut live_tuples: Vec<&Vec<Vec<Test>>> = Vec::new();
    let mut parts: Vec<Test> = to_parts.to_vec();
    for tuple in tuples {
        let deterministic = tuple
            .iter()
            .all(|group| group.iter().all(|t| t.is_eps() || t.is_zero()));
        if !deterministic {
            live_tuples.push(tuple);
            continue;
        }
        let image = canon_test(&Test::Prod(
            tuple
                .iter()
                .map(|group| canon_test(&Test::Sum(group.clone())))
                .collect(),
        ));
        for need in image.sum_parts() {
            let key = alpha_key_test(&need);
            match parts.iter().position(|p| alpha_key_test(p) == key) {
                Some(i) => {
                    parts.swap_remove(i);
                }
                None => return Ok(false),
            }
        }
    }
    if live_tuples.is_empty() {
        return Ok(parts.is_empty());
    }
    let kinds = to_kinds(&parts);
    Distributor::run(cx, &kinds, live_tuples.len(), &mut |cx, slot, chosen| {
        let image = canon_test(&Test::Sum(chosen.to_vec()));
        pair_ok(cx, sigma, live_tuples[slot], &image)
    })
}

/// A tuple against one image: the image's factors split among the tuple's
/// groups, and each group, read as a sum, reduces to its slice, read as a
/// product.
fn pair_ok(cx: &mut MatchCtx, sigma: &Subst, tuple: &[Vec<Test>], part: &Test) -> Result<bool> {
    let factors = part.prod_parts();
    if tuple.is_empty() {
        return Ok(factors.is_empty());
    }
    let key = (
        tuple
            .iter()
            .map(|g| {
                let mut ks: Vec<TestKey> = g.iter().map(alpha_key_test).collect();
                ks.sort();
                ks
            })
            .collect::<Vec<_>>(),
        subst_key(sigma),
        alpha_key_test(part),
    );
    if let Some(&hit) = cx.pairs.get(&key) {
        return Ok(hit);
    }
    let kinds = to_kinds(&factors);
    let out = Distributor::run(cx, &kinds, tuple.len(), &mut |cx, slot, chosen| {
        let src = canon_test(&Test::Sum(tuple[slot].clone()));
        let img = canon_test(&Test::Prod(chosen.to_vec()));
        rs_test(cx, &src, sigma, &img)
    })?;
    cx.pairs.insert(key, out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmodel::BuiltinModel;
    use crate::reduction::{redexes, step};
    use crate::syntax::{alpha_eq, parse_expr};

    fn norm() -> Model {
        Model::builtin(&BuiltinModel::Norm).unwrap()
    }
    fn park() -> Model {
        Model::builtin(&BuiltinModel::Park).unwrap()
    }

    #[test]
    fn maximal_reduct_examples() {
        let m = norm();
        let x = parse_expr("x", &m).unwrap();
        assert_eq!(full_parallel_reduct(&m, &x).unwrap(), x);

        let e = parse_expr(r"(\x. x y) (\z. z)", &m).unwrap();
        let expect = parse_expr(r"(\z. z) y", &m).unwrap();
        assert_eq!(full_parallel_reduct(&m, &e).unwrap(), expect);

        // a refuted selection collapses to the empty sum
        let e = parse_expr("tau<q>(eb<{p}>)", &m).unwrap();
        assert_eq!(full_parallel_reduct(&m, &e).unwrap(), Expr::Test(Test::zero()));
    }

    #[test]
    fn parallel_is_reflexive() {
        let m = norm();
        for src in [
            "x",
            r"\x. x x",
            "tau<p>((\\x. x) y) + tau<q>(z)",
            "tb<p>(tau<q>(x) * tau<p>(y)) eb<{q}>",
            "Jg[const 1](2)",
        ] {
            let e = parse_expr(src, &m).unwrap();
            assert!(par_reduces(&m, &e, &e).unwrap(), "refl on {src}");
        }
    }

    #[test]
    fn parallel_contains_single_steps_and_the_maximal_reduct() {
        let m = norm();
        for src in [
            r"(\x. x) (\y. y)",
            r"tau<p>((\x. \y. x y) eb<{p}>)",
            "tau<p>(eb<{q}>) * (tau<q>(eb<{p}>) + eps)",
            "eb<{p}> ((\\x. x) y)",
            "tb<p>(tau<q>(x) + tau<q>(y)) z",
            "Jg[const 1](0) eb<{p}>",
        ] {
            let e = parse_expr(src, &m).unwrap();
            for (pos, rule) in redexes(&m, &e).unwrap() {
                let f = step(&m, &e, &pos, rule).unwrap();
                assert!(par_reduces(&m, &e, &f).unwrap(), "{src}: step {rule}@{pos}");
            }
            let plus = full_parallel_reduct(&m, &e).unwrap();
            assert!(par_reduces(&m, &e, &plus).unwrap(), "{src}: maximal");
        }
    }

    #[test]
    fn parallel_beta_example() {
        let m = norm();
        let e = parse_expr(r"(\x. x) (\y. y)", &m).unwrap();
        let id = parse_expr(r"\y. y", &m).unwrap();
        assert!(par_reduces(&m, &e, &id).unwrap());
    }

    #[test]
    fn parallel_rejects_non_reducts() {
        let m = norm();
        let x = parse_expr("x", &m).unwrap();
        let y = parse_expr("y", &m).unwrap();
        assert!(!par_reduces(&m, &x, &y).unwrap());

        let omega = parse_expr("Omega", &m).unwrap();
        let id = parse_expr("I", &m).unwrap();
        assert!(!par_reduces(&m, &omega, &id).unwrap());

        // two steps are not one parallel step: the beta redex is created
        let e = parse_expr(r"(\x. x) (\y. y) z", &m).unwrap();
        let z = parse_expr("z", &m).unwrap();
        assert!(!par_reduces(&m, &e, &z).unwrap());
    }

    #[test]
    fn strong_confluence_triangle_on_samples() {
        // every single-step reduct rejoins the maximal reduct in one
        // parallel step
        let m = norm();
        let p = park();
        for (model, src) in [
            (&m, r"(\x. x x) ((\y. y) z)"),
            (&m, "tau<p>((\\x. x) (\\y. y)) * (tau<q>(eb<{p}>) + tau<p>(eb<{q}>))"),
            (&m, "eb<{p,q}> ((\\x. x) y)"),
            (&p, r"tau<*>(\x. x x)"),
            (&m, "tb<q>(tau<p>(eb<{q}>) + tau<q>(eb<{p}>)) ((\\u. u) v)"),
        ] {
            let e = parse_expr(src, model).unwrap();
            let plus = full_parallel_reduct(model, &e).unwrap();
            for (pos, rule) in redexes(model, &e).unwrap() {
                let f = step(model, &e, &pos, rule).unwrap();
                assert!(
                    par_reduces(model, &f, &plus).unwrap(),
                    "{src}: fork {rule}@{pos} gives {f}, must rejoin {plus}"
                );
            }
        }
    }

    #[test]
    fn enumerated_reducts_are_accepted_by_the_decision() {
        let m = norm();
        for src in [
            r"(\x. x y) (\z. z)",
            "tau<p>(eb<{q}> w)",
            "tb<p>(tau<q>(x) + tau<q>(y)) + tb<q>(eps)",
            "(tau<p>(x) + tau<q>(y)) * tau<p>((\\u. u) v)",
        ] {
            let e = parse_expr(src, &m).unwrap();
            for r in parallel_reducts(&m, &e, 4096).unwrap() {
                assert!(par_reduces(&m, &e, &r).unwrap(), "{src} => {r}");
            }
        }
    }

    #[test]
    fn jg_symbol_steps_in_parallel() {
        let m = norm();
        let g = crate::kmodel::GSpec::Const(1);
        let j0 = Expr::Term(Term::Jg(g.clone(), 0));
        let unfolded = canon_expr(&Expr::Term(Term::app(build_g(&g, 0), Term::Jg(g.clone(), 1))));
        assert!(par_reduces(&m, &j0, &unfolded).unwrap());
        assert!(par_reduces(&m, &j0, &j0).unwrap());
        assert!(alpha_eq(&full_parallel_reduct(&m, &j0).unwrap(), &unfolded));
    }
}
