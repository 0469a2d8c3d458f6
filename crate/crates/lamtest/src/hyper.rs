//! Hyperimmunity probing over finite windows, and the end-to-end
//! full-abstraction counterexample run.
//!
//! A probe searches for a membership chain: each element unfolds as g(n)
//! arrows and the next element must sit in one of the heads. A repeating
//! state (possibly modulo the model's shift automorphism) certifies an
//! infinite chain — the growth of the chain is bounded by g, refuting
//! hyperimmunity with respect to g. Exhaustion is only ever evidence: the
//! property quantifies over all recursive bounds.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::kmodel::{Antichain, Element, GSpec, Model, ModelError};
use crate::reduction::{
    head_converges, head_successors_full, EngineError, RuleName, Trace, Verdict,
};
use crate::syntax::{alpha_key, canon_expr, eps_bar, identity, jg, Expr, Term, Test};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HyperError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("probe found no witness chain to seed the counterexample")]
    NoWitness,
    #[error("growth spec `{0}` has no constant tail; probes cannot certify repeats under it")]
    UnboundedSpec(GSpec),
    #[error("replayed reduction does not match the expected shape: {0}")]
    ShapeMismatch(String),
    #[error("probe verdict disagrees with the pointwise window check: {0}")]
    CrossCheck(String),
}

pub type Result<T> = std::result::Result<T, HyperError>;

/// A repeating tail: the chain state at `start` recurs `period` steps
/// later, exactly when `shift` is zero, or as a copy moved by the model's
/// automorphism otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lasso {
    pub start: usize,
    pub period: usize,
    pub shift: i64,
}

/// A chain prefix with the arrow slot that contained each successor, plus
/// an optional lasso proving infinite extension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainWitness {
    pub chain: Vec<Element>,
    /// `slots[n]` is the 1-based index k with `chain[n+1]` in the k-th
    /// unfolded head of `chain[n]`.
    pub slots: Vec<usize>,
    pub lasso: Option<Lasso>,
    pub g: GSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbeOutcome {
    Witness(ChainWitness),
    Exhausted { depth: usize, window_limited: bool },
}

impl ProbeOutcome {
    pub fn witness(&self) -> Option<&ChainWitness> {
        match self {
            ProbeOutcome::Witness(w) => Some(w),
            ProbeOutcome::Exhausted { .. } => None,
        }
    }
}

/// Whether every consecutive pair of the chain satisfies the membership
/// condition: `chain[n]` unfolds as g(n) arrows and `chain[n+1]` lies in
/// one of the heads.
pub fn check_condition(model: &Model, g: &GSpec, chain: &[Element]) -> Result<bool> {
    for (n, window) in chain.windows(2).enumerate() {
        let (heads, _) = model.unfold(&window[0], g.eval(n as u32) as usize)?;
        let found = heads.iter().any(|a| a.iter().any(|e| *e == window[1]));
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Extends a witness through its lasso for `rounds` extra periods, for
/// re-validation under `check_condition`.
pub fn unroll(model: &Model, w: &ChainWitness, rounds: usize) -> Result<Vec<Element>> {
    let Some(lasso) = &w.lasso else { return Ok(w.chain.clone()) };
    let mut out = w.chain.clone();
    for round in 1..=rounds {
        for i in 0..lasso.period {
            let cycle_elem = &w.chain[lasso.start + i + 1];
            let d = lasso.shift * round as i64;
            let shifted = if lasso.shift == 0 {
                cycle_elem.clone()
            } else {
                model
                    .shift_element(cycle_elem, d)
                    .ok_or_else(|| ModelError::WindowExceeded(cycle_elem.to_string()))?
            };
            out.push(shifted);
        }
    }
    Ok(out)
}

struct Probe<'m> {
    model: &'m Model,
    g: GSpec,
    depth: usize,
    window_limited: bool,
}

impl<'m> Probe<'m> {
    fn extend(
        &mut self,
        chain: &mut Vec<Element>,
        slots: &mut Vec<usize>,
    ) -> Result<Option<ChainWitness>> {
        let n = chain.len() - 1;
        if n >= self.depth {
            return Ok(None);
        }
        let width = self.g.eval(n as u32) as usize;
        let heads = match self.model.unfold(chain.last().unwrap(), width) {
            Ok((heads, _)) => heads,
            Err(ModelError::WindowExceeded(_)) => {
                self.window_limited = true;
                return Ok(None);
            }
            Err(e) => return Err(e.into()),
        };
        for (k, head) in heads.iter().enumerate() {
            for cand in head.iter() {
                // a repeat (exact or shifted) closes a lasso when the
                // growth spec is constant from the repeat point on
                for m in 0..chain.len() {
                    let delta = if *cand == chain[m] {
                        Some(0)
                    } else {
                        self.model.shift_delta(&chain[m], cand).filter(|d| *d != 0)
                    };
                    if let Some(d) = delta {
                        if self.g.constant_from(m as u32) {
                            let mut full = chain.clone();
                            full.push(cand.clone());
                            let mut all_slots = slots.clone();
                            all_slots.push(k + 1);
                            return Ok(Some(ChainWitness {
                                chain: full,
                                slots: all_slots,
                                lasso: Some(Lasso {
                                    start: m,
                                    period: chain.len() - m,
                                    shift: d,
                                }),
                                g: self.g.clone(),
                            }));
                        }
                    }
                }
                chain.push(cand.clone());
                slots.push(k + 1);
                let found = self.extend(chain, slots)?;
                chain.pop();
                slots.pop();
                if found.is_some() {
                    return Ok(found);
                }
            }
        }
        Ok(None)
    }
}

/// Depth-first search for a lasso-certified chain, rooted at the model's
/// atoms or at `start`. `Exhausted` is evidence, never proof, of
/// hyperimmunity with respect to `g`.
pub fn probe(
    model: &Model,
    g: &GSpec,
    depth: usize,
    start: Option<&[Element]>,
) -> Result<ProbeOutcome> {
    let roots: Vec<Element> = match start {
        Some(es) => es.to_vec(),
        None => model.atoms().iter().map(|a| Element::atom(a.clone())).collect(),
    };
    let mut probe = Probe { model, g: g.clone(), depth, window_limited: false };
    for root in roots {
        model.check_element(&root)?;
        let mut chain = vec![root];
        let mut slots = Vec::new();
        if let Some(w) = probe.extend(&mut chain, &mut slots)? {
            debug_assert!(check_condition(model, g, &w.chain)?);
            return Ok(ProbeOutcome::Witness(w));
        }
    }
    Ok(ProbeOutcome::Exhausted { depth, window_limited: probe.window_limited })
}

/// Probes the functionals model for a given level table, and cross-checks
/// the verdict against the pointwise criterion: the level chain survives
/// exactly when `g(n) >= f(n)+1` for every `n`, since `f(n)+1` arrows must
/// be unfolded before the next level element shows.
pub fn probe_hf(f: &[u32], g: &GSpec, depth: usize) -> Result<ProbeOutcome> {
    if f.is_empty() {
        return Err(ModelError::Builtin("empty level table".into()).into());
    }
    let g_tail = match g {
        GSpec::Const(_) => 1,
        GSpec::Table(vs) => vs.len(),
        GSpec::Affine { .. } => return Err(HyperError::UnboundedSpec(g.clone())),
    };
    let horizon = depth.max(f.len()).max(g_tail) + 2;
    let f_spec = GSpec::Table(f.to_vec());
    let expected = (0..=horizon as u32).all(|n| g.eval(n) >= f_spec.eval(n) + 1);

    let model = Model::builtin(&crate::kmodel::BuiltinModel::Hf {
        f: f.to_vec(),
        levels: horizon as u32,
    })?;
    let start = vec![Element::atom("a1_0")];
    let out = probe(&model, g, horizon, Some(&start))?;
    let found = out.witness().is_some();
    if found != expected {
        return Err(HyperError::CrossCheck(format!(
            "f={f:?} g={g}: probe {} but the window check says {}",
            if found { "found a witness" } else { "exhausted" },
            if expected { "one exists" } else { "none exists" },
        )));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// the counterexample runs

/// Replays the factored head reduction of `tau<α>(Jg[g](n) ε̄_b)` down to
/// the selection step and checks the result against the shape computed
/// independently from the unfoldings of `α` and `b`.
pub fn cefact_trace(
    model: &Model,
    g: &GSpec,
    n: u32,
    alpha: &Element,
    b: &Antichain,
) -> Result<Trace> {
    let width = g.eval(n) as usize;
    let (a_heads, alpha_tail) = model.unfold(alpha, width)?;

    // the right-hand side, from the unfoldings alone
    let mut kept = Vec::new();
    for beta in b.iter() {
        let (b_heads, beta_tail) = model.unfold(beta, width)?;
        if model.leq(&alpha_tail, &beta_tail)? {
            let mut factors = Vec::new();
            for (i, head) in b_heads.iter().enumerate() {
                for gamma in head.iter() {
                    factors.push(Test::tau(
                        gamma.clone(),
                        Term::app(jg(g, n + 1), eps_bar(&a_heads[i])),
                    ));
                }
            }
            kept.push(Test::Prod(factors));
        }
    }
    let expected = canon_expr(&Expr::Test(Test::Sum(kept)));

    // the replay: unfold the symbol, two betas, one tau per abstraction,
    // one tau-bar per argument, then the selection
    let mut rules = vec![RuleName::DeltaJg, RuleName::Beta, RuleName::Beta];
    rules.extend(std::iter::repeat(RuleName::Tau).take(width));
    rules.extend(std::iter::repeat(RuleName::TauBar).take(width));
    rules.push(RuleName::TauTauBar);

    let start = canon_expr(&Expr::Test(Test::tau(
        alpha.clone(),
        Term::app(jg(g, n), eps_bar(b)),
    )));
    let mut steps = Vec::new();
    let mut cur = start.clone();
    for (i, expect_rule) in rules.iter().enumerate() {
        let succs = head_successors_full(model, &cur).map_err(HyperError::Engine)?;
        let [(rule, pos, next)] = &succs[..] else {
            return Err(HyperError::ShapeMismatch(format!(
                "step {}: expected one head successor, found {}",
                i + 1,
                succs.len()
            )));
        };
        if rule != expect_rule {
            return Err(HyperError::ShapeMismatch(format!(
                "step {}: expected rule {}, found {}",
                i + 1,
                expect_rule,
                rule
            )));
        }
        steps.push(crate::reduction::Step { rule: *rule, pos: pos.clone(), expr: next.clone() });
        cur = next.clone();
    }
    if alpha_key(&cur) != alpha_key(&expected) {
        return Err(HyperError::ShapeMismatch(format!(
            "final test is {cur}, expected {expected}"
        )));
    }
    let n_steps = steps.len();
    Ok(Trace { start, steps, verdict: Verdict::Converged { steps: n_steps } })
}

/// On the well-stratified base model, the counterexample symbol behaves
/// like the identity: `tau<α>(Jg[g](n) ε̄_{a0})` converges exactly when
/// some member of `a0` dominates `α`. The forward direction is exact, the
/// converse is fuel-bounded.
pub fn jg_identity_window(
    g: &GSpec,
    n: u32,
    depth: usize,
    width: usize,
    fuel: usize,
    max_states: usize,
) -> Result<bool> {
    let model = Model::builtin(&crate::kmodel::BuiltinModel::Dinf)?;
    let window = model.enumerate_elements(depth, width, 100_000)?;
    let chains = model.antichains_over(&window, width)?;
    for alpha in &window {
        for a0 in &chains {
            let probe = Expr::Test(Test::tau(
                alpha.clone(),
                Term::app(jg(g, n), eps_bar(a0)),
            ));
            let ran = head_converges(&model, &canon_expr(&probe), fuel, max_states)
                .map_err(HyperError::Engine)?
                .converged();
            let mut criterion = false;
            for beta in a0.iter() {
                if model.leq(alpha, beta)? {
                    criterion = true;
                    break;
                }
            }
            if ran != criterion {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The end-to-end counterexample report: the chain witness, the identity
/// side converging in two steps, the counterexample side exhausting its
/// fuel, and the detected index-shifted cycle in its head graph.
#[derive(Debug, Clone)]
pub struct CounterReport {
    pub witness: ChainWitness,
    pub i_trace: Trace,
    pub jg_trace: Trace,
    pub jg_fuel: usize,
    pub shift_cycle: Option<u32>,
}

pub fn run_counterexample(
    model: &Model,
    g: &GSpec,
    start: Option<&Element>,
    fuel: usize,
    max_states: usize,
) -> Result<CounterReport> {
    let roots: Option<Vec<Element>> = start.map(|e| vec![e.clone()]);
    let outcome = probe(model, g, 16, roots.as_deref())?;
    let witness = match outcome {
        ProbeOutcome::Witness(w) => w,
        ProbeOutcome::Exhausted { .. } => return Err(HyperError::NoWitness),
    };
    let alpha0 = witness.chain[0].clone();
    let a0 = Antichain::singleton(alpha0.clone());

    let i_side = canon_expr(&Expr::Test(Test::tau(
        alpha0.clone(),
        Term::app(identity(), eps_bar(&a0)),
    )));
    let i_trace = head_converges(model, &i_side, fuel, max_states).map_err(HyperError::Engine)?;

    let jg_side = canon_expr(&Expr::Test(Test::tau(
        alpha0.clone(),
        Term::app(jg(g, 0), eps_bar(&a0)),
    )));
    let jg_trace =
        head_converges(model, &jg_side, fuel, max_states).map_err(HyperError::Engine)?;

    let shift_cycle = detect_shift_cycle(model, &jg_side, 400, 2_000)?;

    Ok(CounterReport { witness, i_trace, jg_trace, jg_fuel: fuel, shift_cycle })
}

/// Normalizes the symbol numerals in a state by the minimum numeral
/// occurring in it, so states that recur with every numeral advanced by
/// the same amount collide.
fn numeral_normalize(e: &Expr) -> (Expr, Option<u32>) {
    fn min_term(t: &Term, acc: &mut Option<u32>) {
        match t {
            Term::Jg(_, n) => *acc = Some(acc.map_or(*n, |m: u32| m.min(*n))),
            Term::Var(_) => {}
            Term::Lam(_, b) => min_term(b, acc),
            Term::App(f, a) => {
                min_term(f, acc);
                min_term(a, acc);
            }
            Term::TauBarSum(s) => {
                for (_, q) in s {
                    min_test(q, acc);
                }
            }
        }
    }
    fn min_test(q: &Test, acc: &mut Option<u32>) {
        match q {
            Test::Sum(cs) | Test::Prod(cs) => cs.iter().for_each(|c| min_test(c, acc)),
            Test::Tau(_, m) => min_term(m, acc),
        }
    }
    fn shift_term(t: &Term, d: u32) -> Term {
        match t {
            Term::Jg(g, n) => Term::Jg(g.clone(), n - d),
            Term::Var(_) => t.clone(),
            Term::Lam(x, b) => Term::Lam(x.clone(), Box::new(shift_term(b, d))),
            Term::App(f, a) => Term::App(Box::new(shift_term(f, d)), Box::new(shift_term(a, d))),
            Term::TauBarSum(s) => Term::TauBarSum(
                s.iter().map(|(e, q)| (e.clone(), shift_test(q, d))).collect(),
            ),
        }
    }
    fn shift_test(q: &Test, d: u32) -> Test {
        match q {
            Test::Sum(cs) => Test::Sum(cs.iter().map(|c| shift_test(c, d)).collect()),
            Test::Prod(cs) => Test::Prod(cs.iter().map(|c| shift_test(c, d)).collect()),
            Test::Tau(e, m) => Test::Tau(e.clone(), Box::new(shift_term(m, d))),
        }
    }
    let mut min = None;
    match e {
        Expr::Term(t) => min_term(t, &mut min),
        Expr::Test(q) => min_test(q, &mut min),
    }
    match min {
        None => (e.clone(), None),
        Some(d) => (
            match e {
                Expr::Term(t) => Expr::Term(shift_term(t, d)),
                Expr::Test(q) => Expr::Test(shift_test(q, d)),
            },
            Some(d),
        ),
    }
}

/// Breadth-first over the head graph, keyed modulo the symbol numeral:
/// two states equal up to a numeral advance certify a structural cycle.
fn detect_shift_cycle(
    model: &Model,
    start: &Expr,
    max_depth: usize,
    max_states: usize,
) -> Result<Option<u32>> {
    let mut seen: HashMap<crate::syntax::ExprKey, u32> = HashMap::new();
    let mut frontier = vec![start.clone()];
    let (key0, base0) = numeral_normalize(start);
    if let Some(b) = base0 {
        seen.insert(alpha_key(&key0), b);
    }
    let mut states = 1usize;
    for _ in 0..max_depth {
        let mut next = Vec::new();
        for state in &frontier {
            for (_, _, succ) in head_successors_full(model, state).map_err(HyperError::Engine)? {
                let (norm, base) = numeral_normalize(&succ);
                if let Some(b) = base {
                    let key = alpha_key(&norm);
                    if let Some(prev) = seen.get(&key) {
                        if b > *prev {
                            return Ok(Some(b - prev));
                        }
                        continue;
                    }
                    seen.insert(key, b);
                }
                states += 1;
                if states > max_states {
                    return Ok(None);
                }
                next.push(succ);
            }
        }
        if next.is_empty() {
            return Ok(None);
        }
        frontier = next;
    }
    Ok(None)
}

impl CounterReport {
    pub fn render(&self, tsv: bool) -> String {
        let mut out = String::new();
        if tsv {
            let chain: Vec<String> = self.witness.chain.iter().map(|e| e.to_string()).collect();
            let _ = writeln!(out, "witness\t{}", chain.join(" "));
            if let Some(l) = &self.witness.lasso {
                let _ = writeln!(out, "lasso\t{}\t{}\t{}", l.start, l.period, l.shift);
            }
            let _ = write!(out, "{}", self.i_trace.render(true));
            let _ = writeln!(
                out,
                "jg\t{}\t{}",
                self.jg_fuel,
                if self.jg_trace.converged() { "converged" } else { "exhausted" }
            );
            if let Some(p) = self.shift_cycle {
                let _ = writeln!(out, "shift-cycle\t{p}");
            }
            return out;
        }
        let _ = writeln!(out, "WITNESS");
        let chain: Vec<String> = self.witness.chain.iter().map(|e| e.to_string()).collect();
        let _ = writeln!(out, "  chain: {}", chain.join(" -> "));
        match &self.witness.lasso {
            Some(l) if l.shift == 0 => {
                let _ = writeln!(out, "  lasso: start {} period {}", l.start, l.period);
            }
            Some(l) => {
                let _ = writeln!(
                    out,
                    "  lasso: start {} period {} (shift {:+})",
                    l.start, l.period, l.shift
                );
            }
            None => {
                let _ = writeln!(out, "  lasso: none");
            }
        }
        let _ = writeln!(out, "I-TRACE");
        for line in self.i_trace.render(false).lines() {
            let _ = writeln!(out, "  {line}");
        }
        let verdict = if self.jg_trace.converged() {
            "CONVERGED (unexpected)"
        } else {
            "exhausted"
        };
        let _ = writeln!(out, "JG-VERDICT({}) {}", self.jg_fuel, verdict);
        if let Some(p) = self.shift_cycle {
            let _ = writeln!(out, "SHIFT-CYCLE({p})");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmodel::BuiltinModel;

    fn model(b: BuiltinModel) -> Model {
        Model::builtin(&b).unwrap()
    }

    #[test]
    fn condition_examples() {
        let park = model(BuiltinModel::Park);
        let star = Element::atom("*");
        let g = GSpec::Const(1);
        assert!(check_condition(&park, &g, &[star.clone(), star.clone(), star.clone()]).unwrap());

        let norm = model(BuiltinModel::Norm);
        let p = Element::atom("p");
        let q = Element::atom("q");
        assert!(check_condition(&norm, &g, &[p.clone(), q.clone(), p.clone()]).unwrap());

        let dinf = model(BuiltinModel::Dinf);
        assert!(!check_condition(&dinf, &g, &[star.clone(), star.clone()]).unwrap());
    }

    #[test]
    fn probe_classifies_the_builtins() {
        let g = GSpec::Const(1);
        let park = model(BuiltinModel::Park);
        let w = probe(&park, &g, 3, None).unwrap();
        let w = w.witness().expect("park repeats");
        assert_eq!(w.lasso, Some(Lasso { start: 0, period: 1, shift: 0 }));

        let norm = model(BuiltinModel::Norm);
        let w = probe(&norm, &g, 4, None).unwrap();
        let w = w.witness().expect("norm repeats");
        assert_eq!(w.lasso.as_ref().map(|l| l.period), Some(2));

        let dinf = model(BuiltinModel::Dinf);
        assert!(matches!(
            probe(&dinf, &g, 10, None).unwrap(),
            ProbeOutcome::Exhausted { window_limited: false, .. }
        ));

        let omega = model(BuiltinModel::Omega { max: 8 });
        assert!(probe(&omega, &g, 10, None).unwrap().witness().is_none());

        let zed = model(BuiltinModel::Zed { lo: -8, hi: 8 });
        let w = probe(&zed, &g, 10, None).unwrap();
        let w = w.witness().expect("zed shifts");
        let lasso = w.lasso.clone().unwrap();
        assert_eq!(lasso.period, 1);
        assert_ne!(lasso.shift, 0);
    }

    #[test]
    fn witnesses_revalidate_and_unroll() {
        let g = GSpec::Const(1);
        for m in [
            model(BuiltinModel::Park),
            model(BuiltinModel::Norm),
            model(BuiltinModel::Zed { lo: -8, hi: 8 }),
        ] {
            let out = probe(&m, &g, 6, None).unwrap();
            let w = out.witness().expect("witness expected");
            assert!(check_condition(&m, &g, &w.chain).unwrap());
            let extended = unroll(&m, w, 2).unwrap();
            assert!(extended.len() > w.chain.len());
            assert!(check_condition(&m, &g, &extended).unwrap(), "unrolled {extended:?}");
        }
    }

    #[test]
    fn arrow_rooted_lassos_descend_to_atoms() {
        // chains started from composite elements settle onto base atoms
        let g = GSpec::Const(1);
        for b in [BuiltinModel::Park, BuiltinModel::Norm] {
            let m = model(b);
            let window = m.enumerate_elements(1, 2, 10_000).unwrap();
            let arrows: Vec<Element> = window.into_iter().filter(|e| !e.is_atom()).collect();
            if arrows.is_empty() {
                continue;
            }
            let out = probe(&m, &g, 8, Some(&arrows)).unwrap();
            if let Some(w) = out.witness() {
                let lasso = w.lasso.as_ref().unwrap();
                for e in &w.chain[lasso.start..] {
                    assert!(e.is_atom(), "cycle element {e} in {}", m.name());
                }
            }
        }
    }

    #[test]
    fn hf_probe_matches_the_window_check() {
        let g2 = GSpec::Const(2);
        assert!(probe_hf(&[1], &g2, 6).unwrap().witness().is_some());
        assert!(probe_hf(&[5], &g2, 6).unwrap().witness().is_none());
        // equal tables fail the +1 margin
        let gt = GSpec::Table(vec![3, 3]);
        assert!(probe_hf(&[3, 3], &gt, 6).unwrap().witness().is_none());
        let gt = GSpec::Table(vec![4, 4]);
        assert!(probe_hf(&[3, 3], &gt, 6).unwrap().witness().is_some());
    }

    #[test]
    fn cefact_replay_matches_the_computed_shape() {
        let norm = model(BuiltinModel::Norm);
        let g = GSpec::Const(1);
        let p = Element::atom("p");
        let b = Antichain::singleton(p.clone());
        let tr = cefact_trace(&norm, &g, 0, &p, &b).unwrap();
        assert_eq!(tr.steps.len(), 6); // delta, beta, beta, tau, tbar, selection
        // the lemma instance: the final test probes q at the next index
        let expected = canon_expr(&Expr::Test(Test::tau(
            Element::atom("q"),
            Term::app(jg(&g, 1), eps_bar(&Antichain::singleton(Element::atom("q")))),
        )));
        assert_eq!(tr.last_expr(), &expected);

        // an empty antichain refutes immediately
        let tr = cefact_trace(&norm, &g, 0, &p, &Antichain::empty()).unwrap();
        assert_eq!(tr.last_expr(), &Expr::Test(Test::zero()));
    }

    #[test]
    fn cefact_on_dinf_collapses_to_eps() {
        let dinf = model(BuiltinModel::Dinf);
        let g = GSpec::Const(1);
        let star = Element::atom("*");
        let arrow = dinf.fold(&Antichain::singleton(star.clone()), &star);
        let b = Antichain::singleton(star.clone());
        let tr = cefact_trace(&dinf, &g, 0, &arrow, &b).unwrap();
        assert_eq!(tr.last_expr(), &Expr::Test(Test::eps()));
    }

    #[test]
    fn counterexample_on_norm_and_park() {
        let g = GSpec::Const(1);
        for b in [BuiltinModel::Norm, BuiltinModel::Park] {
            let m = model(b);
            let report = run_counterexample(&m, &g, None, 2_000, 100_000).unwrap();
            assert!(report.i_trace.converged());
            assert_eq!(report.i_trace.steps.len(), 2);
            assert_eq!(report.i_trace.rules(), vec![RuleName::Beta, RuleName::TauTauBar]);
            assert!(!report.jg_trace.converged());
            let expected_period = if m.name() == "norm" { 2 } else { 1 };
            assert_eq!(report.shift_cycle, Some(expected_period), "{}", m.name());
            let shown = report.render(false);
            assert!(shown.contains("WITNESS"));
            assert!(shown.contains("JG-VERDICT(2000) exhausted"));
            assert!(shown.contains(&format!("SHIFT-CYCLE({expected_period})")));
        }
    }

    #[test]
    fn jg_identity_window_on_the_stratified_model() {
        let g = GSpec::Const(1);
        assert!(jg_identity_window(&g, 0, 1, 1, 2_000, 100_000).unwrap());
    }

    #[test]
    fn counterexample_needs_a_witness() {
        let dinf = model(BuiltinModel::Dinf);
        let g = GSpec::Const(1);
        assert_eq!(
            run_counterexample(&dinf, &g, None, 100, 10_000).unwrap_err(),
            HyperError::NoWitness
        );
    }
}
