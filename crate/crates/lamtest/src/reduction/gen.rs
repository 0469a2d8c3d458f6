//! Seeded generator of well-formed canonical expressions, used by the
//! fuzz suites. Everything is deterministic in the seed.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::kmodel::Element;
use crate::syntax::{canon_expr, Expr, Term, Test};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    Term,
    Test,
    Mixed,
}

#[derive(Debug, Clone)]
pub struct GenConfig {
    /// Approximate node budget.
    pub size: usize,
    /// Points available to tau operators; empty degenerates to pure
    /// lambda-terms.
    pub pool: Vec<Element>,
    pub kind: GenKind,
    /// Closed terms use only bound variables.
    pub closed: bool,
    /// Cap on sum/product arity.
    pub max_arity: usize,
}

impl GenConfig {
    pub fn new(size: usize, pool: Vec<Element>) -> Self {
        GenConfig { size, pool, kind: GenKind::Mixed, closed: false, max_arity: 3 }
    }
}

struct Gen<'c> {
    rng: ChaCha8Rng,
    cfg: &'c GenConfig,
    binders: Vec<String>,
    next_binder: usize,
}

impl<'c> Gen<'c> {
    fn var_name(&mut self) -> Option<String> {
        let mut pool: Vec<String> = self.binders.clone();
        if !self.cfg.closed {
            pool.extend(["x", "y", "z"].map(str::to_string));
        }
        if pool.is_empty() {
            return None;
        }
        let i = self.rng.gen_range(0..pool.len());
        Some(pool.swap_remove(i))
    }

    fn point(&mut self) -> Option<Element> {
        if self.cfg.pool.is_empty() {
            return None;
        }
        let i = self.rng.gen_range(0..self.cfg.pool.len());
        Some(self.cfg.pool[i].clone())
    }

    fn fresh_binder(&mut self) -> String {
        self.next_binder += 1;
        format!("v{}", self.next_binder)
    }

    fn term(&mut self, budget: usize) -> Term {
        if budget <= 1 {
            return match self.var_name() {
                Some(x) => Term::var(x),
                None => Term::zero(),
            };
        }
        let has_points = !self.cfg.pool.is_empty();
        loop {
            match self.rng.gen_range(0..10) {
                0..=1 => {
                    if let Some(x) = self.var_name() {
                        return Term::var(x);
                    }
                }
                2..=3 => {
                    let b = self.fresh_binder();
                    self.binders.push(b.clone());
                    let body = self.term(budget - 1);
                    self.binders.pop();
                    return Term::lam(b, body);
                }
                4..=6 => {
                    let left = budget / 2;
                    let f = self.term(left.max(1));
                    let a = self.term((budget - left).max(1));
                    return Term::app(f, a);
                }
                _ if has_points => {
                    let arity = self.rng.gen_range(0..=self.cfg.max_arity.min(2));
                    let mut summands = Vec::new();
                    if arity > 0 {
                        let each = (budget / arity).max(1);
                        for _ in 0..arity {
                            let point = self.point().expect("pool checked above");
                            summands.push((point, self.operator_body(each)));
                        }
                    }
                    return Term::TauBarSum(summands);
                }
                _ => {}
            }
        }
    }

    /// Bodies of generated tau-bar operators stay in the summand-stable
    /// fragment: products of tau tests whose subjects are not themselves
    /// operator sums. An applied operator whose body can change its
    /// summand count in a single step has forks that only rejoin in two.
    fn operator_body(&mut self, budget: usize) -> Test {
        if budget <= 1 || self.rng.gen_bool(0.25) {
            return Test::eps();
        }
        let arity = self.rng.gen_range(1..=2usize);
        let each = (budget / arity).max(1);
        let mut factors = Vec::new();
        for _ in 0..arity {
            let point = self.point().expect("caller checked the pool");
            let mut subject = self.term(each.saturating_sub(1).max(1));
            let mut tries = 0;
            while matches!(subject, Term::TauBarSum(_)) && tries < 3 {
                subject = self.term(each.saturating_sub(1).max(1));
                tries += 1;
            }
            if matches!(subject, Term::TauBarSum(_)) {
                subject = crate::syntax::identity();
            }
            factors.push(Test::tau(point, subject));
        }
        Test::Prod(factors)
    }

    // Generated tests never contain a literal empty sum: those only arise
    // as reducts (refuted selections), where the fork suites do not start.
    fn test(&mut self, budget: usize) -> Test {
        if budget <= 1 || self.cfg.pool.is_empty() {
            return Test::eps();
        }
        match self.rng.gen_range(0..10) {
            0..=3 => {
                let point = self.point().expect("pool is nonempty");
                Test::tau(point, self.term(budget - 1))
            }
            4..=6 => {
                let arity = self.rng.gen_range(2..=self.cfg.max_arity.max(2));
                let each = (budget / arity).max(1);
                Test::Sum((0..arity).map(|_| self.test(each)).collect())
            }
            _ => {
                let arity = self.rng.gen_range(0..=self.cfg.max_arity);
                let each = (budget / arity.max(1)).max(1);
                Test::Prod((0..arity).map(|_| self.test(each)).collect())
            }
        }
    }
}

/// A well-formed canonical expression of bounded size, deterministic in
/// the seed.
pub fn random_term(seed: u64, cfg: &GenConfig) -> Expr {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        cfg,
        binders: Vec::new(),
        next_binder: 0,
    };
    let kind = match cfg.kind {
        GenKind::Term => GenKind::Term,
        GenKind::Test => GenKind::Test,
        GenKind::Mixed => {
            if g.rng.gen_bool(0.5) && !cfg.pool.is_empty() {
                GenKind::Test
            } else {
                GenKind::Term
            }
        }
    };
    let e = match kind {
        GenKind::Test => Expr::Test(g.test(cfg.size)),
        _ => Expr::Term(g.term(cfg.size)),
    };
    canon_expr(&e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmodel::{BuiltinModel, Model};
    use crate::syntax::{expr_size, free_vars};

    fn pool() -> Vec<Element> {
        Model::builtin(&BuiltinModel::Norm)
            .unwrap()
            .enumerate_elements(1, 2, 10_000)
            .unwrap()
    }

    #[test]
    fn deterministic_in_the_seed() {
        let cfg = GenConfig::new(20, pool());
        for seed in 0..50 {
            assert_eq!(random_term(seed, &cfg), random_term(seed, &cfg));
        }
    }

    #[test]
    fn generated_expressions_are_canonical() {
        let cfg = GenConfig::new(25, pool());
        for seed in 0..500 {
            let e = random_term(seed, &cfg);
            assert_eq!(e, canon_expr(&e), "seed {seed}");
            assert!(expr_size(&e) <= 3 * cfg.size + 2, "seed {seed}");
        }
    }

    #[test]
    fn closed_generation_binds_everything() {
        let cfg = GenConfig {
            closed: true,
            kind: GenKind::Term,
            ..GenConfig::new(18, pool())
        };
        for seed in 0..200 {
            let e = random_term(seed, &cfg);
            assert!(free_vars(&e).is_empty(), "seed {seed}: {e}");
        }
    }

    #[test]
    fn empty_pool_degenerates_to_pure_lambda() {
        let cfg = GenConfig { kind: GenKind::Term, ..GenConfig::new(15, Vec::new()) };
        for seed in 0..100 {
            let e = random_term(seed, &cfg);
            fn pure(t: &Term) -> bool {
                match t {
                    Term::Var(_) => true,
                    Term::Lam(_, b) => pure(b),
                    Term::App(f, a) => pure(f) && pure(a),
                    Term::TauBarSum(s) => s.is_empty(),
                    Term::Jg(_, _) => false,
                }
            }
            match &e {
                Expr::Term(t) => assert!(pure(t), "seed {seed}: {e}"),
                Expr::Test(_) => panic!("asked for terms"),
            }
        }
    }
}
