//! Symbolic K-models, the lambda-calculus with D-tests, and hyperimmunity
//! probes, packaged as a library with a thin command-line front end.
//!
//! The pieces fit together as follows:
//!
//! * [`kmodel`] — finite presentations of extensional partial K-models:
//!   elements, antichains, the order, folding/unfolding through the pairing
//!   table, the builtin example models, and bounded element enumeration.
//! * [`syntax`] — terms and tests over a model's points: parsing, printing,
//!   capture-avoiding substitution, alpha-equivalence, the standard
//!   combinators and the counterexample term family.
//! * [`reduction`] — the small-step engine: redex enumeration, head
//!   reduction as a branching relation, may-head-normal forms, bounded
//!   breadth-first convergence, parallel reduction and the maximal parallel
//!   reduct.
//! * [`interp`] — the point-wise interpretation: type-style derivability,
//!   bounded interpretation windows, the operational membership oracle, and
//!   separating-context synthesis.
//! * [`hyper`] — hyperimmunity probing over finite windows and the
//!   end-to-end full-abstraction counterexample run.
//! * [`cli`] — the subcommand surface used by the `lamtest` binary.

pub mod cli;
pub mod hyper;
pub mod interp;
pub mod kmodel;
pub mod reduction;
pub mod syntax;

pub use kmodel::{Antichain, BuiltinModel, Element, GSpec, Model, ModelError};
pub use syntax::{Expr, Term, Test};
