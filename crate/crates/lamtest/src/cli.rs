//! The command-line surface: reduce, member, typecheck, probe,
//! counterexample, fuzz, and models. Every run is reproducible from its
//! flags; exit code 0 means converged/yes, 2 means exhausted or
//! not-within-bounds, 1 means error. `LAMTEST_MAX_STATES` caps search
//! frontiers.

use std::fmt::Write as _;

use clap::{Parser, Subcommand, ValueEnum};

use crate::hyper;
use crate::interp::{self, Bounds, Judgment, Verdict3, Witness};
use crate::kmodel::{BuiltinModel, Element, GSpec, Model};
use crate::reduction::{
    self, full_converges, full_parallel_reduct, head_converges, par_reduces, random_term,
    redexes, step, GenConfig, DEFAULT_MAX_STATES,
};
use crate::syntax::{parse_expr, parse_judgment_env, Expr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Tsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Head,
    Full,
}

#[derive(Debug, Parser)]
#[command(name = "lamtest", version, about = "K-models, tests, and hyperimmunity probes")]
pub struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Builtin model: dinf, park, norm, omega, zed, hf.
    #[arg(long, global = true, default_value = "norm")]
    model: String,

    /// Load a model-spec file instead of a builtin.
    #[arg(long, global = true)]
    model_file: Option<std::path::PathBuf>,

    /// Atom window for the unbounded builtins: omega gets 0..=N, zed gets
    /// -N..=N, hf gets levels 0..=N.
    #[arg(long, global = true, default_value_t = 8)]
    model_range: i64,

    /// Level table for the hf builtin, comma-separated.
    #[arg(long, global = true)]
    model_f: Option<String>,

    #[arg(long, global = true, default_value_t = 1000)]
    fuel: usize,

    #[arg(long, global = true, default_value_t = 2)]
    depth: usize,

    #[arg(long, global = true, default_value_t = 2)]
    width: usize,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Reduce an expression and print the trace.
    Reduce {
        #[arg(long, value_enum, default_value_t = Strategy::Head)]
        strategy: Strategy,
        expr: String,
    },
    /// Run the operational membership oracle on a judgment.
    Member { judgment: String },
    /// Search for a derivation of a judgment.
    Typecheck {
        #[arg(long, default_value_t = 8)]
        search_depth: usize,
        judgment: String,
    },
    /// Search for a chain witness refuting hyperimmunity under g.
    Probe {
        #[arg(long)]
        g: String,
        /// Start elements (defaults to the model's atoms).
        #[arg(long)]
        start: Option<String>,
    },
    /// Run the paired identity/counterexample traces.
    Counterexample {
        #[arg(long)]
        g: String,
        #[arg(long)]
        alpha0: Option<String>,
    },
    /// Random suites: confluence, standardization, invariance.
    Fuzz {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long, default_value_t = 20)]
        size: usize,
    },
    /// List the builtin models.
    Models,
}

pub fn max_states() -> usize {
    std::env::var("LAMTEST_MAX_STATES")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_STATES)
}

fn load_model(cli: &Cli) -> Result<Model, String> {
    if let Some(path) = &cli.model_file {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("model");
        return Model::parse_spec(name, &text).map_err(|e| e.to_string());
    }
    let n = cli.model_range;
    let builtin = match cli.model.as_str() {
        "dinf" => BuiltinModel::Dinf,
        "park" => BuiltinModel::Park,
        "norm" => BuiltinModel::Norm,
        "omega" => BuiltinModel::Omega { max: n },
        "zed" => BuiltinModel::Zed { lo: -n, hi: n },
        "hf" => {
            let table = cli
                .model_f
                .as_deref()
                .ok_or("hf needs --model-f with a comma-separated level table")?;
            let f = table
                .split(',')
                .map(|s| s.trim().parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| format!("bad level table `{table}`"))?;
            BuiltinModel::Hf { f, levels: n.max(0) as u32 }
        }
        other => return Err(format!("unknown model `{other}`")),
    };
    Model::builtin(&builtin).map_err(|e| e.to_string())
}

/// `x:{…}, y:{…} |- M : e` or `… |- Q`.
fn parse_judgment(text: &str, model: &Model) -> Result<Judgtext, String> {
    let (env_part, rest) = match text.split_once("|-") {
        Some((l, r)) => (l.trim(), r.trim()),
        None => return Err("a judgment needs `|-`".into()),
    };
    let env = parse_judgment_env(env_part, model).map_err(|e| e.to_string())?;
    let (subject_text, point) = match rest.rsplit_once(':') {
        Some((m, e)) => {
            let elem = crate::syntax::parse_expr(&format!("tau<{}>(0)", e.trim()), model)
                .map_err(|err| err.to_string())?;
            let Expr::Test(crate::syntax::Test::Tau(elem, _)) = elem else {
                return Err("bad element".into());
            };
            (m.trim(), Some(elem))
        }
        None => (rest, None),
    };
    let subject = parse_expr(subject_text, model).map_err(|e| e.to_string())?;
    Ok(Judgtext { env, subject, point })
}

struct Judgtext {
    env: Vec<(String, crate::kmodel::Antichain)>,
    subject: Expr,
    point: Option<Element>,
}

/// Exit code 0 on success/converged, 2 on exhausted/no, 1 on error.
pub fn run(cli: Cli) -> u8 {
    match dispatch(&cli) {
        Ok((out, code)) => {
            print!("{out}");
            code
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(String, u8), String> {
    let model = load_model(cli)?;
    let tsv = cli.format == Format::Tsv;
    let states = max_states();
    match &cli.command {
        Cmd::Reduce { strategy, expr } => {
            let e = parse_expr(expr, &model).map_err(|e| e.to_string())?;
            let trace = match strategy {
                Strategy::Head => head_converges(&model, &e, cli.fuel, states),
                Strategy::Full => full_converges(&model, &e, cli.fuel, states),
            }
            .map_err(|e| e.to_string())?;
            let mut out = String::new();
            if !tsv {
                let _ = writeln!(out, "input  {e}");
            }
            out.push_str(&trace.render(tsv));
            let code = if trace.converged() { 0 } else { 2 };
            Ok((out, code))
        }
        Cmd::Member { judgment } => {
            let j = parse_judgment(judgment, &model)?;
            let Some(point) = j.point else {
                return Err("member needs a term judgment `… |- M : e`".into());
            };
            let Expr::Term(term) = &j.subject else {
                return Err("member needs a term subject".into());
            };
            let v = interp::member_op(&model, term, &j.env, &point, cli.fuel, states)
                .map_err(|e| e.to_string())?;
            render_verdict(v, tsv)
        }
        Cmd::Typecheck { search_depth, judgment } => {
            let j = parse_judgment(judgment, &model)?;
            let bounds = Bounds::new(cli.depth, cli.width, *search_depth);
            let jj = Judgment { env: j.env, subject: j.subject, point: j.point };
            let v = interp::derivable(&model, &jj, &bounds).map_err(|e| e.to_string())?;
            render_verdict(v, tsv)
        }
        Cmd::Probe { g, start } => {
            let g = GSpec::parse(g)?;
            let starts: Option<Vec<Element>> = match start {
                None => None,
                Some(text) => {
                    let e = parse_judgment(&format!("|- 0 : {text}"), &model)?;
                    Some(vec![e.point.expect("point parsed")])
                }
            };
            let out = hyper::probe(&model, &g, cli.depth.max(4), starts.as_deref())
                .map_err(|e| e.to_string())?;
            let mut s = String::new();
            let code = match &out {
                hyper::ProbeOutcome::Witness(w) => {
                    let chain: Vec<String> = w.chain.iter().map(|e| e.to_string()).collect();
                    if tsv {
                        let _ = writeln!(s, "witness\t{}", chain.join(" "));
                        if let Some(l) = &w.lasso {
                            let _ = writeln!(s, "lasso\t{}\t{}\t{}", l.start, l.period, l.shift);
                        }
                    } else {
                        let _ = writeln!(s, "WITNESS");
                        let _ = writeln!(s, "  chain: {}", chain.join(" -> "));
                        if let Some(l) = &w.lasso {
                            let _ = writeln!(
                                s,
                                "  lasso: start {} period {} (shift {:+})",
                                l.start, l.period, l.shift
                            );
                        }
                    }
                    0
                }
                hyper::ProbeOutcome::Exhausted { depth, window_limited } => {
                    if tsv {
                        let _ = writeln!(s, "exhausted\t{depth}\t{window_limited}");
                    } else {
                        let note = if *window_limited { " (window limited)" } else { "" };
                        let _ = writeln!(s, "no witness to depth {depth}{note}");
                    }
                    2
                }
            };
            Ok((s, code))
        }
        Cmd::Counterexample { g, alpha0 } => {
            let g = GSpec::parse(g)?;
            let start: Option<Element> = match alpha0 {
                None => None,
                Some(text) => {
                    let e = parse_judgment(&format!("|- 0 : {text}"), &model)?;
                    e.point
                }
            };
            let report = hyper::run_counterexample(&model, &g, start.as_ref(), cli.fuel, states)
                .map_err(|e| e.to_string())?;
            let ok = report.i_trace.converged() && !report.jg_trace.converged();
            Ok((report.render(tsv), if ok { 0 } else { 2 }))
        }
        Cmd::Fuzz { suite, cases, size } => {
            let summary = fuzz(&model, suite, *cases, *size, cli.seed, states, tsv)?;
            Ok(summary)
        }
        Cmd::Models => {
            let mut s = String::new();
            for (name, note) in [
                ("dinf", "one reflexive atom, empty head"),
                ("park", "one reflexive atom, self head"),
                ("norm", "two atoms p < q, swapped heads"),
                ("omega", "naturals, n = {k|k<n} -> n (windowed)"),
                ("zed", "integers, n = {n+1} -> n (windowed)"),
                ("hf", "level functionals for a table f (windowed)"),
            ] {
                if tsv {
                    let _ = writeln!(s, "model\t{name}\t{note}");
                } else {
                    let _ = writeln!(s, "{name:<7} {note}");
                }
            }
            Ok((s, 0))
        }
    }
}

fn render_verdict(v: Verdict3, tsv: bool) -> Result<(String, u8), String> {
    let mut s = String::new();
    let code = match v {
        Verdict3::Yes(witness) => {
            match witness {
                Witness::Derivation(d) => {
                    if tsv {
                        let _ = writeln!(s, "yes\tderivation\t{}", d.depth());
                    } else {
                        let _ = writeln!(s, "YES");
                        s.push_str(&d.render());
                    }
                }
                Witness::Trace(tr) => {
                    if tsv {
                        let _ = writeln!(s, "yes\ttrace\t{}", tr.steps.len());
                        s.push_str(&tr.render(true));
                    } else {
                        let _ = writeln!(s, "YES");
                        s.push_str(&tr.render(false));
                    }
                }
            }
            0
        }
        Verdict3::NoWithinBounds(bound) => {
            if tsv {
                let _ = writeln!(s, "no-within-bounds\t{bound}");
            } else {
                let _ = writeln!(s, "NO within bound {bound}");
            }
            2
        }
    };
    Ok((s, code))
}

// ---------------------------------------------------------------------------
// random suites

fn fuzz(
    model: &Model,
    suite: &str,
    cases: usize,
    size: usize,
    seed: u64,
    states: usize,
    tsv: bool,
) -> Result<(String, u8), String> {
    let pool = model
        .enumerate_elements(1, 2, 10_000)
        .map_err(|e| e.to_string())?;
    let cfg = GenConfig::new(size, pool);
    let mut out = String::new();
    let mut any_failed = false;
    let suites: Vec<&str> = match suite {
        "all" => vec!["confluence", "standardization", "invariance"],
        s => vec![s],
    };
    for name in suites {
        let (checked, failures) = match name {
            "confluence" => fuzz_confluence(model, &cfg, cases, seed, states)?,
            "standardization" => fuzz_standardization(model, &cfg, cases, seed, states)?,
            "invariance" => fuzz_invariance(model, &cfg, cases, seed, states)?,
            other => return Err(format!("unknown suite `{other}`")),
        };
        any_failed |= !failures.is_empty();
        if tsv {
            let _ = writeln!(out, "suite\t{name}\t{checked}\t{}", failures.len());
            for s in &failures {
                let _ = writeln!(out, "failed-seed\t{s}");
            }
        } else {
            let _ = writeln!(out, "{name}: {checked} checked, {} failed", failures.len());
            if !failures.is_empty() {
                let shown: Vec<String> = failures.iter().map(u64::to_string).collect();
                let _ = writeln!(out, "  failing seeds: {}", shown.join(" "));
            }
        }
    }
    Ok((out, if any_failed { 1 } else { 0 }))
}

/// One-step forks rejoin the maximal parallel reduct, and iterating it
/// joins any two forks.
fn fuzz_confluence(
    model: &Model,
    cfg: &GenConfig,
    cases: usize,
    seed: u64,
    _states: usize,
) -> Result<(usize, Vec<u64>), String> {
    let mut failures = Vec::new();
    let mut checked = 0;
    for i in 0..cases {
        let case_seed = seed.wrapping_add(i as u64);
        let e = random_term(case_seed, cfg);
        let ok = (|| -> reduction::Result<bool> {
            let plus = full_parallel_reduct(model, &e)?;
            let rxs = redexes(model, &e)?;
            let mut forks = Vec::new();
            for (pos, rule) in rxs.iter().take(8) {
                let f = step(model, &e, pos, *rule)?;
                if !par_reduces(model, &f, &plus)? {
                    return Ok(false);
                }
                forks.push(f);
            }
            // diamond closure on fork pairs via iterated maximal reducts
            for a in 0..forks.len() {
                for b in (a + 1)..forks.len() {
                    if !joins(model, &forks[a], &forks[b], 10)? {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        })()
        .map_err(|e| e.to_string())?;
        checked += 1;
        if !ok {
            failures.push(case_seed);
        }
    }
    Ok((checked, failures))
}

pub fn joins(model: &Model, a: &Expr, b: &Expr, rounds: usize) -> reduction::Result<bool> {
    let mut left = vec![a.clone()];
    let mut right = vec![b.clone()];
    for _ in 0..rounds {
        left.push(full_parallel_reduct(model, left.last().unwrap())?);
        right.push(full_parallel_reduct(model, right.last().unwrap())?);
    }
    let keys: std::collections::HashSet<_> =
        left.iter().map(crate::syntax::alpha_key).collect();
    Ok(right.iter().any(|e| keys.contains(&crate::syntax::alpha_key(e))))
}

/// A full-reduction route to a may-head-normal form within n steps gives
/// a head route within 4n steps.
fn fuzz_standardization(
    model: &Model,
    cfg: &GenConfig,
    cases: usize,
    seed: u64,
    states: usize,
) -> Result<(usize, Vec<u64>), String> {
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut i = 0u64;
    while checked < cases && i < (cases as u64) * 50 {
        let case_seed = seed.wrapping_add(i);
        i += 1;
        let e = random_term(case_seed, cfg);
        let full = match full_converges(model, &e, 20, states) {
            Ok(tr) => tr,
            Err(_) => continue,
        };
        if !full.converged() {
            continue;
        }
        let n = full.steps.len().max(1);
        checked += 1;
        match head_converges(model, &e, 4 * n, states) {
            Ok(tr) if tr.converged() => {}
            _ => failures.push(case_seed),
        }
    }
    Ok((checked, failures))
}

/// Head convergence within n steps survives any single reduction step
/// with the same bound.
fn fuzz_invariance(
    model: &Model,
    cfg: &GenConfig,
    cases: usize,
    seed: u64,
    states: usize,
) -> Result<(usize, Vec<u64>), String> {
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut i = 0u64;
    while checked < cases && i < (cases as u64) * 50 {
        let case_seed = seed.wrapping_add(i);
        i += 1;
        let e = random_term(case_seed, cfg);
        let head = match head_converges(model, &e, 30, states) {
            Ok(tr) => tr,
            Err(_) => continue,
        };
        if !head.converged() {
            continue;
        }
        let n = head.steps.len();
        if n == 0 {
            continue;
        }
        checked += 1;
        let ok = (|| -> reduction::Result<bool> {
            for (pos, rule) in redexes(model, &e)? {
                let f = step(model, &e, &pos, rule)?;
                let tr = head_converges(model, &f, n, states)?;
                if !tr.converged() {
                    return Ok(false);
                }
            }
            Ok(true)
        })()
        .map_err(|e| e.to_string())?;
        if !ok {
            failures.push(case_seed);
        }
    }
    Ok((checked, failures))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser as _;

    fn run_args(args: &[&str]) -> (String, u8) {
        let cli = Cli::parse_from(args);
        match dispatch(&cli) {
            Ok(pair) => pair,
            Err(msg) => (format!("error: {msg}\n"), 1),
        }
    }

    #[test]
    fn reduce_identity_test_exits_zero() {
        let (out, code) = run_args(&[
            "lamtest", "reduce", "--model", "norm", "--strategy", "head", "tau<p>(I eb<{p}>)",
        ]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("VERDICT converged(2)"), "{out}");
    }

    #[test]
    fn reduce_refuted_test_exits_two() {
        let (out, code) = run_args(&[
            "lamtest", "reduce", "--model", "dinf", r"tau<*>((\x.\y. y x) eb<{*}>)",
        ]);
        assert_eq!(code, 2, "{out}");
        assert!(out.contains("VERDICT exhausted"), "{out}");
    }

    #[test]
    fn member_and_typecheck() {
        let (out, code) = run_args(&["lamtest", "member", "--model", "norm", "|- I : p"]);
        assert_eq!(code, 0, "{out}");
        let (out, code) = run_args(&["lamtest", "member", "--model", "norm", "|- Omega : p"]);
        assert_eq!(code, 2, "{out}");
        let (out, code) = run_args(&["lamtest", "typecheck", "--model", "norm", "|- I : p"]);
        assert_eq!(code, 0, "{out}");
        let (out, code) = run_args(&[
            "lamtest", "typecheck", "--model", "norm", "x:{q} |- x : p",
        ]);
        assert_eq!(code, 0, "{out}");
        let (_, code) = run_args(&["lamtest", "member", "--model", "norm", "nonsense"]);
        assert_eq!(code, 1);
    }

    #[test]
    fn probe_and_counterexample() {
        let (out, code) = run_args(&["lamtest", "probe", "--model", "park", "--g", "const 1"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("lasso"), "{out}");

        let (out, code) = run_args(&[
            "lamtest", "probe", "--model", "dinf", "--g", "const 1", "--depth", "10",
        ]);
        assert_eq!(code, 2, "{out}");
        assert!(out.contains("no witness to depth 10"), "{out}");

        let (out, code) = run_args(&[
            "lamtest", "counterexample", "--model", "norm", "--g", "const 1", "--fuel", "2000",
        ]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("SHIFT-CYCLE(2)"), "{out}");
    }

    #[test]
    fn fuzz_smoke() {
        let (out, code) = run_args(&[
            "lamtest", "fuzz", "--model", "norm", "--suite", "confluence", "--cases", "10",
            "--size", "12",
        ]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("confluence: 10 checked, 0 failed"), "{out}");
    }

    #[test]
    fn byte_identical_reruns() {
        let args = [
            "lamtest", "reduce", "--model", "park", "--format", "tsv", r"tau<*>(\x. x x)",
        ];
        let first = run_args(&args);
        let second = run_args(&args);
        assert_eq!(first, second);
    }

    #[test]
    fn models_lists_builtins() {
        let (out, code) = run_args(&["lamtest", "models"]);
        assert_eq!(code, 0);
        for name in ["dinf", "park", "norm", "omega", "zed", "hf"] {
            assert!(out.contains(name), "{out}");
        }
    }
}
