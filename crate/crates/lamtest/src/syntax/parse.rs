//! Recursive-descent parser for the concrete grammar.
//!
//! `\x. M` abstraction, juxtaposition application, `tau<E>(M)`, `tb<E>(Q)`,
//! `Q + Q`, `Q * Q`, `eps`, `0`, and the sugar `eb<{E,...}>`, `I`, `S`,
//! `Theta`, `Omega`, `church(n)`, `G[GSPEC](n)`, `Jg[GSPEC](n)`.
//! Element names resolve against the active model, so parsing needs one.
//! `0` is a term or a test depending on position; at a position that allows
//! both it parses as the term.

use thiserror::Error;

use super::{build_g, canon_expr, church, combinator, Expr, Term, Test};
use crate::kmodel::{Antichain, Element, GSpec, Model, ModelError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("syntax error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

type Result<T> = std::result::Result<T, SyntaxError>;

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T> {
    Err(SyntaxError::Parse { pos, msg: msg.into() })
}

const KEYWORDS: &[&str] = &["I", "S", "Theta", "Omega", "church", "eps", "tau", "tb", "eb", "G", "Jg"];

// ---------------------------------------------------------------------------
// lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Backslash,
    Dot,
    LParen,
    RParen,
    Plus,
    Star,
    Ident(String),
    Num(u32),
    TauOp(String),
    TbOp(String),
    EbOp(String),
    GOp(String),
    JgOp(String),
    Eps,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Scans `src[start..]` (just past `<`) up to the matching `>`; a `>`
/// immediately preceded by `-` belongs to an arrow inside the element.
fn scan_angle(src: &[u8], start: usize) -> Option<(String, usize)> {
    let mut i = start;
    while i < src.len() {
        if src[i] == b'>' && (i == start || src[i - 1] != b'-') {
            let inner = std::str::from_utf8(&src[start..i]).ok()?.to_string();
            return Some((inner, i + 1));
        }
        i += 1;
    }
    None
}

fn lex(text: &str) -> Result<Lexer> {
    let src = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < src.len() {
        let c = src[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let pos = i;
        match c {
            '\\' => {
                toks.push((Tok::Backslash, pos));
                i += 1;
            }
            '.' => {
                toks.push((Tok::Dot, pos));
                i += 1;
            }
            '(' => {
                toks.push((Tok::LParen, pos));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, pos));
                i += 1;
            }
            '+' => {
                toks.push((Tok::Plus, pos));
                i += 1;
            }
            '*' => {
                toks.push((Tok::Star, pos));
                i += 1;
            }
            '0'..='9' => {
                let mut j = i;
                while j < src.len() && (src[j] as char).is_ascii_digit() {
                    j += 1;
                }
                let n: u32 = text[i..j]
                    .parse()
                    .map_err(|_| SyntaxError::Parse { pos, msg: "number too large".into() })?;
                toks.push((Tok::Num(n), pos));
                i = j;
            }
            _ if is_ident_start(c) => {
                let mut j = i;
                while j < src.len() && is_ident_char(src[j] as char) {
                    j += 1;
                }
                let word = &text[i..j];
                i = j;
                match word {
                    "eps" => toks.push((Tok::Eps, pos)),
                    "tau" | "tb" | "eb" => {
                        if i >= src.len() || src[i] != b'<' {
                            return err(pos, format!("`{word}` must be followed by `<element>`"));
                        }
                        let (inner, next) = scan_angle(src, i + 1)
                            .ok_or(SyntaxError::Parse { pos, msg: "unterminated `<`".into() })?;
                        i = next;
                        toks.push((
                            match word {
                                "tau" => Tok::TauOp(inner),
                                "tb" => Tok::TbOp(inner),
                                _ => Tok::EbOp(inner),
                            },
                            pos,
                        ));
                    }
                    "G" | "Jg" => {
                        if i >= src.len() || src[i] != b'[' {
                            return err(pos, format!("`{word}` must be followed by `[gspec]`"));
                        }
                        let close = text[i..]
                            .find(']')
                            .ok_or(SyntaxError::Parse { pos, msg: "unterminated `[`".into() })?;
                        let inner = text[i + 1..i + close].to_string();
                        i += close + 1;
                        toks.push((
                            if word == "G" { Tok::GOp(inner) } else { Tok::JgOp(inner) },
                            pos,
                        ));
                    }
                    _ => toks.push((Tok::Ident(word.to_string()), pos)),
                }
            }
            _ => return err(pos, format!("unexpected character `{c}`")),
        }
    }
    Ok(Lexer { toks, at: 0 })
}

impl Lexer {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(usize::MAX)
    }

    fn next(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.at).cloned();
        self.at += 1;
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<()> {
        match self.next() {
            Some((t, _)) if &t == want => Ok(()),
            Some((t, p)) => err(p, format!("expected {what}, found {t:?}")),
            None => err(usize::MAX, format!("expected {what}, found end of input")),
        }
    }
}

// ---------------------------------------------------------------------------
// elements

#[derive(Debug, Clone, PartialEq)]
enum ETok {
    LBrace,
    RBrace,
    Comma,
    Arrow,
    Colon,
    Bar,
    Name(String),
}

fn lex_elems(text: &str, base: usize) -> Result<Vec<(ETok, usize)>> {
    let src = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < src.len() {
        let c = src[i] as char;
        let pos = base + i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        match c {
            '{' => {
                out.push((ETok::LBrace, pos));
                i += 1;
            }
            '}' => {
                out.push((ETok::RBrace, pos));
                i += 1;
            }
            ',' => {
                out.push((ETok::Comma, pos));
                i += 1;
            }
            ':' => {
                out.push((ETok::Colon, pos));
                i += 1;
            }
            '|' => {
                if src.get(i + 1) == Some(&b'-') {
                    out.push((ETok::Bar, pos));
                    i += 2;
                } else {
                    return err(pos, "expected `|-`");
                }
            }
            '-' => {
                if src.get(i + 1) == Some(&b'>') {
                    out.push((ETok::Arrow, pos));
                    i += 2;
                } else if src.get(i + 1).map_or(false, |b| (*b as char).is_ascii_digit()) {
                    let mut j = i + 1;
                    while j < src.len() && (src[j] as char).is_ascii_digit() {
                        j += 1;
                    }
                    out.push((ETok::Name(text[i..j].to_string()), pos));
                    i = j;
                } else {
                    return err(pos, "stray `-`");
                }
            }
            _ if c.is_ascii_alphanumeric() || c == '_' || c == '*' || c == '\'' => {
                let mut j = i;
                while j < src.len() {
                    let d = src[j] as char;
                    if d.is_ascii_alphanumeric() || d == '_' || d == '*' || d == '\'' {
                        j += 1;
                    } else {
                        break;
                    }
                }
                out.push((ETok::Name(text[i..j].to_string()), pos));
                i = j;
            }
            _ => return err(pos, format!("unexpected character `{c}` in element")),
        }
    }
    Ok(out)
}

struct ElemParser<'m> {
    toks: Vec<(ETok, usize)>,
    at: usize,
    model: &'m Model,
}

impl<'m> ElemParser<'m> {
    fn peek(&self) -> Option<&ETok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(usize::MAX)
    }

    fn next(&mut self) -> Option<(ETok, usize)> {
        let t = self.toks.get(self.at).cloned();
        self.at += 1;
        t
    }

    /// elem := NAME | '{' [elem, ...] '}' '->' elem
    fn element(&mut self) -> Result<Element> {
        match self.next() {
            Some((ETok::Name(n), _)) => Ok(Element::Atom(n)),
            Some((ETok::LBrace, open)) => {
                let mut members = Vec::new();
                loop {
                    match self.peek() {
                        Some(ETok::RBrace) => {
                            self.next();
                            break;
                        }
                        Some(_) => {
                            members.push(self.element()?);
                            match self.peek() {
                                Some(ETok::Comma) => {
                                    self.next();
                                }
                                Some(ETok::RBrace) => {}
                                _ => return err(self.pos(), "expected `,` or `}` in antichain"),
                            }
                        }
                        None => return err(open, "unterminated `{`"),
                    }
                }
                match self.next() {
                    Some((ETok::Arrow, _)) => {
                        let tail = self.element()?;
                        Ok(Element::Arrow(
                            Antichain::from_vec_unchecked(members),
                            Box::new(tail),
                        ))
                    }
                    other => err(
                        other.map(|(_, p)| p).unwrap_or(open),
                        "an antichain must be followed by `->`",
                    ),
                }
            }
            other => err(other.map(|(_, p)| p).unwrap_or(usize::MAX), "expected an element"),
        }
    }

    /// Comma-separated antichain body `e1, e2, ...` (already inside braces).
    fn antichain_members(&mut self) -> Result<Vec<Element>> {
        let mut members = Vec::new();
        if self.peek().is_none() {
            return Ok(members);
        }
        loop {
            members.push(self.element()?);
            match self.next() {
                Some((ETok::Comma, _)) => {}
                None => break,
                Some((_, p)) => return err(p, "expected `,` between antichain members"),
            }
        }
        Ok(members)
    }
}

/// Resolves an element source against the model: unknown atoms are
/// rejected, heads are normalized, and the result is folded canonical.
pub(super) fn resolve_element(src: &str, base: usize, model: &Model) -> Result<Element> {
    let toks = lex_elems(src, base)?;
    let mut p = ElemParser { toks, at: 0, model };
    let raw = p.element()?;
    if p.at != p.toks.len() {
        return err(p.pos(), "trailing input after element");
    }
    Ok(p.model.canonicalize_element(&raw)?)
}

/// Resolves `{e1,...}` into a normalized antichain.
pub(super) fn resolve_antichain(src: &str, base: usize, model: &Model) -> Result<Antichain> {
    let toks = lex_elems(src, base)?;
    let mut p = ElemParser { toks, at: 0, model };
    match p.next() {
        Some((ETok::LBrace, _)) => {}
        other => {
            return err(
                other.map(|(_, q)| q).unwrap_or(base),
                "expected `{` to open an antichain",
            )
        }
    }
    let close = p
        .toks
        .iter()
        .rposition(|(t, _)| *t == ETok::RBrace)
        .ok_or(SyntaxError::Parse { pos: base, msg: "unterminated antichain".into() })?;
    if close != p.toks.len() - 1 {
        return err(base, "trailing input after antichain");
    }
    p.toks.truncate(close);
    let raw = p.antichain_members()?;
    let members = raw
        .iter()
        .map(|e| model.canonicalize_element(e))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(model.normalize_antichain(&members)?)
}

/// Parses the environment part of a judgment: `x:{e,...}, y:{...}`.
/// Empty input gives an empty environment.
pub fn parse_judgment_env(text: &str, model: &Model) -> Result<Vec<(String, Antichain)>> {
    let toks = lex_elems(text, 0)?;
    let mut p = ElemParser { toks, at: 0, model };
    let mut env = Vec::new();
    if p.peek().is_none() {
        return Ok(env);
    }
    loop {
        let name = match p.next() {
            Some((ETok::Name(n), _)) => n,
            other => return err(other.map(|(_, q)| q).unwrap_or(0), "expected a variable name"),
        };
        match p.next() {
            Some((ETok::Colon, _)) => {}
            other => return err(other.map(|(_, q)| q).unwrap_or(0), "expected `:`"),
        }
        match p.next() {
            Some((ETok::LBrace, _)) => {}
            other => return err(other.map(|(_, q)| q).unwrap_or(0), "expected `{`"),
        }
        let mut members = Vec::new();
        loop {
            match p.peek() {
                Some(ETok::RBrace) => {
                    p.next();
                    break;
                }
                Some(_) => {
                    members.push(p.element()?);
                    if let Some(ETok::Comma) = p.peek() {
                        p.next();
                    }
                }
                None => return err(0, "unterminated `{` in environment"),
            }
        }
        let members = members
            .iter()
            .map(|e| model.canonicalize_element(e))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        env.push((name, model.normalize_antichain(&members)?));
        match p.next() {
            Some((ETok::Comma, _)) => {}
            None => break,
            Some((_, q)) => return err(q, "expected `,` between environment entries"),
        }
    }
    Ok(env)
}

// ---------------------------------------------------------------------------
// expression grammar

#[derive(Debug, Clone)]
enum Pre {
    Var(String, usize),
    Lam(Vec<String>, Box<Pre>),
    App(Box<Pre>, Box<Pre>),
    Sum(Vec<Pre>, usize),
    Prod(Vec<Pre>, usize),
    Tau(Element, Box<Pre>),
    TauBar(Element, Box<Pre>),
    EpsBar(Antichain),
    Eps,
    Zero,
    Lifted(Term),
    Jg(GSpec, u32),
}

struct Parser<'m> {
    lx: Lexer,
    model: &'m Model,
}

impl<'m> Parser<'m> {
    fn sum(&mut self) -> Result<Pre> {
        let pos = self.lx.pos();
        let mut parts = vec![self.prod()?];
        while self.lx.peek() == Some(&Tok::Plus) {
            self.lx.next();
            parts.push(self.prod()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Pre::Sum(parts, pos) })
    }

    fn prod(&mut self) -> Result<Pre> {
        let pos = self.lx.pos();
        let mut parts = vec![self.application()?];
        while self.lx.peek() == Some(&Tok::Star) {
            self.lx.next();
            parts.push(self.application()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Pre::Prod(parts, pos) })
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.lx.peek(),
            Some(
                Tok::Backslash
                    | Tok::LParen
                    | Tok::Ident(_)
                    | Tok::Num(_)
                    | Tok::TauOp(_)
                    | Tok::TbOp(_)
                    | Tok::EbOp(_)
                    | Tok::GOp(_)
                    | Tok::JgOp(_)
                    | Tok::Eps
            )
        )
    }

    fn application(&mut self) -> Result<Pre> {
        let mut head = self.atom()?;
        while self.starts_atom() {
            let arg = self.atom()?;
            head = Pre::App(Box::new(head), Box::new(arg));
        }
        Ok(head)
    }

    fn atom(&mut self) -> Result<Pre> {
        let (tok, pos) = self
            .lx
            .next()
            .ok_or(SyntaxError::Parse { pos: usize::MAX, msg: "unexpected end of input".into() })?;
        match tok {
            Tok::Backslash => {
                let mut binders = Vec::new();
                loop {
                    match self.lx.next() {
                        Some((Tok::Ident(x), bpos)) => {
                            if KEYWORDS.contains(&x.as_str()) {
                                return err(bpos, format!("`{x}` is reserved"));
                            }
                            binders.push(x);
                        }
                        Some((Tok::Dot, _)) => break,
                        Some((t, p)) => return err(p, format!("expected binder or `.`, found {t:?}")),
                        None => return err(pos, "unterminated abstraction"),
                    }
                }
                if binders.is_empty() {
                    return err(pos, "abstraction needs at least one binder");
                }
                let body = self.sum()?;
                Ok(Pre::Lam(binders, Box::new(body)))
            }
            Tok::LParen => {
                let inner = self.sum()?;
                self.lx.expect(&Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::TauOp(src) => {
                let e = resolve_element(&src, pos, self.model)?;
                self.lx.expect(&Tok::LParen, "`(` after tau<...>")?;
                let body = self.sum()?;
                self.lx.expect(&Tok::RParen, "`)`")?;
                Ok(Pre::Tau(e, Box::new(body)))
            }
            Tok::TbOp(src) => {
                let e = resolve_element(&src, pos, self.model)?;
                self.lx.expect(&Tok::LParen, "`(` after tb<...>")?;
                let body = self.sum()?;
                self.lx.expect(&Tok::RParen, "`)`")?;
                Ok(Pre::TauBar(e, Box::new(body)))
            }
            Tok::EbOp(src) => Ok(Pre::EpsBar(resolve_antichain(&src, pos, self.model)?)),
            Tok::GOp(src) => {
                let g = GSpec::parse(&src).map_err(|msg| SyntaxError::Parse { pos, msg })?;
                let n = self.index_arg()?;
                Ok(Pre::Lifted(build_g(&g, n)))
            }
            Tok::JgOp(src) => {
                let g = GSpec::parse(&src).map_err(|msg| SyntaxError::Parse { pos, msg })?;
                let n = self.index_arg()?;
                Ok(Pre::Jg(g, n))
            }
            Tok::Eps => Ok(Pre::Eps),
            Tok::Num(0) => Ok(Pre::Zero),
            Tok::Num(n) => err(pos, format!("`{n}` is not an expression")),
            Tok::Ident(word) => match word.as_str() {
                "church" => {
                    let n = self.index_arg()?;
                    Ok(Pre::Lifted(church(n)))
                }
                "I" | "S" | "Theta" | "Omega" => Ok(Pre::Lifted(combinator(&word).unwrap())),
                _ => Ok(Pre::Var(word, pos)),
            },
            t => err(pos, format!("unexpected token {t:?}")),
        }
    }

    fn index_arg(&mut self) -> Result<u32> {
        self.lx.expect(&Tok::LParen, "`(`")?;
        let n = match self.lx.next() {
            Some((Tok::Num(n), _)) => n,
            Some((t, p)) => return err(p, format!("expected a number, found {t:?}")),
            None => return err(usize::MAX, "expected a number"),
        };
        self.lx.expect(&Tok::RParen, "`)`")?;
        Ok(n)
    }
}

// ---------------------------------------------------------------------------
// elaboration: decide term vs test by position

#[derive(Clone, Copy, PartialEq, Debug)]
enum Want {
    Term,
    Test,
    Any,
}

fn elaborate(pre: &Pre, want: Want) -> Result<Expr> {
    let as_term = |e: Expr, pos: usize| -> Result<Expr> {
        match (&e, want) {
            (Expr::Term(_), Want::Test) => err(pos, "expected a test, found a term"),
            _ => Ok(e),
        }
    };
    match pre {
        Pre::Var(x, pos) => as_term(Expr::Term(Term::var(x.clone())), *pos),
        Pre::Lifted(t) => as_term(Expr::Term(t.clone()), 0),
        Pre::Jg(g, n) => as_term(Expr::Term(Term::Jg(g.clone(), *n)), 0),
        Pre::EpsBar(a) => as_term(Expr::Term(super::eps_bar(a)), 0),
        Pre::Lam(binders, body) => {
            if want == Want::Test {
                return err(0, "expected a test, found an abstraction");
            }
            let body = expect_term(elaborate(body, Want::Term)?)?;
            let mut t = body;
            for b in binders.iter().rev() {
                t = Term::lam(b.clone(), t);
            }
            Ok(Expr::Term(t))
        }
        Pre::App(f, a) => {
            if want == Want::Test {
                return err(0, "expected a test, found an application");
            }
            let f = expect_term(elaborate(f, Want::Term)?)?;
            let a = expect_term(elaborate(a, Want::Term)?)?;
            Ok(Expr::Term(Term::app(f, a)))
        }
        Pre::Tau(e, body) => {
            if want == Want::Term {
                return err(0, "expected a term, found a test");
            }
            let body = expect_term(elaborate(body, Want::Term)?)?;
            Ok(Expr::Test(Test::tau(e.clone(), body)))
        }
        Pre::TauBar(e, body) => {
            if want == Want::Test {
                return err(0, "expected a test, found a tau-bar term");
            }
            let body = expect_test(elaborate(body, Want::Test)?)?;
            Ok(Expr::Term(Term::TauBarSum(vec![(e.clone(), body)])))
        }
        Pre::Eps => {
            if want == Want::Term {
                return err(0, "expected a term, found `eps`");
            }
            Ok(Expr::Test(Test::eps()))
        }
        Pre::Zero => Ok(match want {
            Want::Test => Expr::Test(Test::zero()),
            _ => Expr::Term(Term::zero()),
        }),
        Pre::Prod(parts, pos) => {
            if want == Want::Term {
                return err(*pos, "expected a term, found a product");
            }
            let children = parts
                .iter()
                .map(|p| elaborate(p, Want::Test).and_then(expect_test))
                .collect::<Result<Vec<_>>>()?;
            Ok(Expr::Test(Test::Prod(children)))
        }
        Pre::Sum(parts, pos) => {
            let children = parts
                .iter()
                .map(|p| elaborate(p, Want::Any))
                .collect::<Result<Vec<_>>>()?;
            let any_term = children.iter().any(|c| {
                matches!(c, Expr::Term(t) if !t.is_zero())
            });
            let any_test = children.iter().any(|c| {
                matches!(c, Expr::Test(q) if !q.is_zero())
            });
            if any_term && any_test {
                return err(*pos, "sum mixes terms and tests");
            }
            if any_term || want == Want::Term || (want == Want::Any && !any_test) {
                if want == Want::Test {
                    return err(*pos, "expected a test, found a term sum");
                }
                // a term sum: zeros vanish, tau-bar summands merge, and a
                // lone non-abstraction summand is the sum itself
                let mut summands = Vec::new();
                let mut other: Option<Term> = None;
                for c in children {
                    match c {
                        Expr::Term(Term::TauBarSum(s)) => summands.extend(s),
                        Expr::Term(t) if other.is_none() => other = Some(t),
                        Expr::Term(_) => {
                            return err(*pos, "only tau-bar terms can be summed as terms")
                        }
                        Expr::Test(q) if q.is_zero() => {}
                        Expr::Test(_) => unreachable!("mixed sums are rejected above"),
                    }
                }
                match other {
                    None => Ok(Expr::Term(Term::TauBarSum(summands))),
                    Some(t) if summands.is_empty() => Ok(Expr::Term(t)),
                    Some(_) => err(*pos, "only tau-bar terms can be summed as terms"),
                }
            } else {
                let mut out = Vec::new();
                for c in children {
                    match c {
                        Expr::Test(q) => out.push(q),
                        Expr::Term(t) if t.is_zero() => {}
                        Expr::Term(_) => unreachable!("mixed sums are rejected above"),
                    }
                }
                Ok(Expr::Test(Test::Sum(out)))
            }
        }
    }
}

fn expect_term(e: Expr) -> Result<Term> {
    match e {
        Expr::Term(t) => Ok(t),
        Expr::Test(_) => err(0, "expected a term, found a test"),
    }
}

fn expect_test(e: Expr) -> Result<Test> {
    match e {
        Expr::Test(q) => Ok(q),
        Expr::Term(t) if t.is_zero() => Ok(Test::zero()),
        Expr::Term(_) => err(0, "expected a test, found a term"),
    }
}

fn parse_with(text: &str, model: &Model, want: Want) -> Result<Expr> {
    let lx = lex(text)?;
    let mut p = Parser { lx, model };
    if p.lx.peek().is_none() {
        return err(0, "empty input");
    }
    let pre = p.sum()?;
    if let Some(_t) = p.lx.peek() {
        return err(p.lx.pos(), "trailing input after expression");
    }
    let e = elaborate(&pre, want)?;
    Ok(canon_expr(&e))
}

/// Parses a term or a test, deciding by shape.
pub fn parse_expr(text: &str, model: &Model) -> Result<Expr> {
    parse_with(text, model, Want::Any)
}

pub fn parse_term(text: &str, model: &Model) -> Result<Term> {
    match parse_with(text, model, Want::Term)? {
        Expr::Term(t) => Ok(t),
        Expr::Test(_) => err(0, "expected a term"),
    }
}

pub fn parse_test(text: &str, model: &Model) -> Result<Test> {
    match parse_with(text, model, Want::Test)? {
        Expr::Test(q) => Ok(q),
        Expr::Term(t) if t.is_zero() => Ok(Test::zero()),
        Expr::Term(_) => err(0, "expected a test"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kmodel::BuiltinModel;
    use crate::syntax::{alpha_eq, eps_bar_point, identity};

    fn norm() -> Model {
        Model::builtin(&BuiltinModel::Norm).unwrap()
    }
    fn dinf() -> Model {
        Model::builtin(&BuiltinModel::Dinf).unwrap()
    }

    #[test]
    fn parses_basic_terms() {
        let m = norm();
        let t = parse_term(r"\x. x", &m).unwrap();
        assert_eq!(t, Term::lam("x", Term::var("x")));

        let t = parse_term(r"\x y. x y", &m).unwrap();
        assert_eq!(
            t,
            Term::lam("x", Term::lam("y", Term::app(Term::var("x"), Term::var("y"))))
        );

        let app = parse_term("x y z", &m).unwrap();
        assert_eq!(
            app,
            Term::app(Term::app(Term::var("x"), Term::var("y")), Term::var("z"))
        );
    }

    #[test]
    fn parses_test_operators() {
        let m = norm();
        let q = parse_test("tau<p>(\\x. x)", &m).unwrap();
        assert_eq!(q, Test::tau(Element::atom("p"), identity()));

        let t = parse_term("eb<{p}>", &m).unwrap();
        assert_eq!(t, eps_bar_point(&Element::atom("p")));

        let q = parse_test("tau<p>(x) * tau<q>(y) + eps", &m).unwrap();
        match q {
            Test::Sum(children) => assert_eq!(children.len(), 2),
            other => panic!("expected a sum, got {other}"),
        }
    }

    #[test]
    fn parses_arrow_elements() {
        let m = norm();
        // {q} -> p is in the pairing table, so it folds to the atom p
        let q = parse_test("tau<{q} -> p>(x)", &m).unwrap();
        assert_eq!(q, Test::tau(Element::atom("p"), Term::var("x")));

        // {p,q} normalizes to {q} first
        let q2 = parse_test("tau<{p,q} -> p>(x)", &m).unwrap();
        assert_eq!(q2, q);

        let d = dinf();
        let q = parse_test("tau<{*} -> *>(x)", &d).unwrap();
        match q {
            Test::Tau(Element::Arrow(a, t), _) => {
                assert_eq!(a.len(), 1);
                assert_eq!(*t, Element::atom("*"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_is_positional() {
        let m = norm();
        assert_eq!(parse_term("0", &m).unwrap(), Term::zero());
        assert_eq!(parse_test("tb<p>(0) ", &m).unwrap_err(), {
            SyntaxError::Parse { pos: 0, msg: "expected a test, found a tau-bar term".into() }
        });
        let t = parse_term("tb<p>(0)", &m).unwrap();
        assert_eq!(t, Term::TauBarSum(vec![(Element::atom("p"), Test::zero())]));
    }

    #[test]
    fn sugar_combinators() {
        let m = norm();
        assert!(alpha_eq(
            &Expr::Term(parse_term("I", &m).unwrap()),
            &Expr::Term(identity())
        ));
        let c2 = parse_term("church(2)", &m).unwrap();
        assert_eq!(c2, crate::syntax::church(2));
        let g = parse_term("G[const 1](0)", &m).unwrap();
        assert_eq!(g, crate::syntax::build_g(&GSpec::Const(1), 0));
        let j = parse_term("Jg[const 1](3)", &m).unwrap();
        assert_eq!(j, Term::Jg(GSpec::Const(1), 3));
    }

    #[test]
    fn jg_print_round_trips() {
        let m = norm();
        let j = Term::Jg(GSpec::Table(vec![1, 2]), 3);
        let shown = j.to_string();
        assert_eq!(shown, "Jg[table 1,2](3)");
        assert_eq!(parse_term(&shown, &m).unwrap(), j);
    }

    #[test]
    fn unknown_atoms_are_rejected() {
        let m = norm();
        let e = parse_test("tau<r>(x)", &m).unwrap_err();
        assert!(matches!(e, SyntaxError::Model(ModelError::UnknownAtom { .. })));
    }

    #[test]
    fn rejects_malformed_input() {
        let m = norm();
        assert!(parse_term("", &m).is_err());
        assert!(parse_term("(x", &m).is_err());
        assert!(parse_term("x +", &m).is_err());
        assert!(parse_expr("x + tau<p>(y)", &m).is_err());
        assert!(parse_term("3", &m).is_err());
    }

    #[test]
    fn judgment_env_parses() {
        let m = norm();
        let env = parse_judgment_env("x:{p, q}, y:{}", &m).unwrap();
        assert_eq!(env.len(), 2);
        // {p,q} normalizes to {q}
        assert_eq!(env[0].1, Antichain::singleton(Element::atom("q")));
        assert!(env[1].1.is_empty());
        assert!(parse_judgment_env("", &m).unwrap().is_empty());
    }

    #[test]
    fn print_parse_round_trip_on_samples() {
        let m = norm();
        for src in [
            r"\x. x",
            r"(\x. x x) (\y. y)",
            "tau<p>(eb<{p,q}> (x + 0))",
            "tb<q>(tau<p>(x) * (tau<q>(y) + eps))",
            "tau<{{q} -> q} -> p>(Jg[const 2](1))",
            "0",
            "eps",
            "eb<{}>",
        ] {
            let e = parse_expr(src, &m).unwrap();
            let shown = e.to_string();
            let back = parse_expr(&shown, &m).unwrap();
            assert_eq!(e, back, "round trip through `{shown}` from `{src}`");
        }
    }
}
