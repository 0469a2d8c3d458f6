//! Symbolic extensional partial K-models.
//!
//! A model is a finite base poset of atoms together with a partial pairing
//! table that names some arrows `a ⊸ t` (an antichain and a tail) as atoms.
//! Elements are atoms or structural arrow nodes; an arrow node is only ever
//! built when the pair is *not* in the table, so every element has exactly
//! one canonical form. Unfolding an atom through the table is total (the
//! table is onto the atoms), which is what makes the order between an atom
//! and an arrow decidable by a single unfolding step.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown atom `{atom}` in model `{model}`")]
    UnknownAtom { atom: String, model: String },
    #[error("model parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("order is not antisymmetric: `{0}` and `{1}` lie on a cycle")]
    OrderCycle(String, String),
    #[error("arrow table is not injective: atom `{0}` has two preimages")]
    NotInjective(String),
    #[error("arrow table is not onto the atoms: `{0}` has no preimage")]
    NotSurjective(String),
    #[error("arrow table does not mirror the order on `{0}` vs `{1}`")]
    NotOrderIso(String, String),
    #[error("arrow head {0} is not an antichain")]
    HeadNotAntichain(String),
    #[error("atom `{0}` unfolds outside the materialized window")]
    WindowExceeded(String),
    #[error("element enumeration exceeded the cap of {0}")]
    ResourceLimit(usize),
    #[error("builtin model error: {0}")]
    Builtin(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// A point of the model: a named atom or a structural arrow node.
///
/// Arrow nodes are canonical: `Arrow(a, t)` is only constructed through
/// [`Model::fold`], which first consults the pairing table.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    Atom(String),
    Arrow(Antichain, Box<Element>),
}

impl Element {
    pub fn atom(name: impl Into<String>) -> Self {
        Element::Atom(name.into())
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Element::Atom(_))
    }

    /// Structural arrow-nesting depth; atoms count as 0.
    pub fn depth(&self) -> usize {
        match self {
            Element::Atom(_) => 0,
            Element::Arrow(a, t) => {
                1 + a.iter().map(Element::depth).max().unwrap_or(0).max(t.depth())
            }
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Atom(n) => write!(f, "{n}"),
            Element::Arrow(a, t) => write!(f, "{a} -> {t}"),
        }
    }
}

/// A finite set of pairwise order-incomparable elements, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Antichain(Vec<Element>);

impl Antichain {
    pub fn empty() -> Self {
        Antichain(Vec::new())
    }

    /// Builds from raw elements without checking incomparability.
    /// Use [`Model::normalize_antichain`] for untrusted input.
    pub fn from_vec_unchecked(mut v: Vec<Element>) -> Self {
        v.sort();
        v.dedup();
        Antichain(v)
    }

    pub fn singleton(e: Element) -> Self {
        Antichain(vec![e])
    }

    pub fn iter(&self) -> impl Iterator<Item = &Element> {
        self.0.iter()
    }

    pub fn elements(&self) -> &[Element] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Antichain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

/// A total function on naturals given finitely: used as the growth bound in
/// hyperimmunity probes and as the arity schedule of the counterexample
/// term family.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GSpec {
    Const(u32),
    /// Finite table; the last value repeats forever. Must be nonempty.
    Table(Vec<u32>),
    /// `a*n + b`.
    Affine { a: u32, b: u32 },
}

impl GSpec {
    pub fn eval(&self, n: u32) -> u32 {
        match self {
            GSpec::Const(k) => *k,
            GSpec::Table(vs) => {
                let i = (n as usize).min(vs.len() - 1);
                vs[i]
            }
            GSpec::Affine { a, b } => a.saturating_mul(n).saturating_add(*b),
        }
    }

    /// True when the function is constant on all indices `>= from`.
    /// Affine specs with nonzero slope never qualify.
    pub fn constant_from(&self, from: u32) -> bool {
        match self {
            GSpec::Const(_) => true,
            GSpec::Table(vs) => from as usize >= vs.len() - 1,
            GSpec::Affine { .. } => false,
        }
    }

    pub fn parse(text: &str) -> std::result::Result<GSpec, String> {
        let t = text.trim();
        if let Some(rest) = t.strip_prefix("const") {
            let k = rest
                .trim()
                .parse::<u32>()
                .map_err(|_| format!("bad const spec `{t}`"))?;
            return Ok(GSpec::Const(k));
        }
        if let Some(rest) = t.strip_prefix("table") {
            let vs = rest
                .trim()
                .split(',')
                .map(|s| s.trim().parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| format!("bad table spec `{t}`"))?;
            if vs.is_empty() {
                return Err("empty table spec".into());
            }
            return Ok(GSpec::Table(vs));
        }
        if let Some(rest) = t.strip_prefix("affine") {
            let parts: Vec<_> = rest.trim().split_whitespace().collect();
            if parts.len() != 2 {
                return Err(format!("affine spec needs two numbers, got `{t}`"));
            }
            let a = parts[0].parse().map_err(|_| format!("bad affine `{t}`"))?;
            let b = parts[1].parse().map_err(|_| format!("bad affine `{t}`"))?;
            return Ok(GSpec::Affine { a, b });
        }
        Err(format!("unknown growth spec `{t}`"))
    }
}

impl fmt::Display for GSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GSpec::Const(k) => write!(f, "const {k}"),
            GSpec::Table(vs) => {
                write!(f, "table ")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
            GSpec::Affine { a, b } => write!(f, "affine {a} {b}"),
        }
    }
}

/// What an atom unfolds to through the pairing table.
#[derive(Debug, Clone, PartialEq, Eq)]
enum UnfoldEntry {
    Arrow(Antichain, Element),
    /// The preimage exists in the unbounded model but mentions atoms beyond
    /// the materialized window.
    OutOfWindow,
}

/// Shift structure of a materialized infinite model: a family of order
/// automorphisms of the unbounded model, used to certify repeating chains
/// that never revisit the same atom inside a finite window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShiftFamily {
    /// Atoms are integers and `n ↦ n+d` is an automorphism for every `d`.
    IntegerAtoms,
    /// Atoms `a{j}_{n}` shift by level (`n ↦ n+d`) once `n >= tail_from`;
    /// other atoms are fixed points.
    IndexedLevels { tail_from: u32 },
}

#[derive(Debug, Clone)]
pub struct Model {
    name: String,
    atoms: Vec<String>,
    index: HashMap<String, usize>,
    /// Reflexive-transitive closure of the base order, atom id x atom id.
    leq_atoms: Vec<Vec<bool>>,
    fold_table: BTreeMap<(Antichain, String), String>,
    unfold_table: BTreeMap<String, UnfoldEntry>,
    shift: Option<ShiftFamily>,
}

impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms
            && self.leq_atoms == other.leq_atoms
            && self.fold_table == other.fold_table
            && self.unfold_table == other.unfold_table
    }
}
impl Eq for Model {}

/// A builtin base model, with finite windows for the unbounded ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuiltinModel {
    Dinf,
    Park,
    Norm,
    /// Atoms `0..=max`, `n = {k | k < n} ⊸ n`.
    Omega { max: i64 },
    /// Atoms `lo..=hi`, `n = {n+1} ⊸ n`.
    Zed { lo: i64, hi: i64 },
    /// Atoms `*` and `a{j}_{n}` for `n <= levels`;
    /// `a1_n = {} ⊸ … ⊸ {} ⊸ {a1_{n+1}} ⊸ *` with `f(n)` empty heads.
    Hf { f: Vec<u32>, levels: u32 },
}

impl Model {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn shift_family(&self) -> Option<&ShiftFamily> {
        self.shift.as_ref()
    }

    fn atom_id(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| ModelError::UnknownAtom {
            atom: name.to_string(),
            model: self.name.clone(),
        })
    }

    /// Checks that every atom mentioned by the element exists here.
    pub fn check_element(&self, e: &Element) -> Result<()> {
        match e {
            Element::Atom(n) => self.atom_id(n).map(|_| ()),
            Element::Arrow(a, t) => {
                for x in a.iter() {
                    self.check_element(x)?;
                }
                self.check_element(t)
            }
        }
    }

    fn base_leq(&self, x: &str, y: &str) -> Result<bool> {
        Ok(self.leq_atoms[self.atom_id(x)?][self.atom_id(y)?])
    }

    /// Decides the order. Atom-vs-atom is a table lookup; any other shape
    /// unfolds atoms one step, so the arrow depth strictly decreases.
    pub fn leq(&self, x: &Element, y: &Element) -> Result<bool> {
        match (x, y) {
            (Element::Atom(a), Element::Atom(b)) => self.base_leq(a, b),
            _ => {
                let (ax, tx) = self.unfold1(x)?;
                let (ay, ty) = self.unfold1(y)?;
                Ok(self.antichain_leq(&ay, &ax)? && self.leq(&tx, &ty)?)
            }
        }
    }

    /// `a ≤ b` iff every member of `a` is below some member of `b`.
    pub fn antichain_leq(&self, a: &Antichain, b: &Antichain) -> Result<bool> {
        for x in a.iter() {
            let mut dominated = false;
            for y in b.iter() {
                if self.leq(x, y)? {
                    dominated = true;
                    break;
                }
            }
            if !dominated {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Keeps the maximal elements of `s`; the result is an antichain
    /// equivalent to `s` in both directions of the antichain order.
    pub fn normalize_antichain(&self, s: &[Element]) -> Result<Antichain> {
        let mut distinct: Vec<Element> = Vec::new();
        for e in s {
            self.check_element(e)?;
            if !distinct.contains(e) {
                distinct.push(e.clone());
            }
        }
        let mut keep = Vec::new();
        'outer: for (i, e) in distinct.iter().enumerate() {
            for (j, f) in distinct.iter().enumerate() {
                if i != j && self.leq(e, f)? && !self.leq(f, e)? {
                    continue 'outer;
                }
            }
            keep.push(e.clone());
        }
        Ok(Antichain::from_vec_unchecked(keep))
    }

    /// Checks pairwise incomparability.
    pub fn is_antichain(&self, a: &Antichain) -> Result<bool> {
        let es = a.elements();
        for i in 0..es.len() {
            for j in 0..es.len() {
                if i != j && self.leq(&es[i], &es[j])? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// The canonical pairing: an atom when the table names this pair, a
    /// structural arrow node otherwise.
    pub fn fold(&self, a: &Antichain, tail: &Element) -> Element {
        if let Element::Atom(t) = tail {
            if let Some(img) = self.fold_table.get(&(a.clone(), t.clone())) {
                return Element::Atom(img.clone());
            }
        }
        Element::Arrow(a.clone(), Box::new(tail.clone()))
    }

    /// One unfolding step; total on canonical elements up to the window.
    pub fn unfold1(&self, e: &Element) -> Result<(Antichain, Element)> {
        match e {
            Element::Arrow(a, t) => Ok((a.clone(), (**t).clone())),
            Element::Atom(n) => {
                self.atom_id(n)?;
                match self.unfold_table.get(n) {
                    Some(UnfoldEntry::Arrow(a, t)) => Ok((a.clone(), t.clone())),
                    Some(UnfoldEntry::OutOfWindow) | None => {
                        Err(ModelError::WindowExceeded(n.clone()))
                    }
                }
            }
        }
    }

    /// Unfolds `k` arrows: `e = a_1 ⊸ … ⊸ a_k ⊸ tail`.
    pub fn unfold(&self, e: &Element, k: usize) -> Result<(Vec<Antichain>, Element)> {
        let mut heads = Vec::with_capacity(k);
        let mut cur = e.clone();
        for _ in 0..k {
            let (a, t) = self.unfold1(&cur)?;
            heads.push(a);
            cur = t;
        }
        Ok((heads, cur))
    }

    /// Rebuilds a canonical element after arbitrary construction: normalizes
    /// every antichain and folds through the table bottom-up.
    pub fn canonicalize_element(&self, e: &Element) -> Result<Element> {
        match e {
            Element::Atom(n) => {
                self.atom_id(n)?;
                Ok(e.clone())
            }
            Element::Arrow(a, t) => {
                let members = a
                    .iter()
                    .map(|m| self.canonicalize_element(m))
                    .collect::<Result<Vec<_>>>()?;
                let head = self.normalize_antichain(&members)?;
                let tail = self.canonicalize_element(t)?;
                Ok(self.fold(&head, &tail))
            }
        }
    }

    /// All canonical elements of arrow-nesting `<= depth` whose antichains
    /// have `<= width` members drawn from the previous level.
    pub fn enumerate_elements(&self, depth: usize, width: usize, cap: usize) -> Result<Vec<Element>> {
        let mut level: Vec<Element> = self.atoms.iter().map(|n| Element::Atom(n.clone())).collect();
        level.sort();
        for _ in 0..depth {
            let chains = self.antichains_over(&level, width)?;
            let mut next: BTreeSet<Element> = level.iter().cloned().collect();
            for a in &chains {
                for t in &level {
                    next.insert(self.fold(a, t));
                    if next.len() > cap {
                        return Err(ModelError::ResourceLimit(cap));
                    }
                }
            }
            level = next.into_iter().collect();
        }
        Ok(level)
    }

    /// All antichains with at most `width` members from `pool`.
    pub fn antichains_over(&self, pool: &[Element], width: usize) -> Result<Vec<Antichain>> {
        let mut out: BTreeSet<Antichain> = BTreeSet::new();
        out.insert(Antichain::empty());
        let mut frontier: Vec<Vec<Element>> = vec![Vec::new()];
        for _ in 0..width {
            let mut grown = Vec::new();
            for partial in &frontier {
                for e in pool {
                    if partial.last().map_or(false, |last| e <= last) {
                        continue;
                    }
                    let mut ok = true;
                    for m in partial {
                        if self.leq(m, e)? || self.leq(e, m)? {
                            ok = false;
                            break;
                        }
                    }
                    if ok {
                        let mut v = partial.clone();
                        v.push(e.clone());
                        out.insert(Antichain::from_vec_unchecked(v.clone()));
                        grown.push(v);
                    }
                }
            }
            frontier = grown;
        }
        Ok(out.into_iter().collect())
    }

    /// The delta by which `y` is a shifted copy of `x` under the model's
    /// automorphism family, if any. `Some(0)` means syntactic equality.
    pub fn shift_delta(&self, x: &Element, y: &Element) -> Option<i64> {
        let family = self.shift.as_ref()?;
        let mut delta: Option<i64> = None;
        if collect_shift(family, x, y, &mut delta) {
            delta.or(Some(0))
        } else {
            None
        }
    }

    /// Applies the shift automorphism, when defined inside the window.
    pub fn shift_element(&self, e: &Element, d: i64) -> Option<Element> {
        let family = self.shift.as_ref()?;
        let shifted = apply_shift(family, e, d)?;
        self.check_element(&shifted).ok()?;
        Some(shifted)
    }

    fn validate(&self) -> Result<()> {
        // order: antisymmetry of the closure
        for i in 0..self.atoms.len() {
            for j in 0..self.atoms.len() {
                if i != j && self.leq_atoms[i][j] && self.leq_atoms[j][i] {
                    return Err(ModelError::OrderCycle(
                        self.atoms[i].clone(),
                        self.atoms[j].clone(),
                    ));
                }
            }
        }
        // pairing: every atom has exactly one preimage
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        for img in self.fold_table.values() {
            *seen.entry(img).or_default() += 1;
        }
        for (img, count) in &seen {
            if *count > 1 {
                return Err(ModelError::NotInjective(img.to_string()));
            }
        }
        for atom in &self.atoms {
            if !self.unfold_table.contains_key(atom) {
                return Err(ModelError::NotSurjective(atom.clone()));
            }
        }
        // heads must be antichains
        for (a, _t) in self.fold_table.keys() {
            if !self.is_antichain(a)? {
                return Err(ModelError::HeadNotAntichain(a.to_string()));
            }
        }
        // the table must be an order iso onto the atoms, where evaluable
        let entries: Vec<(&Antichain, &str, &str)> = self
            .fold_table
            .iter()
            .map(|((a, t), img)| (a, t.as_str(), img.as_str()))
            .collect();
        for (a1, t1, e1) in &entries {
            for (a2, t2, e2) in &entries {
                let dom = self.antichain_leq(a2, a1)?
                    && self.base_leq(t1, t2)?;
                if dom != self.base_leq(e1, e2)? {
                    return Err(ModelError::NotOrderIso(e1.to_string(), e2.to_string()));
                }
            }
        }
        Ok(())
    }

    fn from_parts(
        name: String,
        atoms: Vec<String>,
        strict_pairs: &[(String, String)],
        entries: Vec<(Antichain, String, String)>,
        window_blocked: Vec<String>,
        shift: Option<ShiftFamily>,
        close_order_under_table: bool,
    ) -> Result<Model> {
        let mut atoms = atoms;
        atoms.sort();
        atoms.dedup();
        let index: HashMap<String, usize> =
            atoms.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let n = atoms.len();
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        let lookup = |name: &str| -> Result<usize> {
            index.get(name).copied().ok_or_else(|| ModelError::UnknownAtom {
                atom: name.to_string(),
                model: "model under construction".into(),
            })
        };
        for (x, y) in strict_pairs {
            leq[lookup(x)?][lookup(y)?] = true;
        }
        let closure = |leq: &mut Vec<Vec<bool>>| {
            for k in 0..n {
                for i in 0..n {
                    if leq[i][k] {
                        for j in 0..n {
                            if leq[k][j] {
                                leq[i][j] = true;
                            }
                        }
                    }
                }
            }
        };
        closure(&mut leq);

        let mut model = Model {
            name,
            atoms,
            index,
            leq_atoms: leq,
            fold_table: BTreeMap::new(),
            unfold_table: BTreeMap::new(),
            shift,
        };
        for (a, t, img) in entries {
            model.check_element(&Element::Atom(t.clone()))?;
            model.check_element(&Element::Atom(img.clone()))?;
            for m in a.iter() {
                model.check_element(m)?;
            }
            if model.fold_table.insert((a.clone(), t.clone()), img.clone()).is_some() {
                return Err(ModelError::Parse {
                    line: 0,
                    msg: format!("duplicate arrow entry for ({a}, {t})"),
                });
            }
            model
                .unfold_table
                .insert(img, UnfoldEntry::Arrow(a, Element::Atom(t)));
        }
        for img in window_blocked {
            model.unfold_table.insert(img, UnfoldEntry::OutOfWindow);
        }

        if close_order_under_table {
            // Alternate closing the order under the table's iso requirement
            // until a fixpoint: the printed base order of some windows is
            // coarser than the one their completion induces.
            loop {
                let mut changed = false;
                let entries: Vec<(Antichain, String, String)> = model
                    .fold_table
                    .iter()
                    .map(|((a, t), img)| (a.clone(), t.clone(), img.clone()))
                    .collect();
                for (a1, t1, e1) in &entries {
                    for (a2, t2, e2) in &entries {
                        if model.antichain_leq(a2, a1)? && model.base_leq(t1, t2)? {
                            let i = model.atom_id(e1)?;
                            let j = model.atom_id(e2)?;
                            if !model.leq_atoms[i][j] {
                                model.leq_atoms[i][j] = true;
                                changed = true;
                            }
                        }
                    }
                }
                if changed {
                    closure(&mut model.leq_atoms);
                } else {
                    break;
                }
            }
        }

        model.validate_windowed()?;
        Ok(model)
    }

    /// Validation that tolerates window-blocked unfold entries.
    fn validate_windowed(&self) -> Result<()> {
        self.validate()
    }

    pub fn builtin(which: &BuiltinModel) -> Result<Model> {
        match which {
            BuiltinModel::Dinf => Model::from_parts(
                "dinf".into(),
                vec!["*".into()],
                &[],
                vec![(Antichain::empty(), "*".into(), "*".into())],
                vec![],
                None,
                false,
            ),
            BuiltinModel::Park => Model::from_parts(
                "park".into(),
                vec!["*".into()],
                &[],
                vec![(
                    Antichain::singleton(Element::atom("*")),
                    "*".into(),
                    "*".into(),
                )],
                vec![],
                None,
                false,
            ),
            BuiltinModel::Norm => Model::from_parts(
                "norm".into(),
                vec!["p".into(), "q".into()],
                &[("p".into(), "q".into())],
                vec![
                    (
                        Antichain::singleton(Element::atom("p")),
                        "q".into(),
                        "q".into(),
                    ),
                    (
                        Antichain::singleton(Element::atom("q")),
                        "p".into(),
                        "p".into(),
                    ),
                ],
                vec![],
                None,
                false,
            ),
            BuiltinModel::Omega { max } => {
                if *max < 0 {
                    return Err(ModelError::Builtin("omega window must be >= 0".into()));
                }
                let atoms: Vec<String> = (0..=*max).map(|n| n.to_string()).collect();
                let entries = (0..=*max)
                    .map(|n| {
                        let head = Antichain::from_vec_unchecked(
                            (0..n).map(|k| Element::atom(k.to_string())).collect(),
                        );
                        (head, n.to_string(), n.to_string())
                    })
                    .collect();
                Model::from_parts("omega".into(), atoms, &[], entries, vec![], None, false)
            }
            BuiltinModel::Zed { lo, hi } => {
                if lo > hi {
                    return Err(ModelError::Builtin("empty window".into()));
                }
                let atoms: Vec<String> = (*lo..=*hi).map(|n| n.to_string()).collect();
                let mut entries = Vec::new();
                let mut blocked = Vec::new();
                for n in *lo..=*hi {
                    if n + 1 <= *hi {
                        entries.push((
                            Antichain::singleton(Element::atom((n + 1).to_string())),
                            n.to_string(),
                            n.to_string(),
                        ));
                    } else {
                        blocked.push(n.to_string());
                    }
                }
                Model::from_parts(
                    "zed".into(),
                    atoms,
                    &[],
                    entries,
                    blocked,
                    Some(ShiftFamily::IntegerAtoms),
                    false,
                )
            }
            BuiltinModel::Hf { f, levels } => {
                if f.is_empty() {
                    return Err(ModelError::Builtin("hf needs a nonempty table".into()));
                }
                let g = GSpec::Table(f.clone());
                let mut atoms = vec!["*".to_string()];
                let mut entries = vec![(Antichain::empty(), "*".into(), "*".to_string())];
                let mut blocked = Vec::new();
                let atom = |j: u32, n: u32| format!("a{j}_{n}");
                for n in 0..=*levels {
                    let fn_ = g.eval(n);
                    for j in 1..=fn_ + 1 {
                        atoms.push(atom(j, n));
                    }
                    for j in 1..=fn_ {
                        entries.push((Antichain::empty(), atom(j + 1, n), atom(j, n)));
                    }
                    if n < *levels {
                        entries.push((
                            Antichain::singleton(Element::atom(atom(1, n + 1))),
                            "*".into(),
                            atom(fn_ + 1, n),
                        ));
                    } else {
                        blocked.push(atom(fn_ + 1, n));
                    }
                }
                let tail_from = (f.len().saturating_sub(1)) as u32;
                Model::from_parts(
                    "hf".into(),
                    atoms,
                    &[],
                    entries,
                    blocked,
                    Some(ShiftFamily::IndexedLevels { tail_from }),
                    true,
                )
            }
        }
    }

    /// Parses the line-oriented model-spec format:
    ///
    /// ```text
    /// # comment
    /// atoms: p q
    /// order: p < q
    /// arrow: {q} p = p
    /// ```
    pub fn parse_spec(name: &str, text: &str) -> Result<Model> {
        let mut atoms: Vec<String> = Vec::new();
        let mut pairs: Vec<(String, String)> = Vec::new();
        let mut entries: Vec<(Antichain, String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ModelError::Parse { line: lineno + 1, msg };
            if let Some(rest) = line.strip_prefix("atoms:") {
                atoms.extend(rest.split_whitespace().map(str::to_string));
            } else if let Some(rest) = line.strip_prefix("order:") {
                let parts: Vec<&str> = rest.split('<').map(str::trim).collect();
                if parts.len() != 2 || parts.iter().any(|p| p.is_empty()) {
                    return Err(err(format!("expected `a < b`, got `{rest}`")));
                }
                pairs.push((parts[0].to_string(), parts[1].to_string()));
            } else if let Some(rest) = line.strip_prefix("arrow:") {
                let (lhs, img) = rest
                    .split_once('=')
                    .ok_or_else(|| err(format!("expected `{{...}} t = img`, got `{rest}`")))?;
                let lhs = lhs.trim();
                let close = lhs
                    .find('}')
                    .ok_or_else(|| err(format!("missing antichain braces in `{rest}`")))?;
                if !lhs.starts_with('{') {
                    return Err(err(format!("missing antichain braces in `{rest}`")));
                }
                let head: Vec<String> = lhs[1..close]
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .collect();
                let tail = lhs[close + 1..].trim();
                if tail.is_empty() {
                    return Err(err(format!("missing tail atom in `{rest}`")));
                }
                entries.push((
                    Antichain::from_vec_unchecked(head.into_iter().map(Element::Atom).collect()),
                    tail.to_string(),
                    img.trim().to_string(),
                ));
            } else {
                return Err(err(format!("unrecognized directive `{line}`")));
            }
        }
        Model::from_parts(name.to_string(), atoms, &pairs, entries, vec![], None, false)
    }
}

fn parse_int_atom(s: &str) -> Option<i64> {
    s.parse::<i64>().ok()
}

fn parse_level_atom(s: &str) -> Option<(u32, u32)> {
    let rest = s.strip_prefix('a')?;
    let (j, n) = rest.split_once('_')?;
    Some((j.parse().ok()?, n.parse().ok()?))
}

fn collect_shift(family: &ShiftFamily, x: &Element, y: &Element, delta: &mut Option<i64>) -> bool {
    match (x, y) {
        (Element::Atom(a), Element::Atom(b)) => match family {
            ShiftFamily::IntegerAtoms => {
                let (ia, ib) = match (parse_int_atom(a), parse_int_atom(b)) {
                    (Some(ia), Some(ib)) => (ia, ib),
                    _ => return a == b,
                };
                let d = ib - ia;
                match delta {
                    Some(e) => *e == d,
                    None => {
                        *delta = Some(d);
                        true
                    }
                }
            }
            ShiftFamily::IndexedLevels { tail_from } => {
                if a == "*" || b == "*" {
                    return a == b;
                }
                let (pa, pb) = match (parse_level_atom(a), parse_level_atom(b)) {
                    (Some(pa), Some(pb)) => (pa, pb),
                    _ => return a == b,
                };
                if pa.0 != pb.0 || pa.1 < *tail_from || pb.1 < *tail_from {
                    return a == b && pa == pb;
                }
                let d = pb.1 as i64 - pa.1 as i64;
                match delta {
                    Some(e) => *e == d,
                    None => {
                        *delta = Some(d);
                        true
                    }
                }
            }
        },
        (Element::Arrow(ax, tx), Element::Arrow(ay, ty)) => {
            if ax.len() != ay.len() {
                return false;
            }
            for (mx, my) in ax.iter().zip(ay.iter()) {
                if !collect_shift(family, mx, my, delta) {
                    return false;
                }
            }
            collect_shift(family, tx, ty, delta)
        }
        _ => false,
    }
}

fn apply_shift(family: &ShiftFamily, e: &Element, d: i64) -> Option<Element> {
    match e {
        Element::Atom(a) => match family {
            ShiftFamily::IntegerAtoms => {
                let i = parse_int_atom(a)?;
                Some(Element::atom((i + d).to_string()))
            }
            ShiftFamily::IndexedLevels { tail_from } => {
                if a == "*" {
                    return Some(e.clone());
                }
                let (j, n) = parse_level_atom(a)?;
                if n < *tail_from {
                    return None;
                }
                let n2 = n as i64 + d;
                if n2 < *tail_from as i64 {
                    return None;
                }
                Some(Element::atom(format!("a{j}_{n2}")))
            }
        },
        Element::Arrow(a, t) => {
            let members = a
                .iter()
                .map(|m| apply_shift(family, m, d))
                .collect::<Option<Vec<_>>>()?;
            Some(Element::Arrow(
                Antichain::from_vec_unchecked(members),
                Box::new(apply_shift(family, t, d)?),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm() -> Model {
        Model::builtin(&BuiltinModel::Norm).unwrap()
    }
    fn dinf() -> Model {
        Model::builtin(&BuiltinModel::Dinf).unwrap()
    }
    fn park() -> Model {
        Model::builtin(&BuiltinModel::Park).unwrap()
    }

    fn arrow(m: &Model, head: &[Element], tail: Element) -> Element {
        let a = m.normalize_antichain(head).unwrap();
        m.fold(&a, &tail)
    }

    #[test]
    fn norm_base_order() {
        let m = norm();
        let p = Element::atom("p");
        let q = Element::atom("q");
        assert!(m.leq(&p, &q).unwrap());
        assert!(!m.leq(&q, &p).unwrap());
        assert!(m.leq(&p, &p).unwrap());
    }

    #[test]
    fn antichain_order_examples() {
        let m = norm();
        let p = Element::atom("p");
        let q = Element::atom("q");
        let empty = Antichain::empty();
        let ap = Antichain::singleton(p);
        let aq = Antichain::singleton(q.clone());
        assert!(m.antichain_leq(&empty, &aq).unwrap());
        assert!(m.antichain_leq(&ap, &aq).unwrap());
        let d = dinf();
        let star = Antichain::singleton(Element::atom("*"));
        assert!(!d.antichain_leq(&star, &Antichain::empty()).unwrap());
    }

    #[test]
    fn dinf_arrow_below_atom() {
        // {*} ⊸ * unfolds against * = {} ⊸ *: contravariant heads, equal tails.
        let m = dinf();
        let star = Element::atom("*");
        let e = arrow(&m, &[star.clone()], star.clone());
        assert_eq!(e, Element::Arrow(Antichain::singleton(star.clone()), Box::new(star.clone())));
        assert!(m.leq(&e, &star).unwrap());
        assert!(!m.leq(&star, &e).unwrap());
    }

    #[test]
    fn fold_examples() {
        let d = dinf();
        let star = Element::atom("*");
        assert_eq!(d.fold(&Antichain::empty(), &star), star);
        let p = park();
        assert_eq!(p.fold(&Antichain::singleton(star.clone()), &star), star);
        // not in the table: structural node
        assert!(matches!(
            d.fold(&Antichain::singleton(star.clone()), &star),
            Element::Arrow(_, _)
        ));
    }

    #[test]
    fn unfold_examples() {
        let m = norm();
        let p = Element::atom("p");
        let (heads, tail) = m.unfold(&p, 0).unwrap();
        assert!(heads.is_empty());
        assert_eq!(tail, p);
        let (heads, tail) = m.unfold(&p, 1).unwrap();
        assert_eq!(heads, vec![Antichain::singleton(Element::atom("q"))]);
        assert_eq!(tail, p);

        // fold/unfold round trip at length 1
        let d = dinf();
        let star = Element::atom("*");
        let a = Antichain::singleton(star.clone());
        let e = d.fold(&a, &star);
        assert_eq!(d.unfold(&e, 1).unwrap(), (vec![a], star));
    }

    #[test]
    fn park_nonwellfounded_unfolding() {
        let m = park();
        let star = Element::atom("*");
        for k in 0..5 {
            let (heads, tail) = m.unfold(&star, k).unwrap();
            assert_eq!(heads, vec![Antichain::singleton(star.clone()); k]);
            assert_eq!(tail, star);
        }
        assert!(m.leq(&star, &star).unwrap());
    }

    #[test]
    fn hf_unfolding_follows_the_level_schedule() {
        // with f(n) = 2 the level element unfolds as {} ⊸ {} ⊸ {a1_{n+1}} ⊸ *
        let m = Model::builtin(&BuiltinModel::Hf { f: vec![2], levels: 3 }).unwrap();
        let a10 = Element::atom("a1_0");
        let (heads, tail) = m.unfold(&a10, 3).unwrap();
        assert_eq!(
            heads,
            vec![
                Antichain::empty(),
                Antichain::empty(),
                Antichain::singleton(Element::atom("a1_1")),
            ]
        );
        assert_eq!(tail, Element::atom("*"));
    }

    #[test]
    fn normalize_drops_dominated() {
        let m = norm();
        let p = Element::atom("p");
        let q = Element::atom("q");
        assert_eq!(
            m.normalize_antichain(&[p.clone(), q.clone()]).unwrap(),
            Antichain::singleton(q.clone())
        );
        assert_eq!(m.normalize_antichain(&[p.clone()]).unwrap(), Antichain::singleton(p));
        assert_eq!(m.normalize_antichain(&[]).unwrap(), Antichain::empty());
    }

    #[test]
    fn builtin_omega_window() {
        let m = Model::builtin(&BuiltinModel::Omega { max: 5 }).unwrap();
        assert_eq!(m.atoms().len(), 6);
        let three = Element::atom("3");
        let (heads, tail) = m.unfold(&three, 1).unwrap();
        assert_eq!(tail, three);
        assert_eq!(heads[0].len(), 3);
    }

    #[test]
    fn zed_window_blocks_at_the_boundary() {
        let m = Model::builtin(&BuiltinModel::Zed { lo: -2, hi: 2 }).unwrap();
        let zero = Element::atom("0");
        let (heads, tail) = m.unfold(&zero, 1).unwrap();
        assert_eq!(heads[0], Antichain::singleton(Element::atom("1")));
        assert_eq!(tail, zero);
        let hi = Element::atom("2");
        assert_eq!(m.unfold(&hi, 1), Err(ModelError::WindowExceeded("2".into())));
    }

    #[test]
    fn spec_text_matches_builtin_norm() {
        let text = "
            # the two-atom base with p < q
            atoms: p q
            order: p < q
            arrow: {p} q = q
            arrow: {q} p = p
        ";
        let m = Model::parse_spec("custom", text).unwrap();
        assert_eq!(m, norm());
    }

    #[test]
    fn spec_text_validation_failures() {
        let missing = "
            atoms: p q
            arrow: {q} p = p
        ";
        assert_eq!(
            Model::parse_spec("m", missing).unwrap_err(),
            ModelError::NotSurjective("q".into())
        );
        let cycle = "
            atoms: p q
            order: p < q
            order: q < p
            arrow: {p} q = q
            arrow: {q} p = p
        ";
        assert!(matches!(
            Model::parse_spec("m", cycle).unwrap_err(),
            ModelError::OrderCycle(_, _)
        ));
    }

    #[test]
    fn enumerate_small_windows() {
        let m = norm();
        let level0 = m.enumerate_elements(0, 2, 10_000).unwrap();
        assert_eq!(level0, vec![Element::atom("p"), Element::atom("q")]);

        let d = dinf();
        let level1 = d.enumerate_elements(1, 1, 10_000).unwrap();
        let star = Element::atom("*");
        let arrow_star = Element::Arrow(Antichain::singleton(star.clone()), Box::new(star.clone()));
        assert_eq!(level1, vec![star, arrow_star]);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let m = norm();
        assert!(matches!(
            m.enumerate_elements(3, 3, 10),
            Err(ModelError::ResourceLimit(10))
        ));
    }

    #[test]
    fn order_laws_on_small_windows() {
        for m in [norm(), dinf(), park()] {
            let es = m.enumerate_elements(2, 2, 50_000).unwrap();
            for x in &es {
                assert!(m.leq(x, x).unwrap(), "reflexivity in {}", m.name());
            }
            for x in &es {
                for y in &es {
                    if m.leq(x, y).unwrap() && m.leq(y, x).unwrap() {
                        assert_eq!(x, y, "antisymmetry on canonical forms in {}", m.name());
                    }
                    for z in &es {
                        if m.leq(x, y).unwrap() && m.leq(y, z).unwrap() {
                            assert!(m.leq(x, z).unwrap(), "transitivity in {}", m.name());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn contravariance_of_fold() {
        let m = norm();
        let es = m.enumerate_elements(1, 2, 50_000).unwrap();
        let chains = m.antichains_over(&es, 2).unwrap();
        for a in &chains {
            for b in &chains {
                for ta in &es {
                    for tb in &es {
                        let fa = m.fold(a, ta);
                        let fb = m.fold(b, tb);
                        let lhs = m.leq(&fa, &fb).unwrap();
                        let rhs = m.antichain_leq(b, a).unwrap() && m.leq(ta, tb).unwrap();
                        assert_eq!(lhs, rhs, "fold({a},{ta}) vs fold({b},{tb})");
                    }
                }
            }
        }
    }

    #[test]
    fn normalize_is_equivalent_in_both_directions() {
        let m = norm();
        let es = m.enumerate_elements(1, 2, 50_000).unwrap();
        // a few arbitrary subsets
        for i in 0..es.len() {
            for j in i..es.len() {
                let s = vec![es[i].clone(), es[j].clone()];
                let n = m.normalize_antichain(&s).unwrap();
                let raw = Antichain::from_vec_unchecked(s);
                assert!(m.antichain_leq(&n, &raw).unwrap());
                assert!(m.antichain_leq(&raw, &n).unwrap());
            }
        }
    }

    #[test]
    fn gspec_eval_and_parse() {
        assert_eq!(GSpec::parse("const 1").unwrap().eval(7), 1);
        let t = GSpec::parse("table 2,3").unwrap();
        assert_eq!((t.eval(0), t.eval(1), t.eval(9)), (2, 3, 3));
        let a = GSpec::parse("affine 2 1").unwrap();
        assert_eq!(a.eval(3), 7);
        assert!(GSpec::parse("bogus").is_err());
        assert_eq!(GSpec::parse("const 1").unwrap().to_string(), "const 1");
    }

    #[test]
    fn shift_detection_on_zed() {
        let m = Model::builtin(&BuiltinModel::Zed { lo: -2, hi: 4 }).unwrap();
        let d = m
            .shift_delta(&Element::atom("0"), &Element::atom("1"))
            .unwrap();
        assert_eq!(d, 1);
        assert_eq!(m.shift_element(&Element::atom("1"), 2), Some(Element::atom("3")));
        assert_eq!(m.shift_element(&Element::atom("4"), 1), None);
    }
}
