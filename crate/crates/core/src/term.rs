//! First-order terms with cached structural metadata.
//!
//! A [`Term`] is an immutable, reference-counted node. Every node caches its
//! structural hash, its tree size and two occurrence bits (does a
//! metavariable occur beneath it, does a normalization parameter occur
//! beneath it). All of them are computed once at construction so that
//! hashing, size checks and the ground short-circuit are constant time.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHasher};

use crate::unify::Env;

/// An interned-ish functor name. Cloning is a refcount bump.
#[derive(Clone)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl PartialEq for Symbol {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl Eq for Symbol {}

impl Hash for Symbol {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.cmp(&other.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetaKind {
    /// Stands for an unknown type argument of a goal.
    TypeGoal,
    /// Stands for a not-yet-synthesized proof.
    ProofHole,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MetaId {
    pub id: u32,
    pub kind: MetaKind,
}

impl MetaId {
    pub fn goal(id: u32) -> Self {
        MetaId { id, kind: MetaKind::TypeGoal }
    }
}

/// Hands out metavariable ids for one query run. Ids only ever increase.
#[derive(Debug, Default, Clone)]
pub struct MetaAllocator {
    next: u32,
}

impl MetaAllocator {
    pub fn new() -> Self {
        MetaAllocator { next: 0 }
    }

    pub fn starting_at(next: u32) -> Self {
        MetaAllocator { next }
    }

    pub fn fresh(&mut self, kind: MetaKind) -> MetaId {
        let id = self.next;
        self.next = self.next.checked_add(1).expect("metavariable ids exhausted");
        MetaId { id, kind }
    }

    pub fn next_id(&self) -> u32 {
        self.next
    }
}

#[derive(Debug)]
pub enum TermKind {
    App(Symbol, Box<[Term]>),
    Meta(MetaId),
    /// Reserved constant `θᵢ` produced by α-normalization. User syntax can
    /// never produce one.
    Param(u32),
}

struct Node {
    kind: TermKind,
    hash: u64,
    size: u64,
    ground: bool,
    has_params: bool,
}

#[derive(Clone)]
pub struct Term(Arc<Node>);

const TAG_APP: u8 = 0;
const TAG_META: u8 = 1;
const TAG_PARAM: u8 = 2;

impl Term {
    pub fn app(functor: impl Into<Symbol>, args: Vec<Term>) -> Term {
        let functor = functor.into();
        let mut hasher = FxHasher::default();
        TAG_APP.hash(&mut hasher);
        functor.hash(&mut hasher);
        args.len().hash(&mut hasher);
        let mut size: u64 = 1;
        let mut ground = true;
        let mut has_params = false;
        for a in &args {
            hasher.write_u64(a.0.hash);
            size = size.saturating_add(a.0.size);
            ground &= a.0.ground;
            has_params |= a.0.has_params;
        }
        Term(Arc::new(Node {
            kind: TermKind::App(functor, args.into_boxed_slice()),
            hash: hasher.finish(),
            size,
            ground,
            has_params,
        }))
    }

    pub fn constant(name: impl Into<Symbol>) -> Term {
        Term::app(name, Vec::new())
    }

    pub fn meta(m: MetaId) -> Term {
        let mut hasher = FxHasher::default();
        TAG_META.hash(&mut hasher);
        m.hash(&mut hasher);
        Term(Arc::new(Node {
            kind: TermKind::Meta(m),
            hash: hasher.finish(),
            size: 1,
            ground: false,
            has_params: false,
        }))
    }

    pub fn param(index: u32) -> Term {
        let mut hasher = FxHasher::default();
        TAG_PARAM.hash(&mut hasher);
        index.hash(&mut hasher);
        Term(Arc::new(Node {
            kind: TermKind::Param(index),
            hash: hasher.finish(),
            size: 1,
            ground: true,
            has_params: true,
        }))
    }

    /// Unary numeral `s(...s(z)...)`.
    pub fn nat(n: u64) -> Term {
        let s = Symbol::new("s");
        let mut t = Term::constant("z");
        for _ in 0..n {
            t = Term::app(s.clone(), vec![t]);
        }
        t
    }

    pub fn kind(&self) -> &TermKind {
        &self.0.kind
    }

    /// True iff no metavariable occurs anywhere in the term.
    pub fn is_ground(&self) -> bool {
        self.0.ground
    }

    pub fn has_params(&self) -> bool {
        self.0.has_params
    }

    /// Number of nodes in the term, viewed as a tree (saturating).
    pub fn size(&self) -> u64 {
        self.0.size
    }

    pub fn structural_hash(&self) -> u64 {
        self.0.hash
    }

    pub fn ptr_eq(&self, other: &Term) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn functor(&self) -> Option<&Symbol> {
        match &self.0.kind {
            TermKind::App(f, _) => Some(f),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match &self.0.kind {
            TermKind::App(_, args) => args,
            _ => &[],
        }
    }

    pub fn as_meta(&self) -> Option<MetaId> {
        match self.0.kind {
            TermKind::Meta(m) => Some(m),
            _ => None,
        }
    }

    /// Value of a unary numeral, if this term is one.
    pub fn as_nat(&self) -> Option<u64> {
        let mut n = 0u64;
        let mut t = self;
        loop {
            match t.kind() {
                TermKind::App(f, args) if args.is_empty() && f.as_str() == "z" => return Some(n),
                TermKind::App(f, args) if args.len() == 1 && f.as_str() == "s" => {
                    n += 1;
                    t = &args[0];
                }
                _ => return None,
            }
        }
    }

    /// Collect the distinct metavariables of the term in first-occurrence
    /// order.
    pub fn metas(&self) -> Vec<MetaId> {
        let mut out = Vec::new();
        collect_metas(self, &mut out);
        out
    }

    /// Display with a custom namer for metavariables.
    pub fn display_with<'a, F>(&'a self, namer: F) -> impl fmt::Display + 'a
    where
        F: Fn(MetaId) -> Option<String> + 'a,
    {
        NamedDisplay { term: self, namer }
    }
}

fn collect_metas(t: &Term, out: &mut Vec<MetaId>) {
    if t.is_ground() {
        return;
    }
    match t.kind() {
        TermKind::Meta(m) => {
            if !out.contains(m) {
                out.push(*m);
            }
        }
        TermKind::App(_, args) => args.iter().for_each(|a| collect_metas(a, out)),
        TermKind::Param(_) => {}
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        if self.ptr_eq(other) {
            return true;
        }
        if self.0.hash != other.0.hash || self.0.size != other.0.size {
            return false;
        }
        match (self.kind(), other.kind()) {
            (TermKind::App(f, xs), TermKind::App(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| x == y)
            }
            (TermKind::Meta(a), TermKind::Meta(b)) => a == b,
            (TermKind::Param(i), TermKind::Param(j)) => i == j,
            _ => false,
        }
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash)
    }
}

const SUBSCRIPTS: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];

pub fn param_name(index: u32) -> String {
    let mut s = String::from("θ");
    for c in index.to_string().chars() {
        s.push(SUBSCRIPTS[c.to_digit(10).unwrap() as usize]);
    }
    s
}

fn write_term(
    f: &mut fmt::Formatter<'_>,
    t: &Term,
    namer: &dyn Fn(MetaId) -> Option<String>,
) -> fmt::Result {
    match t.kind() {
        TermKind::Meta(m) => match namer(*m) {
            Some(name) => f.write_str(&name),
            None => match m.kind {
                MetaKind::TypeGoal => write!(f, "?{}", m.id),
                MetaKind::ProofHole => write!(f, "?p{}", m.id),
            },
        },
        TermKind::Param(i) => f.write_str(&param_name(*i)),
        TermKind::App(sym, args) => {
            if let Some(n) = t.as_nat() {
                return write!(f, "{n}");
            }
            f.write_str(sym.as_str())?;
            if !args.is_empty() {
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write_term(f, a, namer)?;
                }
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

struct NamedDisplay<'a, F> {
    term: &'a Term,
    namer: F,
}

impl<F: Fn(MetaId) -> Option<String>> fmt::Display for NamedDisplay<'_, F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self.term, &self.namer)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, &|_| None)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A term in which every unbound metavariable has been replaced by a `θᵢ`
/// parameter, numbered by first occurrence in a left-to-right traversal.
/// Used as the table key; structural equality is α-equivalence.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct NormalizedTerm(Term);

impl NormalizedTerm {
    pub fn term(&self) -> &Term {
        &self.0
    }

    pub fn into_term(self) -> Term {
        self.0
    }
}

impl fmt::Display for NormalizedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// α-normalizer. One instance numbers parameters jointly across every term
/// it is fed, so a goal and its proof can share parameters.
///
/// The input must not already contain parameters mixed with unbound
/// metavariables; terms without metavariables pass through untouched.
pub struct Normalizer<'e> {
    env: &'e Env,
    assigned: FxHashMap<MetaId, u32>,
    visits: u64,
}

impl<'e> Normalizer<'e> {
    pub fn new(env: &'e Env) -> Self {
        Normalizer { env, assigned: FxHashMap::default(), visits: 0 }
    }

    /// Nodes entered so far. Children of a ground node are never entered.
    pub fn visits(&self) -> u64 {
        self.visits
    }

    pub fn normalize(&mut self, t: &Term) -> Term {
        self.visits += 1;
        if t.is_ground() {
            return t.clone();
        }
        match t.kind() {
            TermKind::Meta(m) => match self.env.lookup(*m) {
                Some(bound) => self.normalize(&bound),
                None => {
                    let next = self.assigned.len() as u32;
                    let idx = *self.assigned.entry(*m).or_insert(next);
                    Term::param(idx)
                }
            },
            TermKind::App(f, args) => {
                let new_args: Vec<Term> = args.iter().map(|a| self.normalize(a)).collect();
                Term::app(f.clone(), new_args)
            }
            TermKind::Param(_) => unreachable!("parameters are ground"),
        }
    }

    pub fn finish(self, t: Term) -> NormalizedTerm {
        NormalizedTerm(t)
    }
}

pub fn alpha_normalize(t: &Term, env: &Env) -> NormalizedTerm {
    let mut n = Normalizer::new(env);
    let out = n.normalize(t);
    NormalizedTerm(out)
}

/// Normalize several terms with one shared parameter numbering. Returns the
/// normalized terms and the number of nodes visited.
pub fn alpha_normalize_all(ts: &[Term], env: &Env) -> (Vec<NormalizedTerm>, u64) {
    let mut n = Normalizer::new(env);
    let out = ts.iter().map(|t| NormalizedTerm(n.normalize(t))).collect();
    (out, n.visits())
}

impl NormalizedTerm {
    /// Wrap a term that is already known to be free of metavariables.
    pub fn from_ground(t: Term) -> Option<Self> {
        t.is_ground().then_some(NormalizedTerm(t))
    }
}

/// Consistently replaces every metavariable across `ts` with a fresh one of
/// the same kind.
pub fn rename_fresh(ts: &[Term], alloc: &mut MetaAllocator) -> Vec<Term> {
    // Instances have a handful of binders; a scan beats hashing.
    let mut map: Vec<(MetaId, Term)> = Vec::new();
    ts.iter().map(|t| rename_one(t, alloc, &mut map)).collect()
}

fn rename_one(t: &Term, alloc: &mut MetaAllocator, map: &mut Vec<(MetaId, Term)>) -> Term {
    if t.is_ground() {
        return t.clone();
    }
    match t.kind() {
        TermKind::Meta(m) => match map.iter().find(|(k, _)| k == m) {
            Some((_, v)) => v.clone(),
            None => {
                let v = Term::meta(alloc.fresh(m.kind));
                map.push((*m, v.clone()));
                v
            }
        },
        TermKind::App(f, args) => {
            let new_args = args.iter().map(|a| rename_one(a, alloc, map)).collect();
            Term::app(f.clone(), new_args)
        }
        TermKind::Param(_) => unreachable!("parameters are ground"),
    }
}

/// Inverse of normalization: replaces every `θᵢ` across `ts` with a fresh
/// metavariable, consistently.
pub fn instantiate_params(ts: &[Term], alloc: &mut MetaAllocator) -> Vec<Term> {
    let mut map: FxHashMap<u32, Term> = FxHashMap::default();
    ts.iter().map(|t| thaw_one(t, alloc, &mut map)).collect()
}

fn thaw_one(t: &Term, alloc: &mut MetaAllocator, map: &mut FxHashMap<u32, Term>) -> Term {
    if !t.has_params() {
        return t.clone();
    }
    match t.kind() {
        TermKind::Param(i) => map
            .entry(*i)
            .or_insert_with(|| Term::meta(alloc.fresh(MetaKind::TypeGoal)))
            .clone(),
        TermKind::App(f, args) => {
            let new_args = args.iter().map(|a| thaw_one(a, alloc, map)).collect();
            Term::app(f.clone(), new_args)
        }
        TermKind::Meta(_) => t.clone(),
    }
}

/// True iff `m` occurs in `t` once bindings in `env` are followed.
pub fn occurs(m: MetaId, t: &Term, env: &Env) -> bool {
    env.occurs(m, t)
}
