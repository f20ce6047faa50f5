//! Persistent binding environments and syntactic unification.
//!
//! An [`Env`] is a snapshot. Binding returns a new snapshot and leaves the
//! old one intact, so suspending a branch is a clone and resuming it is a
//! lookup. Nothing is ever undone by the caller.
//!
//! Snapshots are versions of one shared table. The version being read holds
//! the table itself; every other version is a chain of single-slot diffs
//! leading to it. Reading an old version first reverses the diffs on the
//! way ("rerooting"), so depth-first search, which mostly reads the newest
//! version or its parent, pays O(1) per access and a few words per bind.

use std::cell::RefCell;
use std::rc::Rc;

use rustc_hash::{FxHashMap, FxHashSet};
use thiserror::Error;

use crate::term::{occurs, MetaId, Symbol, Term, TermKind};

/// Bindings by metavariable id. Ids come from one counter per run, so a
/// vector indexed by id is usually dense. A table whose ids start far from
/// zero keeps them in a map instead, so its size tracks its bindings.
#[derive(Default)]
struct Slots {
    dense: Vec<Option<(MetaId, Term)>>,
    sparse: FxHashMap<u32, (MetaId, Term)>,
    bound: usize,
}

impl Slots {
    fn get(&self, m: MetaId) -> Option<&Term> {
        let slot = match self.dense.get(m.id as usize) {
            Some(slot) => slot.as_ref(),
            None => self.sparse.get(&m.id),
        };
        match slot {
            Some((k, t)) if *k == m => Some(t),
            _ => None,
        }
    }

    /// Grow the vector over `i` when that keeps it at least half full.
    fn grow(&mut self, i: usize) {
        if i < self.dense.len() || i + 1 > 2 * (self.bound + 1) + 64 {
            return;
        }
        let len = (i + 1).max(2 * self.dense.len()).min(2 * (self.bound + 1) + 64);
        self.dense.resize(len, None);
        if !self.sparse.is_empty() {
            let moved: Vec<u32> = self.sparse.keys().copied().filter(|&k| (k as usize) < len).collect();
            for k in moved {
                self.dense[k as usize] = self.sparse.remove(&k);
            }
        }
    }

    fn insert(&mut self, m: MetaId, t: Term) -> Option<Term> {
        let i = m.id as usize;
        self.grow(i);
        let prev = match self.dense.get_mut(i) {
            Some(slot) => slot.replace((m, t)),
            None => self.sparse.insert(m.id, (m, t)),
        };
        match prev {
            Some((k, t)) => {
                assert_eq!(k, m, "metavariable id {} bound under two kinds", m.id);
                Some(t)
            }
            None => {
                self.bound += 1;
                None
            }
        }
    }

    fn remove(&mut self, m: MetaId) -> Option<Term> {
        let (k, t) = match self.dense.get_mut(m.id as usize) {
            Some(slot) => slot.take()?,
            None => self.sparse.remove(&m.id)?,
        };
        debug_assert_eq!(k, m);
        self.bound -= 1;
        Some(t)
    }

    fn iter(&self) -> impl Iterator<Item = &(MetaId, Term)> {
        self.dense.iter().flatten().chain(self.sparse.values())
    }
}

enum Data {
    Table(Slots),
    /// This version equals `next` with `slot` set to `val` (or unset).
    Diff { slot: MetaId, val: Option<Term>, next: Rc<Version> },
}

struct Version(RefCell<Data>);

impl Version {
    fn table(map: Slots) -> Rc<Version> {
        Rc::new(Version(RefCell::new(Data::Table(map))))
    }
}

impl Drop for Version {
    fn drop(&mut self) {
        // Long diff chains would otherwise drop recursively.
        let mut data = std::mem::replace(self.0.get_mut(), Data::Table(Slots::default()));
        while let Data::Diff { next, .. } = data {
            match Rc::try_unwrap(next) {
                Ok(mut v) => data = std::mem::replace(v.0.get_mut(), Data::Table(Slots::default())),
                Err(_) => break,
            }
        }
    }
}

/// Make `v` hold the table.
fn reroot(v: &Rc<Version>) {
    let mut path = Vec::new();
    let mut cur = Rc::clone(v);
    loop {
        let next = match &*cur.0.borrow() {
            Data::Table(_) => break,
            Data::Diff { next, .. } => Rc::clone(next),
        };
        path.push(cur);
        cur = next;
    }
    // `cur` holds the table; hand it back along the path one diff at a time.
    while let Some(node) = path.pop() {
        let mut node_data = node.0.borrow_mut();
        let Data::Diff { slot, val, .. } = &mut *node_data else { unreachable!() };
        let (slot, val) = (*slot, val.take());
        let mut old_data = cur.0.borrow_mut();
        let Data::Table(map) = &mut *old_data else { unreachable!() };
        let prev = match val {
            Some(t) => map.insert(slot, t),
            None => map.remove(slot),
        };
        let map = std::mem::take(map);
        *old_data = Data::Diff { slot, val: prev, next: Rc::clone(&node) };
        drop(old_data);
        *node_data = Data::Table(map);
        drop(node_data);
        cur = node;
    }
}

#[derive(Clone)]
pub struct Env {
    version: Rc<Version>,
    len: usize,
}

impl Default for Env {
    fn default() -> Self {
        Env { version: Version::table(Slots::default()), len: 0 }
    }
}

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    fn with_table<R>(&self, f: impl FnOnce(&Slots) -> R) -> R {
        reroot(&self.version);
        match &*self.version.0.borrow() {
            Data::Table(map) => f(map),
            Data::Diff { .. } => unreachable!(),
        }
    }

    pub fn lookup(&self, m: MetaId) -> Option<Term> {
        self.with_table(|map| map.get(m).cloned())
    }

    pub fn is_bound(&self, m: MetaId) -> bool {
        self.with_table(|map| map.get(m).is_some())
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of binds on the path from the empty environment.
    pub fn generation(&self) -> u64 {
        self.len as u64
    }

    /// Extend with `m ↦ t`. `m` must be unbound and must not occur in `t`.
    pub fn bind(&self, m: MetaId, t: Term) -> Env {
        debug_assert!(!self.is_bound(m), "rebinding {m:?}");
        debug_assert!(!occurs(m, &t, self), "cyclic binding for {m:?}");
        reroot(&self.version);
        let mut data = self.version.0.borrow_mut();
        let Data::Table(map) = &mut *data else { unreachable!() };
        let mut map = std::mem::take(map);
        map.insert(m, t);
        let version = Version::table(map);
        *data = Data::Diff { slot: m, val: None, next: Rc::clone(&version) };
        Env { version, len: self.len + 1 }
    }

    /// Follow bindings at the root only.
    pub fn walk(&self, t: &Term) -> Term {
        let mut cur = t.clone();
        while let Some(m) = cur.as_meta() {
            match self.lookup(m) {
                Some(b) => cur = b,
                None => break,
            }
        }
        cur
    }

    /// Substitute every bound metavariable, recursively. Unchanged subterms
    /// (in particular ground ones) are returned shared.
    pub fn resolve(&self, t: &Term) -> Term {
        if t.is_ground() {
            return t.clone();
        }
        match t.kind() {
            TermKind::Meta(m) => match self.lookup(*m) {
                Some(b) => self.resolve(&b),
                None => t.clone(),
            },
            TermKind::App(f, args) => {
                let mut new_args: Vec<Term> = Vec::new();
                for (i, a) in args.iter().enumerate() {
                    let r = self.resolve(a);
                    if new_args.is_empty() && r.ptr_eq(a) {
                        continue;
                    }
                    if new_args.is_empty() {
                        new_args.reserve_exact(args.len());
                        new_args.extend(args[..i].iter().cloned());
                    }
                    new_args.push(r);
                }
                if new_args.is_empty() {
                    t.clone()
                } else {
                    Term::app(f.clone(), new_args)
                }
            }
            TermKind::Param(_) => t.clone(),
        }
    }

    /// Node count of `resolve(t)`, without building it. Counting stops
    /// once it passes `cap`.
    pub fn resolved_size(&self, t: &Term, cap: u64) -> u64 {
        self.with_table(|slots| {
            let mut total = 0u64;
            let mut todo = vec![t];
            while let Some(t) = todo.pop() {
                if t.is_ground() {
                    total = total.saturating_add(t.size());
                } else {
                    match t.kind() {
                        TermKind::Meta(m) => match slots.get(*m) {
                            Some(b) => todo.push(b),
                            None => total += 1,
                        },
                        TermKind::App(_, args) => {
                            total += 1;
                            todo.extend(args.iter());
                        }
                        TermKind::Param(_) => total += 1,
                    }
                }
                if total > cap {
                    break;
                }
            }
            total
        })
    }

    /// True iff `m` occurs in `t` once bindings are followed.
    pub fn occurs(&self, m: MetaId, t: &Term) -> bool {
        // A bound metavariable can be reached along many paths, which makes
        // a plain walk exponential in the worst case. Past a few nodes, each
        // binding is followed once.
        const UNTRACKED: usize = 64;
        self.with_table(|slots| {
            let mut todo = vec![t];
            let mut followed: FxHashSet<MetaId> = FxHashSet::default();
            let mut visited = 0;
            while let Some(t) = todo.pop() {
                if t.is_ground() {
                    continue;
                }
                match t.kind() {
                    TermKind::Meta(x) if *x == m => return true,
                    TermKind::Meta(x) => {
                        visited += 1;
                        if visited <= UNTRACKED || followed.insert(*x) {
                            todo.extend(slots.get(*x));
                        }
                    }
                    TermKind::App(_, args) => todo.extend(args.iter()),
                    TermKind::Param(_) => {}
                }
            }
            false
        })
    }
}

impl std::fmt::Debug for Env {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut entries: Vec<(MetaId, Term)> =
            self.with_table(|map| map.iter().map(|(m, t)| (*m, t.clone())).collect());
        entries.sort_by_key(|(m, _)| *m);
        f.debug_map().entries(entries).finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnifyError {
    #[error("functor clash: {0} vs {1}")]
    Clash(String, String),
    #[error("arity clash on {functor}: {left} vs {right}")]
    Arity { functor: Symbol, left: usize, right: usize },
    #[error("occurs check: {0:?}")]
    Occurs(MetaId),
}

/// Most general unifier of `s` and `t`, as an extension of `env`.
///
/// The occurs check is always on. On failure nothing needs undoing: the
/// caller still holds `env`.
pub fn unify(env: &Env, s: &Term, t: &Term) -> Result<Env, UnifyError> {
    let mut env = env.clone();
    let mut work = vec![(s.clone(), t.clone())];
    while let Some((a, b)) = work.pop() {
        let a = env.walk(&a);
        let b = env.walk(&b);
        if a.ptr_eq(&b) {
            continue;
        }
        match (a.kind(), b.kind()) {
            (TermKind::Meta(x), TermKind::Meta(y)) if x == y => {}
            // Younger to older, so chains don't grow with search depth.
            (TermKind::Meta(x), TermKind::Meta(y)) => {
                env = if x.id > y.id { env.bind(*x, b) } else { env.bind(*y, a) }
            }
            (TermKind::Meta(x), _) => env = bind_checked(env, *x, b)?,
            (_, TermKind::Meta(y)) => env = bind_checked(env, *y, a)?,
            (TermKind::App(f, xs), TermKind::App(g, ys)) => {
                if a.is_ground() && b.is_ground() {
                    if a == b {
                        continue;
                    }
                    return Err(UnifyError::Clash(head(&a), head(&b)));
                }
                if f != g {
                    return Err(UnifyError::Clash(f.to_string(), g.to_string()));
                }
                if xs.len() != ys.len() {
                    return Err(UnifyError::Arity {
                        functor: f.clone(),
                        left: xs.len(),
                        right: ys.len(),
                    });
                }
                work.extend(xs.iter().cloned().zip(ys.iter().cloned()).rev());
            }
            (TermKind::Param(i), TermKind::Param(j)) if i == j => {}
            _ => return Err(UnifyError::Clash(head(&a), head(&b))),
        }
    }
    Ok(env)
}

fn head(t: &Term) -> String {
    match t.kind() {
        TermKind::App(f, args) => format!("{f}/{}", args.len()),
        _ => t.to_string(),
    }
}

fn bind_checked(env: Env, m: MetaId, t: Term) -> Result<Env, UnifyError> {
    if !t.is_ground() && occurs(m, &t, &env) {
        return Err(UnifyError::Occurs(m));
    }
    Ok(env.bind(m, t))
}
