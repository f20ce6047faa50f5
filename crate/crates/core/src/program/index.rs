//! Discrimination tree over instance conclusions.
//!
//! A conclusion is flattened into its preorder sequence of `functor/arity`
//! keys; every metavariable becomes a single wildcard. Repeated variables
//! are not tracked, so lookups over-approximate but never miss a unifiable
//! instance.

use rustc_hash::FxHashMap;

use crate::term::{Symbol, Term, TermKind};
use crate::unify::Env;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Sym(Symbol, usize),
    Param(u32),
}

#[derive(Debug, Clone, Default)]
struct TrieNode {
    children: FxHashMap<Key, usize>,
    star: Option<usize>,
    leaves: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct DiscTree {
    nodes: Vec<TrieNode>,
    len: usize,
}

impl Default for DiscTree {
    fn default() -> Self {
        DiscTree { nodes: vec![TrieNode::default()], len: 0 }
    }
}

enum Edge {
    Key(Key),
    Star,
}

fn flatten(t: &Term, out: &mut Vec<Edge>) {
    match t.kind() {
        TermKind::Meta(_) => out.push(Edge::Star),
        TermKind::Param(i) => out.push(Edge::Key(Key::Param(*i))),
        TermKind::App(f, args) => {
            out.push(Edge::Key(Key::Sym(f.clone(), args.len())));
            args.iter().for_each(|a| flatten(a, out));
        }
    }
}

impl DiscTree {
    pub fn new() -> Self {
        DiscTree::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Index `conclusion` under value `id`.
    pub fn insert(&mut self, conclusion: &Term, id: usize) {
        let mut path = Vec::new();
        flatten(conclusion, &mut path);
        let mut node = 0;
        for edge in path {
            let next = match &edge {
                Edge::Star => self.nodes[node].star,
                Edge::Key(k) => self.nodes[node].children.get(k).copied(),
            };
            node = match next {
                Some(n) => n,
                None => {
                    let n = self.nodes.len();
                    self.nodes.push(TrieNode::default());
                    match edge {
                        Edge::Star => self.nodes[node].star = Some(n),
                        Edge::Key(k) => {
                            self.nodes[node].children.insert(k, n);
                        }
                    }
                    n
                }
            };
        }
        self.nodes[node].leaves.push(id);
        self.len += 1;
    }

    /// Ids of every indexed conclusion that may unify with `goal` (read
    /// through `env`), ascending and without duplicates.
    pub fn lookup(&self, goal: &Term, env: &Env) -> Vec<usize> {
        let mut out = Vec::new();
        self.walk(0, vec![goal.clone()], env, &mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn walk(&self, node: usize, mut pending: Vec<Term>, env: &Env, out: &mut Vec<usize>) {
        let Some(next) = pending.pop() else {
            out.extend_from_slice(&self.nodes[node].leaves);
            return;
        };
        let t = env.walk(&next);
        let n = &self.nodes[node];
        match t.kind() {
            TermKind::Meta(_) => {
                // An unbound goal variable matches any one indexed subterm.
                let mut ends = Vec::new();
                self.skip(node, 1, &mut ends);
                for end in ends {
                    self.walk(end, pending.clone(), env, out);
                }
            }
            TermKind::App(f, args) => {
                if let Some(star) = n.star {
                    self.walk(star, pending.clone(), env, out);
                }
                if let Some(&child) = n.children.get(&Key::Sym(f.clone(), args.len())) {
                    pending.extend(args.iter().rev().cloned());
                    self.walk(child, pending, env, out);
                }
            }
            TermKind::Param(i) => {
                if let Some(star) = n.star {
                    self.walk(star, pending.clone(), env, out);
                }
                if let Some(&child) = n.children.get(&Key::Param(*i)) {
                    self.walk(child, pending, env, out);
                }
            }
        }
    }

    /// Trie nodes reached from `node` after consuming `count` whole terms.
    fn skip(&self, node: usize, count: usize, ends: &mut Vec<usize>) {
        if count == 0 {
            ends.push(node);
            return;
        }
        let n = &self.nodes[node];
        if let Some(star) = n.star {
            self.skip(star, count - 1, ends);
        }
        for (key, &child) in &n.children {
            let arity = match key {
                Key::Sym(_, a) => *a,
                Key::Param(_) => 0,
            };
            self.skip(child, count - 1 + arity, ends);
        }
    }
}
