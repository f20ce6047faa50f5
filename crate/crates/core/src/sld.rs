//! Depth-first SLD resolution.
//!
//! Each stack node owns its goal list and environment snapshot, so popping
//! a node is all the backtracking there is.

use std::sync::Arc;
use std::time::Instant;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::engine::{
    Answer, GoalList, InstanceOrder, Mode, NodeId, Outcome, RunStats, SolveOptions, Subgoal,
    TraceEvent, Verdict,
};
use crate::program::{Instance, Program};
use crate::term::{
    alpha_normalize_all, rename_fresh, MetaAllocator, MetaId, MetaKind, NormalizedTerm, Term,
};
use crate::unify::{unify, Env};

struct SldNode {
    id: NodeId,
    goals: GoalList,
    env: Env,
    candidates: Vec<Arc<Instance>>,
    cursor: usize,
    /// First few goals, jointly normalized. Only kept by [`probe`].
    prefix: Vec<NormalizedTerm>,
}

/// Goals per node remembered for the repeat check.
const PREFIX_GOALS: usize = 4;
/// Largest goal, in resolved nodes, that the repeat check normalizes.
const PREFIX_TERM_SIZE: u64 = 64;
/// Ancestors compared per node, most recent first.
const REPEAT_CANDIDATES: usize = 8;
/// Cells walked when looking for the suffix two goal lists share.
const SHARE_WALK: usize = 64;

/// Nodes on the current path by the normalized form of their first goal.
#[derive(Default)]
struct Ancestors(FxHashMap<NormalizedTerm, Vec<usize>>);

impl Ancestors {
    fn push(&mut self, node: &SldNode, depth: usize) {
        if let Some(k) = node.prefix.first() {
            self.0.entry(k.clone()).or_default().push(depth);
        }
    }

    fn pop(&mut self, node: &SldNode) {
        if let Some(k) = node.prefix.first() {
            if let Some(v) = self.0.get_mut(k) {
                v.pop();
            }
        }
    }

    /// True when an ancestor's list is `P ++ S` and `node`'s is `D ++ S`
    /// with `D` starting with a renaming of `P`. The choices that turned
    /// `P` into `D` then apply again from `node`, forever. `D` must be at
    /// least as long as `P`, or the renamed goals would reach into `S`.
    fn repeats(&self, stack: &[SldNode], node: &SldNode) -> bool {
        let Some(k) = node.prefix.first() else { return false };
        let Some(depths) = self.0.get(k) else { return false };
        depths.iter().rev().take(REPEAT_CANDIDATES).any(|&d| {
            let m = &stack[d];
            if node.goals.len() < m.goals.len() {
                return false;
            }
            match consumed(&m.goals, &node.goals) {
                Some(n) => n <= m.prefix.len() && n <= node.prefix.len() && m.prefix[..n] == node.prefix[..n],
                None => false,
            }
        })
    }
}

/// Number of leading goals of `older` that are not part of the suffix it
/// shares with `newer`, if that suffix is found within a short walk.
fn consumed(older: &GoalList, newer: &GoalList) -> Option<usize> {
    if older.len().abs_diff(newer.len()) > SHARE_WALK {
        return None;
    }
    let (mut a, mut b) = (older.clone(), newer.clone());
    let mut n = 0;
    while a.len() > b.len() {
        a = a.tail();
        n += 1;
    }
    while b.len() > a.len() {
        b = b.tail();
    }
    while !a.ptr_eq(&b) {
        if n == SHARE_WALK {
            return None;
        }
        a = a.tail();
        b = b.tail();
        n += 1;
    }
    Some(n)
}

/// The prefix stops before the first goal larger than [`PREFIX_TERM_SIZE`],
/// which keeps the check cheap next to a resolution step.
fn goal_prefix(goals: &GoalList, env: &Env, stats: &mut RunStats) -> Vec<NormalizedTerm> {
    let ts: Vec<Term> = goals
        .iter()
        .take(PREFIX_GOALS)
        .take_while(|g| env.resolved_size(&g.term, PREFIX_TERM_SIZE) <= PREFIX_TERM_SIZE)
        .map(|g| g.term.clone())
        .collect();
    let (norm, visits) = alpha_normalize_all(&ts, env);
    stats.norm_visits += visits;
    norm
}

pub(crate) fn ordered(mut cands: Vec<Arc<Instance>>, order: InstanceOrder) -> Vec<Arc<Instance>> {
    if order == InstanceOrder::Reverse {
        cands.reverse();
    }
    cands
}

/// Solve `query` by SLD resolution. The query may contain metavariables;
/// they are renamed apart before the run starts.
pub fn solve(program: &Program, query: &Term, opts: &SolveOptions) -> Outcome {
    let started = Instant::now();
    let mut answers = Vec::new();
    let mut seen: FxHashSet<Answer> = FxHashSet::default();
    let walk = search(program, query, opts, false, &mut |leaf, stats, trace| {
        let proof = leaf.env.resolve(&Term::meta(leaf.root_hole));
        let (mut norm, visits) = alpha_normalize_all(&[leaf.root_goal.clone(), proof], leaf.env);
        stats.norm_visits += visits;
        let proof = norm.pop().unwrap().into_term();
        let answer = Answer { goal: norm.pop().unwrap(), proof };
        if opts.trace {
            trace.push(TraceEvent::Found { node: leaf.node, answer: answer.clone() });
        }
        if seen.insert(answer.clone()) {
            answers.push(answer);
            return opts.mode == Mode::First;
        }
        false
    });
    let verdict = walk.limit.unwrap_or(if answers.is_empty() {
        Verdict::Exhausted
    } else {
        Verdict::Success
    });
    let mut stats = walk.stats;
    stats.wall_time_ns = started.elapsed().as_nanos() as u64;
    Outcome { answers, stats, verdict, table: None, trace: walk.trace }
}

/// Result of [`probe`].
#[derive(Debug, Clone)]
pub struct Probe {
    pub stats: RunStats,
    /// Leaves reached, repeats included.
    pub leaves: u64,
    /// Set when a budget cut the walk short.
    pub limit: Option<Verdict>,
    /// The walk reached a node whose leading goals rename those of an
    /// ancestor. The tree is infinite, so no step budget suffices.
    pub infinite: bool,
}

impl Probe {
    /// Whether [`solve`] with the same options stops without a limit verdict.
    pub fn finishes(&self) -> bool {
        self.limit.is_none() && !self.infinite
    }
}

/// Walk the same search tree as [`solve`] without building proofs or
/// answers. Cheap enough to ask whether a run fits in a budget when the
/// answers themselves would be quadratic in the step count. In
/// [`Mode::All`] the walk also stops early once it can tell the tree is
/// infinite.
pub fn probe(program: &Program, query: &Term, opts: &SolveOptions) -> Probe {
    let started = Instant::now();
    let opts = SolveOptions { trace: false, ..opts.clone() };
    let mut leaves = 0u64;
    let repeat_check = opts.mode == Mode::All;
    let walk = search(program, query, &opts, repeat_check, &mut |_, _, _| {
        leaves += 1;
        opts.mode == Mode::First
    });
    let mut stats = walk.stats;
    stats.wall_time_ns = started.elapsed().as_nanos() as u64;
    Probe { stats, leaves, limit: walk.limit, infinite: walk.infinite }
}

struct Leaf<'a> {
    node: NodeId,
    env: &'a Env,
    root_goal: &'a Term,
    root_hole: MetaId,
}

struct Walk {
    stats: RunStats,
    trace: Vec<TraceEvent>,
    limit: Option<Verdict>,
    infinite: bool,
}

/// Depth-first walk. `on_leaf` sees every empty goal list and returns
/// true to stop. With `repeat_check` the walk also stops at the first node
/// that provably repeats an ancestor.
fn search(
    program: &Program,
    query: &Term,
    opts: &SolveOptions,
    repeat_check: bool,
    on_leaf: &mut dyn FnMut(Leaf<'_>, &mut RunStats, &mut Vec<TraceEvent>) -> bool,
) -> Walk {
    let limits = opts.limits;
    let mut stats = RunStats::default();
    let mut trace = Vec::new();

    let mut alloc = MetaAllocator::new();
    let root_goal = rename_fresh(std::slice::from_ref(query), &mut alloc).remove(0);
    let root_hole = alloc.fresh(MetaKind::ProofHole);
    let mut next_id = 1u32;
    let mut fresh_id = || {
        let id = NodeId(next_id);
        next_id += 1;
        id
    };

    let env = Env::new();
    let candidates = ordered(program.candidates(&root_goal, &env), opts.order);
    let goals = GoalList::single(Subgoal { term: root_goal.clone(), hole: root_hole });
    let prefix = if repeat_check { goal_prefix(&goals, &env, &mut stats) } else { Vec::new() };
    let root = SldNode { id: fresh_id(), goals, env, candidates, cursor: 0, prefix };
    let mut ancestors = Ancestors::default();
    ancestors.push(&root, 0);
    if opts.trace {
        trace.push(TraceEvent::Push { node: root.id, parent: None, goals: vec![root_goal.clone()] });
    }
    let mut stack = vec![root];
    let mut size_tripped = false;
    let mut stopped = false;
    let mut infinite = false;
    let mut verdict = None;

    loop {
        let depth = stack.len() as u64;
        let Some(top) = stack.last_mut() else { break };
        if stats.steps >= limits.max_steps {
            verdict = Some(Verdict::StepLimit);
            break;
        }
        stats.steps += 1;
        stats.max_stack_depth = stats.max_stack_depth.max(depth);

        let Some(head) = top.goals.head().cloned() else {
            let leaf = Leaf { node: top.id, env: &top.env, root_goal: &root_goal, root_hole };
            let stop = on_leaf(leaf, &mut stats, &mut trace);
            ancestors.pop(&stack.pop().unwrap());
            if stop {
                stopped = true;
                break;
            }
            continue;
        };

        if top.cursor == top.candidates.len() {
            if opts.trace {
                trace.push(TraceEvent::Pop { node: top.id });
            }
            ancestors.pop(&stack.pop().unwrap());
            continue;
        }
        let inst = top.candidates[top.cursor].clone();
        top.cursor += 1;

        let mut renamed = rename_fresh(&instance_terms(&inst), &mut alloc);
        let conclusion = renamed.remove(0);
        stats.unifications += 1;
        let env = match unify(&top.env, &head.term, &conclusion) {
            Ok(env) => env,
            Err(_) => {
                stats.failures += 1;
                if opts.trace {
                    trace.push(TraceEvent::Try { node: top.id, instance: inst.name.clone(), ok: false });
                }
                continue;
            }
        };
        if opts.trace {
            trace.push(TraceEvent::Try { node: top.id, instance: inst.name.clone(), ok: true });
        }
        let new_goals: Vec<Subgoal> = renamed
            .into_iter()
            .map(|term| Subgoal { term, hole: alloc.fresh(MetaKind::ProofHole) })
            .collect();
        let proof = Term::app(
            inst.name.clone(),
            new_goals.iter().map(|g| Term::meta(g.hole)).collect(),
        );
        let env = env.bind(head.hole, proof);

        let oversized =
            new_goals.iter().find(|g| env.resolved_size(&g.term, limits.max_term_size) > limits.max_term_size);
        if let Some(g) = oversized {
            size_tripped = true;
            if opts.trace {
                trace.push(TraceEvent::SizePruned { size: env.resolve(&g.term).size() });
            }
            continue;
        }

        let goals = top.goals.tail().prepend(new_goals);
        let candidates = match goals.head() {
            Some(g) => ordered(program.candidates(&g.term, &env), opts.order),
            None => Vec::new(),
        };
        let parent = top.id;
        let prefix = if repeat_check { goal_prefix(&goals, &env, &mut stats) } else { Vec::new() };
        let node = SldNode { id: fresh_id(), goals, env, candidates, cursor: 0, prefix };
        if repeat_check && ancestors.repeats(&stack, &node) {
            infinite = true;
            break;
        }
        if opts.trace {
            trace.push(TraceEvent::Push {
                node: node.id,
                parent: Some(parent),
                goals: node.goals.iter().map(|g| node.env.resolve(&g.term)).collect(),
            });
        }
        ancestors.push(&node, stack.len());
        stack.push(node);
    }

    if verdict.is_none() && !stopped && !infinite && size_tripped {
        verdict = Some(Verdict::SizeLimit);
    }
    Walk { stats, trace, limit: verdict, infinite }
}

/// Conclusion first, then hypotheses, ready for one joint renaming.
pub(crate) fn instance_terms(inst: &Instance) -> Vec<Term> {
    let mut ts = Vec::with_capacity(inst.hypotheses.len() + 1);
    ts.push(inst.conclusion.clone());
    ts.extend(inst.hypotheses.iter().cloned());
    ts
}
