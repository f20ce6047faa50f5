//! Tabled typeclass resolution.
//!
//! The search is a forest with one tree per distinct subgoal (up to α).
//! Every tree is rooted at a generator node, which tries instances against
//! the subgoal one at a time. Every other node is a consumer: it holds the
//! subgoals still needed to establish its tree's goal and is advanced by
//! answers from the table rather than by instances.
//!
//! Control is two stacks and a table:
//!
//! * the resume stack of `(consumer, answer)` pairs, which always has
//!   priority;
//! * the generator stack, whose top is expanded by one instance per step;
//! * the table, mapping each α-normalized subgoal to its answers so far and
//!   the consumers waiting on it.
//!
//! Every node keeps its own persistent environment, so suspending a
//! consumer is just keeping it around and resuming it needs no replay.

use std::rc::Rc;
use std::sync::Arc;
use std::time::Instant;

use rustc_hash::{FxHashMap, FxHashSet};

use crate::engine::{
    Answer, GoalList, Mode, NodeId, Outcome, RunStats, SolveOptions, Subgoal, TableRow, TableView,
    TraceEvent, Verdict,
};
use crate::program::{Instance, Program};
use crate::sld::{instance_terms, ordered};
use crate::term::{
    alpha_normalize_all, instantiate_params, rename_fresh, MetaAllocator, MetaId, MetaKind,
    NormalizedTerm, Term,
};
use crate::unify::{unify, Env};

struct Generator {
    node: NodeId,
    entry: usize,
    /// Fresh-metavariable copy of the entry's key.
    goal: Term,
    hole: MetaId,
    env: Env,
    candidates: Vec<Arc<Instance>>,
    cursor: usize,
}

struct Consumer {
    node: NodeId,
    /// Entry whose goal this consumer is working towards.
    ancestor: usize,
    ancestor_goal: Term,
    ancestor_hole: MetaId,
    subgoals: GoalList,
    env: Env,
}

struct StoredAnswer {
    node: NodeId,
    answer: Answer,
}

#[derive(PartialEq, Eq, Hash)]
enum DedupKey {
    Goal(NormalizedTerm),
    GoalAndProof(NormalizedTerm, Term),
}

struct TableEntry {
    key: NormalizedTerm,
    generator: NodeId,
    answers: Vec<Rc<StoredAnswer>>,
    seen: FxHashSet<DedupKey>,
    dependents: Vec<Rc<Consumer>>,
}

/// Result of adding an answer to a table entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recorded {
    New,
    Duplicate,
}

enum Flow {
    Continue,
    Stop,
}

struct Solver<'p> {
    program: &'p Program,
    opts: &'p SolveOptions,
    alloc: MetaAllocator,
    table: FxHashMap<NormalizedTerm, usize>,
    entries: Vec<TableEntry>,
    generators: Vec<Generator>,
    resume: Vec<(Rc<Consumer>, Rc<StoredAnswer>)>,
    root: usize,
    next_node: u32,
    stats: RunStats,
    trace: Vec<TraceEvent>,
    size_tripped: bool,
    root_answers: Vec<Answer>,
}

/// Solve `query` by tabled resolution. There is no step cap: the run ends
/// when both stacks are empty, or at the first root answer in
/// [`Mode::First`].
pub fn solve(program: &Program, query: &Term, opts: &SolveOptions) -> Outcome {
    let started = Instant::now();
    let mut alloc = MetaAllocator::new();
    let goal = rename_fresh(std::slice::from_ref(query), &mut alloc).remove(0);
    let mut s = Solver {
        program,
        opts,
        alloc,
        table: FxHashMap::default(),
        entries: Vec::new(),
        generators: Vec::new(),
        resume: Vec::new(),
        root: 0,
        next_node: 1,
        stats: RunStats::default(),
        trace: Vec::new(),
        size_tripped: false,
        root_answers: Vec::new(),
    };
    let (key, visits) = s.normalize(&goal, &Env::new());
    s.stats.norm_visits += visits;
    s.root = s.new_subgoal(key);
    let stopped = s.run();

    let verdict = if stopped {
        Verdict::Success
    } else if s.size_tripped {
        Verdict::SizeLimit
    } else if s.root_answers.is_empty() {
        Verdict::Exhausted
    } else {
        Verdict::Success
    };
    s.stats.table_size = s.entries.len() as u64;
    s.stats.wall_time_ns = started.elapsed().as_nanos() as u64;
    let table = TableView {
        rows: s
            .entries
            .iter()
            .map(|e| TableRow {
                key: e.key.clone(),
                generator: e.generator,
                answers: e.answers.iter().map(|a| (a.node, a.answer.clone())).collect(),
                dependents: e.dependents.iter().map(|c| c.node).collect(),
            })
            .collect(),
    };
    Outcome {
        answers: s.root_answers,
        stats: s.stats,
        verdict,
        table: Some(table),
        trace: s.trace,
    }
}

impl Solver<'_> {
    fn fresh_node(&mut self) -> NodeId {
        let id = NodeId(self.next_node);
        self.next_node += 1;
        id
    }

    fn emit(&mut self, event: impl FnOnce() -> TraceEvent) {
        if self.opts.trace {
            self.trace.push(event());
        }
    }

    fn normalize(&self, t: &Term, env: &Env) -> (NormalizedTerm, u64) {
        let (mut out, visits) = alpha_normalize_all(std::slice::from_ref(t), env);
        (out.pop().unwrap(), visits)
    }

    /// Main loop. Returns true if it stopped at a root answer.
    fn run(&mut self) -> bool {
        loop {
            self.stats.steps += 1;
            let depth = (self.generators.len() + self.resume.len()) as u64;
            self.stats.max_stack_depth = self.stats.max_stack_depth.max(depth);
            if let Some((consumer, answer)) = self.resume.pop() {
                if let Flow::Stop = self.resume_consumer(&consumer, &answer) {
                    return true;
                }
            } else if !self.generators.is_empty() {
                if let Flow::Stop = self.expand_generator() {
                    return true;
                }
            } else {
                return false;
            }
        }
    }

    fn resume_consumer(&mut self, consumer: &Consumer, stored: &StoredAnswer) -> Flow {
        self.stats.resumes += 1;
        let first = consumer.subgoals.head().expect("consumer without subgoals");
        let fresh = instantiate_params(
            &[stored.answer.goal.term().clone(), stored.answer.proof.clone()],
            &mut self.alloc,
        );
        self.stats.unifications += 1;
        let env = match unify(&consumer.env, &first.term, &fresh[0]) {
            Ok(env) => env,
            Err(_) => {
                self.stats.failures += 1;
                self.emit(|| TraceEvent::Resume {
                    consumer: consumer.node,
                    solution: stored.node,
                    ok: false,
                });
                return Flow::Continue;
            }
        };
        self.emit(|| TraceEvent::Resume { consumer: consumer.node, solution: stored.node, ok: true });
        let env = env.bind(first.hole, fresh[1].clone());
        let rest = consumer.subgoals.tail();
        if rest.is_empty() {
            self.found_answer(consumer.ancestor, &consumer.ancestor_goal, consumer.ancestor_hole, &env)
        } else {
            self.new_consumer(
                consumer.ancestor,
                consumer.ancestor_goal.clone(),
                consumer.ancestor_hole,
                rest,
                env,
            );
            Flow::Continue
        }
    }

    fn expand_generator(&mut self) -> Flow {
        let top = self.generators.last_mut().expect("nonempty generator stack");
        if top.cursor == top.candidates.len() {
            let node = top.node;
            self.generators.pop();
            self.emit(|| TraceEvent::Pop { node });
            return Flow::Continue;
        }
        let inst = top.candidates[top.cursor].clone();
        top.cursor += 1;
        let (node, entry, goal, hole, env) =
            (top.node, top.entry, top.goal.clone(), top.hole, top.env.clone());

        let mut renamed = rename_fresh(&instance_terms(&inst), &mut self.alloc);
        let conclusion = renamed.remove(0);
        self.stats.unifications += 1;
        let env = match unify(&env, &goal, &conclusion) {
            Ok(env) => env,
            Err(_) => {
                self.stats.failures += 1;
                self.emit(|| TraceEvent::Try { node, instance: inst.name.clone(), ok: false });
                return Flow::Continue;
            }
        };
        self.emit(|| TraceEvent::Try { node, instance: inst.name.clone(), ok: true });
        let subgoals: Vec<Subgoal> = renamed
            .into_iter()
            .map(|term| Subgoal { term, hole: self.alloc.fresh(MetaKind::ProofHole) })
            .collect();
        let proof = Term::app(inst.name.clone(), subgoals.iter().map(|g| Term::meta(g.hole)).collect());
        let env = env.bind(hole, proof);
        if subgoals.is_empty() {
            self.found_answer(entry, &goal, hole, &env)
        } else {
            self.new_consumer(entry, goal, hole, GoalList::default().prepend(subgoals), env);
            Flow::Continue
        }
    }

    /// Insert a table entry for `key` and push its generator.
    fn new_subgoal(&mut self, key: NormalizedTerm) -> usize {
        debug_assert!(!self.table.contains_key(&key), "subgoal {key} already tabled");
        let node = self.fresh_node();
        let goal = instantiate_params(std::slice::from_ref(key.term()), &mut self.alloc).remove(0);
        let hole = self.alloc.fresh(MetaKind::ProofHole);
        let env = Env::new();
        let candidates = ordered(self.program.candidates(&goal, &env), self.opts.order);
        let entry = self.entries.len();
        self.emit(|| TraceEvent::Generator { node, key: key.clone() });
        self.table.insert(key.clone(), entry);
        self.entries.push(TableEntry {
            key,
            generator: node,
            answers: Vec::new(),
            seen: FxHashSet::default(),
            dependents: Vec::new(),
        });
        self.generators.push(Generator { node, entry, goal, hole, env, candidates, cursor: 0 });
        self.stats.generator_nodes += 1;
        entry
    }

    fn new_consumer(
        &mut self,
        ancestor: usize,
        ancestor_goal: Term,
        ancestor_hole: MetaId,
        subgoals: GoalList,
        env: Env,
    ) {
        let first = subgoals.head().expect("consumer needs a subgoal").term.clone();
        let (key, visits) = self.normalize(&first, &env);
        self.stats.norm_visits += visits;
        if key.term().size() > self.opts.limits.max_term_size {
            self.size_tripped = true;
            let size = key.term().size();
            self.emit(|| TraceEvent::SizePruned { size });
            return;
        }
        let node = self.fresh_node();
        self.stats.consumer_nodes += 1;
        let root = self.entries[ancestor].generator;
        self.emit(|| TraceEvent::Consumer {
            node,
            root,
            subgoals: subgoals.iter().map(|g| env.resolve(&g.term)).collect(),
        });
        let entry = match self.table.get(&key) {
            Some(&e) => e,
            None => self.new_subgoal(key),
        };
        let consumer = Rc::new(Consumer { node, ancestor, ancestor_goal, ancestor_hole, subgoals, env });
        for stored in &self.entries[entry].answers {
            self.resume.push((consumer.clone(), stored.clone()));
        }
        let generator = self.entries[entry].generator;
        self.emit(|| TraceEvent::Dependent { consumer: node, generator });
        self.entries[entry].dependents.push(consumer);
    }

    /// `goal` (under `env`, with its proof at `hole`) is a solution to
    /// `entry`'s subgoal.
    fn found_answer(&mut self, entry: usize, goal: &Term, hole: MetaId, env: &Env) -> Flow {
        let proof = env.resolve(&Term::meta(hole));
        let (mut norm, visits) = alpha_normalize_all(&[goal.clone(), proof], env);
        self.stats.norm_visits += visits;
        let proof = norm.pop().unwrap().into_term();
        let goal = norm.pop().unwrap();
        if goal.term().size() > self.opts.limits.max_term_size {
            self.size_tripped = true;
            let size = goal.term().size();
            self.emit(|| TraceEvent::SizePruned { size });
            return Flow::Continue;
        }
        let answer = Answer { goal, proof };
        if self.record_answer(entry, answer.clone()) == Recorded::Duplicate {
            return Flow::Continue;
        }
        if entry == self.root {
            self.root_answers.push(answer);
            if self.opts.mode == Mode::First {
                let solution = self.entries[entry].answers.last().unwrap().node;
                self.emit(|| TraceEvent::Return { solution });
                return Flow::Stop;
            }
        }
        Flow::Continue
    }

    /// Add `answer` to the entry unless an equal one is already there; a new
    /// answer is queued for every current dependent.
    fn record_answer(&mut self, entry: usize, answer: Answer) -> Recorded {
        let dedup = if self.opts.distinct_proofs {
            DedupKey::GoalAndProof(answer.goal.clone(), answer.proof.clone())
        } else {
            DedupKey::Goal(answer.goal.clone())
        };
        let generator = self.entries[entry].generator;
        if self.entries[entry].seen.contains(&dedup) {
            self.emit(|| TraceEvent::Duplicate { generator, answer: answer.clone() });
            return Recorded::Duplicate;
        }
        let node = self.fresh_node();
        self.emit(|| TraceEvent::Solution { node, generator, answer: answer.clone() });
        let stored = Rc::new(StoredAnswer { node, answer });
        let e = &mut self.entries[entry];
        e.seen.insert(dedup);
        e.answers.push(stored.clone());
        for dep in &e.dependents {
            self.resume.push((dep.clone(), stored.clone()));
        }
        Recorded::New
    }
}
