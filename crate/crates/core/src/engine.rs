//! Types shared by both resolution engines: options, limits, statistics,
//! answers and trace events.

use std::fmt;
use std::rc::Rc;

use serde::Serialize;

use crate::program::{Program, Query};
use crate::term::{MetaId, NormalizedTerm, Symbol, Term};
use crate::{sld, tabled};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunLimits {
    pub max_steps: u64,
    /// Largest subgoal or answer (in tree nodes, after resolution) a run
    /// will entertain.
    pub max_term_size: u64,
}

impl Default for RunLimits {
    fn default() -> Self {
        RunLimits { max_steps: 1_000_000, max_term_size: 10_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    First,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InstanceOrder {
    /// First-declared instance is tried first.
    #[default]
    Declaration,
    Reverse,
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub limits: RunLimits,
    pub mode: Mode,
    pub order: InstanceOrder,
    /// Tabled only: treat answers with equal goals but different proofs as
    /// distinct.
    pub distinct_proofs: bool,
    pub trace: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "SUCCESS")]
    Success,
    #[serde(rename = "EXHAUSTED")]
    Exhausted,
    #[serde(rename = "STEP_LIMIT")]
    StepLimit,
    #[serde(rename = "SIZE_LIMIT")]
    SizeLimit,
}

impl Verdict {
    pub fn is_limit(self) -> bool {
        matches!(self, Verdict::StepLimit | Verdict::SizeLimit)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Success => "SUCCESS",
            Verdict::Exhausted => "EXHAUSTED",
            Verdict::StepLimit => "STEP_LIMIT",
            Verdict::SizeLimit => "SIZE_LIMIT",
        })
    }
}

/// Counters for one run. Tabling-specific counters stay zero under SLD.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RunStats {
    pub steps: u64,
    pub unifications: u64,
    pub failures: u64,
    pub max_stack_depth: u64,
    pub generator_nodes: u64,
    pub consumer_nodes: u64,
    pub resumes: u64,
    pub table_size: u64,
    pub norm_visits: u64,
    pub wall_time_ns: u64,
}

/// An instantiated goal together with the instance tree proving it. Both
/// are normalized with one shared parameter numbering.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Answer {
    pub goal: NormalizedTerm,
    pub proof: Term,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ⊢ {}", self.goal, self.proof)
    }
}

/// Node numbers in creation order, starting at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    /// New table entry and its generator node.
    Generator { node: NodeId, key: NormalizedTerm },
    /// New consumer node in the tree rooted at `root`.
    Consumer { node: NodeId, root: NodeId, subgoals: Vec<Term> },
    /// `consumer` waits on the entry generated by `generator`.
    Dependent { consumer: NodeId, generator: NodeId },
    Try { node: NodeId, instance: Symbol, ok: bool },
    /// A new answer recorded in the entry generated by `generator`.
    Solution { node: NodeId, generator: NodeId, answer: Answer },
    Duplicate { generator: NodeId, answer: Answer },
    Resume { consumer: NodeId, solution: NodeId, ok: bool },
    Pop { node: NodeId },
    SizePruned { size: u64 },
    Return { solution: NodeId },
    /// SLD node push.
    Push { node: NodeId, parent: Option<NodeId>, goals: Vec<Term> },
    /// SLD answer.
    Found { node: NodeId, answer: Answer },
}

fn list(ts: &[Term]) -> String {
    let parts: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Generator { node, key } => write!(f, "{node} generator {key}"),
            TraceEvent::Consumer { node, root, subgoals } => {
                write!(f, "{node} consumer in {root} {}", list(subgoals))
            }
            TraceEvent::Dependent { consumer, generator } => {
                write!(f, "{consumer} depends on {generator}")
            }
            TraceEvent::Try { node, instance, ok } => {
                write!(f, "{node} try {instance} {}", if *ok { "ok" } else { "fail" })
            }
            TraceEvent::Solution { node, generator, answer } => {
                write!(f, "{node} solution in {generator} {} : {}", answer.proof, answer.goal)
            }
            TraceEvent::Duplicate { generator, answer } => {
                write!(f, "duplicate in {generator} {} : {}", answer.proof, answer.goal)
            }
            TraceEvent::Resume { consumer, solution, ok } => {
                write!(f, "{consumer} resume {solution} {}", if *ok { "ok" } else { "fail" })
            }
            TraceEvent::Pop { node } => write!(f, "{node} pop"),
            TraceEvent::SizePruned { size } => write!(f, "pruned size {size}"),
            TraceEvent::Return { solution } => write!(f, "{solution} return"),
            TraceEvent::Push { node, parent, goals } => match parent {
                Some(p) => write!(f, "{node} push from {p} {}", list(goals)),
                None => write!(f, "{node} push {}", list(goals)),
            },
            TraceEvent::Found { node, answer } => write!(f, "{node} answer {answer}"),
        }
    }
}

/// One row of the final table.
#[derive(Debug, Clone)]
pub struct TableRow {
    pub key: NormalizedTerm,
    pub generator: NodeId,
    pub answers: Vec<(NodeId, Answer)>,
    pub dependents: Vec<NodeId>,
}

/// Read-only snapshot of the answer table, rows in creation order.
#[derive(Debug, Clone, Default)]
pub struct TableView {
    pub rows: Vec<TableRow>,
}

impl TableView {
    pub fn row(&self, key: &str) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.key.to_string() == key)
    }
}

/// Three columns: subgoal, solutions (`proof : goal`), dependents.
impl fmt::Display for TableView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<[String; 3]> = self
            .rows
            .iter()
            .map(|r| {
                let sols: Vec<String> =
                    r.answers.iter().map(|(_, a)| format!("{} : {}", a.proof, a.goal)).collect();
                let deps: Vec<String> = r.dependents.iter().map(|d| d.to_string()).collect();
                [r.key.to_string(), sols.join(", "), deps.join(", ")]
            })
            .collect();
        let header = ["Subgoal".to_string(), "Solutions".to_string(), "Dependents".to_string()];
        let mut width = [0usize; 3];
        for row in std::iter::once(&header).chain(cells.iter()) {
            for (w, c) in width.iter_mut().zip(row.iter()) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |f: &mut fmt::Formatter<'_>, row: &[String; 3]| {
            let pad = |s: &str, w: usize| format!("{s}{}", " ".repeat(w - s.chars().count()));
            writeln!(
                f,
                "{} | {} | {}",
                pad(&row[0], width[0]),
                pad(&row[1], width[1]),
                row[2]
            )
        };
        line(f, &header)?;
        writeln!(f, "{}", "-".repeat(width[0] + width[1] + width[2] + 6))?;
        for row in &cells {
            line(f, row)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub answers: Vec<Answer>,
    pub stats: RunStats,
    pub verdict: Verdict,
    /// Tabled runs only.
    pub table: Option<TableView>,
    /// Empty unless tracing was requested.
    pub trace: Vec<TraceEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Sld,
    Tabled,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Sld => "sld",
            Engine::Tabled => "tabled",
        }
    }

    pub fn solve(self, program: &Program, query: &Query, opts: &SolveOptions) -> Outcome {
        match self {
            Engine::Sld => sld::solve(program, &query.goal, opts),
            Engine::Tabled => tabled::solve(program, &query.goal, opts),
        }
    }
}

/// A goal paired with the metavariable standing for its proof.
#[derive(Debug, Clone)]
pub(crate) struct Subgoal {
    pub term: Term,
    pub hole: MetaId,
}

/// Persistent cons list of subgoals; prepending shares the tail.
#[derive(Clone, Default)]
pub(crate) struct GoalList(Option<Rc<GoalCell>>);

struct GoalCell {
    head: Subgoal,
    tail: GoalList,
    len: usize,
}

impl GoalList {
    pub fn single(g: Subgoal) -> Self {
        GoalList::default().cons(g)
    }

    pub fn cons(&self, head: Subgoal) -> Self {
        GoalList(Some(Rc::new(GoalCell { head, tail: self.clone(), len: self.len() + 1 })))
    }

    /// `front ++ self`.
    pub fn prepend(&self, front: Vec<Subgoal>) -> Self {
        front.into_iter().rev().fold(self.clone(), |acc, g| acc.cons(g))
    }

    pub fn head(&self) -> Option<&Subgoal> {
        self.0.as_ref().map(|c| &c.head)
    }

    pub fn tail(&self) -> GoalList {
        self.0.as_ref().map(|c| c.tail.clone()).unwrap_or_default()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    pub fn len(&self) -> usize {
        self.0.as_ref().map_or(0, |c| c.len)
    }

    /// Same first cell, hence the same list.
    pub fn ptr_eq(&self, other: &GoalList) -> bool {
        match (&self.0, &other.0) {
            (Some(a), Some(b)) => Rc::ptr_eq(a, b),
            (None, None) => true,
            _ => false,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Subgoal> {
        let mut cur = self.0.as_deref();
        std::iter::from_fn(move || {
            let cell = cur?;
            cur = cell.tail.0.as_deref();
            Some(&cell.head)
        })
    }
}

impl Drop for GoalList {
    fn drop(&mut self) {
        // Unlink iteratively so long goal lists don't recurse in drop.
        let mut cur = self.0.take();
        while let Some(rc) = cur {
            match Rc::try_unwrap(rc) {
                Ok(mut cell) => cur = cell.tail.0.take(),
                Err(_) => break,
            }
        }
    }
}
