//! Class and instance declarations, queries, and the instance index.

mod index;
mod parser;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::term::{MetaId, MetaKind, Symbol, Term, TermKind};
use crate::unify::Env;

pub use index::DiscTree;
pub use parser::{parse_program, ParseError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassPredicate {
    pub name: Symbol,
    pub arity: usize,
}

/// A named Horn clause. Binder `i` is the metavariable with id `i` in
/// `hypotheses` and `conclusion`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub name: Symbol,
    pub binders: Vec<String>,
    pub hypotheses: Vec<Term>,
    pub conclusion: Term,
    pub seq: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub goal: Term,
    /// Query metavariable `i` is printed as `?{var_names[i]}`.
    pub var_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("class {0} declared twice")]
    DuplicateClass(String),
    #[error("instance {0} declared twice")]
    DuplicateInstance(String),
    #[error("undeclared class {0}")]
    UndeclaredClass(String),
    #[error("class {name} has arity {expected}, used with {found} arguments")]
    ArityMismatch { name: String, expected: usize, found: usize },
    #[error("goal must be a class application, found {0}")]
    NotAGoal(String),
    #[error("metavariable {0:?} has no binder")]
    UnboundVariable(MetaId),
}

#[derive(Debug, Clone, Default)]
pub struct Program {
    classes: Vec<ClassPredicate>,
    class_index: HashMap<Symbol, usize>,
    instances: Vec<Arc<Instance>>,
    by_name: HashMap<Symbol, usize>,
    index: DiscTree,
    queries: Vec<Query>,
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.classes == other.classes
            && self.instances == other.instances
            && self.queries == other.queries
    }
}

impl Program {
    pub fn new() -> Self {
        Program::default()
    }

    pub fn parse(text: &str) -> Result<Program, ParseError> {
        parse_program(text)
    }

    pub fn classes(&self) -> &[ClassPredicate] {
        &self.classes
    }

    pub fn class(&self, name: &Symbol) -> Option<&ClassPredicate> {
        self.class_index.get(name).map(|&i| &self.classes[i])
    }

    pub fn instances(&self) -> &[Arc<Instance>] {
        &self.instances
    }

    pub fn instance(&self, name: &Symbol) -> Option<&Arc<Instance>> {
        self.by_name.get(name).map(|&i| &self.instances[i])
    }

    pub fn queries(&self) -> &[Query] {
        &self.queries
    }

    pub fn index(&self) -> &DiscTree {
        &self.index
    }

    /// Instances whose conclusion may unify with `goal`, in declaration
    /// order. Never omits one that does.
    pub fn candidates(&self, goal: &Term, env: &Env) -> Vec<Arc<Instance>> {
        self.index
            .lookup(goal, env)
            .into_iter()
            .map(|i| self.instances[i].clone())
            .collect()
    }

    pub fn add_class(&mut self, name: impl Into<Symbol>, arity: usize) -> Result<(), ProgramError> {
        let name = name.into();
        if self.class_index.contains_key(&name) {
            return Err(ProgramError::DuplicateClass(name.to_string()));
        }
        self.class_index.insert(name.clone(), self.classes.len());
        self.classes.push(ClassPredicate { name, arity });
        Ok(())
    }

    /// Checks that `goal` is an application of a declared class at its
    /// declared arity.
    pub fn check_goal(&self, goal: &Term) -> Result<(), ProgramError> {
        let TermKind::App(f, args) = goal.kind() else {
            return Err(ProgramError::NotAGoal(goal.to_string()));
        };
        let class = self
            .class(f)
            .ok_or_else(|| ProgramError::UndeclaredClass(f.to_string()))?;
        if class.arity != args.len() {
            return Err(ProgramError::ArityMismatch {
                name: f.to_string(),
                expected: class.arity,
                found: args.len(),
            });
        }
        Ok(())
    }

    pub fn add_instance(
        &mut self,
        name: impl Into<Symbol>,
        binders: Vec<String>,
        hypotheses: Vec<Term>,
        conclusion: Term,
    ) -> Result<(), ProgramError> {
        let name = name.into();
        if self.by_name.contains_key(&name) {
            return Err(ProgramError::DuplicateInstance(name.to_string()));
        }
        for t in hypotheses.iter().chain(std::iter::once(&conclusion)) {
            self.check_goal(t)?;
            check_vars(t, binders.len())?;
        }
        let seq = self.instances.len();
        self.index.insert(&conclusion, seq);
        self.by_name.insert(name.clone(), seq);
        self.instances.push(Arc::new(Instance { name, binders, hypotheses, conclusion, seq }));
        Ok(())
    }

    pub fn add_query(&mut self, goal: Term, var_names: Vec<String>) -> Result<(), ProgramError> {
        self.check_goal(&goal)?;
        check_vars(&goal, var_names.len())?;
        self.queries.push(Query { goal, var_names });
        Ok(())
    }
}

fn check_vars(t: &Term, nbinders: usize) -> Result<(), ProgramError> {
    for m in t.metas() {
        if m.kind != MetaKind::TypeGoal || m.id as usize >= nbinders {
            return Err(ProgramError::UnboundVariable(m));
        }
    }
    Ok(())
}

fn names(names: &[String]) -> impl Fn(MetaId) -> Option<String> + '_ {
    move |m| names.get(m.id as usize).cloned()
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "instance {}", self.name)?;
        if !self.binders.is_empty() {
            write!(f, " {{{}}}", self.binders.join(", "))?;
        }
        f.write_str(" :")?;
        for h in &self.hypotheses {
            write!(f, " {} ->", h.display_with(names(&self.binders)))?;
        }
        write!(f, " {}.", self.conclusion.display_with(names(&self.binders)))
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars = &self.var_names;
        let namer = move |m: MetaId| vars.get(m.id as usize).map(|n| format!("?{n}"));
        write!(f, "query {}.", self.goal.display_with(namer))
    }
}

/// Canonical printed form; parsing it yields an equal program.
impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.classes {
            writeln!(f, "class {}/{}.", c.name, c.arity)?;
        }
        for i in &self.instances {
            writeln!(f, "{i}")?;
        }
        for q in &self.queries {
            writeln!(f, "{q}")?;
        }
        Ok(())
    }
}
