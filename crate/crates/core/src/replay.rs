//! Proof checking by replay.
//!
//! A proof term is a tree of instance names. Replaying it re-derives the
//! most general conclusion the tree proves, unifying each instance's
//! hypotheses with the conclusions of its subproofs; the goal must then be
//! an instance of that conclusion.

use thiserror::Error;

use crate::engine::Answer;
use crate::program::Program;
use crate::sld::instance_terms;
use crate::term::{rename_fresh, MetaAllocator, Term, TermKind};
use crate::unify::{unify, Env, UnifyError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("unknown instance {0}")]
    UnknownInstance(String),
    #[error("{instance} takes {expected} subproofs, got {found}")]
    Arity { instance: String, expected: usize, found: usize },
    #[error("proof is incomplete: {0}")]
    Incomplete(String),
    #[error("hypothesis of {instance} does not match its subproof: {source}")]
    Hypothesis { instance: String, source: UnifyError },
    #[error("proved {proved}, which does not cover goal {goal}")]
    Goal { proved: String, goal: String },
}

/// Most general conclusion derivable from `proof`.
pub fn derive(program: &Program, proof: &Term) -> Result<Term, ReplayError> {
    let mut alloc = MetaAllocator::new();
    let (concl, env) = derive_in(program, proof, &mut alloc, Env::new())?;
    Ok(env.resolve(&concl))
}

fn derive_in(
    program: &Program,
    proof: &Term,
    alloc: &mut MetaAllocator,
    env: Env,
) -> Result<(Term, Env), ReplayError> {
    let TermKind::App(name, subproofs) = proof.kind() else {
        return Err(ReplayError::Incomplete(proof.to_string()));
    };
    let inst = program
        .instance(name)
        .ok_or_else(|| ReplayError::UnknownInstance(name.to_string()))?;
    if inst.hypotheses.len() != subproofs.len() {
        return Err(ReplayError::Arity {
            instance: name.to_string(),
            expected: inst.hypotheses.len(),
            found: subproofs.len(),
        });
    }
    let mut renamed = rename_fresh(&instance_terms(inst), alloc);
    let conclusion = renamed.remove(0);
    let mut env = env;
    for (hyp, sub) in renamed.iter().zip(subproofs.iter()) {
        let (derived, next) = derive_in(program, sub, alloc, env)?;
        env = unify(&next, hyp, &derived).map_err(|source| ReplayError::Hypothesis {
            instance: name.to_string(),
            source,
        })?;
    }
    Ok((conclusion, env))
}

/// Checks that `proof` establishes `goal`. `goal` must be free of
/// metavariables (normalization parameters count as constants).
pub fn replay(program: &Program, goal: &Term, proof: &Term) -> Result<(), ReplayError> {
    if !goal.is_ground() || !proof.is_ground() {
        return Err(ReplayError::Incomplete(format!("{goal} ⊢ {proof}")));
    }
    let proved = derive(program, proof)?;
    match unify(&Env::new(), &proved, goal) {
        Ok(_) => Ok(()),
        Err(_) => Err(ReplayError::Goal { proved: proved.to_string(), goal: goal.to_string() }),
    }
}

pub fn replay_answer(program: &Program, answer: &Answer) -> Result<(), ReplayError> {
    replay(program, answer.goal.term(), &answer.proof)
}

#[cfg(test)]
mod tests {
    use super::*;

    const RAD: &str = "class R/2.
instance I1 : R(a, b).
instance I2 : R(a, c).
instance I3 : R(c, d).
instance I4 {X, Y, Z} : R(X, Y) -> R(Y, Z) -> R(X, Z).
";

    fn pf(name: &str, args: Vec<Term>) -> Term {
        Term::app(name, args)
    }

    fn i4(l: &str, r: &str) -> Term {
        pf("I4", vec![Term::constant(l), Term::constant(r)])
    }

    #[test]
    fn accepts_worked_example_proof() {
        let p = Program::parse(RAD).unwrap();
        let goal = Term::app("R", vec![Term::constant("a"), Term::constant("d")]);
        replay(&p, &goal, &i4("I2", "I3")).unwrap();
        assert_eq!(derive(&p, &i4("I2", "I3")).unwrap(), goal);
    }

    #[test]
    fn rejects_wrong_goal() {
        let p = Program::parse(RAD).unwrap();
        let goal = Term::app("R", vec![Term::constant("a"), Term::constant("b")]);
        assert!(matches!(replay(&p, &goal, &i4("I2", "I3")), Err(ReplayError::Goal { .. })));
    }

    #[test]
    fn rejects_mismatched_chain() {
        let p = Program::parse(RAD).unwrap();
        let goal = Term::app("R", vec![Term::constant("a"), Term::constant("d")]);
        assert!(matches!(replay(&p, &goal, &i4("I1", "I3")), Err(ReplayError::Hypothesis { .. })));
    }

    #[test]
    fn rejects_bad_arity_and_unknown_names() {
        let p = Program::parse(RAD).unwrap();
        let goal = Term::app("R", vec![Term::constant("a"), Term::constant("d")]);
        assert!(matches!(replay(&p, &goal, &pf("I4", vec![Term::constant("I2")])), Err(ReplayError::Arity { .. })));
        assert!(matches!(replay(&p, &goal, &Term::constant("I9")), Err(ReplayError::UnknownInstance(_))));
    }

    #[test]
    fn parameters_behave_as_constants() {
        let p = Program::parse("class P/2.\ninstance Refl {X} : P(X, X).").unwrap();
        let same = Term::app("P", vec![Term::param(0), Term::param(0)]);
        let diff = Term::app("P", vec![Term::param(0), Term::param(1)]);
        replay(&p, &same, &Term::constant("Refl")).unwrap();
        assert!(replay(&p, &diff, &Term::constant("Refl")).is_err());
    }
}
