#![allow(dead_code)]

pub mod props;

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::Rng;
use tabres::{Answer, MetaId, Outcome, Program, Term};

pub const RAD: &str = "class R/2.
instance I1 : R(a, b).
instance I2 : R(a, c).
instance I3 : R(c, d).
instance I4 {X, Y, Z} : R(X, Y) -> R(Y, Z) -> R(X, Z).
query R(a, d).
";

pub fn rad_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join("rad.tc")
}

pub fn answer_goals(out: &Outcome) -> BTreeSet<String> {
    out.answers.iter().map(|a| a.goal.to_string()).collect()
}

/// Shape limits for [`random_program`].
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_classes: usize,
    pub max_instances: usize,
    pub max_depth: u32,
    pub max_arity: usize,
    pub max_hypotheses: usize,
    pub vars: u32,
}

impl Default for Shape {
    fn default() -> Self {
        Shape { max_classes: 5, max_instances: 8, max_depth: 3, max_arity: 2, max_hypotheses: 2, vars: 3 }
    }
}

/// Argument term of depth at most `depth` (a leaf has depth 1) over the
/// constants a, b, c, the functors f/1 and g/2, and `vars` variables made
/// by `var`.
pub fn random_arg<R: Rng>(rng: &mut R, depth: u32, vars: u32, var: &dyn Fn(u32) -> Term) -> Term {
    let leaf = depth <= 1 || rng.gen_bool(0.55);
    if leaf {
        if vars > 0 && rng.gen_bool(0.5) {
            var(rng.gen_range(0..vars))
        } else {
            Term::constant(["a", "b", "c"][rng.gen_range(0..3)])
        }
    } else if rng.gen_bool(0.5) {
        Term::app("f", vec![random_arg(rng, depth - 1, vars, var)])
    } else {
        Term::app(
            "g",
            vec![random_arg(rng, depth - 1, vars, var), random_arg(rng, depth - 1, vars, var)],
        )
    }
}

fn random_goal<R: Rng>(
    rng: &mut R,
    classes: &[(String, usize)],
    shape: &Shape,
    vars: u32,
    var: &dyn Fn(u32) -> Term,
) -> Term {
    let (name, arity) = &classes[rng.gen_range(0..classes.len())];
    let args = (0..*arity).map(|_| random_arg(rng, shape.max_depth, vars, var)).collect();
    Term::app(name.as_str(), args)
}

/// A random well-formed program with one query.
pub fn random_program<R: Rng>(rng: &mut R, shape: &Shape) -> Program {
    let mut p = Program::new();
    let nclasses = rng.gen_range(1..=shape.max_classes);
    let classes: Vec<(String, usize)> =
        (0..nclasses).map(|i| (format!("P{i}"), rng.gen_range(0..=shape.max_arity))).collect();
    for (name, arity) in &classes {
        p.add_class(name.as_str(), *arity).unwrap();
    }
    let binder = |i: u32| Term::meta(MetaId::goal(i));
    let ninstances = rng.gen_range(1..=shape.max_instances);
    for i in 0..ninstances {
        let nhyp = rng.gen_range(0..=shape.max_hypotheses);
        let hypotheses: Vec<Term> =
            (0..nhyp).map(|_| random_goal(rng, &classes, shape, shape.vars, &binder)).collect();
        let conclusion = random_goal(rng, &classes, shape, shape.vars, &binder);
        let binders = (0..shape.vars).map(|v| format!("X{v}")).collect();
        p.add_instance(format!("I{i}").as_str(), binders, hypotheses, conclusion).unwrap();
    }
    let query = random_goal(rng, &classes, shape, 2, &binder);
    p.add_query(query, vec!["Q0".into(), "Q1".into()]).unwrap();
    p
}

/// Budget under which SLD must finish for a program to count in the
/// oracle comparison.
pub const ORACLE_SLD_STEPS: u64 = 100_000;

pub enum OracleCase {
    /// SLD did not finish within budget; the program is not comparable.
    Skipped,
    /// `answers` distinct goals; `emitted` is every answer of both engines.
    Agreed { answers: usize, emitted: Vec<Answer> },
    Disagreed(String),
}

/// Run both engines in all-answers mode and compare answer-goal sets.
/// Every emitted answer is also replayed, and SLD must not repeat one.
pub fn oracle_case(p: &Program) -> OracleCase {
    use tabres::replay::replay_answer;
    use tabres::{engine::Engine, Mode, RunLimits, SolveOptions, Verdict};

    let q = &p.queries()[0];
    let sld_opts = SolveOptions {
        mode: Mode::All,
        limits: RunLimits { max_steps: ORACLE_SLD_STEPS, ..RunLimits::default() },
        ..SolveOptions::default()
    };
    // Runs that hit the cap can carry quadratically many proof nodes;
    // probing first keeps skipped programs cheap.
    if !tabres::sld::probe(p, &q.goal, &sld_opts).finishes() {
        return OracleCase::Skipped;
    }
    let sld = Engine::Sld.solve(p, q, &sld_opts);
    if sld.verdict.is_limit() {
        return OracleCase::Disagreed(format!("probe finished but SLD hit {}\n{p}", sld.verdict));
    }
    let tabled = Engine::Tabled.solve(p, q, &SolveOptions { mode: Mode::All, ..SolveOptions::default() });
    if tabled.verdict.is_limit() {
        return OracleCase::Disagreed(format!("tabled hit {} where SLD finished\n{p}", tabled.verdict));
    }
    let distinct: std::collections::HashSet<_> = sld.answers.iter().collect();
    if distinct.len() != sld.answers.len() {
        return OracleCase::Disagreed(format!("SLD repeated an answer\n{p}"));
    }
    for a in sld.answers.iter().chain(&tabled.answers) {
        if let Err(e) = replay_answer(p, a) {
            return OracleCase::Disagreed(format!("answer {a} does not replay: {e}\n{p}"));
        }
    }
    let (s, t) = (answer_goals(&sld), answer_goals(&tabled));
    if s != t {
        return OracleCase::Disagreed(format!("sld {s:?} vs tabled {t:?}\n{p}"));
    }
    let expected = if s.is_empty() { Verdict::Exhausted } else { Verdict::Success };
    if sld.verdict != expected || tabled.verdict != expected {
        return OracleCase::Disagreed(format!("verdicts {} / {}\n{p}", sld.verdict, tabled.verdict));
    }
    let emitted = sld.answers.into_iter().chain(tabled.answers).collect();
    OracleCase::Agreed { answers: s.len(), emitted }
}
