mod common;

use common::{random_arg, random_program, Shape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tabres::term::rename_fresh;
use tabres::{unify, Env, MetaAllocator, MetaId, Program, Term};

fn unifiable_by_scan(p: &Program, goal: &Term, env: &Env) -> Vec<usize> {
    p.instances()
        .iter()
        .filter(|inst| {
            let mut alloc = MetaAllocator::starting_at(10_000);
            let c = rename_fresh(std::slice::from_ref(&inst.conclusion), &mut alloc).remove(0);
            unify(env, goal, &c).is_ok()
        })
        .map(|inst| inst.seq)
        .collect()
}

#[test]
fn index_never_drops_a_unifiable_instance() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1de7);
    let shape = Shape::default();
    let mut nonempty = 0;
    for case in 0..500 {
        let p = random_program(&mut rng, &shape);
        let class = &p.classes()[rng.gen_range(0..p.classes().len())];
        // Goal variables live above every binder id; some get bound.
        let var = |i: u32| Term::meta(MetaId::goal(100 + i));
        let args = (0..class.arity).map(|_| random_arg(&mut rng, 3, 3, &var)).collect();
        let goal = Term::app(class.name.clone(), args);
        let mut env = Env::new();
        for i in 0..3 {
            if rng.gen_bool(0.3) {
                let t = random_arg(&mut rng, 2, 0, &var);
                env = env.bind(MetaId::goal(100 + i), t);
            }
        }
        let got: Vec<usize> = p.candidates(&goal, &env).iter().map(|i| i.seq).collect();
        let want = unifiable_by_scan(&p, &goal, &env);
        for w in &want {
            assert!(got.contains(w), "case {case}: index dropped I{w} for {goal}\n{p}");
        }
        assert!(got.windows(2).all(|w| w[0] < w[1]), "case {case}: not in declaration order: {got:?}");
        nonempty += usize::from(!want.is_empty());
    }
    assert!(nonempty > 100, "only {nonempty} cases had a unifiable instance");
}

#[test]
fn printed_programs_reparse_to_themselves() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..300 {
        let p = random_program(&mut rng, &Shape::default());
        let text = p.to_string();
        let back = Program::parse(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
        assert_eq!(back.to_string(), text);
        // Query variables are renumbered by first occurrence; the rest is structural.
        assert_eq!(back.classes(), p.classes());
        assert_eq!(back.instances(), p.instances());
        let reparsed = Program::parse(&back.to_string()).unwrap();
        assert_eq!(reparsed, back);
    }
}

#[test]
fn worked_example_parses_to_four_instances_and_one_query() {
    let p = Program::parse(&std::fs::read_to_string(common::rad_path()).unwrap()).unwrap();
    assert_eq!(p.instances().len(), 4);
    assert_eq!(p.queries().len(), 1);
    assert_eq!(Program::parse(common::RAD).unwrap(), p);
    let names: Vec<&str> = p.instances().iter().map(|i| i.name.as_str()).collect();
    assert_eq!(names, ["I1", "I2", "I3", "I4"]);
}

#[test]
fn empty_input_is_an_empty_program() {
    let p = Program::parse("  # nothing here\n").unwrap();
    assert!(p.classes().is_empty() && p.instances().is_empty() && p.queries().is_empty());
}

#[test]
fn parse_errors_carry_positions() {
    let e = Program::parse("instance Bad : Q(a).").unwrap_err();
    assert!(e.to_string().contains("undeclared class"), "{e}");
    assert_eq!((e.line, e.column), (1, 16));

    let e = Program::parse("class R/2.\nquery R(a).").unwrap_err();
    assert_eq!(e.line, 2);
    assert!(e.to_string().contains("arity"), "{e}");

    let e = Program::parse("class R/1.\nquery R(X).").unwrap_err();
    assert!(e.to_string().contains("?X"), "{e}");

    let e = Program::parse("class R/1.\nquery R(θ).").unwrap_err();
    assert!(e.to_string().contains("reserved"), "{e}");
}

#[test]
fn numerals_desugar_to_successors() {
    let p = Program::parse("class N/1.\nquery N(2).").unwrap();
    let two = Term::app("s", vec![Term::app("s", vec![Term::constant("z")])]);
    assert_eq!(p.queries()[0].goal.args()[0], two);
    assert_eq!(two.as_nat(), Some(2));
}
