//! Benchmark program families.

use crate::program::Program;
use crate::term::{MetaId, Term};

fn v(i: u32) -> Term {
    Term::meta(MetaId::goal(i))
}

fn c(name: &str) -> Term {
    Term::constant(name)
}

fn app(f: &str, args: Vec<Term>) -> Term {
    Term::app(f, args)
}

fn binders(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Failing tower of `n` diamonds. Nothing concludes `B(_, 0)`, so
/// `T(unit, n)` has no proof, and every level offers two routes down.
pub fn gen_diamond(n: u64) -> Program {
    assert!(n >= 1, "diamond height must be positive");
    let mut p = Program::new();
    for class in ["B", "L", "R", "T"] {
        p.add_class(class, 2).unwrap();
    }
    let an = binders(&["A", "N"]);
    let edge = |from: &str, to: &str| (vec![app(from, vec![v(0), v(1)])], app(to, vec![v(0), v(1)]));
    for (name, (hyps, concl)) in [
        ("BtL", edge("B", "L")),
        ("BtR", edge("B", "R")),
        ("LtT", edge("L", "T")),
        ("RtT", edge("R", "T")),
    ] {
        p.add_instance(name, an.clone(), hyps, concl).unwrap();
    }
    p.add_instance(
        "TtB",
        an,
        vec![app("T", vec![v(0), v(1)])],
        app("B", vec![v(0), app("s", vec![v(1)])]),
    )
    .unwrap();
    p.add_query(app("T", vec![c("unit"), Term::nat(n)]), vec![]).unwrap();
    p
}

/// Ground list `[elem; len]` as `cons`/`nil`.
pub fn list_of(elem: &str, len: u64) -> Term {
    let e = c(elem);
    let mut t = c("nil");
    for _ in 0..len {
        t = app("cons", vec![e.clone(), t]);
    }
    t
}

/// Concatenation of two ground lists of length `n` into an unknown.
pub fn gen_append(n: u64) -> Program {
    assert!(n >= 1, "list length must be positive");
    let mut p = Program::new();
    p.add_class("Append", 3).unwrap();
    p.add_instance("AppNil", binders(&["Y"]), vec![], app("Append", vec![c("nil"), v(0), v(0)]))
        .unwrap();
    // {X, Xs, Y, Zs} = 0, 1, 2, 3
    p.add_instance(
        "AppCons",
        binders(&["X", "Xs", "Y", "Zs"]),
        vec![app("Append", vec![v(1), v(2), v(3)])],
        app(
            "Append",
            vec![app("cons", vec![v(0), v(1)]), v(2), app("cons", vec![v(0), v(3)])],
        ),
    )
    .unwrap();
    p.add_query(
        app("Append", vec![list_of("a", n), list_of("b", n), v(0)]),
        vec!["Z".to_string()],
    )
    .unwrap();
    p
}

fn coe(x: Term, y: Term) -> Term {
    app("Coe", vec![x, y])
}

fn transitivity(p: &mut Program) {
    p.add_instance(
        "Trans",
        binders(&["X", "Y", "Z"]),
        vec![coe(v(0), v(1)), coe(v(1), v(2))],
        coe(v(0), v(2)),
    )
    .unwrap();
}

/// The cycle corpus:
///
/// * `coe-chain`: one coercion plus transitivity, unprovable query;
/// * `coe-two-way`: coercions both ways plus transitivity, one failing and
///   one succeeding query;
/// * `module-algebra`: scalar restriction for modules together with "every
///   commutative ring is an algebra over itself".
pub fn gen_cycle() -> Vec<(String, Program)> {
    let mut chain = Program::new();
    chain.add_class("Coe", 2).unwrap();
    chain.add_instance("AB", vec![], vec![], coe(c("a"), c("b"))).unwrap();
    transitivity(&mut chain);
    chain.add_query(coe(c("a"), c("c")), vec![]).unwrap();

    let mut two_way = Program::new();
    two_way.add_class("Coe", 2).unwrap();
    two_way.add_instance("AB", vec![], vec![], coe(c("a"), c("b"))).unwrap();
    two_way.add_instance("BA", vec![], vec![], coe(c("b"), c("a"))).unwrap();
    transitivity(&mut two_way);
    two_way.add_query(coe(c("a"), c("c")), vec![]).unwrap();
    two_way.add_query(coe(c("a"), c("b")), vec![]).unwrap();

    let mut module = Program::new();
    module.add_class("CommRing", 1).unwrap();
    module.add_class("Algebra", 2).unwrap();
    module.add_class("Module", 2).unwrap();
    module.add_instance("IntCommRing", vec![], vec![], app("CommRing", vec![c("int")])).unwrap();
    module
        .add_instance(
            "AlgebraSelf",
            binders(&["K"]),
            vec![app("CommRing", vec![v(0)])],
            app("Algebra", vec![v(0), v(0)]),
        )
        .unwrap();
    module
        .add_instance("IntRatAlgebra", vec![], vec![], app("Algebra", vec![c("int"), c("rat")]))
        .unwrap();
    module.add_instance("RatModule", vec![], vec![], app("Module", vec![c("rat"), c("vec")])).unwrap();
    // {K, A, M} = 0, 1, 2
    module
        .add_instance(
            "ModuleRestrict",
            binders(&["K", "A", "M"]),
            vec![app("Algebra", vec![v(0), v(1)]), app("Module", vec![v(1), v(2)])],
            app("Module", vec![v(0), v(2)]),
        )
        .unwrap();
    module.add_query(app("Module", vec![c("int"), c("vec")]), vec![]).unwrap();
    module.add_query(app("Module", vec![c("int"), c("mat")]), vec![]).unwrap();

    vec![
        ("coe-chain".to_string(), chain),
        ("coe-two-way".to_string(), two_way),
        ("module-algebra".to_string(), module),
    ]
}
