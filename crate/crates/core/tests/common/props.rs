//! Property suites over terms, normalization and unification. Each suite is
//! a function so the acceptance run and the property tests share it.

use std::collections::HashMap;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use tabres::term::{alpha_normalize_all, rename_fresh, Normalizer, TermKind};
use tabres::{alpha_normalize, unify, Env, MetaAllocator, MetaId, Term};

pub type Suite = fn(u32) -> Result<(), String>;

pub const SUITES: &[(&str, Suite)] = &[
    ("normalize_idempotent", normalize_idempotent),
    ("alpha_equivalence_iff_equal_normal_forms", alpha_iff_normal_form),
    ("normal_form_matches_first_occurrence_oracle", normal_form_oracle),
    ("ground_bit_matches_traversal", ground_bit),
    ("ground_subterms_visited_once", ground_short_circuit),
    ("unify_sound", unify_sound),
    ("unify_symmetric", unify_symmetric),
    ("unify_most_general", unify_most_general),
    ("env_persistent", env_persistent),
    ("resolve_is_substitution_fixpoint", resolve_fixpoint),
    ("rename_fresh_is_joint_renaming", rename_joint),
];

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn var(i: u32) -> Term {
    Term::meta(MetaId::goal(i))
}

/// Terms of depth ≤ `depth` over a, b, f/1, g/2, h/3 and `nvars` variables.
pub fn arb_term(depth: u32, nvars: u32) -> BoxedStrategy<Term> {
    let leaf = prop_oneof![
        (0..nvars).prop_map(var),
        prop::sample::select(vec!["a", "b"]).prop_map(Term::constant),
    ];
    leaf.prop_recursive(depth, 40, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Term::app("f", vec![t])),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Term::app("g", vec![x, y])),
            (inner.clone(), inner.clone(), inner).prop_map(|(x, y, z)| Term::app("h", vec![x, y, z])),
        ]
    })
    .boxed()
}

/// Environments built by unifying random pairs, skipping failures.
fn arb_env(nvars: u32) -> impl Strategy<Value = Env> {
    prop::collection::vec((arb_term(3, nvars), arb_term(3, nvars)), 0..4).prop_map(|pairs| {
        pairs.iter().fold(Env::new(), |env, (s, t)| unify(&env, s, t).unwrap_or(env))
    })
}

// ---- independent oracles -------------------------------------------------

fn metas_full(t: &Term, out: &mut Vec<MetaId>) {
    match t.kind() {
        TermKind::Meta(m) => out.push(*m),
        TermKind::App(_, args) => args.iter().for_each(|a| metas_full(a, out)),
        TermKind::Param(_) => {}
    }
}

fn distinct_metas(t: &Term) -> Vec<MetaId> {
    let mut all = Vec::new();
    metas_full(t, &mut all);
    let mut seen = Vec::new();
    for m in all {
        if !seen.contains(&m) {
            seen.push(m);
        }
    }
    seen
}

fn subst(t: &Term, map: &HashMap<MetaId, Term>) -> Term {
    match t.kind() {
        TermKind::Meta(m) => map.get(m).cloned().unwrap_or_else(|| t.clone()),
        TermKind::App(f, args) => Term::app(f.clone(), args.iter().map(|a| subst(a, map)).collect()),
        TermKind::Param(_) => t.clone(),
    }
}

/// Apply `env` one binding layer at a time until nothing changes.
fn fixpoint(env: &Env, t: &Term) -> Term {
    let mut cur = t.clone();
    loop {
        let mut map = HashMap::new();
        for m in distinct_metas(&cur) {
            if let Some(b) = env.lookup(m) {
                map.insert(m, b);
            }
        }
        if map.is_empty() {
            return cur;
        }
        cur = subst(&cur, &map);
    }
}

fn permutations(items: &[MetaId]) -> Vec<Vec<MetaId>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Brute force: is there a bijection between the variables of `s` and `t`
/// carrying `s` onto `t`?
fn alpha_equivalent(s: &Term, t: &Term) -> bool {
    let vs = distinct_metas(s);
    let vt = distinct_metas(t);
    if vs.len() != vt.len() {
        return false;
    }
    permutations(&vt).into_iter().any(|perm| {
        let map: HashMap<MetaId, Term> =
            vs.iter().zip(perm).map(|(a, b)| (*a, Term::meta(b))).collect();
        subst(s, &map) == *t
    })
}

/// Visits expected from a normalizer that stops at ground subterms.
fn expected_visits(t: &Term, env: &Env) -> u64 {
    if distinct_metas(t).is_empty() {
        return 1;
    }
    match t.kind() {
        TermKind::Meta(m) => 1 + env.lookup(*m).map_or(0, |b| expected_visits(&b, env)),
        TermKind::App(_, args) => 1 + args.iter().map(|a| expected_visits(a, env)).sum::<u64>(),
        TermKind::Param(_) => 1,
    }
}

/// Normal form by hand: fully substitute, then number variables left to right.
fn expected_normal_form(t: &Term, env: &Env) -> Term {
    let full = fixpoint(env, t);
    let map: HashMap<MetaId, Term> = distinct_metas(&full)
        .into_iter()
        .enumerate()
        .map(|(i, m)| (m, Term::param(i as u32)))
        .collect();
    subst(&full, &map)
}

/// One-way matching: extend `map` so that `pattern` under it equals `target`.
fn matches(pattern: &Term, target: &Term, map: &mut HashMap<MetaId, Term>) -> bool {
    match pattern.kind() {
        TermKind::Meta(m) => match map.get(m) {
            Some(bound) => bound == target,
            None => {
                map.insert(*m, target.clone());
                true
            }
        },
        TermKind::App(f, xs) => match target.kind() {
            TermKind::App(g, ys) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| matches(x, y, map))
            }
            _ => false,
        },
        TermKind::Param(_) => pattern == target,
    }
}

fn ground_pool() -> Vec<Term> {
    let a = Term::constant("a");
    let b = Term::constant("b");
    vec![
        a.clone(),
        b.clone(),
        Term::app("f", vec![a.clone()]),
        Term::app("f", vec![b.clone()]),
        Term::app("f", vec![Term::app("f", vec![a.clone()])]),
        Term::app("g", vec![a.clone(), a.clone()]),
        Term::app("g", vec![a.clone(), b.clone()]),
        Term::app("g", vec![b.clone(), a.clone()]),
        Term::app("g", vec![b.clone(), b]),
        Term::app("g", vec![Term::app("f", vec![a.clone()]), a]),
    ]
}

// ---- suites ---------------------------------------------------------------

fn check<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

pub fn normalize_idempotent(cases: u32) -> Result<(), String> {
    check(cases, (arb_term(4, 5), arb_env(5)), |(t, env)| {
        let once = alpha_normalize(&t, &env);
        let twice = alpha_normalize(once.term(), &Env::new());
        prop_assert_eq!(&once, &twice);
        prop_assert!(once.term().metas().is_empty());
        Ok(())
    })
}

pub fn alpha_iff_normal_form(cases: u32) -> Result<(), String> {
    // Half the pairs are renamings of each other, so both directions get exercised.
    let renamed = (arb_term(4, 4), Just([0u32, 1, 2, 3]).prop_shuffle()).prop_map(|(s, perm)| {
        let map: HashMap<MetaId, Term> =
            (0..4).map(|i| (MetaId::goal(i), var(perm[i as usize] + 10))).collect();
        let t = subst(&s, &map);
        (s, t)
    });
    let pair = prop_oneof![renamed, (arb_term(4, 4), arb_term(4, 4))];
    check(cases, pair, |(s, t)| {
        let empty = Env::new();
        let same_nf = alpha_normalize(&s, &empty) == alpha_normalize(&t, &empty);
        prop_assert_eq!(same_nf, alpha_equivalent(&s, &t));
        Ok(())
    })
}

pub fn normal_form_oracle(cases: u32) -> Result<(), String> {
    check(cases, (arb_term(4, 5), arb_env(5)), |(t, env)| {
        let nf = alpha_normalize(&t, &env);
        prop_assert_eq!(nf.term(), &expected_normal_form(&t, &env));
        Ok(())
    })
}

pub fn ground_bit(cases: u32) -> Result<(), String> {
    check(cases, arb_term(4, 3), |t| {
        prop_assert_eq!(t.is_ground(), distinct_metas(&t).is_empty());
        for a in t.args() {
            prop_assert!(!t.is_ground() || a.is_ground());
        }
        Ok(())
    })
}

pub fn ground_short_circuit(cases: u32) -> Result<(), String> {
    check(cases, (arb_term(4, 3), arb_env(3)), |(t, env)| {
        let mut n = Normalizer::new(&env);
        n.normalize(&t);
        prop_assert_eq!(n.visits(), expected_visits(&t, &env));
        let ground = fixpoint(&env, &t);
        if ground.is_ground() {
            let empty = Env::new();
            let mut n = Normalizer::new(&empty);
            let out = n.normalize(&ground);
            prop_assert_eq!(n.visits(), 1);
            prop_assert!(out.ptr_eq(&ground));
        }
        Ok(())
    })
}

pub fn unify_sound(cases: u32) -> Result<(), String> {
    check(cases, (arb_pair(4), arb_env(3)), |((s, t), env)| {
        if let Ok(e) = unify(&env, &s, &t) {
            prop_assert_eq!(e.resolve(&s), e.resolve(&t));
            prop_assert_eq!(e.resolve(&s), fixpoint(&e, &s));
        }
        Ok(())
    })
}

pub fn unify_symmetric(cases: u32) -> Result<(), String> {
    check(cases, arb_pair(4), |(s, t)| {
        let empty = Env::new();
        let st = unify(&empty, &s, &t);
        let ts = unify(&empty, &t, &s);
        prop_assert_eq!(st.is_ok(), ts.is_ok());
        if let (Ok(e1), Ok(e2)) = (st, ts) {
            let c1 = e1.resolve(&s);
            let c2 = e2.resolve(&s);
            prop_assert!(alpha_equivalent(&c1, &c2), "{} vs {}", c1, c2);
        }
        Ok(())
    })
}

/// Replace variables of `t` by pool terms or variables, and random subterms
/// by variables, so the result often unifies with `t`.
fn perturb(t: &Term, pool: &[Term], rng: &mut TestRng) -> Term {
    let roll = rng.next_u32() % 8;
    if roll == 0 {
        return var(rng.next_u32() % 3);
    }
    match t.kind() {
        TermKind::Meta(_) if roll < 4 => pool[(rng.next_u32() as usize) % pool.len()].clone(),
        TermKind::App(f, args) => {
            Term::app(f.clone(), args.iter().map(|a| perturb(a, pool, rng)).collect())
        }
        _ => t.clone(),
    }
}

/// Term pairs over three variables, half of them near-unifiable.
fn arb_pair(depth: u32) -> impl Strategy<Value = (Term, Term)> {
    let pool = ground_pool();
    let near = arb_term(depth, 3).prop_perturb(move |s, mut rng| {
        let t = perturb(&s, &pool, &mut rng);
        (s, t)
    });
    prop_oneof![near, (arb_term(depth, 3), arb_term(depth, 3))]
}

pub fn unify_most_general(cases: u32) -> Result<(), String> {
    let pool = ground_pool();
    check(cases, arb_pair(3), move |(s, t)| {
        let vars: Vec<MetaId> = (0..3).map(MetaId::goal).collect();
        let mgu = unify(&Env::new(), &s, &t);
        let mut found = 0;
        for i in 0..pool.len().pow(3) {
            let sigma: HashMap<MetaId, Term> = vars
                .iter()
                .enumerate()
                .map(|(k, m)| (*m, pool[(i / pool.len().pow(k as u32)) % pool.len()].clone()))
                .collect();
            if subst(&s, &sigma) != subst(&t, &sigma) {
                continue;
            }
            found += 1;
            let e = match &mgu {
                Ok(e) => e,
                Err(err) => return Err(TestCaseError::fail(format!("unifier {sigma:?} exists but {err}"))),
            };
            // σ must factor through the mgu: σ(X) = τ(mgu(X)) for one τ.
            let mut tau = HashMap::new();
            for m in &vars {
                let image = e.resolve(&Term::meta(*m));
                prop_assert!(matches(&image, &sigma[m], &mut tau), "σ does not factor at {m:?}");
            }
            if found > 20 {
                break;
            }
        }
        Ok(())
    })
}

pub fn env_persistent(cases: u32) -> Result<(), String> {
    let ops = prop::collection::vec((any::<prop::sample::Index>(), arb_term(3, 6), arb_term(3, 6)), 1..24);
    let order = prop::collection::vec(any::<prop::sample::Index>(), 8..40);
    check(cases, (ops, order), |(ops, order)| {
        let probes: Vec<Term> = (0..6).map(var).collect();
        let snapshot = |e: &Env| -> (usize, Vec<Term>) { (e.len(), probes.iter().map(|p| e.resolve(p)).collect()) };
        let mut envs = vec![Env::new()];
        let mut recorded = vec![snapshot(&envs[0])];
        for (parent, s, t) in &ops {
            let base = envs[parent.index(envs.len())].clone();
            let before = snapshot(&base);
            match unify(&base, s, t) {
                Ok(e) => {
                    recorded.push(snapshot(&e));
                    envs.push(e);
                }
                Err(_) => prop_assert_eq!(snapshot(&base), before),
            }
        }
        // Revisit old snapshots in scrambled order.
        for ix in &order {
            let k = ix.index(envs.len());
            prop_assert_eq!(&snapshot(&envs[k]), &recorded[k]);
        }
        for (e, r) in envs.iter().zip(&recorded) {
            prop_assert_eq!(&snapshot(e), r);
        }
        Ok(())
    })
}

pub fn resolve_fixpoint(cases: u32) -> Result<(), String> {
    check(cases, (arb_term(4, 5), arb_env(5)), |(t, env)| {
        prop_assert_eq!(env.resolve(&t), fixpoint(&env, &t));
        Ok(())
    })
}

pub fn rename_joint(cases: u32) -> Result<(), String> {
    check(cases, prop::collection::vec(arb_term(3, 4), 1..4), |ts| {
        let mut alloc = MetaAllocator::starting_at(100);
        let renamed = rename_fresh(&ts, &mut alloc);
        let tuple = |xs: &[Term]| Term::app("tuple", xs.to_vec());
        prop_assert!(alpha_equivalent(&tuple(&ts), &tuple(&renamed)));
        for t in &renamed {
            prop_assert!(t.metas().iter().all(|m| m.id >= 100));
        }
        for (a, b) in ts.iter().zip(&renamed) {
            if a.is_ground() {
                prop_assert!(a.ptr_eq(b));
            }
        }
        let (joint, _) = alpha_normalize_all(&renamed, &Env::new());
        let (orig, _) = alpha_normalize_all(&ts, &Env::new());
        prop_assert_eq!(joint, orig);
        Ok(())
    })
}
