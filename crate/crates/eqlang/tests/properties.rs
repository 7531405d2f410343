//! Property suites over randomly generated well-typed terms: typing and
//! reduction invariants, support-system identities, printer round trips
//! and the monotonicity checker against an independent oracle.

use std::sync::OnceLock;

use proptest::prelude::*;

use eqlang::generate::TermGen;
use eqlang::{
    builtin_core, check_monotone, in_support, infer_type, omega, parse_program, parse_term,
    phi_step, print_term, trace_member, CoreMode, CoreType, EquationSystem, Flag, FlagSpec,
    Signature, Term, Type, TypeEnv,
};

const SQS_PROGRAM: &str = include_str!("../../../programs/sqs.eq");

struct Fixture {
    sig: Signature,
    system: EquationSystem,
    env: TypeEnv,
    names: Vec<(String, Type)>,
}

fn fixture() -> &'static Fixture {
    static FIXTURE: OnceLock<Fixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let (sig, system) = parse_program(SQS_PROGRAM).unwrap();
        let env = system.global_env();
        let mut names: Vec<(String, Type)> = system
            .defs()
            .iter()
            .map(|d| (d.name.clone(), d.declared_type.clone()))
            .collect();
        for op in eqlang::term::INT_OPS {
            names.push((op.to_string(), eqlang::term::int_op_type(op).unwrap()));
        }
        Fixture {
            sig,
            system,
            env,
            names,
        }
    })
}

fn random_term(seed: u64, depth: usize, ty: &str) -> Term {
    let f = fixture();
    let mut tg = TermGen::new(&f.sig, &f.env, &f.names, seed);
    tg.ground_typed_term(ty, depth)
}

fn random_ground(seed: u64, depth: usize, ty: &str) -> Term {
    let f = fixture();
    let mut tg = TermGen::new(&f.sig, &f.env, &f.names, seed);
    tg.ground_term(ty, depth)
}

fn ground_types() -> &'static [&'static str] {
    &["int", "bool", "list", "nat", "pair"]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn generated_terms_are_well_typed(seed in any::<u64>(), depth in 0usize..4, which in 0usize..5) {
        let f = fixture();
        let ty = ground_types()[which];
        let t = random_term(seed, depth, ty);
        prop_assert_eq!(infer_type(&t, &f.env, &f.sig).unwrap(), Type::ground(ty));
    }

    #[test]
    fn subject_reduction(seed in any::<u64>(), depth in 0usize..4, which in 0usize..5) {
        let f = fixture();
        let ty = ground_types()[which];
        let t = random_term(seed, depth, ty);
        for mode in [CoreMode::Eager, CoreMode::Lazy, CoreMode::Miranda] {
            let stepped = phi_step(&t, &f.system, &builtin_core(mode, &f.sig));
            prop_assert_eq!(infer_type(&stepped, &f.env, &f.sig).unwrap(), Type::ground(ty));
        }
    }

    #[test]
    fn ground_terms_are_fixed_points(seed in any::<u64>(), depth in 0usize..4, which in 0usize..5) {
        let f = fixture();
        let t = random_ground(seed, depth, ground_types()[which]);
        prop_assert!(t.is_ground());
        let core = builtin_core(CoreMode::Lazy, &f.sig);
        prop_assert_eq!(phi_step(&t, &f.system, &core), t);
    }

    #[test]
    fn homomorphism_law_on_constructor_roots(seed in any::<u64>(), depth in 1usize..4) {
        let f = fixture();
        let t = random_term(seed, depth, "list");
        if let Term::Ctor(name, args) = &t {
            let core = builtin_core(CoreMode::Lazy, &f.sig);
            let stepped = phi_step(&t, &f.system, &core);
            let expected = Term::ctor(
                name.clone(),
                args.iter().map(|a| phi_step(a, &f.system, &core)).collect(),
            );
            prop_assert_eq!(stepped, expected);
        }
    }

    #[test]
    fn support_sandwich(seed in any::<u64>(), depth in 0usize..4, which in 0usize..5) {
        let f = fixture();
        let t = random_term(seed, depth, ground_types()[which]);
        for mode in [CoreMode::Eager, CoreMode::Lazy, CoreMode::Miranda] {
            let core = builtin_core(mode, &f.sig);
            if t.is_ground() {
                prop_assert!(in_support(&t, &core));
            }
            if in_support(&t, &core) {
                prop_assert!(t.is_ctor_rooted());
            }
        }
    }

    #[test]
    fn support_respects_core_ordering(seed in any::<u64>(), depth in 0usize..4, which in 0usize..5) {
        // eager <= miranda <= lazy, pointwise on every flag function
        let f = fixture();
        let t = random_term(seed, depth, ground_types()[which]);
        let eager = in_support(&t, &builtin_core(CoreMode::Eager, &f.sig));
        let miranda = in_support(&t, &builtin_core(CoreMode::Miranda, &f.sig));
        let lazy = in_support(&t, &builtin_core(CoreMode::Lazy, &f.sig));
        prop_assert!(!eager || miranda);
        prop_assert!(!miranda || lazy);
    }

    #[test]
    fn support_computations_agree(seed in any::<u64>(), depth in 0usize..4, which in 0usize..5) {
        // membership through the bottoming homomorphism and the trace
        // coincides with the direct recursion
        let f = fixture();
        let t = random_term(seed, depth, ground_types()[which]);
        let bottomed = omega(&t, &f.env, &f.sig).unwrap();
        for mode in [CoreMode::Eager, CoreMode::Lazy, CoreMode::Miranda] {
            let core = builtin_core(mode, &f.sig);
            let via_trace = trace_member(&bottomed, &core) == Flag::Natural;
            prop_assert_eq!(via_trace, in_support(&t, &core));
        }
    }

    #[test]
    fn print_parse_round_trip(seed in any::<u64>(), depth in 0usize..4, which in 0usize..5) {
        let f = fixture();
        let t = random_term(seed, depth, ground_types()[which]);
        let printed = print_term(&t);
        let reparsed = parse_term(&printed, &f.env, &f.sig).unwrap();
        prop_assert_eq!(reparsed, t);
    }

    #[test]
    fn monotonicity_checker_matches_oracle(bits in 0u16..16, arity in 1usize..3) {
        // random truth table on a constructor of the given arity, checked
        // against a direct pairwise oracle
        let f = fixture();
        let ctor = if arity == 1 { "Succ" } else { "Cons" };
        let size = 1usize << arity;
        let values: Vec<Flag> = (0..size)
            .map(|i| if bits & (1 << i) != 0 { Flag::Natural } else { Flag::Flat })
            .collect();

        // oracle: monotone iff no mask pair lo <= hi flips natural to flat,
        // and the all-natural row is natural
        let ok_axiom = values[size - 1] == Flag::Natural;
        let mut ok_monotone = true;
        for lo in 0..size {
            for hi in 0..size {
                if hi & lo == lo && values[lo] > values[hi] {
                    ok_monotone = false;
                }
            }
        }

        let mut per_ctor = std::collections::HashMap::new();
        for c in f.sig.ctors() {
            per_ctor.insert(c.name.clone(), FlagSpec::StrictNone);
        }
        per_ctor.insert(ctor.to_string(), FlagSpec::Table { arity, values });
        let core = CoreType::new(CoreMode::Custom, per_ctor);
        prop_assert_eq!(check_monotone(&core, &f.sig), ok_axiom && ok_monotone);
    }

    #[test]
    fn reduction_is_deterministic(seed in any::<u64>(), depth in 0usize..3) {
        let f = fixture();
        let t = random_term(seed, depth, "list");
        let core = builtin_core(CoreMode::Miranda, &f.sig);
        prop_assert_eq!(phi_step(&t, &f.system, &core), phi_step(&t, &f.system, &core));
    }
}

#[test]
fn builtin_cores_pass_the_checker() {
    let f = fixture();
    for mode in [CoreMode::Eager, CoreMode::Lazy, CoreMode::Miranda] {
        assert!(check_monotone(&builtin_core(mode, &f.sig), &f.sig));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn constructor_roots_are_defined_under_the_lazy_core(seed in any::<u64>(), depth in 0usize..4) {
        let f = fixture();
        let t = random_term(seed, depth, "list");
        if t.is_ctor_rooted() {
            let ctx = eqlang::Context::default();
            let lazy = builtin_core(CoreMode::Lazy, &f.sig);
            prop_assert!(eqlang::derive_not_undefined(&t, &ctx, &lazy));
        }
    }
}

/// Observed on the corpus, not asserted as a theorem: whenever the eager
/// semantics computes a value, the lazy semantics computes the same one.
#[test]
fn eager_values_are_reached_lazily_on_the_corpus() {
    use eqlang::{reduce, Outcome, ReduceConfig};
    let f = fixture();
    let mut compared = 0usize;
    for seed in 0..200u64 {
        let ty = ground_types()[seed as usize % 5];
        let t = random_term(seed.wrapping_mul(0x9e37), 3, ty);
        let eager = ReduceConfig::new(builtin_core(CoreMode::Eager, &f.sig)).with_fuel(300);
        let Outcome::Value { result, .. } = reduce(&t, &f.system, &eager).outcome else {
            continue;
        };
        let lazy = ReduceConfig::new(builtin_core(CoreMode::Lazy, &f.sig)).with_fuel(2000);
        match reduce(&t, &f.system, &lazy).outcome {
            Outcome::Value {
                result: lazy_result,
                ..
            } => assert_eq!(result, lazy_result),
            other => panic!("eager value {result} but lazy outcome {other:?} for {t}"),
        }
        compared += 1;
    }
    assert!(
        compared > 100,
        "too few eager values to compare: {compared}"
    );
}
