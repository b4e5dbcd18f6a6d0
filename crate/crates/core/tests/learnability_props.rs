//! Learner harness properties: the composition reduction, exact-implies-
//! approximate monotonicity, query accounting, bound enforcement, and the
//! census oracle for membership families.

use std::sync::Arc;

use wbc_arena::arena::Arena;
use wbc_arena::bits::Bits;
use wbc_arena::error::Error;
use wbc_arena::learnability::{
    compose_learner, estimate_learnability, run_approx_learning_trial_with_key,
    run_exact_learning_trial, run_exact_learning_trial_with_key, KeyEmbedding, LearnMode, Learner,
};
use wbc_arena::poly::Poly;
use wbc_arena::program::{EqualityBasis, ProgramValue};
use wbc_arena::rng::RngStream;
use wbc_arena::schemes::pairing::{obfuscate_key, EncKey};
use wbc_arena::schemes::ro::RoFamily;
use wbc_arena::zoo;

fn arena() -> Arena {
    Arena::with_defaults()
}

#[test]
fn identity_table_learner_learns_identity_family() {
    let arena = arena();
    let family = arena.family("identity").unwrap();
    let report = estimate_learnability(
        arena.registry(),
        &family,
        &zoo::identity_table_learner(),
        8,
        100,
        LearnMode::Exact,
        31,
    )
    .unwrap();
    assert_eq!(report.successes, 100);
    assert_eq!(report.equality_basis, "exhaustive");
}

#[test]
fn exhaustive_table_learner_learns_xor_exactly() {
    let arena = arena();
    let family = arena.family("xor").unwrap();
    let report = estimate_learnability(
        arena.registry(),
        &family,
        &zoo::exhaustive_table_learner(),
        8,
        50,
        LearnMode::Exact,
        32,
    )
    .unwrap();
    assert_eq!(report.successes, 50);
}

#[test]
fn xor_probe_reconstructs_the_member_bytes() {
    let arena = arena();
    let family = arena.family("xor").unwrap();
    // the emitted program is Native(xor, key) itself, so the canonical
    // serializations match and the verdict is authoritative at any k
    let report = estimate_learnability(
        arena.registry(),
        &family,
        &zoo::xor_probe_learner(),
        32,
        50,
        LearnMode::Exact,
        33,
    )
    .unwrap();
    assert_eq!(report.successes, 50);
    assert_eq!(report.equality_basis, "exhaustive");
}

#[test]
fn query_budget_is_enforced() {
    let arena = arena();
    let family = arena.family("xor").unwrap();
    let greedy = Learner::new(
        "greedy",
        4,
        Poly::linear(1024, 2),
        Poly::linear(8, 2),
        Arc::new(|ctx| {
            for v in 0..100u64 {
                ctx.query(&Bits::from_u64_be(v, ctx.input_len() as u32 as usize))?;
            }
            ProgramValue::table(ctx.input_len() as u32, ctx.output_len() as u32, Default::default())
        }),
    );
    let eval = arena.eval_ctx(34, "env", 0);
    let mut rng = RngStream::new(34, 0);
    let err = run_exact_learning_trial(&family, &greedy, 8, &eval, &mut rng).unwrap_err();
    assert!(matches!(err, Error::BudgetExceeded(_)));
}

#[test]
fn oversized_output_is_rejected() {
    let arena = arena();
    let family = arena.family("xor").unwrap();
    let bloated = Learner::new(
        "bloated",
        0,
        Poly::constant(4), // four bytes will never fit a program
        Poly::linear(8, 2),
        Arc::new(|ctx| {
            ProgramValue::table(ctx.input_len() as u32, ctx.output_len() as u32, Default::default())
        }),
    );
    let eval = arena.eval_ctx(35, "env", 0);
    let mut rng = RngStream::new(35, 0);
    let err = run_exact_learning_trial(&family, &bloated, 8, &eval, &mut rng).unwrap_err();
    assert!(matches!(err, Error::SizeBoundViolated { .. }));
}

#[test]
fn query_count_matches_oracle_transcript() {
    let arena = arena();
    let family = arena.family("xor").unwrap();
    let counting = Learner::new(
        "counting",
        16,
        Poly::linear(1024, 2),
        Poly::linear(8, 2),
        Arc::new(|ctx| {
            for v in 0..7u64 {
                let input = Bits::from_u64_be(v, ctx.input_len());
                ctx.query(&input)?;
            }
            assert_eq!(ctx.queries_made(), 7);
            assert_eq!(ctx.transcript().len(), 7);
            ProgramValue::table(ctx.input_len() as u32, ctx.output_len() as u32, Default::default())
        }),
    );
    let eval = arena.eval_ctx(36, "env", 0);
    let mut rng = RngStream::new(36, 0);
    let trial = run_exact_learning_trial(&family, &counting, 8, &eval, &mut rng).unwrap();
    assert_eq!(trial.queries, 7);
}

#[test]
fn exact_success_implies_approx_success_per_key() {
    let arena = arena();
    let family = arena.family("xor").unwrap();
    let learner = zoo::exhaustive_table_learner();
    for t in 0..40u64 {
        let eval = arena.eval_ctx(37, "env", t);
        let mut rng_exact = RngStream::derive(37, "trial", &[t]);
        let mut rng_approx = RngStream::derive(37, "trial", &[t]);
        let key = {
            let mut krng = RngStream::derive(37, "key", &[t]);
            family.sample_key(8, &mut krng).unwrap()
        };
        let exact =
            run_exact_learning_trial_with_key(&family, &key, &learner, &eval, &mut rng_exact)
                .unwrap();
        let approx =
            run_approx_learning_trial_with_key(&family, &key, &learner, &eval, &mut rng_approx)
                .unwrap();
        if exact.success {
            assert!(approx.success, "exact success without approx success at trial {t}");
        }
    }
}

#[test]
fn ro_exact_rate_at_k8_matches_census() {
    // exact learning of the membership family with the all-zero learner
    // succeeds exactly when the trial's oracle table has no hit for the key
    let arena = arena();
    let family = arena.family("ro").unwrap();
    let learner = zoo::constant_zero_learner();
    let ro_family = RoFamily;
    let mut agreement = 0;
    for t in 0..150u64 {
        let eval = arena.eval_ctx(38, "env", t);
        let mut rng = RngStream::derive(38, "trial", &[t]);
        let key = family.sample_key(8, &mut rng).unwrap();
        let trial =
            run_exact_learning_trial_with_key(&family, &key, &learner, &eval, &mut rng).unwrap();
        assert_eq!(trial.basis, EqualityBasis::Exhaustive);
        let hits = ro_family.census_hits(&key, &eval);
        assert_eq!(trial.success, hits == 0, "trial {t}: success vs census disagree");
        if trial.success {
            agreement += 1;
        }
    }
    // Pr[no hit] = (1 - 2^-8)^256, about 0.37
    assert!(
        (30..=85).contains(&agreement),
        "no-hit frequency {agreement}/150 far from expectation"
    );
}

#[test]
fn constant_zero_approximates_ro_but_not_pairing() {
    let arena = arena();
    let ro = arena.family("ro").unwrap();
    let ro_report = estimate_learnability(
        arena.registry(),
        &ro,
        &zoo::constant_zero_learner(),
        32,
        500,
        LearnMode::Approx,
        39,
    )
    .unwrap();
    assert_eq!(ro_report.successes, 500);

    let e_family = arena.family("pairing-e").unwrap();
    let e_report = estimate_learnability(
        arena.registry(),
        &e_family,
        &zoo::constant_zero_learner(),
        e_family.natural_k().unwrap(),
        100,
        LearnMode::Approx,
        40,
    )
    .unwrap();
    assert_eq!(
        e_report.successes, 0,
        "the all-zero program matched a ciphertext"
    );
}

#[test]
fn composed_learner_tracks_inner_on_twin_families() {
    // every encryption member coincides with a twin-family member; a
    // learner for the twin run through the composition wrapper must succeed
    // on exactly the same trials, with the same query count
    let arena = arena();
    let e_family = arena.family("pairing-e").unwrap();
    let f_family = arena.family("pairing-f").unwrap();
    let embed = KeyEmbedding {
        map: Arc::new(|e_key: &Bits| {
            let enc = EncKey::decode(e_key).expect("valid key");
            obfuscate_key(&enc).expect("valid key").encode()
        }),
    };
    let inner = zoo::constant_zero_learner();
    let composed = compose_learner(&inner, &embed);
    assert_eq!(composed.learner_id, "compose(constant-zero)");

    let nat = e_family.natural_k().unwrap();
    for t in 0..60u64 {
        let eval = arena.eval_ctx(41, "env", t);
        let mut krng = RngStream::derive(41, "key", &[t]);
        let e_key = e_family.sample_key(nat, &mut krng).unwrap();
        let f_key = (embed.map)(&e_key);

        let mut rng_outer = RngStream::derive(41, "trial", &[t]);
        let mut rng_inner = RngStream::derive(41, "trial", &[t]);
        let outer =
            run_approx_learning_trial_with_key(&e_family, &e_key, &composed, &eval, &mut rng_outer)
                .unwrap();
        let inner_trial =
            run_approx_learning_trial_with_key(&f_family, &f_key, &inner, &eval, &mut rng_inner)
                .unwrap();
        assert_eq!(outer.success, inner_trial.success, "trial {t} diverged");
        assert_eq!(outer.queries, inner_trial.queries);
    }
}

#[test]
fn reports_are_reproducible_and_rates_consistent() {
    let arena = arena();
    let family = arena.family("ro").unwrap();
    let a = estimate_learnability(
        arena.registry(),
        &family,
        &zoo::constant_zero_learner(),
        8,
        200,
        LearnMode::Exact,
        42,
    )
    .unwrap();
    let b = estimate_learnability(
        arena.registry(),
        &family,
        &zoo::constant_zero_learner(),
        8,
        200,
        LearnMode::Exact,
        42,
    )
    .unwrap();
    assert_eq!(a.successes, b.successes);
    assert!(a.success_rate >= 0.0 && a.success_rate <= 1.0);
    assert_eq!(a.success_rate, a.successes as f64 / a.trials as f64);
    assert_eq!(a.csv_row(), b.csv_row());
}
