//! Engine properties: transcript soundness, oracle statelessness, budget
//! enforcement, determinism, and gap-report consistency.

use std::sync::Arc;

use wbc_arena::arena::Arena;
use wbc_arena::bits::Bits;
use wbc_arena::error::Error;
use wbc_arena::family::eval_family;
use wbc_arena::games::{
    estimate_advantage, run_blackbox, run_whitebox, whitebox_gap, Adversary, Coins, RunMode,
};
use wbc_arena::rng::{derive_seed, RngStream};
use wbc_arena::zoo;

fn arena() -> Arena {
    Arena::with_defaults()
}

/// An adversary that pokes every oracle a few times with random inputs.
fn prober() -> Adversary {
    Adversary::new(
        "prober",
        Arc::new(|ctx| {
            for round in 0..4 {
                for i in 1..=ctx.n_oracles() {
                    let _ = round;
                    let input = ctx.random_oracle_input(i);
                    if ctx.query(i, &input).is_none() {
                        break;
                    }
                }
            }
            ctx.guess_output()
        }),
    )
}

/// An adversary that queries far past any sane budget.
fn budget_buster() -> Adversary {
    Adversary::new(
        "budget-buster",
        Arc::new(|ctx| {
            loop {
                let input = ctx.random_oracle_input(1);
                if ctx.query(1, &input).is_none() {
                    break;
                }
            }
            // the budget is gone; claim victory anyway
            Bits::ones(ctx.expected_output_len())
        }),
    )
}

#[test]
fn transcript_replay_reproduces_outputs() {
    let arena = arena();
    let spec = arena.spec("ind-cca2").unwrap();
    let k = 16;
    let mut tape = RngStream::new(11, 0);
    let r = tape.bits(spec.p_in.eval(k as u64) as usize);
    let eval = arena.eval_ctx(11, "ro", 0);
    let run = run_blackbox(spec, &prober(), k, &r, Coins::derive(11, 0), &eval).unwrap();
    assert!(!run.transcript.records.is_empty());

    // logical time is the strictly increasing sequence number
    for (idx, rec) in run.transcript.records.iter().enumerate() {
        assert_eq!(rec.t, idx as u64 + 1);
        assert!(rec.i >= 1 && rec.i <= spec.n_oracles());
    }

    // replaying every query against the derived keys gives the same outputs
    let keys = spec.derive_keys(k, &r).unwrap();
    for rec in &run.transcript.records {
        let family = &spec.families[rec.i - 1];
        let (out, _) = eval_family(family.as_ref(), &keys[rec.i - 1], &rec.input, &eval).unwrap();
        assert_eq!(out, rec.output, "query {} diverged on replay", rec.t);
    }
}

#[test]
fn oracles_are_stateless_under_permutation() {
    let arena = arena();
    let spec = arena.spec("ind-cca2").unwrap();
    let k = 16;
    let mut tape = RngStream::new(12, 0);
    let r = tape.bits(spec.p_in.eval(k as u64) as usize);
    let eval = arena.eval_ctx(12, "ro", 0);
    let run = run_blackbox(spec, &prober(), k, &r, Coins::derive(12, 0), &eval).unwrap();
    let keys = spec.derive_keys(k, &r).unwrap();

    // evaluate adjacent pairs in swapped order; pure oracles cannot notice
    let records = &run.transcript.records;
    for pair in records.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.i == b.i {
            continue;
        }
        let (out_b, _) =
            eval_family(spec.families[b.i - 1].as_ref(), &keys[b.i - 1], &b.input, &eval).unwrap();
        let (out_a, _) =
            eval_family(spec.families[a.i - 1].as_ref(), &keys[a.i - 1], &a.input, &eval).unwrap();
        assert_eq!(out_a, a.output);
        assert_eq!(out_b, b.output);
    }
}

#[test]
fn budget_overrun_scores_zero_and_flags_transcript() {
    let arena = arena();
    let spec = arena.spec("find-q").unwrap();
    let k = 16;
    let mut tape = RngStream::new(13, 0);
    let r = tape.bits(spec.p_in.eval(k as u64) as usize);
    let eval = arena.eval_ctx(13, "ro", 0);
    let run = run_blackbox(spec, &budget_buster(), k, &r, Coins::derive(13, 0), &eval).unwrap();
    assert!(!run.result, "a budget-overrun run must score 0");
    assert!(run.transcript.budget_exceeded);
    assert!(run.transcript.steps_used <= spec.p_run.eval(k as u64));
}

#[test]
fn estimates_are_bit_exact_across_reruns() {
    let arena = arena();
    let a = arena
        .estimate("ind-cpa", "key-extraction", "whitebox", Some("identity"), 16, 300, 14)
        .unwrap();
    let b = arena
        .estimate("ind-cpa", "key-extraction", "whitebox", Some("identity"), 16, 300, 14)
        .unwrap();
    assert_eq!(a, b);
    let c = arena
        .estimate("ind-cpa", "key-extraction", "whitebox", Some("identity"), 16, 300, 15)
        .unwrap();
    assert!(a.wins != c.wins || a.mean == c.mean);
}

#[test]
fn gap_report_matches_direct_estimates_for_single_zoo() {
    let arena = arena();
    let spec = arena.spec("find-q").unwrap();
    let obf = arena.obfuscator("identity").unwrap();
    let seed = 16u64;
    let report = whitebox_gap(
        spec,
        1,
        obf,
        &[zoo::forwarding_adversary()],
        arena.registry(),
        16,
        150,
        seed,
        0.05,
    )
    .unwrap();
    let per = &report.per_adversary[0];

    let seed_bb = derive_seed(seed, "gap-bb/forwarding");
    let seed_wb = derive_seed(seed, "gap-wb/forwarding");
    let direct_bb = estimate_advantage(
        spec,
        &zoo::forwarding_adversary(),
        &RunMode::BlackBox,
        arena.registry(),
        16,
        150,
        seed_bb,
    )
    .unwrap();
    let wb_mode = RunMode::WhiteBox {
        index: 1,
        obf: obf.clone(),
    };
    let direct_wb = estimate_advantage(
        spec,
        &zoo::forwarding_adversary(),
        &wb_mode,
        arena.registry(),
        16,
        150,
        seed_wb,
    )
    .unwrap();
    assert_eq!(per.blackbox, direct_bb);
    assert_eq!(per.whitebox, direct_wb);
    assert_eq!(per.gap, (direct_wb.mean - direct_bb.mean).abs());
    assert_eq!(report.max_gap, per.gap);
}

#[test]
fn whitebox_rejects_unclaimed_oracles() {
    let arena = arena();
    let spec = arena.spec("ind-cca2").unwrap();
    let k = 16;
    let mut tape = RngStream::new(17, 0);
    let r = tape.bits(spec.p_in.eval(k as u64) as usize);
    let eval = arena.eval_ctx(17, "ro", 0);
    // oracle 2 is the decryption oracle, not claimed obfuscatable
    let err = run_whitebox(
        spec,
        2,
        arena.obfuscator("identity").unwrap(),
        &prober(),
        k,
        &r,
        Coins::derive(17, 0),
        &eval,
    )
    .unwrap_err();
    assert!(matches!(err, Error::NotObfuscatable { index: 2 }));
}

#[test]
fn wrong_tape_length_is_rejected() {
    let arena = arena();
    let spec = arena.spec("find-q").unwrap();
    let eval = arena.eval_ctx(18, "ro", 0);
    let err = run_blackbox(
        spec,
        &prober(),
        16,
        &Bits::zeros(5),
        Coins::derive(18, 0),
        &eval,
    )
    .unwrap_err();
    assert!(matches!(err, Error::LengthMismatch(_)));
}

#[test]
fn jsonl_export_has_record_and_footer_lines() {
    let arena = arena();
    let spec = arena.spec("find-q").unwrap();
    let k = 8;
    let mut tape = RngStream::new(19, 0);
    let r = tape.bits(spec.p_in.eval(k as u64) as usize);
    let eval = arena.eval_ctx(19, "ro", 0);
    let run = run_blackbox(spec, &prober(), k, &r, Coins::derive(19, 0), &eval).unwrap();
    let mut buf = Vec::new();
    run.transcript.write_jsonl(run.result, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), run.transcript.records.len() + 1);
    for line in &lines[..lines.len() - 1] {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.get("t").is_some() && v.get("i").is_some());
        assert!(v.get("input_hex").is_some() && v.get("output_hex").is_some());
    }
    let footer: serde_json::Value = serde_json::from_str(lines[lines.len() - 1]).unwrap();
    assert!(footer.get("s_hex").is_some());
    assert!(footer.get("result").is_some());
    assert!(footer.get("steps").is_some());
}

#[test]
fn ro_distinguish_aux_carries_both_keys() {
    let arena = arena();
    let spec = arena.spec("ro-distinguish").unwrap();
    let k = 16;
    let mut tape = RngStream::new(20, 0);
    let r = tape.bits(spec.p_in.eval(k as u64) as usize);
    let aux = spec.aux_input(k, &r);
    let fields = wbc_arena::bits::decode_fields(&aux, 2).unwrap();
    assert_eq!(fields[0], r.slice(1, k));
    assert_eq!(fields[1], r.slice(1 + k, k));
}

#[test]
fn findq_blackbox_guess_wins_at_expected_rate() {
    let arena = arena();
    // at k = 8 the guessing adversary should win about 10000/256 = 39 times
    let est = arena
        .estimate("find-q", "guess", "blackbox", None, 8, 10_000, 21)
        .unwrap();
    assert!(
        (15..=70).contains(&est.wins),
        "guess wins {} outside the binomial band",
        est.wins
    );
}
