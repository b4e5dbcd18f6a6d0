//! The registered zoo: adversaries, learners, simulators, distinguishers.
//!
//! The zoo is the finite stand-in for quantifiers over all efficient
//! algorithms; every estimate that maximizes or minimizes over "any
//! adversary" actually ranges over these entries, and reports carry the zoo
//! version so claims stay scoped.

use std::sync::Arc;

use serde::Serialize;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::games::Adversary;
use crate::learnability::Learner;
use crate::obfuscation::{
    IndDistinguisher, KeyPredicate, ProgramSimulator, PvbbpAdversary, PvbbpSimulator,
};
use crate::poly::Poly;
use crate::program::ProgramValue;
use crate::schemes::pairing::{d_decrypt, EncKey, FAMILY_C, FAMILY_E};
use crate::schemes::toy::FAMILY_XOR;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ZooKind {
    Adversary,
    Learner,
    Simulator,
    Distinguisher,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZooEntry {
    pub id: String,
    pub kind: ZooKind,
    pub compatible_specs: Vec<String>,
    pub query_budget: u64,
    pub description: String,
}

fn entry(
    id: &str,
    kind: ZooKind,
    specs: &[&str],
    query_budget: u64,
    description: &str,
) -> ZooEntry {
    ZooEntry {
        id: id.to_string(),
        kind,
        compatible_specs: specs.iter().map(|s| s.to_string()).collect(),
        query_budget,
        description: description.to_string(),
    }
}

pub fn zoo_registry() -> Vec<ZooEntry> {
    vec![
        entry(
            "guess",
            ZooKind::Adversary,
            &["ind-cpa", "ind-cca2", "find-q", "find-q-pair", "ro-distinguish"],
            0,
            "outputs uniform bits of the expected length, makes no queries",
        ),
        entry(
            "forwarding",
            ZooKind::Adversary,
            &["find-q", "find-q-pair"],
            4,
            "submits each received program to the validator for its family and concatenates the responses",
        ),
        entry(
            "key-extraction",
            ZooKind::Adversary,
            &["ind-cpa", "ind-cca2"],
            2,
            "parses an encryption key out of a native program, decrypts the challenge locally; guesses when parsing fails",
        ),
        entry(
            "equality-tester",
            ZooKind::Adversary,
            &["ind-cpa", "ind-cca2"],
            20,
            "accepts iff the received program matches its oracle on 20 random probes; outputs the verdict bit",
        ),
        entry(
            "e-heavy-prober",
            ZooKind::Adversary,
            &["ind-cpa", "ind-cca2"],
            51,
            "hammers the encryption oracle, makes one challenge query, then guesses",
        ),
        entry(
            "decrypt-challenge",
            ZooKind::Adversary,
            &["ind-cca2"],
            2,
            "feeds the challenge ciphertext straight back to the decryption oracle",
        ),
        entry(
            "ro-probing",
            ZooKind::Distinguisher,
            &["ro-distinguish"],
            1000,
            "queries random inputs hoping for a membership hit, else guesses",
        ),
        entry(
            "constant-zero",
            ZooKind::Learner,
            &[],
            0,
            "emits the all-zero table without querying",
        ),
        entry(
            "identity-table",
            ZooKind::Learner,
            &[],
            0,
            "emits the identity table on small domains",
        ),
        entry(
            "exhaustive-table",
            ZooKind::Learner,
            &[],
            4096,
            "tabulates the member over domains up to 2^12 inputs",
        ),
        entry(
            "xor-probe",
            ZooKind::Learner,
            &[],
            1,
            "recovers an xor key from the all-zero query and emits the native member",
        ),
        entry(
            "junk-program",
            ZooKind::Simulator,
            &[],
            0,
            "emits an empty table of the right shape",
        ),
        entry(
            "fresh-key",
            ZooKind::Simulator,
            &[],
            0,
            "emits the native member for an independently sampled key",
        ),
        entry(
            "ind-equality-tester",
            ZooKind::Distinguisher,
            &[],
            20,
            "soundness-game distinguisher: accepts candidates agreeing with the oracle on 20 probes",
        ),
    ]
}

// ---------------------------------------------------------------------------
// Game adversaries
// ---------------------------------------------------------------------------

/// Uniform output, no queries. `output_len` of `None` uses the length the
/// specification's win predicate expects.
pub fn guess_adversary(output_len: Option<usize>) -> Adversary {
    Adversary::new(
        "guess",
        Arc::new(move |ctx| {
            let len = output_len.unwrap_or_else(|| ctx.expected_output_len());
            ctx.rng().bits(len)
        }),
    )
}

/// For each validating oracle (in index order) submit the received program
/// for that validator's base family, padded to the oracle input width, and
/// concatenate the responses; missing programs degrade to uniform bits.
/// Black-box runs therefore degrade to guessing.
pub fn forwarding_adversary() -> Adversary {
    Adversary::new(
        "forwarding",
        Arc::new(|ctx| {
            let n = ctx.n_oracles();
            let validators: Vec<usize> = (1..=n)
                .filter(|&i| ctx.validator_base_id(i).is_some())
                .collect();
            if validators.is_empty() {
                let len = ctx.expected_output_len();
                return ctx.rng().bits(len);
            }
            let programs = ctx.whitebox_programs().to_vec();
            let mut out = Bits::new();
            for &v in &validators {
                let base = ctx.validator_base_id(v).expect("validator").to_string();
                let out_len = ctx.oracle_output_len(v);
                let matched = programs
                    .iter()
                    .find(|(idx, _)| ctx.oracle_family_id(*idx) == base)
                    .map(|(_, p)| p.clone());
                let response = matched.and_then(|p| {
                    let padded = p.to_padded_input(ctx.oracle_input_len(v)).ok()?;
                    ctx.query(v, &padded)
                });
                match response {
                    Some(resp) if resp.len() == out_len => out.extend_bits(&resp),
                    _ => {
                        let filler = ctx.rng().bits(out_len);
                        out.extend_bits(&filler);
                    }
                }
            }
            out
        }),
    )
}

/// Parses the expected family's key out of a received native program and
/// decrypts the challenge locally, never touching the decryption oracle.
/// Falls back to guessing when no program parses (wrong family, table,
/// black-box run).
pub fn key_extraction_adversary(expected_family: &str) -> Adversary {
    let expected = expected_family.to_string();
    Adversary::new(
        "key-extraction",
        Arc::new(move |ctx| {
            let c_idx = (1..=ctx.n_oracles()).find(|&i| ctx.oracle_family_id(i) == FAMILY_C);
            let parsed = ctx.whitebox_programs().iter().find_map(|(_, p)| match p {
                ProgramValue::Native { family_id, key } if *family_id == expected => {
                    EncKey::decode(key).ok()
                }
                _ => None,
            });
            let (Some(c_idx), Some(enc)) = (c_idx, parsed) else {
                return ctx.guess_output();
            };
            let l = ctx.oracle_input_len(c_idx) / 2;
            let m0 = Bits::zeros(l);
            let m1 = Bits::ones(l);
            let Some(ct) = ctx.query(c_idx, &Bits::concat(&[&m0, &m1])) else {
                return ctx.guess_output();
            };
            if ct.len() != l + 72 {
                return ctx.guess_output();
            }
            let c1 = ct.slice(0, l);
            let c2 = ct.slice(l, 72);
            match d_decrypt(&enc, &c1, &c2) {
                Ok(m) => Bits::from_u64_be((m == m1) as u64, 1),
                Err(_) => ctx.guess_output(),
            }
        }),
    )
}

/// Probes the obfuscated oracle against the received program and outputs
/// whether they agreed everywhere. Ignores the challenge entirely.
pub fn equality_tester_adversary(n_probes: u32) -> Adversary {
    Adversary::new(
        "equality-tester",
        Arc::new(move |ctx| {
            let programs = ctx.whitebox_programs().to_vec();
            let Some((idx, program)) = programs.first() else {
                return ctx.guess_output();
            };
            let in_len = ctx.oracle_input_len(*idx);
            let mut all_agree = true;
            for _ in 0..n_probes {
                let a = ctx.rng().bits(in_len);
                let Some(oracle_out) = ctx.query(*idx, &a) else {
                    all_agree = false;
                    break;
                };
                let candidate_out = ctx
                    .eval_candidate(program, &a)
                    .ok()
                    .and_then(|o| o.output);
                if candidate_out != Some(oracle_out) {
                    all_agree = false;
                    break;
                }
            }
            if ctx.expected_output_len() == 1 {
                Bits::from_u64_be(all_agree as u64, 1)
            } else {
                ctx.guess_output()
            }
        }),
    )
}

/// Corpus filler: hammers oracle 1, makes one challenge query when a
/// challenge oracle exists, then guesses.
pub fn e_heavy_prober(probes: u32) -> Adversary {
    Adversary::new(
        "e-heavy-prober",
        Arc::new(move |ctx| {
            let in1 = ctx.oracle_input_len(1);
            for _ in 0..probes {
                let a = ctx.rng().bits(in1);
                if ctx.query(1, &a).is_none() {
                    break;
                }
            }
            if let Some(c_idx) =
                (1..=ctx.n_oracles()).find(|&i| ctx.oracle_family_id(i) == FAMILY_C)
            {
                let a = ctx.random_oracle_input(c_idx);
                let _ = ctx.query(c_idx, &a);
            }
            ctx.guess_output()
        }),
    )
}

/// Asks the challenge oracle for a ciphertext and feeds it straight back to
/// the decryption oracle; the answer pins the hidden bit exactly, but the
/// decryption query disqualifies the run. Exists to witness that deleting
/// decryption queries changes verdicts.
pub fn decrypt_challenge_adversary() -> Adversary {
    Adversary::new(
        "decrypt-challenge",
        Arc::new(|ctx| {
            let c_idx = (1..=ctx.n_oracles()).find(|&i| ctx.oracle_family_id(i) == FAMILY_C);
            let Some(c_idx) = c_idx else {
                return ctx.guess_output();
            };
            let l = ctx.oracle_input_len(c_idx) / 2;
            let m0 = Bits::zeros(l);
            let m1 = Bits::ones(l);
            let Some(ct) = ctx.query(c_idx, &Bits::concat(&[&m0, &m1])) else {
                return ctx.rng().bits(1);
            };
            let Some(m) = ctx.query(2, &ct) else {
                return ctx.rng().bits(1);
            };
            Bits::from_u64_be((m == m1) as u64, 1)
        }),
    )
}

/// Queries random inputs hoping the membership oracle answers 1; outputs 1
/// on a hit, otherwise a fair coin.
pub fn ro_probing_distinguisher(query_budget: u32) -> Adversary {
    Adversary::new(
        "ro-probing",
        Arc::new(move |ctx| {
            let in_len = ctx.oracle_input_len(1);
            for _ in 0..query_budget {
                let x = ctx.rng().bits(in_len);
                match ctx.query(1, &x) {
                    Some(out) if out.len() == 1 && out.get(0) => {
                        return Bits::from_u64_be(1, 1);
                    }
                    Some(_) => {}
                    None => break,
                }
            }
            Bits::from_u64_be(ctx.rng().bit() as u64, 1)
        }),
    )
}

// ---------------------------------------------------------------------------
// Learners
// ---------------------------------------------------------------------------

/// Emits the all-zero function (an empty table) without querying.
pub fn constant_zero_learner() -> Learner {
    Learner::new(
        "constant-zero",
        0,
        Poly::linear(1024, 2),
        Poly::linear(8, 2),
        Arc::new(|ctx| {
            ProgramValue::table(ctx.input_len() as u32, ctx.output_len() as u32, Default::default())
        }),
    )
}

/// Emits the identity table on domains up to 2^12 inputs (empty table
/// beyond that, since the full table would blow the size bound).
pub fn identity_table_learner() -> Learner {
    Learner::new(
        "identity-table",
        0,
        Poly::new(&[1024, 0, 16]),
        Poly::linear(8, 2),
        Arc::new(|ctx| {
            let in_len = ctx.input_len();
            let out_len = ctx.output_len();
            let mut entries = std::collections::BTreeMap::new();
            if in_len == out_len && in_len <= 12 {
                for v in 1..(1u64 << in_len) {
                    let a = Bits::from_u64_be(v, in_len);
                    entries.insert(a.clone(), a);
                }
            }
            ProgramValue::table(in_len as u32, out_len as u32, entries)
        }),
    )
}

/// Tabulates the member by querying every input, when the domain fits the
/// query budget; otherwise degrades to the empty table.
pub fn exhaustive_table_learner() -> Learner {
    Learner::new(
        "exhaustive-table",
        4096,
        Poly::new(&[1024, 0, 64]),
        Poly::linear(8, 2),
        Arc::new(|ctx| {
            let in_len = ctx.input_len();
            let out_len = ctx.output_len();
            let mut entries = std::collections::BTreeMap::new();
            if in_len <= 12 {
                for v in 0..(1u64 << in_len) {
                    let a = Bits::from_u64_be(v, in_len);
                    let out = ctx.query(&a)?;
                    if !out.is_zero() {
                        entries.insert(a, out);
                    }
                }
            }
            ProgramValue::table(in_len as u32, out_len as u32, entries)
        }),
    )
}

/// One query on the all-zero input recovers an xor key; emits the native
/// member for it. Pointless against other families, by design.
pub fn xor_probe_learner() -> Learner {
    Learner::new(
        "xor-probe",
        1,
        Poly::linear(64, 1),
        Poly::linear(8, 2),
        Arc::new(|ctx| {
            let zero = Bits::zeros(ctx.input_len());
            let key = ctx.query(&zero)?;
            Ok(ProgramValue::Native {
                family_id: FAMILY_XOR.to_string(),
                key,
            })
        }),
    )
}

// ---------------------------------------------------------------------------
// Soundness-game participants
// ---------------------------------------------------------------------------

/// Emits an empty table of the family's shape: agrees with nothing but the
/// all-zero function.
pub fn junk_program_simulator() -> ProgramSimulator {
    ProgramSimulator {
        id: "junk-program".into(),
        run: Arc::new(|sctx, _aux| {
            ProgramValue::table(
                sctx.input_len() as u32,
                sctx.output_len() as u32,
                Default::default(),
            )
            .expect("empty table is well formed")
        }),
    }
}

/// Replays the identity obfuscator on an independently sampled key.
pub fn fresh_key_simulator() -> ProgramSimulator {
    ProgramSimulator {
        id: "fresh-key".into(),
        run: Arc::new(|sctx, _aux| sctx.simulate_fresh_member().expect("samplable family")),
    }
}

/// Accepts a candidate program iff it agrees with the oracle on n uniform
/// probes. Zero probes accepts everything.
pub fn equality_tester_distinguisher(n_probes: u32) -> IndDistinguisher {
    IndDistinguisher {
        id: format!("ind-equality-tester({n_probes})"),
        run: Arc::new(move |sctx, candidate, _aux| {
            for _ in 0..n_probes {
                let a = {
                    let len = sctx.input_len();
                    sctx.rng().bits(len)
                };
                let Ok(oracle_out) = sctx.oracle(&a) else {
                    return false;
                };
                let candidate_out = sctx
                    .eval_candidate(candidate, &a)
                    .ok()
                    .and_then(|o| o.output);
                if candidate_out != Some(oracle_out) {
                    return false;
                }
            }
            true
        }),
    }
}

/// Predicate-game adversary that reads the key straight out of a native
/// program of the expected family and evaluates the predicate on it.
pub fn pvbbp_extractor(expected_family: &str, predicate: &KeyPredicate) -> PvbbpAdversary {
    let expected = expected_family.to_string();
    let pred = predicate.clone();
    PvbbpAdversary {
        id: format!("pvbbp-extract[{}]", pred.id),
        run: Arc::new(move |sctx, program, _aux| match program {
            ProgramValue::Native { family_id, key } if *family_id == expected => {
                (pred.eval)(key)
            }
            _ => sctx.rng().bit(),
        }),
    }
}

/// Predicate-game adversary that flips a coin regardless of its inputs.
pub fn pvbbp_guess_adversary() -> PvbbpAdversary {
    PvbbpAdversary {
        id: "pvbbp-guess".into(),
        run: Arc::new(|sctx, _program, _aux| sctx.rng().bit()),
    }
}

/// Predicate-game simulator that flips a coin.
pub fn pvbbp_guess_simulator() -> PvbbpSimulator {
    PvbbpSimulator {
        id: "pvbbp-guess".into(),
        run: Arc::new(|sctx, _aux| sctx.rng().bit()),
    }
}

// ---------------------------------------------------------------------------
// Resolution by id
// ---------------------------------------------------------------------------

pub fn get_adversary(id: &str) -> Result<Adversary> {
    match id {
        "guess" => Ok(guess_adversary(None)),
        "forwarding" => Ok(forwarding_adversary()),
        "key-extraction" => Ok(key_extraction_adversary(FAMILY_E)),
        "equality-tester" => Ok(equality_tester_adversary(20)),
        "e-heavy-prober" => Ok(e_heavy_prober(50)),
        "decrypt-challenge" => Ok(decrypt_challenge_adversary()),
        "ro-probing" => Ok(ro_probing_distinguisher(1000)),
        other => Err(Error::UnknownId {
            registry: "adversary",
            id: other.to_string(),
        }),
    }
}

pub fn get_learner(id: &str) -> Result<Learner> {
    match id {
        "constant-zero" => Ok(constant_zero_learner()),
        "identity-table" => Ok(identity_table_learner()),
        "exhaustive-table" => Ok(exhaustive_table_learner()),
        "xor-probe" => Ok(xor_probe_learner()),
        other => Err(Error::UnknownId {
            registry: "learner",
            id: other.to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_has_at_least_eight_entries() {
        assert!(zoo_registry().len() >= 8);
    }

    #[test]
    fn registry_ids_are_unique() {
        let ids: Vec<String> = zoo_registry().into_iter().map(|e| e.id).collect();
        let mut dedup = ids.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(ids.len(), dedup.len());
    }

    #[test]
    fn adversary_and_learner_ids_resolve() {
        for e in zoo_registry() {
            match e.kind {
                ZooKind::Adversary | ZooKind::Distinguisher if e.id != "ind-equality-tester" => {
                    assert!(get_adversary(&e.id).is_ok(), "{}", e.id);
                }
                ZooKind::Learner => {
                    assert!(get_learner(&e.id).is_ok(), "{}", e.id);
                }
                _ => {}
            }
        }
        assert!(get_adversary("nope").is_err());
    }
}
