//! Ready-made experiment specifications.
//!
//! - `ind-cca2`: encrypt/decrypt/challenge oracles over the pairing scheme;
//!   win requires at most one challenge query, no post-challenge decryption
//!   of the challenge output, and a correct bit guess.
//! - `ind-cpa`: ind-cca2 with decryption queries banned outright.
//! - `find-q`: a base family plus a validating oracle that releases the
//!   secret q' for any functionally correct program for the base member.
//! - `find-q-pair`: two base families, two validators; the secret splits
//!   into halves released one per validator, each for a correct program for
//!   the *other* family.
//! - `ro-distinguish`: one random-oracle membership member keyed by a
//!   hidden coin; the adversary gets both candidate keys and guesses the
//!   coin.

use std::sync::Arc;

use crate::bits::{encode_fields, Bits};
use crate::error::{Error, Result};
use crate::family::FamilyRef;
use crate::games::{QueryRecord, Specification, WinInput};
use crate::poly::Poly;
use crate::schemes::findq::FindqFamily;
use crate::schemes::group::GenericGroupCtx;
use crate::schemes::pairing::{keygen_from_gamma, CFamily};

pub const SPEC_IND_CPA: &str = "ind-cpa";
pub const SPEC_IND_CCA2: &str = "ind-cca2";
pub const SPEC_FIND_Q: &str = "find-q";
pub const SPEC_FIND_Q_PAIR: &str = "find-q-pair";
pub const SPEC_RO_DISTINGUISH: &str = "ro-distinguish";

fn count_queries(records: &[QueryRecord], oracle: usize) -> usize {
    records.iter().filter(|r| r.i == oracle).count()
}

/// Shared win logic for the encryption games. Oracle order is (E, D, C) =
/// (1, 2, 3). Decryption queries before the challenge are allowed in the
/// cca2 variant; only post-challenge queries on the challenge output lose.
fn encryption_win(input: &WinInput<'_>, ban_all_decrypt: bool) -> bool {
    let k = input.k;
    let b = input.r.get(2 * k);
    let c_records: Vec<&QueryRecord> = input.records.iter().filter(|r| r.i == 3).collect();
    if c_records.len() > 1 {
        return false;
    }
    let d_records: Vec<&QueryRecord> = input.records.iter().filter(|r| r.i == 2).collect();
    if ban_all_decrypt && !d_records.is_empty() {
        return false;
    }
    for d in &d_records {
        for c in &c_records {
            if c.t < d.t && d.input == c.output {
                return false;
            }
        }
    }
    input.s.len() == 1 && input.s.get(0) == b
}

fn build_encryption_spec(
    spec_id: &str,
    group: &GenericGroupCtx,
    e_family: FamilyRef,
    d_family: FamilyRef,
    c_family: FamilyRef,
    ban_all_decrypt: bool,
) -> Specification {
    let ctx = group.clone();
    let key_derive = Arc::new(move |k: usize, r: &Bits| -> Result<Vec<Bits>> {
        if r.len() != 2 * k + 1 {
            return Err(Error::LengthMismatch(format!(
                "tape must be {} bits",
                2 * k + 1
            )));
        }
        let gamma = r.slice(0, k);
        let beta = r.slice(k, k);
        let b = r.get(2 * k);
        let enc = keygen_from_gamma(&ctx, &gamma);
        let key_bits = enc.encode();
        let c_key = CFamily::make_key(b, &enc, &beta);
        Ok(vec![key_bits.clone(), key_bits, c_key])
    });
    Specification::new(
        spec_id,
        vec![e_family, d_family, c_family],
        Poly::linear(1, 2),
        Poly::linear(4096, 64),
        key_derive,
        Arc::new(move |w: &WinInput<'_>| encryption_win(w, ban_all_decrypt)),
        vec![1],
        None,
        Arc::new(|_k| 1),
    )
}

pub fn build_ind_cca2(
    group: &GenericGroupCtx,
    e_family: FamilyRef,
    d_family: FamilyRef,
    c_family: FamilyRef,
) -> Specification {
    build_encryption_spec(SPEC_IND_CCA2, group, e_family, d_family, c_family, false)
}

pub fn build_ind_cpa(
    group: &GenericGroupCtx,
    e_family: FamilyRef,
    d_family: FamilyRef,
    c_family: FamilyRef,
) -> Specification {
    build_encryption_spec(SPEC_IND_CPA, group, e_family, d_family, c_family, true)
}

/// Probe an affine input-length map at two points.
fn affine_input_len(base: &FamilyRef) -> (usize, usize) {
    let at1 = base.input_len(1);
    let at2 = base.input_len(2);
    let slope = at2.saturating_sub(at1);
    let intercept = at1.saturating_sub(slope);
    (intercept, slope)
}

pub fn build_findq(base: FamilyRef, validator: Arc<FindqFamily>) -> Specification {
    assert_eq!(validator.base().family_id(), base.family_id());
    let (c0, c1) = affine_input_len(&base);
    let base_for_keys = Arc::clone(&base);
    let validator_for_keys = Arc::clone(&validator);
    let key_derive = Arc::new(move |k: usize, r: &Bits| -> Result<Vec<Bits>> {
        let in_len = base_for_keys.input_len(k);
        if r.len() != 2 * k + in_len {
            return Err(Error::LengthMismatch(format!(
                "tape must be {} bits",
                2 * k + in_len
            )));
        }
        let q = r.slice(0, k);
        let q_prime = r.slice(k, k);
        let a = r.slice(2 * k, in_len);
        let q1 = validator_for_keys.make_key(&q, &q_prime, &a);
        Ok(vec![q, q1])
    });
    let win = Arc::new(move |w: &WinInput<'_>| {
        let k = w.k;
        let q_prime = w.r.slice(k, k);
        *w.s == q_prime && count_queries(w.records, 2) <= 1
    });
    Specification::new(
        SPEC_FIND_Q,
        vec![base, validator as FamilyRef],
        Poly::new(&[c0 as u64, 2 + c1 as u64]),
        Poly::linear(64, 8),
        key_derive,
        win,
        vec![1],
        None,
        Arc::new(|k| k),
    )
}

/// Two validators, crossed: oracle 3 rewards correct programs for family 2
/// with the first half of q', oracle 4 rewards correct programs for family
/// 1 with the second half. Winning needs both halves.
pub fn build_findq_pair(
    base_a: FamilyRef,
    base_b: FamilyRef,
    validator_for_b: Arc<FindqFamily>,
    validator_for_a: Arc<FindqFamily>,
) -> Specification {
    assert_eq!(validator_for_b.base().family_id(), base_b.family_id());
    assert_eq!(validator_for_a.base().family_id(), base_a.family_id());
    let (a0, a1) = affine_input_len(&base_a);
    let (b0, b1) = affine_input_len(&base_b);
    let ba = Arc::clone(&base_a);
    let bb = Arc::clone(&base_b);
    let va = Arc::clone(&validator_for_b);
    let vb = Arc::clone(&validator_for_a);
    let key_derive = Arc::new(move |k: usize, r: &Bits| -> Result<Vec<Bits>> {
        let in_a = ba.input_len(k);
        let in_b = bb.input_len(k);
        let want = 4 * k + in_a + in_b;
        if r.len() != want {
            return Err(Error::LengthMismatch(format!("tape must be {want} bits")));
        }
        let qa = r.slice(0, k);
        let qb = r.slice(k, k);
        let q_prime = r.slice(2 * k, 2 * k);
        let a_a = r.slice(4 * k, in_a);
        let a_b = r.slice(4 * k + in_a, in_b);
        let share1 = q_prime.slice(0, k);
        let share2 = q_prime.slice(k, k);
        Ok(vec![
            qa.clone(),
            qb.clone(),
            va.make_key(&qb, &share1, &a_b),
            vb.make_key(&qa, &share2, &a_a),
        ])
    });
    let win = Arc::new(move |w: &WinInput<'_>| {
        let k = w.k;
        let q_prime = w.r.slice(2 * k, 2 * k);
        *w.s == q_prime
            && count_queries(w.records, 3) <= 1
            && count_queries(w.records, 4) <= 1
    });
    Specification::new(
        SPEC_FIND_Q_PAIR,
        vec![
            base_a,
            base_b,
            validator_for_b as FamilyRef,
            validator_for_a as FamilyRef,
        ],
        Poly::new(&[(a0 + b0) as u64, 4 + (a1 + b1) as u64]),
        Poly::linear(64, 8),
        key_derive,
        win,
        vec![1, 2],
        None,
        Arc::new(|k| 2 * k),
    )
}

/// One membership oracle keyed by q_b for a hidden coin b; the adversary
/// receives both candidate keys as auxiliary input and must output b. The
/// experiment template has no auxiliary slot of its own, so the pair rides
/// the adversary-input channel as a length-prefixed tuple.
pub fn build_ro_distinguish(ro_family: FamilyRef) -> Specification {
    let key_derive = Arc::new(move |k: usize, r: &Bits| -> Result<Vec<Bits>> {
        if r.len() != 1 + 2 * k {
            return Err(Error::LengthMismatch(format!(
                "tape must be {} bits",
                1 + 2 * k
            )));
        }
        let b = r.get(0);
        let q0 = r.slice(1, k);
        let q1 = r.slice(1 + k, k);
        Ok(vec![if b { q1 } else { q0 }])
    });
    let aux = Arc::new(move |k: usize, r: &Bits| -> Bits {
        let q0 = r.slice(1, k);
        let q1 = r.slice(1 + k, k);
        encode_fields(&[&q0, &q1])
    });
    let win = Arc::new(|w: &WinInput<'_>| w.s.len() == 1 && w.s.get(0) == w.r.get(0));
    Specification::new(
        SPEC_RO_DISTINGUISH,
        vec![ro_family],
        Poly::linear(1, 2),
        Poly::linear(2048, 64),
        key_derive,
        win,
        vec![1],
        Some(aux),
        Arc::new(|_k| 1),
    )
}

/// Catalog entry for `spec list`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SpecInfo {
    pub spec_id: String,
    pub oracles: Vec<String>,
    pub obfuscatable: Vec<usize>,
    pub output_bits_at_k16: usize,
    pub tape_bits_at_k16: usize,
}

pub fn describe(spec: &Specification) -> SpecInfo {
    SpecInfo {
        spec_id: spec.spec_id.clone(),
        oracles: spec
            .families
            .iter()
            .map(|f| f.family_id().to_string())
            .collect(),
        obfuscatable: spec.obfuscatable_claims.clone(),
        output_bits_at_k16: (spec.output_len)(16),
        tape_bits_at_k16: spec.p_in.eval(16) as usize,
    }
}

