//! Encryption with the randomness folded into the key.
//!
//! A member of `prob-pairing` is keyed by <enc_key, alpha> and maps a
//! message m to E(enc_key, m, alpha). Two keys that differ only in alpha
//! compute different ciphertexts of the same plaintexts, so the useful
//! notion of "same program" here is equality up to the in-key randomness.
//! The decider family checks that relation on outputs by decrypting and
//! comparing, using only the non-random key material.

use crate::bits::{decode_fields, encode_fields, Bits};
use crate::error::{Error, Result};
use crate::family::{EvalCtx, Family};
use crate::rng::RngStream;
use crate::schemes::group::{GenericGroupCtx, ELT_BITS};
use crate::schemes::pairing::{e_encrypt, hash_mask, EncKey};

pub const FAMILY_PROB_PAIRING: &str = "prob-pairing";
pub const FAMILY_TAU_DECIDER: &str = "tau-decider-pp";

/// Bits of builder randomness: three 64-bit tapes for g, x, and alpha.
pub const PROB_RANDOMNESS_BITS: usize = 192;

pub fn make_prob_key(enc: &EncKey, alpha: u64) -> Bits {
    encode_fields(&[&enc.encode(), &Bits::from_u64_be(alpha, 64)])
}

pub fn parse_prob_key(key: &Bits) -> Result<(EncKey, u64)> {
    let fields = decode_fields(key, 2).map_err(|_| Error::KeyRejected)?;
    if fields[1].len() != 64 {
        return Err(Error::KeyRejected);
    }
    let enc = EncKey::decode(&fields[0])?;
    let alpha = fields[1].to_u64_be();
    if alpha >= enc.w {
        return Err(Error::KeyRejected);
    }
    Ok((enc, alpha))
}

/// The non-random component: the key with alpha stripped.
pub fn prob_canonical_part(key: &Bits) -> Bits {
    match decode_fields(key, 2) {
        Ok(fields) => fields[0].clone(),
        Err(_) => key.clone(),
    }
}

pub struct ProbPairingFamily {
    ctx: GenericGroupCtx,
    key_bits: usize,
}

impl ProbPairingFamily {
    pub fn new(ctx: GenericGroupCtx) -> Self {
        let probe = EncKey {
            w: ctx.order(),
            g: crate::schemes::group::G1Elt(1),
            x: crate::schemes::group::G1Elt(1),
        };
        let key_bits = make_prob_key(&probe, 0).len();
        ProbPairingFamily { ctx, key_bits }
    }

    pub fn group(&self) -> &GenericGroupCtx {
        &self.ctx
    }
}

impl Family for ProbPairingFamily {
    fn family_id(&self) -> &str {
        FAMILY_PROB_PAIRING
    }

    fn natural_k(&self) -> Option<usize> {
        Some(self.key_bits)
    }

    fn min_k(&self) -> usize {
        self.key_bits
    }

    fn key_is_valid(&self, key: &Bits) -> bool {
        matches!(parse_prob_key(key), Ok((enc, _)) if enc.w == self.ctx.order())
    }

    fn input_len(&self, _key_len: usize) -> usize {
        self.ctx.msg_len()
    }

    fn output_len(&self, _key_len: usize) -> usize {
        self.ctx.msg_len() + ELT_BITS
    }

    fn step_bound(&self, _key_len: usize) -> u64 {
        8
    }

    fn eval_raw(&self, key: &Bits, input: &Bits, _ctx: &EvalCtx) -> (Bits, u64) {
        let (enc, alpha) = parse_prob_key(key).expect("validated key");
        let (c1, c2) = e_encrypt(&enc, input, alpha).expect("total on valid inputs");
        (Bits::concat(&[&c1, &c2]), 8)
    }

    fn sample_key(&self, k: usize, rng: &mut RngStream) -> Result<Bits> {
        if k != self.key_bits {
            return Err(Error::Unsamplable { k });
        }
        let enc = crate::schemes::pairing::keygen(&self.ctx, rng);
        Ok(make_prob_key(&enc, rng.below(self.ctx.order())))
    }
}

/// Z(a, z) = 1 iff z is some member-output of the key's equivalence class
/// on a, i.e. iff z decrypts to a under the embedded key material. Input is
/// a || z; output one bit.
pub struct TauDeciderFamily {
    ctx: GenericGroupCtx,
    key_bits: usize,
}

impl TauDeciderFamily {
    pub fn new(ctx: GenericGroupCtx) -> Self {
        let probe = EncKey {
            w: ctx.order(),
            g: crate::schemes::group::G1Elt(1),
            x: crate::schemes::group::G1Elt(1),
        };
        let key_bits = probe.encode().len();
        TauDeciderFamily { ctx, key_bits }
    }
}

impl Family for TauDeciderFamily {
    fn family_id(&self) -> &str {
        FAMILY_TAU_DECIDER
    }

    fn natural_k(&self) -> Option<usize> {
        Some(self.key_bits)
    }

    fn min_k(&self) -> usize {
        self.key_bits
    }

    fn key_is_valid(&self, key: &Bits) -> bool {
        matches!(EncKey::decode(key), Ok(k) if k.w == self.ctx.order())
    }

    fn input_len(&self, _key_len: usize) -> usize {
        2 * self.ctx.msg_len() + ELT_BITS
    }

    fn output_len(&self, _key_len: usize) -> usize {
        1
    }

    fn step_bound(&self, _key_len: usize) -> u64 {
        10
    }

    fn eval_raw(&self, key: &Bits, input: &Bits, _ctx: &EvalCtx) -> (Bits, u64) {
        let enc = EncKey::decode(key).expect("validated key");
        let l = self.ctx.msg_len();
        let a = input.slice(0, l);
        let c1 = input.slice(l, l);
        let c2 = self.ctx.decode_g1_lenient(&input.slice(2 * l, ELT_BITS));
        let mask = hash_mask(&self.ctx, self.ctx.pairing(c2, enc.x));
        let m = mask.xor(&c1).expect("lengths match");
        (Bits::from_u64_be((m == a) as u64, 1), 10)
    }

    fn sample_key(&self, k: usize, rng: &mut RngStream) -> Result<Bits> {
        if k != self.key_bits {
            return Err(Error::Unsamplable { k });
        }
        Ok(crate::schemes::pairing::keygen(&self.ctx, rng).encode())
    }
}

/// The builder map behind the decider: randomness r to (key q, decider Z).
/// Chunks of r pick g, x, and alpha; modulo bias is below 2^-57 per
/// component, far under what the uniformity checks can see.
pub fn build_prob_key_and_decider(
    ctx: &GenericGroupCtx,
    r: &Bits,
) -> Result<(Bits, crate::program::ProgramValue)> {
    if r.len() != PROB_RANDOMNESS_BITS {
        return Err(Error::LengthMismatch(format!(
            "builder randomness must be {PROB_RANDOMNESS_BITS} bits, got {}",
            r.len()
        )));
    }
    let w = ctx.order();
    let e_g = 1 + r.slice(0, 64).to_u64_be() % (w - 1);
    let e_x = 1 + r.slice(64, 64).to_u64_be() % (w - 1);
    let alpha = r.slice(128, 64).to_u64_be() % w;
    let enc = EncKey {
        w,
        g: ctx.g1(e_g),
        x: ctx.g1(e_x),
    };
    let q = make_prob_key(&enc, alpha);
    let z = crate::program::ProgramValue::Native {
        family_id: FAMILY_TAU_DECIDER.to_string(),
        key: enc.encode(),
    };
    Ok((q, z))
}

pub const OBF_RERANDOMIZE: &str = "rerandomize-pp";

/// Obfuscation by re-randomization: same non-random key material, fresh
/// alpha. Fails strict output equality on essentially every input while
/// preserving what the decider checks.
pub fn rerandomizing_obfuscator() -> crate::obfuscation::Obfuscator {
    crate::obfuscation::Obfuscator::new(
        OBF_RERANDOMIZE,
        crate::poly::Poly::linear(64, 1),
        crate::poly::Poly::linear(8, 1),
        std::sync::Arc::new(|_family, key, _ctx, rng| {
            let (enc, _alpha) = parse_prob_key(key)?;
            let fresh = rng.below(enc.w);
            Ok(crate::program::ProgramValue::Native {
                family_id: FAMILY_PROB_PAIRING.to_string(),
                key: make_prob_key(&enc, fresh),
            })
        }),
    )
}

pub fn prob_pairing_tau_relation() -> crate::obfuscation::TauRelation {
    crate::obfuscation::TauRelation::new(
        FAMILY_PROB_PAIRING,
        std::sync::Arc::new(prob_canonical_part),
    )
}

pub fn prob_pairing_tau_decider(ctx: GenericGroupCtx) -> crate::obfuscation::TauDecider {
    crate::obfuscation::TauDecider::new(
        FAMILY_PROB_PAIRING,
        crate::poly::Poly::linear(256, 1),
        PROB_RANDOMNESS_BITS,
        std::sync::Arc::new(move |r| build_prob_key_and_decider(&ctx, r)),
    )
}
