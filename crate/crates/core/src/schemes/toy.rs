//! Small families for desk-scale demos: identity, xor, a hash-backed PRF,
//! and a fault-injecting wrapper for exercising correctness checkers.

use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::bits::{decode_fields, encode_fields, Bits};
use crate::error::{Error, Result};
use crate::family::{EvalCtx, Family, FamilyRef};
use crate::rng::RngStream;

pub const FAMILY_IDENTITY: &str = "identity";
pub const FAMILY_XOR: &str = "xor";
pub const FAMILY_PRF: &str = "prf";

/// Output equals input; the key is ignored (any k-bit string is a key).
pub struct IdentityFamily;

impl Family for IdentityFamily {
    fn family_id(&self) -> &str {
        FAMILY_IDENTITY
    }

    fn key_is_valid(&self, key: &Bits) -> bool {
        !key.is_empty()
    }

    fn input_len(&self, key_len: usize) -> usize {
        key_len
    }

    fn output_len(&self, key_len: usize) -> usize {
        key_len
    }

    fn step_bound(&self, key_len: usize) -> u64 {
        1 + key_len as u64
    }

    fn eval_raw(&self, _key: &Bits, input: &Bits, _ctx: &EvalCtx) -> (Bits, u64) {
        (input.clone(), 1 + input.len() as u64)
    }
}

/// Output is input xor key.
pub struct XorFamily;

impl Family for XorFamily {
    fn family_id(&self) -> &str {
        FAMILY_XOR
    }

    fn key_is_valid(&self, key: &Bits) -> bool {
        !key.is_empty()
    }

    fn input_len(&self, key_len: usize) -> usize {
        key_len
    }

    fn output_len(&self, key_len: usize) -> usize {
        key_len
    }

    fn step_bound(&self, key_len: usize) -> u64 {
        1 + key_len as u64
    }

    fn eval_raw(&self, key: &Bits, input: &Bits, _ctx: &EvalCtx) -> (Bits, u64) {
        (input.xor(key).expect("lengths match"), 1 + input.len() as u64)
    }
}

/// A keyed pseudorandom function: k-bit key, k-bit input, k-bit output,
/// realized as a truncated domain-separated digest. No registered learner
/// reconstructs a member from queries, which is what the program-validating
/// demos need from their base family.
pub struct PrfFamily;

impl Family for PrfFamily {
    fn family_id(&self) -> &str {
        FAMILY_PRF
    }

    fn key_is_valid(&self, key: &Bits) -> bool {
        !key.is_empty() && key.len() <= 64
    }

    fn min_k(&self) -> usize {
        1
    }

    fn input_len(&self, key_len: usize) -> usize {
        key_len
    }

    fn output_len(&self, key_len: usize) -> usize {
        key_len
    }

    fn step_bound(&self, key_len: usize) -> u64 {
        2 + key_len as u64
    }

    fn eval_raw(&self, key: &Bits, input: &Bits, _ctx: &EvalCtx) -> (Bits, u64) {
        let mut h = Sha256::new();
        h.update(b"wbc-arena/prf/v1");
        h.update((key.len() as u64).to_be_bytes());
        h.update(key.packed());
        h.update((input.len() as u64).to_be_bytes());
        h.update(input.packed());
        let digest = h.finalize();
        let out = Bits::from_bytes(&digest[..8]).slice(0, key.len());
        (out, 2 + input.len() as u64)
    }
}

/// Wraps a base family and flips the first output bit on a pseudorandom
/// fraction of inputs. Key is <base_key, eps16> where eps16/65536 is the
/// fault rate. Deterministic, so the fault set is a fixed property of the
/// key rather than fresh noise.
pub struct FaultyFamily {
    id: String,
    base: FamilyRef,
}

impl FaultyFamily {
    pub fn new(base: FamilyRef) -> Self {
        FaultyFamily {
            id: format!("faulty-{}", base.family_id()),
            base,
        }
    }

    pub fn make_key(base_key: &Bits, eps16: u16) -> Bits {
        encode_fields(&[base_key, &Bits::from_u64_be(eps16 as u64, 16)])
    }

    fn parse_key(&self, key: &Bits) -> Result<(Bits, u16)> {
        let fields = decode_fields(key, 2).map_err(|_| Error::KeyRejected)?;
        if fields[1].len() != 16 || !self.base.key_is_valid(&fields[0]) {
            return Err(Error::KeyRejected);
        }
        Ok((fields[0].clone(), fields[1].to_u64_be() as u16))
    }

    fn base_key_len(&self, key_len: usize) -> usize {
        // two 32-bit field prefixes plus the 16-bit rate
        key_len.saturating_sub(80)
    }
}

impl Family for FaultyFamily {
    fn family_id(&self) -> &str {
        &self.id
    }

    fn key_is_valid(&self, key: &Bits) -> bool {
        self.parse_key(key).is_ok()
    }

    fn input_len(&self, key_len: usize) -> usize {
        self.base.input_len(self.base_key_len(key_len))
    }

    fn output_len(&self, key_len: usize) -> usize {
        self.base.output_len(self.base_key_len(key_len))
    }

    fn step_bound(&self, key_len: usize) -> u64 {
        1 + self.base.step_bound(self.base_key_len(key_len))
    }

    fn eval_raw(&self, key: &Bits, input: &Bits, ctx: &EvalCtx) -> (Bits, u64) {
        let (base_key, eps16) = self.parse_key(key).expect("validated key");
        let (out, steps) = self.base.eval_raw(&base_key, input, ctx);
        let mut h = Sha256::new();
        h.update(b"wbc-arena/fault/v1");
        h.update(key.packed());
        h.update(input.packed());
        let digest = h.finalize();
        let draw = u64::from_be_bytes(digest[..8].try_into().unwrap());
        let threshold = (eps16 as u64) << 48;
        let out = if draw < threshold && !out.is_empty() {
            let mask = Bits::concat(&[&Bits::from_u64_be(1, 1), &Bits::zeros(out.len() - 1)]);
            out.xor(&mask).expect("lengths match")
        } else {
            out
        };
        (out, steps + 1)
    }

    fn sample_key(&self, k: usize, rng: &mut RngStream) -> Result<Bits> {
        let base_k = self.base_key_len(k);
        if base_k == 0 {
            return Err(Error::Unsamplable { k });
        }
        let base_key = self.base.sample_key(base_k, rng)?;
        Ok(FaultyFamily::make_key(&base_key, 6554))
    }
}

pub fn faulty_over(base: FamilyRef) -> Arc<FaultyFamily> {
    Arc::new(FaultyFamily::new(base))
}
