//! Program-validating oracle families.
//!
//! A validator is keyed by <q, q', a> over a base family Q. Its input is a
//! serialized program Y (zero-padded to the fixed input width); it runs Y
//! on a under a step budget and outputs the secret q' iff Y(a) agrees with
//! Q^q(a), otherwise all zeros. Malformed programs and budget overruns
//! count as disagreement.

use crate::bits::{decode_fields, encode_fields, Bits};
use crate::error::{Error, Result};
use crate::family::{EvalCtx, Family, FamilyRef};
use crate::program::{deserialize_padded_program, eval_program, EvalStatus};
use crate::rng::RngStream;

/// Fixed program-input width in bits (byte aligned).
pub const PROGRAM_INPUT_BITS: usize = 8192;

/// Budget for submitted programs: this many times the base family's
/// declared step bound.
pub const BUDGET_FACTOR: u64 = 4;

pub struct FindqFamily {
    id: String,
    base: FamilyRef,
    program_input_bits: usize,
}

impl FindqFamily {
    pub fn new(base: FamilyRef) -> Self {
        FindqFamily {
            id: format!("findq-{}", base.family_id()),
            base,
            program_input_bits: PROGRAM_INPUT_BITS,
        }
    }

    pub fn base(&self) -> &FamilyRef {
        &self.base
    }

    pub fn make_key(&self, q: &Bits, q_prime: &Bits, a: &Bits) -> Bits {
        encode_fields(&[q, q_prime, a])
    }

    pub fn parse_key(&self, key: &Bits) -> Result<(Bits, Bits, Bits)> {
        let fields = decode_fields(key, 3).map_err(|_| Error::KeyRejected)?;
        let q = &fields[0];
        let q_prime = &fields[1];
        let a = &fields[2];
        if !self.base.key_is_valid(q)
            || q_prime.len() != q.len()
            || a.len() != self.base.input_len(q.len())
        {
            return Err(Error::KeyRejected);
        }
        Ok((q.clone(), q_prime.clone(), a.clone()))
    }

    /// Recover the base key length from the encoded key length (three
    /// 32-bit field prefixes, q, q' of equal length, and one base input).
    fn base_key_len(&self, key_len: usize) -> usize {
        for k in 1..=key_len {
            if 96 + 2 * k + self.base.input_len(k) == key_len {
                return k;
            }
        }
        1
    }

    pub fn program_budget(&self, base_key_len: usize) -> u64 {
        BUDGET_FACTOR * self.base.step_bound(base_key_len)
    }
}

impl Family for FindqFamily {
    fn family_id(&self) -> &str {
        &self.id
    }

    fn key_is_valid(&self, key: &Bits) -> bool {
        self.parse_key(key).is_ok()
    }

    fn input_len(&self, _key_len: usize) -> usize {
        self.program_input_bits
    }

    fn output_len(&self, key_len: usize) -> usize {
        self.base_key_len(key_len)
    }

    fn step_bound(&self, key_len: usize) -> u64 {
        let k = self.base_key_len(key_len);
        2 + self.base.step_bound(k) + self.program_budget(k)
    }

    fn eval_raw(&self, key: &Bits, input: &Bits, ctx: &EvalCtx) -> (Bits, u64) {
        let (q, q_prime, a) = self.parse_key(key).expect("validated key");
        let (reference, ref_steps) = self.base.eval_raw(&q, &a, ctx);
        let budget = self.program_budget(q.len());
        let mut steps = 2 + ref_steps;
        let released = match deserialize_padded_program(input.packed()) {
            Ok(program) => match eval_program(&program, &a, budget, ctx) {
                Ok(outcome) => {
                    steps += outcome.steps_used;
                    outcome.status == EvalStatus::Ok && outcome.output == Some(reference)
                }
                Err(_) => false,
            },
            Err(_) => false,
        };
        let out = if released {
            q_prime
        } else {
            Bits::zeros(q.len())
        };
        (out, steps)
    }

    fn sample_key(&self, k: usize, rng: &mut RngStream) -> Result<Bits> {
        let q = self.base.sample_key(k, rng)?;
        let q_prime = rng.bits(q.len());
        let a = rng.bits(self.base.input_len(q.len()));
        Ok(self.make_key(&q, &q_prime, &a))
    }

    fn validator_base_id(&self) -> Option<&str> {
        Some(self.base.family_id())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{eval_family, FamilyRegistry};
    use crate::program::ProgramValue;
    use crate::schemes::toy::PrfFamily;
    use std::collections::BTreeMap;
    use std::sync::Arc;

    fn setup() -> (Arc<FindqFamily>, EvalCtx, Bits, Bits, Bits) {
        let base: FamilyRef = Arc::new(PrfFamily);
        let findq = Arc::new(FindqFamily::new(Arc::clone(&base)));
        let mut reg = FamilyRegistry::new();
        reg.insert(base);
        reg.insert(findq.clone() as FamilyRef);
        let ctx = EvalCtx::new(Arc::new(reg), RngStream::new(0, 0));
        let mut rng = RngStream::new(42, 0);
        let q = rng.bits(16);
        let q_prime = rng.bits(16);
        let a = rng.bits(16);
        (findq, ctx, q, q_prime, a)
    }

    #[test]
    fn honest_program_releases_secret() {
        let (findq, ctx, q, q_prime, a) = setup();
        let key = findq.make_key(&q, &q_prime, &a);
        let y = ProgramValue::Native {
            family_id: "prf".into(),
            key: q,
        };
        let input = y.to_padded_input(PROGRAM_INPUT_BITS).unwrap();
        let (out, _) = eval_family(findq.as_ref(), &key, &input, &ctx).unwrap();
        assert_eq!(out, q_prime);
    }

    #[test]
    fn disagreeing_program_gets_zeros() {
        let (findq, ctx, q, q_prime, a) = setup();
        let key = findq.make_key(&q, &q_prime, &a);
        let table = ProgramValue::table(16, 16, BTreeMap::new()).unwrap();
        let input = table.to_padded_input(PROGRAM_INPUT_BITS).unwrap();
        let (out, _) = eval_family(findq.as_ref(), &key, &input, &ctx).unwrap();
        assert_eq!(out, Bits::zeros(16));
        assert_ne!(out, q_prime);
    }

    #[test]
    fn malformed_program_gets_zeros() {
        let (findq, ctx, q, q_prime, a) = setup();
        let key = findq.make_key(&q, &q_prime, &a);
        let mut bytes = vec![0xFFu8];
        bytes.resize(PROGRAM_INPUT_BITS / 8, 0);
        let input = Bits::from_bytes(&bytes);
        let (out, _) = eval_family(findq.as_ref(), &key, &input, &ctx).unwrap();
        assert_eq!(out, Bits::zeros(16));
    }

    #[test]
    fn key_structure_is_enforced() {
        let (findq, _ctx, q, q_prime, a) = setup();
        assert!(findq.key_is_valid(&findq.make_key(&q, &q_prime, &a)));
        let short = Bits::from_u64_be(1, 8);
        assert!(!findq.key_is_valid(&findq.make_key(&q, &short, &a)));
        assert!(!findq.key_is_valid(&Bits::from_u64_be(7, 48)));
    }

    #[test]
    fn validator_reports_its_base() {
        let (findq, _, _, _, _) = setup();
        assert_eq!(findq.validator_base_id(), Some("prf"));
        assert_eq!(findq.family_id(), "findq-prf");
    }
}
