//! Lazily sampled random oracle and the membership family built on it.

use std::collections::HashMap;

use crate::bits::Bits;
use crate::family::{EvalCtx, Family};
use crate::rng::RngStream;

pub const FAMILY_RO: &str = "ro";

/// A per-trial random-oracle table: arbitrary strings to out_len-bit
/// strings, drawn lazily from the trial's environment stream. Repeated
/// queries within a trial answer consistently; distinct trials hold
/// independent tables.
pub struct RoTable {
    entries: HashMap<(usize, Bits), Bits>,
    stream: RngStream,
}

impl RoTable {
    pub fn new(stream: RngStream) -> Self {
        RoTable {
            entries: HashMap::new(),
            stream,
        }
    }

    pub fn query(&mut self, out_len: usize, input: &Bits) -> Bits {
        if let Some(v) = self.entries.get(&(out_len, input.clone())) {
            return v.clone();
        }
        let fresh = self.stream.bits(out_len);
        self.entries
            .insert((out_len, input.clone()), fresh.clone());
        fresh
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Key q, input X, output one bit: 1 iff RO(q || X) = q. Members output 1
/// on roughly a 2^-k fraction of inputs, so the all-zero program agrees
/// with a member almost everywhere while reconstructing the member exactly
/// stays out of reach.
pub struct RoFamily;

impl RoFamily {
    /// Count the inputs of a member that map to 1 under the trial's table,
    /// materializing the full table. Only sensible for small k.
    pub fn census_hits(&self, key: &Bits, ctx: &EvalCtx) -> u64 {
        let k = key.len();
        assert!(k <= 16, "census is exponential in k");
        let mut hits = 0;
        for v in 0..(1u64 << k) {
            let x = Bits::from_u64_be(v, k);
            let probe = Bits::concat(&[key, &x]);
            if ctx.ro().query(k, &probe) == *key {
                hits += 1;
            }
        }
        hits
    }
}

impl Family for RoFamily {
    fn family_id(&self) -> &str {
        FAMILY_RO
    }

    fn key_is_valid(&self, key: &Bits) -> bool {
        !key.is_empty()
    }

    fn input_len(&self, key_len: usize) -> usize {
        key_len
    }

    fn output_len(&self, _key_len: usize) -> usize {
        1
    }

    fn step_bound(&self, key_len: usize) -> u64 {
        2 + key_len as u64
    }

    fn eval_raw(&self, key: &Bits, input: &Bits, ctx: &EvalCtx) -> (Bits, u64) {
        let probe = Bits::concat(&[key, input]);
        let draw = ctx.ro().query(key.len(), &probe);
        let bit = draw == *key;
        (Bits::from_u64_be(bit as u64, 1), 2 + input.len() as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{eval_family, FamilyRegistry};
    use std::sync::Arc;

    fn ctx(seed: u64) -> EvalCtx {
        EvalCtx::new(Arc::new(FamilyRegistry::new()), RngStream::new(seed, 0))
    }

    #[test]
    fn table_is_consistent_within_a_trial() {
        let ctx = ctx(1);
        let q = Bits::from_u64_be(0xAB, 8);
        let x = Bits::from_u64_be(3, 8);
        let probe = Bits::concat(&[&q, &x]);
        let a = ctx.ro().query(8, &probe);
        let b = ctx.ro().query(8, &probe);
        assert_eq!(a, b);
    }

    #[test]
    fn tables_differ_across_trials() {
        let c1 = ctx(1);
        let c2 = ctx(2);
        let probe = Bits::from_u64_be(0xDEAD, 16);
        let mut same = 0;
        for i in 0..32u64 {
            let p = Bits::concat(&[&probe, &Bits::from_u64_be(i, 8)]);
            if c1.ro().query(16, &p) == c2.ro().query(16, &p) {
                same += 1;
            }
        }
        assert!(same < 8);
    }

    #[test]
    fn family_output_matches_census() {
        let fam = RoFamily;
        let ctx = ctx(3);
        let q = Bits::from_u64_be(0x5C, 8);
        let hits = fam.census_hits(&q, &ctx);
        let mut ones = 0;
        for v in 0..256u64 {
            let x = Bits::from_u64_be(v, 8);
            let (out, _) = eval_family(&fam, &q, &x, &ctx).unwrap();
            if out.get(0) {
                ones += 1;
            }
        }
        assert_eq!(ones, hits);
    }

    #[test]
    fn fresh_pairs_rarely_hit() {
        let fam = RoFamily;
        let ctx = ctx(4);
        let mut rng = RngStream::new(5, 0);
        let mut ones = 0;
        for _ in 0..2000 {
            let q = rng.bits(32);
            let x = rng.bits(32);
            let (out, _) = eval_family(&fam, &q, &x, &ctx).unwrap();
            if out.get(0) {
                ones += 1;
            }
        }
        assert_eq!(ones, 0, "a 2^-32 event fired in 2000 draws");
    }
}
