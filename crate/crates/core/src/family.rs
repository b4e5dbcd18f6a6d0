//! Keyed deterministic program families and step-accounted evaluation.
//!
//! A family is a two-tape program: a key tape selecting the member and a
//! standard input tape. Evaluation is deterministic and reports an abstract
//! step count bounded by the family's declared step polynomial in the key
//! length. Input length is a fixed function of the key length.

use std::cell::{RefCell, RefMut};
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::schemes::ro::RoTable;

pub type FamilyRef = Arc<dyn Family>;

pub trait Family: Send + Sync {
    fn family_id(&self) -> &str;

    /// Fixed key bit-length for structured families (`None` means keys of
    /// any length `>= min_k` are meaningful).
    fn natural_k(&self) -> Option<usize> {
        None
    }

    fn min_k(&self) -> usize {
        1
    }

    fn key_is_valid(&self, key: &Bits) -> bool;

    /// Input bit-length as a function of the key bit-length.
    fn input_len(&self, key_len: usize) -> usize;

    /// Output bit-length as a function of the key bit-length.
    fn output_len(&self, key_len: usize) -> usize;

    /// Declared bound on evaluation steps in the key bit-length.
    fn step_bound(&self, key_len: usize) -> u64;

    /// Evaluate on a valid (key, input) pair; returns (output, steps used).
    /// Callers go through [`eval_family`], which validates the pair first.
    fn eval_raw(&self, key: &Bits, input: &Bits, ctx: &EvalCtx) -> (Bits, u64);

    /// Uniform key over the valid strings of length k. The default rejection
    /// sampler suits families whose key space is dense in {0,1}^k.
    fn sample_key(&self, k: usize, rng: &mut RngStream) -> Result<Bits> {
        if k < self.min_k() {
            return Err(Error::Unsamplable { k });
        }
        if let Some(nat) = self.natural_k() {
            if k != nat {
                return Err(Error::Unsamplable { k });
            }
        }
        for _ in 0..4096 {
            let candidate = rng.bits(k);
            if self.key_is_valid(&candidate) {
                return Ok(candidate);
            }
        }
        Err(Error::Unsamplable { k })
    }

    /// For program-validating oracles: the id of the base family whose
    /// programs this oracle accepts and rewards.
    fn validator_base_id(&self) -> Option<&str> {
        None
    }
}

/// Validating wrapper around [`Family::eval_raw`].
pub fn eval_family(
    family: &dyn Family,
    key: &Bits,
    input: &Bits,
    ctx: &EvalCtx,
) -> Result<(Bits, u64)> {
    if !family.key_is_valid(key) {
        return Err(Error::KeyRejected);
    }
    let expected = family.input_len(key.len());
    if input.len() != expected {
        return Err(Error::InputLengthMismatch {
            expected,
            got: input.len(),
        });
    }
    let (out, steps) = family.eval_raw(key, input, ctx);
    debug_assert!(
        steps <= family.step_bound(key.len()),
        "{} exceeded its declared step bound",
        family.family_id()
    );
    Ok((out, steps))
}

#[derive(Default)]
pub struct FamilyRegistry {
    map: BTreeMap<String, FamilyRef>,
}

impl FamilyRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, family: FamilyRef) {
        self.map.insert(family.family_id().to_string(), family);
    }

    pub fn get(&self, id: &str) -> Result<&FamilyRef> {
        self.map.get(id).ok_or_else(|| Error::UnknownId {
            registry: "family",
            id: id.to_string(),
        })
    }

    pub fn ids(&self) -> Vec<String> {
        self.map.keys().cloned().collect()
    }
}

/// Per-trial evaluation context: the family registry (for programs that
/// name families) and the trial's lazily sampled random-oracle table.
/// Trials own their context; nothing is shared across trials.
pub struct EvalCtx {
    registry: Arc<FamilyRegistry>,
    ro: RefCell<RoTable>,
}

impl EvalCtx {
    pub fn new(registry: Arc<FamilyRegistry>, ro_stream: RngStream) -> Self {
        EvalCtx {
            registry,
            ro: RefCell::new(RoTable::new(ro_stream)),
        }
    }

    pub fn registry(&self) -> &FamilyRegistry {
        &self.registry
    }

    pub fn registry_arc(&self) -> Arc<FamilyRegistry> {
        Arc::clone(&self.registry)
    }

    pub fn ro(&self) -> RefMut<'_, RoTable> {
        self.ro.borrow_mut()
    }
}
