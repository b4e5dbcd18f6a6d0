//! Obfuscators, correctness checkers, soundness-game estimators, and the
//! machinery for families with in-key randomness.
//!
//! An obfuscator is a randomized transform from (family, key) to an
//! executable program. Correctness is checked empirically: sampled keys and
//! inputs, outputs compared against the member, program size and step counts
//! held to the declared polynomials. Soundness games (predicate and
//! indistinguishability style) are estimated for concrete
//! (adversary, simulator) pairs; verdicts are instance bounds for those
//! pairs, never universal claims.

use std::sync::Arc;

use serde::Serialize;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::family::{eval_family, EvalCtx, FamilyRef, FamilyRegistry};
use crate::poly::Poly;
use crate::program::{eval_program, EvalOutcome, EvalStatus, ProgramValue};
use crate::rng::RngStream;
use crate::schemes::toy::FaultyFamily;
use crate::stats::AdvantageEstimate;

pub const OBF_IDENTITY: &str = "identity";
pub const OBF_TABLE: &str = "table";
pub const OBF_BITFLIP: &str = "bitflip";

/// Domain cap for the tabulating obfuscator.
pub const TABLE_OBF_CAP_BITS: usize = 12;

type TransformFn =
    dyn Fn(&FamilyRef, &Bits, &EvalCtx, &mut RngStream) -> Result<ProgramValue> + Send + Sync;

#[derive(Clone)]
pub struct Obfuscator {
    pub obfuscator_id: String,
    /// Byte-size bound on the output program, in the key bit-length.
    pub size_poly: Poly,
    /// Step bound on the output program, in the member's step count.
    pub slowdown_poly: Poly,
    transform: Arc<TransformFn>,
}

impl Obfuscator {
    pub fn new(id: &str, size_poly: Poly, slowdown_poly: Poly, transform: Arc<TransformFn>) -> Self {
        assert!(size_poly.is_positive() && slowdown_poly.is_positive());
        Obfuscator {
            obfuscator_id: id.to_string(),
            size_poly,
            slowdown_poly,
            transform,
        }
    }
}

pub fn obfuscate(
    obf: &Obfuscator,
    family: &FamilyRef,
    key: &Bits,
    ctx: &EvalCtx,
    rng: &mut RngStream,
) -> Result<ProgramValue> {
    (obf.transform)(family, key, ctx, rng)
}

/// Emits the member itself: exact functionality by construction, and the
/// embedded key is in plain view of anyone handed the program.
pub fn identity_obfuscator() -> Obfuscator {
    Obfuscator::new(
        OBF_IDENTITY,
        Poly::linear(64, 1),
        Poly::linear(8, 1),
        Arc::new(|family, key, _ctx, _rng| {
            Ok(ProgramValue::Native {
                family_id: family.family_id().to_string(),
                key: key.clone(),
            })
        }),
    )
}

/// Tabulates the member over its whole input space. Only for tiny domains.
pub fn table_obfuscator() -> Obfuscator {
    Obfuscator::new(
        OBF_TABLE,
        Poly::constant(1 << 20),
        Poly::linear(8, 1),
        Arc::new(|family, key, ctx, _rng| {
            let in_len = family.input_len(key.len());
            if in_len > TABLE_OBF_CAP_BITS {
                return Err(Error::DomainTooLarge { input_len: in_len });
            }
            let out_len = family.output_len(key.len());
            let mut entries = std::collections::BTreeMap::new();
            for v in 0..(1u64 << in_len) {
                let a = Bits::from_u64_be(v, in_len);
                let (out, _) = eval_family(family.as_ref(), key, &a, ctx)?;
                if !out.is_zero() {
                    entries.insert(a, out);
                }
            }
            ProgramValue::table(in_len as u32, out_len as u32, entries)
        }),
    )
}

/// Deliberately lossy fixture: wraps the key in the matching fault family
/// so the emitted program disagrees with the member on about a tenth of
/// inputs. The wrapper family must be registered as "faulty-<base>".
pub fn bitflip_obfuscator() -> Obfuscator {
    Obfuscator::new(
        OBF_BITFLIP,
        Poly::linear(128, 1),
        Poly::linear(8, 2),
        Arc::new(|family, key, _ctx, _rng| {
            Ok(ProgramValue::Native {
                family_id: format!("faulty-{}", family.family_id()),
                key: FaultyFamily::make_key(key, 6554),
            })
        }),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrectnessReport {
    pub obfuscator_id: String,
    pub family_id: String,
    pub k: usize,
    pub samples: u64,
    pub failures: u64,
    pub max_size_ratio: f64,
    pub max_slowdown_ratio: f64,
    pub pass: bool,
}

/// Sample keys and inputs, compare the obfuscated program's outputs with
/// the member's, and hold size and steps to the obfuscator's declared
/// polynomials. Budget overruns count as functionality failures. Every
/// `keys_per_batch` consecutive samples share one key and one obfuscation.
#[allow(clippy::too_many_arguments)]
pub fn check_correctness(
    obf: &Obfuscator,
    family: &FamilyRef,
    k: usize,
    samples: u64,
    keys_per_batch: u64,
    ctx: &EvalCtx,
    rng: &mut RngStream,
    fail_threshold: f64,
) -> Result<CorrectnessReport> {
    assert!(samples >= 1 && keys_per_batch >= 1);
    let mut failures = 0u64;
    let mut max_size_ratio = 0f64;
    let mut max_slowdown_ratio = 0f64;
    let mut current: Option<(Bits, ProgramValue)> = None;
    for s in 0..samples {
        if s % keys_per_batch == 0 {
            let key = family.sample_key(k, rng)?;
            let program = obfuscate(obf, family, &key, ctx, rng)?;
            let size_bound = obf.size_poly.eval(key.len() as u64).max(1);
            let ratio = program.program_size() as f64 / size_bound as f64;
            max_size_ratio = max_size_ratio.max(ratio);
            current = Some((key, program));
        }
        let (key, program) = current.as_ref().expect("batch initialized");
        let a = rng.bits(family.input_len(key.len()));
        let (reference, steps) = eval_family(family.as_ref(), key, &a, ctx)?;
        let budget = obf.slowdown_poly.eval(steps).max(1);
        match eval_program(program, &a, budget, ctx) {
            Ok(outcome) => {
                max_slowdown_ratio =
                    max_slowdown_ratio.max(outcome.steps_used as f64 / budget as f64);
                if outcome.status != EvalStatus::Ok || outcome.output != Some(reference) {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    let pass = failures as f64 / samples as f64 <= fail_threshold
        && max_size_ratio <= 1.0
        && max_slowdown_ratio <= 1.0;
    Ok(CorrectnessReport {
        obfuscator_id: obf.obfuscator_id.clone(),
        family_id: family.family_id().to_string(),
        k,
        samples,
        failures,
        max_size_ratio,
        max_slowdown_ratio,
        pass,
    })
}

// ---------------------------------------------------------------------------
// Equality up to in-key randomness
// ---------------------------------------------------------------------------

/// Key equivalence "same program up to the random part", given by a map
/// extracting the non-random component. Reflexivity, symmetry, and
/// transitivity come free from the representation.
#[derive(Clone)]
pub struct TauRelation {
    pub family_id: String,
    canonical_part: Arc<dyn Fn(&Bits) -> Bits + Send + Sync>,
}

impl TauRelation {
    pub fn new(family_id: &str, canonical_part: Arc<dyn Fn(&Bits) -> Bits + Send + Sync>) -> Self {
        TauRelation {
            family_id: family_id.to_string(),
            canonical_part,
        }
    }

    pub fn canonical(&self, key: &Bits) -> Bits {
        (self.canonical_part)(key)
    }

    pub fn related(&self, q1: &Bits, q2: &Bits) -> bool {
        self.canonical(q1) == self.canonical(q2)
    }
}

type DeciderBuilder = dyn Fn(&Bits) -> Result<(Bits, ProgramValue)> + Send + Sync;

/// Builds, from a randomness tape, a key together with a compact decider
/// program Z such that Z(a, z) accepts exactly the outputs that some
/// equivalent key produces on a.
#[derive(Clone)]
pub struct TauDecider {
    pub family_id: String,
    /// Byte bound on the decider program in the security parameter.
    pub size_poly: Poly,
    pub randomness_bits: usize,
    builder: Arc<DeciderBuilder>,
}

impl TauDecider {
    pub fn new(
        family_id: &str,
        size_poly: Poly,
        randomness_bits: usize,
        builder: Arc<DeciderBuilder>,
    ) -> Self {
        TauDecider {
            family_id: family_id.to_string(),
            size_poly,
            randomness_bits,
            builder,
        }
    }

    pub fn build(&self, r: &Bits) -> Result<(Bits, ProgramValue)> {
        let (key, z) = (self.builder)(r)?;
        let bound = self.size_poly.eval(key.len() as u64) as usize;
        let size = z.program_size();
        if size > bound {
            return Err(Error::SizeBoundViolated { size, bound });
        }
        Ok((key, z))
    }
}

/// Run a decider program on (input, candidate output).
pub fn tau_equal_output(
    decider: &ProgramValue,
    input: &Bits,
    candidate: &Bits,
    ctx: &EvalCtx,
) -> Result<bool> {
    let z_input = Bits::concat(&[input, candidate]);
    let outcome = eval_program(decider, &z_input, u64::MAX, ctx)?;
    let out = outcome
        .output
        .ok_or_else(|| Error::MalformedProgram("decider ran out of budget".into()))?;
    Ok(!out.is_zero())
}

/// Like [`check_correctness`] but outputs are compared through the decider
/// instead of bit equality, so re-randomized programs can pass.
#[allow(clippy::too_many_arguments)]
pub fn check_tau_correctness(
    obf: &Obfuscator,
    family: &FamilyRef,
    decider: &TauDecider,
    k: usize,
    samples: u64,
    ctx: &EvalCtx,
    rng: &mut RngStream,
    fail_threshold: f64,
) -> Result<CorrectnessReport> {
    assert!(samples >= 1);
    let mut failures = 0u64;
    let mut max_size_ratio = 0f64;
    let mut max_slowdown_ratio = 0f64;
    for _ in 0..samples {
        let r = rng.bits(decider.randomness_bits);
        let (key, z) = decider.build(&r)?;
        let program = obfuscate(obf, family, &key, ctx, rng)?;
        let size_bound = obf.size_poly.eval(key.len() as u64).max(1);
        max_size_ratio = max_size_ratio.max(program.program_size() as f64 / size_bound as f64);
        let a = rng.bits(family.input_len(key.len()));
        let (_, steps) = eval_family(family.as_ref(), &key, &a, ctx)?;
        let budget = obf.slowdown_poly.eval(steps).max(1);
        match eval_program(&program, &a, budget, ctx) {
            Ok(EvalOutcome {
                status: EvalStatus::Ok,
                output: Some(out),
                steps_used,
            }) => {
                max_slowdown_ratio = max_slowdown_ratio.max(steps_used as f64 / budget as f64);
                if !tau_equal_output(&z, &a, &out, ctx)? {
                    failures += 1;
                }
            }
            _ => failures += 1,
        }
    }
    let pass = failures as f64 / samples as f64 <= fail_threshold
        && max_size_ratio <= 1.0
        && max_slowdown_ratio <= 1.0;
    Ok(CorrectnessReport {
        obfuscator_id: obf.obfuscator_id.clone(),
        family_id: family.family_id().to_string(),
        k,
        samples,
        failures,
        max_size_ratio,
        max_slowdown_ratio,
        pass,
    })
}

// ---------------------------------------------------------------------------
// Soundness games
// ---------------------------------------------------------------------------

/// What a soundness-game participant sees: oracle access to the hidden
/// member (query-budgeted), the ability to run candidate programs, and its
/// own coins. The key never leaves the context.
pub struct SoundnessCtx<'a> {
    k: usize,
    family: &'a FamilyRef,
    key: &'a Bits,
    eval: &'a EvalCtx,
    rng: RngStream,
    queries: u64,
    query_budget: u64,
}

impl<'a> SoundnessCtx<'a> {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn input_len(&self) -> usize {
        self.family.input_len(self.key.len())
    }

    pub fn output_len(&self) -> usize {
        self.family.output_len(self.key.len())
    }

    pub fn oracle(&mut self, input: &Bits) -> Result<Bits> {
        if self.queries >= self.query_budget {
            return Err(Error::BudgetExceeded(format!(
                "soundness oracle budget {} exhausted",
                self.query_budget
            )));
        }
        self.queries += 1;
        let (out, _) = eval_family(self.family.as_ref(), self.key, input, self.eval)?;
        Ok(out)
    }

    pub fn eval_candidate(&self, program: &ProgramValue, input: &Bits) -> Result<EvalOutcome> {
        let budget = 16 * self.family.step_bound(self.key.len()).max(1);
        eval_program(program, input, budget, self.eval)
    }

    /// The native member for an independently sampled key of the same
    /// length as the hidden one.
    pub fn simulate_fresh_member(&mut self) -> Result<ProgramValue> {
        let k = self.key.len();
        let key = self.family.sample_key(k, &mut self.rng)?;
        Ok(ProgramValue::Native {
            family_id: self.family.family_id().to_string(),
            key,
        })
    }

    pub fn rng(&mut self) -> &mut RngStream {
        &mut self.rng
    }
}

#[derive(Clone)]
pub struct KeyPredicate {
    pub id: String,
    pub eval: Arc<dyn Fn(&Bits) -> bool + Send + Sync>,
}

impl KeyPredicate {
    /// Parity of the key's first bit.
    pub fn first_bit() -> Self {
        KeyPredicate {
            id: "first-bit".into(),
            eval: Arc::new(|q: &Bits| q.get(0)),
        }
    }

    /// Parity of all key bits.
    pub fn parity() -> Self {
        KeyPredicate {
            id: "parity".into(),
            eval: Arc::new(|q: &Bits| {
                let mut acc = false;
                for i in 0..q.len() {
                    acc ^= q.get(i);
                }
                acc
            }),
        }
    }
}

type GuessFn = dyn Fn(&mut SoundnessCtx<'_>, &ProgramValue, &Bits) -> bool + Send + Sync;
type SimGuessFn = dyn Fn(&mut SoundnessCtx<'_>, &Bits) -> bool + Send + Sync;
type ProgramSimFn = dyn Fn(&mut SoundnessCtx<'_>, &Bits) -> ProgramValue + Send + Sync;

/// Predicate-game adversary: sees the obfuscation and the aux string,
/// guesses the predicate of the hidden key.
#[derive(Clone)]
pub struct PvbbpAdversary {
    pub id: String,
    pub run: Arc<GuessFn>,
}

/// Predicate-game simulator: same goal, oracle access only.
#[derive(Clone)]
pub struct PvbbpSimulator {
    pub id: String,
    pub run: Arc<SimGuessFn>,
}

/// Distinguisher for the indistinguishability game: accepts or rejects a
/// candidate program.
#[derive(Clone)]
pub struct IndDistinguisher {
    pub id: String,
    pub run: Arc<GuessFn>,
}

/// Program-emitting simulator for the indistinguishability game.
#[derive(Clone)]
pub struct ProgramSimulator {
    pub id: String,
    pub run: Arc<ProgramSimFn>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PvbbpGapReport {
    pub predicate_id: String,
    pub adversary: AdvantageEstimate,
    pub simulator: AdvantageEstimate,
    pub gap: f64,
}

const SOUNDNESS_QUERY_BUDGET: u64 = 1 << 16;

/// Estimate |Pr[A(O(Q,q), z) = pi(q)] - Pr[S(z) = pi(q)]| for one concrete
/// (A, S, pi, z). Both sides use independent derived trial streams.
#[allow(clippy::too_many_arguments)]
pub fn estimate_pvbbp_gap(
    registry: &Arc<FamilyRegistry>,
    family: &FamilyRef,
    obf: &Obfuscator,
    adversary: &PvbbpAdversary,
    simulator: &PvbbpSimulator,
    predicate: &KeyPredicate,
    aux: &Bits,
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<PvbbpGapReport> {
    assert!(trials >= 1);
    let mut adv_wins = 0u64;
    for t in 0..trials {
        let eval = EvalCtx::new(Arc::clone(registry), RngStream::derive(seed, "pvbbp-adv-env", &[t]));
        let mut krng = RngStream::derive(seed, "pvbbp-adv-key", &[t]);
        let key = family.sample_key(k, &mut krng)?;
        let mut orng = RngStream::derive(seed, "pvbbp-adv-obf", &[t]);
        let program = obfuscate(obf, family, &key, &eval, &mut orng)?;
        let mut ctx = SoundnessCtx {
            k,
            family,
            key: &key,
            eval: &eval,
            rng: RngStream::derive(seed, "pvbbp-adv-coins", &[t]),
            queries: 0,
            query_budget: SOUNDNESS_QUERY_BUDGET,
        };
        let guess = (adversary.run)(&mut ctx, &program, aux);
        if guess == (predicate.eval)(&key) {
            adv_wins += 1;
        }
    }
    let mut sim_wins = 0u64;
    for t in 0..trials {
        let eval = EvalCtx::new(Arc::clone(registry), RngStream::derive(seed, "pvbbp-sim-env", &[t]));
        let mut krng = RngStream::derive(seed, "pvbbp-sim-key", &[t]);
        let key = family.sample_key(k, &mut krng)?;
        let mut ctx = SoundnessCtx {
            k,
            family,
            key: &key,
            eval: &eval,
            rng: RngStream::derive(seed, "pvbbp-sim-coins", &[t]),
            queries: 0,
            query_budget: SOUNDNESS_QUERY_BUDGET,
        };
        let guess = (simulator.run)(&mut ctx, aux);
        if guess == (predicate.eval)(&key) {
            sim_wins += 1;
        }
    }
    let adversary_est = AdvantageEstimate::from_counts(adv_wins, trials);
    let simulator_est = AdvantageEstimate::from_counts(sim_wins, trials);
    let gap = (adversary_est.mean - simulator_est.mean).abs();
    Ok(PvbbpGapReport {
        predicate_id: predicate.id.clone(),
        adversary: adversary_est,
        simulator: simulator_est,
        gap,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct IndGapReport {
    pub on_obfuscation: AdvantageEstimate,
    pub on_simulated: AdvantageEstimate,
    pub gap: f64,
}

/// Estimate |Pr[A accepts O(Q,q)] - Pr[A accepts S's output]| for one
/// concrete (A, S, z).
#[allow(clippy::too_many_arguments)]
pub fn estimate_ind_gap(
    registry: &Arc<FamilyRegistry>,
    family: &FamilyRef,
    obf: &Obfuscator,
    distinguisher: &IndDistinguisher,
    simulator: &ProgramSimulator,
    aux: &Bits,
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<IndGapReport> {
    assert!(trials >= 1);
    let run_side = |label: &str, simulated: bool| -> Result<u64> {
        let mut accepts = 0u64;
        for t in 0..trials {
            let eval = EvalCtx::new(
                Arc::clone(registry),
                RngStream::derive(seed, &format!("ind-{label}-env"), &[t]),
            );
            let mut krng = RngStream::derive(seed, &format!("ind-{label}-key"), &[t]);
            let key = family.sample_key(k, &mut krng)?;
            let candidate = if simulated {
                let mut sctx = SoundnessCtx {
                    k,
                    family,
                    key: &key,
                    eval: &eval,
                    rng: RngStream::derive(seed, &format!("ind-{label}-sim"), &[t]),
                    queries: 0,
                    query_budget: SOUNDNESS_QUERY_BUDGET,
                };
                (simulator.run)(&mut sctx, aux)
            } else {
                let mut orng = RngStream::derive(seed, &format!("ind-{label}-obf"), &[t]);
                obfuscate(obf, family, &key, &eval, &mut orng)?
            };
            let mut ctx = SoundnessCtx {
                k,
                family,
                key: &key,
                eval: &eval,
                rng: RngStream::derive(seed, &format!("ind-{label}-coins"), &[t]),
                queries: 0,
                query_budget: SOUNDNESS_QUERY_BUDGET,
            };
            if (distinguisher.run)(&mut ctx, &candidate, aux) {
                accepts += 1;
            }
        }
        Ok(accepts)
    };
    let on_obf = AdvantageEstimate::from_counts(run_side("real", false)?, trials);
    let on_sim = AdvantageEstimate::from_counts(run_side("sim", true)?, trials);
    let gap = (on_obf.mean - on_sim.mean).abs();
    Ok(IndGapReport {
        on_obfuscation: on_obf,
        on_simulated: on_sim,
        gap,
    })
}
