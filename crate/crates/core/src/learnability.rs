//! Learner harnesses: can a family member be reconstructed from oracle
//! access, exactly or on a random input?
//!
//! A learner queries the member through a budget-enforced oracle and emits a
//! program X. An exact trial compares X with the member over the whole input
//! space; an approximate trial compares on one uniform input. Exact success
//! is only credited on an authoritative basis (exhaustive enumeration, or
//! identical canonical serializations); when the input space is too large to
//! enumerate, the sampled verdict is reported but scored as a non-success.

use std::sync::Arc;

use serde::Serialize;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::family::{eval_family, EvalCtx, Family, FamilyRef, FamilyRegistry};
use crate::poly::Poly;
use crate::program::{
    eval_program, serialize_program, EqualityBasis, EvalStatus, ProgramValue, EXHAUSTIVE_CAP_BITS,
};
use crate::rng::RngStream;

/// Inputs drawn for the non-authoritative sampled equality basis.
pub const SAMPLED_EQUALITY_POINTS: u32 = 1000;

type LearnerFn = dyn Fn(&mut LearnerCtx<'_>) -> Result<ProgramValue> + Send + Sync;

#[derive(Clone)]
pub struct Learner {
    pub learner_id: String,
    pub query_budget: u64,
    /// Bound on the emitted program's byte size, in the key bit-length.
    pub output_size_poly: Poly,
    /// Step budget for the emitted program, in the member's step count.
    pub step_slowdown_poly: Poly,
    algorithm: Arc<LearnerFn>,
}

impl Learner {
    pub fn new(
        id: &str,
        query_budget: u64,
        output_size_poly: Poly,
        step_slowdown_poly: Poly,
        algorithm: Arc<LearnerFn>,
    ) -> Self {
        Learner {
            learner_id: id.to_string(),
            query_budget,
            output_size_poly,
            step_slowdown_poly,
            algorithm,
        }
    }
}

/// What a learner sees: the security parameter, the family descriptor, an
/// oracle for the hidden member, and its own coins. Oracle interactions are
/// recorded and budget-enforced.
pub struct LearnerCtx<'a> {
    k: usize,
    family: &'a dyn Family,
    key: &'a Bits,
    eval: &'a EvalCtx,
    rng: &'a mut RngStream,
    budget: u64,
    transcript: Vec<(Bits, Bits)>,
}

impl<'a> LearnerCtx<'a> {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn family_id(&self) -> &str {
        self.family.family_id()
    }

    pub fn input_len(&self) -> usize {
        self.family.input_len(self.key.len())
    }

    pub fn output_len(&self) -> usize {
        self.family.output_len(self.key.len())
    }

    pub fn query(&mut self, input: &Bits) -> Result<Bits> {
        if self.transcript.len() as u64 >= self.budget {
            return Err(Error::BudgetExceeded(format!(
                "learner exhausted its {} oracle queries",
                self.budget
            )));
        }
        let (out, _) = eval_family(self.family, self.key, input, self.eval)?;
        self.transcript.push((input.clone(), out.clone()));
        Ok(out)
    }

    pub fn queries_made(&self) -> u64 {
        self.transcript.len() as u64
    }

    pub fn transcript(&self) -> &[(Bits, Bits)] {
        &self.transcript
    }

    pub fn rng(&mut self) -> &mut RngStream {
        self.rng
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LearnMode {
    Exact,
    Approx,
}

impl LearnMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(LearnMode::Exact),
            "approx" | "approximate" => Ok(LearnMode::Approx),
            other => Err(Error::Config(format!("unknown learn mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LearnTrial {
    /// What the trial scores: for Exact mode, agreement on an authoritative
    /// basis; for Approx mode, agreement on the sampled input.
    pub success: bool,
    /// Whether any disagreement was observed at all.
    pub agreed: bool,
    pub basis: EqualityBasis,
    pub queries: u64,
}

/// One exact-learning trial with a freshly sampled key.
pub fn run_exact_learning_trial(
    family: &FamilyRef,
    learner: &Learner,
    k: usize,
    eval: &EvalCtx,
    rng: &mut RngStream,
) -> Result<LearnTrial> {
    let key = family.sample_key(k, rng)?;
    run_exact_learning_trial_with_key(family, &key, learner, eval, rng)
}

pub fn run_exact_learning_trial_with_key(
    family: &FamilyRef,
    key: &Bits,
    learner: &Learner,
    eval: &EvalCtx,
    rng: &mut RngStream,
) -> Result<LearnTrial> {
    let (program, queries) = run_learner(family, key, learner, eval, rng)?;
    enforce_size_bound(learner, key, &program)?;

    // Canonical serializations are injective and evaluation is
    // deterministic, so byte equality certifies functional equality.
    let member = ProgramValue::Native {
        family_id: family.family_id().to_string(),
        key: key.clone(),
    };
    if serialize_program(&program) == serialize_program(&member) {
        return Ok(LearnTrial {
            success: true,
            agreed: true,
            basis: EqualityBasis::Exhaustive,
            queries,
        });
    }

    let input_len = family.input_len(key.len());
    if input_len <= EXHAUSTIVE_CAP_BITS {
        let mut agreed = true;
        for v in 0..(1u64 << input_len) {
            let a = Bits::from_u64_be(v, input_len);
            if !agree_on(family, key, learner, &program, &a, eval) {
                agreed = false;
                break;
            }
        }
        Ok(LearnTrial {
            success: agreed,
            agreed,
            basis: EqualityBasis::Exhaustive,
            queries,
        })
    } else {
        let mut agreed = true;
        for _ in 0..SAMPLED_EQUALITY_POINTS {
            let a = rng.bits(input_len);
            if !agree_on(family, key, learner, &program, &a, eval) {
                agreed = false;
                break;
            }
        }
        // sampled agreement is not authoritative: never an exact success
        Ok(LearnTrial {
            success: false,
            agreed,
            basis: EqualityBasis::Sampled(SAMPLED_EQUALITY_POINTS),
            queries,
        })
    }
}

/// One approximate-learning trial: fresh key, fresh uniform input.
pub fn run_approx_learning_trial(
    family: &FamilyRef,
    learner: &Learner,
    k: usize,
    eval: &EvalCtx,
    rng: &mut RngStream,
) -> Result<LearnTrial> {
    let key = family.sample_key(k, rng)?;
    run_approx_learning_trial_with_key(family, &key, learner, eval, rng)
}

pub fn run_approx_learning_trial_with_key(
    family: &FamilyRef,
    key: &Bits,
    learner: &Learner,
    eval: &EvalCtx,
    rng: &mut RngStream,
) -> Result<LearnTrial> {
    let (program, queries) = run_learner(family, key, learner, eval, rng)?;
    enforce_size_bound(learner, key, &program)?;
    let input_len = family.input_len(key.len());
    let a = rng.bits(input_len);
    let ok = agree_on(family, key, learner, &program, &a, eval);
    Ok(LearnTrial {
        success: ok,
        agreed: ok,
        basis: EqualityBasis::Sampled(1),
        queries,
    })
}

fn run_learner(
    family: &FamilyRef,
    key: &Bits,
    learner: &Learner,
    eval: &EvalCtx,
    rng: &mut RngStream,
) -> Result<(ProgramValue, u64)> {
    let mut ctx = LearnerCtx {
        k: key.len(),
        family: family.as_ref(),
        key,
        eval,
        rng,
        budget: learner.query_budget,
        transcript: Vec::new(),
    };
    let program = (learner.algorithm)(&mut ctx)?;
    Ok((program, ctx.queries_made()))
}

fn enforce_size_bound(learner: &Learner, key: &Bits, program: &ProgramValue) -> Result<()> {
    let size = program.program_size();
    let bound = learner.output_size_poly.eval(key.len() as u64) as usize;
    if size > bound {
        return Err(Error::SizeBoundViolated { size, bound });
    }
    Ok(())
}

fn agree_on(
    family: &FamilyRef,
    key: &Bits,
    learner: &Learner,
    program: &ProgramValue,
    input: &Bits,
    eval: &EvalCtx,
) -> bool {
    let Ok((reference, steps)) = eval_family(family.as_ref(), key, input, eval) else {
        return false;
    };
    let budget = learner.step_slowdown_poly.eval(steps);
    match eval_program(program, input, budget, eval) {
        Ok(outcome) => outcome.status == EvalStatus::Ok && outcome.output == Some(reference),
        Err(_) => false,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LearnReport {
    pub family_id: String,
    pub learner_id: String,
    pub k: usize,
    pub mode: LearnMode,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    /// Basis label for the report: "exhaustive", "sampled(n)".
    pub equality_basis: String,
}

impl LearnReport {
    pub fn csv_header() -> &'static str {
        "family_id,learner_id,k,mode,trials,successes,rate,basis"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.family_id,
            self.learner_id,
            self.k,
            match self.mode {
                LearnMode::Exact => "exact",
                LearnMode::Approx => "approx",
            },
            self.trials,
            self.successes,
            self.success_rate,
            self.equality_basis
        )
    }
}

fn basis_label(basis: EqualityBasis) -> String {
    match basis {
        EqualityBasis::Exhaustive => "exhaustive".to_string(),
        EqualityBasis::Sampled(n) => format!("sampled({n})"),
    }
}

/// Aggregate independent trials with derived per-trial streams. Learner
/// errors abort the estimate and propagate.
pub fn estimate_learnability(
    registry: &Arc<FamilyRegistry>,
    family: &FamilyRef,
    learner: &Learner,
    k: usize,
    trials: u64,
    mode: LearnMode,
    seed: u64,
) -> Result<LearnReport> {
    assert!(trials >= 1);
    let mut successes = 0u64;
    let mut basis = None;
    for t in 0..trials {
        let eval = EvalCtx::new(Arc::clone(registry), RngStream::derive(seed, "learn-env", &[t]));
        let mut rng = RngStream::derive(seed, "learn", &[t]);
        let trial = match mode {
            LearnMode::Exact => run_exact_learning_trial(family, learner, k, &eval, &mut rng)?,
            LearnMode::Approx => run_approx_learning_trial(family, learner, k, &eval, &mut rng)?,
        };
        if trial.success {
            successes += 1;
        }
        basis.get_or_insert(trial.basis);
    }
    Ok(LearnReport {
        family_id: family.family_id().to_string(),
        learner_id: learner.learner_id.clone(),
        k,
        mode,
        trials,
        successes,
        success_rate: successes as f64 / trials as f64,
        equality_basis: basis_label(basis.expect("at least one trial")),
    })
}

/// The declared key association behind a learner reduction: for every key
/// of the outer family, a key of the inner family computing the same
/// function. The harness uses it to line trials up; the composed learner
/// itself never touches it.
#[derive(Clone)]
pub struct KeyEmbedding {
    pub map: Arc<dyn Fn(&Bits) -> Bits + Send + Sync>,
}

/// A learner for Q1 that runs a Q2-learner, answering its oracle queries
/// verbatim from the Q1 oracle and returning its output unchanged. Query
/// counts are identical by construction. Useful when each Q1 member is
/// promised to coincide with some Q2 member (see [`KeyEmbedding`]).
pub fn compose_learner(inner: &Learner, _embed: &KeyEmbedding) -> Learner {
    Learner {
        learner_id: format!("compose({})", inner.learner_id),
        query_budget: inner.query_budget,
        output_size_poly: inner.output_size_poly.clone(),
        step_slowdown_poly: inner.step_slowdown_poly.clone(),
        algorithm: Arc::clone(&inner.algorithm),
    }
}
