//! The experiment engine: black-box and white-box simulations, query
//! transcripts, win predicates, advantage estimation, and the white-box gap.
//!
//! An experiment derives oracle keys from a random tape r, runs the
//! adversary against the oracles under a step budget (one step per query,
//! one for the strategy invocation), records every query, and scores the
//! run with the specification's win predicate. The white-box variants
//! additionally hand the adversary one or two obfuscations of claimed-
//! obfuscatable oracles. Oracles are pure evaluator calls on immutable
//! keys, so they cannot carry state between queries.

use std::io::Write;
use std::sync::Arc;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::family::{eval_family, EvalCtx, FamilyRef, FamilyRegistry};
use crate::obfuscation::{obfuscate, Obfuscator};
use crate::poly::Poly;
use crate::program::{eval_program, EvalOutcome, ProgramValue};
use crate::rng::{derive_seed, RngStream};
use crate::stats::AdvantageEstimate;

/// One oracle interaction: logical time (query sequence number, from 1),
/// 1-based oracle index, input, output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryRecord {
    pub t: u64,
    pub i: usize,
    pub input: Bits,
    pub output: Bits,
}

/// The ordered query set of one run plus the adversary's output.
#[derive(Clone, Debug)]
pub struct Transcript {
    pub records: Vec<QueryRecord>,
    pub s: Bits,
    pub steps_used: u64,
    pub budget_exceeded: bool,
}

impl Transcript {
    /// JSON-lines export: one record per query, then a footer with the
    /// adversary output, the result bit, and the step count.
    pub fn write_jsonl<W: Write>(&self, result: bool, mut w: W) -> std::io::Result<()> {
        for r in &self.records {
            writeln!(
                w,
                "{{\"t\":{},\"i\":{},\"input_hex\":\"{}\",\"output_hex\":\"{}\"}}",
                r.t,
                r.i,
                r.input.hex(),
                r.output.hex()
            )?;
        }
        writeln!(
            w,
            "{{\"s_hex\":\"{}\",\"result\":{},\"steps\":{}}}",
            self.s.hex(),
            result as u8,
            self.steps_used
        )
    }
}

pub struct WinInput<'a> {
    pub k: usize,
    pub r: &'a Bits,
    pub records: &'a [QueryRecord],
    pub s: &'a Bits,
}

type KeyDeriveFn = dyn Fn(usize, &Bits) -> Result<Vec<Bits>> + Send + Sync;
type WinFn = dyn Fn(&WinInput<'_>) -> bool + Send + Sync;
type AuxFn = dyn Fn(usize, &Bits) -> Bits + Send + Sync;

/// An experiment definition: ordered oracle families, key derivation from
/// the input tape, tape length and run-time polynomials, the win predicate,
/// and which oracles are claimed obfuscatable.
#[derive(Clone)]
pub struct Specification {
    pub spec_id: String,
    pub families: Vec<FamilyRef>,
    pub p_in: Poly,
    pub p_run: Poly,
    key_derive: Arc<KeyDeriveFn>,
    win: Arc<WinFn>,
    pub obfuscatable_claims: Vec<usize>,
    /// Extra adversary input derived from r (delivered alongside the
    /// security parameter and spec id), empty for most specs.
    aux: Option<Arc<AuxFn>>,
    /// Bit length of the adversary output the win predicate expects.
    pub output_len: Arc<dyn Fn(usize) -> usize + Send + Sync>,
}

impl Specification {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        spec_id: &str,
        families: Vec<FamilyRef>,
        p_in: Poly,
        p_run: Poly,
        key_derive: Arc<KeyDeriveFn>,
        win: Arc<WinFn>,
        obfuscatable_claims: Vec<usize>,
        aux: Option<Arc<AuxFn>>,
        output_len: Arc<dyn Fn(usize) -> usize + Send + Sync>,
    ) -> Self {
        Specification {
            spec_id: spec_id.to_string(),
            families,
            p_in,
            p_run,
            key_derive,
            win,
            obfuscatable_claims,
            aux,
            output_len,
        }
    }

    pub fn derive_keys(&self, k: usize, r: &Bits) -> Result<Vec<Bits>> {
        (self.key_derive)(k, r)
    }

    pub fn win(&self, input: &WinInput<'_>) -> bool {
        (self.win)(input)
    }

    pub fn aux_input(&self, k: usize, r: &Bits) -> Bits {
        match &self.aux {
            Some(f) => f(k, r),
            None => Bits::new(),
        }
    }

    pub fn n_oracles(&self) -> usize {
        self.families.len()
    }
}

/// Per-trial coin bundle: adversary coins, environment coins (random-oracle
/// draws), obfuscator coins.
pub struct Coins {
    pub adversary: RngStream,
    pub env: RngStream,
    pub obfuscator: RngStream,
}

impl Coins {
    pub fn derive(seed: u64, trial: u64) -> Self {
        Coins {
            adversary: RngStream::derive(seed, "adv", &[trial]),
            env: RngStream::derive(seed, "env", &[trial]),
            obfuscator: RngStream::derive(seed, "obf", &[trial]),
        }
    }
}

/// What a strategy sees during a run. Queries cost one step each and are
/// recorded; the strategy invocation itself costs one step. Once the budget
/// is exhausted every further query returns `None` and the run is scored 0.
pub struct GameCtx<'a> {
    k: usize,
    spec: &'a Specification,
    keys: &'a [Bits],
    eval: &'a EvalCtx,
    rng: RngStream,
    whitebox: Vec<(usize, ProgramValue)>,
    aux: Bits,
    records: Vec<QueryRecord>,
    steps: u64,
    budget: u64,
    exceeded: bool,
}

impl<'a> GameCtx<'a> {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn spec_id(&self) -> &str {
        &self.spec.spec_id
    }

    pub fn n_oracles(&self) -> usize {
        self.spec.families.len()
    }

    pub fn oracle_family_id(&self, i: usize) -> &str {
        self.spec.families[i - 1].family_id()
    }

    /// The base-family id a validating oracle rewards, if oracle i is one.
    pub fn validator_base_id(&self, i: usize) -> Option<&str> {
        self.spec.families[i - 1].validator_base_id()
    }

    pub fn oracle_input_len(&self, i: usize) -> usize {
        self.spec.families[i - 1].input_len(self.keys[i - 1].len())
    }

    pub fn oracle_output_len(&self, i: usize) -> usize {
        self.spec.families[i - 1].output_len(self.keys[i - 1].len())
    }

    /// Expected adversary-output length for this spec.
    pub fn expected_output_len(&self) -> usize {
        (self.spec.output_len)(self.k)
    }

    /// White-box inputs: (oracle index, program) pairs, empty in black-box
    /// runs.
    pub fn whitebox_programs(&self) -> &[(usize, ProgramValue)] {
        &self.whitebox
    }

    pub fn aux(&self) -> &Bits {
        &self.aux
    }

    pub fn rng(&mut self) -> &mut RngStream {
        &mut self.rng
    }

    /// Uniform bits of the spec's expected output length.
    pub fn guess_output(&mut self) -> Bits {
        let len = self.expected_output_len();
        self.rng.bits(len)
    }

    /// Uniform bits sized for oracle i's input tape.
    pub fn random_oracle_input(&mut self, i: usize) -> Bits {
        let len = self.oracle_input_len(i);
        self.rng.bits(len)
    }

    /// Query oracle i (1-based). Returns `None` once the run budget is
    /// exhausted. Malformed-length queries are answered with the empty
    /// string (and recorded), keeping oracles total.
    pub fn query(&mut self, i: usize, input: &Bits) -> Option<Bits> {
        assert!(i >= 1 && i <= self.spec.families.len(), "oracle index {i}");
        if self.steps >= self.budget {
            self.exceeded = true;
            return None;
        }
        self.steps += 1;
        let family = &self.spec.families[i - 1];
        let key = &self.keys[i - 1];
        let output = match eval_family(family.as_ref(), key, input, self.eval) {
            Ok((out, _)) => out,
            Err(_) => Bits::new(),
        };
        let t = self.records.len() as u64 + 1;
        self.records.push(QueryRecord {
            t,
            i,
            input: input.clone(),
            output: output.clone(),
        });
        Some(output)
    }

    /// Run a candidate program locally (adversary-side computation, covered
    /// by the coarse per-invocation step charge).
    pub fn eval_candidate(&self, program: &ProgramValue, input: &Bits) -> Result<EvalOutcome> {
        eval_program(program, input, 1 << 24, self.eval)
    }
}

type StrategyFn = dyn Fn(&mut GameCtx<'_>) -> Bits + Send + Sync;

#[derive(Clone)]
pub struct Adversary {
    pub adversary_id: String,
    strategy: Arc<StrategyFn>,
}

impl Adversary {
    pub fn new(id: &str, strategy: Arc<StrategyFn>) -> Self {
        Adversary {
            adversary_id: id.to_string(),
            strategy,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GameRun {
    pub result: bool,
    pub transcript: Transcript,
}

fn run_simulation(
    spec: &Specification,
    adversary: &Adversary,
    k: usize,
    r: &Bits,
    coins: Coins,
    eval: &EvalCtx,
    whitebox: Vec<(usize, ProgramValue)>,
) -> Result<GameRun> {
    let expected_r = spec.p_in.eval(k as u64) as usize;
    if r.len() != expected_r {
        return Err(Error::LengthMismatch(format!(
            "input tape must be {expected_r} bits at k={k}, got {}",
            r.len()
        )));
    }
    let keys = spec.derive_keys(k, r)?;
    assert_eq!(keys.len(), spec.families.len());
    let mut ctx = GameCtx {
        k,
        spec,
        keys: &keys,
        eval,
        rng: coins.adversary,
        whitebox,
        aux: spec.aux_input(k, r),
        records: Vec::new(),
        steps: 1, // strategy invocation charge
        budget: spec.p_run.eval(k as u64),
        exceeded: false,
    };
    let s = (adversary.strategy)(&mut ctx);
    let GameCtx {
        records,
        steps,
        exceeded,
        ..
    } = ctx;
    let win_input = WinInput {
        k,
        r,
        records: &records,
        s: &s,
    };
    let result = !exceeded && spec.win(&win_input);
    Ok(GameRun {
        result,
        transcript: Transcript {
            records,
            s,
            steps_used: steps,
            budget_exceeded: exceeded,
        },
    })
}

/// Black-box simulation: oracles only.
pub fn run_blackbox(
    spec: &Specification,
    adversary: &Adversary,
    k: usize,
    r: &Bits,
    coins: Coins,
    eval: &EvalCtx,
) -> Result<GameRun> {
    run_simulation(spec, adversary, k, r, coins, eval, Vec::new())
}

fn obfuscation_for(
    spec: &Specification,
    index: usize,
    obf: &Obfuscator,
    keys: &[Bits],
    eval: &EvalCtx,
    coins: &mut RngStream,
) -> Result<(usize, ProgramValue)> {
    if !spec.obfuscatable_claims.contains(&index) {
        return Err(Error::NotObfuscatable { index });
    }
    let family = &spec.families[index - 1];
    let program = obfuscate(obf, family, &keys[index - 1], eval, coins)?;
    Ok((index, program))
}

/// White-box simulation: the adversary additionally receives an obfuscation
/// of oracle i's member. The oracle must be claimed obfuscatable.
#[allow(clippy::too_many_arguments)]
pub fn run_whitebox(
    spec: &Specification,
    i: usize,
    obf: &Obfuscator,
    adversary: &Adversary,
    k: usize,
    r: &Bits,
    mut coins: Coins,
    eval: &EvalCtx,
) -> Result<GameRun> {
    let keys = spec.derive_keys(k, r)?;
    let wb = obfuscation_for(spec, i, obf, &keys, eval, &mut coins.obfuscator)?;
    run_simulation(spec, adversary, k, r, coins, eval, vec![wb])
}

/// White-box simulation with two obfuscations delivered at once.
#[allow(clippy::too_many_arguments)]
pub fn run_whitebox_pair(
    spec: &Specification,
    i: usize,
    j: usize,
    obf: &Obfuscator,
    adversary: &Adversary,
    k: usize,
    r: &Bits,
    mut coins: Coins,
    eval: &EvalCtx,
) -> Result<GameRun> {
    if i == j {
        return Err(Error::Config("pair indices must differ".into()));
    }
    let keys = spec.derive_keys(k, r)?;
    let wb_i = obfuscation_for(spec, i, obf, &keys, eval, &mut coins.obfuscator)?;
    let wb_j = obfuscation_for(spec, j, obf, &keys, eval, &mut coins.obfuscator)?;
    run_simulation(spec, adversary, k, r, coins, eval, vec![wb_i, wb_j])
}

/// How an estimated run delivers programs to the adversary.
#[derive(Clone)]
pub enum RunMode {
    BlackBox,
    WhiteBox { index: usize, obf: Obfuscator },
    WhiteBoxPair { i: usize, j: usize, obf: Obfuscator },
}

impl RunMode {
    pub fn label(&self) -> &'static str {
        match self {
            RunMode::BlackBox => "blackbox",
            RunMode::WhiteBox { .. } => "whitebox",
            RunMode::WhiteBoxPair { .. } => "whitebox-pair",
        }
    }
}

/// Monte Carlo advantage over fresh tapes and coins, one derived stream
/// bundle per trial. Deterministic in (spec, adversary, mode, k, trials,
/// seed).
pub fn estimate_advantage(
    spec: &Specification,
    adversary: &Adversary,
    mode: &RunMode,
    registry: &Arc<FamilyRegistry>,
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<AdvantageEstimate> {
    assert!(trials >= 1);
    let mut wins = 0u64;
    for t in 0..trials {
        if run_one_trial(spec, adversary, mode, registry, k, seed, t)? {
            wins += 1;
        }
    }
    Ok(AdvantageEstimate::from_counts(wins, trials))
}

fn run_one_trial(
    spec: &Specification,
    adversary: &Adversary,
    mode: &RunMode,
    registry: &Arc<FamilyRegistry>,
    k: usize,
    seed: u64,
    trial: u64,
) -> Result<bool> {
    let mut tape_rng = RngStream::derive(seed, "r", &[trial]);
    let r = tape_rng.bits(spec.p_in.eval(k as u64) as usize);
    let coins = Coins::derive(seed, trial);
    let eval = EvalCtx::new(Arc::clone(registry), RngStream::derive(seed, "ro", &[trial]));
    let run = match mode {
        RunMode::BlackBox => run_blackbox(spec, adversary, k, &r, coins, &eval)?,
        RunMode::WhiteBox { index, obf } => {
            run_whitebox(spec, *index, obf, adversary, k, &r, coins, &eval)?
        }
        RunMode::WhiteBoxPair { i, j, obf } => {
            run_whitebox_pair(spec, *i, *j, obf, adversary, k, &r, coins, &eval)?
        }
    };
    Ok(run.result)
}

/// One row of a white-box gap report.
#[derive(Clone, Debug, serde::Serialize)]
pub struct AdversaryGap {
    pub adversary_id: String,
    pub blackbox: AdvantageEstimate,
    pub whitebox: AdvantageEstimate,
    pub gap: f64,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct WhiteboxGapReport {
    pub spec_id: String,
    pub obfuscator_id: String,
    pub index: usize,
    pub k: usize,
    pub trials: u64,
    pub zoo_version: String,
    pub per_adversary: Vec<AdversaryGap>,
    pub max_gap: f64,
    pub threshold: f64,
    /// Zoo-relative verdict: no registered adversary's gap exceeded the
    /// threshold. Says nothing about adversaries outside the zoo.
    pub pass: bool,
}

/// For each adversary in the zoo, estimate the black-box and white-box
/// advantages with independently derived seeds and report |difference|,
/// plus the maximum over the zoo.
#[allow(clippy::too_many_arguments)]
pub fn whitebox_gap(
    spec: &Specification,
    index: usize,
    obf: &Obfuscator,
    zoo: &[Adversary],
    registry: &Arc<FamilyRegistry>,
    k: usize,
    trials: u64,
    seed: u64,
    threshold: f64,
) -> Result<WhiteboxGapReport> {
    assert!(!zoo.is_empty(), "empty adversary zoo");
    let mut per_adversary = Vec::new();
    let mut max_gap = 0f64;
    for adversary in zoo {
        let seed_bb = derive_seed(seed, &format!("gap-bb/{}", adversary.adversary_id));
        let seed_wb = derive_seed(seed, &format!("gap-wb/{}", adversary.adversary_id));
        let blackbox =
            estimate_advantage(spec, adversary, &RunMode::BlackBox, registry, k, trials, seed_bb)?;
        let wb_mode = RunMode::WhiteBox {
            index,
            obf: obf.clone(),
        };
        let whitebox = estimate_advantage(spec, adversary, &wb_mode, registry, k, trials, seed_wb)?;
        let gap = (whitebox.mean - blackbox.mean).abs();
        max_gap = max_gap.max(gap);
        per_adversary.push(AdversaryGap {
            adversary_id: adversary.adversary_id.clone(),
            blackbox,
            whitebox,
            gap,
        });
    }
    Ok(WhiteboxGapReport {
        spec_id: spec.spec_id.clone(),
        obfuscator_id: obf.obfuscator_id.clone(),
        index,
        k,
        trials,
        zoo_version: crate::ZOO_VERSION.to_string(),
        per_adversary,
        max_gap,
        threshold,
        pass: max_gap <= threshold,
    })
}

/// Does deleting oracle i's records ever change the win verdict on the
/// corpus? Returns true (obfuscatable) only if no triple flips.
pub fn check_obfuscatable(
    spec: &Specification,
    index: usize,
    corpus: &[(usize, Bits, Transcript)],
) -> Result<bool> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    for (k, r, transcript) in corpus {
        let full = spec.win(&WinInput {
            k: *k,
            r,
            records: &transcript.records,
            s: &transcript.s,
        });
        let filtered: Vec<QueryRecord> = transcript
            .records
            .iter()
            .filter(|rec| rec.i != index)
            .cloned()
            .collect();
        let without = spec.win(&WinInput {
            k: *k,
            r,
            records: &filtered,
            s: &transcript.s,
        });
        if full != without {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Record a corpus of (k, r, transcript) triples for obfuscatability
/// checks, running each adversary over fresh tapes.
pub fn generate_corpus(
    spec: &Specification,
    adversaries: &[Adversary],
    registry: &Arc<FamilyRegistry>,
    k: usize,
    runs_per_adversary: u64,
    seed: u64,
) -> Result<Vec<(usize, Bits, Transcript)>> {
    let mut corpus = Vec::new();
    for (ai, adversary) in adversaries.iter().enumerate() {
        for t in 0..runs_per_adversary {
            let idx = (ai as u64) << 32 | t;
            let mut tape_rng = RngStream::derive(seed, "corpus-r", &[idx]);
            let r = tape_rng.bits(spec.p_in.eval(k as u64) as usize);
            let coins = Coins::derive(derive_seed(seed, "corpus"), idx);
            let eval = EvalCtx::new(
                Arc::clone(registry),
                RngStream::derive(seed, "corpus-ro", &[idx]),
            );
            let run = run_blackbox(spec, adversary, k, &r, coins, &eval)?;
            corpus.push((k, r, run.transcript));
        }
    }
    Ok(corpus)
}
