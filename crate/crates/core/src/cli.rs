//! Batch experiment runner: resolves registry ids, estimates advantages and
//! gaps, and emits CSV or JSON result tables plus the packaged demos.
//!
//! Every output embeds the root seed, the zoo version, and a hash of the
//! effective configuration, so a results file identifies the run that
//! produced it. The same seed always produces byte-identical files.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arena::Arena;
use crate::error::{Error, Result};
use crate::learnability::{LearnMode, LearnReport};
use crate::obfuscation::CorrectnessReport;
use crate::rng::derive_seed;
use crate::specs;
use crate::stats::AdvantageEstimate;
use crate::zoo;

/// Exit codes: 0 success, 2 configuration error (unresolved ids, bad
/// flags), 3 runtime error.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownId { .. } | Error::Config(_) => CliError::Config(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub spec_id: String,
    #[serde(default)]
    pub obfuscator_id: Option<String>,
    pub adversary_ids: Vec<String>,
    pub k: usize,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    /// "blackbox", "whitebox", or "whitebox-pair".
    pub mode: String,
    #[serde(default)]
    pub output_path: Option<String>,
    #[serde(default = "default_format")]
    pub format: String,
}

fn default_format() -> String {
    "csv".to_string()
}

impl RunConfig {
    pub fn validate(&self, arena: &Arena) -> CliResult<()> {
        arena.spec(&self.spec_id)?;
        for id in &self.adversary_ids {
            zoo::get_adversary(id)?;
        }
        if let Some(obf) = &self.obfuscator_id {
            arena.obfuscator(obf)?;
        }
        if self.adversary_ids.is_empty() {
            return Err(CliError::Config("adversary_ids must be non-empty".into()));
        }
        if self.trials < 1 {
            return Err(CliError::Config("trials must be at least 1".into()));
        }
        if !matches!(self.mode.as_str(), "blackbox" | "whitebox" | "whitebox-pair") {
            return Err(CliError::Config(format!("unknown mode {:?}", self.mode)));
        }
        if !matches!(self.format.as_str(), "csv" | "json") {
            return Err(CliError::Config(format!("unknown format {:?}", self.format)));
        }
        Ok(())
    }

    /// Hash of the experiment-defining fields only; where the table goes
    /// and how it is rendered do not change what was measured.
    pub fn hash(&self) -> String {
        let identity = serde_json::json!({
            "spec_id": self.spec_id,
            "obfuscator_id": self.obfuscator_id,
            "adversary_ids": self.adversary_ids,
            "k": self.k,
            "trials": self.trials,
            "seed": self.seed,
            "mode": self.mode,
        });
        let bytes = serde_json::to_vec(&identity).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        digest[..4].iter().fold(String::new(), |mut acc, b| {
            let _ = write!(acc, "{b:02x}");
            acc
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OutputHeader {
    pub version: String,
    pub seed: u64,
    pub zoo_version: String,
    pub config_hash: String,
}

impl OutputHeader {
    pub fn new(seed: u64, config_hash: &str) -> Self {
        OutputHeader {
            version: crate::VERSION.to_string(),
            seed,
            zoo_version: crate::ZOO_VERSION.to_string(),
            config_hash: config_hash.to_string(),
        }
    }

    fn comment_line(&self) -> String {
        format!(
            "# wbc-arena {} seed={} zoo={} config={}",
            self.version, self.seed, self.zoo_version, self.config_hash
        )
    }
}

/// One result row with the fixed column set.
#[derive(Clone, Debug, Serialize)]
pub struct ResultRow {
    pub spec_id: String,
    pub family_id: String,
    pub obfuscator_id: String,
    pub adversary_id: String,
    pub mode: String,
    pub k: usize,
    pub trials: u64,
    pub wins: Option<u64>,
    pub mean: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

impl ResultRow {
    fn estimate_row(
        spec_id: &str,
        family_id: &str,
        obfuscator_id: &str,
        adversary_id: &str,
        mode: &str,
        k: usize,
        est: &AdvantageEstimate,
    ) -> Self {
        ResultRow {
            spec_id: spec_id.into(),
            family_id: family_id.into(),
            obfuscator_id: obfuscator_id.into(),
            adversary_id: adversary_id.into(),
            mode: mode.into(),
            k,
            trials: est.trials,
            wins: Some(est.wins),
            mean: est.mean,
            ci_low: Some(est.ci_low),
            ci_high: Some(est.ci_high),
        }
    }

    fn gap_row(
        spec_id: &str,
        family_id: &str,
        obfuscator_id: &str,
        adversary_id: &str,
        k: usize,
        trials: u64,
        gap: f64,
    ) -> Self {
        ResultRow {
            spec_id: spec_id.into(),
            family_id: family_id.into(),
            obfuscator_id: obfuscator_id.into(),
            adversary_id: adversary_id.into(),
            mode: "gap".into(),
            k,
            trials,
            wins: None,
            mean: gap,
            ci_low: None,
            ci_high: None,
        }
    }
}

pub const CSV_HEADER: &str =
    "spec_id,family_id,obfuscator_id,adversary_id,mode,k,trials,wins,mean,ci_low,ci_high";

fn fmt_opt_u64(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// RFC-4180-style CSV with LF endings, a mandatory header row, and one
/// leading comment line carrying the run header.
pub fn rows_to_csv(header: &OutputHeader, rows: &[ResultRow]) -> String {
    let mut out = String::new();
    out.push_str(&header.comment_line());
    out.push('\n');
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.spec_id,
            r.family_id,
            r.obfuscator_id,
            r.adversary_id,
            r.mode,
            r.k,
            r.trials,
            fmt_opt_u64(r.wins),
            r.mean,
            fmt_opt_f64(r.ci_low),
            fmt_opt_f64(r.ci_high)
        );
    }
    out
}

pub fn rows_to_json(header: &OutputHeader, rows: &[ResultRow]) -> String {
    let value = serde_json::json!({ "header": header, "rows": rows });
    let mut s = serde_json::to_string_pretty(&value).expect("rows serialize");
    s.push('\n');
    s
}

/// The obfuscation target family named in result rows: the spec's first
/// claimed-obfuscatable oracle.
fn target_family(arena: &Arena, spec_id: &str) -> Result<String> {
    let spec = arena.spec(spec_id)?;
    let idx = spec.obfuscatable_claims.first().copied().unwrap_or(1);
    Ok(spec.families[idx - 1].family_id().to_string())
}

/// Run the configured estimates and produce (header, rows, rendered file).
pub fn cmd_run(arena: &Arena, cfg: &RunConfig) -> CliResult<(OutputHeader, Vec<ResultRow>, String)> {
    cfg.validate(arena)?;
    let header = OutputHeader::new(cfg.seed, &cfg.hash());
    let family_id = target_family(arena, &cfg.spec_id)?;
    let mut rows = Vec::new();
    match cfg.mode.as_str() {
        "blackbox" => {
            for adversary_id in &cfg.adversary_ids {
                let seed = derive_seed(cfg.seed, &format!("run-bb/{adversary_id}"));
                let est = arena.estimate(
                    &cfg.spec_id,
                    adversary_id,
                    "blackbox",
                    None,
                    cfg.k,
                    cfg.trials,
                    seed,
                )?;
                rows.push(ResultRow::estimate_row(
                    &cfg.spec_id,
                    &family_id,
                    "",
                    adversary_id,
                    "blackbox",
                    cfg.k,
                    &est,
                ));
            }
        }
        "whitebox" => {
            let obf_id = cfg.obfuscator_id.as_deref().ok_or_else(|| {
                CliError::Config("whitebox mode needs obfuscator_id".into())
            })?;
            let report = arena.gap_report(
                &cfg.spec_id,
                obf_id,
                &cfg.adversary_ids,
                cfg.k,
                cfg.trials,
                cfg.seed,
            )?;
            for per in &report.per_adversary {
                rows.push(ResultRow::estimate_row(
                    &cfg.spec_id,
                    &family_id,
                    obf_id,
                    &per.adversary_id,
                    "blackbox",
                    cfg.k,
                    &per.blackbox,
                ));
                rows.push(ResultRow::estimate_row(
                    &cfg.spec_id,
                    &family_id,
                    obf_id,
                    &per.adversary_id,
                    "whitebox",
                    cfg.k,
                    &per.whitebox,
                ));
                rows.push(ResultRow::gap_row(
                    &cfg.spec_id,
                    &family_id,
                    obf_id,
                    &per.adversary_id,
                    cfg.k,
                    cfg.trials,
                    per.gap,
                ));
            }
            rows.push(ResultRow::gap_row(
                &cfg.spec_id,
                &family_id,
                obf_id,
                "zoo-max",
                cfg.k,
                cfg.trials,
                report.max_gap,
            ));
        }
        "whitebox-pair" => {
            let obf_id = cfg.obfuscator_id.as_deref().ok_or_else(|| {
                CliError::Config("whitebox-pair mode needs obfuscator_id".into())
            })?;
            for adversary_id in &cfg.adversary_ids {
                let seed = derive_seed(cfg.seed, &format!("run-pair/{adversary_id}"));
                let est = arena.estimate(
                    &cfg.spec_id,
                    adversary_id,
                    "whitebox-pair",
                    Some(obf_id),
                    cfg.k,
                    cfg.trials,
                    seed,
                )?;
                rows.push(ResultRow::estimate_row(
                    &cfg.spec_id,
                    &family_id,
                    obf_id,
                    adversary_id,
                    "whitebox-pair",
                    cfg.k,
                    &est,
                ));
            }
        }
        _ => unreachable!("validated"),
    }
    let rendered = match cfg.format.as_str() {
        "csv" => rows_to_csv(&header, &rows),
        _ => rows_to_json(&header, &rows),
    };
    Ok((header, rows, rendered))
}

pub fn cmd_check_obfuscator(
    arena: &Arena,
    family_id: &str,
    obfuscator_id: &str,
    k: Option<usize>,
    samples: u64,
    keys_per_batch: u64,
    seed: u64,
    tau: bool,
) -> CliResult<CorrectnessReport> {
    Ok(arena.check_obfuscator(family_id, obfuscator_id, k, samples, keys_per_batch, seed, tau)?)
}

pub fn cmd_learnability(
    arena: &Arena,
    family_id: &str,
    learner_id: &str,
    mode: &str,
    k: Option<usize>,
    trials: u64,
    seed: u64,
) -> CliResult<LearnReport> {
    let mode = LearnMode::parse(mode)?;
    Ok(arena.learnability(family_id, learner_id, mode, k, trials, seed)?)
}

pub fn zoo_list_json() -> String {
    let mut s =
        serde_json::to_string_pretty(&zoo::zoo_registry()).expect("zoo registry serializes");
    s.push('\n');
    s
}

pub fn spec_list_json(arena: &Arena) -> String {
    let infos: Vec<specs::SpecInfo> = arena
        .spec_ids()
        .iter()
        .map(|id| specs::describe(arena.spec(id).expect("listed id resolves")))
        .collect();
    let mut s = serde_json::to_string_pretty(&infos).expect("spec infos serialize");
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------
// Demos
// ---------------------------------------------------------------------------

pub struct DemoOutput {
    pub summary: String,
    pub rows: Vec<ResultRow>,
    pub header: OutputHeader,
}

impl DemoOutput {
    pub fn csv(&self) -> String {
        rows_to_csv(&self.header, &self.rows)
    }
}

/// A validating oracle releases a secret to whoever can run a correct
/// program for the hidden member: with no program, winning means guessing
/// k bits; with the obfuscation forwarded, winning is certain.
fn demo_find_q_prime(arena: &Arena, seed: u64) -> CliResult<DemoOutput> {
    let k = 16;
    let spec_id = specs::SPEC_FIND_Q;
    let header = OutputHeader::new(seed, "demo-find-q-prime");
    let mut rows = Vec::new();
    let mut summary = String::new();

    let bb_guess = arena.estimate(
        spec_id,
        "guess",
        "blackbox",
        None,
        k,
        10_000,
        derive_seed(seed, "demo-fq-bb"),
    )?;
    rows.push(ResultRow::estimate_row(
        spec_id, "prf", "", "guess", "blackbox", k, &bb_guess,
    ));
    let _ = writeln!(
        summary,
        "black-box guess: {}/{} wins (mean {:.6})",
        bb_guess.wins, bb_guess.trials, bb_guess.mean
    );

    let wb_fwd = arena.estimate(
        spec_id,
        "forwarding",
        "whitebox",
        Some("identity"),
        k,
        200,
        derive_seed(seed, "demo-fq-wb"),
    )?;
    rows.push(ResultRow::estimate_row(
        spec_id, "prf", "identity", "forwarding", "whitebox", k, &wb_fwd,
    ));
    let _ = writeln!(
        summary,
        "white-box forwarding (identity obfuscator): {}/{} wins",
        wb_fwd.wins, wb_fwd.trials
    );

    let gap = arena.gap_report(
        spec_id,
        "identity",
        &["forwarding".into(), "guess".into()],
        k,
        200,
        derive_seed(seed, "demo-fq-gap"),
    )?;
    for per in &gap.per_adversary {
        rows.push(ResultRow::gap_row(
            spec_id, "prf", "identity", &per.adversary_id, k, 200, per.gap,
        ));
    }
    rows.push(ResultRow::gap_row(
        spec_id, "prf", "identity", "zoo-max", k, 200, gap.max_gap,
    ));
    let _ = writeln!(summary, "zoo max white-box gap: {:.4}", gap.max_gap);
    Ok(DemoOutput {
        summary,
        rows,
        header,
    })
}

/// The pairing obfuscator keeps the encryption game's gap small for every
/// registered adversary, while the identity obfuscator hands the key to
/// anyone who parses it.
fn demo_wbp_pairing(arena: &Arena, seed: u64) -> CliResult<DemoOutput> {
    let k = 32;
    let spec_id = specs::SPEC_IND_CPA;
    let header = OutputHeader::new(seed, "demo-wbp-pairing");
    let mut rows = Vec::new();
    let mut summary = String::new();
    let zoo_ids = vec![
        "guess".to_string(),
        "key-extraction".to_string(),
        "equality-tester".to_string(),
    ];

    let pairing_gap = arena.gap_report(
        spec_id,
        "pairing",
        &zoo_ids,
        k,
        10_000,
        derive_seed(seed, "demo-wbp-pairing"),
    )?;
    for per in &pairing_gap.per_adversary {
        rows.push(ResultRow::estimate_row(
            spec_id, "pairing-e", "pairing", &per.adversary_id, "blackbox", k, &per.blackbox,
        ));
        rows.push(ResultRow::estimate_row(
            spec_id, "pairing-e", "pairing", &per.adversary_id, "whitebox", k, &per.whitebox,
        ));
        rows.push(ResultRow::gap_row(
            spec_id, "pairing-e", "pairing", &per.adversary_id, k, 10_000, per.gap,
        ));
    }
    rows.push(ResultRow::gap_row(
        spec_id, "pairing-e", "pairing", "zoo-max", k, 10_000, pairing_gap.max_gap,
    ));
    let _ = writeln!(
        summary,
        "pairing obfuscator zoo max gap: {:.4} (threshold {:.2})",
        pairing_gap.max_gap, pairing_gap.threshold
    );

    let identity_gap = arena.gap_report(
        spec_id,
        "identity",
        &["key-extraction".to_string()],
        k,
        10_000,
        derive_seed(seed, "demo-wbp-identity"),
    )?;
    let per = &identity_gap.per_adversary[0];
    rows.push(ResultRow::gap_row(
        spec_id, "pairing-e", "identity", &per.adversary_id, k, 10_000, per.gap,
    ));
    let _ = writeln!(
        summary,
        "identity obfuscator key-extraction gap: {:.4}",
        per.gap
    );

    let e_family = arena.family("pairing-e")?;
    let ind = crate::obfuscation::estimate_ind_gap(
        arena.registry(),
        &e_family,
        arena.obfuscator("pairing")?,
        &zoo::equality_tester_distinguisher(20),
        &zoo::junk_program_simulator(),
        &crate::bits::Bits::new(),
        e_family.natural_k().expect("structured family"),
        400,
        derive_seed(seed, "demo-wbp-ind"),
    )?;
    let _ = writeln!(
        summary,
        "ind-soundness witness gap (equality tester vs junk simulator): {:.4}",
        ind.gap
    );
    rows.push(ResultRow::gap_row(
        spec_id,
        "pairing-e",
        "pairing",
        "ind-equality-tester(20)/junk-program",
        k,
        400,
        ind.gap,
    ));
    Ok(DemoOutput {
        summary,
        rows,
        header,
    })
}

/// The membership family keeps its distinguishing game at a coin flip even
/// against heavy probing, while the all-zero learner approximates it almost
/// perfectly and no registered learner reconstructs it exactly.
fn demo_uwbp_ro(arena: &Arena, seed: u64) -> CliResult<DemoOutput> {
    let k = 32;
    let spec_id = specs::SPEC_RO_DISTINGUISH;
    let header = OutputHeader::new(seed, "demo-uwbp-ro");
    let mut rows = Vec::new();
    let mut summary = String::new();

    let probing = arena.estimate(
        spec_id,
        "ro-probing",
        "blackbox",
        None,
        k,
        10_000,
        derive_seed(seed, "demo-ro-probe"),
    )?;
    rows.push(ResultRow::estimate_row(
        spec_id, "ro", "", "ro-probing", "blackbox", k, &probing,
    ));
    let _ = writeln!(
        summary,
        "probing distinguisher: mean {:.4} (advantage {:.4})",
        probing.mean,
        (probing.mean - 0.5).abs()
    );

    let approx = arena.learnability(
        "ro",
        "constant-zero",
        LearnMode::Approx,
        Some(k),
        10_000,
        derive_seed(seed, "demo-ro-approx"),
    )?;
    let _ = writeln!(
        summary,
        "constant-zero approximate learning: rate {:.4} over {} trials",
        approx.success_rate, approx.trials
    );

    for learner in ["constant-zero", "identity-table", "exhaustive-table", "xor-probe"] {
        let exact = arena.learnability(
            "ro",
            learner,
            LearnMode::Exact,
            Some(k),
            1000,
            derive_seed(seed, &format!("demo-ro-exact-{learner}")),
        )?;
        let _ = writeln!(
            summary,
            "{learner} exact learning: rate {:.4} ({})",
            exact.success_rate, exact.equality_basis
        );
    }
    Ok(DemoOutput {
        summary,
        rows,
        header,
    })
}

/// Two validators release complementary halves of the secret for correct
/// programs for each other's family: both programs at once win always, one
/// program leaves half the secret to luck, none leaves all of it.
fn demo_pair_obfuscation(arena: &Arena, seed: u64) -> CliResult<DemoOutput> {
    let k = 16;
    let spec_id = specs::SPEC_FIND_Q_PAIR;
    let header = OutputHeader::new(seed, "demo-pair-obfuscation");
    let mut rows = Vec::new();
    let mut summary = String::new();

    let pair = arena.estimate(
        spec_id,
        "forwarding",
        "whitebox-pair",
        Some("identity"),
        k,
        200,
        derive_seed(seed, "demo-pair-both"),
    )?;
    rows.push(ResultRow::estimate_row(
        spec_id, "prf", "identity", "forwarding", "whitebox-pair", k, &pair,
    ));
    let _ = writeln!(
        summary,
        "pair white-box forwarding: {}/{} wins",
        pair.wins, pair.trials
    );

    let spec = arena.spec(spec_id)?;
    for (label, index) in [("first", 1usize), ("second", 2usize)] {
        let mode = crate::games::RunMode::WhiteBox {
            index,
            obf: arena.obfuscator("identity")?.clone(),
        };
        let est = crate::games::estimate_advantage(
            spec,
            &zoo::forwarding_adversary(),
            &mode,
            arena.registry(),
            k,
            10_000,
            derive_seed(seed, &format!("demo-pair-{label}")),
        )?;
        rows.push(ResultRow::estimate_row(
            spec_id,
            "prf",
            "identity",
            &format!("forwarding[{label}-only]"),
            "whitebox",
            k,
            &est,
        ));
        let _ = writeln!(
            summary,
            "single white-box ({label} program only): {}/{} wins",
            est.wins, est.trials
        );
    }

    let bb = arena.estimate(
        spec_id,
        "guess",
        "blackbox",
        None,
        k,
        10_000,
        derive_seed(seed, "demo-pair-bb"),
    )?;
    rows.push(ResultRow::estimate_row(
        spec_id, "prf", "", "guess", "blackbox", k, &bb,
    ));
    let _ = writeln!(summary, "black-box guess: {}/{} wins", bb.wins, bb.trials);
    Ok(DemoOutput {
        summary,
        rows,
        header,
    })
}

pub fn cmd_demo(arena: &Arena, name: &str, seed: u64) -> CliResult<DemoOutput> {
    match name {
        "find-q-prime" => demo_find_q_prime(arena, seed),
        "wbp-pairing" => demo_wbp_pairing(arena, seed),
        "uwbp-ro" => demo_uwbp_ro(arena, seed),
        "pair-obfuscation" => demo_pair_obfuscation(arena, seed),
        other => Err(CliError::Config(format!(
            "unknown demo {other:?} (expected find-q-prime, wbp-pairing, uwbp-ro, pair-obfuscation)"
        ))),
    }
}
