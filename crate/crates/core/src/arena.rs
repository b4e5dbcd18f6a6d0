//! Wiring: one place that owns the configured family registry, the
//! obfuscator and specification catalogs, and the high-level operations the
//! CLI and bindings call.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::family::{EvalCtx, FamilyRef, FamilyRegistry};
use crate::games::{
    estimate_advantage, whitebox_gap, Adversary, RunMode, Specification, WhiteboxGapReport,
};
use crate::learnability::{estimate_learnability, LearnMode, LearnReport};
use crate::obfuscation::{
    bitflip_obfuscator, check_correctness, check_tau_correctness, identity_obfuscator,
    table_obfuscator, CorrectnessReport, Obfuscator, TauDecider, TauRelation,
};
use crate::rng::RngStream;
use crate::schemes::findq::FindqFamily;
use crate::schemes::group::GenericGroupCtx;
use crate::schemes::pairing::{
    pairing_broken_obfuscator, pairing_obfuscator, CFamily, DFamily, EFamily, FFamily,
};
use crate::schemes::prob::{
    prob_pairing_tau_decider, prob_pairing_tau_relation, rerandomizing_obfuscator,
    ProbPairingFamily, TauDeciderFamily, FAMILY_PROB_PAIRING,
};
use crate::schemes::ro::RoFamily;
use crate::schemes::toy::{faulty_over, IdentityFamily, PrfFamily, XorFamily};
use crate::schemes::DEFAULT_GROUP_ORDER;
use crate::specs::{
    build_findq, build_findq_pair, build_ind_cca2, build_ind_cpa, build_ro_distinguish,
};
use crate::stats::AdvantageEstimate;
use crate::zoo;

#[derive(Clone, Debug)]
pub struct ArenaConfig {
    pub group_order: u64,
    /// Allowed functionality-failure fraction in correctness checks.
    pub correctness_threshold: f64,
    /// Zoo-relative white-box gap threshold.
    pub wbp_threshold: f64,
}

impl Default for ArenaConfig {
    fn default() -> Self {
        ArenaConfig {
            group_order: DEFAULT_GROUP_ORDER,
            correctness_threshold: 0.0,
            wbp_threshold: 0.05,
        }
    }
}

pub struct Arena {
    pub config: ArenaConfig,
    group: GenericGroupCtx,
    families: Arc<FamilyRegistry>,
    obfuscators: BTreeMap<String, Obfuscator>,
    specs: BTreeMap<String, Specification>,
}

impl Arena {
    pub fn with_defaults() -> Self {
        Arena::new(ArenaConfig::default()).expect("default configuration is valid")
    }

    pub fn new(config: ArenaConfig) -> Result<Self> {
        let group = GenericGroupCtx::new(config.group_order)?;

        let identity: FamilyRef = Arc::new(IdentityFamily);
        let xor: FamilyRef = Arc::new(XorFamily);
        let prf: FamilyRef = Arc::new(PrfFamily);
        let ro: FamilyRef = Arc::new(RoFamily);
        let e_family: FamilyRef = Arc::new(EFamily::new(group.clone()));
        let f_family: FamilyRef = Arc::new(FFamily::new(group.clone()));
        let d_family: FamilyRef = Arc::new(DFamily::new(group.clone()));
        let c_family: FamilyRef = Arc::new(CFamily::new(group.clone()));
        let prob: FamilyRef = Arc::new(ProbPairingFamily::new(group.clone()));
        let tau_decider_fam: FamilyRef = Arc::new(TauDeciderFamily::new(group.clone()));
        let findq_prf = Arc::new(FindqFamily::new(Arc::clone(&prf)));
        let findq_xor = Arc::new(FindqFamily::new(Arc::clone(&xor)));

        let mut registry = FamilyRegistry::new();
        registry.insert(Arc::clone(&identity));
        registry.insert(Arc::clone(&xor));
        registry.insert(Arc::clone(&prf));
        registry.insert(Arc::clone(&ro));
        registry.insert(Arc::clone(&e_family));
        registry.insert(Arc::clone(&f_family));
        registry.insert(Arc::clone(&d_family));
        registry.insert(Arc::clone(&c_family));
        registry.insert(Arc::clone(&prob));
        registry.insert(Arc::clone(&tau_decider_fam));
        registry.insert(Arc::clone(&findq_prf) as FamilyRef);
        registry.insert(Arc::clone(&findq_xor) as FamilyRef);
        registry.insert(faulty_over(Arc::clone(&xor)) as FamilyRef);
        registry.insert(faulty_over(Arc::clone(&prf)) as FamilyRef);
        let families = Arc::new(registry);

        let mut obfuscators = BTreeMap::new();
        for obf in [
            identity_obfuscator(),
            table_obfuscator(),
            bitflip_obfuscator(),
            pairing_obfuscator(),
            pairing_broken_obfuscator(),
            rerandomizing_obfuscator(),
        ] {
            obfuscators.insert(obf.obfuscator_id.clone(), obf);
        }

        let mut specs = BTreeMap::new();
        for spec in [
            build_ind_cca2(
                &group,
                Arc::clone(&e_family),
                Arc::clone(&d_family),
                Arc::clone(&c_family),
            ),
            build_ind_cpa(
                &group,
                Arc::clone(&e_family),
                Arc::clone(&d_family),
                Arc::clone(&c_family),
            ),
            build_findq(Arc::clone(&prf), Arc::clone(&findq_prf)),
            build_findq_pair(
                Arc::clone(&prf),
                Arc::clone(&xor),
                Arc::clone(&findq_xor),
                Arc::clone(&findq_prf),
            ),
            build_ro_distinguish(Arc::clone(&ro)),
        ] {
            specs.insert(spec.spec_id.clone(), spec);
        }

        Ok(Arena {
            config,
            group,
            families,
            obfuscators,
            specs,
        })
    }

    pub fn group(&self) -> &GenericGroupCtx {
        &self.group
    }

    pub fn registry(&self) -> &Arc<FamilyRegistry> {
        &self.families
    }

    pub fn family(&self, id: &str) -> Result<FamilyRef> {
        self.families.get(id).cloned()
    }

    pub fn family_ids(&self) -> Vec<String> {
        self.families.ids()
    }

    pub fn obfuscator(&self, id: &str) -> Result<&Obfuscator> {
        self.obfuscators.get(id).ok_or_else(|| Error::UnknownId {
            registry: "obfuscator",
            id: id.to_string(),
        })
    }

    pub fn obfuscator_ids(&self) -> Vec<String> {
        self.obfuscators.keys().cloned().collect()
    }

    pub fn spec(&self, id: &str) -> Result<&Specification> {
        self.specs.get(id).ok_or_else(|| Error::UnknownId {
            registry: "spec",
            id: id.to_string(),
        })
    }

    pub fn spec_ids(&self) -> Vec<String> {
        self.specs.keys().cloned().collect()
    }

    /// Fresh evaluation context with a labeled random-oracle stream.
    pub fn eval_ctx(&self, seed: u64, label: &str, trial: u64) -> EvalCtx {
        EvalCtx::new(
            Arc::clone(&self.families),
            RngStream::derive(seed, label, &[trial]),
        )
    }

    /// Resolve the effective security parameter for a family: structured
    /// families pin their own key length.
    pub fn effective_k(&self, family: &FamilyRef, requested: Option<usize>) -> Result<usize> {
        match (family.natural_k(), requested) {
            (Some(nat), None) => Ok(nat),
            (Some(nat), Some(req)) if req == nat => Ok(nat),
            (Some(nat), Some(req)) => Err(Error::Config(format!(
                "family {} has a fixed key length of {nat} bits, got k={req}",
                family.family_id()
            ))),
            (None, Some(req)) => Ok(req),
            (None, None) => Err(Error::Config(format!(
                "family {} needs an explicit k",
                family.family_id()
            ))),
        }
    }

    pub fn run_mode(&self, mode: &str, spec: &Specification, obfuscator_id: Option<&str>) -> Result<RunMode> {
        match mode {
            "blackbox" | "bb" => Ok(RunMode::BlackBox),
            "whitebox" | "wb" => {
                let obf = self.obfuscator(obfuscator_id.ok_or_else(|| {
                    Error::Config("whitebox mode needs an obfuscator id".into())
                })?)?;
                let index = *spec
                    .obfuscatable_claims
                    .first()
                    .ok_or_else(|| Error::Config("spec claims nothing obfuscatable".into()))?;
                Ok(RunMode::WhiteBox {
                    index,
                    obf: obf.clone(),
                })
            }
            "whitebox-pair" | "wb-pair" => {
                let obf = self.obfuscator(obfuscator_id.ok_or_else(|| {
                    Error::Config("whitebox-pair mode needs an obfuscator id".into())
                })?)?;
                if spec.obfuscatable_claims.len() < 2 {
                    return Err(Error::Config(
                        "spec does not claim two obfuscatable oracles".into(),
                    ));
                }
                Ok(RunMode::WhiteBoxPair {
                    i: spec.obfuscatable_claims[0],
                    j: spec.obfuscatable_claims[1],
                    obf: obf.clone(),
                })
            }
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }

    pub fn estimate(
        &self,
        spec_id: &str,
        adversary_id: &str,
        mode: &str,
        obfuscator_id: Option<&str>,
        k: usize,
        trials: u64,
        seed: u64,
    ) -> Result<AdvantageEstimate> {
        let spec = self.spec(spec_id)?;
        let adversary = zoo::get_adversary(adversary_id)?;
        let run_mode = self.run_mode(mode, spec, obfuscator_id)?;
        estimate_advantage(spec, &adversary, &run_mode, &self.families, k, trials, seed)
    }

    pub fn gap_report(
        &self,
        spec_id: &str,
        obfuscator_id: &str,
        adversary_ids: &[String],
        k: usize,
        trials: u64,
        seed: u64,
    ) -> Result<WhiteboxGapReport> {
        let spec = self.spec(spec_id)?;
        let obf = self.obfuscator(obfuscator_id)?;
        let index = *spec
            .obfuscatable_claims
            .first()
            .ok_or_else(|| Error::Config("spec claims nothing obfuscatable".into()))?;
        let mut adversaries = Vec::new();
        for id in adversary_ids {
            adversaries.push(zoo::get_adversary(id)?);
        }
        whitebox_gap(
            spec,
            index,
            obf,
            &adversaries,
            &self.families,
            k,
            trials,
            seed,
            self.config.wbp_threshold,
        )
    }

    pub fn tau_relation(&self, family_id: &str) -> Result<TauRelation> {
        if family_id != FAMILY_PROB_PAIRING {
            return Err(Error::UnknownId {
                registry: "tau-relation",
                id: family_id.to_string(),
            });
        }
        Ok(prob_pairing_tau_relation())
    }

    pub fn tau_decider(&self, family_id: &str) -> Result<TauDecider> {
        if family_id != FAMILY_PROB_PAIRING {
            return Err(Error::UnknownId {
                registry: "tau-decider",
                id: family_id.to_string(),
            });
        }
        Ok(prob_pairing_tau_decider(self.group.clone()))
    }

    /// Correctness report for an obfuscator over a family; `tau` switches
    /// to decider-based comparison.
    #[allow(clippy::too_many_arguments)]
    pub fn check_obfuscator(
        &self,
        family_id: &str,
        obfuscator_id: &str,
        k: Option<usize>,
        samples: u64,
        keys_per_batch: u64,
        seed: u64,
        tau: bool,
    ) -> Result<CorrectnessReport> {
        let family = self.family(family_id)?;
        let obf = self.obfuscator(obfuscator_id)?;
        let k = self.effective_k(&family, k)?;
        let ctx = self.eval_ctx(seed, "check-env", 0);
        let mut rng = RngStream::derive(seed, "check", &[0]);
        if tau {
            let decider = self.tau_decider(family_id)?;
            check_tau_correctness(
                obf,
                &family,
                &decider,
                k,
                samples,
                &ctx,
                &mut rng,
                self.config.correctness_threshold,
            )
        } else {
            check_correctness(
                obf,
                &family,
                k,
                samples,
                keys_per_batch,
                &ctx,
                &mut rng,
                self.config.correctness_threshold,
            )
        }
    }

    pub fn learnability(
        &self,
        family_id: &str,
        learner_id: &str,
        mode: LearnMode,
        k: Option<usize>,
        trials: u64,
        seed: u64,
    ) -> Result<LearnReport> {
        let family = self.family(family_id)?;
        let learner = zoo::get_learner(learner_id)?;
        let k = self.effective_k(&family, k)?;
        estimate_learnability(&self.families, &family, &learner, k, trials, mode, seed)
    }

    /// Build one game adversary, shared with the gap and estimate paths.
    pub fn adversary(&self, id: &str) -> Result<Adversary> {
        zoo::get_adversary(id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registries_resolve_expected_ids() {
        let arena = Arena::with_defaults();
        for id in ["identity", "xor", "prf", "ro", "pairing-e", "pairing-f", "prob-pairing"] {
            assert!(arena.family(id).is_ok(), "{id}");
        }
        for id in ["identity", "table", "pairing", "pairing-broken", "rerandomize-pp", "bitflip"] {
            assert!(arena.obfuscator(id).is_ok(), "{id}");
        }
        for id in ["ind-cpa", "ind-cca2", "find-q", "find-q-pair", "ro-distinguish"] {
            assert!(arena.spec(id).is_ok(), "{id}");
        }
        assert!(arena.family("nope").is_err());
    }

    #[test]
    fn zoo_compatible_specs_resolve() {
        let arena = Arena::with_defaults();
        for entry in zoo::zoo_registry() {
            for spec_id in &entry.compatible_specs {
                assert!(arena.spec(spec_id).is_ok(), "{} -> {spec_id}", entry.id);
            }
        }
    }

    #[test]
    fn effective_k_pins_structured_families() {
        let arena = Arena::with_defaults();
        let e = arena.family("pairing-e").unwrap();
        let nat = e.natural_k().unwrap();
        assert_eq!(arena.effective_k(&e, None).unwrap(), nat);
        assert!(arena.effective_k(&e, Some(nat + 1)).is_err());
        let xor = arena.family("xor").unwrap();
        assert_eq!(arena.effective_k(&xor, Some(16)).unwrap(), 16);
        assert!(arena.effective_k(&xor, None).is_err());
    }
}
