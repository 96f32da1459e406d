use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adversary::Adversary;
use super::trial::{
    run_qprf_trial, run_rop_qscca_trial, run_rop_qscpa_trial, Scenario, TrialOutcome, TrialRecord,
    TrialSettings,
};
use crate::schemes::{FamilyKind, QprfFamily, SchemeSpec};
use crate::seed::SeedTree;
use crate::{Error, Result};

/// Declarative description of a function family (config-file friendly).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: FamilyKind,
    pub in_width: usize,
    pub out_width: usize,
}

impl FamilySpec {
    pub fn square(family: FamilyKind, n: usize) -> Self {
        FamilySpec {
            family,
            in_width: n,
            out_width: n,
        }
    }

    pub fn instantiate(&self) -> Result<QprfFamily> {
        let key_width = match self.family {
            FamilyKind::Weak => self.in_width,
            FamilyKind::Strong => 32,
        };
        QprfFamily::of_kind(self.family, key_width, self.in_width, self.out_width)
    }
}

/// Which experiment an estimate runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "game", rename_all = "kebab-case")]
pub enum GameSpec {
    Qprf { family: FamilySpec },
    RopQscpa { scheme: SchemeSpec },
    RopQscca { scheme: SchemeSpec, scenario: Scenario },
}

/// Full experiment description: game, trial count per arm, master seed.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub game: GameSpec,
    pub trials: u32,
    pub master_seed: u64,
    pub settings: TrialSettings,
    /// Drop collision-flagged trials from the frequencies (they are still
    /// counted in [`ArmStats::excluded`]).
    pub exclude_flagged: bool,
}

impl ExperimentConfig {
    pub fn new(game: GameSpec, trials: u32, master_seed: u64) -> Self {
        ExperimentConfig {
            game,
            trials,
            master_seed,
            settings: TrialSettings::default(),
            exclude_flagged: true,
        }
    }
}

/// Success counts of one experiment arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArmStats {
    pub successes: u32,
    pub counted: u32,
    pub excluded: u32,
}

/// Paired success-frequency estimates with a distribution-free confidence
/// interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvantageEstimate {
    pub p1_hat: f64,
    pub p0_hat: f64,
    pub advantage: f64,
    /// Sum of the two per-arm Hoeffding 95% half-widths.
    pub half_width: f64,
    pub trials_per_arm: u32,
    pub arm1: ArmStats,
    pub arm0: ArmStats,
}

/// Two-sided 95% Hoeffding half-width for a frequency over `n` trials:
/// `√(ln(2/0.05) / 2n)`. Distribution-free, so valid at small trial counts.
pub fn hoeffding_half_width(trials: u32) -> f64 {
    ((2.0f64 / 0.05).ln() / (2.0 * f64::from(trials))).sqrt()
}

/// Run one trial of the configured game.
pub fn run_game_trial(
    config: &ExperimentConfig,
    adversary: &dyn Adversary,
    b: u8,
    trial_seed: &SeedTree,
) -> Result<TrialOutcome> {
    match &config.game {
        GameSpec::Qprf { family } => {
            let family = family.instantiate()?;
            run_qprf_trial(&family, adversary, b, trial_seed, &config.settings)
        }
        GameSpec::RopQscpa { scheme } => {
            let instance = scheme.instantiate(&mut trial_seed.child("scheme").rng())?;
            run_rop_qscpa_trial(&instance, adversary, b, trial_seed, &config.settings)
        }
        GameSpec::RopQscca { scheme, scenario } => {
            let instance = scheme.instantiate(&mut trial_seed.child("scheme").rng())?;
            run_rop_qscca_trial(&instance, adversary, b, *scenario, trial_seed, &config.settings)
        }
    }
}

/// The per-trial seed of trial `t`: the fixed splitting rule.
///
/// Both arms share the seed of trial `t`, so the two experiments differ only
/// through the challenge bit: a paired design that makes oracle-independent
/// adversaries score identically in both arms, exactly.
pub fn trial_seed(master_seed: u64, t: u32) -> SeedTree {
    SeedTree::from_master(master_seed).child_idx("trial", u64::from(t))
}

fn run_arm(
    config: &ExperimentConfig,
    adversary: &dyn Adversary,
    b: u8,
) -> Result<Vec<TrialRecord>> {
    (0..config.trials)
        .into_par_iter()
        .map(|t| {
            run_game_trial(config, adversary, b, &trial_seed(config.master_seed, t))
                .map(|outcome| outcome.record)
                .map_err(|e| Error::Trial {
                    arm: b,
                    index: t,
                    source: Box::new(e),
                })
        })
        .collect()
}

fn arm_stats(records: &[TrialRecord], exclude_flagged: bool) -> ArmStats {
    let mut stats = ArmStats {
        successes: 0,
        counted: 0,
        excluded: 0,
    };
    for r in records {
        if exclude_flagged && r.collision_flag {
            stats.excluded += 1;
            continue;
        }
        stats.counted += 1;
        stats.successes += u32::from(r.guess == 1);
    }
    stats
}

/// Estimate the adversary's advantage: run both arms independently with
/// per-trial seeds from the fixed splitting rule, and return the success
/// frequencies with a combined Hoeffding 95% half-width.
pub fn estimate_advantage(
    config: &ExperimentConfig,
    adversary: &dyn Adversary,
) -> Result<AdvantageEstimate> {
    Ok(estimate_advantage_with_records(config, adversary)?.0)
}

/// As [`estimate_advantage`], also returning the raw per-trial records of
/// both arms (`b = 1` first).
pub fn estimate_advantage_with_records(
    config: &ExperimentConfig,
    adversary: &dyn Adversary,
) -> Result<(AdvantageEstimate, Vec<TrialRecord>, Vec<TrialRecord>)> {
    if config.trials < 100 {
        return Err(Error::TooFewTrials {
            min: 100,
            got: config.trials,
        });
    }
    let records1 = run_arm(config, adversary, 1)?;
    let records0 = run_arm(config, adversary, 0)?;
    let arm1 = arm_stats(&records1, config.exclude_flagged);
    let arm0 = arm_stats(&records0, config.exclude_flagged);
    if arm1.counted == 0 || arm0.counted == 0 {
        return Err(Error::InvalidConfig(
            "every trial of an arm was excluded".into(),
        ));
    }
    let p1_hat = f64::from(arm1.successes) / f64::from(arm1.counted);
    let p0_hat = f64::from(arm0.successes) / f64::from(arm0.counted);
    let half_width = hoeffding_half_width(arm1.counted) + hoeffding_half_width(arm0.counted);
    let estimate = AdvantageEstimate {
        p1_hat,
        p0_hat,
        advantage: p1_hat - p0_hat,
        half_width,
        trials_per_arm: config.trials,
        arm1,
        arm0,
    };
    Ok((estimate, records1, records0))
}
