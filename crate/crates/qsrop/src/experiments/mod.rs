//! The distinguishing games as exact simulations of adversary–oracle
//! interaction.
//!
//! Three games are shipped, each as a per-trial runner plus a Monte Carlo
//! advantage estimator:
//!
//! * the function-family game ([`run_qprf_trial`]): keyed instance versus one
//!   fresh random table;
//! * real-or-permutation chosen-plaintext ([`run_rop_qscpa_trial`]): honest
//!   encryption versus encryption of a freshly permuted plaintext;
//! * real-or-permutation chosen-ciphertext ([`run_rop_qscca_trial`]): the
//!   same with a decryption oracle, a restriction monitor over previously
//!   returned ciphertexts, and the per-query weight bookkeeping the bound
//!   checks consume.
//!
//! The reduction wrappers [`ReductionB`] and [`ReductionJ`] turn a
//! chosen-ciphertext adversary into a chosen-plaintext adversary for the
//! inner scheme and into a function-family adversary, respectively.
//!
//! Trials are pure functions of `(instance, adversary, b, seed)`; the
//! estimator runs them in parallel and folds results by trial index, so
//! worker count never changes a report.

mod adversary;
mod estimate;
mod reduction;
mod trial;

pub use adversary::{
    verdict_probability, Adversary, AdversaryAction, AdversaryRun, AlwaysOne, FinalMeasurement,
    QueryBudget, RandomGuess, Verdict, XorTest,
};
pub use estimate::{
    estimate_advantage, estimate_advantage_with_records, hoeffding_half_width, run_game_trial,
    trial_seed, AdvantageEstimate, ArmStats, ExperimentConfig, FamilySpec, GameSpec,
};
pub use reduction::{ReductionB, ReductionJ};
pub use trial::{
    run_qprf_trial, run_rop_qscca_trial, run_rop_qscpa_trial, MonitorPolicy, RestrictionViolation,
    Scenario, TrialOutcome, TrialRecord, TrialSettings, TrialTrace,
};

#[cfg(test)]
mod tests;
