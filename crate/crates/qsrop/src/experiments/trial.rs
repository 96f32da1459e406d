use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::adversary::{Adversary, AdversaryAction, Verdict};
use crate::qcore::{FunctionTable, QState, RegisterLayout};
use crate::schemes::{sample_random_function, sample_random_permutation, QprfFamily, SchemeId, SchemeInstance};
use crate::seed::SeedTree;
use crate::{Error, Result, DEFAULT_QUBIT_CAP, ZERO_WEIGHT};

/// Which decryption oracle the chosen-ciphertext experiment uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// The decryption oracle always answers with the reject string.
    Q0,
    /// The decryption oracle checks the tag.
    Q1,
}

/// Restriction-monitor behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorPolicy {
    /// Weight above which a previously returned ciphertext counts as touched.
    pub delta: f64,
    /// Abort the trial on a violation instead of recording it.
    pub strict: bool,
}

impl Default for MonitorPolicy {
    fn default() -> Self {
        MonitorPolicy {
            delta: ZERO_WEIGHT,
            strict: false,
        }
    }
}

/// Per-trial knobs shared by all games.
#[derive(Debug, Clone)]
pub struct TrialSettings {
    pub cap: usize,
    pub monitor: MonitorPolicy,
    /// Record state snapshots (before every query and at the end).
    pub capture: bool,
}

impl Default for TrialSettings {
    fn default() -> Self {
        TrialSettings {
            cap: DEFAULT_QUBIT_CAP,
            monitor: MonitorPolicy::default(),
            capture: false,
        }
    }
}

/// A recorded restriction violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictionViolation {
    pub query: u32,
    pub ciphertext: u64,
    pub weight: f64,
}

/// The transcript summary of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub game: String,
    pub b: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    pub guess: u8,
    pub enc_queries: u32,
    pub dec_queries: u32,
    /// Weight on the valid never-encrypted `(c, τ)` pairs before each
    /// decryption query.
    pub wvals: Vec<f64>,
    pub violations: Vec<RestrictionViolation>,
    pub collision_flag: bool,
    pub query_seeds: Vec<String>,
}

/// State snapshots, kept only when [`TrialSettings::capture`] is set.
#[derive(Debug)]
pub struct TrialTrace {
    pub pre_enc_states: Vec<QState>,
    pub pre_dec_states: Vec<QState>,
    /// The state immediately before the final measurement.
    pub final_state: QState,
    pub verdict: Verdict,
}

#[derive(Debug)]
pub struct TrialOutcome {
    pub record: TrialRecord,
    pub trace: Option<TrialTrace>,
}

fn build_layout(
    game_segments: &[(String, usize)],
    adversary: &dyn Adversary,
    cap: usize,
) -> Result<RegisterLayout> {
    let mut segs: Vec<(String, usize)> = game_segments.to_vec();
    segs.extend(adversary.extra_segments());
    let borrowed: Vec<(&str, usize)> = segs.iter().map(|(n, w)| (n.as_str(), *w)).collect();
    RegisterLayout::new(&borrowed, cap)
}

pub(crate) fn finish_verdict<R: Rng + ?Sized>(
    state: &mut QState,
    verdict: &Verdict,
    rng: &mut R,
) -> Result<u8> {
    match verdict {
        Verdict::Guess(g) => Ok(*g),
        Verdict::Measure(m) => {
            let mut outcomes = Vec::with_capacity(m.segments.len());
            for seg in &m.segments {
                outcomes.push(state.measure_segment(seg, rng)?.value());
            }
            Ok(u8::from((m.accept)(&outcomes)))
        }
    }
}

/// One trial of the function-family distinguishing game. With `b = 0` the
/// oracle is an instance `F_K` for a random key; with `b = 1` it is one fresh
/// uniformly random table. The oracle is fixed for the whole trial.
pub fn run_qprf_trial(
    family: &QprfFamily,
    adversary: &dyn Adversary,
    b: u8,
    seed: &SeedTree,
    settings: &TrialSettings,
) -> Result<TrialOutcome> {
    let game_segs = vec![
        ("x".to_string(), family.in_width()),
        ("y".to_string(), family.out_width()),
    ];
    let layout = build_layout(&game_segs, adversary, settings.cap)?;
    let mut oracle_rng = seed.child("oracle").rng();
    let table = if b == 0 {
        let key = family.sample_key(&mut oracle_rng);
        family.table(key)?
    } else {
        sample_random_function(family.in_width(), family.out_width(), &mut oracle_rng)?
    };

    let mut state = QState::zero(&layout);
    let mut run = adversary.spawn(seed.child("adversary").rng());
    run.oracle_access(&table);
    run.prepare(&mut state)?;

    let budget = adversary.budget();
    let mut queries = 0u32;
    let mut pre_enc_states = Vec::new();
    let mut measure_rng = seed.child("measure").rng();
    loop {
        match run.next(&mut state)? {
            AdversaryAction::Encrypt => {
                if queries + run.oracle_uses() >= budget.enc {
                    return Err(Error::BudgetExceeded {
                        kind: "oracle",
                        budget: budget.enc,
                    });
                }
                if settings.capture {
                    pre_enc_states.push(state.clone());
                }
                state.apply_xor_oracle(&table, "x", "y")?;
                queries += 1;
            }
            AdversaryAction::Decrypt => {
                return Err(Error::InvalidConfig(
                    "the function-family game has no decryption oracle".into(),
                ));
            }
            AdversaryAction::Finish(verdict) => {
                let total = queries + run.oracle_uses();
                if total > budget.enc {
                    return Err(Error::BudgetExceeded {
                        kind: "oracle",
                        budget: budget.enc,
                    });
                }
                let trace_state = settings.capture.then(|| state.clone());
                let guess = finish_verdict(&mut state, &verdict, &mut measure_rng)?;
                let record = TrialRecord {
                    game: "qprf".into(),
                    b,
                    scenario: None,
                    guess,
                    enc_queries: total,
                    dec_queries: 0,
                    wvals: Vec::new(),
                    violations: Vec::new(),
                    collision_flag: false,
                    query_seeds: Vec::new(),
                };
                let trace = trace_state.map(|final_state| TrialTrace {
                    pre_enc_states,
                    pre_dec_states: Vec::new(),
                    final_state,
                    verdict,
                });
                return Ok(TrialOutcome { record, trace });
            }
        }
    }
}

/// Encryption-oracle helper shared by the chosen-plaintext and
/// chosen-ciphertext runs: samples the in-oracle permutation for the `b = 0`
/// arm, draws per-invocation randomness, tags with an explicit table, and
/// applies the result as one XOR oracle.
pub(crate) struct CcaMachine {
    inner: SchemeInstance,
    tag_table: FunctionTable,
    decrypt_table: FunctionTable,
    reject_table: FunctionTable,
    body_segs: Vec<String>,
    n_body: usize,
    scenario: Scenario,
    monitor: MonitorPolicy,
    pub support: BTreeSet<u64>,
    pub wvals: Vec<f64>,
    pub violations: Vec<RestrictionViolation>,
    pub collision_flag: bool,
    seen_s: BTreeSet<u64>,
    track_collisions: bool,
    pub enc_count: u32,
    pub dec_count: u32,
}

impl CcaMachine {
    pub fn new(
        inner: &SchemeInstance,
        tag_table: FunctionTable,
        scenario: Scenario,
        monitor: MonitorPolicy,
    ) -> Result<Self> {
        let n_body = inner.body_width();
        if tag_table.in_width() != n_body {
            return Err(Error::WidthMismatch {
                context: "tag table input",
                expected: n_body,
                got: tag_table.in_width(),
            });
        }
        let n_m = inner.message_width();
        let n_tau = tag_table.out_width();
        let bot = crate::schemes::BotString::for_message_width(n_m);
        let mut entries = Vec::with_capacity(1 << (n_body + n_tau));
        for ct in 0..1u64 << (n_body + n_tau) {
            let body = ct & ((1 << n_body) - 1);
            let tau = ct >> n_body;
            entries.push(if tag_table.get(body) == tau {
                inner.decrypt_body(body)?
            } else {
                bot.value()
            });
        }
        let decrypt_table = FunctionTable::new(n_body + n_tau, n_m + 1, entries)?;
        let reject_table = FunctionTable::constant(n_body + n_tau, n_m + 1, bot.value())?;
        let body_segs = inner.body_segments().into_iter().map(|(n, _)| n).collect();
        let track_collisions = inner.id() == SchemeId::Construction1Ideal;
        Ok(CcaMachine {
            inner: inner.clone(),
            tag_table,
            decrypt_table,
            reject_table,
            body_segs,
            n_body,
            scenario,
            monitor,
            support: BTreeSet::new(),
            wvals: Vec::new(),
            violations: Vec::new(),
            collision_flag: false,
            seen_s: BTreeSet::new(),
            track_collisions,
            enc_count: 0,
            dec_count: 0,
        })
    }

    fn body_seg_refs(&self) -> Vec<&str> {
        self.body_segs.iter().map(|s| s.as_str()).collect()
    }

    fn response_seg_refs(&self) -> Vec<&str> {
        let mut segs = self.body_seg_refs();
        segs.push("tau");
        segs
    }

    /// Apply one encryption query for challenge bit `b`.
    pub fn encrypt<R: Rng + ?Sized>(
        &mut self,
        state: &mut QState,
        b: u8,
        rng: &mut R,
    ) -> Result<()> {
        let pi = if b == 0 {
            Some(sample_random_permutation(self.inner.message_width(), rng)?)
        } else {
            None
        };
        let body_query = self.inner.embedded_body_query(rng)?;
        let n_m = self.inner.message_width();
        let mut entries = Vec::with_capacity(1 << n_m);
        for m in 0..1u64 << n_m {
            let body = body_query.table.get(m);
            entries.push(body | self.tag_table.get(body) << self.n_body);
        }
        let mut table = FunctionTable::new(
            n_m,
            self.n_body + self.tag_table.out_width(),
            entries,
        )?;
        if let Some(pi) = pi {
            table = table.compose_permutation(&pi)?;
        }
        if self.track_collisions {
            for &s in &body_query.sampled_s {
                if !self.seen_s.insert(s) {
                    self.collision_flag = true;
                }
            }
        }
        state.apply_xor_oracle_spans(&table, &["m"], &self.response_seg_refs())?;
        // support of the encryption responses drives both the restriction
        // monitor and the valid set
        let marginal = state.marginal_weights(&self.body_seg_refs())?;
        for (c, w) in marginal.iter().enumerate() {
            if *w > ZERO_WEIGHT {
                self.support.insert(c as u64);
            }
        }
        self.enc_count += 1;
        Ok(())
    }

    /// Weight of the current state on the valid never-encrypted pairs.
    pub fn valid_weight(&self, state: &QState) -> Result<f64> {
        let mut segs = self.body_seg_refs();
        segs.push("tau");
        let marginal = state.marginal_weights(&segs)?;
        let mut w = 0.0;
        for body in 0..1u64 << self.n_body {
            if !self.support.contains(&body) {
                w += marginal[(body | self.tag_table.get(body) << self.n_body) as usize];
            }
        }
        Ok(w)
    }

    /// Apply one decryption query: monitor the restriction, record the valid
    /// weight, then apply the scenario's oracle.
    pub fn decrypt(&mut self, state: &mut QState) -> Result<()> {
        self.dec_count += 1;
        let marginal = state.marginal_weights(&self.body_seg_refs())?;
        for &c in &self.support {
            let w = marginal[c as usize];
            if w > self.monitor.delta {
                if self.monitor.strict {
                    return Err(Error::RestrictionViolated {
                        query: self.dec_count,
                        ciphertext: c,
                        weight: w,
                    });
                }
                self.violations.push(RestrictionViolation {
                    query: self.dec_count,
                    ciphertext: c,
                    weight: w,
                });
            }
        }
        self.wvals.push(self.valid_weight(state)?);
        let table = match self.scenario {
            Scenario::Q1 => &self.decrypt_table,
            Scenario::Q0 => &self.reject_table,
        };
        state.apply_xor_oracle_spans(table, &self.response_seg_refs(), &["xm", "xflag"])?;
        Ok(())
    }
}

/// One trial of the real-or-permutation chosen-plaintext experiment.
///
/// Each encryption query applies, per the challenge bit, either the
/// construction's table or the same table pre-composed with a fresh uniform
/// permutation of the plaintext, as a single XOR oracle. Per-invocation
/// randomness is drawn once per call from the seed's `("enc", i)` child.
pub fn run_rop_qscpa_trial(
    instance: &SchemeInstance,
    adversary: &dyn Adversary,
    b: u8,
    seed: &SeedTree,
    settings: &TrialSettings,
) -> Result<TrialOutcome> {
    let mut game_segs = vec![("m".to_string(), instance.message_width())];
    game_segs.extend(instance.response_segments());
    let layout = build_layout(&game_segs, adversary, settings.cap)?;
    let response_names: Vec<String> = instance
        .response_segments()
        .into_iter()
        .map(|(n, _)| n)
        .collect();
    let response_refs: Vec<&str> = response_names.iter().map(|s| s.as_str()).collect();

    let mut state = QState::zero(&layout);
    let mut run = adversary.spawn(seed.child("adversary").rng());
    run.prepare(&mut state)?;

    let budget = adversary.budget();
    let track_collisions = instance.id() == SchemeId::Construction1Ideal;
    let mut seen_s: BTreeSet<u64> = BTreeSet::new();
    let mut collision_flag = false;
    let mut enc_count = 0u32;
    let mut query_seeds = Vec::new();
    let mut pre_enc_states = Vec::new();
    let mut measure_rng = seed.child("measure").rng();

    loop {
        match run.next(&mut state)? {
            AdversaryAction::Encrypt => {
                if enc_count >= budget.enc {
                    return Err(Error::BudgetExceeded {
                        kind: "encryption",
                        budget: budget.enc,
                    });
                }
                let query_seed = seed.child_idx("enc", u64::from(enc_count));
                query_seeds.push(query_seed.fingerprint());
                let mut query_rng = query_seed.rng();
                let query = instance.enc_query(b, &mut query_rng)?;
                if track_collisions {
                    for &s in &query.sampled_s {
                        if !seen_s.insert(s) {
                            collision_flag = true;
                        }
                    }
                }
                if settings.capture {
                    pre_enc_states.push(state.clone());
                }
                state.apply_xor_oracle_spans(&query.table, &["m"], &response_refs)?;
                if let Some(r) = &query.classical {
                    run.absorb_classical(r);
                }
                enc_count += 1;
            }
            AdversaryAction::Decrypt => {
                return Err(Error::InvalidConfig(
                    "decryption queries are not available in the rop-qscpa game".into(),
                ));
            }
            AdversaryAction::Finish(verdict) => {
                let trace_state = settings.capture.then(|| state.clone());
                let guess = finish_verdict(&mut state, &verdict, &mut measure_rng)?;
                let record = TrialRecord {
                    game: "rop-qscpa".into(),
                    b,
                    scenario: None,
                    guess,
                    enc_queries: enc_count,
                    dec_queries: 0,
                    wvals: Vec::new(),
                    violations: Vec::new(),
                    collision_flag,
                    query_seeds,
                };
                let trace = trace_state.map(|final_state| TrialTrace {
                    pre_enc_states,
                    pre_dec_states: Vec::new(),
                    final_state,
                    verdict,
                });
                return Ok(TrialOutcome { record, trace });
            }
        }
    }
}

/// One trial of the real-or-permutation chosen-ciphertext experiment.
///
/// Encryption queries behave as in the chosen-plaintext game but also write
/// the tag. Decryption queries apply the honest oracle (scenario `Q1`) or the
/// always-reject oracle (scenario `Q0`); before each one, the restriction
/// monitor checks that no previously returned ciphertext carries weight, and
/// the weight on the valid never-encrypted pairs is recorded.
pub fn run_rop_qscca_trial(
    instance: &SchemeInstance,
    adversary: &dyn Adversary,
    b: u8,
    scenario: Scenario,
    seed: &SeedTree,
    settings: &TrialSettings,
) -> Result<TrialOutcome> {
    if !instance.id().supports_cca() {
        return Err(Error::WrongScheme {
            expected: "construction-2 or construction-2-ideal",
            got: instance.id().as_str(),
        });
    }
    let n_m = instance.message_width();
    let mut game_segs = vec![("m".to_string(), n_m)];
    game_segs.extend(instance.response_segments());
    game_segs.push(("xm".to_string(), n_m));
    game_segs.push(("xflag".to_string(), 1));
    let layout = build_layout(&game_segs, adversary, settings.cap)?;

    let mut machine = CcaMachine::new(
        instance.inner().unwrap(),
        instance.tag_table()?,
        scenario,
        settings.monitor,
    )?;

    let mut state = QState::zero(&layout);
    let mut run = adversary.spawn(seed.child("adversary").rng());
    run.prepare(&mut state)?;

    let budget = adversary.budget();
    let mut query_seeds = Vec::new();
    let mut pre_enc_states = Vec::new();
    let mut pre_dec_states = Vec::new();
    let mut measure_rng = seed.child("measure").rng();

    loop {
        match run.next(&mut state)? {
            AdversaryAction::Encrypt => {
                if machine.enc_count >= budget.enc {
                    return Err(Error::BudgetExceeded {
                        kind: "encryption",
                        budget: budget.enc,
                    });
                }
                let query_seed = seed.child_idx("enc", u64::from(machine.enc_count));
                query_seeds.push(query_seed.fingerprint());
                if settings.capture {
                    pre_enc_states.push(state.clone());
                }
                machine.encrypt(&mut state, b, &mut query_seed.rng())?;
            }
            AdversaryAction::Decrypt => {
                if machine.dec_count >= budget.dec {
                    return Err(Error::BudgetExceeded {
                        kind: "decryption",
                        budget: budget.dec,
                    });
                }
                if settings.capture {
                    pre_dec_states.push(state.clone());
                }
                machine.decrypt(&mut state)?;
            }
            AdversaryAction::Finish(verdict) => {
                let trace_state = settings.capture.then(|| state.clone());
                let guess = finish_verdict(&mut state, &verdict, &mut measure_rng)?;
                let record = TrialRecord {
                    game: "rop-qscca".into(),
                    b,
                    scenario: Some(scenario),
                    guess,
                    enc_queries: machine.enc_count,
                    dec_queries: machine.dec_count,
                    wvals: machine.wvals.clone(),
                    violations: machine.violations.clone(),
                    collision_flag: machine.collision_flag,
                    query_seeds,
                };
                let trace = trace_state.map(|final_state| TrialTrace {
                    pre_enc_states,
                    pre_dec_states,
                    final_state,
                    verdict,
                });
                return Ok(TrialOutcome { record, trace });
            }
        }
    }
}
