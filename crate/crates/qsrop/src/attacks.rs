//! Concrete adversaries and their report runners.
//!
//! * [`FourierDistinguisher`] — one superposition encryption query between
//!   Walsh–Hadamard transforms; breaks construction 1′ and is the negative
//!   control against construction 1.
//! * [`GroverForgery`] — textbook amplitude amplification over the tag
//!   register, driven through the decryption oracle.
//! * [`TagForger`] — learns the weak tag key from one classical encryption
//!   query and forges a fresh valid ciphertext; the positive control for the
//!   function-family reduction.
//! * [`ClassicalBaseline`] — the best simple classical test (repeat-message
//!   equality), witnessing that the separations are genuinely quantum.
//! * [`ReplayAdversary`] — deliberately decrypts a returned ciphertext, for
//!   restriction-monitor demonstrations.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::experiments::{
    estimate_advantage, run_rop_qscca_trial, verdict_probability, Adversary, AdversaryAction,
    AdversaryRun, AdvantageEstimate, ExperimentConfig, FinalMeasurement, GameSpec, QueryBudget,
    Scenario, TrialSettings, Verdict,
};
use crate::qcore::{FunctionTable, QState};
use crate::schemes::{SchemeId, SchemeSpec};
use crate::seed::SeedTree;
use crate::{Error, Result};

/// A frequency with its Hoeffding 95% half-width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessEstimate {
    pub successes: u32,
    pub trials: u32,
    pub frequency: f64,
    pub half_width: f64,
}

/// Closed-form reference values for searching one valid tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroverTheory {
    /// `sin²((i+½)θ)` with `sin(θ/2) = √(2^{−n_τ})`.
    pub exact: f64,
    /// `4i² · 2^{−n_τ}`, clamped to `[0, 1]`. Good for large `i`; degenerate
    /// at `i = 0`, where the exact value is `2^{−n_τ}`.
    pub approx: f64,
    /// Upper bound on the expected valid weight before query `i`.
    pub wval_bound: f64,
    /// Upper bound on the expected root of that weight, `2i · 2^{−n_τ/2}`.
    pub sqrt_wval_bound: f64,
}

/// Evaluate the closed forms for `i` search queries at tag width `n_tau`.
pub fn grover_theory(iterations: u32, n_tau: usize) -> GroverTheory {
    let i = f64::from(iterations);
    let per_tag = 2.0f64.powi(-(n_tau as i32));
    let theta = 2.0 * per_tag.sqrt().asin();
    GroverTheory {
        exact: ((i + 0.5) * theta).sin().powi(2),
        approx: (4.0 * i * i * per_tag).min(1.0),
        wval_bound: (4.0 * i * i * per_tag).min(1.0),
        sqrt_wval_bound: (2.0 * i * per_tag.sqrt()).min(1.0),
    }
}

/// The largest query count before the success curve first peaks:
/// `⌊π/(2θ) − ½⌋`.
pub fn grover_first_maximum(n_tau: usize) -> u32 {
    let theta = 2.0 * (2.0f64.powi(-(n_tau as i32)).sqrt()).asin();
    (PI / (2.0 * theta) - 0.5 + 1e-9).floor() as u32
}

/// A report of one attack run: parameters, measured numbers, and the theory
/// reference where one exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub attack: String,
    pub parameters: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub advantage: Option<AdvantageEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub success: Option<SuccessEstimate>,
    /// Success probability read off the exact final state (no sampling).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_success: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theory: Option<GroverTheory>,
    /// Collision-flagged trials excluded from the estimate (both arms).
    pub excluded_trials: u32,
}

/// Uniform superposition in, one encryption query, Walsh–Hadamard on the
/// message and ciphertext-body segments, guess 1 iff the two outcomes agree.
///
/// Against construction 1′ the honest arm produces equal outcomes with
/// probability one: the response is `Σ_m |m, m⊕y⟩` up to normalisation, and
/// after the transform every amplitude off the diagonal cancels exactly. The
/// permuted arm agrees only with probability about `2/2^{n_m}`.
pub struct FourierDistinguisher;

impl Adversary for FourierDistinguisher {
    fn budget(&self) -> QueryBudget {
        QueryBudget::enc_only(1)
    }

    fn spawn(&self, _rng: ChaCha12Rng) -> Box<dyn AdversaryRun> {
        Box::new(FourierRun { queried: false })
    }
}

struct FourierRun {
    queried: bool,
}

impl AdversaryRun for FourierRun {
    fn prepare(&mut self, state: &mut QState) -> Result<()> {
        state.walsh_hadamard("m")
    }

    fn next(&mut self, state: &mut QState) -> Result<AdversaryAction> {
        if !self.queried {
            self.queried = true;
            return Ok(AdversaryAction::Encrypt);
        }
        state.walsh_hadamard("m")?;
        state.walsh_hadamard("c")?;
        Ok(AdversaryAction::Finish(Verdict::Measure(
            FinalMeasurement::new(&["m", "c"], |o| o[0] == o[1]),
        )))
    }
}

/// Run the Walsh–Hadamard distinguisher against construction 1′.
pub fn fourier_attack(
    n_m: usize,
    n_r: usize,
    trials: u32,
    master_seed: u64,
    settings: &TrialSettings,
) -> Result<AttackReport> {
    let mut scheme = SchemeSpec::new(SchemeId::Construction1Prime, n_m);
    scheme.n_r = Some(n_r);
    let mut config = ExperimentConfig::new(GameSpec::RopQscpa { scheme }, trials, master_seed);
    config.settings = settings.clone();
    let estimate = estimate_advantage(&config, &FourierDistinguisher)?;
    let excluded = estimate.arm1.excluded + estimate.arm0.excluded;
    Ok(AttackReport {
        attack: "fourier-vs-construction-1prime".into(),
        parameters: BTreeMap::from([
            ("n_m".into(), json!(n_m)),
            ("n_r".into(), json!(n_r)),
            ("trials_per_arm".into(), json!(trials)),
            ("seed".into(), json!(master_seed)),
        ]),
        advantage: Some(estimate),
        success: None,
        exact_success: None,
        theory: None,
        excluded_trials: excluded,
    })
}

/// Run the identical distinguisher against the idealized construction 1: the
/// negative control. Collision-flagged trials are excluded and counted.
pub fn fourier_vs_construction1(
    n_m: usize,
    n_r: usize,
    n_s: usize,
    trials: u32,
    master_seed: u64,
    settings: &TrialSettings,
) -> Result<AttackReport> {
    let mut scheme = SchemeSpec::new(SchemeId::Construction1Ideal, n_m);
    scheme.n_r = Some(n_r);
    scheme.n_s = Some(n_s);
    let mut config = ExperimentConfig::new(GameSpec::RopQscpa { scheme }, trials, master_seed);
    config.settings = settings.clone();
    let estimate = estimate_advantage(&config, &FourierDistinguisher)?;
    let excluded = estimate.arm1.excluded + estimate.arm0.excluded;
    Ok(AttackReport {
        attack: "fourier-vs-construction-1-ideal".into(),
        parameters: BTreeMap::from([
            ("n_m".into(), json!(n_m)),
            ("n_r".into(), json!(n_r)),
            ("n_s".into(), json!(n_s)),
            ("trials_per_arm".into(), json!(trials)),
            ("seed".into(), json!(master_seed)),
        ]),
        advantage: Some(estimate),
        success: None,
        exact_success: None,
        theory: None,
        excluded_trials: excluded,
    })
}

/// Amplitude amplification over the tag register for one fixed,
/// never-encrypted ciphertext body (the all-zero body).
///
/// Marking goes through the decryption oracle: the response register is held
/// in a character state under which XORing a message value and XORing the
/// reject string differ by a relative sign, so the valid branch is marked
/// without leaving any residue. Diffusion is the adversary's own reflection
/// about the uniform state. A final honest decryption query converts success
/// into a measurable flag bit, so the guess is 1 exactly when a valid pair
/// was found.
pub struct GroverForgery {
    iterations: u32,
    n_tau: usize,
    body_width: usize,
    body_segs: Vec<String>,
    joint: bool,
}

impl GroverForgery {
    pub fn new(scheme: &SchemeSpec, iterations: u32) -> Result<Self> {
        if !scheme.scheme.supports_cca() {
            return Err(Error::WrongScheme {
                expected: "construction-2 or construction-2-ideal",
                got: scheme.scheme.as_str(),
            });
        }
        let inner = scheme.inner_spec();
        Ok(GroverForgery {
            iterations,
            n_tau: scheme.n_tau(),
            body_width: inner.body_width(),
            body_segs: inner.body_segments().into_iter().map(|(n, _)| n).collect(),
            joint: false,
        })
    }

    /// Search over `(c, τ)` jointly. The angle is unchanged: `2^{n_c}` marked
    /// pairs out of `2^{n_c+n_τ}`.
    pub fn joint(mut self) -> Self {
        self.joint = true;
        self
    }

    pub fn iterations(&self) -> u32 {
        self.iterations
    }
}

impl Adversary for GroverForgery {
    fn budget(&self) -> QueryBudget {
        QueryBudget {
            enc: 0,
            dec: self.iterations + 1,
        }
    }

    fn spawn(&self, _rng: ChaCha12Rng) -> Box<dyn AdversaryRun> {
        let search_width = if self.joint {
            self.body_width + self.n_tau
        } else {
            self.n_tau
        };
        let nonzero =
            FunctionTable::from_fn(search_width, 1, |v| u64::from(v != 0)).expect("indicator");
        Box::new(GroverRun {
            iterations: self.iterations,
            marks_issued: 0,
            verifying: false,
            body_segs: self.body_segs.clone(),
            joint: self.joint,
            nonzero,
        })
    }
}

struct GroverRun {
    iterations: u32,
    marks_issued: u32,
    verifying: bool,
    body_segs: Vec<String>,
    joint: bool,
    nonzero: FunctionTable,
}

impl GroverRun {
    fn search_segs(&self) -> Vec<&str> {
        let mut segs: Vec<&str> = Vec::new();
        if self.joint {
            segs.extend(self.body_segs.iter().map(|s| s.as_str()));
        }
        segs.push("tau");
        segs
    }

    fn diffuse(&self, state: &mut QState) -> Result<()> {
        for seg in self.search_segs() {
            state.walsh_hadamard(seg)?;
        }
        state.apply_phase_oracle(&self.nonzero, &self.search_segs())?;
        for seg in self.search_segs() {
            state.walsh_hadamard(seg)?;
        }
        Ok(())
    }
}

impl AdversaryRun for GroverRun {
    fn prepare(&mut self, state: &mut QState) -> Result<()> {
        // uniform superposition over the search space; the body stays at the
        // fixed all-zero (never encrypted) ciphertext unless searching jointly
        for seg in self.search_segs() {
            state.walsh_hadamard(seg)?;
        }
        // character state on the response register
        state.xor_constant(&["xflag"], 1)?;
        state.walsh_hadamard("xm")?;
        state.walsh_hadamard("xflag")?;
        Ok(())
    }

    fn next(&mut self, state: &mut QState) -> Result<AdversaryAction> {
        if self.verifying {
            return Ok(AdversaryAction::Finish(Verdict::Measure(
                FinalMeasurement::new(&["xflag"], |o| o[0] == 1),
            )));
        }
        if self.marks_issued > 0 {
            // the runner has applied the previous marking query; complete the
            // iteration with the reflection about the uniform state
            self.diffuse(state)?;
        }
        if self.marks_issued < self.iterations {
            self.marks_issued += 1;
            return Ok(AdversaryAction::Decrypt);
        }
        // undo the character preparation so the verification query writes a
        // readable basis flag
        state.walsh_hadamard("xm")?;
        state.walsh_hadamard("xflag")?;
        self.verifying = true;
        Ok(AdversaryAction::Decrypt)
    }
}

/// Run the tag search and report the exact success probability, a Monte
/// Carlo frequency, and the closed-form references.
pub fn grover_forgery(
    scheme: &SchemeSpec,
    iterations: u32,
    trials: u32,
    master_seed: u64,
    settings: &TrialSettings,
) -> Result<AttackReport> {
    let adversary = GroverForgery::new(scheme, iterations)?;
    let root = SeedTree::from_master(master_seed);

    // exact: one run, success probability evaluated on the final state
    let mut capture = settings.clone();
    capture.capture = true;
    let exact_seed = root.child("exact");
    let instance = scheme.instantiate(&mut exact_seed.child("scheme").rng())?;
    let outcome = run_rop_qscca_trial(
        &instance,
        &adversary,
        1,
        Scenario::Q1,
        &exact_seed,
        &capture,
    )?;
    let trace = outcome.trace.expect("captured");
    let exact = verdict_probability(&trace.final_state, &trace.verdict)?;

    // sampled success frequency
    let successes: u32 = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<u32> {
            let seed = root.child_idx("trial", u64::from(t));
            let instance = scheme.instantiate(&mut seed.child("scheme").rng())?;
            let out = run_rop_qscca_trial(&instance, &adversary, 1, Scenario::Q1, &seed, settings)?;
            Ok(u32::from(out.record.guess == 1))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let frequency = f64::from(successes) / f64::from(trials.max(1));

    Ok(AttackReport {
        attack: "grover-tag-forgery".into(),
        parameters: BTreeMap::from([
            ("n_tau".into(), json!(scheme.n_tau())),
            ("iterations".into(), json!(iterations)),
            ("trials".into(), json!(trials)),
            ("seed".into(), json!(master_seed)),
        ]),
        advantage: None,
        success: Some(SuccessEstimate {
            successes,
            trials,
            frequency,
            half_width: if trials > 0 {
                crate::experiments::hoeffding_half_width(trials)
            } else {
                1.0
            },
        }),
        exact_success: Some(exact),
        theory: Some(grover_theory(iterations, scheme.n_tau())),
        excluded_trials: 0,
    })
}

/// Classical repeat-message test: encrypt the same message twice with
/// classical basis queries and guess 1 iff the two responses agree. Fresh
/// per-invocation randomness makes both arms look identical, so the
/// advantage vanishes against every shipped construction.
pub struct ClassicalBaseline {
    response_segs: Vec<String>,
}

impl ClassicalBaseline {
    pub fn new(scheme: &SchemeSpec) -> Self {
        ClassicalBaseline {
            response_segs: scheme
                .response_segments()
                .into_iter()
                .map(|(n, _)| n)
                .collect(),
        }
    }
}

impl Adversary for ClassicalBaseline {
    fn budget(&self) -> QueryBudget {
        QueryBudget::enc_only(2)
    }

    fn spawn(&self, rng: ChaCha12Rng) -> Box<dyn AdversaryRun> {
        Box::new(ClassicalBaselineRun {
            rng,
            step: 0,
            first: Vec::new(),
            response_segs: self.response_segs.clone(),
        })
    }
}

struct ClassicalBaselineRun {
    rng: ChaCha12Rng,
    step: u8,
    first: Vec<u64>,
    response_segs: Vec<String>,
}

impl AdversaryRun for ClassicalBaselineRun {
    fn prepare(&mut self, _state: &mut QState) -> Result<()> {
        Ok(())
    }

    fn next(&mut self, state: &mut QState) -> Result<AdversaryAction> {
        self.step += 1;
        match self.step {
            1 => Ok(AdversaryAction::Encrypt),
            2 => {
                for seg in &self.response_segs.clone() {
                    let v = state.measure_segment(seg, &mut self.rng)?.value();
                    self.first.push(v);
                    state.xor_constant(&[seg.as_str()], v)?;
                }
                Ok(AdversaryAction::Encrypt)
            }
            _ => {
                let mut second = Vec::new();
                for seg in &self.response_segs.clone() {
                    second.push(state.measure_segment(seg, &mut self.rng)?.value());
                }
                Ok(AdversaryAction::Finish(Verdict::Guess(u8::from(
                    second == self.first,
                ))))
            }
        }
    }
}

/// Estimate the classical baseline's advantage against a scheme, in the
/// chosen-ciphertext game when the scheme supports one.
pub fn classical_baseline_report(
    scheme: &SchemeSpec,
    trials: u32,
    master_seed: u64,
    settings: &TrialSettings,
) -> Result<AttackReport> {
    let adversary = ClassicalBaseline::new(scheme);
    let game = if scheme.scheme.supports_cca() {
        GameSpec::RopQscca {
            scheme: scheme.clone(),
            scenario: Scenario::Q1,
        }
    } else {
        GameSpec::RopQscpa {
            scheme: scheme.clone(),
        }
    };
    let mut config = ExperimentConfig::new(game, trials, master_seed);
    config.settings = settings.clone();
    let estimate = estimate_advantage(&config, &adversary)?;
    let excluded = estimate.arm1.excluded + estimate.arm0.excluded;
    Ok(AttackReport {
        attack: format!("classical-baseline-vs-{}", scheme.scheme),
        parameters: BTreeMap::from([
            ("n_m".into(), json!(scheme.n_m)),
            ("trials_per_arm".into(), json!(trials)),
            ("seed".into(), json!(master_seed)),
        ]),
        advantage: Some(estimate),
        success: None,
        exact_success: None,
        theory: None,
        excluded_trials: excluded,
    })
}

/// Against the weak tag family, one classical encryption query reveals the
/// tag key; the forger then decrypts a fresh ciphertext obtained by flipping
/// message bits of the returned body, and guesses 1 iff the recovered
/// plaintext matches the honest-arm prediction. Restriction-compliant: the
/// forged body differs from the returned one.
pub struct TagForger {
    n_r: usize,
    delta: u64,
}

impl TagForger {
    pub fn new(scheme: &SchemeSpec) -> Result<Self> {
        if !scheme.scheme.supports_cca() {
            return Err(Error::WrongScheme {
                expected: "construction-2 or construction-2-ideal",
                got: scheme.scheme.as_str(),
            });
        }
        if scheme.inner_spec().scheme != SchemeId::Construction1Prime {
            return Err(Error::InvalidConfig(
                "the tag forger reads the inner randomness segment; use an \
                 inner construction-1prime scheme"
                    .into(),
            ));
        }
        Ok(TagForger {
            n_r: scheme.n_r(),
            delta: 1,
        })
    }
}

impl Adversary for TagForger {
    fn budget(&self) -> QueryBudget {
        QueryBudget { enc: 1, dec: 1 }
    }

    fn spawn(&self, rng: ChaCha12Rng) -> Box<dyn AdversaryRun> {
        Box::new(TagForgerRun {
            rng,
            step: 0,
            n_r: self.n_r,
            delta: self.delta,
        })
    }
}

struct TagForgerRun {
    rng: ChaCha12Rng,
    step: u8,
    n_r: usize,
    delta: u64,
}

impl AdversaryRun for TagForgerRun {
    fn prepare(&mut self, _state: &mut QState) -> Result<()> {
        Ok(())
    }

    fn next(&mut self, state: &mut QState) -> Result<AdversaryAction> {
        self.step += 1;
        match self.step {
            // classical query on m = 0
            1 => Ok(AdversaryAction::Encrypt),
            2 => {
                // read (r, c, τ); under the weak family τ = K₂ ⊕ (r‖c), so
                // flipping message bits of the body shifts the valid tag by
                // exactly the same amount
                let _r0 = state.measure_segment("r", &mut self.rng)?.value();
                let _c0 = state.measure_segment("c", &mut self.rng)?.value();
                let _tau0 = state.measure_segment("tau", &mut self.rng)?.value();
                state.xor_constant(&["c"], self.delta)?;
                state.xor_constant(&["tau"], self.delta << self.n_r)?;
                Ok(AdversaryAction::Decrypt)
            }
            _ => {
                let delta = self.delta;
                Ok(AdversaryAction::Finish(Verdict::Measure(
                    FinalMeasurement::new(&["xm", "xflag"], move |o| o[0] == delta && o[1] == 0),
                )))
            }
        }
    }
}

/// Encrypts once, then immediately submits the returned ciphertext to the
/// decryption oracle. Every run violates the decryption restriction with
/// full weight; the monitor must flag it.
pub struct ReplayAdversary;

impl Adversary for ReplayAdversary {
    fn budget(&self) -> QueryBudget {
        QueryBudget { enc: 1, dec: 1 }
    }

    fn spawn(&self, _rng: ChaCha12Rng) -> Box<dyn AdversaryRun> {
        Box::new(ReplayRun { step: 0 })
    }
}

struct ReplayRun {
    step: u8,
}

impl AdversaryRun for ReplayRun {
    fn prepare(&mut self, _state: &mut QState) -> Result<()> {
        Ok(())
    }

    fn next(&mut self, _state: &mut QState) -> Result<AdversaryAction> {
        self.step += 1;
        match self.step {
            1 => Ok(AdversaryAction::Encrypt),
            2 => Ok(AdversaryAction::Decrypt),
            _ => Ok(AdversaryAction::Finish(Verdict::Guess(0))),
        }
    }
}

/// Submits classical decryption queries with uniformly random bodies and
/// tags, never querying the encryption oracle. The recorded per-query valid
/// weights are exact hit indicators, so their mean is the acceptance rate.
pub struct RandomTagProbe {
    queries: u32,
    body_width: usize,
    n_tau: usize,
    body_segs: Vec<String>,
}

impl RandomTagProbe {
    pub fn new(scheme: &SchemeSpec, queries: u32) -> Result<Self> {
        if !scheme.scheme.supports_cca() {
            return Err(Error::WrongScheme {
                expected: "construction-2 or construction-2-ideal",
                got: scheme.scheme.as_str(),
            });
        }
        let inner = scheme.inner_spec();
        Ok(RandomTagProbe {
            queries,
            body_width: inner.body_width(),
            n_tau: scheme.n_tau(),
            body_segs: inner.body_segments().into_iter().map(|(n, _)| n).collect(),
        })
    }
}

impl Adversary for RandomTagProbe {
    fn budget(&self) -> QueryBudget {
        QueryBudget {
            enc: 0,
            dec: self.queries,
        }
    }

    fn spawn(&self, rng: ChaCha12Rng) -> Box<dyn AdversaryRun> {
        Box::new(RandomTagProbeRun {
            rng,
            remaining: self.queries,
            cur_body: 0,
            cur_tau: 0,
            body_width: self.body_width,
            n_tau: self.n_tau,
            body_segs: self.body_segs.clone(),
        })
    }
}

struct RandomTagProbeRun {
    rng: ChaCha12Rng,
    remaining: u32,
    cur_body: u64,
    cur_tau: u64,
    body_width: usize,
    n_tau: usize,
    body_segs: Vec<String>,
}

impl AdversaryRun for RandomTagProbeRun {
    fn prepare(&mut self, _state: &mut QState) -> Result<()> {
        Ok(())
    }

    fn next(&mut self, state: &mut QState) -> Result<AdversaryAction> {
        if self.remaining == 0 {
            return Ok(AdversaryAction::Finish(Verdict::Guess(0)));
        }
        self.remaining -= 1;
        let body: u64 = self.rng.gen_range(0..1u64 << self.body_width);
        let tau: u64 = self.rng.gen_range(0..1u64 << self.n_tau);
        let refs: Vec<&str> = self.body_segs.iter().map(|s| s.as_str()).collect();
        state.xor_constant(&refs, self.cur_body ^ body)?;
        state.xor_constant(&["tau"], self.cur_tau ^ tau)?;
        self.cur_body = body;
        self.cur_tau = tau;
        Ok(AdversaryAction::Decrypt)
    }
}
