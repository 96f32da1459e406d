use std::sync::Arc;

use rand_chacha::ChaCha12Rng;

use super::*;
use crate::attacks::{FourierDistinguisher, GroverForgery, ReplayAdversary, TagForger};
use crate::qcore::{pure_trace_distance, BitString, QState};
use crate::schemes::{BotString, FamilyKind, SchemeId, SchemeSpec};
use crate::seed::SeedTree;
use crate::{Error, Result};

fn c2_weak_spec() -> SchemeSpec {
    // weak tag family over a 3-bit body: n_tau must equal n_r + n_m
    SchemeSpec {
        scheme: SchemeId::Construction2,
        n_m: 2,
        n_r: Some(1),
        n_s: None,
        n_tau: Some(3),
        family: FamilyKind::Strong,
        tag_family: Some(FamilyKind::Weak),
        inner: Some(SchemeId::Construction1Prime),
    }
}

fn c2_ideal_spec() -> SchemeSpec {
    SchemeSpec {
        scheme: SchemeId::Construction2Ideal,
        n_m: 2,
        n_r: Some(2),
        n_s: None,
        n_tau: Some(4),
        family: FamilyKind::Strong,
        tag_family: None,
        inner: Some(SchemeId::Construction1Prime),
    }
}

fn c2_strong_spec() -> SchemeSpec {
    SchemeSpec {
        scheme: SchemeId::Construction2,
        n_m: 2,
        n_r: Some(2),
        n_s: Some(2),
        n_tau: Some(4),
        family: FamilyKind::Strong,
        tag_family: None,
        inner: Some(SchemeId::Construction1),
    }
}

/// Sets the message register to a fixed basis value, queries once, finishes.
struct SingleQuery {
    message: u64,
}

impl Adversary for SingleQuery {
    fn budget(&self) -> QueryBudget {
        QueryBudget::enc_only(1)
    }

    fn spawn(&self, _rng: ChaCha12Rng) -> Box<dyn AdversaryRun> {
        Box::new(SingleQueryRun {
            message: self.message,
            step: 0,
        })
    }
}

struct SingleQueryRun {
    message: u64,
    step: u8,
}

impl AdversaryRun for SingleQueryRun {
    fn prepare(&mut self, state: &mut QState) -> Result<()> {
        if self.message != 0 {
            state.xor_constant(&["m"], self.message)?;
        }
        Ok(())
    }

    fn next(&mut self, _state: &mut QState) -> Result<AdversaryAction> {
        self.step += 1;
        match self.step {
            1 => Ok(AdversaryAction::Encrypt),
            _ => Ok(AdversaryAction::Finish(Verdict::Guess(0))),
        }
    }
}

/// One decryption query with a chosen `(body, τ)`, then stop.
struct ChosenDecQuery {
    body: u64,
    tau: u64,
    body_segs: Vec<String>,
}

impl Adversary for ChosenDecQuery {
    fn budget(&self) -> QueryBudget {
        QueryBudget { enc: 0, dec: 1 }
    }

    fn spawn(&self, _rng: ChaCha12Rng) -> Box<dyn AdversaryRun> {
        Box::new(ChosenDecQueryRun {
            body: self.body,
            tau: self.tau,
            body_segs: self.body_segs.clone(),
            step: 0,
        })
    }
}

struct ChosenDecQueryRun {
    body: u64,
    tau: u64,
    body_segs: Vec<String>,
    step: u8,
}

impl AdversaryRun for ChosenDecQueryRun {
    fn prepare(&mut self, state: &mut QState) -> Result<()> {
        let refs: Vec<&str> = self.body_segs.iter().map(|s| s.as_str()).collect();
        state.xor_constant(&refs, self.body)?;
        state.xor_constant(&["tau"], self.tau)?;
        Ok(())
    }

    fn next(&mut self, _state: &mut QState) -> Result<AdversaryAction> {
        self.step += 1;
        match self.step {
            1 => Ok(AdversaryAction::Decrypt),
            _ => Ok(AdversaryAction::Finish(Verdict::Guess(0))),
        }
    }
}

#[test]
fn always_one_guesses_one_in_both_arms() {
    let family = FamilySpec::square(FamilyKind::Strong, 3);
    let config = ExperimentConfig::new(GameSpec::Qprf { family }, 100, 1);
    let est = estimate_advantage(&config, &AlwaysOne).unwrap();
    assert_eq!(est.p1_hat, 1.0);
    assert_eq!(est.p0_hat, 1.0);
    assert_eq!(est.advantage, 0.0);
}

#[test]
fn xor_test_breaks_the_weak_family() {
    let family = FamilySpec::square(FamilyKind::Weak, 4);
    let config = ExperimentConfig::new(GameSpec::Qprf { family }, 4000, 2);
    let est = estimate_advantage(&config, &XorTest::new(4)).unwrap();
    let floor = 1.0 - 2.0f64.powi(-4) - est.half_width;
    assert!(est.advantage >= floor, "advantage {} < {floor}", est.advantage);
}

#[test]
fn xor_test_fails_against_the_strong_family() {
    let family = FamilySpec::square(FamilyKind::Strong, 4);
    let config = ExperimentConfig::new(GameSpec::Qprf { family }, 2000, 3);
    let est = estimate_advantage(&config, &XorTest::new(4)).unwrap();
    assert!(est.advantage.abs() <= est.half_width, "{est:?}");
}

#[test]
fn random_guess_has_zero_information() {
    let family = FamilySpec::square(FamilyKind::Strong, 3);
    let config = ExperimentConfig::new(GameSpec::Qprf { family }, 2000, 4);
    let est = estimate_advantage(&config, &RandomGuess).unwrap();
    assert!(est.advantage.abs() <= est.half_width);
}

#[test]
fn zero_query_adversaries_make_both_arms_identical() {
    // with no oracle interaction the two arms run the same program on the
    // same per-trial seeds, so the frequencies agree exactly
    let scheme = SchemeSpec::new(SchemeId::Construction1Prime, 3);
    let config = ExperimentConfig::new(GameSpec::RopQscpa { scheme }, 500, 5);
    let est = estimate_advantage(&config, &RandomGuess).unwrap();
    assert_eq!(est.p1_hat, est.p0_hat);
    assert_eq!(est.advantage, 0.0);
}

#[test]
fn honest_arm_encrypts_the_basis_message() {
    // b = 1, classical query m₀: the response segment holds the encryption
    // of m₀ with probability one, and decrypting recovers m₀
    let spec = SchemeSpec::new(SchemeId::Construction1Prime, 3);
    let seed = SeedTree::from_master(77);
    let instance = spec.instantiate(&mut seed.child("scheme").rng()).unwrap();
    let settings = TrialSettings {
        capture: true,
        ..TrialSettings::default()
    };
    let m0 = 0b101u64;
    let out = run_rop_qscpa_trial(&instance, &SingleQuery { message: m0 }, 1, &seed, &settings)
        .unwrap();
    let trace = out.trace.unwrap();
    // replay the per-invocation randomness to learn the expected ciphertext
    let (r, table) = instance
        .c1p_query_tables(&mut seed.child_idx("enc", 0).rng())
        .unwrap();
    let expected = table.get(m0);
    let w = trace
        .final_state
        .basis_weight("c", &BitString::new(3, expected).unwrap())
        .unwrap();
    assert!((w - 1.0).abs() < 1e-12);
    let body = r.value() | expected << 3;
    assert_eq!(instance.decrypt_body(body).unwrap(), m0);
}

#[test]
fn permuted_arm_encrypts_a_uniform_message() {
    // b = 0 with a classical basis query: the encrypted value is the
    // encryption of Π(m₀) for a fresh uniform Π, so the plaintext entering
    // the cipher is uniform. Decrypt each trial's response and test
    // uniformity of the recovered plaintext with a χ² statistic.
    let spec = SchemeSpec::new(SchemeId::Construction1Prime, 3);
    let mut counts = [0u32; 8];
    let trials = 4_000u32;
    for t in 0..trials {
        let seed = trial_seed(900, t);
        let instance = spec.instantiate(&mut seed.child("scheme").rng()).unwrap();
        let settings = TrialSettings {
            capture: true,
            ..TrialSettings::default()
        };
        let out =
            run_rop_qscpa_trial(&instance, &SingleQuery { message: 0b010 }, 0, &seed, &settings)
                .unwrap();
        let trace = out.trace.unwrap();
        let weights = trace.final_state.marginal_weights(&["c"]).unwrap();
        let c = weights
            .iter()
            .position(|&w| (w - 1.0).abs() < 1e-9)
            .expect("classical response") as u64;
        // recover the plaintext that was encrypted
        let (r, _) = instance
            .c1p_query_tables(&mut seed.child_idx("enc", 0).rng())
            .unwrap();
        let body = r.value() | c << 3;
        counts[instance.decrypt_body(body).unwrap() as usize] += 1;
    }
    let expected = f64::from(trials) / 8.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| {
            let d = f64::from(c) - expected;
            d * d / expected
        })
        .sum();
    // 0.999 quantile of χ² with 7 degrees of freedom
    assert!(chi2 < 24.322, "chi2 = {chi2}, counts = {counts:?}");
}

#[test]
fn budgets_are_enforced() {
    struct Greedy;
    impl Adversary for Greedy {
        fn budget(&self) -> QueryBudget {
            QueryBudget::enc_only(1)
        }
        fn spawn(&self, _rng: ChaCha12Rng) -> Box<dyn AdversaryRun> {
            struct R;
            impl AdversaryRun for R {
                fn prepare(&mut self, _s: &mut QState) -> Result<()> {
                    Ok(())
                }
                fn next(&mut self, _s: &mut QState) -> Result<AdversaryAction> {
                    Ok(AdversaryAction::Encrypt)
                }
            }
            Box::new(R)
        }
    }
    let spec = SchemeSpec::new(SchemeId::Construction1Prime, 2);
    let seed = SeedTree::from_master(8);
    let instance = spec.instantiate(&mut seed.child("scheme").rng()).unwrap();
    let err = run_rop_qscpa_trial(&instance, &Greedy, 1, &seed, &TrialSettings::default())
        .unwrap_err();
    assert!(matches!(err, Error::BudgetExceeded { .. }), "{err}");
}

#[test]
fn q0_decryption_is_exactly_a_reject_xor() {
    let spec = c2_strong_spec();
    let seed = SeedTree::from_master(11);
    let instance = spec.instantiate(&mut seed.child("scheme").rng()).unwrap();
    let adversary = ChosenDecQuery {
        body: 0b1011,
        tau: 0b0110,
        body_segs: spec
            .inner_spec()
            .body_segments()
            .into_iter()
            .map(|(n, _)| n)
            .collect(),
    };
    let settings = TrialSettings {
        capture: true,
        ..TrialSettings::default()
    };
    let out =
        run_rop_qscca_trial(&instance, &adversary, 1, Scenario::Q0, &seed, &settings).unwrap();
    let trace = out.trace.unwrap();
    let mut expected = trace.pre_dec_states[0].clone();
    expected
        .xor_constant(&["xm", "xflag"], BotString::for_message_width(2).value())
        .unwrap();
    assert_eq!(trace.final_state, expected);
}

#[test]
fn q1_and_q0_agree_when_no_valid_pair_is_touched() {
    // submit a (body, τ) pair with an invalid tag: the two scenarios apply
    // the same reject XOR, so the joint states stay identical throughout
    let spec = c2_strong_spec();
    let seed = SeedTree::from_master(12);
    let instance = spec.instantiate(&mut seed.child("scheme").rng()).unwrap();
    let body = 0b0101u64;
    let bad_tau = instance.tag_of(body).unwrap() ^ 1;
    let adversary = ChosenDecQuery {
        body,
        tau: bad_tau,
        body_segs: spec
            .inner_spec()
            .body_segments()
            .into_iter()
            .map(|(n, _)| n)
            .collect(),
    };
    let settings = TrialSettings {
        capture: true,
        ..TrialSettings::default()
    };
    let q1 =
        run_rop_qscca_trial(&instance, &adversary, 1, Scenario::Q1, &seed, &settings).unwrap();
    let q0 =
        run_rop_qscca_trial(&instance, &adversary, 1, Scenario::Q0, &seed, &settings).unwrap();
    let (t1, t0) = (q1.trace.unwrap(), q0.trace.unwrap());
    assert_eq!(q1.record.wvals, vec![0.0]);
    let d = pure_trace_distance(&t1.final_state, &t0.final_state).unwrap();
    assert!(d < 1e-9, "distance {d}");
}

#[test]
fn restriction_monitor_flags_replays_and_stays_quiet_otherwise() {
    let spec = c2_strong_spec();
    let seed = SeedTree::from_master(13);
    let instance = spec.instantiate(&mut seed.child("scheme").rng()).unwrap();
    let settings = TrialSettings::default();

    let out =
        run_rop_qscca_trial(&instance, &ReplayAdversary, 1, Scenario::Q1, &seed, &settings)
            .unwrap();
    assert_eq!(out.record.violations.len(), 1);
    let v = &out.record.violations[0];
    assert_eq!(v.query, 1);
    assert!(v.weight >= 1.0 - 1e-9, "weight {}", v.weight);

    // strict mode turns the violation into an error
    let strict = TrialSettings {
        monitor: MonitorPolicy {
            strict: true,
            ..MonitorPolicy::default()
        },
        ..TrialSettings::default()
    };
    let err = run_rop_qscca_trial(&instance, &ReplayAdversary, 1, Scenario::Q1, &seed, &strict)
        .unwrap_err();
    assert!(matches!(err, Error::RestrictionViolated { .. }), "{err}");

    // a compliant adversary records nothing
    let grover = GroverForgery::new(&c2_ideal_spec(), 1).unwrap();
    let ideal_spec = c2_ideal_spec();
    let ideal = ideal_spec
        .instantiate(&mut SeedTree::from_master(14).child("scheme").rng())
        .unwrap();
    let out = run_rop_qscca_trial(
        &ideal,
        &grover,
        1,
        Scenario::Q1,
        &SeedTree::from_master(14),
        &settings,
    )
    .unwrap();
    assert!(out.record.violations.is_empty());
}

#[test]
fn estimates_are_bit_identical_per_master_seed() {
    let scheme = SchemeSpec::new(SchemeId::Construction1Prime, 3);
    let config = ExperimentConfig::new(
        GameSpec::RopQscpa {
            scheme: scheme.clone(),
        },
        200,
        21,
    );
    let a = estimate_advantage(&config, &FourierDistinguisher).unwrap();
    let b = estimate_advantage(&config, &FourierDistinguisher).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    // and a different seed genuinely changes the trial stream
    let other = ExperimentConfig::new(GameSpec::RopQscpa { scheme }, 200, 22);
    let c = estimate_advantage(&other, &FourierDistinguisher).unwrap();
    assert_ne!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&c).unwrap()
    );
}

/// Compare two states that hold the same logical content on layouts whose
/// segments are ordered differently; extra segments must be blank.
fn states_equal_across_layouts(a: &QState, b: &QState) -> bool {
    let names: Vec<String> = a
        .layout()
        .segments()
        .iter()
        .map(|s| s.name.clone())
        .collect();
    for s in a.layout().segments() {
        match b.layout().segment(&s.name) {
            Ok(other) if other.width == s.width => {}
            _ => return false,
        }
    }
    let mut checked = vec![false; b.amplitudes().len()];
    for i in 0..a.amplitudes().len() as u64 {
        let mut j = 0u64;
        for name in &names {
            let sa = a.layout().span(&[name.as_str()]).unwrap();
            let sb = b.layout().span(&[name.as_str()]).unwrap();
            j |= sb.scatter(sa.extract(i));
        }
        let (va, vb) = (a.amplitudes()[i as usize], b.amplitudes()[j as usize]);
        if va.re.to_bits() != vb.re.to_bits() || va.im.to_bits() != vb.im.to_bits() {
            return false;
        }
        checked[j as usize] = true;
    }
    b.amplitudes()
        .iter()
        .zip(&checked)
        .all(|(amp, seen)| *seen || amp.norm_sqr() == 0.0)
}

#[test]
fn reduction_b_reproduces_the_q0_run_exactly() {
    for (label, adversary) in [
        (
            "tag-forger",
            Arc::new(TagForger::new(&c2_ideal_spec()).unwrap()) as Arc<dyn Adversary>,
        ),
        (
            "grover",
            Arc::new(GroverForgery::new(&c2_ideal_spec(), 2).unwrap()) as Arc<dyn Adversary>,
        ),
    ] {
        for b in [0u8, 1u8] {
            let spec = c2_ideal_spec();
            let seed = SeedTree::from_master(31);
            let instance = spec.instantiate(&mut seed.child("scheme").rng()).unwrap();
            let settings = TrialSettings {
                capture: true,
                ..TrialSettings::default()
            };
            let direct = run_rop_qscca_trial(
                &instance,
                adversary.as_ref(),
                b,
                Scenario::Q0,
                &seed,
                &settings,
            )
            .unwrap();

            // same tag table, same seeds: the simulation is the Q0 run
            let wrapper = ReductionB::with_tag_table(
                adversary.clone(),
                &spec,
                instance.ideal_tag_table().unwrap().clone(),
            )
            .unwrap();
            let simulated =
                run_rop_qscpa_trial(instance.inner().unwrap(), &wrapper, b, &seed, &settings)
                    .unwrap();

            assert_eq!(simulated.record.guess, direct.record.guess, "{label} b={b}");
            assert_eq!(
                simulated.record.enc_queries, direct.record.enc_queries,
                "{label} b={b}: B must make exactly the wrapped adversary's \
                 encryption queries"
            );
            assert_eq!(simulated.record.dec_queries, 0);
            let (st, dt) = (simulated.trace.unwrap(), direct.trace.unwrap());
            assert!(
                states_equal_across_layouts(&st.final_state, &dt.final_state),
                "{label} b={b}: final states differ"
            );
        }
    }
}

#[test]
fn reduction_j_mismatch_output_tracks_the_scheme_gap() {
    // positive control: weak tag family, forging adversary. The simulated
    // real game is won almost surely, the idealized one almost never, so the
    // wrapper distinguishes its oracle from random.
    let spec = c2_weak_spec();
    let forger = Arc::new(TagForger::new(&spec).unwrap());
    let wrapper = ReductionJ::new(forger, &spec).unwrap();
    let family = FamilySpec::square(FamilyKind::Weak, 3);
    let config = ExperimentConfig::new(GameSpec::Qprf { family }, 300, 33);
    let est = estimate_advantage(&config, &wrapper).unwrap();
    assert!(
        est.advantage >= est.half_width,
        "wrapper advantage {} below its confidence width {}",
        est.advantage,
        est.half_width
    );
}

#[test]
fn reduction_j_counts_conceptual_oracle_uses() {
    let spec = c2_weak_spec();
    let forger = Arc::new(TagForger::new(&spec).unwrap());
    let budget = forger.budget();
    let wrapper = ReductionJ::new(forger, &spec).unwrap();
    assert_eq!(wrapper.budget().enc, budget.enc + budget.dec);
    let family = FamilySpec::square(FamilyKind::Weak, 3)
        .instantiate()
        .unwrap();
    let out = run_qprf_trial(
        &family,
        &wrapper,
        0,
        &SeedTree::from_master(40),
        &TrialSettings::default(),
    )
    .unwrap();
    // one tag evaluation per simulated encryption and decryption query
    assert_eq!(out.record.enc_queries, budget.enc + budget.dec);
}

#[test]
fn cca_games_require_a_tagged_scheme() {
    let spec = SchemeSpec::new(SchemeId::Construction1, 2);
    let seed = SeedTree::from_master(50);
    let instance = spec.instantiate(&mut seed.child("scheme").rng()).unwrap();
    let err = run_rop_qscca_trial(
        &instance,
        &ReplayAdversary,
        1,
        Scenario::Q1,
        &seed,
        &TrialSettings::default(),
    )
    .unwrap_err();
    assert!(matches!(err, Error::WrongScheme { .. }));
}
