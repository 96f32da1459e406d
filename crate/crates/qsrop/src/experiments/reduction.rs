use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use super::adversary::{Adversary, AdversaryAction, AdversaryRun, QueryBudget, Verdict};
use super::trial::{finish_verdict, CcaMachine, MonitorPolicy, Scenario};
use crate::qcore::{BitString, FunctionTable, QState};
use crate::schemes::{sample_random_function, BotString, SchemeId, SchemeSpec};
use crate::{Error, Result};

fn require_c2(spec: &SchemeSpec) -> Result<()> {
    if !spec.scheme.supports_cca() {
        return Err(Error::WrongScheme {
            expected: "construction-2 or construction-2-ideal",
            got: spec.scheme.as_str(),
        });
    }
    Ok(())
}

/// The chosen-plaintext adversary built from a chosen-ciphertext adversary.
///
/// It plays the chosen-plaintext game against the *inner* scheme, runs the
/// wrapped adversary, simulates the tag half of each encryption response with
/// its own sampled random tag function, and answers every decryption query
/// with the reject string. With a shared tag table and shared seeds, its run
/// is the wrapped adversary's `Q0`-scenario run, state for state.
pub struct ReductionB {
    adversary: Arc<dyn Adversary>,
    scheme: SchemeSpec,
    tag_table: Option<FunctionTable>,
}

impl ReductionB {
    /// Wrap a chosen-ciphertext adversary; the tag function is sampled from
    /// the per-trial stream.
    pub fn new(adversary: Arc<dyn Adversary>, scheme: &SchemeSpec) -> Result<Self> {
        require_c2(scheme)?;
        Ok(ReductionB {
            adversary,
            scheme: scheme.clone(),
            tag_table: None,
        })
    }

    /// Wrap with an explicit tag table (pairing harnesses inject the table of
    /// the idealized instance under comparison).
    pub fn with_tag_table(
        adversary: Arc<dyn Adversary>,
        scheme: &SchemeSpec,
        tag_table: FunctionTable,
    ) -> Result<Self> {
        require_c2(scheme)?;
        Ok(ReductionB {
            adversary,
            scheme: scheme.clone(),
            tag_table: Some(tag_table),
        })
    }
}

impl Adversary for ReductionB {
    fn budget(&self) -> QueryBudget {
        // exactly as many encryption queries as the wrapped adversary
        QueryBudget::enc_only(self.adversary.budget().enc)
    }

    fn extra_segments(&self) -> Vec<(String, usize)> {
        // Everything the wrapped adversary's register has beyond the inner
        // scheme's chosen-plaintext segments.
        let inner = self.scheme.inner_spec();
        let mut segs = Vec::new();
        if inner.scheme == SchemeId::Construction1Prime {
            segs.push(("r".to_string(), inner.n_r()));
        }
        segs.push(("tau".to_string(), self.scheme.n_tau()));
        segs.push(("xm".to_string(), self.scheme.n_m));
        segs.push(("xflag".to_string(), 1));
        segs.extend(self.adversary.extra_segments());
        segs
    }

    fn spawn(&self, rng: ChaCha12Rng) -> Box<dyn AdversaryRun> {
        // The wrapped adversary sees the unmodified stream, so its choices
        // match a direct run on the same seed; the wrapper's own sampling
        // uses a separate stream of the same seed.
        let mut own_rng = rng.clone();
        own_rng.set_stream(0xb);
        let inner = self.scheme.inner_spec();
        let n_body = inner.body_width();
        let tag_table = match &self.tag_table {
            Some(t) => t.clone(),
            None => sample_random_function(n_body, self.scheme.n_tau(), &mut own_rng)
                .expect("tag table widths are validated at construction"),
        };
        let body_segs = inner
            .body_segments()
            .into_iter()
            .map(|(n, _)| n)
            .collect();
        Box::new(ReductionBRun {
            inner_run: self.adversary.spawn(rng),
            tag_table,
            body_segs,
            deposit_r: inner.scheme == SchemeId::Construction1Prime,
            bot: BotString::for_message_width(self.scheme.n_m).value(),
            dec_budget: self.adversary.budget().dec,
            dec_simulated: 0,
            pending_tag: false,
            pending_r: None,
        })
    }
}

struct ReductionBRun {
    inner_run: Box<dyn AdversaryRun>,
    tag_table: FunctionTable,
    body_segs: Vec<String>,
    deposit_r: bool,
    bot: u64,
    dec_budget: u32,
    dec_simulated: u32,
    pending_tag: bool,
    pending_r: Option<u64>,
}

impl AdversaryRun for ReductionBRun {
    fn prepare(&mut self, state: &mut QState) -> Result<()> {
        self.inner_run.prepare(state)
    }

    fn next(&mut self, state: &mut QState) -> Result<AdversaryAction> {
        if self.pending_tag {
            // complete the simulated response: deposit the classical
            // randomness (inner construction 1′), then tag the body
            if let Some(r) = self.pending_r.take() {
                state.xor_constant(&["r"], r)?;
            }
            let body_refs: Vec<&str> = self.body_segs.iter().map(|s| s.as_str()).collect();
            state.apply_xor_oracle_spans(&self.tag_table, &body_refs, &["tau"])?;
            self.pending_tag = false;
        }
        loop {
            match self.inner_run.next(state)? {
                AdversaryAction::Encrypt => {
                    self.pending_tag = true;
                    return Ok(AdversaryAction::Encrypt);
                }
                AdversaryAction::Decrypt => {
                    if self.dec_simulated >= self.dec_budget {
                        return Err(Error::BudgetExceeded {
                            kind: "simulated decryption",
                            budget: self.dec_budget,
                        });
                    }
                    self.dec_simulated += 1;
                    state.xor_constant(&["xm", "xflag"], self.bot)?;
                }
                AdversaryAction::Finish(v) => return Ok(AdversaryAction::Finish(v)),
            }
        }
    }

    fn absorb_classical(&mut self, classical: &BitString) {
        if self.deposit_r {
            self.pending_r = Some(classical.value());
        }
    }
}

/// The function-family adversary built from a chosen-ciphertext adversary.
///
/// It flips a fair coin for the challenge bit, simulates the full
/// chosen-ciphertext experiment with its own inner keys and randomness while
/// using its oracle's table as the tag function, and outputs 1 when the
/// simulated guess misses the coin. With the keyed oracle it simulates the
/// real scheme; with the random oracle, the idealized one.
///
/// Every tag evaluation is a conceptual oracle use and is reported through
/// [`AdversaryRun::oracle_uses`]: at most one per encryption and one per
/// decryption query.
pub struct ReductionJ {
    adversary: Arc<dyn Adversary>,
    scheme: SchemeSpec,
}

impl ReductionJ {
    pub fn new(adversary: Arc<dyn Adversary>, scheme: &SchemeSpec) -> Result<Self> {
        require_c2(scheme)?;
        Ok(ReductionJ {
            adversary,
            scheme: scheme.clone(),
        })
    }
}

impl Adversary for ReductionJ {
    fn budget(&self) -> QueryBudget {
        let b = self.adversary.budget();
        QueryBudget::enc_only(b.enc + b.dec)
    }

    fn extra_segments(&self) -> Vec<(String, usize)> {
        // the whole register of the simulated chosen-ciphertext experiment
        let inner = self.scheme.inner_spec();
        let mut segs = vec![("m".to_string(), self.scheme.n_m)];
        segs.extend(inner.body_segments());
        segs.push(("tau".to_string(), self.scheme.n_tau()));
        segs.push(("xm".to_string(), self.scheme.n_m));
        segs.push(("xflag".to_string(), 1));
        segs.extend(self.adversary.extra_segments());
        segs
    }

    fn spawn(&self, rng: ChaCha12Rng) -> Box<dyn AdversaryRun> {
        let mut own_rng = rng.clone();
        own_rng.set_stream(0x1);
        Box::new(ReductionJRun {
            a_run: self.adversary.spawn(rng),
            a_budget: self.adversary.budget(),
            inner_spec: self.scheme.inner_spec(),
            oracle_table: None,
            machine: None,
            b_sim: 0,
            own_rng,
            uses: 0,
        })
    }
}

struct ReductionJRun {
    a_run: Box<dyn AdversaryRun>,
    a_budget: QueryBudget,
    inner_spec: SchemeSpec,
    oracle_table: Option<FunctionTable>,
    machine: Option<CcaMachine>,
    b_sim: u8,
    own_rng: ChaCha12Rng,
    uses: u32,
}

impl AdversaryRun for ReductionJRun {
    fn oracle_access(&mut self, table: &FunctionTable) {
        self.oracle_table = Some(table.clone());
    }

    fn prepare(&mut self, state: &mut QState) -> Result<()> {
        let table = self.oracle_table.take().ok_or_else(|| {
            Error::InvalidConfig("the wrapper needs table access to its oracle".into())
        })?;
        self.b_sim = self.own_rng.gen_range(0..2);
        let inner = self.inner_spec.instantiate(&mut self.own_rng)?;
        self.machine = Some(CcaMachine::new(
            &inner,
            table,
            Scenario::Q1,
            MonitorPolicy::default(),
        )?);
        self.a_run.prepare(state)
    }

    fn next(&mut self, state: &mut QState) -> Result<AdversaryAction> {
        let machine = self.machine.as_mut().expect("prepared");
        loop {
            match self.a_run.next(state)? {
                AdversaryAction::Encrypt => {
                    if machine.enc_count >= self.a_budget.enc {
                        return Err(Error::BudgetExceeded {
                            kind: "simulated encryption",
                            budget: self.a_budget.enc,
                        });
                    }
                    machine.encrypt(state, self.b_sim, &mut self.own_rng)?;
                    self.uses += 1;
                }
                AdversaryAction::Decrypt => {
                    if machine.dec_count >= self.a_budget.dec {
                        return Err(Error::BudgetExceeded {
                            kind: "simulated decryption",
                            budget: self.a_budget.dec,
                        });
                    }
                    machine.decrypt(state)?;
                    self.uses += 1;
                }
                AdversaryAction::Finish(verdict) => {
                    let a_guess = finish_verdict(state, &verdict, &mut self.own_rng)?;
                    let j_guess = u8::from(a_guess != self.b_sim);
                    return Ok(AdversaryAction::Finish(Verdict::Guess(j_guess)));
                }
            }
        }
    }

    fn oracle_uses(&self) -> u32 {
        self.uses
    }
}
