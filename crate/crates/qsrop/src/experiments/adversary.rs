use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::qcore::{BitString, FunctionTable, QState};
use crate::Result;

/// Declared query limits of an adversary program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryBudget {
    pub enc: u32,
    pub dec: u32,
}

impl QueryBudget {
    pub fn enc_only(enc: u32) -> Self {
        QueryBudget { enc, dec: 0 }
    }
}

/// What an adversary asks the experiment to do next. The adversary applies
/// its own interleaving unitaries to the state before returning an action.
pub enum AdversaryAction {
    /// Query the encryption oracle (the single oracle, in the function-family
    /// game).
    Encrypt,
    /// Query the decryption oracle (chosen-ciphertext games only).
    Decrypt,
    /// Stop and output the guess.
    Finish(Verdict),
}

/// How the guess `b′` is produced.
#[derive(Clone)]
pub enum Verdict {
    /// A classical bit, already decided.
    Guess(u8),
    /// Measure the listed segments in order; `b′ = 1` iff the predicate
    /// accepts the outcomes.
    Measure(FinalMeasurement),
}

impl std::fmt::Debug for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Guess(g) => write!(f, "Guess({g})"),
            Verdict::Measure(m) => write!(f, "Measure({:?})", m.segments),
        }
    }
}

/// A final measurement: segment names plus an acceptance predicate over the
/// measured values (in the same order).
#[derive(Clone)]
pub struct FinalMeasurement {
    pub segments: Vec<String>,
    pub accept: Arc<dyn Fn(&[u64]) -> bool + Send + Sync>,
}

impl FinalMeasurement {
    pub fn new(
        segments: &[&str],
        accept: impl Fn(&[u64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        FinalMeasurement {
            segments: segments.iter().map(|s| s.to_string()).collect(),
            accept: Arc::new(accept),
        }
    }
}

/// The exact probability that a verdict outputs `b′ = 1` on a given
/// pre-measurement state. Used by the proof-chain diagnostics, where the
/// measurement-probability gap must be compared against a trace distance.
pub fn verdict_probability(state: &QState, verdict: &Verdict) -> Result<f64> {
    match verdict {
        Verdict::Guess(g) => Ok(f64::from(*g)),
        Verdict::Measure(m) => {
            let segs: Vec<&str> = m.segments.iter().map(|s| s.as_str()).collect();
            state.weight_where(&segs, |vals| (m.accept)(vals))
        }
    }
}

/// An adversary program: a factory for per-trial state machines.
///
/// The experiment builds the register as game segments followed by
/// [`Adversary::extra_segments`]; the program addresses segments by name and
/// may apply arbitrary operations to the state between queries.
pub trait Adversary: Send + Sync {
    fn budget(&self) -> QueryBudget;

    /// Private workspace segments appended after the game's segments.
    fn extra_segments(&self) -> Vec<(String, usize)> {
        Vec::new()
    }

    /// Start one trial with a dedicated random stream.
    fn spawn(&self, rng: ChaCha12Rng) -> Box<dyn AdversaryRun>;
}

/// Per-trial adversary state machine.
pub trait AdversaryRun {
    /// Prepare the initial state (the adversary's initialisation before the
    /// first query).
    fn prepare(&mut self, state: &mut QState) -> Result<()>;

    /// Apply interleaving unitaries and choose the next action.
    fn next(&mut self, state: &mut QState) -> Result<AdversaryAction>;

    /// Classical side output of the last encryption query, when the scheme
    /// emits one (construction 1′ returns its randomness `r`).
    fn absorb_classical(&mut self, _classical: &BitString) {}

    /// Offered once at trial start in the function-family game: the oracle's
    /// full table, for adversaries that simulate other experiments with it.
    /// Implementations must report every conceptual use via
    /// [`AdversaryRun::oracle_uses`].
    fn oracle_access(&mut self, _table: &FunctionTable) {}

    /// Conceptual oracle uses not visible to the runner (see
    /// [`AdversaryRun::oracle_access`]).
    fn oracle_uses(&self) -> u32 {
        0
    }
}

/// Guesses a uniform bit without touching the oracle.
pub struct RandomGuess;

impl Adversary for RandomGuess {
    fn budget(&self) -> QueryBudget {
        QueryBudget { enc: 0, dec: 0 }
    }

    fn spawn(&self, rng: ChaCha12Rng) -> Box<dyn AdversaryRun> {
        Box::new(RandomGuessRun { rng })
    }
}

struct RandomGuessRun {
    rng: ChaCha12Rng,
}

impl AdversaryRun for RandomGuessRun {
    fn prepare(&mut self, _state: &mut QState) -> Result<()> {
        Ok(())
    }

    fn next(&mut self, _state: &mut QState) -> Result<AdversaryAction> {
        Ok(AdversaryAction::Finish(Verdict::Guess(
            self.rng.gen_range(0..2),
        )))
    }
}

/// Outputs 1 unconditionally.
pub struct AlwaysOne;

impl Adversary for AlwaysOne {
    fn budget(&self) -> QueryBudget {
        QueryBudget { enc: 0, dec: 0 }
    }

    fn spawn(&self, _rng: ChaCha12Rng) -> Box<dyn AdversaryRun> {
        Box::new(AlwaysOneRun)
    }
}

struct AlwaysOneRun;

impl AdversaryRun for AlwaysOneRun {
    fn prepare(&mut self, _state: &mut QState) -> Result<()> {
        Ok(())
    }

    fn next(&mut self, _state: &mut QState) -> Result<AdversaryAction> {
        Ok(AdversaryAction::Finish(Verdict::Guess(1)))
    }
}

/// Two classical queries against the function-family oracle, testing the XOR
/// relation `F(x₁) ⊕ F(x₂) = x₁ ⊕ x₂` that the weak family satisfies
/// identically and a random function almost never does.
pub struct XorTest {
    in_width: usize,
}

impl XorTest {
    pub fn new(in_width: usize) -> Self {
        XorTest { in_width }
    }
}

impl Adversary for XorTest {
    fn budget(&self) -> QueryBudget {
        QueryBudget::enc_only(2)
    }

    fn spawn(&self, rng: ChaCha12Rng) -> Box<dyn AdversaryRun> {
        let _ = self.in_width;
        Box::new(XorTestRun {
            rng,
            step: 0,
            y1: 0,
        })
    }
}

struct XorTestRun {
    rng: ChaCha12Rng,
    step: u8,
    y1: u64,
}

impl AdversaryRun for XorTestRun {
    fn prepare(&mut self, _state: &mut QState) -> Result<()> {
        Ok(())
    }

    fn next(&mut self, state: &mut QState) -> Result<AdversaryAction> {
        self.step += 1;
        match self.step {
            // query x₁ = 0
            1 => Ok(AdversaryAction::Encrypt),
            // read y₁, reset, query x₂ = 1
            2 => {
                let y1 = state.measure_segment("y", &mut self.rng)?;
                self.y1 = y1.value();
                state.xor_constant(&["y"], y1.value())?;
                state.xor_constant(&["x"], 1)?;
                Ok(AdversaryAction::Encrypt)
            }
            // read y₂ and test the relation; x₁ ⊕ x₂ = 1
            _ => {
                let y2 = state.measure_segment("y", &mut self.rng)?.value();
                let guess = u8::from(self.y1 ^ y2 != 1);
                Ok(AdversaryAction::Finish(Verdict::Guess(guess)))
            }
        }
    }
}
