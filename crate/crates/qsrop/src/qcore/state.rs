use num_complex::Complex64;
use rand::Rng;

use super::{mask, BitString, FunctionTable, PermutationTable, RegisterLayout, Span};
use crate::{Error, Result, NORM_TOLERANCE, ZERO_WEIGHT};

const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A pure state of the whole register: `2^total_qubits` complex amplitudes
/// over the computational basis.
///
/// All operations are exact linear algebra on the amplitude vector; no
/// approximation beyond `f64` rounding enters anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct QState {
    layout: RegisterLayout,
    amps: Vec<Complex64>,
}

impl QState {
    /// Prepare the basis state `|basis⟩`.
    pub fn basis(layout: &RegisterLayout, basis: &BitString) -> Result<Self> {
        if basis.width() != layout.total_qubits() {
            return Err(Error::WidthMismatch {
                context: "basis preparation",
                expected: layout.total_qubits(),
                got: basis.width(),
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); layout.dimension()];
        amps[basis.value() as usize] = Complex64::new(1.0, 0.0);
        Ok(QState {
            layout: layout.clone(),
            amps,
        })
    }

    /// Build a state from explicit amplitudes. The vector must have the
    /// layout's dimension and unit norm within tolerance.
    pub fn from_amplitudes(layout: &RegisterLayout, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != layout.dimension() {
            return Err(Error::WidthMismatch {
                context: "amplitude vector length",
                expected: layout.dimension(),
                got: amps.len(),
            });
        }
        let state = QState {
            layout: layout.clone(),
            amps,
        };
        state.norm_check()?;
        Ok(state)
    }

    /// The all-zeros basis state.
    pub fn zero(layout: &RegisterLayout) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); layout.dimension()];
        amps[0] = Complex64::new(1.0, 0.0);
        QState {
            layout: layout.clone(),
            amps,
        }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_check(&self) -> Result<()> {
        let norm = self.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NormViolation { norm });
        }
        Ok(())
    }

    /// Number of basis states carrying weight above the zero threshold.
    pub fn support_size(&self) -> usize {
        self.amps
            .iter()
            .filter(|a| a.norm_sqr() > ZERO_WEIGHT)
            .count()
    }

    fn span(&self, names: &[&str]) -> Result<Span> {
        self.layout.span(names)
    }

    /// Apply the query unitary `|x,y⟩ ↦ |x, y ⊕ f(x)⟩`, with `x` read from
    /// `in_seg` and `f(x)` XORed into `out_seg`.
    pub fn apply_xor_oracle(
        &mut self,
        f: &FunctionTable,
        in_seg: &str,
        out_seg: &str,
    ) -> Result<()> {
        self.apply_xor_oracle_spans(f, &[in_seg], &[out_seg])
    }

    /// Span form of [`QState::apply_xor_oracle`] for tables whose input or
    /// output covers several segments, e.g. a ciphertext-and-tag pair.
    pub fn apply_xor_oracle_spans(
        &mut self,
        f: &FunctionTable,
        in_segs: &[&str],
        out_segs: &[&str],
    ) -> Result<()> {
        let input = self.span(in_segs)?;
        let output = self.span(out_segs)?;
        if input.width() != f.in_width() {
            return Err(Error::WidthMismatch {
                context: "oracle input segment",
                expected: f.in_width(),
                got: input.width(),
            });
        }
        if output.width() != f.out_width() {
            return Err(Error::WidthMismatch {
                context: "oracle output segment",
                expected: f.out_width(),
                got: output.width(),
            });
        }
        if !RegisterLayout::disjoint(&input, &output) {
            return Err(Error::OverlappingSegments);
        }
        // XORing into disjoint output bits pairs basis states up into an
        // involution, so the permutation is a set of in-place swaps.
        for i in 0..self.amps.len() as u64 {
            let j = output.xor_into(i, f.get(input.extract(i)));
            if j > i {
                self.amps.swap(i as usize, j as usize);
            }
        }
        Ok(())
    }

    /// XOR a classical constant into a span: `|z⟩ ↦ |z ⊕ v⟩`.
    pub fn xor_constant(&mut self, segs: &[&str], value: u64) -> Result<()> {
        let span = self.span(segs)?;
        if value > mask(span.width()) {
            return Err(Error::ValueOutOfRange {
                value,
                width: span.width(),
            });
        }
        for i in 0..self.amps.len() as u64 {
            let j = span.xor_into(i, value);
            if j > i {
                self.amps.swap(i as usize, j as usize);
            }
        }
        Ok(())
    }

    /// Relabel a segment in place: basis amplitude at `x` moves to `p(x)`.
    pub fn apply_permutation(&mut self, p: &PermutationTable, seg: &str) -> Result<()> {
        let span = self.span(&[seg])?;
        if span.width() != p.width() {
            return Err(Error::WidthMismatch {
                context: "permutation segment",
                expected: p.width(),
                got: span.width(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for i in 0..self.amps.len() as u64 {
            let x = span.extract(i);
            let j = span.xor_into(i, x ^ p.get(x));
            out[j as usize] = self.amps[i as usize];
        }
        self.amps = out;
        Ok(())
    }

    /// Hadamard every qubit of a segment (the Fourier transform over the XOR
    /// group of the segment).
    pub fn walsh_hadamard(&mut self, seg: &str) -> Result<()> {
        let segment = self.layout.segment(seg)?.clone();
        for b in 0..segment.width {
            let bit = 1usize << (segment.offset + b);
            for i in 0..self.amps.len() {
                if i & bit == 0 {
                    let j = i | bit;
                    let (lo, hi) = (self.amps[i], self.amps[j]);
                    self.amps[i] = (lo + hi) * SQRT_HALF;
                    self.amps[j] = (lo - hi) * SQRT_HALF;
                }
            }
        }
        Ok(())
    }

    /// Multiply the amplitude of every basis state whose span value `x` has
    /// `f(x) = 1` by −1. `f` must have a 1-bit output.
    pub fn apply_phase_oracle(&mut self, f: &FunctionTable, segs: &[&str]) -> Result<()> {
        let span = self.span(segs)?;
        if span.width() != f.in_width() {
            return Err(Error::WidthMismatch {
                context: "phase oracle input",
                expected: f.in_width(),
                got: span.width(),
            });
        }
        if f.out_width() != 1 {
            return Err(Error::WidthMismatch {
                context: "phase oracle output",
                expected: 1,
                got: f.out_width(),
            });
        }
        for i in 0..self.amps.len() as u64 {
            if f.get(span.extract(i)) == 1 {
                self.amps[i as usize] = -self.amps[i as usize];
            }
        }
        Ok(())
    }

    /// Weight of all basis states whose `seg` value equals `value`; the
    /// expectation of the projector onto that segment value.
    pub fn basis_weight(&self, seg: &str, value: &BitString) -> Result<f64> {
        let span = self.span(&[seg])?;
        if span.width() != value.width() {
            return Err(Error::WidthMismatch {
                context: "basis weight value",
                expected: span.width(),
                got: value.width(),
            });
        }
        Ok(self.weight_of(&span, value.value()))
    }

    fn weight_of(&self, span: &Span, value: u64) -> f64 {
        let mut w = 0.0;
        for i in 0..self.amps.len() as u64 {
            if span.extract(i) == value {
                w += self.amps[i as usize].norm_sqr();
            }
        }
        w
    }

    /// Weight of every span value: index `v` holds `Σ |amp|²` over basis
    /// states with span value `v`.
    pub fn marginal_weights(&self, segs: &[&str]) -> Result<Vec<f64>> {
        let span = self.span(segs)?;
        let mut weights = vec![0.0f64; 1 << span.width()];
        for i in 0..self.amps.len() as u64 {
            weights[span.extract(i) as usize] += self.amps[i as usize].norm_sqr();
        }
        Ok(weights)
    }

    /// Total weight of basis states accepted by a predicate over the listed
    /// segments' values.
    pub fn weight_where(
        &self,
        segs: &[&str],
        accept: impl Fn(&[u64]) -> bool,
    ) -> Result<f64> {
        let spans: Vec<Span> = segs
            .iter()
            .map(|s| self.span(&[s]))
            .collect::<Result<_>>()?;
        let mut values = vec![0u64; spans.len()];
        let mut w = 0.0;
        for i in 0..self.amps.len() as u64 {
            let p = self.amps[i as usize].norm_sqr();
            if p == 0.0 {
                continue;
            }
            for (v, span) in values.iter_mut().zip(&spans) {
                *v = span.extract(i);
            }
            if accept(&values) {
                w += p;
            }
        }
        Ok(w)
    }

    /// Measure a segment in the computational basis. The outcome is sampled
    /// from the Born distribution and the state collapses and renormalises in
    /// place.
    pub fn measure_segment<R: Rng + ?Sized>(
        &mut self,
        seg: &str,
        rng: &mut R,
    ) -> Result<BitString> {
        self.norm_check()?;
        let span = self.span(&[seg])?;
        let weights = self.marginal_weights(&[seg])?;
        let draw: f64 = rng.gen();
        let mut acc = 0.0;
        let mut outcome = weights.len() - 1;
        for (v, w) in weights.iter().enumerate() {
            acc += w;
            if draw < acc {
                outcome = v;
                break;
            }
        }
        // Guard against landing on a zero-weight tail bin through rounding.
        while weights[outcome] <= 0.0 {
            outcome = outcome.checked_sub(1).expect("no outcome carries weight");
        }
        let scale = 1.0 / weights[outcome].sqrt();
        for i in 0..self.amps.len() as u64 {
            if span.extract(i) == outcome as u64 {
                self.amps[i as usize] *= scale;
            } else {
                self.amps[i as usize] = Complex64::new(0.0, 0.0);
            }
        }
        BitString::new(span.width(), outcome as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::pure_trace_distance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn layout(segs: &[(&str, usize)]) -> RegisterLayout {
        RegisterLayout::new(segs, 22).unwrap()
    }

    fn amps_close(state: &QState, expected: &[f64], tol: f64) {
        assert_eq!(state.amplitudes().len(), expected.len());
        for (a, e) in state.amplitudes().iter().zip(expected) {
            assert!(
                (a.re - e).abs() <= tol && a.im.abs() <= tol,
                "amplitudes {:?} differ from {:?}",
                state.amplitudes(),
                expected
            );
        }
    }

    #[test]
    fn basis_state_puts_unit_amplitude_in_place() {
        let l = layout(&[("a", 1), ("b", 1)]);
        let s = QState::basis(&l, &BitString::new(2, 0).unwrap()).unwrap();
        amps_close(&s, &[1.0, 0.0, 0.0, 0.0], 0.0);
        let s = QState::basis(&l, &BitString::new(2, 0b01).unwrap()).unwrap();
        amps_close(&s, &[0.0, 1.0, 0.0, 0.0], 0.0);
        assert!((s.norm() - 1.0).abs() < 1e-15);

        let one_qubit = layout(&[("a", 1)]);
        let s = QState::basis(&one_qubit, &BitString::new(1, 1).unwrap()).unwrap();
        amps_close(&s, &[0.0, 1.0], 0.0);
    }

    #[test]
    fn basis_width_must_match_layout() {
        let l = layout(&[("a", 2)]);
        assert!(QState::basis(&l, &BitString::new(1, 0).unwrap()).is_err());
    }

    #[test]
    fn xor_oracle_identity_function_flips_target() {
        let l = layout(&[("x", 1), ("y", 1)]);
        let mut s = QState::basis(&l, &BitString::new(2, 0b01).unwrap()).unwrap();
        s.apply_xor_oracle(&FunctionTable::identity(1), "x", "y")
            .unwrap();
        // |1,0⟩ → |1,1⟩, basis index 0b11
        amps_close(&s, &[0.0, 0.0, 0.0, 1.0], 0.0);
    }

    #[test]
    fn xor_oracle_zero_function_is_identity() {
        let l = layout(&[("x", 2), ("y", 2)]);
        let mut s = QState::basis(&l, &BitString::new(4, 0b10_01).unwrap()).unwrap();
        let before = s.clone();
        s.apply_xor_oracle(&FunctionTable::zero(2, 2), "x", "y")
            .unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn xor_oracle_moves_superposition_terms_in_parallel() {
        // (|0,0⟩+|1,0⟩)/√2 with f = identity → (|0,0⟩+|1,1⟩)/√2
        let l = layout(&[("x", 1), ("y", 1)]);
        let mut s = QState::zero(&l);
        s.walsh_hadamard("x").unwrap();
        s.apply_xor_oracle(&FunctionTable::identity(1), "x", "y")
            .unwrap();
        amps_close(&s, &[SQRT_HALF, 0.0, 0.0, SQRT_HALF], 1e-15);
        assert!((s.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn xor_oracle_rejects_overlapping_segments() {
        let l = layout(&[("x", 1), ("y", 1)]);
        let mut s = QState::zero(&l);
        let f = FunctionTable::identity(1);
        assert!(matches!(
            s.apply_xor_oracle(&f, "x", "x"),
            Err(Error::OverlappingSegments)
        ));
    }

    #[test]
    fn permutation_identity_and_swap() {
        let l = layout(&[("x", 1)]);
        let mut s = QState::basis(&l, &BitString::new(1, 0).unwrap()).unwrap();
        s.apply_permutation(&PermutationTable::identity(1), "x")
            .unwrap();
        amps_close(&s, &[1.0, 0.0], 0.0);
        s.apply_permutation(&PermutationTable::new(1, vec![1, 0]).unwrap(), "x")
            .unwrap();
        amps_close(&s, &[0.0, 1.0], 0.0);
    }

    #[test]
    fn permutation_then_inverse_restores_state() {
        let l = layout(&[("x", 2), ("y", 1)]);
        let mut s = QState::zero(&l);
        s.walsh_hadamard("x").unwrap();
        s.apply_xor_oracle(
            &FunctionTable::from_fn(2, 1, |x| x & 1).unwrap(),
            "x",
            "y",
        )
        .unwrap();
        let reference = s.clone();
        let p = PermutationTable::new(2, vec![2, 0, 3, 1]).unwrap();
        s.apply_permutation(&p, "x").unwrap();
        s.apply_permutation(&p.inverse(), "x").unwrap();
        for (a, b) in s.amplitudes().iter().zip(reference.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn walsh_hadamard_single_qubit_and_involution() {
        let l = layout(&[("x", 1)]);
        let mut s = QState::zero(&l);
        s.walsh_hadamard("x").unwrap();
        amps_close(&s, &[SQRT_HALF, SQRT_HALF], 1e-15);
        s.walsh_hadamard("x").unwrap();
        amps_close(&s, &[1.0, 0.0], 1e-12);
    }

    #[test]
    fn walsh_hadamard_two_qubits_signs() {
        // |01⟩ on a width-2 segment → ½(+1,−1,+1,−1): sign is parity of
        // u·v with v = 01.
        let l = layout(&[("x", 2)]);
        let mut s = QState::basis(&l, &BitString::new(2, 0b01).unwrap()).unwrap();
        s.walsh_hadamard("x").unwrap();
        amps_close(&s, &[0.5, -0.5, 0.5, -0.5], 1e-15);
    }

    #[test]
    fn measurement_of_a_basis_state_is_deterministic() {
        let l = layout(&[("x", 1), ("y", 1)]);
        let mut s = QState::basis(&l, &BitString::new(2, 0b11).unwrap()).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let outcome = s.measure_segment("x", &mut rng).unwrap();
        assert_eq!(outcome.value(), 1);
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measurement_follows_the_born_rule() {
        let l = layout(&[("x", 1)]);
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let trials = 10_000;
        let mut ones = 0;
        for _ in 0..trials {
            let mut s = QState::zero(&l);
            s.walsh_hadamard("x").unwrap();
            if s.measure_segment("x", &mut rng).unwrap().value() == 1 {
                ones += 1;
            }
        }
        let freq = ones as f64 / trials as f64;
        // 3σ band around 0.5 for 10^4 Bernoulli(½) trials
        assert!((freq - 0.5).abs() < 3.0 * 0.005, "freq = {freq}");
    }

    #[test]
    fn measurement_rejects_unnormalised_input() {
        let l = layout(&[("x", 1)]);
        let mut s = QState::zero(&l);
        s.amps[0] = Complex64::new(2.0, 0.0);
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        assert!(matches!(
            s.measure_segment("x", &mut rng),
            Err(Error::NormViolation { .. })
        ));
    }

    #[test]
    fn basis_weight_on_fixed_and_uniform_segments() {
        let l = layout(&[("c", 2), ("z", 1)]);
        let s = QState::basis(&l, &BitString::new(3, 0b0_10).unwrap()).unwrap();
        let w = s
            .basis_weight("c", &BitString::new(2, 0b10).unwrap())
            .unwrap();
        assert_eq!(w, 1.0);
        assert_eq!(
            s.basis_weight("c", &BitString::new(2, 0b01).unwrap())
                .unwrap(),
            0.0
        );

        let mut s = QState::zero(&l);
        s.walsh_hadamard("c").unwrap();
        let mut total = 0.0;
        for v in 0..4 {
            let w = s
                .basis_weight("c", &BitString::new(2, v).unwrap())
                .unwrap();
            assert!((w - 0.25).abs() < 1e-12);
            total += w;
        }
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn trace_distance_examples() {
        let l = layout(&[("x", 1)]);
        let zero = QState::zero(&l);
        let mut plus = QState::zero(&l);
        plus.walsh_hadamard("x").unwrap();
        let one = QState::basis(&l, &BitString::new(1, 1).unwrap()).unwrap();

        assert!(pure_trace_distance(&zero, &zero).unwrap().abs() < 1e-15);
        assert!((pure_trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-15);
        let d = pure_trace_distance(&zero, &plus).unwrap();
        assert!((d - 0.7071067811865476).abs() < 1e-12);
        // symmetry
        assert_eq!(d, pure_trace_distance(&plus, &zero).unwrap());
    }

    #[test]
    fn xor_constant_relabels_basis() {
        let l = layout(&[("a", 2), ("b", 1)]);
        let mut s = QState::basis(&l, &BitString::new(3, 0b0_01).unwrap()).unwrap();
        s.xor_constant(&["a", "b"], 0b1_10).unwrap();
        amps_close(&s, &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0], 0.0);
    }

    #[test]
    fn phase_oracle_flips_marked_terms() {
        let l = layout(&[("x", 1)]);
        let mut s = QState::zero(&l);
        s.walsh_hadamard("x").unwrap();
        let marked = FunctionTable::new(1, 1, vec![0, 1]).unwrap();
        s.apply_phase_oracle(&marked, &["x"]).unwrap();
        amps_close(&s, &[SQRT_HALF, -SQRT_HALF], 1e-15);
    }
}
