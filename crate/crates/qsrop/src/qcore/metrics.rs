use num_complex::Complex64;

use super::QState;
use crate::{Error, Result};

/// `⟨a|b⟩` over identical layouts.
pub fn inner_product(a: &QState, b: &QState) -> Result<Complex64> {
    if a.layout() != b.layout() {
        return Err(Error::LayoutMismatch);
    }
    Ok(a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// `|⟨a|b⟩|`, the pure-state fidelity.
pub fn fidelity(a: &QState, b: &QState) -> Result<f64> {
    Ok(inner_product(a, b)?.norm())
}

/// Trace distance of two pure states, `√(1 − |⟨a|b⟩|²)`.
///
/// It upper-bounds the probability gap of any fixed measurement between the
/// two states, which is what the proof-chain checks consume.
pub fn pure_trace_distance(a: &QState, b: &QState) -> Result<f64> {
    let f = fidelity(a, b)?;
    Ok((1.0 - f * f).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{BitString, RegisterLayout};

    #[test]
    fn distance_satisfies_triangle_inequality_on_random_states() {
        use rand::{Rng, SeedableRng};
        let layout = RegisterLayout::new(&[("x", 3)], 22).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        let mut random_state = || {
            let amps: Vec<Complex64> = (0..8)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            QState::from_amplitudes(&layout, amps.iter().map(|a| a / norm).collect()).unwrap()
        };
        for _ in 0..50 {
            let (a, b, c) = (random_state(), random_state(), random_state());
            let ab = pure_trace_distance(&a, &b).unwrap();
            let bc = pure_trace_distance(&b, &c).unwrap();
            let ac = pure_trace_distance(&a, &c).unwrap();
            assert!(ac <= ab + bc + 1e-9, "{ac} > {ab} + {bc}");
        }
    }

    #[test]
    fn layout_mismatch_is_an_error() {
        let a = QState::zero(&RegisterLayout::new(&[("x", 1)], 22).unwrap());
        let b = QState::zero(&RegisterLayout::new(&[("y", 1)], 22).unwrap());
        assert!(inner_product(&a, &b).is_err());
    }

    #[test]
    fn fidelity_of_zero_with_basis() {
        let layout = RegisterLayout::new(&[("x", 2)], 22).unwrap();
        let a = QState::zero(&layout);
        let b = QState::basis(&layout, &BitString::new(2, 0).unwrap()).unwrap();
        assert!((fidelity(&a, &b).unwrap() - 1.0).abs() < 1e-15);
    }
}
