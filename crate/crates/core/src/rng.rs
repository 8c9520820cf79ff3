//! Minimal deterministic RNG (splitmix64) for seeded sampling. Every consumer
//! gets its own stream from a seed, so parallel workers stay reproducible.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::fock::StateVector;

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller.
    pub fn next_gaussian(&mut self) -> f64 {
        let u = loop {
            let u = self.next_f64();
            if u > 0.0 {
                break u;
            }
        };
        let v = self.next_f64();
        (-2.0 * u.ln()).sqrt() * (2.0 * core::f64::consts::PI * v).cos()
    }

    pub fn next_complex_gaussian(&mut self) -> Complex64 {
        Complex64::new(self.next_gaussian(), self.next_gaussian())
    }
}

/// Haar-like random pure state: normalized complex Gaussian amplitudes.
pub fn random_state(dim: usize, rng: &mut SplitMix64) -> StateVector {
    let amps: Vec<Complex64> = (0..dim).map(|_| rng.next_complex_gaussian()).collect();
    let mut state = StateVector::from_amplitudes(amps);
    let n = state.norm();
    state.scale(Complex64::new(1.0 / n, 0.0));
    state
}
