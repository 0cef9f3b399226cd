//! Seeding and deterministic random draws.
//!
//! Every stochastic component in the crate runs on ChaCha8 streams derived
//! from explicit 64-bit seeds so that runs replay bit-identically.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::vector::Vector;

/// SplitMix64 mixing step; used to derive independent sub-seeds.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic sub-seed for a (master, index) pair.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x51ed_270b_9f9c_265d)))
}

pub fn chacha(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in the open interval (0, 1).
pub fn uniform_open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // 52 random bits centered in the cell keep both endpoints excluded.
    ((rng.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Uniform draw in the half-open interval (0, 1].
pub fn uniform_left_open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
}

/// Box-Muller transform of u1 in (0, 1] and u2 in [0, 1).
///
/// This is the frozen normal-generation method for the crate; reproducibility
/// of seeded projections depends on it never changing.
pub fn box_muller(u1: f64, u2: f64) -> (f64, f64) {
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    (r * theta.cos(), r * theta.sin())
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1 = uniform_left_open01(rng);
    let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    box_muller(u1, u2).0
}

/// Uniform point in the d-dimensional unit ball.
pub fn sample_unit_ball<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Vector> {
    let mut dir: Vec<f64> = (0..dim).map(|_| standard_normal(rng)).collect();
    let norm = dir.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm == 0.0 {
        // astronomically unlikely; retry keeps the draw well defined
        return sample_unit_ball(dim, rng);
    }
    let radius = uniform_left_open01(rng).powf(1.0 / dim as f64);
    for c in &mut dir {
        *c = *c / norm * radius;
    }
    Vector::new(dir)
}
