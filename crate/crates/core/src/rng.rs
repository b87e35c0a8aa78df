//! Seeded random streams.
//!
//! Every random draw in a sweep comes from a stream identified by
//! `(master seed, index, lane, purpose)`. Streams are ChaCha8 keyed by the
//! master seed with the remaining fields packed into the 64-bit stream id,
//! so trial `i` sees the same numbers no matter which worker runs it.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::numerics::{CMat, CVec, C64};

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Channel = 1,
    Noise = 2,
    Design = 3,
    CovChannel = 4,
    CovNoise = 5,
    Geometry = 6,
}

/// Stream for `(master, index, lane, purpose)`. `index` is usually the trial
/// or coherence-interval number and `lane` the user.
pub fn stream(master: u64, index: u64, lane: u32, purpose: Purpose) -> StreamRng {
    assert!(index < (1 << 40), "stream index out of range");
    assert!(lane < (1 << 16), "stream lane out of range");
    let id = (index << 24) | ((lane as u64) << 8) | purpose as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(id);
    rng
}

/// One draw of CN(0, 1).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

pub fn complex_gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| complex_gaussian(rng))
}

/// Column-major fill, so the draw order is stable across shapes.
pub fn complex_gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let mut m = CMat::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}
