//! Counter-based random streams.
//!
//! Every stream is a ChaCha8 keystream addressed by `(seed, stream id)`.
//! Suites derive the stream id from the suite tag and the trial index, so a
//! trial draws the same numbers whether it runs first, last, or on another
//! thread.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Clone, Debug)]
pub struct SampleStream {
    rng: ChaCha8Rng,
}

/// splitmix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SampleStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Stream for trial `trial` of the suite identified by `tag`.
    pub fn for_trial(seed: u64, tag: u64, trial: u64) -> Self {
        Self::with_stream(seed, mix64(mix64(tag) ^ trial))
    }

    /// Independent child stream; does not advance `self`.
    pub fn derive(&self, label: u64) -> Self {
        let mut rng = self.rng.clone();
        rng.set_stream(mix64(self.rng.get_stream() ^ mix64(label.wrapping_add(1))));
        rng.set_word_pos(0);
        Self { rng }
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn index(&mut self, len: usize) -> usize {
        self.rng.random_range(0..len)
    }

    pub fn sign(&mut self) -> f64 {
        if self.rng.random::<bool>() {
            1.0
        } else {
            -1.0
        }
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Standard complex Gaussian: real and imaginary parts with variance 1/2.
    pub fn complex_normal(&mut self) -> Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(s * self.normal(), s * self.normal())
    }

    /// `d x d` matrix of i.i.d. standard complex Gaussians.
    pub fn ginibre(&mut self, d: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(d, d, |_, _| self.complex_normal())
    }

    /// GUE-style Hermitian draw `(G + G^*) / 2`.
    pub fn gue(&mut self, d: usize) -> DMatrix<Complex64> {
        let g = self.ginibre(d);
        (&g + g.adjoint()).scale(0.5)
    }
}
