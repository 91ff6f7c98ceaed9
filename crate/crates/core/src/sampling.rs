//! Seeded random inputs: period matrices, characteristics and small vectors.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::Result;
use crate::theta::PeriodMatrix;

/// Deterministic generator; the same seed gives the same stream everywhere.
pub struct Sampler {
    rng: ChaCha20Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn below(&mut self, n: u32) -> u32 {
        (self.unit() * n as f64) as u32 % n
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.unit();
        let u2 = self.unit();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// `tau = A + i Q' D Q` with `A` symmetric, entries in `[-1/2, 1/2]`,
    /// `Q` a random orthogonal matrix and `D` diagonal in `[dmin, dmax]`.
    pub fn period_matrix_with(&mut self, g: usize, dmin: f64, dmax: f64) -> Result<PeriodMatrix> {
        let mut a = DMatrix::<f64>::zeros(g, g);
        for i in 0..g {
            for j in i..g {
                let v = self.uniform(-0.5, 0.5);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        let gauss = DMatrix::from_fn(g, g, |_, _| self.normal());
        let q = gauss.qr().q();
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(g, |_, _| self.uniform(dmin, dmax)));
        let y = q.transpose() * d * q;
        let y = (&y + y.transpose()) * 0.5;
        PeriodMatrix::from_re_im(a, y)
    }

    /// Default sampling used throughout the suites (`D` in `[0.8, 2]`).
    pub fn period_matrix(&mut self, g: usize) -> Result<PeriodMatrix> {
        self.period_matrix_with(g, 0.8, 2.0)
    }

    /// Complex vector with entries of modulus at most `scale` per part.
    pub fn small_vector(&mut self, g: usize, scale: f64) -> Vec<Complex64> {
        (0..g)
            .map(|_| Complex64::new(self.uniform(-scale, scale), self.uniform(-scale, scale)))
            .collect()
    }

    pub fn bits(&mut self, width: usize) -> u32 {
        (self.rng.next_u64() & ((1u64 << width) - 1)) as u32
    }
}
