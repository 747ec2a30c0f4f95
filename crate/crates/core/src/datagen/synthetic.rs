use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{thin_qr, DenseMatrix};
use crate::rng::{seeded, SketchRng};

/// Parameters of `A = S D U + N/ζ`: `k` signal directions with linearly
/// decaying weights `D_ii = 1 − (i−1)/m`, plus Gaussian noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    /// Noise divisor ζ; `None` leaves the noise out (the ζ → ∞ limit).
    pub zeta: Option<f64>,
    /// Decay divisor `m ≥ k`; defaults to `k`.
    #[serde(default)]
    pub m: Option<f64>,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(n: usize, d: usize, k: usize, zeta: f64, seed: u64) -> Self {
        SyntheticSpec {
            n,
            d,
            k,
            zeta: Some(zeta),
            m: None,
            seed,
        }
    }

    pub fn noiseless(n: usize, d: usize, k: usize, seed: u64) -> Self {
        SyntheticSpec {
            zeta: None,
            ..SyntheticSpec::new(n, d, k, 1.0, seed)
        }
    }

    pub fn decay(&self) -> f64 {
        self.m.unwrap_or(self.k as f64)
    }

    /// Signal weights `D_ii`, i = 1..k.
    pub fn signal_weights(&self) -> Vec<f64> {
        let m = self.decay();
        (0..self.k).map(|i| 1.0 - i as f64 / m).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 || self.k == 0 {
            return Err(Error::invalid("synthetic n, d and k must all be at least 1"));
        }
        if self.k > self.d {
            return Err(Error::invalid(format!("signal dimension k={} exceeds d={}", self.k, self.d)));
        }
        if let Some(z) = self.zeta {
            if !(z > 0.0) || !z.is_finite() {
                return Err(Error::invalid(format!("noise divisor zeta must be positive and finite, got {z}")));
            }
        }
        let m = self.decay();
        if !(m >= self.k as f64) || !m.is_finite() {
            return Err(Error::invalid(format!("decay divisor m={m} must be finite and >= k={}", self.k)));
        }
        Ok(())
    }
}

fn gaussian(rows: usize, cols: usize, rng: &mut SketchRng) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| StandardNormal.sample(rng)).collect();
    DenseMatrix::from_vec(rows, cols, data).expect("gaussian entries are finite")
}

/// Draws `S` (n×k), then the Gaussian whose QR gives the orthonormal frame
/// `U` (k×d), then the noise `N` (n×d), all row-major from one seeded stream.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<DenseMatrix> {
    spec.validate()?;
    let mut rng = seeded(spec.seed);
    let s = gaussian(spec.n, spec.k, &mut rng);
    let (q, _) = thin_qr(&gaussian(spec.d, spec.k, &mut rng))?;
    let signal = s.scale_columns(&spec.signal_weights()).matmul_t(&q);
    let Some(zeta) = spec.zeta else {
        return Ok(signal);
    };
    let mut a = signal;
    let inv = 1.0 / zeta;
    for x in a.data_mut() {
        let noise: f64 = StandardNormal.sample(&mut rng);
        *x += noise * inv;
    }
    Ok(a)
}
