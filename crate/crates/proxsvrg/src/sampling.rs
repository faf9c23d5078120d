//! Discrete sampling distributions over component indices, with O(1) draws
//! via the alias method, and the weighted smoothness constant `L_Q`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::SamplingError;

/// Probabilities below this floor are rejected at construction: the
/// `1/(n q_i)` importance weight would amplify floating-point error past
/// anything the diagnostics can absorb.
pub const PROBABILITY_FLOOR: f64 = 1e-15;

const NORMALIZATION_TOL: f64 = 1e-12;

/// Deterministic random number generator used by every stochastic solver.
///
/// The generator is ChaCha with 8 rounds, a counter-based stream cipher:
/// the same 64-bit seed yields the identical draw sequence on every
/// platform, which is what makes solver traces byte-reproducible.
pub struct SeededRng {
    inner: ChaCha8Rng,
    seed: u64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng { inner: ChaCha8Rng::seed_from_u64(seed), seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw from `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    /// Standard normal via Box-Muller.
    pub fn standard_normal(&mut self) -> f64 {
        let u1: f64 = loop {
            let u = self.inner.gen::<f64>();
            if u > 0.0 {
                break u;
            }
        };
        let u2: f64 = self.inner.gen::<f64>();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn gen_range_f64(&mut self, lo: f64, hi: f64) -> f64 {
        self.inner.gen_range(lo..hi)
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}

/// A probability distribution `Q = {q_1, ..., q_n}` over `{0, ..., n-1}`
/// with O(1) sampling (Vose alias tables, built once at construction).
#[derive(Clone, Debug)]
pub struct SamplingDistribution {
    probs: Vec<f64>,
    accept: Vec<f64>,
    alias: Vec<usize>,
}

impl SamplingDistribution {
    /// Uniform distribution: `q_i = 1/n`.
    pub fn uniform(n: usize) -> Result<Self, SamplingError> {
        if n == 0 {
            return Err(SamplingError::Empty);
        }
        Self::from_probabilities(vec![1.0 / n as f64; n])
    }

    /// Distribution proportional to the given positive weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self, SamplingError> {
        if weights.is_empty() {
            return Err(SamplingError::Empty);
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w > 0.0) || !w.is_finite() {
                return Err(SamplingError::NonPositiveWeight { index: i, value: w });
            }
        }
        let total: f64 = weights.iter().sum();
        Self::from_probabilities(weights.iter().map(|w| w / total).collect())
    }

    /// Builds from explicit probabilities; they must sum to 1 within 1e-12
    /// and each must clear [`PROBABILITY_FLOOR`].
    pub fn from_probabilities(probs: Vec<f64>) -> Result<Self, SamplingError> {
        if probs.is_empty() {
            return Err(SamplingError::Empty);
        }
        for (i, &q) in probs.iter().enumerate() {
            if !(q > 0.0) || !q.is_finite() {
                return Err(SamplingError::NonPositiveWeight { index: i, value: q });
            }
            if q < PROBABILITY_FLOOR {
                return Err(SamplingError::ProbabilityTooSmall {
                    index: i,
                    value: q,
                    floor: PROBABILITY_FLOOR,
                });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(SamplingError::NotNormalized { sum });
        }

        let n = probs.len();
        let mut accept = vec![0.0; n];
        let mut alias = vec![0usize; n];
        let mut scaled: Vec<f64> = probs.iter().map(|q| q * n as f64).collect();
        let mut small: Vec<usize> = Vec::with_capacity(n);
        let mut large: Vec<usize> = Vec::with_capacity(n);
        for (i, &s) in scaled.iter().enumerate() {
            if s < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            accept[s] = scaled[s];
            alias[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers are exactly 1 up to rounding.
        for &i in small.iter().chain(large.iter()) {
            accept[i] = 1.0;
            alias[i] = i;
        }

        Ok(SamplingDistribution { probs, accept, alias })
    }

    /// Sampling probabilities proportional to the Lipschitz constants:
    /// `q_i = L_i / sum_j L_j`, the choice that minimizes `L_Q`.
    pub fn lipschitz_weighted(lipschitz: &[f64]) -> Result<Self, SamplingError> {
        Self::from_weights(lipschitz)
    }

    pub fn n(&self) -> usize {
        self.probs.len()
    }

    pub fn probability(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// The weighted smoothness constant `L_Q = max_i L_i / (q_i n)`.
    ///
    /// Always at least `(1/n) sum_i L_i`, with equality exactly for
    /// Lipschitz-weighted probabilities.
    pub fn l_q(&self, lipschitz: &[f64]) -> Result<f64, SamplingError> {
        if lipschitz.len() != self.n() {
            return Err(SamplingError::LengthMismatch { n: self.n(), got: lipschitz.len() });
        }
        let n = self.n() as f64;
        Ok(self
            .probs
            .iter()
            .zip(lipschitz)
            .map(|(&q, &l)| l / (q * n))
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Draws an index with probability `q_i` in O(1).
    pub fn sample(&self, rng: &mut SeededRng) -> usize {
        let j = rng.below(self.n());
        if rng.uniform() < self.accept[j] {
            j
        } else {
            self.alias[j]
        }
    }
}
