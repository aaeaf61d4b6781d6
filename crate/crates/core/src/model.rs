//! The cGA's probabilistic model on the well-behaved frequency grid.
//!
//! With `m = mu * (1/2 - 1/n)` a positive integer, every reachable frequency
//! is `p = 1/n + k/mu` for an integer grid index `k ∈ [0, 2m]`. Writing
//! `mu = 2mn / (n - 2)` gives the exact rational
//!
//! ```text
//! p = (2m + k(n - 2)) / (2mn)
//! ```
//!
//! so frequencies are stored as indices and every comparison and every sample
//! is done in integer arithmetic.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::{BitString, Error, RandomSource, Result};

/// Problem size and the well-behaved hypothetical population size.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    n: usize,
    m: u32,
    mu: f64,
}

/// Result of snapping a requested population size onto the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellBehavedMu {
    pub params: ModelParams,
    pub target_mu: f64,
    /// `|mu - target_mu| / target_mu`.
    pub relative_adjustment: f64,
}

/// Largest grid half-range accepted. Keeps `2mn` and the products used in
/// exact comparisons comfortably inside 64 bits.
pub const MAX_HALF_RANGE: u32 = 1 << 30;

/// Snaps `target_mu` to the nearest well-behaved value.
///
/// `m = round_half_up(target_mu * (1/2 - 1/n))`, at least 1, and
/// `mu = m / (1/2 - 1/n)`.
pub fn make_well_behaved(n: usize, target_mu: f64) -> Result<WellBehavedMu> {
    if n < 3 {
        return Err(Error::ProblemSizeTooSmall { n });
    }
    if !target_mu.is_finite() || target_mu <= 0.0 {
        return Err(Error::InvalidPopulationSize { mu: target_mu });
    }
    let half_range = target_mu * (n - 2) as f64 / (2 * n) as f64;
    let m = libm::floor(half_range + 0.5).max(1.0);
    if m > f64::from(MAX_HALF_RANGE) {
        return Err(Error::InvalidPopulationSize { mu: target_mu });
    }
    let params = ModelParams::from_half_range(n, m as u32)?;
    Ok(WellBehavedMu {
        params,
        target_mu,
        relative_adjustment: (params.mu - target_mu).abs() / target_mu,
    })
}

impl ModelParams {
    /// Parameters from the grid half-range `m` directly.
    pub fn from_half_range(n: usize, m: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::ProblemSizeTooSmall { n });
        }
        if m == 0 || m > MAX_HALF_RANGE || n > u32::MAX as usize {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: "grid half-range must be in [1, 2^30]",
            });
        }
        let mu = (2 * m as u64 * n as u64) as f64 / (n - 2) as f64;
        Ok(Self { n, m, mu })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn half_range(&self) -> u32 {
        self.m
    }

    #[inline]
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Highest grid index, `2m`.
    #[inline]
    pub fn max_index(&self) -> u32 {
        2 * self.m
    }

    /// Number of grid states per position, `2m + 1`.
    pub fn grid_size(&self) -> u32 {
        2 * self.m + 1
    }

    /// Common denominator `2mn` of all grid frequencies.
    #[inline]
    pub fn denominator(&self) -> u64 {
        2 * u64::from(self.m) * self.n as u64
    }

    /// Numerator of grid index `k` over [`denominator`](Self::denominator).
    #[inline]
    pub fn numerator(&self, k: u32) -> u64 {
        2 * u64::from(self.m) + u64::from(k) * (self.n as u64 - 2)
    }

    /// `1/n + k/mu`.
    pub fn freq_value(&self, k: u32) -> Result<f64> {
        if k > self.max_index() {
            return Err(Error::GridIndexOutOfRange {
                index: k,
                max: self.max_index(),
            });
        }
        Ok(self.numerator(k) as f64 / self.denominator() as f64)
    }

    /// Exact comparison of the grid frequency `k` with the rational `num/den`.
    pub fn cmp_index(&self, k: u32, num: u64, den: u64) -> Ordering {
        let lhs = u128::from(self.numerator(k)) * u128::from(den);
        let rhs = u128::from(num) * u128::from(self.denominator());
        lhs.cmp(&rhs)
    }

    /// `p(k) > 1 - 3/n`, the stay-high level of the runtime analysis.
    #[inline]
    pub fn is_high(&self, k: u32) -> bool {
        self.cmp_index(k, self.n as u64 - 3, self.n as u64) == Ordering::Greater
    }

    /// `p(k) < 1 - 3/n`, i.e. position counts as critical.
    #[inline]
    pub fn is_below_high(&self, k: u32) -> bool {
        self.cmp_index(k, self.n as u64 - 3, self.n as u64) == Ordering::Less
    }

    /// `p(k) <= 1/4`.
    #[inline]
    pub fn at_or_below_quarter(&self, k: u32) -> bool {
        self.cmp_index(k, 1, 4) != Ordering::Greater
    }
}

/// Product `∏ p_i`, the probability that one sample is the all-ones string.
pub fn optimum_prob(freqs: &[f64]) -> f64 {
    freqs.iter().product()
}

/// The cGA model: one grid index per position.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyVector {
    params: ModelParams,
    k: Vec<u32>,
}

impl FrequencyVector {
    /// Every frequency at 1/2.
    pub fn uniform(params: ModelParams) -> Self {
        Self {
            params,
            k: alloc::vec![params.m; params.n],
        }
    }

    pub fn from_indices(params: ModelParams, k: Vec<u32>) -> Result<Self> {
        if k.len() != params.n {
            return Err(Error::LengthMismatch {
                expected: params.n,
                found: k.len(),
            });
        }
        if let Some(&bad) = k.iter().find(|&&ki| ki > params.max_index()) {
            return Err(Error::GridIndexOutOfRange {
                index: bad,
                max: params.max_index(),
            });
        }
        Ok(Self { params, k })
    }

    #[inline]
    pub fn params(&self) -> ModelParams {
        self.params
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.k.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize) -> u32 {
        self.k[i]
    }

    pub fn indices(&self) -> &[u32] {
        &self.k
    }

    pub fn set_index(&mut self, i: usize, k: u32) -> Result<()> {
        if k > self.params.max_index() {
            return Err(Error::GridIndexOutOfRange {
                index: k,
                max: self.params.max_index(),
            });
        }
        self.k[i] = k;
        Ok(())
    }

    /// Frequency at position `i` as a float.
    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.params.numerator(self.k[i]) as f64 / self.params.denominator() as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }

    /// Applies a grid step of `delta ∈ {-1, 0, +1}` and restricts the result
    /// to `[0, 2m]`. Returns the applied change, which is 0 when clamped.
    #[inline]
    pub fn apply_step(&mut self, i: usize, delta: i8) -> i8 {
        let k = self.k[i];
        match delta {
            1 if k < self.params.max_index() => {
                self.k[i] = k + 1;
                1
            }
            -1 if k > 0 => {
                self.k[i] = k - 1;
                -1
            }
            _ => 0,
        }
    }

    pub fn min_value(&self) -> f64 {
        let k = self.k.iter().copied().min().unwrap_or(self.params.m);
        self.params.numerator(k) as f64 / self.params.denominator() as f64
    }

    pub fn optimum_prob(&self) -> f64 {
        (0..self.len()).map(|i| self.value(i)).product()
    }

    /// Number of leading positions sitting at the upper border `1 - 1/n`.
    pub fn prefix_at_upper(&self) -> usize {
        let top = self.params.max_index();
        self.k.iter().take_while(|&&k| k == top).count()
    }

    /// Draws one individual: position `i` is 1 iff a uniform integer in
    /// `[0, 2mn)` falls below the numerator of `p_i`. Positions are drawn in
    /// order, one generator output each.
    pub fn sample(&self, rng: &mut RandomSource) -> BitString {
        let mut x = BitString::zeros(self.len());
        self.sample_into(rng, &mut x);
        x
    }

    pub fn sample_into(&self, rng: &mut RandomSource, out: &mut BitString) {
        let den = self.params.denominator();
        for (bit, &k) in out.as_mut_slice().iter_mut().zip(&self.k) {
            *bit = rng.below(den) < self.params.numerator(k);
        }
    }
}
