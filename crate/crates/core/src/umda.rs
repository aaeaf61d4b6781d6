//! Univariate marginal distribution algorithm (UMDA) with borders.
//!
//! Each iteration draws `lambda` samples, keeps the `mu_sel` best (fitness
//! descending, ties by ascending sample index) and sets every frequency to
//! the one-rate among the kept samples, restricted to `[1/n, 1 - 1/n]`.
//!
//! Frequencies are exact rationals over the common denominator
//! `2 * n * mu_sel`, which represents the one-rates `c / mu_sel`, the borders
//! and the initial 1/2 without rounding.

use alloc::vec::Vec;

use crate::{BitString, Error, Fitness, RandomSource, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UmdaParams {
    n: usize,
    lambda: usize,
    mu_sel: usize,
}

impl UmdaParams {
    pub fn new(n: usize, lambda: usize, mu_sel: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::ProblemSizeTooSmall { n });
        }
        if mu_sel == 0 || mu_sel > lambda {
            return Err(Error::InvalidParameter {
                name: "mu_sel",
                reason: "must satisfy 1 <= mu_sel <= lambda",
            });
        }
        if (n as u64).checked_mul(2 * mu_sel as u64).is_none_or(|d| d > 1 << 62) {
            return Err(Error::InvalidParameter {
                name: "mu_sel",
                reason: "2 * n * mu_sel overflows",
            });
        }
        Ok(Self { n, lambda, mu_sel })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn mu_sel(&self) -> usize {
        self.mu_sel
    }

    /// Common denominator `2 * n * mu_sel`.
    pub fn denominator(&self) -> u64 {
        2 * self.n as u64 * self.mu_sel as u64
    }

    fn lower(&self) -> u64 {
        2 * self.mu_sel as u64
    }

    fn upper(&self) -> u64 {
        2 * (self.n as u64 - 1) * self.mu_sel as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UmdaState {
    params: UmdaParams,
    /// Frequency numerators over `params.denominator()`.
    num: Vec<u64>,
    pub iteration: u64,
    pub evaluations: u64,
}

/// What one UMDA iteration observed.
#[derive(Debug, Clone, PartialEq)]
pub struct UmdaStepOutcome {
    /// Sample indices in selection order (best first).
    pub selected: Vec<usize>,
    /// Index of the first optimal sample in sampling order.
    pub first_optimal: Option<usize>,
    /// Some frequency left the upper border in this update.
    pub left_upper: bool,
}

impl UmdaState {
    pub fn new(params: UmdaParams) -> Self {
        Self {
            params,
            num: alloc::vec![params.n as u64 * params.mu_sel as u64; params.n],
            iteration: 0,
            evaluations: 0,
        }
    }

    pub fn params(&self) -> UmdaParams {
        self.params
    }

    /// Exact frequency at position `i` as `(numerator, denominator)`.
    pub fn frequency(&self, i: usize) -> (u64, u64) {
        (self.num[i], self.params.denominator())
    }

    pub fn value(&self, i: usize) -> f64 {
        self.num[i] as f64 / self.params.denominator() as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.params.n).map(|i| self.value(i)).collect()
    }

    pub fn is_at_upper(&self, i: usize) -> bool {
        self.num[i] == self.params.upper()
    }

    fn sample_into(&self, rng: &mut RandomSource, out: &mut BitString) {
        let den = self.params.denominator();
        for (i, &num) in self.num.iter().enumerate() {
            out.set(i, rng.below(den) < num);
        }
    }

    /// Samples `lambda` individuals (each one position after the other) and
    /// updates the model from them.
    pub fn step<F: Fitness + ?Sized>(
        &mut self,
        f: &F,
        rng: &mut RandomSource,
    ) -> UmdaStepOutcome {
        let mut samples = Vec::with_capacity(self.params.lambda);
        for _ in 0..self.params.lambda {
            let mut x = BitString::zeros(self.params.n);
            self.sample_into(rng, &mut x);
            samples.push(x);
        }
        self.update_with(f, &samples)
    }

    /// Updates the model from caller-supplied samples.
    ///
    /// # Panics
    /// If `samples.len() != lambda` or a sample has the wrong length.
    pub fn update_with<F: Fitness + ?Sized>(
        &mut self,
        f: &F,
        samples: &[BitString],
    ) -> UmdaStepOutcome {
        let p = self.params;
        assert_eq!(samples.len(), p.lambda, "expected lambda samples");
        assert!(samples.iter().all(|x| x.len() == p.n), "sample length");

        let fitness: Vec<usize> = samples.iter().map(|x| f.evaluate(x)).collect();
        let first_optimal = samples.iter().position(|x| f.is_optimum(x));
        let mut order: Vec<usize> = (0..samples.len()).collect();
        // Stable: equal fitness keeps ascending sample index.
        order.sort_by(|&a, &b| fitness[b].cmp(&fitness[a]));
        order.truncate(p.mu_sel);

        let mut left_upper = false;
        for i in 0..p.n {
            let ones = order.iter().filter(|&&s| samples[s].get(i)).count() as u64;
            let num = (2 * p.n as u64 * ones).clamp(p.lower(), p.upper());
            if self.num[i] == p.upper() && num < p.upper() {
                left_upper = true;
            }
            self.num[i] = num;
        }
        self.iteration += 1;
        self.evaluations += p.lambda as u64;
        UmdaStepOutcome {
            selected: order,
            first_optimal,
            left_upper,
        }
    }
}

/// Outcome of one budgeted UMDA run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UmdaRunResult {
    pub success: bool,
    /// 1-based evaluation index of the first optimal sample.
    pub hit_time_evals: Option<u64>,
    pub iterations_used: u64,
    pub evaluations_used: u64,
    pub upper_departure_iterations: u64,
    pub ever_below_quarter: bool,
}

impl UmdaRunResult {
    pub fn departure_fraction(&self) -> f64 {
        if self.iterations_used == 0 {
            0.0
        } else {
            self.upper_departure_iterations as f64 / self.iterations_used as f64
        }
    }
}

/// Runs the UMDA until an optimum is sampled or the next iteration would
/// exceed `budget_evals`.
pub fn run_umda<F: Fitness + ?Sized>(
    params: UmdaParams,
    f: &F,
    budget_evals: u64,
    seed: u64,
    stream: u64,
) -> UmdaRunResult {
    let mut rng = RandomSource::new(seed, stream);
    let mut state = UmdaState::new(params);
    let mut result = UmdaRunResult {
        success: false,
        hit_time_evals: None,
        iterations_used: 0,
        evaluations_used: 0,
        upper_departure_iterations: 0,
        ever_below_quarter: false,
    };
    let quarter = params.denominator() / 4;
    let quarter_exact = params.denominator().is_multiple_of(4);
    while state.evaluations + params.lambda as u64 <= budget_evals {
        let before = state.evaluations;
        let out = state.step(f, &mut rng);
        if out.left_upper {
            result.upper_departure_iterations += 1;
        }
        // p <= 1/4  <=>  4 * num <= den
        if state
            .num
            .iter()
            .any(|&num| num < quarter || (quarter_exact && num == quarter))
        {
            result.ever_below_quarter = true;
        }
        if let Some(idx) = out.first_optimal {
            result.success = true;
            result.hit_time_evals = Some(before + idx as u64 + 1);
            break;
        }
    }
    result.iterations_used = state.iteration;
    result.evaluations_used = state.evaluations;
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{LeadingOnes, OneMax};

    fn bs(bits: &[u8]) -> BitString {
        BitString::from_bits(bits)
    }

    #[test]
    fn validates_parameters() {
        assert!(UmdaParams::new(2, 4, 2).is_err());
        assert!(UmdaParams::new(5, 4, 0).is_err());
        assert!(UmdaParams::new(5, 4, 5).is_err());
        assert!(UmdaParams::new(5, 4, 4).is_ok());
    }

    #[test]
    fn hand_enumerated_update() {
        let p = UmdaParams::new(3, 4, 2).unwrap();
        let mut s = UmdaState::new(p);
        assert_eq!(s.values(), [0.5, 0.5, 0.5]);
        let samples = [bs(&[1, 1, 1]), bs(&[1, 0, 1]), bs(&[0, 1, 1]), bs(&[1, 1, 0])];
        let out = s.update_with(&LeadingOnes, &samples);
        assert_eq!(out.selected, [0, 3]);
        assert_eq!(out.first_optimal, Some(0));
        // One-rates (1, 1, 1/2), the first two clamped to 2/3.
        assert_eq!(s.frequency(0), (8, 12));
        assert_eq!(s.frequency(1), (8, 12));
        assert_eq!(s.frequency(2), (6, 12));
        assert_eq!((s.iteration, s.evaluations), (1, 4));
        assert!(s.is_at_upper(0));
    }

    #[test]
    fn identical_samples() {
        let p = UmdaParams::new(4, 3, 2).unwrap();
        let mut s = UmdaState::new(p);
        let x = bs(&[1, 0, 0, 1]);
        s.update_with(&OneMax, &[x.clone(), x.clone(), x]);
        let den = p.denominator();
        assert_eq!(
            (0..4).map(|i| s.frequency(i).0).collect::<Vec<_>>(),
            [den * 3 / 4, den / 4, den / 4, den * 3 / 4]
        );
    }

    #[test]
    fn ties_select_lowest_indices() {
        let p = UmdaParams::new(3, 4, 2).unwrap();
        let mut s = UmdaState::new(p);
        let samples = [bs(&[0, 1, 1]), bs(&[0, 0, 0]), bs(&[0, 1, 0]), bs(&[0, 0, 1])];
        let out = s.update_with(&LeadingOnes, &samples);
        assert_eq!(out.selected, [0, 1]);
        assert_eq!(out.first_optimal, None);
    }

    #[test]
    fn leaving_upper_border_is_reported() {
        let p = UmdaParams::new(3, 2, 1).unwrap();
        let mut s = UmdaState::new(p);
        s.update_with(&LeadingOnes, &[bs(&[1, 1, 0]), bs(&[0, 0, 0])]);
        assert!(s.is_at_upper(0));
        let out = s.update_with(&LeadingOnes, &[bs(&[0, 1, 0]), bs(&[0, 0, 0])]);
        assert!(out.left_upper);
    }

    #[test]
    fn run_is_deterministic_and_solves_small_instances() {
        let p = UmdaParams::new(10, 120, 30).unwrap();
        let a = run_umda(p, &LeadingOnes, 1_000_000, 3, 1);
        assert_eq!(a, run_umda(p, &LeadingOnes, 1_000_000, 3, 1));
        assert!(a.success);
        let hit = a.hit_time_evals.unwrap();
        assert!(hit > a.evaluations_used - 120 && hit <= a.evaluations_used);
        assert!(!run_umda(p, &LeadingOnes, 119, 3, 1).success);
    }
}
