//! Exact one-step law of the cGA by exhaustive enumeration.
//!
//! All `4^n` ordered sample pairs `(x1, x2)` are visited. Each pair has
//! probability `Pr[x1] * Pr[x2]` under the product distribution of the
//! current model; the pair is ranked and the clamped grid update is applied
//! exactly as in [`CgaState::update_with`](crate::cga::CgaState::update_with).
//! Probabilities of identical post-clamping delta vectors are accumulated
//! with compensated summation.
//!
//! The closed-form drifts of the runtime analysis on LeadingOnes are provided
//! alongside, as functions of plain frequency slices, so that they can be
//! checked against the enumeration.

use alloc::vec::Vec;

use crate::{CompensatedSum, Error, Fitness, FrequencyVector, Result};

/// Largest problem size accepted by the enumeration.
pub const MAX_ORACLE_N: usize = 10;

/// Exact distribution of the post-clamping grid delta vector of one step.
///
/// Delta vectors are stored densely, indexed by their base-3 code
/// `Σ (d_i + 1) 3^i`.
#[derive(Debug, Clone)]
pub struct StepDistribution {
    n: usize,
    mu: f64,
    freqs: Vec<f64>,
    mass: Vec<CompensatedSum>,
}

/// One enumerated sample pair. Bit `i` of a mask is position `i`.
#[derive(Debug, Clone, Copy)]
pub struct PairView<'a> {
    pub x1: u32,
    pub x2: u32,
    pub weight: f64,
    /// Post-clamping grid deltas.
    pub deltas: &'a [i8],
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_ORACLE_N {
        Err(Error::OracleTooLarge {
            n,
            max: MAX_ORACLE_N,
        })
    } else {
        Ok(())
    }
}

/// Probability of each individual (as a mask) and its fitness.
fn individuals<F: Fitness + ?Sized>(p: &FrequencyVector, f: &F) -> (Vec<f64>, Vec<usize>) {
    let n = p.len();
    let params = p.params();
    let den = params.denominator() as f64;
    let one: Vec<f64> = p
        .indices()
        .iter()
        .map(|&k| params.numerator(k) as f64 / den)
        .collect();
    let zero: Vec<f64> = p
        .indices()
        .iter()
        .map(|&k| (params.denominator() - params.numerator(k)) as f64 / den)
        .collect();
    let count = 1usize << n;
    let mut weight = Vec::with_capacity(count);
    let mut fitness = Vec::with_capacity(count);
    for mask in 0..count {
        let mut w = 1.0;
        for i in 0..n {
            w *= if mask >> i & 1 == 1 { one[i] } else { zero[i] };
        }
        weight.push(w);
        fitness.push(f.evaluate(&crate::BitString::from_mask(mask as u64, n)));
    }
    (weight, fitness)
}

/// Visits every ordered sample pair with its probability and clamped deltas.
pub fn for_each_pair<F, V>(p: &FrequencyVector, f: &F, mut visit: V) -> Result<()>
where
    F: Fitness + ?Sized,
    V: FnMut(PairView<'_>),
{
    let n = p.len();
    check_size(n)?;
    let top = p.params().max_index();
    let (weight, fitness) = individuals(p, f);
    let mut deltas = alloc::vec![0i8; n];
    for x1 in 0..weight.len() {
        for x2 in 0..weight.len() {
            let (y1, y2) = if fitness[x1] < fitness[x2] {
                (x2, x1)
            } else {
                (x1, x2)
            };
            for (i, d) in deltas.iter_mut().enumerate() {
                let raw = ((y1 >> i) & 1) as i8 - ((y2 >> i) & 1) as i8;
                let k = p.index(i);
                *d = match raw {
                    1 if k == top => 0,
                    -1 if k == 0 => 0,
                    r => r,
                };
            }
            visit(PairView {
                x1: x1 as u32,
                x2: x2 as u32,
                weight: weight[x1] * weight[x2],
                deltas: &deltas,
            });
        }
    }
    Ok(())
}

fn encode(deltas: &[i8]) -> usize {
    deltas
        .iter()
        .rev()
        .fold(0usize, |acc, &d| acc * 3 + (d + 1) as usize)
}

fn decode(mut code: usize, n: usize) -> Vec<i8> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push((code % 3) as i8 - 1);
        code /= 3;
    }
    out
}

/// Enumerates all `4^n` sample pairs (`n <= 10`).
pub fn exact_step_distribution<F: Fitness + ?Sized>(
    p: &FrequencyVector,
    f: &F,
) -> Result<StepDistribution> {
    let n = p.len();
    check_size(n)?;
    let mut mass = alloc::vec![CompensatedSum::new(); 3usize.pow(n as u32)];
    for_each_pair(p, f, |pair| mass[encode(pair.deltas)].add(pair.weight))?;
    Ok(StepDistribution {
        n,
        mu: p.params().mu(),
        freqs: p.values(),
        mass,
    })
}

impl StepDistribution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// The frequencies the distribution was computed for.
    pub fn frequencies(&self) -> &[f64] {
        &self.freqs
    }

    /// Delta vectors with nonzero probability, in base-3 code order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<i8>, f64)> + '_ {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, m)| m.value() > 0.0)
            .map(|(code, m)| (decode(code, self.n), m.value()))
    }

    pub fn support_size(&self) -> usize {
        self.mass.iter().filter(|m| m.value() > 0.0).count()
    }

    /// Probability of one delta vector.
    pub fn probability(&self, deltas: &[i8]) -> f64 {
        if deltas.len() != self.n || deltas.iter().any(|d| !(-1..=1).contains(d)) {
            return 0.0;
        }
        self.mass[encode(deltas)].value()
    }

    pub fn total_mass(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for m in &self.mass {
            acc.merge(m);
        }
        acc.value()
    }

    fn marginal(&self, i: usize) -> (CompensatedSum, CompensatedSum) {
        let mut signed = CompensatedSum::new();
        let mut moved = CompensatedSum::new();
        let stride = 3usize.pow(i as u32);
        for (code, m) in self.mass.iter().enumerate() {
            match (code / stride) % 3 {
                0 => {
                    signed.add(-m.value());
                    moved.add(m.value());
                }
                2 => {
                    signed.add(m.value());
                    moved.add(m.value());
                }
                _ => {}
            }
        }
        (signed, moved)
    }

    /// `E[Δp_i]` in frequency units.
    pub fn expected_delta(&self, i: usize) -> f64 {
        self.marginal(i).0.value() / self.mu
    }

    /// Probability that frequency `i` actually moves.
    pub fn change_probability(&self, i: usize) -> f64 {
        self.marginal(i).1.value()
    }

    /// `E[Δp_i | p_i moves]` in frequency units, `None` if it never moves.
    pub fn conditional_expected_delta(&self, i: usize) -> Option<f64> {
        let (signed, moved) = self.marginal(i);
        (moved.value() > 0.0).then(|| signed.value() / moved.value() / self.mu)
    }

    /// Total-variation distance to an empirical histogram given as
    /// `(delta vector, count)` pairs over `samples` observations.
    pub fn total_variation<'a, I>(&self, counts: I, samples: u64) -> f64
    where
        I: IntoIterator<Item = (&'a [i8], u64)>,
    {
        let mut empirical = alloc::vec![0u64; self.mass.len()];
        let mut outside = 0u64;
        for (d, c) in counts {
            if d.len() == self.n && d.iter().all(|x| (-1..=1).contains(x)) {
                empirical[encode(d)] += c;
            } else {
                outside += c;
            }
        }
        let total = samples as f64;
        let mut acc = CompensatedSum::new();
        for (m, &c) in self.mass.iter().zip(&empirical) {
            acc.add((m.value() - c as f64 / total).abs());
        }
        acc.add(outside as f64 / total);
        0.5 * acc.value()
    }
}

/// `E[Δp_i]` from a distribution, in frequency units.
pub fn exact_expected_delta(dist: &StepDistribution, i: usize) -> f64 {
    dist.expected_delta(i)
}

/// Base-3 code of a delta vector, usable to histogram sampled steps.
pub fn delta_code(deltas: &[i8]) -> usize {
    encode(deltas)
}

/// Expected change of the frequency at index `i` (0-based; the first `i`
/// positions form the prefix) in one cGA step on LeadingOnes:
/// `(2/mu) * ∏_{j<i} p_j^2 * p_i (1 - p_i)`.
///
/// Exact whenever `p_i` is at least one grid step away from both borders.
pub fn expected_delta_formula(freqs: &[f64], i: usize, mu: f64) -> f64 {
    let prefix: f64 = freqs[..i].iter().map(|p| p * p).product();
    2.0 / mu * prefix * freqs[i] * (1.0 - freqs[i])
}

/// Expected signed change of the frequency at index `i`, given that it moves:
/// `(1/mu) * ∏_{j<i} p_j^2`, directed towards 1.
pub fn conditional_drift_formula(freqs: &[f64], i: usize, mu: f64) -> f64 {
    let prefix: f64 = freqs[..i].iter().map(|p| p * p).product();
    prefix / mu
}
