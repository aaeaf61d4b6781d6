//! Tail bounds of the multiplicative, negative and genetic-drift theorems,
//! plus two synthetic processes with known drift used to test them.
//!
//! Every probability bound is capped at 1; a bound equal to 1 says nothing
//! and is reported as vacuous.

use crate::{Error, RandomSource, Result};

/// Relative slack used when rounding a threshold up, so that values like
/// `3 / 0.1 = 29.999999999999996` land on the exact integer.
const CEIL_SLACK: f64 = 1e-9;

fn ceil_snapped(x: f64) -> f64 {
    let r = libm::round(x);
    if (x - r).abs() <= CEIL_SLACK * r.abs().max(1.0) {
        r
    } else {
        libm::ceil(x)
    }
}

/// Hitting time of 0 for a process with `E[X_t - X_{t+1}] >= delta X_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplicativeDriftBound {
    pub delta: f64,
    pub x0: f64,
    pub s_min: f64,
    pub r: f64,
}

impl MultiplicativeDriftBound {
    pub fn new(delta: f64, x0: f64, s_min: f64, r: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: "must be positive and finite",
            });
        }
        if !(s_min > 0.0 && x0 >= s_min && x0.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "x0",
                reason: "must satisfy x0 >= s_min > 0",
            });
        }
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "r",
                reason: "must be finite and non-negative",
            });
        }
        Ok(Self { delta, x0, s_min, r })
    }

    /// `(⌈(r + ln(x0/s_min))/delta⌉, exp(-r))`: the hitting time exceeds the
    /// threshold with probability at most the second component.
    pub fn tail(&self) -> (u64, f64) {
        let t = ceil_snapped((self.r + libm::log(self.x0 / self.s_min)) / self.delta);
        (t as u64, libm::exp(-self.r))
    }

    pub fn is_vacuous(&self) -> bool {
        self.tail().1 >= 1.0
    }
}

/// Probability of reaching `b` within `t` steps against a drift `eps < 0`
/// (the interval start `a` is 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativeDriftBound {
    pub b: f64,
    pub c: f64,
    pub eps: f64,
    pub t: u64,
}

impl NegativeDriftBound {
    pub fn new(b: f64, c: f64, eps: f64, t: u64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "b",
                reason: "must be positive",
            });
        }
        if !(c > 0.0 && c < b) {
            return Err(Error::InvalidParameter {
                name: "c",
                reason: "must satisfy 0 < c < b",
            });
        }
        if !(eps < 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "eps",
                reason: "must be negative",
            });
        }
        Ok(Self { b, c, eps, t })
    }

    /// `min(1, t^2 exp(-b|eps| / (2c^2)))`.
    pub fn tail(&self) -> f64 {
        let t = self.t as f64;
        let exponent = -self.b * self.eps.abs() / (2.0 * self.c * self.c);
        (t * t * libm::exp(exponent)).min(1.0)
    }

    pub fn is_vacuous(&self) -> bool {
        self.tail() >= 1.0
    }
}

/// Probability that a cGA frequency at a weakly-1-preferring position drops
/// to `1/2 - gamma` or below within `horizon` iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneticDriftBound {
    pub gamma: f64,
    pub mu: f64,
    pub horizon: u64,
    pub position: usize,
}

impl GeneticDriftBound {
    pub fn new(gamma: f64, mu: f64, horizon: u64, position: usize) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: "must be positive",
            });
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidPopulationSize { mu });
        }
        if horizon == 0 {
            return Err(Error::InvalidParameter {
                name: "T",
                reason: "horizon must be at least 1",
            });
        }
        Ok(Self {
            gamma,
            mu,
            horizon,
            position,
        })
    }

    /// `min(1, 2 exp(-gamma^2 mu^2 / (2T)))`.
    pub fn tail(&self) -> f64 {
        let e = -(self.gamma * self.gamma * self.mu * self.mu) / (2.0 * self.horizon as f64);
        (2.0 * libm::exp(e)).min(1.0)
    }

    pub fn is_vacuous(&self) -> bool {
        self.tail() >= 1.0
    }
}

/// `X_{t+1} = 0` with probability `delta`, otherwise `X_{t+1} = X_t`.
///
/// The drift towards 0 is exactly `delta X_t`, so the hitting time is
/// geometric with mean `1/delta` whatever the start value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpToZero {
    delta: f64,
    x0: f64,
}

impl JumpToZero {
    pub fn new(delta: f64, x0: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: "must be in (0, 1]",
            });
        }
        if !(x0 > 0.0 && x0.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "x0",
                reason: "must be positive",
            });
        }
        Ok(Self { delta, x0 })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// First `t >= 1` with `X_t = 0`.
    pub fn hitting_time(&self, rng: &mut RandomSource) -> u64 {
        let mut t = 1;
        while !rng.bernoulli(self.delta) {
            t += 1;
        }
        t
    }
}

/// Walk on `{-step, 0, step, 2 step, ...}` started at 0.
///
/// From any state `>= 0` it moves `+step` with probability
/// `(1 + eps/step)/2` and `-step` otherwise, so the drift there is exactly
/// `eps`. From `-step` it returns to 0, which keeps every successor of a
/// negative state at or below 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectedWalk {
    eps: f64,
    step: f64,
    b: f64,
}

impl ReflectedWalk {
    pub fn new(eps: f64, step: f64, b: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "step",
                reason: "must be positive",
            });
        }
        if eps.is_nan() || eps.abs() > step {
            return Err(Error::InvalidParameter {
                name: "eps",
                reason: "must satisfy |eps| <= step",
            });
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "b",
                reason: "target must be positive",
            });
        }
        Ok(Self { eps, step, b })
    }

    pub fn up_probability(&self) -> f64 {
        0.5 * (1.0 + self.eps / self.step)
    }

    /// Whether the walk reaches `>= b` within `horizon` steps.
    pub fn hits_within(&self, horizon: u64, rng: &mut RandomSource) -> bool {
        // Position in units of `step`.
        let target = ceil_snapped(self.b / self.step) as i64;
        let up = self.up_probability();
        let mut pos: i64 = 0;
        for _ in 0..horizon {
            pos = if pos < 0 {
                0
            } else if rng.bernoulli(up) {
                pos + 1
            } else {
                pos - 1
            };
            if pos >= target {
                return true;
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicative_tail_values() {
        let b = MultiplicativeDriftBound::new(0.1, 1.0, 1.0, 3.0).unwrap();
        let (t, p) = b.tail();
        assert_eq!(t, 30);
        assert!((p - 0.049_787_068_367_863_944).abs() < 1e-15);

        let (t, p) = MultiplicativeDriftBound::new(0.1, 1.0, 1.0, 0.0).unwrap().tail();
        assert_eq!((t, p), (0, 1.0));

        let b = MultiplicativeDriftBound::new(1.0, core::f64::consts::E, 1.0, 1.0).unwrap();
        let (t, p) = b.tail();
        assert_eq!(t, 2);
        assert!((p - libm::exp(-1.0)).abs() < 1e-16);

        for r in 1..=3 {
            let b = MultiplicativeDriftBound::new(0.1, 1.0, 1.0, r as f64).unwrap();
            assert_eq!(b.tail().0, 10 * r);
        }
        assert!(MultiplicativeDriftBound::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(MultiplicativeDriftBound::new(0.1, 0.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn negative_tail_values() {
        let b = NegativeDriftBound::new(1.0, 0.05, -0.05, 10).unwrap();
        assert!((b.tail() - 100.0 * libm::exp(-10.0)).abs() < 1e-15);
        assert!((b.tail() - 4.54e-3).abs() < 1e-5);
        assert_eq!(NegativeDriftBound::new(1.0, 0.05, -0.05, 0).unwrap().tail(), 0.0);
        let vac = NegativeDriftBound::new(0.02, 0.002, -0.0005, 100).unwrap();
        assert_eq!(vac.tail(), 1.0);
        assert!(vac.is_vacuous());
        assert!(NegativeDriftBound::new(1.0, 1.0, -0.1, 5).is_err());
        assert!(NegativeDriftBound::new(1.0, 0.1, 0.0, 5).is_err());
    }

    #[test]
    fn genetic_tail_values() {
        let b = GeneticDriftBound::new(0.25, 500.0, 2000, 19).unwrap();
        let expect = 2.0 * libm::exp(-3.906_25);
        assert!((b.tail() - expect).abs() < 1e-15);
        assert!((b.tail() - 0.0403).abs() < 1e-4);
        assert_eq!(GeneticDriftBound::new(0.25, 100.0, 10_000, 0).unwrap().tail(), 1.0);
    }

    #[test]
    fn genetic_tail_monotonicity() {
        let mut last_mu = 1.0;
        for mu in [50.0, 100.0, 200.0, 400.0, 800.0] {
            let v = GeneticDriftBound::new(0.25, mu, 1000, 0).unwrap().tail();
            assert!(v <= last_mu);
            last_mu = v;
        }
        let mut last_t = 0.0;
        for t in [10u64, 100, 1000, 10_000, 100_000, 10_000_000] {
            let v = GeneticDriftBound::new(0.25, 500.0, t, 0).unwrap().tail();
            assert!(v >= last_t);
            last_t = v;
        }
        assert_eq!(last_t, 1.0);
    }

    #[test]
    fn jump_process() {
        let p = JumpToZero::new(1.0, 5.0).unwrap();
        let mut rng = RandomSource::new(1, 0);
        assert!((0..100).all(|_| p.hitting_time(&mut rng) == 1));

        let p = JumpToZero::new(0.1, 1.0).unwrap();
        let trials = 100_000;
        let total: u64 = (0..trials).map(|_| p.hitting_time(&mut rng)).sum();
        let mean = total as f64 / trials as f64;
        // sd of the mean is sqrt(0.9)/0.1/sqrt(1e5) = 0.03.
        assert!((mean - 10.0).abs() < 0.1, "mean {mean}");

        // Closed form tail vs the bound at r = 3.
        let exact = libm::pow(0.9, 30.0);
        assert!((exact - 0.0424).abs() < 1e-4);
        assert!(exact <= MultiplicativeDriftBound::new(0.1, 1.0, 1.0, 3.0).unwrap().tail().1);
        assert!(JumpToZero::new(0.0, 1.0).is_err());
        assert!(JumpToZero::new(1.5, 1.0).is_err());
    }

    #[test]
    fn walk_preconditions_and_extremes() {
        assert!(ReflectedWalk::new(-0.1, 0.05, 1.0).is_err());
        assert!(ReflectedWalk::new(-0.01, 0.05, 0.0).is_err());
        assert!(ReflectedWalk::new(-0.01, 0.0, 1.0).is_err());
        let down = ReflectedWalk::new(-0.05, 0.05, 0.01).unwrap();
        let mut rng = RandomSource::new(2, 0);
        assert!((0..1000).all(|_| !down.hits_within(1000, &mut rng)));
        let up = ReflectedWalk::new(0.05, 0.05, 1.0).unwrap();
        assert!(up.hits_within(20, &mut rng));
        assert!(!up.hits_within(19, &mut rng));
    }
}
