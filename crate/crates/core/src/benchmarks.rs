//! Pseudo-Boolean benchmark functions.

use core::fmt;
use core::str::FromStr;

use crate::{BitString, Error};

/// A fitness function to be maximized.
pub trait Fitness {
    fn name(&self) -> &'static str;

    fn evaluate(&self, x: &BitString) -> usize;

    fn is_optimum(&self, x: &BitString) -> bool;

    /// Whether flipping any single 0 to a 1 never decreases the fitness.
    fn weakly_prefers_ones(&self) -> bool;
}

/// Length of the longest all-ones prefix.
pub fn leading_ones(x: &BitString) -> usize {
    x.iter().take_while(|&b| b).count()
}

/// Number of ones.
pub fn one_max(x: &BitString) -> usize {
    x.count_ones()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LeadingOnes;

impl Fitness for LeadingOnes {
    fn name(&self) -> &'static str {
        "leadingones"
    }

    #[inline]
    fn evaluate(&self, x: &BitString) -> usize {
        leading_ones(x)
    }

    #[inline]
    fn is_optimum(&self, x: &BitString) -> bool {
        x.iter().all(|b| b)
    }

    fn weakly_prefers_ones(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OneMax;

impl Fitness for OneMax {
    fn name(&self) -> &'static str {
        "onemax"
    }

    #[inline]
    fn evaluate(&self, x: &BitString) -> usize {
        one_max(x)
    }

    #[inline]
    fn is_optimum(&self, x: &BitString) -> bool {
        x.iter().all(|b| b)
    }

    fn weakly_prefers_ones(&self) -> bool {
        true
    }
}

/// Benchmarks selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Benchmark {
    LeadingOnes,
    OneMax,
}

impl Benchmark {
    pub const ALL: [Benchmark; 2] = [Benchmark::LeadingOnes, Benchmark::OneMax];

    pub fn as_str(&self) -> &'static str {
        match self {
            Benchmark::LeadingOnes => LeadingOnes.name(),
            Benchmark::OneMax => OneMax.name(),
        }
    }
}

impl Fitness for Benchmark {
    fn name(&self) -> &'static str {
        self.as_str()
    }

    #[inline]
    fn evaluate(&self, x: &BitString) -> usize {
        match self {
            Benchmark::LeadingOnes => leading_ones(x),
            Benchmark::OneMax => one_max(x),
        }
    }

    #[inline]
    fn is_optimum(&self, x: &BitString) -> bool {
        match self {
            Benchmark::LeadingOnes => LeadingOnes.is_optimum(x),
            Benchmark::OneMax => OneMax.is_optimum(x),
        }
    }

    fn weakly_prefers_ones(&self) -> bool {
        match self {
            Benchmark::LeadingOnes => LeadingOnes.weakly_prefers_ones(),
            Benchmark::OneMax => OneMax.weakly_prefers_ones(),
        }
    }
}

impl<F: Fitness + ?Sized> Fitness for &F {
    fn name(&self) -> &'static str {
        (**self).name()
    }
    fn evaluate(&self, x: &BitString) -> usize {
        (**self).evaluate(x)
    }
    fn is_optimum(&self, x: &BitString) -> bool {
        (**self).is_optimum(x)
    }
    fn weakly_prefers_ones(&self) -> bool {
        (**self).weakly_prefers_ones()
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Benchmark::ALL
            .into_iter()
            .find(|b| b.as_str().eq_ignore_ascii_case(s))
            .ok_or(Error::InvalidParameter {
                name: "benchmark",
                reason: "expected one of: leadingones, onemax",
            })
    }
}
