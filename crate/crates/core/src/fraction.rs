//! The rebalance fraction `k`, kept as an exact integer ratio.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// A fraction `num/den` with `0 < num < den`.
///
/// All arithmetic involving `k` goes through integer multiplication and
/// floor division, so timer values are identical on every platform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RebalanceFraction {
    num: u64,
    den: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FractionError {
    #[error("expected a fraction of the form NUM/DEN, got {0:?}")]
    Malformed(String),
    #[error("rebalance fraction {num}/{den} must satisfy 0 < NUM < DEN")]
    OutOfRange { num: u64, den: u64 },
}

impl RebalanceFraction {
    pub const HALF: Self = Self { num: 1, den: 2 };

    pub fn new(num: u64, den: u64) -> Result<Self, FractionError> {
        if num == 0 || num >= den {
            return Err(FractionError::OutOfRange { num, den });
        }
        Ok(Self { num, den })
    }

    pub fn num(self) -> u64 {
        self.num
    }

    pub fn den(self) -> u64 {
        self.den
    }

    /// Timer value given to the root of a freshly (re)built subtree of
    /// `size` nodes: `max(1, floor(k * size))`.
    pub fn timer_reset_value(self, size: u64) -> u64 {
        let scaled = u128::from(self.num) * u128::from(size) / u128::from(self.den);
        // scaled < size because num < den, so it always fits back into u64
        (scaled as u64).max(1)
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Default for RebalanceFraction {
    fn default() -> Self {
        Self::HALF
    }
}

impl fmt::Display for RebalanceFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for RebalanceFraction {
    type Err = FractionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || FractionError::Malformed(s.to_owned());
        let (num, den) = s.trim().split_once('/').ok_or_else(malformed)?;
        let num = num.trim().parse().map_err(|_| malformed())?;
        let den = den.trim().parse().map_err(|_| malformed())?;
        Self::new(num, den)
    }
}

/// Free-function form of [`RebalanceFraction::timer_reset_value`].
pub fn timer_reset_value(size: u64, k: RebalanceFraction) -> u64 {
    k.timer_reset_value(size)
}
