use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

/// A real number or `+∞`.
///
/// Rate functions, log moment generating functions and hard-core interaction
/// energies take the value `+∞`; keeping it as a tag avoids comparisons and
/// arithmetic on floating infinities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Extended {
    Finite(f64),
    PosInf,
}

impl Extended {
    pub const ZERO: Extended = Extended::Finite(0.0);

    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::PosInf => None,
        }
    }

    /// Scales by a nonnegative factor; `0 · ∞ = 0` (measure-theoretic convention).
    pub fn scale(self, factor: f64) -> Extended {
        debug_assert!(factor >= 0.0);
        match self {
            Extended::Finite(v) => Extended::Finite(v * factor),
            Extended::PosInf if factor == 0.0 => Extended::ZERO,
            Extended::PosInf => Extended::PosInf,
        }
    }

    /// `exp(-self)`, exactly zero for `+∞`.
    pub fn boltzmann_weight(self) -> f64 {
        match self {
            Extended::Finite(v) => (-v).exp(),
            Extended::PosInf => 0.0,
        }
    }
}

impl Add for Extended {
    type Output = Extended;

    fn add(self, rhs: Extended) -> Extended {
        match (self, rhs) {
            (Extended::Finite(a), Extended::Finite(b)) => Extended::Finite(a + b),
            _ => Extended::PosInf,
        }
    }
}

impl std::iter::Sum for Extended {
    fn sum<I: Iterator<Item = Extended>>(iter: I) -> Extended {
        iter.fold(Extended::ZERO, |a, b| a + b)
    }
}

impl From<f64> for Extended {
    fn from(v: f64) -> Self {
        Extended::Finite(v)
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::PosInf => write!(f, "inf"),
        }
    }
}
