//! Exact half-integer angular-momentum quantum numbers.
//!
//! Quantum numbers like F = 5/2 or m = -3/2 are stored as twice their value
//! in an integer, so non-physical inputs (m not congruent to j mod 1, etc.)
//! are unrepresentable or cheap to reject.

use std::fmt;
use std::ops::Neg;

use serde::{Deserialize, Serialize};

/// A half-integer quantum number, stored as twice its value.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HalfInt {
    twice: i32,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const ONE: HalfInt = HalfInt { twice: 2 };

    /// Value stored as twice the quantum number: `HalfInt::from_twice(5)` is 5/2.
    pub const fn from_twice(twice: i32) -> Self {
        HalfInt { twice }
    }

    pub const fn from_int(n: i32) -> Self {
        HalfInt { twice: 2 * n }
    }

    /// Nearest representable half-integer (used for parsing, not arithmetic).
    pub fn from_f64(x: f64) -> Self {
        HalfInt {
            twice: (2.0 * x).round() as i32,
        }
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    pub const fn is_negative(self) -> bool {
        self.twice < 0
    }

    /// Number of m sublevels 2j+1; panics if not a valid nonnegative spin.
    pub fn multiplicity(self) -> usize {
        assert!(self.twice >= 0, "multiplicity of negative spin {self}");
        self.twice as usize + 1
    }

    /// m runs from -j to +j in integer steps.
    pub fn m_values(self) -> impl Iterator<Item = HalfInt> {
        let j = self.twice;
        (0..=j.max(0)).map(move |k| HalfInt::from_twice(-j + 2 * k))
    }

    /// |m| <= j and j - m integral.
    pub fn valid_projection(self, m: HalfInt) -> bool {
        m.twice.abs() <= self.twice && (self.twice - m.twice) % 2 == 0
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt { twice: -self.twice }
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt {
            twice: self.twice + rhs.twice,
        }
    }
}

impl std::ops::Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt {
            twice: self.twice - rhs.twice,
        }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// Shorthand for `HalfInt::from_twice`, used heavily in tests.
pub const fn half(twice: i32) -> HalfInt {
    HalfInt::from_twice(twice)
}
