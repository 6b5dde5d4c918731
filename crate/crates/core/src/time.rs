use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Sub};

/// Virtual time or duration in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Micros(pub f64);

impl Micros {
    pub const ZERO: Micros = Micros(0.0);

    pub fn as_f64(self) -> f64 {
        self.0
    }

    pub fn max(self, other: Micros) -> Micros {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl Eq for Micros {}

impl PartialOrd for Micros {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Micros {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add for Micros {
    type Output = Micros;
    fn add(self, rhs: Micros) -> Micros {
        Micros(self.0 + rhs.0)
    }
}

impl AddAssign for Micros {
    fn add_assign(&mut self, rhs: Micros) {
        self.0 += rhs.0;
    }
}

impl Sub for Micros {
    type Output = Micros;
    fn sub(self, rhs: Micros) -> Micros {
        Micros(self.0 - rhs.0)
    }
}

impl Mul<f64> for Micros {
    type Output = Micros;
    fn mul(self, k: f64) -> Micros {
        Micros(self.0 * k)
    }
}

impl Sum for Micros {
    fn sum<I: Iterator<Item = Micros>>(iter: I) -> Micros {
        iter.fold(Micros::ZERO, Add::add)
    }
}

impl fmt::Display for Micros {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3}us", self.0)
    }
}
