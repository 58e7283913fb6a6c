use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A lattice node `(m, n)` standing for the wave vector `k = (m, n)`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
pub struct WaveVector {
    pub m: i32,
    pub n: i32,
}

impl WaveVector {
    pub const fn new(m: i32, n: i32) -> Self {
        Self { m, n }
    }

    pub fn is_zero(self) -> bool {
        self.m == 0 && self.n == 0
    }

    /// `m² + n²`.
    pub fn norm(self) -> u64 {
        let m = self.m.unsigned_abs() as u64;
        let n = self.n.unsigned_abs() as u64;
        m * m + n * n
    }

    /// Coordinate-wise absolute value; identifies the ordered unsigned
    /// decomposition the vector is a sign variant of.
    pub fn abs(self) -> Self {
        Self::new(self.m.abs(), self.n.abs())
    }

    pub fn reflect(self, r: Reflection) -> Self {
        match r {
            Reflection::Identity => self,
            Reflection::FlipM => Self::new(-self.m, self.n),
            Reflection::FlipN => Self::new(self.m, -self.n),
            Reflection::FlipBoth => -self,
        }
    }

    pub fn within_square(self, limit: u32) -> bool {
        self.m.unsigned_abs() <= limit && self.n.unsigned_abs() <= limit
    }

    /// Both coordinates nonnegative.
    pub fn is_nonnegative(self) -> bool {
        self.m >= 0 && self.n >= 0
    }
}

impl Add for WaveVector {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.m + rhs.m, self.n + rhs.n)
    }
}

impl Sub for WaveVector {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.m - rhs.m, self.n - rhs.n)
    }
}

impl Neg for WaveVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.m, -self.n)
    }
}

impl fmt::Display for WaveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.m, self.n)
    }
}

impl From<(i32, i32)> for WaveVector {
    fn from((m, n): (i32, i32)) -> Self {
        Self::new(m, n)
    }
}

/// The four axis reflections of the lattice, applied to every vector of a
/// quadruple at once. They preserve norms and the momentum equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reflection {
    Identity,
    FlipM,
    FlipN,
    FlipBoth,
}

impl Reflection {
    pub const ALL: [Reflection; 4] = [
        Reflection::Identity,
        Reflection::FlipM,
        Reflection::FlipN,
        Reflection::FlipBoth,
    ];

    /// The reflection flipping exactly the axes on which `d` is negative.
    pub fn making_nonnegative(d: WaveVector) -> Self {
        match (d.m < 0, d.n < 0) {
            (false, false) => Reflection::Identity,
            (true, false) => Reflection::FlipM,
            (false, true) => Reflection::FlipN,
            (true, true) => Reflection::FlipBoth,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflections_preserve_norm() {
        let k = WaveVector::new(-119, 120);
        for r in Reflection::ALL {
            assert_eq!(k.reflect(r).norm(), k.norm());
        }
        assert_eq!(k.norm(), 13u64.pow(4));
    }

    #[test]
    fn making_nonnegative_flips_negative_axes() {
        for d in [(3, -2), (-3, 2), (-3, -2), (0, -1), (-1, 0), (4, 5)] {
            let d = WaveVector::from(d);
            assert!(d
                .reflect(Reflection::making_nonnegative(d))
                .is_nonnegative());
        }
    }
}
