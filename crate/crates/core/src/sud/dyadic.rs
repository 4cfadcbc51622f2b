use crate::error::{Error, Result};
use serde::Serialize;
use std::cmp::Ordering;
use std::fmt;

/// An exact dyadic rational reduced mod 1 into `[0, 1)`, stored in lowest
/// terms: the numerator is odd unless the value is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct DyadicRational {
    num: u64,
    log2_den: u32,
}

impl DyadicRational {
    pub const ZERO: DyadicRational = DyadicRational { num: 0, log2_den: 0 };

    pub const ONE_HALF: DyadicRational = DyadicRational { num: 1, log2_den: 1 };

    /// Builds `num / 2^log2_den` reduced mod 1 and to lowest terms.
    ///
    /// Fails only when the reduced numerator does not fit 64 bits, which the
    /// desk-scale callers never trigger.
    pub fn from_parts(num: u128, log2_den: u32) -> Result<Self> {
        let mut n = num;
        let mut d = log2_den;
        if d == 0 {
            n = 0;
        } else if d < 128 {
            n %= 1u128 << d;
        }
        if n == 0 {
            return Ok(DyadicRational::ZERO);
        }
        let strip = n.trailing_zeros().min(d);
        n >>= strip;
        d -= strip;
        let num64 = u64::try_from(n).map_err(|_| Error::ExactOverflow {
            context: "dyadic rational numerator",
            i: 0,
        })?;
        Ok(DyadicRational {
            num: num64,
            log2_den: d,
        })
    }

    pub fn numerator(self) -> u64 {
        self.num
    }

    pub fn log2_denominator(self) -> u32 {
        self.log2_den
    }

    /// Exact conversion to `f64` (lossless while the denominator exponent
    /// stays below 54, which covers every materialised block).
    pub fn value_f64(self) -> f64 {
        self.num as f64 / (self.log2_den as f64).exp2()
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    /// `self - other` mod 1, exact.
    pub fn sub(self, other: DyadicRational) -> Result<Self> {
        let d = self.log2_den.max(other.log2_den);
        if d > 100 {
            return Err(Error::ExactOverflow {
                context: "dyadic subtraction",
                i: 0,
            });
        }
        let a = (self.num as u128) << (d - self.log2_den);
        let b = (other.num as u128) << (d - other.log2_den);
        let modulus = 1u128 << d;
        Self::from_parts((a + modulus - b) % modulus, d)
    }

    /// `self - k * xi` mod 1, exact.
    pub fn sub_scaled(self, k: u64, xi: DyadicRational) -> Result<Self> {
        let d = self.log2_den.max(xi.log2_den);
        if d > 100 {
            return Err(Error::ExactOverflow {
                context: "dyadic linear perturbation",
                i: 0,
            });
        }
        let modulus = 1u128 << d;
        let a = (self.num as u128) << (d - self.log2_den);
        let shift = (k as u128 * xi.num as u128) % modulus;
        let shifted = (shift << (d - xi.log2_den)) % modulus;
        Self::from_parts((a + modulus - shifted) % modulus, d)
    }

    /// Numerator after rescaling to the common denominator `2^d`.
    pub fn scaled_numerator(self, d: u32) -> Result<u128> {
        if d < self.log2_den || d - self.log2_den > 100 {
            return Err(Error::ExactOverflow {
                context: "dyadic rescaling",
                i: 0,
            });
        }
        Ok((self.num as u128) << (d - self.log2_den))
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let d = self.log2_den.max(other.log2_den);
        let a = (self.num as u128) << (d - self.log2_den);
        let b = (other.num as u128) << (d - other.log2_den);
        a.cmp(&b)
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.log2_den)
    }
}
