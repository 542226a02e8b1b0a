//! Exact b-adic rationals `p / b^n` and the b-adic intervals `I_{n,k}`.
//!
//! Digits always come from the terminating expansion: a b-adic rational has
//! trailing zeros, never trailing `b - 1`s.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// An exact point `numerator / base^depth` in canonical form
/// (`depth == 0` or `base` does not divide `numerator`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BAdicPoint {
    base: u32,
    numerator: BigUint,
    depth: u32,
}

fn check_base(base: u32) -> Result<()> {
    if base < 2 {
        return Err(Error::InvalidPoint(format!("base must be >= 2, got {base}")));
    }
    Ok(())
}

pub(crate) fn big_pow(base: u32, exp: u32) -> BigUint {
    num_traits::pow(BigUint::from(base), exp as usize)
}

impl BAdicPoint {
    pub fn new(base: u32, numerator: impl Into<BigUint>, depth: u32) -> Result<Self> {
        check_base(base)?;
        let mut numerator = numerator.into();
        let mut depth = depth;
        let b = BigUint::from(base);
        while depth > 0 && !numerator.is_zero() {
            let (q, r) = numerator.div_rem(&b);
            if !r.is_zero() {
                break;
            }
            numerator = q;
            depth -= 1;
        }
        if numerator.is_zero() {
            depth = 0;
        }
        Ok(BAdicPoint { base, numerator, depth })
    }

    pub fn zero(base: u32) -> Result<Self> {
        Self::new(base, 0u32, 0)
    }

    /// Builds `int_part + sum_j digits[j-1] * b^{-j}`.
    pub fn from_digits(base: u32, int_part: impl Into<BigUint>, digits: &[u32]) -> Result<Self> {
        check_base(base)?;
        let mut p: BigUint = int_part.into();
        for &d in digits {
            if d >= base {
                return Err(Error::InvalidPoint(format!("digit {d} out of range for base {base}")));
            }
            p = p * base + d;
        }
        Self::new(base, p, digits.len() as u32)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// `x_j`, the j-th fractional digit (`j >= 1`); zero beyond the depth.
    pub fn digit(&self, j: u32) -> u32 {
        assert!(j >= 1, "fractional digits are indexed from 1");
        if j > self.depth {
            return 0;
        }
        let shifted = &self.numerator / big_pow(self.base, self.depth - j);
        (shifted % self.base).to_u32().expect("digit below base")
    }

    /// The fractional digits `x_1 .. x_depth`.
    pub fn digits(&self) -> Vec<u32> {
        (1..=self.depth).map(|j| self.digit(j)).collect()
    }

    /// `floor(b^j * x)`, exact.
    pub fn floor_scale(&self, j: u32) -> BigUint {
        if j >= self.depth {
            &self.numerator * big_pow(self.base, j - self.depth)
        } else {
            &self.numerator / big_pow(self.base, self.depth - j)
        }
    }

    pub fn integer_part(&self) -> BigUint {
        self.floor_scale(0)
    }

    /// `I_n(x)`: the level-`n` b-adic interval containing `x`.
    pub fn enclosing_interval(&self, n: u32) -> BAdicInterval {
        BAdicInterval {
            base: self.base,
            level: n,
            index: self.floor_scale(n),
        }
    }

    /// `b^t * x`.
    pub fn scale_up(&self, t: u32) -> BAdicPoint {
        if t <= self.depth {
            BAdicPoint {
                base: self.base,
                numerator: self.numerator.clone(),
                depth: self.depth - t,
            }
        } else {
            BAdicPoint {
                base: self.base,
                numerator: &self.numerator * big_pow(self.base, t - self.depth),
                depth: 0,
            }
        }
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.numerator.clone()),
            BigInt::from(big_pow(self.base, self.depth)),
        )
    }

    pub fn to_f64(&self) -> f64 {
        self.to_rational().to_f64().unwrap_or(f64::NAN)
    }

    /// Accepts `p/b^n`, `p/b` (depth 1) or a bare integer `p` (needs `default_base`).
    pub fn parse_with_base(s: &str, default_base: Option<u32>) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidPoint(format!("cannot parse `{s}`; expected p/b^n"));
        match s.split_once('/') {
            None => {
                let base = default_base.ok_or_else(bad)?;
                let p = BigUint::from_str(s).map_err(|_| bad())?;
                Self::new(base, p, 0)
            }
            Some((p, rest)) => {
                let p = BigUint::from_str(p.trim()).map_err(|_| bad())?;
                let (b, n) = match rest.split_once('^') {
                    Some((b, n)) => (b.trim(), n.trim().parse::<u32>().map_err(|_| bad())?),
                    None => (rest.trim(), 1),
                };
                let base = b.parse::<u32>().map_err(|_| bad())?;
                if let Some(expected) = default_base {
                    if expected != base {
                        return Err(Error::BaseMismatch { expected, got: base });
                    }
                }
                Self::new(base, p, n)
            }
        }
    }
}

impl FromStr for BAdicPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with_base(s, None)
    }
}

impl fmt::Display for BAdicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}^{}", self.numerator, self.base, self.depth)
    }
}

/// `I_{n,k} = [k / b^n, (k + 1) / b^n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BAdicInterval {
    base: u32,
    level: u32,
    index: BigUint,
}

impl BAdicInterval {
    pub fn new(base: u32, level: u32, index: impl Into<BigUint>) -> Result<Self> {
        check_base(base)?;
        let index = index.into();
        if index >= big_pow(base, level) {
            return Err(Error::OutOfRange(format!("interval index {index} >= {base}^{level}")));
        }
        Ok(BAdicInterval { base, level, index })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> &BigUint {
        &self.index
    }

    pub fn left(&self) -> BAdicPoint {
        BAdicPoint::new(self.base, self.index.clone(), self.level).expect("valid base")
    }

    /// The right endpoint, which is not part of the interval.
    pub fn right(&self) -> BAdicPoint {
        BAdicPoint::new(self.base, &self.index + 1u32, self.level).expect("valid base")
    }

    pub fn contains(&self, x: &BAdicPoint) -> bool {
        x.base == self.base && x.floor_scale(self.level) == self.index
    }

    /// `I_{n+1, bk+i}` for `i = 0..b`.
    pub fn children(&self) -> Vec<BAdicInterval> {
        (0..self.base)
            .map(|i| BAdicInterval {
                base: self.base,
                level: self.level + 1,
                index: &self.index * self.base + i,
            })
            .collect()
    }

    pub fn parent(&self) -> Option<BAdicInterval> {
        (self.level > 0).then(|| BAdicInterval {
            base: self.base,
            level: self.level - 1,
            index: &self.index / self.base,
        })
    }

    pub fn width(&self) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::from(big_pow(self.base, self.level)))
    }
}

impl fmt::Display for BAdicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I[{},{}] (base {})", self.level, self.index, self.base)
    }
}
