//! Midpoint-radius enclosures over exact rationals.
//!
//! Everything is exact except the irrational powers `x^α`, which are
//! enclosed with integer roots at a chosen number of fractional bits.
//! Results are then snapped outward to a dyadic grid so numbers stay small.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

/// Default number of fractional bits for rounded enclosures.
pub const DEFAULT_BITS: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifiedValue {
    mid: BigRational,
    radius: BigRational,
}

pub(crate) fn rat(n: i128, d: i128) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub(crate) fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

fn floor_at(x: &BigRational, bits: u32) -> BigRational {
    let scaled = x * BigRational::from_integer(pow2(bits));
    BigRational::new(scaled.floor().to_integer(), pow2(bits))
}

fn ceil_at(x: &BigRational, bits: u32) -> BigRational {
    let scaled = x * BigRational::from_integer(pow2(bits));
    BigRational::new(scaled.ceil().to_integer(), pow2(bits))
}

impl CertifiedValue {
    pub fn new(mid: BigRational, radius: BigRational) -> Self {
        assert!(!radius.is_negative(), "negative radius");
        CertifiedValue { mid, radius }
    }

    pub fn exact(v: BigRational) -> Self {
        CertifiedValue {
            mid: v,
            radius: BigRational::zero(),
        }
    }

    pub fn from_bounds(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "empty enclosure");
        let two = BigRational::from_integer(BigInt::from(2));
        CertifiedValue {
            mid: (&lo + &hi) / &two,
            radius: (hi - lo) / two,
        }
    }

    pub fn mid(&self) -> &BigRational {
        &self.mid
    }

    pub fn radius(&self) -> &BigRational {
        &self.radius
    }

    pub fn is_exact(&self) -> bool {
        self.radius.is_zero()
    }

    pub fn lo(&self) -> BigRational {
        &self.mid - &self.radius
    }

    pub fn hi(&self) -> BigRational {
        &self.mid + &self.radius
    }

    pub fn contains(&self, v: &BigRational) -> bool {
        (&self.mid - v).abs() <= self.radius
    }

    pub fn overlaps(&self, other: &CertifiedValue) -> bool {
        (&self.mid - &other.mid).abs() <= &self.radius + &other.radius
    }

    pub fn inflate(&self, by: &BigRational) -> CertifiedValue {
        CertifiedValue::new(self.mid.clone(), &self.radius + by)
    }

    pub fn add(&self, other: &CertifiedValue) -> CertifiedValue {
        CertifiedValue::new(&self.mid + &other.mid, &self.radius + &other.radius)
    }

    pub fn sub(&self, other: &CertifiedValue) -> CertifiedValue {
        CertifiedValue::new(&self.mid - &other.mid, &self.radius + &other.radius)
    }

    pub fn add_exact(&self, v: &BigRational) -> CertifiedValue {
        CertifiedValue::new(&self.mid + v, self.radius.clone())
    }

    /// Quotient by an enclosure of a strictly positive number.
    pub fn div_positive(&self, den: &CertifiedValue) -> CertifiedValue {
        let (dlo, dhi) = (den.lo(), den.hi());
        assert!(dlo.is_positive(), "divisor enclosure must be positive");
        let (nlo, nhi) = (self.lo(), self.hi());
        let cands = [&nlo / &dlo, &nlo / &dhi, &nhi / &dlo, &nhi / &dhi];
        let lo = cands.iter().min().expect("non-empty").clone();
        let hi = cands.iter().max().expect("non-empty").clone();
        CertifiedValue::from_bounds(lo, hi)
    }

    /// Snaps the bounds outward to multiples of `2^-bits`.
    pub fn round_outward(&self, bits: u32) -> CertifiedValue {
        CertifiedValue::from_bounds(floor_at(&self.lo(), bits), ceil_at(&self.hi(), bits))
    }

    pub fn mid_f64(&self) -> f64 {
        self.mid.to_f64().unwrap_or(f64::NAN)
    }

    pub fn radius_f64(&self) -> f64 {
        // Round the radius up so the float never understates it.
        let r = self.radius.to_f64().unwrap_or(f64::INFINITY);
        if r == 0.0 && !self.radius.is_zero() {
            f64::MIN_POSITIVE
        } else {
            r * (1.0 + f64::EPSILON)
        }
    }

    pub fn summary(&self) -> CertifiedSummary {
        CertifiedSummary {
            mid: self.mid.to_string(),
            mid_f64: self.mid_f64(),
            radius: self.radius.to_string(),
            radius_f64: self.radius_f64(),
        }
    }
}

impl fmt::Display for CertifiedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {}", self.mid, self.radius)
    }
}

/// Serializable form: exact strings plus float approximations.
#[derive(Debug, Clone, Serialize)]
pub struct CertifiedSummary {
    pub mid: String,
    pub mid_f64: f64,
    pub radius: String,
    pub radius_f64: f64,
}

/// Encloses `v^(1/q)` for an integer `v`, with `bits` fractional bits.
pub fn root_enclosure(v: &BigUint, q: u32, bits: u32) -> (BigRational, BigRational) {
    assert!(q >= 1);
    let scale = BigUint::one() << (bits as usize * q as usize);
    let scaled = v * scale;
    let r = scaled.nth_root(q);
    let den = pow2(bits);
    let lo = BigRational::new(BigInt::from(r.clone()), den.clone());
    let hi = if num_traits::pow(r.clone(), q as usize) == scaled {
        lo.clone()
    } else {
        BigRational::new(BigInt::from(r + 1u32), den)
    };
    (lo, hi)
}

/// Encloses `x^alpha` for a positive rational `x` and rational `alpha >= 0`.
pub fn pow_enclosure(x: &BigRational, alpha: &BigRational, bits: u32) -> CertifiedValue {
    assert!(x.is_positive(), "base of power must be positive");
    assert!(!alpha.is_negative(), "exponent must be non-negative");
    let p = alpha.numer().to_u32().expect("small exponent numerator");
    let q = alpha.denom().to_u32().expect("small exponent denominator");
    let num = x.numer().to_biguint().expect("positive");
    let den = x.denom().to_biguint().expect("positive");
    let num_p = num_traits::pow(num, p as usize);
    let den_p = num_traits::pow(den, p as usize);
    let (nlo, nhi) = root_enclosure(&num_p, q, bits);
    let (dlo, dhi) = root_enclosure(&den_p, q, bits);
    if nlo == nhi && dlo == dhi {
        return CertifiedValue::exact(nlo / dlo);
    }
    CertifiedValue::from_bounds(nlo / dhi, nhi / dlo)
}

/// Exact integer `b^alpha` when it exists.
pub fn integral_power(b: u32, alpha: &BigRational) -> Option<u128> {
    if alpha.is_negative() {
        return None;
    }
    let p = alpha.numer().to_u32()?;
    let q = alpha.denom().to_u32()?;
    let bp = num_traits::pow(BigUint::from(b), p as usize);
    let r = bp.nth_root(q);
    if num_traits::pow(r.clone(), q as usize) == bp {
        r.to_u128()
    } else {
        None
    }
}

/// Smallest `n >= 1` with `num / (den * g^n) <= eps`, for `g >= 2`.
pub(crate) fn levels_for(num: &BigRational, g: u128, eps: &BigRational) -> u32 {
    assert!(g >= 2 && eps.is_positive());
    let g = BigRational::from_integer(BigInt::from(g));
    let mut n = 1;
    let mut v = num / &g;
    while &v > eps {
        v /= &g;
        n += 1;
    }
    n
}
