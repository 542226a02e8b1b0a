//! The remainder series of a general quasi-linear sequence.
//!
//! `c(j, x) = s(⌊b^j x⌋) - B s(⌊b^(j-1) x⌋)` with `B = b^α`,
//! `g_n(x) = Σ_{j=1}^n c(j, x) B^-j` and `a_s(x) = lim g_n(x)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::certified::{levels_for, pow_enclosure, CertifiedValue, DEFAULT_BITS};
use super::profile::{derive_tail_law, tail_sum, QLProfile};
use crate::badic::BAdicPoint;
use crate::covers::d4;
use crate::error::{Error, Result};
use crate::seq::SequenceEngine;

fn check_base(engine: &SequenceEngine, profile: &QLProfile, x: &BAdicPoint) -> Result<()> {
    if engine.base() != profile.base {
        return Err(Error::BaseMismatch {
            expected: engine.base(),
            got: profile.base,
        });
    }
    if x.base() != engine.base() {
        return Err(Error::BaseMismatch {
            expected: engine.base(),
            got: x.base(),
        });
    }
    Ok(())
}

fn index(v: num_bigint::BigUint) -> Result<u128> {
    v.to_u128().ok_or_else(|| Error::IndexTooLarge(v.to_string()))
}

fn big_pow(b: i128, n: u32) -> BigInt {
    num_traits::pow(BigInt::from(b), n as usize)
}

/// `c(j, x)` for `j >= 1`.
pub fn c_term(engine: &SequenceEngine, big_b: i128, x: &BAdicPoint, j: u32) -> Result<BigInt> {
    let hi = engine.eval(index(x.floor_scale(j))?)?;
    let lo = engine.eval(index(x.floor_scale(j - 1))?)?;
    Ok(BigInt::from(hi) - BigInt::from(big_b) * BigInt::from(lo))
}

/// `g_n(x)`, exact. Needs `b^α` to be an integer.
pub fn g_n(engine: &SequenceEngine, profile: &QLProfile, x: &BAdicPoint, n: u32) -> Result<BigRational> {
    check_base(engine, profile, x)?;
    let big_b = profile.b_alpha_or_err()?;
    let mut acc = BigInt::zero();
    for j in 1..=n {
        acc += c_term(engine, big_b, x, j)? * big_pow(big_b, n - j);
    }
    Ok(BigRational::new(acc, big_pow(big_b, n)))
}

/// Exact `a_s(x)` at a b-adic `x >= 0`, available when the recurrence has a
/// closed-form tail (see [`derive_tail_law`]).
pub fn a_s_exact(engine: &SequenceEngine, profile: &QLProfile, x: &BAdicPoint) -> Result<BigRational> {
    check_base(engine, profile, x)?;
    let big_b = profile.b_alpha_or_err()?;
    let law = derive_tail_law(engine, big_b)
        .ok_or_else(|| Error::ExactPathUnavailable(format!("`{}` has no closed-form tail", engine.name())))?;
    let s0 = BigRational::from_integer(BigInt::from(engine.eval(0)?));
    if x.is_zero() {
        return Ok(-s0);
    }
    let k = index(x.numerator().clone())?;
    let whole = BigRational::from_integer(BigInt::from(engine.eval(index(x.integer_part())?)?));
    let head = BigRational::from_integer(BigInt::from(engine.eval(k)?)) + tail_sum(engine, &law, big_b, k)?;
    Ok(head / BigRational::from_integer(big_pow(big_b, x.depth())) - whole)
}

/// Upper bound on `x^β` used to scale the tail bound beyond `[0, 1]`.
fn beta_factor(profile: &QLProfile, x: &BAdicPoint) -> BigRational {
    let whole = x.integer_part();
    if whole.is_zero() || profile.beta.is_zero() {
        return BigRational::one();
    }
    let ceil = BigRational::from_integer(BigInt::from(whole + 1u32));
    pow_enclosure(&ceil, &profile.beta, DEFAULT_BITS).hi()
}

/// `a_s(x)` enclosed by `g_n(x) ± D_4 C b^(-n(α-β))` with the smallest `n`
/// whose bound is at most `eps`. Returns the enclosure and `n`.
pub fn a_s_certified(
    engine: &SequenceEngine,
    profile: &QLProfile,
    x: &BAdicPoint,
    eps: &BigRational,
) -> Result<(CertifiedValue, u32)> {
    check_base(engine, profile, x)?;
    if !eps.is_positive() {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let gamma = profile.gamma().ok_or_else(|| {
        Error::ExactPathUnavailable(format!(
            "{}^({}-{}) is not an integer",
            profile.base, profile.alpha, profile.beta
        ))
    })?;
    let bound = BigRational::from_integer(BigInt::from(d4(profile)?)) * &profile.c * beta_factor(profile, x);
    let n = levels_for(&bound, gamma, eps);
    let radius = bound / BigRational::from_integer(num_traits::pow(BigInt::from(gamma), n as usize));
    Ok((CertifiedValue::new(g_n(engine, profile, x, n)?, radius), n))
}

/// `λ_s(x) = (a_s(x) + s(⌊x⌋)) / x^α` for `x > 0`, radius at most `eps`.
/// Uses the exact remainder when a closed-form tail exists.
pub fn lambda_s_certified(
    engine: &SequenceEngine,
    profile: &QLProfile,
    x: &BAdicPoint,
    eps: &BigRational,
) -> Result<CertifiedValue> {
    check_base(engine, profile, x)?;
    if x.is_zero() {
        return Err(Error::Domain("x = 0".into()));
    }
    if !eps.is_positive() {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let xr = x.to_rational();
    let whole = BigRational::from_integer(BigInt::from(engine.eval(index(x.integer_part())?)?));
    let mut bits = DEFAULT_BITS;
    loop {
        let power = pow_enclosure(&xr, &profile.alpha, bits);
        let rem = match a_s_exact(engine, profile, x) {
            Ok(v) => CertifiedValue::exact(v),
            Err(Error::ExactPathUnavailable(_)) => {
                let budget = eps * power.lo() / BigRational::from_integer(BigInt::from(2));
                a_s_certified(engine, profile, x, &budget)?.0
            }
            Err(e) => return Err(e),
        };
        let v = rem.add_exact(&whole).div_positive(&power).round_outward(bits);
        if v.radius() <= eps || bits > 4096 {
            return Ok(v);
        }
        bits *= 2;
    }
}
