//! The series for the remainder `a(x) = √x λ(x) - ρ(⌊x⌋)` of the abelian
//! complexity ρ of the Rudin–Shapiro word (base 4, `b^α = 2`).
//!
//! `a(x) = Σ_{j>=1} d(x_j) a_j(x) 2^-j` with `d(y) = |y - 1|` and
//! `a_j(x) = -1` if `4^j x < 1`, otherwise `Δρ(⌊4^j x⌋ - 1)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::certified::{pow2, pow_enclosure, rat, CertifiedValue, DEFAULT_BITS};
use super::ql;
use super::QLProfile;
use crate::badic::BAdicPoint;
use crate::error::{Error, Result};
use crate::seq::SequenceEngine;

fn check_base4(x: &BAdicPoint) -> Result<()> {
    if x.base() != 4 {
        return Err(Error::BaseMismatch {
            expected: 4,
            got: x.base(),
        });
    }
    Ok(())
}

/// The profile of ρ: `b = 4`, `α = 1/2`, `β = 0`, `C = 2`.
pub fn rho_profile() -> QLProfile {
    QLProfile::new(4, rat(1, 2), rat(0, 1), rat(2, 1)).expect("valid profile")
}

/// `d(y) = |y - 1|`.
pub fn digit_weight(y: u32) -> i128 {
    (y as i128 - 1).abs()
}

/// `a_j(x)`, always `±1`.
pub fn a_coeff(rho: &SequenceEngine, x: &BAdicPoint, j: u32) -> Result<i128> {
    check_base4(x)?;
    let m = x.floor_scale(j);
    if m.is_zero() {
        return Ok(-1);
    }
    let m = m.to_u128().ok_or_else(|| Error::IndexTooLarge(m.to_string()))?;
    rho.delta(m - 1)
}

/// `f_n(x) · 2^n` as an integer.
pub fn f_n_numerator(rho: &SequenceEngine, x: &BAdicPoint, n: u32) -> Result<BigInt> {
    check_base4(x)?;
    let mut acc = BigInt::zero();
    for j in 1..=n {
        let d = digit_weight(x.digit(j));
        if d == 0 {
            continue;
        }
        let a = a_coeff(rho, x, j)?;
        acc += BigInt::from(d * a) << (n - j) as usize;
    }
    Ok(acc)
}

/// `f_n(x) = Σ_{j=1}^n d(x_j) a_j(x) 2^-j`, exact.
pub fn f_n(rho: &SequenceEngine, x: &BAdicPoint, n: u32) -> Result<BigRational> {
    Ok(BigRational::new(f_n_numerator(rho, x, n)?, pow2(n)))
}

fn check_unit(x: &BAdicPoint) -> Result<()> {
    if x.integer_part() > One::one() || (x.integer_part().is_one() && !x.digits().is_empty()) {
        return Err(Error::OutOfRange(format!("a_exact needs 0 <= x <= 1, got {x}")));
    }
    Ok(())
}

/// Exact `a(x)` for `x = z / 4^k` in `[0, 1]`: `f_k(x) + 2^-k` for `z >= 1`
/// and `f_k(x) - 2^-k` at zero. The tail uses `Δρ(4n - 1) = 1`, which
/// [`tail_identity_gate`] checks.
pub fn a_exact(rho: &SequenceEngine, x: &BAdicPoint) -> Result<BigRational> {
    check_base4(x)?;
    check_unit(x)?;
    let k = x.depth();
    let tail = if x.is_zero() { -1 } else { 1 };
    Ok(BigRational::new(f_n_numerator(rho, x, k)? + tail, pow2(k)))
}

/// Checks `Δρ(4n - 1) = 1` for `1 <= n <= n_max`.
pub fn tail_identity_gate(rho: &SequenceEngine, n_max: u64) -> Result<()> {
    let t = rho.table(4 * n_max as usize + 1)?;
    for n in 1..=n_max as usize {
        if t.value(4 * n) - t.value(4 * n - 1) != 1 {
            return Err(Error::TailIdentity(n as u128));
        }
    }
    Ok(())
}

/// Smallest `n >= 1` with `2^(-n+1) <= eps`.
fn truncation_level(eps: &BigRational) -> u32 {
    let mut n = 1;
    while rat(2, 1) / BigRational::from_integer(pow2(n)) > *eps {
        n += 1;
    }
    n
}

/// `a(x)` enclosed by `f_n(x) ± 2^(-n+1)` with the smallest admissible `n`.
pub fn a_certified(rho: &SequenceEngine, x: &BAdicPoint, eps: &BigRational) -> Result<(CertifiedValue, u32)> {
    check_base4(x)?;
    check_unit(x)?;
    if *eps <= BigRational::zero() {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let n = truncation_level(eps);
    let radius = BigRational::new(BigInt::from(2), pow2(n));
    Ok((CertifiedValue::new(f_n(rho, x, n)?, radius), n))
}

/// `λ(x) = (a(x) + ρ(⌊x⌋)) / √x` for `x > 0`, radius at most `eps`.
///
/// On `(0, 1]` the remainder comes from [`a_exact`]; beyond 1 it comes from
/// the generic tail law of the recurrence.
pub fn lambda_rho(rho: &SequenceEngine, x: &BAdicPoint, eps: &BigRational) -> Result<CertifiedValue> {
    check_base4(x)?;
    if x.is_zero() {
        return Err(Error::Domain("x = 0".into()));
    }
    let a = if check_unit(x).is_ok() {
        a_exact(rho, x)?
    } else {
        ql::a_s_exact(rho, &rho_profile(), x)?
    };
    let floor = x
        .integer_part()
        .to_u128()
        .ok_or_else(|| Error::IndexTooLarge(x.integer_part().to_string()))?;
    let num = CertifiedValue::exact(a + BigRational::from_integer(BigInt::from(rho.eval(floor)?)));
    let half = rat(1, 2);
    let mut bits = DEFAULT_BITS;
    loop {
        let root = pow_enclosure(&x.to_rational(), &half, bits);
        let v = num.div_positive(&root).round_outward(bits);
        if v.radius() <= eps || bits > 4096 {
            return Ok(v);
        }
        bits *= 2;
    }
}
