use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::certified::integral_power;
use crate::error::{Error, Result};
use crate::seq::SequenceEngine;

/// Quasi-linearity data `(b, α, β, C)`: `|s(bn+i) - b^α s(n)| <= C n^β`
/// checked for `1 <= n <= verified_up_to`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QLProfile {
    pub base: u32,
    pub alpha: BigRational,
    pub beta: BigRational,
    pub c: BigRational,
    pub verified_up_to: u64,
}

impl QLProfile {
    pub fn new(base: u32, alpha: BigRational, beta: BigRational, c: BigRational) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidArgument(format!("base must be >= 2, got {base}")));
        }
        if beta.is_negative() || alpha <= beta {
            return Err(Error::DegenerateProfile {
                alpha: alpha.to_string(),
                beta: beta.to_string(),
            });
        }
        if !c.is_positive() {
            return Err(Error::InvalidArgument(format!("C must be positive, got {c}")));
        }
        Ok(QLProfile {
            base,
            alpha,
            beta,
            c,
            verified_up_to: 0,
        })
    }

    pub fn with_verified_range(mut self, n: u64) -> Self {
        self.verified_up_to = n;
        self
    }

    /// `B = b^α` when it is an integer.
    pub fn b_alpha(&self) -> Option<u128> {
        integral_power(self.base, &self.alpha)
    }

    /// `b^β` when it is an integer.
    pub fn b_beta(&self) -> Option<u128> {
        integral_power(self.base, &self.beta)
    }

    /// `b^(α-β)`, the per-level contraction of the tail bound, when integral.
    pub fn gamma(&self) -> Option<u128> {
        integral_power(self.base, &(&self.alpha - &self.beta))
    }

    pub fn b_alpha_or_err(&self) -> Result<i128> {
        self.b_alpha()
            .and_then(|v| i128::try_from(v).ok())
            .ok_or_else(|| Error::ExactPathUnavailable(format!("{}^{} is not an integer", self.base, self.alpha)))
    }

    pub fn summary(&self) -> ProfileSummary {
        ProfileSummary {
            base: self.base,
            alpha: self.alpha.to_string(),
            beta: self.beta.to_string(),
            c: self.c.to_string(),
            verified_up_to: self.verified_up_to,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileSummary {
    pub base: u32,
    pub alpha: String,
    pub beta: String,
    pub c: String,
    pub verified_up_to: u64,
}

/// Closed form of the remainder tail at b-adic points.
///
/// With `e(m) = s(bm) - B s(m)`, the law says `e(b^j m) = constant` for all
/// `m >= 1` and `j >= prefix`. Then for `x = k / b^N`, `k >= 1`,
/// `a_s(x) = (s(k) + Σ_{j<prefix} e(k b^j) / B^(j+1) + constant / (B^prefix (B-1))) / B^N - s(⌊x⌋)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TailLaw {
    pub prefix: u32,
    pub constant: i128,
}

/// Derives a [`TailLaw`] from the residue-0 rules of the system, if one exists.
///
/// When every residue-0 rule has shift 0, the vector `V(m)` of all sequences
/// satisfies `V(bm) = M V(m) + c`. Then `e(b^j m)` is affine in `V(m)` with
/// row `w M^j`; once that row vanishes the tail is a constant.
pub fn derive_tail_law(engine: &SequenceEngine, big_b: i128) -> Option<TailLaw> {
    let spec = engine.spec();
    if !spec.rules_hold_above_start() || spec.nmin != 1 {
        return None;
    }
    let k = spec.seqs.len();
    let mut m = vec![vec![0i128; k]; k];
    let mut c0 = vec![0i128; k];
    for (a, def) in spec.seqs.iter().enumerate() {
        let rule = &def.rules[0];
        if rule.terms.iter().any(|t| t.shift != 0) {
            return None;
        }
        for t in &rule.terms {
            m[a][t.seq] = m[a][t.seq].checked_add(t.coef)?;
        }
        c0[a] = rule.constant;
    }
    let p = spec.primary;
    let mut row = m[p].clone();
    row[p] = row[p].checked_sub(big_b)?;
    let mut constant = c0[p];
    // A nonzero row that survives k multiplications never vanishes.
    for prefix in 0..=(k as u32) {
        if row.iter().all(|v| v.is_zero()) {
            return Some(TailLaw { prefix, constant });
        }
        let dot: i128 = row
            .iter()
            .zip(&c0)
            .try_fold(0i128, |acc, (r, c)| acc.checked_add(r.checked_mul(*c)?))?;
        constant = constant.checked_add(dot)?;
        let mut next = vec![0i128; k];
        for (a, r) in row.iter().enumerate() {
            if *r == 0 {
                continue;
            }
            for (col, v) in m[a].iter().enumerate() {
                next[col] = next[col].checked_add(r.checked_mul(*v)?)?;
            }
        }
        row = next;
    }
    None
}

/// Exact `Σ_{j<prefix} e(k b^j) / B^(j+1) + constant / (B^prefix (B-1))` for `k >= 1`.
pub fn tail_sum(engine: &SequenceEngine, law: &TailLaw, big_b: i128, k: u128) -> Result<BigRational> {
    let b = engine.base() as u128;
    let bb = BigInt::from(big_b);
    let mut acc = BigRational::zero();
    let mut idx = k;
    let mut den = bb.clone();
    for _ in 0..law.prefix {
        let next = idx
            .checked_mul(b)
            .ok_or_else(|| Error::IndexTooLarge(format!("{idx}*{b}")))?;
        let e = BigInt::from(engine.eval(next)?) - &bb * BigInt::from(engine.eval(idx)?);
        acc += BigRational::new(e, den.clone());
        den *= &bb;
        idx = next;
    }
    let last = BigRational::new(BigInt::from(law.constant), (&den / &bb) * (&bb - 1));
    Ok(acc + last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limitfn::certified::rat;
    use crate::seq::builtin;

    #[test]
    fn tail_laws_of_builtins() {
        let rho = builtin("rho").unwrap();
        assert_eq!(derive_tail_law(&rho, 2), Some(TailLaw { prefix: 0, constant: 1 }));
        let tm = builtin("tm_sum").unwrap();
        assert_eq!(derive_tail_law(&tm, 2), Some(TailLaw { prefix: 1, constant: 0 }));
        let rs = builtin("rs_sum").unwrap();
        assert_eq!(derive_tail_law(&rs, 2), Some(TailLaw { prefix: 0, constant: 0 }));
        let tm2 = builtin("tm_double_sum").unwrap();
        assert_eq!(derive_tail_law(&tm2, 4), None);
    }

    #[test]
    fn tail_law_matches_long_prefix_of_the_series() {
        // Σ_j e(k b^j)/B^(j+1) truncated far out must approach the closed form.
        for (name, big_b) in [("rho", 2i128), ("tm_sum", 2), ("rs_sum", 2)] {
            let e = builtin(name).unwrap();
            let law = derive_tail_law(&e, big_b).unwrap();
            let b = e.base() as u128;
            for k in 1..200u128 {
                let closed = tail_sum(&e, &law, big_b, k).unwrap();
                let mut acc = BigRational::zero();
                let mut idx = k;
                let mut den = BigInt::from(big_b);
                for _ in 0..40 {
                    let ev = e.eval(idx * b).unwrap() - big_b * e.eval(idx).unwrap();
                    acc += BigRational::new(BigInt::from(ev), den.clone());
                    den *= big_b;
                    idx *= b;
                    if idx > 1 << 100 {
                        break;
                    }
                }
                let diff = (closed - acc).abs();
                assert!(diff <= rat(1, 1 << 30), "{name} k={k}");
            }
        }
    }

    #[test]
    fn profile_validation() {
        assert!(matches!(
            QLProfile::new(2, rat(1, 2), rat(1, 2), rat(1, 1)),
            Err(Error::DegenerateProfile { .. })
        ));
        let p = QLProfile::new(4, rat(1, 2), rat(0, 1), rat(2, 1)).unwrap();
        assert_eq!(p.b_alpha(), Some(2));
        assert_eq!(p.gamma(), Some(2));
        assert_eq!(p.b_beta(), Some(1));
    }
}
