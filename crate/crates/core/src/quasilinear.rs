//! Quasi-linearity data `(α, β, C)`: estimators that suggest exponents,
//! an exact verifier for a declared profile, syndeticity checks and the
//! separation condition on `a_s` along a sequence `t_n`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::limitfn::certified::{integral_power, rat};
use crate::limitfn::{a_s_certified, ipow, QLProfile, StepModel};
use crate::seq::SequenceEngine;
use crate::BAdicPoint;

/// Largest `N` accepted by the estimators and the verifier.
pub const MAX_RANGE: u64 = 1 << 31;

/// A suggested exponent. `value` is the nearest rational with denominator
/// at most 4; `snapped` says whether it lies within 0.05 of `envelope_slope`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub value: String,
    pub snapped: bool,
    /// Slope of the log of the window maxima against the log of the window position.
    pub envelope_slope: f64,
    /// Pointwise least-squares slope of `log|s(n)|` on `[N/2, N]`.
    pub raw_slope: f64,
    pub windows: usize,
    pub nonzero: usize,
}

impl Estimate {
    pub fn rational(&self) -> BigRational {
        self.value.parse().expect("estimate holds a rational")
    }
}

fn snap(x: f64) -> (BigRational, bool) {
    let mut best = (rat(x.round() as i128, 1), (x - x.round()).abs());
    for q in 2..=4i128 {
        let p = (x * q as f64).round();
        let d = (x - p / q as f64).abs();
        if d < best.1 - 1e-12 {
            best = (rat(p as i128, q), d);
        }
    }
    (best.0, best.1 <= 0.05)
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

fn check_range(n: u64) -> Result<()> {
    if n > MAX_RANGE {
        return Err(Error::Overflow(format!("N = {n} exceeds 2^31")));
    }
    Ok(())
}

/// `vals[n]` for `n <= N` drive the estimate of the growth exponent of `|vals|`.
fn estimate_from(vals: &[i128], base: u32, n_max: u64) -> Result<Estimate> {
    if n_max < 1 << 10 {
        return Err(Error::InvalidArgument(format!("N must be at least 2^10, got {n_max}")));
    }
    let n_max = n_max as usize;
    let raw_pts: Vec<(f64, f64)> = (n_max / 2..=n_max)
        .filter(|&n| vals[n] != 0)
        .map(|n| ((n as f64).ln(), (vals[n].unsigned_abs() as f64).ln()))
        .collect();
    if raw_pts.is_empty() {
        return Err(Error::AllZero);
    }
    // Maxima over [N/(2b^t), N/b^t]: oscillating sequences hit their
    // envelope at every scale even where they are small pointwise.
    let mut env = Vec::new();
    let mut hi = n_max;
    while hi / 2 >= 64 {
        let m = vals[hi / 2..=hi].iter().map(|v| v.unsigned_abs()).max().unwrap_or(0);
        if m > 0 {
            env.push(((hi as f64).ln(), (m as f64).ln()));
        }
        hi /= base as usize;
    }
    let envelope_slope = if env.len() >= 2 { slope(&env) } else { slope(&raw_pts) };
    let (value, snapped) = snap(envelope_slope);
    Ok(Estimate {
        value: value.to_string(),
        snapped,
        envelope_slope,
        raw_slope: slope(&raw_pts),
        windows: env.len(),
        nonzero: raw_pts.len(),
    })
}

/// Suggests `α` from the growth of `|s(n)|`.
pub fn estimate_alpha(engine: &SequenceEngine, n: u64) -> Result<Estimate> {
    check_range(n)?;
    let t = engine.table(n as usize + 1)?;
    estimate_from(&t.primary_values(), engine.base(), n)
}

/// Suggests `β` from the growth of `|s(n+1) - s(n)|`.
pub fn estimate_beta(engine: &SequenceEngine, n: u64) -> Result<Estimate> {
    check_range(n)?;
    let v = engine.table(n as usize + 2)?.primary_values();
    let d: Vec<i128> = v.windows(2).map(|w| w[1] - w[0]).collect();
    estimate_from(&d, engine.base(), n)
}

/// Result of checking `|s(bn+i) - b^α s(n)| <= C n^β` on `1 <= n <= N`.
#[derive(Debug, Clone, Serialize)]
pub struct QuasilinearReport {
    pub base: u32,
    pub alpha: String,
    pub beta: String,
    pub n_max: u64,
    /// The smallest admissible `C` on the range.
    pub c_min: String,
    pub c_min_f64: f64,
    /// Where `c_min` is attained.
    pub argmax: (u64, u32),
    /// The same quantity at `n = 0`, `max_i |s(i) - b^α s(0)|`.
    pub c0: String,
    /// `c_min` over `[1, N/2]`, for spotting an `α` set too low.
    pub c_half: String,
    pub growth_ratio: f64,
    pub diverging: bool,
}

/// Exact minimal `C` for a declared `(b, α, β)`. Needs `b^α` to be an
/// integer and `β` a non-negative integer.
pub fn verify_quasilinear(
    engine: &SequenceEngine,
    alpha: &BigRational,
    beta: &BigRational,
    n_max: u64,
) -> Result<(QuasilinearReport, QLProfile)> {
    check_range(n_max)?;
    if n_max < 2 {
        return Err(Error::InvalidArgument("N must be at least 2".into()));
    }
    let b = engine.base();
    if beta.is_negative() || alpha <= beta {
        return Err(Error::DegenerateProfile {
            alpha: alpha.to_string(),
            beta: beta.to_string(),
        });
    }
    let big_b = integral_power(b, alpha)
        .and_then(|v| i128::try_from(v).ok())
        .ok_or_else(|| Error::ExactPathUnavailable(format!("{b}^{alpha} is not an integer")))?;
    if !beta.is_integer() {
        return Err(Error::ExactPathUnavailable(format!(
            "n^{beta} is irrational for most n"
        )));
    }
    let beta_i = beta
        .to_integer()
        .to_u32()
        .ok_or_else(|| Error::Overflow("beta".into()))?;
    let len = (b as usize)
        .checked_mul(n_max as usize + 1)
        .ok_or_else(|| Error::Overflow("table length".into()))?;
    let limit = crate::covers::max_cells() * 4;
    if len as u128 > limit {
        return Err(Error::ResourceGuard {
            requested: len as u128,
            limit,
        });
    }
    let s = engine.table(len)?.primary_values();
    let bu = b as usize;
    // Each n contributes max_i |d| / n^β; compare fractions exactly.
    let chunk = |lo: u64, hi: u64| -> Result<(BigRational, (u64, u32))> {
        (lo..=hi)
            .into_par_iter()
            .map(|n| -> Result<(BigRational, (u64, u32))> {
                let nu = n as usize;
                let base_val = big_b
                    .checked_mul(s[nu])
                    .ok_or_else(|| Error::Overflow("b^α s(n)".into()))?;
                let (i, d) = (0..bu)
                    .map(|i| (i, (s[bu * nu + i] - base_val).unsigned_abs()))
                    .max_by_key(|&(i, d)| (d, std::cmp::Reverse(i)))
                    .expect("base >= 2");
                let den = num_traits::pow(BigInt::from(n), beta_i as usize);
                Ok((BigRational::new(BigInt::from(d), den), (n, i as u32)))
            })
            .try_reduce(
                || (BigRational::zero(), (0, 0)),
                |a, b| {
                    Ok(if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1 && !b.0.is_zero()) {
                        b
                    } else {
                        a
                    })
                },
            )
    };
    let half = n_max / 2;
    let (c_half, _) = chunk(1, half)?;
    let (c_rest, arg_rest) = chunk(half + 1, n_max)?;
    let (c_min, argmax) = if c_rest > c_half {
        (c_rest, arg_rest)
    } else {
        let (_, arg) = chunk(1, half)?;
        (c_half.clone(), arg)
    };
    let c0 = (0..bu).map(|i| (s[i] - big_b * s[0]).unsigned_abs()).max().unwrap_or(0);
    let c0 = BigRational::from_integer(BigInt::from(c0));
    let growth_ratio = if c_half.is_zero() {
        if c_min.is_zero() {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        (&c_min / &c_half).to_f64().unwrap_or(f64::INFINITY)
    };
    let diverging = growth_ratio > (b as f64).powf(0.1);
    let c = c_min.clone().max(c0.clone());
    let c = if c.is_zero() { BigRational::one() } else { c };
    let profile = QLProfile::new(b, alpha.clone(), beta.clone(), c)?.with_verified_range(n_max);
    Ok((
        QuasilinearReport {
            base: b,
            alpha: alpha.to_string(),
            beta: beta.to_string(),
            n_max,
            c_min: c_min.to_string(),
            c_min_f64: c_min.to_f64().unwrap_or(f64::NAN),
            argmax,
            c0: c0.to_string(),
            c_half: c_half.to_string(),
            growth_ratio,
            diverging,
        },
        profile,
    ))
}

/// An integer sequence `t_1, t_2, ...`: a polynomial in `n` or an explicit list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TSeq {
    /// Coefficients, constant term first.
    Poly(Vec<i128>),
    List(Vec<i128>),
}

impl TSeq {
    pub fn affine(a: i128, b: i128) -> Self {
        TSeq::Poly(vec![b, a])
    }

    /// `t_n` for `n >= 1`; `None` past the end of a list.
    pub fn get(&self, n: u64) -> Option<i128> {
        match self {
            TSeq::Poly(c) => {
                let mut acc: i128 = 0;
                for &a in c.iter().rev() {
                    acc = acc.checked_mul(n as i128)?.checked_add(a)?;
                }
                Some(acc)
            }
            TSeq::List(v) => v.get((n as usize).checked_sub(1)?).copied(),
        }
    }

    /// Parses a comma-separated list of integers.
    pub fn from_list(s: &str) -> Result<Self> {
        let v = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<i128>()
                    .map_err(|_| Error::InvalidArgument(format!("bad list entry `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if v.is_empty() {
            return Err(Error::InvalidArgument("empty t-sequence".into()));
        }
        Ok(TSeq::List(v))
    }
}

impl FromStr for TSeq {
    type Err = Error;

    /// Polynomials such as `2n`, `2*n+1`, `n^2`, `3*n^2 - n + 4`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("cannot parse t-sequence `{s}`; expected e.g. `a*n+b`"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad());
        }
        let mut coeffs: Vec<i128> = Vec::new();
        let mut rest = compact.as_str();
        while !rest.is_empty() {
            let (sign, body) = match rest.as_bytes()[0] {
                b'+' => (1, &rest[1..]),
                b'-' => (-1, &rest[1..]),
                _ => (1, rest),
            };
            let end = body.find(['+', '-']).unwrap_or(body.len());
            let term = &body[..end];
            rest = &body[end..];
            let (coef, power) = match term.find('n') {
                None => (term.parse::<i128>().map_err(|_| bad())?, 0usize),
                Some(pos) => {
                    let c = term[..pos].trim_end_matches('*');
                    let c = if c.is_empty() {
                        1
                    } else {
                        c.parse::<i128>().map_err(|_| bad())?
                    };
                    let p = match &term[pos + 1..] {
                        "" => 1,
                        e => e
                            .strip_prefix('^')
                            .ok_or_else(bad)?
                            .parse::<usize>()
                            .map_err(|_| bad())?,
                    };
                    (c, p)
                }
            };
            if power > 8 {
                return Err(bad());
            }
            if coeffs.len() <= power {
                coeffs.resize(power + 1, 0);
            }
            coeffs[power] += sign * coef;
        }
        Ok(TSeq::Poly(coeffs))
    }
}

impl fmt::Display for TSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TSeq::Poly(c) => {
                let mut first = true;
                for (p, &a) in c.iter().enumerate().rev() {
                    if a == 0 {
                        continue;
                    }
                    let sign = if a < 0 {
                        "-"
                    } else if first {
                        ""
                    } else {
                        "+"
                    };
                    let mag = a.unsigned_abs();
                    let body = match (p, mag) {
                        (0, m) => m.to_string(),
                        (1, 1) => "n".into(),
                        (1, m) => format!("{m}*n"),
                        (_, 1) => format!("n^{p}"),
                        (_, m) => format!("{m}*n^{p}"),
                    };
                    write!(f, "{sign}{body}")?;
                    first = false;
                }
                if first {
                    write!(f, "0")?;
                }
                Ok(())
            }
            TSeq::List(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "[{}]", parts.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SyndeticReport {
    pub max_gap: i128,
    pub checked_up_to: u64,
}

/// Largest gap `t_{n+1} - t_n` for `1 <= n < N`. Gaps that increase at every
/// step across the last quarter of the range are taken as a sign of
/// unboundedness; that test is a heuristic.
pub fn check_syndetic(t: &TSeq, n_max: u64) -> Result<SyndeticReport> {
    let mut gaps = Vec::new();
    let mut prev = t
        .get(1)
        .ok_or_else(|| Error::InvalidArgument("empty t-sequence".into()))?;
    let mut last = 1;
    for n in 2..=n_max {
        let Some(next) = t.get(n) else { break };
        if next <= prev {
            return Err(Error::NotIncreasing { n: n - 1, prev, next });
        }
        gaps.push(next - prev);
        prev = next;
        last = n;
    }
    let max_gap = gaps.iter().copied().max().unwrap_or(0);
    let tail = &gaps[gaps.len() - gaps.len() / 4..];
    if tail.len() >= 4 && tail.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::NotSyndetic(format!(
            "gaps grow strictly over n in [{}, {last}] (heuristic)",
            last + 1 - tail.len() as u64
        )));
    }
    Ok(SyndeticReport {
        max_gap,
        checked_up_to: last,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    HoldsCertified,
    FailsCertified,
    Inconclusive,
}

/// `a_s(t_{n+1} b^-k) - a_s(t_n b^-k)` as an enclosure `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Gap {
    pub k: u32,
    pub n: u64,
    pub lo: String,
    pub hi: String,
    #[serde(skip)]
    pub lo_q: BigRational,
    #[serde(skip)]
    pub hi_q: BigRational,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub instance: String,
    pub t: String,
    pub k_max: u32,
    pub c_requested: Option<String>,
    /// `min` over tested gaps of the certified lower gap times `b^(αk)`.
    pub best_c: Option<String>,
    pub best_c_f64: Option<f64>,
    pub counterexample: Option<Gap>,
    pub verdict: Verdict,
    pub gaps_tested: u64,
    pub exact: bool,
    pub scope: &'static str,
}

/// Gaps at level `k` for every `t_n < t_{n+1} <= b^k - 1` with `t_n >= 1`.
pub fn condition_gaps(model: &StepModel, t: &TSeq, k: u32) -> Result<Vec<Gap>> {
    let top = ipow(model.base() as i128, k)? - 1;
    let mut pairs = Vec::new();
    let mut n = 1u64;
    while let (Some(a), Some(b)) = (t.get(n), t.get(n + 1)) {
        if b > top {
            break;
        }
        if a >= 1 {
            pairs.push((n, a as u128, b as u128));
        }
        n += 1;
    }
    let exact = model.has_exact_values();
    pairs
        .par_iter()
        .map(|&(n, a, b)| -> Result<Gap> {
            let (lo_q, hi_q) = if exact {
                let g = model.value_at_index(k, b)?.to_big() - model.value_at_index(k, a)?.to_big();
                (g.clone(), g)
            } else {
                let profile = model
                    .profile()
                    .ok_or_else(|| Error::ExactPathUnavailable("no profile for certified values".into()))?;
                let scale = BigRational::from_integer(BigInt::from(ipow(model.big_b(), k)?));
                let eps = BigRational::new(BigInt::one(), BigInt::one() << 24) / scale;
                let va = a_s_certified(model.engine(), profile, &BAdicPoint::new(model.base(), a, k)?, &eps)?.0;
                let vb = a_s_certified(model.engine(), profile, &BAdicPoint::new(model.base(), b, k)?, &eps)?.0;
                let g = vb.sub(&va);
                (g.lo(), g.hi())
            };
            Ok(Gap {
                k,
                n,
                lo: lo_q.to_string(),
                hi: hi_q.to_string(),
                lo_q,
                hi_q,
            })
        })
        .collect()
}

/// Tests the separation condition for `1 <= k <= K`. Only the tested range
/// is certified; nothing is claimed for larger `k`.
pub fn check_condition(
    engine: Arc<SequenceEngine>,
    profile: &QLProfile,
    t: &TSeq,
    k_max: u32,
    c_requested: Option<&BigRational>,
) -> Result<ConditionReport> {
    let instance = engine.name().to_string();
    let model = StepModel::e_family(engine, profile, None)?;
    let top = ipow(profile.base as i128, k_max)?;
    let mut n_span = 1u64;
    while t.get(n_span + 1).is_some_and(|v| v < top) {
        n_span += 1;
    }
    if k_max > 0 {
        check_syndetic(t, n_span.max(64))?;
    }
    let mut best: Option<BigRational> = None;
    let mut undecided = false;
    let mut counterexample = None;
    let mut tested = 0u64;
    'levels: for k in 1..=k_max {
        let scale = BigRational::from_integer(BigInt::from(ipow(model.big_b(), k)?));
        for g in condition_gaps(&model, t, k)? {
            tested += 1;
            let thresh = c_requested.map_or_else(BigRational::zero, |c| c / &scale);
            if g.hi_q <= thresh {
                counterexample = Some(g);
                break 'levels;
            }
            if g.lo_q <= thresh || !g.lo_q.is_positive() {
                undecided = true;
                continue;
            }
            let c = &g.lo_q * &scale;
            if best.as_ref().is_none_or(|b| &c < b) {
                best = Some(c);
            }
        }
    }
    let verdict = if counterexample.is_some() {
        Verdict::FailsCertified
    } else if undecided {
        Verdict::Inconclusive
    } else {
        Verdict::HoldsCertified
    };
    let best = if verdict == Verdict::HoldsCertified { best } else { None };
    Ok(ConditionReport {
        instance,
        t: t.to_string(),
        k_max,
        c_requested: c_requested.map(|c| c.to_string()),
        best_c_f64: best.as_ref().and_then(|b| b.to_f64()),
        best_c: best.map(|b| b.to_string()),
        counterexample,
        verdict,
        gaps_tested: tested,
        exact: model.has_exact_values(),
        scope: "certified for the tested levels only",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;

    fn eng(name: &str) -> Arc<SequenceEngine> {
        Arc::new(builtin(name).unwrap())
    }

    #[test]
    fn alpha_beta_estimates() {
        let n = 1 << 14;
        for (name, a, b) in [
            ("tm_sum", rat(1, 1), rat(0, 1)),
            ("rs_sum", rat(1, 2), rat(0, 1)),
            ("tm_double_sum", rat(2, 1), rat(1, 1)),
        ] {
            let e = eng(name);
            let ea = estimate_alpha(&e, n).unwrap();
            let eb = estimate_beta(&e, n).unwrap();
            assert!(ea.snapped && ea.rational() == a, "{name}: alpha {ea:?}");
            assert!(eb.snapped && eb.rational() == b, "{name}: beta {eb:?}");
        }
    }

    #[test]
    fn estimator_rejects_short_and_zero_ranges() {
        let e = eng("tm_sum");
        assert!(estimate_alpha(&e, 100).is_err());
        let z = SequenceEngine::from_source(
            "base 2\nname z\ninit z(0) = 0\ninit z(1) = 0\nrule z(2n) = z(n)\nrule z(2n+1) = z(n)\n",
        )
        .unwrap();
        assert_eq!(estimate_alpha(&z, 1 << 10), Err(Error::AllZero));
        assert!(matches!(estimate_alpha(&e, MAX_RANGE + 1), Err(Error::Overflow(_))));
    }

    #[test]
    fn snapping() {
        assert_eq!(snap(0.49), (rat(1, 2), true));
        assert_eq!(snap(1.02), (rat(1, 1), true));
        assert_eq!(snap(0.7), (rat(2, 3), true));
        assert!(!snap(0.875).1);
    }

    /// Brute force over the range, sharing nothing with the verifier.
    fn brute_c(e: &SequenceEngine, big_b: i128, n_max: u64) -> i128 {
        let b = e.base() as u128;
        let mut c = 0;
        for n in 1..=n_max as u128 {
            for i in 0..b {
                c = c.max((e.eval(b * n + i).unwrap() - big_b * e.eval(n).unwrap()).abs());
            }
        }
        c
    }

    #[test]
    fn verify_matches_brute_force() {
        for (name, a, big_b) in [("tm_sum", rat(1, 1), 2), ("rs_sum", rat(1, 2), 2)] {
            let e = eng(name);
            let (r, p) = verify_quasilinear(&e, &a, &rat(0, 1), 5000).unwrap();
            assert_eq!(
                r.c_min.parse::<BigRational>().unwrap(),
                rat(brute_c(&e, big_b, 5000), 1),
                "{name}"
            );
            assert!(!r.diverging);
            assert_eq!(p.verified_up_to, 5000);
        }
    }

    #[test]
    fn tm_sum_profile_constants() {
        let (r, p) = verify_quasilinear(&eng("tm_sum"), &rat(1, 1), &rat(0, 1), 1 << 12).unwrap();
        assert_eq!(r.c0, "0");
        assert_eq!(p.c, rat(2, 1));
        let (_, p) = verify_quasilinear(&eng("rs_sum"), &rat(1, 2), &rat(0, 1), 1 << 12).unwrap();
        assert_eq!(p.c, rat(3, 1));
        let (_, p) = verify_quasilinear(&eng("tm_double_sum"), &rat(2, 1), &rat(1, 1), 1 << 12).unwrap();
        assert_eq!(p.c, rat(5, 2));
    }

    #[test]
    fn low_alpha_is_flagged() {
        // The double sum grows like n^2, so α = 1 leaves a growing remainder.
        let (r, _) = verify_quasilinear(&eng("tm_double_sum"), &rat(1, 1), &rat(0, 1), 1 << 12).unwrap();
        assert!(r.diverging, "{r:?}");
    }

    #[test]
    fn verify_rejects_inexact_inputs() {
        let e = eng("tm_sum");
        assert!(matches!(
            verify_quasilinear(&e, &rat(1, 2), &rat(0, 1), 100),
            Err(Error::ExactPathUnavailable(_))
        ));
        assert!(matches!(
            verify_quasilinear(&e, &rat(1, 1), &rat(1, 1), 100),
            Err(Error::DegenerateProfile { .. })
        ));
    }

    #[test]
    fn t_sequence_parsing() {
        let t: TSeq = "2n".parse().unwrap();
        assert_eq!((1..=4).map(|n| t.get(n).unwrap()).collect::<Vec<_>>(), vec![2, 4, 6, 8]);
        let t: TSeq = "3*n - 1".parse().unwrap();
        assert_eq!(t.get(2), Some(5));
        assert_eq!(t.to_string(), "3*n-1");
        let t: TSeq = "n^2".parse().unwrap();
        assert_eq!(t.get(7), Some(49));
        assert_eq!("n".parse::<TSeq>().unwrap(), TSeq::affine(1, 0));
        assert!("2m".parse::<TSeq>().is_err());
        assert_eq!(TSeq::from_list("1, 3,4").unwrap().get(3), Some(4));
    }

    #[test]
    fn syndetic_examples() {
        assert_eq!(check_syndetic(&"2n".parse().unwrap(), 1000).unwrap().max_gap, 2);
        assert_eq!(check_syndetic(&"n".parse().unwrap(), 1000).unwrap().max_gap, 1);
        assert!(matches!(
            check_syndetic(&"n^2".parse().unwrap(), 1000),
            Err(Error::NotSyndetic(_))
        ));
        assert!(matches!(
            check_syndetic(&TSeq::from_list("1,2,2,5").unwrap(), 10),
            Err(Error::NotIncreasing { n: 2, prev: 2, next: 2 })
        ));
    }

    fn profile(name: &str) -> QLProfile {
        match name {
            "tm_sum" => QLProfile::new(2, rat(1, 1), rat(0, 1), rat(2, 1)).unwrap(),
            "rs_sum" => QLProfile::new(4, rat(1, 2), rat(0, 1), rat(3, 1)).unwrap(),
            _ => QLProfile::new(2, rat(2, 1), rat(1, 1), rat(5, 2)).unwrap(),
        }
    }

    #[test]
    fn tm_sum_condition_holds() {
        let r = check_condition(eng("tm_sum"), &profile("tm_sum"), &"2n".parse().unwrap(), 8, None).unwrap();
        assert_eq!(r.verdict, Verdict::HoldsCertified);
        assert_eq!(r.best_c.as_deref(), Some("1"));
        assert!(r.exact);
    }

    #[test]
    fn rs_sum_condition_fails() {
        let c = rat(1, 10);
        let r = check_condition(eng("rs_sum"), &profile("rs_sum"), &"n".parse().unwrap(), 6, Some(&c)).unwrap();
        assert_eq!(r.verdict, Verdict::FailsCertified);
        assert!(r.counterexample.is_some());
    }

    #[test]
    fn vacuous_at_level_zero() {
        let r = check_condition(eng("rs_sum"), &profile("rs_sum"), &"n".parse().unwrap(), 0, None).unwrap();
        assert_eq!(r.verdict, Verdict::HoldsCertified);
        assert_eq!(r.best_c, None);
        assert_eq!(r.gaps_tested, 0);
    }

    #[test]
    fn certified_path_for_double_sum() {
        let p = profile("tm_double_sum");
        let m = StepModel::e_family(eng("tm_double_sum"), &p, None).unwrap();
        let gaps = condition_gaps(&m, &"n".parse().unwrap(), 4).unwrap();
        assert_eq!(gaps.len(), 14);
        for g in &gaps {
            assert!(g.lo_q <= g.hi_q);
        }
        let r = check_condition(eng("tm_double_sum"), &p, &"n".parse().unwrap(), 4, None).unwrap();
        assert!(!r.exact);
        assert_ne!(r.verdict, Verdict::FailsCertified);
    }

    #[test]
    fn tm_sum_gaps_halve_with_level() {
        let p = profile("tm_sum");
        let m = StepModel::e_family(eng("tm_sum"), &p, None).unwrap();
        let t: TSeq = "2n".parse().unwrap();
        for k in 2..10 {
            let a = condition_gaps(&m, &t, k).unwrap();
            let b = condition_gaps(&m, &t, k + 1).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(&x.lo_q / rat(2, 1), y.lo_q);
            }
        }
    }
}
