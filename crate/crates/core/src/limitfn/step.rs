//! Step approximants `f_n`, `g_n` as a tree of b-adic cells.
//!
//! A [`Cell`] at level `n` carries the midline numerator `mid` (the
//! approximant is `mid / B^n` on the whole cell) and a window of sequence
//! values, so children are derived in constant time without touching the
//! memo. All arithmetic is exact 128-bit integer arithmetic.

use std::cmp::Ordering;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::profile::{derive_tail_law, TailLaw};
use super::rho::digit_weight;
use super::QLProfile;
use crate::covers::d4;
use crate::error::{Error, Result};
use crate::seq::{SequenceEngine, Window};

/// Which rectangle family a model describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoverKind {
    /// Midlines `f_n` from the digit-weight series of ρ, half-height `2^(-n+1)`.
    F,
    /// Midlines `g_n` from a quasi-linear profile, half-height `D_4 C b^(-n(α-β))`.
    E,
}

/// An exact fraction with positive 128-bit denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frac {
    pub num: i128,
    pub den: i128,
}

pub(crate) fn cmp_frac(an: i128, ad: i128, bn: i128, bd: i128) -> Ordering {
    match (an.checked_mul(bd), bn.checked_mul(ad)) {
        (Some(l), Some(r)) => l.cmp(&r),
        _ => (BigInt::from(an) * BigInt::from(bd)).cmp(&(BigInt::from(bn) * BigInt::from(ad))),
    }
}

impl Frac {
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den > 0, "denominator must be positive");
        Frac { num, den }
    }

    pub fn to_big(self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn from_big(v: &BigRational) -> Option<Frac> {
        Some(Frac {
            num: v.numer().to_i128()?,
            den: v.denom().to_i128()?,
        })
    }
}

impl PartialOrd for Frac {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frac {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_frac(self.num, self.den, other.num, other.den)
    }
}

fn ovf(what: &str) -> Error {
    Error::Overflow(what.to_string())
}

pub(crate) fn ipow(b: i128, n: u32) -> Result<i128> {
    b.checked_pow(n).ok_or_else(|| ovf(&format!("{b}^{n}")))
}

/// A b-adic cell `I_{level,index}` with its approximant value.
#[derive(Debug, Clone, Copy)]
pub struct Cell {
    pub level: u32,
    pub index: u128,
    /// The approximant on this cell is `mid / B^level`.
    pub mid: i128,
    win: Window,
}

impl Cell {
    pub fn window(&self) -> &Window {
        &self.win
    }
}

/// Level-by-level description of a family of step approximants and the
/// half-heights of the rectangles built on them.
#[derive(Debug, Clone)]
pub struct StepModel {
    engine: Arc<SequenceEngine>,
    kind: CoverKind,
    base: u32,
    big_b: i128,
    hh_num: i128,
    hh_den: i128,
    growth: i128,
    tail: Option<TailLaw>,
    s0: i128,
    primary: usize,
    profile: Option<QLProfile>,
}

impl StepModel {
    /// The F family of ρ (base 4).
    pub fn f_family(rho: Arc<SequenceEngine>) -> Result<Self> {
        if rho.base() != 4 {
            return Err(Error::BaseMismatch {
                expected: 4,
                got: rho.base(),
            });
        }
        let tail = derive_tail_law(&rho, 2);
        let s0 = rho.eval(0)?;
        let primary = rho.primary();
        Ok(StepModel {
            engine: rho,
            kind: CoverKind::F,
            base: 4,
            big_b: 2,
            hh_num: 2,
            hh_den: 1,
            growth: 1,
            tail,
            s0,
            primary,
            profile: None,
        })
    }

    /// The E family of a profile; `d4_override` replaces `D_4` (used to
    /// demonstrate that nesting needs it).
    pub fn e_family(
        engine: Arc<SequenceEngine>,
        profile: &QLProfile,
        d4_override: Option<BigRational>,
    ) -> Result<Self> {
        if engine.base() != profile.base {
            return Err(Error::BaseMismatch {
                expected: engine.base(),
                got: profile.base,
            });
        }
        let big_b = profile.b_alpha_or_err()?;
        let growth = profile.b_beta().and_then(|v| i128::try_from(v).ok()).ok_or_else(|| {
            Error::ExactPathUnavailable(format!("{}^{} is not an integer", profile.base, profile.beta))
        })?;
        let d4 = match d4_override {
            Some(v) => v,
            None => BigRational::from_integer(BigInt::from(d4(profile)?)),
        };
        if d4 <= BigRational::zero() {
            return Err(Error::InvalidArgument("D_4 must be positive".into()));
        }
        let hh = d4 * &profile.c;
        let hh_num = hh.numer().to_i128().ok_or_else(|| ovf("half-height numerator"))?;
        let hh_den = hh.denom().to_i128().ok_or_else(|| ovf("half-height denominator"))?;
        let tail = derive_tail_law(&engine, big_b);
        let s0 = engine.eval(0)?;
        let primary = engine.primary();
        Ok(StepModel {
            engine,
            kind: CoverKind::E,
            base: profile.base,
            big_b,
            hh_num,
            hh_den,
            growth,
            tail,
            s0,
            primary,
            profile: Some(profile.clone()),
        })
    }

    /// The zero function on `[0, 1)` with zero half-heights.
    pub fn constant(base: u32) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidArgument(format!("base must be >= 2, got {base}")));
        }
        let mut src = format!("base {base}\nname z\n");
        for i in 0..base {
            src.push_str(&format!("init z({i}) = 0\nrule z({base}n+{i}) = 0\n"));
        }
        let engine = Arc::new(SequenceEngine::from_source(&src)?);
        let big_b = base as i128;
        let tail = derive_tail_law(&engine, big_b);
        Ok(StepModel {
            engine,
            kind: CoverKind::E,
            base,
            big_b,
            hh_num: 0,
            hh_den: 1,
            growth: 1,
            tail,
            s0: 0,
            primary: 0,
            profile: None,
        })
    }

    pub fn kind(&self) -> CoverKind {
        self.kind
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn engine(&self) -> &Arc<SequenceEngine> {
        &self.engine
    }

    /// `B`, the denominator growth of midlines per level.
    pub fn big_b(&self) -> i128 {
        self.big_b
    }

    /// The profile behind an E family.
    pub fn profile(&self) -> Option<&QLProfile> {
        self.profile.as_ref()
    }

    pub fn has_exact_values(&self) -> bool {
        self.kind == CoverKind::F || self.tail.is_some()
    }

    pub fn root(&self) -> Result<Cell> {
        Ok(Cell {
            level: 0,
            index: 0,
            mid: 0,
            win: self.engine.window_at(0)?,
        })
    }

    #[inline]
    pub fn child(&self, c: &Cell, i: u32) -> Result<Cell> {
        let win = self.engine.step(&c.win, i)?;
        let index = c.index * self.base as u128 + i as u128;
        let p = self.primary;
        let incr = match self.kind {
            CoverKind::F => {
                let a = if index == 0 { -1 } else { win.at(0, p) - win.at(-1, p) };
                digit_weight(i) * a
            }
            CoverKind::E => win
                .at(0, p)
                .checked_sub(self.big_b.checked_mul(c.win.at(0, p)).ok_or_else(|| ovf("c(j, x)"))?)
                .ok_or_else(|| ovf("c(j, x)"))?,
        };
        let mid = c
            .mid
            .checked_mul(self.big_b)
            .and_then(|m| m.checked_add(incr))
            .ok_or_else(|| ovf("midline"))?;
        Ok(Cell {
            level: c.level + 1,
            index,
            mid,
            win,
        })
    }

    /// The cell `I_{level,index}`, reached by walking down from the root.
    pub fn cell(&self, level: u32, index: u128) -> Result<Cell> {
        let b = self.base as u128;
        let mut digits = Vec::with_capacity(level as usize);
        let mut k = index;
        for _ in 0..level {
            digits.push((k % b) as u32);
            k /= b;
        }
        if k != 0 {
            return Err(Error::OutOfRange(format!("cell index {index} >= {b}^{level}")));
        }
        let mut c = self.root()?;
        for &d in digits.iter().rev() {
            c = self.child(&c, d)?;
        }
        Ok(c)
    }

    pub fn midline(&self, c: &Cell) -> Result<Frac> {
        Ok(Frac::new(c.mid, ipow(self.big_b, c.level)?))
    }

    /// Half-height of the level-`n` rectangles.
    pub fn half_height(&self, n: u32) -> Result<Frac> {
        let num = ipow(self.growth, n)?
            .checked_mul(self.hh_num)
            .ok_or_else(|| ovf("half-height"))?;
        let den = ipow(self.big_b, n)?
            .checked_mul(self.hh_den)
            .ok_or_else(|| ovf("half-height"))?;
        Ok(Frac::new(num, den))
    }

    /// Vertical extent `[lo, hi] / den` of the rectangle over `c`.
    #[inline]
    pub fn y_bounds(&self, c: &Cell) -> Result<(i128, i128, i128)> {
        let h = ipow(self.growth, c.level)?
            .checked_mul(self.hh_num)
            .ok_or_else(|| ovf("half-height"))?;
        let m = c.mid.checked_mul(self.hh_den).ok_or_else(|| ovf("midline"))?;
        let den = ipow(self.big_b, c.level)?
            .checked_mul(self.hh_den)
            .ok_or_else(|| ovf("rectangle"))?;
        let lo = m.checked_sub(h).ok_or_else(|| ovf("rectangle"))?;
        let hi = m.checked_add(h).ok_or_else(|| ovf("rectangle"))?;
        Ok((lo, hi, den))
    }

    /// Exact remainder at `index / b^level`, taking `⌊x⌋ = 0` (at `x = 1`
    /// this is the limit from the left).
    pub fn value_at_index(&self, level: u32, index: u128) -> Result<Frac> {
        let bn = ipow(self.big_b, level)?;
        let mid = self
            .engine
            .eval(index)?
            .checked_sub(self.s0.checked_mul(bn).ok_or_else(|| ovf("midline"))?)
            .ok_or_else(|| ovf("midline"))?;
        self.value_from_mid(level, index, mid)
    }

    /// Exact remainder at the left endpoint of `c`.
    pub fn left_value(&self, c: &Cell) -> Result<Frac> {
        self.value_from_mid(c.level, c.index, c.mid)
    }

    fn value_from_mid(&self, level: u32, index: u128, mid: i128) -> Result<Frac> {
        let bn = ipow(self.big_b, level)?;
        if self.kind == CoverKind::F {
            let tail = if index == 0 { -1 } else { 1 };
            return Ok(Frac::new(mid + tail, bn));
        }
        let law = self
            .tail
            .ok_or_else(|| Error::ExactPathUnavailable(format!("`{}` has no closed-form tail", self.engine.name())))?;
        if index == 0 {
            return Ok(Frac::new(-self.s0, 1));
        }
        let bb = self.big_b;
        let t = law.prefix;
        // (mid (B-1) B^T + Σ_{j<T} e(k b^j) (B-1) B^(T-j-1) + d) / ((B-1) B^(T+n))
        let scale = (bb - 1).checked_mul(ipow(bb, t)?).ok_or_else(|| ovf("tail"))?;
        let mut num = mid.checked_mul(scale).ok_or_else(|| ovf("tail"))?;
        let b = self.base as u128;
        let mut idx = index;
        for j in 0..t {
            let next = idx.checked_mul(b).ok_or_else(|| ovf("tail index"))?;
            let e = self.engine.eval(next)? - bb * self.engine.eval(idx)?;
            let w = (bb - 1).checked_mul(ipow(bb, t - j - 1)?).ok_or_else(|| ovf("tail"))?;
            num = num
                .checked_add(e.checked_mul(w).ok_or_else(|| ovf("tail"))?)
                .ok_or_else(|| ovf("tail"))?;
            idx = next;
        }
        num = num.checked_add(law.constant).ok_or_else(|| ovf("tail"))?;
        let den = scale.checked_mul(bn).ok_or_else(|| ovf("tail"))?;
        Ok(Frac::new(num, den))
    }

    /// `f_n` or `g_n` restricted to level `n`.
    pub fn approx(&self, level: u32) -> StepApprox<'_> {
        StepApprox { model: self, level }
    }
}

/// The level-`n` step approximant, constant on every `I_{n,k}`.
#[derive(Debug, Clone, Copy)]
pub struct StepApprox<'a> {
    model: &'a StepModel,
    level: u32,
}

impl StepApprox<'_> {
    pub fn level(&self) -> u32 {
        self.level
    }

    /// Value on the cell `I_{n,k}`.
    pub fn value(&self, k: u128) -> Result<BigRational> {
        let c = self.model.cell(self.level, k)?;
        Ok(self.model.midline(&c)?.to_big())
    }

    /// Value at a point of `[0, 1)`.
    pub fn value_at(&self, x: &crate::BAdicPoint) -> Result<BigRational> {
        if x.base() != self.model.base {
            return Err(Error::BaseMismatch {
                expected: self.model.base,
                got: x.base(),
            });
        }
        let k = x.floor_scale(self.level);
        let k = k.to_u128().ok_or_else(|| Error::IndexTooLarge(k.to_string()))?;
        self.value(k)
    }
}
