//! Rectangle families `F_{n,k}`, `E_{n,k}` over b-adic columns and exact
//! nesting checks between consecutive levels.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::badic::BAdicInterval;
use crate::error::{Error, Result};
use crate::limitfn::certified::{integral_power, pow_enclosure, rat, DEFAULT_BITS};
use crate::limitfn::{a_s_certified, cmp_frac, ipow, Cell, CoverKind, Frac, QLProfile, StepModel};
use crate::BAdicPoint;

/// Default cap on the number of cells a single family may hold.
pub const DEFAULT_MAX_CELLS: u128 = 1 << 24;

/// The resource guard, overridable through `FRACLIM_MAX_CELLS`.
pub fn max_cells() -> u128 {
    std::env::var("FRACLIM_MAX_CELLS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_CELLS)
}

/// Fails with `ResourceGuard` when `b^n` cells exceed the guard.
pub fn guard_cells(base: u32, n: u32) -> Result<u128> {
    let limit = max_cells();
    let requested = (base as u128).checked_pow(n).unwrap_or(u128::MAX);
    if requested > limit {
        return Err(Error::ResourceGuard { requested, limit });
    }
    Ok(requested)
}

/// `⌊3 / (b^(α-β) - 1)⌋ + 1`.
pub fn d4(profile: &QLProfile) -> Result<u64> {
    let gap = &profile.alpha - &profile.beta;
    if !gap.is_positive() {
        return Err(Error::DegenerateProfile {
            alpha: profile.alpha.to_string(),
            beta: profile.beta.to_string(),
        });
    }
    if let Some(g) = integral_power(profile.base, &gap) {
        return Ok((3 / (g - 1)) as u64 + 1);
    }
    // b^(α-β) is irrational here, so 3/(G-1) is never an integer and the
    // enclosure eventually pins its floor.
    let three = rat(3, 1);
    let b = rat(profile.base as i128, 1);
    let mut bits = DEFAULT_BITS;
    loop {
        let g = pow_enclosure(&b, &gap, bits);
        let lo = g.lo() - BigRational::one();
        let hi = g.hi() - BigRational::one();
        if lo.is_positive() {
            let f_hi = (&three / &lo).floor();
            let f_lo = (&three / &hi).floor();
            if f_hi == f_lo {
                return f_lo
                    .to_integer()
                    .to_u64()
                    .map(|v| v + 1)
                    .ok_or_else(|| Error::Overflow("D_4".into()));
            }
        }
        bits *= 2;
        if bits > 1 << 14 {
            return Err(Error::Overflow("D_4 enclosure did not separate".into()));
        }
    }
}

/// One rectangle `column × [lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rect {
    pub column: BAdicInterval,
    pub y_lo: BigRational,
    pub y_hi: BigRational,
}

#[derive(Debug, Clone, Serialize)]
pub struct RectSummary {
    pub level: u32,
    pub index: String,
    pub x: [String; 2],
    pub y: [String; 2],
}

impl Rect {
    pub fn summary(&self) -> RectSummary {
        RectSummary {
            level: self.column.level(),
            index: self.column.index().to_string(),
            x: [self.column.left().to_string(), self.column.right().to_string()],
            y: [self.y_lo.to_string(), self.y_hi.to_string()],
        }
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        let l = self.column.left().to_rational();
        let r = self.column.right().to_rational();
        other.column.left().to_rational() >= l
            && other.column.right().to_rational() <= r
            && other.y_lo >= self.y_lo
            && other.y_hi <= self.y_hi
    }
}

/// All `b^n` rectangles of one level. Midlines share the denominator `B^n`,
/// half-heights the denominator `hh_den B^n`.
#[derive(Debug, Clone)]
pub struct RectFamily {
    kind: CoverKind,
    base: u32,
    level: u32,
    mids: Vec<i128>,
    half_height: Frac,
    mid_den: i128,
}

impl RectFamily {
    pub fn kind(&self) -> CoverKind {
        self.kind
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.mids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mids.is_empty()
    }

    pub fn half_height(&self) -> Frac {
        self.half_height
    }

    pub fn midline(&self, k: usize) -> Frac {
        Frac::new(self.mids[k], self.mid_den)
    }

    /// `(lo, hi, den)` over a shared denominator.
    fn bounds(&self, k: usize) -> (BigInt, BigInt, BigInt) {
        let h = &self.half_height;
        let den = BigInt::from(self.mid_den) * BigInt::from(h.den);
        let m = BigInt::from(self.mids[k]) * BigInt::from(h.den);
        let hh = BigInt::from(h.num) * BigInt::from(self.mid_den);
        (&m - &hh, &m + &hh, den)
    }

    /// `(lo, hi, den)` in 128-bit arithmetic when it fits.
    #[inline]
    fn bounds_i128(&self, k: usize) -> Option<(i128, i128, i128)> {
        let h = &self.half_height;
        let den = self.mid_den.checked_mul(h.den)?;
        let m = self.mids[k].checked_mul(h.den)?;
        let hh = h.num.checked_mul(self.mid_den)?;
        Some((m.checked_sub(hh)?, m.checked_add(hh)?, den))
    }

    pub fn rect(&self, k: usize) -> Rect {
        let (lo, hi, den) = self.bounds(k);
        Rect {
            column: BAdicInterval::new(self.base, self.level, k as u128).expect("index in range"),
            y_lo: BigRational::new(lo, den.clone()),
            y_hi: BigRational::new(hi, den),
        }
    }
}

fn collect_leaves(model: &StepModel, c: &Cell, depth: u32, out: &mut [i128]) -> Result<()> {
    if depth == 0 {
        out[0] = c.mid;
        return Ok(());
    }
    let b = model.base();
    let chunk = out.len() / b as usize;
    for (i, part) in out.chunks_mut(chunk).enumerate() {
        let kid = model.child(c, i as u32)?;
        collect_leaves(model, &kid, depth - 1, part)?;
    }
    Ok(())
}

/// Cells of level `n` in index order, built breadth first.
pub(crate) fn cells_at(model: &StepModel, n: u32) -> Result<Vec<Cell>> {
    let mut level = vec![model.root()?];
    for _ in 0..n {
        let mut next = Vec::with_capacity(level.len() * model.base() as usize);
        for c in &level {
            for i in 0..model.base() {
                next.push(model.child(c, i)?);
            }
        }
        level = next;
    }
    Ok(level)
}

/// The level-`n` family of `model`.
pub fn build_family(model: &StepModel, n: u32) -> Result<RectFamily> {
    let count = guard_cells(model.base(), n)? as usize;
    let mut mids = vec![0i128; count];
    let split = n.min(4);
    let tops = cells_at(model, split)?;
    let chunk = count / tops.len();
    mids.par_chunks_mut(chunk)
        .zip(tops.par_iter())
        .try_for_each(|(part, c)| collect_leaves(model, c, n - split, part))?;
    Ok(RectFamily {
        kind: model.kind(),
        base: model.base(),
        level: n,
        mids,
        half_height: model.half_height(n)?,
        mid_den: ipow(model.big_b(), n)?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NestingViolation {
    pub k: String,
    pub i: u32,
    pub parent: RectSummary,
    pub child: RectSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct NestingReport {
    pub kind: CoverKind,
    pub parent_level: u32,
    pub pass: bool,
    pub violation: Option<NestingViolation>,
}

fn nests(parent: &RectFamily, child: &RectFamily, k: usize, i: usize) -> bool {
    let ci = k * parent.base as usize + i;
    if let (Some((plo, phi, pd)), Some((clo, chi, cd))) = (parent.bounds_i128(k), child.bounds_i128(ci)) {
        return cmp_frac(clo, cd, plo, pd).is_ge() && cmp_frac(chi, cd, phi, pd).is_le();
    }
    let (plo, phi, pd) = parent.bounds(k);
    let (clo, chi, cd) = child.bounds(ci);
    &clo * &pd >= &plo * &cd && &chi * &pd <= &phi * &cd
}

/// Checks `child_{bk+i} ⊆ parent_k` for every `k, i` in exact arithmetic and
/// reports the first failure in index order.
pub fn verify_nesting(parent: &RectFamily, child: &RectFamily) -> Result<NestingReport> {
    if child.level != parent.level + 1 || child.kind != parent.kind || child.base != parent.base {
        return Err(Error::LevelMismatch {
            parent: parent.level,
            child: child.level,
        });
    }
    let b = parent.base as usize;
    let first = (0..parent.len())
        .into_par_iter()
        .find_first(|&k| (0..b).any(|i| !nests(parent, child, k, i)));
    let violation = first.map(|k| {
        let i = (0..b).find(|&i| !nests(parent, child, k, i)).expect("violation exists");
        NestingViolation {
            k: k.to_string(),
            i: i as u32,
            parent: parent.rect(k).summary(),
            child: child.rect(k * b + i).summary(),
        }
    });
    Ok(NestingReport {
        kind: parent.kind,
        parent_level: parent.level,
        pass: violation.is_none(),
        violation,
    })
}

/// Nesting reports for each consecutive pair in `lo..=hi` (parent levels `lo..hi`).
pub fn verify_levels(model: &StepModel, lo: u32, hi: u32) -> Result<Vec<NestingReport>> {
    if hi <= lo {
        return Err(Error::InvalidArgument(format!(
            "need at least two levels, got {lo}..{hi}"
        )));
    }
    let mut prev = build_family(model, lo)?;
    let mut out = Vec::new();
    for n in lo + 1..=hi {
        let next = build_family(model, n)?;
        out.push(verify_nesting(&prev, &next)?);
        prev = next;
    }
    Ok(out)
}

/// First column whose rectangle misses the limit function at a column
/// endpoint: exact values where available, certified enclosures otherwise
/// (left endpoints only).
pub fn check_containment(model: &StepModel, family: &RectFamily) -> Result<Option<u128>> {
    let n = family.level;
    let count = family.len();
    let exact = model.has_exact_values();
    let bad = (0..count).into_par_iter().map(|k| -> Result<bool> {
        let (lo, hi, den) = family.bounds(k);
        let inside = |v: &BigRational| {
            let v = v * BigRational::from_integer(den.clone());
            v >= BigRational::from_integer(lo.clone()) && v <= BigRational::from_integer(hi.clone())
        };
        if exact {
            let l = model.value_at_index(n, k as u128)?.to_big();
            let r = model.value_at_index(n, k as u128 + 1)?.to_big();
            Ok(!(inside(&l) && inside(&r)))
        } else {
            let profile = model
                .profile()
                .ok_or_else(|| Error::ExactPathUnavailable("no profile for certified values".into()))?;
            let x = BAdicPoint::new(model.base(), k as u128, n)?;
            let eps = family.half_height.to_big() / BigInt::from(8);
            let (v, _) = a_s_certified(model.engine(), profile, &x, &eps)?;
            Ok(!(inside(&v.lo()) && inside(&v.hi())))
        }
    });
    let flags: Vec<bool> = bad.collect::<Result<_>>()?;
    Ok(flags.iter().position(|&b| b).map(|k| k as u128))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use std::sync::Arc;

    fn profile(b: u32, a: (i128, i128), be: (i128, i128), c: i128) -> QLProfile {
        QLProfile::new(b, rat(a.0, a.1), rat(be.0, be.1), rat(c, 1)).unwrap()
    }

    #[test]
    fn d4_examples() {
        assert_eq!(d4(&profile(4, (1, 2), (0, 1), 1)).unwrap(), 4);
        assert_eq!(d4(&profile(2, (1, 1), (0, 1), 1)).unwrap(), 4);
        assert_eq!(d4(&profile(2, (2, 1), (0, 1), 1)).unwrap(), 2);
        assert_eq!(d4(&profile(2, (2, 1), (1, 1), 1)).unwrap(), 4);
    }

    #[test]
    fn d4_irrational_gap() {
        // 2^(1/2) - 1 = 0.41421..., 3 / that = 7.24...
        assert_eq!(d4(&profile(2, (1, 2), (0, 1), 1)).unwrap(), 8);
        // 3^(1/2) - 1 = 0.73205..., 3 / that = 4.098...
        assert_eq!(d4(&profile(3, (1, 2), (0, 1), 1)).unwrap(), 5);
    }

    #[test]
    fn degenerate_profile_rejected() {
        let p = QLProfile {
            base: 2,
            alpha: rat(1, 1),
            beta: rat(1, 1),
            c: rat(1, 1),
            verified_up_to: 0,
        };
        assert!(matches!(d4(&p), Err(Error::DegenerateProfile { .. })));
    }

    #[test]
    fn f_level_one() {
        let m = StepModel::f_family(Arc::new(builtin("rho").unwrap())).unwrap();
        let fam = build_family(&m, 1).unwrap();
        assert_eq!(fam.len(), 4);
        assert_eq!(fam.half_height().to_big(), rat(1, 1));
        assert_eq!(fam.midline(1).to_big(), rat(0, 1));
    }

    #[test]
    fn e_tm_sum_level_three() {
        let p = profile(2, (1, 1), (0, 1), 2);
        let m = StepModel::e_family(Arc::new(builtin("tm_sum").unwrap()), &p, None).unwrap();
        let fam = build_family(&m, 3).unwrap();
        assert_eq!(fam.len(), 8);
        assert_eq!(fam.half_height().to_big(), rat(4 * 2, 8));
    }

    #[test]
    fn family_matches_cell_walk() {
        let m = StepModel::f_family(Arc::new(builtin("rho").unwrap())).unwrap();
        let fam = build_family(&m, 6).unwrap();
        for k in (0..4096u128).step_by(37) {
            let c = m.cell(6, k).unwrap();
            assert_eq!(fam.midline(k as usize), m.midline(&c).unwrap());
        }
    }

    #[test]
    fn rects_partition_unit_interval() {
        let m = StepModel::f_family(Arc::new(builtin("rho").unwrap())).unwrap();
        let fam = build_family(&m, 3).unwrap();
        let mut end = rat(0, 1);
        for k in 0..fam.len() {
            let r = fam.rect(k);
            assert_eq!(r.column.left().to_rational(), end);
            end = r.column.right().to_rational();
        }
        assert_eq!(end, rat(1, 1));
    }

    #[test]
    fn level_mismatch() {
        let m = StepModel::f_family(Arc::new(builtin("rho").unwrap())).unwrap();
        let a = build_family(&m, 2).unwrap();
        let c = build_family(&m, 4).unwrap();
        assert!(matches!(
            verify_nesting(&a, &c),
            Err(Error::LevelMismatch { parent: 2, child: 4 })
        ));
    }

    #[test]
    fn resource_guard_trips() {
        let m = StepModel::f_family(Arc::new(builtin("rho").unwrap())).unwrap();
        assert!(matches!(build_family(&m, 13), Err(Error::ResourceGuard { .. })));
    }

    #[test]
    fn containment_small_levels() {
        let m = StepModel::f_family(Arc::new(builtin("rho").unwrap())).unwrap();
        for n in 1..=6 {
            assert_eq!(check_containment(&m, &build_family(&m, n).unwrap()).unwrap(), None);
        }
        let p = profile(2, (2, 1), (1, 1), 5);
        let p = QLProfile { c: rat(5, 2), ..p };
        let m = StepModel::e_family(Arc::new(builtin("tm_double_sum").unwrap()), &p, None).unwrap();
        assert!(!m.has_exact_values());
        for n in 1..=5 {
            assert_eq!(check_containment(&m, &build_family(&m, n).unwrap()).unwrap(), None);
        }
    }
}
