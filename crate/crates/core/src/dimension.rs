//! Column-based box counting of limit-function graphs.
//!
//! On a level-`n` column the graph is sampled exactly at the `b^p` grid
//! points of level `n + p`. The spread of those values bounds the column's
//! oscillation from below. From above, the function stays within the level
//! `n + p` half-height of the step approximant, whose spread is the spread
//! of its midlines.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::badic::BAdicInterval;
use crate::covers::{guard_cells, max_cells};
use crate::error::{Error, Result};
use crate::limitfn::{ipow, Cell, Frac, StepModel};
use crate::BAdicPoint;

/// Extremes of exact values and of midlines over the level-`n+p` cells of
/// one column.
#[derive(Debug, Clone, Copy)]
struct ColumnStats {
    vmin: Frac,
    vmax: Frac,
    mmin: i128,
    mmax: i128,
}

fn walk(model: &StepModel, c: &Cell, depth: u32, st: &mut Option<ColumnStats>) -> Result<()> {
    if depth == 0 {
        let v = model.left_value(c)?;
        match st {
            None => {
                *st = Some(ColumnStats {
                    vmin: v,
                    vmax: v,
                    mmin: c.mid,
                    mmax: c.mid,
                })
            }
            Some(s) => {
                s.vmin = s.vmin.min(v);
                s.vmax = s.vmax.max(v);
                s.mmin = s.mmin.min(c.mid);
                s.mmax = s.mmax.max(c.mid);
            }
        }
        return Ok(());
    }
    for i in 0..model.base() {
        walk(model, &model.child(c, i)?, depth - 1, st)?;
    }
    Ok(())
}

/// `(osc_lower, osc_upper)` over `cell` with exact arithmetic.
fn osc_of(model: &StepModel, cell: &Cell, p: u32) -> Result<(BigRational, BigRational)> {
    if !model.has_exact_values() {
        return Err(Error::ExactPathUnavailable(format!(
            "`{}` has no exact values at b-adic points",
            model.engine().name()
        )));
    }
    let mut st = None;
    walk(model, cell, p, &mut st)?;
    let st = st.expect("a column has at least one grid point");
    let level = cell.level + p;
    let lower = st.vmax.to_big() - st.vmin.to_big();
    let mids = BigRational::new(
        BigInt::from(st.mmax - st.mmin),
        BigInt::from(ipow(model.big_b(), level)?),
    );
    let slack = model.half_height(level)?.to_big();
    let upper = lower.clone().max(mids) + slack * BigRational::from_integer(BigInt::from(2));
    Ok((lower, upper))
}

/// Oscillation bracket of the limit function over `column`, oversampled by
/// `p` levels.
pub fn column_osc(model: &StepModel, column: &BAdicInterval, p: u32) -> Result<(BigRational, BigRational)> {
    if column.base() != model.base() {
        return Err(Error::BaseMismatch {
            expected: model.base(),
            got: column.base(),
        });
    }
    if p == 0 {
        return Err(Error::InvalidArgument("oversampling p must be >= 1".into()));
    }
    let k = column
        .index()
        .to_u128()
        .ok_or_else(|| Error::IndexTooLarge(column.index().to_string()))?;
    osc_of(model, &model.cell(column.level(), k)?, p)
}

fn boxes(osc: &BigRational, bn: i128) -> Result<u128> {
    (osc * BigRational::from_integer(BigInt::from(bn)))
        .floor()
        .to_integer()
        .to_u128()
        .map(|v| v + 1)
        .ok_or_else(|| Error::Overflow("box count".into()))
}

fn column_range(model: &StepModel, u: &BAdicPoint, v: &BAdicPoint, n: u32) -> Result<(u128, u128)> {
    let b = model.base();
    if u.base() != b || v.base() != b {
        return Err(Error::BaseMismatch {
            expected: b,
            got: if u.base() != b { u.base() } else { v.base() },
        });
    }
    if u.depth() > n || v.depth() > n {
        return Err(Error::InvalidArgument(format!(
            "interval endpoints {u}, {v} are finer than level {n}"
        )));
    }
    let one = BigRational::from_integer(BigInt::from(1));
    if u.to_rational() >= v.to_rational() || v.to_rational() > one {
        return Err(Error::InvalidArgument(format!("need 0 <= u < v <= 1, got {u}, {v}")));
    }
    let lo = u
        .floor_scale(n)
        .to_u128()
        .ok_or_else(|| Error::IndexTooLarge(u.to_string()))?;
    let hi = v
        .floor_scale(n)
        .to_u128()
        .ok_or_else(|| Error::IndexTooLarge(v.to_string()))?;
    Ok((lo, hi))
}

/// `(count_lower, count_upper)` for boxes of side `b^-n` over `[u, v)`.
pub fn box_count(model: &StepModel, u: &BAdicPoint, v: &BAdicPoint, n: u32, p: u32) -> Result<(u128, u128)> {
    if p == 0 {
        return Err(Error::InvalidArgument("oversampling p must be >= 1".into()));
    }
    let (lo, hi) = column_range(model, u, v, n)?;
    // Cells are streamed, so the guard bounds the subcells actually visited.
    let sub = guard_cells(model.base(), p)?;
    let visited = (hi - lo).saturating_mul(sub);
    if visited > max_cells() {
        return Err(Error::ResourceGuard {
            requested: visited,
            limit: max_cells(),
        });
    }
    let bn = ipow(model.base() as i128, n)?;
    // Split at a shallow level so each task walks one subtree.
    let split = n.min(3);
    let per = (model.base() as u128).pow(n - split);
    let tops: Vec<u128> = (lo / per..hi.div_ceil(per)).collect();
    let parts = tops
        .par_iter()
        .map(|&t| -> Result<(u128, u128)> {
            let top = model.cell(split, t)?;
            let mut acc = (0u128, 0u128);
            sum_columns(model, &top, n, p, lo, hi, bn, &mut acc)?;
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.iter().fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1)))
}

#[allow(clippy::too_many_arguments)]
fn sum_columns(
    model: &StepModel,
    c: &Cell,
    n: u32,
    p: u32,
    lo: u128,
    hi: u128,
    bn: i128,
    acc: &mut (u128, u128),
) -> Result<()> {
    let span = (model.base() as u128).pow(n - c.level);
    let first = c.index * span;
    if first + span <= lo || first >= hi {
        return Ok(());
    }
    if c.level == n {
        let (ol, ou) = osc_of(model, c, p)?;
        acc.0 += boxes(&ol, bn)?;
        acc.1 += boxes(&ou, bn)?;
        return Ok(());
    }
    for i in 0..model.base() {
        sum_columns(model, &model.child(c, i)?, n, p, lo, hi, bn, acc)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoxRow {
    pub level: u32,
    /// `b^-level` as an exact fraction.
    pub delta: String,
    pub count_lower: u128,
    pub count_upper: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoxCountTable {
    pub instance: String,
    pub base: u32,
    pub u: String,
    pub v: String,
    pub oversample: u32,
    pub rows: Vec<BoxRow>,
}

/// Box counts for each level in `lo..=hi`.
pub fn box_count_table(
    model: &StepModel,
    instance: &str,
    u: &BAdicPoint,
    v: &BAdicPoint,
    lo: u32,
    hi: u32,
    p: u32,
) -> Result<BoxCountTable> {
    if lo > hi {
        return Err(Error::InvalidArgument(format!("empty level range {lo}..{hi}")));
    }
    let mut rows = Vec::new();
    for n in lo..=hi {
        let (count_lower, count_upper) = box_count(model, u, v, n, p)?;
        rows.push(BoxRow {
            level: n,
            delta: format!("1/{}", ipow(model.base() as i128, n)?),
            count_lower,
            count_upper,
        });
    }
    Ok(BoxCountTable {
        instance: instance.to_string(),
        base: model.base(),
        u: u.to_string(),
        v: v.to_string(),
        oversample: p,
        rows,
    })
}

/// Least-squares line through `(log(1/δ), log N)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub levels: Vec<u32>,
    pub residuals: Vec<f64>,
}

/// Fits the rows whose level lies in `levels` (all rows when `None`). Each
/// row contributes the geometric mean of its two counts.
pub fn fit_dimension(table: &BoxCountTable, levels: Option<(u32, u32)>) -> Result<SlopeFit> {
    let rows: Vec<&BoxRow> = table
        .rows
        .iter()
        .filter(|r| levels.is_none_or(|(a, b)| (a..=b).contains(&r.level)))
        .collect();
    if rows.len() < 3 {
        return Err(Error::InsufficientRows(rows.len()));
    }
    let lb = (table.base as f64).ln();
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| {
            let g = 0.5 * ((r.count_lower as f64).ln() + (r.count_upper as f64).ln());
            (r.level as f64 * lb, g)
        })
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx.is_zero() {
        return Err(Error::InvalidArgument("rows must span at least two levels".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = pts.iter().map(|p| p.1 - (intercept + slope * p.0)).collect();
    let ssr: f64 = residuals.iter().map(|r| r * r).sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    Ok(SlopeFit {
        slope,
        intercept,
        stderr,
        levels: rows.iter().map(|r| r.level).collect(),
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::limitfn::certified::rat;
    use crate::limitfn::{a_exact, QLProfile};
    use std::sync::Arc;

    fn rho() -> StepModel {
        StepModel::f_family(Arc::new(builtin("rho").unwrap())).unwrap()
    }

    fn pt(s: &str) -> BAdicPoint {
        s.parse().unwrap()
    }

    #[test]
    fn rho_column_oscillation_from_grid() {
        let m = rho();
        let eng = builtin("rho").unwrap();
        let col = BAdicInterval::new(4, 1, 1u32).unwrap();
        let (lo, hi) = column_osc(&m, &col, 2).unwrap();
        let grid: Vec<BigRational> = (16..32u32)
            .map(|z| a_exact(&eng, &BAdicPoint::new(4, z, 3).unwrap()).unwrap())
            .collect();
        let want = grid.iter().max().unwrap() - grid.iter().min().unwrap();
        assert_eq!(lo, want);
        assert!(hi >= &lo + rat(2 * 2, 8));
    }

    #[test]
    fn constant_instance_counts_one_box_per_column() {
        let m = StepModel::constant(4).unwrap();
        let col = BAdicInterval::new(4, 2, 5u32).unwrap();
        assert_eq!(column_osc(&m, &col, 3).unwrap(), (rat(0, 1), rat(0, 1)));
        for n in 1..=5 {
            let (l, u) = box_count(&m, &pt("0/4^0"), &pt("1/4^0"), n, 2).unwrap();
            assert_eq!((l, u), (1u128 << (2 * n), 1u128 << (2 * n)));
        }
        let t = box_count_table(&m, "constant", &pt("0/4^0"), &pt("1/4^0"), 1, 6, 2).unwrap();
        let fit = fit_dimension(&t, None).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rho_counts_match_exhaustive_oracle() {
        // Oracle: evaluate a exactly at every level-(n+p) grid point of each column.
        let m = rho();
        let eng = builtin("rho").unwrap();
        let (u, v) = (pt("1/4"), pt("2/4"));
        for n in 1..=4u32 {
            let p = 3;
            let (lo, _) = box_count(&m, &u, &v, n, p).unwrap();
            let mut want = 0u128;
            let bn = 1u128 << (2 * n);
            for k in bn / 4..bn / 2 {
                let vals: Vec<BigRational> = (0..64u128)
                    .map(|j| a_exact(&eng, &BAdicPoint::new(4, k * 64 + j, n + p).unwrap()).unwrap())
                    .collect();
                let osc = vals.iter().max().unwrap() - vals.iter().min().unwrap();
                want += (osc * rat(bn as i128, 1)).floor().to_integer().to_u128().unwrap() + 1;
            }
            assert_eq!(lo, want, "n={n}");
        }
    }

    #[test]
    fn refining_oversampling_tightens_bracket() {
        let m = rho();
        let (u, v) = (pt("1/4"), pt("2/4"));
        for n in 2..=5 {
            let (l2, u2) = box_count(&m, &u, &v, n, 2).unwrap();
            let (l4, u4) = box_count(&m, &u, &v, n, 4).unwrap();
            assert!(l2 <= l4 && u4 <= u2, "n={n}");
            assert!(l4 <= u4);
            assert!(u4 - l4 < u2 - l2);
        }
    }

    #[test]
    fn counts_monotone_in_level() {
        let m = rho();
        let t = box_count_table(&m, "rho", &pt("1/4"), &pt("2/4"), 1, 6, 3).unwrap();
        for w in t.rows.windows(2) {
            assert!(w[0].count_lower <= w[1].count_lower && w[0].count_upper <= w[1].count_upper);
        }
    }

    #[test]
    fn tm_sum_counts_are_exact_lines() {
        let p = QLProfile::new(2, rat(1, 1), rat(0, 1), rat(2, 1)).unwrap();
        let m = StepModel::e_family(Arc::new(builtin("tm_sum").unwrap()), &p, None).unwrap();
        let (lo, _) = box_count(&m, &pt("0/2^0"), &pt("1/2^0"), 6, 3).unwrap();
        // a_s(x) = x/2: each column rises by 2^-7, so one box per column.
        assert_eq!(lo, 64);
    }

    #[test]
    fn errors() {
        let m = rho();
        assert!(matches!(
            box_count(&m, &pt("1/4^3"), &pt("2/4"), 2, 3),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            box_count(&m, &pt("2/4"), &pt("1/4"), 2, 3),
            Err(Error::InvalidArgument(_))
        ));
        let t = BoxCountTable {
            instance: "x".into(),
            base: 4,
            u: String::new(),
            v: String::new(),
            oversample: 3,
            rows: vec![],
        };
        assert!(matches!(fit_dimension(&t, None), Err(Error::InsufficientRows(0))));
        let p = QLProfile::new(2, rat(2, 1), rat(1, 1), rat(5, 2)).unwrap();
        let e = StepModel::e_family(Arc::new(builtin("tm_double_sum").unwrap()), &p, None).unwrap();
        let col = BAdicInterval::new(2, 2, 1u32).unwrap();
        assert!(matches!(column_osc(&e, &col, 2), Err(Error::ExactPathUnavailable(_))));
    }

    #[test]
    fn fit_recovers_synthetic_slope() {
        let rows = (1..=6)
            .map(|n| BoxRow {
                level: n,
                delta: String::new(),
                count_lower: 3 * (1u128 << (3 * n)),
                count_upper: 3 * (1u128 << (3 * n)),
            })
            .collect();
        let t = BoxCountTable {
            instance: "x".into(),
            base: 4,
            u: String::new(),
            v: String::new(),
            oversample: 1,
            rows,
        };
        let fit = fit_dimension(&t, Some((2, 5))).unwrap();
        assert!((fit.slope - 1.5).abs() < 1e-12);
        assert_eq!(fit.levels, vec![2, 3, 4, 5]);
        assert!(fit.stderr < 1e-9);
    }
}
