//! The mass distribution `μ(F_{n,k}) = b^-n` on a nested family, its
//! restriction `μ̃` to one root cell, square queries and a sampled scan for
//! the ratio `μ̃(S) / side^t`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::covers::max_cells;
use crate::error::{Error, Result};
use crate::limitfn::{cmp_frac, ipow, Cell, Frac, StepModel};

/// `μ̃`, the mass distribution of `model` conditioned on the cell `(n0, k0)`.
///
/// Queries count level-`m` rectangles. A rectangle lying inside the query
/// square is counted with all its descendants at once, which relies on the
/// family being nested.
#[derive(Debug, Clone)]
pub struct CoverMeasure {
    model: Arc<StepModel>,
    n0: u32,
    k0: u128,
    root: Cell,
}

/// Closed axis-parallel square with lower-left corner `(x0, y0)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Square {
    pub x0: BigRational,
    pub y0: BigRational,
    pub side: BigRational,
}

impl Square {
    pub fn new(x0: BigRational, y0: BigRational, side: BigRational) -> Result<Self> {
        if !side.is_positive() {
            return Err(Error::InvalidArgument(format!(
                "square side must be positive, got {side}"
            )));
        }
        Ok(Square { x0, y0, side })
    }

    pub fn contains_square(&self, other: &Square) -> bool {
        other.x0 >= self.x0
            && other.y0 >= self.y0
            && &other.x0 + &other.side <= &self.x0 + &self.side
            && &other.y0 + &other.side <= &self.y0 + &self.side
    }

    fn bounds(&self) -> Result<Bounds> {
        let f = |v: &BigRational| {
            Frac::from_big(v).ok_or_else(|| Error::Overflow(format!("square coordinate {v} exceeds 128 bits")))
        };
        Ok(Bounds {
            x0: f(&self.x0)?,
            x1: f(&(&self.x0 + &self.side))?,
            y0: f(&self.y0)?,
            y1: f(&(&self.y0 + &self.side))?,
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Bounds {
    x0: Frac,
    x1: Frac,
    y0: Frac,
    y1: Frac,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Overlap {
    Outside,
    Partial,
    Inside,
}

impl CoverMeasure {
    pub fn new(model: Arc<StepModel>, n0: u32, k0: u128) -> Result<Self> {
        let root = model.cell(n0, k0)?;
        Ok(CoverMeasure { model, n0, k0, root })
    }

    pub fn model(&self) -> &StepModel {
        &self.model
    }

    pub fn root_cell(&self) -> (u32, u128) {
        (self.n0, self.k0)
    }

    /// `μ̃` of the level-`m` rectangle `k`: `b^(n0-m)` inside the root, else 0.
    pub fn rect_measure(&self, m: u32, k: u128) -> Result<BigRational> {
        if m < self.n0 {
            return Err(Error::InvalidArgument(format!(
                "level {m} is above the root level {}",
                self.n0
            )));
        }
        let span = ipow(self.model.base() as i128, m - self.n0)? as u128;
        if k / span != self.k0 {
            return Ok(BigRational::from_integer(BigInt::from(0)));
        }
        Ok(BigRational::new(BigInt::from(1), BigInt::from(span)))
    }

    /// The smallest square containing the root rectangle, anchored at its
    /// lower-left corner.
    pub fn root_square(&self) -> Result<Square> {
        let (lo, hi, den) = self.model.y_bounds(&self.root)?;
        let bn = ipow(self.model.base() as i128, self.n0)?;
        let width = BigRational::new(BigInt::from(1), BigInt::from(bn));
        let height = BigRational::new(BigInt::from(hi - lo), BigInt::from(den));
        Square::new(
            BigRational::new(BigInt::from(self.k0), BigInt::from(bn)),
            BigRational::new(BigInt::from(lo), BigInt::from(den)),
            width.max(height),
        )
    }

    fn overlap(&self, c: &Cell, s: &Bounds) -> Result<Overlap> {
        let bl = ipow(self.model.base() as i128, c.level)?;
        let k = c.index as i128;
        if cmp_frac(k, bl, s.x1.num, s.x1.den).is_gt() || cmp_frac(k + 1, bl, s.x0.num, s.x0.den).is_lt() {
            return Ok(Overlap::Outside);
        }
        let (lo, hi, den) = self.model.y_bounds(c)?;
        if cmp_frac(lo, den, s.y1.num, s.y1.den).is_gt() || cmp_frac(hi, den, s.y0.num, s.y0.den).is_lt() {
            return Ok(Overlap::Outside);
        }
        let inside = cmp_frac(k, bl, s.x0.num, s.x0.den).is_ge()
            && cmp_frac(k + 1, bl, s.x1.num, s.x1.den).is_le()
            && cmp_frac(lo, den, s.y0.num, s.y0.den).is_ge()
            && cmp_frac(hi, den, s.y1.num, s.y1.den).is_le();
        Ok(if inside { Overlap::Inside } else { Overlap::Partial })
    }

    /// Number of level-`m` rectangles below `c` meeting the square.
    /// `budget` bounds the number of cells visited.
    fn hits(&self, c: &Cell, s: &Bounds, m: u32, budget: &mut u128) -> Result<u128> {
        if *budget == 0 {
            return Err(Error::ResourceGuard {
                requested: max_cells() + 1,
                limit: max_cells(),
            });
        }
        *budget -= 1;
        match self.overlap(c, s)? {
            Overlap::Outside => Ok(0),
            Overlap::Inside => Ok((self.model.base() as u128).pow(m - c.level)),
            Overlap::Partial if c.level == m => Ok(1),
            Overlap::Partial => {
                let mut total = 0;
                for i in 0..self.model.base() {
                    total += self.hits(&self.model.child(c, i)?, s, m, budget)?;
                }
                Ok(total)
            }
        }
    }

    fn count(&self, s: &Square, m: u32) -> Result<u128> {
        if m < self.n0 {
            return Err(Error::InvalidArgument(format!(
                "level {m} is above the root level {}",
                self.n0
            )));
        }
        self.hits(&self.root, &s.bounds()?, m, &mut max_cells())
    }

    /// `μ̃` summed over the level-`m` rectangles meeting `s` (touching counts).
    /// Fails with `ResourceGuard` when the search visits more cells than
    /// the guard allows.
    pub fn ball_measure(&self, s: &Square, m: u32) -> Result<BigRational> {
        if m < self.n0 {
            return Err(Error::InvalidArgument(format!(
                "level {m} is above the root level {}",
                self.n0
            )));
        }
        let span = ipow(self.model.base() as i128, m - self.n0)?;
        Ok(BigRational::new(BigInt::from(self.count(s, m)?), BigInt::from(span)))
    }

    /// Smallest level `L >= m` whose rectangles are at most as tall as a
    /// square of side `b^-m`.
    fn resolution(&self, m: u32) -> Result<u32> {
        let side = Frac::new(1, ipow(self.model.base() as i128, m)?);
        let start = m.max(self.n0);
        for l in start..start + 64 {
            let h = self.model.half_height(l)?;
            if Frac::new(2 * h.num, h.den) <= side {
                return Ok(l);
            }
        }
        Err(Error::Domain(format!("rectangle heights never drop below 4^-{m}")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SquareReport {
    pub sample: u64,
    pub level: u32,
    pub resolution: u32,
    pub x0: String,
    pub y0: String,
    pub side: String,
    pub measure: String,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelMax {
    pub level: u32,
    pub max_ratio: f64,
}

/// Sampled witness for `sup μ̃(S) / side^t`. It is evidence from finitely
/// many squares and proves nothing about the supremum.
#[derive(Debug, Clone, Serialize)]
pub struct MdpReport {
    pub label: &'static str,
    pub t: f64,
    pub levels: [u32; 2],
    pub samples: u64,
    pub seed: u64,
    pub root: (u32, String),
    pub max_ratio: f64,
    pub arg_square: Option<SquareReport>,
    pub per_level: Vec<LevelMax>,
}

struct Sample {
    level: u32,
    resolution: u32,
    square: Square,
    count: u128,
    span: u128,
    ratio: f64,
}

impl CoverMeasure {
    fn sample(&self, t: f64, m: u32, resolution: u32, rng: &mut ChaCha8Rng) -> Result<Sample> {
        let b = self.model.base() as i128;
        let r = resolution + 1;
        let sub = ipow(b, r - self.n0)?;
        let u = rng.gen_range(0..sub);
        let xi = (self.k0 as i128)
            .checked_mul(sub)
            .and_then(|v| v.checked_add(u))
            .ok_or_else(|| Error::Overflow("sample abscissa".into()))?;
        // Centre on the level-L approximant over the sampled abscissa.
        let mut c = self.root;
        let digits = resolution - self.n0;
        let local = u / b;
        for j in (0..digits).rev() {
            let d = (local / ipow(b, j)?) % b;
            c = self.model.child(&c, d as u32)?;
        }
        let mid = self.model.midline(&c)?;
        let br = ipow(b, r)?;
        let bm = ipow(b, m)?;
        let half = BigRational::new(BigInt::from(1), BigInt::from(2 * bm));
        let xc = BigRational::new(BigInt::from(xi), BigInt::from(br));
        let square = Square::new(
            &xc - &half,
            mid.to_big() - &half,
            BigRational::new(BigInt::from(1), BigInt::from(bm)),
        )?;
        let count = self.hits(&self.root, &square.bounds()?, resolution, &mut max_cells())?;
        let span = (b as u128).pow(resolution - self.n0);
        let ratio = (count as f64 / span as f64) * (b as f64).powf(m as f64 * t);
        Ok(Sample {
            level: m,
            resolution,
            square,
            count,
            span,
            ratio,
        })
    }

    /// Samples `samples` squares of side `b^-m`, `m` cycling through
    /// `lo..=hi`, centred on the graph over uniform abscissae in the root
    /// column. Sample `i` draws from stream `i` of a ChaCha8 generator
    /// seeded with `seed`, so the report does not depend on scheduling.
    pub fn mdp_scan(&self, t: f64, lo: u32, hi: u32, samples: u64, seed: u64) -> Result<MdpReport> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "exponent t must be finite and >= 0, got {t}"
            )));
        }
        if lo > hi || lo < self.n0 {
            return Err(Error::InvalidArgument(format!(
                "levels {lo}..{hi} must be non-empty and not above the root level {}",
                self.n0
            )));
        }
        let levels: Vec<u32> = (lo..=hi).collect();
        let resolutions = levels.iter().map(|&m| self.resolution(m)).collect::<Result<Vec<_>>>()?;
        let results: Vec<Sample> = (0..samples)
            .into_par_iter()
            .map(|i| {
                let j = (i % levels.len() as u64) as usize;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i);
                self.sample(t, levels[j], resolutions[j], &mut rng)
            })
            .collect::<Result<_>>()?;

        let mut best: Option<(u64, &Sample)> = None;
        let mut per_level: Vec<LevelMax> = levels.iter().map(|&level| LevelMax { level, max_ratio: 0.0 }).collect();
        for (i, s) in results.iter().enumerate() {
            let slot = &mut per_level[(s.level - lo) as usize];
            slot.max_ratio = slot.max_ratio.max(s.ratio);
            if best.is_none_or(|(_, b)| s.ratio > b.ratio) {
                best = Some((i as u64, s));
            }
        }
        Ok(MdpReport {
            label: "sampled upper-ratio witness (not a proof)",
            t,
            levels: [lo, hi],
            samples,
            seed,
            root: (self.n0, self.k0.to_string()),
            max_ratio: best.map_or(0.0, |(_, s)| s.ratio),
            arg_square: best.map(|(i, s)| SquareReport {
                sample: i,
                level: s.level,
                resolution: s.resolution,
                x0: s.square.x0.to_string(),
                y0: s.square.y0.to_string(),
                side: s.square.side.to_string(),
                measure: BigRational::new(BigInt::from(s.count), BigInt::from(s.span)).to_string(),
                ratio: s.ratio,
            }),
            per_level,
        })
    }
}

/// `μ̃(S) / side^t` as a float, for squares given exactly.
pub fn ratio(mu: &BigRational, side: &BigRational, t: f64) -> f64 {
    mu.to_f64().unwrap_or(f64::NAN) / side.to_f64().unwrap_or(f64::NAN).powf(t)
}
