//! Properties that tie several modules together: covers against exact
//! values, the measure against the covers, and the limit functions against
//! their scaling law.

use std::sync::OnceLock;

use fraclim_core::limitfn::{a_s_certified, a_s_exact, lambda_s_certified};
use fraclim_core::{build_family, BAdicPoint, CoverMeasure, Instance, RectFamily};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

fn instance(name: &'static str) -> &'static Instance {
    static RHO: OnceLock<Instance> = OnceLock::new();
    static TM: OnceLock<Instance> = OnceLock::new();
    static RS: OnceLock<Instance> = OnceLock::new();
    static DS: OnceLock<Instance> = OnceLock::new();
    let cell = match name {
        "rho" => &RHO,
        "tm_sum" => &TM,
        "rs_sum" => &RS,
        "tm_double_sum" => &DS,
        _ => unreachable!(),
    };
    cell.get_or_init(|| Instance::named(name).unwrap())
}

fn family(name: &'static str, n: u32) -> RectFamily {
    build_family(&instance(name).model, n).unwrap()
}

fn eps() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(1u64 << 40))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    // Every exactly known graph point inside a column sits in that column's rectangle.
    #[test]
    fn exact_points_lie_in_their_rectangle(
        which in 0usize..3,
        n in 1u32..6,
        extra in 0u32..6,
        raw in any::<u64>(),
    ) {
        let name = ["rho", "tm_sum", "rs_sum"][which];
        let inst = instance(name);
        let b = inst.model.base();
        let depth = n + extra;
        let top = (b as u64).pow(depth);
        let x = BAdicPoint::new(b, raw % top, depth).unwrap();
        let k = x.floor_scale(n).to_usize().unwrap();
        let r = family(name, n).rect(k);
        let y = a_s_exact(&inst.engine, inst.profile.as_ref().unwrap(), &x).unwrap();
        prop_assert!(r.y_lo <= y && y <= r.y_hi, "{name} x={x} y={y} rect=[{}, {}]", r.y_lo, r.y_hi);
    }

    // Without a closed-form tail, the certified enclosure must still meet the rectangle.
    #[test]
    fn certified_points_meet_their_rectangle(n in 1u32..5, extra in 0u32..4, raw in any::<u64>()) {
        let inst = instance("tm_double_sum");
        let depth = n + extra;
        let x = BAdicPoint::new(2, raw % (1u64 << depth), depth).unwrap();
        let k = x.floor_scale(n).to_usize().unwrap();
        let r = family("tm_double_sum", n).rect(k);
        let (v, _) = a_s_certified(&inst.engine, inst.profile.as_ref().unwrap(), &x, &eps()).unwrap();
        prop_assert!(v.lo() <= r.y_hi && v.hi() >= r.y_lo, "x={x} value={} rect=[{}, {}]", v.mid(), r.y_lo, r.y_hi);
    }

    // λ_s(x) and λ_s(b x) agree for the sums whose remainder is exact.
    #[test]
    fn limit_function_is_scale_invariant(which in 0usize..2, depth in 1u32..8, raw in 1u64..1 << 40) {
        let name = ["tm_sum", "rs_sum"][which];
        let inst = instance(name);
        let p = inst.profile.as_ref().unwrap();
        let b = inst.model.base() as u64;
        let x = BAdicPoint::new(b as u32, raw % (2 * b.pow(depth)) + 1, depth).unwrap();
        let a = lambda_s_certified(&inst.engine, p, &x, &eps()).unwrap();
        let c = lambda_s_certified(&inst.engine, p, &x.scale_up(1), &eps()).unwrap();
        prop_assert!(a.overlaps(&c), "{name} x={x}: {} vs {}", a.mid(), c.mid());
    }
}

/// The measure of a rectangle splits evenly over its children, and the
/// columns of a level add up to one.
#[test]
fn measure_is_uniform_on_columns() {
    let mu = CoverMeasure::new(instance("rho").model.clone(), 2, 5).unwrap();
    for m in 2..6u32 {
        let first = 5u128 << (2 * (m - 2));
        let total: BigRational = (first..first + (1u128 << (2 * (m - 2))))
            .map(|k| mu.rect_measure(m, k).unwrap())
            .sum();
        assert!(total.is_one(), "level {m}: {total}");
    }
    assert!(mu.rect_measure(4, 0).unwrap().is_zero());
}

/// The family at level n+1 refines the one at level n column by column.
#[test]
fn families_refine_for_every_instance() {
    for name in ["rho", "tm_sum", "rs_sum", "tm_double_sum"] {
        let b = instance(name).model.base() as usize;
        for n in 1..5 {
            let (p, c) = (family(name, n), family(name, n + 1));
            assert_eq!(c.len(), p.len() * b);
            for k in 0..c.len() {
                let (rp, rc) = (p.rect(k / b), c.rect(k));
                assert!(rp.y_lo <= rc.y_lo && rc.y_hi <= rp.y_hi, "{name} level {n} child {k}");
            }
        }
    }
}
