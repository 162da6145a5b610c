//! Reference systems used by tests, benchmarks and the bundled configs.
//!
//! Every system is declared over the full parameter family `[-1, 1]`;
//! systems without a `lambda` term simply ignore it.

use alloc::vec;
use alloc::vec::Vec;

use crate::inclusion::{Halfspace, Override, Params, PiecewiseInclusion, RegionPiece};
use crate::interval::Interval;
use crate::ivec::IntervalVector;
use crate::poly::Polynomial;

fn interval_domain(lo: f64, hi: f64) -> IntervalVector {
    IntervalVector::from_bounds(&[lo], &[hi]).unwrap()
}

fn build(domain: IntervalVector, pieces: Vec<RegionPiece>, overrides: Vec<Override>) -> PiecewiseInclusion {
    PiecewiseInclusion::new(domain, pieces, overrides, Params::FAMILY).expect("reference system is well formed")
}

/// `x' = 1` on `[0, 1]`: every solution leaves through the right end.
pub fn constant_drift() -> PiecewiseInclusion {
    build(
        interval_domain(0.0, 1.0),
        vec![RegionPiece::new(vec![], vec![Polynomial::constant(1, Interval::ONE)])],
        vec![],
    )
}

/// Constant field `F = value` on `[lo, hi]`.
pub fn constant_field(lo: f64, hi: f64, value: Interval) -> PiecewiseInclusion {
    build(
        interval_domain(lo, hi),
        vec![RegionPiece::new(vec![], vec![Polynomial::constant(1, value)])],
        vec![],
    )
}

/// Scalar switching system on `[-1, 1]`: at rest for `x < 0`, relaxing
/// towards 1 via `x' = 1 - x` for `x > 0`, and `F(0) = [0, 1]`.
pub fn sticky_switch() -> PiecewiseInclusion {
    let x = Polynomial::var(1, 0);
    let one = Polynomial::constant(1, Interval::ONE);
    build(
        interval_domain(-1.0, 1.0),
        vec![
            RegionPiece::new(vec![Halfspace::upper(1, 0, 0.0)], vec![Polynomial::zero(1)]),
            RegionPiece::new(vec![Halfspace::lower(1, 0, 0.0)], vec![one.sub(&x)]),
        ],
        vec![Override {
            region: interval_domain(0.0, 0.0),
            value: IntervalVector::new(vec![Interval::new(0.0, 1.0).unwrap()]),
        }],
    )
}

/// `x' = x^2 + lambda` on `[-1, 1]`.
pub fn saddle_node() -> PiecewiseInclusion {
    let x = Polynomial::var(1, 0);
    build(
        interval_domain(-1.0, 1.0),
        vec![RegionPiece::new(vec![], vec![x.pow(2).add(&Polynomial::lambda(1))])],
        vec![],
    )
}

/// Planar system with `r' = r (1 + lambda - r^2)`, `theta' = 1` on
/// `[-1.5, 1.5]^2`.
pub fn limit_cycle() -> PiecewiseInclusion {
    let x = Polynomial::var(2, 0);
    let y = Polynomial::var(2, 1);
    let l = Polynomial::lambda(2);
    // 1 + lambda - x^2 - y^2
    let radial = Polynomial::constant(2, Interval::ONE)
        .add(&l)
        .sub(&x.pow(2))
        .sub(&y.pow(2));
    let fx = x.mul(&radial).sub(&y);
    let fy = y.mul(&radial).add(&x);
    build(
        IntervalVector::from_bounds(&[-1.5, -1.5], &[1.5, 1.5]).unwrap(),
        vec![RegionPiece::new(vec![], vec![fx, fy])],
        vec![],
    )
}

/// `x' = -sign(x)` on `[-1, 1]`, with the sliding value `[-1, 1]` at 0
/// coming from the overlap of the two closed half-lines.
pub fn relay() -> PiecewiseInclusion {
    build(
        interval_domain(-1.0, 1.0),
        vec![
            RegionPiece::new(
                vec![Halfspace::upper(1, 0, 0.0)],
                vec![Polynomial::constant(1, Interval::ONE)],
            ),
            RegionPiece::new(
                vec![Halfspace::lower(1, 0, 0.0)],
                vec![Polynomial::constant(1, -Interval::ONE)],
            ),
        ],
        vec![],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limit_cycle_is_tangent_on_unit_circle() {
        let f = limit_cycle();
        let v = f.active_values(&[1.0, 0.0], 0.0);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0][0], Interval::ZERO);
        assert_eq!(v[0][1], Interval::ONE);
    }

    #[test]
    fn relay_slides_at_origin() {
        let f = relay();
        let h = f.evaluate_hull(&IntervalVector::point(&[0.0]), &Params::default()).unwrap();
        assert_eq!(h[0], Interval::SYMMETRIC_UNIT);
    }
}
