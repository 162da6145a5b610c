//! Piecewise-polynomial set-valued vector fields.
//!
//! A [`PiecewiseInclusion`] is a list of closed polyhedral regions, each
//! carrying a vector of polynomial right-hand sides, plus explicit box
//! overrides for prescribed set values on thin sets. Closed guards overlap on
//! shared facets, so the hull of all pieces meeting a box is automatically
//! the Filippov convexification there.
//!
//! Upper semicontinuity of the modelled field is assumed, not checked.

use alloc::vec::Vec;

use crate::error::InclusionError;
use crate::interval::{div_down, div_up, Interval};
use crate::ivec::IntervalVector;
use crate::poly::Polynomial;

/// Closed half-space `normal . x + offset <= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        Halfspace { normal, offset }
    }

    /// `x_axis <= value`
    pub fn upper(dim: usize, axis: usize, value: f64) -> Self {
        let mut normal = alloc::vec![0.0; dim];
        normal[axis] = 1.0;
        Halfspace::new(normal, -value)
    }

    /// `x_axis >= value`
    pub fn lower(dim: usize, axis: usize, value: f64) -> Self {
        let mut normal = alloc::vec![0.0; dim];
        normal[axis] = -1.0;
        Halfspace::new(normal, value)
    }

    /// Range of `normal . x + offset` over the box.
    fn range(&self, bx: &IntervalVector) -> Interval {
        let mut acc = Interval::point(self.offset);
        for (g, c) in self.normal.iter().zip(bx.iter()) {
            if *g != 0.0 {
                acc = acc + Interval::point(*g) * *c;
            }
        }
        acc
    }

    pub fn holds_at(&self, x: &[f64]) -> bool {
        self.range(&IntervalVector::point(x)).lo() <= 0.0
    }

    /// Shrinks `bx` to a box containing `bx ∩ {normal . x + offset <= 0}`.
    fn contract(&self, bx: &mut IntervalVector) -> bool {
        let full = self.range(bx);
        if full.lo() > 0.0 {
            return false;
        }
        for i in 0..self.normal.len() {
            let g = self.normal[i];
            if g == 0.0 {
                continue;
            }
            let mut rest = Interval::point(self.offset);
            for (j, (gj, c)) in self.normal.iter().zip(bx.iter()).enumerate() {
                if j != i && *gj != 0.0 {
                    rest = rest + Interval::point(*gj) * *c;
                }
            }
            // g * x_i <= -rest for some admissible rest
            let bound = -rest.lo();
            let comp = bx[i];
            let narrowed = if g > 0.0 {
                Interval::new(comp.lo(), comp.hi().min(div_up(bound, g)))
            } else {
                Interval::new(comp.lo().max(div_down(bound, g)), comp.hi())
            };
            match narrowed {
                Some(c) => bx.comps_mut()[i] = c,
                None => return false,
            }
        }
        true
    }

    /// True when the whole box satisfies the inequality.
    fn contains_box(&self, bx: &IntervalVector) -> bool {
        self.range(bx).hi() <= 0.0
    }
}

/// One branch of the field: a closed polyhedral region and its polynomial
/// right-hand side.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionPiece {
    pub guard: Vec<Halfspace>,
    pub rhs: Vec<Polynomial>,
}

impl RegionPiece {
    pub fn new(guard: Vec<Halfspace>, rhs: Vec<Polynomial>) -> Self {
        RegionPiece { guard, rhs }
    }

    /// Box containing `bx ∩ guard`, or `None` when they are disjoint.
    pub fn restrict(&self, bx: &IntervalVector) -> Option<IntervalVector> {
        let mut out = bx.clone();
        // two sweeps so that later inequalities can tighten earlier ones
        for _ in 0..2 {
            for h in &self.guard {
                if !h.contract(&mut out) {
                    return None;
                }
            }
        }
        Some(out)
    }

    pub fn contains_box(&self, bx: &IntervalVector) -> bool {
        self.guard.iter().all(|h| h.contains_box(bx))
    }

    pub fn holds_at(&self, x: &[f64]) -> bool {
        self.guard.iter().all(|h| h.holds_at(x))
    }

    pub fn eval(&self, bx: &IntervalVector, lambda: Interval) -> IntervalVector {
        IntervalVector::new(self.rhs.iter().map(|p| p.eval(bx, lambda)).collect())
    }
}

/// A prescribed set value on a (typically thin) box region, e.g. `F(0) = [0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Override {
    pub region: IntervalVector,
    pub value: IntervalVector,
}

/// Parameter value (or parameter range, for interval-mode continuation).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params {
    pub lambda: Interval,
}

impl Params {
    /// The admissible parameter interval `[-1, 1]`.
    pub const FAMILY: Interval = Interval::SYMMETRIC_UNIT;

    /// A single parameter value in `[-1, 1]`.
    pub fn at(lambda: f64) -> Result<Self, InclusionError> {
        Params::over(lambda, lambda)
    }

    /// A parameter interval inside `[-1, 1]`.
    pub fn over(lo: f64, hi: f64) -> Result<Self, InclusionError> {
        match Interval::new(lo, hi) {
            Some(l) if l.subset_of(Params::FAMILY) => Ok(Params { lambda: l }),
            _ => Err(InclusionError::ParameterOutOfRange { lo, hi }),
        }
    }

    pub fn is_point(&self) -> bool {
        self.lambda.is_point()
    }
}

impl Default for Params {
    fn default() -> Self {
        Params { lambda: Interval::ZERO }
    }
}

/// Piecewise-polynomial differential inclusion `x' ∈ F(x, lambda)` on a
/// compact box domain.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseInclusion {
    domain: IntervalVector,
    pieces: Vec<RegionPiece>,
    overrides: Vec<Override>,
    lambda_range: Interval,
}

/// Maximum bisection depth used when validating domain coverage.
pub const COVERAGE_DEPTH: usize = 14;

impl PiecewiseInclusion {
    /// Validates dimensions and coverage of the domain.
    pub fn new(
        domain: IntervalVector,
        pieces: Vec<RegionPiece>,
        overrides: Vec<Override>,
        lambda_range: Interval,
    ) -> Result<Self, InclusionError> {
        let n = domain.dim();
        if n == 0 {
            return Err(InclusionError::DimensionMismatch { expected: 1, found: 0 });
        }
        for p in &pieces {
            if p.rhs.len() != n {
                return Err(InclusionError::DimensionMismatch {
                    expected: n,
                    found: p.rhs.len(),
                });
            }
            if let Some(q) = p.rhs.iter().find(|q| q.nvars() != n) {
                return Err(InclusionError::DimensionMismatch {
                    expected: n,
                    found: q.nvars(),
                });
            }
            if let Some(h) = p.guard.iter().find(|h| h.normal.len() != n) {
                return Err(InclusionError::DimensionMismatch {
                    expected: n,
                    found: h.normal.len(),
                });
            }
        }
        for o in &overrides {
            if o.region.dim() != n || o.value.dim() != n {
                return Err(InclusionError::DimensionMismatch {
                    expected: n,
                    found: o.region.dim().max(o.value.dim()),
                });
            }
        }
        if !lambda_range.subset_of(Params::FAMILY) {
            return Err(InclusionError::ParameterOutOfRange {
                lo: lambda_range.lo(),
                hi: lambda_range.hi(),
            });
        }
        let inc = PiecewiseInclusion {
            domain,
            pieces,
            overrides,
            lambda_range,
        };
        inc.check_coverage(COVERAGE_DEPTH)?;
        Ok(inc)
    }

    pub fn domain(&self) -> &IntervalVector {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn pieces(&self) -> &[RegionPiece] {
        &self.pieces
    }

    pub fn overrides(&self) -> &[Override] {
        &self.overrides
    }

    pub fn lambda_range(&self) -> Interval {
        self.lambda_range
    }

    pub fn check_params(&self, params: &Params) -> Result<(), InclusionError> {
        if params.lambda.subset_of(self.lambda_range) {
            Ok(())
        } else {
            Err(InclusionError::ParameterOutOfRange {
                lo: params.lambda.lo(),
                hi: params.lambda.hi(),
            })
        }
    }

    /// Interval vector containing the convex hull of `F(x, lambda)` over
    /// `x ∈ bx ∩ domain`.
    pub fn evaluate_hull(&self, bx: &IntervalVector, params: &Params) -> Result<IntervalVector, InclusionError> {
        if bx.dim() != self.dim() {
            return Err(InclusionError::DimensionMismatch {
                expected: self.dim(),
                found: bx.dim(),
            });
        }
        self.check_params(params)?;
        let clipped = bx.intersect(&self.domain).ok_or(InclusionError::EmptyIntersection)?;
        let mut acc: Option<IntervalVector> = None;
        for piece in &self.pieces {
            if let Some(sub) = piece.restrict(&clipped) {
                let v = piece.eval(&sub, params.lambda);
                acc = Some(match acc {
                    Some(a) => a.hull(&v),
                    None => v,
                });
            }
        }
        for o in &self.overrides {
            if o.region.intersects(&clipped) {
                acc = Some(match acc {
                    Some(a) => a.hull(&o.value),
                    None => o.value.clone(),
                });
            }
        }
        acc.ok_or(InclusionError::UncoveredRegion { region: clipped })
    }

    /// Values of every piece (and override) active at the point `x`.
    /// Used by trajectory oracles; not part of the rigorous pipeline.
    pub fn active_values(&self, x: &[f64], lambda: f64) -> Vec<IntervalVector> {
        let pt = IntervalVector::point(x);
        let l = Interval::point(lambda);
        let mut out: Vec<IntervalVector> = self
            .pieces
            .iter()
            .filter(|p| p.holds_at(x))
            .map(|p| p.eval(&pt, l))
            .collect();
        out.extend(self.overrides.iter().filter(|o| o.region.contains_point(x)).map(|o| o.value.clone()));
        out
    }

    /// Checks that no sub-box of the domain is missed by every piece and
    /// override, bisecting up to `depth` times. Boxes still straddling
    /// several regions at full depth are accepted.
    pub fn check_coverage(&self, depth: usize) -> Result<(), InclusionError> {
        let mut stack = alloc::vec![(self.domain.clone(), 0usize)];
        while let Some((bx, d)) = stack.pop() {
            let fully = self.pieces.iter().any(|p| p.contains_box(&bx))
                || self.overrides.iter().any(|o| bx.subset_of(&o.region));
            if fully {
                continue;
            }
            let touched = self.pieces.iter().any(|p| p.restrict(&bx).is_some())
                || self.overrides.iter().any(|o| o.region.intersects(&bx));
            if !touched {
                return Err(InclusionError::UncoveredRegion { region: bx });
            }
            if d < depth && bx.max_width() > 0.0 {
                let (l, r) = bx.bisect();
                stack.push((r, d + 1));
                stack.push((l, d + 1));
            }
        }
        Ok(())
    }

    /// Largest `|F_i|` over the whole domain.
    pub fn max_speed(&self, params: &Params) -> Result<f64, InclusionError> {
        let f = self.evaluate_hull(&self.domain.clone(), params)?;
        Ok(f.iter().map(|c| c.mag()).fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems;

    fn bx(lo: f64, hi: f64) -> IntervalVector {
        IntervalVector::from_bounds(&[lo], &[hi]).unwrap()
    }

    #[test]
    fn sticky_switch_hull_at_origin() {
        let f = systems::sticky_switch();
        let h = f.evaluate_hull(&bx(-0.1, 0.1), &Params::default()).unwrap();
        assert!(h[0].lo() <= 0.0 && h[0].hi() >= 1.0);
    }

    #[test]
    fn sticky_switch_single_piece() {
        let f = systems::sticky_switch();
        let h = f.evaluate_hull(&bx(0.5, 0.6), &Params::default()).unwrap();
        assert_eq!(h[0], Interval::new(1.0 - 0.6, 0.5).unwrap());
    }

    #[test]
    fn constant_field() {
        let f = systems::constant_drift();
        for (lo, hi) in [(0.0, 0.1), (0.3, 0.9), (1.0, 1.0)] {
            assert_eq!(f.evaluate_hull(&bx(lo, hi), &Params::default()).unwrap()[0], Interval::ONE);
        }
    }

    #[test]
    fn box_outside_domain() {
        let f = systems::constant_drift();
        assert_eq!(
            f.evaluate_hull(&bx(2.0, 3.0), &Params::default()),
            Err(InclusionError::EmptyIntersection)
        );
    }

    #[test]
    fn gap_is_uncovered() {
        let domain = bx(0.0, 1.0);
        let piece = RegionPiece::new(
            alloc::vec![Halfspace::upper(1, 0, 0.5), Halfspace::lower(1, 0, 0.0)],
            alloc::vec![Polynomial::constant(1, Interval::ONE)],
        );
        let err = PiecewiseInclusion::new(domain, alloc::vec![piece], alloc::vec![], Params::FAMILY).unwrap_err();
        assert!(matches!(err, InclusionError::UncoveredRegion { .. }));
    }

    #[test]
    fn evaluate_reports_uncovered_box() {
        // coverage check skipped by building a field whose gap is below the
        // bisection resolution
        let domain = bx(0.0, 1.0);
        let piece = RegionPiece::new(
            alloc::vec![Halfspace::upper(1, 0, 0.5)],
            alloc::vec![Polynomial::constant(1, Interval::ONE)],
        );
        let inc = PiecewiseInclusion {
            domain,
            pieces: alloc::vec![piece],
            overrides: alloc::vec![],
            lambda_range: Params::FAMILY,
        };
        assert!(matches!(
            inc.evaluate_hull(&bx(0.7, 0.8), &Params::default()),
            Err(InclusionError::UncoveredRegion { .. })
        ));
    }

    #[test]
    fn saddle_node_at_lambda_one() {
        let f = systems::saddle_node();
        let h = f.evaluate_hull(&bx(0.0, 0.0), &Params::at(1.0).unwrap()).unwrap();
        assert_eq!(h[0], Interval::ONE);
    }

    #[test]
    fn parameter_outside_family() {
        assert!(Params::at(1.5).is_err());
        let f = systems::sticky_switch();
        let frozen = PiecewiseInclusion::new(
            f.domain().clone(),
            f.pieces().to_vec(),
            f.overrides().to_vec(),
            Interval::ZERO,
        )
        .unwrap();
        assert!(frozen.evaluate_hull(&bx(0.0, 0.1), &Params::at(0.5).unwrap()).is_err());
        assert!(frozen.evaluate_hull(&bx(0.0, 0.1), &Params::at(0.0).unwrap()).is_ok());
    }

    #[test]
    fn guard_contraction_tightens_switching_boxes() {
        let f = systems::sticky_switch();
        // right piece sees only [0, 0.1] -> 1 - x in [0.9, 1]
        let right = &f.pieces()[1];
        let sub = right.restrict(&bx(-0.1, 0.1)).unwrap();
        assert_eq!(sub[0].lo(), 0.0);
        assert!(right.restrict(&bx(-0.2, -0.1)).is_none());
    }
}
