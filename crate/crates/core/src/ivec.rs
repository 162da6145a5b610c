//! Axis-aligned interval boxes in R^n.

use alloc::vec::Vec;
use core::fmt;
use core::ops::Index;

use crate::interval::Interval;

/// An axis-aligned box `[lo_0, hi_0] x ... x [lo_{n-1}, hi_{n-1}]`.
///
/// Boxes are never empty: operations that can produce an empty set return
/// `Option<IntervalVector>` and use `None` as the empty marker.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalVector {
    comps: Vec<Interval>,
}

impl IntervalVector {
    pub fn new(comps: Vec<Interval>) -> Self {
        IntervalVector { comps }
    }

    /// Builds a box from bound slices. `None` if lengths differ or any
    /// `lo[i] > hi[i]`.
    pub fn from_bounds(lo: &[f64], hi: &[f64]) -> Option<Self> {
        if lo.len() != hi.len() {
            return None;
        }
        lo.iter()
            .zip(hi)
            .map(|(&l, &h)| Interval::new(l, h))
            .collect::<Option<Vec<_>>>()
            .map(IntervalVector::new)
    }

    pub fn point(x: &[f64]) -> Self {
        IntervalVector::new(x.iter().map(|&v| Interval::point(v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn comps(&self) -> &[Interval] {
        &self.comps
    }

    pub fn comps_mut(&mut self) -> &mut [Interval] {
        &mut self.comps
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Interval> {
        self.comps.iter()
    }

    pub fn lo(&self) -> Vec<f64> {
        self.comps.iter().map(|c| c.lo()).collect()
    }

    pub fn hi(&self) -> Vec<f64> {
        self.comps.iter().map(|c| c.hi()).collect()
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.comps.iter().zip(x).all(|(c, &v)| c.contains(v))
    }

    pub fn subset_of(&self, other: &IntervalVector) -> bool {
        self.dim() == other.dim() && self.comps.iter().zip(&other.comps).all(|(a, b)| a.subset_of(*b))
    }

    pub fn intersects(&self, other: &IntervalVector) -> bool {
        self.comps.iter().zip(&other.comps).all(|(a, b)| a.intersects(*b))
    }

    pub fn intersect(&self, other: &IntervalVector) -> Option<IntervalVector> {
        self.comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.intersect(*b))
            .collect::<Option<Vec<_>>>()
            .map(IntervalVector::new)
    }

    pub fn hull(&self, other: &IntervalVector) -> IntervalVector {
        IntervalVector::new(self.comps.iter().zip(&other.comps).map(|(a, b)| a.hull(*b)).collect())
    }

    pub fn inflate(&self, factor: f64, eps: f64) -> IntervalVector {
        IntervalVector::new(self.comps.iter().map(|c| c.inflate(factor, eps)).collect())
    }

    /// `self + t * v` componentwise, with `t` an interval.
    pub fn add_scaled(&self, t: Interval, v: &IntervalVector) -> IntervalVector {
        IntervalVector::new(self.comps.iter().zip(&v.comps).map(|(&a, &b)| a + t * b).collect())
    }

    pub fn max_width(&self) -> f64 {
        self.comps.iter().map(|c| c.width()).fold(0.0, f64::max)
    }

    pub fn mid(&self) -> Vec<f64> {
        self.comps.iter().map(|c| c.mid()).collect()
    }

    /// Splits along the widest axis.
    pub fn bisect(&self) -> (IntervalVector, IntervalVector) {
        let (axis, _) = self
            .comps
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, c)| if c.width() > best.1 { (i, c.width()) } else { best });
        let c = self.comps[axis];
        let m = c.mid();
        let mut left = self.clone();
        let mut right = self.clone();
        left.comps[axis] = Interval::new(c.lo(), m).unwrap();
        right.comps[axis] = Interval::new(m, c.hi()).unwrap();
        (left, right)
    }
}

impl Index<usize> for IntervalVector {
    type Output = Interval;
    fn index(&self, i: usize) -> &Interval {
        &self.comps[i]
    }
}

impl fmt::Display for IntervalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.comps.iter().enumerate() {
            if i > 0 {
                f.write_str(" x ")?;
            }
            write!(f, "[{:?}, {:?}]", c.lo(), c.hi())?;
        }
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_validation() {
        assert!(IntervalVector::from_bounds(&[0.0, 1.0], &[1.0, 0.5]).is_none());
        assert!(IntervalVector::from_bounds(&[0.0], &[1.0, 2.0]).is_none());
        let b = IntervalVector::from_bounds(&[0.0, -1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(b.dim(), 2);
        assert!(b.contains_point(&[0.5, 0.0]));
    }

    #[test]
    fn disjoint_intersection_is_none() {
        let a = IntervalVector::from_bounds(&[0.0], &[0.1]).unwrap();
        let b = IntervalVector::from_bounds(&[0.2], &[0.3]).unwrap();
        assert!(a.intersect(&b).is_none());
        assert_eq!(a.hull(&b), IntervalVector::from_bounds(&[0.0], &[0.3]).unwrap());
    }

    #[test]
    fn bisect_widest_axis() {
        let b = IntervalVector::from_bounds(&[0.0, 0.0], &[1.0, 4.0]).unwrap();
        let (l, r) = b.bisect();
        assert_eq!(l[1].hi(), 2.0);
        assert_eq!(r[1].lo(), 2.0);
        assert_eq!(l[0], b[0]);
    }
}
