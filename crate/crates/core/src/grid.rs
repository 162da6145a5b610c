//! Uniform cubical grids over a box domain.
//!
//! Cell ids are row-major with axis 0 varying fastest. Cell boundaries are
//! computed by a single formula, so neighbouring cells share bit-identical
//! faces and refinement by axis-doubling reproduces the coarse faces.

use alloc::vec;
use alloc::vec::Vec;

use crate::boxset::BoxSet;
use crate::error::GridError;
use crate::interval::Interval;
use crate::ivec::IntervalVector;

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    domain: IntervalVector,
    subdivisions: Vec<usize>,
    strides: Vec<usize>,
    count: usize,
}

impl Grid {
    pub fn new(domain: IntervalVector, subdivisions: Vec<usize>) -> Result<Grid, GridError> {
        if subdivisions.len() != domain.dim() || subdivisions.contains(&0) {
            return Err(GridError::BadSubdivisions);
        }
        if domain.iter().any(|c| c.width() <= 0.0) {
            return Err(GridError::DegenerateDomain);
        }
        let mut strides = Vec::with_capacity(subdivisions.len());
        let mut count = 1usize;
        for &s in &subdivisions {
            strides.push(count);
            count = count.checked_mul(s).ok_or(GridError::BadSubdivisions)?;
        }
        Ok(Grid {
            domain,
            subdivisions,
            strides,
            count,
        })
    }

    pub fn domain(&self) -> &IntervalVector {
        &self.domain
    }

    pub fn subdivisions(&self) -> &[usize] {
        &self.subdivisions
    }

    pub fn dim(&self) -> usize {
        self.subdivisions.len()
    }

    pub fn cell_count(&self) -> usize {
        self.count
    }

    /// Nominal cell width per axis.
    pub fn widths(&self) -> Vec<f64> {
        self.domain
            .iter()
            .zip(&self.subdivisions)
            .map(|(c, &n)| (c.hi() - c.lo()) / n as f64)
            .collect()
    }

    pub fn min_width(&self) -> f64 {
        self.widths().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Coordinate of the `k`-th face along `axis`, `0 <= k <= n`.
    pub fn boundary(&self, axis: usize, k: usize) -> f64 {
        let c = self.domain[axis];
        let n = self.subdivisions[axis];
        if k == 0 {
            c.lo()
        } else if k >= n {
            c.hi()
        } else {
            c.lo() + (c.hi() - c.lo()) * k as f64 / n as f64
        }
    }

    pub fn coords(&self, id: usize) -> Vec<usize> {
        debug_assert!(id < self.count);
        self.subdivisions
            .iter()
            .zip(&self.strides)
            .map(|(&n, &s)| (id / s) % n)
            .collect()
    }

    pub fn id(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    pub fn cell_box(&self, id: usize) -> IntervalVector {
        let c = self.coords(id);
        IntervalVector::new(
            c.iter()
                .enumerate()
                .map(|(axis, &k)| Interval::new(self.boundary(axis, k), self.boundary(axis, k + 1)).unwrap())
                .collect(),
        )
    }

    /// Index range of cells along `axis` needed to cover `[a, b]`.
    ///
    /// A cell is included when it overlaps the interval with positive
    /// length; degenerate intervals lying on a face select both adjacent
    /// cells. The returned cells always cover `[a, b] ∩ domain`.
    fn axis_range(&self, axis: usize, a: f64, b: f64) -> (usize, usize) {
        let n = self.subdivisions[axis];
        let c = self.domain[axis];
        let guess = |v: f64| -> usize {
            let t = (v - c.lo()) / (c.hi() - c.lo()) * n as f64;
            if t <= 0.0 {
                0
            } else {
                (libm::floor(t) as usize).min(n - 1)
            }
        };
        // first cell: largest k with boundary(k) <= a
        let mut lo = guess(a);
        while lo > 0 && self.boundary(axis, lo) > a {
            lo -= 1;
        }
        while lo + 1 < n && self.boundary(axis, lo + 1) <= a {
            lo += 1;
        }
        // last cell: smallest k with boundary(k+1) >= b
        let mut hi = guess(b);
        while hi + 1 < n && self.boundary(axis, hi + 1) < b {
            hi += 1;
        }
        while hi > 0 && self.boundary(axis, hi) >= b {
            hi -= 1;
        }
        (lo.min(hi), lo.max(hi))
    }

    /// Cells covering `bx ∩ domain` (positive-overlap rule), sorted.
    pub fn cells_overlapping(&self, bx: &IntervalVector) -> BoxSet {
        let Some(clipped) = bx.intersect(&self.domain) else {
            return BoxSet::empty(self.count);
        };
        let ranges: Vec<(usize, usize)> = clipped
            .iter()
            .enumerate()
            .map(|(axis, c)| self.axis_range(axis, c.lo(), c.hi()))
            .collect();
        let mut ids = Vec::new();
        let mut cur: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        loop {
            ids.push(self.id(&cur));
            let mut axis = 0;
            loop {
                if axis == cur.len() {
                    return BoxSet::from_ids(self.count, ids);
                }
                if cur[axis] < ranges[axis].1 {
                    cur[axis] += 1;
                    break;
                }
                cur[axis] = ranges[axis].0;
                axis += 1;
            }
        }
    }

    /// All cells whose closed box contains `x`.
    pub fn cells_containing(&self, x: &[f64]) -> BoxSet {
        if !self.domain.contains_point(x) {
            return BoxSet::empty(self.count);
        }
        let mut ids = Vec::new();
        let ranges: Vec<(usize, usize)> = x
            .iter()
            .enumerate()
            .map(|(axis, &v)| self.axis_range(axis, v, v))
            .collect();
        let mut cur: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        'outer: loop {
            let id = self.id(&cur);
            if self.cell_box(id).contains_point(x) {
                ids.push(id);
            }
            let mut axis = 0;
            loop {
                if axis == cur.len() {
                    break 'outer;
                }
                if cur[axis] < ranges[axis].1 {
                    cur[axis] += 1;
                    break;
                }
                cur[axis] = ranges[axis].0;
                axis += 1;
            }
        }
        BoxSet::from_ids(self.count, ids)
    }

    /// Calls `f` on every cell sharing at least a corner with `id`.
    pub fn for_each_neighbor(&self, id: usize, mut f: impl FnMut(usize)) {
        let base = self.coords(id);
        let n = base.len();
        let mut off = vec![-1i64; n];
        loop {
            if off.iter().any(|&o| o != 0) {
                let mut ok = true;
                let mut nid = 0;
                for axis in 0..n {
                    let c = base[axis] as i64 + off[axis];
                    if c < 0 || c >= self.subdivisions[axis] as i64 {
                        ok = false;
                        break;
                    }
                    nid += c as usize * self.strides[axis];
                }
                if ok {
                    f(nid);
                }
            }
            let mut axis = 0;
            loop {
                if axis == n {
                    return;
                }
                if off[axis] < 1 {
                    off[axis] += 1;
                    break;
                }
                off[axis] = -1;
                axis += 1;
            }
        }
    }

    /// True when `id` touches the boundary of the domain.
    pub fn on_domain_boundary(&self, id: usize) -> bool {
        self.coords(id)
            .iter()
            .zip(&self.subdivisions)
            .any(|(&c, &n)| c == 0 || c + 1 == n)
    }

    /// One-cell dilation within the grid.
    pub fn dilate(&self, set: &BoxSet) -> BoxSet {
        let mut mask = set.to_mask();
        for id in set.iter() {
            self.for_each_neighbor(id, |nb| mask[nb] = true);
        }
        BoxSet::from_mask(&mask)
    }

    /// Combinatorial closure of `set` relative to `carrier`.
    pub fn dilate_within(&self, set: &BoxSet, carrier: &BoxSet) -> BoxSet {
        self.dilate(set).intersection(carrier)
    }

    /// Combinatorial interior of `set` relative to `carrier`: cells of the
    /// set whose carrier neighbours all lie in the set.
    pub fn erode_within(&self, set: &BoxSet, carrier: &BoxSet) -> BoxSet {
        let inside = set.to_mask();
        let carrier_mask = carrier.to_mask();
        let ids = set
            .iter()
            .filter(|&id| {
                let mut ok = true;
                self.for_each_neighbor(id, |nb| {
                    if carrier_mask[nb] && !inside[nb] {
                        ok = false;
                    }
                });
                ok
            })
            .collect();
        BoxSet::from_ids(self.count, ids)
    }

    /// Interior of `set` in the unbounded lattice: cells whose full
    /// neighbourhood exists and lies in the set. Cells on the domain
    /// boundary are never interior.
    pub fn interior(&self, set: &BoxSet) -> BoxSet {
        let inside = set.to_mask();
        let ids = set
            .iter()
            .filter(|&id| {
                if self.on_domain_boundary(id) {
                    return false;
                }
                let mut ok = true;
                self.for_each_neighbor(id, |nb| ok &= inside[nb]);
                ok
            })
            .collect();
        BoxSet::from_ids(self.count, ids)
    }

    /// Grid with every subdivision count doubled.
    pub fn refine(&self) -> Grid {
        Grid::new(self.domain.clone(), self.subdivisions.iter().map(|s| s * 2).collect())
            .expect("doubling keeps a valid grid")
    }

    /// Cell of `coarse` containing fine cell `id` of `coarse.refine()`.
    pub fn parent_of(&self, coarse: &Grid, id: usize) -> usize {
        let c: Vec<usize> = self.coords(id).iter().map(|k| k / 2).collect();
        coarse.id(&c)
    }

    /// Union of the cells of `set` mapped to the refined grid.
    pub fn refine_set(&self, fine: &Grid, set: &BoxSet) -> BoxSet {
        let ids = (0..fine.cell_count())
            .filter(|&id| set.contains(fine.parent_of(self, id)))
            .collect();
        BoxSet::from_ids(fine.cell_count(), ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> Grid {
        Grid::new(IntervalVector::from_bounds(&[0.0], &[1.0]).unwrap(), vec![n]).unwrap()
    }

    fn bx(lo: f64, hi: f64) -> IntervalVector {
        IntervalVector::from_bounds(&[lo], &[hi]).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        let d = IntervalVector::from_bounds(&[0.0], &[1.0]).unwrap();
        assert_eq!(Grid::new(d.clone(), vec![0]), Err(GridError::BadSubdivisions));
        assert_eq!(Grid::new(d, vec![2, 2]), Err(GridError::BadSubdivisions));
        let flat = IntervalVector::from_bounds(&[0.0], &[0.0]).unwrap();
        assert_eq!(Grid::new(flat, vec![2]), Err(GridError::DegenerateDomain));
    }

    #[test]
    fn id_coords_bijection() {
        let g = Grid::new(IntervalVector::from_bounds(&[0.0, 0.0], &[1.0, 2.0]).unwrap(), vec![3, 5]).unwrap();
        for id in 0..g.cell_count() {
            assert_eq!(g.id(&g.coords(id)), id);
        }
        assert_eq!(g.coords(4), vec![1, 1]);
    }

    #[test]
    fn cells_tile_the_domain() {
        let g = unit(10);
        for id in 0..9 {
            assert_eq!(g.cell_box(id)[0].hi(), g.cell_box(id + 1)[0].lo());
        }
        assert_eq!(g.cell_box(0)[0].lo(), 0.0);
        assert_eq!(g.cell_box(9)[0].hi(), 1.0);
    }

    #[test]
    fn overlap_rule_excludes_touching_neighbours() {
        let g = unit(10);
        let c3 = g.cell_box(3);
        assert_eq!(g.cells_overlapping(&c3).ids(), &[3]);
        assert_eq!(g.cells_overlapping(&bx(0.15, 0.25)).ids(), &[1, 2]);
        // point on a face selects both sides
        let face = g.boundary(0, 4);
        assert_eq!(g.cells_overlapping(&bx(face, face)).ids(), &[3, 4]);
        assert_eq!(g.cells_overlapping(&bx(1.0, 1.0)).ids(), &[9]);
        assert!(g.cells_overlapping(&bx(1.05, 1.15)).is_empty());
        assert_eq!(g.cells_overlapping(&bx(0.95, 1.05)).ids(), &[9]);
    }

    #[test]
    fn containing_cells_on_faces() {
        let g = unit(10);
        assert_eq!(g.cells_containing(&[g.boundary(0, 4)]).ids(), &[3, 4]);
        assert_eq!(g.cells_containing(&[0.55]).ids(), &[5]);
        assert!(g.cells_containing(&[1.5]).is_empty());
    }

    #[test]
    fn dilation_and_erosion() {
        let g = Grid::new(IntervalVector::from_bounds(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), vec![4, 4]).unwrap();
        let centre = BoxSet::from_ids(16, vec![g.id(&[1, 1])]);
        assert_eq!(g.dilate(&centre).len(), 9);
        let all = BoxSet::full(16);
        assert_eq!(g.erode_within(&all, &all), all);
        assert_eq!(g.interior(&all).len(), 4);
        let block = g.dilate(&centre);
        // erosion is relative: the grid edge does not eat into the block
        assert_eq!(g.erode_within(&block, &all).ids(), &[0, 1, 4, 5]);
        assert_eq!(g.interior(&block), centre);
    }

    #[test]
    fn refinement_preserves_faces() {
        let g = Grid::new(IntervalVector::from_bounds(&[-1.0], &[1.0]).unwrap(), vec![7]).unwrap();
        let f = g.refine();
        for k in 0..=7 {
            assert_eq!(g.boundary(0, k), f.boundary(0, 2 * k));
        }
        assert_eq!(f.parent_of(&g, 13), 6);
    }
}
