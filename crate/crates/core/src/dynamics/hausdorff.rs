//! Hausdorff distance between unions of grid cells.
//!
//! The directed distance `sup_{p in |P|} d(p, |Q|)` is evaluated on a
//! lattice of quarter-cell spacing (cell corners included). In one
//! dimension the supremum over a cell is attained at a lattice point, so
//! the result is exact; in higher dimensions it can fall short of the true
//! value by at most one eighth of a cell diagonal.

use alloc::vec;
use alloc::vec::Vec;

use crate::boxset::BoxSet;
use crate::error::DynamicsError;
use crate::grid::Grid;
use crate::ivec::IntervalVector;

const SAMPLES_PER_AXIS: usize = 5;
const BRUTE_FORCE_LIMIT: usize = 64;

fn point_box_distance(p: &[f64], b: &IntervalVector) -> f64 {
    let mut s = 0.0;
    for (x, c) in p.iter().zip(b.iter()) {
        let d = if *x < c.lo() {
            c.lo() - x
        } else if *x > c.hi() {
            x - c.hi()
        } else {
            0.0
        };
        s += d * d;
    }
    libm::sqrt(s)
}

/// Distance from `p` to `|Q|`, searching outward ring by ring from the
/// cell containing `p`.
fn distance_to_cells(grid: &Grid, q: &BoxSet, q_mask: &[bool], p: &[f64]) -> f64 {
    if q.len() <= BRUTE_FORCE_LIMIT {
        return q
            .iter()
            .map(|c| point_box_distance(p, &grid.cell_box(c)))
            .fold(f64::INFINITY, f64::min);
    }
    let home = grid.coords(grid.cells_containing(p).ids()[0]);
    let subs = grid.subdivisions();
    let n = subs.len();
    let wmin = grid.min_width();
    let max_ring = subs.iter().copied().max().unwrap_or(1);
    let mut best = f64::INFINITY;
    for r in 0..=max_ring {
        // cells on ring r are separated from p's cell by r - 1 whole cells
        if r >= 1 && (r - 1) as f64 * wmin > best {
            break;
        }
        let r = r as i64;
        let mut off = vec![-r; n];
        loop {
            if off.iter().any(|o| o.abs() == r) {
                let mut coords = Vec::with_capacity(n);
                let mut ok = true;
                for axis in 0..n {
                    let c = home[axis] as i64 + off[axis];
                    if c < 0 || c >= subs[axis] as i64 {
                        ok = false;
                        break;
                    }
                    coords.push(c as usize);
                }
                if ok {
                    let id = grid.id(&coords);
                    if q_mask[id] {
                        best = best.min(point_box_distance(p, &grid.cell_box(id)));
                    }
                }
            }
            let mut axis = 0;
            loop {
                if axis == n {
                    break;
                }
                if off[axis] < r {
                    off[axis] += 1;
                    break;
                }
                off[axis] = -r;
                axis += 1;
            }
            if axis == n {
                break;
            }
        }
    }
    best
}

/// `sup_{p in |P|} d(p, |Q|)`; both sets must be non-empty.
pub fn directed_hausdorff(grid: &Grid, p: &BoxSet, q: &BoxSet) -> Result<f64, DynamicsError> {
    if p.is_empty() || q.is_empty() {
        return Err(DynamicsError::EmptyInput);
    }
    let q_mask = q.to_mask();
    let n = grid.dim();
    let mut worst: f64 = 0.0;
    let mut idx = vec![0usize; n];
    let mut point = vec![0.0; n];
    for cell in p.iter().filter(|&c| !q_mask[c]) {
        let b = grid.cell_box(cell);
        idx.iter_mut().for_each(|i| *i = 0);
        loop {
            for axis in 0..n {
                let c = b[axis];
                let t = idx[axis] as f64 / (SAMPLES_PER_AXIS - 1) as f64;
                point[axis] = if idx[axis] == SAMPLES_PER_AXIS - 1 {
                    c.hi()
                } else {
                    c.lo() + (c.hi() - c.lo()) * t
                };
            }
            worst = worst.max(distance_to_cells(grid, q, &q_mask, &point));
            let mut axis = 0;
            loop {
                if axis == n {
                    break;
                }
                if idx[axis] + 1 < SAMPLES_PER_AXIS {
                    idx[axis] += 1;
                    break;
                }
                idx[axis] = 0;
                axis += 1;
            }
            if axis == n {
                break;
            }
        }
    }
    Ok(worst)
}

/// Hausdorff distance between `|P|` and `|Q|` in state-space units.
pub fn box_hausdorff(grid: &Grid, p: &BoxSet, q: &BoxSet) -> Result<f64, DynamicsError> {
    Ok(directed_hausdorff(grid, p, q)?.max(directed_hausdorff(grid, q, p)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> Grid {
        Grid::new(IntervalVector::from_bounds(&[0.0], &[1.0]).unwrap(), vec![n]).unwrap()
    }

    #[test]
    fn identical_sets_are_at_distance_zero() {
        let g = line(10);
        let p = BoxSet::from_ids(10, vec![1, 4, 5]);
        assert_eq!(box_hausdorff(&g, &p, &p).unwrap(), 0.0);
    }

    #[test]
    fn two_segments() {
        let g = line(10);
        let p = BoxSet::from_ids(10, vec![0]);
        let q = BoxSet::from_ids(10, vec![2]);
        let d = box_hausdorff(&g, &p, &q).unwrap();
        assert!((d - 0.2).abs() < 1e-15);
    }

    #[test]
    fn gap_midpoint_is_found() {
        // P = [0, 1], Q = [0, 0.1] ∪ [0.9, 1]; worst point 0.5 at distance 0.4
        let g = line(10);
        let p = BoxSet::full(10);
        let q = BoxSet::from_ids(10, vec![0, 9]);
        let d = directed_hausdorff(&g, &p, &q).unwrap();
        assert!((d - 0.4).abs() < 1e-15);
    }

    #[test]
    fn ring_search_matches_brute_force() {
        let g = Grid::new(IntervalVector::from_bounds(&[0.0, 0.0], &[1.0, 2.0]).unwrap(), vec![20, 30]).unwrap();
        let q = BoxSet::from_ids(600, (0..600).filter(|i| i % 3 == 0).collect());
        assert!(q.len() > BRUTE_FORCE_LIMIT);
        let mask = q.to_mask();
        for p in [[0.5, 1.0], [0.93, 0.07], [0.0, 2.0], [0.31, 1.77]] {
            let brute = q
                .iter()
                .map(|c| point_box_distance(&p, &g.cell_box(c)))
                .fold(f64::INFINITY, f64::min);
            assert_eq!(distance_to_cells(&g, &q, &mask, &p), brute);
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        let g = line(4);
        assert_eq!(
            box_hausdorff(&g, &BoxSet::empty(4), &BoxSet::full(4)),
            Err(DynamicsError::EmptyInput)
        );
    }
}
