//! Box maps: directed graphs on grid cells whose edges outer-approximate
//! the time-`tau` solution map of the inclusion, truncated at the domain
//! boundary.
//!
//! The default [`StepScheme::FirstOrder`] advances each cell by
//! `cell + tau * F(B)`, where `B` is a Picard a-priori enclosure of every
//! solution from the cell over `[0, tau]`. Images are clipped to the domain;
//! a cell whose image misses the domain entirely gets no out-edges.
//!
//! [`StepScheme::Centered`] is an opt-in tighter enclosure for smooth
//! regions. The cell is split into sub-boxes and each is advanced in
//! substeps, carried as a parallelepiped `c + A R`. Where a single
//! polynomial piece governs the whole a-priori box, a substep uses the
//! mean-value form `z(delta) + M (x - c) + delta M_B E`: `z` is a Taylor
//! enclosure of the solution from `c` for the point-coefficient part `g` of
//! the field, `M` and `M_B` enclose its variational matrix, and `E` bounds
//! the coefficient and parameter deviation from `g`. Elsewhere the substep
//! is halved a few times and finally falls back to the first-order step.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::boxset::BoxSet;
use crate::digraph::{Digraph, Direction};
use crate::error::BoxMapError;
use crate::grid::Grid;
use crate::inclusion::{Params, PiecewiseInclusion};
use crate::interval::Interval;
use crate::ivec::IntervalVector;

mod centered;

/// Radius growth factor per failed enclosure attempt.
pub const INFLATE_FACTOR: f64 = 1.1;
/// Absolute widening added per failed enclosure attempt.
pub const INFLATE_EPS: f64 = 1e-12;
/// Attempts before giving up on an enclosure.
pub const MAX_INFLATIONS: usize = 50;
/// Tightening passes applied once an enclosure is found.
const MAX_NARROWING: usize = 20;

/// Result of advancing one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct EnclosureStep {
    /// Box containing every solution from the cell on `[0, tau]` (while it
    /// stays in the domain).
    pub apriori: IntervalVector,
    /// Box containing every solution value at time `tau`, not clipped.
    pub image: IntervalVector,
    pub exited: bool,
}

fn check_tau(tau: f64) -> Result<(), BoxMapError> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(BoxMapError::InvalidStep(tau))
    }
}

/// Finds `B ⊇ cell` with `cell + [0, tau] * field(B) ⊆ B`.
///
/// Starts from the cell itself; on failure the next candidate is the
/// inflated Picard image of the current one. Once a valid `B` is
/// found it is tightened by re-applying the Picard operator while that
/// keeps shrinking it; every iterate stays a valid enclosure because the
/// operator is inclusion-monotone.
fn enclose<F>(cell: &IntervalVector, tau: f64, narrowing: usize, field: F) -> Result<IntervalVector, BoxMapError>
where
    F: Fn(&IntervalVector) -> Result<IntervalVector, BoxMapError>,
{
    let span = Interval::new(0.0, tau).unwrap();
    let picard = |b: &IntervalVector| field(b).map(|f| cell.add_scaled(span, &f));
    let mut b = cell.clone();
    for _ in 0..MAX_INFLATIONS {
        if b.iter().any(|c| !c.lo().is_finite() || !c.hi().is_finite()) {
            break;
        }
        let p = picard(&b)?;
        if p.subset_of(&b) {
            let mut tight = p;
            for _ in 0..narrowing {
                let next = picard(&tight)?;
                if next == tight {
                    break;
                }
                tight = next;
            }
            return Ok(tight);
        }
        b = p.inflate(INFLATE_FACTOR, INFLATE_EPS);
    }
    Err(BoxMapError::NoEnclosure {
        iterations: MAX_INFLATIONS,
    })
}

/// Finds `B ⊇ cell` with `cell + [0, tau] * F(B ∩ domain) ⊆ B`.
pub fn a_priori_enclosure(
    cell: &IntervalVector,
    tau: f64,
    inclusion: &PiecewiseInclusion,
    params: &Params,
) -> Result<IntervalVector, BoxMapError> {
    check_tau(tau)?;
    if !cell.subset_of(inclusion.domain()) {
        return Err(BoxMapError::CellOutsideDomain);
    }
    enclose(cell, tau, MAX_NARROWING, |b| {
        let clipped = b.intersect(inclusion.domain()).ok_or(BoxMapError::CellOutsideDomain)?;
        Ok(inclusion.evaluate_hull(&clipped, params)?)
    })
}

/// How cell images are enclosed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StepScheme {
    /// One first-order step per cell.
    #[default]
    FirstOrder,
    /// Mean-value steps on `subdivisions^dim` sub-boxes per cell, each
    /// advanced in `substeps` equal steps.
    Centered { substeps: usize, subdivisions: usize },
}

/// The parameters shared by every cell of one box-map build; obtained
/// from [`prepare`].
#[derive(Clone, Debug)]
pub struct MapConfig<'a> {
    pub grid: &'a Grid,
    pub tau: f64,
    pub inclusion: &'a PiecewiseInclusion,
    pub params: Params,
    pub scheme: StepScheme,
    /// Per-piece derivative data, filled for the centered scheme only.
    linearised: Vec<centered::Linearised<'a>>,
}

impl MapConfig<'_> {
    fn validate(&self) -> Result<(), BoxMapError> {
        check_tau(self.tau)?;
        if let StepScheme::Centered { substeps, subdivisions } = self.scheme {
            if substeps == 0 || subdivisions == 0 {
                return Err(BoxMapError::InvalidScheme);
            }
        }
        if self.grid.domain() != self.inclusion.domain() {
            return Err(BoxMapError::DomainMismatch);
        }
        self.inclusion.check_params(&self.params)?;
        Ok(())
    }
}

/// Advances one cell box by `tau`.
pub fn enclosure_step(cell: &IntervalVector, cfg: &MapConfig<'_>) -> Result<EnclosureStep, BoxMapError> {
    let domain = cfg.inclusion.domain();
    let apriori = a_priori_enclosure(cell, cfg.tau, cfg.inclusion, &cfg.params)?;
    let inside = apriori.intersect(domain).ok_or(BoxMapError::CellOutsideDomain)?;
    let f = cfg.inclusion.evaluate_hull(&inside, &cfg.params)?;
    let image = cell.add_scaled(Interval::point(cfg.tau), &f);
    let exited = leaves_domain(&image, &inside, cfg)?;
    Ok(EnclosureStep { apriori, image, exited })
}

/// An image poking through a face only counts as an exit when the field
/// can point outward somewhere on that face within the enclosure.
/// Otherwise the overshoot is an artefact of the first-order step and no
/// solution actually crosses the face.
fn leaves_domain(image: &IntervalVector, inside: &IntervalVector, cfg: &MapConfig<'_>) -> Result<bool, BoxMapError> {
    let domain = cfg.inclusion.domain();
    for axis in 0..domain.dim() {
        let d = domain[axis];
        for upper in [true, false] {
            let overshoot = if upper {
                image[axis].hi() > d.hi()
            } else {
                image[axis].lo() < d.lo()
            };
            if !overshoot {
                continue;
            }
            let face_value = if upper { d.hi() } else { d.lo() };
            if !inside[axis].contains(face_value) {
                // the enclosure never reaches this face
                return Ok(true);
            }
            let mut face = inside.clone();
            face.comps_mut()[axis] = Interval::point(face_value);
            let f = cfg.inclusion.evaluate_hull(&face, &cfg.params)?;
            let outward = if upper { f[axis].hi() > 0.0 } else { f[axis].lo() < 0.0 };
            if outward {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Targets and exit flag of one cell.
pub fn image_boxes(cell: usize, cfg: &MapConfig<'_>) -> Result<(BoxSet, bool), BoxMapError> {
    cfg.validate()?;
    cell_image(cell, cfg)
}

fn cell_image(cell: usize, cfg: &MapConfig<'_>) -> Result<(BoxSet, bool), BoxMapError> {
    if cell >= cfg.grid.cell_count() {
        return Err(BoxMapError::CellOutsideDomain);
    }
    let cell_box = cfg.grid.cell_box(cell);
    let wrap = |e| BoxMapError::Cell {
        cell,
        source: Box::new(e),
    };
    match cfg.scheme {
        StepScheme::FirstOrder => {
            let step = enclosure_step(&cell_box, cfg).map_err(wrap)?;
            Ok((cfg.grid.cells_overlapping(&step.image), step.exited))
        }
        StepScheme::Centered { substeps, subdivisions } => {
            let mut targets = BoxSet::empty(cfg.grid.cell_count());
            let mut exited = false;
            for sub in centered::split_box(&cell_box, subdivisions) {
                let (image, out) = centered::flow(&sub, substeps, cfg).map_err(wrap)?;
                exited |= out;
                if let Some(image) = image {
                    targets = targets.union(&cfg.grid.cells_overlapping(&image));
                }
            }
            Ok((targets, exited))
        }
    }
}

/// Outer approximation of the time-`tau` map on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxMapGraph {
    grid: Grid,
    tau: f64,
    params: Params,
    graph: Digraph,
}

impl BoxMapGraph {
    /// Assembles a graph from per-cell images listed in cell order.
    pub fn from_images(grid: Grid, tau: f64, params: Params, images: Vec<(BoxSet, bool)>) -> BoxMapGraph {
        assert_eq!(images.len(), grid.cell_count(), "one image per cell");
        let (adj, flags): (Vec<Vec<usize>>, Vec<bool>) =
            images.into_iter().map(|(set, exit)| (set.ids().to_vec(), exit)).unzip();
        BoxMapGraph {
            grid,
            tau,
            params,
            graph: Digraph::from_adjacency(adj, flags),
        }
    }

    /// Wraps an arbitrary graph on the grid's cells.
    pub fn from_digraph(grid: Grid, tau: f64, params: Params, graph: Digraph) -> BoxMapGraph {
        assert_eq!(graph.node_count(), grid.cell_count(), "one node per cell");
        BoxMapGraph {
            grid,
            tau,
            params,
            graph,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn digraph(&self) -> &Digraph {
        &self.graph
    }

    pub fn direction(&self) -> Direction {
        self.graph.direction()
    }

    pub fn targets(&self, cell: usize) -> &[usize] {
        self.graph.successors(cell)
    }

    pub fn exited(&self, cell: usize) -> bool {
        self.graph.flags()[cell]
    }

    /// Cells with the boundary flag set, in increasing order.
    pub fn flagged_cells(&self) -> Vec<usize> {
        (0..self.grid.cell_count()).filter(|&c| self.exited(c)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    /// The dual graph: edges reversed, exit flags kept as entry flags.
    pub fn transpose(&self) -> BoxMapGraph {
        BoxMapGraph {
            grid: self.grid.clone(),
            tau: self.tau,
            params: self.params,
            graph: self.graph.transpose(),
        }
    }
}

/// Builds the box map serially. Per-cell failures carry the cell id.
pub fn build_graph(grid: &Grid, inclusion: &PiecewiseInclusion, params: Params, tau: f64) -> Result<BoxMapGraph, BoxMapError> {
    build_graph_with(grid, inclusion, params, tau, StepScheme::FirstOrder)
}

/// [`build_graph`] with an explicit enclosure scheme.
pub fn build_graph_with(
    grid: &Grid,
    inclusion: &PiecewiseInclusion,
    params: Params,
    tau: f64,
    scheme: StepScheme,
) -> Result<BoxMapGraph, BoxMapError> {
    let cfg = prepare(grid, inclusion, params, tau, scheme)?;
    let images = (0..grid.cell_count())
        .map(|c| cell_image(c, &cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BoxMapGraph::from_images(grid.clone(), tau, params, images))
}

/// Validates a configuration and returns it; used by parallel builders that
/// call [`image_boxes_unchecked`] per cell.
pub fn prepare<'a>(
    grid: &'a Grid,
    inclusion: &'a PiecewiseInclusion,
    params: Params,
    tau: f64,
    scheme: StepScheme,
) -> Result<MapConfig<'a>, BoxMapError> {
    let mut cfg = MapConfig {
        grid,
        tau,
        inclusion,
        params,
        scheme,
        linearised: Vec::new(),
    };
    cfg.validate()?;
    if let StepScheme::Centered { .. } = scheme {
        cfg.linearised = inclusion
            .pieces()
            .iter()
            .map(|p| centered::Linearised::new(&p.rhs, params.lambda))
            .collect();
    }
    Ok(cfg)
}

/// [`image_boxes`] without re-validating the shared configuration.
pub fn image_boxes_unchecked(cell: usize, cfg: &MapConfig<'_>) -> Result<(BoxSet, bool), BoxMapError> {
    cell_image(cell, cfg)
}

/// Step heuristic: half the time needed to cross the narrowest cell at the
/// largest speed found on the domain. Falls back to the cell width when
/// the field vanishes.
pub fn default_tau(grid: &Grid, inclusion: &PiecewiseInclusion, params: &Params) -> Result<f64, BoxMapError> {
    let speed = inclusion.max_speed(params)?;
    let w = grid.min_width();
    Ok(if speed > 0.0 { w / (2.0 * speed) } else { w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems;
    use alloc::vec;

    fn bx(lo: f64, hi: f64) -> IntervalVector {
        IntervalVector::from_bounds(&[lo], &[hi]).unwrap()
    }

    fn unit_grid(n: usize) -> Grid {
        Grid::new(bx(0.0, 1.0), vec![n]).unwrap()
    }

    #[test]
    fn constant_drift_enclosure_is_exact_reach() {
        let f = systems::constant_drift();
        let b = a_priori_enclosure(&bx(0.0, 0.1), 0.1, &f, &Params::default()).unwrap();
        assert!(bx(0.0, 0.2).subset_of(&b));
        assert!(b.subset_of(&bx(0.0, 0.2 + 1e-12)));
    }

    #[test]
    fn full_cone_enclosure() {
        let f = systems::constant_field(-2.0, 2.0, Interval::SYMMETRIC_UNIT);
        let b = a_priori_enclosure(&bx(0.5, 0.5), 0.5, &f, &Params::default()).unwrap();
        assert!(bx(0.0, 1.0).subset_of(&b));
    }

    #[test]
    fn relaxing_field_enclosure_satisfies_containment() {
        // x' = 1 - x on the right half of the switching system
        let f = systems::sticky_switch();
        let cell = bx(0.5, 0.6);
        let b = a_priori_enclosure(&cell, 0.1, &f, &Params::default()).unwrap();
        let check = cell.add_scaled(
            Interval::new(0.0, 0.1).unwrap(),
            &f.evaluate_hull(&b, &Params::default()).unwrap(),
        );
        assert!(check.subset_of(&b));
        assert!(cell.subset_of(&b));
    }

    #[test]
    fn growth_beyond_inflation_budget() {
        // x' = x^2 + 1 blows up; a huge step cannot be enclosed
        let f = systems::saddle_node();
        let g = Grid::new(bx(-1.0, 1.0), vec![4]).unwrap();
        let err = a_priori_enclosure(&g.cell_box(3), 50.0, &f, &Params::at(1.0).unwrap());
        // the domain clip bounds F, so the enclosure still exists; it is
        // simply very wide
        assert!(err.is_ok());
        assert_eq!(
            a_priori_enclosure(&g.cell_box(3), -1.0, &f, &Params::default()),
            Err(BoxMapError::InvalidStep(-1.0))
        );
    }

    #[test]
    fn drift_leaves_through_the_right_end() {
        let f = systems::constant_drift();
        let g = unit_grid(10);
        let cfg = prepare(&g, &f, Params::default(), 0.15, StepScheme::FirstOrder).unwrap();
        let (t, exited) = image_boxes(9, &cfg).unwrap();
        assert!(t.is_empty());
        assert!(exited);
        let (t, exited) = image_boxes(0, &cfg).unwrap();
        assert!(t.contains(1) && t.contains(2));
        assert!(!exited);
    }

    #[test]
    fn stationary_single_cell() {
        let f = systems::constant_field(0.0, 1.0, Interval::ZERO);
        let g = unit_grid(1);
        let m = build_graph(&g, &f, Params::default(), 0.3).unwrap();
        assert_eq!(m.targets(0), &[0]);
        assert!(!m.exited(0));
    }

    #[test]
    fn domain_mismatch_is_rejected() {
        let f = systems::sticky_switch();
        let g = unit_grid(4);
        assert_eq!(
            build_graph(&g, &f, Params::default(), 0.1).unwrap_err(),
            BoxMapError::DomainMismatch
        );
    }

    #[test]
    fn transpose_round_trip() {
        let f = systems::constant_drift();
        let m = build_graph(&unit_grid(10), &f, Params::default(), 0.15).unwrap();
        let t = m.transpose();
        assert_eq!(t.direction(), Direction::Backward);
        assert!(t.targets(2).contains(&0));
        assert_eq!(t.transpose(), m);
    }
}
