//! Invariant parts, limit sets, attractors, dual repellers and
//! attractor-repeller decompositions computed on box-map graphs.
//!
//! Topological notions are replaced by their one-cell lattice analogs:
//! the closure of `U` relative to a carrier `S` is the Moore dilation of `U`
//! intersected with `S`, and its interior is the set of cells of `U` whose
//! carrier neighbours all lie in `U`.

use alloc::vec::Vec;

use crate::boxmap::BoxMapGraph;
use crate::boxset::BoxSet;
use crate::digraph::Digraph;
use crate::error::DynamicsError;
use crate::grid::Grid;
use crate::interval::Interval;

mod hausdorff;

pub use hausdorff::{box_hausdorff, directed_hausdorff};

/// Graph on grid cells with a carrier set; implemented by full box maps
/// (carrier = every cell) and by restricted graphs.
pub trait CellGraph {
    fn grid(&self) -> &Grid;
    fn digraph(&self) -> &Digraph;
    fn carrier_mask(&self) -> Vec<bool>;
}

impl CellGraph for BoxMapGraph {
    fn grid(&self) -> &Grid {
        BoxMapGraph::grid(self)
    }

    fn digraph(&self) -> &Digraph {
        BoxMapGraph::digraph(self)
    }

    fn carrier_mask(&self) -> Vec<bool> {
        alloc::vec![true; self.grid().cell_count()]
    }
}

/// A box map restricted to a carrier set `S`: only edges with both ends in
/// `S` survive, so orbits are followed only while they stay in `S`.
///
/// A single step cannot tell whether a solution briefly left `|S|` inside
/// one cell, so this over-approximates the restricted solution map.
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictedGraph {
    grid: Grid,
    carrier: BoxSet,
    graph: Digraph,
}

impl RestrictedGraph {
    pub fn carrier(&self) -> &BoxSet {
        &self.carrier
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn transpose(&self) -> RestrictedGraph {
        RestrictedGraph {
            grid: self.grid.clone(),
            carrier: self.carrier.clone(),
            graph: self.graph.transpose(),
        }
    }

    /// Combinatorial closure of `u` in the carrier.
    pub fn closure(&self, u: &BoxSet) -> BoxSet {
        self.grid.dilate_within(u, &self.carrier)
    }

    /// Combinatorial interior of `u` in the carrier.
    pub fn interior(&self, u: &BoxSet) -> BoxSet {
        self.grid.erode_within(&u.intersection(&self.carrier), &self.carrier)
    }
}

impl CellGraph for RestrictedGraph {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn digraph(&self) -> &Digraph {
        &self.graph
    }

    fn carrier_mask(&self) -> Vec<bool> {
        self.carrier.to_mask()
    }
}

/// Restricts `graph` to the cells of `s`.
pub fn restrict(graph: &BoxMapGraph, s: &BoxSet) -> RestrictedGraph {
    let mask = s.to_mask();
    RestrictedGraph {
        grid: graph.grid().clone(),
        carrier: s.clone(),
        graph: graph.digraph().induced(&mask),
    }
}

fn and_mask(set: &BoxSet, carrier: &[bool]) -> Vec<bool> {
    let mut m = set.to_mask();
    for (a, c) in m.iter_mut().zip(carrier) {
        *a &= *c;
    }
    m
}

/// Cells of `n` on a bi-infinite path inside `n` (and inside the carrier).
pub fn invariant_part(graph: &impl CellGraph, n: &BoxSet) -> BoxSet {
    let within = and_mask(n, &graph.carrier_mask());
    BoxSet::from_mask(&graph.digraph().invariant_part(&within))
}

/// Forward-reachable cells of `u` within the carrier, `u` included.
pub fn forward_reach(graph: &impl CellGraph, u: &BoxSet) -> BoxSet {
    let carrier = graph.carrier_mask();
    BoxSet::from_mask(&graph.digraph().reach(u.iter(), &carrier))
}

/// Outer approximation of the limit set of `u`: the invariant part of its
/// forward reach.
pub fn omega_limit(graph: &impl CellGraph, u: &BoxSet) -> BoxSet {
    let carrier = graph.carrier_mask();
    let d = graph.digraph();
    let reach = d.reach(u.iter(), &carrier);
    BoxSet::from_mask(&d.invariant_part(&reach))
}

/// Backward-time limit set: the forward limit set on the transpose.
pub fn alpha_limit(rg: &RestrictedGraph, u: &BoxSet) -> BoxSet {
    omega_limit(&rg.transpose(), u)
}

/// Result of an isolation check.
#[derive(Clone, Debug, PartialEq)]
pub struct IsolationCertificate {
    pub neighborhood: BoxSet,
    pub invariant: BoxSet,
    /// True when a full layer of `N`-cells separates the invariant part
    /// from the boundary of `N`. The domain boundary is part of that
    /// boundary, so invariant cells touching it never pass.
    pub moat_verified: bool,
    pub lambda: Interval,
}

impl IsolationCertificate {
    pub fn passed(&self) -> bool {
        self.moat_verified
    }
}

/// Computes `Inv(N)` and checks that it sits in the lattice interior of `N`.
pub fn is_isolating(graph: &BoxMapGraph, n: &BoxSet) -> IsolationCertificate {
    let invariant = invariant_part(graph, n);
    let moat_verified = invariant.is_subset(&graph.grid().interior(n));
    IsolationCertificate {
        neighborhood: n.clone(),
        invariant,
        moat_verified,
        lambda: graph.params().lambda,
    }
}

/// Default step budget for attractor searches: four times the carrier size.
pub fn default_k_max(rg: &RestrictedGraph) -> usize {
    4 * rg.carrier().len().max(1)
}

/// An attractor found from a neighbourhood `U`.
#[derive(Clone, Debug, PartialEq)]
pub struct Attractor {
    pub set: BoxSet,
    pub k_star: usize,
}

/// Lazily iterated images `G^j(cl U)`, tested against `int U`.
struct ImageWindow<'a> {
    rg: &'a RestrictedGraph,
    current: Vec<bool>,
    target: Vec<bool>,
}

impl ImageWindow<'_> {
    fn new<'a>(rg: &'a RestrictedGraph, u: &BoxSet) -> ImageWindow<'a> {
        let u = u.intersection(rg.carrier());
        ImageWindow {
            current: rg.closure(&u).to_mask(),
            target: rg.interior(&u).to_mask(),
            rg,
        }
    }

    /// Advances one step; returns (inside interior, image empty).
    fn step(&mut self) -> (bool, bool) {
        self.current = self.rg.graph.image(&self.current);
        let mut empty = true;
        let mut inside = true;
        for (c, t) in self.current.iter().zip(&self.target) {
            if *c {
                empty = false;
                inside &= *t;
            }
        }
        (inside, empty)
    }
}

/// Smallest `k <= k_max` such that `G^j(cl U) ⊆ int U` for every `j` in
/// `k..=2k-1`, if any.
///
/// A single step `k` is not enough on a finite graph: periodic image
/// sequences can dip into `int U` at one step and leave it again. The
/// window makes the condition self-propagating, since
/// `G^(k+i)(cl U) ⊆ G^i(cl U)` once `G^k(cl U) ⊆ cl U`, so every later
/// image also lies in `int U` and the limit set does too.
fn attracting_step(rg: &RestrictedGraph, u: &BoxSet, k_max: usize) -> Option<usize> {
    if k_max == 0 {
        return None;
    }
    let mut window = ImageWindow::new(rg, u);
    let mut k = 1;
    let mut j = 0;
    loop {
        j += 1;
        let (inside, empty) = window.step();
        if empty {
            // all later images are empty too
            return Some(k);
        }
        if !inside {
            k = j + 1;
            if k > k_max {
                return None;
            }
        } else if j >= 2 * k - 1 {
            return Some(k);
        }
    }
}

/// Attractor rule: if some iterate of the closure of `U` falls into the
/// interior of `U` and stays there, the limit set of `U` is an attractor
/// inside `int U`.
pub fn attractor_from(rg: &RestrictedGraph, u: &BoxSet, k_max: usize) -> Option<Attractor> {
    let k_star = attracting_step(rg, u, k_max)?;
    let u = u.intersection(rg.carrier());
    Some(Attractor {
        set: omega_limit(rg, &u),
        k_star,
    })
}

fn k_step_image(rg: &RestrictedGraph, u: &BoxSet, k: usize) -> Vec<bool> {
    let mut cur = u.intersection(rg.carrier()).to_mask();
    for _ in 0..k {
        cur = rg.graph.image(&cur);
    }
    cur
}

/// Forward set `W` and dual repeller `R = Inv(S \ W)` for an attractor
/// certified at step `k_star`.
fn dual_parts(rg: &RestrictedGraph, u: &BoxSet, k_star: usize) -> (BoxSet, BoxSet) {
    let carrier = rg.carrier_mask();
    let start = k_step_image(rg, u, k_star);
    let w = rg.graph.reach(start.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i), &carrier);
    let w = BoxSet::from_mask(&w);
    let complement = rg.carrier().difference(&w);
    let r = invariant_part(rg, &complement);
    (w, r)
}

/// Dual repeller of the attractor obtained from `U` at step `k_star`.
///
/// Fails with `PreconditionViolated` unless the attractor window actually
/// holds at `k_star`.
pub fn dual_repeller(rg: &RestrictedGraph, u: &BoxSet, k_star: usize) -> Result<BoxSet, DynamicsError> {
    if !window_holds(rg, u, k_star) {
        return Err(DynamicsError::PreconditionViolated);
    }
    Ok(dual_parts(rg, u, k_star).1)
}

fn window_holds(rg: &RestrictedGraph, u: &BoxSet, k: usize) -> bool {
    if k == 0 {
        return false;
    }
    let mut window = ImageWindow::new(rg, u);
    for j in 1..=2 * k - 1 {
        let (inside, empty) = window.step();
        if empty {
            return true;
        }
        if j >= k && !inside {
            return false;
        }
    }
    true
}

/// Attractor-repeller decomposition of an invariant carrier.
#[derive(Clone, Debug, PartialEq)]
pub struct ARDecomposition {
    pub s: BoxSet,
    pub a: BoxSet,
    pub r: BoxSet,
    pub c: BoxSet,
    /// Attracting neighbourhood actually used (`U ∩ S`).
    pub u: BoxSet,
    /// Forward set from which the repeller's neighbourhood was carved.
    pub w: BoxSet,
    pub k_star: usize,
}

/// Splits the carrier into an attractor `A`, its dual repeller `R` and the
/// connecting region `C = S \ (A ∪ R)`.
///
/// Cells of `C` are checked to limit onto `A` forward and onto `R`
/// backward, up to one cell of slack.
pub fn decompose(rg: &RestrictedGraph, u: &BoxSet, k_max: usize) -> Result<ARDecomposition, DynamicsError> {
    let s = rg.carrier().clone();
    if invariant_part(rg, &s) != s {
        return Err(DynamicsError::PreconditionViolated);
    }
    let u = u.intersection(&s);
    let attractor = attractor_from(rg, &u, k_max).ok_or(DynamicsError::NoAttractor { k_max })?;
    let (w, r) = dual_parts(rg, &u, attractor.k_star);
    let a = attractor.set;
    let c = s.difference(&a.union(&r));
    if !c.is_empty() {
        if !omega_limit(rg, &c).is_subset(&rg.closure(&a)) {
            return Err(DynamicsError::DecompositionInconsistent { side: "forward" });
        }
        if !alpha_limit(rg, &c).is_subset(&rg.closure(&r)) {
            return Err(DynamicsError::DecompositionInconsistent { side: "backward" });
        }
    }
    Ok(ARDecomposition {
        s,
        a,
        r,
        c,
        u,
        w,
        k_star: attractor.k_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ivec::IntervalVector;
    use crate::{BoxMapGraph, Params};
    use alloc::vec;

    /// Box map on a 1-D grid from an explicit adjacency list.
    fn line_graph(adj: Vec<Vec<usize>>) -> BoxMapGraph {
        let n = adj.len();
        let grid = Grid::new(IntervalVector::from_bounds(&[0.0], &[n as f64]).unwrap(), vec![n]).unwrap();
        BoxMapGraph::from_digraph(grid, 1.0, Params::default(), Digraph::from_adjacency(adj, vec![false; n]))
    }

    fn set(n: usize, ids: &[usize]) -> BoxSet {
        BoxSet::from_ids(n, ids.to_vec())
    }

    #[test]
    fn gradient_line_decomposes() {
        // repellers at both ends, attracting pair {3, 4} in the middle
        let g = line_graph(vec![
            vec![0, 1],
            vec![2],
            vec![3],
            vec![3, 4],
            vec![3, 4],
            vec![4],
            vec![5],
            vec![6, 7],
        ]);
        let s = invariant_part(&g, &BoxSet::full(8));
        assert_eq!(s, BoxSet::full(8));
        let rg = restrict(&g, &s);
        let d = decompose(&rg, &set(8, &[2, 3, 4, 5]), 32).unwrap();
        assert_eq!(d.k_star, 2);
        assert_eq!(d.a, set(8, &[3, 4]));
        assert_eq!(d.r, set(8, &[0, 7]));
        assert_eq!(d.c, set(8, &[1, 2, 5, 6]));
    }

    #[test]
    fn whole_carrier_is_an_attractor() {
        let g = line_graph(vec![vec![1], vec![0]]);
        let rg = restrict(&g, &BoxSet::full(2));
        let d = decompose(&rg, &BoxSet::full(2), 8).unwrap();
        assert_eq!(d.k_star, 1);
        assert_eq!(d.a, BoxSet::full(2));
        assert!(d.r.is_empty() && d.c.is_empty());
    }

    #[test]
    fn empty_neighbourhood_gives_empty_attractor() {
        let g = line_graph(vec![vec![0], vec![1]]);
        let rg = restrict(&g, &BoxSet::full(2));
        let d = decompose(&rg, &BoxSet::empty(2), 8).unwrap();
        assert!(d.a.is_empty());
        assert_eq!(d.r, BoxSet::full(2));
    }

    #[test]
    fn transient_dip_into_interior_is_rejected() {
        // U = {0..3}: cl U = {0..4}, int U = {0, 1, 2}. Images of cl U run
        // {8} -> {1} -> {9} -> {8} ..., touching int U only every third step.
        let g = line_graph(vec![
            vec![8],
            vec![9],
            vec![8],
            vec![8],
            vec![8],
            vec![5],
            vec![6],
            vec![7],
            vec![1],
            vec![8],
        ]);
        let rg = restrict(&g, &BoxSet::full(10));
        let u = set(10, &[0, 1, 2, 3]);
        assert!(attractor_from(&rg, &u, 40).is_none());
        assert!(!window_holds(&rg, &u, 2));
    }

    #[test]
    fn dual_repeller_checks_its_precondition() {
        let g = line_graph(vec![vec![1], vec![1], vec![1]]);
        let rg = restrict(&g, &BoxSet::full(3));
        assert_eq!(
            dual_repeller(&rg, &set(3, &[0]), 1),
            Err(DynamicsError::PreconditionViolated)
        );
    }

    #[test]
    fn isolation_needs_a_moat() {
        let g = line_graph(vec![vec![0], vec![2], vec![2], vec![4], vec![4]]);
        // invariant cells 0, 2, 4; cell 0 and 4 sit on the domain boundary
        let cert = is_isolating(&g, &BoxSet::full(5));
        assert!(!cert.passed());
        let cert = is_isolating(&g, &set(5, &[1, 2, 3]));
        assert_eq!(cert.invariant, set(5, &[2]));
        assert!(cert.passed());
    }

    #[test]
    fn restriction_drops_outgoing_edges() {
        let g = line_graph(vec![vec![1], vec![2], vec![2]]);
        let rg = restrict(&g, &set(3, &[0, 1]));
        assert_eq!(rg.edge_count(), 1);
        assert!(invariant_part(&rg, &BoxSet::full(3)).is_empty());
        assert_eq!(restrict(&g, &BoxSet::empty(3)).edge_count(), 0);
    }
}
