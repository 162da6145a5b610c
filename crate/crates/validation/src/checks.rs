//! Graph identities, example systems and soundness scoring used by the
//! property suites and the acceptance run. Every check returns `Err` with a
//! description instead of panicking so that callers can tally failures.

use multiflow_core::dynamics::{
    alpha_limit, attractor_from, decompose, default_k_max, dual_repeller, forward_reach, invariant_part,
    omega_limit, restrict,
};
use multiflow_core::{
    build_graph_with, systems, BoxMapGraph, BoxSet, Digraph, Grid, IntervalVector, Params, RestrictedGraph,
    StepScheme,
};
use rand::rngs::StdRng;
use rand::RngExt;

use crate::oracle::{cells_near, line_grid, sample_start, square_grid, Outcome, Reference};

pub type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Box map on a 1-D grid of `adj.len()` unit cells with the given edges.
pub fn graph_from(adj: Vec<Vec<usize>>) -> BoxMapGraph {
    let n = adj.len();
    let grid = line_grid(0.0, n as f64, n);
    BoxMapGraph::from_digraph(grid, 1.0, Params::default(), Digraph::from_adjacency(adj, vec![false; n]))
}

/// Turns raw edge draws into an adjacency list: a draw `(kind, v)` is a
/// local edge to within two cells unless `kind == 9`, in which case it
/// jumps to `v mod n`.
pub fn adjacency_from_draws(n: usize, draws: Vec<Vec<(u8, u16)>>) -> Vec<Vec<usize>> {
    draws
        .into_iter()
        .enumerate()
        .map(|(i, outs)| {
            outs.into_iter()
                .map(|(kind, v)| {
                    if kind < 9 {
                        (i as i64 + (v % 5) as i64 - 2).clamp(0, n as i64 - 1) as usize
                    } else {
                        v as usize % n
                    }
                })
                .collect()
        })
        .collect()
}

/// Graph on `1..=max_nodes` nodes with up to three out-edges per node.
pub fn random_graph(rng: &mut StdRng, max_nodes: usize) -> BoxMapGraph {
    let n = rng.random_range(1..=max_nodes);
    let draws = (0..n)
        .map(|_| {
            let k = rng.random_range(0..=3);
            (0..k).map(|_| (rng.random_range(0..10u8), rng.random::<u16>())).collect()
        })
        .collect();
    graph_from(adjacency_from_draws(n, draws))
}

/// Cells in `[a, b)` where the bounds are fractions of the cell count.
pub fn span(n: usize, a: f64, b: f64) -> BoxSet {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let lo = (lo * n as f64) as usize;
    let hi = ((hi * n as f64) as usize).max(lo + 1).min(n);
    BoxSet::from_ids(n, (lo..hi).collect())
}

/// `omega(U) ⊆ U` implies `Inv(U) = omega(U)`.
pub fn limit_set_invariance(rg: &RestrictedGraph, u: &BoxSet) -> Check {
    let om = omega_limit(rg, u);
    if !om.is_subset(u) {
        return Ok(());
    }
    ensure(invariant_part(rg, u) == om, || format!("Inv(U) differs from omega(U) for U = {:?}", u.ids()))
}

pub fn duality(rg: &RestrictedGraph, u: &BoxSet) -> Check {
    let t = rg.transpose();
    ensure(alpha_limit(rg, u) == omega_limit(&t, u), || "alpha differs from omega on the transpose".into())?;
    ensure(t.transpose() == *rg, || "transpose is not an involution".into())?;
    ensure(t.edge_count() == rg.edge_count(), || "transpose changed the edge count".into())
}

pub fn idempotence(rg: &RestrictedGraph, n: &BoxSet) -> Check {
    let once = invariant_part(rg, n);
    ensure(invariant_part(rg, &once) == once, || "Inv(Inv(N)) differs from Inv(N)".into())
}

/// Decomposes the carrier from `u`. `Ok(None)` when no decomposition is
/// certified; otherwise checks the partition and returns `(A, R)`.
pub fn partition(rg: &RestrictedGraph, u: &BoxSet) -> Result<Option<(BoxSet, BoxSet)>, String> {
    let Ok(d) = decompose(rg, u, default_k_max(rg)) else {
        return Ok(None);
    };
    ensure(
        d.a.intersection(&d.r).is_empty() && d.a.intersection(&d.c).is_empty() && d.r.intersection(&d.c).is_empty(),
        || "A, R and C overlap".into(),
    )?;
    ensure(d.a.union(&d.r).union(&d.c) == d.s, || "A, R and C do not cover S".into())?;
    Ok(Some((d.a, d.r)))
}

/// Runs the attractor pipeline on the transpose from a neighbourhood of
/// `r`; when it certifies, the dual of that attractor must contain `a` and
/// lie within one cell of it. `Ok(false)` when nothing certified.
pub fn dual_dual(rg: &RestrictedGraph, a: &BoxSet, r: &BoxSet) -> Result<bool, String> {
    let back = rg.transpose();
    let k_max = default_k_max(rg);
    for u_r in [r.clone(), rg.closure(r)] {
        if let Some(rep) = attractor_from(&back, &u_r, k_max) {
            let dual = dual_repeller(&back, &u_r, rep.k_star).map_err(|e| e.to_string())?;
            ensure(a.is_subset(&dual), || "dual of the repeller lost attractor cells".into())?;
            ensure(dual.is_subset(&rg.closure(a)), || "dual of the repeller is wider than one cell".into())?;
            return Ok(true);
        }
    }
    Ok(false)
}

/// Smallest superset of `u` closed under forward reach and one-cell
/// closure in the carrier. Such a set is a union of carrier components
/// mapped into itself, so it always certifies as an attracting
/// neighbourhood at step one.
pub fn trapping_hull(rg: &RestrictedGraph, u: &BoxSet) -> BoxSet {
    let mut cur = u.intersection(rg.carrier());
    loop {
        let next = rg.closure(&forward_reach(rg, &cur));
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

/// All graph identities on one graph; `a`, `b`, `c` pick the test sets as
/// fractions of the node count.
pub fn graph_identities(g: &BoxMapGraph, a: f64, b: f64, c: f64) -> Check {
    let n = g.grid().cell_count();
    let full = BoxSet::full(n);
    let whole = restrict(g, &full);
    let u = span(n, a, b);

    limit_set_invariance(&whole, &u)?;
    let closed = forward_reach(&whole, &u);
    ensure(omega_limit(&whole, &closed).is_subset(&closed), || "omega of a forward-closed set escaped".into())?;
    limit_set_invariance(&whole, &closed)?;

    let carrier = span(n, a.min(c), a.max(c)).union(&span(n, b, b));
    duality(&restrict(g, &carrier), &u)?;
    let t = g.transpose();
    ensure(t.transpose() == *g && t.edge_count() == g.edge_count(), || "graph transpose is not an involution".into())?;

    idempotence(&whole, &u)?;

    let s = invariant_part(g, &full);
    let rg = restrict(g, &s);
    let us = u.intersection(&s);
    if !us.is_empty() {
        let om = omega_limit(&rg, &us);
        ensure(!om.is_empty(), || "empty limit set in an invariant carrier".into())?;
        ensure(invariant_part(&rg, &om) == om, || "limit set is not invariant".into())?;
    }

    let found = match partition(&rg, &u)? {
        Some(d) => Some(d),
        None => partition(&rg, &trapping_hull(&rg, &u))?,
    };
    ensure(found.is_some() || s.is_empty(), || "trapping hull did not decompose".into())?;
    if let Some((attr, rep)) = found {
        dual_dual(&rg, &attr, &rep)?;
    }
    Ok(())
}

pub struct Example {
    pub name: &'static str,
    pub graph: BoxMapGraph,
    /// Attracting neighbourhood for the decomposition checks.
    pub u: BoxSet,
}

/// Cells whose centre lies strictly between radii `inner` and `outer`.
pub fn annulus(grid: &Grid, inner: f64, outer: f64) -> BoxSet {
    let ids = (0..grid.cell_count())
        .filter(|&c| {
            let m = grid.cell_box(c).mid();
            let r = m.iter().map(|v| v * v).sum::<f64>().sqrt();
            r > inner && r < outer
        })
        .collect();
    BoxSet::from_ids(grid.cell_count(), ids)
}

pub fn examples() -> Vec<Example> {
    let line = line_grid(-1.0, 1.0, 128);
    let one_d = |f, l: f64, tau| build_graph_with(&line, &f, Params::at(l).unwrap(), tau, StepScheme::FirstOrder).unwrap();
    let on_line = |lo: f64, hi: f64| line.cells_overlapping(&IntervalVector::from_bounds(&[lo], &[hi]).unwrap());
    let unit = line_grid(0.0, 1.0, 32);
    let plane = square_grid(1.5, 32);
    let centered = StepScheme::Centered { substeps: 16, subdivisions: 1 };
    vec![
        Example { name: "sticky_switch", graph: one_d(systems::sticky_switch(), 0.0, 0.25), u: on_line(0.7, 1.0) },
        Example { name: "saddle_node", graph: one_d(systems::saddle_node(), -0.2, 0.5), u: on_line(-0.8, 0.0) },
        Example { name: "relay", graph: one_d(systems::relay(), 0.0, 0.25), u: on_line(-0.9, 0.9) },
        Example {
            name: "constant",
            graph: build_graph_with(&unit, &systems::constant_drift(), Params::default(), 0.1, StepScheme::FirstOrder)
                .unwrap(),
            u: BoxSet::full(32),
        },
        Example {
            name: "limit_cycle",
            graph: build_graph_with(&plane, &systems::limit_cycle(), Params::default(), 0.5, centered).unwrap(),
            u: annulus(&plane, 0.6, 1.45),
        },
    ]
}

/// Graph identities plus a certified decomposition and, where a repeller
/// exists, dual-dual containment.
pub fn example_identities(ex: &Example) -> Check {
    let n = ex.graph.grid().cell_count();
    let full = BoxSet::full(n);
    let whole = restrict(&ex.graph, &full);
    let s = invariant_part(&ex.graph, &full);
    let rg = restrict(&ex.graph, &s);
    for u in [ex.u.clone(), full.clone(), s.clone()] {
        limit_set_invariance(&rg, &u.intersection(&s))?;
        limit_set_invariance(&whole, &u)?;
        duality(&rg, &u)?;
        idempotence(&whole, &u)?;
    }
    match partition(&rg, &ex.u)? {
        None => Err(format!("{}: decomposition failed", ex.name)),
        Some((a, r)) if s.is_empty() => ensure(a.is_empty() && r.is_empty(), || "parts of an empty S".into()),
        Some((a, r)) if !r.is_empty() => {
            ensure(dual_dual(&rg, &a, &r)?, || format!("{}: repeller not certified on the transpose", ex.name))
        }
        Some(_) => Ok(()),
    }
}

/// Grid, step and parameters used to score a reference system.
pub struct Setup {
    pub grid: Grid,
    pub tau: f64,
    pub params: Vec<Params>,
    pub centered: StepScheme,
}

pub fn setup(r: &Reference) -> Setup {
    let point = |l: f64| Params::at(l).unwrap();
    let fine = StepScheme::Centered { substeps: 4, subdivisions: 2 };
    match r.name {
        "constant" => Setup { grid: line_grid(0.0, 1.0, 64), tau: 0.25, params: vec![point(0.0)], centered: fine },
        "saddle_node" => Setup {
            grid: line_grid(-1.0, 1.0, 64),
            tau: 0.5,
            params: vec![point(-0.2), Params::over(0.05, 0.15).unwrap()],
            centered: fine,
        },
        "limit_cycle" => Setup {
            grid: square_grid(1.5, 24),
            tau: 0.5,
            params: vec![point(0.1), Params::over(-0.1, 0.0).unwrap()],
            centered: StepScheme::Centered { substeps: 8, subdivisions: 1 },
        },
        _ => Setup { grid: line_grid(-1.0, 1.0, 64), tau: 0.25, params: vec![point(0.0)], centered: fine },
    }
}

#[derive(Default, Debug)]
pub struct Tally {
    /// Solutions that stayed in the domain.
    pub inside: usize,
    /// Solutions that left the domain.
    pub left: usize,
    pub violations: Vec<String>,
}

/// Samples `trajectories` solutions from random cells and records every
/// end point the box map misses.
pub fn score(r: &Reference, g: &BoxMapGraph, rng: &mut StdRng, trajectories: usize) -> Tally {
    let grid = g.grid();
    let lam = g.params().lambda;
    let mut t = Tally::default();
    for _ in 0..trajectories {
        let cell = rng.random_range(0..grid.cell_count());
        let x0 = sample_start(grid, cell, rng);
        let l = if lam.is_point() { lam.lo() } else { rng.random_range(lam.lo()..=lam.hi()) };
        match (r.solve)(&x0, l, g.tau(), rng) {
            Outcome::Inside(y) => {
                t.inside += 1;
                let near = cells_near(grid, &y, 1e-9);
                if !near.iter().any(|c| g.targets(cell).contains(&c)) {
                    t.violations.push(format!("cell {cell} x0 {x0:?} lambda {l} -> {y:?} not a target"));
                }
            }
            Outcome::Left => {
                t.left += 1;
                if !g.exited(cell) {
                    t.violations.push(format!("cell {cell} x0 {x0:?} lambda {l} leaves but is not flagged"));
                }
            }
            Outcome::Grazing => {}
        }
    }
    t
}

/// Every refined cell maps inside its parent's image grown by one coarse
/// layer.
pub fn refined_images_near_parents(r: &Reference, s: &Setup, scheme: StepScheme) -> Check {
    let fine = s.grid.refine();
    let p = s.params[0];
    let coarse_g = build_graph_with(&s.grid, &r.inclusion, p, s.tau, scheme).map_err(|e| e.to_string())?;
    let fine_g = build_graph_with(&fine, &r.inclusion, p, s.tau, scheme).map_err(|e| e.to_string())?;
    for cell in 0..fine.cell_count() {
        let parent = fine.parent_of(&s.grid, cell);
        let targets = BoxSet::from_ids(s.grid.cell_count(), coarse_g.targets(parent).to_vec());
        let allowed = s.grid.refine_set(&fine, &s.grid.dilate(&targets));
        let image = BoxSet::from_ids(fine.cell_count(), fine_g.targets(cell).to_vec());
        ensure(image.is_subset(&allowed), || format!("{} {scheme:?}: fine cell {cell} escapes parent {parent}", r.name))?;
    }
    Ok(())
}

/// Doubling the resolution does not grow the invariant part or its limit
/// set, read back on the coarse grid.
pub fn refinement_shrinks(r: &Reference, s: &Setup, scheme: StepScheme) -> Check {
    let fine = s.grid.refine();
    let p = s.params[0];
    let coarse_g = build_graph_with(&s.grid, &r.inclusion, p, s.tau, scheme).map_err(|e| e.to_string())?;
    let fine_g = build_graph_with(&fine, &r.inclusion, p, s.tau, scheme).map_err(|e| e.to_string())?;
    let inv_c = invariant_part(&coarse_g, &BoxSet::full(s.grid.cell_count()));
    let inv_f = invariant_part(&fine_g, &BoxSet::full(fine.cell_count()));
    ensure(inv_f.is_subset(&s.grid.refine_set(&fine, &inv_c)), || {
        format!("{} {scheme:?}: fine invariant part is not inside the coarse one", r.name)
    })?;
    if inv_c.is_empty() {
        return Ok(());
    }
    let om_c = omega_limit(&restrict(&coarse_g, &inv_c), &inv_c);
    let u_f = s.grid.refine_set(&fine, &inv_c).intersection(&inv_f);
    let om_f = omega_limit(&restrict(&fine_g, &inv_f), &u_f);
    ensure(om_f.is_subset(&s.grid.refine_set(&fine, &om_c)), || format!("{} {scheme:?}: limit set grew", r.name))
}
