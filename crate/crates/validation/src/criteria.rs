//! The acceptance criteria, each timed against its runtime budget.

use std::fmt;
use std::time::{Duration, Instant};

use multiflow::parallel::Rayon;
use multiflow_core::continuation::{continue_decomposition_in, semicontinuity_check, sweep_isolating_in, SweepMode, SweepPlan};
use multiflow_core::dynamics::{box_hausdorff, decompose, default_k_max, forward_reach, invariant_part, omega_limit, restrict};
use multiflow_core::{build_graph_with, systems, BoxSet, Grid, IntervalVector, Params, StepScheme};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use crate::checks::{self, annulus};
use crate::oracle::{line_grid, references, square_grid};

/// Slope allowed by the semicontinuity witness, in cells per unit lambda.
pub const SLOPE: f64 = 20.0;

#[derive(Clone, Debug)]
pub struct Verdict {
    pub id: usize,
    pub title: &'static str,
    /// Checks held and the run finished within budget.
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}. {} ({:.3} s, budget {} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.detail
        )
    }
}

type Measured = (bool, String);

fn timed(id: usize, title: &'static str, budget_s: u64, f: impl FnOnce() -> Measured) -> Verdict {
    let start = Instant::now();
    let (ok, mut detail) = f();
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_s);
    if elapsed > budget {
        detail.push_str("; over budget");
    }
    Verdict { id, title, passed: ok && elapsed <= budget, detail, elapsed, budget }
}

pub fn all() -> Vec<Verdict> {
    vec![
        switching_decomposition(),
        switching_omega_limit(),
        empty_images(),
        saddle_node_sweep(),
        planar_continuation(),
        property_suites(),
    ]
}

fn on_line(grid: &Grid, lo: f64, hi: f64) -> BoxSet {
    grid.cells_overlapping(&IntervalVector::from_bounds(&[lo], &[hi]).unwrap())
}

fn cells(d: f64, grid: &Grid) -> f64 {
    d / grid.min_width()
}

pub fn switching_decomposition() -> Verdict {
    timed(1, "switching system decomposition", 5, || {
        let grid = line_grid(-1.0, 1.0, 128);
        let h = grid.min_width();
        let g = build_graph_with(&grid, &systems::sticky_switch(), Params::default(), 0.25, StepScheme::FirstOrder).unwrap();
        let s = invariant_part(&g, &BoxSet::full(128));
        let rg = restrict(&g, &s);
        let d = match decompose(&rg, &on_line(&grid, 0.7, 1.0), default_k_max(&rg)) {
            Ok(d) => d,
            Err(e) => return (false, format!("decomposition failed: {e}")),
        };
        let partition = d.a.intersection(&d.r).is_empty()
            && d.a.intersection(&d.c).is_empty()
            && d.r.intersection(&d.c).is_empty()
            && d.a.union(&d.r).union(&d.c) == d.s;
        let dist = |p: &BoxSet, q: &BoxSet| box_hausdorff(&grid, p, q).map(|v| cells(v, &grid)).unwrap_or(f64::INFINITY);
        let d_a = dist(&d.a, &grid.cells_containing(&[1.0]));
        let d_r = dist(&d.r, &on_line(&grid, -1.0, 0.0));
        let middle = on_line(&grid, 2.0 * h, 1.0 - 2.0 * h);
        let missing = middle.difference(&d.c).len();
        let ok = partition && d_a <= 2.0 && d_r <= 2.0 && missing == 0;
        let detail = format!(
            "|A| = {}, dH(A, {{1}}) = {d_a} cells, dH(R, [-1,0]) = {d_r} cells, {missing} of {} middle cells outside C, partition {}",
            d.a.len(),
            middle.len(),
            if partition { "exact" } else { "broken" }
        );
        (ok, detail)
    })
}

pub fn switching_omega_limit() -> Verdict {
    timed(2, "omega-limit of the origin", 5, || {
        let grid = line_grid(-1.0, 1.0, 128);
        let g = build_graph_with(&grid, &systems::sticky_switch(), Params::default(), 0.25, StepScheme::FirstOrder).unwrap();
        let s = invariant_part(&g, &BoxSet::full(128));
        let om = omega_limit(&restrict(&g, &s), &grid.cells_containing(&[0.0]));
        let target = on_line(&grid, 0.0, 1.0);
        let covers = target.is_subset(&om);
        let tight = om.is_subset(&grid.dilate(&target));
        (covers && tight, format!("|omega| = {}, covers [0,1]: {covers}, inside its 1-cell dilation: {tight}", om.len()))
    })
}

pub fn empty_images() -> Verdict {
    timed(3, "empty images of the constant drift", 1, || {
        let mut notes = Vec::new();
        let mut ok = true;
        for n in [10, 32, 128] {
            let grid = line_grid(0.0, 1.0, n);
            let tau = 1.5 * grid.min_width();
            let g = build_graph_with(&grid, &systems::constant_drift(), Params::default(), tau, StepScheme::FirstOrder).unwrap();
            let inv = invariant_part(&g, &BoxSet::full(n));
            let sinks = BoxSet::from_ids(n, (0..n).filter(|&c| g.targets(c).is_empty()).collect());
            let stuck = (0..n)
                .filter(|&c| forward_reach(&g, &BoxSet::from_ids(n, vec![c])).intersection(&sinks).is_empty())
                .count();
            ok &= inv.is_empty() && stuck == 0;
            notes.push(format!("{n} cells: |Inv| = {}, {stuck} cells never reach an empty image", inv.len()));
        }
        (ok, notes.join("; "))
    })
}

pub fn saddle_node_sweep() -> Verdict {
    timed(4, "saddle-node continuation sweep", 10, || {
        let inclusion = systems::saddle_node();
        let grid = line_grid(-1.0, 1.0, 128);
        let plan = SweepPlan {
            inclusion: &inclusion,
            grid: grid.clone(),
            tau: 0.5,
            scheme: StepScheme::FirstOrder,
            samples: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            mode: SweepMode::Sampled,
            anchor: None,
            n: BoxSet::full(128),
            n_a: None,
            n_r: None,
        };
        let report = match sweep_isolating_in(&plan, &Rayon) {
            Ok(r) => r,
            Err(e) => return (false, format!("sweep failed: {e}")),
        };
        let isolated = report.records.iter().filter(|r| r.isolated()).count();
        let s0 = &report.records[0].invariant;
        let s1 = &report.records[4].invariant;
        let ids = s0.ids();
        let cluster = !ids.is_empty() && ids.windows(2).all(|w| w[1] == w[0] + 1);
        let has_zero = !s0.intersection(&grid.cells_containing(&[0.0])).is_empty();
        let sizes: Vec<usize> = report.records.iter().map(|r| r.invariant.len()).collect();
        let ok = isolated == 5 && cluster && has_zero && s1.is_empty();
        (ok, format!("{isolated}/5 isolated, |S| = {sizes:?}, S_0 contiguous: {cluster}, contains 0: {has_zero}"))
    })
}

/// Smallest and largest distance from the origin over a planar cell.
fn radial_range(grid: &Grid, cell: usize) -> (f64, f64) {
    let b = grid.cell_box(cell);
    let axis = |k: usize| {
        let (lo, hi) = (b[k].lo(), b[k].hi());
        let near = if lo > 0.0 { lo } else if hi < 0.0 { -hi } else { 0.0 };
        (near, lo.abs().max(hi.abs()))
    };
    let ((nx, fx), (ny, fy)) = (axis(0), axis(1));
    (nx.hypot(ny), fx.hypot(fy))
}

/// Hausdorff distance between `|A|` and the circle of radius `rho`: the
/// cell side exactly from the radial range, the circle side on 20000
/// sample points.
fn circle_hausdorff(grid: &Grid, a: &BoxSet, rho: f64) -> (f64, bool) {
    let from_a = a
        .iter()
        .map(|c| {
            let (near, far) = radial_range(grid, c);
            (rho - near).max(far - rho)
        })
        .fold(0.0f64, f64::max);
    let mut from_circle: f64 = 0.0;
    let mut covered = true;
    let samples = 20_000;
    for k in 0..samples {
        let t = std::f64::consts::TAU * k as f64 / samples as f64;
        let p = [rho * t.cos(), rho * t.sin()];
        if grid.cells_containing(&p).iter().any(|c| a.contains(c)) {
            continue;
        }
        covered = false;
        let d = a
            .iter()
            .map(|c| {
                let b = grid.cell_box(c);
                let dx = (b[0].lo() - p[0]).max(p[0] - b[0].hi()).max(0.0);
                let dy = (b[1].lo() - p[1]).max(p[1] - b[1].hi()).max(0.0);
                dx.hypot(dy)
            })
            .fold(f64::INFINITY, f64::min);
        from_circle = from_circle.max(d);
    }
    (from_a.max(from_circle), covered)
}

pub fn planar_continuation() -> Verdict {
    timed(5, "planar decomposition and continuation", 120, || {
        let inclusion = systems::limit_cycle();
        let grid = square_grid(1.5, 128);
        let n = grid.cell_count();
        let u = annulus(&grid, 0.6, 1.45);
        let plan = SweepPlan {
            inclusion: &inclusion,
            grid: grid.clone(),
            tau: 0.5,
            scheme: StepScheme::Centered { substeps: 16, subdivisions: 1 },
            samples: vec![-0.2, -0.1, 0.0, 0.1, 0.2],
            mode: SweepMode::Sampled,
            anchor: None,
            n: BoxSet::full(n),
            n_a: None,
            n_r: None,
        };
        let report = match continue_decomposition_in(&plan, &u, None, &Rayon) {
            Ok(r) => r,
            Err(e) => return (false, format!("continuation failed: {e}")),
        };
        let origin = grid.cells_containing(&[0.0, 0.0]);
        let mut ok = report.all_passed() && report.verified == Some((0, 4));
        let mut notes = Vec::new();
        for rec in &report.records {
            let l = rec.lambda.lo();
            let rho = (1.0 + l).sqrt();
            let Some(d) = rec.decomposition.decomposition() else {
                ok = false;
                notes.push(format!("lambda {l}: no decomposition"));
                continue;
            };
            let (dist, covered) = circle_hausdorff(&grid, &d.a, rho);
            let dist = cells(dist, &grid);
            let r_origin = !d.r.intersection(&origin).is_empty();
            ok &= rec.isolated() && dist <= 3.0 && covered && r_origin;
            notes.push(format!("lambda {l}: dH(A, circle) = {dist:.2} cells{}, |R| = {}", if covered { "" } else { " (gaps)" }, d.r.len()));
        }
        let semi = semicontinuity_check(&grid, &report, SLOPE);
        ok &= semi;
        notes.push(format!("semicontinuity {}", if semi { "holds" } else { "fails" }));
        (ok, notes.join("; "))
    })
}

pub fn property_suites() -> Verdict {
    timed(6, "property and soundness suites", 60, || {
        let mut rng = StdRng::seed_from_u64(0x5eed);
        let mut failures: Vec<String> = Vec::new();
        let graphs = 256;
        for _ in 0..graphs {
            let g = checks::random_graph(&mut rng, 500);
            let (a, b, c) = (rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
            if let Err(e) = checks::graph_identities(&g, a, b, c) {
                failures.push(format!("random graph with {} nodes: {e}", g.grid().cell_count()));
            }
        }
        let examples = checks::examples();
        for ex in &examples {
            if let Err(e) = checks::example_identities(ex) {
                failures.push(e);
            }
        }
        let trajectories = 1000;
        let mut scored = 0;
        let mut violations = 0;
        for r in references() {
            let s = checks::setup(&r);
            for scheme in [StepScheme::FirstOrder, s.centered] {
                for &p in &s.params {
                    let g = build_graph_with(&s.grid, &r.inclusion, p, s.tau, scheme).unwrap();
                    let t = checks::score(&r, &g, &mut rng, trajectories);
                    scored += t.inside + t.left;
                    violations += t.violations.len();
                    if let Some(v) = t.violations.first() {
                        failures.push(format!("{} {scheme:?}: {v}", r.name));
                    }
                }
                if let Err(e) = checks::refinement_shrinks(&r, &s, scheme) {
                    failures.push(e);
                }
                if let Err(e) = checks::refined_images_near_parents(&r, &s, scheme) {
                    failures.push(e);
                }
            }
        }
        let mut detail = format!(
            "{graphs} random graphs, {} example systems, {scored} scored solutions with {violations} violations, refinement on {} systems",
            examples.len(),
            references().len()
        );
        if let Some(first) = failures.first() {
            detail.push_str(&format!("; {} failures, first: {first}", failures.len()));
        }
        (failures.is_empty(), detail)
    })
}
