//! Reference solutions of the bundled systems and sampling helpers.

use multiflow_core::systems;
use multiflow_core::{BoxSet, Grid, IntervalVector, PiecewiseInclusion};
use rand::rngs::StdRng;
use rand::RngExt;

/// Endpoint of one sampled solution over `[0, tau]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    /// Stayed in the domain and ended at this point.
    Inside(Vec<f64>),
    /// Left the domain by a clear margin.
    Left,
    /// Grazed the domain boundary; not scored.
    Grazing,
}

/// A bundled system together with an exact or high-accuracy solver.
pub struct Reference {
    pub name: &'static str,
    pub inclusion: PiecewiseInclusion,
    /// Samples one solution from `x0` with parameter `lambda`; set-valued
    /// points pick a branch from `rng`.
    pub solve: fn(&[f64], f64, f64, &mut StdRng) -> Outcome,
}

pub fn references() -> Vec<Reference> {
    vec![
        Reference { name: "constant", inclusion: systems::constant_drift(), solve: constant },
        Reference { name: "sticky_switch", inclusion: systems::sticky_switch(), solve: sticky },
        Reference { name: "saddle_node", inclusion: systems::saddle_node(), solve: saddle_node },
        Reference { name: "relay", inclusion: systems::relay(), solve: relay },
        Reference { name: "limit_cycle", inclusion: systems::limit_cycle(), solve: limit_cycle },
    ]
}

const EDGE: f64 = 1e-7;

fn classify_1d(peak_out: f64, end: f64) -> Outcome {
    // peak_out: largest distance outside the domain reached along the path
    if peak_out > EDGE {
        Outcome::Left
    } else if peak_out > -EDGE {
        Outcome::Grazing
    } else {
        Outcome::Inside(vec![end])
    }
}

fn constant(x0: &[f64], _l: f64, tau: f64, _: &mut StdRng) -> Outcome {
    let y = x0[0] + tau;
    classify_1d(y - 1.0, y)
}

fn sticky(x0: &[f64], _l: f64, tau: f64, rng: &mut StdRng) -> Outcome {
    let x = x0[0];
    let y = if x < 0.0 {
        x
    } else if x > 0.0 {
        1.0 - (1.0 - x) * (-tau).exp()
    } else {
        // at the switching point the solution may rest for any time s
        let s = rng.random_range(0.0..=tau);
        1.0 - (-(tau - s)).exp()
    };
    Outcome::Inside(vec![y])
}

fn relay(x0: &[f64], _l: f64, tau: f64, _: &mut StdRng) -> Outcome {
    let x = x0[0];
    Outcome::Inside(vec![x.signum() * (x.abs() - tau).max(0.0)])
}

fn saddle_node(x0: &[f64], l: f64, tau: f64, _: &mut StdRng) -> Outcome {
    let f = |x: f64| x * x + l;
    let steps = 4000;
    let h = tau / steps as f64;
    let mut x = x0[0];
    let mut peak = x.abs() - 1.0;
    for _ in 0..steps {
        let k1 = f(x);
        let k2 = f(x + 0.5 * h * k1);
        let k3 = f(x + 0.5 * h * k2);
        let k4 = f(x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        peak = peak.max(x.abs() - 1.0);
        if peak > 0.1 {
            return Outcome::Left;
        }
    }
    // RK4 error is far below the margin at this step size
    classify_1d(peak - 1e-9, x)
}

/// Closed-form polar solution of `r' = r (a - r^2)`, `theta' = 1`.
fn limit_cycle(x0: &[f64], l: f64, tau: f64, _: &mut StdRng) -> Outcome {
    let a = 1.0 + l;
    let r0sq = x0[0] * x0[0] + x0[1] * x0[1];
    let th0 = x0[1].atan2(x0[0]);
    let at = |t: f64| -> [f64; 2] {
        if r0sq == 0.0 {
            return [0.0, 0.0];
        }
        let rsq = a * r0sq / (r0sq + (a - r0sq) * (-2.0 * a * t).exp());
        let r = rsq.sqrt();
        [r * (th0 + t).cos(), r * (th0 + t).sin()]
    };
    let samples = 4000;
    let mut peak = f64::NEG_INFINITY;
    for k in 0..=samples {
        let p = at(tau * k as f64 / samples as f64);
        peak = peak.max(p[0].abs().max(p[1].abs()) - 1.5);
    }
    // sampling can miss a smooth maximum by O(dt^2); widen the grazing band
    if peak > 1e-5 {
        Outcome::Left
    } else if peak > -1e-5 {
        Outcome::Grazing
    } else {
        Outcome::Inside(at(tau).to_vec())
    }
}

/// A start point in `cell`: uniform, or a corner now and then so that
/// faces and guards are exercised.
pub fn sample_start(grid: &Grid, cell: usize, rng: &mut StdRng) -> Vec<f64> {
    let b = grid.cell_box(cell);
    let corner = rng.random_bool(0.1);
    b.iter()
        .map(|c| {
            if corner {
                if rng.random_bool(0.5) { c.lo() } else { c.hi() }
            } else {
                rng.random_range(c.lo()..=c.hi())
            }
        })
        .collect()
}

/// Cells meeting the closed cube of half-width `r` around `y`.
pub fn cells_near(grid: &Grid, y: &[f64], r: f64) -> BoxSet {
    let lo: Vec<f64> = y.iter().map(|v| v - r).collect();
    let hi: Vec<f64> = y.iter().map(|v| v + r).collect();
    let b = IntervalVector::from_bounds(&lo, &hi).unwrap();
    let clipped = b.intersect(grid.domain()).expect("point lies in the domain");
    grid.cells_overlapping(&clipped)
}

pub fn line_grid(lo: f64, hi: f64, n: usize) -> Grid {
    Grid::new(IntervalVector::from_bounds(&[lo], &[hi]).unwrap(), vec![n]).unwrap()
}

pub fn square_grid(half: f64, n: usize) -> Grid {
    Grid::new(IntervalVector::from_bounds(&[-half, -half], &[half, half]).unwrap(), vec![n, n]).unwrap()
}
