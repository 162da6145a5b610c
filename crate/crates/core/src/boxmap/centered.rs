//! Mean-value substeps for [`StepScheme::Centered`](super::StepScheme).

use alloc::vec;
use alloc::vec::Vec;

use super::{a_priori_enclosure, enclose, leaves_domain, MapConfig, INFLATE_EPS, INFLATE_FACTOR, MAX_INFLATIONS};
use crate::error::BoxMapError;
use crate::inclusion::PiecewiseInclusion;
use crate::interval::{div_down, div_up, Interval};
use crate::ivec::IntervalVector;
use crate::poly::Polynomial;

/// Tightening passes for the a-priori boxes inside a substep, which only
/// feed derivative bounds.
const NARROWING: usize = 2;

/// The `k^dim` congruent sub-boxes of `bx`.
pub(super) fn split_box(bx: &IntervalVector, k: usize) -> Vec<IntervalVector> {
    let n = bx.dim();
    let pieces: Vec<Vec<Interval>> = bx
        .iter()
        .map(|c| {
            (0..k)
                .map(|i| {
                    let at = |j: usize| {
                        if j == k {
                            c.hi()
                        } else {
                            c.lo() + (c.hi() - c.lo()) * (j as f64 / k as f64)
                        }
                    };
                    Interval::new(at(i), at(i + 1)).unwrap()
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(k.pow(n as u32));
    let mut idx = vec![0usize; n];
    loop {
        out.push(IntervalVector::new((0..n).map(|a| pieces[a][idx[a]]).collect()));
        let mut axis = 0;
        while axis < n && idx[axis] + 1 == k {
            idx[axis] = 0;
            axis += 1;
        }
        if axis == n {
            return out;
        }
        idx[axis] += 1;
    }
}

/// Smallest substep, as a fraction of the nominal one, tried before
/// falling back to a first-order substep.
const MAX_HALVINGS: u32 = 6;

/// A set `{c + A r : r ∈ R}`. Keeping the linear part separate from the
/// box `R` stops a rotating set from being re-boxed at every substep.
#[derive(Clone, Debug)]
struct Parallelepiped {
    c: Vec<f64>,
    /// Point matrix stored as degenerate intervals.
    a: Matrix,
    r: Vec<Interval>,
}

impl Parallelepiped {
    fn from_box(b: &IntervalVector) -> Self {
        let c = b.mid();
        let r = b.iter().zip(&c).map(|(x, m)| *x - Interval::point(*m)).collect();
        Parallelepiped {
            a: identity(b.dim()),
            c,
            r,
        }
    }

    fn hull(&self) -> IntervalVector {
        let n = self.c.len();
        let ar = mat_vec(&self.a, &self.r, n);
        IntervalVector::new(self.c.iter().zip(ar).map(|(c, v)| Interval::point(*c) + v).collect())
    }
}

/// Advances `x` by `tau` in substeps of nominal length `tau / substeps`.
/// The set is re-boxed and clipped whenever it pokes out of the domain. A
/// substep whose mean-value enclosure fails is halved, up to
/// [`MAX_HALVINGS`] times, before the first-order step is used instead.
/// Returns the final box (`None` once everything has left) and the exit
/// flag.
pub(super) fn flow(
    x: &IntervalVector,
    substeps: usize,
    cfg: &MapConfig<'_>,
) -> Result<(Option<IntervalVector>, bool), BoxMapError> {
    let pieces = &cfg.linearised;
    let domain = cfg.inclusion.domain();
    let nominal = cfg.tau / substeps as f64;
    let mut set = Parallelepiped::from_box(x);
    let mut xbox = x.clone();
    let mut exited = false;
    let mut elapsed = 0.0;
    let mut done = 0usize;
    let mut halvings = 0u32;
    while done < substeps {
        let delta = nominal / (1u64 << halvings) as f64;
        let refined = mean_value_step(&set, &xbox, delta, pieces, cfg);
        if refined.is_none() && halvings < MAX_HALVINGS {
            halvings += 1;
            continue;
        }
        let (next, inside) = match refined {
            Some((p, bp)) => {
                let h = p.hull();
                set = p;
                (h, bp.intersect(domain).ok_or(BoxMapError::CellOutsideDomain)?)
            }
            None => {
                let b = a_priori_enclosure(&xbox, delta, cfg.inclusion, &cfg.params)?;
                let inside = b.intersect(domain).ok_or(BoxMapError::CellOutsideDomain)?;
                let f = cfg.inclusion.evaluate_hull(&inside, &cfg.params)?;
                let first_order = xbox.add_scaled(Interval::point(delta), &f);
                set = Parallelepiped::from_box(&first_order);
                (first_order, inside)
            }
        };
        exited |= leaves_domain(&next, &inside, cfg)?;
        if next.subset_of(domain) {
            xbox = next;
        } else {
            match next.intersect(domain) {
                Some(clipped) => {
                    set = Parallelepiped::from_box(&clipped);
                    xbox = clipped;
                }
                None => return Ok((None, exited)),
            }
        }
        // substeps are dyadic fractions of the nominal one; count progress
        // in units of the smallest
        elapsed += 1.0 / (1u64 << halvings) as f64;
        if elapsed >= 1.0 {
            elapsed -= 1.0;
            done += 1;
            if elapsed == 0.0 {
                halvings = 0;
            }
        }
    }
    Ok((Some(xbox), exited))
}

/// Enclosure of the inverse of a point matrix by interval Gauss-Jordan
/// elimination, or `None` when a pivot cannot be bounded away from zero.
fn inverse(a: &[Interval], n: usize) -> Option<Matrix> {
    let mut m: Matrix = a.to_vec();
    let mut inv = identity(n);
    let mig = |v: Interval| if v.contains(0.0) { 0.0 } else { v.lo().abs().min(v.hi().abs()) };
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| mig(m[i * n + col]).total_cmp(&mig(m[j * n + col])))?;
        if mig(m[pivot * n + col]) == 0.0 {
            return None;
        }
        for k in 0..n {
            m.swap(col * n + k, pivot * n + k);
            inv.swap(col * n + k, pivot * n + k);
        }
        let p = m[col * n + col].recip()?;
        for k in 0..n {
            m[col * n + k] = m[col * n + k] * p;
            inv[col * n + k] = inv[col * n + k] * p;
        }
        for i in (0..n).filter(|&i| i != col) {
            let f = m[i * n + col];
            for k in 0..n {
                m[i * n + k] = m[i * n + k] - f * m[col * n + k];
                inv[i * n + k] = inv[i * n + k] - f * inv[col * n + k];
            }
        }
    }
    Some(inv)
}

/// Square interval matrix, row-major.
type Matrix = Vec<Interval>;

fn mat_mul(a: &[Interval], b: &[Interval], n: usize) -> Matrix {
    let mut out = vec![Interval::ZERO; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                out[i * n + j] = out[i * n + j] + aik * b[k * n + j];
            }
        }
    }
    out
}

fn mat_vec(a: &[Interval], v: &[Interval], n: usize) -> Vec<Interval> {
    (0..n)
        .map(|i| (0..n).fold(Interval::ZERO, |acc, k| acc + a[i * n + k] * v[k]))
        .collect()
}

/// `I + t * j * m`
fn variational_picard(j: &[Interval], m: &[Interval], t: Interval, n: usize) -> Matrix {
    let mut out = mat_mul(j, m, n);
    for (idx, e) in out.iter_mut().enumerate() {
        *e = t * *e;
        if idx % (n + 1) == 0 {
            *e = *e + Interval::ONE;
        }
    }
    out
}

/// Derivative data of one polynomial piece at the configured parameter.
#[derive(Clone, Debug)]
///
/// The piece is split as `rhs ∈ g + dev` with `g` free of coefficient and
/// parameter uncertainty (see [`Polynomial::split`]); `taylor` holds the
/// second and third time derivatives `g' = Dg g` and `g'' = D(Dg g) g` of
/// solutions of `g`.
pub(super) struct Linearised<'a> {
    rhs: &'a [Polynomial],
    /// `d rhs_i / d x_k`, row-major.
    jac: Vec<Polynomial>,
    g: Vec<Polynomial>,
    g_jac: Vec<Polynomial>,
    dev: Vec<Polynomial>,
    taylor: [Vec<Polynomial>; 2],
}

fn jacobian(ps: &[Polynomial]) -> Vec<Polynomial> {
    let n = ps.len();
    ps.iter().flat_map(|p| (0..n).map(move |k| p.derivative(k))).collect()
}

/// `D(ps) v` as polynomials.
fn directional(ps: &[Polynomial], v: &[Polynomial]) -> Vec<Polynomial> {
    let n = v.len();
    let jac = jacobian(ps);
    (0..ps.len())
        .map(|i| (0..n).fold(Polynomial::zero(n), |acc, k| acc.add(&jac[i * n + k].mul(&v[k]))))
        .collect()
}

/// `ps(b)` intersected with the mean-value form `ps(m) + J(b) (b - m)`.
fn eval_centred(ps: &[Polynomial], jac: &[Polynomial], b: &IntervalVector, lambda: Interval) -> IntervalVector {
    let n = b.dim();
    let m = IntervalVector::point(&b.mid());
    let offset: Vec<Interval> = b.iter().zip(m.iter()).map(|(a, c)| *a - *c).collect();
    let jac: Matrix = jac.iter().map(|p| p.eval(b, lambda)).collect();
    let slope = mat_vec(&jac, &offset, n);
    IntervalVector::new(
        ps.iter()
            .enumerate()
            .map(|(i, p)| {
                let natural = p.eval(b, lambda);
                let centred = p.eval(&m, lambda) + slope[i];
                natural.intersect(centred).unwrap_or(centred)
            })
            .collect(),
    )
}

impl<'a> Linearised<'a> {
    pub(super) fn new(rhs: &'a [Polynomial], lambda: Interval) -> Self {
        let (g, dev): (Vec<_>, Vec<_>) = rhs.iter().map(|p| p.split(lambda)).unzip();
        let second = directional(&g, &g);
        let third = directional(&second, &g);
        Linearised {
            rhs,
            jac: jacobian(rhs),
            g_jac: jacobian(&g),
            g,
            dev,
            taylor: [second, third],
        }
    }
}

fn finite(b: &IntervalVector) -> bool {
    b.iter().all(|c| c.lo().is_finite() && c.hi().is_finite())
}

/// Index of the only piece meeting `bx`, if no other piece or override does.
fn single_piece(inc: &PiecewiseInclusion, bx: &IntervalVector) -> Option<usize> {
    if inc.overrides().iter().any(|o| o.region.intersects(bx)) {
        return None;
    }
    let mut hits = inc.pieces().iter().enumerate().filter(|(_, p)| p.restrict(bx).is_some());
    match (hits.next(), hits.next()) {
        (Some((i, _)), None) => Some(i),
        _ => None,
    }
}

/// Mean-value enclosure of one substep from `set` (whose hull is `x`),
/// together with an a-priori box of the solutions over the substep. `None`
/// when the region swept is not governed by a single polynomial piece or an
/// enclosure cannot be found.
fn mean_value_step(
    set: &Parallelepiped,
    x: &IntervalVector,
    delta: f64,
    pieces: &[Linearised<'_>],
    cfg: &MapConfig<'_>,
) -> Option<(Parallelepiped, IntervalVector)> {
    let inc = cfg.inclusion;
    let lambda = cfg.params.lambda;
    let index = single_piece(inc, x)?;
    let lin = &pieces[index];
    let field = |ps: &[Polynomial], jac: &[Polynomial], l: Interval, b: &IntervalVector| {
        if finite(b) {
            Ok(eval_centred(ps, jac, b, l))
        } else {
            Err(BoxMapError::NoEnclosure { iterations: 0 })
        }
    };
    let eval = |b: &IntervalVector| field(lin.rhs, &lin.jac, lambda, b);
    // solutions of the unclipped polynomial field; the genuine ones agree
    // with it while they stay inside the domain
    let bp = enclose(x, delta, NARROWING, eval).ok()?;
    if single_piece(inc, &bp.intersect(inc.domain())?) != Some(index) {
        return None;
    }
    let n = x.dim();
    let centre = IntervalVector::point(&set.c);
    // reference solution z of g from the centre, by a third-order Taylor
    // expansion with Lagrange remainder
    let bg = enclose(&centre, delta, NARROWING, |b| field(&lin.g, &lin.g_jac, Interval::ZERO, b)).ok()?;
    let at_centre = |ps: &[Polynomial]| -> Vec<Interval> { ps.iter().map(|p| p.eval(&centre, Interval::ZERO)).collect() };
    let (v1, v2) = (at_centre(&lin.g), at_centre(&lin.taylor[0]));
    let v3: Vec<Interval> = lin.taylor[1].iter().map(|p| p.eval(&bg, Interval::ZERO)).collect();
    let h = Interval::point(delta);
    let (h2, h3) = (h * h * Interval::point(0.5), h * h * h * Interval::new(div_down(1.0, 6.0), div_up(1.0, 6.0)).unwrap());
    let z: Vec<Interval> = (0..n).map(|i| centre[i] + h * v1[i] + h2 * v2[i] + h3 * v3[i]).collect();

    // x - z solves a linear equation with coefficient in Dg(hull) plus the
    // deviation forcing
    let hull = bp.hull(&bg);
    let jac: Matrix = lin.g_jac.iter().map(|p| p.eval(&hull, Interval::ZERO)).collect();
    let span = Interval::new(0.0, delta).unwrap();
    let mut mb = variational_picard(&jac, &identity(n), span, n);
    let mut found = false;
    for _ in 0..MAX_INFLATIONS {
        let next = variational_picard(&jac, &mb, span, n);
        if next.iter().zip(&mb).all(|(a, b)| a.subset_of(*b)) {
            mb = next;
            found = true;
            break;
        }
        mb = next.iter().map(|a| a.inflate(INFLATE_FACTOR, INFLATE_EPS)).collect();
    }
    if !found || mb.iter().any(|v| !v.lo().is_finite() || !v.hi().is_finite()) {
        return None;
    }
    // Phi(delta) = I + int A Phi, with Phi(s) ∈ I + [0, s] J M_B inside
    let jjm = mat_mul(&jac, &mat_mul(&jac, &mb, n), n);
    let m: Matrix = (0..n * n)
        .map(|k| {
            let id = if k % (n + 1) == 0 { Interval::ONE } else { Interval::ZERO };
            id + h * jac[k] + h2 * jjm[k]
        })
        .collect();
    let forcing: Vec<Interval> = lin.dev.iter().map(|d| d.eval(&bp, Interval::ZERO)).collect();
    let drift = mat_vec(&mb, &forcing, n);

    // x(delta) ∈ z + (M A) R + delta M_B E, re-centred on the midpoints
    let ma = mat_mul(&m, &set.a, n);
    let c: Vec<f64> = z.iter().map(|v| v.mid()).collect();
    let a: Matrix = ma.iter().map(|v| Interval::point(v.mid())).collect();
    let spill: Matrix = ma.iter().zip(&a).map(|(u, v)| *u - *v).collect();
    let spill_r = mat_vec(&spill, &set.r, n);
    let w: Vec<Interval> = (0..n)
        .map(|i| spill_r[i] + (z[i] - Interval::point(c[i])) + h * drift[i])
        .collect();
    let a_inv = inverse(&a, n)?;
    let shift = mat_vec(&a_inv, &w, n);
    let r = set.r.iter().zip(shift).map(|(r, s)| *r + s).collect();
    let next = Parallelepiped { c, a, r };
    finite(&next.hull()).then_some((next, bp))
}

fn identity(n: usize) -> Matrix {
    (0..n * n)
        .map(|idx| if idx % (n + 1) == 0 { Interval::ONE } else { Interval::ZERO })
        .collect()
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxmap::{image_boxes, prepare, StepScheme};
    use crate::grid::Grid;
    use crate::inclusion::{Params, RegionPiece};
    use crate::systems;

    fn scheme(substeps: usize, subdivisions: usize) -> StepScheme {
        StepScheme::Centered { substeps, subdivisions }
    }

    /// `x' = -y, y' = x` on `[-2, 2]^2`
    fn rotation() -> PiecewiseInclusion {
        let (x, y) = (Polynomial::var(2, 0), Polynomial::var(2, 1));
        PiecewiseInclusion::new(
            IntervalVector::from_bounds(&[-2.0, -2.0], &[2.0, 2.0]).unwrap(),
            vec![RegionPiece::new(vec![], vec![y.neg(), x])],
            vec![],
            Params::FAMILY,
        )
        .unwrap()
    }

    #[test]
    fn sub_boxes_tile_the_box() {
        let b = IntervalVector::from_bounds(&[0.0, 1.0], &[1.0, 4.0]).unwrap();
        let parts = split_box(&b, 3);
        assert_eq!(parts.len(), 9);
        assert!(parts.iter().all(|p| p.subset_of(&b)));
        assert_eq!(parts[8].hi(), b.hi());
        assert_eq!(parts[0].lo(), b.lo());
    }

    #[test]
    fn inverse_encloses_exact_inverse() {
        let a: Matrix = [2.0, 1.0, 1.0, 3.0].iter().map(|&v| Interval::point(v)).collect();
        let inv = inverse(&a, 2).unwrap();
        let exact = [0.6, -0.2, -0.2, 0.4];
        for (i, e) in inv.iter().zip(exact) {
            assert!(i.contains(e) && i.width() < 1e-12);
        }
        let singular: Matrix = [1.0, 2.0, 2.0, 4.0].iter().map(|&v| Interval::point(v)).collect();
        assert!(inverse(&singular, 2).is_none());
    }

    #[test]
    fn rotation_image_is_sound_and_tight() {
        let f = rotation();
        let grid = Grid::new(f.domain().clone(), vec![64, 64]).unwrap();
        let tau = 0.5;
        let cfg = prepare(&grid, &f, Params::default(), tau, scheme(8, 1)).unwrap();
        let cell = grid.cells_containing(&[1.01, 0.01]).ids()[0];
        let (targets, exited) = image_boxes(cell, &cfg).unwrap();
        assert!(!exited);
        let b = grid.cell_box(cell);
        let (s, c) = (libm::sin(tau), libm::cos(tau));
        for i in 0..=4 {
            for j in 0..=4 {
                let x = b[0].lo() + b[0].width() * i as f64 / 4.0;
                let y = b[1].lo() + b[1].width() * j as f64 / 4.0;
                let end = [c * x - s * y, s * x + c * y];
                let hit = grid.cells_containing(&end);
                assert!(hit.iter().any(|h| targets.contains(h)), "{end:?} missed");
            }
        }
        // a rotated square covers at most a 3 x 3 block of cells
        assert!(targets.len() <= 9, "{} targets", targets.len());
    }

    #[test]
    fn parameter_interval_is_covered() {
        // x' = lambda x on [0, 2], lambda in [0.1, 0.3]
        let x = Polynomial::var(1, 0);
        let f = PiecewiseInclusion::new(
            IntervalVector::from_bounds(&[0.0], &[2.0]).unwrap(),
            vec![RegionPiece::new(vec![], vec![Polynomial::lambda(1).mul(&x)])],
            vec![],
            Params::FAMILY,
        )
        .unwrap();
        let grid = Grid::new(f.domain().clone(), vec![200]).unwrap();
        let params = Params::over(0.1, 0.3).unwrap();
        let cfg = prepare(&grid, &f, params, 1.0, scheme(4, 1)).unwrap();
        let cell = grid.cells_containing(&[1.0]).ids()[0];
        let (targets, _) = image_boxes(cell, &cfg).unwrap();
        let b = grid.cell_box(cell);
        for l in [0.1, 0.2, 0.3] {
            for x0 in [b[0].lo(), b[0].mid(), b[0].hi()] {
                let end = x0 * libm::exp(l);
                assert!(grid.cells_containing(&[end]).iter().any(|h| targets.contains(h)));
            }
        }
        // exact hull spans about 0.23; allow a little slack
        assert!(targets.len() <= 30, "{} targets", targets.len());
    }

    #[test]
    fn switching_surface_falls_back_soundly() {
        let f = systems::sticky_switch();
        let grid = Grid::new(f.domain().clone(), vec![64]).unwrap();
        let cfg = prepare(&grid, &f, Params::default(), 0.25, scheme(4, 2)).unwrap();
        // the cell touching 0 from the right: solutions from 0 may stay or
        // leave along 1 - (1 - x0) e^{-t} after any delay
        let cell = grid.cells_containing(&[0.01]).ids()[0];
        let (targets, _) = image_boxes(cell, &cfg).unwrap();
        let b = grid.cell_box(cell);
        assert_eq!(b[0].lo(), 0.0);
        for x0 in [b[0].lo(), b[0].mid(), b[0].hi()] {
            for wait in [0.0, 0.1, 0.25] {
                let t = if x0 == 0.0 { 0.25 - wait } else { 0.25 };
                let end = 1.0 - (1.0 - x0) * libm::exp(-t);
                assert!(grid.cells_containing(&[end]).iter().any(|h| targets.contains(h)));
            }
        }
    }

    #[test]
    fn zero_substeps_are_rejected() {
        let f = rotation();
        let grid = Grid::new(f.domain().clone(), vec![4, 4]).unwrap();
        assert_eq!(
            prepare(&grid, &f, Params::default(), 0.5, scheme(0, 1)).unwrap_err(),
            BoxMapError::InvalidScheme
        );
    }
}
