//! Polynomials in the state variables and the family parameter, with
//! interval coefficients.
//!
//! Variables are indexed `0..n` for `x1..xn` and `n` for `lambda`. A
//! polynomial is stored in canonical form: one term per monomial, sorted by
//! exponent vector, zero terms dropped.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::interval::Interval;
use crate::ivec::IntervalVector;

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Interval>,
}

impl Polynomial {
    /// The zero polynomial over `nvars` state variables (plus lambda).
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Interval) -> Self {
        let mut p = Polynomial::zero(nvars);
        p.add_term(vec![0; nvars + 1], c);
        p
    }

    /// The state variable `x_{index+1}`.
    pub fn var(nvars: usize, index: usize) -> Self {
        assert!(index < nvars, "state variable index out of range");
        let mut e = vec![0; nvars + 1];
        e[index] = 1;
        let mut p = Polynomial::zero(nvars);
        p.add_term(e, Interval::ONE);
        p
    }

    pub fn lambda(nvars: usize) -> Self {
        let mut e = vec![0; nvars + 1];
        e[nvars] = 1;
        let mut p = Polynomial::zero(nvars);
        p.add_term(e, Interval::ONE);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], Interval)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree in the state variables.
    pub fn state_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e[..self.nvars].iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn depends_on_lambda(&self) -> bool {
        self.terms.keys().any(|e| e[self.nvars] > 0)
    }

    /// Coefficient of the monomial with the given exponents, if present.
    pub fn coefficient(&self, exps: &[u32]) -> Option<Interval> {
        self.terms.get(exps).copied()
    }

    fn add_term(&mut self, exps: Vec<u32>, c: Interval) {
        let merged = match self.terms.get(&exps) {
            Some(&prev) => prev + c,
            None => c,
        };
        if merged == Interval::ZERO {
            self.terms.remove(&exps);
        } else {
            self.terms.insert(exps, merged);
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, other.nvars, "polynomial dimension mismatch");
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -*c)).collect(),
        }
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, other.nvars, "polynomial dimension mismatch");
        let mut out = Polynomial::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, *ca * *cb);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Polynomial {
        let mut acc = Polynomial::constant(self.nvars, Interval::ONE);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn scale(&self, c: Interval) -> Polynomial {
        self.mul(&Polynomial::constant(self.nvars, c))
    }

    /// Partial derivative with respect to state variable `index`.
    pub fn derivative(&self, index: usize) -> Polynomial {
        assert!(index < self.nvars, "state variable index out of range");
        let mut out = Polynomial::zero(self.nvars);
        for (e, c) in &self.terms {
            let k = e[index];
            if k == 0 {
                continue;
            }
            let mut d = e.clone();
            d[index] -= 1;
            out.add_term(d, *c * Interval::point(k as f64));
        }
        out
    }

    /// Splits off the parameter and coefficient uncertainty: returns `(g, d)`
    /// free of `lambda`, where `g` has point coefficients and `d` has
    /// coefficients containing zero, with `p(x, l) ∈ g(x) + d(x)` for every
    /// `l` in `lambda` and every choice of coefficients.
    pub fn split(&self, lambda: Interval) -> (Polynomial, Polynomial) {
        let mut g = Polynomial::zero(self.nvars);
        let mut d = Polynomial::zero(self.nvars);
        for (e, c) in &self.terms {
            let k = e[self.nvars];
            let v = if k == 0 { *c } else { *c * lambda.powi(k) };
            let centre = v.mid();
            let mut state = e.clone();
            state[self.nvars] = 0;
            g.add_term(state.clone(), Interval::point(centre));
            d.add_term(state, v - Interval::point(centre));
        }
        (g, d)
    }

    /// Natural interval extension over `x` with parameter range `lambda`.
    pub fn eval(&self, x: &IntervalVector, lambda: Interval) -> Interval {
        debug_assert_eq!(x.dim(), self.nvars);
        // powers[i][k - 1] = base_i^k, filled on first use
        let mut powers: Vec<Vec<Interval>> = vec![Vec::new(); self.nvars + 1];
        let mut acc = Interval::ZERO;
        for (e, c) in &self.terms {
            let mut t = *c;
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let base = if i < self.nvars { x[i] } else { lambda };
                let cache = &mut powers[i];
                while cache.len() < k as usize {
                    cache.push(base.powi(cache.len() as u32 + 1));
                }
                t = t * cache[k as usize - 1];
            }
            acc = acc + t;
        }
        acc
    }

    /// Midpoint evaluation at a real point; only for diagnostics and oracles.
    pub fn eval_point(&self, x: &[f64], lambda: f64) -> f64 {
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut t = c.mid();
            for (i, &k) in e.iter().enumerate() {
                let base = if i < self.nvars { x[i] } else { lambda };
                for _ in 0..k {
                    t *= base;
                }
            }
            acc += t;
        }
        acc
    }
}

/// Canonical text form, parseable back into an identical polynomial:
/// terms joined by `+`, coefficient first, variables named `x1..xn` and
/// `lambda`.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}", c)?;
            for (i, &p) in e.iter().enumerate() {
                if p == 0 {
                    continue;
                }
                if i < self.nvars {
                    write!(f, "*x{}", i + 1)?;
                } else {
                    f.write_str("*lambda")?;
                }
                if p > 1 {
                    write!(f, "^{}", p)?;
                }
            }
        }
        Ok(())
    }
}
