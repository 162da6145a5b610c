//! Parameter sweeps: isolation certificates and attractor-repeller
//! decompositions tracked across samples of the family parameter.
//!
//! Each sample gets its own box map. In [`SweepMode::Interval`] the map for
//! consecutive samples `l0 < l1` is built with `lambda` as the interval
//! `[l0, l1]`, so one graph is sound for every parameter in between.

use alloc::vec::Vec;

use crate::boxmap::{build_graph_with, BoxMapGraph, StepScheme};
use crate::boxset::BoxSet;
use crate::dynamics::{decompose, invariant_part, is_isolating, restrict, ARDecomposition, IsolationCertificate};
use crate::error::{BoxMapError, ContinuationError, DynamicsError};
use crate::grid::Grid;
use crate::inclusion::{Params, PiecewiseInclusion};
use crate::interval::Interval;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SweepMode {
    /// One graph per parameter value.
    Sampled,
    /// One graph per gap between consecutive samples, sound on the whole gap.
    Interval,
}

/// Everything a sweep needs besides the attracting neighbourhood.
#[derive(Clone, Debug)]
pub struct SweepPlan<'a> {
    pub inclusion: &'a PiecewiseInclusion,
    pub grid: Grid,
    pub tau: f64,
    pub scheme: StepScheme,
    /// Strictly increasing parameter samples.
    pub samples: Vec<f64>,
    pub mode: SweepMode,
    /// Parameter value the verified run must contain. Defaults to the sample
    /// closest to zero.
    pub anchor: Option<f64>,
    pub n: BoxSet,
    pub n_a: Option<BoxSet>,
    pub n_r: Option<BoxSet>,
}

impl SweepPlan<'_> {
    pub fn validate(&self) -> Result<(), ContinuationError> {
        if self.samples.is_empty() {
            return Err(ContinuationError::InvalidPlan("no parameter samples"));
        }
        if self.samples.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(core::cmp::Ordering::Less)) {
            return Err(ContinuationError::InvalidPlan("samples must be strictly increasing"));
        }
        let range = self.inclusion.lambda_range();
        if self.samples.iter().any(|&l| !range.contains(l)) {
            return Err(ContinuationError::InvalidPlan("sample outside the family interval"));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(ContinuationError::InvalidPlan("time step must be positive"));
        }
        if self.grid.domain() != self.inclusion.domain() {
            return Err(ContinuationError::InvalidPlan("grid and inclusion domains differ"));
        }
        let cells = self.grid.cell_count();
        let sets = [Some(&self.n), self.n_a.as_ref(), self.n_r.as_ref()];
        if sets.iter().flatten().any(|s| s.universe() != cells) {
            return Err(ContinuationError::InvalidPlan("neighbourhood defined on a different grid"));
        }
        if sets[1..].iter().flatten().any(|s| !s.is_subset(&self.n)) {
            return Err(ContinuationError::InvalidPlan("N_A and N_R must lie inside N"));
        }
        if let Some(a) = self.anchor {
            if !self.parameter_boxes().iter().any(|p| p.lambda.contains(a)) {
                return Err(ContinuationError::InvalidPlan("anchor not covered by the samples"));
            }
        }
        Ok(())
    }

    /// Parameter value (or interval) of each record, in order.
    pub fn parameter_boxes(&self) -> Vec<Params> {
        let point = |l: f64| Params {
            lambda: Interval::point(l),
        };
        match self.mode {
            SweepMode::Interval if self.samples.len() > 1 => self
                .samples
                .windows(2)
                .map(|w| Params {
                    lambda: Interval::new(w[0], w[1]).unwrap(),
                })
                .collect(),
            _ => self.samples.iter().map(|&l| point(l)).collect(),
        }
    }

    /// Index of the record holding the anchor.
    pub fn anchor_index(&self) -> usize {
        let boxes = self.parameter_boxes();
        match self.anchor {
            Some(a) => boxes.iter().position(|p| p.lambda.contains(a)).unwrap_or(0),
            None => {
                let dist = |p: &Params| Interval::point(0.0).gap(p.lambda);
                let mut best = 0;
                for (i, p) in boxes.iter().enumerate() {
                    if dist(p) < dist(&boxes[best]) {
                        best = i;
                    }
                }
                best
            }
        }
    }
}

/// Outcome of the decomposition step at one sample.
#[derive(Clone, Debug, PartialEq)]
pub enum DecompositionStatus {
    /// Only isolation was requested.
    NotRun,
    /// The sample lies outside the verified isolating run.
    NotIsolated,
    Decomposed(ARDecomposition),
    /// The invariant set is empty, so is every part of the decomposition.
    ContinuedToEmpty,
    /// The certificate failed at this sample; the failing check is named.
    Breakdown(DynamicsError),
}

impl DecompositionStatus {
    pub fn is_success(&self) -> bool {
        matches!(self, DecompositionStatus::Decomposed(_) | DecompositionStatus::ContinuedToEmpty)
    }

    pub fn decomposition(&self) -> Option<&ARDecomposition> {
        match self {
            DecompositionStatus::Decomposed(d) => Some(d),
            _ => None,
        }
    }
}

/// Certificates and sets computed at one parameter sample.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleRecord {
    pub lambda: Interval,
    pub isolation: IsolationCertificate,
    pub isolation_a: Option<IsolationCertificate>,
    pub isolation_r: Option<IsolationCertificate>,
    /// `S = Inv(N)` at this sample.
    pub invariant: BoxSet,
    pub decomposition: DecompositionStatus,
}

impl SampleRecord {
    /// All requested isolation certificates pass.
    pub fn isolated(&self) -> bool {
        self.isolation.passed()
            && self.isolation_a.as_ref().is_none_or(|c| c.passed())
            && self.isolation_r.as_ref().is_none_or(|c| c.passed())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub records: Vec<SampleRecord>,
    pub anchor: usize,
    /// Inclusive index range of the longest run of isolated records
    /// containing the anchor; `None` if the anchor itself fails.
    pub verified: Option<(usize, usize)>,
}

impl SweepReport {
    pub fn from_records(records: Vec<SampleRecord>, anchor: usize) -> SweepReport {
        let verified = if records.get(anchor).is_some_and(|r| r.isolated()) {
            let mut lo = anchor;
            while lo > 0 && records[lo - 1].isolated() {
                lo -= 1;
            }
            let mut hi = anchor;
            while hi + 1 < records.len() && records[hi + 1].isolated() {
                hi += 1;
            }
            Some((lo, hi))
        } else {
            None
        };
        SweepReport {
            records,
            anchor,
            verified,
        }
    }

    pub fn in_verified_run(&self, index: usize) -> bool {
        self.verified.is_some_and(|(lo, hi)| lo <= index && index <= hi)
    }

    /// Parameter interval spanned by the verified run.
    pub fn verified_interval(&self) -> Option<Interval> {
        self.verified
            .map(|(lo, hi)| self.records[lo].lambda.hull(self.records[hi].lambda))
    }

    /// Every record isolated and every decomposition that ran succeeded.
    pub fn all_passed(&self) -> bool {
        self.records.iter().all(|r| {
            r.isolated()
                && matches!(
                    r.decomposition,
                    DecompositionStatus::NotRun
                        | DecompositionStatus::Decomposed(_)
                        | DecompositionStatus::ContinuedToEmpty
                )
        })
    }
}

/// Isolation certificates for `N`, `N_A`, `N_R` on one graph.
pub fn isolation_record(plan: &SweepPlan<'_>, graph: &BoxMapGraph) -> SampleRecord {
    let isolation = is_isolating(graph, &plan.n);
    SampleRecord {
        lambda: graph.params().lambda,
        invariant: isolation.invariant.clone(),
        isolation,
        isolation_a: plan.n_a.as_ref().map(|s| is_isolating(graph, s)),
        isolation_r: plan.n_r.as_ref().map(|s| is_isolating(graph, s)),
        decomposition: DecompositionStatus::NotRun,
    }
}

/// Decomposes `S = Inv(N)` with the fixed neighbourhood `U ∩ S`.
pub fn decomposition_status(graph: &BoxMapGraph, invariant: &BoxSet, u: &BoxSet, k_max: usize) -> DecompositionStatus {
    if invariant.is_empty() {
        return DecompositionStatus::ContinuedToEmpty;
    }
    let rg = restrict(graph, invariant);
    match decompose(&rg, &u.intersection(invariant), k_max) {
        Ok(d) => DecompositionStatus::Decomposed(d),
        Err(e) => DecompositionStatus::Breakdown(e),
    }
}

/// Order-preserving map used to run independent per-sample work; lets a
/// caller with threads plug in a parallel implementation.
pub trait Executor: Sync {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send;

    fn build(
        &self,
        grid: &Grid,
        inclusion: &PiecewiseInclusion,
        params: Params,
        tau: f64,
        scheme: StepScheme,
    ) -> Result<BoxMapGraph, BoxMapError> {
        build_graph_with(grid, inclusion, params, tau, scheme)
    }
}

/// Runs everything on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Serial;

impl Executor for Serial {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        items.into_iter().map(f).collect()
    }
}

fn build_all(plan: &SweepPlan<'_>, exec: &impl Executor) -> Result<Vec<BoxMapGraph>, ContinuationError> {
    plan.validate()?;
    let params = plan.parameter_boxes();
    exec.map(params, |p| {
        exec.build(&plan.grid, plan.inclusion, p, plan.tau, plan.scheme)
            .map_err(|source| ContinuationError::Build {
                lo: p.lambda.lo(),
                hi: p.lambda.hi(),
                source,
            })
    })
    .into_iter()
    .collect()
}

/// Isolation sweep with a caller-provided executor.
pub fn sweep_isolating_in(plan: &SweepPlan<'_>, exec: &impl Executor) -> Result<SweepReport, ContinuationError> {
    let graphs = build_all(plan, exec)?;
    let records = exec.map(graphs.iter().collect(), |g| isolation_record(plan, g));
    Ok(SweepReport::from_records(records, plan.anchor_index()))
}

/// Isolation certificates at every sample.
pub fn sweep_isolating(plan: &SweepPlan<'_>) -> Result<SweepReport, ContinuationError> {
    sweep_isolating_in(plan, &Serial)
}

/// Decomposition sweep with a caller-provided executor.
pub fn continue_decomposition_in(
    plan: &SweepPlan<'_>,
    u: &BoxSet,
    k_max: Option<usize>,
    exec: &impl Executor,
) -> Result<SweepReport, ContinuationError> {
    if u.universe() != plan.grid.cell_count() {
        return Err(ContinuationError::InvalidPlan("attracting neighbourhood defined on a different grid"));
    }
    let graphs = build_all(plan, exec)?;
    let records = exec.map(graphs.iter().collect(), |g| isolation_record(plan, g));
    let mut report = SweepReport::from_records(records, plan.anchor_index());
    let budget = |s: &BoxSet| k_max.unwrap_or(4 * s.len().max(1));

    let anchor = report.anchor;
    let s0 = &report.records[anchor].invariant;
    let status = decomposition_status(&graphs[anchor], s0, u, budget(s0));
    if let DecompositionStatus::Breakdown(e) = status {
        return Err(ContinuationError::AnchorFailure(e));
    }

    let work: Vec<(usize, &BoxMapGraph)> = graphs.iter().enumerate().collect();
    let statuses = exec.map(work, |(i, g)| {
        if i == anchor {
            None
        } else if report.in_verified_run(i) {
            let s = &report.records[i].invariant;
            Some(decomposition_status(g, s, u, budget(s)))
        } else {
            Some(DecompositionStatus::NotIsolated)
        }
    });
    for (rec, st) in report.records.iter_mut().zip(statuses) {
        if let Some(st) = st {
            rec.decomposition = st;
        }
    }
    report.records[anchor].decomposition = status;
    Ok(report)
}

/// Tracks the decomposition obtained from `U` at the anchor across the
/// verified run. `k_max` defaults to four times the size of each `S`.
pub fn continue_decomposition(plan: &SweepPlan<'_>, u: &BoxSet, k_max: Option<usize>) -> Result<SweepReport, ContinuationError> {
    continue_decomposition_in(plan, u, k_max, &Serial)
}

/// Combinatorial upper-semicontinuity witness: every `S` in the verified
/// run lies within `1 + ceil(slope * |lambda - lambda_anchor|)` cell
/// dilations of the anchor's `S`. `slope` is in cells per unit of `lambda`.
pub fn semicontinuity_check(grid: &Grid, report: &SweepReport, slope: f64) -> bool {
    let Some((lo, hi)) = report.verified else {
        return false;
    };
    let anchor = &report.records[report.anchor];
    let base = &anchor.invariant;
    let mut dilations: Vec<BoxSet> = Vec::new();
    dilations.push(grid.dilate(base));
    for rec in &report.records[lo..=hi] {
        let drift = (rec.lambda - anchor.lambda).mag();
        let layers = 1 + libm::ceil(slope * drift).max(0.0) as usize;
        while dilations.len() < layers {
            let next = grid.dilate(dilations.last().unwrap());
            dilations.push(next);
        }
        if !rec.invariant.is_subset(&dilations[layers - 1]) {
            return false;
        }
    }
    true
}

/// Convenience for tests and callers that only need `Inv(N)` at one value.
pub fn invariant_at(
    inclusion: &PiecewiseInclusion,
    grid: &Grid,
    tau: f64,
    scheme: StepScheme,
    lambda: f64,
    n: &BoxSet,
) -> Result<BoxSet, ContinuationError> {
    let params = Params::at(lambda)?;
    let g = build_graph_with(grid, inclusion, params, tau, scheme).map_err(|source| ContinuationError::Build {
        lo: lambda,
        hi: lambda,
        source,
    })?;
    Ok(invariant_part(&g, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems;
    use alloc::vec;

    fn saddle_plan(f: &PiecewiseInclusion, samples: Vec<f64>) -> SweepPlan<'_> {
        let grid = Grid::new(f.domain().clone(), vec![64]).unwrap();
        SweepPlan {
            inclusion: f,
            n: BoxSet::full(grid.cell_count()),
            grid,
            tau: 0.5,
            scheme: StepScheme::FirstOrder,
            samples,
            mode: SweepMode::Sampled,
            anchor: None,
            n_a: None,
            n_r: None,
        }
    }

    #[test]
    fn plan_validation() {
        let f = systems::saddle_node();
        assert!(saddle_plan(&f, vec![]).validate().is_err());
        assert!(saddle_plan(&f, vec![0.5, 0.25]).validate().is_err());
        assert!(saddle_plan(&f, vec![0.0, 0.5]).validate().is_ok());
        let mut p = saddle_plan(&f, vec![0.0]);
        p.n_a = Some(BoxSet::empty(3));
        assert!(p.validate().is_err());
    }

    #[test]
    fn interval_mode_uses_gaps() {
        let f = systems::saddle_node();
        let mut p = saddle_plan(&f, vec![0.0, 0.5, 1.0]);
        p.mode = SweepMode::Interval;
        let boxes = p.parameter_boxes();
        assert_eq!(boxes.len(), 2);
        assert_eq!(boxes[1].lambda, Interval::new(0.5, 1.0).unwrap());
        assert_eq!(p.anchor_index(), 0);
    }

    #[test]
    fn singleton_sweep_is_plain_isolation() {
        let f = systems::saddle_node();
        let plan = saddle_plan(&f, vec![0.0]);
        let report = sweep_isolating(&plan).unwrap();
        let g = crate::boxmap::build_graph(&plan.grid, &f, Params::default(), plan.tau).unwrap();
        assert_eq!(report.records[0].isolation, is_isolating(&g, &plan.n));
        assert_eq!(report.verified, Some((0, 0)));
    }

    #[test]
    fn verified_run_is_contiguous_around_anchor() {
        let f = systems::saddle_node();
        let plan = saddle_plan(&f, vec![0.0, 0.5]);
        let mut report = sweep_isolating(&plan).unwrap();
        let mut bad = report.records[1].clone();
        bad.isolation.moat_verified = false;
        report.records.push(bad);
        report.records.push(report.records[0].clone());
        let r = SweepReport::from_records(report.records, 0);
        assert_eq!(r.verified, Some((0, 1)));
        assert!(!r.in_verified_run(3));
    }

    #[test]
    fn semicontinuity_budget() {
        let f = systems::saddle_node();
        let plan = saddle_plan(&f, vec![0.0, 0.5]);
        let report = sweep_isolating(&plan).unwrap();
        assert!(report.records[1].invariant.is_empty());
        assert!(semicontinuity_check(&plan.grid, &report, 0.0));

        // a far-away invariant set needs a large slope to be accepted
        let mut moved = report.clone();
        moved.records[1].invariant = BoxSet::from_ids(64, vec![60]);
        assert!(!semicontinuity_check(&plan.grid, &moved, 0.0));
        assert!(semicontinuity_check(&plan.grid, &moved, 200.0));
    }
}
