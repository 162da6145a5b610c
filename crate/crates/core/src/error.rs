use thiserror::Error;

use crate::ivec::IntervalVector;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InclusionError {
    #[error("box does not meet the domain")]
    EmptyIntersection,
    #[error("no piece or override covers {region}")]
    UncoveredRegion { region: IntervalVector },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("parameter [{lo}, {hi}] outside the family interval")]
    ParameterOutOfRange { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs one positive subdivision count per axis")]
    BadSubdivisions,
    #[error("grid domain has an axis of zero width")]
    DegenerateDomain,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoxMapError {
    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("centered scheme needs at least one substep and one subdivision")]
    InvalidScheme,
    #[error("a-priori enclosure did not converge after {iterations} inflations")]
    NoEnclosure { iterations: usize },
    #[error("cell box lies outside the domain")]
    CellOutsideDomain,
    #[error("grid and inclusion domains differ")]
    DomainMismatch,
    #[error("cell {cell}: {source}")]
    Cell { cell: usize, source: alloc::boxed::Box<BoxMapError> },
    #[error(transparent)]
    Inclusion(#[from] InclusionError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("no k <= {k_max} moves the closure of U into its interior")]
    NoAttractor { k_max: usize },
    #[error("attractor certificate missing or invalid for this neighbourhood")]
    PreconditionViolated,
    #[error("connecting region check failed ({side}); refine the grid")]
    DecompositionInconsistent { side: &'static str },
    #[error("Hausdorff distance needs non-empty sets")]
    EmptyInput,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContinuationError {
    #[error("invalid sweep plan: {0}")]
    InvalidPlan(&'static str),
    #[error("graph construction failed at lambda = [{lo}, {hi}]: {source}")]
    Build { lo: f64, hi: f64, source: BoxMapError },
    #[error("anchor decomposition failed: {0}")]
    AnchorFailure(DynamicsError),
    #[error(transparent)]
    Inclusion(#[from] InclusionError),
}
