//! Certified outer approximations of attractor-repeller decompositions for
//! differential inclusions `x' ∈ F(x, lambda)` on a compact box.
//!
//! The pipeline is: a [`PiecewiseInclusion`] is discretised on a [`Grid`]
//! into a [`BoxMapGraph`] outer-approximating the time-`tau` solution map;
//! the [`dynamics`] module computes invariant parts, limit sets and
//! decompositions on that graph; [`continuation`] repeats this across
//! parameter samples.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;

pub mod boxmap;
pub mod boxset;
pub mod continuation;
pub mod digraph;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod inclusion;
pub mod interval;
pub mod ivec;
pub mod poly;
pub mod systems;

pub use boxmap::{a_priori_enclosure, build_graph, build_graph_with, image_boxes, BoxMapGraph, EnclosureStep, StepScheme};
pub use boxset::BoxSet;
pub use digraph::{Digraph, Direction};
pub use dynamics::{ARDecomposition, IsolationCertificate, RestrictedGraph};
pub use error::{BoxMapError, ContinuationError, DynamicsError, GridError, InclusionError};
pub use grid::Grid;
pub use inclusion::{Halfspace, Override, Params, PiecewiseInclusion, RegionPiece};
pub use interval::Interval;
pub use ivec::IntervalVector;
pub use poly::Polynomial;
