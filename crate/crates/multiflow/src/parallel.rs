//! Thread-pool execution of box-map builds and per-sample work.

use multiflow_core::boxmap::{image_boxes_unchecked, prepare};
use multiflow_core::continuation::Executor;
use multiflow_core::{BoxMapError, BoxMapGraph, Grid, Params, PiecewiseInclusion, StepScheme};
use rayon::prelude::*;

/// Runs on the current rayon pool; results keep input order, so output is
/// identical for every thread count.
#[derive(Clone, Copy, Debug, Default)]
pub struct Rayon;

impl Executor for Rayon {
    fn map<T, R, F>(&self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        items.into_par_iter().map(f).collect()
    }

    fn build(
        &self,
        grid: &Grid,
        inclusion: &PiecewiseInclusion,
        params: Params,
        tau: f64,
        scheme: StepScheme,
    ) -> Result<BoxMapGraph, BoxMapError> {
        build_graph_parallel(grid, inclusion, params, tau, scheme)
    }
}

/// Parallel counterpart of [`multiflow_core::build_graph_with`].
pub fn build_graph_parallel(
    grid: &Grid,
    inclusion: &PiecewiseInclusion,
    params: Params,
    tau: f64,
    scheme: StepScheme,
) -> Result<BoxMapGraph, BoxMapError> {
    let cfg = prepare(grid, inclusion, params, tau, scheme)?;
    let images = (0..grid.cell_count())
        .into_par_iter()
        .map(|c| image_boxes_unchecked(c, &cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BoxMapGraph::from_images(grid.clone(), tau, params, images))
}

/// Runs `f` on a pool with `threads` workers (`None`: rayon's default).
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}
