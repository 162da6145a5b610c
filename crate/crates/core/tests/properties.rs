//! Graph-level identities of the dynamics module on random graphs and on
//! box maps of the bundled systems.

#[allow(dead_code)]
#[path = "../../validation/src/oracle.rs"]
mod oracle;
#[allow(dead_code)]
#[path = "../../validation/src/checks.rs"]
mod checks;

use checks::{adjacency_from_draws, graph_from, span, trapping_hull};
use multiflow_core::dynamics::{forward_reach, invariant_part, omega_limit, restrict};
use multiflow_core::{build_graph_with, systems, BoxMapGraph, BoxSet, Params, StepScheme};
use oracle::square_grid;
use proptest::collection::vec;
use proptest::prelude::*;

/// Random graph with up to 500 nodes; most edges are local so that
/// attractors and repellers show up, a few jump anywhere.
fn random_graph() -> impl Strategy<Value = BoxMapGraph> {
    (1usize..=500)
        .prop_flat_map(|n| (Just(n), vec(vec((0u8..10, any::<u16>()), 0..=3), n)))
        .prop_map(|(n, draws)| graph_from(adjacency_from_draws(n, draws)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn limit_set_invariance_on_random_graphs(g in random_graph(), a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let n = g.grid().cell_count();
        let rg = restrict(&g, &BoxSet::full(n));
        let u = span(n, a, b);
        checks::limit_set_invariance(&rg, &u).map_err(TestCaseError::fail)?;
        // forward-closed sets always satisfy the hypothesis
        let closed = forward_reach(&rg, &u);
        prop_assert!(omega_limit(&rg, &closed).is_subset(&closed));
        checks::limit_set_invariance(&rg, &closed).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn duality_on_random_graphs(g in random_graph(), a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64) {
        let n = g.grid().cell_count();
        let carrier = span(n, a.min(c), a.max(c)).union(&span(n, b, b));
        checks::duality(&restrict(&g, &carrier), &span(n, a, b)).map_err(TestCaseError::fail)?;
        let t = g.transpose();
        prop_assert_eq!(t.transpose(), g.clone());
        prop_assert_eq!(t.edge_count(), g.edge_count());
    }

    #[test]
    fn idempotence_on_random_graphs(g in random_graph(), a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let n = g.grid().cell_count();
        checks::idempotence(&restrict(&g, &BoxSet::full(n)), &span(n, a, b)).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn nonempty_limit_sets_in_invariant_carriers(g in random_graph(), a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let n = g.grid().cell_count();
        let s = invariant_part(&g, &BoxSet::full(n));
        let rg = restrict(&g, &s);
        let u = span(n, a, b).intersection(&s);
        if !u.is_empty() {
            let om = omega_limit(&rg, &u);
            prop_assert!(!om.is_empty());
            prop_assert_eq!(invariant_part(&rg, &om), om);
        }
    }

    #[test]
    fn partition_and_dual_dual_on_random_graphs(g in random_graph(), a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let n = g.grid().cell_count();
        let s = invariant_part(&g, &BoxSet::full(n));
        let rg = restrict(&g, &s);
        let u = span(n, a, b);
        let found = match checks::partition(&rg, &u).map_err(TestCaseError::fail)? {
            Some(d) => Some(d),
            None => checks::partition(&rg, &trapping_hull(&rg, &u)).map_err(TestCaseError::fail)?,
        };
        prop_assert!(found.is_some() || s.is_empty());
        if let Some((attr, rep)) = found {
            checks::dual_dual(&rg, &attr, &rep).map_err(TestCaseError::fail)?;
        }
    }
}

#[test]
fn identities_on_example_systems() {
    for ex in checks::examples() {
        if let Err(e) = checks::example_identities(&ex) {
            panic!("{}: {e}", ex.name);
        }
    }
}

#[test]
fn builds_are_deterministic() {
    let plane = square_grid(1.5, 16);
    let lc = systems::limit_cycle();
    for scheme in [StepScheme::FirstOrder, StepScheme::Centered { substeps: 4, subdivisions: 2 }] {
        let a = build_graph_with(&plane, &lc, Params::at(0.1).unwrap(), 0.5, scheme).unwrap();
        let b = build_graph_with(&plane, &lc, Params::at(0.1).unwrap(), 0.5, scheme).unwrap();
        assert_eq!(a, b);
    }
}
