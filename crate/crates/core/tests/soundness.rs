//! Box maps against sampled solutions of the bundled systems.

#[allow(dead_code)]
#[path = "../../validation/src/oracle.rs"]
mod oracle;
#[allow(dead_code)]
#[path = "../../validation/src/checks.rs"]
mod checks;

use checks::{score, setup, Setup};
use multiflow_core::{build_graph_with, StepScheme};
use oracle::references;
use rand::rngs::StdRng;
use rand::SeedableRng;

const TRAJECTORIES: usize = 1000;

fn check_scheme(pick: impl Fn(&Setup) -> StepScheme, seed: u64) {
    let mut rng = StdRng::seed_from_u64(seed);
    for r in references() {
        let s = setup(&r);
        for &p in &s.params {
            let g = build_graph_with(&s.grid, &r.inclusion, p, s.tau, pick(&s)).unwrap();
            let t = score(&r, &g, &mut rng, TRAJECTORIES);
            assert!(t.inside >= TRAJECTORIES / 2, "{}: too few scored solutions {t:?}", r.name);
            assert!(t.violations.is_empty(), "{} at {:?}: {:#?}", r.name, p, t.violations);
        }
    }
}

#[test]
fn first_order_maps_contain_sampled_solutions() {
    check_scheme(|_| StepScheme::FirstOrder, 7);
}

#[test]
fn centered_maps_contain_sampled_solutions() {
    check_scheme(|s| s.centered, 11);
}

#[test]
fn exits_are_seen_where_solutions_leave() {
    let mut rng = StdRng::seed_from_u64(3);
    for r in references().into_iter().filter(|r| r.name == "constant" || r.name == "saddle_node") {
        let s = setup(&r);
        let g = build_graph_with(&s.grid, &r.inclusion, s.params[0], s.tau, s.centered).unwrap();
        let t = score(&r, &g, &mut rng, TRAJECTORIES);
        assert!(t.left > 0, "{}: no sampled solution left the domain", r.name);
        assert!(t.violations.is_empty(), "{:#?}", t.violations);
    }
}

#[test]
fn refined_images_stay_near_parent_images() {
    for r in references() {
        let s = setup(&r);
        for scheme in [StepScheme::FirstOrder, s.centered] {
            checks::refined_images_near_parents(&r, &s, scheme).unwrap();
        }
    }
}

#[test]
fn refinement_shrinks_outer_approximations() {
    for r in references() {
        let s = setup(&r);
        for scheme in [StepScheme::FirstOrder, s.centered] {
            checks::refinement_shrinks(&r, &s, scheme).unwrap();
        }
    }
}
