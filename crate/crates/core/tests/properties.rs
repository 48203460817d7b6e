use lqdim::constructors::{graph_weights, WeightedGraph};
use lqdim::convexdim::{s_conv, s_conv_max_components, s_u, summarize, Provenance, RateProfile};
use lqdim::counting::cube_count;
use lqdim::geometry::{Norm, Point, SetSpec};
use lqdim::measures::{fm_distance, FiniteMeasure};
use lqdim::separation::{bsi_estimate, components};
use proptest::prelude::*;

fn dyadic_points(dim: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(prop::collection::vec((0u32..=64).prop_map(|k| k as f64 / 64.0), dim), 1..12)
}

fn small_set() -> impl Strategy<Value = SetSpec> {
    prop_oneof![
        (1usize..=2).prop_flat_map(dyadic_points).prop_map(|p| SetSpec::points(p).unwrap()),
        ((0u32..8), (1u32..8)).prop_map(|(a, w)| SetSpec::boxed(vec![a as f64 / 8.0], vec![(a + w) as f64 / 8.0]).unwrap()),
    ]
}

fn measure(dim: usize) -> impl Strategy<Value = FiniteMeasure> {
    prop::collection::vec((prop::collection::vec(0.0..3.0f64, dim), 0.05..1.0f64), 1..=6).prop_map(|atoms| {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        FiniteMeasure::with_tolerance(atoms.into_iter().map(|(x, w)| (x, w / total)).collect(), 1e-9).unwrap()
    })
}

fn profile() -> impl Strategy<Value = RateProfile> {
    (1usize..=3).prop_flat_map(|m| {
        prop::collection::vec(prop::collection::vec(0.0..3.0f64, m), 1..=4)
            .prop_map(move |vs| RateProfile::new(m, vs, Provenance::User).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn counts_and_components_grow_with_level(set in small_set(), n in 0u32..8) {
        let (a, _) = cube_count(&set, n).unwrap();
        let (b, _) = cube_count(&set, n + 1).unwrap();
        prop_assert!(a <= b);
        let ca = components(&set, n).unwrap().count();
        let cb = components(&set, n + 1).unwrap().count();
        prop_assert!(ca <= cb && cb <= b);
    }

    #[test]
    fn components_are_separated(set in small_set(), n in 0u32..7) {
        let comps = components(&set, n).unwrap();
        for (i, a) in comps.members.iter().enumerate() {
            for b in &comps.members[i + 1..] {
                for &x in a {
                    for &y in b {
                        let (cx, cy) = (comps.cover.cubes[x], comps.cover.cubes[y]);
                        let gap = (0..comps.cover.dim).map(|k| (cx[k] - cy[k]).abs()).max().unwrap();
                        prop_assert!(gap >= 2);
                    }
                }
            }
        }
    }

    #[test]
    fn separation_index_below_box_ratio(set in small_set()) {
        let (series, est) = bsi_estimate(&set, 2, 8).unwrap();
        for row in &series.rows {
            let (count, _) = cube_count(&set, row.n).unwrap();
            prop_assert!(row.log_count <= (count as f64).ln() + 1e-12);
        }
        prop_assert!(est.lower_window <= est.upper_window);
    }

    #[test]
    fn halving_shifts_levels(set in small_set(), shift in 0i32..4, n in 0u32..7) {
        let t = vec![shift as f64 / 2.0; set.dim()];
        let image = SetSpec::affine(set.clone(), 0.5, t).unwrap();
        prop_assert_eq!(cube_count(&image, n + 1).unwrap().0, cube_count(&set, n).unwrap().0);
    }

    #[test]
    fn convex_chain(p in profile()) {
        let s = summarize(&p).unwrap();
        prop_assert!(s.s_u <= s.s_conv.value + 1e-12);
        prop_assert!(s.s_conv.value <= s.s_conv_max + 1e-12);
        prop_assert!((s.s_conv_max - s_conv_max_components(&p)).abs() < 1e-12);
        let w: f64 = s.s_conv.weights.iter().sum();
        prop_assert!((w - 1.0).abs() < 1e-12);
    }

    #[test]
    fn convex_scale_invariance(p in profile(), lambda in 0.1..1.0f64) {
        let scaled = RateProfile::new(p.m, p.vectors.iter().map(|v| v.iter().map(|x| x * lambda).collect()).collect(), Provenance::User).unwrap();
        prop_assert!((s_u(&scaled) - lambda * s_u(&p)).abs() < 1e-9);
        prop_assert!((s_conv(&scaled).unwrap().value - lambda * s_conv(&p).unwrap().value).abs() < 1e-9);
    }

    #[test]
    fn fm_distance_bounds(mu in measure(1), nu in measure(1)) {
        let d = fm_distance(&mu, &nu, Norm::Chebyshev).unwrap().value();
        prop_assert!((-1e-12..=2.0 + 1e-12).contains(&d));
        prop_assert!(fm_distance(&mu, &mu, Norm::Chebyshev).unwrap().value().abs() < 1e-12);
    }

    #[test]
    fn set_json_round_trip(set in small_set()) {
        let text = set.to_json();
        prop_assert_eq!(SetSpec::from_json(&text).unwrap().to_json(), text);
    }

    #[test]
    fn measure_json_round_trip(mu in measure(2)) {
        let back = FiniteMeasure::from_json(&mu.to_json()).unwrap();
        prop_assert_eq!(back.len(), mu.len());
        for (a, b) in mu.atoms().iter().zip(back.atoms()) {
            prop_assert_eq!(&a.point, &b.point);
            prop_assert!((a.mass() - b.mass()).abs() < 1e-15);
        }
    }

    #[test]
    fn graph_weights_on_random_trees(parents in prop::collection::vec(any::<prop::sample::Index>(), 1..40),
                                      rho in 1.0..3.0f64, eps_exp in 1i32..20) {
        let edges: Vec<(usize, usize)> = parents.iter().enumerate().map(|(i, p)| (i + 1, p.index(i + 1))).collect();
        let g = WeightedGraph::new(parents.len() + 1, &edges).unwrap();
        let w = graph_weights(&g, 2f64.powi(-eps_exp), rho).unwrap();
        prop_assert!(w.validate(&g).is_ok());
    }
}
