use std::sync::Arc;

use proptest::prelude::*;

use uniformizer::analysis::*;
use uniformizer::dimensions::*;
use uniformizer::factors::*;
use uniformizer::families::*;
use uniformizer::fuchsian::*;
use uniformizer::moebius::*;
use uniformizer::C64;

fn fixture() -> GroupPresentation {
    punctured_torus_group(3.0, 3.0).unwrap()
}

fn word_strategy(max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec((0u16..2, any::<bool>()), 0..=max)
        .prop_map(|v| Word(v.into_iter().map(|(generator, inverse)| Letter { generator, inverse }).collect()))
}

fn point_strategy() -> impl Strategy<Value = C64> {
    (0.0..0.9f64, 0.0..std::f64::consts::TAU).prop_map(|(r2, t)| C64::from_polar(r2.sqrt(), t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn group_elements_preserve_the_disc(w in word_strategy(8), z in point_strategy()) {
        let g = fixture();
        let m = g.word_matrix(&w).unwrap();
        prop_assert!(m.preserves_disc(1e-8));
        prop_assert!(m.apply_c(z).norm() < 1.0);
        let d0 = hyperbolic_distance(z, C64::new(0.0, 0.0)).unwrap();
        let d1 = hyperbolic_distance(m.apply_c(z), m.apply_c(C64::new(0.0, 0.0))).unwrap();
        prop_assert!((d0 - d1).abs() <= 1e-7 * d0.max(1.0));
    }

    #[test]
    fn canonical_factor_is_a_cocycle(g1 in word_strategy(5), g2 in word_strategy(5), z in point_strategy(), s in 2.0..4.0f64) {
        let f = canonical_factor(&fixture(), s).unwrap();
        prop_assert!(cocycle_residual(&f, &g1, &g2, z).unwrap() <= 1e-9);
    }

    #[test]
    fn dimension_drops_by_one_per_pinch(g in 1u32..6, n in 0u32..6, s in 2u32..5) {
        let t = SurfaceType { genus: g, punctures: n };
        prop_assume!(t.is_stable());
        let plan = PinchPlan::new(vec![PinchMove::Nonseparating { part: 0 }]);
        let child = SurfaceType { genus: g - 1, punctures: n + 2 };
        prop_assume!(child.is_stable());
        let d = boundary_dimension(t, s as f64, &plan).unwrap();
        prop_assert_eq!(d, dim_cusp_forms(t, s as f64).unwrap() as i64 - 1);
        prop_assert_eq!(d, dim_cusp_forms(child, s as f64).unwrap() as i64);
    }

    #[test]
    fn plumbing_round_trip(l in 0.03..100.0f64) {
        let t = plumbing_parameter(l).unwrap();
        prop_assert!((plumbing_length(C64::new(t, 0.0)).unwrap() - l).abs() <= 1e-12 * l.max(1.0));
    }
}

#[test]
fn theta_is_automorphic_on_the_genus_two_group() {
    let g = genus_two_octagon().unwrap();
    let e = Arc::new(enumerate_ball(&g, 3.5, 4.0).unwrap());
    let f = FormSpec::canonical(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.5)], e, 2.0).unwrap();
    for w in ["A", "b", "C", "d"] {
        let r = automorphy_residual(&f, &w.parse().unwrap(), C64::new(0.05, -0.03)).unwrap();
        assert!(r.residual <= 10.0 * r.tail_bound, "{w}: {r:?}");
    }
}

#[test]
fn gram_along_the_pinch_path_stays_psd() {
    let p = FamilyPath::pinch(2.0, vec![vec![C64::new(1.0, 0.0)], vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]])
        .unwrap();
    let s = GramSettings { trunc: Truncation::Ball { radius: 5.0, slack: 4.0 }, ..Default::default() };
    for u in [1.0, 0.3, 0.05] {
        let r = gram_matrix(&p, u, &s).unwrap();
        assert!(r.min_relative_eigenvalue() >= -1e-8 - r.error / r.eigenvalues[0], "u = {u}: {:?}", r.eigenvalues);
        assert!(r.asymmetry <= 1e-10 * r.eigenvalues[0]);
    }
}

#[test]
fn scalar_route_matches_taylor_and_direct_sums() {
    let g = fixture();
    let e = Arc::new(enumerate_ball(&g, 3.0, 4.0).unwrap());
    let h = vec![C64::new(0.5, 0.0), C64::new(0.0, 1.0)];
    let f = FormSpec::canonical(h.clone(), e.clone(), 3.0).unwrap();
    let t = theta_taylor(&f.factor, &[h.clone()], e.truncation, 4, usize::MAX).unwrap();
    for z in [C64::new(0.0, 0.0), C64::new(0.05, 0.02)] {
        let direct = theta_series(&f, z).unwrap().value;
        let series: C64 = t.coeffs[0].iter().rev().fold(C64::new(0.0, 0.0), |a, &k| a * z + k);
        assert!((direct - series).norm() <= 1e-4 * direct.norm().max(1.0), "{direct} {series}");
    }
}
