use kere_core::metric_space::*;
use proptest::prelude::*;

fn sphere_point() -> impl Strategy<Value = SurfacePoint> {
    (-1.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(z, phi)| {
        let r = (1.0 - z * z).sqrt();
        SurfacePoint::sphere(r * phi.cos(), r * phi.sin(), z)
    })
}

fn torus_point() -> impl Strategy<Value = SurfacePoint> {
    (0.0f64..1.0, 0.0f64..1.0).prop_map(|(s, t)| SurfacePoint::torus(s, t))
}

fn klein_point() -> impl Strategy<Value = SurfacePoint> {
    (0.0f64..1.0, 0.0f64..1.0).prop_map(|(s, t)| SurfacePoint::klein(s, t))
}

fn set_of(p: impl Strategy<Value = SurfacePoint>, max: usize) -> impl Strategy<Value = FiniteSet> {
    prop::collection::vec(p, 1..max).prop_map(|v| FiniteSet::exact(v).unwrap())
}

fn brute(a: &FiniteSet, b: &FiniteSet) -> f64 {
    let dir = |x: &FiniteSet, y: &FiniteSet| {
        x.points()
            .iter()
            .map(|p| y.points().iter().map(|q| surface_distance(p, q).unwrap()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    dir(a, b).max(dir(b, a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hausdorff_is_a_metric_on_the_sphere(a in set_of(sphere_point(), 40), b in set_of(sphere_point(), 40), c in set_of(sphere_point(), 40)) {
        let ab = hausdorff_distance(&a, &b).unwrap();
        prop_assert!((ab - hausdorff_distance(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        let bc = hausdorff_distance(&b, &c).unwrap();
        let ac = hausdorff_distance(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
    }

    #[test]
    fn hausdorff_matches_brute_force(a in set_of(torus_point(), 60), b in set_of(torus_point(), 60)) {
        prop_assert_eq!(hausdorff_distance(&a, &b).unwrap(), brute(&a, &b));
    }

    #[test]
    fn klein_distance_is_symmetric_and_bounded(p in klein_point(), q in klein_point()) {
        let d = surface_distance(&p, &q).unwrap();
        prop_assert!((d - surface_distance(&q, &p).unwrap()).abs() < 1e-12);
        prop_assert!(d <= 0.5f64.hypot(0.5) + 1e-12);
        // the deck image is the same point
        let c = p.coords2().unwrap();
        let img = SurfacePoint::klein(-c[0], c[1] + 0.5);
        prop_assert!(surface_distance(&p, &img).unwrap() < 1e-12);
    }

    #[test]
    fn liminf_within_limsup(
        base in prop::collection::vec(torus_point(), 1..12),
        jitter in prop::collection::vec(prop::collection::vec(torus_point(), 0..6), 8..16),
        eta in 0.01f64..0.2,
    ) {
        let items: Vec<FiniteSet> = jitter
            .iter()
            .map(|extra| {
                let mut pts = base.clone();
                pts.extend(extra.iter().copied());
                FiniteSet::exact(pts).unwrap()
            })
            .collect();
        let seq = SetSequence::new(items).unwrap();
        let w = LimitWindow::new(seq.len(), eta);
        let inf = liminf_sets(&seq, w).unwrap().expect("the shared core survives");
        let sup = limsup_sets(&seq, w).unwrap().expect("limsup contains liminf");
        for p in inf.points() {
            prop_assert!(sup.contains_within(p, eta));
        }
    }

    #[test]
    fn local_chart_round_trip(p in sphere_point(), r in 0.0f64..2.5, phi in 0.0f64..6.28) {
        let q = from_local(&p, [r * phi.cos(), r * phi.sin()]);
        let v = local_coords(&p, &q).unwrap();
        prop_assert!((v[0] - r * phi.cos()).abs() < 1e-9 && (v[1] - r * phi.sin()).abs() < 1e-9);
    }
}

#[test]
fn epsilon_components_of_two_clumps() {
    let mut pts = Vec::new();
    for k in 0..10 {
        pts.push(SurfacePoint::torus(0.1 + 0.001 * k as f64, 0.1));
        pts.push(SurfacePoint::torus(0.6, 0.6 + 0.001 * k as f64));
    }
    assert_eq!(epsilon_components(&pts, 0.01).len(), 2);
    assert_eq!(epsilon_components(&pts, 1.0).len(), 1);
}
