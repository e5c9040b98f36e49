use super::*;
use crate::metric_space::surface_distance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn random_point(rng: &mut ChaCha8Rng, surface: Surface) -> SurfacePoint {
    match surface {
        Surface::Sphere => SurfacePoint::sphere(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ),
        Surface::Annulus | Surface::Mobius => {
            SurfacePoint::on(surface, [rng.gen_range(-1.0..1.0), rng.gen()])
        }
        Surface::Plane => SurfacePoint::plane(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)),
        _ => SurfacePoint::on(surface, [rng.gen(), rng.gen()]),
    }
}

fn catalog() -> Vec<SurfaceMap> {
    let warp = SurfaceMap::torus_shear(0.08, -0.05).unwrap();
    let kwarp = warp.on_klein().unwrap();
    let swarp = SurfaceMap::strip_shear(0.2, 0.07).unwrap();
    vec![
        SurfaceMap::mobius(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap(),
        SurfaceMap::mobius(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap(),
        SurfaceMap::mobius(c(0.3, 1.1), c(-0.4, 0.2), c(0.5, -0.1), c(1.2, 0.3)).unwrap(),
        SurfaceMap::rotation(0.318),
        SurfaceMap::fractional_reflection(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap(),
        SurfaceMap::rotation_profile(Profile::identity_ramp()),
        SurfaceMap::polar_warp(0.1).unwrap(),
        SurfaceMap::conjugate(&SurfaceMap::rotation(0.2), &SurfaceMap::polar_warp(0.1).unwrap()).unwrap(),
        SurfaceMap::torus_translation(0.3, 0.7).unwrap(),
        SurfaceMap::torus_reversing_type1(0.23).unwrap(),
        SurfaceMap::torus_reversing_type2(0.41).unwrap(),
        SurfaceMap::torus_linear([[0, -1], [1, 0]], [0.1, 0.0]).unwrap(),
        SurfaceMap::torus_linear([[2, 1], [1, 1]], [0.0, 0.0]).unwrap(),
        SurfaceMap::conjugate(&SurfaceMap::torus_translation(0.31, 0.77).unwrap(), &warp).unwrap(),
        SurfaceMap::fiber_shift(0.1, 0.03).unwrap(),
        SurfaceMap::klein_phi(0.37).unwrap(),
        SurfaceMap::klein_psi(0.37).unwrap(),
        SurfaceMap::conjugate(&SurfaceMap::klein_psi(0.21).unwrap(), &kwarp).unwrap(),
        SurfaceMap::annulus_rotation(0.17).unwrap(),
        SurfaceMap::annulus_reversing(0.17).unwrap(),
        SurfaceMap::conjugate(&SurfaceMap::annulus_rotation(0.17).unwrap(), &swarp).unwrap(),
        SurfaceMap::mobius_strip_rotation(0.29).unwrap(),
        SurfaceMap::annulus_reversing(0.17).unwrap().double().unwrap(),
        SurfaceMap::conjugate(&SurfaceMap::annulus_rotation(0.17).unwrap(), &swarp).unwrap().double().unwrap(),
        SurfaceMap::mobius_strip_rotation(0.29).unwrap().double().unwrap(),
        SurfaceMap::plane_affine([[2.0, 0.0], [0.0, 0.5]], [1.0, 0.0]).unwrap(),
    ]
}

#[test]
fn translation_t_sends_zero_to_one() {
    let t = SurfaceMap::mobius(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
    let z = t.forward(&SurfacePoint::from_complex(c(0.0, 0.0))).unwrap();
    assert!((z.to_complex().unwrap() - c(1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn torus_translation_reduces() {
    let f = SurfaceMap::torus_translation(0.3, 0.7).unwrap();
    let p = f.forward(&SurfacePoint::torus(0.9, 0.9)).unwrap();
    let q = SurfacePoint::torus(0.2, 0.6);
    assert!(surface_distance(&p, &q).unwrap() < 1e-12);
}

#[test]
fn dilation_inverse() {
    let h = SurfaceMap::mobius(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)).unwrap();
    let z = h.inverse(&SurfacePoint::from_complex(c(2.0, 0.0))).unwrap();
    assert!((z.to_complex().unwrap() - c(1.0, 0.0)).norm() < 1e-12);
}

#[test]
fn round_trip_every_family() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for f in catalog() {
        for _ in 0..1000 {
            let x = random_point(&mut rng, f.surface());
            let y = f.inverse(&f.forward(&x).unwrap()).unwrap();
            let d = surface_distance(&x, &y).unwrap();
            let tol = if f.surface() == Surface::Plane { 1e-9 * (1.0 + x.coords()[0].abs()) } else { 1e-9 };
            assert!(d <= tol, "{} round trip off by {d} at {x:?}", f.kind_name());
        }
    }
}

#[test]
fn reversing_type1_inverse_is_negated_shift() {
    let f = SurfaceMap::torus_reversing_type1(0.23).unwrap();
    let g = SurfaceMap::torus_reversing_type1(-0.23).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let x = random_point(&mut rng, Surface::Torus);
        let y = f.inverse(&x).unwrap();
        assert!(surface_distance(&y, &g.forward(&x).unwrap()).unwrap() < 1e-12);
    }
}

#[test]
fn mismatched_point_rejected() {
    let f = SurfaceMap::torus_translation(0.1, 0.2).unwrap();
    assert!(matches!(f.forward(&SurfacePoint::north()), Err(Error::SurfaceMismatch { .. })));
    assert!(matches!(SurfaceMap::rotation(0.1).lift_forward([0.0, 0.0]), Err(Error::NoLift)));
}

#[test]
fn lift_examples() {
    let f = SurfaceMap::torus_translation(0.3, 0.45).unwrap();
    let p = f.lift_forward([1.2, -3.0]).unwrap();
    assert!((p[0] - 1.5).abs() < 1e-15 && (p[1] + 2.55).abs() < 1e-15);
    let t1 = SurfaceMap::torus_reversing_type1(0.2).unwrap();
    let d = sub(t1.lift_forward([1.3, 0.4]).unwrap(), t1.lift_forward([0.3, 0.4]).unwrap());
    assert!((d[0] + 1.0).abs() < 1e-12 && d[1].abs() < 1e-12);
    let t2 = SurfaceMap::torus_reversing_type2(0.2).unwrap();
    let d = sub(t2.lift_forward([1.3, 0.4]).unwrap(), t2.lift_forward([0.3, 0.4]).unwrap());
    assert!((d[0] + 1.0).abs() < 1e-12 && (d[1] - 1.0).abs() < 1e-12);
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

#[test]
fn homology_matrices() {
    assert_eq!(homology_matrix_of(&SurfaceMap::torus_translation(0.3, 0.1).unwrap()).unwrap(), HomologyMatrix::IDENTITY);
    assert_eq!(homology_matrix_of(&SurfaceMap::torus_reversing_type1(0.3).unwrap()).unwrap(), HomologyMatrix::TYPE1);
    assert_eq!(homology_matrix_of(&SurfaceMap::torus_reversing_type2(0.3).unwrap()).unwrap(), HomologyMatrix::TYPE2);
    let d = SurfaceMap::annulus_reversing(0.1).unwrap().double().unwrap();
    assert_eq!(homology_matrix_of(&d).unwrap(), HomologyMatrix::TYPE1);
    let r = SurfaceMap::annulus_rotation(0.1).unwrap().double().unwrap();
    assert_eq!(homology_matrix_of(&r).unwrap(), HomologyMatrix::IDENTITY);
    assert!(matches!(homology_matrix_of(&SurfaceMap::rotation(0.1)), Err(Error::NoLift)));
}

#[test]
fn lift_equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for f in catalog().into_iter().filter(|f| matches!(f.surface(), Surface::Torus | Surface::Klein)) {
        let a = homology_matrix_of(&f).unwrap();
        for _ in 0..100 {
            let x = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let v = [rng.gen_range(-2..=2) as f64, rng.gen_range(-2..=2) as f64];
            let fx = f.lift_forward(x).unwrap();
            let fxv = f.lift_forward([x[0] + v[0], x[1] + v[1]]).unwrap();
            let av = a.apply(v);
            let err = (fxv[0] - fx[0] - av[0]).hypot(fxv[1] - fx[1] - av[1]);
            assert!(err <= 1e-9, "{}: equivariance defect {err}", f.kind_name());
        }
    }
}

#[test]
fn orientation_matches_jacobian_sign() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = 1e-5;
    for f in catalog() {
        let mut checked = 0;
        while checked < 100 {
            let x = random_point(&mut rng, f.surface());
            let sign = match x {
                SurfacePoint::Sphere(_) => {
                    let Some(z) = x.to_complex() else { continue };
                    if z.norm() > 5.0 || z.norm() < 1e-3 {
                        continue;
                    }
                    let g = |w: C| f.forward(&SurfacePoint::from_complex(w)).unwrap().to_complex();
                    let (Some(fx), Some(fy), Some(gx), Some(gy)) =
                        (g(z + h), g(z - h), g(z + c(0.0, h)), g(z - c(0.0, h)))
                    else {
                        continue;
                    };
                    let dx = (fx - fy) / (2.0 * h);
                    let dy = (gx - gy) / (2.0 * h);
                    (dx.re * dy.im - dx.im * dy.re).signum()
                }
                _ => {
                    let p = x.coords2().unwrap();
                    if matches!(f.surface(), Surface::Annulus | Surface::Mobius) && p[0].abs() > 0.99 {
                        continue;
                    }
                    let g = |q: [f64; 2]| f.lift_forward(q).unwrap();
                    let dx = sub(g([p[0] + h, p[1]]), g([p[0] - h, p[1]]));
                    let dy = sub(g([p[0], p[1] + h]), g([p[0], p[1] - h]));
                    (dx[0] * dy[1] - dx[1] * dy[0]).signum()
                }
            };
            let expected = if f.orientation() == Orientation::Preserving { 1.0 } else { -1.0 };
            assert_eq!(sign, expected, "{} orientation flag disagrees", f.kind_name());
            checked += 1;
        }
    }
}

#[test]
fn psi_squared_is_phi_of_double_angle() {
    let alpha = 0.2371;
    let psi = SurfaceMap::klein_psi(alpha).unwrap();
    let phi = SurfaceMap::klein_phi(2.0 * alpha).unwrap();
    for i in 0..64 {
        for j in 0..64 {
            let x = SurfacePoint::klein(i as f64 / 64.0, j as f64 / 64.0);
            let a = psi.forward(&psi.forward(&x).unwrap()).unwrap();
            let b = phi.forward(&x).unwrap();
            assert!(surface_distance(&a, &b).unwrap() <= 1e-9);
        }
    }
}

#[test]
fn klein_retag_requires_commutation() {
    assert!(SurfaceMap::torus_shear(0.1, 0.1).unwrap().on_klein().is_ok());
    let bad = SurfaceMap::fiber_shift(0.1, 0.0).unwrap().on_klein();
    assert!(matches!(bad, Err(Error::ThetaCommutationFailure { .. })));
}

#[test]
fn doubled_strip_rotation_is_phi() {
    let d = SurfaceMap::mobius_strip_rotation(0.29).unwrap().double().unwrap();
    let phi = SurfaceMap::klein_phi(0.29).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let x = random_point(&mut rng, Surface::Klein);
        let d1 = surface_distance(&d.forward(&x).unwrap(), &phi.forward(&x).unwrap()).unwrap();
        assert!(d1 < 1e-12);
    }
}

#[test]
fn composition_depth_capped() {
    let f = SurfaceMap::torus_shear(0.01, 0.01).unwrap();
    assert!(f.power(64).is_ok());
    assert!(matches!(f.power(65), Err(Error::CompositionTooDeep { .. })));
}

#[test]
fn power_matches_iterate() {
    let f = SurfaceMap::conjugate(&SurfaceMap::rotation(0.1), &SurfaceMap::polar_warp(0.1).unwrap()).unwrap();
    let f3 = f.power(3).unwrap();
    let fm2 = f.power(-2).unwrap();
    let x = SurfacePoint::sphere(0.3, -0.2, 0.5);
    let a = f3.forward(&x).unwrap();
    let b = f.iterate(&x, 3).unwrap();
    assert!(surface_distance(&a, &b).unwrap() < 1e-12);
    let a = fm2.forward(&x).unwrap();
    let b = f.iterate(&x, -2).unwrap();
    assert!(surface_distance(&a, &b).unwrap() < 1e-12);
}

#[test]
fn json_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for f in catalog() {
        let doc = map_to_json(&f);
        let g = map_from_json(&doc).unwrap_or_else(|e| panic!("{}: {e}", doc));
        assert_eq!(g.surface(), f.surface());
        for _ in 0..20 {
            let x = random_point(&mut rng, f.surface());
            let d = surface_distance(&f.forward(&x).unwrap(), &g.forward(&x).unwrap()).unwrap();
            assert!(d < 1e-12, "{doc}");
        }
    }
}

#[test]
fn json_errors() {
    use serde_json::json;
    assert!(map_from_json(&json!({"kind": "nonsense"})).is_err());
    assert!(map_from_json(&json!({"kind": "torus_translation", "params": {"alpha": 0.1}})).is_err());
    assert!(map_from_json(&json!({"surface": "sphere", "kind": "torus_translation", "params": {"alpha": 0.1, "beta": 0.2}})).is_err());
    let m = map_from_json(&json!({"kind": "mobius", "params": {"a": [2, 0], "b": 0, "c": 0, "d": 1}})).unwrap();
    assert_eq!(m.orientation(), Orientation::Preserving);
}
