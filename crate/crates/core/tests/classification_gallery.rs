use kere_core::classifier::{classify, Budget, MapClass};
use kere_core::metric_space::wrap_half;
use kere_core::surface_maps::SurfaceMap;
use num_complex::Complex64 as C;

fn budget() -> Budget {
    Budget { resolution: 48, horizon: 300, rotation_horizon: 2000, ..Budget::default() }
}

fn class_of(f: &SurfaceMap) -> MapClass {
    classify(f, &budget()).unwrap().class
}

fn same_class(a: &MapClass, b: &MapClass, tol: f64) -> bool {
    if a.name() != b.name() {
        return false;
    }
    match (a, b) {
        (MapClass::TorusTranslation { rho: x }, MapClass::TorusTranslation { rho: y }) => {
            wrap_half(x[0] - y[0]).abs() < tol && wrap_half(x[1] - y[1]).abs() < tol
        }
        _ => match (a.parameter(), b.parameter()) {
            (Some(x), Some(y)) => wrap_half(x - y).abs() < tol,
            _ => true,
        },
    }
}

fn check(f: SurfaceMap, w: SurfaceMap, tol: f64) {
    let plain = class_of(&f);
    let warped = class_of(&SurfaceMap::conjugate(&f, &w).unwrap());
    assert_ne!(plain, MapClass::NotRegular, "{}", f.kind_name());
    assert!(same_class(&plain, &warped, tol), "{plain:?} vs {warped:?}");
}

#[test]
fn sphere_classes_survive_polar_warps() {
    let a = 0.5f64.sqrt() - 0.5;
    let w = SurfaceMap::polar_warp(0.3).unwrap();
    let one = C::new(1.0, 0.0);
    let zero = C::new(0.0, 0.0);
    check(SurfaceMap::rotation(a), w.clone(), 2e-3);
    check(SurfaceMap::mobius(C::new(2.0, 0.0), zero, zero, one).unwrap(), w.clone(), 0.0);
    check(SurfaceMap::mobius(one, one, zero, one).unwrap(), w.clone(), 0.0);
    check(SurfaceMap::fractional_reflection(C::new(2.0, 0.0), zero, zero, one).unwrap(), w, 0.0);
}

#[test]
fn torus_and_klein_classes_survive_shears() {
    let (a, b) = (0.5f64.sqrt() - 0.5, 3f64.sqrt() - 1.5);
    let w = SurfaceMap::torus_shear(0.05, 0.04).unwrap();
    check(SurfaceMap::torus_translation(a, b).unwrap(), w.clone(), 2e-3);
    check(SurfaceMap::torus_reversing_type1(a).unwrap(), w.clone(), 2e-3);
    check(SurfaceMap::torus_reversing_type2(a).unwrap(), w.clone(), 2e-3);
    let wk = w.on_klein().unwrap();
    check(SurfaceMap::klein_phi(a).unwrap(), wk.clone(), 2e-3);
    check(SurfaceMap::klein_psi(a).unwrap(), wk, 2e-3);
}

#[test]
fn bordered_classes_survive_strip_shears() {
    let a = 0.5f64.sqrt() - 0.5;
    let w = SurfaceMap::strip_shear(0.1, 0.05).unwrap();
    check(SurfaceMap::annulus_rotation(a).unwrap(), w.clone(), 2e-3);
    check(SurfaceMap::annulus_reversing(a).unwrap(), w.clone(), 2e-3);
    check(SurfaceMap::mobius_strip_rotation(a).unwrap(), w.on_mobius_strip().unwrap(), 2e-3);
}

#[test]
fn periodic_maps_keep_their_period() {
    let w = SurfaceMap::torus_shear(0.05, 0.04).unwrap();
    let f = SurfaceMap::torus_translation(1.0 / 3.0, 0.25).unwrap();
    let g = SurfaceMap::conjugate(&f, &w).unwrap();
    assert_eq!(class_of(&f), MapClass::Periodic { n: 12 });
    assert_eq!(class_of(&g), MapClass::Periodic { n: 12 });
}
