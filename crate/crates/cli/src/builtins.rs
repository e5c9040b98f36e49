//! Named example maps, one or more per class, used by `gallery` and
//! accepted by `--map`.

use kere_core::metric_space::Surface;
use kere_core::surface_maps::{Profile, SurfaceMap};
use num_complex::Complex64 as C;

pub struct Builtin {
    pub name: &'static str,
    pub expected: &'static str,
    /// Class parameter the classifier should report, when the class has one.
    pub parameter: Option<f64>,
    pub map: SurfaceMap,
}

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub const A: f64 = 0.207_106_781_186_547_5; // sqrt(1/2) - 1/2
pub const B: f64 = 0.232_050_807_568_877_3; // sqrt(3) - 3/2
pub const GOLDEN: f64 = 0.618_033_988_749_894_8;

pub fn builtins() -> Vec<Builtin> {
    let (one, zero) = (c(1.0, 0.0), c(0.0, 0.0));
    let rot = C::from_polar(1.0, std::f64::consts::TAU * A);
    let shear = SurfaceMap::torus_shear(0.05, 0.04).unwrap();
    let b = |name, expected, parameter, map: kere_core::Result<SurfaceMap>| Builtin {
        name,
        expected,
        parameter,
        map: map.unwrap(),
    };
    vec![
        b("identity", "Identity", None, Ok(SurfaceMap::identity(Surface::Sphere))),
        b("rotation", "Elliptic", Some(A), Ok(SurfaceMap::rotation(A))),
        b(
            "warped_rotation",
            "Elliptic",
            Some(A),
            SurfaceMap::conjugate(&SurfaceMap::rotation(A), &SurfaceMap::polar_warp(0.1).unwrap()),
        ),
        b("rotation_fifth", "Periodic", None, Ok(SurfaceMap::rotation(0.2))),
        b("parabolic", "Parabolic", None, SurfaceMap::mobius(one, one, zero, one)),
        b("hyperbolic", "Hyperbolic", None, SurfaceMap::mobius(c(2.0, 0.0), zero, zero, one)),
        b("loxodromic", "Hyperbolic", None, SurfaceMap::mobius(C::from_polar(2.0, 0.5), zero, zero, one)),
        b("reflection", "Reflection", None, SurfaceMap::fractional_reflection(one, zero, zero, one)),
        b("semi_parabolic", "SemiParabolic", None, SurfaceMap::fractional_reflection(one, one, zero, one)),
        b("semi_hyperbolic", "SemiHyperbolic", None, SurfaceMap::fractional_reflection(c(2.0, 0.0), zero, zero, one)),
        b("semi_elliptic", "SemiElliptic", Some(A), SurfaceMap::fractional_reflection(zero, rot, one, zero)),
        b("rotation_profile", "NotRegular", None, Ok(SurfaceMap::rotation_profile(Profile::identity_ramp()))),
        b("torus_translation", "TorusTranslation", None, SurfaceMap::torus_translation(GOLDEN, B)),
        b(
            "warped_torus_translation",
            "TorusTranslation",
            None,
            SurfaceMap::conjugate(&SurfaceMap::torus_translation(A, B).unwrap(), &shear),
        ),
        b("torus_rational", "Periodic", None, SurfaceMap::torus_translation(1.0 / 3.0, 0.25)),
        b("torus_reversing_type1", "TorusReversingType1", Some(A), SurfaceMap::torus_reversing_type1(A)),
        b("torus_reversing_type2", "TorusReversingType2", Some(0.3 * A), SurfaceMap::torus_reversing_type2(0.3 * A)),
        b("torus_quarter_turn", "Periodic", None, SurfaceMap::torus_linear([[0, -1], [1, 0]], [0.0, 0.0])),
        b("cat_map", "NotRegular", None, SurfaceMap::torus_linear([[2, 1], [1, 1]], [0.0, 0.0])),
        b("twist", "NotRegular", None, SurfaceMap::fiber_shift(0.1, 0.0)),
        b("klein_phi", "KleinPhi", Some(A), SurfaceMap::klein_phi(A)),
        b("klein_psi", "KleinPsi", Some(A), SurfaceMap::klein_psi(A)),
        b(
            "warped_klein_psi",
            "KleinPsi",
            Some(A),
            SurfaceMap::conjugate(&SurfaceMap::klein_psi(A).unwrap(), &shear.on_klein().unwrap()),
        ),
        b("annulus_rotation", "AnnulusRotation", Some(A), SurfaceMap::annulus_rotation(A)),
        b("annulus_reversing", "AnnulusReversing", Some(A), SurfaceMap::annulus_reversing(A)),
        b("mobius_strip_rotation", "MobiusStrip", Some(A), SurfaceMap::mobius_strip_rotation(A)),
    ]
}

pub fn builtin(name: &str) -> Option<SurfaceMap> {
    builtins().into_iter().find(|b| b.name == name).map(|b| b.map)
}
