use kere_core::metric_space::*;
use kere_core::rotation_invariants::*;
use kere_core::surface_maps::*;
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn unit() -> impl Strategy<Value = f64> {
    0.0f64..1.0
}

fn small() -> impl Strategy<Value = f64> {
    -0.08f64..0.08
}

fn mobius() -> impl Strategy<Value = Mobius> {
    prop::array::uniform8(-2.0f64..2.0).prop_filter_map("degenerate", |v| {
        Mobius::new(C::new(v[0], v[1]), C::new(v[2], v[3]), C::new(v[4], v[5]), C::new(v[6], v[7]))
            .ok()
            .filter(|m| m.a * m.d - m.b * m.c != C::new(0.0, 0.0))
    })
}

const GL2Z: [[[i64; 2]; 2]; 6] = [
    [[1, 0], [0, 1]],
    [[0, -1], [1, 0]],
    [[2, 1], [1, 1]],
    [[-1, 0], [0, 1]],
    [[-1, 0], [1, 1]],
    [[1, 2], [0, 1]],
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn torus_maps_invert(a in unit(), b in unit(), sa in small(), sb in small(), s in unit(), t in unit()) {
        let w = SurfaceMap::torus_shear(sa, sb).unwrap();
        let f = SurfaceMap::conjugate(&SurfaceMap::torus_translation(a, b).unwrap(), &w).unwrap();
        let x = SurfacePoint::torus(s, t);
        let y = f.inverse(&f.forward(&x).unwrap()).unwrap();
        prop_assert!(surface_distance(&x, &y).unwrap() < 1e-9);
    }

    #[test]
    fn mobius_maps_invert(m in mobius(), x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let f = SurfaceMap::from_mobius(m);
        let p = SurfacePoint::from_complex(C::new(x, y));
        let q = f.inverse(&f.forward(&p).unwrap()).unwrap();
        prop_assert!(surface_distance(&p, &q).unwrap() < 1e-7);
    }

    #[test]
    fn lift_is_equivariant(k in 0usize..6, m in -3i64..3, n in -3i64..3, s in unit(), t in unit(), sh in prop::array::uniform2(unit())) {
        let e = GL2Z[k];
        let f = SurfaceMap::torus_linear(e, sh).unwrap();
        let a = homology_matrix_of(&f).unwrap();
        let y0 = f.lift_forward([s, t]).unwrap();
        let y1 = f.lift_forward([s + m as f64, t + n as f64]).unwrap();
        let shift = a.apply([m as f64, n as f64]);
        prop_assert!((y1[0] - y0[0] - shift[0]).abs() < 1e-9);
        prop_assert!((y1[1] - y0[1] - shift[1]).abs() < 1e-9);
    }

    #[test]
    fn translation_vectors_add(a in unit(), b in unit(), c in unit(), d in unit()) {
        let f = SurfaceMap::torus_translation(a, b).unwrap();
        let g = SurfaceMap::torus_translation(c, d).unwrap();
        let fg = f.then(&g).unwrap();
        let tf = translation_vector(&f, [0.2, 0.3], 1000).unwrap();
        let tg = translation_vector(&g, [0.2, 0.3], 1000).unwrap();
        let tfg = translation_vector(&fg, [0.2, 0.3], 1000).unwrap();
        for i in 0..2 {
            prop_assert!(wrap_half(tfg.value[i] - tf.value[i] - tg.value[i]).abs() <= tf.spread + tg.spread + 1e-9);
        }
    }

    #[test]
    fn rotation_number_of_power(alpha in unit(), n in 1i64..5) {
        let c = CircleMap::rigid(alpha);
        let cn = CircleMap::rigid(n as f64 * alpha);
        let r = rotation_number(&c, 0.1, 2000).unwrap().value;
        let rn = rotation_number(&cn, 0.1, 2000).unwrap().value;
        prop_assert!(wrap_half(rn - n as f64 * r).abs() < 1e-6);
    }

    #[test]
    fn documents_round_trip(a in unit(), b in unit(), sa in small(), sb in small()) {
        let w = SurfaceMap::torus_shear(sa, sb).unwrap();
        let f = SurfaceMap::conjugate(&SurfaceMap::torus_translation(a, b).unwrap(), &w).unwrap();
        let back = map_from_json(&map_to_json(&f)).unwrap();
        let x = SurfacePoint::torus(0.3, 0.7);
        prop_assert!(surface_distance(&f.forward(&x).unwrap(), &back.forward(&x).unwrap()).unwrap() < 1e-12);
    }
}

#[test]
fn klein_maps_respect_the_involution() {
    let f = SurfaceMap::klein_psi(0.3).unwrap();
    let p = SurfacePoint::klein(0.2, 0.4);
    let q = SurfacePoint::klein(-0.2, 0.9);
    let (fp, fq) = (f.forward(&p).unwrap(), f.forward(&q).unwrap());
    assert!(surface_distance(&fp, &fq).unwrap() < 1e-12);
}
