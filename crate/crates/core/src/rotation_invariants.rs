//! Rotation numbers of circle maps, translation vectors of torus lifts and
//! rotation vectors.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric_space::{frac, Surface, SurfacePoint};
use crate::surface_maps::{homology_matrix_of, SurfaceMap};

type Lift = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Monotone degree-one circle map, given by a lift `F` with `F(x+1) = F(x) + 1`.
#[derive(Clone)]
pub struct CircleMap {
    lift: Lift,
}

impl std::fmt::Debug for CircleMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CircleMap").finish_non_exhaustive()
    }
}

impl CircleMap {
    /// Wraps a lift after checking periodicity and monotonicity on 256 samples.
    pub fn from_lift(lift: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let c = CircleMap { lift: Arc::new(lift) };
        let defect = c.degree_one_defect();
        if defect > 1e-9 {
            return Err(Error::NotDegreeOne { defect });
        }
        Ok(c)
    }

    pub fn rigid(alpha: f64) -> Self {
        CircleMap {
            lift: Arc::new(move |x| x + alpha),
        }
    }

    /// Circle map tabulated at sample points: `images[k]` is the image of
    /// `points[k]` (both in turns, any representative). The lift is linear
    /// between samples, with the displacement unwrapped continuously along
    /// the sorted samples.
    pub fn from_samples(points: &[f64], images: &[f64]) -> Result<Self> {
        if points.len() < 3 || points.len() != images.len() {
            return Err(Error::InvalidParameter(
                "circle map samples need at least three (point, image) pairs".into(),
            ));
        }
        let mut pairs: Vec<(f64, f64)> = points
            .iter()
            .zip(images)
            .map(|(&p, &q)| {
                let x = frac(p);
                (x, q - p)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-15);
        let mut xs = Vec::with_capacity(pairs.len());
        let mut ds: Vec<f64> = Vec::with_capacity(pairs.len());
        for (x, d) in pairs {
            let d = match ds.last() {
                None => frac(d),
                Some(&prev) => prev + crate::metric_space::wrap_half(d - prev),
            };
            xs.push(x);
            ds.push(d);
        }
        // closing the loop must not introduce a net winding
        let close = crate::metric_space::wrap_half(ds[0] - ds[ds.len() - 1]);
        let jump = ds[0] - (ds[ds.len() - 1] + close);
        if jump.abs() > 1e-9 {
            return Err(Error::NotDegreeOne { defect: jump.abs() });
        }
        let xs: Arc<[f64]> = xs.into();
        let ds: Arc<[f64]> = ds.into();
        let lift = move |x: f64| {
            let k = x.floor();
            let u = x - k;
            let n = xs.len();
            let i = xs.partition_point(|&v| v <= u);
            let (x0, d0, x1, d1) = if i == 0 {
                (xs[n - 1] - 1.0, ds[n - 1], xs[0], ds[0])
            } else if i == n {
                (xs[n - 1], ds[n - 1], xs[0] + 1.0, ds[0])
            } else {
                (xs[i - 1], ds[i - 1], xs[i], ds[i])
            };
            let d1 = d0 + crate::metric_space::wrap_half(d1 - d0);
            let t = if x1 > x0 { (u - x0) / (x1 - x0) } else { 0.0 };
            x + d0 + t * (d1 - d0)
        };
        let c = CircleMap { lift: Arc::new(lift) };
        let defect = c.degree_one_defect();
        if defect > 1e-9 {
            return Err(Error::NotDegreeOne { defect });
        }
        Ok(c)
    }

    fn degree_one_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=256 {
            let x = k as f64 / 256.0 - 0.5;
            let y = self.lift(x);
            if !y.is_finite() {
                return f64::INFINITY;
            }
            worst = worst.max((self.lift(x + 1.0) - y - 1.0).abs());
            if y < prev - 1e-12 {
                worst = worst.max(prev - y);
            }
            prev = y;
        }
        worst
    }

    pub fn lift(&self, x: f64) -> f64 {
        (self.lift)(x)
    }

    pub fn forward(&self, x: f64) -> f64 {
        frac(self.lift(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationNumber {
    pub value: f64,
    pub error_bound: f64,
}

/// `(F^h(x0) - x0) / h` reduced to `[0, 1)`, with error bound `1 / h`.
pub fn rotation_number(c: &CircleMap, x0: f64, horizon: usize) -> Result<RotationNumber> {
    if horizon < 100 {
        return Err(Error::InvalidParameter(format!("rotation_number needs horizon >= 100, got {horizon}")));
    }
    let defect = c.degree_one_defect();
    if defect > 1e-9 {
        return Err(Error::NotDegreeOne { defect });
    }
    // iterate on the reduced point and accumulate integer parts so the
    // lift value never grows large
    let mut x = x0;
    let mut total = 0.0;
    for _ in 0..horizon {
        let y = c.lift(x);
        total += y - x;
        x = y - y.floor();
    }
    Ok(RotationNumber {
        value: frac(total / horizon as f64),
        error_bound: 1.0 / horizon as f64,
    })
}

/// Smooth bump weights `exp(-1 / (t (1 - t)))`, normalized to sum one.
pub fn bump_weights(n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n)
        .map(|k| {
            let t = (k as f64 + 0.5) / n as f64;
            (-1.0 / (t * (1.0 - t))).exp()
        })
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Weighted Birkhoff average of `values` (sampled along an orbit). For
/// smooth observables over quasi-periodic orbits it converges much faster
/// than the plain mean.
pub fn weighted_average(values: &[f64]) -> f64 {
    bump_weights(values.len()).iter().zip(values).map(|(w, v)| w * v).sum()
}

/// Rotation number from the weighted Birkhoff average of `F(x) - x` along
/// the orbit of `x0`.
pub fn weighted_rotation_number(c: &CircleMap, x0: f64, horizon: usize) -> f64 {
    let mut x = x0;
    let mut incs = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let y = c.lift(x);
        incs.push(y - x);
        x = y - y.floor();
    }
    frac(weighted_average(&incs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TranslationVector {
    pub value: [f64; 2],
    pub horizon: usize,
    /// Diameter of the estimates over the base points.
    pub spread: f64,
    /// Largest `|f(x) - x|` seen along the sampled orbits.
    pub displacement_bound: f64,
}

fn require_trivial_homology(f: &SurfaceMap) -> Result<()> {
    if !matches!(f.surface(), Surface::Torus | Surface::Klein) {
        return Err(Error::NoLift);
    }
    let a = homology_matrix_of(f)?;
    if !a.is_identity() {
        return Err(Error::NonTrivialHomology { matrix: a.entries });
    }
    Ok(())
}

/// Displacements `f(x_n) - x_n` of the lift along the orbit of `x0`, with
/// the orbit kept reduced to the unit square.
fn lift_increments(f: &SurfaceMap, x0: [f64; 2], horizon: usize) -> Result<Vec<[f64; 2]>> {
    let mut x = x0;
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let y = f.lift_forward(x)?;
        out.push([y[0] - x[0], y[1] - x[1]]);
        x = [y[0] - y[0].floor(), y[1] - y[1].floor()];
    }
    Ok(out)
}

fn estimate(incs: &[[f64; 2]]) -> [f64; 2] {
    let h = incs.len() as f64;
    let (mut a, mut b) = (0.0, 0.0);
    for d in incs {
        a += d[0];
        b += d[1];
    }
    [a / h, b / h]
}

/// Base points used for the spread estimate.
fn base_points(x0: [f64; 2], count: usize) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v = vec![x0];
    while v.len() < count {
        v.push([rng.gen(), rng.gen()]);
    }
    v
}

/// `(f^h(x0) - x0) / h` for the lift of a map with identity homology, with
/// the spread over 10 base points.
pub fn translation_vector(f: &SurfaceMap, x0: [f64; 2], horizon: usize) -> Result<TranslationVector> {
    require_trivial_homology(f)?;
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }
    let mut ests = Vec::new();
    let mut m: f64 = 0.0;
    for b in base_points(x0, 10) {
        let incs = lift_increments(f, b, horizon)?;
        m = incs.iter().fold(m, |acc, d| acc.max(d[0].hypot(d[1])));
        ests.push(estimate(&incs));
    }
    let mut spread: f64 = 0.0;
    for a in &ests {
        for b in &ests {
            spread = spread.max((a[0] - b[0]).hypot(a[1] - b[1]));
        }
    }
    Ok(TranslationVector {
        value: ests[0],
        horizon,
        spread,
        displacement_bound: m,
    })
}

/// Weighted Birkhoff estimate of the translation vector.
pub fn weighted_translation_vector(f: &SurfaceMap, x0: [f64; 2], horizon: usize) -> Result<[f64; 2]> {
    require_trivial_homology(f)?;
    let incs = lift_increments(f, x0, horizon)?;
    let w = bump_weights(horizon);
    let (mut a, mut b) = (0.0, 0.0);
    for (wk, d) in w.iter().zip(&incs) {
        a += wk * d[0];
        b += wk * d[1];
    }
    Ok([a, b])
}

/// Translation vector reduced modulo `Z^2`.
pub fn rotation_vector(f: &SurfaceMap, horizon: usize) -> Result<[f64; 2]> {
    let t = translation_vector(f, [0.0, 0.0], horizon)?;
    Ok([frac(t.value[0]), frac(t.value[1])])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointDiagnostic {
    pub translation_norm: f64,
    pub min_displacement: f64,
    pub vector_is_zero: bool,
    pub has_fixed_point: bool,
    pub agree: bool,
}

/// Cross-checks `|theta| < tol` against the existence of a grid point with
/// `|f(x) - x| < tol` (lift displacement). A diagnostic, not a proof.
pub fn vector_is_zero_iff_fixed_point_check(
    f: &SurfaceMap,
    horizon: usize,
    grid_resolution: usize,
    tol: f64,
) -> Result<FixedPointDiagnostic> {
    let t = translation_vector(f, [0.0, 0.0], horizon)?;
    let n = t.value[0].hypot(t.value[1]);
    let mut best = f64::INFINITY;
    for p in crate::orbit_analysis::sample_grid(Surface::Torus, grid_resolution) {
        let x = p.coords2().unwrap();
        let y = f.lift_forward(x)?;
        best = best.min((y[0] - x[0]).hypot(y[1] - x[1]));
    }
    let vector_is_zero = n < tol;
    let has_fixed_point = best < tol;
    Ok(FixedPointDiagnostic {
        translation_norm: n,
        min_displacement: best,
        vector_is_zero,
        has_fixed_point,
        agree: vector_is_zero == has_fixed_point,
    })
}

/// Rotation number of a sphere map about a fixed point `center`, measured
/// on the orbit of `start` by the azimuthal angle in the local chart at
/// `center`. The orbit must lie on an invariant curve winding once around
/// `center`.
pub fn rotation_about(
    f: &SurfaceMap,
    center: &SurfacePoint,
    start: &SurfacePoint,
    horizon: usize,
) -> Result<RotationNumber> {
    let orbit = crate::orbit_analysis::orbit(f, start, 0, horizon as i64)?;
    let angle = |p: &SurfacePoint| {
        let v = crate::metric_space::local_coords_unchecked(center, p);
        v[1].atan2(v[0]) / std::f64::consts::TAU
    };
    let a: Vec<f64> = orbit.points.iter().map(angle).collect();
    let c = CircleMap::from_samples(&a[..horizon], &a[1..])?;
    rotation_number(&c, a[0], horizon.max(100))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rigid_rotation_number() {
        let r = rotation_number(&CircleMap::rigid(0.3), 0.1, 10_000).unwrap();
        assert!((r.value - 0.3).abs() <= 1e-4);
        assert_eq!(r.error_bound, 1e-4);
    }

    #[test]
    fn map_with_fixed_point_has_zero_rotation() {
        let c = CircleMap::from_lift(|x| x + 0.05 * (std::f64::consts::TAU * x).sin()).unwrap();
        let r = rotation_number(&c, 0.3, 10_000).unwrap();
        assert!(r.value.min(1.0 - r.value) <= 1e-4);
    }

    #[test]
    fn non_degree_one_rejected() {
        assert!(matches!(CircleMap::from_lift(|x| 2.0 * x), Err(Error::NotDegreeOne { .. })));
        assert!(rotation_number(&CircleMap::rigid(0.1), 0.0, 50).is_err());
    }

    #[test]
    fn tabulated_rigid_rotation() {
        let pts: Vec<f64> = (0..100).map(|k| k as f64 / 100.0).collect();
        let imgs: Vec<f64> = pts.iter().map(|x| frac(x + 0.47)).collect();
        let c = CircleMap::from_samples(&pts, &imgs).unwrap();
        let r = rotation_number(&c, 0.0, 1000).unwrap();
        assert!((r.value - 0.47).abs() < 1e-9);
    }

    #[test]
    fn translation_examples() {
        let f = SurfaceMap::torus_translation(0.3, 0.7).unwrap();
        let t = translation_vector(&f, [0.1, 0.2], 1000).unwrap();
        assert!((t.value[0] - 0.3).abs() < 1e-9 && (t.value[1] - 0.7).abs() < 1e-9);
        let g = SurfaceMap::torus_translation(1.3, -0.3).unwrap();
        let r = rotation_vector(&g, 1000).unwrap();
        assert!((r[0] - 0.3).abs() < 1e-9 && (r[1] - 0.7).abs() < 1e-9);
        let t2 = translation_vector(&g, [0.1, 0.2], 1000).unwrap();
        assert!((t2.value[0] - t.value[0] - 1.0).abs() < 1e-9);
        assert!((t2.value[1] - t.value[1] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn translation_refuses_nontrivial_homology() {
        let f = SurfaceMap::torus_reversing_type1(0.2).unwrap();
        assert!(matches!(translation_vector(&f, [0.0, 0.0], 100), Err(Error::NonTrivialHomology { .. })));
        assert!(matches!(translation_vector(&SurfaceMap::rotation(0.1), [0.0, 0.0], 100), Err(Error::NoLift)));
    }

    #[test]
    fn klein_phi_squared_rotation() {
        let f = SurfaceMap::klein_phi(0.3183).unwrap();
        let f2 = f.power(2).unwrap();
        let r = rotation_vector(&f2, 1000).unwrap();
        assert!(r[0].abs() < 1e-9 && (r[1] - 0.6366).abs() < 1e-9);
    }

    #[test]
    fn fixed_point_diagnostic() {
        let id = SurfaceMap::identity(Surface::Torus);
        let d = vector_is_zero_iff_fixed_point_check(&id, 200, 16, 1e-6).unwrap();
        assert!(d.vector_is_zero && d.has_fixed_point && d.agree);
        let t = SurfaceMap::torus_translation(0.3, 0.0).unwrap();
        let d = vector_is_zero_iff_fixed_point_check(&t, 200, 16, 1e-6).unwrap();
        assert!(!d.vector_is_zero && !d.has_fixed_point && d.agree);
    }

    #[test]
    fn weighted_average_beats_plain_mean() {
        let alpha = (5f64.sqrt() - 1.0) / 2.0;
        let c = CircleMap::from_lift(move |x| {
            // conjugate of a rigid rotation by x + 0.05 sin(2 pi x)
            let h = |x: f64| x + 0.05 * (std::f64::consts::TAU * x).sin();
            let mut y = x;
            for _ in 0..60 {
                y = y - (h(y) - x) / (1.0 + 0.05 * std::f64::consts::TAU * (std::f64::consts::TAU * y).cos());
            }
            h(y + alpha)
        })
        .unwrap();
        let w = weighted_rotation_number(&c, 0.2, 2000);
        assert!((w - alpha).abs() < 1e-10, "{}", (w - alpha).abs());
    }

    #[test]
    fn rotation_about_fixed_point() {
        let f = SurfaceMap::rotation(0.2137);
        let r = rotation_about(&f, &SurfacePoint::south(), &SurfacePoint::sphere(0.3, 0.0, -0.9), 1000).unwrap();
        // charts are oriented by the outward normal, which reverses the z-plane at S
        assert!((r.value - (1.0 - 0.2137)).abs() < 1e-3);
    }
}
