//! Orbits, limit sets, recurrence, and finite-horizon estimates of the
//! equicontinuity modulus and of the singular set.
//!
//! Regularity cannot be decided from finite data. Everything here is an
//! estimate at a declared horizon.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric_space::{
    closer_than, distance_unchecked, epsilon_components, from_local, FiniteSet, Surface, SurfacePoint,
};
use crate::surface_maps::SurfaceMap;

/// Default threshold for [`singular_set`].
pub const DEFAULT_THRESHOLD: f64 = 0.05;
/// Default iterate horizon.
pub const DEFAULT_HORIZON: usize = 500;

/// Number of bisection steps of [`equicontinuity_modulus`].
pub const BISECTION_STEPS: u32 = 10;

/// Orbit points `f^n(x)` for `n` in `[n_min, n_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSegment {
    pub base: SurfacePoint,
    pub n_min: i64,
    pub n_max: i64,
    pub points: Vec<SurfacePoint>,
}

impl OrbitSegment {
    pub fn at(&self, n: i64) -> Option<&SurfacePoint> {
        if n < self.n_min || n > self.n_max {
            None
        } else {
            self.points.get((n - self.n_min) as usize)
        }
    }

    pub fn forward_part(&self) -> &[SurfacePoint] {
        &self.points[(-self.n_min) as usize..]
    }
}

fn plane_escaped(p: &SurfacePoint) -> bool {
    match p {
        SurfacePoint::Plane(c) => !(c[0].abs() < 1e12 && c[1].abs() < 1e12),
        _ => !p.is_finite(),
    }
}

pub fn orbit(f: &SurfaceMap, x: &SurfacePoint, n_min: i64, n_max: i64) -> Result<OrbitSegment> {
    if n_min > 0 || n_max < 0 {
        return Err(Error::InvalidParameter(format!(
            "orbit range [{n_min}, {n_max}] must contain 0"
        )));
    }
    crate::metric_space::check_same(f.surface(), x.surface())?;
    let mut back = Vec::with_capacity((-n_min) as usize);
    let mut p = *x;
    for _ in 0..(-n_min) {
        p = f.inverse_unchecked(&p);
        back.push(p);
    }
    back.reverse();
    let mut points = back;
    points.push(*x);
    let mut p = *x;
    for _ in 0..n_max {
        p = f.forward_unchecked(&p);
        points.push(p);
    }
    Ok(OrbitSegment {
        base: *x,
        n_min,
        n_max,
        points,
    })
}

/// Net of the accumulation points of the forward orbit: the orbit points with
/// `n` in `[burn_in, horizon]` clustered greedily at `cluster_eps`.
pub fn omega_limit(
    f: &SurfaceMap,
    x: &SurfacePoint,
    burn_in: usize,
    horizon: usize,
    cluster_eps: f64,
) -> Result<FiniteSet> {
    if burn_in >= horizon {
        return Err(Error::InvalidParameter(format!(
            "burn_in ({burn_in}) must be smaller than horizon ({horizon})"
        )));
    }
    if !(cluster_eps > 0.0) {
        return Err(Error::InvalidParameter("cluster_eps must be positive".into()));
    }
    crate::metric_space::check_same(f.surface(), x.surface())?;
    let mut p = *x;
    let mut tail = Vec::with_capacity(horizon - burn_in + 1);
    for n in 0..=horizon {
        if plane_escaped(&p) {
            return Err(Error::DivergenceToPole { step: n });
        }
        if n >= burn_in {
            tail.push(p);
        }
        p = f.forward_unchecked(&p);
    }
    FiniteSet::greedy_net(&tail, cluster_eps)
}

/// `omega_limit` of the inverse map.
pub fn alpha_limit(
    f: &SurfaceMap,
    x: &SurfacePoint,
    burn_in: usize,
    horizon: usize,
    cluster_eps: f64,
) -> Result<FiniteSet> {
    omega_limit(&f.inverted(), x, burn_in, horizon, cluster_eps)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSetEstimate {
    pub omega: FiniteSet,
    pub alpha: FiniteSet,
    pub horizon: usize,
    pub burn_in: usize,
    pub cluster_eps: f64,
}

pub fn limit_sets(
    f: &SurfaceMap,
    x: &SurfacePoint,
    burn_in: usize,
    horizon: usize,
    cluster_eps: f64,
) -> Result<LimitSetEstimate> {
    Ok(LimitSetEstimate {
        omega: omega_limit(f, x, burn_in, horizon, cluster_eps)?,
        alpha: alpha_limit(f, x, burn_in, horizon, cluster_eps)?,
        horizon,
        burn_in,
        cluster_eps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquicontinuityProfile {
    pub point: SurfacePoint,
    pub eps: f64,
    pub delta_estimate: f64,
    pub horizon: usize,
    pub samples: usize,
    /// Every probe failed; `delta_estimate` is the smallest probe value.
    pub collapsed: bool,
}

/// Sample offsets (unit-disc local vectors) used by the modulus probes.
/// The same offsets are rescaled for every candidate radius.
fn probe_offsets(samples: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase: f64 = rng.gen();
    (0..samples)
        .map(|k| {
            let a = std::f64::consts::TAU * (k as f64 + phase) / samples as f64;
            let r = 1.0 - 0.5 * rng.gen::<f64>();
            [0.999 * r * a.cos(), 0.999 * r * a.sin()]
        })
        .collect()
}

/// Whether every probe `y` with `d(x, y) < delta` keeps
/// `d(f^n x, f^n y) < eps` for `|n| <= horizon`.
fn probe_passes(
    f: &SurfaceMap,
    x: &SurfacePoint,
    fwd: &[SurfacePoint],
    bwd: &[SurfacePoint],
    offsets: &[[f64; 2]],
    delta: f64,
    eps: f64,
) -> bool {
    offsets.iter().all(|o| {
        let y0 = from_local(x, [o[0] * delta, o[1] * delta]);
        let mut y = y0;
        for xn in fwd {
            y = f.forward_unchecked(&y);
            if !closer_than(xn, &y, eps) {
                return false;
            }
        }
        let mut y = y0;
        for xn in bwd {
            y = f.inverse_unchecked(&y);
            if !closer_than(xn, &y, eps) {
                return false;
            }
        }
        true
    })
}

fn two_sided_orbit(f: &SurfaceMap, x: &SurfacePoint, horizon: usize) -> (Vec<SurfacePoint>, Vec<SurfacePoint>) {
    let mut fwd = Vec::with_capacity(horizon);
    let mut bwd = Vec::with_capacity(horizon);
    let (mut p, mut q) = (*x, *x);
    for _ in 0..horizon {
        p = f.forward_unchecked(&p);
        fwd.push(p);
        q = f.inverse_unchecked(&q);
        bwd.push(q);
    }
    (fwd, bwd)
}

/// Estimate of the modulus `phi(x, eps)`: the largest `delta` in `(0, eps]`
/// found by bisection such that sampled points within `delta` of `x` stay
/// `eps`-close to the orbit of `x` for `|n| <= horizon`.
pub fn equicontinuity_modulus(
    f: &SurfaceMap,
    x: &SurfacePoint,
    eps: f64,
    horizon: usize,
    samples: usize,
    seed: u64,
) -> Result<EquicontinuityProfile> {
    if !(eps > 0.0) || samples == 0 {
        return Err(Error::InvalidParameter("eps must be positive and samples nonzero".into()));
    }
    crate::metric_space::check_same(f.surface(), x.surface())?;
    let (fwd, bwd) = two_sided_orbit(f, x, horizon);
    let offsets = probe_offsets(samples, seed);
    let pass = |d: f64| probe_passes(f, x, &fwd, &bwd, &offsets, d, eps);
    let smallest = eps / (1u64 << BISECTION_STEPS) as f64;
    let (delta, collapsed) = if pass(eps) {
        (eps, false)
    } else {
        let (mut lo, mut hi) = (0.0, eps);
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if pass(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if lo == 0.0 {
            (smallest, true)
        } else {
            (lo, false)
        }
    };
    Ok(EquicontinuityProfile {
        point: *x,
        eps,
        delta_estimate: delta,
        horizon,
        samples,
        collapsed,
    })
}

/// Regular sample grid with `resolution^2` points: a Fibonacci lattice on the
/// sphere and cell-centred product grids on the flat surfaces (covering the
/// fundamental domain of the Klein bottle and Möbius strip once).
pub fn sample_grid(surface: Surface, resolution: usize) -> Vec<SurfacePoint> {
    let n = resolution;
    let nf = n as f64;
    let mut out = Vec::with_capacity(n * n);
    match surface {
        Surface::Sphere => {
            let total = n * n;
            let golden = (1.0 + 5f64.sqrt()) / 2.0;
            for k in 0..total {
                let z = 1.0 - (2.0 * k as f64 + 1.0) / total as f64;
                let rho = (1.0 - z * z).max(0.0).sqrt();
                let a = std::f64::consts::TAU * (k as f64 / golden).fract();
                out.push(SurfacePoint::Sphere([rho * a.cos(), rho * a.sin(), z]));
            }
        }
        _ => {
            for i in 0..n {
                for j in 0..n {
                    let (u, v) = ((i as f64 + 0.5) / nf, (j as f64 + 0.5) / nf);
                    let c = match surface {
                        Surface::Torus => [u, v],
                        Surface::Klein => [0.5 * u, v],
                        Surface::Annulus => [2.0 * u - 1.0, v],
                        Surface::Mobius => [2.0 * u - 1.0, 0.5 * v],
                        _ => [2.0 * u - 1.0, 2.0 * v - 1.0],
                    };
                    out.push(SurfacePoint::on(surface, c));
                }
            }
        }
    }
    out
}

/// Typical spacing of [`sample_grid`] points.
pub fn grid_cell(surface: Surface, resolution: usize) -> f64 {
    let nf = resolution as f64;
    match surface {
        Surface::Sphere => (4.0 * std::f64::consts::PI).sqrt() / nf,
        Surface::Torus | Surface::Klein => 1.0 / nf,
        Surface::Annulus | Surface::Mobius | Surface::Plane => 2.0 / nf,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSetEstimate {
    pub grid: Vec<SurfacePoint>,
    pub flagged: Vec<bool>,
    pub eps: f64,
    pub horizon: usize,
    pub threshold: f64,
    pub resolution: usize,
    pub cell: f64,
}

impl SingularSetEstimate {
    pub fn flagged_points(&self) -> Vec<SurfacePoint> {
        self.grid
            .iter()
            .zip(&self.flagged)
            .filter(|(_, &fl)| fl)
            .map(|(p, _)| *p)
            .collect()
    }

    pub fn flagged_fraction(&self) -> f64 {
        self.flagged.iter().filter(|&&b| b).count() as f64 / self.grid.len() as f64
    }

    /// Components of the flagged points at linkage `cells` grid cells.
    pub fn clusters(&self, cells: f64) -> Vec<Vec<SurfacePoint>> {
        let pts = self.flagged_points();
        epsilon_components(&pts, cells * self.cell)
            .into_iter()
            .map(|c| c.into_iter().map(|i| pts[i]).collect())
            .collect()
    }
}

/// Parameters shared by the singular-set sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub resolution: usize,
    pub eps: f64,
    pub horizon: usize,
    pub threshold: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            resolution: 64,
            eps: 0.1,
            horizon: DEFAULT_HORIZON,
            threshold: DEFAULT_THRESHOLD,
            samples: 8,
            seed: 0,
        }
    }
}

/// Flags the grid points whose modulus estimate falls below
/// `threshold * eps`, i.e. the points where the probe at
/// `delta = threshold * eps` fails.
pub fn singular_set(f: &SurfaceMap, params: SweepParams) -> Result<SingularSetEstimate> {
    let SweepParams {
        resolution,
        eps,
        horizon,
        threshold,
        samples,
        seed,
    } = params;
    if resolution < 8 {
        return Err(Error::InvalidParameter(format!("grid resolution must be >= 8, got {resolution}")));
    }
    if !(eps > 0.0) || !(threshold > 0.0 && threshold <= 1.0) || samples == 0 {
        return Err(Error::InvalidParameter(
            "singular_set needs eps > 0, threshold in (0, 1] and samples > 0".into(),
        ));
    }
    let grid = sample_grid(f.surface(), resolution);
    let delta = threshold * eps;
    let flagged: Vec<bool> = grid
        .par_iter()
        .enumerate()
        .map(|(k, x)| {
            let offsets = probe_offsets(samples, seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ k as u64);
            let (fwd, bwd) = two_sided_orbit(f, x, horizon);
            !probe_passes(f, x, &fwd, &bwd, &offsets, delta, eps)
        })
        .collect();
    Ok(SingularSetEstimate {
        cell: grid_cell(f.surface(), resolution),
        grid,
        flagged,
        eps,
        horizon,
        threshold,
        resolution,
    })
}

/// True iff some `f^n(x)` with `1 <= |n| <= horizon` lies within `eps` of `x`.
pub fn is_recurrent_point(f: &SurfaceMap, x: &SurfacePoint, horizon: usize, eps: f64) -> Result<bool> {
    crate::metric_space::check_same(f.surface(), x.surface())?;
    let (mut p, mut q) = (*x, *x);
    for _ in 0..horizon {
        p = f.forward_unchecked(&p);
        q = f.inverse_unchecked(&q);
        if distance_unchecked(&p, x) < eps || distance_unchecked(&q, x) < eps {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Least `n` in `[1, horizon]` with `max_grid d(f^n(x), x) < eps`.
pub fn is_recurrent_map(
    f: &SurfaceMap,
    grid: &[SurfacePoint],
    horizon: usize,
    eps: f64,
) -> Result<(bool, Option<usize>)> {
    Ok(match first_return(f, grid, horizon, eps)? {
        Some((n, _)) => (true, Some(n)),
        None => (false, None),
    })
}

/// Least `n <= horizon` with `sup_grid d(f^n(x), x) < eps`, with that sup.
pub fn first_return(
    f: &SurfaceMap,
    grid: &[SurfacePoint],
    horizon: usize,
    eps: f64,
) -> Result<Option<(usize, f64)>> {
    for x in grid {
        crate::metric_space::check_same(f.surface(), x.surface())?;
    }
    let mut cur: Vec<SurfacePoint> = grid.to_vec();
    for n in 1..=horizon {
        cur.par_iter_mut().for_each(|p| *p = f.forward_unchecked(p));
        let sup = cur
            .par_iter()
            .zip(grid.par_iter())
            .map(|(p, x)| distance_unchecked(p, x))
            .reduce(|| 0.0, f64::max);
        if sup < eps {
            return Ok(Some((n, sup)));
        }
    }
    Ok(None)
}

/// Least `N <= n_max` such that each orbit point `f^n(x)`, `0 <= n <= horizon`,
/// lies in one of `f^i(B(x, u_radius))`, `0 <= i <= N`.
///
/// Membership `f^n(x) in f^i(B)` is tested as `f^(n-i)(x) in B`, which is
/// exact for a homeomorphism.
pub fn orbit_covering_check(
    f: &SurfaceMap,
    x: &SurfacePoint,
    u_radius: f64,
    n_max: usize,
    horizon: usize,
) -> Result<usize> {
    let seg = orbit(f, x, -(n_max as i64), horizon as i64)?;
    let inside: Vec<bool> = seg.points.iter().map(|p| distance_unchecked(p, x) < u_radius).collect();
    // for each n, the least i with f^(n-i)(x) in B
    let offset = n_max as i64;
    let mut need = 0usize;
    for n in 0..=horizon as i64 {
        let i = (0..=n_max as i64).find(|&i| inside[(n - i + offset) as usize]);
        match i {
            Some(i) => need = need.max(i as usize),
            None => return Err(Error::NotFound { limit: n_max }),
        }
    }
    Ok(need)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_space::surface_distance;
    use num_complex::Complex64 as C;

    fn dilation(k: f64) -> SurfaceMap {
        SurfaceMap::mobius(C::new(k, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn identity_orbit_is_constant() {
        let f = SurfaceMap::identity(Surface::Torus);
        let x = SurfacePoint::torus(0.3, 0.4);
        let o = orbit(&f, &x, -3, 3).unwrap();
        assert!(o.points.iter().all(|p| *p == x));
    }

    #[test]
    fn quarter_translation_orbit() {
        let f = SurfaceMap::torus_translation(0.25, 0.0).unwrap();
        let o = orbit(&f, &SurfacePoint::torus(0.0, 0.0), 0, 4).unwrap();
        for (n, p) in o.points.iter().enumerate() {
            let expect = SurfacePoint::torus(0.25 * n as f64, 0.0);
            assert!(surface_distance(p, &expect).unwrap() < 1e-12);
        }
    }

    #[test]
    fn dilation_orbit_doubles() {
        let o = orbit(&dilation(2.0), &SurfacePoint::from_complex(C::new(1.0, 0.0)), 0, 10).unwrap();
        for (n, p) in o.points.iter().enumerate() {
            let z = p.to_complex().unwrap();
            assert!((z.norm() / 2f64.powi(n as i32) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn orbit_range_must_contain_zero() {
        let f = SurfaceMap::identity(Surface::Torus);
        assert!(orbit(&f, &SurfacePoint::torus(0.0, 0.0), 1, 3).is_err());
    }

    #[test]
    fn modulus_of_isometry_is_eps() {
        let f = SurfaceMap::torus_translation(0.3819, 0.1).unwrap();
        let p = equicontinuity_modulus(&f, &SurfacePoint::torus(0.2, 0.7), 0.1, 200, 8, 0).unwrap();
        assert!(p.delta_estimate >= 0.09 && !p.collapsed);
    }

    #[test]
    fn rotation_profile_collapses_away_from_poles() {
        let f = SurfaceMap::rotation_profile(crate::surface_maps::Profile::identity_ramp());
        let x = SurfacePoint::from_complex(C::new(2.5, 0.0));
        let p = equicontinuity_modulus(&f, &x, 0.1, 1000, 8, 0).unwrap();
        assert!(p.collapsed, "{p:?}");
    }

    #[test]
    fn recurrence_examples() {
        let per = SurfaceMap::torus_translation(0.25, 0.5).unwrap();
        assert!(is_recurrent_point(&per, &SurfacePoint::torus(0.1, 0.1), 10, 1e-9).unwrap());
        let irr = SurfaceMap::torus_translation((5f64.sqrt() - 1.0) / 2.0, 2f64.sqrt() - 1.0).unwrap();
        assert!(is_recurrent_point(&irr, &SurfacePoint::torus(0.1, 0.1), 1000, 0.05).unwrap());
        let t = SurfaceMap::mobius(C::new(1.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0)).unwrap();
        assert!(!is_recurrent_point(&t, &SurfacePoint::south(), 1000, 0.1).unwrap());
    }

    #[test]
    fn recurrent_map_examples() {
        let grid = sample_grid(Surface::Torus, 8);
        let per = SurfaceMap::torus_translation(2.0 / 7.0, 0.0).unwrap();
        assert_eq!(is_recurrent_map(&per, &grid, 100, 1e-9).unwrap(), (true, Some(7)));
        let sphere = sample_grid(Surface::Sphere, 8);
        assert_eq!(is_recurrent_map(&dilation(2.0), &sphere, 200, 0.05).unwrap(), (false, None));
    }

    #[test]
    fn covering_examples() {
        let per = SurfaceMap::torus_translation(0.2, 0.4).unwrap();
        assert_eq!(orbit_covering_check(&per, &SurfacePoint::torus(0.0, 0.0), 0.01, 20, 100).unwrap(), 4);
        let t = SurfaceMap::mobius(C::new(1.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0)).unwrap();
        assert!(matches!(
            orbit_covering_check(&t, &SurfacePoint::south(), 0.1, 50, 100),
            Err(Error::NotFound { limit: 50 })
        ));
    }

    #[test]
    fn grids_have_expected_size() {
        for s in [Surface::Sphere, Surface::Torus, Surface::Klein, Surface::Annulus, Surface::Mobius, Surface::Plane] {
            let g = sample_grid(s, 16);
            assert_eq!(g.len(), 256);
            assert!(g.iter().all(|p| p.surface() == s));
        }
    }
}
