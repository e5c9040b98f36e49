//! Decision procedures assigning a map to its conjugacy class from computed
//! invariants.

use std::collections::BTreeMap;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric_space::{
    distance_unchecked, frac, from_local, local_coords_unchecked, wrap_half, Surface, SurfacePoint,
};
use crate::orbit_analysis::{first_return, grid_cell, sample_grid, singular_set, SweepParams};
use crate::rotation_invariants::{rotation_number, weighted_translation_vector, CircleMap};
use crate::surface_maps::{homology_matrix_of, HomologyMatrix, Orientation, SurfaceMap};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class")]
pub enum MapClass {
    Identity,
    Periodic { n: usize },
    Elliptic { alpha: f64 },
    Parabolic,
    Hyperbolic,
    Reflection,
    SemiHyperbolic,
    SemiParabolic,
    SemiElliptic { theta: f64 },
    TorusTranslation { rho: [f64; 2] },
    TorusReversingType1 { alpha: f64 },
    TorusReversingType2 { alpha: f64 },
    KleinPhi { alpha: f64 },
    KleinPsi { alpha: f64 },
    AnnulusRotation { alpha: f64 },
    AnnulusReversing { alpha: f64 },
    MobiusStrip { alpha: f64 },
    NotRegular,
    Undetermined,
}

impl MapClass {
    pub fn name(&self) -> &'static str {
        use MapClass::*;
        match self {
            Identity => "Identity",
            Periodic { .. } => "Periodic",
            Elliptic { .. } => "Elliptic",
            Parabolic => "Parabolic",
            Hyperbolic => "Hyperbolic",
            Reflection => "Reflection",
            SemiHyperbolic => "SemiHyperbolic",
            SemiParabolic => "SemiParabolic",
            SemiElliptic { .. } => "SemiElliptic",
            TorusTranslation { .. } => "TorusTranslation",
            TorusReversingType1 { .. } => "TorusReversingType1",
            TorusReversingType2 { .. } => "TorusReversingType2",
            KleinPhi { .. } => "KleinPhi",
            KleinPsi { .. } => "KleinPsi",
            AnnulusRotation { .. } => "AnnulusRotation",
            AnnulusReversing { .. } => "AnnulusReversing",
            MobiusStrip { .. } => "MobiusStrip",
            NotRegular => "NotRegular",
            Undetermined => "Undetermined",
        }
    }

    /// The real parameter of the class, if any.
    pub fn parameter(&self) -> Option<f64> {
        use MapClass::*;
        match *self {
            Elliptic { alpha }
            | TorusReversingType1 { alpha }
            | TorusReversingType2 { alpha }
            | KleinPhi { alpha }
            | KleinPsi { alpha }
            | AnnulusRotation { alpha }
            | AnnulusReversing { alpha }
            | MobiusStrip { alpha } => Some(alpha),
            SemiElliptic { theta } => Some(theta),
            _ => None,
        }
    }
}

/// Budgets and tolerances of the classification pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub resolution: usize,
    pub eps: f64,
    pub horizon: usize,
    pub threshold: f64,
    pub samples: usize,
    pub seed: u64,
    /// Largest period searched.
    pub period_max: usize,
    /// Grid sup distance below which `f^n` counts as the identity.
    pub period_tol: f64,
    /// Entry bound of the GL(2,Z) conjugator search.
    pub conjugator_bound: i64,
    /// Orbit length used for rotation numbers and translation vectors.
    pub rotation_horizon: usize,
    /// Linkage of singular clusters, in grid cells.
    pub cluster_cells: f64,
    /// A cluster holding more than this fraction of the grid means the
    /// singular set is not totally disconnected.
    pub large_cluster_fraction: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            resolution: 64,
            eps: 0.1,
            horizon: crate::orbit_analysis::DEFAULT_HORIZON,
            threshold: crate::orbit_analysis::DEFAULT_THRESHOLD,
            samples: 8,
            seed: 0,
            period_max: 512,
            period_tol: 1e-6,
            conjugator_bound: 3,
            rotation_horizon: 4000,
            cluster_cells: 3.0,
            large_cluster_fraction: 0.1,
        }
    }
}

impl Budget {
    fn sweep(&self, resolution: usize) -> SweepParams {
        SweepParams {
            resolution,
            eps: self.eps,
            horizon: self.horizon,
            threshold: self.threshold,
            samples: self.samples,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub singular_points: Vec<SurfacePoint>,
    pub singular_clusters: Option<usize>,
    pub flagged_fraction: Option<f64>,
    pub fixed_points: Vec<SurfacePoint>,
    pub fixed_point_continuum: Option<bool>,
    pub homology: Option<HomologyMatrix>,
    pub conjugator: Option<HomologyMatrix>,
    pub rotation: Option<[f64; 2]>,
    pub period_checked_up_to: Option<usize>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub surface: Surface,
    pub orientation: Orientation,
    #[serde(flatten)]
    pub class: MapClass,
    pub evidence: Evidence,
    /// Per-test margins (distance of a measured quantity to its decision boundary).
    pub confidence: BTreeMap<String, f64>,
}

impl ClassificationResult {
    fn new(f: &SurfaceMap) -> Self {
        ClassificationResult {
            surface: f.surface(),
            orientation: f.orientation(),
            class: MapClass::Undetermined,
            evidence: Evidence::default(),
            confidence: BTreeMap::new(),
        }
    }

    fn margin(&mut self, key: &str, v: f64) {
        self.confidence.insert(key.to_string(), v);
    }
}

/// Classifies a map on any supported surface.
pub fn classify(f: &SurfaceMap, budget: &Budget) -> Result<ClassificationResult> {
    match f.surface() {
        Surface::Sphere => classify_sphere(f, budget),
        Surface::Torus => classify_torus(f, budget),
        Surface::Klein => classify_klein(f, budget),
        Surface::Annulus => classify_annulus(f, budget),
        Surface::Mobius => classify_mobius_strip(f, budget),
        Surface::Plane => Err(Error::Precondition("plane maps are not classified".into())),
    }
}

/// Least `n <= period_max` with `f^n` within `period_tol` of the identity
/// on a coarse grid, confirmed on a finer one.
fn find_period(f: &SurfaceMap, budget: &Budget, res: &mut ClassificationResult) -> Result<Option<usize>> {
    let coarse = sample_grid(f.surface(), 16);
    res.evidence.period_checked_up_to = Some(budget.period_max);
    let Some((n, sup)) = first_return(f, &coarse, budget.period_max, budget.period_tol)? else {
        return Ok(None);
    };
    let fine = sample_grid(f.surface(), 32);
    let power_sup = fine
        .iter()
        .map(|x| {
            let mut p = *x;
            for _ in 0..n {
                p = f.forward_unchecked(&p);
            }
            distance_unchecked(&p, x)
        })
        .fold(0.0, f64::max);
    res.margin("period_sup", sup.max(power_sup));
    Ok((power_sup < budget.period_tol).then_some(n))
}

fn periodic_class(n: usize) -> MapClass {
    if n == 1 {
        MapClass::Identity
    } else {
        MapClass::Periodic { n }
    }
}

/// Fixed points found by refining grid minima of `d(f(x), x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointCensus {
    pub points: Vec<SurfacePoint>,
    /// More than `CONTINUUM_COUNT` distinct fixed points were found.
    pub continuum: bool,
}

const CONTINUUM_COUNT: usize = 8;

fn refine_fixed_point(f: &SurfaceMap, x: &SurfacePoint, step0: f64) -> (SurfacePoint, f64) {
    let g = |v: [f64; 2]| {
        let p = from_local(x, v);
        distance_unchecked(&f.forward_unchecked(&p), &p)
    };
    let mut v = [0.0, 0.0];
    let mut best = g(v);
    let mut step = step0;
    const D: f64 = std::f64::consts::FRAC_1_SQRT_2;
    let dirs = [
        [1.0, 0.0],
        [-1.0, 0.0],
        [0.0, 1.0],
        [0.0, -1.0],
        [D, D],
        [-D, D],
        [D, -D],
        [-D, -D],
    ];
    let mut iters = 0;
    while step > 1e-14 && iters < 2000 && best > 0.0 {
        iters += 1;
        let mut moved = false;
        for d in &dirs {
            let w = [v[0] + step * d[0], v[1] + step * d[1]];
            if w[0].hypot(w[1]) > 2.0 * step0 {
                continue;
            }
            let val = g(w);
            if val < best {
                best = val;
                v = w;
                moved = true;
                break;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (from_local(x, v), best)
}

/// Fixed points of `f` on the sampling grid of the given resolution.
pub fn fixed_point_census(f: &SurfaceMap, resolution: usize) -> FixedPointCensus {
    let grid = sample_grid(f.surface(), resolution);
    let cell = grid_cell(f.surface(), resolution);
    let mut scored: Vec<(f64, SurfacePoint)> = grid
        .iter()
        .map(|x| (distance_unchecked(&f.forward_unchecked(x), x), *x))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut candidates: Vec<SurfacePoint> = Vec::new();
    for (_, x) in &scored {
        if candidates.len() >= 24 {
            break;
        }
        if candidates.iter().all(|c| distance_unchecked(c, x) > 3.0 * cell) {
            candidates.push(*x);
        }
    }
    let mut found: Vec<SurfacePoint> = Vec::new();
    for c in &candidates {
        let (p, val) = refine_fixed_point(f, c, cell);
        if val < 1e-8 && found.iter().all(|q| distance_unchecked(q, &p) > 1e-5) {
            found.push(p);
        }
    }
    FixedPointCensus {
        continuum: found.len() > CONTINUUM_COUNT,
        points: found,
    }
}

/// Complex coordinate in which `a` is 0 and `b` is infinity.
pub(crate) fn axis_chart(a: &SurfacePoint, b: &SurfacePoint) -> impl Fn(&SurfacePoint) -> C {
    let (ua, va) = a.homogeneous().unwrap();
    let (ub, vb) = b.homogeneous().unwrap();
    move |p: &SurfacePoint| {
        let (u, v) = p.homogeneous().unwrap();
        // (z - a) / (z - b) in homogeneous form
        (u * va - v * ua) / (u * vb - v * ub)
    }
}

/// Rotation number of `f` on the orbit of `start`, measured by the winding
/// around the axis through `a` and `b`.
fn axis_rotation(f: &SurfaceMap, a: &SurfacePoint, b: &SurfacePoint, start: &SurfacePoint, horizon: usize) -> Result<f64> {
    let chart = axis_chart(a, b);
    let orbit = crate::orbit_analysis::orbit(f, start, 0, horizon as i64)?;
    let ang: Vec<f64> = orbit
        .points
        .iter()
        .map(|p| {
            let w = chart(p);
            w.im.atan2(w.re) / std::f64::consts::TAU
        })
        .collect();
    let c = CircleMap::from_samples(&ang[..horizon], &ang[1..])?;
    Ok(rotation_number(&c, ang[0], horizon.max(100))?.value)
}

/// Point on the "equator" between `a` and `b`, at chart modulus 1.
pub(crate) fn between(a: &SurfacePoint, b: &SurfacePoint) -> SurfacePoint {
    let (ua, va) = a.homogeneous().unwrap();
    let (ub, vb) = b.homogeneous().unwrap();
    // inverse of the chart matrix [[va, -ua], [vb, -ub]] applied to w,
    // rotated slightly off any symmetry axis
    let w = C::from_polar(1.0, 0.3);
    SurfacePoint::from_homogeneous(ua - w * ub, va - w * vb)
}

fn normalize_half(rho: f64) -> f64 {
    let r = frac(rho);
    r.min(1.0 - r)
}

/// Classification of a sphere homeomorphism by its singular set (orientation
/// preserving) or its fixed-point set (orientation reversing).
pub fn classify_sphere(f: &SurfaceMap, budget: &Budget) -> Result<ClassificationResult> {
    crate::metric_space::check_same(Surface::Sphere, f.surface())?;
    let mut res = ClassificationResult::new(f);
    if let Some(n) = find_period(f, budget, &mut res)? {
        res.class = periodic_class(n);
        if n == 2 && f.orientation() == Orientation::Reversing {
            let census = fixed_point_census(f, budget.resolution.min(48));
            res.evidence.fixed_point_continuum = Some(census.continuum);
            if census.continuum {
                res.class = MapClass::Reflection;
            }
            res.evidence.fixed_points = census.points;
        }
        return Ok(res);
    }
    let sing = singular_set(f, budget.sweep(budget.resolution))?;
    let fraction = sing.flagged_fraction();
    res.evidence.flagged_fraction = Some(fraction);
    let clusters = sing.clusters(budget.cluster_cells);
    res.evidence.singular_clusters = Some(clusters.len());
    let largest = clusters.iter().map(Vec::len).max().unwrap_or(0) as f64 / sing.grid.len() as f64;
    res.margin("largest_cluster_fraction", largest);
    if largest > budget.large_cluster_fraction || fraction > budget.large_cluster_fraction {
        res.class = MapClass::NotRegular;
        res.evidence.notes.push("singular set estimate is not totally disconnected".into());
        return Ok(res);
    }

    let census = fixed_point_census(f, budget.resolution.min(48));
    res.evidence.fixed_points = census.points.clone();
    res.evidence.fixed_point_continuum = Some(census.continuum);

    // attach each cluster to the nearest fixed point: the halo of a single
    // singular point may split into several lobes on the grid
    let attach = 8.0 * sing.cell;
    let mut singular: Vec<SurfacePoint> = Vec::new();
    for c in &clusters {
        let near = census
            .points
            .iter()
            .map(|p| (c.iter().map(|q| distance_unchecked(p, q)).fold(f64::INFINITY, f64::min), p))
            .filter(|(d, _)| *d <= attach)
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, p)| *p);
        let rep = near.unwrap_or_else(|| c[0]);
        if singular.iter().all(|s| distance_unchecked(s, &rep) > 1e-6) {
            singular.push(rep);
        }
    }
    res.evidence.singular_points = singular.clone();
    if singular.len() > 2 {
        res.class = MapClass::NotRegular;
        res.evidence.notes.push(format!("{} singular points found", singular.len()));
        return Ok(res);
    }

    res.class = match (f.orientation(), singular.len()) {
        (Orientation::Preserving, 0) => match elliptic_rotation(f, &census.points, budget) {
            Ok(rho) => {
                res.evidence.rotation = Some([rho, 0.0]);
                MapClass::Elliptic { alpha: normalize_half(rho) }
            }
            Err(e) => {
                res.evidence.notes.push(format!("rotation number unavailable: {e}"));
                MapClass::Undetermined
            }
        },
        (Orientation::Preserving, 1) => MapClass::Parabolic,
        (Orientation::Preserving, _) => MapClass::Hyperbolic,
        (Orientation::Reversing, 1) => MapClass::SemiParabolic,
        (Orientation::Reversing, 2) => MapClass::SemiHyperbolic,
        (Orientation::Reversing, _) => {
            if census.continuum {
                MapClass::Reflection
            } else if census.points.is_empty() {
                match semi_elliptic_rotation(f, budget) {
                    Ok(theta) => {
                        res.evidence.rotation = Some([theta, 0.0]);
                        MapClass::SemiElliptic { theta: normalize_half(theta) }
                    }
                    Err(e) => {
                        res.evidence.notes.push(format!("rotation number unavailable: {e}"));
                        MapClass::Undetermined
                    }
                }
            } else {
                res.evidence.notes.push(format!(
                    "empty singular set with {} isolated fixed points",
                    census.points.len()
                ));
                MapClass::Undetermined
            }
        }
    };
    Ok(res)
}

/// Rotation number of an elliptic map: first on an invariant circle around a
/// fixed point, otherwise on the orbit closure of a point between the two
/// fixed points.
fn elliptic_rotation(f: &SurfaceMap, fixed: &[SurfacePoint], budget: &Budget) -> Result<f64> {
    let x = fixed.first().ok_or_else(|| Error::Precondition("elliptic map without a fixed point".into()))?;
    let other = fixed.get(1).copied();
    let seed_radius = other.map(|o| 0.25 * distance_unchecked(x, &o)).unwrap_or(0.3).min(0.5);
    let circle = crate::conjugacy_builder::invariant_circle(
        f,
        x,
        seed_radius,
        &crate::conjugacy_builder::CircleBudget::default(),
    );
    if let Ok(curve) = circle {
        let angle = |p: &SurfacePoint| {
            let v = local_coords_unchecked(x, p);
            v[1].atan2(v[0]) / std::f64::consts::TAU
        };
        let a: Vec<f64> = curve.samples.iter().map(angle).collect();
        let b: Vec<f64> = curve.samples.iter().map(|p| angle(&f.forward_unchecked(p))).collect();
        if let Ok(c) = CircleMap::from_samples(&a, &b) {
            return Ok(rotation_number(&c, a[0], budget.rotation_horizon.max(100))?.value);
        }
    }
    let other = other.ok_or_else(|| Error::Precondition("invariant circle failed and only one fixed point".into()))?;
    axis_rotation(f, x, &other, &between(x, &other), budget.rotation_horizon.max(100))
}

/// Rotation number of a fixed-point-free reversing map on its invariant
/// curve, measured as the winding around the axis through the two fixed
/// points of `f^2`.
fn semi_elliptic_rotation(f: &SurfaceMap, budget: &Budget) -> Result<f64> {
    let f2 = f.power(2)?;
    let census = fixed_point_census(&f2, budget.resolution.min(48));
    match census.points.as_slice() {
        [a, b, ..] => axis_rotation(f, a, b, &between(a, b), budget.rotation_horizon.max(100)),
        _ => Err(Error::Precondition("f^2 does not have two fixed points".into())),
    }
}

/// Regularity screen shared by the flat classifiers: any flagged point
/// (the singular set of a regular map of a surface of zero Euler
/// characteristic is empty).
fn flat_screen(f: &SurfaceMap, budget: &Budget, res: &mut ClassificationResult) -> Result<bool> {
    let sing = singular_set(f, budget.sweep(budget.resolution.min(24)))?;
    let fraction = sing.flagged_fraction();
    res.evidence.flagged_fraction = Some(fraction);
    res.evidence.singular_clusters = Some(sing.clusters(budget.cluster_cells).len());
    if fraction > 0.0 {
        res.class = MapClass::NotRegular;
        res.evidence.notes.push("equicontinuity screen flagged points".into());
        return Ok(false);
    }
    Ok(true)
}

/// Searches `P` in GL(2,Z) with entries bounded by `bound` and
/// `P A P^-1 = target`, in a fixed order starting from the identity.
pub fn find_conjugator(a: &HomologyMatrix, target: &HomologyMatrix, bound: i64) -> Option<HomologyMatrix> {
    if a == target {
        return Some(HomologyMatrix::IDENTITY);
    }
    let range: Vec<i64> = (0..=bound).flat_map(|k| if k == 0 { vec![0] } else { vec![k, -k] }).collect();
    for &p00 in &range {
        for &p01 in &range {
            for &p10 in &range {
                for &p11 in &range {
                    let e = [[p00, p01], [p10, p11]];
                    let Ok(p) = HomologyMatrix::new(e) else { continue };
                    if p.mul(a).mul(&p.inverse()) == *target {
                        return Some(p);
                    }
                }
            }
        }
    }
    None
}

/// Mean `t`-displacement of the unreduced lift orbit of `g` from `x0`.
fn mean_t_displacement(g: &SurfaceMap, x0: [f64; 2], horizon: usize) -> Result<f64> {
    let mut x = x0;
    for _ in 0..horizon {
        x = g.lift_forward(x)?;
    }
    Ok((x[1] - x0[1]) / horizon as f64)
}

pub fn classify_torus(f: &SurfaceMap, budget: &Budget) -> Result<ClassificationResult> {
    crate::metric_space::check_same(Surface::Torus, f.surface())?;
    let mut res = ClassificationResult::new(f);
    let a = match homology_matrix_of(f) {
        Ok(a) => a,
        Err(e) => {
            res.evidence.notes.push(format!("homology matrix unavailable: {e}"));
            return Ok(res);
        }
    };
    res.evidence.homology = Some(a);
    res.orientation = Orientation::from_sign(a.det() as i32);
    if let Some(n) = find_period(f, budget, &mut res)? {
        res.class = periodic_class(n);
        return Ok(res);
    }
    if a.is_identity() {
        if !flat_screen(f, budget, &mut res)? {
            return Ok(res);
        }
        let theta = weighted_translation_vector(f, [0.1234, 0.5678], budget.rotation_horizon)?;
        let rho = [frac(theta[0]), frac(theta[1])];
        res.evidence.rotation = Some(rho);
        res.class = MapClass::TorusTranslation { rho };
        return Ok(res);
    }
    if a.det() == -1 {
        let (p, model) = match find_conjugator(&a, &HomologyMatrix::TYPE1, budget.conjugator_bound) {
            Some(p) => (p, 1),
            None => match find_conjugator(&a, &HomologyMatrix::TYPE2, budget.conjugator_bound) {
                Some(p) => (p, 2),
                None => {
                    if a.trace() != 0 {
                        res.class = MapClass::NotRegular;
                        res.evidence.notes.push("homology matrix has infinite order".into());
                    } else {
                        res.evidence.notes.push("no GL(2,Z) conjugator within the search bound".into());
                    }
                    return Ok(res);
                }
            },
        };
        res.evidence.conjugator = Some(p);
        if !flat_screen(f, budget, &mut res)? {
            return Ok(res);
        }
        let pl = SurfaceMap::torus_linear(p.entries, [0.0, 0.0])?;
        let g = SurfaceMap::conjugate(f, &pl)?;
        let alpha = mean_t_displacement(&g, [0.1234, 0.5678], budget.rotation_horizon)?;
        // cross-check against theta(g^2) = (0, 2 alpha)
        let g2 = g.power(2)?;
        let th = weighted_translation_vector(&g2, [0.1234, 0.5678], budget.rotation_horizon)?;
        res.evidence.rotation = Some(th);
        res.margin("square_translation_defect", wrap_half(th[1] - 2.0 * alpha).abs().max(wrap_half(th[0]).abs()));
        res.class = if model == 1 {
            MapClass::TorusReversingType1 { alpha: frac(alpha) }
        } else {
            MapClass::TorusReversingType2 { alpha: frac(alpha).rem_euclid(0.5) }
        };
        return Ok(res);
    }
    let order = (1..=12).find(|&n| a.pow(n).is_identity());
    match order {
        Some(k) => res.evidence.notes.push(format!(
            "homology matrix has order {k} (Lefschetz number {}) but no period up to {} was found",
            2 - a.trace(),
            budget.period_max
        )),
        None => {
            res.class = MapClass::NotRegular;
            res.evidence.notes.push("homology matrix has infinite order".into());
        }
    }
    Ok(res)
}

/// Klein bottle maps are analysed through their orientation-preserving lift
/// to the torus.
pub fn classify_klein(f: &SurfaceMap, budget: &Budget) -> Result<ClassificationResult> {
    crate::metric_space::check_same(Surface::Klein, f.surface())?;
    let mut res = ClassificationResult::new(f);
    let a = match homology_matrix_of(f) {
        Ok(a) => a,
        Err(e) => {
            res.evidence.notes.push(format!("homology matrix unavailable: {e}"));
            return Ok(res);
        }
    };
    let lift = if a.det() == -1 {
        let theta0 = SurfaceMap::torus_reversing_type1(0.5)?.on_klein()?;
        f.then(&theta0)?
    } else {
        f.clone()
    };
    let a = homology_matrix_of(&lift)?;
    res.evidence.homology = Some(a);
    if let Some(n) = find_period(f, budget, &mut res)? {
        res.class = periodic_class(n);
        return Ok(res);
    }
    if !a.is_identity() {
        res.evidence.notes.push(format!("lift homology {:?} is not the identity", a.entries));
        if (1..=12).all(|n| !a.pow(n).is_identity()) {
            res.class = MapClass::NotRegular;
        }
        return Ok(res);
    }
    if !flat_screen(f, budget, &mut res)? {
        return Ok(res);
    }
    let theta = weighted_translation_vector(&lift, [0.1234, 0.5678], budget.rotation_horizon)?;
    res.evidence.rotation = Some(theta);
    let s_shift = frac(theta[0]);
    let to_zero = s_shift.min(1.0 - s_shift);
    let to_half = (s_shift - 0.5).abs();
    res.margin("s_shift_separation", (to_zero - to_half).abs());
    let alpha = frac(theta[1]);
    res.class = if to_zero < 0.05 {
        MapClass::KleinPhi { alpha }
    } else if to_half < 0.05 {
        MapClass::KleinPsi { alpha }
    } else {
        res.evidence.notes.push(format!("lift s-shift {s_shift:.4} is neither 0 nor 1/2"));
        MapClass::Undetermined
    };
    Ok(res)
}

fn pull_back(mut res: ClassificationResult, f: &SurfaceMap, to: MapClass) -> ClassificationResult {
    res.surface = f.surface();
    res.orientation = f.orientation();
    res.class = to;
    res
}

/// Classifies an annulus map through its double on the torus.
pub fn classify_annulus(f: &SurfaceMap, budget: &Budget) -> Result<ClassificationResult> {
    crate::metric_space::check_same(Surface::Annulus, f.surface())?;
    let doubled = classify_torus(&f.double()?, budget)?;
    let class = match &doubled.class {
        MapClass::TorusTranslation { rho } => {
            if wrap_half(rho[0]).abs() < 1e-3 {
                MapClass::AnnulusRotation { alpha: rho[1] }
            } else {
                MapClass::Undetermined
            }
        }
        MapClass::TorusReversingType1 { alpha } => MapClass::AnnulusReversing { alpha: *alpha },
        c @ (MapClass::Identity | MapClass::Periodic { .. } | MapClass::NotRegular) => c.clone(),
        _ => MapClass::Undetermined,
    };
    let mut res = pull_back(doubled, f, class);
    res.evidence.notes.push("classified through the doubled torus map".into());
    Ok(res)
}

/// Classifies a Möbius strip map through its double on the Klein bottle.
pub fn classify_mobius_strip(f: &SurfaceMap, budget: &Budget) -> Result<ClassificationResult> {
    crate::metric_space::check_same(Surface::Mobius, f.surface())?;
    let doubled = classify_klein(&f.double()?, budget)?;
    let class = match &doubled.class {
        MapClass::KleinPhi { alpha } => MapClass::MobiusStrip { alpha: *alpha },
        c @ (MapClass::Identity | MapClass::Periodic { .. } | MapClass::NotRegular) => c.clone(),
        _ => MapClass::Undetermined,
    };
    let mut res = pull_back(doubled, f, class);
    res.evidence.notes.push("classified through the doubled Klein bottle map".into());
    Ok(res)
}
