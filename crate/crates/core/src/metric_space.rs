//! Points, distances and finite set approximations on the supported surfaces.
//!
//! Compact sets are carried as finite nets ([`FiniteSet`]) with an explicit
//! `mesh`. Closed-set statements are checked up to `eta = 2 * mesh`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Surface {
    Sphere,
    Torus,
    Klein,
    Annulus,
    Mobius,
    Plane,
}

impl Surface {
    pub fn name(self) -> &'static str {
        match self {
            Surface::Sphere => "sphere",
            Surface::Torus => "torus",
            Surface::Klein => "klein",
            Surface::Annulus => "annulus",
            Surface::Mobius => "mobius",
            Surface::Plane => "plane",
        }
    }
}

/// A point of one of the supported surfaces, stored in its canonical chart.
///
/// * sphere: unit vector in R^3
/// * torus: `(s, t)` in `[0,1)^2`
/// * Klein bottle: torus coordinates modulo `(s,t) ~ (-s, t + 1/2)`, with
///   the representative chosen in `s in [0, 1/2]`
/// * annulus: `(s, t)` in `[-1,1] x [0,1)`
/// * Möbius strip: annulus coordinates modulo `(s,t) ~ (-s, t + 1/2)`, with
///   `t in [0, 1/2)`
/// * plane: `(x, y)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfacePoint {
    Sphere([f64; 3]),
    Torus([f64; 2]),
    Klein([f64; 2]),
    Annulus([f64; 2]),
    Mobius([f64; 2]),
    Plane([f64; 2]),
}

/// Reduces `x` to `[0, 1)`.
#[inline]
pub fn frac(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Reduces `x` to `[-1/2, 1/2)`.
#[inline]
pub fn wrap_half(x: f64) -> f64 {
    let r = frac(x + 0.5) - 0.5;
    if r < -0.5 {
        -0.5
    } else {
        r
    }
}

fn klein_canonical(s: f64, t: f64) -> [f64; 2] {
    let (mut s, mut t) = (frac(s), frac(t));
    if s > 0.5 {
        s = frac(-s);
        t = frac(t + 0.5);
    }
    if (s == 0.0 || s == 0.5) && t >= 0.5 {
        t -= 0.5;
    }
    [s, t]
}

fn mobius_canonical(s: f64, t: f64) -> [f64; 2] {
    let (mut s, mut t) = (s.clamp(-1.0, 1.0), frac(t));
    if t >= 0.5 {
        s = -s;
        t -= 0.5;
    }
    [s, t]
}

impl SurfacePoint {
    /// Sphere point from a (not necessarily normalized) vector.
    pub fn sphere(x: f64, y: f64, z: f64) -> Self {
        let n = (x * x + y * y + z * z).sqrt();
        SurfacePoint::Sphere([x / n, y / n, z / n])
    }

    pub fn torus(s: f64, t: f64) -> Self {
        SurfacePoint::Torus([frac(s), frac(t)])
    }

    pub fn klein(s: f64, t: f64) -> Self {
        SurfacePoint::Klein(klein_canonical(s, t))
    }

    pub fn annulus(s: f64, t: f64) -> Self {
        SurfacePoint::Annulus([s.clamp(-1.0, 1.0), frac(t)])
    }

    pub fn mobius(s: f64, t: f64) -> Self {
        SurfacePoint::Mobius(mobius_canonical(s, t))
    }

    pub fn plane(x: f64, y: f64) -> Self {
        SurfacePoint::Plane([x, y])
    }

    /// Builds a point of a two-coordinate surface, reducing to the canonical chart.
    pub fn on(surface: Surface, c: [f64; 2]) -> Self {
        match surface {
            Surface::Torus => Self::torus(c[0], c[1]),
            Surface::Klein => Self::klein(c[0], c[1]),
            Surface::Annulus => Self::annulus(c[0], c[1]),
            Surface::Mobius => Self::mobius(c[0], c[1]),
            Surface::Plane => Self::plane(c[0], c[1]),
            Surface::Sphere => Self::from_complex(num_complex::Complex64::new(c[0], c[1])),
        }
    }

    /// North pole, the point at infinity of the stereographic chart.
    pub fn north() -> Self {
        SurfacePoint::Sphere([0.0, 0.0, 1.0])
    }

    /// South pole, `z = 0`.
    pub fn south() -> Self {
        SurfacePoint::Sphere([0.0, 0.0, -1.0])
    }

    /// Inverse stereographic projection from the north pole.
    pub fn from_complex(z: num_complex::Complex64) -> Self {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Self::north();
        }
        Self::from_homogeneous(z, num_complex::Complex64::new(1.0, 0.0))
    }

    /// Sphere point of the projective point `[u : v]`, i.e. `z = u / v`.
    pub fn from_homogeneous(u: num_complex::Complex64, v: num_complex::Complex64) -> Self {
        let uu = u.norm_sqr();
        let vv = v.norm_sqr();
        let w = u * v.conj();
        let n = uu + vv;
        SurfacePoint::Sphere([2.0 * w.re / n, 2.0 * w.im / n, (uu - vv) / n])
    }

    /// Homogeneous coordinates `[u : v]` of a sphere point, chosen away from
    /// the singular pole of either stereographic chart.
    pub fn homogeneous(&self) -> Option<(num_complex::Complex64, num_complex::Complex64)> {
        use num_complex::Complex64 as C;
        match *self {
            SurfacePoint::Sphere([x, y, z]) => Some(if z <= 0.0 {
                (C::new(x, y), C::new(1.0 - z, 0.0))
            } else {
                (C::new(1.0 + z, 0.0), C::new(x, -y))
            }),
            _ => None,
        }
    }

    /// Stereographic coordinate; `None` at the north pole.
    pub fn to_complex(&self) -> Option<num_complex::Complex64> {
        let (u, v) = self.homogeneous()?;
        if v.norm_sqr() < 1e-300 {
            None
        } else {
            Some(u / v)
        }
    }

    pub fn surface(&self) -> Surface {
        match self {
            SurfacePoint::Sphere(_) => Surface::Sphere,
            SurfacePoint::Torus(_) => Surface::Torus,
            SurfacePoint::Klein(_) => Surface::Klein,
            SurfacePoint::Annulus(_) => Surface::Annulus,
            SurfacePoint::Mobius(_) => Surface::Mobius,
            SurfacePoint::Plane(_) => Surface::Plane,
        }
    }

    /// The two chart coordinates of a flat surface point (`None` on the sphere).
    pub fn coords2(&self) -> Option<[f64; 2]> {
        match *self {
            SurfacePoint::Sphere(_) => None,
            SurfacePoint::Torus(c)
            | SurfacePoint::Klein(c)
            | SurfacePoint::Annulus(c)
            | SurfacePoint::Mobius(c)
            | SurfacePoint::Plane(c) => Some(c),
        }
    }

    pub fn vec3(&self) -> Option<[f64; 3]> {
        match *self {
            SurfacePoint::Sphere(v) => Some(v),
            _ => None,
        }
    }

    /// Chart coordinates as a flat list (3 for the sphere, 2 otherwise).
    pub fn coords(&self) -> Vec<f64> {
        match self.vec3() {
            Some(v) => v.to_vec(),
            None => self.coords2().unwrap().to_vec(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coords().iter().all(|c| c.is_finite())
    }
}

pub(crate) fn check_same(a: Surface, b: Surface) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::SurfaceMismatch {
            expected: a,
            found: b,
        })
    }
}

#[inline]
pub(crate) fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

#[inline]
fn great_circle(a: [f64; 3], b: [f64; 3]) -> f64 {
    norm3(cross3(a, b)).atan2(dot3(a, b))
}

#[inline]
fn flat_torus(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (ds, dt) = (wrap_half(a[0] - b[0]), wrap_half(a[1] - b[1]));
    (ds * ds + dt * dt).sqrt()
}

#[inline]
fn flat_annulus(a: [f64; 2], b: [f64; 2]) -> f64 {
    let (ds, dt) = (a[0] - b[0], wrap_half(a[1] - b[1]));
    (ds * ds + dt * dt).sqrt()
}

/// Distance without the surface check; callers guarantee matching tags.
#[inline]
pub(crate) fn distance_unchecked(a: &SurfacePoint, b: &SurfacePoint) -> f64 {
    use SurfacePoint::*;
    match (*a, *b) {
        (Sphere(p), Sphere(q)) => great_circle(p, q),
        (Torus(p), Torus(q)) => flat_torus(p, q),
        (Klein(p), Klein(q)) => flat_torus(p, q).min(flat_torus(p, [-q[0], q[1] + 0.5])),
        (Annulus(p), Annulus(q)) => flat_annulus(p, q),
        (Mobius(p), Mobius(q)) => flat_annulus(p, q).min(flat_annulus(p, [-q[0], q[1] + 0.5])),
        (Plane(p), Plane(q)) => (p[0] - q[0]).hypot(p[1] - q[1]),
        _ => f64::NAN,
    }
}

/// `d(a, b) < eps` without trigonometry on the sphere (compares chords).
#[inline]
pub(crate) fn closer_than(a: &SurfacePoint, b: &SurfacePoint, eps: f64) -> bool {
    match (a, b) {
        (SurfacePoint::Sphere(p), SurfacePoint::Sphere(q)) if eps < std::f64::consts::PI => {
            let c = 2.0 * (0.5 * eps).sin();
            let d = [p[0] - q[0], p[1] - q[1], p[2] - q[2]];
            dot3(d, d) < c * c
        }
        _ => distance_unchecked(a, b) < eps,
    }
}

/// The metric of the surface: great-circle distance on the sphere, the flat
/// quotient metric on torus, Klein bottle, annulus and Möbius strip, and the
/// Euclidean distance on the plane.
pub fn surface_distance(a: &SurfacePoint, b: &SurfacePoint) -> Result<f64> {
    check_same(a.surface(), b.surface())?;
    Ok(distance_unchecked(a, b))
}

/// Orthonormal tangent frame `(e1, e2)` at a sphere point with `e1 x e2 = c`.
pub(crate) fn tangent_frame(c: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if c[2].abs() > 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let d = dot3(helper, c);
    let e1 = [helper[0] - d * c[0], helper[1] - d * c[1], helper[2] - d * c[2]];
    let n = norm3(e1);
    let e1 = [e1[0] / n, e1[1] / n, e1[2] / n];
    let e2 = cross3(c, e1);
    (e1, e2)
}

/// Local planar coordinates of `p` around `center`.
///
/// Azimuthal-equidistant on the sphere; on the flat surfaces, the displacement
/// to the representative of `p` nearest to `center`.
pub fn local_coords(center: &SurfacePoint, p: &SurfacePoint) -> Result<[f64; 2]> {
    check_same(center.surface(), p.surface())?;
    Ok(local_coords_unchecked(center, p))
}

pub(crate) fn local_coords_unchecked(center: &SurfacePoint, p: &SurfacePoint) -> [f64; 2] {
    use SurfacePoint::*;
    let pick = |c: [f64; 2], a: [f64; 2], b: [f64; 2], torus: bool| {
        let d = |q: [f64; 2]| {
            if torus {
                [wrap_half(q[0] - c[0]), wrap_half(q[1] - c[1])]
            } else {
                [q[0] - c[0], wrap_half(q[1] - c[1])]
            }
        };
        let (da, db) = (d(a), d(b));
        if da[0].hypot(da[1]) <= db[0].hypot(db[1]) {
            da
        } else {
            db
        }
    };
    match (*center, *p) {
        (Sphere(c), Sphere(q)) => {
            let (e1, e2) = tangent_frame(c);
            let r = great_circle(c, q);
            let x = dot3(q, e1);
            let y = dot3(q, e2);
            let n = x.hypot(y);
            if n < 1e-300 {
                [0.0, 0.0]
            } else {
                [r * x / n, r * y / n]
            }
        }
        (Torus(c), Torus(q)) => [wrap_half(q[0] - c[0]), wrap_half(q[1] - c[1])],
        (Klein(c), Klein(q)) => pick(c, q, [-q[0], q[1] + 0.5], true),
        (Annulus(c), Annulus(q)) => [q[0] - c[0], wrap_half(q[1] - c[1])],
        (Mobius(c), Mobius(q)) => pick(c, q, [-q[0], q[1] + 0.5], false),
        (Plane(c), Plane(q)) => [q[0] - c[0], q[1] - c[1]],
        _ => [f64::NAN, f64::NAN],
    }
}

/// Inverse of [`local_coords`]: the point with local coordinates `v` around `center`.
pub fn from_local(center: &SurfacePoint, v: [f64; 2]) -> SurfacePoint {
    match *center {
        SurfacePoint::Sphere(c) => {
            let r = v[0].hypot(v[1]);
            if r < 1e-300 {
                return *center;
            }
            let (e1, e2) = tangent_frame(c);
            let (ux, uy) = (v[0] / r, v[1] / r);
            let dir = [
                ux * e1[0] + uy * e2[0],
                ux * e1[1] + uy * e2[1],
                ux * e1[2] + uy * e2[2],
            ];
            let (sr, cr) = r.sin_cos();
            SurfacePoint::sphere(
                cr * c[0] + sr * dir[0],
                cr * c[1] + sr * dir[1],
                cr * c[2] + sr * dir[2],
            )
        }
        other => {
            let c = other.coords2().unwrap();
            SurfacePoint::on(other.surface(), [c[0] + v[0], c[1] + v[1]])
        }
    }
}

/// A finite sample of a compact subset of one surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSet {
    points: Vec<SurfacePoint>,
    mesh: f64,
}

impl FiniteSet {
    pub fn new(points: Vec<SurfacePoint>, mesh: f64) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyInput("finite set"))?;
        let surface = first.surface();
        for p in &points {
            check_same(surface, p.surface())?;
        }
        if !(mesh >= 0.0) {
            return Err(Error::InvalidParameter(format!("mesh must be >= 0, got {mesh}")));
        }
        Ok(FiniteSet { points, mesh })
    }

    /// Exact finite set (mesh 0).
    pub fn exact(points: Vec<SurfacePoint>) -> Result<Self> {
        Self::new(points, 0.0)
    }

    pub fn points(&self) -> &[SurfacePoint] {
        &self.points
    }

    pub fn into_points(self) -> Vec<SurfacePoint> {
        self.points
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    /// Tolerance used for closed-set statements about this net.
    pub fn eta(&self) -> f64 {
        2.0 * self.mesh
    }

    pub fn surface(&self) -> Surface {
        self.points[0].surface()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distance from `p` to the nearest point of the set.
    pub fn distance_to(&self, p: &SurfacePoint) -> f64 {
        self.points
            .iter()
            .map(|q| distance_unchecked(p, q))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains_within(&self, p: &SurfacePoint, tol: f64) -> bool {
        self.points.iter().any(|q| distance_unchecked(p, q) <= tol)
    }

    /// Greedy `radius`-net of `points`, visiting them in order.
    pub fn greedy_net(points: &[SurfacePoint], radius: f64) -> Result<Self> {
        let mut kept: Vec<SurfacePoint> = Vec::new();
        for p in points {
            if !kept.iter().any(|q| distance_unchecked(p, q) <= radius) {
                kept.push(*p);
            }
        }
        Self::new(kept, radius)
    }
}

/// Directed Hausdorff distance `sup_{a in A} d(a, B)` with early break: the
/// inner scan stops once `a` cannot raise the running maximum.
fn directed_hausdorff(a: &[SurfacePoint], b: &[SurfacePoint]) -> f64 {
    let mut cmax = 0.0_f64;
    for p in a {
        let mut cmin = f64::INFINITY;
        for q in b {
            let d = distance_unchecked(p, q);
            if d < cmin {
                cmin = d;
                if cmin <= cmax {
                    break;
                }
            }
        }
        if cmin > cmax {
            cmax = cmin;
        }
    }
    cmax
}

/// Hausdorff distance between two finite sets of the same surface.
pub fn hausdorff_distance(a: &FiniteSet, b: &FiniteSet) -> Result<f64> {
    check_same(a.surface(), b.surface())?;
    Ok(directed_hausdorff(&a.points, &b.points).max(directed_hausdorff(&b.points, &a.points)))
}

/// An ordered sequence of finite sets on one surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SetSequence {
    items: Vec<FiniteSet>,
}

impl SetSequence {
    pub fn new(items: Vec<FiniteSet>) -> Result<Self> {
        if let Some(first) = items.first() {
            for it in &items {
                check_same(first.surface(), it.surface())?;
            }
        }
        Ok(SetSequence { items })
    }

    pub fn items(&self) -> &[FiniteSet] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    fn window(&self, tail: usize) -> Result<&[FiniteSet]> {
        if self.items.is_empty() {
            return Err(Error::EmptyInput("set sequence"));
        }
        if tail == 0 || tail > self.items.len() {
            return Err(Error::InvalidParameter(format!(
                "tail {tail} must lie in 1..={}",
                self.items.len()
            )));
        }
        Ok(&self.items[self.items.len() - tail..])
    }

    /// Largest consecutive Hausdorff step inside the final `tail` window.
    pub fn tail_oscillation(&self, tail: usize) -> Result<f64> {
        let w = self.window(tail)?;
        let mut worst = 0.0_f64;
        for pair in w.windows(2) {
            worst = worst.max(hausdorff_distance(&pair[0], &pair[1])?);
        }
        Ok(worst)
    }
}

/// Finite-window parameters for the set-sequence limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitWindow {
    /// Number of final items inspected.
    pub tail: usize,
    /// Minimum number of window items a limsup point must recur in.
    pub recur_min: usize,
    /// Matching tolerance.
    pub eta: f64,
}

impl LimitWindow {
    pub fn new(tail: usize, eta: f64) -> Self {
        LimitWindow {
            tail,
            recur_min: (tail / 3).max(1),
            eta,
        }
    }
}

fn dedup_points(points: Vec<SurfacePoint>) -> Vec<SurfacePoint> {
    let mut out: Vec<SurfacePoint> = Vec::with_capacity(points.len());
    for p in points {
        if !out.iter().any(|q| distance_unchecked(&p, q) == 0.0) {
            out.push(p);
        }
    }
    out
}

/// Lower limit approximation: points of the last item that have an
/// `eta`-neighbour in every item of the tail window. `None` when empty.
pub fn liminf_sets(seq: &SetSequence, window: LimitWindow) -> Result<Option<FiniteSet>> {
    let w = seq.window(window.tail)?;
    let last = w.last().unwrap();
    let kept: Vec<SurfacePoint> = last
        .points
        .iter()
        .filter(|p| w.iter().all(|item| item.contains_within(p, window.eta)))
        .copied()
        .collect();
    let mesh = w.iter().map(|i| i.mesh).fold(0.0, f64::max);
    if kept.is_empty() {
        Ok(None)
    } else {
        FiniteSet::new(dedup_points(kept), mesh).map(Some)
    }
}

/// Upper limit approximation: points of the tail window that have an
/// `eta`-neighbour in at least `recur_min` window items.
pub fn limsup_sets(seq: &SetSequence, window: LimitWindow) -> Result<Option<FiniteSet>> {
    let w = seq.window(window.tail)?;
    if window.recur_min == 0 || window.recur_min > window.tail {
        return Err(Error::InvalidParameter(format!(
            "recur_min {} must lie in 1..={}",
            window.recur_min, window.tail
        )));
    }
    let mut kept = Vec::new();
    for item in w {
        for p in &item.points {
            let count = w
                .iter()
                .filter(|other| other.contains_within(p, window.eta))
                .count();
            if count >= window.recur_min {
                kept.push(*p);
            }
        }
    }
    let mesh = w.iter().map(|i| i.mesh).fold(0.0, f64::max);
    if kept.is_empty() {
        Ok(None)
    } else {
        FiniteSet::new(dedup_points(kept), mesh).map(Some)
    }
}

/// Connected components of the graph joining points at distance `<= eps`.
/// Components are listed in order of their smallest index.
pub fn epsilon_components(points: &[SurfacePoint], eps: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if distance_unchecked(&points[i], &points[j]) <= eps {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

/// True iff the `eps`-graph on the set is connected.
pub fn is_epsilon_connected(set: &FiniteSet, eps: f64) -> bool {
    epsilon_components(&set.points, eps).len() == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn torus_distance_examples() {
        let a = SurfacePoint::torus(0.0, 0.0);
        assert_eq!(surface_distance(&a, &a).unwrap(), 0.0);
        let b = SurfacePoint::torus(0.9, 0.0);
        let c = SurfacePoint::torus(0.1, 0.0);
        assert!((surface_distance(&b, &c).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn antipodal_sphere_distance() {
        let d = surface_distance(&SurfacePoint::north(), &SurfacePoint::south()).unwrap();
        assert!((d - PI).abs() < 1e-15);
    }

    #[test]
    fn mismatched_surfaces() {
        let err = surface_distance(&SurfacePoint::torus(0.0, 0.0), &SurfacePoint::north());
        assert!(matches!(err, Err(Error::SurfaceMismatch { .. })));
    }

    #[test]
    fn klein_identification() {
        let p = SurfacePoint::klein(0.3, 0.2);
        let q = SurfacePoint::klein(-0.3, 0.7);
        assert!(p.coords2().unwrap().iter().zip(q.coords2().unwrap()).all(|(a, b)| (a - b).abs() < 1e-12));
        assert!(surface_distance(&p, &q).unwrap() < 1e-15);
        // representative has s in [0, 1/2]
        let r = SurfacePoint::klein(0.8, 0.1);
        let c = r.coords2().unwrap();
        assert!(c[0] <= 0.5 && (c[0] - 0.2).abs() < 1e-12 && (c[1] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn mobius_identification() {
        let p = SurfacePoint::mobius(0.4, 0.7);
        let c = p.coords2().unwrap();
        assert!((c[0] + 0.4).abs() < 1e-15 && (c[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn homogeneous_round_trip() {
        for z in [
            num_complex::Complex64::new(0.3, -2.0),
            num_complex::Complex64::new(1e6, 1.0),
            num_complex::Complex64::new(0.0, 0.0),
        ] {
            let p = SurfacePoint::from_complex(z);
            let v = p.vec3().unwrap();
            assert!((norm3(v) - 1.0).abs() < 1e-12);
            let back = p.to_complex().unwrap();
            assert!((back - z).norm() <= 1e-9 * (1.0 + z.norm()));
        }
        assert!(SurfacePoint::north().to_complex().is_none());
    }

    #[test]
    fn local_chart_round_trip_sphere() {
        let c = SurfacePoint::sphere(0.3, -0.2, 0.9);
        let p = SurfacePoint::sphere(0.1, 0.4, 0.7);
        let v = local_coords(&c, &p).unwrap();
        let back = from_local(&c, v);
        assert!(surface_distance(&back, &p).unwrap() < 1e-12);
        assert!((v[0].hypot(v[1]) - surface_distance(&c, &p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn hausdorff_singletons() {
        let a = FiniteSet::exact(vec![SurfacePoint::torus(0.0, 0.0)]).unwrap();
        let b = FiniteSet::exact(vec![SurfacePoint::torus(0.3, 0.0)]).unwrap();
        assert!((hausdorff_distance(&a, &b).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn finite_set_rejects_mixed() {
        let r = FiniteSet::exact(vec![SurfacePoint::torus(0.0, 0.0), SurfacePoint::north()]);
        assert!(matches!(r, Err(Error::SurfaceMismatch { .. })));
        assert!(matches!(FiniteSet::exact(vec![]), Err(Error::EmptyInput(_))));
    }

    fn set(pts: &[(f64, f64)]) -> FiniteSet {
        FiniteSet::exact(pts.iter().map(|&(s, t)| SurfacePoint::torus(s, t)).collect()).unwrap()
    }

    #[test]
    fn constant_sequence_limits() {
        let a = set(&[(0.1, 0.1), (0.5, 0.2)]);
        let seq = SetSequence::new(vec![a.clone(); 8]).unwrap();
        let w = LimitWindow::new(6, 1e-9);
        let inf = liminf_sets(&seq, w).unwrap().unwrap();
        let sup = limsup_sets(&seq, w).unwrap().unwrap();
        assert_eq!(hausdorff_distance(&inf, &a).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&sup, &a).unwrap(), 0.0);
    }

    #[test]
    fn alternating_sequence_limits() {
        // Enumerating the definitions: no point of P is near Q, so no point
        // survives in every item, while each recurs in half of them.
        let p = set(&[(0.1, 0.1)]);
        let q = set(&[(0.6, 0.6)]);
        let items: Vec<_> = (0..10).map(|i| if i % 2 == 0 { p.clone() } else { q.clone() }).collect();
        let seq = SetSequence::new(items).unwrap();
        let w = LimitWindow::new(8, 0.01);
        assert!(liminf_sets(&seq, w).unwrap().is_none());
        let sup = limsup_sets(&seq, w).unwrap().unwrap();
        let union = set(&[(0.1, 0.1), (0.6, 0.6)]);
        assert_eq!(hausdorff_distance(&sup, &union).unwrap(), 0.0);
    }

    #[test]
    fn shrinking_balls_converge_to_center() {
        let center = SurfacePoint::torus(0.5, 0.5);
        let items: Vec<_> = (1..=40)
            .map(|n| {
                let r = 1.0 / n as f64;
                let pts = (0..16)
                    .map(|k| {
                        let a = 2.0 * PI * k as f64 / 16.0;
                        from_local(&center, [r * 0.3 * a.cos(), r * 0.3 * a.sin()])
                    })
                    .chain(std::iter::once(center))
                    .collect();
                FiniteSet::exact(pts).unwrap()
            })
            .collect();
        let seq = SetSequence::new(items).unwrap();
        let eta = 0.02;
        let inf = liminf_sets(&seq, LimitWindow::new(10, eta)).unwrap().unwrap();
        for p in inf.points() {
            assert!(surface_distance(p, &center).unwrap() <= eta);
        }
    }

    #[test]
    fn empty_sequence_is_error() {
        let seq = SetSequence::new(vec![]).unwrap();
        assert!(matches!(
            liminf_sets(&seq, LimitWindow::new(1, 0.1)),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn epsilon_connectivity() {
        let single = set(&[(0.2, 0.2)]);
        assert!(is_epsilon_connected(&single, 1e-9));
        let two = set(&[(0.0, 0.0), (0.5, 0.0)]);
        assert!(!is_epsilon_connected(&two, 0.4));
    }

    #[test]
    fn circle_sample_is_connected() {
        // 100 points of a circle of radius 0.16 have spacing ~0.01
        let c = SurfacePoint::torus(0.5, 0.5);
        let pts: Vec<_> = (0..100)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / 100.0;
                from_local(&c, [0.16 * a.cos(), 0.16 * a.sin()])
            })
            .collect();
        let s = FiniteSet::new(pts.clone(), 0.01).unwrap();
        // union-find oracle written independently: BFS over the adjacency matrix
        let n = pts.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if !seen[j] && surface_distance(&pts[i], &pts[j]).unwrap() <= 0.05 {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        assert!(seen.iter().all(|&b| b));
        assert!(is_epsilon_connected(&s, 0.05));
    }
}
