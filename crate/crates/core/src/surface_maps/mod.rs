//! Map families on the supported surfaces, with forward and inverse
//! evaluation, lifts to the plane and a small composition algebra.

mod doc;
mod flat;
mod mobius;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric_space::{Surface, SurfacePoint};

pub use flat::GridField;
pub use mobius::{Mobius, Profile};

/// Maximum number of links in a composite chain.
pub const MAX_CHAIN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Preserving,
    Reversing,
}

impl Orientation {
    pub fn sign(self) -> i32 {
        match self {
            Orientation::Preserving => 1,
            Orientation::Reversing => -1,
        }
    }

    pub fn from_sign(s: i32) -> Self {
        if s >= 0 {
            Orientation::Preserving
        } else {
            Orientation::Reversing
        }
    }
}

/// Integer matrix of the action of a torus map on `pi_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HomologyMatrix {
    pub entries: [[i64; 2]; 2],
}

impl HomologyMatrix {
    pub const IDENTITY: HomologyMatrix = HomologyMatrix { entries: [[1, 0], [0, 1]] };
    pub const TYPE1: HomologyMatrix = HomologyMatrix { entries: [[-1, 0], [0, 1]] };
    pub const TYPE2: HomologyMatrix = HomologyMatrix { entries: [[-1, 0], [1, 1]] };

    pub fn new(entries: [[i64; 2]; 2]) -> Result<Self> {
        let m = HomologyMatrix { entries };
        if m.det().abs() != 1 {
            return Err(Error::InvalidParameter(format!(
                "homology matrix {entries:?} is not in GL(2,Z)"
            )));
        }
        Ok(m)
    }

    pub fn det(&self) -> i64 {
        let e = self.entries;
        e[0][0] * e[1][1] - e[0][1] * e[1][0]
    }

    pub fn trace(&self) -> i64 {
        self.entries[0][0] + self.entries[1][1]
    }

    pub fn mul(&self, other: &HomologyMatrix) -> HomologyMatrix {
        let (a, b) = (self.entries, other.entries);
        let mut e = [[0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                e[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        HomologyMatrix { entries: e }
    }

    pub fn inverse(&self) -> HomologyMatrix {
        let e = self.entries;
        let d = self.det();
        HomologyMatrix {
            entries: [[e[1][1] * d, -e[0][1] * d], [-e[1][0] * d, e[0][0] * d]],
        }
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let e = self.entries;
        [
            e[0][0] as f64 * v[0] + e[0][1] as f64 * v[1],
            e[1][0] as f64 * v[0] + e[1][1] as f64 * v[1],
        ]
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    pub fn pow(&self, n: u32) -> HomologyMatrix {
        (0..n).fold(Self::IDENTITY, |acc, _| acc.mul(self))
    }
}

/// One step of a composite chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub map: SurfaceMap,
    pub inverted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Identity,
    Mobius(Mobius),
    /// `z -> (a conj(z) + b) / (c conj(z) + d)`.
    FractionalReflection(Mobius),
    /// Rotates the circle `|z| = r` by the angle `phi(r)`.
    RotationProfile(Profile),
    /// `(r, theta) -> (r + a r (1 - r) sin(theta), theta)` inside the unit
    /// disc of the stereographic chart, identity outside.
    PolarWarp { amplitude: f64 },
    TorusTranslation { alpha: f64, beta: f64 },
    TorusReversingType1 { alpha: f64 },
    TorusReversingType2 { alpha: f64 },
    TorusLinear { matrix: [[i64; 2]; 2], shift: [f64; 2] },
    /// `S2 o S1` with `S1(s,t) = (s + a sin 2pi t, t)` and
    /// `S2(s,t) = (s, t + b cos 2pi s)`; commutes with the Klein involution.
    TorusShear { a: f64, b: f64 },
    /// `(s, t) -> (s, t + g(s))` with `g(s) = sin * sin(2pi s) + cos * cos(2pi s)`.
    FiberShift { sin: f64, cos: f64 },
    GridWarp(GridField),
    KleinPhi { alpha: f64 },
    KleinPsi { alpha: f64 },
    AnnulusRotation { alpha: f64 },
    AnnulusReversing { alpha: f64 },
    /// Lift `(s, t) -> (s, t + alpha)` of a Möbius strip rotation.
    StripRotation { alpha: f64 },
    /// Annulus warp commuting with `(s,t) -> (-s, t + 1/2)`:
    /// `S1(s,t) = (s + a (1 - s^2) sin 2pi t, t)` then `S2(s,t) = (s, t + b cos pi s)`.
    StripShear { a: f64, b: f64 },
    PlaneAffine { matrix: [[f64; 2]; 2], shift: [f64; 2] },
    /// Double of an annulus (or Möbius strip) map, acting on the torus (or
    /// Klein bottle) with the copies `y = s/4` and `y = (2 - s)/4`.
    Double(Box<SurfaceMap>),
    Composite(Vec<Link>),
}

/// An invertible self-map of one surface.
///
/// Klein bottle maps are given by their orientation-preserving torus lift,
/// which must commute with `(s,t) -> (-s, t + 1/2)`. Möbius strip maps are
/// given by their annulus lift, commuting with the same formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMap {
    surface: Surface,
    kind: MapKind,
}

fn check_finite(name: &str, xs: &[f64]) -> Result<()> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name}: parameters must be finite")))
    }
}

impl SurfaceMap {
    fn raw(surface: Surface, kind: MapKind) -> Self {
        SurfaceMap { surface, kind }
    }

    pub fn identity(surface: Surface) -> Self {
        Self::raw(surface, MapKind::Identity)
    }

    pub fn mobius(a: C, b: C, c: C, d: C) -> Result<Self> {
        Ok(Self::raw(Surface::Sphere, MapKind::Mobius(Mobius::new(a, b, c, d)?)))
    }

    pub fn from_mobius(m: Mobius) -> Self {
        Self::raw(Surface::Sphere, MapKind::Mobius(m.normalized()))
    }

    /// Rigid rotation `z -> e^{2 pi i alpha} z`.
    pub fn rotation(alpha: f64) -> Self {
        Self::from_mobius(Mobius::rotation(alpha))
    }

    pub fn fractional_reflection(a: C, b: C, c: C, d: C) -> Result<Self> {
        Ok(Self::raw(
            Surface::Sphere,
            MapKind::FractionalReflection(Mobius::new(a, b, c, d)?),
        ))
    }

    pub fn rotation_profile(profile: Profile) -> Self {
        Self::raw(Surface::Sphere, MapKind::RotationProfile(profile))
    }

    pub fn polar_warp(amplitude: f64) -> Result<Self> {
        if !(amplitude.abs() < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "polar warp amplitude must lie in (-1, 1), got {amplitude}"
            )));
        }
        Ok(Self::raw(Surface::Sphere, MapKind::PolarWarp { amplitude }))
    }

    pub fn torus_translation(alpha: f64, beta: f64) -> Result<Self> {
        check_finite("torus_translation", &[alpha, beta])?;
        Ok(Self::raw(Surface::Torus, MapKind::TorusTranslation { alpha, beta }))
    }

    pub fn torus_reversing_type1(alpha: f64) -> Result<Self> {
        check_finite("torus_reversing_type1", &[alpha])?;
        Ok(Self::raw(Surface::Torus, MapKind::TorusReversingType1 { alpha }))
    }

    pub fn torus_reversing_type2(alpha: f64) -> Result<Self> {
        check_finite("torus_reversing_type2", &[alpha])?;
        Ok(Self::raw(Surface::Torus, MapKind::TorusReversingType2 { alpha }))
    }

    pub fn torus_linear(matrix: [[i64; 2]; 2], shift: [f64; 2]) -> Result<Self> {
        HomologyMatrix::new(matrix)?;
        check_finite("torus_linear", &shift)?;
        Ok(Self::raw(Surface::Torus, MapKind::TorusLinear { matrix, shift }))
    }

    pub fn torus_shear(a: f64, b: f64) -> Result<Self> {
        check_finite("torus_shear", &[a, b])?;
        Ok(Self::raw(Surface::Torus, MapKind::TorusShear { a, b }))
    }

    pub fn fiber_shift(sin: f64, cos: f64) -> Result<Self> {
        check_finite("fiber_shift", &[sin, cos])?;
        Ok(Self::raw(Surface::Torus, MapKind::FiberShift { sin, cos }))
    }

    pub fn grid_warp(field: GridField) -> Self {
        Self::raw(Surface::Torus, MapKind::GridWarp(field))
    }

    pub fn klein_phi(alpha: f64) -> Result<Self> {
        check_finite("klein_phi", &[alpha])?;
        Ok(Self::raw(Surface::Klein, MapKind::KleinPhi { alpha }))
    }

    pub fn klein_psi(alpha: f64) -> Result<Self> {
        check_finite("klein_psi", &[alpha])?;
        Ok(Self::raw(Surface::Klein, MapKind::KleinPsi { alpha }))
    }

    pub fn annulus_rotation(alpha: f64) -> Result<Self> {
        check_finite("annulus_rotation", &[alpha])?;
        Ok(Self::raw(Surface::Annulus, MapKind::AnnulusRotation { alpha }))
    }

    pub fn annulus_reversing(alpha: f64) -> Result<Self> {
        check_finite("annulus_reversing", &[alpha])?;
        Ok(Self::raw(Surface::Annulus, MapKind::AnnulusReversing { alpha }))
    }

    pub fn mobius_strip_rotation(alpha: f64) -> Result<Self> {
        check_finite("mobius_strip_rotation", &[alpha])?;
        Ok(Self::raw(Surface::Mobius, MapKind::StripRotation { alpha }))
    }

    pub fn strip_shear(a: f64, b: f64) -> Result<Self> {
        check_finite("strip_shear", &[a, b])?;
        if !(a.abs() < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "strip_shear needs |a| < 1/2 to stay injective, got {a}"
            )));
        }
        Ok(Self::raw(Surface::Annulus, MapKind::StripShear { a, b }))
    }

    pub fn plane_affine(matrix: [[f64; 2]; 2], shift: [f64; 2]) -> Result<Self> {
        check_finite("plane_affine", &[matrix[0][0], matrix[0][1], matrix[1][0], matrix[1][1], shift[0], shift[1]])?;
        let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
        if det.abs() < 1e-12 {
            return Err(Error::InvalidParameter("plane_affine matrix is singular".into()));
        }
        Ok(Self::raw(Surface::Plane, MapKind::PlaneAffine { matrix, shift }))
    }

    /// Reinterprets a torus map as a Klein bottle map (given by its lift),
    /// after checking that it commutes with the covering involution.
    pub fn on_klein(&self) -> Result<Self> {
        self.retag(Surface::Torus, Surface::Klein)
    }

    /// Reinterprets an annulus map as a Möbius strip map, after checking that
    /// it commutes with `(s,t) -> (-s, t + 1/2)`.
    pub fn on_mobius_strip(&self) -> Result<Self> {
        self.retag(Surface::Annulus, Surface::Mobius)
    }

    fn retag(&self, from: Surface, to: Surface) -> Result<Self> {
        if self.surface == to {
            return Ok(self.clone());
        }
        crate::metric_space::check_same(from, self.surface)?;
        let residual = involution_residual(self, from == Surface::Torus);
        if residual > 1e-9 {
            return Err(Error::ThetaCommutationFailure { residual });
        }
        Ok(Self::raw(to, self.kind.clone()))
    }

    /// The double of an annulus map (a torus map) or of a Möbius strip map
    /// (a Klein bottle map).
    pub fn double(&self) -> Result<Self> {
        let target = match self.surface {
            Surface::Annulus => Surface::Torus,
            Surface::Mobius => Surface::Klein,
            other => {
                return Err(Error::Precondition(format!(
                    "only annulus and Möbius strip maps can be doubled, not {}",
                    other.name()
                )))
            }
        };
        Ok(match &self.kind {
            MapKind::Composite(links) => {
                let mut out = Vec::with_capacity(links.len());
                for l in links {
                    let inner = Self::raw(self.surface, l.map.kind.clone());
                    out.push(Link {
                        map: inner.double()?,
                        inverted: l.inverted,
                    });
                }
                Self::raw(target, MapKind::Composite(out))
            }
            MapKind::Identity => Self::identity(target),
            kind => Self::raw(target, MapKind::Double(Box::new(Self::raw(self.surface, kind.clone())))),
        })
    }

    pub fn surface(&self) -> Surface {
        self.surface
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    /// Short family name used in reports.
    pub fn kind_name(&self) -> &'static str {
        kind_name(&self.kind)
    }

    pub fn orientation(&self) -> Orientation {
        Orientation::from_sign(orientation_sign(&self.kind))
    }

    pub fn lift_available(&self) -> bool {
        self.surface != Surface::Sphere
    }

    fn check(&self, x: &SurfacePoint) -> Result<()> {
        crate::metric_space::check_same(self.surface, x.surface())
    }

    pub fn forward(&self, x: &SurfacePoint) -> Result<SurfacePoint> {
        self.check(x)?;
        Ok(self.forward_unchecked(x))
    }

    pub fn inverse(&self, x: &SurfacePoint) -> Result<SurfacePoint> {
        self.check(x)?;
        Ok(self.inverse_unchecked(x))
    }

    /// `f^n(x)` for any integer `n`.
    pub fn iterate(&self, x: &SurfacePoint, n: i64) -> Result<SurfacePoint> {
        self.check(x)?;
        let mut p = *x;
        for _ in 0..n.unsigned_abs() {
            p = if n > 0 { self.forward_unchecked(&p) } else { self.inverse_unchecked(&p) };
        }
        Ok(p)
    }

    pub(crate) fn forward_unchecked(&self, x: &SurfacePoint) -> SurfacePoint {
        match x {
            SurfacePoint::Sphere(v) => SurfacePoint::Sphere(sphere_apply(&self.kind, *v, false)),
            other => SurfacePoint::on(self.surface, flat_apply(&self.kind, other.coords2().unwrap(), false)),
        }
    }

    pub(crate) fn inverse_unchecked(&self, x: &SurfacePoint) -> SurfacePoint {
        match x {
            SurfacePoint::Sphere(v) => SurfacePoint::Sphere(sphere_apply(&self.kind, *v, true)),
            other => SurfacePoint::on(self.surface, flat_apply(&self.kind, other.coords2().unwrap(), true)),
        }
    }

    /// The distinguished lift to the universal cover (plane or strip).
    pub fn lift_forward(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        if !self.lift_available() {
            return Err(Error::NoLift);
        }
        Ok(flat_apply(&self.kind, x, false))
    }

    pub fn lift_inverse(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        if !self.lift_available() {
            return Err(Error::NoLift);
        }
        Ok(flat_apply(&self.kind, x, true))
    }

    /// Inverse map, as a one-link composite (or a closed form for simple kinds).
    pub fn inverted(&self) -> SurfaceMap {
        use MapKind::*;
        let kind = match &self.kind {
            Identity => Identity,
            Mobius(m) => Mobius(m.inverse()),
            TorusTranslation { alpha, beta } => TorusTranslation { alpha: -alpha, beta: -beta },
            TorusReversingType1 { alpha } => TorusReversingType1 { alpha: -alpha },
            KleinPhi { alpha } => KleinPhi { alpha: -alpha },
            AnnulusRotation { alpha } => AnnulusRotation { alpha: -alpha },
            AnnulusReversing { alpha } => AnnulusReversing { alpha: -alpha },
            StripRotation { alpha } => StripRotation { alpha: -alpha },
            FiberShift { sin, cos } => FiberShift { sin: -sin, cos: -cos },
            Composite(links) => Composite(
                links
                    .iter()
                    .rev()
                    .map(|l| Link {
                        map: l.map.clone(),
                        inverted: !l.inverted,
                    })
                    .collect(),
            ),
            _ => Composite(vec![Link {
                map: self.clone(),
                inverted: true,
            }]),
        };
        Self::raw(self.surface, kind)
    }

    fn links(&self) -> Vec<Link> {
        match &self.kind {
            MapKind::Composite(l) => l.clone(),
            MapKind::Identity => Vec::new(),
            _ => vec![Link {
                map: self.clone(),
                inverted: false,
            }],
        }
    }

    /// `next o self`: apply `self` first, then `next`.
    pub fn then(&self, next: &SurfaceMap) -> Result<SurfaceMap> {
        crate::metric_space::check_same(self.surface, next.surface)?;
        let mut chain = self.links();
        chain.extend(next.links());
        Self::composite(self.surface, chain)
    }

    /// Builds a composite from links applied in order.
    pub fn composite(surface: Surface, chain: Vec<Link>) -> Result<SurfaceMap> {
        let mut flat = Vec::new();
        for l in chain {
            crate::metric_space::check_same(surface, l.map.surface)?;
            let mut sub = l.map.links();
            if l.inverted {
                sub.reverse();
                for s in &mut sub {
                    s.inverted = !s.inverted;
                }
            }
            flat.extend(sub);
        }
        if flat.len() > MAX_CHAIN {
            return Err(Error::CompositionTooDeep {
                depth: flat.len(),
                limit: MAX_CHAIN,
            });
        }
        Ok(match flat.len() {
            0 => Self::identity(surface),
            1 if !flat[0].inverted => Self::raw(surface, flat.pop().unwrap().map.kind),
            _ => Self::raw(surface, MapKind::Composite(flat)),
        })
    }

    /// `w o f o w^{-1}`.
    pub fn conjugate(f: &SurfaceMap, w: &SurfaceMap) -> Result<SurfaceMap> {
        crate::metric_space::check_same(f.surface, w.surface)?;
        Self::composite(
            f.surface,
            vec![
                Link { map: w.clone(), inverted: true },
                Link { map: f.clone(), inverted: false },
                Link { map: w.clone(), inverted: false },
            ],
        )
    }

    /// `f^n` as a composite chain (`|n| <= 64` links after flattening).
    pub fn power(&self, n: i64) -> Result<SurfaceMap> {
        let base = if n < 0 { self.inverted() } else { self.clone() };
        let links = base.links();
        let mut chain = Vec::new();
        for _ in 0..n.unsigned_abs() {
            chain.extend(links.iter().cloned());
            if chain.len() > MAX_CHAIN {
                return Err(Error::CompositionTooDeep {
                    depth: links.len() * n.unsigned_abs() as usize,
                    limit: MAX_CHAIN,
                });
            }
        }
        Self::composite(self.surface, chain)
    }
}

fn kind_name(kind: &MapKind) -> &'static str {
    use MapKind::*;
    match kind {
        Identity => "identity",
        Mobius(_) => "mobius",
        FractionalReflection(_) => "fractional_reflection",
        RotationProfile(_) => "rotation_profile",
        PolarWarp { .. } => "polar_warp",
        TorusTranslation { .. } => "torus_translation",
        TorusReversingType1 { .. } => "torus_reversing_type1",
        TorusReversingType2 { .. } => "torus_reversing_type2",
        TorusLinear { .. } => "torus_linear",
        TorusShear { .. } => "torus_shear",
        FiberShift { .. } => "fiber_shift",
        GridWarp(_) => "grid_warp",
        KleinPhi { .. } => "klein_phi",
        KleinPsi { .. } => "klein_psi",
        AnnulusRotation { .. } => "annulus_rotation",
        AnnulusReversing { .. } => "annulus_reversing",
        StripRotation { .. } => "mobius_strip_rotation",
        StripShear { .. } => "strip_shear",
        PlaneAffine { .. } => "plane_affine",
        Double(_) => "double",
        Composite(_) => "composite",
    }
}

fn orientation_sign(kind: &MapKind) -> i32 {
    use MapKind::*;
    match kind {
        FractionalReflection(_) | TorusReversingType1 { .. } | TorusReversingType2 { .. } | AnnulusReversing { .. } => -1,
        TorusLinear { matrix, .. } => {
            (matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0]).signum() as i32
        }
        PlaneAffine { matrix, .. } => {
            if matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0] < 0.0 {
                -1
            } else {
                1
            }
        }
        Double(inner) => orientation_sign(&inner.kind),
        Composite(links) => links.iter().map(|l| orientation_sign(&l.map.kind)).product(),
        _ => 1,
    }
}

/// Sign of `ds'/ds` for annulus-type kinds (whether the two boundary
/// circles are kept or swapped).
fn s_sign(kind: &MapKind) -> f64 {
    match kind {
        MapKind::AnnulusReversing { .. } => -1.0,
        MapKind::Composite(links) => links.iter().map(|l| s_sign(&l.map.kind)).product(),
        _ => 1.0,
    }
}

fn rotate_xy(v: [f64; 3], angle: f64) -> [f64; 3] {
    let (s, c) = angle.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]
}

/// Stereographic modulus `|z|` of a sphere point and `rho = sqrt(x^2 + y^2)`.
fn stereo_radius(v: [f64; 3]) -> (f64, f64) {
    let rho = v[0].hypot(v[1]);
    let r = if v[2] <= 0.0 { rho / (1.0 - v[2]) } else { (1.0 + v[2]) / rho };
    (r, rho)
}

fn with_stereo_radius(v: [f64; 3], rho: f64, r: f64) -> [f64; 3] {
    // unit vector with stereographic modulus r and the azimuth of v
    let (cx, cy) = (v[0] / rho, v[1] / rho);
    let d = 1.0 + r * r;
    let k = 2.0 * r / d;
    [k * cx, k * cy, (r * r - 1.0) / d]
}

fn sphere_apply(kind: &MapKind, v: [f64; 3], inv: bool) -> [f64; 3] {
    use MapKind::*;
    match kind {
        Identity => v,
        Mobius(m) => {
            if inv {
                m.inverse().apply_vec(v)
            } else {
                m.apply_vec(v)
            }
        }
        FractionalReflection(m) => {
            if inv {
                let w = m.inverse().apply_vec(v);
                [w[0], -w[1], w[2]]
            } else {
                m.apply_vec([v[0], -v[1], v[2]])
            }
        }
        RotationProfile(p) => {
            let (r, rho) = stereo_radius(v);
            if rho < 1e-300 || !r.is_finite() {
                return v;
            }
            let a = p.eval(r);
            rotate_xy(v, if inv { -a } else { a })
        }
        PolarWarp { amplitude } => {
            let (r, rho) = stereo_radius(v);
            if rho < 1e-300 || !(r < 1.0) {
                return v;
            }
            let w = v[1] / rho;
            let aw = amplitude * w;
            let r2 = if inv {
                2.0 * r / ((1.0 + aw) + ((1.0 + aw) * (1.0 + aw) - 4.0 * aw * r).max(0.0).sqrt())
            } else {
                r + aw * r * (1.0 - r)
            };
            with_stereo_radius(v, rho, r2)
        }
        Composite(links) => {
            let mut p = v;
            if inv {
                for l in links.iter().rev() {
                    p = sphere_apply(&l.map.kind, p, !l.inverted);
                }
            } else {
                for l in links {
                    p = sphere_apply(&l.map.kind, p, l.inverted);
                }
            }
            p
        }
        // flat kinds never reach a sphere point
        _ => [f64::NAN; 3],
    }
}

fn flat_apply(kind: &MapKind, p: [f64; 2], inv: bool) -> [f64; 2] {
    use MapKind::*;
    let [s, t] = p;
    match kind {
        Identity => p,
        TorusTranslation { alpha, beta } => {
            if inv {
                [s - alpha, t - beta]
            } else {
                [s + alpha, t + beta]
            }
        }
        TorusReversingType1 { alpha } | AnnulusReversing { alpha } => {
            [-s, if inv { t - alpha } else { t + alpha }]
        }
        TorusReversingType2 { alpha } => {
            if inv {
                [-s, t + s - alpha]
            } else {
                [-s, t + s + alpha]
            }
        }
        TorusLinear { matrix, shift } => {
            let m = HomologyMatrix { entries: *matrix };
            if inv {
                m.inverse().apply([s - shift[0], t - shift[1]])
            } else {
                let q = m.apply(p);
                [q[0] + shift[0], q[1] + shift[1]]
            }
        }
        TorusShear { a, b } => {
            if inv {
                flat::shear_inverse(*a, *b, p)
            } else {
                flat::shear_forward(*a, *b, p)
            }
        }
        FiberShift { sin, cos } => {
            let g = flat::fiber_shift(*sin, *cos, s);
            [s, if inv { t - g } else { t + g }]
        }
        GridWarp(field) => {
            if inv {
                field.inverse(p)
            } else {
                field.forward(p)
            }
        }
        KleinPhi { alpha } | AnnulusRotation { alpha } | StripRotation { alpha } => {
            [s, if inv { t - alpha } else { t + alpha }]
        }
        KleinPsi { alpha } => {
            if inv {
                [s - 0.5, t - alpha]
            } else {
                [s + 0.5, t + alpha]
            }
        }
        StripShear { a, b } => {
            if inv {
                flat::strip_shear_inverse(*a, *b, p)
            } else {
                flat::strip_shear_forward(*a, *b, p)
            }
        }
        PlaneAffine { matrix, shift } => {
            if inv {
                let (x, y) = (s - shift[0], t - shift[1]);
                let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
                [
                    (matrix[1][1] * x - matrix[0][1] * y) / det,
                    (-matrix[1][0] * x + matrix[0][0] * y) / det,
                ]
            } else {
                [
                    matrix[0][0] * s + matrix[0][1] * t + shift[0],
                    matrix[1][0] * s + matrix[1][1] * t + shift[1],
                ]
            }
        }
        Double(inner) => double_lift(&inner.kind, p, inv),
        Composite(links) => {
            let mut q = p;
            if inv {
                for l in links.iter().rev() {
                    q = flat_apply(&l.map.kind, q, !l.inverted);
                }
            } else {
                for l in links {
                    q = flat_apply(&l.map.kind, q, l.inverted);
                }
            }
            q
        }
        // sphere kinds never reach a flat point
        _ => [f64::NAN; 2],
    }
}

/// Lift of the doubled map: `y` in `R` covers the circle made of the two
/// copies of `[-1, 1]`.
fn double_lift(inner: &MapKind, p: [f64; 2], inv: bool) -> [f64; 2] {
    let [y, t] = p;
    let m = (y + 0.25).floor();
    let y0 = y - m;
    let copy1 = y0 > 0.25;
    let s = if copy1 { 2.0 - 4.0 * y0 } else { 4.0 * y0 };
    let [s2, t2] = flat_apply(inner, [s.clamp(-1.0, 1.0), t], inv);
    let s2 = s2.clamp(-1.0, 1.0);
    let yc = if copy1 { (2.0 - s2) / 4.0 } else { s2 / 4.0 };
    let sigma = s_sign(inner);
    let target = sigma * y0;
    let yr = yc + (target - yc).round();
    [sigma * m + yr, t2]
}

/// Sup over a grid of the failure of the lift to commute with the
/// involution `(s,t) -> (-s, t + 1/2)`, measured modulo the deck group.
fn involution_residual(f: &SurfaceMap, torus: bool) -> f64 {
    let theta = |p: [f64; 2]| [-p[0], p[1] + 0.5];
    let mut worst: f64 = 0.0;
    let n = 24;
    for i in 0..n {
        for j in 0..n {
            let s = if torus {
                i as f64 / n as f64
            } else {
                -1.0 + 2.0 * i as f64 / (n - 1) as f64
            };
            let p = [s, (j as f64 + 0.5) / n as f64];
            let a = flat_apply(&f.kind, theta(p), false);
            let b = theta(flat_apply(&f.kind, p, false));
            let ds = if torus { crate::metric_space::wrap_half(a[0] - b[0]) } else { a[0] - b[0] };
            let dt = crate::metric_space::wrap_half(a[1] - b[1]);
            worst = worst.max(ds.hypot(dt));
        }
    }
    worst
}

/// Numerical homology matrix `lift(x + e_i) - lift(x)` of a torus or Klein
/// bottle map, rounded to integers.
pub fn homology_matrix_of(f: &SurfaceMap) -> Result<HomologyMatrix> {
    if !matches!(f.surface, Surface::Torus | Surface::Klein) {
        return Err(Error::NoLift);
    }
    let bases = [[0.1234, 0.5678], [0.71, 0.29], [0.43, 0.91]];
    let mut entries = [[0i64; 2]; 2];
    let mut worst: f64 = 0.0;
    for (k, b) in bases.iter().enumerate() {
        let fx = f.lift_forward(*b)?;
        for i in 0..2 {
            let mut e = *b;
            e[i] += 1.0;
            let fe = f.lift_forward(e)?;
            for r in 0..2 {
                let d = fe[r] - fx[r];
                let rd = d.round();
                worst = worst.max((d - rd).abs());
                if k == 0 {
                    entries[r][i] = rd as i64;
                } else if entries[r][i] != rd as i64 {
                    worst = worst.max(1.0);
                }
            }
        }
    }
    if worst > 1e-3 || !worst.is_finite() {
        return Err(Error::NonIntegerHolonomy { residual: worst });
    }
    HomologyMatrix::new(entries).map_err(|_| Error::NonIntegerHolonomy { residual: worst })
}

pub use doc::{map_from_json, map_to_json};

#[cfg(test)]
mod tests;
