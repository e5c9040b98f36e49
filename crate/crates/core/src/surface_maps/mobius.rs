use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric_space::SurfacePoint;

/// Linear fractional transformation `z -> (a z + b) / (c z + d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub a: C,
    pub b: C,
    pub c: C,
    pub d: C,
}

impl Mobius {
    pub fn new(a: C, b: C, c: C, d: C) -> Result<Self> {
        let m = Mobius { a, b, c, d };
        let det = m.det();
        if !(det.norm() > 1e-14) || ![a, b, c, d].iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidParameter(format!("degenerate Möbius coefficients (det {det})")));
        }
        Ok(m.normalized())
    }

    pub fn identity() -> Self {
        Mobius {
            a: C::new(1.0, 0.0),
            b: C::new(0.0, 0.0),
            c: C::new(0.0, 0.0),
            d: C::new(1.0, 0.0),
        }
    }

    /// Rigid rotation about the polar axis by `turns` of a full turn.
    pub fn rotation(turns: f64) -> Self {
        let w = C::from_polar(1.0, std::f64::consts::TAU * turns);
        Mobius::new(w, C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0)).unwrap()
    }

    /// Unitary transformation `[[a, b], [-conj(b), conj(a)]]`, an isometry of
    /// the round sphere.
    pub fn unitary(a: C, b: C) -> Result<Self> {
        Mobius::new(a, b, -b.conj(), a.conj())
    }

    pub fn det(&self) -> C {
        self.a * self.d - self.b * self.c
    }

    /// Scales the coefficients so that `ad - bc = 1`.
    pub fn normalized(self) -> Self {
        let k = C::new(1.0, 0.0) / self.det().sqrt();
        Mobius {
            a: self.a * k,
            b: self.b * k,
            c: self.c * k,
            d: self.d * k,
        }
    }

    pub fn trace(&self) -> C {
        self.a + self.d
    }

    pub fn inverse(&self) -> Self {
        Mobius {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Mobius) -> Self {
        Mobius {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
        .normalized()
    }

    #[inline]
    pub fn apply_homogeneous(&self, u: C, v: C) -> (C, C) {
        (self.a * u + self.b * v, self.c * u + self.d * v)
    }

    #[inline]
    pub(crate) fn apply_vec(&self, p: [f64; 3]) -> [f64; 3] {
        let [x, y, z] = p;
        let (u, v) = if z <= 0.0 {
            (C::new(x, y), C::new(1.0 - z, 0.0))
        } else {
            (C::new(1.0 + z, 0.0), C::new(x, -y))
        };
        let (u, v) = self.apply_homogeneous(u, v);
        let (uu, vv) = (u.norm_sqr(), v.norm_sqr());
        let w = u * v.conj();
        let n = uu + vv;
        [2.0 * w.re / n, 2.0 * w.im / n, (uu - vv) / n]
    }

    /// Image of a finite `z` (returns `None` for infinity).
    pub fn apply_complex(&self, z: C) -> Option<C> {
        let den = self.c * z + self.d;
        if den.norm() < 1e-300 {
            None
        } else {
            Some((self.a * z + self.b) / den)
        }
    }

    /// Fixed points on the sphere (one for parabolic, two otherwise; the
    /// identity returns none).
    pub fn fixed_points(&self) -> Vec<SurfacePoint> {
        let m = self.normalized();
        let (a, b, c, d) = (m.a, m.b, m.c, m.d);
        if c.norm() < 1e-14 {
            if (a - d).norm() < 1e-14 {
                return if b.norm() < 1e-14 {
                    Vec::new()
                } else {
                    vec![SurfacePoint::north()]
                };
            }
            // a z + b = d z
            let z = b / (d - a);
            return vec![SurfacePoint::from_complex(z), SurfacePoint::north()];
        }
        // c z^2 + (d - a) z - b = 0
        let disc = (d - a) * (d - a) + 4.0 * b * c;
        let r = disc.sqrt();
        let z1 = (a - d + r) / (2.0 * c);
        let z2 = (a - d - r) / (2.0 * c);
        if r.norm() < 1e-12 {
            vec![SurfacePoint::from_complex(z1)]
        } else {
            vec![SurfacePoint::from_complex(z1), SurfacePoint::from_complex(z2)]
        }
    }
}

/// Piecewise-linear angle profile `phi(r)` (radians) on `[0, inf)`,
/// extrapolated linearly by the last segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    radii: Vec<f64>,
    angles: Vec<f64>,
}

impl Profile {
    pub fn new(radii: Vec<f64>, angles: Vec<f64>) -> Result<Self> {
        if radii.len() < 2 || radii.len() != angles.len() {
            return Err(Error::InvalidParameter(
                "profile needs at least two (radius, angle) pairs of equal length".into(),
            ));
        }
        if radii[0] != 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "profile radii must start at 0 and increase strictly".into(),
            ));
        }
        if angles.iter().chain(&radii).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("profile values must be finite".into()));
        }
        Ok(Profile { radii, angles })
    }

    /// `phi(r) = r` tabulated on `[0, 8]`: strictly increasing, constant on no interval.
    pub fn identity_ramp() -> Self {
        let radii: Vec<f64> = (0..=32).map(|k| k as f64 * 0.25).collect();
        Profile::new(radii.clone(), radii).unwrap()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn eval(&self, r: f64) -> f64 {
        let n = self.radii.len();
        let i = match self.radii.partition_point(|&x| x <= r) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let (r0, r1) = (self.radii[i], self.radii[i + 1]);
        let (a0, a1) = (self.angles[i], self.angles[i + 1]);
        a0 + (a1 - a0) * (r - r0) / (r1 - r0)
    }
}
