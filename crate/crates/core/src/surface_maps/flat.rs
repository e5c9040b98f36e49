//! Lift formulas of the flat families, acting on `R^2` (or `[-1,1] x R` for
//! annulus-type maps).

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic bilinear displacement field on an `n x n` grid of the unit torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    n: usize,
    dx: Vec<f64>,
    dy: Vec<f64>,
}

impl GridField {
    /// `dx[i * n + j]` is the `s`-displacement at node `(i / n, j / n)`.
    pub fn new(n: usize, dx: Vec<f64>, dy: Vec<f64>) -> Result<Self> {
        if n < 2 || dx.len() != n * n || dy.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "grid warp needs n >= 2 and n*n displacements per axis (n = {n})"
            )));
        }
        if dx.iter().chain(&dy).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("grid warp displacements must be finite".into()));
        }
        let field = GridField { n, dx, dy };
        let lip = field.lipschitz();
        if lip >= 0.5 {
            return Err(Error::InvalidParameter(format!(
                "grid warp displacement is too steep to be invertible (Lipschitz {lip:.3} >= 0.5)"
            )));
        }
        Ok(field)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> &[f64] {
        &self.dx
    }

    pub fn dy(&self) -> &[f64] {
        &self.dy
    }

    fn lipschitz(&self) -> f64 {
        let n = self.n;
        let at = |v: &[f64], i: usize, j: usize| v[(i % n) * n + (j % n)];
        let mut lip: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut ds = 0.0;
                let mut dt = 0.0;
                for v in [&self.dx, &self.dy] {
                    ds += (at(v, i + 1, j) - at(v, i, j)).abs().max((at(v, i + 1, j + 1) - at(v, i, j + 1)).abs());
                    dt += (at(v, i, j + 1) - at(v, i, j)).abs().max((at(v, i + 1, j + 1) - at(v, i + 1, j)).abs());
                }
                lip = lip.max((ds + dt) * n as f64);
            }
        }
        lip
    }

    pub fn displacement(&self, p: [f64; 2]) -> [f64; 2] {
        let n = self.n;
        let nf = n as f64;
        let u = p[0].rem_euclid(1.0) * nf;
        let v = p[1].rem_euclid(1.0) * nf;
        let (i, j) = ((u.floor() as usize).min(n - 1), (v.floor() as usize).min(n - 1));
        let (fu, fv) = (u - i as f64, v - j as f64);
        let (i1, j1) = ((i + 1) % n, (j + 1) % n);
        let bil = |f: &[f64]| {
            f[i * n + j] * (1.0 - fu) * (1.0 - fv)
                + f[i1 * n + j] * fu * (1.0 - fv)
                + f[i * n + j1] * (1.0 - fu) * fv
                + f[i1 * n + j1] * fu * fv
        };
        [bil(&self.dx), bil(&self.dy)]
    }

    pub fn forward(&self, p: [f64; 2]) -> [f64; 2] {
        let d = self.displacement(p);
        [p[0] + d[0], p[1] + d[1]]
    }

    pub fn inverse(&self, p: [f64; 2]) -> [f64; 2] {
        let mut q = p;
        for _ in 0..80 {
            let d = self.displacement(q);
            let next = [p[0] - d[0], p[1] - d[1]];
            let change = (next[0] - q[0]).abs() + (next[1] - q[1]).abs();
            q = next;
            if change < 1e-16 {
                break;
            }
        }
        q
    }
}

pub(crate) fn shear_forward(a: f64, b: f64, p: [f64; 2]) -> [f64; 2] {
    let s = p[0] + a * (TAU * p[1]).sin();
    [s, p[1] + b * (TAU * s).cos()]
}

pub(crate) fn shear_inverse(a: f64, b: f64, p: [f64; 2]) -> [f64; 2] {
    let t = p[1] - b * (TAU * p[0]).cos();
    [p[0] - a * (TAU * t).sin(), t]
}

pub(crate) fn strip_shear_forward(a: f64, b: f64, p: [f64; 2]) -> [f64; 2] {
    let s = p[0] + a * (1.0 - p[0] * p[0]) * (TAU * p[1]).sin();
    let s = s.clamp(-1.0, 1.0);
    [s, p[1] + b * (PI * s).cos()]
}

pub(crate) fn strip_shear_inverse(a: f64, b: f64, p: [f64; 2]) -> [f64; 2] {
    let t = p[1] - b * (PI * p[0]).cos();
    let aw = a * (TAU * t).sin();
    let sp = p[0];
    let disc = (1.0 - 4.0 * aw * (sp - aw)).max(0.0);
    let s = 2.0 * (sp - aw) / (1.0 + disc.sqrt());
    [s.clamp(-1.0, 1.0), t]
}

pub(crate) fn fiber_shift(sin: f64, cos: f64, s: f64) -> f64 {
    sin * (TAU * s).sin() + cos * (TAU * s).cos()
}
