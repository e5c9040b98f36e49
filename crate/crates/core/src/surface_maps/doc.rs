//! JSON map documents: `{"surface", "kind", "params", "chain"}`.

use num_complex::Complex64 as C;
use serde_json::{json, Map, Value};

use super::{GridField, Link, MapKind, Mobius, Profile, SurfaceMap};
use crate::error::{Error, Result};
use crate::metric_space::Surface;

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

struct Params<'a> {
    kind: &'a str,
    map: Option<&'a Map<String, Value>>,
}

impl<'a> Params<'a> {
    fn get(&self, key: &str) -> Option<&'a Value> {
        self.map.and_then(|m| m.get(key))
    }

    fn real(&self, key: &str) -> Result<f64> {
        let v = self.get(key).ok_or_else(|| bad(format!("{}: missing parameter `{key}`", self.kind)))?;
        number(v).ok_or_else(|| bad(format!("{}: parameter `{key}` must be a number", self.kind)))
    }

    fn real_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(_) => self.real(key),
        }
    }

    fn complex(&self, key: &str) -> Result<C> {
        let v = self.get(key).ok_or_else(|| bad(format!("{}: missing parameter `{key}`", self.kind)))?;
        if let Some(x) = number(v) {
            return Ok(C::new(x, 0.0));
        }
        match v.as_array().map(|a| a.as_slice()) {
            Some([re, im]) => match (number(re), number(im)) {
                (Some(re), Some(im)) => Ok(C::new(re, im)),
                _ => Err(bad(format!("{}: `{key}` must be [re, im]", self.kind))),
            },
            _ => Err(bad(format!("{}: `{key}` must be a number or [re, im]", self.kind))),
        }
    }

    fn reals(&self, key: &str) -> Result<Vec<f64>> {
        let v = self.get(key).ok_or_else(|| bad(format!("{}: missing parameter `{key}`", self.kind)))?;
        v.as_array()
            .ok_or_else(|| bad(format!("{}: `{key}` must be an array", self.kind)))?
            .iter()
            .map(|x| number(x).ok_or_else(|| bad(format!("{}: `{key}` must hold numbers", self.kind))))
            .collect()
    }

    fn pair(&self, key: &str) -> Result<[f64; 2]> {
        match self.reals(key)?.as_slice() {
            [a, b] => Ok([*a, *b]),
            _ => Err(bad(format!("{}: `{key}` must have two entries", self.kind))),
        }
    }

    fn matrix(&self, key: &str) -> Result<[[f64; 2]; 2]> {
        let v = self.get(key).ok_or_else(|| bad(format!("{}: missing parameter `{key}`", self.kind)))?;
        let rows = v.as_array().filter(|r| r.len() == 2).ok_or_else(|| bad(format!("{}: `{key}` must be 2x2", self.kind)))?;
        let mut m = [[0.0; 2]; 2];
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_array().filter(|r| r.len() == 2).ok_or_else(|| bad(format!("{}: `{key}` must be 2x2", self.kind)))?;
            for (j, x) in row.iter().enumerate() {
                m[i][j] = number(x).ok_or_else(|| bad(format!("{}: `{key}` must hold numbers", self.kind)))?;
            }
        }
        Ok(m)
    }

    fn int_matrix(&self, key: &str) -> Result<[[i64; 2]; 2]> {
        let m = self.matrix(key)?;
        let mut out = [[0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                if m[i][j].fract() != 0.0 {
                    return Err(bad(format!("{}: `{key}` must hold integers", self.kind)));
                }
                out[i][j] = m[i][j] as i64;
            }
        }
        Ok(out)
    }
}

fn parse_surface(v: Option<&Value>) -> Result<Option<Surface>> {
    match v {
        None | Some(Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v.clone())
            .map(Some)
            .map_err(|_| bad(format!("unknown surface {v}"))),
    }
}

fn parse_chain(doc: &Value, kind: &str) -> Result<Vec<(SurfaceMap, bool)>> {
    let chain = doc
        .get("chain")
        .and_then(Value::as_array)
        .ok_or_else(|| bad(format!("{kind}: missing `chain` array")))?;
    chain
        .iter()
        .map(|d| {
            let inverted = d.get("inverted").map(|v| v.as_bool().ok_or_else(|| bad("`inverted` must be a boolean"))).transpose()?.unwrap_or(false);
            Ok((map_from_json(d)?, inverted))
        })
        .collect()
}

/// Parses a map document.
pub fn map_from_json(doc: &Value) -> Result<SurfaceMap> {
    let kind = doc
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("map document needs a string `kind`"))?;
    let surface = parse_surface(doc.get("surface"))?;
    let p = Params {
        kind,
        map: match doc.get("params") {
            None | Some(Value::Null) => None,
            Some(Value::Object(m)) => Some(m),
            Some(_) => return Err(bad(format!("{kind}: `params` must be an object"))),
        },
    };
    let m = match kind {
        "identity" => SurfaceMap::identity(surface.ok_or_else(|| bad("identity needs a `surface`"))?),
        "mobius" | "fractional_reflection" => {
            let (a, b, c, d) = (p.complex("a")?, p.complex("b")?, p.complex("c")?, p.complex("d")?);
            if kind == "mobius" {
                SurfaceMap::mobius(a, b, c, d)?
            } else {
                SurfaceMap::fractional_reflection(a, b, c, d)?
            }
        }
        "rotation" => SurfaceMap::rotation(p.real("alpha")?),
        "rotation_profile" => match (p.get("radii"), p.get("angles")) {
            (None, None) => SurfaceMap::rotation_profile(Profile::identity_ramp()),
            _ => SurfaceMap::rotation_profile(Profile::new(p.reals("radii")?, p.reals("angles")?)?),
        },
        "polar_warp" => SurfaceMap::polar_warp(p.real("amplitude")?)?,
        "torus_translation" => SurfaceMap::torus_translation(p.real("alpha")?, p.real("beta")?)?,
        "torus_reversing_type1" => SurfaceMap::torus_reversing_type1(p.real("alpha")?)?,
        "torus_reversing_type2" => SurfaceMap::torus_reversing_type2(p.real("alpha")?)?,
        "torus_linear" => SurfaceMap::torus_linear(
            p.int_matrix("matrix")?,
            if p.get("shift").is_some() { p.pair("shift")? } else { [0.0, 0.0] },
        )?,
        "torus_shear" => SurfaceMap::torus_shear(p.real("a")?, p.real("b")?)?,
        "fiber_shift" => SurfaceMap::fiber_shift(p.real_or("sin", 0.0)?, p.real_or("cos", 0.0)?)?,
        "grid_warp" => {
            let n = p.real("n")?;
            if n.fract() != 0.0 || n < 2.0 {
                return Err(bad("grid_warp: `n` must be an integer >= 2"));
            }
            SurfaceMap::grid_warp(GridField::new(n as usize, p.reals("dx")?, p.reals("dy")?)?)
        }
        "klein_phi" => SurfaceMap::klein_phi(p.real("alpha")?)?,
        "klein_psi" => SurfaceMap::klein_psi(p.real("alpha")?)?,
        "annulus_rotation" => SurfaceMap::annulus_rotation(p.real("alpha")?)?,
        "annulus_reversing" => SurfaceMap::annulus_reversing(p.real("alpha")?)?,
        "mobius_strip_rotation" => SurfaceMap::mobius_strip_rotation(p.real("alpha")?)?,
        "strip_shear" => SurfaceMap::strip_shear(p.real("a")?, p.real("b")?)?,
        "plane_affine" => SurfaceMap::plane_affine(
            p.matrix("matrix")?,
            if p.get("shift").is_some() { p.pair("shift")? } else { [0.0, 0.0] },
        )?,
        "double" => {
            let chain = parse_chain(doc, kind)?;
            match chain.as_slice() {
                [(inner, inverted)] => {
                    let inner = if *inverted { inner.inverted() } else { inner.clone() };
                    inner.double()?
                }
                _ => return Err(bad("double: `chain` must hold exactly one map")),
            }
        }
        "composite" => {
            let chain = parse_chain(doc, kind)?;
            let first = chain.first().ok_or(Error::EmptyInput("composite chain"))?;
            let base = surface.unwrap_or(first.0.surface());
            let links = chain
                .into_iter()
                .map(|(map, inverted)| Ok(Link { map: retag(map, base)?, inverted }))
                .collect::<Result<Vec<_>>>()?;
            SurfaceMap::composite(base, links)?
        }
        other => return Err(bad(format!("unknown map kind `{other}`"))),
    };
    match surface {
        Some(s) => retag(m, s),
        None => Ok(m),
    }
}

fn retag(m: SurfaceMap, to: Surface) -> Result<SurfaceMap> {
    match (m.surface(), to) {
        (a, b) if a == b => Ok(m),
        (Surface::Torus, Surface::Klein) => m.on_klein(),
        (Surface::Annulus, Surface::Mobius) => m.on_mobius_strip(),
        (a, b) => Err(Error::SurfaceMismatch { expected: b, found: a }),
    }
}

fn complex(z: C) -> Value {
    json!([z.re, z.im])
}

fn mobius_params(m: &Mobius) -> Value {
    json!({"a": complex(m.a), "b": complex(m.b), "c": complex(m.c), "d": complex(m.d)})
}

/// Serializes a map to its document form.
pub fn map_to_json(f: &SurfaceMap) -> Value {
    use MapKind::*;
    let surface = f.surface().name();
    let kind = f.kind_name();
    let params = match f.kind() {
        Identity | Double(_) | Composite(_) => Value::Null,
        Mobius(m) | FractionalReflection(m) => mobius_params(m),
        RotationProfile(p) => json!({"radii": p.radii(), "angles": p.angles()}),
        PolarWarp { amplitude } => json!({ "amplitude": amplitude }),
        TorusTranslation { alpha, beta } => json!({"alpha": alpha, "beta": beta}),
        TorusReversingType1 { alpha }
        | TorusReversingType2 { alpha }
        | KleinPhi { alpha }
        | KleinPsi { alpha }
        | AnnulusRotation { alpha }
        | AnnulusReversing { alpha }
        | StripRotation { alpha } => json!({ "alpha": alpha }),
        TorusLinear { matrix, shift } => json!({"matrix": matrix, "shift": shift}),
        TorusShear { a, b } | StripShear { a, b } => json!({"a": a, "b": b}),
        FiberShift { sin, cos } => json!({"sin": sin, "cos": cos}),
        GridWarp(g) => json!({"n": g.n(), "dx": g.dx(), "dy": g.dy()}),
        PlaneAffine { matrix, shift } => json!({"matrix": matrix, "shift": shift}),
    };
    let mut out = json!({"surface": surface, "kind": kind});
    if !params.is_null() {
        out["params"] = params;
    }
    match f.kind() {
        Double(inner) => out["chain"] = json!([map_to_json(inner)]),
        Composite(links) => {
            out["chain"] = Value::Array(
                links
                    .iter()
                    .map(|l| {
                        let mut d = map_to_json(&l.map);
                        d["inverted"] = Value::Bool(l.inverted);
                        d
                    })
                    .collect(),
            )
        }
        _ => {}
    }
    out
}
