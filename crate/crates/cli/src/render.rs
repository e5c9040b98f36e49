//! Plots of point sets and curves as SVG documents or PNG images.

use std::fmt::Write as _;
use std::f64::consts::{PI, TAU};

use kere_core::metric_space::{frac, SurfacePoint};

pub type Rgb = [u8; 3];

pub const INK: Rgb = [0x1f, 0x3a, 0x93];
pub const ALERT: Rgb = [0xc0, 0x26, 0x26];
pub const FAINT: Rgb = [0xc8, 0xc8, 0xc8];

#[derive(Debug, Clone)]
pub enum Layer {
    Points { points: Vec<[f64; 2]>, color: Rgb, radius: f64 },
    /// Drawn as separate pieces wherever consecutive points jump by more
    /// than half the frame (a wrap on a periodic chart).
    Curve { points: Vec<[f64; 2]>, color: Rgb },
}

/// A plot in the unit square, `y` pointing up.
#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub size: u32,
    pub layers: Vec<Layer>,
}

/// Position of a point in the unit square: equirectangular on the sphere,
/// the fundamental domain elsewhere.
pub fn project(p: &SurfacePoint) -> [f64; 2] {
    match *p {
        SurfacePoint::Sphere(v) => [(v[1].atan2(v[0]) + PI) / TAU, (v[2].clamp(-1.0, 1.0).asin() + PI / 2.0) / PI],
        SurfacePoint::Torus([s, t]) | SurfacePoint::Klein([s, t]) => [frac(s), frac(t)],
        SurfacePoint::Annulus([s, t]) => [(s + 1.0) / 2.0, frac(t)],
        SurfacePoint::Mobius([s, t]) => [(s + 1.0) / 2.0, 2.0 * t.rem_euclid(0.5)],
        SurfacePoint::Plane([x, y]) => [0.5 + x.atan() / PI, 0.5 + y.atan() / PI],
    }
}

fn pieces(points: &[[f64; 2]]) -> Vec<&[[f64; 2]]> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=points.len() {
        let cut = k == points.len()
            || (points[k][0] - points[k - 1][0]).abs() > 0.5
            || (points[k][1] - points[k - 1][1]).abs() > 0.5;
        if cut {
            if k - start >= 2 {
                out.push(&points[start..k]);
            }
            start = k;
        }
    }
    out
}

fn hex(c: Rgb) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    pub fn new(title: impl Into<String>) -> Self {
        Plot { title: title.into(), size: 512, layers: Vec::new() }
    }

    pub fn points(mut self, points: Vec<[f64; 2]>, color: Rgb, radius: f64) -> Self {
        self.layers.push(Layer::Points { points, color, radius });
        self
    }

    pub fn curve(mut self, points: Vec<[f64; 2]>, color: Rgb) -> Self {
        self.layers.push(Layer::Curve { points, color });
        self
    }

    fn pixel(&self, p: [f64; 2]) -> [f64; 2] {
        let s = self.size as f64;
        [p[0] * s, (1.0 - p[1]) * s]
    }

    pub fn to_svg(&self) -> String {
        let s = self.size;
        let mut out = String::new();
        writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" viewBox="0 0 {s} {s}">"#).unwrap();
        writeln!(out, "<title>{}</title>", escape(&self.title)).unwrap();
        writeln!(out, r#"<rect x="0" y="0" width="{s}" height="{s}" fill="white" stroke="black"/>"#).unwrap();
        for layer in &self.layers {
            match layer {
                Layer::Points { points, color, radius } => {
                    writeln!(out, r#"<g fill="{}">"#, hex(*color)).unwrap();
                    for p in points {
                        let [x, y] = self.pixel(*p);
                        writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{radius}"/>"#).unwrap();
                    }
                    out.push_str("</g>\n");
                }
                Layer::Curve { points, color } => {
                    writeln!(out, r#"<g fill="none" stroke="{}" stroke-width="1">"#, hex(*color)).unwrap();
                    for piece in pieces(points) {
                        out.push_str(r#"<polyline points=""#);
                        for (k, p) in piece.iter().enumerate() {
                            let [x, y] = self.pixel(*p);
                            if k > 0 {
                                out.push(' ');
                            }
                            write!(out, "{x:.2},{y:.2}").unwrap();
                        }
                        out.push_str("\"/>\n");
                    }
                    out.push_str("</g>\n");
                }
            }
        }
        out.push_str("</svg>\n");
        out
    }

    /// Rasterizes the plot and encodes it as an 8-bit RGB PNG.
    pub fn to_png(&self) -> Vec<u8> {
        let mut canvas = Canvas::new(self.size);
        for layer in &self.layers {
            match layer {
                Layer::Points { points, color, radius } => {
                    for p in points {
                        canvas.dot(self.pixel(*p), radius.max(0.5), *color);
                    }
                }
                Layer::Curve { points, color } => {
                    for piece in pieces(points) {
                        for w in piece.windows(2) {
                            canvas.line(self.pixel(w[0]), self.pixel(w[1]), *color);
                        }
                    }
                }
            }
        }
        canvas.encode()
    }
}

struct Canvas {
    size: u32,
    rgb: Vec<u8>,
}

impl Canvas {
    fn new(size: u32) -> Self {
        let mut c = Canvas { size, rgb: vec![255; (size * size * 3) as usize] };
        for k in 0..size as i64 {
            let e = size as i64 - 1;
            for (x, y) in [(k, 0), (k, e), (0, k), (e, k)] {
                c.set(x, y, [0, 0, 0]);
            }
        }
        c
    }

    fn set(&mut self, x: i64, y: i64, c: Rgb) {
        let n = self.size as i64;
        if (0..n).contains(&x) && (0..n).contains(&y) {
            let i = ((y * n + x) * 3) as usize;
            self.rgb[i..i + 3].copy_from_slice(&c);
        }
    }

    fn dot(&mut self, [cx, cy]: [f64; 2], r: f64, c: Rgb) {
        let (x0, x1) = ((cx - r).floor() as i64, (cx + r).ceil() as i64);
        let (y0, y1) = ((cy - r).floor() as i64, (cy + r).ceil() as i64);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                if dx * dx + dy * dy <= r * r + 0.5 {
                    self.set(x, y, c);
                }
            }
        }
    }

    // Bresenham
    fn line(&mut self, a: [f64; 2], b: [f64; 2], c: Rgb) {
        let (mut x, mut y) = (a[0].floor() as i64, a[1].floor() as i64);
        let (x1, y1) = (b[0].floor() as i64, b[1].floor() as i64);
        let (dx, dy) = ((x1 - x).abs(), -(y1 - y).abs());
        let (sx, sy) = (if x < x1 { 1 } else { -1 }, if y < y1 { 1 } else { -1 });
        let mut err = dx + dy;
        loop {
            self.set(x, y, c);
            if x == x1 && y == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        {
            let mut enc = png::Encoder::new(&mut out, self.size, self.size);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let mut w = enc.write_header().expect("in-memory PNG header");
            w.write_image_data(&self.rgb).expect("in-memory PNG data");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wraps_split_curves() {
        let pts = vec![[0.1, 0.1], [0.2, 0.1], [0.9, 0.1], [0.95, 0.2]];
        let p = pieces(&pts);
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].len(), 2);
    }

    #[test]
    fn png_has_signature_and_size() {
        let bytes = Plot::new("t").curve(vec![[0.0, 0.0], [1.0, 1.0]], INK).to_png();
        assert_eq!(&bytes[..8], b"\x89PNG\r\n\x1a\n");
        let dec = png::Decoder::new(bytes.as_slice());
        let reader = dec.read_info().unwrap();
        assert_eq!(reader.info().width, 512);
    }

    #[test]
    fn sphere_projection_covers_the_square() {
        let s = project(&SurfacePoint::south());
        assert!(s[1].abs() < 1e-12);
        let n = project(&SurfacePoint::north());
        assert!((n[1] - 1.0).abs() < 1e-12);
    }
}
