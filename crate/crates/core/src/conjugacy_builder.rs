//! Grid-sampled conjugacies between regular maps and their canonical models.
//!
//! Group elements of the closure of `{f^n}` are approximated by closest
//! returns: `g_t ~ f^n` with `n rho` nearest to `t`.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::classifier::{axis_chart, between, classify, Budget, MapClass};
use crate::error::{Error, Result};
use crate::metric_space::{
    check_same, distance_unchecked, frac, from_local, hausdorff_distance, local_coords_unchecked,
    wrap_half, epsilon_components, FiniteSet, Surface, SurfacePoint,
};
use crate::rotation_invariants::{weighted_average, weighted_translation_vector};
use crate::surface_maps::{map_to_json, SurfaceMap};

/// A sampled closed (or open) curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub samples: Vec<SurfacePoint>,
    pub closed: bool,
    /// Declared bound on the spacing of consecutive samples.
    pub mesh: f64,
}

impl Curve {
    fn segment_lengths(&self) -> Vec<f64> {
        let n = self.samples.len();
        let m = if self.closed { n } else { n.saturating_sub(1) };
        (0..m)
            .map(|i| distance_unchecked(&self.samples[i], &self.samples[(i + 1) % n]))
            .collect()
    }

    pub fn max_spacing(&self) -> f64 {
        self.segment_lengths().into_iter().fold(0.0, f64::max)
    }

    /// No two samples that are far apart along the curve come within
    /// `mesh / 2` of each other.
    pub fn is_simple(&self) -> bool {
        let n = self.samples.len();
        let seg = self.segment_lengths();
        let mut acc = vec![0.0; n + 1];
        for i in 0..seg.len() {
            acc[i + 1] = acc[i] + seg[i];
        }
        let total = acc[seg.len()];
        for i in 0..n {
            for j in i + 1..n {
                let along = acc[j] - acc[i];
                let along = if self.closed { along.min(total - along) } else { along };
                if along > 2.0 * self.mesh
                    && distance_unchecked(&self.samples[i], &self.samples[j]) < self.mesh / 2.0
                {
                    return false;
                }
            }
        }
        true
    }

    /// `d_H(f(gamma), gamma)`.
    pub fn invariance_defect(&self, f: &SurfaceMap) -> Result<f64> {
        let img: Vec<SurfacePoint> = self.samples.iter().map(|p| f.forward_unchecked(p)).collect();
        hausdorff_distance(&FiniteSet::exact(img)?, &FiniteSet::exact(self.samples.clone())?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleBudget {
    /// Points on the boundary net of the seed disc.
    pub net: usize,
    /// Angular bins of the envelope.
    pub bins: usize,
    pub max_iterates: usize,
    /// Iterates leaving this distance from the centre count as escaping.
    pub max_radius: f64,
}

impl Default for CircleBudget {
    fn default() -> Self {
        CircleBudget { net: 256, bins: 256, max_iterates: 4096, max_radius: PI / 2.0 }
    }
}

fn envelope(bins: &[Option<(f64, SurfacePoint)>], mesh_hint: f64) -> Curve {
    let samples: Vec<SurfacePoint> = bins.iter().flatten().map(|(_, p)| *p).collect();
    let mut c = Curve { samples, closed: true, mesh: mesh_hint };
    c.mesh = c.max_spacing();
    c
}

/// An invariant closed curve around the fixed point `x`: the outer boundary
/// of the union of iterates of a small disc.
pub fn invariant_circle(
    f: &SurfaceMap,
    x: &SurfacePoint,
    seed_radius: f64,
    budget: &CircleBudget,
) -> Result<Curve> {
    check_same(f.surface(), x.surface())?;
    if !(seed_radius > 0.0 && seed_radius < budget.max_radius) {
        return Err(Error::InvalidParameter(format!("seed radius {seed_radius} out of range")));
    }
    let drift = distance_unchecked(&f.forward_unchecked(x), x);
    if drift > 1e-6 {
        return Err(Error::Precondition(format!("centre is not fixed (displacement {drift:.2e})")));
    }
    let nb = budget.bins.max(8);
    let mut bins: Vec<Option<(f64, SurfacePoint)>> = vec![None; nb];
    let add = |p: SurfacePoint, bins: &mut Vec<Option<(f64, SurfacePoint)>>| -> bool {
        let v = local_coords_unchecked(x, &p);
        let r = v[0].hypot(v[1]);
        if !(r <= budget.max_radius) {
            return false;
        }
        let k = ((v[1].atan2(v[0]) / TAU).rem_euclid(1.0) * nb as f64) as usize % nb;
        if bins[k].map_or(true, |(r0, _)| r > r0) {
            bins[k] = Some((r, p));
        }
        true
    };
    let net: Vec<SurfacePoint> = (0..budget.net)
        .map(|k| {
            let a = TAU * k as f64 / budget.net as f64;
            from_local(x, [seed_radius * a.cos(), seed_radius * a.sin()])
        })
        .collect();
    for p in &net {
        add(*p, &mut bins);
    }
    let mut fwd = net.clone();
    let mut bwd = net;
    let mut prev: Option<Curve> = None;
    let mut last_change = f64::INFINITY;
    let mut next_check = 8;
    for n in 1..=budget.max_iterates {
        for p in fwd.iter_mut() {
            *p = f.forward_unchecked(p);
        }
        for p in bwd.iter_mut() {
            *p = f.inverse_unchecked(p);
        }
        for p in fwd.iter().chain(bwd.iter()) {
            if !add(*p, &mut bins) {
                return Err(Error::NotStationary { iterations: n, last_change });
            }
        }
        if n == next_check {
            next_check *= 2;
            let env = envelope(&bins, 0.0);
            if let Some(old) = &prev {
                let change = hausdorff_distance(
                    &FiniteSet::exact(old.samples.clone())?,
                    &FiniteSet::exact(env.samples.clone())?,
                )?;
                last_change = change;
                if change < env.mesh {
                    let defect = env.invariance_defect(f)?;
                    if defect > 2.0 * env.mesh {
                        return Err(Error::ResidualTooLarge { residual: defect, tolerance: 2.0 * env.mesh });
                    }
                    return Ok(env);
                }
            }
            prev = Some(env);
        }
    }
    Err(Error::NotStationary { iterations: budget.max_iterates, last_change })
}

/// Radial orbit label: weighted mean distance to `center` along the orbit of `p`.
pub fn orbit_label(f: &SurfaceMap, center: &SurfacePoint, p: &SurfacePoint, iterates: usize) -> f64 {
    let mut q = *p;
    let mut vals = Vec::with_capacity(iterates);
    for _ in 0..iterates {
        vals.push(distance_unchecked(&q, center));
        q = f.forward_unchecked(&q);
    }
    weighted_average(&vals)
}

const LABEL_ITERATES: usize = 256;
const DIRECTIONS: usize = 32;

/// An arc meeting each invariant circle at most once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransversalArc {
    /// From `north` to `south`.
    pub samples: Vec<SurfacePoint>,
    /// Orbit label of each sample (strictly decreasing along `samples`).
    pub labels: Vec<f64>,
    /// Link bound of each refinement level.
    pub chain_levels: Vec<f64>,
}

impl TransversalArc {
    /// Point of the arc with the given label, by interpolation between samples.
    pub fn at_label(&self, label: f64) -> SurfacePoint {
        let n = self.samples.len();
        // labels decrease along the samples
        let k = self.labels.partition_point(|&l| l > label).clamp(1, n - 1);
        let (l0, l1) = (self.labels[k - 1], self.labels[k]);
        let lam = if l0 > l1 { ((l0 - label) / (l0 - l1)).clamp(0.0, 1.0) } else { 0.0 };
        interpolate(&self.samples[k - 1], &self.samples[k], lam)
    }

    pub fn is_monotone(&self) -> bool {
        self.labels.windows(2).all(|w| w[0] > w[1])
    }
}

fn interpolate(a: &SurfacePoint, b: &SurfacePoint, lam: f64) -> SurfacePoint {
    let v = local_coords_unchecked(a, b);
    from_local(a, [lam * v[0], lam * v[1]])
}

fn ring(p: &SurfacePoint, radius: f64) -> Vec<SurfacePoint> {
    (0..DIRECTIONS)
        .map(|k| {
            let a = TAU * (k as f64 + 0.5) / DIRECTIONS as f64;
            from_local(p, [radius * a.cos(), radius * a.sin()])
        })
        .collect()
}

/// Transversal arc from `north` to `south` (two fixed points of an elliptic
/// map) built as nested monotone chains.
pub fn transversal_arc(
    f: &SurfaceMap,
    north: &SurfacePoint,
    south: &SurfacePoint,
    levels: usize,
) -> Result<TransversalArc> {
    check_same(f.surface(), north.surface())?;
    check_same(f.surface(), south.surface())?;
    let span = distance_unchecked(north, south);
    if span < 1e-6 {
        return Err(Error::Precondition("north and south coincide".into()));
    }
    let label = |p: &SurfacePoint| orbit_label(f, south, p, LABEL_ITERATES);
    let delta0 = (span / 4.0).min(0.25);

    // level 0: steepest ascent of the label from south to north
    let mut chain: Vec<(SurfacePoint, f64)> = vec![(*south, 0.0)];
    let max_steps = (20.0 * span / delta0) as usize + 100;
    loop {
        let (cur, lc) = *chain.last().unwrap();
        if distance_unchecked(&cur, north) < delta0 {
            chain.push((*north, span));
            break;
        }
        if chain.len() > max_steps {
            return Err(Error::ChainStuck { level: 0, gap: distance_unchecked(&cur, north) });
        }
        let best = ring(&cur, 0.9 * delta0)
            .into_par_iter()
            .map(|q| (label(&q), q))
            .filter(|(l, _)| *l > lc && *l < span)
            .max_by(|a, b| a.0.total_cmp(&b.0));
        match best {
            Some((l, q)) => chain.push((q, l)),
            None => return Err(Error::ChainStuck { level: 0, gap: distance_unchecked(&cur, north) }),
        }
    }

    let mut chain_levels = vec![delta0];
    for level in 1..=levels {
        let delta = delta0 / (1u64 << level) as f64;
        chain_levels.push(delta);
        let mut refined = vec![chain[0]];
        for w in chain.windows(2) {
            let (b, lb) = w[1];
            let mut cur = w[0];
            let limit = (8.0 * distance_unchecked(&cur.0, &b) / delta) as usize + 16;
            let mut steps = 0;
            while distance_unchecked(&cur.0, &b) >= delta {
                steps += 1;
                let lc = cur.1;
                let next = ring(&cur.0, 0.9 * delta)
                    .into_par_iter()
                    .map(|q| (distance_unchecked(&q, &b), q))
                    .filter(|(d, _)| *d < distance_unchecked(&cur.0, &b))
                    .map(|(d, q)| (d, label(&q), q))
                    .filter(|(_, l, _)| *l > lc && *l < lb)
                    .min_by(|x, y| x.0.total_cmp(&y.0));
                match next {
                    Some((_, l, q)) if steps <= limit => {
                        cur = (q, l);
                        refined.push(cur);
                    }
                    _ => {
                        return Err(Error::ChainStuck { level, gap: distance_unchecked(&cur.0, &b) });
                    }
                }
            }
            refined.push((b, lb));
        }
        chain = refined;
    }
    chain.reverse();
    Ok(TransversalArc {
        samples: chain.iter().map(|c| c.0).collect(),
        labels: chain.iter().map(|c| c.1).collect(),
        chain_levels,
    })
}

/// Layout of the model-space grid of a [`ConjugacyMap`], row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelGrid {
    /// Sphere nodes at polar distance `pi (i + 1) / (nr + 1)` from the south
    /// pole and azimuth `j / ntheta` turns.
    Polar { nr: usize, ntheta: usize },
    /// Torus nodes `(i / ns, j / nt)`.
    Flat { ns: usize, nt: usize },
}

impl ModelGrid {
    fn dims(&self) -> (usize, usize) {
        match *self {
            ModelGrid::Polar { nr, ntheta } => (nr, ntheta),
            ModelGrid::Flat { ns, nt } => (ns, nt),
        }
    }

    pub fn node(&self, i: usize, j: usize) -> SurfacePoint {
        match *self {
            ModelGrid::Polar { nr, ntheta } => {
                polar_point((i + 1) as f64 / (nr + 1) as f64, j as f64 / ntheta as f64)
            }
            ModelGrid::Flat { ns, nt } => SurfacePoint::torus(i as f64 / ns as f64, j as f64 / nt as f64),
        }
    }

    pub fn nodes(&self) -> Vec<SurfacePoint> {
        let (a, b) = self.dims();
        (0..a).flat_map(|i| (0..b).map(move |j| (i, j))).map(|(i, j)| self.node(i, j)).collect()
    }

    /// Node spacing in the model metric (the coarser direction away from poles).
    pub fn mesh(&self) -> f64 {
        match *self {
            ModelGrid::Polar { nr, ntheta } => (PI / (nr + 1) as f64).max(TAU / ntheta as f64 / 2.0),
            ModelGrid::Flat { ns, nt } => (1.0 / ns as f64).max(1.0 / nt as f64),
        }
    }
}

/// `r` in `[0, 1]` from south to north pole, `theta` in turns.
fn polar_point(r: f64, theta: f64) -> SurfacePoint {
    let (sr, cr) = (PI * r).sin_cos();
    let (st, ct) = (TAU * theta).sin_cos();
    SurfacePoint::sphere(sr * ct, sr * st, -cr)
}

fn polar_coords(p: &SurfacePoint) -> [f64; 2] {
    let v = p.vec3().unwrap();
    [(-v[2]).clamp(-1.0, 1.0).acos() / PI, (v[1].atan2(v[0]) / TAU).rem_euclid(1.0)]
}

/// A conjugacy sampled on a model grid: `values[k] = h(nodes[k])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugacyMap {
    /// Name of the model class.
    pub class: String,
    /// The model map, as a map document.
    pub model: Value,
    pub grid: ModelGrid,
    pub nodes: Vec<SurfacePoint>,
    pub values: Vec<SurfacePoint>,
    /// Sup over nodes of `d(h(model(u)), f(h(u)))`, with `h` evaluated by its
    /// construction formula.
    pub residual: f64,
    pub mesh: f64,
    pub injective: bool,
    /// Components of an orbit closure when the rotation vector is rational
    /// in one coordinate.
    pub annuli: Option<usize>,
}

impl ConjugacyMap {
    fn new(class: &str, model: &SurfaceMap, grid: ModelGrid, values: Vec<SurfacePoint>, residual: f64) -> Self {
        let nodes = grid.nodes();
        let mesh = grid.mesh();
        let injective = injective_on_grid(&nodes, &values, mesh);
        ConjugacyMap {
            class: class.to_string(),
            model: map_to_json(model),
            grid,
            nodes,
            values,
            residual,
            mesh,
            injective,
            annuli: None,
        }
    }

    /// `h(u)` for a model point by bilinear interpolation of the grid values.
    pub fn eval(&self, u: &SurfacePoint) -> SurfacePoint {
        let (a, b) = self.grid.dims();
        let (fi, fj, periodic_i) = match self.grid {
            ModelGrid::Polar { nr, ntheta } => {
                let [r, th] = polar_coords(u);
                ((r * (nr + 1) as f64 - 1.0).clamp(0.0, (nr - 1) as f64), th * ntheta as f64, false)
            }
            ModelGrid::Flat { ns, nt } => {
                let c = u.coords2().unwrap();
                (frac(c[0]) * ns as f64, frac(c[1]) * nt as f64, true)
            }
        };
        let i0 = (fi.floor() as usize).min(a - 1);
        let j0 = fj.floor() as usize % b;
        let (di, dj) = (fi - i0 as f64, fj - fj.floor());
        let i1 = if periodic_i { (i0 + 1) % a } else { (i0 + 1).min(a - 1) };
        let j1 = (j0 + 1) % b;
        let base = self.values[i0 * b + j0];
        let corner = |i: usize, j: usize| local_coords_unchecked(&base, &self.values[i * b + j]);
        let (c01, c10, c11) = (corner(i0, j1), corner(i1, j0), corner(i1, j1));
        let v = [
            (1.0 - di) * dj * c01[0] + di * (1.0 - dj) * c10[0] + di * dj * c11[0],
            (1.0 - di) * dj * c01[1] + di * (1.0 - dj) * c10[1] + di * dj * c11[1],
        ];
        from_local(&base, v)
    }

    /// Model node whose image is nearest to `p` (accurate to the grid mesh).
    pub fn inverse_nearest(&self, p: &SurfacePoint) -> SurfacePoint {
        let k = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| (distance_unchecked(v, p), k))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, k)| k)
            .unwrap_or(0);
        self.nodes[k]
    }
}

/// No two grid nodes map within `min(d_model, mesh) / 4` of each other.
pub fn injective_on_grid(nodes: &[SurfacePoint], values: &[SurfacePoint], mesh: f64) -> bool {
    (0..nodes.len()).into_par_iter().all(|i| {
        (i + 1..nodes.len()).all(|j| {
            let dm = distance_unchecked(&nodes[i], &nodes[j]).min(mesh);
            distance_unchecked(&values[i], &values[j]) > dm / 4.0
        })
    })
}

/// Sup over nodes of `d(h(model(u)), f(h(u)))`, evaluating `h` off the grid
/// by interpolation.
pub fn conjugacy_residual(h: &ConjugacyMap, f: &SurfaceMap, model: &SurfaceMap) -> Result<f64> {
    let first = h.nodes.first().ok_or(Error::EmptyInput("conjugacy grid"))?;
    check_same(model.surface(), first.surface())?;
    check_same(f.surface(), h.values[0].surface())?;
    Ok(h
        .nodes
        .par_iter()
        .zip(h.values.par_iter())
        .map(|(u, hu)| distance_unchecked(&h.eval(&model.forward_unchecked(u)), &f.forward_unchecked(hu)))
        .reduce(|| 0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugacyBudget {
    pub classify: Budget,
    /// Nodes per grid direction.
    pub grid: usize,
    /// Largest closest-return exponent.
    pub n_return: usize,
    pub tolerance: f64,
    pub arc_levels: usize,
}

impl Default for ConjugacyBudget {
    fn default() -> Self {
        ConjugacyBudget {
            classify: Budget { horizon: 300, ..Budget::default() },
            grid: 64,
            n_return: 100_000,
            tolerance: 0.05,
            arc_levels: 5,
        }
    }
}

/// Exponents `n < limit` with `n * rho` closest to each target, mod 1.
struct ReturnTable {
    sorted: Vec<(f64, usize)>,
}

impl ReturnTable {
    fn new(rho: f64, limit: usize) -> Self {
        let mut sorted: Vec<(f64, usize)> = (0..limit).map(|n| (frac(n as f64 * rho), n)).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        ReturnTable { sorted }
    }

    fn closest(&self, target: f64) -> usize {
        let t = frac(target);
        let k = self.sorted.partition_point(|e| e.0 < t);
        let n = self.sorted.len();
        let cands = [k % n, (k + n - 1) % n];
        *cands
            .iter()
            .map(|&i| (wrap_half(self.sorted[i].0 - t).abs(), self.sorted[i].1))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, n)| n)
            .as_ref()
            .unwrap()
    }
}

fn check_residual(h: ConjugacyMap, tolerance: f64) -> Result<ConjugacyMap> {
    if h.residual > tolerance {
        Err(Error::ResidualTooLarge { residual: h.residual, tolerance })
    } else {
        Ok(h)
    }
}

/// Polar conjugacy `h(r, theta) = f^{n(theta)}(x(r))` from the rotation by
/// the rotation number to an elliptic map, with `x` the transversal arc.
pub fn elliptic_conjugacy(f: &SurfaceMap, budget: &ConjugacyBudget) -> Result<ConjugacyMap> {
    check_same(Surface::Sphere, f.surface())?;
    let cls = classify(f, &budget.classify)?;
    match cls.class {
        MapClass::Elliptic { .. } => {}
        MapClass::Identity | MapClass::Periodic { .. } => {
            return Err(Error::Precondition("rational rotation number: orbits are not dense on circles".into()))
        }
        other => return Err(Error::Precondition(format!("map classified {}, not elliptic", other.name()))),
    }
    let fixed = &cls.evidence.fixed_points;
    if fixed.len() != 2 {
        return Err(Error::Precondition(format!("expected two fixed points, found {}", fixed.len())));
    }
    let s_pole = SurfacePoint::south();
    let (south, north) = if distance_unchecked(&fixed[0], &s_pole) <= distance_unchecked(&fixed[1], &s_pole) {
        (fixed[0], fixed[1])
    } else {
        (fixed[1], fixed[0])
    };

    // rotation number in the chart sending south to 0 and north to infinity
    let chart = axis_chart(&south, &north);
    let arg = |p: &SurfacePoint| {
        let w = chart(p);
        w.im.atan2(w.re) / TAU
    };
    let mut p = between(&south, &north);
    let mut incs = Vec::with_capacity(8192);
    for _ in 0..8192 {
        let q = f.forward_unchecked(&p);
        incs.push(wrap_half(arg(&q) - arg(&p)));
        p = q;
    }
    let a = frac(weighted_average(&incs));

    let arc = transversal_arc(f, &north, &south, budget.arc_levels)?;
    let span = distance_unchecked(&north, &south);
    let grid = ModelGrid::Polar { nr: budget.grid, ntheta: budget.grid };
    let (nr, nt) = (budget.grid, budget.grid);
    let table = ReturnTable::new(a, budget.n_return);
    let n_at: Vec<usize> = (0..nt).map(|j| table.closest(j as f64 / nt as f64)).collect();
    let n_shift: Vec<usize> = (0..nt).map(|j| table.closest(j as f64 / nt as f64 + a)).collect();
    let top = n_at.iter().chain(&n_shift).copied().max().unwrap_or(0) + 1;

    let rows: Vec<(Vec<SurfacePoint>, f64)> = (0..nr)
        .into_par_iter()
        .map(|i| {
            let x = arc.at_label(span * (i + 1) as f64 / (nr + 1) as f64);
            let mut orbit = Vec::with_capacity(top + 1);
            let mut q = x;
            for _ in 0..=top {
                orbit.push(q);
                q = f.forward_unchecked(&q);
            }
            let vals: Vec<SurfacePoint> = n_at.iter().map(|&n| orbit[n]).collect();
            let res = (0..nt)
                .map(|j| distance_unchecked(&orbit[n_shift[j]], &orbit[n_at[j] + 1]))
                .fold(0.0, f64::max);
            (vals, res)
        })
        .collect();
    let residual = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let values = rows.into_iter().flat_map(|r| r.0).collect();
    let h = ConjugacyMap::new("elliptic", &SurfaceMap::rotation(a), grid, values, residual);
    check_residual(h, budget.tolerance)
}

/// Integer relation `k0 rho0 + k1 rho1 = 0 mod 1` with small coefficients.
fn rational_coordinate(x: f64, max_q: i64) -> Option<(i64, i64)> {
    (1..=max_q).find_map(|q| {
        let p = (q as f64 * x).round();
        ((q as f64 * x - p).abs() < 1e-7).then_some((p as i64, q))
    })
}

/// Conjugacy from the translation by the rotation vector to a torus map with
/// identity homology.
pub fn torus_translation_conjugacy(f: &SurfaceMap, budget: &ConjugacyBudget) -> Result<ConjugacyMap> {
    check_same(Surface::Torus, f.surface())?;
    let cls = classify(f, &budget.classify)?;
    if !matches!(cls.class, MapClass::TorusTranslation { .. }) {
        return Err(Error::Precondition(format!("map classified {}, not a torus translation", cls.class.name())));
    }
    let theta = weighted_translation_vector(f, [0.0, 0.0], 20_000)?;
    let rs = rational_coordinate(theta[0], 64);
    let rt = rational_coordinate(theta[1], 64);
    match (rs, rt) {
        (Some(_), Some(_)) => Err(Error::Precondition("rotation vector is rational".into())),
        (Some((p, q)), None) => mixed_conjugacy(f, theta, p, q, budget),
        (None, Some(_)) => {
            let swap = SurfaceMap::torus_linear([[0, 1], [1, 0]], [0.0, 0.0])?;
            let g = SurfaceMap::conjugate(f, &swap)?;
            let h = torus_translation_conjugacy(&g, budget)?;
            let n = budget.grid;
            let sw = |p: &SurfacePoint| {
                let c = p.coords2().unwrap();
                SurfacePoint::torus(c[1], c[0])
            };
            let mut values = vec![h.values[0]; n * n];
            for i in 0..n {
                for j in 0..n {
                    values[i * n + j] = sw(&h.values[j * n + i]);
                }
            }
            let model = SurfaceMap::torus_translation(frac(theta[0]), frac(theta[1]))?;
            let mut out = ConjugacyMap::new("torus_translation", &model, h.grid, values, h.residual);
            out.annuli = h.annuli;
            Ok(out)
        }
        (None, None) => {
            for k0 in 1..=16i64 {
                for k1 in -16..=16i64 {
                    if k1 != 0 {
                        let v = k0 as f64 * theta[0] + k1 as f64 * theta[1];
                        if (v - v.round()).abs() < 1e-7 {
                            return Err(Error::Precondition(
                                "rotation vector lies on a rational line oblique to the axes".into(),
                            ));
                        }
                    }
                }
            }
            dense_conjugacy(f, theta, budget)
        }
    }
}

fn dense_conjugacy(f: &SurfaceMap, theta: [f64; 2], budget: &ConjugacyBudget) -> Result<ConjugacyMap> {
    let rho = [frac(theta[0]), frac(theta[1])];
    let nmax = budget.n_return;
    let x0 = SurfacePoint::torus(0.0, 0.0);
    let mut orbit = Vec::with_capacity(nmax + 1);
    let mut q = x0;
    for _ in 0..=nmax {
        orbit.push(q);
        q = f.forward_unchecked(&q);
    }
    // buckets of n * rho mod 1
    let nb = 256usize;
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); nb * nb];
    let model_pt = |n: usize| [frac(n as f64 * rho[0]), frac(n as f64 * rho[1])];
    for n in 0..nmax {
        let m = model_pt(n);
        let (bi, bj) = ((m[0] * nb as f64) as usize % nb, (m[1] * nb as f64) as usize % nb);
        buckets[bi * nb + bj].push(n);
    }
    let closest = |u: [f64; 2]| -> usize {
        let (ci, cj) = ((frac(u[0]) * nb as f64) as i64, (frac(u[1]) * nb as f64) as i64);
        let mut best = (f64::INFINITY, 0usize);
        for radius in 0..nb as i64 {
            for di in -radius..=radius {
                for dj in -radius..=radius {
                    if di.abs().max(dj.abs()) != radius {
                        continue;
                    }
                    let bi = (ci + di).rem_euclid(nb as i64) as usize;
                    let bj = (cj + dj).rem_euclid(nb as i64) as usize;
                    for &n in &buckets[bi * nb + bj] {
                        let m = model_pt(n);
                        let d = wrap_half(m[0] - u[0]).hypot(wrap_half(m[1] - u[1]));
                        if d < best.0 || (d == best.0 && n < best.1) {
                            best = (d, n);
                        }
                    }
                }
            }
            if best.0 < (radius as f64) / nb as f64 {
                break;
            }
        }
        best.1
    };
    let n = budget.grid;
    let grid = ModelGrid::Flat { ns: n, nt: n };
    let cells: Vec<(SurfacePoint, f64)> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let u = [(k / n) as f64 / n as f64, (k % n) as f64 / n as f64];
            let a = closest(u);
            let b = closest([u[0] + rho[0], u[1] + rho[1]]);
            (orbit[a], distance_unchecked(&orbit[b], &orbit[a + 1]))
        })
        .collect();
    let residual = cells.iter().map(|c| c.1).fold(0.0, f64::max);
    let values = cells.into_iter().map(|c| c.0).collect();
    let model = SurfaceMap::torus_translation(rho[0], rho[1])?;
    let h = ConjugacyMap::new("torus_translation", &model, grid, values, residual);
    check_residual(h, budget.tolerance)
}

/// Rotation vector `(p/q, beta)`: the orbit closures are `q` circles,
/// permuted cyclically. A transversal `sigma` across one fundamental strip
/// is twisted so that its end matches the image of its start.
fn mixed_conjugacy(f: &SurfaceMap, theta: [f64; 2], p: i64, q: i64, budget: &ConjugacyBudget) -> Result<ConjugacyMap> {
    let qu = q as usize;
    let beta = theta[1];
    let gamma = frac(q as f64 * beta);
    // F = f^q with lift s-advance p removed
    let big_f = |x: [f64; 2]| -> [f64; 2] {
        let mut y = x;
        for _ in 0..qu {
            y = f.lift_forward(y).unwrap();
        }
        [y[0] - p as f64, y[1]]
    };
    let label = |x: [f64; 2]| {
        let mut y = x;
        let mut vals = Vec::with_capacity(512);
        for _ in 0..512 {
            vals.push(y[0]);
            y = big_f(y);
        }
        weighted_average(&vals)
    };

    // orbit closure components
    let x0 = [0.0, 0.0];
    let pts: Vec<SurfacePoint> = {
        let mut y = SurfacePoint::torus(x0[0], x0[1]);
        (0..4000)
            .map(|_| {
                let c = y;
                y = f.forward_unchecked(&y);
                c
            })
            .collect()
    };
    let annuli = epsilon_components(&pts, 0.25 / q as f64).len();

    // k1 p = 1 mod q
    let k1 = (0..q).find(|k| (k * p - 1).rem_euclid(q) == 0).unwrap_or(0);
    let mut y = x0;
    for _ in 0..k1 {
        y = f.lift_forward(y)?;
    }
    let shift = ((k1 * p - 1) as f64 / q as f64).round();
    let l0 = label(x0);
    let l1 = label([y[0] - shift, y[1]]);
    // monotone chain along the line t = 0
    let mu = 1.0 / (q as f64 * 256.0);
    let mut us = vec![0.0];
    let mut ls = vec![l0];
    while *ls.last().unwrap() < l1 {
        let u = us.last().unwrap() + mu;
        let l = label([u, 0.0]);
        if !(l > *ls.last().unwrap()) || u > 2.0 / q as f64 {
            return Err(Error::ChainStuck { level: 0, gap: l1 - ls.last().unwrap() });
        }
        us.push(u);
        ls.push(l);
    }
    let sigma = |v: f64| -> [f64; 2] {
        let target = l0 + v * (l1 - l0);
        let k = ls.partition_point(|&l| l < target).clamp(1, ls.len() - 1);
        let lam = ((target - ls[k - 1]) / (ls[k] - ls[k - 1])).clamp(0.0, 1.0);
        [us[k - 1] + lam * (us[k] - us[k - 1]), 0.0]
    };
    let m_ret = (budget.n_return / qu).max(64);
    let table = ReturnTable::new(gamma, m_ret);
    let tor = |x: [f64; 2]| SurfacePoint::torus(x[0], x[1]);

    // twist: time of sigma(1) relative to f^k1(sigma(0)) along its circle
    let base = {
        let mut z = sigma(0.0);
        for _ in 0..k1 {
            z = f.lift_forward(z)?;
        }
        tor(z)
    };
    let end = tor(sigma(1.0));
    let mut z = base;
    let mut best = (f64::INFINITY, 0usize);
    for m in 0..m_ret {
        let d = distance_unchecked(&z, &end);
        if d < best.0 {
            best = (d, m);
        }
        for _ in 0..qu {
            z = f.forward_unchecked(&z);
        }
    }
    let tau1 = best.1 as f64 * gamma;
    let w = wrap_half(tau1 + k1 as f64 * beta);

    let n = budget.grid;
    // strip index j, offset v, and the exponent k with k p = j mod q
    let split = |s: f64| -> (f64, usize) {
        let sq = frac(s) * q as f64;
        let j = (sq.floor() as i64).clamp(0, q - 1);
        let k = (0..q).find(|k| (k * p - j).rem_euclid(q) == 0).unwrap_or(0);
        (sq - j as f64, k as usize)
    };
    let eval_h = |orbit: &[SurfacePoint], v: f64, k: usize, t: f64| -> SurfacePoint {
        let m = table.closest(t - k as f64 * beta - w * v);
        let mut z = orbit[m];
        for _ in 0..k {
            z = f.forward_unchecked(&z);
        }
        z
    };
    let rows: Vec<(Vec<SurfacePoint>, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let s = i as f64 / n as f64;
            let (v, k) = split(s);
            let (v2, k2) = split(s + p as f64 / q as f64);
            let mut orbit = Vec::with_capacity(m_ret);
            let mut z = tor(sigma(v));
            for _ in 0..m_ret {
                orbit.push(z);
                for _ in 0..qu {
                    z = f.forward_unchecked(&z);
                }
            }
            let orbit2 = if (v2 - v).abs() < 1e-12 {
                None
            } else {
                let mut o = Vec::with_capacity(m_ret);
                let mut z = tor(sigma(v2));
                for _ in 0..m_ret {
                    o.push(z);
                    for _ in 0..qu {
                        z = f.forward_unchecked(&z);
                    }
                }
                Some(o)
            };
            let mut vals = Vec::with_capacity(n);
            let mut res: f64 = 0.0;
            for j in 0..n {
                let t = j as f64 / n as f64;
                let hu = eval_h(&orbit, v, k, t);
                let shifted = eval_h(orbit2.as_deref().unwrap_or(&orbit), v2, k2, t + beta);
                res = res.max(distance_unchecked(&shifted, &f.forward_unchecked(&hu)));
                vals.push(hu);
            }
            (vals, res)
        })
        .collect();
    let residual = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let values = rows.into_iter().flat_map(|r| r.0).collect();
    let model = SurfaceMap::torus_translation(frac(theta[0]), frac(beta))?;
    let mut h = ConjugacyMap::new("torus_translation", &model, ModelGrid::Flat { ns: n, nt: n }, values, residual);
    h.annuli = Some(annuli);
    check_residual(h, budget.tolerance)
}

/// Samples of the fiber cocycle and the normalizing shift `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub conjugacy: ConjugacyMap,
    /// `s` samples in `[-1/2, 1/2]`.
    pub s: Vec<f64>,
    /// Fiber increment `alpha(s)`, unwrapped continuously from `s = 0`.
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Sup of `|alpha(s) + beta(s) - beta(-s) - C(s)|` mod 1.
    pub identity_defect: f64,
    /// 1 or 2.
    pub case: u8,
    /// Constant of the normal form.
    pub constant: f64,
}

const BETA_SAMPLES: usize = 1024;

/// Fiber increment of a map of the form `(s, t) -> (sigma(s), t + a(s))`,
/// tabulated on `[-1/2, 1/2]` and unwrapped from `s = 0`.
fn tabulate_increment(
    lift: &dyn Fn([f64; 2]) -> Result<[f64; 2]>,
    base_map: impl Fn(f64) -> f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = BETA_SAMPLES;
    let s: Vec<f64> = (0..=n).map(|k| -0.5 + k as f64 / n as f64).collect();
    let mut raw = Vec::with_capacity(n + 1);
    for &sk in &s {
        let mut inc = [0.0; 2];
        for (i, t0) in [0.0, 0.37].into_iter().enumerate() {
            let y = lift([sk, t0])?;
            if wrap_half(y[0] - base_map(sk)).abs() > 1e-9 {
                return Err(Error::Precondition(format!("fiber map does not have the expected base at s = {sk}")));
            }
            inc[i] = y[1] - t0;
        }
        if wrap_half(inc[0] - inc[1]).abs() > 1e-9 {
            return Err(Error::Precondition(format!("fiber map is not a rotation at s = {sk}")));
        }
        raw.push(inc[0]);
    }
    let mid = n / 2;
    let mut a = raw.clone();
    a[mid] = raw[mid];
    for k in mid + 1..=n {
        a[k] = a[k - 1] + wrap_half(raw[k] - a[k - 1]);
    }
    for k in (0..mid).rev() {
        a[k] = a[k + 1] + wrap_half(raw[k] - a[k + 1]);
    }
    Ok((s, a))
}

fn beta_at(beta: &[f64], s: f64) -> f64 {
    let n = BETA_SAMPLES;
    let x = (frac(s + 0.5)) * n as f64;
    let k = (x.floor() as usize).min(n - 1);
    let lam = x - k as f64;
    (1.0 - lam) * beta[k] + lam * beta[k + 1]
}

fn fiber_grid_conjugacy(
    class: &str,
    model: &SurfaceMap,
    beta: &[f64],
    f_lift: &dyn Fn([f64; 2]) -> Result<[f64; 2]>,
    n: usize,
) -> Result<ConjugacyMap> {
    let b = |u: [f64; 2]| SurfacePoint::torus(u[0], u[1] + beta_at(beta, u[0]));
    let grid = ModelGrid::Flat { ns: n, nt: n };
    let mut values = Vec::with_capacity(n * n);
    let mut residual: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let u = [i as f64 / n as f64, j as f64 / n as f64];
            let hu = b(u);
            let mu = model.lift_forward(u)?;
            let c = hu.coords2().unwrap();
            let fy = f_lift(c)?;
            residual = residual.max(distance_unchecked(&b(mu), &SurfacePoint::torus(fy[0], fy[1])));
            values.push(hu);
        }
    }
    Ok(ConjugacyMap::new(class, model, grid, values, residual))
}

/// Normal form of an orientation-reversing torus map already written as
/// `(s, t) -> (-s, t + alpha(s))`: the shift `B(s,t) = (s, t + beta(s))`
/// conjugates it to `(-s, t + alpha)` (type 1) or `(-s, t + s + alpha)` (type 2).
pub fn reversing_normalization(f: &SurfaceMap, kind: u8) -> Result<Normalization> {
    check_same(Surface::Torus, f.surface())?;
    if !(kind == 1 || kind == 2) {
        return Err(Error::InvalidParameter(format!("normalization type must be 1 or 2, got {kind}")));
    }
    let lift = |x: [f64; 2]| f.lift_forward(x);
    let (s, alpha) = tabulate_increment(&lift, |s| -s)?;
    let n = BETA_SAMPLES;
    let (mid, a0) = (n / 2, alpha[n / 2]);
    let gap = wrap_half(a0 - alpha[n]);
    let case = if gap.abs() < 1e-6 {
        1
    } else if (gap.abs() - 0.5).abs() < 1e-6 {
        2
    } else {
        return Err(Error::ContinuityGapAtHalf { gap });
    };
    if case != kind {
        return Err(Error::ContinuityGapAtHalf { gap });
    }
    let beta: Vec<f64> = (0..=n)
        .map(|k| {
            if k >= mid {
                0.0
            } else if case == 1 {
                a0 - alpha[k]
            } else {
                s[k] + a0 - alpha[k]
            }
        })
        .collect();
    let defect = (0..n)
        .map(|k| {
            let c = if case == 1 { a0 } else { s[k] + a0 };
            wrap_half(alpha[k] + beta[k] - beta[n - k] - c).abs()
        })
        .fold(0.0, f64::max);
    let model = if case == 1 {
        SurfaceMap::torus_reversing_type1(frac(a0))?
    } else {
        SurfaceMap::torus_reversing_type2(frac(a0))?
    };
    let class = if case == 1 { "torus_reversing_type1" } else { "torus_reversing_type2" };
    let conjugacy = fiber_grid_conjugacy(class, &model, &beta, &lift, 64)?;
    Ok(Normalization { conjugacy, s, alpha, beta, identity_defect: defect, case, constant: frac(a0) })
}

/// Normal form of a Klein bottle map given by its orientation-preserving
/// torus lift `f_plus`, in coordinates where the covering involution reads
/// `(s, t) -> (-s, t + a(s))` (the standard `a = 1/2` when `involution` is
/// `None`). The shift `B(s,t) = (s, t + beta(s))` straightens the involution;
/// the result is conjugate to `Phi` (case 1) or `Psi` (case 2).
pub fn klein_normalization(f_plus: &SurfaceMap, involution: Option<&SurfaceMap>) -> Result<Normalization> {
    if !matches!(f_plus.surface(), Surface::Torus | Surface::Klein) {
        return Err(Error::SurfaceMismatch { expected: Surface::Klein, found: f_plus.surface() });
    }
    let standard = SurfaceMap::torus_reversing_type1(0.5)?;
    let theta = involution.unwrap_or(&standard);
    check_same(Surface::Torus, theta.surface())?;
    let theta_lift = |x: [f64; 2]| theta.lift_forward(x);
    let (s, a) = tabulate_increment(&theta_lift, |s| -s)?;
    let n = BETA_SAMPLES;
    let mid = n / 2;
    for k in [mid, n] {
        let gap = wrap_half(a[k] - 0.5);
        if gap.abs() > 1e-6 {
            return Err(Error::ContinuityGapAtHalf { gap });
        }
    }
    let beta: Vec<f64> = (0..=n).map(|k| if k >= mid { 0.0 } else { a[mid] - a[k] }).collect();
    let defect = (0..n)
        .map(|k| wrap_half(a[k] + beta[k] - beta[n - k] - 0.5).abs())
        .fold(0.0, f64::max);

    // B conjugates theta to the standard involution
    let b = |u: [f64; 2]| [u[0], u[1] + beta_at(&beta, u[0])];
    let mut commutation: f64 = 0.0;
    let mut shifts = Vec::new();
    let mut incs = Vec::new();
    let m = 64;
    for i in 0..m {
        for j in 0..m {
            let u = [i as f64 / m as f64, j as f64 / m as f64];
            let lhs = b(standard.lift_forward(u)?);
            let rhs = theta.lift_forward(b(u))?;
            commutation = commutation.max(distance_unchecked(
                &SurfacePoint::torus(lhs[0], lhs[1]),
                &SurfacePoint::torus(rhs[0], rhs[1]),
            ));
            let y = f_plus.lift_forward(b(u))?;
            shifts.push(wrap_half(y[0] - u[0]));
            incs.push(y[1] - beta_at(&beta, y[0]) - u[1]);
        }
    }
    if commutation > 1e-6 {
        return Err(Error::ThetaCommutationFailure { residual: commutation });
    }
    let shift0 = shifts[0];
    let case = if shifts.iter().all(|d| d.abs() < 1e-6) {
        1
    } else if shifts.iter().all(|d| (d.abs() - 0.5).abs() < 1e-6) {
        2
    } else {
        return Err(Error::Precondition(format!("lift moves the base circle by {shift0:.4}, not 0 or 1/2")));
    };
    let c0 = incs[0];
    let c = frac(c0 + incs.iter().map(|v| wrap_half(v - c0)).sum::<f64>() / incs.len() as f64);
    let model = if case == 1 {
        SurfaceMap::torus_translation(0.0, c)?
    } else {
        SurfaceMap::torus_translation(0.5, c)?
    };
    let class = if case == 1 { "klein_phi" } else { "klein_psi" };
    let f_lift = |x: [f64; 2]| f_plus.lift_forward(x);
    let conjugacy = fiber_grid_conjugacy(class, &model, &beta, &f_lift, 64)?;
    Ok(Normalization { conjugacy, s, alpha: a, beta, identity_defect: defect, case, constant: c })
}
