//! Job configuration, execution and report emission for the `kere` binary.

pub mod builtins;
pub mod decimal;
pub mod render;

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::ValueEnum;
use kere_core::classifier::{classify, Budget, ClassificationResult, MapClass};
use kere_core::conjugacy_builder::{
    elliptic_conjugacy, klein_normalization, reversing_normalization, torus_translation_conjugacy, ConjugacyBudget,
    ConjugacyMap, ModelGrid,
};
use kere_core::metric_space::{Surface, SurfacePoint};
use kere_core::orbit_analysis::{limit_sets, orbit, singular_set, SweepParams};
use kere_core::rotation_invariants::translation_vector;
use kere_core::surface_maps::{homology_matrix_of, map_from_json, map_to_json};
use kere_core::{Error, SurfaceMap};
use serde::Serialize;
use serde_json::{json, Value};

use crate::decimal::stringify_floats;
use crate::render::{project, Plot, ALERT, FAINT, INK};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// A bad flag, budget or map document. The binary exits with status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Analyze,
    Classify,
    Conjugate,
    Render,
    Gallery,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Png,
    Svg,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Png => "png",
            Format::Svg => "svg",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub command: Command,
    /// Inline JSON, a file path or a builtin name.
    pub map_source: Option<String>,
    pub horizon: usize,
    pub grid: usize,
    pub eps: f64,
    pub threshold: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub formats: Vec<Format>,
}

impl JobConfig {
    pub fn new(command: Command) -> Self {
        JobConfig {
            command,
            map_source: None,
            horizon: kere_core::orbit_analysis::DEFAULT_HORIZON,
            grid: 64,
            eps: 0.1,
            threshold: kere_core::orbit_analysis::DEFAULT_THRESHOLD,
            seed: 0,
            out: None,
            formats: vec![Format::Json],
        }
    }

    pub fn with_map(mut self, source: impl Into<String>) -> Self {
        self.map_source = Some(source.into());
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |m: &str| Err(ConfigError(m.into()));
        if self.horizon == 0 {
            return fail("--horizon must be positive");
        }
        if self.grid < 8 {
            return fail("--grid must be at least 8");
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return fail("--eps must be positive");
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return fail("--threshold must lie in (0, 1]");
        }
        if self.formats.is_empty() {
            return fail("--format needs at least one entry");
        }
        if self.formats.iter().any(|f| *f != Format::Json) && self.out.is_none() {
            return fail("csv, png and svg outputs need --out");
        }
        if self.command != Command::Gallery && self.map_source.is_none() {
            return fail("this command needs --map");
        }
        Ok(())
    }

    fn budget(&self) -> Budget {
        Budget {
            resolution: self.grid,
            eps: self.eps,
            horizon: self.horizon,
            threshold: self.threshold,
            seed: self.seed,
            ..Budget::default()
        }
    }

    fn to_json(&self, map: Option<&SurfaceMap>) -> Value {
        json!({
            "command": self.command,
            "map": map.map(map_to_json),
            "horizon": self.horizon,
            "grid": self.grid,
            "eps": self.eps,
            "threshold": self.threshold,
            "seed": self.seed,
            "formats": self.formats,
        })
    }
}

/// Loads a map from inline JSON, a file, or a builtin name.
pub fn load_map(source: &str) -> anyhow::Result<SurfaceMap> {
    let text = source.trim();
    let doc: Value = if text.starts_with('{') {
        serde_json::from_str(text).map_err(|e| config_error(format!("inline map is not valid JSON: {e}")))?
    } else if Path::new(text).is_file() {
        let body = std::fs::read_to_string(text).map_err(|e| config_error(format!("cannot read {text}: {e}")))?;
        serde_json::from_str(&body).map_err(|e| config_error(format!("{text} is not valid JSON: {e}")))?
    } else if let Some(m) = builtins::builtin(text) {
        return Ok(m);
    } else {
        return Err(config_error(format!("`{text}` is neither JSON, a file, nor a builtin map")));
    };
    map_from_json(&doc).map_err(|e| config_error(e.to_string()))
}

/// Everything a job produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub undetermined: bool,
    /// Rendered artifacts other than the JSON report, keyed by format.
    pub artifacts: Vec<(Format, Vec<u8>)>,
}

impl Outcome {
    /// The report as pretty-printed JSON with a trailing newline.
    pub fn report_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).unwrap();
        s.push('\n');
        s
    }

    /// Writes `<command>.<ext>` files into `dir`, returning their paths.
    pub fn write(&self, dir: &Path, command: Command, formats: &[Format]) -> anyhow::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let stem = serde_json::to_value(command)?.as_str().unwrap().to_string();
        let mut written = Vec::new();
        for f in formats {
            let path = dir.join(format!("{stem}.{}", f.extension()));
            let bytes = if *f == Format::Json {
                self.report_text().into_bytes()
            } else {
                match self.artifacts.iter().find(|(g, _)| g == f) {
                    Some((_, b)) => b.clone(),
                    None => continue,
                }
            };
            std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
        }
        Ok(written)
    }
}

struct Body {
    result: Value,
    notes: Vec<String>,
    undetermined: bool,
    csv: Option<String>,
    plot: Option<Plot>,
}

impl Body {
    fn new(result: Value) -> Self {
        Body { result, notes: Vec::new(), undetermined: false, csv: None, plot: None }
    }

    fn undetermined(reason: String) -> Self {
        Body { result: json!({ "status": "undetermined", "reason": reason }), notes: vec![reason], undetermined: true, csv: None, plot: None }
    }
}

/// Runs one job. Config errors come back as [`ConfigError`].
pub fn run(config: &JobConfig) -> anyhow::Result<Outcome> {
    config.validate()?;
    let map = match &config.map_source {
        Some(src) if config.command != Command::Gallery => Some(load_map(src)?),
        _ => None,
    };
    let body = match (config.command, &map) {
        (Command::Gallery, _) => gallery(config)?,
        (Command::Analyze, Some(f)) => analyze(f, config)?,
        (Command::Classify, Some(f)) => classify_job(f, config)?,
        (Command::Conjugate, Some(f)) => conjugate(f, config)?,
        (Command::Render, Some(f)) => render_orbit(f, config)?,
        _ => unreachable!("validated"),
    };
    let status = if body.undetermined { "undetermined" } else { "ok" };
    let report = stringify_floats(json!({
        "tool_version": TOOL_VERSION,
        "config": config.to_json(map.as_ref()),
        "result": body.result,
        "diagnostics": { "status": status, "notes": body.notes },
    }));
    let mut artifacts = Vec::new();
    for f in &config.formats {
        match f {
            Format::Json => {}
            Format::Csv => {
                if let Some(csv) = &body.csv {
                    artifacts.push((*f, csv.clone().into_bytes()));
                }
            }
            Format::Svg => {
                if let Some(p) = &body.plot {
                    artifacts.push((*f, p.to_svg().into_bytes()));
                }
            }
            Format::Png => {
                if let Some(p) = &body.plot {
                    artifacts.push((*f, p.to_png()));
                }
            }
        }
    }
    Ok(Outcome { report, undetermined: body.undetermined, artifacts })
}

/// Errors that mean the analysis could not decide, as opposed to a bug or a
/// bad input.
fn is_inconclusive(e: &Error) -> bool {
    matches!(
        e,
        Error::Precondition(_)
            | Error::NotStationary { .. }
            | Error::ChainStuck { .. }
            | Error::ResidualTooLarge { .. }
            | Error::ContinuityGapAtHalf { .. }
            | Error::ThetaCommutationFailure { .. }
            | Error::NotFound { .. }
            | Error::BudgetExceeded(_)
            | Error::NonTrivialHomology { .. }
    )
}

fn core_error(e: Error) -> anyhow::Error {
    match e {
        Error::InvalidParameter(m) => config_error(m),
        e => anyhow::Error::new(e),
    }
}

fn coords_csv_cells(p: &SurfacePoint) -> String {
    p.coords().iter().map(|x| decimal::decimal(*x)).collect::<Vec<_>>().join(",")
}

fn coord_header(surface: Surface, prefix: &str) -> String {
    let names: &[&str] = if surface == Surface::Sphere { &["x", "y", "z"] } else { &["s", "t"] };
    names.iter().map(|n| format!("{prefix}{n}")).collect::<Vec<_>>().join(",")
}

fn analyze(f: &SurfaceMap, config: &JobConfig) -> anyhow::Result<Body> {
    let params = SweepParams {
        resolution: config.grid,
        eps: config.eps,
        horizon: config.horizon,
        threshold: config.threshold,
        samples: 8,
        seed: config.seed,
    };
    let est = singular_set(f, params).map_err(core_error)?;
    let budget = config.budget();
    let clusters = est.clusters(budget.cluster_cells);
    let mut sizes: Vec<usize> = clusters.iter().map(Vec::len).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    let base = base_point(f.surface());
    let limits = limit_sets(f, &base, config.horizon / 2, config.horizon, config.eps / 2.0).map_err(core_error)?;
    let mut result = json!({
        "surface": f.surface(),
        "grid_points": est.grid.len(),
        "flagged": est.flagged.iter().filter(|&&b| b).count(),
        "singular_fraction": est.flagged_fraction(),
        "cell": est.cell,
        "singular_clusters": clusters.len(),
        "cluster_sizes": sizes,
        "base_point": base,
        "omega_limit_points": limits.omega.len(),
        "alpha_limit_points": limits.alpha.len(),
    });
    let identity_homology = matches!(f.surface(), Surface::Torus | Surface::Klein)
        && homology_matrix_of(f).map(|a| a.is_identity()).unwrap_or(false);
    if identity_homology {
        let c = base.coords2().unwrap();
        let tv = translation_vector(f, c, config.horizon).map_err(core_error)?;
        result["translation_vector"] = json!({ "value": tv.value, "spread": tv.spread });
    }
    let mut csv = format!("{},flagged\n", coord_header(f.surface(), ""));
    for (p, fl) in est.grid.iter().zip(&est.flagged) {
        csv.push_str(&format!("{},{}\n", coords_csv_cells(p), u8::from(*fl)));
    }
    let (flagged, calm): (Vec<_>, Vec<_>) = est.grid.iter().zip(&est.flagged).partition(|(_, fl)| **fl);
    let plot = Plot::new(format!("singular set of {}", f.kind_name()))
        .points(calm.iter().map(|(p, _)| project(p)).collect(), FAINT, 1.5)
        .points(flagged.iter().map(|(p, _)| project(p)).collect(), ALERT, 2.5);
    let mut body = Body::new(result);
    body.csv = Some(csv);
    body.plot = Some(plot);
    Ok(body)
}

fn classify_value(r: &ClassificationResult) -> Value {
    let mut v = serde_json::to_value(r).unwrap();
    v["singular_clusters"] = json!(r.evidence.singular_clusters);
    v["parameter"] = json!(r.class.parameter());
    v
}

fn classify_job(f: &SurfaceMap, config: &JobConfig) -> anyhow::Result<Body> {
    let r = match classify(f, &config.budget()) {
        Ok(r) => r,
        Err(e) if is_inconclusive(&e) => return Ok(Body::undetermined(e.to_string())),
        Err(e) => return Err(core_error(e)),
    };
    let mut body = Body::new(classify_value(&r));
    body.notes = r.evidence.notes.clone();
    if r.class == MapClass::Undetermined {
        body.undetermined = true;
        body.result["status"] = json!("undetermined");
    }
    let mut plot = Plot::new(format!("{} ({})", r.class.name(), f.kind_name()));
    plot = plot.points(r.evidence.singular_points.iter().map(project).collect(), ALERT, 4.0);
    plot = plot.points(r.evidence.fixed_points.iter().map(project).collect(), INK, 3.0);
    body.plot = Some(plot);
    let mut csv = format!("role,{}\n", coord_header(f.surface(), ""));
    for p in &r.evidence.singular_points {
        csv.push_str(&format!("singular,{}\n", coords_csv_cells(p)));
    }
    for p in &r.evidence.fixed_points {
        csv.push_str(&format!("fixed,{}\n", coords_csv_cells(p)));
    }
    body.csv = Some(csv);
    Ok(body)
}

fn grid_plot(h: &ConjugacyMap, title: String) -> Plot {
    let (rows, cols, closed) = match h.grid {
        ModelGrid::Polar { nr, ntheta } => (nr, ntheta, true),
        ModelGrid::Flat { ns, nt } => (ns, nt, true),
    };
    let at = |i: usize, j: usize| project(&h.values[i * cols + j]);
    let mut plot = Plot::new(title);
    let step = (rows / 16).max(1);
    for i in (0..rows).step_by(step) {
        let mut line: Vec<[f64; 2]> = (0..cols).map(|j| at(i, j)).collect();
        if closed {
            line.push(at(i, 0));
        }
        plot = plot.curve(line, INK);
    }
    let step = (cols / 16).max(1);
    for j in (0..cols).step_by(step) {
        plot = plot.curve((0..rows).map(|i| at(i, j)).collect(), ALERT);
    }
    plot
}

fn conjugacy_csv(h: &ConjugacyMap) -> String {
    let s = h.nodes.first().map(|p| p.surface()).unwrap_or(Surface::Sphere);
    let mut csv = format!("{},{}\n", coord_header(s, "node_"), coord_header(s, "value_"));
    for (u, v) in h.nodes.iter().zip(&h.values) {
        csv.push_str(&format!("{},{}\n", coords_csv_cells(u), coords_csv_cells(v)));
    }
    csv
}

fn conjugate(f: &SurfaceMap, config: &JobConfig) -> anyhow::Result<Body> {
    let budget = ConjugacyBudget { classify: config.budget(), grid: config.grid, ..ConjugacyBudget::default() };
    let r = match classify(f, &budget.classify) {
        Ok(r) => r,
        Err(e) if is_inconclusive(&e) => return Ok(Body::undetermined(e.to_string())),
        Err(e) => return Err(core_error(e)),
    };
    let built: kere_core::Result<Value> = match r.class {
        MapClass::Elliptic { .. } => elliptic_conjugacy(f, &budget).map(|h| serde_json::to_value(h).unwrap()),
        MapClass::TorusTranslation { .. } => {
            torus_translation_conjugacy(f, &budget).map(|h| serde_json::to_value(h).unwrap())
        }
        MapClass::TorusReversingType1 { .. } => reversing_normalization(f, 1).map(|n| serde_json::to_value(n).unwrap()),
        MapClass::TorusReversingType2 { .. } => reversing_normalization(f, 2).map(|n| serde_json::to_value(n).unwrap()),
        MapClass::KleinPhi { .. } | MapClass::KleinPsi { .. } => {
            klein_normalization(f, None).map(|n| serde_json::to_value(n).unwrap())
        }
        ref other => Err(Error::Precondition(format!("no conjugacy construction for class {}", other.name()))),
    };
    let value = match built {
        Ok(v) => v,
        Err(e) if is_inconclusive(&e) => {
            let mut body = Body::undetermined(e.to_string());
            body.result["classification"] = classify_value(&r);
            return Ok(body);
        }
        Err(e) => return Err(core_error(e)),
    };
    let h: ConjugacyMap = match value.get("conjugacy") {
        Some(c) => serde_json::from_value(c.clone())?,
        None => serde_json::from_value(value.clone())?,
    };
    let mut body = Body::new(json!({ "classification": classify_value(&r), "conjugacy": value }));
    body.csv = Some(conjugacy_csv(&h));
    body.plot = Some(grid_plot(&h, format!("conjugacy to {}", h.class)));
    Ok(body)
}

/// Default starting point of rendered orbits.
pub fn base_point(surface: Surface) -> SurfacePoint {
    match surface {
        Surface::Sphere => SurfacePoint::from_complex(num_complex::Complex64::new(0.5, 0.25)),
        Surface::Annulus | Surface::Mobius => SurfacePoint::on(surface, [0.3, 0.2]),
        s => SurfacePoint::on(s, [0.1, 0.2]),
    }
}

fn render_orbit(f: &SurfaceMap, config: &JobConfig) -> anyhow::Result<Body> {
    let base = base_point(f.surface());
    let seg = orbit(f, &base, 0, config.horizon as i64).map_err(core_error)?;
    let projected: Vec<[f64; 2]> = seg.points.iter().map(project).collect();
    let plot = Plot::new(format!("orbit of {}", f.kind_name()))
        .curve(projected.clone(), FAINT)
        .points(projected, INK, 1.5);
    let mut csv = format!("n,{}\n", coord_header(f.surface(), ""));
    for (k, p) in seg.points.iter().enumerate() {
        csv.push_str(&format!("{},{}\n", k as i64 + seg.n_min, coords_csv_cells(p)));
    }
    let mut body = Body::new(json!({
        "surface": f.surface(),
        "base_point": base,
        "n_min": seg.n_min,
        "n_max": seg.n_max,
        "points": seg.points,
    }));
    body.csv = Some(csv);
    body.plot = Some(plot);
    Ok(body)
}

/// Classifies every builtin map and tabulates the outcome.
fn gallery(config: &JobConfig) -> anyhow::Result<Body> {
    let budget = config.budget();
    let mut rows = Vec::new();
    let mut csv = String::from("name,surface,expected,class,parameter,agree\n");
    let mut agreeing = 0;
    for b in builtins::builtins() {
        let class = match classify(&b.map, &budget) {
            Ok(r) => r.class,
            Err(e) if is_inconclusive(&e) => MapClass::Undetermined,
            Err(e) => return Err(core_error(e)),
        };
        let param_ok = match (b.parameter, class.parameter()) {
            (Some(want), Some(got)) => (want - got).abs() < 1e-3,
            _ => true,
        };
        let agree = class.name() == b.expected && param_ok;
        agreeing += usize::from(agree);
        let surface = b.map.surface();
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            b.name,
            surface.name(),
            b.expected,
            class.name(),
            class.parameter().map(decimal::decimal).unwrap_or_default(),
            agree
        ));
        rows.push(json!({
            "name": b.name,
            "surface": surface,
            "expected": b.expected,
            "class": class.name(),
            "parameter": class.parameter(),
            "agree": agree,
        }));
    }
    let count = rows.len();
    let mut body = Body::new(json!({ "rows": rows, "count": count, "agreeing": agreeing }));
    body.csv = Some(csv);
    if agreeing < count {
        body.notes.push(format!("{} of {count} builtins disagree with their expected class", count - agreeing));
    }
    Ok(body)
}
