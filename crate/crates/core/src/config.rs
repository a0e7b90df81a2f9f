//! Run configuration: strict JSON with SI units throughout.
//!
//! Every problem in a document is collected before reporting, and unknown
//! keys are rejected with the closest known key as a suggestion. See the
//! README for the full schema.

use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::current_model::{sampled_loop, CurrentSource, Geometry, SampledCurrent, TemporalProfile};
use crate::error::{Error, Result};
use crate::quadrature::{KGridSpec, RadialMap};
use crate::vector::Vec3;

/// Thresholds used by the validation suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub transversality: f64,
    pub hermiticity: f64,
    pub projector: f64,
    pub linearity: f64,
    pub virial: f64,
    pub phase_slope: f64,
    pub reality: f64,
    pub divergence: f64,
    pub faraday: f64,
    pub oracle_b: f64,
    pub static_e: f64,
    pub causality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            transversality: 1e-12,
            hermiticity: 1e-12,
            projector: 1e-14,
            linearity: 1e-12,
            virial: 1e-12,
            phase_slope: 1e-10,
            reality: 1e-10,
            divergence: 1e-3,
            faraday: 1e-2,
            oracle_b: 1e-2,
            static_e: 1e-8,
            causality: 1e-8,
        }
    }
}

const TOLERANCE_KEYS: [&str; 12] = [
    "transversality",
    "hermiticity",
    "projector",
    "linearity",
    "virial",
    "phase_slope",
    "reality",
    "divergence",
    "faraday",
    "oracle_b",
    "static_e",
    "causality",
];

impl Tolerances {
    fn slot(&mut self, key: &str) -> &mut f64 {
        match key {
            "transversality" => &mut self.transversality,
            "hermiticity" => &mut self.hermiticity,
            "projector" => &mut self.projector,
            "linearity" => &mut self.linearity,
            "virial" => &mut self.virial,
            "phase_slope" => &mut self.phase_slope,
            "reality" => &mut self.reality,
            "divergence" => &mut self.divergence,
            "faraday" => &mut self.faraday,
            "oracle_b" => &mut self.oracle_b,
            "static_e" => &mut self.static_e,
            "causality" => &mut self.causality,
            _ => unreachable!("unknown tolerance {key}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldConfig {
    pub grid: KGridSpec,
    pub points: Vec<Vec3>,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseConfig {
    pub t: Option<f64>,
    pub t_start: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: CurrentSource,
    pub grid: KGridSpec,
    /// Time (s) at which amplitudes and summaries are evaluated.
    pub time: f64,
    /// Convergence parameter (1/s).
    pub eps: f64,
    pub phase: PhaseConfig,
    pub field: Option<FieldConfig>,
    pub tolerances: Tolerances,
    /// The parsed document, echoed into manifests.
    pub document: Value,
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

/// Validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let document: Value = serde_json::from_str(text)
        .map_err(|e| Error::Config(vec![format!("invalid JSON: {e}")]))?;
    let mut errors = Vec::new();
    let config = read_document(&document, &mut errors);
    match config {
        Some(c) if errors.is_empty() => Ok(c),
        _ => Err(Error::Config(errors)),
    }
}

fn suggestion(key: &str, allowed: &[&str]) -> String {
    allowed
        .iter()
        .map(|a| (strsim::levenshtein(key, a), *a))
        .min()
        .filter(|(d, _)| *d <= 3)
        .map(|(_, a)| format!(" (did you mean \"{a}\"?)"))
        .unwrap_or_default()
}

/// A JSON object being read; tracks which keys were consumed.
struct Obj<'a> {
    path: String,
    map: &'a Map<String, Value>,
}

impl<'a> Obj<'a> {
    fn new(value: &'a Value, path: &str, errors: &mut Vec<String>) -> Option<Self> {
        match value.as_object() {
            Some(map) => Some(Self { path: path.to_string(), map }),
            None => {
                errors.push(format!("{path}: expected an object"));
                None
            }
        }
    }

    fn at(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn check_keys(&self, allowed: &[&str], errors: &mut Vec<String>) {
        for key in self.map.keys() {
            if !allowed.contains(&key.as_str()) {
                errors.push(format!(
                    "{}: unknown key{}",
                    self.at(key),
                    suggestion(key, allowed)
                ));
            }
        }
    }

    fn f64(&self, key: &str, errors: &mut Vec<String>) -> Option<f64> {
        match self.map.get(key) {
            None => {
                errors.push(format!("{}: required number is missing", self.at(key)));
                None
            }
            Some(v) => self.number(key, v, errors),
        }
    }

    fn opt_f64(&self, key: &str, errors: &mut Vec<String>) -> Option<f64> {
        self.map.get(key).and_then(|v| self.number(key, v, errors))
    }

    fn number(&self, key: &str, v: &Value, errors: &mut Vec<String>) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                errors.push(format!("{}: expected a finite number, got {v}", self.at(key)));
                None
            }
        }
    }

    fn positive(&self, key: &str, value: Option<f64>, errors: &mut Vec<String>) -> Option<f64> {
        match value {
            Some(x) if x > 0.0 => Some(x),
            Some(x) => {
                errors.push(format!("{}: must be > 0, got {x}", self.at(key)));
                None
            }
            None => None,
        }
    }

    fn usize(&self, key: &str, errors: &mut Vec<String>) -> Option<usize> {
        let v = self.map.get(key)?;
        match v.as_u64() {
            Some(n) => Some(n as usize),
            None => {
                errors.push(format!("{}: expected a non-negative integer, got {v}", self.at(key)));
                None
            }
        }
    }

    fn vec3(&self, key: &str, errors: &mut Vec<String>) -> Option<Vec3> {
        let v = self.map.get(key)?;
        parse_vec3(v).or_else(|| {
            errors.push(format!("{}: expected [x, y, z] of finite numbers, got {v}", self.at(key)));
            None
        })
    }

    fn str(&self, key: &str, errors: &mut Vec<String>) -> Option<&'a str> {
        match self.map.get(key) {
            Some(Value::String(s)) => Some(s),
            Some(v) => {
                errors.push(format!("{}: expected a string, got {v}", self.at(key)));
                None
            }
            None => {
                errors.push(format!("{}: required string is missing", self.at(key)));
                None
            }
        }
    }

    fn child(&self, key: &str, errors: &mut Vec<String>) -> Option<Obj<'a>> {
        let v = self.map.get(key)?;
        Obj::new(v, &self.at(key), errors)
    }
}

fn parse_vec3(v: &Value) -> Option<Vec3> {
    let a = v.as_array()?;
    if a.len() != 3 {
        return None;
    }
    let mut out = [0.0; 3];
    for (o, x) in out.iter_mut().zip(a) {
        *o = x.as_f64().filter(|x| x.is_finite())?;
    }
    Some(out)
}

fn read_document(doc: &Value, errors: &mut Vec<String>) -> Option<RunConfig> {
    let root = Obj::new(doc, "", errors)?;
    root.check_keys(&["source", "grid", "time", "phase", "field", "tolerances"], errors);
    let source = match root.child("source", errors) {
        Some(s) => read_source(&s, errors),
        None => {
            if !root.map.contains_key("source") {
                errors.push("source: required object is missing".into());
            }
            None
        }
    };
    let length = source.as_ref().map(CurrentSource::length_scale).unwrap_or(1.0);
    let grid = match root.child("grid", errors) {
        Some(g) => read_grid(&g, length, errors),
        None => Some(KGridSpec::with_cutoffs(1e-3 / length, 200.0 / length)),
    };
    let (mut time, mut eps) = (0.0, 0.0);
    if let Some(t) = root.child("time", errors) {
        t.check_keys(&["t", "eps"], errors);
        time = t.opt_f64("t", errors).unwrap_or(0.0);
        eps = t.opt_f64("eps", errors).unwrap_or(0.0);
        if eps < 0.0 {
            errors.push(format!("time.eps: must be >= 0, got {eps}"));
        }
    }
    let mut phase = PhaseConfig::default();
    if let Some(p) = root.child("phase", errors) {
        p.check_keys(&["t", "t_start"], errors);
        phase.t = p.opt_f64("t", errors);
        phase.t_start = p.opt_f64("t_start", errors);
    }
    let field = root.child("field", errors).and_then(|f| read_field(&f, length, errors));
    let mut tolerances = Tolerances::default();
    if let Some(t) = root.child("tolerances", errors) {
        t.check_keys(&TOLERANCE_KEYS, errors);
        for key in TOLERANCE_KEYS {
            if let Some(v) = t.positive(key, t.opt_f64(key, errors), errors) {
                *tolerances.slot(key) = v;
            }
        }
    }
    Some(RunConfig {
        source: source?,
        grid: grid?,
        time,
        eps,
        phase,
        field,
        tolerances,
        document: doc.clone(),
    })
}

const SOURCE_TYPES: [&str; 4] = ["circular_loop", "hertzian_dipole", "sampled_loop", "sampled_current"];

fn read_source(s: &Obj, errors: &mut Vec<String>) -> Option<CurrentSource> {
    let kind = s.str("type", errors)?;
    let profile = match s.child("profile", errors) {
        Some(p) => read_profile(&p, errors),
        None => Some(TemporalProfile::Static),
    };
    let geometry = match kind {
        "circular_loop" => {
            s.check_keys(&["type", "current", "radius", "center", "axis", "wire_radius", "profile"], errors);
            let current = s.f64("current", errors);
            if current == Some(0.0) {
                errors.push(format!("{}: must be nonzero", s.at("current")));
            }
            let radius = s.positive("radius", s.f64("radius", errors), errors);
            let center = s.vec3("center", errors).unwrap_or([0.0; 3]);
            let axis = s.vec3("axis", errors).unwrap_or([0.0, 0.0, 1.0]);
            if axis == [0.0; 3] {
                errors.push(format!("{}: must be a nonzero vector", s.at("axis")));
            }
            let wire_radius = s.opt_f64("wire_radius", errors).unwrap_or(0.0);
            if wire_radius < 0.0 {
                errors.push(format!("{}: must be >= 0, got {wire_radius}", s.at("wire_radius")));
            }
            Some(Geometry::CircularLoop {
                current: current?,
                radius: radius?,
                center,
                axis,
                wire_radius,
            })
        }
        "hertzian_dipole" => {
            s.check_keys(&["type", "moment", "position", "profile"], errors);
            let moment = s.vec3("moment", errors);
            if !s.map.contains_key("moment") {
                errors.push(format!("{}: required vector is missing", s.at("moment")));
            }
            let position = s.vec3("position", errors).unwrap_or([0.0; 3]);
            Some(Geometry::HertzianDipole { moment: moment?, position })
        }
        "sampled_loop" => {
            s.check_keys(&["type", "current", "radius", "cells", "half_extent", "profile"], errors);
            let current = s.f64("current", errors);
            let radius = s.positive("radius", s.f64("radius", errors), errors);
            let cells = s.usize("cells", errors).unwrap_or(128);
            let half = s.positive("half_extent", s.opt_f64("half_extent", errors), errors);
            let radius = radius?;
            match sampled_loop(current?, radius, cells, half.unwrap_or(1.25 * radius)) {
                Ok(samples) => Some(Geometry::Sampled(samples.into())),
                Err(e) => {
                    errors.push(format!("{}: {e}", s.path));
                    None
                }
            }
        }
        "sampled_current" => {
            s.check_keys(&["type", "origin", "spacing", "shape", "values", "profile"], errors);
            let origin = s.vec3("origin", errors).unwrap_or([0.0; 3]);
            let spacing = s.positive("spacing", s.f64("spacing", errors), errors);
            let shape = match s.map.get("shape").and_then(Value::as_array) {
                Some(a) if a.len() == 3 && a.iter().all(Value::is_u64) => {
                    Some([0, 1, 2].map(|i| a[i].as_u64().unwrap_or(0) as usize))
                }
                _ => {
                    errors.push(format!("{}: expected [nx, ny, nz] of integers", s.at("shape")));
                    None
                }
            };
            let values = match s.map.get("values").and_then(Value::as_array) {
                Some(a) => a.iter().map(parse_vec3).collect::<Option<Vec<_>>>().or_else(|| {
                    errors.push(format!("{}: every sample must be [jx, jy, jz]", s.at("values")));
                    None
                }),
                None => {
                    errors.push(format!("{}: required array is missing", s.at("values")));
                    None
                }
            };
            match SampledCurrent::new(origin, spacing?, shape?, values?) {
                Ok(samples) => Some(Geometry::Sampled(samples.into())),
                Err(e) => {
                    errors.push(format!("{}: {e}", s.path));
                    None
                }
            }
        }
        other => {
            errors.push(format!(
                "{}: unknown source type \"{other}\"{}",
                s.at("type"),
                suggestion(other, &SOURCE_TYPES)
            ));
            None
        }
    };
    Some(CurrentSource { geometry: geometry?, profile: profile? })
}

fn read_profile(p: &Obj, errors: &mut Vec<String>) -> Option<TemporalProfile> {
    let kind = p.str("type", errors)?;
    match kind {
        "static" => {
            p.check_keys(&["type"], errors);
            Some(TemporalProfile::Static)
        }
        "gaussian_pulse" => {
            p.check_keys(&["type", "t0", "sigma"], errors);
            let t0 = p.f64("t0", errors);
            let sigma = p.positive("sigma", p.f64("sigma", errors), errors);
            Some(TemporalProfile::GaussianPulse { t0: t0?, sigma: sigma? })
        }
        "truncated_harmonic" => {
            p.check_keys(&["type", "omega", "t_on", "ramp_sigma"], errors);
            let omega = p.positive("omega", p.f64("omega", errors), errors);
            let t_on = p.f64("t_on", errors);
            let ramp = p.positive("ramp_sigma", p.f64("ramp_sigma", errors), errors);
            Some(TemporalProfile::TruncatedHarmonic { omega: omega?, t_on: t_on?, ramp_sigma: ramp? })
        }
        other => {
            errors.push(format!(
                "{}: unknown profile type \"{other}\"{}",
                p.at("type"),
                suggestion(other, &["static", "gaussian_pulse", "truncated_harmonic"])
            ));
            None
        }
    }
}

fn read_grid(g: &Obj, length: f64, errors: &mut Vec<String>) -> Option<KGridSpec> {
    g.check_keys(&["k_min", "k_max", "n_k", "n_theta", "n_phi", "radial_map"], errors);
    let mut spec = KGridSpec::with_cutoffs(1e-3 / length, 200.0 / length);
    let before = errors.len();
    if let Some(v) = g.positive("k_min", g.opt_f64("k_min", errors), errors) {
        spec.k_min = v;
    }
    if let Some(v) = g.positive("k_max", g.opt_f64("k_max", errors), errors) {
        spec.k_max = v;
    }
    spec.n_k = g.usize("n_k", errors).unwrap_or(spec.n_k);
    spec.n_theta = g.usize("n_theta", errors).unwrap_or(spec.n_theta);
    spec.n_phi = g.usize("n_phi", errors).unwrap_or(spec.n_phi);
    if g.map.contains_key("radial_map") {
        match g.str("radial_map", errors) {
            Some("log") => spec.radial_map = RadialMap::Log,
            Some("linear") => spec.radial_map = RadialMap::Linear,
            Some(other) => errors.push(format!(
                "{}: expected \"log\" or \"linear\", got \"{other}\"{}",
                g.at("radial_map"),
                suggestion(other, &["log", "linear"])
            )),
            None => {}
        }
    }
    if errors.len() == before {
        if let Err(e) = spec.validate() {
            errors.push(format!("{}: {e}", g.path));
        }
    }
    Some(spec)
}

fn read_field(f: &Obj, length: f64, errors: &mut Vec<String>) -> Option<FieldConfig> {
    f.check_keys(&["grid", "points", "times"], errors);
    let grid = match f.child("grid", errors) {
        Some(g) => read_grid(&g, length, errors),
        None => {
            errors.push(format!("{}: required object is missing", f.at("grid")));
            None
        }
    };
    let points = match f.map.get("points").and_then(Value::as_array) {
        Some(a) if !a.is_empty() => a.iter().map(parse_vec3).collect::<Option<Vec<_>>>().or_else(|| {
            errors.push(format!("{}: every point must be [x, y, z]", f.at("points")));
            None
        }),
        _ => {
            errors.push(format!("{}: expected a non-empty array of points", f.at("points")));
            None
        }
    };
    let times = match f.map.get("times") {
        None => Some(vec![0.0]),
        Some(Value::Array(a)) if !a.is_empty() => {
            a.iter().map(|v| v.as_f64().filter(|t| t.is_finite())).collect::<Option<Vec<_>>>().or_else(|| {
                errors.push(format!("{}: times must be finite numbers", f.at("times")));
                None
            })
        }
        Some(_) => {
            errors.push(format!("{}: expected a non-empty array of times", f.at("times")));
            None
        }
    };
    Some(FieldConfig { grid: grid?, points: points?, times: times? })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn messages(text: &str) -> Vec<String> {
        match parse_config(text) {
            Err(Error::Config(m)) => m,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_loop_uses_defaults() {
        let c = parse_config(r#"{"source": {"type": "circular_loop", "current": 1.0, "radius": 0.1}}"#).unwrap();
        assert_eq!(c.grid.k_min, 1e-3 / 0.1);
        assert_eq!(c.grid.k_max, 200.0 / 0.1);
        assert_eq!((c.grid.n_k, c.grid.n_theta, c.grid.n_phi), (128, 64, 16));
        assert!(c.source.profile.is_static());
    }

    #[test]
    fn negative_radius_is_named() {
        let m = messages(r#"{"source": {"type": "circular_loop", "current": 1.0, "radius": -1}}"#);
        assert_eq!(m.len(), 1);
        assert!(m[0].starts_with("source.radius"), "{m:?}");
    }

    #[test]
    fn typo_gets_a_suggestion() {
        let m = messages(r#"{"source": {"type": "circular_loop", "current": 1.0, "radiu": 0.1}}"#);
        assert!(m.iter().any(|s| s.contains("source.radiu: unknown key (did you mean \"radius\"?)")), "{m:?}");
        assert!(m.iter().any(|s| s.contains("source.radius: required")), "{m:?}");
    }

    #[test]
    fn all_violations_reported_together() {
        let m = messages(
            r#"{"source": {"type": "circular_loop", "current": "one", "radius": 0.1},
                "grid": {"n_k": 4, "colour": 1},
                "tolerances": {"virial": -1}}"#,
        );
        assert!(m.len() >= 3, "{m:?}");
    }

    #[test]
    fn profiles_and_field_section() {
        let c = parse_config(
            r#"{"source": {"type": "circular_loop", "current": 1.0, "radius": 0.1, "wire_radius": 0.005,
                           "profile": {"type": "gaussian_pulse", "t0": 0.0, "sigma": 3e-10}},
                "field": {"grid": {"k_max": 800, "n_k": 32, "n_theta": 16, "n_phi": 8, "radial_map": "linear"},
                          "points": [[0, 0, 0]], "times": [0, 1e-10]}}"#,
        )
        .unwrap();
        let f = c.field.unwrap();
        assert_eq!(f.times.len(), 2);
        assert_eq!(f.grid.radial_map, RadialMap::Linear);
        assert!(matches!(c.source.profile, TemporalProfile::GaussianPulse { .. }));
    }

    #[test]
    fn unknown_source_type() {
        let m = messages(r#"{"source": {"type": "circular_lop"}}"#);
        assert!(m[0].contains("did you mean \"circular_loop\""), "{m:?}");
    }
}
