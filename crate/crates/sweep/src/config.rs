//! Flat `key = value` run configuration.
//!
//! ```text
//! # O3L point
//! model.eps0 = 3.7
//! drive.A = 3.8
//! bath.xi = 0.1
//! sweep.x.name = A
//! sweep.x.min = 0
//! sweep.x.max = 5
//! sweep.x.steps = 40
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use floquet_qubits::bath::BathParams;
use floquet_qubits::dynamics::GeneratorFlavor;
use floquet_qubits::floquet;
use floquet_qubits::model::{DriveParams, ModelParams};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("key {key:?}: cannot parse {value:?} ({reason})")]
    BadValue { key: String, value: String, reason: String },
    #[error("{0}")]
    Invalid(String),
}

/// Parameter that a sweep axis can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisName {
    Amplitude,
    Eps0,
    Xi,
    Coupling,
}

impl AxisName {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "A" => Some(Self::Amplitude),
            "eps0" => Some(Self::Eps0),
            "xi" => Some(Self::Xi),
            "J" => Some(Self::Coupling),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Amplitude => "A",
            Self::Eps0 => "eps0",
            Self::Xi => "xi",
            Self::Coupling => "J",
        }
    }

    /// Default range when only the name is given.
    fn default_range(self) -> (f64, f64) {
        match self {
            Self::Amplitude | Self::Eps0 => (0.0, 5.0),
            Self::Xi => (0.0, 1.0),
            Self::Coupling => (-4.0, 4.0),
        }
    }
}

impl fmt::Display for AxisName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    /// `steps` evenly spaced values including both ends.
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        (0..self.steps)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericsConfig {
    /// Fourier cutoff; `None` picks it automatically.
    pub kmax: Option<usize>,
    pub tol: f64,
    pub ramp_steps: usize,
    /// Trace length in drive periods.
    pub horizon: u64,
    pub stride: u64,
    /// When nonzero, trace instants are thinned to about this many
    /// logarithmically spaced periods.
    pub log_points: usize,
    pub flavor: GeneratorFlavor,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            kmax: None,
            tol: floquet::DEFAULT_TOL,
            ramp_steps: floquet::DEFAULT_RAMP_STEPS,
            horizon: 20_000,
            stride: 10,
            log_points: 0,
            flavor: GeneratorFlavor::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelParams,
    pub drive: DriveParams,
    pub bath: BathParams,
    pub x: Option<Axis>,
    pub y: Option<Axis>,
    pub numerics: NumericsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let model = ModelParams::default();
        Self {
            model,
            drive: DriveParams::new(3.8, model.omega),
            bath: BathParams::default(),
            x: None,
            y: None,
            numerics: NumericsConfig::default(),
        }
    }
}

/// Every key the parser accepts, in the order they are echoed.
pub const KEYS: &[&str] = &[
    "model.eps0",
    "model.delta1",
    "model.delta2",
    "model.J",
    "model.omega",
    "drive.A",
    "bath.kappa",
    "bath.temperature",
    "bath.cutoff",
    "bath.gamma1",
    "bath.xi",
    "sweep.x.name",
    "sweep.x.min",
    "sweep.x.max",
    "sweep.x.steps",
    "sweep.y.name",
    "sweep.y.min",
    "sweep.y.max",
    "sweep.y.steps",
    "numerics.kmax",
    "numerics.tol",
    "numerics.ramp_steps",
    "numerics.horizon",
    "numerics.stride",
    "numerics.log_points",
    "numerics.flavor",
];

/// Raw key-value pairs, later entries overriding earlier ones.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = match line.find('#') {
                Some(pos) => &line[..pos],
                None => line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            raw.set_assignment(line).map_err(|e| match e {
                ConfigError::Syntax { text, .. } => ConfigError::Syntax { line: i + 1, text },
                other => other,
            })?;
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Applies one `key=value` override.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let Some((key, value)) = assignment.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: 0,
                text: assignment.to_string(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.entries
            .get(key)
            .map(|v| {
                v.parse::<T>().map_err(|e| ConfigError::BadValue {
                    key: key.to_string(),
                    value: v.clone(),
                    reason: e.to_string(),
                })
            })
            .transpose()
    }

    fn axis(&self, which: &str) -> Result<Option<Axis>, ConfigError> {
        let key = |field: &str| format!("sweep.{which}.{field}");
        let Some(name) = self.entries.get(&key("name")) else {
            let stray = ["min", "max", "steps"].iter().find(|f| self.entries.contains_key(&key(f)));
            return match stray {
                Some(f) => Err(ConfigError::Invalid(format!("{} given without {}", key(f), key("name")))),
                None => Ok(None),
            };
        };
        let name = AxisName::parse(name).ok_or_else(|| ConfigError::BadValue {
            key: key("name"),
            value: name.clone(),
            reason: "expected one of A, eps0, xi, J".into(),
        })?;
        let (lo, hi) = name.default_range();
        let axis = Axis {
            name,
            min: self.get(&key("min"))?.unwrap_or(lo),
            max: self.get(&key("max"))?.unwrap_or(hi),
            steps: self.get(&key("steps"))?.unwrap_or(self.default_steps()),
        };
        if !(axis.min.is_finite() && axis.max.is_finite()) {
            return Err(ConfigError::Invalid(format!("sweep.{which} range must be finite")));
        }
        if axis.steps < 1 {
            return Err(ConfigError::Invalid(format!("sweep.{which}.steps must be at least 1")));
        }
        Ok(Some(axis))
    }

    /// Planes default to 40×40, line scans to 101 points.
    fn default_steps(&self) -> usize {
        if self.entries.contains_key("sweep.y.name") {
            40
        } else {
            101
        }
    }

    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig::default();
        let m = &mut cfg.model;
        m.eps0 = self.get("model.eps0")?.unwrap_or(m.eps0);
        m.delta1 = self.get("model.delta1")?.unwrap_or(m.delta1);
        m.delta2 = self.get("model.delta2")?.unwrap_or(m.delta2);
        m.coupling = self.get("model.J")?.unwrap_or(m.coupling);
        m.omega = self.get("model.omega")?.unwrap_or(m.omega);
        cfg.drive = DriveParams::new(self.get("drive.A")?.unwrap_or(cfg.drive.amplitude), cfg.model.omega);
        let b = &mut cfg.bath;
        b.kappa = self.get("bath.kappa")?.unwrap_or(b.kappa);
        b.temperature = self.get("bath.temperature")?.unwrap_or(b.temperature);
        b.cutoff = self.get("bath.cutoff")?.unwrap_or(b.cutoff);
        b.gamma1 = self.get("bath.gamma1")?.unwrap_or(b.gamma1);
        b.xi = self.get("bath.xi")?.unwrap_or(b.xi);
        cfg.x = self.axis("x")?;
        cfg.y = self.axis("y")?;
        if cfg.y.is_some() && cfg.x.is_none() {
            return Err(ConfigError::Invalid("sweep.y needs sweep.x".into()));
        }
        if let (Some(x), Some(y)) = (cfg.x, cfg.y) {
            if x.name == y.name {
                return Err(ConfigError::Invalid(format!("both axes sweep {}", x.name)));
            }
        }
        let n = &mut cfg.numerics;
        n.kmax = match self.get::<usize>("numerics.kmax")? {
            Some(0) | None => None,
            Some(k) => Some(k),
        };
        n.tol = self.get("numerics.tol")?.unwrap_or(n.tol);
        n.ramp_steps = self.get("numerics.ramp_steps")?.unwrap_or(n.ramp_steps);
        n.horizon = self.get("numerics.horizon")?.unwrap_or(n.horizon);
        n.stride = self.get("numerics.stride")?.unwrap_or(n.stride);
        n.log_points = self.get("numerics.log_points")?.unwrap_or(n.log_points);
        n.flavor = match self.entries.get("numerics.flavor").map(String::as_str) {
            None | Some("full") => GeneratorFlavor::Full,
            Some("secular") => GeneratorFlavor::Secular,
            Some(other) => {
                return Err(ConfigError::BadValue {
                    key: "numerics.flavor".into(),
                    value: other.into(),
                    reason: "expected full or secular".into(),
                })
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: floquet_qubits::Error| ConfigError::Invalid(e.to_string());
        self.model.validate().map_err(invalid)?;
        self.drive.validate().map_err(invalid)?;
        self.bath.validate().map_err(invalid)?;
        let n = &self.numerics;
        if !(1e-14..=1e-6).contains(&n.tol) {
            return Err(ConfigError::Invalid(format!("numerics.tol {} outside [1e-14, 1e-6]", n.tol)));
        }
        if n.horizon < 1 || n.stride < 1 {
            return Err(ConfigError::Invalid("numerics.horizon and numerics.stride must be at least 1".into()));
        }
        Ok(())
    }

    /// The configuration with one axis value substituted.
    pub fn with(&self, name: AxisName, value: f64) -> Self {
        let mut cfg = self.clone();
        match name {
            AxisName::Amplitude => cfg.drive.amplitude = value,
            AxisName::Eps0 => cfg.model.eps0 = value,
            AxisName::Xi => cfg.bath.xi = value,
            AxisName::Coupling => cfg.model.coupling = value,
        }
        cfg
    }

    /// `key = value` lines for every key, fully resolved.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("model.eps0".to_string(), num(self.model.eps0)),
            ("model.delta1".into(), num(self.model.delta1)),
            ("model.delta2".into(), num(self.model.delta2)),
            ("model.J".into(), num(self.model.coupling)),
            ("model.omega".into(), num(self.model.omega)),
            ("drive.A".into(), num(self.drive.amplitude)),
            ("bath.kappa".into(), num(self.bath.kappa)),
            ("bath.temperature".into(), num(self.bath.temperature)),
            ("bath.cutoff".into(), num(self.bath.cutoff)),
            ("bath.gamma1".into(), num(self.bath.gamma1)),
            ("bath.xi".into(), num(self.bath.xi)),
        ];
        for (which, axis) in [("x", self.x), ("y", self.y)] {
            if let Some(a) = axis {
                out.push((format!("sweep.{which}.name"), a.name.to_string()));
                out.push((format!("sweep.{which}.min"), num(a.min)));
                out.push((format!("sweep.{which}.max"), num(a.max)));
                out.push((format!("sweep.{which}.steps"), a.steps.to_string()));
            }
        }
        let n = &self.numerics;
        out.push(("numerics.kmax".into(), n.kmax.unwrap_or(0).to_string()));
        out.push(("numerics.tol".into(), num(n.tol)));
        out.push(("numerics.ramp_steps".into(), n.ramp_steps.to_string()));
        out.push(("numerics.horizon".into(), n.horizon.to_string()));
        out.push(("numerics.stride".into(), n.stride.to_string()));
        out.push(("numerics.log_points".into(), n.log_points.to_string()));
        let flavor = match n.flavor {
            GeneratorFlavor::Full => "full",
            GeneratorFlavor::Secular => "secular",
        };
        out.push(("numerics.flavor".into(), flavor.into()));
        out
    }
}

/// Shortest representation that parses back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let text = "# header\nmodel.eps0 = 3.25  # SE resonance\n\n bath.xi=0.5\nsweep.x.name = A\nsweep.x.steps = 5\n";
        let mut raw = RawConfig::parse(text).unwrap();
        raw.set_assignment("bath.xi = 0.1").unwrap();
        let cfg = raw.resolve().unwrap();
        assert_eq!(cfg.model.eps0, 3.25);
        assert_eq!(cfg.bath.xi, 0.1);
        let x = cfg.x.unwrap();
        assert_eq!((x.name, x.min, x.max, x.steps), (AxisName::Amplitude, 0.0, 5.0, 5));
        assert_eq!(x.values(), vec![0.0, 1.25, 2.5, 3.75, 5.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(RawConfig::parse("model.eps0 3.7"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(RawConfig::parse("model.epsilon = 1"), Err(ConfigError::UnknownKey(_))));
        let bad = |s: &str| RawConfig::parse(s).unwrap().resolve();
        assert!(matches!(bad("model.eps0 = abc"), Err(ConfigError::BadValue { .. })));
        assert!(matches!(bad("sweep.x.name = B"), Err(ConfigError::BadValue { .. })));
        assert!(bad("sweep.x.min = 1").is_err());
        assert!(bad("sweep.y.name = A").is_err());
        assert!(bad("sweep.x.name = A\nsweep.y.name = A").is_err());
        assert!(bad("sweep.x.name = A\nsweep.x.steps = 0").is_err());
        assert!(bad("sweep.x.name = A\nsweep.x.max = inf").is_err());
        assert!(bad("bath.kappa = -1").is_err());
        assert!(bad("numerics.tol = 1e-3").is_err());
        assert!(bad("numerics.flavor = lindblad").is_err());
    }

    #[test]
    fn echo_round_trips() {
        let raw = RawConfig::parse("model.eps0 = 0.1\nbath.temperature = 0.00467\nsweep.x.name = xi\nnumerics.kmax = 24").unwrap();
        let cfg = raw.resolve().unwrap();
        let mut again = RawConfig::default();
        for (k, v) in cfg.echo() {
            again.set_assignment(&format!("{k} = {v}")).unwrap();
        }
        assert_eq!(again.resolve().unwrap(), cfg);
    }

    #[test]
    fn single_step_axis_is_its_minimum() {
        let a = Axis {
            name: AxisName::Xi,
            min: 0.3,
            max: 0.9,
            steps: 1,
        };
        assert_eq!(a.values(), vec![0.3]);
    }
}
