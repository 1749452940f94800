//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment. Unknown and repeated keys
//! are errors. Angles are radians unless `angle_unit = deg`; without that key
//! the `--degrees` flag decides.
//! See the README for the full key list.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt::{self, Write as _};
use std::path::PathBuf;

use geophase::optics::Geometry;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl ConfigError {
    fn new(line: Option<usize>, field: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            line,
            field: field.map(str::to_string),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("config")?;
        if let Some(line) = self.line {
            write!(f, " line {line}")?;
        }
        if let Some(field) = &self.field {
            write!(f, " field `{field}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    TwoDetector,
    Entanglement,
    ThreeSlit,
}

impl Experiment {
    fn name(self) -> &'static str {
        match self {
            Experiment::TwoDetector => "two-detector",
            Experiment::Entanglement => "entanglement",
            Experiment::ThreeSlit => "three-slit",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [Self::TwoDetector, Self::Entanglement, Self::ThreeSlit]
            .into_iter()
            .find(|e| e.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    /// φ₃ − φ₄ with φ₄ held fixed.
    Phi34,
    /// Detector separation d_D.
    DetectorSeparation,
    /// Geometric phase Ω of the exchange state.
    Omega,
    /// Poincaré azimuth of analyser C.
    CAzimuth,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::Phi34 => "phi34",
            SweepVar::DetectorSeparation => "d_d",
            SweepVar::Omega => "omega",
            SweepVar::CAzimuth => "c_phi",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            Self::Phi34,
            Self::DetectorSeparation,
            Self::Omega,
            Self::CAzimuth,
        ]
        .into_iter()
        .find(|v| v.name() == s)
    }

    pub fn is_angle(self) -> bool {
        self != SweepVar::DetectorSeparation
    }

    pub fn experiment(self) -> Experiment {
        match self {
            SweepVar::Phi34 | SweepVar::DetectorSeparation => Experiment::TwoDetector,
            SweepVar::Omega => Experiment::Entanglement,
            SweepVar::CAzimuth => Experiment::ThreeSlit,
        }
    }
}

/// Analyser state as a point (polar angle from +s₃, azimuth) on the
/// Poincaré sphere.
pub type SpherePoint = (f64, f64);

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub sweep: SweepVar,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    pub d_s: f64,
    pub d_d: f64,
    pub l: f64,
    pub wavelength: f64,
    pub n_b: f64,
    pub phi3: f64,
    pub phi4: f64,
    /// ψ = cos θ |S⟩ + e^{iχ} sin θ |L⟩ against φ = |S⟩.
    pub psi_theta: f64,
    pub psi_phase: f64,
    pub analysers: [SpherePoint; 3],
    pub oracle: bool,
    pub n_max: usize,
    pub out: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "experiment",
    "sweep",
    "start",
    "stop",
    "steps",
    "d_s",
    "d_d",
    "l",
    "wavelength",
    "n_b",
    "phi3",
    "phi4",
    "psi_theta",
    "psi_phase",
    "a_theta",
    "a_phi",
    "b_theta",
    "b_phi",
    "c_theta",
    "c_phi",
    "oracle",
    "n_max",
    "angle_unit",
    "out",
];

const ANGLE_KEYS: &[&str] = &[
    "phi3",
    "phi4",
    "psi_theta",
    "psi_phase",
    "a_theta",
    "a_phi",
    "b_theta",
    "b_phi",
    "c_theta",
    "c_phi",
];

impl RunConfig {
    /// Defaults for a sweep: zero detector baseline, 1 m, 500 nm, n_B = 0.1,
    /// analysers A = H, B = linear −45°, C off the pole at polar angle 0.6.
    pub fn defaults(sweep: SweepVar) -> Self {
        let (start, stop) = match sweep {
            SweepVar::Phi34 => (0.0, PI),
            SweepVar::DetectorSeparation => (0.0, 2e-3),
            SweepVar::Omega => (0.0, 4.0 * PI),
            SweepVar::CAzimuth => (0.0, 2.0 * PI),
        };
        Self {
            experiment: sweep.experiment(),
            sweep,
            start,
            stop,
            steps: 64,
            d_s: 1e-3,
            d_d: 0.0,
            l: 1.0,
            wavelength: 500e-9,
            n_b: 0.1,
            phi3: 0.0,
            phi4: 0.0,
            psi_theta: FRAC_PI_4,
            psi_phase: 0.0,
            analysers: [(FRAC_PI_2, 0.0), (FRAC_PI_2, FRAC_PI_2), (0.6, 0.0)],
            oracle: true,
            n_max: if sweep == SweepVar::CAzimuth { 4 } else { 6 },
            out: None,
        }
    }

    /// Applies the assignments in `text` on top of `base`. `degrees` selects
    /// degree input when the text has no `angle_unit` key.
    pub fn parse_str(text: &str, base: RunConfig, degrees: bool) -> Result<Self, ConfigError> {
        let mut entries: HashMap<&str, (usize, &str)> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                ConfigError::new(
                    Some(line),
                    None,
                    format!("expected `key = value`, got `{content}`"),
                )
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(ConfigError::new(Some(line), Some(key), "unknown key"));
            }
            if let Some((first, _)) = entries.insert(key, (line, value)) {
                return Err(ConfigError::new(
                    Some(line),
                    Some(key),
                    format!("repeated key (first set on line {first})"),
                ));
            }
        }

        let mut cfg = base;
        let mut deg = degrees;
        if let Some(&(line, v)) = entries.get("angle_unit") {
            match v {
                "deg" => deg = true,
                "rad" => deg = false,
                _ => {
                    return Err(ConfigError::new(
                        Some(line),
                        Some("angle_unit"),
                        "expected `deg` or `rad`",
                    ))
                }
            }
        }
        if let Some(&(line, v)) = entries.get("experiment") {
            let e = Experiment::parse(v).ok_or_else(|| {
                ConfigError::new(
                    Some(line),
                    Some("experiment"),
                    format!("unknown experiment `{v}`"),
                )
            })?;
            if e != cfg.experiment {
                return Err(ConfigError::new(
                    Some(line),
                    Some("experiment"),
                    format!(
                        "`{v}` does not match the command ({})",
                        cfg.experiment.name()
                    ),
                ));
            }
        }
        if let Some(&(line, v)) = entries.get("sweep") {
            let s = SweepVar::parse(v).ok_or_else(|| {
                ConfigError::new(
                    Some(line),
                    Some("sweep"),
                    format!("unknown sweep variable `{v}`"),
                )
            })?;
            if s != cfg.sweep {
                return Err(ConfigError::new(
                    Some(line),
                    Some("sweep"),
                    format!("`{v}` does not match the command ({})", cfg.sweep.name()),
                ));
            }
        }

        let number = |key: &str| -> Result<Option<f64>, ConfigError> {
            let Some(&(line, v)) = entries.get(key) else {
                return Ok(None);
            };
            let x: f64 = v.parse().map_err(|_| {
                ConfigError::new(
                    Some(line),
                    Some(key),
                    format!("expected a number, got `{v}`"),
                )
            })?;
            if !x.is_finite() {
                return Err(ConfigError::new(
                    Some(line),
                    Some(key),
                    "value must be finite",
                ));
            }
            let angle = ANGLE_KEYS.contains(&key)
                || (cfg.sweep.is_angle() && (key == "start" || key == "stop"));
            Ok(Some(if deg && angle { x.to_radians() } else { x }))
        };
        let integer = |key: &str| -> Result<Option<usize>, ConfigError> {
            let Some(&(line, v)) = entries.get(key) else {
                return Ok(None);
            };
            v.parse().map(Some).map_err(|_| {
                ConfigError::new(
                    Some(line),
                    Some(key),
                    format!("expected a non-negative integer, got `{v}`"),
                )
            })
        };

        macro_rules! set {
            ($field:expr, $key:literal) => {
                if let Some(x) = number($key)? {
                    $field = x;
                }
            };
        }
        set!(cfg.start, "start");
        set!(cfg.stop, "stop");
        set!(cfg.d_s, "d_s");
        set!(cfg.d_d, "d_d");
        set!(cfg.l, "l");
        set!(cfg.wavelength, "wavelength");
        set!(cfg.n_b, "n_b");
        set!(cfg.phi3, "phi3");
        set!(cfg.phi4, "phi4");
        set!(cfg.psi_theta, "psi_theta");
        set!(cfg.psi_phase, "psi_phase");
        set!(cfg.analysers[0].0, "a_theta");
        set!(cfg.analysers[0].1, "a_phi");
        set!(cfg.analysers[1].0, "b_theta");
        set!(cfg.analysers[1].1, "b_phi");
        set!(cfg.analysers[2].0, "c_theta");
        set!(cfg.analysers[2].1, "c_phi");
        if let Some(n) = integer("steps")? {
            cfg.steps = n;
        }
        if let Some(n) = integer("n_max")? {
            cfg.n_max = n;
        }
        if let Some(&(line, v)) = entries.get("oracle") {
            cfg.oracle = match v {
                "true" => true,
                "false" => false,
                _ => {
                    return Err(ConfigError::new(
                        Some(line),
                        Some("oracle"),
                        "expected `true` or `false`",
                    ))
                }
            };
        }
        if let Some(&(line, v)) = entries.get("out") {
            if v.is_empty() {
                return Err(ConfigError::new(Some(line), Some("out"), "empty path"));
            }
            cfg.out = Some(PathBuf::from(v));
        }
        Ok(cfg)
    }

    /// Checks ranges and that the geometry is valid at both sweep ends.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let field = |f: &str, m: String| Err(ConfigError::new(None, Some(f), m));
        if self.sweep.experiment() != self.experiment {
            return field(
                "sweep",
                format!(
                    "`{}` is not a {} sweep",
                    self.sweep.name(),
                    self.experiment.name()
                ),
            );
        }
        if self.steps == 0 {
            return field("steps", "empty sweep range (0 points)".into());
        }
        if self.stop < self.start || (self.steps > 1 && self.stop == self.start) {
            return field(
                "stop",
                format!(
                    "empty sweep range [{}, {}] with {} points",
                    self.start, self.stop, self.steps
                ),
            );
        }
        if !(self.n_b >= 0.0) {
            return field("n_b", format!("occupation must be >= 0, got {}", self.n_b));
        }
        if self.oracle && self.n_max < 1 {
            return field("n_max", "oracle truncation must be >= 1".into());
        }
        match self.experiment {
            Experiment::TwoDetector => {
                for x in [self.start, self.stop] {
                    let d_d = if self.sweep == SweepVar::DetectorSeparation {
                        x
                    } else {
                        self.d_d
                    };
                    if d_d < 0.0 || self.d_s < 0.0 {
                        return field("d_d", "separations must be >= 0".into());
                    }
                    let g = Geometry::two_by_two(self.d_s, d_d, self.l, self.wavelength)
                        .map_err(|e| ConfigError::new(None, Some("geometry"), e.to_string()))?;
                    g.check_far_field()
                        .map_err(|e| ConfigError::new(None, Some("l"), e.to_string()))?;
                }
            }
            Experiment::ThreeSlit => {
                geophase::multislit::TripleSetup::default_geometry(self.wavelength)
                    .map_err(|e| ConfigError::new(None, Some("wavelength"), e.to_string()))?;
            }
            Experiment::Entanglement => {}
        }
        Ok(())
    }

    /// Sweep points, evenly spaced and including both ends.
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.stop
                } else {
                    self.start + h * i as f64
                }
            })
            .collect()
    }

    /// Echo in radians; parsing it back over any base gives an equal config.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("experiment", self.experiment.name().into());
        kv("sweep", self.sweep.name().into());
        kv("angle_unit", "rad".into());
        kv("start", self.start.to_string());
        kv("stop", self.stop.to_string());
        kv("steps", self.steps.to_string());
        kv("d_s", self.d_s.to_string());
        kv("d_d", self.d_d.to_string());
        kv("l", self.l.to_string());
        kv("wavelength", self.wavelength.to_string());
        kv("n_b", self.n_b.to_string());
        kv("phi3", self.phi3.to_string());
        kv("phi4", self.phi4.to_string());
        kv("psi_theta", self.psi_theta.to_string());
        kv("psi_phase", self.psi_phase.to_string());
        for (name, (theta, phi)) in ["a", "b", "c"].iter().zip(self.analysers) {
            kv(&format!("{name}_theta"), theta.to_string());
            kv(&format!("{name}_phi"), phi.to_string());
        }
        kv("oracle", self.oracle.to_string());
        kv("n_max", self.n_max.to_string());
        if let Some(out) = &self.out {
            kv("out", out.display().to_string());
        }
        s
    }
}
