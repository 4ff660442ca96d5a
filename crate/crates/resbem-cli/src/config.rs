//! Versioned JSON run configuration.

use resbem::asymptotics::PredictionMode;
use resbem::geometry::{validate_scene, Scene};
use resbem::nep::{ContourSpec, Rectangle, SolverOptions};
use resbem::transfer::JumpMode;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const CONFIG_VERSION: u32 = 1;

/// The disk scene shipped with the binary.
pub const BUNDLED_DISK: &str = include_str!("../scenes/disk.json");

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config error at `{path}`: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n_outer: usize,
    pub n_inclusion: usize,
    pub n_polarization: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n_outer: 256, n_inclusion: 64, n_polarization: 128 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContourConfig {
    pub nodes: usize,
    pub probes: usize,
    /// Radius of the circles tiling a search rectangle.
    pub rho: f64,
}

impl Default for ContourConfig {
    fn default() -> Self {
        Self { nodes: 64, probes: 8, rho: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Region {
    Rectangle(Rectangle),
    Circle { center: [f64; 2], radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Initial guess for the unperturbed resonance.
    pub lambda0: [f64; 2],
    /// Radius of the circle searched around `lambda0`.
    pub radius: f64,
    #[serde(default)]
    pub prediction: PredictionMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub modes: Vec<u32>,
    pub region: Rectangle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Resonances,
    Polarization,
    Sweep,
    Validate,
    #[serde(rename = "oracle-disk")]
    OracleDisk,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Resonances => "resonances",
            Task::Polarization => "polarization",
            Task::Sweep => "sweep",
            Task::Validate => "validate",
            Task::OracleDisk => "oracle-disk",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub scene: Scene,
    #[serde(default)]
    pub task: Option<Task>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub jump_mode: JumpMode,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub contour: ContourConfig,
    #[serde(default)]
    pub search: Vec<Region>,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub oracle: Option<OracleConfig>,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub out: Option<String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::new(path, e.into_inner().to_string())
        })?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new(path.display().to_string(), e.to_string()))?;
        Self::parse(&text)
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED_DISK).expect("bundled config is valid")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Semantic checks; every error names the offending field.
    pub fn check(&self) -> Result<(), ConfigError> {
        if self.version != CONFIG_VERSION {
            return Err(ConfigError::new("version", format!("unsupported version {}, expected {CONFIG_VERSION}", self.version)));
        }
        validate_scene(&self.scene).map_err(|e| ConfigError::new("scene", e.to_string()))?;
        for (name, n) in [("grid.n_outer", self.grid.n_outer), ("grid.n_inclusion", self.grid.n_inclusion), ("grid.n_polarization", self.grid.n_polarization)] {
            if n < 4 || n % 2 != 0 {
                return Err(ConfigError::new(name, format!("must be even and at least 4, got {n}")));
            }
        }
        let c = ContourSpec { center: [0.0, -1.0], radius: 1.0, nodes: self.contour.nodes, probes: self.contour.probes };
        c.check().map_err(|e| ConfigError::new("contour", e.to_string()))?;
        if !(self.contour.rho > 0.0 && self.contour.rho.is_finite()) {
            return Err(ConfigError::new("contour.rho", "must be positive"));
        }
        for (i, r) in self.search.iter().enumerate() {
            let ok = match r {
                Region::Rectangle(r) => r.re[0] < r.re[1] && r.im[0] < r.im[1],
                Region::Circle { radius, .. } => *radius > 0.0 && radius.is_finite(),
            };
            if !ok {
                return Err(ConfigError::new(format!("search[{i}]"), "empty region"));
            }
        }
        for (i, e) in self.epsilons.iter().enumerate() {
            if !(*e > 0.0 && e.is_finite()) {
                return Err(ConfigError::new(format!("epsilons[{i}]"), format!("must be positive, got {e}")));
            }
        }
        if let Some(s) = &self.sweep {
            if !(s.radius > 0.0 && s.radius.is_finite()) {
                return Err(ConfigError::new("sweep.radius", "must be positive"));
            }
        }
        if let Some(o) = &self.oracle {
            let r = &o.region;
            if !(r.re[0] < r.re[1] && r.im[0] < r.im[1] && r.im[1] < 0.0) {
                return Err(ConfigError::new("oracle.region", "must be a nonempty rectangle in the lower half-plane"));
            }
        }
        Ok(())
    }
}
