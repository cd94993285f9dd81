//! Scenario files: a TOML description of a field plus run settings.
//!
//! ```toml
//! name = "sys-a2"
//!
//! [field]
//! upper_x = [[0, 0, 1.0]]
//! upper_y = [[3, 0, -1.0], [4, 0, 1.0]]
//! lower_x = [[0, 0, -1.0]]
//! lower_y = [[3, 0, -1.0]]
//!
//! [window]
//! center = 0.0
//! radius = 0.2
//!
//! [unfold]
//! k = 2
//! lambda = [-1.0, 1.0]
//! epsilon = 0.1
//! ```
//!
//! Every section except `field` and `window` is optional. Parsing fills in
//! defaults and canonicalizes the polynomials, so a parsed scenario is
//! already normalized and [`Scenario::to_toml`] reproduces it exactly.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cycles::CycleConfig;
use crate::field::{PiecewiseField, SmoothField};
use crate::flow::IntegratorConfig;
use crate::poly::Poly2;
use crate::unfold::UnfoldingParams;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse scenario: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub upper_x: Poly2,
    pub upper_y: Poly2,
    pub lower_x: Poly2,
    pub lower_y: Poly2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub center: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSpec {
    pub b_values: Vec<f64>,
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self {
            b_values: vec![-1e-3, -1e-4, -1e-5, 1e-5, 1e-4, 1e-3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sampling {
    /// Displacement samples written by `delta-dump`.
    pub delta_points: usize,
    /// Orbits per window drawn by `portrait`.
    pub portrait_orbits: usize,
    /// Fit range of `lyapunov`, as offsets from the window center.
    pub lyapunov_min: f64,
    pub lyapunov_max: f64,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            delta_points: 40,
            portrait_orbits: 5,
            lyapunov_min: 1e-3,
            lyapunov_max: 2e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CycleSearch {
    pub scan_points: usize,
    pub visible_scan_points: usize,
    pub hyperbolicity_threshold: f64,
    pub root_residual: f64,
}

impl Default for CycleSearch {
    fn default() -> Self {
        let c = CycleConfig::default();
        Self {
            scan_points: c.scan_points,
            visible_scan_points: c.visible_scan_points,
            hyperbolicity_threshold: c.hyperbolicity_threshold,
            root_residual: c.root_residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default = "default_outputs")]
    pub outputs: PathBuf,
    pub field: FieldSpec,
    pub window: Window,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unfold: Option<UnfoldingParams>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub cycles: CycleSearch,
    #[serde(default)]
    pub scan: ScanSpec,
    #[serde(default)]
    pub sampling: Sampling,
}

fn default_outputs() -> PathBuf {
    PathBuf::from("out")
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = toml::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario fields are TOML-representable")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |m: String| Err(ScenarioError::Invalid(m));
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return invalid(format!("name '{}' cannot be used in file names", self.name));
        }
        let f = &self.field;
        for (label, p) in [
            ("upper_x", &f.upper_x),
            ("upper_y", &f.upper_y),
            ("lower_x", &f.lower_x),
            ("lower_y", &f.lower_y),
        ] {
            if p.is_zero() {
                return invalid(format!("field.{label} has no nonzero monomial"));
            }
        }
        if !(self.window.radius > 0.0) || !self.window.center.is_finite() {
            return invalid("window radius must be positive".into());
        }
        if self.cycles.scan_points < 2 || self.sampling.delta_points < 2 {
            return invalid("sample counts must be at least 2".into());
        }
        if !(self.sampling.lyapunov_min > 0.0 && self.sampling.lyapunov_max > self.sampling.lyapunov_min) {
            return invalid("lyapunov range must satisfy 0 < min < max".into());
        }
        self.integrator
            .validate()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        if let Some(u) = &self.unfold {
            u.validate().map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        }
        Ok(())
    }

    pub fn piecewise_field(&self) -> PiecewiseField {
        let f = &self.field;
        PiecewiseField::new(
            SmoothField::new(f.upper_x.clone(), f.upper_y.clone()),
            SmoothField::new(f.lower_x.clone(), f.lower_y.clone()),
        )
    }

    pub fn cycle_config(&self) -> CycleConfig {
        CycleConfig {
            integrator: self.integrator,
            u_radius: self.window.radius,
            scan_points: self.cycles.scan_points,
            visible_scan_points: self.cycles.visible_scan_points,
            hyperbolicity_threshold: self.cycles.hyperbolicity_threshold,
            root_residual: self.cycles.root_residual,
        }
    }

    /// Scenario for a given field with default settings.
    pub fn for_field(name: &str, z: &PiecewiseField, window: Window) -> Self {
        Self {
            name: name.to_string(),
            outputs: default_outputs(),
            field: FieldSpec {
                upper_x: z.upper.x.clone(),
                upper_y: z.upper.y.clone(),
                lower_x: z.lower.x.clone(),
                lower_y: z.lower.y.clone(),
            },
            window,
            unfold: None,
            integrator: IntegratorConfig::default(),
            cycles: CycleSearch::default(),
            scan: ScanSpec::default(),
            sampling: Sampling::default(),
        }
    }
}
