//! Scenario configuration: versioned JSON presets, user overrides, `--set` grammar.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::ris::CoefficientPolicy;
use crate::scene::Scene;
use crate::tracer::{PathFilter, TraceConfig};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;
pub const PRESET_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioKind {
    A,
    B,
    #[serde(rename = "B-variant-UE")]
    BVariantUe,
    C,
    #[serde(rename = "free-space-A")]
    FreeSpaceA,
    #[serde(rename = "free-space-B")]
    FreeSpaceB,
    #[serde(rename = "two-ray-A")]
    TwoRayA,
}

/// What moves along the sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Motion {
    UeAndRis,
    Ris,
    Ue,
    Grid,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 7] = [
        ScenarioKind::A,
        ScenarioKind::B,
        ScenarioKind::BVariantUe,
        ScenarioKind::C,
        ScenarioKind::FreeSpaceA,
        ScenarioKind::FreeSpaceB,
        ScenarioKind::TwoRayA,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::A => "A",
            ScenarioKind::B => "B",
            ScenarioKind::BVariantUe => "B-variant-UE",
            ScenarioKind::C => "C",
            ScenarioKind::FreeSpaceA => "free-space-A",
            ScenarioKind::FreeSpaceB => "free-space-B",
            ScenarioKind::TwoRayA => "two-ray-A",
        }
    }

    pub fn motion(self) -> Motion {
        match self {
            ScenarioKind::A | ScenarioKind::FreeSpaceA | ScenarioKind::TwoRayA => Motion::UeAndRis,
            ScenarioKind::B | ScenarioKind::FreeSpaceB => Motion::Ris,
            ScenarioKind::BVariantUe => Motion::Ue,
            ScenarioKind::C => Motion::Grid,
        }
    }

    fn preset_text(self) -> &'static str {
        match self {
            ScenarioKind::A => include_str!("../../data/presets/A.json"),
            ScenarioKind::B => include_str!("../../data/presets/B.json"),
            ScenarioKind::BVariantUe => include_str!("../../data/presets/B-variant-UE.json"),
            ScenarioKind::C => include_str!("../../data/presets/C.json"),
            ScenarioKind::FreeSpaceA => include_str!("../../data/presets/free-space-A.json"),
            ScenarioKind::FreeSpaceB => include_str!("../../data/presets/free-space-B.json"),
            ScenarioKind::TwoRayA => include_str!("../../data/presets/two-ray-A.json"),
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scenario `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyName {
    Optimal,
    Unit,
    Random,
}

/// The three scenario C maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverageMode {
    /// No RIS, reflections only.
    Reflections,
    /// RIS link only.
    Ris,
    /// No RIS, reflections plus single diffraction.
    Diffraction,
}

impl CoverageMode {
    pub fn name(self) -> &'static str {
        match self {
            CoverageMode::Reflections => "reflections",
            CoverageMode::Ris => "ris",
            CoverageMode::Diffraction => "diffraction",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub step_m: f64,
    /// Number of steps; the sweep has `count + 1` points.
    pub count: usize,
    /// Horizontal direction of motion (normalized on use).
    pub direction: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub spacing_wavelengths: f64,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSettings {
    pub max_reflections: usize,
    pub max_diffractions: usize,
    pub angular_resolution_deg: f64,
    pub dedup_tolerance_m: f64,
}

impl TraceSettings {
    pub fn to_trace_config(&self) -> TraceConfig {
        TraceConfig {
            max_reflections: self.max_reflections,
            max_diffractions: self.max_diffractions,
            angular_resolution: self.angular_resolution_deg.to_radians(),
            dedup_tolerance: self.dedup_tolerance_m,
        }
    }
}

/// Fully resolved scenario configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    pub preset_version: u32,
    pub scenario: ScenarioKind,
    /// `bundled:<name>` or a scene file path.
    pub scene: String,
    pub freq_ghz: f64,
    pub ptx_dbm: f64,
    pub tx_height: f64,
    pub ue_height: f64,
    pub ris_height: f64,
    pub ris_tilt_deg: f64,
    pub ris_elements: usize,
    pub ris_azimuth_deg: f64,
    pub ris_spacing_wavelengths: f64,
    pub bs: [f64; 2],
    pub ue: [f64; 2],
    pub ris: [f64; 2],
    pub sweep: SweepSpec,
    pub grid: GridSpec,
    pub trace: TraceSettings,
    pub path_filter: PathFilter,
    pub policy: PolicyName,
    pub seed: u64,
    /// Seeds averaged by the random policy in the RIS size table.
    pub random_trials: usize,
    pub ris_enabled: bool,
    /// When non-empty, A-type runs also emit the RIS size table at DF1.
    pub ris_sizes: Vec<usize>,
    pub coverage_modes: Vec<CoverageMode>,
}

fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::InvalidConfig(format!("cannot parse config: {e}")))
}

/// Recursively overlays `top` onto `base` (objects merge, everything else replaces).
fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Parses the value side of `key=value`: JSON when it parses, a bare string otherwise.
fn override_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Applies one `dotted.key=value` override to a JSON tree.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::InvalidConfig(format!("override `{assignment}` is not key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::InvalidConfig(format!("malformed override key `{key}`")));
    }
    let mut node = root;
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::InvalidConfig(format!("override `{key}` descends into a non-object")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), override_value(raw.trim()));
            return Ok(());
        }
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!("loop returns on the last key part")
}

impl ScenarioConfig {
    /// The shipped preset for `kind`.
    pub fn preset(kind: ScenarioKind) -> Self {
        serde_json::from_str(kind.preset_text()).expect("bundled presets are valid")
    }

    fn preset_value(kind: ScenarioKind) -> Value {
        serde_json::from_str(kind.preset_text()).expect("bundled presets are valid")
    }

    /// Resolves a (possibly partial) JSON config plus overrides.
    ///
    /// Missing fields come from the preset named by `scenario`; a run manifest
    /// (an object with a `config` member) is accepted in place of a config.
    pub fn resolve(text: &str, overrides: &[String]) -> Result<Self> {
        let mut user = parse_json(text)?;
        if let Some(inner) = user.get("config").filter(|_| user.get("tool_version").is_some()) {
            user = inner.clone();
        }
        if !user.is_object() {
            return Err(Error::InvalidConfig("config must be a JSON object".into()));
        }
        // The scenario may itself be overridden, so apply overrides to a scratch copy first.
        let mut probe = user.clone();
        for o in overrides {
            apply_override(&mut probe, o)?;
        }
        let kind: ScenarioKind = match probe.get("scenario") {
            Some(Value::String(s)) => s.parse()?,
            Some(_) => return Err(Error::InvalidConfig("`scenario` must be a string".into())),
            None => return Err(Error::InvalidConfig("missing `scenario`".into())),
        };
        let mut merged = Self::preset_value(kind);
        merge(&mut merged, user);
        for o in overrides {
            apply_override(&mut merged, o)?;
        }
        let cfg: Self =
            serde_json::from_value(merged).map_err(|e| Error::InvalidConfig(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>, overrides: &[String]) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read config {}: {e}", path.display())))?;
        Self::resolve(&text, overrides)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn wavelength(&self) -> f64 {
        crate::scalar::wavelength(self.freq_ghz)
    }

    pub fn trace_config(&self) -> TraceConfig {
        self.trace.to_trace_config()
    }

    pub fn coefficient_policy(&self) -> CoefficientPolicy {
        match self.policy {
            PolicyName::Optimal => CoefficientPolicy::Optimal,
            PolicyName::Unit => CoefficientPolicy::Unit,
            PolicyName::Random => CoefficientPolicy::Random { seed: self.seed },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.schema != CONFIG_SCHEMA_VERSION {
            return bad(format!("unsupported config schema {}", self.schema));
        }
        if self.preset_version != PRESET_VERSION {
            return bad(format!(
                "preset version {} not available (this build ships {PRESET_VERSION})",
                self.preset_version
            ));
        }
        let positive = [
            ("freq_ghz", self.freq_ghz),
            ("tx_height", self.tx_height),
            ("ue_height", self.ue_height),
            ("ris_height", self.ris_height),
            ("ris_spacing_wavelengths", self.ris_spacing_wavelengths),
            ("grid.spacing_wavelengths", self.grid.spacing_wavelengths),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        let finite = [
            ("ptx_dbm", self.ptx_dbm),
            ("ris_tilt_deg", self.ris_tilt_deg),
            ("ris_azimuth_deg", self.ris_azimuth_deg),
            ("bs.x", self.bs[0]),
            ("bs.y", self.bs[1]),
            ("ue.x", self.ue[0]),
            ("ue.y", self.ue[1]),
            ("ris.x", self.ris[0]),
            ("ris.y", self.ris[1]),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if !(self.sweep.step_m >= 0.0 && self.sweep.step_m.is_finite()) {
            return bad(format!("sweep.step_m must be non-negative, got {}", self.sweep.step_m));
        }
        let [dx, dy] = self.sweep.direction;
        if !(dx.is_finite() && dy.is_finite()) || dx.hypot(dy) == 0.0 {
            return bad("sweep.direction must be a nonzero finite vector".into());
        }
        if self.grid.nx == 0 || self.grid.ny == 0 {
            return bad("grid dimensions must be at least 1".into());
        }
        check_square(self.ris_elements)?;
        for &n in &self.ris_sizes {
            check_square(n)?;
        }
        if self.random_trials == 0 {
            return bad("random_trials must be at least 1".into());
        }
        if self.scenario == ScenarioKind::C && self.coverage_modes.is_empty() {
            return bad("coverage_modes must not be empty".into());
        }
        self.trace_config().validate()
    }

    /// Loads the referenced scene; relative paths resolve against `base_dir`.
    pub fn load_scene(&self, base_dir: Option<&Path>) -> Result<Scene> {
        Scene::from_json_str(&self.scene_text(base_dir)?)
    }

    /// Raw JSON of the referenced scene (what a manifest hashes).
    pub fn scene_text(&self, base_dir: Option<&Path>) -> Result<String> {
        match self.scene.strip_prefix("bundled:") {
            Some(name) => Ok(crate::scene::bundled_scene_text(name)?.to_string()),
            None => {
                let path = self.scene_path(base_dir).expect("not bundled");
                std::fs::read_to_string(&path).map_err(|source| Error::SceneIo { path, source })
            }
        }
    }

    /// The scene file path, `None` for bundled scenes.
    pub fn scene_path(&self, base_dir: Option<&Path>) -> Option<PathBuf> {
        if self.scene.starts_with("bundled:") {
            return None;
        }
        let p = PathBuf::from(&self.scene);
        Some(match base_dir {
            Some(b) if p.is_relative() => b.join(p),
            _ => p,
        })
    }
}

/// Side length of a square array with `n` elements.
pub fn check_square(n: usize) -> Result<usize> {
    let side = (n as f64).sqrt().round() as usize;
    if n == 0 || side * side != n {
        return Err(Error::InvalidConfig(format!(
            "RIS size {n} is not a positive perfect square"
        )));
    }
    Ok(side)
}
