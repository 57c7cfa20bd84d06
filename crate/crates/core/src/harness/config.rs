use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::detection::CfarConfig;
use crate::doa::PatchWindow;
use crate::isar::AutofocusConfig;
use crate::scene::{ClutterBand, JammerSource, PointTarget, RadarParams, RigidBodyTarget, SECTOR_HALF_WIDTH_DEG};
use crate::window::WindowKind;
use crate::{Error, Result};

/// Trial type: bearing accuracy, jammer cancellation, detection under
/// jamming, imaging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    T1,
    T2,
    T3,
    T4,
}

impl Mode {
    pub fn needs_jammer(self) -> bool {
        matches!(self, Mode::T2 | Mode::T3)
    }

    pub fn default_steering(self) -> Vec<f64> {
        match self {
            Mode::T2 => vec![-20.0, -10.0, 0.0, 10.0, 20.0],
            _ => vec![0.0],
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::T1 => "t1",
            Mode::T2 => "t2",
            Mode::T3 => "t3",
            Mode::T4 => "t4",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t1" => Ok(Mode::T1),
            "t2" => Ok(Mode::T2),
            "t3" => Ok(Mode::T3),
            "t4" => Ok(Mode::T4),
            _ => Err(Error::Config(format!("unknown mode '{s}' (expected t1, t2, t3 or t4)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProcessingConfig {
    pub window: WindowKind,
    pub doppler_oversample: usize,
    /// Diagonal loading above the estimated noise floor.
    pub loading_db: f64,
    /// Half-size of the box kept out of covariance training and the
    /// rejection measurement around each declared target.
    pub target_guard: usize,
    pub cfar: CfarConfig,
    pub patch: PatchWindow,
    /// MUSIC search grid.
    pub music_start_deg: f64,
    pub music_stop_deg: f64,
    pub music_step_deg: f64,
    /// Defaults to 1 in T1 and 2 in T3.
    pub n_sources: Option<usize>,
    /// MUSIC is run on at most this many detections, strongest first.
    pub max_detections: usize,
    pub beamscan_step_deg: f64,
}

impl Default for ProcessingConfig {
    fn default() -> Self {
        Self {
            window: WindowKind::Hann,
            doppler_oversample: 1,
            loading_db: 10.0,
            target_guard: 3,
            cfar: CfarConfig::default(),
            patch: PatchWindow::default(),
            music_start_deg: -30.0,
            music_stop_deg: 30.0,
            music_step_deg: 0.05,
            n_sources: None,
            max_detections: 16,
            beamscan_step_deg: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IsarConfig {
    pub body: RigidBodyTarget,
    pub n_dwells: usize,
    /// Range bins kept either side of the body centre.
    pub half_window: usize,
    pub align_order: usize,
    pub phase_order: usize,
    /// Extra slow-time phase `c2, c3, ...` applied before autofocus, to
    /// exercise it on a known error.
    pub injected_phase: Vec<f64>,
    /// Rotation rate used for cross-range scaling; defaults to the body's.
    pub omega: Option<f64>,
    pub n_scatterers: usize,
    pub autofocus: AutofocusConfig,
}

impl Default for IsarConfig {
    fn default() -> Self {
        Self {
            body: RigidBodyTarget::default(),
            n_dwells: 32,
            half_window: 10,
            align_order: 2,
            phase_order: 3,
            injected_phase: Vec::new(),
            omega: None,
            n_scatterers: 3,
            autofocus: AutofocusConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub seed: u64,
    /// MVDR (true) or conventional (false) beam for detection.
    pub adaptive: bool,
    /// Empty means the mode default.
    pub steering_deg: Vec<f64>,
    /// Dwells simulated for T1/T3 (independent noise per dwell).
    pub n_dwells: usize,
    pub noise_power: f64,
    /// Ground-truth track CSV, relative to the config file.
    pub truth_file: Option<PathBuf>,
    /// Bearing of the array boresight, used with track headings for spans.
    pub boresight_deg: f64,
    pub radar: RadarParams,
    pub targets: Vec<PointTarget>,
    pub jammer: JammerSource,
    pub clutter: ClutterBand,
    pub processing: ProcessingConfig,
    pub isar: IsarConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::T1,
            seed: 0,
            adaptive: false,
            steering_deg: Vec::new(),
            n_dwells: 1,
            noise_power: 1.0,
            truth_file: None,
            boresight_deg: 0.0,
            radar: RadarParams::default(),
            targets: vec![PointTarget {
                range_m: 2500.0,
                radial_velocity_mps: 9.375,
                azimuth_deg: 0.0,
                snr_db: 25.0,
            }],
            jammer: JammerSource::default(),
            clutter: ClutterBand::default(),
            processing: ProcessingConfig::default(),
            isar: IsarConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Default configuration for a mode, with the jammer set as the mode
    /// requires.
    pub fn for_mode(mode: Mode) -> Self {
        let mut cfg = Self { mode, ..Self::default() };
        cfg.jammer.active = mode.needs_jammer();
        if mode == Mode::T3 {
            cfg.targets[0].snr_db = 15.0;
        }
        cfg
    }

    pub fn steering(&self) -> Vec<f64> {
        if self.steering_deg.is_empty() {
            self.mode.default_steering()
        } else {
            self.steering_deg.clone()
        }
    }

    pub fn n_sources(&self) -> usize {
        self.processing.n_sources.unwrap_or(match self.mode {
            Mode::T3 => 2,
            _ => 1,
        })
    }

    /// Checks everything that can be checked before any computation.
    pub fn validate(&self) -> Result<()> {
        if self.mode.needs_jammer() && !self.jammer.active {
            return Err(Error::Config(format!("mode {} requires jammer.active = true", self.mode)));
        }
        if !self.mode.needs_jammer() && self.jammer.active {
            return Err(Error::Config(format!("mode {} requires jammer.active = false", self.mode)));
        }
        for (i, s) in self.steering().iter().enumerate() {
            if !(s.abs() <= SECTOR_HALF_WIDTH_DEG) {
                return Err(Error::Config(format!(
                    "steering_deg[{i}] = {s} outside +/-{SECTOR_HALF_WIDTH_DEG} deg"
                )));
            }
        }
        if !(self.noise_power.is_finite() && self.noise_power > 0.0) {
            return Err(Error::Config(format!("noise_power must be positive, got {}", self.noise_power)));
        }
        if self.n_dwells == 0 {
            return Err(Error::Config("n_dwells must be at least 1".into()));
        }
        self.radar.validate().map_err(|e| Error::Config(format!("radar: {e}")))?;
        let p = &self.processing;
        if p.doppler_oversample == 0 {
            return Err(Error::Config("processing.doppler_oversample must be at least 1".into()));
        }
        p.cfar.validate().map_err(|e| Error::Config(format!("processing.{e}")))?;
        if !(p.music_step_deg > 0.0 && p.music_start_deg < p.music_stop_deg) {
            return Err(Error::Config("processing.music_* must describe an increasing grid".into()));
        }
        if p.music_start_deg <= -90.0 || p.music_stop_deg >= 90.0 {
            return Err(Error::Config("processing.music grid must stay inside (-90, 90) deg".into()));
        }
        if !(p.beamscan_step_deg > 0.0) {
            return Err(Error::Config("processing.beamscan_step_deg must be positive".into()));
        }
        let n_sources = self.n_sources();
        if !(1..=5).contains(&n_sources) {
            return Err(Error::Config(format!("processing.n_sources must be 1..=5, got {n_sources}")));
        }
        for (i, t) in self.targets.iter().enumerate() {
            if !(t.range_m >= self.radar.r_min_m && t.range_m <= self.radar.r_max_m) {
                return Err(Error::Config(format!(
                    "targets[{i}].range_m = {} outside [{}, {}]",
                    t.range_m, self.radar.r_min_m, self.radar.r_max_m
                )));
            }
            if !(t.azimuth_deg.abs() <= SECTOR_HALF_WIDTH_DEG) {
                return Err(Error::Config(format!("targets[{i}].azimuth_deg = {} outside sector", t.azimuth_deg)));
            }
        }
        if self.mode == Mode::T4 {
            let is = &self.isar;
            if is.body.scatterers.len() < 2 {
                return Err(Error::Config("isar.body needs at least two scatterers".into()));
            }
            if is.body.rotation_rate == 0.0 {
                return Err(Error::Config("isar.body.rotation_rate must be non-zero".into()));
            }
            if is.n_dwells == 0 {
                return Err(Error::Config("isar.n_dwells must be at least 1".into()));
            }
            if is.n_dwells * self.radar.n_pulses < 64 {
                return Err(Error::Config("isar needs at least 64 slow-time samples".into()));
            }
            if !(2..=4).contains(&is.phase_order) {
                return Err(Error::Config(format!("isar.phase_order must be 2..=4, got {}", is.phase_order)));
            }
            if is.omega.is_some_and(|w| !(w > 0.0)) {
                return Err(Error::Config("isar.omega must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Parses a TOML config. Unknown keys are collected and reported together.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut unknown = Vec::new();
    let de = toml::Deserializer::parse(text).map_err(|e| Error::Config(e.to_string()))?;
    let cfg: ExperimentConfig = serde_ignored::deserialize(de, |path| unknown.push(path.to_string()))
        .map_err(|e| Error::Config(e.to_string()))?;
    if !unknown.is_empty() {
        return Err(Error::Config(format!("unknown keys: {}", unknown.join(", "))));
    }
    Ok(cfg)
}

/// Reads and validates a config; a relative `truth_file` is resolved
/// against the config's directory.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = parse_config(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })?;
    if let Some(t) = &cfg.truth_file {
        if t.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.truth_file = Some(dir.join(t));
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn config_to_string(cfg: &ExperimentConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| Error::Config(e.to_string()))
}

pub fn write_config(cfg: &ExperimentConfig, path: &Path) -> Result<()> {
    std::fs::write(path, config_to_string(cfg)?)?;
    Ok(())
}
