//! Scenario files: a versioned TOML schema (conventionally saved as
//! `.cfg`) that fully determines a batch run. Parsing failures carry the
//! file line and column; semantic failures name the offending field.
//!
//! Schema (version 1):
//!
//! ```toml
//! schema = 1
//!
//! [run]
//! dt = 1e-3                  # integration step, s
//! horizon = 25.0             # run length, s (must be a whole number of steps)
//! window = [8.0, 25.0]       # statistics window, s
//! seeds = [1, 2, 3]
//! filter = "both"            # "semi-direct" | "direct" | "both"
//! chart = "matrix"           # "matrix" | "quaternion" | "both"
//! noise_scaling = "per-sample"   # or "sqrt-dt"
//! out = "runs/bench"         # output directory (optional, default "out")
//!
//! [scene]
//! vectors = [[x, y, z], ...]     # raw inertial reference directions
//! augment = true                 # append the cross product of the two vectors
//! vector_weights = [1.0, 1.0, 1.0]   # one per vector after augmentation
//! landmarks = [[x, y, z], ...]
//! landmark_weights = [1.0]
//!
//! [profile]                  # truth body velocities
//! kind = "sinusoids"         # "zero" | "constant" | "sinusoids"
//! # constant: omega = [x, y, z], v = [x, y, z]
//! # sinusoids: per axis, amp * sin(freq * t + phase), freq in rad/s
//! omega = [{ amp = 1.0, freq = 0.5, phase = 0.0 }, ...]
//! v     = [{ amp = 1.0, freq = 0.2, phase = 0.0 }, ...]
//!
//! [noise]
//! b_omega = [x, y, z]        # constant rate-gyro bias
//! b_v = [x, y, z]            # constant linear-velocity bias
//! std_omega = [x, y, z]      # per-axis white-noise STD
//! std_v = [x, y, z]
//! vector_bias = [[x, y, z], ...]   # one per raw (pre-augmentation) vector
//! vector_std = 0.1
//! landmark_bias = [[x, y, z], ...]
//! landmark_std = 0.1
//!
//! [gains]                    # optional, defaults shown
//! k_w = 8.0
//! gamma_b = 1.0
//! gamma_sigma = 1.0
//! k_b = 0.1
//! k_sigma = 0.1
//! varrho = 0.2
//!
//! [initial]                  # optional estimator start, default identity at origin
//! angle = 2.9670597283903604     # rad
//! axis = [3.0, 10.0, 8.0]        # normalized on load
//! position = [4.0, -3.0, 5.0]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use liepose::filters::Gains;
use liepose::sim::{check_assumption1, NoiseModel, NoiseScaling, Scene, Sinusoid, VelocityProfile};
use liepose::{Rotation, Vec3};

use crate::error::HarnessError;

pub const SCHEMA_VERSION: u32 = 1;

/// Filter selection as it appears in configs and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FilterSel {
    SemiDirect,
    Direct,
    Both,
}

/// Attitude chart selection as it appears in configs and on the command
/// line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ChartSel {
    Matrix,
    Quaternion,
    Both,
}

/// One concrete estimator variant after expanding `both`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Filter {
    SemiDirect,
    Direct,
}

impl Filter {
    pub fn as_str(self) -> &'static str {
        match self {
            Filter::SemiDirect => "semi-direct",
            Filter::Direct => "direct",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Chart {
    Matrix,
    Quaternion,
}

impl Chart {
    pub fn as_str(self) -> &'static str {
        match self {
            Chart::Matrix => "matrix",
            Chart::Quaternion => "quaternion",
        }
    }
}

impl FilterSel {
    pub fn expand(self) -> Vec<Filter> {
        match self {
            FilterSel::SemiDirect => vec![Filter::SemiDirect],
            FilterSel::Direct => vec![Filter::Direct],
            FilterSel::Both => vec![Filter::SemiDirect, Filter::Direct],
        }
    }
}

impl ChartSel {
    pub fn expand(self) -> Vec<Chart> {
        match self {
            ChartSel::Matrix => vec![Chart::Matrix],
            ChartSel::Quaternion => vec![Chart::Quaternion],
            ChartSel::Both => vec![Chart::Matrix, Chart::Quaternion],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema: u32,
    pub run: RunSection,
    pub scene: SceneSection,
    pub profile: ProfileSection,
    pub noise: NoiseSection,
    #[serde(default)]
    pub gains: GainsSection,
    #[serde(default)]
    pub initial: InitialSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub dt: f64,
    pub horizon: f64,
    pub window: [f64; 2],
    pub seeds: Vec<u64>,
    pub filter: FilterSel,
    pub chart: ChartSel,
    #[serde(default = "default_scaling")]
    pub noise_scaling: ScalingSel,
    #[serde(default = "default_out")]
    pub out: String,
}

fn default_out() -> String {
    "out".to_string()
}

fn default_scaling() -> ScalingSel {
    ScalingSel::PerSample
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingSel {
    PerSample,
    SqrtDt,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSection {
    pub vectors: Vec<[f64; 3]>,
    pub augment: bool,
    pub vector_weights: Vec<f64>,
    pub landmarks: Vec<[f64; 3]>,
    pub landmark_weights: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSection {
    Zero,
    Constant {
        omega: [f64; 3],
        v: [f64; 3],
    },
    Sinusoids {
        omega: [SinusoidCfg; 3],
        v: [SinusoidCfg; 3],
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinusoidCfg {
    pub amp: f64,
    pub freq: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub b_omega: [f64; 3],
    pub b_v: [f64; 3],
    pub std_omega: [f64; 3],
    pub std_v: [f64; 3],
    pub vector_bias: Vec<[f64; 3]>,
    pub vector_std: f64,
    pub landmark_bias: Vec<[f64; 3]>,
    pub landmark_std: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsSection {
    #[serde(default = "d_k_w")]
    pub k_w: f64,
    #[serde(default = "d_one")]
    pub gamma_b: f64,
    #[serde(default = "d_one")]
    pub gamma_sigma: f64,
    #[serde(default = "d_tenth")]
    pub k_b: f64,
    #[serde(default = "d_tenth")]
    pub k_sigma: f64,
    #[serde(default = "d_varrho")]
    pub varrho: f64,
}

fn d_k_w() -> f64 {
    8.0
}
fn d_one() -> f64 {
    1.0
}
fn d_tenth() -> f64 {
    0.1
}
fn d_varrho() -> f64 {
    0.2
}

impl Default for GainsSection {
    fn default() -> Self {
        GainsSection {
            k_w: d_k_w(),
            gamma_b: d_one(),
            gamma_sigma: d_one(),
            k_b: d_tenth(),
            k_sigma: d_tenth(),
            varrho: d_varrho(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default)]
    pub angle: f64,
    #[serde(default = "d_axis")]
    pub axis: [f64; 3],
    #[serde(default)]
    pub position: [f64; 3],
}

fn d_axis() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection {
            angle: 0.0,
            axis: d_axis(),
            position: [0.0, 0.0, 0.0],
        }
    }
}

/// Command-line overrides applied on top of the scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub filter: Option<FilterSel>,
    pub chart: Option<ChartSel>,
    pub seeds: Option<Vec<u64>>,
    pub out: Option<PathBuf>,
    pub dt: Option<f64>,
}

/// A validated, fully expanded run description built from library types.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub name: String,
    pub dt: f64,
    pub steps: usize,
    pub horizon: f64,
    pub window: (f64, f64),
    pub seeds: Vec<u64>,
    pub filters: Vec<Filter>,
    pub charts: Vec<Chart>,
    pub scaling: NoiseScaling,
    pub out: PathBuf,
    pub scene: Scene<f64>,
    pub noise: NoiseModel<f64>,
    pub profile: VelocityProfile<f64>,
    pub gains: Gains<f64>,
    pub rot0: Rotation,
    pub p0: Vec3,
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<Resolved, HarnessError> {
    let file = parse_file(path)?;
    resolve(path, &file, overrides)
}

/// Reads and deserializes a scenario file without semantic validation.
pub fn parse_file(path: &Path) -> Result<ScenarioFile, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(HarnessError::io(path))?;
    toml::from_str(&text).map_err(|e| {
        let (line, col) = e.span().map(|s| line_col(&text, s.start)).unwrap_or((0, 0));
        HarnessError::Parse {
            path: path.to_path_buf(),
            line,
            col,
            msg: e.message().to_string(),
        }
    })
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let clamped = offset.min(text.len());
    let mut line = 1;
    let mut col = 1;
    for c in text[..clamped].chars() {
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

fn resolve(
    path: &Path,
    file: &ScenarioFile,
    overrides: &Overrides,
) -> Result<Resolved, HarnessError> {
    let invalid = |field: &str, msg: String| HarnessError::Invalid {
        path: path.to_path_buf(),
        field: field.to_string(),
        msg,
    };

    if file.schema != SCHEMA_VERSION {
        return Err(invalid(
            "schema",
            format!(
                "unsupported schema version {} (this build reads {SCHEMA_VERSION})",
                file.schema
            ),
        ));
    }

    let dt = overrides.dt.unwrap_or(file.run.dt);
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid(
            "run.dt",
            format!("must be positive and finite, got {dt}"),
        ));
    }
    let horizon = file.run.horizon;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(invalid(
            "run.horizon",
            format!("must be positive and finite, got {horizon}"),
        ));
    }
    let steps_f = horizon / dt;
    let steps = steps_f.round();
    if (steps_f - steps).abs() > 1e-6 || steps < 1.0 {
        return Err(invalid(
            "run.dt",
            format!("horizon {horizon} is not a whole number of steps of {dt}"),
        ));
    }
    let steps = steps as usize;

    let [t0, t1] = file.run.window;
    if !(t0 >= 0.0 && t0 < t1 && t1 <= horizon + 1e-12) {
        return Err(invalid(
            "run.window",
            format!("need 0 <= t0 < t1 <= horizon, got [{t0}, {t1}] with horizon {horizon}"),
        ));
    }

    let mut seeds = overrides
        .seeds
        .clone()
        .unwrap_or_else(|| file.run.seeds.clone());
    if seeds.is_empty() {
        return Err(invalid("run.seeds", "at least one seed is required".into()));
    }
    seeds.sort_unstable();
    let before = seeds.len();
    seeds.dedup();
    if seeds.len() != before {
        return Err(invalid("run.seeds", "duplicate seeds".into()));
    }

    let vec3 = |a: &[f64; 3]| Vec3::new(a[0], a[1], a[2]);

    let scene = build_scene(path, &file.scene)?;

    let noise = NoiseModel {
        b_omega: vec3(&file.noise.b_omega),
        b_v: vec3(&file.noise.b_v),
        std_omega: vec3(&file.noise.std_omega),
        std_v: vec3(&file.noise.std_v),
        vector_bias: file.noise.vector_bias.iter().map(vec3).collect(),
        vector_std: file.noise.vector_std,
        landmark_bias: file.noise.landmark_bias.iter().map(vec3).collect(),
        landmark_std: file.noise.landmark_std,
    };
    noise
        .validate(&scene)
        .map_err(|e| invalid("noise", e.to_string()))?;

    let report = check_assumption1(&scene).map_err(|e| invalid("scene", e.to_string()))?;
    if !report.satisfied {
        return Err(HarnessError::Precondition(format!(
            "scene is not observable: vector set rank {} of 3 \
             (smallest singular value {:.3e}), {} landmark(s)",
            report.rank, report.smallest_singular_value, report.n_landmarks
        )));
    }

    let profile = match &file.profile {
        ProfileSection::Zero => VelocityProfile::Zero,
        ProfileSection::Constant { omega, v } => VelocityProfile::Constant {
            omega: vec3(omega),
            v: vec3(v),
        },
        ProfileSection::Sinusoids { omega, v } => {
            let conv = |c: &SinusoidCfg| Sinusoid {
                amp: c.amp,
                freq: c.freq,
                phase: c.phase,
            };
            let all = omega.iter().chain(v.iter());
            for (i, c) in all.enumerate() {
                if ![c.amp, c.freq, c.phase].iter().all(|x| x.is_finite()) {
                    return Err(invalid(
                        "profile",
                        format!("sinusoid {i} has non-finite parameters"),
                    ));
                }
            }
            VelocityProfile::Sinusoids {
                omega: [conv(&omega[0]), conv(&omega[1]), conv(&omega[2])],
                v: [conv(&v[0]), conv(&v[1]), conv(&v[2])],
            }
        }
    };

    let g = &file.gains;
    let gains = Gains::new(g.k_w, g.gamma_b, g.gamma_sigma, g.k_b, g.k_sigma, g.varrho)
        .map_err(|e| HarnessError::Precondition(e.to_string()))?;

    let init = &file.initial;
    if !init.angle.is_finite() {
        return Err(invalid("initial.angle", "must be finite".into()));
    }
    let axis = vec3(&init.axis);
    let axis_norm = axis.norm();
    if !(axis_norm > 1e-9 && axis_norm.is_finite()) {
        return Err(invalid(
            "initial.axis",
            format!("must have a usable norm, got {axis_norm:.3e}"),
        ));
    }
    let rot0 = Rotation::angle_axis(init.angle, &(axis / axis_norm))
        .map_err(|e| invalid("initial", e.to_string()))?;

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".to_string());

    Ok(Resolved {
        name,
        dt,
        steps,
        horizon,
        window: (t0, t1),
        seeds,
        filters: overrides.filter.unwrap_or(file.run.filter).expand(),
        charts: overrides.chart.unwrap_or(file.run.chart).expand(),
        scaling: match file.run.noise_scaling {
            ScalingSel::PerSample => NoiseScaling::PerSample,
            ScalingSel::SqrtDt => NoiseScaling::SqrtDt,
        },
        out: overrides
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from(&file.run.out)),
        scene,
        noise,
        profile,
        gains,
        rot0,
        p0: vec3(&init.position),
    })
}

/// Builds and structurally validates the observation scene from its
/// config section.
pub fn build_scene(path: &Path, section: &SceneSection) -> Result<Scene<f64>, HarnessError> {
    let invalid = |field: &str, msg: String| HarnessError::Invalid {
        path: path.to_path_buf(),
        field: field.to_string(),
        msg,
    };
    let vec3 = |a: &[f64; 3]| Vec3::new(a[0], a[1], a[2]);
    if section.vectors.len() < 2 {
        return Err(invalid(
            "scene.vectors",
            format!(
                "at least two reference directions are required, got {}",
                section.vectors.len()
            ),
        ));
    }
    let scene = Scene {
        inertial_vectors: section.vectors.iter().map(vec3).collect(),
        augment: section.augment,
        weights_vectors: section.vector_weights.clone(),
        landmarks: section.landmarks.iter().map(vec3).collect(),
        weights_landmarks: section.landmark_weights.clone(),
    };
    scene
        .validate()
        .map_err(|e| invalid("scene", e.to_string()))?;
    Ok(scene)
}

/// Parses a seed list of the form `1,2,10-14`.
pub fn parse_seed_list(text: &str) -> Result<Vec<u64>, String> {
    let mut seeds = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            return Err("empty entry in seed list".to_string());
        }
        match part.split_once('-') {
            Some((a, b)) => {
                let lo: u64 = a.trim().parse().map_err(|_| format!("bad seed `{a}`"))?;
                let hi: u64 = b.trim().parse().map_err(|_| format!("bad seed `{b}`"))?;
                if lo > hi {
                    return Err(format!("descending range `{part}`"));
                }
                seeds.extend(lo..=hi);
            }
            None => seeds.push(part.parse().map_err(|_| format!("bad seed `{part}`"))?),
        }
    }
    Ok(seeds)
}
