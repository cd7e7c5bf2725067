//! Flat JSON run configuration.

use std::fs;
use std::path::Path;

use admittance::simulator::{Integrator, Scenario, Wall};
use admittance::stiffness::GridSpec;
use admittance::sweep::{self, Criterion, SimulatedSweep};
use admittance::{AdmittanceParams, StiffnessMatrix};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<admittance::Error> for ConfigError {
    fn from(e: admittance::Error) -> Self {
        ConfigError(e.to_string())
    }
}

fn default_force() -> [f64; 2] {
    [0.0, 10.0]
}
fn default_duration() -> f64 {
    5.0
}
fn default_dt() -> f64 {
    1e-3
}
fn default_d_samples() -> usize {
    400
}
fn default_axis_spec() -> [f64; 3] {
    [-80.0, 80.0, 10.0]
}
fn default_d_increment() -> f64 {
    0.1
}
fn default_window() -> f64 {
    sweep::Criterion::default().window
}
fn default_threshold() -> f64 {
    sweep::Criterion::default().threshold
}
fn default_field_extent() -> f64 {
    0.1
}
fn default_field_points() -> usize {
    21
}
fn default_draws() -> usize {
    10_000
}

/// Every recognised key. Unknown keys are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub m: f64,
    pub d: f64,
    pub kx: f64,
    pub ky: f64,
    pub ks: f64,
    pub ka: f64,

    #[serde(default = "default_force")]
    pub force: [f64; 2],
    #[serde(default = "default_duration")]
    pub duration: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub integrator: Integrator,
    /// Replaces `d` with `damping_from_zeta(zeta)` when set.
    #[serde(default)]
    pub zeta: Option<f64>,
    #[serde(default)]
    pub wall: Option<Wall>,

    /// Root-locus damper range `[lo, hi]` in N·s/m.
    #[serde(default)]
    pub d_range: Option<[f64; 2]>,
    #[serde(default = "default_d_samples")]
    pub d_samples: usize,

    /// Sweep axes as `[lo, hi, step]`.
    #[serde(default = "default_axis_spec")]
    pub ks_axis: [f64; 3],
    #[serde(default = "default_axis_spec")]
    pub ka_axis: [f64; 3],
    #[serde(default = "default_d_increment")]
    pub d_increment: f64,
    #[serde(default = "default_window")]
    pub window: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,

    #[serde(default = "default_field_extent")]
    pub field_extent: f64,
    #[serde(default = "default_field_points")]
    pub field_points: usize,

    #[serde(default = "default_draws")]
    pub draws: usize,
    #[serde(default)]
    pub seed: u64,
}

/// The configuration used when no file is given: the reference parameters at d = 0.34.
pub fn reference_config() -> Map<String, Value> {
    let p = AdmittanceParams::reference(0.34);
    let mut map = Map::new();
    for (key, v) in [
        ("m", p.m),
        ("d", p.d),
        ("kx", p.k.kx),
        ("ky", p.k.ky),
        ("ks", p.k.ks),
        ("ka", p.k.ka),
    ] {
        map.insert(key.into(), v.into());
    }
    map
}

fn parse_override(raw: &str) -> Result<(String, Value), ConfigError> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| ConfigError(format!("override `{raw}` is not key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(ConfigError(format!("override `{raw}` has an empty key")));
    }
    let value = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
    Ok((key.to_string(), value))
}

pub struct Loaded {
    pub config: RunConfig,
    pub hash: String,
}

/// Reads the file (or the reference default), applies overrides and validates.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Loaded, ConfigError> {
    let mut map = match path {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
            match serde_json::from_str::<Value>(&text) {
                Ok(Value::Object(map)) => map,
                Ok(_) => {
                    return Err(ConfigError(format!(
                        "{}: config must be a JSON object",
                        path.display()
                    )))
                }
                Err(e) => return Err(ConfigError(format!("{}: {e}", path.display()))),
            }
        }
        None => reference_config(),
    };
    for raw in overrides {
        let (key, value) = parse_override(raw)?;
        map.insert(key, value);
    }
    let value = Value::Object(map);
    let config: RunConfig =
        serde_json::from_value(value.clone()).map_err(|e| ConfigError(format!("config: {e}")))?;
    config.validate()?;
    Ok(Loaded {
        config,
        hash: hash(&value),
    })
}

/// SHA-256 of the merged configuration in canonical (sorted-key) JSON.
pub fn hash(value: &Value) -> String {
    let canonical = serde_json::to_vec(value).expect("json values serialize");
    hex::encode(Sha256::digest(canonical))
}

impl RunConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        self.params()?;
        self.scenario()?.validate()?;
        if let Some(z) = self.zeta {
            if !(z.is_finite() && z >= 0.0) {
                return Err(ConfigError(format!("zeta: must be >= 0, got {z}")));
            }
        }
        Ok(())
    }

    pub fn stiffness(&self) -> Result<StiffnessMatrix, ConfigError> {
        StiffnessMatrix::new(self.kx, self.ky, self.ks, self.ka).map_err(Into::into)
    }

    /// Admittance parameters, with `d` taken from `zeta` when given.
    pub fn params(&self) -> Result<AdmittanceParams, ConfigError> {
        let k = self.stiffness()?;
        let d = match self.zeta {
            Some(z) => admittance::simulator::damping_from_zeta(&k, self.m, z)?,
            None => self.d,
        };
        AdmittanceParams::new(self.m, d, k).map_err(Into::into)
    }

    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let mut sc = Scenario::step_force(self.force, self.duration, self.dt)
            .with_integrator(self.integrator);
        sc.wall = self.wall;
        Ok(sc)
    }

    pub fn axes(&self) -> Result<(Vec<f64>, Vec<f64>), ConfigError> {
        let [a, b, c] = self.ks_axis;
        let [x, y, z] = self.ka_axis;
        Ok((sweep::axis(a, b, c)?, sweep::axis(x, y, z)?))
    }

    pub fn sweep(&self, workers: usize) -> SimulatedSweep {
        SimulatedSweep {
            d_increment: self.d_increment,
            duration: self.duration,
            dt: self.dt,
            force: self.force,
            criterion: Criterion {
                window: self.window,
                threshold: self.threshold,
            },
            integrator: self.integrator,
            workers,
        }
    }

    pub fn field_grid(&self) -> GridSpec {
        GridSpec::square(self.field_extent, self.field_points)
    }
}
