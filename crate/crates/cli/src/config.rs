//! Experiment configuration, read from a single TOML file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use rankone_core::groups::GroupPresentation;
use rankone_core::presets;
use rankone_core::spaces::{CayleyTree, H2Point, E2Point, ModelPoint, ModelSpace};
use rankone_core::word::Word;

/// A configuration that could not be read or does not describe a valid run.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Seed for the sampled property checks. Required even by commands that
    /// draw no samples, so that every archived config is complete.
    pub seed: u64,
    pub space: SpaceConfig,
    #[serde(default)]
    pub group: Option<GroupConfig>,
    #[serde(default)]
    pub points: PointsConfig,
    #[serde(default)]
    pub orbit: OrbitConfig,
    #[serde(default)]
    pub measures: MeasuresConfig,
    #[serde(default)]
    pub dynamics: DynamicsConfig,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub thresholds: ThresholdConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    H2,
    Tree,
    E2,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub model: Model,
    /// Tree rank; defaults to 2.
    #[serde(default)]
    pub rank: Option<usize>,
    /// Tree edge length per generator; defaults to all 1.
    #[serde(default)]
    pub edge_lengths: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GroupConfig {
    /// The free group acting on the configured tree.
    FreeTree,
    /// The shipped two-generator Schottky group in H2.
    Schottky,
    /// Translations along disk diameters at the given angles.
    DiameterSchottky { axes: Vec<f64>, lengths: Vec<f64> },
    /// A single translation along a diameter.
    Cyclic { length: f64 },
}

/// A point given as coordinates (`[x, y]`, upper half-plane for H2) or as a
/// group word applied to the basepoint (`""` is the basepoint itself).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Coordinates([f64; 2]),
    Word(String),
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointsConfig {
    #[serde(default)]
    pub x: Option<PointSpec>,
    #[serde(default)]
    pub y: Option<PointSpec>,
    /// Second basepoint for the conformality check.
    #[serde(default)]
    pub x_prime: Option<PointSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrbitConfig {
    pub radius: f64,
    /// Fitting window for the critical exponent; defaults to `(R/3, R)`.
    pub window: Option<[f64; 2]>,
    pub budget: u64,
    pub audit_radius: f64,
    pub margin_depth: usize,
    /// Write every orbit element to `orbit_ball.csv`.
    pub write_ball: bool,
    /// Grid step of `counting_curve.csv`.
    pub counting_step: f64,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        OrbitConfig {
            radius: 8.0,
            window: None,
            budget: 10_000_000,
            audit_radius: 6.0,
            margin_depth: 6,
            write_ball: true,
            counting_step: 0.05,
        }
    }
}

impl OrbitConfig {
    pub fn window(&self) -> (f64, f64) {
        match self.window {
            Some([a, b]) => (a, b),
            None => (self.radius / 3.0, self.radius),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasuresConfig {
    /// Partition resolution: `2^k` arcs or depth-`k` cylinders.
    pub k: usize,
    /// Exponent `s`; defaults to `δ̂(1 + 1/R)`.
    pub exponent: Option<f64>,
    /// Overrides the estimated critical exponent.
    pub delta_hat: Option<f64>,
    /// Cells lighter than this in either measure are left out of the
    /// conformality residual.
    pub floor: f64,
    /// Also write the Gromov-product current.
    pub current: bool,
}

impl Default for MeasuresConfig {
    fn default() -> Self {
        MeasuresConfig { k: 6, exponent: None, delta_hat: None, floor: 1e-4, current: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Arithmetic,
    NonArithmetic,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    /// `[lo, hi, step]` for the counting asymptotics; defaults to `[R/3, R, 0.05]`.
    #[serde(default)]
    pub counting_grid: Option<[f64; 3]>,
    /// Arithmetic period to look for; defaults to the length-spectrum test's `c`.
    #[serde(default)]
    pub period_hint: Option<f64>,
    /// Longest cyclically reduced word in the length-spectrum sample.
    #[serde(default = "default_spectrum_len")]
    pub spectrum_word_length: usize,
    #[serde(default)]
    pub mixing: Option<MixingConfig>,
    #[serde(default)]
    pub equidist: Option<EquidistConfig>,
    /// Which side of the arithmetic dichotomy the group should land on; the
    /// corresponding conjunction of checks becomes a band.
    #[serde(default)]
    pub expect: Option<Expectation>,
}

fn default_spectrum_len() -> usize {
    6
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixingConfig {
    pub r: f64,
    /// `[lo, hi, step]`.
    pub t_grid: [f64; 3],
    pub k: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquidistConfig {
    pub t_grid: Vec<f64>,
    /// Pairs of generator letters; each letter stands for a hat on its
    /// ping-pong domain. Ratios are taken against the first pair.
    pub pairs: Vec<[String; 2]>,
    #[serde(default = "default_ramp")]
    pub ramp: f64,
    /// Partition resolution of the PS oracle.
    #[serde(default = "default_equidist_k")]
    pub k: usize,
}

fn default_ramp() -> f64 {
    0.1
}

fn default_equidist_k() -> usize {
    10
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// Cocycle, equivariance, unit speed, Gromov product and cross ratio on
    /// random samples of the configured model.
    Properties,
    /// The H2 corridor configuration of C. Pittet.
    Pittet,
    /// Refined shadows in the plane that fail to converge.
    EuclidShadow,
    /// The closed form of boundary shadows in the 4-regular tree.
    TreeShadow,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub samples: usize,
    pub checks: Vec<Check>,
    /// Shadow radius of the plane example.
    pub euclid_radius: f64,
    /// The plane example uses `z_n` for `n = 1..=euclid_n`.
    pub euclid_n: usize,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig { samples: 1000, checks: vec![Check::Properties], euclid_radius: 1.0, euclid_n: 5 }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdConfig {
    pub converging_ratio: f64,
    /// Trailing max/min of the counting values required by the
    /// non-arithmetic expectation.
    pub counting_band: f64,
    pub period_tolerance: f64,
    pub decay_fraction: f64,
    /// Trailing relative oscillation of the mixing series required by the
    /// non-arithmetic expectation.
    pub mixing_band: f64,
    pub conformality_bound: f64,
    pub theorem_b_tolerance: f64,
    pub property_tolerance: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            converging_ratio: 1.2,
            counting_band: 1.5,
            period_tolerance: 0.05,
            decay_fraction: 0.5,
            mixing_band: 0.3,
            conformality_bound: 0.15,
            theorem_b_tolerance: 0.15,
            property_tolerance: 1e-9,
        }
    }
}

impl ThresholdConfig {
    pub fn counting(&self) -> rankone_core::dynamics::Thresholds {
        rankone_core::dynamics::Thresholds {
            converging_ratio: self.converging_ratio,
            period_tolerance: self.period_tolerance,
            decay_fraction: self.decay_fraction,
        }
    }
}

/// The resolved objects a command works with.
pub struct Setup {
    pub space: ModelSpace,
    pub group: Option<GroupPresentation>,
    pub x: ModelPoint,
    pub y: ModelPoint,
    pub x_prime: Option<ModelPoint>,
}

impl Setup {
    pub fn group(&self) -> anyhow::Result<&GroupPresentation> {
        self.group.as_ref().ok_or_else(|| ConfigError("this command needs a [group] section".into()).into())
    }
}

pub fn load(path: &Path) -> anyhow::Result<(ExperimentConfig, Vec<u8>)> {
    let bytes = std::fs::read(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    let cfg: ExperimentConfig =
        toml::from_str(text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    cfg.validate()?;
    Ok((cfg, bytes))
}

impl ExperimentConfig {
    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError(m));
        let o = &self.orbit;
        if !(o.radius >= 0.0 && o.radius.is_finite()) {
            return bad(format!("orbit.radius {} must be a nonnegative number", o.radius));
        }
        if !(o.counting_step > 0.0) {
            return bad(format!("orbit.counting_step {} must be positive", o.counting_step));
        }
        if self.measures.k == 0 {
            return bad("measures.k must be at least 1".into());
        }
        if let Some(m) = &self.dynamics.mixing {
            if !(m.r > 0.0 && m.t_grid[2] > 0.0) || m.k == 0 {
                return bad("dynamics.mixing needs r > 0, a positive grid step and k ≥ 1".into());
            }
        }
        if let Some(e) = &self.dynamics.equidist {
            if e.pairs.is_empty() || e.t_grid.is_empty() {
                return bad("dynamics.equidist needs at least one pair and one time".into());
            }
        }
        if let Some([_, _, step]) = self.dynamics.counting_grid {
            if !(step > 0.0) {
                return bad("dynamics.counting_grid step must be positive".into());
            }
        }
        Ok(())
    }

    pub fn resolve(&self) -> anyhow::Result<Setup> {
        let space = match self.space.model {
            Model::H2 => ModelSpace::H2,
            Model::E2 => ModelSpace::E2,
            Model::Tree => {
                let rank = self.space.rank.unwrap_or(2);
                let lengths = self.space.edge_lengths.clone().unwrap_or_else(|| vec![1.0; rank]);
                if lengths.len() != rank {
                    return Err(ConfigError(format!("{} edge lengths for rank {rank}", lengths.len())).into());
                }
                ModelSpace::Tree(CayleyTree::new(lengths).map_err(|e| ConfigError(e.to_string()))?)
            }
        };
        let group = match &self.group {
            None => None,
            Some(g) => Some(self.build_group(g, &space)?),
        };
        let base = match &group {
            Some(g) => g.basepoint.clone(),
            None => space.root(),
        };
        let point = |spec: &Option<PointSpec>, name: &str| -> anyhow::Result<Option<ModelPoint>> {
            let Some(spec) = spec else { return Ok(None) };
            let p = match (spec, &space) {
                (PointSpec::Coordinates([a, b]), ModelSpace::H2) => ModelPoint::H2(
                    H2Point::new(*a, *b).map_err(|e| ConfigError(format!("points.{name}: {e}")))?,
                ),
                (PointSpec::Coordinates([a, b]), ModelSpace::E2) => ModelPoint::E2(E2Point { x: *a, y: *b }),
                (PointSpec::Word(w), _) => match &group {
                    Some(g) => {
                        let word = Word::parse(w, g.rank()).map_err(|e| ConfigError(format!("points.{name}: {e}")))?;
                        g.act(&word, &base)?
                    }
                    None if w.is_empty() => base.clone(),
                    None => {
                        return Err(ConfigError(format!("points.{name}: words need a [group] section")).into())
                    }
                },
                (PointSpec::Coordinates(_), ModelSpace::Tree(_)) => {
                    return Err(ConfigError(format!("points.{name}: tree points are given as words")).into())
                }
            };
            space.check_point(&p).map_err(|e| ConfigError(format!("points.{name}: {e}")))?;
            Ok(Some(p))
        };
        let x = point(&self.points.x, "x")?.unwrap_or_else(|| base.clone());
        let y = point(&self.points.y, "y")?.unwrap_or_else(|| base.clone());
        let x_prime = point(&self.points.x_prime, "x_prime")?;
        Ok(Setup { space, group, x, y, x_prime })
    }

    fn build_group(&self, g: &GroupConfig, space: &ModelSpace) -> anyhow::Result<GroupPresentation> {
        let needs = |model: Model| -> Result<(), ConfigError> {
            if self.space.model == model {
                Ok(())
            } else {
                Err(ConfigError(format!("group preset does not act on the {:?} model", self.space.model)))
            }
        };
        let gp = match g {
            GroupConfig::FreeTree => {
                needs(Model::Tree)?;
                GroupPresentation::tree(space.clone())
            }
            GroupConfig::Schottky => {
                needs(Model::H2)?;
                presets::schottky()
            }
            GroupConfig::DiameterSchottky { axes, lengths } => {
                needs(Model::H2)?;
                presets::diameter_schottky(axes, lengths)
            }
            GroupConfig::Cyclic { length } => {
                needs(Model::H2)?;
                presets::cyclic(*length)
            }
        };
        gp.map_err(|e| ConfigError(format!("group: {e}")).into())
    }
}

/// `lo, lo + step, …, hi` from a `[lo, hi, step]` triple.
pub fn grid_of(g: [f64; 3]) -> Vec<f64> {
    rankone_core::dynamics::grid(g[0], g[1], g[2])
}
