//! TOML experiment configuration.
//!
//! Parsing happens in two stages: a raw mirror of the file (every field
//! optional, unknown keys rejected) and a resolution pass that fills in
//! the built-in default downlink study and validates the result. Powers
//! may be written as plain watts or as strings like `"50 dBm"` /
//! `"0.2 W"`; the conversion happens here and nowhere else — the math
//! core only ever sees watts.

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toma_core::channel::RadioParams;
use toma_core::geometry::Vec3;
use toma_core::optimizer::OptimizerParams;
use toma_core::scenarios::{RegionSpec, Scenario};

#[derive(Debug, Error)]
pub enum ConfigError {
    /// Syntax or schema errors; the message carries line/column context.
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("unreadable power {text:?}: expected watts, \"<x> W\", or \"<x> dBm\"")]
    Power { text: String },
    #[error(transparent)]
    Scenario(#[from] toma_core::scenarios::ScenarioError),
    #[error(transparent)]
    Optimizer(#[from] toma_core::optimizer::OptimizerError),
    #[error(transparent)]
    Radio(#[from] toma_core::channel::ChannelError),
}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        reason: reason.into(),
    }
}

// ---------------------------------------------------------------------
// Resolved experiment description.
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Convergence,
    SweepN,
    SweepEves,
    SweepMFixedBudget,
    SweepCableLength,
    SweepSphereRadius,
    SweepRician,
    AnalyzeTheorems,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::SweepN => "sweep_n",
            ExperimentKind::SweepEves => "sweep_eves",
            ExperimentKind::SweepMFixedBudget => "sweep_m_fixed_budget",
            ExperimentKind::SweepCableLength => "sweep_cable_length",
            ExperimentKind::SweepSphereRadius => "sweep_sphere_radius",
            ExperimentKind::SweepRician => "sweep_rician",
            ExperimentKind::AnalyzeTheorems => "analyze_theorems",
        }
    }

    /// Name of the quantity varied across cells, used as the CSV
    /// `sweep_param` column.
    pub fn sweep_param(self) -> &'static str {
        match self {
            ExperimentKind::Convergence => "outer_iter",
            ExperimentKind::SweepN => "n_per_cable",
            ExperimentKind::SweepEves => "num_eves",
            ExperimentKind::SweepMFixedBudget => "num_cables",
            ExperimentKind::SweepCableLength => "cable_len",
            ExperimentKind::SweepSphereRadius => "sphere_radius_m",
            ExperimentKind::SweepRician => "rician_factor",
            ExperimentKind::AnalyzeTheorems => "case",
        }
    }

    pub fn is_sweep(self) -> bool {
        !matches!(
            self,
            ExperimentKind::Convergence | ExperimentKind::AnalyzeTheorems
        )
    }

    /// Sweep values that must be positive integers.
    fn integer_valued(self) -> bool {
        matches!(
            self,
            ExperimentKind::SweepN | ExperimentKind::SweepEves | ExperimentKind::SweepMFixedBudget
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    TomaOpt,
    Horizontal,
    Vertical,
    Hybrid,
    FpaDense,
    FpaSparse,
    UpperBound,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::TomaOpt,
        Scheme::Horizontal,
        Scheme::Vertical,
        Scheme::Hybrid,
        Scheme::FpaDense,
        Scheme::FpaSparse,
        Scheme::UpperBound,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::TomaOpt => "toma_opt",
            Scheme::Horizontal => "horizontal",
            Scheme::Vertical => "vertical",
            Scheme::Hybrid => "hybrid",
            Scheme::FpaDense => "fpa_dense",
            Scheme::FpaSparse => "fpa_sparse",
            Scheme::UpperBound => "upper_bound",
        }
    }

}

/// A fully resolved experiment: every default applied, every invariant
/// checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub schemes: Vec<Scheme>,
    pub sweep: Vec<f64>,
    pub scenario: Scenario,
    pub optimizer: OptimizerParams,
}

// ---------------------------------------------------------------------
// Raw file mirror.
// ---------------------------------------------------------------------

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    experiment: Option<RawExperiment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    array: Option<RawArray>,
    #[serde(skip_serializing_if = "Option::is_none")]
    radio: Option<RawRadio>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scenario: Option<RawScenario>,
    #[serde(skip_serializing_if = "Option::is_none")]
    optimizer: Option<RawOptimizer>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<ExperimentKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    schemes: Option<Vec<Scheme>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawArray {
    #[serde(skip_serializing_if = "Option::is_none")]
    num_cables: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_per_cable: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cable_len: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_sep: Option<f64>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawRadio {
    #[serde(skip_serializing_if = "Option::is_none")]
    carrier_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tx_power: Option<PowerSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_power: Option<PowerSpec>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(skip_serializing_if = "Option::is_none")]
    num_users: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    num_eves: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rician_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    user_regions: Option<Vec<RegionConfig>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eve_regions: Option<Vec<RegionConfig>>,
}

#[derive(Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawOptimizer {
    #[serde(skip_serializing_if = "Option::is_none")]
    outer_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inner_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shrink: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    armijo: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    outer_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mc_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fd_step: Option<f64>,
}

/// Transmit/noise power: a bare number is watts; strings carry a unit.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
enum PowerSpec {
    Watts(f64),
    Text(String),
}

fn power_to_watts(spec: &PowerSpec) -> Result<f64, ConfigError> {
    match spec {
        PowerSpec::Watts(w) => Ok(*w),
        PowerSpec::Text(s) => {
            let t = s.trim();
            let lower = t.to_ascii_lowercase();
            if let Some(num) = lower.strip_suffix("dbm") {
                let dbm: f64 = num
                    .trim()
                    .parse()
                    .map_err(|_| ConfigError::Power { text: s.clone() })?;
                Ok(10f64.powf((dbm - 30.0) / 10.0))
            } else if let Some(num) = lower.strip_suffix('w') {
                num.trim()
                    .parse()
                    .map_err(|_| ConfigError::Power { text: s.clone() })
            } else {
                Err(ConfigError::Power { text: s.clone() })
            }
        }
    }
}

/// Region description in the file; mirrors [`RegionSpec`] with plain
/// arrays for vectors.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionConfig {
    Cone {
        axis: [f64; 3],
        vertex_angle_deg: f64,
        min_dist: f64,
        max_dist: f64,
    },
    SphereSurface {
        radius: f64,
    },
}

impl RegionConfig {
    fn to_region(&self) -> RegionSpec {
        match *self {
            RegionConfig::Cone {
                axis,
                vertex_angle_deg,
                min_dist,
                max_dist,
            } => RegionSpec::Cone {
                axis: Vec3::new(axis[0], axis[1], axis[2]),
                vertex_angle_deg,
                min_dist,
                max_dist,
            },
            RegionConfig::SphereSurface { radius } => RegionSpec::SphereSurface { radius },
        }
    }

    fn from_region(region: &RegionSpec) -> Self {
        match *region {
            RegionSpec::Cone {
                axis,
                vertex_angle_deg,
                min_dist,
                max_dist,
            } => RegionConfig::Cone {
                axis: [axis.x, axis.y, axis.z],
                vertex_angle_deg,
                min_dist,
                max_dist,
            },
            RegionSpec::SphereSurface { radius } => RegionConfig::SphereSurface { radius },
        }
    }
}

// ---------------------------------------------------------------------
// Parse and serialize.
// ---------------------------------------------------------------------

/// Parses a TOML experiment config, applying the built-in default
/// downlink study for every omitted section. The empty string resolves
/// to the full default experiment.
pub fn parse_config(text: &str) -> Result<ExperimentSpec, ConfigError> {
    let raw: RawConfig = toml::from_str(text)?;
    resolve(raw)
}

fn resolve(raw: RawConfig) -> Result<ExperimentSpec, ConfigError> {
    let mut scenario = Scenario::default_downlink();

    if let Some(array) = &raw.array {
        let g = &mut scenario.geometry;
        if let Some(v) = array.num_cables {
            g.num_cables = v;
        }
        if let Some(v) = array.n_per_cable {
            g.n_per_cable = v;
        }
        if let Some(v) = array.cable_len {
            g.cable_len = v;
        }
        if let Some(v) = array.min_sep {
            g.min_sep = v;
        }
    }

    if let Some(radio) = &raw.radio {
        let carrier = radio.carrier_hz.unwrap_or(scenario.radio.carrier_hz());
        let tx = match &radio.tx_power {
            Some(p) => power_to_watts(p)?,
            None => scenario.radio.tx_power_w(),
        };
        let noise = match &radio.noise_power {
            Some(p) => power_to_watts(p)?,
            None => scenario.radio.noise_power_w(),
        };
        scenario.radio = RadioParams::from_carrier(carrier, tx, noise)?;
    }

    if let Some(sc) = &raw.scenario {
        if let Some(v) = sc.num_users {
            scenario.num_users = v;
        }
        if let Some(v) = sc.num_eves {
            scenario.num_eves = v;
        }
        if let Some(v) = sc.rician_factor {
            scenario.rician_factor = v;
        }
        if let Some(v) = sc.seed {
            scenario.seed = v;
        }
        if let Some(regions) = &sc.user_regions {
            scenario.user_regions = regions.iter().map(RegionConfig::to_region).collect();
        }
        if let Some(regions) = &sc.eve_regions {
            scenario.eve_regions = regions.iter().map(RegionConfig::to_region).collect();
        }
    }
    scenario.validate()?;

    let mut optimizer = OptimizerParams::default();
    if let Some(opt) = &raw.optimizer {
        if let Some(v) = opt.outer_iters {
            optimizer.outer_iters = v;
        }
        if let Some(v) = opt.inner_iters {
            optimizer.inner_iters = v;
        }
        if let Some(v) = opt.tau_max {
            optimizer.tau_max = v;
        }
        if let Some(v) = opt.tau_min {
            optimizer.tau_min = v;
        }
        if let Some(v) = opt.shrink {
            optimizer.shrink = v;
        }
        if let Some(v) = opt.armijo {
            optimizer.armijo = v;
        }
        if let Some(v) = opt.outer_tol {
            optimizer.outer_tol = v;
        }
        if let Some(v) = opt.mc_samples {
            optimizer.mc_samples = v;
        }
        if let Some(v) = opt.fd_step {
            optimizer.fd_step = v;
        }
    }
    optimizer.validate()?;

    let experiment = raw.experiment.unwrap_or_default();
    let kind = experiment.kind.unwrap_or(ExperimentKind::Convergence);
    let schemes = experiment.schemes.unwrap_or_else(|| Scheme::ALL.to_vec());
    if schemes.is_empty() {
        return Err(invalid("experiment.schemes", "at least one scheme required"));
    }
    let sweep = experiment.sweep.unwrap_or_default();
    check_sweep(kind, &sweep, &scenario)?;

    Ok(ExperimentSpec {
        kind,
        schemes,
        sweep,
        scenario,
        optimizer,
    })
}

fn check_sweep(kind: ExperimentKind, sweep: &[f64], scenario: &Scenario) -> Result<(), ConfigError> {
    if !kind.is_sweep() {
        if !sweep.is_empty() {
            return Err(invalid(
                "experiment.sweep",
                format!("kind {:?} takes no sweep values", kind.as_str()),
            ));
        }
        return Ok(());
    }
    if sweep.is_empty() {
        return Err(invalid("experiment.sweep", "sweep kinds need at least one value"));
    }
    for pair in sweep.windows(2) {
        if pair[1] <= pair[0] {
            return Err(invalid("experiment.sweep", "values must be strictly ascending"));
        }
    }
    for &v in sweep {
        if !(v > 0.0) {
            return Err(invalid("experiment.sweep", format!("value {v} must be positive")));
        }
        // Only the Rician factor meaningfully sweeps to infinity.
        if !v.is_finite() && kind != ExperimentKind::SweepRician {
            return Err(invalid("experiment.sweep", "non-finite value"));
        }
        if kind.integer_valued() && (v.fract() != 0.0 || !v.is_finite()) {
            return Err(invalid(
                "experiment.sweep",
                format!("value {v} must be a positive integer"),
            ));
        }
    }
    if kind == ExperimentKind::SweepMFixedBudget {
        // Cells redistribute a fixed total element count and total cable
        // length across the swept number of cables.
        let budget = scenario.geometry.num_cables * scenario.geometry.n_per_cable;
        for &v in sweep {
            let m = v as usize;
            if budget % m != 0 {
                return Err(invalid(
                    "experiment.sweep",
                    format!("{m} cables cannot split {budget} elements evenly"),
                ));
            }
        }
    }
    Ok(())
}

/// Serializes a resolved [`ExperimentSpec`] back to TOML. `parse_config`
/// on the output reproduces the input value exactly.
pub fn serialize_config(spec: &ExperimentSpec) -> String {
    let sc = &spec.scenario;
    let raw = RawConfig {
        experiment: Some(RawExperiment {
            kind: Some(spec.kind),
            schemes: Some(spec.schemes.clone()),
            sweep: if spec.sweep.is_empty() {
                None
            } else {
                Some(spec.sweep.clone())
            },
        }),
        array: Some(RawArray {
            num_cables: Some(sc.geometry.num_cables),
            n_per_cable: Some(sc.geometry.n_per_cable),
            cable_len: Some(sc.geometry.cable_len),
            min_sep: Some(sc.geometry.min_sep),
        }),
        radio: Some(RawRadio {
            carrier_hz: Some(sc.radio.carrier_hz()),
            tx_power: Some(PowerSpec::Watts(sc.radio.tx_power_w())),
            noise_power: Some(PowerSpec::Watts(sc.radio.noise_power_w())),
        }),
        scenario: Some(RawScenario {
            num_users: Some(sc.num_users),
            num_eves: Some(sc.num_eves),
            rician_factor: Some(sc.rician_factor),
            seed: Some(sc.seed),
            user_regions: Some(sc.user_regions.iter().map(RegionConfig::from_region).collect()),
            eve_regions: Some(sc.eve_regions.iter().map(RegionConfig::from_region).collect()),
        }),
        optimizer: Some(RawOptimizer {
            outer_iters: Some(spec.optimizer.outer_iters),
            inner_iters: Some(spec.optimizer.inner_iters),
            tau_max: Some(spec.optimizer.tau_max),
            tau_min: Some(spec.optimizer.tau_min),
            shrink: Some(spec.optimizer.shrink),
            armijo: Some(spec.optimizer.armijo),
            outer_tol: Some(spec.optimizer.outer_tol),
            mc_samples: Some(spec.optimizer.mc_samples),
            fd_step: Some(spec.optimizer.fd_step),
        }),
    };
    toml::to_string_pretty(&raw).expect("resolved config always serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_resolves_to_the_default_study() {
        let spec = parse_config("").unwrap();
        assert_eq!(spec.kind, ExperimentKind::Convergence);
        assert_eq!(spec.schemes, Scheme::ALL.to_vec());
        assert!(spec.sweep.is_empty());
        assert_eq!(spec.scenario, Scenario::default_downlink());
        assert_eq!(spec.optimizer, OptimizerParams::default());
    }

    #[test]
    fn dbm_strings_convert_at_the_boundary() {
        let spec = parse_config(
            "[radio]\ntx_power = \"50 dBm\"\nnoise_power = \"-90 dBm\"\n",
        )
        .unwrap();
        assert!((spec.scenario.radio.tx_power_w() - 100.0).abs() < 1e-9);
        assert!((spec.scenario.radio.noise_power_w() - 1e-12).abs() < 1e-24);
        let watts = parse_config("[radio]\ntx_power = \"0.2 W\"\n").unwrap();
        assert!((watts.scenario.radio.tx_power_w() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let err = parse_config("[array]\nnum_cables = 4\ntypo_key = 1\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("typo_key"), "missing key name: {msg}");
    }

    #[test]
    fn negative_separation_is_rejected() {
        assert!(parse_config("[array]\nmin_sep = -0.5\n").is_err());
    }

    #[test]
    fn sweeps_must_be_ascending_and_typed() {
        let base = "[experiment]\nkind = \"sweep_n\"\n";
        assert!(parse_config(&format!("{base}sweep = [4, 2]\n")).is_err());
        assert!(parse_config(&format!("{base}sweep = [2.5]\n")).is_err());
        assert!(parse_config(&format!("{base}sweep = []\n")).is_err());
        assert!(parse_config(&format!("{base}sweep = [2, 4, 8]\n")).is_ok());
    }

    #[test]
    fn fixed_budget_sweep_requires_even_splits() {
        let base = "[experiment]\nkind = \"sweep_m_fixed_budget\"\n";
        assert!(parse_config(&format!("{base}sweep = [3]\n")).is_err());
        assert!(parse_config(&format!("{base}sweep = [2, 4, 8, 16]\n")).is_ok());
    }

    #[test]
    fn infinite_rician_factor_round_trips() {
        let spec = parse_config("[scenario]\nrician_factor = inf\n").unwrap();
        assert!(spec.scenario.rician_factor.is_infinite());
        let again = parse_config(&serialize_config(&spec)).unwrap();
        assert_eq!(again, spec);
    }

    #[test]
    fn round_trip_preserves_a_customized_spec() {
        let text = r#"
[experiment]
kind = "sweep_rician"
schemes = ["toma_opt", "fpa_dense"]
sweep = [0.1, 1.0, 10.0, 100.0, inf]

[array]
num_cables = 4
n_per_cable = 16
cable_len = 8.0
min_sep = 0.25

[radio]
carrier_hz = 2.8e10
tx_power = "30 dBm"
noise_power = 1e-11

[scenario]
num_users = 6
num_eves = 3
rician_factor = 10.0
seed = 99

[[scenario.user_regions]]
kind = "cone"
axis = [0.0, 1.0, 0.0]
vertex_angle_deg = 25.0
min_dist = 200.0
max_dist = 400.0

[[scenario.eve_regions]]
kind = "sphere_surface"
radius = 350.0

[optimizer]
outer_iters = 5
mc_samples = 10
"#;
        let spec = parse_config(text).unwrap();
        assert_eq!(spec.sweep.len(), 5);
        assert_eq!(spec.scenario.num_users, 6);
        assert_eq!(spec.optimizer.outer_iters, 5);
        assert_eq!(spec.optimizer.inner_iters, OptimizerParams::default().inner_iters);
        let again = parse_config(&serialize_config(&spec)).unwrap();
        assert_eq!(again, spec);
    }
}
