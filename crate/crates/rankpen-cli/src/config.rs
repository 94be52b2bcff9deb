//! Experiment configuration. Every field left out of a JSON config is taken
//! from the preset of the named experiment.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rankpen::{ExpModel, Kernel, SolverConfig};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::presets;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    DenoiseEquispaced,
    Weighted,
    MissingData,
    #[serde(rename = "unequal-1d")]
    Unequal1d,
    #[serde(rename = "curve-2d")]
    Curve2d,
    SnrSweep,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::DenoiseEquispaced,
        ExperimentKind::Weighted,
        ExperimentKind::MissingData,
        ExperimentKind::Unequal1d,
        ExperimentKind::Curve2d,
        ExperimentKind::SnrSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::DenoiseEquispaced => "denoise-equispaced",
            ExperimentKind::Weighted => "weighted",
            ExperimentKind::MissingData => "missing-data",
            ExperimentKind::Unequal1d => "unequal-1d",
            ExperimentKind::Curve2d => "curve-2d",
            ExperimentKind::SnrSweep => "snr-sweep",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        ExperimentKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<&str> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
            CliError::config("experiment", format!("unknown experiment `{s}`, expected one of {}", names.join(", ")))
        })
    }
}

/// Signal-to-noise ratio in dB; `+inf` means no noise. Serialized as a
/// number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Snr(pub f64);

impl Snr {
    pub const NOISELESS: Snr = Snr(f64::INFINITY);

    pub fn label(self) -> String {
        if self.0 == f64::INFINITY {
            "inf".to_string()
        } else {
            format!("{}", self.0)
        }
    }
}

impl Serialize for Snr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str("inf")
        }
    }
}

impl<'de> Deserialize<'de> for Snr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct SnrVisitor;

        impl Visitor<'_> for SnrVisitor {
            type Value = Snr;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a finite number of dB or \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Snr, E> {
                Ok(Snr(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Snr, E> {
                Ok(Snr(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Snr, E> {
                Ok(Snr(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Snr, E> {
                match v {
                    "inf" | "+inf" | "Infinity" => Ok(Snr::NOISELESS),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }

        d.deserialize_any(SnrVisitor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub snr_db: Vec<Snr>,
    pub trials: usize,
    pub seed: u64,
}

/// Equally spaced 1-D nodes on `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nodes: usize,
    pub lower: f64,
    pub upper: f64,
}

impl GridSpec {
    pub fn spacing(&self) -> f64 {
        (self.upper - self.lower) / (self.nodes - 1) as f64
    }

    pub fn positions(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.nodes).map(|i| self.lower + h * i as f64).collect()
    }
}

/// Data weights over the generator nodes of a 1-D grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum WeightSpec {
    /// `mu = q beta`: the Frobenius distance to the data matrix.
    Triangular,
    /// Constant `mu`; defaults to `q`, the largest admissible constant.
    Uniform {
        #[serde(default)]
        value: Option<f64>,
    },
    /// `mu = q beta` on the known nodes (1-based indices), 0 elsewhere.
    Mask { known: Vec<usize> },
    /// Nodes inside `[gap_lower, gap_upper]` are unknown; the remaining nodes
    /// are thinned by index parity down to `keep`.
    Gapped { gap_lower: f64, gap_upper: f64, keep: usize },
    /// One weight per line in a text file.
    Custom { path: PathBuf },
}

/// Off-grid 1-D samples drawn uniformly on the grid interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterSpec {
    pub samples: usize,
    pub seed: u64,
}

/// Samples along `extent * (0.05 + 0.9 t, 0.5 + 0.35 sin(3 pi t))`, `t` uniform in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub extent: f64,
    pub samples: usize,
    pub spacing: f64,
    pub xi_shape: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub model: ExpModel,
    /// Signal CSV replacing the synthesized samples (1-D grid experiments).
    #[serde(default)]
    pub data_path: Option<PathBuf>,
    pub grid: GridSpec,
    pub noise: NoiseSpec,
    pub solver: SolverConfig,
    pub rank: usize,
    pub weights: WeightSpec,
    pub kernel: Kernel,
    #[serde(default)]
    pub scatter: Option<ScatterSpec>,
    #[serde(default)]
    pub curve: Option<CurveSpec>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn preset(kind: ExperimentKind) -> Self {
        presets::preset(kind)
    }

    /// Parses a JSON config, filling absent fields from the experiment preset.
    pub fn from_json(text: &str) -> CliResult<Self> {
        let user: Value = serde_json::from_str(text).map_err(|e| CliError::config("<root>", e.to_string()))?;
        let kind = user
            .get("experiment")
            .and_then(Value::as_str)
            .ok_or_else(|| CliError::config("experiment", "missing experiment name"))?
            .parse::<ExperimentKind>()?;
        let mut merged = serde_json::to_value(Self::preset(kind)).expect("presets serialize");
        merge(&mut merged, user);
        let cfg: Self = serde_path_to_error::deserialize(merged).map_err(|e| {
            let path = e.path().to_string();
            CliError::config(if path == "." { "<root>".to_string() } else { path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.noise.trials == 0 {
            return Err(CliError::config("noise.trials", "must be at least 1"));
        }
        if self.noise.snr_db.is_empty() {
            return Err(CliError::config("noise.snr_db", "needs at least one value"));
        }
        if let Some(s) = self.noise.snr_db.iter().find(|s| s.0.is_nan() || s.0 == f64::NEG_INFINITY) {
            return Err(CliError::config("noise.snr_db", format!("invalid SNR {}", s.0)));
        }
        if self.rank == 0 {
            return Err(CliError::config("rank", "must be at least 1"));
        }
        if self.solver.q.is_nan() || self.solver.q <= 1.0 {
            return Err(CliError::config("solver.q", "must exceed 1"));
        }
        if self.grid.nodes < 3 || self.grid.upper.partial_cmp(&self.grid.lower) != Some(std::cmp::Ordering::Greater) {
            return Err(CliError::config("grid", "need at least 3 nodes on a nonempty interval"));
        }
        if self.model.is_empty() && self.data_path.is_none() {
            return Err(CliError::config("model", "model has no terms"));
        }
        let want_dim = if self.experiment == ExperimentKind::Curve2d { 2 } else { 1 };
        if self.model.dim() != want_dim && !self.model.is_empty() {
            return Err(CliError::config("model", format!("{} needs a {want_dim}-D model", self.experiment.name())));
        }
        match self.experiment {
            ExperimentKind::Curve2d => {
                let c = self.curve.as_ref().ok_or_else(|| CliError::config("curve", "required for curve-2d"))?;
                if c.xi_shape.len() != 2 || c.xi_shape.iter().any(|&s| s < 2) {
                    return Err(CliError::config("curve.xi_shape", "needs two axes with at least 2 nodes"));
                }
                if c.spacing.is_nan() || c.spacing <= 0.0 || c.extent.is_nan() || c.extent <= 0.0 || c.samples == 0 {
                    return Err(CliError::config("curve", "extent, spacing and samples must be positive"));
                }
            }
            ExperimentKind::Unequal1d => {
                let s = self.scatter.as_ref().ok_or_else(|| CliError::config("scatter", "required for unequal-1d"))?;
                if s.samples == 0 {
                    return Err(CliError::config("scatter.samples", "must be positive"));
                }
            }
            _ => {
                if self.grid.nodes.is_multiple_of(2) {
                    return Err(CliError::config("grid.nodes", "must be odd so the Hankel matrix is square"));
                }
            }
        }
        if let WeightSpec::Mask { known } = &self.weights {
            if let Some(i) = known.iter().find(|&&i| i == 0 || i > self.grid.nodes) {
                return Err(CliError::config("weights.known", format!("index {i} outside 1..={}", self.grid.nodes)));
            }
        }
        Ok(())
    }
}

fn merge(base: &mut Value, user: Value) {
    match (base, user) {
        (Value::Object(b), Value::Object(u)) => {
            for (k, v) in u {
                match b.get_mut(&k) {
                    // tagged enums are replaced wholesale so variants do not mix
                    Some(slot) if slot.is_object() && v.is_object() && !v.as_object().unwrap().contains_key("kind") => {
                        merge(slot, v)
                    }
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, u) => *b = u,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_inherits_preset() {
        let cfg = ExperimentConfig::from_json(r#"{"experiment": "snr-sweep", "noise": {"trials": 2}}"#).unwrap();
        let preset = ExperimentConfig::preset(ExperimentKind::SnrSweep);
        assert_eq!(cfg.noise.trials, 2);
        assert_eq!(cfg.noise.snr_db, preset.noise.snr_db);
        assert_eq!(cfg.model, preset.model);
    }

    #[test]
    fn weights_variant_replaced() {
        let cfg = ExperimentConfig::from_json(r#"{"experiment": "missing-data", "weights": {"kind": "uniform"}}"#).unwrap();
        assert_eq!(cfg.weights, WeightSpec::Uniform { value: None });
    }

    #[test]
    fn snr_round_trip() {
        let v = serde_json::to_string(&vec![Snr(5.0), Snr::NOISELESS]).unwrap();
        assert_eq!(v, r#"[5.0,"inf"]"#);
        let back: Vec<Snr> = serde_json::from_str(&v).unwrap();
        assert_eq!(back, vec![Snr(5.0), Snr::NOISELESS]);
    }

    #[test]
    fn config_errors_name_the_field() {
        match ExperimentConfig::from_json(r#"{"experiment": "weighted", "noise": {"trials": 0}}"#) {
            Err(CliError::Config { field, .. }) => assert_eq!(field, "noise.trials"),
            other => panic!("unexpected {other:?}"),
        }
        match ExperimentConfig::from_json(r#"{"experiment": "nope"}"#) {
            Err(CliError::Config { field, .. }) => assert_eq!(field, "experiment"),
            other => panic!("unexpected {other:?}"),
        }
        match ExperimentConfig::from_json(r#"{"experiment": "weighted", "grid": {"nodes": "many"}}"#) {
            Err(CliError::Config { field, .. }) => assert_eq!(field, "grid.nodes"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(ExperimentConfig::from_json("{").is_err());
    }

    #[test]
    fn every_preset_validates_and_round_trips() {
        for kind in ExperimentKind::ALL {
            let cfg = ExperimentConfig::preset(kind);
            cfg.validate().unwrap();
            assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        }
    }
}
