use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::brw::{Beta, Engine, Variant};
use crate::error::{Error, Result};
use crate::estimators::CnMode;
use crate::rng::DEFAULT_SEED;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Simulate,
    Speed,
    Cn,
    Coalescent,
    Rates,
    PdDiagnostics,
    Tails,
    Constants,
}

impl Subcommand {
    pub const ALL: [Subcommand; 8] = [
        Subcommand::Simulate,
        Subcommand::Speed,
        Subcommand::Cn,
        Subcommand::Coalescent,
        Subcommand::Rates,
        Subcommand::PdDiagnostics,
        Subcommand::Tails,
        Subcommand::Constants,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::Simulate => "simulate",
            Subcommand::Speed => "speed",
            Subcommand::Cn => "cn",
            Subcommand::Coalescent => "coalescent",
            Subcommand::Rates => "rates",
            Subcommand::PdDiagnostics => "pd-diagnostics",
            Subcommand::Tails => "tails",
            Subcommand::Constants => "constants",
        }
    }

    /// Keys that must be present.
    pub fn required_keys(&self) -> &'static [&'static str] {
        match self {
            Subcommand::Simulate => &["n", "beta", "horizon"],
            Subcommand::Speed => &["n", "beta", "steps", "replicates"],
            Subcommand::Cn => &["n", "alpha", "replicates"],
            Subcommand::Coalescent => &["measure", "lineages", "replicates"],
            Subcommand::Rates => &["measure", "bmax"],
            Subcommand::PdDiagnostics => &["alpha", "sticks", "replicates"],
            Subcommand::Tails => &["n", "alpha", "replicates"],
            Subcommand::Constants => &["alpha"],
        }
    }

    /// Keys that may be present besides the required ones and the common
    /// `seed`, `output`, `format`.
    pub fn optional_keys(&self) -> &'static [&'static str] {
        match self {
            Subcommand::Simulate => &["engine", "variant", "sticks", "truncation_epsilon"],
            Subcommand::Speed => &["engine", "variant", "sticks", "truncation_epsilon"],
            Subcommand::Cn => &["theta", "mode"],
            Subcommand::Coalescent => &["lambda", "n", "alpha", "theta", "horizon"],
            Subcommand::Rates => &["lambda"],
            Subcommand::PdDiagnostics => &["theta", "gamma"],
            Subcommand::Tails => &["theta", "x"],
            Subcommand::Constants => &["theta", "n"],
        }
    }

    pub fn default_format(&self) -> Format {
        match self {
            Subcommand::Simulate | Subcommand::Coalescent | Subcommand::Rates => Format::Csv,
            _ => Format::Json,
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown subcommand '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown format '{s}' (expected csv or json)"))),
        }
    }
}

/// Which coalescent a `coalescent` or `rates` run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    /// Beta(2-λ, λ) measure.
    Beta,
    /// Point mass at 0.
    Kingman,
    /// Discrete genealogy under PD(α, θ) offspring weights.
    Pd,
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beta" => Ok(MeasureKind::Beta),
            "kingman" => Ok(MeasureKind::Kingman),
            "pd" => Ok(MeasureKind::Pd),
            _ => Err(Error::Config(format!("unknown measure '{s}' (expected beta, kingman or pd)"))),
        }
    }
}

/// One experiment. Keys are flat and mirror the command-line flags
/// (`--truncation-epsilon` is `truncation_epsilon`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub subcommand: Subcommand,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Beta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<Engine>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sticks: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<CnMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bmax: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lineages: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

const COMMON_KEYS: [&str; 3] = ["seed", "output", "format"];

impl ExperimentConfig {
    pub fn new(subcommand: Subcommand) -> Self {
        Self {
            subcommand,
            n: None,
            beta: None,
            alpha: None,
            theta: None,
            engine: None,
            variant: None,
            horizon: None,
            steps: None,
            replicates: None,
            sticks: None,
            truncation_epsilon: None,
            mode: None,
            measure: None,
            lambda: None,
            bmax: None,
            lineages: None,
            gamma: None,
            x: None,
            seed: None,
            output: None,
            format: None,
        }
    }

    /// Parses a JSON object; `subcommand` may be omitted when `fallback`
    /// names it.
    pub fn from_json(text: &str, fallback: Option<Subcommand>) -> Result<Self> {
        let mut value: Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config is not valid JSON: {e}")))?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
        match (obj.get("subcommand"), fallback) {
            (None, Some(s)) => {
                obj.insert("subcommand".into(), Value::String(s.name().into()));
            }
            (Some(v), Some(s)) if v.as_str() != Some(s.name()) => {
                return Err(Error::Config(format!("config file is for subcommand {v}, not '{s}'")));
            }
            _ => {}
        }
        serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path, fallback: Option<Subcommand>) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text, fallback)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Every key set in `overrides` replaces the value here.
    pub fn merge(mut self, overrides: ExperimentConfig) -> Result<Self> {
        if overrides.subcommand != self.subcommand {
            return Err(Error::Config(format!(
                "cannot merge '{}' settings into a '{}' config",
                overrides.subcommand, self.subcommand
            )));
        }
        macro_rules! take {
            ($($f:ident),*) => {$(
                if overrides.$f.is_some() {
                    self.$f = overrides.$f;
                }
            )*};
        }
        take!(
            n, beta, alpha, theta, engine, variant, horizon, steps, replicates, sticks,
            truncation_epsilon, mode, measure, lambda, bmax, lineages, gamma, x, seed, output, format
        );
        Ok(self)
    }

    /// Names of the keys that are set.
    pub fn present_keys(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        macro_rules! check {
            ($($f:ident),*) => {$(
                if self.$f.is_some() {
                    keys.push(stringify!($f));
                }
            )*};
        }
        check!(
            n, beta, alpha, theta, engine, variant, horizon, steps, replicates, sticks,
            truncation_epsilon, mode, measure, lambda, bmax, lineages, gamma, x, seed, output, format
        );
        keys
    }

    /// Checks that exactly the keys accepted by the subcommand are present.
    pub fn validate_keys(&self) -> Result<()> {
        let sub = self.subcommand;
        let present = self.present_keys();
        for key in &present {
            if !(sub.required_keys().contains(key)
                || sub.optional_keys().contains(key)
                || COMMON_KEYS.contains(key))
            {
                return Err(Error::Config(format!("'{key}' is not accepted by subcommand '{sub}'")));
            }
        }
        for key in sub.required_keys() {
            if !present.contains(key) {
                return Err(Error::Config(format!("subcommand '{sub}' requires '{key}'")));
            }
        }
        Ok(())
    }

    pub fn seed_or_default(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn format_or_default(&self) -> Format {
        self.format.unwrap_or(self.subcommand.default_format())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn speed() -> ExperimentConfig {
        let mut c = ExperimentConfig::new(Subcommand::Speed);
        c.n = Some(100);
        c.beta = Some(Beta::Infinite);
        c.steps = Some(50);
        c.replicates = Some(4);
        c
    }

    #[test]
    fn round_trip() {
        let mut c = speed();
        c.seed = Some(42);
        c.output = Some("out.json".into());
        let s = c.to_json().unwrap();
        assert_eq!(ExperimentConfig::from_json(&s, None).unwrap(), c);
        assert!(s.contains("\"beta\":\"inf\""));
        let mut t = ExperimentConfig::new(Subcommand::Tails);
        t.x = Some(vec![0.25, 0.5]);
        t.beta = Some(Beta::Finite(1.5));
        let s = t.to_json().unwrap();
        assert_eq!(ExperimentConfig::from_json(&s, None).unwrap(), t);
    }

    #[test]
    fn subcommand_names_round_trip() {
        for s in Subcommand::ALL {
            assert_eq!(s.name().parse::<Subcommand>().unwrap(), s);
            let json = serde_json::to_string(&s).unwrap();
            assert_eq!(json, format!("\"{}\"", s.name()));
        }
    }

    #[test]
    fn unknown_and_foreign_keys_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"subcommand":"speed","colour":1}"#, None).is_err());
        let mut c = speed();
        c.validate_keys().unwrap();
        c.alpha = Some(0.5);
        let err = c.validate_keys().unwrap_err();
        assert!(err.to_string().contains("'alpha'"));
        let mut c = speed();
        c.steps = None;
        assert!(c.validate_keys().unwrap_err().to_string().contains("requires 'steps'"));
    }

    #[test]
    fn file_subcommand_fallback_and_conflict() {
        let c = ExperimentConfig::from_json(r#"{"n":10}"#, Some(Subcommand::Cn)).unwrap();
        assert_eq!(c.subcommand, Subcommand::Cn);
        assert!(ExperimentConfig::from_json(r#"{"subcommand":"rates"}"#, Some(Subcommand::Cn)).is_err());
        assert!(ExperimentConfig::from_json(r#"{"n":10}"#, None).is_err());
    }

    #[test]
    fn flags_override_file() {
        let mut file = speed();
        file.seed = Some(1);
        let mut flags = ExperimentConfig::new(Subcommand::Speed);
        flags.seed = Some(2);
        let merged = file.clone().merge(flags).unwrap();
        assert_eq!(merged.seed, Some(2));
        assert_eq!(merged.n, file.n);
        assert!(file.merge(ExperimentConfig::new(Subcommand::Cn)).is_err());
    }

    #[test]
    fn defaults() {
        let c = speed();
        assert_eq!(c.seed_or_default(), DEFAULT_SEED);
        assert_eq!(c.format_or_default(), Format::Json);
        assert_eq!(ExperimentConfig::new(Subcommand::Rates).format_or_default(), Format::Csv);
    }
}
