//! JSON run configuration for `simulate`.

use std::path::{Path, PathBuf};

use emsr_core::sim::{FailurePolicy, HelperSelection, SimConfig};
use emsr_core::{InnerParams, OuterParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub json: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub inner: InnerParams,
    pub outer: OuterParams,
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub failure_policy: FailurePolicy,
    #[serde(default)]
    pub helper_policy: HelperSelection,
    #[serde(default)]
    pub p: Option<u64>,
    #[serde(default)]
    pub output: OutputPaths,
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::BadConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(CliError::io(format!("reading {}", path.display())))?;
        RunConfig::parse(&text)
    }

    fn validate(&self) -> CliResult<()> {
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(CliError::BadConfig(format!(
                "epsilon must be finite and non-negative, got {}",
                self.epsilon
            )));
        }
        if self.inner.n == 0 || self.outer.length == 0 || self.outer.q < 2 {
            return Err(CliError::BadConfig(
                "code parameters must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            inner: self.inner,
            outer: self.outer,
            epsilon: self.epsilon,
            trials: self.trials,
            seed: self.seed,
            failure_policy: self.failure_policy,
            helper_policy: self.helper_policy,
            p: self.p,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DESK: &str = r#"{
        "inner": {"n": 5, "k": 2, "t": 3},
        "outer": {"q": 5, "N": 4, "K": 2},
        "epsilon": 0.5, "trials": 25, "seed": 1,
        "failure_policy": "seeded-random", "helper_policy": "ascending",
        "output": {"csv": "out.csv"}
    }"#;

    #[test]
    fn parses_full_config() {
        let cfg = RunConfig::parse(DESK).unwrap();
        assert_eq!(cfg.failure_policy, FailurePolicy::SeededRandom);
        assert_eq!(cfg.output.csv.as_deref(), Some(Path::new("out.csv")));
        assert_eq!(cfg.sim_config().trials, 25);
    }

    #[test]
    fn schema_violations_are_bad_config() {
        let cases = [
            DESK.replace("\"seed\": 1,", "\"seed\": 1, \"extra\": true,"),
            DESK.replace("\"trials\": 25,", ""),
            DESK.replace("\"seeded-random\"", "\"sometimes\""),
            DESK.replace("0.5", "-1.0"),
            DESK.replace("\"N\": 4", "\"n\": 4"),
        ];
        for text in cases {
            let err = RunConfig::parse(&text).unwrap_err();
            assert_eq!(err.kind(), "BadConfig", "{text}");
        }
    }
}
