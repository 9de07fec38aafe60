use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub n: u64,
    pub c: f64,
    pub r: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Maxdeg,
    Census,
    Tailcheck,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Maxdeg => "maxdeg",
            Mode::Census => "census",
            Mode::Tailcheck => "tailcheck",
        }
    }
}

fn default_workers() -> usize {
    1
}

fn default_ladder() -> Vec<f64> {
    vec![1.2, 1.5, 2.0]
}

/// Campaign description, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub cells: Vec<CellSpec>,
    pub trials: u64,
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    pub mode: Mode,
    pub out: PathBuf,
    /// Multipliers of `d*` giving the tailcheck thresholds `ceil(m d*)`.
    #[serde(default = "default_ladder")]
    pub ladder: Vec<f64>,
    /// Adds a wall-clock column to maxdeg output, which makes reruns differ.
    #[serde(default)]
    pub timing: bool,
}

/// The fields that determine the numbers in a report. Worker count and
/// output location are execution details and stay out of the echo so that
/// reports are byte-identical across them.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho<'a> {
    pub cells: &'a [CellSpec],
    pub trials: u64,
    pub seed: u64,
    pub mode: Mode,
    pub ladder: &'a [f64],
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Campaign-level checks. Individual cells that fail their own guards
    /// are reported and skipped at run time instead.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.cells.len() as u64 >= u32::MAX as u64 || self.trials >= u32::MAX as u64 {
            return Err(Error::Config("too many cells or trials".into()));
        }
        if self.ladder.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::Config("ladder multipliers must be positive".into()));
        }
        Ok(())
    }

    pub fn echo(&self) -> ConfigEcho<'_> {
        ConfigEcho {
            cells: &self.cells,
            trials: self.trials,
            seed: self.seed,
            mode: self.mode,
            ladder: &self.ladder,
            timing: self.timing,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::from_json(
            r#"{"cells":[{"n":1000,"c":1.0,"r":2}],"trials":3,"seed":9,"mode":"maxdeg","out":"x.csv"}"#,
        )
        .unwrap();
        assert_eq!(cfg.workers, 1);
        assert_eq!(cfg.ladder, vec![1.2, 1.5, 2.0]);
        assert_eq!(cfg.mode, Mode::Maxdeg);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            r#"{"cells":[],"trials":0,"seed":1,"mode":"census","out":"x"}"#,
            r#"{"cells":[],"trials":1,"seed":1,"mode":"bogus","out":"x"}"#,
            r#"{"cells":[],"trials":1,"seed":1,"mode":"census","out":"x","extra":1}"#,
            r#"{"cells":[],"trials":1,"seed":1,"workers":0,"mode":"census","out":"x"}"#,
            r#"{"cells":[],"trials":1,"seed":1,"mode":"tailcheck","out":"x","ladder":[-1]}"#,
        ];
        for text in bad {
            assert!(
                matches!(ExperimentConfig::from_json(text), Err(Error::Config(_))),
                "{text}"
            );
        }
    }
}
