use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// One-way partial AUC: mean over positives of the KL-DRO soft-max over negatives.
    PaucKl,
    /// Two-way partial AUC: a second KL-DRO soft-max over the per-positive terms.
    TpaucKl,
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "pauc_kl" | "pauc" => Ok(Objective::PaucKl),
            "tpauc_kl" | "tpauc" => Ok(Objective::TpaucKl),
            other => Err(Error::Config(format!("unknown objective `{other}`"))),
        }
    }
}

/// Trainer configuration.
///
/// `lambda` controls the inner soft-max over negatives (FPR side) and
/// `lambda_prime` the outer one over positives (TPR side); smaller values push
/// each aggregate toward its hardest members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DxoConfig {
    pub objective: Objective,
    pub lambda: f64,
    pub lambda_prime: f64,
    pub margin: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub sampling_rate: f64,
    pub ma_gamma: f64,
    pub seed: u64,
}

impl Default for DxoConfig {
    fn default() -> Self {
        DxoConfig {
            objective: Objective::TpaucKl,
            lambda: 1.0,
            lambda_prime: 1.0,
            margin: 1.0,
            learning_rate: 1e-5,
            epochs: 10,
            batch_size: 64,
            sampling_rate: 0.5,
            ma_gamma: 0.9,
            seed: 0,
        }
    }
}

impl DxoConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("lambda", self.lambda)?;
        positive("lambda_prime", self.lambda_prime)?;
        positive("margin", self.margin)?;
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning_rate must be non-negative, got {}", self.learning_rate)));
        }
        if !(self.sampling_rate > 0.0 && self.sampling_rate < 1.0) {
            return Err(Error::Config(format!("sampling_rate must be in (0, 1), got {}", self.sampling_rate)));
        }
        if !(self.ma_gamma > 0.0 && self.ma_gamma <= 1.0) {
            return Err(Error::Config(format!("ma_gamma must be in (0, 1], got {}", self.ma_gamma)));
        }
        if self.batch_size < 2 {
            return Err(Error::Config(format!("batch_size must be at least 2, got {}", self.batch_size)));
        }
        Ok(())
    }

    /// Sets one field from its text form. Accepts `lr` for `learning_rate`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
        }
        match key.replace('-', "_").as_str() {
            "objective" => self.objective = value.parse()?,
            "lambda" => self.lambda = num(key, value)?,
            "lambda_prime" => self.lambda_prime = num(key, value)?,
            "margin" => self.margin = num(key, value)?,
            "learning_rate" | "lr" => self.learning_rate = num(key, value)?,
            "epochs" => self.epochs = num(key, value)?,
            "batch_size" => self.batch_size = num(key, value)?,
            "sampling_rate" => self.sampling_rate = num(key, value)?,
            "ma_gamma" => self.ma_gamma = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            other => return Err(Error::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file on top of `self`. Blank lines and
    /// lines starting with `#` are ignored.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected `key=value`, got `{line}`"),
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut cfg = DxoConfig::default();
        cfg.apply_kv(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = DxoConfig::default();
        cfg.validate().unwrap();
        assert_eq!((cfg.batch_size, cfg.sampling_rate, cfg.learning_rate), (64, 0.5, 1e-5));
        assert_eq!((cfg.lambda, cfg.lambda_prime, cfg.margin, cfg.ma_gamma), (1.0, 1.0, 1.0, 0.9));
    }

    #[test]
    fn kv_file() {
        let cfg = DxoConfig::from_kv("# comment\nobjective = pauc_kl\nlr=0.1\n\nepochs=5\nlambda-prime=2\n").unwrap();
        assert_eq!(cfg.objective, Objective::PaucKl);
        assert_eq!(cfg.learning_rate, 0.1);
        assert_eq!(cfg.epochs, 5);
        assert_eq!(cfg.lambda_prime, 2.0);
        assert!(DxoConfig::from_kv("bogus=1").is_err());
        assert!(DxoConfig::from_kv("lambda").is_err());
        assert!(DxoConfig::from_kv("lambda=0").is_err());
    }

    #[test]
    fn validation() {
        let bad = [
            DxoConfig { lambda: 0.0, ..Default::default() },
            DxoConfig { lambda_prime: -1.0, ..Default::default() },
            DxoConfig { sampling_rate: 1.0, ..Default::default() },
            DxoConfig { batch_size: 1, ..Default::default() },
            DxoConfig { ma_gamma: 0.0, ..Default::default() },
            DxoConfig { learning_rate: f64::NAN, ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }
}
