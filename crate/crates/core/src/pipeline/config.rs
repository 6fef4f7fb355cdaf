use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvBlock {
    pub filters: usize,
    pub kernel: usize,
    /// Pool width; the pool stride equals its width.
    pub pool: usize,
}

/// Architecture and training hyper-parameters.
///
/// `dropout[i]` follows the conv block `conv.len() - dropout.len() + i`, so
/// the default two rates sit after blocks 2 and 3.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub conv: Vec<ConvBlock>,
    pub dropout: Vec<f64>,
    pub lstm: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let block = |filters| ConvBlock {
            filters,
            kernel: 3,
            pool: 2,
        };
        ModelConfig {
            conv: vec![block(32), block(64), block(64)],
            dropout: vec![0.2, 0.3],
            lstm: vec![64, 32],
            epochs: 30,
            batch_size: 256,
            learning_rate: 0.001,
            seed: 0,
        }
    }
}

/// Keys accepted by [`ModelConfig::set`], in canonical order.
pub const MODEL_KEYS: [&str; 7] = ["batch_size", "conv", "dropout", "epochs", "learning_rate", "lstm", "seed"];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse(key, v)).collect()
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.conv.is_empty() {
            return Err(Error::Config("at least one conv block is required".into()));
        }
        for (i, b) in self.conv.iter().enumerate() {
            if b.filters == 0 || b.kernel == 0 || b.pool == 0 {
                return Err(Error::Config(format!("conv block {} has a zero size", i + 1)));
            }
        }
        if self.dropout.len() > self.conv.len() {
            return Err(Error::Config(format!(
                "{} dropout rates for {} conv blocks",
                self.dropout.len(),
                self.conv.len()
            )));
        }
        if let Some(r) = self.dropout.iter().find(|r| !(0.0..1.0).contains(*r)) {
            return Err(Error::Config(format!("dropout rate {r} outside [0, 1)")));
        }
        if self.lstm.is_empty() || self.lstm.contains(&0) {
            return Err(Error::Config("lstm sizes must be a non-empty list of positive widths".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning_rate {} must be positive", self.learning_rate)));
        }
        Ok(())
    }

    /// Dropout rate after conv block `block` (0-based), if any.
    pub fn dropout_after(&self, block: usize) -> Option<f64> {
        let first = self.conv.len() - self.dropout.len().min(self.conv.len());
        block.checked_sub(first).and_then(|i| self.dropout.get(i).copied())
    }

    /// Sets one key from its canonical text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "batch_size" => self.batch_size = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "learning_rate" => self.learning_rate = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "lstm" => self.lstm = list(key, value)?,
            "dropout" => self.dropout = list(key, value)?,
            "conv" => {
                self.conv = value
                    .split(',')
                    .map(|b| {
                        let parts: Vec<usize> = b.split(':').map(|v| parse(key, v)).collect::<Result<_>>()?;
                        match parts[..] {
                            [filters, kernel, pool] => Ok(ConvBlock { filters, kernel, pool }),
                            _ => Err(Error::Config(format!("conv block {b:?} is not filters:kernel:pool"))),
                        }
                    })
                    .collect::<Result<_>>()?
            }
            _ => return Err(Error::Config(format!("unknown model key {key:?}"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let join = |v: Vec<String>| v.join(",");
        Some(match key {
            "batch_size" => self.batch_size.to_string(),
            "epochs" => self.epochs.to_string(),
            "learning_rate" => self.learning_rate.to_string(),
            "seed" => self.seed.to_string(),
            "lstm" => join(self.lstm.iter().map(|v| v.to_string()).collect()),
            "dropout" => join(self.dropout.iter().map(|v| v.to_string()).collect()),
            "conv" => join(
                self.conv
                    .iter()
                    .map(|b| format!("{}:{}:{}", b.filters, b.kernel, b.pool))
                    .collect(),
            ),
            _ => return None,
        })
    }

    /// Canonical `key=value` lines in [`MODEL_KEYS`] order.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut config = ModelConfig::default();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {line:?} is not key=value")))?;
            config.set(k.trim(), v.trim())?;
        }
        config.validate()?;
        Ok(config)
    }
}

impl fmt::Display for ModelConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for key in MODEL_KEYS {
            writeln!(f, "{key}={}", self.get(key).unwrap())?;
        }
        Ok(())
    }
}
