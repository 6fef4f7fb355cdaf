use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::str::FromStr;

use super::CliError;

/// Canonical spelling of a parameter key: lower case, `_` separators.
pub fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

/// Parses a flat `key=value` file. Blank lines and `#` comments are ignored;
/// a repeated key is an error.
pub fn parse_config_text(text: &str, origin: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{origin}:{}: expected key=value, got {line:?}", n + 1)))?;
        let key = normalize_key(key);
        if key.is_empty() {
            return Err(CliError::Usage(format!("{origin}:{}: empty key", n + 1)));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("{origin}:{}: key {key} given twice", n + 1)));
        }
    }
    Ok(map)
}

/// Resolves each parameter as flag, else config-file value, else default,
/// and records the effective value for the run manifest.
#[derive(Debug, Default)]
pub struct Params {
    file: BTreeMap<String, String>,
    origin: String,
    used: BTreeSet<String>,
    effective: BTreeMap<String, String>,
    warnings: Vec<String>,
}

impl Params {
    pub fn new(file: BTreeMap<String, String>, origin: impl Into<String>) -> Self {
        Params {
            file,
            origin: origin.into(),
            ..Params::default()
        }
    }

    fn take<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        self.used.insert(key.to_string());
        match (flag, self.file.get(key)) {
            (Some(v), Some(raw)) => {
                if v.to_string() != *raw {
                    self.warnings.push(format!(
                        "--{} {v} overrides {key}={raw} from {}",
                        key.replace('_', "-"),
                        self.origin
                    ));
                }
                Ok(Some(v))
            }
            (Some(v), None) => Ok(Some(v)),
            (None, Some(raw)) => raw.parse().map(Some).map_err(|e| {
                CliError::Usage(format!("invalid value {raw:?} for {key} in {}: {e}", self.origin))
            }),
            (None, None) => Ok(None),
        }
    }

    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = self.take(key, flag)?.unwrap_or(default);
        self.effective.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    /// Unset optional parameters are recorded with an empty value.
    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = self.take(key, flag)?;
        self.effective
            .insert(key.to_string(), v.as_ref().map(ToString::to_string).unwrap_or_default());
        Ok(v)
    }

    pub fn required<T>(&mut self, key: &str, flag: Option<T>) -> Result<T, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        self.optional(key, flag)?.ok_or_else(|| {
            CliError::Usage(format!(
                "missing --{} (or {key}= in the config file)",
                key.replace('_', "-")
            ))
        })
    }

    /// Effective values and warnings, including one per config key this
    /// command did not read.
    pub fn finish(mut self, command: &str) -> (BTreeMap<String, String>, Vec<String>) {
        for key in self.file.keys() {
            if !self.used.contains(key) {
                self.warnings
                    .push(format!("config key {key} in {} is not used by {command}", self.origin));
            }
        }
        (self.effective, self.warnings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(text: &str) -> Params {
        Params::new(parse_config_text(text, "run.cfg").unwrap(), "run.cfg")
    }

    #[test]
    fn flag_beats_file_with_warning() {
        let mut p = file("seed = 3\n");
        assert_eq!(p.get("seed", Some(7u64), 0).unwrap(), 7);
        let (eff, warnings) = p.finish("train");
        assert_eq!(eff["seed"], "7");
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("--seed 7 overrides seed=3"), "{warnings:?}");
    }

    #[test]
    fn file_beats_default() {
        let mut p = file("# comment\ntrain-frac=0.75\n");
        assert_eq!(p.get("train_frac", None, 0.8).unwrap(), 0.75);
        assert_eq!(p.get("epochs", None::<usize>, 30).unwrap(), 30);
        let (eff, warnings) = p.finish("train");
        assert!(warnings.is_empty());
        assert_eq!(eff["epochs"], "30");
    }

    #[test]
    fn bad_file_value_is_usage() {
        let mut p = file("epochs=many\n");
        assert!(matches!(p.get("epochs", None::<usize>, 30), Err(CliError::Usage(_))));
    }

    #[test]
    fn missing_required_names_flag() {
        let mut p = Params::default();
        match p.required::<String>("data", None) {
            Err(CliError::Usage(m)) => assert!(m.contains("--data")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unused_keys_warn() {
        let p = file("threshold=0.7\n");
        let (_, warnings) = p.finish("train");
        assert!(warnings[0].contains("threshold"));
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(parse_config_text("seed\n", "x"), Err(CliError::Usage(_))));
        assert!(matches!(parse_config_text("a=1\na=2\n", "x"), Err(CliError::Usage(_))));
    }
}
