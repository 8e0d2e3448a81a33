//! Plain-text experiment configs: one `[command]` header followed by
//! `key = value` lines. `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Command {
    Flow,
    Rescaled,
    Profile,
    Wave,
    Curve,
    Classify,
}

impl Command {
    pub const ALL: [Command; 6] =
        [Command::Flow, Command::Rescaled, Command::Profile, Command::Wave, Command::Curve, Command::Classify];

    pub fn name(self) -> &'static str {
        match self {
            Command::Flow => "flow",
            Command::Rescaled => "rescaled",
            Command::Profile => "profile",
            Command::Wave => "wave",
            Command::Curve => "curve",
            Command::Classify => "classify",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown command `{s}`")))
    }
}

/// Parsed config: the section name and its keys in sorted order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub values: BTreeMap<String, String>,
    /// Directory relative paths in the config resolve against.
    pub base_dir: PathBuf,
    pub output_dir: PathBuf,
    pub emit_svg: bool,
}

impl ExperimentConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut command = None;
        let mut values = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = k + 1;
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                if command.is_some() {
                    return Err(CliError::Config(format!("line {lineno}: a config holds exactly one [section]")));
                }
                command = Some(name.trim().parse::<Command>()?);
                continue;
            }
            if command.is_none() {
                return Err(CliError::Config(format!("line {lineno}: key before any [section] header")));
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {lineno}: expected `key = value`")))?;
            let key = key.trim().to_string();
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::Config(format!("line {lineno}: duplicate key `{key}`")));
            }
        }
        let command = command.ok_or_else(|| CliError::Config("config has no [section] header".into()))?;
        Ok(ExperimentConfig {
            command,
            values,
            base_dir: base_dir.to_path_buf(),
            output_dir: PathBuf::from("out"),
            emit_svg: false,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base)
    }

    /// Rejects keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        match self.values.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::Config(format!(
                "unknown key `{k}` for [{}]; allowed: {}",
                self.command,
                allowed.join(", ")
            ))),
            None => Ok(()),
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|_| CliError::Config(format!("cannot parse `{key} = {v}`"))))
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        self.get(key)?.ok_or_else(|| CliError::Config(format!("missing key `{key}` in [{}]", self.command)))
    }

    /// Comma-separated list of numbers.
    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let Some(raw) = self.raw(key) else {
            return Ok(None);
        };
        raw.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| CliError::Config(format!("cannot parse `{key} = {raw}`"))))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        match self.raw(key) {
            None | Some("false") => Ok(false),
            Some("true") => Ok(true),
            Some(v) => Err(CliError::Config(format!("`{key} = {v}` must be true or false"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_keys() {
        let c = ExperimentConfig::parse("# run\n[flow]\np = 2  # exponent\nv0 = bell 1.5\n\n", Path::new("")).unwrap();
        assert_eq!(c.command, Command::Flow);
        assert_eq!(c.require::<f64>("p").unwrap(), 2.0);
        assert_eq!(c.raw("v0"), Some("bell 1.5"));
        assert!(c.check_keys(&["p", "v0"]).is_ok());
        assert!(c.check_keys(&["p"]).is_err());
    }

    #[test]
    fn rejects_malformed() {
        let base = Path::new("");
        for bad in ["p = 2\n", "[flow]\n[wave]\n", "[nope]\n", "[flow]\np 2\n", "[flow]\np=1\np=2\n", ""] {
            assert!(matches!(ExperimentConfig::parse(bad, base), Err(CliError::Config(_))), "{bad:?}");
        }
        let c = ExperimentConfig::parse("[wave]\nc = 0.5, x\n", base).unwrap();
        assert!(c.list("c").is_err());
        assert!(c.require::<f64>("p").is_err());
    }
}
