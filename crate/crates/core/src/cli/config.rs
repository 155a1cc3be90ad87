//! Flat `key = value` configuration files.
//!
//! ```text
//! # comment
//! model.family = spinless-fermion-ring
//! model.sites  = 4
//! partition.a  = 0, 1
//! ```
//!
//! Keys are dotted section names. Lists are comma separated. Every error
//! names the offending line.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, Entry>,
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key
            .split('.')
            .all(|part| !part.is_empty() && part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'))
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::at(
                    line,
                    format!("expected `key = value`, found `{content}`"),
                ));
            };
            let (key, value) = (key.trim(), value.trim());
            if !valid_key(key) {
                return Err(ConfigError::at(line, format!("malformed key `{key}`")));
            }
            if value.is_empty() {
                return Err(ConfigError::at(line, format!("missing value for `{key}`")));
            }
            if let Some(prev) = entries.get(key).map(|e: &Entry| e.line) {
                return Err(ConfigError::at(
                    line,
                    format!("duplicate key `{key}` (first set on line {prev})"),
                ));
            }
            entries.insert(
                key.to_string(),
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        Ok(Self { entries })
    }

    /// Rejects keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), ConfigError> {
        for (key, e) in &self.entries {
            if !allowed.contains(&key.as_str()) {
                return Err(ConfigError::at(e.line, format!("unknown key `{key}`")));
            }
        }
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn line(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|e| e.line)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    /// Error attached to the line of `key`, or unlocated when it is absent.
    pub fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: self.line(key),
            message: message.into(),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => parse_value(&e.value)
                .map(Some)
                .ok_or_else(|| ConfigError::at(e.line, format!("invalid value `{}` for `{key}`", e.value))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        self.get(key)?.ok_or_else(|| ConfigError {
            line: None,
            message: format!("missing required key `{key}`"),
        })
    }

    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, ConfigError> {
        let Some(e) = self.entries.get(key) else {
            return Ok(None);
        };
        e.value
            .split(',')
            .map(|item| {
                parse_value(item.trim())
                    .ok_or_else(|| ConfigError::at(e.line, format!("invalid list item `{}` in `{key}`", item.trim())))
            })
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }

    /// `key = value` lines in key order.
    pub fn echo(&self) -> Vec<String> {
        self.entries.iter().map(|(k, e)| format!("{k} = {}", e.value)).collect()
    }
}

/// Accepts plain `FromStr` input and, for numbers, fractions such as `1/30`.
fn parse_value<T: FromStr>(s: &str) -> Option<T> {
    if let Ok(v) = s.parse() {
        return Some(v);
    }
    let (num, den) = s.split_once('/')?;
    let (num, den): (f64, f64) = (num.trim().parse().ok()?, den.trim().parse().ok()?);
    if den == 0.0 {
        return None;
    }
    let v = num / den;
    if !v.is_finite() {
        return None;
    }
    // only reaches T = f64 in practice; integers reject the decimal form
    format!("{v:?}").parse().ok()
}

/// Grid spacing of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

impl FromStr for Spacing {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "linear" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            _ => Err(()),
        }
    }
}

impl fmt::Display for Spacing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spacing::Linear => "linear",
            Spacing::Log => "log",
        })
    }
}

/// `points` values from `start` to `stop`, both included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Sweep {
    pub fn new(start: f64, stop: f64, points: usize, spacing: Spacing) -> Self {
        Self {
            start,
            stop,
            points,
            spacing,
        }
    }

    /// Keys a sweep named `prefix` reads.
    pub fn keys(prefix: &str) -> [String; 4] {
        ["start", "stop", "points", "spacing"].map(|k| format!("{prefix}.{k}"))
    }

    /// Reads `prefix.start`, `prefix.stop`, `prefix.points` and
    /// `prefix.spacing`, falling back to `default` field by field.
    pub fn from_config(cfg: &Config, prefix: &str, default: Sweep) -> Result<Self, ConfigError> {
        let [start, stop, points, spacing] = Self::keys(prefix);
        let s = Sweep {
            start: cfg.get_or(&start, default.start)?,
            stop: cfg.get_or(&stop, default.stop)?,
            points: cfg.get_or(&points, default.points)?,
            spacing: cfg.get_or(&spacing, default.spacing)?,
        };
        if !s.start.is_finite() || !s.stop.is_finite() {
            return Err(cfg.error(&start, format!("sweep `{prefix}` bounds must be finite")));
        }
        if s.points < 2 {
            return Err(cfg.error(&points, format!("sweep `{prefix}` needs at least 2 points")));
        }
        if s.spacing == Spacing::Log && (s.start <= 0.0 || s.stop <= 0.0) {
            return Err(cfg.error(&spacing, format!("log sweep `{prefix}` needs positive bounds")));
        }
        Ok(s)
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                let x = i as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.start + (self.stop - self.start) * x,
                    Spacing::Log => (self.start.ln() + (self.stop.ln() - self.start.ln()) * x).exp(),
                }
            })
            .collect()
    }

    pub fn describe(&self) -> String {
        format!(
            "{} to {}, {} points, {}",
            self.start, self.stop, self.points, self.spacing
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_entries_lists_and_fractions() {
        let cfg = Config::parse("# header\nmodel.sites = 4\n\npartition.a = 0, 1 # trailing\nx.f = 1/30\n").unwrap();
        assert_eq!(cfg.get::<usize>("model.sites").unwrap(), Some(4));
        assert_eq!(cfg.get_list::<usize>("partition.a").unwrap(), Some(vec![0, 1]));
        assert!((cfg.require::<f64>("x.f").unwrap() - 1.0 / 30.0).abs() < 1e-17);
        assert_eq!(cfg.line("partition.a"), Some(4));
        assert_eq!(cfg.echo()[0], "model.sites = 4");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = Config::parse("a.b = 1\nnot a pair\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        let e = Config::parse("a.b = 1\na.b = 2\n").unwrap_err();
        assert!(e.to_string().starts_with("line 2: duplicate key"));
        let cfg = Config::parse("model.sites = 4\nmodel.tt = 1\n").unwrap();
        let e = cfg.check_keys(&["model.sites", "model.t"]).unwrap_err();
        assert_eq!(e.to_string(), "line 2: unknown key `model.tt`");
        let cfg = Config::parse("\nmodel.sites = four\n").unwrap();
        assert_eq!(cfg.get::<usize>("model.sites").unwrap_err().line, Some(2));
    }

    #[test]
    fn sweep_grids() {
        let lin = Sweep::new(0.0, 1.0, 5, Spacing::Linear).values();
        assert_eq!(lin, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let log = Sweep::new(1.0, 100.0, 3, Spacing::Log).values();
        assert!((log[1] - 10.0).abs() < 1e-12 && (log[2] - 100.0).abs() < 1e-12);
        let cfg = Config::parse("s.points = 1\n").unwrap();
        assert!(Sweep::from_config(&cfg, "s", Sweep::new(0.0, 1.0, 3, Spacing::Linear)).is_err());
    }
}
