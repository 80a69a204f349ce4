//! Flat key-value config file with bracketed arrays, merged under CLI flags.
//!
//! ```text
//! omega = [0.0, 0.3]
//! s = 1.5
//! n_samples = 512
//! ```

use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError(format!("config line {} is not key = value", lineno + 1)));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| ConfigError(format!("config key {key} is not a number: {v}"))),
        }
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<usize>()
                .map(Some)
                .map_err(|_| ConfigError(format!("config key {key} is not an integer: {v}"))),
        }
    }

    pub fn string(&self, key: &str) -> Option<String> {
        self.values.get(key).cloned()
    }

    /// Bracketed comma list: `[c0, c1, ...]`.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => parse_list(v).map(Some),
        }
    }
}

pub fn parse_list(v: &str) -> Result<Vec<f64>, ConfigError> {
    let inner = v
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| ConfigError(format!("expected a bracketed list, got {v}")))?;
    let mut out = Vec::new();
    for piece in inner.split(',') {
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        out.push(
            piece
                .parse::<f64>()
                .map_err(|_| ConfigError(format!("list entry is not a number: {piece}")))?,
        );
    }
    if out.is_empty() {
        return Err(ConfigError("empty coefficient list".to_string()));
    }
    Ok(out)
}

/// Grid-size validation: powers of two between 16 and 1024.
pub fn validate_grid(name: &str, n: usize) -> Result<(), ConfigError> {
    if !(16..=1024).contains(&n) || !n.is_power_of_two() {
        return Err(ConfigError(format!(
            "{name} = {n} must be a power of two between 16 and 1024"
        )));
    }
    Ok(())
}

/// Tolerance validation: positive, and not tighter than the built-in floors.
pub fn validate_tolerances(cfg: &FileConfig) -> Result<(), ConfigError> {
    if let Some(t) = cfg.f64("tol_quad")? {
        if !(t > 0.0) {
            return Err(ConfigError(format!("tol_quad = {t} must be positive")));
        }
        if t < wavebranch_core::stream::QUAD_TOL {
            return Err(ConfigError(format!(
                "tol_quad = {t:e} is tighter than the built-in quadrature floor 1e-12"
            )));
        }
    }
    if let Some(t) = cfg.f64("tol_root")? {
        if !(t > 0.0) {
            return Err(ConfigError(format!("tol_root = {t} must be positive")));
        }
        if t < 1e-13 {
            return Err(ConfigError(format!(
                "tol_root = {t:e} is tighter than the built-in root floor 1e-13"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_lists_comments() {
        let cfg = FileConfig::parse("omega = [0.0, 0.3] # vorticity\ns = 1.5\nn = 512\n").unwrap();
        assert_eq!(cfg.f64_list("omega").unwrap().unwrap(), vec![0.0, 0.3]);
        assert_eq!(cfg.f64("s").unwrap().unwrap(), 1.5);
        assert_eq!(cfg.usize("n").unwrap().unwrap(), 512);
        assert!(cfg.f64("missing").unwrap().is_none());
    }

    #[test]
    fn grid_rule() {
        assert!(validate_grid("n", 512).is_ok());
        assert!(validate_grid("n", 48).is_err());
        assert!(validate_grid("n", 2048).is_err());
        assert!(validate_grid("n", 8).is_err());
    }

    #[test]
    fn tolerance_rule() {
        let bad = FileConfig::parse("tol_quad = -1.0").unwrap();
        assert!(validate_tolerances(&bad).is_err());
        let tight = FileConfig::parse("tol_quad = 1e-15").unwrap();
        assert!(validate_tolerances(&tight).is_err());
        let ok = FileConfig::parse("tol_quad = 1e-10\ntol_root = 1e-10").unwrap();
        assert!(validate_tolerances(&ok).is_ok());
    }
}
