//! Flat `key = value` defaults file, merged under command-line flags.
//! Flags always win; the file only fills in what was not given.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn empty() -> Self {
        FileConfig { values: HashMap::new() }
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("{}:{}: expected `key = value`", path.display(), lineno + 1))?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    /// `flag` when given, else the parsed config value, else `None`.
    pub fn merge<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, String> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| format!("config key `{key}` has unusable value `{raw}`")),
            None => Ok(None),
        }
    }

    /// All `penalty.<kind> = value` entries.
    pub fn penalty_entries(&self) -> Vec<(String, String)> {
        let mut entries: Vec<(String, String)> = self
            .values
            .iter()
            .filter_map(|(k, v)| {
                k.strip_prefix("penalty.").map(|kind| (kind.to_string(), v.clone()))
            })
            .collect();
        entries.sort();
        entries
    }
}
