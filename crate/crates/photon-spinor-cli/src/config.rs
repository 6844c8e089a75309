//! Run configuration: a JSON file merged with command-line flags (flags win).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use photon_spinor::report::Check;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub output_format: Option<Format>,
    pub output_path: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    /// Check name → tolerance. Names may omit the `module/` prefix and the `[...]`
    /// qualifier; `default` applies to every check not matched otherwise.
    pub tolerances: BTreeMap<String, f64>,
    pub output_format: Format,
    pub output_path: Option<PathBuf>,
}

pub const DEFAULT_SEED: u64 = 20240611;

impl RunConfig {
    pub fn load(path: Option<&Path>, seed: Option<u64>, format: Option<Format>, out: Option<PathBuf>) -> Result<Self, String> {
        let file = match path {
            Some(p) => {
                let src = std::fs::read_to_string(p).map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
                serde_json::from_str::<FileConfig>(&src).map_err(|e| format!("malformed config {}: {e}", p.display()))?
            }
            None => FileConfig::default(),
        };
        for (name, t) in &file.tolerances {
            if !t.is_finite() || *t <= 0.0 {
                return Err(format!("tolerance for '{name}' must be positive and finite, got {t}"));
            }
        }
        Ok(RunConfig {
            seed: seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            tolerances: file.tolerances,
            output_format: format.or(file.output_format).unwrap_or_default(),
            output_path: out.or(file.output_path),
        })
    }

    pub fn apply_tolerances(&self, checks: &mut [Check]) {
        for c in checks.iter_mut() {
            let local = c.name.split_once('/').map_or(c.name.as_str(), |x| x.1);
            let base = |n: &str| n.split('[').next().unwrap_or(n).to_string();
            let t = [c.name.clone(), base(&c.name), local.to_string(), base(local), "default".to_string()]
                .iter()
                .find_map(|k| self.tolerances.get(k));
            if let Some(t) = t {
                c.retolerance(*t);
            }
        }
    }
}
