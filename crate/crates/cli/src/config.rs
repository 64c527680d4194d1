//! Run configuration: defaults, then the TOML config file, then `--set`
//! overrides, then dedicated flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hids_core::flowdata::{SelectionPolicy, ViewKind, CICIDS_CONSTANT_FEATURES};
use hids_core::metrics::ReportFormat;
use hids_core::registry::Params;
use hids_core::stack::{HierarchyConfig, StageConfig};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum SplitSource {
    Table2,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConstantFeatures {
    Auto,
    /// The published CICIDS2017 list.
    Cicids,
    Off,
    Names(Vec<String>),
}

impl ConstantFeatures {
    pub fn names(&self) -> Option<Vec<String>> {
        match self {
            ConstantFeatures::Auto => None,
            ConstantFeatures::Cicids => Some(CICIDS_CONSTANT_FEATURES.iter().map(|s| s.to_string()).collect()),
            ConstantFeatures::Off => Some(Vec::new()),
            ConstantFeatures::Names(n) => Some(n.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out_dir: PathBuf,
    pub format: ReportFormat,
    pub timing: bool,
    pub split: SplitSource,
    pub train_policy: Option<SelectionPolicy>,
    pub test_policy: Option<SelectionPolicy>,
    pub constant_features: ConstantFeatures,
    pub stages: [StageConfig; 3],
    pub stage3_view: ViewKind,
}

impl RunConfig {
    pub fn require_seed(&self, command: &str) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Config(format!("{command} needs a seed (--seed or `seed` in the config)")))
    }

    pub fn hierarchy(&self, seed: u64) -> HierarchyConfig {
        HierarchyConfig {
            stages: self.stages.clone(),
            stage3_view: self.stage3_view,
            seed,
        }
    }
}

/// Flattened `section.key -> value` view of the settings.
#[derive(Debug, Default)]
pub struct Settings(BTreeMap<String, String>);

impl Settings {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, CliError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut out = Settings::default();
        flatten("", &table, &mut out.0)?;
        Ok(out)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(key.to_string(), value.into());
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, raw: &str) -> Result<(), CliError> {
        let (k, v) = raw
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects key=value, got {raw:?}")))?;
        self.set(k.trim(), v.trim());
        Ok(())
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.0.remove(key)
    }

    fn take_parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError> {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Config(format!("bad value {v:?} for {key}"))),
        }
    }

    pub fn into_config(mut self) -> Result<RunConfig, CliError> {
        let seed = self.take_parsed("seed")?;
        let threads = self.take_parsed("threads")?;
        if threads == Some(0) {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        let out_dir = self.take("out_dir").map_or_else(|| PathBuf::from("."), PathBuf::from);
        let format = self
            .take("format")
            .map_or(Ok(ReportFormat::Table), |f| f.parse())
            .map_err(|e| CliError::Config(e.to_string()))?;
        let timing = self.take_parsed("timing")?.unwrap_or(false);
        let split = match self.take("split.spec").as_deref() {
            None | Some("table2") => SplitSource::Table2,
            Some(path) => SplitSource::File(PathBuf::from(path)),
        };
        let policy = |v: Option<String>| -> Result<Option<SelectionPolicy>, CliError> {
            v.map(|p| p.parse().map_err(|e: hids_core::Error| CliError::Config(e.to_string())))
                .transpose()
        };
        let train_policy = policy(self.take("split.train_policy"))?;
        let test_policy = policy(self.take("split.test_policy"))?;
        let constant_features = match self.take("clean.constant_features").as_deref() {
            None | Some("auto") => ConstantFeatures::Auto,
            Some("cicids") => ConstantFeatures::Cicids,
            Some("none") => ConstantFeatures::Off,
            Some(list) => ConstantFeatures::Names(
                list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
            ),
        };
        let stage3_view = self
            .take("stage3.view")
            .map_or(Ok(ViewKind::Fine), |v| v.parse())
            .map_err(|e| CliError::Config(e.to_string()))?;

        let defaults = HierarchyConfig::default().stages;
        let mut stages = defaults.clone();
        for (i, stage) in stages.iter_mut().enumerate() {
            let prefix = format!("stage{}.", i + 1);
            if let Some(l) = self.take(&format!("{prefix}learner")) {
                stage.learner = l;
            }
            let keys: Vec<String> = self.0.keys().filter(|k| k.starts_with(&prefix)).cloned().collect();
            let mut params = Params::new();
            for k in keys {
                let v = self.take(&k).unwrap_or_default();
                params.set(&k[prefix.len()..], v);
            }
            stage.params = params;
        }
        if let Some(k) = self.0.keys().next() {
            return Err(CliError::Config(format!("unknown configuration key {k:?}")));
        }
        Ok(RunConfig {
            seed,
            threads,
            out_dir,
            format,
            timing,
            split,
            train_policy,
            test_policy,
            constant_features,
            stages,
            stage3_view,
        })
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, String>) -> Result<(), CliError> {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        let text = match v {
            toml::Value::Table(t) => {
                flatten(&key, t, out)?;
                continue;
            }
            toml::Value::String(s) => s.clone(),
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            toml::Value::Boolean(b) => b.to_string(),
            toml::Value::Array(items) => items
                .iter()
                .map(|i| match i {
                    toml::Value::String(s) => Ok(s.clone()),
                    other => Err(CliError::Config(format!("{key}: expected strings, found {other}"))),
                })
                .collect::<Result<Vec<_>, _>>()?
                .join(","),
            toml::Value::Datetime(_) => {
                return Err(CliError::Config(format!("{key}: dates are not supported")));
            }
        };
        out.insert(key, text);
    }
    Ok(())
}
