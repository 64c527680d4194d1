use crate::error::{Error, Result};

/// The fifteen CICIDS2017 classes, BENIGN first, attacks in the order
/// used for reporting.
pub const CICIDS_LABELS: [&str; 15] = [
    "BENIGN",
    "DDoS",
    "DoS slowloris",
    "DoS Slowhttptest",
    "DoS Hulk",
    "DoS GoldenEye",
    "Heartbleed",
    "PortScan",
    "Bot",
    "FTP-Patator",
    "SSH-Patator",
    "Web Attack - Brute Force",
    "Web Attack - XSS",
    "Web Attack - Sql Injection",
    "Infiltration",
];

pub const BENIGN: &str = "BENIGN";

/// Feature whose Infinity/NaN markers drive row removal on CICIDS2017 data.
pub const FLOW_PACKETS_PER_SEC: &str = "Flow Packets/s";

/// Features that hold a single value across the whole CICIDS2017 corpus.
///
/// The published list names "Fwd Avg Bytes/Bulk" twice; the duplicate is
/// kept here verbatim and collapses to eight unique features on lookup.
/// Names use slashes where the public CSV headers use spaces
/// ("Fwd Avg Bulk/Rate" vs "Fwd Avg Bulk Rate"); lookup tolerates both.
pub const CICIDS_CONSTANT_FEATURES: [&str; 9] = [
    "Bwd PSH Flags",
    "Bwd URG Flags",
    "Fwd Avg Bytes/Bulk",
    "Fwd Avg Packets/Bulk",
    "Fwd Avg Bulk/Rate",
    "Bwd Avg Bytes/Bulk",
    "Bwd Avg Packets/Bulk",
    "Bwd Avg Bulk/Rate",
    "Fwd Avg Bytes/Bulk",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemaFlavor {
    /// Header carries the CICIDS2017 columns; cleaning keys on `Flow Packets/s`.
    Cicids2017,
    Generic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSchema {
    pub feature_names: Vec<String>,
    pub feature_kinds: Vec<FeatureKind>,
    pub label_column: String,
    pub fine_labels: Vec<String>,
    pub flavor: SchemaFlavor,
}

impl DatasetSchema {
    /// Numeric schema over the CICIDS2017 label vocabulary. The flavor is
    /// inferred from the presence of `Flow Packets/s`.
    pub fn numeric(feature_names: Vec<String>, label_column: impl Into<String>) -> Result<Self> {
        let flavor = if feature_names.iter().any(|n| n == FLOW_PACKETS_PER_SEC) {
            SchemaFlavor::Cicids2017
        } else {
            SchemaFlavor::Generic
        };
        let schema = DatasetSchema {
            feature_kinds: vec![FeatureKind::Numeric; feature_names.len()],
            feature_names,
            label_column: label_column.into(),
            fine_labels: CICIDS_LABELS.iter().map(|s| s.to_string()).collect(),
            flavor,
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_names.len() != self.feature_kinds.len() {
            return Err(Error::Schema(format!(
                "{} feature names but {} kinds",
                self.feature_names.len(),
                self.feature_kinds.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for name in &self.feature_names {
            if name.is_empty() {
                return Err(Error::Schema("empty feature name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::Schema(format!("duplicate feature name {name:?}")));
            }
        }
        if seen.contains(self.label_column.as_str()) {
            return Err(Error::Schema(format!(
                "label column {:?} is also a feature",
                self.label_column
            )));
        }
        if self.fine_labels.is_empty() {
            return Err(Error::Schema("empty label vocabulary".into()));
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    /// Exact match first, then a match ignoring case, spaces and punctuation.
    pub fn resolve_feature(&self, name: &str) -> Option<usize> {
        let name = name.trim();
        self.feature_index(name).or_else(|| {
            let key = loose_key(name);
            self.feature_names.iter().position(|n| loose_key(n) == key)
        })
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.fine_labels
            .iter()
            .position(|l| l == label)
            .or_else(|| {
                let key = loose_key(label);
                self.fine_labels.iter().position(|l| loose_key(l) == key)
            })
    }
}

/// Lowercased alphanumerics only. Maps "Web Attack \u{fffd} XSS" (the
/// mis-encoded dash in the public CSVs) and "Web Attack-XSS" to one key.
pub fn loose_key(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_aliases_resolve() {
        let schema = DatasetSchema::numeric(vec!["a".into()], "Label").unwrap();
        assert_eq!(schema.label_index("Web Attack \u{fffd} Brute Force"), Some(11));
        assert_eq!(schema.label_index("Web Attack-Sql Injection"), Some(13));
        assert_eq!(schema.label_index("BENIGN"), Some(0));
        assert_eq!(schema.label_index("Nope"), None);
    }

    #[test]
    fn rejects_bad_schemas() {
        assert!(DatasetSchema::numeric(vec!["a".into(), "a".into()], "Label").is_err());
        assert!(DatasetSchema::numeric(vec!["Label".into()], "Label").is_err());
        assert!(DatasetSchema::numeric(vec!["".into()], "Label").is_err());
    }

    #[test]
    fn flavor_follows_header() {
        let s = DatasetSchema::numeric(vec!["Flow Packets/s".into()], "Label").unwrap();
        assert_eq!(s.flavor, SchemaFlavor::Cicids2017);
        let s = DatasetSchema::numeric(vec!["f1".into()], "Label").unwrap();
        assert_eq!(s.flavor, SchemaFlavor::Generic);
    }

    #[test]
    fn published_constant_list_has_eight_unique_names() {
        let unique: std::collections::BTreeSet<_> = CICIDS_CONSTANT_FEATURES.iter().collect();
        assert_eq!(unique.len(), 8);
    }
}
