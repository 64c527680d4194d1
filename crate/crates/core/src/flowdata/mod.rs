//! Flow-record ingestion and preprocessing: loading CICIDS2017-style CSV,
//! marker-row cleaning, constant-feature removal, label views, the
//! train/test split and min-max normalization.

mod csvio;
mod labels;
mod normalize;
mod schema;
mod split;

pub use csvio::{load_csv, load_csv_reader, read_feature_table, write_csv, write_provenance, FeatureTable};
pub use labels::{LabelView, ViewKind, ATTACK, CATEGORY_LABELS};
pub use normalize::{apply_normalizer, fit_normalizer, NormalizationStats};
pub use schema::{
    loose_key, DatasetSchema, FeatureKind, SchemaFlavor, BENIGN, CICIDS_CONSTANT_FEATURES,
    CICIDS_LABELS, FLOW_PACKETS_PER_SEC,
};
pub use split::{split, SelectionPolicy, SplitEntry, SplitSpec};

use crate::error::{Error, Result};
use crate::samples::Samples;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowRecord {
    pub values: Vec<f64>,
    /// Index into `DatasetSchema::fine_labels`.
    pub fine_label: usize,
}

impl FlowRecord {
    pub fn has_marker(&self) -> bool {
        self.values.iter().any(|v| !v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: DatasetSchema,
    pub records: Vec<FlowRecord>,
    /// One line per transform, oldest first.
    pub provenance: Vec<String>,
    /// Active label view; `None` means fine labels.
    pub view: Option<LabelView>,
}

impl Dataset {
    pub fn new(schema: DatasetSchema, records: Vec<FlowRecord>) -> Result<Self> {
        schema.validate()?;
        for (i, r) in records.iter().enumerate() {
            if r.values.len() != schema.width() {
                return Err(Error::WidthMismatch {
                    expected: schema.width(),
                    found: r.values.len(),
                });
            }
            if r.fine_label >= schema.fine_labels.len() {
                return Err(Error::UnknownClass(format!("record {i}: label index {}", r.fine_label)));
            }
        }
        Ok(Dataset {
            schema,
            records,
            provenance: Vec::new(),
            view: None,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn width(&self) -> usize {
        self.schema.width()
    }

    /// Vocabulary of the active label view.
    pub fn label_vocabulary(&self) -> &[String] {
        match &self.view {
            Some(v) => &v.vocabulary,
            None => &self.schema.fine_labels,
        }
    }

    pub fn label_of(&self, record: &FlowRecord) -> usize {
        match &self.view {
            Some(v) => v.map(record.fine_label),
            None => record.fine_label,
        }
    }

    pub fn label_name(&self, record: &FlowRecord) -> &str {
        &self.label_vocabulary()[self.label_of(record)]
    }

    pub fn fine_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.schema.fine_labels.len()];
        for r in &self.records {
            counts[r.fine_label] += 1;
        }
        counts
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.provenance.push(line.into());
    }

    /// Learner input under the active view.
    pub fn to_samples(&self) -> Result<Samples> {
        let mut values = Vec::with_capacity(self.len() * self.width());
        for r in &self.records {
            values.extend_from_slice(&r.values);
        }
        let labels = self.records.iter().map(|r| self.label_of(r)).collect();
        Samples::new(self.width(), values, labels, self.label_vocabulary().to_vec())
    }

    /// Appends the records of `other`, which must share this schema.
    pub fn concat(mut self, other: Dataset) -> Result<Dataset> {
        if other.schema.feature_names != self.schema.feature_names
            || other.schema.fine_labels != self.schema.fine_labels
        {
            return Err(Error::Schema("cannot concatenate datasets with different schemas".into()));
        }
        self.provenance.extend(other.provenance);
        self.records.extend(other.records);
        Ok(self)
    }
}

/// Removes rows carrying an Infinity or NaN marker.
///
/// CICIDS2017 schemas are cleaned on `Flow Packets/s` only; generic schemas
/// drop rows with a marker in any feature.
pub fn clean(d: &Dataset) -> Result<Dataset> {
    let keep: Box<dyn Fn(&FlowRecord) -> bool> = match d.schema.flavor {
        SchemaFlavor::Cicids2017 => {
            let idx = d.schema.feature_index(FLOW_PACKETS_PER_SEC).ok_or_else(|| {
                Error::Schema(format!("CICIDS2017 schema lacks {FLOW_PACKETS_PER_SEC:?}"))
            })?;
            Box::new(move |r: &FlowRecord| r.values[idx].is_finite())
        }
        SchemaFlavor::Generic => Box::new(|r: &FlowRecord| !r.has_marker()),
    };
    let records: Vec<FlowRecord> = d.records.iter().filter(|r| keep(r)).cloned().collect();
    let removed = d.len() - records.len();
    let mut out = Dataset {
        schema: d.schema.clone(),
        records,
        provenance: d.provenance.clone(),
        view: d.view.clone(),
    };
    let scope = match d.schema.flavor {
        SchemaFlavor::Cicids2017 => FLOW_PACKETS_PER_SEC,
        SchemaFlavor::Generic => "any feature",
    };
    out.note(format!("clean: removed {removed} rows with Infinity/NaN in {scope}"));
    Ok(out)
}

/// Removes the `explicit` features, or every constant feature when `None`.
pub fn drop_constant_features(d: &Dataset, explicit: Option<&[&str]>) -> Result<Dataset> {
    let mut drop = vec![false; d.width()];
    match explicit {
        Some(names) => {
            for name in names {
                let idx = d
                    .schema
                    .resolve_feature(name)
                    .ok_or_else(|| Error::UnknownFeature(name.to_string()))?;
                drop[idx] = true;
            }
        }
        None => {
            if let Some(first) = d.records.first() {
                for (f, flag) in drop.iter_mut().enumerate() {
                    let v0 = first.values[f];
                    *flag = d.records.iter().all(|r| r.values[f] == v0);
                }
            }
        }
    }
    let keep: Vec<usize> = (0..d.width()).filter(|&f| !drop[f]).collect();
    let dropped: Vec<&str> = (0..d.width())
        .filter(|&f| drop[f])
        .map(|f| d.schema.feature_names[f].as_str())
        .collect();

    let mut schema = d.schema.clone();
    schema.feature_names = keep.iter().map(|&f| d.schema.feature_names[f].clone()).collect();
    schema.feature_kinds = keep.iter().map(|&f| d.schema.feature_kinds[f]).collect();
    let records = d
        .records
        .iter()
        .map(|r| FlowRecord {
            values: keep.iter().map(|&f| r.values[f]).collect(),
            fine_label: r.fine_label,
        })
        .collect();
    let mut out = Dataset {
        schema,
        records,
        provenance: d.provenance.clone(),
        view: d.view.clone(),
    };
    let mode = if explicit.is_some() { "explicit" } else { "auto" };
    out.note(format!(
        "drop_constant_features ({mode}): removed {} [{}]",
        dropped.len(),
        dropped.join(", ")
    ));
    Ok(out)
}

/// Keeps the named features, in the given order.
pub fn select_features(d: &Dataset, names: &[String]) -> Result<Dataset> {
    let idx = names
        .iter()
        .map(|n| d.schema.feature_index(n).ok_or_else(|| Error::UnknownFeature(n.clone())))
        .collect::<Result<Vec<_>>>()?;
    let mut schema = d.schema.clone();
    schema.feature_names = names.to_vec();
    schema.feature_kinds = idx.iter().map(|&f| d.schema.feature_kinds[f]).collect();
    let records = d
        .records
        .iter()
        .map(|r| FlowRecord {
            values: idx.iter().map(|&f| r.values[f]).collect(),
            fine_label: r.fine_label,
        })
        .collect();
    Ok(Dataset {
        schema,
        records,
        provenance: d.provenance.clone(),
        view: d.view.clone(),
    })
}

/// Switches the label column to `kind`; fine labels stay on every record.
pub fn relabel(d: &Dataset, kind: ViewKind) -> Result<Dataset> {
    let view = LabelView::new(kind, &d.schema.fine_labels)?;
    let mut out = d.clone();
    out.view = Some(view);
    out.note(format!("relabel: {kind} view"));
    Ok(out)
}
