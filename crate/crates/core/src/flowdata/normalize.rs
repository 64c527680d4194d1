use super::schema::FeatureKind;
use super::{Dataset, FlowRecord};
use crate::error::{Error, Result};
use crate::textfmt::{fmt_f64, parse_num, LineReader};

/// Per-feature min/max fitted on training data.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationStats {
    pub feature_names: Vec<String>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormalizationStats {
    pub fn width(&self) -> usize {
        self.feature_names.len()
    }

    /// `(x - min) / (max - min)` clamped to [0, 1]; 0 when `max == min`.
    pub fn scale(&self, feature: usize, x: f64) -> f64 {
        let (lo, hi) = (self.min[feature], self.max[feature]);
        if hi <= lo {
            return 0.0;
        }
        ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
    }

    /// Scales a row laid out in this stats' feature order.
    pub fn normalize_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        crate::samples::check_width(self.width(), row)?;
        row.iter()
            .enumerate()
            .map(|(f, &x)| {
                if x.is_finite() {
                    Ok(self.scale(f, x))
                } else {
                    Err(Error::InvalidValue {
                        line: 0,
                        column: self.feature_names[f].clone(),
                        value: x.to_string(),
                    })
                }
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("hids-normstats v1\nfeatures {}\n", self.width());
        for f in 0..self.width() {
            out.push_str(&format!(
                "{} {} {}\n",
                fmt_f64(self.min[f]),
                fmt_f64(self.max[f]),
                self.feature_names[f]
            ));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = LineReader::new(text);
        r.expect_header("hids-normstats", 1)?;
        let n: usize = r.keyed_parse("features")?;
        let mut stats = NormalizationStats {
            feature_names: Vec::with_capacity(n),
            min: Vec::with_capacity(n),
            max: Vec::with_capacity(n),
        };
        for _ in 0..n {
            let line = r.next_line()?;
            let ln = r.line_no();
            let mut parts = line.splitn(3, ' ');
            stats.min.push(parse_num(parts.next(), ln, "min")?);
            stats.max.push(parse_num(parts.next(), ln, "max")?);
            let name = parts.next().ok_or_else(|| r.err("missing feature name"))?;
            stats.feature_names.push(name.to_string());
        }
        Ok(stats)
    }
}

pub fn fit_normalizer(train: &Dataset) -> Result<NormalizationStats> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(f) = train
        .schema
        .feature_kinds
        .iter()
        .position(|k| *k != FeatureKind::Numeric)
    {
        return Err(Error::Schema(format!(
            "feature {:?} is not numeric",
            train.schema.feature_names[f]
        )));
    }
    let w = train.width();
    let mut min = vec![f64::INFINITY; w];
    let mut max = vec![f64::NEG_INFINITY; w];
    for r in &train.records {
        for (f, &x) in r.values.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::InvalidValue {
                    line: 0,
                    column: train.schema.feature_names[f].clone(),
                    value: x.to_string(),
                });
            }
            min[f] = min[f].min(x);
            max[f] = max[f].max(x);
        }
    }
    Ok(NormalizationStats {
        feature_names: train.schema.feature_names.clone(),
        min,
        max,
    })
}

/// Scales every feature into [0, 1]; features are matched to stats by name.
pub fn apply_normalizer(d: &Dataset, stats: &NormalizationStats) -> Result<Dataset> {
    let map = d
        .schema
        .feature_names
        .iter()
        .map(|n| {
            stats
                .feature_names
                .iter()
                .position(|s| s == n)
                .ok_or_else(|| Error::UnknownFeature(n.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let records = d
        .records
        .iter()
        .map(|r| {
            let values = r
                .values
                .iter()
                .zip(&map)
                .zip(&d.schema.feature_names)
                .map(|((&x, &s), name)| {
                    if x.is_finite() {
                        Ok(stats.scale(s, x))
                    } else {
                        Err(Error::InvalidValue {
                            line: 0,
                            column: name.clone(),
                            value: x.to_string(),
                        })
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(FlowRecord {
                values,
                fine_label: r.fine_label,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Dataset {
        schema: d.schema.clone(),
        records,
        provenance: d.provenance.clone(),
        view: d.view.clone(),
    };
    out.note("normalize: min-max with clamping to [0, 1]");
    Ok(out)
}
