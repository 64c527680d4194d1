//! The three-stage hierarchy.
//!
//! Stage 1 separates benign from attack traffic, stage 2 assigns an attack
//! family, and stage 3 sees the normalized features plus both earlier
//! predictions (as two scaled code columns) and emits the final label.

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::flowdata::{apply_normalizer, fit_normalizer, Dataset, LabelView, NormalizationStats, ViewKind};
use crate::registry::{Classifier, Params, Registry};
use crate::samples::Samples;
use crate::textfmt::LineReader;

pub const MAGIC: &str = "hids-hierarchy";

/// Code of `label` in `table`: its index scaled into [0, 1].
pub fn encode_prediction(label: &str, table: &[String]) -> Result<f64> {
    let idx = table
        .iter()
        .position(|l| l == label)
        .ok_or_else(|| Error::UnknownClass(label.to_string()))?;
    Ok(encode_index(idx, table.len()))
}

pub fn encode_index(idx: usize, table_len: usize) -> f64 {
    if table_len <= 1 {
        0.0
    } else {
        idx as f64 / (table_len - 1) as f64
    }
}

/// Inverse of `encode_prediction`; picks the nearest table entry.
pub fn decode_prediction(code: f64, table: &[String]) -> Result<&str> {
    if table.is_empty() || !(0.0..=1.0).contains(&code) {
        return Err(Error::UnknownClass(format!("code {code}")));
    }
    let idx = (code * (table.len() - 1) as f64).round() as usize;
    Ok(&table[idx])
}

/// `record` followed by the codes of the two stage outputs.
pub fn augment(record: &[f64], out1: &str, out2: &str, codes1: &[String], codes2: &[String]) -> Result<Vec<f64>> {
    let mut row = Vec::with_capacity(record.len() + 2);
    row.extend_from_slice(record);
    row.push(encode_prediction(out1, codes1)?);
    row.push(encode_prediction(out2, codes2)?);
    Ok(row)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageConfig {
    pub learner: String,
    pub params: Params,
}

impl StageConfig {
    pub fn new(learner: &str) -> Self {
        StageConfig {
            learner: learner.to_string(),
            params: Params::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyConfig {
    pub stages: [StageConfig; 3],
    /// Label space of the final stage.
    pub stage3_view: ViewKind,
    /// Used as every stage's `seed` unless that stage sets its own.
    pub seed: u64,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        HierarchyConfig {
            stages: [
                StageConfig::new("reptree"),
                StageConfig::new("ripper"),
                StageConfig::new("forestpa"),
            ],
            stage3_view: ViewKind::Fine,
            seed: 1,
        }
    }
}

impl HierarchyConfig {
    fn stage_params(&self, stage: usize) -> Params {
        let mut p = self.stages[stage].params.clone();
        if p.get("seed").is_none() {
            p.set("seed", self.seed.to_string());
        }
        p
    }
}

const STAGE_NAMES: [&str; 3] = ["model1", "model2", "model3"];

/// Predicted class index of each stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageOutputs {
    pub binary: usize,
    pub category: usize,
    pub final_label: usize,
}

#[derive(Debug)]
pub struct HierarchicalModel {
    pub stats: NormalizationStats,
    pub fine_labels: Vec<String>,
    pub stage3_view: ViewKind,
    pub model1: Box<dyn Classifier>,
    pub model2: Box<dyn Classifier>,
    pub model3: Box<dyn Classifier>,
    pub seed: u64,
}

fn view_samples(base: &Samples, fine_labels: &[usize], view: &LabelView) -> Result<Samples> {
    let values: Vec<f64> = base.rows().flatten().copied().collect();
    let labels = fine_labels.iter().map(|&f| view.map(f)).collect();
    Samples::new(base.width(), values, labels, view.vocabulary.clone())
}

pub fn train_hierarchy(train: &Dataset, config: &HierarchyConfig, registry: &Registry) -> Result<HierarchicalModel> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let learners = [0, 1, 2].map(|i| registry.get(&config.stages[i].learner));
    let [l1, l2, l3] = learners;
    let (l1, l2, l3) = (l1?, l2?, l3?);

    let stats = fit_normalizer(train)?;
    let mut normalized = apply_normalizer(train, &stats)?;
    normalized.view = None;
    let fine = normalized.to_samples()?;
    let fine_labels = fine.labels().to_vec();
    let fine_vocab = &train.schema.fine_labels;
    let binary = LabelView::new(ViewKind::Binary, fine_vocab).map_err(Error::stage("model1"))?;
    let category = LabelView::new(ViewKind::Category, fine_vocab).map_err(Error::stage("model2"))?;
    let view3 = LabelView::new(config.stage3_view, fine_vocab).map_err(Error::stage("model3"))?;

    let (m1, m2) = rayon::join(
        || -> Result<Box<dyn Classifier>> {
            let s = view_samples(&fine, &fine_labels, &binary)?;
            l1.fit(&s, &config.stage_params(0))
        },
        || -> Result<Box<dyn Classifier>> {
            let s = view_samples(&fine, &fine_labels, &category)?;
            l2.fit(&s, &config.stage_params(1))
        },
    );
    let m1 = m1.map_err(Error::stage("model1"))?;
    let m2 = m2.map_err(Error::stage("model2"))?;

    let width = fine.width() + 2;
    let rows: Vec<Vec<f64>> = (0..fine.len())
        .into_par_iter()
        .map(|i| {
            let row = fine.row(i);
            let c1 = m1.predict_index(row)?;
            let c2 = m2.predict_index(row)?;
            let mut out = row.to_vec();
            out.push(encode_index(c1, m1.classes().len()));
            out.push(encode_index(c2, m2.classes().len()));
            Ok(out)
        })
        .collect::<Result<_>>()
        .map_err(Error::stage("model3"))?;
    let values: Vec<f64> = rows.into_iter().flatten().collect();
    let labels = fine_labels.iter().map(|&f| view3.map(f)).collect();
    let s3 = Samples::new(width, values, labels, view3.vocabulary.clone()).map_err(Error::stage("model3"))?;
    let m3 = l3.fit(&s3, &config.stage_params(2)).map_err(Error::stage("model3"))?;

    Ok(HierarchicalModel {
        stats,
        fine_labels: fine_vocab.clone(),
        stage3_view: config.stage3_view,
        model1: m1,
        model2: m2,
        model3: m3,
        seed: config.seed,
    })
}

fn section_hash(body: &str) -> String {
    hex::encode(Sha256::digest(body.as_bytes()))
}

impl HierarchicalModel {
    pub fn base_width(&self) -> usize {
        self.stats.width()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.stats.feature_names
    }

    /// Runs a raw (unnormalized) row through all three stages.
    pub fn predict_raw(&self, row: &[f64]) -> Result<StageOutputs> {
        let x = self.stats.normalize_row(row)?;
        let binary = self.model1.predict_index(&x)?;
        let category = self.model2.predict_index(&x)?;
        let mut z = x;
        z.push(encode_index(binary, self.model1.classes().len()));
        z.push(encode_index(category, self.model2.classes().len()));
        let final_label = self.model3.predict_index(&z)?;
        Ok(StageOutputs {
            binary,
            category,
            final_label,
        })
    }

    pub fn predict_batch(&self, rows: &[Vec<f64>]) -> Vec<Result<StageOutputs>> {
        rows.par_iter().map(|r| self.predict_raw(r)).collect()
    }

    /// Predicts every record of `d`, whose features must match the model's
    /// base schema by name and order.
    pub fn predict_dataset(&self, d: &Dataset) -> Result<Vec<StageOutputs>> {
        if d.schema.feature_names != self.stats.feature_names {
            return Err(Error::Schema("dataset features differ from the model's".into()));
        }
        d.records.par_iter().map(|r| self.predict_raw(&r.values)).collect()
    }

    pub fn labels(&self, out: &StageOutputs) -> [&str; 3] {
        [
            &self.model1.classes()[out.binary],
            &self.model2.classes()[out.category],
            &self.model3.classes()[out.final_label],
        ]
    }

    pub fn to_text(&self) -> String {
        let sections = [
            ("stats", "normstats", self.stats.to_text()),
            ("model1", self.model1.kind(), self.model1.to_text()),
            ("model2", self.model2.kind(), self.model2.to_text()),
            ("model3", self.model3.kind(), self.model3.to_text()),
        ];
        let mut out = format!(
            "{MAGIC} v1\nseed {}\nstage3_view {}\nfine_labels {}\n",
            self.seed,
            self.stage3_view,
            self.fine_labels.len()
        );
        for l in &self.fine_labels {
            out.push_str(&format!("label {l}\n"));
        }
        for (name, kind, body) in &sections {
            out.push_str(&format!("section {name} {kind} {}\n", body.lines().count()));
            out.push_str(body);
        }
        out.push_str("manifest\n");
        for (name, _, body) in &sections {
            out.push_str(&format!("sha256 {name} {}\n", section_hash(body)));
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str, registry: &Registry) -> Result<Self> {
        let mut r = LineReader::new(text);
        r.expect_header(MAGIC, 1)?;
        let seed = r.keyed_parse("seed")?;
        let stage3_view: ViewKind = r.keyed_parse("stage3_view")?;
        let n: usize = r.keyed_parse("fine_labels")?;
        let fine_labels = (0..n)
            .map(|_| r.keyed("label").map(str::to_string))
            .collect::<Result<Vec<_>>>()?;

        let mut bodies = Vec::with_capacity(4);
        for name in ["stats", "model1", "model2", "model3"] {
            let head = r.keyed("section")?;
            let parts: Vec<&str> = head.split_whitespace().collect();
            let [sec, kind, count] = parts[..] else {
                return Err(r.err(format!("malformed section header {head:?}")));
            };
            if sec != name {
                return Err(r.err(format!("expected section {name}, found {sec}")));
            }
            let count: usize = count.parse().map_err(|_| r.err("bad section length"))?;
            let start = r.line_no();
            let mut body = r.take(count)?.join("\n");
            body.push('\n');
            bodies.push((name, kind.to_string(), body, start));
        }
        r.keyed("manifest")?;
        for (name, _, body, _) in &bodies {
            let line = r.keyed("sha256")?;
            let expected = format!("{name} {}", section_hash(body));
            if line.trim() != expected {
                return Err(r.err(format!("hash mismatch for section {name}")));
            }
        }
        r.keyed("end")?;

        let located = |start: usize| move |e: Error| match e {
            Error::Format { line, msg } => Error::format(start + line, msg),
            e => e,
        };
        let stats = NormalizationStats::from_text(&bodies[0].2).map_err(located(bodies[0].3))?;
        let mut models = Vec::with_capacity(3);
        for (i, (_, kind, body, start)) in bodies[1..].iter().enumerate() {
            let m = registry
                .get(kind)
                .and_then(|l| l.load(body))
                .map_err(located(*start))
                .map_err(Error::stage(STAGE_NAMES[i]))?;
            models.push(m);
        }
        let [model1, model2, model3]: [Box<dyn Classifier>; 3] =
            models.try_into().map_err(|_| r.err("missing stage model"))?;
        let model = HierarchicalModel {
            stats,
            fine_labels,
            stage3_view,
            model1,
            model2,
            model3,
            seed,
        };
        model.check()?;
        Ok(model)
    }

    fn check(&self) -> Result<()> {
        let w = self.base_width();
        let widths = [self.model1.width(), self.model2.width(), self.model3.width()];
        if widths != [w, w, w + 2] {
            return Err(Error::Schema(format!(
                "stage widths {widths:?} do not fit base width {w}"
            )));
        }
        Ok(())
    }
}
