use std::path::{Path, PathBuf};
use std::time::Instant;

use hids_core::flowdata::{
    self, clean as clean_rows, drop_constant_features, load_csv, read_feature_table, select_features, write_csv,
    write_provenance, Dataset, LabelView, SplitSpec,
};
use hids_core::metrics::{emit_report, ConfusionMatrix, MetricsReport, ReportFormat};
use hids_core::registry::Registry;
use hids_core::stack::{train_hierarchy, HierarchicalModel};

use crate::config::{RunConfig, SplitSource};
use crate::output::write_atomic;
use crate::CliError;

pub const CLEANED: &str = "cleaned.csv";
pub const TRAIN: &str = "train.csv";
pub const TEST: &str = "test.csv";
pub const MODEL: &str = "hierarchy.model";
pub const REPORT_KV: &str = "report.kv";
pub const REPORT_TABLE: &str = "report.txt";
pub const PREDICTIONS: &str = "predictions.csv";

fn csv_bytes(d: &Dataset) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_csv(d, &mut buf)?;
    Ok(buf)
}

fn provenance_bytes(d: &Dataset) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_provenance(d, &mut buf)?;
    Ok(buf)
}

fn timing_path(model: &Path) -> PathBuf {
    let mut p = model.as_os_str().to_owned();
    p.push(".timing");
    PathBuf::from(p)
}

pub fn clean(cfg: &RunConfig, inputs: &[PathBuf]) -> Result<(), CliError> {
    let mut merged: Option<Dataset> = None;
    for path in inputs {
        let d = load_csv(path, None)?;
        merged = Some(match merged {
            None => d,
            Some(m) => m.concat(d)?,
        });
    }
    let loaded = merged.expect("clap requires at least one input");
    let cleaned = clean_rows(&loaded)?;
    let names = cfg.constant_features.names();
    let refs: Option<Vec<&str>> = names.as_ref().map(|v| v.iter().map(String::as_str).collect());
    let pruned = drop_constant_features(&cleaned, refs.as_deref())?;

    write_atomic(&cfg.out_dir, CLEANED, &csv_bytes(&pruned)?)?;
    write_atomic(&cfg.out_dir, "cleaned.provenance.txt", &provenance_bytes(&pruned)?)?;
    println!(
        "rows: {} -> {} (-{})",
        loaded.len(),
        pruned.len(),
        loaded.len() - pruned.len()
    );
    println!(
        "features: {} -> {} (-{})",
        loaded.width(),
        pruned.width(),
        loaded.width() - pruned.width()
    );
    Ok(())
}

pub fn split(cfg: &RunConfig, input: &Path) -> Result<(), CliError> {
    let seed = cfg.require_seed("split")?;
    let mut spec = match &cfg.split {
        SplitSource::Table2 => SplitSpec::table2(seed),
        SplitSource::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            SplitSpec::parse(&text, seed).map_err(|e| CliError::Config(e.to_string()))?
        }
    };
    spec.seed = seed;
    if let Some(p) = cfg.train_policy {
        spec.train_policy = p;
    }
    if let Some(p) = cfg.test_policy {
        spec.test_policy = p;
    }
    let d = load_csv(input, None)?;
    let (train, test) = flowdata::split(&d, &spec)?;
    write_atomic(&cfg.out_dir, TRAIN, &csv_bytes(&train)?)?;
    write_atomic(&cfg.out_dir, TEST, &csv_bytes(&test)?)?;
    write_atomic(&cfg.out_dir, "split.provenance.txt", &provenance_bytes(&test)?)?;

    let (tr, te) = (train.fine_counts(), test.fine_counts());
    let w = d.schema.fine_labels.iter().map(String::len).max().unwrap_or(5).max(5);
    println!("{:<w$}  {:>8}  {:>8}", "Label", "Training", "Test");
    for (i, label) in d.schema.fine_labels.iter().enumerate() {
        if tr[i] + te[i] > 0 {
            println!("{label:<w$}  {:>8}  {:>8}", tr[i], te[i]);
        }
    }
    println!("{:<w$}  {:>8}  {:>8}", "Total", train.len(), test.len());
    Ok(())
}

pub fn train(cfg: &RunConfig, input: &Path) -> Result<(), CliError> {
    let seed = cfg.require_seed("train")?;
    let d = load_csv(input, None)?;
    let start = Instant::now();
    let model = train_hierarchy(&d, &cfg.hierarchy(seed), &Registry::default())?;
    let secs = start.elapsed().as_secs_f64();
    let path = write_atomic(&cfg.out_dir, MODEL, model.to_text().as_bytes())?;
    let timing = timing_path(&path);
    let name = timing.file_name().and_then(|n| n.to_str()).unwrap_or("hierarchy.model.timing");
    write_atomic(&cfg.out_dir, name, format!("train_seconds {secs}\n").as_bytes())?;
    println!(
        "trained {} + {} + {} on {} rows, {} features",
        model.model1.kind(),
        model.model2.kind(),
        model.model3.kind(),
        d.len(),
        model.base_width()
    );
    eprintln!("training time: {secs:.2} s");
    Ok(())
}

fn load_model(path: &Path) -> Result<HierarchicalModel, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(HierarchicalModel::from_text(&text, &Registry::default())?)
}

fn read_train_seconds(model: &Path) -> Option<f64> {
    let text = std::fs::read_to_string(timing_path(model)).ok()?;
    text.trim().strip_prefix("train_seconds ")?.parse().ok()
}

pub fn evaluate(cfg: &RunConfig, model_path: &Path, input: &Path) -> Result<(), CliError> {
    let model = load_model(model_path)?;
    let d = load_csv(input, None)?;
    if d.is_empty() {
        return Err(CliError::Input(format!("{}: no records", input.display())));
    }
    let d = select_features(&d, model.feature_names())?;
    let start = Instant::now();
    let outs = model.predict_dataset(&d)?;
    let test_secs = start.elapsed().as_secs_f64();

    let view = LabelView::new(model.stage3_view, &model.fine_labels)?;
    let truth: Vec<usize> = d.records.iter().map(|r| view.map(r.fine_label)).collect();
    let pred: Vec<usize> = outs.iter().map(|o| o.final_label).collect();
    let cm = ConfusionMatrix::from_indices(&pred, &truth, model.model3.classes().to_vec())?;
    let mut report = MetricsReport::from_confusion(cm)?;
    if cfg.timing {
        report.train_seconds = read_train_seconds(model_path);
        report.test_seconds = Some(test_secs);
    }
    let kv = emit_report(&report, ReportFormat::Kv);
    let table = emit_report(&report, ReportFormat::Table);
    write_atomic(&cfg.out_dir, REPORT_KV, kv.as_bytes())?;
    write_atomic(&cfg.out_dir, REPORT_TABLE, table.as_bytes())?;
    write_atomic(&cfg.out_dir, "timing.kv", format!("test_seconds {test_secs}\n").as_bytes())?;
    match cfg.format {
        ReportFormat::Kv => print!("{kv}"),
        ReportFormat::Table => print!("{table}"),
    }
    eprintln!("test time: {test_secs:.2} s");
    Ok(())
}

pub fn predict(cfg: &RunConfig, model_path: &Path, input: &Path) -> Result<(), CliError> {
    let model = load_model(model_path)?;
    let table = read_feature_table(input, model.feature_names())?;
    let mut errors = Vec::new();
    let mut out = csv::Writer::from_writer(Vec::new());
    let mut header = table.header.clone();
    header.extend(["Stage1", "Stage2", "Prediction"].map(String::from));
    let csv_err = |e: csv::Error| CliError::Internal(e.to_string());
    out.write_record(&header).map_err(csv_err)?;
    let rows: Vec<Vec<f64>> = table.values.iter().map(|v| v.clone().unwrap_or_default()).collect();
    let preds = model.predict_batch(&rows);
    for (i, (raw, parsed)) in table.raw.iter().zip(&table.values).enumerate() {
        let result = match parsed {
            Err(msg) => Err(msg.clone()),
            Ok(_) => preds[i].as_ref().map_err(|e| e.to_string()),
        };
        match result {
            Ok(o) => {
                let mut rec = raw.clone();
                rec.extend(model.labels(o).map(String::from));
                out.write_record(&rec).map_err(csv_err)?;
            }
            Err(msg) => errors.push(format!("row {}: {msg}", i + 1)),
        }
    }
    if !errors.is_empty() {
        for e in &errors {
            eprintln!("{e}");
        }
        return Err(CliError::Input(format!("{} of {} rows could not be scored", errors.len(), table.raw.len())));
    }
    let bytes = out.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    write_atomic(&cfg.out_dir, PREDICTIONS, &bytes)?;
    println!("{} rows scored", table.raw.len());
    Ok(())
}
