//! Confusion matrices and the detection scores: per-class detection rate,
//! TNR and FAR on BENIGN traffic, overall detection rate and accuracy.
//!
//! Rates are kept as exact integer fractions; percentages are rendered
//! with round-half-up to three decimals.

use std::fmt;

use crate::error::{Error, Result};
use crate::flowdata::BENIGN;
use crate::textfmt::{fmt_f64, parse_num, LineReader};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    /// `counts[actual][predicted]`.
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>) -> Self {
        let k = labels.len();
        ConfusionMatrix {
            labels,
            counts: vec![vec![0; k]; k],
        }
    }

    pub fn from_indices(predicted: &[usize], actual: &[usize], labels: Vec<String>) -> Result<Self> {
        if predicted.len() != actual.len() {
            return Err(Error::LengthMismatch(predicted.len(), actual.len()));
        }
        let mut cm = ConfusionMatrix::new(labels);
        let k = cm.labels.len();
        for (&p, &a) in predicted.iter().zip(actual) {
            if p >= k || a >= k {
                return Err(Error::UnknownClass(format!("class index {}", p.max(a))));
            }
            cm.counts[a][p] += 1;
        }
        Ok(cm)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_total(&self, actual: usize) -> u64 {
        self.counts[actual].iter().sum()
    }

    fn benign(&self) -> Result<usize> {
        self.index_of(BENIGN).ok_or(Error::Undefined("no BENIGN class"))
    }

    /// Indices of every class except BENIGN.
    pub fn attack_classes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] != BENIGN).collect()
    }
}

/// Builds a confusion matrix from label names.
pub fn confusion<S: AsRef<str>>(predicted: &[S], actual: &[S], vocabulary: &[String]) -> Result<ConfusionMatrix> {
    if predicted.len() != actual.len() {
        return Err(Error::LengthMismatch(predicted.len(), actual.len()));
    }
    let find = |l: &S| {
        vocabulary
            .iter()
            .position(|v| v == l.as_ref())
            .ok_or_else(|| Error::UnknownClass(l.as_ref().to_string()))
    };
    let p = predicted.iter().map(find).collect::<Result<Vec<_>>>()?;
    let a = actual.iter().map(find).collect::<Result<Vec<_>>>()?;
    ConfusionMatrix::from_indices(&p, &a, vocabulary.to_vec())
}

/// Exact fraction `num / den`, `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rate {
    pub num: u64,
    pub den: u64,
}

impl Rate {
    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Percentage in thousandths of a percent, rounded half up.
    pub fn milli_percent(self) -> u128 {
        let scaled = self.num as u128 * 100_000;
        let den = self.den as u128;
        (2 * scaled + den) / (2 * den)
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.milli_percent();
        write!(f, "{}.{:03}%", m / 1000, m % 1000)
    }
}

fn rate(num: u64, den: u64, what: &'static str) -> Result<Rate> {
    if den == 0 {
        Err(Error::Undefined(what))
    } else {
        Ok(Rate { num, den })
    }
}

/// Detection rate of one class; `None` when it has no actual records.
pub fn dr_per_class(cm: &ConfusionMatrix, class: usize) -> Option<Rate> {
    rate(cm.counts[class][class], cm.row_total(class), "").ok()
}

pub fn tnr(cm: &ConfusionMatrix) -> Result<Rate> {
    let b = cm.benign()?;
    rate(cm.counts[b][b], cm.row_total(b), "no BENIGN records")
}

pub fn far(cm: &ConfusionMatrix) -> Result<Rate> {
    let b = cm.benign()?;
    let n = cm.row_total(b);
    rate(n - cm.counts[b][b], n, "no BENIGN records")
}

/// Exact-type detections over all attack records.
pub fn dr_overall(cm: &ConfusionMatrix) -> Result<Rate> {
    let attacks = cm.attack_classes();
    let tp = attacks.iter().map(|&c| cm.counts[c][c]).sum();
    let n = attacks.iter().map(|&c| cm.row_total(c)).sum();
    rate(tp, n, "no attack records")
}

pub fn accuracy(cm: &ConfusionMatrix) -> Result<Rate> {
    rate(cm.trace(), cm.total(), "empty confusion matrix")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Kv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "kv" => Ok(ReportFormat::Kv),
            other => Err(Error::InvalidParam(format!("unknown report format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub confusion: ConfusionMatrix,
    /// Attack classes in vocabulary order.
    pub per_class: Vec<(String, Option<Rate>)>,
    pub tnr: Option<Rate>,
    pub far: Option<Rate>,
    pub dr_overall: Option<Rate>,
    pub accuracy: Rate,
    pub train_seconds: Option<f64>,
    pub test_seconds: Option<f64>,
}

impl MetricsReport {
    pub fn from_confusion(cm: ConfusionMatrix) -> Result<Self> {
        let accuracy = accuracy(&cm)?;
        let per_class = cm
            .attack_classes()
            .into_iter()
            .map(|c| (cm.labels[c].clone(), dr_per_class(&cm, c)))
            .collect();
        Ok(MetricsReport {
            tnr: tnr(&cm).ok(),
            far: far(&cm).ok(),
            dr_overall: dr_overall(&cm).ok(),
            accuracy,
            per_class,
            confusion: cm,
            train_seconds: None,
            test_seconds: None,
        })
    }

    pub fn n_benign(&self) -> u64 {
        self.tnr.map_or(0, |r| r.den)
    }

    pub fn n_attack(&self) -> u64 {
        self.dr_overall.map_or(0, |r| r.den)
    }
}

pub const REPORT_MAGIC: &str = "hids-report";

fn opt_rate(r: Option<Rate>) -> String {
    r.map_or_else(|| "none".to_string(), |r| format!("{}/{} {r}", r.num, r.den))
}

fn table_rows(r: &MetricsReport) -> Vec<(String, String)> {
    let pct = |x: Option<Rate>| x.map_or_else(|| "n/a".to_string(), |r| r.to_string());
    let mut rows = Vec::new();
    if r.tnr.is_some() {
        rows.push(("TNR (BENIGN)".to_string(), pct(r.tnr)));
    }
    for (label, dr) in &r.per_class {
        rows.push((format!("DR {label}"), pct(*dr)));
    }
    if r.far.is_some() {
        rows.push(("FAR".into(), pct(r.far)));
    }
    if r.dr_overall.is_some() {
        rows.push(("DR (Overall)".into(), pct(r.dr_overall)));
    }
    rows.push(("Accuracy".into(), r.accuracy.to_string()));
    if let Some(s) = r.train_seconds {
        rows.push(("Training Time".into(), format!("{s:.2} s")));
    }
    if let Some(s) = r.test_seconds {
        rows.push(("Test Time".into(), format!("{s:.2} s")));
    }
    rows
}

pub fn emit_report(r: &MetricsReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Table => {
            let rows = table_rows(r);
            let w = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            let vw = rows.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
            let mut out = String::new();
            for (k, v) in rows {
                out.push_str(&format!("{k:<w$}  {v:>vw$}\n"));
            }
            out
        }
        ReportFormat::Kv => {
            let cm = &r.confusion;
            let mut out = format!("{REPORT_MAGIC} v1\nrecords {}\n", cm.total());
            out.push_str(&format!("tnr {}\n", opt_rate(r.tnr)));
            out.push_str(&format!("far {}\n", opt_rate(r.far)));
            out.push_str(&format!("dr_overall {}\n", opt_rate(r.dr_overall)));
            out.push_str(&format!("accuracy {}\n", opt_rate(Some(r.accuracy))));
            let secs = |s: Option<f64>| s.map_or_else(|| "none".to_string(), fmt_f64);
            out.push_str(&format!("train_seconds {}\n", secs(r.train_seconds)));
            out.push_str(&format!("test_seconds {}\n", secs(r.test_seconds)));
            out.push_str(&format!("classes {}\n", cm.len()));
            for (i, l) in cm.labels.iter().enumerate() {
                let row: Vec<String> = cm.counts[i].iter().map(u64::to_string).collect();
                out.push_str(&format!("class {l}\nrow {}\n", row.join(" ")));
            }
            for (label, dr) in &r.per_class {
                out.push_str(&format!("dr {} :: {label}\n", opt_rate(*dr)));
            }
            out.push_str("end\n");
            out
        }
    }
}

fn parse_rate(raw: &str, line: usize) -> Result<Option<Rate>> {
    let frac = raw.split_whitespace().next().unwrap_or("");
    if frac == "none" {
        return Ok(None);
    }
    let (n, d) = frac
        .split_once('/')
        .ok_or_else(|| Error::format(line, format!("bad rate {raw:?}")))?;
    let r = Rate {
        num: parse_num(Some(n), line, "numerator")?,
        den: parse_num(Some(d), line, "denominator")?,
    };
    if r.den == 0 || r.num > r.den {
        return Err(Error::format(line, format!("bad rate {raw:?}")));
    }
    Ok(Some(r))
}

/// Parses the `kv` rendering back into a report.
pub fn parse_report(text: &str) -> Result<MetricsReport> {
    let mut r = LineReader::new(text);
    r.expect_header(REPORT_MAGIC, 1)?;
    let records: u64 = r.keyed_parse("records")?;
    let mut rates = Vec::with_capacity(4);
    for key in ["tnr", "far", "dr_overall", "accuracy"] {
        let raw = r.keyed(key)?;
        rates.push(parse_rate(raw, r.line_no())?);
    }
    let mut secs = Vec::with_capacity(2);
    for key in ["train_seconds", "test_seconds"] {
        let raw = r.keyed(key)?;
        secs.push(match raw.trim() {
            "none" => None,
            v => Some(parse_num(Some(v), r.line_no(), key)?),
        });
    }
    let n: usize = r.keyed_parse("classes")?;
    let mut cm = ConfusionMatrix::new(Vec::with_capacity(n));
    cm.counts.clear();
    for _ in 0..n {
        cm.labels.push(r.keyed("class")?.to_string());
        let raw = r.keyed("row")?;
        let ln = r.line_no();
        let row = raw
            .split_whitespace()
            .map(|t| parse_num(Some(t), ln, "count"))
            .collect::<Result<Vec<u64>>>()?;
        if row.len() != n {
            return Err(r.err(format!("expected {n} counts, found {}", row.len())));
        }
        cm.counts.push(row);
    }
    if cm.total() != records {
        return Err(r.err("confusion counts do not sum to records"));
    }
    let attacks = cm.attack_classes().len();
    let mut per_class = Vec::with_capacity(attacks);
    for _ in 0..attacks {
        let raw = r.keyed("dr")?;
        let (rate, label) = raw
            .split_once(" :: ")
            .ok_or_else(|| r.err("dr record lacks a label"))?;
        per_class.push((label.to_string(), parse_rate(rate, r.line_no())?));
    }
    r.keyed("end")?;
    let report = MetricsReport {
        confusion: cm,
        per_class,
        tnr: rates[0],
        far: rates[1],
        dr_overall: rates[2],
        accuracy: rates[3].ok_or_else(|| Error::format(0, "accuracy missing"))?,
        train_seconds: secs[0],
        test_seconds: secs[1],
    };
    let mut check = MetricsReport::from_confusion(report.confusion.clone())?;
    check.train_seconds = report.train_seconds;
    check.test_seconds = report.test_seconds;
    if check != report {
        return Err(Error::format(0, "report scores disagree with its confusion matrix"));
    }
    Ok(report)
}
