//! Deterministic CICIDS2017-shaped CSV for tests and demos.
//!
//! Every class gets its own centre per informative feature; noise features
//! are shared. Headers carry the leading spaces and the cp1252 dash of the
//! public files, and a few rows carry Infinity/NaN flow-rate markers.

use rand::Rng;

use crate::flowdata::{CICIDS_LABELS, FLOW_PACKETS_PER_SEC};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    /// Rows per label, in `CICIDS_LABELS` order.
    pub counts: Vec<usize>,
    pub informative: usize,
    pub noise: usize,
    /// Extra rows whose flow rates are Infinity or NaN.
    pub marker_rows: usize,
    /// Relative spread of each class around its centre.
    pub spread: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// Roughly the class mix of the reference split, scaled down.
    pub fn small(seed: u64) -> Self {
        SynthSpec {
            counts: vec![400, 40, 30, 30, 60, 30, 6, 40, 20, 30, 30, 20, 12, 6, 8],
            informative: 6,
            noise: 2,
            marker_rows: 5,
            spread: 0.35,
            seed,
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.marker_rows
    }
}

const CONSTANT: [&str; 2] = ["Bwd PSH Flags", "Fwd URG Flags"];

fn raw_label(label: &str) -> Vec<u8> {
    // the public CSVs spell the web attacks with a cp1252 en dash
    match label.strip_prefix("Web Attack - ") {
        Some(rest) => [b"Web Attack \x96 ".as_slice(), rest.as_bytes()].concat(),
        None => label.as_bytes().to_vec(),
    }
}

fn centre(class: usize, feature: usize) -> f64 {
    // distinct per (class, feature) pair, spread over a few decades
    let k = (class * 7 + feature * 13 + class * feature * 3) % 29;
    (1.0 + k as f64) * 10f64.powi((feature % 3) as i32 + 1)
}

/// CSV bytes: header, one row per requested record in shuffled order, then
/// the marker rows.
pub fn generate(spec: &SynthSpec) -> Vec<u8> {
    let mut rng = rng::seeded(spec.seed);
    let mut header: Vec<String> = vec![format!(" {FLOW_PACKETS_PER_SEC}"), " Flow Bytes/s".into()];
    header.extend((0..spec.informative).map(|f| format!(" Feature {f}")));
    header.extend((0..spec.noise).map(|f| format!(" Noise {f}")));
    header.extend(CONSTANT.iter().map(|c| format!(" {c}")));
    header.push(" Label".into());
    let mut out = header.join(",").into_bytes();
    out.push(b'\n');

    let mut order: Vec<usize> = spec
        .counts
        .iter()
        .enumerate()
        .flat_map(|(c, &n)| std::iter::repeat_n(c, n))
        .collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);

    let row = |class: usize, marker: Option<&str>, rng: &mut rng::SeededRng| {
        let mut fields = Vec::with_capacity(header.len());
        match marker {
            Some(m) => {
                fields.push(m.to_string());
                fields.push(m.to_string());
            }
            None => {
                let rate = centre(class, 99) * (1.0 + spec.spread * (rng.gen::<f64>() - 0.5));
                fields.push(format!("{rate:.3}"));
                fields.push(format!("{:.3}", rate * rng.gen_range(40.0..60.0)));
            }
        }
        for f in 0..spec.informative {
            let c = centre(class, f);
            let v = c * (1.0 + spec.spread * (rng.gen::<f64>() - 0.5));
            fields.push(format!("{:.4}", v.max(0.0)));
        }
        for _ in 0..spec.noise {
            fields.push(rng.gen_range(0..1000).to_string());
        }
        fields.extend(CONSTANT.iter().map(|_| "0".to_string()));
        let mut line = fields.join(",").into_bytes();
        line.push(b',');
        line.extend(raw_label(CICIDS_LABELS[class]));
        line.push(b'\n');
        line
    };

    for class in order {
        out.extend(row(class, None, &mut rng));
    }
    for i in 0..spec.marker_rows {
        let marker = if i % 2 == 0 { "Infinity" } else { "NaN" };
        let class = i % CICIDS_LABELS.len();
        out.extend(row(class, Some(marker), &mut rng));
    }
    out
}
