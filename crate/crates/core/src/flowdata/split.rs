use std::str::FromStr;

use rand::seq::index;

use super::Dataset;
use crate::error::{Error, Result, Shortfall};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionPolicy {
    /// Rows in dataset order.
    FirstRows,
    /// Uniform draw without replacement from the seeded generator.
    RandomWithoutReplacement,
}

impl FromStr for SelectionPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "first" => Ok(SelectionPolicy::FirstRows),
            "random" => Ok(SelectionPolicy::RandomWithoutReplacement),
            other => Err(Error::InvalidParam(format!("unknown selection policy {other:?}"))),
        }
    }
}

impl SelectionPolicy {
    fn name(self) -> &'static str {
        match self {
            SelectionPolicy::FirstRows => "first",
            SelectionPolicy::RandomWithoutReplacement => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitEntry {
    pub label: String,
    pub train: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSpec {
    pub entries: Vec<SplitEntry>,
    pub train_policy: SelectionPolicy,
    pub test_policy: SelectionPolicy,
    pub seed: u64,
}

/// Per-label (train, test) counts of the 40,000 + 40,000 reference split.
const TABLE2: [(&str, usize, usize); 15] = [
    ("BENIGN", 20000, 20000),
    ("DDoS", 2700, 3300),
    ("DoS slowloris", 1350, 1650),
    ("DoS Slowhttptest", 2171, 1169),
    ("DoS Hulk", 4500, 5500),
    ("DoS GoldenEye", 1300, 700),
    ("Heartbleed", 5, 5),
    ("PortScan", 3808, 4192),
    ("Bot", 936, 624),
    ("FTP-Patator", 900, 1100),
    ("SSH-Patator", 900, 1100),
    ("Web Attack - Brute Force", 910, 490),
    ("Web Attack - XSS", 480, 160),
    ("Web Attack - Sql Injection", 16, 4),
    ("Infiltration", 24, 6),
];

impl SplitSpec {
    /// First rows for training, random rows for testing, CICIDS2017 counts.
    pub fn table2(seed: u64) -> Self {
        SplitSpec {
            entries: TABLE2
                .iter()
                .map(|&(label, train, test)| SplitEntry {
                    label: label.into(),
                    train,
                    test,
                })
                .collect(),
            train_policy: SelectionPolicy::FirstRows,
            test_policy: SelectionPolicy::RandomWithoutReplacement,
            seed,
        }
    }

    pub fn train_total(&self) -> usize {
        self.entries.iter().map(|e| e.train).sum()
    }

    pub fn test_total(&self) -> usize {
        self.entries.iter().map(|e| e.test).sum()
    }

    /// Parses the split-spec text format:
    ///
    /// ```text
    /// # comment
    /// train_policy = first
    /// test_policy = random
    /// seed = 7
    /// DDoS = 2700 3300
    /// ```
    ///
    /// `seed` in the file is optional; `default_seed` applies otherwise.
    pub fn parse(text: &str, default_seed: u64) -> Result<Self> {
        let mut spec = SplitSpec {
            entries: Vec::new(),
            train_policy: SelectionPolicy::FirstRows,
            test_policy: SelectionPolicy::RandomWithoutReplacement,
            seed: default_seed,
        };
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .rsplit_once('=')
                .ok_or_else(|| Error::format(n + 1, format!("expected `key = value`, found {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "train_policy" => spec.train_policy = value.parse()?,
                "test_policy" => spec.test_policy = value.parse()?,
                "seed" => {
                    spec.seed = value
                        .parse()
                        .map_err(|_| Error::format(n + 1, format!("bad seed {value:?}")))?
                }
                label => {
                    let mut it = value.split_whitespace();
                    let train = crate::textfmt::parse_num(it.next(), n + 1, "train count")?;
                    let test = crate::textfmt::parse_num(it.next(), n + 1, "test count")?;
                    spec.entries.push(SplitEntry {
                        label: label.to_string(),
                        train,
                        test,
                    });
                }
            }
        }
        Ok(spec)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "train_policy = {}\ntest_policy = {}\nseed = {}\n",
            self.train_policy.name(),
            self.test_policy.name(),
            self.seed
        );
        for e in &self.entries {
            out.push_str(&format!("{} = {} {}\n", e.label, e.train, e.test));
        }
        out
    }
}

fn pick(
    pool: &[usize],
    count: usize,
    policy: SelectionPolicy,
    rng: &mut rng::SeededRng,
) -> Vec<usize> {
    match policy {
        SelectionPolicy::FirstRows => pool[..count].to_vec(),
        SelectionPolicy::RandomWithoutReplacement => {
            let mut picked: Vec<usize> = index::sample(rng, pool.len(), count)
                .into_iter()
                .map(|i| pool[i])
                .collect();
            picked.sort_unstable();
            picked
        }
    }
}

/// Splits per fine label; both outputs keep dataset order.
pub fn split(d: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let n_labels = d.schema.fine_labels.len();
    let mut want = vec![(0usize, 0usize); n_labels];
    for e in &spec.entries {
        let idx = d
            .schema
            .label_index(&e.label)
            .ok_or_else(|| Error::UnknownClass(e.label.clone()))?;
        want[idx] = (e.train, e.test);
    }

    let mut by_label: Vec<Vec<usize>> = vec![Vec::new(); n_labels];
    for (i, r) in d.records.iter().enumerate() {
        by_label[r.fine_label].push(i);
    }
    let shortfalls: Vec<Shortfall> = (0..n_labels)
        .filter(|&l| want[l].0 + want[l].1 > by_label[l].len())
        .map(|l| Shortfall {
            label: d.schema.fine_labels[l].clone(),
            requested: want[l].0 + want[l].1,
            available: by_label[l].len(),
        })
        .collect();
    if !shortfalls.is_empty() {
        return Err(Error::Shortfall(shortfalls));
    }

    let mut rng = rng::seeded(spec.seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for (l, rows) in by_label.iter().enumerate() {
        let (n_train, n_test) = want[l];
        let train = pick(rows, n_train, spec.train_policy, &mut rng);
        let taken: std::collections::HashSet<usize> = train.iter().copied().collect();
        let rest: Vec<usize> = rows.iter().copied().filter(|i| !taken.contains(i)).collect();
        let test = pick(&rest, n_test, spec.test_policy, &mut rng);
        train_idx.extend(train);
        test_idx.extend(test);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();

    let subset = |idx: &[usize], name: &str| {
        let mut out = Dataset {
            schema: d.schema.clone(),
            records: idx.iter().map(|&i| d.records[i].clone()).collect(),
            provenance: d.provenance.clone(),
            view: d.view.clone(),
        };
        out.note(format!(
            "split: {name} subset, {} rows, train_policy={} test_policy={} seed={}",
            idx.len(),
            spec.train_policy.name(),
            spec.test_policy.name(),
            spec.seed
        ));
        out
    };
    Ok((subset(&train_idx, "train"), subset(&test_idx, "test")))
}
