use std::fmt;

use super::schema::BENIGN;
use crate::error::{Error, Result};

pub const ATTACK: &str = "Attack";

pub const CATEGORY_LABELS: [&str; 7] = [
    "BENIGN",
    "DoS",
    "PortScan",
    "Bot",
    "Brute-Force",
    "Web Attack",
    "Infiltration",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViewKind {
    /// BENIGN vs Attack.
    Binary,
    /// BENIGN plus six attack families.
    Category,
    /// Identity over the fine vocabulary.
    Fine,
}

impl ViewKind {
    pub fn name(self) -> &'static str {
        match self {
            ViewKind::Binary => "binary",
            ViewKind::Category => "category",
            ViewKind::Fine => "fine",
        }
    }
}

impl fmt::Display for ViewKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ViewKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "binary" => Ok(ViewKind::Binary),
            "category" => Ok(ViewKind::Category),
            "fine" => Ok(ViewKind::Fine),
            other => Err(Error::InvalidParam(format!("unknown label view {other:?}"))),
        }
    }
}

fn category_of(fine: &str) -> Option<&'static str> {
    let cat = match super::schema::loose_key(fine).as_str() {
        "benign" => "BENIGN",
        "ddos" | "dosslowloris" | "dosslowhttptest" | "doshulk" | "dosgoldeneye" | "heartbleed" => {
            "DoS"
        }
        "portscan" => "PortScan",
        "bot" => "Bot",
        "ftppatator" | "sshpatator" => "Brute-Force",
        "webattackbruteforce" | "webattackxss" | "webattacksqlinjection" => "Web Attack",
        "infiltration" => "Infiltration",
        _ => return None,
    };
    Some(cat)
}

/// Total mapping from a fine vocabulary onto one of the three label spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelView {
    pub kind: ViewKind,
    pub vocabulary: Vec<String>,
    /// `mapping[fine_index]` is the view index.
    pub mapping: Vec<usize>,
}

impl LabelView {
    pub fn new(kind: ViewKind, fine_labels: &[String]) -> Result<Self> {
        let (vocabulary, mapping) = match kind {
            ViewKind::Fine => (fine_labels.to_vec(), (0..fine_labels.len()).collect()),
            ViewKind::Binary => {
                let mapping = fine_labels
                    .iter()
                    .map(|l| usize::from(l != BENIGN))
                    .collect();
                (vec![BENIGN.to_string(), ATTACK.to_string()], mapping)
            }
            ViewKind::Category => {
                let mapping = fine_labels
                    .iter()
                    .map(|l| {
                        let cat = category_of(l).ok_or_else(|| Error::UnmappedLabel {
                            label: l.clone(),
                            view: kind.to_string(),
                        })?;
                        Ok(CATEGORY_LABELS.iter().position(|c| *c == cat).unwrap())
                    })
                    .collect::<Result<Vec<_>>>()?;
                (CATEGORY_LABELS.iter().map(|s| s.to_string()).collect(), mapping)
            }
        };
        Ok(LabelView {
            kind,
            vocabulary,
            mapping,
        })
    }

    pub fn map(&self, fine: usize) -> usize {
        self.mapping[fine]
    }

    pub fn label(&self, fine: usize) -> &str {
        &self.vocabulary[self.mapping[fine]]
    }
}
