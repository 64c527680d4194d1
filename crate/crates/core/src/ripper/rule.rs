use std::fmt;

use crate::error::{Error, Result};
use crate::textfmt::{fmt_f64, parse_num};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cmp {
    Le,
    Gt,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    pub feature: usize,
    pub cmp: Cmp,
    pub threshold: f64,
}

impl Condition {
    #[inline]
    pub fn matches(&self, row: &[f64]) -> bool {
        let v = row[self.feature];
        match self.cmp {
            Cmp::Le => v <= self.threshold,
            Cmp::Gt => v > self.threshold,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.cmp {
            Cmp::Le => "<=",
            Cmp::Gt => ">",
        };
        write!(f, "f{} {op} {}", self.feature, fmt_f64(self.threshold))
    }
}

/// Conjunction of conditions predicting one class. No conditions matches
/// every record.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub conditions: Vec<Condition>,
    pub class: usize,
}

impl Rule {
    pub fn empty(class: usize) -> Rule {
        Rule {
            conditions: Vec::new(),
            class,
        }
    }

    #[inline]
    pub fn matches(&self, row: &[f64]) -> bool {
        self.conditions.iter().all(|c| c.matches(row))
    }

    pub fn len(&self) -> usize {
        self.conditions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conditions.is_empty()
    }

    /// `rule <class> :: f0 <= 0.5 && f2 > 0.25`, or `:: true` when empty.
    pub fn to_line(&self) -> String {
        let body = if self.conditions.is_empty() {
            "true".to_string()
        } else {
            self.conditions
                .iter()
                .map(Condition::to_string)
                .collect::<Vec<_>>()
                .join(" && ")
        };
        format!("rule {} :: {body}", self.class)
    }

    pub fn parse_line(line: &str, line_no: usize, width: usize, n_classes: usize) -> Result<Rule> {
        let rest = line
            .strip_prefix("rule ")
            .ok_or_else(|| Error::format(line_no, "expected rule record"))?;
        let (class, body) = rest
            .split_once(" :: ")
            .ok_or_else(|| Error::format(line_no, "rule lacks ' :: '"))?;
        let class: usize = parse_num(Some(class.trim()), line_no, "rule class")?;
        if class >= n_classes {
            return Err(Error::format(line_no, "rule class out of range"));
        }
        let mut rule = Rule::empty(class);
        if body.trim() == "true" {
            return Ok(rule);
        }
        for cond in body.split(" && ") {
            let mut it = cond.split_whitespace();
            let feature = it
                .next()
                .and_then(|f| f.strip_prefix('f'))
                .ok_or_else(|| Error::format(line_no, format!("bad condition {cond:?}")))?;
            let feature: usize = parse_num(Some(feature), line_no, "feature")?;
            if feature >= width {
                return Err(Error::format(line_no, "condition feature out of range"));
            }
            let cmp = match it.next() {
                Some("<=") => Cmp::Le,
                Some(">") => Cmp::Gt,
                other => return Err(Error::format(line_no, format!("bad comparator {other:?}"))),
            };
            let threshold: f64 = parse_num(it.next(), line_no, "threshold")?;
            if !threshold.is_finite() {
                return Err(Error::format(line_no, "threshold must be finite"));
            }
            rule.conditions.push(Condition {
                feature,
                cmp,
                threshold,
            });
        }
        Ok(rule)
    }
}
