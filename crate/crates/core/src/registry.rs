//! Learners behind a common interface, looked up by name.
//!
//! Each hierarchy stage names a learner (`reptree`, `ripper`, `forestpa`)
//! and passes it a flat string parameter map; the learner turns that into
//! its typed parameters and rejects keys it does not know.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::forestpa::{train_forest, ForestPaModel, PaTreeParams};
use crate::reptree::{train_rep_tree, RepTreeModel, RepTreeParams};
use crate::ripper::{train_ripper, RipperParams, RuleSet};
use crate::samples::Samples;

/// A trained model that maps a feature row to a class index.
pub trait Classifier: Send + Sync + fmt::Debug {
    /// Registry name of the learner that produced this model.
    fn kind(&self) -> &'static str;
    fn width(&self) -> usize;
    fn classes(&self) -> &[String];
    fn predict_index(&self, row: &[f64]) -> Result<usize>;
    fn to_text(&self) -> String;
}

pub trait Learner: Send + Sync {
    fn name(&self) -> &'static str;
    /// Parameter keys accepted by `fit`.
    fn keys(&self) -> &'static [&'static str];
    fn fit(&self, samples: &Samples, params: &Params) -> Result<Box<dyn Classifier>>;
    fn load(&self, text: &str) -> Result<Box<dyn Classifier>>;
}

/// Untyped learner parameters, keyed by name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Params(BTreeMap<String, String>);

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.0.insert(key.into(), value.into());
        self
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.set(key, value.to_string());
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parsed value of `key`, or `default` when absent.
    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParam(format!("bad value {raw:?} for {key}"))),
        }
    }

    /// Like `parse_or`, with `none` meaning unlimited.
    pub fn parse_opt_or(&self, key: &str, default: Option<usize>) -> Result<Option<usize>> {
        match self.get(key).map(str::trim) {
            None => Ok(default),
            Some("none") => Ok(None),
            Some(_) => self.parse_or(key, 0).map(Some),
        }
    }

    pub fn reject_unknown(&self, learner: &str, known: &[&str]) -> Result<()> {
        match self.0.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(Error::InvalidParam(format!("{learner} has no parameter {k:?}"))),
            None => Ok(()),
        }
    }
}

impl Classifier for RepTreeModel {
    fn kind(&self) -> &'static str {
        "reptree"
    }
    fn width(&self) -> usize {
        self.width
    }
    fn classes(&self) -> &[String] {
        &self.classes
    }
    fn predict_index(&self, row: &[f64]) -> Result<usize> {
        self.predict(row).map(|(c, _)| c)
    }
    fn to_text(&self) -> String {
        RepTreeModel::to_text(self)
    }
}

impl Classifier for RuleSet {
    fn kind(&self) -> &'static str {
        "ripper"
    }
    fn width(&self) -> usize {
        self.width
    }
    fn classes(&self) -> &[String] {
        &self.classes
    }
    fn predict_index(&self, row: &[f64]) -> Result<usize> {
        self.predict(row)
    }
    fn to_text(&self) -> String {
        RuleSet::to_text(self)
    }
}

impl Classifier for ForestPaModel {
    fn kind(&self) -> &'static str {
        "forestpa"
    }
    fn width(&self) -> usize {
        self.width
    }
    fn classes(&self) -> &[String] {
        &self.classes
    }
    fn predict_index(&self, row: &[f64]) -> Result<usize> {
        self.predict(row).map(|(c, _)| c)
    }
    fn to_text(&self) -> String {
        ForestPaModel::to_text(self)
    }
}

pub struct RepTreeLearner;

impl RepTreeLearner {
    pub fn params(p: &Params) -> Result<RepTreeParams> {
        p.reject_unknown("reptree", Self.keys())?;
        let d = RepTreeParams::default();
        let out = RepTreeParams {
            min_leaf: p.parse_or("min_leaf", d.min_leaf)?,
            max_depth: p.parse_opt_or("max_depth", d.max_depth)?,
            prune_fraction: p.parse_or("prune_fraction", d.prune_fraction)?,
            pruning: p.parse_or("pruning", d.pruning)?,
            seed: p.parse_or("seed", d.seed)?,
        };
        out.validate()?;
        Ok(out)
    }
}

impl Learner for RepTreeLearner {
    fn name(&self) -> &'static str {
        "reptree"
    }
    fn keys(&self) -> &'static [&'static str] {
        &["min_leaf", "max_depth", "prune_fraction", "pruning", "seed"]
    }
    fn fit(&self, samples: &Samples, params: &Params) -> Result<Box<dyn Classifier>> {
        Ok(Box::new(train_rep_tree(samples, &Self::params(params)?)?))
    }
    fn load(&self, text: &str) -> Result<Box<dyn Classifier>> {
        Ok(Box::new(RepTreeModel::from_text(text)?))
    }
}

pub struct RipperLearner;

impl RipperLearner {
    pub fn params(p: &Params) -> Result<RipperParams> {
        p.reject_unknown("ripper", Self.keys())?;
        let d = RipperParams::default();
        let out = RipperParams {
            prune_fraction: p.parse_or("prune_fraction", d.prune_fraction)?,
            optimization_passes: p.parse_or("optimization_passes", d.optimization_passes)?,
            dl_slack_bits: p.parse_or("dl_slack_bits", d.dl_slack_bits)?,
            min_rule_coverage: p.parse_or("min_rule_coverage", d.min_rule_coverage)?,
            seed: p.parse_or("seed", d.seed)?,
        };
        out.validate()?;
        Ok(out)
    }
}

impl Learner for RipperLearner {
    fn name(&self) -> &'static str {
        "ripper"
    }
    fn keys(&self) -> &'static [&'static str] {
        &["prune_fraction", "optimization_passes", "dl_slack_bits", "min_rule_coverage", "seed"]
    }
    fn fit(&self, samples: &Samples, params: &Params) -> Result<Box<dyn Classifier>> {
        Ok(Box::new(train_ripper(samples, &Self::params(params)?)?))
    }
    fn load(&self, text: &str) -> Result<Box<dyn Classifier>> {
        Ok(Box::new(RuleSet::from_text(text)?))
    }
}

pub struct ForestPaLearner;

impl ForestPaLearner {
    pub fn params(p: &Params) -> Result<PaTreeParams> {
        p.reject_unknown("forestpa", Self.keys())?;
        let d = PaTreeParams::default();
        let out = PaTreeParams {
            tree_count: p.parse_or("tree_count", d.tree_count)?,
            min_leaf: p.parse_or("min_leaf", d.min_leaf)?,
            max_depth: p.parse_opt_or("max_depth", d.max_depth)?,
            eta: p.parse_or("eta", d.eta)?,
            min_weight: p.parse_or("min_weight", d.min_weight)?,
            seed: p.parse_or("seed", d.seed)?,
        };
        out.validate()?;
        Ok(out)
    }
}

impl Learner for ForestPaLearner {
    fn name(&self) -> &'static str {
        "forestpa"
    }
    fn keys(&self) -> &'static [&'static str] {
        &["tree_count", "min_leaf", "max_depth", "eta", "min_weight", "seed"]
    }
    fn fit(&self, samples: &Samples, params: &Params) -> Result<Box<dyn Classifier>> {
        Ok(Box::new(train_forest(samples, &Self::params(params)?)?))
    }
    fn load(&self, text: &str) -> Result<Box<dyn Classifier>> {
        Ok(Box::new(ForestPaModel::from_text(text)?))
    }
}

pub struct Registry {
    learners: Vec<Box<dyn Learner>>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry { learners: Vec::new() }
    }

    /// Registers `learner`, replacing any learner with the same name.
    pub fn register(&mut self, learner: Box<dyn Learner>) {
        self.learners.retain(|l| l.name() != learner.name());
        self.learners.push(learner);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Learner> {
        self.learners
            .iter()
            .find(|l| l.name() == name)
            .map(|l| l.as_ref())
            .ok_or_else(|| Error::UnknownLearner(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.learners.iter().map(|l| l.name()).collect()
    }
}

impl Default for Registry {
    fn default() -> Self {
        let mut r = Registry::empty();
        r.register(Box::new(RepTreeLearner));
        r.register(Box::new(RipperLearner));
        r.register(Box::new(ForestPaLearner));
        r
    }
}
