//! Forest by penalizing attributes: a bagged ensemble of unpruned
//! information-gain trees where features used by the previous tree are
//! down-weighted when the next tree picks its splits.
//!
//! A feature tested at minimum depth `d` (root = 1) gets a fresh weight
//! drawn from `[(d-1)/(d+1), d/(d+1))`, clamped below at `min_weight`.
//! Features the latest tree left alone recover: `w <- w + eta * (1 - w)`.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flowdata::Dataset;
use crate::rng;
use crate::samples::{argmax, check_width, Samples};
use crate::textfmt::{fmt_f64, fmt_opt_usize, parse_num, parse_opt_usize, LineReader};
use crate::tree::{grow_weighted_tree, GrowParams, Tree};

pub const MAGIC: &str = "hids-forestpa";

/// Per-feature split weights in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeWeights {
    weights: Vec<f64>,
    last_tested_depth: Vec<Option<usize>>,
    /// Weight at the start of the current untested streak.
    base: Vec<f64>,
    streak: Vec<u32>,
}

impl AttributeWeights {
    pub fn uniform(width: usize) -> Self {
        AttributeWeights {
            weights: vec![1.0; width],
            last_tested_depth: vec![None; width],
            base: vec![1.0; width],
            streak: vec![0; width],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Minimum depth at which each feature was tested in the latest tree.
    pub fn last_tested_depth(&self) -> &[Option<usize>] {
        &self.last_tested_depth
    }

    pub fn width(&self) -> usize {
        self.weights.len()
    }

    /// Number of consecutive trees that have not tested `feature`.
    pub fn untested_streak(&self, feature: usize) -> u32 {
        self.streak[feature]
    }
}

/// Split merit under a feature weight.
pub fn weighted_split_merit(gain: f64, weight: f64) -> f64 {
    gain * weight
}

/// Half-open interval a feature's weight is drawn from after being tested
/// at depth `d` (root = 1).
pub fn depth_weight_range(d: usize) -> (f64, f64) {
    let d = d as f64;
    ((d - 1.0) / (d + 1.0), d / (d + 1.0))
}

/// Closed form of `k` rehabilitation steps starting from `w0`.
pub fn rehabilitated(w0: f64, eta: f64, k: u32) -> f64 {
    let k = i32::try_from(k).unwrap_or(i32::MAX);
    1.0 - (1.0 - w0) * (1.0 - eta).powi(k)
}

/// Updates `weights` after `tree` was grown.
pub fn penalize_and_refresh<R: Rng + ?Sized>(
    weights: &mut AttributeWeights,
    tree: &Tree,
    eta: f64,
    min_weight: f64,
    rng: &mut R,
) {
    let depths = tree.feature_min_depths(weights.width());
    for (f, depth) in depths.iter().enumerate() {
        match *depth {
            Some(d) => {
                let (lo, hi) = depth_weight_range(d);
                let w = rng.gen_range(lo..hi).clamp(min_weight, 1.0);
                weights.weights[f] = w;
                weights.base[f] = w;
                weights.streak[f] = 0;
            }
            None => {
                weights.streak[f] = weights.streak[f].saturating_add(1);
                let w = rehabilitated(weights.base[f], eta, weights.streak[f]);
                weights.weights[f] = w.clamp(min_weight, 1.0);
            }
        }
    }
    weights.last_tested_depth = depths;
}

/// `n` row indices drawn with replacement.
pub fn bootstrap_indices(n: usize, seed: u64) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let mut rng = rng::seeded_stream(seed, 0);
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}

pub fn bootstrap_sample(d: &Dataset, seed: u64) -> Result<Dataset> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let records = bootstrap_indices(d.len(), seed)
        .into_iter()
        .map(|i| d.records[i].clone())
        .collect();
    let mut out = Dataset {
        schema: d.schema.clone(),
        records,
        provenance: d.provenance.clone(),
        view: d.view.clone(),
    };
    out.note(format!("bootstrap: {} draws with replacement, seed {seed}", d.len()));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PaTreeParams {
    pub tree_count: usize,
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    /// Weight increment rate for features a tree did not test.
    pub eta: f64,
    pub min_weight: f64,
    pub seed: u64,
}

impl Default for PaTreeParams {
    fn default() -> Self {
        PaTreeParams {
            tree_count: 30,
            min_leaf: 2,
            max_depth: None,
            eta: 0.2,
            min_weight: 0.01,
            seed: 1,
        }
    }
}

impl PaTreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.tree_count == 0 {
            return Err(Error::InvalidParam("tree_count must be at least 1".into()));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidParam(format!("eta must be in (0, 1), got {}", self.eta)));
        }
        if !(self.min_weight > 0.0 && self.min_weight <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "min_weight must be in (0, 1], got {}",
                self.min_weight
            )));
        }
        if self.min_leaf == 0 {
            return Err(Error::InvalidParam("min_leaf must be at least 1".into()));
        }
        Ok(())
    }

    /// Seed of tree `i` (1-based).
    pub fn tree_seed(&self, i: usize) -> u64 {
        self.seed.wrapping_add(i as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestPaModel {
    pub trees: Vec<Tree>,
    pub seeds: Vec<u64>,
    pub classes: Vec<String>,
    pub width: usize,
    pub params: PaTreeParams,
    /// Weight vector each tree was grown with.
    pub weight_trace: Vec<Vec<f64>>,
    pub final_weights: AttributeWeights,
}

pub fn train_forest(samples: &Samples, params: &PaTreeParams) -> Result<ForestPaModel> {
    params.validate()?;
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let grow = GrowParams {
        min_leaf: params.min_leaf,
        max_depth: params.max_depth,
    };
    let seeds: Vec<u64> = (1..=params.tree_count).map(|i| params.tree_seed(i)).collect();
    let bags: Vec<Vec<usize>> = seeds
        .par_iter()
        .map(|&s| bootstrap_indices(samples.len(), s))
        .collect();

    let mut weights = AttributeWeights::uniform(samples.width());
    let mut trees = Vec::with_capacity(params.tree_count);
    let mut weight_trace = Vec::with_capacity(params.tree_count);
    for (bag, &seed) in bags.iter().zip(&seeds) {
        let tree = grow_weighted_tree(samples, bag, &grow, weights.weights())?;
        weight_trace.push(weights.weights().to_vec());
        let mut rng = rng::seeded_stream(seed, 1);
        penalize_and_refresh(&mut weights, &tree, params.eta, params.min_weight, &mut rng);
        trees.push(tree);
    }
    Ok(ForestPaModel {
        trees,
        seeds,
        classes: samples.classes().to_vec(),
        width: samples.width(),
        params: params.clone(),
        weight_trace,
        final_weights: weights,
    })
}

impl ForestPaModel {
    /// Winning class and per-class vote counts.
    pub fn predict(&self, row: &[f64]) -> Result<(usize, Vec<usize>)> {
        check_width(self.width, row)?;
        Ok(self.predict_unchecked(row))
    }

    pub(crate) fn predict_unchecked(&self, row: &[f64]) -> (usize, Vec<usize>) {
        let mut votes = vec![0; self.classes.len()];
        for t in &self.trees {
            votes[t.predict(row)] += 1;
        }
        (argmax(&votes), votes)
    }

    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = format!("{MAGIC} v1\nwidth {}\nclasses {}\n", self.width, self.classes.len());
        for c in &self.classes {
            out.push_str(&format!("class {c}\n"));
        }
        out.push_str(&format!(
            "tree_count {}\nmin_leaf {}\nmax_depth {}\neta {}\nmin_weight {}\nseed {}\n",
            p.tree_count,
            p.min_leaf,
            fmt_opt_usize(p.max_depth),
            fmt_f64(p.eta),
            fmt_f64(p.min_weight),
            p.seed
        ));
        for (i, tree) in self.trees.iter().enumerate() {
            let w: Vec<String> = self.weight_trace[i].iter().map(|&w| fmt_f64(w)).collect();
            out.push_str(&format!("tree {} {}\nweights {}\n", i + 1, self.seeds[i], w.join(" ")));
            tree.write_text(&mut out);
        }
        let fw = &self.final_weights;
        out.push_str("final_weights\n");
        for f in 0..fw.width() {
            out.push_str(&format!(
                "{f} {} {} {} {}\n",
                fmt_f64(fw.weights[f]),
                fmt_f64(fw.base[f]),
                fw.streak[f],
                fmt_opt_usize(fw.last_tested_depth[f])
            ));
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = LineReader::new(text);
        r.expect_header(MAGIC, 1)?;
        let width: usize = r.keyed_parse("width")?;
        let n_classes: usize = r.keyed_parse("classes")?;
        let classes = (0..n_classes)
            .map(|_| r.keyed("class").map(str::to_string))
            .collect::<Result<Vec<_>>>()?;
        let tree_count = r.keyed_parse("tree_count")?;
        let min_leaf = r.keyed_parse("min_leaf")?;
        let raw = r.keyed("max_depth")?;
        let max_depth = parse_opt_usize(raw, r.line_no())?;
        let params = PaTreeParams {
            tree_count,
            min_leaf,
            max_depth,
            eta: r.keyed_parse("eta")?,
            min_weight: r.keyed_parse("min_weight")?,
            seed: r.keyed_parse("seed")?,
        };
        let mut trees = Vec::with_capacity(tree_count);
        let mut seeds = Vec::with_capacity(tree_count);
        let mut weight_trace = Vec::with_capacity(tree_count);
        for i in 1..=tree_count {
            let head = r.keyed("tree")?;
            let ln = r.line_no();
            let mut it = head.split_whitespace();
            let idx: usize = parse_num(it.next(), ln, "tree number")?;
            if idx != i {
                return Err(r.err(format!("expected tree {i}, found {idx}")));
            }
            seeds.push(parse_num(it.next(), ln, "tree seed")?);
            let raw = r.keyed("weights")?;
            let ln = r.line_no();
            let w = raw
                .split_whitespace()
                .map(|t| parse_num(Some(t), ln, "weight"))
                .collect::<Result<Vec<f64>>>()?;
            if w.len() != width {
                return Err(r.err(format!("expected {width} weights, found {}", w.len())));
            }
            weight_trace.push(w);
            trees.push(Tree::read_text(&mut r, n_classes, width)?);
        }
        r.keyed("final_weights")?;
        let mut fw = AttributeWeights::uniform(width);
        for (f, line) in r.take(width)?.into_iter().enumerate() {
            let ln = r.line_no() - width + f + 1;
            let mut it = line.split_whitespace();
            let id: usize = parse_num(it.next(), ln, "feature")?;
            if id != f {
                return Err(Error::format(ln, format!("expected feature {f}, found {id}")));
            }
            fw.weights[f] = parse_num(it.next(), ln, "weight")?;
            fw.base[f] = parse_num(it.next(), ln, "base weight")?;
            fw.streak[f] = parse_num(it.next(), ln, "streak")?;
            fw.last_tested_depth[f] = parse_opt_usize(it.next().unwrap_or(""), ln)?;
        }
        r.keyed("end")?;
        Ok(ForestPaModel {
            trees,
            seeds,
            classes,
            width,
            params,
            weight_trace,
            final_weights: fw,
        })
    }
}
