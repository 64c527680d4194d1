//! Reduced-error-pruning tree: an information-gain tree grown on part of
//! the training data and pruned bottom-up against the held-out rest.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng;
use crate::samples::{argmax, check_width, Samples};
use crate::textfmt::{fmt_f64, fmt_opt_usize, parse_opt_usize, LineReader};
use crate::tree::{grow_tree, GrowParams, Node, Tree};

pub const MAGIC: &str = "hids-reptree";

#[derive(Debug, Clone, PartialEq)]
pub struct RepTreeParams {
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
    /// Share of the training rows held out for pruning.
    pub prune_fraction: f64,
    /// When false the whole training set grows the tree and nothing is pruned.
    pub pruning: bool,
    pub seed: u64,
}

impl Default for RepTreeParams {
    fn default() -> Self {
        RepTreeParams {
            min_leaf: 2,
            max_depth: None,
            prune_fraction: 1.0 / 3.0,
            pruning: true,
            seed: 1,
        }
    }
}

impl RepTreeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.prune_fraction > 0.0 && self.prune_fraction < 1.0) {
            return Err(Error::InvalidParam(format!(
                "prune_fraction must be in (0, 1), got {}",
                self.prune_fraction
            )));
        }
        if self.min_leaf == 0 {
            return Err(Error::InvalidParam("min_leaf must be at least 1".into()));
        }
        Ok(())
    }

    fn grow(&self) -> GrowParams {
        GrowParams {
            min_leaf: self.min_leaf,
            max_depth: self.max_depth,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepTreeModel {
    pub tree: Tree,
    pub classes: Vec<String>,
    pub width: usize,
    pub params: RepTreeParams,
    pub grow_size: usize,
    pub prune_size: usize,
}

/// Number of prune-set records misclassified by `tree`.
pub fn prune_set_errors(tree: &Tree, samples: &Samples, prune: &[usize]) -> usize {
    prune
        .iter()
        .filter(|&&i| tree.predict(samples.row(i)) != samples.label(i))
        .count()
}

/// Bottom-up reduced-error pruning. A subtree becomes a leaf predicting the
/// majority of its growing distribution whenever that leaf makes no more
/// prune-set errors than the subtree (ties prune).
pub fn reduced_error_prune(tree: &Tree, samples: &Samples, prune: &[usize]) -> Tree {
    let nodes = tree.nodes();
    let n = nodes.len();
    // errors if the node were a leaf, for prune records passing through it
    let mut leaf_err = vec![0usize; n];
    let majority: Vec<usize> = nodes.iter().map(|nd| argmax(nd.counts())).collect();
    for &i in prune {
        let row = samples.row(i);
        let label = samples.label(i);
        let mut id = 0;
        loop {
            if majority[id] != label {
                leaf_err[id] += 1;
            }
            match &nodes[id] {
                Node::Leaf { .. } => break,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => id = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }
    let mut subtree_err = vec![0usize; n];
    let mut as_leaf = vec![false; n];
    for id in (0..n).rev() {
        match &nodes[id] {
            Node::Leaf { .. } => subtree_err[id] = leaf_err[id],
            Node::Split { left, right, .. } => {
                let below = subtree_err[*left] + subtree_err[*right];
                if leaf_err[id] <= below {
                    as_leaf[id] = true;
                    subtree_err[id] = leaf_err[id];
                } else {
                    subtree_err[id] = below;
                }
            }
        }
    }
    tree.compact(&as_leaf)
}

pub fn train_rep_tree(samples: &Samples, params: &RepTreeParams) -> Result<RepTreeModel> {
    params.validate()?;
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut rng = rng::seeded(params.seed);
    order.shuffle(&mut rng);
    let n_prune = if params.pruning {
        (samples.len() as f64 * params.prune_fraction).floor() as usize
    } else {
        0
    };
    let (grow_idx, prune_idx) = order.split_at(samples.len() - n_prune);
    let grown = grow_tree(samples, grow_idx, &params.grow())?;
    let tree = if prune_idx.is_empty() {
        grown
    } else {
        reduced_error_prune(&grown, samples, prune_idx)
    };
    Ok(RepTreeModel {
        tree,
        classes: samples.classes().to_vec(),
        width: samples.width(),
        params: params.clone(),
        grow_size: grow_idx.len(),
        prune_size: prune_idx.len(),
    })
}

impl RepTreeModel {
    pub fn predict(&self, row: &[f64]) -> Result<(usize, Vec<f64>)> {
        check_width(self.width, row)?;
        Ok(self.tree.predict_dist(row))
    }

    pub fn predict_label(&self, row: &[f64]) -> Result<&str> {
        let (c, _) = self.predict(row)?;
        Ok(&self.classes[c])
    }

    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = format!("{MAGIC} v1\nwidth {}\nclasses {}\n", self.width, self.classes.len());
        for c in &self.classes {
            out.push_str(&format!("class {c}\n"));
        }
        out.push_str(&format!(
            "min_leaf {}\nmax_depth {}\nprune_fraction {}\npruning {}\nseed {}\ngrow_size {}\nprune_size {}\n",
            p.min_leaf,
            fmt_opt_usize(p.max_depth),
            fmt_f64(p.prune_fraction),
            p.pruning,
            p.seed,
            self.grow_size,
            self.prune_size
        ));
        self.tree.write_text(&mut out);
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
        let min_leaf = r.keyed_parse("min_leaf")?;
        let raw = r.keyed("max_depth")?;
        let max_depth = parse_opt_usize(raw, r.line_no())?;
        let params = RepTreeParams {
            min_leaf,
            max_depth,
            prune_fraction: r.keyed_parse("prune_fraction")?,
            pruning: r.keyed_parse("pruning")?,
            seed: r.keyed_parse("seed")?,
        };
        let grow_size = r.keyed_parse("grow_size")?;
        let prune_size = r.keyed_parse("prune_size")?;
        let tree = Tree::read_text(&mut r, n_classes, width)?;
        r.keyed("end")?;
        Ok(RepTreeModel {
            tree,
            classes,
            width,
            params,
            grow_size,
            prune_size,
        })
    }
}
