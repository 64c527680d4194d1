//! Binary decision trees over numeric features, shared by the REP tree and
//! the Forest PA ensemble.
//!
//! Trees live in an arena: node 0 is the root and every child id is larger
//! than its parent's, so reverse id order visits children before parents.

use crate::error::{Error, Result};
use crate::samples::{argmax, check_width, Samples};
use crate::textfmt::{fmt_f64, parse_num, LineReader};

/// Gains closer than this are treated as equal.
pub const GAIN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        counts: Vec<usize>,
        class: usize,
    },
    /// `value <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        counts: Vec<usize>,
        left: usize,
        right: usize,
    },
}

impl Node {
    pub fn counts(&self) -> &[usize] {
        match self {
            Node::Leaf { counts, .. } | Node::Split { counts, .. } => counts,
        }
    }

    pub fn leaf(counts: Vec<usize>) -> Node {
        let class = argmax(&counts);
        Node::Leaf { counts, class }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn single_leaf(counts: Vec<usize>) -> Tree {
        Tree {
            nodes: vec![Node::leaf(counts)],
        }
    }

    /// Builds a tree from arena nodes, checking the child-ordering invariant.
    pub fn from_nodes(nodes: Vec<Node>) -> Result<Tree> {
        if nodes.is_empty() {
            return Err(Error::format(0, "tree has no nodes"));
        }
        for (id, node) in nodes.iter().enumerate() {
            if let Node::Split { left, right, .. } = node {
                if *left <= id || *right <= id || *left >= nodes.len() || *right >= nodes.len() {
                    return Err(Error::format(0, format!("node {id}: bad child reference")));
                }
            }
        }
        Ok(Tree { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.nodes[0].counts().len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Id of the leaf reached by `row`.
    pub fn leaf_id(&self, row: &[f64]) -> usize {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { .. } => return id,
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

    /// Predicted class and normalized leaf distribution.
    pub fn predict_dist(&self, row: &[f64]) -> (usize, Vec<f64>) {
        match &self.nodes[self.leaf_id(row)] {
            Node::Leaf { counts, class } => {
                let total: usize = counts.iter().sum();
                let dist = counts
                    .iter()
                    .map(|&c| if total == 0 { 0.0 } else { c as f64 / total as f64 })
                    .collect();
                (*class, dist)
            }
            Node::Split { .. } => unreachable!(),
        }
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        match &self.nodes[self.leaf_id(row)] {
            Node::Leaf { class, .. } => *class,
            Node::Split { .. } => unreachable!(),
        }
    }

    /// Depth of every node, root = 1.
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.nodes.len()];
        depth[0] = 1;
        for (id, node) in self.nodes.iter().enumerate() {
            if let Node::Split { left, right, .. } = node {
                depth[*left] = depth[id] + 1;
                depth[*right] = depth[id] + 1;
            }
        }
        depth
    }

    pub fn max_depth(&self) -> usize {
        self.depths().into_iter().max().unwrap_or(1)
    }

    /// Shallowest depth (root = 1) at which each feature is tested.
    pub fn feature_min_depths(&self, width: usize) -> Vec<Option<usize>> {
        let depths = self.depths();
        let mut out = vec![None; width];
        for (id, node) in self.nodes.iter().enumerate() {
            if let Node::Split { feature, .. } = node {
                let d = depths[id];
                let slot = &mut out[*feature];
                *slot = Some(slot.map_or(d, |cur: usize| cur.min(d)));
            }
        }
        out
    }

    pub fn root_feature(&self) -> Option<usize> {
        match self.root() {
            Node::Split { feature, .. } => Some(*feature),
            Node::Leaf { .. } => None,
        }
    }

    /// Keeps only nodes reachable from the root, renumbered in preorder.
    pub(crate) fn compact(&self, as_leaf: &[bool]) -> Tree {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        // (old id, slot in parent to patch)
        let mut stack: Vec<(usize, Option<(usize, bool)>)> = vec![(0, None)];
        while let Some((old, parent)) = stack.pop() {
            let new_id = nodes.len();
            if let Some((p, is_left)) = parent {
                if let Node::Split { left, right, .. } = &mut nodes[p] {
                    if is_left {
                        *left = new_id;
                    } else {
                        *right = new_id;
                    }
                }
            }
            match &self.nodes[old] {
                Node::Split {
                    feature,
                    threshold,
                    counts,
                    left,
                    right,
                } if !as_leaf[old] => {
                    nodes.push(Node::Split {
                        feature: *feature,
                        threshold: *threshold,
                        counts: counts.clone(),
                        left: 0,
                        right: 0,
                    });
                    stack.push((*right, Some((new_id, false))));
                    stack.push((*left, Some((new_id, true))));
                }
                node => nodes.push(Node::leaf(node.counts().to_vec())),
            }
        }
        Tree { nodes }
    }

    pub fn write_text(&self, out: &mut String) {
        out.push_str(&format!("nodes {}\n", self.nodes.len()));
        for (id, node) in self.nodes.iter().enumerate() {
            let counts: Vec<String> = node.counts().iter().map(usize::to_string).collect();
            match node {
                Node::Leaf { class, .. } => {
                    out.push_str(&format!("{id} leaf {class} | {}\n", counts.join(" ")))
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => out.push_str(&format!(
                    "{id} split {feature} {} {left} {right} | {}\n",
                    fmt_f64(*threshold),
                    counts.join(" ")
                )),
            }
        }
    }

    pub(crate) fn read_text(r: &mut LineReader<'_>, n_classes: usize, width: usize) -> Result<Tree> {
        let n: usize = r.keyed_parse("nodes")?;
        let mut nodes = Vec::with_capacity(n);
        for expect_id in 0..n {
            let line = r.next_line()?;
            let ln = r.line_no();
            let (head, counts) = line
                .split_once(" | ")
                .ok_or_else(|| r.err("node record lacks counts"))?;
            let counts = counts
                .split_whitespace()
                .map(|c| parse_num(Some(c), ln, "count"))
                .collect::<Result<Vec<usize>>>()?;
            if counts.len() != n_classes {
                return Err(r.err(format!("expected {n_classes} counts, found {}", counts.len())));
            }
            let mut it = head.split_whitespace();
            let id: usize = parse_num(it.next(), ln, "node id")?;
            if id != expect_id {
                return Err(r.err(format!("expected node {expect_id}, found {id}")));
            }
            let node = match it.next() {
                Some("leaf") => {
                    let class: usize = parse_num(it.next(), ln, "class")?;
                    if class >= n_classes {
                        return Err(r.err("leaf class out of range"));
                    }
                    Node::Leaf { counts, class }
                }
                Some("split") => {
                    let feature: usize = parse_num(it.next(), ln, "feature")?;
                    if feature >= width {
                        return Err(r.err("split feature out of range"));
                    }
                    Node::Split {
                        feature,
                        threshold: parse_num(it.next(), ln, "threshold")?,
                        left: parse_num(it.next(), ln, "left child")?,
                        right: parse_num(it.next(), ln, "right child")?,
                        counts,
                    }
                }
                other => return Err(r.err(format!("unknown node kind {other:?}"))),
            };
            nodes.push(node);
        }
        Tree::from_nodes(nodes).map_err(|e| r.err(e.to_string()))
    }
}

/// Shannon entropy in bits.
pub fn entropy(counts: &[usize]) -> Result<f64> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::ZeroCounts);
    }
    let n = total as f64;
    Ok(counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum())
}

/// Information gain of splitting `parent` into `left` and `right`.
pub fn info_gain(parent: &[usize], left: &[usize], right: &[usize]) -> Result<f64> {
    let n: usize = parent.iter().sum();
    let nl: usize = left.iter().sum();
    let nr: usize = right.iter().sum();
    let h = entropy(parent)?;
    let hl = if nl == 0 { 0.0 } else { entropy(left)? };
    let hr = if nr == 0 { 0.0 } else { entropy(right)? };
    Ok(h - (nl as f64 / n as f64) * hl - (nr as f64 / n as f64) * hr)
}

/// Threshold between two consecutive distinct values, always in `[lo, hi)`.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) * 0.5;
    if mid < hi && mid >= lo {
        mid
    } else {
        lo
    }
}

/// `x log2 x` for every count up to `n`, so subset entropies update in O(1).
struct XLogX(Vec<f64>);

impl XLogX {
    fn new(n: usize) -> Self {
        XLogX(
            (0..=n)
                .map(|x| if x == 0 { 0.0 } else { x as f64 * (x as f64).log2() })
                .collect(),
        )
    }
}

/// Best threshold on one feature over records sorted by that feature.
/// Returns (threshold, gain, number of records routed left).
fn scan_sorted(
    samples: &Samples,
    sorted: &[u32],
    feature: usize,
    parent: &[usize],
    min_leaf: usize,
    xlx: &XLogX,
    left: &mut [usize],
) -> Option<(f64, f64, usize)> {
    let n = sorted.len();
    if n < 2 {
        return None;
    }
    let xlx = &xlx.0;
    left.iter_mut().for_each(|c| *c = 0);
    let parent_sum: f64 = parent.iter().map(|&c| xlx[c]).sum();
    let h_parent = (xlx[n] - parent_sum) / n as f64;
    let mut left_sum = 0.0;
    let mut right_sum = parent_sum;
    let mut best: Option<(f64, f64, usize)> = None;
    for i in 0..n - 1 {
        let row = sorted[i] as usize;
        let k = samples.label(row);
        let cl = left[k];
        let cr = parent[k] - cl;
        left_sum += xlx[cl + 1] - xlx[cl];
        right_sum += xlx[cr - 1] - xlx[cr];
        left[k] = cl + 1;

        let nl = i + 1;
        let nr = n - nl;
        if nl < min_leaf || nr < min_leaf {
            continue;
        }
        let v = samples.value(row, feature);
        let next = samples.value(sorted[i + 1] as usize, feature);
        if !(v < next) {
            continue;
        }
        let children = (xlx[nl] - left_sum + xlx[nr] - right_sum) / n as f64;
        let gain = h_parent - children;
        if best.is_none_or(|(_, g, _)| gain > g + GAIN_EPS) {
            best = Some((midpoint(v, next), gain, nl));
        }
    }
    best
}

fn sorted_by_feature(samples: &Samples, indices: &[usize], feature: usize) -> Vec<u32> {
    let mut sorted: Vec<u32> = indices.iter().map(|&i| i as u32).collect();
    sorted.sort_by(|&a, &b| {
        samples
            .value(a as usize, feature)
            .total_cmp(&samples.value(b as usize, feature))
            .then(a.cmp(&b))
    });
    sorted
}

/// Best binary split of `indices` on `feature`: (threshold, information gain).
/// Ties go to the smallest threshold.
pub fn best_numeric_split(samples: &Samples, indices: &[usize], feature: usize) -> Result<(f64, f64)> {
    let sorted = sorted_by_feature(samples, indices, feature);
    let parent = samples.class_counts(indices.iter().copied());
    let xlx = XLogX::new(indices.len());
    let mut left = vec![0; samples.n_classes()];
    scan_sorted(samples, &sorted, feature, &parent, 1, &xlx, &mut left)
        .map(|(t, g, _)| (t, g.max(0.0)))
        .ok_or(Error::NoSplit(feature))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowParams {
    pub min_leaf: usize,
    /// Maximum number of split levels; `None` is unlimited.
    pub max_depth: Option<usize>,
}

impl Default for GrowParams {
    fn default() -> Self {
        GrowParams {
            min_leaf: 2,
            max_depth: None,
        }
    }
}

struct Task {
    parent: Option<(usize, bool)>,
    cols: Vec<Vec<u32>>,
    depth: usize,
}

/// Grows an unpruned information-gain tree on `indices` (duplicates allowed).
pub fn grow_tree(samples: &Samples, indices: &[usize], params: &GrowParams) -> Result<Tree> {
    grow_weighted_tree(samples, indices, params, &vec![1.0; samples.width()])
}

/// Grows a tree choosing splits by `gain * weights[feature]`. A split is
/// only taken when its raw gain is positive.
pub fn grow_weighted_tree(
    samples: &Samples,
    indices: &[usize],
    params: &GrowParams,
    weights: &[f64],
) -> Result<Tree> {
    if indices.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if params.min_leaf == 0 {
        return Err(Error::InvalidParam("min_leaf must be at least 1".into()));
    }
    check_width(samples.width(), weights)?;
    let width = samples.width();
    let k = samples.n_classes();
    let xlx = XLogX::new(indices.len());
    let mut left_counts = vec![0; k];
    let mut go_left = vec![false; samples.len()];
    let mut nodes: Vec<Node> = Vec::new();

    let root_cols: Vec<Vec<u32>> = if width == 0 {
        vec![indices.iter().map(|&i| i as u32).collect()]
    } else {
        (0..width).map(|f| sorted_by_feature(samples, indices, f)).collect()
    };
    let mut stack = vec![Task {
        parent: None,
        cols: root_cols,
        depth: 0,
    }];

    while let Some(task) = stack.pop() {
        let id = nodes.len();
        if let Some((p, is_left)) = task.parent {
            if let Node::Split { left, right, .. } = &mut nodes[p] {
                if is_left {
                    *left = id;
                } else {
                    *right = id;
                }
            }
        }
        let members = &task.cols[0];
        let n = members.len();
        let counts = samples.class_counts(members.iter().map(|&i| i as usize));
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_capped = params.max_depth.is_some_and(|d| task.depth >= d);
        if pure || depth_capped || n < 2 * params.min_leaf || width == 0 {
            nodes.push(Node::leaf(counts));
            continue;
        }

        // (merit, feature, threshold, n_left)
        let mut best: Option<(f64, usize, f64, usize)> = None;
        for f in 0..width {
            let w = weights[f];
            if w <= 0.0 {
                continue;
            }
            let Some((threshold, gain, nl)) =
                scan_sorted(samples, &task.cols[f], f, &counts, params.min_leaf, &xlx, &mut left_counts)
            else {
                continue;
            };
            if gain <= GAIN_EPS {
                continue;
            }
            let merit = gain * w;
            if best.is_none_or(|(m, ..)| merit > m + GAIN_EPS) {
                best = Some((merit, f, threshold, nl));
            }
        }
        let Some((_, feature, threshold, nl)) = best else {
            nodes.push(Node::leaf(counts));
            continue;
        };

        let chosen = &task.cols[feature];
        for &i in &chosen[..nl] {
            go_left[i as usize] = true;
        }
        let mut left_cols = Vec::with_capacity(task.cols.len());
        let mut right_cols = Vec::with_capacity(task.cols.len());
        for col in &task.cols {
            let (l, r): (Vec<u32>, Vec<u32>) = col.iter().partition(|&&i| go_left[i as usize]);
            left_cols.push(l);
            right_cols.push(r);
        }
        for &i in &chosen[..nl] {
            go_left[i as usize] = false;
        }

        nodes.push(Node::Split {
            feature,
            threshold,
            counts,
            left: 0,
            right: 0,
        });
        stack.push(Task {
            parent: Some((id, false)),
            cols: right_cols,
            depth: task.depth + 1,
        });
        stack.push(Task {
            parent: Some((id, true)),
            cols: left_cols,
            depth: task.depth + 1,
        });
    }
    Ok(Tree { nodes })
}
