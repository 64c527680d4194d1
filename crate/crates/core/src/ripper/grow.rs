//! Rule growth by FOIL gain and reduced-error rule pruning.

use super::rule::{Cmp, Condition, Rule};
use crate::error::{Error, Result};
use crate::samples::Samples;
use crate::tree::{midpoint, GAIN_EPS};

/// `p1 * (log2(p1 / (p1 + n1)) - log2(p0 / (p0 + n0)))`.
pub fn foil_gain(p0: usize, n0: usize, p1: usize, n1: usize) -> Result<f64> {
    if p1 == 0 || p0 == 0 {
        return Err(Error::DeadRefinement);
    }
    let before = (p0 as f64 / (p0 + n0) as f64).log2();
    let after = (p1 as f64 / (p1 + n1) as f64).log2();
    Ok(p1 as f64 * (after - before))
}

/// Rule-pruning metric `(p - n) / (p + n)`; -1 when nothing is covered.
pub fn prune_metric(p: usize, n: usize) -> f64 {
    if p + n == 0 {
        -1.0
    } else {
        (p as f64 - n as f64) / (p + n) as f64
    }
}

/// Exact comparison of two prune metrics: true when `a` beats `b`.
fn metric_greater(a: (usize, usize), b: (usize, usize)) -> bool {
    let key = |(p, n): (usize, usize)| -> (i128, i128) {
        if p + n == 0 {
            (-1, 1)
        } else {
            (p as i128 - n as i128, (p + n) as i128)
        }
    };
    let (an, ad) = key(a);
    let (bn, bd) = key(b);
    an * bd > bn * ad
}

/// Per-feature sort order of every sample, built once per training run so
/// subsets can be walked in sorted order by filtering.
pub(crate) struct SortedColumns {
    cols: Vec<Vec<u32>>,
}

impl SortedColumns {
    pub fn new(samples: &Samples) -> Self {
        let cols = (0..samples.width())
            .map(|f| {
                let mut idx: Vec<u32> = (0..samples.len() as u32).collect();
                idx.sort_by(|&a, &b| {
                    samples
                        .value(a as usize, f)
                        .total_cmp(&samples.value(b as usize, f))
                        .then(a.cmp(&b))
                });
                idx
            })
            .collect();
        SortedColumns { cols }
    }
}

pub(crate) struct Grower<'a> {
    pub samples: &'a Samples,
    sorted: Option<&'a SortedColumns>,
    mask: Vec<bool>,
}

impl<'a> Grower<'a> {
    pub fn new(samples: &'a Samples, sorted: Option<&'a SortedColumns>) -> Self {
        Grower {
            samples,
            sorted,
            mask: vec![false; samples.len()],
        }
    }

    fn sorted_subset(&mut self, subset: &[usize], feature: usize, out: &mut Vec<usize>) {
        out.clear();
        let s = self.samples;
        match self.sorted {
            Some(sorted) if subset.len() * 16 >= s.len() => {
                for &i in subset {
                    self.mask[i] = true;
                }
                out.extend(
                    sorted.cols[feature]
                        .iter()
                        .map(|&i| i as usize)
                        .filter(|&i| self.mask[i]),
                );
                for &i in subset {
                    self.mask[i] = false;
                }
            }
            _ => {
                out.extend_from_slice(subset);
                out.sort_by(|&a, &b| s.value(a, feature).total_cmp(&s.value(b, feature)).then(a.cmp(&b)));
            }
        }
    }

    /// Extends `rule` with FOIL-gain-maximizing conditions on `grow` until it
    /// covers no negatives or no refinement gains.
    pub fn grow_from(&mut self, mut rule: Rule, grow: &[usize]) -> Result<Rule> {
        let s = self.samples;
        let target = rule.class;
        let mut covered: Vec<usize> = grow.iter().copied().filter(|&i| rule.matches(s.row(i))).collect();
        let mut sorted = Vec::with_capacity(covered.len());
        loop {
            let p0 = covered.iter().filter(|&&i| s.label(i) == target).count();
            let n0 = covered.len() - p0;
            if p0 == 0 {
                if rule.is_empty() {
                    return Err(Error::NoPositives);
                }
                break;
            }
            if n0 == 0 {
                break;
            }
            let mut best: Option<(f64, Condition)> = None;
            for f in 0..s.width() {
                self.sorted_subset(&covered, f, &mut sorted);
                let (mut p_le, mut n_le) = (0usize, 0usize);
                for w in 0..sorted.len().saturating_sub(1) {
                    let i = sorted[w];
                    if s.label(i) == target {
                        p_le += 1;
                    } else {
                        n_le += 1;
                    }
                    let v = s.value(i, f);
                    let next = s.value(sorted[w + 1], f);
                    if !(v < next) {
                        continue;
                    }
                    let threshold = midpoint(v, next);
                    for (cmp, p1, n1) in [(Cmp::Le, p_le, n_le), (Cmp::Gt, p0 - p_le, n0 - n_le)] {
                        if p1 == 0 {
                            continue;
                        }
                        let g = foil_gain(p0, n0, p1, n1)?;
                        if best.is_none_or(|(bg, _)| g > bg + GAIN_EPS) {
                            best = Some((
                                g,
                                Condition {
                                    feature: f,
                                    cmp,
                                    threshold,
                                },
                            ));
                        }
                    }
                }
            }
            match best {
                Some((g, cond)) if g > GAIN_EPS => {
                    rule.conditions.push(cond);
                    covered.retain(|&i| cond.matches(s.row(i)));
                }
                _ => break,
            }
        }
        Ok(rule)
    }
}

/// Grows a rule for `target` from scratch on `grow`.
pub fn grow_rule(samples: &Samples, grow: &[usize], target: usize) -> Result<Rule> {
    Grower::new(samples, None).grow_from(Rule::empty(target), grow)
}

/// Keeps the prefix of `rule` with the best `(p - n) / (p + n)` on `prune`,
/// preferring shorter prefixes on ties. At least one condition is kept. A
/// rule that covers nothing on `prune` is returned unchanged.
pub fn prune_rule(samples: &Samples, rule: &Rule, prune: &[usize]) -> (Rule, f64) {
    let k = rule.len();
    // coverage (p, n) for each prefix length 1..=k
    let mut cov = vec![(0usize, 0usize); k + 1];
    for &i in prune {
        let row = samples.row(i);
        let pos = samples.label(i) == rule.class;
        for (len, cond) in rule.conditions.iter().enumerate() {
            if !cond.matches(row) {
                break;
            }
            let c = &mut cov[len + 1];
            if pos {
                c.0 += 1;
            } else {
                c.1 += 1;
            }
        }
    }
    if k == 0 || cov[k].0 + cov[k].1 == 0 {
        let (p, n) = if k == 0 {
            let p = prune.iter().filter(|&&i| samples.label(i) == rule.class).count();
            (p, prune.len() - p)
        } else {
            (0, 0)
        };
        return (rule.clone(), prune_metric(p, n));
    }
    let mut best = 1;
    for len in 2..=k {
        if metric_greater(cov[len], cov[best]) {
            best = len;
        }
    }
    let pruned = Rule {
        conditions: rule.conditions[..best].to_vec(),
        class: rule.class,
    };
    (pruned, prune_metric(cov[best].0, cov[best].1))
}
