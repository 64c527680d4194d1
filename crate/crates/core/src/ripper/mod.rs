//! RIPPER-style ordered rule lists.
//!
//! Classes are learned from rarest to most frequent; the most frequent
//! class becomes the default. For each class, rules are grown with FOIL
//! gain, pruned on a held-out third, and added until the rule set's
//! description length drifts more than `dl_slack_bits` above its minimum.
//! Optimization passes then revise each rule, keeping whichever variant
//! gives the shortest description length.

mod dl;
mod grow;
mod rule;

pub use dl::{
    exception_bits, length_prior_bits, possible_conditions, rule_model_bits,
    ruleset_description_length, subset_bits, DescriptionLength,
};
pub use grow::{foil_gain, grow_rule, prune_metric, prune_rule};
pub use rule::{Cmp, Condition, Rule};

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::{self, SeededRng};
use crate::samples::{check_width, Samples};
use crate::textfmt::{fmt_f64, LineReader};
use grow::{Grower, SortedColumns};

pub const MAGIC: &str = "hids-ripper";

#[derive(Debug, Clone, PartialEq)]
pub struct RipperParams {
    pub prune_fraction: f64,
    pub optimization_passes: usize,
    pub dl_slack_bits: f64,
    /// Rules covering fewer remaining positives than this end the class.
    pub min_rule_coverage: usize,
    pub seed: u64,
}

impl Default for RipperParams {
    fn default() -> Self {
        RipperParams {
            prune_fraction: 1.0 / 3.0,
            optimization_passes: 2,
            dl_slack_bits: 64.0,
            min_rule_coverage: 2,
            seed: 1,
        }
    }
}

impl RipperParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.prune_fraction > 0.0 && self.prune_fraction < 1.0) {
            return Err(Error::InvalidParam(format!(
                "prune_fraction must be in (0, 1), got {}",
                self.prune_fraction
            )));
        }
        if !(self.dl_slack_bits >= 0.0) {
            return Err(Error::InvalidParam("dl_slack_bits must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
    pub default_class: usize,
    /// Classes in learning order (ascending frequency); the last is the default.
    pub class_order: Vec<usize>,
    pub classes: Vec<String>,
    pub width: usize,
    pub params: RipperParams,
}

impl RuleSet {
    /// First matching rule's class, else the default class.
    pub fn predict(&self, row: &[f64]) -> Result<usize> {
        check_width(self.width, row)?;
        Ok(self.predict_unchecked(row))
    }

    pub(crate) fn predict_unchecked(&self, row: &[f64]) -> usize {
        self.rules
            .iter()
            .find(|r| r.matches(row))
            .map_or(self.default_class, |r| r.class)
    }

    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = format!("{MAGIC} v1\nwidth {}\nclasses {}\n", self.width, self.classes.len());
        for c in &self.classes {
            out.push_str(&format!("class {c}\n"));
        }
        let order: Vec<String> = self.class_order.iter().map(usize::to_string).collect();
        out.push_str(&format!(
            "prune_fraction {}\noptimization_passes {}\ndl_slack_bits {}\nmin_rule_coverage {}\nseed {}\n",
            fmt_f64(p.prune_fraction),
            p.optimization_passes,
            fmt_f64(p.dl_slack_bits),
            p.min_rule_coverage,
            p.seed
        ));
        out.push_str(&format!(
            "class_order {}\ndefault {}\nrules {}\n",
            order.join(" "),
            self.default_class,
            self.rules.len()
        ));
        for r in &self.rules {
            out.push_str(&r.to_line());
            out.push('\n');
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
        let params = RipperParams {
            prune_fraction: r.keyed_parse("prune_fraction")?,
            optimization_passes: r.keyed_parse("optimization_passes")?,
            dl_slack_bits: r.keyed_parse("dl_slack_bits")?,
            min_rule_coverage: r.keyed_parse("min_rule_coverage")?,
            seed: r.keyed_parse("seed")?,
        };
        let raw = r.keyed("class_order")?;
        let class_order = raw
            .split_whitespace()
            .map(|c| crate::textfmt::parse_num(Some(c), r.line_no(), "class index"))
            .collect::<Result<Vec<usize>>>()?;
        let default_class: usize = r.keyed_parse("default")?;
        if default_class >= n_classes || class_order.iter().any(|&c| c >= n_classes) {
            return Err(r.err("class index out of range"));
        }
        let n_rules: usize = r.keyed_parse("rules")?;
        let mut rules = Vec::with_capacity(n_rules);
        for _ in 0..n_rules {
            let line = r.next_line()?;
            rules.push(Rule::parse_line(line, r.line_no(), width, n_classes)?);
        }
        r.keyed("end")?;
        Ok(RuleSet {
            rules,
            default_class,
            class_order,
            classes,
            width,
            params,
        })
    }
}

/// Rule learning for one target class against the data left over from the
/// rarer classes.
struct ClassPhase<'a, 'g> {
    grower: &'a mut Grower<'g>,
    params: &'a RipperParams,
    data: Vec<usize>,
    target: usize,
    possible: usize,
    rules: Vec<Rule>,
    /// `masks[r][j]`: rule `r` covers `data[j]`.
    masks: Vec<Vec<bool>>,
}

impl ClassPhase<'_, '_> {
    fn samples(&self) -> &Samples {
        self.grower.samples
    }

    fn mask(&self, rule: &Rule) -> Vec<bool> {
        let s = self.samples();
        self.data.iter().map(|&i| rule.matches(s.row(i))).collect()
    }

    fn dl_of(&self, rules: &[&Rule], masks: &[&Vec<bool>]) -> f64 {
        let s = self.samples();
        let model: f64 = rules.iter().map(|r| rule_model_bits(r, self.possible)).sum();
        let (mut covered, mut fp, mut fn_) = (0, 0, 0);
        for (j, &i) in self.data.iter().enumerate() {
            let pos = s.label(i) == self.target;
            if masks.iter().any(|m| m[j]) {
                covered += 1;
                fp += usize::from(!pos);
            } else {
                fn_ += usize::from(pos);
            }
        }
        model + exception_bits(covered, self.data.len() - covered, fp, fn_)
    }

    fn dl(&self) -> f64 {
        let rules: Vec<&Rule> = self.rules.iter().collect();
        let masks: Vec<&Vec<bool>> = self.masks.iter().collect();
        self.dl_of(&rules, &masks)
    }

    fn dl_replacing(&self, at: usize, rule: &Rule, mask: &Vec<bool>) -> f64 {
        let rules: Vec<&Rule> = self
            .rules
            .iter()
            .enumerate()
            .map(|(k, r)| if k == at { rule } else { r })
            .collect();
        let masks: Vec<&Vec<bool>> = self
            .masks
            .iter()
            .enumerate()
            .map(|(k, m)| if k == at { mask } else { m })
            .collect();
        self.dl_of(&rules, &masks)
    }

    fn dl_without(&self, at: usize) -> f64 {
        let rules: Vec<&Rule> = self.rules.iter().enumerate().filter(|(k, _)| *k != at).map(|(_, r)| r).collect();
        let masks: Vec<&Vec<bool>> = self.masks.iter().enumerate().filter(|(k, _)| *k != at).map(|(_, m)| m).collect();
        self.dl_of(&rules, &masks)
    }

    /// Data positions not covered by rules `..upto`.
    fn uncovered(&self, upto: usize) -> Vec<usize> {
        (0..self.data.len())
            .filter(|&j| !self.masks[..upto].iter().any(|m| m[j]))
            .map(|j| self.data[j])
            .collect()
    }

    /// Stratified grow/prune split of `subset`.
    fn split(&self, subset: &[usize], rng: &mut SeededRng) -> (Vec<usize>, Vec<usize>) {
        let s = self.samples();
        let mut shuffled = subset.to_vec();
        shuffled.shuffle(rng);
        let (pos, neg): (Vec<usize>, Vec<usize>) = shuffled.into_iter().partition(|&i| s.label(i) == self.target);
        let cut = |v: &[usize]| v.len() - (v.len() as f64 * self.params.prune_fraction).floor() as usize;
        let (gp, np) = (cut(&pos), cut(&neg));
        let mut grow: Vec<usize> = pos[..gp].iter().chain(&neg[..np]).copied().collect();
        let mut prune: Vec<usize> = pos[gp..].iter().chain(&neg[np..]).copied().collect();
        grow.sort_unstable();
        prune.sort_unstable();
        (grow, prune)
    }

    fn coverage(&self, rule: &Rule, subset: &[usize]) -> (usize, usize) {
        let s = self.samples();
        let mut p = 0;
        let mut n = 0;
        for &i in subset {
            if rule.matches(s.row(i)) {
                if s.label(i) == self.target {
                    p += 1;
                } else {
                    n += 1;
                }
            }
        }
        (p, n)
    }

    /// Sequential covering until positives run out or the DL stopping rule fires.
    fn cover(&mut self, rng: &mut SeededRng) -> Result<()> {
        let mut min_dl = self.dl();
        loop {
            let remaining = self.uncovered(self.rules.len());
            let pos = remaining.iter().filter(|&&i| self.samples().label(i) == self.target).count();
            if pos == 0 {
                break;
            }
            let (grow, prune) = self.split(&remaining, rng);
            let grown = self.grower.grow_from(Rule::empty(self.target), &grow)?;
            let (rule, _) = prune_rule(self.samples(), &grown, &prune);
            let (p, n) = self.coverage(&rule, &remaining);
            if p < self.params.min_rule_coverage.max(1) || 2 * n >= p + n {
                break;
            }
            let mask = self.mask(&rule);
            self.rules.push(rule);
            self.masks.push(mask);
            let dl = self.dl();
            if dl < min_dl {
                min_dl = dl;
            }
            if dl > min_dl + self.params.dl_slack_bits {
                break;
            }
        }
        self.reduce_dl();
        Ok(())
    }

    /// Drops rules, last first, whose removal shortens the description.
    fn reduce_dl(&mut self) {
        let mut k = self.rules.len();
        while k > 0 {
            k -= 1;
            if self.dl_without(k) < self.dl() {
                self.rules.remove(k);
                self.masks.remove(k);
            }
        }
    }

    fn optimize(&mut self, rng: &mut SeededRng) -> Result<()> {
        for at in 0..self.rules.len() {
            let part = self.uncovered(at);
            let (grow, prune) = self.split(&part, rng);
            if !grow.iter().any(|&i| self.samples().label(i) == self.target) {
                continue;
            }
            let fresh = self.grower.grow_from(Rule::empty(self.target), &grow)?;
            let (replacement, _) = prune_rule(self.samples(), &fresh, &prune);
            let revision = match self.grower.grow_from(self.rules[at].clone(), &grow) {
                Ok(r) => Some(prune_rule(self.samples(), &r, &prune).0),
                Err(Error::NoPositives) => None,
                Err(e) => return Err(e),
            };
            let mut best_dl = self.dl();
            let mut best: Option<(Rule, Vec<bool>)> = None;
            for cand in std::iter::once(replacement).chain(revision) {
                let mask = self.mask(&cand);
                let dl = self.dl_replacing(at, &cand, &mask);
                if dl < best_dl {
                    best_dl = dl;
                    best = Some((cand, mask));
                }
            }
            if let Some((rule, mask)) = best {
                self.rules[at] = rule;
                self.masks[at] = mask;
            }
        }
        self.cover(rng)
    }
}

pub fn train_ripper(samples: &Samples, params: &RipperParams) -> Result<RuleSet> {
    params.validate()?;
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let counts = samples.class_counts(0..samples.len());
    let mut class_order: Vec<usize> = (0..samples.n_classes()).collect();
    // rarest first; among equal counts the lowest index goes last so it
    // becomes the default
    class_order.sort_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)));
    let default_class = *class_order.last().unwrap();

    let sorted = SortedColumns::new(samples);
    let mut grower = Grower::new(samples, Some(&sorted));
    let possible = possible_conditions(samples);
    let mut rng = rng::seeded(params.seed);
    let mut data: Vec<usize> = (0..samples.len()).collect();
    let mut rules = Vec::new();

    for &target in &class_order[..class_order.len() - 1] {
        if !data.iter().any(|&i| samples.label(i) == target) {
            continue;
        }
        let mut phase = ClassPhase {
            grower: &mut grower,
            params,
            data: std::mem::take(&mut data),
            target,
            possible,
            rules: Vec::new(),
            masks: Vec::new(),
        };
        phase.cover(&mut rng)?;
        for _ in 0..params.optimization_passes {
            phase.optimize(&mut rng)?;
        }
        data = phase.uncovered(phase.rules.len());
        rules.extend(phase.rules);
    }

    Ok(RuleSet {
        rules,
        default_class,
        class_order,
        classes: samples.classes().to_vec(),
        width: samples.width(),
        params: params.clone(),
    })
}
