//! Description-length accounting for the rule-list stopping criterion.

use statrs::function::factorial::ln_binomial;

use super::rule::Rule;
use crate::samples::Samples;

/// `log2 C(n, k)`: bits to say which `k` of `n` items are exceptions.
pub fn subset_bits(n: usize, k: usize) -> f64 {
    let k = k.min(n);
    if k == 0 || k == n {
        return 0.0;
    }
    (ln_binomial(n as u64, k as u64) / std::f64::consts::LN_2).max(0.0)
}

/// Elias-gamma length of `k + 1`: prior cost of announcing a rule with `k`
/// conditions.
pub fn length_prior_bits(k: usize) -> f64 {
    let v = (k + 1) as f64;
    2.0 * v.log2().floor() + 1.0
}

/// Each condition costs `log2(#possible conditions)`, plus the length prior.
pub fn rule_model_bits(rule: &Rule, possible_conditions: usize) -> f64 {
    let per = if possible_conditions > 1 {
        (possible_conditions as f64).log2()
    } else {
        0.0
    };
    rule.len() as f64 * per + length_prior_bits(rule.len())
}

/// Number of distinct (feature, threshold, direction) conditions the data
/// supports.
pub fn possible_conditions(samples: &Samples) -> usize {
    (0..samples.width())
        .map(|f| {
            let mut vals: Vec<f64> = (0..samples.len()).map(|i| samples.value(i, f)).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            2 * vals.len().saturating_sub(1)
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescriptionLength {
    pub model_bits: f64,
    pub exception_bits: f64,
}

impl DescriptionLength {
    pub fn total(&self) -> f64 {
        self.model_bits + self.exception_bits
    }
}

/// Exception bits for `fp` false positives among `covered` records and
/// `fn_` false negatives among `uncovered` records.
pub fn exception_bits(covered: usize, uncovered: usize, fp: usize, fn_: usize) -> f64 {
    subset_bits(covered, fp) + subset_bits(uncovered, fn_)
}

/// Description length of `rules` (all predicting `target`) on `data`.
pub fn ruleset_description_length(
    rules: &[Rule],
    samples: &Samples,
    data: &[usize],
    target: usize,
    possible: usize,
) -> DescriptionLength {
    let model_bits = rules.iter().map(|r| rule_model_bits(r, possible)).sum();
    let (mut covered, mut fp, mut fn_) = (0, 0, 0);
    for &i in data {
        let row = samples.row(i);
        let is_pos = samples.label(i) == target;
        if rules.iter().any(|r| r.matches(row)) {
            covered += 1;
            fp += usize::from(!is_pos);
        } else {
            fn_ += usize::from(is_pos);
        }
    }
    DescriptionLength {
        model_bits,
        exception_bits: exception_bits(covered, data.len() - covered, fp, fn_),
    }
}
