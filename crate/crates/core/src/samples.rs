use crate::error::{Error, Result};

/// Dense row-major training matrix with class indices, the common input of
/// every learner.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    width: usize,
    values: Vec<f64>,
    labels: Vec<usize>,
    classes: Vec<String>,
}

impl Samples {
    pub fn new(width: usize, values: Vec<f64>, labels: Vec<usize>, classes: Vec<String>) -> Result<Self> {
        if values.len() != width * labels.len() {
            return Err(Error::WidthMismatch {
                expected: width * labels.len(),
                found: values.len(),
            });
        }
        if classes.is_empty() {
            return Err(Error::InvalidParam("class vocabulary is empty".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes.len()) {
            return Err(Error::UnknownClass(format!("index {bad}")));
        }
        Ok(Samples {
            width,
            values,
            labels,
            classes,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<usize>, classes: Vec<String>) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != width) {
            return Err(Error::WidthMismatch {
                expected: width,
                found: r.len(),
            });
        }
        if rows.len() != labels.len() {
            return Err(Error::LengthMismatch(rows.len(), labels.len()));
        }
        Samples::new(width, rows.concat(), labels, classes)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.width..(i + 1) * self.width]
    }

    #[inline]
    pub fn value(&self, i: usize, feature: usize) -> f64 {
        self.values[i * self.width + feature]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.width.max(1)).take(self.len())
    }

    pub fn class_counts(&self, indices: impl IntoIterator<Item = usize>) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for i in indices {
            counts[self.labels[i]] += 1;
        }
        counts
    }

    pub fn subset(&self, indices: &[usize]) -> Samples {
        let mut values = Vec::with_capacity(indices.len() * self.width);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Samples {
            width: self.width,
            values,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes.clone(),
        }
    }

    pub fn check_width(&self, row: &[f64]) -> Result<()> {
        check_width(self.width, row)
    }
}

pub(crate) fn check_width(width: usize, row: &[f64]) -> Result<()> {
    if row.len() != width {
        return Err(Error::WidthMismatch {
            expected: width,
            found: row.len(),
        });
    }
    Ok(())
}

/// Index of the largest count, lowest index on ties.
pub fn argmax<T: PartialOrd + Copy>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
