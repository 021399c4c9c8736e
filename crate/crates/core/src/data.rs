//! Labelled datasets, LIBSVM text I/O, cross-validation splits and a
//! synthetic data generator.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, ParseError, Result};
use crate::sparse::CsrMatrix;

/// Feature matrix plus `±1` labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: CsrMatrix,
    labels: Vec<i8>,
}

impl Dataset {
    pub fn new(features: CsrMatrix, labels: Vec<i8>) -> Result<Self> {
        if features.n_rows() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.n_rows(),
                found: labels.len(),
            });
        }
        if labels.is_empty() {
            return Err(Error::InvalidDataset("no instances".into()));
        }
        if features.n_cols() == 0 {
            return Err(Error::InvalidDataset("no features".into()));
        }
        if let Some(y) = labels.iter().find(|y| **y != 1 && **y != -1) {
            return Err(Error::InvalidDataset(format!("label {y} is not ±1")));
        }
        Ok(Dataset { features, labels })
    }

    pub fn features(&self) -> &CsrMatrix {
        &self.features
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn n_instances(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    /// `y_i · wᵀx_i` for every instance.
    pub fn margins(&self, w: &[f64]) -> Result<Vec<f64>> {
        let mut z = self.features.matvec(w)?;
        for (zi, &y) in z.iter_mut().zip(&self.labels) {
            *zi *= f64::from(y);
        }
        Ok(z)
    }

    /// The instances at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.n_instances()) {
            return Err(Error::InvalidParameter(format!(
                "instance index {bad} out of range ({} instances)",
                self.n_instances()
            )));
        }
        let features = self.features.select_rows(indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Dataset::new(features, labels)
    }

    /// Same instances with the feature space widened or narrowed to `dim`
    /// columns; features beyond `dim` are dropped.
    pub fn with_dimension(&self, dim: usize) -> Result<Self> {
        let rows: Vec<Vec<(usize, f64)>> = (0..self.n_instances())
            .map(|i| {
                let (c, v) = self.features.row(i);
                c.iter()
                    .zip(v)
                    .filter(|(c, _)| **c < dim)
                    .map(|(c, v)| (*c, *v))
                    .collect()
            })
            .collect();
        Dataset::new(CsrMatrix::from_rows(dim, &rows)?, self.labels.clone())
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse(ParseError {
        line,
        message: message.into(),
    })
}

/// Reads LIBSVM text: `<label> <index>:<value> ...` per line with 1-based,
/// strictly increasing indices. Labels `0` are read as `-1`.
///
/// With `dim = Some(p)` the result has exactly `p` features and larger
/// indices are dropped (with a warning); otherwise `p` is the largest index
/// seen.
pub fn parse_libsvm<R: BufRead>(reader: R, dim: Option<usize>) -> Result<Dataset> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0usize;
    let mut dropped = 0usize;
    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        let mut tokens = line.split_whitespace();
        let Some(label_tok) = tokens.next() else {
            continue;
        };
        let label = match label_tok.parse::<f64>() {
            Ok(1.0) => 1,
            Ok(v) if v == -1.0 || v == 0.0 => -1,
            _ => {
                return Err(parse_error(
                    lineno,
                    format!("label `{label_tok}` is not one of -1, 0, +1"),
                ))
            }
        };
        let mut row = Vec::new();
        let mut prev = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_error(lineno, format!("malformed feature `{tok}`")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_error(lineno, format!("malformed feature index in `{tok}`")))?;
            if idx == 0 {
                return Err(parse_error(lineno, "feature indices are 1-based"));
            }
            if idx <= prev {
                return Err(parse_error(
                    lineno,
                    format!("feature index {idx} does not increase (previous {prev})"),
                ));
            }
            prev = idx;
            let val: f64 = val
                .parse()
                .map_err(|_| parse_error(lineno, format!("malformed feature value in `{tok}`")))?;
            if !val.is_finite() {
                return Err(parse_error(lineno, format!("non-finite value in `{tok}`")));
            }
            match dim {
                Some(p) if idx > p => dropped += 1,
                _ => {
                    max_index = max_index.max(idx);
                    row.push((idx - 1, val));
                }
            }
        }
        rows.push(row);
        labels.push(label);
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} feature values beyond dimension {}", dim.unwrap_or(0));
    }
    let p = dim.unwrap_or(max_index);
    Dataset::new(CsrMatrix::from_rows(p, &rows)?, labels)
}

/// Writes LIBSVM text that [`parse_libsvm`] reads back bit for bit.
pub fn write_libsvm<W: Write>(d: &Dataset, mut out: W) -> Result<()> {
    for i in 0..d.n_instances() {
        out.write_all(if d.labels[i] > 0 { b"+1" } else { b"-1" })?;
        let (cols, vals) = d.features.row(i);
        for (c, v) in cols.iter().zip(vals) {
            write!(out, " {}:", c + 1)?;
            write_value(&mut out, *v)?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Shortest decimal that parses back to the same bits; exponent form only
/// for magnitudes where positional notation gets long.
fn write_value<W: Write>(out: &mut W, v: f64) -> std::io::Result<()> {
    let a = v.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        write!(out, "{v}")
    } else {
        write!(out, "{v:e}")
    }
}

/// Fraction of stored entries, `nnz / (n·p)`.
pub fn sparsity_metric(d: &Dataset) -> f64 {
    d.features.nnz() as f64 / (d.n_instances() as f64 * d.n_features() as f64)
}

/// Repeated k-fold cross-validation layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitPlan {
    pub folds: usize,
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for SplitPlan {
    fn default() -> Self {
        SplitPlan {
            folds: 5,
            repetitions: 4,
            seed: 0,
        }
    }
}

/// One train/test split; index lists are sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub repetition: usize,
    pub fold: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// `folds × repetitions` splits, repetition-major. Each repetition cuts a
/// fresh permutation into near-equal parts; the first `n mod folds` parts
/// get one extra instance.
pub fn kfold_split(d: &Dataset, plan: &SplitPlan) -> Result<Vec<FoldSplit>> {
    kfold_indices(d.n_instances(), plan)
}

pub fn kfold_indices(n: usize, plan: &SplitPlan) -> Result<Vec<FoldSplit>> {
    if plan.folds < 2 || plan.repetitions < 1 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 folds and 1 repetition, got {} and {}",
            plan.folds, plan.repetitions
        )));
    }
    if n < plan.folds {
        return Err(Error::TooFewInstances { n, folds: plan.folds });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let (base, extra) = (n / plan.folds, n % plan.folds);
    let mut out = Vec::with_capacity(plan.folds * plan.repetitions);
    for repetition in 0..plan.repetitions {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let mut start = 0;
        for fold in 0..plan.folds {
            let size = base + usize::from(fold < extra);
            let mut test = perm[start..start + size].to_vec();
            let mut train: Vec<usize> = perm[..start].iter().chain(&perm[start + size..]).copied().collect();
            test.sort_unstable();
            train.sort_unstable();
            out.push(FoldSplit {
                repetition,
                fold,
                train,
                test,
            });
            start += size;
        }
    }
    Ok(out)
}

/// A generated dataset and the unit vector that labels it.
#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub dataset: Dataset,
    pub hidden_weights: Vec<f64>,
}

/// Draws a unit Gaussian direction `w*`, `n` instances with `nnz_per_row`
/// standard normal entries in uniformly chosen columns, and labels
/// `sign(w*ᵀx + margin_noise·ε)` with `ε ~ N(0, 1)`; zero maps to `-1`.
pub fn synthetic_dataset(
    n: usize,
    p: usize,
    nnz_per_row: usize,
    margin_noise: f64,
    seed: u64,
) -> Result<SyntheticData> {
    if n == 0 || p == 0 || nnz_per_row == 0 || nnz_per_row > p {
        return Err(Error::InvalidParameter(format!(
            "need n, p ≥ 1 and 1 ≤ nnz_per_row ≤ p (n={n}, p={p}, nnz_per_row={nnz_per_row})"
        )));
    }
    if !(margin_noise >= 0.0 && margin_noise.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "margin noise must be finite and nonnegative, got {margin_noise}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w: Vec<f64> = (0..p).map(|_| StandardNormal.sample(&mut rng)).collect();
    let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    w.iter_mut().for_each(|x| *x /= norm);

    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let mut cols = rand::seq::index::sample(&mut rng, p, nnz_per_row).into_vec();
        cols.sort_unstable();
        let row: Vec<(usize, f64)> = cols.into_iter().map(|c| (c, StandardNormal.sample(&mut rng))).collect();
        let score: f64 = row.iter().map(|&(c, v)| w[c] * v).sum();
        let noise: f64 = StandardNormal.sample(&mut rng);
        labels.push(if score + margin_noise * noise > 0.0 { 1 } else { -1 });
        rows.push(row);
    }
    Ok(SyntheticData {
        dataset: Dataset::new(CsrMatrix::from_rows(p, &rows)?, labels)?,
        hidden_weights: w,
    })
}

/// Predicted labels: `+1` iff `wᵀx > 0`.
pub fn predict(w: &[f64], d: &Dataset) -> Result<Vec<i8>> {
    let scores = d.features.matvec(w)?;
    Ok(scores.iter().map(|&s| if s > 0.0 { 1 } else { -1 }).collect())
}

/// Fraction of instances whose predicted label matches.
pub fn accuracy(w: &[f64], d: &Dataset) -> Result<f64> {
    let pred = predict(w, d)?;
    let hits = pred.iter().zip(&d.labels).filter(|(p, y)| p == y).count();
    Ok(hits as f64 / d.n_instances() as f64)
}
