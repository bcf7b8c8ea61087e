//! Linear readout: multinomial logistic regression trained by full-batch
//! gradient descent with L2 regularization.
//!
//! Features are standardized with the training set's per-column mean and
//! standard deviation, which are stored with the classifier.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SnnError};
use crate::matrix::DenseMatrix;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutParams {
    pub l2: f64,
    pub epochs: usize,
    pub lr: f64,
}

impl Default for ReadoutParams {
    fn default() -> Self {
        ReadoutParams {
            l2: 1e-3,
            epochs: 300,
            lr: 0.5,
        }
    }
}

impl ReadoutParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.l2 >= 0.0 && self.lr > 0.0 && self.l2.is_finite() && self.lr.is_finite()) {
            return Err(SnnError::invalid("ReadoutParams: need l2 >= 0 and lr > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearClassifier {
    pub n_classes: usize,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    /// One row per class.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

fn check_shapes(features: &[Vec<f64>], labels: &[u8]) -> Result<usize> {
    if features.len() != labels.len() {
        return Err(SnnError::CountMismatch {
            images: features.len(),
            labels: labels.len(),
        });
    }
    let d = features.first().ok_or(SnnError::Empty("readout features"))?.len();
    for f in features {
        if f.len() != d {
            return Err(SnnError::DimensionMismatch {
                context: "readout feature vector",
                expected: d,
                found: f.len(),
            });
        }
        crate::error::ensure_finite("readout features", f)?;
    }
    Ok(d)
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    z.iter_mut().for_each(|v| *v /= sum);
}

impl LinearClassifier {
    fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    fn logits_std(&self, xs: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| b + w.iter().zip(xs).map(|(a, x)| a * x).sum::<f64>())
            .collect()
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        self.logits_std(&self.standardize(x))
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let z = self.logits(x);
        let mut best = 0;
        for (c, &v) in z.iter().enumerate() {
            if v > z[best] {
                best = c;
            }
        }
        best
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(SnnError::MissingArtifact(path.to_path_buf()));
        }
        let file = std::fs::File::open(path)?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }
}

pub fn train_readout(features: &[Vec<f64>], labels: &[u8], params: &ReadoutParams) -> Result<LinearClassifier> {
    params.validate()?;
    let d = check_shapes(features, labels)?;
    let n_classes = *labels.iter().max().expect("non-empty") as usize + 1;
    let mut present = vec![false; n_classes];
    labels.iter().for_each(|&c| present[c as usize] = true);
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(SnnError::DegenerateTraining(
            "training set contains a single class".into(),
        ));
    }

    let n = features.len() as f64;
    let mut mean = vec![0.0; d];
    for f in features {
        mean.iter_mut().zip(f).for_each(|(m, x)| *m += x / n);
    }
    let mut scale = vec![0.0; d];
    for f in features {
        scale
            .iter_mut()
            .zip(f.iter().zip(&mean))
            .for_each(|(s, (x, m))| *s += (x - m).powi(2) / n);
    }
    // Constant columns carry no information; leave them unscaled.
    scale.iter_mut().for_each(|s| *s = if *s > 0.0 { s.sqrt() } else { 1.0 });

    let mut clf = LinearClassifier {
        n_classes,
        mean,
        scale,
        weights: vec![vec![0.0; d]; n_classes],
        bias: vec![0.0; n_classes],
    };
    let xs: Vec<Vec<f64>> = features.iter().map(|f| clf.standardize(f)).collect();
    let x = DenseMatrix::from_rows(&xs)?;

    for _ in 0..params.epochs {
        let residuals: Vec<Vec<f64>> = par::map_collect(&xs, |row| {
            let mut p = clf.logits_std(row);
            softmax_in_place(&mut p);
            p
        });
        let mut grad_w = DenseMatrix::zeros(n_classes, d);
        let mut grad_b = vec![0.0; n_classes];
        for (i, (mut p, &y)) in residuals.into_iter().zip(labels).enumerate() {
            p[y as usize] -= 1.0;
            let row = x.row(i);
            for (c, &r) in p.iter().enumerate() {
                if r == 0.0 {
                    continue;
                }
                grad_b[c] += r;
                grad_w
                    .row_mut(c)
                    .iter_mut()
                    .zip(row)
                    .for_each(|(g, xv)| *g += r * xv);
            }
        }
        for c in 0..n_classes {
            let w = &mut clf.weights[c];
            for (j, wj) in w.iter_mut().enumerate() {
                *wj -= params.lr * (grad_w.get(c, j) / n + params.l2 * *wj);
            }
            clf.bias[c] -= params.lr * grad_b[c] / n;
        }
    }
    Ok(clf)
}

/// Fraction of samples classified correctly.
pub fn evaluate(classifier: &LinearClassifier, features: &[Vec<f64>], labels: &[u8]) -> Result<f64> {
    let d = check_shapes(features, labels)?;
    if d != classifier.mean.len() {
        return Err(SnnError::DimensionMismatch {
            context: "classifier feature width",
            expected: classifier.mean.len(),
            found: d,
        });
    }
    let correct = features
        .iter()
        .zip(labels)
        .filter(|(f, &y)| classifier.predict(f) == y as usize)
        .count();
    Ok(correct as f64 / features.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_class_is_degenerate() {
        let f = vec![vec![1.0], vec![2.0]];
        assert!(matches!(
            train_readout(&f, &[3, 3], &ReadoutParams::default()),
            Err(SnnError::DegenerateTraining(_))
        ));
    }

    #[test]
    fn save_load_is_exact() {
        let f: Vec<Vec<f64>> = (0..30).map(|i| vec![(i as f64 * 0.37).sin(), i as f64 / 7.0]).collect();
        let y: Vec<u8> = (0..30).map(|i| (i % 3) as u8).collect();
        let clf = train_readout(&f, &y, &ReadoutParams::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clf.json");
        clf.save(&path).unwrap();
        let back = LinearClassifier::load(&path).unwrap();
        assert_eq!(back, clf);
        assert_eq!(evaluate(&back, &f, &y).unwrap(), evaluate(&clf, &f, &y).unwrap());
    }

    #[test]
    fn missing_classifier_file() {
        let err = LinearClassifier::load("/nonexistent/clf.json").unwrap_err();
        assert!(matches!(err, SnnError::MissingArtifact(_)));
    }

    #[test]
    fn softmax_sums_to_one() {
        let mut z = vec![1000.0, 1001.0, -5.0];
        softmax_in_place(&mut z);
        assert!((z.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(z[1] > z[0]);
    }
}
