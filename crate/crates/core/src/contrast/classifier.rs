//! Logistic regression trained by full-batch gradient descent.
//!
//! Training starts from zero weights and is fully deterministic. Instances
//! are put in a canonical order first, so full-batch sums (and therefore the
//! fitted model) are invariant to the caller's instance ordering.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

use super::Instance;

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyper<F> {
    pub learning_rate: F,
    pub epochs: usize,
    /// L2 penalty on the weights (the bias is not regularized).
    pub l2: F,
}

impl<F: Real> Default for Hyper<F> {
    fn default() -> Self {
        Hyper {
            learning_rate: F::from_f64_lossy(0.5),
            epochs: 1000,
            l2: F::zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub epochs_run: usize,
    pub final_loss: f64,
}

/// A fitted linear classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classifier<F> {
    pub weights: Vec<F>,
    pub bias: F,
    pub meta: TrainingMeta,
}

impl<F: Real> Classifier<F> {
    pub fn predict_proba(&self, input: &[F]) -> F {
        debug_assert_eq!(input.len(), self.weights.len());
        let z = self
            .weights
            .iter()
            .zip(input)
            .map(|(&w, &x)| w * x)
            .fold(self.bias, |acc, term| acc + term);
        sigmoid(z)
    }

    /// Fixed decision threshold of 0.5 (probability exactly 0.5 maps to the
    /// positive class).
    pub fn predict(&self, input: &[F]) -> bool {
        self.predict_proba(input) >= F::from_f64_lossy(0.5)
    }
}

fn sigmoid<F: Real>(z: F) -> F {
    F::one() / (F::one() + (-z).exp())
}

fn canonical_order<F: Real>(data: &[Instance<F>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&a, &b| {
        let (ia, ib) = (&data[a], &data[b]);
        ia.language
            .cmp(&ib.language)
            .then_with(|| ia.glyph.cmp(&ib.glyph))
            .then_with(|| ia.label.cmp(&ib.label))
            .then_with(|| {
                for (x, y) in ia.input.iter().zip(&ib.input) {
                    match x.partial_cmp(y).expect("finite instance inputs") {
                        Ordering::Equal => continue,
                        other => return other,
                    }
                }
                Ordering::Equal
            })
    });
    order
}

/// Binary cross-entropy with L2 penalty, averaged over instances.
pub fn logistic_loss<F: Real>(data: &[Instance<F>], weights: &[F], bias: F, l2: F) -> F {
    let eps = F::from_f64_lossy(1e-12);
    let n = F::from_usize_lossy(data.len());
    let mut total = F::zero();
    for instance in data {
        let z = weights
            .iter()
            .zip(&instance.input)
            .map(|(&w, &x)| w * x)
            .fold(bias, |acc, term| acc + term);
        let p = sigmoid(z).max(eps).min(F::one() - eps);
        let term = if instance.label { p.ln() } else { (F::one() - p).ln() };
        total = total - term;
    }
    let penalty = weights
        .iter()
        .map(|&w| w * w)
        .fold(F::zero(), |acc, x| acc + x)
        * l2
        / F::from_f64_lossy(2.0);
    total / n + penalty
}

/// Analytic gradient of [`logistic_loss`]: `(d/dw, d/db)`.
pub fn logistic_gradient<F: Real>(
    data: &[Instance<F>],
    weights: &[F],
    bias: F,
    l2: F,
) -> (Vec<F>, F) {
    let n = F::from_usize_lossy(data.len());
    let mut grad_w = vec![F::zero(); weights.len()];
    let mut grad_b = F::zero();
    for instance in data {
        let z = weights
            .iter()
            .zip(&instance.input)
            .map(|(&w, &x)| w * x)
            .fold(bias, |acc, term| acc + term);
        let y = if instance.label { F::one() } else { F::zero() };
        let residual = sigmoid(z) - y;
        for (g, &x) in grad_w.iter_mut().zip(&instance.input) {
            *g = *g + residual * x;
        }
        grad_b = grad_b + residual;
    }
    for (g, &w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    (grad_w, grad_b / n)
}

/// Fit a logistic model by full-batch gradient descent from zero
/// initialization.
pub fn train_classifier<F: Real>(data: &[Instance<F>], hyper: &Hyper<F>) -> Result<Classifier<F>> {
    if data.is_empty() {
        return Err(Error::EmptyTrainingData);
    }
    let width = data[0].input.len();
    for instance in data {
        if instance.input.len() != width {
            return Err(Error::DimensionMismatch {
                left: width,
                right: instance.input.len(),
            });
        }
    }
    let n_pos = data.iter().filter(|i| i.label).count();
    if n_pos == 0 || n_pos == data.len() {
        return Err(Error::SingleClassData);
    }
    if !(hyper.learning_rate > F::zero()) || !(hyper.l2 >= F::zero()) {
        return Err(Error::InvalidParams(
            "learning_rate must be > 0 and l2 >= 0".into(),
        ));
    }

    let order = canonical_order(data);
    let sorted: Vec<Instance<F>> = order.iter().map(|&i| data[i].clone()).collect();

    let mut weights = vec![F::zero(); width];
    let mut bias = F::zero();
    for _ in 0..hyper.epochs {
        let (grad_w, grad_b) = logistic_gradient(&sorted, &weights, bias, hyper.l2);
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w = *w - hyper.learning_rate * *g;
        }
        bias = bias - hyper.learning_rate * grad_b;
    }
    let final_loss = logistic_loss(&sorted, &weights, bias, hyper.l2).as_f64();
    Ok(Classifier {
        weights,
        bias,
        meta: TrainingMeta {
            epochs_run: hyper.epochs,
            final_loss,
        },
    })
}

/// Fraction of instances the classifier labels correctly.
pub fn accuracy<F: Real>(classifier: &Classifier<F>, data: &[Instance<F>]) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let correct = data
        .iter()
        .filter(|i| classifier.predict(&i.input) == i.label)
        .count();
    correct as f64 / data.len() as f64
}
