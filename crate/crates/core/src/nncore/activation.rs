use rand::Rng as _;

use super::{Mode, Tensor};
use crate::error::{Error, Result};
use crate::rng::Rng;

pub fn relu(input: &Tensor) -> Tensor {
    let mut out = input.clone();
    for v in out.data_mut() {
        *v = v.max(0.0);
    }
    out
}

/// Passes the gradient where the input was strictly positive.
pub fn relu_backward(input: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
    if input.shape() != grad_out.shape() {
        return Err(Error::Shape("relu gradient shape mismatch".into()));
    }
    let mut g = grad_out.clone();
    for (gi, &x) in g.data_mut().iter_mut().zip(input.data()) {
        if x <= 0.0 {
            *gi = 0.0;
        }
    }
    Ok(g)
}

/// Inverted dropout.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dropout {
    pub rate: f64,
}

impl Dropout {
    pub fn new(rate: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::Parameter(format!("dropout rate {rate} outside [0, 1)")));
        }
        Ok(Dropout { rate })
    }

    /// In train mode returns the scaled output and the per-element multiplier
    /// (0 or `1/(1-rate)`); inference is the identity.
    pub fn forward(&self, input: &Tensor, mode: Mode, rng: &mut Rng) -> (Tensor, Option<Vec<f64>>) {
        if mode == Mode::Infer || self.rate == 0.0 {
            return (input.clone(), None);
        }
        let keep = 1.0 / (1.0 - self.rate);
        let mask: Vec<f64> = (0..input.len())
            .map(|_| if rng.random::<f64>() < self.rate { 0.0 } else { keep })
            .collect();
        let mut out = input.clone();
        for (v, &m) in out.data_mut().iter_mut().zip(&mask) {
            *v *= m;
        }
        (out, Some(mask))
    }

    pub fn backward(&self, mask: Option<&[f64]>, grad_out: &Tensor) -> Tensor {
        let mut g = grad_out.clone();
        if let Some(mask) = mask {
            for (v, &m) in g.data_mut().iter_mut().zip(mask) {
                *v *= m;
            }
        }
        g
    }
}

/// Softmax over the last axis with max subtraction.
pub fn softmax(logits: &Tensor) -> Tensor {
    let width = logits.shape().last().copied().unwrap_or(0).max(1);
    let mut out = logits.clone();
    for row in out.data_mut().chunks_exact_mut(width) {
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - m).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

/// Vector-Jacobian product of softmax: `p ⊙ (g − <g, p>)` per row.
pub fn softmax_backward(probs: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
    if probs.shape() != grad_out.shape() {
        return Err(Error::Shape("softmax gradient shape mismatch".into()));
    }
    let width = probs.shape().last().copied().unwrap_or(0).max(1);
    let mut g = grad_out.clone();
    for (grow, prow) in g.data_mut().chunks_exact_mut(width).zip(probs.data().chunks_exact(width)) {
        let inner: f64 = grow.iter().zip(prow).map(|(a, b)| a * b).sum();
        for (gi, &p) in grow.iter_mut().zip(prow) {
            *gi = p * (*gi - inner);
        }
    }
    Ok(g)
}
