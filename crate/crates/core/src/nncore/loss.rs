use super::Tensor;
use crate::error::{Error, Result};

/// Guard added inside the logarithm.
pub const LOG_EPSILON: f64 = 1e-12;

/// Mean categorical cross-entropy over the rows of `probs` (softmax output)
/// against one-hot `targets`, with the gradient at the logits, `(p − y)/batch`.
pub fn cross_entropy(probs: &Tensor, targets: &Tensor) -> Result<(f64, Tensor)> {
    if probs.shape() != targets.shape() || probs.is_empty() {
        return Err(Error::Shape(format!(
            "cross-entropy probabilities {:?} vs targets {:?}",
            probs.shape(),
            targets.shape()
        )));
    }
    let width = *probs.shape().last().unwrap();
    let batch = probs.len() / width;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(probs.len());
    for (p, y) in probs.data().chunks_exact(width).zip(targets.data().chunks_exact(width)) {
        let ones = y.iter().filter(|&&v| v == 1.0).count();
        if ones != 1 || y.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::Input(format!("target row {y:?} is not one-hot")));
        }
        for (&pi, &yi) in p.iter().zip(y) {
            if yi == 1.0 {
                loss -= (pi + LOG_EPSILON).ln();
            }
            grad.push((pi - yi) / batch as f64);
        }
    }
    Ok((loss / batch as f64, Tensor::new(probs.shape().to_vec(), grad)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let (l, _) = cross_entropy(&Tensor::vector(vec![0.25; 4]), &Tensor::vector(vec![0.0, 1.0, 0.0, 0.0])).unwrap();
        assert!((l - 4f64.ln()).abs() < 1e-11);
        let (l, g) = cross_entropy(&Tensor::vector(vec![0.0, 1.0]), &Tensor::vector(vec![0.0, 1.0])).unwrap();
        assert!(l.abs() < 1e-11);
        assert_eq!(g.data(), [0.0, 0.0]);
    }

    #[test]
    fn batch_mean_gradient() {
        let p = Tensor::matrix(2, 2, vec![0.5, 0.5, 0.2, 0.8]).unwrap();
        let y = Tensor::matrix(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let (l, g) = cross_entropy(&p, &y).unwrap();
        assert!((l - (-(0.5f64.ln()) - 0.8f64.ln()) / 2.0).abs() < 1e-9);
        for (a, b) in g.data().iter().zip([-0.25, 0.25, 0.1, -0.1]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_soft_targets() {
        let p = Tensor::vector(vec![0.5, 0.5]);
        for y in [vec![0.5, 0.5], vec![1.0, 1.0], vec![0.0, 0.0]] {
            assert!(matches!(cross_entropy(&p, &Tensor::vector(y)), Err(Error::Input(_))));
        }
    }
}
