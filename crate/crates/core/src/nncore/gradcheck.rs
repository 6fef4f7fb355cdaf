//! Central finite-difference checks for the analytic backward passes.
//!
//! A layer is probed through the scalar `L = Σ r ⊙ layer(x)` with a fixed
//! random `r`; every input and parameter coordinate is perturbed by
//! `±STEP` and the numeric slope compared with the analytic gradient.

use rand::Rng as _;

use super::{cross_entropy, softmax, softmax_backward, Layer, Mode, Tensor};
use crate::error::Result;
use crate::rng::{derive_seed, seeded};

pub const STEP: f64 = 1e-5;

/// Denominator floor so that coordinates whose true gradient is ~0 are
/// judged on absolute error instead of amplified rounding noise.
pub const REL_FLOOR: f64 = 1e-6;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GradCheck {
    pub max_rel_input: f64,
    pub max_rel_params: f64,
    /// Coordinates compared.
    pub checked: usize,
}

impl GradCheck {
    pub fn max_rel(&self) -> f64 {
        self.max_rel_input.max(self.max_rel_params)
    }
}

/// Checks input and parameter gradients of one layer.
///
/// Dropout is evaluated in train mode with the mask regenerated from the
/// same seed on every call, so the probed function is fixed.
pub fn check_layer(layer: &Layer, input: &Tensor, seed: u64) -> Result<GradCheck> {
    let mask_seed = derive_seed(seed, 1);
    let run = |l: &Layer, x: &Tensor| l.forward(x, Mode::Train, &mut seeded(mask_seed));
    let (out, cache) = run(layer, input)?;
    let mut rng = seeded(derive_seed(seed, 2));
    let r: Vec<f64> = (0..out.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let probe = |l: &Layer, x: &Tensor| -> Result<f64> {
        let (y, _) = run(l, x)?;
        Ok(y.data().iter().zip(&r).map(|(a, b)| a * b).sum())
    };

    let mut grads: Vec<Vec<f64>> = layer.params().iter().map(|p| vec![0.0; p.len()]).collect();
    let gin = layer.backward(&cache, &Tensor::new(out.shape().to_vec(), r.clone())?, &mut grads)?;

    let mut report = GradCheck::default();
    let mut x = input.clone();
    for i in 0..x.len() {
        let orig = x.data()[i];
        x.data_mut()[i] = orig + STEP;
        let up = probe(layer, &x)?;
        x.data_mut()[i] = orig - STEP;
        let down = probe(layer, &x)?;
        x.data_mut()[i] = orig;
        let numeric = (up - down) / (2.0 * STEP);
        report.max_rel_input = report.max_rel_input.max(relative_error(gin.data()[i], numeric));
        report.checked += 1;
    }

    let mut probe_layer = layer.clone();
    for (slot, g) in grads.iter().enumerate() {
        for (j, &analytic) in g.iter().enumerate() {
            let orig = probe_layer.params()[slot][j];
            probe_layer.params_mut()[slot][j] = orig + STEP;
            let up = probe(&probe_layer, input)?;
            probe_layer.params_mut()[slot][j] = orig - STEP;
            let down = probe(&probe_layer, input)?;
            probe_layer.params_mut()[slot][j] = orig;
            let numeric = (up - down) / (2.0 * STEP);
            report.max_rel_params = report.max_rel_params.max(relative_error(analytic, numeric));
            report.checked += 1;
        }
    }
    Ok(report)
}

/// Checks `softmax_backward` on `L = Σ r ⊙ softmax(logits)`.
pub fn check_softmax(logits: &Tensor, seed: u64) -> Result<GradCheck> {
    let mut rng = seeded(seed);
    let r: Vec<f64> = (0..logits.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let probe = |x: &Tensor| -> f64 { softmax(x).data().iter().zip(&r).map(|(a, b)| a * b).sum() };
    let p = softmax(logits);
    let g = softmax_backward(&p, &Tensor::new(p.shape().to_vec(), r.clone())?)?;
    Ok(compare_input(logits, g.data(), probe))
}

/// Checks the combined softmax + cross-entropy gradient `(p − y)/batch`.
pub fn check_softmax_cross_entropy(logits: &Tensor, targets: &Tensor) -> Result<GradCheck> {
    let (_, g) = cross_entropy(&softmax(logits), targets)?;
    let probe = |x: &Tensor| -> f64 {
        cross_entropy(&softmax(x), targets).map(|(l, _)| l).unwrap_or(f64::NAN)
    };
    Ok(compare_input(logits, g.data(), probe))
}

fn compare_input(x: &Tensor, analytic: &[f64], probe: impl Fn(&Tensor) -> f64) -> GradCheck {
    let mut report = GradCheck::default();
    let mut x = x.clone();
    for (i, &a) in analytic.iter().enumerate() {
        let orig = x.data()[i];
        x.data_mut()[i] = orig + STEP;
        let up = probe(&x);
        x.data_mut()[i] = orig - STEP;
        let down = probe(&x);
        x.data_mut()[i] = orig;
        let numeric = (up - down) / (2.0 * STEP);
        report.max_rel_input = report.max_rel_input.max(relative_error(a, numeric));
        report.checked += 1;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nncore::{Conv1d, Dense, Dropout, Lstm, LstmOutput, MaxPool1d};
    use crate::rng::Rng;

    const TOL: f64 = 1e-4;

    fn random(rng: &mut Rng, shape: Vec<usize>) -> Tensor {
        let n = shape.iter().product();
        Tensor::new(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn conv() {
        let mut rng = seeded(1);
        for stride in [1, 2] {
            let mut l = Conv1d::new(2, 3, 3, stride).unwrap();
            l.init(&mut rng);
            l.bias.iter_mut().for_each(|b| *b = rng.random_range(-0.5..0.5));
            let x = random(&mut rng, vec![7, 2]);
            let r = check_layer(&Layer::Conv1d(l), &x, 5).unwrap();
            assert!(r.max_rel() < TOL, "{r:?}");
        }
    }

    #[test]
    fn pool_relu_dropout() {
        let x = Tensor::matrix(5, 2, vec![0.1, -0.9, 0.7, 0.3, -0.4, 0.8, 0.95, -0.2, 0.5, 0.6]).unwrap();
        for layer in [
            Layer::MaxPool1d(MaxPool1d::new(2, 2).unwrap()),
            Layer::Relu,
            Layer::Dropout(Dropout::new(0.4).unwrap()),
        ] {
            let r = check_layer(&layer, &x, 3).unwrap();
            assert!(r.max_rel() < TOL, "{} {r:?}", layer.name());
        }
    }

    #[test]
    fn dense() {
        let mut rng = seeded(2);
        let mut d = Dense::new(6, 4).unwrap();
        d.init(&mut rng);
        let r = check_layer(&Layer::Dense(d), &random(&mut rng, vec![3, 2]), 7).unwrap();
        assert!(r.max_rel() < TOL, "{r:?}");
    }

    #[test]
    fn lstm_four_steps() {
        let mut rng = seeded(3);
        for output in [LstmOutput::Sequence, LstmOutput::Last] {
            let mut l = Lstm::new(2, 3, output).unwrap();
            l.init(&mut rng);
            let r = check_layer(&Layer::Lstm(l), &random(&mut rng, vec![4, 2]), 11).unwrap();
            assert!(r.max_rel() < TOL, "{output:?} {r:?}");
        }
    }

    #[test]
    fn softmax_and_loss() {
        let mut rng = seeded(4);
        let logits = random(&mut rng, vec![3, 4]);
        assert!(check_softmax(&logits, 1).unwrap().max_rel() < TOL);
        let targets = Tensor::matrix(3, 4, vec![0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 0., 1.]).unwrap();
        assert!(check_softmax_cross_entropy(&logits, &targets).unwrap().max_rel() < TOL);
    }
}
