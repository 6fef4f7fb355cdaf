use rand::Rng as _;

use super::{axpy, dot, glorot, Tensor};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Valid-padding 1-D convolution over a `[time, channels]` input.
///
/// Weights are stored as `[out][k][in]` so that one output value is a single
/// contiguous dot product with the input window; [`Conv1d::weight`] exposes
/// the conventional `w[o, c, k]` indexing.
#[derive(Clone, Debug, PartialEq)]
pub struct Conv1d {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub(crate) weight: Vec<f64>,
    pub(crate) bias: Vec<f64>,
}

impl Conv1d {
    /// Zero-initialised layer.
    pub fn new(in_channels: usize, out_channels: usize, kernel: usize, stride: usize) -> Result<Self> {
        if in_channels == 0 || out_channels == 0 || kernel == 0 || stride == 0 {
            return Err(Error::Shape(format!(
                "conv1d needs positive sizes, got in={in_channels} out={out_channels} kernel={kernel} stride={stride}"
            )));
        }
        Ok(Conv1d {
            in_channels,
            out_channels,
            kernel,
            stride,
            weight: vec![0.0; out_channels * kernel * in_channels],
            bias: vec![0.0; out_channels],
        })
    }

    /// Glorot-uniform weights, zero bias.
    pub fn init(&mut self, rng: &mut Rng) {
        let a = glorot(self.in_channels * self.kernel, self.out_channels * self.kernel);
        for w in &mut self.weight {
            *w = rng.random_range(-a..=a);
        }
        self.bias.fill(0.0);
    }

    /// Builds a layer from `w[o][c][k]` weights.
    pub fn from_weights(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        w_ock: &[f64],
        bias: &[f64],
    ) -> Result<Self> {
        let mut layer = Self::new(in_channels, out_channels, kernel, stride)?;
        if w_ock.len() != layer.weight.len() || bias.len() != out_channels {
            return Err(Error::Shape("conv1d weight or bias length mismatch".into()));
        }
        for o in 0..out_channels {
            for c in 0..in_channels {
                for k in 0..kernel {
                    let i = layer.idx(o, c, k);
                    layer.weight[i] = w_ock[(o * in_channels + c) * kernel + k];
                }
            }
        }
        layer.bias.copy_from_slice(bias);
        Ok(layer)
    }

    #[inline]
    fn idx(&self, o: usize, c: usize, k: usize) -> usize {
        (o * self.kernel + k) * self.in_channels + c
    }

    pub fn weight(&self, o: usize, c: usize, k: usize) -> f64 {
        self.weight[self.idx(o, c, k)]
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn param_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    pub fn output_len(&self, time: usize) -> Result<usize> {
        if time < self.kernel {
            return Err(Error::Shape(format!(
                "conv1d input length {time} shorter than kernel {}",
                self.kernel
            )));
        }
        Ok((time - self.kernel) / self.stride + 1)
    }

    fn check_input(&self, input: &Tensor) -> Result<(usize, usize)> {
        let (time, ch) = input.dims2()?;
        if ch != self.in_channels {
            return Err(Error::Shape(format!(
                "conv1d expects {} input channels, got {ch}",
                self.in_channels
            )));
        }
        Ok((time, self.output_len(time)?))
    }

    pub fn forward(&self, input: &Tensor) -> Result<Tensor> {
        let (_, out_t) = self.check_input(input)?;
        let (ci, co) = (self.in_channels, self.out_channels);
        let span = self.kernel * ci;
        let x = input.data();
        let mut out = Vec::with_capacity(out_t * co);
        for t in 0..out_t {
            let window = &x[t * self.stride * ci..t * self.stride * ci + span];
            for o in 0..co {
                out.push(self.bias[o] + dot(&self.weight[o * span..(o + 1) * span], window));
            }
        }
        Tensor::new(vec![out_t, co], out)
    }

    /// Accumulates parameter gradients into `gw`/`gb` and returns the input
    /// gradient.
    pub fn backward(&self, input: &Tensor, grad_out: &Tensor, gw: &mut [f64], gb: &mut [f64]) -> Result<Tensor> {
        let (time, out_t) = self.check_input(input)?;
        let (ci, co) = (self.in_channels, self.out_channels);
        if grad_out.shape() != [out_t, co] {
            return Err(Error::Shape(format!(
                "conv1d gradient shape {:?}, expected [{out_t}, {co}]",
                grad_out.shape()
            )));
        }
        let span = self.kernel * ci;
        let x = input.data();
        let g = grad_out.data();
        let mut gx = vec![0.0; time * ci];
        for t in 0..out_t {
            let start = t * self.stride * ci;
            let window = &x[start..start + span];
            for o in 0..co {
                let go = g[t * co + o];
                if go == 0.0 {
                    continue;
                }
                gb[o] += go;
                axpy(go, window, &mut gw[o * span..(o + 1) * span]);
                axpy(go, &self.weight[o * span..(o + 1) * span], &mut gx[start..start + span]);
            }
        }
        Tensor::new(vec![time, ci], gx)
    }
}

/// Windowed per-channel maximum; a trailing remainder shorter than the window
/// is dropped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MaxPool1d {
    pub width: usize,
    pub stride: usize,
}

impl MaxPool1d {
    pub fn new(width: usize, stride: usize) -> Result<Self> {
        if width == 0 || stride == 0 {
            return Err(Error::Shape("maxpool1d width and stride must be positive".into()));
        }
        Ok(MaxPool1d { width, stride })
    }

    pub fn output_len(&self, time: usize) -> Result<usize> {
        if time < self.width {
            return Err(Error::Shape(format!(
                "maxpool1d input length {time} shorter than width {}",
                self.width
            )));
        }
        Ok((time - self.width) / self.stride + 1)
    }

    /// Output plus the flat input index each output value came from
    /// (first maximum on ties).
    pub fn forward(&self, input: &Tensor) -> Result<(Tensor, Vec<usize>)> {
        let (time, ch) = input.dims2()?;
        let out_t = self.output_len(time)?;
        let x = input.data();
        let mut out = Vec::with_capacity(out_t * ch);
        let mut arg = Vec::with_capacity(out_t * ch);
        for t in 0..out_t {
            for c in 0..ch {
                let mut best = t * self.stride * ch + c;
                for k in 1..self.width {
                    let i = (t * self.stride + k) * ch + c;
                    if x[i] > x[best] {
                        best = i;
                    }
                }
                out.push(x[best]);
                arg.push(best);
            }
        }
        Ok((Tensor::new(vec![out_t, ch], out)?, arg))
    }

    pub fn backward(&self, input_shape: &[usize], argmax: &[usize], grad_out: &Tensor) -> Result<Tensor> {
        if grad_out.len() != argmax.len() {
            return Err(Error::Shape("maxpool1d gradient length mismatch".into()));
        }
        let mut gx = Tensor::zeros(input_shape.to_vec());
        let d = gx.data_mut();
        for (&i, &g) in argmax.iter().zip(grad_out.data()) {
            d[i] += g;
        }
        Ok(gx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_sum() {
        let conv = Conv1d::from_weights(1, 1, 2, 1, &[1.0, 1.0], &[0.0]).unwrap();
        let x = Tensor::matrix(3, 1, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(conv.forward(&x).unwrap().data(), [3.0, 5.0]);
    }

    #[test]
    fn identity_kernel_trims() {
        let conv = Conv1d::from_weights(1, 1, 3, 1, &[0.0, 1.0, 0.0], &[0.0]).unwrap();
        let x = Tensor::matrix(5, 1, vec![4.0, -1.0, 2.5, 7.0, 0.5]).unwrap();
        assert_eq!(conv.forward(&x).unwrap().data(), [-1.0, 2.5, 7.0]);
    }

    #[test]
    fn weight_layout_matches_convention() {
        // Two input channels, two outputs: check against a naive triple loop.
        let w: Vec<f64> = (0..12).map(|v| v as f64 * 0.1 - 0.5).collect();
        let conv = Conv1d::from_weights(2, 2, 3, 2, &w, &[0.25, -0.5]).unwrap();
        let x: Vec<f64> = (0..14).map(|v| (v as f64).sin()).collect();
        let input = Tensor::matrix(7, 2, x.clone()).unwrap();
        let out = conv.forward(&input).unwrap();
        assert_eq!(out.shape(), [3, 2]);
        for t in 0..3 {
            for o in 0..2 {
                let mut s = conv.bias()[o];
                for c in 0..2 {
                    for k in 0..3 {
                        s += w[(o * 2 + c) * 3 + k] * x[(t * 2 + k) * 2 + c];
                    }
                }
                assert!((out.data()[t * 2 + o] - s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn too_short() {
        let conv = Conv1d::new(1, 1, 3, 1).unwrap();
        let x = Tensor::matrix(2, 1, vec![1.0, 2.0]).unwrap();
        assert!(matches!(conv.forward(&x), Err(Error::Shape(_))));
        let pool = MaxPool1d::new(3, 3).unwrap();
        assert!(matches!(pool.forward(&x), Err(Error::Shape(_))));
    }

    #[test]
    fn pool_values_and_ties() {
        let pool = MaxPool1d::new(2, 2).unwrap();
        let x = Tensor::matrix(5, 1, vec![1.0, 3.0, 2.0, 5.0, 9.0]).unwrap();
        let (out, arg) = pool.forward(&x).unwrap();
        assert_eq!(out.data(), [3.0, 5.0]);
        assert_eq!(arg, [1, 3]);

        let flat = Tensor::matrix(2, 1, vec![4.0, 4.0]).unwrap();
        let (_, arg) = pool.forward(&flat).unwrap();
        let g = pool
            .backward(&[2, 1], &arg, &Tensor::matrix(1, 1, vec![1.0]).unwrap())
            .unwrap();
        assert_eq!(g.data(), [1.0, 0.0]);
    }

    #[test]
    fn glorot_bounds() {
        let mut conv = Conv1d::new(4, 8, 3, 1).unwrap();
        conv.init(&mut crate::rng::seeded(1));
        let a = (6.0f64 / (12.0 + 24.0)).sqrt();
        assert!(conv.weight.iter().all(|w| w.abs() <= a));
        assert!(conv.weight.iter().any(|&w| w != 0.0));
    }
}
