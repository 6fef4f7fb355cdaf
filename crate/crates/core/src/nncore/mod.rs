//! A small f64 neural-network kernel. Each layer pairs an explicit forward
//! transform with its analytic backward pass. Parameters live in the layer;
//! forward activations are returned as a separate [`Cache`], so inference on
//! a finished network only needs `&self`.

mod activation;
mod adam;
mod conv;
mod dense;
pub mod gradcheck;
mod layer;
mod loss;
mod lstm;
mod tensor;

pub use activation::{relu, relu_backward, softmax, softmax_backward, Dropout};
pub use adam::{adam_step, AdamState};
pub use conv::{Conv1d, MaxPool1d};
pub use dense::Dense;
pub use layer::{Cache, Gradients, Layer, Sequential};
pub use loss::{cross_entropy, LOG_EPSILON};
pub use lstm::{Lstm, LstmOutput};
pub use tensor::Tensor;

/// Whether stochastic layers are active.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

/// Glorot/Xavier uniform bound.
pub(crate) fn glorot(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four accumulators let the compiler keep independent FMA chains.
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for i in 0..chunks {
        let j = 4 * i;
        acc[0] += a[j] * b[j];
        acc[1] += a[j + 1] * b[j + 1];
        acc[2] += a[j + 2] * b[j + 2];
        acc[3] += a[j + 3] * b[j + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for j in 4 * chunks..n {
        s += a[j] * b[j];
    }
    s
}

/// `y += alpha * x`
#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
