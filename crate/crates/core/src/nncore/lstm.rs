use rand::Rng as _;

use super::{axpy, dot, Tensor};
use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LstmOutput {
    /// Every hidden state, `[time, hidden]`.
    Sequence,
    /// Final hidden state, `[hidden]`.
    Last,
}

/// Single LSTM layer with gates in the order input, forget, candidate, output.
///
/// Gate pre-activations are `W·[x_t; h_{t-1}] + b` with `W` stored as
/// `[4·hidden][inputs + hidden]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lstm {
    pub inputs: usize,
    pub hidden: usize,
    pub output: LstmOutput,
    pub(crate) weight: Vec<f64>,
    pub(crate) bias: Vec<f64>,
}

/// Per-step activations kept for backpropagation through time.
#[derive(Clone, Debug)]
pub struct LstmCache {
    time: usize,
    /// `[time][inputs + hidden]`
    xh: Vec<f64>,
    /// Activated gates, `[time][4·hidden]`.
    gates: Vec<f64>,
    /// Cell states, `[time][hidden]`.
    cells: Vec<f64>,
    /// `tanh(c_t)`, `[time][hidden]`.
    tanh_c: Vec<f64>,
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl Lstm {
    /// Zero-initialised layer.
    pub fn new(inputs: usize, hidden: usize, output: LstmOutput) -> Result<Self> {
        if inputs == 0 || hidden == 0 {
            return Err(Error::Shape(format!("lstm needs positive sizes, got {inputs}->{hidden}")));
        }
        Ok(Lstm {
            inputs,
            hidden,
            output,
            weight: vec![0.0; 4 * hidden * (inputs + hidden)],
            bias: vec![0.0; 4 * hidden],
        })
    }

    /// Uniform `±1/sqrt(hidden)` matrices, forget-gate bias 1, other biases 0.
    pub fn init(&mut self, rng: &mut Rng) {
        let a = 1.0 / (self.hidden as f64).sqrt();
        for w in &mut self.weight {
            *w = rng.random_range(-a..=a);
        }
        self.bias.fill(0.0);
        self.bias[self.hidden..2 * self.hidden].fill(1.0);
    }

    /// `weight` is `[4·hidden][inputs + hidden]` in gate order i, f, g, o.
    pub fn from_weights(inputs: usize, hidden: usize, output: LstmOutput, weight: &[f64], bias: &[f64]) -> Result<Self> {
        let mut l = Self::new(inputs, hidden, output)?;
        if weight.len() != l.weight.len() || bias.len() != l.bias.len() {
            return Err(Error::Shape("lstm weight or bias length mismatch".into()));
        }
        l.weight.copy_from_slice(weight);
        l.bias.copy_from_slice(bias);
        Ok(l)
    }

    pub fn param_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    fn check(&self, input: &Tensor) -> Result<usize> {
        let (time, d) = input.dims2()?;
        if time == 0 {
            return Err(Error::Shape("lstm input has an empty time axis".into()));
        }
        if d != self.inputs {
            return Err(Error::Shape(format!("lstm expects {} features, got {d}", self.inputs)));
        }
        Ok(time)
    }

    pub fn forward(&self, input: &Tensor) -> Result<(Tensor, LstmCache)> {
        let time = self.check(input)?;
        let (d, h) = (self.inputs, self.hidden);
        let w = d + h;
        let x = input.data();
        let mut cache = LstmCache {
            time,
            xh: Vec::with_capacity(time * w),
            gates: Vec::with_capacity(time * 4 * h),
            cells: Vec::with_capacity(time * h),
            tanh_c: Vec::with_capacity(time * h),
        };
        let mut h_prev = vec![0.0; h];
        let mut c_prev = vec![0.0; h];
        let mut seq = Vec::with_capacity(time * h);
        let mut z = vec![0.0; 4 * h];
        for t in 0..time {
            let base = cache.xh.len();
            cache.xh.extend_from_slice(&x[t * d..(t + 1) * d]);
            cache.xh.extend_from_slice(&h_prev);
            let xh = &cache.xh[base..base + w];
            for (r, zr) in z.iter_mut().enumerate() {
                *zr = self.bias[r] + dot(&self.weight[r * w..(r + 1) * w], xh);
            }
            for j in 0..h {
                let i = sigmoid(z[j]);
                let f = sigmoid(z[h + j]);
                let g = z[2 * h + j].tanh();
                let o = sigmoid(z[3 * h + j]);
                let c = f * c_prev[j] + i * g;
                let tc = c.tanh();
                z[j] = i;
                z[h + j] = f;
                z[2 * h + j] = g;
                z[3 * h + j] = o;
                c_prev[j] = c;
                h_prev[j] = o * tc;
                cache.tanh_c.push(tc);
            }
            cache.gates.extend_from_slice(&z);
            cache.cells.extend_from_slice(&c_prev);
            seq.extend_from_slice(&h_prev);
        }
        let out = match self.output {
            LstmOutput::Sequence => Tensor::new(vec![time, h], seq)?,
            LstmOutput::Last => Tensor::vector(h_prev),
        };
        Ok((out, cache))
    }

    /// Backpropagation through time; accumulates into `gw`/`gb`.
    pub fn backward(&self, cache: &LstmCache, grad_out: &Tensor, gw: &mut [f64], gb: &mut [f64]) -> Result<Tensor> {
        let (d, h, time) = (self.inputs, self.hidden, cache.time);
        let w = d + h;
        let expected = match self.output {
            LstmOutput::Sequence => time * h,
            LstmOutput::Last => h,
        };
        if grad_out.len() != expected {
            return Err(Error::Shape("lstm gradient length mismatch".into()));
        }
        let go = grad_out.data();
        let mut gx = vec![0.0; time * d];
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        let mut dz = vec![0.0; 4 * h];
        let mut dxh = vec![0.0; w];
        for t in (0..time).rev() {
            let gates = &cache.gates[t * 4 * h..(t + 1) * 4 * h];
            let tanh_c = &cache.tanh_c[t * h..(t + 1) * h];
            for j in 0..h {
                let mut dh = dh_next[j];
                match self.output {
                    LstmOutput::Sequence => dh += go[t * h + j],
                    LstmOutput::Last if t + 1 == time => dh += go[j],
                    LstmOutput::Last => {}
                }
                let (i, f, g, o) = (gates[j], gates[h + j], gates[2 * h + j], gates[3 * h + j]);
                let tc = tanh_c[j];
                let c_prev = if t > 0 { cache.cells[(t - 1) * h + j] } else { 0.0 };
                let dc = dh * o * (1.0 - tc * tc) + dc_next[j];
                dz[j] = dc * g * i * (1.0 - i);
                dz[h + j] = dc * c_prev * f * (1.0 - f);
                dz[2 * h + j] = dc * i * (1.0 - g * g);
                dz[3 * h + j] = dh * tc * o * (1.0 - o);
                dc_next[j] = dc * f;
            }
            let xh = &cache.xh[t * w..(t + 1) * w];
            dxh.fill(0.0);
            for (r, &dzr) in dz.iter().enumerate() {
                if dzr == 0.0 {
                    continue;
                }
                gb[r] += dzr;
                axpy(dzr, xh, &mut gw[r * w..(r + 1) * w]);
                axpy(dzr, &self.weight[r * w..(r + 1) * w], &mut dxh);
            }
            gx[t * d..(t + 1) * d].copy_from_slice(&dxh[..d]);
            dh_next.copy_from_slice(&dxh[d..]);
        }
        Tensor::new(vec![time, d], gx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn zero_parameters_give_zero_output() {
        let l = Lstm::new(3, 4, LstmOutput::Sequence).unwrap();
        let x = Tensor::matrix(5, 3, (0..15).map(|v| v as f64 - 7.0).collect()).unwrap();
        let (out, _) = l.forward(&x).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scalar_step_reference() {
        // H=1, D=1: rows are [w_x, w_h] for i, f, g, o.
        let w = [0.5, 0.1, -0.3, 0.2, 0.8, -0.4, 1.2, 0.3];
        let b = [0.1, 1.0, -0.2, 0.05];
        let l = Lstm::from_weights(1, 1, LstmOutput::Last, &w, &b).unwrap();
        let x = 0.7;
        let (out, _) = l.forward(&Tensor::matrix(1, 1, vec![x]).unwrap()).unwrap();

        let s = |v: f64| 1.0 / (1.0 + (-v).exp());
        let i = s(w[0] * x + b[0]);
        let f = s(w[2] * x + b[1]);
        let g = (w[4] * x + b[2]).tanh();
        let o = s(w[6] * x + b[3]);
        let c = f * 0.0 + i * g;
        let h = o * c.tanh();
        assert!((out.data()[0] - h).abs() < 1e-15);
    }

    #[test]
    fn init_biases() {
        let mut l = Lstm::new(2, 3, LstmOutput::Last).unwrap();
        l.init(&mut seeded(4));
        assert_eq!(l.bias, [0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let a = 1.0 / 3f64.sqrt();
        assert!(l.weight.iter().all(|w| w.abs() <= a));
    }

    #[test]
    fn empty_time_axis() {
        let l = Lstm::new(2, 3, LstmOutput::Last).unwrap();
        let x = Tensor::new(vec![0, 2], vec![]).unwrap();
        assert!(matches!(l.forward(&x), Err(Error::Shape(_))));
    }
}
