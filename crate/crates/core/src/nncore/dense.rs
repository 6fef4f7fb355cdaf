use rand::Rng as _;

use super::{axpy, dot, glorot, Tensor};
use crate::error::{Error, Result};
use crate::rng::Rng;

/// Fully connected `W·x + b`; any input tensor is read as a flat vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    /// `[out][in]`
    pub(crate) weight: Vec<f64>,
    pub(crate) bias: Vec<f64>,
}

impl Dense {
    pub fn new(inputs: usize, outputs: usize) -> Result<Self> {
        if inputs == 0 || outputs == 0 {
            return Err(Error::Shape(format!("dense needs positive sizes, got {inputs}x{outputs}")));
        }
        Ok(Dense {
            inputs,
            outputs,
            weight: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        })
    }

    pub fn from_weights(inputs: usize, outputs: usize, weight: &[f64], bias: &[f64]) -> Result<Self> {
        let mut d = Self::new(inputs, outputs)?;
        if weight.len() != d.weight.len() || bias.len() != outputs {
            return Err(Error::Shape("dense weight or bias length mismatch".into()));
        }
        d.weight.copy_from_slice(weight);
        d.bias.copy_from_slice(bias);
        Ok(d)
    }

    pub fn init(&mut self, rng: &mut Rng) {
        let a = glorot(self.inputs, self.outputs);
        for w in &mut self.weight {
            *w = rng.random_range(-a..=a);
        }
        self.bias.fill(0.0);
    }

    pub fn param_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    fn check(&self, input: &Tensor) -> Result<()> {
        if input.len() != self.inputs {
            return Err(Error::Shape(format!(
                "dense expects {} inputs, got shape {:?}",
                self.inputs,
                input.shape()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, input: &Tensor) -> Result<Tensor> {
        self.check(input)?;
        let x = input.data();
        let out = (0..self.outputs)
            .map(|o| self.bias[o] + dot(&self.weight[o * self.inputs..(o + 1) * self.inputs], x))
            .collect();
        Ok(Tensor::vector(out))
    }

    /// Accumulates into `gw`/`gb`; the input gradient keeps the input's shape.
    pub fn backward(&self, input: &Tensor, grad_out: &Tensor, gw: &mut [f64], gb: &mut [f64]) -> Result<Tensor> {
        self.check(input)?;
        if grad_out.len() != self.outputs {
            return Err(Error::Shape("dense gradient length mismatch".into()));
        }
        let x = input.data();
        let mut gx = vec![0.0; self.inputs];
        for (o, &g) in grad_out.data().iter().enumerate() {
            gb[o] += g;
            let row = o * self.inputs..(o + 1) * self.inputs;
            axpy(g, x, &mut gw[row.clone()]);
            axpy(g, &self.weight[row], &mut gx);
        }
        Tensor::new(input.shape().to_vec(), gx)
    }
}
