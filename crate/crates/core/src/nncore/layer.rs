use super::lstm::LstmCache;
use super::{relu, relu_backward, softmax, adam_step, AdamState, Conv1d, Dense, Dropout, Lstm, LstmOutput, MaxPool1d, Mode, Tensor};
use crate::error::{Error, Result};
use crate::rng::{seeded, Rng};

#[derive(Clone, Debug, PartialEq)]
pub enum Layer {
    Conv1d(Conv1d),
    MaxPool1d(MaxPool1d),
    Relu,
    Dropout(Dropout),
    Lstm(Lstm),
    Dense(Dense),
}

/// Forward state needed by the matching backward call.
#[derive(Clone, Debug)]
pub enum Cache {
    Input(Tensor),
    Pool { shape: Vec<usize>, argmax: Vec<usize> },
    Dropout(Option<Vec<f64>>),
    Lstm(LstmCache),
}

impl Layer {
    pub fn name(&self) -> &'static str {
        match self {
            Layer::Conv1d(_) => "conv1d",
            Layer::MaxPool1d(_) => "maxpool1d",
            Layer::Relu => "relu",
            Layer::Dropout(_) => "dropout",
            Layer::Lstm(_) => "lstm",
            Layer::Dense(_) => "dense",
        }
    }

    /// Output shape for a given input shape, without running the layer.
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        let two = || match input {
            [t, c] => Ok((*t, *c)),
            _ => Err(Error::Shape(format!("{} expects [time, channels], got {input:?}", self.name()))),
        };
        Ok(match self {
            Layer::Conv1d(l) => {
                let (t, c) = two()?;
                if c != l.in_channels {
                    return Err(Error::Shape(format!("conv1d expects {} channels, got {c}", l.in_channels)));
                }
                vec![l.output_len(t)?, l.out_channels]
            }
            Layer::MaxPool1d(p) => {
                let (t, c) = two()?;
                vec![p.output_len(t)?, c]
            }
            Layer::Relu | Layer::Dropout(_) => input.to_vec(),
            Layer::Lstm(l) => {
                let (t, c) = two()?;
                if t == 0 || c != l.inputs {
                    return Err(Error::Shape(format!("lstm expects [time>=1, {}], got {input:?}", l.inputs)));
                }
                match l.output {
                    LstmOutput::Sequence => vec![t, l.hidden],
                    LstmOutput::Last => vec![l.hidden],
                }
            }
            Layer::Dense(d) => {
                if input.iter().product::<usize>() != d.inputs {
                    return Err(Error::Shape(format!("dense expects {} inputs, got {input:?}", d.inputs)));
                }
                vec![d.outputs]
            }
        })
    }

    pub fn forward(&self, input: &Tensor, mode: Mode, rng: &mut Rng) -> Result<(Tensor, Cache)> {
        Ok(match self {
            Layer::Conv1d(l) => (l.forward(input)?, Cache::Input(input.clone())),
            Layer::MaxPool1d(p) => {
                let (out, argmax) = p.forward(input)?;
                (
                    out,
                    Cache::Pool {
                        shape: input.shape().to_vec(),
                        argmax,
                    },
                )
            }
            Layer::Relu => (relu(input), Cache::Input(input.clone())),
            Layer::Dropout(d) => {
                let (out, mask) = d.forward(input, mode, rng);
                (out, Cache::Dropout(mask))
            }
            Layer::Lstm(l) => {
                let (out, cache) = l.forward(input)?;
                (out, Cache::Lstm(cache))
            }
            Layer::Dense(d) => (d.forward(input)?, Cache::Input(input.clone())),
        })
    }

    /// Input gradient; parameter gradients are added into `grads`, whose
    /// slots follow [`Layer::params`].
    pub fn backward(&self, cache: &Cache, grad_out: &Tensor, grads: &mut [Vec<f64>]) -> Result<Tensor> {
        let mismatch = || Error::Shape(format!("{} received a foreign cache", self.name()));
        match (self, cache) {
            (Layer::Conv1d(l), Cache::Input(x)) => {
                let (gw, gb) = split_two(grads);
                l.backward(x, grad_out, gw, gb)
            }
            (Layer::Dense(d), Cache::Input(x)) => {
                let (gw, gb) = split_two(grads);
                d.backward(x, grad_out, gw, gb)
            }
            (Layer::Lstm(l), Cache::Lstm(c)) => {
                let (gw, gb) = split_two(grads);
                l.backward(c, grad_out, gw, gb)
            }
            (Layer::MaxPool1d(p), Cache::Pool { shape, argmax }) => p.backward(shape, argmax, grad_out),
            (Layer::Relu, Cache::Input(x)) => relu_backward(x, grad_out),
            (Layer::Dropout(d), Cache::Dropout(mask)) => Ok(d.backward(mask.as_deref(), grad_out)),
            _ => Err(mismatch()),
        }
    }

    /// Weight then bias for parametrised layers; empty otherwise.
    pub fn params(&self) -> Vec<&[f64]> {
        match self {
            Layer::Conv1d(l) => vec![&l.weight, &l.bias],
            Layer::Lstm(l) => vec![&l.weight, &l.bias],
            Layer::Dense(d) => vec![&d.weight, &d.bias],
            _ => vec![],
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            Layer::Conv1d(l) => vec![&mut l.weight, &mut l.bias],
            Layer::Lstm(l) => vec![&mut l.weight, &mut l.bias],
            Layer::Dense(d) => vec![&mut d.weight, &mut d.bias],
            _ => vec![],
        }
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }
}

fn split_two(grads: &mut [Vec<f64>]) -> (&mut [f64], &mut [f64]) {
    let (a, b) = grads.split_at_mut(1);
    (&mut a[0], &mut b[0])
}

/// Parameter gradients shaped like a network's parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Vec<Vec<f64>>>,
}

impl Gradients {
    pub fn zero(&mut self) {
        for v in self.layers.iter_mut().flatten() {
            v.fill(0.0);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for v in self.layers.iter_mut().flatten().flatten() {
            *v *= factor;
        }
    }

    pub fn slices(&self) -> Vec<&[f64]> {
        self.layers.iter().flatten().map(|v| v.as_slice()).collect()
    }
}

/// Layers applied in order.
#[derive(Clone, Debug, PartialEq)]
pub struct Sequential {
    pub layers: Vec<Layer>,
}

impl Sequential {
    pub fn new(layers: Vec<Layer>) -> Self {
        Sequential { layers }
    }

    pub fn forward(&self, input: &Tensor, mode: Mode, rng: &mut Rng) -> Result<(Tensor, Vec<Cache>)> {
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut x = input.clone();
        for layer in &self.layers {
            let (y, cache) = layer.forward(&x, mode, rng)?;
            caches.push(cache);
            x = y;
        }
        Ok((x, caches))
    }

    /// Inference-mode logits.
    pub fn infer(&self, input: &Tensor) -> Result<Tensor> {
        // Dropout ignores the generator in inference mode.
        let mut rng = seeded(0);
        let mut x = input.clone();
        for layer in &self.layers {
            x = layer.forward(&x, Mode::Infer, &mut rng)?.0;
        }
        Ok(x)
    }

    /// Softmax of the inference logits.
    pub fn predict_proba(&self, input: &Tensor) -> Result<Tensor> {
        Ok(softmax(&self.infer(input)?))
    }

    pub fn backward(&self, caches: &[Cache], grad_out: &Tensor, grads: &mut Gradients) -> Result<Tensor> {
        if caches.len() != self.layers.len() || grads.layers.len() != self.layers.len() {
            return Err(Error::Shape("cache or gradient count differs from layer count".into()));
        }
        let mut g = grad_out.clone();
        for ((layer, cache), slots) in self.layers.iter().zip(caches).zip(&mut grads.layers).rev() {
            g = layer.backward(cache, &g, slots)?;
        }
        Ok(g)
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            layers: self
                .layers
                .iter()
                .map(|l| l.params().iter().map(|p| vec![0.0; p.len()]).collect())
                .collect(),
        }
    }

    pub fn param_sizes(&self) -> Vec<usize> {
        self.layers.iter().flat_map(|l| l.params()).map(|p| p.len()).collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    pub fn adam_state(&self, lr: f64) -> AdamState {
        AdamState::new(lr, &self.param_sizes())
    }

    pub fn apply_adam(&mut self, state: &mut AdamState, grads: &Gradients) -> Result<()> {
        let mut params: Vec<&mut [f64]> = self.layers.iter_mut().flat_map(|l| l.params_mut()).collect();
        adam_step(state, &mut params, &grads.slices())
    }

    /// Every parameter in layer order, weights before biases.
    pub fn flat_params(&self) -> Vec<f64> {
        self.layers.iter().flat_map(|l| l.params()).flatten().copied().collect()
    }

    /// Inverse of [`Sequential::flat_params`].
    pub fn set_flat_params(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.param_count() {
            return Err(Error::Shape(format!(
                "network has {} parameters, got {}",
                self.param_count(),
                values.len()
            )));
        }
        let mut at = 0;
        for p in self.layers.iter_mut().flat_map(|l| l.params_mut()) {
            p.copy_from_slice(&values[at..at + p.len()]);
            at += p.len();
        }
        Ok(())
    }
}
