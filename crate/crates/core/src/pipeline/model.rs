use std::fmt;

use super::ModelConfig;
use crate::error::{Error, Result};
use crate::nncore::{Conv1d, Dense, Dropout, Layer, Lstm, LstmOutput, MaxPool1d, Sequential};
use crate::rng::{derive_seed, seeded};

pub(crate) const INIT_STREAM: u64 = 0x1417;

/// `[conv → relu → pool]` blocks with trailing dropouts, stacked LSTMs (all
/// but the last return the sequence) and a dense head producing logits.
/// The conv stack's `[time, channels]` output is read by the first LSTM as a
/// sequence of `time` vectors. Weights are zero.
pub fn assemble_cnn_lstm(config: &ModelConfig, n_features: usize, n_classes: usize) -> Result<Sequential> {
    config.validate()?;
    if n_features == 0 || n_classes == 0 {
        return Err(Error::Config(format!(
            "model needs features and classes, got {n_features} and {n_classes}"
        )));
    }
    let mut layers = Vec::new();
    let (mut time, mut channels) = (n_features, 1);
    for (i, block) in config.conv.iter().enumerate() {
        let name = i + 1;
        if time < block.kernel {
            return Err(Error::Config(format!(
                "conv block {name}: input length {time} is shorter than kernel {}",
                block.kernel
            )));
        }
        let conv = Conv1d::new(channels, block.filters, block.kernel, 1)?;
        time = conv.output_len(time)?;
        if time < block.pool {
            return Err(Error::Config(format!(
                "conv block {name}: length {time} after convolution is shorter than pool {}",
                block.pool
            )));
        }
        let pool = MaxPool1d::new(block.pool, block.pool)?;
        time = pool.output_len(time)?;
        channels = block.filters;
        layers.push(Layer::Conv1d(conv));
        layers.push(Layer::Relu);
        layers.push(Layer::MaxPool1d(pool));
        if let Some(rate) = config.dropout_after(i) {
            layers.push(Layer::Dropout(Dropout::new(rate)?));
        }
    }
    let mut width = channels;
    for (i, &hidden) in config.lstm.iter().enumerate() {
        let output = if i + 1 == config.lstm.len() {
            LstmOutput::Last
        } else {
            LstmOutput::Sequence
        };
        layers.push(Layer::Lstm(Lstm::new(width, hidden, output)?));
        width = hidden;
    }
    layers.push(Layer::Dense(Dense::new(width, n_classes)?));
    Ok(Sequential::new(layers))
}

/// [`assemble_cnn_lstm`] with weights initialised from the config seed.
pub fn build_cnn_lstm(config: &ModelConfig, n_features: usize, n_classes: usize) -> Result<Sequential> {
    let mut net = assemble_cnn_lstm(config, n_features, n_classes)?;
    let mut rng = seeded(derive_seed(config.seed, INIT_STREAM));
    for layer in &mut net.layers {
        match layer {
            Layer::Conv1d(l) => l.init(&mut rng),
            Layer::Lstm(l) => l.init(&mut rng),
            Layer::Dense(l) => l.init(&mut rng),
            _ => {}
        }
    }
    Ok(net)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerSummary {
    pub name: String,
    pub output_shape: Vec<usize>,
    pub params: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelSummary {
    pub input_shape: Vec<usize>,
    pub layers: Vec<LayerSummary>,
}

impl ModelSummary {
    pub fn total_params(&self) -> usize {
        self.layers.iter().map(|l| l.params).sum()
    }
}

/// Shapes and parameter counts of a network fed `[n_features, 1]` inputs.
pub fn summarize(net: &Sequential, n_features: usize) -> Result<ModelSummary> {
    let input_shape = vec![n_features, 1];
    let mut shape = input_shape.clone();
    let mut layers = Vec::with_capacity(net.layers.len());
    for layer in &net.layers {
        shape = layer.output_shape(&shape)?;
        let name = match layer {
            Layer::Dense(_) => "dense+softmax".to_string(),
            Layer::Dropout(d) => format!("dropout({})", d.rate),
            Layer::Lstm(l) if l.output == LstmOutput::Sequence => "lstm(sequence)".to_string(),
            Layer::Lstm(_) => "lstm(last)".to_string(),
            other => other.name().to_string(),
        };
        layers.push(LayerSummary {
            name,
            output_shape: shape.clone(),
            params: layer.param_count(),
        });
    }
    Ok(ModelSummary { input_shape, layers })
}

fn shape_text(shape: &[usize]) -> String {
    let parts: Vec<String> = shape.iter().map(|d| d.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

impl fmt::Display for ModelSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<4}{:<18}{:<14}{:>10}", "#", "layer", "output", "params")?;
        writeln!(f, "{:<4}{:<18}{:<14}{:>10}", 0, "input", shape_text(&self.input_shape), 0)?;
        for (i, l) in self.layers.iter().enumerate() {
            writeln!(f, "{:<4}{:<18}{:<14}{:>10}", i + 1, l.name, shape_text(&l.output_shape), l.params)?;
        }
        writeln!(f, "total parameters: {}", self.total_params())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Closed-form counts: conv `f_out·(k·f_in + 1)`, LSTM `4h(d + h + 1)`,
    /// dense `c(h + 1)`.
    #[test]
    fn default_shapes_and_parameter_count() {
        let cfg = ModelConfig::default();
        let net = build_cnn_lstm(&cfg, 30, 7).unwrap();
        let s = summarize(&net, 30).unwrap();
        let times: Vec<usize> = s
            .layers
            .iter()
            .filter(|l| l.name == "conv1d" || l.name == "maxpool1d")
            .map(|l| l.output_shape[0])
            .collect();
        assert_eq!(times, [28, 14, 12, 6, 4, 2]);
        let conv = |fi: usize, fo: usize| fo * (3 * fi + 1);
        let lstm = |d: usize, h: usize| 4 * h * (d + h + 1);
        let expected = conv(1, 32) + conv(32, 64) + conv(64, 64) + lstm(64, 64) + lstm(64, 32) + 7 * 33;
        assert_eq!(expected, 64_359);
        assert_eq!(s.total_params(), expected);
        assert_eq!(net.param_count(), expected);
        assert_eq!(s.layers.last().unwrap().output_shape, [7]);
        assert_eq!(s.to_string(), summarize(&build_cnn_lstm(&cfg, 30, 7).unwrap(), 30).unwrap().to_string());
    }

    #[test]
    fn too_few_features_names_block() {
        match build_cnn_lstm(&ModelConfig::default(), 2, 2) {
            Err(Error::Config(m)) => assert!(m.contains("conv block 1"), "{m}"),
            other => panic!("{other:?}"),
        }
        match build_cnn_lstm(&ModelConfig::default(), 12, 2) {
            Err(Error::Config(m)) => assert!(m.contains("conv block 3"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn seeded_init_is_deterministic() {
        let mut cfg = ModelConfig::default();
        let a = build_cnn_lstm(&cfg, 30, 3).unwrap();
        assert_eq!(a, build_cnn_lstm(&cfg, 30, 3).unwrap());
        cfg.seed = 1;
        assert_ne!(a, build_cnn_lstm(&cfg, 30, 3).unwrap());
    }
}
