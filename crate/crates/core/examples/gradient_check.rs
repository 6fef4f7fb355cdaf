//! Finite-difference check of every layer's backward pass.
//!
//! cargo run --release --example gradient_check

use nids_core::nncore::gradcheck::{check_layer, check_softmax, check_softmax_cross_entropy};
use nids_core::nncore::{Conv1d, Dense, Layer, Lstm, LstmOutput, MaxPool1d, Tensor};
use nids_core::rng::seeded;
use rand::Rng;

fn main() -> nids_core::Result<()> {
    let mut rng = seeded(3);
    let mut random = |shape: Vec<usize>| {
        let n = shape.iter().product();
        Tensor::new(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
    };

    let mut conv = Conv1d::new(3, 4, 3, 1)?;
    let mut dense = Dense::new(6, 4)?;
    let mut lstm = Lstm::new(3, 5, LstmOutput::Last)?;
    let mut init = seeded(4);
    conv.init(&mut init);
    dense.init(&mut init);
    lstm.init(&mut init);

    let cases = [
        ("conv1d", Layer::Conv1d(conv), random(vec![10, 3])?),
        ("maxpool1d", Layer::MaxPool1d(MaxPool1d::new(2, 2)?), random(vec![10, 3])?),
        ("relu", Layer::Relu, random(vec![10, 3])?),
        ("dense", Layer::Dense(dense), random(vec![6])?),
        ("lstm", Layer::Lstm(lstm), random(vec![7, 3])?),
    ];
    for (name, layer, input) in &cases {
        let check = check_layer(layer, input, 1)?;
        println!("{name:<10} max relative error {:.2e} over {} coordinates", check.max_rel(), check.checked);
    }
    let logits = random(vec![4, 5])?;
    let mut targets = vec![0.0; 20];
    for b in 0..4 {
        targets[b * 5 + b] = 1.0;
    }
    let targets = Tensor::new(vec![4, 5], targets)?;
    println!("{:<10} max relative error {:.2e}", "softmax", check_softmax(&logits, 1)?.max_rel());
    println!("{:<10} max relative error {:.2e}", "softmax+ce", check_softmax_cross_entropy(&logits, &targets)?.max_rel());
    Ok(())
}
