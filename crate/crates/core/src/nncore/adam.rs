use crate::error::{Error, Result};

/// Adam moments and hyper-parameters; `m` and `v` mirror the parameter
/// arrays they update.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub t: u64,
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl AdamState {
    /// Defaults β1 = 0.9, β2 = 0.999, ε = 1e-8.
    pub fn new(lr: f64, sizes: &[usize]) -> Self {
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            t: 0,
            m: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }
}

/// One bias-corrected Adam update over parallel parameter and gradient arrays.
pub fn adam_step(state: &mut AdamState, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<()> {
    if params.len() != state.m.len() || grads.len() != state.m.len() {
        return Err(Error::Shape(format!(
            "adam tracks {} arrays, got {} params and {} grads",
            state.m.len(),
            params.len(),
            grads.len()
        )));
    }
    for ((p, g), m) in params.iter().zip(grads).zip(&state.m) {
        if p.len() != m.len() || g.len() != m.len() {
            return Err(Error::Shape("adam array length mismatch".into()));
        }
    }
    state.t += 1;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = 1.0 - b1.powi(state.t as i32);
    let c2 = 1.0 - b2.powi(state.t as i32);
    for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut state.m).zip(&mut state.v) {
        for j in 0..p.len() {
            let gj = g[j];
            m[j] = b1 * m[j] + (1.0 - b1) * gj;
            v[j] = b2 * v[j] + (1.0 - b2) * gj * gj;
            let m_hat = m[j] / c1;
            let v_hat = v[j] / c2;
            p[j] -= state.lr * m_hat / (v_hat.sqrt() + state.epsilon);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_noop() {
        let mut s = AdamState::new(0.001, &[3]);
        let mut p = [1.0, -2.0, 0.5];
        adam_step(&mut s, &mut [&mut p[..]], &[&[0.0; 3][..]]).unwrap();
        assert_eq!(p, [1.0, -2.0, 0.5]);
    }

    #[test]
    fn first_step_is_signed_lr() {
        let mut s = AdamState::new(0.001, &[2]);
        let mut p = [0.0, 0.0];
        adam_step(&mut s, &mut [&mut p[..]], &[&[3.0, -0.5][..]]).unwrap();
        assert!((p[0] + 0.001).abs() < 1e-10);
        assert!((p[1] - 0.001).abs() < 1e-10);
    }

    #[test]
    fn quadratic_descends() {
        let mut s = AdamState::new(0.1, &[1]);
        let mut theta = [1.0];
        let mut last = 1.0;
        for _ in 0..3 {
            let g = [2.0 * theta[0]];
            adam_step(&mut s, &mut [&mut theta[..]], &[&g[..]]).unwrap();
            assert!(theta[0].abs() < last);
            last = theta[0].abs();
        }
    }

    #[test]
    fn shape_mismatch() {
        let mut s = AdamState::new(0.1, &[2]);
        let mut p = [0.0];
        assert!(matches!(adam_step(&mut s, &mut [&mut p[..]], &[&[1.0][..]]), Err(Error::Shape(_))));
    }
}
