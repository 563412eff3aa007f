//! Adam with bias correction, operating on the flat parameter vector.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

use super::ModelParams;

/// First/second moment accumulators plus hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimState {
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl OptimState {
    /// Fresh state with the usual defaults (β1 = 0.9, β2 = 0.999, ε = 1e-8).
    pub fn new(param_len: usize, lr: f64) -> Self {
        OptimState {
            m: vec![0.0; param_len],
            v: vec![0.0; param_len],
            step: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// One Adam update. Rejects non-finite gradients before touching anything
/// and verifies the parameters stayed finite afterwards.
pub fn adam_step(params: &mut ModelParams, grad: &[f64], st: &mut OptimState) -> Result<()> {
    let theta = params.theta_mut();
    if grad.len() != theta.len() || st.m.len() != theta.len() {
        return Err(Error::BadLength {
            expected: theta.len(),
            got: grad.len(),
        });
    }
    if let Some((index, &value)) = grad.iter().enumerate().find(|(_, g)| !g.is_finite()) {
        return Err(Error::GradientNotFinite { index, value });
    }
    st.step += 1;
    let t = st.step as i32;
    let bc1 = 1.0 - libm::pow(st.beta1, t as f64);
    let bc2 = 1.0 - libm::pow(st.beta2, t as f64);
    for i in 0..theta.len() {
        let g = grad[i];
        st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * g;
        st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * g * g;
        let m_hat = st.m[i] / bc1;
        let v_hat = st.v[i] / bc2;
        theta[i] -= st.lr * m_hat / (libm::sqrt(v_hat) + st.eps);
    }
    if let Some((index, &value)) = theta.iter().enumerate().find(|(_, p)| !p.is_finite()) {
        return Err(Error::GradientNotFinite { index, value });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{Arch, ClassifierKind};

    fn scalar_model() -> ModelParams {
        // 1×1 logistic with 2 classes: 2 weights + 2 biases; only coordinate 0
        // is exercised below.
        let arch = Arch::new(ClassifierKind::Logistic, 1, 1, 1, 2).unwrap();
        ModelParams::from_theta(arch, alloc::vec![0.0; 4]).unwrap()
    }

    #[test]
    fn first_step_moves_by_almost_exactly_lr() {
        let mut m = scalar_model();
        let mut st = OptimState::new(4, 1e-3);
        adam_step(&mut m, &[1.0, 0.0, 0.0, 0.0], &mut st).unwrap();
        // bias-corrected m̂ = v̂ = 1 → delta = −lr/(1+ε)
        let want = -1e-3 / (1.0 + 1e-8);
        assert!((m.theta()[0] - want).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_keeps_parameters_and_advances_step() {
        let mut m = scalar_model();
        let before = m.theta().to_vec();
        let mut st = OptimState::new(4, 1e-3);
        adam_step(&mut m, &[0.0; 4], &mut st).unwrap();
        assert_eq!(m.theta(), &before[..]);
        assert_eq!(st.step(), 1);
    }

    #[test]
    fn matches_scalar_reference_recurrence() {
        // Independent reference: the Adam recurrence written out directly.
        let (lr, b1, b2, eps) = (1e-3, 0.9, 0.999, 1e-8);
        let grads = [1.0, -1.0, 1.0];
        let mut theta_ref = 0.0f64;
        let (mut m_acc, mut v_acc) = (0.0f64, 0.0f64);
        for (t, &g) in grads.iter().enumerate() {
            let t = (t + 1) as i32;
            m_acc = b1 * m_acc + (1.0 - b1) * g;
            v_acc = b2 * v_acc + (1.0 - b2) * g * g;
            let m_hat = m_acc / (1.0 - b1.powi(t));
            let v_hat = v_acc / (1.0 - b2.powi(t));
            theta_ref -= lr * m_hat / (v_hat.sqrt() + eps);
        }

        let mut model = scalar_model();
        let mut st = OptimState::new(4, lr);
        for &g in &grads {
            adam_step(&mut model, &[g, 0.0, 0.0, 0.0], &mut st).unwrap();
        }
        assert!((model.theta()[0] - theta_ref).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_finite_gradients() {
        let mut m = scalar_model();
        let mut st = OptimState::new(4, 1e-3);
        let err = adam_step(&mut m, &[f64::NAN, 0.0, 0.0, 0.0], &mut st).unwrap_err();
        assert!(matches!(err, Error::GradientNotFinite { index: 0, .. }));
        // Nothing moved, including the step counter.
        assert_eq!(st.step(), 0);
        assert!(m.theta().iter().all(|&p| p == 0.0));
    }
}
