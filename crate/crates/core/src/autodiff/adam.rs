use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    /// Adam with β₁ = 0.5, β₂ = 0.999, the usual GAN setting.
    pub fn gan(lr: f64) -> Self {
        AdamConfig {
            lr,
            beta1: 0.5,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |b: f64| b > 0.0 && b < 1.0;
        if !(self.lr >= 0.0 && self.lr.is_finite()) || !unit(self.beta1) || !unit(self.beta2) || !(self.eps > 0.0) {
            return Err(Error::Config(format!("invalid Adam settings {self:?}")));
        }
        Ok(())
    }
}

/// Moment accumulators for one group of parameter tensors.
#[derive(Clone, Debug)]
pub struct AdamState {
    pub config: AdamConfig,
    step: u64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(config: AdamConfig, params: &[&Tensor]) -> Self {
        AdamState {
            config,
            step: 0,
            first: params.iter().map(|p| vec![0.0; p.numel()]).collect(),
            second: params.iter().map(|p| vec![0.0; p.numel()]).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self, k: usize) -> &[f64] {
        &self.first[k]
    }

    pub fn second_moment(&self, k: usize) -> &[f64] {
        &self.second[k]
    }

    /// One bias-corrected Adam update using each tensor's `grad` slot.
    ///
    /// Gradients are checked before anything is written, so a failed step
    /// leaves both the parameters and the state untouched.
    pub fn step(&mut self, params: &mut [&mut Tensor]) -> Result<()> {
        if params.len() != self.first.len() {
            return Err(Error::shape(
                "adam_step",
                format!("{} tensors for {} accumulators", params.len(), self.first.len()),
            ));
        }
        for (k, p) in params.iter().enumerate() {
            let g = p.grad.as_ref().ok_or(Error::MissingGradient(k))?;
            if g.len() != self.first[k].len() || p.numel() != self.first[k].len() {
                return Err(Error::shape("adam_step", format!("parameter {k} changed size")));
            }
            if let Some(i) = g.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "gradient of parameter {k} at index {i} (value {})",
                    g[i]
                )));
            }
        }

        self.step += 1;
        let AdamConfig { lr, beta1, beta2, eps } = self.config;
        let bc1 = 1.0 - beta1.powi(self.step as i32);
        let bc2 = 1.0 - beta2.powi(self.step as i32);
        for (k, p) in params.iter_mut().enumerate() {
            let g = p.grad.take().expect("checked above");
            let (m, v) = (&mut self.first[k], &mut self.second[k]);
            let values = p.data_mut();
            for i in 0..values.len() {
                m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
                v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                values[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
            p.grad = Some(g);
        }
        Ok(())
    }
}
