/// Bias-corrected Adam over a flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn new(num_params: usize, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            lr,
            beta1,
            beta2,
            eps,
            step: 0,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
        }
    }

    /// One descent step on `params` along `grads`.
    pub fn update(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(
            params.len(),
            self.m.len(),
            "adam state / parameter size mismatch"
        );
        assert_eq!(
            grads.len(),
            self.m.len(),
            "adam state / gradient size mismatch"
        );
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_is_lr_sized() {
        let mut adam = AdamState::new(1, 0.001, 0.9, 0.999, 1e-8);
        let mut p = [0.0];
        adam.update(&mut p, &[1.0]);
        assert!((p[0] + 0.001 / (1.0 + 1e-8)).abs() < 1e-18);
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut adam = AdamState::new(3, 0.001, 0.9, 0.999, 1e-8);
        let mut p = [1.0, -2.0, 0.5];
        for _ in 0..100 {
            adam.update(&mut p, &[0.0; 3]);
        }
        assert_eq!(p, [1.0, -2.0, 0.5]);
    }

    #[test]
    fn two_steps_on_quadratic_match_scripted_reference() {
        // f(p) = 0.5 * (3 p0^2 + p1^2), grad = (3 p0, p1).
        let mut adam = AdamState::new(2, 0.01, 0.9, 0.999, 1e-8);
        let mut p = [1.0, -2.0];
        for _ in 0..2 {
            let g = [3.0 * p[0], p[1]];
            adam.update(&mut p, &g);
        }
        // Written out by hand from the update rule.
        let (b1, b2, lr, eps) = (0.9f64, 0.999f64, 0.01f64, 1e-8f64);
        let mut q = [1.0f64, -2.0];
        let mut m = [0.0f64; 2];
        let mut v = [0.0f64; 2];
        for t in 1..=2 {
            let g = [3.0 * q[0], q[1]];
            for i in 0..2 {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                let mh = m[i] / (1.0 - b1.powi(t));
                let vh = v[i] / (1.0 - b2.powi(t));
                q[i] -= lr * mh / (vh.sqrt() + eps);
            }
        }
        assert!((p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12);
        assert!((p[0] - (1.0 - 0.02)).abs() < 1e-4);
    }
}
