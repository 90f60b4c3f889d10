use serde::{Deserialize, Serialize};

/// Parameters of an AR(1) process `X' = c + phi * X + u`, `u ~ N(0, sigma2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArParams {
    pub c: f64,
    pub phi: f64,
    pub sigma2: f64,
}

impl ArParams {
    pub const fn new(c: f64, phi: f64, sigma2: f64) -> Self {
        Self { c, phi, sigma2 }
    }

    pub fn stationary_mean(&self) -> f64 {
        self.c / (1.0 - self.phi)
    }

    pub fn stationary_variance(&self) -> f64 {
        self.sigma2 / (1.0 - self.phi * self.phi)
    }

    pub fn is_stationary(&self) -> bool {
        self.phi.abs() < 1.0
    }
}

/// A running AR(1) process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArProcess {
    pub params: ArParams,
    pub current: f64,
}

impl ArProcess {
    pub fn new(params: ArParams, current: f64) -> Self {
        Self { params, current }
    }

    /// Starts the process at its stationary mean.
    pub fn at_stationary_mean(params: ArParams) -> Self {
        Self::new(params, params.stationary_mean())
    }

    /// Advances one step given a standard-normal draw and returns the new value.
    pub fn step(&mut self, noise: f64) -> f64 {
        let p = &self.params;
        self.current = p.c + p.phi * self.current + p.sigma2.sqrt() * noise;
        self.current
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn memoryless_constant() {
        let mut p = ArProcess::new(ArParams::new(5.0, 0.0, 0.0), 123.0);
        assert_eq!(p.step(0.7), 5.0);
    }

    #[test]
    fn fixed_point_with_zero_noise() {
        let params = ArParams::new(0.262, 0.951, 0.381);
        let mean = params.stationary_mean();
        assert!((mean - 5.346_938_775_510_2).abs() < 1e-9);
        let mut p = ArProcess::at_stationary_mean(params);
        assert!((p.step(0.0) - mean).abs() < 1e-12);
        assert!((params.stationary_variance() - 3.985_397_336_792_2).abs() < 1e-8);
    }
}
