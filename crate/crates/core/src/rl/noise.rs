use rand::Rng;
use rand_distr::StandardNormal;

/// Ornstein-Uhlenbeck exploration noise,
/// `X' = X + theta (mu - X) dt + sigma sqrt(dt) N(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OuNoise {
    pub theta: f64,
    pub sigma: f64,
    pub mu: f64,
    pub dt: f64,
    pub value: f64,
}

impl OuNoise {
    pub fn new(theta: f64, sigma: f64) -> Self {
        Self {
            theta,
            sigma,
            mu: 0.0,
            dt: 1.0,
            value: 0.0,
        }
    }

    pub fn reset(&mut self) {
        self.value = self.mu;
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.value +=
            self.theta * (self.mu - self.value) * self.dt + self.sigma * self.dt.sqrt() * z;
        self.value
    }
}
