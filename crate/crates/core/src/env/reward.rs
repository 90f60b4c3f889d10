//! Headway and comfort reward terms.

use std::f64::consts::PI;

/// Floor on the relative speed used for time gaps, m/s.
pub const TIME_GAP_SPEED_FLOOR: f64 = 0.1;

/// Bow-stern time gap in seconds. Non-positive gaps (collision) map to 0.
pub fn time_gap(gap: f64, v_rel: f64) -> f64 {
    if gap <= 0.0 {
        return 0.0;
    }
    gap / v_rel.max(TIME_GAP_SPEED_FLOOR)
}

/// Lognormal density `f(T | mu, sigma)`; zero for `T <= 0`.
pub fn lognormal_pdf(t: f64, mu: f64, sigma: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let z = (t.ln() - mu) / sigma;
    (-0.5 * z * z).exp() / (t * sigma * (2.0 * PI).sqrt())
}

/// Safety/efficiency reward: the calibrated time-gap density.
pub fn reward_safety(time_gap: f64, mu: f64, sigma: f64) -> f64 {
    lognormal_pdf(time_gap, mu, sigma)
}

/// Time gap at which [`reward_safety`] peaks.
pub fn lognormal_mode(mu: f64, sigma: f64) -> f64 {
    (mu - sigma * sigma).exp()
}

/// Peak value of [`reward_safety`].
pub fn max_safety_reward(mu: f64, sigma: f64) -> f64 {
    lognormal_pdf(lognormal_mode(mu, sigma), mu, sigma)
}

/// Comfort penalty: squared per-step power change as a fraction of the
/// maximum power.
pub fn reward_comfort(power_now: f64, power_prev: f64, p_max: f64) -> f64 {
    let frac = (power_now - power_prev) / p_max;
    -(frac * frac)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn time_gap_examples() {
        assert_eq!(time_gap(400.0, 4.0), 100.0);
        assert!((time_gap(400.0, 0.01) - 4000.0).abs() < 1e-9);
        assert_eq!(time_gap(-10.0, 4.0), 0.0);
        assert_eq!(time_gap(0.0, 4.0), 0.0);
    }

    #[test]
    fn safety_examples() {
        assert_eq!(reward_safety(0.0, 5.41, 1.06), 0.0);
        assert!(reward_safety(1e-9, 5.41, 1.06) < 1e-30);
        let at_median = reward_safety(5.41f64.exp(), 5.41, 1.06);
        assert!((at_median - 1.682_949_380_235_894_2e-3).abs() < 1e-12);
        assert!((lognormal_mode(5.41, 1.06) - 72.704_261_468_873).abs() < 1e-9);
        assert!((max_safety_reward(5.41, 1.06) - 2.951_601_302_988_281e-3).abs() < 1e-12);
    }

    #[test]
    fn comfort_examples() {
        assert_eq!(reward_comfort(0.3e6, 0.3e6, 1e6), 0.0);
        assert_eq!(reward_comfort(1e6, 0.0, 1e6), -1.0);
        assert!((reward_comfort(0.6e6, 0.5e6, 1e6) + 0.01).abs() < 1e-15);
    }
}
