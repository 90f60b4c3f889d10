use std::io::Write;

use super::AisError;
use crate::env::lognormal_pdf;

/// Upper end of the histogram support, s.
pub const HISTOGRAM_MAX: f64 = 1000.0;

/// Maximum-likelihood lognormal parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LognormalFit {
    pub mu: f64,
    pub sigma: f64,
    pub sample_count: usize,
}

impl LognormalFit {
    pub fn is_degenerate(&self) -> bool {
        self.sigma == 0.0
    }

    pub fn pdf(&self, t: f64) -> f64 {
        lognormal_pdf(t, self.mu, self.sigma)
    }

    /// Key-value snapshot readable as a run configuration: sets the reward's
    /// time-gap parameters and records the sample count.
    pub fn to_config_toml(&self, ground_speed_events: usize) -> String {
        format!(
            "# lognormal fit of bow-stern time gaps\n\
             [env]\nmu_t = {:?}\nsigma_t = {:?}\n\n\
             [calibration]\nsample_count = {}\nground_speed_events = {}\n",
            self.mu, self.sigma, self.sample_count, ground_speed_events
        )
    }
}

/// `mu` is the mean of the log samples, `sigma` their population standard
/// deviation.
pub fn fit_lognormal(samples: &[f64]) -> Result<LognormalFit, AisError> {
    if let Some(bad) = samples.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
        return Err(AisError::NonPositiveSample(*bad));
    }
    if samples.len() < 2 {
        return Err(AisError::InsufficientSamples(samples.len()));
    }
    let n = samples.len() as f64;
    let logs: Vec<f64> = samples.iter().map(|s| s.ln()).collect();
    let mu = logs.iter().sum::<f64>() / n;
    let var = logs.iter().map(|l| (l - mu) * (l - mu)).sum::<f64>() / n;
    let fit = LognormalFit {
        mu,
        sigma: var.sqrt(),
        sample_count: samples.len(),
    };
    if fit.is_degenerate() {
        log::warn!(
            "degenerate lognormal fit: all {} samples are equal",
            samples.len()
        );
    }
    Ok(fit)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub center: f64,
    pub count: usize,
    /// Fitted density at the bin center, 1/s.
    pub density: f64,
}

/// Histogram of the samples on `[0, 1000]` s with the fitted lognormal
/// density evaluated at each bin center. The last bin is closed on the
/// right and may be narrower than `bin_width`.
pub fn histogram_report(samples: &[f64], bin_width: f64) -> Result<Vec<HistogramBin>, AisError> {
    if samples.is_empty() {
        return Err(AisError::InsufficientSamples(0));
    }
    if !(bin_width > 0.0) {
        return Err(AisError::InvalidBinWidth(bin_width));
    }
    let fit = fit_lognormal(samples).ok();
    let n_bins = (HISTOGRAM_MAX / bin_width).ceil() as usize;
    let mut bins: Vec<HistogramBin> = (0..n_bins)
        .map(|i| {
            let lo = i as f64 * bin_width;
            let hi = ((i + 1) as f64 * bin_width).min(HISTOGRAM_MAX);
            let center = 0.5 * (lo + hi);
            HistogramBin {
                lo,
                hi,
                center,
                count: 0,
                density: fit.map_or(0.0, |f| {
                    if f.is_degenerate() {
                        0.0
                    } else {
                        f.pdf(center)
                    }
                }),
            }
        })
        .collect();
    for &s in samples {
        if (0.0..=HISTOGRAM_MAX).contains(&s) {
            let i = ((s / bin_width) as usize).min(n_bins - 1);
            bins[i].count += 1;
        }
    }
    Ok(bins)
}

pub fn write_histogram_csv<W: Write>(out: W, bins: &[HistogramBin]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "bin_lo_s",
        "bin_hi_s",
        "bin_center_s",
        "count",
        "fitted_density",
    ])?;
    for b in bins {
        w.write_record([
            b.lo.to_string(),
            b.hi.to_string(),
            b.center.to_string(),
            b.count.to_string(),
            b.density.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
