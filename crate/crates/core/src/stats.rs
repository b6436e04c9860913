//! Small statistical helpers for the Monte-Carlo checks.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Two-sided standard normal quantile at 99%.
pub const Z_99: f64 = 2.575_829_303_548_901;

/// Asymptotic Kolmogorov critical coefficient at the 1% level.
pub const KS_COEFF_1PCT: f64 = 1.627_6;

/// Sample mean and standard error of the mean (`NaN` error below two values).
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// One-sample Kolmogorov-Smirnov test result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub n: usize,
    pub statistic: f64,
    pub critical_1pct: f64,
    pub p_value: f64,
}

impl KsResult {
    pub fn passes_1pct(&self) -> bool {
        self.statistic < self.critical_1pct
    }
}

/// KS test of `samples` against a continuous CDF.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(domain("KS test needs at least one sample"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut stat = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        stat = stat.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    let sqrt_n = n.sqrt();
    Ok(KsResult {
        n: xs.len(),
        statistic: stat,
        critical_1pct: KS_COEFF_1PCT / sqrt_n,
        p_value: kolmogorov_survival((sqrt_n + 0.12 + 0.11 / sqrt_n) * stat),
    })
}

/// KS test against `Exp(rate)`.
pub fn ks_exponential(samples: &[f64], rate: f64) -> Result<KsResult> {
    if !(rate > 0.0) {
        return Err(domain(format!("rate must be positive, got {rate}")));
    }
    ks_test(samples, |x| if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() })
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Maximum-likelihood rate of an exponential sample and its standard error.
pub fn exponential_rate(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let rate = n / samples.iter().sum::<f64>();
    (rate, rate / n.sqrt())
}

/// Halfwidth of the normal-approximation 99% interval for a proportion.
pub fn proportion_ci99(p: f64, n: usize) -> f64 {
    Z_99 * (p * (1.0 - p) / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp};

    #[test]
    fn mean_and_se() {
        let (m, se) = mean_and_std_error(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        assert!(mean_and_std_error(&[]).0.is_nan());
        assert!(mean_and_std_error(&[1.0]).1.is_nan());
    }

    #[test]
    fn kolmogorov_tail() {
        assert!((kolmogorov_survival(KS_COEFF_1PCT) - 0.01).abs() < 1e-4);
        assert!((kolmogorov_survival(1.358) - 0.05).abs() < 1e-3);
    }

    #[test]
    fn ks_accepts_the_true_law_and_rejects_a_wrong_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = Exp::new(3.0).unwrap().sample_iter(&mut rng).take(20_000).collect();
        assert!(ks_exponential(&xs, 3.0).unwrap().passes_1pct());
        assert!(!ks_exponential(&xs, 3.2).unwrap().passes_1pct());
        let (rate, se) = exponential_rate(&xs);
        assert!((rate - 3.0).abs() < 4.0 * se);
        assert!(ks_exponential(&[], 1.0).is_err());
    }

    #[test]
    fn ks_statistic_of_single_point() {
        // One sample at the median: D = 1/2.
        let r = ks_exponential(&[2f64.ln()], 1.0).unwrap();
        assert!((r.statistic - 0.5).abs() < 1e-15);
    }

    #[test]
    fn proportion_interval() {
        assert_eq!(proportion_ci99(1.0, 10), 0.0);
        assert!((proportion_ci99(0.5, 100) - Z_99 * 0.05).abs() < 1e-15);
    }
}
