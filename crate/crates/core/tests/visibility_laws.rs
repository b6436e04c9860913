use std::f64::consts::PI;

use hypvis::geometry::Direction;
use hypvis::measures::gamma_star;
use hypvis::sampler::{sample_process, SimConfig};
use hypvis::stats::{exponential_rate, ks_exponential};
use hypvis::visibility::{
    covering_status, estimate_covering_probability, sample_visible_distances, shepp_diagnostic, stream_circle_coverage,
    visible_distance, CoverageStatus,
};

fn uncensored(cfg: &SimConfig, trials: usize) -> Vec<f64> {
    sample_visible_distances(cfg, trials)
        .unwrap()
        .into_iter()
        .filter(|&(_, c)| !c)
        .map(|(s, _)| s)
        .collect()
}

#[test]
fn visible_distance_is_exponential_in_three_dimensions() {
    let gamma = 20.0;
    let rate = gamma_star(3, gamma).unwrap();
    let samples = uncensored(&SimConfig::new(3, 0.5, gamma, 12.0, 31).unwrap(), 5000);
    assert!(samples.len() > 4990);
    let ks = ks_exponential(&samples, rate).unwrap();
    assert!(ks.passes_1pct(), "{ks:?}");
    let (fit, se) = exponential_rate(&samples);
    assert!((fit - rate).abs() <= 4.0 * se, "{fit} vs {rate}");
}

#[test]
fn wrong_rate_is_rejected() {
    let samples = uncensored(&SimConfig::new(2, 0.5, 3.0 * PI, 15.0, 32).unwrap(), 10_000);
    assert!(!ks_exponential(&samples, 3.3).unwrap().passes_1pct());
}

#[test]
fn shepp_partial_sums_keep_growing() {
    for (lambda, seed) in [(0.0, 41), (1.0, 42)] {
        let cfg = SimConfig::new(2, lambda, PI, 30.0, seed).unwrap();
        let rows = shepp_diagnostic(&cfg, 1000).unwrap();
        assert_eq!(rows.len(), 1000);
        assert!(rows[999].partial_sum > rows[99].partial_sum);
        assert!(rows.windows(2).all(|w| w[1].partial_sum > w[0].partial_sum));
        // n ℓ_n fluctuates around 1; average over the tail.
        let tail: f64 = rows[500..].iter().map(|r| r.n_ell).sum::<f64>() / 500.0;
        assert!((tail - 1.0).abs() < 0.1, "lambda {lambda}: mean n*ell = {tail}");
    }
}

#[test]
fn shepp_minimal_run() {
    let rows = shepp_diagnostic(&SimConfig::new(2, 0.5, PI, 10.0, 1).unwrap(), 10).unwrap();
    assert_eq!(rows.len(), 10);
    assert_eq!(rows[9].n, 10);
}

#[test]
fn covered_circle_blocks_every_direction() {
    let rays: Vec<Direction> = (0..97)
        .map(|k| Direction::from_angle(0.123 + k as f64 * 0.0647))
        .collect();
    let mut covered = 0;
    for seed in 0..1000 {
        let cfg = SimConfig::new(2, 0.5, 4.0, 6.0, seed).unwrap();
        let verdict = stream_circle_coverage(&cfg).unwrap();
        if verdict.status != CoverageStatus::Covered {
            continue;
        }
        covered += 1;
        let sample = sample_process(&cfg).unwrap();
        assert_eq!(covering_status(&sample, 0).unwrap().status, CoverageStatus::Covered);
        for ray in &rays {
            let (s, censored) = visible_distance(&sample, ray).unwrap();
            assert!(!censored && s.is_finite() && s < cfg.s_cutoff, "seed {seed}");
        }
    }
    assert!(covered > 100, "only {covered} covered trials");
}

#[test]
fn covering_fraction_grows_with_cutoff() {
    let f = |s: f64| {
        estimate_covering_probability(&SimConfig::new(2, 0.5, PI, s, 3).unwrap(), 300)
            .unwrap()
            .fraction_covered
    };
    let (a, b, c) = (f(3.0), f(6.0), f(9.0));
    assert!(a <= b && b <= c, "{a} {b} {c}");
}
