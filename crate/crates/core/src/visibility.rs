//! Visibility from the origin: visible distances along rays, covering of the
//! boundary sphere by shadows, and the Monte-Carlo estimators built on them.
//!
//! A hyperplane at Euclidean distance `r` cannot block anything within
//! hyperbolic distance `2 artanh r` of the origin. Every routine that consumes
//! a [`HyperplaneStream`] therefore stops as soon as that bound passes the
//! largest distance still in question; the result equals the one computed from
//! the full truncated sample.

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coverage::CircleCover;
use crate::error::{domain, Error, Result};
use crate::geometry::{cap_height, ray_first_hit, shadow_half_angle, Direction, LambdaHyperplane};
use crate::measures::{sinh_power_integral, sphere_area};
use crate::sampler::{sample_direction, HyperplaneStream, ProcessSample, SimConfig};
use crate::stats::{mean_and_std_error, proportion_ci99};

/// RNG stream for auxiliary draws (rays, test points), kept apart from the
/// process stream of the same seed.
const AUX_STREAM: u64 = 1;

/// Seed of trial `index` in a batch.
pub fn trial_seed(seed: u64, index: u64) -> u64 {
    seed ^ index
}

fn aux_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(AUX_STREAM);
    rng
}

/// Visible distances along a family of rays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityProfile {
    pub directions: Vec<Direction>,
    pub distances: Vec<f64>,
    /// `true` where no hyperplane blocks the ray before the cutoff.
    pub censored: Vec<bool>,
    pub s_cutoff: f64,
}

/// `n` rays at angles `2πk/n`.
pub fn equiangular_rays(n: usize) -> Vec<Direction> {
    (0..n)
        .map(|k| Direction::from_angle(TAU * k as f64 / n as f64))
        .collect()
}

fn check_ray(sample: &ProcessSample, ray: &Direction) -> Result<()> {
    if ray.dim() != sample.config.d {
        return Err(domain(format!(
            "ray has dimension {}, sample has {}",
            ray.dim(),
            sample.config.d
        )));
    }
    Ok(())
}

/// Distance to the first hyperplane along `ray`, clamped at the cutoff, and
/// whether it was censored.
pub fn visible_distance(sample: &ProcessSample, ray: &Direction) -> Result<(f64, bool)> {
    check_ray(sample, ray)?;
    let s = sample.config.s_cutoff;
    let mut best = s;
    let mut censored = true;
    for hp in sample.hyperplanes() {
        if 2.0 * hp.r.atanh() >= best {
            break;
        }
        if let Some(dist) = ray_first_hit(&hp, ray) {
            if dist < best {
                best = dist;
                censored = false;
            }
        }
    }
    Ok((best, censored))
}

pub fn visibility_profile(sample: &ProcessSample, rays: &[Direction]) -> Result<VisibilityProfile> {
    let mut distances = Vec::with_capacity(rays.len());
    let mut censored = Vec::with_capacity(rays.len());
    for ray in rays {
        let (d, c) = visible_distance(sample, ray)?;
        distances.push(d);
        censored.push(c);
    }
    Ok(VisibilityProfile {
        directions: rays.to_vec(),
        distances,
        censored,
        s_cutoff: sample.config.s_cutoff,
    })
}

/// Visible distances along `rays` for a fresh process, drawing hyperplanes
/// only as deep as needed.
fn stream_visible_distances(config: &SimConfig, rays: &[Direction]) -> Result<(Vec<f64>, Vec<bool>)> {
    let s = config.s_cutoff;
    let mut best = vec![s; rays.len()];
    let mut hit = vec![false; rays.len()];
    let mut horizon = s;
    for item in HyperplaneStream::new(config)? {
        let (r, u) = item?;
        if 2.0 * r.atanh() >= horizon {
            break;
        }
        let hp = LambdaHyperplane {
            lambda: config.lambda,
            r,
            u,
        };
        let mut changed = false;
        for (i, ray) in rays.iter().enumerate() {
            if let Some(dist) = ray_first_hit(&hp, ray) {
                if dist < best[i] {
                    best[i] = dist;
                    hit[i] = true;
                    changed = true;
                }
            }
        }
        if changed {
            horizon = best.iter().copied().fold(0.0, f64::max);
        }
    }
    let censored = hit.iter().map(|h| !h).collect();
    Ok((best, censored))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageStatus {
    Covered,
    NotCoveredYet,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageVerdict {
    pub status: CoverageStatus,
    pub caps_used: usize,
    /// Exact uncovered arc length for `d = 2`, miss fraction of the test
    /// points otherwise.
    pub uncovered_measure_estimate: f64,
}

/// Whether the shadows of `sample` cover the boundary sphere.
///
/// Exact for `d = 2`. For `d ≥ 3`, `mc_points` uniform points (drawn from the
/// auxiliary stream of the sample seed) are tested and covering is never
/// certified.
pub fn covering_status(sample: &ProcessSample, mc_points: usize) -> Result<CoverageVerdict> {
    let lambda = sample.config.lambda;
    if sample.config.d == 2 {
        let mut cover = CircleCover::new();
        for (&r, u) in sample.radii.iter().zip(&sample.dirs) {
            cover.add_arc(u.angle(), shadow_half_angle(lambda, r));
            if cover.is_covered() {
                break;
            }
        }
        return Ok(circle_verdict(&cover));
    }
    if mc_points == 0 {
        return Err(domain("mc_points must be at least 1"));
    }
    let heights: Vec<f64> = sample.radii.iter().map(|&r| cap_height(lambda, r)).collect();
    let mut rng = aux_rng(sample.config.seed);
    let mut misses = 0usize;
    for _ in 0..mc_points {
        let x = sample_direction(sample.config.d, &mut rng)?;
        if !sample.dirs.iter().zip(&heights).any(|(u, &h)| u.dot(&x) >= h) {
            misses += 1;
        }
    }
    let fraction = misses as f64 / mc_points as f64;
    Ok(CoverageVerdict {
        status: if misses > 0 {
            CoverageStatus::NotCoveredYet
        } else {
            CoverageStatus::Undecided
        },
        caps_used: sample.len(),
        uncovered_measure_estimate: fraction,
    })
}

fn circle_verdict(cover: &CircleCover) -> CoverageVerdict {
    if cover.is_covered() {
        CoverageVerdict {
            status: CoverageStatus::Covered,
            caps_used: cover.arcs_added(),
            uncovered_measure_estimate: 0.0,
        }
    } else {
        CoverageVerdict {
            status: CoverageStatus::NotCoveredYet,
            caps_used: cover.arcs_added(),
            uncovered_measure_estimate: cover.uncovered_length(),
        }
    }
}

/// Streams a `d = 2` process and stops as soon as its shadows cover the circle.
pub fn stream_circle_coverage(config: &SimConfig) -> Result<CoverageVerdict> {
    if config.d != 2 {
        return Err(Error::Unsupported(format!(
            "exact coverage is only available for d = 2, got d = {}",
            config.d
        )));
    }
    let mut cover = CircleCover::new();
    for item in HyperplaneStream::new(config)? {
        let (r, u) = item?;
        cover.add_arc(u.angle(), shadow_half_angle(config.lambda, r));
        if cover.is_covered() {
            break;
        }
    }
    Ok(circle_verdict(&cover))
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        Err(domain("trials must be at least 1"))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoveringEstimate {
    pub trials: usize,
    /// Fraction of trials already covered at the cutoff; a lower bound in
    /// expectation for the covering probability.
    pub fraction_covered: f64,
    /// Normal-approximation 99% halfwidth.
    pub ci_halfwidth: f64,
}

/// Fraction of `trials` independent `d = 2` processes whose truncated
/// shadows cover the circle.
pub fn estimate_covering_probability(config: &SimConfig, trials: usize) -> Result<CoveringEstimate> {
    check_trials(trials)?;
    config.validate()?;
    if config.d != 2 {
        return Err(Error::Unsupported(
            "covering probabilities are only certified for d = 2".into(),
        ));
    }
    let covered: Vec<bool> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            stream_circle_coverage(&config.with_seed(trial_seed(config.seed, i)))
                .map(|v| v.status == CoverageStatus::Covered)
        })
        .collect::<Result<_>>()?;
    let p = covered.iter().filter(|&&c| c).count() as f64 / trials as f64;
    Ok(CoveringEstimate {
        trials,
        fraction_covered: p,
        ci_halfwidth: proportion_ci99(p, trials),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub trials: usize,
    pub n_rays: usize,
    pub estimate: f64,
    pub std_error: f64,
    /// Fraction of all (trial, ray) pairs with no hit before the cutoff.
    pub censored_fraction: f64,
}

/// Monte-Carlo mean volume of the visibility region: per trial
/// `(ω_d / n_rays) Σ ∫₀^{s_u} sinh^{d-1}`, averaged over trials.
///
/// Rays form an equiangular grid for `d = 2` and are uniform random (auxiliary
/// stream of the trial seed) otherwise.
pub fn estimate_mean_volume(config: &SimConfig, trials: usize, n_rays: usize) -> Result<VolumeEstimate> {
    check_trials(trials)?;
    config.validate()?;
    if n_rays == 0 {
        return Err(domain("n_rays must be at least 1"));
    }
    let d = config.d;
    let omega = sphere_area(d)?;
    let grid = if d == 2 { Some(equiangular_rays(n_rays)) } else { None };
    let per_trial: Vec<(f64, usize)> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let cfg = config.with_seed(trial_seed(config.seed, i));
            let rays = match &grid {
                Some(g) => g.clone(),
                None => {
                    let mut rng = aux_rng(cfg.seed);
                    (0..n_rays)
                        .map(|_| sample_direction(d, &mut rng))
                        .collect::<Result<Vec<_>>>()?
                }
            };
            let (dist, censored) = stream_visible_distances(&cfg, &rays)?;
            let mut acc = 0.0;
            for &s in &dist {
                acc += sinh_power_integral(d, s)?;
            }
            Ok((omega * acc / n_rays as f64, censored.iter().filter(|&&c| c).count()))
        })
        .collect::<Result<_>>()?;
    let volumes: Vec<f64> = per_trial.iter().map(|v| v.0).collect();
    let censored: usize = per_trial.iter().map(|v| v.1).sum();
    let (estimate, std_error) = mean_and_std_error(&volumes);
    Ok(VolumeEstimate {
        trials,
        n_rays,
        estimate,
        std_error,
        censored_fraction: censored as f64 / (trials * n_rays) as f64,
    })
}

/// Visible distance along `e₁` for each of `trials` independent processes.
pub fn sample_visible_distances(config: &SimConfig, trials: usize) -> Result<Vec<(f64, bool)>> {
    check_trials(trials)?;
    config.validate()?;
    let ray = [Direction::axis(config.d)];
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let (d, c) = stream_visible_distances(&config.with_seed(trial_seed(config.seed, i)), &ray)?;
            Ok((d[0], c[0]))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub gamma: f64,
    pub fraction_covered: f64,
    pub ci_halfwidth: f64,
    pub trials: usize,
}

/// Covering fraction at each intensity, sorted by `γ`. Every intensity uses
/// the same trial seeds.
pub fn phase_scan(
    d: usize,
    lambda: f64,
    gammas: &[f64],
    trials: usize,
    s_cutoff: f64,
    seed: u64,
) -> Result<Vec<PhaseRow>> {
    if gammas.is_empty() {
        return Err(domain("phase scan needs at least one intensity"));
    }
    let mut sorted = gammas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .into_iter()
        .map(|gamma| {
            let cfg = SimConfig::new(d, lambda, gamma, s_cutoff, seed)?;
            let est = estimate_covering_probability(&cfg, trials)?;
            Ok(PhaseRow {
                gamma,
                fraction_covered: est.fraction_covered,
                ci_halfwidth: est.ci_halfwidth,
                trials,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SheppRow {
    pub n: usize,
    /// Shadow arc length over `2π`, i.e. `arccos(φ(r_n)) / π`.
    pub ell: f64,
    pub n_ell: f64,
    /// `Σ_{k ≤ n} k⁻² exp(ℓ₁ + … + ℓ_k)`.
    pub partial_sum: f64,
}

/// Shepp's covering series along one sample at the critical intensity.
pub fn shepp_diagnostic(config: &SimConfig, n_terms: usize) -> Result<Vec<SheppRow>> {
    if config.d != 2 {
        return Err(Error::Unsupported(format!(
            "the Shepp diagnostic needs d = 2, got d = {}",
            config.d
        )));
    }
    if (config.gamma - PI).abs() > 1e-9 {
        return Err(domain(format!(
            "the Shepp diagnostic runs at gamma = pi, got {}",
            config.gamma
        )));
    }
    if n_terms < 10 {
        return Err(domain(format!("n_terms must be at least 10, got {n_terms}")));
    }
    let cfg = config.clone().with_n_max(n_terms)?;
    let mut rows = Vec::with_capacity(n_terms);
    let mut ell_sum = 0.0;
    let mut partial = 0.0;
    for (k, item) in HyperplaneStream::new(&cfg)?.enumerate() {
        let (r, _) = item?;
        let n = k + 1;
        let ell = shadow_half_angle(cfg.lambda, r) / PI;
        ell_sum += ell;
        partial += ell_sum.exp() / (n as f64 * n as f64);
        rows.push(SheppRow {
            n,
            ell,
            n_ell: n as f64 * ell,
            partial_sum: partial,
        });
    }
    if rows.len() < n_terms {
        return Err(domain(format!(
            "only {} hyperplanes inside the cutoff; raise s_cutoff to reach {n_terms}",
            rows.len()
        )));
    }
    Ok(rows)
}

/// `n` uniform directions from the auxiliary stream of `seed`.
pub fn random_directions(d: usize, n: usize, seed: u64) -> Result<Vec<Direction>> {
    let mut rng = aux_rng(seed);
    (0..n).map(|_| sample_direction(d, &mut rng)).collect()
}
