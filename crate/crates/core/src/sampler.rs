//! Reproducible sampling of the truncated hyperplane process.
//!
//! Radii come from unit-rate Poisson arrivals `P₁ < P₂ < …` mapped through the
//! radial quantile, `r_n = τ(P_n)`. Per hyperplane the generator draws the
//! `Exp(1)` increment first and then the direction. The generator is
//! [`ChaCha8Rng`] seeded with [`SeedableRng::seed_from_u64`]; Monte-Carlo
//! trial `i` of a batch uses seed `seed ^ i`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geometry::{Direction, LambdaHyperplane};
use crate::measures::{quantile_d2, radial_intensity_unchecked, ModelParams};
use crate::numerics::{adaptive_integrate, bracketed_root};

/// Default safety cap on the number of sampled hyperplanes.
pub const DEFAULT_N_MAX: usize = 1_000_000;

fn default_n_max() -> usize {
    DEFAULT_N_MAX
}

/// Parameters of one truncated simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub d: usize,
    pub lambda: f64,
    pub gamma: f64,
    /// Hyperbolic truncation radius `S`.
    pub s_cutoff: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SimConfig {
    pub fn new(d: usize, lambda: f64, gamma: f64, s_cutoff: f64, seed: u64) -> Result<Self> {
        let cfg = Self {
            d,
            lambda,
            gamma,
            s_cutoff,
            n_max: DEFAULT_N_MAX,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_n_max(mut self, n_max: usize) -> Result<Self> {
        self.n_max = n_max;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        if !(self.s_cutoff > 0.0) || !self.s_cutoff.is_finite() {
            return Err(domain(format!(
                "cutoff must be positive and finite, got {}",
                self.s_cutoff
            )));
        }
        if self.r_max() >= 1.0 {
            return Err(domain(format!("cutoff {} rounds to the ideal boundary", self.s_cutoff)));
        }
        if self.n_max == 0 {
            return Err(domain("n_max must be at least 1"));
        }
        Ok(())
    }

    pub fn params(&self) -> ModelParams {
        ModelParams {
            d: self.d,
            lambda: self.lambda,
            gamma: self.gamma,
        }
    }

    /// Euclidean truncation radius `tanh(S/2)`.
    pub fn r_max(&self) -> f64 {
        (0.5 * self.s_cutoff).tanh()
    }
}

/// Which limit ended a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    RadiusCutoff,
    CountCap,
}

/// A realized truncated process, radii increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessSample {
    pub config: SimConfig,
    pub radii: Vec<f64>,
    pub dirs: Vec<Direction>,
    pub truncated_by: Truncation,
}

impl ProcessSample {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn hyperplanes(&self) -> impl Iterator<Item = LambdaHyperplane> + '_ {
        let lambda = self.config.lambda;
        self.radii.iter().zip(&self.dirs).map(move |(&r, u)| LambdaHyperplane {
            lambda,
            r,
            u: u.clone(),
        })
    }
}

/// A uniform direction on `S^{d-1}`: a standard Gaussian vector, normalized.
pub fn sample_direction<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Direction> {
    if d < 2 {
        return Err(domain(format!("dimension must be at least 2, got {d}")));
    }
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(u) = Direction::normalized(v) {
            return Ok(u);
        }
    }
}

/// Inverts the cumulative radial intensity for increasing targets.
///
/// `d = 2` is closed form. Otherwise each call integrates only from the
/// previous solution, and since `f` is increasing the new root lies in
/// `[z, z + Δ/f(z)]`.
#[derive(Debug, Clone)]
struct RadialInverter {
    params: ModelParams,
    z: f64,
    cum: f64,
}

impl RadialInverter {
    fn new(params: ModelParams) -> Self {
        Self {
            params,
            z: 0.0,
            cum: 0.0,
        }
    }

    /// Returns `τ(y)` for `y` no smaller than any previous target; `1.0`
    /// stands for a root beyond the last representable radius.
    fn invert(&mut self, y: f64) -> Result<f64> {
        if self.params.d == 2 {
            return Ok(quantile_d2(&self.params, y));
        }
        let p = self.params;
        let delta = y - self.cum;
        if delta <= 0.0 {
            return Ok(self.z);
        }
        let z0 = self.z;
        let f0 = if z0 == 0.0 {
            2.0 * p.gamma
        } else {
            radial_intensity_unchecked(&p, z0)
        };
        let top = 1.0 - f64::EPSILON;
        // Slack over the analytic bound absorbs quadrature rounding.
        let mut hi = (z0 + 1.5 * delta / f0).min(top);
        let g = |z: f64| -> f64 {
            if z <= z0 {
                return -delta;
            }
            adaptive_integrate(|r| radial_intensity_unchecked(&p, r), z0, z, 1e-12)
                .map(|q| q.value)
                .unwrap_or(f64::INFINITY)
                - delta
        };
        while g(hi) < 0.0 {
            if hi >= top {
                return Ok(1.0);
            }
            hi = (z0 + 2.0 * (hi - z0)).min(top);
        }
        let z = bracketed_root(g, z0, hi, 1e-13 * delta.max(1e-300))?;
        let piece = adaptive_integrate(|r| radial_intensity_unchecked(&p, r), z0, z, 1e-12)?.value;
        self.z = z;
        self.cum += piece;
        Ok(z)
    }
}

/// Lazily generated hyperplanes `(r_n, u_n)` in increasing `r`.
///
/// Ends at the first radius above `r_max` or after `n_max` items; the cause is
/// then available from [`HyperplaneStream::truncation`].
#[derive(Debug, Clone)]
pub struct HyperplaneStream {
    d: usize,
    r_max: f64,
    n_max: usize,
    rng: ChaCha8Rng,
    arrival: f64,
    count: usize,
    inverter: RadialInverter,
    stopped: Option<Truncation>,
}

impl HyperplaneStream {
    pub fn new(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            d: config.d,
            r_max: config.r_max(),
            n_max: config.n_max,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            arrival: 0.0,
            count: 0,
            inverter: RadialInverter::new(config.params()),
            stopped: None,
        })
    }

    pub fn truncation(&self) -> Option<Truncation> {
        self.stopped
    }

    fn step(&mut self) -> Result<Option<(f64, Direction)>> {
        if self.stopped.is_some() {
            return Ok(None);
        }
        if self.count >= self.n_max {
            self.stopped = Some(Truncation::CountCap);
            return Ok(None);
        }
        let increment: f64 = self.rng.sample(Exp1);
        self.arrival += increment;
        let r = self.inverter.invert(self.arrival)?;
        if r > self.r_max {
            self.stopped = Some(Truncation::RadiusCutoff);
            return Ok(None);
        }
        let u = sample_direction(self.d, &mut self.rng)?;
        self.count += 1;
        Ok(Some((r, u)))
    }
}

impl Iterator for HyperplaneStream {
    type Item = Result<(f64, Direction)>;

    fn next(&mut self) -> Option<Self::Item> {
        self.step().transpose()
    }
}

/// Draws the full truncated process for `config`.
pub fn sample_process(config: &SimConfig) -> Result<ProcessSample> {
    let mut stream = HyperplaneStream::new(config)?;
    let mut radii = Vec::new();
    let mut dirs = Vec::new();
    for item in stream.by_ref() {
        let (r, u) = item?;
        radii.push(r);
        dirs.push(u);
    }
    Ok(ProcessSample {
        config: config.clone(),
        radii,
        dirs,
        truncated_by: stream.truncation().unwrap_or(Truncation::CountCap),
    })
}

/// One row of the radii asymptotics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsRow {
    pub n: usize,
    /// Number of samples that reached index `n`.
    pub runs: usize,
    /// Mean of `n^{1/(d-1)} (1 - r_n)`.
    pub mean_scaled: f64,
    pub std_error: f64,
    /// `(γ/(d-1))^{1/(d-1)} (1 + λ)`.
    pub limit: f64,
    /// `n^{1/(d-1)} (1 - τ(n))`, which tracks the finite-`n` correction.
    pub plug_in: f64,
}

/// Empirical `n^{1/(d-1)}(1 - r_n)` averaged over samples, at each index in `ns`.
pub fn radii_asymptotics_diagnostic(samples: &[ProcessSample], ns: &[usize]) -> Result<Vec<AsymptoticsRow>> {
    let first = samples
        .first()
        .ok_or_else(|| domain("asymptotics diagnostic needs at least one sample"))?;
    let p = first.config.params();
    if samples.iter().any(|s| s.config.params() != p) {
        return Err(domain("samples must share d, lambda and gamma"));
    }
    let k = 1.0 / (p.d as f64 - 1.0);
    let limit = (p.gamma / (p.d as f64 - 1.0)).powf(k) * (1.0 + p.lambda);
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        if n == 0 {
            return Err(domain("indices start at 1"));
        }
        let scale = (n as f64).powf(k);
        let values: Vec<f64> = samples
            .iter()
            .filter_map(|s| s.radii.get(n - 1))
            .map(|r| scale * (1.0 - r))
            .collect();
        let (mean_scaled, std_error) = crate::stats::mean_and_std_error(&values);
        let plug_in = scale * (1.0 - crate::measures::radial_quantile(&p, n as f64)?);
        rows.push(AsymptoticsRow {
            n,
            runs: values.len(),
            mean_scaled,
            std_error,
            limit,
            plug_in,
        });
    }
    Ok(rows)
}
