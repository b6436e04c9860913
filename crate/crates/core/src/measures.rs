//! Scalar measure formulas for the Poisson process of λ-geodesic hyperplanes.
//!
//! Sign convention: the signed distance `s` of a hyperplane is positive when
//! the origin lies on its non-convex side. Only that half (`s > 0`, the
//! hyperplanes simulated here) carries intensity; the full two-sided space is
//! never used.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::{cap_height, cap_measure_with_deficit};
use crate::numerics::{
    adaptive_integrate, adaptive_integrate_breakpoints, bracketed_root, gamma_ratio, integrate_semi_infinite, ln_gamma,
    DEFAULT_REL_TOL,
};

/// Dimension, curvature parameter and intensity of the hyperplane process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: usize,
    pub lambda: f64,
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(d: usize, lambda: f64, gamma: f64) -> Result<Self> {
        let p = Self { d, lambda, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(domain(format!("dimension must be at least 2, got {}", self.d)));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(domain(format!("lambda must lie in [0, 1], got {}", self.lambda)));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(domain(format!("gamma must be positive, got {}", self.gamma)));
        }
        Ok(())
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        Err(domain(format!("dimension must be at least 2, got {d}")))
    } else {
        Ok(())
    }
}

/// Critical intensity `√π (d-1)² Γ((d-1)/2) / Γ(d/2)`, the same for every
/// `λ ∈ [0, 1]`.
pub fn gamma_crit(d: usize) -> Result<f64> {
    check_dim(d)?;
    let df = d as f64;
    Ok(PI.sqrt() * (df - 1.0).powi(2) * gamma_ratio(0.5 * (df - 1.0), 0.5 * df)?)
}

/// `γ_d^* = γ Γ(d/2) / (2√π Γ((d+1)/2))`: the slope of the hitting measure
/// of a segment, and the rate of the exponential visible distance.
pub fn gamma_star(d: usize, gamma: f64) -> Result<f64> {
    check_dim(d)?;
    if !(gamma >= 0.0) {
        return Err(domain(format!("gamma must be nonnegative, got {gamma}")));
    }
    let df = d as f64;
    Ok(gamma * gamma_ratio(0.5 * df, 0.5 * (df + 1.0))? / (2.0 * PI.sqrt()))
}

/// Intensity `f(r) = 2γ(1 + 2λr + r²)^{d-1} / (1 - r²)^d` of the Euclidean
/// distances of the hyperplanes.
pub fn radial_intensity(p: &ModelParams, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(domain(format!("radius must lie in (0, 1), got {r}")));
    }
    Ok(radial_intensity_unchecked(p, r))
}

pub(crate) fn radial_intensity_unchecked(p: &ModelParams, r: f64) -> f64 {
    let num = 1.0 + 2.0 * p.lambda * r + r * r;
    let den = (1.0 - r) * (1.0 + r);
    2.0 * p.gamma * num.powi(p.d as i32 - 1) / den.powi(p.d as i32)
}

/// `F(z) = ∫₀^z f(r) dr`: exact for `d = 2`, adaptive quadrature otherwise.
pub fn radial_cumulative(p: &ModelParams, z: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&z) {
        return Err(domain(format!("z must lie in [0, 1), got {z}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if p.d == 2 {
        return Ok(2.0 * p.gamma * z * (1.0 + p.lambda * z) / ((1.0 - z) * (1.0 + z)));
    }
    Ok(adaptive_integrate(|r| radial_intensity_unchecked(p, r), 0.0, z, 1e-12)?.value)
}

/// Quantile `τ(y)`: the unique `z ∈ [0, 1)` with `F(z) = y`.
///
/// For `d = 2` this is the positive root of `(2γλ + y)z² + 2γz - y = 0`;
/// otherwise `F(z) = y` is solved by bracketing to `|F(z) - y| ≤ 1e-12 y`.
pub fn radial_quantile(p: &ModelParams, y: f64) -> Result<f64> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(domain(format!("y must be nonnegative and finite, got {y}")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if p.d == 2 {
        return Ok(quantile_d2(p, y));
    }
    let tol = 1e-12 * y;
    let hi = quantile_upper_bound(p, y);
    bracketed_root(|z| radial_cumulative(p, z).unwrap_or(f64::INFINITY) - y, 0.0, hi, tol)
}

pub(crate) fn quantile_d2(p: &ModelParams, y: f64) -> f64 {
    let g = p.gamma;
    y / (g + (g * g + y * (2.0 * g * p.lambda + y)).sqrt())
}

/// A point `z < 1` with `F(z) ≥ y`, found by halving the distance to one.
fn quantile_upper_bound(p: &ModelParams, y: f64) -> f64 {
    let mut gap = 0.5;
    loop {
        let z = 1.0 - gap;
        if gap < 1e-15 || radial_cumulative(p, z).map_or(true, |v| v >= y) {
            return z;
        }
        gap *= 0.5;
    }
}

/// Density `(cosh s + λ sinh s)^{d-1}` of the invariant hyperplane measure in
/// the signed distance `s`.
pub fn invariant_density_signed(d: usize, lambda: f64, s: f64) -> Result<f64> {
    check_dim(d)?;
    let base = s.cosh() + lambda * s.sinh();
    if !(base > 0.0) {
        return Err(domain(format!("cosh(s) + lambda sinh(s) must be positive, got {base}")));
    }
    Ok(base.powi(d as i32 - 1))
}

/// Intensity `g(s; λ) = γ s / ((1 - s²)^{(d+1)/2} √(s² + λ²(1 - s²)))` of the
/// shadow cap heights `φ(r_n)`. Nonincreasing in `λ` for fixed `s`.
pub fn shadow_intensity(p: &ModelParams, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(domain(format!("cap height must lie in (0, 1), got {s}")));
    }
    let one_minus = (1.0 - s) * (1.0 + s);
    let l2 = p.lambda * p.lambda;
    Ok(p.gamma * s / (one_minus.powf(0.5 * (p.d as f64 + 1.0)) * (s * s + l2 * one_minus).sqrt()))
}

/// Number of geometric refinement levels placed towards `s = 0` on the
/// tangent-cone piece of the hitting-measure integral.
const ORIGIN_REFINEMENT_LEVELS: i32 = 12;

/// Longest segment accepted by [`hitting_measure_quadrature`]; beyond it
/// `cosh(h/2)` overflows.
pub const MAX_SEGMENT_LENGTH: f64 = 700.0;

/// Measure of the hyperplanes hitting a geodesic segment of length `h` that
/// starts at the origin, by quadrature.
///
/// The integral runs over the hyperbolic distance `s = 2 artanh r` of the
/// hyperplane, where the intensity is `γ (cosh s + λ sinh s)^{d-1} ds` and all
/// threshold deficits have cancellation-free forms.
pub fn hitting_measure_quadrature(p: &ModelParams, h: f64) -> Result<f64> {
    hitting_measure_quadrature_with_tol(p, h, DEFAULT_REL_TOL)
}

pub fn hitting_measure_quadrature_with_tol(p: &ModelParams, h: f64, rel_tol: f64) -> Result<f64> {
    p.validate()?;
    if !(0.0..=MAX_SEGMENT_LENGTH).contains(&h) {
        return Err(domain(format!(
            "segment length must lie in [0, {MAX_SEGMENT_LENGTH}], got {h}"
        )));
    }
    let t = (0.5 * h).tanh();
    if t == 0.0 {
        return Ok(0.0);
    }
    let d = p.d;
    let lambda = p.lambda;
    let gamma = p.gamma;
    let base = move |s: f64| s.cosh() + lambda * s.sinh();
    let density = move |s: f64| gamma * base(s).powi(d as i32 - 1);
    // 1 - tanh(x/2) = 2 / (1 + e^x)
    let one_minus_t = 2.0 / (1.0 + h.exp());
    let cosh_half_h = (0.5 * h).cosh();

    let endpoint_integrand = move |s: f64| {
        let r = (0.5 * s).tanh();
        let one_minus_r = 2.0 / (1.0 + s.exp());
        let t_minus_r = (0.5 * (h - s)).sinh() / (cosh_half_h * (0.5 * s).cosh());
        let one_minus_rt = one_minus_r + r * one_minus_t;
        let deficit = t_minus_r * (one_minus_rt - lambda * t_minus_r) / (t * (r * r + 2.0 * lambda * r + 1.0));
        cap_measure_with_deficit(d, 1.0 - deficit, deficit) * density(s)
    };
    let tangent_integrand = move |s: f64| {
        // q = 1/base and φ = √(1 - q²) = √((base - 1)(base + 1)) / base
        let base_m1 = 2.0 * (0.5 * s).sinh().powi(2) + lambda * s.sinh();
        let b = 1.0 + base_m1;
        let q = 1.0 / b;
        let phi = (base_m1 * (base_m1 + 2.0)).sqrt() / b;
        cap_measure_with_deficit(d, phi, q * q / (1.0 + phi)) * density(s)
    };
    // Near s = h the cap measure vanishes like a power of h - s.
    let edge_scale = h.min(1.0);

    if lambda == 0.0 {
        let breaks = refine_towards_end(0.0, h, edge_scale);
        return Ok(adaptive_integrate_breakpoints(endpoint_integrand, &breaks, rel_tol)?.value);
    }

    let sc = critical_distance(lambda, t, one_minus_t).min(h);
    // The tangent threshold behaves like 2√(λr) near zero.
    let mut breaks: Vec<f64> = (1..=ORIGIN_REFINEMENT_LEVELS)
        .rev()
        .map(|k| sc * 0.25f64.powi(k))
        .collect();
    breaks.insert(0, 0.0);
    breaks.push(sc);
    breaks.dedup();
    let inner = if sc > 0.0 {
        adaptive_integrate_breakpoints(tangent_integrand, &breaks, rel_tol)?.value
    } else {
        0.0
    };
    let outer = if sc < h {
        let breaks = refine_towards_end(sc, h, edge_scale.min(h - sc));
        adaptive_integrate_breakpoints(endpoint_integrand, &breaks, rel_tol)?.value
    } else {
        0.0
    };
    Ok(inner + outer)
}

/// Hyperbolic distance `2 artanh r_c` of the critical radius, from
/// `1 - r_c` evaluated without cancellation.
fn critical_distance(lambda: f64, t: f64, one_minus_t: f64) -> f64 {
    let b = one_minus_t * (1.0 + t) / lambda;
    let root = (b * b + 4.0 * t * t).sqrt();
    // r_c = 2t² / (b + root); 1 - r_c = (b + 2t(1 - t) + (root - 2t)) / (b + root)
    let excess = b * b / (root + 2.0 * t);
    let one_minus_rc = (b + 2.0 * t * one_minus_t + excess) / (b + root);
    let rc = 2.0 * t * t / (b + root);
    ((1.0 + rc) / one_minus_rc).ln()
}

/// Increasing breakpoints from `a` to `b`, at `b - scale·2^k` for
/// `k = -12, -11, …` while they stay above `a`.
fn refine_towards_end(a: f64, b: f64, scale: f64) -> Vec<f64> {
    let mut inner: Vec<f64> = (-12..64)
        .map(|k| b - scale * 2f64.powi(k))
        .take_while(|&x| x > a)
        .filter(|&x| x < b)
        .collect();
    inner.reverse();
    let mut out = Vec::with_capacity(inner.len() + 2);
    out.push(a);
    out.extend(inner);
    out.push(b);
    out.dedup();
    out
}

/// Closed form `γ_d^* h` of the hitting measure; independent of `λ ∈ [0, 1]`.
pub fn hitting_measure_closed(d: usize, gamma: f64, h: f64) -> Result<f64> {
    if !(h >= 0.0) {
        return Err(domain(format!("segment length must be nonnegative, got {h}")));
    }
    Ok(gamma_star(d, gamma)? * h)
}

const CRITICAL_SLACK: f64 = 1e-12;

/// Mean hyperbolic volume of the visibility region:
/// `π^{(d-1)/2} Γ((d+1)/2) Γ((γ*-d+1)/2) / Γ((γ*+d+1)/2)` above the critical
/// intensity and `+∞` at or below it.
pub fn expected_volume_closed(p: &ModelParams) -> Result<f64> {
    p.validate()?;
    // Intensities within rounding of the threshold count as critical.
    if p.gamma <= gamma_crit(p.d)? * (1.0 + CRITICAL_SLACK) {
        return Ok(f64::INFINITY);
    }
    let df = p.d as f64;
    let gs = gamma_star(p.d, p.gamma)?;
    let ln_v = 0.5 * (df - 1.0) * PI.ln() + ln_gamma(0.5 * (df + 1.0))? + ln_gamma(0.5 * (gs - df + 1.0))?
        - ln_gamma(0.5 * (gs + df + 1.0))?;
    Ok(ln_v.exp())
}

/// `∫₀^∞ sinh^{d-1}(s) e^{-as} ds = (d-1)!/2^d · Γ((a-d+1)/2) / Γ((a+d+1)/2)`
/// for `a > d - 1`.
pub fn sinh_exp_integral(d: usize, a: f64) -> Result<f64> {
    check_dim(d)?;
    let df = d as f64;
    if !(a > df - 1.0) {
        return Err(Error::Divergent(format!(
            "sinh^{}(s) e^(-{a} s) is not integrable; need a > {}",
            d - 1,
            d - 1
        )));
    }
    let ln_v = ln_gamma(df)? - df * 2f64.ln() + ln_gamma(0.5 * (a - df + 1.0))? - ln_gamma(0.5 * (a + df + 1.0))?;
    Ok(ln_v.exp())
}

/// Numeric counterpart of [`sinh_exp_integral`] by truncated adaptive
/// quadrature; also returns the truncation point.
pub fn sinh_exp_integral_numeric(d: usize, a: f64) -> Result<(f64, f64)> {
    check_dim(d)?;
    if !(a > d as f64 - 1.0) {
        return Err(Error::Divergent(format!("need a > {}, got {a}", d - 1)));
    }
    let n = d as i32 - 1;
    // sinh^n(s) e^{-as} = ((1 - e^{-2s})/2)^n e^{-(a-n)s}, free of overflow.
    let integrand = |s: f64| (0.5 * -(-2.0 * s).exp_m1()).powi(n) * (-(a - n as f64) * s).exp();
    let (res, cut) = integrate_semi_infinite(integrand, 0.0, 1e-13)?;
    Ok((res.value, cut))
}

/// Surface area `ω_d = 2π^{d/2} / Γ(d/2)` of the unit sphere `S^{d-1}`.
pub fn sphere_area(d: usize) -> Result<f64> {
    check_dim(d)?;
    let df = d as f64;
    Ok(2.0 * (0.5 * df * PI.ln() - ln_gamma(0.5 * df)?).exp())
}

/// `∫₀^s sinh^{d-1}(x) dx`, the radial part of hyperbolic volume.
pub fn sinh_power_integral(d: usize, s: f64) -> Result<f64> {
    check_dim(d)?;
    if !(s >= 0.0) {
        return Err(domain(format!("radius must be nonnegative, got {s}")));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let n = d as i32 - 1;
    if s < 1.0 && n > 1 {
        // The recurrence below cancels badly for small s; the integrand is
        // entire, so one Kronrod panel is already exact to rounding.
        return Ok(adaptive_integrate(|x: f64| x.sinh().powi(n), 0.0, s, 1e-13)?.value);
    }
    Ok(sinh_power_recurrence(n, s))
}

// I_n = sinh^{n-1}(s) cosh(s) / n - (n-1)/n I_{n-2}
fn sinh_power_recurrence(n: i32, s: f64) -> f64 {
    match n {
        0 => s,
        1 => 2.0 * (0.5 * s).sinh().powi(2),
        _ => {
            let nf = n as f64;
            s.sinh().powi(n - 1) * s.cosh() / nf - (nf - 1.0) / nf * sinh_power_recurrence(n - 2, s)
        }
    }
}

/// Boolean-model constants for curvature `λ > 1`, where each λ-hyperplane is
/// a hyperbolic sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallModelConstants {
    /// Hyperbolic radius `R_λ = artanh(1/λ)` of the spheres.
    pub radius: f64,
    /// Critical intensity `(d-1)Γ((d+1)/2) / (π^{(d-1)/2}(λ² - 1)^{(d-1)/2})`.
    pub critical_intensity: f64,
}

pub fn ball_model_constants(d: usize, lambda: f64) -> Result<BallModelConstants> {
    check_dim(d)?;
    if !(lambda > 1.0) {
        return Err(domain(format!("ball model needs lambda > 1, got {lambda}")));
    }
    let df = d as f64;
    let radius = (1.0 / lambda).atanh();
    let ln_crit = (df - 1.0).ln() + ln_gamma(0.5 * (df + 1.0))?
        - 0.5 * (df - 1.0) * PI.ln()
        - 0.5 * (df - 1.0) * ((lambda - 1.0) * (lambda + 1.0)).ln();
    Ok(BallModelConstants {
        radius,
        critical_intensity: ln_crit.exp(),
    })
}

/// `φ'(r)` in closed form; used by the shadow-density identity checks.
pub fn cap_height_derivative(lambda: f64, r: f64) -> f64 {
    // φ = √(1 - q²), q = (1 - r²)/(1 + 2λr + r²)
    let den = 1.0 + 2.0 * lambda * r + r * r;
    let q = (1.0 - r * r) / den;
    let dq = (-2.0 * r * den - (1.0 - r * r) * (2.0 * lambda + 2.0 * r)) / (den * den);
    -q * dq / cap_height(lambda, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(d: usize, lambda: f64, gamma: f64) -> ModelParams {
        ModelParams::new(d, lambda, gamma).unwrap()
    }

    #[test]
    fn critical_intensity_values() {
        assert_relative_eq!(gamma_crit(2).unwrap(), PI, max_relative = 1e-14);
        assert_relative_eq!(gamma_crit(3).unwrap(), 8.0, max_relative = 1e-14);
        assert_relative_eq!(gamma_crit(4).unwrap(), 4.5 * PI, max_relative = 1e-14);
        assert!(gamma_crit(1).is_err());
    }

    #[test]
    fn gamma_star_values() {
        assert_eq!(gamma_star(3, 0.0).unwrap(), 0.0);
        assert_relative_eq!(gamma_star(2, 5.0).unwrap(), 5.0 / PI, max_relative = 1e-14);
        assert_relative_eq!(gamma_star(3, 5.0).unwrap(), 1.25, max_relative = 1e-14);
        // Critical intensity corresponds to γ* = d - 1.
        for d in 2..=7 {
            assert_relative_eq!(
                gamma_star(d, gamma_crit(d).unwrap()).unwrap(),
                d as f64 - 1.0,
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn radial_intensity_values() {
        let p = params(2, 1.0, 1.7);
        assert_relative_eq!(radial_intensity(&p, 1e-12).unwrap(), 2.0 * 1.7, max_relative = 1e-10);
        assert_relative_eq!(radial_intensity(&p, 0.5).unwrap(), 8.0 * 1.7, max_relative = 1e-14);
        let q = params(2, 0.0, 1.0);
        assert_relative_eq!(
            radial_intensity(&q, 0.3).unwrap(),
            2.0 * 1.09 / (0.91f64 * 0.91),
            max_relative = 1e-14
        );
        assert!(radial_intensity(&p, 0.0).is_err());
        assert!(radial_intensity(&p, 1.0).is_err());
    }

    #[test]
    fn cumulative_values() {
        let p = params(2, 1.0, 1.0);
        assert_eq!(radial_cumulative(&p, 0.0).unwrap(), 0.0);
        assert_relative_eq!(radial_cumulative(&p, 0.5).unwrap(), 2.0, max_relative = 1e-15);
        assert!(radial_cumulative(&p, 1.0).is_err());
    }

    // Fixed 64-point composite Gauss-Legendre (two-point rule on 4096 panels
    // would be too weak); uses Simpson with Richardson extrapolation instead.
    fn romberg(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let simpson = |n: usize| {
            let h = (b - a) / n as f64;
            let mut s = f(a) + f(b);
            for i in 1..n {
                s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        let coarse = simpson(1 << 12);
        let fine = simpson(1 << 13);
        fine + (fine - coarse) / 15.0
    }

    #[test]
    fn cumulative_d3_matches_independent_rule() {
        let p = params(3, 0.5, 1.0);
        let quad = radial_cumulative(&p, 0.5).unwrap();
        let reference = romberg(|r| radial_intensity_unchecked(&p, r), 0.0, 0.5);
        assert_relative_eq!(quad, reference, max_relative = 1e-10);
    }

    #[test]
    fn cumulative_d2_closed_form_matches_quadrature() {
        for &lambda in &[0.0, 0.3, 1.0] {
            let p = params(2, lambda, 2.5);
            for &z in &[0.1, 0.5, 0.9, 0.999] {
                let q = adaptive_integrate(|r| radial_intensity_unchecked(&p, r), 0.0, z, 1e-13)
                    .unwrap()
                    .value;
                assert_relative_eq!(radial_cumulative(&p, z).unwrap(), q, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn quantile_values() {
        let p = params(2, 0.0, 1.0);
        assert_eq!(radial_quantile(&p, 0.0).unwrap(), 0.0);
        assert_relative_eq!(
            radial_quantile(&p, 2.0).unwrap(),
            (5f64.sqrt() - 1.0) / 2.0,
            max_relative = 1e-15
        );
        let q = params(2, 1.0, 1.0);
        assert_relative_eq!(radial_quantile(&q, 2.0).unwrap(), 0.5, max_relative = 1e-15);
        assert!(radial_quantile(&q, -1.0).is_err());
    }

    #[test]
    fn quantile_round_trip() {
        for &(d, lambda) in &[(2, 0.0), (2, 0.6), (3, 0.0), (3, 0.5), (4, 1.0)] {
            let p = params(d, lambda, 1.3);
            for k in -3..=3 {
                let y = 10f64.powi(k);
                let z = radial_quantile(&p, y).unwrap();
                let back = radial_cumulative(&p, z).unwrap();
                assert!(((back - y) / y).abs() <= 1e-9, "d {d} lambda {lambda} y {y}: {back}");
            }
        }
    }

    #[test]
    fn quantile_via_bracketing_agrees_with_d2_closed_form() {
        let p = params(2, 1.0, 1.0);
        let z = bracketed_root(|z| radial_cumulative(&p, z).unwrap() - 2.0, 0.0, 0.99, 1e-13).unwrap();
        assert_relative_eq!(z, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn invariant_density_values() {
        assert_eq!(invariant_density_signed(3, 0.4, 0.0).unwrap(), 1.0);
        assert_relative_eq!(
            invariant_density_signed(4, 1.0, 0.7).unwrap(),
            (3.0f64 * 0.7).exp(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            invariant_density_signed(2, 0.0, 1.0).unwrap(),
            1.543_080_634_815_243_7,
            max_relative = 1e-14
        );
        assert!(invariant_density_signed(2, 1.0, -800.0).is_err());
    }

    #[test]
    fn shadow_intensity_special_cases() {
        let s: f64 = 0.6;
        let p0 = params(3, 0.0, 2.0);
        assert_relative_eq!(
            shadow_intensity(&p0, s).unwrap(),
            2.0 / (1.0 - s * s).powi(2),
            max_relative = 1e-14
        );
        let p1 = params(3, 1.0, 2.0);
        assert_relative_eq!(
            shadow_intensity(&p1, s).unwrap(),
            2.0 * s / (1.0 - s * s).powi(2),
            max_relative = 1e-14
        );
        let p = params(2, 0.0, 1.0);
        let chain = shadow_intensity(&p, cap_height(0.0, 0.5)).unwrap() * 0.96;
        assert_relative_eq!(chain, radial_intensity(&p, 0.5).unwrap(), max_relative = 1e-13);
        assert_relative_eq!(chain, 4.0 / 0.9, max_relative = 1e-13);
        assert!(shadow_intensity(&p, 1.0).is_err());
    }

    #[test]
    fn shadow_intensity_nonincreasing_in_lambda() {
        for d in 2..=4 {
            for i in 1..50 {
                let s = i as f64 / 50.0;
                let mut prev = f64::INFINITY;
                for j in 0..=20 {
                    let v = shadow_intensity(&params(d, j as f64 / 20.0, 1.0), s).unwrap();
                    assert!(v <= prev);
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn closed_form_derivative_matches_finite_difference() {
        for &lambda in &[0.0, 0.5, 1.0] {
            for k in 1..20 {
                let r = k as f64 / 20.0;
                let step = 1e-6;
                let fd = (cap_height(lambda, r + step) - cap_height(lambda, r - step)) / (2.0 * step);
                assert_relative_eq!(cap_height_derivative(lambda, r), fd, max_relative = 1e-7);
            }
        }
        assert_relative_eq!(cap_height_derivative(0.0, 0.5), 0.96, max_relative = 1e-14);
    }

    #[test]
    fn hitting_measure_examples() {
        let p = params(2, 0.5, PI);
        assert_eq!(hitting_measure_quadrature(&p, 0.0).unwrap(), 0.0);
        assert_relative_eq!(hitting_measure_quadrature(&p, 2.0).unwrap(), 2.0, max_relative = 1e-8);
        let q = params(3, 1.0, 4.0);
        assert_relative_eq!(hitting_measure_quadrature(&q, 1.0).unwrap(), 1.0, max_relative = 1e-8);
        assert_eq!(hitting_measure_closed(2, PI, 0.0).unwrap(), 0.0);
        assert_relative_eq!(hitting_measure_closed(2, PI, 2.0).unwrap(), 2.0, max_relative = 1e-14);
        assert_relative_eq!(hitting_measure_closed(3, 4.0, 1.0).unwrap(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn critical_distance_matches_critical_radius() {
        for &lambda in &[0.1, 0.5, 1.0] {
            for &h in &[0.01f64, 1.0, 5.0, 12.0] {
                let t = (0.5 * h).tanh();
                let rc = crate::geometry::critical_radius(lambda, h).unwrap();
                let sc = critical_distance(lambda, t, 2.0 / (1.0 + h.exp()));
                assert_relative_eq!(sc, 2.0 * rc.atanh(), max_relative = 1e-7);
                assert!(sc < h);
            }
        }
    }

    #[test]
    fn hitting_measure_long_segments() {
        for d in 2..=5 {
            for &lambda in &[0.0, 0.35, 1.0] {
                let p = params(d, lambda, 2.0);
                for &h in &[10.0, 20.0, 40.0] {
                    let q = hitting_measure_quadrature(&p, h).unwrap();
                    assert_relative_eq!(q, hitting_measure_closed(d, 2.0, h).unwrap(), max_relative = 1e-8);
                }
            }
        }
        assert!(hitting_measure_quadrature(&params(2, 0.5, 1.0), 1e4).is_err());
    }

    #[test]
    fn hitting_measure_tiny_segment_vanishes() {
        let p = params(3, 0.3, 1.0);
        let v = hitting_measure_quadrature(&p, 1e-9).unwrap();
        assert!(v > 0.0 && v < 1e-9);
    }

    #[test]
    fn expected_volume_values() {
        assert_relative_eq!(
            expected_volume_closed(&params(2, 0.0, 3.0 * PI)).unwrap(),
            PI / 4.0,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            expected_volume_closed(&params(2, 1.0, 3.0 * PI)).unwrap(),
            PI / 4.0,
            max_relative = 1e-13
        );
        assert_eq!(expected_volume_closed(&params(2, 0.5, PI)).unwrap(), f64::INFINITY);
        assert_eq!(expected_volume_closed(&params(3, 0.5, 8.0)).unwrap(), f64::INFINITY);
        // π Γ(3/2)/Γ(9/2) = π / (3.5 · 2.5 · 1.5)
        let expected = PI / (3.5 * 2.5 * 1.5);
        assert_relative_eq!(
            expected_volume_closed(&params(3, 0.2, 20.0)).unwrap(),
            expected,
            max_relative = 1e-13
        );
        assert_relative_eq!(expected, 0.239_359_44, max_relative = 1e-8);
    }

    #[test]
    fn volume_equals_sphere_area_times_sinh_exp_integral() {
        // E vol = ω_d ∫ sinh^{d-1}(s) e^{-γ* s} ds.
        for d in 2..=5 {
            let gamma = 1.5 * gamma_crit(d).unwrap();
            let p = params(d, 0.3, gamma);
            let via_integral = sphere_area(d).unwrap() * sinh_exp_integral(d, gamma_star(d, gamma).unwrap()).unwrap();
            assert_relative_eq!(expected_volume_closed(&p).unwrap(), via_integral, max_relative = 1e-12);
        }
    }

    #[test]
    fn sinh_exp_values() {
        assert_relative_eq!(sinh_exp_integral(2, 2.0).unwrap(), 1.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(sinh_exp_integral(3, 4.0).unwrap(), 1.0 / 24.0, max_relative = 1e-14);
        assert!(matches!(sinh_exp_integral(2, 1.0), Err(Error::Divergent(_))));
        let (v, cut) = sinh_exp_integral_numeric(2, 2.0).unwrap();
        assert_relative_eq!(v, 1.0 / 3.0, max_relative = 1e-12);
        assert!(cut > 0.0);
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(2).unwrap(), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(3).unwrap(), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(4).unwrap(), 2.0 * PI * PI, max_relative = 1e-14);
    }

    #[test]
    fn sinh_power_integrals() {
        assert_relative_eq!(
            sinh_power_integral(2, 1.3).unwrap(),
            1.3f64.cosh() - 1.0,
            max_relative = 1e-14
        );
        let s: f64 = 2.2;
        assert_relative_eq!(
            sinh_power_integral(3, s).unwrap(),
            ((2.0 * s).sinh() / 2.0 - s) / 2.0,
            max_relative = 1e-13
        );
        for d in 2..=6 {
            for &s in &[0.01, 0.5, 0.99, 1.0, 3.0] {
                let q = adaptive_integrate(|x: f64| x.sinh().powi(d as i32 - 1), 0.0, s, 1e-13)
                    .unwrap()
                    .value;
                assert_relative_eq!(sinh_power_integral(d, s).unwrap(), q, max_relative = 1e-11);
            }
        }
        assert_eq!(sinh_power_integral(4, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn ball_model_values() {
        let c = ball_model_constants(2, 2f64.sqrt()).unwrap();
        assert_relative_eq!(c.radius, 0.881_373_587_019_543, max_relative = 1e-13);
        assert_relative_eq!(c.critical_intensity, 0.5, max_relative = 1e-13);
        assert!(ball_model_constants(2, 1.0 + 1e-12).unwrap().radius > 10.0);
        let far = ball_model_constants(3, 1e6).unwrap();
        assert!(far.radius < 1e-5 && far.critical_intensity < 1e-10);
        assert!(ball_model_constants(3, 1.0).is_err());
    }
}
