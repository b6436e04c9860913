//! Exact geometry of the Poincaré ball model.
//!
//! A λ-geodesic hyperplane `H(r, u)` at Euclidean distance `r` from the origin
//! in direction `u` is realized in the ball as a Euclidean sphere of radius
//! `R = (1 - r²) / (2(λ + r))` centred at `(r + R) u`, meeting the boundary
//! sphere at an angle `θ` with `cos θ = λ`. For `λ = 0` these are the totally
//! geodesic hyperplanes, for `λ = 1` the horospheres.
//!
//! Only hyperplanes whose convex side excludes the origin are represented. For
//! `λ = 0` there is no intrinsic convex side, so the orientation is carried by
//! `u` alone: `H(r, u)` and `H(r, -u)` are distinct records for the same set.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::{gamma_ratio, regularized_incomplete_beta};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// `arcosh(1 + delta)` without cancellation for small `delta`.
fn arcosh_one_plus(delta: f64) -> f64 {
    (delta + (delta * (delta + 2.0)).sqrt()).ln_1p()
}

/// A point of the open unit ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BallPoint(Vec<f64>);

impl BallPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || coords.iter().any(|c| !c.is_finite()) {
            return Err(domain("ball point needs finite coordinates"));
        }
        let n = norm_sq(&coords).sqrt();
        if n >= 1.0 {
            return Err(domain(format!("point with norm {n} is not inside the unit ball")));
        }
        Ok(Self(coords))
    }

    pub fn origin(d: usize) -> Self {
        Self(vec![0.0; d])
    }

    /// The point at Euclidean radius `rho` along `dir`.
    pub fn along(dir: &Direction, rho: f64) -> Result<Self> {
        Self::new(dir.0.iter().map(|c| rho * c).collect())
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        norm_sq(&self.0).sqrt()
    }
}

impl TryFrom<Vec<f64>> for BallPoint {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<BallPoint> for Vec<f64> {
    fn from(p: BallPoint) -> Self {
        p.0
    }
}

/// Tolerance on `|‖u‖ - 1|` for a [`Direction`].
pub const UNIT_TOL: f64 = 1e-12;

/// A unit vector in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Accepts `coords` if its norm is within [`UNIT_TOL`] of one.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 || coords.iter().any(|c| !c.is_finite()) {
            return Err(domain("direction needs at least two finite coordinates"));
        }
        let n = norm_sq(&coords).sqrt();
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(domain(format!("direction has norm {n}, expected 1")));
        }
        Ok(Self(coords))
    }

    /// Rescales a nonzero vector to unit length.
    pub fn normalized(mut coords: Vec<f64>) -> Result<Self> {
        let n = norm_sq(&coords).sqrt();
        if !(n > 0.0) || !n.is_finite() || coords.len() < 2 {
            return Err(domain("cannot normalize a zero or non-finite vector"));
        }
        coords.iter_mut().for_each(|c| *c /= n);
        Ok(Self(coords))
    }

    /// `(cos angle, sin angle)` in the plane.
    pub fn from_angle(angle: f64) -> Self {
        Self(vec![angle.cos(), angle.sin()])
    }

    /// The first coordinate axis `e₁` of `R^d`.
    pub fn axis(d: usize) -> Self {
        let mut v = vec![0.0; d.max(2)];
        v[0] = 1.0;
        Self(v)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        dot(&self.0, &other.0)
    }

    /// Polar angle in `[0, 2π)`; only meaningful for `d = 2`.
    pub fn angle(&self) -> f64 {
        self.0[1].atan2(self.0[0]).rem_euclid(std::f64::consts::TAU)
    }
}

impl TryFrom<Vec<f64>> for Direction {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Direction> for Vec<f64> {
    fn from(d: Direction) -> Self {
        d.0
    }
}

/// Hyperbolic distance from the origin, `2 artanh ‖y‖`.
pub fn dist_origin(y: &BallPoint) -> Result<f64> {
    let n = y.norm();
    if n >= 1.0 {
        return Err(domain(format!("norm {n} is not inside the unit ball")));
    }
    Ok(2.0 * n.atanh())
}

/// Hyperbolic distance between two points of the ball.
pub fn dist_pair(x: &BallPoint, y: &BallPoint) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(domain("points live in different dimensions"));
    }
    let nx = norm_sq(&x.0);
    let ny = norm_sq(&y.0);
    if nx >= 1.0 || ny >= 1.0 {
        return Err(domain("point is not inside the unit ball"));
    }
    let diff: f64 = x.0.iter().zip(&y.0).map(|(a, b)| (a - b) * (a - b)).sum();
    let delta = 2.0 * diff / ((1.0 - nx) * (1.0 - ny));
    Ok(arcosh_one_plus(delta))
}

/// Euclidean radius of the sphere realizing `H(r, u)` for curvature `lambda`.
pub fn euclid_radius(lambda: f64, r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) || !(lambda >= 0.0) {
        return Err(domain(format!(
            "need lambda >= 0 and r in [0, 1), got lambda = {lambda}, r = {r}"
        )));
    }
    if lambda + r == 0.0 {
        return Err(Error::DegenerateFlat);
    }
    Ok((1.0 - r * r) / (2.0 * (lambda + r)))
}

/// Height of the shadow cap cast on the boundary sphere by a hyperplane at
/// Euclidean distance `r`:
/// `φ(r) = 2√(r(λ + r)(1 + λr)) / (1 + 2λr + r²)`.
///
/// The blocked boundary directions are exactly `{x : ⟨x, u⟩ ≥ φ(r)}`.
pub fn cap_height(lambda: f64, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let v = 2.0 * (r * (lambda + r) * (1.0 + lambda * r)).sqrt() / (1.0 + 2.0 * lambda * r + r * r);
    v.min(1.0)
}

/// Angular radius `arccos φ(r)` of the shadow, computed as
/// `atan2((1 - r²)/(1 + 2λr + r²), φ)` so it stays accurate as `r → 1`.
pub fn shadow_half_angle(lambda: f64, r: f64) -> f64 {
    if r <= 0.0 {
        return std::f64::consts::FRAC_PI_2;
    }
    let q = (1.0 - r) * (1.0 + r) / (1.0 + 2.0 * lambda * r + r * r);
    q.atan2(cap_height(lambda, r))
}

/// Two-term expansion of `1 - φ(1 - eps)` for small `eps`.
pub fn cap_height_deficit_asymptotic(lambda: f64, eps: f64) -> f64 {
    let k = 2.0 * (1.0 + lambda) * (1.0 + lambda);
    eps * eps / k + eps * eps * eps / k
}

/// Normalized surface measure of the closed cap `{x ∈ S^{d-1} : ⟨x, u⟩ ≥ h}`
/// for `h ∈ [0, 1]`.
///
/// Evaluated as `½ I_{1-h²}((d-1)/2, 1/2)`, the regularized incomplete beta
/// form of `Γ(d/2)/(√π Γ((d-1)/2)) ∫_h^1 (1 - s²)^{(d-3)/2} ds`.
pub fn cap_measure(d: usize, h: f64) -> Result<f64> {
    if d < 2 {
        return Err(domain(format!("dimension must be at least 2, got {d}")));
    }
    if !(0.0..=1.0).contains(&h) {
        return Err(domain(format!("cap height must lie in [0, 1], got {h}")));
    }
    Ok(cap_measure_unchecked(d, h))
}

pub(crate) fn cap_measure_unchecked(d: usize, h: f64) -> f64 {
    let h = h.clamp(0.0, 1.0);
    match d {
        2 => h.acos() / std::f64::consts::PI,
        3 => 0.5 * (1.0 - h),
        _ => {
            let a = 0.5 * (d as f64 - 1.0);
            let h2 = h * h;
            // For small h the argument 1 - h² would drop the digits of h².
            let v = if h2 < 0.5 {
                1.0 - regularized_incomplete_beta(0.5, a, h2).expect("arguments are in range")
            } else {
                regularized_incomplete_beta(a, 0.5, (1.0 - h) * (1.0 + h)).expect("arguments are in range")
            };
            0.5 * v
        }
    }
}

/// [`cap_measure`] at height `h` given also `deficit = 1 - h` evaluated
/// without cancellation; the deficit is used when `h` is near one.
pub(crate) fn cap_measure_with_deficit(d: usize, h: f64, deficit: f64) -> f64 {
    if h < 0.5 || !(deficit > 0.0) {
        return cap_measure_unchecked(d, h);
    }
    match d {
        2 => 2.0 * (0.5 * deficit).sqrt().asin() / std::f64::consts::PI,
        3 => 0.5 * deficit,
        _ => {
            let x = deficit * (2.0 - deficit);
            0.5 * regularized_incomplete_beta(0.5 * (d as f64 - 1.0), 0.5, x).expect("arguments are in range")
        }
    }
}

/// Normalizing constant `Γ(d/2) / (√π Γ((d-1)/2))` of [`cap_measure`].
pub fn cap_measure_constant(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(domain(format!("dimension must be at least 2, got {d}")));
    }
    let d = d as f64;
    Ok(gamma_ratio(0.5 * d, 0.5 * (d - 1.0))? / std::f64::consts::PI.sqrt())
}

/// Critical radius separating the two hit regimes for a segment of hyperbolic
/// length `h`: the positive root of `r² + ((1 - t²)/λ) r - t² = 0`, `t = tanh(h/2)`.
///
/// Below it a hyperplane meets the segment exactly when it meets the ray
/// through it; at or above it the segment's endpoint matters.
pub fn critical_radius(lambda: f64, h: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(domain(format!("critical radius needs lambda in (0, 1], got {lambda}")));
    }
    if !(h > 0.0) {
        return Err(domain(format!("segment length must be positive, got {h}")));
    }
    let t = (0.5 * h).tanh();
    Ok(critical_radius_from_endpoint(lambda, t))
}

fn critical_radius_from_endpoint(lambda: f64, t: f64) -> f64 {
    let b = (1.0 - t) * (1.0 + t) / lambda;
    // Product of the roots is -t², so the positive one is 2t²/(b + √(b² + 4t²)).
    2.0 * t * t / (b + (b * b + 4.0 * t * t).sqrt())
}

/// A λ-geodesic hyperplane `H(r, u)` whose convex side excludes the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaHyperplane {
    pub lambda: f64,
    pub r: f64,
    pub u: Direction,
}

impl LambdaHyperplane {
    pub fn new(lambda: f64, r: f64, u: Direction) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(domain(format!("lambda must lie in [0, 1], got {lambda}")));
        }
        if !(0.0..1.0).contains(&r) {
            return Err(domain(format!("r must lie in [0, 1), got {r}")));
        }
        Ok(Self { lambda, r, u })
    }

    /// `λ = r = 0`: a flat Euclidean hyperplane through the origin.
    pub fn is_flat(&self) -> bool {
        self.lambda + self.r == 0.0
    }

    pub fn euclid_radius(&self) -> Result<f64> {
        euclid_radius(self.lambda, self.r)
    }

    /// Centre `(r + R) u` of the realizing sphere.
    pub fn center(&self) -> Result<Vec<f64>> {
        let big_r = self.euclid_radius()?;
        Ok(self.u.coords().iter().map(|c| (self.r + big_r) * c).collect())
    }

    pub fn shadow(&self) -> ShadowCap {
        ShadowCap {
            u: self.u.clone(),
            height: cap_height(self.lambda, self.r),
        }
    }
}

/// The closed spherical cap `{x : ⟨x, u⟩ ≥ height}` on the boundary sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowCap {
    pub u: Direction,
    pub height: f64,
}

impl ShadowCap {
    pub fn contains(&self, x: &Direction) -> bool {
        self.u.dot(x) >= self.height
    }

    /// Angular radius `arccos(height)` of the cap.
    pub fn half_angle(&self) -> f64 {
        self.height.clamp(-1.0, 1.0).acos()
    }
}

/// Geodesic segment from the origin of hyperbolic length `h` along `direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSpec {
    pub h: f64,
    pub direction: Direction,
}

impl SegmentSpec {
    pub fn new(h: f64, direction: Direction) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(domain(format!("segment length must be positive and finite, got {h}")));
        }
        let seg = Self { h, direction };
        if seg.endpoint_radius() >= 1.0 {
            return Err(domain(format!(
                "segment of length {h} reaches the ideal boundary in f64"
            )));
        }
        Ok(seg)
    }

    /// Euclidean length `tanh(h/2)` of the segment in the ball.
    pub fn endpoint_radius(&self) -> f64 {
        (0.5 * self.h).tanh()
    }
}

/// Condition on `u₁ = ⟨u, e₁⟩` under which `H(r, u)` meets the segment
/// `[0, t e₁]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HitRule {
    /// Every direction hits (`r = 0`).
    Always,
    /// No direction hits (`r > t`).
    Never,
    /// Hit iff `u₁ ≥` the contained threshold (closed convention).
    MinCosine(f64),
}

impl HitRule {
    pub fn admits(self, u1: f64) -> bool {
        match self {
            HitRule::Always => true,
            HitRule::Never => false,
            HitRule::MinCosine(threshold) => u1 >= threshold,
        }
    }
}

/// Threshold on `u₁` for a hyperplane at distance `r` to meet a segment of
/// Euclidean length `t = tanh(h/2)`.
///
/// For `λ > 0` and `r < r_c` the binding constraint is the tangent cone
/// (threshold `2√((r²λ + r)(λ + r)) / (r² + 2λr + 1)`, the cap height); for
/// `r ∈ [r_c, t]`, and for all `r ∈ (0, t]` when `λ = 0`, it is the segment
/// endpoint (threshold `(t²(λ + r) + r²λ + r) / (t(r² + 2λr + 1))`).
pub fn segment_hit_rule(lambda: f64, r: f64, t: f64) -> HitRule {
    if r == 0.0 {
        return HitRule::Always;
    }
    if r > t {
        return HitRule::Never;
    }
    if lambda > 0.0 && r < critical_radius_from_endpoint(lambda, t) {
        HitRule::MinCosine(tangent_threshold(lambda, r))
    } else {
        HitRule::MinCosine(endpoint_threshold(lambda, r, t))
    }
}

pub(crate) fn tangent_threshold(lambda: f64, r: f64) -> f64 {
    2.0 * ((r * r * lambda + r) * (lambda + r)).sqrt() / (r * r + 2.0 * lambda * r + 1.0)
}

pub(crate) fn endpoint_threshold(lambda: f64, r: f64, t: f64) -> f64 {
    (t * t * (lambda + r) + r * r * lambda + r) / (t * (r * r + 2.0 * lambda * r + 1.0))
}

/// Whether `hp` meets the geodesic segment `seg` (closed on both ends, equality
/// in the threshold counts as a hit).
pub fn hits_segment(hp: &LambdaHyperplane, seg: &SegmentSpec) -> bool {
    let u1 = hp.u.dot(&seg.direction);
    segment_hit_rule(hp.lambda, hp.r, seg.endpoint_radius()).admits(u1)
}

/// Reference hit test that solves `p(x) = x² - 2(r+R)x u₁ + (r+R)² - R² = 0`
/// directly and looks for a root in `[0, t]`. The flat hyperplane is handled
/// by scanning `n_steps` points of the segment for a sign change of `⟨x, u⟩`.
pub fn hits_segment_bruteforce(hp: &LambdaHyperplane, seg: &SegmentSpec, n_steps: usize) -> bool {
    let t = seg.endpoint_radius();
    let u1 = hp.u.dot(&seg.direction);
    if hp.is_flat() {
        let n = n_steps.max(2);
        let signs: Vec<f64> = (0..n).map(|k| u1 * t * k as f64 / (n - 1) as f64).collect();
        return signs.contains(&0.0) || signs.windows(2).any(|w| w[0] * w[1] < 0.0);
    }
    let big_r = euclid_radius(hp.lambda, hp.r).expect("non-flat hyperplane");
    let c = hp.r + big_r;
    let b = c * u1;
    let disc = b * b - c * c + big_r * big_r;
    if disc < 0.0 {
        return false;
    }
    let s = disc.sqrt();
    [b - s, b + s].iter().any(|&x| (0.0..=t).contains(&x))
}

/// Hyperbolic distance along `ray` to the first point of `hp`, if the ray
/// meets it inside the ball.
pub fn ray_first_hit(hp: &LambdaHyperplane, ray: &Direction) -> Option<f64> {
    if hp.r == 0.0 {
        return Some(0.0);
    }
    let u1 = hp.u.dot(ray);
    if u1 <= 0.0 {
        return None;
    }
    let big_r = (1.0 - hp.r * hp.r) / (2.0 * (hp.lambda + hp.r));
    let c = hp.r + big_r;
    let b = c * u1;
    // b² - (c² - R²) written to avoid cancelling c² against R².
    let prod = hp.r * (hp.r + 2.0 * big_r);
    let disc = b * b - prod;
    // Tangent rays belong to the closed shadow; absorb roundoff at the double root.
    if disc < -4.0 * f64::EPSILON * b * b {
        return None;
    }
    // Smaller root via the product of roots.
    let x = prod / (b + disc.max(0.0).sqrt());
    if x < 1.0 {
        Some(2.0 * x.atanh())
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn e1() -> Direction {
        Direction::axis(2)
    }

    fn dir_with_u1(u1: f64) -> Direction {
        Direction::normalized(vec![u1, (1.0 - u1 * u1).max(0.0).sqrt()]).unwrap()
    }

    #[test]
    fn origin_distances() {
        assert_eq!(dist_origin(&BallPoint::origin(3)).unwrap(), 0.0);
        let y = BallPoint::new(vec![0.5, 0.0]).unwrap();
        assert_relative_eq!(dist_origin(&y).unwrap(), 3f64.ln(), max_relative = 1e-15);
        let far = BallPoint::new(vec![0.9999, 0.0]).unwrap();
        assert_relative_eq!(dist_origin(&far).unwrap(), 19999f64.ln(), max_relative = 1e-12);
        assert!(BallPoint::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn origin_distance_monotone() {
        let mut prev = -1.0;
        for k in 0..1000 {
            let rho = k as f64 / 1000.0;
            let d = dist_origin(&BallPoint::new(vec![0.0, rho, 0.0]).unwrap()).unwrap();
            assert!(d > prev);
            prev = d;
        }
    }

    #[test]
    fn pair_distances() {
        let x = BallPoint::new(vec![0.5, 0.0]).unwrap();
        let y = BallPoint::new(vec![-0.5, 0.0]).unwrap();
        assert_eq!(dist_pair(&x, &x).unwrap(), 0.0);
        assert_relative_eq!(
            dist_pair(&BallPoint::origin(2), &x).unwrap(),
            3f64.ln(),
            max_relative = 1e-15
        );
        assert_relative_eq!(dist_pair(&x, &y).unwrap(), 2.0 * 3f64.ln(), max_relative = 1e-15);
        assert_relative_eq!(dist_pair(&x, &y).unwrap(), dist_pair(&y, &x).unwrap());
    }

    #[test]
    fn euclidean_radius_examples() {
        assert_eq!(euclid_radius(1.0, 0.0).unwrap(), 0.5);
        assert_eq!(euclid_radius(0.0, 0.5).unwrap(), 0.75);
        assert!(euclid_radius(0.3, 1.0 - 1e-12).unwrap() < 1e-11);
        assert_eq!(euclid_radius(0.0, 0.0), Err(Error::DegenerateFlat));
    }

    #[test]
    fn cap_height_examples() {
        assert_eq!(cap_height(0.4, 0.0), 0.0);
        assert_relative_eq!(cap_height(0.0, 0.5), 0.8, max_relative = 1e-15);
        assert_relative_eq!(cap_height(1.0, 0.5), 2.0 * 1.125f64.sqrt() / 2.25, max_relative = 1e-15);
        assert_relative_eq!(cap_height(1.0, 0.5), 0.942_809_041_582_063_4, max_relative = 1e-12);
        assert_relative_eq!(cap_height(0.7, 1.0 - 1e-12), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn cap_height_strictly_increasing() {
        for &lambda in &[0.0, 0.25, 0.5, 1.0] {
            let mut prev = 0.0;
            for k in 1..1000 {
                let v = cap_height(lambda, k as f64 / 1000.0);
                assert!(v > prev && v < 1.0, "lambda {lambda}, k {k}");
                prev = v;
            }
        }
    }

    #[test]
    fn cap_height_deficit_against_exact() {
        assert_eq!(cap_height_deficit_asymptotic(0.3, 0.0), 0.0);
        assert_relative_eq!(cap_height_deficit_asymptotic(0.0, 0.01), 5.05e-5, max_relative = 1e-12);
        assert_relative_eq!(
            cap_height_deficit_asymptotic(1.0, 0.01),
            1.2625e-5,
            max_relative = 1e-12
        );
        // Exact deficit 1 - φ = 1 - √(1 - f²) = f²/(1 + √(1 - f²)), f = (1-r²)/(1+2λr+r²).
        for &lambda in &[0.0, 0.5, 1.0] {
            for &eps in &[1e-2, 1e-3] {
                let r: f64 = 1.0 - eps;
                let f = (1.0 - r * r) / (1.0 + 2.0 * lambda * r + r * r);
                let exact = f * f / (1.0 + (1.0 - f * f).sqrt());
                let approx = cap_height_deficit_asymptotic(lambda, eps);
                assert!(
                    ((approx - exact) / exact).abs() < 2.0 * eps,
                    "lambda {lambda} eps {eps}"
                );
            }
        }
    }

    #[test]
    fn cap_measure_examples() {
        assert_relative_eq!(cap_measure(2, 0.0).unwrap(), 0.5, max_relative = 1e-15);
        assert_relative_eq!(
            cap_measure(2, std::f64::consts::FRAC_1_SQRT_2).unwrap(),
            0.25,
            max_relative = 1e-14
        );
        assert_relative_eq!(cap_measure(3, 0.5).unwrap(), 0.25, max_relative = 1e-15);
        for d in 2..=8 {
            assert!((cap_measure(d, 0.0).unwrap() - 0.5).abs() < 1e-12, "d = {d}");
            assert!(cap_measure(d, 1.0).unwrap().abs() < 1e-12, "d = {d}");
        }
        assert!(cap_measure(3, 1.5).is_err());
        assert!(cap_measure(3, -0.1).is_err());
        assert!(cap_measure(1, 0.5).is_err());
    }

    // ∫_h^1 (1 - s²)^{m/2} ds by integration by parts, m = d - 3.
    fn cap_integral_recurrence(m: i32, h: f64) -> f64 {
        match m {
            -1 => h.acos(),
            0 => 1.0 - h,
            _ => {
                let mf = m as f64;
                -h * (1.0 - h * h).powf(mf / 2.0) / (mf + 1.0) + mf / (mf + 1.0) * cap_integral_recurrence(m - 2, h)
            }
        }
    }

    #[test]
    fn cap_measure_matches_elementary_recurrence() {
        for d in 2..=9 {
            let c = cap_measure_constant(d).unwrap();
            for k in 0..=20 {
                let h = k as f64 / 20.0;
                let expected = c * cap_integral_recurrence(d as i32 - 3, h);
                let got = cap_measure(d, h).unwrap();
                assert!((got - expected).abs() < 1e-13, "d {d} h {h}: {got} vs {expected}");
            }
        }
    }

    #[test]
    fn critical_radius_examples() {
        let h = 3f64.ln();
        assert_relative_eq!(critical_radius(1.0, h).unwrap(), 0.25, max_relative = 1e-14);
        assert_relative_eq!(critical_radius(1.0, 40.0).unwrap(), 1.0, max_relative = 1e-14);
        // Small-λ series: r_c ≈ λt²/(1-t²).
        let lambda = 1e-6;
        let t: f64 = (0.5f64 * 0.8).tanh();
        let series = lambda * t * t / (1.0 - t * t);
        assert_relative_eq!(critical_radius(lambda, 0.8).unwrap(), series, max_relative = 1e-5);
        assert!(critical_radius(0.0, 1.0).is_err());
    }

    #[test]
    fn critical_radius_below_endpoint() {
        for &lambda in &[1e-4, 0.1, 0.5, 1.0] {
            for &h in &[1e-3, 0.1, 1.0, 5.0, 20.0] {
                let rc = critical_radius(lambda, h).unwrap();
                assert!(rc > 0.0 && rc <= (0.5 * h).tanh(), "lambda {lambda} h {h}");
            }
        }
    }

    #[test]
    fn hit_examples() {
        let seg = SegmentSpec::new(3f64.ln(), e1()).unwrap();
        assert_relative_eq!(seg.endpoint_radius(), 0.5, max_relative = 1e-15);
        let flat = LambdaHyperplane::new(0.0, 0.0, dir_with_u1(-0.3)).unwrap();
        assert!(hits_segment(&flat, &seg));
        let horo = LambdaHyperplane::new(1.0, 0.0, dir_with_u1(-1.0)).unwrap();
        assert!(hits_segment(&horo, &seg));

        let geo = LambdaHyperplane::new(0.0, 0.3, e1()).unwrap();
        assert_relative_eq!(endpoint_threshold(0.0, 0.3, 0.5), 0.375 / 0.545, max_relative = 1e-14);
        assert!(hits_segment(&geo, &seg));
        assert!(hits_segment_bruteforce(&geo, &seg, 2));

        let beyond = LambdaHyperplane::new(0.0, 0.6, e1()).unwrap();
        assert!(!hits_segment(&beyond, &seg));

        let near = LambdaHyperplane::new(1.0, 0.1, dir_with_u1(0.9)).unwrap();
        assert_relative_eq!(
            tangent_threshold(1.0, 0.1),
            2.0 * (0.11f64 * 1.1).sqrt() / 1.21,
            max_relative = 1e-14
        );
        assert!(tangent_threshold(1.0, 0.1) < 0.575);
        assert!(hits_segment(&near, &seg));
        assert!(hits_segment_bruteforce(&near, &seg, 2));
    }

    #[test]
    fn endpoint_threshold_at_zero_curvature_matches_geodesic_case() {
        for k in 1..100 {
            let r = k as f64 / 101.0;
            let t = 0.99;
            let geodesic = (t * t * r + r) / (t * (r * r + 1.0));
            assert_eq!(endpoint_threshold(0.0, r, t), geodesic);
        }
    }

    #[test]
    fn tangent_threshold_is_cap_height() {
        for &lambda in &[0.1, 0.5, 1.0] {
            for k in 1..100 {
                let r = k as f64 / 100.0;
                assert_relative_eq!(
                    tangent_threshold(lambda, r),
                    cap_height(lambda, r),
                    max_relative = 1e-14
                );
            }
        }
    }

    #[test]
    fn ray_hits() {
        let hp = LambdaHyperplane::new(0.4, 0.3, e1()).unwrap();
        assert_relative_eq!(
            ray_first_hit(&hp, &e1()).unwrap(),
            2.0 * 0.3f64.atanh(),
            max_relative = 1e-14
        );
        assert_eq!(ray_first_hit(&hp, &Direction::new(vec![0.0, 1.0]).unwrap()), None);
        // Tangency: the double root sits at (r + R) u₁.
        let u1 = cap_height(0.4, 0.3);
        let ray = dir_with_u1(u1);
        let big_r = euclid_radius(0.4, 0.3).unwrap();
        let s = ray_first_hit(&hp, &ray).expect("tangent ray touches");
        assert_relative_eq!(s, 2.0 * ((0.3 + big_r) * u1).atanh(), max_relative = 1e-6);
        let flat = LambdaHyperplane::new(0.0, 0.0, e1()).unwrap();
        assert_eq!(ray_first_hit(&flat, &dir_with_u1(0.2)), Some(0.0));
    }

    #[test]
    fn cap_measure_from_deficit() {
        for d in 2..=6 {
            for k in 0..=40 {
                let h = k as f64 / 40.0;
                let v = cap_measure_with_deficit(d, h, 1.0 - h);
                assert!((v - cap_measure_unchecked(d, h)).abs() < 1e-14, "d {d} h {h}");
            }
            // Far below the resolution of 1 - h.
            let delta: f64 = 1e-20;
            let expected =
                cap_measure_constant(d).unwrap() * (2.0 * delta).powf(0.5 * (d as f64 - 1.0)) / (d as f64 - 1.0);
            assert_relative_eq!(cap_measure_with_deficit(d, 1.0, delta), expected, max_relative = 1e-9);
        }
    }

    #[test]
    fn shadow_half_angle_matches_arccos() {
        for &lambda in &[0.0, 0.5, 1.0] {
            for k in 0..100 {
                let r = k as f64 / 100.0;
                assert_relative_eq!(
                    shadow_half_angle(lambda, r),
                    cap_height(lambda, r).acos(),
                    epsilon = 1e-12
                );
            }
        }
        // Near the boundary arccos loses digits; the deficit is ε/(1+λ) to leading order.
        let eps = 1e-9;
        assert_relative_eq!(shadow_half_angle(1.0, 1.0 - eps), eps / 2.0, max_relative = 1e-8);
    }

    #[test]
    fn shadow_cap_membership() {
        let cap = LambdaHyperplane::new(0.0, 0.5, e1()).unwrap().shadow();
        assert_relative_eq!(cap.height, 0.8, max_relative = 1e-15);
        assert!(cap.contains(&dir_with_u1(0.81)));
        assert!(!cap.contains(&dir_with_u1(0.79)));
        assert_relative_eq!(cap.half_angle(), 0.8f64.acos());
    }

    #[test]
    fn direction_validation() {
        assert!(Direction::new(vec![1.0, 1e-13]).is_ok());
        assert!(Direction::new(vec![1.0, 1e-3]).is_err());
        assert!(Direction::normalized(vec![0.0, 0.0]).is_err());
        let d: Direction = serde_json::from_str("[0.6, 0.8]").unwrap();
        assert_eq!(d.coords(), &[0.6, 0.8]);
        assert!(serde_json::from_str::<Direction>("[0.6, 0.9]").is_err());
    }

    proptest! {
        #[test]
        fn ray_hit_iff_in_shadow(lambda in 0.0f64..=1.0, r in 1e-6f64..0.999, u1 in -1.0f64..=1.0) {
            let phi = cap_height(lambda, r);
            prop_assume!((u1 - phi).abs() > 1e-9);
            let hp = LambdaHyperplane::new(lambda, r, e1()).unwrap();
            let hit = ray_first_hit(&hp, &dir_with_u1(u1));
            prop_assert_eq!(hit.is_some(), u1 >= phi);
            if let Some(s) = hit {
                prop_assert!(s >= 2.0 * r.atanh() * (1.0 - 1e-12));
            }
        }

        #[test]
        fn distance_symmetric_and_triangle(
            a in proptest::collection::vec(-0.5f64..0.5, 3),
            b in proptest::collection::vec(-0.5f64..0.5, 3),
        ) {
            let (x, y) = (BallPoint::new(a).unwrap(), BallPoint::new(b).unwrap());
            let o = BallPoint::origin(3);
            let dxy = dist_pair(&x, &y).unwrap();
            prop_assert!((dxy - dist_pair(&y, &x).unwrap()).abs() < 1e-12);
            prop_assert!(dxy <= dist_origin(&x).unwrap() + dist_origin(&y).unwrap() + 1e-12);
            prop_assert!((dist_pair(&o, &x).unwrap() - dist_origin(&x).unwrap()).abs() < 1e-12);
        }
    }
}
