use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{domain, Error, Result};

/// Relative tolerance used by every measure routine unless overridden.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Hard cap on the number of panels produced by bisection.
pub const MAX_SUBDIVISIONS: usize = 10_000;

// 21-point Kronrod extension of the 10-point Gauss-Legendre rule (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_720_658_318_563,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Outcome of a quadrature run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One Gauss-Kronrod 10/21 panel with the QUADPACK error heuristic.
fn gauss_kronrod_21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_kronrod = WGK[10] * f_center;
    let mut res_gauss = 0.0;
    let mut res_abs = res_kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    // Dividing by the rule's own weight sum makes constants integrate exactly.
    let weight_sum = WGK[..10].iter().fold(WGK[10], |acc, w| acc + 2.0 * w);
    let value = res_kronrod * (2.0 / weight_sum) * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_kronrod - res_gauss) * half).abs();

    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }

    Panel { a, b, value, error }
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate drops below `rel_tol * |value|`. Panels narrower than a few ulps are
/// never split again; if the budget is still not met after
/// [`MAX_SUBDIVISIONS`] bisections the partial result is returned inside
/// [`Error::NonConvergence`].
pub fn adaptive_integrate<F>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(domain(format!("integration bounds must satisfy a < b, got [{a}, {b}]")));
    }
    if !(rel_tol > 0.0) {
        return Err(domain(format!("rel_tol must be positive, got {rel_tol}")));
    }

    let first = gauss_kronrod_21(&f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    // Panels that cannot be bisected further still count towards the totals.
    let mut frozen_error = 0.0;
    let mut frozen_value = 0.0;
    heap.push(first);
    let mut subdivisions = 0;

    loop {
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::NonConvergence {
                partial: value,
                abs_error: error,
                subdivisions,
            });
        }
        if error <= rel_tol * value.abs() || error == 0.0 {
            // Confirm against exact sums before trusting the running totals.
            value = heap.iter().map(|p| p.value).sum::<f64>() + frozen_value;
            error = heap.iter().map(|p| p.error).sum::<f64>() + frozen_error;
            if error <= rel_tol * value.abs() || error == 0.0 {
                break;
            }
        }
        let Some(worst) = heap.pop() else {
            // Only unsplittable panels remain; roundoff dominates.
            if frozen_error <= rel_tol * value.abs().max(1.0) {
                break;
            }
            return Err(Error::NonConvergence {
                partial: value,
                abs_error: error,
                subdivisions,
            });
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) <= 8.0 * f64::EPSILON * mid.abs() {
            frozen_error += worst.error;
            frozen_value += worst.value;
            continue;
        }
        if subdivisions >= MAX_SUBDIVISIONS {
            return Err(Error::NonConvergence {
                partial: value,
                abs_error: error,
                subdivisions,
            });
        }
        let left = gauss_kronrod_21(&f, worst.a, mid);
        let right = gauss_kronrod_21(&f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }

    // Re-sum to shed the drift of the running updates.
    let value = heap.iter().map(|p| p.value).sum::<f64>() + frozen_value;
    let abs_error_estimate = error.max(0.0);
    Ok(QuadratureResult {
        value,
        abs_error_estimate,
        subdivisions,
    })
}

/// Integrates piecewise over consecutive `breakpoints` (which must be strictly
/// increasing), each piece with its own relative budget.
pub fn adaptive_integrate_breakpoints<F>(f: F, breakpoints: &[f64], rel_tol: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    if breakpoints.len() < 2 {
        return Err(domain("at least two breakpoints are required"));
    }
    let mut total = QuadratureResult {
        value: 0.0,
        abs_error_estimate: 0.0,
        subdivisions: 0,
    };
    for w in breakpoints.windows(2) {
        let piece = adaptive_integrate(&f, w[0], w[1], rel_tol)?;
        total.value += piece.value;
        total.abs_error_estimate += piece.abs_error_estimate;
        total.subdivisions += piece.subdivisions;
    }
    Ok(total)
}

/// Integrates `f` over `[a, ∞)` for integrands with an exponentially decaying
/// tail. Consecutive panels of doubling width are added until both the
/// integrand at the panel end and the panel's contribution fall below
/// `1e-18` of the running value.
///
/// Returns the result together with the truncation point.
pub fn integrate_semi_infinite<F>(f: F, a: f64, rel_tol: f64) -> Result<(QuadratureResult, f64)>
where
    F: Fn(f64) -> f64,
{
    const TAIL_RATIO: f64 = 1e-18;
    const MAX_PANELS: usize = 200;

    let mut total = QuadratureResult {
        value: 0.0,
        abs_error_estimate: 0.0,
        subdivisions: 0,
    };
    let mut lo = a;
    let mut width = 1.0;
    for _ in 0..MAX_PANELS {
        let hi = lo + width;
        let piece = adaptive_integrate(&f, lo, hi, rel_tol)?;
        total.value += piece.value;
        total.abs_error_estimate += piece.abs_error_estimate;
        total.subdivisions += piece.subdivisions;
        let scale = total.value.abs();
        if scale > 0.0 && f(hi).abs() <= TAIL_RATIO * scale && piece.value.abs() <= 1e-16 * scale {
            return Ok((total, hi));
        }
        lo = hi;
        width = (2.0 * width).min(16.0);
    }
    Err(Error::NonConvergence {
        partial: total.value,
        abs_error: f64::INFINITY,
        subdivisions: total.subdivisions,
    })
}
