//! Deterministic adaptive quadrature.
//!
//! Globally adaptive Gauss–Kronrod (7/15 point) integration: the panel with
//! the largest error estimate is bisected until the summed estimate meets the
//! tolerance. Callers can seed panel boundaries (component means, kinks,
//! discontinuities) so that narrow features are never stepped over.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::distributions::Density;
use crate::error::{Error, Result};

pub const DEFAULT_ABS_TOL: f64 = 1e-10;
pub const DEFAULT_REL_TOL: f64 = 1e-9;
pub const MAX_SUBDIVISIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: DEFAULT_ABS_TOL,
            rel: DEFAULT_REL_TOL,
        }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    /// Tolerance scaled down by `factor`, for integrals nested inside other integrals.
    pub fn tighter(self, factor: f64) -> Self {
        Tolerance {
            abs: self.abs / factor,
            rel: self.rel / factor,
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Error is at the roundoff floor; bisecting further cannot reduce it.
    settled: bool,
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
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    if !resk.is_finite() {
        return Err(Error::domain(format!(
            "integrand is not finite on [{a}, {b}]"
        )));
    }
    let reskh = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let value = resk * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut error = ((resk - resg) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    let settled = error <= floor;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(floor);
    }
    Ok(Panel {
        a,
        b,
        value,
        error,
        settled,
    })
}

/// Neumaier-compensated sum, in the given order.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Integrate `f` over `[lo, hi]`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: Tolerance,
) -> Result<IntegrationResult> {
    integrate_with_breaks(f, lo, hi, &[], tol)
}

/// Integrate `f` over `[lo, hi]` with initial panel boundaries at `breaks`.
///
/// Breaks outside the open interval are ignored. Requests tighter than the
/// roundoff floor of the integrand are satisfied at that floor.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<IntegrationResult> {
    integrate_limited(f, lo, hi, breaks, tol, MAX_SUBDIVISIONS)
}

/// As [`integrate_with_breaks`] with at most `limit` subdivisions.
pub fn integrate_limited<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    tol: Tolerance,
    limit: usize,
) -> Result<IntegrationResult> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::domain(format!(
            "integration limits must be finite, got [{lo}, {hi}]"
        )));
    }
    if lo > hi {
        return Err(Error::domain(format!(
            "lower limit {lo} exceeds upper limit {hi}"
        )));
    }
    if lo == hi {
        return Ok(IntegrationResult {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions: 0,
        });
    }

    let mut edges: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > lo && *x < hi)
        .collect();
    edges.push(lo);
    edges.push(hi);
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    let mut heap = BinaryHeap::new();
    let mut settled = Vec::new();
    let mut total_value = 0.0;
    let mut total_error = 0.0;
    for w in edges.windows(2) {
        let p = kronrod15(&f, w[0], w[1])?;
        total_value += p.value;
        total_error += p.error;
        if p.settled {
            settled.push(p);
        } else {
            heap.push(p);
        }
    }

    let mut subdivisions = 0usize;
    loop {
        if total_error <= tol.target(total_value) || heap.is_empty() {
            // Recompute the running sums exactly before accepting.
            let (value, error) = totals(&heap, &settled);
            if error <= tol.target(value) || heap.is_empty() {
                return Ok(IntegrationResult {
                    value,
                    error_estimate: error,
                    subdivisions,
                });
            }
            total_value = value;
            total_error = error;
        }
        if subdivisions >= limit {
            let (value, error) = totals(&heap, &settled);
            return Err(Error::Quadrature {
                best_estimate: value,
                error_estimate: error,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap checked non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            settled.push(Panel {
                settled: true,
                ..worst
            });
            continue;
        }
        let left = kronrod15(&f, worst.a, mid)?;
        let right = kronrod15(&f, mid, worst.b)?;
        subdivisions += 1;
        total_value += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        for p in [left, right] {
            if p.settled {
                settled.push(p);
            } else {
                heap.push(p);
            }
        }
    }
}

fn totals(heap: &BinaryHeap<Panel>, settled: &[Panel]) -> (f64, f64) {
    let mut panels: Vec<&Panel> = heap.iter().chain(settled.iter()).collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = compensated_sum(panels.iter().map(|p| p.value));
    let error = compensated_sum(panels.iter().map(|p| p.error));
    (value, error)
}

/// Expectation of `f` under density `d`, integrated over the truncated support
/// with panels seeded at the density's breakpoints.
pub fn expectation<D, F>(d: &D, f: F, tol: Tolerance) -> Result<f64>
where
    D: Density + ?Sized,
    F: Fn(f64) -> f64,
{
    let (lo, hi) = d.support();
    let breaks = d.breakpoints();
    integrate_with_breaks(
        |x| {
            let p = d.pdf(x);
            if p == 0.0 {
                0.0
            } else {
                f(x) * p
            }
        },
        lo,
        hi,
        &breaks,
        tol,
    )
    .map(|r| r.value)
}
