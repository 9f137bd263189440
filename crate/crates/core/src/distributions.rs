//! Univariate forecast densities.
//!
//! Two base families are supported: finite Gaussian mixtures and
//! piecewise-uniform tables. Either can be pushed forward through a smooth
//! strictly monotone [`Transform`], which gives a [`TransformedDensity`].
//! [`Forecast`] wraps both and carries the JSON density specification.

use std::cmp::Ordering;
use std::f64::consts::{LN_2, PI, SQRT_2};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StandardUniform};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::quadrature::{integrate_with_breaks, Tolerance};

/// Half-width of the truncated Gaussian support, in standard deviations.
pub const SUPPORT_SIGMAS: f64 = 12.0;

/// Tolerance on the sum of mixture weights or segment masses.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Final bracket width of the quantile bisection.
pub const QUANTILE_TOL: f64 = 1e-12;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn std_normal_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

pub fn std_normal_ln_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

/// Φ(z), accurate in the lower tail.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

/// 1 − Φ(z), accurate in the upper tail.
pub fn std_normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / SQRT_2)
}

/// Common interface for every forecast density.
///
/// The methods are unchecked evaluations; the free functions in this module
/// ([`pdf`], [`cdf`], [`quantile`], ...) validate their arguments.
pub trait Density: std::fmt::Debug + Send + Sync {
    fn pdf(&self, x: f64) -> f64;

    fn ln_pdf(&self, x: f64) -> f64 {
        self.pdf(x).ln()
    }

    fn cdf(&self, x: f64) -> f64;

    /// Survival function 1 − cdf(x).
    fn sf(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }

    /// 2·cdf(x) − 1, the outcome-derivative of the CRPS.
    ///
    /// Implementations should keep full relative precision where the density
    /// vanishes, so that a median inside an empty gap can still be located.
    fn median_balance(&self, x: f64) -> f64 {
        self.cdf(x) - self.sf(x)
    }

    /// Interval outside which the density is negligible at every stated tolerance.
    fn support(&self) -> (f64, f64);

    /// Points where quadrature panels should start: modes, kinks, jumps.
    fn breakpoints(&self) -> Vec<f64>;

    /// One independent draw.
    fn draw(&self, rng: &mut dyn RngCore) -> f64;

    /// ∫ p^α in closed form, when available.
    fn lp_norm_closed_form(&self, _alpha: f64) -> Option<f64> {
        None
    }

    /// (mean, stddev) when the density is a single Gaussian.
    fn as_single_gaussian(&self) -> Option<(f64, f64)> {
        None
    }

    /// The components, when the density is a Gaussian mixture.
    fn gaussian_components(&self) -> Option<Vec<GaussianComponent>> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    #[serde(rename = "w")]
    pub weight: f64,
    #[serde(rename = "mu")]
    pub mean: f64,
    #[serde(rename = "sigma")]
    pub stddev: f64,
}

impl GaussianComponent {
    pub fn new(weight: f64, mean: f64, stddev: f64) -> Result<Self> {
        let c = GaussianComponent {
            weight,
            mean,
            stddev,
        };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        if !self.mean.is_finite() {
            return Err(Error::density(format!("mean must be finite, got {}", self.mean)));
        }
        if !(self.stddev > 0.0 && self.stddev.is_finite()) {
            return Err(Error::density("stddev must be positive"));
        }
        if !(0.0..=1.0).contains(&self.weight) {
            return Err(Error::density(format!(
                "weight must lie in [0, 1], got {}",
                self.weight
            )));
        }
        Ok(())
    }

    fn z(&self, x: f64) -> f64 {
        (x - self.mean) / self.stddev
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    components: Vec<GaussianComponent>,
}

impl GaussianMixture {
    pub fn new(components: Vec<GaussianComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::density("mixture needs at least one component"));
        }
        for c in &components {
            c.validate()?;
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::density(format!(
                "weights must sum to 1, got {total}"
            )));
        }
        Ok(GaussianMixture { components })
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    fn active(&self) -> impl Iterator<Item = &GaussianComponent> {
        self.components.iter().filter(|c| c.weight > 0.0)
    }

    pub fn max_stddev(&self) -> f64 {
        self.active().map(|c| c.stddev).fold(0.0, f64::max)
    }
}

impl Density for GaussianMixture {
    fn pdf(&self, x: f64) -> f64 {
        self.active()
            .map(|c| c.weight * std_normal_pdf(c.z(x)) / c.stddev)
            .sum()
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        // log-sum-exp keeps far-tail outcomes finite
        let terms: Vec<f64> = self
            .active()
            .map(|c| c.weight.ln() + std_normal_ln_pdf(c.z(x)) - c.stddev.ln())
            .collect();
        let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return m;
        }
        m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
    }

    fn cdf(&self, x: f64) -> f64 {
        self.active()
            .map(|c| c.weight * std_normal_cdf(c.z(x)))
            .sum::<f64>()
            .min(1.0)
    }

    fn sf(&self, x: f64) -> f64 {
        self.active()
            .map(|c| c.weight * std_normal_sf(c.z(x)))
            .sum::<f64>()
            .min(1.0)
    }

    fn median_balance(&self, x: f64) -> f64 {
        // Σ w·sign(z) is exact for balanced weights; the tail terms then carry
        // the whole value with full relative precision.
        let mut weight_part = 0.0;
        let mut tail_part = 0.0;
        for c in self.active() {
            let z = c.z(x);
            if z.abs() < 0.5 {
                // 1 − 2·sf(z) cancels near the centre
                tail_part += c.weight * libm::erf(z * std::f64::consts::FRAC_1_SQRT_2);
            } else if z >= 0.0 {
                weight_part += c.weight;
                tail_part -= 2.0 * c.weight * std_normal_sf(z);
            } else {
                weight_part -= c.weight;
                tail_part += 2.0 * c.weight * std_normal_cdf(z);
            }
        }
        weight_part + tail_part
    }

    fn support(&self) -> (f64, f64) {
        let lo = self
            .active()
            .map(|c| c.mean - SUPPORT_SIGMAS * c.stddev)
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .active()
            .map(|c| c.mean + SUPPORT_SIGMAS * c.stddev)
            .fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut pts = Vec::new();
        for c in self.active() {
            pts.push(c.mean);
            for k in [1.0, 3.0, 6.0, 10.0] {
                pts.push(c.mean - k * c.stddev);
                pts.push(c.mean + k * c.stddev);
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    fn draw(&self, rng: &mut dyn RngCore) -> f64 {
        let u: f64 = StandardUniform.sample(rng);
        let mut acc = 0.0;
        let mut chosen = self.active().last().expect("non-empty mixture");
        for c in self.active() {
            acc += c.weight;
            if u < acc {
                chosen = c;
                break;
            }
        }
        let z: f64 = StandardNormal.sample(rng);
        chosen.mean + chosen.stddev * z
    }

    fn lp_norm_closed_form(&self, alpha: f64) -> Option<f64> {
        let (_, sigma) = self.as_single_gaussian()?;
        Some(gaussian_lp_norm(sigma, alpha))
    }

    fn gaussian_components(&self) -> Option<Vec<GaussianComponent>> {
        Some(self.active().copied().collect())
    }

    fn as_single_gaussian(&self) -> Option<(f64, f64)> {
        let mut it = self.active();
        let c = it.next()?;
        match it.next() {
            None => Some((c.mean, c.stddev)),
            Some(_) => None,
        }
    }
}

/// ∫ N(z; μ, σ²)^α dz = (2π)^((1−α)/2) α^(−1/2) σ^(1−α).
pub fn gaussian_lp_norm(sigma: f64, alpha: f64) -> f64 {
    (2.0 * PI).powf(0.5 * (1.0 - alpha)) * alpha.powf(-0.5) * sigma.powf(1.0 - alpha)
}

/// Piecewise-constant density on consecutive segments.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseUniform {
    breaks: Vec<f64>,
    masses: Vec<f64>,
    /// Cumulative mass at each break.
    cumulative: Vec<f64>,
}

impl PiecewiseUniform {
    pub fn new(breaks: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if breaks.len() < 2 || masses.len() + 1 != breaks.len() {
            return Err(Error::density(format!(
                "piecewise-uniform needs n+1 breaks for n masses, got {} breaks and {} masses",
                breaks.len(),
                masses.len()
            )));
        }
        if breaks.iter().any(|b| !b.is_finite()) {
            return Err(Error::density("breaks must be finite"));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::density("breaks must be strictly increasing"));
        }
        if masses.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
            return Err(Error::density("segment masses must be non-negative"));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::density(format!(
                "segment masses must sum to 1, got {total}"
            )));
        }
        let mut cumulative = Vec::with_capacity(breaks.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for m in &masses {
            acc += m;
            cumulative.push(acc);
        }
        Ok(PiecewiseUniform {
            breaks,
            masses,
            cumulative,
        })
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    fn segment(&self, x: f64) -> Option<usize> {
        let n = self.masses.len();
        if x < self.breaks[0] || x > self.breaks[n] {
            return None;
        }
        // half-open segments, the last one closed
        let i = self.breaks.partition_point(|b| *b <= x);
        Some(i.saturating_sub(1).min(n - 1))
    }

    fn height(&self, i: usize) -> f64 {
        self.masses[i] / (self.breaks[i + 1] - self.breaks[i])
    }

    /// Exact inverse cdf; a plateau at level p resolves to its midpoint.
    fn invert(&self, p: f64) -> f64 {
        let n = self.masses.len();
        let first = self.cumulative.partition_point(|c| *c < p);
        let last = self.cumulative.partition_point(|c| *c <= p);
        if first < last {
            // cumulative == p on breaks[first..last]
            let lo = self.breaks[first];
            let hi = self.breaks[last - 1];
            if first > 0 && last - 1 < n && hi > lo {
                return 0.5 * (lo + hi);
            }
            return if first == 0 { hi } else { lo };
        }
        let i = (first - 1).min(n - 1);
        let frac = (p - self.cumulative[i]) / self.masses[i];
        self.breaks[i] + frac * (self.breaks[i + 1] - self.breaks[i])
    }
}

impl Density for PiecewiseUniform {
    fn pdf(&self, x: f64) -> f64 {
        self.segment(x).map_or(0.0, |i| self.height(i))
    }

    fn cdf(&self, x: f64) -> f64 {
        let n = self.masses.len();
        if x <= self.breaks[0] {
            return 0.0;
        }
        if x >= self.breaks[n] {
            return 1.0;
        }
        let i = self.segment(x).expect("inside support");
        (self.cumulative[i] + self.height(i) * (x - self.breaks[i])).min(1.0)
    }

    fn support(&self) -> (f64, f64) {
        (self.breaks[0], self.breaks[self.breaks.len() - 1])
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.breaks.clone()
    }

    fn draw(&self, rng: &mut dyn RngCore) -> f64 {
        let u: f64 = StandardUniform.sample(rng);
        let mut i = self.cumulative.partition_point(|c| *c <= u).saturating_sub(1);
        i = i.min(self.masses.len() - 1);
        while self.masses[i] == 0.0 && i > 0 {
            i -= 1;
        }
        let v: f64 = StandardUniform.sample(rng);
        self.breaks[i] + v * (self.breaks[i + 1] - self.breaks[i])
    }

    fn lp_norm_closed_form(&self, alpha: f64) -> Option<f64> {
        Some(
            (0..self.masses.len())
                .map(|i| self.height(i).powf(alpha) * (self.breaks[i + 1] - self.breaks[i]))
                .sum(),
        )
    }
}

/// A normalized univariate base density.
#[derive(Debug, Clone, PartialEq)]
pub enum MixtureDensity {
    Gaussian(GaussianMixture),
    PiecewiseUniform(PiecewiseUniform),
}

impl MixtureDensity {
    pub fn gaussian(mean: f64, stddev: f64) -> Result<Self> {
        Self::gaussian_mixture(&[(1.0, mean, stddev)])
    }

    /// Mixture from `(weight, mean, stddev)` triples.
    pub fn gaussian_mixture(components: &[(f64, f64, f64)]) -> Result<Self> {
        let comps = components
            .iter()
            .map(|&(w, m, s)| GaussianComponent::new(w, m, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(MixtureDensity::Gaussian(GaussianMixture::new(comps)?))
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::piecewise_uniform(vec![lo, hi], vec![1.0])
    }

    pub fn piecewise_uniform(breaks: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        Ok(MixtureDensity::PiecewiseUniform(PiecewiseUniform::new(
            breaks, masses,
        )?))
    }

    fn inner(&self) -> &dyn Density {
        match self {
            MixtureDensity::Gaussian(g) => g,
            MixtureDensity::PiecewiseUniform(p) => p,
        }
    }
}

macro_rules! delegate_density {
    ($ty:ty, $inner:ident) => {
        impl Density for $ty {
            fn pdf(&self, x: f64) -> f64 {
                self.$inner().pdf(x)
            }
            fn ln_pdf(&self, x: f64) -> f64 {
                self.$inner().ln_pdf(x)
            }
            fn cdf(&self, x: f64) -> f64 {
                self.$inner().cdf(x)
            }
            fn sf(&self, x: f64) -> f64 {
                self.$inner().sf(x)
            }
            fn median_balance(&self, x: f64) -> f64 {
                self.$inner().median_balance(x)
            }
            fn support(&self) -> (f64, f64) {
                self.$inner().support()
            }
            fn breakpoints(&self) -> Vec<f64> {
                self.$inner().breakpoints()
            }
            fn draw(&self, rng: &mut dyn RngCore) -> f64 {
                self.$inner().draw(rng)
            }
            fn lp_norm_closed_form(&self, alpha: f64) -> Option<f64> {
                self.$inner().lp_norm_closed_form(alpha)
            }
            fn as_single_gaussian(&self) -> Option<(f64, f64)> {
                self.$inner().as_single_gaussian()
            }
            fn gaussian_components(&self) -> Option<Vec<GaussianComponent>> {
                self.$inner().gaussian_components()
            }
        }
    };
}

delegate_density!(MixtureDensity, inner);

/// A smooth strictly monotone map of the forecast variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    /// x ↦ scale·x + shift
    Affine { scale: f64, shift: f64 },
    /// x ↦ x³
    Cubic,
    /// x ↦ eˣ
    Exp,
}

impl Transform {
    pub fn identity() -> Self {
        Transform::Affine {
            scale: 1.0,
            shift: 0.0,
        }
    }

    pub fn forward(&self, x: f64) -> f64 {
        match *self {
            Transform::Affine { scale, shift } => scale * x + shift,
            Transform::Cubic => x * x * x,
            Transform::Exp => x.exp(),
        }
    }

    /// φ⁻¹(y); NaN outside the range of φ.
    pub fn inverse(&self, y: f64) -> f64 {
        match *self {
            Transform::Affine { scale, shift } => (y - shift) / scale,
            Transform::Cubic => y.cbrt(),
            Transform::Exp => {
                if y > 0.0 {
                    y.ln()
                } else {
                    f64::NAN
                }
            }
        }
    }

    /// dφ⁻¹/dy, signed.
    pub fn inverse_derivative(&self, y: f64) -> f64 {
        match *self {
            Transform::Affine { scale, .. } => 1.0 / scale,
            Transform::Cubic => {
                let c = y.abs().cbrt();
                1.0 / (3.0 * c * c)
            }
            Transform::Exp => {
                if y > 0.0 {
                    1.0 / y
                } else {
                    f64::NAN
                }
            }
        }
    }

    pub fn is_increasing(&self) -> bool {
        match *self {
            Transform::Affine { scale, .. } => scale > 0.0,
            Transform::Cubic | Transform::Exp => true,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Transform::Affine { .. } => "affine",
            Transform::Cubic => "cubic",
            Transform::Exp => "exp",
        }
    }

    fn params(&self) -> Vec<f64> {
        match *self {
            Transform::Affine { scale, shift } => vec![scale, shift],
            Transform::Cubic | Transform::Exp => Vec::new(),
        }
    }

    pub fn from_kind(kind: &str, params: &[f64]) -> Result<Self> {
        let t = match (kind, params) {
            ("affine", [scale, shift]) => Transform::Affine {
                scale: *scale,
                shift: *shift,
            },
            ("affine", [scale]) => Transform::Affine {
                scale: *scale,
                shift: 0.0,
            },
            ("affine", _) => {
                return Err(Error::density(
                    "affine transform takes params [scale, shift]",
                ))
            }
            ("cubic", []) => Transform::Cubic,
            ("exp", []) => Transform::Exp,
            ("cubic" | "exp", _) => {
                return Err(Error::density(format!("{kind} transform takes no params")))
            }
            _ => return Err(Error::density(format!("unknown transform kind '{kind}'"))),
        };
        if t.params().iter().any(|p| !p.is_finite()) {
            return Err(Error::density("transform params must be finite"));
        }
        Ok(t)
    }

    /// Checks strict monotonicity and the inverse round trip on a grid over `[lo, hi]`.
    pub fn validate_on(&self, lo: f64, hi: f64) -> Result<()> {
        const GRID: usize = 257;
        let mut prev: Option<f64> = None;
        for i in 0..GRID {
            let x = lo + (hi - lo) * i as f64 / (GRID - 1) as f64;
            let y = self.forward(x);
            if !y.is_finite() {
                return Err(Error::density(format!(
                    "{} transform is not finite at {x}",
                    self.kind()
                )));
            }
            if let Some(p) = prev {
                let ok = if self.is_increasing() { y > p } else { y < p };
                if !ok {
                    return Err(Error::density(format!(
                        "{} transform is not strictly monotone on [{lo}, {hi}]",
                        self.kind()
                    )));
                }
            }
            prev = Some(y);
            let back = self.forward(self.inverse(y));
            if (back - y).abs() > 1e-10 * y.abs().max(1.0) {
                return Err(Error::density(format!(
                    "{} transform inverse does not round-trip at {x}",
                    self.kind()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TransformJson {
    kind: String,
    #[serde(default)]
    params: Vec<f64>,
}

impl Serialize for Transform {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TransformJson {
            kind: self.kind().to_string(),
            params: self.params(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Transform {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = TransformJson::deserialize(d)?;
        Transform::from_kind(&raw.kind, &raw.params).map_err(serde::de::Error::custom)
    }
}

/// Density of φ(X) for X drawn from `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedDensity {
    base: MixtureDensity,
    transform: Transform,
}

impl TransformedDensity {
    pub fn base(&self) -> &MixtureDensity {
        &self.base
    }

    pub fn transform(&self) -> Transform {
        self.transform
    }

    fn pull(&self, y: f64) -> Option<f64> {
        let x = self.transform.inverse(y);
        x.is_finite().then_some(x)
    }
}

impl Density for TransformedDensity {
    fn pdf(&self, y: f64) -> f64 {
        match self.pull(y) {
            Some(x) => {
                let p = self.base.pdf(x);
                if p == 0.0 {
                    0.0
                } else {
                    p * self.transform.inverse_derivative(y).abs()
                }
            }
            None => 0.0,
        }
    }

    fn ln_pdf(&self, y: f64) -> f64 {
        match self.pull(y) {
            Some(x) => self.base.ln_pdf(x) + self.transform.inverse_derivative(y).abs().ln(),
            None => f64::NEG_INFINITY,
        }
    }

    fn cdf(&self, y: f64) -> f64 {
        let inc = self.transform.is_increasing();
        match self.pull(y) {
            Some(x) if inc => self.base.cdf(x),
            Some(x) => self.base.sf(x),
            // outside the range of an increasing map: below it
            None => 0.0,
        }
    }

    fn sf(&self, y: f64) -> f64 {
        let inc = self.transform.is_increasing();
        match self.pull(y) {
            Some(x) if inc => self.base.sf(x),
            Some(x) => self.base.cdf(x),
            None => 1.0,
        }
    }

    fn median_balance(&self, y: f64) -> f64 {
        match self.pull(y) {
            Some(x) if self.transform.is_increasing() => self.base.median_balance(x),
            Some(x) => -self.base.median_balance(x),
            None => -1.0,
        }
    }

    fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.base.support();
        let (a, b) = (self.transform.forward(lo), self.transform.forward(hi));
        (a.min(b), a.max(b))
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .base
            .breakpoints()
            .into_iter()
            .map(|x| self.transform.forward(x))
            .collect();
        if let Transform::Cubic = self.transform {
            // inverse-derivative singularity
            pts.push(0.0);
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    fn draw(&self, rng: &mut dyn RngCore) -> f64 {
        self.transform.forward(self.base.draw(rng))
    }

    fn lp_norm_closed_form(&self, alpha: f64) -> Option<f64> {
        match self.transform {
            Transform::Affine { scale, .. } => self
                .base
                .lp_norm_closed_form(alpha)
                .map(|v| v * scale.abs().powf(1.0 - alpha)),
            _ => None,
        }
    }

    fn as_single_gaussian(&self) -> Option<(f64, f64)> {
        match self.transform {
            Transform::Affine { scale, shift } => self
                .base
                .as_single_gaussian()
                .map(|(m, s)| (scale * m + shift, s * scale.abs())),
            _ => None,
        }
    }

    fn gaussian_components(&self) -> Option<Vec<GaussianComponent>> {
        match self.transform {
            Transform::Affine { scale, shift } => self.base.gaussian_components().map(|cs| {
                cs.into_iter()
                    .map(|c| GaussianComponent {
                        weight: c.weight,
                        mean: scale * c.mean + shift,
                        stddev: c.stddev * scale.abs(),
                    })
                    .collect()
            }),
            _ => None,
        }
    }
}

/// Push `d` forward through `t`, rejecting maps that are not strictly monotone
/// on the truncated support of `d`.
pub fn pushforward(d: &MixtureDensity, t: Transform) -> Result<TransformedDensity> {
    let (lo, hi) = d.support();
    t.validate_on(lo, hi)?;
    Ok(TransformedDensity {
        base: d.clone(),
        transform: t,
    })
}

/// Any forecast density: a base density, optionally pushed through a transform.
#[derive(Debug, Clone, PartialEq)]
pub enum Forecast {
    Base(MixtureDensity),
    Transformed(TransformedDensity),
}

impl Forecast {
    pub fn gaussian(mean: f64, stddev: f64) -> Result<Self> {
        MixtureDensity::gaussian(mean, stddev).map(Forecast::Base)
    }

    pub fn gaussian_mixture(components: &[(f64, f64, f64)]) -> Result<Self> {
        MixtureDensity::gaussian_mixture(components).map(Forecast::Base)
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        MixtureDensity::uniform(lo, hi).map(Forecast::Base)
    }

    pub fn piecewise_uniform(breaks: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        MixtureDensity::piecewise_uniform(breaks, masses).map(Forecast::Base)
    }

    pub fn transformed(self, t: Transform) -> Result<Self> {
        match self {
            Forecast::Base(b) => pushforward(&b, t).map(Forecast::Transformed),
            Forecast::Transformed(_) => Err(Error::density(
                "nested transforms are not supported",
            )),
        }
    }

    pub fn base(&self) -> &MixtureDensity {
        match self {
            Forecast::Base(b) => b,
            Forecast::Transformed(t) => &t.base,
        }
    }

    pub fn as_gaussian_mixture(&self) -> Option<&GaussianMixture> {
        match self {
            Forecast::Base(MixtureDensity::Gaussian(g)) => Some(g),
            _ => None,
        }
    }

    /// Parse the JSON density specification.
    pub fn from_json(s: &str) -> Result<Self> {
        let raw: DensityJson =
            serde_json::from_str(s).map_err(|e| Error::density(e.to_string()))?;
        Forecast::try_from(raw)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("density serializes")
    }

    fn inner(&self) -> &dyn Density {
        match self {
            Forecast::Base(b) => b,
            Forecast::Transformed(t) => t,
        }
    }
}

delegate_density!(Forecast, inner);

impl From<MixtureDensity> for Forecast {
    fn from(d: MixtureDensity) -> Self {
        Forecast::Base(d)
    }
}

impl From<TransformedDensity> for Forecast {
    fn from(d: TransformedDensity) -> Self {
        Forecast::Transformed(d)
    }
}

/// Wire form of a density: `{"type":"gaussian_mixture","components":[...]}`
/// or `{"type":"piecewise_uniform","breaks":[...],"masses":[...]}`, with an
/// optional `"transform":{"kind":...,"params":[...]}` member.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityJson {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<GaussianComponent>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breaks: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masses: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<TransformJsonRaw>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransformJsonRaw {
    pub kind: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

impl TryFrom<DensityJson> for Forecast {
    type Error = Error;

    fn try_from(raw: DensityJson) -> Result<Self> {
        let base = match raw.kind.as_str() {
            "gaussian_mixture" => {
                let comps = raw
                    .components
                    .ok_or_else(|| Error::density("gaussian_mixture needs 'components'"))?;
                MixtureDensity::Gaussian(GaussianMixture::new(comps)?)
            }
            "piecewise_uniform" => {
                let breaks = raw
                    .breaks
                    .ok_or_else(|| Error::density("piecewise_uniform needs 'breaks'"))?;
                let masses = raw
                    .masses
                    .ok_or_else(|| Error::density("piecewise_uniform needs 'masses'"))?;
                MixtureDensity::piecewise_uniform(breaks, masses)?
            }
            other => return Err(Error::density(format!("unknown density type '{other}'"))),
        };
        match raw.transform {
            None => Ok(Forecast::Base(base)),
            Some(t) => {
                let t = Transform::from_kind(&t.kind, &t.params)?;
                Ok(Forecast::Transformed(pushforward(&base, t)?))
            }
        }
    }
}

impl From<&Forecast> for DensityJson {
    fn from(f: &Forecast) -> Self {
        let mut raw = match f.base() {
            MixtureDensity::Gaussian(g) => DensityJson {
                kind: "gaussian_mixture".into(),
                components: Some(g.components.clone()),
                breaks: None,
                masses: None,
                transform: None,
            },
            MixtureDensity::PiecewiseUniform(p) => DensityJson {
                kind: "piecewise_uniform".into(),
                components: None,
                breaks: Some(p.breaks.clone()),
                masses: Some(p.masses.clone()),
                transform: None,
            },
        };
        if let Forecast::Transformed(t) = f {
            raw.transform = Some(TransformJsonRaw {
                kind: t.transform.kind().into(),
                params: t.transform.params(),
            });
        }
        raw
    }
}

impl Serialize for Forecast {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DensityJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Forecast {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = DensityJson::deserialize(d)?;
        Forecast::try_from(raw).map_err(serde::de::Error::custom)
    }
}

// Checked operations.

pub fn pdf<D: Density + ?Sized>(d: &D, x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(d.pdf(x))
}

pub fn cdf<D: Density + ?Sized>(d: &D, x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(d.cdf(x))
}

/// Inverse cdf by bracketed bisection to [`QUANTILE_TOL`].
///
/// No derivative is used, so plateaus between mixture modes are safe; when
/// the cdf equals `p` over an interval the midpoint is returned. The sign
/// test uses the survival function above p = 0.5 and the median balance at
/// p = 0.5 so that tails and empty gaps keep their precision.
pub fn quantile<D: Density + ?Sized>(d: &D, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("quantile level must lie in (0, 1), got {p}")));
    }
    // sign of cdf(x) − p
    let cmp = |x: f64| -> Ordering {
        let v = if p == 0.5 {
            d.median_balance(x)
        } else if p < 0.5 {
            d.cdf(x) - p
        } else {
            (1.0 - p) - d.sf(x)
        };
        v.partial_cmp(&0.0).unwrap_or(Ordering::Equal)
    };
    let (mut lo, mut hi) = d.support();
    let mut width = (hi - lo).max(1.0);
    let mut guard = 0;
    while cmp(lo) != Ordering::Less {
        lo -= width;
        width *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::NotBracketed { lo, hi });
        }
    }
    while cmp(hi) != Ordering::Greater {
        hi += width;
        width *= 2.0;
        guard += 1;
        if guard > 120 {
            return Err(Error::NotBracketed { lo, hi });
        }
    }
    let bisect = |below: &dyn Fn(f64) -> bool| {
        let (mut a, mut b) = (lo, hi);
        while b - a > QUANTILE_TOL {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if below(mid) {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    let left = bisect(&|x| cmp(x) == Ordering::Less);
    let right = bisect(&|x| cmp(x) != Ordering::Greater);
    Ok(0.5 * (left + right))
}

pub fn median<D: Density + ?Sized>(d: &D) -> Result<f64> {
    quantile(d, 0.5)
}

/// Exact quantile for piecewise-uniform tables.
pub fn piecewise_quantile(d: &PiecewiseUniform, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("quantile level must lie in (0, 1), got {p}")));
    }
    Ok(d.invert(p))
}

/// The generator behind every seeded sampling path.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` independent draws, deterministic in `seed`.
pub fn sample<D: Density + ?Sized>(d: &D, seed: u64, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("sample size must be at least 1"));
    }
    let mut rng = seeded_rng(seed, 0);
    Ok((0..n).map(|_| d.draw(&mut rng)).collect())
}

/// ∫ p(z)^α dz for α > 1: closed form where available, quadrature otherwise.
pub fn lp_norm_integral<D: Density + ?Sized>(d: &D, alpha: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("alpha must exceed 1, got {alpha}")));
    }
    match d.lp_norm_closed_form(alpha) {
        Some(v) => Ok(v),
        None => lp_norm_integral_quadrature(d, alpha),
    }
}

/// Quadrature route for ∫ p^α, used for mixtures and to cross-check the closed forms.
pub fn lp_norm_integral_quadrature<D: Density + ?Sized>(d: &D, alpha: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("alpha must exceed 1, got {alpha}")));
    }
    let (lo, hi) = d.support();
    let breaks = d.breakpoints();
    let r = integrate_with_breaks(
        |x| {
            let p = d.pdf(x);
            if p > 0.0 {
                (alpha * p.ln()).exp()
            } else {
                0.0
            }
        },
        lo,
        hi,
        &breaks,
        Tolerance::new(1e-12, 1e-11),
    )?;
    Ok(r.value)
}

/// −log₂ of a density value; +∞ for zero density.
pub(crate) fn bits_from_ln(ln_p: f64) -> f64 {
    -ln_p / LN_2
}
