//! Scoring rules at a single forecast–outcome pair. Lower is better.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distributions::{
    bits_from_ln, lp_norm_integral, seeded_rng, std_normal_cdf, std_normal_pdf, Density,
};
use crate::error::{ensure_finite, Error, Result};
use crate::quadrature::{integrate_with_breaks, Tolerance};

/// Monte-Carlo sample size used when none is given.
pub const DEFAULT_MC_SAMPLES: usize = 1_000_000;
pub const MIN_MC_SAMPLES: usize = 10_000;

/// Quadrature tolerance for the CRPS integral.
pub const CRPS_TOL: Tolerance = Tolerance {
    abs: 1e-12,
    rel: 1e-11,
};

/// A scoring rule and its family parameters.
///
/// Wire form: `{"family":"crps"}`, `{"family":"energy","beta":1.5}`,
/// `{"family":"power","alpha":2}`, `{"family":"pseudospherical","beta":2}`,
/// `{"family":"ignorance"}`, `{"family":"naive_linear"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ScoreSpec {
    Ignorance,
    Crps,
    Energy { beta: f64 },
    Power { alpha: f64 },
    Pseudospherical { beta: f64 },
    NaiveLinear,
}

/// Which terms of the decomposition S = s1(p) + s2(p, Y) + s3(p(Y)) a rule carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    /// depends on the forecast alone
    pub s1: bool,
    /// couples forecast shape and outcome
    pub s2: bool,
    /// depends on the density at the outcome only
    pub s3: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScoreMetadata {
    pub is_strictly_proper: bool,
    pub is_local: bool,
    pub decomposition: Decomposition,
}

impl ScoreSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ScoreSpec::Energy { beta } if !(beta > 0.0 && beta < 2.0) => Err(Error::InvalidScore(
                format!("energy score needs beta in (0, 2), got {beta}"),
            )),
            ScoreSpec::Power { alpha } if !(alpha > 1.0 && alpha.is_finite()) => Err(
                Error::InvalidScore(format!("power score needs alpha > 1, got {alpha}")),
            ),
            ScoreSpec::Pseudospherical { beta } if !(beta > 1.0 && beta.is_finite()) => Err(
                Error::InvalidScore(format!("pseudospherical score needs beta > 1, got {beta}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn metadata(&self) -> ScoreMetadata {
        let (s1, s2, s3) = match self {
            ScoreSpec::Ignorance | ScoreSpec::NaiveLinear => (false, false, true),
            ScoreSpec::Crps | ScoreSpec::Energy { .. } => (true, true, false),
            ScoreSpec::Power { .. } => (true, false, true),
            ScoreSpec::Pseudospherical { .. } => (false, true, false),
        };
        ScoreMetadata {
            is_strictly_proper: !matches!(self, ScoreSpec::NaiveLinear),
            is_local: !s1 && !s2,
            decomposition: Decomposition { s1, s2, s3 },
        }
    }

    pub fn needs_monte_carlo(&self) -> bool {
        matches!(self, ScoreSpec::Energy { .. })
    }

    /// Short column label, e.g. `crps`, `power_2`, `energy_1.5`.
    pub fn label(&self) -> String {
        match self {
            ScoreSpec::Ignorance => "ignorance".into(),
            ScoreSpec::Crps => "crps".into(),
            ScoreSpec::Energy { beta } => format!("energy_{beta}"),
            ScoreSpec::Power { alpha } => format!("power_{alpha}"),
            ScoreSpec::Pseudospherical { beta } => format!("pseudospherical_{beta}"),
            ScoreSpec::NaiveLinear => "naive_linear".into(),
        }
    }
}

impl fmt::Display for ScoreSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Seed and sample size for Monte-Carlo estimates. There is no implicit seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub seed: u64,
    pub samples: usize,
}

impl MonteCarlo {
    pub fn new(seed: u64) -> Self {
        MonteCarlo {
            seed,
            samples: DEFAULT_MC_SAMPLES,
        }
    }

    pub fn with_samples(seed: u64, samples: usize) -> Self {
        MonteCarlo { seed, samples }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ScoreOptions {
    /// Required by the energy family.
    pub monte_carlo: Option<MonteCarlo>,
    /// Lower bound applied to the density inside Ignorance. Off by default.
    pub ignorance_floor: Option<f64>,
}

impl ScoreOptions {
    pub fn with_monte_carlo(mc: MonteCarlo) -> Self {
        ScoreOptions {
            monte_carlo: Some(mc),
            ignorance_floor: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreValue {
    pub value: f64,
    /// Present exactly when the value is a Monte-Carlo estimate.
    pub stderr: Option<f64>,
    pub infinite: bool,
}

impl ScoreValue {
    pub fn exact(value: f64) -> Self {
        ScoreValue {
            value,
            stderr: None,
            infinite: value.is_infinite(),
        }
    }

    pub fn estimate(value: f64, stderr: f64) -> Self {
        ScoreValue {
            value,
            stderr: Some(stderr),
            infinite: false,
        }
    }
}

impl Serialize for ScoreValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("ScoreValue", 3)?;
        st.serialize_field("value", &crate::report::JsonNumber(self.value))?;
        st.serialize_field("stderr", &self.stderr.map(crate::report::JsonNumber))?;
        st.serialize_field("infinite", &self.infinite)?;
        st.end()
    }
}

/// −log₂ p(y) in bits. Zero density yields a flagged +∞, never a floored value.
pub fn ignorance<D: Density + ?Sized>(d: &D, y: f64) -> Result<ScoreValue> {
    ensure_finite("outcome", y)?;
    Ok(ScoreValue::exact(bits_from_ln(d.ln_pdf(y))))
}

/// Ignorance with the density floored at `floor` (> 0).
pub fn ignorance_floored<D: Density + ?Sized>(d: &D, y: f64, floor: f64) -> Result<ScoreValue> {
    ensure_finite("outcome", y)?;
    if !(floor > 0.0) {
        return Err(Error::domain(format!("density floor must be positive, got {floor}")));
    }
    Ok(ScoreValue::exact(bits_from_ln(d.ln_pdf(y).max(floor.ln()))))
}

/// CRPS as the integral of (F(x) − H(x − y))², split at the outcome.
pub fn crps<D: Density + ?Sized>(d: &D, y: f64) -> Result<ScoreValue> {
    ensure_finite("outcome", y)?;
    let (lo, hi) = d.support();
    let mut breaks = d.breakpoints();
    breaks.push(y);
    let lower = |a: f64, b: f64| {
        integrate_with_breaks(|x| d.cdf(x).powi(2), a, b, &breaks, CRPS_TOL).map(|r| r.value)
    };
    let upper = |a: f64, b: f64| {
        integrate_with_breaks(|x| d.sf(x).powi(2), a, b, &breaks, CRPS_TOL).map(|r| r.value)
    };
    // Beyond the support the integrand is 0, or exactly 1 between the support
    // edge and an outcome that falls outside it.
    let value = if y <= lo {
        (lo - y) + upper(lo, hi)?
    } else if y >= hi {
        lower(lo, hi)? + (y - hi)
    } else {
        lower(lo, y)? + upper(y, hi)?
    };
    Ok(ScoreValue::exact(value))
}

/// Closed-form CRPS of N(μ, σ²): σ[z(2Φ(z) − 1) + 2φ(z) − 1/√π].
pub fn crps_gaussian_closed_form(mean: f64, stddev: f64, y: f64) -> f64 {
    let z = (y - mean) / stddev;
    stddev * (z * (2.0 * std_normal_cdf(z) - 1.0) + 2.0 * std_normal_pdf(z) - 1.0 / PI.sqrt())
}

/// crps(a, y) − crps(b, y) as one integral of (F_a − F_b)(F_a + F_b − 2H).
///
/// Computing the difference directly keeps its relative precision when the
/// two scores nearly coincide.
pub fn relative_crps<A, B>(a: &A, b: &B, y: f64) -> Result<f64>
where
    A: Density + ?Sized,
    B: Density + ?Sized,
{
    ensure_finite("outcome", y)?;
    let (alo, ahi) = a.support();
    let (blo, bhi) = b.support();
    let lo = alo.min(blo).min(y);
    let hi = ahi.max(bhi).max(y);
    let mut breaks = a.breakpoints();
    breaks.extend(b.breakpoints());
    breaks.push(y);
    let tol = Tolerance::new(1e-13, 1e-11);
    let below = integrate_with_breaks(
        |x| {
            let (fa, fb) = (a.cdf(x), b.cdf(x));
            (fa - fb) * (fa + fb)
        },
        lo,
        y,
        &breaks,
        tol,
    )?;
    let above = integrate_with_breaks(
        |x| {
            let (sa, sb) = (a.sf(x), b.sf(x));
            (sa - sb) * (sa + sb)
        },
        y,
        hi,
        &breaks,
        tol,
    )?;
    Ok(below.value + above.value)
}

/// Monte-Carlo energy score E|X − y|^β − ½E|X − X′|^β with independent
/// streams for X and X′.
pub fn energy_score<D: Density + ?Sized>(
    d: &D,
    y: f64,
    beta: f64,
    mc: MonteCarlo,
) -> Result<ScoreValue> {
    ensure_finite("outcome", y)?;
    if !(beta > 0.0 && beta < 2.0) {
        return Err(Error::domain(format!("energy score needs beta in (0, 2), got {beta}")));
    }
    if mc.samples < MIN_MC_SAMPLES {
        return Err(Error::domain(format!(
            "energy score needs at least {MIN_MC_SAMPLES} samples, got {}",
            mc.samples
        )));
    }
    let mut rx = seeded_rng(mc.seed, 1);
    let mut rx2 = seeded_rng(mc.seed, 2);
    // Welford accumulation of the per-draw estimator
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..mc.samples {
        let x = d.draw(&mut rx);
        let x2 = d.draw(&mut rx2);
        let v = (x - y).abs().powf(beta) - 0.5 * (x - x2).abs().powf(beta);
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let n = mc.samples as f64;
    let var = m2 / (n - 1.0);
    Ok(ScoreValue::estimate(mean, (var / n).sqrt()))
}

/// Power score −α p(y)^(α−1) + (α − 1)∫p^α.
pub fn power_score<D: Density + ?Sized>(d: &D, y: f64, alpha: f64) -> Result<ScoreValue> {
    ensure_finite("outcome", y)?;
    let norm = lp_norm_integral(d, alpha)?;
    let p = d.pdf(y);
    Ok(ScoreValue::exact(
        -alpha * p.powf(alpha - 1.0) + (alpha - 1.0) * norm,
    ))
}

/// Pseudo-spherical score −p(y)^(β−1) / ‖p‖_β^(β−1), with ‖p‖_β = (∫p^β)^(1/β).
pub fn pseudospherical_score<D: Density + ?Sized>(d: &D, y: f64, beta: f64) -> Result<ScoreValue> {
    ensure_finite("outcome", y)?;
    if !(beta > 1.0 && beta.is_finite()) {
        return Err(Error::domain(format!("pseudospherical score needs beta > 1, got {beta}")));
    }
    let norm = lp_norm_integral(d, beta)?;
    let p = d.pdf(y);
    Ok(ScoreValue::exact(-p.powf(beta - 1.0) / norm.powf((beta - 1.0) / beta)))
}

/// −p(y). Not proper; kept as a negative control for the propriety checker.
pub fn naive_linear_score<D: Density + ?Sized>(d: &D, y: f64) -> Result<ScoreValue> {
    ensure_finite("outcome", y)?;
    Ok(ScoreValue::exact(-d.pdf(y)))
}

/// Evaluate any rule.
pub fn score<D: Density + ?Sized>(
    spec: &ScoreSpec,
    d: &D,
    y: f64,
    opts: &ScoreOptions,
) -> Result<ScoreValue> {
    spec.validate()?;
    match *spec {
        ScoreSpec::Ignorance => match opts.ignorance_floor {
            Some(floor) => ignorance_floored(d, y, floor),
            None => ignorance(d, y),
        },
        ScoreSpec::Crps => crps(d, y),
        ScoreSpec::Energy { beta } => {
            let mc = opts.monte_carlo.ok_or_else(|| {
                Error::domain("energy score is a Monte-Carlo estimate and needs an explicit seed")
            })?;
            energy_score(d, y, beta, mc)
        }
        ScoreSpec::Power { alpha } => power_score(d, y, alpha),
        ScoreSpec::Pseudospherical { beta } => pseudospherical_score(d, y, beta),
        ScoreSpec::NaiveLinear => naive_linear_score(d, y),
    }
}

/// ∂CRPS/∂y = 2F(y) − 1; zero exactly at the median.
pub fn crps_outcome_derivative<D: Density + ?Sized>(d: &D, y: f64) -> Result<f64> {
    ensure_finite("outcome", y)?;
    Ok(d.median_balance(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{MixtureDensity, Transform};
    use crate::figures;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn n01() -> MixtureDensity {
        MixtureDensity::gaussian(0.0, 1.0).unwrap()
    }

    fn unit_box() -> MixtureDensity {
        MixtureDensity::uniform(0.0, 1.0).unwrap()
    }

    #[test]
    fn ignorance_examples() {
        let v = ignorance(&n01(), 0.0).unwrap();
        assert!(close(v.value, 1.325_748_1, 1e-7));
        assert!(!v.infinite && v.stderr.is_none());
        assert_eq!(ignorance(&unit_box(), 0.5).unwrap().value, 0.0);
        let inf = ignorance(&unit_box(), 2.0).unwrap();
        assert!(inf.infinite && inf.value == f64::INFINITY);
        let floored = ignorance_floored(&unit_box(), 2.0, 1e-3).unwrap();
        assert!(!floored.infinite);
        assert!(close(floored.value, 1e-3f64.log2().abs(), 1e-12));
    }

    #[test]
    fn ignorance_far_tail_is_finite() {
        let v = ignorance(&n01(), 45.0).unwrap();
        assert!(v.value.is_finite());
        let expect = (0.5 * 45.0 * 45.0 + 0.5 * (2.0 * PI).ln()) / std::f64::consts::LN_2;
        assert!(close(v.value, expect, 1e-9));
    }

    #[test]
    fn crps_examples() {
        let v = crps(&n01(), 0.0).unwrap();
        assert!(close(v.value, 0.233_695_0, 1e-7));
        let point = MixtureDensity::gaussian(0.0, 1e-6).unwrap();
        assert!(close(crps(&point, 1.0).unwrap().value, 1.0, 1e-5));
        let a = figures::fig2_system_a();
        let b = figures::fig2_system_b();
        let ca = crps(&a, 0.0).unwrap().value;
        let cb = crps(&b, 0.0).unwrap().value;
        assert!(close(ca, 0.4718, 5e-5), "{ca}");
        assert!(close(cb, 0.5117, 5e-5), "{cb}");
        assert!(ca < cb);
    }

    #[test]
    fn crps_outside_support() {
        let u = unit_box();
        // E|X − y| − ½E|X − X′| with E|X − X′| = 1/3
        assert!(close(crps(&u, 3.0).unwrap().value, 3.0 - 0.5 - 1.0 / 6.0, 1e-12));
        assert!(close(crps(&u, -2.0).unwrap().value, 2.5 - 1.0 / 6.0, 1e-12));
        // inside: E|X − y| = (y² + (1−y)²)/2
        let y = 0.3;
        let expect = 0.5 * (y * y + (1.0 - y) * (1.0 - y)) - 1.0 / 6.0;
        assert!(close(crps(&u, y).unwrap().value, expect, 1e-12));
    }

    #[test]
    fn crps_matches_closed_form_on_a_few_points() {
        for (m, s, y) in [(0.5, 0.2, 3.0), (-3.0, 5.0, 10.0), (2.0, 1.0, -10.0)] {
            let d = MixtureDensity::gaussian(m, s).unwrap();
            let q = crps(&d, y).unwrap().value;
            assert!(close(q, crps_gaussian_closed_form(m, s, y), 1e-9));
        }
    }

    #[test]
    fn relative_crps_matches_difference() {
        let a = figures::fig2_system_a();
        let b = figures::fig2_system_b();
        for y in [-1.3, 0.0, 0.4, 1.1, 2.7] {
            let d = crps(&a, y).unwrap().value - crps(&b, y).unwrap().value;
            assert!(close(relative_crps(&a, &b, y).unwrap(), d, 1e-10));
        }
    }

    #[test]
    fn energy_examples() {
        let mc = MonteCarlo::new(20_240_601);
        let v = energy_score(&n01(), 0.0, 1.0, mc).unwrap();
        let se = v.stderr.unwrap();
        assert!((v.value - 0.233_695).abs() < 3.0 * se, "{} ± {se}", v.value);
        // degenerate forecast: |y − μ| − σ/√π
        let point = MixtureDensity::gaussian(0.0, 1e-6).unwrap();
        let v = energy_score(&point, 1.0, 1.0, mc).unwrap();
        assert!((v.value - 1.0).abs() < 1e-5);
        let exact = 1.0 - 1e-6 / PI.sqrt();
        assert!((v.value - exact).abs() < 3.0 * v.stderr.unwrap());
    }

    /// E|X|^β for X ~ N(0, s²) by Gauss–Hermite-free quadrature on the half line.
    fn abs_moment(s: f64, beta: f64) -> f64 {
        let r = integrate_with_breaks(
            |x: f64| 2.0 * x.powf(beta) * std_normal_pdf(x / s) / s,
            0.0,
            12.0 * s,
            &[s, 3.0 * s],
            Tolerance::new(1e-13, 1e-12),
        )
        .unwrap();
        r.value
    }

    #[test]
    fn energy_beta_one_and_a_half_matches_quadrature_oracle() {
        let beta = 1.5;
        let oracle = abs_moment(1.0, beta) - 0.5 * abs_moment(2f64.sqrt(), beta);
        let v = energy_score(&n01(), 0.0, beta, MonteCarlo::new(99)).unwrap();
        assert!((v.value - oracle).abs() < 3.0 * v.stderr.unwrap());
    }

    #[test]
    fn energy_domain_errors() {
        let mc = MonteCarlo::new(1);
        for b in [0.0, 2.0, -1.0, 2.5] {
            assert!(matches!(energy_score(&n01(), 0.0, b, mc), Err(Error::Domain(_))));
        }
        let small = MonteCarlo::with_samples(1, 100);
        assert!(energy_score(&n01(), 0.0, 1.0, small).is_err());
    }

    #[test]
    fn energy_is_seed_deterministic() {
        let mc = MonteCarlo::with_samples(5, 20_000);
        let a = energy_score(&n01(), 0.3, 0.7, mc).unwrap();
        let b = energy_score(&n01(), 0.3, 0.7, mc).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn power_examples() {
        assert!(close(power_score(&n01(), 0.0, 2.0).unwrap().value, -0.515_789_7, 1e-7));
        let a = MixtureDensity::gaussian(-3.0, 0.5).unwrap();
        let b = MixtureDensity::gaussian(3.0, 1.0).unwrap();
        assert!(close(power_score(&a, -5.0, 2.0).unwrap().value, 0.563_654_3, 1e-7));
        assert!(close(power_score(&b, -5.0, 2.0).unwrap().value, 0.282_094_8, 1e-7));
        assert!(close(power_score(&unit_box(), 0.5, 2.0).unwrap().value, -1.0, 1e-15));
        assert!(matches!(power_score(&n01(), 0.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn pseudospherical_examples() {
        assert!(close(
            pseudospherical_score(&n01(), 0.0, 2.0).unwrap().value,
            -0.751_125_5,
            1e-7
        ));
        let wide = MixtureDensity::gaussian(0.0, 5.0).unwrap();
        let sa = pseudospherical_score(&n01(), 1.5, 2.0).unwrap().value;
        let sb = pseudospherical_score(&wide, 1.5, 2.0).unwrap().value;
        // closed form: −φ(1.5)/(2√π)^(−1/2) and −φ(0.3)/5 / (10√π)^(−1/2)
        let ea = -std_normal_pdf(1.5) * (2.0 * PI.sqrt()).sqrt();
        let eb = -std_normal_pdf(0.3) / 5.0 * (10.0 * PI.sqrt()).sqrt();
        assert!(close(sa, ea, 1e-12) && close(sb, eb, 1e-12));
        assert!(close(sa, -0.243_854_8, 1e-7));
        assert!(close(sb, -0.321_132_5, 1e-7));
        assert!(sa > sb);
        assert!(close(pseudospherical_score(&unit_box(), 0.5, 2.0).unwrap().value, -1.0, 1e-15));
        assert_eq!(pseudospherical_score(&unit_box(), 2.0, 2.0).unwrap().value, 0.0);
        assert!(matches!(pseudospherical_score(&n01(), 0.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn naive_linear_examples() {
        assert!(close(naive_linear_score(&n01(), 0.0).unwrap().value, -0.398_942_3, 1e-7));
        assert_eq!(naive_linear_score(&unit_box(), 0.5).unwrap().value, -1.0);
        assert_eq!(naive_linear_score(&unit_box(), 7.0).unwrap().value, 0.0);
    }

    #[test]
    fn dispatch() {
        let d = n01();
        let o = ScoreOptions::default();
        assert_eq!(
            score(&ScoreSpec::Ignorance, &d, 0.4, &o).unwrap(),
            ignorance(&d, 0.4).unwrap()
        );
        assert_eq!(
            score(&ScoreSpec::Power { alpha: 2.0 }, &d, 0.4, &o).unwrap(),
            power_score(&d, 0.4, 2.0).unwrap()
        );
        let mc = ScoreOptions::with_monte_carlo(MonteCarlo::new(4));
        let e = score(&ScoreSpec::Energy { beta: 1.0 }, &d, 0.0, &mc).unwrap();
        let c = score(&ScoreSpec::Crps, &d, 0.0, &o).unwrap();
        assert!((e.value - c.value).abs() < 3.0 * e.stderr.unwrap());
        // no seed, no energy score
        assert!(score(&ScoreSpec::Energy { beta: 1.0 }, &d, 0.0, &o).is_err());
        assert!(score(&ScoreSpec::Power { alpha: 0.5 }, &d, 0.0, &o).is_err());
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(crps_outcome_derivative(&n01(), 0.0).unwrap(), 0.0);
        assert!(close(crps_outcome_derivative(&n01(), 1.959_964).unwrap(), 0.95, 1e-6));
        let a = figures::fig2_system_a();
        assert_eq!(crps_outcome_derivative(&a, 0.0).unwrap(), 0.0);
        assert!(a.pdf(0.0) < 1e-20);
        assert!(crps_outcome_derivative(&a, 1e-6).unwrap() > 0.0);
        assert!(crps_outcome_derivative(&a, -1e-6).unwrap() < 0.0);
    }

    #[test]
    fn metadata_flags() {
        let all = [
            ScoreSpec::Ignorance,
            ScoreSpec::Crps,
            ScoreSpec::Energy { beta: 0.5 },
            ScoreSpec::Power { alpha: 2.0 },
            ScoreSpec::Pseudospherical { beta: 2.0 },
            ScoreSpec::NaiveLinear,
        ];
        for s in all {
            let m = s.metadata();
            assert_eq!(
                m.is_strictly_proper && m.is_local,
                s == ScoreSpec::Ignorance,
                "{s}"
            );
            assert_eq!(!m.is_strictly_proper, s == ScoreSpec::NaiveLinear);
        }
        assert!(!ScoreSpec::Pseudospherical { beta: 2.0 }.metadata().decomposition.s1);
    }

    #[test]
    fn spec_json() {
        let s: ScoreSpec = serde_json::from_str(r#"{"family":"energy","beta":1.5}"#).unwrap();
        assert_eq!(s, ScoreSpec::Energy { beta: 1.5 });
        let s: ScoreSpec = serde_json::from_str(r#"{"family":"naive_linear"}"#).unwrap();
        assert_eq!(s, ScoreSpec::NaiveLinear);
        let s: ScoreSpec = serde_json::from_str(r#"{"family":"power","alpha":2}"#).unwrap();
        assert_eq!(s, ScoreSpec::Power { alpha: 2.0 });
        assert!(serde_json::from_str::<ScoreSpec>(r#"{"family":"brier"}"#).is_err());
    }

    #[test]
    fn transformed_scores_use_pushforward() {
        let base = MixtureDensity::gaussian(0.0, 1.0).unwrap();
        let t = crate::distributions::pushforward(
            &base,
            Transform::Affine {
                scale: 3.0,
                shift: -1.0,
            },
        )
        .unwrap();
        // affine pushforward of N(0,1) is N(−1, 9)
        let y = 2.0;
        let direct = MixtureDensity::gaussian(-1.0, 3.0).unwrap();
        for spec in [
            ScoreSpec::Ignorance,
            ScoreSpec::Crps,
            ScoreSpec::Power { alpha: 1.5 },
            ScoreSpec::Pseudospherical { beta: 3.0 },
        ] {
            let o = ScoreOptions::default();
            let a = score(&spec, &t, y, &o).unwrap().value;
            let b = score(&spec, &direct, y, &o).unwrap().value;
            assert!(close(a, b, 1e-9), "{spec}: {a} vs {b}");
        }
    }
}
