//! Expected and relative scores, numerical propriety checks, implausibility
//! witnesses, and preference flips under smooth transformations.

use std::cell::Cell;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{
    bits_from_ln, gaussian_lp_norm, lp_norm_integral, pushforward, seeded_rng, std_normal_ln_pdf,
    std_normal_pdf, Density, Forecast, GaussianComponent, MixtureDensity, Transform,
    SUPPORT_SIGMAS,
};
use crate::error::{ensure_finite, Error, Result};
use crate::quadrature::{integrate_limited, integrate_with_breaks, Tolerance};
use crate::report::{sig9, sig9_opt};
use crate::scores::{
    relative_crps, score, MonteCarlo, ScoreOptions, ScoreSpec, ScoreValue, MIN_MC_SAMPLES,
};

/// Quadrature tolerance for expected scores.
pub const EXPECTED_TOL: Tolerance = Tolerance {
    abs: 1e-12,
    rel: 1e-11,
};

/// Slack allowed in the propriety inequality.
pub const PROPRIETY_TOL: f64 = 1e-7;
/// Pairs further apart than this in L¹ are expected to show a clear margin.
pub const STRICT_L1: f64 = 0.05;
pub const STRICT_MARGIN: f64 = 1e-4;

pub const FLIP_GRID_POINTS: usize = 2001;
pub const FLIP_TOL: f64 = 1e-6;
/// Relative scores smaller than this are treated as having no sign.
const SIGN_NOISE: f64 = 1e-12;

const ARGMIN_MAX_SUBDIVISIONS: usize = 200;
/// Final bracket width of the CRPS argmin search.
pub const ARGMIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedOptions {
    pub tol: Tolerance,
    /// Only needed by the energy family for non-Gaussian densities.
    pub monte_carlo: Option<MonteCarlo>,
}

impl Default for ExpectedOptions {
    fn default() -> Self {
        ExpectedOptions {
            tol: EXPECTED_TOL,
            monte_carlo: None,
        }
    }
}

fn pow_density(p: f64, e: f64) -> f64 {
    if p > 0.0 {
        (e * p.ln()).exp()
    } else {
        0.0
    }
}

/// ∫ q(y)·g(y) dy over the support of the truth q.
fn against_truth<T, F, G>(truth: &T, forecast: &F, g: G, tol: Tolerance) -> Result<f64>
where
    T: Density + ?Sized,
    F: Density + ?Sized,
    G: Fn(f64) -> f64,
{
    let (lo, hi) = truth.support();
    let mut breaks = truth.breakpoints();
    breaks.extend(forecast.breakpoints());
    integrate_with_breaks(
        |y| {
            let q = truth.pdf(y);
            if q == 0.0 {
                0.0
            } else {
                q * g(y)
            }
        },
        lo,
        hi,
        &breaks,
        tol,
    )
    .map(|r| r.value)
}

/// E_q[S(p, Y)]: the expected score of `forecast` when outcomes follow `truth`.
pub fn expected_score<F, T>(
    spec: &ScoreSpec,
    forecast: &F,
    truth: &T,
    opts: &ExpectedOptions,
) -> Result<ScoreValue>
where
    F: Density + ?Sized,
    T: Density + ?Sized,
{
    spec.validate()?;
    let tol = opts.tol;
    let value = match *spec {
        ScoreSpec::Ignorance => {
            let infinite = Cell::new(false);
            let v = against_truth(
                truth,
                forecast,
                |y| {
                    let bits = bits_from_ln(forecast.ln_pdf(y));
                    if bits.is_finite() {
                        bits
                    } else {
                        infinite.set(true);
                        0.0
                    }
                },
                tol,
            )?;
            if infinite.get() {
                f64::INFINITY
            } else {
                v
            }
        }
        ScoreSpec::Crps => {
            // E_q (F_p(x) − H(x − Y))² = F_p² S_q + S_p² F_q
            let (alo, ahi) = forecast.support();
            let (blo, bhi) = truth.support();
            let mut breaks = forecast.breakpoints();
            breaks.extend(truth.breakpoints());
            integrate_with_breaks(
                |x| {
                    let (fp, sp) = (forecast.cdf(x), forecast.sf(x));
                    let (fq, sq) = (truth.cdf(x), truth.sf(x));
                    fp * fp * sq + sp * sp * fq
                },
                alo.min(blo),
                ahi.max(bhi),
                &breaks,
                tol,
            )?
            .value
        }
        ScoreSpec::Energy { beta } => return expected_energy(forecast, truth, beta, opts),
        ScoreSpec::Power { alpha } => {
            let norm = lp_norm_integral(forecast, alpha)?;
            let cross = against_truth(
                truth,
                forecast,
                |y| pow_density(forecast.pdf(y), alpha - 1.0),
                tol,
            )?;
            -alpha * cross + (alpha - 1.0) * norm
        }
        ScoreSpec::Pseudospherical { beta } => {
            let norm = lp_norm_integral(forecast, beta)?;
            let cross = against_truth(
                truth,
                forecast,
                |y| pow_density(forecast.pdf(y), beta - 1.0),
                tol,
            )?;
            -cross / norm.powf((beta - 1.0) / beta)
        }
        ScoreSpec::NaiveLinear => -against_truth(truth, forecast, |y| forecast.pdf(y), tol)?,
    };
    Ok(ScoreValue::exact(value))
}

/// E|Z|^β for Z ~ N(m, s²).
pub fn gaussian_abs_moment(m: f64, s: f64, beta: f64) -> Result<f64> {
    let breaks = [0.0, m - 3.0 * s, m - s, m, m + s, m + 3.0 * s];
    integrate_with_breaks(
        |x| x.abs().powf(beta) * std_normal_pdf((x - m) / s) / s,
        m - SUPPORT_SIGMAS * s,
        m + SUPPORT_SIGMAS * s,
        &breaks,
        Tolerance::new(1e-14, 1e-12),
    )
    .map(|r| r.value)
}

/// E|X − Y|^β for independent X, Y drawn from two Gaussian mixtures.
fn mixture_abs_moment(a: &[GaussianComponent], b: &[GaussianComponent], beta: f64) -> Result<f64> {
    let mut total = 0.0;
    for ca in a {
        for cb in b {
            total += ca.weight
                * cb.weight
                * gaussian_abs_moment(ca.mean - cb.mean, ca.stddev.hypot(cb.stddev), beta)?;
        }
    }
    Ok(total)
}

fn expected_energy<F, T>(forecast: &F, truth: &T, beta: f64, opts: &ExpectedOptions) -> Result<ScoreValue>
where
    F: Density + ?Sized,
    T: Density + ?Sized,
{
    if let (Some(p), Some(q)) = (forecast.gaussian_components(), truth.gaussian_components()) {
        let cross = mixture_abs_moment(&p, &q, beta)?;
        let own = mixture_abs_moment(&p, &p, beta)?;
        return Ok(ScoreValue::exact(cross - 0.5 * own));
    }
    let mc = opts.monte_carlo.ok_or_else(|| {
        Error::domain("expected energy score needs an explicit Monte-Carlo seed for this density")
    })?;
    if mc.samples < MIN_MC_SAMPLES {
        return Err(Error::domain(format!(
            "energy score needs at least {MIN_MC_SAMPLES} samples, got {}",
            mc.samples
        )));
    }
    let mut rx = seeded_rng(mc.seed, 1);
    let mut rx2 = seeded_rng(mc.seed, 2);
    let mut ry = seeded_rng(mc.seed, 3);
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..mc.samples {
        let y = truth.draw(&mut ry);
        let x = forecast.draw(&mut rx);
        let x2 = forecast.draw(&mut rx2);
        let v = (x - y).abs().powf(beta) - 0.5 * (x - x2).abs().powf(beta);
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let n = mc.samples as f64;
    Ok(ScoreValue::estimate(mean, (m2 / (n - 1.0) / n).sqrt()))
}

fn difference(a: ScoreValue, b: ScoreValue) -> ScoreValue {
    let value = a.value - b.value;
    let stderr = match (a.stderr, b.stderr) {
        (None, None) => None,
        (x, y) => Some(x.unwrap_or(0.0).hypot(y.unwrap_or(0.0))),
    };
    ScoreValue {
        value,
        stderr,
        infinite: value.is_infinite(),
    }
}

/// E_q[S(a)] − E_q[S(b)]. Negative means `a` is preferred.
pub fn relative_expected_score<A, B, T>(
    spec: &ScoreSpec,
    a: &A,
    b: &B,
    truth: &T,
    opts: &ExpectedOptions,
) -> Result<ScoreValue>
where
    A: Density + ?Sized,
    B: Density + ?Sized,
    T: Density + ?Sized,
{
    let sa = expected_score(spec, a, truth, opts)?;
    let sb = expected_score(spec, b, truth, opts)?;
    Ok(difference(sa, sb))
}

/// Relative expected scores of N(0, σ²) against N(0, 1/σ²) under a standard
/// Gaussian truth, one row per σ.
#[derive(Debug, Clone, PartialEq)]
pub struct SkillCurve {
    pub sigma: Vec<f64>,
    /// (column name, one value per σ)
    pub columns: Vec<(String, Vec<f64>)>,
}

impl SkillCurve {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }
}

/// Column names of [`figure1_curve`]. `ign_div20` is `ign` scaled by 1/20.
pub const FIGURE1_COLUMNS: [&str; 5] = ["ign", "ign_div20", "crps", "pls", "sps"];

/// The two systems and the truth behind the skill curve at one σ.
pub fn figure1_systems(sigma: f64) -> Result<(Forecast, Forecast, Forecast)> {
    Ok((
        Forecast::gaussian(0.0, sigma)?,
        Forecast::gaussian(0.0, 1.0 / sigma)?,
        Forecast::gaussian(0.0, 1.0)?,
    ))
}

/// Relative expected Ignorance, CRPS, PLS and SPS at one σ.
pub fn figure1_row(sigma: f64) -> Result<[f64; 4]> {
    let (a, b, truth) = figure1_systems(sigma)?;
    let opts = ExpectedOptions::default();
    let mut out = [0.0; 4];
    for (slot, spec) in out.iter_mut().zip([
        ScoreSpec::Ignorance,
        ScoreSpec::Crps,
        ScoreSpec::Power { alpha: 2.0 },
        ScoreSpec::Pseudospherical { beta: 2.0 },
    ]) {
        *slot = relative_expected_score(&spec, &a, &b, &truth, &opts)?.value;
    }
    Ok(out)
}

pub fn figure1_curve(sigma_grid: &[f64]) -> Result<SkillCurve> {
    if sigma_grid.iter().any(|s| !(*s > 1.0 && s.is_finite())) {
        return Err(Error::domain("sigma grid must lie in (1, inf)"));
    }
    if sigma_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("sigma grid must be strictly increasing"));
    }
    let rows = sigma_grid
        .par_iter()
        .map(|&s| figure1_row(s))
        .collect::<Result<Vec<_>>>()?;
    let col = |i: usize| rows.iter().map(|r| r[i]).collect::<Vec<_>>();
    let ign = col(0);
    let ign20 = ign.iter().map(|v| v / 20.0).collect();
    let names = FIGURE1_COLUMNS.map(String::from);
    Ok(SkillCurve {
        sigma: sigma_grid.to_vec(),
        columns: vec![
            (names[0].clone(), ign),
            (names[1].clone(), ign20),
            (names[2].clone(), col(1)),
            (names[3].clone(), col(2)),
            (names[4].clone(), col(3)),
        ],
    })
}

/// A truth and the candidate forecasts scored against it. The candidates
/// include the truth itself.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProprietyCase {
    pub truth: Forecast,
    pub candidates: Vec<Forecast>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProprietyEntry {
    pub case: usize,
    pub truth: Forecast,
    pub candidate: Forecast,
    #[serde(serialize_with = "sig9")]
    pub l1_distance: f64,
    pub expected_candidate: ScoreValue,
    pub expected_truth: ScoreValue,
    /// E_q[S(p)] − E_q[S(q)]; negative values falsify propriety.
    #[serde(serialize_with = "sig9")]
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProprietyReport {
    pub spec: ScoreSpec,
    #[serde(serialize_with = "sig9")]
    pub tol: f64,
    pub pairs_checked: usize,
    #[serde(serialize_with = "sig9")]
    pub min_margin: f64,
    pub proper: bool,
    pub violations: Vec<ProprietyEntry>,
    /// Pairs more than [`STRICT_L1`] apart whose margin is at most [`STRICT_MARGIN`].
    pub weak_pairs: Vec<ProprietyEntry>,
    #[serde(skip)]
    pub entries: Vec<ProprietyEntry>,
}

/// ∫|p − q|.
pub fn l1_distance<A, B>(a: &A, b: &B) -> Result<f64>
where
    A: Density + ?Sized,
    B: Density + ?Sized,
{
    let (alo, ahi) = a.support();
    let (blo, bhi) = b.support();
    let mut breaks = a.breakpoints();
    breaks.extend(b.breakpoints());
    integrate_with_breaks(
        |x| (a.pdf(x) - b.pdf(x)).abs(),
        alo.min(blo),
        ahi.max(bhi),
        &breaks,
        Tolerance::new(1e-10, 1e-9),
    )
    .map(|r| r.value)
}

/// Check E_q[S(p)] ≥ E_q[S(q)] − tol for every candidate p of every case.
///
/// Violations are findings reported in the result, not errors.
pub fn propriety_check(
    spec: &ScoreSpec,
    cases: &[ProprietyCase],
    tol: f64,
    opts: &ExpectedOptions,
) -> Result<ProprietyReport> {
    spec.validate()?;
    if let Some(i) = cases.iter().position(|c| !c.candidates.contains(&c.truth)) {
        return Err(Error::domain(format!(
            "case {i}: the candidate set must include the truth"
        )));
    }
    let per_case = cases
        .par_iter()
        .enumerate()
        .map(|(i, case)| -> Result<Vec<ProprietyEntry>> {
            let own = expected_score(spec, &case.truth, &case.truth, opts)?;
            case.candidates
                .iter()
                .map(|p| {
                    let e = expected_score(spec, p, &case.truth, opts)?;
                    Ok(ProprietyEntry {
                        case: i,
                        truth: case.truth.clone(),
                        candidate: p.clone(),
                        l1_distance: l1_distance(p, &case.truth)?,
                        expected_candidate: e,
                        expected_truth: own,
                        margin: e.value - own.value,
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    let entries: Vec<ProprietyEntry> = per_case.into_iter().flatten().collect();

    let noise = |e: &ProprietyEntry| {
        let se = difference(e.expected_candidate, e.expected_truth).stderr;
        3.0 * se.unwrap_or(0.0)
    };
    let violations: Vec<ProprietyEntry> = entries
        .iter()
        .filter(|e| e.margin.is_nan() || e.margin + noise(e) < -tol)
        .cloned()
        .collect();
    let weak_pairs = entries
        .iter()
        .filter(|e| e.l1_distance > STRICT_L1 && !(e.margin > STRICT_MARGIN))
        .cloned()
        .collect();
    let min_margin = entries
        .iter()
        .map(|e| e.margin)
        .fold(f64::INFINITY, f64::min);
    Ok(ProprietyReport {
        spec: *spec,
        tol,
        pairs_checked: entries.len(),
        min_margin,
        proper: violations.is_empty(),
        violations,
        weak_pairs,
        entries,
    })
}

/// A Gaussian (μ ∈ [−3, 3], σ ∈ [0.2, 5]) or a two-component mixture of such.
pub fn random_forecast<R: Rng + ?Sized>(rng: &mut R, mixture: bool) -> Result<Forecast> {
    let mut comp = || (rng.random_range(-3.0..=3.0), rng.random_range(0.2..=5.0));
    if mixture {
        let (m1, s1) = comp();
        let (m2, s2) = comp();
        let w = rng.random_range(0.2..=0.8);
        Forecast::gaussian_mixture(&[(w, m1, s1), (1.0 - w, m2, s2)])
    } else {
        let (m, s) = comp();
        Forecast::gaussian(m, s)
    }
}

/// `n` random (truth, candidate) pairs, cycling through Gaussian and
/// mixture combinations.
pub fn sample_propriety_cases(seed: u64, n: usize) -> Result<Vec<ProprietyCase>> {
    let mut rng = seeded_rng(seed, 11);
    (0..n)
        .map(|i| {
            let truth = random_forecast(&mut rng, i % 2 == 1)?;
            let candidate = random_forecast(&mut rng, i % 4 >= 2)?;
            Ok(ProprietyCase {
                truth: truth.clone(),
                candidates: vec![truth, candidate],
            })
        })
        .collect()
}

/// q = N(0, 1) against p = N(0, 0.5²): the naive linear score prefers p.
pub fn naive_linear_counterexample() -> ProprietyCase {
    let q = Forecast::gaussian(0.0, 1.0).expect("valid");
    let p = Forecast::gaussian(0.0, 0.5).expect("valid");
    ProprietyCase {
        truth: q.clone(),
        candidates: vec![q, p],
    }
}

/// Two forecasts and an outcome where the forecast with more density at the
/// outcome scores worse.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub spec: ScoreSpec,
    pub p1: Forecast,
    pub p2: Forecast,
    #[serde(serialize_with = "sig9")]
    pub y: f64,
    /// p1(y) / p2(y); +∞ when p2(y) = 0.
    #[serde(serialize_with = "sig9")]
    pub ratio: f64,
    pub s1: ScoreValue,
    pub s2: ScoreValue,
    pub verified: bool,
}

/// Score both forecasts at `y` and report whether p1(y) > p2(y) while
/// S(p1, y) > S(p2, y). Monte-Carlo scores must differ by more than three
/// combined standard errors.
pub fn verify_witness(
    spec: &ScoreSpec,
    p1: &Forecast,
    p2: &Forecast,
    y: f64,
    opts: &ScoreOptions,
) -> Result<WitnessReport> {
    ensure_finite("outcome", y)?;
    spec.validate()?;
    let (l1, l2) = (p1.ln_pdf(y), p2.ln_pdf(y));
    if l1 == f64::NEG_INFINITY && l2 == f64::NEG_INFINITY {
        return Err(Error::UndefinedRatio(format!(
            "both densities vanish at y = {y}"
        )));
    }
    let ratio = if l2 == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        (l1 - l2).exp()
    };
    let s1 = score(spec, p1, y, opts)?;
    let s2 = score(spec, p2, y, opts)?;
    let noise = 3.0 * difference(s1, s2).stderr.unwrap_or(0.0);
    Ok(WitnessReport {
        spec: *spec,
        p1: p1.clone(),
        p2: p2.clone(),
        y,
        ratio,
        s1,
        s2,
        verified: ratio > 1.0 && s1.value - s2.value > noise,
    })
}

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Mean μ ≤ y of N(μ, σ²) whose log-density at y equals `ln_target`.
fn solve_mean(y: f64, ln_target: f64, sigma: f64) -> Result<f64> {
    let g = |mu: f64| std_normal_ln_pdf((y - mu) / sigma) - sigma.ln() - ln_target;
    if !(g(y) > 0.0) {
        return Err(Error::Infeasible(format!(
            "N(., {sigma}^2) cannot reach log-density {ln_target} at {y}"
        )));
    }
    let mut width = sigma;
    while g(y - width) > 0.0 {
        width *= 2.0;
    }
    let (mut lo, mut hi) = (y - width, y);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = g(mid);
        if v.abs() <= 1e-13 {
            return Ok(mid);
        }
        if v > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    if g(mid).abs() > 1e-9 {
        return Err(Error::Infeasible(format!(
            "density ratio equation did not converge at y = {y}"
        )));
    }
    Ok(mid)
}

fn ratio_matches(measured: f64, r: f64) -> bool {
    if r.is_infinite() {
        measured.is_infinite()
    } else {
        (measured / r - 1.0).abs() <= 1e-6
    }
}

/// Build a verified witness with p1(y) = r·p2(y) for the given rule.
///
/// Power and pseudo-spherical witnesses are Gaussian pairs. CRPS and energy
/// witnesses are bimodal pairs with the outcome at p2's median; r = +∞ uses
/// piecewise-uniform densities so that p2(y) = 0 exactly.
pub fn construct_witness(spec: &ScoreSpec, r: f64, opts: &ScoreOptions) -> Result<WitnessReport> {
    spec.validate()?;
    if !(r > 1.0) {
        return Err(Error::domain(format!("ratio must exceed 1, got {r}")));
    }
    let report = match *spec {
        ScoreSpec::Power { alpha } => power_witness(spec, alpha, r, opts)?,
        ScoreSpec::Pseudospherical { beta } => pseudospherical_witness(spec, beta, r, opts)?,
        ScoreSpec::Crps | ScoreSpec::Energy { .. } => bimodal_witness(spec, r, opts)?,
        ScoreSpec::Ignorance => {
            return Err(Error::Infeasible(
                "ignorance always prefers the higher density; no witness exists".into(),
            ))
        }
        ScoreSpec::NaiveLinear => {
            return Err(Error::Infeasible(
                "the naive linear score always prefers the higher density; no witness exists"
                    .into(),
            ))
        }
    };
    if !ratio_matches(report.ratio, r) {
        return Err(Error::Infeasible(format!(
            "constructed ratio {} does not match requested {r}",
            report.ratio
        )));
    }
    if !report.verified {
        return Err(Error::Infeasible(format!(
            "construction for {spec} at r = {r} did not verify (s1 = {}, s2 = {})",
            report.s1.value, report.s2.value
        )));
    }
    Ok(report)
}

fn finite_ratio(spec: &ScoreSpec, r: f64) -> Result<()> {
    if r.is_infinite() {
        return Err(Error::Infeasible(format!(
            "{spec}: Gaussian witnesses need a finite ratio"
        )));
    }
    Ok(())
}

fn power_witness(spec: &ScoreSpec, alpha: f64, r: f64, opts: &ScoreOptions) -> Result<WitnessReport> {
    finite_ratio(spec, r)?;
    let (mu1, sigma1) = (0.0, 1.0);
    let e = alpha - 1.0;
    // p1(y) below this keeps a wide enough p2 ahead for every r
    let bound = e.powf(1.0 / e) * alpha.powf(-1.5 / e) * std_normal_pdf(0.0) / sigma1;
    let mut target = if bound > 0.1 { 0.1 } else { 0.5 * bound };
    let s_of = |p: f64, sigma: f64| -alpha * p.powf(e) + e * gaussian_lp_norm(sigma, alpha);
    for _ in 0..40 {
        let y = mu1 + sigma1 * (-2.0 * (target * sigma1 * SQRT_2PI).ln()).sqrt();
        let p1y = std_normal_pdf((y - mu1) / sigma1) / sigma1;
        let p2y = p1y / r;
        let s1 = s_of(p1y, sigma1);
        let mut sigma2 = 2.0 * sigma1;
        while sigma2 * SQRT_2PI * p2y < 1.0 {
            if s1 > s_of(p2y, sigma2) {
                let mu2 = solve_mean(y, p1y.ln() - r.ln(), sigma2)?;
                let p1 = Forecast::gaussian(mu1, sigma1)?;
                let p2 = Forecast::gaussian(mu2, sigma2)?;
                let rep = verify_witness(spec, &p1, &p2, y, opts)?;
                if rep.verified && ratio_matches(rep.ratio, r) {
                    return Ok(rep);
                }
            }
            sigma2 *= 2.0;
        }
        target *= 0.5;
    }
    Err(Error::Infeasible(format!("{spec}: no Gaussian witness found for r = {r}")))
}

fn pseudospherical_witness(
    spec: &ScoreSpec,
    beta: f64,
    r: f64,
    opts: &ScoreOptions,
) -> Result<WitnessReport> {
    finite_ratio(spec, r)?;
    let (mu1, sigma1) = (0.0, 1.0);
    // For Gaussians s1 > s2 at any outcome once σ2 > r^(β/(β−1)) σ1; also
    // keep σ2 > r^β σ1.
    let sigma2 = r.powf(beta.max(beta / (beta - 1.0))) * sigma1 * 1.25;
    // outcome where the co-centred ratio equals r
    let y = mu1
        + (2.0 * (sigma2 / (sigma1 * r)).ln() / (sigma1.powi(-2) - sigma2.powi(-2))).sqrt();
    let ln_p1 = std_normal_ln_pdf((y - mu1) / sigma1) - sigma1.ln();
    let mu2 = solve_mean(y, ln_p1 - r.ln(), sigma2)?;
    let p1 = Forecast::gaussian(mu1, sigma1)?;
    let p2 = Forecast::gaussian(mu2, sigma2)?;
    verify_witness(spec, &p1, &p2, y, opts)
}

/// Standard deviation of each mode in the bimodal witnesses.
const MODE_SD: f64 = 0.1;

fn bimodal_witness(spec: &ScoreSpec, r: f64, opts: &ScoreOptions) -> Result<WitnessReport> {
    let y = 0.0;
    if r.is_infinite() {
        let p1 = Forecast::piecewise_uniform(
            vec![y - 0.5, y + 0.5, y + 2.5, y + 3.5],
            vec![0.1, 0.0, 0.9],
        )?;
        let p2 = Forecast::piecewise_uniform(
            vec![y - 1.5, y - 0.5, y + 0.5, y + 1.5],
            vec![0.5, 0.0, 0.5],
        )?;
        return verify_witness(spec, &p1, &p2, y, opts);
    }
    // p2 has its median at y between two narrow modes
    let p2 = Forecast::gaussian_mixture(&[(0.5, y - 1.0, MODE_SD), (0.5, y + 1.0, MODE_SD)])?;
    let ln_target = p2.ln_pdf(y) + r.ln();
    // p1: the same shape with its left mode s to the right of y
    let shifted = |s: f64| {
        Forecast::gaussian_mixture(&[(0.5, y + s, MODE_SD), (0.5, y + s + 2.0, MODE_SD)])
    };
    let f = |s: f64| -> Result<f64> { Ok(shifted(s)?.ln_pdf(y) - ln_target) };
    let (mut lo, mut hi) = (0.0, 1.0);
    if !(f(lo)? > 0.0 && f(hi)? < 0.0) {
        return Err(Error::Infeasible(format!(
            "{spec}: ratio {r} is outside the reach of the bimodal construction"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid)?;
        if v.abs() <= 1e-13 {
            lo = mid;
            hi = mid;
            break;
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p1 = shifted(0.5 * (lo + hi))?;
    verify_witness(spec, &p1, &p2, y, opts)
}

/// score(a, y) − score(b, y). CRPS differences are computed as one integral.
pub fn relative_score<A, B>(
    spec: &ScoreSpec,
    a: &A,
    b: &B,
    y: f64,
    opts: &ScoreOptions,
) -> Result<f64>
where
    A: Density + ?Sized,
    B: Density + ?Sized,
{
    match spec {
        ScoreSpec::Crps => relative_crps(a, b, y),
        _ => Ok(score(spec, a, y, opts)?.value - score(spec, b, y, opts)?.value),
    }
}

/// (y, score(a, y) − score(b, y)) over a grid of outcomes.
pub fn relative_score_curve<A, B>(
    spec: &ScoreSpec,
    a: &A,
    b: &B,
    grid: &[f64],
    opts: &ScoreOptions,
) -> Result<Vec<(f64, f64)>>
where
    A: Density + ?Sized,
    B: Density + ?Sized,
{
    spec.validate()?;
    grid.par_iter()
        .map(|&y| Ok((y, relative_score(spec, a, b, y, opts)?)))
        .collect()
}

/// Relative score of `a` against `b` at `y` before, and at φ(y) after,
/// pushing both through `t`.
pub fn transformed_relative_score(
    spec: &ScoreSpec,
    a: &MixtureDensity,
    b: &MixtureDensity,
    y: f64,
    t: Transform,
    opts: &ScoreOptions,
) -> Result<(f64, f64)> {
    let ta = pushforward(a, t)?;
    let tb = pushforward(b, t)?;
    let pre = relative_score(spec, a, b, y, opts)?;
    let post = relative_score(spec, &ta, &tb, t.forward(y), opts)?;
    Ok((pre, post))
}

/// An outcome where the preference between two systems reverses under a transform.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlipReport {
    pub spec: ScoreSpec,
    pub pa: Forecast,
    pub pb: Forecast,
    pub transform: Transform,
    #[serde(serialize_with = "sig9")]
    pub y: f64,
    #[serde(serialize_with = "sig9")]
    pub relative_pre: f64,
    #[serde(serialize_with = "sig9")]
    pub relative_post: f64,
    /// The interval of outcomes around `y` where the preference is reversed.
    #[serde(serialize_with = "sig9")]
    pub region_lo: f64,
    #[serde(serialize_with = "sig9")]
    pub region_hi: f64,
    /// Root of the untransformed relative score at an edge of the region.
    #[serde(serialize_with = "sig9_opt")]
    pub pre_threshold: Option<f64>,
    /// Root of the transformed relative score, in untransformed units.
    #[serde(serialize_with = "sig9_opt")]
    pub post_threshold: Option<f64>,
}

fn sign_class(v: f64) -> i8 {
    if !v.is_finite() || v.abs() <= SIGN_NOISE {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

fn is_flip((pre, post): (f64, f64)) -> bool {
    sign_class(pre) * sign_class(post) < 0
}

/// Bisect [a, b] to [`FLIP_TOL`] keeping `pred(b_side)` true at the right end.
fn bisect_predicate<P>(mut a: f64, mut b: f64, right: bool, pred: P) -> Result<f64>
where
    P: Fn(f64) -> Result<bool>,
{
    while b - a > FLIP_TOL {
        let mid = 0.5 * (a + b);
        if pred(mid)? == right {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Scan `range` for outcomes where the relative score of `a` against `b`
/// has opposite signs before and after the transform `t`.
///
/// A [`FLIP_GRID_POINTS`] grid is scanned, then the first flip region's
/// edges are bisected to [`FLIP_TOL`]. Returns `None` when no flip exists.
pub fn find_preference_flip(
    spec: &ScoreSpec,
    a: &MixtureDensity,
    b: &MixtureDensity,
    t: Transform,
    range: (f64, f64),
    opts: &ScoreOptions,
) -> Result<Option<FlipReport>> {
    spec.validate()?;
    let (lo, hi) = range;
    ensure_finite("range start", lo)?;
    ensure_finite("range end", hi)?;
    if lo >= hi {
        return Err(Error::domain(format!("empty search range [{lo}, {hi}]")));
    }
    let ta = pushforward(a, t)?;
    let tb = pushforward(b, t)?;
    let eval = |y: f64| -> Result<(f64, f64)> {
        let pre = relative_score(spec, a, b, y, opts)?;
        let post = relative_score(spec, &ta, &tb, t.forward(y), opts)?;
        Ok((pre, post))
    };
    let n = FLIP_GRID_POINTS;
    let grid: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let values = grid
        .par_iter()
        .map(|&y| eval(y))
        .collect::<Result<Vec<_>>>()?;

    let Some(first) = values.iter().position(|v| is_flip(*v)) else {
        return Ok(None);
    };
    let end = values[first..]
        .iter()
        .position(|v| !is_flip(*v))
        .map(|k| first + k);

    let flips_at = |y: f64| eval(y).map(is_flip);
    let mut pre_threshold = None;
    let mut post_threshold = None;
    let mut locate = |i: usize, j: usize| -> Result<()> {
        // roots of whichever factor changes sign between grid points i and j
        let (vi, vj) = (values[i], values[j]);
        if sign_class(vi.0) != sign_class(vj.0) && pre_threshold.is_none() {
            let sj = vj.0 > 0.0;
            pre_threshold = Some(bisect_predicate(grid[i], grid[j], true, |y| {
                Ok((eval(y)?.0 > 0.0) == sj)
            })?);
        }
        if sign_class(vi.1) != sign_class(vj.1) && post_threshold.is_none() {
            let sj = vj.1 > 0.0;
            post_threshold = Some(bisect_predicate(grid[i], grid[j], true, |y| {
                Ok((eval(y)?.1 > 0.0) == sj)
            })?);
        }
        Ok(())
    };

    let region_lo = if first == 0 {
        lo
    } else {
        locate(first - 1, first)?;
        bisect_predicate(grid[first - 1], grid[first], true, flips_at)?
    };
    let region_hi = match end {
        None => hi,
        Some(j) => {
            locate(j - 1, j)?;
            bisect_predicate(grid[j - 1], grid[j], false, flips_at)?
        }
    };

    let mut y = 0.5 * (region_lo + region_hi);
    let mut v = eval(y)?;
    if !is_flip(v) {
        y = grid[first];
        v = values[first];
    }
    Ok(Some(FlipReport {
        spec: *spec,
        pa: Forecast::Base(a.clone()),
        pb: Forecast::Base(b.clone()),
        transform: t,
        y,
        relative_pre: v.0,
        relative_post: v.1,
        region_lo,
        region_hi,
        pre_threshold,
        post_threshold,
    }))
}

/// Outcome minimizing crps(d, ·) within `range`, by golden-section search.
///
/// Two candidates are compared through crps(x2) − crps(x1) = ∫ (2F − 1)
/// over [x1, x2], which keeps its sign where the score itself is flat to
/// rounding.
pub fn crps_argmin_outcome<D: Density + ?Sized>(d: &D, range: (f64, f64)) -> Result<f64> {
    let (mut a, mut b) = range;
    ensure_finite("range start", a)?;
    ensure_finite("range end", b)?;
    if !(a < b && d.median_balance(a) < 0.0 && d.median_balance(b) > 0.0) {
        return Err(Error::NotBracketed { lo: a, hi: b });
    }
    let breaks = d.breakpoints();
    // Only the sign matters. A bracket straddling the minimum can integrate
    // to roundoff level, and then either choice keeps the minimum inside.
    let rise = |u: f64, v: f64| -> Result<f64> {
        match integrate_limited(
            |t| d.median_balance(t),
            u,
            v,
            &breaks,
            Tolerance::new(0.0, 0.5),
            ARGMIN_MAX_SUBDIVISIONS,
        ) {
            Ok(r) => Ok(r.value),
            Err(Error::Quadrature { best_estimate, .. }) => Ok(best_estimate),
            Err(e) => Err(e),
        }
    };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    while b - a > ARGMIN_TOL {
        if x1 >= x2 {
            break;
        }
        if rise(x1, x2)? > 0.0 {
            b = x2;
            x2 = x1;
            x1 = b - g * (b - a);
        } else {
            a = x1;
            x1 = x2;
            x2 = a + g * (b - a);
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{quantile, std_normal_cdf};
    use crate::figures;
    use std::f64::consts::{LN_2, PI};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn h_normal() -> f64 {
        0.5 * (2.0 * PI * 1f64.exp()).log2()
    }

    fn g(m: f64, s: f64) -> Forecast {
        Forecast::gaussian(m, s).unwrap()
    }

    fn exp(spec: ScoreSpec, p: &Forecast, q: &Forecast) -> f64 {
        expected_score(&spec, p, q, &ExpectedOptions::default())
            .unwrap()
            .value
    }

    /// E|N(m, s²)| in closed form.
    fn half_normal_mean(m: f64, s: f64) -> f64 {
        s * (2.0 / PI).sqrt() * (-m * m / (2.0 * s * s)).exp()
            + m * (1.0 - 2.0 * std_normal_cdf(-m / s))
    }

    #[test]
    fn expected_score_examples() {
        let n = g(0.0, 1.0);
        // ½ log₂(2πe)
        let h = 0.5 * (2.0 * PI * 1f64.exp()).log2();
        assert!(close(exp(ScoreSpec::Ignorance, &n, &n), h, 1e-9));
        assert!(close(h, 2.047_095_6, 1e-7));
        assert!(close(exp(ScoreSpec::Crps, &n, &n), 1.0 / PI.sqrt(), 1e-10));
        let wide = g(0.0, 2.0);
        let oracle = half_normal_mean(0.0, 5f64.sqrt()) - 0.5 * half_normal_mean(0.0, 8f64.sqrt());
        assert!(close(oracle, 0.655_744_9, 1e-7));
        assert!(close(exp(ScoreSpec::Crps, &wide, &n), oracle, 1e-10));
    }

    #[test]
    fn expected_crps_matches_cdf_identity() {
        // E_q CRPS(p) = ∫(F_p − F_q)² + ∫ F_q (1 − F_q)
        let p = Forecast::gaussian_mixture(&[(0.3, -1.0, 0.4), (0.7, 2.0, 1.5)]).unwrap();
        let q = Forecast::gaussian_mixture(&[(0.6, 0.5, 0.8), (0.4, -2.0, 0.3)]).unwrap();
        let f = |x: f64| (p.cdf(x) - q.cdf(x)).powi(2) + q.cdf(x) * q.sf(x);
        let oracle = integrate_with_breaks(f, -30.0, 30.0, &[-2.0, 0.5, 2.0], Tolerance::new(1e-13, 1e-12))
            .unwrap()
            .value;
        assert!(close(exp(ScoreSpec::Crps, &p, &q), oracle, 1e-9));
    }

    #[test]
    fn expected_energy_one_equals_expected_crps() {
        let p = Forecast::gaussian_mixture(&[(0.5, -1.0, 0.3), (0.5, 1.0, 0.6)]).unwrap();
        let q = g(0.4, 1.2);
        let e = exp(ScoreSpec::Energy { beta: 1.0 }, &p, &q);
        assert!(close(e, exp(ScoreSpec::Crps, &p, &q), 1e-9));
        assert!(close(gaussian_abs_moment(0.7, 1.3, 1.0).unwrap(), half_normal_mean(0.7, 1.3), 1e-12));
    }

    #[test]
    fn expected_energy_monte_carlo_path() {
        let p = Forecast::uniform(-1.0, 2.0).unwrap();
        let q = g(0.0, 1.0);
        let spec = ScoreSpec::Energy { beta: 1.0 };
        let none = ExpectedOptions::default();
        assert!(expected_score(&spec, &p, &q, &none).is_err());
        let opts = ExpectedOptions {
            monte_carlo: Some(MonteCarlo::with_samples(3, 200_000)),
            ..none
        };
        let v = expected_score(&spec, &p, &q, &opts).unwrap();
        let crps = exp(ScoreSpec::Crps, &p, &q);
        assert!((v.value - crps).abs() < 4.0 * v.stderr.unwrap(), "{v:?} vs {crps}");
    }

    #[test]
    fn relative_expected_examples() {
        let opts = ExpectedOptions::default();
        for sigma in [1.1, 1.7, 2.5, 3.0] {
            let (a, b, t) = figure1_systems(sigma).unwrap();
            let sps = ScoreSpec::Pseudospherical { beta: 2.0 };
            let v = relative_expected_score(&sps, &a, &b, &t, &opts).unwrap().value;
            assert!(v.abs() < 1e-6, "sigma {sigma}: {v}");
        }
        let (a, b, t) = figure1_systems(2.0).unwrap();
        let ign = relative_expected_score(&ScoreSpec::Ignorance, &a, &b, &t, &opts).unwrap().value;
        let s: f64 = 2.0;
        let oracle = (2.0 * s.ln() + 1.0 / (2.0 * s * s) - s * s / 2.0) / LN_2;
        assert!(close(ign, oracle, 1e-9));
        assert!(close(ign, -0.705_053_2, 1e-7));
        // identical systems and antisymmetry
        for spec in [ScoreSpec::Crps, ScoreSpec::Power { alpha: 3.0 }, ScoreSpec::Ignorance] {
            assert_eq!(relative_expected_score(&spec, &a, &a, &t, &opts).unwrap().value, 0.0);
            let ab = relative_expected_score(&spec, &a, &b, &t, &opts).unwrap().value;
            let ba = relative_expected_score(&spec, &b, &a, &t, &opts).unwrap().value;
            assert_eq!(ab, -ba);
        }
    }

    #[test]
    fn figure1_sign_pattern() {
        let grid = [1.01, 1.5, 2.0, 3.0];
        let c = figure1_curve(&grid).unwrap();
        for i in 0..grid.len() {
            assert!(c.column("ign").unwrap()[i] < 0.0);
            assert!(c.column("pls").unwrap()[i] < 0.0);
            assert!(c.column("crps").unwrap()[i] > 0.0);
            assert!(c.column("sps").unwrap()[i].abs() < 1e-6);
            assert_eq!(c.column("ign_div20").unwrap()[i], c.column("ign").unwrap()[i] / 20.0);
        }
        assert!(figure1_curve(&[0.5]).is_err());
        assert!(figure1_curve(&[2.0, 1.5]).is_err());
        // σ → 1: identical systems
        let near = figure1_row(1.0 + 1e-9).unwrap();
        assert!(near.iter().all(|v| v.abs() < 1e-6), "{near:?}");
    }

    #[test]
    fn propriety_examples() {
        let opts = ExpectedOptions::default();
        let q = g(0.0, 1.0);
        let case = ProprietyCase {
            truth: q.clone(),
            candidates: vec![q.clone(), g(0.0, 2.0)],
        };
        let rep = propriety_check(&ScoreSpec::Ignorance, &[case], PROPRIETY_TOL, &opts).unwrap();
        assert!(rep.proper);
        assert_eq!(rep.entries[0].margin, 0.0);
        // cross-entropy of N(0, 4) under N(0, 1) in bits
        let cross = (0.5 * (2.0 * PI * 4.0).ln() + 1.0 / 8.0) / LN_2;
        assert!(close(rep.entries[1].expected_candidate.value, cross, 1e-9));
        assert!(close(cross, 2.506_084_9, 1e-7));
        assert!(close(rep.entries[1].margin, cross - h_normal(), 1e-9));

        let rep = propriety_check(
            &ScoreSpec::NaiveLinear,
            &[naive_linear_counterexample()],
            PROPRIETY_TOL,
            &opts,
        )
        .unwrap();
        assert!(!rep.proper);
        let v = &rep.violations[0];
        // ∫ p q = N(0; 0, σ² + 1)
        assert!(close(v.expected_candidate.value, -1.0 / (2.0 * PI * 1.25).sqrt(), 1e-10));
        assert!(close(v.expected_candidate.value, -0.356_824_8, 1e-7));
        assert!(close(v.expected_truth.value, -0.282_094_8, 1e-7));

        let bad = ProprietyCase {
            truth: q.clone(),
            candidates: vec![g(1.0, 1.0)],
        };
        assert!(propriety_check(&ScoreSpec::Crps, &[bad], PROPRIETY_TOL, &opts).is_err());
    }

    #[test]
    fn propriety_sampled_pairs() {
        let cases = sample_propriety_cases(7, 12).unwrap();
        let opts = ExpectedOptions::default();
        for spec in [
            ScoreSpec::Ignorance,
            ScoreSpec::Crps,
            ScoreSpec::Energy { beta: 0.5 },
            ScoreSpec::Power { alpha: 2.0 },
            ScoreSpec::Pseudospherical { beta: 1.5 },
            ScoreSpec::Pseudospherical { beta: 3.0 },
        ] {
            let rep = propriety_check(&spec, &cases, PROPRIETY_TOL, &opts).unwrap();
            assert!(rep.proper, "{spec}: {:?}", rep.violations);
            assert!(rep.min_margin >= -PROPRIETY_TOL);
        }
    }

    #[test]
    fn verify_witness_examples() {
        let opts = ScoreOptions::default();
        let a: Forecast = figures::fig2_system_a().into();
        let b: Forecast = figures::fig2_system_b().into();
        let rep = verify_witness(&ScoreSpec::Crps, &b, &a, 0.0, &opts).unwrap();
        assert!(rep.verified);
        assert!(rep.ratio > 1e21 && rep.ratio < 1e22, "{}", rep.ratio);
        assert!(close(rep.s1.value, 0.511_684_7, 1e-6));
        assert!(close(rep.s2.value, 0.471_790_5, 1e-6));

        let p1 = g(-3.0, 0.5);
        let p2 = g(3.0, 1.0);
        let rep = verify_witness(&ScoreSpec::Power { alpha: 2.0 }, &p1, &p2, -5.0, &opts).unwrap();
        assert!(rep.verified);
        assert!(close(rep.ratio.log10(), 10.72, 0.01), "{}", rep.ratio);
        assert!(close(rep.s1.value, 0.563_654_3, 1e-7));
        assert!(close(rep.s2.value, 0.282_094_8, 1e-7));

        let rep = verify_witness(
            &ScoreSpec::Pseudospherical { beta: 2.0 },
            &g(0.0, 1.0),
            &g(0.0, 5.0),
            1.5,
            &opts,
        )
        .unwrap();
        assert!(rep.verified);
        assert!(close(rep.ratio, 1.697_978, 1e-6));
        // reversed roles are not a witness
        let rep = verify_witness(&ScoreSpec::Crps, &a, &b, 0.0, &opts).unwrap();
        assert!(!rep.verified);
        let u = Forecast::uniform(0.0, 1.0).unwrap();
        assert!(matches!(
            verify_witness(&ScoreSpec::Crps, &u, &u, 3.0, &opts),
            Err(Error::UndefinedRatio(_))
        ));
    }

    #[test]
    fn construct_witness_examples() {
        let opts = ScoreOptions::default();
        let rep = construct_witness(&ScoreSpec::Pseudospherical { beta: 2.0 }, 2.0, &opts).unwrap();
        assert!(close(rep.y, 1.381_643_6, 1e-6));
        assert_eq!(rep.p2.as_single_gaussian().unwrap().1, 5.0);
        assert!(rep.p2.as_single_gaussian().unwrap().0.abs() < 1e-9);
        assert!(close(rep.p1.pdf(rep.y), 0.153_599_3, 1e-6));
        assert!(close(rep.s1.value, -0.289_195_6, 1e-6));
        assert!(close(rep.s2.value, -0.323_330_5, 1e-6));

        let rep = construct_witness(&ScoreSpec::Power { alpha: 2.0 }, 2.0, &opts).unwrap();
        assert!(close(rep.p1.pdf(rep.y), 0.1, 1e-12));
        assert!(close(rep.y, 1.663_52, 1e-5));
        let (mu2, sigma2) = rep.p2.as_single_gaussian().unwrap();
        assert_eq!(sigma2, 2.0);
        assert!(close(rep.y - mu2, 3.327_0, 1e-3));
        assert!(close(rep.s1.value, 0.082_094_8, 1e-7));
        assert!(close(rep.s2.value, 0.041_047_4, 1e-7));

        for r in [1.5, 2.0, 10.0, 100.0, f64::INFINITY] {
            let rep = construct_witness(&ScoreSpec::Crps, r, &opts).unwrap();
            assert!(rep.verified && rep.ratio >= r * (1.0 - 1e-6));
        }
        assert!(construct_witness(&ScoreSpec::Ignorance, 2.0, &opts).is_err());
        assert!(construct_witness(&ScoreSpec::Crps, 0.5, &opts).is_err());
    }

    #[test]
    fn relative_score_examples() {
        let opts = ScoreOptions::default();
        let spec = ScoreSpec::Power { alpha: 2.0 };
        let (a, b) = (figures::fig3_system_a(), figures::fig3_system_b());
        let c = relative_score_curve(&spec, &a, &b, &[-5.0], &opts).unwrap();
        assert!(close(c[0].1, 0.281_559_5, 1e-7));
        let spec = ScoreSpec::Pseudospherical { beta: 2.0 };
        let (a, b) = (figures::fig4_system_a(), figures::fig4_system_b());
        let c = relative_score_curve(&spec, &a, &b, &[0.0], &opts).unwrap();
        assert!(close(c[0].1, -0.415_212_0, 1e-7));
        let grid = [-1.0, 0.0, 2.5];
        for spec in [ScoreSpec::Crps, ScoreSpec::Ignorance, ScoreSpec::Power { alpha: 1.5 }] {
            let c = relative_score_curve(&spec, &a, &a, &grid, &opts).unwrap();
            assert!(c.iter().all(|(_, v)| *v == 0.0));
        }
    }

    #[test]
    fn transformation_examples() {
        let opts = ScoreOptions::default();
        let a = MixtureDensity::gaussian_mixture(&[(0.4, 3.0, 0.5), (0.6, 5.0, 1.0)]).unwrap();
        let b = MixtureDensity::gaussian(4.5, 0.8).unwrap();
        for t in [
            Transform::Affine { scale: 2.0, shift: -1.0 },
            Transform::Cubic,
            Transform::Exp,
        ] {
            for y in [2.0, 3.7, 4.4, 6.0] {
                let (pre, post) =
                    transformed_relative_score(&ScoreSpec::Ignorance, &a, &b, y, t, &opts).unwrap();
                assert!((pre - post).abs() < 1e-9, "{t:?} {y}: {pre} {post}");
            }
        }
        let t = Transform::Affine { scale: 2.5, shift: 1.0 };
        for y in [2.0, 4.0, 5.5] {
            let (pre, post) =
                transformed_relative_score(&ScoreSpec::Crps, &a, &b, y, t, &opts).unwrap();
            assert!(close(post, 2.5 * pre, 1e-6), "{pre} {post}");
        }
        let (pre, post) = figures::figure5_row(11.7).unwrap();
        assert!(pre > 0.0 && post < 0.0, "{pre} {post}");
    }

    #[test]
    fn no_flip_for_ignorance_or_identity() {
        let opts = ScoreOptions::default();
        let (a, b) = (figures::fig5_system_a(), figures::fig5_system_b());
        let id = Transform::Affine { scale: 1.0, shift: 0.0 };
        assert!(find_preference_flip(&ScoreSpec::Crps, &a, &b, id, (10.0, 13.0), &opts)
            .unwrap()
            .is_none());
        assert!(
            find_preference_flip(&ScoreSpec::Ignorance, &a, &b, Transform::Cubic, (10.0, 13.0), &opts)
                .unwrap()
                .is_none()
        );
    }

    #[test]
    fn crps_argmin_examples() {
        let n = MixtureDensity::gaussian(5.0, 2.0).unwrap();
        assert!(close(crps_argmin_outcome(&n, (-20.0, 30.0)).unwrap(), 5.0, 1e-6));
        let a = figures::fig2_system_a();
        let m = crps_argmin_outcome(&a, (-3.0, 3.0)).unwrap();
        assert!(m.abs() < 1e-6, "{m}");
        assert!(a.pdf(m) < 1e-20);
        let skew = MixtureDensity::gaussian_mixture(&[(0.7, 0.0, 1.0), (0.3, 10.0, 1.0)]).unwrap();
        let m = crps_argmin_outcome(&skew, (-5.0, 15.0)).unwrap();
        assert!(close(m, quantile(&skew, 0.5).unwrap(), 1e-6));
        assert!(matches!(
            crps_argmin_outcome(&n, (6.0, 9.0)),
            Err(Error::NotBracketed { .. })
        ));
    }
}
