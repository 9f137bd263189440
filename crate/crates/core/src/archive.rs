//! Forecast archives: loading, empirical scores and relative Ignorance.

use std::collections::BTreeMap;
use std::io::BufRead;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{bits_from_ln, Density, DensityJson, Forecast};
use crate::error::{Error, Result};
use crate::report::sig9;
use crate::scores::{score, ScoreOptions, ScoreSpec};

/// One outcome and the forecasts issued for it, keyed by system name.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastRecord {
    /// 1-based line in the source.
    pub line: usize,
    pub forecasts: BTreeMap<String, Forecast>,
    pub outcome: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArchiveFormat {
    /// `{"forecasts":{"A":{density},...},"outcome":1.23}` per line.
    Jsonl,
    /// Header `outcome,A_mu,A_sigma,...`; one Gaussian per system.
    Csv,
}

impl std::str::FromStr for ArchiveFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" | "json" => Ok(ArchiveFormat::Jsonl),
            "csv" => Ok(ArchiveFormat::Csv),
            other => Err(Error::domain(format!("unknown archive format '{other}'"))),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    forecasts: BTreeMap<String, DensityJson>,
    outcome: f64,
}

fn detail(e: Error) -> String {
    match e {
        Error::InvalidDensity(m) | Error::Domain(m) => m,
        other => other.to_string(),
    }
}

fn finish_record(line: usize, forecasts: BTreeMap<String, Forecast>, outcome: f64) -> Result<ForecastRecord> {
    if forecasts.is_empty() {
        return Err(Error::Parse {
            line,
            message: "record has no forecasts".into(),
        });
    }
    if !outcome.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("outcome must be finite, got {outcome}"),
        });
    }
    Ok(ForecastRecord {
        line,
        forecasts,
        outcome,
    })
}

/// Read an archive. Blank JSONL lines are skipped; an empty source gives an
/// empty archive.
pub fn load_archive<R: BufRead>(source: R, format: ArchiveFormat) -> Result<Vec<ForecastRecord>> {
    match format {
        ArchiveFormat::Jsonl => load_jsonl(source),
        ArchiveFormat::Csv => load_csv(source),
    }
}

fn load_jsonl<R: BufRead>(source: R) -> Result<Vec<ForecastRecord>> {
    let mut out = Vec::new();
    for (i, text) in source.lines().enumerate() {
        let line = i + 1;
        let text = text?;
        if text.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let mut forecasts = BTreeMap::new();
        for (name, spec) in raw.forecasts {
            let f = Forecast::try_from(spec).map_err(|e| Error::Parse {
                line,
                message: format!("system '{name}': {}", detail(e)),
            })?;
            forecasts.insert(name, f);
        }
        out.push(finish_record(line, forecasts, raw.outcome)?);
    }
    Ok(out)
}

fn load_csv<R: BufRead>(source: R) -> Result<Vec<ForecastRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(source);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if headers.is_empty() {
        return Ok(Vec::new());
    }
    let outcome_col = headers
        .iter()
        .position(|h| h == "outcome")
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: "missing 'outcome' column".into(),
        })?;
    // system name -> (mu column, sigma column)
    let mut systems: BTreeMap<String, (Option<usize>, Option<usize>)> = BTreeMap::new();
    for (i, h) in headers.iter().enumerate() {
        if let Some(name) = h.strip_suffix("_mu") {
            systems.entry(name.to_string()).or_default().0 = Some(i);
        } else if let Some(name) = h.strip_suffix("_sigma") {
            systems.entry(name.to_string()).or_default().1 = Some(i);
        } else if i != outcome_col {
            return Err(Error::Parse {
                line: 1,
                message: format!("unexpected column '{h}'"),
            });
        }
    }
    let mut cols = Vec::new();
    for (name, (mu, sigma)) in systems {
        match (mu, sigma) {
            (Some(m), Some(s)) => cols.push((name, m, s)),
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("system '{name}' needs both _mu and _sigma columns"),
                })
            }
        }
    }

    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let num = |i: usize, field: &str| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::Parse {
                    line,
                    message: format!("field '{field}' is not a number"),
                })
        };
        let outcome = num(outcome_col, "outcome")?;
        let mut forecasts = BTreeMap::new();
        for (name, m, s) in &cols {
            let mu = num(*m, &format!("{name}_mu"))?;
            let sigma = num(*s, &format!("{name}_sigma"))?;
            let f = Forecast::gaussian(mu, sigma).map_err(|e| Error::Parse {
                line,
                message: format!("system '{name}': {}", detail(e)),
            })?;
            forecasts.insert(name.clone(), f);
        }
        out.push(finish_record(line, forecasts, outcome)?);
    }
    Ok(out)
}

/// Pairwise (cascade) summation in a fixed order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn forecast_of<'a>(rec: &'a ForecastRecord, system: &str) -> Result<&'a Forecast> {
    rec.forecasts.get(system).ok_or_else(|| {
        Error::Archive(format!(
            "system '{system}' is missing from the record at line {}",
            rec.line
        ))
    })
}

/// Mean score of one system over an archive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalScore {
    pub system: String,
    pub spec: ScoreSpec,
    /// +∞ when any record scored infinite.
    #[serde(serialize_with = "sig9")]
    pub mean: f64,
    pub count: usize,
    pub infinite: bool,
    pub infinite_count: usize,
    /// Sample standard deviation of the finite per-record scores.
    #[serde(serialize_with = "sig9")]
    pub sample_stdev: f64,
}

impl EmpiricalScore {
    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        self.sample_stdev / (self.count as f64).sqrt()
    }
}

/// (1/N) Σ S(p_i, Y_i) for the named system.
pub fn empirical_score(
    spec: &ScoreSpec,
    archive: &[ForecastRecord],
    system: &str,
    opts: &ScoreOptions,
) -> Result<EmpiricalScore> {
    spec.validate()?;
    if archive.is_empty() {
        return Err(Error::Archive("cannot score an empty archive".into()));
    }
    let values = archive
        .par_iter()
        .map(|rec| Ok(score(spec, forecast_of(rec, system)?, rec.outcome, opts)?.value))
        .collect::<Result<Vec<f64>>>()?;
    let infinite_count = values.iter().filter(|v| v.is_infinite()).count();
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let n = values.len() as f64;
    let mean = pairwise_sum(&values) / n;
    let sample_stdev = if finite.len() > 1 {
        let m = pairwise_sum(&finite) / finite.len() as f64;
        let sq: Vec<f64> = finite.iter().map(|v| (v - m).powi(2)).collect();
        (pairwise_sum(&sq) / (finite.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(EmpiricalScore {
        system: system.to_string(),
        spec: *spec,
        mean,
        count: values.len(),
        infinite: infinite_count > 0,
        infinite_count,
        sample_stdev,
    })
}

/// Mean of −log₂(p1(Y)/p2(Y)) and its probability-ratio reading.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelativeIgnorance {
    pub system1: String,
    pub system2: String,
    /// Negative when system1 assigns more probability to the outcomes.
    #[serde(serialize_with = "sig9")]
    pub bits: f64,
    /// 2^(−bits): how many times more probability system1 assigns on average.
    #[serde(serialize_with = "sig9")]
    pub probability_ratio: f64,
    pub count: usize,
}

pub fn relative_empirical_ignorance(
    archive: &[ForecastRecord],
    system1: &str,
    system2: &str,
) -> Result<RelativeIgnorance> {
    if archive.is_empty() {
        return Err(Error::Archive("cannot score an empty archive".into()));
    }
    let diffs = archive
        .par_iter()
        .map(|rec| {
            let l1 = forecast_of(rec, system1)?.ln_pdf(rec.outcome);
            let l2 = forecast_of(rec, system2)?.ln_pdf(rec.outcome);
            if l1 == f64::NEG_INFINITY && l2 == f64::NEG_INFINITY {
                return Err(Error::UndefinedRatio(format!(
                    "both systems have zero density at the outcome, line {}",
                    rec.line
                )));
            }
            Ok(bits_from_ln(l1) - bits_from_ln(l2))
        })
        .collect::<Result<Vec<f64>>>()?;
    let bits = pairwise_sum(&diffs) / diffs.len() as f64;
    Ok(RelativeIgnorance {
        system1: system1.to_string(),
        system2: system2.to_string(),
        bits,
        probability_ratio: (-bits).exp2(),
        count: diffs.len(),
    })
}

/// Empirical scores of every system and pairwise relative Ignorance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub count: usize,
    pub systems: Vec<String>,
    pub scores: Vec<EmpiricalScore>,
    pub relative_ignorance: Vec<RelativeIgnorance>,
}

/// Score `systems` (default: every system of the first record) under each
/// rule in `specs`.
pub fn evaluate_archive(
    archive: &[ForecastRecord],
    specs: &[ScoreSpec],
    systems: Option<&[String]>,
    opts: &ScoreOptions,
) -> Result<EvalReport> {
    let first = archive
        .first()
        .ok_or_else(|| Error::Archive("cannot score an empty archive".into()))?;
    let systems: Vec<String> = match systems {
        Some(s) => s.to_vec(),
        None => first.forecasts.keys().cloned().collect(),
    };
    let mut scores = Vec::new();
    for spec in specs {
        for s in &systems {
            scores.push(empirical_score(spec, archive, s, opts)?);
        }
    }
    let mut relative_ignorance = Vec::new();
    for (i, a) in systems.iter().enumerate() {
        for b in &systems[i + 1..] {
            relative_ignorance.push(relative_empirical_ignorance(archive, a, b)?);
        }
    }
    Ok(EvalReport {
        count: archive.len(),
        systems,
        scores,
        relative_ignorance,
    })
}
