use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use psl_core::analysis::{
    construct_witness, expected_score, find_preference_flip, naive_linear_counterexample,
    propriety_check, relative_expected_score, sample_propriety_cases, ExpectedOptions,
    PROPRIETY_TOL,
};
use psl_core::archive::{evaluate_archive, load_archive, ArchiveFormat, EvalReport};
use psl_core::figures::{self, figure_table, gnuplot_script, FigureOptions};
use psl_core::report::{format_number, JsonNumber, Table};
use psl_core::{Error, Forecast, MixtureDensity, MonteCarlo, ScoreOptions, ScoreSpec, Transform};

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_FINDING: u8 = 4;

#[derive(Parser)]
#[command(name = "psl", version, about = "Evaluate probabilistic forecasts with scoring rules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the data behind one of the five figures.
    Figure(FigureArgs),
    /// Score one forecast at one outcome.
    Score(ScoreArgs),
    /// Expected score of a forecast under a true distribution.
    Expected(ExpectedArgs),
    /// Search sampled forecast pairs for a propriety violation (exit 4 when found).
    CheckProper(CheckProperArgs),
    /// Build a pair of forecasts where more density at the outcome scores worse.
    FindWitness(WitnessArgs),
    /// Find outcomes where a transform reverses the preference between two forecasts.
    Flip(FlipArgs),
    /// Empirical scores of the systems in a forecast archive.
    ArchiveEval(ArchiveArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Ignorance,
    Crps,
    Energy,
    Power,
    Pseudospherical,
    #[value(name = "naive_linear", alias = "naive-linear")]
    NaiveLinear,
}

#[derive(Args, Clone)]
struct FamilyArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Power-score exponent.
    #[arg(long)]
    alpha: Option<f64>,
    /// Energy or pseudo-spherical exponent.
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Args, Clone)]
struct McArgs {
    /// Seed for Monte-Carlo estimates.
    #[arg(long, env = "PSL_DEFAULT_SEED")]
    seed: Option<u64>,
    #[arg(long, default_value_t = psl_core::scores::DEFAULT_MC_SAMPLES)]
    samples: usize,
}

#[derive(Args, Clone)]
struct OutArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    id: u8,
    #[arg(long)]
    points: Option<usize>,
    /// Largest sigma of figure 1.
    #[arg(long)]
    sigma_max: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    y_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    y_max: Option<f64>,
    /// Also write a gnuplot script (next to --out, or to stderr).
    #[arg(long)]
    gnuplot: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Density JSON, or @path to a file holding it.
    #[arg(long)]
    density: String,
    #[arg(long, allow_negative_numbers = true)]
    outcome: f64,
    /// Floor applied to the density inside Ignorance.
    #[arg(long)]
    ignorance_floor: Option<f64>,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ExpectedArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Forecast density; give it twice to get the first minus the second.
    #[arg(long, num_args = 1, required = true)]
    density: Vec<String>,
    #[arg(long)]
    truth: String,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct CheckProperArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Number of sampled (truth, candidate) pairs.
    #[arg(long, default_value_t = 50)]
    pairs: usize,
    /// Seed for sampling the forecast pairs.
    #[arg(long, default_value_t = 1)]
    pair_seed: u64,
    #[arg(long, default_value_t = PROPRIETY_TOL)]
    tol: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct WitnessArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Required density ratio p1(y)/p2(y); `inf` is accepted.
    #[arg(long)]
    ratio: f64,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct FlipArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// The two untransformed densities; defaults to the figure-5 pair.
    #[arg(long, num_args = 1)]
    density: Vec<String>,
    #[arg(long, value_enum, default_value = "cubic")]
    transform: TransformKind,
    /// Transform parameters, e.g. `2,1` for affine scale 2 and shift 1.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    transform_params: Vec<f64>,
    #[arg(long, allow_negative_numbers = true)]
    y_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    y_max: Option<f64>,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformKind {
    Cubic,
    Affine,
    Exp,
}

#[derive(Args)]
struct ArchiveArgs {
    #[arg(long)]
    archive: PathBuf,
    /// Archive layout; inferred from the file extension when absent.
    #[arg(long)]
    archive_format: Option<String>,
    /// Systems to score, e.g. `A,B`; all systems by default.
    #[arg(long, value_delimiter = ',')]
    systems: Option<Vec<String>>,
    /// Rules to apply, e.g. `ignorance,crps,power:2`.
    #[arg(long, value_delimiter = ',', default_value = "ignorance,crps")]
    scores: Vec<String>,
    #[arg(long)]
    ignorance_floor: Option<f64>,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Core(e.into())
    }
}

type Run = Result<u8, Failure>;

fn exit_code(f: &Failure) -> u8 {
    match f {
        Failure::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_VALIDATION,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            match &f {
                Failure::Usage(msg) => eprintln!("error: {msg}"),
                Failure::Core(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(exit_code(&f))
        }
    }
}

fn run(cli: Cli) -> Run {
    match cli.command {
        Command::Figure(a) => cmd_figure(a),
        Command::Score(a) => cmd_score(a),
        Command::Expected(a) => cmd_expected(a),
        Command::CheckProper(a) => cmd_check_proper(a),
        Command::FindWitness(a) => cmd_find_witness(a),
        Command::Flip(a) => cmd_flip(a),
        Command::ArchiveEval(a) => cmd_archive_eval(a),
    }
}

fn spec_of(f: &FamilyArgs) -> Result<ScoreSpec, Failure> {
    let need = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| Failure::Usage(format!("--{name} is required for this family")))
    };
    let spec = match f.family {
        Family::Ignorance => ScoreSpec::Ignorance,
        Family::Crps => ScoreSpec::Crps,
        Family::Energy => ScoreSpec::Energy {
            beta: need(f.beta, "beta")?,
        },
        Family::Power => ScoreSpec::Power {
            alpha: need(f.alpha, "alpha")?,
        },
        Family::Pseudospherical => ScoreSpec::Pseudospherical {
            beta: need(f.beta, "beta")?,
        },
        Family::NaiveLinear => ScoreSpec::NaiveLinear,
    };
    spec.validate()?;
    Ok(spec)
}

/// `family` or `family:param`, e.g. `power:2`.
fn parse_spec(s: &str) -> Result<ScoreSpec, Failure> {
    let (name, param) = match s.split_once(':') {
        Some((n, p)) => (
            n,
            Some(
                p.parse::<f64>()
                    .map_err(|_| Failure::Usage(format!("bad parameter in score '{s}'")))?,
            ),
        ),
        None => (s, None),
    };
    let family = Family::from_str(name, true)
        .map_err(|_| Failure::Usage(format!("unknown score family '{name}'")))?;
    spec_of(&FamilyArgs {
        family,
        alpha: param,
        beta: param,
    })
}

fn read_density(arg: &str) -> Result<Forecast, Failure> {
    let text = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)?,
        None => arg.to_string(),
    };
    Ok(Forecast::from_json(&text)?)
}

fn base_density(arg: &str) -> Result<MixtureDensity, Failure> {
    match read_density(arg)? {
        Forecast::Base(b) => Ok(b),
        Forecast::Transformed(_) => Err(Failure::Usage(
            "flip takes untransformed densities; use --transform instead".into(),
        )),
    }
}

fn score_options(mc: &McArgs, floor: Option<f64>) -> ScoreOptions {
    ScoreOptions {
        monte_carlo: mc.seed.map(|s| MonteCarlo::with_samples(s, mc.samples)),
        ignorance_floor: floor,
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json<T: Serialize>(value: &T, out: &Option<PathBuf>) -> Result<(), Failure> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

/// A single-row CSV of named fields.
fn emit_row(fields: &[(&str, String)], out: &Option<PathBuf>) -> Result<(), Failure> {
    let mut w = sink(out)?;
    let names: Vec<&str> = fields.iter().map(|f| f.0).collect();
    let values: Vec<&str> = fields.iter().map(|f| f.1.as_str()).collect();
    writeln!(w, "{}", names.join(","))?;
    writeln!(w, "{}", values.join(","))?;
    Ok(())
}

fn emit_table(t: &Table, format: Format, out: &Option<PathBuf>) -> Result<(), Failure> {
    match format {
        Format::Csv => t.write_csv(sink(out)?)?,
        Format::Json => emit_json(t, out)?,
    }
    Ok(())
}

fn cmd_figure(a: FigureArgs) -> Run {
    let opts = FigureOptions {
        points: a.points,
        sigma_max: a.sigma_max,
        y_min: a.y_min,
        y_max: a.y_max,
    };
    let table = figure_table(a.id, &opts)?;
    emit_table(&table, a.format, &a.out)?;
    if a.gnuplot {
        match &a.out {
            Some(path) => {
                let script = gnuplot_script(a.id, &path.to_string_lossy())?;
                std::fs::write(path.with_extension("gp"), script)?;
            }
            None => eprint!("{}", gnuplot_script(a.id, "figure.csv")?),
        }
    }
    Ok(0)
}

fn value_fields(v: &psl_core::ScoreValue) -> Vec<(&'static str, String)> {
    vec![
        ("value", format_number(v.value)),
        ("stderr", v.stderr.map_or(String::new(), format_number)),
        ("infinite", v.infinite.to_string()),
    ]
}

fn cmd_score(a: ScoreArgs) -> Run {
    let spec = spec_of(&a.family)?;
    let d = read_density(&a.density)?;
    let opts = score_options(&a.mc, a.ignorance_floor);
    let v = psl_core::scores::score(&spec, &d, a.outcome, &opts)?;
    match a.out.format {
        Format::Json => emit_json(
            &json!({"score": spec, "outcome": JsonNumber(a.outcome), "result": v}),
            &a.out.out,
        )?,
        Format::Csv => emit_row(&value_fields(&v), &a.out.out)?,
    }
    Ok(0)
}

fn cmd_expected(a: ExpectedArgs) -> Run {
    let spec = spec_of(&a.family)?;
    let truth = read_density(&a.truth)?;
    let opts = ExpectedOptions {
        monte_carlo: a.mc.seed.map(|s| MonteCarlo::with_samples(s, a.mc.samples)),
        ..ExpectedOptions::default()
    };
    let v = match a.density.as_slice() {
        [d] => expected_score(&spec, &read_density(d)?, &truth, &opts)?,
        [d1, d2] => relative_expected_score(&spec, &read_density(d1)?, &read_density(d2)?, &truth, &opts)?,
        _ => return Err(Failure::Usage("give --density once or twice".into())),
    };
    match a.out.format {
        Format::Json => emit_json(
            &json!({"score": spec, "relative": a.density.len() == 2, "result": v}),
            &a.out.out,
        )?,
        Format::Csv => emit_row(&value_fields(&v), &a.out.out)?,
    }
    Ok(0)
}

fn cmd_check_proper(a: CheckProperArgs) -> Run {
    let spec = spec_of(&a.family)?;
    let mut cases = sample_propriety_cases(a.pair_seed, a.pairs)?;
    cases.push(naive_linear_counterexample());
    let report = propriety_check(&spec, &cases, a.tol, &ExpectedOptions::default())?;
    match a.out.format {
        Format::Json => emit_json(&report, &a.out.out)?,
        Format::Csv => emit_row(
            &[
                ("family", spec.label()),
                ("pairs_checked", report.pairs_checked.to_string()),
                ("min_margin", format_number(report.min_margin)),
                ("violations", report.violations.len().to_string()),
                ("weak_pairs", report.weak_pairs.len().to_string()),
                ("proper", report.proper.to_string()),
            ],
            &a.out.out,
        )?,
    }
    Ok(if report.proper { 0 } else { EXIT_FINDING })
}

fn cmd_find_witness(a: WitnessArgs) -> Run {
    let spec = spec_of(&a.family)?;
    let report = construct_witness(&spec, a.ratio, &score_options(&a.mc, None))?;
    match a.out.format {
        Format::Json => emit_json(&report, &a.out.out)?,
        Format::Csv => emit_row(
            &[
                ("family", spec.label()),
                ("y", format_number(report.y)),
                ("ratio", format_number(report.ratio)),
                ("s1", format_number(report.s1.value)),
                ("s2", format_number(report.s2.value)),
                ("verified", report.verified.to_string()),
            ],
            &a.out.out,
        )?,
    }
    Ok(0)
}

fn cmd_flip(a: FlipArgs) -> Run {
    let spec = spec_of(&a.family)?;
    let (pa, pb, default_range) = match a.density.as_slice() {
        [] => (figures::fig5_system_a(), figures::fig5_system_b(), (10.0, 13.0)),
        [d1, d2] => {
            let (pa, pb) = (base_density(d1)?, base_density(d2)?);
            (pa, pb, (f64::NAN, f64::NAN))
        }
        _ => return Err(Failure::Usage("give --density twice or not at all".into())),
    };
    let lo = a.y_min.unwrap_or(default_range.0);
    let hi = a.y_max.unwrap_or(default_range.1);
    if lo.is_nan() || hi.is_nan() {
        return Err(Failure::Usage("--y-min and --y-max are required with --density".into()));
    }
    let kind = match a.transform {
        TransformKind::Cubic => "cubic",
        TransformKind::Affine => "affine",
        TransformKind::Exp => "exp",
    };
    let t = Transform::from_kind(kind, &a.transform_params)?;
    let flip = find_preference_flip(&spec, &pa, &pb, t, (lo, hi), &score_options(&a.mc, None))?;
    match a.out.format {
        Format::Json => emit_json(&json!({ "flip": flip }), &a.out.out)?,
        Format::Csv => {
            let opt = |v: Option<f64>| v.map_or("none".to_string(), format_number);
            emit_row(
                &[
                    ("found", flip.is_some().to_string()),
                    ("y", opt(flip.as_ref().map(|f| f.y))),
                    ("pre_threshold", opt(flip.as_ref().and_then(|f| f.pre_threshold))),
                    ("post_threshold", opt(flip.as_ref().and_then(|f| f.post_threshold))),
                ],
                &a.out.out,
            )?
        }
    }
    Ok(0)
}

fn archive_format(a: &ArchiveArgs) -> Result<ArchiveFormat, Failure> {
    if let Some(f) = &a.archive_format {
        return Ok(f.parse()?);
    }
    match a.archive.extension().and_then(|e| e.to_str()) {
        Some("csv") => Ok(ArchiveFormat::Csv),
        _ => Ok(ArchiveFormat::Jsonl),
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Core(Error::Io(format!("{}: {e}", path.display()))))
}

fn cmd_archive_eval(a: ArchiveArgs) -> Run {
    let specs = a
        .scores
        .iter()
        .map(|s| parse_spec(s))
        .collect::<Result<Vec<_>, _>>()?;
    let records = load_archive(open(&a.archive)?, archive_format(&a)?)?;
    let opts = score_options(&a.mc, a.ignorance_floor);
    let report = evaluate_archive(&records, &specs, a.systems.as_deref(), &opts)?;
    match a.out.format {
        Format::Json => emit_json(&report, &a.out.out)?,
        Format::Csv => write_eval_csv(&report, &a.out.out)?,
    }
    Ok(0)
}

fn write_eval_csv(r: &EvalReport, out: &Option<PathBuf>) -> Result<(), Failure> {
    let mut w = sink(out)?;
    writeln!(w, "# count={}", r.count)?;
    for rel in &r.relative_ignorance {
        writeln!(
            w,
            "# relative_ignorance {} {}: bits={} probability_ratio={}",
            rel.system1,
            rel.system2,
            format_number(rel.bits),
            format_number(rel.probability_ratio)
        )?;
    }
    writeln!(w, "system,score,mean,stderr,count,infinite_count")?;
    for s in &r.scores {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            s.system,
            s.spec.label(),
            format_number(s.mean),
            format_number(s.stderr()),
            s.count,
            s.infinite_count
        )?;
    }
    Ok(())
}
