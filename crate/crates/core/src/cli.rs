//! Command-line front end: `rank`, `reduce`, `eval`, `compare` and `cuts`.
//!
//! Exit codes: 0 on success, 2 when an input or output file cannot be read,
//! written or parsed, 3 for invalid configuration.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::baselines::{rank_relieff, rank_univariate, ReliefFConfig, UnivariateMetric, RELIEFF_METHOD};
use crate::classifiers::{ClassifierSpec, Learner};
use crate::compare::{best_count, compare_all, wins_losses, BestCountRow, ComparisonOutcome, TTestVariant, WinsLossesTable};
use crate::dataset::{load_arff, load_csv, project, write_arff, write_csv, ClassSpec, Dataset};
use crate::discretize::discretize_with_cuts;
use crate::error::{Error, Result};
use crate::eval::{evaluate_ranking, stratified_folds, CvResult, QSpec};
use crate::pairwise_consistency::rank_pairwise_consistency;
use crate::pairwise_correlation::rank_pairwise_correlation;
use crate::ranking::{read_ranking_tsv, Ranking};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

pub const THREADS_ENV: &str = "PAIRRANK_THREADS";

pub const METHODS: [&str; 6] = [
    crate::pairwise_correlation::METHOD,
    crate::pairwise_consistency::METHOD,
    "info-gain",
    "chi-squared",
    "correlation",
    RELIEFF_METHOD,
];

#[derive(Debug, Parser)]
#[command(name = "pairrank", version, about = "Pairwise feature ranking and evaluation")]
pub struct Cli {
    /// Worker threads (falls back to PAIRRANK_THREADS, then all cores)
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank the attributes of a dataset
    Rank(RankArgs),
    /// Keep the top-q attributes of a ranking file
    Reduce(ReduceArgs),
    /// Cross-validate classifiers on top-q reduced datasets
    Eval(EvalArgs),
    /// Paired t-tests, wins-losses and best counts over eval results
    Compare(CompareArgs),
    /// Print the MDL cut points of every numeric attribute
    Cuts(CutsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Csv,
    Arff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Tsv,
    Json,
    Csv,
    Arff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TTestArg {
    Plain,
    Resampled,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub input: PathBuf,

    /// Defaults to the input file extension, then CSV
    #[arg(long, value_enum)]
    pub format: Option<InputFormat>,

    /// Class column name or zero-based index (default: last column)
    #[arg(long, default_value = "last")]
    pub class: String,

    #[arg(long, default_value = "?")]
    pub missing_token: String,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file, `-` for stdout
    #[arg(long, default_value = "-")]
    pub output: String,

    #[arg(long, value_enum)]
    pub output_format: Option<OutputFormat>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[arg(long)]
    pub method: String,

    /// Seed for sampled ReliefF
    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Ranking TSV produced by `rank`
    #[arg(long)]
    pub ranking: PathBuf,

    /// Number of attributes to keep, or `log2`
    #[arg(long)]
    pub q: String,

    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Comma-separated ranking methods
    #[arg(long, value_delimiter = ',', required_unless_present = "ranking")]
    pub method: Vec<String>,

    /// Ranking TSV files to evaluate instead of ranking here
    #[arg(long, conflicts_with = "method")]
    pub ranking: Vec<PathBuf>,

    /// Comma-separated q values; `log2` stands for floor(log2 n)
    #[arg(long, value_delimiter = ',', default_value = "3,log2,50,100")]
    pub q: Vec<String>,

    #[arg(long, value_delimiter = ',', default_value = "naive-bayes,knn")]
    pub classifiers: Vec<String>,

    #[arg(long, default_value_t = 10)]
    pub folds: usize,

    #[arg(long, default_value_t = 10)]
    pub repeats: usize,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    /// Skip q values larger than the attribute count instead of failing
    #[arg(long)]
    pub clamp_q: bool,

    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// JSON result files written by `eval --output-format json`
    #[arg(long, required = true, num_args = 1..)]
    pub results: Vec<PathBuf>,

    #[arg(long, default_value_t = crate::compare::DEFAULT_ALPHA)]
    pub alpha: f64,

    #[arg(long, value_enum, default_value = "resampled")]
    pub ttest: TTestArg,

    #[arg(long, default_value = "-")]
    pub output: String,
}

#[derive(Debug, Args)]
pub struct CutsArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Serialize)]
pub struct ComparisonReport {
    pub alpha: f64,
    pub ttest: TTestVariant,
    pub outcomes: Vec<ComparisonOutcome>,
    pub wins_losses: WinsLossesTable,
    pub best_count: Vec<BestCountRow>,
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                EXIT_INPUT
            } else {
                EXIT_CONFIG
            }
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) if !v.trim().is_empty() => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::invalid(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?,
            ),
            _ => None,
        },
    };
    if n == Some(0) {
        return Err(Error::invalid("thread count must be at least 1"));
    }
    Ok(n)
}

pub fn execute(cli: Cli) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count(cli.threads)? {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::invalid(format!("cannot start thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Rank(a) => cmd_rank(&a),
        Command::Reduce(a) => cmd_reduce(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::Cuts(a) => cmd_cuts(&a),
    })
}

fn load(data: &DataArgs) -> Result<Dataset> {
    let format = data.format.unwrap_or_else(|| {
        match data.input.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("arff") => InputFormat::Arff,
            _ => InputFormat::Csv,
        }
    });
    let class: ClassSpec = data.class.parse().unwrap_or_default();
    log::info!("loading {}", data.input.display());
    let ds = match format {
        InputFormat::Csv => load_csv(&data.input, &class, &data.missing_token)?,
        InputFormat::Arff => load_arff(&data.input, &class)?,
    };
    log::info!(
        "{}: {} instances, {} attributes, {} classes",
        ds.name(),
        ds.n_instances(),
        ds.n_attributes(),
        ds.n_classes()
    );
    Ok(ds)
}

fn io_error(path: &str, source: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from(path),
        source,
    }
}

/// Streams output to `path`, or stdout for `-`.
fn write_output(path: &str, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    if path == "-" {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        body(&mut lock)?;
        lock.flush().map_err(|e| io_error(path, e))
    } else {
        let file = File::create(path).map_err(|e| io_error(path, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush().map_err(|e| io_error(path, e))
    }
}

fn expect_format(out: &OutputArgs, allowed: &[OutputFormat], default: OutputFormat) -> Result<OutputFormat> {
    let f = out.output_format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(Error::invalid(format!(
            "output format {f:?} is not available for this command"
        )))
    }
}

pub fn rank_with_method(ds: &Dataset, method: &str, seed: u64) -> Result<Ranking> {
    log::info!("ranking with {method}");
    match method {
        crate::pairwise_correlation::METHOD => rank_pairwise_correlation(ds),
        crate::pairwise_consistency::METHOD => rank_pairwise_consistency(ds),
        "info-gain" => rank_univariate(ds, UnivariateMetric::InfoGain),
        "chi-squared" => rank_univariate(ds, UnivariateMetric::ChiSquared),
        "correlation" => rank_univariate(ds, UnivariateMetric::Correlation),
        RELIEFF_METHOD => rank_relieff(
            ds,
            &ReliefFConfig {
                rng_seed: seed,
                ..ReliefFConfig::default()
            },
        ),
        other => Err(Error::invalid(format!(
            "unknown method '{other}'; expected one of: {}",
            METHODS.join(", ")
        ))),
    }
}

fn cmd_rank(a: &RankArgs) -> Result<()> {
    if !METHODS.contains(&a.method.as_str()) {
        return Err(Error::invalid(format!(
            "unknown method '{}'; expected one of: {}",
            a.method,
            METHODS.join(", ")
        )));
    }
    let format = expect_format(&a.out, &[OutputFormat::Tsv, OutputFormat::Json], OutputFormat::Tsv)?;
    let ds = load(&a.data)?;
    let ranking = rank_with_method(&ds, &a.method, a.seed)?;
    write_output(&a.out.output, |w| match format {
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Row<'a> {
                rank: usize,
                attribute: &'a str,
                score: f64,
            }
            let rows: Vec<Row> = ranking
                .entries()
                .iter()
                .enumerate()
                .map(|(r, &(id, score))| Row {
                    rank: r + 1,
                    attribute: &ds.attribute_names()[id],
                    score,
                })
                .collect();
            serde_json::to_writer_pretty(&mut *w, &rows).map_err(|e| io_error(&a.out.output, e.into()))?;
            writeln!(w).map_err(|e| io_error(&a.out.output, e))
        }
        _ => ranking.write_tsv(&ds, w).map_err(|e| io_error(&a.out.output, e)),
    })
}

/// Reads a ranking file and maps its attribute names onto `ds`.
fn load_ranking(path: &Path, ds: &Dataset) -> Result<Ranking> {
    let source = path.display().to_string();
    let file = File::open(path).map_err(|e| io_error(&source, e))?;
    let rows = read_ranking_tsv(BufReader::new(file), &source)?;
    let mut entries = Vec::with_capacity(rows.len());
    for (name, score) in rows {
        let id = ds
            .attribute_index(&name)
            .ok_or_else(|| Error::invalid(format!("ranking {source} names attribute '{name}', which is not in the dataset")))?;
        entries.push((id, score));
    }
    let method = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("ranking")
        .to_string();
    Ranking::from_ordered(method, entries)
}

fn parse_q(s: &str) -> Result<QSpec> {
    s.parse()
}

fn cmd_reduce(a: &ReduceArgs) -> Result<()> {
    let q_spec = parse_q(&a.q)?;
    let ds = load(&a.data)?;
    let default = match a.data.format {
        Some(InputFormat::Arff) => OutputFormat::Arff,
        _ if a.out.output.to_ascii_lowercase().ends_with(".arff") => OutputFormat::Arff,
        _ => OutputFormat::Csv,
    };
    let format = expect_format(&a.out, &[OutputFormat::Csv, OutputFormat::Arff], default)?;
    let ranking = load_ranking(&a.ranking, &ds)?;
    let n = ds.n_attributes();
    let q = q_spec.resolve(n);
    if q > n {
        return Err(Error::invalid(format!("q = {q} exceeds the {n} available attributes")));
    }
    let reduced = project(&ds, &ranking.top(q))?;
    write_output(&a.out.output, |w| match format {
        OutputFormat::Arff => write_arff(&reduced, w),
        _ => write_csv(&reduced, w, &a.data.missing_token),
    })
}

fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let q_specs = a.q.iter().map(|s| parse_q(s)).collect::<Result<Vec<_>>>()?;
    let learners = a
        .classifiers
        .iter()
        .map(|s| s.parse::<ClassifierSpec>())
        .collect::<Result<Vec<_>>>()?;
    if learners.is_empty() {
        return Err(Error::invalid("no classifiers given"));
    }
    for m in &a.method {
        if !METHODS.contains(&m.as_str()) {
            return Err(Error::invalid(format!(
                "unknown method '{m}'; expected one of: {}",
                METHODS.join(", ")
            )));
        }
    }
    let format = expect_format(&a.out, &[OutputFormat::Tsv, OutputFormat::Json], OutputFormat::Tsv)?;
    let ds = load(&a.data)?;
    let n = ds.n_attributes();
    let mut q_list: Vec<usize> = Vec::new();
    for spec in q_specs {
        let q = spec.resolve(n);
        if q > n {
            if a.clamp_q {
                log::warn!("skipping q = {q}: only {n} attributes");
                continue;
            }
            return Err(Error::invalid(format!("q = {q} exceeds the {n} available attributes")));
        }
        if !q_list.contains(&q) {
            q_list.push(q);
        }
    }
    let plan = stratified_folds(&ds, a.folds, a.repeats, a.seed)?;
    let rankings = if a.ranking.is_empty() {
        a.method
            .iter()
            .map(|m| rank_with_method(&ds, m, a.seed))
            .collect::<Result<Vec<_>>>()?
    } else {
        a.ranking.iter().map(|p| load_ranking(p, &ds)).collect::<Result<Vec<_>>>()?
    };
    let dyn_learners: Vec<&dyn Learner> = learners.iter().map(|l| l as &dyn Learner).collect();
    let mut results: Vec<CvResult> = Vec::new();
    for ranking in &rankings {
        log::info!(
            "evaluating {} at q = {:?} with {} classifier(s), {}x{} CV",
            ranking.method(),
            q_list,
            learners.len(),
            a.repeats,
            a.folds
        );
        results.extend(evaluate_ranking(&ds, ranking, &q_list, &dyn_learners, &plan)?);
    }
    write_output(&a.out.output, |w| write_results(w, &results, format, &a.out.output))
}

fn write_results(w: &mut dyn Write, results: &[CvResult], format: OutputFormat, path: &str) -> Result<()> {
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *w, results).map_err(|e| io_error(path, e.into()))?;
            writeln!(w).map_err(|e| io_error(path, e))
        }
        _ => {
            let mut body = String::from("method\tq\tclassifier\tmean\tstddev\n");
            for r in results {
                let q = r.q.map_or_else(|| "all".to_string(), |q| q.to_string());
                body.push_str(&format!(
                    "{}\t{}\t{}\t{:.2}\t{:.2}\n",
                    r.method, q, r.classifier, r.mean, r.std_dev
                ));
            }
            w.write_all(body.as_bytes()).map_err(|e| io_error(path, e))
        }
    }
}

fn cmd_compare(a: &CompareArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&a.alpha) {
        return Err(Error::invalid(format!("alpha must lie in [0, 1], got {}", a.alpha)));
    }
    let variant = match a.ttest {
        TTestArg::Plain => TTestVariant::Plain,
        TTestArg::Resampled => TTestVariant::Resampled,
    };
    let mut results: Vec<CvResult> = Vec::new();
    for path in &a.results {
        let source = path.display().to_string();
        let file = File::open(path).map_err(|e| io_error(&source, e))?;
        let batch: Vec<CvResult> = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::parse(&source, Some(e.line()), None, e.to_string()))?;
        results.extend(batch);
    }
    let outcomes = compare_all(&results, a.alpha, variant)?;
    let report = ComparisonReport {
        alpha: a.alpha,
        ttest: variant,
        wins_losses: wins_losses(&outcomes),
        best_count: best_count(&results),
        outcomes,
    };
    write_output(&a.output, |w| {
        serde_json::to_writer_pretty(&mut *w, &report).map_err(|e| io_error(&a.output, e.into()))?;
        writeln!(w).map_err(|e| io_error(&a.output, e))
    })
}

fn cmd_cuts(a: &CutsArgs) -> Result<()> {
    let format = expect_format(&a.out, &[OutputFormat::Tsv, OutputFormat::Json], OutputFormat::Tsv)?;
    let ds = load(&a.data)?;
    let (_, cuts) = discretize_with_cuts(&ds);
    write_output(&a.out.output, |w| match format {
        OutputFormat::Json => {
            let rows: Vec<(&str, &[f64])> = cuts
                .iter()
                .map(|c| (ds.attribute_names()[c.attribute].as_str(), c.cuts()))
                .collect();
            serde_json::to_writer_pretty(&mut *w, &rows).map_err(|e| io_error(&a.out.output, e.into()))?;
            writeln!(w).map_err(|e| io_error(&a.out.output, e))
        }
        _ => {
            let mut body = String::from("attribute\tcuts\n");
            for c in &cuts {
                let list: Vec<String> = c.cuts().iter().map(|v| format!("{v}")).collect();
                body.push_str(&format!("{}\t{}\n", ds.attribute_names()[c.attribute], list.join(",")));
            }
            w.write_all(body.as_bytes()).map_err(|e| io_error(&a.out.output, e))
        }
    })
}
