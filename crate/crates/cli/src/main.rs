//! `breadth` command-line interface.
//!
//! Exit status: 0 on success, 1 on input or I/O errors, 2 on usage errors,
//! 3 when the run succeeded but produced no result rows.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use breadth::corpus::{Corpus, DEFAULT_MIN_PAPERS};
use breadth::mds::group_layout;
use breadth::measures::{BreadthScores, Measure};
use breadth::plot::{emit_plot, PlotPanel, PlotStyle};
use breadth::population::{run_validation, score_population, selfcite_population, skip_report_csv};
use breadth::selfcite::{RealizedRate, SelfCiteIndicators};
use breadth::synth::{generate_cohort, SelfCiteWiring, SynthConfig};
use breadth::validation::{pearson_with_ci, MatchCriteria};

#[derive(Debug, Parser)]
#[command(
    name = "breadth",
    version,
    about = "Epistemic-breadth indicators from publication embeddings"
)]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "BREADTH_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score every author on the breadth measures.
    Measure(MeasureArgs),
    /// Self-citation indicators for every author.
    Selfcite(SelfciteArgs),
    /// Match treatment authors to controls and compare the measures.
    Validate(ValidateArgs),
    /// Two-dimensional layout of one author or a treatment/control pair.
    Mds(MdsArgs),
    /// Generate a synthetic cohort with known breadth.
    Synth(SynthArgs),
    /// Correlate furthest-neighbor scores with self-citation indicators.
    Correlate(CorrelateArgs),
}

#[derive(Debug, Args)]
struct CorpusArgs {
    /// Papers file (JSON lines).
    #[arg(long, env = "BREADTH_PAPERS")]
    papers: PathBuf,
    /// Embeddings file (JSON lines or EMB1 binary).
    #[arg(long, env = "BREADTH_EMBEDDINGS")]
    embeddings: PathBuf,
    #[arg(long, env = "BREADTH_MIN_PAPERS", default_value_t = DEFAULT_MIN_PAPERS)]
    min_papers: usize,
}

#[derive(Debug, Args)]
struct MeasureArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Scores file; skipped authors go to `<stem>.skipped.csv` beside it.
    #[arg(long, env = "BREADTH_OUT")]
    out: PathBuf,
    /// Comma-separated subset of mean,fn,wfn,nn,aspl.
    #[arg(
        long,
        env = "BREADTH_MEASURES",
        value_delimiter = ',',
        default_value = "mean,fn,wfn,nn,aspl"
    )]
    measures: Vec<Measure>,
}

#[derive(Debug, Args)]
struct SelfciteArgs {
    #[arg(long, env = "BREADTH_PAPERS")]
    papers: PathBuf,
    #[arg(long, env = "BREADTH_OUT")]
    out: PathBuf,
    #[arg(long, env = "BREADTH_MIN_PAPERS", default_value_t = DEFAULT_MIN_PAPERS)]
    min_papers: usize,
    /// Skip authors whose first publication falls in `YEAR` or `FROM-TO`.
    #[arg(long, env = "BREADTH_EXCLUDE_FIRST_YEARS", value_parser = parse_years)]
    exclude_first_years: Option<RangeInclusive<i32>>,
    /// Average per-paper realized rates instead of pooling counts.
    #[arg(long)]
    per_paper: bool,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Treatment author ids, one per line.
    #[arg(long, env = "BREADTH_TREATMENT")]
    treatment: PathBuf,
    /// Output directory.
    #[arg(long, env = "BREADTH_OUT")]
    out: PathBuf,
    #[arg(long, env = "BREADTH_SEED", default_value_t = 0)]
    seed: u64,
    /// Allowed relative difference in publication count.
    #[arg(long, default_value_t = 0.10)]
    pub_tolerance: f64,
    /// Allowed difference in first and last publication year.
    #[arg(long, default_value_t = 1)]
    year_tolerance: i32,
}

#[derive(Debug, Args)]
struct MdsArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Lay out one author.
    #[arg(long, conflicts_with = "pair", required_unless_present = "pair")]
    author: Option<String>,
    /// Lay out a pair as `TREATMENT,CONTROL`.
    #[arg(long, value_parser = parse_pair)]
    pair: Option<(String, String)>,
    /// Scale glyph areas by harmonic authorship credit.
    #[arg(long)]
    weights: bool,
    /// Output directory.
    #[arg(long, env = "BREADTH_OUT")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Output directory.
    #[arg(long, env = "BREADTH_OUT")]
    out: PathBuf,
    #[arg(long, env = "BREADTH_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    broad: usize,
    #[arg(long, default_value_t = 100)]
    narrow: usize,
    /// Minimum papers per author; counts are drawn up to 10% above it.
    #[arg(long, default_value_t = 20)]
    papers_per_author: usize,
    /// Minimum topic count of broad authors (at least 4).
    #[arg(long, default_value_t = 4)]
    topics: usize,
    #[arg(long, default_value_t = 1.5)]
    separation: f64,
    #[arg(long, default_value_t = 0.8)]
    spread: f64,
    /// Rank of each topic's noise subspace; 0 for isotropic noise.
    #[arg(long, default_value_t = 8)]
    noise_rank: usize,
    #[arg(long, default_value_t = 64)]
    dim: usize,
    #[arg(long, default_value_t = 2005)]
    first_year: i32,
    #[arg(long, default_value_t = 2015)]
    last_year: i32,
    #[arg(long, default_value = "GEN")]
    field: String,
    /// Plant self-citations.
    #[arg(long)]
    selfcite: bool,
    #[arg(long, default_value_t = 0.3, requires = "selfcite")]
    p_within: f64,
    #[arg(long, default_value_t = 0.02, requires = "selfcite")]
    p_cross: f64,
}

#[derive(Debug, Args)]
struct CorrelateArgs {
    /// Scores file from `measure`; needs a `wfn_avg` column.
    #[arg(long)]
    scores: PathBuf,
    /// Indicators file from `selfcite`.
    #[arg(long)]
    indicators: PathBuf,
    #[arg(long, env = "BREADTH_OUT")]
    out: PathBuf,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
}

fn parse_years(s: &str) -> Result<RangeInclusive<i32>, String> {
    let parse = |t: &str| t.trim().parse::<i32>().map_err(|e| format!("bad year `{t}`: {e}"));
    let range = match s.split_once('-') {
        Some((a, b)) => parse(a)?..=parse(b)?,
        None => parse(s)?..=parse(s)?,
    };
    if range.start() > range.end() {
        return Err(format!("empty year range `{s}`"));
    }
    Ok(range)
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    match s.split_once(',') {
        Some((t, c)) if !t.is_empty() && !c.is_empty() && !c.contains(',') => Ok((t.to_owned(), c.to_owned())),
        _ => Err(format!("expected TREATMENT,CONTROL, got `{s}`")),
    }
}

/// Whether the run produced anything.
enum Outcome {
    Done,
    Empty(String),
}

fn require_file(path: &Path) -> Result<()> {
    if !path.is_file() {
        bail!("input file not found: {}", path.display());
    }
    Ok(())
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn load(args: &CorpusArgs) -> Result<Corpus> {
    require_file(&args.papers)?;
    require_file(&args.embeddings)?;
    let corpus = Corpus::load(&args.papers, &args.embeddings).context("loading corpus")?;
    let report = corpus.report();
    eprintln!(
        "loaded {} papers, {} embeddings, {} unmatched",
        report.papers,
        report.embeddings,
        report.unmatched()
    );
    Ok(corpus)
}

fn skipped_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map_or_else(|| "scores".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.skipped.csv"))
}

fn cmd_measure(args: &MeasureArgs) -> Result<Outcome> {
    let corpus = load(&args.corpus)?;
    let (scores, skipped) = score_population(&corpus, None, args.corpus.min_papers);
    let mut out = BreadthScores::csv_header(&args.measures) + "\n";
    for s in &scores {
        out += &s.csv_row(&args.measures);
        out.push('\n');
    }
    write(&args.out, &out)?;
    write(&skipped_path(&args.out), &skip_report_csv(&skipped))?;
    eprintln!("{} authors scored, {} skipped", scores.len(), skipped.len());
    Ok(if scores.is_empty() {
        Outcome::Empty("no author could be scored".into())
    } else {
        Outcome::Done
    })
}

fn cmd_selfcite(args: &SelfciteArgs) -> Result<Outcome> {
    require_file(&args.papers)?;
    let corpus = Corpus::load_papers(&args.papers).context("loading papers")?;
    let mode = if args.per_paper {
        RealizedRate::PerPaper
    } else {
        RealizedRate::Aggregate
    };
    let (rows, skipped) = selfcite_population(&corpus, args.min_papers, args.exclude_first_years.clone(), mode);
    let mut out = String::from(SelfCiteIndicators::CSV_HEADER) + "\n";
    for r in &rows {
        out += &r.csv_row();
        out.push('\n');
    }
    write(&args.out, &out)?;
    write(&skipped_path(&args.out), &skip_report_csv(&skipped))?;
    eprintln!("{} authors, {} skipped", rows.len(), skipped.len());
    Ok(if rows.is_empty() {
        Outcome::Empty("no author had indicators".into())
    } else {
        Outcome::Done
    })
}

fn read_ids(path: &Path) -> Result<Vec<String>> {
    require_file(path)?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect())
}

fn cmd_validate(args: &ValidateArgs) -> Result<Outcome> {
    let treatment = read_ids(&args.treatment)?;
    if treatment.is_empty() {
        bail!("treatment list {} is empty", args.treatment.display());
    }
    let corpus = load(&args.corpus)?;
    let criteria = MatchCriteria {
        pub_tolerance: args.pub_tolerance,
        year_tolerance: args.year_tolerance,
        rng_seed: args.seed,
        ..Default::default()
    };
    let report = run_validation(&corpus, &treatment, args.corpus.min_papers, &criteria)?;
    let dir = &args.out;
    write(&dir.join("pairs.csv"), &report.pairs_csv())?;
    write(&dir.join("effect_sizes.csv"), &report.effect_sizes_csv())?;
    write(&dir.join("summary.csv"), &report.summary_csv())?;
    let table = report.text_table();
    write(&dir.join("report.txt"), &table)?;
    print!("{table}");
    Ok(if report.comparisons.is_empty() {
        Outcome::Empty(format!("{} pairs matched; need at least 2", report.pairs.len()))
    } else {
        Outcome::Done
    })
}

fn cmd_mds(args: &MdsArgs) -> Result<Outcome> {
    let corpus = load(&args.corpus)?;
    let (name, members): (String, Vec<(&str, &str)>) = match (&args.author, &args.pair) {
        (Some(a), _) => (a.clone(), vec![(a.as_str(), "A")]),
        (None, Some((t, c))) => (format!("{t}__{c}"), vec![(t.as_str(), "T"), (c.as_str(), "C")]),
        (None, None) => bail!("either --author or --pair is required"),
    };
    let g = group_layout(&corpus, &members, args.corpus.min_papers)?;
    let weights = args.weights.then_some(g.weights.as_slice());
    let groups: Vec<&str> = g.groups.iter().map(String::as_str).collect();
    let csv = breadth::mds::coordinates_csv(&g.layout, &groups, weights)?;
    write(&args.out.join(format!("{name}.csv")), &csv)?;
    let panel = PlotPanel::from_layout(name.replace("__", " vs "), &g.layout, &groups, weights)?;
    emit_plot(&[panel], &PlotStyle::default(), args.out.join(format!("{name}.svg")))?;
    let note = g.layout.stress_note;
    eprintln!(
        "{} points; layout explains {:.1}% of the positive spectrum, negative mass {:.4}",
        groups.len(),
        100.0 * note.explained(),
        note.negative_mass
    );
    Ok(Outcome::Done)
}

fn cmd_synth(args: &SynthArgs) -> Result<Outcome> {
    let base = SynthConfig {
        n_papers: args.papers_per_author,
        n_topics: args.topics,
        topic_separation: args.separation,
        within_topic_spread: args.spread,
        noise_rank: args.noise_rank,
        dim: args.dim,
        first_year: args.first_year,
        last_year: args.last_year,
        field_label: args.field.clone(),
        selfcite: args.selfcite.then(|| SelfCiteWiring {
            p_within: args.p_within,
            p_cross: args.p_cross,
            ..Default::default()
        }),
        ..Default::default()
    };
    let cohort = generate_cohort(args.broad, args.narrow, &base, args.seed)?;
    cohort.write(&args.out)?;
    eprintln!("{} authors written to {}", cohort.authors.len(), args.out.display());
    Ok(Outcome::Done)
}

/// Column `name` of a CSV file, keyed by `author_id`; `NA` cells are dropped.
fn read_column(path: &Path, name: &str) -> Result<HashMap<String, f64>> {
    require_file(path)?;
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let find = |col: &str| {
        headers
            .iter()
            .position(|h| h == col)
            .ok_or_else(|| anyhow!("{} has no `{col}` column", path.display()))
    };
    let (id_col, value_col) = (find("author_id")?, find(name)?);
    let mut values = HashMap::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let cell = &record[value_col];
        if cell == "NA" {
            continue;
        }
        let v: f64 = cell
            .parse()
            .with_context(|| format!("{} row {}: bad `{name}` value `{cell}`", path.display(), line + 2))?;
        values.insert(record[id_col].to_owned(), v);
    }
    Ok(values)
}

fn cmd_correlate(args: &CorrelateArgs) -> Result<Outcome> {
    let wfn = read_column(&args.scores, Measure::WeightedFurthestNeighbor.column())?;
    let mut csv = String::from("indicator,n,r,ci_low,ci_high,p_value\n");
    let mut text = format!("{:<20}  {:>6}  {:>7}  {:>18}  {}\n", "indicator", "n", "r", "CI", "p");
    let mut any = false;
    for indicator in ["srr", "realized_srr", "component_indicator"] {
        let other = read_column(&args.indicators, indicator)?;
        let mut ids: Vec<&String> = wfn.keys().filter(|id| other.contains_key(*id)).collect();
        ids.sort();
        let x: Vec<f64> = ids.iter().map(|id| wfn[*id]).collect();
        let y: Vec<f64> = ids.iter().map(|id| other[*id]).collect();
        if ids.is_empty() {
            continue;
        }
        let c = pearson_with_ci(&x, &y, args.level).with_context(|| format!("correlating with {indicator}"))?;
        any = true;
        let _ = writeln!(
            csv,
            "{indicator},{},{:.6},{:.6},{:.6},{:.6e}",
            c.n, c.r, c.ci_low, c.ci_high, c.p_value
        );
        let _ = writeln!(
            text,
            "{indicator:<20}  {:>6}  {:>7.3}  {:>18}  {}",
            c.n,
            c.r,
            format!("[{:.3}, {:.3}]", c.ci_low, c.ci_high),
            c.significance_note()
        );
    }
    if !any {
        bail!(
            "no author_id appears in both {} and {}",
            args.scores.display(),
            args.indicators.display()
        );
    }
    write(&args.out, &csv)?;
    print!("{text}");
    Ok(Outcome::Done)
}

fn run(cli: &Cli) -> Result<Outcome> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring worker pool")?;
    }
    match &cli.command {
        Command::Measure(a) => cmd_measure(a),
        Command::Selfcite(a) => cmd_selfcite(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Mds(a) => cmd_mds(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Correlate(a) => cmd_correlate(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Empty(why)) => {
            eprintln!("breadth: empty result: {why}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("breadth: {e:#}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn year_windows() {
        assert_eq!(parse_years("1996-1997").unwrap(), 1996..=1997);
        assert_eq!(parse_years("2001").unwrap(), 2001..=2001);
        assert!(parse_years("1997-1996").is_err());
        assert!(parse_years("x").is_err());
    }

    #[test]
    fn pairs() {
        assert_eq!(parse_pair("a,b").unwrap(), ("a".into(), "b".into()));
        assert!(parse_pair("a").is_err());
        assert!(parse_pair("a,b,c").is_err());
        assert!(parse_pair(",b").is_err());
    }

    #[test]
    fn skipped_report_sits_beside_output() {
        assert_eq!(
            skipped_path(Path::new("out/scores.csv")),
            Path::new("out/scores.skipped.csv")
        );
    }
}
