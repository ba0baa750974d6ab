use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use synthqa::context::ContextConfig;
use synthqa::eg::{EgKind, PER_TABLE_CAP};
use synthqa::pipeline::{generate_stream, CorpusStats, GenerateOptions};
use synthqa::sampler::io::{read_checkpoint_feed, replay, write_distribution};
use synthqa::sampler::{SamplerConfig, Strategy};
use synthqa::sim::{fig3_experiment_with, plateau_run, run_simulation};
use synthqa::table::ShapeBounds;

#[derive(Parser)]
#[command(name = "synthqa", version, about = "Synthetic reasoning QA from tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate question-context-answer examples from a table dump.
    Generate(GenerateArgs),
    /// Summarize an example corpus.
    Stats(StatsArgs),
    /// Compare sampling strategies with simulated learners.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Tables, one JSON object per line.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, env = "SYNTHQA_SEED", default_value_t = 0)]
    seed: u64,
    /// Restrict to these generators (repeatable or comma-separated).
    #[arg(long = "eg", value_delimiter = ',')]
    egs: Vec<EgKind>,
    #[arg(long, default_value_t = PER_TABLE_CAP)]
    per_table_cap: usize,
    #[arg(long, default_value_t = ShapeBounds::default().min_rows)]
    min_rows: usize,
    #[arg(long, default_value_t = ShapeBounds::default().max_rows)]
    max_rows: usize,
    #[arg(long, default_value_t = ShapeBounds::default().min_columns)]
    min_cols: usize,
    #[arg(long, default_value_t = ContextConfig::default().min_distractors)]
    min_distractors: usize,
    #[arg(long, default_value_t = ContextConfig::default().max_distractors)]
    max_distractors: usize,
    /// Context word budget for distractors; 0 disables it.
    #[arg(long, default_value_t = ContextConfig::default().word_cap)]
    word_cap: usize,
    /// Where to log rejected input lines.
    #[arg(long)]
    rejects: Option<PathBuf>,
    #[arg(long, default_value_t = 256)]
    chunk_size: usize,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Two tasks, gold and noisy labels, all three strategies.
    Fig3,
    /// Sixteen tasks run to a plateau; entropy of the final distribution.
    Plateau,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = Preset::Fig3)]
    preset: Preset,
    /// Strategy for the plateau preset and for feed replay.
    #[arg(long, default_value = "momentum")]
    strategy: String,
    #[arg(long, default_value_t = SamplerConfig::default().window)]
    w: usize,
    #[arg(long, default_value_t = SamplerConfig::default().smoothing)]
    k: usize,
    #[arg(long, default_value_t = SamplerConfig::default().epsilon)]
    eps: f64,
    #[arg(long, default_value_t = SamplerConfig::default().replay_prob)]
    lambda: f64,
    /// Number of seeds, starting at --seed.
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    #[arg(long, env = "SYNTHQA_SEED", default_value_t = 0)]
    seed: u64,
    /// Share of seeds whose orderings must hold for a zero exit status.
    #[arg(long, default_value_t = 0.9)]
    min_pass_rate: f64,
    /// Replay a checkpoint feed instead of simulating.
    #[arg(long)]
    feed: Option<PathBuf>,
    /// Directory for traces (file for feed replay).
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Simulate(a) => cmd_simulate(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

fn cmd_generate(a: GenerateArgs) -> Result<ExitCode> {
    let input = open(&a.input)?;
    let opts = GenerateOptions {
        seed: a.seed,
        egs: if a.egs.is_empty() { EgKind::ALL.to_vec() } else { a.egs },
        per_table_cap: a.per_table_cap,
        bounds: ShapeBounds { min_columns: a.min_cols, min_rows: a.min_rows, max_rows: a.max_rows },
        context: ContextConfig {
            min_distractors: a.min_distractors,
            max_distractors: a.max_distractors,
            word_cap: a.word_cap,
        },
        chunk_size: a.chunk_size,
    };
    let output = create(&a.output)?;
    let mut rejects = a.rejects.as_deref().map(create).transpose()?;
    let summary = generate_stream(input, output, rejects.as_mut().map(|w| w as &mut dyn Write), &opts)?;
    if let Some(w) = rejects.as_mut() {
        w.flush()?;
    }
    eprintln!(
        "lines: {}\ntables_accepted: {}\nrejected: {}\nexamples: {}\nduplicates_dropped: {}\npeak_buffered_records: {}",
        summary.lines,
        summary.tables_accepted,
        summary.rejected,
        summary.examples,
        summary.duplicates_dropped,
        summary.peak_buffered_records
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_stats(a: StatsArgs) -> Result<ExitCode> {
    let stats = CorpusStats::from_reader(open(&a.input)?)?;
    let report = stats.report();
    match a.output {
        Some(path) => create(&path)?.write_all(report.as_bytes())?,
        None => io::stdout().lock().write_all(report.as_bytes())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("usage error: {msg}");
    ExitCode::from(2)
}

fn cmd_simulate(a: SimulateArgs) -> Result<ExitCode> {
    let strategy: Strategy = match a.strategy.parse() {
        Ok(s) => s,
        Err(e) => return Ok(usage_error(e)),
    };
    let config = SamplerConfig { strategy, window: a.w, smoothing: a.k, epsilon: a.eps, replay_prob: a.lambda, ..Default::default() };
    let n_tasks = match (&a.feed, a.preset) {
        (Some(_), _) => None,
        (None, Preset::Fig3) => Some(2),
        (None, Preset::Plateau) => Some(EgKind::ALL.len()),
    };
    if let Some(n) = n_tasks {
        if let Err(e) = config.validate(n) {
            return Ok(usage_error(e));
        }
    }
    if !(0.0..=1.0).contains(&a.min_pass_rate) {
        return Ok(usage_error("--min-pass-rate must lie in [0, 1]"));
    }

    if let Some(feed) = &a.feed {
        let (checkpoints, history) = read_checkpoint_feed(open(feed)?)?;
        if let Err(e) = config.validate(history.tasks().len()) {
            return Ok(usage_error(e));
        }
        let dists = replay(&history, &config);
        let mut out: Box<dyn Write> = match &a.output {
            Some(p) => Box::new(create(p)?),
            None => Box::new(io::stdout().lock()),
        };
        for (cp, d) in checkpoints.iter().zip(&dists) {
            write_distribution(&mut out, *cp, d)?;
        }
        out.flush()?;
        return Ok(ExitCode::SUCCESS);
    }

    let seeds: Vec<u64> = (a.seed..a.seed + a.seeds).collect();
    if seeds.is_empty() {
        return Ok(usage_error("--seeds must be at least 1"));
    }
    let passed = match a.preset {
        Preset::Fig3 => simulate_fig3(&config, &seeds, a.output.as_deref())?,
        Preset::Plateau => simulate_plateau(&config, &seeds, a.output.as_deref())?,
    };
    let rate = passed as f64 / seeds.len() as f64;
    println!("verdict: {passed}/{} seeds hold ({})", seeds.len(), if rate >= a.min_pass_rate { "PASS" } else { "FAIL" });
    Ok(if rate >= a.min_pass_rate { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn write_trace(dir: Option<&Path>, name: &str, trace: &synthqa::sim::Trace) -> Result<()> {
    if let Some(dir) = dir {
        let path = dir.join(format!("{name}.csv"));
        trace.write_csv(create(&path)?).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn simulate_fig3(config: &SamplerConfig, seeds: &[u64], dir: Option<&Path>) -> Result<usize> {
    let mut passed = 0;
    // seeds run one after another so traces stream to disk
    for &seed in seeds {
        let (report, traces) = fig3_experiment_with(config, seed)?;
        for (condition, strategy, trace) in &traces {
            write_trace(dir, &format!("fig3-seed{seed}-{}-{strategy}", condition.name()), trace)?;
        }
        for c in &report.conditions {
            println!("seed {seed} {}: {} [{}]", c.condition.name(), c.ordering(), if c.ordering_holds { "ok" } else { "violated" });
        }
        if let Some(dir) = dir {
            let path = dir.join(format!("fig3-seed{seed}.json"));
            serde_json::to_writer_pretty(create(&path)?, &report)?;
        }
        passed += usize::from(report.all_hold());
    }
    Ok(passed)
}

fn simulate_plateau(config: &SamplerConfig, seeds: &[u64], dir: Option<&Path>) -> Result<usize> {
    let log16 = (EgKind::ALL.len() as f64).ln();
    let mut passed = 0;
    for &seed in seeds {
        let mut run = plateau_run(config.strategy, None);
        run.config = config.clone();
        let trace = run_simulation(&run, seed)?;
        write_trace(dir, &format!("plateau-seed{seed}-{}", config.strategy), &trace)?;
        let h = trace.final_entropy().unwrap_or(0.0);
        let ok = match config.strategy {
            Strategy::Momentum | Strategy::Uniform => (h - log16).abs() <= 0.01,
            Strategy::Error => {
                let mut low = plateau_run(Strategy::Error, Some(0.6));
                low.config = config.clone();
                let low_h = run_simulation(&low, seed)?.final_entropy().unwrap_or(0.0);
                println!("seed {seed} error with one low ceiling: entropy {low_h:.4}");
                low_h < h
            }
        };
        println!("seed {seed} {}: final entropy {h:.4} (log 16 = {log16:.4}) [{}]", config.strategy, if ok { "ok" } else { "violated" });
        passed += usize::from(ok);
    }
    Ok(passed)
}
