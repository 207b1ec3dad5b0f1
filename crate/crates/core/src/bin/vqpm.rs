//! `vqpm` command line: batch runs, sweeps, QAOA comparison, analysis.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use vqpm::harness::{
    self, compare_vqpm_qaoa, run_trials, summarize, summarize_comparison, ExperimentSpec,
    QaoaSettings, TrialRecord,
};
use vqpm::qaoa::OptimizerConfig;
use vqpm::{brute_force_solve, run, Mode, PhaseTable, PolicySpec, QuboInstance};

const COMMANDS: [&str; 6] = ["run", "sweep", "compare", "analyze", "generate", "solve"];

#[derive(Parser, Debug)]
#[command(
    name = "vqpm",
    version,
    about = "Variational power method for QUBO, simulated"
)]
#[command(args_override_self = true)]
struct Cli {
    /// key=value file; every flag of the subcommand may appear as a key.
    /// Flags on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a seeded ensemble and write one CSV row per trial.
    Run(BatchArgs),
    /// Run an ensemble for every policy/precision pair.
    Sweep(SweepArgs),
    /// Run VQPM and QAOA on the same ensemble.
    Compare(CompareArgs),
    /// Summarize a trial CSV.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Write a random instance file.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "-1,1", allow_hyphen_values = true)]
        coeff_range: CoeffRange,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the engine on one instance file.
    Solve(SolveArgs),
}

/// Problem sizes: `15`, `1..18` (inclusive) or `4,6,8`.
#[derive(Clone, Debug)]
struct Sizes(Vec<usize>);

impl FromStr for Sizes {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = |_| format!("bad size list {s:?}");
        if let Some((lo, hi)) = s.split_once("..") {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            let range: RangeInclusive<usize> =
                lo.trim().parse().map_err(bad)?..=hi.trim().parse().map_err(bad)?;
            if range.is_empty() {
                return Err(format!("empty size range {s:?}"));
            }
            return Ok(Sizes(range.collect()));
        }
        s.split(',')
            .map(|v| v.trim().parse().map_err(bad))
            .collect::<Result<_, _>>()
            .map(Sizes)
    }
}

#[derive(Clone, Copy, Debug)]
struct CoeffRange(f64, f64);

impl FromStr for CoeffRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = s
            .split_once(',')
            .ok_or_else(|| format!("expected lo,hi, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
        Ok(CoeffRange(parse(lo)?, parse(hi)?))
    }
}

#[derive(Args, Debug, Clone)]
struct EngineArgs {
    #[arg(long, default_value_t = 30)]
    max_iter: usize,
    #[arg(long, default_value = "fixed:0.01")]
    policy: PolicySpec,
    /// Decimal places kept in the qubit marginals.
    #[arg(long, default_value_t = 3)]
    precision: u32,
    #[arg(long, default_value = "variational")]
    mode: Mode,
    #[arg(long, default_value_t = 0.5)]
    success_threshold: f64,
    /// Keep iterating after a lock removes the target.
    #[arg(long)]
    continue_after_elimination: bool,
}

#[derive(Args, Debug, Clone)]
struct EnsembleArgs {
    #[arg(long, default_value = "15")]
    n: Sizes,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "-1,1", allow_hyphen_values = true)]
    coeff_range: CoeffRange,
    /// Skip exhaustive solving; target columns stay empty.
    #[arg(long)]
    no_oracle: bool,
    /// Worker threads.
    #[arg(long, env = harness::THREADS_ENV)]
    threads: Option<usize>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BatchArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[command(flatten)]
    engine: EngineArgs,
    /// Directory for per-trial iteration traces.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[command(flatten)]
    engine: EngineArgs,
    /// Policies separated by ';'. Defaults to --policy.
    #[arg(long)]
    policies: Option<String>,
    /// Precisions separated by ','. Defaults to --precision.
    #[arg(long)]
    precisions: Option<String>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, default_value_t = 8)]
    qaoa_p: usize,
    /// Objective evaluations per restart.
    #[arg(long, default_value_t = 2000)]
    qaoa_evals: usize,
    #[arg(long, default_value_t = 5)]
    qaoa_restarts: usize,
    /// Record QAOA wall time (makes the CSV run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long)]
    no_oracle: bool,
    /// Iteration trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

fn spec_from(ensemble: &EnsembleArgs, engine: &EngineArgs) -> ExperimentSpec {
    ExperimentSpec {
        n_values: ensemble.n.0.clone(),
        trials_per_n: ensemble.trials,
        base_seed: ensemble.seed,
        coeff_range: (ensemble.coeff_range.0, ensemble.coeff_range.1),
        policy: engine.policy.clone(),
        max_iter: engine.max_iter,
        precision: engine.precision,
        mode: engine.mode,
        success_threshold: engine.success_threshold,
        stop_on_elimination: !engine.continue_after_elimination,
        use_oracle: !ensemble.no_oracle,
        qaoa: None,
        threads: ensemble.threads,
    }
}

/// CSV sink that flushes after every batch so an abort keeps finished rows.
struct Sink {
    writer: csv::Writer<Box<dyn Write>>,
    to_stdout: bool,
}

impl Sink {
    fn open(path: Option<&Path>) -> anyhow::Result<Self> {
        let inner: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("creating {}", p.display()))?,
            )),
            None => Box::new(io::stdout().lock()),
        };
        Ok(Self {
            writer: csv::Writer::from_writer(inner),
            to_stdout: path.is_none(),
        })
    }

    fn write<T: serde::Serialize>(&mut self, rows: &[T]) -> anyhow::Result<()> {
        for r in rows {
            self.writer.serialize(r)?;
        }
        self.writer.flush()?;
        Ok(())
    }

    /// Summary goes to stderr when stdout carries the CSV.
    fn report(&self, text: &str) {
        if self.to_stdout {
            eprint!("{text}");
        } else {
            print!("{text}");
        }
    }
}

fn write_traces(dir: &Path, outcomes: &[harness::TrialOutcome]) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for o in outcomes {
        let path = dir.join(format!("trace_n{}_t{}.csv", o.record.n, o.record.trial));
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        o.result.trace.write_csv(BufWriter::new(file))?;
    }
    Ok(())
}

/// Runs one size at a time so finished sizes reach disk before later ones start.
fn run_by_size(
    spec: &ExperimentSpec,
    sink: &mut Sink,
    trace_dir: Option<&Path>,
) -> anyhow::Result<Vec<TrialRecord>> {
    spec.validate()?;
    let mut sizes = spec.n_values.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let mut all = Vec::new();
    for n in sizes {
        let one = ExperimentSpec {
            n_values: vec![n],
            ..spec.clone()
        };
        let outcomes = run_trials(&one)?;
        let records: Vec<_> = outcomes.iter().map(|o| o.record.clone()).collect();
        sink.write(&records)?;
        if let Some(dir) = trace_dir {
            write_traces(dir, &outcomes)?;
        }
        all.extend(records);
    }
    Ok(all)
}

fn cmd_run(args: BatchArgs) -> anyhow::Result<()> {
    let spec = spec_from(&args.ensemble, &args.engine);
    let mut sink = Sink::open(args.ensemble.out.as_deref())?;
    let records = run_by_size(&spec, &mut sink, args.trace_dir.as_deref())?;
    sink.report(&summarize(&records)?.to_table());
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> anyhow::Result<()> {
    let policies: Vec<PolicySpec> = match &args.policies {
        Some(list) => list
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse())
            .collect::<Result<_, _>>()?,
        None => vec![args.engine.policy.clone()],
    };
    let precisions: Vec<u32> = match &args.precisions {
        Some(list) => list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .with_context(|| format!("bad precision {s:?}"))
            })
            .collect::<anyhow::Result<_>>()?,
        None => vec![args.engine.precision],
    };
    let mut sink = Sink::open(args.ensemble.out.as_deref())?;
    let mut report = String::new();
    for policy in &policies {
        for &precision in &precisions {
            let engine = EngineArgs {
                policy: policy.clone(),
                precision,
                ..args.engine.clone()
            };
            let spec = spec_from(&args.ensemble, &engine);
            let records = run_by_size(&spec, &mut sink, None)?;
            report.push_str(&format!("policy {policy}, precision {precision}\n"));
            report.push_str(&summarize(&records)?.to_table());
            report.push('\n');
        }
    }
    sink.report(&report);
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> anyhow::Result<()> {
    let mut spec = spec_from(&args.ensemble, &args.engine);
    spec.qaoa = Some(QaoaSettings {
        p: args.qaoa_p,
        optimizer: OptimizerConfig {
            max_evals: args.qaoa_evals,
            restarts: args.qaoa_restarts,
            ..OptimizerConfig::default()
        },
        record_wall_time: args.timing,
    });
    let paired = compare_vqpm_qaoa(&spec)?;
    let mut sink = Sink::open(args.ensemble.out.as_deref())?;
    sink.write(&paired)?;
    let mut table = format!(
        "{:>4} {:>6} {:>12} {:>12} {:>10}\n",
        "n", "trials", "vqpm_p_tgt", "qaoa_p_tgt", "vqpm_wins"
    );
    for s in summarize_comparison(&paired)? {
        table.push_str(&format!(
            "{:>4} {:>6} {:>12.4} {:>12.4} {:>10}\n",
            s.n,
            s.trials,
            s.vqpm_mean_target_probability,
            s.qaoa_mean_target_probability,
            s.vqpm_wins
        ));
    }
    sink.report(&table);
    Ok(())
}

fn cmd_analyze(input: &Path) -> anyhow::Result<()> {
    let file = File::open(input).with_context(|| format!("opening {}", input.display()))?;
    let records: Vec<TrialRecord> = harness::read_csv(file)?;
    print!("{}", summarize(&records)?.to_table());
    Ok(())
}

fn cmd_generate(n: usize, seed: u64, range: CoeffRange, out: Option<&Path>) -> anyhow::Result<()> {
    let instance = QuboInstance::random(n, seed, (range.0, range.1))?;
    match out {
        Some(p) => instance.save(p)?,
        None => print!("{}", instance.to_text()),
    }
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> anyhow::Result<()> {
    let instance = QuboInstance::load(&args.input)
        .with_context(|| format!("loading {}", args.input.display()))?;
    let oracle = if args.no_oracle {
        None
    } else {
        Some(brute_force_solve(&instance)?)
    };
    let spec = ExperimentSpec {
        n_values: vec![instance.n()],
        ..spec_from(
            &EnsembleArgs {
                n: Sizes(vec![instance.n()]),
                trials: 1,
                seed: 0,
                coeff_range: CoeffRange(-1.0, 1.0),
                no_oracle: args.no_oracle,
                threads: None,
                out: None,
            },
            &args.engine,
        )
    };
    let config = spec.engine_config(&instance, oracle.as_ref().map(|o| o.argmin.clone()))?;
    let result = run(&PhaseTable::from_instance(&instance)?, &config)?;
    println!("found              {}", result.found);
    println!("found_probability  {:.6}", result.found_probability);
    println!("energy             {}", instance.energy(&result.found)?);
    println!("termination        {}", result.termination);
    println!("iterations_used    {}", result.iterations_used);
    println!("locked_qubits      {}", result.locks.locked_count());
    if let Some(o) = &oracle {
        let targets: Vec<_> = o.argmin.iter().map(|b| b.to_string()).collect();
        println!(
            "optimum            {} (energy {})",
            targets.join(" "),
            o.min_energy
        );
        println!("eigengap           {}", o.eigengap);
        println!(
            "target_probability {:.6}",
            result.target_probability.unwrap_or(0.0)
        );
        println!(
            "hamming_to_target  {}",
            result.hamming_to_target.unwrap_or(0)
        );
        println!("wrong_locks        {}", result.wrong_locks.unwrap_or(0));
    }
    if let Some(path) = &args.trace {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        result.trace.write_csv(BufWriter::new(file))?;
    }
    Ok(())
}

/// Turns `key = value` lines into flags. `true`/`false` toggle switches.
fn config_flags(path: &Path) -> anyhow::Result<Vec<String>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut flags = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("{}:{}: expected key=value", path.display(), no + 1);
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key == "config" {
            bail!(
                "{}:{}: nested config files are not supported",
                path.display(),
                no + 1
            );
        }
        match value {
            "true" => flags.push(format!("--{key}")),
            "false" => {}
            _ => flags.push(format!("--{key}={value}")),
        }
    }
    Ok(flags)
}

/// Splices config-file flags right after the subcommand so later command
/// line flags override them.
fn expand_config(args: Vec<String>) -> anyhow::Result<Vec<String>> {
    let mut config = None;
    for (i, a) in args.iter().enumerate() {
        if a == "--config" {
            config = args.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            config = Some(p.to_string());
        }
    }
    let Some(config) = config else {
        return Ok(args);
    };
    let Some(at) = args.iter().position(|a| COMMANDS.contains(&a.as_str())) else {
        return Ok(args);
    };
    let mut out = args[..=at].to_vec();
    out.extend(config_flags(Path::new(&config))?);
    out.extend_from_slice(&args[at + 1..]);
    Ok(out)
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse_from(expand_config(std::env::args().collect())?);
    match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Analyze { input } => cmd_analyze(&input),
        Command::Generate {
            n,
            seed,
            coeff_range,
            out,
        } => cmd_generate(n, seed, coeff_range, out.as_deref()),
        Command::Solve(a) => cmd_solve(a),
    }
}
