//! `qcorr`: quantum-correlation analysis of states stored as JSON files.
//!
//! Exit codes: 0 success, 1 the input is not a valid state or basis,
//! 2 usage or parse error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qcorr_core::correlations::{BasisMode, MeasuredBlocks, OptimizerConfig};
use qcorr_core::io::{read_basis, read_state, state_to_json, StateData};
use qcorr_core::measurements::CutMeasurement;
use qcorr_core::partitions::Partition;
use qcorr_core::report::{analyze, parse_measures, AnalysisOptions, AnalysisReport, Measure};
use qcorr_core::zoo::{zoo, ZooParams};
use qcorr_core::Error;

#[derive(Parser)]
#[command(name = "qcorr", version, about = "Quantum discord, GMC checks and the D2 witness for N-partite states")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, env = "QCORR_SEED", default_value_t = 42, global = true)]
    seed: u64,
    /// Emit JSON (full precision) instead of aligned text.
    #[arg(long, global = true)]
    json: bool,
    /// Omit wall-clock timings so output is reproducible byte for byte.
    #[arg(long, global = true)]
    no_timing: bool,
    /// Write output to this file instead of stdout.
    #[arg(short = 'o', long = "output", global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a named state as a state file.
    Zoo(ZooArgs),
    /// Run several measures on a state (default: entropy, witness, gmc).
    Analyze(AnalyzeArgs),
    /// D2 witness W over all bipartitions.
    Witness { state: PathBuf },
    /// Genuine multipartite discord, or the gamma-discord of one cut.
    Discord(DiscordArgs),
    /// Commutator check for genuine multipartite classicality.
    Gmc(GmcArgs),
}

#[derive(Args)]
struct ZooArgs {
    /// bell, ghz, w, product, werner, classical-corr, bell-times-zero,
    /// random-pure, random-mixed.
    name: String,
    #[arg(long)]
    n: Option<usize>,
    /// Subsystem dimensions, e.g. 2,2,3.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    rank: Option<usize>,
}

#[derive(Copy, Clone, ValueEnum)]
enum PartitionMode {
    PerCut,
    PerSite,
}

#[derive(Args)]
struct OptimizerArgs {
    /// Random starts per local search batch.
    #[arg(long, default_value_t = 24)]
    starts: usize,
    #[arg(long, default_value_t = 1e-8)]
    ftol: f64,
    #[arg(long, default_value_t = 2000)]
    max_iterations: usize,
    /// Basis parameterization within each block.
    #[arg(long, value_enum, default_value_t = PartitionMode::PerCut)]
    partition_mode: PartitionMode,
    /// Measure only the gamma block when minimizing the gamma-discord.
    #[arg(long)]
    one_sided: bool,
    /// Skip the canonical (computational, Fourier, Bell, eigen) starts.
    #[arg(long)]
    no_canonical_starts: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    state: PathBuf,
    /// Comma-separated: entropy, witness, gmc, discord, convex-roof.
    #[arg(long)]
    measures: Option<String>,
    /// Restrict the discord section to this cut, e.g. "1|23".
    #[arg(long)]
    cut: Option<String>,
    #[command(flatten)]
    optimizer: OptimizerArgs,
}

#[derive(Args)]
struct DiscordArgs {
    state: PathBuf,
    #[arg(long)]
    cut: Option<String>,
    #[command(flatten)]
    optimizer: OptimizerArgs,
}

#[derive(Args)]
struct GmcArgs {
    state: PathBuf,
    /// Basis files for the gamma and gamma' blocks of --cut.
    #[arg(long, num_args = 2, value_names = ["GAMMA_BASIS", "GAMMA_PRIME_BASIS"])]
    fixed_point: Option<Vec<PathBuf>>,
    /// Cut for --fixed-point (defaults to 1|2 for two parties).
    #[arg(long)]
    cut: Option<String>,
}

enum Failure {
    Invalid(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Invalid(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn config(seed: u64, args: &OptimizerArgs) -> OptimizerConfig {
    OptimizerConfig {
        n_random_starts: args.starts,
        include_canonical_starts: !args.no_canonical_starts,
        max_iterations: args.max_iterations,
        ftol: args.ftol,
        seed,
        basis_mode: match args.partition_mode {
            PartitionMode::PerCut => BasisMode::PerCut,
            PartitionMode::PerSite => BasisMode::PerSite,
        },
        measured_blocks: if args.one_sided {
            MeasuredBlocks::GammaOnly
        } else {
            MeasuredBlocks::Both
        },
        ..OptimizerConfig::default()
    }
}

fn load(path: &Path) -> Result<StateData, Failure> {
    read_state(path).map_err(|e| match e {
        Error::Io(io) => Failure::Usage(format!("{}: {io}", path.display())),
        other => Failure::from(other).with_context(path),
    })
}

impl Failure {
    fn with_context(self, path: &Path) -> Self {
        match self {
            Failure::Invalid(m) => Failure::Invalid(format!("{}: {m}", path.display())),
            Failure::Usage(m) => Failure::Usage(format!("{}: {m}", path.display())),
        }
    }
}

fn cut_for(state: &StateData, text: Option<&str>) -> Result<Option<Partition>, Failure> {
    text.map(|t| Partition::parse(t, state.dims()))
        .transpose()
        .map_err(Failure::from)
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let render = |report: AnalysisReport| -> Result<String, Failure> {
        let text = if cli.json { report.to_json()? } else { report.to_text()? };
        Ok(text)
    };
    let base = |measures: Vec<Measure>, config: OptimizerConfig| AnalysisOptions {
        measures,
        config,
        cut: None,
        fixed_point: None,
        timing: !cli.no_timing,
    };
    match &cli.command {
        Command::Zoo(a) => {
            let params = ZooParams {
                n: a.n,
                dims: a.dims.clone(),
                p: a.p,
                rank: a.rank,
                seed: Some(cli.seed),
            };
            Ok(state_to_json(&zoo(&a.name, &params)?))
        }
        Command::Analyze(a) => {
            let state = load(&a.state)?;
            let measures = match &a.measures {
                Some(m) => parse_measures(m)?,
                None => Measure::defaults(),
            };
            let mut opts = base(measures, config(cli.seed, &a.optimizer));
            opts.cut = cut_for(&state, a.cut.as_deref())?;
            render(analyze(&state, &opts)?)
        }
        Command::Witness { state } => {
            let state = load(state)?;
            let opts = base(vec![Measure::Witness], OptimizerConfig {
                seed: cli.seed,
                ..OptimizerConfig::default()
            });
            render(analyze(&state, &opts)?)
        }
        Command::Discord(a) => {
            let state = load(&a.state)?;
            let mut opts = base(vec![Measure::Discord], config(cli.seed, &a.optimizer));
            opts.cut = cut_for(&state, a.cut.as_deref())?;
            render(analyze(&state, &opts)?)
        }
        Command::Gmc(a) => {
            let state = load(&a.state)?;
            let mut opts = base(vec![Measure::Gmc], OptimizerConfig {
                seed: cli.seed,
                ..OptimizerConfig::default()
            });
            if let Some(files) = &a.fixed_point {
                let cut = match cut_for(&state, a.cut.as_deref())? {
                    Some(c) => c,
                    None if state.dims().len() == 2 => Partition::new(&[0], state.dims())?,
                    None => return Err(Failure::Usage("--fixed-point needs --cut for more than two parties".into())),
                };
                let read = |p: &Path| {
                    read_basis(p).map_err(|e| match e {
                        Error::Io(io) => Failure::Usage(format!("{}: {io}", p.display())),
                        other => Failure::from(other).with_context(p),
                    })
                };
                let m = CutMeasurement::new(cut, read(&files[0])?, read(&files[1])?)?;
                opts.fixed_point = Some(m);
            }
            render(analyze(&state, &opts)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&cli) {
        Ok(mut text) => {
            if !text.ends_with('\n') {
                text.push('\n');
            }
            let written = match &cli.output {
                Some(path) => std::fs::write(path, &text),
                None => std::io::stdout().lock().write_all(text.as_bytes()),
            };
            match written {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("qcorr: cannot write output: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Err(Failure::Invalid(m)) => {
            eprintln!("qcorr: invalid input: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("qcorr: {m}");
            ExitCode::from(2)
        }
    }
}
