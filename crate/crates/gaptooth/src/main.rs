use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gaptooth::cli::{self, DumpKind, ExperimentFile, StencilDumpArgs};
use gaptooth::stencil::Side;

#[derive(Parser)]
#[command(name = "gaptooth", version, about = "Gap-tooth scheme laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scheme to t_end and write snapshot rows.
    Simulate(RunArgs),
    /// Growth rates of the linearised one-step map.
    Spectrum(RunArgs),
    /// Macro-refinement study over the configured teeth list.
    Convergence(RunArgs),
    /// Micro-refinement study over the configured micro point list.
    Resolution(RunArgs),
    /// Print interpolation or derivative stencil weights.
    StencilDump(StencilArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment file.
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in experiment: table1..table5, fig1 or fig6.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Directory for CSV artefacts.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for the per-tooth eigenproblem columns.
    #[arg(long, value_name = "N")]
    parallel: Option<usize>,
    /// Shorthand for --override time.dt=VALUE.
    #[arg(long, value_name = "SECONDS")]
    dt: Option<f64>,
    /// Dotted-path override, e.g. --override geometry.teeth=32.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct StencilArgs {
    /// Edge offset as a fraction of the macro spacing, in [0, 0.5).
    #[arg(long)]
    r: f64,
    /// Interpolation order: 2, 4, 6 or 8.
    #[arg(long)]
    order: usize,
    #[arg(long, value_enum, default_value_t = KindArg::Value)]
    kind: KindArg,
    #[arg(long, value_enum, default_value_t = SideArg::Right)]
    side: SideArg,
    /// Directory for CSV artefacts.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Value,
    Derivative,
}

impl From<KindArg> for DumpKind {
    fn from(kind: KindArg) -> Self {
        match kind {
            KindArg::Value => DumpKind::Value,
            KindArg::Derivative => DumpKind::Derivative,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

impl From<SideArg> for Side {
    fn from(side: SideArg) -> Self {
        match side {
            SideArg::Left => Side::Left,
            SideArg::Right => Side::Right,
        }
    }
}

fn load(args: &RunArgs) -> gaptooth::Result<(ExperimentFile, Option<PathBuf>)> {
    let file = cli::load_experiment(
        args.config.as_deref(),
        args.preset.as_deref(),
        &args.overrides,
        args.dt,
    )?;
    let out = args.out.clone().or_else(|| file.output.dir.clone());
    Ok((file, out))
}

fn dispatch(cli: Cli, sink: &mut dyn Write) -> gaptooth::Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let (file, out) = load(&args)?;
            cli::cmd_simulate(&file, out.as_deref(), sink)?;
        }
        Command::Spectrum(args) => {
            let (file, out) = load(&args)?;
            cli::cmd_spectrum(&file, out.as_deref(), args.parallel.unwrap_or(1), sink)?;
        }
        Command::Convergence(args) => {
            let (file, out) = load(&args)?;
            cli::cmd_convergence(&file, out.as_deref(), args.parallel.unwrap_or(1), sink)?;
        }
        Command::Resolution(args) => {
            let (file, out) = load(&args)?;
            cli::cmd_resolution(&file, out.as_deref(), args.parallel.unwrap_or(1), sink)?;
        }
        Command::StencilDump(args) => {
            let dump = StencilDumpArgs {
                r: args.r,
                order: args.order,
                kind: args.kind.into(),
                side: args.side.into(),
            };
            cli::cmd_stencil_dump(&dump, args.out.as_deref(), sink)?;
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let mut sink = std::io::stdout().lock();
    if let Err(err) = dispatch(cli, &mut sink) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
