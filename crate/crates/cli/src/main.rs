use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use saddlegap_cli::{emit_report, run_experiment, ClassKind, Experiment, ExperimentConfig, Format, SetKind};
use saddlegap_core::extremal::DEFAULT_TOL;
use saddlegap_core::SymmetricBaseline;

#[derive(Parser)]
#[command(name = "saddlegap", version, about = "Rate separation experiments for quadratic saddle problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for randomized constructions.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SetArg {
    Halfdisc,
    Intervals,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    P,
    Q,
}

#[derive(Subcommand)]
enum Command {
    /// Slingshot rate vs symmetric floor on strongly monotone problems.
    RatesScsc {
        #[arg(long)]
        kappa: f64,
        #[arg(long = "T-list", value_delimiter = ',', default_value = "2,4,8,16,32,64")]
        t_list: Vec<usize>,
    },
    /// Slingshot bound vs the class-Q minimax value on monotone problems.
    RatesCc {
        #[arg(long = "L", default_value_t = 1.0)]
        l: f64,
        #[arg(long = "T-list", value_delimiter = ',', default_value = "4,8,16,32")]
        t_list: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Mesh resolution parameter.
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
    },
    /// Minimax polynomial certificates over a spectral set.
    Extremal {
        #[arg(long, value_enum)]
        set: SetArg,
        #[arg(long)]
        mu: f64,
        #[arg(long = "L")]
        l: f64,
        #[arg(long, value_enum, default_value_t = ClassArg::P)]
        class: ClassArg,
        #[arg(long = "T-list", value_delimiter = ',', default_value = "2,4,8")]
        t_list: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
    },
    /// Builds a hard instance from the dual measure and runs symmetric baselines on it.
    HardInstance {
        #[arg(long)]
        kappa: f64,
        #[arg(long = "T")]
        t: usize,
        #[arg(long, value_delimiter = ',', default_value = "gda_const,extragradient,ogda")]
        methods: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
    },
    /// Checks of the half-disc conformal map.
    ConformalValidate {
        #[arg(long, default_value_t = 600)]
        n_arc: usize,
        #[arg(long, default_value_t = 400)]
        n_seg: usize,
    },
}

fn experiment(command: Command) -> Result<Experiment, String> {
    Ok(match command {
        Command::RatesScsc { kappa, t_list } => Experiment::RatesScsc { kappa, t_list },
        Command::RatesCc { l, t_list, tol, eps } => Experiment::RatesCc { l, t_list, tol, eps },
        Command::Extremal { set, mu, l, class, t_list, tol, eps } => Experiment::ExtremalSweep {
            set: match set {
                SetArg::Halfdisc => SetKind::HalfDisc,
                SetArg::Intervals => SetKind::Intervals,
            },
            mu,
            l,
            class: match class {
                ClassArg::P => ClassKind::P,
                ClassArg::Q => ClassKind::Q,
            },
            t_list,
            tol,
            eps,
        },
        Command::HardInstance { kappa, t, methods, tol, eps } => {
            let methods = methods
                .iter()
                .map(|m| SymmetricBaseline::from_name(m).ok_or_else(|| format!("unknown method {m:?}")))
                .collect::<Result<_, _>>()?;
            Experiment::HardInstanceRun { kappa, t, methods, tol, eps }
        }
        Command::ConformalValidate { n_arc, n_seg } => Experiment::ConformalValidate { n_arc, n_seg },
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = match cli.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    let experiment = match experiment(cli.command) {
        Ok(e) => e,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let config = ExperimentConfig { experiment, seed: cli.seed };
    let outcome = run_experiment(&config).and_then(|report| {
        emit_report(&report, format, cli.out.as_deref())?;
        Ok(report.flagged())
    });
    match outcome {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("warning: {n} flagged row(s)");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
