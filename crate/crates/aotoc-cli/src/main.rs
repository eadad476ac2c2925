//! Command-line front door for the A-OTOC evaluators: closed forms, the
//! exact Weingarten average, Monte-Carlo cross checks, brickwork sweeps,
//! and SVG rendering of sweep results.

mod config;
mod csv;
mod svg;

use aotoc_core::channel::{channel_moments, parse_channel_spec};
use aotoc_core::closed_form::{depol_peak, g_finite, g_thermo, CircuitParams};
use aotoc_core::weingarten::{haar_averaged_g_exact, haar_mc_average_g};
use aotoc_core::{sweep, Error};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "aotoc", about = "Haar-averaged bipartite A-OTOC of noisy encode-decode circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the closed form at finite L or in the thermodynamic limit
    Analytic {
        /// channel spec, e.g. "type=depolarizing p=0.3"
        #[arg(long)]
        channel: String,
        /// even qubit count, or "inf" for the thermodynamic limit
        #[arg(long = "L")]
        l: String,
        #[arg(long)]
        k: usize,
    },
    /// Compare the closed form against the exact Weingarten average
    Oracle {
        #[arg(long)]
        channel: String,
        #[arg(long = "L")]
        l: usize,
        #[arg(long)]
        k: usize,
        /// also run a Monte-Carlo average over this many Haar scramblers
        #[arg(long)]
        mc: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run a sweep config and write a CSV table
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// override the config's output path
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Render a sweep CSV as an SVG chart
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Interior maximum of the depolarizing curve, if any
    Peak {
        #[arg(long)]
        k: usize,
    },
}

fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

fn run(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Analytic { channel, l, k } => {
            let ch = parse_channel_spec(&channel)?;
            let m = channel_moments(&ch);
            let g = if l == "inf" {
                g_thermo(&m, k)?
            } else {
                let l: usize = l
                    .parse()
                    .map_err(|_| Error::InvalidParam(format!("L must be an even number or 'inf', got '{l}'")))?;
                g_finite(&m, &CircuitParams::new(l, k)?)?
            };
            println!("{}", fmt12(g.value()));
        }
        Command::Oracle { channel, l, k, mc, seed } => {
            let ch = parse_channel_spec(&channel)?;
            let params = CircuitParams::new(l, k)?;
            let gf = g_finite(&channel_moments(&ch), &params)?.value();
            let ge = haar_averaged_g_exact(&ch, &params)?.value();
            println!("g_finite            = {}", fmt12(gf));
            println!("weingarten_exact    = {}", fmt12(ge));
            println!("|finite - exact|    = {:.3e}", (gf - ge).abs());
            if let Some(n) = mc {
                let est = haar_mc_average_g(&ch, &params, n, seed, config::max_dense_l_from_env())?;
                println!("mc_estimate         = {} +- {:.3e}  (n = {})", fmt12(est.value), est.stderr, n);
                println!("|mc - finite|       = {:.3e}", (est.value - gf).abs());
                println!("|mc - exact|        = {:.3e}", (est.value - ge).abs());
            }
        }
        Command::Sweep { config: path, output } => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            let cfg = config::parse_sweep_config(&text)?;
            let out_path = output
                .or_else(|| cfg.output.clone().map(PathBuf::from))
                .ok_or_else(|| Error::Config("no output path (config `output` or --output)".into()))?;
            let rows = sweep::run_sweep(&cfg)?;
            std::fs::write(&out_path, csv::to_csv(&rows))
                .map_err(|e| Error::Config(format!("cannot write {}: {e}", out_path.display())))?;
            eprintln!("wrote {} rows to {}", rows.len(), out_path.display());
        }
        Command::Plot { input, output } => {
            let text = std::fs::read_to_string(&input)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", input.display())))?;
            let rows = csv::from_csv(&text)?;
            let image = svg::render(&rows)?;
            std::fs::write(&output, image)
                .map_err(|e| Error::Config(format!("cannot write {}: {e}", output.display())))?;
        }
        Command::Peak { k } => match depol_peak(k) {
            Some(p) => println!("p*({k}) = {}", fmt12(p)),
            None => println!("none (monotone in p on [0,1] for k = {k})"),
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::NumericalContract(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
