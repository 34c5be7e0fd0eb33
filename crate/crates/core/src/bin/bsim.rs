//! `bsim`: run one experiment and write its CSV and IQ outputs.
//!
//! ```text
//! bsim [--seed N] [--out DIR] [--config FILE] <experiment> [key=value ...]
//! ```

use backscatter_sim::config::KvConfig;
use backscatter_sim::error::Error;
use backscatter_sim::experiments;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bsim", version, about = "Backscatter link simulator")]
struct Cli {
    /// Base seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// key=value file applied under command-line parameters.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the resolved parameters and exit.
    #[arg(long, global = true)]
    show_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-tone advert spectrum (or a random-payload control).
    Tone(Params),
    /// Wi-Fi uplink PER and RSSI over an SNR sweep.
    Uplink(Params),
    /// Single- versus double-sideband backscatter spectra.
    #[command(name = "ssb-compare")]
    SsbCompare(Params),
    /// OFDM amplitude downlink BER through the envelope receiver.
    Downlink(Params),
    /// ZigBee uplink PER over an SNR sweep.
    Zigbee(Params),
    /// Coordination strategies against background traffic.
    Mac(Params),
    /// Periodogram of an IQ file.
    Spectrum(Params),
}

#[derive(clap::Args)]
struct Params {
    /// Experiment parameters as key=value.
    #[arg(value_name = "KEY=VALUE")]
    params: Vec<String>,
}

impl Command {
    fn split(&self) -> (&'static str, &Params) {
        match self {
            Command::Tone(p) => ("tone", p),
            Command::Uplink(p) => ("uplink", p),
            Command::SsbCompare(p) => ("ssb-compare", p),
            Command::Downlink(p) => ("downlink", p),
            Command::Zigbee(p) => ("zigbee", p),
            Command::Mac(p) => ("mac", p),
            Command::Spectrum(p) => ("spectrum", p),
        }
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    let (name, params) = cli.command.split();
    let file = match &cli.config {
        Some(path) => KvConfig::load(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?,
        None => KvConfig::default(),
    };
    let mut flags = KvConfig::parse(&params.params.join("\n"))?;
    if let Some(seed) = cli.seed {
        flags.insert("seed", seed);
    }
    let resolved = experiments::resolve(name, &[&file, &flags])?;
    if cli.show_config {
        println!("{}", resolved.to_line());
        return Ok(());
    }
    let outcome = experiments::run(name, &resolved)?;
    for path in outcome.write(&cli.out)? {
        eprintln!("wrote {}", path.display());
    }
    print!("{}", outcome.summary_text());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bsim: {e}");
            ExitCode::from(if matches!(e, Error::Parse(_)) { 2 } else { 3 })
        }
    }
}
