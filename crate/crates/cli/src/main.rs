//! `wqed`: spectra, scattering runs, fluorescence traces and oracle
//! comparisons written as CSV or JSON.
//!
//! Exit status is 0 on success, 2 for a rejected configuration and 3 when a
//! numerical guard trips. Failures print one line to stderr:
//!
//! ```text
//! error kind=<Kind> code=<n> message="<text>"
//! ```

mod config;
mod output;
mod run;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{
    Command, DriveSpec, Format, GridSpec, OracleSpec, PacketSpec, ParamsSpec, RunConfig, Settings,
    SuiteArg,
};

#[derive(Parser, Debug)]
#[command(name = "wqed", version, about = "Photon scattering off a two-level atom in a waveguide")]
struct Cli {
    /// JSON run configuration; flags given alongside override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Chiral transmission t_k and excitation probability on a grid.
    Spectrum(Flags),
    /// One Gaussian photon through the chiral waveguide.
    Scatter1(Flags),
    /// A Gaussian photon pair through the chiral waveguide.
    Scatter2(Flags),
    /// Bidirectional one-photon reflection and transmission on a grid.
    TwoMode(Flags),
    /// Driven Bloch trajectory, or G1(t', t) with --t-prime.
    Fluorescence(Flags),
    /// Analytic result against the discretized-continuum oracle.
    OracleCompare {
        suite: SuiteArg,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// Atom detuning.
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<f64>,
    /// Lifetime parameter; the emission rate is 2/tau.
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    kmin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    kmax: Option<f64>,
    /// Grid points, or modes per direction for oracle-compare.
    #[arg(long)]
    n: Option<usize>,
    /// Packet centre.
    #[arg(long, allow_hyphen_values = true)]
    center: Option<f64>,
    /// Packet width; for oracle-compare in units of 1/tau.
    #[arg(long, allow_hyphen_values = true)]
    width: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_im: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    k_drive: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t_end: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    dt: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t_prime: Option<f64>,
    /// Oracle band width in units of 1/tau.
    #[arg(long, allow_hyphen_values = true)]
    span: Option<f64>,
    /// Oracle input centre relative to omega, in units of 1/tau.
    #[arg(long, allow_hyphen_values = true)]
    detuning: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl Flags {
    fn into_config(self, command: Command, suite: Option<SuiteArg>) -> RunConfig {
        let oracle = command == Command::OracleCompare;
        RunConfig {
            command: Some(command),
            suite,
            params: ParamsSpec { omega: self.omega, tau: self.tau },
            grid: GridSpec {
                kmin: self.kmin,
                kmax: self.kmax,
                n: if oracle { None } else { self.n },
            },
            packet: PacketSpec {
                center: self.center,
                width: if oracle { None } else { self.width },
            },
            drive: DriveSpec {
                alpha_re: self.alpha_re,
                alpha_im: self.alpha_im,
                k_drive: self.k_drive,
                t_end: self.t_end,
                dt: self.dt,
                t_prime: self.t_prime,
            },
            oracle: OracleSpec {
                n: if oracle { self.n } else { None },
                span: self.span,
                width: if oracle { self.width } else { None },
                detuning: self.detuning,
            },
            output: self.output,
            format: self.format,
        }
    }
}

struct Failure {
    kind: String,
    code: u8,
    message: String,
}

impl Failure {
    fn config(kind: &str, message: impl ToString) -> Self {
        Failure { kind: kind.into(), code: 2, message: message.to_string() }
    }
}

impl From<wqed::Error> for Failure {
    fn from(e: wqed::Error) -> Self {
        Failure {
            kind: e.kind().into(),
            code: if e.is_numerical_guard() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn thread_pool() -> Result<(), Failure> {
    let Ok(v) = std::env::var("WQED_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::config("Config", format!("WQED_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::config("Config", e))
}

fn load_config(path: &PathBuf) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config("Io", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::config("Config", format!("{}: {e}", path.display())))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    let flags = match cli.command {
        Some(Cmd::Spectrum(f)) => f.into_config(Command::Spectrum, None),
        Some(Cmd::Scatter1(f)) => f.into_config(Command::Scatter1, None),
        Some(Cmd::Scatter2(f)) => f.into_config(Command::Scatter2, None),
        Some(Cmd::TwoMode(f)) => f.into_config(Command::TwoMode, None),
        Some(Cmd::Fluorescence(f)) => f.into_config(Command::Fluorescence, None),
        Some(Cmd::OracleCompare { suite, flags }) => flags.into_config(Command::OracleCompare, Some(suite)),
        None => RunConfig::default(),
    };
    let settings = Settings::resolve(file.overlay(flags)).map_err(|e| Failure::config("Config", e))?;
    thread_pool()?;

    let data = run::run(&settings)?;

    let io_err = |e: io::Error| Failure::config("Io", e);
    match &settings.output {
        Some(path) => {
            let f = File::create(path).map_err(|e| Failure::config("Io", format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(f);
            output::write(&mut w, &settings, &data).map_err(io_err)?;
            w.flush().map_err(io_err)
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            output::write(&mut w, &settings, &data).map_err(io_err)?;
            w.flush().map_err(io_err)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            let first = first.trim_start_matches("error: ");
            report(&Failure::config("Usage", first));
            return ExitCode::from(2);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            report(&f);
            ExitCode::from(f.code)
        }
    }
}

fn report(f: &Failure) {
    let message = f.message.replace(['\n', '\r'], " ").replace('"', "'");
    eprintln!("error kind={} code={} message=\"{message}\"", f.kind, f.code);
}
