//! Run configuration: a JSON file, command-line flags, or both.
//!
//! Flags override file values. Every field is resolved and validated into
//! [`Settings`] before any computation starts; the config hash is taken
//! over the resolved settings.

use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use wqed::oracle::{self, Preset, Suite};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    Scatter1,
    Scatter2,
    TwoMode,
    Fluorescence,
    OracleCompare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteArg {
    Scatter1,
    Scatter2,
    TwoMode,
}

impl SuiteArg {
    pub fn suite(self) -> Suite {
        match self {
            SuiteArg::Scatter1 => Suite::Scatter1,
            SuiteArg::Scatter2 => Suite::Scatter2,
            SuiteArg::TwoMode => Suite::TwoMode,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub omega: Option<f64>,
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub kmin: Option<f64>,
    pub kmax: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSpec {
    pub center: Option<f64>,
    pub width: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    pub alpha_re: Option<f64>,
    pub alpha_im: Option<f64>,
    pub k_drive: Option<f64>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub t_prime: Option<f64>,
}

/// Overrides of the built-in oracle preset, in units of `1/τ`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    pub n: Option<usize>,
    pub span: Option<f64>,
    pub width: Option<f64>,
    pub detuning: Option<f64>,
}

/// Run description as read from `--config`. Missing fields take defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub suite: Option<SuiteArg>,
    #[serde(default)]
    pub params: ParamsSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub packet: PacketSpec,
    #[serde(default)]
    pub drive: DriveSpec,
    #[serde(default)]
    pub oracle: OracleSpec,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

fn pick<T: Copy>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

impl RunConfig {
    /// `self` with every field set in `over` replaced.
    pub fn overlay(self, over: RunConfig) -> RunConfig {
        RunConfig {
            command: pick(over.command, self.command),
            suite: pick(over.suite, self.suite),
            params: ParamsSpec {
                omega: pick(over.params.omega, self.params.omega),
                tau: pick(over.params.tau, self.params.tau),
            },
            grid: GridSpec {
                kmin: pick(over.grid.kmin, self.grid.kmin),
                kmax: pick(over.grid.kmax, self.grid.kmax),
                n: pick(over.grid.n, self.grid.n),
            },
            packet: PacketSpec {
                center: pick(over.packet.center, self.packet.center),
                width: pick(over.packet.width, self.packet.width),
            },
            drive: DriveSpec {
                alpha_re: pick(over.drive.alpha_re, self.drive.alpha_re),
                alpha_im: pick(over.drive.alpha_im, self.drive.alpha_im),
                k_drive: pick(over.drive.k_drive, self.drive.k_drive),
                t_end: pick(over.drive.t_end, self.drive.t_end),
                dt: pick(over.drive.dt, self.drive.dt),
                t_prime: pick(over.drive.t_prime, self.drive.t_prime),
            },
            oracle: OracleSpec {
                n: pick(over.oracle.n, self.oracle.n),
                span: pick(over.oracle.span, self.oracle.span),
                width: pick(over.oracle.width, self.oracle.width),
                detuning: pick(over.oracle.detuning, self.oracle.detuning),
            },
            output: over.output.or(self.output),
            format: pick(over.format, self.format),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub kmin: f64,
    pub kmax: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Packet {
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Drive {
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub k_drive: f64,
    pub t_end: f64,
    pub dt: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_prime: Option<f64>,
}

/// Fully resolved run. Only the sections the command uses are present.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub command: Command,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<SuiteArg>,
    pub omega: f64,
    pub tau: f64,
    /// Whether `τ` was given explicitly; otherwise frequencies are in `1/τ`.
    pub tau_given: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub packet: Option<Packet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drive: Option<Drive>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    pub format: Format,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn finite(name: &str, x: f64) -> Result<f64, ConfigError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(ConfigError(format!("{name} must be finite, got {x}")))
    }
}

fn positive(name: &str, x: f64) -> Result<f64, ConfigError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(ConfigError(format!("{name} must be positive and finite, got {x}")))
    }
}

// Grid sizes per command when none is given.
fn default_n(command: Command) -> usize {
    match command {
        Command::Spectrum | Command::TwoMode => 1001,
        Command::Scatter1 => 481,
        _ => 121,
    }
}

// Half-width of the default grid in units of 1/τ.
fn default_half_span(command: Command) -> f64 {
    match command {
        Command::Spectrum | Command::TwoMode => 10.0,
        Command::Scatter1 => 12.0,
        _ => 8.0,
    }
}

impl Settings {
    pub fn resolve(cfg: RunConfig) -> Result<Settings, ConfigError> {
        let command = cfg
            .command
            .ok_or_else(|| ConfigError("no command given".into()))?;
        let omega = finite("omega", cfg.params.omega.unwrap_or(0.0))?;
        let tau_given = cfg.params.tau.is_some();
        let tau = positive("tau", cfg.params.tau.unwrap_or(1.0))?;
        let format = cfg.format.unwrap_or(match command {
            Command::OracleCompare => Format::Json,
            _ => Format::Csv,
        });

        let mut s = Settings {
            command,
            suite: None,
            omega,
            tau,
            tau_given,
            grid: None,
            packet: None,
            drive: None,
            preset: None,
            format,
            output: cfg.output.clone(),
        };

        match command {
            Command::Spectrum | Command::TwoMode | Command::Scatter1 | Command::Scatter2 => {
                let half = default_half_span(command) / tau;
                let kmin = finite("kmin", cfg.grid.kmin.unwrap_or(omega - half))?;
                let kmax = finite("kmax", cfg.grid.kmax.unwrap_or(omega + half))?;
                let n = cfg.grid.n.unwrap_or(default_n(command));
                if kmax <= kmin {
                    return Err(ConfigError(format!("kmax = {kmax} must exceed kmin = {kmin}")));
                }
                if n < 2 {
                    return Err(ConfigError(format!("n = {n} must be at least 2")));
                }
                s.grid = Some(Grid { kmin, kmax, n });
            }
            _ => {}
        }

        if matches!(command, Command::Scatter1 | Command::Scatter2) {
            let center = finite("center", cfg.packet.center.unwrap_or(omega))?;
            let width = positive("width", cfg.packet.width.unwrap_or(1.0 / tau))?;
            s.packet = Some(Packet { center, width });
        }

        if command == Command::Fluorescence {
            let d = &cfg.drive;
            let t_end = positive("t_end", d.t_end.unwrap_or(20.0 * tau))?;
            let dt = positive("dt", d.dt.unwrap_or(tau / 100.0))?;
            let t_prime = match d.t_prime {
                Some(t) => {
                    let t = finite("t_prime", t)?;
                    if !(0.0..=t_end).contains(&t) {
                        return Err(ConfigError(format!("t_prime = {t} must lie in [0, {t_end}]")));
                    }
                    Some(t)
                }
                None => None,
            };
            s.drive = Some(Drive {
                alpha_re: finite("alpha_re", d.alpha_re.unwrap_or(0.5 / tau.sqrt()))?,
                alpha_im: finite("alpha_im", d.alpha_im.unwrap_or(0.0))?,
                k_drive: finite("k_drive", d.k_drive.unwrap_or(omega))?,
                t_end,
                dt,
                t_prime,
            });
        }

        if command == Command::OracleCompare {
            let suite = cfg
                .suite
                .ok_or_else(|| ConfigError("oracle-compare needs a suite".into()))?;
            let base = oracle::preset(suite.suite());
            let o = &cfg.oracle;
            let n = o.n.or(cfg.grid.n).unwrap_or(base.n);
            if n < 8 {
                return Err(ConfigError(format!("n = {n} must be at least 8")));
            }
            s.suite = Some(suite);
            s.preset = Some(Preset {
                n,
                span: positive("span", o.span.unwrap_or(base.span))?,
                width: positive("width", o.width.unwrap_or(base.width))?,
                detuning: finite("detuning", o.detuning.unwrap_or(base.detuning))?,
            });
        }

        Ok(s)
    }

    /// SHA-256 of the canonical JSON form of the resolved settings.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("settings serialize");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}
