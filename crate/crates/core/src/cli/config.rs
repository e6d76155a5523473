//! Parsed command line: clap front end and the serializable [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::angular::HalfInteger;
use crate::error::{Error, Result};
use crate::expansion::Domain;
use crate::fermi::{FermiMode, Profile, PF_THRESHOLD};
use crate::molecular::NamedDensity;

#[derive(Parser, Debug)]
#[command(name = "qorient", version, about = "Orientational order parameters from distributions, states and Wigner functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Subcommand, Debug)]
pub enum CliCommand {
    /// Order-parameter tensors of a spin state, Fermi sea, rigid-body density or sampled distribution.
    OrderParams(SystemArgs),
    /// Angular and Cartesian coefficients of grid samples.
    Expand(ExpandArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
    /// Wigner-function samples of a spin state or momentum occupation.
    Wigner(SystemArgs),
    /// Tabulate Clebsch-Gordan coefficients.
    Clebsch(ClebschArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Spin,
    Fermi,
    Molecular,
    Classical,
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Write here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Args, Debug)]
pub struct SystemArgs {
    #[arg(long, value_enum)]
    pub system: SystemKind,
    /// Spin quantum number, e.g. `1` or `3/2`.
    #[arg(long)]
    pub spin: Option<String>,
    /// Density-matrix JSON file, `mixed`, or a basis state `m=<m>`.
    #[arg(long)]
    pub state: Option<String>,
    /// `disk:pF[,smear]` or `ellipse:a,b,chi[,smear]`.
    #[arg(long)]
    pub profile: Option<String>,
    /// `uniform`, `vmf-so3:kappa,a,b,g` or `uniaxial:kappa,theta,phi`.
    #[arg(long)]
    pub density: Option<String>,
    /// Sample CSV (classical grid samples, molecular field, or Fermi occupation).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Grid domain of `--input` when the file does not declare it.
    #[arg(long)]
    pub domain: Option<Domain>,
    /// Value column of `--input` (default: first).
    #[arg(long)]
    pub column: Option<String>,
    /// Comma-separated ranks.
    #[arg(long, value_delimiter = ',')]
    pub ranks: Vec<usize>,
    #[arg(long)]
    pub band_limit: Option<usize>,
    /// Fermi symbol: `exact` or `fermi_surface`.
    #[arg(long)]
    pub mode: Option<FermiMode>,
    /// Occupation level defining p_F.
    #[arg(long)]
    pub pf_threshold: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ExpandArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub domain: Option<Domain>,
    #[arg(long)]
    pub column: Option<String>,
    #[arg(long)]
    pub band_limit: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Replace every accuracy tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Comma-separated criterion names.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ClebschArgs {
    #[arg(long)]
    pub j1: String,
    #[arg(long)]
    pub j2: String,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Spin-state source.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum StateSpec {
    Mixed,
    /// Basis state `|s, m⟩`, `m` as text (`"1/2"`).
    Basis(String),
    File(PathBuf),
}

impl StateSpec {
    fn parse(s: &str) -> Self {
        match s {
            "mixed" => StateSpec::Mixed,
            _ => match s.strip_prefix("m=") {
                Some(m) => StateSpec::Basis(m.to_string()),
                None => StateSpec::File(PathBuf::from(s)),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemSpec {
    Spin {
        /// Text form (`"3/2"`); the integer wire form of a half-integer is
        /// easy to misread.
        spin: String,
        state: StateSpec,
    },
    Fermi {
        profile: Option<Profile>,
        input: Option<PathBuf>,
        mode: FermiMode,
        pf_threshold: f64,
    },
    Molecular {
        density: Option<NamedDensity>,
        input: Option<PathBuf>,
        column: Option<String>,
    },
    Classical {
        input: PathBuf,
        domain: Option<Domain>,
        column: Option<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    OrderParams,
    Expand,
    Verify,
    Wigner,
    Clebsch,
}

/// Everything a run depends on. Serialized into every report's provenance
/// block; parsing the serialized form gives back an identical config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub system: Option<SystemSpec>,
    pub ranks: Vec<usize>,
    pub band_limit: Option<usize>,
    pub tolerance: Option<f64>,
    pub only: Vec<String>,
    pub seed: u64,
    /// `(j1, j2)` for `clebsch`, as text.
    pub couple: Option<(String, String)>,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

fn missing(flag: &str, system: &str) -> Error {
    Error::Parse(format!("--system {system} needs {flag}"))
}

impl SystemArgs {
    fn spec(&self) -> Result<SystemSpec> {
        Ok(match self.system {
            SystemKind::Spin => {
                let spin = self.spin.clone().ok_or_else(|| missing("--spin", "spin"))?;
                let s: HalfInteger = spin.parse()?;
                if s.twice() < 0 {
                    return Err(Error::Parse(format!("negative spin {spin}")));
                }
                let state = StateSpec::parse(self.state.as_deref().unwrap_or("mixed"));
                SystemSpec::Spin { spin, state }
            }
            SystemKind::Fermi => {
                let profile = self.profile.as_deref().map(str::parse).transpose()?;
                if profile.is_some() == self.input.is_some() {
                    return Err(Error::Parse("--system fermi needs exactly one of --profile, --input".into()));
                }
                let pf_threshold = self.pf_threshold.unwrap_or(PF_THRESHOLD);
                if !(pf_threshold > 0.0 && pf_threshold < 1.0) {
                    return Err(Error::Parse(format!("--pf-threshold must lie in (0, 1), got {pf_threshold}")));
                }
                SystemSpec::Fermi {
                    profile,
                    input: self.input.clone(),
                    mode: self.mode.unwrap_or(FermiMode::Exact),
                    pf_threshold,
                }
            }
            SystemKind::Molecular => {
                let density = self.density.as_deref().map(str::parse).transpose()?;
                if density.is_some() == self.input.is_some() {
                    return Err(Error::Parse("--system molecular needs exactly one of --density, --input".into()));
                }
                SystemSpec::Molecular { density, input: self.input.clone(), column: self.column.clone() }
            }
            SystemKind::Classical => SystemSpec::Classical {
                input: self.input.clone().ok_or_else(|| missing("--input", "classical"))?,
                domain: self.domain,
                column: self.column.clone(),
            },
        })
    }
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let base = |command, out: OutputArgs| RunConfig {
            command,
            system: None,
            ranks: Vec::new(),
            band_limit: None,
            tolerance: None,
            only: Vec::new(),
            seed: 0,
            couple: None,
            output: out.output,
            format: out.format,
        };
        Ok(match cli.command {
            CliCommand::OrderParams(a) => {
                let system = a.spec()?;
                let ranks = if a.ranks.is_empty() { vec![1, 2] } else { a.ranks.clone() };
                RunConfig { system: Some(system), ranks, band_limit: a.band_limit, ..base(Command::OrderParams, a.out) }
            }
            CliCommand::Wigner(a) => {
                let system = a.spec()?;
                RunConfig { system: Some(system), band_limit: a.band_limit, ..base(Command::Wigner, a.out) }
            }
            CliCommand::Expand(a) => RunConfig {
                system: Some(SystemSpec::Classical { input: a.input, domain: a.domain, column: a.column }),
                band_limit: a.band_limit,
                ..base(Command::Expand, a.out)
            },
            CliCommand::Verify(a) => {
                if let Some(t) = a.tolerance {
                    if !(t > 0.0) {
                        return Err(Error::Parse(format!("--tolerance must be positive, got {t}")));
                    }
                }
                RunConfig { tolerance: a.tolerance, only: a.only, seed: a.seed, ..base(Command::Verify, a.out) }
            }
            CliCommand::Clebsch(a) => {
                a.j1.parse::<HalfInteger>()?;
                a.j2.parse::<HalfInteger>()?;
                RunConfig { couple: Some((a.j1, a.j2)), ..base(Command::Clebsch, a.out) }
            }
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
