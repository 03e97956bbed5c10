//! Command-line arguments and the flat `key=value` config file.
//!
//! The file is spliced into argv right after the subcommand name, so any
//! flag given on the command line overrides the file (clap keeps the last
//! occurrence).

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jba_core::attractors::{Attractor, Branch};
use jba_core::model::{PhysicalParams, ScaledParams};
use jba_core::rates::{QubitParams, Regime};

use crate::error::{input, CliError, Result};
use crate::sweep::GridSpec;

pub const DEFAULT_KAPPA: f64 = 0.3;
pub const DEFAULT_BETA: f64 = 0.12;
pub const DEFAULT_NBAR: f64 = 0.5;
pub const DEFAULT_LAMBDA: f64 = 0.01;
/// Ohmic cutoff in units of ω₀ when --omega-c is absent.
pub const DEFAULT_CUTOFF_RATIO: f64 = 100.0;

#[derive(Debug, Parser)]
#[command(name = "jba", version, about = "Attractors, fluctuation spectra and qubit rates of a driven Duffing oscillator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Attractor radii and quasienergy gaps against β.
    #[command(args_override_self = true)]
    Attractors(AttractorsArgs),
    /// Fluctuation spectrum about an attractor, closed form and matrix route.
    #[command(args_override_self = true)]
    Spectrum(SpectrumArgs),
    /// Qubit rates against qubit frequency.
    #[command(args_override_self = true)]
    Rates(RatesArgs),
    /// Effective qubit temperature against β at fixed detuning.
    #[command(args_override_self = true)]
    Teff(TeffArgs),
    /// Resonant vs nonresonant rates as the frequency hierarchy deepens.
    #[command(name = "match", args_override_self = true)]
    Match(MatchArgs),
    /// Residual, Lyapunov and dual-route self-checks at one parameter set.
    #[command(args_override_self = true)]
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Selection {
    Small,
    Large,
    /// Both stable states.
    Both,
    /// Stable states and the saddle.
    All,
}

impl Selection {
    pub fn label(self) -> &'static str {
        match self {
            Selection::Small => "small",
            Selection::Large => "large",
            Selection::Both => "both",
            Selection::All => "all",
        }
    }

    pub fn keep(self, a: &Attractor) -> bool {
        match self {
            Selection::Small => a.branch == Branch::SmallAmplitude,
            Selection::Large => a.branch == Branch::LargeAmplitude,
            Selection::Both => a.branch != Branch::Unstable,
            Selection::All => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    #[value(name = "resonant-1q")]
    Resonant1q,
    #[value(name = "resonant-2q")]
    Resonant2q,
    Combined,
    Nonresonant,
    #[value(name = "nonresonant-2q")]
    Nonresonant2q,
    LinearResonant,
    LinearNonresonant,
}

impl RegimeArg {
    pub fn regime(self) -> Regime {
        match self {
            RegimeArg::Resonant1q => Regime::Resonant1Q,
            RegimeArg::Resonant2q => Regime::Resonant2Q,
            RegimeArg::Combined => Regime::Combined,
            RegimeArg::Nonresonant => Regime::Nonresonant,
            RegimeArg::Nonresonant2q => Regime::Nonresonant2Q,
            RegimeArg::LinearResonant => Regime::LinearResonant,
            RegimeArg::LinearNonresonant => Regime::LinearNonresonant,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepVar {
    /// Scaled detuning ω̃ from the regime's reference frequency.
    Detuning,
    /// Qubit frequency ω_q in rad/s.
    OmegaQ,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Flat key=value file (keys are flag names without dashes).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Scaled damping κ̃ = κ/|δω| [default: 0.3].
    #[arg(long, allow_hyphen_values = true)]
    pub kappa_scaled: Option<f64>,
    /// Drive intensity β [default: 0.12].
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    /// Bath occupation at the drive frequency [default: 0.5].
    #[arg(long, allow_hyphen_values = true)]
    pub nbar: Option<f64>,
    /// Effective Planck constant λ_S [default: 0.01].
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_s: Option<f64>,
    #[arg(long, value_enum)]
    pub attractor: Option<Selection>,
    /// Sweep grid, start:stop:count[:log].
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<GridSpec>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Fail with exit code 3 if an internal consistency check fails.
    #[arg(long)]
    pub check: bool,
    /// Output file [default: standard output].
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub lab: LabArgs,
}

/// Laboratory (SI) parameters; an alternative to the dimensionless flags.
#[derive(Debug, Clone, Default, Args)]
pub struct LabArgs {
    /// Oscillator mass, kg.
    #[arg(long)]
    pub mass: Option<f64>,
    /// Oscillator eigenfrequency ω₀, rad/s.
    #[arg(long)]
    pub omega0: Option<f64>,
    /// Drive frequency ω_F, rad/s.
    #[arg(long)]
    pub omega_f: Option<f64>,
    /// Quartic coefficient γ_S, kg/(m²·s²).
    #[arg(long)]
    pub gamma_s: Option<f64>,
    /// Drive amplitude F₀, N.
    #[arg(long)]
    pub f0: Option<f64>,
    /// Oscillator damping κ, 1/s.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Bath temperature, K.
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Ohmic cutoff ω_c, rad/s [default: 100 ω₀].
    #[arg(long)]
    pub omega_c: Option<f64>,
}

impl LabArgs {
    fn any(&self) -> bool {
        [self.mass, self.omega0, self.omega_f, self.gamma_s, self.f0, self.kappa, self.temperature, self.omega_c]
            .iter()
            .any(Option::is_some)
    }

    /// `f0` may be omitted when the caller sets it from a β sweep.
    fn physical(&self, need_f0: bool) -> Result<PhysicalParams> {
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| input(format!("SI mode needs --{name}")));
        let omega0 = need(self.omega0, "omega0")?;
        let f0 = if need_f0 { need(self.f0, "f0")? } else { self.f0.unwrap_or(0.0) };
        let p = PhysicalParams {
            mass: need(self.mass, "mass")?,
            omega0,
            omega_f: need(self.omega_f, "omega-f")?,
            gamma_s: need(self.gamma_s, "gamma-s")?,
            f0,
            kappa: need(self.kappa, "kappa")?,
            temperature: need(self.temperature, "temperature")?,
            omega_c: self.omega_c.unwrap_or(DEFAULT_CUTOFF_RATIO * omega0),
        };
        p.validate()?;
        Ok(p)
    }
}

/// Qubit constants (SI).
#[derive(Debug, Clone, Default, Args)]
pub struct QubitArgs {
    /// Transverse qubit term δ, rad/s.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Oscillator frequency shift Δ_q of the quadratic coupling, rad/s.
    #[arg(long, allow_hyphen_values = true)]
    pub delta_q: Option<f64>,
    /// Linear σ_x·x coupling, J/m.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub v_x: f64,
    /// Linear σ_z·x coupling, J/m.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub v_z: f64,
}

impl QubitArgs {
    /// A qubit with transition frequency ω_q.
    pub fn qubit(&self, omega_q: f64, regime: Regime) -> Result<QubitParams> {
        let delta = self.delta.ok_or_else(|| input("SI rates need --delta"))?;
        let linear = matches!(regime, Regime::LinearResonant | Regime::LinearNonresonant);
        let delta_q = match (self.delta_q, linear) {
            (Some(d), _) => d,
            (None, true) => 0.0,
            (None, false) => return Err(input(format!("regime {} needs --delta-q", regime.label()))),
        };
        if linear && self.v_x == 0.0 && self.v_z == 0.0 {
            return Err(input(format!("regime {} needs --v-x or --v-z", regime.label())));
        }
        let mut q = QubitParams::with_frequency(omega_q, delta, delta_q)?;
        q.v_x = self.v_x;
        q.v_z = self.v_z;
        Ok(q)
    }
}

#[derive(Debug, Args)]
pub struct AttractorsArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub qubit: QubitArgs,
    #[arg(long, value_enum, default_value = "resonant-1q")]
    pub regime: RegimeArg,
    #[arg(long, value_enum, default_value = "detuning")]
    pub sweep: SweepVar,
}

#[derive(Debug, Args)]
pub struct TeffArgs {
    #[command(flatten)]
    pub common: Common,
    /// Scaled detuning ω̃ = (ω_q − 2ω_F)/|δω|.
    #[arg(long, allow_hyphen_values = true, default_value_t = -0.2)]
    pub detuning: f64,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    #[command(flatten)]
    pub common: Common,
    /// Hierarchy factors, comma separated.
    #[arg(long = "h", value_delimiter = ',', default_value = "10,30,100")]
    pub hierarchy: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: Common,
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Attractors(a) => &a.common,
            Command::Spectrum(a) => &a.common,
            Command::Rates(a) => &a.common,
            Command::Teff(a) => &a.common,
            Command::Match(a) => &a.common,
            Command::Validate(a) => &a.common,
        }
    }
}

/// Resolved parameters: the dimensionless set, plus the laboratory set when
/// the SI flags were used.
#[derive(Debug, Clone, Copy)]
pub struct Setup {
    pub scaled: ScaledParams,
    pub physical: Option<PhysicalParams>,
}

impl Common {
    fn has_scaled_flags(&self) -> bool {
        [self.kappa_scaled, self.beta, self.nbar, self.lambda_s].iter().any(Option::is_some)
    }

    pub fn is_si(&self) -> bool {
        self.lab.any()
    }

    /// `need_f0` is false for commands that sweep β themselves.
    pub fn setup(&self, need_f0: bool) -> Result<Setup> {
        if self.is_si() {
            if self.has_scaled_flags() {
                return Err(input(
                    "give either the dimensionless flags (--beta, --kappa-scaled, --lambda-s, --nbar) or the SI flags, not both",
                ));
            }
            let p = self.lab.physical(need_f0)?;
            let scaled = jba_core::scale_params(&p)?;
            return Ok(Setup { scaled, physical: Some(p) });
        }
        let scaled = ScaledParams::dimensionless(
            self.beta.unwrap_or(DEFAULT_BETA),
            self.kappa_scaled.unwrap_or(DEFAULT_KAPPA),
            self.lambda_s.unwrap_or(DEFAULT_LAMBDA),
            self.nbar.unwrap_or(DEFAULT_NBAR),
        )?;
        Ok(Setup { scaled, physical: None })
    }

    pub fn selection(&self, default: Selection) -> Selection {
        self.attractor.unwrap_or(default)
    }

    pub fn grid(&self, default: GridSpec) -> GridSpec {
        self.grid.unwrap_or(default)
    }
}

/// Parses `key=value` lines; `#` starts a comment. Returns flag-style args.
pub fn config_args(text: &str) -> Result<Vec<OsString>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| input(format!("config line {}: expected key=value, got `{raw}`", n + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() {
            return Err(input(format!("config line {}: empty key", n + 1)));
        }
        if key == "config" {
            return Err(input(format!("config line {}: nested config files are not supported", n + 1)));
        }
        if key == "check" {
            match value {
                "true" | "1" | "yes" => out.push(OsString::from("--check")),
                "false" | "0" | "no" => {}
                _ => return Err(input(format!("config line {}: check must be true or false", n + 1))),
            }
            continue;
        }
        out.push(OsString::from(format!("--{key}={value}")));
    }
    Ok(out)
}

/// Parses argv, splicing in the config file if one is named.
pub fn parse<I, T>(argv: I) -> std::result::Result<Cli, ParseFailure>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(&argv).map_err(ParseFailure::Clap)?;
    let Some(path) = cli.command.common().config.clone() else {
        return Ok(cli);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| ParseFailure::Cli(input(format!("config {}: {e}", path.display()))))?;
    let extra = config_args(&text).map_err(ParseFailure::Cli)?;
    let mut merged = argv[..2].to_vec();
    merged.extend(extra);
    merged.extend_from_slice(&argv[2..]);
    Cli::try_parse_from(&merged).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ParseFailure::Clap(e),
        _ => ParseFailure::Cli(input(format!("config {}: {}", path.display(), e.render().to_string().trim()))),
    })
}

#[derive(Debug)]
pub enum ParseFailure {
    Clap(clap::Error),
    Cli(CliError),
}
