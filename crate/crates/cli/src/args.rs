use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use intwave::params::DEFAULT_C_WIDTH;
use intwave::profiles::ProfileKind;
use intwave::spectra::OperatorKind;
use intwave::stability::Family;
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "intwave", version, about = "Two-layer internal capillary-gravity wave computations")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Args)]
pub struct GlobalArgs {
    /// Physical parameters as JSON; the reference configuration when omitted.
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,

    /// Directory receiving the JSON report and CSV table.
    #[arg(long, global = true, default_value = ".")]
    pub output_dir: PathBuf,

    /// Name outputs `<command>.json` instead of `<command>-<millis>.json`.
    #[arg(long, global = true)]
    pub no_timestamp: bool,

    /// Seed for randomized inputs, recorded in every report.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Region label of a (β, λ) point.
    Classify(ClassifyArgs),
    /// Sample the bifurcation curves Γ₂ and Γ₃.
    Bifurcation(BifurcationArgs),
    /// Dispersion symbol, its minimum and its Taylor coefficients.
    Dispersion(DispersionArgs),
    /// Compare the strip solver against the exact flat multipliers.
    DnCheck(DnCheckArgs),
    /// Build a solitary-wave profile.
    Profile(ProfileArgs),
    /// Lowest eigenvalues of a linearized operator.
    Spectrum(SpectrumArgs),
    /// Moment-of-instability verdict along a family of waves.
    Verdict(VerdictArgs),
    /// Stability verdict for the uniform flow.
    Trivial(TrivialArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify(_) => "classify",
            Command::Bifurcation(_) => "bifurcation",
            Command::Dispersion(_) => "dispersion",
            Command::DnCheck(_) => "dn-check",
            Command::Profile(_) => "profile",
            Command::Spectrum(_) => "spectrum",
            Command::Verdict(_) => "verdict",
            Command::Trivial(_) => "trivial",
        }
    }
}

/// Parse a kebab-case name through the type's serde representation.
pub fn parse_kebab<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: intwave::Error| e.to_string())
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ClassifyArgs {
    /// Bond number; taken from the parameters when omitted.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Inverse Froude number; taken from the parameters when omitted.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_C_WIDTH)]
    pub c_width: f64,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct BifurcationArgs {
    /// Largest curve parameter sampled.
    #[arg(long, default_value_t = 5.0)]
    pub xi_max: f64,
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct DispersionArgs {
    /// Largest dimensionless wavenumber sampled.
    #[arg(long, default_value_t = 10.0)]
    pub xi_max: f64,
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct DnCheckArgs {
    #[arg(long, default_value_t = 256)]
    pub nx: usize,
    #[arg(long, default_value_t = 64)]
    pub ny: usize,
    #[arg(long, default_value_t = 10.0)]
    pub half_period: f64,
    /// Fourier modes tested individually.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub modes: Vec<usize>,
    /// Number of low modes mixed into the seeded random input.
    #[arg(long, default_value_t = 8)]
    pub random_modes: usize,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ProfileArgs {
    #[arg(long, value_parser = parse_kebab::<ProfileKind>)]
    pub kind: ProfileKind,
    #[arg(long, default_value_t = intwave::profiles::KAWAHARA_PRINTED_DELTA)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Gardner cubic coefficient; the layer value when omitted.
    #[arg(long)]
    pub cubic: Option<f64>,
    #[arg(long)]
    pub negative_branch: bool,
    /// Bond number for the Region-A widths; taken from the parameters when omitted.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, requires = "n")]
    pub half_period: Option<f64>,
    #[arg(long, requires = "half_period")]
    pub n: Option<usize>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SpectrumArgs {
    #[arg(long, value_parser = parse_kebab::<OperatorKind>)]
    pub kind: OperatorKind,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = intwave::profiles::KAWAHARA_PRINTED_DELTA)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long)]
    pub cubic: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Use the depression branch of the Gardner profile.
    #[arg(long)]
    pub depression: bool,
    #[arg(long)]
    pub negative_branch: bool,
    /// Number of eigenvalues reported.
    #[arg(long, default_value_t = 6)]
    pub k: usize,
    #[arg(long, requires = "n")]
    pub half_period: Option<f64>,
    #[arg(long, requires = "half_period")]
    pub n: Option<usize>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct VerdictArgs {
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    /// Center speed; the speed in the parameters when omitted.
    #[arg(long)]
    pub cstar: Option<f64>,
    #[arg(long, default_value_t = 0.0005)]
    pub dc: f64,
    /// Samples on each side of the center.
    #[arg(long, default_value_t = 5)]
    pub n: usize,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct TrivialArgs {}
