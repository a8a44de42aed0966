use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Deserializer};

/// Comma-separated reals on the command line, a string or an array in the
/// config file.
#[derive(Clone, Debug, PartialEq)]
pub struct Reals(pub Vec<f64>);

impl FromStr for Reals {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number")))
            .collect::<Result<Vec<_>, _>>()
            .map(Reals)
    }
}

impl<'de> Deserialize<'de> for Reals {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            List(Vec<f64>),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::List(v) => Ok(Reals(v)),
        }
    }
}

impl Reals {
    pub fn exact<const N: usize>(&self, flag: &str) -> Result<[f64; N], String> {
        self.0
            .as_slice()
            .try_into()
            .map_err(|_| format!("--{flag} needs {N} values, got {}", self.0.len()))
    }
}

/// `a:b` parameter range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Span(pub f64, pub f64);

impl FromStr for Span {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("span `{s}` must read a:b"))?;
        let p = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("`{v}` is not a number"));
        Ok(Span(p(a)?, p(b)?))
    }
}

impl<'de> Deserialize<'de> for Span {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(
    name = "polarwave",
    version,
    about = "Polarization sets of wave fields: rays, transport, gauge algebra and grid estimates"
)]
pub struct Cli {
    /// TOML file with one table per subcommand; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decompose a symbol and report the principal-type verdict at a point.
    CheckType(CheckTypeArgs),
    /// Trace a null bicharacteristic and write it as CSV.
    Trace(TraceArgs),
    /// Transport a fiber vector along a ray and write the orbit as CSV.
    Transport(TransportArgs),
    /// Classify a Maxwell mode and fix the radiation gauge.
    Gauge(GaugeArgs),
    /// Sample a Gaussian wave packet on a grid.
    Synth(SynthArgs),
    /// Estimate oscillation directions and polarizations from a grid field.
    Estimate(EstimateArgs),
    /// Check estimates against a transported orbit.
    Compare(CompareArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckType(_) => "check-type",
            Command::Trace(_) => "trace",
            Command::Transport(_) => "transport",
            Command::Gauge(_) => "gauge",
            Command::Synth(_) => "synth",
            Command::Estimate(_) => "estimate",
            Command::Compare(_) => "compare",
        }
    }
}

macro_rules! merge_fields {
    ($self:ident, $other:ident; $($opt:ident),*; $($flag:ident),*) => {{
        $( if $self.$opt.is_none() { $self.$opt = $other.$opt; } )*
        $( $self.$flag |= $other.$flag; )*
    }};
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SymbolArgs {
    /// flat-maxwell, scalar-wave or scaled-wave.
    #[arg(long, allow_hyphen_values = true)]
    pub symbol: Option<String>,
    /// Polynomial f(x) for scaled-wave, e.g. "1 + x3^2".
    #[arg(long, allow_hyphen_values = true)]
    pub factor: Option<String>,
    /// JSON symbol file instead of a named symbol.
    #[arg(long)]
    pub symbol_file: Option<PathBuf>,
    /// JSON file with the left factor p~ of the decomposition.
    #[arg(long)]
    pub hint_file: Option<PathBuf>,
}

impl SymbolArgs {
    pub fn merge(&mut self, o: SymbolArgs) {
        merge_fields!(self, o; symbol, factor, symbol_file, hint_file;);
    }
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct CheckTypeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub symbol: SymbolArgs,
    /// Base point x^mu.
    #[arg(long, allow_hyphen_values = true, value_name = "X0,X1,X2,X3")]
    pub point: Option<Reals>,
    /// Covector k_mu.
    #[arg(long, allow_hyphen_values = true, value_name = "K0,K1,K2,K3")]
    pub k: Option<Reals>,
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl CheckTypeArgs {
    pub fn merge(&mut self, o: CheckTypeArgs) {
        self.symbol.merge(o.symbol);
        merge_fields!(self, o; point, k, tol, output;);
    }
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RayArgs {
    #[arg(long, allow_hyphen_values = true, value_name = "X0,X1,X2,X3")]
    pub x0: Option<Reals>,
    #[arg(long, allow_hyphen_values = true, value_name = "K0,K1,K2,K3")]
    pub k: Option<Reals>,
    /// Parameter range a:b.
    #[arg(long, allow_hyphen_values = true, value_name = "A:B")]
    pub tau: Option<Span>,
    #[arg(long, allow_hyphen_values = true)]
    pub step: Option<f64>,
    /// rk4 or adaptive.
    #[arg(long, allow_hyphen_values = true)]
    pub method: Option<String>,
    /// Replace k0 by +-|k| before tracing.
    #[arg(long)]
    #[serde(default)]
    pub null_project: bool,
    /// Light-cone branch for --null-project: + or -.
    #[arg(long, allow_hyphen_values = true)]
    pub branch: Option<String>,
}

impl RayArgs {
    pub fn merge(&mut self, o: RayArgs) {
        merge_fields!(self, o; x0, k, tau, step, method, branch; null_project);
    }
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TraceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub symbol: SymbolArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub ray: RayArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl TraceArgs {
    pub fn merge(&mut self, o: TraceArgs) {
        self.symbol.merge(o.symbol);
        self.ray.merge(o.ray);
        merge_fields!(self, o; output;);
    }
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TransportArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub symbol: SymbolArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub ray: RayArgs,
    /// Ray CSV to transport along instead of tracing one.
    #[arg(long)]
    pub ray_file: Option<PathBuf>,
    /// Real parts of the initial fiber vector.
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<Reals>,
    /// Imaginary parts of the initial fiber vector.
    #[arg(long, allow_hyphen_values = true)]
    pub omega_im: Option<Reals>,
    /// Project onto the kernel of p after every step.
    #[arg(long)]
    #[serde(default)]
    pub reproject: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl TransportArgs {
    pub fn merge(&mut self, o: TransportArgs) {
        self.symbol.merge(o.symbol);
        self.ray.merge(o.ray);
        merge_fields!(self, o; ray_file, omega, omega_im, output; reproject);
    }
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GaugeArgs {
    /// k0..k3, eps0..eps3 and the amplitude, all real parts.
    #[arg(long, allow_hyphen_values = true, value_name = "K0,..,K3,E0,..,E3,A")]
    pub mode: Option<Reals>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps_im: Option<Reals>,
    #[arg(long, allow_hyphen_values = true)]
    pub amp_im: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl GaugeArgs {
    pub fn merge(&mut self, o: GaugeArgs) {
        merge_fields!(self, o; mode, eps_im, amp_im, output;);
    }
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SynthArgs {
    /// Samples per axis.
    #[arg(long, allow_hyphen_values = true, value_name = "N0,N1,N2")]
    pub samples: Option<Reals>,
    /// Domain lengths per axis.
    #[arg(long, allow_hyphen_values = true, value_name = "L0,L1,L2")]
    pub extent: Option<Reals>,
    #[arg(long, allow_hyphen_values = true)]
    pub origin: Option<Reals>,
    #[arg(long)]
    pub slices: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub dt: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<f64>,
    /// Carrier covector k_mu (null).
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<Reals>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<Reals>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps_im: Option<Reals>,
    #[arg(long, allow_hyphen_values = true)]
    pub amp: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub amp_im: Option<f64>,
    /// Envelope center t,x1,x2,x3.
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<Reals>,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    /// Add the complex conjugate so the field is real.
    #[arg(long)]
    #[serde(default)]
    pub conjugate: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl SynthArgs {
    pub fn merge(&mut self, o: SynthArgs) {
        merge_fields!(self, o; samples, extent, origin, slices, dt, t0, k, eps, eps_im, amp, amp_im, center, sigma, output; conjugate);
    }
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct EstimateArgs {
    /// Grid field written by `synth`.
    #[arg(long)]
    pub field: Option<PathBuf>,
    /// Window centers `t,x1,x2,x3`, separated by `;`.
    #[arg(long, allow_hyphen_values = true)]
    pub centers: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl EstimateArgs {
    pub fn merge(&mut self, o: EstimateArgs) {
        merge_fields!(self, o; field, centers, window, threshold, format, output;);
    }
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct CompareArgs {
    /// Estimates as CSV or JSON (by extension).
    #[arg(long)]
    pub estimates: Option<PathBuf>,
    /// Orbit CSV written by `transport`.
    #[arg(long)]
    pub orbit: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub position_tol: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub angle_tol: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub overlap_tol: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub suppression_db: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl CompareArgs {
    pub fn merge(&mut self, o: CompareArgs) {
        merge_fields!(self, o; estimates, orbit, position_tol, angle_tol, overlap_tol, suppression_db, output;);
    }
}
