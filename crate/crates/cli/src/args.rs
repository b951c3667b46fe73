use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use magstep::specdisc::{Discretization, Refinement};

#[derive(Parser, Debug)]
#[command(
    name = "magstep",
    version,
    about = "Band functions and edge asymptotics for a magnetic step"
)]
pub struct Cli {
    /// Key-value file whose entries act as defaults for the flags
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample the band function on a range of xi
    BandCurve(BandCurveArgs),
    /// Step constant, minimizer and trace for each field ratio
    Minimize(MinimizeArgs),
    /// de Gennes function of the Robin parameter
    Degennes(DegennesArgs),
    /// Ground-state moments M1..M3, by quadrature and closed form
    Moments(MomentsArgs),
    /// Curvature-weighted ground energies and the h^{1/2} fit
    WeightedSweep(WeightedArgs),
    /// Critical fields and, optionally, the regime at given field strengths
    CriticalFields(FieldsArgs),
    /// Run the acceptance suite and print a pass/fail table
    Verify(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::BandCurve(_) => "band-curve",
            Command::Minimize(_) => "minimize",
            Command::Degennes(_) => "degennes",
            Command::Moments(_) => "moments",
            Command::WeightedSweep(_) => "weighted-sweep",
            Command::CriticalFields(_) => "critical-fields",
            Command::Verify(_) => "verify",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Grid spacing; the coarsest of the three levels for refined commands
    #[arg(long)]
    pub delta: Option<f64>,
    /// Fixed box length instead of the automatic box
    #[arg(long)]
    pub length: Option<f64>,
    /// Box margin beyond the potential wells
    #[arg(long, default_value_t = 12.0)]
    pub margin: f64,
    /// Absolute eigenvalue tolerance
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

impl GridArgs {
    pub fn discretization(&self, default_delta: f64) -> Discretization {
        Discretization {
            delta: self.delta.unwrap_or(default_delta),
            tol: self.tol,
            margin: self.margin,
            length: self.length,
        }
    }

    /// Three levels starting at `delta` and halving.
    pub fn refinement(&self) -> Refinement {
        let base = self.discretization(0.01);
        let d = base.delta;
        Refinement {
            deltas: [d, d / 2.0, d / 4.0],
            base,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; stdout unless this or an output directory is set
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Directory receiving `<command>.<format>` when --out is absent
    #[arg(long, env = "MAGSTEP_OUT_DIR", value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}

/// `lo:hi:step`, both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl XiRange {
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|k| self.lo + k as f64 * self.step).collect()
    }
}

impl std::fmt::Display for XiRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.step)
    }
}

pub fn parse_range(s: &str) -> Result<XiRange, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, step] = parts[..] else {
        return Err(format!("expected lo:hi:step, got `{s}`"));
    };
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("`{t}` is not a finite number"))
    };
    let r = XiRange {
        lo: num(lo)?,
        hi: num(hi)?,
        step: num(step)?,
    };
    if r.step <= 0.0 || r.hi < r.lo {
        return Err(format!("need step > 0 and lo <= hi, got `{s}`"));
    }
    if (r.hi - r.lo) / r.step > 1e6 {
        return Err(format!("range `{s}` has more than a million points"));
    }
    Ok(r)
}

#[derive(Args, Debug, Clone)]
pub struct BandCurveArgs {
    /// Field ratio a in [-1, 1) \ {0}
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    /// Sample range lo:hi:step
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
    pub xi: XiRange,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct MinimizeArgs {
    /// Comma-separated field ratios in [-1, 0)
    #[arg(
        long,
        required = true,
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    pub a: Vec<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct DegennesArgs {
    /// Comma-separated Robin parameters
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "0"
    )]
    pub gamma: Vec<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct MomentsArgs {
    /// Comma-separated field ratios in [-1, 0)
    #[arg(
        long,
        required = true,
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    pub a: Vec<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct WeightedArgs {
    /// Field ratio in (-1, 0)
    #[arg(long, allow_hyphen_values = true, default_value_t = -0.5)]
    pub a: f64,
    /// Curvature of the edge
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    pub kappa: f64,
    /// Strictly decreasing semiclassical parameters, at least three
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "5e-4,2.5e-4,1.25e-4,6.25e-5"
    )]
    pub h: Vec<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct FieldsArgs {
    /// Comma-separated field ratios in [-1, 0)
    #[arg(
        long,
        required = true,
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    pub a: Vec<f64>,
    /// Field strengths to classify
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub b: Vec<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    /// Run only these criteria
    #[arg(long, value_delimiter = ',')]
    pub criteria: Vec<u32>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Also write the table to this file
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_counts_both_ends() {
        assert_eq!(parse_range("-8:2:0.25").unwrap().values().len(), 41);
        assert_eq!(parse_range("0:1:0.3").unwrap().values().len(), 4);
        assert_eq!(parse_range("1:1:0.5").unwrap().values(), vec![1.0]);
    }

    #[test]
    fn bad_ranges() {
        for s in ["1:0:0.1", "0:1:0", "0:1", "a:1:0.1", "0:inf:1"] {
            assert!(parse_range(s).is_err(), "{s}");
        }
    }

    #[test]
    fn refinement_halves() {
        let g = GridArgs {
            delta: Some(0.02),
            length: None,
            margin: 12.0,
            tol: 1e-12,
        };
        let r = g.refinement();
        assert_eq!(r.deltas, [0.02, 0.01, 0.005]);
        assert!(r.validate().is_ok());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
