use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use witnessforge::cv::fock::DEFAULT_TAIL_TOL;

#[derive(Debug, Parser)]
#[command(
    name = "witnessforge",
    version,
    about = "Entanglement witnesses for depolarized and noisy twin-beam states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Report destination (stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// RNG seed for sampling commands.
    #[arg(long, global = true, env = "WITNESSFORGE_SEED")]
    pub seed: Option<u64>,

    /// Sampling workers; results do not depend on this.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,

    /// Per-mode Fock cutoff n_max (picked from --tol when omitted).
    #[arg(long, global = true)]
    pub trunc: Option<usize>,

    /// Fock tail tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_TAIL_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Witness, threshold and local quorum for a depolarized state.
    FiniteWitness {
        #[command(flatten)]
        psi: PsiArgs,
        #[arg(long)]
        p: f64,
    },
    /// Witness expectation across a grid of mixing parameters.
    FiniteScan {
        #[command(flatten)]
        psi: PsiArgs,
        #[arg(long, default_value = "0:1:0.01")]
        p_range: Grid,
    },
    /// Twin beam under phase diffusion.
    CvPhase {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        gammat: f64,
    },
    /// Twin beam under Gaussian noise, at one κ or across a κ grid.
    CvGauss {
        #[arg(long)]
        x: f64,
        #[arg(
            long,
            conflicts_with = "scan_kappa",
            required_unless_present = "scan_kappa"
        )]
        kappa: Option<f64>,
        #[arg(long)]
        scan_kappa: Option<Grid>,
    },
    /// Gaussian-noise threshold κ* across a grid of x.
    GaussScan {
        #[arg(long, default_value = "0.05:0.95:0.05")]
        x_range: Grid,
    },
    /// Simulated homodyne estimate of the witness.
    TomoEstimate {
        #[arg(long)]
        x: f64,
        #[arg(long, conflicts_with = "kappa")]
        gammat: Option<f64>,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Noisy twin beam through a 50/50 beam splitter, squeezing on one port.
    BsSqueeze {
        #[arg(long)]
        x: f64,
        #[arg(
            long,
            conflicts_with = "scan_kappa",
            required_unless_present = "scan_kappa"
        )]
        kappa: Option<f64>,
        #[arg(long)]
        scan_kappa: Option<Grid>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::FiniteWitness { .. } => "finite-witness",
            Command::FiniteScan { .. } => "finite-scan",
            Command::CvPhase { .. } => "cv-phase",
            Command::CvGauss { .. } => "cv-gauss",
            Command::GaussScan { .. } => "gauss-scan",
            Command::TomoEstimate { .. } => "tomo-estimate",
            Command::BsSqueeze { .. } => "bs-squeeze",
        }
    }
}

/// Exactly one of the three sources is required; checked when resolving.
#[derive(Debug, Args)]
pub struct PsiArgs {
    /// Local dimension d.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub max_entangled: bool,
    /// Schmidt coefficients of a diagonal Ψ.
    #[arg(long, value_delimiter = ',')]
    pub schmidt: Option<Vec<f64>>,
    /// JSON matrix with keys rows, cols, re, im.
    #[arg(long)]
    pub psi_file: Option<PathBuf>,
}

/// Inclusive grid `start:stop:step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:stop:step, got `{s}`"));
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
        let grid = Grid {
            start: num(parts[0])?,
            stop: num(parts[1])?,
            step: num(parts[2])?,
        };
        if !(grid.step > 0.0
            && grid.stop >= grid.start
            && grid.start.is_finite()
            && grid.stop.is_finite())
        {
            return Err(format!("need finite start ≤ stop and step > 0, got `{s}`"));
        }
        Ok(grid)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}
