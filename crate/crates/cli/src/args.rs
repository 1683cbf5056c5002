use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "impurity-cft", version, about = "Verification engine for conformal field theory with an impurity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// JSON file with parameter defaults; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Directory for cached operators and lattice results.
    #[arg(long, env = "IMPURITY_CFT_CACHE_DIR", global = true)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Central charge and commutator law of the truncated Virasoro modes.
    VirasoroCheck(VirasoroArgs),
    /// Θ(α) commutes with the total Virasoro action.
    Intertwiner(IntertwinerArgs),
    /// Θ maps T + T̄ on the incoming side to T + T̄ on the outgoing side.
    MomentumContinuity(AngleArgs),
    /// Θ preserves mode anticommutators, the identity and composition.
    OpePreservation(OpeArgs),
    /// Reflection phases compatible with a fusion ring.
    ReflectionPhases(PhaseArgs),
    /// S-matrix action on probe fields.
    Smatrix(SmatrixArgs),
    /// Energy current of the free-fermion defect.
    Current(CurrentArgs),
    /// Entropy production over a temperature and angle grid.
    Entropy(EntropyArgs),
    /// Global conservation of T + T̄ under the defect dynamics.
    Continuity(ContinuityArgs),
    /// Decomposition of the rotated u(1) stress tensor.
    Su2kDecompose(Su2kArgs),
    /// Energy current of the su(2)_k defect for a range of levels.
    Su2kCurrent(Su2kCurrentArgs),
    /// Fermionized k = 2 defect against the su(2)_k current.
    Su2kFermionize(FermionizeArgs),
    /// Partitioning protocol on the Majorana chain.
    LatticeRun(LatticeArgs),
    /// Transmission probability across the defect bond.
    LatticeTransmission(TransmissionArgs),
    /// Landauer energy current.
    Landauer(LandauerArgs),
    /// Every check at its default parameters.
    FullSuite(SuiteArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VirasoroCheck(_) => "virasoro-check",
            Command::Intertwiner(_) => "intertwiner",
            Command::MomentumContinuity(_) => "momentum-continuity",
            Command::OpePreservation(_) => "ope-preservation",
            Command::ReflectionPhases(_) => "reflection-phases",
            Command::Smatrix(_) => "smatrix",
            Command::Current(_) => "current",
            Command::Entropy(_) => "entropy",
            Command::Continuity(_) => "continuity",
            Command::Su2kDecompose(_) => "su2k-decompose",
            Command::Su2kCurrent(_) => "su2k-current",
            Command::Su2kFermionize(_) => "su2k-fermionize",
            Command::LatticeRun(_) => "lattice-run",
            Command::LatticeTransmission(_) => "lattice-transmission",
            Command::Landauer(_) => "landauer",
            Command::FullSuite(_) => "full-suite",
        }
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct VirasoroArgs {
    /// fermion, boson or both.
    #[arg(long)]
    pub model: Option<String>,
    /// Level cutoff Λ (integer or half-integer, e.g. 6 or 11/2).
    #[arg(long)]
    pub cutoff: Option<String>,
    /// Check [L_m, L_n] for |m|, |n| up to this value.
    #[arg(long)]
    pub range: Option<i32>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct IntertwinerArgs {
    /// Angle as "cos,sin", a multiple of pi ("pi/2") or radians; repeatable.
    #[arg(long)]
    pub alpha: Option<Vec<String>>,
    #[arg(long)]
    pub cutoff: Option<String>,
    /// Check L_n for |n| up to this value.
    #[arg(long)]
    pub n_max: Option<i32>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct AngleArgs {
    #[arg(long)]
    pub alpha: Option<Vec<String>>,
    #[arg(long)]
    pub cutoff: Option<String>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct OpeArgs {
    #[arg(long)]
    pub alpha: Option<String>,
    /// Second angle for the composition law.
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long)]
    pub cutoff: Option<String>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PhaseArgs {
    /// "ising", "z<n>" or a path to a fusion-ring JSON file.
    #[arg(long)]
    pub ring: Option<String>,
    /// Largest root-of-unity order searched.
    #[arg(long)]
    pub max_order: Option<u64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SmatrixArgs {
    #[arg(long)]
    pub alpha: Option<String>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CurrentArgs {
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long = "Tl")]
    #[serde(alias = "Tl")]
    pub t_left: Option<String>,
    #[arg(long = "Tr")]
    #[serde(alias = "Tr")]
    pub t_right: Option<String>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct EntropyArgs {
    /// Number of temperatures per side.
    #[arg(long)]
    pub temperatures: Option<usize>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of angles in [0, pi/2].
    #[arg(long)]
    pub angles: Option<usize>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ContinuityArgs {
    /// before, after or both.
    #[arg(long)]
    pub regime: Option<String>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Su2kArgs {
    #[arg(long)]
    pub k: Option<u32>,
    /// r r̄ = cos²α in [0, 1], exact.
    #[arg(long)]
    pub rr_bar: Option<String>,
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Su2kCurrentArgs {
    /// Check every level 1..=k_max.
    #[arg(long)]
    pub k_max: Option<u32>,
    #[arg(long)]
    pub rr_bar: Option<String>,
    #[arg(long = "Tl")]
    #[serde(alias = "Tl")]
    pub t_left: Option<String>,
    #[arg(long = "Tr")]
    #[serde(alias = "Tr")]
    pub t_right: Option<String>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct FermionizeArgs {
    /// Values of r r̄; repeatable.
    #[arg(long)]
    pub rr_bar: Option<Vec<String>>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct LatticeArgs {
    /// Spin sites N (2N Majoranas).
    #[arg(long)]
    pub sites: Option<usize>,
    /// Central bond scale λ in [0, 1].
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub coupling: Option<f64>,
    #[arg(long = "Tl")]
    #[serde(alias = "Tl")]
    pub t_left: Option<f64>,
    #[arg(long = "Tr")]
    #[serde(alias = "Tr")]
    pub t_right: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Plateau window start, in units of N / v_max.
    #[arg(long)]
    pub window_start: Option<f64>,
    #[arg(long)]
    pub window_end: Option<f64>,
    /// Left temperatures for a power-law fit with T_r = ratio · T_l.
    #[arg(long, value_delimiter = ',')]
    pub scaling: Option<Vec<f64>>,
    #[arg(long)]
    pub ratio: Option<f64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct TransmissionArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub coupling: Option<f64>,
    /// Number of energies inside the band.
    #[arg(long)]
    pub points: Option<usize>,
    /// Auxiliary chain lengths; the mid-band value must agree across them.
    #[arg(long, value_delimiter = ',')]
    pub lengths: Option<Vec<usize>>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct LandauerArgs {
    /// Defect λ; transmission computed numerically.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Energy-independent transmission instead of a defect.
    #[arg(long)]
    pub constant_transmission: Option<f64>,
    #[arg(long)]
    pub coupling: Option<f64>,
    #[arg(long = "Tl")]
    #[serde(alias = "Tl")]
    pub t_left: Option<f64>,
    #[arg(long = "Tr")]
    #[serde(alias = "Tr")]
    pub t_right: Option<f64>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteArgs {
    /// Skip the lattice simulations.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub skip_lattice: Option<bool>,
    /// Chain size for the lattice checks.
    #[arg(long)]
    pub sites: Option<usize>,
}
