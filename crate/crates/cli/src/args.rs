use std::path::PathBuf;

use cavity_core::hamiltonian::RampShape;
use cavity_core::reductions::ProblemKind;
use cavity_core::solvers::OracleMode;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "cavity", version, about = "Compile NP-complete problems into atom-cavity Mattis programs")]
pub struct Cli {
    /// Print the artifact JSON instead of the human summary.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Encode a decision problem as subset sum.
    Encode(EncodeArgs),
    /// Compile a QUBO (or a constrained problem) into a penalized subset-sum objective.
    CompileQubo(CompileArgs),
    /// Emit a Mattis program from an encoding or a QUBO compilation.
    Emit(EmitArgs),
    /// Decide a subset-sum instance exactly.
    Oracle(OracleArgs),
    /// Anneal a Mattis program.
    Solve(SolveArgs),
    /// Integrate the adiabatic ramp of a Mattis program.
    Simulate(SimulateArgs),
    /// Check an encoding against native brute force in both directions.
    Verify(VerifyArgs),
    /// Read a subset assignment back into the source problem.
    Decode(DecodeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    #[value(name = "3sat")]
    Sat3,
    #[value(name = "vertex-cover", alias = "vc")]
    VertexCover,
    #[value(name = "mis", alias = "independent-set")]
    Mis,
    Clique,
    Matching,
    ExactCover,
    SetPacking,
    Maxcut,
    DominatingSet,
    #[value(name = "3coloring", alias = "3-coloring")]
    Coloring3,
    SubsetSum,
}

impl From<Problem> for ProblemKind {
    fn from(p: Problem) -> Self {
        match p {
            Problem::Sat3 => ProblemKind::Sat3,
            Problem::VertexCover => ProblemKind::VertexCover,
            Problem::Mis => ProblemKind::Mis,
            Problem::Clique => ProblemKind::Clique,
            Problem::Matching => ProblemKind::Matching,
            Problem::ExactCover => ProblemKind::ExactCover,
            Problem::SetPacking => ProblemKind::SetPacking,
            Problem::Maxcut => ProblemKind::MaxCut,
            Problem::DominatingSet => ProblemKind::DominatingSet,
            Problem::Coloring3 => ProblemKind::Coloring3,
            Problem::SubsetSum => ProblemKind::SubsetSum,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormulationKind {
    Bilp,
    Knapsack,
    Jobseq,
    Hamcycle,
    Tsp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Linear,
    Smoothstep,
}

impl From<Shape> for RampShape {
    fn from(s: Shape) -> Self {
        match s {
            Shape::Linear => RampShape::Linear,
            Shape::Smoothstep => RampShape::Smoothstep,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    First,
    All,
}

impl From<Mode> for OracleMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::First => OracleMode::First,
            Mode::All => OracleMode::All,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct ProblemInput {
    /// Problem kind.
    #[arg(long)]
    pub problem: Problem,
    /// Instance file: DIMACS CNF, DIMACS or JSON graph, or JSON sets / subset sum.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Size parameter of the decision question.
    #[arg(long)]
    pub k: Option<usize>,
    /// Pad clauses shorter than three literals by repeating a literal.
    #[arg(long)]
    pub pad: bool,
}

#[derive(Args, Debug)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub source: ProblemInput,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CompileArgs {
    /// QUBO JSON, or an instance of `--formulation`.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Build the QUBO from a constrained problem first.
    #[arg(long)]
    pub formulation: Option<FormulationKind>,
    /// Penalty weight; must not be below the safe default.
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EmitArgs {
    /// Encoding or QUBO-compilation artifact.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "linear")]
    pub ramp: Shape,
    #[arg(long, default_value_t = 101)]
    pub ramp_steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    /// Encoding, Mattis or raw subset-sum artifact; with `--problem`, a source instance.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub problem: Option<Problem>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub pad: bool,
    #[arg(long, value_enum, default_value = "first")]
    pub mode: Mode,
    /// Count the empty subset when the target is zero.
    #[arg(long)]
    pub allow_empty: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Mattis program.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = cavity_core::solvers::DEFAULT_SWEEPS)]
    pub sweeps: usize,
    #[arg(long, default_value_t = cavity_core::solvers::DEFAULT_SEED)]
    pub seed: u64,
    /// Independent runs with seeds `seed, seed+1, ...`; the best is kept.
    #[arg(long, default_value_t = 1)]
    pub restarts: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Mattis program.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Total evolution time in units of 1/g4.
    #[arg(long, default_value_t = 100.0)]
    pub time: f64,
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    /// Ramp shape; defaults to the program's schedule.
    #[arg(long, value_enum)]
    pub ramp: Option<Shape>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: ProblemInput,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DecodeArgs {
    /// Encoding, QUBO-compilation or Mattis artifact.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Bitstring, one character per weight (or per QUBO variable).
    #[arg(long)]
    pub assignment: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
