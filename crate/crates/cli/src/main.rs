//! `repcount`: exact representation counts and circle-method predictions
//! from the command line.

mod cache;
mod commands;
mod experiment;
mod input;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use input::InputError;
use output::{write_atomic, Format, Table};

#[derive(Parser)]
#[command(name = "repcount", version, about = "Count identical representations of one integral form by another")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for enumeration and sampling.
    #[arg(long, default_value_t = 1, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: u64,
}

/// The form `F`, either inline or from a file, and the number of blocks.
#[derive(Args, Clone)]
pub struct FormArgs {
    /// Form text, e.g. "x1^2 + x1 x2 + x2^2".
    #[arg(long, required_unless_present = "form_file", conflicts_with = "form_file")]
    pub form: Option<String>,
    #[arg(long)]
    pub form_file: Option<PathBuf>,
    /// Number of variables; defaults to the largest index in the form.
    #[arg(long)]
    pub s: Option<usize>,
    /// Number of blocks (variables of ψ).
    #[arg(long, default_value_t = 1)]
    pub m: usize,
}

#[derive(Args, Clone)]
pub struct PsiArgs {
    /// Target coefficients `j:n`, e.g. "11:2,12:1,22:2".
    #[arg(long)]
    pub psi: String,
}

#[derive(Args, Clone)]
pub struct LimitArgs {
    /// Work budget for exact kernels; larger instances are refused.
    #[arg(long, default_value_t = repcount_core::DEFAULT_ENUMERATION_LIMIT)]
    pub limit: u128,
}

#[derive(Subcommand)]
enum Command {
    /// Print the coefficient polynomials Φ_j of F(t₁x₁ + ⋯ + t_mx_m).
    Expand {
        #[command(flatten)]
        form: FormArgs,
    },
    /// Magnitude, eccentricity, pseudo-diagonality and normalisation of ψ.
    AnalyzePsi {
        #[command(flatten)]
        psi: PsiArgs,
        #[arg(long, default_value_t = 1)]
        m: usize,
        /// Number of variables of F, for the hypothesis check.
        #[arg(long)]
        s: Option<usize>,
        /// Dimension of the singular locus of F.
        #[arg(long, default_value_t = 0)]
        dim_sing: usize,
    },
    /// All representations of ψ by a positive definite quadratic F.
    Count {
        #[command(flatten)]
        form: FormArgs,
        #[command(flatten)]
        psi: PsiArgs,
        #[command(flatten)]
        limit: LimitArgs,
    },
    /// Representations with every block in a box.
    CountBoxed {
        #[command(flatten)]
        form: FormArgs,
        #[command(flatten)]
        psi: PsiArgs,
        /// `P` or `P1,…,Pm`.
        #[arg(long = "box")]
        bx: String,
        #[command(flatten)]
        limit: LimitArgs,
    },
    /// Zeros X ∈ ℤ^{s×m}C of the system with entries in [−P, P].
    CountLattice {
        #[command(flatten)]
        form: FormArgs,
        /// m×m matrix C, rows separated by `;`.
        #[arg(long)]
        lattice: String,
        #[arg(long = "box")]
        bx: f64,
        #[command(flatten)]
        limit: LimitArgs,
    },
    /// Smith normal form U·C·V = D.
    Snf {
        /// Square matrix, rows separated by `;`.
        #[arg(long)]
        matrix: String,
    },
    /// |T(α)| and major/minor classification over a grid of α.
    Arcs {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long = "box")]
        bx: String,
        /// One or more θ values.
        #[arg(long, default_value = "0.5")]
        theta: String,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Points per coordinate of a regular grid α = k/N.
        #[arg(long, conflicts_with = "random")]
        grid: Option<u64>,
        /// Uniform random points instead of a grid; needs --seed.
        #[arg(long)]
        random: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        limit: LimitArgs,
    },
    /// Local densities χ_p.
    ChiP {
        #[command(flatten)]
        form: FormArgs,
        #[command(flatten)]
        psi: PsiArgs,
        /// Primes, comma separated.
        #[arg(long)]
        p: String,
        /// Level l of the modulus p^l; defaults to the standard schedule.
        #[arg(long)]
        level: Option<u32>,
        /// Sample instead of counting exactly; needs --seed.
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = repcount_core::density::CHI_P_WORK_LIMIT)]
        limit: u128,
    },
    /// Slab estimate of the real density χ_∞.
    ChiInf {
        #[command(flatten)]
        form: FormArgs,
        #[command(flatten)]
        psi: PsiArgs,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long)]
        seed: Option<u64>,
        /// Independent sample streams; results depend on this, not on --threads.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        shards: u64,
    },
    /// Truncated singular series Σ_{q ≤ Q} A(q).
    Series {
        #[command(flatten)]
        form: FormArgs,
        #[command(flatten)]
        psi: PsiArgs,
        #[arg(long)]
        q_max: u64,
        #[command(flatten)]
        limit: LimitArgs,
    },
    /// Predicted count ⟨ψ⟩^{(ms−rd)/(md)}·χ_∞·∏χ_p with its breakdown.
    MainTerm {
        #[command(flatten)]
        form: FormArgs,
        #[command(flatten)]
        psi: PsiArgs,
        #[command(flatten)]
        density: experiment::DensityArgs,
    },
    /// Exact counts against predictions over a family of targets.
    Verify {
        /// Experiment description (JSON).
        #[arg(long)]
        spec: PathBuf,
    },
    /// Cauchy–Schwarz step of Weyl differencing at given or random α.
    WeylCheck {
        #[command(flatten)]
        form: FormArgs,
        #[arg(long = "box")]
        bx: String,
        /// Comma separated α, one entry per coefficient.
        #[arg(long, conflicts_with = "random")]
        alpha: Option<String>,
        #[arg(long)]
        random: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Differenced block, 1-based.
        #[arg(long, default_value_t = 1)]
        j1: usize,
    },
}

fn dispatch(cmd: Command, common: &Common) -> Result<Table> {
    use commands as c;
    match cmd {
        Command::Expand { form } => c::expand(&form),
        Command::AnalyzePsi { psi, m, s, dim_sing } => c::analyze_psi(&psi.psi, m, s, dim_sing),
        Command::Count { form, psi, limit } => c::count(&form, &psi.psi, limit.limit, common),
        Command::CountBoxed { form, psi, bx, limit } => c::count_boxed(&form, &psi.psi, &bx, limit.limit, common),
        Command::CountLattice { form, lattice, bx, limit } => c::count_lattice(&form, &lattice, bx, limit.limit, common),
        Command::Snf { matrix } => c::snf(&matrix),
        Command::Arcs { form, bx, theta, c: width, grid, random, seed, limit } => {
            let points = match (grid, random) {
                (_, Some(k)) => c::Points::Random { count: k, seed: require_seed(seed)? },
                (Some(n), None) => c::Points::Grid(n),
                (None, None) => return Err(input::input_error("arcs needs --grid or --random")),
            };
            c::arcs(&form, &bx, &theta, width, points, limit.limit, common)
        }
        Command::ChiP { form, psi, p, level, samples, seed, limit } => {
            let sampled = match samples {
                Some(n) => Some((n, require_seed(seed)?)),
                None => None,
            };
            c::chi_p(&form, &psi.psi, &p, level, sampled, limit)
        }
        Command::ChiInf { form, psi, eps, samples, seed, shards } => {
            c::chi_inf(&form, &psi.psi, eps, samples, require_seed(seed)?, shards, common)
        }
        Command::Series { form, psi, q_max, limit } => c::series(&form, &psi.psi, q_max, limit.limit),
        Command::MainTerm { form, psi, density } => c::main_term(&form, &psi.psi, &density),
        Command::Verify { spec } => experiment::verify(&spec, common),
        Command::WeylCheck { form, bx, alpha, random, seed, j1 } => {
            let points = match (alpha, random) {
                (_, Some(k)) => c::Alphas::Random { count: k, seed: require_seed(seed)? },
                (Some(a), None) => c::Alphas::Given(input::parse_floats(&a)?),
                (None, None) => return Err(input::input_error("weyl-check needs --alpha or --random")),
            };
            c::weyl_check(&form, &bx, points, j1, common)
        }
    }
}

/// Randomised commands never fall back to a default seed.
pub fn require_seed(seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| input::input_error("this command is randomised and requires --seed"))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use repcount_core::Error;
    for cause in err.chain() {
        if cause.downcast_ref::<InputError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Budget { .. } => 3,
                Error::Internal(_) | Error::Overflow => 4,
                _ => 2,
            };
        }
    }
    4
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = cli.common.clone();
    let result = dispatch(cli.command, &common).and_then(|table| {
        let text = table.render(common.format)?;
        match &common.out {
            Some(path) => write_atomic(path, text.as_bytes()),
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
