//! `symspace` command-line front end.
//!
//! Exit codes: 0 ok, 1 negative verdict or failed check, 2 usage or input
//! error, 3 inconclusive.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "symspace", version, about = "Symmetric spaces, Lie triple systems and midpoint geometry")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Model space: euclidean:<n>, sphere:<n>, hyperbolic, ex5, ex6, group:sl2.
    #[arg(long, global = true)]
    pub space: Option<String>,

    /// Residual tolerance; overrides every default tolerance of the command.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Number of multistart seeds for the Newton solvers.
    #[arg(long, global = true)]
    pub starts: Option<usize>,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long = "max-iter", global = true, default_value_t = 100)]
    pub max_iter: usize,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Svg,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the Lie triple system axioms of a structure-constant file.
    LtsCheck {
        /// JSON file; defaults to the system at the base point of --space.
        file: Option<PathBuf>,
    },
    /// Build the standard embedding g = m ⊕ [m, m].
    Embed { file: Option<PathBuf> },
    /// Jordan–Hölder series and roots of a solvable system.
    Roots { file: Option<PathBuf> },
    /// Decide (or sample) exponentiality.
    Exponential {
        file: Option<PathBuf>,
        /// Random directions for the sampled test on non-solvable systems.
        #[arg(long, default_value_t = 256)]
        samples: usize,
    },
    /// Midpoints z with s_z x = y.
    Midpoint {
        /// Chart coordinates as JSON arrays (a bare number is a 1-d point).
        x: String,
        y: String,
    },
    /// Polygons whose edge midpoints are the given points (odd count).
    Double {
        #[arg(required = true, num_args = 1..)]
        midpoints: Vec<String>,
    },
    /// Points x with g·x = s_z x.
    Place {
        z: String,
        /// Group element as a JSON matrix (list of rows).
        #[arg(long, conflicts_with = "tangent", required_unless_present = "tangent")]
        group: Option<String>,
        /// Use g = exp(X) for this tangent vector X at the base point.
        #[arg(long)]
        tangent: Option<String>,
    },
    /// Run the property suites on one model space or all of them.
    Verify {
        /// `all` or a space selector; defaults to --space, then `all`.
        target: Option<String>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Draw a polygon and its midpoint polygon as SVG.
    Plot {
        /// JSON list of points in chart coordinates.
        #[arg(long)]
        points: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let result = match &cli.command {
        Command::LtsCheck { file } => commands::lts_check(g, file.as_deref()),
        Command::Embed { file } => commands::embed(g, file.as_deref()),
        Command::Roots { file } => commands::roots(g, file.as_deref()),
        Command::Exponential { file, samples } => commands::exponential(g, file.as_deref(), *samples),
        Command::Midpoint { x, y } => commands::midpoint(g, x, y),
        Command::Double { midpoints } => commands::double(g, midpoints),
        Command::Place { z, group, tangent } => {
            commands::place(g, z, group.as_deref(), tangent.as_deref())
        }
        Command::Verify { target, samples } => commands::verify(g, target.as_deref(), *samples),
        Command::Plot { points } => commands::plot(g, points),
    };
    match result {
        Ok(out) => {
            print!("{}", out.stdout);
            if let Some(msg) = out.stderr {
                eprintln!("{msg}");
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
