use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use geowl_cli::format::cloud_to_json;
use geowl_cli::{cmd_color, cmd_compare, cmd_gen, cmd_roundtrip, cmd_search, CliError, GenParams, Mode, RunConfig};
use serde::Serialize;

/// Geometric Weisfeiler-Leman test and reconstruction on point clouds.
///
/// Exit codes: 0 success, 1 reconstruction or verification failure,
/// 2 bad input or parameters, 3 a cap was exceeded.
#[derive(Parser)]
#[command(name = "geowl", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(Args)]
struct GlobalArgs {
    /// Tuple width of the test.
    #[arg(long, global = true)]
    ell: Option<usize>,
    /// Refinement iterations.
    #[arg(long, global = true)]
    iters: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "exact")]
    mode: ModeArg,
    /// Float tolerance; also the grid on which float distances are snapped.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, global = true, env = "GEOWL_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, default_value_t = 100_000)]
    max_tuples: u128,
    #[arg(long, global = true, default_value_t = 4096)]
    max_candidates: u128,
    #[arg(long, global = true, default_value_t = 1 << 16)]
    max_depth: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Color a cloud and print class counts and the fingerprint.
    Color {
        file: PathBuf,
        /// Also write the fingerprint here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the colorings of two clouds.
    Compare { a: PathBuf, b: PathBuf },
    /// Reconstruct a cloud from its colors and check it against the input.
    Roundtrip {
        file: PathBuf,
        /// wl2d, wlnd or oneshot.
        #[arg(long, default_value = "wl2d")]
        algo: String,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Look for non-isometric clouds with equal fingerprints.
    Search {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        budget: usize,
        /// Also write each finding's two clouds as files here.
        #[arg(long)]
        pairs_dir: Option<PathBuf>,
    },
    /// Print a random exact cloud.
    Gen {
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 4)]
        grid: i64,
        /// Apply a random exact isometry drawn from this seed.
        #[arg(long)]
        isometry_seed: Option<u64>,
    },
}

impl GlobalArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            ell: self.ell,
            iters: self.iters,
            mode: match self.mode {
                ModeArg::Exact => Mode::Exact,
                ModeArg::Float => Mode::Float,
            },
            tol: self.tol,
            seed: self.seed,
            max_tuples: self.max_tuples,
            max_candidates: self.max_candidates,
            max_depth: self.max_depth,
            ..RunConfig::default()
        }
    }
}

fn to_json(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

/// Runs the command and returns the text to print and the exit code.
fn run(cli: &Cli) -> Result<(String, u8), CliError> {
    let cfg = cli.global.config();
    match &cli.command {
        Command::Color { file, out } => {
            let s = cmd_color(file, &cfg)?;
            if let Some(out) = out {
                write(out, &to_json(&s.fingerprint))?;
            }
            Ok((to_json(&s), 0))
        }
        Command::Compare { a, b } => Ok((to_json(&cmd_compare(a, b, &cfg)?), 0)),
        Command::Roundtrip { file, algo, out } => {
            let r = cmd_roundtrip(file, algo, &cfg)?;
            let text = to_json(&r);
            if let Some(out) = out {
                write(out, &text)?;
            }
            Ok((text, if r.passed { 0 } else { 1 }))
        }
        Command::Search {
            dim,
            n,
            budget,
            pairs_dir,
        } => {
            let r = cmd_search(*dim, *n, *budget, &cfg)?;
            if let Some(dir) = pairs_dir {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Parse(format!("{}: {e}", dir.display())))?;
                for f in &r.findings {
                    write(&dir.join(format!("finding-{}-a.json", f.attempt)), &to_json(&f.a))?;
                    write(&dir.join(format!("finding-{}-b.json", f.attempt)), &to_json(&f.b))?;
                }
            }
            Ok((to_json(&r), 0))
        }
        Command::Gen {
            n,
            dim,
            grid,
            isometry_seed,
        } => {
            let params = GenParams {
                n: *n,
                dim: *dim,
                grid: *grid,
                isometry_seed: *isometry_seed,
            };
            Ok((to_json(&cloud_to_json(&cmd_gen(&params, &cfg)?)), 0))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.global.jobs {
        pool = pool.num_threads(j.max(1));
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("geowl: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok((text, code)) => {
            print!("{text}");
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("geowl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
