use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use polydecomp::Rational;
use polydecomp_cli::*;

/// Exact signed decompositions of simple polytopes.
///
/// Polytopes are JSON documents `{"dim": n, "halfspaces": [{"a": [..], "b": ..}]}`
/// describing `{x : <a, x> <= b}`; rationals are integers or strings "p/q".
/// Exit codes: 0 pass, 1 verification failure, 2 input error, 3 violated
/// precondition (non-generic eta, inadmissible center).
#[derive(Parser, Debug)]
#[command(name = "polydecomp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a simple polytope.
    Check { file: PathBuf },
    /// List the face lattice.
    Faces { file: PathBuf },
    /// Build a signed decomposition.
    Decompose {
        file: PathBuf,
        /// bg, lv or witten.
        #[arg(long)]
        kind: Kind,
        /// Polarizing vector for lv.
        #[arg(long, num_args = 1.., allow_negative_numbers = true, value_parser = rational_arg)]
        eta: Option<Vec<Rational>>,
        /// Norm-square center for witten.
        #[arg(long, num_args = 1.., allow_negative_numbers = true, value_parser = rational_arg)]
        center: Option<Vec<Rational>>,
    },
    /// Verify a decomposition pointwise and on boxes.
    Verify {
        file: PathBuf,
        #[arg(long)]
        kind: Option<Kind>,
        #[arg(long, num_args = 1.., allow_negative_numbers = true, value_parser = rational_arg)]
        eta: Option<Vec<Rational>>,
        #[arg(long, num_args = 1.., allow_negative_numbers = true, value_parser = rational_arg)]
        center: Option<Vec<Rational>>,
        /// Verify this decomposition document instead of building one.
        #[arg(long)]
        decomposition: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        points: usize,
        #[arg(long, default_value_t = DEFAULT_BOXES)]
        boxes: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Critical points of a taming function on every face.
    Localize {
        file: PathBuf,
        /// linear, normsq or negnormsq.
        #[arg(long)]
        rho: Rho,
        #[arg(long, num_args = 1.., allow_negative_numbers = true, value_parser = rational_arg)]
        eta: Option<Vec<Rational>>,
        #[arg(long, num_args = 1.., allow_negative_numbers = true, value_parser = rational_arg)]
        center: Option<Vec<Rational>>,
    },
    /// Search for a norm-square center whose face projections are all
    /// relatively interior.
    AdmissibleCenter { file: PathBuf },
    /// Emit and verify Morse data (witness points, alpha = codimension).
    MorseData {
        file: PathBuf,
        /// Verify this Morse data document instead.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Use norm-square critical points and values for this center.
        #[arg(long, num_args = 1.., allow_negative_numbers = true, value_parser = rational_arg)]
        center: Option<Vec<Rational>>,
    },
    /// The three decompositions of the interval [-1, 1] induced by the
    /// height function of the two-sphere.
    ExampleS2,
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INPUT_ERROR
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    configure_threads();
    let outcome = match cli.command {
        Command::Check { file } => cmd_check(&file),
        Command::Faces { file } => cmd_faces(&file),
        Command::Decompose {
            file,
            kind,
            eta,
            center,
        } => cmd_decompose(&file, kind, eta, center),
        Command::Verify {
            file,
            kind,
            eta,
            center,
            decomposition,
            points,
            boxes,
            seed,
        } => cmd_verify(
            &file,
            VerifyArgs {
                kind,
                eta,
                center,
                decomposition,
                points,
                boxes,
                seed,
            },
        ),
        Command::Localize {
            file,
            rho,
            eta,
            center,
        } => cmd_localize(&file, rho, eta, center),
        Command::AdmissibleCenter { file } => cmd_admissible_center(&file),
        Command::MorseData { file, data, center } => cmd_morse_data(&file, data.as_deref(), center),
        Command::ExampleS2 => cmd_example_s2(),
    };
    for line in &outcome.stderr {
        eprintln!("{line}");
    }
    println!("{}", outcome.stdout);
    ExitCode::from(outcome.code as u8)
}
