//! `catlab` — batch front end for the cat map laboratory.
//!
//! Every subcommand is deterministic: the same arguments produce
//! byte-identical output regardless of `--jobs`.
//!
//! Exit codes: 0 success, 2 validation error, 3 assertion or budget violation.

mod selftest;

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use catlab::charsums::{weil_csv, weil_scan};
use catlab::modular::odd_primes;
use catlab::observables::c_arith;
use catlab::spectra::{hecke_basis, matrix_elements};
use catlab::variance::{fmt_float, theorem_scan, LRule, DEFAULT_TAIL_EPS};
use catlab::{CatError, Observable, PrimeContext, ToralAutomorphism, Window, WindowKind};
use clap::{Args, Parser, Subcommand, ValueEnum};

const MAX_SCAN: u64 = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "catlab", version, about = "Quantized cat map laboratory")]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "CATLAB_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct MatrixArg {
    /// Matrix entries `a,b,c,d` of `A = [[a,b],[c,d]]`.
    #[arg(
        short = 'm',
        long = "matrix",
        default_value = "3,2,4,3",
        allow_hyphen_values = true
    )]
    matrix: String,
}

impl MatrixArg {
    fn parse(&self) -> Result<ToralAutomorphism, Failure> {
        self.matrix.parse().map_err(Failure::from)
    }
}

#[derive(Debug, Args)]
struct RangeArg {
    /// A single prime; overrides the range.
    #[arg(short = 'n')]
    n: Option<u64>,
    #[arg(long, default_value_t = 3)]
    nmin: u64,
    #[arg(long, default_value_t = 200)]
    nmax: u64,
}

impl RangeArg {
    /// Odd primes in range that do not divide the discriminant; a single
    /// explicit `-n` is passed through so the context reports why it fails.
    fn primes(&self, a: &ToralAutomorphism) -> Result<Vec<u64>, Failure> {
        if let Some(n) = self.n {
            return Ok(vec![n]);
        }
        if self.nmax > MAX_SCAN {
            return Err(Failure::validation(format!(
                "--nmax must not exceed {MAX_SCAN}"
            )));
        }
        if self.nmin > self.nmax {
            return Err(Failure::validation("--nmin exceeds --nmax"));
        }
        let disc = a.disc().unsigned_abs();
        Ok(odd_primes(self.nmin, self.nmax)
            .into_iter()
            .filter(|p| !disc.is_multiple_of(*p))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Level {
    Quick,
    Full,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Arithmetic summary of A modulo a prime.
    Classify {
        #[command(flatten)]
        matrix: MatrixArg,
        #[arg(short = 'n')]
        n: u64,
        /// Emit JSON instead of a one-line summary.
        #[arg(long)]
        json: bool,
    },
    /// Orders ord(A, N) over a prime range, as CSV `N,r,r_over_sqrtN`.
    ScanOrders {
        #[command(flatten)]
        matrix: MatrixArg,
        #[command(flatten)]
        range: RangeArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Variance scan with the explicit error budget, as CSV.
    Variance {
        #[command(flatten)]
        matrix: MatrixArg,
        #[command(flatten)]
        range: RangeArg,
        /// Observable JSON file; defaults to 2cos(2 pi x1).
        #[arg(long)]
        obs: Option<PathBuf>,
        #[arg(long, default_value = "hann")]
        window: WindowKind,
        /// Exponent rho in L = floor(N^rho), clamped below 2r.
        #[arg(long, default_value_t = 0.75)]
        l_exp: f64,
        #[arg(long, default_value_t = DEFAULT_TAIL_EPS)]
        tail_eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive Weil-bound check of the complete character sums.
    CharsumScan {
        #[command(flatten)]
        matrix: MatrixArg,
        #[command(flatten)]
        range: RangeArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hecke eigenbasis and diagonal matrix elements at one prime.
    Hecke {
        #[command(flatten)]
        matrix: MatrixArg,
        #[arg(short = 'n')]
        n: u64,
        #[arg(long)]
        obs: Option<PathBuf>,
        /// Write the matrix elements as CSV `m,j,phase,value`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant batteries.
    Selftest {
        #[arg(long, value_enum, default_value = "quick")]
        level: Level,
    },
}

#[derive(Debug)]
pub(crate) struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub(crate) fn assertion(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<CatError> for Failure {
    fn from(e: CatError) -> Self {
        let code = if e.is_validation() { 2 } else { 3 };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn load_observable(path: &Option<PathBuf>) -> Result<(Observable, String), Failure> {
    match path {
        Some(p) => Ok((Observable::load(p)?, p.display().to_string())),
        None => Ok((Observable::cos_x1(), "2cos(2 pi x1)".to_string())),
    }
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::validation(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Classify { matrix, n, json } => {
            let ctx = PrimeContext::new(matrix.parse()?, n)?;
            let summary = ctx.summary();
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&summary).expect("summary serializes")
                );
            } else {
                println!("{summary}");
            }
            Ok(())
        }
        Command::ScanOrders { matrix, range, out } => {
            let a = matrix.parse()?;
            let mut csv = String::from("N,r,r_over_sqrtN\n");
            for n in range.primes(&a)? {
                let ctx = PrimeContext::new(a, n)?;
                let _ = writeln!(
                    csv,
                    "{},{},{}",
                    n,
                    ctx.order,
                    fmt_float(ctx.order as f64 / (n as f64).sqrt())
                );
            }
            emit(&csv, &out)
        }
        Command::Variance {
            matrix,
            range,
            obs,
            window,
            l_exp,
            tail_eps,
            out,
        } => {
            let a = matrix.parse()?;
            if !(l_exp > 0.0 && l_exp <= 1.0) {
                return Err(Failure::validation(format!(
                    "--l-exp must lie in (0, 1], got {l_exp}"
                )));
            }
            let (f, label) = load_observable(&obs)?;
            let primes = range.primes(&a)?;
            let report = theorem_scan(
                &a,
                &f,
                &Window::new(window),
                &label,
                &primes,
                LRule { exponent: l_exp },
                tail_eps,
            )?;
            emit(&report.to_csv(), &out)?;
            let flagged: Vec<String> = report
                .rows
                .iter()
                .filter(|r| !r.hypothesis)
                .map(|r| r.n.to_string())
                .collect();
            if !flagged.is_empty() {
                eprintln!("note: r <= sqrt(N) for N = {}", flagged.join(", "));
            }
            let violations = report.budget_violations();
            if violations.is_empty() {
                Ok(())
            } else {
                Err(Failure::assertion(format!(
                    "error budget violated for N = {violations:?}"
                )))
            }
        }
        Command::CharsumScan { matrix, range, out } => {
            let a = matrix.parse()?;
            let nmin = range.n.unwrap_or(range.nmin);
            let nmax = range.n.unwrap_or(range.nmax);
            if nmax > MAX_SCAN {
                return Err(Failure::validation(format!(
                    "--nmax must not exceed {MAX_SCAN}"
                )));
            }
            let rows = weil_scan(&a, nmin, nmax)?;
            emit(&weil_csv(&rows), &out)?;
            let bad: Vec<String> = rows
                .iter()
                .filter(|r| r.abs_e.is_nan() || r.abs_e >= r.bound)
                .map(|r| format!("N={} m={}", r.n, r.m))
                .collect();
            if bad.is_empty() {
                Ok(())
            } else {
                Err(Failure::assertion(format!(
                    "Weil bound violated: {}",
                    bad.join(", ")
                )))
            }
        }
        Command::Hecke {
            matrix,
            n,
            obs,
            out,
        } => {
            let a = matrix.parse()?;
            let ctx = PrimeContext::new(a, n)?;
            let (f, _) = load_observable(&obs)?;
            let basis = hecke_basis(&ctx)?;
            let elements = matrix_elements(&ctx, &f, &basis)?;
            let variance: f64 = elements.iter().map(|(_, x)| x * x).sum();
            let c = c_arith(&a, &f);
            if let Some(path) = &out {
                let mut csv = String::from("m,j,phase,value\n");
                for (v, (phase, x)) in basis.vectors.iter().zip(&elements) {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{}",
                        v.m,
                        v.j,
                        fmt_float(*phase),
                        fmt_float(*x)
                    );
                }
                emit(&csv, &Some(path.clone()))?;
            }
            println!(
                "N={} r={} kind={} vectors={} gram_defect={} hecke_variance={} c_arith={} ratio={}",
                n,
                ctx.order,
                ctx.kind,
                basis.vectors.len(),
                fmt_float(basis.gram_defect()),
                fmt_float(variance),
                fmt_float(c),
                fmt_float(variance / c)
            );
            Ok(())
        }
        Command::Selftest { level } => selftest::run(matches!(level, Level::Full)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be positive");
            return ExitCode::from(2);
        }
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
