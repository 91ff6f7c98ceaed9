use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use theta_lab::hyperelliptic::{random_hyperelliptic, HyperellipticCurve};
use theta_lab::theta::ThetaOptions;
use theta_lab_cli::{
    coeffs, configure_threads, counts, eval, parse_tau, periods, verify, FormKind, FormParams, Suite, VerifyConfig,
    PERIOD_F_TOL,
};

/// Numerical and exact checks of theta-constant identities.
#[derive(Parser)]
#[command(name = "theta-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact reduction table: alpha, beta and c_g for 2 <= g <= gmax.
    Coeffs {
        #[arg(long, default_value_t = 5)]
        gmax: usize,
    },
    /// Run a seeded numerical suite.
    Verify {
        /// igusa, riemann, theta8, factorization, fj, heat or schottky
        suite: Suite,
        #[arg(long)]
        g: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Evaluate a form at a period matrix read from a JSON file.
    Eval {
        /// P, S, Xi, F or schottky
        #[arg(long)]
        form: FormKind,
        #[arg(long)]
        tau: PathBuf,
        /// Coset dimension for P and S.
        #[arg(long)]
        i: Option<usize>,
        /// Weight exponent for P and S (defaults to 2^{4-i}).
        #[arg(long)]
        s: Option<u32>,
        /// Characteristic bits for Xi[m] (eps low, delta high).
        #[arg(long)]
        m: Option<u32>,
    },
    /// Period matrix of a hyperelliptic curve.
    Periods {
        /// JSON file {"branch_points": [[re, im], ...]}
        #[arg(long, conflicts_with = "random", required_unless_present = "random")]
        curve: Option<PathBuf>,
        /// Random curve as "g,seed".
        #[arg(long)]
        random: Option<String>,
        /// Also check that the Schottky form vanishes at the result.
        #[arg(long = "check-F")]
        check_f: bool,
        #[arg(long, default_value_t = PERIOD_F_TOL)]
        tol: f64,
    },
    /// Characteristic-space and lattice counting table.
    Counts,
}

fn emit<T: Serialize>(report: &T, summary: &str, pass: bool) -> ExitCode {
    match serde_json::to_string_pretty(report) {
        Ok(s) => println!("{s}"),
        Err(e) => {
            eprintln!("error: cannot serialize report: {e}");
            return ExitCode::from(2);
        }
    }
    eprintln!("{summary} [{}]", if pass { "PASS" } else { "FAIL" });
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn read(path: &PathBuf) -> theta_lab::Result<String> {
    std::fs::read_to_string(path).map_err(|e| theta_lab::Error::Parse(format!("{}: {e}", path.display())))
}

fn parse_random(s: &str) -> theta_lab::Result<(usize, u64)> {
    let bad = || theta_lab::Error::Parse(format!("--random expects \"g,seed\", got {s:?}"));
    let (g, seed) = s.split_once(',').ok_or_else(bad)?;
    Ok((g.trim().parse().map_err(|_| bad())?, seed.trim().parse().map_err(|_| bad())?))
}

fn run(cli: Cli) -> theta_lab::Result<ExitCode> {
    configure_threads()?;
    let opts = ThetaOptions::default();
    Ok(match cli.command {
        Command::Coeffs { gmax } => {
            let r = coeffs(gmax)?;
            emit(&r, &r.summary(), r.pass)
        }
        Command::Verify {
            suite,
            g,
            trials,
            seed,
            tol,
        } => {
            let r = verify(suite, &VerifyConfig::new(g, trials, seed, tol))?;
            emit(&r, &r.summary(), r.pass)
        }
        Command::Eval { form, tau, i, s, m } => {
            let tau = parse_tau(&read(&tau)?)?;
            let r = eval(form, &tau, FormParams { i, s, m }, &opts)?;
            let summary = format!(
                "{:?} at genus {}: value {:.6e}{:+.6e}i, |value|/scale {:.3e}",
                r.form, r.g, r.value.re, r.value.im, r.relative
            );
            emit(&r, &summary, true)
        }
        Command::Periods {
            curve,
            random,
            check_f,
            tol,
        } => {
            let curve = match (curve, random) {
                (Some(path), _) => serde_json::from_str::<HyperellipticCurve>(&read(&path)?)
                    .map_err(|e| theta_lab::Error::Parse(e.to_string()))?,
                (None, Some(arg)) => {
                    let (g, seed) = parse_random(&arg)?;
                    random_hyperelliptic(g, seed)?
                }
                (None, None) => unreachable!("clap requires one of --curve, --random"),
            };
            let r = periods(&curve, check_f.then_some(tol), &opts)?;
            let pass = r.f_check.as_ref().map_or(true, |c| c.pass);
            let mut summary = format!(
                "periods: genus {}, quadrature error {:.1e}, {} nodes, {:.2}s",
                r.genus, r.periods.quadrature_error, r.periods.nodes, r.wall_time
            );
            if let Some(c) = &r.f_check {
                summary += &format!("; |F|/scale {:.3e} (tol {:.0e})", c.relative, c.tolerance);
            }
            emit(&r, &summary, pass)
        }
        Command::Counts => {
            let r = counts()?;
            let failed: Vec<&str> = r.entries.iter().filter(|e| !e.pass).map(|e| e.name.as_str()).collect();
            let summary = format!(
                "counts: {} entries, quadruple convention {:?}{}",
                r.entries.len(),
                r.quadruple_convention,
                if failed.is_empty() {
                    String::new()
                } else {
                    format!(", mismatches: {failed:?}")
                }
            );
            emit(&r, &summary, r.pass)
        }
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
