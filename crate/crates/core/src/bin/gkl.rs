use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use gkl::kernels::audit::vanish_audit;
use gkl::kernels::bergman::{analytic_constant, bergman_reproduce, calibrate_constant, parse_sections};
use gkl::quadrature::{QuadratureSpec, Scheme};
use gkl::sampling::gaussian_pairs;
use gkl::suite::{parse_matrix, suite_report, Check, SuiteConfig};
use gkl::{ChartMatrix, Error, Shape};

#[derive(Parser)]
#[command(name = "gkl", version, about = "Weighted Koppelman kernels on Grassmannians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ShapeArgs {
    #[arg(long)]
    k: usize,
    #[arg(long = "N")]
    big_n: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run named verification checks.
    Verify {
        #[command(flatten)]
        shape: ShapeArgs,
        /// Comma-separated powers, e.g. `-1,0,1`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
        r: Vec<i32>,
        /// Comma-separated check names or `all`; empty runs nothing.
        #[arg(long, value_delimiter = ',', default_value = "all")]
        checks: Vec<String>,
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override every check's tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Record wall time per check (makes the report non-reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Reproduce holomorphic sections through the Bergman projection.
    Bergman {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, allow_hyphen_values = true)]
        r: i32,
        #[arg(long)]
        sections: PathBuf,
        #[arg(long, default_value = "gauss")]
        scheme: Scheme,
        #[arg(long, default_value_t = 24)]
        nodes: usize,
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Row-major chart point, rows split by `;`, entries by `,`.
        #[arg(long, allow_hyphen_values = true)]
        zeta: String,
        /// Reproducing constant; defaults to the closed form on `CP^n`, else calibrated.
        #[arg(long)]
        constant: Option<f64>,
        /// Relative tolerance; defaults to 1e-6 (gauss) or 2e-2 (mc).
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit the bidegree vanishing cases of `P_{g^r}`.
    Vanish {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, allow_hyphen_values = true)]
        r: i32,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownCheck(_) | Error::Parse(_) | Error::UnsupportedShape { .. } | Error::InvalidSection(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Run(other.to_string()),
        }
    }
}

fn write_json(path: &Option<PathBuf>, value: &impl Serialize) -> Result<(), Failure> {
    if let Some(path) = path {
        let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Run(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| Failure::Run(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn shape(args: &ShapeArgs) -> Result<Shape, Failure> {
    Ok(Shape::new(args.k, args.big_n)?)
}

#[derive(Serialize)]
struct BergmanRow {
    section: gkl::kernels::bergman::Section,
    reproduced: [f64; 2],
    exact: [f64; 2],
    relative_error: f64,
    error_estimate: f64,
    pass: bool,
}

#[derive(Serialize)]
struct BergmanOutput {
    k: usize,
    #[serde(rename = "N")]
    big_n: usize,
    r: i32,
    constant: f64,
    spec: QuadratureSpec,
    rows: Vec<BergmanRow>,
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::Verify {
            shape: sa,
            r,
            checks,
            points,
            seed,
            out,
            tol,
            timings,
        } => {
            let checks = checks.into_iter().map(|c| c.trim().to_string()).filter(|c| !c.is_empty()).collect();
            let config = SuiteConfig {
                k: sa.k,
                big_n: sa.big_n,
                r,
                checks,
                points,
                seed,
                tol,
                timings,
            };
            let report = suite_report(&config)?;
            for rep in &report.checks {
                println!("{rep}");
            }
            write_json(&out, &report)?;
            Ok(report.passed())
        }
        Command::Bergman {
            shape: sa,
            r,
            sections,
            scheme,
            nodes,
            samples,
            seed,
            zeta,
            constant,
            tol,
            out,
        } => {
            let shape = shape(&sa)?;
            let text = std::fs::read_to_string(&sections)
                .map_err(|e| Failure::Usage(format!("{}: {e}", sections.display())))?;
            let sections = parse_sections(&text)?;
            for sec in &sections {
                sec.validate(shape, r)?;
            }
            let zeta = ChartMatrix::new(shape, parse_matrix(&zeta, shape.rows(), shape.k)?)?;
            let spec = match scheme {
                Scheme::GaussChart => QuadratureSpec::gauss(nodes),
                Scheme::MonteCarloHaar => QuadratureSpec::monte_carlo(samples, seed),
            };
            let tol = tol.unwrap_or(match scheme {
                Scheme::GaussChart => 1e-6,
                Scheme::MonteCarloHaar => 2e-2,
            });
            let constant = match constant.or_else(|| analytic_constant(shape, r)) {
                Some(c) => c,
                None => calibrate_constant(shape, r, &spec)?,
            };
            println!("C = {constant}");
            let mut rows = Vec::new();
            for sec in sections {
                let est = bergman_reproduce(shape, r, &sec, &zeta, &spec, constant)?;
                let exact = sec.eval(&zeta);
                let rel = (est.value - exact).norm() / exact.norm().max(f64::MIN_POSITIVE);
                let pass = rel <= tol;
                println!(
                    "{} reproduced {:.10} exact {:.10} relative {rel:.3e} (estimate {:.1e})",
                    if pass { "PASS" } else { "FAIL" },
                    est.value,
                    exact,
                    est.error
                );
                rows.push(BergmanRow {
                    section: sec,
                    reproduced: [est.value.re, est.value.im],
                    exact: [exact.re, exact.im],
                    relative_error: rel,
                    error_estimate: est.error,
                    pass,
                });
            }
            let ok = rows.iter().all(|row| row.pass);
            write_json(
                &out,
                &BergmanOutput {
                    k: shape.k,
                    big_n: shape.big_n,
                    r,
                    constant,
                    spec,
                    rows,
                },
            )?;
            Ok(ok)
        }
        Command::Vanish {
            shape: sa,
            r,
            points,
            seed,
            tol,
            out,
        } => {
            let shape = shape(&sa)?;
            let tol = tol.unwrap_or_else(|| Check::Vanish.default_tolerance(shape));
            let pairs = gaussian_pairs(shape, seed, points);
            let reports = vanish_audit(shape, r, &pairs)?;
            println!("case  max relative  pass");
            let mut rows = Vec::new();
            for rep in &reports {
                let pass = rep.max_relative <= tol;
                println!("{:<5} {:<13.3e} {}", rep.case.label(), rep.max_relative, if pass { "PASS" } else { "FAIL" });
                rows.push(serde_json::json!({
                    "case": rep.case.label(),
                    "max_relative": rep.max_relative,
                    "pass": pass,
                }));
            }
            if let Some(first) = reports.first() {
                let keys: Vec<_> = first.key_set.iter().collect();
                println!("bidegrees (p',q';p'',q''): {keys:?}");
            }
            let ok = rows.iter().all(|row| row["pass"] == true);
            write_json(
                &out,
                &serde_json::json!({ "k": shape.k, "N": shape.big_n, "r": r, "points": points, "seed": seed, "cases": rows }),
            )?;
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
