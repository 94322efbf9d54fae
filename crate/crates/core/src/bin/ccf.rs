//! `ccf`: verification suites, extension tables, calculus checks, blow-up
//! scenarios and ad-hoc convolutions.
//!
//! Exit status: 0 when every check passes, 1 when any fails, 2 on
//! configuration or I/O errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ccf::harness::{
    self, extension_run, parse_ladder, run_calculus_check, run_l2_blowup, run_mult_exp, CalculusCheck, Corruption,
    Format, Report, RunConfig, Suite,
};
use ccf::{
    base_cosine, convolve, cosine_convolve, dual_convolve, BranchTerm, DiagonalGenerator, Error, ExtendOptions, Grid,
    GridFunction, Kernel, QuadratureRule, TestFunction,
};

#[derive(Parser)]
#[command(name = "ccf", version, about = "Convoluted cosine families on a grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite over a grid ladder.
    Verify {
        /// identity, duhamel, extension, calculus, kernel or all.
        #[arg(long, default_value = "identity")]
        suite: String,
        /// Grid ladder, e.g. 256,512,1024.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long = "T")]
        t_end: Option<f64>,
        #[arg(long)]
        kernel: Option<Kernel>,
        #[arg(long = "gen")]
        generator: Option<DiagonalGenerator>,
        /// Report values without enforcing calibrated tolerances.
        #[arg(long)]
        no_calibrate: bool,
        /// Negative control: index-shift or drop-term.
        #[arg(long)]
        corrupt: Option<Corruption>,
        #[command(flatten)]
        output: Output,
    },
    /// Extend `k ∗ cosh(a·)` from [0, ν] to [0, (n+1)ν]; writes `t,m,re,im`.
    Extend {
        #[arg(long, default_value = "jalpha:1")]
        kernel: Kernel,
        #[arg(long = "gen", default_value = "1")]
        generator: DiagonalGenerator,
        /// Local interval length ν.
        #[arg(long = "T", default_value_t = 1.0)]
        nu: f64,
        /// Cells per ν.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// Number of extension steps.
        #[arg(long, default_value_t = 3)]
        steps: usize,
        /// Drop far-branch term 1..=5 (negative control).
        #[arg(long)]
        drop_term: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check one functional-calculus identity on a ladder of resolutions.
    Calculus {
        #[arg(long, default_value = "jalpha:1")]
        kernel: Kernel,
        #[arg(long = "gen", default_value = "1")]
        generator: DiagonalGenerator,
        #[arg(long, default_value = "bump:0.2,0.8,8")]
        bump: TestFunction,
        /// Second factor for `mult`; defaults to --bump.
        #[arg(long)]
        bump2: Option<TestFunction>,
        /// mult, gen or smooth.
        #[arg(long, default_value = "mult")]
        check: CalculusCheck,
        /// Smoothing kernel exponent β for `smooth`.
        #[arg(long)]
        beta: Option<f64>,
        /// Cells per τ, e.g. 32,64,128.
        #[arg(long, default_value = "32,64,128")]
        grid: String,
        /// Local interval τ.
        #[arg(long = "T", default_value_t = 1.0)]
        tau: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Closed-form blow-up scenarios in log space.
    Scenario {
        #[command(subcommand)]
        which: Scenario,
    },
    /// Convolve two CSV grid functions (`# T=.. M=..`, columns t,re,im).
    Convolve {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
        /// star, dual or cosine.
        #[arg(long, default_value = "star")]
        op: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Scenario {
    /// Threshold sequence a_m with sharp extendability limit at t = T.
    L2Blowup {
        #[arg(long = "T", default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 30)]
        modes: usize,
        #[arg(long, default_value = "0.8,1,1.2")]
        times: String,
        /// Also write the profile rows `t,m,log_magnitude` here.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Multiplier sinh((x + i e^x)t)/(x + i e^x) on [0, X].
    MultExp {
        #[arg(long, default_value_t = 25.0)]
        x_max: f64,
        #[arg(long, default_value = "0.25,0.5,1,1.2")]
        times: String,
        #[arg(long, default_value_t = 25001)]
        samples: usize,
        #[command(flatten)]
        output: Output,
    },
}

fn parse_times(s: &str) -> ccf::Result<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad time {p:?}"))))
        .collect()
}

fn emit(text: &str, out: Option<&Path>) -> ccf::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io { path: path.into(), source: e }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn finish(report: &Report, output: &Output) -> ccf::Result<bool> {
    emit(&report.render(output.format)?, output.out.as_deref())?;
    for r in report.failures() {
        eprintln!("FAIL {}: {:.4e}", r.name, r.value);
    }
    eprintln!(
        "{}: {} checks, {} failed",
        report.suite,
        report.records.len(),
        report.failures().count()
    );
    Ok(report.passed())
}

fn run(cli: Cli) -> ccf::Result<bool> {
    match cli.command {
        Command::Verify { suite, grid, t_end, kernel, generator, no_calibrate, corrupt, output } => {
            let suites: Vec<Suite> = if suite == "all" { Suite::ALL.to_vec() } else { vec![suite.parse()?] };
            let mut combined: Option<Report> = None;
            for s in suites {
                let mut cfg = RunConfig::new(s);
                if let Some(g) = &grid {
                    cfg.ladder = parse_ladder(g)?;
                }
                if let Some(t) = t_end {
                    cfg.t_end = t;
                }
                cfg.kernel = kernel.clone();
                cfg.generator = generator.clone();
                cfg.calibrate = !no_calibrate;
                cfg.corruption = corrupt;
                cfg.format = output.format;
                cfg.output = output.out.clone();
                let report = harness::run_suite(&cfg)?;
                combined = Some(match combined {
                    None => report,
                    Some(mut all) => {
                        if all.suite != "all" {
                            let first = std::mem::replace(&mut all, Report::new("all", report.environment.clone()));
                            all.absorb(first);
                        }
                        all.absorb(report);
                        all
                    }
                });
            }
            finish(&combined.expect("at least one suite"), &output)
        }
        Command::Extend { kernel, generator, nu, grid, steps, drop_term, out } => {
            let opts = ExtendOptions { skip_term: drop_term.map(BranchTerm::from_position).transpose()? };
            let base = base_cosine(&generator, &Grid::new(nu, grid)?);
            let run = extension_run(&base, &kernel, steps, opts)?;
            for (n, seam) in run.seams.iter().enumerate() {
                eprintln!("step {}: seam mismatch {seam:.3e}", n + 1);
            }
            emit(&run.last().to_csv_string(), out.as_deref())?;
            Ok(true)
        }
        Command::Calculus { kernel, generator, bump, bump2, check, beta, grid, tau, output } => {
            let check = match (check, beta) {
                (CalculusCheck::Smoothing(_), Some(b)) => CalculusCheck::Smoothing(b),
                (c, _) => c,
            };
            let mut cfg = RunConfig::new(Suite::Calculus).with_ladder(parse_ladder(&grid)?);
            cfg.t_end = tau;
            cfg.kernel = Some(kernel);
            cfg.generator = Some(generator);
            let report = run_calculus_check(&cfg, check, &bump, bump2.as_ref())?;
            finish(&report, &output)
        }
        Command::Scenario { which } => match which {
            Scenario::L2Blowup { t_end, modes, times, profile, output } => {
                let (report, rows) = run_l2_blowup(t_end, modes, &parse_times(&times)?)?;
                if let Some(path) = profile {
                    let mut text = String::from("t,m,log_magnitude\n");
                    for r in rows {
                        text.push_str(&format!("{},{},{}\n", r.t, r.mode, r.log_magnitude));
                    }
                    emit(&text, Some(&path))?;
                }
                finish(&report, &output)
            }
            Scenario::MultExp { x_max, times, samples, output } => {
                let (report, _) = run_mult_exp(x_max, &parse_times(&times)?, samples)?;
                finish(&report, &output)
            }
        },
        Command::Convolve { f, g, op, out } => {
            let (f, g) = (GridFunction::read_csv(&f)?, GridFunction::read_csv(&g)?);
            let r = match op.as_str() {
                "star" => convolve(&f, &g, QuadratureRule::auto(&f, &g))?,
                "dual" => dual_convolve(&f, &g)?,
                "cosine" => cosine_convolve(&f, &g)?,
                other => return Err(Error::Parse(format!("unknown op {other:?}; expected star, dual or cosine"))),
            };
            emit(&r.to_csv_string(), out.as_deref())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("CCF_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: CCF_THREADS: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
