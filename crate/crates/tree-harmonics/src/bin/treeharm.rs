//! `treeharm`: compute, verify and plot the radial harmonic analysis of
//! free groups from the command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 precondition or
//! domain error, 3 resource cap exceeded, 4 I/O or parse error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use tree_harmonics::config::Config;
use tree_harmonics::hypergroup::{convolve_measures, s_density_real, RadialMeasure};
use tree_harmonics::io;
use tree_harmonics::opnorm::{estimate_opnorm, gelfand_norm, l2eps_tail, TreeOperator};
use tree_harmonics::radial::{xi_l3_tail, RadialFunction};
use tree_harmonics::spherical::{
    gauss_rule, invert, plancherel_density_r2, spherical_values, transform_at, SphericalParameter,
};
use tree_harmonics::svg::{line_plot, Series, PALETTE};
use tree_harmonics::verify;
use tree_harmonics::{Error, Result};

#[derive(Parser)]
#[command(
    name = "treeharm",
    version,
    about = "Harmonic analysis of radial functions on free groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Free group rank r (tree degree 2r).
    #[arg(long, default_value_t = 2)]
    rank: u32,
    /// Gauss quadrature size K.
    #[arg(long, default_value_t = 64)]
    quad: usize,
    /// Grid resolution for scans and plots.
    #[arg(long, default_value_t = 512)]
    grid: usize,
    /// Ball-size cap for tree enumeration.
    #[arg(long, default_value_t = tree_harmonics::words::DEFAULT_BALL_CAP)]
    ball: usize,
    /// RNG seed (all randomized paths are deterministic given the seed).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tolerance override for verification suites.
    #[arg(long)]
    tol: Option<f64>,
}

impl Common {
    fn config(&self) -> Config {
        Config {
            rank: self.rank,
            quad: self.quad,
            grid: self.grid,
            tol: self.tol,
            seed: self.seed,
            ball_cap: self.ball,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ParamSegment {
    Real,
    Lower,
    Upper,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    /// Human-readable text report.
    Text,
    /// Machine-readable JSON report.
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKind {
    Plancherel,
    Kernel,
    Spectrum,
    Tails,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the spherical sequence p_0..p_nmax at a spectral parameter.
    Spherical {
        #[command(flatten)]
        common: Common,
        /// Segment of the parameter set.
        #[arg(long, value_enum, default_value_t = ParamSegment::Real)]
        segment: ParamSegment,
        /// Angle theta (real segment) or zeta (imaginary segments).
        #[arg(long, default_value_t = 0.0)]
        value: f64,
        #[arg(long, default_value_t = 40)]
        nmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spherical transform of a radial CSV, sampled on a grid or at the
    /// Gauss nodes (use --nodes to prepare input for `invert`).
    Transform {
        #[command(flatten)]
        common: Common,
        input: PathBuf,
        /// Sample at the K Gauss nodes instead of the uniform grid.
        #[arg(long)]
        nodes: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Invert a transform CSV sampled at the K Gauss nodes back to levels.
    Invert {
        #[command(flatten)]
        common: Common,
        input: PathBuf,
        #[arg(long, default_value_t = 30)]
        nmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convolve two spectral point masses (or two measure JSON files).
    Convolve {
        #[command(flatten)]
        common: Common,
        /// First parameter as segment:value, e.g. real:1.1 or lower:0.45.
        #[arg(long, conflicts_with = "file1", required_unless_present = "file1")]
        theta1: Option<String>,
        #[arg(long, conflicts_with = "file2", required_unless_present = "file2")]
        theta2: Option<String>,
        /// First measure as a JSON file.
        #[arg(long)]
        file1: Option<PathBuf>,
        #[arg(long)]
        file2: Option<PathBuf>,
        /// Output JSON path (density CSV goes next to it).
        #[arg(long, default_value = "convolution.json")]
        out: PathBuf,
    },
    /// Truncated operator norm of a radial symbol on the ball of radius N.
    Opnorm {
        #[command(flatten)]
        common: Common,
        /// Radial CSV input; defaults to the sphere-1 indicator.
        input: Option<PathBuf>,
        /// Truncation radius N.
        #[arg(short = 'N', long, default_value_t = 8)]
        radius: u32,
        #[arg(long, default_value_t = 120)]
        iters: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification suites (words, radial, spherical, hypergroup,
    /// opnorm, or all). Exits 1 if any check fails.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Suite to run.
        #[arg(default_value = "all")]
        suite: String,
        /// Machine-readable JSON report path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report format on stdout.
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Perturb the hypergroup kernel constant (self-test; must fail).
        #[arg(long, hide = true, default_value_t = 0.0)]
        inject_fault: f64,
    },
    /// Emit CSV samples and an SVG rendering of a standard diagnostic.
    Plot {
        #[command(flatten)]
        common: Common,
        #[arg(value_enum)]
        kind: PlotKind,
        /// Kernel plot: first angle.
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        theta1: f64,
        /// Kernel plot: second angle.
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        theta2: f64,
        /// Spectrum plot: radial CSV input (default sphere-1 indicator).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Output base path; writes BASE.csv and BASE.svg.
        #[arg(long, default_value = "plot")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn parse_param(rank: u32, text: &str) -> Result<SphericalParameter> {
    let (segment, value) = match text.split_once(':') {
        Some((s, v)) => (s, v),
        None => ("real", text),
    };
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| Error::Precondition(format!("invalid parameter value in {text:?}")))?;
    match segment {
        "real" => SphericalParameter::real(rank, value),
        "lower" => SphericalParameter::lower(rank, value),
        "upper" => SphericalParameter::upper(rank, value),
        other => Err(Error::Precondition(format!(
            "unknown segment {other:?} (expected real, lower or upper)"
        ))),
    }
}

fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => io::write_atomic(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Spherical {
            common,
            segment,
            value,
            nmax,
            out,
        } => {
            let cfg = common.config();
            cfg.validate()?;
            let param = match segment {
                ParamSegment::Real => SphericalParameter::real(cfg.rank, value),
                ParamSegment::Lower => SphericalParameter::lower(cfg.rank, value),
                ParamSegment::Upper => SphericalParameter::upper(cfg.rank, value),
            }?;
            let seq = spherical_values(&param, nmax);
            let mut csv = String::from("n,p_n\n");
            for (n, p) in seq.values.iter().enumerate() {
                csv.push_str(&format!("{n},{p:.17e}\n"));
            }
            emit(out.as_deref(), &csv)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Transform {
            common,
            input,
            nodes,
            out,
        } => {
            let cfg = common.config();
            cfg.validate()?;
            let x = io::read_radial(cfg.rank, &input)?;
            let thetas: Vec<f64> = if nodes {
                gauss_rule(cfg.rank, cfg.quad)?.nodes().to_vec()
            } else {
                (0..=cfg.grid)
                    .map(|i| std::f64::consts::PI * i as f64 / cfg.grid as f64)
                    .collect()
            };
            let values: Vec<Complex64> = thetas.iter().map(|&t| transform_at(&x, t)).collect();
            emit(out.as_deref(), &io::transform_to_csv(&thetas, &values))?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Invert {
            common,
            input,
            nmax,
            out,
        } => {
            let cfg = common.config();
            cfg.validate()?;
            let (thetas, values) = io::read_transform(&input)?;
            let rule = gauss_rule(cfg.rank, cfg.quad)?;
            if thetas.len() != rule.len() {
                return Err(Error::Precondition(format!(
                    "transform has {} samples but the K = {} rule has {} nodes \
                     (generate input with `transform --nodes --quad {}`)",
                    thetas.len(),
                    cfg.quad,
                    rule.len(),
                    cfg.quad
                )));
            }
            for (i, (&t, &node)) in thetas.iter().zip(rule.nodes()).enumerate() {
                if (t - node).abs() > 1e-9 {
                    return Err(Error::Precondition(format!(
                        "sample {i} at theta = {t} does not match Gauss node {node}"
                    )));
                }
            }
            let x = invert(&values, &rule, nmax)?;
            emit(out.as_deref(), &io::radial_to_csv(&x))?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Convolve {
            common,
            theta1,
            theta2,
            file1,
            file2,
            out,
        } => {
            let cfg = common.config();
            cfg.validate()?;
            let rule = gauss_rule(cfg.rank, cfg.quad)?;
            let load = |text: &Option<String>, file: &Option<PathBuf>| -> Result<RadialMeasure> {
                match (text, file) {
                    (Some(t), None) => {
                        Ok(RadialMeasure::point_mass(parse_param(cfg.rank, t)?))
                    }
                    (None, Some(p)) => io::read_measure(cfg.rank, p),
                    _ => Err(Error::Precondition(
                        "give exactly one of --thetaN / --fileN per operand".into(),
                    )),
                }
            };
            let mu = load(&theta1, &file1)?;
            let nu = load(&theta2, &file2)?;
            let conv = convolve_measures(&mu, &nu, &rule)?;
            let thetas: Vec<f64> = (0..=cfg.grid)
                .map(|i| std::f64::consts::PI * i as f64 / cfg.grid as f64)
                .collect();
            io::write_measure(&out, &conv, &thetas)?;
            let density: Vec<Complex64> = thetas.iter().map(|&t| conv.density.eval(t)).collect();
            io::write_atomic(
                &out.with_extension("density.csv"),
                &io::transform_to_csv(&thetas, &density),
            )?;
            println!(
                "atoms: {}  total mass: {:.12}",
                conv.atoms.len(),
                conv.total_mass(&rule).re
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Opnorm {
            common,
            input,
            radius,
            iters,
            out,
        } => {
            let cfg = common.config();
            cfg.validate()?;
            let x = match &input {
                Some(p) => io::read_radial(cfg.rank, p)?,
                None => RadialFunction::from_real(cfg.rank, &[0.0, 1.0]),
            };
            let op = TreeOperator::build_radial(&x, radius, cfg.ball_cap)?;
            let est = estimate_opnorm(&op, iters, cfg.seed);
            let gelfand = gelfand_norm(&x, cfg.grid, 80);
            let stats = io::OpnormStats {
                rank: cfg.rank,
                radius,
                ball: op.domain_len(),
                est_norm: est,
                gelfand_norm: gelfand,
                iters,
                seed: cfg.seed,
            };
            match &out {
                Some(p) => io::write_stats(p, &stats)?,
                None => println!(
                    "{}",
                    serde_json::to_string_pretty(&stats)
                        .map_err(|e| Error::Precondition(e.to_string()))?
                ),
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Verify {
            common,
            suite,
            out,
            format,
            inject_fault,
        } => {
            let cfg = common.config();
            cfg.validate()?;
            let suites = match suite.as_str() {
                "all" => verify::verify_all(inject_fault),
                "words" => vec![verify::verify_words()],
                "radial" => vec![verify::verify_radial()],
                "spherical" => vec![verify::verify_spherical()],
                "hypergroup" => vec![verify::verify_hypergroup(inject_fault)],
                "opnorm" => vec![verify::verify_opnorm()],
                other => {
                    return Err(Error::Precondition(format!(
                        "unknown suite {other:?} (words, radial, spherical, hypergroup, opnorm, all)"
                    )))
                }
            };
            let mut all_pass = true;
            for s in &suites {
                if format == Format::Text {
                    print!("{}", s.render());
                }
                all_pass &= s.passed();
            }
            if format == Format::Json {
                println!("{}", suites_to_json(&suites)?);
            }
            if let Some(path) = &out {
                let json = suites_to_json(&suites)?;
                io::write_atomic(path, &json)?;
            }
            if all_pass {
                if format == Format::Text {
                    println!("all checks passed");
                }
                Ok(ExitCode::SUCCESS)
            } else {
                if format == Format::Text {
                    println!("verification FAILED");
                }
                Ok(ExitCode::from(1))
            }
        }

        Command::Plot {
            common,
            kind,
            theta1,
            theta2,
            input,
            out,
        } => {
            let cfg = common.config();
            cfg.validate()?;
            plot(&cfg, kind, theta1, theta2, input.as_deref(), &out)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn suites_to_json(suites: &[verify::Suite]) -> Result<String> {
    use serde_json::{json, Value};
    let value: Vec<Value> = suites
        .iter()
        .map(|s| {
            json!({
                "suite": s.name,
                "passed": s.passed(),
                "checks": s.checks.iter().map(|c| json!({
                    "name": c.name,
                    "tol": c.tol,
                    "residual": c.residual,
                    "pass": c.pass,
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    serde_json::to_string_pretty(&value).map_err(|e| Error::Precondition(e.to_string()))
}

fn plot(
    cfg: &Config,
    kind: PlotKind,
    theta1: f64,
    theta2: f64,
    input: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let grid = cfg.grid;
    let thetas: Vec<f64> = (0..=grid)
        .map(|i| std::f64::consts::PI * i as f64 / grid as f64)
        .collect();
    let (title, x_label, y_label, series): (&str, &str, &str, Vec<Series>) = match kind {
        PlotKind::Plancherel => {
            if cfg.rank != 2 {
                return Err(Error::Precondition(
                    "the closed-form density plot is rank-2 only".into(),
                ));
            }
            let points: Vec<(f64, f64)> = thetas
                .iter()
                .map(|&t| (t, plancherel_density_r2(t)))
                .collect();
            (
                "Plancherel density (r = 2)",
                "theta",
                "density",
                vec![Series {
                    label: "6 sin^2 / (pi (4 - 3 cos^2))".into(),
                    points,
                    color: PALETTE[0],
                }],
            )
        }
        PlotKind::Kernel => {
            if cfg.rank != 2 {
                return Err(Error::KernelRankUnsupported(cfg.rank));
            }
            let points: Vec<(f64, f64)> = thetas
                .iter()
                .map(|&t| (t, s_density_real(theta1, theta2, t)))
                .collect();
            (
                "Convolution kernel s(theta1, theta2, .)",
                "theta",
                "kernel",
                vec![Series {
                    label: format!("theta1 = {theta1:.3}, theta2 = {theta2:.3}"),
                    points,
                    color: PALETTE[1],
                }],
            )
        }
        PlotKind::Spectrum => {
            let x = match input {
                Some(p) => io::read_radial(cfg.rank, p)?,
                None => RadialFunction::from_real(cfg.rank, &[0.0, 1.0]),
            };
            let points: Vec<(f64, f64)> = thetas
                .iter()
                .map(|&t| (t, transform_at(&x, t).norm()))
                .collect();
            (
                "Spectral modulus of the transform",
                "theta",
                "|xhat|",
                vec![Series {
                    label: "|xhat(theta)|".into(),
                    points,
                    color: PALETTE[2],
                }],
            )
        }
        PlotKind::Tails => {
            let nmax = 80;
            let xi_sums = xi_l3_tail(cfg.rank, nmax);
            let l2e = l2eps_tail(cfg.rank, 0.0, 1.0, nmax)?;
            let a: Vec<(f64, f64)> = xi_sums
                .iter()
                .enumerate()
                .map(|(n, &s)| (n as f64, s))
                .collect();
            let b: Vec<(f64, f64)> = l2e
                .partial_sums
                .iter()
                .enumerate()
                .map(|(n, &s)| (n as f64, s))
                .collect();
            (
                "Tail partial sums",
                "n",
                "partial sum",
                vec![
                    Series {
                        label: "sum |B_n| Xi^3".into(),
                        points: a,
                        color: PALETTE[0],
                    },
                    Series {
                        label: "sum |B_n| |p_n(0)|^3".into(),
                        points: b,
                        color: PALETTE[3],
                    },
                ],
            )
        }
    };

    // CSV: one x column plus one column per series.
    let mut csv = String::from("x");
    for s in &series {
        csv.push(',');
        csv.push_str(&s.label.replace(',', ";"));
    }
    csv.push('\n');
    let len = series.iter().map(|s| s.points.len()).max().unwrap_or(0);
    for i in 0..len {
        let x = series
            .iter()
            .find_map(|s| s.points.get(i).map(|p| p.0))
            .unwrap_or(0.0);
        csv.push_str(&format!("{x:.17e}"));
        for s in &series {
            match s.points.get(i) {
                Some(&(_, y)) => csv.push_str(&format!(",{y:.17e}")),
                None => csv.push(','),
            }
        }
        csv.push('\n');
    }
    io::write_atomic(&out.with_extension("csv"), &csv)?;
    io::write_atomic(
        &out.with_extension("svg"),
        &line_plot(title, x_label, y_label, &series),
    )?;
    Ok(())
}
