//! Command-line front end. Exit codes: 0 on success, 1 on domain errors
//! (bad mathematical input), 2 on usage or parse errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::filtration::FiltrationError;
use crate::io::{self, IoError};
use crate::lift::{chain_rule, pers_jacobian, total_persistence, total_persistence_gradient};
use crate::metrics::{bottleneck, dist1, signed_bottleneck, ExtReal, PartialMatching};
use crate::optim::experiment_holes;
use crate::persistence::{barcode, reduce, Barcode};
use crate::svg;

#[derive(Parser)]
#[command(
    name = "persistlab",
    version,
    about = "Persistent homology pipelines: filtrations, (signed) barcodes, distances, and topological optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the Rips filtration of a point cloud CSV
    Rips {
        /// Input CSV, one `x_1,...,x_d` point per line
        #[arg(long)]
        points: PathBuf,
        /// Largest simplex dimension to build
        #[arg(long, default_value_t = 2)]
        maxdim: usize,
        /// Output filtration JSON
        #[arg(long)]
        out: PathBuf,
    },
    /// One-parameter persistence barcode of a filtration
    Barcode {
        /// Input filtration JSON (one parameter)
        #[arg(long)]
        filt: PathBuf,
        /// Homology degree
        #[arg(long, default_value_t = 1)]
        degree: usize,
        /// Output barcode JSON
        #[arg(long)]
        out: PathBuf,
        /// Optional persistence-diagram SVG
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Matching distance between two barcode files
    Distance {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_enum)]
        metric: Metric,
        /// Also print the witness matching
        #[arg(long)]
        witness: bool,
    },
    /// Signed barcode of a two-parameter grid module
    SignedBarcode {
        /// Input grid module JSON
        #[arg(long)]
        module: PathBuf,
        /// Output signed barcode JSON
        #[arg(long)]
        out: PathBuf,
        /// Optional figure SVG (blue positive, red negative)
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run the point-cloud hole-creation experiment
    Optimize {
        /// Run configuration JSON
        #[arg(long)]
        config: PathBuf,
        /// Directory for trace, point, barcode, and figure artifacts
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Compare analytic and finite-difference gradients of total persistence
    CheckGrad {
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 1)]
        degree: usize,
        /// Tolerance on the maximal relative error
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum Metric {
    Bottleneck,
    Dist1,
    Signed,
}

enum CliError {
    Usage(String),
    Domain(String),
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            // malformed files are usage errors; mathematically invalid
            // content is a domain error
            IoError::Csv { .. } | IoError::Json(_) => CliError::Usage(e.to_string()),
            IoError::Filtration(FiltrationError::EmptyCloud) => CliError::Domain(e.to_string()),
            IoError::Filtration(_) | IoError::Grid(_) | IoError::Invalid(_) => {
                CliError::Domain(e.to_string())
            }
        }
    }
}

/// Parses `std::env::args` and runs; returns the process exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

/// Testable entry point over explicit arguments.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, content)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Rips { points, maxdim, out } => {
            let text = read(&points)?;
            if text.trim().is_empty() {
                return Err(CliError::Usage(format!("{} is empty", points.display())));
            }
            let cloud = io::parse_points_csv(&text)?;
            let filtration = crate::filtration::rips_filtration(&cloud, maxdim)
                .map_err(|e| CliError::Domain(e.to_string()))?;
            write(&out, &io::filtration_to_json(&filtration))
        }
        Command::Barcode { filt, degree, out, svg: svg_path } => {
            let filtration = io::parse_filtration_json(&read(&filt)?)?;
            if filtration.parameters() != 1 {
                return Err(CliError::Domain(format!(
                    "filtration has {} parameters; use `signed-barcode` for multi-parameter input",
                    filtration.parameters()
                )));
            }
            let pairs = reduce(&filtration, degree);
            let bars = barcode(&pairs, degree);
            write(&out, &io::barcode_to_json(&bars))?;
            if let Some(svg_path) = svg_path {
                write(&svg_path, &svg::persistence_diagram(&bars))?;
            }
            Ok(())
        }
        Command::Distance { a, b, metric, witness } => {
            let left = io::parse_barcode_json(&read(&a)?)?;
            let right = io::parse_barcode_json(&read(&b)?)?;
            match metric {
                Metric::Signed => {
                    let value = signed_bottleneck(&left, &right)
                        .map_err(|e| CliError::Domain(e.to_string()))?;
                    println!("{}", render_value(value));
                    Ok(())
                }
                Metric::Bottleneck | Metric::Dist1 => {
                    if !left.negative.is_empty() || !right.negative.is_empty() {
                        return Err(CliError::Domain(
                            "input contains negative bars; use --metric signed".into(),
                        ));
                    }
                    let left = Barcode::new(left.n, left.positive);
                    let right = Barcode::new(right.n, right.positive);
                    let (value, matching) = match metric {
                        Metric::Bottleneck => bottleneck(&left, &right),
                        _ => dist1(&left, &right),
                    }
                    .map_err(|e| CliError::Domain(e.to_string()))?;
                    println!("{}", render_value(value));
                    if witness {
                        print_matching(&matching);
                    }
                    Ok(())
                }
            }
        }
        Command::SignedBarcode { module, out, svg: svg_path } => {
            let grid_module = io::parse_grid_module_json(&read(&module)?)?;
            let signed = crate::grid::signed_barcode(&grid_module)
                .map_err(|e| CliError::Domain(e.to_string()))?;
            write(&out, &io::signed_barcode_to_json(&signed))?;
            if let Some(svg_path) = svg_path {
                write(&svg_path, &svg::signed_barcode_figure(&signed))?;
            }
            Ok(())
        }
        Command::Optimize { config, out_dir } => {
            let mut run_config = io::parse_run_config(&read(&config)?)?;
            if let Ok(seed) = std::env::var("PERSISTLAB_SEED") {
                run_config.seed = seed
                    .parse()
                    .map_err(|_| CliError::Usage(format!("PERSISTLAB_SEED={seed} is not a u64")))?;
            }
            let result = experiment_holes(&run_config, Some(&out_dir))
                .map_err(|e| CliError::Domain(e.to_string()))?;
            println!(
                "final objective {}",
                io::format_float(result.state.trace.last().map_or(f64::NAN, |r| r.value))
            );
            Ok(())
        }
        Command::CheckGrad { points, degree, eps } => {
            if eps <= 0.0 {
                return Err(CliError::Usage("--eps must be positive".into()));
            }
            let cloud = io::parse_points_csv(&read(&points)?)?;
            let (lifted, jacobian) =
                pers_jacobian(&cloud, degree).map_err(|e| CliError::Domain(e.to_string()))?;
            let analytic = chain_rule(&total_persistence_gradient(lifted.k), &jacobian)
                .map_err(|e| CliError::Domain(e.to_string()))?;
            let scalar = |pts: Vec<Vec<f64>>| -> Result<f64, CliError> {
                let cloud = crate::filtration::PointCloud::new(pts)
                    .map_err(|e| CliError::Domain(e.to_string()))?;
                let filtration = crate::filtration::rips_filtration(&cloud, degree + 1)
                    .map_err(|e| CliError::Domain(e.to_string()))?;
                Ok(total_persistence(&barcode(&reduce(&filtration, degree), degree)))
            };
            let h = 1e-6 * cloud.diameter().max(1e-9);
            let mut worst = 0.0f64;
            for col in 0..jacobian.cols {
                let (pt, axis) = (col / cloud.dim(), col % cloud.dim());
                let mut plus = cloud.points().to_vec();
                let mut minus = cloud.points().to_vec();
                plus[pt][axis] += h;
                minus[pt][axis] -= h;
                let fd = (scalar(plus)? - scalar(minus)?) / (2.0 * h);
                let err = (analytic[col] - fd).abs() / analytic[col].abs().max(1.0);
                worst = worst.max(err);
            }
            println!("max relative error {}", io::format_float(worst));
            if worst > eps {
                return Err(CliError::Domain(format!(
                    "gradient mismatch: {worst:e} exceeds tolerance {eps:e}"
                )));
            }
            Ok(())
        }
    }
}

fn render_value(value: ExtReal) -> String {
    if value.is_finite() {
        io::format_float(value.value())
    } else {
        "inf".into()
    }
}

fn print_matching(matching: &PartialMatching) {
    for &(i, j) in &matching.pairs {
        println!("match {i} {j}");
    }
    for &i in &matching.unmatched_left {
        println!("delete-left {i}");
    }
    for &j in &matching.unmatched_right {
        println!("delete-right {j}");
    }
}
