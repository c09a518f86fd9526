//! Command-line front end: synthetic signal generation, smoothness
//! analysis, standalone transforms and scaling benchmarks.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use samplets::basis::{build_basis, default_leaf_capacity, SampletBasis};
use samplets::points::{
    format_from_path, load_pgm, load_points, save_csv, Format, PgmHeader, PointSet,
};
use samplets::signals::{synth, Signal};
use samplets::smoothness::{
    compute_exponents, threshold_chart, write_chart_csv, write_mask_csv, write_mask_pgm,
    write_alpha_pgm, SmoothnessOptions,
};
use samplets::transform::{forward, inverse, write_coefficients_csv, CoefficientVector};
use samplets::tree::{build_tree, build_tree_gridded, ClusterTree};
use samplets::Error;

#[derive(Parser)]
#[command(
    name = "samplets",
    about = "Samplet transforms and local smoothness detection on scattered data",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a built-in synthetic signal to CSV.
    Synth(SynthArgs),
    /// Estimate per-point local Hölder exponents of an input point set.
    Analyze(AnalyzeArgs),
    /// Forward samplet transform of an input point set.
    Transform(TransformArgs),
    /// Scaling benchmark over a ladder of point counts.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Signal name: f1, corner2d, singular2d, sphere_heaviside, poly.
    name: String,
    /// Number of sample sites.
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    /// RNG seed; identical seeds reproduce identical files.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Prefix for output files.
    #[arg(long, default_value = "out")]
    output_prefix: PathBuf,
}

#[derive(Args)]
struct InputArgs {
    /// Input file.
    #[arg(long)]
    input: PathBuf,
    /// Input format (csv, xyz, pgm); inferred from the extension if omitted.
    #[arg(long)]
    format: Option<String>,
    /// Coordinate dimension (ignored for pgm, which is always 2).
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Vanishing-moment degree q; the basis annihilates polynomials of
    /// total degree <= q, i.e. it has q + 1 vanishing moments.
    #[arg(long, default_value_t = 2)]
    degree: u32,
    /// Tree leaf capacity; defaults to 4 * C(q + d, d).
    #[arg(long)]
    leaf_capacity: Option<usize>,
    /// Force the bottom-up gridded tree builder (automatic for dyadic
    /// square pgm input).
    #[arg(long)]
    grid: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Flag points whose fitted slope falls below this and write a mask.
    #[arg(long)]
    threshold: Option<f64>,
    /// Smooth-branch detection tolerance.
    #[arg(long, default_value_t = 1e-12)]
    ratio_tol: f64,
    /// Relative cutoff excluding exhausted levels from the slope fit.
    #[arg(long, default_value_t = 1e-13)]
    eps_drop: f64,
    /// Prefix for output files.
    #[arg(long, default_value = "out")]
    output_prefix: PathBuf,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Prefix for output files.
    #[arg(long, default_value = "out")]
    output_prefix: PathBuf,
    /// Also run the inverse transform and report the roundtrip error.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated point counts.
    #[arg(long, default_value = "100000,200000,400000,800000")]
    bench_ladder: String,
    /// Vanishing-moment degree q.
    #[arg(long, default_value_t = 2)]
    degree: u32,
    /// RNG seed for the synthetic 1D signal.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(args) => run_synth(args),
        Command::Analyze(args) => run_analyze(args),
        Command::Transform(args) => run_transform(args),
        Command::Bench(args) => run_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

/// SAMPLET_THREADS caps the rayon pool; unset or invalid leaves the default.
fn init_thread_pool() {
    if let Ok(v) = std::env::var("SAMPLET_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("benchmark exceeded the near-linear growth bound: {0}")]
    BenchFailed(String),
}

impl CliError {
    /// Documented exit codes: 0 success, 2 usage (clap), 3 i/o, 4 parse,
    /// 5 validation, 6 internal, 7 benchmark bound exceeded.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(Error::Io { .. }) => 3,
            CliError::Lib(Error::Parse { .. }) => 4,
            CliError::Lib(
                Error::Validation(_) | Error::GridStructure(_) | Error::UnknownSignal(_),
            ) => 5,
            CliError::Lib(_) => 6,
            CliError::BenchFailed(_) => 7,
        }
    }
}

fn run_synth(args: SynthArgs) -> Result<(), CliError> {
    let signal: Signal = args.name.parse().map_err(CliError::Lib)?;
    let ps = synth(signal, args.n, args.seed)?;
    let path = suffixed(&args.output_prefix, "_points.csv");
    save_csv(&ps, &path)?;
    println!(
        "wrote {} points (dim {}) to {}",
        ps.count(),
        ps.dim(),
        path.display()
    );
    Ok(())
}

struct LoadedInput {
    ps: PointSet,
    pgm: Option<PgmHeader>,
}

fn load_input(args: &InputArgs) -> Result<LoadedInput, CliError> {
    let format = match &args.format {
        Some(f) => f.parse::<Format>()?,
        None => format_from_path(&args.input).ok_or_else(|| {
            CliError::Usage(format!(
                "cannot infer format of {}; pass --format",
                args.input.display()
            ))
        })?,
    };
    if format == Format::Pgm {
        let (ps, header) = load_pgm(&args.input)?;
        Ok(LoadedInput {
            ps,
            pgm: Some(header),
        })
    } else {
        let ps = load_points(&args.input, format, args.dim)?;
        Ok(LoadedInput { ps, pgm: None })
    }
}

/// Builds the tree, choosing the bottom-up builder for dyadic grids.
fn build_input_tree(
    ps: &PointSet,
    pgm: Option<&PgmHeader>,
    args: &InputArgs,
) -> Result<(ClusterTree, &'static str), CliError> {
    let grid_level = match pgm {
        Some(h) if h.width == h.height && h.width.is_power_of_two() => {
            Some(h.width.trailing_zeros())
        }
        None if args.grid => {
            // A full per-axis power-of-two grid has N = s^d points.
            let s = (ps.count() as f64).powf(1.0 / ps.dim() as f64).round() as usize;
            (s.pow(ps.dim() as u32) == ps.count() && s.is_power_of_two())
                .then(|| s.trailing_zeros())
        }
        _ => None,
    };
    match grid_level {
        Some(level) => Ok((build_tree_gridded(ps, level)?, "gridded")),
        None if args.grid => Err(CliError::Usage(
            "--grid requires a full power-of-two grid per axis".into(),
        )),
        None => {
            let cap = args
                .leaf_capacity
                .unwrap_or_else(|| default_leaf_capacity(ps.dim(), args.degree));
            Ok((build_tree(ps, cap, None)?, "top-down"))
        }
    }
}

fn run_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    if args.ratio_tol <= 0.0 || args.eps_drop <= 0.0 {
        return Err(CliError::Usage(
            "--ratio-tol and --eps-drop must be positive".into(),
        ));
    }
    if let Some(t) = args.threshold {
        if t <= 0.0 {
            return Err(CliError::Usage("--threshold must be positive".into()));
        }
    }
    let loaded = load_input(&args.input)?;
    let ps = &loaded.ps;

    let t0 = Instant::now();
    let (tree, builder) = build_input_tree(ps, loaded.pgm.as_ref(), &args.input)?;
    let depth = tree.depth();
    let basis = build_basis(tree, ps, args.input.degree);
    let t_build = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let coeffs = forward(&basis, &CoefficientVector::dirac(ps.values().to_vec()))?;
    let t_transform = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let opts = SmoothnessOptions {
        eps_drop: args.eps_drop,
        ratio_tol: args.ratio_tol,
    };
    let chart = compute_exponents(&basis, &coeffs, &opts)?;
    let t_fit = t2.elapsed().as_secs_f64();

    let chart_path = suffixed(&args.output_prefix, "_chart.csv");
    write_chart_csv(ps, &chart, &chart_path)?;
    let mut outputs = vec![chart_path.display().to_string()];

    let alpha_max = (args.input.degree + 1) as f64;
    if let Some(h) = &loaded.pgm {
        let path = suffixed(&args.output_prefix, "_alpha.pgm");
        write_alpha_pgm(&chart, h.width, h.height, alpha_max, &path)?;
        outputs.push(path.display().to_string());
    }
    if let Some(t) = args.threshold {
        let mask = threshold_chart(&chart, t);
        let path = suffixed(&args.output_prefix, "_mask.csv");
        write_mask_csv(ps, &mask, &path)?;
        outputs.push(path.display().to_string());
        if let Some(h) = &loaded.pgm {
            let path = suffixed(&args.output_prefix, "_mask.pgm");
            write_mask_pgm(&mask, h.width, h.height, &path)?;
            outputs.push(path.display().to_string());
        }
    }

    println!(
        "points:     {} (dim {}, {} tree, depth {})",
        ps.count(),
        ps.dim(),
        builder,
        depth
    );
    println!("tree/basis: {t_build:.3} s");
    println!("transform:  {t_transform:.3} s");
    println!("fit:        {t_fit:.3} s");
    println!("wrote {}", outputs.join(", "));
    Ok(())
}

fn run_transform(args: TransformArgs) -> Result<(), CliError> {
    let loaded = load_input(&args.input)?;
    let ps = &loaded.ps;
    let (tree, _) = build_input_tree(ps, loaded.pgm.as_ref(), &args.input)?;
    let basis: SampletBasis = build_basis(tree, ps, args.input.degree);
    let values = CoefficientVector::dirac(ps.values().to_vec());
    let coeffs = forward(&basis, &values)?;
    let path = suffixed(&args.output_prefix, "_coeffs.csv");
    write_coefficients_csv(&coeffs, &path)?;
    println!(
        "wrote {} coefficients to {} (norm {:.6e})",
        coeffs.len(),
        path.display(),
        coeffs.norm()
    );
    if args.check {
        let back = inverse(&basis, &coeffs)?;
        let err = back
            .data
            .iter()
            .zip(values.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        println!("roundtrip max abs error: {err:.3e}");
    }
    Ok(())
}

fn run_bench(args: BenchArgs) -> Result<(), CliError> {
    let sizes: Vec<usize> = args
        .bench_ladder
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("bad ladder entry {s:?}")))
        })
        .collect::<Result<_, _>>()?;
    if sizes.len() < 2 {
        return Err(CliError::Usage("ladder needs at least two sizes".into()));
    }
    let q = args.degree;
    let cap = default_leaf_capacity(1, q);
    println!("{:>10}  {:>12}  {:>12}", "N", "tree+basis+fwd", "fit");
    let mut build_times = Vec::new();
    let mut fit_times = Vec::new();
    for &n in &sizes {
        let ps = synth(Signal::F1, n, args.seed)?;
        let t0 = Instant::now();
        let tree = build_tree(&ps, cap, None)?;
        let basis = build_basis(tree, &ps, q);
        let coeffs = forward(&basis, &CoefficientVector::dirac(ps.values().to_vec()))?;
        let build = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let _ = compute_exponents(&basis, &coeffs, &SmoothnessOptions::default())?;
        let fit = t1.elapsed().as_secs_f64();
        println!("{n:>10}  {build:>10.3} s  {fit:>10.3} s");
        build_times.push(build);
        fit_times.push(fit);
    }
    let mut worst = 0.0f64;
    for w in 0..sizes.len() - 1 {
        let scale = sizes[w + 1] as f64 / sizes[w] as f64;
        // Normalize to a per-doubling factor for non-doubling ladders.
        let doublings = scale.log2();
        let rb = (build_times[w + 1] / build_times[w]).powf(1.0 / doublings);
        let rf = (fit_times[w + 1] / fit_times[w]).powf(1.0 / doublings);
        worst = worst.max(rb).max(rf);
    }
    println!("worst per-doubling growth factor: {worst:.2}");
    if worst > 2.5 {
        return Err(CliError::BenchFailed(format!(
            "per-doubling factor {worst:.2} > 2.5"
        )));
    }
    Ok(())
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}
