use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use critexp::digraph::{
    brute_force_cycle_mean, build_representation, min_cycle_mean_karp, min_cycle_mean_lowmem, CycleMeanResult,
    Digraph, LowMemOptions,
};
use critexp::expansivity::{
    analyze, delta_bound, lambda_bound_with, AnalysisConfig, DeltaBound, LambdaBound, DEFAULT_BISECTION_STEPS,
    DEFAULT_K_COARSE, DEFAULT_K_FINE,
};
use critexp::family::ParamInterval;
use critexp::partition::{phase_partition_with, subdivide_parameters, Spacing};
use critexp::rigor::repr;
use critexp::sweep::{emit_plot_data, format_row, run_sweep, SweepConfig, DEFAULT_N, RESULTS_HEADER};
use critexp::{Error, Scalar};

/// Certified expansivity bounds for the quadratic family a - x^2.
#[derive(Parser, Debug)]
#[command(name = "critexp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analyze one parameter interval and print its result row.
    Analyze(AnalyzeArgs),
    /// Analyze a range of grid intervals into a resumable results file.
    Sweep(SweepArgs),
    /// Exponent bound for a fixed interval, radius and partition size.
    Lambda(FixedArgs),
    /// Print the partition breakpoints as hex floats, one per line.
    Partition(FixedArgs),
    /// Print the representation graph in dump format.
    Graph(FixedArgs),
    /// Minimum cycle mean of a graph dump file.
    Mincyclemean(CycleArgs),
    /// Write plot data files from a results file.
    Plotdata(PlotArgs),
    /// Exponent bound for several partition sizes at one radius.
    Kstudy(KstudyArgs),
}

fn num(s: &str) -> Result<f64, String> {
    repr::<f64>(s.trim()).map_err(|e| e.to_string())
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SpacingArg {
    Adapted,
    Geometric,
}

impl From<SpacingArg> for Spacing {
    fn from(s: SpacingArg) -> Self {
        match s {
            SpacingArg::Adapted => Spacing::Adapted,
            SpacingArg::Geometric => Spacing::Geometric,
        }
    }
}

#[derive(Args, Debug)]
struct RangeArgs {
    /// Lower parameter endpoint (decimal or hex float).
    #[arg(long, value_parser = num, requires = "a_hi", conflicts_with_all = ["index", "n"])]
    a_lo: Option<f64>,
    #[arg(long, value_parser = num, requires = "a_lo")]
    a_hi: Option<f64>,
    /// Grid interval index; the grid is given by --n, --a-min, --a-max.
    #[arg(long, requires = "n")]
    index: Option<usize>,
    #[arg(long, requires = "index")]
    n: Option<usize>,
    #[arg(long, value_parser = num, default_value = "1.4")]
    a_min: f64,
    #[arg(long, value_parser = num, default_value = "2")]
    a_max: f64,
}

impl RangeArgs {
    fn interval(&self) -> Result<ParamInterval<f64>, Failure> {
        match (self.a_lo, self.a_hi, self.index, self.n) {
            (Some(lo), Some(hi), None, None) => Ok(ParamInterval::new(0, lo, hi).map_err(Failure::usage)?),
            (None, None, Some(i), Some(n)) => {
                Ok(subdivide_parameters(self.a_min, self.a_max, n).and_then(|g| g.interval(i)).map_err(Failure::usage)?)
            }
            _ => Err(Failure::Usage("give either --a-lo and --a-hi, or --index and --n".into())),
        }
    }
}

#[derive(Args, Debug)]
struct ResolutionArgs {
    #[arg(long, default_value_t = DEFAULT_K_FINE)]
    k_fine: usize,
    #[arg(long, default_value_t = DEFAULT_K_COARSE)]
    k_coarse: usize,
    #[arg(long, value_parser = num, default_value = "0.001")]
    delta0: f64,
    /// Bisection steps for the radius.
    #[arg(long, default_value_t = DEFAULT_BISECTION_STEPS)]
    steps: usize,
    #[arg(long, value_enum, default_value = "adapted")]
    spacing: SpacingArg,
}

impl ResolutionArgs {
    fn config(&self) -> Result<AnalysisConfig<f64>, Failure> {
        let cfg = AnalysisConfig {
            delta0: self.delta0,
            bisection_steps: self.steps,
            k_coarse: self.k_coarse,
            k_fine: self.k_fine,
            spacing: self.spacing.into(),
        };
        cfg.validate().map_err(Failure::usage)?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    range: RangeArgs,
    #[command(flatten)]
    resolution: ResolutionArgs,
    /// Print the CSV header before the row.
    #[arg(long)]
    header: bool,
    /// Fill in the elapsed_ms column.
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Results file; an existing file is resumed.
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long, default_value_t = DEFAULT_N)]
    n: usize,
    #[arg(long, value_parser = num, default_value = "1.4")]
    a_min: f64,
    #[arg(long, value_parser = num, default_value = "2")]
    a_max: f64,
    /// First grid index (inclusive).
    #[arg(long, default_value_t = 0)]
    first: usize,
    /// Last grid index (exclusive); defaults to N.
    #[arg(long)]
    last: Option<usize>,
    #[command(flatten)]
    resolution: ResolutionArgs,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Rows between flushes of the results file.
    #[arg(long, default_value_t = 1)]
    checkpoint_every: usize,
    /// Fill in the elapsed_ms column (makes the file run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct FixedArgs {
    #[command(flatten)]
    range: RangeArgs,
    /// Radius of the critical neighborhood.
    #[arg(long, value_parser = num)]
    delta: f64,
    /// Number of partition cells (even).
    #[arg(long, short)]
    k: usize,
    #[arg(long, value_enum, default_value = "adapted")]
    spacing: SpacingArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Algorithm {
    Lowmem,
    Karp,
    Brute,
}

#[derive(Args, Debug)]
struct CycleArgs {
    /// Graph dump file.
    file: PathBuf,
    #[arg(long, value_enum, default_value = "lowmem")]
    algorithm: Algorithm,
}

#[derive(Args, Debug)]
struct PlotArgs {
    /// Results file written by `sweep`.
    results: PathBuf,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct KstudyArgs {
    #[command(flatten)]
    range: RangeArgs,
    /// Comma-separated partition sizes.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    k_list: Vec<usize>,
    /// Radius to use; defaults to the radius found by `analyze`.
    #[arg(long, value_parser = num)]
    delta: Option<f64>,
    #[command(flatten)]
    resolution: ResolutionArgs,
}

enum Failure {
    /// Invalid invocation: exit status 2.
    Usage(String),
    /// Failed computation or I/O: exit status 1.
    Runtime(String),
}

impl Failure {
    fn usage(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameters { .. } | Error::InvalidConfig(_) | Error::InvalidPartition(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn print_value(out: &mut impl Write, name: &str, v: f64) -> io::Result<()> {
    writeln!(out, "{name} {} {:.16e}", v.to_hex(), v)
}

fn print_cycle_mean(out: &mut impl Write, r: &CycleMeanResult<f64>) -> io::Result<()> {
    match r.value {
        None => writeln!(out, "ACYCLIC"),
        Some(v) => {
            print_value(out, "mean", v)?;
            if let Some(c) = &r.cycle {
                let verts: Vec<String> = c.iter().map(usize::to_string).collect();
                writeln!(out, "cycle {}", verts.join(" "))?;
            }
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Analyze(a) => {
            let omega = a.range.interval()?;
            let cfg = a.resolution.config()?;
            let row = analyze(&omega, &cfg)?;
            if a.header {
                writeln!(out, "{RESULTS_HEADER}")?;
            }
            writeln!(out, "{}", format_row(&row, a.timing))?;
            Ok(if row.status.is_certified() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Sweep(s) => {
            let analysis = s.resolution.config()?;
            let cfg = SweepConfig {
                a_min: s.a_min,
                a_max: s.a_max,
                n: s.n,
                indices: s.first..s.last.unwrap_or(s.n),
                analysis,
                workers: s.workers,
                output: s.output,
                checkpoint_every: s.checkpoint_every,
                record_timing: s.timing,
            };
            cfg.validate().map_err(Failure::usage)?;
            let summary = run_sweep(&cfg)?;
            eprintln!("resumed {} rows, computed {}", summary.resumed, summary.computed);
            for (status, count) in &summary.by_status {
                eprintln!("  {status}: {count}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Lambda(f) => {
            let omega = f.range.interval()?;
            match lambda_bound_with(&omega, f.delta, f.k, f.spacing.into(), &LowMemOptions::default())? {
                LambdaBound::Acyclic => writeln!(out, "ACYCLIC")?,
                LambdaBound::Value(v) => print_value(&mut out, "lambda", v)?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Partition(f) => {
            let omega = f.range.interval()?;
            let part = phase_partition_with(&omega, f.delta, f.k, f.spacing.into())?;
            for b in part.breakpoints() {
                writeln!(out, "{}", b.to_hex())?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Graph(f) => {
            let omega = f.range.interval()?;
            let part = phase_partition_with(&omega, f.delta, f.k, f.spacing.into())?;
            out.write_all(build_representation(&omega, &part)?.dump().as_bytes())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Mincyclemean(c) => {
            let name = c.file.display().to_string();
            let file = File::open(&c.file).map_err(|e| Failure::Runtime(format!("{name}: {e}")))?;
            let g: Digraph<f64> = Digraph::parse_dump(BufReader::new(file), &name)?;
            let r = match c.algorithm {
                Algorithm::Lowmem => min_cycle_mean_lowmem(&g, &LowMemOptions::default()),
                Algorithm::Karp => min_cycle_mean_karp(&g),
                Algorithm::Brute => brute_force_cycle_mean(&g).map_err(Failure::usage)?,
            };
            print_cycle_mean(&mut out, &r)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Plotdata(p) => {
            for path in emit_plot_data(&p.results, &p.out_dir)? {
                eprintln!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Kstudy(k) => {
            let omega = k.range.interval()?;
            let cfg = k.resolution.config()?;
            if let Some(&bad) = k.k_list.iter().find(|&&x| x < 2 || x % 2 != 0) {
                return Err(Failure::Usage(format!("partition sizes must be even and >= 2, got {bad}")));
            }
            let delta = match k.delta {
                Some(d) => d,
                None => match delta_bound(&omega, &cfg)? {
                    DeltaBound::Certified { delta, .. } => delta,
                    DeltaBound::NoExpansion { lambda } => {
                        eprintln!("no expansion at delta0 (coarse bound {lambda:e})");
                        return Ok(ExitCode::from(1));
                    }
                },
            };
            eprintln!("delta {} ({delta:e})", delta.to_hex());
            writeln!(out, "k,lambda_hex,lambda_dec,elapsed_ms")?;
            for &kk in &k.k_list {
                let start = Instant::now();
                let bound = lambda_bound_with(&omega, delta, kk, cfg.spacing, &LowMemOptions::default())?;
                let ms = start.elapsed().as_millis();
                match bound {
                    LambdaBound::Value(v) => writeln!(out, "{kk},{},{v:.16e},{ms}", v.to_hex())?,
                    LambdaBound::Acyclic => writeln!(out, "{kk},ACYCLIC,,{ms}")?,
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if !matches!(cli.command, Command::Sweep(_)) {
        // other subcommands run on one thread
        rayon::ThreadPoolBuilder::new().num_threads(1).build_global().ok();
    }
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("critexp: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("critexp: {msg}");
            ExitCode::from(1)
        }
    }
}
