//! Batch analysis of a range of grid intervals.
//!
//! Rows are computed by a pool of workers and written in index order to an
//! append-only CSV file, which doubles as the checkpoint: rerunning a sweep
//! over the same file picks up after the last complete row.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::ops::Range;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Instant;

use crossbeam_channel::{bounded, unbounded};

use crate::error::{Error, Result};
use crate::expansivity::{analyze, Analysis, AnalysisConfig, Status};
use crate::partition::subdivide_parameters;
use crate::scalar::Scalar;

pub const RESULTS_HEADER: &str =
    "index,a_lo_hex,a_hi_hex,status,delta_hex,lambda_hex,delta_dec,lambda_dec,k_coarse,k_fine,elapsed_ms";

pub const DEFAULT_N: usize = 60_000;

#[derive(Clone, Debug)]
pub struct SweepConfig<T> {
    pub a_min: T,
    pub a_max: T,
    pub n: usize,
    pub indices: Range<usize>,
    pub analysis: AnalysisConfig<T>,
    pub workers: usize,
    pub output: PathBuf,
    /// Rows between flushes of the results file.
    pub checkpoint_every: usize,
    /// Record wall-clock time per row. Off by default so that results files
    /// are reproducible byte for byte.
    pub record_timing: bool,
}

impl<T: Scalar> SweepConfig<T> {
    /// Defaults for the full grid of `[1.4, 2]`, writing to `output`.
    pub fn new(output: impl Into<PathBuf>) -> Self {
        Self {
            a_min: T::parse_literal("1.4").unwrap(),
            a_max: T::two(),
            n: DEFAULT_N,
            indices: 0..DEFAULT_N,
            analysis: AnalysisConfig::default(),
            workers: 1,
            output: output.into(),
            checkpoint_every: 1,
            record_timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.analysis.validate()?;
        if self.indices.start >= self.indices.end || self.indices.end > self.n {
            return Err(Error::InvalidConfig(format!(
                "index range {}..{} must be nonempty and within 0..{}",
                self.indices.start, self.indices.end, self.n
            )));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("need at least one worker".into()));
        }
        if self.checkpoint_every == 0 {
            return Err(Error::InvalidConfig("checkpoint interval must be positive".into()));
        }
        Ok(())
    }
}

fn opt_hex<T: Scalar>(v: Option<T>) -> String {
    v.map(Scalar::to_hex).unwrap_or_default()
}

fn opt_dec<T: Scalar>(v: Option<T>) -> String {
    v.map(|x| format!("{:.16e}", x.to_f64_exact())).unwrap_or_default()
}

/// One results-file line, without the trailing newline.
pub fn format_row<T: Scalar>(r: &Analysis<T>, record_timing: bool) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        r.index,
        r.a_lo.to_hex(),
        r.a_hi.to_hex(),
        r.status,
        opt_hex(r.delta_bar),
        opt_hex(r.lambda_bar),
        opt_dec(r.delta_bar),
        opt_dec(r.lambda_bar),
        r.k_coarse,
        r.k_fine,
        if record_timing { r.elapsed_millis.to_string() } else { String::new() },
    )
}

/// Parses one results-file line. Decimal columns are ignored in favor of
/// the exact hex columns.
pub fn parse_row<T: Scalar>(line: &str) -> std::result::Result<Analysis<T>, String> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 11 {
        return Err(format!("expected 11 fields, found {}", fields.len()));
    }
    let int = |i: usize, name: &str| fields[i].parse::<usize>().map_err(|_| format!("bad {name} {:?}", fields[i]));
    let num = |i: usize, name: &str| T::parse_literal(fields[i]).ok_or_else(|| format!("bad {name} {:?}", fields[i]));
    let opt = |i: usize, name: &str| if fields[i].is_empty() { Ok(None) } else { num(i, name).map(Some) };
    let status: Status = fields[3].parse().map_err(|_| format!("unknown status {:?}", fields[3]))?;
    let elapsed_millis = if fields[10].is_empty() {
        0
    } else {
        fields[10].parse().map_err(|_| format!("bad elapsed_ms {:?}", fields[10]))?
    };
    let row = Analysis {
        index: int(0, "index")?,
        a_lo: num(1, "a_lo_hex")?,
        a_hi: num(2, "a_hi_hex")?,
        status,
        delta_bar: opt(4, "delta_hex")?,
        lambda_bar: opt(5, "lambda_hex")?,
        k_coarse: int(8, "k_coarse")?,
        k_fine: int(9, "k_fine")?,
        elapsed_millis,
    };
    if status == Status::Success && (row.delta_bar.is_none() || row.lambda_bar.is_none()) {
        return Err("SUCCESS row without delta and lambda".into());
    }
    Ok(row)
}

/// Reads every row of a results file.
pub fn read_results<T: Scalar>(path: &Path) -> Result<Vec<Analysis<T>>> {
    let name = path.display().to_string();
    let reader = BufReader::new(File::open(path)?);
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let err = |msg: String| Error::Parse { path: name.clone(), line: i + 1, msg };
        if i == 0 {
            if line != RESULTS_HEADER {
                return Err(err("missing or unexpected header".into()));
            }
            continue;
        }
        rows.push(parse_row(&line).map_err(err)?);
    }
    Ok(rows)
}

/// Counts of each status in a sweep.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SweepSummary {
    /// Rows already present when the sweep started.
    pub resumed: usize,
    pub computed: usize,
    pub by_status: BTreeMap<String, usize>,
}

/// Prepares the results file for appending and returns the first index
/// still to compute.
///
/// A trailing partial line (from an interrupted write) is cut off. Existing
/// rows must form a prefix of the requested range computed with the same
/// grid and resolutions.
fn open_for_resume<T: Scalar>(cfg: &SweepConfig<T>, grid: &crate::partition::ParamGrid<T>) -> Result<(File, usize)> {
    let path = &cfg.output;
    let name = path.display().to_string();
    let mut file = OpenOptions::new().read(true).write(true).create(true).truncate(false).open(path)?;
    let mut text = String::new();
    file.read_to_string(&mut text)?;
    if text.is_empty() {
        writeln!(file, "{RESULTS_HEADER}")?;
        return Ok((file, cfg.indices.start));
    }
    let complete = text.rfind('\n').map_or(0, |i| i + 1);
    let mut next = cfg.indices.start;
    for (i, line) in text[..complete].lines().enumerate() {
        let err = |msg: String| Error::Parse { path: name.clone(), line: i + 1, msg };
        if i == 0 {
            if line != RESULTS_HEADER {
                return Err(err("existing file does not start with the results header".into()));
            }
            continue;
        }
        let row: Analysis<T> = parse_row(line).map_err(err)?;
        if row.index != next || next >= cfg.indices.end {
            return Err(err(format!("expected row for index {next}, found {}", row.index)));
        }
        let omega = grid.interval(next)?;
        if row.a_lo != omega.lo() || row.a_hi != omega.hi() {
            return Err(err(format!("row {next} was computed for a different parameter grid")));
        }
        if row.k_coarse != cfg.analysis.k_coarse || row.k_fine != cfg.analysis.k_fine {
            return Err(err(format!("row {next} was computed with different partition sizes")));
        }
        next += 1;
    }
    if complete == 0 {
        // not even a full header line
        file.set_len(0)?;
        file.seek(SeekFrom::Start(0))?;
        writeln!(file, "{RESULTS_HEADER}")?;
    } else {
        file.set_len(complete as u64)?;
        file.seek(SeekFrom::End(0))?;
    }
    Ok((file, next))
}

fn analyze_guarded<T: Scalar>(
    grid: &crate::partition::ParamGrid<T>,
    index: usize,
    cfg: &AnalysisConfig<T>,
) -> Analysis<T> {
    let start = Instant::now();
    let Ok(omega) = grid.interval(index) else {
        unreachable!("index validated against the grid");
    };
    match panic::catch_unwind(AssertUnwindSafe(|| analyze(&omega, cfg))) {
        Ok(Ok(row)) => row,
        Ok(Err(_)) | Err(_) => Analysis::failed(&omega, cfg, start.elapsed().as_millis() as u64),
    }
}

/// Runs (or resumes) a sweep. The results file holds one row per index in
/// `cfg.indices`, in order, independent of the worker count.
pub fn run_sweep<T: Scalar>(cfg: &SweepConfig<T>) -> Result<SweepSummary> {
    cfg.validate()?;
    let grid = subdivide_parameters(cfg.a_min, cfg.a_max, cfg.n)?;
    let (file, first) = open_for_resume(cfg, &grid)?;
    let mut out = BufWriter::new(file);
    let mut summary = SweepSummary { resumed: first - cfg.indices.start, ..SweepSummary::default() };
    let todo = first..cfg.indices.end;
    if todo.is_empty() {
        return Ok(summary);
    }

    // bounds the reorder buffer
    let window = cfg.workers * 4;
    let (job_tx, job_rx) = bounded::<usize>(window);
    let (row_tx, row_rx) = unbounded::<Analysis<T>>();
    let grid = &grid;
    let analysis = &cfg.analysis;

    std::thread::scope(|scope| -> Result<()> {
        for _ in 0..cfg.workers {
            let job_rx = job_rx.clone();
            let row_tx = row_tx.clone();
            scope.spawn(move || {
                for index in job_rx {
                    if row_tx.send(analyze_guarded(grid, index, analysis)).is_err() {
                        break;
                    }
                }
            });
        }
        drop(job_rx);
        drop(row_tx);

        let mut next_job = todo.start;
        let mut next_write = todo.start;
        let mut pending: BTreeMap<usize, Analysis<T>> = BTreeMap::new();
        let mut since_flush = 0;
        while next_write < todo.end {
            while next_job < todo.end && next_job < next_write + window && job_tx.try_send(next_job).is_ok() {
                next_job += 1;
            }
            let row = row_rx.recv().map_err(|_| Error::Io("all sweep workers exited".into()))?;
            pending.insert(row.index, row);
            while let Some(row) = pending.remove(&next_write) {
                writeln!(out, "{}", format_row(&row, cfg.record_timing))?;
                *summary.by_status.entry(row.status.token().to_string()).or_default() += 1;
                summary.computed += 1;
                next_write += 1;
                since_flush += 1;
                if since_flush >= cfg.checkpoint_every {
                    out.flush()?;
                    since_flush = 0;
                }
            }
        }
        drop(job_tx);
        Ok(())
    })?;
    out.flush()?;
    Ok(summary)
}

/// File names written by [`emit_plot_data`].
pub const PLOT_FILES: [&str; 4] = ["delta_vs_a.dat", "lambda_vs_a.dat", "lambda_vs_delta.dat", "delta_lambda_vs_a.dat"];

/// Writes whitespace-separated plot data for the SUCCESS rows of a results
/// file into `dir`: `(a_mid, delta)`, `(a_mid, lambda)`, `(delta, lambda)`
/// and `(a_mid, delta, lambda)`. Returns the written paths.
pub fn emit_plot_data(results: &Path, dir: &Path) -> Result<Vec<PathBuf>> {
    let rows: Vec<Analysis<f64>> = read_results(results)?;
    let mut text: [String; 4] = Default::default();
    for r in rows.iter().filter(|r| r.status == Status::Success) {
        let a_mid = r.a_lo + (r.a_hi - r.a_lo) / 2.0;
        let (d, l) = (r.delta_bar.unwrap(), r.lambda_bar.unwrap());
        text[0].push_str(&format!("{a_mid:.16e} {d:.16e}\n"));
        text[1].push_str(&format!("{a_mid:.16e} {l:.16e}\n"));
        text[2].push_str(&format!("{d:.16e} {l:.16e}\n"));
        text[3].push_str(&format!("{a_mid:.16e} {d:.16e} {l:.16e}\n"));
    }
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(4);
    for (name, body) in PLOT_FILES.iter().zip(&text) {
        let p = dir.join(name);
        std::fs::write(&p, body)?;
        paths.push(p);
    }
    Ok(paths)
}
