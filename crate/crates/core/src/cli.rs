//! Command-line front end.
//!
//! Exit status is 0 on success, 2 on user errors (bad flags, malformed or
//! mismatched files, invalid directions) and 3 when numerical failures exceed
//! the allowed budget.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::cylinder::{
    averaged_euler_characteristic, cylinders, open_orbit_energy_interval, zone_boundary_residual, CylinderConfig,
};
use crate::error::NtcError;
use crate::fractal::{box_count_series, fit_dimension, zone_size_series, DimensionEstimate, Method, Series};
use crate::models::{EnergySlice, FermiModel, ModelTag};
use crate::sweep::{
    extract_zones, render_ppm, sweep, symmetrize, zones_csv, Region, SweepConfig, ZoneMap, SMALL_ZONE_CELLS,
};
use crate::topology::{Classifier, Outcome};
use crate::torus::RationalDirection;
use crate::tracer::TracerConfig;

pub const EXIT_USER: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "ntc",
    version,
    about = "Stability zones of open orbits on periodic Fermi surfaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct SliceArgs {
    /// Model tag: `cos` or `pwq`.
    #[arg(long, default_value = "cos")]
    pub model: ModelTag,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub energy: f64,
    #[command(flatten)]
    pub tol: ToleranceArgs,
}

#[derive(Debug, Args, Clone)]
pub struct ToleranceArgs {
    /// Largest tracing step.
    #[arg(long, default_value_t = 1e-2)]
    pub max_step: f64,
    /// Smallest tracing step before a trace is abandoned.
    #[arg(long, default_value_t = 1e-11)]
    pub min_step: f64,
    /// Radius within which a separatrix returns to a saddle.
    #[arg(long, default_value_t = 5e-3)]
    pub capture_radius: f64,
    #[arg(long, default_value_t = 2_000_000)]
    pub step_cap: usize,
    /// Samples per branch of the critical point search.
    #[arg(long, default_value_t = 512)]
    pub seed_resolution: usize,
}

impl ToleranceArgs {
    fn tracer(&self) -> Result<TracerConfig, NtcError> {
        for (name, v) in [
            ("max-step", self.max_step),
            ("min-step", self.min_step),
            ("capture-radius", self.capture_radius),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(NtcError::Malformed(format!("--{name} must be positive")));
            }
        }
        if self.step_cap == 0 || self.seed_resolution < 2 {
            return Err(NtcError::Malformed(
                "--step-cap and --seed-resolution must be positive".into(),
            ));
        }
        Ok(TracerConfig {
            max_step: self.max_step,
            min_step: self.min_step,
            capture_radius: self.capture_radius,
            step_cap: self.step_cap,
            root_samples: self.seed_resolution,
            ..TracerConfig::default()
        })
    }
}

#[derive(Debug, Args, Clone)]
pub struct ChartArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,
    /// Denominator used to snap the chart point to a rational direction.
    #[arg(long, default_value_t = 1000)]
    pub resolution: i64,
}

impl ChartArgs {
    fn direction(&self) -> Result<RationalDirection, NtcError> {
        RationalDirection::from_chart(self.a, self.b, self.resolution)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the Miller index of one direction.
    Classify {
        #[command(flatten)]
        slice: SliceArgs,
        #[command(flatten)]
        chart: ChartArgs,
    },
    /// Classify every grid direction and write a zone map.
    Sweep {
        #[command(flatten)]
        slice: SliceArgs,
        #[arg(long = "N", default_value_t = 100)]
        n: usize,
        #[arg(long, default_value = "triangle")]
        region: Region,
        /// Worker threads; `NTC_WORKERS` takes precedence.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value = "zonemap.txt")]
        out: PathBuf,
        /// Resume from and periodically save to this file.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Largest tolerated fraction of numerically unlabeled cells.
        #[arg(long, default_value_t = 0.01)]
        max_failures: f64,
    },
    /// Zones of a map as CSV, largest first.
    Zones {
        #[arg(long, default_value = "zonemap.txt")]
        map: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dimension estimates of the unlabeled set.
    Dims {
        #[arg(long, default_value = "zonemap.txt")]
        map: PathBuf,
        /// `box`, `zonesize` or `both`.
        #[arg(long, default_value = "both")]
        method: String,
        /// Zones below this many cells count as unlabeled.
        #[arg(long, default_value_t = SMALL_ZONE_CELLS)]
        threshold: usize,
        /// Finest box level; defaults to `floor(log2 N)`.
        #[arg(long)]
        levels: Option<u32>,
        /// Ratio between consecutive zone-size bins.
        #[arg(long, default_value_t = 2.0)]
        ratio: f64,
        #[arg(long)]
        discard_low: Option<usize>,
        #[arg(long)]
        discard_high: Option<usize>,
    },
    /// Boundary-curve residual for a cylinder triple at zero energy.
    Boundary {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        /// Cylinder triple `l m n`.
        #[arg(long, num_args = 3, allow_negative_numbers = true, required = true)]
        lmn: Vec<i64>,
    },
    /// Averaged Euler characteristic of a direction.
    Euler {
        #[command(flatten)]
        slice: SliceArgs,
        #[command(flatten)]
        chart: ChartArgs,
    },
    /// Cylinders of closed orbits of a direction, one line each.
    Cylinder {
        #[command(flatten)]
        slice: SliceArgs,
        #[command(flatten)]
        chart: ChartArgs,
    },
    /// Render a map as a binary PPM.
    Render {
        #[arg(long, default_value = "zonemap.txt")]
        map: PathBuf,
        #[arg(long, default_value = "zonemap.ppm")]
        out: PathBuf,
        #[arg(long, default_value_t = SMALL_ZONE_CELLS)]
        threshold: usize,
    },
    /// Upper end of the energy interval on which a direction keeps its label.
    Interval {
        #[arg(long, default_value = "cos")]
        model: ModelTag,
        #[command(flatten)]
        chart: ChartArgs,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[command(flatten)]
        tol_args: ToleranceArgs,
    },
}

/// Failures mapped to exit codes.
enum Failure {
    User(String),
    Numerical(String),
}

impl From<NtcError> for Failure {
    fn from(e: NtcError) -> Self {
        match e {
            NtcError::UnknownModel(_)
            | NtcError::CriticalEnergy(_)
            | NtcError::InvalidDirection(_)
            | NtcError::ResumeMismatch(_)
            | NtcError::Malformed(_)
            | NtcError::Io(_) => Failure::User(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::User(e.to_string())
    }
}

fn worker_count(flag: Option<usize>) -> Result<usize, Failure> {
    if let Ok(v) = std::env::var("NTC_WORKERS") {
        return match v.trim().parse::<usize>() {
            Ok(w) if w >= 1 => Ok(w),
            _ => Err(Failure::User(format!("NTC_WORKERS={v} is not a positive integer"))),
        };
    }
    match flag {
        Some(0) => Err(Failure::User("--workers must be at least 1".into())),
        Some(w) => Ok(w),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn slice_of(args: &SliceArgs) -> Result<EnergySlice, Failure> {
    Ok(EnergySlice::new(FermiModel::from_tag(args.model), args.energy)?)
}

fn square_map(path: &Path) -> Result<ZoneMap, Failure> {
    let map = ZoneMap::load(path)?;
    Ok(match map.region {
        Region::Triangle => symmetrize(&map),
        Region::Square => map,
    })
}

fn write_output(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn dims_lines(series: &Series, fit: Result<DimensionEstimate, NtcError>) -> String {
    let name = series.method.as_str();
    let mut s = String::new();
    for &(n, c) in &series.points {
        s.push_str(&format!("series,{name},{n},{c}\n"));
    }
    match fit {
        Ok(d) => s.push_str(&format!(
            "fit,{name},{},{},{},{},{},{}\n",
            d.used_range.0, d.used_range.1, d.slope, d.intercept, d.rms, d.dimension
        )),
        Err(e) => s.push_str(&format!("fit,{name},none,{e}\n")),
    }
    s
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Classify { slice, chart } => {
            let dir = chart.direction()?;
            let classifier =
                Classifier::new(slice_of(&slice)?, slice.tol.tracer()?).with_probe_resolution(chart.resolution);
            match classifier.classify(&dir).outcome {
                Outcome::Labeled(l) => writeln!(stdout, "{l}")?,
                Outcome::Topological => writeln!(stdout, "unlabeled")?,
                Outcome::Numerical(msg) => return Err(Failure::Numerical(msg)),
            }
        }
        Command::Sweep {
            slice,
            n,
            region,
            workers,
            out,
            checkpoint,
            max_failures,
        } => {
            if n < 2 {
                return Err(Failure::User("--N must be at least 2".into()));
            }
            let cfg = SweepConfig {
                model: slice.model,
                energy: slice.energy,
                n,
                region,
                workers: worker_count(workers)?,
                tracer: slice.tol.tracer()?,
            };
            slice_of(&slice)?;
            let map = sweep(&cfg, checkpoint.as_deref())?;
            map.save(&out)?;
            let cells = (1..=n)
                .flat_map(|k| (1..=n).map(move |m| (m, k)))
                .filter(|&(m, k)| region.contains(m, k))
                .count();
            let failed = map.unlabeled_numerical as f64 / cells as f64;
            writeln!(
                stdout,
                "labeled {} topological {} numerical {}",
                map.labeled().count(),
                map.unlabeled_topological,
                map.unlabeled_numerical
            )?;
            if failed > max_failures {
                return Err(Failure::Numerical(format!(
                    "numerical failures {failed:.4} exceed {max_failures}"
                )));
            }
        }
        Command::Zones { map, out } => {
            let zones = extract_zones(&square_map(&map)?);
            write_output(out.as_deref(), &zones_csv(&zones), stdout)?;
        }
        Command::Dims {
            map,
            method,
            threshold,
            levels,
            ratio,
            discard_low,
            discard_high,
        } => {
            let methods = match method.as_str() {
                "box" => vec![Method::BoxCount],
                "zonesize" => vec![Method::ZoneSize],
                "both" => vec![Method::BoxCount, Method::ZoneSize],
                other => return Err(Failure::User(format!("unknown method {other}"))),
            };
            if ratio.is_nan() || ratio <= 1.0 {
                return Err(Failure::User("--ratio must exceed 1".into()));
            }
            let map = square_map(&map)?;
            let levels = levels.unwrap_or((map.n as f64).log2().floor() as u32);
            let mut text = String::new();
            for m in methods {
                let series = match m {
                    Method::BoxCount => box_count_series(&map, threshold, levels),
                    Method::ZoneSize => zone_size_series(&extract_zones(&map), ratio),
                };
                let (lo, hi) = m.default_discards();
                let fit = fit_dimension(&series, discard_low.unwrap_or(lo), discard_high.unwrap_or(hi));
                text.push_str(&dims_lines(&series, fit));
            }
            stdout.write_all(text.as_bytes())?;
        }
        Command::Boundary { a, b, lmn } => {
            let r = zone_boundary_residual(a, b, [lmn[0], lmn[1], lmn[2]])?;
            writeln!(stdout, "{r}")?;
        }
        Command::Euler { slice, chart } => {
            let dir = chart.direction()?;
            let cfg = CylinderConfig {
                tracer: slice.tol.tracer()?,
                ..CylinderConfig::default()
            };
            let chi = averaged_euler_characteristic(&slice_of(&slice)?, &dir, &cfg)?;
            writeln!(stdout, "{chi}")?;
        }
        Command::Cylinder { slice, chart } => {
            let dir = chart.direction()?;
            let cfg = CylinderConfig {
                tracer: slice.tol.tracer()?,
                ..CylinderConfig::default()
            };
            for c in cylinders(&slice_of(&slice)?, &dir, &cfg)? {
                let p = c.base.position;
                let [l, m, n] = c.translation;
                writeln!(
                    stdout,
                    "base {:.9} {:.9} {:.9} opposite {} translation {l} {m} {n} height {:.9} sign {:?}",
                    p.x, p.y, p.z, c.opposite_id, c.height, c.sign
                )?;
            }
        }
        Command::Render { map, out, threshold } => {
            let map = square_map(&map)?;
            fs::write(out, render_ppm(&map, threshold))?;
        }
        Command::Interval {
            model,
            chart,
            tol,
            tol_args,
        } => {
            if tol.is_nan() || tol <= 0.0 {
                return Err(Failure::User("--tol must be positive".into()));
            }
            let dir = chart.direction()?;
            let e = open_orbit_energy_interval(&FermiModel::from_tag(model), &dir, tol, &tol_args.tracer()?);
            writeln!(stdout, "{e}")?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit status. Diagnostics go to stderr.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USER } else { 0 };
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(Failure::User(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USER
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            EXIT_NUMERICAL
        }
    }
}
