//! Subcommand implementations. Every artifact write goes through a `Timer`
//! so a manifest lands beside it.

use crate::manifest::{fnv1a, Timer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use serde_json::json;
use std::fmt::Write as _;
use std::path::Path;
use windtree_core::analysis::{fit_exponent, DiffusionSeries, SeriesKind};
use windtree_core::billiard::{
    advance, estimate_diffusion_exponents, AdvanceOptions, BilliardState, Dir, Sample, Table,
    WindTreeParams,
};
use windtree_core::deffile::IetDefinition;
use windtree_core::iet::Cocycle;
use windtree_core::renorm::{lyapunov_ratio, ZipperedRectangles};
use windtree_core::{AnalysisError, BilliardError, IetError};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Insufficient(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Insufficient(_) => 3,
            CliError::Internal(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Insufficient(m) => write!(f, "insufficient data: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<BilliardError> for CliError {
    fn from(e: BilliardError) -> Self {
        match e {
            BilliardError::OutOfDomain { .. } => CliError::Config(e.to_string()),
            BilliardError::InsufficientData { .. } => CliError::Insufficient(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<IetError> for CliError {
    fn from(e: IetError) -> Self {
        match e {
            IetError::BadData(_) | IetError::Reducible { .. } | IetError::NonPositiveLength { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::InsufficientData { .. } => CliError::Insufficient(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn table_for(a: f64, b: f64, free: bool) -> Result<Table, CliError> {
    if free {
        Ok(Table::Free)
    } else {
        Ok(Table::WindTree(WindTreeParams::new(a, b)?))
    }
}

/// Deterministic per-direction trajectory start, matching the convention of
/// the core estimator: random angle in (0, pi/2), start point outside the
/// obstacle, random sign pattern.
fn random_start(rng: &mut ChaCha12Rng, table: &Table, theta: Option<f64>) -> BilliardState {
    let theta =
        theta.unwrap_or_else(|| rng.gen_range(1e-9..std::f64::consts::FRAC_PI_2 - 1e-9));
    let frac = loop {
        let fx: f64 = rng.gen();
        let fy: f64 = rng.gen();
        match table.params() {
            Some(p) if p.inside_obstacle(fx, fy) => continue,
            _ => break (fx, fy),
        }
    };
    let dir = match rng.gen_range(0..4) {
        0 => Dir::PP,
        1 => Dir::PM,
        2 => Dir::MP,
        _ => Dir::MM,
    };
    BilliardState::new((0, 0), frac, dir, theta)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[allow(clippy::too_many_arguments)]
pub fn simulate(
    a: f64,
    b: f64,
    free: bool,
    theta: Option<f64>,
    n_directions: Option<usize>,
    t_max: f64,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    if theta.is_none() && n_directions.is_none() {
        return Err(CliError::Config("pass either --theta or --n-directions".into()));
    }
    if let Some(th) = theta {
        if !(th > 0.0 && th < std::f64::consts::FRAC_PI_2) {
            return Err(CliError::Config(format!("theta {th} outside (0, pi/2)")));
        }
    }
    if !(t_max > 1.0) {
        return Err(CliError::Config(format!("t_max {t_max} must exceed the grid origin")));
    }
    let timer = Timer::start();
    let table = table_for(a, b, free)?;
    let opts = AdvanceOptions::default();
    let n = n_directions.unwrap_or(1);

    // per-trajectory samples share the geometric grid, so medians are taken
    // pointwise per grid slot
    let mut all: Vec<Vec<Sample>> = Vec::new();
    let mut resamples = 0u64;
    for index in 0..n {
        let mut accepted = None;
        for attempt in 0..16u64 {
            let mut rng = ChaCha12Rng::seed_from_u64(
                seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
                    ^ attempt.wrapping_mul(0xbf58_476d_1ce4_e5b9),
            );
            let start = random_start(&mut rng, &table, theta);
            match advance(&start, &table, t_max, &opts) {
                Ok(stats) => {
                    accepted = Some(stats.samples);
                    break;
                }
                Err(BilliardError::SingularTrajectory { .. })
                | Err(BilliardError::NumericalDegeneracy { .. }) => {
                    resamples += 1;
                    continue;
                }
                Err(e) => return Err(e.into()),
            }
        }
        match accepted {
            Some(s) => all.push(s),
            None => {
                return Err(CliError::Insufficient(format!(
                    "direction {index} stayed singular after 16 attempts"
                )))
            }
        }
    }
    let slots = all.iter().map(Vec::len).min().unwrap_or(0);
    let mut csv = String::from("t,d_now,d_max,avg_d\n");
    for k in 0..slots {
        let t = all[0][k].t;
        let mut d_now: Vec<f64> = all.iter().map(|s| s[k].d_now).collect();
        let mut d_max: Vec<f64> = all.iter().map(|s| s[k].d_max).collect();
        let mut avg_d: Vec<f64> = all.iter().map(|s| s[k].avg_d).collect();
        writeln!(
            csv,
            "{:?},{:?},{:?},{:?}",
            t,
            median(&mut d_now),
            median(&mut d_max),
            median(&mut avg_d)
        )
        .unwrap();
    }
    std::fs::write(out, csv)?;
    timer.finish(
        out,
        "simulate",
        json!({
            "a": a, "b": b, "free": free, "theta": theta,
            "n_directions": n_directions, "t_max": t_max,
            "grid": {"t0": 1.0, "ratio": 1.05},
            "singular_resamples": resamples,
        }),
        seed,
    )?;
    Ok(())
}

pub fn iet_run(def_path: &Path, x: f64, n: u64, out: &Path) -> Result<(), CliError> {
    let timer = Timer::start();
    let bytes = std::fs::read(def_path)
        .map_err(|e| CliError::Config(format!("{}: {e}", def_path.display())))?;
    let def = IetDefinition::from_str(
        std::str::from_utf8(&bytes).map_err(|e| CliError::Config(e.to_string()))?,
    )?;
    let iet = def.iet_f64();
    let cocycle = def.cocycle.clone().unwrap_or_else(|| Cocycle::ones(iet.k()));
    if !(x >= 0.0 && x < *iet.total()) {
        return Err(CliError::Config(format!("x {x} outside [0, {})", iet.total())));
    }

    let mut csv = String::from("n");
    for name in iet.alphabet() {
        write!(csv, ",count_{name}").unwrap();
    }
    for i in 0..cocycle.d {
        write!(csv, ",pairing_{i}").unwrap();
    }
    csv.push_str(",pairing_abs,sum_abs\n");

    let mut stream = iet.return_cycles(x, &cocycle);
    let mut sum_abs: i128 = 0;
    let mut next_record = 1u64;
    let mut emitted = 0u64;
    for _ in 0..n {
        let step = match stream.step() {
            Ok(s) => s,
            Err(e) => {
                return Err(CliError::Internal(format!(
                    "orbit terminated early: {e} (emitted {emitted} rows)"
                )))
            }
        };
        let abs = step.pairing.iter().map(|p| p.unsigned_abs()).max().unwrap_or(0);
        sum_abs += abs as i128;
        if step.n >= next_record || step.n == n {
            write!(csv, "{}", step.n).unwrap();
            for &c in stream.counts() {
                write!(csv, ",{c}").unwrap();
            }
            for &p in &step.pairing {
                write!(csv, ",{p}").unwrap();
            }
            writeln!(csv, ",{abs},{sum_abs}").unwrap();
            emitted += 1;
            let next = (next_record as f64 * 1.05).ceil() as u64;
            next_record = next.max(next_record + 1);
        }
    }
    std::fs::write(out, csv)?;
    timer.finish(
        out,
        "iet-run",
        json!({
            "def": def_path.display().to_string(),
            "def_hash": format!("{:016x}", fnv1a(&bytes)),
            "x": x, "n": n, "grid_ratio": 1.05,
        }),
        0,
    )?;
    Ok(())
}

#[derive(Serialize)]
struct LyapunovReport {
    def_hash: String,
    steps: u64,
    seed: u64,
    lambda_top: f64,
    lambda_f: Vec<f64>,
    ratio: f64,
    ratio_per_component: Vec<f64>,
    stderr: f64,
    mean_log_scale_step: f64,
    log_scale: Vec<f64>,
}

pub fn lyapunov(def_path: &Path, steps: u64, seed: u64, out: &Path) -> Result<(), CliError> {
    let timer = Timer::start();
    let bytes = std::fs::read(def_path)
        .map_err(|e| CliError::Config(format!("{}: {e}", def_path.display())))?;
    let def = IetDefinition::from_str(
        std::str::from_utf8(&bytes).map_err(|e| CliError::Config(e.to_string()))?,
    )?;
    let iet = def.iet_f64();
    let cocycle = def
        .cocycle
        .clone()
        .ok_or_else(|| CliError::Config("definition file lacks a [cocycle] table".into()))?;
    if steps == 0 {
        return Err(CliError::Config("steps must be positive".into()));
    }
    let est = lyapunov_ratio(ZipperedRectangles::new(iet), &cocycle, steps)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let report = LyapunovReport {
        def_hash: format!("{:016x}", fnv1a(&bytes)),
        steps,
        seed,
        lambda_top: est.lambda_top,
        lambda_f: est.lambda_f,
        ratio: est.ratio,
        ratio_per_component: est.ratio_per_component,
        stderr: est.stderr,
        mean_log_scale_step: est.log_scale.last().copied().unwrap_or(0.0) / steps as f64,
        log_scale: est.log_scale,
    };
    write_json(out, &report)?;
    timer.finish(
        out,
        "lyapunov",
        json!({
            "def": def_path.display().to_string(),
            "def_hash": report.def_hash,
            "steps": steps,
        }),
        seed,
    )?;
    Ok(())
}

fn parse_kind(kind: &str) -> Result<SeriesKind, CliError> {
    match kind.to_ascii_lowercase().as_str() {
        "maxdistance" => Ok(SeriesKind::MaxDistance),
        "avgdistance" => Ok(SeriesKind::AvgDistance),
        "cyclesum" => Ok(SeriesKind::CycleSum),
        "pairingabs" => Ok(SeriesKind::PairingAbs),
        other => Err(CliError::Config(format!(
            "unknown kind {other:?}; expected maxdistance, avgdistance, cyclesum or pairingabs"
        ))),
    }
}

fn parse_window(window: &str) -> Result<(f64, f64), CliError> {
    let (lo, hi) = window
        .split_once(':')
        .ok_or_else(|| CliError::Config(format!("window {window:?} must be lo:hi")))?;
    let lo: f64 = lo.parse().map_err(|_| CliError::Config(format!("bad window lower bound {lo:?}")))?;
    let hi: f64 = hi.parse().map_err(|_| CliError::Config(format!("bad window upper bound {hi:?}")))?;
    if !(lo > 0.0 && hi > lo) {
        return Err(CliError::Config(format!("window must satisfy 0 < lo < hi, got {lo}:{hi}")));
    }
    Ok((lo, hi))
}

/// Pull (abscissa, value) pairs from a CSV by header: simulate output uses
/// (t, d_max) or (t, avg_d) per kind; any CSV with the named value column
/// (`sum_abs` for cyclesum, `pairing_abs` for pairingabs) pairs it with the
/// first column.
fn load_series(path: &Path, kind: SeriesKind) -> Result<DiffusionSeries, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Config("empty CSV".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let value_col_name = match kind {
        SeriesKind::MaxDistance => "d_max",
        SeriesKind::AvgDistance => "avg_d",
        SeriesKind::CycleSum => "sum_abs",
        SeriesKind::PairingAbs => "pairing_abs",
    };
    let value_col = cols
        .iter()
        .position(|&c| c == value_col_name || c == "value")
        .ok_or_else(|| {
            CliError::Config(format!(
                "CSV lacks a {value_col_name:?} (or \"value\") column for kind {kind:?}"
            ))
        })?;
    let mut entries = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |s: &str| -> Result<f64, CliError> {
            s.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("row {}: bad number {s:?}", i + 2)))
        };
        let x = parse(fields.first().copied().unwrap_or(""))?;
        let y = parse(fields.get(value_col).copied().ok_or_else(|| {
            CliError::Config(format!("row {}: missing column {value_col}", i + 2))
        })?)?;
        entries.push((x, y));
    }
    if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(CliError::Config("abscissa column must be strictly increasing".into()));
    }
    Ok(DiffusionSeries::new(kind, entries))
}

#[derive(Serialize)]
struct FitReport {
    kind: SeriesKind,
    slope: f64,
    exponent: f64,
    stderr: f64,
    r2: f64,
    window: (f64, f64),
    seed: u64,
    n_points: usize,
    input_hash: String,
}

pub fn fit(input: &Path, kind: &str, window: &str, seed: u64, out: &Path) -> Result<(), CliError> {
    let timer = Timer::start();
    let kind = parse_kind(kind)?;
    let window = parse_window(window)?;
    let series = load_series(input, kind)?;
    let fitted = fit_exponent(&series, window, seed)?;
    let bytes = std::fs::read(input)?;
    let report = FitReport {
        kind,
        slope: fitted.slope,
        exponent: fitted.exponent,
        stderr: fitted.stderr,
        r2: fitted.r2,
        window,
        seed,
        n_points: fitted.n_points,
        input_hash: format!("{:016x}", fnv1a(&bytes)),
    };
    write_json(out, &report)?;
    timer.finish(
        out,
        "fit",
        json!({
            "in": input.display().to_string(),
            "kind": format!("{kind:?}"),
            "window": [window.0, window.1],
        }),
        seed,
    )?;
    Ok(())
}

#[derive(Serialize)]
struct ReproduceReport {
    a: f64,
    b: f64,
    free: bool,
    t_max: f64,
    n_directions: usize,
    seed: u64,
    fit_window: (f64, f64),
    max_exp: f64,
    max_stderr: f64,
    avg_exp: f64,
    avg_stderr: f64,
    completed: usize,
    singular_resamples: u64,
    band: (f64, f64),
    pass: bool,
}

pub fn reproduce(
    a: f64,
    b: f64,
    free: bool,
    t_max: f64,
    n_directions: usize,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    if n_directions == 0 {
        return Err(CliError::Config("n-directions must be positive".into()));
    }
    if !(t_max >= 1e3) {
        return Err(CliError::Config(format!(
            "t_max {t_max} too small for a fit window (need >= 1e3)"
        )));
    }
    let timer = Timer::start();
    let table = table_for(a, b, free)?;
    // fit over the last three decades, the default of the analysis layer
    let window = ((t_max / 1e3).max(10.0), t_max);
    let est = estimate_diffusion_exponents(
        &table,
        n_directions,
        t_max,
        seed,
        window,
        &AdvanceOptions::default(),
    )?;
    let band = (0.5, 0.8);
    let in_band = |x: f64| x >= band.0 && x <= band.1;
    let report = ReproduceReport {
        a,
        b,
        free,
        t_max,
        n_directions,
        seed,
        fit_window: window,
        max_exp: est.max_exp,
        max_stderr: est.max_stderr,
        avg_exp: est.avg_exp,
        avg_stderr: est.avg_stderr,
        completed: est.completed,
        singular_resamples: est.singular_resamples,
        band,
        pass: in_band(est.max_exp) && in_band(est.avg_exp),
    };
    write_json(out, &report)?;
    println!(
        "max_exp={:.4} avg_exp={:.4} band=[{}, {}] -> {}",
        report.max_exp,
        report.avg_exp,
        band.0,
        band.1,
        if report.pass { "PASS" } else { "FAIL" }
    );
    timer.finish(
        out,
        "reproduce",
        json!({
            "a": a, "b": b, "free": free, "t_max": t_max,
            "n_directions": n_directions, "fit_window": [window.0, window.1],
        }),
        seed,
    )?;
    Ok(())
}
