//! Series post-processing: log-log exponent fits, cycle-sum growth,
//! sandwich comparison of time averages against cycle sums, excursion
//! records and the uniform upper-bound scan.

use crate::error::AnalysisError;
use crate::iet::{Cocycle, CycleStep, Iet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    MaxDistance,
    AvgDistance,
    CycleSum,
    PairingAbs,
}

/// Nonnegative series over a strictly increasing abscissa (time or index).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionSeries {
    pub kind: SeriesKind,
    pub entries: Vec<(f64, f64)>,
}

impl DiffusionSeries {
    pub fn new(kind: SeriesKind, entries: Vec<(f64, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0), "abscissae must increase");
        DiffusionSeries { kind, entries }
    }
}

/// Least-squares fit of log(value) against log(abscissa).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub window: (f64, f64),
    pub r2: f64,
    /// The diffusion exponent: `slope - 1` for cycle sums (undoing the
    /// summation), the slope itself otherwise.
    pub exponent: f64,
    pub n_points: usize,
}

/// Ordinary least squares. Returns (slope, intercept, slope stderr, r2).
pub fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = (syy - slope * sxy).max(0.0);
    let dof = (xs.len().max(3) - 2) as f64;
    let stderr = (sse / dof / sxx).sqrt();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    (slope, intercept, stderr, r2)
}

/// Fit the log-log slope of `series` over the abscissa `window`, with a
/// 200-resample bootstrap standard error.
pub fn fit_exponent(
    series: &DiffusionSeries,
    window: (f64, f64),
    seed: u64,
) -> Result<ExponentFit, AnalysisError> {
    let pts: Vec<(f64, f64)> = series
        .entries
        .iter()
        .filter(|(x, y)| *x >= window.0 && *x <= window.1 && *y > 0.0 && *x > 0.0)
        .cloned()
        .collect();
    if pts.len() < 20 {
        return Err(AnalysisError::InsufficientData { got: pts.len(), need: 20 });
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, _, r2) = ols(&xs, &ys);

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let reps = 200;
    let mut slopes = Vec::with_capacity(reps);
    for _ in 0..reps {
        let mut bx = Vec::with_capacity(xs.len());
        let mut by = Vec::with_capacity(xs.len());
        for _ in 0..xs.len() {
            let j = rng.gen_range(0..xs.len());
            bx.push(xs[j]);
            by.push(ys[j]);
        }
        // degenerate resamples (all same x) are skipped
        if bx.iter().all(|&x| x == bx[0]) {
            continue;
        }
        slopes.push(ols(&bx, &by).0);
    }
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let var = slopes.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>()
        / (slopes.len().max(2) - 1) as f64;
    let stderr = var.sqrt();

    let exponent = match series.kind {
        SeriesKind::CycleSum => slope - 1.0,
        _ => slope,
    };
    Ok(ExponentFit { slope, intercept, stderr, window, r2, exponent, n_points: pts.len() })
}

/// Cycle sums S_n = sum_{k<=n} max_i |pairing_k[i]|, sampled on a geometric
/// grid of n and kept as exact integers.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleSumSeries {
    /// (n, S_n) samples; S_n exact.
    pub samples: Vec<(u64, i128)>,
    /// Total steps consumed.
    pub n_final: u64,
}

impl CycleSumSeries {
    pub fn to_series(&self) -> DiffusionSeries {
        DiffusionSeries::new(
            SeriesKind::CycleSum,
            self.samples.iter().map(|&(n, s)| (n as f64, s as f64)).collect(),
        )
    }
}

/// Stream the cycle sums of a pairing stream; O(1) memory beyond samples.
pub fn cycle_sums(steps: impl Iterator<Item = CycleStep>, grid_ratio: f64) -> CycleSumSeries {
    assert!(grid_ratio > 1.0);
    let mut sum: i128 = 0;
    let mut samples = Vec::new();
    let mut next_record = 1u64;
    let mut n_final = 0u64;
    for step in steps {
        let v = step.pairing.iter().map(|p| p.unsigned_abs()).max().unwrap_or(0);
        sum += v as i128;
        n_final = step.n;
        if step.n >= next_record {
            samples.push((step.n, sum));
            let next = (next_record as f64 * grid_ratio).ceil() as u64;
            next_record = next.max(next_record + 1);
        }
    }
    CycleSumSeries { samples, n_final }
}

/// Report of the two-sided comparison between a time-average series and the
/// per-return cycle-sum averages, with the smallest fitted constants
/// `a1 >= 1`, `b1 >= 0` making the sandwich hold over the whole run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SandwichReport {
    pub a1: f64,
    pub b1: f64,
    pub n_pairs: usize,
    /// Indices of pairs violating the sandwich with the fitted constants;
    /// empty by construction unless the fit overflowed.
    pub violations: Vec<usize>,
}

/// `avg`: (t, avg_d) samples. `returns`: (t_n, S_n / n) per-return samples.
/// Pairs are matched by time: for each return sample the latest avg sample
/// with `t <= t_n` is used; the grids must interleave within a factor
/// `max_gap` or the match is rejected.
pub fn sandwich_check(
    avg: &[(f64, f64)],
    returns: &[(f64, f64)],
    max_gap: f64,
) -> Result<SandwichReport, AnalysisError> {
    if avg.is_empty() || returns.is_empty() {
        return Err(AnalysisError::GridMismatch("empty series".into()));
    }
    let mut pairs: Vec<(f64, f64)> = Vec::new(); // (avg value r, cycle value s)
    let mut ai = 0usize;
    for &(tn, s) in returns {
        while ai + 1 < avg.len() && avg[ai + 1].0 <= tn {
            ai += 1;
        }
        let (ta, r) = avg[ai];
        if ta > tn {
            continue; // return before the first avg sample
        }
        if tn / ta > max_gap {
            return Err(AnalysisError::GridMismatch(format!(
                "no avg sample within factor {max_gap} below t={tn}"
            )));
        }
        pairs.push((r, s));
    }
    if pairs.is_empty() {
        return Err(AnalysisError::GridMismatch("no matched pairs".into()));
    }

    // b(a) = smallest offset closing both sides at slope a; scan a on a log
    // grid and keep the pair minimizing a scale-balanced objective.
    let scale = pairs.iter().map(|p| p.1).fold(0.0f64, f64::max).max(1e-300);
    let b_of = |a: f64| -> f64 {
        let mut b = 0.0f64;
        for &(r, s) in &pairs {
            b = b.max(r - a * s).max(s / a - r);
        }
        b
    };
    let mut best = (1.0f64, b_of(1.0));
    let mut best_cost = best.1 + 0.0;
    let steps = 400;
    for i in 0..=steps {
        let a = 10f64.powf(3.0 * i as f64 / steps as f64); // a in [1, 1000]
        let b = b_of(a);
        let cost = b + (a - 1.0) * scale * 0.01;
        if cost < best_cost {
            best = (a, b);
            best_cost = cost;
        }
    }
    let (a1, b1) = best;
    let mut violations = Vec::new();
    for (i, &(r, s)) in pairs.iter().enumerate() {
        let eps = 1e-9 * (1.0 + r.abs() + s.abs());
        if r > a1 * s + b1 + eps || r < s / a1 - b1 - eps {
            violations.push(i);
        }
    }
    Ok(SandwichReport { a1, b1, n_pairs: pairs.len(), violations })
}

/// Running-maximum records of a pairing stream and their fitted growth.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExcursionReport {
    /// (record index m, n_m, value at the record)
    pub records: Vec<(usize, u64, u64)>,
    /// Slope of log n_m against m, when the records are exponentially
    /// sparse; `None` when flagged.
    pub beta_hat: Option<(f64, f64)>,
    /// Slope of log value against log n over the records.
    pub lambda_hat: Option<(f64, f64)>,
    /// Set when records are too dense (monotone stream) or die out.
    pub flagged: bool,
}

pub fn excursion_records(
    steps: impl Iterator<Item = (u64, u64)>,
) -> Result<ExcursionReport, AnalysisError> {
    let mut records = Vec::new();
    let mut best = 0u64;
    let mut total = 0u64;
    for (n, v) in steps {
        total = n;
        if v > best {
            best = v;
            records.push((records.len(), n, v));
        }
    }
    if total < 1000 {
        return Err(AnalysisError::InsufficientData { got: total as usize, need: 1000 });
    }
    let dense = records.len() as u64 * 2 > total;
    let died_out = records.last().map(|r| r.1 * 4 < total).unwrap_or(true);
    let flagged = dense || died_out || records.len() < 5;
    let beta_hat = if flagged {
        None
    } else {
        let xs: Vec<f64> = records.iter().map(|r| r.0 as f64).collect();
        let ys: Vec<f64> = records.iter().map(|r| (r.1 as f64).ln()).collect();
        let (s, _, se, _) = ols(&xs, &ys);
        Some((s, se))
    };
    let lambda_hat = if records.len() < 5 {
        None
    } else {
        let xs: Vec<f64> = records.iter().map(|r| (r.1 as f64).ln()).collect();
        let ys: Vec<f64> = records.iter().map(|r| (r.2 as f64).ln()).collect();
        let (s, _, se, _) = ols(&xs, &ys);
        Some((s, se))
    };
    Ok(ExcursionReport { records, beta_hat, lambda_hat, flagged })
}

/// Scan of the uniform upper bound over random basepoints: the empirical
/// threshold after which `log|pairing_n| / log n <= lambda_hat + epsilon`
/// holds for every sampled basepoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniformBoundReport {
    pub lambda_hat: f64,
    pub epsilon: f64,
    /// (n, sup over basepoints of log|pairing_n|/log n) on a geometric grid.
    pub sup_curve: Vec<(u64, f64)>,
    /// First grid point from which the bound holds to the end of the scan.
    pub n0: Option<u64>,
    pub basepoints: usize,
}

pub fn uniform_upper_check(
    iet: &Iet<f64>,
    cocycle: &Cocycle,
    n_basepoints: usize,
    n_max: u64,
    epsilon: f64,
    lambda_hat: f64,
    seed: u64,
) -> UniformBoundReport {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let total = *iet.total();
    // geometric n-grid shared across basepoints
    let mut grid = Vec::new();
    let mut n = 2u64;
    while n <= n_max {
        grid.push(n);
        n = ((n as f64) * 1.25).ceil() as u64;
    }
    let mut sup = vec![f64::NEG_INFINITY; grid.len()];
    let mut done = 0usize;
    let mut attempts = 0usize;
    while done < n_basepoints && attempts < n_basepoints * 16 {
        attempts += 1;
        let x = rng.gen_range(0.0..total);
        let mut stream = iet.return_cycles(x, cocycle);
        let mut ok = true;
        let mut gi = 0usize;
        let mut values = vec![f64::NEG_INFINITY; grid.len()];
        while gi < grid.len() {
            match stream.step() {
                Ok(step) => {
                    if step.n == grid[gi] {
                        let v = step.pairing.iter().map(|p| p.unsigned_abs()).max().unwrap_or(0);
                        let ratio = if v == 0 {
                            f64::NEG_INFINITY
                        } else {
                            (v as f64).ln() / (step.n as f64).ln()
                        };
                        values[gi] = ratio;
                        gi += 1;
                    }
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            for (s, v) in sup.iter_mut().zip(&values) {
                *s = s.max(*v);
            }
            done += 1;
        }
    }
    let bound = lambda_hat + epsilon;
    let mut n0 = None;
    for i in (0..grid.len()).rev() {
        if sup[i] <= bound {
            n0 = Some(grid[i]);
        } else {
            break;
        }
    }
    UniformBoundReport {
        lambda_hat,
        epsilon,
        sup_curve: grid.into_iter().zip(sup).collect(),
        n0,
        basepoints: done,
    }
}
