//! Event-driven simulation of the Z^2-periodic wind-tree billiard.
//!
//! The plane is decomposed into unit cells indexed by (m, n); each cell
//! carries one axis-aligned a x b obstacle centered at (1/2, 1/2) in
//! cell-corner coordinates. Positions are stored as (integer cell,
//! fractional coordinates), so the cell index is exactly the monodromy
//! vector of the trajectory and never loses precision at large distances.
//!
//! The base angle theta is fixed per trajectory; reflections off the
//! axis-parallel walls only flip velocity signs, which the `Dir` tag tracks
//! exactly. Speed is one by construction.

use crate::analysis::ols;
use crate::error::BilliardError;
use crate::grid::{GeometricGrid, GridCursor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Corner-hit tolerance, in units of the unit cell.
pub const EPS_CORNER: f64 = 1e-12;
/// Minimum accepted event time; anything smaller means precision exhaustion.
pub const EPS_MIN: f64 = 1e-13;

/// Obstacle half-dimensions are a/2 x b/2 with (a, b) in the open square (0,1)^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindTreeParams {
    a: f64,
    b: f64,
}

impl WindTreeParams {
    pub fn new(a: f64, b: f64) -> Result<Self, BilliardError> {
        if !(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0) {
            return Err(BilliardError::OutOfDomain { a, b });
        }
        Ok(WindTreeParams { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Obstacle slab bounds in cell coordinates: (x0, x1, y0, y1).
    fn slab(&self) -> (f64, f64, f64, f64) {
        (
            0.5 - self.a / 2.0,
            0.5 + self.a / 2.0,
            0.5 - self.b / 2.0,
            0.5 + self.b / 2.0,
        )
    }

    /// True when the cell-relative point lies strictly inside the obstacle.
    pub fn inside_obstacle(&self, fx: f64, fy: f64) -> bool {
        let (x0, x1, y0, y1) = self.slab();
        fx > x0 && fx < x1 && fy > y0 && fy < y1
    }
}

/// The billiard table: the periodic wind-tree or the obstacle-free control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Table {
    WindTree(WindTreeParams),
    /// Straight-line motion; used as the ballistic control where both
    /// diffusion exponents are exactly one.
    Free,
}

impl Table {
    pub fn params(&self) -> Option<&WindTreeParams> {
        match self {
            Table::WindTree(p) => Some(p),
            Table::Free => None,
        }
    }
}

/// Velocity sign pattern: the first letter is the sign of the horizontal
/// component, the second of the vertical one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dir {
    PP,
    PM,
    MP,
    MM,
}

impl Dir {
    pub fn signs(self) -> (f64, f64) {
        match self {
            Dir::PP => (1.0, 1.0),
            Dir::PM => (1.0, -1.0),
            Dir::MP => (-1.0, 1.0),
            Dir::MM => (-1.0, -1.0),
        }
    }

    pub fn flip_x(self) -> Dir {
        match self {
            Dir::PP => Dir::MP,
            Dir::PM => Dir::MM,
            Dir::MP => Dir::PP,
            Dir::MM => Dir::PM,
        }
    }

    pub fn flip_y(self) -> Dir {
        match self {
            Dir::PP => Dir::PM,
            Dir::PM => Dir::PP,
            Dir::MP => Dir::MM,
            Dir::MM => Dir::MP,
        }
    }

    /// Full reversal, for time-reversibility checks.
    pub fn reverse(self) -> Dir {
        match self {
            Dir::PP => Dir::MM,
            Dir::PM => Dir::MP,
            Dir::MP => Dir::PM,
            Dir::MM => Dir::PP,
        }
    }
}

/// Instantaneous state of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilliardState {
    pub cell: (i64, i64),
    /// Cell-corner-relative position in [0,1)^2, outside the open obstacle.
    pub frac: (f64, f64),
    pub dir: Dir,
    /// Base angle in (0, pi/2); never changes along a trajectory.
    pub theta: f64,
    pub t: f64,
}

impl BilliardState {
    pub fn new(cell: (i64, i64), frac: (f64, f64), dir: Dir, theta: f64) -> Self {
        assert!(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2, "theta must be in (0, pi/2)");
        BilliardState { cell, frac, dir, theta, t: 0.0 }
    }

    pub fn velocity(&self) -> (f64, f64) {
        let (sx, sy) = self.dir.signs();
        (sx * self.theta.cos(), sy * self.theta.sin())
    }

    /// Planar displacement from `origin` (another state of the same run).
    pub fn displacement_from(&self, origin: &BilliardState) -> (f64, f64) {
        (
            (self.cell.0 - origin.cell.0) as f64 + (self.frac.0 - origin.frac.0),
            (self.cell.1 - origin.cell.1) as f64 + (self.frac.1 - origin.frac.1),
        )
    }

    pub fn reversed(&self) -> BilliardState {
        BilliardState { dir: self.dir.reverse(), ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    VerticalWall,
    HorizontalWall,
    CellCrossing,
    Corner,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionEvent {
    pub dt: f64,
    pub kind: EventKind,
    pub new_state: BilliardState,
}

/// Next collision or cell crossing along the ray from `state`.
///
/// At most eight candidate times exist: the four obstacle sides of the
/// current cell and the four cell edges. A hit within `EPS_CORNER` of an
/// obstacle corner is singular; an event time below `EPS_MIN` means the
/// geometry has degenerated.
pub fn next_event(state: &BilliardState, table: &Table) -> Result<CollisionEvent, BilliardError> {
    let (vx, vy) = state.velocity();
    let (fx, fy) = state.frac;

    // cell edge crossings
    let tx = if vx > 0.0 { (1.0 - fx) / vx } else { -fx / vx };
    let ty = if vy > 0.0 { (1.0 - fy) / vy } else { -fy / vy };

    // obstacle entry (slab method)
    let mut obstacle: Option<(f64, EventKind)> = None;
    if let Table::WindTree(p) = table {
        let (x0, x1, y0, y1) = p.slab();
        let (ex, sx) = if vx > 0.0 { (x0, x1) } else { (x1, x0) };
        let (ey, sy) = if vy > 0.0 { (y0, y1) } else { (y1, y0) };
        let t_enter_x = (ex - fx) / vx;
        let t_exit_x = (sx - fx) / vx;
        let t_enter_y = (ey - fy) / vy;
        let t_exit_y = (sy - fy) / vy;
        let t_enter = t_enter_x.max(t_enter_y);
        let t_exit = t_exit_x.min(t_exit_y);
        if t_enter > EPS_MIN && t_enter < t_exit {
            // corner proximity check at the hit point
            let hx = fx + vx * t_enter;
            let hy = fy + vy * t_enter;
            let dx = (hx - x0).abs().min((hx - x1).abs());
            let dy = (hy - y0).abs().min((hy - y1).abs());
            if dx < EPS_CORNER && dy < EPS_CORNER {
                obstacle = Some((t_enter, EventKind::Corner));
            } else if t_enter_x > t_enter_y {
                obstacle = Some((t_enter, EventKind::VerticalWall));
            } else {
                obstacle = Some((t_enter, EventKind::HorizontalWall));
            }
        }
    }

    let t_cell = tx.min(ty);
    if let Some((t_obs, kind)) = obstacle {
        if t_obs < t_cell {
            if kind == EventKind::Corner {
                return Err(BilliardError::SingularTrajectory { t: state.t + t_obs });
            }
            if t_obs < EPS_MIN {
                return Err(BilliardError::NumericalDegeneracy { dt: t_obs, t: state.t });
            }
            let p = table.params().unwrap();
            let (x0, x1, y0, y1) = p.slab();
            let mut new = *state;
            new.t += t_obs;
            match kind {
                EventKind::VerticalWall => {
                    // anchor the hit coordinate exactly on the wall
                    new.frac.0 = if vx > 0.0 { x0 } else { x1 };
                    new.frac.1 = fy + vy * t_obs;
                    new.dir = new.dir.flip_x();
                }
                EventKind::HorizontalWall => {
                    new.frac.0 = fx + vx * t_obs;
                    new.frac.1 = if vy > 0.0 { y0 } else { y1 };
                    new.dir = new.dir.flip_y();
                }
                _ => unreachable!(),
            }
            return Ok(CollisionEvent { dt: t_obs, kind, new_state: new });
        }
    }

    if t_cell < EPS_MIN {
        return Err(BilliardError::NumericalDegeneracy { dt: t_cell, t: state.t });
    }
    let mut new = *state;
    new.t += t_cell;
    let cross_x = tx <= ty + EPS_MIN;
    let cross_y = ty <= tx + EPS_MIN;
    if cross_x {
        if vx > 0.0 {
            new.cell.0 += 1;
            new.frac.0 = 0.0;
        } else {
            new.cell.0 -= 1;
            new.frac.0 = 1.0;
        }
        if !cross_y {
            new.frac.1 = (fy + vy * t_cell).clamp(0.0, 1.0);
        }
    }
    if cross_y {
        if vy > 0.0 {
            new.cell.1 += 1;
            new.frac.1 = 0.0;
        } else {
            new.cell.1 -= 1;
            new.frac.1 = 1.0;
        }
        if !cross_x {
            new.frac.0 = (fx + vx * t_cell).clamp(0.0, 1.0);
        }
    }
    Ok(CollisionEvent { dt: t_cell, kind: EventKind::CellCrossing, new_state: new })
}

/// One log-spaced sample of the trajectory statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    /// Euclidean planar distance from the start point.
    pub d_now: f64,
    /// Running maximum of d.
    pub d_max: f64,
    /// (1/t) * integral of d over [0, t], accumulated in closed form per
    /// linear flight segment.
    pub avg_d: f64,
}

/// Log-spaced record of a cell-crossing "return": index, time, the l1 norm
/// of the lattice displacement, and the running sum of those norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingSample {
    pub n: u64,
    pub t: f64,
    pub l1: u64,
    pub sum_l1: u128,
}

#[derive(Debug, Clone)]
pub struct TrajectoryStats {
    pub samples: Vec<Sample>,
    pub crossings: Vec<CrossingSample>,
    pub events: u64,
    pub n_crossings: u64,
    pub final_state: BilliardState,
}

/// Exact integral of |r0 + v*s| ds over [0, len] for a unit vector v.
fn segment_distance_integral(r0: (f64, f64), v: (f64, f64), len: f64) -> f64 {
    // d(s)^2 = (s + B)^2 + C^2 with B = r0.v, C^2 = |r0|^2 - B^2
    let b = r0.0 * v.0 + r0.1 * v.1;
    let c2 = (r0.0 * r0.0 + r0.1 * r0.1 - b * b).max(0.0);
    let f = |u: f64| -> f64 {
        if c2 < 1e-28 {
            0.5 * u * u.abs()
        } else {
            let root = (u * u + c2).sqrt();
            0.5 * (u * root + c2 * (u / c2.sqrt()).asinh())
        }
    };
    f(len + b) - f(b)
}

fn dist_at(r0: (f64, f64), v: (f64, f64), s: f64) -> f64 {
    let x = r0.0 + v.0 * s;
    let y = r0.1 + v.1 * s;
    (x * x + y * y).sqrt()
}

/// Options for `advance`.
#[derive(Debug, Clone, Copy)]
pub struct AdvanceOptions {
    pub grid: GeometricGrid,
    /// Hard cap on the number of events before `Timeout`.
    pub event_budget: u64,
    /// Grid ratio for the crossing-return samples (geometric in the index).
    pub crossing_ratio: f64,
}

impl Default for AdvanceOptions {
    fn default() -> Self {
        AdvanceOptions {
            grid: GeometricGrid::default(),
            event_budget: u64::MAX,
            crossing_ratio: 1.05,
        }
    }
}

/// Run the flow until `t_max`, recording statistics on the geometric grid.
pub fn advance(
    start: &BilliardState,
    table: &Table,
    t_max: f64,
    opts: &AdvanceOptions,
) -> Result<TrajectoryStats, BilliardError> {
    assert!(t_max > 0.0);
    if let Table::WindTree(p) = table {
        assert!(
            !p.inside_obstacle(start.frac.0, start.frac.1),
            "start point inside the obstacle"
        );
    }
    let mut state = *start;
    let mut cursor = GridCursor::new(opts.grid);
    let mut samples = Vec::new();
    let mut crossings = Vec::new();
    let mut integral = 0.0f64;
    let mut d_max = 0.0f64;
    let mut events = 0u64;
    let mut n_cross = 0u64;
    let mut sum_l1: u128 = 0;
    let mut next_cross_record = 1u64;

    loop {
        let ev = next_event(&state, table)?;
        let seg_end = state.t + ev.dt;
        let r0 = state.displacement_from(start);
        let v = state.velocity();

        if seg_end >= t_max {
            // final partial segment
            let len = t_max - state.t;
            while let Some(s) = cursor.pop_before(t_max) {
                if s < state.t {
                    continue;
                }
                let tau = s - state.t;
                let d_s = dist_at(r0, v, tau);
                let part = integral + segment_distance_integral(r0, v, tau);
                samples.push(Sample { t: s, d_now: d_s, d_max: d_max.max(d_s), avg_d: part / s });
            }
            let mut final_state = state;
            final_state.t = t_max;
            final_state.frac.0 += v.0 * len;
            final_state.frac.1 += v.1 * len;
            return Ok(TrajectoryStats {
                samples,
                crossings,
                events,
                n_crossings: n_cross,
                final_state,
            });
        }

        while let Some(s) = cursor.pop_before(seg_end) {
            let tau = s - state.t;
            let d_s = dist_at(r0, v, tau);
            let part = integral + segment_distance_integral(r0, v, tau);
            samples.push(Sample { t: s, d_now: d_s, d_max: d_max.max(d_s), avg_d: part / s });
        }
        integral += segment_distance_integral(r0, v, ev.dt);
        let d_end = dist_at(r0, v, ev.dt);
        d_max = d_max.max(d_end);

        if ev.kind == EventKind::CellCrossing {
            n_cross += 1;
            let l1 = (ev.new_state.cell.0 - start.cell.0).unsigned_abs()
                + (ev.new_state.cell.1 - start.cell.1).unsigned_abs();
            sum_l1 += l1 as u128;
            if n_cross >= next_cross_record {
                crossings.push(CrossingSample { n: n_cross, t: ev.new_state.t, l1, sum_l1 });
                let next = (next_cross_record as f64 * opts.crossing_ratio).ceil() as u64;
                next_cross_record = next.max(next_cross_record + 1);
            }
        }

        events += 1;
        if events >= opts.event_budget {
            return Err(BilliardError::Timeout { budget: opts.event_budget });
        }
        state = ev.new_state;
    }
}

/// Per-direction outcome of the exponent estimator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirectionFit {
    pub index: usize,
    pub theta: f64,
    pub max_slope: f64,
    pub avg_slope: f64,
    pub events: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiffusionEstimate {
    pub max_exp: f64,
    pub max_stderr: f64,
    pub avg_exp: f64,
    pub avg_stderr: f64,
    pub per_direction: Vec<DirectionFit>,
    pub singular_resamples: u64,
    pub completed: usize,
    pub requested: usize,
}

/// Deterministic per-slot RNG stream: results are merged by direction index,
/// so the output does not depend on evaluation order.
fn direction_rng(seed: u64, index: usize, attempt: u64) -> ChaCha12Rng {
    // splitmix-style mix so neighbouring slots decorrelate
    let mut z = seed
        ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ attempt.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    ChaCha12Rng::seed_from_u64(z)
}

/// Estimate the maximal and average diffusion exponents over seeded random
/// directions. Singular directions are resampled (and counted); the
/// reported exponents are medians across directions with a bootstrap
/// standard error.
pub fn estimate_diffusion_exponents(
    table: &Table,
    n_directions: usize,
    t_max: f64,
    seed: u64,
    fit_window: (f64, f64),
    opts: &AdvanceOptions,
) -> Result<DiffusionEstimate, BilliardError> {
    assert!(n_directions >= 1);
    let (t_lo, t_hi) = fit_window;
    assert!(t_lo >= 10.0 * opts.grid.t0, "fit window must start well after t0");
    assert!(t_hi <= t_max);

    let mut per_direction = Vec::with_capacity(n_directions);
    let mut singular_resamples = 0u64;
    for index in 0..n_directions {
        let mut fitted = None;
        for attempt in 0..16u64 {
            let mut rng = direction_rng(seed, index, attempt);
            let theta = rng.gen_range(1e-9..std::f64::consts::FRAC_PI_2 - 1e-9);
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
            let start = BilliardState::new((0, 0), frac, dir, theta);
            match advance(&start, table, t_max, opts) {
                Ok(stats) => {
                    let in_window: Vec<&Sample> = stats
                        .samples
                        .iter()
                        .filter(|s| s.t >= t_lo && s.t <= t_hi && s.d_max > 0.0 && s.avg_d > 0.0)
                        .collect();
                    if in_window.len() < 20 {
                        break; // treated as incomplete
                    }
                    let xs: Vec<f64> = in_window.iter().map(|s| s.t.ln()).collect();
                    let ys_max: Vec<f64> = in_window.iter().map(|s| s.d_max.ln()).collect();
                    let ys_avg: Vec<f64> = in_window.iter().map(|s| s.avg_d.ln()).collect();
                    let (max_slope, _, _, _) = ols(&xs, &ys_max);
                    let (avg_slope, _, _, _) = ols(&xs, &ys_avg);
                    fitted = Some(DirectionFit {
                        index,
                        theta,
                        max_slope,
                        avg_slope,
                        events: stats.events,
                    });
                    break;
                }
                Err(BilliardError::SingularTrajectory { .. })
                | Err(BilliardError::NumericalDegeneracy { .. }) => {
                    singular_resamples += 1;
                    continue;
                }
                Err(e) => return Err(e),
            }
        }
        if let Some(f) = fitted {
            per_direction.push(f);
        }
    }

    let completed = per_direction.len();
    if completed * 2 < n_directions {
        return Err(BilliardError::InsufficientData { completed, requested: n_directions });
    }

    let max_slopes: Vec<f64> = per_direction.iter().map(|f| f.max_slope).collect();
    let avg_slopes: Vec<f64> = per_direction.iter().map(|f| f.avg_slope).collect();
    let (max_exp, max_stderr) = median_with_bootstrap(&max_slopes, seed ^ 0x6d65_6469_616e);
    let (avg_exp, avg_stderr) = median_with_bootstrap(&avg_slopes, seed ^ 0x6176_6572_6167);
    Ok(DiffusionEstimate {
        max_exp,
        max_stderr,
        avg_exp,
        avg_stderr,
        per_direction,
        singular_resamples,
        completed,
        requested: n_directions,
    })
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median and its bootstrap standard error (200 resamples).
pub fn median_with_bootstrap(values: &[f64], seed: u64) -> (f64, f64) {
    let m = median(values);
    if values.len() < 2 {
        return (m, 0.0);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let reps = 200;
    let mut meds = Vec::with_capacity(reps);
    for _ in 0..reps {
        let sample: Vec<f64> =
            (0..values.len()).map(|_| values[rng.gen_range(0..values.len())]).collect();
        meds.push(median(&sample));
    }
    let mean = meds.iter().sum::<f64>() / reps as f64;
    let var = meds.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (reps - 1) as f64;
    (m, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_domain() {
        assert!(WindTreeParams::new(0.5, 0.5).is_ok());
        assert!(WindTreeParams::new(0.25, 0.9).is_ok());
        assert!(matches!(
            WindTreeParams::new(1.0, 0.5),
            Err(BilliardError::OutOfDomain { .. })
        ));
        assert!(matches!(
            WindTreeParams::new(0.5, 0.0),
            Err(BilliardError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn vertical_wall_hit() {
        let p = WindTreeParams::new(0.5, 0.5).unwrap();
        let table = Table::WindTree(p);
        let s = BilliardState::new((0, 0), (0.1, 0.5), Dir::PP, std::f64::consts::FRAC_PI_4);
        let ev = next_event(&s, &table).unwrap();
        assert_eq!(ev.kind, EventKind::VerticalWall);
        assert!((ev.dt - 0.15 * 2f64.sqrt()).abs() < 1e-12);
        assert!((ev.new_state.frac.0 - 0.25).abs() < 1e-12);
        assert!((ev.new_state.frac.1 - 0.65).abs() < 1e-12);
        assert_eq!(ev.new_state.dir, Dir::MP);
    }

    #[test]
    fn bottom_cell_crossing() {
        let p = WindTreeParams::new(0.5, 0.5).unwrap();
        let table = Table::WindTree(p);
        let s = BilliardState::new((0, 0), (0.1, 0.05), Dir::PM, std::f64::consts::FRAC_PI_4);
        let ev = next_event(&s, &table).unwrap();
        assert_eq!(ev.kind, EventKind::CellCrossing);
        assert!((ev.dt - 0.05 * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(ev.new_state.cell, (0, -1));
        assert_eq!(ev.new_state.dir, Dir::PM);
        assert!((ev.new_state.frac.1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_corner_is_singular() {
        let p = WindTreeParams::new(0.5, 0.5).unwrap();
        let table = Table::WindTree(p);
        let d = 0.05;
        let s =
            BilliardState::new((0, 0), (0.25 - d, 0.25 - d), Dir::PP, std::f64::consts::FRAC_PI_4);
        assert!(matches!(
            next_event(&s, &table),
            Err(BilliardError::SingularTrajectory { .. })
        ));
    }

    #[test]
    fn free_motion_distance_is_time() {
        let s = BilliardState::new((0, 0), (0.3, 0.4), Dir::PP, 0.7);
        let stats = advance(&s, &Table::Free, 100.0, &AdvanceOptions::default()).unwrap();
        for sm in &stats.samples {
            assert!((sm.d_now - sm.t).abs() < 1e-9 * sm.t.max(1.0));
            assert!((sm.avg_d - sm.t / 2.0).abs() < 1e-9 * sm.t.max(1.0));
            assert_eq!(sm.d_max, sm.d_now.max(sm.d_max.min(sm.d_now)));
        }
    }

    #[test]
    fn segment_integral_matches_quadrature() {
        let r0 = (1.3, -0.4);
        let th: f64 = 0.93;
        let v = (th.cos(), th.sin());
        let len = 2.7;
        let exact = segment_distance_integral(r0, v, len);
        let n = 200_000;
        let h = len / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let s = (i as f64 + 0.5) * h;
            acc += dist_at(r0, v, s) * h;
        }
        assert!((exact - acc).abs() < 1e-7);
    }

    #[test]
    fn through_the_origin_integral() {
        // ray passing through the reference point: C = 0 branch
        let th: f64 = 0.5;
        let v = (th.cos(), th.sin());
        let r0 = (-v.0, -v.1); // distance 1 behind, crosses origin at s=1
        let exact = segment_distance_integral(r0, v, 2.0);
        assert!((exact - 1.0).abs() < 1e-12); // two triangles of area 1/2
    }
}
