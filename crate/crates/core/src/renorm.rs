//! Rauzy-Veech induction and Zorich acceleration.
//!
//! Convention: the winner is the side whose last subinterval is strictly
//! longer; a tie (within 1e-12 in double mode, exact in rational mode) is a
//! connection and stops the induction. The transition matrix `B` satisfies
//! `lambda = B * lambda'` exactly; suspension heights transform by `B^T`.

use crate::error::RenormError;
use crate::iet::{Cocycle, Iet, Letter};
use crate::scalar::Scalar;
use num_bigint::BigInt;

/// Which side won a Rauzy step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Top,
    Bottom,
}

/// Nonnegative integer transition matrix, row-major. `lambda_old = B * lambda_new`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    k: usize,
    entries: Vec<u64>,
}

impl TransitionMatrix {
    pub fn identity(k: usize) -> Self {
        let mut entries = vec![0; k * k];
        for i in 0..k {
            entries[i * k + i] = 1;
        }
        TransitionMatrix { k, entries }
    }

    /// Elementary Rauzy matrix `I + E[winner][loser]`.
    pub fn elementary(k: usize, winner: Letter, loser: Letter) -> Self {
        let mut m = Self::identity(k);
        m.entries[winner * k + loser] += 1;
        m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.entries[row * self.k + col]
    }

    /// Right-multiply in place by the elementary matrix `I + E[w][l]`:
    /// adds column `w` into column `l`.
    pub fn mul_elementary(&mut self, winner: Letter, loser: Letter) -> Result<(), RenormError> {
        for row in 0..self.k {
            let add = self.entries[row * self.k + winner];
            let e = &mut self.entries[row * self.k + loser];
            *e = e.checked_add(add).ok_or(RenormError::Overflow)?;
        }
        Ok(())
    }

    /// Full product `self * other`.
    pub fn mul(&self, other: &TransitionMatrix) -> TransitionMatrix {
        assert_eq!(self.k, other.k);
        let k = self.k;
        let mut entries = vec![0u64; k * k];
        for i in 0..k {
            for l in 0..k {
                let a = self.entries[i * k + l];
                if a == 0 {
                    continue;
                }
                for j in 0..k {
                    entries[i * k + j] += a * other.entries[l * k + j];
                }
            }
        }
        TransitionMatrix { k, entries }
    }

    /// Apply to a vector: `(B v)_i = sum_j B[i][j] v_j`.
    pub fn apply<T: Scalar>(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.k);
        (0..self.k)
            .map(|i| {
                let mut acc = T::zero();
                for j in 0..self.k {
                    let e = self.entries[i * self.k + j];
                    if e != 0 {
                        acc += T::from_f64_lossy(e as f64) * v[j].clone();
                    }
                }
                acc
            })
            .collect()
    }

    /// Apply the transpose to an integer vector.
    pub fn apply_transpose_i64(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(v.len(), self.k);
        (0..self.k)
            .map(|j| (0..self.k).map(|i| self.entries[i * self.k + j] as i64 * v[i]).sum())
            .collect()
    }

    /// Column sums, `||B e_alpha||_1` per letter.
    pub fn column_sums(&self) -> Vec<u64> {
        (0..self.k)
            .map(|j| (0..self.k).map(|i| self.entries[i * self.k + j]).sum())
            .collect()
    }

    /// Exact determinant via big-integer fraction-free elimination.
    pub fn det_bigint(&self) -> BigInt {
        let k = self.k;
        let mut m: Vec<Vec<BigInt>> = (0..k)
            .map(|i| (0..k).map(|j| BigInt::from(self.entries[i * k + j])).collect())
            .collect();
        // Bareiss algorithm
        let mut sign = BigInt::from(1);
        let mut prev = BigInt::from(1);
        for p in 0..k - 1 {
            if m[p][p] == BigInt::from(0) {
                let swap = (p + 1..k).find(|&r| m[r][p] != BigInt::from(0));
                match swap {
                    Some(r) => {
                        m.swap(p, r);
                        sign = -sign;
                    }
                    None => return BigInt::from(0),
                }
            }
            for i in p + 1..k {
                for j in p + 1..k {
                    let num = &m[i][j] * &m[p][p] - &m[i][p] * &m[p][j];
                    m[i][j] = num / &prev;
                }
                m[i][p] = BigInt::from(0);
            }
            prev = m[p][p].clone();
        }
        sign * m[k - 1][k - 1].clone()
    }
}

/// Interval exchange with optional suspension heights and the accumulated
/// Teichmuller-time rescaling.
#[derive(Debug, Clone)]
pub struct ZipperedRectangles<T: Scalar> {
    pub iet: Iet<T>,
    pub heights: Option<Vec<T>>,
    pub log_scale: f64,
    pub steps: u64,
}

impl<T: Scalar> ZipperedRectangles<T> {
    pub fn new(iet: Iet<T>) -> Self {
        ZipperedRectangles { iet, heights: None, log_scale: 0.0, steps: 0 }
    }

    pub fn with_heights(iet: Iet<T>, heights: Vec<T>) -> Self {
        assert_eq!(heights.len(), iet.k());
        assert!(heights.iter().all(|h| *h > T::zero()), "heights must be positive");
        ZipperedRectangles { iet, heights: Some(heights), log_scale: 0.0, steps: 0 }
    }

    /// Flat area `sum lambda_alpha * tau_alpha`, when heights are carried.
    pub fn area(&self) -> Option<T> {
        self.heights.as_ref().map(|taus| {
            let mut acc = T::zero();
            for (l, tau) in self.iet.lengths().iter().zip(taus) {
                acc += l.clone() * tau.clone();
            }
            acc
        })
    }

    fn compare_last(&self) -> Result<(Side, Letter, Letter), RenormError> {
        let top_last = *self.iet.order_top().last().unwrap();
        let bot_last = *self.iet.order_bot().last().unwrap();
        let lt = &self.iet.lengths()[top_last];
        let lb = &self.iet.lengths()[bot_last];
        if T::coincides(lt, lb) {
            return Err(RenormError::ConnectionEncountered { step: self.steps });
        }
        if lt > lb {
            Ok((Side::Top, top_last, bot_last))
        } else {
            Ok((Side::Bottom, bot_last, top_last))
        }
    }

    /// Winner side of the next elementary step, without applying it.
    pub fn peek_winner(&self) -> Result<Side, RenormError> {
        self.compare_last().map(|(s, _, _)| s)
    }

    /// One elementary Rauzy-Veech step. Returns the new data, the
    /// transition matrix and the winner/loser letters.
    pub fn rauzy_step(self) -> Result<RauzyStep<T>, RenormError> {
        let (side, winner, loser) = self.compare_last()?;
        let k = self.iet.k();
        let mut lengths = self.iet.lengths().to_vec();
        lengths[winner] = lengths[winner].clone() - lengths[loser].clone();

        let mut order_top = self.iet.order_top().to_vec();
        let mut order_bot = self.iet.order_bot().to_vec();
        // the loser letter moves to the slot right after the winner on the
        // loser's side
        match side {
            Side::Top => {
                order_bot.pop();
                let wpos = order_bot.iter().position(|&l| l == winner).unwrap();
                order_bot.insert(wpos + 1, loser);
            }
            Side::Bottom => {
                order_top.pop();
                let wpos = order_top.iter().position(|&l| l == winner).unwrap();
                order_top.insert(wpos + 1, loser);
            }
        }
        let iet = Iet::from_ids(self.iet.alphabet().to_vec(), order_top, order_bot, lengths)
            .map_err(RenormError::Iet)?;

        let heights = self.heights.map(|mut taus| {
            // tau' = B^T tau
            taus[loser] = taus[loser].clone() + taus[winner].clone();
            taus
        });

        Ok(RauzyStep {
            zr: ZipperedRectangles {
                iet,
                heights,
                log_scale: self.log_scale,
                steps: self.steps + 1,
            },
            matrix: TransitionMatrix::elementary(k, winner, loser),
            side,
            winner,
            loser,
        })
    }

    /// One Zorich step: the maximal block of elementary steps with the same
    /// winner side, with lengths renormalized back to total one afterwards.
    /// The positive `log_scale` increment is the discrete Teichmuller time.
    pub fn zorich_step(self) -> Result<ZorichStep<T>, RenormError> {
        let k = self.iet.k();
        let total_before = self.iet.total().to_f64();
        let first = self.rauzy_step()?;
        let side = first.side;
        let mut matrix = first.matrix;
        let mut zr = first.zr;
        let mut count = 1u64;
        loop {
            match zr.peek_winner() {
                Ok(s) if s == side => {
                    let step = zr.rauzy_step()?;
                    matrix.mul_elementary(step.winner, step.loser)?;
                    zr = step.zr;
                    count += 1;
                }
                _ => break,
            }
        }
        debug_assert_eq!(matrix.k(), k);
        let total_after = zr.iet.total().to_f64();
        let increment = (total_before / total_after).ln();
        let total = zr.iet.total().clone();
        let iet = Iet::from_ids(
            zr.iet.alphabet().to_vec(),
            zr.iet.order_top().to_vec(),
            zr.iet.order_bot().to_vec(),
            zr.iet.lengths().iter().map(|l| l.clone() / total.clone()).collect(),
        )
        .map_err(RenormError::Iet)?;
        // heights scale inversely so the area is preserved up to the record
        let heights = zr.heights.map(|taus| {
            taus.into_iter().map(|t| t * total.clone()).collect::<Vec<T>>()
        });
        Ok(ZorichStep {
            zr: ZipperedRectangles {
                iet,
                heights,
                log_scale: zr.log_scale + increment,
                steps: zr.steps,
            },
            matrix,
            count,
            side,
        })
    }
}

pub struct RauzyStep<T: Scalar> {
    pub zr: ZipperedRectangles<T>,
    pub matrix: TransitionMatrix,
    pub side: Side,
    pub winner: Letter,
    pub loser: Letter,
}

pub struct ZorichStep<T: Scalar> {
    pub zr: ZipperedRectangles<T>,
    pub matrix: TransitionMatrix,
    pub count: u64,
    pub side: Side,
}

/// Result of the renormalization Lyapunov estimator.
#[derive(Debug, Clone)]
pub struct LyapunovEstimate {
    /// Per-component exponent of the cocycle class, in per-Zorich-step units.
    pub lambda_f: Vec<f64>,
    /// Top exponent (growth of the all-ones direction), same units.
    pub lambda_top: f64,
    /// `max_i lambda_f[i] / lambda_top`; this is the time-normalized
    /// exponent of the class and the growth exponent of the pairings.
    pub ratio: f64,
    pub ratio_per_component: Vec<f64>,
    pub stderr: f64,
    /// Accumulated Teichmuller time after each Zorich step.
    pub log_scale: Vec<f64>,
    pub steps: u64,
}

/// Exponent of the cocycle class `f` along the Zorich-accelerated
/// renormalization, together with the top exponent and their ratio.
///
/// The vectors are never formed as matrix products: the all-ones direction
/// and, per component, a companion direction seeded by `f` are propagated
/// through the transposed elementary steps and re-orthogonalized after each
/// Zorich step, accumulating log-magnitudes. A component whose pairing with
/// the (normalized) length vector is nonzero grows with the top direction
/// and its exponent is reported as the top one; otherwise the growth of the
/// orthogonal complement inside the spanned 2-plane gives the exponent of
/// the class without top-direction contamination.
pub fn lyapunov_ratio(
    zr: ZipperedRectangles<f64>,
    cocycle: &Cocycle,
    n_steps: u64,
) -> Result<LyapunovEstimate, RenormError> {
    let k = zr.iet.k();
    assert!(n_steps >= 1);
    assert_eq!(cocycle.values.len(), k);
    if cocycle.is_zero() {
        return Err(RenormError::Degenerate);
    }
    let d = cocycle.d;
    let mut zr = if (zr.iet.total() - 1.0).abs() > 1e-9 {
        ZipperedRectangles { iet: zr.iet.normalized(), ..zr }
    } else {
        zr
    };

    // top component detector: <f_i, lambda> on the normalized lengths
    let lambda0 = zr.iet.lengths().to_vec();
    let has_top: Vec<bool> = (0..d)
        .map(|i| {
            let f_i = cocycle.component(i);
            let dot: f64 = f_i.iter().zip(&lambda0).map(|(&c, &l)| c as f64 * l).sum();
            let scale: f64 = f_i.iter().map(|&c| (c as f64).abs() * 1.0).sum::<f64>().max(1.0);
            dot.abs() > 1e-9 * scale
        })
        .collect();

    let mut top_dir = vec![1.0f64; k];
    let mut comp_dirs: Vec<Vec<f64>> = (0..d)
        .map(|i| cocycle.component(i).iter().map(|&c| c as f64).collect())
        .collect();
    let mut degenerate = vec![false; d];

    let mut log_top = 0.0f64;
    let mut log_comp = vec![0.0f64; d];
    let mut top_series: Vec<(f64, f64)> = Vec::with_capacity(n_steps as usize);
    let mut comp_series: Vec<Vec<(f64, f64)>> = vec![Vec::with_capacity(n_steps as usize); d];
    let mut log_scale_series = Vec::with_capacity(n_steps as usize);

    for step_idx in 1..=n_steps {
        // one Zorich block, applying B^T row operations to tracked vectors
        let side = zr.peek_winner()?;
        loop {
            let step = zr.rauzy_step()?;
            let (w, l) = (step.winner, step.loser);
            top_dir[l] += top_dir[w];
            for v in comp_dirs.iter_mut() {
                v[l] += v[w];
            }
            zr = step.zr;
            match zr.peek_winner() {
                Ok(s) if s == side => continue,
                _ => break,
            }
        }
        // renormalize lengths, record Teichmuller time
        let total = *zr.iet.total();
        let iet = zr.iet.normalized();
        zr = ZipperedRectangles {
            iet,
            heights: None,
            log_scale: zr.log_scale - total.ln(),
            steps: zr.steps,
        };
        log_scale_series.push(zr.log_scale);

        // QR pass: normalize the top direction, orthogonalize companions
        let r11 = norm2(&top_dir);
        log_top += r11.ln();
        for v in top_dir.iter_mut() {
            *v /= r11;
        }
        top_series.push((step_idx as f64, log_top));
        for (i, v) in comp_dirs.iter_mut().enumerate() {
            if degenerate[i] {
                continue;
            }
            let c: f64 = v.iter().zip(&top_dir).map(|(a, b)| a * b).sum();
            for (vj, tj) in v.iter_mut().zip(&top_dir) {
                *vj -= c * tj;
            }
            let r22 = norm2(v);
            if !(r22 > 1e-300) {
                degenerate[i] = true;
                continue;
            }
            log_comp[i] += r22.ln();
            for vj in v.iter_mut() {
                *vj /= r22;
            }
            comp_series[i].push((step_idx as f64, log_comp[i]));
        }
    }

    // regression over the last half of the steps
    let slope_of = |series: &[(f64, f64)]| -> (f64, f64) {
        let half = &series[series.len() / 2..];
        let xs: Vec<f64> = half.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = half.iter().map(|p| p.1).collect();
        ols_slope(&xs, &ys)
    };
    let (lambda_top, top_err) = slope_of(&top_series);
    let mut lambda_f = Vec::with_capacity(d);
    let mut ratio_per_component = Vec::with_capacity(d);
    let mut stderr = top_err / lambda_top.abs().max(1e-300);
    for i in 0..d {
        let (lf, lf_err) = if has_top[i] {
            // the class carries the top direction; its exponent is the top one
            (lambda_top, top_err)
        } else if degenerate[i] || comp_series[i].len() < 4 {
            lambda_f.push(f64::NEG_INFINITY);
            ratio_per_component.push(f64::NEG_INFINITY);
            continue;
        } else {
            slope_of(&comp_series[i])
        };
        lambda_f.push(lf);
        ratio_per_component.push(lf / lambda_top);
        stderr = stderr.max((lf_err + top_err) / lambda_top);
    }
    let ratio = ratio_per_component.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !ratio.is_finite() {
        return Err(RenormError::Degenerate);
    }
    Ok(LyapunovEstimate {
        lambda_f,
        lambda_top,
        ratio,
        ratio_per_component,
        stderr,
        log_scale: log_scale_series,
        steps: n_steps,
    })
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn ols_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let mut sse = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let r = y - my - slope * (x - mx);
        sse += r * r;
    }
    let dof = (xs.len().max(3) - 2) as f64;
    let se = (sse / dof / sxx).sqrt();
    (slope, se)
}
