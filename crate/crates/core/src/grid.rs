use serde::{Deserialize, Serialize};

/// Geometric sampling grid t_j = t0 * ratio^j.
///
/// The default (t0 = 1, ratio = 1.05) gives roughly 47 samples per decade,
/// enough for a stable log-log regression without hoarding memory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricGrid {
    pub t0: f64,
    pub ratio: f64,
}

impl Default for GeometricGrid {
    fn default() -> Self {
        GeometricGrid { t0: 1.0, ratio: 1.05 }
    }
}

impl GeometricGrid {
    pub fn new(t0: f64, ratio: f64) -> Self {
        assert!(t0 > 0.0 && ratio > 1.0, "grid needs t0 > 0 and ratio > 1");
        GeometricGrid { t0, ratio }
    }

    /// Sample times up to and including the first one >= t_max is excluded.
    pub fn samples_up_to(&self, t_max: f64) -> GridIter {
        GridIter { next: self.t0, ratio: self.ratio, t_max }
    }
}

pub struct GridIter {
    next: f64,
    ratio: f64,
    t_max: f64,
}

impl Iterator for GridIter {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        if self.next > self.t_max {
            return None;
        }
        let t = self.next;
        self.next *= self.ratio;
        Some(t)
    }
}

/// Stateful cursor over a geometric grid, for streaming accumulators that
/// pass sample points one segment at a time.
#[derive(Debug, Clone)]
pub struct GridCursor {
    next: f64,
    ratio: f64,
}

impl GridCursor {
    pub fn new(grid: GeometricGrid) -> Self {
        GridCursor { next: grid.t0, ratio: grid.ratio }
    }

    /// Next pending sample point, if it is <= t.
    pub fn pop_before(&mut self, t: f64) -> Option<f64> {
        if self.next <= t {
            let s = self.next;
            self.next *= self.ratio;
            Some(s)
        } else {
            None
        }
    }

    pub fn peek(&self) -> f64 {
        self.next
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_geometric() {
        let g = GeometricGrid::default();
        let ts: Vec<f64> = g.samples_up_to(2.0).collect();
        assert_eq!(ts.len(), 15); // 1.05^14 ~ 1.98, 1.05^15 > 2
        for w in ts.windows(2) {
            assert!((w[1] / w[0] - 1.05).abs() < 1e-12);
        }
    }

    #[test]
    fn cursor_matches_iterator() {
        let g = GeometricGrid::new(1.0, 1.3);
        let mut c = GridCursor::new(g);
        let mut got = Vec::new();
        while let Some(s) = c.pop_before(50.0) {
            got.push(s);
        }
        let want: Vec<f64> = g.samples_up_to(50.0).collect();
        assert_eq!(got, want);
    }
}
