//! Interval exchange transformations with symbolic coding, return cycles
//! and integer cocycle pairings.
//!
//! Subintervals are half-open `[.,.)`. Interior cut points of the top
//! decomposition are singular for `apply`; in double mode a point within
//! 1e-12 of a cut counts as singular and the caller resamples.

use crate::error::IetError;
use crate::scalar::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Letter of the alphabet, an index into `Iet::alphabet`.
pub type Letter = usize;

/// Interval exchange data: alphabet, top/bottom orders and positive lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct Iet<T: Scalar> {
    alphabet: Vec<String>,
    order_top: Vec<Letter>,
    order_bot: Vec<Letter>,
    lengths: Vec<T>,
    total: T,
    // precomputed per-letter data
    top_prefix: Vec<T>, // start positions by top slot, length k+1
    bot_prefix: Vec<T>,
    delta: Vec<T>,    // translation per letter
    top_pos: Vec<usize>, // slot of each letter in the top order
    bot_pos: Vec<usize>,
}

impl<T: Scalar> Iet<T> {
    /// Build a validated interval exchange from letter names, the two orders
    /// and per-letter lengths (aligned with `alphabet`).
    pub fn new(
        alphabet: Vec<String>,
        order_top_names: &[&str],
        order_bot_names: &[&str],
        lengths: Vec<T>,
    ) -> Result<Self, IetError> {
        let k = alphabet.len();
        if k == 0 {
            return Err(IetError::BadData("empty alphabet".into()));
        }
        if k > 64 {
            return Err(IetError::BadData("alphabet larger than 64 letters".into()));
        }
        if order_top_names.len() != k || order_bot_names.len() != k || lengths.len() != k {
            return Err(IetError::BadData("orders and lengths must match the alphabet".into()));
        }
        let id_of = |name: &str| -> Result<Letter, IetError> {
            alphabet
                .iter()
                .position(|a| a == name)
                .ok_or_else(|| IetError::BadData(format!("unknown letter {name}")))
        };
        let order_top: Vec<Letter> =
            order_top_names.iter().map(|n| id_of(n)).collect::<Result<_, _>>()?;
        let order_bot: Vec<Letter> =
            order_bot_names.iter().map(|n| id_of(n)).collect::<Result<_, _>>()?;
        Self::from_ids(alphabet, order_top, order_bot, lengths)
    }

    /// Build from letter ids directly.
    pub fn from_ids(
        alphabet: Vec<String>,
        order_top: Vec<Letter>,
        order_bot: Vec<Letter>,
        lengths: Vec<T>,
    ) -> Result<Self, IetError> {
        let k = alphabet.len();
        let is_perm = |ord: &[Letter]| {
            let mut seen = vec![false; k];
            ord.iter().all(|&l| l < k && !std::mem::replace(&mut seen[l], true))
        };
        if !is_perm(&order_top) || !is_perm(&order_bot) {
            return Err(IetError::BadData("orders must be permutations of the alphabet".into()));
        }
        for (l, len) in lengths.iter().enumerate() {
            if *len <= T::zero() {
                return Err(IetError::NonPositiveLength { letter: alphabet[l].clone() });
            }
        }
        // Irreducibility: no proper prefix of the top order carries the same
        // letter set as the equal-length prefix of the bottom order.
        let mut top_mask: u64 = 0;
        let mut bot_mask: u64 = 0;
        for j in 0..k - 1 {
            top_mask |= 1 << order_top[j];
            bot_mask |= 1 << order_bot[j];
            if top_mask == bot_mask {
                return Err(IetError::Reducible { prefix: j + 1 });
            }
        }

        let mut total = T::zero();
        for len in &lengths {
            total += len.clone();
        }
        let prefix = |ord: &[Letter]| {
            let mut acc = T::zero();
            let mut out = Vec::with_capacity(k + 1);
            out.push(acc.clone());
            for &l in ord {
                acc += lengths[l].clone();
                out.push(acc.clone());
            }
            out
        };
        let top_prefix = prefix(&order_top);
        let bot_prefix = prefix(&order_bot);
        let mut top_pos = vec![0usize; k];
        let mut bot_pos = vec![0usize; k];
        for (slot, &l) in order_top.iter().enumerate() {
            top_pos[l] = slot;
        }
        for (slot, &l) in order_bot.iter().enumerate() {
            bot_pos[l] = slot;
        }
        // delta_alpha = (start of the image interval) - (start of the domain
        // interval); equal to the signed sum over the orders.
        let delta: Vec<T> = (0..k)
            .map(|l| bot_prefix[bot_pos[l]].clone() - top_prefix[top_pos[l]].clone())
            .collect();

        Ok(Iet {
            alphabet,
            order_top,
            order_bot,
            lengths,
            total,
            top_prefix,
            bot_prefix,
            delta,
            top_pos,
            bot_pos,
        })
    }

    pub fn k(&self) -> usize {
        self.alphabet.len()
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn order_top(&self) -> &[Letter] {
        &self.order_top
    }

    pub fn order_bot(&self) -> &[Letter] {
        &self.order_bot
    }

    pub fn lengths(&self) -> &[T] {
        &self.lengths
    }

    pub fn total(&self) -> &T {
        &self.total
    }

    pub fn translation(&self, letter: Letter) -> &T {
        &self.delta[letter]
    }

    /// Interior cut points of the top decomposition.
    pub fn top_cuts(&self) -> &[T] {
        &self.top_prefix[1..self.k()]
    }

    /// Interior cut points of the bottom decomposition.
    pub fn bot_cuts(&self) -> &[T] {
        &self.bot_prefix[1..self.k()]
    }

    /// Start of the top subinterval of `letter`.
    pub fn top_start(&self, letter: Letter) -> &T {
        &self.top_prefix[self.top_pos[letter]]
    }

    /// Start of the image (bottom) subinterval of `letter`.
    pub fn bot_start(&self, letter: Letter) -> &T {
        &self.bot_prefix[self.bot_pos[letter]]
    }

    /// Locate the top subinterval containing `x`.
    pub fn locate(&self, x: &T) -> Result<Letter, IetError> {
        if *x < T::zero() || *x >= self.total {
            return Err(IetError::OutOfRange);
        }
        // binary search over start positions
        let mut lo = 0usize;
        let mut hi = self.k(); // slot range [lo, hi)
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.top_prefix[mid] <= *x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // singular when coinciding with an interior cut
        if lo > 0 && T::coincides(x, &self.top_prefix[lo]) {
            return Err(IetError::SingularAt { step: 0 });
        }
        if T::coincides(x, &self.top_prefix[lo + 1]) && lo + 1 < self.k() + 1 && lo + 1 != self.k()
        {
            return Err(IetError::SingularAt { step: 0 });
        }
        Ok(self.order_top[lo])
    }

    /// One step of the exchange: `x + delta_alpha` for the top subinterval
    /// containing `x`. Interior cut points are singular.
    pub fn apply(&self, x: &T) -> Result<T, IetError> {
        let letter = self.locate(x)?;
        Ok(x.clone() + self.delta[letter].clone())
    }

    /// First `n` letters of the symbolic coding of the forward orbit of `x`.
    pub fn code_orbit(&self, x: &T, n: usize) -> Result<CodingWord, IetError> {
        let mut letters = Vec::with_capacity(n);
        let mut y = x.clone();
        for step in 0..n {
            let letter = self.locate(&y).map_err(|e| match e {
                IetError::SingularAt { .. } => IetError::SingularAt { step: step as u64 },
                other => other,
            })?;
            letters.push(letter);
            y += self.delta[letter].clone();
        }
        Ok(CodingWord { letters })
    }

    /// First hitting time of each top subinterval along the orbit of `x`,
    /// scanning at most `depth` steps.
    pub fn hitting_times(&self, x: &T, depth: usize) -> Result<Vec<Option<u64>>, IetError> {
        let mut first = vec![None; self.k()];
        let mut remaining = self.k();
        let mut y = x.clone();
        for step in 0..depth {
            let letter = self.locate(&y).map_err(|e| match e {
                IetError::SingularAt { .. } => IetError::SingularAt { step: step as u64 },
                other => other,
            })?;
            if first[letter].is_none() {
                first[letter] = Some(step as u64);
                remaining -= 1;
                if remaining == 0 {
                    break;
                }
            }
            y += self.delta[letter].clone();
        }
        Ok(first)
    }

    /// Scan forward orbits of the bottom cut points for a hit on a top cut
    /// point (the interval exchange notion of a saddle connection).
    pub fn keane_check(&self, depth: usize) -> KeaneOutcome<T> {
        for (ci, cut) in self.bot_cuts().iter().enumerate() {
            let mut y = cut.clone();
            for step in 0..depth {
                match self.locate(&y) {
                    Ok(letter) => y += self.delta[letter].clone(),
                    Err(_) => {
                        return KeaneOutcome::ConnectionAt {
                            step: step as u64,
                            bottom_cut: ci,
                            point: y,
                        }
                    }
                }
            }
        }
        KeaneOutcome::NoConnectionUpTo(depth)
    }

    /// Stream of return cycles paired with `cocycle` along the orbit of `x`.
    pub fn return_cycles<'a>(&'a self, x: T, cocycle: &'a Cocycle) -> ReturnCycles<'a, T> {
        assert_eq!(cocycle.values.len(), self.k(), "cocycle must cover the alphabet");
        ReturnCycles {
            iet: self,
            cocycle,
            x,
            counts: vec![0; self.k()],
            pairing: vec![0; cocycle.d],
            n: 0,
        }
    }

    /// Same data with lengths converted to `f64`.
    pub fn to_f64(&self) -> Iet<f64> {
        Iet::from_ids(
            self.alphabet.clone(),
            self.order_top.clone(),
            self.order_bot.clone(),
            self.lengths.iter().map(|l| l.to_f64()).collect(),
        )
        .expect("valid data stays valid under conversion")
    }

    /// Lengths rescaled so the total is one.
    pub fn normalized(&self) -> Iet<T> {
        let t = self.total.clone();
        Iet::from_ids(
            self.alphabet.clone(),
            self.order_top.clone(),
            self.order_bot.clone(),
            self.lengths.iter().map(|l| l.clone() / t.clone()).collect(),
        )
        .expect("rescaling preserves validity")
    }

    /// Render a coding word with the letter names.
    pub fn word_string(&self, word: &CodingWord) -> String {
        word.letters.iter().map(|&l| self.alphabet[l].as_str()).collect()
    }
}

/// Finite symbolic coding word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodingWord {
    pub letters: Vec<Letter>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KeaneOutcome<T> {
    NoConnectionUpTo(usize),
    ConnectionAt { step: u64, bottom_cut: usize, point: T },
}

impl<T> KeaneOutcome<T> {
    pub fn is_clear(&self) -> bool {
        matches!(self, KeaneOutcome::NoConnectionUpTo(_))
    }
}

/// Visit counts of an orbit segment of `n` returns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReturnCycle {
    pub counts: Vec<u64>,
    pub n: u64,
}

/// Z^d-valued cocycle: the value of the class on each basis cycle h_alpha.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cocycle {
    pub d: usize,
    /// `values[letter][component]`
    pub values: Vec<Vec<i64>>,
}

impl Cocycle {
    pub fn new(d: usize, values: Vec<Vec<i64>>) -> Self {
        assert!(d >= 1);
        assert!(values.iter().all(|v| v.len() == d));
        Cocycle { d, values }
    }

    /// The all-ones cocycle in one component; pairs to exactly n.
    pub fn ones(k: usize) -> Self {
        Cocycle { d: 1, values: vec![vec![1]; k] }
    }

    pub fn zero(k: usize, d: usize) -> Self {
        Cocycle { d, values: vec![vec![0; d]; k] }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.iter().all(|&c| c == 0))
    }

    pub fn max_abs(&self) -> i64 {
        self.values.iter().flat_map(|v| v.iter()).map(|c| c.abs()).max().unwrap_or(0)
    }

    /// Single component as a per-letter vector.
    pub fn component(&self, i: usize) -> Vec<i64> {
        self.values.iter().map(|v| v[i]).collect()
    }
}

/// One emitted step of the return-cycle stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleStep {
    pub n: u64,
    pub letter: Letter,
    /// `sum_alpha counts[alpha] * f(alpha)`, one entry per component.
    pub pairing: Vec<i64>,
}

/// Incremental return-cycle iterator: O(log k) per step, counts and pairing
/// updated in place.
pub struct ReturnCycles<'a, T: Scalar> {
    iet: &'a Iet<T>,
    cocycle: &'a Cocycle,
    x: T,
    counts: Vec<u64>,
    pairing: Vec<i64>,
    n: u64,
}

impl<'a, T: Scalar> ReturnCycles<'a, T> {
    /// Current visit counts (`||counts||_1 = n`).
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn cycle(&self) -> ReturnCycle {
        ReturnCycle { counts: self.counts.clone(), n: self.n }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn position(&self) -> &T {
        &self.x
    }

    /// Advance one iterate. `Err(SingularAt)` reports the step index where
    /// the orbit died.
    pub fn step(&mut self) -> Result<CycleStep, IetError> {
        let letter = self.iet.locate(&self.x).map_err(|e| match e {
            IetError::SingularAt { .. } => IetError::SingularAt { step: self.n },
            other => other,
        })?;
        self.x += self.iet.delta[letter].clone();
        self.counts[letter] += 1;
        self.n += 1;
        let fv = &self.cocycle.values[letter];
        for (p, dv) in self.pairing.iter_mut().zip(fv) {
            *p += dv;
        }
        Ok(CycleStep { n: self.n, letter, pairing: self.pairing.clone() })
    }
}

impl<'a, T: Scalar> Iterator for ReturnCycles<'a, T> {
    type Item = CycleStep;

    fn next(&mut self) -> Option<CycleStep> {
        self.step().ok()
    }
}

/// Certified perturbation size for coding stability: bisect down from a
/// fraction of the smallest length until `n_perturbations` sampled length
/// vectors of sup-norm delta (and equal total) all reproduce the length-`m`
/// coding prefix of the left endpoint orbit.
///
/// Returns `None` when the reference orbit itself dies before `m` steps or
/// the bisection exhausts the float range.
pub fn coding_stability_delta(
    iet: &Iet<f64>,
    m: usize,
    n_perturbations: usize,
    seed: u64,
) -> Option<f64> {
    let reference = iet.code_orbit(&0.0, m).ok()?;
    let k = iet.k();
    let min_len = iet.lengths().iter().cloned().fold(f64::INFINITY, f64::min);
    let mut delta = min_len / 8.0;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    'outer: for _ in 0..200 {
        let mut rng_try = ChaCha12Rng::seed_from_u64(rng.gen());
        for _ in 0..n_perturbations {
            // random direction with zero sum, sup-norm delta
            let mut v: Vec<f64> = (0..k).map(|_| rng_try.gen_range(-1.0..1.0)).collect();
            let mean = v.iter().sum::<f64>() / k as f64;
            for vi in v.iter_mut() {
                *vi -= mean;
            }
            let sup = v.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
            if sup == 0.0 {
                continue;
            }
            let scale = delta / sup;
            let lengths: Vec<f64> =
                iet.lengths().iter().zip(&v).map(|(l, vi)| l + vi * scale).collect();
            if lengths.iter().any(|&l| l <= 0.0) {
                delta /= 2.0;
                continue 'outer;
            }
            let perturbed = match Iet::from_ids(
                iet.alphabet.to_vec(),
                iet.order_top().to_vec(),
                iet.order_bot().to_vec(),
                lengths,
            ) {
                Ok(p) => p,
                Err(_) => {
                    delta /= 2.0;
                    continue 'outer;
                }
            };
            match perturbed.code_orbit(&0.0, m) {
                Ok(w) if w == reference => {}
                _ => {
                    delta /= 2.0;
                    continue 'outer;
                }
            }
        }
        return Some(delta);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio;
    use num_rational::BigRational;

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    fn rotation(la: f64, lb: f64) -> Iet<f64> {
        Iet::new(names(&["A", "B"]), &["A", "B"], &["B", "A"], vec![la, lb]).unwrap()
    }

    #[test]
    fn two_letter_rotation() {
        let t = rotation(0.3, 0.7);
        assert!((t.apply(&0.0).unwrap() - 0.7).abs() < 1e-15);
        assert!((t.apply(&0.1).unwrap() - 0.8).abs() < 1e-15);
        // wraps: x in B translates back by lambda_A
        assert!((t.apply(&0.5).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn cut_point_is_singular() {
        let t = rotation(0.3, 0.7);
        assert!(matches!(t.apply(&0.3), Err(IetError::SingularAt { .. })));
        assert!(matches!(t.apply(&(0.3 + 1e-14)), Err(IetError::SingularAt { .. })));
        assert!(matches!(t.apply(&1.0), Err(IetError::OutOfRange)));
    }

    #[test]
    fn identity_order_is_reducible() {
        let err =
            Iet::new(names(&["A", "B"]), &["A", "B"], &["A", "B"], vec![0.5, 0.5]).unwrap_err();
        assert!(matches!(err, IetError::Reducible { .. }));
    }

    #[test]
    fn reversal_four_letters_is_irreducible() {
        let t = Iet::new(
            names(&["A", "B", "C", "D"]),
            &["A", "B", "C", "D"],
            &["D", "C", "B", "A"],
            vec![0.1, 0.2, 0.3, 0.4],
        )
        .unwrap();
        // A is last on the bottom: image interval is [0.9, 1.0)
        assert!((t.apply(&0.05).unwrap() - 0.95).abs() < 1e-15);
    }

    #[test]
    fn non_positive_length_rejected() {
        let err = Iet::new(names(&["A", "B"]), &["A", "B"], &["B", "A"], vec![0.5, 0.0]).unwrap_err();
        assert!(matches!(err, IetError::NonPositiveLength { .. }));
    }

    #[test]
    fn coding_of_half_rotation() {
        let t = rotation(0.5, 0.5);
        let w = t.code_orbit(&0.25, 6).unwrap();
        assert_eq!(t.word_string(&w), "ABABAB");
        assert_eq!(t.code_orbit(&0.25, 0).unwrap().letters.len(), 0);
    }

    #[test]
    fn exact_rational_rotation_orbit() {
        let t: Iet<BigRational> = Iet::new(
            names(&["A", "B"]),
            &["A", "B"],
            &["B", "A"],
            vec![ratio(3, 10), ratio(7, 10)],
        )
        .unwrap();
        assert_eq!(t.apply(&ratio(0, 1)).unwrap(), ratio(7, 10));
        // period of the rotation by 7/10 is 10
        let mut x = ratio(1, 20);
        for _ in 0..10 {
            x = t.apply(&x).unwrap();
        }
        assert_eq!(x, ratio(1, 20));
    }

    #[test]
    fn hitting_times_of_half_rotation() {
        let t = rotation(0.5, 0.5);
        let m = t.hitting_times(&0.25, 10).unwrap();
        assert_eq!(m, vec![Some(0), Some(1)]);
    }

    #[test]
    fn pairing_alternates_for_half_rotation() {
        let t = rotation(0.5, 0.5);
        let f = Cocycle::new(1, vec![vec![1], vec![-1]]);
        let mut stream = t.return_cycles(0.25, &f);
        let seq: Vec<i64> = (0..6).map(|_| stream.step().unwrap().pairing[0]).collect();
        assert_eq!(seq, vec![1, 0, 1, 0, 1, 0]);
    }

    #[test]
    fn counts_l1_norm_equals_n() {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let t = rotation(1.0 - g, g);
        let f = Cocycle::ones(2);
        let mut stream = t.return_cycles(0.11, &f);
        for i in 1..=500u64 {
            let s = stream.step().unwrap();
            assert_eq!(s.pairing[0] as u64, i);
            assert_eq!(stream.counts().iter().sum::<u64>(), i);
        }
    }

    #[test]
    fn rational_rotation_has_connection() {
        let t = rotation(0.5, 0.5);
        assert!(!t.keane_check(10).is_clear());
    }

    #[test]
    fn golden_rotation_has_no_connection() {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let t = rotation(1.0 - g, g);
        assert!(t.keane_check(10_000).is_clear());
    }

    #[test]
    fn coding_stability_finds_positive_delta() {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let t = rotation(1.0 - g, g);
        let d = coding_stability_delta(&t, 50, 16, 7).unwrap();
        assert!(d > 0.0);
    }
}
