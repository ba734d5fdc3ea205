//! EigenTrust-style reference metric for side-by-side comparison.
//!
//! Local trust is the plain sum of ratings given (weights ignored),
//!
//! ```text
//! s_ij = Σ d_ij,        a_ij = max(s_ij, 0) / Σ_k max(s_ik, 0),
//! ```
//!
//! and the global vector is the damped Markov fixed point
//!
//! ```text
//! r⁽ᵏ⁺¹⁾ = α·Aᵀ·r⁽ᵏ⁾ + (1-α)·p.
//! ```
//!
//! The normalization discards negative information and produces relative
//! values only: scaling a rater's row or shifting its negative counts leaves
//! `a` unchanged, which is exactly the distinguishing-power gap the
//! flow-based metric closes.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::evidence::TransactionLog;

const EIGENTRUST_MAX_ITERATIONS: usize = 1000;

/// Summed and normalized local trust values.
#[derive(Debug, Clone)]
pub struct LocalTrustMatrix {
    n: usize,
    s_matrix: DMatrix<f64>,
    normalized: DMatrix<f64>,
}

impl LocalTrustMatrix {
    pub fn from_log(log: &TransactionLog) -> Self {
        let s_matrix = local_trust(log);
        let normalized = normalize(&s_matrix);
        Self {
            n: log.user_count(),
            s_matrix,
            normalized,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Raw rating sums `s_ij` (may be negative).
    pub fn s_matrix(&self) -> &DMatrix<f64> {
        &self.s_matrix
    }

    /// Row-stochastic `a_ij`.
    pub fn normalized(&self) -> &DMatrix<f64> {
        &self.normalized
    }
}

/// `s_ij` = sum of the ratings i gave j. Transaction weights are ignored;
/// the reference metric never defined a weighted variant.
pub fn local_trust(log: &TransactionLog) -> DMatrix<f64> {
    let n = log.user_count();
    let mut s = DMatrix::zeros(n, n);
    for event in log.events() {
        s[(event.rater.index(), event.ratee.index())] += f64::from(event.rating);
    }
    s
}

/// Rowwise `a_ij = max(s_ij,0)/Σ_k max(s_ik,0)`. Rows whose positive part
/// sums to zero fall back to the uniform distribution 1/n.
pub fn normalize(s_matrix: &DMatrix<f64>) -> DMatrix<f64> {
    let n = s_matrix.nrows();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let denominator: f64 = (0..n).map(|k| s_matrix[(i, k)].max(0.0)).sum();
        if denominator > 0.0 {
            for j in 0..n {
                a[(i, j)] = s_matrix[(i, j)].max(0.0) / denominator;
            }
        } else {
            for j in 0..n {
                a[(i, j)] = 1.0 / n as f64;
            }
        }
    }
    a
}

/// Damped Markov iteration from `r⁽⁰⁾ = p` until the 1-norm step is below
/// `delta`. `p` must be a probability vector.
pub fn eigentrust_solve(
    a_matrix: &DMatrix<f64>,
    p: &[f64],
    alpha: f64,
    delta: f64,
) -> Result<Vec<f64>> {
    let n = a_matrix.nrows();
    if a_matrix.ncols() != n || p.len() != n {
        return Err(Error::InvalidInstance(format!(
            "matrix {}x{} incompatible with p of length {}",
            n,
            a_matrix.ncols(),
            p.len()
        )));
    }
    if p.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
        return Err(Error::InvalidInstance(
            "p must be componentwise nonnegative".into(),
        ));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInstance(format!(
            "p must sum to 1, got {total}"
        )));
    }
    if !(alpha.is_finite() && (0.0..=1.0).contains(&alpha)) {
        return Err(Error::InvalidInstance(format!(
            "alpha {alpha} outside [0,1]"
        )));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidInstance(format!(
            "delta {delta} must be positive"
        )));
    }
    let at = a_matrix.transpose();
    let mut r = nalgebra::DVector::from_column_slice(p);
    for iteration in 1..=EIGENTRUST_MAX_ITERATIONS {
        let mut next = &at * &r;
        next *= alpha;
        for i in 0..n {
            next[i] += (1.0 - alpha) * p[i];
        }
        let diff: f64 = next.iter().zip(r.iter()).map(|(a, b)| (a - b).abs()).sum();
        r = next;
        if diff < delta {
            return Ok(r.as_slice().to_vec());
        }
        if iteration == EIGENTRUST_MAX_ITERATIONS {
            return Err(Error::NonConvergence {
                iterations: iteration,
                residual: diff,
                last_iterate: r.as_slice().to_vec(),
            });
        }
    }
    unreachable!("loop always returns");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evidence::{RatingEvent, UserId};

    fn push_many(log: &mut TransactionLog, rater: u32, ratee: u32, rating: i8, count: usize) {
        for _ in 0..count {
            log.push(RatingEvent {
                rater: UserId(rater),
                ratee: UserId(ratee),
                rating,
                weight: 1.0,
                timestamp: None,
            })
            .unwrap();
        }
    }

    /// Alice (1) rates Bob (2), Charlie (3), David (4): scenario (a).
    fn scenario_a() -> TransactionLog {
        let mut log = TransactionLog::new(4);
        push_many(&mut log, 1, 2, 1, 1);
        push_many(&mut log, 1, 2, 0, 999);
        push_many(&mut log, 1, 3, 1, 9);
        push_many(&mut log, 1, 3, 0, 991);
        push_many(&mut log, 1, 4, 0, 100);
        push_many(&mut log, 1, 4, -1, 900);
        log
    }

    /// Scenario (b): same totals, very different rating mix.
    fn scenario_b() -> TransactionLog {
        let mut log = TransactionLog::new(4);
        push_many(&mut log, 1, 2, 1, 100);
        push_many(&mut log, 1, 2, 0, 900);
        push_many(&mut log, 1, 3, 1, 900);
        push_many(&mut log, 1, 3, 0, 100);
        push_many(&mut log, 1, 4, 1, 200);
        push_many(&mut log, 1, 4, 0, 600);
        push_many(&mut log, 1, 4, -1, 200);
        log
    }

    #[test]
    fn local_trust_sums_ratings() {
        let s = local_trust(&scenario_a());
        let alice = UserId(1).index();
        assert_eq!(s[(alice, UserId(2).index())], 1.0);
        assert_eq!(s[(alice, UserId(3).index())], 9.0);
        assert_eq!(s[(alice, UserId(4).index())], -900.0);

        let s = local_trust(&scenario_b());
        assert_eq!(s[(alice, UserId(4).index())], 0.0);

        let s = local_trust(&TransactionLog::new(3));
        assert!(s.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn normalization_cannot_distinguish_the_scenarios() {
        let alice = UserId(1).index();
        for log in [scenario_a(), scenario_b()] {
            let a = normalize(&local_trust(&log));
            assert!((a[(alice, UserId(2).index())] - 0.1).abs() < 1e-15);
            assert!((a[(alice, UserId(3).index())] - 0.9).abs() < 1e-15);
            assert_eq!(a[(alice, UserId(4).index())], 0.0);
        }
    }

    #[test]
    fn all_negative_row_falls_back_to_uniform() {
        let mut log = TransactionLog::new(4);
        push_many(&mut log, 1, 2, -1, 3);
        push_many(&mut log, 1, 3, -1, 1);
        let a = normalize(&local_trust(&log));
        for j in 0..4 {
            assert!((a[(0, j)] - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn rating_scale_invariance_of_normalization() {
        // doubling every rating count of one rater leaves its row unchanged
        let mut log = TransactionLog::new(3);
        push_many(&mut log, 1, 2, 1, 4);
        push_many(&mut log, 1, 3, 1, 12);
        let base = normalize(&local_trust(&log));
        let mut doubled = TransactionLog::new(3);
        push_many(&mut doubled, 1, 2, 1, 8);
        push_many(&mut doubled, 1, 3, 1, 24);
        let scaled = normalize(&local_trust(&doubled));
        assert_eq!(base, scaled);
    }

    #[test]
    fn negative_information_blindness() {
        // adding negative ratings where the sum stays ≤ 0 never changes a
        let mut log = TransactionLog::new(3);
        push_many(&mut log, 1, 2, 1, 5);
        push_many(&mut log, 1, 3, -1, 2);
        let base = normalize(&local_trust(&log));
        push_many(&mut log, 1, 3, -1, 50);
        let more_negative = normalize(&local_trust(&log));
        assert_eq!(base, more_negative);
    }

    #[test]
    fn eigentrust_alpha_zero_returns_p() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let p = vec![0.3, 0.7];
        let r = eigentrust_solve(&a, &p, 0.0, 1e-12).unwrap();
        assert_eq!(r, p);
    }

    #[test]
    fn eigentrust_symmetric_stationary_distribution() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let p = vec![0.5, 0.5];
        let r = eigentrust_solve(&a, &p, 1.0, 1e-12).unwrap();
        assert!((r[0] - 0.5).abs() < 1e-12);
        assert!((r[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn row_stochastic_rows_preserve_total_mass() {
        let mut log = TransactionLog::new(4);
        push_many(&mut log, 1, 2, 1, 2);
        push_many(&mut log, 2, 3, 1, 1);
        push_many(&mut log, 3, 4, 1, 5);
        push_many(&mut log, 4, 1, 1, 3);
        let a = normalize(&local_trust(&log));
        let p = vec![0.25; 4];
        let r = eigentrust_solve(&a, &p, 0.85, 1e-13).unwrap();
        let total: f64 = r.iter().sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn eigentrust_validates_p() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(eigentrust_solve(&a, &[0.5, 0.4], 0.5, 1e-12).is_err());
        assert!(eigentrust_solve(&a, &[-0.5, 1.5], 0.5, 1e-12).is_err());
        assert!(eigentrust_solve(&a, &[0.5], 0.5, 1e-12).is_err());
    }
}
