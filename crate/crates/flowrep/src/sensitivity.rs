//! First-order response of the reputation vector to evidence perturbations.
//!
//! Differentiating the fixed-point equation at a solution (α, ℓ, r) gives
//!
//! ```text
//! ∂r_x/∂A_zy = α · E_xz · r_y,    E = [ℓ·I − α·A + (α/ℓ)·A·r·eᵀ]⁻¹
//! ```
//!
//! so one dense inversion yields every derivative. Two consequences drive
//! the attack analysis: the effect of a manipulation is proportional to the
//! manipulator's own reputation `r_y`, and an attacker targeting `x` can
//! rank third-party channels `z` by `|E_xz|` — pushing `A_z,attacker` up
//! when `E_xz < 0` and down otherwise.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::EvidenceMatrix;
use crate::solver::ReputationResult;

/// The inverse matrix E of the linear-response equation, together with the
/// solution context it was computed from.
#[derive(Debug, Clone)]
pub struct InfluenceMatrix {
    e: DMatrix<f64>,
    alpha: f64,
    ell: f64,
    r: Vec<f64>,
}

impl InfluenceMatrix {
    pub fn n(&self) -> usize {
        self.r.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn reputation(&self) -> &[f64] {
        &self.r
    }

    /// Matrix element `E_xz`.
    pub fn entry(&self, x: usize, z: usize) -> f64 {
        self.e[(x, z)]
    }

    /// `∂r_x/∂A_zy = α·E_xz·r_y`.
    pub fn derivative(&self, x: usize, z: usize, y: usize) -> f64 {
        self.alpha * self.e[(x, z)] * self.r[y]
    }

    /// E dumped as CSV for inspection.
    pub fn to_csv_string(&self) -> String {
        use std::fmt::Write as _;
        let n = self.n();
        let mut out = String::new();
        for x in 0..n {
            for z in 0..n {
                if z > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", self.e[(x, z)]);
            }
            out.push('\n');
        }
        out
    }
}

/// Computes E by one dense factorization of `ℓI − αA + (α/ℓ)·(A·r)·eᵀ`.
///
/// `result` must be a converged solution for `(a, s, alpha)`; at a valid
/// solution the bracketed matrix is nonsingular.
pub fn influence_matrix(
    a: &EvidenceMatrix,
    result: &ReputationResult,
    alpha: f64,
) -> Result<InfluenceMatrix> {
    let n = a.n();
    if result.r.len() != n {
        return Err(Error::InvalidInstance(format!(
            "solution has length {} but matrix is {n}x{n}",
            result.r.len()
        )));
    }
    let ell = result.ell;
    if !(ell.is_finite() && ell > 0.0) {
        return Err(Error::InvalidInstance(format!(
            "solution norm ℓ = {ell} must be positive"
        )));
    }
    let m = a.matrix();
    let ar = m * DVector::from_column_slice(&result.r);
    let mut system = DMatrix::from_fn(n, n, |i, j| -alpha * m[(i, j)] + (alpha / ell) * ar[i]);
    for i in 0..n {
        system[(i, i)] += ell;
    }
    let norm_estimate = system.norm();
    match system.try_inverse() {
        Some(e) => Ok(InfluenceMatrix {
            e,
            alpha,
            ell,
            r: result.r.clone(),
        }),
        None => Err(Error::NumericalFailure(format!(
            "linear-response matrix is singular (‖M‖ ≈ {norm_estimate:.3e}); \
             was the solution converged?"
        ))),
    }
}

/// Direction an attacker should push `A_z,attacker` to harm the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PushDirection {
    Increase,
    Decrease,
}

/// One ranked indirect-attack channel.
#[derive(Debug, Clone, Serialize)]
pub struct AttackChannel {
    /// The user z whose column-entry `A_z,attacker` the attacker manipulates.
    pub z: usize,
    pub sign: PushDirection,
    pub magnitude: f64,
}

/// The k strongest channels for attacker `y` against target `x`: users z
/// (z ≠ y, the target itself included) ranked by `|E_xz|`, each annotated
/// with the harmful direction. Asking for more than n−1 channels truncates.
pub fn rank_attack_channels(
    influence: &InfluenceMatrix,
    target: usize,
    attacker: usize,
    k: usize,
) -> Result<Vec<AttackChannel>> {
    let n = influence.n();
    if target >= n || attacker >= n {
        return Err(Error::InvalidInstance(format!(
            "target {target} / attacker {attacker} outside 0..{n}"
        )));
    }
    if target == attacker {
        return Err(Error::InvalidInstance(
            "target and attacker must differ".into(),
        ));
    }
    let mut channels: Vec<AttackChannel> = (0..n)
        .filter(|&z| z != attacker)
        .map(|z| {
            let e = influence.entry(target, z);
            AttackChannel {
                z,
                sign: if e < 0.0 {
                    PushDirection::Increase
                } else {
                    PushDirection::Decrease
                },
                magnitude: e.abs(),
            }
        })
        .collect();
    channels.sort_by(|a, b| {
        b.magnitude
            .partial_cmp(&a.magnitude)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.z.cmp(&b.z))
    });
    channels.truncate(k);
    Ok(channels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_iterative, SolverConfig, StartVector};
    use nalgebra::DMatrix;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_instance(n: usize, seed: u64) -> (EvidenceMatrix, StartVector) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = EvidenceMatrix::from_matrix(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else {
                rng.random::<f64>()
            }
        }))
        .unwrap();
        let s = StartVector::new((0..n).map(|_| rng.random::<f64>()).collect()).unwrap();
        (a, s)
    }

    #[test]
    fn derivatives_vanish_at_alpha_zero() {
        let (a, s) = random_instance(10, 5);
        let cfg = SolverConfig::new(0.0).unwrap();
        let result = solve_iterative(&a, &s, &cfg).unwrap();
        let influence = influence_matrix(&a, &result, 0.0).unwrap();
        for x in 0..10 {
            for z in 0..10 {
                assert!(influence.entry(x, z).is_finite());
                for y in 0..10 {
                    assert_eq!(influence.derivative(x, z, y), 0.0);
                }
            }
        }
    }

    #[test]
    fn derivatives_scale_linearly_with_attacker_reputation() {
        let (a, s) = random_instance(12, 15);
        let cfg = SolverConfig::new(0.6).unwrap();
        let result = solve_iterative(&a, &s, &cfg).unwrap();
        let influence = influence_matrix(&a, &result, 0.6).unwrap();
        for (x, z) in [(0, 3), (5, 5), (7, 1)] {
            let base = influence.entry(x, z) * 0.6;
            for y in 0..12 {
                let expected = base * result.r[y];
                assert!((influence.derivative(x, z, y) - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_reputation_attacker_has_zero_derivative() {
        // user 3 receives no evidence and no starting value: r_3 = 0
        let n = 5;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j || i == 3 { 0.0 } else { 0.6 })
                    .collect()
            })
            .collect();
        let a = EvidenceMatrix::from_rows(rows).unwrap();
        let s = StartVector::new(vec![1.0, 0.5, 0.5, 0.0, 0.5]).unwrap();
        let cfg = SolverConfig::new(0.7).unwrap();
        let result = solve_iterative(&a, &s, &cfg).unwrap();
        assert_eq!(result.r[3], 0.0);
        let influence = influence_matrix(&a, &result, 0.7).unwrap();
        for x in 0..n {
            for z in 0..n {
                assert_eq!(influence.derivative(x, z, 3), 0.0);
            }
        }
    }

    #[test]
    fn central_difference_validates_the_derivative() {
        let n = 25;
        let (a, s) = random_instance(n, 77);
        let alpha = 0.5;
        let cfg = SolverConfig::new(alpha).unwrap();
        let result = solve_iterative(&a, &s, &cfg).unwrap();
        let influence = influence_matrix(&a, &result, alpha).unwrap();
        let h = 1e-6;
        let mut rng = ChaCha8Rng::seed_from_u64(999);
        for _ in 0..20 {
            let x = rng.random_range(0..n);
            let mut z = rng.random_range(0..n);
            let mut y = rng.random_range(0..n);
            if z == y {
                z = (z + 1) % n;
            }
            if y == z {
                y = (y + 1) % n;
            }
            // keep the perturbed entry off the diagonal and inside [0,1]
            if z == y || a.get(z, y) < h || a.get(z, y) > 1.0 - h {
                continue;
            }
            let fd = {
                let mut up = a.matrix().clone();
                up[(z, y)] += h;
                let mut down = a.matrix().clone();
                down[(z, y)] -= h;
                let rup = solve_iterative(
                    &EvidenceMatrix::from_matrix(up).unwrap(),
                    &s,
                    &cfg,
                )
                .unwrap();
                let rdn = solve_iterative(
                    &EvidenceMatrix::from_matrix(down).unwrap(),
                    &s,
                    &cfg,
                )
                .unwrap();
                (rup.r[x] - rdn.r[x]) / (2.0 * h)
            };
            let predicted = influence.derivative(x, z, y);
            let err = (fd - predicted).abs();
            assert!(
                err <= 1e-4 * predicted.abs() + 1e-10,
                "triple ({x},{z},{y}): fd {fd:.6e} vs predicted {predicted:.6e}"
            );
        }
    }

    #[test]
    fn ranking_edge_cases() {
        let (a, s) = random_instance(6, 123);
        let cfg = SolverConfig::new(0.5).unwrap();
        let result = solve_iterative(&a, &s, &cfg).unwrap();
        let influence = influence_matrix(&a, &result, 0.5).unwrap();

        assert!(rank_attack_channels(&influence, 0, 0, 3).is_err());
        assert!(rank_attack_channels(&influence, 0, 1, 0).unwrap().is_empty());
        // k beyond the candidate count truncates without error
        let all = rank_attack_channels(&influence, 0, 1, 100).unwrap();
        assert_eq!(all.len(), 5);
        // sorted by magnitude
        for pair in all.windows(2) {
            assert!(pair[0].magnitude >= pair[1].magnitude);
        }
    }

    #[test]
    fn two_user_ranking_returns_the_target_channel() {
        let a = EvidenceMatrix::from_rows(vec![vec![0.0, 0.8], vec![0.3, 0.0]]).unwrap();
        let s = StartVector::new(vec![0.6, 0.6]).unwrap();
        let cfg = SolverConfig::new(0.5).unwrap();
        let result = solve_iterative(&a, &s, &cfg).unwrap();
        let influence = influence_matrix(&a, &result, 0.5).unwrap();
        let channels = rank_attack_channels(&influence, 0, 1, 3).unwrap();
        assert_eq!(channels.len(), 1);
        assert_eq!(channels[0].z, 0);
        let expected_sign = if influence.entry(0, 0) < 0.0 {
            PushDirection::Increase
        } else {
            PushDirection::Decrease
        };
        assert_eq!(channels[0].sign, expected_sign);
    }
}
