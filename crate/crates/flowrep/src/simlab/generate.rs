//! Random marketplace instances and the hand-crafted diagonal toy scenario.
//!
//! The generator draws an intrinsic trustworthiness τ_i per user from a
//! triangular density on [0, 1] peaking at `tau_max`, fills exactly
//! `⌊fill·(n²-n)⌋` distinct judged pairs chosen uniformly, and sets each
//! judged entry uniformly in `[τ_x - noise, τ_x + noise]` clipped to [0, 1].
//! Everything else keeps the neutral 0.5 and the diagonal stays 0.
//!
//! Randomness comes from a ChaCha8 stream seeded per instance, so every
//! matrix is reproducible from its seed alone.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::EvidenceMatrix;
use crate::solver::StartVector;

/// Parameters of the random instance generator.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    /// Peak of the triangular trustworthiness density.
    pub tau_max: f64,
    /// Fraction of off-diagonal cells overwritten by simulated interactions.
    pub fill: f64,
    /// Half-width of the judgment noise around τ_x.
    pub noise: f64,
    pub seed: u64,
}

impl GeneratorConfig {
    /// Standard marketplace defaults: tau_max 0.6, fill 0.3, noise 0.1.
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            tau_max: 0.6,
            fill: 0.3,
            noise: 0.1,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidInstance(format!(
                "generator needs n ≥ 2, got {}",
                self.n
            )));
        }
        if !(self.tau_max > 0.0 && self.tau_max < 1.0) {
            return Err(Error::InvalidInstance(format!(
                "tau_max {} outside (0,1)",
                self.tau_max
            )));
        }
        if !(self.fill > 0.0 && self.fill < 1.0) {
            return Err(Error::InvalidInstance(format!(
                "fill {} outside (0,1)",
                self.fill
            )));
        }
        if !(self.noise.is_finite() && (0.0..1.0).contains(&self.noise)) {
            return Err(Error::InvalidInstance(format!(
                "noise {} outside [0,1)",
                self.noise
            )));
        }
        Ok(())
    }
}

/// Inverse-CDF sample of the triangular density on [0, 1] with mode `peak`.
pub fn sample_triangular(u: f64, peak: f64) -> f64 {
    if u <= peak {
        (u * peak).sqrt()
    } else {
        1.0 - ((1.0 - u) * (1.0 - peak)).sqrt()
    }
}

/// Generates one random marketplace evidence matrix.
pub fn gen_matrix(cfg: &GeneratorConfig) -> Result<EvidenceMatrix> {
    cfg.validate()?;
    let n = cfg.n;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let taus: Vec<f64> = (0..n)
        .map(|_| sample_triangular(rng.random::<f64>(), cfg.tau_max))
        .collect();

    let mut entries = DMatrix::from_element(n, n, 0.5);
    for i in 0..n {
        entries[(i, i)] = 0.0;
    }

    // exactly ⌊fill·(n²-n)⌋ distinct ordered pairs via a partial shuffle
    let total = n * n - n;
    let count = (cfg.fill * total as f64).floor() as usize;
    let mut pair_indices: Vec<u32> = (0..total as u32).collect();
    for a in 0..count {
        let b = rng.random_range(a..total);
        pair_indices.swap(a, b);
    }
    for &idx in &pair_indices[..count] {
        let idx = idx as usize;
        let x = idx / (n - 1);
        let off = idx % (n - 1);
        let y = if off >= x { off + 1 } else { off };
        let lo = (taus[x] - cfg.noise).max(0.0);
        let hi = (taus[x] + cfg.noise).min(1.0);
        entries[(x, y)] = lo + rng.random::<f64>() * (hi - lo);
    }
    EvidenceMatrix::from_matrix(entries)
}

/// Parameters of the scenario tailored to make the diagonal stand out:
/// one broadly trusted user, everyone else at the ε floor.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ToyScenarioConfig {
    pub n: usize,
    /// Small positive constant; enforced ≤ 0.01.
    pub epsilon: f64,
    /// Order-1 factor for the start values of the rest.
    pub sigma: f64,
    /// Everyone's opinion of user 1.
    pub b: f64,
    /// Diagonal self-rating.
    pub zeta: f64,
    /// Start value of user 1.
    pub s1: f64,
}

impl ToyScenarioConfig {
    fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidInstance(format!(
                "toy scenario needs n ≥ 3, got {}",
                self.n
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 0.01) {
            return Err(Error::InvalidInstance(format!(
                "epsilon {} outside (0, 0.01]",
                self.epsilon
            )));
        }
        if !(self.sigma > 0.0 && self.sigma * self.epsilon <= 1.0) {
            return Err(Error::InvalidInstance(format!(
                "sigma {} must be positive with sigma·epsilon ≤ 1",
                self.sigma
            )));
        }
        for (name, v) in [("b", self.b), ("zeta", self.zeta), ("s1", self.s1)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidInstance(format!("{name} {v} outside [0,1]")));
            }
        }
        Ok(())
    }
}

/// Builds the toy instance: first row `b` off-diagonal, all other
/// off-diagonal entries ε, diagonal ζ, and `s = (s1, σε, …, σε)`.
pub fn toy_scenario(cfg: &ToyScenarioConfig) -> Result<(EvidenceMatrix, StartVector)> {
    cfg.validate()?;
    let n = cfg.n;
    let entries = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            cfg.zeta
        } else if i == 0 {
            cfg.b
        } else {
            cfg.epsilon
        }
    });
    let a = EvidenceMatrix::from_matrix_with_diagonal(entries)?;
    let mut s = vec![cfg.sigma * cfg.epsilon; n];
    s[0] = cfg.s1;
    Ok((a, StartVector::new(s)?))
}
