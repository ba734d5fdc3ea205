//! Reputation solvers for the implicit fixed-point metric
//!
//! ```text
//! r = (1 - α)·s + α·A·r / (eᵀr)
//! ```
//!
//! Two routes compute the same (provably unique) solution:
//!
//! - [`solve_iterative`] applies the normalized update until successive
//!   iterates differ by less than δ in the 1-norm;
//! - [`solve_direct`] reduces the system to the scalar equation
//!   `f(ℓ) = (1-α)·eᵀ(ℓ·I - αA)⁻¹·s = 1`, whose unique root ℓ* lies in
//!   `(α·λ_max, n]` where `f` is strictly decreasing, then substitutes
//!   `r = (1-α)(I - (α/ℓ*)A)⁻¹ s`.
//!
//! The endpoints have closed forms: α = 0 gives `r = s`, and α = 1 gives the
//! Perron solution `r = λ_max·v_max/(eᵀv_max)` (independent of `s`).
//!
//! A diagonal shift `A → A + ζ·I` rescales the solution exactly by
//! `1 + αζ/ℓ₀` ([`diagonal_shift_predict`]), which both the self-reference
//! experiments and the α = 1 iterative path rely on.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::EvidenceMatrix;

/// Iteration budget applied when the caller does not override it.
pub const DEFAULT_MAX_ITERATIONS: usize = 1000;

/// Per-user convergence budget; the default 1-norm threshold is
/// `n * PER_USER_DELTA`, matching machine-precision accuracy per component.
pub const PER_USER_DELTA: f64 = 1e-15;

/// Diagonal shift applied inside power iteration so that periodic (e.g.
/// bipartite-like) irreducible matrices cannot oscillate. Subtracted from
/// the returned eigenvalue.
const PRIMITIVITY_SHIFT: f64 = 1e-12;

/// Diagonal shift used by the α = 1 iterative path. The shifted matrix is
/// primitive whenever A is irreducible, and the diagonal-shift law maps the
/// fixed point back exactly, so the value only affects convergence speed.
const ALPHA_ONE_DIAGONAL_SHIFT: f64 = 0.5;

/// Relative offset of the root bracket above α·λ_max.
const BRACKET_EDGE_REL: f64 = 1e-10;

/// Bisection stops once the bracket is narrower than this.
const BISECTION_WIDTH: f64 = 1e-13;

/// Tolerance for the f(n) ≤ 1 guarantee; beyond it the instance is broken.
const F_AT_UPPER_TOL: f64 = 1e-12;

/// Minimum admissible overlap v_maxᵀs. Below it the solution existence
/// argument collapses (possible only for reducible matrices).
const PERRON_OVERLAP_FLOOR: f64 = 1e-14;

/// Overlaps below this trigger a Perron-vector refinement before the floor
/// check, so zero overlaps are not masked by power-iteration residue.
const SUSPICIOUS_OVERLAP: f64 = 1e-8;

/// Reputation norms below this are treated as a collapsed (degenerate) state.
const ELL_FLOOR: f64 = 1e-100;

const SPECTRAL_MAX_ITERATIONS: usize = 20_000;

/// Default residual tolerance for the Perron pair at size n.
pub fn default_spectral_tol(n: usize) -> f64 {
    n as f64 * 1e-13
}

/// Which algorithm [`solve`] dispatches to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Iterative,
    Direct,
}

/// Solver parameters. `delta` defaults to `n · 1e-15` when unset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub alpha: f64,
    delta: Option<f64>,
    pub max_iterations: usize,
    pub method: SolveMethod,
}

impl SolverConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && (0.0..=1.0).contains(&alpha)) {
            return Err(Error::InvalidInstance(format!(
                "alpha {alpha} outside [0,1]"
            )));
        }
        Ok(Self {
            alpha,
            delta: None,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            method: SolveMethod::Iterative,
        })
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidInstance(format!(
                "delta {delta} must be positive"
            )));
        }
        self.delta = Some(delta);
        Ok(self)
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Result<Self> {
        if max_iterations == 0 {
            return Err(Error::InvalidInstance(
                "max_iterations must be positive".into(),
            ));
        }
        self.max_iterations = max_iterations;
        Ok(self)
    }

    pub fn with_method(mut self, method: SolveMethod) -> Self {
        self.method = method;
        self
    }

    /// Convergence threshold resolved for an n-user instance.
    pub fn delta_for(&self, n: usize) -> f64 {
        self.delta.unwrap_or(n as f64 * PER_USER_DELTA)
    }
}

/// Start vector `s`: the central authority's direct-evidence reputations.
/// Every component lies in `[0, 1]` and at least one is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct StartVector(Vec<f64>);

impl StartVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInstance("start vector is empty".into()));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() || !(0.0..=1.0).contains(v) {
                return Err(Error::InvalidInstance(format!(
                    "start value s[{i}] = {v} outside [0,1]"
                )));
            }
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidInstance(
                "start vector must have at least one positive component".into(),
            ));
        }
        Ok(Self(values))
    }

    /// `s = c·e`, the same starting value for everyone.
    pub fn uniform(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    /// `s = (1,…,1,0,…,0)` with `t` pre-trusted users.
    pub fn pretrusted(n: usize, t: usize) -> Result<Self> {
        if t == 0 || t > n {
            return Err(Error::InvalidInstance(format!(
                "pre-trusted count {t} outside [1,{n}]"
            )));
        }
        let mut values = vec![0.0; n];
        values[..t].fill(1.0);
        Self::new(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Parses either a JSON array or a single CSV row.
    pub fn from_str_auto(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        if trimmed.starts_with('[') {
            let values: Vec<f64> = serde_json::from_str(trimmed)?;
            return Self::new(values);
        }
        let values = trimmed
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: 1,
                    message: format!("bad start value {:?}: {e}", f.trim()),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        Self::new(values)
    }
}

/// Perron root and 1-normalized nonnegative Perron vector of A.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralInfo {
    pub lambda_max: f64,
    pub v_max: Vec<f64>,
    /// 1-norm of `A·v_max - λ_max·v_max` at return.
    pub residual: f64,
    pub iterations: usize,
}

/// A solved reputation vector with solver diagnostics.
#[derive(Debug, Clone)]
pub struct ReputationResult {
    pub r: Vec<f64>,
    /// `ℓ = eᵀr`.
    pub ell: f64,
    /// Update count for the iterative route; 0 for the direct route.
    pub iterations: usize,
    /// 1-norm fixed-point residual of the returned vector.
    pub residual: f64,
    /// Root of `f(ℓ) = 1` for the direct route; equals `ell` otherwise.
    pub ell_star: f64,
    pub spectral: Option<SpectralInfo>,
}

impl ReputationResult {
    /// Wire form: `{r, ell, iterations, residual, ell_star, lambda_max}`.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "r": self.r,
            "ell": self.ell,
            "iterations": self.iterations,
            "residual": self.residual,
            "ell_star": self.ell_star,
            "lambda_max": self.spectral.as_ref().map(|s| s.lambda_max),
        })
    }
}

// ---------------------------------------------------------------------------
// Compensated arithmetic helpers
//
// The default δ = n·1e-15 sits at the floating-point noise floor of a plain
// n-term dot product for n in the hundreds. Neumaier-compensated sums keep
// the fixed-point map evaluation accurate enough that the residual check
// measures the solver, not the summation order.
// ---------------------------------------------------------------------------

fn neumaier_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + comp
}

/// Column-major compensated matrix-vector product.
fn matvec_compensated(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let n = m.nrows();
    let mut sum = vec![0.0; n];
    let mut comp = vec![0.0; n];
    for j in 0..m.ncols() {
        let xj = x[j];
        if xj == 0.0 {
            continue;
        }
        let col = m.column(j);
        for i in 0..n {
            let term = col[i] * xj;
            let t = sum[i] + term;
            comp[i] += if sum[i].abs() >= term.abs() {
                (sum[i] - t) + term
            } else {
                (term - t) + sum[i]
            };
            sum[i] = t;
        }
    }
    for i in 0..n {
        sum[i] += comp[i];
    }
    sum
}

fn l1_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// One application of `r ↦ (1-α)s + α·A·r/ℓ`.
fn fixed_point_step(m: &DMatrix<f64>, s: &[f64], alpha: f64, r: &[f64], ell: f64) -> Vec<f64> {
    let g = matvec_compensated(m, r);
    s.iter()
        .zip(g)
        .map(|(&sx, gx)| (1.0 - alpha) * sx + alpha * gx / ell)
        .collect()
}

fn residual_raw(m: &DMatrix<f64>, s: &[f64], alpha: f64, r: &[f64]) -> f64 {
    let ell = neumaier_sum(r);
    if ell <= ELL_FLOOR {
        return f64::INFINITY;
    }
    let image = fixed_point_step(m, s, alpha, r, ell);
    l1_diff(&image, r)
}

/// 1-norm residual of `r` against the fixed-point equation.
pub fn fixed_point_residual(a: &EvidenceMatrix, s: &StartVector, alpha: f64, r: &[f64]) -> f64 {
    residual_raw(a.matrix(), s.as_slice(), alpha, r)
}

// ---------------------------------------------------------------------------
// Spectral radius (power iteration)
// ---------------------------------------------------------------------------

/// Perron root and nonnegative Perron vector of A by power iteration on
/// `A + PRIMITIVITY_SHIFT·I`, started from the uniform vector (which always
/// overlaps the Perron direction). `tol` bounds the 1-norm eigen-residual of
/// the returned pair.
pub fn spectral_radius(a: &EvidenceMatrix, tol: f64) -> Result<SpectralInfo> {
    let n = a.n();
    let start = DVector::from_element(n, 1.0 / n as f64);
    match power_iterate(a.matrix(), start, tol, SPECTRAL_MAX_ITERATIONS) {
        (info, true) => Ok(info),
        (info, false) => Err(Error::SpectralFailure {
            lambda: info.lambda_max,
            residual: info.residual,
            v: info.v_max,
        }),
    }
}

/// Power iteration core; returns the best eigenpair seen and whether the
/// tolerance was met within the budget.
fn power_iterate(
    m: &DMatrix<f64>,
    start: DVector<f64>,
    tol: f64,
    max_iterations: usize,
) -> (SpectralInfo, bool) {
    let mut v = start;
    let mut best = SpectralInfo {
        lambda_max: 0.0,
        v_max: v.as_slice().to_vec(),
        residual: f64::INFINITY,
        iterations: 0,
    };
    for iteration in 1..=max_iterations {
        // w = (A + σI)·v with eᵀv = 1, so eᵀw estimates λ_max + σ
        let mut w = m * &v;
        w.axpy(PRIMITIVITY_SHIFT, &v, 1.0);
        let lambda_shifted = w.sum();
        // residual is shift-free: (A+σI)v - λ'v = Av - (λ'-σ)v
        let residual = w
            .iter()
            .zip(v.iter())
            .map(|(wi, vi)| (wi - lambda_shifted * vi).abs())
            .sum::<f64>();
        if residual < best.residual {
            best = SpectralInfo {
                lambda_max: (lambda_shifted - PRIMITIVITY_SHIFT).max(0.0),
                v_max: v.as_slice().to_vec(),
                residual,
                iterations: iteration,
            };
        }
        if residual <= tol {
            return (best, true);
        }
        w /= lambda_shifted;
        v = w;
    }
    (best, false)
}

// ---------------------------------------------------------------------------
// Iterative method
// ---------------------------------------------------------------------------

/// Fixed-point iteration from `r⁽⁰⁾ = s` with the 1-norm termination test
/// `‖r⁽ᵏ⁺¹⁾ - r⁽ᵏ⁾‖₁ < δ`.
///
/// At exactly α = 1 the recurrence is normalized power iteration, which
/// cycles forever on periodic matrices; the iteration then runs on
/// `A + ζ·I` (primitive whenever A is irreducible) and the diagonal-shift
/// law `r_ζ = (1 + αζ/ℓ₀)·r₀` maps the fixed point back exactly.
pub fn solve_iterative(
    a: &EvidenceMatrix,
    s: &StartVector,
    cfg: &SolverConfig,
) -> Result<ReputationResult> {
    check_dims(a, s)?;
    let n = a.n();
    let alpha = cfg.alpha;
    let delta = cfg.delta_for(n);
    let base = a.matrix();
    let shifted;
    let (work, zeta): (&DMatrix<f64>, f64) = if alpha == 1.0 {
        shifted = add_to_diagonal(base, ALPHA_ONE_DIAGONAL_SHIFT);
        (&shifted, ALPHA_ONE_DIAGONAL_SHIFT)
    } else {
        (base, 0.0)
    };
    let s_slice = s.as_slice();
    let mut r: Vec<f64> = s_slice.to_vec();
    let mut iterations = 0usize;
    // the shifted path terminates against a stricter bar so the corrected
    // vector still meets δ on the original matrix
    let mut delta_eff = if zeta > 0.0 { delta * 0.1 } else { delta };
    loop {
        loop {
            if iterations >= cfg.max_iterations {
                let last = undo_diagonal_shift(&r, alpha, zeta).unwrap_or(r);
                let residual = residual_raw(base, s_slice, alpha, &last);
                return Err(Error::NonConvergence {
                    iterations,
                    residual,
                    last_iterate: last,
                });
            }
            let ell = neumaier_sum(&r);
            if ell <= ELL_FLOOR {
                return Err(Error::DegenerateInstance(
                    "reputation norm collapsed to zero during iteration".into(),
                ));
            }
            let next = fixed_point_step(work, s_slice, alpha, &r, ell);
            let diff = l1_diff(&next, &r);
            r = next;
            iterations += 1;
            if diff < delta_eff {
                break;
            }
        }
        let candidate = undo_diagonal_shift(&r, alpha, zeta)?;
        let residual = residual_raw(base, s_slice, alpha, &candidate);
        if residual < delta {
            let ell = neumaier_sum(&candidate);
            return Ok(ReputationResult {
                r: candidate,
                ell,
                iterations,
                residual,
                ell_star: ell,
                spectral: None,
            });
        }
        delta_eff *= 0.1;
        if delta_eff < f64::MIN_POSITIVE {
            let residual = residual_raw(base, s_slice, alpha, &candidate);
            return Err(Error::NonConvergence {
                iterations,
                residual,
                last_iterate: candidate,
            });
        }
    }
}

fn perron_overlap(spectral: &SpectralInfo, s: &[f64]) -> f64 {
    spectral.v_max.iter().zip(s).map(|(v, sx)| v * sx).sum()
}

fn check_dims(a: &EvidenceMatrix, s: &StartVector) -> Result<()> {
    if a.n() != s.len() {
        return Err(Error::InvalidInstance(format!(
            "matrix is {}x{} but start vector has length {}",
            a.n(),
            a.n(),
            s.len()
        )));
    }
    Ok(())
}

fn add_to_diagonal(m: &DMatrix<f64>, zeta: f64) -> DMatrix<f64> {
    let mut out = m.clone();
    for i in 0..m.nrows() {
        out[(i, i)] += zeta;
    }
    out
}

/// Maps a solution of `A + ζI` back to the solution of `A` via
/// `r₀ = r_ζ / (1 + αζ/ℓ₀)` with `ℓ₀ = ℓ_ζ - αζ`.
fn undo_diagonal_shift(r: &[f64], alpha: f64, zeta: f64) -> Result<Vec<f64>> {
    if zeta == 0.0 {
        return Ok(r.to_vec());
    }
    let ell_shifted = neumaier_sum(r);
    let ell0 = ell_shifted - alpha * zeta;
    if ell0 <= 1e-12 {
        return Err(Error::DegenerateInstance(
            "spectral radius is numerically zero; the α = 1 solution collapses".into(),
        ));
    }
    let k = 1.0 + alpha * zeta / ell0;
    Ok(r.iter().map(|&x| x / k).collect())
}

// ---------------------------------------------------------------------------
// Direct method
// ---------------------------------------------------------------------------

/// Evaluates `f(ℓ) = (1-α)·eᵀ(ℓI - αA)⁻¹·s` with one dense linear solve.
/// Strictly decreasing for ℓ > α·λ_max.
pub fn eval_f(ell: f64, a: &EvidenceMatrix, s: &StartVector, alpha: f64) -> Result<f64> {
    check_dims(a, s)?;
    let x = resolvent_solve(ell, a.matrix(), s.as_slice(), alpha)?;
    Ok((1.0 - alpha) * neumaier_sum(&x))
}

/// Solves `(ℓI - αA)·x = s`.
fn resolvent_solve(ell: f64, m: &DMatrix<f64>, s: &[f64], alpha: f64) -> Result<Vec<f64>> {
    let n = m.nrows();
    let mut system = DMatrix::from_fn(n, n, |i, j| -alpha * m[(i, j)]);
    for i in 0..n {
        system[(i, i)] += ell;
    }
    let rhs = DVector::from_column_slice(s);
    match system.lu().solve(&rhs) {
        Some(x) => Ok(x.as_slice().to_vec()),
        None => Err(Error::NumericalFailure(format!(
            "ℓ = {ell} hit an eigenvalue of αA (singular resolvent)"
        ))),
    }
}

/// `eval_f` with a retry at a minutely perturbed ℓ when the resolvent is
/// exactly singular (ℓ landed on an eigenvalue of αA).
fn eval_f_retry(
    ell: f64,
    m: &DMatrix<f64>,
    s: &[f64],
    alpha: f64,
    lo: f64,
    hi: f64,
) -> Result<(f64, f64)> {
    let mut current = ell;
    let mut last_err = None;
    for attempt in 0..4 {
        match resolvent_solve(current, m, s, alpha) {
            Ok(x) => return Ok((current, (1.0 - alpha) * neumaier_sum(&x))),
            Err(e) => {
                last_err = Some(e);
                let nudge = (hi - lo) * 1e-9 * (attempt + 1) as f64;
                current = (ell + nudge).min(hi);
            }
        }
    }
    Err(last_err.unwrap())
}

/// Direct method: brackets the unique root ℓ* of `f(ℓ) = 1` on
/// `(α·λ_max, n]`, bisects to width 1e-13, and substitutes the root into
/// `r = (1-α)(I - (α/ℓ*)A)⁻¹ s`. Delegates to the closed forms at the
/// α endpoints.
pub fn solve_direct(
    a: &EvidenceMatrix,
    s: &StartVector,
    cfg: &SolverConfig,
) -> Result<ReputationResult> {
    check_dims(a, s)?;
    let n = a.n();
    let alpha = cfg.alpha;
    let delta = cfg.delta_for(n);
    let mut spectral = spectral_radius(a, default_spectral_tol(n))?;
    let s_slice = s.as_slice();
    let mut overlap = perron_overlap(&spectral, s_slice);
    if overlap.abs() <= SUSPICIOUS_OVERLAP {
        // a mathematically-zero overlap shows up as power-iteration residue;
        // sharpen the Perron vector before deciding (dead components decay
        // geometrically, so a refined vector separates zero from tiny)
        let start = DVector::from_column_slice(&spectral.v_max);
        let (refined, _) = power_iterate(a.matrix(), start, 0.0, 4000);
        if refined.residual < spectral.residual {
            spectral = refined;
        }
        overlap = perron_overlap(&spectral, s_slice);
    }
    if overlap <= PERRON_OVERLAP_FLOOR {
        return Err(Error::TheoremViolation(format!(
            "start vector is orthogonal to the Perron direction (v_maxᵀs = {overlap:.3e}); \
             the matrix is reducible in a way that breaks existence"
        )));
    }

    if alpha == 0.0 {
        let r = s_slice.to_vec();
        let ell = neumaier_sum(&r);
        let residual = residual_raw(a.matrix(), s_slice, alpha, &r);
        return Ok(ReputationResult {
            r,
            ell,
            iterations: 0,
            residual,
            ell_star: ell,
            spectral: Some(spectral),
        });
    }
    if alpha == 1.0 {
        return solve_alpha1_with(a, spectral);
    }

    let m = a.matrix();
    let lambda = spectral.lambda_max;
    let mut lo = alpha * lambda * (1.0 + BRACKET_EDGE_REL);
    let mut hi = n as f64;
    if lo >= hi {
        return Err(Error::TheoremViolation(format!(
            "bracket collapsed: α·λ_max = {} ≥ n = {n}",
            alpha * lambda
        )));
    }
    let (_, f_hi) = eval_f_retry(hi, m, s_slice, alpha, lo, hi)?;
    if f_hi > 1.0 + F_AT_UPPER_TOL {
        return Err(Error::TheoremViolation(format!(
            "f(n) = {f_hi} > 1; the instance violates the existence bound"
        )));
    }
    let (lo_used, mut f_lo) = eval_f_retry(lo, m, s_slice, alpha, lo, hi)?;
    lo = lo_used;
    if f_lo <= 1.0 {
        // pole squeezed below representable spacing; tighten toward α·λ_max
        for shrink in [1e-12, 1e-14] {
            lo = alpha * lambda * (1.0 + shrink);
            let (lo_used, f) = eval_f_retry(lo, m, s_slice, alpha, lo, hi)?;
            lo = lo_used;
            f_lo = f;
            if f_lo > 1.0 {
                break;
            }
        }
        if f_lo <= 1.0 {
            return Err(Error::NumericalFailure(format!(
                "f({lo}) = {f_lo} ≤ 1 arbitrarily close to the bracket edge; \
                 root not resolvable at f64 precision"
            )));
        }
    }

    while hi - lo > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // f64 spacing exhausted
        }
        let (mid_used, f_mid) = eval_f_retry(mid, m, s_slice, alpha, lo, hi)?;
        if f_mid > 1.0 {
            lo = mid_used;
        } else {
            hi = mid_used;
        }
    }
    let ell_star = 0.5 * (lo + hi);

    // final substitution: r = (1-α)·ℓ*·(ℓ*I - αA)⁻¹ s
    let x = resolvent_solve(ell_star, m, s_slice, alpha)?;
    let mut r: Vec<f64> = x.iter().map(|&v| (1.0 - alpha) * ell_star * v).collect();
    let mut residual = residual_raw(m, s_slice, alpha, &r);
    // absorb the rounding noise of the substitution; the root and the
    // fixed point coincide, so a couple of contraction steps settle the
    // last ~1e-13 without moving the solution
    let mut polish = 0;
    while residual >= delta && polish < 4 {
        let ell = neumaier_sum(&r);
        if ell <= ELL_FLOOR {
            break;
        }
        r = fixed_point_step(m, s_slice, alpha, &r, ell);
        residual = residual_raw(m, s_slice, alpha, &r);
        polish += 1;
    }
    if residual >= delta {
        return Err(Error::NonConvergence {
            iterations: polish,
            residual,
            last_iterate: r,
        });
    }
    let ell = neumaier_sum(&r);
    Ok(ReputationResult {
        r,
        ell,
        iterations: 0,
        residual,
        ell_star,
        spectral: Some(spectral),
    })
}

/// Closed-form α = 1 solution `r = λ_max·v_max/(eᵀv_max)`, `ℓ = λ_max`.
/// Deliberately independent of any start vector.
pub fn solve_alpha1(a: &EvidenceMatrix) -> Result<ReputationResult> {
    let spectral = spectral_radius(a, default_spectral_tol(a.n()))?;
    solve_alpha1_with(a, spectral)
}

fn solve_alpha1_with(a: &EvidenceMatrix, spectral: SpectralInfo) -> Result<ReputationResult> {
    let n = a.n();
    let lambda = spectral.lambda_max;
    if lambda <= 1e-12 {
        return Err(Error::DegenerateInstance(
            "spectral radius is numerically zero; the α = 1 solution collapses".into(),
        ));
    }
    let vsum = neumaier_sum(&spectral.v_max);
    let mut r: Vec<f64> = spectral.v_max.iter().map(|&v| lambda * v / vsum).collect();
    // settle to the floating-point fixed point of the normalized update
    let uniform = StartVector::uniform(n, 1.0).expect("uniform start");
    let target = n as f64 * PER_USER_DELTA;
    let mut residual = residual_raw(a.matrix(), uniform.as_slice(), 1.0, &r);
    let mut polish = 0;
    while residual >= target && polish < 8 {
        let ell = neumaier_sum(&r);
        if ell <= ELL_FLOOR {
            break;
        }
        r = fixed_point_step(a.matrix(), uniform.as_slice(), 1.0, &r, ell);
        residual = residual_raw(a.matrix(), uniform.as_slice(), 1.0, &r);
        polish += 1;
    }
    let ell = neumaier_sum(&r);
    Ok(ReputationResult {
        r,
        ell,
        iterations: 0,
        residual,
        ell_star: ell,
        spectral: Some(spectral),
    })
}

/// Dispatches on `cfg.method`.
pub fn solve(a: &EvidenceMatrix, s: &StartVector, cfg: &SolverConfig) -> Result<ReputationResult> {
    match cfg.method {
        SolveMethod::Iterative => solve_iterative(a, s, cfg),
        SolveMethod::Direct => solve_direct(a, s, cfg),
    }
}

// ---------------------------------------------------------------------------
// Alternative metric and diagnostic approximations
// ---------------------------------------------------------------------------

/// Alternative metric that removes the remaining self-reference through the
/// norm: `t_x = (1-α)s_x + α·Σ_{y≠x} A_xy·t_y / Σ_{z≠x} t_z`. Solved by the
/// analogous fixed-point iteration from `t⁽⁰⁾ = s`. Comparison diagnostics
/// only; the main metric is preferred.
pub fn solve_alternative_t(
    a: &EvidenceMatrix,
    s: &StartVector,
    alpha: f64,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    check_dims(a, s)?;
    let n = a.n();
    if n < 3 {
        return Err(Error::InvalidInstance(format!(
            "alternative metric needs n ≥ 3, got {n}"
        )));
    }
    if !(alpha.is_finite() && (0.0..=1.0).contains(&alpha)) {
        return Err(Error::InvalidInstance(format!(
            "alpha {alpha} outside [0,1]"
        )));
    }
    let delta = cfg.delta_for(n);
    let m = a.matrix();
    let s_slice = s.as_slice();
    let mut t: Vec<f64> = s_slice.to_vec();
    let mut iterations = 0usize;
    loop {
        if iterations >= cfg.max_iterations {
            let residual = alternative_residual(m, s_slice, alpha, &t);
            return Err(Error::NonConvergence {
                iterations,
                residual,
                last_iterate: t,
            });
        }
        let next = alternative_step(m, s_slice, alpha, &t)?;
        let diff = l1_diff(&next, &t);
        t = next;
        iterations += 1;
        if diff < delta {
            return Ok(t);
        }
    }
}

fn alternative_step(m: &DMatrix<f64>, s: &[f64], alpha: f64, t: &[f64]) -> Result<Vec<f64>> {
    let n = t.len();
    let at = matvec_compensated(m, t);
    let ell = neumaier_sum(t);
    let mut next = Vec::with_capacity(n);
    for x in 0..n {
        let numerator = at[x] - m[(x, x)] * t[x];
        let denominator = ell - t[x];
        if denominator <= ELL_FLOOR {
            return Err(Error::DegenerateInstance(format!(
                "complement sum Σ_{{z≠{x}}} t_z vanished"
            )));
        }
        next.push((1.0 - alpha) * s[x] + alpha * numerator / denominator);
    }
    Ok(next)
}

fn alternative_residual(m: &DMatrix<f64>, s: &[f64], alpha: f64, t: &[f64]) -> f64 {
    match alternative_step(m, s, alpha, t) {
        Ok(image) => l1_diff(&image, t),
        Err(_) => f64::INFINITY,
    }
}

/// Exact solution for `A + ζ·I` given the solution for `A`:
/// `r_ζ = (1 + αζ/ℓ₀)·r₀`.
pub fn diagonal_shift_predict(r0: &[f64], ell0: f64, alpha: f64, zeta: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&zeta) {
        return Err(Error::InvalidInstance(format!("zeta {zeta} outside [0,1]")));
    }
    if ell0 <= 0.0 {
        return Err(Error::InvalidInstance(format!(
            "ell0 {ell0} must be positive"
        )));
    }
    let k = 1.0 + alpha * zeta / ell0;
    Ok(r0.iter().map(|&x| k * x).collect())
}

/// Linear interpolation between the α = 0 and α = 1 solutions:
/// `(1-α)·s + α·λ_max·v_max/(eᵀv_max)`. A diagnostic approximation of the
/// solver output, not a solver.
pub fn linear_approx(s: &StartVector, alpha: f64, spectral: &SpectralInfo) -> Vec<f64> {
    let vsum = neumaier_sum(&spectral.v_max);
    s.as_slice()
        .iter()
        .zip(&spectral.v_max)
        .map(|(&sx, &vx)| (1.0 - alpha) * sx + alpha * spectral.lambda_max * vx / vsum)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn permutation_2x2() -> EvidenceMatrix {
        EvidenceMatrix::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    fn constant_offdiag(n: usize, c: f64) -> EvidenceMatrix {
        EvidenceMatrix::from_matrix(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else {
                c
            }
        }))
        .unwrap()
    }

    fn random_matrix(n: usize, seed: u64) -> EvidenceMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        EvidenceMatrix::from_matrix(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else {
                rng.random::<f64>()
            }
        }))
        .unwrap()
    }

    fn random_start(n: usize, seed: u64) -> StartVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        StartVector::new((0..n).map(|_| rng.random::<f64>()).collect()).unwrap()
    }

    #[test]
    fn spectral_of_permutation_matrix() {
        let info = spectral_radius(&permutation_2x2(), 1e-12).unwrap();
        assert!((info.lambda_max - 1.0).abs() < 1e-10);
        assert!((info.v_max[0] - 0.5).abs() < 1e-10);
        assert!((info.v_max[1] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn spectral_of_constant_matrix() {
        let n = 4;
        let info = spectral_radius(&constant_offdiag(n, 0.5), 1e-12).unwrap();
        assert!((info.lambda_max - 0.5 * (n as f64 - 1.0)).abs() < 1e-10);
        for &v in &info.v_max {
            assert!((v - 0.25).abs() < 1e-10);
        }
    }

    #[test]
    fn spectral_matches_dense_eigensolver() {
        // independent oracle: full eigensystem via Schur decomposition
        let a = random_matrix(50, 7);
        let info = spectral_radius(&a, default_spectral_tol(50)).unwrap();
        let radius = a
            .matrix()
            .clone()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        assert!(
            (info.lambda_max - radius).abs() < 1e-9,
            "power {} vs eigensolver {}",
            info.lambda_max,
            radius
        );
        // returned pair satisfies its own residual contract
        let av = a.matrix() * DVector::from_column_slice(&info.v_max);
        let resid: f64 = av
            .iter()
            .zip(&info.v_max)
            .map(|(x, v)| (x - info.lambda_max * v).abs())
            .sum();
        assert!(resid <= default_spectral_tol(50));
    }

    #[test]
    fn iterative_alpha_zero_returns_s_in_one_iteration() {
        let a = random_matrix(10, 3);
        let s = random_start(10, 4);
        let cfg = SolverConfig::new(0.0).unwrap();
        let res = solve_iterative(&a, &s, &cfg).unwrap();
        assert_eq!(res.iterations, 1);
        assert_eq!(res.r, s.as_slice());
        assert_eq!(res.residual, 0.0);
    }

    #[test]
    fn iterative_alpha_one_permutation_matrix() {
        // periodic matrix: the α=1 path must still land on the Perron solution
        let a = permutation_2x2();
        let s = StartVector::new(vec![1.0, 0.0]).unwrap();
        let cfg = SolverConfig::new(1.0).unwrap();
        let res = solve_iterative(&a, &s, &cfg).unwrap();
        assert!((res.r[0] - 0.5).abs() < 1e-12);
        assert!((res.r[1] - 0.5).abs() < 1e-12);
        assert!((res.ell - 1.0).abs() < 1e-12);
    }

    #[test]
    fn iterative_matches_fixed_point_contract() {
        let n = 60;
        let a = random_matrix(n, 11);
        let s = random_start(n, 12);
        let cfg = SolverConfig::new(0.5).unwrap();
        let res = solve_iterative(&a, &s, &cfg).unwrap();
        let delta = cfg.delta_for(n);
        assert!(res.residual < delta, "residual {}", res.residual);
        assert!(res.iterations <= 25, "iterations {}", res.iterations);
        assert!(res.r.iter().all(|&x| (0.0..=1.0).contains(&x)));
        assert!((res.ell - res.r.iter().sum::<f64>()).abs() < 1e-9);
    }

    #[test]
    fn direct_alpha_zero_reproduces_start_vector() {
        let a = random_matrix(8, 21);
        let s = random_start(8, 22);
        let cfg = SolverConfig::new(0.0)
            .unwrap()
            .with_method(SolveMethod::Direct);
        let res = solve_direct(&a, &s, &cfg).unwrap();
        assert_eq!(res.r, s.as_slice());
        let ell: f64 = s.as_slice().iter().sum();
        assert!((res.ell_star - ell).abs() < 1e-12);
    }

    #[test]
    fn direct_and_iterative_agree() {
        let n = 40;
        for seed in [1u64, 2, 3] {
            let a = random_matrix(n, seed);
            let s = random_start(n, seed + 100);
            for alpha in [0.1, 0.5, 0.9] {
                let cfg = SolverConfig::new(alpha).unwrap();
                let it = solve_iterative(&a, &s, &cfg).unwrap();
                let di = solve_direct(&a, &s, &cfg.clone().with_method(SolveMethod::Direct))
                    .unwrap();
                let diff = l1_diff(&it.r, &di.r);
                assert!(diff < 1e-10, "alpha {alpha} seed {seed} diff {diff}");
                let lambda = di.spectral.as_ref().unwrap().lambda_max;
                assert!(di.ell_star > alpha * lambda && di.ell_star <= n as f64);
            }
        }
    }

    #[test]
    fn direct_alpha_one_delegates_to_perron_solution() {
        let a = random_matrix(30, 9);
        let s = random_start(30, 10);
        let cfg = SolverConfig::new(1.0)
            .unwrap()
            .with_method(SolveMethod::Direct);
        let direct = solve_direct(&a, &s, &cfg).unwrap();
        let closed = solve_alpha1(&a).unwrap();
        assert!(l1_diff(&direct.r, &closed.r) < 1e-12);
    }

    #[test]
    fn eval_f_alpha_zero_closed_form() {
        let a = random_matrix(6, 31);
        let s = random_start(6, 32);
        let total: f64 = s.as_slice().iter().sum();
        let f = eval_f(total, &a, &s, 0.0).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
        let f2 = eval_f(2.0 * total, &a, &s, 0.0).unwrap();
        assert!((f2 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn eval_f_decreases_and_decays() {
        let n = 20;
        let a = random_matrix(n, 41);
        let s = random_start(n, 42);
        let alpha = 0.7;
        let lambda = spectral_radius(&a, 1e-11).unwrap().lambda_max;
        let mut previous = f64::INFINITY;
        let mut ell = alpha * lambda + 0.05;
        while ell < 4.0 * n as f64 {
            let f = eval_f(ell, &a, &s, alpha).unwrap();
            assert!(f < previous, "f must strictly decrease");
            assert!(f > 0.0);
            previous = f;
            ell *= 1.4;
        }
        assert!(previous < 0.2, "f must decay towards 0, got {previous}");
    }

    #[test]
    fn eval_f_blows_up_at_bracket_edge() {
        let a = random_matrix(15, 51);
        let s = random_start(15, 52);
        let alpha = 0.6;
        let lambda = spectral_radius(&a, 1e-11).unwrap().lambda_max;
        let mut last = 0.0;
        for k in 1..=8 {
            let ell = alpha * lambda * (1.0 + 10f64.powi(-k));
            let f = eval_f(ell, &a, &s, alpha).unwrap();
            assert!(f > last, "f must grow approaching the pole");
            last = f;
        }
        assert!(last > 1e3, "f should exceed any fixed bound, got {last}");
    }

    #[test]
    fn alpha1_closed_forms() {
        let res = solve_alpha1(&permutation_2x2()).unwrap();
        assert!((res.r[0] - 0.5).abs() < 1e-12);
        assert!((res.ell - 1.0).abs() < 1e-12);

        let res = solve_alpha1(&constant_offdiag(4, 0.5)).unwrap();
        assert!((res.ell - 1.5).abs() < 1e-10);
        for &x in &res.r {
            assert!((x - 0.375).abs() < 1e-10);
        }
    }

    #[test]
    fn alpha1_matches_iterative_at_alpha_one() {
        let n = 80;
        let a = random_matrix(n, 61);
        let s = random_start(n, 62);
        let cfg = SolverConfig::new(1.0).unwrap();
        let it = solve_iterative(&a, &s, &cfg).unwrap();
        let closed = solve_alpha1(&a).unwrap();
        assert!(l1_diff(&it.r, &closed.r) < 1e-8);
    }

    #[test]
    fn alternative_metric_alpha_zero_returns_s() {
        let a = random_matrix(5, 71);
        let s = random_start(5, 72);
        let cfg = SolverConfig::new(0.0).unwrap();
        let t = solve_alternative_t(&a, &s, 0.0, &cfg).unwrap();
        assert_eq!(t, s.as_slice());
    }

    #[test]
    fn alternative_metric_needs_three_users() {
        let a = permutation_2x2();
        let s = StartVector::new(vec![1.0, 0.5]).unwrap();
        let cfg = SolverConfig::new(0.5).unwrap();
        assert!(solve_alternative_t(&a, &s, 0.5, &cfg).is_err());
    }

    #[test]
    fn shift_prediction_and_resolve_agree() {
        let n = 30;
        let a = random_matrix(n, 81);
        let s = random_start(n, 82);
        let alpha = 0.5;
        let cfg = SolverConfig::new(alpha).unwrap();
        let base = solve_iterative(&a, &s, &cfg).unwrap();
        assert_eq!(
            diagonal_shift_predict(&base.r, base.ell, alpha, 0.0).unwrap(),
            base.r
        );
        for zeta in [0.25, 0.5, 1.0] {
            let predicted = diagonal_shift_predict(&base.r, base.ell, alpha, zeta).unwrap();
            let shifted = a.with_diagonal(zeta).unwrap();
            let resolved = solve_iterative(&shifted, &s, &cfg).unwrap();
            let dev = predicted
                .iter()
                .zip(&resolved.r)
                .map(|(p, r)| (p - r).abs())
                .fold(0.0f64, f64::max);
            assert!(dev < 1e-9, "zeta {zeta} deviation {dev}");
        }
        // ζ = 1 changes the norm by exactly α
        let predicted = diagonal_shift_predict(&base.r, base.ell, alpha, 1.0).unwrap();
        let ell1: f64 = predicted.iter().sum();
        assert!((ell1 - base.ell - alpha).abs() < 1e-12);
    }

    #[test]
    fn linear_approx_hits_both_endpoints() {
        let a = random_matrix(12, 91);
        let s = random_start(12, 92);
        let spectral = spectral_radius(&a, 1e-12).unwrap();
        let at_zero = linear_approx(&s, 0.0, &spectral);
        assert_eq!(at_zero, s.as_slice());
        let at_one = linear_approx(&s, 1.0, &spectral);
        let perron = solve_alpha1(&a).unwrap();
        assert!(l1_diff(&at_one, &perron.r) < 1e-9);
    }

    #[test]
    fn permutation_equivariance() {
        let n = 16;
        let a = random_matrix(n, 101);
        let s = random_start(n, 102);
        // a fixed cyclic relabeling
        let perm: Vec<usize> = (0..n).map(|i| (i + 5) % n).collect();
        let pa = EvidenceMatrix::from_matrix(DMatrix::from_fn(n, n, |i, j| {
            a.get(perm[i], perm[j])
        }))
        .unwrap();
        let ps = StartVector::new(perm.iter().map(|&i| s.as_slice()[i]).collect()).unwrap();
        let cfg = SolverConfig::new(0.65).unwrap();
        let base = solve_iterative(&a, &s, &cfg).unwrap();
        let permuted = solve_iterative(&pa, &ps, &cfg).unwrap();
        for i in 0..n {
            assert!((permuted.r[i] - base.r[perm[i]]).abs() < 1e-12);
        }
    }

    #[test]
    fn reducible_matrix_with_orthogonal_start_vector_is_rejected() {
        // two disconnected blocks; the Perron direction lives in the first
        let rows = vec![
            vec![0.0, 0.9, 0.0, 0.0],
            vec![0.9, 0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.5],
            vec![0.0, 0.0, 0.5, 0.0],
        ];
        let a = EvidenceMatrix::from_rows(rows).unwrap();
        let s = StartVector::new(vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let cfg = SolverConfig::new(0.5)
            .unwrap()
            .with_method(SolveMethod::Direct);
        match solve_direct(&a, &s, &cfg) {
            Err(Error::TheoremViolation(_)) => {}
            other => panic!("expected theorem violation, got {other:?}"),
        }
    }

    #[test]
    fn alpha_continuity_at_endpoints() {
        let n = 50;
        let a = random_matrix(n, 111);
        let s = random_start(n, 112);
        let near_zero = solve_iterative(&a, &s, &SolverConfig::new(1e-6).unwrap()).unwrap();
        let max_dev = near_zero
            .r
            .iter()
            .zip(s.as_slice())
            .map(|(r, sx)| (r - sx).abs())
            .fold(0.0f64, f64::max);
        assert!(max_dev < 1e-5, "max deviation from s: {max_dev}");

        let near_one = solve_iterative(&a, &s, &SolverConfig::new(1.0 - 1e-6).unwrap()).unwrap();
        let perron = solve_alpha1(&a).unwrap();
        let max_dev = near_one
            .r
            .iter()
            .zip(&perron.r)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max);
        assert!(max_dev < 1e-5, "max deviation from Perron solution: {max_dev}");
    }

    #[test]
    fn nonconvergence_reports_last_iterate() {
        let a = random_matrix(20, 121);
        let s = random_start(20, 122);
        let cfg = SolverConfig::new(0.9)
            .unwrap()
            .with_max_iterations(2)
            .unwrap();
        match solve_iterative(&a, &s, &cfg) {
            Err(Error::NonConvergence {
                iterations,
                last_iterate,
                ..
            }) => {
                assert_eq!(iterations, 2);
                assert_eq!(last_iterate.len(), 20);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn start_vector_validation() {
        assert!(StartVector::new(vec![0.0, 0.0]).is_err());
        assert!(StartVector::new(vec![1.2, 0.0]).is_err());
        assert!(StartVector::new(vec![]).is_err());
        assert!(StartVector::uniform(3, 0.4).is_ok());
        assert!(StartVector::pretrusted(5, 0).is_err());
        let s = StartVector::pretrusted(5, 2).unwrap();
        assert_eq!(s.as_slice(), &[1.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn start_vector_parses_json_and_csv() {
        let s = StartVector::from_str_auto("[0.5, 0.25, 1.0]").unwrap();
        assert_eq!(s.as_slice(), &[0.5, 0.25, 1.0]);
        let s = StartVector::from_str_auto("0.5, 0.25, 1.0\n").unwrap();
        assert_eq!(s.as_slice(), &[0.5, 0.25, 1.0]);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(-0.1).is_err());
        assert!(SolverConfig::new(1.1).is_err());
        assert!(SolverConfig::new(0.5).unwrap().with_delta(0.0).is_err());
        let cfg = SolverConfig::new(0.5).unwrap();
        assert!((cfg.delta_for(200) - 2e-13).abs() < 1e-25);
    }
}
