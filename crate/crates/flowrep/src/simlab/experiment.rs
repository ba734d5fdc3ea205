//! Seeded experiment sweeps producing tidy, plot-ready data.
//!
//! Every sweep is deterministic: the instance behind each data point is
//! regenerated from a per-trial ChaCha8 stream derived from the base seed,
//! trials are independent (and run in parallel), and results are reduced in
//! a fixed order — so identical `(kind, grid, trials, seed)` inputs yield
//! byte-identical data regardless of thread count.
//!
//! Reports serialize as JSON (with a config echo and wall time) and as tidy
//! CSV with one row per data point:
//!
//! ```text
//! experiment,n,alpha,c,t_pretrusted,m,tau_max,trial,component,metric,value,seed
//! ```

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::EvidenceMatrix;
use crate::simlab::attack::{
    apply_self_promotion, apply_slandering, apply_slandering_direct, apply_slandering_indirect,
    apply_sybil,
};
use crate::simlab::generate::{gen_matrix, GeneratorConfig};
use crate::solver::{
    solve_direct, solve_iterative, SolveMethod, SolverConfig, StartVector,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    MethodComparison,
    AlphaSweep,
    SScalarSweep,
    SPretrustedSweep,
    SelfrefStudy,
    SelfPromotionStudy,
    SlanderingStudy,
    SybilStudy,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::MethodComparison => "method_comparison",
            Self::AlphaSweep => "alpha_sweep",
            Self::SScalarSweep => "s_scalar_sweep",
            Self::SPretrustedSweep => "s_pretrusted_sweep",
            Self::SelfrefStudy => "selfref_study",
            Self::SelfPromotionStudy => "self_promotion_study",
            Self::SlanderingStudy => "slandering_study",
            Self::SybilStudy => "sybil_study",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "method_comparison" => Ok(Self::MethodComparison),
            "alpha_sweep" => Ok(Self::AlphaSweep),
            "s_scalar_sweep" => Ok(Self::SScalarSweep),
            "s_pretrusted_sweep" => Ok(Self::SPretrustedSweep),
            "selfref_study" => Ok(Self::SelfrefStudy),
            "self_promotion_study" => Ok(Self::SelfPromotionStudy),
            "slandering_study" => Ok(Self::SlanderingStudy),
            "sybil_study" => Ok(Self::SybilStudy),
            other => Err(Error::InvalidInstance(format!(
                "unknown experiment kind {other:?}"
            ))),
        }
    }

    fn default_trials(self) -> usize {
        match self {
            Self::MethodComparison => 20,
            Self::AlphaSweep => 50,
            Self::SScalarSweep | Self::SPretrustedSweep => 1,
            Self::SelfrefStudy => 20,
            Self::SelfPromotionStudy | Self::SlanderingStudy => 5,
            Self::SybilStudy => 20,
        }
    }
}

/// Sweep request. `trials` and `n` default to the per-kind study design.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub trials: Option<usize>,
    pub n: Option<usize>,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, seed: u64) -> Self {
        Self {
            kind,
            trials: None,
            n: None,
            seed,
        }
    }

    fn trials(&self) -> usize {
        self.trials.unwrap_or_else(|| self.kind.default_trials())
    }
}

/// One scalar observation; unused dimensions stay empty in the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub n: Option<usize>,
    pub alpha: Option<f64>,
    pub c: Option<f64>,
    pub t_pretrusted: Option<usize>,
    pub m: Option<f64>,
    pub tau_max: Option<f64>,
    pub trial: Option<usize>,
    pub component: Option<usize>,
    pub metric: String,
    pub value: f64,
    /// Seed that regenerates the instance behind this point.
    pub seed: u64,
}

impl DataPoint {
    fn new(metric: &str, value: f64, seed: u64) -> Self {
        Self {
            n: None,
            alpha: None,
            c: None,
            t_pretrusted: None,
            m: None,
            tau_max: None,
            trial: None,
            component: None,
            metric: metric.to_string(),
            value,
            seed,
        }
    }
}

/// A trial the runner had to abandon; the sweep continues without it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialFailure {
    pub context: String,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    /// Fully-resolved configuration for provenance.
    pub config: serde_json::Value,
    pub seed: u64,
    pub points: Vec<DataPoint>,
    pub failures: Vec<TrialFailure>,
    /// Timing metadata; excluded from determinism comparisons.
    pub wall_time_ms: u128,
}

impl ExperimentReport {
    pub fn to_csv_string(&self) -> String {
        let mut out =
            String::from("experiment,n,alpha,c,t_pretrusted,m,tau_max,trial,component,metric,value,seed\n");
        for p in &self.points {
            let _ = write!(out, "{}", self.experiment);
            push_opt(&mut out, p.n);
            push_opt_f(&mut out, p.alpha);
            push_opt_f(&mut out, p.c);
            push_opt(&mut out, p.t_pretrusted);
            push_opt_f(&mut out, p.m);
            push_opt_f(&mut out, p.tau_max);
            push_opt(&mut out, p.trial);
            push_opt(&mut out, p.component);
            let _ = write!(out, ",{},{},{}", p.metric, p.value, p.seed);
            out.push('\n');
        }
        out
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn push_opt(out: &mut String, v: Option<usize>) {
    match v {
        Some(x) => {
            let _ = write!(out, ",{x}");
        }
        None => out.push(','),
    }
}

fn push_opt_f(out: &mut String, v: Option<f64>) {
    match v {
        Some(x) => {
            let _ = write!(out, ",{x}");
        }
        None => out.push(','),
    }
}

// ---------------------------------------------------------------------------
// Seed derivation: one independent stream per trial, splitmix64-mixed so
// concurrency and grid order cannot change any instance.
// ---------------------------------------------------------------------------

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix_seed(base: u64, tags: &[u64]) -> u64 {
    let mut state = splitmix64(base);
    for &tag in tags {
        state = splitmix64(state ^ tag.wrapping_mul(0xA24B_AED4_963E_E407));
    }
    state
}

const ALPHA_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
const C_GRID: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
const M_GRID: [f64; 7] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2];

/// Runs one deterministic sweep.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let (points, failures, config) = match cfg.kind {
        ExperimentKind::MethodComparison => method_comparison(cfg),
        ExperimentKind::AlphaSweep => alpha_sweep(cfg),
        ExperimentKind::SScalarSweep => s_scalar_sweep(cfg),
        ExperimentKind::SPretrustedSweep => s_pretrusted_sweep(cfg),
        ExperimentKind::SelfrefStudy => selfref_study(cfg),
        ExperimentKind::SelfPromotionStudy => attack_study(cfg, AttackStudy::SelfPromotion),
        ExperimentKind::SlanderingStudy => attack_study(cfg, AttackStudy::Slandering),
        ExperimentKind::SybilStudy => sybil_study(cfg),
    }?;
    Ok(ExperimentReport {
        experiment: cfg.kind.name().to_string(),
        config,
        seed: cfg.seed,
        points,
        failures,
        wall_time_ms: start.elapsed().as_millis(),
    })
}

type SweepOutput = (Vec<DataPoint>, Vec<TrialFailure>, serde_json::Value);

/// Runs independent work items in parallel, flattening results in item order.
fn run_items<W, F>(items: Vec<W>, f: F) -> (Vec<DataPoint>, Vec<TrialFailure>)
where
    W: Send + Sync,
    F: Fn(&W) -> std::result::Result<Vec<DataPoint>, TrialFailure> + Send + Sync,
{
    let results: Vec<_> = items.par_iter().map(&f).collect();
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for result in results {
        match result {
            Ok(mut p) => points.append(&mut p),
            Err(failure) => failures.push(failure),
        }
    }
    (points, failures)
}

fn fail(context: String, seed: u64) -> impl FnOnce(Error) -> TrialFailure {
    move |error| TrialFailure {
        context,
        seed,
        error: error.to_string(),
    }
}

fn random_start(n: usize, seed: u64) -> StartVector {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    StartVector::new((0..n).map(|_| rng.random::<f64>()).collect())
        .expect("uniform draws are a valid start vector")
}

/// Direct vs. iterative agreement across sizes and α.
fn method_comparison(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    let trials = cfg.trials();
    let sizes: Vec<usize> = match cfg.n {
        Some(n) => vec![n],
        None => vec![50, 100, 200],
    };
    let mut items = Vec::new();
    for &n in &sizes {
        for trial in 0..trials {
            items.push((n, trial, mix_seed(cfg.seed, &[1, n as u64, trial as u64])));
        }
    }
    let (points, failures) = run_items(items, |&(n, trial, tseed)| {
        let context = format!("method_comparison n={n} trial={trial}");
        let a = gen_matrix(&GeneratorConfig::new(n, tseed))
            .map_err(fail(context.clone(), tseed))?;
        let s = random_start(n, mix_seed(tseed, &[2]));
        let mut out = Vec::new();
        for &alpha in &ALPHA_GRID {
            let cfg_it = SolverConfig::new(alpha).map_err(fail(context.clone(), tseed))?;
            let it = solve_iterative(&a, &s, &cfg_it).map_err(fail(context.clone(), tseed))?;
            let di = solve_direct(&a, &s, &cfg_it.clone().with_method(SolveMethod::Direct))
                .map_err(fail(context.clone(), tseed))?;
            let diff: f64 = it
                .r
                .iter()
                .zip(&di.r)
                .map(|(x, y)| (x - y).abs())
                .sum();
            let mut p = DataPoint::new("l1_diff", diff, tseed);
            p.n = Some(n);
            p.alpha = Some(alpha);
            p.trial = Some(trial);
            out.push(p);
            let mut p = DataPoint::new("iterations", it.iterations as f64, tseed);
            p.n = Some(n);
            p.alpha = Some(alpha);
            p.trial = Some(trial);
            out.push(p);
        }
        Ok(out)
    });
    let config = serde_json::json!({
        "kind": "method_comparison", "sizes": sizes, "trials": trials,
        "alpha_grid": ALPHA_GRID, "seed": cfg.seed, "start": "uniform random per trial",
    });
    Ok((points, failures, config))
}

/// ℓ/n and tracked components as a function of α, s = (1,0,…,0).
fn alpha_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    let trials = cfg.trials();
    let n = cfg.n.unwrap_or(500);
    let alphas: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
    let s = StartVector::pretrusted(n, 1)?;

    let items: Vec<(usize, u64)> = (0..trials)
        .map(|trial| (trial, mix_seed(cfg.seed, &[3, trial as u64])))
        .collect();
    let alphas_ref = &alphas;
    let s_ref = &s;
    let (mut points, failures) = run_items(items, |&(trial, tseed)| {
        let context = format!("alpha_sweep trial={trial}");
        let a = gen_matrix(&GeneratorConfig::new(n, tseed))
            .map_err(fail(context.clone(), tseed))?;
        let mut out = Vec::new();
        for &alpha in alphas_ref {
            let solver_cfg = SolverConfig::new(alpha).map_err(fail(context.clone(), tseed))?;
            let res =
                solve_iterative(&a, s_ref, &solver_cfg).map_err(fail(context.clone(), tseed))?;
            let mut p = DataPoint::new("ell_over_n", res.ell / n as f64, tseed);
            p.n = Some(n);
            p.alpha = Some(alpha);
            p.trial = Some(trial);
            out.push(p);
        }
        Ok(out)
    });

    // component tracks on the first matrix, as in the single-instance plot
    let tseed = mix_seed(cfg.seed, &[3, 0]);
    let a = gen_matrix(&GeneratorConfig::new(n, tseed))?;
    let at_one = solve_iterative(&a, &s, &SolverConfig::new(1.0)?)?;
    let mut tracked = ranked_components(&at_one.r);
    tracked.insert(0, 0); // the pre-trusted user's downward curve
    tracked.dedup();
    let spectral = crate::solver::spectral_radius(&a, crate::solver::default_spectral_tol(n))?;
    for &alpha in &alphas {
        let res = solve_iterative(&a, &s, &SolverConfig::new(alpha)?)?;
        for &idx in &tracked {
            let mut p = DataPoint::new("r_component", res.r[idx], tseed);
            p.n = Some(n);
            p.alpha = Some(alpha);
            p.trial = Some(0);
            p.component = Some(idx);
            points.push(p);
        }
        let approx = crate::solver::linear_approx(&s, alpha, &spectral);
        let max_dev = res
            .r
            .iter()
            .zip(&approx)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max);
        let mut p = DataPoint::new("linear_approx_max_dev", max_dev, tseed);
        p.n = Some(n);
        p.alpha = Some(alpha);
        p.trial = Some(0);
        points.push(p);
    }
    let config = serde_json::json!({
        "kind": "alpha_sweep", "n": n, "trials": trials, "alpha_grid": alphas,
        "seed": cfg.seed, "start": "pretrusted:1",
    });
    Ok((points, failures, config))
}

/// Representative component indices: min, quartiles, median, max by value.
fn ranked_components(r: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..r.len()).collect();
    order.sort_by(|&i, &j| r[i].total_cmp(&r[j]).then(i.cmp(&j)));
    let last = order.len() - 1;
    vec![
        order[0],
        order[last / 4],
        order[last / 2],
        order[3 * last / 4],
        order[last],
    ]
}

/// Components of r against the uniform start value c, for several tau_max.
fn s_scalar_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    let trials = cfg.trials();
    let n = cfg.n.unwrap_or(1000);
    let alpha = 0.9;
    let tau_values = [0.2, 0.6, 0.9];
    let mut items = Vec::new();
    for &tau_max in &tau_values {
        for trial in 0..trials {
            items.push((
                tau_max,
                trial,
                mix_seed(cfg.seed, &[4, (tau_max * 100.0) as u64, trial as u64]),
            ));
        }
    }
    let (points, failures) = run_items(items, |&(tau_max, trial, tseed)| {
        let context = format!("s_scalar_sweep tau_max={tau_max} trial={trial}");
        let mut gen_cfg = GeneratorConfig::new(n, tseed);
        gen_cfg.tau_max = tau_max;
        let a = gen_matrix(&gen_cfg).map_err(fail(context.clone(), tseed))?;
        let solver_cfg = SolverConfig::new(alpha).map_err(fail(context.clone(), tseed))?;
        let reference = solve_iterative(&a, &StartVector::uniform(n, 1.0).unwrap(), &solver_cfg)
            .map_err(fail(context.clone(), tseed))?;
        let tracked = ranked_components(&reference.r);
        let mut out = Vec::new();
        for &c in &C_GRID {
            let s = StartVector::uniform(n, c).unwrap();
            let res =
                solve_iterative(&a, &s, &solver_cfg).map_err(fail(context.clone(), tseed))?;
            for &idx in &tracked {
                let mut p = DataPoint::new("r_component", res.r[idx], tseed);
                p.n = Some(n);
                p.alpha = Some(alpha);
                p.c = Some(c);
                p.tau_max = Some(tau_max);
                p.trial = Some(trial);
                p.component = Some(idx);
                out.push(p);
            }
            let mut p = DataPoint::new("ell_over_n", res.ell / n as f64, tseed);
            p.n = Some(n);
            p.alpha = Some(alpha);
            p.c = Some(c);
            p.tau_max = Some(tau_max);
            p.trial = Some(trial);
            out.push(p);
        }
        Ok(out)
    });
    let config = serde_json::json!({
        "kind": "s_scalar_sweep", "n": n, "alpha": alpha, "tau_max_grid": tau_values,
        "c_grid": C_GRID, "trials": trials, "seed": cfg.seed,
    });
    Ok((points, failures, config))
}

/// Components of r against the number T of pre-trusted users.
fn s_pretrusted_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    let trials = cfg.trials();
    let n = cfg.n.unwrap_or(1000);
    let alpha = 0.9;
    let t_grid: Vec<usize> = [1, 10, 25, 50, 100, 200, 400, 700, n]
        .into_iter()
        .filter(|&t| t <= n)
        .collect();
    let items: Vec<(usize, u64)> = (0..trials)
        .map(|trial| (trial, mix_seed(cfg.seed, &[5, trial as u64])))
        .collect();
    let t_grid_ref = &t_grid;
    let (points, failures) = run_items(items, |&(trial, tseed)| {
        let context = format!("s_pretrusted_sweep trial={trial}");
        let a = gen_matrix(&GeneratorConfig::new(n, tseed))
            .map_err(fail(context.clone(), tseed))?;
        let solver_cfg = SolverConfig::new(alpha).map_err(fail(context.clone(), tseed))?;
        let reference = solve_iterative(&a, &StartVector::uniform(n, 0.5).unwrap(), &solver_cfg)
            .map_err(fail(context.clone(), tseed))?;
        let tracked = ranked_components(&reference.r);
        let mut out = Vec::new();
        for &t in t_grid_ref {
            let s = StartVector::pretrusted(n, t).unwrap();
            let res =
                solve_iterative(&a, &s, &solver_cfg).map_err(fail(context.clone(), tseed))?;
            for &idx in &tracked {
                let mut p = DataPoint::new("r_component", res.r[idx], tseed);
                p.n = Some(n);
                p.alpha = Some(alpha);
                p.t_pretrusted = Some(t);
                p.trial = Some(trial);
                p.component = Some(idx);
                out.push(p);
            }
            let mut p = DataPoint::new("ell_over_n", res.ell / n as f64, tseed);
            p.n = Some(n);
            p.alpha = Some(alpha);
            p.t_pretrusted = Some(t);
            p.trial = Some(trial);
            out.push(p);
        }
        Ok(out)
    });
    let config = serde_json::json!({
        "kind": "s_pretrusted_sweep", "n": n, "alpha": alpha, "t_grid": t_grid,
        "trials": trials, "seed": cfg.seed,
    });
    Ok((points, failures, config))
}

/// Effect of switching the diagonal from 0 to 1, as a function of n and α.
fn selfref_study(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    let trials = cfg.trials();
    let sizes: Vec<usize> = match cfg.n {
        Some(n) => vec![n],
        None => vec![10, 20, 50, 100, 200, 500],
    };
    let alphas = [0.1, 0.5, 0.9];
    let mut items = Vec::new();
    for &n in &sizes {
        for &alpha in &alphas {
            for trial in 0..trials {
                items.push((
                    n,
                    alpha,
                    trial,
                    mix_seed(cfg.seed, &[6, n as u64, trial as u64]),
                ));
            }
        }
    }
    let (points, failures) = run_items(items, |&(n, alpha, trial, tseed)| {
        let context = format!("selfref_study n={n} alpha={alpha} trial={trial}");
        let a = gen_matrix(&GeneratorConfig::new(n, tseed))
            .map_err(fail(context.clone(), tseed))?;
        let s = StartVector::uniform(n, 0.5).unwrap();
        let solver_cfg = SolverConfig::new(alpha).map_err(fail(context.clone(), tseed))?;
        let base = solve_iterative(&a, &s, &solver_cfg).map_err(fail(context.clone(), tseed))?;
        let shifted = a
            .with_diagonal(1.0)
            .and_then(|a1| solve_iterative(&a1, &s, &solver_cfg))
            .map_err(fail(context.clone(), tseed))?;
        let scale = 1.0 + alpha / base.ell;
        let max_dev = shifted
            .r
            .iter()
            .zip(&base.r)
            .map(|(r1, r0)| (r1 - scale * r0).abs())
            .fold(0.0f64, f64::max);
        let mut out = Vec::new();
        for (metric, value) in [
            ("delta_ell_rel", (shifted.ell - base.ell) / base.ell),
            ("ell_diff", shifted.ell - base.ell),
            ("shift_law_max_dev", max_dev),
        ] {
            let mut p = DataPoint::new(metric, value, tseed);
            p.n = Some(n);
            p.alpha = Some(alpha);
            p.trial = Some(trial);
            out.push(p);
        }
        Ok(out)
    });
    let config = serde_json::json!({
        "kind": "selfref_study", "sizes": sizes, "alphas": alphas, "trials": trials,
        "seed": cfg.seed, "start": "uniform:0.5", "zeta": 1.0,
    });
    Ok((points, failures, config))
}

#[derive(Clone, Copy)]
enum AttackStudy {
    SelfPromotion,
    Slandering,
}

/// Attacker with the highest reputation still below the neutral 0.5 (the
/// user who actually needs the attack); falls back to the lowest overall.
fn pick_attacker(r: &[f64], allowed: &[usize]) -> usize {
    allowed
        .iter()
        .copied()
        .filter(|&y| r[y] < 0.5)
        .max_by(|&p, &q| r[p].total_cmp(&r[q]))
        .unwrap_or_else(|| {
            allowed
                .iter()
                .copied()
                .min_by(|&p, &q| r[p].total_cmp(&r[q]))
                .expect("allowed set is nonempty")
        })
}

/// Target with the highest reputation among the allowed users.
fn pick_target(r: &[f64], allowed: &[usize], exclude: usize) -> usize {
    allowed
        .iter()
        .copied()
        .filter(|&x| x != exclude)
        .max_by(|&p, &q| r[p].total_cmp(&r[q]))
        .expect("allowed set has a non-attacker")
}

/// Self-promotion and slandering sweeps over α, the uniform start value c,
/// and the pre-trusted count T.
fn attack_study(cfg: &ExperimentConfig, study: AttackStudy) -> Result<SweepOutput> {
    let trials = cfg.trials();
    let (default_n, tag) = match study {
        AttackStudy::SelfPromotion => (200, 7u64),
        AttackStudy::Slandering => (100, 8u64),
    };
    let n = cfg.n.unwrap_or(default_n);
    let t_grid: Vec<usize> = [10, 25, 50, 100, 150, (n * 19) / 20]
        .into_iter()
        .filter(|&t| t < n)
        .collect();
    let items: Vec<(usize, u64)> = (0..trials)
        .map(|trial| (trial, mix_seed(cfg.seed, &[tag, trial as u64])))
        .collect();
    let t_grid_ref = &t_grid;
    let (points, failures) = run_items(items, |&(trial, tseed)| {
        let context = format!("attack_study trial={trial}");
        let a = gen_matrix(&GeneratorConfig::new(n, tseed))
            .map_err(fail(context.clone(), tseed))?;
        let mut out = Vec::new();

        // (a) effect vs α at a uniform start
        let everyone: Vec<usize> = (0..n).collect();
        let s = StartVector::uniform(n, 0.5).unwrap();
        let reference = solve_iterative(&a, &s, &SolverConfig::new(0.5).unwrap())
            .map_err(fail(context.clone(), tseed))?;
        let attacker = pick_attacker(&reference.r, &everyone);
        let target = pick_target(&reference.r, &everyone, attacker);
        for &alpha in &ALPHA_GRID {
            let solver_cfg = SolverConfig::new(alpha).unwrap();
            for p in attack_points(
                &a, &s, &solver_cfg, study, attacker, target, tseed, &context,
            )? {
                let mut p = p;
                p.n = Some(n);
                p.alpha = Some(alpha);
                p.trial = Some(trial);
                out.push(p);
            }
        }

        // (b) effect vs c for s = c·e at α = 0.9
        let solver_cfg = SolverConfig::new(0.9).unwrap();
        for &c in &C_GRID {
            let s = StartVector::uniform(n, c).unwrap();
            for p in attack_points(
                &a, &s, &solver_cfg, study, attacker, target, tseed, &context,
            )? {
                let mut p = p;
                p.n = Some(n);
                p.alpha = Some(0.9);
                p.c = Some(c);
                p.trial = Some(trial);
                out.push(p);
            }
        }

        // (c) effect vs T; attacker (and target) stay outside the
        // pre-trusted set, so restrict the choice to the tail indices
        let max_t = *t_grid_ref.iter().max().unwrap();
        let tail: Vec<usize> = (max_t..n).collect();
        let attacker_t = pick_attacker(&reference.r, &tail);
        let target_t = pick_target(&reference.r, &tail, attacker_t);
        for &t in t_grid_ref {
            let s = StartVector::pretrusted(n, t).unwrap();
            for p in attack_points(
                &a, &s, &solver_cfg, study, attacker_t, target_t, tseed, &context,
            )? {
                let mut p = p;
                p.n = Some(n);
                p.alpha = Some(0.9);
                p.t_pretrusted = Some(t);
                p.trial = Some(trial);
                out.push(p);
            }
        }
        Ok(out)
    });
    let config = serde_json::json!({
        "kind": match study {
            AttackStudy::SelfPromotion => "self_promotion_study",
            AttackStudy::Slandering => "slandering_study",
        },
        "n": n, "trials": trials, "alpha_grid": ALPHA_GRID, "c_grid": C_GRID,
        "t_grid": t_grid, "seed": cfg.seed,
    });
    Ok((points, failures, config))
}

#[allow(clippy::too_many_arguments)]
fn attack_points(
    a: &EvidenceMatrix,
    s: &StartVector,
    solver_cfg: &SolverConfig,
    study: AttackStudy,
    attacker: usize,
    target: usize,
    tseed: u64,
    context: &str,
) -> std::result::Result<Vec<DataPoint>, TrialFailure> {
    let before =
        solve_iterative(a, s, solver_cfg).map_err(fail(context.to_string(), tseed))?;
    let mut out = Vec::new();
    match study {
        AttackStudy::SelfPromotion => {
            let attacked = apply_self_promotion(a, attacker)
                .and_then(|m| solve_iterative(&m, s, solver_cfg))
                .map_err(fail(context.to_string(), tseed))?;
            let mut p = DataPoint::new(
                "delta_r_attacker",
                attacked.r[attacker] - before.r[attacker],
                tseed,
            );
            p.component = Some(attacker);
            out.push(p);
        }
        AttackStudy::Slandering => {
            for (metric, matrix) in [
                ("delta_r_target", apply_slandering(a, attacker, target)),
                (
                    "delta_r_target_direct",
                    apply_slandering_direct(a, attacker, target),
                ),
                (
                    "delta_r_target_indirect",
                    apply_slandering_indirect(a, attacker, target),
                ),
            ] {
                let attacked = matrix
                    .and_then(|m| solve_iterative(&m, s, solver_cfg))
                    .map_err(fail(context.to_string(), tseed))?;
                let mut p = DataPoint::new(
                    metric,
                    attacked.r[target] - before.r[target],
                    tseed,
                );
                p.component = Some(target);
                out.push(p);
            }
        }
    }
    Ok(out)
}

/// Sybil sweep: reputation reduction of a pre-trusted target as a function
/// of the sibling ratio m, for several (α, T) combinations.
fn sybil_study(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    let trials = cfg.trials();
    let n = cfg.n.unwrap_or(200);
    // (α, T) combinations: vary T at α = 0.9, vary α at T = 50
    let combos: Vec<(f64, usize)> = [
        (0.9, 10),
        (0.9, 50),
        (0.9, 100),
        (0.2, 50),
        (0.5, 50),
    ]
    .into_iter()
    .filter(|&(_, t)| t < n)
    .collect();
    let mut items = Vec::new();
    for &(alpha, t) in &combos {
        for trial in 0..trials {
            items.push((alpha, t, trial, mix_seed(cfg.seed, &[9, trial as u64])));
        }
    }
    let (points, failures) = run_items(items, |&(alpha, t, trial, tseed)| {
        let context = format!("sybil_study alpha={alpha} T={t} trial={trial}");
        let a = gen_matrix(&GeneratorConfig::new(n, tseed))
            .map_err(fail(context.clone(), tseed))?;
        // target: a pre-trusted user; attacker: never pre-trusted
        let target = 0;
        let attacker = n - 1;
        let s = StartVector::pretrusted(n, t).unwrap();
        let solver_cfg = SolverConfig::new(alpha).unwrap();
        let before =
            solve_iterative(&a, &s, &solver_cfg).map_err(fail(context.clone(), tseed))?;
        let mut out = Vec::new();
        let mut p = DataPoint::new("r_target_before", before.r[target], tseed);
        p.n = Some(n);
        p.alpha = Some(alpha);
        p.t_pretrusted = Some(t);
        p.trial = Some(trial);
        out.push(p);
        for &m in &M_GRID {
            let (big, s2) = apply_sybil(&a, &s, attacker, target, m)
                .map_err(fail(context.clone(), tseed))?;
            let after =
                solve_iterative(&big, &s2, &solver_cfg).map_err(fail(context.clone(), tseed))?;
            let reduction = 100.0 * (before.r[target] - after.r[target]) / before.r[target];
            let mut p = DataPoint::new("reduction_pct", reduction, tseed);
            p.n = Some(n);
            p.alpha = Some(alpha);
            p.t_pretrusted = Some(t);
            p.m = Some(m);
            p.trial = Some(trial);
            out.push(p);
        }
        Ok(out)
    });
    let config = serde_json::json!({
        "kind": "sybil_study", "n": n, "combos": combos, "m_grid": M_GRID,
        "trials": trials, "seed": cfg.seed, "target": 0, "attacker": n - 1,
    });
    Ok((points, failures, config))
}
