//! Randomized suites over the checkers.
//!
//! Trial `i` of suite `s` draws from `SampleStream::for_trial(seed, tag(s), i)`,
//! so results do not depend on scheduling. Trials run on the rayon pool and
//! the records are sorted by `(theorem_id, trial, grid_index)` afterwards.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::*;
use crate::algebra::{check_exp_chebyshev, check_golden_thompson, check_lp_integral_identity};
use crate::condexp::{check_ce_axioms, verify_order_independence};
use crate::martingale::{random_martingale, random_supermartingale};
use crate::rng::SampleStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteKind {
    Azuma,
    Hoeffding,
    Mcdiarmid,
    Chernoff,
    Super,
    Thm32,
    Mgf,
    Cor34,
    Bernstein,
    Cor36,
    Foundations,
    All,
}

impl SuiteKind {
    /// Every concrete suite, in run order.
    pub const CONCRETE: [SuiteKind; 11] = [
        SuiteKind::Foundations,
        SuiteKind::Azuma,
        SuiteKind::Hoeffding,
        SuiteKind::Mcdiarmid,
        SuiteKind::Chernoff,
        SuiteKind::Super,
        SuiteKind::Thm32,
        SuiteKind::Mgf,
        SuiteKind::Cor34,
        SuiteKind::Bernstein,
        SuiteKind::Cor36,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteKind::Azuma => "azuma",
            SuiteKind::Hoeffding => "hoeffding",
            SuiteKind::Mcdiarmid => "mcdiarmid",
            SuiteKind::Chernoff => "chernoff",
            SuiteKind::Super => "super",
            SuiteKind::Thm32 => "thm32",
            SuiteKind::Mgf => "mgf",
            SuiteKind::Cor34 => "cor34",
            SuiteKind::Bernstein => "bernstein",
            SuiteKind::Cor36 => "cor36",
            SuiteKind::Foundations => "foundations",
            SuiteKind::All => "all",
        }
    }

    fn expand(self) -> Vec<SuiteKind> {
        if self == SuiteKind::All {
            Self::CONCRETE.to_vec()
        } else {
            vec![self]
        }
    }

    /// Stream tag; distinct per suite.
    fn tag(self) -> u64 {
        0x5EED_0000 + self as u64
    }

    fn theorem(self) -> TheoremId {
        match self {
            SuiteKind::Azuma => TheoremId::Azuma,
            SuiteKind::Hoeffding => TheoremId::Hoeffding,
            SuiteKind::Mcdiarmid => TheoremId::Mcdiarmid,
            SuiteKind::Chernoff => TheoremId::Chernoff,
            SuiteKind::Super => TheoremId::SuperAzuma,
            SuiteKind::Thm32 => TheoremId::Thm32,
            SuiteKind::Mgf => TheoremId::Mgf,
            SuiteKind::Cor34 => TheoremId::Cor34Tail,
            SuiteKind::Bernstein => TheoremId::Bernstein,
            SuiteKind::Cor36 => TheoremId::Cor36,
            SuiteKind::Foundations | SuiteKind::All => TheoremId::MartValid,
        }
    }
}

impl fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::CONCRETE
            .into_iter()
            .chain([SuiteKind::All])
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parameter(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub suite: SuiteKind,
    pub trials: usize,
    pub seed: u64,
    /// Each trial picks one factor-dimension vector uniformly; its length is
    /// the number of martingale steps.
    pub dim_choices: Vec<Vec<usize>>,
    /// Tail thresholds (`lambda` or `t`) for every tail checker, and `t` for
    /// the exponential Chebyshev check.
    pub lambda_grid: Vec<f64>,
    pub p_grid: Vec<f64>,
    /// MGF evaluation points as fractions of `3 / M`.
    pub mgf_fractions: Vec<f64>,
    /// Drift scales of the generated supermartingales.
    pub drift_scales: Vec<f64>,
    pub tolerance: Tolerance,
}

pub const FOUNDATION_DIMS: [&[usize]; 5] = [&[2, 2], &[2, 2, 2], &[3, 2], &[2, 3, 2], &[4, 2]];

impl Default for SuiteConfig {
    fn default() -> Self {
        let mut dim_choices: Vec<Vec<usize>> = FOUNDATION_DIMS.iter().map(|d| d.to_vec()).collect();
        dim_choices.extend([vec![2, 2, 2, 2], vec![4, 4], vec![4, 4, 4], vec![2, 2, 2, 2, 2, 2]]);
        Self {
            suite: SuiteKind::All,
            trials: 200,
            seed: 0,
            dim_choices,
            lambda_grid: vec![1e-6, 0.5, 1.0, 1.5, 2.0, 3.0],
            p_grid: vec![2.0, 3.0, 4.0, 6.0],
            mgf_fractions: vec![0.1, 0.5, 0.9],
            drift_scales: vec![0.0, 0.5, 1.0],
            tolerance: Tolerance::default(),
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.dim_choices.is_empty() || self.dim_choices.iter().any(|d| d.is_empty() || d.contains(&0)) {
            return bad("every dimension vector must be nonempty with positive entries".into());
        }
        if self.dim_choices.iter().any(|d| d.iter().product::<usize>() > 4096) {
            return bad("ambient dimension must not exceed 4096".into());
        }
        if self.lambda_grid.is_empty() || self.lambda_grid.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return bad("lambda grid must be nonempty with positive finite entries".into());
        }
        if self.p_grid.is_empty() || self.p_grid.iter().any(|p| !(*p >= 2.0) || !p.is_finite()) {
            return bad("p grid must be nonempty with finite entries >= 2".into());
        }
        if self.mgf_fractions.is_empty() || self.mgf_fractions.iter().any(|f| !(*f >= 0.0) || !f.is_finite()) {
            return bad("MGF fractions must be nonempty and nonnegative".into());
        }
        if self.drift_scales.is_empty() || self.drift_scales.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return bad("drift scales must be nonempty and nonnegative".into());
        }
        if !(self.tolerance.relative >= 0.0) || !(self.tolerance.absolute >= 0.0) {
            return bad("tolerances must be nonnegative".into());
        }
        Ok(())
    }
}

/// Aggregate counts over a set of records.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub holds: usize,
    pub violations: usize,
    pub degenerate: usize,
    /// Largest `lhs / rhs` among non-degenerate records, per theorem.
    pub max_ratio_per_theorem: BTreeMap<String, f64>,
}

pub fn summarize(records: &[CheckResult]) -> Summary {
    let mut s = Summary {
        total: records.len(),
        ..Summary::default()
    };
    for r in records {
        if r.degenerate {
            s.degenerate += 1;
        } else if r.holds {
            s.holds += 1;
        } else {
            s.violations += 1;
        }
        if !r.degenerate {
            let e = s.max_ratio_per_theorem.entry(r.theorem_id.to_string()).or_insert(0.0);
            if r.ratio > *e {
                *e = r.ratio;
            }
        }
    }
    s
}

/// Runs the configured suite(s). Individual check errors become failing
/// records carrying the error text in `note`.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<CheckResult>> {
    Ok(run_suite_timed(cfg)?.into_iter().map(|(r, _)| r).collect())
}

/// As [`run_suite`], pairing each record with the wall-clock duration of its
/// trial in milliseconds. Only the durations vary between runs.
pub fn run_suite_timed(cfg: &SuiteConfig) -> Result<Vec<(CheckResult, f64)>> {
    cfg.validate()?;
    let jobs: Vec<(SuiteKind, usize)> = cfg
        .suite
        .expand()
        .into_iter()
        .flat_map(|k| (0..cfg.trials).map(move |t| (k, t)))
        .collect();
    let mut records: Vec<(CheckResult, f64)> = jobs
        .par_iter()
        .map(|&(kind, trial)| {
            let start = Instant::now();
            let mut rng = SampleStream::for_trial(cfg.seed, kind.tag(), trial as u64);
            let dims = cfg.dim_choices[rng.index(cfg.dim_choices.len())].clone();
            let mut out = run_trial(kind, cfg, &dims, &mut rng).unwrap_or_else(|e| {
                let mut r = CheckResult::failure(kind.theorem(), e.to_string());
                r.dims = dims.clone();
                r.n_steps = dims.len();
                vec![r]
            });
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            for r in &mut out {
                r.seed = cfg.seed;
                r.trial = trial as u64;
            }
            out.into_iter().map(move |r| (r, elapsed))
        })
        .flatten_iter()
        .collect();
    records.sort_by_key(|(r, _)| (r.theorem_id, r.trial, r.grid_index));
    Ok(records)
}

fn run_trial(kind: SuiteKind, cfg: &SuiteConfig, dims: &[usize], rng: &mut SampleStream) -> Result<Vec<CheckResult>> {
    let f = TensorFiltration::new(dims.to_vec())?;
    let tol = cfg.tolerance;
    let lambdas = &cfg.lambda_grid;
    match kind {
        SuiteKind::Foundations => foundations_trial(&f, cfg, rng),
        SuiteKind::Azuma => check_azuma(&random_martingale(&f, 1.0, rng)?, lambdas, tol),
        SuiteKind::Hoeffding => check_hoeffding(&f, &centered_factors(&f, rng)?, lambdas, tol),
        SuiteKind::Mcdiarmid => {
            let y = HermitianElement::from_matrix(rng.gue(f.ambient_dim()))?;
            let y = y.scale(rng.uniform_range(0.5, 2.0) / y.op_norm()?.max(1e-300));
            check_mcdiarmid(&y, &f, lambdas, tol)
        }
        SuiteKind::Chernoff => check_scalar_chernoff(&symmetric_diagonals(dims, rng), lambdas, tol),
        SuiteKind::Super => {
            let mut out = Vec::new();
            for (i, &drift) in cfg.drift_scales.iter().enumerate() {
                let seq = random_supermartingale(&f, drift, 1.0, rng)?;
                let b: Vec<f64> = (0..dims.len()).map(|_| rng.uniform_range(0.0, 0.5)).collect();
                let a: Vec<f64> = (0..dims.len()).map(|_| rng.uniform_range(0.0, 0.25)).collect();
                for mut r in check_supermartingale_azuma(&seq, lambdas, &a, &b, tol)? {
                    r.grid_index += i * lambdas.len();
                    r.extras.insert("drift".into(), drift);
                    out.push(r);
                }
            }
            Ok(out)
        }
        SuiteKind::Thm32 => {
            let seq = random_martingale(&f, 1.0, rng)?;
            let a: Vec<f64> = (0..dims.len()).map(|_| rng.uniform_range(0.0, 0.25)).collect();
            check_thm32(&seq, lambdas, &a, tol)
        }
        SuiteKind::Mgf => {
            let seq = random_martingale(&f, 1.0, rng)?;
            let limit = mgf_lambda_limit(&seq)?;
            let grid: Vec<f64> = cfg.mgf_fractions.iter().map(|q| q * limit).collect();
            let mut out = check_mgf(&seq, &grid, tol)?;
            for (r, q) in out.iter_mut().zip(&cfg.mgf_fractions) {
                r.extras.insert("fraction".into(), *q);
            }
            Ok(out)
        }
        SuiteKind::Cor34 => check_cor34(&random_martingale(&f, 1.0, rng)?, lambdas, &cfg.p_grid, tol),
        SuiteKind::Bernstein => check_bernstein(&f, &centered_factors(&f, rng)?, lambdas, tol),
        SuiteKind::Cor36 => {
            let seq = random_martingale(&f, 1.0, rng)?;
            let mut steps = extract_two_sided_variance_params(&seq, &[])?.step_max;
            steps.sort_by(f64::total_cmp);
            let m = steps[(steps.len() - 1) / 2].max(RANGE_FLOOR);
            check_cor36(&seq, lambdas, m, tol)
        }
        SuiteKind::All => unreachable!("expanded before dispatch"),
    }
}

/// Centered GUE element on each factor with operator norm uniform in
/// `[0.25, 1]`; zero on one-dimensional factors.
pub fn centered_factors(f: &TensorFiltration, rng: &mut SampleStream) -> Result<Vec<HermitianElement>> {
    f.factor_dims()
        .iter()
        .map(|&d| {
            if d == 1 {
                return Ok(HermitianElement::zeros(1));
            }
            let g = HermitianElement::from_matrix(rng.gue(d))?;
            let centered = &g - &HermitianElement::scalar(d, trace_state(&g));
            let norm = centered.op_norm()?;
            let target = rng.uniform_range(0.25, 1.0);
            Ok(if norm > 0.0 { centered.scale(target / norm) } else { centered })
        })
        .collect()
}

/// Diagonal values for the commutative checks: Rademacher `(1, -1)` on
/// two-dimensional factors, otherwise centered uniform values rescaled into
/// `[-1, 1]`.
pub fn symmetric_diagonals(dims: &[usize], rng: &mut SampleStream) -> Vec<Vec<f64>> {
    dims.iter()
        .map(|&d| match d {
            1 => vec![0.0],
            2 => vec![1.0, -1.0],
            _ => {
                let raw: Vec<f64> = (0..d).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
                let mean = raw.iter().sum::<f64>() / d as f64;
                let centered: Vec<f64> = raw.iter().map(|v| v - mean).collect();
                let peak = centered.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let s = if peak > 1.0 { 1.0 / peak } else { 1.0 };
                let mut vals: Vec<f64> = centered.iter().map(|v| v * s).collect();
                // absorb the rounding left in the mean into the last entry
                let residual = vals.iter().sum::<f64>();
                vals[d - 1] -= residual;
                vals
            }
        })
        .collect()
}

fn foundations_trial(f: &TensorFiltration, cfg: &SuiteConfig, rng: &mut SampleStream) -> Result<Vec<CheckResult>> {
    let tol = cfg.tolerance;
    let d = f.ambient_dim();
    let dims = f.factor_dims().to_vec();
    let mut out = Vec::new();

    let y1 = HermitianElement::from_matrix(rng.gue(d))?;
    let y2 = HermitianElement::from_matrix(rng.gue(d))?;
    let mut gt = check_golden_thompson(&y1, &y2, tol)?;
    gt.label = "random".into();
    out.push(gt);
    let diag1: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
    let diag2: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
    let mut gt = check_golden_thompson(&HermitianElement::diagonal(&diag1), &HermitianElement::diagonal(&diag2), tol)?;
    gt.label = "commuting".into();
    gt.grid_index = 1;
    out.push(gt);

    let x = HermitianElement::from_matrix(rng.gue(d))?;
    for (k, &t) in cfg.lambda_grid.iter().enumerate() {
        let mut r = check_exp_chebyshev(&x, t, tol)?;
        r.label = format!("t={t}");
        r.grid_index = k;
        out.push(r);
    }

    let g = rng.ginibre(d);
    let positive = HermitianElement::from_matrix(&g * g.adjoint())?;
    for (k, &p) in cfg.p_grid.iter().enumerate() {
        let mut r = check_lp_integral_identity(&positive, p, tol)?;
        r.grid_index = k;
        out.push(r);
    }

    for (k, mut r) in check_ce_axioms(f, rng, tol)?.into_iter().enumerate() {
        r.grid_index = k;
        out.push(r);
    }
    if f.n_levels() >= 2 {
        out.push(verify_order_independence(f, 4, rng, tol)?);
    }
    let y = HermitianElement::from_matrix(rng.gue(d))?;
    let mut v = validate_martingale(&doob_martingale(&y, f)?, tol)?;
    v.label = "doob".into();
    out.push(v);

    for r in &mut out {
        r.dims = dims.clone();
        r.n_steps = f.n_levels();
    }
    Ok(out)
}
