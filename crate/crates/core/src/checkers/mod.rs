//! Instance-level verification of the concentration inequalities.
//!
//! Each checker takes an instance that satisfies (or is re-verified to
//! satisfy) the hypotheses of one inequality, evaluates the operator side
//! exactly through the spectrum, evaluates the scalar side through
//! [`crate::bounds`], and records the comparison as a [`CheckResult`].
//!
//! Two-sided events are evaluated directly as `Prob(|x| >= lambda)`; the
//! two-sided bounds are compared with constants that control both `x` and
//! `-x`.

mod suite;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::{tail_fraction, trace_state, HermitianElement};
use crate::bounds;
use crate::condexp::TensorFiltration;
use crate::error::{Error, Result};
use crate::martingale::{
    azuma_hypothesis_defect, doob_martingale, extract_azuma_params, extract_two_sided_variance_params,
    extract_variance_params, validate_martingale, validate_supermartingale, variance_hypothesis_defect,
    BoundParams, MartingaleSequence, SequenceKind, HYPOTHESIS_TOLERANCE, RANGE_FLOOR,
};

pub use suite::{
    centered_factors, run_suite, run_suite_timed, summarize, symmetric_diagonals, SuiteConfig, SuiteKind, Summary,
    FOUNDATION_DIMS,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TheoremId {
    Gt,
    Cheb,
    Lpid,
    Azuma,
    Hoeffding,
    Mcdiarmid,
    Chernoff,
    SuperAzuma,
    Thm32,
    Mgf,
    Cor34Tail,
    Cor34Lp,
    Bernstein,
    Cor36,
    OrderIndep,
    CeAxioms,
    MartValid,
}

impl TheoremId {
    pub const ALL: [TheoremId; 17] = [
        TheoremId::Gt,
        TheoremId::Cheb,
        TheoremId::Lpid,
        TheoremId::Azuma,
        TheoremId::Hoeffding,
        TheoremId::Mcdiarmid,
        TheoremId::Chernoff,
        TheoremId::SuperAzuma,
        TheoremId::Thm32,
        TheoremId::Mgf,
        TheoremId::Cor34Tail,
        TheoremId::Cor34Lp,
        TheoremId::Bernstein,
        TheoremId::Cor36,
        TheoremId::OrderIndep,
        TheoremId::CeAxioms,
        TheoremId::MartValid,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::Gt => "GT",
            TheoremId::Cheb => "CHEB",
            TheoremId::Lpid => "LPID",
            TheoremId::Azuma => "AZUMA",
            TheoremId::Hoeffding => "HOEFFDING",
            TheoremId::Mcdiarmid => "MCDIARMID",
            TheoremId::Chernoff => "CHERNOFF",
            TheoremId::SuperAzuma => "SUPER_AZUMA",
            TheoremId::Thm32 => "THM32",
            TheoremId::Mgf => "MGF",
            TheoremId::Cor34Tail => "COR34_TAIL",
            TheoremId::Cor34Lp => "COR34_LP",
            TheoremId::Bernstein => "BERNSTEIN",
            TheoremId::Cor36 => "COR36",
            TheoremId::OrderIndep => "ORDER_INDEP",
            TheoremId::CeAxioms => "CE_AXIOMS",
            TheoremId::MartValid => "MART_VALID",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parameter(format!("unknown theorem id {s:?}")))
    }
}

/// Acceptance rule `lhs <= rhs (1 + relative) + absolute`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub relative: f64,
    pub absolute: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            relative: 1e-9,
            absolute: 1e-12,
        }
    }
}

impl Tolerance {
    pub fn accepts(&self, lhs: f64, rhs: f64) -> bool {
        lhs <= rhs * (1.0 + self.relative) + self.absolute
    }
}

/// One comparison of an operator-side quantity against its bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub theorem_id: TheoremId,
    /// Distinguishes records of one theorem within a trial.
    pub label: String,
    pub seed: u64,
    pub trial: u64,
    pub grid_index: usize,
    pub dims: Vec<usize>,
    pub n_steps: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub holds: bool,
    /// The bound is undefined for this instance (nonpositive denominator or
    /// parameter out of range); `holds` is then meaningless.
    pub degenerate: bool,
    pub params: Option<BoundParams>,
    /// Worst validation or hypothesis re-verification residual.
    pub residual: f64,
    pub extras: BTreeMap<String, f64>,
    pub note: String,
}

impl CheckResult {
    pub fn compare(theorem_id: TheoremId, lhs: f64, rhs: f64, tol: Tolerance) -> Self {
        let ratio = if rhs == 0.0 {
            if lhs == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            lhs / rhs
        };
        Self {
            theorem_id,
            label: String::new(),
            seed: 0,
            trial: 0,
            grid_index: 0,
            dims: Vec::new(),
            n_steps: 0,
            lhs,
            rhs,
            ratio,
            holds: tol.accepts(lhs, rhs),
            degenerate: false,
            params: None,
            residual: 0.0,
            extras: BTreeMap::new(),
            note: String::new(),
        }
    }

    /// A record whose bound could not be evaluated; `rhs` and `ratio` are 0.
    pub fn degenerate(theorem_id: TheoremId, lhs: f64, note: impl Into<String>) -> Self {
        let mut r = Self::compare(theorem_id, lhs, 0.0, Tolerance::default());
        r.ratio = 0.0;
        r.holds = false;
        r.degenerate = true;
        r.note = note.into();
        r
    }

    /// A record for a check that could not run at all; counts as a violation.
    pub fn failure(theorem_id: TheoremId, note: impl Into<String>) -> Self {
        let mut r = Self::compare(theorem_id, 0.0, 0.0, Tolerance::default());
        r.holds = false;
        r.note = note.into();
        r
    }

    /// Violations are failed comparisons on non-degenerate instances.
    pub fn is_violation(&self) -> bool {
        !self.holds && !self.degenerate
    }

    fn with_context(mut self, seq: &MartingaleSequence, grid_index: usize) -> Self {
        self.dims = seq.filtration().factor_dims().to_vec();
        self.n_steps = seq.n_steps();
        self.grid_index = grid_index;
        self
    }
}

/// Spectrum of `x_n - x_0`, computed on its reduced form.
fn increment_spectrum(seq: &MartingaleSequence) -> Result<Vec<f64>> {
    seq.filtration().reduce(&seq.total_increment(), seq.n_steps())?.spectrum()
}

fn abs_values(spectrum: &[f64]) -> Vec<f64> {
    spectrum.iter().map(|v| v.abs()).collect()
}

fn require_martingale(seq: &MartingaleSequence, tol: Tolerance) -> Result<Option<CheckResult>> {
    let v = validate_martingale(seq, tol)?;
    Ok(if v.holds { None } else { Some(v) })
}

fn require_hypotheses(defect: f64, what: &str) -> Result<f64> {
    if defect > HYPOTHESIS_TOLERANCE {
        return Err(Error::Precondition(format!(
            "extracted {what} constants fail re-verification (defect {defect:e})"
        )));
    }
    Ok(defect)
}

fn require_steps(seq: &MartingaleSequence) -> Result<()> {
    if seq.n_steps() == 0 {
        return Err(Error::Precondition("the sequence has no steps".into()));
    }
    Ok(())
}

/// `Prob(|x_n - x_0| >= lambda) <= 2 exp(-lambda^2 / (2 sum c_j^2))` with
/// `c_j = ||dx_j||`. One record per `lambda`; a failed martingale validation
/// is returned instead as a single `MART_VALID` record.
pub fn check_azuma(seq: &MartingaleSequence, lambdas: &[f64], tol: Tolerance) -> Result<Vec<CheckResult>> {
    require_steps(seq)?;
    if let Some(v) = require_martingale(seq, tol)? {
        return Ok(vec![v]);
    }
    let params = extract_azuma_params(seq)?;
    let defect = require_hypotheses(azuma_hypothesis_defect(seq, &params.c)?, "Lipschitz")?;
    let abs = abs_values(&increment_spectrum(seq)?);
    lambdas
        .iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let mut r = CheckResult::compare(
                TheoremId::Azuma,
                tail_fraction(&abs, lambda),
                bounds::azuma_bound(lambda, &params.c)?,
                tol,
            )
            .with_context(seq, k);
            r.label = format!("lambda={lambda}");
            r.residual = defect;
            r.params = Some(params.clone());
            r.extras.insert("lambda".into(), lambda);
            Ok(r)
        })
        .collect()
}

fn check_independent_summands(filtration: &TensorFiltration, a: &[HermitianElement]) -> Result<HermitianElement> {
    if a.is_empty() || a.len() > filtration.n_levels() {
        return Err(Error::Parameter(format!(
            "expected 1..={} summands, got {}",
            filtration.n_levels(),
            a.len()
        )));
    }
    let mut sum = HermitianElement::zeros(filtration.ambient_dim());
    for (k, a_j) in a.iter().enumerate() {
        let scale = a_j.max_abs_entry().max(1.0);
        let mean = trace_state(a_j);
        if mean.abs() > 1e-10 * scale {
            return Err(Error::Precondition(format!(
                "summand {} has tau = {mean:e}, expected a centered element",
                k + 1
            )));
        }
        sum = &sum + &filtration.embed(a_j, k + 1)?;
    }
    Ok(sum)
}

/// Independent centered summands `x_j = embed(a_j, j)`:
/// `Prob(|S_n| >= t) <= 2 exp(-t^2 / (2 sum c_j^2))`, `c_j = ||a_j||`.
pub fn check_hoeffding(
    filtration: &TensorFiltration,
    a: &[HermitianElement],
    ts: &[f64],
    tol: Tolerance,
) -> Result<Vec<CheckResult>> {
    let sum = check_independent_summands(filtration, a)?;
    let c = a
        .iter()
        .map(|a_j| Ok(a_j.op_norm()?.max(crate::martingale::LIPSCHITZ_FLOOR)))
        .collect::<Result<Vec<f64>>>()?;
    let abs = abs_values(&sum.spectrum()?);
    let params = BoundParams {
        c: c.clone(),
        ..BoundParams::default()
    };
    ts.iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut r = CheckResult::compare(TheoremId::Hoeffding, tail_fraction(&abs, t), bounds::hoeffding_bound(t, &c)?, tol);
            r.label = format!("t={t}");
            r.dims = filtration.factor_dims().to_vec();
            r.n_steps = a.len();
            r.grid_index = k;
            r.params = Some(params.clone());
            r.extras.insert("t".into(), t);
            Ok(r)
        })
        .collect()
}

/// Doob martingale of `y`:
/// `Prob(|y - tau(y)| >= t) <= 2 exp(-t^2 / (2 sum c_j^2))` with
/// `c_j = ||E_j(y) - E_{j-1}(y)||`.
pub fn check_mcdiarmid(
    y: &HermitianElement,
    filtration: &TensorFiltration,
    ts: &[f64],
    tol: Tolerance,
) -> Result<Vec<CheckResult>> {
    let seq = doob_martingale(y, filtration)?;
    let mut out = check_azuma(&seq, ts, tol)?;
    for r in out.iter_mut().filter(|r| r.theorem_id == TheoremId::Azuma) {
        r.theorem_id = TheoremId::Mcdiarmid;
        let t = r.extras.remove("lambda").unwrap_or_default();
        r.extras.insert("t".into(), t);
        r.label = format!("t={t}");
    }
    Ok(out)
}

/// Exact `Prob(|sum_j X_j| >= t)` for independent `X_j` uniform on the given
/// value lists, by recursive enumeration of the product measure. All atoms
/// carry mass `1 / prod_j len_j`, so the count is exact.
pub fn enumerate_abs_tail(values: &[Vec<f64>], t: f64) -> f64 {
    fn walk(values: &[Vec<f64>], partial: f64, cut: f64, count: &mut u64) {
        match values.split_first() {
            None => {
                if partial.abs() >= cut {
                    *count += 1;
                }
            }
            Some((first, rest)) => {
                for v in first {
                    walk(rest, partial + v, cut, count);
                }
            }
        }
    }
    let radius: f64 = values.iter().map(|vs| vs.iter().fold(0.0f64, |m, v| m.max(v.abs()))).sum();
    let atoms: usize = values.iter().map(Vec::len).product();
    let mut count = 0;
    walk(values, 0.0, t - crate::algebra::boundary_tolerance(radius), &mut count);
    count as f64 / atoms as f64
}

/// Largest product measure enumerated as a cross-check.
pub const ENUMERATION_LIMIT: usize = 4096;

/// Commutative case: factor `j` carries `diag(values[j])` with values in
/// `[-1, 1]` summing to zero. Compares `Prob(|S_n| >= t)` with
/// `2 exp(-t^2 / (2n))`; for product measures up to [`ENUMERATION_LIMIT`]
/// atoms the operator-side value is cross-checked against direct
/// enumeration (extras `enumeration`, `enumeration_diff`).
pub fn check_scalar_chernoff(values: &[Vec<f64>], ts: &[f64], tol: Tolerance) -> Result<Vec<CheckResult>> {
    let dims: Vec<usize> = values.iter().map(Vec::len).collect();
    let filtration = TensorFiltration::new(dims.clone())?;
    for (k, vs) in values.iter().enumerate() {
        if vs.iter().any(|v| !(v.abs() <= 1.0)) {
            return Err(Error::Precondition(format!("factor {} has values outside [-1, 1]", k + 1)));
        }
        let mean = vs.iter().sum::<f64>() / vs.len() as f64;
        if mean.abs() > 1e-12 {
            return Err(Error::Precondition(format!("factor {} has mean {mean:e}", k + 1)));
        }
    }
    let a: Vec<HermitianElement> = values.iter().map(|vs| HermitianElement::diagonal(vs)).collect();
    let sum = check_independent_summands(&filtration, &a)?;
    let abs = abs_values(&sum.spectrum()?);
    let enumerate = filtration.ambient_dim() <= ENUMERATION_LIMIT;
    ts.iter()
        .enumerate()
        .map(|(k, &t)| {
            let lhs = tail_fraction(&abs, t);
            let mut r = CheckResult::compare(TheoremId::Chernoff, lhs, bounds::scalar_chernoff_bound(t, values.len())?, tol);
            r.label = format!("t={t}");
            r.dims = dims.clone();
            r.n_steps = values.len();
            r.grid_index = k;
            r.extras.insert("t".into(), t);
            if enumerate {
                let exact = enumerate_abs_tail(values, t);
                r.extras.insert("enumeration".into(), exact);
                r.extras.insert("enumeration_diff".into(), (lhs - exact).abs());
                r.residual = (lhs - exact).abs();
                if lhs != exact {
                    r.holds = false;
                    r.note = format!("spectral tail {lhs} differs from enumeration {exact}");
                }
            }
            Ok(r)
        })
        .collect()
}

/// Supermartingale bound
/// `Prob(x_n - x_0 >= lambda) <= exp(-lambda^2 / (2 (sum_j (sigma_j^2 + D b_j + a_j^2) + M lambda / 3)))`
/// with constants extracted for the given `b`, `a` (empty = zero) and
/// re-verified in operator order.
///
/// For martingales the two-sided (factor 2) form is also evaluated against
/// `Prob(|x_n - x_0| >= lambda)` with `b = 0` and `M` bounding both signs;
/// `holds` then requires both. Degenerate denominators are flagged.
pub fn check_supermartingale_azuma(
    seq: &MartingaleSequence,
    lambdas: &[f64],
    a: &[f64],
    b: &[f64],
    tol: Tolerance,
) -> Result<Vec<CheckResult>> {
    require_steps(seq)?;
    let validation = validate_supermartingale(seq, tol)?;
    if !validation.holds {
        return Ok(vec![validation]);
    }
    let params = extract_variance_params(seq, b, a)?;
    let mut defect = require_hypotheses(variance_hypothesis_defect(seq, &params, false)?, "variance")?;
    let two_sided = if seq.kind() == SequenceKind::Martingale && validate_martingale(seq, tol)?.holds {
        let sym = extract_two_sided_variance_params(seq, a)?;
        defect = defect.max(require_hypotheses(variance_hypothesis_defect(seq, &sym, true)?, "two-sided variance")?);
        Some(sym)
    } else {
        None
    };
    let spectrum = increment_spectrum(seq)?;
    let abs = abs_values(&spectrum);
    lambdas
        .iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let lhs = tail_fraction(&spectrum, lambda);
            let denominator =
                bounds::supermartingale_denominator(lambda, &params.sigma_sq, &params.a, &params.b, params.m, params.d)?;
            let mut r = match bounds::supermartingale_bound(lambda, &params.sigma_sq, &params.a, &params.b, params.m, params.d) {
                Ok(rhs) => CheckResult::compare(TheoremId::SuperAzuma, lhs, rhs, tol),
                Err(Error::Degenerate(den)) => {
                    CheckResult::degenerate(TheoremId::SuperAzuma, lhs, format!("denominator {den:e} is not positive"))
                }
                Err(e) => return Err(e),
            }
            .with_context(seq, k);
            r.label = format!("lambda={lambda}");
            r.residual = defect;
            r.extras.insert("lambda".into(), lambda);
            r.extras.insert("denominator".into(), denominator);
            if let Some(sym) = &two_sided {
                let lhs2 = tail_fraction(&abs, lambda);
                let rhs2 = bounds::supermartingale_two_sided_bound(lambda, &sym.sigma_sq, &sym.a, &sym.b, sym.m, 0.0)?;
                r.extras.insert("two_sided_lhs".into(), lhs2);
                r.extras.insert("two_sided_rhs".into(), rhs2);
                if !tol.accepts(lhs2, rhs2) {
                    r.holds = false;
                    r.degenerate = false;
                    r.note = format!("two-sided form fails: {lhs2} > {rhs2}");
                }
            }
            r.params = Some(params.clone());
            Ok(r)
        })
        .collect()
}

/// Martingale variance bound
/// `Prob(|x_n - x_0| >= lambda) <= 2 exp(-lambda^2 / (2 (sum_j (sigma_j^2 + a_j^2) + M lambda / 3)))`
/// with `sigma_j^2 = ||E_{j-1}(dx_j^2)||` and `+-dx_j <= a_j + M`.
pub fn check_thm32(seq: &MartingaleSequence, lambdas: &[f64], a: &[f64], tol: Tolerance) -> Result<Vec<CheckResult>> {
    require_steps(seq)?;
    if let Some(v) = require_martingale(seq, tol)? {
        return Ok(vec![v]);
    }
    let params = extract_two_sided_variance_params(seq, a)?;
    let defect = require_hypotheses(variance_hypothesis_defect(seq, &params, true)?, "variance")?;
    let spectrum = increment_spectrum(seq)?;
    let abs = abs_values(&spectrum);
    lambdas
        .iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let rhs = bounds::martingale_variance_bound(lambda, &params.sigma_sq, &params.a, params.m)?;
            let mut r = CheckResult::compare(TheoremId::Thm32, tail_fraction(&abs, lambda), rhs, tol).with_context(seq, k);
            r.label = format!("lambda={lambda}");
            r.residual = defect;
            r.params = Some(params.clone());
            r.extras.insert("lambda".into(), lambda);
            r.extras.insert("one_sided_lhs".into(), tail_fraction(&spectrum, lambda));
            Ok(r)
        })
        .collect()
}

/// `3 / M` for the one-sided constants of a martingale, the supremum of the
/// admissible `lambda` in [`check_mgf`].
pub fn mgf_lambda_limit(seq: &MartingaleSequence) -> Result<f64> {
    Ok(3.0 / extract_variance_params(seq, &[], &[])?.m)
}

/// `tau(exp(lambda (x_n - x_0))) <= exp(lambda^2 K^2 / (2 (1 - lambda M / 3)))`
/// with `K^2 = sum_j sigma_j^2` and `dx_j <= M`. Grid points with
/// `lambda >= 3 / M` are flagged degenerate.
pub fn check_mgf(seq: &MartingaleSequence, lambdas: &[f64], tol: Tolerance) -> Result<Vec<CheckResult>> {
    require_steps(seq)?;
    if let Some(v) = require_martingale(seq, tol)? {
        return Ok(vec![v]);
    }
    let params = extract_variance_params(seq, &[], &[])?;
    let defect = require_hypotheses(variance_hypothesis_defect(seq, &params, false)?, "variance")?;
    let spectrum = increment_spectrum(seq)?;
    lambdas
        .iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let lhs = spectrum.iter().map(|v| (lambda * v).exp()).sum::<f64>() / spectrum.len() as f64;
            let mut r = match bounds::mgf_bound(lambda, params.k_sq, params.m) {
                Ok(rhs) => CheckResult::compare(TheoremId::Mgf, lhs, rhs, tol),
                Err(Error::Range(msg)) => CheckResult::degenerate(TheoremId::Mgf, lhs, msg),
                Err(e) => return Err(e),
            }
            .with_context(seq, k);
            r.label = format!("lambda={lambda}");
            r.residual = defect;
            r.params = Some(params.clone());
            r.extras.insert("lambda".into(), lambda);
            r.extras.insert("lambda_limit".into(), 3.0 / params.m);
            Ok(r)
        })
        .collect()
}

/// Tail form `Prob(|x_n - x_0| >= t) <= 2 exp(-3 t^2 / (6 sum sigma_j^2 + 2 t M))`
/// (records `COR34_TAIL`, one per `t`) and the Schatten-norm form
/// `||x_n - x_0||_p <= sqrt(3p) K + sqrt(8) p max_j ||dx_j||` with
/// `K^2 = sum_j ||E_{j-1}(dx_j^2)||` (records `COR34_LP`, one per `p`).
pub fn check_cor34(seq: &MartingaleSequence, ts: &[f64], ps: &[f64], tol: Tolerance) -> Result<Vec<CheckResult>> {
    require_steps(seq)?;
    if let Some(v) = require_martingale(seq, tol)? {
        return Ok(vec![v]);
    }
    let params = extract_two_sided_variance_params(seq, &[])?;
    let defect = require_hypotheses(variance_hypothesis_defect(seq, &params, true)?, "variance")?;
    let spectrum = increment_spectrum(seq)?;
    let abs = abs_values(&spectrum);
    let mut out = Vec::with_capacity(ts.len() + ps.len());
    for (k, &t) in ts.iter().enumerate() {
        let rhs = bounds::cor34_tail_bound(t, &params.sigma_sq, params.m)?;
        let mut r = CheckResult::compare(TheoremId::Cor34Tail, tail_fraction(&abs, t), rhs, tol).with_context(seq, k);
        r.label = format!("t={t}");
        r.residual = defect;
        r.params = Some(params.clone());
        r.extras.insert("t".into(), t);
        out.push(r);
    }
    let k_norm = params.k_sq.sqrt();
    let m_max = params.step_max.iter().copied().fold(0.0f64, f64::max);
    for (k, &p) in ps.iter().enumerate() {
        let lhs = crate::algebra::schatten_norm_of_spectrum(&spectrum, p)?;
        let rhs = bounds::lp_norm_bound(p, k_norm, m_max)?;
        let mut r = CheckResult::compare(TheoremId::Cor34Lp, lhs, rhs, tol).with_context(seq, k);
        r.label = format!("p={p}");
        r.residual = defect;
        r.params = Some(params.clone());
        r.extras.insert("p".into(), p);
        r.extras.insert("K".into(), k_norm);
        r.extras.insert("M_max".into(), m_max);
        out.push(r);
    }
    Ok(out)
}

/// Independent centered summands `x_j = embed(a_j, j)`:
/// `Prob(S_n >= lambda) <= exp(-lambda^2 / (2 b^2 + (2/3) lambda M))` with
/// `b^2 = sum_j tau(a_j^2)` and `M = max_j ||a_j||`.
pub fn check_bernstein(
    filtration: &TensorFiltration,
    a: &[HermitianElement],
    lambdas: &[f64],
    tol: Tolerance,
) -> Result<Vec<CheckResult>> {
    let sum = check_independent_summands(filtration, a)?;
    let b: Vec<f64> = a.iter().map(|a_j| trace_state(&a_j.square()).max(0.0).sqrt()).collect();
    let mut m = RANGE_FLOOR;
    for a_j in a {
        m = m.max(a_j.op_norm()?);
    }
    let b_total_sq: f64 = b.iter().map(|v| v * v).sum();
    let params = BoundParams {
        b,
        m,
        b_total_sq,
        ..BoundParams::default()
    };
    let spectrum = sum.spectrum()?;
    lambdas
        .iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let rhs = bounds::bernstein_bound(lambda, b_total_sq, m)?;
            let mut r = CheckResult::compare(TheoremId::Bernstein, tail_fraction(&spectrum, lambda), rhs, tol);
            r.label = format!("lambda={lambda}");
            r.dims = filtration.factor_dims().to_vec();
            r.n_steps = a.len();
            r.grid_index = k;
            r.params = Some(params.clone());
            r.extras.insert("lambda".into(), lambda);
            Ok(r)
        })
        .collect()
}

/// Variance bound with the slack `a_j = max(M_j - M, 0)` derived from the
/// per-step maxima `M_j = ||dx_j||` and a chosen level `M > 0`. The stronger
/// displayed per-step form is recorded in the extras (`rhs_display`,
/// `display_holds`) but does not decide `holds`.
pub fn check_cor36(seq: &MartingaleSequence, lambdas: &[f64], m: f64, tol: Tolerance) -> Result<Vec<CheckResult>> {
    require_steps(seq)?;
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Parameter(format!("M = {m} must be positive")));
    }
    if let Some(v) = require_martingale(seq, tol)? {
        return Ok(vec![v]);
    }
    let base = extract_two_sided_variance_params(seq, &[])?;
    let mut params = base.clone();
    params.a = bounds::cor36_slack(&base.step_max, m);
    params.m = m;
    let defect = require_hypotheses(variance_hypothesis_defect(seq, &params, true)?, "variance")?;
    let abs = abs_values(&increment_spectrum(seq)?);
    lambdas
        .iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let rhs = bounds::cor36_bound(lambda, &params.sigma_sq, &params.step_max, m)?;
            let mut r = CheckResult::compare(TheoremId::Cor36, tail_fraction(&abs, lambda), rhs, tol).with_context(seq, k);
            r.label = format!("lambda={lambda}");
            r.residual = defect;
            r.params = Some(params.clone());
            r.extras.insert("lambda".into(), lambda);
            r.extras.insert("M".into(), m);
            let display = bounds::cor36_display_bound(lambda, &params.sigma_sq, &params.step_max, m)?;
            r.extras.insert("rhs_display".into(), display);
            r.extras.insert("display_holds".into(), f64::from(u8::from(tol.accepts(r.lhs, display))));
            Ok(r)
        })
        .collect()
}
