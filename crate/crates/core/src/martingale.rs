//! Operator martingales and supermartingales on a tensor filtration.
//!
//! A sequence `(x_0, ..., x_k)` with `k <= n` lives on a [`TensorFiltration`]
//! with `x_j ∈ M_j`. Spectral quantities of terms and differences are taken
//! on reduced forms (see [`crate::condexp`]), which have the same spectrum as
//! the ambient element and are much smaller.

use serde::{Deserialize, Serialize};

use crate::algebra::{order_defect, HermitianElement};
use crate::checkers::{CheckResult, TheoremId, Tolerance};
use crate::condexp::{lift_tail, partial_trace_tail, TensorFiltration};
use crate::error::{Error, Result};
use crate::rng::SampleStream;

/// Absolute entrywise tolerance for the adaptedness and martingale relations.
pub const RELATION_TOLERANCE: f64 = 1e-10;
/// Relative tolerance for re-checking extracted hypotheses in operator order.
pub const HYPOTHESIS_TOLERANCE: f64 = 1e-8;
pub const LIPSCHITZ_FLOOR: f64 = 1e-12;
pub const RANGE_FLOOR: f64 = 1e-8;
const MAX_DRAW_ATTEMPTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceKind {
    Martingale,
    Supermartingale,
}

#[derive(Clone, Debug)]
pub struct MartingaleSequence {
    filtration: TensorFiltration,
    terms: Vec<HermitianElement>,
    kind: SequenceKind,
}

/// Hypothesis constants for the tail bounds. Vectors are indexed by step
/// `j = 1..=n` (entry 0 is step 1).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    /// Lipschitz constants `c_j` with `-c_j <= dx_j <= c_j`.
    pub c: Vec<f64>,
    pub sigma_sq: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    #[serde(rename = "M")]
    pub m: f64,
    /// `max_{1 <= j <= n-1}` of the spectral maxima of `x_j - x_0`.
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "K_sq")]
    pub k_sq: f64,
    pub b_total_sq: f64,
    /// Largest eigenvalue of `x_j - x_0`, for `j = 1..=n`.
    pub spectral_max: Vec<f64>,
    /// Per-step upper bounds `M_j` on the differences.
    pub step_max: Vec<f64>,
}

impl BoundParams {
    pub fn sum_c_sq(&self) -> f64 {
        self.c.iter().map(|c| c * c).sum()
    }
}

impl MartingaleSequence {
    /// Wraps `terms` without checking the (super)martingale relation; see
    /// [`validate_martingale`] and [`validate_supermartingale`].
    pub fn new(filtration: TensorFiltration, terms: Vec<HermitianElement>, kind: SequenceKind) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Parameter("a sequence needs at least x_0".into()));
        }
        if terms.len() > filtration.n_levels() + 1 {
            return Err(Error::Parameter(format!(
                "{} terms exceed the {} levels of the filtration",
                terms.len(),
                filtration.n_levels() + 1
            )));
        }
        for x in &terms {
            if x.dim() != filtration.ambient_dim() {
                return Err(Error::DimensionMismatch {
                    expected: filtration.ambient_dim(),
                    got: x.dim(),
                });
            }
        }
        Ok(Self {
            filtration,
            terms,
            kind,
        })
    }

    pub fn filtration(&self) -> &TensorFiltration {
        &self.filtration
    }

    pub fn terms(&self) -> &[HermitianElement] {
        &self.terms
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn n_steps(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn first(&self) -> &HermitianElement {
        &self.terms[0]
    }

    pub fn last(&self) -> &HermitianElement {
        &self.terms[self.terms.len() - 1]
    }

    /// `dx_j = x_j - x_{j-1}` for `j >= 1`.
    pub fn increment(&self, j: usize) -> HermitianElement {
        &self.terms[j] - &self.terms[j - 1]
    }

    /// `(dx_0, ..., dx_k)` with `dx_0 = x_0`.
    pub fn differences(&self) -> Vec<HermitianElement> {
        std::iter::once(self.terms[0].clone())
            .chain((1..self.terms.len()).map(|j| self.increment(j)))
            .collect()
    }

    /// `x_k - x_0 = sum_{j>=1} dx_j`.
    pub fn total_increment(&self) -> HermitianElement {
        self.last() - self.first()
    }

    /// `(-x_j)`; a martingale stays a martingale.
    pub fn negated(&self) -> Self {
        Self {
            filtration: self.filtration.clone(),
            terms: self.terms.iter().map(|x| -x).collect(),
            kind: self.kind,
        }
    }

    /// Reduced form of `x` on factors `1..=j`.
    fn reduced(&self, x: &HermitianElement, j: usize) -> HermitianElement {
        HermitianElement::from_matrix_unchecked(partial_trace_tail(x.matrix(), self.filtration.tail_dim(j)))
    }

    /// Reduced forms at level `j` of `v_j = x_j - E_{j-1}(x_j)` and at level
    /// `j - 1` of `E_{j-1}(x_j)`.
    fn innovation(&self, j: usize) -> (HermitianElement, HermitianElement) {
        let xj = self.reduced(&self.terms[j], j);
        let d = self.filtration.factor_dims()[j - 1];
        let predicted = partial_trace_tail(xj.matrix(), d);
        let v = HermitianElement::from_matrix_unchecked(xj.matrix() - lift_tail(&predicted, d));
        (v, HermitianElement::from_matrix_unchecked(predicted))
    }

    /// Reduced form at level `j - 1` of `E_{j-1}(v^2)` for a reduced level-`j` element `v`.
    fn conditional_square(&self, v: &HermitianElement, j: usize) -> HermitianElement {
        let d = self.filtration.factor_dims()[j - 1];
        HermitianElement::from_matrix_unchecked(partial_trace_tail(v.square().matrix(), d))
    }
}

/// `x_j = E_j(y)` for `j = 0..=n`.
pub fn doob_martingale(y: &HermitianElement, filtration: &TensorFiltration) -> Result<MartingaleSequence> {
    let terms = (0..=filtration.n_levels())
        .map(|j| filtration.conditional_expectation(y, j))
        .collect::<Result<Vec<_>>>()?;
    MartingaleSequence::new(filtration.clone(), terms, SequenceKind::Martingale)
}

/// Random `d ∈ M_j` with `E_{j-1}(d) = 0` and `||d|| = c`.
///
/// Draws a GUE matrix on factors `1..=j`, subtracts its conditional
/// expectation onto level `j - 1` and rescales to operator norm `c`.
pub fn random_centered_difference(
    filtration: &TensorFiltration,
    j: usize,
    c: f64,
    rng: &mut SampleStream,
) -> Result<HermitianElement> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Parameter(format!("scale c = {c} must be positive")));
    }
    if j == 0 || j > filtration.n_levels() {
        return Err(Error::LevelOutOfRange {
            level: j,
            max: filtration.n_levels(),
        });
    }
    let d = filtration.factor_dims()[j - 1];
    for _ in 0..MAX_DRAW_ATTEMPTS {
        let g = rng.gue(filtration.level_dim(j));
        let centered = HermitianElement::from_matrix_unchecked(&g - lift_tail(&partial_trace_tail(&g, d), d));
        let norm = centered.op_norm()?;
        if norm > 1e-12 {
            let scaled = centered.scale(c / norm);
            return HermitianElement::from_matrix(lift_tail(scaled.matrix(), filtration.tail_dim(j)));
        }
    }
    Err(Error::DegenerateDraw(MAX_DRAW_ATTEMPTS))
}

/// `x_j = x_0 + sum_{k<=j} diffs[k]`; `diffs[k]` is the step-`k+1` difference.
pub fn martingale_from_differences(
    filtration: &TensorFiltration,
    diffs: &[HermitianElement],
    x0: &HermitianElement,
) -> Result<MartingaleSequence> {
    if diffs.len() > filtration.n_levels() {
        return Err(Error::Parameter(format!(
            "{} differences exceed the {} steps of the filtration",
            diffs.len(),
            filtration.n_levels()
        )));
    }
    let scale = |x: &HermitianElement| x.max_abs_entry().max(1.0);
    if x0.dim() != filtration.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: filtration.ambient_dim(),
            got: x0.dim(),
        });
    }
    if filtration.level_residual(x0, 0)? > RELATION_TOLERANCE * scale(x0) {
        return Err(Error::Construction {
            index: 0,
            reason: "x_0 is not a scalar multiple of the identity".into(),
        });
    }
    let mut terms = vec![x0.clone()];
    for (k, d) in diffs.iter().enumerate() {
        let j = k + 1;
        if d.dim() != filtration.ambient_dim() {
            return Err(Error::Construction {
                index: j,
                reason: format!("dimension {} differs from ambient {}", d.dim(), filtration.ambient_dim()),
            });
        }
        if filtration.level_residual(d, j)? > RELATION_TOLERANCE * scale(d) {
            return Err(Error::Construction {
                index: j,
                reason: format!("difference is not in M_{j}"),
            });
        }
        let centering = filtration.conditional_expectation(d, j - 1)?.max_abs_entry();
        if centering > RELATION_TOLERANCE * scale(d) {
            return Err(Error::Construction {
                index: j,
                reason: format!("E_{}(dx_{j}) has entry of size {centering:e}", j - 1),
            });
        }
        let next = &terms[k] + d;
        terms.push(next);
    }
    MartingaleSequence::new(filtration.clone(), terms, SequenceKind::Martingale)
}

/// Martingale started at a random scalar with differences of operator norm
/// `step_scale * u_j`, `u_j` uniform on `[0.25, 1]`. Steps on one-dimensional
/// factors are zero.
pub fn random_martingale(
    filtration: &TensorFiltration,
    step_scale: f64,
    rng: &mut SampleStream,
) -> Result<MartingaleSequence> {
    let d = filtration.ambient_dim();
    let x0 = HermitianElement::scalar(d, rng.normal());
    let mut diffs = Vec::with_capacity(filtration.n_levels());
    for j in 1..=filtration.n_levels() {
        let c = step_scale * rng.uniform_range(0.25, 1.0);
        diffs.push(centered_or_zero(filtration, j, c, rng)?);
    }
    martingale_from_differences(filtration, &diffs, &x0)
}

fn centered_or_zero(filtration: &TensorFiltration, j: usize, c: f64, rng: &mut SampleStream) -> Result<HermitianElement> {
    if filtration.factor_dims()[j - 1] == 1 || c == 0.0 {
        return Ok(HermitianElement::zeros(filtration.ambient_dim()));
    }
    random_centered_difference(filtration, j, c, rng)
}

/// `x_0 = 0`, `x_j = x_{j-1} + d_j - s_j` with `d_j` a centered difference of
/// norm `step_scale` and `s_j >= 0` in `M_{j-1}` of norm
/// `drift_scale * u_j`, `u_j` uniform on `[0.25, 1]`.
pub fn random_supermartingale(
    filtration: &TensorFiltration,
    drift_scale: f64,
    step_scale: f64,
    rng: &mut SampleStream,
) -> Result<MartingaleSequence> {
    if !(drift_scale >= 0.0) || !drift_scale.is_finite() {
        return Err(Error::Parameter(format!("drift scale {drift_scale} must be nonnegative")));
    }
    if !(step_scale > 0.0) || !step_scale.is_finite() {
        return Err(Error::Parameter(format!("step scale {step_scale} must be positive")));
    }
    let dim = filtration.ambient_dim();
    let mut terms = vec![HermitianElement::zeros(dim)];
    for j in 1..=filtration.n_levels() {
        let d = centered_or_zero(filtration, j, step_scale, rng)?;
        let mut next = &terms[j - 1] + &d;
        if drift_scale > 0.0 {
            let g = rng.ginibre(filtration.level_dim(j - 1));
            let s = HermitianElement::from_matrix_unchecked(&g * g.adjoint());
            let norm = s.op_norm()?;
            if norm > 0.0 {
                let s = s.scale(drift_scale * rng.uniform_range(0.25, 1.0) / norm);
                let s = HermitianElement::from_matrix(lift_tail(s.matrix(), filtration.tail_dim(j - 1)))?;
                next = &next - &s;
            }
        }
        terms.push(next);
    }
    let kind = if drift_scale == 0.0 {
        SequenceKind::Martingale
    } else {
        SequenceKind::Supermartingale
    };
    MartingaleSequence::new(filtration.clone(), terms, kind)
}

fn adaptedness_residual(seq: &MartingaleSequence) -> Result<f64> {
    let mut worst = 0.0f64;
    for (j, x) in seq.terms.iter().enumerate() {
        let r = seq.filtration.level_residual(x, j)? / x.max_abs_entry().max(1.0);
        worst = worst.max(r);
    }
    Ok(worst)
}

fn validation_result(seq: &MartingaleSequence, label: &str, residual: f64, tol: Tolerance) -> CheckResult {
    let mut r = CheckResult::compare(TheoremId::MartValid, residual, RELATION_TOLERANCE, tol);
    r.label = label.to_string();
    r.dims = seq.filtration.factor_dims().to_vec();
    r.n_steps = seq.n_steps();
    r.residual = residual;
    r
}

/// Adaptedness plus `E_{j-1}(x_j) = x_{j-1}`; reports the worst relative
/// entrywise residual against [`RELATION_TOLERANCE`].
pub fn validate_martingale(seq: &MartingaleSequence, tol: Tolerance) -> Result<CheckResult> {
    let mut worst = adaptedness_residual(seq)?;
    for j in 1..seq.terms.len() {
        let e = seq.filtration.conditional_expectation(&seq.terms[j], j - 1)?;
        let scale = seq.terms[j].max_abs_entry().max(1.0);
        worst = worst.max(e.max_abs_diff(&seq.terms[j - 1]) / scale);
    }
    Ok(validation_result(seq, "martingale", worst, tol))
}

/// Adaptedness plus `E_{j-1}(x_j) <= x_{j-1}` in operator order.
pub fn validate_supermartingale(seq: &MartingaleSequence, tol: Tolerance) -> Result<CheckResult> {
    let mut worst = adaptedness_residual(seq)?;
    for j in 1..seq.terms.len() {
        let (_, predicted) = seq.innovation(j);
        let previous = seq.reduced(&seq.terms[j - 1], j - 1);
        worst = worst.max(order_defect(&predicted, &previous)?);
    }
    Ok(validation_result(seq, "supermartingale", worst, tol))
}

/// Smallest constants with `-c_j <= dx_j <= c_j`: `c_j = ||dx_j||`, floored at
/// [`LIPSCHITZ_FLOOR`].
pub fn extract_azuma_params(seq: &MartingaleSequence) -> Result<BoundParams> {
    let mut c = Vec::with_capacity(seq.n_steps());
    for j in 1..=seq.n_steps() {
        let dx = seq.reduced(&seq.increment(j), j);
        c.push(dx.op_norm()?.max(LIPSCHITZ_FLOOR));
    }
    Ok(BoundParams {
        c,
        ..BoundParams::default()
    })
}

fn resolve_vector(name: &str, v: &[f64], n: usize) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Ok(vec![0.0; n]);
    }
    if v.len() != n {
        return Err(Error::Parameter(format!("{name} has {} entries, expected {n}", v.len())));
    }
    if v.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::Parameter(format!("{name} entries must be nonnegative")));
    }
    Ok(v.to_vec())
}

fn variance_params(seq: &MartingaleSequence, b: &[f64], a: &[f64], two_sided: bool) -> Result<BoundParams> {
    let n = seq.n_steps();
    let b = resolve_vector("b", b, n)?;
    let a = resolve_vector("a", a, n)?;
    let mut sigma_sq = Vec::with_capacity(n);
    let mut spectral_max = Vec::with_capacity(n);
    let mut step_max = Vec::with_capacity(n);
    let mut m = RANGE_FLOOR;
    for j in 1..=n {
        let (v, _) = seq.innovation(j);
        let previous = seq.reduced(&seq.terms[j - 1], j - 1);
        let second = seq.conditional_square(&v, j);
        let excess = &second - &previous.scale(b[j - 1]);
        sigma_sq.push(excess.max_eigenvalue()?.max(0.0));

        let spectrum = v.spectrum()?;
        let upper = if two_sided {
            spectrum[0].abs().max(spectrum[spectrum.len() - 1].abs())
        } else {
            spectrum[spectrum.len() - 1]
        };
        step_max.push(upper);
        m = m.max(upper - a[j - 1]);

        let drift = seq.reduced(&(&seq.terms[j] - &seq.terms[0]), j);
        spectral_max.push(drift.max_eigenvalue()?);
    }
    // D = max over 1 <= j <= n-1; with no such j it is the (zero) spectral max of x_0 - x_0.
    let d = if n >= 2 {
        spectral_max[..n - 1].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        0.0
    };
    Ok(BoundParams {
        c: Vec::new(),
        k_sq: sigma_sq.iter().sum(),
        b_total_sq: b.iter().map(|v| v * v).sum(),
        sigma_sq,
        a,
        b,
        m,
        d,
        spectral_max,
        step_max,
    })
}

/// With `v_j = x_j - E_{j-1}(x_j)`:
/// `sigma_j^2 = max(0, max eig(E_{j-1}(v_j^2) - b_j x_{j-1}))`,
/// `M = max(1e-8, max_j max eig(v_j - a_j))`, `D` from the spectral maxima of
/// `x_j - x_0`. `a` and `b` may be empty (all zero).
pub fn extract_variance_params(seq: &MartingaleSequence, b: &[f64], a: &[f64]) -> Result<BoundParams> {
    variance_params(seq, b, a, false)
}

/// As [`extract_variance_params`] with `b = 0`, but `M` also bounds `-v_j`, so
/// the constants hold for both `x` and `-x`. Two-sided tail bounds need this.
pub fn extract_two_sided_variance_params(seq: &MartingaleSequence, a: &[f64]) -> Result<BoundParams> {
    variance_params(seq, &[], a, true)
}

/// Worst relative defect of `-c_j <= dx_j <= c_j`.
pub fn azuma_hypothesis_defect(seq: &MartingaleSequence, c: &[f64]) -> Result<f64> {
    if c.len() != seq.n_steps() {
        return Err(Error::Parameter(format!("c has {} entries, expected {}", c.len(), seq.n_steps())));
    }
    let mut worst = 0.0f64;
    for j in 1..=seq.n_steps() {
        let dx = seq.reduced(&seq.increment(j), j);
        let bound = HermitianElement::scalar(dx.dim(), c[j - 1]);
        worst = worst.max(order_defect(&dx, &bound)?).max(order_defect(&-&bound, &dx)?);
    }
    Ok(worst)
}

/// Worst relative defect of
/// (i) `E_{j-1}(v_j^2) <= sigma_j^2 + b_j x_{j-1}` and (ii) `v_j <= a_j + M`
/// (and `-v_j <= a_j + M` when `two_sided`).
pub fn variance_hypothesis_defect(seq: &MartingaleSequence, params: &BoundParams, two_sided: bool) -> Result<f64> {
    let n = seq.n_steps();
    let b = resolve_vector("b", &params.b, n)?;
    let a = resolve_vector("a", &params.a, n)?;
    if params.sigma_sq.len() != n {
        return Err(Error::Parameter(format!(
            "sigma_sq has {} entries, expected {n}",
            params.sigma_sq.len()
        )));
    }
    let mut worst = 0.0f64;
    for j in 1..=n {
        let (v, _) = seq.innovation(j);
        let previous = seq.reduced(&seq.terms[j - 1], j - 1);
        let second = seq.conditional_square(&v, j);
        let rhs = &HermitianElement::scalar(previous.dim(), params.sigma_sq[j - 1]) + &previous.scale(b[j - 1]);
        worst = worst.max(order_defect(&second, &rhs)?);
        let ceiling = HermitianElement::scalar(v.dim(), a[j - 1] + params.m);
        worst = worst.max(order_defect(&v, &ceiling)?);
        if two_sided {
            worst = worst.max(order_defect(&-&v, &ceiling)?);
        }
    }
    Ok(worst)
}
