//! Tensor filtrations and their conditional expectations.
//!
//! The ambient space is `C^{d_1} ⊗ ... ⊗ C^{d_n}` with factor 1 the most
//! significant index. Level `j` is the subalgebra
//! `M_j = M_{d_1 ... d_j}(C) ⊗ 1`, so `M_0 = C1` and `M_n` is everything.
//! `E_j` keeps factors `1..=j` and applies the normalized partial trace to
//! the rest.
//!
//! Elements of `M_j` are often handled in *reduced* form, i.e. as the
//! `(d_1 ... d_j)`-dimensional matrix `a` with `x = a ⊗ 1`. The reduced form
//! has the same normalized trace, the same spectrum up to multiplicity and
//! hence the same tail probabilities and Schatten norms.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::{
    normalized_trace, order_defect, schatten_norm, trace_state, CMatrix, HermitianElement,
};
use crate::checkers::{CheckResult, TheoremId, Tolerance};
use crate::error::{Error, Result};
use crate::rng::SampleStream;

/// Normalized partial trace over the trailing `tail` dimensions of a
/// `(head * tail)`-dimensional matrix.
pub fn partial_trace_tail(m: &CMatrix, tail: usize) -> CMatrix {
    let head = m.nrows() / tail;
    let inv = 1.0 / tail as f64;
    DMatrix::from_fn(head, head, |a, b| {
        let mut s = Complex64::new(0.0, 0.0);
        for t in 0..tail {
            s += m[(a * tail + t, b * tail + t)];
        }
        s * inv
    })
}

/// `m ⊗ 1_tail`.
pub fn lift_tail(m: &CMatrix, tail: usize) -> CMatrix {
    let head = m.nrows();
    let mut out = DMatrix::zeros(head * tail, head * tail);
    for b in 0..head {
        for a in 0..head {
            let v = m[(a, b)];
            if v != Complex64::new(0.0, 0.0) {
                for t in 0..tail {
                    out[(a * tail + t, b * tail + t)] = v;
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorFiltration {
    factor_dims: Vec<usize>,
    ambient_dim: usize,
}

impl TensorFiltration {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        if factor_dims.is_empty() {
            return Err(Error::Parameter("a filtration needs at least one factor".into()));
        }
        if let Some(k) = factor_dims.iter().position(|&d| d == 0) {
            return Err(Error::Parameter(format!("factor {} has dimension 0", k + 1)));
        }
        let ambient_dim = factor_dims.iter().product();
        Ok(Self {
            factor_dims,
            ambient_dim,
        })
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Number of factors `n`; levels run over `0..=n`.
    pub fn n_levels(&self) -> usize {
        self.factor_dims.len()
    }

    /// `d_1 ... d_j`, the dimension of the reduced form of `M_j`.
    pub fn level_dim(&self, j: usize) -> usize {
        self.factor_dims[..j].iter().product()
    }

    /// `d_{j+1} ... d_n`.
    pub fn tail_dim(&self, j: usize) -> usize {
        self.factor_dims[j..].iter().product()
    }

    pub fn check_level(&self, j: usize) -> Result<()> {
        if j > self.n_levels() {
            return Err(Error::LevelOutOfRange {
                level: j,
                max: self.n_levels(),
            });
        }
        Ok(())
    }

    fn check_ambient(&self, x: &HermitianElement) -> Result<()> {
        if x.dim() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: x.dim(),
            });
        }
        Ok(())
    }

    /// `1 ⊗ ... ⊗ a ⊗ ... ⊗ 1` with `a` on factor `factor` (1-based).
    pub fn embed(&self, a: &HermitianElement, factor: usize) -> Result<HermitianElement> {
        if factor == 0 || factor > self.n_levels() {
            return Err(Error::LevelOutOfRange {
                level: factor,
                max: self.n_levels(),
            });
        }
        let d = self.factor_dims[factor - 1];
        if a.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: a.dim(),
            });
        }
        let head = self.level_dim(factor - 1);
        let tail = self.tail_dim(factor);
        let left: CMatrix = DMatrix::identity(head, head);
        let m = lift_tail(&left.kronecker(a.matrix()), tail);
        HermitianElement::from_matrix(m)
    }

    /// Reduced form of `E_j(x)` on factors `1..=j`.
    pub fn reduce(&self, x: &HermitianElement, j: usize) -> Result<HermitianElement> {
        self.check_ambient(x)?;
        self.check_level(j)?;
        HermitianElement::from_matrix(partial_trace_tail(x.matrix(), self.tail_dim(j)))
    }

    /// `a ⊗ 1` for a reduced element `a` of level `j`.
    pub fn lift(&self, a: &HermitianElement, j: usize) -> Result<HermitianElement> {
        self.check_level(j)?;
        if a.dim() != self.level_dim(j) {
            return Err(Error::DimensionMismatch {
                expected: self.level_dim(j),
                got: a.dim(),
            });
        }
        HermitianElement::from_matrix(lift_tail(a.matrix(), self.tail_dim(j)))
    }

    /// `E_j` on arbitrary (not necessarily self-adjoint) ambient matrices.
    pub fn conditional_expectation_matrix(&self, m: &CMatrix, j: usize) -> Result<CMatrix> {
        self.check_level(j)?;
        if m.nrows() != self.ambient_dim || m.ncols() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                got: m.nrows(),
            });
        }
        let tail = self.tail_dim(j);
        Ok(lift_tail(&partial_trace_tail(m, tail), tail))
    }

    pub fn conditional_expectation(&self, x: &HermitianElement, j: usize) -> Result<HermitianElement> {
        self.check_ambient(x)?;
        HermitianElement::from_matrix(self.conditional_expectation_matrix(x.matrix(), j)?)
    }

    /// Largest entry of `E_j(x) - x`; zero exactly when `x ∈ M_j`.
    pub fn level_residual(&self, x: &HermitianElement, j: usize) -> Result<f64> {
        Ok(self.conditional_expectation(x, j)?.max_abs_diff(x))
    }

    /// Random self-adjoint element of `M_j`, returned in ambient form.
    pub fn random_element(&self, j: usize, rng: &mut SampleStream) -> Result<HermitianElement> {
        self.check_level(j)?;
        let a = HermitianElement::from_matrix(rng.gue(self.level_dim(j)))?;
        self.lift(&a, j)
    }
}

pub fn conditional_expectation(
    x: &HermitianElement,
    filtration: &TensorFiltration,
    j: usize,
) -> Result<HermitianElement> {
    filtration.conditional_expectation(x, j)
}

pub fn embed(a: &HermitianElement, filtration: &TensorFiltration, factor: usize) -> Result<HermitianElement> {
    filtration.embed(a, factor)
}

/// Orthogonal projections summing to the identity.
#[derive(Clone, Debug)]
pub struct Pinching {
    projections: Vec<CMatrix>,
}

impl Pinching {
    pub fn new(projections: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = projections.first() else {
            return Err(Error::InvalidPartition("no projections".into()));
        };
        let d = first.nrows();
        let mut sum: CMatrix = DMatrix::zeros(d, d);
        for (i, p) in projections.iter().enumerate() {
            if p.nrows() != d || p.ncols() != d {
                return Err(Error::InvalidPartition(format!("projection {i} has the wrong shape")));
            }
            for (k, q) in projections.iter().enumerate() {
                let prod = p * q;
                let target = if i == k { p.clone() } else { DMatrix::zeros(d, d) };
                if (prod - target).norm() > 1e-10 {
                    return Err(Error::InvalidPartition(format!(
                        "projections {i} and {k} violate p_i p_k = delta_ik p_i"
                    )));
                }
            }
            sum += p;
        }
        if (sum - DMatrix::<Complex64>::identity(d, d)).norm() > 1e-10 {
            return Err(Error::InvalidPartition("projections do not sum to the identity".into()));
        }
        Ok(Self { projections })
    }

    /// Pinching onto consecutive diagonal blocks of the given sizes.
    pub fn blocks(sizes: &[usize]) -> Result<Self> {
        let d: usize = sizes.iter().sum();
        let mut start = 0;
        let mut projections = Vec::with_capacity(sizes.len());
        for &s in sizes {
            projections.push(DMatrix::from_fn(d, d, |i, j| {
                if i == j && i >= start && i < start + s {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }));
            start += s;
        }
        Self::new(projections)
    }

    /// Pinching onto the diagonal.
    pub fn diagonal(d: usize) -> Result<Self> {
        Self::blocks(&vec![1; d])
    }

    pub fn dim(&self) -> usize {
        self.projections[0].nrows()
    }

    pub fn projections(&self) -> &[CMatrix] {
        &self.projections
    }

    pub fn apply_matrix(&self, m: &CMatrix) -> Result<CMatrix> {
        if m.nrows() != self.dim() || m.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: m.nrows(),
            });
        }
        Ok(self
            .projections
            .iter()
            .fold(DMatrix::zeros(self.dim(), self.dim()), |acc, p| acc + p * m * p))
    }
}

/// `sum_i p_i x p_i`.
pub fn pinching_expectation(x: &HermitianElement, pinch: &Pinching) -> Result<HermitianElement> {
    HermitianElement::from_matrix(pinch.apply_matrix(x.matrix())?)
}

/// For random `a` on factor `j >= 2`, checks `E_{j-1}(embed(a)) = tau(a) 1`.
pub fn verify_order_independence(
    filtration: &TensorFiltration,
    samples: usize,
    rng: &mut SampleStream,
    tol: Tolerance,
) -> Result<CheckResult> {
    let n = filtration.n_levels();
    if n < 2 {
        return Err(Error::Precondition("order independence needs at least two factors".into()));
    }
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let j = 2 + rng.index(n - 1);
        let a = HermitianElement::from_matrix(rng.gue(filtration.factor_dims()[j - 1]))?;
        let e = filtration.conditional_expectation(&filtration.embed(&a, j)?, j - 1)?;
        let target = HermitianElement::scalar(filtration.ambient_dim(), trace_state(&a));
        worst = worst.max(e.max_abs_diff(&target));
    }
    let mut result = CheckResult::compare(TheoremId::OrderIndep, worst, 1e-10, tol);
    result.dims = filtration.factor_dims().to_vec();
    result.n_steps = n;
    result.residual = worst;
    Ok(result)
}

/// Conditional expectation axioms at a random level, one record per axiom:
/// trace preservation, bimodule property, tower identity, positivity,
/// `L_p` contractivity for `p ∈ {1, 2, inf}` and agreement of the pinching
/// route with the partial trace on `M_0`-diagonal data.
pub fn check_ce_axioms(
    filtration: &TensorFiltration,
    rng: &mut SampleStream,
    tol: Tolerance,
) -> Result<Vec<CheckResult>> {
    let n = filtration.n_levels();
    let d = filtration.ambient_dim();
    let j = rng.index(n + 1);
    let i = rng.index(n + 1);
    let x = HermitianElement::from_matrix(rng.gue(d))?;
    let ex = filtration.conditional_expectation(&x, j)?;

    let mut out = Vec::new();
    let mut push = |label: &str, lhs: f64, rhs: f64| {
        let mut r = CheckResult::compare(TheoremId::CeAxioms, lhs, rhs, tol);
        r.label = label.to_string();
        r.dims = filtration.factor_dims().to_vec();
        r.n_steps = n;
        r.extras.insert("level".into(), j as f64);
        out.push(r);
    };

    push("trace", (trace_state(&ex) - trace_state(&x)).abs(), 1e-10);

    // E_j(a x b) = a E_j(x) b for a, b ∈ M_j
    let level_dim = filtration.level_dim(j);
    let tail = filtration.tail_dim(j);
    let a = lift_tail(&rng.ginibre(level_dim), tail);
    let b = lift_tail(&rng.ginibre(level_dim), tail);
    let lhs = filtration.conditional_expectation_matrix(&(&a * x.matrix() * &b), j)?;
    let rhs = &a * ex.matrix() * &b;
    push("module", (lhs - &rhs).norm() / rhs.norm().max(1.0), 1e-9);

    let tower = filtration.conditional_expectation(&filtration.conditional_expectation(&x, j)?, i)?;
    let swapped = filtration.conditional_expectation(&filtration.conditional_expectation(&x, i)?, j)?;
    let direct = filtration.conditional_expectation(&x, i.min(j))?;
    push(
        "tower",
        tower.max_abs_diff(&direct).max(swapped.max_abs_diff(&direct)),
        1e-10,
    );

    let g = rng.ginibre(d);
    let positive = HermitianElement::from_matrix(&g * g.adjoint())?;
    let e_pos = filtration.conditional_expectation(&positive, j)?;
    push(
        "positivity",
        order_defect(&HermitianElement::zeros(d), &e_pos)?,
        1e-10,
    );

    for (label, p) in [("contractivity_p1", 1.0), ("contractivity_p2", 2.0), ("contractivity_pinf", f64::INFINITY)] {
        let reduced = filtration.reduce(&x, j)?;
        push(label, schatten_norm(&reduced, p)?, schatten_norm(&x, p)?);
    }

    // Block pinching along the first factor is E onto (diagonal of factor 1) ⊗ M_rest;
    // composing it with E_0 must give E_0.
    let pinch = Pinching::blocks(&vec![filtration.tail_dim(1); filtration.factor_dims()[0]])?;
    let pinched = pinching_expectation(&x, &pinch)?;
    let e0 = filtration.conditional_expectation(&x, 0)?;
    let e0_pinched = filtration.conditional_expectation(&pinched, 0)?;
    let idempotent = pinching_expectation(&pinched, &pinch)?;
    push(
        "pinching",
        e0.max_abs_diff(&e0_pinched)
            .max(idempotent.max_abs_diff(&pinched))
            .max((trace_state(&pinched) - trace_state(&x)).abs()),
        1e-10,
    );

    Ok(out)
}

/// Largest deviation from `tau(E_j x) = tau(x)` over all levels.
pub fn trace_preservation_residual(filtration: &TensorFiltration, x: &HermitianElement) -> Result<f64> {
    let t = normalized_trace(x.matrix()).re;
    let mut worst = 0.0f64;
    for j in 0..=filtration.n_levels() {
        worst = worst.max((trace_state(&filtration.conditional_expectation(x, j)?) - t).abs());
    }
    Ok(worst)
}
