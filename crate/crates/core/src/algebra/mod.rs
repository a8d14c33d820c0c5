//! Hermitian elements of the matrix algebra `M_d(C)` with normalized trace.
//!
//! All spectral quantities (functions of an element, tail probabilities,
//! Schatten norms, the operator order) go through one eigendecomposition
//! path, see [`spectral_decompose`]. Every constructor and every operation
//! returning an element re-symmetrizes its output as `(z + z^*) / 2`.

mod checks;
mod eigen;

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub use checks::{check_exp_chebyshev, check_golden_thompson, check_lp_integral_identity};
pub use eigen::{spectral_decompose, SpectralDecomposition, CONVERGENCE_THRESHOLD, MAX_SWEEPS};

pub type CMatrix = DMatrix<Complex64>;

/// Self-adjoint element of `M_d(C)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianElement {
    entries: CMatrix,
}

fn symmetrize(m: CMatrix) -> CMatrix {
    let adj = m.adjoint();
    (m + adj).scale(0.5)
}

impl HermitianElement {
    /// Symmetrizes `m`; fails only for empty or non-square input.
    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::Empty);
        }
        Ok(Self::from_matrix_unchecked(m))
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        Self {
            entries: symmetrize(m),
        }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::NotSquare {
                rows: d,
                cols: rows.first().map_or(0, |r| r.len()),
            });
        }
        Self::from_matrix(DMatrix::from_fn(d, d, |i, j| Complex64::new(rows[i][j], 0.0)))
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            entries: DMatrix::zeros(d, d),
        }
    }

    pub fn identity(d: usize) -> Self {
        Self::scalar(d, 1.0)
    }

    pub fn scalar(d: usize, value: f64) -> Self {
        Self {
            entries: DMatrix::identity(d, d).scale(value),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = values.len();
        Self {
            entries: DMatrix::from_fn(d, d, |i, j| {
                if i == j {
                    Complex64::new(values[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            entries: self.entries.scale(s),
        }
    }

    /// `x^2`.
    pub fn square(&self) -> Self {
        Self::from_matrix_unchecked(&self.entries * &self.entries)
    }

    /// `a x a` for Hermitian `a`.
    pub fn sandwich(&self, a: &HermitianElement) -> Result<Self> {
        self.check_dim(a)?;
        Ok(Self::from_matrix_unchecked(&a.entries * &self.entries * &a.entries))
    }

    /// Tensor product `self ⊗ other`.
    pub fn kron(&self, other: &HermitianElement) -> Self {
        Self::from_matrix_unchecked(self.entries.kronecker(&other.entries))
    }

    pub fn check_dim(&self, other: &HermitianElement) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &HermitianElement) -> f64 {
        (&self.entries - &other.entries)
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// Largest absolute entry.
    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm()
    }

    /// Whether `self` is diagonal; diagonal elements skip the eigensolver.
    pub fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|j| (0..d).all(|i| i == j || self.entries[(i, j)] == Complex64::new(0.0, 0.0)))
    }

    pub fn spectrum(&self) -> Result<Vec<f64>> {
        if self.is_diagonal() {
            let mut values: Vec<f64> = self.entries.diagonal().iter().map(|z| z.re).collect();
            values.sort_by(f64::total_cmp);
            return Ok(values);
        }
        eigen::eigenvalues(self)
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(*self.spectrum()?.last().expect("dim >= 1"))
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.spectrum()?[0])
    }

    /// Operator norm `max |lambda_i|`.
    pub fn op_norm(&self) -> Result<f64> {
        let s = self.spectrum()?;
        Ok(s[0].abs().max(s[s.len() - 1].abs()))
    }
}

impl Add for &HermitianElement {
    type Output = HermitianElement;
    fn add(self, rhs: &HermitianElement) -> HermitianElement {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in addition");
        HermitianElement {
            entries: &self.entries + &rhs.entries,
        }
    }
}

impl Sub for &HermitianElement {
    type Output = HermitianElement;
    fn sub(self, rhs: &HermitianElement) -> HermitianElement {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in subtraction");
        HermitianElement {
            entries: &self.entries - &rhs.entries,
        }
    }
}

impl Neg for &HermitianElement {
    type Output = HermitianElement;
    fn neg(self) -> HermitianElement {
        HermitianElement {
            entries: -&self.entries,
        }
    }
}

impl Mul<f64> for &HermitianElement {
    type Output = HermitianElement;
    fn mul(self, rhs: f64) -> HermitianElement {
        self.scale(rhs)
    }
}

/// The normalized trace `tau = tr / d` on `M_d(C)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TracialState {
    dim: usize,
}

impl TracialState {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty);
        }
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn evaluate(&self, x: &HermitianElement) -> Result<f64> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        Ok(trace_state(x))
    }

    /// `tau` of an arbitrary (not necessarily Hermitian) matrix.
    pub fn evaluate_matrix(&self, m: &CMatrix) -> Result<Complex64> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: m.nrows(),
            });
        }
        Ok(normalized_trace(m))
    }
}

pub(crate) fn normalized_trace(m: &CMatrix) -> Complex64 {
    m.trace() / m.nrows() as f64
}

pub fn trace_state(x: &HermitianElement) -> f64 {
    normalized_trace(x.matrix()).re
}

/// `f(x) = sum_i f(lambda_i) P_i`. Fails with [`Error::Domain`] when `f` is not
/// finite at some eigenvalue.
pub fn apply_function<F: Fn(f64) -> f64>(x: &HermitianElement, f: F) -> Result<HermitianElement> {
    spectral_decompose(x)?.map(f)
}

pub fn exp(x: &HermitianElement) -> Result<HermitianElement> {
    apply_function(x, f64::exp)
}

/// Relative spectral tolerance used to close the interval `[t, inf)`.
pub fn boundary_tolerance(spectral_radius: f64) -> f64 {
    1e-10 * spectral_radius.max(1.0)
}

/// Fraction of (sorted or unsorted) eigenvalues lying in `[t - tol, inf)`.
pub fn tail_fraction(eigenvalues: &[f64], t: f64) -> f64 {
    let radius = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = t - boundary_tolerance(radius);
    let count = eigenvalues.iter().filter(|&&v| v >= cut).count();
    count as f64 / eigenvalues.len() as f64
}

/// `Prob(x >= t) = tau(chi_[t, inf)(x))`.
pub fn tail_probability(x: &HermitianElement, t: f64) -> Result<f64> {
    Ok(tail_fraction(&x.spectrum()?, t))
}

/// `Prob(|x| >= t)`, read off the spectrum of `x` directly.
pub fn abs_tail_probability(x: &HermitianElement, t: f64) -> Result<f64> {
    let abs: Vec<f64> = x.spectrum()?.iter().map(|v| v.abs()).collect();
    Ok(tail_fraction(&abs, t))
}

/// `|x| = (x^* x)^{1/2}`.
pub fn abs_element(x: &HermitianElement) -> Result<HermitianElement> {
    apply_function(x, f64::abs)
}

/// Schatten norm `(tau(|x|^p))^{1/p}`; `p = inf` gives the operator norm.
pub fn schatten_norm(x: &HermitianElement, p: f64) -> Result<f64> {
    schatten_norm_of_spectrum(&x.spectrum()?, p)
}

pub fn schatten_norm_of_spectrum(eigenvalues: &[f64], p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Parameter(format!("Schatten exponent p = {p} must be >= 1")));
    }
    if p.is_infinite() {
        return Ok(eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    let mean = eigenvalues.iter().map(|v| v.abs().powf(p)).sum::<f64>() / eigenvalues.len() as f64;
    Ok(mean.powf(1.0 / p))
}

/// `x <= y` in the operator order: `min eig(y - x) >= -tol * max(1, |x|, |y|)`.
pub fn leq_order(x: &HermitianElement, y: &HermitianElement, tol: f64) -> Result<bool> {
    Ok(order_defect(x, y)? <= tol)
}

/// Smallest `eps >= 0` with `x <= y + eps * max(1, |x|, |y|)`.
pub fn order_defect(x: &HermitianElement, y: &HermitianElement) -> Result<f64> {
    x.check_dim(y)?;
    let scale = 1f64.max(x.op_norm()?).max(y.op_norm()?);
    let gap = (y - x).min_eigenvalue()?;
    Ok((-gap).max(0.0) / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SampleStream;
    use proptest::prelude::*;

    fn random_hermitian(seed: u64, d: usize) -> HermitianElement {
        HermitianElement::from_matrix(SampleStream::new(seed).gue(d)).unwrap()
    }

    /// Scaling-and-squaring Taylor exponential, independent of the eigensolver.
    fn expm_taylor(m: &CMatrix) -> CMatrix {
        let norm = m.norm();
        let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
        let a = m.scale(0.5f64.powi(squarings));
        let d = m.nrows();
        let mut term = CMatrix::identity(d, d);
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &a / Complex64::new(k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn construction_symmetrizes() {
        let m = DMatrix::from_row_slice(2, 2, &[
            Complex64::new(1.0, 0.3),
            Complex64::new(2.0, 1.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ]);
        let x = HermitianElement::from_matrix(m).unwrap();
        assert!((x.matrix() - x.matrix().adjoint()).norm() == 0.0);
        assert_eq!(x.matrix()[(0, 0)], Complex64::new(1.0, 0.0));
        assert!(HermitianElement::from_matrix(CMatrix::zeros(2, 3)).is_err());
        assert_eq!(HermitianElement::from_matrix(CMatrix::zeros(0, 0)), Err(Error::Empty));
    }

    #[test]
    fn function_calculus_examples() {
        let e = exp(&HermitianElement::zeros(3)).unwrap();
        assert!(e.max_abs_diff(&HermitianElement::identity(3)) < 1e-15);

        let r = apply_function(&HermitianElement::diagonal(&[1.0, 4.0]), f64::sqrt).unwrap();
        assert!(r.max_abs_diff(&HermitianElement::diagonal(&[1.0, 2.0])) < 1e-15);

        for &t in &[0.3, 1.0, 2.5] {
            let x = HermitianElement::from_real_rows(&[&[0.0, t], &[t, 0.0]]).unwrap();
            let ours = exp(&x).unwrap();
            let oracle = expm_taylor(x.matrix());
            assert!((ours.matrix() - &oracle).norm() / oracle.norm() < 1e-12);
            let analytic = HermitianElement::from_real_rows(&[&[t.cosh(), t.sinh()], &[t.sinh(), t.cosh()]]).unwrap();
            assert!(ours.max_abs_diff(&analytic) < 1e-12 * t.cosh());
        }
    }

    #[test]
    fn exponential_matches_taylor_oracle_on_random_input() {
        for seed in 0..5 {
            let x = random_hermitian(seed, 6);
            let ours = exp(&x).unwrap();
            let oracle = expm_taylor(x.matrix());
            assert!((ours.matrix() - &oracle).norm() / oracle.norm() < 1e-11);
        }
    }

    #[test]
    fn domain_error_for_log_of_nonpositive() {
        let x = HermitianElement::diagonal(&[1.0, 0.0]);
        assert!(matches!(apply_function(&x, f64::ln), Err(Error::Domain(_))));
        let y = HermitianElement::diagonal(&[1.0, -2.0]);
        assert!(matches!(apply_function(&y, f64::sqrt), Err(Error::Domain(_))));
    }

    #[test]
    fn result_commutes_with_input() {
        let x = random_hermitian(3, 5);
        let fx = apply_function(&x, |v| v.powi(3) - v.sin()).unwrap();
        let comm = x.matrix() * fx.matrix() - fx.matrix() * x.matrix();
        assert!(comm.norm() / (x.frobenius_norm() * fx.frobenius_norm()) < 1e-9);
    }

    #[test]
    fn trace_state_examples() {
        for d in 1..5 {
            assert!((trace_state(&HermitianElement::identity(d)) - 1.0).abs() < 1e-15);
        }
        let x = HermitianElement::diagonal(&[3.0, 1.0, 1.0, -2.0]);
        assert!((trace_state(&x) - 0.75).abs() < 1e-15);
        let a = random_hermitian(8, 4);
        let same = apply_function(&a, |v| v).unwrap();
        assert!(trace_state(&(&a - &same)).abs() < 1e-12);

        let tau = TracialState::new(4).unwrap();
        assert!(tau.evaluate(&HermitianElement::identity(3)).is_err());
        let b = random_hermitian(9, 4);
        let ab = tau.evaluate_matrix(&(a.matrix() * b.matrix())).unwrap();
        let ba = tau.evaluate_matrix(&(b.matrix() * a.matrix())).unwrap();
        assert!((ab - ba).norm() < 1e-12);
        assert!(tau.evaluate_matrix(&(a.matrix().adjoint() * a.matrix())).unwrap().re >= 0.0);
    }

    #[test]
    fn tail_probability_examples() {
        let x = HermitianElement::diagonal(&[3.0, 1.0, 1.0, -2.0]);
        assert_eq!(tail_probability(&x, 2.0).unwrap(), 0.25);
        assert_eq!(tail_probability(&x, -3.0).unwrap(), 1.0);
        assert_eq!(tail_probability(&HermitianElement::zeros(3), 0.5).unwrap(), 0.0);
        // closed interval at the boundary
        assert_eq!(tail_probability(&x, 3.0).unwrap(), 0.25);
        assert_eq!(tail_probability(&x, 1.0).unwrap(), 0.75);
    }

    #[test]
    fn abs_examples() {
        let a = abs_element(&HermitianElement::diagonal(&[1.0, -1.0])).unwrap();
        assert!(a.max_abs_diff(&HermitianElement::identity(2)) < 1e-15);

        let g = SampleStream::new(4).ginibre(4);
        let pos = HermitianElement::from_matrix(&g * g.adjoint()).unwrap();
        let abs = abs_element(&pos).unwrap();
        assert!((abs.matrix() - pos.matrix()).norm() / pos.frobenius_norm() < 1e-10);

        let off = HermitianElement::from_real_rows(&[&[0.0, 2.0], &[2.0, 0.0]]).unwrap();
        let abs = abs_element(&off).unwrap();
        assert!(abs.max_abs_diff(&HermitianElement::scalar(2, 2.0)) < 1e-14);
    }

    #[test]
    fn schatten_examples() {
        assert!((schatten_norm(&HermitianElement::diagonal(&[1.0, -1.0]), 2.0).unwrap() - 1.0).abs() < 1e-15);
        for &p in &[1.0, 1.5, 2.0, 7.0, f64::INFINITY] {
            assert!((schatten_norm(&HermitianElement::identity(3), p).unwrap() - 1.0).abs() < 1e-15);
        }
        let x = HermitianElement::diagonal(&[3.0, 0.0, 0.0, 0.0]);
        assert!((schatten_norm(&x, 1.0).unwrap() - 0.75).abs() < 1e-15);
        assert!(matches!(schatten_norm(&x, 0.5), Err(Error::Parameter(_))));
        assert!(schatten_norm(&x, f64::NAN).is_err());
    }

    #[test]
    fn order_examples() {
        let zero = HermitianElement::zeros(2);
        assert!(leq_order(&zero, &HermitianElement::diagonal(&[1.0, 2.0]), 1e-12).unwrap());
        assert!(!leq_order(&HermitianElement::diagonal(&[2.0, 0.0]), &HermitianElement::diagonal(&[1.0, 1.0]), 1e-12).unwrap());
        let x = random_hermitian(2, 4);
        assert!(leq_order(&x, &x, 1e-12).unwrap());
        assert!(matches!(
            leq_order(&x, &zero, 1e-12),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn peierls_bogoliubov_and_tail_symmetry() {
        let mut rng = SampleStream::new(21);
        for _ in 0..20 {
            let x = HermitianElement::from_matrix(rng.gue(5)).unwrap();
            let lhs = trace_state(&exp(&x).unwrap());
            assert!(lhs >= trace_state(&x).exp() * (1.0 - 1e-12));
            let t = rng.normal();
            let sum = tail_probability(&x, t).unwrap() + tail_probability(&-&x, -t).unwrap();
            let at_boundary = x.spectrum().unwrap().iter().any(|v| (v - t).abs() < 1e-9);
            if at_boundary {
                assert!(sum >= 1.0);
            } else {
                assert_eq!(sum, 1.0);
            }
        }
        let x = HermitianElement::diagonal(&[1.0, 2.0]);
        assert_eq!(tail_probability(&x, 1.0).unwrap() + tail_probability(&-&x, -1.0).unwrap(), 1.5);
    }

    fn poly(coeffs: &[f64]) -> impl Fn(f64) -> f64 + '_ {
        move |v| coeffs.iter().rev().fold(0.0, |acc, c| acc * v + c)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn reconstruction(seed in any::<u64>(), d in 1usize..9) {
            let x = random_hermitian(seed, d);
            let sd = spectral_decompose(&x).unwrap();
            let err = (sd.reconstruct().matrix() - x.matrix()).norm() / x.frobenius_norm().max(1e-300);
            prop_assert!(err < 1e-10);
        }

        #[test]
        fn functional_calculus_is_multiplicative(
            seed in any::<u64>(),
            d in 1usize..7,
            f in proptest::collection::vec(-2.0f64..2.0, 1..4),
            g in proptest::collection::vec(-2.0f64..2.0, 1..4),
        ) {
            let x = random_hermitian(seed, d);
            let fg = apply_function(&x, |v| poly(&f)(v) * poly(&g)(v)).unwrap();
            let prod = apply_function(&x, poly(&f)).unwrap().matrix() * apply_function(&x, poly(&g)).unwrap().matrix();
            prop_assert!((fg.matrix() - &prod).norm() / prod.norm().max(1.0) < 1e-9);
        }

        #[test]
        fn tail_probability_is_monotone(seed in any::<u64>(), d in 1usize..7, t in -3.0f64..3.0, dt in 0.0f64..2.0) {
            let x = random_hermitian(seed, d);
            let hi = tail_probability(&x, t).unwrap();
            let lo = tail_probability(&x, t + dt).unwrap();
            prop_assert!(lo <= hi);
            prop_assert!((0.0..=1.0).contains(&hi));
            prop_assert_eq!(tail_probability(&x, x.min_eigenvalue().unwrap()).unwrap(), 1.0);
        }

        #[test]
        fn schatten_triangle(seed in any::<u64>(), d in 1usize..7, p in 1.0f64..8.0) {
            let mut rng = SampleStream::new(seed);
            let x = HermitianElement::from_matrix(rng.gue(d)).unwrap();
            let y = HermitianElement::from_matrix(rng.gue(d)).unwrap();
            let lhs = schatten_norm(&(&x + &y), p).unwrap();
            let rhs = schatten_norm(&x, p).unwrap() + schatten_norm(&y, p).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }
}
